//! Spatially homogeneous DSMC for a single species of inelastic hard spheres.
//!
//! Pairs are selected with the no-time-counter scheme against a global
//! relative-speed majorant `g_max`. Each candidate draws a direction `n`
//! uniformly on the sphere and is accepted with probability `|g . n| / g_max`,
//! which reproduces the per-pair rate `(pi/2) d² |g|` of the collision kernel
//! `d²/4 |g . n|` integrated over the full sphere.
//!
//! The simulated ensemble represents a volume `V = N w / n_density`, so only
//! the number density enters the collision rate.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::collision::{self, CollisionBranch, Species};
use crate::operator::uniform_on_sphere;
use crate::rng::{derive_key, stream_rng, Estimate, Welford};
use crate::{KineticsError, Result, Vec3};

/// Majorant doublings attempted before a step gives up.
pub const MAX_MAJORANT_RETRIES: u32 = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    pub velocities: Vec<Vec3>,
    pub species: Species,
    pub statistical_weight: f64,
}

impl ParticleEnsemble {
    pub fn validate(&self) -> Result<()> {
        if self.velocities.len() < 2 {
            return Err(KineticsError::param("count", "need at least two particles"));
        }
        if !(self.statistical_weight > 0.0 && self.statistical_weight.is_finite()) {
            return Err(KineticsError::param("statistical_weight", "must be positive"));
        }
        if !self.velocities.iter().all(|v| v.iter().all(|c| c.is_finite())) {
            return Err(KineticsError::param("velocities", "must be finite"));
        }
        Ok(())
    }

    pub fn mean_velocity(&self) -> Vec3 {
        self.velocities.iter().sum::<Vec3>() / self.velocities.len() as f64
    }

    pub fn total_momentum(&self) -> Vec3 {
        self.velocities.iter().sum::<Vec3>() * self.species.mass
    }

    /// `sum m |v|`, the scale against which momentum drift is measured.
    pub fn momentum_scale(&self) -> f64 {
        self.species.mass * self.velocities.iter().map(|v| v.norm()).sum::<f64>()
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.species.mass * self.velocities.iter().map(|v| v.norm_squared()).sum::<f64>()
    }

    /// Granular temperature `m <|v - u|²> / 3`.
    pub fn temperature(&self) -> f64 {
        let u = self.mean_velocity();
        let sum: f64 = self.velocities.iter().map(|v| (v - u).norm_squared()).sum();
        self.species.mass * sum / (3.0 * self.velocities.len() as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DsmcConfig {
    pub dt: f64,
    pub number_density: f64,
    pub epsilon: f64,
    pub branch: CollisionBranch,
    pub seed: u64,
    pub majorant_relative_speed: f64,
}

impl DsmcConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(KineticsError::param("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.number_density > 0.0 && self.number_density.is_finite()) {
            return Err(KineticsError::param("number_density", "must be positive"));
        }
        if !(self.majorant_relative_speed > 0.0 && self.majorant_relative_speed.is_finite()) {
            return Err(KineticsError::param("majorant_relative_speed", "must be positive"));
        }
        collision::check_restitution(self.epsilon)
    }
}

/// Moments recorded by [`Dsmc::run`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSample {
    pub t: f64,
    pub density: f64,
    /// Momentum density.
    pub momentum: Vec3,
    pub temperature: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    pub candidates: u64,
    pub collisions: u64,
    pub majorant_doublings: u32,
}

/// Stepping state around a [`ParticleEnsemble`].
#[derive(Debug, Clone)]
pub struct Dsmc {
    ensemble: ParticleEnsemble,
    config: DsmcConfig,
    majorant: f64,
    remainder: f64,
    steps: u64,
    time: f64,
    total_collisions: u64,
}

struct Undo {
    i: usize,
    j: usize,
    vi: Vec3,
    vj: Vec3,
}

impl Dsmc {
    pub fn new(ensemble: ParticleEnsemble, config: DsmcConfig) -> Result<Self> {
        ensemble.validate()?;
        config.validate()?;
        Ok(Dsmc {
            majorant: config.majorant_relative_speed,
            ensemble,
            config,
            remainder: 0.0,
            steps: 0,
            time: 0.0,
            total_collisions: 0,
        })
    }

    pub fn ensemble(&self) -> &ParticleEnsemble {
        &self.ensemble
    }

    pub fn into_ensemble(self) -> ParticleEnsemble {
        self.ensemble
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn majorant(&self) -> f64 {
        self.majorant
    }

    pub fn total_collisions(&self) -> u64 {
        self.total_collisions
    }

    pub fn sample(&self) -> MomentSample {
        let n = self.ensemble.velocities.len() as f64;
        MomentSample {
            t: self.time,
            density: self.config.number_density,
            momentum: self.ensemble.total_momentum() * (self.config.number_density / n),
            temperature: self.ensemble.temperature(),
        }
    }

    /// One collision step of length `dt`. If a candidate pair's relative speed
    /// exceeds the majorant, the step is undone, the majorant doubled and the
    /// step replayed.
    pub fn step(&mut self) -> Result<StepStats> {
        let mut doublings = 0;
        loop {
            match self.try_step() {
                Ok(mut stats) => {
                    stats.majorant_doublings = doublings;
                    self.steps += 1;
                    self.time += self.config.dt;
                    self.total_collisions += stats.collisions;
                    return Ok(stats);
                }
                Err(()) if doublings < MAX_MAJORANT_RETRIES => {
                    self.majorant *= 2.0;
                    doublings += 1;
                }
                Err(()) => return Err(KineticsError::MajorantExceeded { retries: doublings }),
            }
        }
    }

    fn try_step(&mut self) -> std::result::Result<StepStats, ()> {
        let cfg = self.config;
        let species = self.ensemble.species;
        let count = self.ensemble.velocities.len();
        let sigma = std::f64::consts::PI * species.diameter * species.diameter;
        // 1/2 N (N - 1) (w / V) pi d² g_max dt with w / V = n / N.
        let expected = 0.5 * (count - 1) as f64 * cfg.number_density * sigma * self.majorant * cfg.dt + self.remainder;
        let candidates = expected.floor() as u64;
        let mut rng = stream_rng(derive_key(&[cfg.seed, 0xD5]), self.steps);
        let mut undo: Vec<Undo> = Vec::new();
        let mut stats = StepStats {
            candidates,
            ..StepStats::default()
        };
        let velocities = &mut self.ensemble.velocities;
        for _ in 0..candidates {
            let i = rng.random_range(0..count);
            let mut j = rng.random_range(0..count - 1);
            if j >= i {
                j += 1;
            }
            let (vi, vj) = (velocities[i], velocities[j]);
            let g = vj - vi;
            if g.norm() > self.majorant {
                for u in undo.iter().rev() {
                    velocities[u.i] = u.vi;
                    velocities[u.j] = u.vj;
                }
                return Err(());
            }
            let n = uniform_on_sphere(&mut rng);
            if rng.random::<f64>() * self.majorant >= g.dot(&n).abs() {
                continue;
            }
            let e = collision::collide(vi, vj, n, cfg.epsilon, cfg.branch, species, species)
                .expect("validated configuration");
            undo.push(Undo { i, j, vi, vj });
            velocities[i] = e.w1;
            velocities[j] = e.w2;
            stats.collisions += 1;
        }
        self.remainder = expected - candidates as f64;
        Ok(stats)
    }

    /// Step `n_steps` times, sampling at `t = 0` and after every
    /// `sample_every` steps.
    pub fn run(&mut self, n_steps: usize, sample_every: usize) -> Result<Vec<MomentSample>> {
        if sample_every == 0 {
            return Err(KineticsError::param("sample_every", "must be at least 1"));
        }
        let mut out = vec![self.sample()];
        for k in 1..=n_steps {
            self.step()?;
            if k % sample_every == 0 {
                out.push(self.sample());
            }
        }
        Ok(out)
    }
}

/// `count` velocities drawn i.i.d. from a Maxwellian; the ensemble stands for a
/// unit volume, so `statistical_weight = density / count`.
pub fn sample_maxwellian_ensemble(
    count: usize,
    species: Species,
    density: f64,
    u: Vec3,
    temperature: f64,
    seed: u64,
) -> Result<ParticleEnsemble> {
    if count < 2 {
        return Err(KineticsError::param("count", "need at least two particles"));
    }
    if !(density > 0.0 && density.is_finite()) {
        return Err(KineticsError::param("density", "must be positive"));
    }
    if !(temperature >= 0.0 && temperature.is_finite()) {
        return Err(KineticsError::param("temperature", "must be non-negative"));
    }
    let vth = (temperature / species.mass).sqrt();
    let mut rng = stream_rng(derive_key(&[seed, 0x4D58]), 0);
    let velocities = (0..count)
        .map(|_| {
            let z = Vec3::new(
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
            );
            u + vth * z
        })
        .collect();
    Ok(ParticleEnsemble {
        velocities,
        species,
        statistical_weight: density / count as f64,
    })
}

/// Fitted `T(t) = A (1 + t / t0)^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoolingFit {
    pub amplitude: f64,
    pub t0: f64,
    pub exponent: f64,
    /// Root-mean-square residual of `ln T`.
    pub rms_log_residual: f64,
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    (intercept, slope, (rss / n).sqrt())
}

/// Least-squares fit of `ln T = ln A + p ln(1 + t / t0)`, with `t0` found by
/// golden-section search in `ln t0` and `(ln A, p)` solved linearly.
pub fn fit_cooling_law(times: &[f64], temperatures: &[f64]) -> Result<CoolingFit> {
    if times.len() != temperatures.len() || times.len() < 4 {
        return Err(KineticsError::param("samples", "need at least four (t, T) pairs"));
    }
    if temperatures.iter().any(|&t| !(t > 0.0)) || times.iter().any(|&t| !(t >= 0.0)) {
        return Err(KineticsError::param("samples", "times must be non-negative and temperatures positive"));
    }
    let logs: Vec<f64> = temperatures.iter().map(|t| t.ln()).collect();
    let fit_at = |log_t0: f64| {
        let t0 = log_t0.exp();
        let xs: Vec<f64> = times.iter().map(|t| (1.0 + t / t0).ln()).collect();
        linear_fit(&xs, &logs)
    };
    let span = times.iter().cloned().fold(0.0, f64::max).max(1e-300);
    let (mut a, mut b) = ((span * 1e-4).ln(), (span * 1e2).ln());
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (fit_at(c).2, fit_at(d).2);
    for _ in 0..200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = fit_at(c).2;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = fit_at(d).2;
        }
        if (b - a).abs() < 1e-10 {
            break;
        }
    }
    let log_t0 = 0.5 * (a + b);
    let (intercept, slope, rms) = fit_at(log_t0);
    Ok(CoolingFit {
        amplitude: intercept.exp(),
        t0: log_t0.exp(),
        exponent: slope,
        rms_log_residual: rms,
    })
}

/// Parameters for measuring `dT/dt` at `t = 0` from a Maxwellian start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialCoolingSetup {
    pub particles: usize,
    pub replicas: usize,
    pub steps: usize,
    pub dt: f64,
    pub species: Species,
    pub number_density: f64,
    pub temperature: f64,
    pub epsilon: f64,
    pub branch: CollisionBranch,
    pub seed: u64,
}

/// Initial cooling rate `dT/dt (0)`, averaged over independent replicas.
///
/// Each replica records `T` after every step and fits a quadratic in `t`; the
/// linear coefficient is that replica's slope at `t = 0`. The standard error
/// comes from the replica spread.
pub fn measure_initial_cooling_rate(setup: &InitialCoolingSetup) -> Result<Estimate> {
    if setup.replicas < 2 || setup.steps < 3 {
        return Err(KineticsError::param("replicas", "need at least two replicas of three steps"));
    }
    let vth = (setup.temperature / setup.species.mass).sqrt();
    let mut acc = Welford::default();
    for r in 0..setup.replicas {
        let seed = derive_key(&[setup.seed, r as u64]);
        let ensemble = sample_maxwellian_ensemble(
            setup.particles,
            setup.species,
            setup.number_density,
            Vec3::zeros(),
            setup.temperature,
            seed,
        )?;
        let mut sim = Dsmc::new(
            ensemble,
            DsmcConfig {
                dt: setup.dt,
                number_density: setup.number_density,
                epsilon: setup.epsilon,
                branch: setup.branch,
                seed,
                majorant_relative_speed: 8.0 * vth,
            },
        )?;
        let samples = sim.run(setup.steps, 1)?;
        let ts: Vec<f64> = samples.iter().map(|s| s.t).collect();
        let temps: Vec<f64> = samples.iter().map(|s| s.temperature).collect();
        acc.push(quadratic_slope_at_zero(&ts, &temps));
    }
    Ok(acc.estimate())
}

/// Linear coefficient of the least-squares quadratic through `(t, y)`.
fn quadratic_slope_at_zero(ts: &[f64], ys: &[f64]) -> f64 {
    let mut normal = nalgebra::Matrix3::<f64>::zeros();
    let mut rhs = nalgebra::Vector3::<f64>::zeros();
    for (&t, &y) in ts.iter().zip(ys) {
        let row = nalgebra::Vector3::new(1.0, t, t * t);
        normal += row * row.transpose();
        rhs += row * y;
    }
    let coeffs = normal.lu().solve(&rhs).unwrap_or_else(nalgebra::Vector3::zeros);
    coeffs[1]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Species {
        Species::new(1.0, 1.0).unwrap()
    }

    fn config(epsilon: f64, seed: u64) -> DsmcConfig {
        DsmcConfig {
            dt: 0.02,
            number_density: 1.0,
            epsilon,
            branch: CollisionBranch::Reflective,
            seed,
            majorant_relative_speed: 8.0,
        }
    }

    #[test]
    fn cold_ensemble_sits_at_bulk_velocity() {
        let u = Vec3::new(1.0, -2.0, 0.5);
        let e = sample_maxwellian_ensemble(100, unit(), 1.0, u, 0.0, 3).unwrap();
        assert!(e.velocities.iter().all(|v| *v == u));
        assert!(sample_maxwellian_ensemble(1, unit(), 1.0, u, 1.0, 3).is_err());
    }

    #[test]
    fn ensemble_sampling_is_deterministic_and_unbiased() {
        let u = Vec3::new(5.0, 0.0, 0.0);
        let a = sample_maxwellian_ensemble(20_000, unit(), 1.0, u, 2.0, 9).unwrap();
        let b = sample_maxwellian_ensemble(20_000, unit(), 1.0, u, 2.0, 9).unwrap();
        assert_eq!(a, b);
        let sigma = (2.0f64).sqrt();
        let bound = 5.0 * sigma / (20_000f64).sqrt();
        assert!((a.mean_velocity() - u).amax() < bound);
        assert!((a.temperature() - 2.0).abs() < 5.0 * 2.0 * (2.0 / (3.0 * 20_000.0f64)).sqrt());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let e = sample_maxwellian_ensemble(10, unit(), 1.0, Vec3::zeros(), 1.0, 1).unwrap();
        let mut c = config(0.9, 1);
        c.dt = 0.0;
        assert!(Dsmc::new(e.clone(), c).is_err());
        let mut c = config(0.9, 1);
        c.epsilon = 1.5;
        assert!(Dsmc::new(e.clone(), c).is_err());
        let mut sim = Dsmc::new(e, config(0.9, 1)).unwrap();
        assert!(sim.run(1, 0).is_err());
    }

    #[test]
    fn zero_steps_sample_initial_moments() {
        let e = sample_maxwellian_ensemble(500, unit(), 2.0, Vec3::x(), 1.0, 4).unwrap();
        let mut sim = Dsmc::new(e.clone(), config(0.9, 1)).unwrap();
        let s = sim.run(0, 1).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].t, 0.0);
        assert_eq!(s[0].temperature, e.temperature());
    }

    #[test]
    fn majorant_grows_when_exceeded() {
        let e = sample_maxwellian_ensemble(2000, unit(), 1.0, Vec3::zeros(), 1.0, 5).unwrap();
        let mut c = config(1.0, 2);
        c.majorant_relative_speed = 0.1;
        let mut sim = Dsmc::new(e, c).unwrap();
        let stats = sim.step().unwrap();
        assert!(stats.majorant_doublings > 0);
        assert!(sim.majorant() > 0.1);
    }

    #[test]
    fn elastic_run_conserves_energy_and_momentum() {
        let e = sample_maxwellian_ensemble(5000, unit(), 1.0, Vec3::new(0.3, 0.0, 0.0), 1.0, 6).unwrap();
        let (e0, p0, scale) = (e.kinetic_energy(), e.total_momentum(), e.momentum_scale());
        let mut sim = Dsmc::new(e, config(1.0, 7)).unwrap();
        sim.run(500, 100).unwrap();
        assert!(sim.total_collisions() > 10_000);
        let e1 = sim.ensemble().kinetic_energy();
        assert!((e1 - e0).abs() / e0 < 1e-12);
        assert!((sim.ensemble().total_momentum() - p0).norm() / scale < 1e-12);
    }

    #[test]
    fn inelastic_collisions_never_add_energy() {
        let e = sample_maxwellian_ensemble(2000, unit(), 1.0, Vec3::zeros(), 1.0, 8).unwrap();
        let mut sim = Dsmc::new(e, config(0.7, 9)).unwrap();
        let mut last = sim.ensemble().kinetic_energy();
        for _ in 0..50 {
            sim.step().unwrap();
            let now = sim.ensemble().kinetic_energy();
            assert!(now <= last);
            last = now;
        }
    }

    #[test]
    fn runs_are_reproducible() {
        let e = sample_maxwellian_ensemble(1000, unit(), 1.0, Vec3::zeros(), 1.0, 10).unwrap();
        let a = Dsmc::new(e.clone(), config(0.8, 11)).unwrap().run(50, 5).unwrap();
        let b = Dsmc::new(e, config(0.8, 11)).unwrap().run(50, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cooling_fit_recovers_synthetic_law() {
        let ts: Vec<f64> = (0..60).map(|k| k as f64 * 2.0).collect();
        let temps: Vec<f64> = ts.iter().map(|t| 3.0 * (1.0 + t / 7.0f64).powf(-2.0)).collect();
        let fit = fit_cooling_law(&ts, &temps).unwrap();
        assert!((fit.exponent + 2.0).abs() < 1e-4, "{fit:?}");
        assert!((fit.t0 - 7.0).abs() < 1e-2, "{fit:?}");
        assert!(fit_cooling_law(&ts[..3], &temps[..3]).is_err());
    }

    #[test]
    fn quadratic_slope_is_exact_for_quadratics() {
        let ts: Vec<f64> = (0..10).map(|k| k as f64 * 0.1).collect();
        let ys: Vec<f64> = ts.iter().map(|t| 2.0 - 0.7 * t + 0.3 * t * t).collect();
        assert!((quadratic_slope_at_zero(&ts, &ys) + 0.7).abs() < 1e-10);
    }
}
