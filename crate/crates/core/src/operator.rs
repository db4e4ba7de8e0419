//! Monte Carlo quadrature of the inelastic Boltzmann collision term
//!
//! ```text
//! C[f](v) = ∫∫ (G f(v') f(v1') - f(v) f(v1)) d²/4 |(v - v1)·n| dv1 dn
//! ```
//!
//! where `(v', v1')` are the pre-collision velocities that the chosen branch
//! maps onto `(v, v1)`. `v1` is drawn uniformly over the density's sampling
//! cube and `n` uniformly over the full unit sphere.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collision::{self, CollisionBranch, Species};
use crate::distribution::VelocityDensity;
use crate::rng::{derive_key, monte_carlo, Estimate};
use crate::{KineticsError, Result, Vec3};

/// Rate of change of `f` at one velocity, with its Monte Carlo standard error.
pub type RateEstimate = Estimate;

/// Weight applied to the gain term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainNormalization {
    /// Gain weighted by `epsilon`.
    #[default]
    PaperForm,
    /// Gain weighted by `1 / epsilon^2`, the measure-preserving choice.
    StandardGranular,
}

impl GainNormalization {
    pub fn gain_weight(self, epsilon: f64) -> f64 {
        match self {
            GainNormalization::PaperForm => epsilon,
            GainNormalization::StandardGranular => 1.0 / (epsilon * epsilon),
        }
    }

    /// Gain weight times `epsilon^2`: the factor the gain picks up in the weak
    /// form once integrated back to pre-collision variables. Kept exact for the
    /// standard form so that collision invariants cancel bitwise.
    fn weak_gain_factor(self, epsilon: f64) -> f64 {
        match self {
            GainNormalization::PaperForm => epsilon * epsilon * epsilon,
            GainNormalization::StandardGranular => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub samples: usize,
    pub seed: u64,
    pub diameter: f64,
    pub mass: f64,
    pub epsilon: f64,
    pub branch: CollisionBranch,
    pub normalization: GainNormalization,
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(KineticsError::param("samples", "need at least one sample"));
        }
        Species::new(self.mass, self.diameter)?;
        if self.epsilon <= 0.0 {
            return Err(KineticsError::SingularRestitution(self.epsilon));
        }
        collision::check_restitution(self.epsilon)
    }

    fn species(&self) -> Species {
        Species {
            mass: self.mass,
            diameter: self.diameter,
        }
    }

    fn cross_section(&self) -> f64 {
        0.25 * self.diameter * self.diameter
    }
}

fn uniform_in_cube(rng: &mut ChaCha8Rng, half_width: f64) -> Vec3 {
    Vec3::new(
        half_width * (2.0 * rng.random::<f64>() - 1.0),
        half_width * (2.0 * rng.random::<f64>() - 1.0),
        half_width * (2.0 * rng.random::<f64>() - 1.0),
    )
}

/// Uniform direction on the unit sphere.
pub fn uniform_on_sphere<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    let z = 2.0 * rng.random::<f64>() - 1.0;
    let phi = 2.0 * PI * rng.random::<f64>();
    let r = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

fn probe_key(seed: u64, v: &Vec3) -> u64 {
    derive_key(&[seed, v.x.to_bits(), v.y.to_bits(), v.z.to_bits()])
}

/// Collision term at velocity `v`.
///
/// The random stream is keyed by `(seed, v)`, so a given probe velocity always
/// sees the same samples regardless of batching.
pub fn evaluate_at<D: VelocityDensity + ?Sized>(f: &D, v: Vec3, spec: &QuadratureSpec) -> Result<RateEstimate> {
    spec.validate()?;
    if !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()) {
        return Err(KineticsError::param("v", "probe velocity must be finite"));
    }
    if f.is_identically_zero() {
        return Ok(Estimate::ZERO);
    }
    let w = f.half_width();
    let weight = (2.0 * w).powi(3) * 4.0 * PI * spec.cross_section();
    let gain = spec.normalization.gain_weight(spec.epsilon);
    let species = spec.species();
    let fv = f.value(&v);
    // Gain and loss take independent (v1, n) draws. With shared draws the
    // elastic equilibrium integrand cancels to rounding level and the standard
    // error would measure floating-point bias instead of sampling noise.
    let [est] = monte_carlo::<1, _>(spec.samples, probe_key(spec.seed, &v), |rng| {
        let v1 = uniform_in_cube(rng, w);
        let n = uniform_on_sphere(rng);
        // n is unit by construction and epsilon was validated.
        let (pre, pre1) = collision::inverse_collide(v, v1, n, spec.epsilon, spec.branch, species, species)
            .expect("validated inputs");
        let gain_term = gain * f.value(&pre) * f.value(&pre1) * (v - v1).dot(&n).abs();
        let u1 = uniform_in_cube(rng, w);
        let m = uniform_on_sphere(rng);
        let loss_term = fv * f.value(&u1) * (v - u1).dot(&m).abs();
        [weight * (gain_term - loss_term)]
    });
    Ok(est)
}

/// [`evaluate_at`] over many probe velocities, in parallel.
pub fn evaluate_field<D: VelocityDensity + ?Sized>(
    f: &D,
    nodes: &[Vec3],
    spec: &QuadratureSpec,
) -> Result<Vec<RateEstimate>> {
    spec.validate()?;
    nodes.par_iter().map(|v| evaluate_at(f, *v, spec)).collect()
}

/// Rates of change of the collision invariants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentRates {
    pub density: Estimate,
    pub momentum: [Estimate; 3],
    pub energy: Estimate,
}

/// Weak form of the collision term against `1`, `m v` and `m |v|^2 / 2`.
///
/// Substituting the pre-collision pair as integration variables turns the gain
/// term into `G eps^2 (phi(w) + phi(w1)) / 2` with `(w, w1)` the forward
/// collision of `(v, v1)`; the loss term is `(phi(v) + phi(v1)) / 2`. The
/// triple `(v, v1, n)` is sampled uniformly.
pub fn moment_rates<D: VelocityDensity + ?Sized>(f: &D, spec: &QuadratureSpec) -> Result<MomentRates> {
    spec.validate()?;
    if f.is_identically_zero() {
        return Ok(MomentRates {
            density: Estimate::ZERO,
            momentum: [Estimate::ZERO; 3],
            energy: Estimate::ZERO,
        });
    }
    let w = f.half_width();
    let weight = (2.0 * w).powi(6) * 4.0 * PI * spec.cross_section();
    let k = spec.normalization.weak_gain_factor(spec.epsilon);
    let species = spec.species();
    let m = spec.mass;
    let key = derive_key(&[spec.seed, 0x4D4F_4D45_4E54]);
    let est = monte_carlo::<5, _>(spec.samples, key, |rng| {
        let v = uniform_in_cube(rng, w);
        let v1 = uniform_in_cube(rng, w);
        let n = uniform_on_sphere(rng);
        let base = weight * f.value(&v) * f.value(&v1) * (v - v1).dot(&n).abs();
        if base == 0.0 {
            return [0.0; 5];
        }
        let e = collision::collide(v, v1, n, spec.epsilon, spec.branch, species, species).expect("validated inputs");
        let unbalanced = 0.5 * (k - 1.0);
        let dp = m * (e.lambda1 + e.lambda2) * n;
        let p = unbalanced * m * (v + v1) + 0.5 * k * dp;
        let energy = unbalanced * (collision::kinetic_energy(m, &v) + collision::kinetic_energy(m, &v1))
            - 0.5 * k * e.delta_e;
        [
            base * 2.0 * unbalanced,
            base * p.x,
            base * p.y,
            base * p.z,
            base * energy,
        ]
    });
    Ok(MomentRates {
        density: est[0],
        momentum: [est[1], est[2], est[3]],
        energy: est[4],
    })
}
