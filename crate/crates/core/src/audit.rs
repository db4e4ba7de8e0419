//! Numerical checks of the model's stated identities, each reduced to a
//! residual, a threshold and a mechanically derived verdict.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::collision::{self, CollisionBranch, Species};
use crate::distribution::{MaxwellianMixture, MaxwellianMode, VelocityDensity};
use crate::operator::{evaluate_field, moment_rates, uniform_on_sphere, GainNormalization, QuadratureSpec};
use crate::rng::{derive_key, stream_rng};
use crate::sphere::{
    self, chart_jacobian, exp_subgroup, match_generator, project_chart, unproject_chart, ChartCoords, Hemisphere,
    PureQuaternion,
};
use crate::{KineticsError, Result, Vec3};

/// Significance threshold for Monte Carlo claims.
pub const SIGMA_THRESHOLD: f64 = 3.0;
pub const JACOBIAN_TOLERANCE: f64 = 1e-6;
pub const ENERGY_TOLERANCE: f64 = 1e-12;
pub const MIN_STOKES_PROBES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Consistent,
    Inconsistent,
    DiagnosticOnly,
}

impl Verdict {
    /// `residual <= threshold`; NaN residuals are inconsistent.
    pub fn grade(residual: f64, threshold: f64) -> Verdict {
        if residual <= threshold {
            Verdict::Consistent
        } else {
            Verdict::Inconsistent
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Consistent => "consistent",
            Verdict::Inconsistent => "inconsistent",
            Verdict::DiagnosticOnly => "diagnostic-only",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub claim_id: String,
    /// The identity under test, written out as a formula.
    pub paper_ref: String,
    pub residual: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    pub metadata: BTreeMap<String, Value>,
}

impl AuditReport {
    pub fn graded(claim_id: impl Into<String>, paper_ref: &str, residual: f64, threshold: f64) -> Self {
        AuditReport {
            claim_id: claim_id.into(),
            paper_ref: paper_ref.into(),
            residual,
            threshold,
            verdict: Verdict::grade(residual, threshold),
            metadata: BTreeMap::new(),
        }
    }

    pub fn diagnostic(claim_id: impl Into<String>, paper_ref: &str, residual: f64) -> Self {
        AuditReport {
            claim_id: claim_id.into(),
            paper_ref: paper_ref.into(),
            residual,
            threshold: f64::NAN,
            verdict: Verdict::DiagnosticOnly,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.insert(key.into(), value.into());
        self
    }

    pub fn metadata_json(&self) -> String {
        serde_json::to_string(&self.metadata).expect("metadata is plain JSON")
    }

    /// Fields in CSV column order: `claim_id,paper_ref,residual,threshold,verdict,metadata_json`.
    pub fn csv_fields(&self) -> [String; 6] {
        let threshold = if self.threshold.is_nan() { String::new() } else { format!("{:e}", self.threshold) };
        [
            self.claim_id.clone(),
            self.paper_ref.clone(),
            format!("{:e}", self.residual),
            threshold,
            self.verdict.as_str().into(),
            self.metadata_json(),
        ]
    }
}

pub const CSV_HEADER: [&str; 6] = ["claim_id", "paper_ref", "residual", "threshold", "verdict", "metadata_json"];

/// Human-readable table of `reports`.
pub fn summary(reports: &[AuditReport]) -> String {
    let mut out = String::new();
    let width = reports.iter().map(|r| r.claim_id.len()).max().unwrap_or(8).max(8);
    for r in reports {
        let threshold = if r.threshold.is_nan() { "-".to_string() } else { format!("{:.3e}", r.threshold) };
        let _ = writeln!(
            out,
            "{:<width$}  {:<15}  residual {:>11.4e}  threshold {:>10}  {}",
            r.claim_id,
            r.verdict.as_str(),
            r.residual,
            threshold,
            r.paper_ref,
        );
    }
    let count = |v: Verdict| reports.iter().filter(|r| r.verdict == v).count();
    let _ = writeln!(
        out,
        "\n{} rows: {} consistent, {} inconsistent, {} diagnostic-only",
        reports.len(),
        count(Verdict::Consistent),
        count(Verdict::Inconsistent),
        count(Verdict::DiagnosticOnly)
    );
    out
}

fn random_vec(rng: &mut impl Rng, half: f64) -> Vec3 {
    Vec3::new(
        rng.random_range(-half..half),
        rng.random_range(-half..half),
        rng.random_range(-half..half),
    )
}

fn random_species(rng: &mut impl Rng) -> Species {
    Species::new(rng.random_range(0.5..2.0), 1.0).expect("positive")
}

const JACOBIAN_REF: &str = "|J*| = |d(W2,W1)/d(v2,v1)| = eps";
pub const JACOBIAN_EPSILONS: [f64; 3] = [0.3, 0.7, 1.0];

/// Finite-difference collision Jacobian against `eps`, over `configs` random
/// configurations for every branch and every restitution in [`JACOBIAN_EPSILONS`].
pub fn audit_jacobian(seed: u64, configs: usize) -> Result<AuditReport> {
    let mut rng = stream_rng(derive_key(&[seed, 0x1AC0]), 0);
    let mut worst: f64 = 0.0;
    let mut per_eps = serde_json::Map::new();
    for &eps in &JACOBIAN_EPSILONS {
        let mut worst_eps: f64 = 0.0;
        for branch in CollisionBranch::ALL {
            for _ in 0..configs {
                let (v1, v2) = (random_vec(&mut rng, 3.0), random_vec(&mut rng, 3.0));
                let n = uniform_on_sphere(&mut rng);
                let (s1, s2) = (random_species(&mut rng), random_species(&mut rng));
                let j = collision::jacobian_numeric(v1, v2, n, eps, branch, s1, s2, None)?;
                worst_eps = worst_eps.max((j - eps).abs());
            }
        }
        per_eps.insert(format!("{eps}"), json!(worst_eps));
        worst = worst.max(worst_eps);
    }
    Ok(AuditReport::graded("jacobian", JACOBIAN_REF, worst, JACOBIAN_TOLERANCE)
        .with("seed", seed)
        .with("configs_per_branch", configs)
        .with("max_residual_by_epsilon", Value::Object(per_eps)))
}

const ENERGY_REF: &str = "dE = 1/2 (1 - eps^2) m1 m2/(m1 + m2) (v1 - v2)^2";

/// Discrepancy between the closed-form loss and the loss produced by the
/// collision rule, relative to the relative kinetic energy `mu |g|^2 / 2`.
fn energy_discrepancy(v1: Vec3, v2: Vec3, n: Vec3, eps: f64, branch: CollisionBranch, s1: Species, s2: Species) -> Result<(f64, f64)> {
    let event = collision::collide(v1, v2, n, eps, branch, s1, s2)?;
    let formula = collision::energy_loss_formula(v1, v2, eps, s1, s2)?;
    let mu = s1.mass * s2.mass / (s1.mass + s2.mass);
    let g = v2 - v1;
    let scale = 0.5 * mu * g.norm_squared();
    let predicted = 0.5 * (1.0 - eps * eps) * mu * (g.norm_squared() - g.dot(&n).powi(2));
    let discrepancy = formula - event.delta_e;
    if scale == 0.0 {
        return Ok((discrepancy.abs(), 0.0));
    }
    Ok((discrepancy.abs() / scale, (discrepancy - predicted).abs() / scale))
}

/// Closed-form energy loss against the collision rule, for head-on, oblique and
/// grazing impacts.
pub fn audit_energy_formula(seed: u64, configs: usize) -> Result<Vec<AuditReport>> {
    let mut rng = stream_rng(derive_key(&[seed, 0xE7E5]), 0);
    let epsilons = [0.3, 0.5, 0.8, 1.0];
    let mut head_on: f64 = 0.0;
    let (mut oblique, mut oblique_model): (f64, f64) = (0.0, 0.0);
    let (mut grazing, mut grazing_model): (f64, f64) = (0.0, 0.0);
    let mut elastic: f64 = 0.0;
    for _ in 0..configs {
        for branch in CollisionBranch::ALL {
            for &eps in &epsilons {
                let (v1, v2) = (random_vec(&mut rng, 3.0), random_vec(&mut rng, 3.0));
                let (s1, s2) = (random_species(&mut rng), random_species(&mut rng));
                let g = v2 - v1;
                let along = g / g.norm();
                let (r, _) = energy_discrepancy(v1, v2, along, eps, branch, s1, s2)?;
                head_on = head_on.max(r);

                let n = uniform_on_sphere(&mut rng);
                let (r, m) = energy_discrepancy(v1, v2, n, eps, branch, s1, s2)?;
                if eps < 1.0 {
                    oblique = oblique.max(r);
                    oblique_model = oblique_model.max(m);
                } else {
                    elastic = elastic.max(r);
                }

                let perp = g.cross(&n);
                let perp = perp / perp.norm();
                let (r, m) = energy_discrepancy(v1, v2, perp, eps, branch, s1, s2)?;
                if eps < 1.0 {
                    grazing = grazing.max(r);
                    grazing_model = grazing_model.max(m);
                } else {
                    elastic = elastic.max(r);
                }
            }
        }
    }
    let note = "residual is |dE_formula - dE_rule| / (mu |g|^2 / 2), maximised over the sweep";
    Ok(vec![
        AuditReport::graded("energy_formula.head_on", ENERGY_REF, head_on, ENERGY_TOLERANCE)
            .with("seed", seed)
            .with("configs", configs)
            .with("epsilons", json!(epsilons))
            .with("note", note),
        AuditReport::graded("energy_formula.elastic", ENERGY_REF, elastic, ENERGY_TOLERANCE)
            .with("seed", seed)
            .with("configs", configs),
        AuditReport::graded("energy_formula.oblique", ENERGY_REF, oblique, ENERGY_TOLERANCE)
            .with("seed", seed)
            .with("configs", configs)
            .with("epsilons", json!(&epsilons[..3]))
            .with(
                "max_deviation_from_1/2(1-eps^2)mu(|g|^2-(g.n)^2)",
                oblique_model,
            )
            .with("note", note),
        AuditReport::graded("energy_formula.grazing", ENERGY_REF, grazing, ENERGY_TOLERANCE)
            .with("seed", seed)
            .with("configs", configs)
            .with("epsilons", json!(&epsilons[..3]))
            .with("max_deviation_from_1/2(1-eps^2)mu|g|^2", grazing_model)
            .with("note", note),
    ])
}

const STOKES_REF: &str = "df/dt|coll = iint (eps f' f1' - f f1) d^2/4 (v - v1).n dv1 dOmega = 0";

/// The 27 points of `{-scale, 0, scale}^3`.
pub fn lattice_probes(scale: f64) -> Vec<Vec3> {
    let axis = [-scale, 0.0, scale];
    let mut out = Vec::with_capacity(27);
    for &x in &axis {
        for &y in &axis {
            for &z in &axis {
                out.push(Vec3::new(x, y, z));
            }
        }
    }
    out
}

/// Collision term at every probe for each named distribution. A row is
/// consistent when every probe lies within [`SIGMA_THRESHOLD`] standard errors
/// of zero.
pub fn audit_stokes_claim(
    distributions: &[(&str, &dyn VelocityDensity)],
    probes: &[Vec3],
    spec: &QuadratureSpec,
) -> Result<Vec<AuditReport>> {
    if probes.len() < MIN_STOKES_PROBES {
        return Err(KineticsError::param(
            "probes",
            format!("need at least {MIN_STOKES_PROBES}, got {}", probes.len()),
        ));
    }
    distributions
        .iter()
        .map(|(name, f)| {
            let rates = evaluate_field(*f, probes, spec)?;
            let (idx, worst) = rates
                .iter()
                .map(|r| r.significance())
                .enumerate()
                .fold((0, 0.0f64), |acc, (i, s)| if s > acc.1 { (i, s) } else { acc });
            let max_abs = rates.iter().map(|r| r.value.abs()).fold(0.0, f64::max);
            Ok(AuditReport::graded(format!("stokes.{name}"), STOKES_REF, worst, SIGMA_THRESHOLD)
                .with("seed", spec.seed)
                .with("samples", spec.samples)
                .with("epsilon", spec.epsilon)
                .with("branch", json!(spec.branch))
                .with("normalization", json!(spec.normalization))
                .with("probes", probes.len())
                .with("worst_probe", json!([probes[idx].x, probes[idx].y, probes[idx].z]))
                .with("worst_value", rates[idx].value)
                .with("worst_std_error", rates[idx].std_error)
                .with("max_abs_value", max_abs))
        })
        .collect()
}

const CHAIN_REF: &str = "df/dt + J (F/m).grad_v* f = 0 versus d/dv_i = (dv*_j/dv_i) d/dv*_j";

/// Smooth test field on chart coordinates with its gradient.
fn chain_test_field(c: &Vec3, vs: &Vec3) -> (f64, Vec3) {
    let d = vs - c;
    let value = (-d.norm_squared()).exp();
    (value, -2.0 * value * d)
}

/// Scalar-`J` form of the force term against the matrix chain rule, at each
/// point for `forces.len()` forces. Diagnostic only.
pub fn audit_chain_rule(
    points: &[Vec3],
    forces: &[Vec3],
    mass: f64,
    lambda: f64,
    hemisphere: Hemisphere,
) -> Result<AuditReport> {
    if points.is_empty() || forces.is_empty() {
        return Err(KineticsError::param("points", "need at least one point and one force"));
    }
    let centre = Vec3::new(0.1, -0.2, 0.15);
    let mut diffs = Vec::with_capacity(points.len() * forces.len());
    let mut rows = Vec::new();
    for v in points {
        let (m, j) = chart_jacobian(*v, lambda, hemisphere)?;
        let vs = project_chart(&sphere::embed(*v, lambda, hemisphere)?)?.vstar;
        let (_, grad) = chain_test_field(&centre, &vs);
        for force in forces {
            let a = force / mass;
            let scalar_form = j * a.dot(&grad);
            let matrix_form = a.dot(&(m.transpose() * grad));
            let diff = (scalar_form - matrix_form).abs();
            diffs.push(diff);
            rows.push(json!({
                "v": [v.x, v.y, v.z],
                "force": [force.x, force.y, force.z],
                "scalar_form": scalar_form,
                "matrix_form": matrix_form,
            }));
        }
    }
    let mut sorted = diffs.clone();
    sorted.sort_by(f64::total_cmp);
    let max = *sorted.last().unwrap();
    let median = sorted[sorted.len() / 2];
    Ok(AuditReport::diagnostic("chain_rule", CHAIN_REF, max)
        .with("median", median)
        .with("lambda", lambda)
        .with("mass", mass)
        .with("hemisphere", json!(hemisphere))
        .with("test_field", "exp(-|v* - (0.1,-0.2,0.15)|^2)")
        .with("points", Value::Array(rows)))
}

/// `audit_chain_rule` over `count` random velocities inside the ball of radius
/// `0.9 lambda` and `count` random forces.
pub fn audit_chain_rule_sweep(seed: u64, count: usize, mass: f64, lambda: f64) -> Result<AuditReport> {
    let mut rng = stream_rng(derive_key(&[seed, 0xC4A1]), 0);
    let mut points = Vec::with_capacity(count);
    while points.len() < count {
        let v = random_vec(&mut rng, 0.9 * lambda);
        if v.norm() < 0.9 * lambda {
            points.push(v);
        }
    }
    let forces: Vec<Vec3> = (0..count).map(|_| random_vec(&mut rng, 2.0)).collect();
    let mut report = audit_chain_rule(&points, &forces, mass, lambda, Hemisphere::Lower)?;
    report.claim_id = "chain_rule.sweep".into();
    Ok(report.with("seed", seed))
}

const MASS_REF: &str = "(eps f' f1' - f f1) conserves int f dv";

/// Density, momentum and energy rates under both gain normalizations at each
/// restitution coefficient.
pub fn audit_mass_conservation(
    f: &dyn VelocityDensity,
    epsilons: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<AuditReport>> {
    let mut out = Vec::new();
    for &eps in epsilons {
        for normalization in [GainNormalization::PaperForm, GainNormalization::StandardGranular] {
            let s = QuadratureSpec {
                epsilon: eps,
                normalization,
                ..*spec
            };
            let rates = moment_rates(f, &s)?;
            let tag = match normalization {
                GainNormalization::PaperForm => "paper_form",
                GainNormalization::StandardGranular => "standard_granular",
            };
            let meta = |r: AuditReport| {
                r.with("seed", s.seed)
                    .with("samples", s.samples)
                    .with("epsilon", eps)
                    .with("branch", json!(s.branch))
                    .with("normalization", json!(normalization))
            };
            out.push(meta(
                AuditReport::graded(
                    format!("mass_conservation.{tag}.eps={eps}"),
                    MASS_REF,
                    rates.density.significance(),
                    SIGMA_THRESHOLD,
                )
                .with("rate", rates.density.value)
                .with("std_error", rates.density.std_error),
            ));
            let (axis, worst) = rates
                .momentum
                .iter()
                .map(|e| e.significance())
                .enumerate()
                .fold((0, 0.0f64), |acc, (i, s)| if s > acc.1 { (i, s) } else { acc });
            out.push(meta(
                AuditReport::graded(
                    format!("momentum_conservation.{tag}.eps={eps}"),
                    "(eps f' f1' - f f1) conserves int m v f dv",
                    worst,
                    SIGMA_THRESHOLD,
                )
                .with("rates", json!(rates.momentum.iter().map(|e| e.value).collect::<Vec<_>>()))
                .with("std_errors", json!(rates.momentum.iter().map(|e| e.std_error).collect::<Vec<_>>()))
                .with("worst_axis", axis),
            ));
            out.push(meta(
                AuditReport::diagnostic(
                    format!("energy_rate.{tag}.eps={eps}"),
                    "d/dt int m|v|^2/2 f dv",
                    rates.energy.significance(),
                )
                .with("rate", rates.energy.value)
                .with("std_error", rates.energy.std_error),
            ));
        }
    }
    Ok(out)
}

type ChartField<'a> = Box<dyn Fn(&ChartCoords, f64) -> f64 + Sync + 'a>;

/// Inputs of one transport-relation evaluation.
pub struct TransportScenario<'a> {
    pub name: String,
    pub f: ChartField<'a>,
    pub generator: PureQuaternion,
    pub theta: Box<dyn Fn(f64) -> f64 + Sync + 'a>,
    pub c: Box<dyn Fn(&ChartCoords) -> f64 + Sync + 'a>,
    pub times: Vec<f64>,
    pub probe: ChartCoords,
    pub metadata: BTreeMap<String, Value>,
}

const TRANSPORT_REF: &str = "f(v,t) + theta'(t) f(G(theta(t))) = C(v)";

/// Residual series of each scenario. Diagnostic only.
pub fn audit_transport_relation(scenarios: &[TransportScenario<'_>]) -> Result<Vec<AuditReport>> {
    scenarios
        .iter()
        .map(|s| {
            let series = sphere::transport_relation_series(&s.f, &s.generator, &s.theta, &s.c, &s.times, &s.probe)?;
            let max = series.iter().fold(0.0f64, |a, r| a.max(r.abs()));
            let mut report = AuditReport::diagnostic(format!("transport_relation.{}", s.name), TRANSPORT_REF, max)
                .with("times", json!(s.times))
                .with("residuals", json!(series))
                .with("probe_vstar", json!([s.probe.vstar.x, s.probe.vstar.y, s.probe.vstar.z]))
                .with("generator", json!([s.generator.xi.x, s.generator.xi.y, s.generator.xi.z]));
            report.metadata.extend(s.metadata.clone());
            Ok(report)
        })
        .collect()
}

/// Velocity `lambda (theta1, theta2, theta3)` of a chart point.
fn chart_to_velocity(c: &ChartCoords, lambda: f64) -> Vec3 {
    let t = unproject_chart(c);
    let t = t.theta();
    lambda * Vec3::new(t[0], t[1], t[2])
}

/// Zero, free-streaming and constant-force scenarios for a Maxwellian of
/// temperature `temperature` expressed in chart coordinates.
pub fn default_transport_scenarios(
    lambda: f64,
    mass: f64,
    temperature: f64,
    force: Vec3,
) -> Result<Vec<TransportScenario<'static>>> {
    let mode = MaxwellianMode::new(1.0, Vec3::zeros(), temperature);
    MaxwellianMixture::new(vec![mode], mass, lambda)?;
    let times: Vec<f64> = (0..=10).map(|k| 0.1 * k as f64).collect();
    let probe = project_chart(&sphere::embed(Vec3::new(0.2, -0.1, 0.3) * lambda, lambda, Hemisphere::Lower)?)?;
    let f0 = move |v: &Vec3| mode.value(mass, v);

    let zero = TransportScenario {
        name: "zero".into(),
        f: Box::new(|_, _| 0.0),
        generator: PureQuaternion::default(),
        theta: Box::new(|t| t),
        c: Box::new(|_| 0.0),
        times: times.clone(),
        probe,
        metadata: BTreeMap::new(),
    };

    let free = TransportScenario {
        name: "free_streaming".into(),
        f: Box::new(move |c, _| f0(&chart_to_velocity(c, lambda))),
        generator: PureQuaternion::default(),
        theta: Box::new(|t| t),
        c: Box::new(move |c| f0(&chart_to_velocity(c, lambda))),
        times: times.clone(),
        probe,
        metadata: BTreeMap::from([("lambda".into(), json!(lambda)), ("temperature".into(), json!(temperature))]),
    };

    let generator = match_generator(force, mass, lambda, Hemisphere::Lower)?;
    let accel = force / mass;
    let orbit: Vec<Value> = times
        .iter()
        .map(|&t| {
            let c = project_chart(&exp_subgroup(&generator, t))?.vstar;
            Ok(json!([c.x, c.y, c.z]))
        })
        .collect::<Result<_>>()?;
    let forced = TransportScenario {
        name: "constant_force".into(),
        f: Box::new(move |c, t| f0(&(chart_to_velocity(c, lambda) - accel * t))),
        generator,
        theta: Box::new(|t| t),
        c: Box::new(move |c| f0(&chart_to_velocity(c, lambda))),
        times,
        probe,
        metadata: BTreeMap::from([
            ("lambda".into(), json!(lambda)),
            ("force".into(), json!([force.x, force.y, force.z])),
            ("mass".into(), json!(mass)),
            ("orbit_vstar".into(), Value::Array(orbit)),
        ]),
    };
    Ok(vec![zero, free, forced])
}

/// Knobs of the full audit run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditSettings {
    pub seed: u64,
    pub jacobian_configs: usize,
    pub energy_configs: usize,
    pub stokes_samples: usize,
    pub moment_samples: usize,
    pub chain_points: usize,
    pub lambda: f64,
}

impl Default for AuditSettings {
    fn default() -> Self {
        AuditSettings {
            seed: 1,
            jacobian_configs: 100,
            energy_configs: 100,
            stokes_samples: 100_000,
            moment_samples: 1_000_000,
            chain_points: 20,
            lambda: 4.0,
        }
    }
}

/// Equal-density Maxwellians at `±(1.5, 0, 0)` with temperature `0.5`.
pub fn default_bimodal(vmax: f64) -> Result<MaxwellianMixture> {
    MaxwellianMixture::new(
        vec![
            MaxwellianMode::new(0.5, Vec3::new(1.5, 0.0, 0.0), 0.5),
            MaxwellianMode::new(0.5, Vec3::new(-1.5, 0.0, 0.0), 0.5),
        ],
        1.0,
        vmax,
    )
}

/// Every audit at the given settings, unit mass and diameter.
pub fn run_all(settings: &AuditSettings) -> Result<Vec<AuditReport>> {
    let seed = settings.seed;
    let mut out = vec![audit_jacobian(seed, settings.jacobian_configs)?];
    out.extend(audit_energy_formula(seed, settings.energy_configs)?);

    let vmax = 6.0;
    let maxwell = MaxwellianMixture::new(vec![MaxwellianMode::new(1.0, Vec3::zeros(), 1.0)], 1.0, vmax)?;
    let bimodal = default_bimodal(vmax)?;
    let zero = MaxwellianMixture::new(vec![], 1.0, vmax)?;
    let spec = QuadratureSpec {
        samples: settings.stokes_samples,
        seed,
        diameter: 1.0,
        mass: 1.0,
        epsilon: 1.0,
        branch: CollisionBranch::Reflective,
        normalization: GainNormalization::PaperForm,
    };
    let probes = lattice_probes(1.0);
    let distributions: [(&str, &dyn VelocityDensity); 3] =
        [("maxwellian", &maxwell), ("bimodal", &bimodal), ("zero", &zero)];
    out.extend(audit_stokes_claim(&distributions, &probes, &spec)?);
    let inelastic = QuadratureSpec { epsilon: 0.8, ..spec };
    let named: [(&str, &dyn VelocityDensity); 1] = [("maxwellian.eps=0.8", &maxwell)];
    out.extend(audit_stokes_claim(&named, &probes, &inelastic)?);

    out.push(audit_chain_rule_sweep(seed, settings.chain_points, 1.0, settings.lambda)?);

    let moment_spec = QuadratureSpec {
        samples: settings.moment_samples,
        ..spec
    };
    out.extend(audit_mass_conservation(&maxwell, &[1.0, 0.8], &moment_spec)?);

    let scenarios = default_transport_scenarios(settings.lambda, 1.0, 1.0, Vec3::new(1.0, 0.0, 0.0))?;
    out.extend(audit_transport_relation(&scenarios)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(samples: usize, epsilon: f64) -> QuadratureSpec {
        QuadratureSpec {
            samples,
            seed: 5,
            diameter: 1.0,
            mass: 1.0,
            epsilon,
            branch: CollisionBranch::Reflective,
            normalization: GainNormalization::PaperForm,
        }
    }

    #[test]
    fn verdict_is_mechanical() {
        assert_eq!(Verdict::grade(1.0, 1.0), Verdict::Consistent);
        assert_eq!(Verdict::grade(1.0 + 1e-15, 1.0), Verdict::Inconsistent);
        assert_eq!(Verdict::grade(f64::NAN, 1.0), Verdict::Inconsistent);
        let d = AuditReport::diagnostic("x", "y", 5.0);
        assert_eq!(d.csv_fields()[3], "");
        assert_eq!(d.csv_fields()[4], "diagnostic-only");
    }

    #[test]
    fn jacobian_audit_is_consistent_and_reproducible() {
        let a = audit_jacobian(11, 100).unwrap();
        assert_eq!(a.verdict, Verdict::Consistent, "{a:?}");
        assert!(a.residual < 1e-6);
        assert_eq!(a.metadata["seed"], json!(11));
        let b = audit_jacobian(11, 100).unwrap();
        assert_eq!(a.residual.to_bits(), b.residual.to_bits());
    }

    #[test]
    fn energy_audit_splits_head_on_from_grazing() {
        let rows = audit_energy_formula(3, 50).unwrap();
        let by_id = |id: &str| rows.iter().find(|r| r.claim_id == id).unwrap().clone();
        assert_eq!(by_id("energy_formula.head_on").verdict, Verdict::Consistent);
        assert_eq!(by_id("energy_formula.elastic").verdict, Verdict::Consistent);
        let oblique = by_id("energy_formula.oblique");
        assert_eq!(oblique.verdict, Verdict::Inconsistent);
        assert!(oblique.metadata["max_deviation_from_1/2(1-eps^2)mu(|g|^2-(g.n)^2)"].as_f64().unwrap() < 1e-12);
        // A grazing impact loses nothing, so the whole closed-form value is
        // discrepancy: (1 - eps^2) of the relative kinetic energy, worst at eps = 0.3.
        let grazing = by_id("energy_formula.grazing");
        assert!((grazing.residual - (1.0 - 0.09)).abs() < 1e-12, "{grazing:?}");
    }

    #[test]
    fn grazing_discrepancy_equals_full_formula() {
        let s = Species::new(1.0, 1.0).unwrap();
        let (v1, v2, n) = (Vec3::zeros(), Vec3::new(2.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0));
        let e = collision::collide(v1, v2, n, 0.5, CollisionBranch::Reflective, s, s).unwrap();
        assert_eq!(e.delta_e, 0.0);
        let (r, m) = energy_discrepancy(v1, v2, n, 0.5, CollisionBranch::Reflective, s, s).unwrap();
        assert!((r - 0.75).abs() < 1e-15);
        assert!(m < 1e-15);
    }

    #[test]
    fn stokes_needs_enough_probes() {
        let zero = MaxwellianMixture::new(vec![], 1.0, 5.0).unwrap();
        let d: [(&str, &dyn VelocityDensity); 1] = [("zero", &zero)];
        assert!(audit_stokes_claim(&d, &lattice_probes(1.0)[..19], &spec(10, 1.0)).is_err());
        let rows = audit_stokes_claim(&d, &lattice_probes(1.0), &spec(10, 1.0)).unwrap();
        assert_eq!(rows[0].verdict, Verdict::Consistent);
        assert_eq!(rows[0].residual, 0.0);
    }

    #[test]
    fn chain_rule_vanishes_without_force() {
        let pts = [Vec3::new(0.5, 0.2, -0.1), Vec3::new(-1.0, 0.3, 0.4)];
        let r = audit_chain_rule(&pts, &[Vec3::zeros()], 1.0, 3.0, Hemisphere::Lower).unwrap();
        assert_eq!(r.residual, 0.0);
        assert_eq!(r.verdict, Verdict::DiagnosticOnly);
        assert!(r.threshold.is_nan());
    }

    #[test]
    fn chain_rule_records_discrepancy_for_radial_field() {
        // A field of |v*|^2 alone, probed where v is parallel to F.
        let f = Vec3::new(0.0, 0.0, 1.0);
        let v = Vec3::new(0.0, 0.0, 1.2);
        let lambda = 3.0;
        let (m, j) = chart_jacobian(v, lambda, Hemisphere::Lower).unwrap();
        let vs = project_chart(&sphere::embed(v, lambda, Hemisphere::Lower).unwrap()).unwrap().vstar;
        let grad = 2.0 * vs;
        let scalar = j * f.dot(&grad);
        let matrix = f.dot(&(m.transpose() * grad));
        assert!((scalar - matrix).abs() > 1e-3);
        let r = audit_chain_rule_sweep(2, 10, 1.0, lambda).unwrap();
        assert!(r.residual > 0.0);
        assert!(r.metadata["median"].as_f64().unwrap() <= r.residual);
    }

    #[test]
    fn zero_transport_scenario_has_zero_residual() {
        let scenarios = default_transport_scenarios(4.0, 1.0, 1.0, Vec3::x()).unwrap();
        let rows = audit_transport_relation(&scenarios).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].residual, 0.0);
        assert!(rows.iter().all(|r| r.verdict == Verdict::DiagnosticOnly));
        assert!(rows[2].metadata.contains_key("orbit_vstar"));
    }

    #[test]
    fn summary_counts_verdicts() {
        let rows = vec![
            AuditReport::graded("a", "x", 0.0, 1.0),
            AuditReport::graded("b", "x", 2.0, 1.0),
            AuditReport::diagnostic("c", "x", 2.0),
        ];
        assert!(summary(&rows).contains("3 rows: 1 consistent, 1 inconsistent, 1 diagnostic-only"));
    }
}
