//! Subcommand execution. Every output is built in memory first and written
//! only after the whole computation succeeds.

use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use kinetics_core::audit::{self, CSV_HEADER};
use kinetics_core::collision::{self, Species};
use kinetics_core::distribution::{MaxwellianMixture, MaxwellianMode, VelocityDensity, VelocityGrid};
use kinetics_core::dsmc::{fit_cooling_law, sample_maxwellian_ensemble, Dsmc, DsmcConfig};
use kinetics_core::operator::{evaluate_field, moment_rates, uniform_on_sphere, QuadratureSpec};
use kinetics_core::rng::{derive_key, stream_rng, thread_pool};
use kinetics_core::snapshot::{read_velocity_snapshot, write_phase_snapshot, write_velocity_snapshot};
use kinetics_core::transport::{exact_solution, semi_lagrangian_run, ForceField, PhaseField, PhaseGrid, PhasePoint};
use kinetics_core::Vec3;
use rand::Rng;

use crate::config::{
    AuditParams, CollideParams, DsmcParams, OperatorParams, Params, Representation, RunConfig, TransportParams,
};
use crate::error::CliError;

pub const ECHO_FILE: &str = "config.resolved.json";

/// A named output file held in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub name: String,
    pub bytes: Vec<u8>,
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn vec3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

fn csv_output(name: &str, header: &[&str], rows: &[Vec<String>]) -> Output {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    Output {
        name: name.into(),
        bytes: w.into_inner().expect("in-memory flush"),
    }
}

/// Compute every output of `config`, including the resolved-config echo.
pub fn execute(config: &RunConfig) -> Result<Vec<Output>, CliError> {
    let mut out = match &config.params {
        Params::Collide(p) => collide(p, config.seed)?,
        Params::Operator(p) => operator(p, config.seed)?,
        Params::Dsmc(p) => dsmc(p, config.seed)?,
        Params::Transport(p) => transport(p)?,
        Params::Audit(p) => audit(p, config.seed)?,
    };
    out.push(Output {
        name: ECHO_FILE.into(),
        bytes: config.to_json().into_bytes(),
    });
    Ok(out)
}

/// Write `outputs` into `dir`, each through a temporary file and a rename.
pub fn write_outputs(dir: &Path, outputs: &[Output]) -> Result<Vec<PathBuf>, CliError> {
    let io = |path: &Path, source| CliError::Output {
        path: path.display().to_string(),
        source,
    };
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut written = Vec::with_capacity(outputs.len());
    for o in outputs {
        let target = dir.join(&o.name);
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io(dir, e))?;
        tmp.write_all(&o.bytes).map_err(|e| io(&target, e))?;
        tmp.as_file().sync_all().map_err(|e| io(&target, e))?;
        tmp.persist(&target).map_err(|e| io(&target, e.error))?;
        written.push(target);
    }
    Ok(written)
}

/// Execute on a pool of `threads` workers (0 = all cores) and write the outputs.
pub fn run(config: &RunConfig, threads: usize) -> Result<Vec<PathBuf>, CliError> {
    let outputs = thread_pool(threads).install(|| execute(config))?;
    write_outputs(&config.output_dir, &outputs)
}

fn collide(p: &CollideParams, seed: u64) -> Result<Vec<Output>, CliError> {
    let branch = p.branch.expect("validated");
    let s1 = Species::new(p.mass1, p.diameter1)?;
    let s2 = Species::new(p.mass2, p.diameter2)?;
    let mut events = vec![(vec3(p.v1), vec3(p.v2), vec3(p.n))];
    let mut rng = stream_rng(derive_key(&[seed, 0xC0_11DE]), 0);
    for _ in 0..p.random_events {
        let mut draw = || Vec3::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let (v1, v2) = (draw(), draw());
        events.push((v1, v2, uniform_on_sphere(&mut rng)));
    }
    let mut rows = Vec::with_capacity(events.len());
    for (k, (v1, v2, n)) in events.into_iter().enumerate() {
        let e = collision::collide(v1, v2, n, p.epsilon, branch, s1, s2)?;
        let formula = collision::energy_loss_formula(v1, v2, p.epsilon, s1, s2)?;
        let j_num = collision::jacobian_numeric(v1, v2, n, p.epsilon, branch, s1, s2, None)?;
        let j_signed = collision::jacobian_signed(p.epsilon, branch)?;
        let p0 = s1.mass * v1 + s2.mass * v2;
        let p1 = s1.mass * e.w1 + s2.mass * e.w2;
        let scale = s1.mass * v1.norm() + s2.mass * v2.norm();
        let residual = if scale > 0.0 { (p1 - p0).norm() / scale } else { 0.0 };
        let mut row = vec![k.to_string()];
        for v in [v1, v2, n, e.w1, e.w2] {
            row.extend(v.iter().map(|c| num(*c)));
        }
        row.extend([
            num(e.lambda1),
            num(e.lambda2),
            num(e.delta_e),
            num(formula),
            num(j_num),
            num(j_signed.abs()),
            num(j_signed),
            num(residual),
        ]);
        rows.push(row);
    }
    let header = [
        "event", "v1x", "v1y", "v1z", "v2x", "v2y", "v2z", "nx", "ny", "nz", "w1x", "w1y", "w1z", "w2x", "w2y", "w2z",
        "lambda1", "lambda2", "delta_e", "delta_e_formula", "jacobian_numeric", "jacobian_analytic",
        "jacobian_signed", "momentum_residual",
    ];
    Ok(vec![csv_output("collide.csv", &header, &rows)])
}

fn operator(p: &OperatorParams, seed: u64) -> Result<Vec<Output>, CliError> {
    let modes = p
        .modes
        .iter()
        .map(|m| MaxwellianMode::new(m.density, vec3(m.bulk_velocity), m.temperature))
        .collect();
    let mixture = MaxwellianMixture::new(modes, p.mass, p.vmax)?;
    let mut outputs = Vec::new();
    let f: Box<dyn VelocityDensity> = match p.representation {
        Representation::Analytic => Box::new(mixture),
        Representation::Grid => {
            let d = mixture.sample(VelocityGrid::new(p.vmax, p.nodes_per_axis)?)?;
            let mut bytes = Vec::new();
            write_velocity_snapshot(&mut bytes, &d)?;
            outputs.push(Output {
                name: "distribution.bin".into(),
                bytes,
            });
            Box::new(d)
        }
        Representation::Snapshot => {
            let path = p.snapshot_path.as_ref().expect("validated");
            let input = |source| CliError::Input {
                path: path.display().to_string(),
                source,
            };
            let file = File::open(path).map_err(input)?;
            Box::new(read_velocity_snapshot(&mut BufReader::new(file))?)
        }
    };
    let spec = QuadratureSpec {
        samples: p.samples,
        seed,
        diameter: p.diameter,
        mass: p.mass,
        epsilon: p.epsilon,
        branch: p.branch.expect("validated"),
        normalization: p.normalization,
    };
    let probes: Vec<Vec3> = match &p.probes {
        Some(list) => list.iter().map(|a| vec3(*a)).collect(),
        None => audit::lattice_probes(p.probe_scale),
    };
    let rates = evaluate_field(f.as_ref(), &probes, &spec)?;
    let rows: Vec<Vec<String>> = probes
        .iter()
        .zip(&rates)
        .map(|(v, r)| vec![num(v.x), num(v.y), num(v.z), num(r.value), num(r.std_error)])
        .collect();
    outputs.push(csv_output("operator.csv", &["vx", "vy", "vz", "rate", "std_error"], &rows));

    if p.moment_samples > 0 {
        let m = moment_rates(f.as_ref(), &QuadratureSpec { samples: p.moment_samples, ..spec })?;
        let named = [
            ("density", m.density),
            ("momentum_x", m.momentum[0]),
            ("momentum_y", m.momentum[1]),
            ("momentum_z", m.momentum[2]),
            ("energy", m.energy),
        ];
        let rows: Vec<Vec<String>> = named
            .iter()
            .map(|(k, e)| vec![k.to_string(), num(e.value), num(e.std_error)])
            .collect();
        outputs.push(csv_output("moment_rates.csv", &["quantity", "rate", "std_error"], &rows));
    }
    Ok(outputs)
}

fn dsmc(p: &DsmcParams, seed: u64) -> Result<Vec<Output>, CliError> {
    let species = Species::new(p.mass, p.diameter)?;
    let ensemble =
        sample_maxwellian_ensemble(p.particles, species, p.number_density, vec3(p.bulk_velocity), p.temperature, seed)?;
    let vth = (p.temperature / p.mass).sqrt();
    let majorant = p.majorant_relative_speed.unwrap_or(if vth > 0.0 { 8.0 * vth } else { 1.0 });
    let e0 = ensemble.kinetic_energy();
    let mut sim = Dsmc::new(
        ensemble,
        DsmcConfig {
            dt: p.dt,
            number_density: p.number_density,
            epsilon: p.epsilon,
            branch: p.branch.expect("validated"),
            seed,
            majorant_relative_speed: majorant,
        },
    )?;
    let samples = sim.run(p.steps, p.sample_every)?;
    let rows: Vec<Vec<String>> = samples
        .iter()
        .map(|s| {
            vec![
                num(s.t),
                num(s.density),
                num(s.momentum.x),
                num(s.momentum.y),
                num(s.momentum.z),
                num(s.temperature),
            ]
        })
        .collect();
    let mut outputs = vec![csv_output("dsmc.csv", &["t", "density", "px", "py", "pz", "temperature"], &rows)];
    let summary = [
        ("collisions", sim.total_collisions().to_string()),
        ("final_majorant", num(sim.majorant())),
        ("energy_ratio", num(sim.ensemble().kinetic_energy() / e0)),
    ];
    let rows: Vec<Vec<String>> = summary.iter().map(|(k, v)| vec![k.to_string(), v.clone()]).collect();
    outputs.push(csv_output("dsmc_summary.csv", &["key", "value"], &rows));
    if p.fit_cooling {
        let ts: Vec<f64> = samples.iter().map(|s| s.t).collect();
        let temps: Vec<f64> = samples.iter().map(|s| s.temperature).collect();
        let fit = fit_cooling_law(&ts, &temps)?;
        outputs.push(csv_output(
            "cooling_fit.csv",
            &["amplitude", "t0", "exponent", "rms_log_residual"],
            &[vec![num(fit.amplitude), num(fit.t0), num(fit.exponent), num(fit.rms_log_residual)]],
        ));
    }
    Ok(outputs)
}

struct TransportLevel {
    grid: PhaseGrid,
    dt: f64,
    steps: usize,
    field: PhaseField,
    linf: f64,
    l2: f64,
    mass_drift: f64,
}

fn transport_level(p: &TransportParams, level: usize) -> Result<TransportLevel, CliError> {
    let k = 1usize << level;
    let grid = PhaseGrid::new(p.xmax, (p.nx - 1) * k + 1, p.vmax, (p.nv - 1) * k + 1)?;
    let (dt, steps) = (p.dt / k as f64, p.steps * k);
    let [x0, v0] = p.center;
    let [sx, sv] = p.width;
    let f0 = move |x: f64, v: f64| (-(x - x0).powi(2) / (2.0 * sx * sx) - (v - v0).powi(2) / (2.0 * sv * sv)).exp();
    let field = ForceField::new(Vec3::new(p.force, 0.0, 0.0), p.mass)?;
    let run = semi_lagrangian_run(&PhaseField::sample(grid, f0), &field, dt, steps)?;
    let t_end = dt * steps as f64;
    let exact = |x: f64, v: f64| {
        exact_solution(
            |r: &Vec3, u: &Vec3| f0(r.x, u.x),
            &field,
            &PhasePoint {
                r: Vec3::new(x, 0.0, 0.0),
                v: Vec3::new(v, 0.0, 0.0),
                t: t_end,
            },
        )
    };
    let (linf, l2) = run.field.error_against(exact);
    Ok(TransportLevel {
        grid,
        dt,
        steps,
        field: run.field,
        linf,
        l2,
        mass_drift: run.mass_drift,
    })
}

fn transport(p: &TransportParams) -> Result<Vec<Output>, CliError> {
    let base = transport_level(p, 0)?;
    let g = base.grid;
    let field = ForceField::new(Vec3::new(p.force, 0.0, 0.0), p.mass)?;
    let t_end = base.dt * base.steps as f64;
    let [x0, v0] = p.center;
    let [sx, sv] = p.width;
    let f0 = |r: &Vec3, u: &Vec3| (-(r.x - x0).powi(2) / (2.0 * sx * sx) - (u.x - v0).powi(2) / (2.0 * sv * sv)).exp();
    let mut rows = Vec::with_capacity(g.len());
    for i in 0..g.nx {
        for j in 0..g.nv {
            let exact = exact_solution(
                f0,
                &field,
                &PhasePoint {
                    r: Vec3::new(g.x(i), 0.0, 0.0),
                    v: Vec3::new(g.v(j), 0.0, 0.0),
                    t: t_end,
                },
            );
            rows.push(vec![num(g.x(i)), num(g.v(j)), num(base.field.at(i, j)), num(exact)]);
        }
    }
    let mut outputs = vec![csv_output("transport.csv", &["x", "v", "value", "exact"], &rows)];
    let mut snapshot = Vec::new();
    write_phase_snapshot(&mut snapshot, &base.field)?;
    outputs.push(Output {
        name: "transport.bin".into(),
        bytes: snapshot,
    });

    let level_row = |level: usize, l: &TransportLevel, order: Option<f64>| {
        vec![
            level.to_string(),
            l.grid.nx.to_string(),
            l.grid.nv.to_string(),
            num(l.dt),
            l.steps.to_string(),
            num(l.linf),
            num(l.l2),
            num(l.mass_drift),
            order.map(num).unwrap_or_default(),
        ]
    };
    let mut rows = vec![level_row(0, &base, None)];
    let mut previous = base.linf;
    for level in 1..=p.refinements {
        let l = transport_level(p, level)?;
        rows.push(level_row(level, &l, Some((previous / l.linf).log2())));
        previous = l.linf;
    }
    outputs.push(csv_output(
        "convergence.csv",
        &["level", "nx", "nv", "dt", "steps", "linf", "l2", "mass_drift", "order"],
        &rows,
    ));
    Ok(outputs)
}

fn audit(p: &AuditParams, seed: u64) -> Result<Vec<Output>, CliError> {
    let reports = audit::run_all(&p.settings(seed))?;
    let rows: Vec<Vec<String>> = reports.iter().map(|r| r.csv_fields().to_vec()).collect();
    Ok(vec![
        csv_output("audit.csv", &CSV_HEADER, &rows),
        Output {
            name: "audit_summary.txt".into(),
            bytes: audit::summary(&reports).into_bytes(),
        },
    ])
}
