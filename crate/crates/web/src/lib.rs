//! wasm-bindgen surface for `www/index.html`.
//!
//! Every export is a thin wrapper over a plain function returning flat `f64`
//! buffers, so the numerics can be tested natively.

use kinetics_core::collision::{self, CollisionBranch, Species};
use kinetics_core::sphere::{exp_subgroup, match_generator, project_chart, Hemisphere};
use kinetics_core::transport::{semi_lagrangian_run, ForceField, PhaseField, PhaseGrid};
use kinetics_core::{KineticsError, Vec3};
use wasm_bindgen::prelude::*;

fn vec3(a: &[f64]) -> Result<Vec3, KineticsError> {
    match a {
        [x, y, z] => Ok(Vec3::new(*x, *y, *z)),
        _ => Err(KineticsError::InvalidParameter {
            name: "vector",
            reason: format!("expected 3 components, got {}", a.len()),
        }),
    }
}

fn branch(reflective: bool) -> CollisionBranch {
    if reflective {
        CollisionBranch::Reflective
    } else {
        CollisionBranch::Passing
    }
}

/// `[w1 (3), w2 (3), lambda1, lambda2, dE, dE_formula]`.
#[allow(clippy::too_many_arguments)]
pub fn impact(
    v1: &[f64],
    v2: &[f64],
    n: &[f64],
    epsilon: f64,
    reflective: bool,
    mass1: f64,
    mass2: f64,
) -> Result<Vec<f64>, KineticsError> {
    let (v1, v2) = (vec3(v1)?, vec3(v2)?);
    let n = vec3(n)?.normalize();
    let s1 = Species::new(mass1, 1.0)?;
    let s2 = Species::new(mass2, 1.0)?;
    let e = collision::collide(v1, v2, n, epsilon, branch(reflective), s1, s2)?;
    let formula = collision::energy_loss_formula(v1, v2, epsilon, s1, s2)?;
    let mut out: Vec<f64> = e.w1.iter().chain(e.w2.iter()).copied().collect();
    out.extend([e.lambda1, e.lambda2, e.delta_e, formula]);
    Ok(out)
}

/// Chart coordinates `v*` along the subgroup orbit matched to force `f` and
/// mass `mass`, as `[x0, y0, z0, x1, ...]`. Stops early if the orbit nears
/// the excluded pole.
pub fn orbit(force: &[f64], mass: f64, lambda: f64, tau_max: f64, samples: usize) -> Result<Vec<f64>, KineticsError> {
    let u = match_generator(vec3(force)?, mass, lambda, Hemisphere::Lower)?;
    let mut out = Vec::with_capacity(3 * samples);
    for k in 0..samples {
        let tau = tau_max * k as f64 / (samples.max(2) - 1) as f64;
        match project_chart(&exp_subgroup(&u, tau)) {
            Ok(c) => out.extend(c.vstar.iter()),
            Err(_) => break,
        }
    }
    Ok(out)
}

/// Phase-space density after transporting a Gaussian blob under constant
/// force for `t_end`, row-major in `x` then `v` on an `n x n` grid over
/// `[-5, 5]^2`.
pub fn transport(force: f64, mass: f64, t_end: f64, n: usize) -> Result<Vec<f64>, KineticsError> {
    let grid = PhaseGrid::new(5.0, n, 5.0, n)?;
    let field = ForceField::new(Vec3::new(force, 0.0, 0.0), mass)?;
    let f0 = PhaseField::sample(grid, |x, v| (-((x + 2.0).powi(2) + v * v) / 0.72).exp());
    let steps = (t_end / 0.05).ceil().max(1.0) as usize;
    let run = semi_lagrangian_run(&f0, &field, t_end.max(1e-9) / steps as f64, steps)?;
    Ok(run.field.values().to_vec())
}

fn js(e: KineticsError) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub fn collide(
    v1: &[f64],
    v2: &[f64],
    n: &[f64],
    epsilon: f64,
    reflective: bool,
    mass1: f64,
    mass2: f64,
) -> Result<Vec<f64>, JsError> {
    impact(v1, v2, n, epsilon, reflective, mass1, mass2).map_err(js)
}

#[wasm_bindgen]
pub fn chart_orbit(force: &[f64], mass: f64, lambda: f64, tau_max: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    orbit(force, mass, lambda, tau_max, samples).map_err(js)
}

#[wasm_bindgen]
pub fn transport_frame(force: f64, mass: f64, t_end: f64, n: usize) -> Result<Vec<f64>, JsError> {
    transport(force, mass, t_end, n).map_err(js)
}
