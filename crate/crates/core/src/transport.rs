//! Collisionless transport under a constant external force.
//!
//! `f` is constant along the characteristics `r(t) = r0 + v0 t + a t²/2`,
//! `v(t) = v0 + a t` with `a = F / m`. [`exact_solution`] traces them back
//! pointwise in 3D-3V; [`semi_lagrangian_run`] solves the same equation on a
//! 1D-1V grid for convergence measurements.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::VelocityDensity;
use crate::operator::{evaluate_field, QuadratureSpec, RateEstimate};
use crate::{KineticsError, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceField {
    pub force: Vec3,
    pub mass: f64,
}

impl ForceField {
    pub fn new(force: Vec3, mass: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(KineticsError::param("mass", format!("must be positive, got {mass}")));
        }
        if !force.iter().all(|c| c.is_finite()) {
            return Err(KineticsError::param("force", "must be finite"));
        }
        Ok(ForceField { force, mass })
    }

    pub fn acceleration(&self) -> Vec3 {
        self.force / self.mass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub r: Vec3,
    pub v: Vec3,
    pub t: f64,
}

/// Back-traced initial phase point of the characteristic through `p`.
pub fn characteristic_origin(field: &ForceField, p: &PhasePoint) -> (Vec3, Vec3) {
    let a = field.acceleration();
    let t = p.t;
    (p.r - p.v * t + 0.5 * a * t * t, p.v - a * t)
}

/// `f(r, v, t) = f0(r - v t + a t²/2, v - a t)`.
pub fn exact_solution<F>(f0: F, field: &ForceField, p: &PhasePoint) -> f64
where
    F: Fn(&Vec3, &Vec3) -> f64,
{
    let (r0, v0) = characteristic_origin(field, p);
    f0(&r0, &v0)
}

/// Advance a phase point along its characteristic by `s`.
pub fn advance(field: &ForceField, p: &PhasePoint, s: f64) -> PhasePoint {
    let a = field.acceleration();
    PhasePoint {
        r: p.r + p.v * s + 0.5 * a * s * s,
        v: p.v + a * s,
        t: p.t + s,
    }
}

/// Uniform 1D-1V phase grid over `[-xmax, xmax] x [-vmax, vmax]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub xmax: f64,
    pub nx: usize,
    pub vmax: f64,
    pub nv: usize,
}

impl PhaseGrid {
    pub fn new(xmax: f64, nx: usize, vmax: f64, nv: usize) -> Result<Self> {
        if !(xmax > 0.0 && xmax.is_finite() && vmax > 0.0 && vmax.is_finite()) {
            return Err(KineticsError::param("extent", "xmax and vmax must be positive"));
        }
        if nx < 4 || nv < 4 {
            return Err(KineticsError::param("nodes", "need at least 4 nodes per axis"));
        }
        Ok(PhaseGrid { xmax, nx, vmax, nv })
    }

    pub fn len(&self) -> usize {
        self.nx * self.nv
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.xmax / (self.nx - 1) as f64
    }

    pub fn dv(&self) -> f64 {
        2.0 * self.vmax / (self.nv - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.xmax + i as f64 * self.dx()
    }

    pub fn v(&self, j: usize) -> f64 {
        -self.vmax + j as f64 * self.dv()
    }
}

/// Values on a [`PhaseGrid`], row-major with `v` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseField {
    grid: PhaseGrid,
    values: Vec<f64>,
}

impl PhaseField {
    pub fn new(grid: PhaseGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(KineticsError::param(
                "values",
                format!("expected {} entries, got {}", grid.len(), values.len()),
            ));
        }
        if !values.iter().all(|x| x.is_finite()) {
            return Err(KineticsError::param("values", "entries must be finite"));
        }
        Ok(PhaseField { grid, values })
    }

    pub fn sample<F: Fn(f64, f64) -> f64>(grid: PhaseGrid, f: F) -> Self {
        let values = (0..grid.nx)
            .flat_map(|i| (0..grid.nv).map(move |j| (i, j)))
            .map(|(i, j)| f(grid.x(i), grid.v(j)))
            .collect();
        PhaseField { grid, values }
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.nv + j]
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx() * self.grid.dv()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `(L-infinity, discrete L2)` distance to a reference function.
    pub fn error_against<F: Fn(f64, f64) -> f64>(&self, reference: F) -> (f64, f64) {
        let g = self.grid;
        let mut linf: f64 = 0.0;
        let mut l2 = 0.0;
        for i in 0..g.nx {
            for j in 0..g.nv {
                let d = self.at(i, j) - reference(g.x(i), g.v(j));
                linf = linf.max(d.abs());
                l2 += d * d;
            }
        }
        (linf, (l2 * g.dx() * g.dv()).sqrt())
    }
}

/// Four-point Lagrange interpolation of `samples(k)` at fractional index `t`;
/// zero outside `[0, n - 1]` and for stencil points beyond the ends.
fn cubic_at<S: Fn(usize) -> f64>(samples: S, n: usize, t: f64) -> f64 {
    if !(t >= 0.0 && t <= (n - 1) as f64) {
        return 0.0;
    }
    let i = (t.floor() as usize).min(n - 2);
    let s = t - i as f64;
    let weights = [
        -s * (s - 1.0) * (s - 2.0) / 6.0,
        (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
        -(s + 1.0) * s * (s - 2.0) / 2.0,
        (s + 1.0) * s * (s - 1.0) / 6.0,
    ];
    let mut acc = 0.0;
    for (k, w) in weights.iter().enumerate() {
        let idx = i as isize + k as isize - 1;
        if idx >= 0 && (idx as usize) < n {
            acc += w * samples(idx as usize);
        }
    }
    acc
}

fn shift_x(field: &PhaseField, dt: f64) -> Vec<f64> {
    let g = field.grid;
    let (dx, nv) = (g.dx(), g.nv);
    let mut out = vec![0.0; g.len()];
    out.par_chunks_mut(nv).enumerate().for_each(|(i, row)| {
        for (j, slot) in row.iter_mut().enumerate() {
            let t = (g.x(i) - g.v(j) * dt + g.xmax) / dx;
            *slot = cubic_at(|k| field.values[k * nv + j], g.nx, t);
        }
    });
    out
}

fn shift_v(field: &PhaseField, dv_shift: f64) -> Vec<f64> {
    let g = field.grid;
    let (dv, nv) = (g.dv(), g.nv);
    let mut out = vec![0.0; g.len()];
    out.par_chunks_mut(nv).enumerate().for_each(|(i, row)| {
        let src = &field.values[i * nv..(i + 1) * nv];
        for (j, slot) in row.iter_mut().enumerate() {
            let t = (g.v(j) - dv_shift + g.vmax) / dv;
            *slot = cubic_at(|k| src[k], nv, t);
        }
    });
    out
}

#[derive(Debug, Clone)]
pub struct SemiLagrangianRun {
    pub field: PhaseField,
    /// `(mass(final) - mass(initial)) / mass(initial)`, or the absolute drift for zero mass.
    pub mass_drift: f64,
}

/// Strang-split semi-Lagrangian transport with cubic interpolation.
///
/// Uses the `x` component of the field's acceleration. Back-traced points that
/// leave the grid read as zero.
pub fn semi_lagrangian_run(f0: &PhaseField, field: &ForceField, dt: f64, n_steps: usize) -> Result<SemiLagrangianRun> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(KineticsError::param("dt", format!("must be positive, got {dt}")));
    }
    let accel = field.acceleration().x;
    let initial_mass = f0.mass();
    let mut f = f0.clone();
    for _ in 0..n_steps {
        f.values = shift_x(&f, 0.5 * dt);
        f.values = shift_v(&f, accel * dt);
        f.values = shift_x(&f, 0.5 * dt);
    }
    let final_mass = f.mass();
    let mass_drift = if initial_mass != 0.0 {
        (final_mass - initial_mass) / initial_mass
    } else {
        final_mass - initial_mass
    };
    Ok(SemiLagrangianRun { field: f, mass_drift })
}

/// One probe of the homogeneous balance `df/dt = C[f]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhsRow {
    pub v: Vec3,
    pub rate: RateEstimate,
    /// `|rate| / std_error`.
    pub significance: f64,
}

/// Time derivative of a spatially homogeneous `f` at each probe, which equals
/// the collision term there.
pub fn collisional_rhs_check<D: VelocityDensity + ?Sized>(
    f: &D,
    spec: &QuadratureSpec,
    probes: &[Vec3],
) -> Result<Vec<RhsRow>> {
    Ok(evaluate_field(f, probes, spec)?
        .into_iter()
        .zip(probes)
        .map(|(rate, v)| RhsRow {
            v: *v,
            rate,
            significance: rate.significance(),
        })
        .collect())
}
