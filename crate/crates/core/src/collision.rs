//! Binary inelastic hard-sphere collisions.
//!
//! The collision normal `n` points from the centre of body 1 to the centre of
//! body 2. Both bodies exchange momentum only along `n`:
//! `w1 = v1 + lambda1 n`, `w2 = v2 + lambda2 n` with `m1 lambda1 + m2 lambda2 = 0`.
//!
//! Two branches are supported. [`CollisionBranch::Reflective`] reverses the
//! normal relative velocity and scales it by `epsilon`; [`CollisionBranch::Passing`]
//! keeps its sign and scales it by `epsilon`. Which branch applies is always
//! the caller's choice.

use nalgebra::SMatrix;
use serde::{Deserialize, Serialize};

use crate::{KineticsError, Result, Vec3};

/// Allowed deviation of `|n|` from one.
pub const NORMAL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Species {
    pub mass: f64,
    pub diameter: f64,
}

impl Species {
    pub fn new(mass: f64, diameter: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(KineticsError::param("mass", format!("must be positive, got {mass}")));
        }
        if !(diameter > 0.0 && diameter.is_finite()) {
            return Err(KineticsError::param(
                "diameter",
                format!("must be positive, got {diameter}"),
            ));
        }
        Ok(Species { mass, diameter })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollisionBranch {
    /// Impulse factor `1 + epsilon`: normal relative velocity is reversed.
    Reflective,
    /// Impulse factor `1 - epsilon`: normal relative velocity keeps its sign.
    Passing,
}

impl CollisionBranch {
    pub const ALL: [CollisionBranch; 2] = [CollisionBranch::Reflective, CollisionBranch::Passing];

    fn impulse_factor(self, epsilon: f64) -> f64 {
        match self {
            CollisionBranch::Reflective => 1.0 + epsilon,
            CollisionBranch::Passing => 1.0 - epsilon,
        }
    }
}

/// A fully resolved binary impact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionEvent {
    pub v1: Vec3,
    pub v2: Vec3,
    pub n: Vec3,
    pub epsilon: f64,
    pub branch: CollisionBranch,
    pub species1: Species,
    pub species2: Species,
    pub w1: Vec3,
    pub w2: Vec3,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Kinetic energy before minus kinetic energy after.
    pub delta_e: f64,
}

pub fn check_restitution(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon <= 1.0 {
        Ok(())
    } else {
        Err(KineticsError::InvalidRestitution(epsilon))
    }
}

fn check_normal(n: &Vec3) -> Result<()> {
    let norm = n.norm();
    if (norm - 1.0).abs() > NORMAL_TOLERANCE || !norm.is_finite() {
        return Err(KineticsError::NonUnitNormal { norm });
    }
    Ok(())
}

pub fn kinetic_energy(mass: f64, v: &Vec3) -> f64 {
    0.5 * mass * v.norm_squared()
}

/// Impulse scalars for a given normal relative velocity `(v2 - v1) . n`.
fn impulses(normal_speed: f64, factor: f64, m1: f64, m2: f64) -> (f64, f64) {
    let total = m1 + m2;
    (
        factor * (m2 / total) * normal_speed,
        -factor * (m1 / total) * normal_speed,
    )
}

/// Post-collision velocities and bookkeeping for one impact.
#[allow(clippy::too_many_arguments)]
pub fn collide(
    v1: Vec3,
    v2: Vec3,
    n: Vec3,
    epsilon: f64,
    branch: CollisionBranch,
    s1: Species,
    s2: Species,
) -> Result<CollisionEvent> {
    check_restitution(epsilon)?;
    check_normal(&n)?;
    let normal_speed = (v2 - v1).dot(&n);
    let (lambda1, lambda2) = impulses(
        normal_speed,
        branch.impulse_factor(epsilon),
        s1.mass,
        s2.mass,
    );
    let w1 = v1 + lambda1 * n;
    let w2 = v2 + lambda2 * n;
    let before = kinetic_energy(s1.mass, &v1) + kinetic_energy(s2.mass, &v2);
    let after = kinetic_energy(s1.mass, &w1) + kinetic_energy(s2.mass, &w2);
    Ok(CollisionEvent {
        v1,
        v2,
        n,
        epsilon,
        branch,
        species1: s1,
        species2: s2,
        w1,
        w2,
        lambda1,
        lambda2,
        delta_e: before - after,
    })
}

/// Pre-collision velocities that `collide` maps onto `(w1, w2)`.
///
/// The normal relative velocity is divided by `-epsilon` (reflective) or
/// `epsilon` (passing); tangential and centre-of-mass components are kept.
#[allow(clippy::too_many_arguments)]
pub fn inverse_collide(
    w1: Vec3,
    w2: Vec3,
    n: Vec3,
    epsilon: f64,
    branch: CollisionBranch,
    s1: Species,
    s2: Species,
) -> Result<(Vec3, Vec3)> {
    if epsilon <= 0.0 || epsilon.is_nan() {
        return Err(KineticsError::SingularRestitution(epsilon));
    }
    check_restitution(epsilon)?;
    check_normal(&n)?;
    let factor = branch.impulse_factor(epsilon);
    // (w2 - w1).n = (1 - factor) (v2 - v1).n
    let normal_speed = (w2 - w1).dot(&n) / (1.0 - factor);
    let (lambda1, lambda2) = impulses(normal_speed, factor, s1.mass, s2.mass);
    Ok((w1 - lambda1 * n, w2 - lambda2 * n))
}

/// Energy dissipated according to the closed-form loss
/// `1/2 (1 - eps^2) mu |v1 - v2|^2`, using the full relative speed.
pub fn energy_loss_formula(v1: Vec3, v2: Vec3, epsilon: f64, s1: Species, s2: Species) -> Result<f64> {
    check_restitution(epsilon)?;
    let mu = s1.mass * s2.mass / (s1.mass + s2.mass);
    Ok(0.5 * (1.0 - epsilon * epsilon) * mu * (v1 - v2).norm_squared())
}

/// Signed determinant of `(v1, v2) -> (w1, w2)`: `-epsilon` for reflective
/// impacts and `+epsilon` for passing ones.
pub fn jacobian_signed(epsilon: f64, branch: CollisionBranch) -> Result<f64> {
    check_restitution(epsilon)?;
    // Only the 2x2 block of normal components is non-trivial; its determinant is 1 - factor.
    Ok(1.0 - branch.impulse_factor(epsilon))
}

/// `|det d(w1, w2) / d(v1, v2)|`, which equals `epsilon` on both branches.
pub fn jacobian_analytic(epsilon: f64, branch: CollisionBranch) -> Result<f64> {
    jacobian_signed(epsilon, branch).map(f64::abs)
}

/// Default finite-difference step for [`jacobian_numeric`].
pub fn default_jacobian_step(v1: &Vec3, v2: &Vec3) -> f64 {
    1e-5 * v1.amax().max(v2.amax()).max(1.0)
}

/// Central finite-difference determinant of the 6x6 collision map at fixed `n`.
#[allow(clippy::too_many_arguments)]
pub fn jacobian_numeric(
    v1: Vec3,
    v2: Vec3,
    n: Vec3,
    epsilon: f64,
    branch: CollisionBranch,
    s1: Species,
    s2: Species,
    h: Option<f64>,
) -> Result<f64> {
    let h = h.unwrap_or_else(|| default_jacobian_step(&v1, &v2));
    if !(h > 0.0 && h.is_finite()) {
        return Err(KineticsError::param("h", format!("step must be positive, got {h}")));
    }
    let map = |x: &[f64; 6]| -> Result<[f64; 6]> {
        let e = collide(
            Vec3::new(x[0], x[1], x[2]),
            Vec3::new(x[3], x[4], x[5]),
            n,
            epsilon,
            branch,
            s1,
            s2,
        )?;
        Ok([e.w1.x, e.w1.y, e.w1.z, e.w2.x, e.w2.y, e.w2.z])
    };
    let base = [v1.x, v1.y, v1.z, v2.x, v2.y, v2.z];
    let mut jac = SMatrix::<f64, 6, 6>::zeros();
    for col in 0..6 {
        let mut plus = base;
        let mut minus = base;
        plus[col] += h;
        minus[col] -= h;
        let (fp, fm) = (map(&plus)?, map(&minus)?);
        for row in 0..6 {
            jac[(row, col)] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    Ok(jac.determinant().abs())
}
