//! The unit three-sphere as a Lie group.
//!
//! Velocities are lifted to the sphere by `theta = (v / lambda, ±sqrt(1 - |v/lambda|^2))`
//! and charted by stereographic projection from the pole `p = (0, 0, 0, 1)`:
//! `v* = (theta1, theta2, theta3) / (1 - theta4)`.
//!
//! Group law: the coordinates are read as a scalar-first quaternion
//! `(theta1; theta2, theta3, theta4)`, so the identity is `e = (1, 0, 0, 0)`,
//! which lies inside the chart domain.

use nalgebra::{Matrix3, Vector4};
use serde::{Deserialize, Serialize};

use crate::{KineticsError, Result, Vec3};

pub type Vec4 = Vector4<f64>;

/// Minimum distance from the excluded pole for the chart to be used.
pub const CHART_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hemisphere {
    Upper,
    #[default]
    Lower,
}

impl Hemisphere {
    fn sign(self) -> f64 {
        match self {
            Hemisphere::Upper => 1.0,
            Hemisphere::Lower => -1.0,
        }
    }
}

/// Point of S³(1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint {
    theta: Vec4,
}

impl SpherePoint {
    pub const IDENTITY: SpherePoint = SpherePoint {
        theta: Vec4::new(1.0, 0.0, 0.0, 0.0),
    };

    /// Normalises `theta`; fails on a zero or non-finite vector.
    pub fn new(theta: Vec4) -> Result<Self> {
        let norm = theta.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(KineticsError::param("theta", format!("cannot normalise |theta| = {norm}")));
        }
        Ok(SpherePoint { theta: theta / norm })
    }

    pub fn theta(&self) -> &Vec4 {
        &self.theta
    }

    pub fn conjugate(&self) -> SpherePoint {
        let t = self.theta;
        SpherePoint {
            theta: Vec4::new(t[0], -t[1], -t[2], -t[3]),
        }
    }

    pub fn distance_to_pole(&self) -> f64 {
        (self.theta - Vec4::new(0.0, 0.0, 0.0, 1.0)).norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartCoords {
    pub vstar: Vec3,
}

/// Generator of a one-parameter subgroup, as the imaginary part of a quaternion.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PureQuaternion {
    pub xi: Vec3,
}

pub fn embed(v: Vec3, lambda: f64, hemisphere: Hemisphere) -> Result<SpherePoint> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(KineticsError::param("lambda", format!("must be positive, got {lambda}")));
    }
    let speed = v.norm();
    if !(speed < lambda) {
        return Err(KineticsError::SpeedExceedsLambda { speed, lambda });
    }
    let scaled = v / lambda;
    let fourth = hemisphere.sign() * (1.0 - scaled.norm_squared()).sqrt();
    Ok(SpherePoint {
        theta: Vec4::new(scaled.x, scaled.y, scaled.z, fourth),
    })
}

pub fn project_chart(p: &SpherePoint) -> Result<ChartCoords> {
    let distance = p.distance_to_pole();
    if distance <= CHART_MARGIN {
        return Err(KineticsError::ChartSingularity { distance });
    }
    let t = p.theta;
    let denom = 1.0 - t[3];
    Ok(ChartCoords {
        vstar: Vec3::new(t[0], t[1], t[2]) / denom,
    })
}

pub fn unproject_chart(c: &ChartCoords) -> SpherePoint {
    let s = c.vstar.norm_squared();
    let inv = 1.0 / (s + 1.0);
    SpherePoint {
        theta: Vec4::new(2.0 * c.vstar.x * inv, 2.0 * c.vstar.y * inv, 2.0 * c.vstar.z * inv, (s - 1.0) * inv),
    }
}

/// Matrix `d v*_j / d v_i` (row `j`, column `i`) of `v -> theta -> v*` and its determinant.
pub fn chart_jacobian(v: Vec3, lambda: f64, hemisphere: Hemisphere) -> Result<(Matrix3<f64>, f64)> {
    let point = embed(v, lambda, hemisphere)?;
    project_chart(&point)?;
    let fourth = point.theta[3];
    if fourth == 0.0 {
        return Err(KineticsError::ChartSingularity { distance: 0.0 });
    }
    let scaled = v / lambda;
    let a = 1.0 - fourth;
    // d theta4 / d v_i = -v_i / (lambda^2 theta4)
    let dfourth = -v / (lambda * lambda * fourth);
    let mut m = Matrix3::identity() / (lambda * a);
    m += (scaled / (a * a)) * dfourth.transpose();
    let det = m.determinant();
    Ok((m, det))
}

/// Scalar-first Hamilton product, renormalised onto the sphere.
pub fn quaternion_multiply(a: &SpherePoint, b: &SpherePoint) -> SpherePoint {
    let (a0, av) = (a.theta[0], Vec3::new(a.theta[1], a.theta[2], a.theta[3]));
    let (b0, bv) = (b.theta[0], Vec3::new(b.theta[1], b.theta[2], b.theta[3]));
    let s = a0 * b0 - av.dot(&bv);
    let v = a0 * bv + b0 * av + av.cross(&bv);
    let q = Vec4::new(s, v.x, v.y, v.z);
    SpherePoint { theta: q / q.norm() }
}

/// `G(tau) = (cos(|u| tau), sin(|u| tau) u/|u|)`.
pub fn exp_subgroup(u: &PureQuaternion, tau: f64) -> SpherePoint {
    let speed = u.xi.norm();
    if speed == 0.0 {
        return SpherePoint::IDENTITY;
    }
    let angle = speed * tau;
    let axis = u.xi / speed;
    let s = angle.sin();
    SpherePoint {
        theta: Vec4::new(angle.cos(), s * axis.x, s * axis.y, s * axis.z),
    }
}

/// Chart velocity of `tau -> phi(G(tau))` at `tau = 0`.
///
/// At `e` the tangent direction `(0, u)` moves `theta2..theta4`, and the chart
/// differential sends `(u1, u2, u3)` to `(u3, u1, u2)`.
pub fn initial_chart_velocity(u: &PureQuaternion) -> Vec3 {
    Vec3::new(u.xi.z, u.xi.x, u.xi.y)
}

/// Generator whose orbit through `e` leaves the chart image of `e` with chart
/// velocity `J F / m`.
///
/// `J` is the chart determinant at rest, `v = 0`, on the given hemisphere.
pub fn match_generator(force: Vec3, mass: f64, lambda: f64, hemisphere: Hemisphere) -> Result<PureQuaternion> {
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(KineticsError::param("mass", format!("must be positive, got {mass}")));
    }
    project_chart(&SpherePoint::IDENTITY)?;
    let (_, j) = chart_jacobian(Vec3::zeros(), lambda, hemisphere)?;
    let target = j * force / mass;
    Ok(PureQuaternion {
        xi: Vec3::new(target.y, target.z, target.x),
    })
}

fn orbit_step(u: &PureQuaternion) -> f64 {
    1e-5 / u.xi.norm().max(1.0)
}

/// Central difference of `g(phi(G(tau)))` at `tau = 0`.
pub fn pushforward_derivative<G>(g: G, u: &PureQuaternion) -> Result<f64>
where
    G: Fn(&ChartCoords) -> f64,
{
    let h = orbit_step(u);
    let plus = project_chart(&exp_subgroup(u, h))?;
    let minus = project_chart(&exp_subgroup(u, -h))?;
    Ok((g(&plus) - g(&minus)) / (2.0 * h))
}

/// Central difference of a scalar function of time.
pub fn time_derivative<F: Fn(f64) -> f64>(theta: F, t: f64) -> f64 {
    let h = 1e-6 * t.abs().max(1.0);
    (theta(t + h) - theta(t - h)) / (2.0 * h)
}

/// Pointwise residuals of `f(v, t) + theta'(t) f(G(theta(t)), t) - C(v)` at `probe`.
pub fn transport_relation_series<F, T, C>(
    f: F,
    generator: &PureQuaternion,
    theta_of_t: T,
    c_of_v: C,
    times: &[f64],
    probe: &ChartCoords,
) -> Result<Vec<f64>>
where
    F: Fn(&ChartCoords, f64) -> f64,
    T: Fn(f64) -> f64,
    C: Fn(&ChartCoords) -> f64,
{
    times
        .iter()
        .map(|&t| {
            let orbit = project_chart(&exp_subgroup(generator, theta_of_t(t)))?;
            let slope = time_derivative(&theta_of_t, t);
            Ok(f(probe, t) + slope * f(&orbit, t) - c_of_v(probe))
        })
        .collect()
}

/// Largest absolute residual of [`transport_relation_series`].
pub fn transport_relation_residual<F, T, C>(
    f: F,
    generator: &PureQuaternion,
    theta_of_t: T,
    c_of_v: C,
    times: &[f64],
    probe: &ChartCoords,
) -> Result<f64>
where
    F: Fn(&ChartCoords, f64) -> f64,
    T: Fn(f64) -> f64,
    C: Fn(&ChartCoords) -> f64,
{
    Ok(transport_relation_series(f, generator, theta_of_t, c_of_v, times, probe)?
        .into_iter()
        .fold(0.0, |acc, r| acc.max(r.abs())))
}
