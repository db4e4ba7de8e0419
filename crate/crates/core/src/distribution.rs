//! One-particle velocity distributions.
//!
//! Temperatures are expressed in energy units (`k_B T`), so a Maxwellian of
//! mass `m` and temperature `T` has thermal speed `sqrt(T / m)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{KineticsError, Result, Vec3};

/// Anything that can be evaluated as a velocity density `f(v)`.
///
/// `half_width` is the half-side of the cube `[-w, w]^3` over which the
/// collision quadratures draw velocities.
pub trait VelocityDensity: Sync {
    fn value(&self, v: &Vec3) -> f64;
    fn half_width(&self) -> f64;
    fn is_identically_zero(&self) -> bool {
        false
    }
}

/// Uniform Cartesian velocity grid over `[-vmax, vmax]^3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityGrid {
    vmax: f64,
    nodes_per_axis: usize,
}

impl VelocityGrid {
    pub fn new(vmax: f64, nodes_per_axis: usize) -> Result<Self> {
        if !(vmax > 0.0 && vmax.is_finite()) {
            return Err(KineticsError::param("vmax", format!("must be positive, got {vmax}")));
        }
        if nodes_per_axis < 4 {
            return Err(KineticsError::param(
                "nodes_per_axis",
                format!("need at least 4 nodes, got {nodes_per_axis}"),
            ));
        }
        Ok(VelocityGrid {
            vmax,
            nodes_per_axis,
        })
    }

    pub fn vmax(&self) -> f64 {
        self.vmax
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.nodes_per_axis
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.vmax / (self.nodes_per_axis - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.nodes_per_axis.pow(3)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Node coordinate, formed so that `coord(n - 1 - i) == -coord(i)` exactly.
    pub fn coord(&self, i: usize) -> f64 {
        let k = 2 * i as i64 - (self.nodes_per_axis as i64 - 1);
        k as f64 * self.vmax / (self.nodes_per_axis - 1) as f64
    }

    /// Row-major linear index, last axis fastest.
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.nodes_per_axis + iy) * self.nodes_per_axis + iz
    }

    pub fn node(&self, ix: usize, iy: usize, iz: usize) -> Vec3 {
        Vec3::new(self.coord(ix), self.coord(iy), self.coord(iz))
    }

    /// Node velocities in storage order.
    pub fn nodes(&self) -> impl Iterator<Item = Vec3> + '_ {
        let n = self.nodes_per_axis;
        (0..n).flat_map(move |ix| {
            (0..n).flat_map(move |iy| (0..n).map(move |iz| self.node(ix, iy, iz)))
        })
    }

    /// Lower node index and fractional offset of `x` along one axis, or `None`
    /// outside the hull. Exact node coordinates give a zero offset.
    fn locate(&self, x: f64) -> Option<(usize, f64)> {
        let n = self.nodes_per_axis;
        let (lo, hi) = (self.coord(0), self.coord(n - 1));
        if !(x >= lo && x <= hi) {
            return None;
        }
        let t = (x - lo) / self.spacing();
        let nearest = (t.round() as usize).min(n - 1);
        if self.coord(nearest) == x {
            return Some(if nearest == n - 1 { (n - 2, 1.0) } else { (nearest, 0.0) });
        }
        let i = (t.floor() as usize).min(n - 2);
        Some((i, (t - i as f64).clamp(0.0, 1.0)))
    }
}

/// One Maxwellian component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxwellianMode {
    pub density: f64,
    pub bulk_velocity: Vec3,
    pub temperature: f64,
}

impl MaxwellianMode {
    pub fn new(density: f64, bulk_velocity: Vec3, temperature: f64) -> Self {
        MaxwellianMode {
            density,
            bulk_velocity,
            temperature,
        }
    }

    fn validate(&self, mass: f64) -> Result<()> {
        if !(self.density >= 0.0 && self.density.is_finite()) {
            return Err(KineticsError::param("density", format!("must be non-negative, got {}", self.density)));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(KineticsError::param(
                "temperature",
                format!("must be positive, got {}", self.temperature),
            ));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(KineticsError::param("mass", format!("must be positive, got {mass}")));
        }
        Ok(())
    }

    pub fn thermal_speed(&self, mass: f64) -> f64 {
        (self.temperature / mass).sqrt()
    }

    pub fn value(&self, mass: f64, v: &Vec3) -> f64 {
        let a = mass / (2.0 * self.temperature);
        self.density * (a / PI).powf(1.5) * (-a * (v - self.bulk_velocity).norm_squared()).exp()
    }
}

/// Closed-form sum of Maxwellians, evaluated exactly at any velocity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxwellianMixture {
    pub modes: Vec<MaxwellianMode>,
    pub mass: f64,
    /// Half-width of the sampling cube.
    pub vmax: f64,
}

impl MaxwellianMixture {
    pub fn new(modes: Vec<MaxwellianMode>, mass: f64, vmax: f64) -> Result<Self> {
        for m in &modes {
            m.validate(mass)?;
        }
        if !(vmax > 0.0 && vmax.is_finite()) {
            return Err(KineticsError::param("vmax", format!("must be positive, got {vmax}")));
        }
        Ok(MaxwellianMixture { modes, mass, vmax })
    }

    /// Sample onto `grid`, checking that every non-empty mode is resolved.
    pub fn sample(&self, grid: VelocityGrid) -> Result<DiscreteDistribution> {
        for m in self.modes.iter().filter(|m| m.density > 0.0) {
            check_resolution(&grid, m, self.mass)?;
        }
        let values = grid.nodes().map(|v| self.value(&v)).collect();
        DiscreteDistribution::new(grid, values)
    }
}

impl VelocityDensity for MaxwellianMixture {
    fn value(&self, v: &Vec3) -> f64 {
        self.modes.iter().map(|m| m.value(self.mass, v)).sum()
    }

    fn half_width(&self) -> f64 {
        self.vmax
    }

    fn is_identically_zero(&self) -> bool {
        self.modes.iter().all(|m| m.density == 0.0)
    }
}

/// Thermal speed must span three grid spacings, and the grid must extend four
/// thermal speeds beyond the bulk velocity.
pub fn check_resolution(grid: &VelocityGrid, mode: &MaxwellianMode, mass: f64) -> Result<()> {
    mode.validate(mass)?;
    let vth = mode.thermal_speed(mass);
    if vth < 3.0 * grid.spacing() {
        return Err(KineticsError::UnderResolved(format!(
            "thermal speed {vth} spans fewer than 3 grid spacings ({})",
            grid.spacing()
        )));
    }
    let reach = mode.bulk_velocity.norm() + 4.0 * vth;
    if grid.vmax() < reach {
        return Err(KineticsError::UnderResolved(format!(
            "vmax {} below |u| + 4 v_th = {reach}",
            grid.vmax()
        )));
    }
    Ok(())
}

/// Density, momentum density and kinetic-energy density of a distribution.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Moments {
    pub density: f64,
    pub momentum: Vec3,
    pub kinetic_energy: f64,
}

/// Velocity distribution sampled on a [`VelocityGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    grid: VelocityGrid,
    values: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(grid: VelocityGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(KineticsError::param(
                "values",
                format!("expected {} entries, got {}", grid.len(), values.len()),
            ));
        }
        if let Some(bad) = values.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(KineticsError::param(
                "values",
                format!("entries must be finite and non-negative, found {bad}"),
            ));
        }
        Ok(DiscreteDistribution { grid, values })
    }

    pub fn zeros(grid: VelocityGrid) -> Self {
        DiscreteDistribution {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        DiscreteDistribution::new(self.grid, self.values.iter().map(|x| x * c).collect())
    }

    /// Midpoint sums with node weight `h^3`.
    pub fn moments(&self, mass: f64) -> Moments {
        let w = self.grid.spacing().powi(3);
        let mut m = Moments::default();
        for (v, &f) in self.grid.nodes().zip(&self.values) {
            if f == 0.0 {
                continue;
            }
            m.density += f;
            m.momentum += v * f;
            m.kinetic_energy += v.norm_squared() * f;
        }
        Moments {
            density: m.density * w,
            momentum: m.momentum * (mass * w),
            kinetic_energy: 0.5 * mass * m.kinetic_energy * w,
        }
    }

    /// Trilinear interpolation; zero outside the grid hull.
    pub fn interpolate(&self, v: &Vec3) -> f64 {
        let (Some((ix, fx)), Some((iy, fy)), Some((iz, fz))) =
            (self.grid.locate(v.x), self.grid.locate(v.y), self.grid.locate(v.z))
        else {
            return 0.0;
        };
        let g = &self.grid;
        let at = |dx: usize, dy: usize, dz: usize| self.values[g.index(ix + dx, iy + dy, iz + dz)];
        let lerp = |a: f64, b: f64, t: f64| (1.0 - t) * a + t * b;
        let c00 = lerp(at(0, 0, 0), at(0, 0, 1), fz);
        let c01 = lerp(at(0, 1, 0), at(0, 1, 1), fz);
        let c10 = lerp(at(1, 0, 0), at(1, 0, 1), fz);
        let c11 = lerp(at(1, 1, 0), at(1, 1, 1), fz);
        lerp(lerp(c00, c01, fy), lerp(c10, c11, fy), fx)
    }
}

impl VelocityDensity for DiscreteDistribution {
    fn value(&self, v: &Vec3) -> f64 {
        self.interpolate(v)
    }

    fn half_width(&self) -> f64 {
        self.grid.vmax()
    }

    fn is_identically_zero(&self) -> bool {
        self.values.iter().all(|&x| x == 0.0)
    }
}

/// Sampled Maxwellian `n (m / 2 pi T)^{3/2} exp(-m |v - u|^2 / 2T)`.
pub fn maxwellian(
    grid: VelocityGrid,
    density: f64,
    bulk_velocity: Vec3,
    temperature: f64,
    mass: f64,
) -> Result<DiscreteDistribution> {
    if !(density > 0.0) {
        return Err(KineticsError::param("density", format!("must be positive, got {density}")));
    }
    MaxwellianMixture::new(
        vec![MaxwellianMode::new(density, bulk_velocity, temperature)],
        mass,
        grid.vmax(),
    )?
    .sample(grid)
}

/// Sum of two sampled Maxwellians. A mode with zero density contributes nothing.
#[allow(clippy::too_many_arguments)]
pub fn bimodal(
    grid: VelocityGrid,
    density1: f64,
    u1: Vec3,
    t1: f64,
    density2: f64,
    u2: Vec3,
    t2: f64,
    mass: f64,
) -> Result<DiscreteDistribution> {
    MaxwellianMixture::new(
        vec![
            MaxwellianMode::new(density1, u1, t1),
            MaxwellianMode::new(density2, u2, t2),
        ],
        mass,
        grid.vmax(),
    )?
    .sample(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(vmax: f64, n: usize) -> VelocityGrid {
        VelocityGrid::new(vmax, n).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(VelocityGrid::new(1.0, 3).is_err());
        assert!(VelocityGrid::new(0.0, 8).is_err());
        let g = grid(2.0, 5);
        assert_eq!(g.spacing(), 1.0);
        assert_eq!(g.len(), 125);
        assert_eq!(g.index(1, 2, 3), (5 + 2) * 5 + 3);
    }

    #[test]
    fn maxwellian_moments_match_analytic() {
        // vth = 1 and 1/sqrt(3), h = 0.175, vmax = 7.
        let g = grid(7.0, 81);
        let f = maxwellian(g, 1.0, Vec3::zeros(), 1.0, 1.0).unwrap();
        let m = f.moments(1.0);
        assert!((m.density - 1.0).abs() < 1e-6, "{}", m.density);
        assert!(m.momentum.amax() < 1e-12);
        assert!((m.kinetic_energy - 1.5).abs() / 1.5 < 1e-5);

        let u = Vec3::new(0.5, -0.25, 0.0);
        let f = maxwellian(g, 2.0, u, 1.0, 3.0).unwrap();
        let m = f.moments(3.0);
        assert!((m.momentum - 2.0 * 3.0 * u).amax() < 1e-6);
    }

    #[test]
    fn maxwellian_is_even() {
        let g = grid(6.0, 41);
        let f = maxwellian(g, 1.0, Vec3::zeros(), 1.0, 1.0).unwrap();
        let n = g.nodes_per_axis();
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..n {
                    let a = f.values()[g.index(ix, iy, iz)];
                    let b = f.values()[g.index(n - 1 - ix, n - 1 - iy, n - 1 - iz)];
                    assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn under_resolution_is_rejected() {
        // vth = 1 with spacing 1: fewer than 3 spacings.
        assert!(matches!(
            maxwellian(grid(6.0, 13), 1.0, Vec3::zeros(), 1.0, 1.0),
            Err(KineticsError::UnderResolved(_))
        ));
        // vmax too small for the shifted mode.
        assert!(matches!(
            maxwellian(grid(5.0, 41), 1.0, Vec3::new(2.0, 0.0, 0.0), 1.0, 1.0),
            Err(KineticsError::UnderResolved(_))
        ));
    }

    #[test]
    fn truncation_error_shrinks_with_extent() {
        // Fixed spacing 0.25, growing extent: density error must decrease monotonically.
        let errors: Vec<f64> = [3.0, 4.0, 5.0]
            .iter()
            .map(|&vmax| {
                let g = grid(vmax, (2.0 * vmax / 0.25) as usize + 1);
                let f = MaxwellianMixture::new(vec![MaxwellianMode::new(1.0, Vec3::zeros(), 1.0)], 1.0, vmax)
                    .unwrap();
                let values = g.nodes().map(|v| f.value(&v)).collect();
                let d = DiscreteDistribution::new(g, values).unwrap();
                (d.moments(1.0).density - 1.0).abs()
            })
            .collect();
        assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
    }

    #[test]
    fn bimodal_properties() {
        let g = grid(8.0, 81);
        let u = Vec3::new(2.0, 0.0, 0.0);
        let f = bimodal(g, 1.0, u, 1.0, 1.0, -u, 1.0, 1.0).unwrap();
        let m = f.moments(1.0);
        assert!(m.momentum.amax() < 1e-12);
        assert!((m.density - 2.0).abs() < 1e-6);
        // Two modes: (3/2) n T + 1/2 n m |u|^2 each.
        assert!((m.kinetic_energy - 2.0 * (1.5 + 2.0)).abs() < 1e-5);

        let single = maxwellian(g, 1.0, u, 1.0, 1.0).unwrap();
        let degenerate = bimodal(g, 1.0, u, 1.0, 0.0, -u, 1.0, 1.0).unwrap();
        assert_eq!(single, degenerate);

        let asym = bimodal(g, 0.5, u, 1.0, 1.5, Vec3::new(0.0, -1.0, 0.0), 0.8, 2.0).unwrap();
        let m = asym.moments(2.0);
        let expected = 2.0 * (0.5 * u + 1.5 * Vec3::new(0.0, -1.0, 0.0));
        assert!((m.momentum - expected).amax() < 1e-6);
    }

    #[test]
    fn zero_distribution_moments() {
        let f = DiscreteDistribution::zeros(grid(1.0, 4));
        let m = f.moments(1.0);
        assert_eq!(m.density, 0.0);
        assert_eq!(m.momentum, Vec3::zeros());
        assert_eq!(m.kinetic_energy, 0.0);
        assert!(f.is_identically_zero());
    }

    #[test]
    fn rejects_negative_values() {
        let g = grid(1.0, 4);
        let mut values = vec![0.0; 64];
        values[3] = -1.0;
        assert!(DiscreteDistribution::new(g, values).is_err());
        assert!(DiscreteDistribution::new(g, vec![0.0; 10]).is_err());
    }

    #[test]
    fn interpolation_at_nodes_and_outside() {
        let g = grid(3.0, 7);
        let values: Vec<f64> = (0..g.len()).map(|i| (i as f64 * 0.731).sin().abs()).collect();
        let f = DiscreteDistribution::new(g, values.clone()).unwrap();
        for ix in 0..7 {
            for iy in 0..7 {
                for iz in 0..7 {
                    let v = g.node(ix, iy, iz);
                    assert_eq!(f.interpolate(&v), values[g.index(ix, iy, iz)]);
                }
            }
        }
        assert_eq!(f.interpolate(&Vec3::new(3.01, 0.0, 0.0)), 0.0);
        assert_eq!(f.interpolate(&Vec3::new(0.0, -4.0, 0.0)), 0.0);
        assert_eq!(f.interpolate(&Vec3::new(0.0, 0.0, f64::NAN)), 0.0);
    }

    #[test]
    fn interpolation_reproduces_affine_fields() {
        let g = grid(2.0, 9);
        let field = |v: &Vec3| 10.0 + 0.5 * v.x - 0.25 * v.y + 0.75 * v.z;
        let f = DiscreteDistribution::new(g, g.nodes().map(|v| field(&v)).collect()).unwrap();
        let h = g.spacing();
        for ix in 0..8 {
            for iy in 0..8 {
                for iz in 0..8 {
                    let c = g.node(ix, iy, iz) + Vec3::repeat(0.5 * h);
                    assert!((f.interpolate(&c) - field(&c)).abs() < 1e-12);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn moments_are_linear(c in 0.0f64..10.0, t in 0.5f64..2.0) {
            let g = grid(7.0, 61);
            let f = maxwellian(g, 1.0, Vec3::new(0.3, 0.0, -0.2), t, 1.0).unwrap();
            let a = f.moments(1.0);
            let b = f.scaled(c).unwrap().moments(1.0);
            prop_assert!((b.density - c * a.density).abs() <= 1e-12 * (1.0 + c * a.density));
            prop_assert!((b.momentum - c * a.momentum).amax() <= 1e-12 * (1.0 + c));
            prop_assert!((b.kinetic_energy - c * a.kinetic_energy).abs() <= 1e-12 * (1.0 + c * a.kinetic_energy));
        }
    }
}
