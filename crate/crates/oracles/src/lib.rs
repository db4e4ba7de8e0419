//! Deterministic product-grid quadratures of the collision integral.
//!
//! Nothing here shares code with `kinetics-core`: vectors are plain arrays and
//! the pre-collision map is rederived for equal masses. Slow, but every number
//! is reproducible without random sampling.

use std::f64::consts::PI;

pub type V3 = [f64; 3];

fn add(a: V3, b: V3) -> V3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn scale(a: V3, s: f64) -> V3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Composite rule on [a, b]: `panels` copies of the `order`-point rule.
pub fn composite_rule(a: f64, b: f64, order: usize, panels: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(order * panels);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            out.push((lo + 0.5 * h * (xi + 1.0), 0.5 * h * wi));
        }
    }
    out
}

/// Directions on the unit sphere with weights summing to 4 pi: Gauss-Legendre
/// in `cos(theta)` times the periodic trapezoid rule in `phi`.
pub fn sphere_rule(order: usize, azimuths: usize) -> Vec<(V3, f64)> {
    let (z, wz) = gauss_legendre(order);
    let mut out = Vec::with_capacity(order * azimuths);
    for (zi, wi) in z.iter().zip(&wz) {
        let r = (1.0 - zi * zi).sqrt();
        for k in 0..azimuths {
            let phi = 2.0 * PI * (k as f64 + 0.5) / azimuths as f64;
            out.push(([r * phi.cos(), r * phi.sin(), *zi], wi * 2.0 * PI / azimuths as f64));
        }
    }
    out
}

/// Pre-collision pair of an equal-mass impact that produced `(w, w1)`.
///
/// Forward rule: `w = v + c/2 (g.n) n`, `w1 = v1 - c/2 (g.n) n` with `g = v1 - v`
/// and `c = 1 + eps` (reflective) or `1 - eps` (passing). The normal component
/// of `g` is multiplied by `1 - c`, so it is divided back out here.
pub fn pre_collision(w: V3, w1: V3, n: V3, eps: f64, reflective: bool) -> (V3, V3) {
    let c = if reflective { 1.0 + eps } else { 1.0 - eps };
    let gn_after = dot(sub(w1, w), n);
    let gn_before = gn_after / (1.0 - c);
    let kick = scale(n, 0.5 * c * gn_before);
    (sub(w, kick), add(w1, kick))
}

/// Collision-integral parameters.
#[derive(Debug, Clone, Copy)]
pub struct Kernel {
    pub diameter: f64,
    pub epsilon: f64,
    pub reflective: bool,
    /// Factor in front of `f' f1'`.
    pub gain_weight: f64,
}

/// `iint (G f' f1' - f f1) d^2/4 |(v - v1).n| dv1 dOmega` on the cube
/// `[-half_width, half_width]^3` by a composite `order`-point rule per axis.
pub fn collision_term<F: Fn(V3) -> f64>(
    f: F,
    v: V3,
    kernel: Kernel,
    half_width: f64,
    order: usize,
    panels: usize,
    sphere: &[(V3, f64)],
) -> f64 {
    let axis = composite_rule(-half_width, half_width, order, panels);
    let fv = f(v);
    let mut total = 0.0;
    for &(x, wx) in &axis {
        for &(y, wy) in &axis {
            for &(z, wz) in &axis {
                let v1 = [x, y, z];
                let g = sub(v, v1);
                let fv1 = f(v1);
                let mut inner = 0.0;
                for &(n, wn) in sphere {
                    let (p, p1) = pre_collision(v, v1, n, kernel.epsilon, kernel.reflective);
                    inner += wn * (kernel.gain_weight * f(p) * f(p1) - fv * fv1) * dot(g, n).abs();
                }
                total += wx * wy * wz * inner;
            }
        }
    }
    0.25 * kernel.diameter * kernel.diameter * total
}

/// Density rate `int (collision term)(v) dv`, integrating the direct form over
/// a product grid in `v`, `v1` and `n`.
pub fn density_rate<F: Fn(V3) -> f64>(f: F, kernel: Kernel, half_width: f64, order: usize, sphere: &[(V3, f64)]) -> f64 {
    let axis = composite_rule(-half_width, half_width, order, 1);
    let mut total = 0.0;
    for &(x, wx) in &axis {
        for &(y, wy) in &axis {
            for &(z, wz) in &axis {
                total += wx * wy * wz * collision_term(&f, [x, y, z], kernel, half_width, order, 1, sphere);
            }
        }
    }
    total
}

/// Normalised Maxwellian with unit mass.
pub fn maxwellian(density: f64, u: V3, temperature: f64) -> impl Fn(V3) -> f64 + Copy {
    move |v| {
        let d = sub(v, u);
        density * (2.0 * PI * temperature).powf(-1.5) * (-dot(d, d) / (2.0 * temperature)).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_is_exact_for_degree_fifteen() {
        let (x, w) = gauss_legendre(8);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((q - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn sphere_rule_integrates_abs_projection() {
        // int |g.n| dOmega = 2 pi |g|
        let rule = sphere_rule(16, 32);
        let g = [0.3, -1.2, 0.5];
        let q: f64 = rule.iter().map(|(n, w)| w * dot(g, *n).abs()).sum();
        assert!((q - 2.0 * PI * dot(g, g).sqrt()).abs() < 1e-2);
        let total: f64 = rule.iter().map(|(_, w)| w).sum();
        assert!((total - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn pre_collision_undoes_forward_rule() {
        let (v, v1, n) = ([0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
        // Forward reflective, eps = 0.5: w = (1.5,0,0), w1 = (0.5,0,0).
        let (p, p1) = pre_collision([1.5, 0.0, 0.0], [0.5, 0.0, 0.0], n, 0.5, true);
        assert!(sub(p, v).iter().all(|c| c.abs() < 1e-15));
        assert!(sub(p1, v1).iter().all(|c| c.abs() < 1e-15));
    }

    #[test]
    fn maxwellian_loss_matches_closed_form() {
        // Gain off: -n^2 (pi/2) d^2 <|g|> over v, with <|g|> = 4 sqrt(T/pi).
        let f = maxwellian(1.0, [0.0; 3], 1.0);
        let k = Kernel { diameter: 1.0, epsilon: 1.0, reflective: true, gain_weight: 0.0 };
        let rate = density_rate(f, k, 5.0, 8, &sphere_rule(8, 8));
        let exact = -(PI / 2.0) * 4.0 / PI.sqrt();
        assert!((rate - exact).abs() / exact.abs() < 0.02, "{rate} vs {exact}");
    }
}
