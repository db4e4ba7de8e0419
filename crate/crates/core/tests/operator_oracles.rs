//! Collision-operator estimates against closed forms and the product-grid oracle.

use std::f64::consts::PI;

use kinetics_core::collision::CollisionBranch;
use kinetics_core::distribution::{MaxwellianMixture, MaxwellianMode, VelocityDensity};
use kinetics_core::operator::{evaluate_at, evaluate_field, moment_rates, GainNormalization, QuadratureSpec};
use kinetics_core::Vec3;
use kinetics_oracles::{collision_term, density_rate, sphere_rule, Kernel};

fn spec(samples: usize, epsilon: f64, normalization: GainNormalization) -> QuadratureSpec {
    QuadratureSpec {
        samples,
        seed: 17,
        diameter: 1.0,
        mass: 1.0,
        epsilon,
        branch: CollisionBranch::Reflective,
        normalization,
    }
}

fn unit_maxwellian() -> MaxwellianMixture {
    MaxwellianMixture::new(vec![MaxwellianMode::new(1.0, Vec3::zeros(), 1.0)], 1.0, 6.0).unwrap()
}

/// `<|g|>` and `<|g|^3>` for two unit-mass Maxwellian partners at temperature 1.
fn relative_speed_moments() -> (f64, f64) {
    let sigma = 2f64.sqrt();
    (2.0 * sigma * (2.0 / PI).sqrt(), 8.0 * (2.0 / PI).sqrt() * sigma.powi(3))
}

#[test]
fn elastic_maxwellian_is_a_fixed_point_under_both_normalizations() {
    let f = unit_maxwellian();
    let probes: Vec<Vec3> = (0..20)
        .map(|k| {
            let a = k as f64 * 0.7;
            Vec3::new(1.5 * a.cos(), 1.2 * a.sin(), 0.1 * k as f64 - 1.0)
        })
        .collect();
    for norm in [GainNormalization::PaperForm, GainNormalization::StandardGranular] {
        for r in evaluate_field(&f, &probes, &spec(100_000, 1.0, norm)).unwrap() {
            assert!(r.within_sigmas(3.0), "{norm:?} {r:?}");
        }
    }
}

#[test]
fn std_error_falls_as_inverse_square_root_of_samples() {
    let bimodal = kinetics_core::audit::default_bimodal(6.0).unwrap();
    let v = Vec3::new(0.5, 0.3, -0.2);
    let errors: Vec<f64> = [25_000, 100_000, 400_000]
        .iter()
        .map(|&n| evaluate_at(&bimodal, v, &spec(n, 1.0, GainNormalization::PaperForm)).unwrap().std_error)
        .collect();
    let slope = (errors[2] / errors[0]).ln() / 16f64.ln();
    assert!((-0.6..=-0.4).contains(&slope), "{slope} from {errors:?}");
}

#[test]
fn bimodal_mode_centre_agrees_with_product_grid() {
    let f = kinetics_core::audit::default_bimodal(6.0).unwrap();
    let centre = Vec3::new(1.5, 0.0, 0.0);
    let mc = evaluate_at(&f, centre, &spec(200_000, 1.0, GainNormalization::PaperForm)).unwrap();
    assert!(mc.significance() > 3.0, "{mc:?}");
    let dens = |v: [f64; 3]| f.value(&Vec3::new(v[0], v[1], v[2]));
    let kernel = Kernel { diameter: 1.0, epsilon: 1.0, reflective: true, gain_weight: 1.0 };
    let coarse = collision_term(dens, [1.5, 0.0, 0.0], kernel, 6.0, 8, 1, &sphere_rule(8, 8));
    let fine = collision_term(dens, [1.5, 0.0, 0.0], kernel, 6.0, 8, 3, &sphere_rule(8, 16));
    assert_eq!(coarse.signum(), mc.value.signum());
    assert!((fine - mc.value).abs() < 3.0 * mc.std_error + 0.02 * fine.abs(), "{fine} vs {mc:?}");
}

#[test]
fn paper_form_density_loss_matches_closed_form_and_grid() {
    // Integrating the gain back to pre-collision variables gives
    // (eps^3 - 1) (pi/2) d^2 n^2 <|g|> for the eps-weighted gain.
    let eps: f64 = 0.8;
    let (mean_g, _) = relative_speed_moments();
    let exact = (eps.powi(3) - 1.0) * PI / 2.0 * mean_g;
    let f = unit_maxwellian();
    let r = moment_rates(&f, &spec(1_000_000, eps, GainNormalization::PaperForm)).unwrap();
    assert!(r.density.significance() > 3.0);
    assert!((r.density.value - exact).abs() <= 3.0 * r.density.std_error, "{:?} vs {exact}", r.density);
    let dens = |v: [f64; 3]| f.value(&Vec3::new(v[0], v[1], v[2]));
    let kernel = Kernel { diameter: 1.0, epsilon: eps, reflective: true, gain_weight: eps };
    let grid = density_rate(dens, kernel, 5.0, 8, &sphere_rule(8, 8));
    assert_eq!(grid.signum(), r.density.value.signum());
    assert!((grid - exact).abs() < 0.05 * exact.abs(), "{grid} vs {exact}");
}

#[test]
fn standard_granular_energy_loss_matches_closed_form() {
    // dE/dt = -(1/2)(d^2/4)((1 - eps^2) m/4) pi n^2 <|g|^3>, using
    // int |g.n|^3 dOmega = pi |g|^3.
    let eps: f64 = 0.8;
    let (_, mean_g3) = relative_speed_moments();
    let exact = -0.5 * 0.25 * 0.25 * (1.0 - eps * eps) * PI * mean_g3;
    let r = moment_rates(&unit_maxwellian(), &spec(1_000_000, eps, GainNormalization::StandardGranular)).unwrap();
    assert!(r.energy.value < 0.0 && r.energy.significance() > 3.0);
    assert!((r.energy.value - exact).abs() <= 3.0 * r.energy.std_error, "{:?} vs {exact}", r.energy);
    assert!(r.density.within_sigmas(3.0));
    assert!(r.momentum.iter().all(|m| m.within_sigmas(3.0)));
}

#[test]
fn passing_branch_conserves_the_same_invariants() {
    let f = kinetics_core::audit::default_bimodal(6.0).unwrap();
    let s = QuadratureSpec { branch: CollisionBranch::Passing, ..spec(200_000, 0.7, GainNormalization::StandardGranular) };
    let r = moment_rates(&f, &s).unwrap();
    assert!(r.density.within_sigmas(3.0));
    assert!(r.momentum.iter().all(|m| m.within_sigmas(3.0)));
    assert!(r.energy.value < 0.0);
}
