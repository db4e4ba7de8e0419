use kinetics_web::{impact, orbit, transport};

#[test]
fn head_on_impact_matches_formula() {
    let r = impact(&[1.0, 0.0, 0.0], &[-1.0, 0.0, 0.0], &[1.0, 0.0, 0.0], 0.5, true, 1.0, 1.0).unwrap();
    assert_eq!(r.len(), 10);
    // Equal masses, g.n = -2: each velocity flips and halves.
    assert!((r[0] + 0.5).abs() < 1e-15 && (r[3] - 0.5).abs() < 1e-15);
    assert!((r[8] - r[9]).abs() < 1e-14);
}

#[test]
fn impact_normalises_the_normal_and_rejects_short_vectors() {
    let a = impact(&[1.0, 0.2, 0.0], &[0.0; 3], &[2.0, 0.0, 0.0], 0.8, false, 1.0, 2.0).unwrap();
    let b = impact(&[1.0, 0.2, 0.0], &[0.0; 3], &[1.0, 0.0, 0.0], 0.8, false, 1.0, 2.0).unwrap();
    assert_eq!(a, b);
    assert!(impact(&[1.0], &[0.0; 3], &[1.0, 0.0, 0.0], 0.8, true, 1.0, 1.0).is_err());
    assert!(impact(&[1.0, 0.0, 0.0], &[0.0; 3], &[1.0, 0.0, 0.0], 1.5, true, 1.0, 1.0).is_err());
}

#[test]
fn orbit_starts_at_identity_image() {
    let o = orbit(&[1.0, 0.5, 0.0], 1.0, 4.0, 1.0, 50).unwrap();
    assert_eq!(o.len(), 150);
    assert!((o[0] - 1.0).abs() < 1e-15 && o[1].abs() < 1e-15 && o[2].abs() < 1e-15);
}

#[test]
fn transport_frame_keeps_the_blob() {
    let f = transport(0.8, 2.0, 1.0, 81).unwrap();
    assert_eq!(f.len(), 81 * 81);
    let peak = f.iter().cloned().fold(0.0, f64::max);
    assert!(peak > 0.95 && peak < 1.01, "{peak}");
}
