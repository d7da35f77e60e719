use fracdyn::bifurcation::*;
use fracdyn::caputo_solver::{solve_pece, CaputoProblem};
use fracdyn::field_expr::catalog;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn saddle_node_sweep() {
    let fam = catalog::SADDLE.field();
    let diag = sweep(&fam, "gamma", &[0.0f64], (-1.0, 1.0), 201, (-3.0, 3.0)).unwrap();
    for (g, n) in diag.gammas.iter().zip(diag.counts()) {
        let want = if g.abs() < 1e-12 { 1 } else if *g < 0.0 { 0 } else { 2 };
        assert_eq!(n, want, "gamma {g}");
    }
    let c = classify(&diag);
    assert_eq!(c.label, Label::SaddleNode, "{}", c.reason);
    assert!((c.exponent.unwrap() - 0.5).abs() <= 0.1);
    assert!(c.gamma_star.unwrap().abs() < 1e-9);
}

#[test]
fn branches_are_square_roots() {
    for (entry, lo) in [(catalog::SADDLE, 0.0f64), (catalog::PITCHFORK, 0.0)] {
        let fam = entry.field();
        let diag = sweep(&fam, "gamma", &[0.0f64], (lo, 1.0), 51, (-3.0, 3.0)).unwrap();
        for (g, zs) in diag.gammas.iter().zip(&diag.zero_sets) {
            if *g < 1e-3 {
                continue;
            }
            let r = g.sqrt();
            assert!((zs.zeros[0] + r).abs() < 1e-9, "{} gamma {g}", entry.name);
            assert!((zs.zeros[zs.len() - 1] - r).abs() < 1e-9, "{} gamma {g}", entry.name);
            for (j, z) in zs.zeros.iter().enumerate() {
                let stable = if entry.name == "pitchfork" { z.abs() > 1e-9 } else { *z > 0.0 };
                assert_eq!(zs.is_stable(j), stable, "{} gamma {g}, zero {z}", entry.name);
            }
        }
    }
}

#[test]
fn pitchfork_sweep() {
    let fam = catalog::PITCHFORK.field();
    let diag = sweep(&fam, "gamma", &[0.0f64], (-1.0, 1.0), 200, (-3.0, 3.0)).unwrap();
    for (g, n) in diag.gammas.iter().zip(diag.counts()) {
        assert_eq!(n, if *g < 0.0 { 1 } else { 3 }, "gamma {g}");
    }
    let c = classify(&diag);
    assert_eq!(c.label, Label::Pitchfork, "{}", c.reason);
    assert!((c.exponent.unwrap() - 0.5).abs() <= 0.1);
}

#[test]
fn constant_family_has_no_zeros() {
    let fam = fracdyn::field_expr::FieldDef::parse(&["1 + 0*gamma"], &["gamma"]).unwrap();
    let diag = sweep(&fam, "gamma", &[0.0f64], (-1.0, 1.0), 11, (-3.0, 3.0)).unwrap();
    assert!(diag.counts().iter().all(|&n| n == 0));
    assert_eq!(classify(&diag).label, Label::None);
}

#[test]
fn saddle_limits_for_random_seeds() {
    let fam = catalog::SADDLE.field();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..100 {
        let gamma: f64 = rng.gen_range(0.05..1.0);
        let r = gamma.sqrt();
        let eta = rng.gen_range(-r + 0.01..2.5);
        let g = fam.bind(&[gamma]).unwrap();
        let tr = solve_pece(&g, &CaputoProblem::new(0.7, vec![eta], 1e3, 0.1).unwrap()).unwrap();
        assert!((tr.last()[0] - r).abs() < 0.05, "gamma {gamma}, eta {eta}: {}", tr.last()[0]);
    }
}

#[test]
fn pitchfork_limits() {
    let fam = catalog::PITCHFORK.field();
    for gamma in [0.25, 1.0, 2.0f64] {
        let g = fam.bind(&[gamma]).unwrap();
        let r = gamma.sqrt();
        for (eta, want) in [(0.3, r), (1.8, r), (-0.3, -r), (-1.8, -r), (0.0, 0.0)] {
            let tr = solve_pece(&g, &CaputoProblem::new(0.7, vec![eta], 1e3, 0.1).unwrap()).unwrap();
            assert!((tr.last()[0] - want).abs() < 0.05, "gamma {gamma}, eta {eta}");
        }
    }
}

#[test]
fn divergence_cases() {
    let fam = catalog::SADDLE.field();
    let run = |gamma: f64, x0: f64| {
        let g = fam.bind(&[gamma]).unwrap();
        divergence_check(&g, 0.6, x0, 100.0, 0.01, Some(gamma)).unwrap()
    };
    let r = run(-0.5, 0.0);
    assert!(r.diverged && r.bound_holds == Some(true));
    let r = run(0.25, 0.0);
    assert!(!r.diverged && r.bound_holds == Some(true));
    let r = run(0.25, -1.0);
    assert!(r.diverged);
}
