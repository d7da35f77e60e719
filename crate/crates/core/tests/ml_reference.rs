//! Golden values for E_{α,β}(z).
//!
//! `data/ml_reference.csv` holds the defining power series summed in
//! multiprecision (working precision grows with |z|^{1/α}), plus
//! E_{1/2}(z) = e^{z²} erfc(-z) for large |z|. `data/ml_reference_tail.csv`
//! holds 40-digit quadratures of the Laplace inversion for large |z| and α < 1.

use fracdyn::mittag_leffler::{mittag_leffler, regime, MlQuery, Regime};

fn load(name: &str) -> Vec<(f64, f64, f64, f64)> {
    let path = format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path)
        .expect("reference table")
        .lines()
        .skip(1)
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
            (v[0], v[1], v[2], v[3])
        })
        .collect()
}

fn tolerance(alpha: f64, beta: f64, z: f64) -> f64 {
    match regime(&MlQuery::new(alpha, beta, z).unwrap()) {
        Regime::Series | Regime::Asymptotic => 1e-10,
        Regime::Integral => 1e-8,
    }
}

fn check(table: &str) {
    let mut failures = Vec::new();
    for (alpha, beta, z, expected) in load(table) {
        let got = mittag_leffler(alpha, beta, z).unwrap();
        let err = (got - expected).abs() / expected.abs().max(1e-300);
        let tol = tolerance(alpha, beta, z);
        // near a sign change of E_{α,β} only absolute accuracy is meaningful
        let abs_ok = (got - expected).abs() < 1e-12;
        if err > tol && !abs_ok {
            failures.push(format!("E_({alpha},{beta})({z}) = {got:e}, expected {expected:e} (rel {err:e})"));
        }
    }
    assert!(failures.is_empty(), "{} mismatches:\n{}", failures.len(), failures.join("\n"));
}

#[test]
fn series_and_erfc_reference_table() {
    check("ml_reference.csv");
}

#[test]
fn large_argument_reference_table() {
    check("ml_reference_tail.csv");
}

#[test]
#[ignore]
fn print_worst_errors() {
    for table in ["ml_reference.csv", "ml_reference_tail.csv"] {
        let mut worst = std::collections::BTreeMap::new();
        for (a, b, z, e) in load(table) {
            let g = mittag_leffler(a, b, z).unwrap();
            let r = format!("{:?}", regime(&MlQuery::new(a, b, z).unwrap()));
            let err = (g - e).abs() / e.abs().max(1e-300);
            let w = worst.entry(r).or_insert((0.0, 0.0, 0.0, 0.0));
            if err > w.0 { *w = (err, a, b, z); }
        }
        println!("{table}: {worst:?}");
    }
}
