use fracdyn::mittag_leffler::{gamma, ml_decay, mittag_leffler};

#[test]
fn gamma_examples() {
    assert_eq!(gamma(1.0f64).unwrap(), 1.0);
    assert!((gamma(0.5f64).unwrap() - std::f64::consts::PI.sqrt()).abs() < 1e-14);
    assert!((gamma(5.0f64).unwrap() - 24.0).abs() < 1e-12);
    assert!(gamma(0.0f64).is_err());
    assert!(gamma(-1.5f64).is_err());
    assert!(gamma(171.5f64).is_err());
}

#[test]
fn gamma_recurrence() {
    for i in 1..400 {
        let x = i as f64 * 0.4;
        let lhs = gamma(x + 1.0).unwrap();
        let rhs = x * gamma(x).unwrap();
        assert!((lhs / rhs - 1.0).abs() < 1e-12, "x = {x}");
    }
}

#[test]
fn decay_profile_is_positive_and_non_increasing() {
    for alpha in [0.1, 0.3, 0.5, 0.8, 1.0] {
        let mut prev = f64::INFINITY;
        for i in 0..1000 {
            let t = 50.0 * i as f64 / 999.0;
            let v = mittag_leffler(alpha, 1.0, -t).unwrap();
            assert!(v > 0.0, "alpha {alpha}, t {t}: {v}");
            assert!(v <= prev * (1.0 + 1e-12), "alpha {alpha}, t {t}: {v} > {prev}");
            prev = v;
        }
    }
}

#[test]
fn e12_closed_form() {
    for z in [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0f64] {
        let exact = z.exp_m1() / z;
        let v = mittag_leffler(1.0, 2.0, z).unwrap();
        assert!((v - exact).abs() < 1e-10, "z {z}: {v} vs {exact}");
    }
}

/// t^α E_α(-γ t^α) from the first eight terms of the expansion at -∞.
fn plateau_expansion(alpha: f64, g: f64, t: f64) -> f64 {
    let z = -g * t.powf(alpha);
    -(1..=8)
        .map(|k| z.powi(-k) * fracdyn::mittag_leffler::rgamma(1.0 - alpha * k as f64))
        .sum::<f64>()
        * t.powf(alpha)
}

#[test]
fn algebraic_plateau() {
    for alpha in [0.3, 0.5, 0.8f64] {
        for g in [0.5, 1.0, 2.0] {
            let p = |t: f64| t.powf(alpha) * ml_decay(alpha, g, t).unwrap();
            for t in [1e3, 1e4] {
                let e = plateau_expansion(alpha, g, t);
                assert!((p(t) / e - 1.0).abs() < 1e-3, "alpha {alpha}, gamma {g}, t {t}");
            }
            if alpha > 0.3 || g >= 2.0 {
                let (a, b) = (p(1e3), p(1e4));
                assert!(((b - a) / b).abs() < 0.02, "alpha {alpha}, gamma {g}: {a} {b}");
            }
        }
    }
}

#[test]
fn increasing_in_the_argument() {
    for alpha in [0.2, 0.5, 0.9] {
        let mut prev = 0.0;
        for i in 0..=2000 {
            let z = -40.0 + 40.0 * i as f64 / 2000.0;
            let v = mittag_leffler(alpha, 1.0, z).unwrap();
            assert!(v >= prev, "alpha {alpha}, z {z}");
            prev = v;
        }
        assert_eq!(prev, 1.0);
    }
}

#[test]
fn decay_examples() {
    assert_eq!(ml_decay(0.5f64, 1.0, 0.0).unwrap(), 1.0);
    assert!((ml_decay(0.5f64, 1.0, 1.0).unwrap() - 0.427_583_576_155_807).abs() < 1e-10);
    let t = 100.0f64;
    let scaled = t.powf(0.7) * ml_decay(0.7, 2.0, t).unwrap();
    let limit = 1.0 / (2.0 * gamma(0.3f64).unwrap());
    assert!((scaled / limit - 1.0).abs() < 0.05);
}

#[test]
fn single_precision() {
    let v = mittag_leffler(0.5f32, 1.0, -1.0).unwrap();
    assert!((v - 0.427_583_6).abs() < 1e-5);
}
