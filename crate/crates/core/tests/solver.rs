use fracdyn::caputo_solver::{contraction_dt, convergence_order, solve_pece, solve_svie, CaputoProblem, Order};
use fracdyn::field_expr::catalog;
use fracdyn::field_expr::{numeric_derivative, FieldDef, FnField};
use fracdyn::function_space::SampledFunction;
use fracdyn::mittag_leffler::{gamma, ml_decay};
use fracdyn::scalar_analysis::search_h1;
use proptest::prelude::*;

fn linear() -> FnField<impl Fn(&[f64], &mut [f64]) + Sync> {
    FnField::new(1, |x: &[f64], o: &mut [f64]| o[0] = -x[0])
}

#[test]
fn zero_field_is_constant() {
    let g = FnField::new(1, |_: &[f64], o: &mut [f64]| o[0] = 0.0);
    let tr = solve_pece(&g, &CaputoProblem::new(0.4, vec![3.0], 5.0, 0.01).unwrap()).unwrap();
    assert!(tr.component(0).all(|v| v == 3.0));
}

#[test]
fn constant_field_is_the_fractional_integral() {
    let g = FnField::new(1, |_: &[f64], o: &mut [f64]| o[0] = 1.0);
    let tr = solve_pece(&g, &CaputoProblem::new(0.5, vec![0.0], 1.0, 1e-3).unwrap()).unwrap();
    let exact = 1.0 / gamma(1.5f64).unwrap();
    assert!((tr.last()[0] - exact).abs() < 1e-4);
}

#[test]
fn linear_field_follows_mittag_leffler() {
    let tr = solve_pece(&linear(), &CaputoProblem::new(0.5, vec![1.0], 1.0, 1e-3).unwrap()).unwrap();
    assert_eq!(tr.initial(), &[1.0]);
    assert!((tr.last()[0] - 0.427_583_576_155_807).abs() < 1e-3);
    for i in (0..tr.len()).step_by(97) {
        let exact = ml_decay(0.5, 1.0, tr.time(i)).unwrap();
        assert!((tr.state(i)[0] - exact).abs() < 2e-3, "t = {}", tr.time(i));
    }
}

#[test]
fn convergence_orders() {
    let p = CaputoProblem::new(0.5, vec![1.0], 1.0, 0.02).unwrap();
    let study = convergence_order(&linear(), &p, 4).unwrap();
    match study.order {
        Order::Slope(s) => assert!(s >= 1.2, "alpha 0.5 slope {s}"),
        Order::Exact => panic!("linear field is not solved exactly"),
    }
    let p = CaputoProblem::new(0.3, vec![1.0], 1.0, 0.02).unwrap();
    match convergence_order(&linear(), &p, 4).unwrap().order {
        Order::Slope(s) => assert!(s >= 1.05, "alpha 0.3 slope {s}"),
        Order::Exact => panic!("linear field is not solved exactly"),
    }
    let zero = FnField::new(1, |_: &[f64], o: &mut [f64]| o[0] = 0.0);
    assert_eq!(convergence_order(&zero, &p, 3).unwrap().order, Order::Exact);
}

#[test]
fn svie_with_constant_forcing_is_pece() {
    let cubic = catalog::CUBIC.field();
    let g = cubic.bind::<f64>(&[]).unwrap();
    let forcing = SampledFunction::constant(&[0.3], 0.01, 5.0).unwrap();
    let a = solve_pece(&g, &CaputoProblem::new(0.6, vec![0.3], 5.0, 0.01).unwrap()).unwrap();
    let b = solve_svie(&forcing, &g, 0.6, 5.0, 0.01).unwrap();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.states.iter().zip(&b.states) {
        assert!((x - y).abs() <= 1e-14);
    }
}

#[test]
fn svie_with_zero_field_returns_forcing() {
    let zero = FnField::new(1, |_: &[f64], o: &mut [f64]| o[0] = 0.0);
    let forcing = SampledFunction::from_fn(0.01, 201, 1, |t: f64| vec![t.sin()]).unwrap();
    let tr = solve_svie(&forcing, &zero, 0.5, 2.0, 0.01).unwrap();
    for (i, x) in tr.component(0).enumerate() {
        assert_eq!(x, forcing.at(i)[0]);
    }
}

#[test]
fn svie_self_convergence() {
    let run = |dt: f64| {
        let n = (1.0 / dt).round() as usize + 1;
        let f = SampledFunction::from_fn(dt, n, 1, |t: f64| vec![1.0 + t]).unwrap();
        solve_svie(&f, &linear(), 0.5, 1.0, dt).unwrap().last()[0]
    };
    for dt in [0.02, 0.01] {
        let (coarse, fine, finer) = (run(dt), run(dt / 4.0), run(dt / 8.0));
        let q = 2f64.powf(1.5);
        let reference = (q * finer - fine) / (q - 1.0);
        assert!((coarse - reference).abs() <= 2.0 * dt.powf(1.2), "dt {dt}");
    }
}

#[test]
fn escape_is_a_marker() {
    let g = FieldDef::parse(&["-1 - x^2"], &[]).unwrap();
    let g = g.bind::<f64>(&[]).unwrap();
    let tr = solve_pece(&g, &CaputoProblem::new(0.5, vec![0.0], 50.0, 0.01).unwrap()).unwrap();
    let e = tr.escape.as_ref().expect("solution blows up");
    assert_eq!(e.direction, vec![-1]);
    assert_eq!(e.index + 1, tr.len());
    assert!(tr.states[..tr.states.len() - 1].iter().all(|v| v.is_finite()));
}

#[test]
fn cauchy_refinement() {
    for entry in [catalog::LINEAR, catalog::CUBIC, catalog::PITCHFORK] {
        let f = entry.field();
        let g = f.bind(&entry.default_params()).unwrap();
        let p = CaputoProblem::new(0.6, vec![0.4], 2.0, 0.04).unwrap();
        let ends: Vec<f64> = (0..4)
            .map(|k| solve_pece(&g, &p.with_dt(0.04 / 2f64.powi(k)).unwrap()).unwrap().last()[0])
            .collect();
        for w in ends.windows(3) {
            let (d1, d2) = ((w[1] - w[0]).abs(), (w[2] - w[1]).abs());
            assert!(d2 * 2.0 <= d1, "{}: {d1} {d2}", entry.name);
        }
    }
}

#[test]
fn absorbing_ball() {
    for entry in [catalog::LINEAR, catalog::CUBIC, catalog::PITCHFORK] {
        let f = entry.field();
        let g = f.bind(&entry.default_params()).unwrap();
        let cert = search_h1(&g, (-10.0, 10.0), 4000).unwrap().expect("catalog field is dissipative");
        let radius2 = 1.0 + cert.a / cert.b + 0.1;
        for x0 in [-6.0, -2.5, 0.3, 4.0, 8.0] {
            let tr = solve_pece(&g, &CaputoProblem::new(0.7, vec![x0], 50.0, 0.02).unwrap()).unwrap();
            let half = tr.len() / 2;
            for i in half..tr.len() {
                let x = tr.state(i)[0];
                assert!(x * x <= radius2, "{} from {x0}: x({}) = {x}", entry.name, tr.time(i));
            }
        }
    }
}

/// max |g'| over [lo, hi].
fn lipschitz(f: &FieldDef, params: &[f64], lo: f64, hi: f64) -> f64 {
    (0..=400)
        .map(|i| lo + (hi - lo) * i as f64 / 400.0)
        .map(|x| numeric_derivative(f, 0, &[x], 0, params).unwrap().abs())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]
    #[test]
    fn order_is_preserved(
        which in 0usize..4,
        alpha in 0.3f64..0.95,
        eta1 in -2.0f64..1.999,
        frac in 0.0f64..1.0,
    ) {
        let gap = 1e-3 + frac * (2.0 - 1e-3 - eta1);
        let entry = [catalog::LINEAR, catalog::CUBIC, catalog::SADDLE, catalog::PITCHFORK][which];
        let f = entry.field();
        let params = entry.default_params();
        let g = f.bind(&params).unwrap();
        let dt = contraction_dt(alpha, lipschitz(&f, &params, -2.0, 2.0)).unwrap().min(0.01);
        let p = CaputoProblem::new(alpha, vec![eta1], 5.0, dt).unwrap();
        let lo = solve_pece(&g, &p).unwrap();
        let hi = solve_pece(&g, &p.with_x0(vec![eta1 + gap]).unwrap()).unwrap();
        let n = lo.len().min(hi.len());
        for i in 0..n {
            prop_assert!(lo.state(i)[0] < hi.state(i)[0], "{} at t = {}", entry.name, lo.time(i));
        }
    }
}

#[test]
fn solution_len_excludes_the_marker() {
    let g = FieldDef::parse(&["-1 - x^2"], &[]).unwrap();
    let g = g.bind::<f64>(&[]).unwrap();
    let p = CaputoProblem::new(0.5, vec![0.0], 50.0, 0.01).unwrap();
    let tr = solve_pece(&g, &p).unwrap();
    assert_eq!(tr.solution_len() + 1, tr.len());
    let tr = solve_pece(&g, &CaputoProblem::new(0.5, vec![0.0], 0.1, 0.01).unwrap()).unwrap();
    assert_eq!(tr.solution_len(), tr.len());
}
