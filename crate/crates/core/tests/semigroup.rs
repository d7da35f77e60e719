use fracdyn::field_expr::{catalog, FnField};
use fracdyn::function_space::*;
use fracdyn::mittag_leffler::ml_decay;

fn rho_default(f: &SampledFunction<f64>, h: &SampledFunction<f64>) -> f64 {
    rho(f, h, RhoParams::default()).unwrap()
}

#[test]
fn metric_examples() {
    let zero = SampledFunction::constant(&[0.0f64], 0.1, 30.0).unwrap();
    let one = SampledFunction::constant(&[1.0], 0.1, 30.0).unwrap();
    let d: f64 = rho(&zero, &one, RhoParams::new(30).unwrap()).unwrap();
    assert!((d - 0.5).abs() <= 2f64.powi(-30));
    assert_eq!(rho_default(&one, &one), 0.0);
    let short = SampledFunction::constant(&[1.0], 0.1, 5.0).unwrap();
    assert!(matches!(
        rho(&short, &one, RhoParams::default()),
        Err(SemigroupError::GridDomain { .. })
    ));
}

#[test]
fn identity_for_catalog_fields() {
    let f = SampledFunction::from_fn(0.01, 2101, 1, |t: f64| vec![(0.3 * t).sin() + 0.5]).unwrap();
    for entry in catalog::SCALAR_FIELDS {
        let def = entry.field();
        let g = def.bind(&entry.default_params()).unwrap();
        let image = apply_t(0.0, &f, &g, 0.5, 0.01, 20.0).unwrap();
        assert!(rho_default(&image.image, &f) <= 1e-12, "{}", entry.name);
        let d = semigroup_defect(0.5, 0.0, &f, &g, 0.5, 0.01, RhoParams::default()).unwrap();
        assert!(d.defect <= 1e-12, "{}: {}", entry.name, d.defect);
    }
}

#[test]
fn shift_law_for_the_zero_field() {
    let zero = FnField::new(1, |_: &[f64], o: &mut [f64]| o[0] = 0.0);
    let f = SampledFunction::from_fn(0.01, 2201, 1, |t: f64| vec![t.cos()]).unwrap();
    let d = semigroup_defect(0.3, 0.7, &f, &zero, 0.4, 0.01, RhoParams::default()).unwrap();
    assert_eq!(d.defect, 0.0);
    let image = apply_t(1.0, &f, &zero, 0.4, 0.01, 5.0).unwrap();
    for i in 0..image.image.len() {
        assert_eq!(image.image.at(i)[0], f.at(i + 100)[0]);
    }
}

#[test]
fn constant_history_reproduces_the_flow() {
    let lin = catalog::LINEAR.field();
    let g = lin.bind::<f64>(&[]).unwrap();
    let f = SampledFunction::constant(&[2.0], 0.001, 3.0).unwrap();
    for tau in [0.5, 1.0, 2.0] {
        let image = apply_t(tau, &f, &g, 0.5, 0.001, 0.0).unwrap();
        let exact = 2.0 * ml_decay(0.5, 1.0, tau).unwrap();
        assert!((image.image.at(0)[0] - exact).abs() < 1e-3, "tau {tau}");
    }
}

#[test]
fn composition_is_exact_on_the_grid() {
    let lin = catalog::LINEAR.field();
    let cub = catalog::CUBIC.field();
    for (def, x0) in [(&lin, 1.0), (&cub, 2.0)] {
        let g = def.bind::<f64>(&[]).unwrap();
        let defects: Vec<f64> = [0.1, 0.05, 0.025, 0.0125]
            .iter()
            .map(|&dt| {
                let f = SampledFunction::constant(&[x0], dt, 22.0).unwrap();
                semigroup_defect(0.5, 0.5, &f, &g, 0.5, dt, RhoParams::default()).unwrap().defect
            })
            .collect();
        assert!(defects.iter().all(|&d| d <= 1e-13), "{defects:?}");
    }
}

#[test]
fn state_space_is_not_a_semigroup() {
    for alpha in [0.3, 0.5, 0.8] {
        assert!(state_space_defect(alpha, 1.0, 1.0, 1.0).unwrap() > 0.01);
    }
    assert!(state_space_defect(1.0, 1.0, 1.0, 1.0).unwrap() < 1e-12);
    assert!(state_space_defect(0.5, 1e-9, 1e-9, 1.0).unwrap() < 1e-3);
}
