use fracdyn::field_expr::catalog::{self, Entry};
use fracdyn::field_expr::{eval_field, numeric_derivative, parse_expr, BinOp, EvalError, ExprAst, ExprError, FieldDef, Func};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn names(ps: &[&str]) -> Vec<String> {
    ps.iter().map(|s| s.to_string()).collect()
}

#[test]
fn spec_examples() {
    let g = FieldDef::parse(&["x - x^3"], &[]).unwrap();
    assert_eq!(eval_field(&g, &[2.0], &[]).unwrap(), vec![-6.0]);
    assert_eq!(eval_field(&g, &[1.0], &[]).unwrap(), vec![0.0]);

    let g = FieldDef::parse(&["gamma - x^2"], &["gamma"]).unwrap();
    assert_eq!(eval_field(&g, &[3.0], &[1.0]).unwrap(), vec![-8.0]);

    let g = FieldDef::parse(&["x", "y*(1-y^2)*(1+x^2)"], &[]).unwrap();
    assert_eq!(eval_field(&g, &[1.0, 2.0], &[]).unwrap()[1], -12.0);

    let g = FieldDef::parse(&["gamma*x - x^3"], &["gamma"]).unwrap();
    assert_eq!(eval_field(&g, &[2.0], &[4.0]).unwrap(), vec![0.0]);

    let err = parse_expr("x +* 2", 1, &[]).unwrap_err();
    assert_eq!(err.offset(), Some(3), "{err}");

    let g = FieldDef::parse(&["1/x"], &[]).unwrap();
    assert!(matches!(
        eval_field(&g, &[0.0], &[]),
        Err(EvalError::NonFinite { component: 0 })
    ));
}

#[test]
fn derivative_examples() {
    let g = FieldDef::parse(&["x - x^3"], &[]).unwrap();
    assert!((numeric_derivative(&g, 0, &[0.0f64], 0, &[]).unwrap() - 1.0).abs() < 1e-8);
    assert!((numeric_derivative(&g, 0, &[1.0f64], 0, &[]).unwrap() + 2.0).abs() < 1e-8);
    let g = FieldDef::parse(&["-x"], &[]).unwrap();
    assert!((numeric_derivative(&g, 0, &[5.0f64], 0, &[]).unwrap() + 1.0).abs() < 1e-10);
}

#[test]
fn errors_are_positioned() {
    let cases = [
        ("2x", 1),
        ("x + q", 4),
        ("exp(x, x)", 0),
        ("(x", 2),
        ("x3", 0),
    ];
    for (src, offset) in cases {
        let err = parse_expr(src, 2, &[]).unwrap_err();
        assert_eq!(err.offset(), Some(offset), "{src}: {err}");
    }
    assert!(matches!(
        parse_expr("x + q", 1, &[]),
        Err(ExprError::UnknownIdentifier { ref name, .. }) if name == "q"
    ));
    assert!(matches!(parse_expr("sin()", 1, &[]), Err(ExprError::Arity { .. })));
}

const ALPHABET: &[&str] = &[
    "x", "y", "z", "x1", "x2", "x4", "gamma", "k", "1", "2.5", "1e3", "1e", ".", "+", "-", "*", "/", "^", "(", ")",
    ",", " ", "exp", "sin", "cos", "tanh", "abs", "log", "#", "é", "\t", "0.", "e",
];

#[test]
fn parser_is_total_on_fuzzed_input() {
    let params = names(&["gamma"]);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut parsed = 0;
    for _ in 0..10_000 {
        let n = rng.gen_range(0..14);
        let src: String = (0..n).map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())]).collect();
        match parse_expr(&src, 3, &params) {
            Ok(ast) => {
                parsed += 1;
                let _ = ast.eval(&[0.3, -1.2, 2.0], &[0.7]);
            }
            Err(e) => {
                if let Some(off) = e.offset() {
                    assert!(off <= src.len(), "{src:?}: {e}");
                }
            }
        }
    }
    assert!(parsed > 100, "fuzzer produced only {parsed} valid strings");
}

fn arb_ast() -> impl Strategy<Value = ExprAst> {
    let leaf = prop_oneof![
        (0u32..50).prop_map(|v| ExprAst::Num(v as f64 / 4.0)),
        (0usize..2).prop_map(ExprAst::Var),
        Just(ExprAst::Param(0)),
    ];
    leaf.prop_recursive(5, 40, 2, |inner| {
        let op = prop_oneof![
            Just(BinOp::Add),
            Just(BinOp::Sub),
            Just(BinOp::Mul),
            Just(BinOp::Div),
            Just(BinOp::Pow)
        ];
        prop_oneof![
            inner.clone().prop_map(|e| ExprAst::Neg(Box::new(e))),
            (0usize..Func::ALL.len(), inner.clone()).prop_map(|(f, e)| ExprAst::Call(Func::ALL[f], Box::new(e))),
            (op, inner.clone(), inner).prop_map(|(op, l, r)| ExprAst::Bin(op, Box::new(l), Box::new(r))),
        ]
    })
}

proptest! {
    #[test]
    fn print_then_parse_is_identity(ast in arb_ast()) {
        let params = names(&["gamma"]);
        let printed = ast.display(&params).to_string();
        let once = parse_expr(&printed, 2, &params).unwrap();
        let again = parse_expr(&once.display(&params).to_string(), 2, &params).unwrap();
        prop_assert_eq!(&once, &again);
        let (a, b): (f64, f64) = (ast.eval(&[0.7, -0.3], &[1.3]), once.eval(&[0.7, -0.3], &[1.3]));
        prop_assert!(a == b || (a.is_nan() && b.is_nan()), "{} : {} vs {}", printed, a, b);
    }
}

fn hand_coded(name: &str, x: &[f64], p: &[f64]) -> Vec<f64> {
    match name {
        "linear" => vec![-x[0]],
        "cubic" => vec![x[0] - x[0] * x[0] * x[0]],
        "logistic" => vec![x[0] * (1.0 - x[0])],
        "saddle" => vec![p[0] - x[0] * x[0]],
        "pitchfork" => vec![p[0] * x[0] - x[0] * x[0] * x[0]],
        "fig2" => vec![x[0] * (1.0 - x[0] * x[0]), (1.0 + x[0] * x[0]) * (x[1] * (1.0 - x[1] * x[1]))],
        "sec3text" => vec![x[0] * (1.0 - x[0]), (1.0 + x[0] * x[0]) * (x[1] * (1.0 - x[1] * x[1]))],
        _ => unreachable!("{name}"),
    }
}

#[test]
fn catalog_matches_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for name in catalog::names() {
        let (field, params) = match catalog::lookup(name).unwrap() {
            Entry::Field(c) => (c.field(), c.default_params()),
            Entry::Triangular(t) => (t.field().unwrap(), vec![]),
        };
        for _ in 0..500 {
            let x: Vec<f64> = (0..field.dimension()).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let p: Vec<f64> = params.iter().map(|_| rng.gen_range(-2.0..2.0)).collect();
            let got = eval_field(&field, &x, &p).unwrap();
            let want = hand_coded(name, &x, &p);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() <= 1e-15 * w.abs().max(1.0) * 4.0, "{name} at {x:?}: {g} vs {w}");
            }
        }
    }
}
