//! The invariant battery behind `verify` and `verify-scalar`.

use fracdyn::bifurcation::{sweep, Label};
use fracdyn::caputo_solver::{solve_pece, CaputoProblem, Trajectory};
use fracdyn::field_expr::catalog;
use fracdyn::field_expr::FieldDef;
use fracdyn::function_space::RhoParams;
use fracdyn::scalar_analysis::ZeroSet;
use fracdyn::triangular::TriangularField;
use serde_json::{json, Value};

use crate::args::{Fault, Suite};
use crate::checks::{self, HeteroclinicSettings, H1_SCAN, SAMPLES};
use crate::field::ResolvedField;
use crate::report::{CheckResult, Status};

/// Factor applied to the envelope rate constant.
pub fn gamma_scale(fault: Option<Fault>) -> f64 {
    match fault {
        Some(Fault::InflateGamma) => 10.0,
        None => 1.0,
    }
}

/// Folds per-item results into one check: fails if any item fails, margin
/// is the smallest item margin.
pub fn combine(name: &str, items: Vec<CheckResult>) -> CheckResult {
    let status = if items.iter().any(|r| r.status == Status::Fail) {
        Status::Fail
    } else if items.iter().all(|r| r.status == Status::Skip) {
        Status::Skip
    } else {
        Status::Pass
    };
    let margin = items.iter().filter_map(|r| r.margin).reduce(f64::min);
    let details: Vec<Value> = items
        .into_iter()
        .map(|r| json!({ "status": r.status.as_str(), "details": r.details }))
        .collect();
    CheckResult::new(name, status, margin, json!({ "items": details }))
}

fn solve(rf: &ResolvedField, alpha: f64, eta: f64, t_end: f64, dt: f64) -> Result<Trajectory<f64>, CheckResult> {
    let g = rf.def.bind(&rf.params).map_err(|e| CheckResult::fail("solve", e))?;
    CaputoProblem::new(alpha, vec![eta], t_end, dt)
        .and_then(|p| solve_pece(&g, &p))
        .map_err(|e| CheckResult::fail("solve", e))
}

/// Zeros of `zs` adjacent to the largest stable zero.
fn neighbours(zs: &ZeroSet<f64>) -> Option<(Option<f64>, f64, Option<f64>)> {
    let j = (0..zs.len()).rev().find(|&j| zs.is_stable(j))?;
    let lower = j.checked_sub(1).map(|k| zs.zeros[k]);
    let upper = zs.zeros.get(j + 1).copied();
    Some((lower, zs.zeros[j], upper))
}

/// Every scalar invariant for one field. Initial values are placed
/// relative to the largest stable zero x*: below it for the envelope and
/// the heteroclinic orbit, above it for the rate fit.
pub fn scalar_battery(
    rf: &ResolvedField,
    alpha: f64,
    fault: Option<Fault>,
    order_fields: &[(&str, &FieldDef, &[f64])],
) -> Vec<CheckResult> {
    let mut out = Vec::new();
    if rf.dim() != 1 {
        out.push(CheckResult::fail("scalar_battery", "a scalar field is required"));
        return out;
    }
    let g = match rf.def.bind(&rf.params) {
        Ok(g) => g,
        Err(e) => {
            out.push(CheckResult::fail("scalar_battery", e));
            return out;
        }
    };
    let (h1, cert) = checks::h1(&g, H1_SCAN);
    out.push(h1);
    let scan = cert.as_ref().map_or(H1_SCAN, |c| c.default_scan());
    let (h2, zs) = checks::h2(&g, scan, SAMPLES);
    out.push(h2);
    out.push(checks::attractor(cert.is_some(), zs.as_ref()));
    out.push(checks::order_preservation(order_fields, alpha, 20 / order_fields.len().max(1), (-2.0, 2.0), 1));

    let Some(zs) = zs.filter(|z| !z.is_empty()) else {
        return out;
    };
    let (lo, hi) = (zs.zeros[0], zs.zeros[zs.len() - 1]);
    let limits: Vec<CheckResult> = (0..9)
        .map(|k| lo - 1.0 + (hi - lo + 2.0) * k as f64 / 8.0)
        .map(|eta| match solve(rf, alpha, eta, 500.0, 0.05) {
            Ok(tr) => checks::limit(&g, &zs, eta, &tr, 0.05),
            Err(r) => r,
        })
        .collect();
    out.push(combine("limits", limits));

    let Some((lower, x_star, upper)) = neighbours(&zs) else {
        out.push(CheckResult::skip("envelope_check", "no stable steady state"));
        return out;
    };
    let eta = lower.map_or(x_star - 0.5, |z| (z + x_star) / 2.0);
    match solve(rf, alpha, eta, 20.0, 1e-3) {
        Ok(tr) => {
            out.push(checks::envelope(&g, &zs, &tr, x_star, gamma_scale(fault)));
            out.push(checks::lower_bound(&g, &zs, &tr));
        }
        Err(r) => out.push(r),
    }
    let eta_above = upper.map_or(x_star + 1.0, |z| (z + x_star) / 2.0);
    match solve(rf, alpha, eta_above, 2000.0, 0.1) {
        Ok(tr) => out.push(checks::rate(&tr, x_star, alpha)),
        Err(r) => out.push(r),
    }
    if lower.is_some() {
        let s = HeteroclinicSettings {
            alpha,
            eta,
            t_back: 50.0,
            t_fwd: 1000.0,
            dt: 0.05,
            round_trip: 10.0,
            tol: 1e-2,
        };
        out.extend(checks::heteroclinic(&g, &zs, &s).0);
    }
    out
}

fn tag(suite: &str, mut rs: Vec<CheckResult>) -> Vec<CheckResult> {
    for r in &mut rs {
        if let Value::Object(m) = &mut r.details {
            m.insert("suite".into(), json!(suite));
        }
    }
    rs
}

fn scalar_suite(alpha: f64, fault: Option<Fault>) -> Vec<CheckResult> {
    let cubic = crate::field::from_catalog("cubic", &[]).expect("catalog entry");
    let defs: Vec<(&str, FieldDef, Vec<f64>)> = [catalog::LINEAR, catalog::CUBIC, catalog::SADDLE, catalog::PITCHFORK]
        .iter()
        .map(|e| (e.name, e.field(), e.default_params()))
        .collect();
    let order: Vec<(&str, &FieldDef, &[f64])> = defs.iter().map(|(n, d, p)| (*n, d, p.as_slice())).collect();
    scalar_battery(&cubic, alpha, fault, &order)
}

fn triangular_suite(alpha: f64) -> Vec<CheckResult> {
    let tf = match TriangularField::from_catalog(&catalog::FIG2) {
        Ok(tf) => tf,
        Err(e) => return vec![CheckResult::fail("triangular", e)],
    };
    let mut out = checks::triangular(&tf, &[], (-3.0, 3.0), SAMPLES);
    let (limits, _) = checks::triangular_limits(&tf, &[], (-3.0, 3.0), SAMPLES, alpha, 4, 0, (-2.0, 2.0), 500.0, 0.05, 0.05);
    out.push(combine("componentwise_limits", limits));
    out
}

fn bifurcation_suite(alpha: f64) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for (entry, label) in [(catalog::SADDLE, Label::SaddleNode), (catalog::PITCHFORK, Label::Pitchfork)] {
        let def = entry.field();
        match sweep(&def, "gamma", &entry.default_params(), (-1.0, 1.0), 201, (-3.0, 3.0)) {
            Ok(diag) => {
                let mut r = checks::classification(&diag, Some(label));
                r.details["family"] = json!(entry.name);
                out.push(r);
            }
            Err(e) => out.push(CheckResult::fail("classification", e)),
        }
    }
    let def = catalog::SADDLE.field();
    let probes: Vec<CheckResult> = [(-0.5, 0.0), (0.25, 0.0), (0.25, -1.0)]
        .iter()
        .map(|&(gamma, x0)| checks::divergence(&def, &[0.25], 0, gamma, x0, alpha, 100.0, 0.01, Some(gamma), (-3.0, 3.0)))
        .collect();
    out.push(combine("divergence_check", probes));
    out
}

fn semigroup_suite() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let p = RhoParams::default();
    let linear = catalog::LINEAR.field();
    let g = linear.bind::<f64>(&[]).expect("catalog binds");
    out.push(checks::semigroup_identity(&g, 0.5, 0.01, p));
    for (entry, x0) in [(catalog::LINEAR, 1.0), (catalog::CUBIC, 2.0)] {
        let def = entry.field();
        let g = def.bind::<f64>(&[]).expect("catalog binds");
        match checks::defect_study(&g, &[x0], 0.5, 0.5, 0.5, 0.1, 3, p) {
            Ok(s) => out.push(checks::semigroup_exactness(entry.name, &s)),
            Err(e) => out.push(CheckResult::fail("semigroup_exactness", e)),
        }
    }
    out.push(checks::state_space(&[0.3, 0.5, 0.8]));
    out
}

/// All results of the selected suite(s), in a fixed order.
pub fn run_suite(suite: Suite, alpha: f64, fault: Option<Fault>) -> Vec<CheckResult> {
    let want = |s: Suite| suite == Suite::All || suite == s;
    let mut out = Vec::new();
    if want(Suite::Ml) {
        out.extend(tag("ml", checks::ml_checks()));
    }
    if want(Suite::Scalar) {
        out.extend(tag("scalar", scalar_suite(alpha, fault)));
    }
    if want(Suite::Triangular) {
        out.extend(tag("triangular", triangular_suite(alpha)));
    }
    if want(Suite::Bifurcation) {
        out.extend(tag("bifurcation", bifurcation_suite(alpha)));
    }
    if want(Suite::Semigroup) {
        out.extend(tag("semigroup", semigroup_suite()));
    }
    out
}
