//! Individual invariant checks shared by the subcommands and `verify`.
//!
//! Every function turns library errors into failing [`CheckResult`]s, so a
//! report always lists every check that was attempted.

use fracdyn::bifurcation::{classify, divergence_check, BifurcationDiagram, Label};
use fracdyn::caputo_solver::{contraction_dt, solve_pece, CaputoProblem, Trajectory};
use fracdyn::field_expr::{numeric_derivative, BoundField, FieldDef, VectorField};
use fracdyn::function_space::{apply_t, rho, semigroup_defect, state_space_defect, RhoParams, SampledFunction};
use fracdyn::mittag_leffler::mittag_leffler;
use fracdyn::scalar_analysis::{
    attractor_interval, backward_extend, classify_limit, default_lipschitz, envelope_check, find_zeros,
    gamma_rate_constant, heteroclinic_orbit, lower_bound_check, rate_fit, search_h1, AnalysisError,
    DissipativityCertificate, HeteroclinicOrbit, Limit, ZeroSet, H2_THRESHOLD,
};
use fracdyn::triangular::{componentwise_limits, product_attractor, validate_triangular, TriangularError, TriangularField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::report::{num, nums, CheckResult, Status};

/// Interval sampled when searching for (H1) constants.
pub const H1_SCAN: (f64, f64) = (-10.0, 10.0);
pub const SAMPLES: usize = 4000;
/// Seeds closer than this to an unstable zero are not asserted on.
pub const BASIN_MARGIN: f64 = 1e-3;
/// Accepted |slope + alpha| of a rate fit.
pub const RATE_TOL: f64 = 0.1;

type G<'a> = BoundField<'a, f64>;

fn limit_json(l: &Limit<f64>) -> Value {
    match l {
        Limit::State(x) => json!(x),
        Limit::MinusInfinity => json!("-inf"),
        Limit::PlusInfinity => json!("+inf"),
    }
}

pub fn zero_set_json(zs: &ZeroSet<f64>) -> Value {
    let stable: Vec<bool> = (0..zs.len()).map(|j| zs.is_stable(j)).collect();
    json!({
        "zeros": nums(&zs.zeros),
        "derivatives": nums(&zs.derivs),
        "stable": stable,
        "degenerate": zs.degenerate,
    })
}

fn cert_json(c: &DissipativityCertificate<f64>) -> Value {
    json!({
        "a": c.a,
        "b": c.b,
        "scan": [c.scan.0, c.scan.1],
        "worst_margin": num(c.worst_margin),
        "worst_at": nums(&c.worst_at),
    })
}

/// (H1): ⟨x, g(x)⟩ ≤ a - b‖x‖² for constants found by sampling `scan`.
pub fn h1(g: &G, scan: (f64, f64)) -> (CheckResult, Option<DissipativityCertificate<f64>>) {
    match search_h1(g, scan, SAMPLES) {
        Ok(Some(c)) => (CheckResult::new("h1", Status::Pass, Some(c.worst_margin), cert_json(&c)), Some(c)),
        Ok(None) => (
            CheckResult::new(
                "h1",
                Status::Fail,
                None,
                json!({ "scan": [scan.0, scan.1], "reason": "no constants (a, b) satisfy the inequality on the scan" }),
            ),
            None,
        ),
        Err(e) => (CheckResult::fail("h1", e), None),
    }
}

/// (H2): zeros of a scalar field are hyperbolic.
pub fn h2(g: &G, scan: (f64, f64), resolution: usize) -> (CheckResult, Option<ZeroSet<f64>>) {
    match find_zeros(g, scan, resolution) {
        Ok(zs) => {
            let min_slope = zs.derivs.iter().fold(f64::INFINITY, |m, d| m.min(d.abs()));
            let mut details = zero_set_json(&zs);
            details["scan"] = json!([scan.0, scan.1]);
            if let Some(w) = zs.even_count_warning() {
                details["warning"] = json!(w);
            }
            let margin = (min_slope - H2_THRESHOLD).is_finite().then_some(min_slope - H2_THRESHOLD);
            (CheckResult::new("h2", Status::Pass, margin, details), Some(zs))
        }
        Err(AnalysisError::H2Violation { zero, derivative }) => (
            CheckResult::new(
                "h2",
                Status::Fail,
                Some(derivative.abs() - H2_THRESHOLD),
                json!({ "zero": zero, "derivative": derivative }),
            ),
            None,
        ),
        Err(e) => (CheckResult::fail("h2", e), None),
    }
}

/// The hull of the zero set; claimed as the global attractor only when
/// (H1) holds and the outermost zeros attract.
pub fn attractor(h1_ok: bool, zs: Option<&ZeroSet<f64>>) -> CheckResult {
    let Some(zs) = zs else {
        return CheckResult::fail("attractor_interval", "no zero set");
    };
    match attractor_interval(zs) {
        Ok(iv) => {
            let claim = h1_ok && zs.has_dissipative_structure();
            let details = json!({
                "lo": iv.lo,
                "hi": iv.hi,
                "attractor": claim,
                "reason": if claim { "(H1) and (H2) hold" } else { "hull of the zero set only; no attractor claim" },
            });
            CheckResult::new("attractor_interval", Status::from_bool(claim), None, details)
        }
        Err(e) => CheckResult::fail("attractor_interval", e),
    }
}

/// max |g'| on a uniform grid of [lo, hi].
pub fn sampled_lipschitz(def: &FieldDef, params: &[f64], range: (f64, f64)) -> f64 {
    (0..=400)
        .map(|i| range.0 + (range.1 - range.0) * i as f64 / 400.0)
        .filter_map(|x| numeric_derivative(def, 0, &[x], 0, params).ok())
        .fold(0.0, |m, d| m.max(d.abs()))
}

/// Strict order x(t, η1) < x(t, η2) for random pairs with η2 - η1 ≥ 1e-3.
///
/// The step is small enough for the corrector to contract on `range`.
pub fn order_preservation(
    fields: &[(&str, &FieldDef, &[f64])],
    alpha: f64,
    pairs_per_field: usize,
    range: (f64, f64),
    seed: u64,
) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t_end = 5.0;
    let mut worst = (f64::INFINITY, Value::Null);
    let mut runs = 0;
    for &(name, def, params) in fields {
        let g = match def.bind(params) {
            Ok(g) => g,
            Err(e) => return CheckResult::fail("order_preservation", e),
        };
        let lip = sampled_lipschitz(def, params, range);
        let dt = match contraction_dt(alpha, lip) {
            Ok(dt) => dt.min(0.01),
            Err(e) => return CheckResult::fail("order_preservation", e),
        };
        for _ in 0..pairs_per_field {
            let eta1 = rng.gen_range(range.0..range.1 - 1e-3);
            let frac: f64 = rng.gen_range(0.0..1.0);
            let eta2 = eta1 + 1e-3 + frac * (range.1 - 1e-3 - eta1);
            let run = |eta: f64| CaputoProblem::new(alpha, vec![eta], t_end, dt).and_then(|p| solve_pece(&g, &p));
            let (lo, hi) = match (run(eta1), run(eta2)) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(e), _) | (_, Err(e)) => return CheckResult::fail("order_preservation", e),
            };
            runs += 1;
            let n = lo.solution_len().min(hi.solution_len());
            for i in 0..n {
                let gap = hi.state(i)[0] - lo.state(i)[0];
                if gap < worst.0 {
                    worst = (gap, json!({ "field": name, "eta": [eta1, eta2], "t": lo.time(i), "dt": dt }));
                }
            }
        }
    }
    let details = json!({ "pairs": runs, "alpha": alpha, "t_end": t_end, "range": [range.0, range.1], "closest": worst.1 });
    CheckResult::new("order_preservation", Status::from_bool(worst.0 > 0.0), Some(worst.0), details)
}

fn near_unstable(zs: &ZeroSet<f64>, eta: f64) -> Option<f64> {
    zs.zeros
        .iter()
        .enumerate()
        .find(|&(j, &z)| !zs.is_stable(j) && (eta - z).abs() < BASIN_MARGIN)
        .map(|(_, &z)| z)
}

/// Endpoint of a run from η against the limit predicted by the sign pattern.
pub fn limit(g: &G, zs: &ZeroSet<f64>, eta: f64, traj: &Trajectory<f64>, tol: f64) -> CheckResult {
    if let Some(z) = near_unstable(zs, eta) {
        return CheckResult::skip("limit", format!("eta = {eta} is within {BASIN_MARGIN} of the unstable zero {z}"));
    }
    let predicted = match classify_limit(g, zs, eta) {
        Ok(l) => l,
        Err(e) => return CheckResult::fail("limit", e),
    };
    let end = traj.last()[0];
    let mut details = json!({
        "eta": eta,
        "predicted": limit_json(&predicted),
        "endpoint": num(end),
        "t_end": traj.time(traj.len() - 1),
        "escaped": traj.escaped(),
    });
    match predicted {
        Limit::State(z) => {
            let err = if traj.escaped() { f64::INFINITY } else { (end - z).abs() };
            details["error"] = num(err);
            CheckResult::new("limit", Status::from_bool(err <= tol), Some(tol - err), details)
        }
        Limit::MinusInfinity | Limit::PlusInfinity => {
            let sign = if predicted == Limit::PlusInfinity { 1.0 } else { -1.0 };
            let escaped_right = traj.escape.as_ref().is_some_and(|e| f64::from(e.direction[0]) == sign);
            let outer = if sign > 0.0 { zs.zeros.last() } else { zs.zeros.first() };
            let drifting = (end - eta) * sign > 0.0 && outer.is_none_or(|&z| (end - z) * sign > 0.0);
            CheckResult::new("limit", Status::from_bool(escaped_right || drifting), None, details)
        }
    }
}

/// Fitted exponent of |x(t) - x*| against -α.
pub fn rate(traj: &Trajectory<f64>, x_star: f64, alpha: f64) -> CheckResult {
    match rate_fit(traj, x_star) {
        Ok(fit) => {
            let dev = (fit.slope + alpha).abs();
            let details = json!({
                "eta": traj.initial()[0],
                "x_star": x_star,
                "slope": fit.slope,
                "expected": -alpha,
                "points": fit.points,
                "window": [fit.window.0, fit.window.1],
            });
            CheckResult::from_margin("rate", RATE_TOL - dev, details)
        }
        Err(e) => CheckResult::fail("rate", e),
    }
}

/// |x(t) - x*| ≤ E_α(-γ t^α)|η - x*| with γ from the mean-value construction.
pub fn envelope(g: &G, zs: &ZeroSet<f64>, traj: &Trajectory<f64>, x_star: f64, gamma_scale: f64) -> CheckResult {
    let eta = traj.initial()[0];
    let gamma = match gamma_rate_constant(g, zs, x_star, eta) {
        Ok(v) => v * gamma_scale,
        Err(e) => return CheckResult::fail("envelope_check", e),
    };
    match envelope_check(traj, x_star, gamma) {
        Ok(r) => {
            let details = json!({
                "eta": eta,
                "x_star": x_star,
                "gamma": gamma,
                "gamma_scale": gamma_scale,
                "worst_ratio": num(r.worst_ratio),
                "worst_t": traj.time(r.worst_index),
                "first_violation_t": r.first_violation.map(|i| traj.time(i)),
                "points": r.checked,
            });
            CheckResult::new("envelope_check", Status::from_bool(r.holds), Some(1.0 + 1e-3 - r.worst_ratio), details)
        }
        Err(e) => CheckResult::fail("envelope_check", e),
    }
}

/// d(x(t), 𝓝(g)) ≥ E_α(-L t^α) d(η, 𝓝(g)).
pub fn lower_bound(g: &G, zs: &ZeroSet<f64>, traj: &Trajectory<f64>) -> CheckResult {
    let eta = traj.initial()[0];
    let lip = match default_lipschitz(g, zs, eta) {
        Ok(l) => l,
        Err(e) => return CheckResult::fail("lower_bound_check", e),
    };
    match lower_bound_check(traj, zs, lip) {
        Ok(r) => {
            let details = json!({
                "eta": eta,
                "lipschitz": lip,
                "worst_ratio": num(r.worst_ratio),
                "first_violation_t": r.first_violation.map(|i| traj.time(i)),
            });
            CheckResult::new(
                "lower_bound_check",
                Status::from_bool(r.holds),
                Some(1.0 / (1.0 - 1e-3) - r.worst_ratio),
                details,
            )
        }
        Err(e) => CheckResult::fail("lower_bound_check", e),
    }
}

pub struct HeteroclinicSettings {
    pub alpha: f64,
    pub eta: f64,
    pub t_back: f64,
    pub t_fwd: f64,
    pub dt: f64,
    pub round_trip: f64,
    pub tol: f64,
}

/// Backward and forward ends of the orbit through η and the round trip
/// x(-t, x(t, η)) = η.
pub fn heteroclinic(g: &G, zs: &ZeroSet<f64>, s: &HeteroclinicSettings) -> (Vec<CheckResult>, Option<HeteroclinicOrbit<f64>>) {
    let k = zs.zeros.partition_point(|&z| z <= s.eta);
    if k == 0 || k == zs.len() || zs.position(s.eta).is_some() {
        let msg = format!("eta = {} is not strictly between two steady states", s.eta);
        return (vec![CheckResult::fail("heteroclinic", msg)], None);
    }
    let orbit = match heteroclinic_orbit(g, s.alpha, zs, k - 1, s.eta, s.t_back, s.t_fwd, s.dt) {
        Ok(o) => o,
        Err(e) => return (vec![CheckResult::fail("heteroclinic", e)], None),
    };
    let back_err = (orbit.first() - orbit.source).abs();
    let fwd_err = (orbit.last() - orbit.target).abs();
    let mut out = vec![
        CheckResult::from_margin(
            "heteroclinic_backward",
            s.tol - back_err,
            json!({ "source": orbit.source, "t": -s.t_back, "value": orbit.first(), "error": back_err }),
        ),
        CheckResult::from_margin(
            "heteroclinic_forward",
            s.tol - fwd_err,
            json!({ "target": orbit.target, "t": s.t_fwd, "value": orbit.last(), "error": fwd_err }),
        ),
        CheckResult::new(
            "heteroclinic_between",
            Status::from_bool(orbit.stays_between()),
            None,
            json!({ "points": orbit.values.len() }),
        ),
    ];
    out.push(round_trip(g, zs, s));
    (out, Some(orbit))
}

fn round_trip(g: &G, zs: &ZeroSet<f64>, s: &HeteroclinicSettings) -> CheckResult {
    const TOL: f64 = 1e-6;
    let forward = CaputoProblem::new(s.alpha, vec![s.eta], s.round_trip, s.dt).and_then(|p| solve_pece(g, &p));
    let x_t = match forward {
        Ok(tr) if !tr.escaped() => tr.last()[0],
        Ok(_) => return CheckResult::fail("round_trip", "the forward run escaped"),
        Err(e) => return CheckResult::fail("round_trip", e),
    };
    match backward_extend(g, zs, s.alpha, x_t, s.round_trip, s.dt, 1e-12) {
        Ok(b) => {
            let err = (b.zeta - s.eta).abs();
            let details = json!({ "t": s.round_trip, "forward": x_t, "back": b.zeta, "error": err, "solves": b.solves });
            CheckResult::from_margin("round_trip", TOL - err, details)
        }
        Err(e) => CheckResult::fail("round_trip", e),
    }
}

/// Validation and box of a triangular field, as report entries.
pub fn triangular(tf: &TriangularField, params: &[f64], scan: (f64, f64), resolution: usize) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let report = match validate_triangular(tf, params, scan, resolution) {
        Ok(r) => r,
        Err(TriangularError::VanishingH {
            component,
            witness,
            value,
        }) => {
            out.push(CheckResult::new(
                "h_sign",
                Status::Fail,
                Some(value.abs() - fracdyn::triangular::H_FLOOR),
                json!({ "component": component, "witness": witness, "value": value }),
            ));
            return out;
        }
        Err(e) => {
            out.push(CheckResult::fail("triangular_validation", e));
            return out;
        }
    };
    for (i, r) in report.h.iter().enumerate().skip(1) {
        out.push(CheckResult::from_margin(
            "h_sign",
            r.min_abs - fracdyn::triangular::H_FLOOR,
            json!({ "component": i + 1, "min_abs": r.min_abs, "positive": r.positive, "witness": r.witness }),
        ));
    }
    out.push(match &report.h1 {
        Some(c) => CheckResult::new("h1", Status::Pass, Some(c.worst_margin), cert_json(c)),
        None => CheckResult::new(
            "h1",
            Status::Fail,
            None,
            json!({ "scan": [scan.0, scan.1], "reason": "no constants (a, b) satisfy the inequality on the box" }),
        ),
    });
    for (i, zs) in report.zero_sets.iter().enumerate() {
        let mut d = zero_set_json(zs);
        d["component"] = json!(i + 1);
        if let Some(w) = zs.even_count_warning() {
            d["warning"] = json!(w);
        }
        out.push(CheckResult::new("h2", Status::Pass, None, d));
    }
    match product_attractor(tf, params, scan, resolution) {
        Ok(pa) => {
            let claim = report.passed() && pa.zero_sets.iter().all(|z| z.has_dissipative_structure());
            let intervals: Vec<Value> = pa.intervals.iter().map(|iv| json!([iv.lo, iv.hi])).collect();
            out.push(CheckResult::new(
                "product_attractor",
                Status::from_bool(claim),
                None,
                json!({
                    "intervals": intervals,
                    "attractor": claim,
                    "reason": if claim { "every factor is dissipative" } else { "product of factor hulls only; no attractor claim" },
                }),
            ));
        }
        Err(e) => out.push(CheckResult::fail("product_attractor", e)),
    }
    out
}

/// Initial state and trajectory of one seed run.
pub type SeedRun = (Vec<f64>, Trajectory<f64>);

/// Random initial states integrated to `t_end`, compared with the
/// componentwise prediction. Returns the checks and the trajectories.
#[allow(clippy::too_many_arguments)]
pub fn triangular_limits(
    tf: &TriangularField,
    params: &[f64],
    scan: (f64, f64),
    resolution: usize,
    alpha: f64,
    seeds: usize,
    rng_seed: u64,
    seed_box: (f64, f64),
    t_end: f64,
    dt: f64,
    tol: f64,
) -> (Vec<CheckResult>, Vec<SeedRun>) {
    let pa = match product_attractor(tf, params, scan, resolution) {
        Ok(pa) => pa,
        Err(e) => return (vec![CheckResult::fail("componentwise_limit", e)], Vec::new()),
    };
    let g = match tf.field().bind(params) {
        Ok(g) => g,
        Err(e) => return (vec![CheckResult::fail("componentwise_limit", e)], Vec::new()),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut checks = Vec::new();
    let mut runs = Vec::new();
    for _ in 0..seeds {
        let x0: Vec<f64> = (0..tf.dimension()).map(|_| rng.gen_range(seed_box.0..seed_box.1)).collect();
        let predicted = match componentwise_limits(tf, params, &pa, &x0) {
            Ok(p) => p,
            Err(e) => {
                checks.push(CheckResult::fail("componentwise_limit", e));
                continue;
            }
        };
        let tr = match CaputoProblem::new(alpha, x0.clone(), t_end, dt).and_then(|p| solve_pece(&g, &p)) {
            Ok(tr) => tr,
            Err(e) => {
                checks.push(CheckResult::fail("componentwise_limit", e));
                continue;
            }
        };
        let boundary = x0
            .iter()
            .enumerate()
            .any(|(c, &xc)| near_unstable(&pa.zero_sets[c], xc).is_some());
        let end = tr.last().to_vec();
        let mut details = json!({
            "x0": x0,
            "predicted": predicted.iter().map(limit_json).collect::<Vec<_>>(),
            "endpoint": nums(&end),
            "box_distance": num(pa.distance(&end)),
        });
        if boundary {
            details["reason"] = json!("a coordinate starts on a basin boundary");
            checks.push(CheckResult::new("componentwise_limit", Status::Skip, None, details));
        } else if let Some(states) = predicted.iter().map(Limit::state).collect::<Option<Vec<f64>>>() {
            let dist = if tr.escaped() {
                f64::INFINITY
            } else {
                states.iter().zip(&end).fold(0.0, |m: f64, (p, e)| m.max((p - e).abs()))
            };
            details["distance"] = num(dist);
            checks.push(CheckResult::new(
                "componentwise_limit",
                Status::from_bool(dist <= tol),
                Some(tol - dist),
                details,
            ));
        } else {
            let ok = tr.escaped();
            checks.push(CheckResult::new("componentwise_limit", Status::from_bool(ok), None, details));
        }
        runs.push((x0, tr));
    }
    (checks, runs)
}

/// Label (and fold exponent) of a sweep, optionally against an expected label.
pub fn classification(diag: &BifurcationDiagram<f64>, expected: Option<Label>) -> CheckResult {
    let c = classify(diag);
    let exponent_dev = c.exponent.map(|p| (p - 0.5).abs());
    let ok = match expected {
        Some(Label::None) => c.label == Label::None,
        Some(label) => c.label == label && exponent_dev.is_some_and(|d| d <= fracdyn::bifurcation::FOLD_EXPONENT_TOL),
        None => true,
    };
    let margin = match expected {
        Some(Label::None) | None => None,
        Some(_) => exponent_dev.map(|d| fracdyn::bifurcation::FOLD_EXPONENT_TOL - d),
    };
    let counts = diag.counts();
    let mut distinct = counts.clone();
    distinct.dedup();
    let details = json!({
        "parameter": diag.parameter,
        "label": c.label.as_str(),
        "expected": expected.map(|l| l.as_str()),
        "gamma_star": c.gamma_star,
        "exponent": c.exponent,
        "zero_counts": distinct,
        "reason": c.reason,
    });
    CheckResult::new("classification", Status::from_bool(ok), margin, details)
}

/// Escape to -∞ from x0 compared with the sign-pattern prediction at this γ.
#[allow(clippy::too_many_arguments)]
pub fn divergence(
    family: &FieldDef,
    base: &[f64],
    slot: usize,
    gamma: f64,
    x0: f64,
    alpha: f64,
    t_end: f64,
    dt: f64,
    sup_g: Option<f64>,
    scan: (f64, f64),
) -> CheckResult {
    let mut params = base.to_vec();
    params[slot] = gamma;
    let g = match family.bind(&params) {
        Ok(g) => g,
        Err(e) => return CheckResult::fail("divergence_check", e),
    };
    let predicted = fracdyn::scalar_analysis::find_zeros_tolerant(&g, scan, SAMPLES)
        .and_then(|zs| classify_limit(&g, &zs, x0));
    let predicted = match predicted {
        Ok(l) => l,
        Err(e) => return CheckResult::fail("divergence_check", e),
    };
    match divergence_check(&g, alpha, x0, t_end, dt, sup_g) {
        Ok(r) => {
            let expect = predicted == Limit::MinusInfinity;
            let ok = r.diverged == expect && r.bound_holds != Some(false);
            let details = json!({
                "gamma": gamma,
                "x0": x0,
                "diverged": r.diverged,
                "predicted": limit_json(&predicted),
                "escape_time": r.escape_time,
                "bound_holds": r.bound_holds,
            });
            CheckResult::new("divergence_check", Status::from_bool(ok), None, details)
        }
        Err(e) => CheckResult::fail("divergence_check", e),
    }
}

/// ρ(T_0 f, f) for a smooth initial function.
pub fn semigroup_identity<F: VectorField<f64>>(field: &F, alpha: f64, dt: f64, p: RhoParams) -> CheckResult {
    let n = (p.n_max() as f64 / dt).round() as usize + 1;
    let f = SampledFunction::from_fn(dt, n, field.dim(), |t: f64| vec![0.5 + 0.3 * (0.3 * t).sin(); field.dim()]);
    let distance = f
        .map_err(|e| e.to_string())
        .and_then(|f| {
            let image = apply_t(0.0, &f, field, alpha, dt, p.n_max() as f64).map_err(|e| e.to_string())?;
            rho(&image.image, &f, p).map_err(|e| e.to_string())
        });
    match distance {
        Ok(d) => CheckResult::from_margin("semigroup_identity", 1e-12 - d, json!({ "rho": d })),
        Err(e) => CheckResult::fail("semigroup_identity", e),
    }
}

pub struct DefectStudy {
    pub dts: Vec<f64>,
    pub defects: Vec<f64>,
    pub ratios: Vec<f64>,
    pub extended: bool,
}

/// semigroup_defect(τ1, τ2) at dt, dt/2, ... for the constant initial function x0.
#[allow(clippy::too_many_arguments)]
pub fn defect_study<F: VectorField<f64>>(
    field: &F,
    x0: &[f64],
    alpha: f64,
    tau1: f64,
    tau2: f64,
    dt: f64,
    halvings: usize,
    p: RhoParams,
) -> Result<DefectStudy, String> {
    let mut dts = Vec::new();
    let mut defects = Vec::new();
    let mut extended = false;
    for k in 0..=halvings {
        let h = dt / 2f64.powi(k as i32);
        let extent = tau1 + tau2 + p.n_max() as f64 + h;
        let f = SampledFunction::constant(x0, h, extent).map_err(|e| e.to_string())?;
        let d = semigroup_defect(tau1, tau2, &f, field, alpha, h, p).map_err(|e| e.to_string())?;
        extended |= d.extended;
        dts.push(h);
        defects.push(d.defect);
    }
    let ratios = defects.windows(2).map(|w| w[0] / w[1]).collect();
    Ok(DefectStudy {
        dts,
        defects,
        ratios,
        extended,
    })
}

/// Defect shrinking by a factor ≥ 1.5 per halving of dt.
pub fn semigroup_convergence(name: &str, s: &DefectStudy) -> CheckResult {
    let worst = s.ratios.iter().fold(f64::INFINITY, |m, &r| m.min(r));
    let details = json!({
        "field": name,
        "dts": s.dts,
        "defects": nums(&s.defects),
        "ratios": nums(&s.ratios),
        "extended": s.extended,
    });
    let margin = worst - 1.5;
    CheckResult::new(
        "semigroup_convergence",
        Status::from_bool(margin >= 0.0),
        margin.is_finite().then_some(margin),
        details,
    )
}

/// Every level composes to round-off.
pub fn semigroup_exactness(name: &str, s: &DefectStudy) -> CheckResult {
    const TOL: f64 = 1e-12;
    let worst = s.defects.iter().fold(0.0, |m: f64, &d| m.max(d));
    let details = json!({ "field": name, "dts": s.dts, "defects": nums(&s.defects), "tolerance": TOL });
    CheckResult::from_margin("semigroup_exactness", TOL - worst, details)
}

/// |E_α(-(t+s)^α) - E_α(-t^α) E_α(-s^α)| > 0.01 at t = s = λ = 1.
pub fn state_space(alphas: &[f64]) -> CheckResult {
    let mut values = Vec::new();
    for &a in alphas {
        match state_space_defect(a, 1.0, 1.0, 1.0) {
            Ok(v) => values.push(v),
            Err(e) => return CheckResult::fail("state_space_defect", e),
        }
    }
    let worst = values.iter().fold(f64::INFINITY, |m: f64, &v| m.min(v));
    CheckResult::from_margin(
        "state_space_defect",
        worst - 0.01,
        json!({ "alphas": alphas, "defects": nums(&values), "threshold": 0.01 }),
    )
}

/// Largest error relative to max(1, |reference|).
fn ml_identity(check: &str, tol: f64, cases: impl Iterator<Item = (f64, f64, f64, f64)>) -> CheckResult {
    let mut worst = (0.0, 0.0);
    let mut n = 0;
    for (alpha, beta, z, reference) in cases {
        n += 1;
        let err = match mittag_leffler(alpha, beta, z) {
            Ok(v) => (v - reference).abs() / reference.abs().max(1.0),
            Err(e) => return CheckResult::fail(check, e),
        };
        if err > worst.0 || err.is_nan() {
            worst = (err, z);
        }
    }
    CheckResult::from_margin(
        check,
        tol - worst.0,
        json!({ "points": n, "max_error": worst.0, "at_z": worst.1, "tolerance": tol }),
    )
}

/// e·erfc(1).
const E_ERFC_1: f64 = 0.427_583_576_155_807_04;

pub fn ml_checks() -> Vec<CheckResult> {
    let grid = |lo: f64, hi: f64| (0..41).map(move |i| lo + (hi - lo) * i as f64 / 40.0);
    vec![
        ml_identity("ml_exp", 1e-10, grid(-10.0, 10.0).map(|z| (1.0, 1.0, z, z.exp()))),
        ml_identity("ml_cosh", 1e-10, grid(0.0, 10.0).map(|z| (2.0, 1.0, z, z.sqrt().cosh()))),
        ml_identity("ml_erfc", 1e-8, std::iter::once((0.5, 1.0, -1.0, E_ERFC_1))),
        ml_identity(
            "ml_e12",
            1e-10,
            grid(-10.0, 10.0).filter(|z| *z != 0.0).map(|z| (1.0, 2.0, z, z.exp_m1() / z)),
        ),
    ]
}
