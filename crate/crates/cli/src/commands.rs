use std::fs::File;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use fracdyn::bifurcation::{sweep, Label};
use fracdyn::caputo_solver::{solve_pece, CaputoProblem, Trajectory};
use fracdyn::field_expr::catalog::{self, Entry};
use fracdyn::function_space::RhoParams;
use fracdyn::mittag_leffler::{ml_eval, MlError, MlQuery};
use fracdyn::scalar_analysis::{find_zeros_tolerant, ZeroSet};
use fracdyn::triangular::TriangularField;
use serde_json::json;

use crate::args::*;
use crate::checks::{self, HeteroclinicSettings, SAMPLES};
use crate::field::{self, ResolvedField};
use crate::format;
use crate::report::{CheckResult, Report};
use crate::verify;
use crate::{failed, usage, CliError, EXIT_OK};

pub fn dispatch(cmd: Command, stdin: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Command::Ml(a) => ml(a, stdin, out),
        Command::Simulate(a) => simulate(a, out, err),
        Command::Attractor(a) => attractor(a, out, err),
        Command::Limits(a) => limits(a, out, err),
        Command::Heteroclinic(a) => heteroclinic(a, out, err),
        Command::VerifyScalar(a) => verify_scalar(a, out, err),
        Command::Triangular(a) => triangular(a, out, err),
        Command::Bifurcate(a) => bifurcate(a, out, err),
        Command::Semigroup(a) => semigroup(a, out, err),
        Command::Verify(a) => verify(a, out, err),
    }
}

fn ml_error(e: MlError) -> CliError {
    match e {
        MlError::InvalidParameter { .. } => usage(e),
        _ => failed(e),
    }
}

fn ml_value(alpha: f64, beta: f64, z: f64) -> Result<f64, CliError> {
    let q = MlQuery::new(alpha, beta, z).map_err(ml_error)?;
    ml_eval(&q).map_err(ml_error)
}

fn ml(a: MlArgs, stdin: &mut dyn BufRead, out: &mut dyn Write) -> Result<i32, CliError> {
    if let Some(z) = a.z {
        let alpha = a.alpha.ok_or_else(|| usage("--alpha is required with --z"))?;
        writeln!(out, "{}", format::num(ml_value(alpha, a.beta, z)?))?;
        return Ok(EXIT_OK);
    }
    if a.alpha.is_some() {
        return Err(usage("--z is required with --alpha; omit both to read 'A B Z' lines from standard input"));
    }
    format::header(out, &["alpha", "beta", "z", "value"].map(String::from))?;
    for (k, line) in stdin.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<f64> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| usage(format!("line {}: expected 'A B Z', got '{line}'", k + 1)))?;
        let [alpha, beta, z] = fields[..] else {
            return Err(usage(format!("line {}: expected 'A B Z', got '{line}'", k + 1)));
        };
        let v = ml_value(alpha, beta, z).map_err(|e| match e {
            CliError::Usage(m) => usage(format!("line {}: {m}", k + 1)),
            CliError::Failed(m) => failed(format!("line {}: {m}", k + 1)),
        })?;
        format::row(out, [alpha, beta, z, v])?;
    }
    Ok(EXIT_OK)
}

/// Runs `body` on the file at `path`, or on `out` when there is none.
fn with_output(
    path: Option<&Path>,
    out: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| failed(format!("cannot create {}: {e}", p.display())))?;
            let mut w = BufWriter::new(file);
            body(&mut w)?;
            w.flush()?;
        }
        None => body(out)?,
    }
    Ok(())
}

fn write_trajectory(w: &mut dyn Write, tr: &Trajectory<f64>) -> std::io::Result<()> {
    let mut names = vec!["t".to_string()];
    names.extend(format::numbered("x", tr.dim));
    format::header(w, &names)?;
    for (t, x) in tr.iter() {
        format::row(w, std::iter::once(t).chain(x.iter().copied()))?;
    }
    Ok(())
}

fn solve(rf: &ResolvedField, alpha: f64, x0: Vec<f64>, t_end: f64, dt: f64) -> Result<Trajectory<f64>, CliError> {
    if x0.len() != rf.dim() {
        return Err(usage(format!(
            "--x0 has {} values but the field has dimension {}",
            x0.len(),
            rf.dim()
        )));
    }
    let g = rf.def.bind(&rf.params).map_err(failed)?;
    let p = CaputoProblem::new(alpha, x0, t_end, dt).map_err(usage)?;
    solve_pece(&g, &p).map_err(failed)
}

fn simulate(a: SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let rf = field::resolve(&a.field)?;
    let tr = solve(&rf, a.alpha, a.x0, a.t_end, a.dt)?;
    with_output(a.out.as_deref(), out, |w| write_trajectory(w, &tr))?;
    if let Some(e) = &tr.escape {
        writeln!(
            err,
            "warning: the solution left the bounded region at t = {} (direction {:?})",
            format::num(tr.time(e.index)),
            e.direction
        )?;
    }
    Ok(EXIT_OK)
}

/// (H1) result and the scan used for zero finding.
fn dissipativity(rf: &ResolvedField, scan: Option<(f64, f64)>, h1_scan: (f64, f64)) -> Result<(CheckResult, bool, (f64, f64)), CliError> {
    let g = rf.def.bind(&rf.params).map_err(failed)?;
    let (h1, cert) = checks::h1(&g, h1_scan);
    let scan = scan.or_else(|| cert.as_ref().map(|c| c.default_scan())).unwrap_or(h1_scan);
    Ok((h1, cert.is_some(), scan))
}

fn attractor(a: AttractorArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let rf = field::resolve(&a.field)?;
    rf.require_scalar()?;
    if a.resolution < 1000 {
        return Err(usage("--resolution must be at least 1000"));
    }
    let (h1, h1_ok, scan) = dissipativity(&rf, a.scan, a.h1_scan)?;
    let g = rf.def.bind(&rf.params).map_err(failed)?;
    let (h2, zs) = checks::h2(&g, scan, a.resolution);
    let mut report = Report::new(json!({
        "command": "attractor",
        "field": rf.describe(),
        "scan": [scan.0, scan.1],
        "resolution": a.resolution,
    }));
    report.push(h1);
    report.push(h2);
    report.push(checks::attractor(h1_ok, zs.as_ref()));
    Ok(report.emit(out, err)?)
}

/// Zero set for limit prediction; tolerant of degenerate zeros.
fn zero_set(rf: &ResolvedField, scan: Option<(f64, f64)>) -> Result<(ZeroSet<f64>, (f64, f64)), CliError> {
    let (_, _, scan) = dissipativity(rf, scan, checks::H1_SCAN)?;
    let g = rf.def.bind(&rf.params).map_err(failed)?;
    let zs = find_zeros_tolerant(&g, scan, SAMPLES).map_err(failed)?;
    Ok((zs, scan))
}

fn limits(a: LimitsArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let rf = field::resolve(&a.field)?;
    rf.require_scalar()?;
    let (zs, scan) = zero_set(&rf, a.scan)?;
    let g = rf.def.bind(&rf.params).map_err(failed)?;
    let mut report = Report::new(json!({
        "command": "limits",
        "field": rf.describe(),
        "alpha": a.alpha,
        "x0": a.x0,
        "t_end": a.t_end,
        "dt": a.dt,
        "tol": a.tol,
        "scan": [scan.0, scan.1],
        "zeros": checks::zero_set_json(&zs),
    }));
    let mut runs = Vec::new();
    for &eta in &a.x0 {
        let tr = solve(&rf, a.alpha, vec![eta], a.t_end, a.dt)?;
        report.push(checks::limit(&g, &zs, eta, &tr, a.tol));
        runs.push(tr);
    }
    if let Some(path) = &a.out {
        with_output(Some(path), out, |w| {
            let mut names = vec!["t".to_string()];
            names.extend(format::numbered("x", runs.len()));
            format::header(w, &names)?;
            let n = runs.iter().map(Trajectory::len).max().unwrap_or(0);
            for i in 0..n {
                let t = i as f64 * a.dt;
                let xs = runs.iter().map(|tr| if i < tr.len() { tr.state(i)[0] } else { f64::NAN });
                format::row(w, std::iter::once(t).chain(xs))?;
            }
            Ok(())
        })?;
    }
    Ok(report.emit(out, err)?)
}

fn heteroclinic(a: HeteroclinicArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let rf = field::resolve(&a.field)?;
    rf.require_scalar()?;
    let (zs, scan) = zero_set(&rf, a.scan)?;
    let g = rf.def.bind(&rf.params).map_err(failed)?;
    let s = HeteroclinicSettings {
        alpha: a.alpha,
        eta: a.eta,
        t_back: a.t_back,
        t_fwd: a.t_fwd,
        dt: a.dt,
        round_trip: a.round_trip,
        tol: a.tol,
    };
    let (results, orbit) = checks::heteroclinic(&g, &zs, &s);
    let mut report = Report::new(json!({
        "command": "heteroclinic",
        "field": rf.describe(),
        "alpha": a.alpha,
        "eta": a.eta,
        "t_back": a.t_back,
        "t_fwd": a.t_fwd,
        "dt": a.dt,
        "round_trip": a.round_trip,
        "tol": a.tol,
        "scan": [scan.0, scan.1],
    }));
    report.extend(results);
    if let (Some(path), Some(orbit)) = (&a.out, &orbit) {
        with_output(Some(path), out, |w| {
            format::header(w, &["t".to_string(), "x1".to_string()])?;
            for (&t, &x) in orbit.times.iter().zip(&orbit.values) {
                format::row(w, [t, x])?;
            }
            Ok(())
        })?;
    }
    Ok(report.emit(out, err)?)
}

fn verify_scalar(a: VerifyScalarArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let rf = field::resolve(&a.field)?;
    rf.require_scalar()?;
    let mut report = Report::new(json!({
        "command": "verify-scalar",
        "field": rf.describe(),
        "alpha": a.alpha,
        "fault": a.fault.map(|_| "inflate-gamma"),
    }));
    let order = [(rf.name.as_str(), &rf.def, rf.params.as_slice())];
    report.extend(verify::scalar_battery(&rf, a.alpha, a.fault, &order));
    Ok(report.emit(out, err)?)
}

fn triangular_field(a: &TriangularArgs) -> Result<(TriangularField, Vec<f64>, String), CliError> {
    if let Some(name) = &a.catalog {
        if a.h2.is_some() || a.h3.is_some() || a.h4.is_some() {
            return Err(usage("--catalog cannot be combined with --h2/--h3/--h4"));
        }
        let Some(Entry::Triangular(entry)) = catalog::lookup(name) else {
            let known: Vec<&str> = catalog::TRIANGULAR_FIELDS.iter().map(|e| e.name).collect();
            return Err(usage(format!("'{name}' is not a triangular catalog field (known: {})", known.join(", "))));
        };
        let tf = TriangularField::from_catalog(&entry).map_err(usage)?;
        if let Some((k, _)) = a.param.first() {
            return Err(usage(format!("the field has no parameter '{k}'")));
        }
        return Ok((tf, Vec::new(), name.clone()));
    }
    let fs: Vec<&String> = [&a.f1, &a.f2, &a.f3, &a.f4].into_iter().map_while(Option::as_ref).collect();
    if fs.is_empty() {
        return Err(usage("a field is required: pass --catalog NAME or --f1 EXPR [--h2 EXPR --f2 EXPR ...]"));
    }
    let hs = [&a.h2, &a.h3, &a.h4];
    if [&a.f1, &a.f2, &a.f3, &a.f4].iter().skip(fs.len()).any(|f| f.is_some()) {
        return Err(usage("factors must be given as --f1, --f2, ... without gaps"));
    }
    if hs.iter().skip(fs.len() - 1).any(|h| h.is_some()) {
        return Err(usage("an h factor was given without its f factor"));
    }
    let mut h = vec!["1".to_string()];
    h.extend(hs.iter().take(fs.len() - 1).map(|h| h.as_deref().unwrap_or("1").to_string()));
    let f: Vec<String> = fs.into_iter().cloned().collect();
    let names: Vec<String> = a.param.iter().map(|p| p.0.clone()).collect();
    let tf = TriangularField::parse(&h, &f, &names).map_err(usage)?;
    Ok((tf, a.param.iter().map(|p| p.1).collect(), "custom".into()))
}

fn triangular(a: TriangularArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let (tf, params, name) = triangular_field(&a)?;
    if a.resolution < 1000 {
        return Err(usage("--resolution must be at least 1000"));
    }
    let d = tf.dimension();
    let def = tf.field();
    let components: Vec<String> = (0..d).map(|i| def.component_text(i)).collect();
    let mut report = Report::new(json!({
        "command": "triangular",
        "field": { "name": name, "components": components },
        "scan": [a.scan.0, a.scan.1],
        "resolution": a.resolution,
        "alpha": a.alpha,
        "seeds": a.seeds,
        "rng_seed": a.rng_seed,
        "seed_box": [a.seed_box.0, a.seed_box.1],
        "t_end": a.t_end,
        "dt": a.dt,
        "tol": a.tol,
    }));
    report.extend(checks::triangular(&tf, &params, a.scan, a.resolution));
    if a.seeds > 0 {
        let (results, runs) = checks::triangular_limits(
            &tf,
            &params,
            a.scan,
            a.resolution,
            a.alpha,
            a.seeds,
            a.rng_seed,
            a.seed_box,
            a.t_end,
            a.dt,
            a.tol,
        );
        report.extend(results);
        if let Some(path) = &a.out {
            with_output(Some(path), out, |w| {
                let mut names = vec!["seed".to_string(), "t".to_string()];
                names.extend(format::numbered("x", d));
                format::header(w, &names)?;
                for (k, (_, tr)) in runs.iter().enumerate() {
                    for (t, x) in tr.iter() {
                        format::row(w, [k as f64, t].into_iter().chain(x.iter().copied()))?;
                    }
                }
                Ok(())
            })?;
        }
    }
    Ok(report.emit(out, err)?)
}

fn bifurcate(a: BifurcateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let mut source = a.field.clone();
    match a.family.as_deref() {
        Some("custom") => {
            if source.component.is_empty() {
                return Err(usage("--family custom needs --component"));
            }
        }
        Some(name) => {
            if !source.component.is_empty() {
                return Err(usage("--family cannot be combined with --component unless it is 'custom'"));
            }
            source.catalog = Some(name.to_string());
        }
        None => {}
    }
    let rf = field::resolve(&source)?;
    rf.require_scalar()?;
    let slot = rf
        .def
        .param_index(&a.parameter)
        .ok_or_else(|| usage(format!("the field has no parameter '{}' to sweep", a.parameter)))?;
    let (lo, hi, m) = a.gamma_range;
    let diag = sweep(&rf.def, &a.parameter, &rf.params, (lo, hi), m, a.scan).map_err(failed)?;
    let expected = a.expect.as_deref().map(|l| match l {
        "saddle-node" => Label::SaddleNode,
        "pitchfork" => Label::Pitchfork,
        _ => Label::None,
    });
    let mut report = Report::new(json!({
        "command": "bifurcate",
        "field": rf.describe(),
        "parameter": a.parameter,
        "range": [lo, hi],
        "points": m,
        "scan": [a.scan.0, a.scan.1],
        "alpha": a.alpha,
        "t_end": a.t_end,
        "dt": a.dt,
        "probes": a.probe.iter().map(|p| [p.0, p.1]).collect::<Vec<_>>(),
    }));
    report.push(checks::classification(&diag, expected));
    let sup_g = |gamma: f64| (rf.name == "saddle").then_some(gamma);
    for &(gamma, x0) in &a.probe {
        report.push(checks::divergence(
            &rf.def,
            &rf.params,
            slot,
            gamma,
            x0,
            a.alpha,
            a.t_end,
            a.dt,
            sup_g(gamma),
            a.scan,
        ));
    }
    if let Some(path) = &a.csv {
        with_output(Some(path), out, |w| {
            format::header(w, &["gamma", "zero", "stability"].map(String::from))?;
            for (k, zs) in diag.zero_sets.iter().enumerate() {
                for (j, &z) in zs.zeros.iter().enumerate() {
                    let label = if zs.degenerate[j] {
                        "degenerate"
                    } else if zs.is_stable(j) {
                        "stable"
                    } else {
                        "unstable"
                    };
                    writeln!(w, "{},{},{label}", format::num(diag.gammas[k]), format::num(z))?;
                }
            }
            Ok(())
        })?;
    }
    Ok(report.emit(out, err)?)
}

fn semigroup(a: SemigroupArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let rf = field::resolve(&a.field)?;
    let x0 = if a.x0.is_empty() { vec![1.0; rf.dim()] } else { a.x0.clone() };
    if x0.len() != rf.dim() {
        return Err(usage(format!("--x0 has {} values but the field has dimension {}", x0.len(), rf.dim())));
    }
    let p = RhoParams::new(a.n_max).map_err(usage)?;
    let g = rf.def.bind(&rf.params).map_err(failed)?;
    let mut report = Report::new(json!({
        "command": "semigroup",
        "field": rf.describe(),
        "alpha": a.alpha,
        "tau1": a.tau1,
        "tau2": a.tau2,
        "dt": a.dt,
        "dt_levels": a.dt_levels,
        "x0": x0,
        "n_max": a.n_max,
    }));
    report.push(checks::semigroup_identity(&g, a.alpha, a.dt, p));
    match checks::defect_study(&g, &x0, a.alpha, a.tau1, a.tau2, a.dt, a.dt_levels, p) {
        Ok(s) => {
            report.push(checks::semigroup_convergence(&rf.name, &s));
            report.push(checks::semigroup_exactness(&rf.name, &s));
        }
        Err(e) => report.push(CheckResult::fail("semigroup_convergence", e)),
    }
    report.push(checks::state_space(&[a.alpha]));
    Ok(report.emit(out, err)?)
}

fn verify(a: VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let suite = match a.suite {
        Suite::All => "all",
        Suite::Ml => "ml",
        Suite::Scalar => "scalar",
        Suite::Triangular => "triangular",
        Suite::Bifurcation => "bifurcation",
        Suite::Semigroup => "semigroup",
    };
    let mut report = Report::new(json!({
        "command": "verify",
        "suite": suite,
        "alpha": a.alpha,
        "fault": a.fault.map(|_| "inflate-gamma"),
    }));
    report.extend(verify::run_suite(a.suite, a.alpha, a.fault));
    Ok(report.emit(out, err)?)
}
