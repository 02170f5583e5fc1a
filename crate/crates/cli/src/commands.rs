use std::fs;
use std::io::Write;
use std::path::PathBuf;

use serde_json::{json, Value};

use mvhermite::exact::{format_rational, int};
use mvhermite::matpoly::Matrix;
use mvhermite::mvops::{
    connection_by_division, connection_coefficients, mvop_by_explicit_entries, mvop_by_gram_schmidt,
    mvop_by_recurrence, mvop_by_rodrigues, norm_closed_form, MVOPSequence,
};
use mvhermite::suites::{all_passed, default_families, run_suites, Suite, SuiteConfig};
use mvhermite::toda::{
    residuals_of, rk4_order_estimate, spectrum_check, toda_closed_form, toda_compare, trajectory_csv_header,
    trajectory_csv_row,
};

use crate::config::{pick, CliError, CliResult, FileConfig, Format, Mode, Route};
use crate::{ConnectionArgs, GenArgs, NormsArgs, TodaArgs, VerifyArgs};

fn write_output(out: &Option<PathBuf>, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn pretty(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s.into_bytes()
}

fn sequence_for_route(family: &mvhermite::weight::WeightFamily, nmax: usize, route: Route) -> CliResult<MVOPSequence> {
    let rec = mvop_by_recurrence(family, nmax)?;
    let with_polys = |polys| MVOPSequence { polys, ..rec.clone() };
    match route {
        Route::Recurrence => Ok(rec),
        Route::Gs => Ok(mvop_by_gram_schmidt(family, nmax)?),
        Route::Explicit => Ok(with_polys(
            (0..=nmax).map(|n| mvop_by_explicit_entries(family, n)).collect::<Result<_, _>>()?,
        )),
        Route::Rodrigues => Ok(with_polys(
            (0..=nmax).map(|n| mvop_by_rodrigues(family, n)).collect::<Result<_, _>>()?,
        )),
        Route::All => {
            for other in [Route::Gs, Route::Explicit, Route::Rodrigues] {
                if sequence_for_route(family, nmax, other)? != rec {
                    return Err(CliError::Failed(format!("route {other:?} disagrees with the recurrence")));
                }
            }
            Ok(rec)
        }
    }
}

fn float_matrix(m: &Matrix<mvhermite::exact::Rational>) -> Value {
    m.to_f64().to_json()
}

fn sequence_json(seq: &MVOPSequence, route: Route, mode: Mode) -> Value {
    let mut v = seq.to_json();
    v["route"] = format!("{route:?}").to_lowercase().into();
    if mode == Mode::Float {
        v["mode"] = "float".into();
        v["polys"] = seq.polys.iter().map(|p| p.to_f64().to_json()).collect();
        v["norms"] = seq
            .norms
            .iter()
            .map(|h| h.diag().iter().map(|c| mvhermite::exact::to_f64(c) * std::f64::consts::PI.sqrt()).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .into();
        v["B"] = seq.b.iter().map(float_matrix).collect();
        v["C"] = seq.c.iter().map(float_matrix).collect();
    } else {
        v["mode"] = "exact".into();
    }
    v
}

fn sequence_csv(seq: &MVOPSequence, mode: Mode) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fmt = |r: &mvhermite::exact::Rational| match mode {
        Mode::Exact => format_rational(r),
        Mode::Float => format!("{:e}", mvhermite::exact::to_f64(r)),
    };
    let csv_err = |e: csv::Error| CliError::Failed(e.to_string());
    w.write_record(["object", "n", "power", "row", "col", "value"]).map_err(csv_err)?;
    let mut put = |obj: &str, n: usize, power: usize, m: &Matrix<mvhermite::exact::Rational>| -> CliResult<()> {
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                w.write_record([
                    obj.to_string(),
                    n.to_string(),
                    power.to_string(),
                    (i + 1).to_string(),
                    (j + 1).to_string(),
                    fmt(m.get(i, j)),
                ])
                .map_err(csv_err)?;
            }
        }
        Ok(())
    };
    for (n, p) in seq.polys.iter().enumerate() {
        for (k, c) in p.coeffs().iter().enumerate() {
            put("P", n, k, c)?;
        }
    }
    // H is stored as the coefficient of √π.
    for (n, h) in seq.norms.iter().enumerate() {
        put("H/sqrt(pi)", n, 0, h)?;
    }
    for (n, b) in seq.b.iter().enumerate() {
        put("B", n, 0, b)?;
    }
    for (n, c) in seq.c.iter().enumerate() {
        put("C", n, 0, c)?;
    }
    w.into_inner().map_err(|e| CliError::Failed(e.to_string()))
}

pub fn gen(args: &GenArgs, file: &FileConfig) -> CliResult<()> {
    let family = args.family.resolve(file)?;
    let nmax = args.nmax.or(file.nmax).unwrap_or(3);
    let route = pick("route", args.route, &file.route, Route::All)?;
    let mode = pick("mode", args.mode, &file.mode, Mode::Exact)?;
    let format = pick("format", args.format, &file.format, Format::Json)?;
    let seq = sequence_for_route(&family, nmax, route)?;
    let bytes = match format {
        Format::Json => pretty(&sequence_json(&seq, route, mode)),
        Format::Csv => sequence_csv(&seq, mode)?,
    };
    write_output(&args.out, &bytes)
}

pub fn verify(args: &VerifyArgs, file: &FileConfig) -> CliResult<()> {
    let families = if args.family.any(file) {
        vec![args.family.resolve(file)?]
    } else {
        let nu = match args.family.nu.as_ref().or(file.nu.as_ref()) {
            Some(v) => mvhermite::exact::parse_rational(v)?,
            None => int(1),
        };
        default_families(3, &nu)?
    };
    let names: Vec<String> = if !args.suites.is_empty() {
        args.suites.clone()
    } else {
        file.suites.clone().unwrap_or_default()
    };
    let suites: Vec<Suite> = if names.is_empty() {
        Suite::ALL.to_vec()
    } else {
        names.iter().map(|s| s.parse()).collect::<Result<_, _>>()?
    };
    let mut cfg = SuiteConfig::new(families);
    cfg.nmax = args.nmax.or(file.nmax).unwrap_or(cfg.nmax);
    cfg.mmax = args.mmax.or(file.mmax).unwrap_or(cfg.mmax);
    cfg.degree_cap = args.degree_cap.or(file.degree_cap).unwrap_or(cfg.degree_cap);
    cfg.quad_tolerance = args.quad_tolerance.or(file.quad_tolerance).unwrap_or(cfg.quad_tolerance);
    cfg.corrupt_weight = args.corrupt_weight;

    let lines = run_suites(&suites, &cfg)?;
    let mut stdout = std::io::stdout().lock();
    for l in &lines {
        writeln!(stdout, "{l}")?;
    }
    let ok = all_passed(&lines);
    let failed = lines.iter().filter(|l| !l.passed && !l.suite.report_only()).count();
    writeln!(stdout, "{} checks, {} failed", lines.len(), failed)?;
    if let Some(path) = &args.json {
        let report = json!({
            "passed": ok,
            "checks": lines.iter().map(|l| l.to_json()).collect::<Vec<_>>(),
        });
        fs::write(path, pretty(&report))?;
    }
    if ok {
        Ok(())
    } else {
        Err(CliError::Failed(format!("{failed} identity checks failed")))
    }
}

pub fn toda(args: &TodaArgs, file: &FileConfig) -> CliResult<()> {
    let family = args.family.resolve(file)?;
    let nmax = args.nmax.or(file.nmax).unwrap_or(4);
    let t_end = args.tend.or(file.tend).unwrap_or(1.0);
    let h = args.h.or(file.h).unwrap_or(1e-3);
    let tol = args.tolerance.or(file.tolerance).unwrap_or(1e-6);
    if !(h > 0.0) || !(t_end >= 0.0) {
        return Err(CliError::Invalid("need h > 0 and tend ≥ 0".into()));
    }
    let cf = toda_closed_form(&family, nmax)?;
    let compare = args.compare || !args.exact;
    let mut stdout = std::io::stdout().lock();
    let mut failures = Vec::new();

    if args.exact {
        let residuals = residuals_of(&cf);
        let zero = residuals.iter().all(|r| r.passed());
        let spectrum = (1..=nmax).all(|n| spectrum_check(&cf, n));
        writeln!(
            stdout,
            "exact lattice residuals for n ≤ {nmax}: {}",
            if zero { "identically zero" } else { "NONZERO" }
        )?;
        writeln!(stdout, "spectrum of Cₙ(t) constant in t: {}", if spectrum { "yes" } else { "NO" })?;
        if !zero || !spectrum {
            failures.push("exact residuals".to_string());
        }
    }

    if compare {
        let run = toda_compare(&cf, t_end, h)?;
        if let Some(path) = &args.out {
            let dim = family.n;
            let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Failed(e.to_string()))?;
            w.write_record(trajectory_csv_header(dim, nmax)).map_err(|e| CliError::Failed(e.to_string()))?;
            for s in &run.trajectory {
                w.write_record(trajectory_csv_row(s).iter().map(|v| format!("{v:e}")))
                    .map_err(|e| CliError::Failed(e.to_string()))?;
            }
            w.flush()?;
        }
        let last = run.trajectory.last().expect("trajectory is never empty");
        let end_error = last.max_deviation(&cf.state_at(last.t));
        writeln!(stdout, "steps: {}", run.trajectory.len() - 1)?;
        writeln!(stdout, "max deviation vs closed form: {:.3e}", run.max_deviation)?;
        writeln!(stdout, "end-point error at h={h:e}: {end_error:.3e}")?;
        match rk4_order_estimate(&cf, t_end.max(1e-12), args.order_h) {
            Ok(order) => writeln!(
                stdout,
                "observed order (h={:e} vs {:e}): {order:.3}",
                args.order_h,
                args.order_h / 2.0
            )?,
            Err(e) => writeln!(stdout, "observed order unavailable: {e}")?,
        }
        if run.max_deviation > tol {
            failures.push(format!("deviation {:.3e} exceeds {tol:e}", run.max_deviation));
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(failures.join("; ")))
    }
}

pub fn norms(args: &NormsArgs, file: &FileConfig) -> CliResult<()> {
    let family = args.family.resolve(file)?;
    let nmax = args.nmax.or(file.nmax).unwrap_or(3);
    let gs = mvop_by_gram_schmidt(&family, nmax)?;
    let mut agree = true;
    let rows: Vec<Value> = (0..=nmax)
        .map(|n| {
            let closed = norm_closed_form(&family, n);
            agree &= closed == gs.norms[n];
            json!({
                "n": n,
                "closedForm": gs.norm_diagonal(n).iter().map(|p| p.to_json()).collect::<Vec<_>>(),
                "agreesWithGramSchmidt": closed == gs.norms[n],
            })
        })
        .collect();
    write_output(&args.out, &pretty(&json!({ "family": family.to_json(), "norms": rows })))?;
    if agree {
        Ok(())
    } else {
        Err(CliError::Failed("closed-form norms disagree with Gram–Schmidt".into()))
    }
}

pub fn connection(args: &ConnectionArgs, file: &FileConfig) -> CliResult<()> {
    let family = args.family.resolve(file)?;
    let to = mvhermite::exact::parse_rational(&args.to)
        .map_err(|_| CliError::Invalid(format!("--to must be \"p/q\", got {:?}", args.to)))?;
    let closed = connection_coefficients(&family, &family.nu, &to, args.degree)?;
    let oracle = connection_by_division(&family, &family.nu, &to, args.degree)?;
    let v = json!({
        "family": family.to_json(),
        "to": format_rational(&to),
        "n": args.degree,
        "coefficients": closed.iter().map(Matrix::to_json).collect::<Vec<_>>(),
        "matchesDivision": closed == oracle,
    });
    write_output(&args.out, &pretty(&v))?;
    if closed == oracle {
        Ok(())
    } else {
        Err(CliError::Failed("closed-form connection coefficients disagree with division".into()))
    }
}
