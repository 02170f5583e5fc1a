//! Named verification suites. Each suite runs a group of identity checks for a
//! list of parameter points and returns one [`CheckLine`] per check.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::burchnall::{burchnall_expand, burchnall_product_expansion, integrated_burchnall_special, iterate_raising};
use crate::check::ExactCheck;
use crate::diffops::{
    commutator_on_basis, conjugated_symmetry_check, darboux_eigenvalue, darboux_operator, darboux_relation_check,
    eigen_check, operator_d, operator_d_eigenvalue, operator_script_d, operator_script_d_eigenvalue,
    symmetry_conditions_check, SymmetryReport,
};
use crate::error::{Error, Result};
use crate::exact::{format_rational, int, rat, Rational};
use crate::matpoly::{Matrix, RatMatPoly};
use crate::mvops::{
    connection_by_division, connection_coefficients, dual_hahn_residuals, entry_factorization, mvop_by_explicit_entries,
    mvop_by_gram_schmidt, mvop_by_recurrence, mvop_by_rodrigues, printed_c_ratio, shift_down, shift_up,
    vanishing_sum_check, MVOPSequence,
};
use crate::quad::{gauss_hermite, DEFAULT_NODES};
use crate::toda::{
    residuals_of, simplified_identity_check, spectrum_check, toda_closed_form, toda_expansion_check,
    toda_timederivative_check,
};
use crate::weight::{commutant_dimension, gauged_weight, gaussian_derivative, pearson_phi, pearson_psi, WeightFamily};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    Pearson,
    Routes,
    Diffops,
    Burchnall,
    TodaExact,
    Connection,
    Commutant,
    PrintedConstantAudit,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Pearson,
        Suite::Routes,
        Suite::Diffops,
        Suite::Burchnall,
        Suite::TodaExact,
        Suite::Connection,
        Suite::Commutant,
        Suite::PrintedConstantAudit,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Pearson => "pearson",
            Suite::Routes => "routes",
            Suite::Diffops => "diffops",
            Suite::Burchnall => "burchnall",
            Suite::TodaExact => "toda-exact",
            Suite::Connection => "connection",
            Suite::Commutant => "commutant",
            Suite::PrintedConstantAudit => "printed-constant-audit",
        }
    }

    /// Report-only suites never fail a run.
    pub fn report_only(self) -> bool {
        self == Suite::PrintedConstantAudit
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::InvalidParameters(format!("unknown suite '{s}'")))
    }
}

/// Parameters shared by all suites.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub families: Vec<WeightFamily>,
    pub nmax: usize,
    pub mmax: usize,
    pub degree_cap: usize,
    /// Target ν values for the connection suite.
    pub connection_targets: Vec<Rational>,
    pub toda_times: Vec<Rational>,
    pub quad_nodes: usize,
    pub quad_tolerance: f64,
    /// Adds x·E₁₂ to the weight inside the Pearson suite; a negative control.
    pub corrupt_weight: bool,
}

impl SuiteConfig {
    pub fn new(families: Vec<WeightFamily>) -> Self {
        Self {
            families,
            nmax: 4,
            mmax: 4,
            degree_cap: crate::diffops::DEFAULT_DEGREE_CAP,
            connection_targets: vec![int(1), rat(1, 2)],
            toda_times: vec![int(1), rat(-1, 2)],
            quad_nodes: DEFAULT_NODES,
            quad_tolerance: 1e-8,
            corrupt_weight: false,
        }
    }
}

/// One verified identity.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckLine {
    pub suite: Suite,
    /// Stable identifier of the identity being checked.
    pub id: String,
    pub params: String,
    pub passed: bool,
    /// Largest absolute coefficient of the residual (exact checks) or the
    /// numeric defect.
    pub residual: f64,
    pub detail: Option<String>,
}

impl CheckLine {
    fn exact(suite: Suite, id: &str, params: String, check: &ExactCheck) -> Self {
        Self {
            suite,
            id: id.into(),
            params,
            passed: check.passed(),
            residual: check.residual.to_f64().max_abs_coeff(),
            detail: None,
        }
    }

    fn flag(suite: Suite, id: &str, params: String, passed: bool) -> Self {
        Self {
            suite,
            id: id.into(),
            params,
            passed,
            residual: if passed { 0.0 } else { 1.0 },
            detail: None,
        }
    }

    fn numeric(suite: Suite, id: &str, params: String, value: f64, tol: f64) -> Self {
        Self {
            suite,
            id: id.into(),
            params,
            passed: value <= tol,
            residual: value,
            detail: Some(format!("tolerance {tol:e}")),
        }
    }

    fn with_detail(mut self, detail: String) -> Self {
        self.detail = Some(detail);
        self
    }

    pub fn to_json(&self) -> Value {
        json!({
            "suite": self.suite.as_str(),
            "id": self.id,
            "params": self.params,
            "passed": self.passed,
            "residual": self.residual,
            "detail": self.detail,
        })
    }
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match (self.passed, self.suite.report_only()) {
            (_, true) => "REPORT",
            (true, false) => "PASS",
            (false, false) => "FAIL",
        };
        write!(f, "{status:6} [{}] {:<28} {}", self.suite, self.id, self.params)?;
        if let Some(d) = &self.detail {
            write!(f, "  ({d})")?;
        }
        Ok(())
    }
}

/// True iff every line outside report-only suites passed.
pub fn all_passed(lines: &[CheckLine]) -> bool {
    lines.iter().all(|l| l.passed || l.suite.report_only())
}

pub fn run_suites(suites: &[Suite], config: &SuiteConfig) -> Result<Vec<CheckLine>> {
    let mut out = Vec::new();
    for &s in suites {
        out.extend(run_suite(s, config)?);
    }
    Ok(out)
}

pub fn run_suite(suite: Suite, config: &SuiteConfig) -> Result<Vec<CheckLine>> {
    let per_family = |f: &WeightFamily| -> Result<Vec<CheckLine>> {
        match suite {
            Suite::Pearson => pearson_suite(f, config),
            Suite::Routes => routes_suite(f, config),
            Suite::Diffops => diffops_suite(f, config),
            Suite::Burchnall => burchnall_suite(f, config),
            Suite::TodaExact => toda_suite(f, config),
            Suite::Connection => connection_suite(f, config),
            Suite::Commutant => commutant_suite(f),
            Suite::PrintedConstantAudit => audit_suite(f, config),
        }
    };
    let groups = config
        .families
        .par_iter()
        .map(per_family)
        .collect::<Result<Vec<_>>>()?;
    Ok(groups.into_iter().flatten().collect())
}

fn label(f: &WeightFamily) -> String {
    f.to_string()
}

/// The Pearson identities against an explicit weight polynomial.
pub fn pearson_checks(family: &WeightFamily, w: &RatMatPoly) -> Result<[ExactCheck; 2]> {
    let w1 = gauged_weight(family, 1)?.poly_part.scale(&family.unit_ratio());
    Ok([
        ExactCheck::difference("pearson-phi", &w1, &(w * &pearson_phi(family))),
        ExactCheck::difference("pearson-psi", &gaussian_derivative(&w1), &(w * &pearson_psi(family))),
    ])
}

fn pearson_suite(f: &WeightFamily, config: &SuiteConfig) -> Result<Vec<CheckLine>> {
    let mut w = gauged_weight(f, 0)?.poly_part;
    if config.corrupt_weight && f.n >= 2 {
        let mut e = Matrix::zeros(f.n, f.n);
        e.set(0, 1, int(1));
        w = &w + &RatMatPoly::monomial(e, 1);
    }
    let [phi, psi] = pearson_checks(f, &w)?;
    Ok(vec![
        CheckLine::exact(Suite::Pearson, "pearson-phi", label(f), &phi),
        CheckLine::exact(Suite::Pearson, "pearson-psi", label(f), &psi),
    ])
}

/// True iff Hₙ, Cₙ are positive diagonal, Bₙ is tridiagonal with zero diagonal
/// and BₙHₙ is symmetric, for every n in the sequence.
pub fn structure_holds(seq: &MVOPSequence) -> bool {
    (0..=seq.nmax()).all(|n| {
        let h = &seq.norms[n];
        let b = &seq.b[n];
        let positive_diag = |m: &Matrix<Rational>| m.is_diagonal() && m.diag().iter().all(|v| *v > Rational::zero());
        let tridiagonal = (0..b.rows()).all(|i| (0..b.cols()).all(|j| i.abs_diff(j) == 1 || b.get(i, j).is_zero()));
        positive_diag(h) && tridiagonal && (b * h).is_symmetric() && (n == 0 || positive_diag(&seq.c[n]))
    })
}

fn routes_suite(f: &WeightFamily, config: &SuiteConfig) -> Result<Vec<CheckLine>> {
    let n = config.nmax;
    let p = label(f);
    let gs = mvop_by_gram_schmidt(f, n)?;
    let rec = mvop_by_recurrence(f, n)?;
    let mut explicit_ok = true;
    let mut rodrigues_ok = true;
    let mut factor_ok = true;
    for k in 0..=n {
        explicit_ok &= mvop_by_explicit_entries(f, k)? == rec.polys[k];
        rodrigues_ok &= mvop_by_rodrigues(f, k)? == rec.polys[k];
        factor_ok &= entry_factorization(&rec.polys[k], k).is_some();
    }
    let mut lines = vec![
        CheckLine::flag(Suite::Routes, "route-gram-schmidt", format!("{p} nmax={n}"), gs == rec),
        CheckLine::flag(Suite::Routes, "route-explicit-entries", format!("{p} nmax={n}"), explicit_ok),
        CheckLine::flag(Suite::Routes, "route-rodrigues", format!("{p} nmax={n}"), rodrigues_ok),
        CheckLine::flag(Suite::Routes, "structure", format!("{p} nmax={n}"), structure_holds(&rec)),
        CheckLine::flag(Suite::Routes, "entries-hermite-factor", format!("{p} nmax={n}"), factor_ok),
    ];
    let mut down_ok = true;
    let mut up_ok = true;
    for k in 1..=n {
        down_ok &= shift_down(f, k)?.passed();
        up_ok &= shift_up(f, k)?.passed();
    }
    lines.push(CheckLine::flag(Suite::Routes, "ladder-lowering", format!("{p} nmax={n}"), down_ok));
    lines.push(CheckLine::flag(Suite::Routes, "ladder-raising", format!("{p} nmax={n}"), up_ok));
    let mut hahn_ok = true;
    let mut vanish_ok = true;
    for k in 0..=n {
        for r in 1..=f.n {
            hahn_ok &= dual_hahn_residuals(f, k, r)?.iter().all(Zero::is_zero);
            for t in 1..r {
                vanish_ok &= vanishing_sum_check(f, k, r, t)?.is_zero();
            }
        }
    }
    lines.push(CheckLine::flag(Suite::Routes, "dual-hahn-recurrence", format!("{p} nmax={n}"), hahn_ok));
    lines.push(CheckLine::flag(Suite::Routes, "vanishing-sums", format!("{p} nmax={n}"), vanish_ok));
    Ok(lines)
}

fn symmetry_lines(id: &str, p: &str, reports: &[SymmetryReport]) -> Vec<CheckLine> {
    reports
        .iter()
        .map(|r| CheckLine {
            suite: Suite::Diffops,
            id: format!("{id}: {}", r.label),
            params: p.to_string(),
            passed: r.passed(),
            residual: r.residual_norm(),
            detail: None,
        })
        .collect()
}

fn diffops_suite(f: &WeightFamily, config: &SuiteConfig) -> Result<Vec<CheckLine>> {
    let p = label(f);
    let seq = mvop_by_recurrence(f, config.nmax)?;
    let up = mvop_by_recurrence(&f.shifted(1), config.nmax)?;
    let (d, sd, dar) = (operator_d(f), operator_script_d(f), darboux_operator(f));
    let mut ok = [true; 3];
    for n in 0..=config.nmax {
        ok[0] &= eigen_check("", &seq.polys[n], &d, &operator_d_eigenvalue(f.n, n))?.passed();
        ok[1] &= eigen_check("", &seq.polys[n], &sd, &operator_script_d_eigenvalue(f, n))?.passed();
        ok[2] &= eigen_check("", &up.polys[n], &dar, &darboux_eigenvalue(f, n))?.passed();
    }
    let params = format!("{p} nmax={}", config.nmax);
    let mut lines = vec![
        CheckLine::flag(Suite::Diffops, "eigen-D", params.clone(), ok[0]),
        CheckLine::flag(Suite::Diffops, "eigen-script-D", params.clone(), ok[1]),
        CheckLine::flag(Suite::Diffops, "eigen-darboux", params, ok[2]),
    ];
    let comm = commutator_on_basis(&d, &sd, config.degree_cap)?;
    lines.push(
        CheckLine::flag(
            Suite::Diffops,
            "commute-D-script-D",
            format!("{p} degree≤{}", config.degree_cap),
            comm.is_zero(),
        )
        .with_detail(format!("max residual coefficient {}", format_rational(&comm))),
    );
    let rel_ok = darboux_relation_check(f)?.iter().all(ExactCheck::passed);
    lines.push(CheckLine::flag(Suite::Diffops, "darboux-relation", p.clone(), rel_ok));
    lines.extend(symmetry_lines("symmetric-D", &p, &symmetry_conditions_check(f, &d)?));
    lines.extend(symmetry_lines("symmetric-script-D", &p, &symmetry_conditions_check(f, &sd)?));
    lines.extend(symmetry_lines("conjugated-D", &p, &conjugated_symmetry_check(f, &d)));
    Ok(lines)
}

/// Sample matrix polynomial of the given degree with small rational entries.
pub fn sample_polynomial(dim: usize, degree: usize, seed: i64) -> RatMatPoly {
    RatMatPoly::new(
        dim,
        (0..=degree)
            .map(|k| {
                Matrix::from_fn(dim, dim, |i, j| {
                    let v = (seed + 3 * i as i64 + 5 * j as i64 + 7 * k as i64) % 9 - 4;
                    rat(v, k as i64 + 1)
                })
            })
            .collect(),
    )
}

fn burchnall_suite(f: &WeightFamily, config: &SuiteConfig) -> Result<Vec<CheckLine>> {
    let p = label(f);
    let mut lines = Vec::new();
    let mut thm_ok = true;
    for n in 0..=config.nmax {
        for deg in 0..=config.mmax {
            let q = sample_polynomial(f.n, deg, (n + deg) as i64);
            thm_ok &= burchnall_expand(&q, f, n)? == iterate_raising(&q, f, n);
        }
    }
    lines.push(CheckLine::flag(
        Suite::Burchnall,
        "burchnall-expansion",
        format!("{p} n≤{} deg Q≤{}", config.nmax, config.mmax),
        thm_ok,
    ));
    let mut cor_ok = true;
    for n in 0..=config.nmax {
        for m in 0..=config.mmax {
            cor_ok &= burchnall_product_expansion(f, n, m)?.passed();
        }
    }
    lines.push(CheckLine::flag(
        Suite::Burchnall,
        "burchnall-product",
        format!("{p} n≤{} m≤{}", config.nmax, config.mmax),
        cor_ok,
    ));
    let rule = gauss_hermite(config.quad_nodes)?;
    let mut worst = 0.0f64;
    for n in 1..=config.nmax.min(3) {
        for pw in 0..n {
            for t in [0.5, 1.0] {
                worst = worst.max(integrated_burchnall_special(f, n, pw, t, &rule)?);
            }
        }
    }
    lines.push(CheckLine::numeric(
        Suite::Burchnall,
        "burchnall-integrated-vanishing",
        format!("{p} p<n≤3 t∈{{1/2,1}}"),
        worst,
        config.quad_tolerance,
    ));
    Ok(lines)
}

fn toda_suite(f: &WeightFamily, config: &SuiteConfig) -> Result<Vec<CheckLine>> {
    let p = label(f);
    let cf = toda_closed_form(f, config.nmax)?;
    let res = residuals_of(&cf);
    let worst = res
        .iter()
        .flat_map(|r| [&r.b_equation, &r.c_equation])
        .map(|c| c.residual.to_f64().max_abs_coeff())
        .fold(0.0, f64::max);
    let mut lines = vec![CheckLine {
        suite: Suite::TodaExact,
        id: "toda-lattice".into(),
        params: format!("{p} nmax={}", config.nmax),
        passed: res.iter().all(|r| r.passed()),
        residual: worst,
        detail: None,
    }];
    let spec_ok = (1..=config.nmax).all(|n| spectrum_check(&cf, n));
    lines.push(CheckLine::flag(Suite::TodaExact, "toda-spectrum", format!("{p} nmax={}", config.nmax), spec_ok));
    for t in &config.toda_times {
        let ts = format_rational(t);
        let mut ok = [true; 3];
        for n in 1..=config.nmax {
            ok[0] &= toda_expansion_check(f, n, t)?.passed();
            ok[1] &= toda_timederivative_check(f, n, t)?.passed();
            ok[2] &= simplified_identity_check(f, n, t)?.passed();
        }
        let params = format!("{p} nmax={} t={ts}", config.nmax);
        lines.push(CheckLine::flag(Suite::TodaExact, "toda-expansion", params.clone(), ok[0]));
        lines.push(CheckLine::flag(Suite::TodaExact, "toda-time-derivative", params.clone(), ok[1]));
        lines.push(CheckLine::flag(Suite::TodaExact, "toda-simplified", params, ok[2]));
    }
    Ok(lines)
}

/// True iff every coefficient matrix Aₖ is supported on the k-th superdiagonal.
pub fn superdiagonal_support(coeffs: &[Matrix<Rational>]) -> bool {
    coeffs.iter().enumerate().all(|(k, a)| {
        (0..a.rows()).all(|i| (0..a.cols()).all(|j| j == i + k || a.get(i, j).is_zero()))
    })
}

fn connection_suite(f: &WeightFamily, config: &SuiteConfig) -> Result<Vec<CheckLine>> {
    let p = label(f);
    let mut lines = Vec::new();
    for target in &config.connection_targets {
        let mut ok = true;
        let mut support = true;
        for n in 0..=config.nmax {
            let closed = connection_coefficients(f, &f.nu, target, n)?;
            ok &= closed == connection_by_division(f, &f.nu, target, n)?;
            support &= superdiagonal_support(&closed);
        }
        let params = format!("{p} -> nu={} nmax={}", format_rational(target), config.nmax);
        lines.push(CheckLine::flag(Suite::Connection, "connection-closed-form", params.clone(), ok));
        lines.push(CheckLine::flag(Suite::Connection, "connection-support", params, support));
    }
    Ok(lines)
}

fn commutant_suite(f: &WeightFamily) -> Result<Vec<CheckLine>> {
    let samples = (2 * f.n * f.n).max(8);
    let (plain, star) = commutant_dimension(f, samples)?;
    Ok(vec![
        CheckLine::flag(Suite::Commutant, "commutant-trivial", label(f), plain == 1)
            .with_detail(format!("dimension {plain}")),
        CheckLine::flag(Suite::Commutant, "star-commutant-trivial", label(f), star == 1)
            .with_detail(format!("dimension {star}")),
    ])
}

fn audit_suite(f: &WeightFamily, config: &SuiteConfig) -> Result<Vec<CheckLine>> {
    let mut ratios = Vec::new();
    for n in 1..=config.nmax.max(1) {
        ratios.extend(printed_c_ratio(f, n)?);
    }
    let first = ratios[0].clone();
    let constant = ratios.iter().all(|r| *r == first);
    let detail = if constant {
        format!("printed/derived = {} for every n and diagonal entry", format_rational(&first))
    } else {
        "printed/derived ratio varies".to_string()
    };
    Ok(vec![CheckLine::flag(
        Suite::PrintedConstantAudit,
        "printed-c-ratio",
        format!("{} nmax={}", label(f), config.nmax),
        constant,
    )
    .with_detail(detail)])
}

/// The default parameter grid: each family at ν = 1, λ = ρ = 1, C = 1/2 and
/// dimension N.
pub fn default_families(n: usize, nu: &Rational) -> Result<Vec<WeightFamily>> {
    Ok(vec![
        WeightFamily::pochhammer(n, nu.clone())?,
        WeightFamily::gamma(n, nu.clone(), int(1))?,
        WeightFamily::flat(n, nu.clone(), int(1), rat(1, 2))?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_roundtrip() {
        for s in Suite::ALL {
            assert_eq!(s.as_str().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn small_run_passes() {
        let mut cfg = SuiteConfig::new(default_families(2, &int(1)).unwrap());
        cfg.nmax = 2;
        cfg.mmax = 2;
        cfg.degree_cap = 3;
        let lines = run_suites(&Suite::ALL, &cfg).unwrap();
        for l in &lines {
            assert!(l.passed, "{l}");
        }
        assert!(all_passed(&lines));
    }

    #[test]
    fn corrupted_weight_fails() {
        let mut cfg = SuiteConfig::new(default_families(2, &int(1)).unwrap());
        cfg.corrupt_weight = true;
        let lines = run_suite(Suite::Pearson, &cfg).unwrap();
        assert!(!all_passed(&lines));
    }
}
