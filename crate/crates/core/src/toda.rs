//! Deformation of the weight by e^{−xt}: closed-form recurrence data as
//! polynomials in t, exact residuals of the non-abelian Toda equations and a
//! fixed-step RK4 integrator for numeric cross-checks.

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::burchnall::RaisingChain;
use crate::check::ExactCheck;
use crate::error::{Error, Result};
use crate::exact::{binomial, int, rat, Rational};
use crate::hermite::ScalarPolynomial;
use crate::matpoly::{nilpotent_exp, nilpotent_exp_at, Matrix, RatMatPoly};
use crate::mvops::{g_matrix, mvop_by_recurrence, MVOPSequence};
use crate::weight::{matrix_a, WeightFamily};

/// Bₙ(t), Cₙ(t) for n = 0..=nmax+1 as matrix polynomials in t. The extra
/// index closes the truncated lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct TodaClosedForm {
    pub family: WeightFamily,
    pub nmax: usize,
    pub b: Vec<RatMatPoly>,
    pub c: Vec<RatMatPoly>,
    pub statics: MVOPSequence,
}

impl TodaClosedForm {
    pub fn b_at(&self, n: usize, t: &Rational) -> Matrix<Rational> {
        self.b[n].evaluate(t)
    }

    pub fn c_at(&self, n: usize, t: &Rational) -> Matrix<Rational> {
        self.c[n].evaluate(t)
    }

    pub fn state_at(&self, t: f64) -> TodaNumericState {
        TodaNumericState {
            t,
            b: (0..=self.nmax).map(|n| self.b[n].to_f64().evaluate(&t)).collect(),
            c: (0..=self.nmax).map(|n| self.c[n].to_f64().evaluate(&t)).collect(),
        }
    }

    /// Ẋₙ(t) = −Σ_{k<n} Ḃₖ(t), Xₙ the subleading coefficient of Pₙ(x;t).
    pub fn x_dot(&self, n: usize) -> RatMatPoly {
        let dim = self.family.n;
        (0..n).fold(RatMatPoly::zero(dim), |acc, k| &acc - &self.b[k].derivative())
    }
}

/// Bₙ(t) = e^{−tA/2}Bₙe^{tA/2} − t/2, Cₙ(t) = e^{−tA/2}Cₙe^{tA/2}.
pub fn toda_closed_form(family: &WeightFamily, nmax: usize) -> Result<TodaClosedForm> {
    let dim = family.n;
    let statics = mvop_by_recurrence(family, nmax + 1)?;
    let a = matrix_a(dim);
    let left = nilpotent_exp(&a.scale(&rat(-1, 2)))?;
    let right = nilpotent_exp(&a.scale(&rat(1, 2)))?;
    let conj = |m: &Matrix<Rational>| &(&left * &RatMatPoly::constant(m.clone())) * &right;
    let half_t = RatMatPoly::monomial(Matrix::identity(dim).scale(&rat(1, 2)), 1);
    let b = statics.b.par_iter().map(|m| &conj(m) - &half_t).collect();
    let c = statics.c.par_iter().map(conj).collect();
    Ok(TodaClosedForm {
        family: family.clone(),
        nmax,
        b,
        c,
        statics,
    })
}

/// Residual pair for one lattice site.
#[derive(Clone, Debug, PartialEq)]
pub struct TodaResidual {
    pub n: usize,
    pub c_equation: ExactCheck,
    pub b_equation: ExactCheck,
}

impl TodaResidual {
    pub fn passed(&self) -> bool {
        self.c_equation.passed() && self.b_equation.passed()
    }
}

/// Ċₙ − (CₙBₙ₋₁ − BₙCₙ) and Ḃₙ − (Cₙ − Cₙ₊₁) for n = 0..=nmax, as
/// polynomials in t.
pub fn toda_residual(family: &WeightFamily, nmax: usize) -> Result<Vec<TodaResidual>> {
    let cf = toda_closed_form(family, nmax)?;
    Ok(residuals_of(&cf))
}

pub fn residuals_of(cf: &TodaClosedForm) -> Vec<TodaResidual> {
    let dim = cf.family.n;
    (0..=cf.nmax)
        .into_par_iter()
        .map(|n| {
            let c_rhs = if n == 0 {
                RatMatPoly::zero(dim)
            } else {
                &(&cf.c[n] * &cf.b[n - 1]) - &(&cf.b[n] * &cf.c[n])
            };
            TodaResidual {
                n,
                c_equation: ExactCheck::difference(format!("toda C n={n}"), &cf.c[n].derivative(), &c_rhs),
                b_equation: ExactCheck::difference(
                    format!("toda B n={n}"),
                    &cf.b[n].derivative(),
                    &(&cf.c[n] - &cf.c[n + 1]),
                ),
            }
        })
        .collect()
}

/// Characteristic polynomial det(λ − M) of a matrix with entries in Q[t],
/// by Faddeev–LeVerrier. Returns coefficients of λ⁰..λᴺ.
pub fn characteristic_polynomial(m: &RatMatPoly) -> Vec<ScalarPolynomial> {
    let dim = m.dim();
    let mut coeffs = vec![ScalarPolynomial::zero(); dim + 1];
    coeffs[dim] = ScalarPolynomial::constant(int(1));
    let mut mk = RatMatPoly::zero(dim);
    for k in 1..=dim {
        mk = &(m * &mk) + &RatMatPoly::identity(dim).mul_scalar_poly(coeffs[dim - k + 1].coeffs());
        let am = m * &mk;
        let trace = (0..dim).fold(ScalarPolynomial::zero(), |acc, i| acc.add(&am.scalar_entry(i, i)));
        coeffs[dim - k] = trace.scale(&rat(-1, k as i64));
    }
    coeffs
}

/// det(λ − Cₙ(t)) − det(λ − Cₙ) must vanish coefficientwise in t.
pub fn spectrum_check(cf: &TodaClosedForm, n: usize) -> bool {
    let moving = characteristic_polynomial(&cf.c[n]);
    let fixed = characteristic_polynomial(&RatMatPoly::constant(cf.statics.c[n].clone()));
    moving == fixed
}

/// Pₙ(x;t) = e^{−tA/2}Pₙ(x + t/2)e^{tA/2} at a rational t.
pub fn toda_deformed_polys(family: &WeightFamily, n: usize, t: &Rational) -> Result<RatMatPoly> {
    let seq = mvop_by_recurrence(family, n)?;
    deform(family, &seq.polys[n], t)
}

fn deform(family: &WeightFamily, p: &RatMatPoly, t: &Rational) -> Result<RatMatPoly> {
    let a = matrix_a(family.n);
    let half = t / int(2);
    let left = nilpotent_exp_at(&a, &-&half)?;
    let right = nilpotent_exp_at(&a, &half)?;
    Ok(p.shift(&half).left_mul(&left).right_mul(&right))
}

/// Mₙ(t) = Σₖ C(n,k) tᵏ (∏_{p<k} d^{(ν+p)}) (G_{n−k}^{(ν+k)})⁻¹ Aᵏ, lower triangular.
pub fn m_matrix(family: &WeightFamily, n: usize, t: &Rational) -> Result<Matrix<Rational>> {
    let a = matrix_a(family.n);
    let mut acc = Matrix::zeros(family.n, family.n);
    let mut dprod = Rational::one();
    let mut tk = Rational::one();
    for k in 0..=n {
        let ginv = g_matrix(&family.shifted(k), n - k).inverse()?;
        let term = (&ginv * &a.pow(k)).scale(&(binomial(n, k) * &tk * &dprod));
        acc = &acc + &term;
        dprod *= family.shifted(k).d();
        tk *= t;
    }
    Ok(acc)
}

/// e^{−tA/2}Pₙ(x+t/2)e^{tA/2} against Mₙ(t)⁻¹Σₖ C(n,k)(−t)ᵏ(G_{n−k}^{(ν+k)})⁻¹P_{n−k}^{(ν+k)}(Φ̂^{(ν)}⋯Φ̂^{(ν+k−1)})ᵀ.
pub fn toda_expansion_check(family: &WeightFamily, n: usize, t: &Rational) -> Result<ExactCheck> {
    let lhs = toda_deformed_polys(family, n, t)?;
    let chain = RaisingChain::new(family, n)?;
    let mut sum = RatMatPoly::zero(family.n);
    let mut coeff = Rational::one();
    for k in 0..=n {
        sum = &sum + &chain.terms[k].scale(&(binomial(n, k) * &coeff));
        coeff *= -t;
    }
    let m = m_matrix(family, n, t)?;
    let rhs = sum.left_mul(&m.inverse()?);
    Ok(ExactCheck::difference(format!("toda expansion n={n} t={t}"), &lhs, &rhs))
}

/// ∂ₜPₙ(x;t) against Ẋₙ(t)Pₙ₋₁(x;t), both evaluated exactly at a rational t.
pub fn toda_timederivative_check(family: &WeightFamily, n: usize, t: &Rational) -> Result<ExactCheck> {
    if n == 0 {
        return Err(Error::InvalidParameters("time derivative check needs n ≥ 1".into()));
    }
    let cf = toda_closed_form(family, n)?;
    let a = matrix_a(family.n);
    let half = t / int(2);
    let left = nilpotent_exp_at(&a, &-&half)?;
    let right = nilpotent_exp_at(&a, &half)?;
    let p = &cf.statics.polys[n];
    let pt = p.shift(&half).left_mul(&left).right_mul(&right);
    let dp = p.derivative().shift(&half).left_mul(&left).right_mul(&right);
    let lhs = (&(&dp - &pt.left_mul(&a)) + &pt.right_mul(&a)).scale(&rat(1, 2));
    let prev = cf.statics.polys[n - 1].shift(&half).left_mul(&left).right_mul(&right);
    let rhs = prev.left_mul(&cf.x_dot(n).evaluate(t));
    Ok(ExactCheck::difference(format!("toda time derivative n={n} t={t}"), &lhs, &rhs))
}

/// n·Pₙ₋₁^{(ν+1)}(x+t/2) + [Pₙ(x+t/2), A] against 2e^{tA/2}Ẋₙe^{−tA/2}Pₙ₋₁(x+t/2).
pub fn simplified_identity_check(family: &WeightFamily, n: usize, t: &Rational) -> Result<ExactCheck> {
    if n == 0 {
        return Err(Error::InvalidParameters("simplified identity needs n ≥ 1".into()));
    }
    let cf = toda_closed_form(family, n)?;
    let up = mvop_by_recurrence(&family.shifted(1), n - 1)?;
    let a = matrix_a(family.n);
    let half = t / int(2);
    let pn = cf.statics.polys[n].shift(&half);
    let lhs = &(&up.polys[n - 1].shift(&half).scale(&int(n as i64)) + &pn.right_mul(&a)) - &pn.left_mul(&a);
    let conj = &(&nilpotent_exp_at(&a, &half)? * &cf.x_dot(n).evaluate(t)) * &nilpotent_exp_at(&a, &-&half)?;
    let rhs = cf.statics.polys[n - 1].shift(&half).left_mul(&conj.scale(&int(2)));
    Ok(ExactCheck::difference(format!("toda simplified n={n} t={t}"), &lhs, &rhs))
}

/// Floating-point lattice state Bₙ, Cₙ for n = 0..=nmax at time t.
#[derive(Clone, Debug, PartialEq)]
pub struct TodaNumericState {
    pub t: f64,
    pub b: Vec<Matrix<f64>>,
    pub c: Vec<Matrix<f64>>,
}

impl TodaNumericState {
    pub fn nmax(&self) -> usize {
        self.b.len() - 1
    }

    /// Largest entry difference against another state.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        self.b
            .iter()
            .zip(&other.b)
            .chain(self.c.iter().zip(&other.c))
            .map(|(x, y)| (x - y).max_abs())
            .fold(0.0, f64::max)
    }

    fn axpy(&self, h: f64, d: &Derivative) -> Self {
        Self {
            t: self.t + h,
            b: self.b.iter().zip(&d.b).map(|(x, dx)| x + &dx.scale(&h)).collect(),
            c: self.c.iter().zip(&d.c).map(|(x, dx)| x + &dx.scale(&h)).collect(),
        }
    }
}

struct Derivative {
    b: Vec<Matrix<f64>>,
    c: Vec<Matrix<f64>>,
}

/// Overflow guard on any entry of Bₙ or Cₙ.
pub const OVERFLOW_GUARD: f64 = 1e12;

fn derivative(state: &TodaNumericState, closure: &dyn Fn(f64) -> Matrix<f64>) -> Derivative {
    let nmax = state.nmax();
    let top = closure(state.t);
    let c_next = |n: usize| if n == nmax { &top } else { &state.c[n + 1] };
    let b = (0..=nmax).map(|n| &state.c[n] - c_next(n)).collect();
    let c = (0..=nmax)
        .map(|n| {
            if n == 0 {
                Matrix::zeros(state.c[0].rows(), state.c[0].cols())
            } else {
                &(&state.c[n] * &state.b[n - 1]) - &(&state.b[n] * &state.c[n])
            }
        })
        .collect();
    Derivative { b, c }
}

fn check_state(state: &TodaNumericState) -> Result<()> {
    for m in state.b.iter().chain(&state.c) {
        if m.entries().iter().any(|v| !v.is_finite() || v.abs() > OVERFLOW_GUARD) {
            return Err(Error::StepRejected {
                t: state.t,
                reason: "entry exceeds overflow guard".into(),
            });
        }
    }
    Ok(())
}

/// Classical RK4 from `initial` to `t_end` with steps as close to `h` as
/// divides the interval. `closure(t)` supplies C_{nmax+1}(t).
pub fn toda_integrate(
    initial: &TodaNumericState,
    closure: &dyn Fn(f64) -> Matrix<f64>,
    t_end: f64,
    h: f64,
) -> Result<Vec<TodaNumericState>> {
    if !(h > 0.0) || !(t_end >= initial.t) {
        return Err(Error::InvalidParameters("step must be positive and t_end ≥ t₀".into()));
    }
    let steps = ((t_end - initial.t) / h).round().max(1.0) as usize;
    let h = (t_end - initial.t) / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(initial.clone());
    let mut y = initial.clone();
    for i in 0..steps {
        let k1 = derivative(&y, closure);
        let k2 = derivative(&y.axpy(h / 2.0, &k1), closure);
        let k3 = derivative(&y.axpy(h / 2.0, &k2), closure);
        let k4 = derivative(&y.axpy(h, &k3), closure);
        let mut next = y.clone();
        for n in 0..=y.nmax() {
            let comb = |a: &Matrix<f64>, b: &Matrix<f64>, c: &Matrix<f64>, d: &Matrix<f64>| {
                &(&(a + &b.scale(&2.0)) + &c.scale(&2.0)) + d
            };
            next.b[n] = &y.b[n] + &comb(&k1.b[n], &k2.b[n], &k3.b[n], &k4.b[n]).scale(&(h / 6.0));
            next.c[n] = &y.c[n] + &comb(&k1.c[n], &k2.c[n], &k3.c[n], &k4.c[n]).scale(&(h / 6.0));
        }
        next.t = initial.t + (i + 1) as f64 * h;
        check_state(&next)?;
        out.push(next.clone());
        y = next;
    }
    Ok(out)
}

/// Summary of an integration compared with the closed form.
#[derive(Clone, Debug, PartialEq)]
pub struct TodaComparison {
    pub trajectory: Vec<TodaNumericState>,
    pub max_deviation: f64,
}

/// Integrates from the closed form at t = 0 and records the largest entry
/// deviation from the closed form along the whole trajectory.
pub fn toda_compare(cf: &TodaClosedForm, t_end: f64, h: f64) -> Result<TodaComparison> {
    let top = cf.c[cf.nmax + 1].to_f64();
    let closure = move |t: f64| top.evaluate(&t);
    let trajectory = toda_integrate(&cf.state_at(0.0), &closure, t_end, h)?;
    let max_deviation = trajectory
        .iter()
        .map(|s| s.max_deviation(&cf.state_at(s.t)))
        .fold(0.0, f64::max);
    Ok(TodaComparison {
        trajectory,
        max_deviation,
    })
}

/// log₂ of the ratio of end-point errors at steps h and h/2.
pub fn rk4_order_estimate(cf: &TodaClosedForm, t_end: f64, h: f64) -> Result<f64> {
    let err = |h: f64| -> Result<f64> {
        let run = toda_compare(cf, t_end, h)?;
        let last = run.trajectory.last().expect("trajectory has at least one state");
        Ok(last.max_deviation(&cf.state_at(last.t)))
    };
    let (coarse, fine) = (err(h)?, err(h / 2.0)?);
    if fine == 0.0 || coarse == 0.0 {
        return Err(Error::InvalidParameters("errors vanish, order is undefined".into()));
    }
    Ok((coarse / fine).log2())
}

/// Trajectory as CSV: t, then every entry of B₀..B_nmax and C₀..C_nmax row-major.
pub fn trajectory_csv_header(dim: usize, nmax: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    for name in ["B", "C"] {
        for n in 0..=nmax {
            for i in 0..dim {
                for j in 0..dim {
                    cols.push(format!("{name}{n}_{}{}", i + 1, j + 1));
                }
            }
        }
    }
    cols
}

pub fn trajectory_csv_row(state: &TodaNumericState) -> Vec<f64> {
    let mut row = vec![state.t];
    for m in state.b.iter().chain(&state.c) {
        row.extend(m.entries().iter().copied());
    }
    row
}

pub fn is_lower_triangular(m: &Matrix<Rational>) -> bool {
    (0..m.rows()).all(|i| (i + 1..m.cols()).all(|j| m.get(i, j).is_zero()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn families(n: usize) -> Vec<WeightFamily> {
        vec![
            WeightFamily::pochhammer(n, int(1)).unwrap(),
            WeightFamily::gamma(n, rat(3, 2), int(1)).unwrap(),
            WeightFamily::flat(n, rat(1, 2), int(1), rat(1, 2)).unwrap(),
        ]
    }

    #[test]
    fn closed_form_at_zero_and_scalar_case() {
        let fam = WeightFamily::pochhammer(2, int(1)).unwrap();
        let cf = toda_closed_form(&fam, 3).unwrap();
        for n in 0..=3 {
            assert_eq!(cf.b_at(n, &int(0)), cf.statics.b[n]);
            assert_eq!(cf.c_at(n, &int(0)), cf.statics.c[n]);
        }
        assert!(cf.c[1].degree().unwrap() <= 2);
        let scalar = toda_closed_form(&WeightFamily::pochhammer(1, int(1)).unwrap(), 4).unwrap();
        for n in 0..=4 {
            assert_eq!(scalar.b[n], RatMatPoly::monomial(Matrix::identity(1).scale(&rat(-1, 2)), 1));
            assert_eq!(scalar.c[n], RatMatPoly::constant(Matrix::identity(1).scale(&rat(n as i64, 2))));
        }
    }

    #[test]
    fn lattice_residuals_vanish() {
        for dim in 1..=4 {
            for fam in families(dim) {
                for r in toda_residual(&fam, 4).unwrap() {
                    assert!(r.passed(), "{} n={}", fam, r.n);
                }
            }
        }
    }

    #[test]
    fn spectrum_is_constant() {
        for fam in families(3) {
            let cf = toda_closed_form(&fam, 3).unwrap();
            for n in 1..=3 {
                assert!(spectrum_check(&cf, n));
            }
        }
        let m = RatMatPoly::constant(Matrix::from_i64_rows(&[&[1, 2], &[3, 4]]));
        let cp = characteristic_polynomial(&m);
        assert_eq!(cp[0], ScalarPolynomial::constant(int(-2)));
        assert_eq!(cp[1], ScalarPolynomial::constant(int(-5)));
    }

    #[test]
    fn deformed_polynomials() {
        let fam = WeightFamily::pochhammer(3, int(1)).unwrap();
        let seq = mvop_by_recurrence(&fam, 3).unwrap();
        assert_eq!(toda_deformed_polys(&fam, 3, &int(0)).unwrap(), seq.polys[3]);
        assert!(toda_deformed_polys(&fam, 3, &int(1)).unwrap().is_monic_of_degree(3));
    }

    #[test]
    fn deformed_orthogonality_by_quadrature() {
        let rule = crate::quad::gauss_hermite(crate::quad::DEFAULT_NODES).unwrap();
        let fam = WeightFamily::gamma(3, rat(3, 2), int(1)).unwrap();
        let w = crate::weight::gauged_weight(&fam, 0).unwrap().poly_part.to_f64();
        let t = int(1);
        let ps: Vec<_> = (0..=4).map(|n| toda_deformed_polys(&fam, n, &t).unwrap().to_f64()).collect();
        for n in 0..=4 {
            for m in 0..n {
                let v = crate::quad::inner_product(&ps[n], &ps[m], &w, &rule, 1.0).unwrap();
                assert!(v.max_abs() <= 1e-9, "{n} {m} {}", v.max_abs());
            }
        }
    }

    #[test]
    fn m_matrix_is_leading_coefficient() {
        for fam in families(3) {
            for n in 0..=3 {
                let m0 = m_matrix(&fam, n, &int(0)).unwrap();
                assert_eq!(m0, g_matrix(&fam, n).inverse().unwrap());
                let m = m_matrix(&fam, n, &rat(-1, 2)).unwrap();
                assert!(is_lower_triangular(&m));
            }
        }
    }

    #[test]
    fn expansion_identity() {
        let f2 = WeightFamily::pochhammer(2, int(1)).unwrap();
        assert!(toda_expansion_check(&f2, 2, &int(1)).unwrap().passed());
        let g3 = WeightFamily::gamma(3, rat(3, 2), int(1)).unwrap();
        assert!(toda_expansion_check(&g3, 3, &rat(-1, 2)).unwrap().passed());
        for fam in families(3) {
            for n in 0..=3 {
                assert!(toda_expansion_check(&fam, n, &int(0)).unwrap().passed());
                assert!(toda_expansion_check(&fam, n, &int(1)).unwrap().passed());
            }
        }
    }

    #[test]
    fn time_derivative_and_simplified_identity() {
        for fam in families(3) {
            for n in 1..=4 {
                for t in [int(1), rat(-1, 2), int(0)] {
                    assert!(toda_timederivative_check(&fam, n, &t).unwrap().passed(), "{fam} {n} {t}");
                    assert!(simplified_identity_check(&fam, n, &t).unwrap().passed(), "{fam} {n} {t}");
                }
            }
        }
    }

    #[test]
    fn rk4_matches_closed_form() {
        let fam = WeightFamily::pochhammer(2, int(1)).unwrap();
        let cf = toda_closed_form(&fam, 3).unwrap();
        let run = toda_compare(&cf, 1.0, 1e-3).unwrap();
        assert_eq!(run.trajectory.len(), 1001);
        assert!(run.max_deviation <= 1e-6, "{}", run.max_deviation);
        let order = rk4_order_estimate(&cf, 1.0, 0.1).unwrap();
        assert!((order - 4.0).abs() <= 0.3, "{order}");
    }

    #[test]
    fn rk4_scalar_case() {
        let cf = toda_closed_form(&WeightFamily::pochhammer(1, int(1)).unwrap(), 3).unwrap();
        let run = toda_compare(&cf, 1.0, 1e-2).unwrap();
        assert!(run.max_deviation <= 1e-13, "{}", run.max_deviation);
    }

    #[test]
    fn overflow_guard() {
        let state = TodaNumericState {
            t: 0.0,
            b: vec![Matrix::identity(1).scale(&1e13)],
            c: vec![Matrix::zeros(1, 1)],
        };
        let r = toda_integrate(&state, &|_| Matrix::zeros(1, 1), 1.0, 0.5);
        assert!(matches!(r, Err(Error::StepRejected { .. })));
    }
}
