//! Raising-operator calculus: S^{(ν)}, Burchnall's expansion of iterated
//! raising, the product expansion of Pₘ₊ₙ and the integrated identity.

use rayon::prelude::*;

use crate::check::ExactCheck;
use crate::error::{Error, Result};
use crate::exact::{binomial, factorial, Rational};
use crate::matpoly::{MatrixPolynomial, RatMatPoly};
use crate::mvops::{g_matrix, mvop_by_recurrence};
use crate::quad::{integrate, QuadratureRule};
use crate::weight::{gauged_weight, gaussian_derivative, pearson_phi, pearson_psi, weight_inverse, WeightFamily};

/// Q·S^{(ν+shift)} = Q′Φ̂ᵀ + QΨ̂ᵀ
pub fn apply_raising(q: &RatMatPoly, family: &WeightFamily, nu_shift: usize) -> RatMatPoly {
    let f = family.shifted(nu_shift);
    &(&q.derivative() * &pearson_phi(&f).transpose()) + &(q * &pearson_psi(&f).transpose())
}

/// Q·S^{(ν+shift)} as [(Q·P̂^{(ν+1)})′ − 2x·Q·P̂^{(ν+1)}]·unitRatio·(P̂^{(ν)})⁻¹.
pub fn apply_raising_by_division(q: &RatMatPoly, family: &WeightFamily, nu_shift: usize) -> Result<RatMatPoly> {
    let f = family.shifted(nu_shift);
    let next = gauged_weight(&f, 1)?.poly_part;
    let inner = gaussian_derivative(&(q * &next)).scale(&f.unit_ratio());
    Ok(&inner * &weight_inverse(&f)?)
}

/// ((Q·S^{(ν+n−1)})···)·S^{(ν)}
pub fn iterate_raising(q: &RatMatPoly, family: &WeightFamily, n: usize) -> RatMatPoly {
    (0..n).rev().fold(q.clone(), |acc, k| apply_raising(&acc, family, k))
}

/// Caches Φ̂-products, Gₙ and the shifted polynomials needed by the
/// expansions starting at a base ν.
#[derive(Clone, Debug)]
pub struct RaisingChain {
    pub family: WeightFamily,
    pub length: usize,
    /// phi_products[k] = (Φ̂^{(ν)}···Φ̂^{(ν+k−1)})ᵀ
    pub phi_products: Vec<RatMatPoly>,
    /// terms[k] = (G_{n−k}^{(ν+k)})⁻¹ P_{n−k}^{(ν+k)} phi_products[k]
    pub terms: Vec<RatMatPoly>,
}

impl RaisingChain {
    pub fn new(family: &WeightFamily, n: usize) -> Result<Self> {
        let dim = family.n;
        let mut phi_products = vec![RatMatPoly::identity(dim)];
        let mut prod = RatMatPoly::identity(dim);
        for k in 0..n {
            prod = &prod * &pearson_phi(&family.shifted(k));
            phi_products.push(prod.transpose());
        }
        let terms = (0..=n)
            .into_par_iter()
            .map(|k| {
                let shifted = family.shifted(k);
                let p = mvop_by_recurrence(&shifted, n - k)?;
                let ginv = g_matrix(&shifted, n - k).inverse()?;
                Ok(&p.polys[n - k].left_mul(&ginv) * &phi_products[k])
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            family: family.clone(),
            length: n,
            phi_products,
            terms,
        })
    }
}

/// Σₖ C(n,k) Q^{(k)} (G_{n−k}^{(ν+k)})⁻¹ P_{n−k}^{(ν+k)} (Φ̂^{(ν)}···Φ̂^{(ν+k−1)})ᵀ
pub fn burchnall_expand(q: &RatMatPoly, family: &WeightFamily, n: usize) -> Result<RatMatPoly> {
    let chain = RaisingChain::new(family, n)?;
    Ok(expand_with_chain(q, &chain))
}

pub fn expand_with_chain(q: &RatMatPoly, chain: &RaisingChain) -> RatMatPoly {
    let n = chain.length;
    let parts: Vec<RatMatPoly> = (0..=n)
        .into_par_iter()
        .map(|k| (&q.nth_derivative(k) * &chain.terms[k]).scale(&binomial(n, k)))
        .collect();
    parts
        .iter()
        .fold(RatMatPoly::zero(q.dim()), |acc, p| &acc + p)
}

/// G_m^{(ν+n)} (G_{n+m}^{(ν)})⁻¹ P_{m+n}^{(ν)} against
/// Σ_{k ≤ n∧m} C(n,k)C(m,k)k! P_{m−k}^{(ν+n+k)} (G_{n−k}^{(ν+k)})⁻¹ P_{n−k}^{(ν+k)} (Φ̂···)ᵀ.
pub fn burchnall_product_expansion(family: &WeightFamily, n: usize, m: usize) -> Result<ExactCheck> {
    let chain = RaisingChain::new(family, n)?;
    let base = mvop_by_recurrence(family, n + m)?;
    let lhs = base.polys[n + m]
        .left_mul(&(&g_matrix(&family.shifted(n), m) * &g_matrix(family, n + m).inverse()?));
    let mut rhs = RatMatPoly::zero(family.n);
    for k in 0..=n.min(m) {
        let upper = mvop_by_recurrence(&family.shifted(n + k), m - k)?;
        let coeff: Rational = binomial(n, k) * binomial(m, k) * factorial(k);
        rhs = &rhs + &(&upper.polys[m - k] * &chain.terms[k]).scale(&coeff);
    }
    Ok(ExactCheck::difference(format!("burchnall-product n={n} m={m}"), &lhs, &rhs))
}

/// e^{−xt}·q(x) with a floating matrix-polynomial factor.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpPoly {
    pub t: f64,
    pub poly: MatrixPolynomial<f64>,
}

impl ExpPoly {
    pub fn polynomial(poly: MatrixPolynomial<f64>) -> Self {
        Self { t: 0.0, poly }
    }

    /// d/dx (e^{−xt}q) = e^{−xt}(q′ − t·q)
    pub fn derivative(&self) -> Self {
        Self {
            t: self.t,
            poly: &self.poly.derivative() - &self.poly.scale(&self.t),
        }
    }
}

/// Result of the integrated identity: both sides and their largest entry difference.
#[derive(Clone, Debug)]
pub struct IntegratedCheck {
    pub lhs: crate::matpoly::Matrix<f64>,
    pub rhs: crate::matpoly::Matrix<f64>,
    pub residual: f64,
}

/// ∫ Q W^{(ν+n)} M^{(n)} dx against (−1)ⁿ ∫ Σₖ C(n,k) Q^{(k)} Tₖ W^{(ν)} M dx,
/// with Tₖ the Burchnall terms and W the gauged weights (unit ratios included).
pub fn integrated_burchnall_check(
    family: &WeightFamily,
    n: usize,
    q: &ExpPoly,
    m: &RatMatPoly,
    rule: &QuadratureRule,
) -> Result<IntegratedCheck> {
    let chain = RaisingChain::new(family, n)?;
    let unit = crate::mvops::unit_ratio_product(family, n);
    let w_top = gauged_weight(family, n)?.poly_part.scale(&unit).to_f64();
    let w_base = gauged_weight(family, 0)?.poly_part.to_f64();
    let mn = m.nth_derivative(n).to_f64();
    let lhs_integrand = &(&q.poly * &w_top) * &mn;

    let mut sum = MatrixPolynomial::<f64>::zero(family.n);
    let mut qk = q.clone();
    for k in 0..=n {
        let term = (&qk.poly * &chain.terms[k].to_f64()).scale(&crate::exact::to_f64(&binomial(n, k)));
        sum = &sum + &term;
        qk = qk.derivative();
    }
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let rhs_integrand = (&(&sum * &w_base) * &m.to_f64()).scale(&sign);

    sanity_check(rule, &lhs_integrand)?;
    sanity_check(rule, &rhs_integrand)?;
    let lhs = integrate(rule, &lhs_integrand, q.t)?;
    let rhs = integrate(rule, &rhs_integrand, q.t)?;
    let residual = (&lhs - &rhs).max_abs();
    Ok(IntegratedCheck { lhs, rhs, residual })
}

/// ∫ Σₖ C(n,k)(−t)ᵏ Tₖ e^{−xt} W^{(ν)} x^p dx, which vanishes for p < n.
pub fn integrated_burchnall_special(
    family: &WeightFamily,
    n: usize,
    p: usize,
    t: f64,
    rule: &QuadratureRule,
) -> Result<f64> {
    let q = ExpPoly {
        t,
        poly: MatrixPolynomial::identity(family.n),
    };
    let m = RatMatPoly::monomial(crate::matpoly::Matrix::identity(family.n), p);
    let check = integrated_burchnall_check(family, n, &q, &m, rule)?;
    if p < n {
        // M^{(n)} = 0, so the right-hand side alone must vanish.
        Ok(check.rhs.max_abs())
    } else {
        Ok(check.residual)
    }
}

fn sanity_check(rule: &QuadratureRule, f: &MatrixPolynomial<f64>) -> Result<()> {
    let deg = f.degree().unwrap_or(0);
    if deg + 2 > rule.exact_degree() {
        return Err(Error::QuadratureUnderResolved(format!(
            "integrand of degree {deg} needs more than {} nodes",
            rule.node_count()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};
    use crate::matpoly::Matrix;
    use crate::quad::gauss_hermite;

    fn fams(n: usize) -> Vec<WeightFamily> {
        vec![
            WeightFamily::pochhammer(n, int(1)).unwrap(),
            WeightFamily::gamma(n, rat(1, 2), int(1)).unwrap(),
            WeightFamily::flat(n, rat(3, 2), int(1), rat(1, 2)).unwrap(),
        ]
    }

    fn sample_q(dim: usize, deg: usize) -> RatMatPoly {
        RatMatPoly::new(
            dim,
            (0..=deg)
                .map(|k| Matrix::from_fn(dim, dim, |i, j| rat((i as i64 + 2 * j as i64 - k as i64) % 5, k as i64 + 1)))
                .collect(),
        )
    }

    #[test]
    fn raising_examples() {
        for fam in fams(3) {
            assert!(apply_raising(&RatMatPoly::zero(3), &fam, 0).is_zero());
            assert_eq!(
                apply_raising(&RatMatPoly::identity(3), &fam, 0),
                pearson_psi(&fam).transpose()
            );
            for deg in 0..4 {
                let q = sample_q(3, deg);
                assert_eq!(apply_raising(&q, &fam, 1), apply_raising_by_division(&q, &fam, 1).unwrap());
            }
        }
    }

    #[test]
    fn iterated_raising_gives_scaled_polynomials() {
        for fam in fams(3) {
            let rec = mvop_by_recurrence(&fam, 4).unwrap();
            for n in 0..=4 {
                let lhs = iterate_raising(&RatMatPoly::identity(3), &fam, n);
                let rhs = rec.polys[n].left_mul(&g_matrix(&fam, n).inverse().unwrap());
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn expansion_matches_iteration() {
        for fam in fams(2) {
            for n in 0..=3 {
                for deg in 0..=3 {
                    let q = sample_q(2, deg);
                    assert_eq!(burchnall_expand(&q, &fam, n).unwrap(), iterate_raising(&q, &fam, n));
                }
            }
        }
        let f = &fams(2)[0];
        assert_eq!(burchnall_expand(&sample_q(2, 2), f, 0).unwrap(), sample_q(2, 2));
    }

    #[test]
    fn product_expansion() {
        for fam in fams(3) {
            for n in 0..=2 {
                for m in 0..=3 {
                    assert!(burchnall_product_expansion(&fam, n, m).unwrap().passed());
                }
            }
        }
    }

    #[test]
    fn integrated_identity() {
        let rule = gauss_hermite(80).unwrap();
        let fam = WeightFamily::pochhammer(2, int(1)).unwrap();
        let v = integrated_burchnall_special(&fam, 1, 0, 0.5, &rule).unwrap();
        assert!(v < 1e-8, "{v}");
        let q = ExpPoly::polynomial(sample_q(2, 2).to_f64());
        let check = integrated_burchnall_check(&fam, 2, &q, &sample_q(2, 3), &rule).unwrap();
        let scale = check.lhs.max_abs().max(1.0);
        assert!(check.residual <= 1e-10 * scale, "{}", check.residual);
        // t = 0: orthogonality of Pₙ against x^p
        let v0 = integrated_burchnall_special(&fam, 3, 2, 0.0, &rule).unwrap();
        assert!(v0 < 1e-10);
    }
}
