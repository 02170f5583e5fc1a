//! Monic matrix-valued Hermite-type polynomials by four independent routes,
//! with their norms, recurrence coefficients, ladder identities and
//! connection coefficients. All objects are in the rational gauge.

use num_traits::{One, Zero};

use crate::burchnall::apply_raising;
use crate::check::ExactCheck;
use crate::error::{Error, Result};
use crate::exact::{factorial, gauss_moment_coeff, hyp3f2_terminating, int, pochhammer, pow2, PiScalar, Rational};
use crate::hermite::{hermite_imag_table, hermite_table, ScalarPolynomial};
use crate::matpoly::{Matrix, RatMatPoly};
use crate::weight::{
    build_l, gauged_weight, gaussian_derivative, pearson_psi, weight_inverse, zeroth_moment, WeightFamily,
};

/// Monic polynomials P₀..P_nmax with norms Hₙ (as multiples of √π) and
/// recurrence coefficients Bₙ, Cₙ for n = 0..=nmax (C₀ = 0).
#[derive(Clone, Debug, PartialEq)]
pub struct MVOPSequence {
    pub family: WeightFamily,
    pub polys: Vec<RatMatPoly>,
    pub norms: Vec<Matrix<Rational>>,
    pub b: Vec<Matrix<Rational>>,
    pub c: Vec<Matrix<Rational>>,
}

impl MVOPSequence {
    pub fn nmax(&self) -> usize {
        self.polys.len() - 1
    }

    /// Diagonal of Hₙ with the √π factor restored.
    pub fn norm_diagonal(&self, n: usize) -> Vec<PiScalar> {
        self.norms[n].diag().into_iter().map(|c| PiScalar::new(c, 1)).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mats = |v: &[Matrix<Rational>]| v.iter().map(Matrix::to_json).collect::<Vec<_>>();
        serde_json::json!({
            "family": self.family.to_json(),
            "polys": self.polys.iter().map(RatMatPoly::to_json).collect::<Vec<_>>(),
            "norms": self.norms.iter().enumerate().map(|(n, _)| {
                self.norm_diagonal(n).iter().map(PiScalar::to_json).collect::<Vec<_>>()
            }).collect::<Vec<_>>(),
            "B": mats(&self.b),
            "C": mats(&self.c),
        })
    }
}

/// K^{(ν+shift)} = 2(d(J − N − 1) − c), diagonal with negative entries.
pub fn ladder_k(family: &WeightFamily, nu_shift: usize) -> Matrix<Rational> {
    let f = family.shifted(nu_shift);
    let (d, c) = (f.d(), f.c());
    let entries: Vec<Rational> = (1..=f.n)
        .map(|j| int(2) * (&d * int(j as i64 - f.n as i64 - 1) - &c))
        .collect();
    Matrix::diagonal(&entries)
}

/// Gₙ = (K^{(ν)})⁻¹ ··· (K^{(ν+n−1)})⁻¹
pub fn g_matrix(family: &WeightFamily, n: usize) -> Matrix<Rational> {
    diag_product(family.n, (0..n).map(|k| ladder_k(family, k).diag()), true)
}

fn diag_product(dim: usize, factors: impl Iterator<Item = Vec<Rational>>, invert: bool) -> Matrix<Rational> {
    let mut acc = vec![Rational::one(); dim];
    for f in factors {
        for (a, b) in acc.iter_mut().zip(f) {
            if invert {
                *a /= b;
            } else {
                *a *= b;
            }
        }
    }
    Matrix::diagonal(&acc)
}

/// ∏_{k<n} unitRatio(ν+k) = unit(ν+n)/unit(ν).
pub fn unit_ratio_product(family: &WeightFamily, n: usize) -> Rational {
    (0..n).map(|k| family.shifted(k).unit_ratio()).product()
}

/// Hₙ/√π = (−1)ⁿ n! ∏_{k<n} (K^{(ν+k)})⁻¹ unitRatio(ν+k) · H₀^{(ν+n)}/√π
pub fn norm_closed_form(family: &WeightFamily, n: usize) -> Matrix<Rational> {
    let h0: Vec<Rational> = zeroth_moment(&family.shifted(n))
        .iter()
        .map(|p| p.coeff().clone())
        .collect();
    let sign = if n % 2 == 0 { int(1) } else { int(-1) };
    let scalar = sign * factorial(n) * unit_ratio_product(family, n);
    (&g_matrix(family, n) * &Matrix::diagonal(&h0)).scale(&scalar)
}

/// Xₙ = n (K^{(ν+n−1)})⁻¹ Ψ̂^{(ν+n−1)}(0)ᵀ, the x^{n−1} coefficient of Pₙ.
pub fn x_coefficient(family: &WeightFamily, n: usize) -> Result<Matrix<Rational>> {
    if n == 0 {
        return Ok(Matrix::zeros(family.n, family.n));
    }
    let f = family.shifted(n - 1);
    let psi0 = pearson_psi(&f).coeff(0).transpose();
    Ok((&ladder_k(family, n - 1).inverse()? * &psi0).scale(&int(n as i64)))
}

/// Gram–Schmidt on the exact block moments of the gauged weight.
pub fn mvop_by_gram_schmidt(family: &WeightFamily, nmax: usize) -> Result<MVOPSequence> {
    family.validate()?;
    let dim = family.n;
    let w = gauged_weight(family, 0)?.poly_part;
    let moments: Vec<Matrix<Rational>> = (0..=2 * nmax + 1)
        .map(|k| {
            w.coeffs().iter().enumerate().fold(Matrix::zeros(dim, dim), |acc, (j, c)| {
                if (j + k) % 2 == 0 {
                    &acc + &c.scale(&gauss_moment_coeff(j + k))
                } else {
                    acc
                }
            })
        })
        .collect();
    let mut polys = vec![RatMatPoly::identity(dim)];
    for n in 1..=nmax {
        let size = n * dim;
        let hankel = Matrix::from_fn(size, size, |i, j| moments[i / dim + j / dim].get(i % dim, j % dim).clone());
        // Column blocks M_{n+i}ᵀ; the moments are symmetric.
        let rhs = Matrix::from_fn(size, dim, |i, j| -moments[n + i / dim].get(j, i % dim).clone());
        let sol = hankel
            .solve(&rhs)
            .map_err(|_| Error::SingularMomentMatrix { pivot: n })?;
        let mut coeffs: Vec<Matrix<Rational>> = (0..n)
            .map(|blk| Matrix::from_fn(dim, dim, |i, j| sol.get(blk * dim + j, i).clone()))
            .collect();
        coeffs.push(Matrix::identity(dim));
        polys.push(RatMatPoly::new(dim, coeffs));
    }
    let pairing = |p: &RatMatPoly, q: &RatMatPoly| -> Matrix<Rational> {
        let mut acc = Matrix::zeros(dim, dim);
        for (i, a) in p.coeffs().iter().enumerate() {
            for (j, b) in q.coeffs().iter().enumerate() {
                acc = &acc + &(&(a * &moments[i + j]) * &b.transpose());
            }
        }
        acc
    };
    let norms: Vec<Matrix<Rational>> = polys.iter().map(|p| pairing(p, p)).collect();
    let mut b = Vec::with_capacity(nmax + 1);
    let mut c = Vec::with_capacity(nmax + 1);
    for n in 0..=nmax {
        let hinv = norms[n].inverse()?;
        b.push(&pairing(&polys[n].mul_x(), &polys[n]) * &hinv);
        c.push(if n == 0 {
            Matrix::zeros(dim, dim)
        } else {
            &norms[n] * &norms[n - 1].inverse()?
        });
    }
    Ok(MVOPSequence {
        family: family.clone(),
        polys,
        norms,
        b,
        c,
    })
}

/// Three-term recurrence with Bₙ = Xₙ − Xₙ₊₁ and Cₙ = HₙHₙ₋₁⁻¹ from closed forms.
pub fn mvop_by_recurrence(family: &WeightFamily, nmax: usize) -> Result<MVOPSequence> {
    family.validate()?;
    let dim = family.n;
    let xs = (0..=nmax + 1)
        .map(|n| x_coefficient(family, n))
        .collect::<Result<Vec<_>>>()?;
    let b: Vec<Matrix<Rational>> = (0..=nmax).map(|n| &xs[n] - &xs[n + 1]).collect();
    let norms: Vec<Matrix<Rational>> = (0..=nmax).map(|n| norm_closed_form(family, n)).collect();
    let mut c = vec![Matrix::zeros(dim, dim)];
    for n in 1..=nmax {
        c.push(&norms[n] * &norms[n - 1].inverse()?);
    }
    let mut polys = vec![RatMatPoly::identity(dim)];
    for n in 0..nmax {
        let mut next = &polys[n].mul_x() - &polys[n].left_mul(&b[n]);
        if n > 0 {
            next = &next - &polys[n - 1].left_mul(&c[n]);
        }
        polys.push(next);
    }
    Ok(MVOPSequence {
        family: family.clone(),
        polys,
        norms,
        b,
        c,
    })
}

/// Entries from the double sum over Hermite products with ₃F₂ coefficients.
pub fn mvop_by_explicit_entries(family: &WeightFamily, n: usize) -> Result<RatMatPoly> {
    family.validate()?;
    let big = family.n;
    let g = family.gamma_ratio();
    let h = hermite_table(n + big);
    let gi = hermite_imag_table(big);
    let mut entries = vec![vec![ScalarPolynomial::zero(); big]; big];
    for r in 1..=big {
        let pref = pow2(-(n as i64)) / factorial(r - 1) * shift_product(family, r, n);
        let hyp = hyp_row(big, &g, r, n)?;
        for t in 1..=big {
            let mut sum = ScalarPolynomial::zero();
            for s in t..=big.min(n + r) {
                let coeff = pochhammer(&int((big - s + 1) as i64), s - 1) / factorial(s - t) * &hyp[s - 1];
                if coeff.is_zero() {
                    continue;
                }
                sum = sum.add(&h[n + r - s].mul(&gi[s - t]).scale(&coeff));
            }
            entries[r - 1][t - 1] = sum.scale(&pref);
        }
    }
    Ok(RatMatPoly::from_scalar_entries(big, |i, j| entries[i][j].clone()))
}

/// Π_n(r) = ∏_{k<n} (1+γ^{(ν+k)})/(N−r+1+γ^{(ν+k)})
pub fn shift_product(family: &WeightFamily, r: usize, n: usize) -> Rational {
    (0..n)
        .map(|k| {
            let gk = family.shifted(k).gamma_ratio();
            (&gk + int(1)) / (gk + int((family.n - r + 1) as i64))
        })
        .product()
}

/// ₃F₂(1−s, r−N, n+1+γ; 1−N, 1+γ; 1) for s = 1..=N.
fn hyp_row(big: usize, g: &Rational, r: usize, n: usize) -> Result<Vec<Rational>> {
    (1..=big)
        .map(|s| {
            hyp3f2_terminating(
                &int(1 - s as i64),
                &int(r as i64 - big as i64),
                &(g + int(n as i64 + 1)),
                &int(1 - big as i64),
                &(g + int(1)),
            )
        })
        .collect()
}

/// Pₙ = Gₙ·[dⁿ/dxⁿ W^{(ν+n)}]·(W^{(ν)})⁻¹ with the e^{−x²} factors cancelled.
pub fn mvop_by_rodrigues(family: &WeightFamily, n: usize) -> Result<RatMatPoly> {
    family.validate()?;
    let mut q = gauged_weight(family, n)?.poly_part;
    for _ in 0..n {
        q = gaussian_derivative(&q);
    }
    let p = (&q * &weight_inverse(family)?)
        .left_mul(&g_matrix(family, n))
        .scale(&unit_ratio_product(family, n));
    if !p.is_monic_of_degree(n) {
        return Err(Error::NonPolynomialResult { degree: n });
    }
    Ok(p)
}

/// dPₙ/dx − n·Pₙ₋₁^{(ν+1)}
pub fn shift_down(family: &WeightFamily, n: usize) -> Result<ExactCheck> {
    let p = mvop_by_recurrence(family, n)?;
    let q = mvop_by_recurrence(&family.shifted(1), n.saturating_sub(1))?;
    let rhs = if n == 0 {
        RatMatPoly::zero(family.n)
    } else {
        q.polys[n - 1].scale(&int(n as i64))
    };
    Ok(ExactCheck::difference(
        format!("shift-down n={n}"),
        &p.polys[n].derivative(),
        &rhs,
    ))
}

/// Pₙ₋₁^{(ν+1)}·S^{(ν)} − K^{(ν)}Pₙ
pub fn shift_up(family: &WeightFamily, n: usize) -> Result<ExactCheck> {
    if n == 0 {
        return Err(Error::InvalidParameters("the raising ladder needs n ≥ 1".into()));
    }
    let p = mvop_by_recurrence(family, n)?;
    let q = mvop_by_recurrence(&family.shifted(1), n - 1)?;
    let lhs = apply_raising(&q.polys[n - 1], family, 0);
    let rhs = p.polys[n].left_mul(&ladder_k(family, 0));
    Ok(ExactCheck::difference(format!("shift-up n={n}"), &lhs, &rhs))
}

/// Aₖ with Pₙ^{(ν_from)} = Σₖ Aₖ Pₙ₋ₖ^{(ν_to)}, from the closed form. Aₖ is
/// supported on the k-th superdiagonal.
pub fn connection_coefficients(
    family: &WeightFamily,
    nu_from: &Rational,
    nu_to: &Rational,
    n: usize,
) -> Result<Vec<Matrix<Rational>>> {
    let from = family.with_nu(nu_from.clone());
    let to = family.with_nu(nu_to.clone());
    from.validate()?;
    to.validate()?;
    let big = family.n;
    let gn = from.gamma_ratio();
    let gl = to.gamma_ratio();
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut a = Matrix::zeros(big, big);
        for r in 1..=big {
            if r + k > big {
                continue;
            }
            let ak = hahn_connection(big - r, &gn, &gl, n, k);
            if ak.is_zero() {
                continue;
            }
            let v = pow2(-(k as i64)) * factorial(r + k - 1) / factorial(r - 1)
                * shift_product(&from, r, n)
                / shift_product(&to, r + k, n - k)
                * ak;
            a.set(r - 1, r + k - 1, v);
        }
        out.push(a);
    }
    Ok(out)
}

// a_p for m = N − r:
// C(m,p)(γν−γλ)_p(γλ+1)_{m−p}/(γν+1)_m · (n+1+γν)_{m−p}/(n−p+1+γλ)_m
//   · (m−2p+n+1+γλ)/(m−p+n+1+γλ) · (n+1−p)_p
fn hahn_connection(m: usize, gn: &Rational, gl: &Rational, n: usize, p: usize) -> Rational {
    if p > m || p > n {
        return Rational::zero();
    }
    let one = int(1);
    let mn = int((m + n) as i64);
    let pp = int(p as i64);
    crate::exact::binomial(m, p)
        * pochhammer(&(gn - gl), p)
        * pochhammer(&(gl + &one), m - p)
        / pochhammer(&(gn + &one), m)
        * pochhammer(&(gn + int(n as i64 + 1)), m - p)
        / pochhammer(&(gl + int(n as i64 + 1) - &pp), m)
        * (&mn - int(2) * &pp + &one + gl)
        / (&mn - &pp + &one + gl)
        * pochhammer(&int((n + 1 - p) as i64), p)
}

/// Connection coefficients by exact polynomial division, leading term first.
pub fn connection_by_division(
    family: &WeightFamily,
    nu_from: &Rational,
    nu_to: &Rational,
    n: usize,
) -> Result<Vec<Matrix<Rational>>> {
    let from = mvop_by_recurrence(&family.with_nu(nu_from.clone()), n)?;
    let to = mvop_by_recurrence(&family.with_nu(nu_to.clone()), n)?;
    let mut rem = from.polys[n].clone();
    let mut out = vec![Matrix::zeros(family.n, family.n); n + 1];
    for k in 0..=n {
        let deg = n - k;
        let a = rem.coeff(deg);
        rem = &rem - &to.polys[deg].left_mul(&a);
        out[k] = a;
    }
    debug_assert!(rem.is_zero());
    Ok(out)
}

/// Σ_{s=t}^{N∧(n+r)} (−1)^{s−t}(N−s+1)_{s−1}/(s−t)! · ₃F₂(1−s, r−N, n+1+γ; 1−N, 1+γ)
pub fn vanishing_sum_check(family: &WeightFamily, n: usize, r: usize, t: usize) -> Result<Rational> {
    let big = family.n;
    if !(1 <= t && t < r && r <= big) {
        return Err(Error::InvalidParameters(format!(
            "need 1 ≤ t < r ≤ N, got r={r}, t={t}, N={big}"
        )));
    }
    let hyp = hyp_row(big, &family.gamma_ratio(), r, n)?;
    let mut sum = Rational::zero();
    for s in t..=big.min(n + r) {
        let sign = if (s - t) % 2 == 0 { int(1) } else { int(-1) };
        sum += sign * pochhammer(&int((big - s + 1) as i64), s - 1) / factorial(s - t) * &hyp[s - 1];
    }
    Ok(sum)
}

/// Scalars c_{r,s} with (Pₙ·L)_{r,s} = c_{r,s}·H_{n+r−s}, or None if some
/// entry is not such a multiple.
pub fn entry_factorization(poly: &RatMatPoly, n: usize) -> Option<Matrix<Rational>> {
    let dim = poly.dim();
    let pl = poly * &build_l(dim);
    let h = hermite_table(n + dim);
    let mut c = Matrix::zeros(dim, dim);
    for r in 0..dim {
        for s in 0..dim {
            let e = pl.scalar_entry(r, s);
            if n + r < s {
                if !e.is_zero() {
                    return None;
                }
                continue;
            }
            let m = n + r - s;
            let coeff = e.coeff(m) / pow2(m as i64);
            if e != h[m].scale(&coeff) {
                return None;
            }
            c.set(r, s, coeff);
        }
    }
    Some(c)
}

/// Residuals of the dual-Hahn recurrence in s for the ₃F₂ values ĉ_s, s = 1..=N:
/// (s+γ)(s−N)ĉ_{s+1} − [(s+γ)(s−n−r) + (s−1)(s−N−1)]ĉ_s + (s−n−r−1)(s−1)ĉ_{s−1}
///   − n(N+1−r+γ)ĉ_s
pub fn dual_hahn_residuals(family: &WeightFamily, n: usize, r: usize) -> Result<Vec<Rational>> {
    let big = family.n as i64;
    let g = family.gamma_ratio();
    let hyp = hyp_row(family.n, &g, r, n)?;
    let at = |s: i64| -> Rational {
        if s >= 1 && s <= big {
            hyp[(s - 1) as usize].clone()
        } else {
            Rational::zero()
        }
    };
    let (n, r) = (n as i64, r as i64);
    Ok((1..=big)
        .map(|s| {
            let sg = &g + int(s);
            &sg * int(s - big) * at(s + 1)
                - (&sg * int(s - n - r) + int((s - 1) * (s - big - 1))) * at(s)
                + int((s - n - r - 1) * (s - 1)) * at(s - 1)
                - int(n) * (int(big + 1 - r) + &g) * at(s)
        })
        .collect())
}

/// Ratio printed/derived for the diagonal of Cₙ, where the printed closed form is
/// −2n/d^{(ν+n−1)} · δ₁^{(ν+n)}/δ₁^{(ν+n−1)} · (−N−γ^{(ν+n)})_{p−1}/(−N−γ^{(ν+n−1)})_p.
pub fn printed_c_ratio(family: &WeightFamily, n: usize) -> Result<Vec<Rational>> {
    if n == 0 {
        return Err(Error::InvalidParameters("Cₙ is defined for n ≥ 1".into()));
    }
    let prev = family.shifted(n - 1);
    let cur = family.shifted(n);
    let big = int(family.n as i64);
    let derived = &norm_closed_form(family, n) * &norm_closed_form(family, n - 1).inverse()?;
    let delta_ratio = cur.delta_hat(1) * prev.unit_ratio() / prev.delta_hat(1);
    Ok((1..=family.n)
        .map(|p| {
            let printed = int(-2 * n as i64) / prev.d() * &delta_ratio
                * pochhammer(&(-&big - cur.gamma_ratio()), p - 1)
                / pochhammer(&(-&big - prev.gamma_ratio()), p);
            printed / derived.get(p - 1, p - 1)
        })
        .collect())
}
