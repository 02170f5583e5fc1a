//! The three admissible parameter families and every weight-level object:
//! L and its inverse, A, J, the gauged weight, moments, Pearson data and
//! the commutant test.
//!
//! Everything here lives in the rational gauge: the weight is stored as
//! e^{−x²}·P̂(x) with P̂ = L·E·Lᵀ and E = diag(δ̂ₖ/αₖ²). Matrix polynomials
//! and operator coefficients are the correspondingly conjugated versions,
//! which have rational entries.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{factorial, format_rational, gauss_moment_coeff, int, pochhammer, rat, PiScalar, Rational};
use crate::hermite::{hermite_imag_table, hermite_series, hermite_table, ScalarPolynomial};
use crate::matpoly::{Matrix, RatMatPoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    Pochhammer,
    Gamma,
    Flat,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 3] = [FamilyKind::Pochhammer, FamilyKind::Gamma, FamilyKind::Flat];

    pub fn as_str(self) -> &'static str {
        match self {
            FamilyKind::Pochhammer => "pochhammer",
            FamilyKind::Gamma => "gamma",
            FamilyKind::Flat => "flat",
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pochhammer" => Ok(FamilyKind::Pochhammer),
            "gamma" => Ok(FamilyKind::Gamma),
            "flat" => Ok(FamilyKind::Flat),
            other => Err(Error::InvalidParameters(format!(
                "unknown family {other:?}; expected pochhammer, gamma or flat"
            ))),
        }
    }
}

/// A point in one of the parameter families. `lambda` is used by the gamma
/// family only, `rho` and `c_shift` by the flat family only.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeightFamily {
    pub kind: FamilyKind,
    pub n: usize,
    pub nu: Rational,
    pub lambda: Rational,
    pub rho: Rational,
    pub c_shift: Rational,
}

impl WeightFamily {
    pub fn new(
        kind: FamilyKind,
        n: usize,
        nu: Rational,
        lambda: Rational,
        rho: Rational,
        c_shift: Rational,
    ) -> Result<Self> {
        let fam = Self {
            kind,
            n,
            nu,
            lambda,
            rho,
            c_shift,
        };
        fam.validate()?;
        Ok(fam)
    }

    pub fn pochhammer(n: usize, nu: Rational) -> Result<Self> {
        Self::new(FamilyKind::Pochhammer, n, nu, Rational::one(), Rational::one(), Rational::zero())
    }

    pub fn gamma(n: usize, nu: Rational, lambda: Rational) -> Result<Self> {
        Self::new(FamilyKind::Gamma, n, nu, lambda, Rational::one(), Rational::zero())
    }

    pub fn flat(n: usize, nu: Rational, rho: Rational, c_shift: Rational) -> Result<Self> {
        Self::new(FamilyKind::Flat, n, nu, Rational::one(), rho, c_shift)
    }

    /// Same family with ν replaced by `nu`.
    pub fn with_nu(&self, nu: Rational) -> Self {
        Self {
            nu,
            ..self.clone()
        }
    }

    /// Same family at ν + j.
    pub fn shifted(&self, j: usize) -> Self {
        self.with_nu(&self.nu + int(j as i64))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameters(msg));
        if self.n == 0 {
            return bad("dimension N must be at least 1".into());
        }
        if !self.nu.is_positive() {
            return bad(format!("nu must be positive, got {}", self.nu));
        }
        match self.kind {
            FamilyKind::Pochhammer => {}
            FamilyKind::Gamma => {
                if !self.lambda.is_positive() {
                    return bad(format!("lambda must be positive, got {}", self.lambda));
                }
            }
            FamilyKind::Flat => {
                if !self.rho.is_positive() {
                    return bad(format!("rho must be positive, got {}", self.rho));
                }
                if self.c_shift.is_negative() {
                    return bad(format!("C must be non-negative, got {}", self.c_shift));
                }
            }
        }
        if !self.d().is_positive() {
            return bad(format!("d = {} must be positive", self.d()));
        }
        if !self.c().is_positive() {
            return bad(format!("c = {} must be positive", self.c()));
        }
        for k in 1..=self.n {
            if !self.delta_hat(k).is_positive() {
                return bad(format!("delta_{k} = {} must be positive", self.delta_hat(k)));
            }
        }
        Ok(())
    }

    pub fn d(&self) -> Rational {
        match self.kind {
            FamilyKind::Pochhammer => (&self.nu + int(1)).recip(),
            FamilyKind::Gamma => self.lambda.clone(),
            FamilyKind::Flat => self.rho.clone(),
        }
    }

    pub fn c(&self) -> Rational {
        match self.kind {
            FamilyKind::Pochhammer => &self.nu / (&self.nu + int(1)),
            FamilyKind::Gamma => &self.nu * &self.lambda,
            FamilyKind::Flat => &self.c_shift + &self.nu * &self.rho,
        }
    }

    /// γ = c/d
    pub fn gamma_ratio(&self) -> Rational {
        self.c() / self.d()
    }

    /// δ̂ₖ for 1 ≤ k ≤ N.
    pub fn delta_hat(&self, k: usize) -> Rational {
        assert!(k >= 1);
        match self.kind {
            FamilyKind::Pochhammer => pochhammer(&(&self.nu + int(1)), k - 1) / factorial(k - 1),
            FamilyKind::Gamma => pochhammer(&self.nu, k) / int(1i64 << k),
            FamilyKind::Flat => {
                let g = self.gamma_ratio();
                pochhammer(&(g + int(1)), k - 1) * int(1i64 << (k - 1))
                    / (factorial(k - 1) * pochhammer(&int((self.n - k + 1) as i64), k - 1))
            }
        }
    }

    /// αₖ² for 1 ≤ k ≤ N.
    pub fn alpha_sq(&self, k: usize) -> Rational {
        assert!(k >= 1);
        let tail = pochhammer(&int((self.n - k + 1) as i64), k - 1);
        match self.kind {
            FamilyKind::Pochhammer => tail / int(1i64 << (k - 1)),
            FamilyKind::Gamma => tail * factorial(k - 1) / int(1i64 << (2 * (k - 1))),
            FamilyKind::Flat => Rational::one(),
        }
    }

    /// εₖ = δ̂ₖ/αₖ², the diagonal of the gauged weight.
    pub fn epsilon(&self, k: usize) -> Rational {
        self.delta_hat(k) / self.alpha_sq(k)
    }

    /// unit(ν+1)/unit(ν) for the global scalar dropped from δ.
    pub fn unit_ratio(&self) -> Rational {
        match self.kind {
            FamilyKind::Pochhammer => Rational::one(),
            FamilyKind::Gamma => &self.lambda * &self.nu,
            FamilyKind::Flat => &self.rho * (self.gamma_ratio() + int(1)),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::json!({
            "family": self.kind.as_str(),
            "N": self.n,
            "nu": format_rational(&self.nu),
        });
        match self.kind {
            FamilyKind::Pochhammer => {}
            FamilyKind::Gamma => {
                v["lambda"] = format_rational(&self.lambda).into();
            }
            FamilyKind::Flat => {
                v["rho"] = format_rational(&self.rho).into();
                v["C"] = format_rational(&self.c_shift).into();
            }
        }
        v
    }
}

impl fmt::Display for WeightFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} N={} nu={}", self.kind, self.n, self.nu)?;
        match self.kind {
            FamilyKind::Pochhammer => Ok(()),
            FamilyKind::Gamma => write!(f, " lambda={}", self.lambda),
            FamilyKind::Flat => write!(f, " rho={} C={}", self.rho, self.c_shift),
        }
    }
}

/// Polynomial part P̂ of the gauged weight e^{−x²}P̂(x).
#[derive(Clone, Debug, PartialEq)]
pub struct GaugedWeight {
    pub family: WeightFamily,
    pub poly_part: RatMatPoly,
}

/// L(x) with entries H_{m−n}(x)/(m−n)! on and below the diagonal.
pub fn build_l(n: usize) -> RatMatPoly {
    let h = hermite_table(n.saturating_sub(1));
    toeplitz_lower(n, &h)
}

/// L(x)⁻¹, with entries G_{m−n}(x)/(m−n)! where G_m(x) = i^m H_m(ix).
pub fn build_l_inverse(n: usize) -> RatMatPoly {
    let g = hermite_imag_table(n.saturating_sub(1));
    toeplitz_lower(n, &g)
}

fn toeplitz_lower(n: usize, polys: &[ScalarPolynomial]) -> RatMatPoly {
    RatMatPoly::from_scalar_entries(n, |i, j| {
        if i >= j {
            polys[i - j].scale(&factorial(i - j).recip())
        } else {
            ScalarPolynomial::zero()
        }
    })
}

/// A = 2 Σ_j E_{j,j−1}
pub fn matrix_a(n: usize) -> Matrix<Rational> {
    Matrix::from_fn(n, n, |i, j| if i == j + 1 { int(2) } else { Rational::zero() })
}

/// J = diag(1, …, N)
pub fn matrix_j(n: usize) -> Matrix<Rational> {
    Matrix::from_fn(n, n, |i, j| if i == j { int(i as i64 + 1) } else { Rational::zero() })
}

/// E = diag(ε₁, …, ε_N)
pub fn weight_diagonal(family: &WeightFamily) -> Matrix<Rational> {
    Matrix::diagonal(&(1..=family.n).map(|k| family.epsilon(k)).collect::<Vec<_>>())
}

/// Entry (m, n) of P̂ (1-based) as Hermite-basis coefficients (index j ↦ H_j).
pub fn weight_entry_closed_form(family: &WeightFamily, m: usize, n: usize) -> Vec<(usize, Rational)> {
    let big_n = int(family.n as i64);
    let g = family.gamma_ratio();
    let d1 = family.delta_hat(1);
    (1..=m.min(n))
        .map(|t| {
            let num = int(1i64 << (t - 1)) * pochhammer(&(-&big_n - &g), t - 1);
            let den = factorial(m - t)
                * factorial(n - t)
                * factorial(t - 1)
                * pochhammer(&(int(1) - &big_n), t - 1);
            (m + n - 2 * t, &d1 * num / den)
        })
        .collect()
}

/// The gauged weight at ν + `nu_shift`, built entrywise from the Hermite
/// expansion of its entries.
pub fn gauged_weight(family: &WeightFamily, nu_shift: usize) -> Result<GaugedWeight> {
    let fam = family.shifted(nu_shift);
    fam.validate()?;
    let n = fam.n;
    let poly_part = RatMatPoly::from_scalar_entries(n, |i, j| {
        hermite_series(&weight_entry_closed_form(&fam, i + 1, j + 1))
    });
    Ok(GaugedWeight {
        family: fam,
        poly_part,
    })
}

/// P̂⁻¹ = (L⁻¹)ᵀ E⁻¹ L⁻¹, an exact matrix polynomial.
pub fn weight_inverse(family: &WeightFamily) -> Result<RatMatPoly> {
    let linv = build_l_inverse(family.n);
    let einv = weight_diagonal(family).inverse()?;
    Ok(&linv.transpose().right_mul(&einv) * &linv)
}

/// Diagonal of H₀ = ∫ e^{−x²}P̂(x) dx.
pub fn zeroth_moment(family: &WeightFamily) -> Vec<PiScalar> {
    let big_n = int(family.n as i64);
    let g = family.gamma_ratio();
    let d1 = family.delta_hat(1);
    (1..=family.n)
        .map(|m| {
            let c = &d1 * int(1i64 << (m - 1)) * pochhammer(&(-&big_n - &g), m - 1)
                / (factorial(m - 1) * pochhammer(&(int(1) - &big_n), m - 1));
            PiScalar::new(c, 1)
        })
        .collect()
}

/// ∫ e^{−x²}p(x) dx / √π, termwise via the Gaussian moments.
pub fn integrate_gaussian(p: &RatMatPoly) -> Matrix<Rational> {
    let mut acc = Matrix::zeros(p.dim(), p.dim());
    for (k, c) in p.coeffs().iter().enumerate() {
        if k % 2 == 0 {
            acc = &acc + &c.scale(&gauss_moment_coeff(k));
        }
    }
    acc
}

/// Φ̂ = d(J + ½(Aᵀ)² − xAᵀ) + c
pub fn pearson_phi(family: &WeightFamily) -> RatMatPoly {
    let n = family.n;
    let (d, c) = (family.d(), family.c());
    let at = matrix_a(n).transpose();
    let j = matrix_j(n);
    let constant = &(&j + &(&at * &at).scale(&rat(1, 2))).scale(&d) + &Matrix::identity(n).scale(&c);
    RatMatPoly::new(n, vec![constant, at.scale(&-d)])
}

/// Ψ̂ = 2x(d(J−N−1) − c) + Aᵀ(c + d(N+1−J)) + ½d·A·J(N−J)
pub fn pearson_psi(family: &WeightFamily) -> RatMatPoly {
    let n = family.n;
    let (d, c) = (family.d(), family.c());
    let a = matrix_a(n);
    let j = matrix_j(n);
    let id = Matrix::identity(n);
    let np1 = id.scale(&int(n as i64 + 1));
    let lead = (&(&j - &np1).scale(&d) - &id.scale(&c)).scale(&int(2));
    let c0 = &(&a.transpose() * &(&id.scale(&c) + &(&np1 - &j).scale(&d)))
        + &(&(&a * &j) * &(&id.scale(&int(n as i64)) - &j)).scale(&(d / int(2)));
    RatMatPoly::new(n, vec![c0, lead])
}

/// Ψ̂ by the division route: P̂⁻¹·[(P̂^{(ν+1)})′ − 2xP̂^{(ν+1)}]·unitRatio.
pub fn pearson_psi_by_division(family: &WeightFamily) -> Result<RatMatPoly> {
    let next = gauged_weight(family, 1)?.poly_part;
    let lhs = gaussian_derivative(&next).scale(&family.unit_ratio());
    Ok(&weight_inverse(family)? * &lhs)
}

/// Φ̂ by the division route: P̂⁻¹·P̂^{(ν+1)}·unitRatio.
pub fn pearson_phi_by_division(family: &WeightFamily) -> Result<RatMatPoly> {
    let next = gauged_weight(family, 1)?.poly_part;
    Ok(&weight_inverse(family)? * &next.scale(&family.unit_ratio()))
}

/// P ↦ P′ − 2xP, i.e. e^{x²}·d/dx(e^{−x²}P).
pub fn gaussian_derivative(p: &RatMatPoly) -> RatMatPoly {
    &p.derivative() - &p.mul_x().scale(&int(2))
}

/// Residuals of both Pearson identities; each must be the zero polynomial.
pub fn pearson_residuals(family: &WeightFamily) -> Result<(RatMatPoly, RatMatPoly)> {
    let w = gauged_weight(family, 0)?.poly_part;
    let w1 = gauged_weight(family, 1)?.poly_part.scale(&family.unit_ratio());
    let r1 = &w1 - &(&w * &pearson_phi(family));
    let r2 = &gaussian_derivative(&w1) - &(&w * &pearson_psi(family));
    Ok((r1, r2))
}

/// Dimensions of {Y : YW(x) = W(x)Y} and {Y : YW(x) = W(x)Yᵀ} for the
/// un-gauged weight, by numeric rank at `sample_count` points.
pub fn commutant_dimension(family: &WeightFamily, sample_count: usize) -> Result<(usize, usize)> {
    let n = family.n;
    if sample_count < n * n {
        return Err(Error::InvalidParameters(format!(
            "need at least N² = {} sample points, got {sample_count}",
            n * n
        )));
    }
    let p = gauged_weight(family, 0)?.poly_part.to_f64();
    let alpha: Vec<f64> = (1..=n)
        .map(|k| crate::exact::to_f64(&family.alpha_sq(k)).sqrt())
        .collect();
    let samples: Vec<Matrix<f64>> = (0..sample_count)
        .map(|i| {
            let x = (2.0 * i as f64 + 1.0 - sample_count as f64) / sample_count as f64 * 1.7 + 0.13;
            let pv = p.evaluate(&x);
            Matrix::from_fn(n, n, |a, b| alpha[a] * alpha[b] * pv.get(a, b))
        })
        .collect();
    Ok((
        null_dimension(&samples, false),
        null_dimension(&samples, true),
    ))
}

// Solution space of Y·W_i = W_i·Y (or W_i·Yᵀ) over all samples.
fn null_dimension(samples: &[Matrix<f64>], transposed: bool) -> usize {
    let n = samples[0].rows();
    let unknowns = n * n;
    let mut sys = DMatrix::<f64>::zeros(samples.len() * unknowns, unknowns);
    for (s, w) in samples.iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                let row = s * unknowns + i * n + j;
                // (YW)_{ij} = Σ_k Y_{ik} W_{kj}
                for k in 0..n {
                    sys[(row, i * n + k)] += w.get(k, j);
                }
                // (WY)_{ij} = Σ_k W_{ik} Y_{kj};  (WYᵀ)_{ij} = Σ_k W_{ik} Y_{jk}
                for k in 0..n {
                    let col = if transposed { j * n + k } else { k * n + j };
                    sys[(row, col)] -= w.get(i, k);
                }
            }
        }
    }
    let sv = sys.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let rank = sv.iter().filter(|&&s| s > 1e-8 * smax.max(1.0)).count();
    unknowns - rank
}
