//! Physicists' Hermite polynomials, the imaginary-axis variant
//! G_m(x) = i^m H_m(ix), and Hermite linearization coefficients.

use std::fmt;

use num_traits::{One, Zero};

use crate::exact::{binomial, factorial, int, Rational};

/// Polynomial in one variable with rational coefficients; `coeffs[i]` multiplies x^i.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct ScalarPolynomial {
    coeffs: Vec<Rational>,
}

impl ScalarPolynomial {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    pub fn x() -> Self {
        Self::new(vec![Rational::zero(), Rational::one()])
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| int(c)).collect())
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of x^k, zero beyond the degree.
    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    /// Degree, with −1 for the zero polynomial.
    pub fn degree(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) - other.coeff(k)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, a)| a * int(k as i64))
                .collect(),
        )
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, a| acc * x + a)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, a| acc * x + crate::exact::to_f64(a))
    }
}

impl fmt::Display for ScalarPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, a) in self.coeffs.iter().enumerate().rev() {
            if a.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{a}")?,
                1 => write!(f, "({a})x")?,
                _ => write!(f, "({a})x^{k}")?,
            }
        }
        Ok(())
    }
}

/// H_0, …, H_n via H_{k+1} = 2x H_k − 2k H_{k−1}.
pub fn hermite_table(n: usize) -> Vec<ScalarPolynomial> {
    three_term_table(n, 2, 2)
}

/// G_0, …, G_m via G_{k+1} = −2x G_k + 2k G_{k−1}.
pub fn hermite_imag_table(m: usize) -> Vec<ScalarPolynomial> {
    three_term_table(m, -2, -2)
}

// p_{k+1} = a·x·p_k − b·k·p_{k−1}, p_0 = 1
fn three_term_table(n: usize, a: i64, b: i64) -> Vec<ScalarPolynomial> {
    let mut table = vec![ScalarPolynomial::constant(Rational::one())];
    let ax = ScalarPolynomial::from_ints(&[0, a]);
    for k in 0..n {
        let mut next = ax.mul(&table[k]);
        if k > 0 {
            next = next.sub(&table[k - 1].scale(&int(b * k as i64)));
        }
        table.push(next);
    }
    table
}

pub fn hermite(n: usize) -> ScalarPolynomial {
    hermite_table(n).pop().unwrap()
}

pub fn hermite_imag(m: usize) -> ScalarPolynomial {
    hermite_imag_table(m).pop().unwrap()
}

/// H_k·H_l = Σ_r C(k,r)C(l,r) 2^r r! H_{k+l−2r}, as pairs (k+l−2r, coefficient).
pub fn hermite_linearize(k: usize, l: usize) -> Vec<(usize, Rational)> {
    (0..=k.min(l))
        .map(|r| {
            let c = binomial(k, r) * binomial(l, r) * int(1i64 << r) * factorial(r);
            (k + l - 2 * r, c)
        })
        .collect()
}

/// Expands Σ c_j H_j into monomials.
pub fn hermite_series(terms: &[(usize, Rational)]) -> ScalarPolynomial {
    let top = terms.iter().map(|(j, _)| *j).max().unwrap_or(0);
    let table = hermite_table(top);
    terms.iter().fold(ScalarPolynomial::zero(), |acc, (j, c)| {
        acc.add(&table[*j].scale(c))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn hermite_examples() {
        assert_eq!(hermite(0), ScalarPolynomial::from_ints(&[1]));
        assert_eq!(hermite(1), ScalarPolynomial::from_ints(&[0, 2]));
        assert_eq!(hermite(3), ScalarPolynomial::from_ints(&[0, -12, 0, 8]));
        assert_eq!(hermite(6).coeff(6), int(64));
    }

    #[test]
    fn hermite_imag_examples() {
        assert_eq!(hermite_imag(0), ScalarPolynomial::from_ints(&[1]));
        assert_eq!(hermite_imag(1), ScalarPolynomial::from_ints(&[0, -2]));
        assert_eq!(hermite_imag(2), ScalarPolynomial::from_ints(&[2, 0, 4]));
    }

    #[test]
    fn hermite_imag_is_rotated_hermite() {
        // i^m H_m(ix): the x^j coefficient picks up i^{m+j}, which is real since m−j is even.
        for m in 0..12 {
            let h = hermite(m);
            let g = hermite_imag(m);
            for j in 0..=m {
                if (m + j) % 2 == 1 {
                    assert!(h.coeff(j).is_zero());
                    continue;
                }
                let sign = if ((m + j) / 2) % 2 == 0 { 1 } else { -1 };
                assert_eq!(g.coeff(j), h.coeff(j) * int(sign));
            }
        }
    }

    #[test]
    fn linearize_examples() {
        assert_eq!(hermite_linearize(0, 5), vec![(5, int(1))]);
        assert_eq!(hermite_linearize(1, 1), vec![(2, int(1)), (0, int(2))]);
        assert_eq!(
            hermite_linearize(2, 2),
            vec![(4, int(1)), (2, int(8)), (0, int(8))]
        );
    }

    #[test]
    fn linearize_matches_products() {
        let h = hermite_table(14);
        for k in 0..7 {
            for l in 0..7 {
                assert_eq!(hermite_series(&hermite_linearize(k, l)), h[k].mul(&h[l]));
            }
        }
    }

    #[test]
    fn inverse_pair_and_derivative_ladder() {
        let h = hermite_table(20);
        let g = hermite_imag_table(20);
        for p in 0..=20 {
            let sum = (0..=p).fold(ScalarPolynomial::zero(), |acc, m| {
                acc.add(&g[m].mul(&h[p - m]).scale(&(factorial(m) * factorial(p - m)).recip()))
            });
            let expected = if p == 0 {
                ScalarPolynomial::constant(int(1))
            } else {
                ScalarPolynomial::zero()
            };
            assert_eq!(sum, expected, "p = {p}");
        }
        for n in 1..=20 {
            assert_eq!(h[n].derivative(), h[n - 1].scale(&int(2 * n as i64)));
        }
    }

    #[test]
    fn zero_polynomial_degree() {
        assert_eq!(ScalarPolynomial::zero().degree(), -1);
        assert_eq!(ScalarPolynomial::new(vec![int(0), int(0)]).degree(), -1);
        assert_eq!(ScalarPolynomial::x().eval(&rat(3, 2)), rat(3, 2));
    }
}
