//! Exact scalars: big rationals, √π-tagged rationals, Pochhammer symbols and
//! terminating ₃F₂ series at unit argument.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary precision rational, always in lowest terms with positive denominator.
pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Formats as `"p/q"`, also for integers (`"3/1"`).
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"p/q"` or `"p"`. Decimal notation is rejected.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::ParseRational(s.to_string());
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let p = BigInt::from_str(p).map_err(|_| bad())?;
    let q = BigInt::from_str(q).map_err(|_| bad())?;
    if q.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(p, q))
}

/// 2^k for any integer k.
pub fn pow2(k: i64) -> Rational {
    let p = Rational::from_integer(BigInt::from(1) << k.unsigned_abs());
    if k < 0 {
        p.recip()
    } else {
        p
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn factorial(n: usize) -> Rational {
    (1..=n as i64).fold(Rational::one(), |acc, k| acc * int(k))
}

pub fn binomial(n: usize, k: usize) -> Rational {
    if k > n {
        return Rational::zero();
    }
    pochhammer(&int((n - k + 1) as i64), k) / factorial(k)
}

/// Rising factorial a(a+1)···(a+k−1); the empty product for k = 0.
pub fn pochhammer(a: &Rational, k: usize) -> Rational {
    let mut acc = Rational::one();
    let mut f = a.clone();
    for _ in 0..k {
        acc *= &f;
        f += Rational::one();
    }
    acc
}

/// If `a` is a non-positive integer −m, returns m.
fn nonpositive_integer(a: &Rational) -> Option<usize> {
    if a.is_integer() && !a.is_positive() {
        (-a.to_integer()).to_usize()
    } else {
        None
    }
}

/// Σ_j (a)_j(b)_j(c)_j / ((d)_j(e)_j j!), summed term by term up to the
/// termination index given by the smallest non-positive integer numerator.
pub fn hyp3f2_terminating(
    a: &Rational,
    b: &Rational,
    c: &Rational,
    d: &Rational,
    e: &Rational,
) -> Result<Rational> {
    let stop = [a, b, c]
        .iter()
        .filter_map(|p| nonpositive_integer(p))
        .min()
        .ok_or(Error::DivergentSeries)?;
    let mut sum = Rational::zero();
    let mut term = Rational::one();
    for j in 0..=stop {
        if j > 0 {
            let jj = int(j as i64 - 1);
            let den = (d + &jj) * (e + &jj) * int(j as i64);
            if den.is_zero() {
                return Err(Error::PoleInDenominator { index: j });
            }
            term = term * (a + &jj) * (b + &jj) * (c + &jj) / den;
        }
        sum += &term;
    }
    Ok(sum)
}

/// Rational multiple of a power of √π.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PiScalar {
    coeff: Rational,
    pi_power: i32,
}

impl PiScalar {
    pub fn new(coeff: Rational, pi_power: i32) -> Self {
        let pi_power = if coeff.is_zero() { 0 } else { pi_power };
        Self { coeff, pi_power }
    }

    pub fn zero() -> Self {
        Self::new(Rational::zero(), 0)
    }

    pub fn coeff(&self) -> &Rational {
        &self.coeff
    }

    pub fn pi_power(&self) -> i32 {
        self.pi_power
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn checked_add(&self, other: &PiScalar) -> Result<PiScalar> {
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.pi_power != other.pi_power {
            return Err(Error::PiPowerMismatch {
                left: self.pi_power,
                right: other.pi_power,
            });
        }
        Ok(PiScalar::new(&self.coeff + &other.coeff, self.pi_power))
    }

    pub fn mul(&self, other: &PiScalar) -> PiScalar {
        PiScalar::new(&self.coeff * &other.coeff, self.pi_power + other.pi_power)
    }

    pub fn scale(&self, r: &Rational) -> PiScalar {
        PiScalar::new(&self.coeff * r, self.pi_power)
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.coeff) * std::f64::consts::PI.sqrt().powi(self.pi_power)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "coeff": format_rational(&self.coeff), "piPower": self.pi_power })
    }
}

impl fmt::Display for PiScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pi_power {
            0 => write!(f, "{}", self.coeff),
            1 => write!(f, "{}·√π", self.coeff),
            p => write!(f, "{}·√π^{}", self.coeff, p),
        }
    }
}

/// ∫ x^k e^{−x²} dx over the real line.
pub fn gauss_moment(k: usize) -> PiScalar {
    if k % 2 == 1 {
        return PiScalar::zero();
    }
    // m_k = (k−1)/2 · m_{k−2}
    let mut m = Rational::one();
    let mut j = 2;
    while j <= k {
        m *= rat(j as i64 - 1, 2);
        j += 2;
    }
    PiScalar::new(m, 1)
}

/// Rational part of [`gauss_moment`], i.e. the moment divided by √π.
pub fn gauss_moment_coeff(k: usize) -> Rational {
    gauss_moment(k).coeff
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pochhammer_examples() {
        assert_eq!(pochhammer(&rat(7, 3), 0), int(1));
        assert_eq!(pochhammer(&int(-3), 1), int(-3));
        assert_eq!(pochhammer(&rat(1, 2), 3), rat(15, 8));
        assert_eq!(pochhammer(&int(-2), 3), int(0));
    }

    fn brute_3f2(p: [Rational; 3], q: [Rational; 2], terms: usize) -> Rational {
        (0..terms)
            .map(|j| {
                p.iter().map(|a| pochhammer(a, j)).product::<Rational>()
                    / (q.iter().map(|b| pochhammer(b, j)).product::<Rational>() * factorial(j))
            })
            .sum()
    }

    #[test]
    fn hyp3f2_examples() {
        let one = int(1);
        assert_eq!(
            hyp3f2_terminating(&int(0), &rat(3, 7), &int(5), &rat(1, 2), &int(9)).unwrap(),
            one
        );
        assert_eq!(
            hyp3f2_terminating(&int(-1), &one, &one, &one, &one).unwrap(),
            int(0)
        );
        let oracle = brute_3f2([int(-2), int(-1), int(3)], [int(1), int(2)], 6);
        assert_eq!(
            hyp3f2_terminating(&int(-2), &int(-1), &int(3), &int(1), &int(2)).unwrap(),
            oracle
        );
        // 1 + (−2)(−1)(3)/(1·2·1); (−1)_2 = 0 ends the series
        assert_eq!(oracle, int(4));
    }

    #[test]
    fn hyp3f2_errors() {
        assert_eq!(
            hyp3f2_terminating(&rat(1, 2), &int(1), &int(2), &int(3), &int(4)),
            Err(Error::DivergentSeries)
        );
        assert_eq!(
            hyp3f2_terminating(&int(-3), &int(1), &int(1), &int(-1), &int(1)),
            Err(Error::PoleInDenominator { index: 2 })
        );
    }

    #[test]
    fn gauss_moments() {
        assert_eq!(gauss_moment(0), PiScalar::new(int(1), 1));
        assert!(gauss_moment(1).is_zero());
        assert_eq!(gauss_moment(4), PiScalar::new(rat(3, 4), 1));
        for m in 1..12 {
            let ratio = gauss_moment(2 * m).coeff() / gauss_moment(2 * m - 2).coeff();
            assert_eq!(ratio, rat(2 * m as i64 - 1, 2));
        }
    }

    #[test]
    fn pi_scalar_canonical_zero_and_mismatch() {
        let z = PiScalar::new(int(0), 3);
        assert_eq!(z.pi_power(), 0);
        let a = PiScalar::new(int(1), 1);
        let b = PiScalar::new(int(2), 2);
        assert!(a.checked_add(&b).is_err());
        assert_eq!(a.checked_add(&z).unwrap(), a);
        assert_eq!(a.mul(&a), PiScalar::new(int(1), 2));
    }

    #[test]
    fn rational_text_roundtrip() {
        assert_eq!(format_rational(&int(3)), "3/1");
        assert_eq!(parse_rational("-6/4").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational("5").unwrap(), int(5));
        assert!(parse_rational("0.5").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    proptest::proptest! {
        #[test]
        fn pochhammer_splits(p in -20i64..20, q in 1i64..7, j in 0usize..6, k in 0usize..6) {
            let a = rat(p, q);
            let lhs = pochhammer(&a, j + k);
            let rhs = pochhammer(&a, j) * pochhammer(&(&a + int(j as i64)), k);
            proptest::prop_assert_eq!(lhs, rhs);
        }
    }
}
