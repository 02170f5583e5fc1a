//! Gauss–Hermite quadrature and numeric matrix inner products against
//! e^{−xt}·e^{−x²}·P̂(x).

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::matpoly::{Matrix, MatrixPolynomial};

pub const DEFAULT_NODES: usize = 80;

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Highest polynomial degree integrated exactly against e^{−x²}.
    pub fn exact_degree(&self) -> usize {
        2 * self.nodes.len() - 1
    }

    /// Σ wᵢ f(xᵢ), summed over mirrored node pairs so odd integrands cancel exactly.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> f64 {
        let m = self.nodes.len();
        let mut sum = 0.0;
        for i in 0..m / 2 {
            let j = m - 1 - i;
            sum += self.weights[i] * (f(self.nodes[i]) + f(self.nodes[j]));
        }
        if m % 2 == 1 {
            sum += self.weights[m / 2] * f(self.nodes[m / 2]);
        }
        sum
    }
}

/// M-point rule for ∫ f(x) e^{−x²} dx.
///
/// Nodes and weights come from the eigen-decomposition of the Jacobi matrix
/// (zero diagonal, off-diagonal √(k/2)); nodes are then polished by Newton's
/// method and weights recomputed from the Christoffel function.
pub fn gauss_hermite(m: usize) -> Result<QuadratureRule> {
    if m == 0 {
        return Err(Error::InvalidParameters("quadrature needs at least one node".into()));
    }
    let mut d = vec![0.0; m];
    let mut e: Vec<f64> = (1..m).map(|k| (k as f64 / 2.0).sqrt()).collect();
    e.push(0.0);
    let mut z = vec![0.0; m];
    z[0] = 1.0;
    tridiagonal_ql(&mut d, &mut e, &mut z)?;

    let mut pairs: Vec<(f64, f64)> = d
        .iter()
        .zip(&z)
        .map(|(&x, &v)| (x, PI.sqrt() * v * v))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    for pair in pairs.iter_mut() {
        let mut x = pair.0;
        for _ in 0..8 {
            let (pm, pm1) = orthonormal_pair(m, x);
            let dp = (2.0 * m as f64).sqrt() * pm1;
            let step = pm / dp;
            x -= step;
            if step.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        pair.0 = x;
        pair.1 = 1.0 / christoffel_sum(m, x);
    }

    // Enforce exact symmetry about zero.
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        let j = m - 1 - i;
        nodes[i] = 0.5 * (pairs[i].0 - pairs[j].0);
        weights[i] = 0.5 * (pairs[i].1 + pairs[j].1);
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    Ok(QuadratureRule { nodes, weights })
}

// (p̃_M(x), p̃_{M−1}(x)) for the polynomials orthonormal w.r.t. e^{−x²}.
fn orthonormal_pair(m: usize, x: f64) -> (f64, f64) {
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25);
    for k in 0..m {
        let next = (x * cur - (k as f64 / 2.0).sqrt() * prev) / ((k as f64 + 1.0) / 2.0).sqrt();
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

// Σ_{k<M} p̃_k(x)²
fn christoffel_sum(m: usize, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25);
    let mut sum = 0.0;
    for k in 0..m {
        sum += cur * cur;
        let next = (x * cur - (k as f64 / 2.0).sqrt() * prev) / ((k as f64 + 1.0) / 2.0).sqrt();
        prev = cur;
        cur = next;
    }
    sum
}

/// Implicit-shift QL on a symmetric tridiagonal matrix (diagonal `d`,
/// sub-diagonal `e[0..n−1]`). On return `d` holds the eigenvalues and `z`
/// the first components of the normalized eigenvectors, provided `z` started as e₁.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], z: &mut [f64]) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::EigenFailure(l));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// ∫ e^{−xt}e^{−x²} f(x) dx for a matrix polynomial f, by completing the
/// square: nodes shift by −t/2 and the result picks up e^{t²/4}.
pub fn integrate(rule: &QuadratureRule, f: &MatrixPolynomial<f64>, t: f64) -> Result<Matrix<f64>> {
    let deg = f.degree().unwrap_or(0);
    if deg > rule.exact_degree() {
        return Err(Error::UnderResolved {
            nodes: rule.node_count(),
            degree: deg,
        });
    }
    let dim = f.dim();
    let mut acc = Matrix::zeros(dim, dim);
    for (&y, &w) in rule.nodes.iter().zip(&rule.weights) {
        acc = &acc + &f.evaluate(&(y - t / 2.0)).scale(&w);
    }
    Ok(acc.scale(&(t * t / 4.0).exp()))
}

/// ⟨P, Q⟩ = ∫ P(x) e^{−xt}e^{−x²}P̂(x) Q(x)ᵀ dx.
pub fn inner_product(
    p: &MatrixPolynomial<f64>,
    q: &MatrixPolynomial<f64>,
    weight: &MatrixPolynomial<f64>,
    rule: &QuadratureRule,
    t: f64,
) -> Result<Matrix<f64>> {
    let integrand = &(p * weight) * &q.transpose();
    let needed = p.degree().unwrap_or(0) + q.degree().unwrap_or(0) + weight.degree().unwrap_or(0);
    if needed > rule.exact_degree() {
        return Err(Error::UnderResolved {
            nodes: rule.node_count(),
            degree: needed,
        });
    }
    integrate(rule, &integrand, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::gauss_moment;

    #[test]
    fn small_rules() {
        let r1 = gauss_hermite(1).unwrap();
        assert_eq!(r1.nodes, vec![0.0]);
        assert!((r1.weights[0] - PI.sqrt()).abs() < 1e-15);
        let r2 = gauss_hermite(2).unwrap();
        let h = 0.5f64.sqrt();
        assert!((r2.nodes[0] + h).abs() < 1e-15 && (r2.nodes[1] - h).abs() < 1e-15);
        for w in &r2.weights {
            assert!((w - PI.sqrt() / 2.0).abs() < 1e-15);
        }
        let r3 = gauss_hermite(3).unwrap();
        let m4 = r3.apply(|x| x.powi(4));
        assert!((m4 - 0.75 * PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn default_rule_is_exact_on_monomials() {
        let rule = gauss_hermite(DEFAULT_NODES).unwrap();
        assert!((rule.weights.iter().sum::<f64>() - PI.sqrt()).abs() < 1e-12);
        for i in 0..rule.node_count() {
            assert_eq!(rule.nodes[i], -rule.nodes[rule.node_count() - 1 - i]);
        }
        for d in 0..=rule.exact_degree() {
            let exact = gauss_moment(d).to_f64();
            let approx = rule.apply(|x| x.powi(d as i32));
            let scale = exact.abs().max(1.0);
            assert!((approx - exact).abs() <= 1e-12 * scale, "degree {d}: {approx} vs {exact}");
        }
    }

    #[test]
    fn shifted_gaussian_integral() {
        // ∫ e^{−xt}e^{−x²} dx = √π e^{t²/4}
        let rule = gauss_hermite(20).unwrap();
        let one = MatrixPolynomial::<f64>::identity(1);
        for t in [-1.0, 0.5, 2.0] {
            let v = integrate(&rule, &one, t).unwrap();
            assert!((v.get(0, 0) - PI.sqrt() * (t * t / 4.0).exp()).abs() < 1e-13);
        }
    }

    #[test]
    fn under_resolved_is_reported() {
        let rule = gauss_hermite(2).unwrap();
        let p = MatrixPolynomial::monomial(Matrix::<f64>::identity(1), 4);
        assert!(matches!(integrate(&rule, &p, 0.0), Err(Error::UnderResolved { .. })));
    }
}
