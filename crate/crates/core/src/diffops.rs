//! Right-acting second-order differential operators with the monic
//! polynomials as eigenfunctions, and checks of their symmetry with
//! respect to the gauged weight.

use num_traits::Signed;
use rayon::prelude::*;

use crate::check::ExactCheck;
use crate::error::Result;
use crate::exact::{int, Rational};
use crate::matpoly::{Matrix, MatrixPolynomial, RatMatPoly, RightDiffOp};
use crate::mvops::ladder_k;
use crate::quad::{inner_product, QuadratureRule};
use crate::weight::{
    build_l, gauged_weight, gaussian_derivative, matrix_a, matrix_j, pearson_phi, pearson_psi, weight_diagonal,
    WeightFamily,
};

pub type RatDiffOp = RightDiffOp<Rational>;

pub const DEFAULT_DEGREE_CAP: usize = 10;

/// D̂ with F₂ = I, F₁ = −2x + 2A, F₀ = −2J.
pub fn operator_d(family: &WeightFamily) -> RatDiffOp {
    let n = family.n;
    let f1 = RatMatPoly::new(n, vec![matrix_a(n).scale(&int(2)), Matrix::identity(n).scale(&int(-2))]);
    let f0 = RatMatPoly::constant(matrix_j(n).scale(&int(-2)));
    RightDiffOp {
        f2: RatMatPoly::identity(n),
        f1,
        f0,
    }
}

/// Eigenvalue −2n − 2J of D̂ on Pₙ.
pub fn operator_d_eigenvalue(dim: usize, n: usize) -> Matrix<Rational> {
    &Matrix::identity(dim).scale(&int(-2 * n as i64)) - &matrix_j(dim).scale(&int(2))
}

/// 𝒟̂ = (d²/dx²)Φ̂ᵀ + (d/dx)Ψ̂ᵀ.
pub fn operator_script_d(family: &WeightFamily) -> RatDiffOp {
    RightDiffOp {
        f2: pearson_phi(family).transpose(),
        f1: pearson_psi(family).transpose(),
        f0: RatMatPoly::zero(family.n),
    }
}

/// Eigenvalue n·K of 𝒟̂ on Pₙ.
pub fn operator_script_d_eigenvalue(family: &WeightFamily, n: usize) -> Matrix<Rational> {
    ladder_k(family, 0).scale(&int(n as i64))
}

/// F₂ = Φ̂ᵀ, F₁ = Φ̂′ᵀ + Ψ̂ᵀ, F₀ = Ψ̂′ᵀ: the operator Q ↦ (Q·S)′ whose
/// eigenfunctions are the polynomials at ν + 1.
pub fn darboux_operator(family: &WeightFamily) -> RatDiffOp {
    let phi = pearson_phi(family).transpose();
    let psi = pearson_psi(family).transpose();
    RightDiffOp {
        f1: &phi.derivative() + &psi,
        f0: psi.derivative(),
        f2: phi,
    }
}

/// Eigenvalue (n+1)K^{(ν)} of the Darboux operator on Pₙ^{(ν+1)}.
pub fn darboux_eigenvalue(family: &WeightFamily, n: usize) -> Matrix<Rational> {
    ladder_k(family, 0).scale(&int(n as i64 + 1))
}

/// P·op − Λ·P
pub fn eigen_check(label: impl Into<String>, p: &RatMatPoly, op: &RatDiffOp, lambda: &Matrix<Rational>) -> Result<ExactCheck> {
    Ok(ExactCheck::difference(label, &op.apply(p)?, &p.left_mul(lambda)))
}

/// D̃ − (d^{(ν)}/d^{(ν+1)})𝒟̂^{(ν+1)} against d^{(ν)}(−D̂ − 2(N+1+γ)),
/// compared coefficient by coefficient.
pub fn darboux_relation_check(family: &WeightFamily) -> Result<[ExactCheck; 3]> {
    let next = family.shifted(1);
    let d = family.d();
    let lhs = darboux_operator(family).checked_sub(&operator_script_d(&next).scale(&(&d / next.d())))?;
    let shift = int(-2) * (int(family.n as i64 + 1) + family.gamma_ratio());
    let mut rhs = operator_d(family).scale(&int(-1));
    rhs.f0 = &rhs.f0 + &RatMatPoly::constant(Matrix::identity(family.n).scale(&shift));
    let rhs = rhs.scale(&d);
    Ok([
        ExactCheck::difference("darboux F2", &lhs.f2, &rhs.f2),
        ExactCheck::difference("darboux F1", &lhs.f1, &rhs.f1),
        ExactCheck::difference("darboux F0", &lhs.f0, &rhs.f0),
    ])
}

/// One symmetry condition: an exact residual, or a numeric boundary value.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryReport {
    pub label: String,
    pub exact: Option<ExactCheck>,
    pub boundary_value: Option<f64>,
}

impl SymmetryReport {
    pub fn passed(&self) -> bool {
        match (&self.exact, self.boundary_value) {
            (Some(c), _) => c.passed(),
            (None, Some(v)) => v <= BOUNDARY_TOLERANCE,
            (None, None) => false,
        }
    }

    pub fn residual_norm(&self) -> f64 {
        match (&self.exact, self.boundary_value) {
            (Some(c), _) => c.residual.to_f64().max_abs_coeff(),
            (None, Some(v)) => v,
            (None, None) => f64::NAN,
        }
    }
}

const BOUNDARY_TOLERANCE: f64 = 1e-100;
const BOUNDARY_POINT: f64 = 20.0;

/// Symmetry of `op` with respect to e^{−x²}W(x), W a matrix polynomial:
///   F₂W = WF₂ᵀ,
///   2E(F₂W) − F₁W = WF₁ᵀ,
///   E(E(F₂W)) − E(F₁W) + F₀W = WF₀ᵀ,
/// with E(P) = P′ − 2xP, together with the boundary terms e^{−x²}F₂W and
/// e^{−x²}(E(F₂W) − F₁W) evaluated at ±20.
pub fn symmetry_conditions_for(op: &RatDiffOp, w: &RatMatPoly) -> Vec<SymmetryReport> {
    let f2w = &op.f2 * w;
    let f1w = &op.f1 * w;
    let f0w = &op.f0 * w;
    let e_f2w = gaussian_derivative(&f2w);
    let c1 = ExactCheck::difference("symmetry F2", &f2w, &(w * &op.f2.transpose()));
    let c2 = ExactCheck::difference("symmetry F1", &(&e_f2w.scale(&int(2)) - &f1w), &(w * &op.f1.transpose()));
    let c3 = ExactCheck::difference(
        "symmetry F0",
        &(&(&gaussian_derivative(&e_f2w) - &gaussian_derivative(&f1w)) + &f0w),
        &(w * &op.f0.transpose()),
    );
    let flux = &e_f2w - &f1w;
    let boundary = |p: &RatMatPoly| {
        let p = p.to_f64();
        let g = (-BOUNDARY_POINT * BOUNDARY_POINT).exp();
        [BOUNDARY_POINT, -BOUNDARY_POINT]
            .iter()
            .map(|x| p.evaluate(x).max_abs() * g)
            .fold(0.0, f64::max)
    };
    let mut out: Vec<SymmetryReport> = [c1, c2, c3]
        .into_iter()
        .map(|c| SymmetryReport {
            label: c.label.clone(),
            exact: Some(c),
            boundary_value: None,
        })
        .collect();
    out.push(SymmetryReport {
        label: "boundary F2 W".into(),
        exact: None,
        boundary_value: Some(boundary(&f2w)),
    });
    out.push(SymmetryReport {
        label: "boundary flux".into(),
        exact: None,
        boundary_value: Some(boundary(&flux)),
    });
    out
}

/// Symmetry of `op` with respect to the gauged weight of `family`.
pub fn symmetry_conditions_check(family: &WeightFamily, op: &RatDiffOp) -> Result<Vec<SymmetryReport>> {
    let w = gauged_weight(family, 0)?.poly_part;
    Ok(symmetry_conditions_for(op, &w))
}

/// The operator F̃ with F₂L = LF̃₂, F₁L = 2L′F̃₂ + LF̃₁,
/// F₀L = L″F̃₂ + L′F̃₁ + LF̃₀, acting on the diagonal weight e^{−x²}E.
pub fn conjugated_operator(family: &WeightFamily, op: &RatDiffOp) -> RatDiffOp {
    let n = family.n;
    let l = build_l(n);
    let linv = crate::weight::build_l_inverse(n);
    let l1 = l.derivative();
    let l2 = l1.derivative();
    let t2 = &(&linv * &op.f2) * &l;
    let t1 = &linv * &(&(&op.f1 * &l) - &(&l1 * &t2).scale(&int(2)));
    let t0 = &linv * &(&(&(&op.f0 * &l) - &(&l2 * &t2)) - &(&l1 * &t1));
    RightDiffOp { f2: t2, f1: t1, f0: t0 }
}

/// Symmetry of the conjugated operator with respect to e^{−x²}E.
pub fn conjugated_symmetry_check(family: &WeightFamily, op: &RatDiffOp) -> Vec<SymmetryReport> {
    let tilde = conjugated_operator(family, op);
    let e = RatMatPoly::constant(weight_diagonal(family));
    symmetry_conditions_for(&tilde, &e)
}

/// Basis x^k E_{ij} of matrix polynomials of degree ≤ `degree_cap`.
pub fn monomial_basis(dim: usize, degree_cap: usize) -> Vec<RatMatPoly> {
    let mut out = Vec::with_capacity(dim * dim * (degree_cap + 1));
    for k in 0..=degree_cap {
        for i in 0..dim {
            for j in 0..dim {
                let mut m = Matrix::zeros(dim, dim);
                m.set(i, j, int(1));
                out.push(MatrixPolynomial::monomial(m, k));
            }
        }
    }
    out
}

/// Largest coefficient of Q·a·b − Q·b·a over the monomial basis; zero iff the
/// operators commute on polynomials of degree ≤ `degree_cap`.
pub fn commutator_on_basis(a: &RatDiffOp, b: &RatDiffOp, degree_cap: usize) -> Result<Rational> {
    let basis = monomial_basis(a.dim(), degree_cap);
    let norms = basis
        .par_iter()
        .map(|q| {
            let ab = b.apply(&a.apply(q)?)?;
            let ba = a.apply(&b.apply(q)?)?;
            let diff = &ab - &ba;
            Ok(diff
                .coeffs()
                .iter()
                .flat_map(|m| m.entries().iter().map(|v| v.abs()).collect::<Vec<_>>())
                .max()
                .unwrap_or_else(|| int(0)))
        })
        .collect::<Result<Vec<Rational>>>()?;
    Ok(norms.into_iter().max().unwrap_or_else(|| int(0)))
}

/// |⟨G·op, H⟩ − ⟨G, H·op⟩| (max entry) for the gauged weight, by quadrature.
pub fn quadrature_symmetry_defect(
    family: &WeightFamily,
    op: &RatDiffOp,
    g: &RatMatPoly,
    h: &RatMatPoly,
    rule: &QuadratureRule,
) -> Result<f64> {
    let w = gauged_weight(family, 0)?.poly_part.to_f64();
    let lhs = inner_product(&op.apply(g)?.to_f64(), &h.to_f64(), &w, rule, 0.0)?;
    let rhs = inner_product(&g.to_f64(), &op.apply(h)?.to_f64(), &w, rule, 0.0)?;
    Ok((&lhs - &rhs).max_abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::mvops::mvop_by_recurrence;

    fn families(n: usize) -> Vec<WeightFamily> {
        vec![
            WeightFamily::pochhammer(n, int(1)).unwrap(),
            WeightFamily::gamma(n, rat(3, 2), int(1)).unwrap(),
            WeightFamily::flat(n, rat(1, 2), int(1), rat(1, 2)).unwrap(),
        ]
    }

    #[test]
    fn scalar_hermite_operator() {
        let fam = WeightFamily::pochhammer(1, int(1)).unwrap();
        let op = operator_d(&fam);
        assert_eq!(op.f1, RatMatPoly::x(1).scale(&int(-2)));
        assert_eq!(op.f0, RatMatPoly::identity(1).scale(&int(-2)));
        let seq = mvop_by_recurrence(&fam, 5).unwrap();
        for n in 0..=5 {
            let lam = operator_d_eigenvalue(1, n);
            assert_eq!(lam.get(0, 0), &int(-2 * n as i64 - 2));
            assert!(eigen_check("d", &seq.polys[n], &op, &lam).unwrap().passed());
        }
    }

    #[test]
    fn eigenvalue_equations() {
        for n_dim in 1..=4 {
            for fam in families(n_dim) {
                let seq = mvop_by_recurrence(&fam, 5).unwrap();
                let up = mvop_by_recurrence(&fam.shifted(1), 5).unwrap();
                let (d, sd, dar) = (operator_d(&fam), operator_script_d(&fam), darboux_operator(&fam));
                for n in 0..=5 {
                    let p = &seq.polys[n];
                    assert!(eigen_check("D", p, &d, &operator_d_eigenvalue(n_dim, n)).unwrap().passed());
                    assert!(eigen_check("SD", p, &sd, &operator_script_d_eigenvalue(&fam, n)).unwrap().passed());
                    assert!(eigen_check("dar", &up.polys[n], &dar, &darboux_eigenvalue(&fam, n)).unwrap().passed());
                }
            }
        }
    }

    #[test]
    fn darboux_at_zero_and_relation() {
        for fam in families(3) {
            let dar = darboux_operator(&fam);
            let i = RatMatPoly::identity(3);
            let lc = pearson_psi(&fam).coeff(1).transpose();
            assert_eq!(dar.apply(&i).unwrap(), RatMatPoly::constant(lc));
            for c in darboux_relation_check(&fam).unwrap() {
                assert!(c.passed(), "{}", c.label);
            }
        }
    }

    #[test]
    fn eigenvalue_of_d_is_independent_of_parameters() {
        let a = operator_d(&WeightFamily::pochhammer(3, rat(1, 2)).unwrap());
        let b = operator_d(&WeightFamily::gamma(3, rat(7, 2), int(2)).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn symmetry_reports() {
        let fam = WeightFamily::pochhammer(2, int(1)).unwrap();
        for r in symmetry_conditions_check(&fam, &operator_d(&fam)).unwrap() {
            assert!(r.passed(), "{}", r.label);
        }
        for fam in families(3) {
            for op in [operator_d(&fam), operator_script_d(&fam)] {
                assert!(symmetry_conditions_check(&fam, &op).unwrap().iter().all(SymmetryReport::passed));
                assert!(conjugated_symmetry_check(&fam, &op).iter().all(SymmetryReport::passed));
            }
        }
        let mut bad = operator_d(&fam);
        let mut e12 = Matrix::zeros(2, 2);
        e12.set(0, 1, int(1));
        bad.f1 = &bad.f1 + &RatMatPoly::constant(e12);
        let reports = symmetry_conditions_check(&fam, &bad).unwrap();
        assert!(reports[0].passed());
        assert!(!reports[1].passed());
        assert!(!conjugated_symmetry_check(&fam, &bad).iter().all(SymmetryReport::passed));
    }

    #[test]
    fn conjugated_d_is_diagonal_hermite() {
        for fam in families(4) {
            let t = conjugated_operator(&fam, &operator_d(&fam));
            assert_eq!(t.f2, RatMatPoly::identity(4));
            assert_eq!(t.f1, RatMatPoly::x(4).scale(&int(-2)));
            assert_eq!(t.f0, RatMatPoly::constant(matrix_j(4).scale(&int(-2))));
        }
    }

    #[test]
    fn operators_commute() {
        for fam in families(2) {
            let v = commutator_on_basis(&operator_d(&fam), &operator_script_d(&fam), DEFAULT_DEGREE_CAP).unwrap();
            assert_eq!(v, int(0));
        }
        let fam = WeightFamily::pochhammer(2, int(1)).unwrap();
        let mut bad = operator_script_d(&fam);
        bad.f0 = RatMatPoly::constant(matrix_a(2));
        let v = commutator_on_basis(&operator_d(&fam), &bad, 3).unwrap();
        assert!(v > int(0));
    }

    #[test]
    fn quadrature_symmetry() {
        let rule = crate::quad::gauss_hermite(crate::quad::DEFAULT_NODES).unwrap();
        for fam in families(3) {
            let g = RatMatPoly::new(
                3,
                (0..=6).map(|k| Matrix::from_fn(3, 3, |i, j| rat((i * 3 + j + k) as i64 % 7 - 3, 5))).collect(),
            );
            let h = RatMatPoly::new(
                3,
                (0..=5).map(|k| Matrix::from_fn(3, 3, |i, j| rat((2 * i + j * k) as i64 % 5 - 2, 3))).collect(),
            );
            for op in [operator_d(&fam), operator_script_d(&fam)] {
                let defect = quadrature_symmetry_defect(&fam, &op, &g, &h, &rule).unwrap();
                assert!(defect <= 1e-10, "{defect}");
            }
        }
    }
}
