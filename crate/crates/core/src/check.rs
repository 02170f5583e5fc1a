use crate::matpoly::RatMatPoly;

/// Outcome of an exact identity check: passes iff the residual is the zero polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactCheck {
    pub label: String,
    pub residual: RatMatPoly,
}

impl ExactCheck {
    pub fn new(label: impl Into<String>, residual: RatMatPoly) -> Self {
        Self {
            label: label.into(),
            residual,
        }
    }

    /// Residual of lhs − rhs.
    pub fn difference(label: impl Into<String>, lhs: &RatMatPoly, rhs: &RatMatPoly) -> Self {
        Self::new(label, lhs - rhs)
    }

    pub fn passed(&self) -> bool {
        self.residual.is_zero()
    }
}
