use serde::{Deserialize, Serialize};

/// Outcome of one identity check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub identity: String,
    pub t: f64,
    pub value: f64,
    /// `|LHS| + |RHS| + 1` for the terms of the identity.
    pub scale: f64,
    /// Effective tolerance `max(abs_tol, rel_tol · scale)`.
    pub tolerance: f64,
    pub pass: bool,
    /// Change of the value between the 16- and 12-point ray rules.
    pub quadrature_error: f64,
}

impl ResidualReport {
    /// Passes iff `|value| ≤ tolerance`.
    pub fn two_sided(
        identity: &str,
        t: f64,
        value: f64,
        scale: f64,
        abs_tol: f64,
        rel_tol: f64,
        quadrature_error: f64,
    ) -> Self {
        let tolerance = abs_tol.max(rel_tol * scale);
        Self {
            identity: identity.to_owned(),
            t,
            value,
            scale,
            tolerance,
            pass: value.abs() <= tolerance,
            quadrature_error,
        }
    }

    /// Passes iff `value ≥ −tolerance`.
    pub fn lower_bound(
        identity: &str,
        t: f64,
        value: f64,
        scale: f64,
        abs_tol: f64,
        rel_tol: f64,
        quadrature_error: f64,
    ) -> Self {
        let tolerance = abs_tol.max(rel_tol * scale);
        Self {
            identity: identity.to_owned(),
            t,
            value,
            scale,
            tolerance,
            pass: value >= -tolerance,
            quadrature_error,
        }
    }
}
