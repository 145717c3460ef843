use serde::Serialize;

use super::frame::gram;
use super::{BasisIndex, LazyOp, SparseVec};
use crate::error::{Error, Result};

/// Outcome of one window check.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub deviation: f64,
    pub tol: f64,
    pub passed: bool,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, deviation: f64, tol: f64) -> Self {
        CheckReport {
            name: name.into(),
            deviation,
            tol,
            passed: deviation <= tol,
        }
    }

    pub fn into_result(self) -> Result<CheckReport> {
        if self.passed {
            Ok(self)
        } else {
            Err(Error::CheckFailed(format!(
                "{}: deviation {:e} > {:e}",
                self.name, self.deviation, self.tol
            )))
        }
    }
}

/// Default tolerance for exact model identities.
pub const EXACT_TOL: f64 = 1e-13;

fn max_diff(a: &SparseVec, b: &SparseVec) -> f64 {
    a.sub(b).max_abs()
}

/// `max |<V e_j, V e_i> - delta_ij|` over the window.
pub fn isometry_deviation(op: &LazyOp, window: &[BasisIndex]) -> f64 {
    let imgs: Vec<SparseVec> = window.iter().map(|i| op.apply_basis(i)).collect();
    let g = gram(&imgs);
    let n = g.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - d).norm());
        }
    }
    worst
}

/// Isometry of both `op` and `op*` on the window (same scheme required).
pub fn unitary_deviation(op: &LazyOp, window: &[BasisIndex]) -> f64 {
    isometry_deviation(op, window).max(isometry_deviation(&op.adjoint(), window))
}

/// `max |(ab - ba) e_i|`.
pub fn commutation_deviation(a: &LazyOp, b: &LazyOp, window: &[BasisIndex]) -> f64 {
    window
        .iter()
        .map(|i| max_diff(&a.apply_unchecked(&b.apply_basis(i)), &b.apply_unchecked(&a.apply_basis(i))))
        .fold(0.0, f64::max)
}

/// `max |(a b* - b* a) e_i|`.
pub fn double_commutation_deviation(a: &LazyOp, b: &LazyOp, window: &[BasisIndex]) -> f64 {
    commutation_deviation(a, &b.adjoint(), window)
}

/// Compares `<op e_i, e_j>` with `conj <op* e_j, e_i>` on every pair where
/// either side is nonzero, starting from the window on both sides.
pub fn adjoint_consistency(op: &LazyOp, window: &[BasisIndex]) -> f64 {
    let adj = op.adjoint();
    let mut worst: f64 = 0.0;
    for i in window {
        for (j, a) in op.apply_basis(i).entries() {
            let b = adj.apply_basis(j).get(i).conj();
            worst = worst.max((a - b).norm());
        }
    }
    if op.domain() == op.codomain() {
        for j in window {
            for (i, b) in adj.apply_basis(j).entries() {
                let a = op.apply_basis(i).get(j).conj();
                worst = worst.max((a - b).norm());
            }
        }
    }
    worst
}

/// Full battery for a pair of isometries on one window.
pub fn pair_checks(v1: &LazyOp, v2: &LazyOp, window: &[BasisIndex], tol: f64) -> Vec<CheckReport> {
    vec![
        CheckReport::new("adjoint V1", adjoint_consistency(v1, window), tol),
        CheckReport::new("adjoint V2", adjoint_consistency(v2, window), tol),
        CheckReport::new("isometry V1", isometry_deviation(v1, window), tol),
        CheckReport::new("isometry V2", isometry_deviation(v2, window), tol),
        CheckReport::new("commutation", commutation_deviation(v1, v2, window), tol),
    ]
}
