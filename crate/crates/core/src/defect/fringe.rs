//! Fringe operators `F1 = P_{ker V1*} V2 |ker V1*` and `F2 = P_{ker V2*} V1 |ker V2*`.

use serde::Serialize;

use super::{band, KERNEL_TOL, SUBSPACE_TOL};
use crate::bcl::DefectClass;
use crate::linops::dense::{self, CMat};
use crate::linops::{kernel_in_window, Frame, LazyOp};
use crate::spaces::window;

#[derive(Clone, Debug, Serialize)]
pub struct FringeReport {
    pub grade: u32,
    /// `dim ker V1*`, `dim ker V2*` on the window.
    pub kernel_dims: [usize; 2],
    /// `||F_i^* F_i - I||` on the window.
    pub isometry_deviation: [f64; 2],
    /// `||F_i F_i^* - I||` on the window, via the compressed adjoint.
    pub coisometry_deviation: [f64; 2],
    pub max_entry: [f64; 2],
    pub class: DefectClass,
}

/// `<op k_j, k'_i>` for `k_j` in `src` and `k'_i` in `dst`.
fn between(op: &LazyOp, src: &Frame, dst: &Frame) -> CMat {
    let dv = dst.vectors();
    let sv = src.vectors();
    let mut m = CMat::zeros(dv.len(), sv.len());
    for (j, s) in sv.iter().enumerate() {
        let img = op.apply_unchecked(s);
        for (i, d) in dv.iter().enumerate() {
            m[(i, j)] = img.inner(d);
        }
    }
    m
}

/// `(F, F~)` with `F = P_K a |K` and `F~ = P_K a* |K`, both as rectangular
/// matrices from `K` on the grade window into `K` on the enlarged window.
fn fringe_pair(kernel_of: &LazyOp, a: &LazyOp, grade: u32) -> (CMat, CMat, usize) {
    let s = kernel_of.domain().clone();
    let adj = kernel_of.adjoint();
    let small = kernel_in_window(&adj, &window(&s, grade), KERNEL_TOL);
    let big = kernel_in_window(&adj, &window(&s, grade + band(a)), KERNEL_TOL);
    (between(a, &small, &big), between(&a.adjoint(), &small, &big), small.dim())
}

pub fn fringe_matrices(v1: &LazyOp, v2: &LazyOp, grade: u32) -> FringeReport {
    let (f1, g1, d1) = fringe_pair(v1, v2, grade);
    let (f2, g2, d2) = fringe_pair(v2, v1, grade);
    let iso = [dense::isometry_deviation(&f1), dense::isometry_deviation(&f2)];
    let coiso = [dense::isometry_deviation(&g1), dense::isometry_deviation(&g2)];
    let max_entry = [dense::max_abs(&f1), dense::max_abs(&f2)];
    let ok = |x: f64| x <= SUBSPACE_TOL;
    let class = if iso.iter().chain(&coiso).all(|&x| ok(x)) {
        DefectClass::Zero
    } else if max_entry.iter().all(|&x| ok(x)) {
        DefectClass::OffDiagonal
    } else if iso.iter().all(|&x| ok(x)) {
        DefectClass::Positive
    } else if coiso.iter().all(|&x| ok(x)) {
        DefectClass::Negative
    } else {
        DefectClass::Mixed
    };
    FringeReport {
        grade,
        kernel_dims: [d1, d2],
        isometry_deviation: iso,
        coisometry_deviation: coiso,
        max_entry,
        class,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::*;

    #[test]
    fn fringe_class_matches_models() {
        let w = default_w();
        for m in [pos_pair(), neg_pair(), zero_pair(&w).unwrap(), offdiag_pair(&w).unwrap()] {
            let r = fringe_matrices(&m.v1, &m.v2, 6);
            assert_eq!(r.class, m.declared_class, "{}: {r:?}", m.name);
        }
    }
}
