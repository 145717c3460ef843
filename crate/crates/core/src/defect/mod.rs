//! Defect operator `C = I - V1V1* - V2V2* + VV*` of a commuting pair and the
//! subspace bookkeeping around it, all on graded windows.

mod fringe;
mod ladder;
mod wold;

pub use fringe::{fringe_matrices, FringeReport};
pub use ladder::{equivalence_suite, LadderItem, LadderReport};
pub use wold::{wold, WoldReport};

use serde::Serialize;

use crate::bcl::{nonzero_eigenvalues, support_scan, DefectClass};
use crate::linops::dense::{self, CMat};
use crate::linops::{
    compose, compress_square, image_within, kernel_in_window, kron, lincomb, BasisIndex, Frame,
    LazyOp, C64,
};
use crate::models::ModelPair;
use crate::spaces::window;

/// Null-space threshold for kernel bases.
pub const KERNEL_TOL: f64 = 1e-9;
/// Tolerance for subspace relations on a window.
pub const SUBSPACE_TOL: f64 = 1e-9;

/// `I - V1V1* - V2V2* + VV*`.
pub fn defect_operator(v1: &LazyOp, v2: &LazyOp) -> LazyOp {
    let one = C64::new(1.0, 0.0);
    let m1 = C64::new(-1.0, 0.0);
    let v = compose(v1, v2).unwrap();
    let p1 = compose(v1, &v1.adjoint()).unwrap();
    let p2 = compose(v2, &v2.adjoint()).unwrap();
    let p = compose(&v, &v.adjoint()).unwrap();
    let id = LazyOp::identity(v1.domain());
    let a = lincomb(one, &id, m1, &p1).unwrap();
    let b = lincomb(m1, &p2, one, &p).unwrap();
    lincomb(one, &a, one, &b).unwrap().with_norm_bound(2.0).with_label("C")
}

#[derive(Clone, Debug, Serialize)]
pub struct DefectReport {
    pub window_grade: u32,
    pub eigenvalues: Vec<f64>,
    pub class: DefectClass,
    pub support_certified: bool,
    pub boundary_ring_max: f64,
    #[serde(skip)]
    pub window: Vec<BasisIndex>,
    #[serde(skip)]
    pub matrix: CMat,
    /// Dimensions of `ker V1*`, `ker V2*`, `ker V*` inside the window.
    pub kernel_dims: [usize; 3],
    #[serde(skip)]
    pub kernels: KernelData,
}

/// Kernel bases and their images inside the grade-`grade` window.
#[derive(Clone, Debug)]
pub struct KernelData {
    pub grade: u32,
    pub window: Vec<BasisIndex>,
    pub k1: Frame,
    pub k2: Frame,
    pub k: Frame,
    /// `V2(ker V1*) ∩ span(window)`.
    pub v2k1: Frame,
    /// `V1(ker V2*) ∩ span(window)`.
    pub v1k2: Frame,
    /// How far the kernel projections of the window one band larger, cut
    /// down to the window, are from the window's own kernel projections.
    pub stabilization_gap: f64,
}

impl Default for KernelData {
    fn default() -> Self {
        let s = crate::spaces::Scheme::finite(0);
        KernelData {
            grade: 0,
            window: Vec::new(),
            k1: Frame::empty(&s),
            k2: Frame::empty(&s),
            k: Frame::empty(&s),
            v2k1: Frame::empty(&s),
            v1k2: Frame::empty(&s),
            stabilization_gap: 0.0,
        }
    }
}

impl KernelData {
    pub fn proj(&self, f: &Frame) -> CMat {
        f.projector_on(&self.window)
    }

    pub fn basis(&self, f: &Frame) -> CMat {
        f.on_window(&self.window)
    }

    pub fn is_stabilized(&self) -> bool {
        self.stabilization_gap <= SUBSPACE_TOL
    }
}

fn band(op: &LazyOp) -> u32 {
    op.band_radius().unwrap_or(1).max(1)
}

pub fn kernel_data(v1: &LazyOp, v2: &LazyOp, grade: u32) -> KernelData {
    let scheme = v1.domain().clone();
    let w = window(&scheme, grade);
    let v = compose(v1, v2).unwrap();
    let (b1, b2) = (band(v1), band(v2));
    let k1 = kernel_in_window(&v1.adjoint(), &w, KERNEL_TOL);
    let k2 = kernel_in_window(&v2.adjoint(), &w, KERNEL_TOL);
    let k = kernel_in_window(&v.adjoint(), &w, KERNEL_TOL);
    let k1_big = kernel_in_window(&v1.adjoint(), &window(&scheme, grade + b2), KERNEL_TOL);
    let k2_big = kernel_in_window(&v2.adjoint(), &window(&scheme, grade + b1), KERNEL_TOL);
    let k_big = kernel_in_window(&v.adjoint(), &window(&scheme, grade + b1 + b2), KERNEL_TOL);
    let gap = |small: &Frame, big: &Frame| dense::max_abs(&(big.projector_on(&w) - small.projector_on(&w)));
    let stabilization_gap = gap(&k1, &k1_big).max(gap(&k2, &k2_big)).max(gap(&k, &k_big));
    KernelData {
        grade,
        v2k1: image_within(v2, &k1_big, &w, KERNEL_TOL),
        v1k2: image_within(v1, &k2_big, &w, KERNEL_TOL),
        window: w,
        k1,
        k2,
        k,
        stabilization_gap,
    }
}

/// `ran V1 = ran V2` on the window, i.e. equal kernels of the adjoints.
fn kernels_equal(kd: &KernelData) -> bool {
    kd.k1.dim() == kd.k2.dim()
        && dense::max_abs(&(kd.proj(&kd.k1) - kd.proj(&kd.k2))) <= SUBSPACE_TOL
}

pub fn defect_window_matrix(v1: &LazyOp, v2: &LazyOp, grade: u32) -> DefectReport {
    let c = defect_operator(v1, v2);
    let scan = support_scan(&c, v1.domain(), grade);
    let eigenvalues = nonzero_eigenvalues(&scan.matrix);
    let kernels = kernel_data(v1, v2, grade);
    let class = DefectClass::from_evidence(&eigenvalues, kernels_equal(&kernels));
    DefectReport {
        window_grade: grade,
        eigenvalues,
        class,
        support_certified: scan.certified,
        boundary_ring_max: scan.ring_max,
        window: scan.window,
        matrix: scan.matrix,
        kernel_dims: [kernels.k1.dim(), kernels.k2.dim(), kernels.k.dim()],
        kernels,
    }
}

pub fn defect_report(model: &ModelPair, grade: u32) -> DefectReport {
    defect_window_matrix(&model.v1, &model.v2, grade)
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub grade: u32,
    /// `max |C - (P_{ker V1*} - P_{V2 ker V1*})|`.
    pub via_ker_v1: f64,
    /// `max |C - (P_{ker V2*} - P_{V1 ker V2*})|`.
    pub via_ker_v2: f64,
    /// `max |C - L* (E_0 (x) (U*PU - P)) L|` when the model carries a triple.
    pub via_triple: Option<f64>,
    /// `ker V1* ⊥ V1(ker V2*)` and `ker V2* ⊥ V2(ker V1*)`.
    pub orthogonality: f64,
    /// `ker V1* + V1(ker V2*) = ker V* = ker V2* + V2(ker V1*)`.
    pub direct_sums: f64,
    pub stabilization_gap: f64,
}

impl IdentityReport {
    pub fn max_deviation(&self) -> f64 {
        self.via_ker_v1
            .max(self.via_ker_v2)
            .max(self.via_triple.unwrap_or(0.0))
            .max(self.orthogonality)
            .max(self.direct_sums)
    }
}

/// `L* (E_0 (x) D) L` on the model space.
fn triple_defect_on_model(model: &ModelPair) -> Option<LazyOp> {
    let t = model.triple.as_ref()?;
    let l = model.to_multiplier.as_ref()?;
    let h = crate::spaces::Scheme::hardy_disc();
    let e0 = {
        let p = crate::bcl::hardy_shift();
        crate::linops::complement(&compose(&p, &p.adjoint()).unwrap()).unwrap()
    };
    debug_assert_eq!(e0.domain(), &h);
    let d = kron(&e0, &t.fiber_defect());
    compose(&l.adjoint(), &compose(&d, l).ok()?).ok()
}

pub fn verify_projection_identities(model: &ModelPair, grade: u32) -> IdentityReport {
    let (v1, v2) = (&model.v1, &model.v2);
    let kd = kernel_data(v1, v2, grade);
    let c = compress_square(&defect_operator(v1, v2), &kd.window);
    let (p1, q1) = (kd.proj(&kd.k1), kd.proj(&kd.v2k1));
    let (p2, q2) = (kd.proj(&kd.k2), kd.proj(&kd.v1k2));
    let pk = kd.proj(&kd.k);
    let via_triple = triple_defect_on_model(model)
        .map(|t| dense::max_abs(&(compress_square(&t, &kd.window) - &c)));
    IdentityReport {
        grade,
        via_ker_v1: dense::max_abs(&(&c - (&p1 - &q1))),
        via_ker_v2: dense::max_abs(&(&c - (&p2 - &q2))),
        via_triple,
        orthogonality: dense::max_abs(&(&p1 * &q2)).max(dense::max_abs(&(&p2 * &q1))),
        direct_sums: dense::max_abs(&(&p1 + &q2 - &pk)).max(dense::max_abs(&(&p2 + &q1 - &pk))),
        stabilization_gap: kd.stabilization_gap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::*;

    #[test]
    fn fundamental_defects() {
        let r = defect_report(&pos_pair(), 6);
        assert_eq!(r.class, DefectClass::Positive);
        assert_eq!(r.eigenvalues, vec![1.0]);
        assert!(r.support_certified);
        assert_eq!(r.matrix[(0, 0)], C64::new(1.0, 0.0));
        let r = defect_report(&neg_pair(), 6);
        assert_eq!(r.class, DefectClass::Negative);
        assert_eq!(r.eigenvalues, vec![-1.0]);
        // -E_{z2}: the window position of z2 is 2
        assert_eq!(r.matrix[(2, 2)], C64::new(-1.0, 0.0));
        let r = defect_report(&offdiag_pair(&CMat::identity(1, 1)).unwrap(), 6);
        assert_eq!(r.class, DefectClass::OffDiagonal);
        assert_eq!(r.eigenvalues, vec![-1.0, 1.0]);
        let r = defect_report(&zero_pair(&default_w()).unwrap(), 6);
        assert_eq!(r.class, DefectClass::Zero);
        assert!(r.eigenvalues.is_empty());
    }

    #[test]
    fn pos_kernel_of_product_splits() {
        for n in 1..6u32 {
            let r = defect_report(&pos_pair(), n);
            let n = n as usize;
            assert_eq!(r.kernel_dims, [n + 1, n + 1, 2 * n + 1]);
            assert_eq!(r.kernels.v1k2.dim(), n);
        }
    }

    #[test]
    fn identities_hold_on_models() {
        let w = default_w();
        for m in [
            pos_pair(),
            neg_pair(),
            zero_pair(&w).unwrap(),
            offdiag_pair(&w).unwrap(),
            psi_pair(),
            eta_pair(),
        ] {
            let r = verify_projection_identities(&m, 5);
            assert!(r.via_triple.is_some(), "{}", m.name);
            assert!(r.max_deviation() <= 1e-12, "{}: {r:?}", m.name);
        }
    }
}
