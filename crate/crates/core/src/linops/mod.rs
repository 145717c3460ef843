//! Lazy bounded operators on sequence spaces with integer-labelled bases.

pub mod checks;
pub mod dense;
mod frame;
mod op;
mod vector;

pub use checks::{CheckReport, EXACT_TOL};
pub use frame::{gram, image_within, kernel_in_window, Frame};
pub use op::{
    add, complement, compose, compress, compress_square, direct_sum, kron, lincomb, scale, sub,
    Action, LazyOp,
};
pub use vector::{BasisIndex, SparseVec};

pub type C64 = num_complex::Complex64;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::idx;
    use crate::spaces::{window, Scheme};

    fn shift() -> LazyOp {
        let s = Scheme::hardy_disc();
        let (a, b) = (s.clone(), s.clone());
        LazyOp::from_actions(
            "S",
            &s,
            &s,
            1.0,
            Some(1),
            move |i| SparseVec::basis(&a, idx![i.coords()[0] + 1]).unwrap(),
            move |i| {
                let n = i.coords()[0];
                if n == 0 {
                    SparseVec::zero(&b)
                } else {
                    SparseVec::basis(&b, idx![n - 1]).unwrap()
                }
            },
        )
    }

    #[test]
    fn shift_is_isometry_not_unitary() {
        let s = shift();
        let w = window(&Scheme::HardyDisc, 6);
        assert_eq!(checks::isometry_deviation(&s, &w), 0.0);
        assert_eq!(checks::adjoint_consistency(&s, &w), 0.0);
        assert_eq!(checks::isometry_deviation(&s.adjoint(), &w), 1.0);
    }

    #[test]
    fn compose_and_adjoint_agree_with_matrices() {
        let s = shift();
        let w = window(&Scheme::HardyDisc, 5);
        let ss = compose(&s.adjoint(), &s).unwrap();
        let m = compress_square(&ss, &w);
        assert_eq!(dense::max_abs(&(m - dense::CMat::identity(6, 6))), 0.0);
        let p = compose(&s, &s.adjoint()).unwrap();
        let e0 = complement(&p).unwrap();
        let m = compress_square(&e0, &w);
        assert_eq!(m[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(dense::max_abs(&m) , 1.0);
        assert_eq!(m.iter().filter(|c| c.norm() > 0.0).count(), 1);
    }

    #[test]
    fn from_matrix_roundtrip() {
        let s = Scheme::finite(2);
        let w = window(&s, 0);
        let m = dense::CMat::from_row_slice(2, 2, &[C64::new(1.0, 2.0), C64::new(0.0, 1.0), C64::new(3.0, 0.0), C64::new(0.0, 0.0)]);
        let op = LazyOp::from_matrix(&s, &w, &m).unwrap();
        assert_eq!(compress_square(&op, &w), m);
        assert_eq!(compress_square(&op.adjoint(), &w), m.adjoint());
        assert_eq!(checks::adjoint_consistency(&op, &w), 0.0);
    }

    #[test]
    fn kron_and_sum_shapes() {
        let s = shift();
        let f = LazyOp::identity(&Scheme::finite(2));
        let k = kron(&s, &f);
        let w = window(k.domain(), 3);
        assert_eq!(checks::isometry_deviation(&k, &w), 0.0);
        assert_eq!(k.band_radius(), Some(1));
        let d = direct_sum(&s, &k);
        let w = window(d.domain(), 3);
        assert_eq!(checks::isometry_deviation(&d, &w), 0.0);
        assert_eq!(checks::adjoint_consistency(&d, &w), 0.0);
    }

    #[test]
    fn scheme_mismatch_is_an_error() {
        let s = shift();
        let v = SparseVec::basis(&Scheme::bilateral(), idx![0]).unwrap();
        assert!(s.apply(&v).is_err());
    }

    #[test]
    fn kernel_and_image() {
        let s = shift();
        let w = window(&Scheme::HardyDisc, 4);
        let k = kernel_in_window(&s.adjoint(), &w, 1e-12);
        assert_eq!(k.dim(), 1);
        let img = image_within(&s, &k, &w, 1e-12);
        assert_eq!(img.dim(), 1);
        assert_eq!(img.coords, vec![idx![1]]);
    }
}
