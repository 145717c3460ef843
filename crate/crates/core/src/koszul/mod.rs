//! Koszul complex of a shifted commuting pair of matrices, a joint-eigenvalue
//! oracle, spectra of the BCL multipliers `phi(z)` and certificates for the
//! infinite-dimensional models.

mod cert;
mod phi;
mod scan;

pub use cert::{
    eigvec_certificate, eta_certificate, kernel_certificate, psi_certificate, stage2_certificate_neg,
    Certificate, Side, SpectrumSample, Stage2Report, STAGE2_TAIL_THRESHOLD,
};
pub use phi::{class_data, hausdorff, phi_spectrum, predicted_phi_set, ClassData, PhiPoint, PhiSpectrum};
pub use scan::{
    lambda_spiral, scan, write_csv, Grid, GridInfo, LazySubject, ScanConfig, ScanOutput, ScanSummary,
    Subject,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linops::dense::{self, CMat};
use crate::linops::C64;

/// Default relative rank threshold.
pub const RANK_TOL: f64 = 1e-9;
/// Points of a spectrum closer than this are identified.
pub const DEDUP_RADIUS: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KoszulReport {
    pub lambda: [C64; 2],
    pub dim: usize,
    /// `(rank delta_1, rank delta_2)`.
    pub ranks: [usize; 2],
    pub exact: [bool; 3],
    pub break_stages: Vec<u8>,
    pub rank_tolerance: f64,
    pub commutator_norm: f64,
}

impl KoszulReport {
    pub fn is_singular(&self) -> bool {
        !self.break_stages.is_empty()
    }
}

fn check_commuting(a: &CMat, b: &CMat, tol: f64) -> Result<f64> {
    if a.nrows() != a.ncols() || b.shape() != a.shape() {
        return Err(Error::Dimension(format!(
            "need two square matrices of one size, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    if !dense::is_finite(a) || !dense::is_finite(b) {
        return Err(Error::NonFinite("matrix entries".into()));
    }
    let c = dense::spectral_norm(&(a * b - b * a));
    let scale = dense::spectral_norm(a).max(dense::spectral_norm(b));
    if c > tol * scale {
        return Err(Error::NotCommuting(c));
    }
    Ok(c)
}

fn shifted(a: &CMat, l: C64) -> CMat {
    a - CMat::identity(a.nrows(), a.nrows()) * l
}

/// Exactness of `0 -> H -> H (+) H -> H -> 0` for `(A - l1, B - l2)` with
/// `delta_1 h = (T1 h, T2 h)` and `delta_2 (h1, h2) = T1 h2 - T2 h1`.
pub fn koszul_finite(a: &CMat, b: &CMat, l1: C64, l2: C64, tol: f64) -> Result<KoszulReport> {
    let commutator_norm = check_commuting(a, b, tol)?;
    let d = a.nrows();
    let (t1, t2) = (shifted(a, l1), shifted(b, l2));
    let mut d1 = CMat::zeros(2 * d, d);
    d1.view_mut((0, 0), (d, d)).copy_from(&t1);
    d1.view_mut((d, 0), (d, d)).copy_from(&t2);
    let mut d2 = CMat::zeros(d, 2 * d);
    d2.view_mut((0, 0), (d, d)).copy_from(&(-&t2));
    d2.view_mut((0, d), (d, d)).copy_from(&t1);
    // a shift that nearly cancels the pair leaves a tiny sigma_max; measure
    // against the unshifted pair instead
    let scale = dense::spectral_norm(a).max(dense::spectral_norm(b));
    let r1 = dense::rank_with_scale(&d1, tol, scale);
    let r2 = dense::rank_with_scale(&d2, tol, scale);
    let exact = [r1 == d, r1 + r2 == 2 * d, r2 == d];
    let break_stages = (0..3).filter(|&k| !exact[k]).map(|k| k as u8 + 1).collect();
    Ok(KoszulReport {
        lambda: [l1, l2],
        dim: d,
        ranks: [r1, r2],
        exact,
        break_stages,
        rank_tolerance: tol,
        commutator_norm,
    })
}

fn dist2(p: &[C64; 2], q: &[C64; 2]) -> f64 {
    ((p[0] - q[0]).norm_sqr() + (p[1] - q[1]).norm_sqr()).sqrt()
}

/// Drops points within `radius` of an earlier one.
pub fn dedup_points(pts: Vec<[C64; 2]>, radius: f64) -> Vec<[C64; 2]> {
    let mut out: Vec<[C64; 2]> = Vec::new();
    for p in pts {
        if out.iter().all(|q| dist2(&p, q) > radius) {
            out.push(p);
        }
    }
    out
}

fn common_null(m: &CMat) -> Option<CMat> {
    for t in [1e-12, 1e-10, 1e-8, 1e-6] {
        let e = dense::nullspace(m, t);
        if e.ncols() > 0 {
            return Some(e);
        }
    }
    None
}

/// Diagonal pairs of a simultaneous upper-triangularization, found by
/// repeatedly splitting off a common eigenvector; deduplicated.
pub fn joint_spectrum_finite(a: &CMat, b: &CMat, tol: f64) -> Result<Vec<[C64; 2]>> {
    check_commuting(a, b, tol)?;
    let scale = 1.0f64.max(dense::spectral_norm(a)).max(dense::spectral_norm(b));
    let (mut a, mut b) = (a.clone(), b.clone());
    let mut pts = Vec::new();
    while a.nrows() > 0 {
        let alpha = dense::eigenvalues(&a)[0];
        let e = common_null(&shifted(&a, alpha))
            .ok_or_else(|| Error::Deflation(format!("no eigenvector of A at {alpha}")))?;
        let be = e.adjoint() * &b * &e;
        let beta = dense::eigenvalues(&be)[0];
        let y = common_null(&shifted(&be, beta))
            .ok_or_else(|| Error::Deflation(format!("no eigenvector of B on the {alpha}-eigenspace")))?;
        let x = (&e * y.column(0)).normalize();
        let xa = (x.adjoint() * &a * &x)[(0, 0)];
        let xb = (x.adjoint() * &b * &x)[(0, 0)];
        let res = (&a * &x - &x * xa).norm().max((&b * &x - &x * xb).norm());
        if res > tol.sqrt() * scale {
            return Err(Error::Deflation(format!("common eigenvector residual {res:e}")));
        }
        pts.push([xa, xb]);
        let rest = dense::nullspace(&CMat::from_fn(1, x.nrows(), |_, j| x[j].conj()), 1e-12);
        a = rest.adjoint() * &a * &rest;
        b = rest.adjoint() * &b * &rest;
    }
    Ok(dedup_points(pts, DEDUP_RADIUS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::dense::{c, diag, r};

    #[test]
    fn zero_pair_of_size_one() {
        let z = CMat::zeros(1, 1);
        let rep = koszul_finite(&z, &z, r(0.0), r(0.0), RANK_TOL).unwrap();
        assert_eq!(rep.ranks, [0, 0]);
        // Euler characteristic zero: stage 2 carries h1 + h3
        assert_eq!(rep.break_stages, vec![1, 2, 3]);
    }

    #[test]
    fn diagonal_pairs() {
        let a = diag(&[r(0.5), c(0.0, 0.3)]);
        let b = diag(&[r(-0.2), r(0.7)]);
        assert!(koszul_finite(&a, &b, r(0.5), r(-0.2), RANK_TOL).unwrap().is_singular());
        assert!(!koszul_finite(&a, &b, r(0.5), r(0.7), RANK_TOL).unwrap().is_singular());
        let js = joint_spectrum_finite(&a, &b, RANK_TOL).unwrap();
        assert_eq!(js.len(), 2);
    }

    #[test]
    fn nilpotent_jordan() {
        let mut j = CMat::zeros(2, 2);
        j[(0, 1)] = r(1.0);
        let js = joint_spectrum_finite(&j, &(&j * &j), RANK_TOL).unwrap();
        assert_eq!(js, vec![[r(0.0), r(0.0)]]);
    }

    #[test]
    fn rejects_non_commuting() {
        let mut j = CMat::zeros(2, 2);
        j[(0, 1)] = r(1.0);
        assert!(matches!(
            koszul_finite(&j, &j.adjoint(), r(0.0), r(0.0), RANK_TOL),
            Err(Error::NotCommuting(_))
        ));
    }
}
