//! BCL triples `(E, P, U)` and their multiplier pairs on `H^2_D(E)`.
//!
//! `phi1(z) = U*(P^perp + z P)`, `phi2(z) = (P + z P^perp) U`, so that
//! `phi1 phi2 = z I`. The defect of the multiplier pair is `E_0 (x) (U*PU - P)`.

pub mod random;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::idx;
use crate::linops::dense::{self, CMat};
use crate::linops::{
    complement, compose, compress_square, kernel_in_window, kron, lincomb, sub, BasisIndex, LazyOp, SparseVec, C64,
};
use crate::spaces::{window, Scheme};

/// Threshold below which a defect eigenvalue counts as zero.
pub const EIG_TOL: f64 = 1e-10;
/// Unitarity / projection tolerance for in-memory finite triples.
pub const TRIPLE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DefectClass {
    Zero,
    Positive,
    Negative,
    OffDiagonal,
    Mixed,
}

impl fmt::Display for DefectClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl DefectClass {
    /// Class from the nonzero defect eigenvalues and the range test
    /// `ran V1 = ran V2` (equivalently `U*PU = P^perp`).
    pub fn from_evidence(nonzero_eigs: &[f64], ranges_equal: bool) -> DefectClass {
        if nonzero_eigs.is_empty() {
            DefectClass::Zero
        } else if ranges_equal {
            DefectClass::OffDiagonal
        } else if nonzero_eigs.iter().all(|&x| x > 0.0) {
            DefectClass::Positive
        } else if nonzero_eigs.iter().all(|&x| x < 0.0) {
            DefectClass::Negative
        } else {
            DefectClass::Mixed
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LazyPreset {
    /// `(l^2(Z), p_-, omega)`, `p_-` onto `span{e_n : n < 0}`.
    BilateralPMinus,
    /// `(l^2(Z), p_{0+}, omega)`, `p_{0+}` onto `span{e_n : n >= 0}`.
    BilateralPZeroPlus,
}

impl LazyPreset {
    pub fn name(&self) -> &'static str {
        match self {
            LazyPreset::BilateralPMinus => "bilateral_p_minus",
            LazyPreset::BilateralPZeroPlus => "bilateral_p_zero_plus",
        }
    }

    pub fn parse(s: &str) -> Option<LazyPreset> {
        match s {
            "bilateral_p_minus" => Some(LazyPreset::BilateralPMinus),
            "bilateral_p_zero_plus" => Some(LazyPreset::BilateralPZeroPlus),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub enum BclTriple {
    Finite { u: CMat, p: CMat },
    Lazy { preset: LazyPreset, u: LazyOp, p: LazyOp },
}

/// Bilateral shift `e_n -> e_{n+1}`.
pub fn bilateral_shift() -> LazyOp {
    let s = Scheme::bilateral();
    let (a, b) = (s.clone(), s.clone());
    LazyOp::from_actions(
        "omega",
        &s,
        &s,
        1.0,
        Some(1),
        move |i| SparseVec::basis(&a, idx![i.coords()[0] + 1]).unwrap(),
        move |i| SparseVec::basis(&b, idx![i.coords()[0] - 1]).unwrap(),
    )
}

/// Coordinate projection onto `span{e_n : keep(n)}` of `l^2(Z)`.
pub fn bilateral_projection(label: &str, keep: fn(i64) -> bool) -> LazyOp {
    let s = Scheme::bilateral();
    let act = {
        let s = s.clone();
        move |i: &BasisIndex| {
            if keep(i.coords()[0]) {
                SparseVec::basis(&s, i.clone()).unwrap()
            } else {
                SparseVec::zero(&s)
            }
        }
    };
    LazyOp::from_actions(label, &s, &s, 1.0, Some(0), act.clone(), act)
}

impl BclTriple {
    pub fn finite(u: CMat, p: CMat) -> Result<BclTriple> {
        BclTriple::finite_with_tol(u, p, TRIPLE_TOL)
    }

    pub fn finite_with_tol(u: CMat, p: CMat, tol: f64) -> Result<BclTriple> {
        if u.nrows() != u.ncols() || p.shape() != u.shape() {
            return Err(Error::InvalidTriple(format!(
                "U is {:?}, P is {:?}",
                u.shape(),
                p.shape()
            )));
        }
        if !dense::is_finite(&u) || !dense::is_finite(&p) {
            return Err(Error::NonFinite("triple".into()));
        }
        let du = dense::unitary_deviation(&u);
        if du > tol {
            return Err(Error::InvalidTriple(format!("U not unitary (deviation {du:e})")));
        }
        let dp = dense::projection_deviation(&p);
        if dp > tol {
            return Err(Error::InvalidTriple(format!("P not an orthogonal projection (deviation {dp:e})")));
        }
        Ok(BclTriple::Finite { u, p })
    }

    pub fn preset(preset: LazyPreset) -> BclTriple {
        let p = match preset {
            LazyPreset::BilateralPMinus => bilateral_projection("p_-", |n| n < 0),
            LazyPreset::BilateralPZeroPlus => bilateral_projection("p_0+", |n| n >= 0),
        };
        BclTriple::Lazy {
            preset,
            u: bilateral_shift(),
            p,
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            BclTriple::Finite { u, .. } => Some(u.nrows()),
            BclTriple::Lazy { .. } => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            BclTriple::Finite { u, p } => {
                let rank = p.trace().re.round() as usize;
                format!("finite triple, dim {}, rank P {}", u.nrows(), rank)
            }
            BclTriple::Lazy { preset, .. } => format!("preset {}", preset.name()),
        }
    }

    pub fn fiber(&self) -> Arc<Scheme> {
        match self {
            BclTriple::Finite { u, .. } => Scheme::finite(u.nrows()),
            BclTriple::Lazy { .. } => Scheme::bilateral(),
        }
    }

    pub fn u_op(&self) -> LazyOp {
        match self {
            BclTriple::Finite { u, .. } => LazyOp::from_finite_matrix(u).unwrap().with_label("U"),
            BclTriple::Lazy { u, .. } => u.clone(),
        }
    }

    pub fn p_op(&self) -> LazyOp {
        match self {
            BclTriple::Finite { p, .. } => LazyOp::from_finite_matrix(p).unwrap().with_label("P"),
            BclTriple::Lazy { p, .. } => p.clone(),
        }
    }

    /// `(U*P^perp, U*P)`: `phi1(z) = A + z B`.
    fn phi1_parts(&self) -> (LazyOp, LazyOp) {
        let u = self.u_op();
        let p = self.p_op();
        let a = compose(&u.adjoint(), &complement(&p).unwrap()).unwrap();
        let b = compose(&u.adjoint(), &p).unwrap();
        (a, b)
    }

    /// `(PU, P^perp U)`: `phi2(z) = A + z B`.
    fn phi2_parts(&self) -> (LazyOp, LazyOp) {
        let u = self.u_op();
        let p = self.p_op();
        let a = compose(&p, &u).unwrap();
        let b = compose(&complement(&p).unwrap(), &u).unwrap();
        (a, b)
    }

    /// `(phi1(z), phi2(z))` as operators on the fiber.
    pub fn phi(&self, z: C64) -> (LazyOp, LazyOp) {
        let one = C64::new(1.0, 0.0);
        let (a1, b1) = self.phi1_parts();
        let (a2, b2) = self.phi2_parts();
        let bound = 1.0f64.max(z.norm());
        (
            lincomb(one, &a1, z, &b1).unwrap().with_norm_bound(bound).with_label("phi1(z)"),
            lincomb(one, &a2, z, &b2).unwrap().with_norm_bound(bound).with_label("phi2(z)"),
        )
    }

    /// `(phi1(z), phi2(z))` as matrices, finite triples only.
    pub fn phi_matrices(&self, z: C64) -> Result<(CMat, CMat)> {
        match self {
            BclTriple::Finite { u, p } => {
                let d = u.nrows();
                let q = CMat::identity(d, d) - p;
                let us = u.adjoint();
                let phi1 = &us * (&q + p * z);
                let phi2 = (p + &q * z) * u;
                Ok((phi1, phi2))
            }
            BclTriple::Lazy { .. } => Err(Error::Unsupported(
                "matrix form of phi needs a finite triple".into(),
            )),
        }
    }

    /// `(M_phi1, M_phi2)` on `H^2_D(E)`.
    pub fn multiplier_pair(&self) -> (LazyOp, LazyOp) {
        let h = Scheme::hardy_disc();
        let id = LazyOp::identity(&h);
        let mz = hardy_shift();
        let one = C64::new(1.0, 0.0);
        let (a1, b1) = self.phi1_parts();
        let (a2, b2) = self.phi2_parts();
        let m1 = lincomb(one, &kron(&id, &a1), one, &kron(&mz, &b1))
            .unwrap()
            .with_norm_bound(1.0)
            .with_label("M_phi1");
        let m2 = lincomb(one, &kron(&id, &a2), one, &kron(&mz, &b2))
            .unwrap()
            .with_norm_bound(1.0)
            .with_label("M_phi2");
        (m1, m2)
    }

    /// `U*PU - P` on the fiber.
    pub fn fiber_defect(&self) -> LazyOp {
        let u = self.u_op();
        let p = self.p_op();
        let upu = compose(&u.adjoint(), &compose(&p, &u).unwrap()).unwrap();
        sub(&upu, &p).unwrap().with_label("U*PU - P")
    }

    /// `U*PU - P^perp`, zero exactly for the off-diagonal class.
    pub fn offdiag_residual(&self) -> LazyOp {
        let u = self.u_op();
        let p = self.p_op();
        let upu = compose(&u.adjoint(), &compose(&p, &u).unwrap()).unwrap();
        sub(&upu, &complement(&p).unwrap()).unwrap()
    }

    pub fn fiber_defect_matrix(&self) -> Option<CMat> {
        match self {
            BclTriple::Finite { u, p } => Some(u.adjoint() * p * u - p),
            BclTriple::Lazy { .. } => None,
        }
    }

    /// `z^k (x) e_j`-compression of `E_0 (x) (U*PU - P)`.
    pub fn defect_from_triple(&self, win: &[BasisIndex]) -> CMat {
        let d = self.fiber_defect();
        let h = Scheme::hardy_disc();
        let e0 = {
            let (a, b) = (h.clone(), h.clone());
            let act = move |s: &Arc<Scheme>, i: &BasisIndex| {
                if i.coords()[0] == 0 {
                    SparseVec::basis(s, i.clone()).unwrap()
                } else {
                    SparseVec::zero(s)
                }
            };
            LazyOp::from_actions("E0", &h, &h, 1.0, Some(0), move |i| act(&a, i), move |i| act(&b, i))
        };
        compress_square(&kron(&e0, &d), win)
    }

    /// Defect class of the triple with fiber-level evidence.
    pub fn classify(&self, grade: u32) -> TripleClass {
        let fiber = self.fiber();
        let d = self.fiber_defect();
        let scan = support_scan(&d, &fiber, grade);
        let eigenvalues = nonzero_eigenvalues(&scan.matrix);
        let off = compress_square(&self.offdiag_residual(), &window(&fiber, grade + 2));
        let ranges_equal = dense::max_abs(&off) <= EIG_TOL;
        TripleClass {
            class: DefectClass::from_evidence(&eigenvalues, ranges_equal),
            eigenvalues,
            support_certified: scan.certified,
            boundary_ring_max: scan.ring_max,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TripleClass {
    pub class: DefectClass,
    pub eigenvalues: Vec<f64>,
    pub support_certified: bool,
    pub boundary_ring_max: f64,
}

/// `M_z` on `H^2(D)`.
pub fn hardy_shift() -> LazyOp {
    let s = Scheme::hardy_disc();
    let (a, b) = (s.clone(), s.clone());
    LazyOp::from_actions(
        "M_z",
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

/// Compression of a self-adjoint banded operator together with the check
/// that it vanishes on a ring of width `band` past the detected support.
#[derive(Clone, Debug)]
pub struct SupportScan {
    pub window: Vec<BasisIndex>,
    pub matrix: CMat,
    pub support_grade: Option<u32>,
    pub ring_max: f64,
    pub certified: bool,
}

pub fn support_scan(op: &LazyOp, scheme: &Arc<Scheme>, grade: u32) -> SupportScan {
    let tol = crate::linops::EXACT_TOL;
    let inner = window(scheme, grade);
    let Some(band) = op.band_radius() else {
        let matrix = compress_square(op, &inner);
        return SupportScan {
            window: inner,
            matrix,
            support_grade: None,
            ring_max: f64::INFINITY,
            certified: false,
        };
    };
    let big = window(scheme, grade + band);
    let m = compress_square(op, &big);
    let n = inner.len();
    let grades: Vec<u32> = big.iter().map(|i| scheme.grade(i.coords())).collect();
    let mut support_grade: Option<u32> = None;
    for k in 0..n {
        let hit = (0..big.len()).any(|j| m[(k, j)].norm() > tol || m[(j, k)].norm() > tol);
        if hit {
            support_grade = Some(support_grade.map_or(grades[k], |g: u32| g.max(grades[k])));
        }
    }
    let in_ring = |g: u32| match support_grade {
        Some(s) => g > s && g <= s + band,
        None => true,
    };
    let mut ring_max: f64 = 0.0;
    for r in 0..big.len() {
        for c in 0..big.len() {
            if in_ring(grades[r]) || in_ring(grades[c]) {
                ring_max = ring_max.max(m[(r, c)].norm());
            }
        }
    }
    SupportScan {
        matrix: m.view((0, 0), (n, n)).into_owned(),
        window: inner,
        support_grade,
        certified: ring_max <= tol,
        ring_max,
    }
}

/// Eigenvalues of the Hermitian part with `|x| > EIG_TOL`, ascending.
pub fn nonzero_eigenvalues(m: &CMat) -> Vec<f64> {
    let (vals, _) = dense::hermitian_eigen(m);
    vals.into_iter().filter(|x| x.abs() > EIG_TOL).collect()
}

/// Canonical off-diagonal triple for `W`: `E = C^d (+) C^d` with `P` onto the
/// first block and `U = [[0, I], [W, 0]]`, so that `U2 U1 = W`.
pub fn offdiag_triple(w: &CMat) -> Result<BclTriple> {
    let d = w.nrows();
    let mut u = CMat::zeros(2 * d, 2 * d);
    u.view_mut((0, d), (d, d)).copy_from(&CMat::identity(d, d));
    u.view_mut((d, 0), (d, d)).copy_from(w);
    let p = dense::block_diag(&CMat::identity(d, d), &CMat::zeros(d, d));
    BclTriple::finite(u, p)
}

/// Reducing triple `U = U1 (+) U2` with `P` onto the first block.
pub fn block_triple(u1: &CMat, u2: &CMat) -> Result<BclTriple> {
    let u = dense::block_diag(u1, u2);
    let p = dense::block_diag(
        &CMat::identity(u1.nrows(), u1.nrows()),
        &CMat::zeros(u2.nrows(), u2.nrows()),
    );
    BclTriple::finite(u, p)
}

/// Blocks of a finite triple relative to `ran P (+) ran P^perp`:
/// `(Q_P, Q_perp)` orthonormal bases.
pub fn range_bases(p: &CMat) -> (CMat, CMat) {
    let (vals, vecs) = dense::hermitian_eigen(p);
    let hi: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > 0.5).collect();
    let lo: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] <= 0.5).collect();
    (dense::select_columns(&vecs, &hi), dense::select_columns(&vecs, &lo))
}

/// Triple `(ker V*, P_{V2(ker V1*)}, V2|ker V1* (+) V1*|V1(ker V2*))` read off
/// a pair on the grade-`grade` window. Fails unless `ker V*` has stabilized.
pub fn sarkar_triple(v1: &LazyOp, v2: &LazyOp, grade: u32, tol: f64) -> Result<BclTriple> {
    let scheme = v1.domain().clone();
    let v = compose(v1, v2)?;
    let band = v1.band_radius().unwrap_or(1).max(v2.band_radius().unwrap_or(1)).max(1);
    let w = window(&scheme, grade);
    let k = kernel_in_window(&v.adjoint(), &w, tol);
    let k_big = kernel_in_window(&v.adjoint(), &window(&scheme, grade + band), tol);
    if k.dim() != k_big.dim() {
        return Err(Error::KernelNotStabilized {
            op: "V*".into(),
            grade,
            dims: vec![k.dim(), k_big.dim()],
        });
    }
    let k1 = kernel_in_window(&v1.adjoint(), &w, tol);
    let basis = k.vectors();
    let k1v = k1.vectors();
    let d = basis.len();
    let proj_k1 = |x: &SparseVec| {
        let mut acc = SparseVec::zero(&scheme);
        for f in &k1v {
            acc = acc.axpy(x.inner(f), f);
        }
        acc
    };
    let img: Vec<SparseVec> = k1v.iter().map(|f| v2.apply_unchecked(f)).collect();
    let mut u0 = CMat::zeros(d, d);
    let mut p = CMat::zeros(d, d);
    for (j, e) in basis.iter().enumerate() {
        let a = proj_k1(e);
        let b = e.sub(&a);
        let ue = v2.apply_unchecked(&a).axpy(C64::new(1.0, 0.0), &v1.adjoint().apply_unchecked(&b));
        let mut pe = SparseVec::zero(&scheme);
        for f in &img {
            pe = pe.axpy(e.inner(f), f);
        }
        for (i, ei) in basis.iter().enumerate() {
            u0[(i, j)] = ue.inner(ei);
            p[(i, j)] = pe.inner(ei);
        }
    }
    BclTriple::finite_with_tol(u0, p, 1e-10)
}
