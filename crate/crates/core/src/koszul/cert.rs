//! Certificates for points of the joint spectrum of the lazy models.

use serde::Serialize;

use crate::bcl::{BclTriple, LazyPreset};
use crate::error::{Error, Result};
use crate::linops::{LazyOp, SparseVec, C64};
use crate::models::{mz1, mz2, tau_pair};
use crate::spaces::{analytic_vector, truncated, AnalyticKind, AnalyticVectorSpec};

/// Largest tail bound `stage2_certificate_neg` accepts.
pub const STAGE2_TAIL_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    Rank,
    EigvecForward,
    EigvecAdjoint,
    RangePairing,
}

impl Certificate {
    pub fn name(&self) -> &'static str {
        match self {
            Certificate::Rank => "rank",
            Certificate::EigvecForward => "eigvec_forward",
            Certificate::EigvecAdjoint => "eigvec_adjoint",
            Certificate::RangePairing => "range_pairing",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Forward,
    Adjoint,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumSample {
    pub z: Option<C64>,
    pub point: [C64; 2],
    pub in_spectrum: bool,
    pub break_stages: Vec<u8>,
    pub certificate: Certificate,
    pub residual: f64,
    /// What the residual is allowed to be for this certificate.
    pub bound: f64,
}

/// `max_i ||(A_i - l_i) x||` (forward) or `max_i ||(A_i* - conj l_i) x||`
/// (adjoint) for the normalized truncation `x`. Accepted when the residual is
/// within both `2 max ||A_i|| tail(x)` and `tol_residual`.
pub fn eigvec_certificate(
    a: [&LazyOp; 2],
    z: Option<C64>,
    lam: [C64; 2],
    x: &SparseVec,
    side: Side,
    tol_residual: f64,
) -> SpectrumSample {
    let nx = x.norm();
    let xh = x.scale(C64::new(1.0 / nx, 0.0));
    let mut residual: f64 = 0.0;
    let mut nb: f64 = 0.0;
    for k in 0..2 {
        let (op, l) = match side {
            Side::Forward => (a[k].clone(), lam[k]),
            Side::Adjoint => (a[k].adjoint(), lam[k].conj()),
        };
        let r = op.apply_unchecked(&xh).sub(&xh.scale(l));
        residual = residual.max(r.norm());
        nb = nb.max(op.norm_bound());
    }
    let bound = 2.0 * nb * x.tail_bound() / nx;
    let ok = residual <= bound.max(f64::EPSILON * 16.0) && residual <= tol_residual;
    let (certificate, stage) = match side {
        Side::Forward => (Certificate::EigvecForward, 1),
        Side::Adjoint => (Certificate::EigvecAdjoint, 3),
    };
    SpectrumSample {
        z,
        point: lam,
        in_spectrum: ok,
        break_stages: if ok { vec![stage] } else { Vec::new() },
        certificate,
        residual,
        bound,
    }
}

fn in_disc(l: [C64; 2]) -> Result<()> {
    for (k, c) in l.iter().enumerate() {
        if !(c.norm() < 1.0) {
            return Err(Error::OutOfDisc(format!("l{} = {c}", k + 1)));
        }
    }
    Ok(())
}

/// Forward certificate for `psi(z)`, `z = l1 l2`, with `x_neg(l1, l2)`.
pub fn psi_certificate(l1: C64, l2: C64, eps: f64, tol_residual: f64) -> Result<SpectrumSample> {
    in_disc([l1, l2])?;
    let kind = if l1.norm() == 0.0 { AnalyticKind::XNegDegenerate } else { AnalyticKind::XNeg };
    let x = analytic_vector(&AnalyticVectorSpec { kind, params: vec![l1, l2], eps })?;
    let z = l1 * l2;
    let (p1, p2) = BclTriple::preset(LazyPreset::BilateralPMinus).phi(z);
    Ok(eigvec_certificate([&p1, &p2], Some(z), [l1, l2], &x, Side::Forward, tol_residual))
}

/// Adjoint certificate for `eta(z)`, `z = l1 l2`, with `x_pos(l1, l2)`.
pub fn eta_certificate(l1: C64, l2: C64, eps: f64, tol_residual: f64) -> Result<SpectrumSample> {
    in_disc([l1, l2])?;
    let kind = if l2.norm() == 0.0 { AnalyticKind::XPosDegenerate } else { AnalyticKind::XPos };
    let x = analytic_vector(&AnalyticVectorSpec { kind, params: vec![l1, l2], eps })?;
    let z = l1 * l2;
    let (p1, p2) = BclTriple::preset(LazyPreset::BilateralPZeroPlus).phi(z);
    Ok(eigvec_certificate([&p1, &p2], Some(z), [l1, l2], &x, Side::Adjoint, tol_residual))
}

/// Adjoint certificate for `(M_z1, M_z2)` with the kernel at `(w1, w2)`.
pub fn kernel_certificate(w1: C64, w2: C64, eps: f64, tol_residual: f64) -> Result<SpectrumSample> {
    in_disc([w1, w2])?;
    let x = analytic_vector(&AnalyticVectorSpec { kind: AnalyticKind::KernelK, params: vec![w1, w2], eps })?;
    Ok(eigvec_certificate([&mz1(), &mz2()], None, [w1, w2], &x, Side::Adjoint, tol_residual))
}

#[derive(Clone, Debug, Serialize)]
pub struct Stage2Report {
    pub lambda: [C64; 2],
    pub truncation: u32,
    pub generators: u32,
    pub tail_h2: f64,
    pub tail_g: f64,
    pub truncation_sufficient: bool,
    /// Largest deviation of the truncated `h2` from its closed-form coefficients.
    pub pattern_deviation: f64,
    /// Computed `<(tau1 - l1) h2, g_m>` for `m = 0..=M`.
    pub pairings: Vec<C64>,
    /// Certified bound on the error from truncating `h2` and `g_m`.
    pub pairing_bounds: Vec<f64>,
    /// `max_m |pairing| + bound`.
    pub max_certified: f64,
}

impl Stage2Report {
    pub fn passes(&self, threshold: f64) -> bool {
        self.truncation_sufficient && self.pattern_deviation == 0.0 && self.max_certified <= threshold
    }
}

/// Coefficient of `z1^p z2^q` in `h2` truncated at `m + n <= N`, from the
/// closed form `l1^m conj(l2)^n` at `p = m + 2n`, `q = n`.
fn h2_coefficient(l1: C64, l2: C64, p: i64, q: i64, n: i64) -> C64 {
    let m = p - 2 * q;
    if q < 0 || m < 0 || m + q > n {
        return C64::new(0.0, 0.0);
    }
    let mut x = C64::new(1.0, 0.0);
    for _ in 0..m {
        x *= l1;
    }
    let mut y = C64::new(1.0, 0.0);
    for _ in 0..q {
        y *= l2.conj();
    }
    x * y
}

/// Pairings of `(tau1 - l1) h2` against the generators `g_m` of the
/// orthocomplement of `ran(tau2 - l2)`, with `h2` and `g_m` truncated at `n`.
pub fn stage2_certificate_neg(l1: C64, l2: C64, n: u32, m_max: u32) -> Result<Stage2Report> {
    in_disc([l1, l2])?;
    let (t1, _) = tau_pair();
    let h = truncated(AnalyticKind::H2, &[l1, l2], n)?;
    let th = t1.apply_unchecked(&h).sub(&h.scale(l1));
    let nn = n as i64;
    let mut pattern: f64 = 0.0;
    for (i, c) in h.entries() {
        let (p, q) = (i.coords()[0], i.coords()[1]);
        let want = h2_coefficient(l1, l2, p, q, nn);
        let d = (c - want).norm();
        // both sides multiply the same factors in the same order
        pattern = pattern.max(if d <= 4.0 * f64::EPSILON * want.norm() { 0.0 } else { d });
    }
    for m in 0..=nn {
        for k in 0..=(nn - m) {
            let want = h2_coefficient(l1, l2, m + 2 * k, k, nn);
            if h.get(&crate::idx![m + 2 * k, k]) == C64::new(0.0, 0.0) {
                pattern = pattern.max(want.norm());
            }
        }
    }
    let tail_h = h.tail_bound();
    let op_norm = 1.0 + l1.norm();
    let mut pairings = Vec::new();
    let mut bounds = Vec::new();
    let mut tail_g: f64 = 0.0;
    for m in 0..=m_max {
        let g = truncated(AnalyticKind::OrthoGenG { m }, &[l2], n)?;
        tail_g = tail_g.max(g.tail_bound());
        pairings.push(th.inner(&g));
        let g_norm = g.norm() + g.tail_bound();
        bounds.push(op_norm * tail_h * g_norm + th.norm() * g.tail_bound());
    }
    let max_certified = pairings
        .iter()
        .zip(&bounds)
        .map(|(p, b)| p.norm() + b)
        .fold(0.0, f64::max);
    Ok(Stage2Report {
        lambda: [l1, l2],
        truncation: n,
        generators: m_max,
        tail_h2: tail_h,
        tail_g,
        truncation_sufficient: tail_h.max(tail_g) <= STAGE2_TAIL_THRESHOLD,
        pattern_deviation: pattern,
        pairings,
        pairing_bounds: bounds,
        max_certified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::dense::{c, r};

    #[test]
    fn psi_example() {
        let s = psi_certificate(r(0.5), r(0.2), 1e-12, 1e-10).unwrap();
        assert!(s.in_spectrum && s.residual <= 1e-10, "{s:?}");
        assert_eq!(s.break_stages, vec![1]);
    }

    #[test]
    fn eta_at_origin_is_exact() {
        let s = eta_certificate(r(0.0), r(0.0), 1e-12, 1e-10).unwrap();
        assert_eq!(s.residual, 0.0);
        assert_eq!(s.break_stages, vec![3]);
    }

    #[test]
    fn kernel_example() {
        let s = kernel_certificate(r(0.5), c(0.0, 0.25), 1e-12, 1e-10).unwrap();
        assert!(s.in_spectrum && s.residual <= s.bound, "{s:?}");
    }

    #[test]
    fn stage2_origin_and_flags() {
        let rep = stage2_certificate_neg(r(0.0), r(0.0), 10, 20).unwrap();
        assert!(rep.pairings.iter().all(|p| p.norm() == 0.0));
        let rep = stage2_certificate_neg(r(0.3), c(0.0, 0.5), 40, 20).unwrap();
        assert!(rep.passes(1e-10), "{rep:?}");
        let rep = stage2_certificate_neg(r(0.9), r(0.9), 40, 20).unwrap();
        assert!(!rep.truncation_sufficient);
    }
}
