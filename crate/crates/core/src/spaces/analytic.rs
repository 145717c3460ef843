//! Closed-form vectors given as convergent series, truncated with a
//! certified bound on the norm of the discarded tail.

use serde::{Deserialize, Serialize};

use super::Scheme;
use crate::error::{Error, Result};
use crate::idx;
use crate::linops::{SparseVec, C64};

const MAX_TERMS: u32 = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyticKind {
    /// Szegő kernel `sum conj(w)^a z^a` on `H^2(D)` (one parameter) or the
    /// product kernel on `H^2(D^2)` (two parameters, truncated by total degree).
    KernelK,
    /// Joint eigenvector of the bilateral `p_-` multiplier pair at
    /// `(l1, l2)`, `l1 != 0`:
    /// `sum_{n>=0} l1^n e_n + l1^{-1} sum_{n>=1} l2^{n-1} e_{-n}`.
    XNeg,
    /// The `l1 = 0` form `sum_{n>=1} l2^{n-1} e_{-n}`.
    XNegDegenerate,
    /// Joint eigenvector of the adjoint `p_{0+}` multiplier pair, `l2 != 0`:
    /// `sum_{n>=0} conj(l2)^n e_n + conj(l2)^{-1} sum_{n>=1} conj(l1)^{n-1} e_{-n}`.
    XPos,
    /// The `l2 = 0` form `sum_{n>=1} conj(l1)^{n-1} e_{-n}`.
    XPosDegenerate,
    /// `sum_{m,n} conj(l2)^n l1^m z1^{m+2n} z2^n`, truncated by `m + n <= N`.
    H2,
    /// `sum_n conj(l2)^n z1^{m+2n} z2^n` for a fixed `m`, truncated by `n <= N`.
    OrthoGenG { m: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticVectorSpec {
    pub kind: AnalyticKind,
    pub params: Vec<C64>,
    /// Required tail bound.
    pub eps: f64,
}

fn check_params(kind: AnalyticKind, p: &[C64]) -> Result<()> {
    let want: &[usize] = match kind {
        AnalyticKind::KernelK => &[1, 2],
        AnalyticKind::OrthoGenG { .. } => &[1, 2],
        _ => &[2],
    };
    if !want.contains(&p.len()) {
        return Err(Error::Dimension(format!("{kind:?} takes {want:?} parameters, got {}", p.len())));
    }
    for (k, c) in p.iter().enumerate() {
        if !(c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::NonFinite(format!("parameter {k}")));
        }
        if c.norm() >= 1.0 {
            return Err(Error::OutOfDisc(format!("#{k} = {c}")));
        }
    }
    let zero = |c: &C64| c.norm() == 0.0;
    match kind {
        AnalyticKind::XNeg if zero(&p[0]) => Err(Error::Degenerate(
            "x_neg needs l1 != 0; select the degenerate form".into(),
        )),
        AnalyticKind::XNegDegenerate if !zero(&p[0]) => {
            Err(Error::Degenerate("degenerate x_neg requires l1 = 0".into()))
        }
        AnalyticKind::XPos if zero(&p[1]) => Err(Error::Degenerate(
            "x_pos needs l2 != 0; select the degenerate form".into(),
        )),
        AnalyticKind::XPosDegenerate if !zero(&p[1]) => {
            Err(Error::Degenerate("degenerate x_pos requires l2 = 0".into()))
        }
        _ => Ok(()),
    }
}

/// `sqrt(sum_{g >= m} (g + 1) q^g)`.
fn graded_tail(q: f64, m: u32) -> f64 {
    if q == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    let mf = m as f64;
    (q.powf(mf) * ((mf + 1.0) / (1.0 - q) + q / ((1.0 - q) * (1.0 - q)))).sqrt()
}

/// `sqrt(sum_{g >= m} sum_{i + j = g} a^i b^j)`, the exact tail norm of a
/// product series with squared moduli `a`, `b`; close rates fall back to
/// the `max(a, b)` bound.
fn product_tail(a: f64, b: f64, m: u32) -> f64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    if hi - lo < 1e-6 {
        return graded_tail(hi, m);
    }
    let e = m as i32 + 1;
    let s = (hi.powi(e) / (1.0 - hi) - lo.powi(e) / (1.0 - lo)) / (hi - lo);
    // cancellation guard
    (s.max(0.0) * (1.0 + 1e-8)).sqrt()
}

/// `sqrt(sum_{k >= m} r^{2k})`.
fn geometric_tail(r: f64, m: u32) -> f64 {
    if r == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    r.powi(m as i32) / (1.0 - r * r).sqrt()
}

/// Tail bound for truncation parameter `n`.
fn tail(kind: AnalyticKind, p: &[C64], n: u32) -> f64 {
    match kind {
        AnalyticKind::KernelK if p.len() == 1 => geometric_tail(p[0].norm(), n + 1),
        AnalyticKind::KernelK | AnalyticKind::H2 => product_tail(p[0].norm_sqr(), p[1].norm_sqr(), n + 1),
        AnalyticKind::XNeg => {
            let a = geometric_tail(p[0].norm(), n + 1);
            let b = geometric_tail(p[1].norm(), n) / p[0].norm();
            a.hypot(b)
        }
        AnalyticKind::XNegDegenerate => geometric_tail(p[1].norm(), n),
        AnalyticKind::XPos => {
            let a = geometric_tail(p[1].norm(), n + 1);
            let b = geometric_tail(p[0].norm(), n) / p[1].norm();
            a.hypot(b)
        }
        AnalyticKind::XPosDegenerate => geometric_tail(p[0].norm(), n),
        AnalyticKind::OrthoGenG { .. } => geometric_tail(p.last().unwrap().norm(), n + 1),
    }
}

fn scheme_of(kind: AnalyticKind, p: &[C64]) -> std::sync::Arc<Scheme> {
    match kind {
        AnalyticKind::KernelK if p.len() == 1 => Scheme::hardy_disc(),
        AnalyticKind::KernelK | AnalyticKind::H2 | AnalyticKind::OrthoGenG { .. } => {
            Scheme::hardy_bidisc()
        }
        _ => Scheme::bilateral(),
    }
}

fn powers(c: C64, n: u32) -> Vec<C64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut x = C64::new(1.0, 0.0);
    for _ in 0..=n {
        out.push(x);
        x *= c;
    }
    out
}

fn effective(kind: AnalyticKind, n: u32) -> u32 {
    match kind {
        AnalyticKind::XNegDegenerate | AnalyticKind::XPosDegenerate => n.max(1),
        _ => n,
    }
}

/// The series truncated at parameter `n`, with its certified tail bound.
pub fn truncated(kind: AnalyticKind, params: &[C64], n: u32) -> Result<SparseVec> {
    check_params(kind, params)?;
    let s = scheme_of(kind, params);
    let mut v = SparseVec::zero(&s);
    let nn = n as i64;
    match kind {
        AnalyticKind::KernelK if params.len() == 1 => {
            for (k, c) in powers(params[0].conj(), n).into_iter().enumerate() {
                v.add_at(idx![k], c);
            }
        }
        AnalyticKind::KernelK => {
            let a = powers(params[0].conj(), n);
            let b = powers(params[1].conj(), n);
            for g in 0..=n as usize {
                for k in 0..=g {
                    v.add_at(idx![g - k, k], a[g - k] * b[k]);
                }
            }
        }
        AnalyticKind::XNeg | AnalyticKind::XPos => {
            let (lead, other) = if kind == AnalyticKind::XNeg {
                (params[0], params[1])
            } else {
                (params[1].conj(), params[0].conj())
            };
            for (k, c) in powers(lead, n).into_iter().enumerate() {
                v.add_at(idx![k], c);
            }
            let inv = lead.inv();
            for (k, c) in powers(other, n.saturating_sub(1)).into_iter().enumerate().take(n as usize) {
                v.add_at(idx![-(k as i64) - 1], inv * c);
            }
        }
        AnalyticKind::XNegDegenerate | AnalyticKind::XPosDegenerate => {
            let other = if kind == AnalyticKind::XNegDegenerate {
                params[1]
            } else {
                params[0].conj()
            };
            let n = n.max(1);
            for (k, c) in powers(other, n - 1).into_iter().enumerate() {
                v.add_at(idx![-(k as i64) - 1], c);
            }
        }
        AnalyticKind::H2 => {
            let a = powers(params[0], n);
            let b = powers(params[1].conj(), n);
            for m in 0..=nn {
                for k in 0..=(nn - m) {
                    v.add_at(idx![m + 2 * k, k], a[m as usize] * b[k as usize]);
                }
            }
        }
        AnalyticKind::OrthoGenG { m } => {
            let b = powers(params.last().unwrap().conj(), n);
            for k in 0..=nn {
                v.add_at(idx![m as i64 + 2 * k, k], b[k as usize]);
            }
        }
    }
    v.prune();
    Ok(v.with_tail(tail(kind, params, effective(kind, n))))
}

/// Smallest truncation whose certified tail is at most `spec.eps`.
pub fn analytic_vector(spec: &AnalyticVectorSpec) -> Result<SparseVec> {
    check_params(spec.kind, &spec.params)?;
    if !(spec.eps > 0.0) {
        return Err(Error::Degenerate(format!("eps must be positive, got {}", spec.eps)));
    }
    let mut n = 0;
    while tail(spec.kind, &spec.params, effective(spec.kind, n)) > spec.eps {
        n += 1;
        if n > MAX_TERMS {
            return Err(Error::Degenerate(format!(
                "tail bound {:e} not reachable within {MAX_TERMS} terms",
                spec.eps
            )));
        }
    }
    truncated(spec.kind, &spec.params, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Brute-force tail by summing many more terms.
    fn brute_tail(kind: AnalyticKind, p: &[C64], n: u32) -> f64 {
        let small = truncated(kind, p, n).unwrap();
        let big = truncated(kind, p, n + 400).unwrap();
        big.sub(&small).norm()
    }

    #[test]
    fn tail_bounds_dominate_brute_force() {
        let cases: Vec<(AnalyticKind, Vec<C64>)> = vec![
            (AnalyticKind::KernelK, vec![c(0.5, 0.3)]),
            (AnalyticKind::KernelK, vec![c(0.5, 0.3), c(-0.2, 0.6)]),
            (AnalyticKind::XNeg, vec![c(0.4, 0.1), c(0.0, 0.7)]),
            (AnalyticKind::XPos, vec![c(0.4, 0.1), c(0.0, 0.7)]),
            (AnalyticKind::XNegDegenerate, vec![c(0.0, 0.0), c(0.5, 0.5)]),
            (AnalyticKind::XPosDegenerate, vec![c(0.5, 0.5), c(0.0, 0.0)]),
            (AnalyticKind::H2, vec![c(0.3, 0.0), c(0.0, 0.5)]),
            (AnalyticKind::OrthoGenG { m: 3 }, vec![c(0.0, 0.5)]),
        ];
        for (kind, p) in cases {
            for n in [1u32, 3, 7, 12] {
                let t = truncated(kind, &p, n).unwrap().tail_bound();
                let b = brute_tail(kind, &p, n);
                assert!(b <= t * (1.0 + 1e-9) + 1e-300, "{kind:?} n={n}: {b} > {t}");
            }
        }
    }

    #[test]
    fn degenerate_forms() {
        let v = analytic_vector(&AnalyticVectorSpec {
            kind: AnalyticKind::XNegDegenerate,
            params: vec![c(0.0, 0.0), c(0.0, 0.0)],
            eps: 1e-12,
        })
        .unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v.get(&idx![-1]), c(1.0, 0.0));
        assert_eq!(v.tail_bound(), 0.0);
        assert!(matches!(
            truncated(AnalyticKind::XNeg, &[c(0.0, 0.0), c(0.2, 0.0)], 4),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            truncated(AnalyticKind::XPos, &[c(0.2, 0.0), c(0.0, 0.0)], 4),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn out_of_disc_rejected() {
        assert!(matches!(
            truncated(AnalyticKind::KernelK, &[c(1.0, 0.0)], 4),
            Err(Error::OutOfDisc(_))
        ));
    }

    #[test]
    fn kernel_norm_matches_closed_form() {
        let w = c(0.6, -0.3);
        let v = analytic_vector(&AnalyticVectorSpec { kind: AnalyticKind::KernelK, params: vec![w], eps: 1e-14 }).unwrap();
        let exact = 1.0 / (1.0 - w.norm_sqr()).sqrt();
        assert!((v.norm() - exact).abs() < 1e-12);
    }
}
