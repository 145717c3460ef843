//! Explicit unitaries between the models and their BCL multiplier pairs.

use serde::Serialize;

use super::{basis, mz1, mz2, tau_pair};
use crate::bcl::{offdiag_triple, BclTriple, LazyPreset};
use crate::error::Result;
use crate::idx;
use crate::linops::checks::isometry_deviation;
use crate::linops::dense::CMat;
use crate::linops::{LazyOp, SparseVec};
use crate::spaces::{window, Scheme};

#[derive(Clone, Debug, Serialize)]
pub struct IntertwinerReport {
    pub name: String,
    pub grade: u32,
    pub isometry_deviation: f64,
    pub coisometry_deviation: f64,
    /// `max |(L A_i - B_i L) e|` for `i = 1, 2`.
    pub intertwining_deviation: [f64; 2],
}

impl IntertwinerReport {
    pub fn max_deviation(&self) -> f64 {
        self.isometry_deviation
            .max(self.coisometry_deviation)
            .max(self.intertwining_deviation[0])
            .max(self.intertwining_deviation[1])
    }

    /// Checks `lam a_i = b_i lam` on the domain window and unitarity of `lam`
    /// on both windows.
    pub fn evaluate(name: &str, lam: &LazyOp, a: [&LazyOp; 2], b: [&LazyOp; 2], grade: u32) -> Self {
        let dom = window(lam.domain(), grade);
        let cod = window(lam.codomain(), grade);
        let mut dev = [0.0f64; 2];
        for k in 0..2 {
            for i in &dom {
                let lhs = lam.apply_unchecked(&a[k].apply_basis(i));
                let rhs = b[k].apply_unchecked(&lam.apply_basis(i));
                dev[k] = dev[k].max(lhs.sub(&rhs).max_abs());
            }
        }
        IntertwinerReport {
            name: name.into(),
            grade,
            isometry_deviation: isometry_deviation(lam, &dom),
            coisometry_deviation: isometry_deviation(&lam.adjoint(), &cod),
            intertwining_deviation: dev,
        }
    }
}

fn vh_bilateral() -> std::sync::Arc<Scheme> {
    Scheme::vector_hardy(&Scheme::bilateral())
}

/// Monomial map `H^2(D^2) -> H^2_D(l^2(Z))`, `z1^p z2^q -> z^k (x) e_j`.
fn monomial_intertwiner(
    name: &str,
    fwd: fn(i64, i64) -> (i64, i64),
    inv: fn(i64, i64) -> (i64, i64),
) -> LazyOp {
    let dom = Scheme::hardy_bidisc();
    let cod = vh_bilateral();
    let (d2, c2) = (dom.clone(), cod.clone());
    LazyOp::from_actions(
        name,
        &dom,
        &cod,
        1.0,
        None,
        move |i| {
            let (k, j) = fwd(i.coords()[0], i.coords()[1]);
            basis(&c2, idx![k, j])
        },
        move |i| {
            let (p, q) = inv(i.coords()[0], i.coords()[1]);
            basis(&d2, idx![p, q])
        },
    )
}

/// Unitary carrying `(tau1, tau2)` onto the `p_-` multiplier pair.
pub fn intertwiner_neg() -> LazyOp {
    monomial_intertwiner(
        "Lambda_neg",
        |p, q| if p >= q { (q, p - q) } else { (p, -(q - p)) },
        |k, j| if j >= 0 { (j + k, k) } else { (k, k - j) },
    )
}

/// Unitary carrying `(M_z1, M_z2)` onto the `p_0+` multiplier pair.
pub fn intertwiner_pos() -> LazyOp {
    monomial_intertwiner(
        "Lambda_pos",
        |p, q| if p >= q { (q, -(p - q + 1)) } else { (p, q - p - 1) },
        |k, j| if j < 0 { (k - j - 1, k) } else { (k, k + j + 1) },
    )
}

fn powers(w: &CMat, n: usize) -> Vec<CMat> {
    let d = w.nrows();
    let mut out = vec![CMat::identity(d, d)];
    for k in 1..=n {
        let next = &out[k - 1] * w;
        out.push(next);
    }
    out
}

fn column_vec(s: &std::sync::Arc<Scheme>, k: i64, m: &CMat, col: usize, offset: usize) -> SparseVec {
    let mut v = SparseVec::zero(s);
    for r in 0..m.nrows() {
        let c = m[(r, col)];
        if c.norm() > 0.0 {
            v.add_at(idx![k, r + offset], c);
        }
    }
    v
}

/// `z^m (x) a -> z^m (x) W^m a`: carries `(M_z (x) W*, I (x) W)` onto
/// `(M_z (x) I, I (x) W)`.
pub fn intertwiner_zero(w: &CMat) -> Result<LazyOp> {
    let s = Scheme::vector_hardy(&Scheme::finite(w.nrows()));
    let (w1, w2) = (w.clone(), w.adjoint());
    let (s1, s2) = (s.clone(), s.clone());
    Ok(LazyOp::from_actions(
        "Lambda_zero",
        &s,
        &s,
        1.0,
        Some(0),
        move |i| {
            let (m, j) = (i.coords()[0], i.coords()[1] as usize);
            let p = &powers(&w1, m as usize)[m as usize];
            column_vec(&s1, m, p, j, 0)
        },
        move |i| {
            let (m, j) = (i.coords()[0], i.coords()[1] as usize);
            let p = &powers(&w2, m as usize)[m as usize];
            column_vec(&s2, m, p, j, 0)
        },
    ))
}

/// For the canonical off-diagonal triple of `W` on `C^d (+) C^d`
/// (`U1 = I`, `U2 = W`): `a (+) b -> sum_k z^{2k} W^k b_k + z^{2k+1} W^k U2 a_k`,
/// carrying its multiplier pair onto `(M_z (x) I, M_z (x) W)`.
pub fn intertwiner_off(w: &CMat) -> Result<(LazyOp, BclTriple)> {
    let d = w.nrows();
    let triple = offdiag_triple(w)?;
    let dom = Scheme::vector_hardy(&Scheme::finite(2 * d));
    let cod = Scheme::vector_hardy(&Scheme::finite(d));
    let (wf, wa) = (w.clone(), w.adjoint());
    let (c1, d1) = (cod.clone(), dom.clone());
    let lam = LazyOp::from_actions(
        "Lambda_off",
        &dom,
        &cod,
        1.0,
        None,
        move |i| {
            let (k, j) = (i.coords()[0], i.coords()[1] as usize);
            if j < d {
                // W^k U2 = W^{k+1}
                let p = &powers(&wf, k as usize + 1)[k as usize + 1];
                column_vec(&c1, 2 * k + 1, p, j, 0)
            } else {
                let p = &powers(&wf, k as usize)[k as usize];
                column_vec(&c1, 2 * k, p, j - d, 0)
            }
        },
        move |i| {
            let (n, j) = (i.coords()[0], i.coords()[1] as usize);
            let k = n / 2;
            if n % 2 == 0 {
                let p = &powers(&wa, k as usize)[k as usize];
                column_vec(&d1, k, p, j, d)
            } else {
                let p = &powers(&wa, k as usize + 1)[k as usize + 1];
                column_vec(&d1, k, p, j, 0)
            }
        },
    );
    Ok((lam, triple))
}

/// Exponents of `tau1^m tau2^n (1)`.
fn embedding_exponents(m: i64, n: i64) -> (i64, i64) {
    let k = m.min(n);
    if m >= n {
        let a = m - n;
        if a == 0 {
            (k, k)
        } else {
            (k + a - 1, k + 2 * a - 1)
        }
    } else {
        let b = n - m;
        (k + 2 * b, k + b)
    }
}

/// `(m, n)` with `tau1^m tau2^n (1) = z1^p z2^q`, if any.
pub fn invariant_embedding_preimage(p: i64, q: i64) -> Option<(i64, i64)> {
    let cand = if p == q {
        (p, p)
    } else if q > p && q <= 2 * p + 1 {
        (p + 1, 2 * p - q + 1)
    } else if p > q && p <= 2 * q {
        (2 * q - p, q)
    } else {
        return None;
    };
    (embedding_exponents(cand.0, cand.1) == (p, q)).then_some(cand)
}

/// `J: z1^m z2^n -> tau1^m tau2^n (1)`. The forward action composes the
/// actual operators; the adjoint uses the closed-form preimage.
pub fn invariant_embedding() -> LazyOp {
    let s = Scheme::hardy_bidisc();
    let (t1, t2) = tau_pair();
    let (s1, s2) = (s.clone(), s.clone());
    LazyOp::from_actions(
        "J",
        &s,
        &s,
        1.0,
        None,
        move |i| {
            let (m, n) = (i.coords()[0], i.coords()[1]);
            let mut v = basis(&s1, idx![0, 0]);
            for _ in 0..n {
                v = t2.apply_unchecked(&v);
            }
            for _ in 0..m {
                v = t1.apply_unchecked(&v);
            }
            v
        },
        move |i| match invariant_embedding_preimage(i.coords()[0], i.coords()[1]) {
            Some((m, n)) => basis(&s2, idx![m, n]),
            None => SparseVec::zero(&s2),
        },
    )
}

/// Operators the intertwiners act on, for the reports.
pub fn intertwiner_reports(w: &CMat, grade: u32) -> Result<Vec<IntertwinerReport>> {
    let mut out = Vec::new();
    let (t1, t2) = tau_pair();
    let (p1, p2) = BclTriple::preset(LazyPreset::BilateralPMinus).multiplier_pair();
    out.push(IntertwinerReport::evaluate("neg", &intertwiner_neg(), [&t1, &t2], [&p1, &p2], grade));
    let (e1, e2) = BclTriple::preset(LazyPreset::BilateralPZeroPlus).multiplier_pair();
    out.push(IntertwinerReport::evaluate(
        "pos",
        &intertwiner_pos(),
        [&mz1(), &mz2()],
        [&e1, &e2],
        grade,
    ));
    let (lam, triple) = intertwiner_off(w)?;
    let (m1, m2) = triple.multiplier_pair();
    let off = super::offdiag_pair(w)?;
    out.push(IntertwinerReport::evaluate("off", &lam, [&m1, &m2], [&off.v1, &off.v2], grade));
    let tw = super::zero_pair_twisted(w)?;
    let plain = super::zero_pair(w)?;
    out.push(IntertwinerReport::evaluate(
        "zero",
        &intertwiner_zero(w)?,
        [&tw.v1, &tw.v2],
        [&plain.v1, &plain.v2],
        grade,
    ));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::checks::adjoint_consistency;

    #[test]
    fn neg_sends_example_monomial() {
        let v = intertwiner_neg().apply_basis(&idx![3, 1]);
        assert_eq!(v.entries().keys().collect::<Vec<_>>(), vec![&idx![1, 2]]);
    }

    #[test]
    fn embedding_closed_form_matches_composition() {
        let j = invariant_embedding();
        let w = window(&Scheme::HardyBidisc, 8);
        assert_eq!(adjoint_consistency(&j, &w), 0.0);
        for i in &w {
            let (p, q) = embedding_exponents(i.coords()[0], i.coords()[1]);
            assert_eq!(j.apply_basis(i).entries().keys().next().unwrap(), &idx![p, q]);
        }
    }

    #[test]
    fn all_intertwiners_exact() {
        let w = super::super::default_w();
        for rep in intertwiner_reports(&w, 6).unwrap() {
            assert!(rep.max_deviation() <= 1e-13, "{rep:?}");
        }
    }
}
