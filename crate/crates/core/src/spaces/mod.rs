//! Index schemes for the Hilbert spaces in play and their graded windows.
//!
//! Every space has an orthonormal basis labelled by integer tuples. A scheme
//! fixes the tuple arity, the set of valid tuples and a grade; a window of
//! grade `N` is the ordered list of all indices of grade at most `N`.

mod analytic;

pub use analytic::{analytic_vector, truncated, AnalyticKind, AnalyticVectorSpec};

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use smallvec::smallvec;

use crate::error::{Error, Result};
use crate::linops::BasisIndex;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// `C^d`, index `[j]` with `0 <= j < d`, every index has grade 0.
    Finite(usize),
    /// `H^2(D)`, index `[n]`, grade `n`.
    HardyDisc,
    /// `H^2(D^2)`, index `[m1, m2]`, grade `m1 + m2`.
    HardyBidisc,
    /// `l^2(Z)`, index `[n]`, grade `|n|`.
    Bilateral,
    /// Hilbert tensor product; coordinates concatenate, grades add.
    Tensor(Arc<Scheme>, Arc<Scheme>),
    /// Orthogonal direct sum; coordinates are `[tag, side..., 0-padding]`.
    Sum(Arc<Scheme>, Arc<Scheme>),
}

impl Scheme {
    pub fn finite(d: usize) -> Arc<Scheme> {
        Arc::new(Scheme::Finite(d))
    }

    pub fn hardy_disc() -> Arc<Scheme> {
        Arc::new(Scheme::HardyDisc)
    }

    pub fn hardy_bidisc() -> Arc<Scheme> {
        Arc::new(Scheme::HardyBidisc)
    }

    pub fn bilateral() -> Arc<Scheme> {
        Arc::new(Scheme::Bilateral)
    }

    pub fn tensor(a: &Arc<Scheme>, b: &Arc<Scheme>) -> Arc<Scheme> {
        Arc::new(Scheme::Tensor(a.clone(), b.clone()))
    }

    pub fn sum(a: &Arc<Scheme>, b: &Arc<Scheme>) -> Arc<Scheme> {
        Arc::new(Scheme::Sum(a.clone(), b.clone()))
    }

    /// Vector-valued Hardy space `H^2_D(fiber)`.
    pub fn vector_hardy(fiber: &Arc<Scheme>) -> Arc<Scheme> {
        Scheme::tensor(&Scheme::hardy_disc(), fiber)
    }

    pub fn arity(&self) -> usize {
        match self {
            Scheme::Finite(_) | Scheme::HardyDisc | Scheme::Bilateral => 1,
            Scheme::HardyBidisc => 2,
            Scheme::Tensor(a, b) => a.arity() + b.arity(),
            Scheme::Sum(a, b) => 1 + a.arity().max(b.arity()),
        }
    }

    pub fn is_valid(&self, c: &[i64]) -> bool {
        if c.len() != self.arity() {
            return false;
        }
        match self {
            Scheme::Finite(d) => c[0] >= 0 && (c[0] as usize) < *d,
            Scheme::HardyDisc => c[0] >= 0,
            Scheme::HardyBidisc => c[0] >= 0 && c[1] >= 0,
            Scheme::Bilateral => true,
            Scheme::Tensor(a, b) => {
                let k = a.arity();
                a.is_valid(&c[..k]) && b.is_valid(&c[k..])
            }
            Scheme::Sum(a, b) => {
                let side = match c[0] {
                    0 => a,
                    1 => b,
                    _ => return false,
                };
                let k = side.arity();
                side.is_valid(&c[1..1 + k]) && c[1 + k..].iter().all(|&x| x == 0)
            }
        }
    }

    pub fn check(&self, idx: &BasisIndex) -> Result<()> {
        if self.is_valid(idx.coords()) {
            Ok(())
        } else {
            Err(Error::InvalidIndex {
                index: idx.coords().to_vec(),
                scheme: self.to_string(),
            })
        }
    }

    /// Grade of a valid index.
    pub fn grade(&self, c: &[i64]) -> u32 {
        match self {
            Scheme::Finite(_) => 0,
            Scheme::HardyDisc => c[0] as u32,
            Scheme::HardyBidisc => (c[0] + c[1]) as u32,
            Scheme::Bilateral => c[0].unsigned_abs() as u32,
            Scheme::Tensor(a, b) => {
                let k = a.arity();
                a.grade(&c[..k]) + b.grade(&c[k..])
            }
            Scheme::Sum(a, b) => {
                let side = if c[0] == 0 { a } else { b };
                side.grade(&c[1..1 + side.arity()])
            }
        }
    }

    /// Indices of exactly grade `g`, in window order.
    pub fn indices_of_grade(&self, g: u32) -> Vec<BasisIndex> {
        match self {
            Scheme::Finite(d) => {
                if g == 0 {
                    (0..*d as i64).map(|j| BasisIndex(smallvec![j])).collect()
                } else {
                    Vec::new()
                }
            }
            Scheme::HardyDisc => vec![BasisIndex(smallvec![g as i64])],
            // z1^g, z1^{g-1} z2, ..., z2^g
            Scheme::HardyBidisc => (0..=g as i64)
                .map(|k| BasisIndex(smallvec![g as i64 - k, k]))
                .collect(),
            Scheme::Bilateral => {
                if g == 0 {
                    vec![BasisIndex(smallvec![0])]
                } else {
                    vec![
                        BasisIndex(smallvec![-(g as i64)]),
                        BasisIndex(smallvec![g as i64]),
                    ]
                }
            }
            Scheme::Tensor(a, b) => {
                let mut out = Vec::new();
                for ga in 0..=g {
                    let left = a.indices_of_grade(ga);
                    if left.is_empty() {
                        continue;
                    }
                    let right = b.indices_of_grade(g - ga);
                    for l in &left {
                        for r in &right {
                            out.push(l.concat(r));
                        }
                    }
                }
                out
            }
            Scheme::Sum(a, b) => {
                let width = self.arity();
                let mut out = Vec::new();
                for (tag, side) in [(0i64, a), (1i64, b)] {
                    for i in side.indices_of_grade(g) {
                        out.push(BasisIndex::tagged(tag, &i, width));
                    }
                }
                out
            }
        }
    }

    /// Split a tensor index into its two factors.
    pub fn split_tensor(&self, idx: &BasisIndex) -> (BasisIndex, BasisIndex) {
        match self {
            Scheme::Tensor(a, _) => {
                let k = a.arity();
                (
                    BasisIndex::from_slice(&idx.coords()[..k]),
                    BasisIndex::from_slice(&idx.coords()[k..]),
                )
            }
            _ => panic!("split_tensor on non-tensor scheme {self}"),
        }
    }

    /// Split a direct-sum index into `(tag, side index)`.
    pub fn split_sum(&self, idx: &BasisIndex) -> (usize, BasisIndex) {
        match self {
            Scheme::Sum(a, b) => {
                let tag = idx.coords()[0] as usize;
                let side = if tag == 0 { a } else { b };
                (tag, BasisIndex::from_slice(&idx.coords()[1..1 + side.arity()]))
            }
            _ => panic!("split_sum on non-sum scheme {self}"),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Scheme::Finite(_) => true,
            Scheme::Tensor(a, b) | Scheme::Sum(a, b) => a.is_finite() && b.is_finite(),
            _ => false,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Finite(d) => write!(f, "C^{d}"),
            Scheme::HardyDisc => write!(f, "H2(D)"),
            Scheme::HardyBidisc => write!(f, "H2(D^2)"),
            Scheme::Bilateral => write!(f, "l2(Z)"),
            Scheme::Tensor(a, b) => write!(f, "({a} (x) {b})"),
            Scheme::Sum(a, b) => write!(f, "({a} (+) {b})"),
        }
    }
}

/// Ordered list of all indices of grade at most `n`.
pub fn window(scheme: &Scheme, n: u32) -> Vec<BasisIndex> {
    (0..=n).flat_map(|g| scheme.indices_of_grade(g)).collect()
}

/// Position lookup for a window.
pub fn positions(window: &[BasisIndex]) -> HashMap<BasisIndex, usize> {
    window
        .iter()
        .enumerate()
        .map(|(k, i)| (i.clone(), k))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coords(w: &[BasisIndex]) -> Vec<Vec<i64>> {
        w.iter().map(|i| i.coords().to_vec()).collect()
    }

    #[test]
    fn small_windows() {
        assert_eq!(coords(&window(&Scheme::Bilateral, 1)), vec![vec![0], vec![-1], vec![1]]);
        assert_eq!(coords(&window(&Scheme::HardyDisc, 2)), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(
            coords(&window(&Scheme::HardyBidisc, 1)),
            vec![vec![0, 0], vec![1, 0], vec![0, 1]]
        );
    }

    #[test]
    fn window_sizes() {
        for n in 0..6u32 {
            let n_us = n as usize;
            assert_eq!(window(&Scheme::HardyBidisc, n).len(), (n_us + 1) * (n_us + 2) / 2);
            assert_eq!(window(&Scheme::Bilateral, n).len(), 2 * n_us + 1);
            let vh = Scheme::vector_hardy(&Scheme::bilateral());
            assert_eq!(window(&vh, n).len(), (n_us + 1) * (n_us + 1));
            let t = Scheme::vector_hardy(&Scheme::finite(3));
            assert_eq!(window(&t, n).len(), 3 * (n_us + 1));
        }
    }

    #[test]
    fn sum_indices_are_padded_and_valid() {
        let s = Scheme::sum(&Scheme::hardy_disc(), &Scheme::hardy_bidisc());
        let w = window(&s, 2);
        assert_eq!(w.len(), 3 + 6);
        for i in &w {
            assert!(s.is_valid(i.coords()), "{i:?}");
            assert_eq!(i.coords().len(), 3);
        }
        assert!(!s.is_valid(&[0, 1, 5]));
    }

    #[test]
    fn invalid_indices_rejected() {
        assert!(Scheme::HardyDisc.check(&BasisIndex::from_slice(&[-1])).is_err());
        assert!(Scheme::Finite(2).check(&BasisIndex::from_slice(&[2])).is_err());
        assert!(Scheme::HardyBidisc.check(&BasisIndex::from_slice(&[1])).is_err());
    }
}
