use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DVector;
use smallvec::SmallVec;

use super::C64;
use crate::error::{Error, Result};
use crate::spaces::Scheme;

/// Integer label of an orthonormal basis vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisIndex(pub SmallVec<[i64; 4]>);

impl BasisIndex {
    pub fn from_slice(c: &[i64]) -> Self {
        BasisIndex(SmallVec::from_slice(c))
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn concat(&self, other: &BasisIndex) -> BasisIndex {
        let mut c = self.0.clone();
        c.extend_from_slice(&other.0);
        BasisIndex(c)
    }

    pub(crate) fn tagged(tag: i64, side: &BasisIndex, width: usize) -> BasisIndex {
        let mut c: SmallVec<[i64; 4]> = SmallVec::with_capacity(width);
        c.push(tag);
        c.extend_from_slice(&side.0);
        while c.len() < width {
            c.push(0);
        }
        BasisIndex(c)
    }
}

#[macro_export]
macro_rules! idx {
    ($($x:expr),* $(,)?) => {
        $crate::linops::BasisIndex::from_slice(&[$($x as i64),*])
    };
}

/// Finitely supported vector plus a certified bound on the norm of whatever
/// was truncated away to obtain it.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseVec {
    scheme: Arc<Scheme>,
    entries: BTreeMap<BasisIndex, C64>,
    tail_bound: f64,
}

impl SparseVec {
    pub fn zero(scheme: &Arc<Scheme>) -> Self {
        SparseVec {
            scheme: scheme.clone(),
            entries: BTreeMap::new(),
            tail_bound: 0.0,
        }
    }

    pub fn basis(scheme: &Arc<Scheme>, idx: BasisIndex) -> Result<Self> {
        scheme.check(&idx)?;
        let mut v = SparseVec::zero(scheme);
        v.entries.insert(idx, C64::new(1.0, 0.0));
        Ok(v)
    }

    pub fn from_entries<I>(scheme: &Arc<Scheme>, it: I) -> Result<Self>
    where
        I: IntoIterator<Item = (BasisIndex, C64)>,
    {
        let mut v = SparseVec::zero(scheme);
        for (i, c) in it {
            scheme.check(&i)?;
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::NonFinite("sparse vector entry".into()));
            }
            v.add_at(i, c);
        }
        v.prune();
        Ok(v)
    }

    /// Coefficients of `x` on the listed window positions.
    pub fn from_dense(scheme: &Arc<Scheme>, window: &[BasisIndex], x: &DVector<C64>) -> Self {
        let mut v = SparseVec::zero(scheme);
        for (k, i) in window.iter().enumerate() {
            if x[k] != C64::new(0.0, 0.0) {
                v.entries.insert(i.clone(), x[k]);
            }
        }
        v
    }

    pub fn scheme(&self) -> &Arc<Scheme> {
        &self.scheme
    }

    pub fn entries(&self) -> &BTreeMap<BasisIndex, C64> {
        &self.entries
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn with_tail(mut self, t: f64) -> Self {
        self.tail_bound = t;
        self
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: &BasisIndex) -> C64 {
        self.entries.get(i).copied().unwrap_or_default()
    }

    /// Adds `c` at `i` without validating the index.
    pub(crate) fn add_at(&mut self, i: BasisIndex, c: C64) {
        *self.entries.entry(i).or_default() += c;
    }

    /// Drops exact zeros so that absent means zero.
    pub(crate) fn prune(&mut self) {
        self.entries.retain(|_, c| *c != C64::new(0.0, 0.0));
    }

    pub fn norm(&self) -> f64 {
        self.entries.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `<self, other>`, linear in the first slot.
    pub fn inner(&self, other: &SparseVec) -> C64 {
        let (small, large, flip) = if self.len() <= other.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut s = C64::new(0.0, 0.0);
        for (i, a) in &small.entries {
            if let Some(b) = large.entries.get(i) {
                s += if flip { b * a.conj() } else { a * b.conj() };
            }
        }
        s
    }

    pub fn scale(&self, c: C64) -> SparseVec {
        let mut v = self.clone();
        for x in v.entries.values_mut() {
            *x *= c;
        }
        v.tail_bound *= c.norm();
        v.prune();
        v
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: C64, other: &SparseVec) -> SparseVec {
        assert_eq!(self.scheme, other.scheme, "axpy across schemes");
        let mut v = self.clone();
        for (i, x) in &other.entries {
            v.add_at(i.clone(), c * x);
        }
        v.tail_bound += c.norm() * other.tail_bound;
        v.prune();
        v
    }

    pub fn sub(&self, other: &SparseVec) -> SparseVec {
        self.axpy(C64::new(-1.0, 0.0), other)
    }

    /// Coefficients on a window, entries outside are dropped.
    pub fn to_dense(&self, window: &[BasisIndex]) -> DVector<C64> {
        DVector::from_iterator(window.len(), window.iter().map(|i| self.get(i)))
    }

    pub fn max_grade(&self) -> Option<u32> {
        self.entries.keys().map(|i| self.scheme.grade(i.coords())).max()
    }
}
