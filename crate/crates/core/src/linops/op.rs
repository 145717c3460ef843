use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use nalgebra::DMatrix;

use super::{dense, BasisIndex, SparseVec, C64};
use crate::error::{Error, Result};
use crate::spaces::{positions, Scheme};

/// Exact action on one basis vector.
pub type Action = dyn Fn(&BasisIndex) -> SparseVec + Send + Sync;

struct Core {
    domain: Arc<Scheme>,
    codomain: Arc<Scheme>,
    fwd: Box<Action>,
    adj: Box<Action>,
    memo: [RwLock<HashMap<BasisIndex, SparseVec>>; 2],
}

/// Bounded operator given by its exact action (and its adjoint's) on basis
/// vectors. Taking the adjoint is free and shares the cache.
#[derive(Clone)]
pub struct LazyOp {
    core: Arc<Core>,
    flipped: bool,
    norm_bound: f64,
    band_radius: Option<u32>,
    label: Arc<str>,
}

impl fmt::Debug for LazyOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LazyOp")
            .field("label", &self.label)
            .field("domain", &self.domain().to_string())
            .field("codomain", &self.codomain().to_string())
            .field("norm_bound", &self.norm_bound)
            .field("band_radius", &self.band_radius)
            .finish()
    }
}

impl LazyOp {
    pub fn from_actions<F, G>(
        label: impl Into<String>,
        domain: &Arc<Scheme>,
        codomain: &Arc<Scheme>,
        norm_bound: f64,
        band_radius: Option<u32>,
        fwd: F,
        adj: G,
    ) -> Self
    where
        F: Fn(&BasisIndex) -> SparseVec + Send + Sync + 'static,
        G: Fn(&BasisIndex) -> SparseVec + Send + Sync + 'static,
    {
        LazyOp {
            core: Arc::new(Core {
                domain: domain.clone(),
                codomain: codomain.clone(),
                fwd: Box::new(fwd),
                adj: Box::new(adj),
                memo: [RwLock::new(HashMap::new()), RwLock::new(HashMap::new())],
            }),
            flipped: false,
            norm_bound,
            band_radius,
            label: Arc::from(label.into()),
        }
    }

    pub fn domain(&self) -> &Arc<Scheme> {
        if self.flipped {
            &self.core.codomain
        } else {
            &self.core.domain
        }
    }

    pub fn codomain(&self) -> &Arc<Scheme> {
        if self.flipped {
            &self.core.domain
        } else {
            &self.core.codomain
        }
    }

    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    /// Bound on `|grade(out) - grade(in)|` over the support of basis images.
    pub fn band_radius(&self) -> Option<u32> {
        self.band_radius
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_norm_bound(mut self, b: f64) -> Self {
        self.norm_bound = b;
        self
    }

    pub fn with_band_radius(mut self, b: Option<u32>) -> Self {
        self.band_radius = b;
        self
    }

    pub fn with_label(mut self, l: impl Into<String>) -> Self {
        self.label = Arc::from(l.into());
        self
    }

    pub fn adjoint(&self) -> LazyOp {
        LazyOp {
            core: self.core.clone(),
            flipped: !self.flipped,
            norm_bound: self.norm_bound,
            band_radius: self.band_radius,
            label: Arc::from(adjoint_label(&self.label)),
        }
    }

    /// Image of a basis vector. Panics on an index outside the domain scheme.
    pub fn apply_basis(&self, i: &BasisIndex) -> SparseVec {
        debug_assert!(self.domain().is_valid(i.coords()), "{i:?} not in {}", self.domain());
        let slot = self.flipped as usize;
        if let Some(v) = self.core.memo[slot].read().unwrap().get(i) {
            return v.clone();
        }
        let v = if self.flipped {
            (self.core.adj)(i)
        } else {
            (self.core.fwd)(i)
        };
        self.core.memo[slot]
            .write()
            .unwrap()
            .insert(i.clone(), v.clone());
        v
    }

    pub fn apply(&self, v: &SparseVec) -> Result<SparseVec> {
        if v.scheme() != self.domain() {
            return Err(Error::SchemeMismatch {
                expected: self.domain().to_string(),
                found: v.scheme().to_string(),
            });
        }
        Ok(self.apply_unchecked(v))
    }

    pub(crate) fn apply_unchecked(&self, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::zero(self.codomain());
        for (i, c) in v.entries() {
            for (j, a) in self.apply_basis(i).entries() {
                out.add_at(j.clone(), c * a);
            }
        }
        out.prune();
        out.with_tail(self.norm_bound * v.tail_bound())
    }

    pub fn identity(scheme: &Arc<Scheme>) -> LazyOp {
        let s1 = scheme.clone();
        let s2 = scheme.clone();
        LazyOp::from_actions(
            "I",
            scheme,
            scheme,
            1.0,
            Some(0),
            move |i| basis_unchecked(&s1, i),
            move |i| basis_unchecked(&s2, i),
        )
    }

    pub fn zero(domain: &Arc<Scheme>, codomain: &Arc<Scheme>) -> LazyOp {
        let c1 = codomain.clone();
        let c2 = domain.clone();
        LazyOp::from_actions(
            "0",
            domain,
            codomain,
            0.0,
            Some(0),
            move |_| SparseVec::zero(&c1),
            move |_| SparseVec::zero(&c2),
        )
    }

    /// Operator acting as `m` on the span of `window` and as zero on its complement.
    pub fn from_matrix(scheme: &Arc<Scheme>, window: &[BasisIndex], m: &DMatrix<C64>) -> Result<LazyOp> {
        if m.nrows() != m.ncols() || m.nrows() != window.len() {
            return Err(Error::Dimension(format!(
                "matrix {}x{} over a window of {}",
                m.nrows(),
                m.ncols(),
                window.len()
            )));
        }
        if m.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite("from_matrix".into()));
        }
        for i in window {
            scheme.check(i)?;
        }
        let pos = Arc::new(positions(window));
        let w = Arc::new(window.to_vec());
        let mut band = 0u32;
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                if m[(r, c)] != C64::new(0.0, 0.0) {
                    let gr = scheme.grade(window[r].coords()) as i64;
                    let gc = scheme.grade(window[c].coords()) as i64;
                    band = band.max((gr - gc).unsigned_abs() as u32);
                }
            }
        }
        let norm = dense::spectral_norm(m) * (1.0 + 1e-12) + 1e-300;
        let fwd_m = Arc::new(m.clone());
        let adj_m = Arc::new(m.adjoint());
        let make = |mat: Arc<DMatrix<C64>>| {
            let pos = pos.clone();
            let w = w.clone();
            let s = scheme.clone();
            move |i: &BasisIndex| {
                let mut out = SparseVec::zero(&s);
                if let Some(&c) = pos.get(i) {
                    for r in 0..w.len() {
                        out.add_at(w[r].clone(), mat[(r, c)]);
                    }
                    out.prune();
                }
                out
            }
        };
        Ok(LazyOp::from_actions(
            "M",
            scheme,
            scheme,
            norm,
            Some(band),
            make(fwd_m),
            make(adj_m),
        ))
    }

    /// Full matrix on a finite scheme.
    pub fn from_finite_matrix(m: &DMatrix<C64>) -> Result<LazyOp> {
        let s = Scheme::finite(m.nrows());
        let w = crate::spaces::window(&s, 0);
        LazyOp::from_matrix(&s, &w, m)
    }
}

fn adjoint_label(l: &str) -> String {
    if let Some(inner) = l.strip_suffix('*') {
        if !inner.contains(' ') {
            return inner.to_string();
        }
    }
    if l.contains(' ') {
        format!("({l})*")
    } else {
        format!("{l}*")
    }
}

pub(crate) fn basis_unchecked(s: &Arc<Scheme>, i: &BasisIndex) -> SparseVec {
    let mut v = SparseVec::zero(s);
    v.add_at(i.clone(), C64::new(1.0, 0.0));
    v
}

fn same_scheme(a: &Arc<Scheme>, b: &Arc<Scheme>) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::SchemeMismatch {
            expected: a.to_string(),
            found: b.to_string(),
        })
    }
}

fn add_band(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    Some(a? + b?)
}

fn max_band(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    Some(a?.max(b?))
}

/// `a b`
pub fn compose(a: &LazyOp, b: &LazyOp) -> Result<LazyOp> {
    same_scheme(a.domain(), b.codomain())?;
    let (a1, b1) = (a.clone(), b.clone());
    let (a2, b2) = (a.adjoint(), b.adjoint());
    Ok(LazyOp::from_actions(
        format!("{} {}", a.label(), b.label()),
        b.domain(),
        a.codomain(),
        a.norm_bound() * b.norm_bound(),
        add_band(a.band_radius(), b.band_radius()),
        move |i| a1.apply_unchecked(&b1.apply_basis(i)),
        move |i| b2.apply_unchecked(&a2.apply_basis(i)),
    ))
}

/// `ca a + cb b`
pub fn lincomb(ca: C64, a: &LazyOp, cb: C64, b: &LazyOp) -> Result<LazyOp> {
    same_scheme(a.domain(), b.domain())?;
    same_scheme(a.codomain(), b.codomain())?;
    let (a1, b1) = (a.clone(), b.clone());
    let (a2, b2) = (a.adjoint(), b.adjoint());
    let (ca2, cb2) = (ca.conj(), cb.conj());
    Ok(LazyOp::from_actions(
        format!("{} + {}", a.label(), b.label()),
        a.domain(),
        a.codomain(),
        ca.norm() * a.norm_bound() + cb.norm() * b.norm_bound(),
        max_band(a.band_radius(), b.band_radius()),
        move |i| a1.apply_basis(i).scale(ca).axpy(cb, &b1.apply_basis(i)),
        move |i| a2.apply_basis(i).scale(ca2).axpy(cb2, &b2.apply_basis(i)),
    ))
}

pub fn add(a: &LazyOp, b: &LazyOp) -> Result<LazyOp> {
    lincomb(C64::new(1.0, 0.0), a, C64::new(1.0, 0.0), b)
}

pub fn sub(a: &LazyOp, b: &LazyOp) -> Result<LazyOp> {
    lincomb(C64::new(1.0, 0.0), a, C64::new(-1.0, 0.0), b)
        .map(|op| op.with_label(format!("{} - {}", a.label(), b.label())))
}

pub fn scale(c: C64, a: &LazyOp) -> LazyOp {
    let a1 = a.clone();
    let a2 = a.adjoint();
    let cc = c.conj();
    LazyOp::from_actions(
        format!("({c}) {}", a.label()),
        a.domain(),
        a.codomain(),
        c.norm() * a.norm_bound(),
        a.band_radius(),
        move |i| a1.apply_basis(i).scale(c),
        move |i| a2.apply_basis(i).scale(cc),
    )
}

/// `I - p`
pub fn complement(p: &LazyOp) -> Result<LazyOp> {
    sub(&LazyOp::identity(p.domain()), p).map(|op| op.with_norm_bound(1.0))
}

fn kron_action(x: &LazyOp, y: &LazyOp, dom: Arc<Scheme>, cod: Arc<Scheme>) -> impl Fn(&BasisIndex) -> SparseVec {
    let (x, y) = (x.clone(), y.clone());
    move |i| {
        let (i1, i2) = dom.split_tensor(i);
        let u = x.apply_basis(&i1);
        let v = y.apply_basis(&i2);
        let mut out = SparseVec::zero(&cod);
        for (j1, a) in u.entries() {
            for (j2, b) in v.entries() {
                out.add_at(j1.concat(j2), a * b);
            }
        }
        out.prune();
        out
    }
}

/// `a (x) b` on the tensor product of the schemes.
pub fn kron(a: &LazyOp, b: &LazyOp) -> LazyOp {
    let dom = Scheme::tensor(a.domain(), b.domain());
    let cod = Scheme::tensor(a.codomain(), b.codomain());
    let f = kron_action(a, b, dom.clone(), cod.clone());
    let g = kron_action(&a.adjoint(), &b.adjoint(), cod.clone(), dom.clone());
    LazyOp::from_actions(
        format!("{} (x) {}", a.label(), b.label()),
        &dom,
        &cod,
        a.norm_bound() * b.norm_bound(),
        add_band(a.band_radius(), b.band_radius()),
        move |i| f(i),
        move |i| g(i),
    )
}

fn sum_action(x: &LazyOp, y: &LazyOp, dom: Arc<Scheme>, cod: Arc<Scheme>) -> impl Fn(&BasisIndex) -> SparseVec {
    let (x, y) = (x.clone(), y.clone());
    let width = cod.arity();
    move |i| {
        let (tag, side) = dom.split_sum(i);
        let img = if tag == 0 { x.apply_basis(&side) } else { y.apply_basis(&side) };
        let mut out = SparseVec::zero(&cod);
        for (j, c) in img.entries() {
            out.add_at(BasisIndex::tagged(tag as i64, j, width), *c);
        }
        out
    }
}

/// `a (+) b` on the direct sum of the schemes.
pub fn direct_sum(a: &LazyOp, b: &LazyOp) -> LazyOp {
    let dom = Scheme::sum(a.domain(), b.domain());
    let cod = Scheme::sum(a.codomain(), b.codomain());
    let f = sum_action(a, b, dom.clone(), cod.clone());
    let g = sum_action(&a.adjoint(), &b.adjoint(), cod.clone(), dom.clone());
    LazyOp::from_actions(
        format!("{} (+) {}", a.label(), b.label()),
        &dom,
        &cod,
        a.norm_bound().max(b.norm_bound()),
        max_band(a.band_radius(), b.band_radius()),
        move |i| f(i),
        move |i| g(i),
    )
}

/// Matrix of `P_cod op |dom`, rows follow `cod`, columns follow `dom`.
pub fn compress(op: &LazyOp, dom: &[BasisIndex], cod: &[BasisIndex]) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(cod.len(), dom.len());
    let pos = positions(cod);
    for (c, i) in dom.iter().enumerate() {
        for (j, a) in op.apply_basis(i).entries() {
            if let Some(&r) = pos.get(j) {
                m[(r, c)] = *a;
            }
        }
    }
    m
}

/// Square compression onto one window.
pub fn compress_square(op: &LazyOp, w: &[BasisIndex]) -> DMatrix<C64> {
    compress(op, w, w)
}
