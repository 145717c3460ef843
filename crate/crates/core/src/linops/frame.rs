use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use super::dense::{self, CMat};
use super::{BasisIndex, LazyOp, SparseVec};
use crate::spaces::{positions, Scheme};

/// Finite-dimensional subspace given by orthonormal columns over an explicit
/// list of basis indices.
#[derive(Clone, Debug)]
pub struct Frame {
    pub scheme: Arc<Scheme>,
    pub coords: Vec<BasisIndex>,
    pub basis: CMat,
}

impl Frame {
    pub fn empty(scheme: &Arc<Scheme>) -> Frame {
        Frame {
            scheme: scheme.clone(),
            coords: Vec::new(),
            basis: CMat::zeros(0, 0),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Orthonormal basis of the span of the given vectors.
    pub fn from_vectors(scheme: &Arc<Scheme>, vecs: &[SparseVec], tol: f64) -> Frame {
        let coords: Vec<BasisIndex> = vecs
            .iter()
            .flat_map(|v| v.entries().keys().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let pos = positions(&coords);
        let mut m = CMat::zeros(coords.len(), vecs.len());
        for (k, v) in vecs.iter().enumerate() {
            for (i, c) in v.entries() {
                m[(pos[i], k)] = *c;
            }
        }
        Frame {
            scheme: scheme.clone(),
            basis: dense::orth(&m, tol),
            coords,
        }
    }

    pub fn vectors(&self) -> Vec<SparseVec> {
        (0..self.dim())
            .map(|k| {
                let col = self.basis.column(k).into_owned();
                SparseVec::from_dense(&self.scheme, &self.coords, &col)
            })
            .collect()
    }

    /// Coefficients of the basis on `window`; coordinates outside it are dropped.
    pub fn on_window(&self, window: &[BasisIndex]) -> CMat {
        let pos = positions(window);
        let mut m = CMat::zeros(window.len(), self.dim());
        for (r, i) in self.coords.iter().enumerate() {
            if let Some(&p) = pos.get(i) {
                m.set_row(p, &self.basis.row(r));
            }
        }
        m
    }

    pub fn projector_on(&self, window: &[BasisIndex]) -> CMat {
        dense::projector(&self.on_window(window))
    }

    /// Largest coefficient sitting outside `window`.
    pub fn leakage(&self, window: &[BasisIndex]) -> f64 {
        let inside: HashSet<&BasisIndex> = window.iter().collect();
        let mut worst: f64 = 0.0;
        for (r, i) in self.coords.iter().enumerate() {
            if !inside.contains(i) {
                for k in 0..self.dim() {
                    worst = worst.max(self.basis[(r, k)].norm());
                }
            }
        }
        worst
    }
}

/// `ker(op) ∩ span(window)`, exact up to the SVD: every output coordinate of
/// the window's images enters the constraint matrix.
pub fn kernel_in_window(op: &LazyOp, window: &[BasisIndex], tol: f64) -> Frame {
    let images: Vec<SparseVec> = window.iter().map(|i| op.apply_basis(i)).collect();
    let rows: Vec<BasisIndex> = images
        .iter()
        .flat_map(|v| v.entries().keys().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let pos = positions(&rows);
    let mut a = CMat::zeros(rows.len(), window.len());
    for (c, v) in images.iter().enumerate() {
        for (j, x) in v.entries() {
            a[(pos[j], c)] = *x;
        }
    }
    Frame {
        scheme: op.domain().clone(),
        coords: window.to_vec(),
        basis: dense::nullspace(&a, tol),
    }
}

/// `op(span src) ∩ span(target)`.
pub fn image_within(op: &LazyOp, src: &Frame, target: &[BasisIndex], tol: f64) -> Frame {
    let cod = op.codomain();
    if src.dim() == 0 {
        return Frame::empty(cod);
    }
    let images: Vec<SparseVec> = src.vectors().iter().map(|v| op.apply_unchecked(v)).collect();
    let inside: HashSet<&BasisIndex> = target.iter().collect();
    let outside: Vec<BasisIndex> = images
        .iter()
        .flat_map(|v| v.entries().keys().filter(|i| !inside.contains(i)).cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let pos = positions(&outside);
    let mut o = CMat::zeros(outside.len(), images.len());
    for (c, v) in images.iter().enumerate() {
        for (j, x) in v.entries() {
            if let Some(&r) = pos.get(j) {
                o[(r, c)] = *x;
            }
        }
    }
    let coef = dense::nullspace(&o, tol);
    let vecs: Vec<SparseVec> = (0..coef.ncols())
        .map(|k| {
            let mut acc = SparseVec::zero(cod);
            for (c, v) in images.iter().enumerate() {
                acc = acc.axpy(coef[(c, k)], v);
            }
            // drop round-off residue outside the target
            SparseVec::from_dense(cod, target, &acc.to_dense(target))
        })
        .collect();
    let mut f = Frame::from_vectors(cod, &vecs, tol);
    if f.coords.is_empty() {
        f.basis = CMat::zeros(0, 0);
    }
    f
}

/// Gram matrix `<v_j, v_i>`.
pub fn gram(vecs: &[SparseVec]) -> CMat {
    let n = vecs.len();
    let mut g = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = vecs[j].inner(&vecs[i]);
        }
    }
    g
}
