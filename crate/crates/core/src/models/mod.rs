//! Concrete pairs of commuting isometries with declared defect classes.

mod intertwine;
mod registry;

pub use intertwine::{
    intertwiner_neg, intertwiner_off, intertwiner_pos, intertwiner_zero, invariant_embedding,
    intertwiner_reports, invariant_embedding_preimage, IntertwinerReport,
};
pub use registry::parse_model;

use std::sync::Arc;

use crate::bcl::{offdiag_triple, BclTriple, DefectClass, LazyPreset};
use crate::error::{Error, Result};
use crate::idx;
use crate::linops::dense::{self, CMat};
use crate::linops::{compose, direct_sum as op_sum, kron, BasisIndex, LazyOp, SparseVec};
use crate::spaces::Scheme;

#[derive(Clone, Debug)]
pub struct ModelPair {
    pub name: String,
    pub v1: LazyOp,
    pub v2: LazyOp,
    pub declared_class: DefectClass,
    pub provenance: String,
    /// A BCL triple the pair is unitarily equivalent to, when one is known.
    pub triple: Option<BclTriple>,
    /// Unitary `L` from the model space onto `H^2_D(E)` of `triple` with
    /// `L V_i L* = M_phi_i`.
    pub to_multiplier: Option<LazyOp>,
}

impl ModelPair {
    pub fn scheme(&self) -> &Arc<Scheme> {
        self.v1.domain()
    }

    pub fn product(&self) -> LazyOp {
        compose(&self.v1, &self.v2).unwrap().with_norm_bound(1.0).with_label("V")
    }
}

fn bidisc_shift(axis: usize) -> LazyOp {
    let s = Scheme::hardy_bidisc();
    let (a, b) = (s.clone(), s.clone());
    let label = if axis == 0 { "M_z1" } else { "M_z2" };
    LazyOp::from_actions(
        label,
        &s,
        &s,
        1.0,
        Some(1),
        move |i| {
            let mut c = [i.coords()[0], i.coords()[1]];
            c[axis] += 1;
            SparseVec::basis(&a, idx![c[0], c[1]]).unwrap()
        },
        move |i| {
            let mut c = [i.coords()[0], i.coords()[1]];
            if c[axis] == 0 {
                return SparseVec::zero(&b);
            }
            c[axis] -= 1;
            SparseVec::basis(&b, idx![c[0], c[1]]).unwrap()
        },
    )
}

/// `M_z1` on `H^2(D^2)`.
pub fn mz1() -> LazyOp {
    bidisc_shift(0)
}

/// `M_z2` on `H^2(D^2)`.
pub fn mz2() -> LazyOp {
    bidisc_shift(1)
}

/// Exponent map of the unitary `U` on `H^2(D^2)`.
pub fn special_unitary_exponents(m1: i64, m2: i64) -> (i64, i64) {
    if m1 >= m2 {
        (m1 + 2, m2)
    } else if m1 + 1 == m2 {
        (m1 + 1, m2 - 1)
    } else {
        (m1, m2 - 2)
    }
}

/// Inverse exponent map. The images of the three cases are
/// `{p >= q + 2}`, `{p = q + 1}` and `{p <= q}`, which partition the lattice.
pub fn special_unitary_inverse_exponents(p: i64, q: i64) -> (i64, i64) {
    if p >= q + 2 {
        (p - 2, q)
    } else if p == q + 1 {
        (q, q + 1)
    } else {
        (p, q + 2)
    }
}

/// The monomial-permuting unitary `U` on `H^2(D^2)`.
pub fn special_unitary() -> LazyOp {
    let s = Scheme::hardy_bidisc();
    let (a, b) = (s.clone(), s.clone());
    LazyOp::from_actions(
        "U",
        &s,
        &s,
        1.0,
        Some(2),
        move |i| {
            let (p, q) = special_unitary_exponents(i.coords()[0], i.coords()[1]);
            SparseVec::basis(&a, idx![p, q]).unwrap()
        },
        move |i| {
            let (p, q) = special_unitary_inverse_exponents(i.coords()[0], i.coords()[1]);
            SparseVec::basis(&b, idx![p, q]).unwrap()
        },
    )
}

/// `(tau1, tau2) = (U* M_z1, M_z2 U)`.
pub fn tau_pair() -> (LazyOp, LazyOp) {
    let u = special_unitary();
    let t1 = compose(&u.adjoint(), &mz1()).unwrap().with_norm_bound(1.0).with_label("tau1");
    let t2 = compose(&mz2(), &u).unwrap().with_norm_bound(1.0).with_label("tau2");
    (t1, t2)
}

pub fn pos_pair() -> ModelPair {
    ModelPair {
        name: "pos".into(),
        v1: mz1(),
        v2: mz2(),
        declared_class: DefectClass::Positive,
        provenance: "coordinate multipliers (M_z1, M_z2) on H2(D^2); defect E_(0,0)".into(),
        triple: Some(BclTriple::preset(LazyPreset::BilateralPZeroPlus)),
        to_multiplier: Some(intertwiner_pos()),
    }
}

pub fn neg_pair() -> ModelPair {
    let (t1, t2) = tau_pair();
    ModelPair {
        name: "neg".into(),
        v1: t1,
        v2: t2,
        declared_class: DefectClass::Negative,
        provenance: "(U* M_z1, M_z2 U) on H2(D^2) with the monomial-permuting unitary U; defect -E_z2"
            .into(),
        triple: Some(BclTriple::preset(LazyPreset::BilateralPMinus)),
        to_multiplier: Some(intertwiner_neg()),
    }
}

fn finite_unitary(w: &CMat, what: &str) -> Result<LazyOp> {
    if w.nrows() == 0 || w.nrows() != w.ncols() {
        return Err(Error::Dimension(format!("{what} must be a nonempty square matrix")));
    }
    let dev = dense::unitary_deviation(w);
    if dev > 1e-10 {
        return Err(Error::InvalidTriple(format!("{what} not unitary (deviation {dev:e})")));
    }
    Ok(LazyOp::from_finite_matrix(w)?.with_norm_bound(1.0).with_label(what))
}

fn mz() -> LazyOp {
    crate::bcl::hardy_shift()
}

/// `(M_z (x) I, I (x) W)` on `H^2_D(C^d)`.
pub fn zero_pair(w: &CMat) -> Result<ModelPair> {
    let wo = finite_unitary(w, "W")?;
    let d = w.nrows();
    let id = LazyOp::identity(&Scheme::finite(d));
    Ok(ModelPair {
        name: "zero".into(),
        v1: kron(&mz(), &id).with_label("M_z (x) I"),
        v2: kron(&LazyOp::identity(&Scheme::hardy_disc()), &wo).with_label("I (x) W"),
        declared_class: DefectClass::Zero,
        provenance: format!("(M_z (x) I, I (x) W) on H2(D) (x) C^{d}; zero defect"),
        triple: Some(BclTriple::finite(w.clone(), CMat::identity(d, d))?),
        to_multiplier: Some(intertwiner_zero(w)?.adjoint()),
    })
}

/// `(M_z (x) W*, I (x) W)`: the multiplier pair of `(C^d, I, W)`.
pub fn zero_pair_twisted(w: &CMat) -> Result<ModelPair> {
    let wo = finite_unitary(w, "W")?;
    let d = w.nrows();
    Ok(ModelPair {
        name: "zero-twisted".into(),
        v1: kron(&mz(), &wo.adjoint()).with_label("M_z (x) W*"),
        v2: kron(&LazyOp::identity(&Scheme::hardy_disc()), &wo).with_label("I (x) W"),
        declared_class: DefectClass::Zero,
        provenance: format!("(M_z (x) W*, I (x) W) on H2(D) (x) C^{d}; multiplier pair of (C^{d}, I, W)"),
        triple: Some(BclTriple::finite(w.clone(), CMat::identity(d, d))?),
        to_multiplier: Some(LazyOp::identity(&Scheme::vector_hardy(&Scheme::finite(d)))),
    })
}

/// `(M_z (x) I, M_z (x) W)` on `H^2_D(C^d)`.
pub fn offdiag_pair(w: &CMat) -> Result<ModelPair> {
    let wo = finite_unitary(w, "W")?;
    let d = w.nrows();
    let id = LazyOp::identity(&Scheme::finite(d));
    Ok(ModelPair {
        name: "offdiag".into(),
        v1: kron(&mz(), &id).with_label("M_z (x) I"),
        v2: kron(&mz(), &wo).with_label("M_z (x) W"),
        declared_class: DefectClass::OffDiagonal,
        provenance: format!("(M_z (x) I, M_z (x) W) on H2(D) (x) C^{d}; equal ranges"),
        triple: Some(offdiag_triple(w)?),
        to_multiplier: Some(intertwiner_off(w)?.0.adjoint()),
    })
}

/// Multiplier pair of a triple.
pub fn from_triple(name: &str, t: &BclTriple) -> ModelPair {
    let (m1, m2) = t.multiplier_pair();
    let class = t.classify(4).class;
    ModelPair {
        name: name.into(),
        v1: m1,
        v2: m2,
        declared_class: class,
        provenance: format!("multiplier pair of the {}", t.describe()),
        triple: Some(t.clone()),
        to_multiplier: Some(LazyOp::identity(&Scheme::vector_hardy(&t.fiber()))),
    }
}

pub fn psi_pair() -> ModelPair {
    let mut m = from_triple("psi", &BclTriple::preset(LazyPreset::BilateralPMinus));
    m.provenance = "multipliers of (l2(Z), p_-, bilateral shift) on H2_D(l2(Z)); defect -E_0 (x) E_{-1}".into();
    m
}

pub fn eta_pair() -> ModelPair {
    let mut m = from_triple("eta", &BclTriple::preset(LazyPreset::BilateralPZeroPlus));
    m.provenance = "multipliers of (l2(Z), p_0+, bilateral shift) on H2_D(l2(Z)); defect E_0 (x) E_{-1}".into();
    m
}

/// `(V1 (x) I_d, V2 (x) I_d)`.
pub fn tensor_multiplicity(pair: &ModelPair, d: usize) -> Result<ModelPair> {
    if d == 0 {
        return Err(Error::Dimension("multiplicity must be positive".into()));
    }
    let id = LazyOp::identity(&Scheme::finite(d));
    let triple = match &pair.triple {
        Some(BclTriple::Finite { u, p }) => {
            let i = CMat::identity(d, d);
            Some(BclTriple::finite_with_tol(dense::kron(u, &i), dense::kron(p, &i), 1e-10)?)
        }
        _ => None,
    };
    Ok(ModelPair {
        name: format!("tensor:{}:{d}", pair.name),
        v1: kron(&pair.v1, &id),
        v2: kron(&pair.v2, &id),
        declared_class: pair.declared_class,
        provenance: format!("{} tensored with C^{d}", pair.provenance),
        triple,
        to_multiplier: None,
    })
}

/// Class of an orthogonal direct sum of pairs.
pub fn combine_classes(a: DefectClass, b: DefectClass) -> DefectClass {
    use DefectClass::*;
    match (a, b) {
        (x, y) if x == y => x,
        // a shipped zero-class summand never has equal ranges, so it breaks
        // the off-diagonal range identity of the other summand
        (Zero, OffDiagonal) | (OffDiagonal, Zero) => Mixed,
        (Zero, x) | (x, Zero) => x,
        _ => Mixed,
    }
}

pub fn direct_sum(a: &ModelPair, b: &ModelPair) -> ModelPair {
    let triple = match (&a.triple, &b.triple) {
        (Some(BclTriple::Finite { u: u1, p: p1 }), Some(BclTriple::Finite { u: u2, p: p2 })) => {
            BclTriple::finite_with_tol(dense::block_diag(u1, u2), dense::block_diag(p1, p2), 1e-10).ok()
        }
        _ => None,
    };
    ModelPair {
        name: format!("sum:{}:{}", a.name, b.name),
        v1: op_sum(&a.v1, &b.v1),
        v2: op_sum(&a.v2, &b.v2),
        declared_class: combine_classes(a.declared_class, b.declared_class),
        provenance: format!("direct sum of [{}] and [{}]", a.provenance, b.provenance),
        triple,
        to_multiplier: None,
    }
}

/// `W = diag(1, i)`, the default two-point spectrum used by examples.
pub fn default_w() -> CMat {
    dense::diag(&[dense::r(1.0), dense::c(0.0, 1.0)])
}

pub(crate) fn basis(s: &Arc<Scheme>, i: BasisIndex) -> SparseVec {
    SparseVec::basis(s, i).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::checks;
    use crate::spaces::window;

    #[test]
    fn special_unitary_inverse_is_exact() {
        for m1 in 0..30 {
            for m2 in 0..30 {
                let (p, q) = special_unitary_exponents(m1, m2);
                assert_eq!(special_unitary_inverse_exponents(p, q), (m1, m2));
                assert!(p >= 0 && q >= 0);
            }
        }
        for p in 0..30 {
            for q in 0..30 {
                let (a, b) = special_unitary_inverse_exponents(p, q);
                assert!(a >= 0 && b >= 0);
                assert_eq!(special_unitary_exponents(a, b), (p, q));
            }
        }
    }

    #[test]
    fn tau_on_constant() {
        let (t1, t2) = tau_pair();
        let one = idx![0, 0];
        assert_eq!(t1.apply_basis(&one).entries().keys().next().unwrap(), &idx![0, 1]);
        assert_eq!(t2.apply_basis(&one).entries().keys().next().unwrap(), &idx![2, 1]);
    }

    fn all_models() -> Vec<ModelPair> {
        let w = default_w();
        vec![
            pos_pair(),
            neg_pair(),
            zero_pair(&w).unwrap(),
            zero_pair_twisted(&w).unwrap(),
            offdiag_pair(&w).unwrap(),
            psi_pair(),
            eta_pair(),
            tensor_multiplicity(&neg_pair(), 2).unwrap(),
            direct_sum(&pos_pair(), &neg_pair()),
        ]
    }

    #[test]
    fn every_model_is_a_commuting_pair_of_isometries() {
        for m in all_models() {
            let w = window(m.scheme(), 6);
            for rep in checks::pair_checks(&m.v1, &m.v2, &w, 1e-13) {
                assert!(rep.passed, "{}: {rep:?}", m.name);
            }
        }
    }

    #[test]
    fn non_unitary_w_rejected() {
        let w = CMat::from_element(1, 1, dense::r(2.0));
        assert!(zero_pair(&w).is_err());
        assert!(offdiag_pair(&w).is_err());
    }
}
