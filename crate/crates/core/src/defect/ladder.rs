//! Equivalent characterizations of each defect class, evaluated on a window.

use serde::Serialize;

use super::{defect_report, fringe_matrices, KernelData, DefectReport, FringeReport, SUBSPACE_TOL};
use crate::bcl::{sarkar_triple, BclTriple, DefectClass, EIG_TOL};
use crate::linops::checks::double_commutation_deviation;
use crate::linops::dense::{self, CMat};
use crate::linops::{complement, compose, compress, lincomb, sub, Frame, LazyOp, C64};
use crate::models::ModelPair;
use crate::spaces::window;

#[derive(Clone, Debug, Serialize)]
pub struct LadderItem {
    pub label: String,
    /// `None` when the item could not be evaluated.
    pub holds: Option<bool>,
    pub deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LadderReport {
    pub model: String,
    pub grade: u32,
    pub class: DefectClass,
    /// `C >= 0`, doubly commuting, `U ran P ⊆ ran P`: all hold or none.
    pub slobcl: Vec<LadderItem>,
    /// The characterizations of `class`, all expected to hold.
    pub ladder: Vec<LadderItem>,
    pub triple_source: Option<String>,
    pub consistent: bool,
}

fn item(label: &str, holds: bool, deviation: f64) -> LadderItem {
    LadderItem { label: label.into(), holds: Some(holds), deviation }
}

fn skipped(label: &str) -> LadderItem {
    LadderItem { label: label.into(), holds: None, deviation: f64::NAN }
}

fn ok(x: f64) -> bool {
    x <= SUBSPACE_TOL
}

struct Subspaces<'a> {
    kd: &'a KernelData,
}

impl Subspaces<'_> {
    fn gap(&self, a: &Frame, b: &Frame) -> f64 {
        dense::inclusion_gap(&self.kd.basis(a), &self.kd.basis(b))
    }

    fn equal(&self, a: &Frame, b: &Frame) -> (bool, f64) {
        let g = self.gap(a, b).max(self.gap(b, a));
        (a.dim() == b.dim() && ok(g), g)
    }

    fn strictly_inside(&self, a: &Frame, b: &Frame) -> (bool, f64) {
        let g = self.gap(a, b);
        (ok(g) && a.dim() < b.dim(), g)
    }
}

/// `max |op|` on the fiber window, with the codomain widened by the band.
fn fiber_max(t: &BclTriple, op: &LazyOp, grade: u32) -> f64 {
    let s = t.fiber();
    let b = op.band_radius().unwrap_or(2);
    dense::max_abs(&compress(op, &window(&s, grade), &window(&s, grade + b)))
}

/// Triple-side characterization of `class`.
fn triple_item(t: &BclTriple, class: DefectClass, grade: u32) -> LadderItem {
    let u = t.u_op();
    let p = t.p_op();
    let pp = complement(&p).unwrap();
    let defect_nonzero = !t.classify(grade).eigenvalues.is_empty();
    match class {
        DefectClass::Zero => {
            let d = fiber_max(t, &sub(&compose(&u, &p).unwrap(), &compose(&p, &u).unwrap()).unwrap(), grade);
            item("triple: ran P reduces U", ok(d), d)
        }
        DefectClass::Positive => {
            let d = fiber_max(t, &compose(&pp, &compose(&u, &p).unwrap()).unwrap(), grade);
            item("triple: U ran P strictly inside ran P", ok(d) && defect_nonzero, d)
        }
        DefectClass::Negative => {
            let d = fiber_max(t, &compose(&p, &compose(&u, &pp).unwrap()).unwrap(), grade);
            item("triple: U ran P^perp strictly inside ran P^perp", ok(d) && defect_nonzero, d)
        }
        DefectClass::OffDiagonal => {
            let d = fiber_max(t, &t.offdiag_residual(), grade);
            item("triple: U*PU = P^perp", ok(d), d)
        }
        DefectClass::Mixed => skipped("triple"),
    }
}

fn projector_gap(a: &CMat, b: &CMat) -> f64 {
    dense::max_abs(&(a - b))
}

/// Evaluates the ladder of the detected class together with the three-way
/// positivity equivalence.
pub fn equivalence_suite(model: &ModelPair, grade: u32) -> LadderReport {
    let rep: DefectReport = defect_report(model, grade);
    let fr: FringeReport = fringe_matrices(&model.v1, &model.v2, grade);
    let kd = &rep.kernels;
    let sp = Subspaces { kd };
    let (v1, v2) = (&model.v1, &model.v2);
    let w = &kd.window;

    let c = &rep.matrix;
    let (vals, _) = dense::hermitian_eigen(c);
    let lo = vals.first().copied().unwrap_or(0.0);
    let hi = vals.last().copied().unwrap_or(0.0);
    let c_norm = dense::max_abs(c);
    let c_zero = c_norm <= EIG_TOL;
    let psd = lo >= -EIG_TOL;
    let nsd = hi <= EIG_TOL;
    let dc = double_commutation_deviation(v1, v2, w);

    let (triple, triple_source) = match &model.triple {
        Some(t) => (Some(t.clone()), Some("model".to_string())),
        None => match sarkar_triple(v1, v2, grade, super::KERNEL_TOL) {
            Ok(t) => (Some(t), Some("kernel of V*".to_string())),
            Err(_) => (None, None),
        },
    };

    let mut slobcl = vec![
        item("C >= 0", psd, lo.min(0.0).abs()),
        item("V1, V2 doubly commute", ok(dc), dc),
    ];
    slobcl.push(match &triple {
        Some(t) => {
            let d = fiber_max(t, &compose(&complement(&t.p_op()).unwrap(), &compose(&t.u_op(), &t.p_op()).unwrap()).unwrap(), grade);
            item("U ran P ⊆ ran P", ok(d), d)
        }
        None => skipped("U ran P ⊆ ran P"),
    });

    let (p1, p2, pk) = (kd.proj(&kd.k1), kd.proj(&kd.k2), kd.proj(&kd.k));
    let orth = dense::max_abs(&(&p1 * &p2));
    let sum_gap = projector_gap(&(&p1 + &p2), &pk);
    let fiso = fr.isometry_deviation[0].max(fr.isometry_deviation[1]);
    let fco = fr.coisometry_deviation[0].max(fr.coisometry_deviation[1]);
    let c2 = c * c;

    let mut ladder = Vec::new();
    match rep.class {
        DefectClass::Zero => {
            ladder.push(item("C = 0", c_zero, c_norm));
            let (e, g) = sp.equal(&kd.v1k2, &kd.k2);
            ladder.push(item("V1 ker V2* = ker V2*", e, g));
            let (e, g) = sp.equal(&kd.v2k1, &kd.k1);
            ladder.push(item("V2 ker V1* = ker V1*", e, g));
            ladder.push(item("F1, F2 unitary", ok(fiso.max(fco)), fiso.max(fco)));
            ladder.push(item("ker V* = ker V1* (+) ker V2*", ok(orth) && ok(sum_gap), orth.max(sum_gap)));
            let one = C64::new(1.0, 0.0);
            let v = model.product();
            let pv = compose(&v, &v.adjoint()).unwrap();
            let q1 = lincomb(one, &compose(v1, &v1.adjoint()).unwrap(), -one, &pv).unwrap();
            let q2 = lincomb(one, &compose(v2, &v2.adjoint()).unwrap(), -one, &pv).unwrap();
            let qq = dense::max_abs(&compress(&compose(&q1, &q2).unwrap(), w, w));
            ladder.push(item(
                "H = (ran V1 - ran V) (+) (ran V2 - ran V) (+) ran V",
                ok(qq) && c_zero,
                qq.max(c_norm),
            ));
        }
        DefectClass::Positive => {
            ladder.push(item("C >= 0, C != 0", psd && !c_zero, lo.min(0.0).abs()));
            let (e, g) = sp.strictly_inside(&kd.v2k1, &kd.k1);
            ladder.push(item("V2 ker V1* strictly inside ker V1*", e, g));
            let (e, g) = sp.strictly_inside(&kd.v1k2, &kd.k2);
            ladder.push(item("V1 ker V2* strictly inside ker V2*", e, g));
            ladder.push(item("F1, F2 isometries, not unitary", ok(fiso) && !ok(fco), fiso));
            ladder.push(item("doubly commuting, C != 0", ok(dc) && !c_zero, dc));
            let d = dense::max_abs(&(&c2 - c));
            ladder.push(item("C is a nonzero projection", ok(d) && !c_zero, d));
        }
        DefectClass::Negative => {
            ladder.push(item("C <= 0, C != 0", nsd && !c_zero, hi.max(0.0)));
            let (e, g) = sp.strictly_inside(&kd.k1, &kd.v2k1);
            ladder.push(item("ker V1* strictly inside V2 ker V1*", e, g));
            let (e, g) = sp.strictly_inside(&kd.k2, &kd.v1k2);
            ladder.push(item("ker V2* strictly inside V1 ker V2*", e, g));
            ladder.push(item("F1*, F2* isometries, not unitary", ok(fco) && !ok(fiso), fco));
            ladder.push(item(
                "ker V1* ⊥ ker V2*, sum smaller than ker V*",
                ok(orth) && !ok(sum_gap),
                orth,
            ));
            let d = dense::max_abs(&(&c2 + c));
            ladder.push(item("-C is a nonzero projection", ok(d) && !c_zero, d));
        }
        DefectClass::OffDiagonal => {
            let (e, g) = sp.equal(&kd.k1, &kd.k2);
            ladder.push(item("ker V1* = ker V2*", e, g));
            let (e, g) = sp.equal(&kd.v1k2, &kd.v2k1);
            ladder.push(item("V1 ker V2* = V2 ker V1*", e, g));
            let q = kd.proj(&kd.v2k1);
            let d = projector_gap(c, &(&p1 - &q))
                .max(dense::max_abs(&(&p1 * &q)))
                .max(projector_gap(&(&p1 + &q), &pk));
            ladder.push(item("C = P_{ker V1*} - P_{V2 ker V1*}, orthogonal summands", ok(d), d));
            let f = fr.max_entry[0].max(fr.max_entry[1]);
            ladder.push(item("F1 = F2 = 0", ok(f), f));
        }
        DefectClass::Mixed => {
            ladder.push(item("C indefinite", !psd && !nsd, lo.min(0.0).abs().min(hi.max(0.0))));
        }
    }
    if rep.class != DefectClass::Mixed {
        ladder.push(match &triple {
            Some(t) => triple_item(t, rep.class, grade),
            None => skipped("triple"),
        });
    }

    let s: Vec<bool> = slobcl.iter().filter_map(|i| i.holds).collect();
    let slobcl_agree = s.iter().all(|&x| x) || s.iter().all(|&x| !x);
    let consistent = slobcl_agree && ladder.iter().all(|i| i.holds != Some(false));
    LadderReport {
        model: model.name.clone(),
        grade,
        class: rep.class,
        slobcl,
        ladder,
        triple_source,
        consistent,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::*;

    #[test]
    fn ladders_hold_on_models() {
        let w = default_w();
        for m in [pos_pair(), neg_pair(), zero_pair(&w).unwrap(), offdiag_pair(&w).unwrap(), psi_pair(), eta_pair()] {
            let r = equivalence_suite(&m, 5);
            assert_eq!(r.class, m.declared_class);
            assert!(r.consistent, "{}: {r:#?}", m.name);
            assert!(r.ladder.iter().all(|i| i.holds.is_some()), "{}", m.name);
        }
    }
}
