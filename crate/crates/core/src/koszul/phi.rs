//! Joint spectra of `(phi1(z), phi2(z))` for finite triples against the
//! class formulas.

use serde::Serialize;

use super::{dedup_points, dist2, joint_spectrum_finite, koszul_finite, KoszulReport, DEDUP_RADIUS};
use crate::bcl::{range_bases, BclTriple, DefectClass};
use crate::error::{Error, Result};
use crate::linops::dense;
use crate::linops::C64;

/// Spectral data the class formulas need.
#[derive(Clone, Debug, Serialize)]
pub enum ClassData {
    /// `sigma(U1)` on `ran P` and `sigma(U2)` on `ran P^perp`.
    Zero { s1: Vec<C64>, s2: Vec<C64> },
    /// `sigma(U1 U2)` for the two off-diagonal blocks.
    OffDiagonal { s: Vec<C64> },
    None,
}

pub fn class_data(t: &BclTriple) -> Result<(DefectClass, ClassData)> {
    let BclTriple::Finite { u, p } = t else {
        return Err(Error::Unsupported("class formulas need a finite triple".into()));
    };
    let class = t.classify(0).class;
    let (qp, qn) = range_bases(p);
    let data = match class {
        DefectClass::Zero => ClassData::Zero {
            s1: dense::eigenvalues(&(qp.adjoint() * u * &qp)),
            s2: dense::eigenvalues(&(qn.adjoint() * u * &qn)),
        },
        DefectClass::OffDiagonal => {
            let ua = qp.adjoint() * u * &qn;
            let ub = qn.adjoint() * u * &qp;
            ClassData::OffDiagonal { s: dense::eigenvalues(&(ua * ub)) }
        }
        _ => ClassData::None,
    };
    Ok((class, data))
}

/// The set the class formula predicts for `sigma(phi1(z), phi2(z))`.
pub fn predicted_phi_set(data: &ClassData, z: C64) -> Option<Vec<[C64; 2]>> {
    let pts = match data {
        ClassData::Zero { s1, s2 } => s1
            .iter()
            .map(|&l| [z * l.conj(), l])
            .chain(s2.iter().map(|&m| [m.conj(), z * m]))
            .collect(),
        ClassData::OffDiagonal { s } => {
            let rz = z.sqrt();
            s.iter()
                .flat_map(|&a| {
                    let h = a.sqrt();
                    let p = [rz * h.conj(), rz * h];
                    [p, [-p[0], -p[1]]]
                })
                .collect()
        }
        ClassData::None => return None,
    };
    Some(dedup_points(pts, DEDUP_RADIUS))
}

/// Two-sided Hausdorff distance between finite point sets.
pub fn hausdorff(a: &[[C64; 2]], b: &[[C64; 2]]) -> f64 {
    let one = |x: &[[C64; 2]], y: &[[C64; 2]]| {
        x.iter()
            .map(|p| y.iter().map(|q| dist2(p, q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    one(a, b).max(one(b, a))
}

#[derive(Clone, Debug, Serialize)]
pub struct PhiPoint {
    pub point: [C64; 2],
    pub report: KoszulReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct PhiSpectrum {
    pub z: C64,
    pub class: DefectClass,
    pub points: Vec<PhiPoint>,
    pub predicted: Option<Vec<[C64; 2]>>,
    pub hausdorff: Option<f64>,
    /// `max |l1 l2 - z|` over the computed points.
    pub mapping_residual: f64,
}

pub fn phi_spectrum_with(t: &BclTriple, class: DefectClass, data: &ClassData, z: C64, tol: f64) -> Result<PhiSpectrum> {
    if !(z.norm() < 1.0) {
        return Err(Error::OutOfDisc(format!("z = {z}")));
    }
    let (a, b) = t.phi_matrices(z)?;
    let js = joint_spectrum_finite(&a, &b, tol)?;
    let mut points = Vec::with_capacity(js.len());
    for p in &js {
        points.push(PhiPoint { point: *p, report: koszul_finite(&a, &b, p[0], p[1], tol)? });
    }
    let predicted = predicted_phi_set(data, z);
    Ok(PhiSpectrum {
        z,
        class,
        hausdorff: predicted.as_ref().map(|q| hausdorff(&js, q)),
        mapping_residual: js.iter().map(|p| (p[0] * p[1] - z).norm()).fold(0.0, f64::max),
        points,
        predicted,
    })
}

pub fn phi_spectrum(t: &BclTriple, z: C64, tol: f64) -> Result<PhiSpectrum> {
    let (class, data) = class_data(t)?;
    phi_spectrum_with(t, class, &data, z, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bcl::{block_triple, offdiag_triple};
    use crate::linops::dense::{c, diag, r, CMat};

    #[test]
    fn swap_triple_quarter() {
        let t = offdiag_triple(&CMat::identity(1, 1)).unwrap();
        let s = phi_spectrum(&t, r(0.25), 1e-9).unwrap();
        assert_eq!(s.class, DefectClass::OffDiagonal);
        let want = [[r(0.5), r(0.5)], [r(-0.5), r(-0.5)]];
        assert!(hausdorff(&s.points.iter().map(|p| p.point).collect::<Vec<_>>(), &want) < 1e-12);
        assert!(s.points.iter().all(|p| p.report.is_singular()));
    }

    #[test]
    fn offdiag_orientation() {
        let w = diag(&[r(1.0), c(0.0, 1.0)]);
        let t = offdiag_triple(&w).unwrap();
        let s = phi_spectrum(&t, c(0.2, -0.4), 1e-9).unwrap();
        assert!(s.hausdorff.unwrap() < 1e-10, "{s:?}");
    }

    #[test]
    fn zero_block_formula() {
        let u1 = diag(&[c(0.6, 0.8), r(-1.0)]);
        let u2 = diag(&[c(0.0, 1.0), c(0.8, -0.6)]);
        let t = block_triple(&u1, &u2).unwrap();
        let s = phi_spectrum(&t, r(0.3), 1e-9).unwrap();
        assert_eq!(s.class, DefectClass::Zero);
        assert!(s.hausdorff.unwrap() < 1e-10);
        assert!(s.mapping_residual < 1e-12);
        let s0 = phi_spectrum(&t, r(0.0), 1e-9).unwrap();
        assert!(s0.mapping_residual < 1e-12);
    }
}
