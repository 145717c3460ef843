//! Verification suites shared by the CLI and the test targets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bcl::random::{gaussian, haar_unitary, random_mixed_triple, random_offdiag_triple, random_triple, random_zero_triple};
use crate::bcl::{BclTriple, DefectClass, LazyPreset};
use crate::defect::{defect_operator, defect_report, equivalence_suite, fringe_matrices, verify_projection_identities};
use crate::error::Result;
use crate::koszul::{hausdorff, joint_spectrum_finite, koszul_finite, stage2_certificate_neg, DEDUP_RADIUS, RANK_TOL};
use crate::linops::checks::CheckReport;
use crate::linops::dense::{self, CMat};
use crate::linops::{compose, compress_square, gram, C64};
use crate::models::{self, intertwiner_reports, invariant_embedding, tau_pair, ModelPair};
use crate::spaces::{window, Scheme};

pub const DEFAULT_SEED: u64 = 0xC0FFEE;
/// Agreement tolerance for the three defect computations.
pub const IDENTITY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub grade: u32,
    pub checks: Vec<CheckReport>,
    pub failures: usize,
    pub passed: bool,
}

impl SuiteReport {
    fn new(suite: &str, seed: u64, grade: u32, checks: Vec<CheckReport>) -> Self {
        let failures = checks.iter().filter(|c| !c.passed).count();
        SuiteReport { suite: suite.into(), seed, grade, checks, failures, passed: failures == 0 }
    }

    pub fn max_deviation(&self) -> f64 {
        self.checks.iter().map(|c| c.deviation).fold(0.0, f64::max)
    }
}

fn flag(name: impl Into<String>, ok: bool) -> CheckReport {
    CheckReport::new(name, if ok { 0.0 } else { 1.0 }, 0.0)
}

/// `pos`, `neg`, `zero`, `offdiag`, `psi`, `eta` with `W = diag(1, i)`, plus
/// the twisted zero pair.
pub fn shipped_models() -> Vec<ModelPair> {
    let w = models::default_w();
    vec![
        models::pos_pair(),
        models::neg_pair(),
        models::zero_pair(&w).unwrap(),
        models::offdiag_pair(&w).unwrap(),
        models::psi_pair(),
        models::eta_pair(),
        models::zero_pair_twisted(&w).unwrap(),
    ]
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn identity_checks(m: &ModelPair, grade: u32, out: &mut Vec<CheckReport>) {
    let r = verify_projection_identities(m, grade);
    let n = &m.name;
    out.push(CheckReport::new(format!("{n}: C vs P_ker V1* - P_V2 ker V1*"), r.via_ker_v1, IDENTITY_TOL));
    out.push(CheckReport::new(format!("{n}: C vs P_ker V2* - P_V1 ker V2*"), r.via_ker_v2, IDENTITY_TOL));
    match r.via_triple {
        Some(d) => out.push(CheckReport::new(format!("{n}: C vs E0 (x) (U*PU - P)"), d, IDENTITY_TOL)),
        None => out.push(flag(format!("{n}: triple formula available"), false)),
    }
    out.push(CheckReport::new(format!("{n}: summands orthogonal"), r.orthogonality, IDENTITY_TOL));
    out.push(CheckReport::new(format!("{n}: both sums equal ker V*"), r.direct_sums, IDENTITY_TOL));
    out.push(CheckReport::new(format!("{n}: kernels stabilized"), r.stabilization_gap, 1e-9));
    let d = defect_report(m, grade);
    out.push(flag(format!("{n}: support certified"), d.support_certified));
    out.push(flag(format!("{n}: class {} as declared", d.class), d.class == m.declared_class));
}

/// The three defect computations on every shipped model and on `count`
/// random finite triples of dimension at most 8.
pub fn identities(grade: u32, seed: u64, count: usize) -> SuiteReport {
    let mut checks = Vec::new();
    for m in shipped_models() {
        identity_checks(&m, grade, &mut checks);
    }
    let mut r = rng(seed);
    for k in 0..count {
        let d = r.random_range(1..=8);
        let t = random_triple(d, &mut r);
        identity_checks(&models::from_triple(&format!("random{k}:d{d}"), &t), grade, &mut checks);
    }
    SuiteReport::new("identities", seed, grade, checks)
}

fn ladder_checks(m: &ModelPair, expected: DefectClass, grade: u32, out: &mut Vec<CheckReport>) {
    let rep = equivalence_suite(m, grade);
    let n = &m.name;
    out.push(flag(format!("{n}: ladder consistent"), rep.consistent));
    out.push(flag(format!("{n}: class {} (expected {expected})", rep.class), rep.class == expected));
    let fr = fringe_matrices(&m.v1, &m.v2, grade);
    let triple_class = m.triple.as_ref().map(|t| t.classify(grade).class);
    out.push(flag(
        format!("{n}: fringe {} / defect {} / triple {:?} agree", fr.class, rep.class, triple_class),
        fr.class == rep.class && triple_class.is_none_or(|c| c == rep.class),
    ));
}

/// Class ladders on the shipped models and on `count` random triples for
/// each class a finite triple can reach; the lazy presets cover the signed
/// classes.
pub fn ladders(grade: u32, seed: u64, count: usize) -> SuiteReport {
    let mut checks = Vec::new();
    for m in shipped_models() {
        ladder_checks(&m, m.declared_class, grade, &mut checks);
    }
    let mut r = rng(seed);
    for k in 0..count {
        let d = r.random_range(1..=4);
        let t = random_zero_triple(d, &mut r);
        ladder_checks(&models::from_triple(&format!("zero{k}"), &t), DefectClass::Zero, grade, &mut checks);
        let h = r.random_range(1..=2);
        let t = random_offdiag_triple(h, &mut r);
        ladder_checks(&models::from_triple(&format!("offdiag{k}"), &t), DefectClass::OffDiagonal, grade, &mut checks);
        let d = r.random_range(2..=4);
        let t = random_mixed_triple(d, &mut r);
        ladder_checks(&models::from_triple(&format!("mixed{k}"), &t), DefectClass::Mixed, grade, &mut checks);
    }
    for (p, c) in [(LazyPreset::BilateralPZeroPlus, DefectClass::Positive), (LazyPreset::BilateralPMinus, DefectClass::Negative)] {
        let m = models::from_triple(p.name(), &BclTriple::preset(p));
        ladder_checks(&m, c, grade, &mut checks);
    }
    SuiteReport::new("ladders", seed, grade, checks)
}

/// Unitarity and intertwining of the four explicit unitaries.
pub fn intertwiners(grade: u32) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for rep in intertwiner_reports(&models::default_w(), grade)? {
        let n = &rep.name;
        checks.push(CheckReport::new(format!("Lambda_{n}: Gram = I on the domain window"), rep.isometry_deviation, 1e-13));
        checks.push(CheckReport::new(format!("Lambda_{n}*: Gram = I on the codomain window"), rep.coisometry_deviation, 1e-13));
        for k in 0..2 {
            checks.push(CheckReport::new(
                format!("Lambda_{n}: intertwines V{}", k + 1),
                rep.intertwining_deviation[k],
                1e-13,
            ));
        }
    }
    Ok(SuiteReport::new("intertwiners", 0, grade, checks))
}

fn random_poly(m: &CMat, r: &mut impl Rng) -> CMat {
    let d = m.nrows();
    let deg = r.random_range(0..=3);
    let coef = gaussian(deg + 1, 1, r);
    let mut acc = CMat::zeros(d, d);
    let mut pw = CMat::identity(d, d);
    for k in 0..=deg {
        acc += &pw * coef[(k, 0)];
        pw = &pw * m;
    }
    acc
}

/// `(p(M), q(M))` for a Gaussian `M` and random polynomials of degree <= 3.
pub fn random_commuting_pair(d: usize, r: &mut impl Rng) -> (CMat, CMat) {
    let m = gaussian(d, d, r);
    (random_poly(&m, r), random_poly(&m, r))
}

/// `V diag(x) V*` with Gaussian `x`.
pub fn random_normal(d: usize, r: &mut impl Rng) -> CMat {
    let v = haar_unitary(d, r);
    let x: Vec<C64> = (0..d).map(|_| gaussian(1, 1, r)[(0, 0)]).collect();
    &v * dense::diag(&x) * v.adjoint()
}

fn near(p: &[C64; 2], set: &[[C64; 2]], radius: f64) -> bool {
    set.iter().any(|q| ((p[0] - q[0]).norm_sqr() + (p[1] - q[1]).norm_sqr()).sqrt() <= radius)
}

/// Joint-spectrum points, all pairs of their coordinates and a few random
/// points.
fn probe_points(js: &[[C64; 2]], r: &mut impl Rng) -> Vec<[C64; 2]> {
    let mut out = Vec::new();
    for p in js {
        for q in js {
            out.push([p[0], q[1]]);
        }
    }
    for _ in 0..3 {
        let g = gaussian(2, 1, r);
        out.push([g[(0, 0)] * 2.0, g[(1, 0)] * 2.0]);
    }
    out
}

fn singular(a: &CMat, b: &CMat, p: &[C64; 2]) -> Result<bool> {
    Ok(koszul_finite(a, b, p[0], p[1], RANK_TOL)?.is_singular())
}

/// Rank verdicts against the deflation oracle on `count` random commuting
/// pairs, then block, conjugation and tensor properties on 50 pairs each.
pub fn koszul_oracle(seed: u64, count: usize) -> Result<SuiteReport> {
    let mut r = rng(seed);
    let mut checks = Vec::new();
    let (mut agree, mut total) = (0usize, 0usize);
    for k in 0..count {
        let d = r.random_range(1..=6);
        let (a, b) = random_commuting_pair(d, &mut r);
        let js = joint_spectrum_finite(&a, &b, RANK_TOL)?;
        let mut ok = true;
        for p in probe_points(&js, &mut r) {
            let member = near(&p, &js, 1e-6);
            ok &= member == singular(&a, &b, &p)?;
        }
        total += 1;
        agree += ok as usize;
        if !ok {
            checks.push(flag(format!("pair {k} (d = {d}): rank verdicts match the oracle"), false));
        }
    }
    checks.push(CheckReport::new(
        format!("rank verdicts match the oracle on {agree}/{total} pairs"),
        (total - agree) as f64,
        0.0,
    ));

    let (mut block_bad, mut conj_bad, mut tensor_bad) = (0usize, 0usize, 0usize);
    for _ in 0..50 {
        let (a1, b1) = random_commuting_pair(r.random_range(1..=3), &mut r);
        let (a2, b2) = random_commuting_pair(r.random_range(1..=3), &mut r);
        let (a, b) = (dense::block_diag(&a1, &a2), dense::block_diag(&b1, &b2));
        let (j1, j2) = (joint_spectrum_finite(&a1, &b1, RANK_TOL)?, joint_spectrum_finite(&a2, &b2, RANK_TOL)?);
        let js = joint_spectrum_finite(&a, &b, RANK_TOL)?;
        let union: Vec<[C64; 2]> = j1.iter().chain(&j2).copied().collect();
        let mut ok = hausdorff(&js, &union) <= DEDUP_RADIUS;
        for p in probe_points(&js, &mut r) {
            ok &= singular(&a, &b, &p)? == (singular(&a1, &b1, &p)? || singular(&a2, &b2, &p)?);
        }
        block_bad += !ok as usize;
    }
    checks.push(CheckReport::new("block sums: spectrum is the union of the blocks' (50 pairs)", block_bad as f64, 0.0));
    for _ in 0..50 {
        let (a, b) = random_commuting_pair(r.random_range(1..=6), &mut r);
        let js = joint_spectrum_finite(&a, &b, RANK_TOL)?;
        let mut ok = true;
        for p in probe_points(&js, &mut r) {
            ok &= singular(&a, &b, &p)? == singular(&a.adjoint(), &b.adjoint(), &[p[0].conj(), p[1].conj()])?;
        }
        conj_bad += !ok as usize;
    }
    checks.push(CheckReport::new("adjoints: spectrum conjugates (50 pairs)", conj_bad as f64, 0.0));
    for _ in 0..50 {
        let (dt, ds) = (r.random_range(1..=4), r.random_range(1..=4));
        let (t, s) = (random_normal(dt, &mut r), random_normal(ds, &mut r));
        let a = dense::kron(&t, &CMat::identity(ds, ds));
        let b = dense::kron(&CMat::identity(dt, dt), &s);
        let product: Vec<[C64; 2]> = dense::eigenvalues(&t)
            .iter()
            .flat_map(|&x| dense::eigenvalues(&s).into_iter().map(move |y| [x, y]))
            .collect();
        let js = joint_spectrum_finite(&a, &b, RANK_TOL)?;
        let mut ok = hausdorff(&js, &product) <= DEDUP_RADIUS;
        // cross points of a product set stay inside it; pair each first
        // coordinate with a random second one to probe the outside
        let mut probes = product.clone();
        for x in dense::eigenvalues(&t) {
            probes.push([x, gaussian(1, 1, &mut r)[(0, 0)] * 2.0]);
        }
        for p in probes {
            ok &= singular(&a, &b, &p)? == near(&p, &product, 1e-6);
        }
        tensor_bad += !ok as usize;
    }
    checks.push(CheckReport::new("tensor pairs: spectrum is the product (50 pairs)", tensor_bad as f64, 0.0));
    Ok(SuiteReport::new("koszul-oracle", seed, 0, checks))
}

/// Stage-2 pairings for the negative fundamental pair.
pub fn stage2_neg(l1: C64, l2: C64, grade: u32, generators: u32, threshold: f64) -> Result<SuiteReport> {
    let rep = stage2_certificate_neg(l1, l2, grade, generators)?;
    let mut checks = vec![
        CheckReport::new("tail bounds within 1e-12", rep.tail_h2.max(rep.tail_g), crate::koszul::STAGE2_TAIL_THRESHOLD),
        CheckReport::new("h2 coefficients match the closed form", rep.pattern_deviation, 0.0),
    ];
    for (m, (p, b)) in rep.pairings.iter().zip(&rep.pairing_bounds).enumerate() {
        checks.push(CheckReport::new(format!("|<(tau1 - l1) h2, g_{m}>| + bound"), p.norm() + b, threshold));
    }
    Ok(SuiteReport::new("stage2-neg", 0, grade, checks))
}

/// The invariant subspace spanned by `tau1^m tau2^n (1)` and the positive
/// pair it carries.
pub fn embedding(grade: u32) -> SuiteReport {
    let s = Scheme::hardy_bidisc();
    let w = window(&s, grade);
    let j = invariant_embedding();
    let cols: Vec<_> = w.iter().map(|i| j.apply_basis(i)).collect();
    let g = gram(&cols);
    let gram_dev = dense::max_abs(&(g - CMat::identity(w.len(), w.len())));
    let (t1, t2) = tau_pair();
    let mut checks = vec![CheckReport::new("Gram of tau1^m tau2^n (1) = I", gram_dev, 0.0)];
    let mut compressed = Vec::new();
    for (k, (t, mz)) in [(t1, models::mz1()), (t2, models::mz2())].into_iter().enumerate() {
        let c = compose(&j.adjoint(), &compose(&t, &j).unwrap()).unwrap();
        let dev = dense::max_abs(&(compress_square(&c, &w) - compress_square(&mz, &w)));
        checks.push(CheckReport::new(format!("J* tau{} J = M_z{}", k + 1, k + 1), dev, 0.0));
        compressed.push(c);
    }
    // defect of the restricted pair; tau itself has a negative defect
    let c = defect_operator(&compressed[0], &compressed[1]);
    let mut e00 = CMat::zeros(w.len(), w.len());
    e00[(0, 0)] = C64::new(1.0, 0.0);
    let dev = dense::max_abs(&(compress_square(&c, &w) - e00));
    checks.push(CheckReport::new("defect of (J* tau1 J, J* tau2 J) = E_(0,0)", dev, 0.0));
    SuiteReport::new("embedding", 0, grade, checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn show(r: &SuiteReport) {
        for c in r.checks.iter().filter(|c| !c.passed) {
            eprintln!("{}: {} > {}", c.name, c.deviation, c.tol);
        }
    }

    #[test]
    fn suites_pass_small() {
        for r in [
            identities(4, DEFAULT_SEED, 4),
            ladders(3, DEFAULT_SEED, 2),
            intertwiners(5).unwrap(),
            koszul_oracle(DEFAULT_SEED, 20).unwrap(),
            stage2_neg(C64::new(0.3, 0.0), C64::new(0.0, 0.5), 40, 10, 1e-10).unwrap(),
            embedding(4),
        ] {
            show(&r);
            assert!(r.passed, "{}", r.suite);
        }
    }
}
