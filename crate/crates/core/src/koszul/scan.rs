//! Grid scans of joint spectra with a Hausdorff summary against the class
//! predictions.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::cert::{
    eta_certificate, kernel_certificate, psi_certificate, stage2_certificate_neg, Certificate,
    SpectrumSample, STAGE2_TAIL_THRESHOLD,
};
use super::phi::{class_data, phi_spectrum_with, ClassData};
use super::{dist2, DEDUP_RADIUS, RANK_TOL};
use crate::bcl::{BclTriple, DefectClass};
use crate::error::{Error, Result};
use crate::linops::C64;
use crate::models::ModelPair;
use crate::spaces::{truncated, AnalyticKind};

use crate::io::FORMAT_VERSION;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LazySubject {
    Psi,
    Eta,
    Pos,
    Neg,
}

#[derive(Clone, Debug)]
pub enum Subject {
    Finite { name: String, provenance: String, triple: BclTriple },
    Lazy { name: String, provenance: String, kind: LazySubject },
}

impl Subject {
    pub fn from_model(m: &ModelPair) -> Result<Subject> {
        let lazy = match m.name.as_str() {
            "psi" => Some(LazySubject::Psi),
            "eta" => Some(LazySubject::Eta),
            "pos" => Some(LazySubject::Pos),
            "neg" => Some(LazySubject::Neg),
            _ => None,
        };
        if let Some(kind) = lazy {
            return Ok(Subject::Lazy { name: m.name.clone(), provenance: m.provenance.clone(), kind });
        }
        match &m.triple {
            Some(t @ BclTriple::Finite { .. }) => Ok(Subject::Finite {
                name: m.name.clone(),
                provenance: m.provenance.clone(),
                triple: t.clone(),
            }),
            _ => Err(Error::Unsupported(format!("no scan route for model {}", m.name))),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Subject::Finite { name, .. } | Subject::Lazy { name, .. } => name,
        }
    }

    pub fn provenance(&self) -> &str {
        match self {
            Subject::Finite { provenance, .. } | Subject::Lazy { provenance, .. } => provenance,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Grid {
    /// Polar grid `r_k = k / (n_r + 1)`, `k = 1..=n_r`, angles `2 pi j / n_theta`.
    Z { n_r: usize, n_theta: usize },
    /// All pairs of an `n`-point golden-angle spiral in `0.9 D`.
    Lambda { n: usize },
}

impl Grid {
    pub fn z_points(n_r: usize, n_theta: usize) -> Vec<C64> {
        let mut out = Vec::with_capacity(n_r * n_theta);
        for k in 1..=n_r {
            let r = k as f64 / (n_r + 1) as f64;
            for j in 0..n_theta {
                out.push(C64::from_polar(r, 2.0 * PI * j as f64 / n_theta as f64));
            }
        }
        out
    }
}

/// `n` points `0.9 sqrt((k + 1/2)/n) e^{i k g}` with the golden angle `g`.
pub fn lambda_spiral(n: usize) -> Vec<C64> {
    let g = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| C64::from_polar(0.9 * ((k as f64 + 0.5) / n as f64).sqrt(), g * k as f64))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanConfig {
    pub grid: Grid,
    pub tol_rank: f64,
    pub tol_residual: f64,
    pub dedup: f64,
    /// Tail bound requested for eigenvector truncations.
    pub eps: f64,
    /// Largest `h2` truncation tried by range-pairing certificates.
    pub stage2_max_truncation: u32,
    pub stage2_generators: u32,
}

impl ScanConfig {
    pub fn new(grid: Grid) -> Self {
        ScanConfig {
            grid,
            tol_rank: RANK_TOL,
            tol_residual: 1e-10,
            dedup: DEDUP_RADIUS,
            eps: 1e-12,
            stage2_max_truncation: 80,
            stage2_generators: 20,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GridInfo {
    pub grid: Grid,
    pub points: usize,
    pub resolution: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanSummary {
    pub format: String,
    pub subject: String,
    pub provenance: String,
    pub class: DefectClass,
    pub predicted_set_descriptor: String,
    /// `[sampled -> predicted, predicted -> sampled]`.
    pub hausdorff_one_sided: [f64; 2],
    pub grid: GridInfo,
    pub tolerances: BTreeMap<String, f64>,
    pub samples: usize,
    pub certified_in_spectrum: usize,
    pub not_certified: usize,
    /// Largest per-`z` Hausdorff distance to the class formula (finite subjects).
    pub per_z_hausdorff_max: Option<f64>,
    pub mapping_residual_max: f64,
    /// Count of in-spectrum samples per break-stage set.
    pub break_stage_sets: BTreeMap<String, usize>,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanOutput {
    pub samples: Vec<SpectrumSample>,
    pub summary: ScanSummary,
}

/// Reference discretization of the closed disc.
fn disc_reference(n_r: usize, n_theta: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0)];
    for k in 1..=n_r {
        let r = k as f64 / n_r as f64;
        for j in 0..n_theta {
            out.push(C64::from_polar(r, 2.0 * PI * j as f64 / n_theta as f64));
        }
    }
    out
}

fn clip_to_disc(w: C64) -> C64 {
    if w.norm() > 1.0 {
        w / w.norm()
    } else {
        w
    }
}

fn disc_gap(w: C64) -> f64 {
    (w.norm() - 1.0).max(0.0)
}

/// Distance from `p` to the predicted union for the class data.
fn dist_to_predicted(p: &[C64; 2], data: &ClassData) -> f64 {
    match data {
        ClassData::Zero { s1, s2 } => {
            let a = s1.iter().map(|&u| disc_gap(p[0]).hypot((p[1] - u).norm()));
            let b = s2.iter().map(|&v| (p[0] - v.conj()).norm().hypot(disc_gap(p[1])));
            a.chain(b).fold(f64::INFINITY, f64::min)
        }
        ClassData::OffDiagonal { s } => s
            .iter()
            .map(|&a| {
                // nearest point of the line {w(1, a)} is w = (p1 + conj(a) p2) / 2
                let w = clip_to_disc((p[0] + a.conj() * p[1]) * 0.5);
                dist2(p, &[w, w * a])
            })
            .fold(f64::INFINITY, f64::min),
        ClassData::None => f64::NAN,
    }
}

fn predicted_reference(data: &ClassData) -> Vec<[C64; 2]> {
    let disc = disc_reference(40, 96);
    match data {
        ClassData::Zero { s1, s2 } => {
            let mut out = Vec::new();
            for &u in s1 {
                out.extend(disc.iter().map(|&w| [w, u]));
            }
            for &v in s2 {
                out.extend(disc.iter().map(|&w| [v.conj(), w]));
            }
            out
        }
        ClassData::OffDiagonal { s } => s
            .iter()
            .flat_map(|&a| disc.iter().map(move |&w| [w, w * a]))
            .collect(),
        ClassData::None => Vec::new(),
    }
}

fn describe(data: &ClassData) -> String {
    let list = |v: &[C64]| {
        v.iter().map(|c| format!("{:.6}{:+.6}i", c.re, c.im)).collect::<Vec<_>>().join(", ")
    };
    match data {
        ClassData::Zero { s1, s2 } => format!(
            "closed disc x sigma(U1) union sigma(U2)* x closed disc; sigma(U1) = [{}], sigma(U2) = [{}]",
            list(s1),
            list(s2)
        ),
        ClassData::OffDiagonal { s } => {
            format!("{{w (1, a) : |w| <= 1, a in sigma(U1 U2)}}; sigma(U1 U2) = [{}]", list(s))
        }
        ClassData::None => "none; only l1 l2 = z is checked".into(),
    }
}

fn stage_key(s: &[u8]) -> String {
    s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn tolerances(cfg: &ScanConfig) -> BTreeMap<String, f64> {
    BTreeMap::from([
        ("rank".to_string(), cfg.tol_rank),
        ("residual".to_string(), cfg.tol_residual),
        ("dedup".to_string(), cfg.dedup),
        ("eps".to_string(), cfg.eps),
    ])
}

fn count_stages(samples: &[SpectrumSample]) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for s in samples.iter().filter(|s| s.in_spectrum) {
        *m.entry(stage_key(&s.break_stages)).or_insert(0) += 1;
    }
    m
}

fn scan_finite(name: &str, provenance: &str, t: &BclTriple, cfg: &ScanConfig) -> Result<ScanOutput> {
    let Grid::Z { n_r, n_theta } = cfg.grid else {
        return Err(Error::Unsupported("finite triples are scanned over a z-grid".into()));
    };
    let (class, data) = class_data(t)?;
    let zs = Grid::z_points(n_r, n_theta);
    let spectra = zs
        .par_iter()
        .map(|&z| phi_spectrum_with(t, class, &data, z, cfg.tol_rank))
        .collect::<Result<Vec<_>>>()?;
    let mut samples = Vec::new();
    let mut per_z: f64 = 0.0;
    let mut mapping: f64 = 0.0;
    for s in &spectra {
        per_z = per_z.max(s.hausdorff.unwrap_or(0.0));
        mapping = mapping.max(s.mapping_residual);
        for p in &s.points {
            samples.push(SpectrumSample {
                z: Some(s.z),
                point: p.point,
                in_spectrum: p.report.is_singular(),
                break_stages: p.report.break_stages.clone(),
                certificate: Certificate::Rank,
                residual: (p.point[0] * p.point[1] - s.z).norm(),
                bound: cfg.dedup,
            });
        }
    }
    let pts: Vec<[C64; 2]> = samples.iter().filter(|s| s.in_spectrum).map(|s| s.point).collect();
    let resolution = {
        let dr = 1.0 / (n_r + 1) as f64;
        let rmax = n_r as f64 / (n_r + 1) as f64;
        dr.max(rmax * 2.0 * PI / n_theta as f64)
    };
    let (h, per_z_max) = match data {
        ClassData::None => ([mapping, f64::NAN], None),
        _ => {
            let fwd = pts.iter().map(|p| dist_to_predicted(p, &data)).fold(0.0, f64::max);
            let back = predicted_reference(&data)
                .par_iter()
                .map(|q| pts.iter().map(|p| dist2(p, q)).fold(f64::INFINITY, f64::min))
                .reduce(|| 0.0, f64::max);
            ([fwd, back], Some(per_z))
        }
    };
    let threshold = cfg.dedup + resolution;
    let passed = match per_z_max {
        Some(pz) => pz <= cfg.dedup && h[0] <= threshold && h[1] <= threshold,
        None => mapping <= cfg.dedup,
    } && mapping <= cfg.dedup;
    let summary = ScanSummary {
        format: FORMAT_VERSION.into(),
        subject: name.into(),
        provenance: provenance.into(),
        class,
        predicted_set_descriptor: describe(&data),
        hausdorff_one_sided: h,
        grid: GridInfo { grid: cfg.grid, points: zs.len(), resolution },
        tolerances: tolerances(cfg),
        samples: samples.len(),
        certified_in_spectrum: pts.len(),
        not_certified: samples.len() - pts.len(),
        per_z_hausdorff_max: per_z_max,
        mapping_residual_max: mapping,
        break_stage_sets: count_stages(&samples),
        threshold,
        passed,
    };
    Ok(ScanOutput { samples, summary })
}

fn neg_sample(l1: C64, l2: C64, cfg: &ScanConfig) -> Result<SpectrumSample> {
    let mut n = 10;
    let sufficient = |n: u32| -> Result<bool> {
        let h = truncated(AnalyticKind::H2, &[l1, l2], n)?;
        let g = truncated(AnalyticKind::OrthoGenG { m: 0 }, &[l2], n)?;
        Ok(h.tail_bound().max(g.tail_bound()) <= STAGE2_TAIL_THRESHOLD)
    };
    while n < cfg.stage2_max_truncation && !sufficient(n)? {
        n += 10;
    }
    let n = n.min(cfg.stage2_max_truncation);
    let rep = stage2_certificate_neg(l1, l2, n, cfg.stage2_generators)?;
    let ok = rep.passes(cfg.tol_residual);
    Ok(SpectrumSample {
        z: None,
        point: [l1, l2],
        in_spectrum: ok,
        break_stages: if ok { vec![2] } else { Vec::new() },
        certificate: Certificate::RangePairing,
        residual: rep.max_certified,
        bound: cfg.tol_residual,
    })
}

fn scan_lazy(name: &str, provenance: &str, kind: LazySubject, cfg: &ScanConfig) -> Result<ScanOutput> {
    let Grid::Lambda { n } = cfg.grid else {
        return Err(Error::Unsupported("lazy models are scanned over a lambda-grid".into()));
    };
    let spiral = lambda_spiral(n);
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let samples = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (l1, l2) = (spiral[i], spiral[j]);
            match kind {
                LazySubject::Psi => psi_certificate(l1, l2, cfg.eps, cfg.tol_residual),
                LazySubject::Eta => eta_certificate(l1, l2, cfg.eps, cfg.tol_residual),
                LazySubject::Pos => kernel_certificate(l1, l2, cfg.eps, cfg.tol_residual),
                LazySubject::Neg => neg_sample(l1, l2, cfg),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let reference = disc_reference(12, 36);
    // d[a][i] = |reference_a - spiral_i|
    let d: Vec<Vec<f64>> = reference.iter().map(|&a| spiral.iter().map(|&s| (a - s).norm()).collect()).collect();
    let covering = d.iter().map(|row| row.iter().copied().fold(f64::INFINITY, f64::min)).fold(0.0, f64::max);
    let resolution = covering * 2f64.sqrt();
    let certified: Vec<(usize, usize)> = pairs
        .iter()
        .zip(&samples)
        .filter(|(_, s)| s.in_spectrum)
        .map(|(p, _)| *p)
        .collect();
    let fwd = samples
        .iter()
        .filter(|s| s.in_spectrum)
        .map(|s| disc_gap(s.point[0]).hypot(disc_gap(s.point[1])))
        .fold(0.0, f64::max);
    let back = (0..reference.len())
        .into_par_iter()
        .map(|a| {
            let mut worst: f64 = 0.0;
            for row_b in &d {
                let best = certified
                    .iter()
                    .map(|&(i, j)| d[a][i].hypot(row_b[j]))
                    .fold(f64::INFINITY, f64::min);
                worst = worst.max(best);
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    let in_count = certified.len();
    let threshold = cfg.dedup + resolution;
    let mapping = samples
        .iter()
        .filter_map(|s| s.z.map(|z| (s.point[0] * s.point[1] - z).norm()))
        .fold(0.0, f64::max);
    let class = match kind {
        LazySubject::Psi | LazySubject::Neg => DefectClass::Negative,
        LazySubject::Eta | LazySubject::Pos => DefectClass::Positive,
    };
    let summary = ScanSummary {
        format: FORMAT_VERSION.into(),
        subject: name.into(),
        provenance: provenance.into(),
        class,
        predicted_set_descriptor: "closed bidisc".into(),
        hausdorff_one_sided: [fwd, back],
        grid: GridInfo { grid: cfg.grid, points: pairs.len(), resolution },
        tolerances: tolerances(cfg),
        samples: samples.len(),
        certified_in_spectrum: in_count,
        not_certified: samples.len() - in_count,
        per_z_hausdorff_max: None,
        mapping_residual_max: mapping,
        break_stage_sets: count_stages(&samples),
        threshold,
        passed: fwd <= threshold && back <= threshold,
    };
    Ok(ScanOutput { samples, summary })
}

pub fn scan(subject: &Subject, cfg: &ScanConfig) -> Result<ScanOutput> {
    match subject {
        Subject::Finite { name, provenance, triple } => scan_finite(name, provenance, triple, cfg),
        Subject::Lazy { name, provenance, kind } => scan_lazy(name, provenance, *kind, cfg),
    }
}

/// Scan samples as CSV; absent `z` is written as empty fields.
pub fn write_csv<W: Write>(samples: &[SpectrumSample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "z_re", "z_im", "l1_re", "l1_im", "l2_re", "l2_im", "in_spectrum", "break_stages", "certificate", "residual",
    ])?;
    for s in samples {
        let (zr, zi) = s.z.map_or((String::new(), String::new()), |z| (z.re.to_string(), z.im.to_string()));
        w.write_record([
            zr,
            zi,
            s.point[0].re.to_string(),
            s.point[0].im.to_string(),
            s.point[1].re.to_string(),
            s.point[1].im.to_string(),
            s.in_spectrum.to_string(),
            stage_key(&s.break_stages),
            s.certificate.name().to_string(),
            s.residual.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::*;

    #[test]
    fn offdiag_scan_matches_prediction() {
        let m = offdiag_pair(&default_w()).unwrap();
        let out = scan(&Subject::from_model(&m).unwrap(), &ScanConfig::new(Grid::Z { n_r: 6, n_theta: 6 })).unwrap();
        let s = &out.summary;
        assert!(s.per_z_hausdorff_max.unwrap() <= 1e-8, "{s:?}");
        assert!(s.passed, "{s:?}");
        assert_eq!(s.certified_in_spectrum, 6 * 6 * 4);
    }

    #[test]
    fn psi_scan_certifies_everything() {
        let out = scan(&Subject::from_model(&psi_pair()).unwrap(), &ScanConfig::new(Grid::Lambda { n: 6 })).unwrap();
        assert_eq!(out.summary.not_certified, 0, "{:?}", out.summary);
        assert!(out.samples.iter().all(|s| s.residual <= 1e-10));
    }
}
