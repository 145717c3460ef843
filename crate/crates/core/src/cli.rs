//! Command-line surface. `run` returns the exit code so tests can drive it
//! without a subprocess.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::bcl::{sarkar_triple, TripleClass};
use crate::defect::{defect_report, fringe_matrices, verify_projection_identities, wold};
use crate::error::{Error, Result};
use crate::io::{read_triple, read_unitary, triple_json, MatrixFile, Report, FORMAT_VERSION};
use crate::koszul::{scan, write_csv, Grid, ScanConfig, Subject, DEDUP_RADIUS, RANK_TOL};
use crate::linops::{compose, C64};
use crate::models::{self, intertwiner_reports, parse_model, ModelPair};
use crate::verify::{self, SuiteReport, DEFAULT_SEED, IDENTITY_TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "isopair", version, about = "Defects and joint spectra of pairs of commuting isometries")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: Global,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Window grade N.
    #[arg(long, global = true)]
    pub grade: Option<u32>,
    #[arg(long, global = true, default_value_t = RANK_TOL)]
    pub tol_rank: f64,
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol_residual: f64,
    #[arg(long, global = true, default_value_t = DEDUP_RADIUS)]
    pub tol_dedup: f64,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED, value_parser = parse_seed)]
    pub seed: u64,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON output (default).
    #[arg(long, global = true, conflicts_with = "csv")]
    pub json: bool,
    /// CSV output: scan samples or verify checks.
    #[arg(long, global = true)]
    pub csv: bool,
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct SubjectArgs {
    /// Model name, e.g. `neg`, `offdiag:W.json`, `sum:pos:zero:diag1i`.
    #[arg(long)]
    pub model: Option<String>,
    /// Triple file `{dim, U, P}` or `{preset}`.
    #[arg(long)]
    pub triple: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum WoldTarget {
    V1,
    V2,
    V,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Identities,
    Ladders,
    Intertwiners,
    KoszulOracle,
    Stage2Neg,
    Embedding,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Defect class with eigenvalues and support certification.
    Classify(SubjectArgs),
    /// Defect window matrix and the projection identities.
    Defect(SubjectArgs),
    /// Wold decomposition of V1, V2 or V1V2.
    Wold {
        #[command(flatten)]
        subject: SubjectArgs,
        #[arg(long, value_enum, default_value = "v")]
        of: WoldTarget,
    },
    /// Fringe operators and the class they determine.
    Fringe(SubjectArgs),
    /// BCL triple recovered from the pair.
    Sarkar(SubjectArgs),
    /// Unitarity and intertwining of the explicit unitaries.
    IntertwineCheck {
        /// Unitary W for the zero and off-diagonal models (file or built-in).
        #[arg(long, default_value = "diag1i")]
        w: String,
    },
    /// Joint spectrum scan over a z-grid or a lambda-grid.
    Scan {
        #[command(flatten)]
        subject: SubjectArgs,
        /// `RxT`: radii by angles.
        #[arg(long, conflicts_with = "lgrid")]
        zgrid: Option<String>,
        /// `N` or `NxN`: all pairs of an N-point spiral.
        #[arg(long)]
        lgrid: Option<String>,
        /// Also write the summary JSON here.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Run a verification suite.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        /// Random instances per family.
        #[arg(long)]
        count: Option<usize>,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        l1: Option<C64>,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        l2: Option<C64>,
        /// Generators `g_0..=g_M` for stage2-neg.
        #[arg(long, default_value_t = 20)]
        generators: u32,
        #[arg(long, default_value_t = 1e-10)]
        threshold: f64,
    },
}

fn parse_seed(s: &str) -> std::result::Result<u64, String> {
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(h) => u64::from_str_radix(h, 16).map_err(|e| e.to_string()),
        None => s.parse().map_err(|e: std::num::ParseIntError| e.to_string()),
    }
}

/// `0.3`, `0.5i`, `-i`, `0.3-0.5i`.
pub fn parse_complex(s: &str) -> std::result::Result<C64, String> {
    C64::from_str(s.trim()).map_err(|_| format!("not a complex number: `{s}`"))
}

fn parse_dims(s: &str) -> Option<(usize, usize)> {
    let (a, b) = s.split_once(['x', 'X'])?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

fn load_matrix(path: &str) -> Result<crate::linops::dense::CMat> {
    read_unitary(path)
}

/// Resolves `--model` or `--triple` to a pair.
pub fn resolve_subject(s: &SubjectArgs) -> Result<ModelPair> {
    if let Some(m) = &s.model {
        return parse_model(m, &load_matrix);
    }
    let path = s.triple.as_ref().expect("clap enforces one subject");
    let t = read_triple(path)?;
    let name = path.file_stem().map_or("triple".into(), |n| n.to_string_lossy().into_owned());
    Ok(models::from_triple(&name, &t))
}

struct Output {
    body: Vec<u8>,
    passed: bool,
}

fn json_output<T: Serialize>(command: &str, subject: &str, provenance: &str, passed: bool, result: T) -> Result<Output> {
    let r = Report { format: FORMAT_VERSION, command: command.into(), subject: subject.into(), provenance: provenance.into(), passed, result };
    let mut body = serde_json::to_vec_pretty(&r)?;
    body.push(b'\n');
    Ok(Output { body, passed })
}

fn no_csv(g: &Global, cmd: &str) -> Result<()> {
    if g.csv {
        return Err(Error::Unsupported(format!("--csv is not available for {cmd}")));
    }
    Ok(())
}

fn classify(g: &Global, s: &SubjectArgs) -> Result<Output> {
    no_csv(g, "classify")?;
    let m = resolve_subject(s)?;
    let grade = g.grade.unwrap_or(8);
    let rep = defect_report(&m, grade);
    let triple: Option<TripleClass> = m.triple.as_ref().map(|t| t.classify(grade));
    let passed = rep.support_certified;
    let result = json!({
        "class": rep.class,
        "declared_class": m.declared_class,
        "eigenvalues": rep.eigenvalues,
        "support_certified": rep.support_certified,
        "boundary_ring_max": rep.boundary_ring_max,
        "window_grade": grade,
        "kernel_dims": rep.kernel_dims,
        "triple": m.triple.as_ref().map(|t| t.describe()),
        "triple_class": triple,
    });
    json_output("classify", &m.name, &m.provenance, passed, result)
}

fn defect(g: &Global, s: &SubjectArgs) -> Result<Output> {
    no_csv(g, "defect")?;
    let m = resolve_subject(s)?;
    let grade = g.grade.unwrap_or(6);
    let rep = defect_report(&m, grade);
    let ids = verify_projection_identities(&m, grade);
    let passed = rep.support_certified && ids.max_deviation() <= IDENTITY_TOL;
    let window: Vec<Vec<i64>> = rep.window.iter().map(|i| i.coords().to_vec()).collect();
    let result = json!({
        "report": rep,
        "window": window,
        "matrix": MatrixFile::from_matrix(&rep.matrix),
        "identities": ids,
    });
    json_output("defect", &m.name, &m.provenance, passed, result)
}

fn wold_cmd(g: &Global, s: &SubjectArgs, of: WoldTarget) -> Result<Output> {
    no_csv(g, "wold")?;
    let m = resolve_subject(s)?;
    let op = match of {
        WoldTarget::V1 => m.v1.clone(),
        WoldTarget::V2 => m.v2.clone(),
        WoldTarget::V => compose(&m.v1, &m.v2)?,
    };
    let rep = wold(&op, g.grade.unwrap_or(6));
    json_output("wold", &m.name, &m.provenance, true, json!({ "of": format!("{of:?}").to_lowercase(), "report": rep }))
}

fn fringe(g: &Global, s: &SubjectArgs) -> Result<Output> {
    no_csv(g, "fringe")?;
    let m = resolve_subject(s)?;
    let rep = fringe_matrices(&m.v1, &m.v2, g.grade.unwrap_or(6));
    let passed = rep.class == m.declared_class;
    json_output("fringe", &m.name, &m.provenance, passed, rep)
}

fn sarkar(g: &Global, s: &SubjectArgs) -> Result<Output> {
    no_csv(g, "sarkar")?;
    let m = resolve_subject(s)?;
    let grade = g.grade.unwrap_or(6);
    let t = sarkar_triple(&m.v1, &m.v2, grade, g.tol_rank)?;
    let tc = t.classify(grade);
    let dc = defect_report(&m, grade).class;
    let result = json!({
        "triple": triple_json(&t)?,
        "triple_class": tc,
        "defect_class": dc,
    });
    json_output("sarkar", &m.name, &m.provenance, tc.class == dc, result)
}

fn intertwine(g: &Global, w: &str) -> Result<Output> {
    no_csv(g, "intertwine-check")?;
    let wm = match w {
        "diag1i" => models::default_w(),
        "one" => crate::linops::dense::CMat::identity(1, 1),
        path => load_matrix(path)?,
    };
    let reps = intertwiner_reports(&wm, g.grade.unwrap_or(8))?;
    let passed = reps.iter().all(|r| r.max_deviation() <= 1e-13);
    json_output("intertwine-check", &format!("W = {w}"), "explicit unitary equivalences between model pairs", passed, reps)
}

fn scan_cmd(g: &Global, s: &SubjectArgs, zgrid: &Option<String>, lgrid: &Option<String>, summary: &Option<PathBuf>) -> Result<Output> {
    let m = resolve_subject(s)?;
    let grid = match (zgrid, lgrid) {
        (Some(z), None) => {
            let (n_r, n_theta) = parse_dims(z).ok_or_else(|| Error::Unsupported(format!("bad --zgrid `{z}`, expected RxT")))?;
            Grid::Z { n_r, n_theta }
        }
        (None, Some(l)) => {
            let n = match parse_dims(l) {
                Some((a, b)) if a == b => a,
                Some(_) => return Err(Error::Unsupported(format!("--lgrid `{l}` must be square"))),
                None => l.trim().parse().map_err(|_| Error::Unsupported(format!("bad --lgrid `{l}`")))?,
            };
            Grid::Lambda { n }
        }
        _ => return Err(Error::Unsupported("scan needs --zgrid or --lgrid".into())),
    };
    let mut cfg = ScanConfig::new(grid);
    cfg.tol_rank = g.tol_rank;
    cfg.tol_residual = g.tol_residual;
    cfg.dedup = g.tol_dedup;
    let subject = Subject::from_model(&m)?;
    let out = scan(&subject, &cfg)?;
    let passed = out.summary.passed;
    let report = json_output("scan", subject.name(), subject.provenance(), passed, &out.summary)?;
    if let Some(p) = summary {
        std::fs::write(p, &report.body)?;
    }
    if g.csv {
        let mut body = Vec::new();
        write_csv(&out.samples, &mut body)?;
        return Ok(Output { body, passed });
    }
    Ok(report)
}

fn verify_cmd(g: &Global, suite: Suite, count: Option<usize>, l1: Option<C64>, l2: Option<C64>, generators: u32, threshold: f64) -> Result<Output> {
    let seed = g.seed;
    let rep: SuiteReport = match suite {
        Suite::Identities => verify::identities(g.grade.unwrap_or(8), seed, count.unwrap_or(50)),
        Suite::Ladders => verify::ladders(g.grade.unwrap_or(4), seed, count.unwrap_or(50)),
        Suite::Intertwiners => verify::intertwiners(g.grade.unwrap_or(8))?,
        Suite::KoszulOracle => verify::koszul_oracle(seed, count.unwrap_or(200))?,
        Suite::Stage2Neg => verify::stage2_neg(
            l1.unwrap_or(C64::new(0.3, 0.0)),
            l2.unwrap_or(C64::new(0.0, 0.5)),
            g.grade.unwrap_or(40),
            generators,
            threshold,
        )?,
        Suite::Embedding => verify::embedding(g.grade.unwrap_or(4)),
    };
    let passed = rep.passed;
    if g.csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["check", "deviation", "tolerance", "passed"])?;
        for c in &rep.checks {
            w.write_record([c.name.clone(), c.deviation.to_string(), c.tol.to_string(), c.passed.to_string()])?;
        }
        let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        return Ok(Output { body, passed });
    }
    let subject = format!("{suite:?}").to_lowercase();
    json_output("verify", &rep.suite, &format!("verification suite {subject}"), passed, &rep)
}

fn dispatch(cli: &Cli) -> Result<Output> {
    let g = &cli.global;
    if !(g.tol_rank > 0.0 && g.tol_residual > 0.0 && g.tol_dedup > 0.0) {
        return Err(Error::Unsupported("tolerances must be positive".into()));
    }
    if g.grade == Some(0) {
        return Err(Error::Unsupported("--grade must be at least 1".into()));
    }
    match &cli.command {
        Command::Classify(s) => classify(g, s),
        Command::Defect(s) => defect(g, s),
        Command::Wold { subject, of } => wold_cmd(g, subject, *of),
        Command::Fringe(s) => fringe(g, s),
        Command::Sarkar(s) => sarkar(g, s),
        Command::IntertwineCheck { w } => intertwine(g, w),
        Command::Scan { subject, zgrid, lgrid, summary } => scan_cmd(g, subject, zgrid, lgrid, summary),
        Command::Verify { suite, count, l1, l2, generators, threshold } => {
            verify_cmd(g, *suite, *count, *l1, *l2, *generators, *threshold)
        }
    }
}

fn emit(body: &[u8], out: Option<&Path>) -> std::io::Result<()> {
    match out {
        Some(p) => {
            let mut f = BufWriter::new(File::create(p)?);
            f.write_all(body)?;
            f.flush()
        }
        None => {
            let mut s = std::io::stdout().lock();
            s.write_all(body)?;
            s.flush()
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(&cli) {
        Ok(o) => {
            if let Err(e) = emit(&o.body, cli.global.out.as_deref()) {
                eprintln!("isopair: {e}");
                return EXIT_USAGE;
            }
            if o.passed {
                EXIT_OK
            } else {
                EXIT_FAILED
            }
        }
        Err(e) => {
            eprintln!("isopair: {e}");
            match e {
                Error::KernelNotStabilized { .. } | Error::CheckFailed(_) | Error::Deflation(_) => EXIT_FAILED,
                _ => EXIT_USAGE,
            }
        }
    }
}
