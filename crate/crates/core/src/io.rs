//! JSON formats for matrices and triples, and the report envelope.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bcl::{BclTriple, LazyPreset};
use crate::error::{Error, Result};
use crate::linops::dense::{self, CMat};
use crate::linops::C64;

/// Tag embedded in every report.
pub const FORMAT_VERSION: &str = "isopair-report/1";

/// Unitarity tolerance for matrices read from disk.
pub const LOAD_UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub rows: Vec<Vec<[f64; 2]>>,
}

impl MatrixFile {
    pub fn from_matrix(m: &CMat) -> Self {
        MatrixFile {
            dim: m.nrows(),
            rows: (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
                .collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        if self.rows.len() != self.dim || self.rows.iter().any(|r| r.len() != self.dim) {
            return Err(Error::Dimension(format!("matrix file declares dim {} but rows disagree", self.dim)));
        }
        let m = CMat::from_fn(self.dim, self.dim, |r, c| C64::new(self.rows[r][c][0], self.rows[r][c][1]));
        if !dense::is_finite(&m) {
            return Err(Error::NonFinite("matrix file".into()));
        }
        Ok(m)
    }
}

pub fn parse_matrix(text: &str) -> Result<CMat> {
    serde_json::from_str::<MatrixFile>(text)?.to_matrix()
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<CMat> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

/// A matrix file that must hold a unitary.
pub fn read_unitary(path: impl AsRef<Path>) -> Result<CMat> {
    let m = read_matrix(path.as_ref())?;
    let dev = dense::unitary_deviation(&m);
    if dev > LOAD_UNITARY_TOL {
        return Err(Error::InvalidTriple(format!(
            "{} is not unitary (deviation {dev:e})",
            path.as_ref().display()
        )));
    }
    Ok(m)
}

pub fn write_matrix(path: impl AsRef<Path>, m: &CMat) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(&MatrixFile::from_matrix(m))?)?;
    Ok(())
}

fn entry(v: &Value) -> Result<C64> {
    match v {
        Value::Array(a) if a.len() == 2 => match (a[0].as_f64(), a[1].as_f64()) {
            (Some(re), Some(im)) => Ok(C64::new(re, im)),
            _ => Err(Error::Dimension("complex entries are [re, im] numbers".into())),
        },
        Value::Number(n) => Ok(C64::new(n.as_f64().unwrap_or(f64::NAN), 0.0)),
        _ => Err(Error::Dimension("complex entries are [re, im] pairs".into())),
    }
}

/// `dim*dim` entries, either flat row-major or as nested rows.
fn matrix_value(v: &Value, dim: usize, what: &str) -> Result<CMat> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::Dimension(format!("{what} must be an array")))?;
    let nested = arr.iter().all(|r| r.as_array().is_some_and(|x| x.iter().all(Value::is_array)));
    let flat: Vec<&Value> = if nested {
        arr.iter().flat_map(|r| r.as_array().unwrap().iter()).collect()
    } else {
        arr.iter().collect()
    };
    if flat.len() != dim * dim {
        return Err(Error::Dimension(format!("{what} has {} entries, expected {}", flat.len(), dim * dim)));
    }
    let vals = flat.into_iter().map(entry).collect::<Result<Vec<_>>>()?;
    let m = CMat::from_fn(dim, dim, |r, c| vals[r * dim + c]);
    if !dense::is_finite(&m) {
        return Err(Error::NonFinite(what.into()));
    }
    Ok(m)
}

/// `{dim, U, P}` with `U`, `P` flat row-major or nested; validated to 1e-10.
pub fn parse_triple(text: &str) -> Result<BclTriple> {
    let v: Value = serde_json::from_str(text)?;
    if let Some(p) = v.get("preset").and_then(Value::as_str) {
        let preset = LazyPreset::parse(p).ok_or_else(|| Error::UnknownModel(p.into()))?;
        return Ok(BclTriple::preset(preset));
    }
    let dim = v
        .get("dim")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Dimension("triple file needs `dim`".into()))? as usize;
    let u = matrix_value(v.get("U").ok_or_else(|| Error::Dimension("triple file needs `U`".into()))?, dim, "U")?;
    let p = matrix_value(v.get("P").ok_or_else(|| Error::Dimension("triple file needs `P`".into()))?, dim, "P")?;
    BclTriple::finite_with_tol(u, p, LOAD_UNITARY_TOL)
}

pub fn read_triple(path: impl AsRef<Path>) -> Result<BclTriple> {
    parse_triple(&std::fs::read_to_string(path)?)
}

/// Nested-row triple file for a finite triple.
pub fn triple_json(t: &BclTriple) -> Result<Value> {
    match t {
        BclTriple::Finite { u, p } => Ok(serde_json::json!({
            "dim": u.nrows(),
            "U": MatrixFile::from_matrix(u).rows,
            "P": MatrixFile::from_matrix(p).rows,
        })),
        BclTriple::Lazy { preset, .. } => Ok(serde_json::json!({ "preset": preset.name() })),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report<T: Serialize> {
    pub format: &'static str,
    pub command: String,
    pub subject: String,
    pub provenance: String,
    pub passed: bool,
    pub result: T,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bcl::DefectClass;

    #[test]
    fn matrix_round_trip() {
        let w = crate::models::default_w();
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("w.json");
        write_matrix(&f, &w).unwrap();
        assert_eq!(read_unitary(&f).unwrap(), w);
    }

    #[test]
    fn rejects_non_unitary() {
        let text = r#"{"dim": 1, "rows": [[[0.5, 0.0]]]}"#;
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("w.json");
        std::fs::write(&f, text).unwrap();
        assert!(matches!(read_unitary(&f), Err(Error::InvalidTriple(_))));
        assert!(matches!(parse_matrix(r#"{"dim": 2, "rows": [[[1, 0]]]}"#), Err(Error::Dimension(_))));
    }

    #[test]
    fn triple_flat_and_nested() {
        let flat = r#"{"dim": 2, "U": [[0,0],[1,0],[1,0],[0,0]], "P": [[1,0],[0,0],[0,0],[0,0]]}"#;
        let nested = r#"{"dim": 2, "U": [[[0,0],[1,0]],[[1,0],[0,0]]], "P": [[[1,0],[0,0]],[[0,0],[0,0]]]}"#;
        for text in [flat, nested] {
            let t = parse_triple(text).unwrap();
            assert_eq!(t.classify(0).class, DefectClass::OffDiagonal);
        }
        let t = parse_triple(r#"{"preset": "bilateral_p_minus"}"#).unwrap();
        assert_eq!(t.classify(4).class, DefectClass::Negative);
    }
}
