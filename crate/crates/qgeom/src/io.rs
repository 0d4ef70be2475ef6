//! File formats: operators, states, ladder states and spin kets as JSON; CSV and OBJ output.

use std::fs;
use std::path::Path;

use qgeom_core::hull::Hull3;
use qgeom_core::interconvert::{parse_rational, ExactProbVector, LadderState, ProbVector};
use qgeom_core::linalg::{c, CMat, DensityMatrix, DimensionSpec, HermitianOperator};
use qgeom_core::su2::{SpinKet, SpinLabel};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::CliError;

#[derive(Debug, Deserialize)]
pub struct MatrixDoc {
    pub dim: Option<usize>,
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub dims: Option<Vec<usize>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OpsDoc {
    List(Vec<MatrixDoc>),
    Wrapped {
        ops: Vec<MatrixDoc>,
        #[serde(default)]
        dims: Option<Vec<usize>>,
    },
    Single(MatrixDoc),
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

impl MatrixDoc {
    pub fn matrix(&self) -> Result<CMat, CliError> {
        let n = self.re.len();
        if let Some(d) = self.dim {
            if d != n {
                return Err(CliError::Usage(format!("\"dim\" is {d} but \"re\" has {n} rows")));
            }
        }
        let rows_ok = |m: &Vec<Vec<f64>>| m.len() == n && m.iter().all(|r| r.len() == n);
        if !rows_ok(&self.re) || self.im.as_ref().is_some_and(|m| !rows_ok(m)) {
            return Err(CliError::Usage("matrix must be square".into()));
        }
        Ok(CMat::from_fn(n, n, |i, j| c(self.re[i][j], self.im.as_ref().map_or(0.0, |m| m[i][j]))))
    }

    pub fn hermitian(&self) -> Result<HermitianOperator, CliError> {
        Ok(HermitianOperator::new(self.matrix()?)?)
    }
}

pub fn read_matrix(path: &Path) -> Result<(CMat, Option<Vec<usize>>), CliError> {
    let doc: MatrixDoc = read_json(path)?;
    Ok((doc.matrix()?, doc.dims.clone()))
}

pub fn read_operator(path: &Path) -> Result<(HermitianOperator, Option<Vec<usize>>), CliError> {
    let doc: MatrixDoc = read_json(path)?;
    Ok((doc.hermitian()?, doc.dims.clone()))
}

pub fn read_state(path: &Path) -> Result<DensityMatrix, CliError> {
    let (op, _) = read_operator(path)?;
    Ok(DensityMatrix::new(op)?)
}

pub fn read_operators(path: &Path) -> Result<(Vec<HermitianOperator>, Option<Vec<usize>>), CliError> {
    let (docs, dims) = match read_json::<OpsDoc>(path)? {
        OpsDoc::List(v) => (v, None),
        OpsDoc::Wrapped { ops, dims } => (ops, dims),
        OpsDoc::Single(m) => {
            let d = m.dims.clone();
            (vec![m], d)
        }
    };
    let ops = docs.iter().map(MatrixDoc::hermitian).collect::<Result<Vec<_>, _>>()?;
    if ops.is_empty() {
        return Err(CliError::Usage(format!("{}: no operators", path.display())));
    }
    Ok((ops, dims))
}

/// "2,3" or a dims list from the input file; the command line wins.
pub fn dimension_spec(flag: Option<&str>, from_file: Option<Vec<usize>>) -> Result<DimensionSpec, CliError> {
    let dims = match flag {
        Some(s) => parse_usize_list(s)?,
        None => from_file.ok_or_else(|| CliError::Usage("--dims is required".into()))?,
    };
    Ok(DimensionSpec::new(dims)?)
}

pub fn parse_usize_list(s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| CliError::Usage(format!("bad integer list {s:?}"))))
        .collect()
}

pub fn parse_f64_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("bad number list {s:?}"))))
        .collect()
}

#[derive(Debug, Deserialize)]
struct LadderDoc {
    #[serde(default)]
    offset: i64,
    #[serde(default)]
    amps: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    probs: Option<Vec<Value>>,
}

fn value_text(v: &Value) -> Result<String, CliError> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(CliError::Usage(format!("expected a number or fraction string, got {v}"))),
    }
}

pub enum LadderInput {
    Amplitudes(LadderState),
    Probabilities(ExactProbVector),
}

impl LadderInput {
    pub fn probs(&self) -> Result<ProbVector, CliError> {
        match self {
            LadderInput::Amplitudes(s) => Ok(s.probs()?),
            LadderInput::Probabilities(p) => Ok(p.to_f64()),
        }
    }

    pub fn exact(&self) -> Result<ExactProbVector, CliError> {
        match self {
            LadderInput::Probabilities(p) => Ok(p.clone()),
            LadderInput::Amplitudes(_) => {
                Err(CliError::Usage("--exact needs \"probs\" given as fractions, not \"amps\"".into()))
            }
        }
    }
}

/// {"offset": k, "amps": [[re, im], …]} or {"offset": k, "probs": ["1/6", …]}.
pub fn read_ladder(path: &Path) -> Result<LadderInput, CliError> {
    let doc: LadderDoc = read_json(path)?;
    match (doc.amps, doc.probs) {
        (Some(a), None) => {
            let amps = a.iter().map(|z| c(z[0], z[1])).collect();
            Ok(LadderInput::Amplitudes(LadderState::new(doc.offset, amps)?))
        }
        (None, Some(p)) => {
            let w = p.iter().map(|v| value_text(v).and_then(|s| Ok(parse_rational(&s)?))).collect::<Result<Vec<_>, _>>()?;
            Ok(LadderInput::Probabilities(ExactProbVector::new(doc.offset, w)?))
        }
        _ => Err(CliError::Usage(format!("{}: give exactly one of \"amps\" and \"probs\"", path.display()))),
    }
}

#[derive(Debug, Deserialize)]
struct SpinEntry {
    j: Value,
    m: Value,
    #[serde(default)]
    tag: String,
    amp: [f64; 2],
}

pub fn read_spin(path: &Path) -> Result<SpinKet, CliError> {
    let entries: Vec<SpinEntry> = read_json(path)?;
    let labels = entries
        .iter()
        .map(|e| {
            let j = value_text(&e.j)?.parse()?;
            let m = value_text(&e.m)?.parse()?;
            Ok((SpinLabel { j, m, tag: e.tag.clone() }, c(e.amp[0], e.amp[1])))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(SpinKet::new(labels)?)
}

pub fn spin_json(s: &SpinKet) -> Value {
    Value::Array(
        s.entries()
            .map(|(l, a)| json!({"j": l.j.to_string(), "m": l.m.to_string(), "tag": l.tag, "amp": [a.re, a.im]}))
            .collect(),
    )
}

pub fn matrix_json(m: &CMat) -> Value {
    let n = m.nrows();
    let re: Vec<Vec<f64>> = (0..n).map(|i| (0..m.ncols()).map(|j| m[(i, j)].re).collect()).collect();
    let im: Vec<Vec<f64>> = (0..n).map(|i| (0..m.ncols()).map(|j| m[(i, j)].im).collect()).collect();
    json!({"dim": n, "re": re, "im": im})
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Pretty JSON to a file, or to stdout without a path.
pub fn emit_json(path: Option<&Path>, v: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(v).expect("JSON values serialize") + "\n";
    match path {
        Some(p) => write_text(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let io_err = |e: csv::Error| CliError::Usage(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io_err)?;
    w.write_record(header).map_err(io_err)?;
    for r in rows {
        w.write_record(r).map_err(io_err)?;
    }
    w.flush().map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn obj_text(h: &Hull3) -> String {
    let mut s = String::from("# convex hull of inner vertices\n");
    for p in &h.points {
        s += &format!("v {} {} {}\n", p[0], p[1], p[2]);
    }
    for f in &h.faces {
        s += &format!("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    s
}
