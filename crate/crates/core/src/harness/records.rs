use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Why a record is or is not used in aggregates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReasonCode {
    Ok,
    /// More than one steady state.
    Degenerate,
    /// A linear-algebra routine failed.
    SolverFailure,
}

impl ReasonCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ReasonCode::Ok => "ok",
            ReasonCode::Degenerate => "degenerate",
            ReasonCode::SolverFailure => "solver_failure",
        }
    }
}

impl fmt::Display for ReasonCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReasonCode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ok" => Ok(ReasonCode::Ok),
            "degenerate" => Ok(ReasonCode::Degenerate),
            "solver_failure" => Ok(ReasonCode::SolverFailure),
            _ => Err(Error::IncompatibleRecords(format!("unknown reason code {s:?}"))),
        }
    }
}

/// How the steady state of a record was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    /// Reduction onto the zero space of the unperturbed generator.
    Reduced,
    /// Rank count plus bordered solve of the full generator.
    Direct,
}

impl SolverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::Reduced => "reduced",
            SolverKind::Direct => "direct",
        }
    }
}

/// One (η, sample) outcome. Quantities that need a unique steady state are
/// `None` otherwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub sample_id: u64,
    pub eta: f64,
    pub seed: u64,
    pub s_max: Option<f64>,
    pub multiplicity: usize,
    pub reason_code: ReasonCode,
    /// Best maximizer of `S_d`.
    pub argmax: Vec<f64>,
    pub n_argmax: usize,
    pub hermiticity_defect: Option<f64>,
    pub min_eigenvalue: Option<f64>,
    pub solver: Option<SolverKind>,
    pub model: String,
    pub chi: Vec<f64>,
}

impl SweepRecord {
    pub fn is_used(&self) -> bool {
        self.reason_code == ReasonCode::Ok
    }
}

pub const RECORD_COLUMNS: [&str; 13] = [
    "sample_id",
    "eta",
    "seed",
    "s_max",
    "multiplicity",
    "reason_code",
    "argmax_phi1p",
    "argmax_phi2p",
    "n_argmax",
    "hermiticity_defect",
    "min_eigenvalue",
    "solver",
    "model",
];

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn parse_opt(s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        s.parse().map(Some).map_err(|_| Error::IncompatibleRecords(format!("bad number {s:?}")))
    }
}

fn parse<T: FromStr>(s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::IncompatibleRecords(format!("bad field {s:?}")))
}

/// Records CSV; `χ` values go to [`write_chi_csv`].
pub fn write_records_csv<W: Write>(records: &[SweepRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_COLUMNS)?;
    for r in records {
        w.write_record([
            r.sample_id.to_string(),
            r.eta.to_string(),
            r.seed.to_string(),
            opt(r.s_max),
            r.multiplicity.to_string(),
            r.reason_code.to_string(),
            opt(r.argmax.first().copied()),
            opt(r.argmax.get(1).copied()),
            r.n_argmax.to_string(),
            opt(r.hermiticity_defect),
            opt(r.min_eigenvalue),
            r.solver.map(|s| s.as_str().to_string()).unwrap_or_default(),
            r.model.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `sample_id, eta, chi`, one row per value.
pub fn write_chi_csv<W: Write>(records: &[SweepRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sample_id", "eta", "chi"])?;
    for r in records {
        let (id, eta) = (r.sample_id.to_string(), r.eta.to_string());
        for c in &r.chi {
            w.write_record([id.as_str(), eta.as_str(), c.to_string().as_str()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Inverse of [`write_records_csv`] plus [`write_chi_csv`]. `χ` rows are
/// attached to the record with the same `(sample_id, eta)`.
pub fn read_records<R1: Read, R2: Read>(records: R1, chi: Option<R2>) -> Result<Vec<SweepRecord>> {
    let mut rd = csv::Reader::from_reader(records);
    let header: Vec<String> = rd.headers()?.iter().map(String::from).collect();
    if header != RECORD_COLUMNS {
        return Err(Error::IncompatibleRecords(format!("unexpected records header {header:?}")));
    }
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row?;
        let f = |i: usize| row.get(i).unwrap_or("");
        let mut argmax = Vec::new();
        for i in [6, 7] {
            if let Some(v) = parse_opt(f(i))? {
                argmax.push(v);
            }
        }
        out.push(SweepRecord {
            sample_id: parse(f(0))?,
            eta: parse(f(1))?,
            seed: parse(f(2))?,
            s_max: parse_opt(f(3))?,
            multiplicity: parse(f(4))?,
            reason_code: f(5).parse()?,
            argmax,
            n_argmax: parse(f(8))?,
            hermiticity_defect: parse_opt(f(9))?,
            min_eigenvalue: parse_opt(f(10))?,
            solver: match f(11) {
                "reduced" => Some(SolverKind::Reduced),
                "direct" => Some(SolverKind::Direct),
                _ => None,
            },
            model: f(12).to_string(),
            chi: Vec::new(),
        });
    }
    if let Some(chi) = chi {
        let mut index = std::collections::HashMap::new();
        for (i, r) in out.iter().enumerate() {
            index.insert((r.sample_id, r.eta.to_bits()), i);
        }
        let mut rd = csv::Reader::from_reader(chi);
        for row in rd.records() {
            let row = row?;
            let id: u64 = parse(row.get(0).unwrap_or(""))?;
            let eta: f64 = parse(row.get(1).unwrap_or(""))?;
            let v: f64 = parse(row.get(2).unwrap_or(""))?;
            let i = index
                .get(&(id, eta.to_bits()))
                .ok_or_else(|| Error::IncompatibleRecords(format!("χ row for unknown record ({id}, {eta})")))?;
            out[*i].chi.push(v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SweepRecord {
        SweepRecord {
            sample_id: 3,
            eta: 1e-4,
            seed: 99,
            s_max: Some(1.25e-4),
            multiplicity: 1,
            reason_code: ReasonCode::Ok,
            argmax: vec![0.1, 3.0],
            n_argmax: 1,
            hermiticity_defect: Some(1e-17),
            min_eigenvalue: Some(0.01),
            solver: Some(SolverKind::Reduced),
            model: "spin1_chain".into(),
            chi: vec![0.0, 0.25, 1.0],
        }
    }

    #[test]
    fn round_trip() {
        let mut degenerate = sample();
        degenerate.sample_id = 4;
        degenerate.s_max = None;
        degenerate.reason_code = ReasonCode::Degenerate;
        degenerate.argmax.clear();
        degenerate.chi.clear();
        degenerate.solver = None;
        let recs = vec![sample(), degenerate];
        let (mut a, mut b) = (Vec::new(), Vec::new());
        write_records_csv(&recs, &mut a).unwrap();
        write_chi_csv(&recs, &mut b).unwrap();
        let back = read_records(a.as_slice(), Some(b.as_slice())).unwrap();
        assert_eq!(back, recs);
    }
}
