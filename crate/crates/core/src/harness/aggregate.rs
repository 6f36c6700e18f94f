use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::randliouv::derive_seed;
use crate::syncstats::{bootstrap_ratio_ci, interval_probabilities, Histogram, IntervalProbabilities};

use super::records::SweepRecord;

const BOOTSTRAP_SEED: u64 = 0xb007;
pub const CI_LEVEL: f64 = 0.95;

/// Per-η summary of a set of records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub eta: f64,
    pub n_records: usize,
    /// Records with reason code `ok`.
    pub n_used: usize,
    pub mean_s_max: Option<f64>,
    /// Standard error of the mean.
    pub sem_s_max: Option<f64>,
    pub q05_s_max: Option<f64>,
    pub q50_s_max: Option<f64>,
    pub q95_s_max: Option<f64>,
    pub intervals: Option<IntervalProbabilities>,
    pub ratio: Option<f64>,
    pub ratio_ci: Option<(f64, f64)>,
    pub histogram: Histogram,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateTable {
    pub model: String,
    pub rows: Vec<AggregateRow>,
}

impl AggregateTable {
    pub fn row(&self, eta: f64) -> Option<&AggregateRow> {
        self.rows.iter().find(|r| r.eta == eta)
    }
}

fn quantile(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = p * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64))
}

/// Group by η, drop reason-coded records, summarize `S_max` and pool `χ`.
pub fn aggregate(records: &[SweepRecord], bins: usize, resamples: usize) -> Result<AggregateTable> {
    let model = records.first().map(|r| r.model.clone()).unwrap_or_default();
    if let Some(r) = records.iter().find(|r| r.model != model) {
        return Err(Error::IncompatibleRecords(format!("mixed models {model:?} and {:?}", r.model)));
    }
    let mut etas: Vec<f64> = records.iter().map(|r| r.eta).collect();
    etas.sort_by(f64::total_cmp);
    etas.dedup();
    let mut rows = Vec::with_capacity(etas.len());
    for eta in etas {
        let group: Vec<&SweepRecord> = records.iter().filter(|r| r.eta == eta).collect();
        let used: Vec<&SweepRecord> = group.iter().copied().filter(|r| r.is_used()).collect();
        let mut s: Vec<f64> = used.iter().filter_map(|r| r.s_max).collect();
        s.sort_by(f64::total_cmp);
        let mean = (!s.is_empty()).then(|| s.iter().sum::<f64>() / s.len() as f64);
        let sem = mean.filter(|_| s.len() > 1).map(|m| {
            let var = s.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (s.len() - 1) as f64;
            (var / s.len() as f64).sqrt()
        });
        let pooled: Vec<f64> = used.iter().flat_map(|r| r.chi.iter().copied()).collect();
        let mut histogram = Histogram::new(bins)?;
        histogram.extend(&pooled);
        let intervals = if pooled.is_empty() { None } else { Some(interval_probabilities(&pooled)?) };
        let groups: Vec<&[f64]> = used.iter().filter(|r| !r.chi.is_empty()).map(|r| r.chi.as_slice()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(BOOTSTRAP_SEED, eta.to_bits()));
        let ratio_ci = bootstrap_ratio_ci(&groups, resamples, CI_LEVEL, &mut rng);
        rows.push(AggregateRow {
            eta,
            n_records: group.len(),
            n_used: used.len(),
            mean_s_max: mean,
            sem_s_max: sem,
            q05_s_max: quantile(&s, 0.05),
            q50_s_max: quantile(&s, 0.5),
            q95_s_max: quantile(&s, 0.95),
            ratio: intervals.and_then(|p| p.ratio()),
            intervals,
            ratio_ci,
            histogram,
        });
    }
    Ok(AggregateTable { model, rows })
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_aggregate_csv<W: Write>(table: &AggregateTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "eta",
        "mean_s_max",
        "p1",
        "p2",
        "p3",
        "ratio",
        "ratio_ci_lo",
        "ratio_ci_hi",
        "sem_s_max",
        "q05_s_max",
        "q50_s_max",
        "q95_s_max",
        "n_records",
        "n_used",
        "chi_count",
    ])?;
    for r in &table.rows {
        let p = r.intervals;
        w.write_record([
            r.eta.to_string(),
            opt(r.mean_s_max),
            opt(p.map(|p| p.p1)),
            opt(p.map(|p| p.p2)),
            opt(p.map(|p| p.p3)),
            opt(r.ratio),
            opt(r.ratio_ci.map(|c| c.0)),
            opt(r.ratio_ci.map(|c| c.1)),
            opt(r.sem_s_max),
            opt(r.q05_s_max),
            opt(r.q50_s_max),
            opt(r.q95_s_max),
            r.n_records.to_string(),
            r.n_used.to_string(),
            r.histogram.total().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `eta, bin_left, bin_right, density, count`.
pub fn write_histogram_csv<W: Write>(table: &AggregateTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["eta", "bin_left", "bin_right", "density", "count"])?;
    for r in &table.rows {
        let dens = r.histogram.densities();
        for (b, (d, c)) in dens.iter().zip(&r.histogram.counts).enumerate() {
            let (lo, hi) = r.histogram.edges(b);
            w.write_record([r.eta.to_string(), lo.to_string(), hi.to_string(), d.to_string(), c.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::records::ReasonCode;

    fn rec(id: u64, eta: f64, s: f64, chi: Vec<f64>, model: &str) -> SweepRecord {
        SweepRecord {
            sample_id: id,
            eta,
            seed: id,
            s_max: Some(s),
            multiplicity: 1,
            reason_code: ReasonCode::Ok,
            argmax: vec![],
            n_argmax: 1,
            hermiticity_defect: None,
            min_eigenvalue: None,
            solver: None,
            model: model.into(),
            chi,
        }
    }

    #[test]
    fn counts_reconcile() {
        let mut bad = rec(2, 1.0, 0.0, vec![], "m");
        bad.reason_code = ReasonCode::Degenerate;
        bad.s_max = None;
        let recs = vec![rec(0, 1.0, 1.0, vec![0.0, 0.25], "m"), rec(1, 1.0, 3.0, vec![1.0], "m"), bad, rec(0, 2.0, 0.5, vec![0.5], "m")];
        let t = aggregate(&recs, 4, 100).unwrap();
        assert_eq!(t.rows.len(), 2);
        let r = t.row(1.0).unwrap();
        assert_eq!((r.n_records, r.n_used), (3, 2));
        assert_eq!(r.mean_s_max, Some(2.0));
        assert_eq!(r.histogram.total(), 3);
        let p = r.intervals.unwrap();
        assert!((p.p1 - 1.0 / 3.0).abs() < 1e-15 && (p.p2 - 1.0 / 3.0).abs() < 1e-15);
        assert!((r.ratio.unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_mixed_models() {
        let recs = vec![rec(0, 1.0, 1.0, vec![], "a"), rec(1, 1.0, 1.0, vec![], "b")];
        assert!(matches!(aggregate(&recs, 4, 10), Err(Error::IncompatibleRecords(_))));
    }
}
