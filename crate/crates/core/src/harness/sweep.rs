use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::liouvillian::{perturbed, perturbed_steady_state, steady_state, SpectrumOptions, SteadyState, ZeroSpace};
use crate::operators::{Operator, SpinSpec, Superoperator};
use crate::phasespace::{
    phase_distribution, reduce_over_global_phase, sync_measure, threshold_region, ReducedPhaseDistribution, SyncMeasure,
    ThresholdMode,
};
use crate::randliouv::{derive_seed, RandomLiouvillian, SampleManifest};
use crate::syncstats::{sample_chi, SamplingWeight};

use super::aggregate::{aggregate, write_aggregate_csv, write_histogram_csv, AggregateTable};
use super::config::{Preset, SweepConfig};
use super::records::{write_chi_csv, write_records_csv, ReasonCode, SolverKind, SweepRecord};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "SYNCLAB_WORKERS";

/// The reduced solver is used while `η‖ℒ₁‖_F ≤ REDUCED_RATIO · ‖ℒ₀‖_F`.
pub const REDUCED_RATIO: f64 = 1e-2;

pub const RECORDS_FILE: &str = "records.csv";
pub const CHI_FILE: &str = "chi.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const HISTOGRAM_FILE: &str = "histogram.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const PARTS_DIR: &str = "parts";

/// Steady-state solver for `ℒ₀ + ηℒ₁` that reuses the zero space of `ℒ₀`.
#[derive(Clone, Debug)]
pub struct SolverPlan {
    l0: Superoperator,
    norm0: f64,
    zero: Option<ZeroSpace>,
}

impl SolverPlan {
    pub fn new(l0: Superoperator) -> Result<Self> {
        let norm0 = l0.frobenius_norm();
        let zero = ZeroSpace::compute(&l0, linalg::default_rank_tol(l0.dim()), &SpectrumOptions::default())?;
        let zero = (zero.dim() > 1).then_some(zero);
        Ok(SolverPlan { l0, norm0, zero })
    }

    pub fn generator(&self) -> &Superoperator {
        &self.l0
    }

    /// Dimension of the zero space of `ℒ₀`.
    pub fn zero_dim(&self) -> usize {
        self.zero.as_ref().map_or(1, |z| z.dim())
    }

    pub fn solve(&self, l1: &Superoperator, eta: f64) -> Result<(SteadyState, SolverKind)> {
        if eta == 0.0 {
            return Ok((steady_state(&self.l0)?, SolverKind::Direct));
        }
        if let Some(zero) = &self.zero {
            if eta * l1.frobenius_norm() <= REDUCED_RATIO * self.norm0 {
                return Ok((perturbed_steady_state(&self.l0, zero, l1, eta)?, SolverKind::Reduced));
            }
        }
        Ok((steady_state(&perturbed(&self.l0, l1, eta)?)?, SolverKind::Direct))
    }
}

/// Phase-space analysis settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalysisOptions {
    pub grid: usize,
    pub threshold: f64,
    pub threshold_mode: ThresholdMode,
    pub sampling: SamplingWeight,
    pub chi_samples: usize,
}

impl AnalysisOptions {
    pub fn from_config(cfg: &SweepConfig) -> Self {
        let s = &cfg.sweep;
        AnalysisOptions {
            grid: s.grid,
            threshold: s.threshold,
            threshold_mode: s.threshold_mode,
            sampling: s.sampling,
            chi_samples: s.chi_samples_per_record,
        }
    }
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            grid: crate::phasespace::DEFAULT_GRID,
            threshold: 0.95,
            threshold_mode: ThresholdMode::default(),
            sampling: SamplingWeight::default(),
            chi_samples: 1000,
        }
    }
}

/// `S_d`, `S_max` with its argmax set, and `χ` samples of one state.
#[derive(Clone, Debug)]
pub struct StateAnalysis {
    pub reduced: ReducedPhaseDistribution,
    pub measure: SyncMeasure,
    pub chi: Vec<f64>,
}

/// `χ` is drawn only for two or three sites.
pub fn analyze_state(rho: &Operator, spec: &SpinSpec, opts: &AnalysisOptions, rng: &mut ChaCha8Rng) -> Result<StateAnalysis> {
    let reduced = reduce_over_global_phase(&phase_distribution(rho, spec)?)?;
    let measure = sync_measure(&reduced, opts.grid)?;
    let chi = if reduced.dims() <= 2 {
        let region = threshold_region(&reduced, opts.grid, opts.threshold, opts.threshold_mode)?;
        sample_chi(&reduced, &region, opts.chi_samples, opts.sampling, rng)?
    } else {
        Vec::new()
    };
    Ok(StateAnalysis { reduced, measure, chi })
}

/// Seed of the perturbation drawn for `sample_id`; shared by every η.
pub fn sample_seed(master: u64, sample_id: u64) -> u64 {
    derive_seed(master, sample_id)
}

pub fn perturbation_for(spec: &SpinSpec, seed: u64) -> Result<RandomLiouvillian> {
    RandomLiouvillian::sample(spec.dim(), &mut ChaCha8Rng::seed_from_u64(seed))
}

/// `χ` stream of one (sample, η) pair.
pub fn chi_rng(seed: u64, eta: f64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, eta.to_bits()))
}

/// Steady state of `ℒ₀ + ηℒ₁` and its analysis as a record. Failures are
/// recorded, not returned.
pub fn evaluate(
    preset: &Preset,
    plan: &SolverPlan,
    l1: &Superoperator,
    sample_id: u64,
    seed: u64,
    eta: f64,
    opts: &AnalysisOptions,
) -> SweepRecord {
    let mut rec = SweepRecord {
        sample_id,
        eta,
        seed,
        s_max: None,
        multiplicity: 0,
        reason_code: ReasonCode::SolverFailure,
        argmax: Vec::new(),
        n_argmax: 0,
        hermiticity_defect: None,
        min_eigenvalue: None,
        solver: None,
        model: preset.name.to_string(),
        chi: Vec::new(),
    };
    let (state, kind) = match plan.solve(l1, eta) {
        Ok(x) => x,
        Err(e) => {
            log::warn!("sample {sample_id} at eta {eta}: {e}");
            return rec;
        }
    };
    rec.solver = Some(kind);
    rec.multiplicity = state.multiplicity();
    let SteadyState::Unique { rho, hermiticity_defect, min_eigenvalue, .. } = state else {
        rec.reason_code = ReasonCode::Degenerate;
        return rec;
    };
    rec.hermiticity_defect = Some(hermiticity_defect);
    rec.min_eigenvalue = Some(min_eigenvalue);
    match analyze_state(&rho, &preset.spec, opts, &mut chi_rng(seed, eta)) {
        Ok(a) => {
            rec.s_max = Some(a.measure.s_max);
            rec.argmax = a.measure.argmax.first().cloned().unwrap_or_default();
            rec.n_argmax = a.measure.argmax.len();
            rec.chi = a.chi;
            rec.reason_code = ReasonCode::Ok;
        }
        Err(e) => log::warn!("sample {sample_id} at eta {eta}: {e}"),
    }
    rec
}

/// Completed work for one perturbation draw, all η.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartFile {
    pub config_hash: String,
    pub sample_id: u64,
    pub sample: SampleManifest,
    pub records: Vec<SweepRecord>,
}

/// Provenance of a sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub config: SweepConfig,
    pub master_seed: u64,
    pub model: String,
    pub workers: usize,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub n_records: usize,
    pub n_excluded: usize,
    pub resumed_samples: usize,
    pub samples: Vec<SampleManifest>,
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub records: Vec<SweepRecord>,
    pub aggregate: AggregateTable,
    pub manifest: RunManifest,
    pub output_dir: PathBuf,
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Worker count from [`WORKERS_ENV`], else the number of CPUs.
pub fn workers_from_env() -> Result<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::Config(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Write through a temporary sibling and rename into place.
pub fn write_atomic(path: &Path, f: impl FnOnce(&mut BufWriter<fs::File>) -> Result<()>) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or_default()
    ));
    let result = (|| {
        let mut w = BufWriter::new(fs::File::create(&tmp)?);
        f(&mut w)?;
        use std::io::Write;
        w.flush()?;
        w.get_ref().sync_all()?;
        Ok(())
    })();
    match result {
        Ok(()) => Ok(fs::rename(&tmp, path)?),
        Err(e) => {
            let _ = fs::remove_file(&tmp);
            Err(e)
        }
    }
}

fn part_path(dir: &Path, sample_id: u64) -> PathBuf {
    dir.join(PARTS_DIR).join(format!("sample_{sample_id:06}.json"))
}

fn load_part(path: &Path, hash: &str) -> Option<PartFile> {
    let text = fs::read(path).ok()?;
    let part: PartFile = serde_json::from_slice(&text).ok()?;
    (part.config_hash == hash).then_some(part)
}

/// Run every (η, sample) pair of `cfg` into `cfg.sweep.output_dir`.
///
/// Each perturbation draw is one unit of work persisted atomically under
/// `parts/`; a rerun with the same configuration skips completed units.
/// Final tables are always rebuilt from the part files, sorted by η then
/// sample id, so they are identical for any worker count and for resumed
/// runs. Dense linear algebra runs single-threaded inside each worker.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    let started = unix_now();
    let workers = workers_from_env()?;
    let dir = cfg.sweep.output_dir.clone();
    fs::create_dir_all(dir.join(PARTS_DIR))?;
    let finals = [RECORDS_FILE, CHI_FILE, AGGREGATE_FILE, HISTOGRAM_FILE, MANIFEST_FILE].map(|f| dir.join(f));
    let result = run_into(cfg, &dir, workers, started);
    if result.is_err() {
        for f in &finals {
            let _ = fs::remove_file(f);
        }
    }
    result
}

fn run_into(cfg: &SweepConfig, dir: &Path, workers: usize, started: u64) -> Result<SweepOutcome> {
    faer::set_global_parallelism(faer::Par::Seq);
    let preset = cfg.model.build()?;
    let plan = SolverPlan::new(preset.generator.clone())?;
    let hash = cfg.hash();
    let opts = AnalysisOptions::from_config(cfg);
    let s = &cfg.sweep;
    let ids: Vec<u64> = (0..s.samples_per_eta as u64).collect();
    let pending: Vec<u64> = ids.iter().copied().filter(|&id| load_part(&part_path(dir, id), &hash).is_none()).collect();
    let resumed = ids.len() - pending.len();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    pool.install(|| {
        pending.par_iter().try_for_each(|&id| -> Result<()> {
            let seed = sample_seed(s.master_seed, id);
            let draw = perturbation_for(&preset.spec, seed)?;
            let records =
                s.eta_values.iter().map(|&eta| evaluate(&preset, &plan, &draw.generator, id, seed, eta, &opts)).collect();
            let part = PartFile { config_hash: hash.clone(), sample_id: id, sample: draw.manifest(seed), records };
            write_atomic(&part_path(dir, id), |w| Ok(serde_json::to_writer(w, &part)?))
        })
    })?;

    let mut records = Vec::new();
    let mut samples = Vec::new();
    for &id in &ids {
        let part = load_part(&part_path(dir, id), &hash)
            .ok_or_else(|| Error::Config(format!("missing or unreadable part for sample {id}")))?;
        samples.push(part.sample);
        records.extend(part.records);
    }
    records.sort_by(|a, b| a.eta.total_cmp(&b.eta).then(a.sample_id.cmp(&b.sample_id)));
    let table = aggregate(&records, s.histogram_bins, s.bootstrap_resamples)?;

    write_atomic(&dir.join(RECORDS_FILE), |w| write_records_csv(&records, w))?;
    write_atomic(&dir.join(CHI_FILE), |w| write_chi_csv(&records, w))?;
    write_atomic(&dir.join(AGGREGATE_FILE), |w| write_aggregate_csv(&table, w))?;
    write_atomic(&dir.join(HISTOGRAM_FILE), |w| write_histogram_csv(&table, w))?;
    let n_excluded = records.iter().filter(|r| !r.is_used()).count();
    let manifest = RunManifest {
        tool: "synclab".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_hash: hash,
        config: cfg.clone(),
        master_seed: s.master_seed,
        model: preset.name.into(),
        workers,
        started_unix: started,
        finished_unix: unix_now(),
        n_records: records.len(),
        n_excluded,
        resumed_samples: resumed,
        samples,
    };
    write_atomic(&dir.join(MANIFEST_FILE), |w| Ok(serde_json::to_writer_pretty(w, &manifest)?))?;
    Ok(SweepOutcome { records, aggregate: table, manifest, output_dir: dir.to_path_buf() })
}
