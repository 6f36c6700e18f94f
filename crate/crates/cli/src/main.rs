use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use synclab::harness::{
    aggregate, analyze_state, chi_rng, perturbation_for, read_operator_csv, read_records, run_sweep,
    write_aggregate_csv, write_atomic, write_histogram_csv, write_operator_csv, AnalysisOptions, ModelConfig,
    SolverPlan, SweepConfig, AGGREGATE_FILE, CHI_FILE, HISTOGRAM_FILE, RECORDS_FILE,
};
use synclab::liouvillian::{full_spectrum_with, write_spectrum_csv, ModeClass, SpectrumOptions, SteadyState};
use synclab::operators::{Spin, SpinSpec};
use synclab::phasespace::{phase_distribution, reduce_over_global_phase, sync_measure, write_reduced_csv, DEFAULT_GRID};
use synclab::syncstats::{DEFAULT_BINS, DEFAULT_RESAMPLES};

#[derive(Parser)]
#[command(name = "synclab", version, about = "Open-system spin lattices: spectra, steady states, phase synchronization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Liouvillian eigenvalues with zero/oscillating/decaying classes.
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        tol_real: Option<f64>,
        #[arg(long)]
        tol_imag: Option<f64>,
    },
    /// Steady state of the model under one random perturbation.
    Steady {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        eta: f64,
        /// Seed of the perturbation.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Reduced phase distribution of a density operator read from CSV.
    PhaseDist {
        /// CSV with columns `row, col, re, im`.
        #[arg(long)]
        rho: PathBuf,
        /// Comma-separated spin lengths, one per site.
        #[arg(long, value_delimiter = ',', required = true)]
        spins: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Perturbation sweep from a TOML configuration; resumable.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `sweep.output_dir`.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Rebuild aggregate and histogram tables from sweep records.
    Aggregate {
        /// Sweep output directories; records must share one model.
        #[arg(long, required = true)]
        input: Vec<PathBuf>,
        /// Defaults to the first input.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BINS)]
        bins: usize,
        #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
        resamples: usize,
    },
    /// Fast invariant checks.
    Selftest,
}

#[derive(Args)]
struct ModelArgs {
    /// spin1_chain, spin_half_pair or coupled_spin1_pair.
    #[arg(long)]
    model: String,
    /// Model parameter as `key=value`; repeatable.
    #[arg(long = "param", short = 'p', value_parser = parse_param)]
    params: Vec<(String, String)>,
}

impl ModelArgs {
    fn config(&self) -> Result<ModelConfig> {
        Ok(ModelConfig::from_overrides(&self.model, &self.params)?)
    }
}

fn parse_param(s: &str) -> std::result::Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got {s:?}"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// Files written by a command; removed on drop unless kept.
struct Outputs {
    paths: Vec<PathBuf>,
    keep: bool,
}

impl Outputs {
    fn new() -> Self {
        Outputs { paths: Vec::new(), keep: false }
    }

    fn create(&mut self, path: &Path) -> Result<BufWriter<File>> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        self.paths.push(path.to_path_buf());
        Ok(BufWriter::new(f))
    }

    fn names(&self) -> Vec<String> {
        self.paths.iter().map(|p| p.display().to_string()).collect()
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if !self.keep {
            for p in &self.paths {
                let _ = fs::remove_file(p);
            }
        }
    }
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn write_manifest(outputs: &mut Outputs, path: &Path, command: &str, started: u64, extra: serde_json::Value) -> Result<()> {
    let mut m = json!({
        "tool": "synclab",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "arguments": std::env::args().skip(1).collect::<Vec<_>>(),
        "started_unix": started,
        "finished_unix": unix_now(),
        "outputs": outputs.names(),
    });
    if let (Some(m), serde_json::Value::Object(extra)) = (m.as_object_mut(), extra) {
        m.extend(extra);
    }
    let mut w = outputs.create(path)?;
    serde_json::to_writer_pretty(&mut w, &m)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn spectrum(model: &ModelArgs, out: Option<&Path>, tol_real: Option<f64>, tol_imag: Option<f64>) -> Result<()> {
    let started = unix_now();
    let cfg = model.config()?;
    let preset = cfg.build()?;
    let opts = SpectrumOptions { tol_real, tol_imag, ..SpectrumOptions::default() };
    let dec = full_spectrum_with(&preset.generator, &opts)?;
    let (tr, ti) = opts.resolved(dec.norm);
    let count = |c: ModeClass| (0..dec.len()).filter(|&k| dec.class_of(k, tr, ti) == c).count();
    let summary = json!({
        "model": cfg,
        "zero": count(ModeClass::Zero),
        "oscillating": count(ModeClass::Oscillating),
        "decaying": count(ModeClass::Decaying),
        "tol_real": tr,
        "tol_imag": ti,
        "max_residual": dec.max_residual(),
    });
    match out {
        None => write_spectrum_csv(&dec, tr, ti, io::stdout().lock())?,
        Some(path) => {
            let mut outputs = Outputs::new();
            let mut w = outputs.create(path)?;
            write_spectrum_csv(&dec, tr, ti, &mut w)?;
            w.flush()?;
            drop(w);
            write_manifest(&mut outputs, &manifest_path(path), "spectrum", started, summary.clone())?;
            outputs.keep = true;
        }
    }
    eprintln!("{summary}");
    Ok(())
}

fn steady(model: &ModelArgs, eta: f64, seed: u64, grid: usize, out_dir: &Path) -> Result<()> {
    let started = unix_now();
    if !(eta.is_finite() && eta >= 0.0) {
        bail!("eta must be finite and nonnegative, got {eta}");
    }
    let cfg = model.config()?;
    let preset = cfg.build()?;
    let plan = SolverPlan::new(preset.generator.clone())?;
    let draw = perturbation_for(&preset.spec, seed)?;
    let (state, solver) = plan.solve(&draw.generator, eta)?;
    let SteadyState::Unique { rho, hermiticity_defect, min_eigenvalue, .. } = state else {
        bail!("steady state is not unique (multiplicity {})", state.multiplicity());
    };
    let opts = AnalysisOptions { grid, ..AnalysisOptions::default() };
    let analysis = analyze_state(&rho, &preset.spec, &opts, &mut chi_rng(seed, eta))?;
    let mut outputs = Outputs::new();
    let mut w = outputs.create(&out_dir.join("rho.csv"))?;
    write_operator_csv(&rho, &mut w)?;
    w.flush()?;
    let mut w = outputs.create(&out_dir.join("sd.csv"))?;
    write_reduced_csv(&analysis.reduced, grid, &mut w)?;
    w.flush()?;
    drop(w);
    let summary = json!({
        "model": cfg,
        "eta": eta,
        "seed": seed,
        "solver": solver.as_str(),
        "s_max": analysis.measure.s_max,
        "argmax": analysis.measure.argmax,
        "hermiticity_defect": hermiticity_defect,
        "min_eigenvalue": min_eigenvalue,
        "perturbation": draw.manifest(seed),
    });
    write_manifest(&mut outputs, &out_dir.join("manifest.json"), "steady", started, summary)?;
    outputs.keep = true;
    println!(
        "{}",
        json!({ "s_max": analysis.measure.s_max, "argmax": analysis.measure.argmax, "solver": solver.as_str() })
    );
    Ok(())
}

fn phase_dist(rho_path: &Path, spins: &[f64], grid: usize, out: &Path) -> Result<()> {
    let started = unix_now();
    let spec = SpinSpec::new(spins.iter().map(|&s| Spin::new(s)).collect::<synclab::Result<_>>()?)?;
    let file = File::open(rho_path).with_context(|| format!("cannot open {}", rho_path.display()))?;
    let rho = read_operator_csv(io::BufReader::new(file))?;
    if rho.dim() != spec.dim() {
        bail!("operator dimension {} does not match spins (dimension {})", rho.dim(), spec.dim());
    }
    let reduced = reduce_over_global_phase(&phase_distribution(&rho, &spec)?)?;
    let measure = sync_measure(&reduced, grid)?;
    let mut outputs = Outputs::new();
    let mut w = outputs.create(out)?;
    write_reduced_csv(&reduced, grid, &mut w)?;
    w.flush()?;
    drop(w);
    let summary = json!({ "spins": spins, "grid": grid, "s_max": measure.s_max, "argmax": measure.argmax });
    write_manifest(&mut outputs, &manifest_path(out), "phase-dist", started, summary.clone())?;
    outputs.keep = true;
    println!("{summary}");
    Ok(())
}

fn sweep(config: &Path, output_dir: Option<PathBuf>) -> Result<()> {
    let mut cfg = SweepConfig::load(config)?;
    if let Some(dir) = output_dir {
        cfg.sweep.output_dir = dir;
    }
    let outcome = run_sweep(&cfg)?;
    for r in &outcome.aggregate.rows {
        println!(
            "{}",
            json!({
                "eta": r.eta,
                "n_used": r.n_used,
                "mean_s_max": r.mean_s_max,
                "intervals": r.intervals,
                "ratio": r.ratio,
                "ratio_ci": r.ratio_ci,
            })
        );
    }
    eprintln!(
        "{} records ({} excluded) in {}",
        outcome.manifest.n_records,
        outcome.manifest.n_excluded,
        outcome.output_dir.display()
    );
    Ok(())
}

fn aggregate_cmd(inputs: &[PathBuf], output: Option<&Path>, bins: usize, resamples: usize) -> Result<()> {
    let started = unix_now();
    let mut records = Vec::new();
    for dir in inputs {
        let rec = File::open(dir.join(RECORDS_FILE)).with_context(|| format!("no records in {}", dir.display()))?;
        let chi = File::open(dir.join(CHI_FILE)).with_context(|| format!("no chi values in {}", dir.display()))?;
        records.extend(read_records(io::BufReader::new(rec), Some(io::BufReader::new(chi)))?);
    }
    let table = aggregate(&records, bins, resamples)?;
    let out = output.unwrap_or(&inputs[0]);
    fs::create_dir_all(out)?;
    write_atomic(&out.join(AGGREGATE_FILE), |w| write_aggregate_csv(&table, w))?;
    write_atomic(&out.join(HISTOGRAM_FILE), |w| write_histogram_csv(&table, w))?;
    let mut outputs = Outputs::new();
    let inputs: Vec<String> = inputs.iter().map(|p| p.display().to_string()).collect();
    let extra = json!({ "inputs": inputs, "model": table.model, "n_records": records.len(), "bins": bins, "resamples": resamples });
    write_manifest(&mut outputs, &out.join("aggregate_manifest.json"), "aggregate", started, extra)?;
    outputs.keep = true;
    for r in &table.rows {
        println!("{}", json!({ "eta": r.eta, "n_used": r.n_used, "mean_s_max": r.mean_s_max, "ratio": r.ratio }));
    }
    Ok(())
}

fn selftest() -> bool {
    let checks = synclab::selftest::run();
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    checks.iter().all(|c| c.passed)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Spectrum { model, out, tol_real, tol_imag } => spectrum(&model, out.as_deref(), tol_real, tol_imag)?,
        Command::Steady { model, eta, seed, grid, out_dir } => steady(&model, eta, seed, grid, &out_dir)?,
        Command::PhaseDist { rho, spins, grid, out } => phase_dist(&rho, &spins, grid, &out)?,
        Command::Sweep { config, output_dir } => sweep(&config, output_dir)?,
        Command::Aggregate { input, output, bins, resamples } => aggregate_cmd(&input, output.as_deref(), bins, resamples)?,
        Command::Selftest => return Ok(selftest()),
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
