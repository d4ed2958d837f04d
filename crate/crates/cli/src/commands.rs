use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use nalgebra::{DMatrix, DVector};

use prnn::bench::{run_trials, Preset, TrialConfig};
use prnn::learning::{learn_full_transition_with, learn_output_weights_with, LearnOptions};
use prnn::longterm::{classification_note, classify_longterm, ellipse_with_tol, limit_point, oscillation_points, Classification, UNIT_TOL};
use prnn::model::{nrmse, trajectory};
use prnn::reduction::{reduce_with, reduced_trajectory, ErrorMeasure, ReduceOptions, StoppingRule};
use prnn::reservoir::init_reservoir;
use prnn::spectral::{eigendecompose, evaluate_fractional, real_jordan_model, EigenDecomposition, DEFAULT_TOL};
use prnn::Complex64;

use crate::error::{CliError, CliResult};
use crate::model_file::{LoadedModel, ModelFile, Provenance};
use crate::series::SeriesArgs;

const GENERATOR: &str = concat!("prnn ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Learn only the output rows; the reservoir stays random.
    Readout,
    /// Learn the whole transition matrix against a random state sequence.
    Full,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub series: SeriesArgs,
    /// Reservoir size.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub reservoir: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Mode::Readout)]
    pub mode: Mode,
    /// Tikhonov regularization weight (0 = minimum-norm least squares).
    #[arg(long, default_value_t = 0.0)]
    pub ridge: f64,
    #[arg(long, short)]
    pub output: PathBuf,
}

pub fn train(args: &TrainArgs, out: &mut dyn Write) -> CliResult<()> {
    if !(args.ridge.is_finite() && args.ridge >= 0.0) {
        return Err(CliError::usage(format!("--ridge must be non-negative, got {}", args.ridge)));
    }
    let loaded = args.series.load()?;
    let series = &loaded.series;
    let n_res = args.reservoir as usize;
    let opts = LearnOptions { ridge: args.ridge };
    let (model, report) = match args.mode {
        Mode::Readout => {
            let init = init_reservoir(series.dim(), n_res, args.seed)?;
            learn_output_weights_with(series, &init, opts)?
        }
        Mode::Full => learn_full_transition_with(series, n_res, args.seed, opts)?,
    };
    let error = nrmse(series, &trajectory(&model, series.len())?)?;
    let provenance = Provenance {
        generator: GENERATOR.into(),
        mode: match args.mode {
            Mode::Readout => "readout",
            Mode::Full => "full",
        }
        .into(),
        seed: Some(args.seed),
        source: loaded.source.clone(),
        train_points: series.len(),
        stride: loaded.stride,
        theta: None,
        parent_size: None,
    };
    ModelFile::from_full(&model, provenance).save(&args.output)?;
    writeln!(out, "series: {} ({} points, d = {}, tau = {})", loaded.source, series.len(), series.dim(), series.tau())?;
    writeln!(out, "network: {} neurons ({} input/output + {} reservoir)", model.size(), model.d, model.n_res)?;
    writeln!(out, "training NRMSE: {error:.3e}")?;
    writeln!(
        out,
        "effective rank: {} of {} unknowns per row ({} equations), residual {:.3e}",
        report.effective_rank, report.unknowns, report.equations, report.residual
    )?;
    writeln!(out, "wrote {}", args.output.display())?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Greedy,
    Cumulative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    LeaveOneOut,
    Standalone,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[arg(long, short)]
    pub model: PathBuf,
    /// Series to measure replay error on; defaults to the training source
    /// recorded in the model file.
    #[command(flatten)]
    pub series: SeriesArgs,
    /// Precision threshold in (0, 1].
    #[arg(long, default_value_t = 0.99)]
    pub theta: f64,
    #[arg(long, value_enum, default_value_t = RuleArg::Greedy)]
    pub rule: RuleArg,
    #[arg(long, value_enum, default_value_t = MeasureArg::LeaveOneOut)]
    pub measure: MeasureArg,
    /// Re-fit the output matrix on the retained blocks.
    #[arg(long)]
    pub refit: bool,
    /// Eigenvalue clustering tolerance.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub jordan_tol: f64,
    #[arg(long, short)]
    pub output: PathBuf,
}

pub fn reduce(args: &ReduceArgs, out: &mut dyn Write) -> CliResult<()> {
    if !(args.theta > 0.0 && args.theta <= 1.0) {
        return Err(CliError::usage(format!("--theta must lie in (0, 1], got {}", args.theta)));
    }
    if !(args.jordan_tol.is_finite() && args.jordan_tol > 0.0) {
        return Err(CliError::usage("--jordan-tol must be positive"));
    }
    let file = ModelFile::load(&args.model)?;
    let model = match file.to_model()? {
        LoadedModel::Full(m) => m,
        LoadedModel::Reduced(_) => {
            return Err(CliError::usage(format!("{} is already reduced", args.model.display())));
        }
    };
    let series_args = if args.series.is_empty() {
        let p = &file.provenance;
        SeriesArgs::from_source(&p.source, file.tau, p.train_points, p.stride)?
    } else {
        args.series.clone()
    };
    let loaded = series_args.load()?;
    if loaded.series.dim() != model.d {
        return Err(CliError::usage(format!(
            "series has {} dimensions, model has {}",
            loaded.series.dim(),
            model.d
        )));
    }
    let form = real_jordan_model(&model, args.jordan_tol)?;
    let opts = ReduceOptions {
        theta: args.theta,
        rule: match args.rule {
            RuleArg::Greedy => StoppingRule::Greedy,
            RuleArg::Cumulative => StoppingRule::CumulativeFraction,
        },
        measure: match args.measure {
            MeasureArg::LeaveOneOut => ErrorMeasure::LeaveOneOut,
            MeasureArg::Standalone => ErrorMeasure::Standalone,
        },
        refit: args.refit,
    };
    let (reduced, report) = reduce_with(&form, &loaded.series, &opts)?;
    let provenance = Provenance {
        mode: "reduced".into(),
        theta: Some(args.theta),
        parent_size: Some(model.size()),
        generator: GENERATOR.into(),
        ..file.provenance.clone()
    };
    ModelFile::from_reduced(&reduced, provenance).save(&args.output)?;
    writeln!(out, "size: {} -> {} neurons (reservoir {})", model.size(), reduced.width(), model.n_res)?;
    writeln!(out, "blocks: {} -> {} (condition of Jordan basis {:.3e})", form.blocks.len(), reduced.blocks.len(), form.condition)?;
    writeln!(out, "NRMSE: {:.3e} -> {:.3e} (budget {:.3e})", report.baseline_error, report.final_error, report.budget)?;
    writeln!(out, "non-zeros in J': {}", reduced.j.nnz())?;
    writeln!(out, "wrote {}", args.output.display())?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long, short)]
    pub model: PathBuf,
    /// Number of samples, starting at t = 0.
    #[arg(long, default_value_t = 100, conflicts_with = "fractional")]
    pub steps: usize,
    /// Evaluate on a real-valued time grid via the eigendecomposition and
    /// emit real and imaginary parts.
    #[arg(long, requires = "t_end")]
    pub fractional: bool,
    #[arg(long, default_value_t = 0.0)]
    pub t_start: f64,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Grid spacing; defaults to half the model's time step.
    #[arg(long)]
    pub t_step: Option<f64>,
    /// CSV destination; standard output if omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Dense `(W, x0, output rows)` of either model kind.
fn dense_system(model: &LoadedModel) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    match model {
        LoadedModel::Full(m) => (m.w.clone(), m.x0.clone(), DMatrix::identity(m.d, m.size())),
        LoadedModel::Reduced(r) => (r.j.to_dense(), r.y.clone(), r.a.clone()),
    }
}

fn tau_of(model: &LoadedModel) -> f64 {
    match model {
        LoadedModel::Full(m) => m.tau,
        LoadedModel::Reduced(r) => r.tau,
    }
}

/// Shortest round-trip decimal, in exponent form for very small or large magnitudes.
fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn write_output(dest: &Option<PathBuf>, text: &str, out: &mut dyn Write) -> CliResult<()> {
    match dest {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io_at(path, e)),
        None => out.write_all(text.as_bytes()).map_err(CliError::from),
    }
}

pub fn predict(args: &PredictArgs, out: &mut dyn Write) -> CliResult<()> {
    let model = ModelFile::load(&args.model)?.to_model()?;
    let tau = tau_of(&model);
    let mut csv = String::new();
    if args.fractional {
        let t_end = args.t_end.expect("clap enforces --t-end");
        let h = args.t_step.unwrap_or(tau / 2.0);
        if !(h.is_finite() && h > 0.0 && args.t_start.is_finite() && t_end.is_finite() && t_end >= args.t_start) {
            return Err(CliError::usage("need finite --t-start <= --t-end and a positive --t-step"));
        }
        let (w, x0, c) = dense_system(&model);
        let decomp = eigendecompose(&w, &x0)?;
        let c = c.map(|v| Complex64::new(v, 0.0));
        let d = c.nrows();
        csv += "t";
        for k in 0..d {
            write!(csv, ",re_s{k},im_s{k}").expect("writing to a string");
        }
        csv.push('\n');
        let count = ((t_end - args.t_start) / h + 1e-9).floor() as usize + 1;
        for i in 0..count {
            let t = args.t_start + i as f64 * h;
            let s = &c * evaluate_fractional(&decomp, t / tau)?;
            write!(csv, "{}", num(t)).expect("writing to a string");
            for z in s.iter() {
                write!(csv, ",{},{}", num(z.re), num(z.im)).expect("writing to a string");
            }
            csv.push('\n');
        }
    } else {
        if args.steps == 0 {
            return Err(CliError::usage("--steps must be at least 1"));
        }
        let ts = match &model {
            LoadedModel::Full(m) => trajectory(m, args.steps)?,
            LoadedModel::Reduced(r) => reduced_trajectory(r, args.steps)?,
        };
        csv += "t";
        for k in 0..ts.dim() {
            write!(csv, ",s{k}").expect("writing to a string");
        }
        csv.push('\n');
        for i in 0..ts.len() {
            write!(csv, "{}", num(ts.time(i))).expect("writing to a string");
            for v in ts.data().column(i).iter() {
                write!(csv, ",{}", num(*v)).expect("writing to a string");
            }
            csv.push('\n');
        }
    }
    write_output(&args.output, &csv, out)
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long, short)]
    pub model: PathBuf,
    /// Distance from the unit circle still counted as modulus 1.
    #[arg(long, default_value_t = UNIT_TOL)]
    pub tol: f64,
}

fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{:.6}", z.re)
    } else {
        format!("{:.6} {} {:.6}i", z.re, if z.im < 0.0 { '-' } else { '+' }, z.im.abs())
    }
}

fn format_vector(v: &DVector<f64>) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

fn describe(decomp: &EigenDecomposition, tau: f64, tol: f64, c: &DMatrix<f64>, out: &mut dyn Write) -> CliResult<()> {
    let class = classify_longterm(decomp, tol);
    writeln!(out, "classification: {class}")?;
    if let Some(note) = classification_note(decomp, tol) {
        writeln!(out, "note: {note}")?;
    }
    let project = |v: DVector<f64>| c * v;
    match class {
        Classification::Ellipse => {
            let an = ellipse_with_tol(decomp, tau, tol)?;
            let step = an.angle_per_step();
            writeln!(out, "omega*tau: {step:.9} ({:.6} pi)", step / PI)?;
            writeln!(out, "omega: {:.9}", an.omega)?;
            writeln!(out, "mu: {:.9}", an.mu)?;
            writeln!(out, "D_hat:")?;
            for r in 0..2 {
                writeln!(out, "  [{:.9}, {:.9}]", an.d_hat[(r, 0)], an.d_hat[(r, 1)])?;
            }
            writeln!(out, "x_hat: {}", format_vector(&an.x_hat))?;
        }
        Classification::Singularity => {
            if let Some(p) = limit_point(decomp) {
                writeln!(out, "limit point: {}", format_vector(&project(p)))?;
            }
        }
        Classification::Oscillation => {
            if let Some((p, q)) = oscillation_points(decomp) {
                writeln!(out, "alternates between: {} and {}", format_vector(&project(p)), format_vector(&project(q)))?;
            }
        }
        Classification::Other => {}
    }
    Ok(())
}

pub fn analyze(args: &AnalyzeArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    if !(args.tol.is_finite() && args.tol >= 0.0) {
        return Err(CliError::usage("--tol must be non-negative"));
    }
    let model = ModelFile::load(&args.model)?.to_model()?;
    let tau = tau_of(&model);
    let (w, x0, c) = dense_system(&model);
    let decomp = eigendecompose(&w, &x0)?;
    writeln!(out, "neurons: {}", w.nrows())?;
    writeln!(out, "spectral radius: {:.9}", decomp.spectral_radius())?;
    let shown: Vec<String> = decomp.lambdas.iter().take(6).map(|l| format_complex(*l)).collect();
    writeln!(
        out,
        "leading eigenvalues: {}{}",
        shown.join(", "),
        if decomp.len() > shown.len() { ", ..." } else { "" }
    )?;
    writeln!(out, "eigenbasis condition: {:.3e}", decomp.condition)?;
    if decomp.near_defective {
        writeln!(
            err,
            "diagnostic: the eigenbasis is near-defective (condition {:.3e}); the matrix has non-trivial Jordan \
             blocks, so eigenvector-based quantities are unreliable; use `reduce` for the Jordan form",
            decomp.condition
        )?;
        let class = classify_longterm(&decomp, args.tol);
        writeln!(out, "classification: {class} (eigenvalues only)")?;
        return Ok(());
    }
    describe(&decomp, tau, args.tol, &c, out)
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// mso8, parabola, sinusoid, puzzles or trajectory.
    #[arg(long)]
    pub preset: String,
    #[arg(long)]
    pub trials: Option<usize>,
    /// First trial seed; trial i uses seed + i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Override the preset's reservoir size.
    #[arg(long)]
    pub reservoir: Option<usize>,
    /// Override the preset's precision threshold.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Worker threads (also read from PRNN_THREADS).
    #[arg(long)]
    pub threads: Option<usize>,
    /// CSV destination; without it the CSV goes to standard output and the
    /// summary to standard error.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn env_threads() -> CliResult<Option<usize>> {
    match std::env::var("PRNN_THREADS") {
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| CliError::usage(format!("PRNN_THREADS must be a positive integer, got '{v}'"))),
        Err(_) => Ok(None),
    }
}

pub fn bench(args: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let preset: Preset = args.preset.parse().map_err(|e: prnn::Error| CliError::usage(e.to_string()))?;
    let mut cfg = TrialConfig::preset(preset);
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    cfg.seed_base = args.seed;
    if let Some(n) = args.reservoir {
        cfg.n_res = n;
    }
    if let Some(theta) = args.theta {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(CliError::usage(format!("--theta must lie in (0, 1], got {theta}")));
        }
        cfg.reduce.theta = theta;
    }
    cfg.threads = match args.threads {
        Some(0) => return Err(CliError::usage("--threads must be at least 1")),
        Some(n) => Some(n),
        None => env_threads()?,
    };
    let report = run_trials(&cfg)?;
    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    match &args.output {
        Some(path) => {
            write_file(path, &csv)?;
            out.write_all(report.summary().as_bytes())?;
            writeln!(out, "wrote {}", path.display())?;
        }
        None => {
            out.write_all(&csv)?;
            err.write_all(report.summary().as_bytes())?;
        }
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|e| CliError::io_at(path, e))
}
