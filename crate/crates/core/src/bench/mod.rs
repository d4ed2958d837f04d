//! Benchmark signals, number puzzles and seeded multi-trial experiments.
//!
//! Every trial `i` of an experiment uses the seed `seed_base + i`, trials run
//! in parallel on a rayon pool, and reports list them in seed order, so a
//! report is a pure function of its [`TrialConfig`].

mod data;
mod puzzles;
mod signals;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

pub use data::{load_trajectory_csv, parse_trajectory_csv, subsample};
pub use puzzles::{
    load_puzzles, reference_puzzles, parse_puzzles, predict_last, predict_once, ClueMode, PuzzlePrediction, PuzzleSeries,
};
pub use signals::{
    mso, sample_function, synthetic_trajectory, CustomFn, FunctionKind, TrajectoryConfig, MSO_FREQUENCIES,
};

use crate::error::{Error, Result};
use crate::learning::learn_output_weights;
use crate::model::{nrmse, trajectory, TimeSeries};
use crate::reduction::{reduce_with, reduced_trajectory, ReduceOptions, ReducedModel};
use crate::reservoir::init_reservoir;
use crate::spectral::{real_jordan_model, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Eight superimposed oscillators, evaluated over 300 steps.
    Mso8,
    /// `4t(1 − t)` on `[0, 1]`, minimal size 3.
    Parabola,
    /// `sin(πt)` on `[0, 1]`, minimal size 2.
    Sinusoid,
    /// Last-element prediction for the built-in number puzzles.
    Puzzles,
    /// Synthetic 4-dimensional trajectories of 600 points.
    Trajectory,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::Mso8, Preset::Parabola, Preset::Sinusoid, Preset::Puzzles, Preset::Trajectory];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Mso8 => "mso8",
            Preset::Parabola => "parabola",
            Preset::Sinusoid => "sinusoid",
            Preset::Puzzles => "puzzles",
            Preset::Trajectory => "trajectory",
        }
    }

    /// Human-readable success predicate.
    pub fn predicate(self) -> &'static str {
        match self {
            Preset::Mso8 => "reduced size = 16",
            Preset::Parabola => "reduced size = 3",
            Preset::Sinusoid => "reduced size = 2",
            Preset::Puzzles => "every puzzle answered correctly",
            Preset::Trajectory => "replay NRMSE < 1, >= 10% neurons removed, reduced NRMSE <= 1",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown preset '{s}'")))
    }
}

/// Attempts per trajectory trial before giving up on a replay NRMSE below 1.
pub const TRAJECTORY_ATTEMPTS: usize = 5;

/// Evaluation horizon of the MSO preset.
pub const MSO_EVAL_STEPS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub preset: Preset,
    pub trials: usize,
    pub seed_base: u64,
    pub n_res: usize,
    /// Reduction settings; `reduce.theta` is the precision threshold.
    pub reduce: ReduceOptions,
    /// Eigenvalue clustering tolerance for the Jordan form.
    pub jordan_tol: f64,
    /// Worker threads; `None` lets rayon decide.
    pub threads: Option<usize>,
}

impl TrialConfig {
    /// Defaults of a preset: reservoir size, threshold and trial count.
    pub fn preset(preset: Preset) -> Self {
        let (n_res, theta, trials) = match preset {
            Preset::Mso8 => (200, 0.99, 20),
            Preset::Parabola | Preset::Sinusoid => (30, 0.99, 50),
            Preset::Puzzles => (4, 0.99, 500),
            Preset::Trajectory => (200, 0.999, 10),
        };
        Self {
            preset,
            trials,
            seed_base: 0,
            n_res,
            reduce: ReduceOptions { theta, ..ReduceOptions::default() },
            jordan_tol: DEFAULT_TOL,
            threads: None,
        }
    }
}

/// Outcome of one completed trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub seed: u64,
    /// Neurons of the learned network, `d + n_res`.
    pub full_size: usize,
    pub reduced_size: Option<usize>,
    /// Replay error of the learned (unreduced) network on its training series.
    pub train_nrmse: f64,
    /// Replay error of the reduced network over the evaluation horizon.
    pub reduced_nrmse: Option<f64>,
    /// Non-zeros of the reduced Jordan matrix.
    pub jordan_nnz: Option<usize>,
    pub attempts: usize,
    pub success: bool,
    /// Rounded puzzle answers (puzzle preset only), one per [`puzzle_variants`] entry.
    pub answers: Vec<Option<i64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialFailure {
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub preset: Preset,
    /// Learning path used by the preset.
    pub learning: &'static str,
    pub trials: usize,
    pub seed_base: u64,
    pub records: Vec<TrialRecord>,
    pub failures: Vec<TrialFailure>,
    pub median_train_nrmse: Option<f64>,
    pub median_reduced_nrmse: Option<f64>,
    pub median_reduced_size: Option<f64>,
    /// Successful trials over all trials, failures counting as unsuccessful.
    pub success_rate: f64,
    /// Per-variant histograms (puzzle preset only).
    pub puzzles: Vec<PuzzlePrediction>,
}

/// Median of the values; the mean of the middle two for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// The puzzle variants of the puzzle preset: every built-in puzzle with and
/// without the previous-value clue.
pub fn puzzle_variants() -> Vec<PuzzleSeries> {
    reference_puzzles()
        .into_iter()
        .flat_map(|p| [p.clone(), p.with_clue(ClueMode::PreviousValue)])
        .collect()
}

fn variant_label(p: &PuzzleSeries) -> String {
    match p.clue_mode {
        ClueMode::None => p.id.clone(),
        ClueMode::PreviousValue => format!("{}+clue", p.id),
    }
}

fn learn_and_reduce(
    series: &TimeSeries,
    n_res: usize,
    seed: u64,
    cfg: &TrialConfig,
) -> Result<(f64, crate::model::PrnnModel, ReducedModel)> {
    let init = init_reservoir(series.dim(), n_res, seed)?;
    let model = learn_output_weights(series, &init)?;
    let train = nrmse(series, &trajectory(&model, series.len())?)?;
    if !train.is_finite() {
        return Err(Error::Numerical("replay diverged".into()));
    }
    let form = real_jordan_model(&model, cfg.jordan_tol)?;
    let (reduced, _) = reduce_with(&form, series, &cfg.reduce)?;
    Ok((train, model, reduced))
}

/// Runs one trial of `cfg.preset` with the given seed and returns the
/// record together with the reduced network, if the preset reduces.
pub fn run_single(cfg: &TrialConfig, seed: u64) -> Result<(TrialRecord, Option<ReducedModel>)> {
    let mut record = TrialRecord {
        seed,
        full_size: 0,
        reduced_size: None,
        train_nrmse: f64::NAN,
        reduced_nrmse: None,
        jordan_nnz: None,
        attempts: 1,
        success: false,
        answers: Vec::new(),
    };
    let reduced = match cfg.preset {
        Preset::Mso8 | Preset::Parabola | Preset::Sinusoid => {
            let (series, reference, target) = match cfg.preset {
                Preset::Mso8 => (mso(8, cfg.n_res)?, mso(8, MSO_EVAL_STEPS)?, 16),
                Preset::Parabola => {
                    let s = sample_function(&FunctionKind::Parabola4t, 0.01, 101)?;
                    (s.clone(), s, 3)
                }
                _ => {
                    let s = sample_function(&FunctionKind::SinusoidPi, 0.01, 101)?;
                    (s.clone(), s, 2)
                }
            };
            let (train, model, reduced) = learn_and_reduce(&series, cfg.n_res, seed, cfg)?;
            record.full_size = model.size();
            record.train_nrmse = train;
            record.reduced_nrmse = Some(nrmse(&reference, &reduced_trajectory(&reduced, reference.len())?)?);
            record.success = reduced.width() == target;
            Some(reduced)
        }
        Preset::Trajectory => {
            let series = synthetic_trajectory(&TrajectoryConfig::default(), seed)?;
            let mut best = None;
            for attempt in 0..TRAJECTORY_ATTEMPTS {
                let res_seed = seed.wrapping_add(((attempt as u64) + 1) << 32);
                record.attempts = attempt + 1;
                match learn_and_reduce(&series, cfg.n_res, res_seed, cfg) {
                    Ok(out) if out.0 < 1.0 => {
                        best = Some(out);
                        break;
                    }
                    Ok(out) => best = Some(out),
                    Err(e) if attempt + 1 == TRAJECTORY_ATTEMPTS && best.is_none() => return Err(e),
                    Err(_) => {}
                }
            }
            let (train, model, reduced) = best.expect("at least one attempt succeeded");
            let reduced_err = nrmse(&series, &reduced_trajectory(&reduced, series.len())?)?;
            let removal = 1.0 - reduced.width() as f64 / model.size() as f64;
            record.full_size = model.size();
            record.train_nrmse = train;
            record.reduced_nrmse = Some(reduced_err);
            record.success = train < 1.0 && removal >= 0.1 && reduced_err <= 1.0;
            Some(reduced)
        }
        Preset::Puzzles => {
            let variants = puzzle_variants();
            record.full_size = 1 + cfg.n_res;
            record.answers = variants
                .iter()
                .map(|p| {
                    predict_once(p, cfg.n_res, seed)
                        .ok()
                        .filter(|v| v.is_finite() && v.abs() < i64::MAX as f64)
                        .map(|v| v.round() as i64)
                })
                .collect();
            record.success = variants.iter().zip(&record.answers).all(|(p, a)| *a == Some(p.expected_last));
            record.train_nrmse = 0.0;
            None
        }
    };
    if let Some(r) = &reduced {
        record.reduced_size = Some(r.width());
        record.jordan_nnz = Some(r.j.nnz());
    }
    Ok((record, reduced))
}

/// Runs `cfg.trials` trials and aggregates them.
pub fn run_trials(cfg: &TrialConfig) -> Result<TrialReport> {
    if cfg.trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    if cfg.n_res == 0 {
        return Err(Error::invalid("need at least one reservoir neuron"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::invalid(format!("cannot build thread pool: {e}")))?;
    let outcomes: Vec<(u64, Result<TrialRecord>)> = pool.install(|| {
        (0..cfg.trials as u64)
            .into_par_iter()
            .map(|i| {
                let seed = cfg.seed_base.wrapping_add(i);
                (seed, run_single(cfg, seed).map(|(r, _)| r))
            })
            .collect()
    });

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (seed, outcome) in outcomes {
        match outcome {
            Ok(r) => records.push(r),
            Err(e) => failures.push(TrialFailure { seed, message: e.to_string() }),
        }
    }
    let train: Vec<f64> = records.iter().map(|r| r.train_nrmse).collect();
    let reduced: Vec<f64> = records.iter().filter_map(|r| r.reduced_nrmse).collect();
    let sizes: Vec<f64> = records.iter().filter_map(|r| r.reduced_size.map(|s| s as f64)).collect();
    let successes = records.iter().filter(|r| r.success).count();

    let puzzles = if cfg.preset == Preset::Puzzles {
        puzzle_variants()
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let answers: Vec<Option<i64>> = records
                    .iter()
                    .map(|r| r.answers[k])
                    .chain(failures.iter().map(|_| None))
                    .collect();
                puzzles::summarize(p, &answers)
            })
            .collect()
    } else {
        Vec::new()
    };

    Ok(TrialReport {
        preset: cfg.preset,
        learning: "readout",
        trials: cfg.trials,
        seed_base: cfg.seed_base,
        median_train_nrmse: median(&train),
        median_reduced_nrmse: median(&reduced),
        median_reduced_size: median(&sizes),
        success_rate: successes as f64 / cfg.trials as f64,
        records,
        failures,
        puzzles,
    })
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl TrialReport {
    /// One CSV row per trial (completed or failed) in seed order.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let labels: Vec<String> = if self.preset == Preset::Puzzles {
            puzzle_variants().iter().map(variant_label).collect()
        } else {
            Vec::new()
        };
        let mut header: Vec<String> = [
            "seed",
            "status",
            "full_size",
            "reduced_size",
            "train_nrmse",
            "reduced_nrmse",
            "jordan_nnz",
            "attempts",
            "success",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        header.extend(labels.iter().cloned());
        w.write_record(&header).map_err(csv_err)?;

        let mut rows: Vec<(u64, Vec<String>)> = self
            .records
            .iter()
            .map(|r| {
                let mut row = vec![
                    r.seed.to_string(),
                    "ok".to_string(),
                    r.full_size.to_string(),
                    opt(r.reduced_size),
                    format!("{:e}", r.train_nrmse),
                    opt(r.reduced_nrmse.map(|v| format!("{v:e}"))),
                    opt(r.jordan_nnz),
                    r.attempts.to_string(),
                    r.success.to_string(),
                ];
                row.extend(r.answers.iter().map(|a| opt(*a)));
                (r.seed, row)
            })
            .collect();
        for f in &self.failures {
            let mut row = vec![f.seed.to_string(), format!("failed: {}", f.message)];
            row.resize(header.len(), String::new());
            rows.push((f.seed, row));
        }
        rows.sort_by_key(|(seed, _)| seed.wrapping_sub(self.seed_base));
        for (_, row) in rows {
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Multi-line human summary.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "preset {} ({} learning): {} trials from seed {}, {} failed\n",
            self.preset,
            self.learning,
            self.trials,
            self.seed_base,
            self.failures.len()
        );
        if let Some(v) = self.median_reduced_size {
            let full = self.records.first().map_or(0, |r| r.full_size);
            s += &format!("median size: {full} -> {v}\n");
        }
        if self.preset != Preset::Puzzles {
            s += &format!("median training NRMSE: {}\n", opt(self.median_train_nrmse.map(|v| format!("{v:.3e}"))));
            s += &format!("median reduced NRMSE: {}\n", opt(self.median_reduced_nrmse.map(|v| format!("{v:.3e}"))));
        }
        for p in &self.puzzles {
            let label = match p.clue_mode {
                ClueMode::None => p.id.clone(),
                ClueMode::PreviousValue => format!("{}+clue", p.id),
            };
            s += &format!(
                "{label:>9}: plurality {} (expected {}), correct {:.1}%\n",
                opt(p.plurality),
                p.expected,
                100.0 * p.correct_rate()
            );
        }
        s += &format!("success ({}): {:.1}%\n", self.preset.predicate(), 100.0 * self.success_rate);
        s
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn preset_names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!("nope".parse::<Preset>().is_err());
    }

    #[test]
    fn small_sinusoid_run_is_deterministic() {
        let cfg = TrialConfig { trials: 4, threads: Some(2), ..TrialConfig::preset(Preset::Sinusoid) };
        let a = run_trials(&cfg).unwrap();
        let b = run_trials(&TrialConfig { threads: Some(1), ..cfg.clone() }).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.records.iter().map(|r| r.seed).collect::<Vec<_>>(), vec![0, 1, 2, 3]);
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(a.summary().contains("success"));
    }

    #[test]
    fn puzzle_preset_records_answers() {
        let cfg = TrialConfig { trials: 3, ..TrialConfig::preset(Preset::Puzzles) };
        let r = run_trials(&cfg).unwrap();
        assert_eq!(r.puzzles.len(), 8);
        assert!(r.records.iter().all(|x| x.answers.len() == 8));
        assert_eq!(r.puzzles[2].plurality, Some(384));
    }
}
