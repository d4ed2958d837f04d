use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::learning::{drive_reservoir, learn_output_weights};
use crate::model::{step, TimeSeries};
use crate::reservoir::init_reservoir;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClueMode {
    #[default]
    None,
    /// A second input row carries the previous value `S(t − 1)`; the first
    /// sample has no predecessor and repeats itself.
    PreviousValue,
}

/// An integer sequence whose last element is to be predicted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PuzzleSeries {
    pub id: String,
    /// The whole sequence, including the expected last value.
    pub values: Vec<i64>,
    pub expected_last: i64,
    pub clue_mode: ClueMode,
}

impl PuzzleSeries {
    pub fn new(id: impl Into<String>, values: Vec<i64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::invalid(format!("puzzle needs at least 3 values, got {}", values.len())));
        }
        let expected_last = *values.last().expect("non-empty");
        Ok(Self { id: id.into(), values, expected_last, clue_mode: ClueMode::None })
    }

    pub fn with_clue(mut self, clue_mode: ClueMode) -> Self {
        self.clue_mode = clue_mode;
        self
    }

    /// All values except the last.
    pub fn inputs(&self) -> &[i64] {
        &self.values[..self.values.len() - 1]
    }

    fn training_series(&self) -> Result<TimeSeries> {
        let s: Vec<f64> = self.inputs().iter().map(|&v| v as f64).collect();
        let n = s.len();
        match self.clue_mode {
            ClueMode::None => TimeSeries::scalar(&s, 1.0),
            ClueMode::PreviousValue => {
                let data = DMatrix::from_fn(2, n, |r, t| if r == 0 { s[t] } else { s[t.saturating_sub(1)] });
                TimeSeries::new(data, 1.0)
            }
        }
    }
}

/// The four sequences used for the reference experiment.
pub fn reference_puzzles() -> Vec<PuzzleSeries> {
    [
        ("S8", vec![28, 33, 31, 36, 34, 39, 37, 42]),
        ("S9", vec![3, 6, 12, 24, 48, 96, 192, 384]),
        ("S15", vec![6, 9, 18, 21, 42, 45, 90, 93]),
        ("S19", vec![8, 12, 16, 20, 24, 28, 32, 36]),
    ]
    .into_iter()
    .map(|(id, v)| PuzzleSeries::new(id, v).expect("built-in puzzles are valid"))
    .collect()
}

/// Parses one puzzle per line: comma-separated integers, last one being the
/// answer. Blank lines and lines starting with `#` are skipped. An optional
/// `id:` prefix names the puzzle; otherwise it is called `L<line>`.
pub fn parse_puzzles(text: &str) -> Result<Vec<PuzzleSeries>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx as u64 + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, body) = match line.split_once(':') {
            Some((id, body)) => (id.trim().to_string(), body),
            None => (format!("L{line_no}"), line),
        };
        let values = body
            .split(',')
            .map(|tok| {
                tok.trim().parse::<i64>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("'{}' is not an integer", tok.trim()),
                })
            })
            .collect::<Result<Vec<i64>>>()?;
        let puzzle = PuzzleSeries::new(id, values).map_err(|e| Error::Parse { line: line_no, message: e.to_string() })?;
        out.push(puzzle);
    }
    Ok(out)
}

pub fn load_puzzles(path: impl AsRef<Path>) -> Result<Vec<PuzzleSeries>> {
    parse_puzzles(&std::fs::read_to_string(path)?)
}

/// Unrounded prediction of the last value for one reservoir draw.
///
/// The network learns from all but the last value, is driven by them, and
/// then runs one output-generating step.
pub fn predict_once(puzzle: &PuzzleSeries, n_res: usize, seed: u64) -> Result<f64> {
    let series = puzzle.training_series()?;
    let init = init_reservoir(series.dim(), n_res, seed)?;
    let model = learn_output_weights(&series, &init)?;
    let states = drive_reservoir(&series, &init)?;
    let last = states.states.column(states.len() - 1).into_owned();
    let next = step(&model, &last)?;
    Ok(next[0])
}

#[derive(Debug, Clone, PartialEq)]
pub struct PuzzlePrediction {
    pub id: String,
    pub clue_mode: ClueMode,
    pub expected: i64,
    /// Rounded answer → number of trials.
    pub histogram: BTreeMap<i64, usize>,
    /// Most frequent answer; ties go to the smaller value. `None` if every trial failed.
    pub plurality: Option<i64>,
    pub trials: usize,
    /// Trials whose prediction was not finite or raised a numerical error.
    pub failures: usize,
}

impl PuzzlePrediction {
    pub fn correct(&self) -> bool {
        self.plurality == Some(self.expected)
    }

    /// Fraction of all trials predicting the expected value.
    pub fn correct_rate(&self) -> f64 {
        *self.histogram.get(&self.expected).unwrap_or(&0) as f64 / self.trials as f64
    }
}

/// Histogram over `trials` reservoirs seeded `seed_base + i`; answers are
/// rounded to the nearest integer with ties away from zero.
pub fn predict_last(puzzle: &PuzzleSeries, n_res: usize, trials: usize, seed_base: u64) -> Result<PuzzlePrediction> {
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    if n_res == 0 {
        return Err(Error::invalid("need at least one reservoir neuron"));
    }
    let answers: Vec<Option<i64>> = (0..trials as u64)
        .map(|i| {
            predict_once(puzzle, n_res, seed_base.wrapping_add(i))
                .ok()
                .filter(|p| p.is_finite() && p.abs() < i64::MAX as f64)
                .map(|p| p.round() as i64)
        })
        .collect();
    Ok(summarize(puzzle, &answers))
}

pub(crate) fn summarize(puzzle: &PuzzleSeries, answers: &[Option<i64>]) -> PuzzlePrediction {
    let mut histogram = BTreeMap::new();
    let mut failures = 0;
    for a in answers {
        match a {
            Some(v) => *histogram.entry(*v).or_insert(0) += 1,
            None => failures += 1,
        }
    }
    // Ascending iteration: on equal counts the smaller answer is kept.
    let plurality = histogram
        .iter()
        .fold(None::<(i64, usize)>, |best, (&v, &c)| match best {
            Some((_, bc)) if bc >= c => best,
            _ => Some((v, c)),
        })
        .map(|(v, _)| v);
    PuzzlePrediction {
        id: puzzle.id.clone(),
        clue_mode: puzzle.clue_mode,
        expected: puzzle.expected_last,
        histogram,
        plurality,
        trials: answers.len(),
        failures,
    }
}
