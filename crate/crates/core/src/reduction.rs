//! Network size reduction.
//!
//! A network in real Jordan form is a sum of independent block contributions
//! `A_b · J_bᵗ · y_b`. Reduction ranks the blocks by the replay error that
//! results from removing each one and greedily drops blocks as long as the
//! replay error of what remains stays within a budget derived from `theta`.
//! Blocks are dropped whole, so a conjugate pair always leaves as a unit.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{nrmse_matrix, TimeSeries};
use crate::spectral::{JordanForm, RealJordanBlock};

/// Square sparse matrix in coordinate form, rows sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseMatrix {
    pub fn from_triplets(n: usize, mut entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        if let Some(&(i, j, _)) = entries.iter().find(|&&(i, j, _)| i >= n || j >= n) {
            return Err(Error::dims(format!("entry ({i}, {j}) outside a {n}x{n} matrix")));
        }
        entries.retain(|e| e.2 != 0.0);
        entries.sort_by_key(|e| (e.0, e.1));
        Ok(Self { n, entries })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn triplets(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        for &(i, j, v) in &self.entries {
            out[i] += v * x[j];
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for &(i, j, v) in &self.entries {
            m[(i, j)] = v;
        }
        m
    }
}

/// Reduced network `A′ · (J′)ᵗ · y′`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedModel {
    pub a: DMatrix<f64>,
    pub j: SparseMatrix,
    pub y: DVector<f64>,
    pub tau: f64,
    /// Original block id of every retained block.
    pub block_index: Vec<usize>,
    pub blocks: Vec<RealJordanBlock>,
}

impl ReducedModel {
    /// Assembles a reduced model; `J′` is built from the block list.
    pub fn new(
        a: DMatrix<f64>,
        blocks: Vec<RealJordanBlock>,
        y: DVector<f64>,
        tau: f64,
        block_index: Vec<usize>,
    ) -> Result<Self> {
        let width: usize = blocks.iter().map(|b| b.width()).sum();
        if blocks.is_empty() {
            return Err(Error::EmptyReduction);
        }
        if a.ncols() != width || y.len() != width || a.nrows() == 0 {
            return Err(Error::dims(format!(
                "blocks have total width {width}, A is {}x{}, y has {} entries",
                a.nrows(),
                a.ncols(),
                y.len()
            )));
        }
        if block_index.len() != blocks.len() {
            return Err(Error::dims("one original index per retained block required"));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::invalid(format!("time step must be positive, got {tau}")));
        }
        let mut triplets = Vec::new();
        let mut off = 0;
        for b in &blocks {
            triplets.extend(b.entries().into_iter().map(|(i, j, v)| (off + i, off + j, v)));
            off += b.width();
        }
        let j = SparseMatrix::from_triplets(width, triplets)?;
        Ok(Self { a, j, y, tau, block_index, blocks })
    }

    /// Neuron count `N′`.
    pub fn width(&self) -> usize {
        self.y.len()
    }

    pub fn d(&self) -> usize {
        self.a.nrows()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentError {
    pub block: usize,
    pub error: f64,
    /// Frobenius norm of the block's columns of `A`.
    pub norm_v: f64,
    pub modulus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StoppingRule {
    /// Drop the cheapest block repeatedly while the replay error stays within
    /// `baseline + (1 − θ) · Σ single errors`.
    #[default]
    Greedy,
    /// Rank the single errors once and drop the smallest ones while their
    /// cumulative sum stays within `(1 − θ) · Σ single errors`.
    CumulativeFraction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorMeasure {
    /// Replay error of the model with the block removed.
    #[default]
    LeaveOneOut,
    /// Root mean square of the block's own contribution.
    Standalone,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReduceOptions {
    pub theta: f64,
    pub rule: StoppingRule,
    pub measure: ErrorMeasure,
    /// Re-solve `A′` by least squares on the retained blocks.
    pub refit: bool,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        Self { theta: 0.99, rule: StoppingRule::Greedy, measure: ErrorMeasure::LeaveOneOut, refit: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionReport {
    /// Replay error of the unreduced form.
    pub baseline_error: f64,
    /// Replay error of the returned model.
    pub final_error: f64,
    pub budget: f64,
    /// Original ids of the dropped blocks, in drop order.
    pub dropped: Vec<usize>,
    pub errors: Vec<ComponentError>,
}

struct Contributions {
    form: JordanForm,
    parts: Vec<DMatrix<f64>>,
    total: DMatrix<f64>,
}

fn contributions(form: &JordanForm, series: &TimeSeries) -> Result<Contributions> {
    let d = series.dim();
    if form.rows() < d {
        return Err(Error::dims(format!("form has {} rows, series has {d} dimensions", form.rows())));
    }
    let form = if form.rows() == d { form.clone() } else { form.output_rows(d)? };
    let steps = series.len();
    let parts: Vec<DMatrix<f64>> = (0..form.blocks.len()).map(|b| form.contribution(b, steps)).collect();
    let mut total = DMatrix::zeros(d, steps);
    for p in &parts {
        total += p;
    }
    Ok(Contributions { form, parts, total })
}

fn rms(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        0.0
    } else {
        (m.norm_squared() / m.len() as f64).sqrt()
    }
}

fn single_errors(c: &Contributions, series: &TimeSeries, measure: ErrorMeasure) -> Result<Vec<ComponentError>> {
    let offsets = c.form.offsets();
    c.parts
        .iter()
        .enumerate()
        .map(|(b, part)| {
            let error = match measure {
                ErrorMeasure::LeaveOneOut => nrmse_matrix(series.data(), &(&c.total - part))?,
                ErrorMeasure::Standalone => rms(part),
            };
            let block = &c.form.blocks[b];
            Ok(ComponentError {
                block: b,
                error,
                norm_v: c.form.a.columns(offsets[b], block.width()).norm(),
                modulus: block.lambda.norm(),
            })
        })
        .collect()
}

/// Leave-one-out replay error of every block over the series' horizon.
pub fn component_errors(form: &JordanForm, series: &TimeSeries) -> Result<Vec<ComponentError>> {
    component_errors_with(form, series, ErrorMeasure::LeaveOneOut)
}

pub fn component_errors_with(
    form: &JordanForm,
    series: &TimeSeries,
    measure: ErrorMeasure,
) -> Result<Vec<ComponentError>> {
    let c = contributions(form, series)?;
    single_errors(&c, series, measure)
}

/// Reduces with the default greedy rule and leave-one-out errors.
pub fn reduce(form: &JordanForm, series: &TimeSeries, theta: f64) -> Result<ReducedModel> {
    let opts = ReduceOptions { theta, ..ReduceOptions::default() };
    reduce_with(form, series, &opts).map(|(m, _)| m)
}

pub fn reduce_with(form: &JordanForm, series: &TimeSeries, opts: &ReduceOptions) -> Result<(ReducedModel, ReductionReport)> {
    if !(opts.theta > 0.0 && opts.theta <= 1.0) {
        return Err(Error::invalid(format!("theta must lie in (0, 1], got {}", opts.theta)));
    }
    let c = contributions(form, series)?;
    let s = series.data();
    let all: Vec<usize> = (0..c.parts.len()).collect();
    // Errors of returned models are measured on their own replay so that the
    // unreduced baseline and every candidate share one evaluation path.
    let replay_error = |m: &ReducedModel| crate::model::nrmse(series, &reduced_trajectory(m, series.len())?);
    let baseline_error = replay_error(&assemble(&c, &all, series, false)?)?;
    let errors = single_errors(&c, series, opts.measure)?;
    let total_single: f64 = errors.iter().map(|e| e.error).sum();
    let slack = (1.0 - opts.theta) * total_single;

    let mut retained = all;
    let mut dropped = Vec::new();
    let budget;
    match opts.rule {
        StoppingRule::Greedy => {
            budget = baseline_error + slack;
            let mut current = c.total.clone();
            while !retained.is_empty() {
                let mut best: Option<(usize, f64)> = None;
                for (pos, &b) in retained.iter().enumerate() {
                    let err = nrmse_matrix(s, &(&current - &c.parts[b]))?;
                    if best.is_none_or(|(_, e)| err < e) {
                        best = Some((pos, err));
                    }
                }
                let (pos, err) = best.expect("retained is non-empty");
                if err > budget {
                    break;
                }
                let b = retained.remove(pos);
                current -= &c.parts[b];
                dropped.push(b);
            }
        }
        StoppingRule::CumulativeFraction => {
            budget = slack;
            let mut order: Vec<&ComponentError> = errors.iter().collect();
            order.sort_by(|a, b| a.error.total_cmp(&b.error).then(a.block.cmp(&b.block)));
            let mut cumulative = 0.0;
            for e in order {
                if cumulative + e.error > budget {
                    break;
                }
                cumulative += e.error;
                dropped.push(e.block);
            }
            retained.retain(|b| !dropped.contains(b));
        }
    }
    if retained.is_empty() {
        return Err(Error::EmptyReduction);
    }

    let mut model = assemble(&c, &retained, series, opts.refit)?;
    let mut final_error = replay_error(&model)?;
    if opts.rule == StoppingRule::Greedy {
        // Selection sums per-block contributions; the replay can differ from
        // that sum by rounding, so blocks are restored until it fits.
        while final_error > budget {
            let Some(b) = dropped.pop() else { break };
            let pos = retained.partition_point(|&r| r < b);
            retained.insert(pos, b);
            model = assemble(&c, &retained, series, opts.refit)?;
            final_error = replay_error(&model)?;
        }
    }
    let report = ReductionReport { baseline_error, final_error, budget, dropped, errors };
    Ok((model, report))
}

fn assemble(c: &Contributions, retained: &[usize], series: &TimeSeries, refit: bool) -> Result<ReducedModel> {
    let offsets = c.form.offsets();
    let blocks: Vec<RealJordanBlock> = retained.iter().map(|&b| c.form.blocks[b]).collect();
    let width: usize = blocks.iter().map(|b| b.width()).sum();
    let mut a = DMatrix::zeros(series.dim(), width);
    let mut y = DVector::zeros(width);
    let mut off = 0;
    for &b in retained {
        let w = c.form.blocks[b].width();
        a.columns_mut(off, w).copy_from(&c.form.a.columns(offsets[b], w));
        y.rows_mut(off, w).copy_from(&c.form.y.rows(offsets[b], w));
        off += w;
    }
    if refit {
        let steps = series.len();
        let mut states = DMatrix::zeros(width, steps);
        let mut off = 0;
        for &b in retained {
            let w = c.form.blocks[b].width();
            states.rows_mut(off, w).copy_from(&c.form.block_states(b, steps));
            off += w;
        }
        a = linalg::min_norm_solve(&states, series.data(), 0.0)?.solution;
    }
    ReducedModel::new(a, blocks, y, series.tau(), retained.to_vec())
}

/// `A′ · (J′)ᵗ · y′` for `t = 0..steps`.
pub fn reduced_trajectory(model: &ReducedModel, steps: usize) -> Result<TimeSeries> {
    if steps == 0 {
        return Err(Error::invalid("trajectory needs at least one step"));
    }
    let mut out = DMatrix::zeros(model.d(), steps);
    let mut state = model.y.clone();
    for t in 0..steps {
        out.column_mut(t).copy_from(&(&model.a * &state));
        if t + 1 < steps {
            state = model.j.mul_vec(&state);
        }
    }
    TimeSeries::new(out, model.tau)
}
