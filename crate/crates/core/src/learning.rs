//! Learning network weights by solving linear systems.
//!
//! Two paths are provided:
//!
//! - **readout** ([`learn_output_weights`]): the series drives a fixed random
//!   reservoir and only the output rows `W_out` are regressed;
//! - **full transition** ([`learn_full_transition`]): a random reservoir state
//!   sequence is sampled and the whole matrix `W` is solved from `W·X = Y`.
//!   With at least [`required_reservoir_size`] reservoir neurons the system is
//!   consistent and the network replays every sample exactly.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{PrnnModel, StateSequence, TimeSeries};
use crate::reservoir::{standard_normal_matrix, ReservoirInit};

/// A linear regression `M · x ≈ y`, solved for `M`.
#[derive(Debug, Clone)]
pub struct RegressionProblem {
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
}

/// Least-squares solution with diagnostics.
#[derive(Debug, Clone)]
pub struct Solution {
    pub m: DMatrix<f64>,
    pub effective_rank: usize,
    /// `‖M·x − y‖_F`.
    pub residual: f64,
}

/// Knobs shared by both learning paths.
#[derive(Debug, Clone, Copy, Default)]
pub struct LearnOptions {
    /// Tikhonov weight; 0 selects the plain minimum-norm least-squares solution.
    pub ridge: f64,
}

/// Diagnostics of a fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitReport {
    pub effective_rank: usize,
    pub unknowns: usize,
    pub equations: usize,
    pub residual: f64,
}

/// Minimum-norm least-squares solution of `M · x = y`.
pub fn solve_linear(p: &RegressionProblem) -> Result<Solution> {
    solve_linear_with(p, 0.0)
}

pub fn solve_linear_with(p: &RegressionProblem, ridge: f64) -> Result<Solution> {
    if !(ridge.is_finite() && ridge >= 0.0) {
        return Err(Error::invalid(format!("ridge weight must be non-negative, got {ridge}")));
    }
    let ls = linalg::min_norm_solve(&p.x, &p.y, ridge)?;
    let residual = (&ls.solution * &p.x - &p.y).norm();
    Ok(Solution { m: ls.solution, effective_rank: ls.rank, residual })
}

/// Runs the series through the reservoir in input-receiving mode.
///
/// `R(0) = r0`, `R(t+1) = W_in·S(t) + W_res·R(t)`; column `t` of the result
/// stacks `S(t)` over `R(t)` for `t = 0..=n`.
pub fn drive_reservoir(series: &TimeSeries, init: &ReservoirInit) -> Result<StateSequence> {
    let d = series.dim();
    if init.d() != d {
        return Err(Error::dims(format!(
            "series has {d} dimensions, reservoir expects {}",
            init.d()
        )));
    }
    if series.len() < 2 {
        return Err(Error::invalid("driving needs at least two samples"));
    }
    let n_res = init.n_res();
    let steps = series.len();
    let mut states = DMatrix::zeros(d + n_res, steps);
    states.view_mut((0, 0), (d, steps)).copy_from(series.data());
    let mut r = init.r0.clone();
    for t in 0..steps {
        states.view_mut((d, t), (n_res, 1)).copy_from(&r);
        if t + 1 < steps {
            r = &init.w_in * series.data().column(t) + &init.w_res * &r;
        }
    }
    Ok(StateSequence { states, d })
}

/// Learns `W_out` from `Y_out = W_out · X` and assembles the full network.
pub fn learn_output_weights(series: &TimeSeries, init: &ReservoirInit) -> Result<PrnnModel> {
    learn_output_weights_with(series, init, LearnOptions::default()).map(|(m, _)| m)
}

pub fn learn_output_weights_with(
    series: &TimeSeries,
    init: &ReservoirInit,
    opts: LearnOptions,
) -> Result<(PrnnModel, FitReport)> {
    let seq = drive_reservoir(series, init)?;
    let d = series.dim();
    let n = series.len() - 1;
    let x = seq.states.columns(0, n).into_owned();
    let y = series.data().columns(1, n).into_owned();
    let sol = solve_linear_with(&RegressionProblem { x, y }, opts.ridge)?;

    let n_res = init.n_res();
    let size = d + n_res;
    let mut w = DMatrix::zeros(size, size);
    w.view_mut((0, 0), (d, size)).copy_from(&sol.m);
    w.view_mut((d, 0), (n_res, d)).copy_from(&init.w_in);
    w.view_mut((d, d), (n_res, n_res)).copy_from(&init.w_res);
    let mut x0 = DVector::zeros(size);
    x0.rows_mut(0, d).copy_from(&series.sample(0));
    x0.rows_mut(d, n_res).copy_from(&init.r0);

    let report = FitReport {
        effective_rank: sol.effective_rank,
        unknowns: size,
        equations: n,
        residual: sol.residual,
    };
    Ok((PrnnModel::new(w, x0, d, series.tau())?, report))
}

/// Smallest reservoir that guarantees an exact fit: `n − rank[S(0) … S(n−1)]`.
pub fn required_reservoir_size(series: &TimeSeries) -> usize {
    let n = series.len().saturating_sub(1);
    if n == 0 {
        return 0;
    }
    let head = series.data().columns(0, n).into_owned();
    n - linalg::numerical_rank(&head)
}

/// Learns the complete transition matrix from a sampled reservoir sequence.
///
/// The reservoir states `[R(0) … R(n)]` are i.i.d. standard normal, drawn
/// from a ChaCha8 stream seeded with `seed` in time-major order (all of
/// `R(0)`, then `R(1)`, …).
pub fn learn_full_transition(series: &TimeSeries, n_res: usize, seed: u64) -> Result<PrnnModel> {
    learn_full_transition_with(series, n_res, seed, LearnOptions::default()).map(|(m, _)| m)
}

pub fn learn_full_transition_with(
    series: &TimeSeries,
    n_res: usize,
    seed: u64,
    opts: LearnOptions,
) -> Result<(PrnnModel, FitReport)> {
    if series.len() < 2 {
        return Err(Error::invalid("learning needs at least two samples"));
    }
    if n_res == 0 {
        return Err(Error::invalid("full-transition learning needs at least one reservoir neuron"));
    }
    let d = series.dim();
    let n = series.len() - 1;
    let size = d + n_res;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Drawn as (n+1) × n_res row-major, i.e. one reservoir state after another.
    let r = standard_normal_matrix(&mut rng, n + 1, n_res).transpose();

    let mut states = DMatrix::zeros(size, n + 1);
    states.view_mut((0, 0), (d, n + 1)).copy_from(series.data());
    states.view_mut((d, 0), (n_res, n + 1)).copy_from(&r);
    let x = states.columns(0, n).into_owned();
    let y = states.columns(1, n).into_owned();
    let sol = solve_linear_with(&RegressionProblem { x, y }, opts.ridge)?;

    let x0 = states.column(0).into_owned();
    let report = FitReport {
        effective_rank: sol.effective_rank,
        unknowns: size,
        equations: n,
        residual: sol.residual,
    };
    Ok((PrnnModel::new(sol.m, x0, d, series.tau())?, report))
}
