//! Time series, networks and their simulation.
//!
//! A network with `N = d + n_res` neurons is a transition matrix
//!
//! ```text
//!     ┌  W_out          ┐   first d rows (input/output neurons)
//! W = │                 │
//!     └  W_in   W_res   ┘   reservoir rows
//! ```
//!
//! together with a start vector `x0` whose first `d` entries are the first
//! sample of the series. In output-generating mode every neuron follows
//! `x(t+1) = W · x(t)`, so the network state at step `t` is `Wᵗ · x0`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A `d`-dimensional series sampled at `t = k · τ`, `k = 0..=n`.
///
/// Column `k` is the sample `S(k)`; time is kept as the integer index and
/// `tau` only scales reported times and frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    data: DMatrix<f64>,
    tau: f64,
}

impl TimeSeries {
    pub fn new(data: DMatrix<f64>, tau: f64) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::invalid("a time series needs at least one dimension and one sample"));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::invalid(format!("time step must be positive, got {tau}")));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("time series contains non-finite values"));
        }
        Ok(Self { data, tau })
    }

    /// One-dimensional series from a slice of samples.
    pub fn scalar(values: &[f64], tau: f64) -> Result<Self> {
        Self::new(DMatrix::from_row_slice(1, values.len(), values), tau)
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_data(self) -> DMatrix<f64> {
        self.data
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    /// Number of samples, `n + 1`.
    pub fn len(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.data.ncols() == 0
    }

    pub fn sample(&self, k: usize) -> DVector<f64> {
        self.data.column(k).into_owned()
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.tau
    }

    /// The `len` samples starting at index `start`.
    pub fn window(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.len() || len == 0 {
            return Err(Error::invalid(format!(
                "window {start}..{} outside series of length {}",
                start + len,
                self.len()
            )));
        }
        Self::new(self.data.columns(start, len).into_owned(), self.tau)
    }
}

/// A predictive network: transition matrix, start vector and block layout.
#[derive(Debug, Clone, PartialEq)]
pub struct PrnnModel {
    pub w: DMatrix<f64>,
    pub x0: DVector<f64>,
    pub d: usize,
    pub n_res: usize,
    pub tau: f64,
}

impl PrnnModel {
    pub fn new(w: DMatrix<f64>, x0: DVector<f64>, d: usize, tau: f64) -> Result<Self> {
        let n = w.nrows();
        if !w.is_square() {
            return Err(Error::dims(format!("transition matrix is {}x{}", w.nrows(), w.ncols())));
        }
        if x0.len() != n {
            return Err(Error::dims(format!("start vector has {} entries, network has {n} neurons", x0.len())));
        }
        if d == 0 || d > n {
            return Err(Error::invalid(format!("input/output dimension {d} out of range for {n} neurons")));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::invalid(format!("time step must be positive, got {tau}")));
        }
        Ok(Self { w, x0, d, n_res: n - d, tau })
    }

    /// Total neuron count `N = d + n_res`.
    pub fn size(&self) -> usize {
        self.w.nrows()
    }

    /// Output weights: the first `d` rows of `W`.
    pub fn w_out(&self) -> DMatrix<f64> {
        self.w.rows(0, self.d).into_owned()
    }

    pub fn w_in(&self) -> DMatrix<f64> {
        self.w.view((self.d, 0), (self.n_res, self.d)).into_owned()
    }

    pub fn w_res(&self) -> DMatrix<f64> {
        self.w.view((self.d, self.d), (self.n_res, self.n_res)).into_owned()
    }

    /// True when no reservoir start entry is zero, which the start-vector
    /// rebasing of learned models relies on.
    pub fn reservoir_start_nonzero(&self) -> bool {
        self.x0.rows(self.d, self.n_res).iter().all(|&v| v != 0.0)
    }
}

/// Collected `[S(t); R(t)]` columns of a driven network.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSequence {
    pub states: DMatrix<f64>,
    pub d: usize,
}

impl StateSequence {
    pub fn len(&self) -> usize {
        self.states.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.states.ncols() == 0
    }

    /// Reservoir rows only.
    pub fn reservoir(&self) -> DMatrix<f64> {
        let n_res = self.states.nrows() - self.d;
        self.states.rows(self.d, n_res).into_owned()
    }
}

/// One synchronous update of all neurons: `W · state`.
pub fn step(model: &PrnnModel, state: &DVector<f64>) -> Result<DVector<f64>> {
    if state.len() != model.size() {
        return Err(Error::dims(format!(
            "state has {} entries, network has {} neurons",
            state.len(),
            model.size()
        )));
    }
    Ok(&model.w * state)
}

/// Output rows of `x0, W·x0, W²·x0, …` for `steps` time points.
pub fn trajectory(model: &PrnnModel, steps: usize) -> Result<TimeSeries> {
    if steps == 0 {
        return Err(Error::invalid("trajectory needs at least one step"));
    }
    let mut out = DMatrix::zeros(model.d, steps);
    let mut state = model.x0.clone();
    for k in 0..steps {
        out.column_mut(k).copy_from(&state.rows(0, model.d));
        if k + 1 < steps {
            state = step(model, &state)?;
        }
    }
    TimeSeries::new(out, model.tau)
}

/// Root mean square error over all `d · (n+1)` sample components.
pub fn nrmse(reference: &TimeSeries, predicted: &TimeSeries) -> Result<f64> {
    nrmse_matrix(reference.data(), predicted.data())
}

pub(crate) fn nrmse_matrix(reference: &DMatrix<f64>, predicted: &DMatrix<f64>) -> Result<f64> {
    if reference.shape() != predicted.shape() {
        return Err(Error::dims(format!(
            "series shapes differ: {:?} vs {:?}",
            reference.shape(),
            predicted.shape()
        )));
    }
    let count = reference.len() as f64;
    let sum: f64 = reference
        .iter()
        .zip(predicted.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok((sum / count).sqrt())
}
