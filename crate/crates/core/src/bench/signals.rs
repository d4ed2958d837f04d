use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::TimeSeries;

/// Angular frequencies of the multiple superimposed oscillators task.
pub const MSO_FREQUENCIES: [f64; 8] = [0.2, 0.311, 0.42, 0.51, 0.63, 0.74, 0.85, 0.97];

/// `S(t) = Σ_{k<n} sin(α_k · t)` for `t = 1..=steps` (time starts at 1).
pub fn mso(n: usize, steps: usize) -> Result<TimeSeries> {
    if !(1..=MSO_FREQUENCIES.len()).contains(&n) {
        return Err(Error::invalid(format!("MSO order must be between 1 and 8, got {n}")));
    }
    if steps == 0 {
        return Err(Error::invalid("MSO series needs at least one step"));
    }
    let values: Vec<f64> = (1..=steps)
        .map(|t| MSO_FREQUENCIES[..n].iter().map(|a| (a * t as f64).sin()).sum())
        .collect();
    TimeSeries::scalar(&values, 1.0)
}

/// A user function of time, e.g. parsed from an expression.
#[derive(Clone)]
pub struct CustomFn {
    pub name: String,
    pub f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for CustomFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomFn").field("name", &self.name).finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum FunctionKind {
    /// `4t(1 − t)`.
    Parabola4t,
    /// `sin(πt)`.
    SinusoidPi,
    /// `t²`.
    SquareT,
    Custom(CustomFn),
}

impl FunctionKind {
    pub fn custom(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        FunctionKind::Custom(CustomFn { name: name.into(), f: Arc::new(f) })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            FunctionKind::Parabola4t => 4.0 * t * (1.0 - t),
            FunctionKind::SinusoidPi => (PI * t).sin(),
            FunctionKind::SquareT => t * t,
            FunctionKind::Custom(c) => (c.f)(t),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            FunctionKind::Parabola4t => "parabola4t",
            FunctionKind::SinusoidPi => "sinusoid_pi",
            FunctionKind::SquareT => "square_t",
            FunctionKind::Custom(c) => &c.name,
        }
    }
}

impl FromStr for FunctionKind {
    type Err = Error;

    /// Parses the built-in kinds; custom expressions are handled by callers.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parabola4t" | "parabola" => Ok(FunctionKind::Parabola4t),
            "sinusoid_pi" | "sinusoid" => Ok(FunctionKind::SinusoidPi),
            "square_t" | "square" => Ok(FunctionKind::SquareT),
            other => Err(Error::invalid(format!("unknown function kind '{other}'"))),
        }
    }
}

/// Samples `kind` at `t = 0, τ, 2τ, …` (`points` samples).
pub fn sample_function(kind: &FunctionKind, tau: f64, points: usize) -> Result<TimeSeries> {
    if points < 2 {
        return Err(Error::invalid(format!("need at least 2 sample points, got {points}")));
    }
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::invalid(format!("time step must be positive, got {tau}")));
    }
    let values: Vec<f64> = (0..points).map(|k| kind.eval(k as f64 * tau)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("function '{}' is not finite on the sample grid", kind.name())));
    }
    TimeSeries::scalar(&values, tau)
}

/// Shape of the synthetic multi-dimensional trajectories.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryConfig {
    pub d: usize,
    pub points: usize,
    /// Sinusoids summed per dimension.
    pub components: usize,
    /// Angular frequency range in radians per step.
    pub frequency: (f64, f64),
    pub amplitude: (f64, f64),
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        Self { d: 4, points: 600, components: 5, frequency: (0.05, 0.5), amplitude: (0.5, 1.0) }
    }
}

/// Smooth random trajectory: every dimension is an independent sum of
/// sinusoids with uniformly drawn frequency, amplitude and phase.
///
/// Draw order per dimension and component: frequency, amplitude, phase.
pub fn synthetic_trajectory(cfg: &TrajectoryConfig, seed: u64) -> Result<TimeSeries> {
    if cfg.d == 0 || cfg.points < 2 || cfg.components == 0 {
        return Err(Error::invalid("trajectory needs d ≥ 1, ≥ 2 points and ≥ 1 component"));
    }
    let (f_lo, f_hi) = cfg.frequency;
    let (a_lo, a_hi) = cfg.amplitude;
    if !(f_lo < f_hi && a_lo < a_hi) {
        return Err(Error::invalid("empty frequency or amplitude range"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = DMatrix::zeros(cfg.d, cfg.points);
    for k in 0..cfg.d {
        for _ in 0..cfg.components {
            let freq = rng.gen_range(f_lo..f_hi);
            let amp = rng.gen_range(a_lo..a_hi);
            let phase = rng.gen_range(0.0..2.0 * PI);
            for t in 0..cfg.points {
                data[(k, t)] += amp * (freq * t as f64 + phase).sin();
            }
        }
    }
    TimeSeries::new(data, 1.0)
}
