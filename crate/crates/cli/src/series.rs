use std::path::PathBuf;

use clap::Args;
use evalexpr::{build_operator_tree, ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Node, Value};

use prnn::bench::{load_trajectory_csv, sample_function, subsample, FunctionKind};
use prnn::model::TimeSeries;

use crate::error::{CliError, CliResult};

/// Where a training series comes from.
#[derive(Debug, Clone, Args, Default)]
pub struct SeriesArgs {
    /// CSV file with one time point per line (optional header).
    #[arg(long, value_name = "FILE", conflicts_with_all = ["function", "expr"])]
    pub input: Option<PathBuf>,
    /// Built-in function of time: parabola4t, sinusoid_pi or square_t.
    #[arg(long, value_name = "NAME", conflicts_with = "expr")]
    pub function: Option<String>,
    /// Expression in the variable `t`, e.g. "t^3 - math::sin(pi * t)".
    #[arg(long, value_name = "EXPR")]
    pub expr: Option<String>,
    /// Sample spacing for functions and expressions; time step of CSV rows.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Number of samples drawn from a function or expression.
    #[arg(long)]
    pub points: Option<usize>,
    /// Keep every k-th CSV row.
    #[arg(long)]
    pub stride: Option<usize>,
}

pub const DEFAULT_TAU: f64 = 0.01;
pub const DEFAULT_POINTS: usize = 101;

/// A resolved series with a description of its origin.
pub struct LoadedSeries {
    pub series: TimeSeries,
    pub source: String,
    pub stride: usize,
}

impl SeriesArgs {
    pub fn is_empty(&self) -> bool {
        self.input.is_none() && self.function.is_none() && self.expr.is_none()
    }

    /// Rebuilds the arguments from a stored source description.
    pub fn from_source(source: &str, tau: f64, points: usize, stride: usize) -> CliResult<Self> {
        let (kind, rest) = source
            .split_once(':')
            .ok_or_else(|| CliError::usage(format!("cannot interpret stored source '{source}'")))?;
        let mut args = SeriesArgs { stride: Some(stride), ..Default::default() };
        match kind {
            "csv" => {
                args.input = Some(PathBuf::from(rest));
                args.tau = Some(tau / stride as f64);
            }
            "function" | "expr" => {
                if kind == "function" {
                    args.function = Some(rest.to_string());
                } else {
                    args.expr = Some(rest.to_string());
                }
                args.tau = Some(tau);
                args.points = Some(points);
                args.stride = None;
            }
            _ => return Err(CliError::usage(format!("cannot interpret stored source '{source}'"))),
        }
        Ok(args)
    }

    pub fn load(&self) -> CliResult<LoadedSeries> {
        if let Some(tau) = self.tau {
            if !(tau.is_finite() && tau > 0.0) {
                return Err(CliError::usage(format!("--tau must be positive, got {tau}")));
            }
        }
        if let Some(path) = &self.input {
            if self.points.is_some() {
                return Err(CliError::usage("--points applies to functions and expressions only"));
            }
            let stride = self.stride.unwrap_or(1);
            if stride == 0 {
                return Err(CliError::usage("--stride must be at least 1"));
            }
            let raw = load_trajectory_csv(path).map_err(|e| CliError::io_at(path, e))?;
            let raw = match self.tau {
                Some(tau) => TimeSeries::new(raw.into_data(), tau)?,
                None => raw,
            };
            let series = subsample(&raw, stride)?;
            return Ok(LoadedSeries { series, source: format!("csv:{}", path.display()), stride });
        }
        if self.stride.is_some() {
            return Err(CliError::usage("--stride applies to CSV input only"));
        }
        let (kind, source) = match (&self.function, &self.expr) {
            (Some(name), None) => {
                let kind: FunctionKind = name.parse().map_err(|e: prnn::Error| CliError::usage(e.to_string()))?;
                let source = format!("function:{}", kind.name());
                (kind, source)
            }
            (None, Some(expr)) => (expression(expr)?, format!("expr:{expr}")),
            _ => return Err(CliError::usage("give one of --input, --function or --expr")),
        };
        let tau = self.tau.unwrap_or(DEFAULT_TAU);
        let points = self.points.unwrap_or(DEFAULT_POINTS);
        let series = sample_function(&kind, tau, points)?;
        Ok(LoadedSeries { series, source, stride: 1 })
    }
}

fn context(t: f64) -> HashMapContext<DefaultNumericTypes> {
    let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
    for (name, v) in [("t", t), ("pi", std::f64::consts::PI), ("e", std::f64::consts::E)] {
        ctx.set_value(name.into(), Value::Float(v)).expect("plain variables are always accepted");
    }
    ctx
}

fn eval(node: &Node<DefaultNumericTypes>, t: f64) -> Result<f64, String> {
    node.eval_number_with_context(&context(t)).map_err(|e| e.to_string())
}

/// Compiles an expression of `t` into a function; evaluation errors surface
/// as NaN, which sampling rejects.
pub fn expression(expr: &str) -> CliResult<FunctionKind> {
    let node = build_operator_tree::<DefaultNumericTypes>(expr)
        .map_err(|e| CliError::usage(format!("invalid expression '{expr}': {e}")))?;
    eval(&node, 0.0).map_err(|e| CliError::usage(format!("invalid expression '{expr}': {e}")))?;
    Ok(FunctionKind::custom(expr, move |t| eval(&node, t).unwrap_or(f64::NAN)))
}
