//! Predictive neural networks (PrNNs): recurrent networks with identity
//! activation whose weights are learned by solving linear equation systems.
//!
//! The crate is organised along the lifecycle of a network:
//!
//! - [`model`]: time series, the network itself, simulation and the NRMSE metric.
//! - [`reservoir`]: random reservoir construction with unit spectral radius.
//! - [`learning`]: output-weight regression and full-transition learning.
//! - [`spectral`]: eigen and real Jordan decompositions, start-vector rebasing,
//!   closed-form Jordan block powers and fractional-time evaluation.
//! - [`reduction`]: network size reduction down to the relevant Jordan components.
//! - [`longterm`]: asymptotic classification and the two-neuron ellipse system.
//! - [`bench`]: signal generators, number puzzles and seeded multi-trial experiments.
//!
//! A typical pipeline:
//!
//! ```
//! use prnn::bench::{sample_function, FunctionKind};
//! use prnn::learning::learn_output_weights;
//! use prnn::reservoir::init_reservoir;
//! use prnn::reduction::{reduce, reduced_trajectory};
//! use prnn::spectral::real_jordan;
//!
//! let series = sample_function(&FunctionKind::SinusoidPi, 0.01, 101).unwrap();
//! let init = init_reservoir(1, 30, 7).unwrap();
//! let model = learn_output_weights(&series, &init).unwrap();
//! let form = real_jordan(&model.w, &model.x0, 1e-6).unwrap();
//! let reduced = reduce(&form, &series, 0.99).unwrap();
//! assert!(reduced.width() < model.size());
//! let replay = reduced_trajectory(&reduced, series.len()).unwrap();
//! assert!(prnn::model::nrmse(&series, &replay).unwrap() < 1e-3);
//! ```

pub mod bench;
pub mod error;
pub mod learning;
mod linalg;
pub mod longterm;
pub mod model;
pub mod reduction;
pub mod reservoir;
pub mod spectral;

pub use error::{Error, Result};
pub use linalg::Complex64;
