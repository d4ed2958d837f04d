//! Random reservoir construction.
//!
//! Weights are drawn i.i.d. standard normal from a ChaCha8 stream seeded with
//! `seed`. Stream order: `w_in` row-major (`n_res × d`), then `w_res`
//! row-major (`n_res × n_res`). The reservoir matrix is then divided by its
//! spectral radius, and the reservoir start vector is the unit vector
//! `(1/√n_res) · [1 … 1]ᵀ`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg;

/// Fixed (untrained) part of a network: input and reservoir weights plus the
/// reservoir start vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirInit {
    pub w_in: DMatrix<f64>,
    pub w_res: DMatrix<f64>,
    pub r0: DVector<f64>,
    /// Seed that produced the weights (after any resampling).
    pub seed: u64,
}

impl ReservoirInit {
    pub fn d(&self) -> usize {
        self.w_in.ncols()
    }

    pub fn n_res(&self) -> usize {
        self.w_res.nrows()
    }

    /// Builds an init from explicit matrices, checking the shapes.
    pub fn from_parts(w_in: DMatrix<f64>, w_res: DMatrix<f64>, r0: DVector<f64>) -> Result<Self> {
        let n_res = w_res.nrows();
        if !w_res.is_square() || w_in.nrows() != n_res || r0.len() != n_res {
            return Err(Error::dims(format!(
                "inconsistent reservoir shapes: w_in {:?}, w_res {:?}, r0 {}",
                w_in.shape(),
                w_res.shape(),
                r0.len()
            )));
        }
        Ok(Self { w_in, w_res, r0, seed: 0 })
    }
}

/// Largest eigenvalue modulus of a square matrix.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    let vals = linalg::eigenvalues(m)?;
    Ok(vals.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Divides `m` by its spectral radius; errors when the radius is zero.
pub fn normalize_spectral_radius(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let rho = spectral_radius(m)?;
    if rho == 0.0 {
        return Err(Error::Numerical("matrix has spectral radius 0".into()));
    }
    Ok(m / rho)
}

pub(crate) fn standard_normal_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    // from_fn fills column-major; draw row-major so the stream order is the documented one.
    let data: Vec<f64> = (0..rows * cols).map(|_| StandardNormal.sample(rng)).collect();
    DMatrix::from_row_slice(rows, cols, &data)
}

/// Samples a reservoir for `d` input/output dimensions and `n_res` neurons.
///
/// A zero spectral radius (a probability-zero event) is handled by retrying
/// with `seed + 1`.
pub fn init_reservoir(d: usize, n_res: usize, seed: u64) -> Result<ReservoirInit> {
    if d == 0 || n_res == 0 {
        return Err(Error::invalid(format!("need d >= 1 and n_res >= 1, got d={d}, n_res={n_res}")));
    }
    let mut seed = seed;
    loop {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w_in = standard_normal_matrix(&mut rng, n_res, d);
        let w_res = standard_normal_matrix(&mut rng, n_res, n_res);
        match normalize_spectral_radius(&w_res) {
            Ok(w_res) => {
                let r0 = DVector::from_element(n_res, 1.0 / (n_res as f64).sqrt());
                return Ok(ReservoirInit { w_in, w_res, r0, seed });
            }
            Err(Error::Numerical(_)) => seed = seed.wrapping_add(1),
            Err(e) => return Err(e),
        }
    }
}

/// Same as [`init_reservoir`] but scales the reservoir to spectral radius `radius`.
pub fn init_reservoir_with_radius(d: usize, n_res: usize, seed: u64, radius: f64) -> Result<ReservoirInit> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::invalid(format!("spectral radius must be positive, got {radius}")));
    }
    let mut init = init_reservoir(d, n_res, seed)?;
    init.w_res *= radius;
    Ok(init)
}
