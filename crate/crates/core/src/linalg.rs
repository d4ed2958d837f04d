//! Dense kernels shared by the learning and spectral modules.
//!
//! nalgebra carries the matrices; the general (non-symmetric) eigensolver is
//! faer's, run single threaded so results are bit-reproducible.

use faer::complex_native::c64;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Complex64 = nalgebra::Complex<f64>;

/// Result of a least-squares solve `M · X ≈ Y`.
#[derive(Debug, Clone)]
pub(crate) struct LeastSquares {
    pub solution: DMatrix<f64>,
    pub rank: usize,
}

/// Minimum-norm least-squares solution `M` of `M · x = y`.
///
/// `x` is `p × m`, `y` is `k × m`, the returned `M` is `k × p`. The
/// pseudo-inverse of `x` is taken from its SVD with singular values below
/// `σ_max · max(p, m) · ε` treated as zero. A positive `ridge` switches to
/// Tikhonov filtering `σ / (σ² + ridge)` over all singular values.
pub(crate) fn min_norm_solve(x: &DMatrix<f64>, y: &DMatrix<f64>, ridge: f64) -> Result<LeastSquares> {
    if x.ncols() != y.ncols() {
        return Err(Error::dims(format!(
            "coefficient matrix has {} columns, target has {}",
            x.ncols(),
            y.ncols()
        )));
    }
    if x.is_empty() {
        return Err(Error::invalid("empty coefficient matrix"));
    }
    let (p, m) = x.shape();
    let svd = x
        .clone()
        .try_svd(true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let sigma = &svd.singular_values;
    let cutoff = rank_tolerance(sigma.max(), p, m);
    let rank = sigma.iter().filter(|&&s| s > cutoff).count();

    // M = Y · Vᵀᵀ · Σ⁺ · Uᵀ, assembled as (Y · V) scaled column-wise, then · Uᵀ.
    let mut yv = y * v_t.transpose();
    for (j, &s) in sigma.iter().enumerate() {
        let inv = if ridge > 0.0 {
            s / (s * s + ridge)
        } else if s > cutoff {
            1.0 / s
        } else {
            0.0
        };
        yv.column_mut(j).scale_mut(inv);
    }
    let solution = yv * u.transpose();
    Ok(LeastSquares { solution, rank })
}

pub(crate) fn rank_tolerance(sigma_max: f64, rows: usize, cols: usize) -> f64 {
    sigma_max * rows.max(cols) as f64 * f64::EPSILON
}

/// Numerical rank with the tolerance `σ_max · max(dims) · ε`.
pub(crate) fn numerical_rank(m: &DMatrix<f64>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let (r, c) = m.shape();
    let sv = m.clone().singular_values();
    let tol = rank_tolerance(sv.max(), r, c);
    sv.iter().filter(|&&s| s > tol).count()
}

fn to_faer(m: &DMatrix<f64>) -> Result<faer::Mat<f64>> {
    if !m.is_square() {
        return Err(Error::dims(format!("expected a square matrix, got {}x{}", m.nrows(), m.ncols())));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("matrix contains non-finite entries"));
    }
    Ok(faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]))
}

fn pin_parallelism() {
    static ONCE: std::sync::Once = std::sync::Once::new();
    ONCE.call_once(|| faer::set_global_parallelism(faer::Parallelism::None));
}

/// All (complex) eigenvalues of a real square matrix, unordered.
pub(crate) fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    pin_parallelism();
    let fm = to_faer(m)?;
    let vals: Vec<Complex64> = fm
        .eigenvalues::<c64>()
        .into_iter()
        .map(|z: c64| Complex64::new(z.re, z.im))
        .collect();
    if vals.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigenFailure("non-finite eigenvalue (no convergence)".into()));
    }
    Ok(vals)
}

/// Eigenvalues and right eigenvectors of a real square matrix, unordered.
pub(crate) fn eigen(m: &DMatrix<f64>) -> Result<(Vec<Complex64>, DMatrix<Complex64>)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    pin_parallelism();
    let fm = to_faer(m)?;
    let evd = fm.eigendecomposition::<c64>();
    let s = evd.s().column_vector();
    let u = evd.u();
    let vals: Vec<Complex64> = (0..n)
        .map(|i| {
            let z = s.read(i);
            Complex64::new(z.re, z.im)
        })
        .collect();
    let vecs = DMatrix::from_fn(n, n, |i, j| {
        let z = u.read(i, j);
        Complex64::new(z.re, z.im)
    });
    if vals.iter().chain(vecs.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigenFailure("non-finite eigenpair (no convergence)".into()));
    }
    Ok((vals, vecs))
}

/// 2-norm condition number via singular values; `inf` for singular input.
pub(crate) fn condition_number(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 1.0;
    }
    let sv = m.clone().singular_values();
    let (max, min) = (sv.max(), sv.min());
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Solves `m · z = b`; falls back to the pseudo-inverse when LU reports singularity.
pub(crate) fn solve_complex(m: &DMatrix<Complex64>, b: &DVector<Complex64>) -> DVector<Complex64> {
    if let Some(z) = m.clone().lu().solve(b) {
        if z.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return z;
        }
    }
    let svd = m.clone().svd(true, true);
    let eps = rank_tolerance(svd.singular_values.max(), m.nrows(), m.ncols());
    svd.solve(b, eps).unwrap_or_else(|_| DVector::zeros(m.ncols()))
}

pub(crate) fn to_complex(v: &DVector<f64>) -> DVector<Complex64> {
    v.map(|x| Complex64::new(x, 0.0))
}
