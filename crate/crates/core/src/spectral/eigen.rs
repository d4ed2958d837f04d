use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, Complex64};

/// Eigenvalues of `W` with unit-norm eigenvectors and the start vector in
/// eigen-coordinates, `x = V⁻¹ · x0`.
///
/// Ordering is by decreasing modulus, ties broken by decreasing real part and
/// then decreasing imaginary part. A conjugate pair therefore sits at adjacent
/// indices with the `Im > 0` member first, and its second member is the exact
/// conjugate (value and vector) of the first.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub lambdas: Vec<Complex64>,
    pub v: DMatrix<Complex64>,
    pub x: DVector<Complex64>,
    /// 2-norm condition number of `v`.
    pub condition: f64,
    /// Set when `condition > 1/√ε`: the matrix is (numerically) defective and
    /// `V · Dᵗ · x` cannot be trusted.
    pub near_defective: bool,
}

/// Condition threshold above which an eigenbasis is considered defective.
pub fn defectiveness_threshold() -> f64 {
    1.0 / f64::EPSILON.sqrt()
}

impl EigenDecomposition {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.lambdas.first().map_or(0.0, |l| l.norm())
    }

    /// `V · Dᵗ · x` for integer `t`.
    pub fn reconstruct(&self, t: u32) -> DVector<Complex64> {
        let scaled = DVector::from_fn(self.len(), |k, _| self.x[k] * complex_powi(self.lambdas[k], t));
        &self.v * scaled
    }
}

/// `λᵗ` with `0⁰ = 1`.
pub(crate) fn complex_powi(lambda: Complex64, t: u32) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    let mut base = lambda;
    let mut e = t;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

fn order(a: &Complex64, b: &Complex64) -> Ordering {
    b.norm()
        .total_cmp(&a.norm())
        .then(b.re.total_cmp(&a.re))
        .then(b.im.total_cmp(&a.im))
}

/// Eigendecomposition of a real square matrix together with `x = V⁻¹ x0`.
pub fn eigendecompose(w: &DMatrix<f64>, x0: &DVector<f64>) -> Result<EigenDecomposition> {
    let n = w.nrows();
    if x0.len() != n {
        return Err(Error::dims(format!("start vector has {} entries, matrix is {n}x{n}", x0.len())));
    }
    let (vals, vecs) = linalg::eigen(w)?;

    // Units: a real eigenpair, or the Im > 0 member of a conjugate pair.
    let mut upper: Vec<usize> = Vec::new();
    let mut lower: Vec<usize> = Vec::new();
    let mut units: Vec<(Complex64, DVector<Complex64>, bool)> = Vec::new();
    for (k, &l) in vals.iter().enumerate() {
        if l.im > 0.0 {
            upper.push(k);
        } else if l.im < 0.0 {
            lower.push(k);
        } else {
            // Store +0.0 so the principal logarithm of a negative eigenvalue is +iπ.
            let l = Complex64::new(l.re, 0.0);
            units.push((l, normalize_real(vecs.column(k).into_owned()), false));
        }
    }
    if upper.len() != lower.len() {
        return Err(Error::EigenFailure("eigenvalues of a real matrix do not pair into conjugates".into()));
    }
    for &k in &upper {
        units.push((vals[k], normalize(vecs.column(k).into_owned()), true));
    }
    units.sort_by(|a, b| order(&a.0, &b.0));

    let mut lambdas = Vec::with_capacity(n);
    let mut v = DMatrix::zeros(n, n);
    let mut col = 0;
    for (l, vec, pair) in units {
        lambdas.push(l);
        v.set_column(col, &vec);
        col += 1;
        if pair {
            lambdas.push(l.conj());
            v.set_column(col, &vec.map(|z| z.conj()));
            col += 1;
        }
    }

    let condition = linalg::condition_number(&v);
    let x = linalg::solve_complex(&v, &linalg::to_complex(x0));
    Ok(EigenDecomposition {
        lambdas,
        v,
        x,
        condition,
        // A NaN condition number also counts as defective.
        near_defective: condition.is_nan() || condition > defectiveness_threshold(),
    })
}

fn normalize(v: DVector<Complex64>) -> DVector<Complex64> {
    let norm = v.norm();
    if norm > 0.0 {
        v / Complex64::new(norm, 0.0)
    } else {
        v
    }
}

/// Rotates the phase so the largest entry is real positive and drops the
/// (round-off) imaginary parts; used for real eigenvalues.
fn normalize_real(v: DVector<Complex64>) -> DVector<Complex64> {
    let pivot = v.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or_default();
    let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { Complex64::new(1.0, 0.0) };
    normalize(v.map(|z| Complex64::new((z * phase).re, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_example() {
        let w = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.0]);
        let e = eigendecompose(&w, &DVector::from_vec(vec![1.0, 1.0])).unwrap();
        assert!((e.lambdas[0] - c(3.0, 0.0)).norm() < 1e-14);
        assert!((e.lambdas[1] - c(1.0, 0.0)).norm() < 1e-14);
        assert!((e.x[0] - c(1.0, 0.0)).norm() < 1e-14);
        assert!((e.x[1] - c(1.0, 0.0)).norm() < 1e-14);
        assert!(!e.near_defective);
    }

    #[test]
    fn rotation_pair_ordering() {
        let w = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let e = eigendecompose(&w, &DVector::from_vec(vec![1.0, 0.0])).unwrap();
        assert!((e.lambdas[0] - c(0.0, 1.0)).norm() < 1e-14);
        assert_eq!(e.lambdas[1], e.lambdas[0].conj());
        assert_eq!(e.v.column(1), e.v.column(0).map(|z| z.conj()));
        assert!((e.spectral_radius() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn parabola_matrix_is_near_defective() {
        let w = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0]);
        let e = eigendecompose(&w, &DVector::from_vec(vec![0.0, 0.0, 1.0])).unwrap();
        assert!(e.near_defective);
        for l in &e.lambdas {
            assert!((l - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn eigen_equation_and_reconstruction() {
        let w = DMatrix::from_row_slice(
            4,
            4,
            &[0.3, -0.8, 0.1, 0.4, 0.9, 0.2, -0.5, 0.0, 0.1, 0.6, 0.5, -0.3, -0.2, 0.1, 0.7, 0.4],
        );
        let x0 = DVector::from_vec(vec![1.0, -1.0, 0.5, 2.0]);
        let e = eigendecompose(&w, &x0).unwrap();
        let wc = w.map(|v| c(v, 0.0));
        for k in 0..4 {
            let lhs = &wc * e.v.column(k);
            let rhs = e.v.column(k) * e.lambdas[k];
            assert!((lhs - rhs).norm() <= 1e-8 * w.norm());
        }
        for pair in e.lambdas.windows(2) {
            assert!(pair[0].norm() >= pair[1].norm() - 1e-15);
        }
        let mut state = x0.clone();
        for t in 0..8 {
            let rec = e.reconstruct(t);
            assert!(rec.iter().all(|z| z.im.abs() <= 1e-9));
            let re = rec.map(|z| z.re);
            assert!((re - &state).norm() <= 1e-9 * state.norm().max(1.0));
            state = &w * state;
        }
    }

    #[test]
    fn powi_zero_to_zero_is_one() {
        assert_eq!(complex_powi(c(0.0, 0.0), 0), c(1.0, 0.0));
        assert_eq!(complex_powi(c(0.0, 0.0), 3), c(0.0, 0.0));
        assert!((complex_powi(c(0.0, 1.0), 3) - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn start_vector_length_checked() {
        let w = DMatrix::identity(2, 2);
        assert!(eigendecompose(&w, &DVector::zeros(3)).is_err());
    }
}
