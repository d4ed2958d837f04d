use nalgebra::DVector;

use super::eigen::EigenDecomposition;
use crate::error::{Error, Result};
use crate::linalg::Complex64;

/// `V · Dᵗ · x` for real `t`, with `λᵗ = exp(t · Log λ)` on the principal branch.
///
/// Between integer steps the interpolated network state is in general
/// complex; the imaginary part is returned rather than discarded.
pub fn evaluate_fractional(decomp: &EigenDecomposition, t: f64) -> Result<DVector<Complex64>> {
    if !t.is_finite() {
        return Err(Error::invalid(format!("time must be finite, got {t}")));
    }
    if decomp.near_defective {
        return Err(Error::Numerical(format!(
            "eigenbasis is near-defective (condition {:.3e}); fractional powers are unreliable",
            decomp.condition
        )));
    }
    let mut scaled = DVector::zeros(decomp.len());
    for (k, &lambda) in decomp.lambdas.iter().enumerate() {
        let power = if lambda.norm() == 0.0 {
            if t < 0.0 {
                return Err(Error::Domain("zero eigenvalue raised to a negative power".into()));
            } else if t == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        } else {
            (lambda.ln() * t).exp()
        };
        scaled[k] = decomp.x[k] * power;
    }
    Ok(&decomp.v * scaled)
}

#[cfg(test)]
mod tests {
    use nalgebra::DMatrix;

    use super::*;
    use crate::spectral::eigendecompose;

    #[test]
    fn square_root_of_four() {
        let e = eigendecompose(&DMatrix::from_element(1, 1, 4.0), &DVector::from_element(1, 1.0)).unwrap();
        let z = evaluate_fractional(&e, 0.5).unwrap();
        assert!((z[0] - Complex64::new(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn principal_branch_of_minus_one() {
        let e = eigendecompose(&DMatrix::from_element(1, 1, -1.0), &DVector::from_element(1, 1.0)).unwrap();
        let z = evaluate_fractional(&e, 0.5).unwrap();
        assert!((z[0] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn integer_times_match_powers() {
        let w = DMatrix::from_row_slice(3, 3, &[0.2, -0.9, 0.1, 0.8, 0.3, 0.0, -0.1, 0.2, 0.7]);
        let x0 = DVector::from_vec(vec![1.0, 0.5, -1.0]);
        let e = eigendecompose(&w, &x0).unwrap();
        let mut s = x0.clone();
        for t in 0..10 {
            let z = evaluate_fractional(&e, t as f64).unwrap();
            assert!((z.map(|c| c.re) - &s).norm() <= 1e-9);
            assert!(z.iter().all(|c| c.im.abs() <= 1e-9));
            s = &w * s;
        }
    }

    #[test]
    fn zero_eigenvalue_negative_time() {
        let e = eigendecompose(&DMatrix::from_element(1, 1, 0.0), &DVector::from_element(1, 1.0)).unwrap();
        assert!(matches!(evaluate_fractional(&e, -0.5), Err(Error::Domain(_))));
        assert_eq!(evaluate_fractional(&e, 0.0).unwrap()[0], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn near_defective_rejected() {
        let w = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let e = eigendecompose(&w, &DVector::from_element(2, 1.0)).unwrap();
        assert!(evaluate_fractional(&e, 0.5).is_err());
    }
}
