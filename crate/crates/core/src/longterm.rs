//! Long-term behaviour of a network with spectral radius one.
//!
//! Far out in time only the unit-modulus eigenvalues of `W` matter. A single
//! dominant `+1` makes the state converge to a point, a single `−1` makes it
//! alternate between two points, and a dominant conjugate pair on the unit
//! circle traces an ellipse. The ellipse case is summarised by an equivalent
//! two-neuron system `V̂ · D̂ᵗ · x̂` with orthonormal axis vectors `V̂`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::Complex64;
use crate::spectral::EigenDecomposition;

/// Default tolerance on `|1 − |λ||` for an eigenvalue to count as unit modulus.
pub const UNIT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// Dominant eigenvalue `+1`: convergence to a fixed point.
    Singularity,
    /// Dominant eigenvalue `−1`: alternation between two points.
    Oscillation,
    /// Dominant conjugate pair on the unit circle.
    Ellipse,
    Other,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Classification::Singularity => "Singularity",
            Classification::Oscillation => "Oscillation",
            Classification::Ellipse => "Ellipse",
            Classification::Other => "Other",
        };
        f.write_str(s)
    }
}

fn on_circle(lambda: Complex64, tol: f64) -> bool {
    (1.0 - lambda.norm()).abs() <= tol
}

pub fn classify_longterm(decomp: &EigenDecomposition, tol: f64) -> Classification {
    let Some(&l1) = decomp.lambdas.first() else {
        return Classification::Other;
    };
    if !on_circle(l1, tol) {
        return Classification::Other;
    }
    let unit = decomp.lambdas.iter().filter(|l| on_circle(**l, tol)).count();
    match (l1.im == 0.0, unit) {
        (true, 1) if l1.re > 0.0 => Classification::Singularity,
        (true, 1) => Classification::Oscillation,
        (false, 2) => Classification::Ellipse,
        _ => Classification::Other,
    }
}

/// Short explanation for an `Other` classification, if one applies.
pub fn classification_note(decomp: &EigenDecomposition, tol: f64) -> Option<String> {
    let l1 = *decomp.lambdas.first()?;
    let r = l1.norm();
    if r > 1.0 + tol {
        Some(format!("spectral radius {r:.6} > 1: activity diverges"))
    } else if r < 1.0 - tol {
        Some(format!("spectral radius {r:.6} < 1: activity vanishes"))
    } else if classify_longterm(decomp, tol) == Classification::Other {
        let unit = decomp.lambdas.iter().filter(|l| on_circle(**l, tol)).count();
        Some(format!("{unit} eigenvalues on the unit circle"))
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EllipseAnalysis {
    pub classification: Classification,
    /// Unit-norm major and minor axis directions, `N × 2`.
    pub v_hat: DMatrix<f64>,
    pub d_hat: DMatrix<f64>,
    pub x_hat: DVector<f64>,
    /// Axis ratio `a / b`.
    pub mu: f64,
    /// Angular frequency in radians per unit time.
    pub omega: f64,
    /// Angle of the extremal axis.
    pub phi: f64,
    pub tau: f64,
    /// Fixed point for the `Singularity` case.
    pub limit_point: Option<DVector<f64>>,
}

impl EllipseAnalysis {
    /// Per-step rotation angle `ω · τ`.
    pub fn angle_per_step(&self) -> f64 {
        self.omega * self.tau
    }

    /// `V̂ · D̂ᵗ · x̂`.
    pub fn state(&self, t: u32) -> DVector<f64> {
        let mut z = self.x_hat.clone();
        for _ in 0..t {
            z = &self.d_hat * z;
        }
        &self.v_hat * z
    }
}

/// `ℓ(e^{iκ}) = 2 · Re(e^{iκ} · v)`.
fn ell(v: &DVector<Complex64>, kappa: f64) -> DVector<f64> {
    let (s, c) = kappa.sin_cos();
    v.map(|z| 2.0 * (c * z.re - s * z.im))
}

/// Two-neuron equivalent of an ellipse-classified system.
pub fn ellipse(decomp: &EigenDecomposition, tau: f64) -> Result<EllipseAnalysis> {
    ellipse_with_tol(decomp, tau, UNIT_TOL)
}

pub fn ellipse_with_tol(decomp: &EigenDecomposition, tau: f64, tol: f64) -> Result<EllipseAnalysis> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::invalid(format!("time step must be positive, got {tau}")));
    }
    let class = classify_longterm(decomp, tol);
    if class != Classification::Ellipse {
        return Err(Error::Domain(format!("long-term behaviour is {class}, not an ellipse")));
    }
    let l1 = decomp.lambdas[0];
    let v = decomp.v.column(0).into_owned();
    let v_re = v.map(|z| z.re);
    let v_im = v.map(|z| z.im);
    let a_coef = v_re.dot(&v_re) - v_im.dot(&v_im);
    let c_coef = 2.0 * v_re.dot(&v_im);
    // atan2(0, 0) = 0 covers the circle case where every angle is extremal.
    let phi = 0.5 * (-c_coef).atan2(a_coef);

    let l1_axis = ell(&v, phi);
    let l2_axis = ell(&v, phi + FRAC_PI_2);
    let (a, b) = (l1_axis.norm(), l2_axis.norm());
    if a == 0.0 || b == 0.0 {
        return Err(Error::Numerical("degenerate ellipse axis".into()));
    }
    let mu = a / b;
    let v_hat = DMatrix::from_columns(&[l1_axis / a, l2_axis / b]);

    let angle = l1.arg();
    let (s, c) = angle.sin_cos();
    let d_hat = DMatrix::from_row_slice(2, 2, &[c, -mu * s, s / mu, c]);

    // Long-term state one step after the start, 2·Re(x₁ λ₁ v₁).
    let x1 = decomp.x[0];
    let target = v.map(|z| 2.0 * (x1 * l1 * z).re);
    let projected = v_hat.transpose() * target;
    let det = c * c + s * s;
    let d_inv = DMatrix::from_row_slice(2, 2, &[c, mu * s, -s / mu, c]) / det;
    let x_hat = d_inv * projected;

    Ok(EllipseAnalysis {
        classification: class,
        v_hat,
        d_hat,
        x_hat,
        mu,
        omega: angle / tau,
        phi,
        tau,
        limit_point: None,
    })
}

/// `Re(x₁ · v₁)`, the fixed point of a `Singularity` system.
pub fn limit_point(decomp: &EigenDecomposition) -> Option<DVector<f64>> {
    let x1 = *decomp.x.get(0)?;
    Some(decomp.v.column(0).map(|z| (x1 * z).re))
}

/// The two alternating points `±x₁ · v₁` of an `Oscillation` system.
pub fn oscillation_points(decomp: &EigenDecomposition) -> Option<(DVector<f64>, DVector<f64>)> {
    let p = limit_point(decomp)?;
    let q = -&p;
    Some((p, q))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_4, PI};

    use super::*;
    use crate::spectral::eigendecompose;

    fn decomp(w: &[f64], n: usize, x0: &[f64]) -> EigenDecomposition {
        eigendecompose(&DMatrix::from_row_slice(n, n, w), &DVector::from_row_slice(x0)).unwrap()
    }

    #[test]
    fn scalar_classifications() {
        assert_eq!(classify_longterm(&decomp(&[1.0], 1, &[1.0]), UNIT_TOL), Classification::Singularity);
        assert_eq!(classify_longterm(&decomp(&[-1.0], 1, &[1.0]), UNIT_TOL), Classification::Oscillation);
        assert_eq!(classify_longterm(&decomp(&[0.5], 1, &[1.0]), UNIT_TOL), Classification::Other);
        let both = decomp(&[1.0, 0.0, 0.0, -1.0], 2, &[1.0, 1.0]);
        assert_eq!(classify_longterm(&both, UNIT_TOL), Classification::Other);
        assert!(classification_note(&both, UNIT_TOL).is_some());
    }

    #[test]
    fn rotation_is_ellipse_with_quarter_turn() {
        let e = decomp(&[0.0, 1.0, -1.0, 0.0], 2, &[1.0, 0.0]);
        assert_eq!(classify_longterm(&e, UNIT_TOL), Classification::Ellipse);
        let an = ellipse(&e, 1.0).unwrap();
        assert!((an.angle_per_step() - FRAC_PI_2).abs() < 1e-12);
        assert!((an.mu - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eighth_turn_circle() {
        let (s, c) = FRAC_PI_4.sin_cos();
        let w = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let x0 = DVector::from_vec(vec![1.0, 0.0]);
        let e = eigendecompose(&w, &x0).unwrap();
        let an = ellipse(&e, 0.5).unwrap();
        assert!((an.mu - 1.0).abs() < 1e-12);
        assert!((an.angle_per_step() - FRAC_PI_4).abs() < 1e-12);
        assert!((an.omega - PI / 2.0).abs() < 1e-12);
        let dtd = an.d_hat.transpose() * &an.d_hat;
        assert!((dtd - DMatrix::identity(2, 2)).amax() < 1e-10);
        let mut s_t = x0.clone();
        for t in 0..20 {
            assert!((an.state(t) - &s_t).norm() < 1e-10);
            assert!((s_t.norm() - 1.0).abs() < 1e-12);
            s_t = &w * s_t;
        }
    }

    #[test]
    fn stretched_ellipse() {
        // Similar to a rotation by 0.3 rad, stretched along a skew direction.
        let (s, c) = 0.3f64.sin_cos();
        let rot = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let p = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 0.5, 1.0]);
        let w = &p * rot * p.clone().try_inverse().unwrap();
        let x0 = DVector::from_vec(vec![0.4, -1.2]);
        let e = eigendecompose(&w, &x0).unwrap();
        let an = ellipse(&e, 1.0).unwrap();
        assert!(an.mu > 1.0);
        let vtv = an.v_hat.transpose() * &an.v_hat;
        assert!((vtv - DMatrix::identity(2, 2)).amax() < 1e-8);
        let mut s_t = x0.clone();
        for t in 0..30 {
            assert!((an.state(t) - &s_t).norm() < 1e-9 * x0.norm());
            s_t = &w * s_t;
        }
    }

    #[test]
    fn axis_length_is_extremal() {
        let v = DVector::from_vec(vec![Complex64::new(0.7, 0.1), Complex64::new(-0.2, 0.6), Complex64::new(0.3, -0.2)]);
        let v_re = v.map(|z| z.re);
        let v_im = v.map(|z| z.im);
        let phi = 0.5 * (-2.0 * v_re.dot(&v_im)).atan2(v_re.dot(&v_re) - v_im.dot(&v_im));
        let h = 1e-4;
        let f = |k: f64| ell(&v, k).norm();
        assert!(f(phi) >= f(phi + h) && f(phi) >= f(phi - h));
        let q = phi + FRAC_PI_2;
        assert!(f(q) <= f(q + h) && f(q) <= f(q - h));
    }

    #[test]
    fn ellipse_requires_ellipse_class() {
        assert!(matches!(ellipse(&decomp(&[1.0], 1, &[2.0]), 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn singular_and_oscillating_points() {
        let e = decomp(&[1.0, 0.0, 0.0, 0.5], 2, &[3.0, 4.0]);
        let p = limit_point(&e).unwrap();
        assert!((p - DVector::from_vec(vec![3.0, 0.0])).norm() < 1e-12);

        let e = decomp(&[-1.0, 0.0, 0.0, 0.2], 2, &[2.0, 1.0]);
        let (p, q) = oscillation_points(&e).unwrap();
        let w = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 0.2]);
        let mut s = DVector::from_vec(vec![2.0, 1.0]);
        for _ in 0..40 {
            s = &w * s;
        }
        assert!((&s - &p).norm() < 1e-12 || (&s - &q).norm() < 1e-12);
    }
}
