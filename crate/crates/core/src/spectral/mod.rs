//! Eigen and Jordan structure of transition matrices.
//!
//! [`eigendecompose`] gives `Wᵗ · x0 = V · Dᵗ · x` for diagonalizable `W`.
//! [`real_jordan`] covers the general case with a real block diagonal `J`
//! and a rebased start vector `y = [1 … 1]ᵀ`, so that `Wᵗ · x0 = A · Jᵗ · y`.
//!
//! Numerical Jordan forms are ill-posed, so blocks with `m > 1` are only
//! formed for eigenvalues that agree within a relative tolerance; everything
//! else becomes a 1×1 real block or a 2×2 rotation-scaling cell.

mod eigen;
mod fractional;
mod jordan;

pub use eigen::{defectiveness_threshold, eigendecompose, EigenDecomposition};
pub use fractional::evaluate_fractional;
pub use jordan::{
    jordan_basis, jordan_block_power, real_jordan, real_jordan_model, rebase_start, BlockKind, JordanBasis,
    JordanForm, RealJordanBlock, DEFAULT_TOL,
};
