use nalgebra::{ComplexField, DMatrix, DVector};

use super::eigen::{complex_powi, eigendecompose};
use crate::error::{Error, Result};
use crate::linalg::{self, Complex64};
use crate::model::PrnnModel;

/// Default relative tolerance for merging eigenvalues into one Jordan block.
pub const DEFAULT_TOL: f64 = 1e-6;

/// `J_m(λ)ᵗ`: entry `(i, j)` is `C(t, j−i) · λ^{t−(j−i)}` for `j ≥ i`, zero
/// otherwise and zero when `j − i > t`. `0⁰ = 1`.
pub fn jordan_block_power(lambda: Complex64, m: usize, t: u32) -> DMatrix<Complex64> {
    let mut out = DMatrix::zeros(m, m);
    let mut binom = 1.0_f64;
    for k in 0..m {
        if k as u64 > t as u64 {
            break;
        }
        if k > 0 {
            binom = binom * (t as f64 - (k as f64 - 1.0)) / k as f64;
        }
        let value = complex_powi(lambda, t - k as u32) * binom;
        for i in 0..m - k {
            out[(i, i + k)] = value;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// `J_m(λ)` for a real eigenvalue.
    Real,
    /// A conjugate pair: `m` rotation-scaling cells `[[λ_Re, λ_Im], [−λ_Im, λ_Re]]`
    /// on the diagonal and 2×2 identity cells one cell above it.
    ComplexPair,
}

/// One block of a real Jordan matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealJordanBlock {
    pub kind: BlockKind,
    /// For pairs, the member with positive imaginary part.
    pub lambda: Complex64,
    pub m: usize,
}

impl RealJordanBlock {
    pub fn real(lambda: f64, m: usize) -> Self {
        Self { kind: BlockKind::Real, lambda: Complex64::new(lambda, 0.0), m }
    }

    pub fn pair(lambda: Complex64, m: usize) -> Self {
        Self { kind: BlockKind::ComplexPair, lambda: Complex64::new(lambda.re, lambda.im.abs()), m }
    }

    pub fn width(&self) -> usize {
        match self.kind {
            BlockKind::Real => self.m,
            BlockKind::ComplexPair => 2 * self.m,
        }
    }

    /// Non-zero entries `(row, col, value)` in block-local coordinates.
    pub fn entries(&self) -> Vec<(usize, usize, f64)> {
        let (re, im) = (self.lambda.re, self.lambda.im);
        let mut out = Vec::new();
        let mut push = |i: usize, j: usize, v: f64| {
            if v != 0.0 {
                out.push((i, j, v));
            }
        };
        match self.kind {
            BlockKind::Real => {
                for i in 0..self.m {
                    push(i, i, re);
                    if i + 1 < self.m {
                        push(i, i + 1, 1.0);
                    }
                }
            }
            BlockKind::ComplexPair => {
                for c in 0..self.m {
                    let k = 2 * c;
                    push(k, k, re);
                    push(k, k + 1, im);
                    push(k + 1, k, -im);
                    push(k + 1, k + 1, re);
                    if c + 1 < self.m {
                        push(k, k + 2, 1.0);
                        push(k + 1, k + 3, 1.0);
                    }
                }
            }
        }
        out
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let w = self.width();
        let mut out = DMatrix::zeros(w, w);
        for (i, j, v) in self.entries() {
            out[(i, j)] = v;
        }
        out
    }

    /// Replaces `s` by `J_b · s` in place.
    pub fn apply(&self, s: &mut [f64]) {
        debug_assert_eq!(s.len(), self.width());
        let (re, im) = (self.lambda.re, self.lambda.im);
        match self.kind {
            BlockKind::Real => {
                for i in 0..self.m {
                    let next = if i + 1 < self.m { s[i + 1] } else { 0.0 };
                    s[i] = re * s[i] + next;
                }
            }
            BlockKind::ComplexPair => {
                for c in 0..self.m {
                    let k = 2 * c;
                    let (p, q) = (s[k], s[k + 1]);
                    let (np, nq) = if c + 1 < self.m { (s[k + 2], s[k + 3]) } else { (0.0, 0.0) };
                    s[k] = re * p + im * q + np;
                    s[k + 1] = -im * p + re * q + nq;
                }
            }
        }
    }
}

/// A complex Jordan basis `W · V = V · J` of a real matrix.
///
/// Blocks of non-real eigenvalues come in conjugate pairs; `partner[b]`
/// points from the `Im > 0` block to the conjugate block and vice versa.
#[derive(Debug, Clone)]
pub struct JordanBasis {
    pub lambdas: Vec<Complex64>,
    pub sizes: Vec<usize>,
    pub partner: Vec<Option<usize>>,
    /// Columns grouped per block, each group a Jordan chain `v_1 … v_m` with
    /// `(W − λ) v_1 = 0` and `(W − λ) v_{k+1} = v_k`.
    pub v: DMatrix<Complex64>,
    pub condition: f64,
}

impl JordanBasis {
    pub fn offsets(&self) -> Vec<usize> {
        offsets(self.sizes.iter().copied())
    }

    /// The full complex Jordan matrix `J`.
    pub fn jordan_matrix(&self) -> DMatrix<Complex64> {
        let n = self.v.ncols();
        let mut j = DMatrix::zeros(n, n);
        for (b, off) in self.offsets().into_iter().enumerate() {
            for i in 0..self.sizes[b] {
                j[(off + i, off + i)] = self.lambdas[b];
                if i + 1 < self.sizes[b] {
                    j[(off + i, off + i + 1)] = Complex64::new(1.0, 0.0);
                }
            }
        }
        j
    }
}

fn offsets(widths: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut acc = 0;
    widths
        .map(|w| {
            let o = acc;
            acc += w;
            o
        })
        .collect()
}

/// Groups eigenvalues whose distance is below `tol · max(1, |λ_i|, |λ_j|)`
/// (single linkage). Groups are returned in order of their first member.
fn cluster(lambdas: &[Complex64], tol: f64) -> Result<Vec<Vec<usize>>> {
    let n = lambdas.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let close = |i: usize, j: usize| {
        let scale = 1f64.max(lambdas[i].norm()).max(lambdas[j].norm());
        (lambdas[i] - lambdas[j]).norm() <= tol * scale
    };
    for i in 0..n {
        for j in i + 1..n {
            if close(i, j) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    for g in &groups {
        let scale = g.iter().map(|&i| lambdas[i].norm()).fold(1.0, f64::max);
        let spread = g
            .iter()
            .flat_map(|&i| g.iter().map(move |&j| (lambdas[i] - lambdas[j]).norm()))
            .fold(0.0, f64::max);
        if spread > 10.0 * tol * scale {
            return Err(Error::AmbiguousCluster {
                center: format!("{}", mean(lambdas, g)),
                spread,
                tol,
            });
        }
    }
    Ok(groups)
}

fn mean(lambdas: &[Complex64], idx: &[usize]) -> Complex64 {
    idx.iter().map(|&i| lambdas[i]).sum::<Complex64>() / idx.len() as f64
}

enum ClusterBasis<T> {
    /// `m` independent eigenvectors.
    Semisimple(Vec<DVector<T>>),
    /// One chain `v_1 … v_m`.
    Chain(Vec<DVector<T>>),
}

fn right_singular_vector<T: ComplexField<RealField = f64>>(v_t: &DMatrix<T>, row: usize) -> DVector<T> {
    v_t.row(row).adjoint()
}

/// Basis for the generalized eigenspace of one cluster given `N = W − μI`.
fn cluster_basis<T>(n_mat: &DMatrix<T>, m: usize, sigma_tol: f64) -> Result<ClusterBasis<T>>
where
    T: ComplexField<RealField = f64> + Copy,
{
    let dim = n_mat.nrows();
    let svd = n_mat
        .clone()
        .try_svd(false, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let v_t = svd.v_t.expect("v_t requested");
    let g = svd.singular_values.iter().filter(|&&s| s <= sigma_tol).count();

    if g == m {
        let vecs = (dim - m..dim).map(|r| right_singular_vector(&v_t, r)).collect();
        return Ok(ClusterBasis::Semisimple(vecs));
    }
    if g != 1 {
        return Err(Error::UnsupportedJordanStructure(format!(
            "cluster of multiplicity {m} has {g} independent eigenvectors; only fully defective or semisimple clusters are handled"
        )));
    }

    let mut pow = n_mat.clone();
    for _ in 1..m {
        pow = &pow * n_mat;
    }
    let kernel = pow
        .try_svd(false, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?
        .v_t
        .expect("v_t requested");
    let z = DMatrix::from_columns(&(dim - m..dim).map(|r| right_singular_vector(&kernel, r)).collect::<Vec<_>>());

    // Pick the kernel vector that survives m−1 applications of N best.
    let mut lift = z.clone();
    for _ in 1..m {
        lift = n_mat * lift;
    }
    let coeffs = lift
        .try_svd(false, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?
        .v_t
        .expect("v_t requested");
    let top = z * right_singular_vector(&coeffs, 0);

    let mut chain = vec![top];
    for _ in 1..m {
        let next = n_mat * chain.last().expect("non-empty");
        chain.push(next);
    }
    chain.reverse();
    Ok(ClusterBasis::Chain(chain))
}

/// Computes a complex Jordan basis of `w`, merging eigenvalue clusters.
pub fn jordan_basis(w: &DMatrix<f64>, tol: f64) -> Result<JordanBasis> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::invalid(format!("clustering tolerance must be positive, got {tol}")));
    }
    let n = w.nrows();
    let decomp = eigendecompose(w, &DVector::zeros(n))?;
    let groups = cluster(&decomp.lambdas, tol)?;
    let w_norm = if n == 0 { 0.0 } else { w.clone().singular_values().max() };
    let sigma_tol = tol.sqrt() * w_norm.max(1.0);

    let mut lambdas = Vec::new();
    let mut sizes = Vec::new();
    let mut partner = Vec::new();
    let mut columns: Vec<DVector<Complex64>> = Vec::new();
    let mut push_block = |lambda: Complex64, vecs: Vec<DVector<Complex64>>, conj: bool| {
        let own = lambdas.len();
        let m = vecs.len();
        lambdas.push(lambda);
        sizes.push(m);
        partner.push(None);
        if conj {
            lambdas.push(lambda.conj());
            sizes.push(m);
            partner.push(Some(own));
            partner[own] = Some(own + 1);
            columns.extend(vecs.iter().cloned());
            columns.extend(vecs.iter().map(|v| v.map(|z| z.conj())));
        } else {
            columns.extend(vecs);
        }
    };

    for g in &groups {
        let mu = mean(&decomp.lambdas, g);
        let threshold = tol * mu.norm().max(1.0);
        let real = mu.im.abs() <= 0.5 * threshold;
        if !real && mu.im < 0.0 {
            continue;
        }
        if g.len() == 1 {
            let v = decomp.v.column(g[0]).into_owned();
            push_block(decomp.lambdas[g[0]], vec![v], !real);
            continue;
        }
        let m = g.len();
        if real {
            let n_mat = w - DMatrix::identity(n, n) * mu.re;
            let lambda = Complex64::new(mu.re, 0.0);
            match cluster_basis(&n_mat, m, sigma_tol)? {
                ClusterBasis::Semisimple(vecs) => {
                    for v in vecs {
                        push_block(lambda, vec![linalg::to_complex(&v)], false);
                    }
                }
                ClusterBasis::Chain(chain) => {
                    push_block(lambda, chain.iter().map(linalg::to_complex).collect(), false);
                }
            }
        } else {
            // The cluster and its conjugate each hold m eigenvalues.
            let n_mat = w.map(|v| Complex64::new(v, 0.0)) - DMatrix::<Complex64>::identity(n, n) * mu;
            match cluster_basis(&n_mat, m, sigma_tol)? {
                ClusterBasis::Semisimple(vecs) => {
                    for v in vecs {
                        push_block(mu, vec![v], true);
                    }
                }
                ClusterBasis::Chain(chain) => push_block(mu, chain, true),
            }
        }
    }

    if columns.len() != n {
        return Err(Error::Numerical(format!(
            "Jordan basis has {} columns for a {n}x{n} matrix (unpaired conjugate clusters)",
            columns.len()
        )));
    }
    let v = if n == 0 { DMatrix::zeros(0, 0) } else { DMatrix::from_columns(&columns) };
    let condition = linalg::condition_number(&v);
    Ok(JordanBasis { lambdas, sizes, partner, v, condition })
}

/// Coefficients `c` of the upper triangular Toeplitz `B` with `B · y = x`.
fn toeplitz_coefficients(x: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
    let m = x.len();
    let last = y[m - 1];
    let mut c: Vec<Complex64> = Vec::with_capacity(m);
    for k in 0..m {
        let mut acc = x[m - 1 - k];
        for (l, cl) in c.iter().enumerate() {
            acc -= cl * y[m - 1 - k + l];
        }
        c.push(acc / last);
    }
    c
}

/// `V_b · B` for an upper triangular Toeplitz `B` with first row `c`.
fn times_toeplitz(v_b: &DMatrix<Complex64>, c: &[Complex64]) -> DMatrix<Complex64> {
    let m = c.len();
    DMatrix::from_fn(v_b.nrows(), m, |r, j| (0..=j).map(|i| v_b[(r, i)] * c[j - i]).sum())
}

/// Rebases the start vector: returns `A = V · (⊕ B_b)` with `Wᵗ · x0 = A · Jᵗ · y`
/// for all `t ≥ 0`, where each `B_b` is upper triangular Toeplitz (and thus
/// commutes with the Jordan block) and solves `B_b · y_b = x_b`, `x = V⁻¹ x0`.
pub fn rebase_start(basis: &JordanBasis, x0: &DVector<f64>, y: &DVector<Complex64>) -> Result<DMatrix<Complex64>> {
    let n = basis.v.ncols();
    if x0.len() != n || y.len() != n {
        return Err(Error::dims(format!(
            "basis has {n} columns, x0 has {}, y has {}",
            x0.len(),
            y.len()
        )));
    }
    if y.iter().any(|z| z.norm() == 0.0) {
        return Err(Error::invalid("rebase vector y must have only non-zero entries"));
    }
    let x = linalg::solve_complex(&basis.v, &linalg::to_complex(x0));
    let mut a = DMatrix::zeros(n, n);
    for (b, off) in basis.offsets().into_iter().enumerate() {
        let m = basis.sizes[b];
        let c = toeplitz_coefficients(&x.as_slice()[off..off + m], &y.as_slice()[off..off + m]);
        let v_b = basis.v.columns(off, m).into_owned();
        a.columns_mut(off, m).copy_from(&times_toeplitz(&v_b, &c));
    }
    Ok(a)
}

/// Real Jordan decomposition of a network with rebased start vector `y = 1`:
/// the output rows of `Wᵗ · x0` equal `a · Jᵗ · y` where `J` is the block
/// diagonal matrix of `blocks`.
#[derive(Debug, Clone)]
pub struct JordanForm {
    pub blocks: Vec<RealJordanBlock>,
    /// Rebased basis rows (output rows only, unless all rows were requested).
    pub a: DMatrix<f64>,
    pub y: DVector<f64>,
    /// Condition number of the underlying complex Jordan basis.
    pub condition: f64,
}

impl JordanForm {
    /// Total state width `N`.
    pub fn width(&self) -> usize {
        self.y.len()
    }

    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn offsets(&self) -> Vec<usize> {
        offsets(self.blocks.iter().map(|b| b.width()))
    }

    /// The dense real Jordan matrix.
    pub fn jordan_matrix(&self) -> DMatrix<f64> {
        let n = self.width();
        let mut j = DMatrix::zeros(n, n);
        for (b, off) in self.blocks.iter().zip(self.offsets()) {
            for (r, c, v) in b.entries() {
                j[(off + r, off + c)] = v;
            }
        }
        j
    }

    /// Keeps the first `d` rows of `a`.
    pub fn output_rows(&self, d: usize) -> Result<JordanForm> {
        if d == 0 || d > self.rows() {
            return Err(Error::dims(format!("cannot take {d} rows of a {}-row form", self.rows())));
        }
        Ok(JordanForm { a: self.a.rows(0, d).into_owned(), ..self.clone() })
    }

    /// `J_bᵗ · y_b` for `t = 0..steps`, one column per step.
    pub fn block_states(&self, block: usize, steps: usize) -> DMatrix<f64> {
        let b = &self.blocks[block];
        let off = self.offsets()[block];
        let mut s: Vec<f64> = self.y.as_slice()[off..off + b.width()].to_vec();
        let mut out = DMatrix::zeros(b.width(), steps);
        for t in 0..steps {
            out.column_mut(t).copy_from_slice(&s);
            b.apply(&mut s);
        }
        out
    }

    /// Contribution `A_b · J_bᵗ · y_b` of one block, `rows × steps`.
    pub fn contribution(&self, block: usize, steps: usize) -> DMatrix<f64> {
        let off = self.offsets()[block];
        let w = self.blocks[block].width();
        self.a.columns(off, w) * self.block_states(block, steps)
    }

    /// `A · Jᵗ · y` for `t = 0..steps`.
    pub fn trajectory(&self, steps: usize) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.rows(), steps);
        for b in 0..self.blocks.len() {
            out += self.contribution(b, steps);
        }
        out
    }
}

/// Real Jordan form of `(w, x0)` with all `N` rows of the rebased basis.
pub fn real_jordan(w: &DMatrix<f64>, x0: &DVector<f64>, tol: f64) -> Result<JordanForm> {
    if !w.is_square() || x0.len() != w.nrows() {
        return Err(Error::dims(format!("matrix {:?} with start vector of length {}", w.shape(), x0.len())));
    }
    let basis = jordan_basis(w, tol)?;
    let n = w.nrows();

    // Complex start per block: ones for real blocks, (1 − i)·ones for the
    // Im > 0 member of a pair (so that its real coordinates start at ones).
    // Conjugate members are only needed for the solve and get ones.
    let mut y_c = DVector::from_element(n, Complex64::new(1.0, 0.0));
    let offs = basis.offsets();
    for (b, &off) in offs.iter().enumerate() {
        if basis.lambdas[b].im > 0.0 {
            for i in 0..basis.sizes[b] {
                y_c[off + i] = Complex64::new(1.0, -1.0);
            }
        }
    }
    let a_c = rebase_start(&basis, x0, &y_c)?;

    let mut blocks = Vec::new();
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(n);
    for (b, &off) in offs.iter().enumerate() {
        let m = basis.sizes[b];
        let lambda = basis.lambdas[b];
        match basis.partner[b] {
            None => {
                blocks.push(RealJordanBlock::real(lambda.re, m));
                for i in 0..m {
                    cols.push(a_c.column(off + i).map(|z| z.re));
                }
            }
            Some(_) if lambda.im > 0.0 => {
                blocks.push(RealJordanBlock::pair(lambda, m));
                for i in 0..m {
                    let col = a_c.column(off + i);
                    cols.push(col.map(|z| 2.0 * z.re));
                    cols.push(col.map(|z| 2.0 * z.im));
                }
            }
            Some(_) => {}
        }
    }
    let a = if n == 0 { DMatrix::zeros(0, 0) } else { DMatrix::from_columns(&cols) };
    Ok(JordanForm { blocks, a, y: DVector::from_element(n, 1.0), condition: basis.condition })
}

/// Real Jordan form of a network restricted to its `d` output rows.
pub fn real_jordan_model(model: &PrnnModel, tol: f64) -> Result<JordanForm> {
    real_jordan(&model.w, &model.x0, tol)?.output_rows(model.d)
}
