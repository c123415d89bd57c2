//! Solving consistent symmetric systems with regular, generalized and minimum-norm
//! generalized inverses.
//!
//! Numerical rank is taken from the singular values: `σ_i > rcond · σ_max`. A system is
//! consistent when its residual satisfies
//! `‖A x − rhs‖ ≤ tol · (‖A‖ ‖x‖ + ‖rhs‖)` (Frobenius norm for `A`). Inconsistent
//! systems are reported as [`Error::Inconsistent`] rather than answered in the
//! least-squares sense.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const DEFAULT_RCOND: f64 = 1e-10;
pub const DEFAULT_CONSISTENCY_TOL: f64 = 1e-8;

const REFINEMENT_STEPS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub rcond: f64,
    pub consistency_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { rcond: DEFAULT_RCOND, consistency_tol: DEFAULT_CONSISTENCY_TOL }
    }
}

impl SolveOptions {
    pub fn with_rcond(rcond: f64) -> Self {
        Self { rcond, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InverseKind {
    Regular,
    Generalized,
    MinimumNorm,
}

impl InverseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            InverseKind::Regular => "regular",
            InverseKind::Generalized => "generalized",
            InverseKind::MinimumNorm => "minimum_norm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub rank: usize,
    pub consistent: bool,
    pub residual_norm: f64,
    pub inverse_kind: InverseKind,
    pub rcond_used: f64,
}

/// Square system `A x = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    matrix: DMatrix<f64>,
    rhs: DVector<f64>,
}

impl LinearSystem {
    pub fn new(matrix: DMatrix<f64>, rhs: DVector<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "system matrix must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() != rhs.len() {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} rows but right-hand side has {} entries",
                matrix.nrows(),
                rhs.len()
            )));
        }
        Ok(Self { matrix, rhs })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.rhs
    }
}

/// Thin orthogonal factorization `A = U Σ Vᵀ` truncated at the numerical rank.
#[derive(Debug, Clone)]
pub struct RankFactorization {
    pub u: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    pub v_t: DMatrix<f64>,
    pub rank: usize,
    pub sigma_max: f64,
}

impl RankFactorization {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.u * DMatrix::from_diagonal(&self.singular_values) * &self.v_t
    }

    /// Moore–Penrose inverse `V Σ⁻¹ Uᵀ` at the numerical rank.
    pub fn pseudo_inverse(&self) -> DMatrix<f64> {
        let inv = self.singular_values.map(|s| 1.0 / s);
        self.v_t.transpose() * DMatrix::from_diagonal(&inv) * self.u.transpose()
    }
}

fn sorted_indices(values: &DVector<f64>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    order
}

fn check_inputs(matrix: &DMatrix<f64>, rcond: f64) -> Result<()> {
    if !(rcond > 0.0 && rcond < 1.0) {
        return Err(Error::InvalidInput(format!("rcond must lie in (0, 1), got {rcond}")));
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    Ok(())
}

pub fn rank_factorize(matrix: &DMatrix<f64>, rcond: f64) -> Result<RankFactorization> {
    check_inputs(matrix, rcond)?;
    let (m, n) = matrix.shape();
    let (u, sv, v_t) = orthogonal_decomposition(matrix);
    let order = sorted_indices(&sv);
    let sigma_max = order.first().map_or(0.0, |&i| sv[i]);
    let kept: Vec<usize> = order.into_iter().filter(|&i| sv[i] > rcond * sigma_max).collect();
    let rank = kept.len();
    let mut u_r = DMatrix::zeros(m, rank);
    let mut v_t_r = DMatrix::zeros(rank, n);
    let mut s_r = DVector::zeros(rank);
    for (c, &i) in kept.iter().enumerate() {
        u_r.set_column(c, &u.column(i));
        v_t_r.set_row(c, &v_t.row(i));
        s_r[c] = sv[i];
    }
    Ok(RankFactorization { u: u_r, singular_values: s_r, v_t: v_t_r, rank, sigma_max })
}

/// Orthonormal basis (as columns) of the numerical null space of a square matrix.
pub fn null_space(matrix: &DMatrix<f64>, rcond: f64) -> Result<DMatrix<f64>> {
    check_inputs(matrix, rcond)?;
    let n = matrix.ncols();
    let (_, sv, v_t) = orthogonal_decomposition(matrix);
    let sigma_max = sv.max();
    let cols: Vec<DVector<f64>> = (0..sv.len())
        .filter(|&i| sv[i] <= rcond * sigma_max)
        .map(|i| v_t.row(i).transpose())
        .collect();
    Ok(if cols.is_empty() { DMatrix::zeros(n, 0) } else { DMatrix::from_columns(&cols) })
}

/// Unsorted `(U, σ, Vᵀ)` with `A = U diag(σ) Vᵀ`.
///
/// Symmetric input goes through the symmetric eigendecomposition (`σ = |λ|`, signs folded
/// into `U`). nalgebra's bidiagonal SVD occasionally returns a wrong factorization for
/// square matrices with a large null space; when its reconstruction is off, the SVD is read
/// off the symmetric embedding `[0 A; Aᵀ 0]` instead.
fn orthogonal_decomposition(matrix: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let norm = matrix.norm();
    let tol = 1e-12 * norm.max(f64::MIN_POSITIVE);
    if matrix.is_square() && (matrix - matrix.transpose()).norm() <= 1e-14 * norm {
        let sym = 0.5 * (matrix + matrix.transpose());
        let eig = sym.symmetric_eigen();
        let v_t = eig.eigenvectors.transpose();
        let mut u = eig.eigenvectors;
        for (j, lambda) in eig.eigenvalues.iter().enumerate() {
            if *lambda < 0.0 {
                u.column_mut(j).neg_mut();
            }
        }
        return (u, eig.eigenvalues.abs(), v_t);
    }
    let svd = matrix.clone().svd(true, true);
    let (u, v_t) = (svd.u.expect("requested U"), svd.v_t.expect("requested V"));
    let sv = svd.singular_values;
    if (&u * DMatrix::from_diagonal(&sv) * &v_t - matrix).norm() <= tol {
        return (u, sv, v_t);
    }
    embedded_svd(matrix)
}

fn embedded_svd(matrix: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let (m, n) = matrix.shape();
    let mut big = DMatrix::zeros(m + n, m + n);
    big.view_mut((0, m), (m, n)).copy_from(matrix);
    big.view_mut((m, 0), (n, m)).copy_from(&matrix.transpose());
    let eig = big.symmetric_eigen();
    // eigenpairs (±σ, (u; ±v)/√2); keep the min(m, n) largest
    let p = m.min(n);
    let order = sorted_indices(&eig.eigenvalues);
    let mut u = DMatrix::zeros(m, p);
    let mut v_t = DMatrix::zeros(p, n);
    let mut sv = DVector::zeros(p);
    for (c, &i) in order.iter().take(p).enumerate() {
        let col = eig.eigenvectors.column(i);
        sv[c] = eig.eigenvalues[i].max(0.0);
        let (cu, cv) = (col.rows(0, m).into_owned(), col.rows(m, n).into_owned());
        let (nu, nv) = (cu.norm(), cv.norm());
        if nu > 0.0 && nv > 0.0 {
            u.set_column(c, &(cu / nu));
            v_t.set_row(c, &(cv / nv).transpose());
        }
    }
    (u, sv, v_t)
}

/// A generalized inverse `A⁻` with `A A⁻ A = A`.
///
/// Full-rank input gives `A⁻¹`. Otherwise a non-singular `rank × rank` submatrix is picked
/// by LU factorization with complete pivoting; its inverse is placed at the pivot positions
/// and every other entry of `A⁻` is zero.
pub fn generalized_inverse(matrix: &DMatrix<f64>, opts: &SolveOptions) -> Result<DMatrix<f64>> {
    let fact = rank_factorize(matrix, opts.rcond)?;
    let n = matrix.nrows();
    if fact.rank == n {
        if let Some(inv) = matrix.clone().try_inverse() {
            return Ok(inv);
        }
    }
    let mut columns = Vec::with_capacity(n);
    for j in 0..n {
        let e = DVector::from_fn(n, |i, _| if i == j { 1.0 } else { 0.0 });
        columns.push(basic_solution(matrix, &e, fact.rank));
    }
    Ok(DMatrix::from_columns(&columns))
}

/// The minimum-norm generalized inverse (here the Moore–Penrose inverse).
pub fn min_norm_inverse(matrix: &DMatrix<f64>, opts: &SolveOptions) -> Result<DMatrix<f64>> {
    Ok(rank_factorize(matrix, opts.rcond)?.pseudo_inverse())
}

// With P A Q = L U from complete pivoting, the leading rank×rank block is inverted and
// the remaining unknowns are set to zero.
fn basic_solution(matrix: &DMatrix<f64>, rhs: &DVector<f64>, rank: usize) -> DVector<f64> {
    let n = matrix.ncols();
    if rank == 0 {
        return DVector::zeros(n);
    }
    let lu = matrix.clone().full_piv_lu();
    let mut permuted = rhs.clone();
    lu.p().permute_rows(&mut permuted);
    let l11 = lu.l().view((0, 0), (rank, rank)).into_owned();
    let u11 = lu.u().view((0, 0), (rank, rank)).into_owned();
    let top = permuted.rows(0, rank).into_owned();
    let z = l11
        .solve_lower_triangular(&top)
        .and_then(|y| u11.solve_upper_triangular(&y))
        .unwrap_or_else(|| DVector::zeros(rank));
    let mut x = DVector::zeros(n);
    x.rows_mut(0, rank).copy_from(&z);
    lu.q().inv_permute_rows(&mut x);
    x
}

fn finish(
    sys: &LinearSystem,
    solution: DVector<f64>,
    rank: usize,
    inverse_kind: InverseKind,
    opts: &SolveOptions,
) -> Result<(DVector<f64>, SolveReport)> {
    let residual_norm = (sys.matrix() * &solution - sys.rhs()).norm();
    let bound =
        opts.consistency_tol * (sys.matrix().norm() * solution.norm() + sys.rhs().norm());
    let report = SolveReport {
        rank,
        consistent: residual_norm <= bound,
        residual_norm,
        inverse_kind,
        rcond_used: opts.rcond,
    };
    if report.consistent {
        Ok((solution, report))
    } else {
        Err(Error::Inconsistent(report))
    }
}

/// Solve with a generalized inverse; the unique solution when `A` is regular.
pub fn solve_generalized(
    sys: &LinearSystem,
    opts: &SolveOptions,
) -> Result<(DVector<f64>, SolveReport)> {
    if sys.rhs().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("right-hand side has non-finite entries".into()));
    }
    let fact = rank_factorize(sys.matrix(), opts.rcond)?;
    let n = sys.matrix().nrows();
    if fact.rank == n {
        if let Some(x) = sys.matrix().clone().lu().solve(sys.rhs()) {
            return finish(sys, x, fact.rank, InverseKind::Regular, opts);
        }
    }
    let x = basic_solution(sys.matrix(), sys.rhs(), fact.rank);
    finish(sys, x, fact.rank, InverseKind::Generalized, opts)
}

/// Solve with the minimum-norm generalized inverse: the solution of smallest Euclidean norm.
pub fn solve_min_norm(
    sys: &LinearSystem,
    opts: &SolveOptions,
) -> Result<(DVector<f64>, SolveReport)> {
    if sys.rhs().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("right-hand side has non-finite entries".into()));
    }
    let fact = rank_factorize(sys.matrix(), opts.rcond)?;
    let n = sys.matrix().nrows();
    if fact.rank == n {
        if let Some(x) = sys.matrix().clone().lu().solve(sys.rhs()) {
            return finish(sys, x, fact.rank, InverseKind::Regular, opts);
        }
    }
    let apply = |v: &DVector<f64>| {
        fact.v_t.transpose() * (fact.u.transpose() * v).component_div(&fact.singular_values)
    };
    let mut x = apply(sys.rhs());
    // corrections stay in the row space, so refinement keeps the minimum-norm property
    let mut residual = (sys.rhs() - sys.matrix() * &x).norm();
    for _ in 0..REFINEMENT_STEPS {
        let candidate = &x + apply(&(sys.rhs() - sys.matrix() * &x));
        let r = (sys.rhs() - sys.matrix() * &candidate).norm();
        if r >= residual {
            break;
        }
        x = candidate;
        residual = r;
    }
    finish(sys, x, fact.rank, InverseKind::MinimumNorm, opts)
}
