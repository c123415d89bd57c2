//! B-spline spaces on a bounded interval with clamped boundary knots.
//!
//! Basis functions follow the usual indexing `B_i^{d+1}`, `i = -d, …, g`, where `g` is the
//! number of interior knots. In this crate every basis index is stored 0-based: column `c`
//! of a degree-`d` collocation matrix holds `B_{c-d}^{d+1}`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::quadrature::SpanQuadrature;

/// Largest spline degree accepted by [`KnotConfig`].
pub const MAX_DEGREE: usize = 10;

/// Interval endpoints, interior knots and spline degree.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotConfig {
    a: f64,
    b: f64,
    interior: Vec<f64>,
    degree: usize,
}

impl KnotConfig {
    pub fn new(a: f64, b: f64, interior: Vec<f64>, degree: usize) -> Result<Self> {
        if !(1..=MAX_DEGREE).contains(&degree) {
            return Err(Error::InvalidConfig(format!(
                "degree must lie in 1..={MAX_DEGREE}, got {degree}"
            )));
        }
        if !a.is_finite() || !b.is_finite() || interior.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("knots must be finite".into()));
        }
        let mut prev = a;
        for &knot in interior.iter().chain(std::iter::once(&b)) {
            if knot <= prev {
                return Err(Error::InvalidConfig(format!(
                    "knots must be strictly increasing: {knot} follows {prev}"
                )));
            }
            prev = knot;
        }
        Ok(Self { a, b, interior, degree })
    }

    /// Build from the full break sequence `a, λ_1, …, λ_g, b`.
    pub fn from_breakpoints(breaks: &[f64], degree: usize) -> Result<Self> {
        if breaks.len() < 2 {
            return Err(Error::InvalidConfig(
                "at least the two interval endpoints are required".into(),
            ));
        }
        let last = breaks.len() - 1;
        Self::new(breaks[0], breaks[last], breaks[1..last].to_vec(), degree)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn interior(&self) -> &[f64] {
        &self.interior
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
}

/// `λ_{-k}, …, λ_{g+k+1}` with `k+1` coincident copies of each endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedKnotVector {
    knots: Vec<f64>,
}

impl ExtendedKnotVector {
    fn clamped(config: &KnotConfig) -> Self {
        let k = config.degree;
        let mut knots = Vec::with_capacity(config.interior.len() + 2 * k + 2);
        knots.extend(std::iter::repeat_n(config.a, k + 1));
        knots.extend_from_slice(&config.interior);
        knots.extend(std::iter::repeat_n(config.b, k + 1));
        Self { knots }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.knots
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }
}

/// The spline space `S_k` over a clamped knot vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineSpace {
    config: KnotConfig,
    extended: ExtendedKnotVector,
    breaks: Vec<f64>,
    dim: usize,
}

impl SplineSpace {
    pub fn new(config: KnotConfig) -> Self {
        let extended = ExtendedKnotVector::clamped(&config);
        let mut breaks = Vec::with_capacity(config.interior.len() + 2);
        breaks.push(config.a);
        breaks.extend_from_slice(&config.interior);
        breaks.push(config.b);
        let dim = config.interior.len() + config.degree + 1;
        Self { config, extended, breaks, dim }
    }

    pub fn config(&self) -> &KnotConfig {
        &self.config
    }

    pub fn extended_knots(&self) -> &ExtendedKnotVector {
        &self.extended
    }

    pub fn degree(&self) -> usize {
        self.config.degree
    }

    pub fn a(&self) -> f64 {
        self.config.a
    }

    pub fn b(&self) -> f64 {
        self.config.b
    }

    /// Number of interior knots `g`.
    pub fn interior_count(&self) -> usize {
        self.config.interior.len()
    }

    /// Dimension `g + k + 1`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of B-splines of degree `d` on the same knots.
    pub fn dim_for_degree(&self, d: usize) -> usize {
        self.interior_count() + d + 1
    }

    /// `a, λ_1, …, λ_g, b`.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    /// Knot `λ_i` in signed indexing; `-k ≤ i ≤ g+k+1`.
    pub fn knot(&self, i: isize) -> f64 {
        let k = self.degree() as isize;
        self.extended.knots[(i + k) as usize]
    }

    /// Support length `λ_{i+d+1} - λ_i` of each degree-`d` B-spline, in column order.
    pub fn support_lengths(&self, d: usize) -> Vec<f64> {
        let d_signed = d as isize;
        (0..self.dim_for_degree(d))
            .map(|c| {
                let i = c as isize - d_signed;
                self.knot(i + d_signed + 1) - self.knot(i)
            })
            .collect()
    }

    fn check_degree(&self, d: usize) -> Result<()> {
        if d > self.degree() {
            return Err(Error::InvalidInput(format!(
                "basis degree {d} exceeds space degree {}",
                self.degree()
            )));
        }
        Ok(())
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        if !(x >= self.a() && x <= self.b()) {
            return Err(Error::OutOfDomain { x, a: self.a(), b: self.b() });
        }
        Ok(())
    }

    /// Index `μ ∈ 0..=g` of the break interval `[λ_μ, λ_{μ+1})` containing `x`; the last
    /// interval is closed on the right.
    pub fn span(&self, x: f64) -> Result<usize> {
        self.check_domain(x)?;
        let above = self.breaks.partition_point(|&t| t <= x);
        Ok((above - 1).min(self.interior_count()))
    }

    /// Values of the `d+1` degree-`d` B-splines that can be non-zero at `x`.
    ///
    /// Returns the column of the first one together with the values; column `first + r`
    /// holds entry `r`.
    pub fn nonzero_basis(&self, d: usize, x: f64) -> Result<(usize, Vec<f64>)> {
        self.check_degree(d)?;
        let mu = self.span(x)?;
        Ok((mu, self.nonzero_basis_in_span(d, mu, x)))
    }

    // Triangular Cox–de Boor recursion on the degree-d clamped knots.
    fn nonzero_basis_in_span(&self, d: usize, mu: usize, x: f64) -> Vec<f64> {
        let mu = mu as isize;
        let mut values = vec![0.0; d + 1];
        let mut left = vec![0.0; d + 1];
        let mut right = vec![0.0; d + 1];
        values[0] = 1.0;
        for j in 1..=d {
            left[j] = x - self.knot(mu + 1 - j as isize);
            right[j] = self.knot(mu + j as isize) - x;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = values[r] / (right[r + 1] + left[j - r]);
                values[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            values[j] = saved;
        }
        values
    }

    /// `B^{d+1}` with 0-based column `index` (that is `B_{index-d}^{d+1}`) at `x`.
    pub fn basis_value(&self, d: usize, index: usize, x: f64) -> Result<f64> {
        self.check_degree(d)?;
        if index >= self.dim_for_degree(d) {
            return Err(Error::InvalidInput(format!(
                "basis index {index} out of range for degree {d} (dimension {})",
                self.dim_for_degree(d)
            )));
        }
        let (first, values) = self.nonzero_basis(d, x)?;
        Ok(if index >= first && index <= first + d {
            values[index - first]
        } else {
            0.0
        })
    }

    /// Collocation matrix `C_{d+1}(x)`: row `r` holds every degree-`d` B-spline at `xs[r]`.
    pub fn collocation_matrix(&self, d: usize, xs: &[f64]) -> Result<DMatrix<f64>> {
        self.check_degree(d)?;
        let mut c = DMatrix::zeros(xs.len(), self.dim_for_degree(d));
        for (row, &x) in xs.iter().enumerate() {
            let (first, values) = self.nonzero_basis(d, x)?;
            for (r, v) in values.into_iter().enumerate() {
                c[(row, first + r)] = v;
            }
        }
        Ok(c)
    }

    /// `S_l = D_l L_l ⋯ D_1 L_1`, mapping degree-`k` coefficients to the coefficients of the
    /// `l`-th derivative in the degree-`(k-l)` basis.
    ///
    /// `l = k` is accepted as an extension; the derivative is then piecewise constant.
    pub fn derivative_operator(&self, order: usize) -> Result<DMatrix<f64>> {
        self.derivative_operator_for_degree(self.degree(), order)
    }

    pub(crate) fn derivative_operator_for_degree(
        &self,
        d: usize,
        order: usize,
    ) -> Result<DMatrix<f64>> {
        self.check_degree(d)?;
        if order < 1 || order > d {
            return Err(Error::InvalidOrder { order, min: 1, max: d });
        }
        let d_signed = d as isize;
        let mut s = DMatrix::identity(self.dim_for_degree(d), self.dim_for_degree(d));
        for j in 1..=order {
            let rows = self.dim_for_degree(d - j);
            let scale = (d + 1 - j) as f64;
            let mut step = DMatrix::zeros(rows, rows + 1);
            for r in 0..rows {
                let i = r as isize - d_signed + j as isize;
                let gap = self.knot(i + d_signed + 1 - j as isize) - self.knot(i);
                if gap <= 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "zero knot gap in derivative step {j}, row {r}"
                    )));
                }
                step[(r, r)] = -scale / gap;
                step[(r, r + 1)] = scale / gap;
            }
            s = step * s;
        }
        Ok(s)
    }

    /// Gram matrix of the degree-`(k-l)` B-splines.
    ///
    /// Uses `k-l+1` Gauss–Legendre nodes per knot span, which is exact for these
    /// piecewise polynomial products.
    pub fn gram_matrix(&self, order: usize) -> Result<GramMatrix> {
        let k = self.degree();
        if order > k {
            return Err(Error::InvalidOrder { order, min: 0, max: k });
        }
        self.gram_matrix_with_nodes(order, k - order + 1)
    }

    /// Same as [`gram_matrix`](Self::gram_matrix) with an explicit node count per span.
    pub fn gram_matrix_with_nodes(&self, order: usize, nodes: usize) -> Result<GramMatrix> {
        let k = self.degree();
        if order > k {
            return Err(Error::InvalidOrder { order, min: 0, max: k });
        }
        let d = k - order;
        let n = self.dim_for_degree(d);
        let quad = SpanQuadrature::new(nodes);
        let mut m = DMatrix::zeros(n, n);
        for (mu, w) in self.breaks.windows(2).enumerate() {
            for (x, wt) in quad.points(w[0], w[1]) {
                let values = self.nonzero_basis_in_span(d, mu, x);
                for (p, vp) in values.iter().enumerate() {
                    for (q, vq) in values.iter().enumerate() {
                        m[(mu + p, mu + q)] += wt * vp * vq;
                    }
                }
            }
        }
        Ok(GramMatrix { matrix: m, degree: d })
    }

    /// Roughness penalty `N_kl = S_lᵀ M_kl S_l`, so that `bᵀ N_kl b = ∫ (s^{(l)})²`.
    pub fn penalty_matrix(&self, order: usize) -> Result<DMatrix<f64>> {
        let s = self.derivative_operator(order)?;
        let m = self.gram_matrix(order)?;
        Ok(s.transpose() * m.matrix() * s)
    }
}

/// Pairwise `L²([a,b])` inner products of B-splines of one degree.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    matrix: DMatrix<f64>,
    degree: usize,
}

impl GramMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Degree `k - l` of the B-splines involved.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }
}

/// A spline of some degree `d ≤ k` over the knots of a [`SplineSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct Spline {
    space: SplineSpace,
    degree: usize,
    coeffs: DVector<f64>,
}

impl Spline {
    /// Spline of the space's own degree.
    pub fn new(space: SplineSpace, coeffs: DVector<f64>) -> Result<Self> {
        let degree = space.degree();
        Self::with_degree(space, degree, coeffs)
    }

    pub fn with_degree(space: SplineSpace, degree: usize, coeffs: DVector<f64>) -> Result<Self> {
        space.check_degree(degree)?;
        let expected = space.dim_for_degree(degree);
        if coeffs.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "expected {expected} coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(Self { space, degree, coeffs })
    }

    pub fn zero(space: SplineSpace) -> Self {
        let n = space.dim();
        let degree = space.degree();
        Self { space, degree, coeffs: DVector::zeros(n) }
    }

    pub fn space(&self) -> &SplineSpace {
        &self.space
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &DVector<f64> {
        &self.coeffs
    }

    pub fn evaluate(&self, x: f64) -> Result<f64> {
        let (first, values) = self.space.nonzero_basis(self.degree, x)?;
        Ok(values
            .iter()
            .enumerate()
            .map(|(r, v)| v * self.coeffs[first + r])
            .sum())
    }

    pub fn evaluate_many(&self, xs: &[f64]) -> Result<Vec<f64>> {
        xs.iter().map(|&x| self.evaluate(x)).collect()
    }

    /// `l`-th derivative as a spline of degree `d - l` on the same knots.
    pub fn differentiate(&self, order: usize) -> Result<Spline> {
        let s = self.space.derivative_operator_for_degree(self.degree, order)?;
        Ok(Spline {
            space: self.space.clone(),
            degree: self.degree - order,
            coeffs: s * &self.coeffs,
        })
    }

    /// Exact integral over `[a, b]`: `Σ_i b_i (λ_{i+d+1} - λ_i) / (d+1)`.
    pub fn integrate(&self) -> f64 {
        let denom = (self.degree + 1) as f64;
        self.space
            .support_lengths(self.degree)
            .iter()
            .zip(self.coeffs.iter())
            .map(|(h, b)| b * h / denom)
            .sum()
    }
}
