//! Gauss–Legendre rules applied span by span over a knot sequence.

use gauss_quad::GaussLegendre;

/// A Gauss–Legendre rule that can be laid over consecutive knot spans.
#[derive(Debug, Clone)]
pub struct SpanQuadrature {
    rule: GaussLegendre,
}

impl SpanQuadrature {
    /// Rule with `nodes` points per span (at least 2; the backing rule has no 1-point form).
    pub fn new(nodes: usize) -> Self {
        let rule = GaussLegendre::new(nodes.max(2)).expect("node count is at least 2");
        Self { rule }
    }

    pub fn nodes(&self) -> usize {
        self.rule.as_node_weight_pairs().len()
    }

    /// Mapped nodes and weights on `[lo, hi]`.
    pub fn points(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.rule
            .as_node_weight_pairs()
            .iter()
            .map(move |&(x, w)| (mid + half * x, half * w))
    }

    /// Integrate `f` over `[breaks[0], breaks[last]]`, one rule per interval between
    /// consecutive distinct break points.
    pub fn integrate<F>(&self, breaks: &[f64], mut f: F) -> f64
    where
        F: FnMut(f64) -> f64,
    {
        breaks
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| self.points(w[0], w[1]).map(|(x, wt)| wt * f(x)).sum::<f64>())
            .sum()
    }

    /// Like [`integrate`](Self::integrate), but each span is bisected until the rule on the
    /// halves agrees with the rule on the whole to `rel_tol` times the magnitude of the
    /// unrefined total, or `max_depth` bisections are reached.
    pub fn integrate_adaptive<F>(&self, breaks: &[f64], rel_tol: f64, max_depth: u32, mut f: F) -> f64
    where
        F: FnMut(f64) -> f64,
    {
        let spans: Vec<(f64, f64, f64)> = breaks
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| (w[0], w[1], self.span(w[0], w[1], &mut f)))
            .collect();
        let tol = rel_tol * spans.iter().map(|s| s.2.abs()).sum::<f64>();
        spans
            .into_iter()
            .map(|(lo, hi, whole)| self.refine(lo, hi, whole, tol, max_depth, &mut f))
            .sum()
    }

    fn span<F: FnMut(f64) -> f64>(&self, lo: f64, hi: f64, f: &mut F) -> f64 {
        self.points(lo, hi).map(|(x, wt)| wt * f(x)).sum()
    }

    fn refine<F: FnMut(f64) -> f64>(
        &self,
        lo: f64,
        hi: f64,
        whole: f64,
        tol: f64,
        depth: u32,
        f: &mut F,
    ) -> f64 {
        let mid = 0.5 * (lo + hi);
        let left = self.span(lo, mid, f);
        let right = self.span(mid, hi, f);
        let split = left + right;
        if depth == 0 || (split - whole).abs() <= tol {
            return split;
        }
        self.refine(lo, mid, left, tol, depth - 1, f) + self.refine(mid, hi, right, tol, depth - 1, f)
    }
}
