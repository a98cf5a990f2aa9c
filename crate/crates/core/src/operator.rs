//! Nystrom discretization of locally trace-class kernels, Fredholm
//! determinants, the Fredholm series with its Hadamard tail bound, the
//! conditioned kernel `K^sigma`, and the generating functional routes.
//!
//! Operators are carried in symmetrized form `A = D_s K D_s` with
//! `s = sqrt(weights)`; multiplication operators become plain diagonals,
//! integral-operator composition becomes matrix multiplication, and all
//! determinants below equal the corresponding `L^2(mu)` determinants.

use crate::error::{CoreError, Result};
use crate::kernels::KernelField;
use crate::measure::MeasureKind;
use crate::quad::QuadratureRule;
use nalgebra::{DMatrix, DVector};

/// Whether the matrix carries a finite-rank kernel exactly or is a
/// quadrature approximation of an infinite-rank operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exactness {
    FiniteRankExact,
    NystromApproximate,
}

/// A kernel restricted to a window and discretized on a grid.
#[derive(Debug, Clone)]
pub struct DiscretizedOperator {
    grid: Vec<f64>,
    sqrt_weights: Vec<f64>,
    matrix: DMatrix<f64>,
    exactness: Exactness,
}

/// Maximum grid size accepted by the dense routines.
const MAX_GRID: usize = 4000;
/// Condition-estimate threshold for declaring `I - sigma K` singular.
const SINGULAR_COND: f64 = 1e12;

impl DiscretizedOperator {
    /// Build directly from grid, weights and kernel values.
    pub fn from_parts(
        grid: Vec<f64>,
        weights: &[f64],
        kernel: impl Fn(f64, f64) -> f64,
        exactness: Exactness,
    ) -> Result<Self> {
        if grid.is_empty() {
            return Err(CoreError::DegenerateOperator("empty grid".into()));
        }
        if grid.len() != weights.len() {
            return Err(CoreError::InvalidParameter(
                "grid and weights must have equal length".into(),
            ));
        }
        if grid.len() > MAX_GRID {
            return Err(CoreError::CostGuard(format!(
                "grid size {} exceeds the dense-solver cap {MAX_GRID}",
                grid.len()
            )));
        }
        let s: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
        let m = grid.len();
        let matrix = DMatrix::from_fn(m, m, |i, j| s[i] * kernel(grid[i], grid[j]) * s[j]);
        Ok(Self {
            grid,
            sqrt_weights: s,
            matrix,
            exactness,
        })
    }

    pub fn size(&self) -> usize {
        self.grid.len()
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn sqrt_weights(&self) -> &[f64] {
        &self.sqrt_weights
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn exactness(&self) -> Exactness {
        self.exactness
    }

    /// Evaluate a function on the grid.
    pub fn values_on_grid(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.grid.iter().map(|&u| f(u)).collect()
    }
}

/// Discretize a kernel on `window`. Continuous measures get a
/// Gauss-Legendre rule of the given order; counting measures keep their
/// nodes inside the window with unit weights and ignore `quad_order`.
pub fn discretize(
    kernel: &KernelField,
    window: (f64, f64),
    quad_order: usize,
) -> Result<DiscretizedOperator> {
    discretize_on_panels(kernel, window, quad_order, &[])
}

/// Like [`discretize`], but the window is split into Gauss-Legendre
/// panels at the given break points (symbol jumps, test-function
/// corners), so no quadrature panel straddles a discontinuity and no
/// node can land on one.
pub fn discretize_on_panels(
    kernel: &KernelField,
    window: (f64, f64),
    quad_order: usize,
    breaks: &[f64],
) -> Result<DiscretizedOperator> {
    if !(window.0.is_finite() && window.1.is_finite() && window.0 < window.1) {
        return Err(CoreError::DegenerateOperator(format!(
            "window must be bounded and non-empty, got {window:?}"
        )));
    }
    let exactness = if kernel.finite_rank().is_some() {
        Exactness::FiniteRankExact
    } else {
        Exactness::NystromApproximate
    };
    match kernel.measure().kind() {
        MeasureKind::ContinuousDensity { density, support } => {
            let lo = window.0.max(support.0);
            let hi = window.1.min(support.1);
            if lo >= hi {
                return Err(CoreError::DegenerateOperator(
                    "window does not intersect the measure support".into(),
                ));
            }
            // panel edges: window ends plus interior breaks
            let mut edges = vec![lo];
            let mut interior: Vec<f64> = breaks
                .iter()
                .copied()
                .filter(|&b| b > lo + 1e-12 && b < hi - 1e-12)
                .collect();
            interior.sort_by(f64::total_cmp);
            interior.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
            edges.extend(interior);
            edges.push(hi);

            let length = hi - lo;
            let order = quad_order.max(1);
            let mut nodes = Vec::new();
            let mut weights = Vec::new();
            for pair in edges.windows(2) {
                let (a, b) = (pair[0], pair[1]);
                let panel_order = (((b - a) / length * order as f64).ceil() as usize).max(6);
                let rule = QuadratureRule::gauss_legendre(panel_order, a, b)?;
                nodes.extend_from_slice(rule.nodes());
                weights.extend(
                    rule.nodes()
                        .iter()
                        .zip(rule.weights())
                        .map(|(&x, &w)| w * density(x)),
                );
            }
            DiscretizedOperator::from_parts(nodes, &weights, |u, v| kernel.eval(u, v), exactness)
        }
        MeasureKind::Counting { nodes } => {
            let selected: Vec<f64> = nodes
                .iter()
                .copied()
                .filter(|&x| window.0 <= x && x <= window.1)
                .collect();
            if selected.is_empty() {
                return Err(CoreError::DegenerateOperator(
                    "window selects no lattice nodes".into(),
                ));
            }
            let weights = vec![1.0; selected.len()];
            DiscretizedOperator::from_parts(selected, &weights, |u, v| kernel.eval(u, v), exactness)
        }
    }
}

fn check_unit_range(psi: &[f64], what: &str) -> Result<()> {
    for &p in psi {
        if !(-1e-12..=1.0 + 1e-12).contains(&p) || !p.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "{what} must take values in [0, 1], found {p}"
            )));
        }
    }
    Ok(())
}

/// `det(I - sqrt(psi) K sqrt(psi))` for symbol values `psi` on the grid.
pub fn fredholm_det(op: &DiscretizedOperator, psi: &[f64]) -> Result<f64> {
    if psi.len() != op.size() {
        return Err(CoreError::InvalidParameter(
            "symbol values must match the grid".into(),
        ));
    }
    check_unit_range(psi, "symbol")?;
    let m = op.size();
    let root: Vec<f64> = psi.iter().map(|&p| p.max(0.0).sqrt()).collect();
    let mut a = DMatrix::<f64>::identity(m, m);
    for i in 0..m {
        for j in 0..m {
            a[(i, j)] -= root[i] * op.matrix[(i, j)] * root[j];
        }
    }
    Ok(a.lu().determinant())
}

/// Partial sums of the Fredholm series and the Hadamard tail bound.
#[derive(Debug, Clone)]
pub struct FredholmSeries {
    /// `S_0 .. S_kmax`; the determinant is `sum_k (-1)^k S_k / k!`.
    pub terms: Vec<f64>,
    /// Bound on `sum_{k > kmax} S_k / k!` from Hadamard's inequality.
    pub tail_bound: f64,
}

impl FredholmSeries {
    /// Alternating partial sum `sum_{k<=kmax} (-1)^k S_k / k!`.
    pub fn determinant_estimate(&self) -> f64 {
        let mut fact = 1.0;
        let mut acc = 0.0;
        for (k, s) in self.terms.iter().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            let term = s / fact;
            acc += if k % 2 == 0 { term } else { -term };
        }
        acc
    }
}

/// Tensor-grid evaluation of the Fredholm series terms
/// `S_k = int det[ sqrt(psi) K sqrt(psi) ]_k dmu^k`, plus the tail bound
/// `sum_{k>kmax} k^{k/2} |Phi|_2^k |Psi|_2^k / k!` for the user-supplied
/// dominators.
///
/// Cost grows combinatorially in `k`; `k_max <= 8` and a grid-size guard
/// are enforced.
pub fn fredholm_series(
    kernel: &KernelField,
    psi: &dyn Fn(f64) -> f64,
    k_max: usize,
    quad: &QuadratureRule,
    dominator_phi: &dyn Fn(f64) -> f64,
    dominator_psi: &dyn Fn(f64) -> f64,
) -> Result<FredholmSeries> {
    if k_max > 8 {
        return Err(CoreError::CostGuard(format!(
            "fredholm_series supports k_max <= 8, got {k_max}"
        )));
    }
    // Grid and weights of the underlying measure.
    let (grid, weights): (Vec<f64>, Vec<f64>) = match kernel.measure().kind() {
        MeasureKind::ContinuousDensity { density, .. } => (
            quad.nodes().to_vec(),
            quad.nodes()
                .iter()
                .zip(quad.weights())
                .map(|(&x, &w)| w * density(x))
                .collect(),
        ),
        MeasureKind::Counting { nodes } => (nodes.clone(), vec![1.0; nodes.len()]),
    };
    let m = grid.len();
    let mut work = 0f64;
    for k in 1..=k_max {
        work += binomial(m, k) * (k * k * k) as f64;
    }
    if work > 2.0e8 {
        return Err(CoreError::CostGuard(format!(
            "series cost {work:.2e} exceeds guard; reduce quadrature order or k_max"
        )));
    }

    let psi_vals: Vec<f64> = grid.iter().map(|&x| psi(x)).collect();
    check_unit_range(&psi_vals, "series symbol")?;
    // B = D_sqrt(psi w) K D_sqrt(psi w); S_k = k! e_k(B).
    let root: Vec<f64> = psi_vals
        .iter()
        .zip(&weights)
        .map(|(&p, &w)| (p.max(0.0) * w).sqrt())
        .collect();
    let b = DMatrix::from_fn(m, m, |i, j| {
        root[i] * kernel.eval(grid[i], grid[j]) * root[j]
    });

    // S_k over ordered k-tuples equals k! times the sum over strictly
    // increasing tuples (repeated indices contribute zero determinants).
    let mut terms = vec![1.0]; // S_0 = 1
    for k in 1..=k_max {
        let mut sum = 0.0;
        if k <= m {
            let mut idx: Vec<usize> = (0..k).collect();
            loop {
                let sub = DMatrix::from_fn(k, k, |r, c| b[(idx[r], idx[c])]);
                sum += sub.lu().determinant();
                if !next_combination(&mut idx, m) {
                    break;
                }
            }
        }
        terms.push(sum * factorial(k));
    }

    // Hadamard tail: sum_{k > kmax} k^{k/2} a^k / k!, a = |Phi|_2 |Psi|_2.
    let phi_l2 = l2_norm(&grid, &weights, dominator_phi);
    let psi_l2 = l2_norm(&grid, &weights, dominator_psi);
    let a = phi_l2 * psi_l2;
    let mut tail = 0.0;
    if a > 0.0 {
        let ln_a = a.ln();
        let mut ln_fact = (1..=k_max).map(|k| (k as f64).ln()).sum::<f64>();
        for k in (k_max + 1)..400 {
            ln_fact += (k as f64).ln();
            let ln_term = 0.5 * k as f64 * (k as f64).ln() + k as f64 * ln_a - ln_fact;
            let term = ln_term.exp();
            tail += term;
            if term < 1e-30 * tail.max(1e-300) {
                break;
            }
        }
    }

    Ok(FredholmSeries {
        terms,
        tail_bound: tail,
    })
}

fn l2_norm(grid: &[f64], weights: &[f64], f: &dyn Fn(f64) -> f64) -> f64 {
    grid.iter()
        .zip(weights)
        .map(|(&x, &w)| {
            let v = f(x);
            w * v * v
        })
        .sum::<f64>()
        .sqrt()
}

fn next_combination(idx: &mut [usize], m: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < m - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn binomial(m: usize, k: usize) -> f64 {
    let mut b = 1.0;
    for i in 0..k {
        b *= (m - i) as f64 / (i + 1) as f64;
    }
    b
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `K^sigma` on the grid, with the condition estimate of the resolvent
/// system that produced it.
#[derive(Debug, Clone)]
pub struct DeformedOperator {
    pub operator: DiscretizedOperator,
    pub condition_estimate: f64,
}

/// Conditioned kernel `K^sigma = sqrt(1-sigma) K (I - sigma K)^{-1}
/// sqrt(1-sigma)` via a dense LU solve with one step of iterative
/// refinement.
pub fn deformed_kernel(op: &DiscretizedOperator, sigma: &[f64]) -> Result<DeformedOperator> {
    if sigma.len() != op.size() {
        return Err(CoreError::InvalidParameter(
            "sigma values must match the grid".into(),
        ));
    }
    check_unit_range(sigma, "sigma")?;
    let m = op.size();
    let a = &op.matrix;

    // N = I - A D_sigma; K (I - sigma K)^{-1} = N^{-1} A by push-through.
    let mut nmat = DMatrix::<f64>::identity(m, m);
    for j in 0..m {
        for i in 0..m {
            nmat[(i, j)] -= a[(i, j)] * sigma[j];
        }
    }
    let norm_n = nmat.norm();
    let lu = nmat.clone().lu();
    let det = lu.determinant();
    if det == 0.0 || !det.is_finite() {
        return Err(CoreError::NumericallySingular {
            cond: f64::INFINITY,
        });
    }
    let mut y = lu.solve(a).ok_or(CoreError::NumericallySingular {
        cond: f64::INFINITY,
    })?;
    // One refinement step.
    let residual = a - &nmat * &y;
    if let Some(corr) = lu.solve(&residual) {
        y += corr;
    }

    // Condition estimate: power iteration for |N^{-1}| through the factors.
    let mut v = DVector::from_element(m, 1.0 / (m as f64).sqrt());
    let mut inv_norm = 0.0;
    for _ in 0..6 {
        if let Some(w) = lu.solve(&v) {
            inv_norm = w.norm();
            if inv_norm == 0.0 {
                break;
            }
            v = w / inv_norm;
        }
    }
    let cond = norm_n * inv_norm;
    if cond > SINGULAR_COND {
        return Err(CoreError::NumericallySingular { cond });
    }

    let comp: Vec<f64> = sigma.iter().map(|&s| (1.0 - s).max(0.0).sqrt()).collect();
    let deformed = DMatrix::from_fn(m, m, |i, j| comp[i] * y[(i, j)] * comp[j]);
    Ok(DeformedOperator {
        operator: DiscretizedOperator {
            grid: op.grid.clone(),
            sqrt_weights: op.sqrt_weights.clone(),
            matrix: deformed,
            exactness: op.exactness,
        },
        condition_estimate: cond,
    })
}

/// Computational route for the deformed generating functional.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgfRoute {
    /// `det(I - [sigma + h - sigma h] K) / det(I - sigma K)`.
    Ratio,
    /// `det(I - sqrt(h) K^sigma sqrt(h))`.
    DeformedKernel,
}

/// Value of a probability generating functional with its diagnostics.
#[derive(Debug, Clone)]
pub struct GeneratingFunctionalValue {
    pub value: f64,
    pub route: PgfRoute,
    /// `det(I - sigma K)`, the well-posedness diagnostic.
    pub det_sigma: f64,
    /// Resolvent condition estimate (deformed-kernel route only).
    pub condition_estimate: Option<f64>,
}

/// Deformed generating functional `G^sigma[h]` by either route.
///
/// The two routes agree identically in exact arithmetic; computing both is
/// the standing cross-check of the deformation algebra.
pub fn pgf_deformed(
    op: &DiscretizedOperator,
    sigma: &[f64],
    h: &[f64],
    route: PgfRoute,
) -> Result<GeneratingFunctionalValue> {
    if sigma.len() != op.size() || h.len() != op.size() {
        return Err(CoreError::InvalidParameter(
            "sigma and h must match the grid".into(),
        ));
    }
    check_unit_range(sigma, "sigma")?;
    check_unit_range(h, "h")?;
    let det_sigma = fredholm_det(op, sigma)?;
    if det_sigma <= 0.0 {
        return Err(CoreError::IllPosedDeformation(det_sigma));
    }
    match route {
        PgfRoute::Ratio => {
            // Fused sigma + h(1 - sigma) keeps the [0,1] range in fp.
            let combined: Vec<f64> = sigma
                .iter()
                .zip(h)
                .map(|(&s, &hh)| (s + hh * (1.0 - s)).clamp(0.0, 1.0))
                .collect();
            let num = fredholm_det(op, &combined)?;
            Ok(GeneratingFunctionalValue {
                value: num / det_sigma,
                route,
                det_sigma,
                condition_estimate: None,
            })
        }
        PgfRoute::DeformedKernel => {
            let def = deformed_kernel(op, sigma)?;
            let value = fredholm_det(&def.operator, h)?;
            Ok(GeneratingFunctionalValue {
                value,
                route,
                det_sigma,
                condition_estimate: Some(def.condition_estimate),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::ReferenceMeasure;
    use approx::assert_abs_diff_eq;

    fn sine_op(window: (f64, f64), order: usize) -> DiscretizedOperator {
        discretize(&KernelField::sine(), window, order).unwrap()
    }

    #[test]
    fn zero_kernel_gives_zero_matrix() {
        let k = KernelField::from_fn("zero", |_, _| 0.0, ReferenceMeasure::lebesgue(), None);
        let op = discretize(&k, (-1.0, 1.0), 12).unwrap();
        assert!(op.matrix().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn empty_window_is_degenerate() {
        let k = KernelField::sine();
        assert!(matches!(
            discretize(&k, (1.0, 1.0), 8),
            Err(CoreError::DegenerateOperator(_))
        ));
        // native lattice spacing 0.5: (0.6, 0.9) selects nothing
        let d = KernelField::discrete_sine(0.5, 1.0, 1.0, (-8.0, 8.0)).unwrap();
        assert!(matches!(
            discretize(&d, (0.6, 0.9), 8),
            Err(CoreError::DegenerateOperator(_))
        ));
    }

    #[test]
    fn leading_eigenvalue_stable_under_order_refinement() {
        let top = |order: usize| {
            let op = sine_op((-0.5, 0.5), order);
            op.matrix()
                .clone()
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .cloned()
                .fold(f64::MIN, f64::max)
        };
        let e20 = top(20);
        let e40 = top(40);
        assert!((e20 - e40).abs() < 1e-10, "e20={e20} e40={e40}");
    }

    #[test]
    fn det_of_zero_symbol_is_one() {
        let op = sine_op((-1.0, 1.0), 24);
        let psi = vec![0.0; op.size()];
        assert_abs_diff_eq!(fredholm_det(&op, &psi).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn rank_one_kernel_determinant_lemma() {
        // K(x,y) = phi(x)phi(y), det(I - psi K) = 1 - int phi^2 psi.
        let phi = |x: f64| 1.0 + 0.5 * x;
        let k = KernelField::from_fn(
            "rank-one",
            move |x, y| phi(x) * phi(y),
            ReferenceMeasure::lebesgue(),
            Some(1),
        );
        let op = discretize(&k, (-1.0, 1.0), 16).unwrap();
        let psi_fn = |x: f64| 0.25 * (1.0 + x * x) / 2.0;
        let psi = op.values_on_grid(psi_fn);
        // t = int_{-1}^{1} phi^2 psi dx, exactly integrable by the rule.
        let q = QuadratureRule::gauss_legendre(16, -1.0, 1.0).unwrap();
        let t = q.integrate(|x| phi(x) * phi(x) * psi_fn(x));
        assert_abs_diff_eq!(fredholm_det(&op, &psi).unwrap(), 1.0 - t, epsilon = 1e-13);
    }

    #[test]
    fn series_matches_determinant_on_small_gap() {
        let op = sine_op((-0.1, 0.1), 24);
        let psi = vec![1.0; op.size()];
        let det = fredholm_det(&op, &psi).unwrap();
        let quad = QuadratureRule::gauss_legendre(24, -0.1, 0.1).unwrap();
        let series =
            fredholm_series(&KernelField::sine(), &|_| 1.0, 4, &quad, &|_| 1.0, &|_| 1.0).unwrap();
        let est = series.determinant_estimate();
        assert!(
            (det - est).abs() < 1e-10,
            "det {det} vs series {est}, diff {:.2e}",
            (det - est).abs()
        );
        assert!((det - est).abs() <= series.tail_bound);
    }

    #[test]
    fn series_s0_and_s1() {
        // S_0 = 1; S_1 = int psi K(u,u) du = 2s for the sine kernel on (-s,s).
        let s = 0.3;
        let quad = QuadratureRule::gauss_legendre(20, -s, s).unwrap();
        let series =
            fredholm_series(&KernelField::sine(), &|_| 1.0, 2, &quad, &|_| 1.0, &|_| 1.0).unwrap();
        assert_abs_diff_eq!(series.terms[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(series.terms[1], 2.0 * s, epsilon = 1e-12);
    }

    #[test]
    fn series_vanishes_past_finite_rank() {
        // Rank-2 kernel: S_k = 0 for k > 2.
        let k = KernelField::from_fn(
            "rank-two",
            |x, y| 1.0 + x * y,
            ReferenceMeasure::lebesgue(),
            Some(2),
        );
        let quad = QuadratureRule::gauss_legendre(10, -1.0, 1.0).unwrap();
        let series = fredholm_series(&k, &|_| 0.7, 4, &quad, &|_| 2.0, &|_| 2.0).unwrap();
        assert!(series.terms[3].abs() < 1e-10, "S_3 = {}", series.terms[3]);
        assert!(series.terms[4].abs() < 1e-10, "S_4 = {}", series.terms[4]);
    }

    #[test]
    fn series_cost_guard() {
        let quad = QuadratureRule::gauss_legendre(400, -1.0, 1.0).unwrap();
        let r = fredholm_series(&KernelField::sine(), &|_| 1.0, 8, &quad, &|_| 1.0, &|_| 1.0);
        assert!(matches!(r, Err(CoreError::CostGuard(_))));
        let r2 = fredholm_series(&KernelField::sine(), &|_| 1.0, 9, &quad, &|_| 1.0, &|_| 1.0);
        assert!(matches!(r2, Err(CoreError::CostGuard(_))));
    }

    #[test]
    fn sigma_zero_resolvent_is_identity() {
        let op = sine_op((-1.0, 1.0), 20);
        let sigma = vec![0.0; op.size()];
        let def = deformed_kernel(&op, &sigma).unwrap();
        let diff = (def.operator.matrix() - op.matrix()).abs().max();
        assert!(diff <= 1e-14, "max diff {diff}");
    }

    #[test]
    fn routes_agree_for_sine_thinning() {
        let op = sine_op((-1.5, 1.5), 60);
        let sigma = op.values_on_grid(|u| if u.abs() < 1.0 { 0.5 } else { 0.0 });
        let h = op.values_on_grid(|u| if u.abs() < 0.5 { 0.5 } else { 0.0 });
        let a = pgf_deformed(&op, &sigma, &h, PgfRoute::Ratio).unwrap();
        let b = pgf_deformed(&op, &sigma, &h, PgfRoute::DeformedKernel).unwrap();
        assert!(
            (a.value - b.value).abs() < 1e-9,
            "ratio {} vs deformed {}",
            a.value,
            b.value
        );
        assert!(a.value > 0.0 && a.value <= 1.0);
    }

    #[test]
    fn h_zero_gives_one() {
        let op = sine_op((-1.0, 1.0), 30);
        let sigma = op.values_on_grid(|u| 0.3 * (-u * u).exp());
        let h = vec![0.0; op.size()];
        for route in [PgfRoute::Ratio, PgfRoute::DeformedKernel] {
            let g = pgf_deformed(&op, &sigma, &h, route).unwrap();
            assert_abs_diff_eq!(g.value, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn sigma_zero_reduces_to_plain_functional() {
        let op = sine_op((-1.0, 1.0), 30);
        let sigma = vec![0.0; op.size()];
        let h = op.values_on_grid(|u| if u.abs() < 0.5 { 0.4 } else { 0.0 });
        let g = pgf_deformed(&op, &sigma, &h, PgfRoute::Ratio).unwrap();
        let direct = fredholm_det(&op, &h).unwrap();
        assert_abs_diff_eq!(g.value, direct, epsilon = 1e-13);
        assert_abs_diff_eq!(g.det_sigma, 1.0, epsilon = 1e-14);
    }
}
