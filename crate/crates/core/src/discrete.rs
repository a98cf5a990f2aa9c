//! Discrete Coulomb gases: quantized node sets, varying weights built
//! from a confining potential and the node-density log-potential,
//! discrete orthonormal polynomials, and the scaled lattice kernel.

use crate::error::{CoreError, Result};
use crate::kernels::KernelField;
use crate::measure::{ReferenceMeasure, ScalingMap};
use crate::orthopoly::orthonormal_on_grid;
use crate::potential::Potential;
use crate::quad::QuadratureRule;
use nalgebra::DMatrix;
use std::sync::Arc;

/// A positive analytic node density on `[0,1]` with unit mass.
#[derive(Clone)]
pub struct NodeDensity {
    rho: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    lower: f64,
    upper: f64,
}

impl NodeDensity {
    pub fn new(rho: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let rho = Arc::new(rho);
        let mut lower = f64::INFINITY;
        let mut upper = f64::NEG_INFINITY;
        let m = 2000;
        for i in 0..=m {
            let x = i as f64 / m as f64;
            let v = rho(x);
            if !v.is_finite() {
                return Err(CoreError::InvalidParameter(format!(
                    "node density is not finite at {x}"
                )));
            }
            lower = lower.min(v);
            upper = upper.max(v);
        }
        if lower <= 0.0 {
            return Err(CoreError::InvalidParameter(format!(
                "node density must be strictly positive on [0,1], min {lower:.3e}"
            )));
        }
        let quad = QuadratureRule::gauss_legendre(200, 0.0, 1.0)?;
        let mass = quad.integrate(|x| rho(x));
        if (mass - 1.0).abs() > 1e-10 {
            return Err(CoreError::InvalidParameter(format!(
                "node density must have unit mass, got {mass}"
            )));
        }
        Ok(Self { rho, lower, upper })
    }

    /// Equally spaced nodes: `rho = 1`.
    pub fn uniform() -> Self {
        Self {
            rho: Arc::new(|_| 1.0),
            lower: 1.0,
            upper: 1.0,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.rho)(x)
    }

    /// Observed lower bound `m <= rho`.
    pub fn lower(&self) -> f64 {
        self.lower
    }

    /// Observed upper bound `rho <= M`.
    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// `int_0^x rho`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let x = x.min(1.0);
        let quad = QuadratureRule::gauss_legendre(80, 0.0, x).expect("valid interval");
        quad.integrate(|t| (self.rho)(t))
    }

    /// Logarithmic potential `U^rho(x) = int_0^1 log(1/|x-t|) rho(t) dt`
    /// for `x` in `(0,1)`.
    ///
    /// The singular part integrates in closed form against the constant
    /// `rho(x)`; the remainder vanishes like `|x-t| log|x-t|` at `t = x`
    /// and is regularized by the substitution `t = x -+ s^2` with a
    /// 30-point rule per side.
    pub fn log_potential(&self, x: f64) -> Result<f64> {
        if !(0.0 < x && x < 1.0) {
            return Err(CoreError::InvalidParameter(format!(
                "log potential evaluated inside (0,1), got {x}"
            )));
        }
        let rho_x = (self.rho)(x);
        // int_0^1 log(1/|x-t|) dt = 1 - x log x - (1-x) log(1-x)
        let closed = 1.0 - x * x.ln() - (1.0 - x) * (1.0 - x).ln();
        let mut correction = 0.0;
        // left: t = x - s^2, s in (0, sqrt(x)]
        let sl = x.sqrt();
        let left = QuadratureRule::gauss_legendre(30, 0.0, sl)?;
        correction += left.integrate(|s| {
            let t = x - s * s;
            -4.0 * s * s.ln() * ((self.rho)(t) - rho_x)
        });
        // right: t = x + s^2, s in (0, sqrt(1-x)]
        let sr = (1.0 - x).sqrt();
        let right = QuadratureRule::gauss_legendre(30, 0.0, sr)?;
        correction += right.integrate(|s| {
            let t = x + s * s;
            -4.0 * s * s.ln() * ((self.rho)(t) - rho_x)
        });
        Ok(rho_x * closed + correction)
    }
}

impl std::fmt::Debug for NodeDensity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NodeDensity")
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .finish()
    }
}

/// Nodes `x_j` solving `int_0^{x_j} rho = (2j+1)/(2N)`, `j = 0..N-1`,
/// each to `1e-12` by bisection plus Newton polish.
pub fn quantized_nodes(rho: &NodeDensity, n_nodes: usize) -> Result<Vec<f64>> {
    if n_nodes == 0 {
        return Err(CoreError::InvalidParameter(
            "node count must be >= 1".into(),
        ));
    }
    let mut nodes = Vec::with_capacity(n_nodes);
    for j in 0..n_nodes {
        let target = (2 * j + 1) as f64 / (2 * n_nodes) as f64;
        // Newton with a bisection safeguard on the bracket [lo, hi].
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut x = 0.5;
        let mut iterations = 0;
        for _ in 0..80 {
            iterations += 1;
            let f = rho.cdf(x) - target;
            if f.abs() < 1e-13 {
                break;
            }
            if f < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let newton = x - f / rho.eval(x);
            x = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        let residual = (rho.cdf(x) - target).abs();
        if residual > 1e-12 {
            return Err(CoreError::OptimizationFailed {
                residual,
                iterations,
            });
        }
        nodes.push(x);
    }
    Ok(nodes)
}

/// Weight values `w_N = exp(-N V_N)`, `V_N = V - U^rho + eta/N`, on the
/// quantized nodes, carried in log space.
#[derive(Debug, Clone)]
pub struct DiscreteWeights {
    pub nodes: Vec<f64>,
    /// `log w_N(x_j)`, unnormalized.
    pub log_w: Vec<f64>,
}

impl DiscreteWeights {
    /// Weights normalized so the largest equals one; entries below the
    /// f64 floor flush to zero.
    pub fn values_normalized(&self) -> Vec<f64> {
        let max = self.log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        self.log_w
            .iter()
            .map(|&lw| {
                let e = lw - max;
                if e < -690.0 {
                    0.0
                } else {
                    e.exp()
                }
            })
            .collect()
    }
}

/// Evaluate the discrete Coulomb weight on the quantization nodes of
/// `rho`.
pub fn coulomb_weight(
    v: &Potential,
    rho: &NodeDensity,
    eta: impl Fn(f64) -> f64,
    n_nodes: usize,
) -> Result<DiscreteWeights> {
    let nodes = quantized_nodes(rho, n_nodes)?;
    let nf = n_nodes as f64;
    let mut log_w = Vec::with_capacity(n_nodes);
    for &x in &nodes {
        let vx = v.v(x);
        if !vx.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "potential {} is not finite at node {x}",
                v.name()
            )));
        }
        let e = eta(x);
        if !e.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "eta is not finite at node {x}"
            )));
        }
        log_w.push(-nf * (vx - rho.log_potential(x)?) - e);
    }
    Ok(DiscreteWeights { nodes, log_w })
}

/// Discrete orthogonal polynomial ensemble on a finite node set.
#[derive(Debug, Clone)]
pub struct DiscreteEnsemble {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    n: usize,
    /// Row `k`: values of `p_k` on the nodes, `k < n`.
    poly: DMatrix<f64>,
    /// `sqrt(w) p_k` values; the kernel is `Psi^T Psi`.
    kernel: DMatrix<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
}

/// Orthonormal polynomials `p_0 .. p_{n-1}` with respect to
/// `sum_j w(x_j) delta_{x_j}`, by the Lanczos-type recurrence with full
/// reorthogonalization.
pub fn discrete_orthonormal(nodes: &[f64], weights: &[f64], n: usize) -> Result<DiscreteEnsemble> {
    if n == 0 || n > nodes.len() {
        return Err(CoreError::InvalidParameter(format!(
            "particle count must satisfy 1 <= n <= N = {}, got {n}",
            nodes.len()
        )));
    }
    if nodes.windows(2).any(|p| p[0] >= p[1]) {
        return Err(CoreError::InvalidParameter(
            "nodes must be strictly increasing".into(),
        ));
    }
    if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
        return Err(CoreError::InvalidParameter(
            "weights must be finite and nonnegative".into(),
        ));
    }
    // p_n is kept when the rank allows it; only p_0..p_{n-1} enter the
    // kernel.
    let want = if weights.iter().filter(|&&w| w > 0.0).count() > n {
        n
    } else {
        n - 1
    };
    let gram = orthonormal_on_grid(nodes, weights, want)?;
    let m = nodes.len();
    let poly = DMatrix::from_fn(n, m, |k, i| gram.basis[k][i]);
    let root_w: Vec<f64> = weights.iter().map(|&w| w.sqrt()).collect();
    let psi = DMatrix::from_fn(n, m, |k, i| gram.basis[k][i] * root_w[i]);
    let kernel = psi.transpose() * psi;
    Ok(DiscreteEnsemble {
        nodes: nodes.to_vec(),
        weights: weights.to_vec(),
        n,
        poly,
        kernel,
        a: gram.a,
        b: gram.b,
    })
}

impl DiscreteEnsemble {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn particle_count(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.n as f64 / self.nodes.len() as f64
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `p_k(x_i)` for `k < n`.
    pub fn poly_value(&self, k: usize, i: usize) -> f64 {
        self.poly[(k, i)]
    }

    pub fn recurrence_a(&self) -> &[f64] {
        &self.a
    }

    pub fn recurrence_b(&self) -> &[f64] {
        &self.b
    }

    /// Kernel value `k_n(x_i, x_j) = sqrt(w_i w_j) sum_{k<n} p_k(i) p_k(j)`.
    pub fn kernel_value(&self, i: usize, j: usize) -> f64 {
        self.kernel[(i, j)]
    }

    /// `sum_x k_n(x,x)`; equals the particle count by orthonormality.
    pub fn kernel_trace(&self) -> f64 {
        self.kernel.diagonal().sum()
    }

    /// Max deviation of the Gram matrix from the identity.
    pub fn orthonormality_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.n {
            for k in j..self.n {
                let g: f64 = (0..self.nodes.len())
                    .map(|i| self.weights[i] * self.poly[(j, i)] * self.poly[(k, i)])
                    .sum();
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }
}

/// The scaled node set `Omega_N` around a bulk point, recentered so the
/// smallest nonnegative site sits at zero.
#[derive(Debug, Clone)]
pub struct ScaledLattice {
    /// Recentered scaled nodes, ascending.
    pub nodes: Vec<f64>,
    pub x_star: f64,
    /// `kappa n / beta`, the coordinate dilation.
    pub scale: f64,
    /// Limit spacing `kappa / rho(x*)`.
    pub limit_spacing: f64,
    /// The recentering shift (the smallest nonnegative scaled node).
    pub q0: f64,
}

/// Scale the ensemble kernel around the bulk point `x*`:
/// `K_n(u,v) = k_n(x* + beta u/(kappa n), x* + beta v/(kappa n))` on the
/// scaled lattice, with counting reference measure and no prefactor.
pub fn scaled_discrete_kernel(
    ens: &Arc<DiscreteEnsemble>,
    rho: &NodeDensity,
    x_star: f64,
    kappa_star: f64,
) -> Result<(KernelField, ScaledLattice)> {
    let beta = ens.beta();
    let rho_star = rho.eval(x_star);
    if !(kappa_star > 0.0 && kappa_star < rho_star / beta) {
        return Err(CoreError::NotABulkPoint(format!(
            "need 0 < kappa = {kappa_star} < rho(x*)/beta = {}",
            rho_star / beta
        )));
    }
    let scale = kappa_star * ens.particle_count() as f64 / beta;
    let scaled: Vec<f64> = ens.nodes().iter().map(|&x| scale * (x - x_star)).collect();
    let q0 = scaled
        .iter()
        .cloned()
        .filter(|&u| u >= 0.0)
        .fold(f64::INFINITY, f64::min);
    if !q0.is_finite() {
        return Err(CoreError::NotABulkPoint(
            "x* lies right of every node".into(),
        ));
    }
    let recentered: Vec<f64> = scaled.iter().map(|&u| u - q0).collect();
    let lattice = ScaledLattice {
        nodes: recentered.clone(),
        x_star,
        scale,
        limit_spacing: kappa_star / rho_star,
        q0,
    };
    let ens = Arc::clone(ens);
    let nodes = recentered.clone();
    let n = ens.particle_count();
    let eval = move |u: f64, v: f64| -> f64 {
        match (locate(&nodes, u), locate(&nodes, v)) {
            (Some(i), Some(j)) => ens.kernel_value(i, j),
            _ => 0.0, // extension by zero off the lattice
        }
    };
    let measure = ReferenceMeasure::counting(recentered)?.with_scaling(ScalingMap {
        center: x_star,
        c: kappa_star / beta,
        gamma: 1.0,
        n,
    });
    Ok((
        KernelField::from_fn(format!("discrete-scaled(n={n})"), eval, measure, Some(n)),
        lattice,
    ))
}

fn locate(nodes: &[f64], u: f64) -> Option<usize> {
    let tol = 1e-9 * (1.0 + u.abs());
    match nodes.binary_search_by(|x| x.total_cmp(&u)) {
        Ok(i) => Some(i),
        Err(i) => {
            if i < nodes.len() && (nodes[i] - u).abs() <= tol {
                Some(i)
            } else if i > 0 && (nodes[i - 1] - u).abs() <= tol {
                Some(i - 1)
            } else {
                None
            }
        }
    }
}

/// Confining potential of the Krawtchouk-type weight with success
/// probability `p`: linear on `[0,1]`.
pub fn krawtchouk_potential(p: f64) -> Result<Potential> {
    if !(0.0 < p && p < 1.0) {
        return Err(CoreError::InvalidParameter(format!(
            "krawtchouk parameter must lie in (0,1), got {p}"
        )));
    }
    let q = 1.0 - p;
    Ok(Potential::bounded_domain(
        format!("krawtchouk({p})"),
        move |x| x * (q / p).ln() - q.ln() + 1.0,
    ))
}

/// Confining potential of the Hahn-type weight,
/// `V(x) = -(a+x)log(a+x) - (b-x)log(b-x) + c x + d`; needs `a > 0`,
/// `b > 1` so the logarithms stay finite on `[0,1]`.
pub fn hahn_potential(a: f64, b: f64, c: f64, d: f64) -> Result<Potential> {
    if !(a > 0.0 && b > 1.0) {
        return Err(CoreError::InvalidParameter(format!(
            "hahn parameters need a > 0 and b > 1, got a = {a}, b = {b}"
        )));
    }
    Ok(Potential::bounded_domain(
        format!("hahn({a},{b},{c},{d})"),
        move |x| -(a + x) * (a + x).ln() - (b - x) * (b - x).ln() + c * x + d,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn uniform_nodes_are_shifted_midpoints() {
        let nodes = quantized_nodes(&NodeDensity::uniform(), 10).unwrap();
        for (j, &x) in nodes.iter().enumerate() {
            assert_abs_diff_eq!(x, (2 * j + 1) as f64 / 20.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn nodes_increasing_for_analytic_density() {
        let rho =
            NodeDensity::new(|x| 1.0 + 0.3 * (2.0 * std::f64::consts::PI * x + 0.4).sin()).unwrap();
        let nodes = quantized_nodes(&rho, 60).unwrap();
        assert!(nodes.windows(2).all(|p| p[0] < p[1]));
        for (j, &x) in nodes.iter().enumerate() {
            assert!((rho.cdf(x) - (2 * j + 1) as f64 / 120.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_density_vanishing_at_zero() {
        assert!(NodeDensity::new(|x| 2.0 * x).is_err());
    }

    #[test]
    fn log_potential_uniform_closed_form() {
        let rho = NodeDensity::uniform();
        for &x in &[0.25f64, 0.5, 0.9] {
            let want = -x * x.ln() - (1.0 - x) * (1.0 - x).ln() + 1.0;
            let got = rho.log_potential(x).unwrap();
            assert!(
                (got - want).abs() < 1e-8,
                "U^rho({x}): got {got}, want {want}"
            );
        }
    }

    #[test]
    fn log_potential_perturbed_density_against_fine_quadrature() {
        let rho = NodeDensity::new(|x| 1.0 + 0.3 * (2.0 * std::f64::consts::PI * x).sin()).unwrap();
        let x = 0.37f64;
        // brute-force oracle with singularity split at x and dense panels
        let left = QuadratureRule::gauss_legendre(400, 0.0, x.sqrt()).unwrap();
        let right = QuadratureRule::gauss_legendre(400, 0.0, (1.0 - x).sqrt()).unwrap();
        let oracle = left.integrate(|s| -4.0 * s * s.ln() * rho.eval(x - s * s))
            + right.integrate(|s| -4.0 * s * s.ln() * rho.eval(x + s * s));
        let got = rho.log_potential(x).unwrap();
        assert!(
            (got - oracle).abs() < 1e-9,
            "got {got}, oracle {oracle}, diff {:.2e}",
            (got - oracle).abs()
        );
    }

    #[test]
    fn coulomb_weight_specializations() {
        let rho = NodeDensity::uniform();
        // V = 0, eta = 0: w = exp(N U^rho)
        let zero_v = Potential::bounded_domain("zero", |_| 0.0);
        let w = coulomb_weight(&zero_v, &rho, |_| 0.0, 16).unwrap();
        for (&x, &lw) in w.nodes.iter().zip(&w.log_w) {
            let want = 16.0 * rho.log_potential(x).unwrap();
            assert_abs_diff_eq!(lw, want, epsilon = 1e-10);
        }
        // Hahn-type weight stays positive
        let hahn = hahn_potential(1.0, 2.0, 0.3, -0.1).unwrap();
        let wh = coulomb_weight(&hahn, &rho, |_| 0.0, 32).unwrap();
        assert!(wh.values_normalized().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn discrete_orthonormality() {
        let rho = NodeDensity::uniform();
        let pot = krawtchouk_potential(0.5).unwrap();
        let w = coulomb_weight(&pot, &rho, |_| 0.0, 64).unwrap();
        let ens = discrete_orthonormal(&w.nodes, &w.values_normalized(), 32).unwrap();
        assert!(ens.orthonormality_residual() < 1e-8);
        assert_abs_diff_eq!(ens.kernel_trace(), 32.0, epsilon = 1e-8);
        // p_0 is the normalized constant
        let total: f64 = ens.weights().iter().sum();
        assert_abs_diff_eq!(ens.poly_value(0, 3), 1.0 / total.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn scaled_lattice_spacing_bounds() {
        let rho = NodeDensity::new(|x| 1.0 + 0.3 * (2.0 * std::f64::consts::PI * x).sin()).unwrap();
        let pot = krawtchouk_potential(0.5).unwrap();
        let n_nodes = 64;
        let w = coulomb_weight(&pot, &rho, |_| 0.0, n_nodes).unwrap();
        let ens = Arc::new(discrete_orthonormal(&w.nodes, &w.values_normalized(), 32).unwrap());
        let kappa = 0.9;
        let (_, lat) = scaled_discrete_kernel(&ens, &rho, 0.5, kappa).unwrap();
        // spacing bounds kappa/M <= dq <= kappa/m hold exactly
        for pair in lat.nodes.windows(2) {
            let dq = pair[1] - pair[0];
            assert!(dq >= kappa / rho.upper() - 1e-9, "dq = {dq}");
            assert!(dq <= kappa / rho.lower() + 1e-9, "dq = {dq}");
        }
        assert!(lat.q0 >= 0.0);
        assert_abs_diff_eq!(lat.limit_spacing, kappa / rho.eval(0.5), epsilon = 1e-14);
    }

    #[test]
    fn scaled_nodes_approach_limit_lattice() {
        // |q_j - j kappa/rho(x*)| decreasing in N for fixed j.
        let rho = NodeDensity::new(|x| 1.0 + 0.2 * (2.0 * std::f64::consts::PI * x).cos()).unwrap();
        let pot = krawtchouk_potential(0.5).unwrap();
        let kappa = 0.8;
        let deviation = |n_nodes: usize| -> f64 {
            let w = coulomb_weight(&pot, &rho, |_| 0.0, n_nodes).unwrap();
            let ens = Arc::new(
                discrete_orthonormal(&w.nodes, &w.values_normalized(), n_nodes / 2).unwrap(),
            );
            let (_, lat) = scaled_discrete_kernel(&ens, &rho, 0.5, kappa).unwrap();
            let spacing = lat.limit_spacing;
            let zero = lat.nodes.iter().position(|&u| u == 0.0).unwrap();
            let mut worst = 0.0f64;
            for j in -3i64..=3 {
                let idx = (zero as i64 + j) as usize;
                worst = worst.max((lat.nodes[idx] - j as f64 * spacing).abs());
            }
            worst
        };
        let (d64, d256) = (deviation(64), deviation(256));
        assert!(d256 < d64, "d64 = {d64:.3e}, d256 = {d256:.3e}");
    }

    #[test]
    fn lattice_point_count_bound() {
        // #(Omega_N cap [-L,L]) <= (2M/kappa + 1) L for L >= 1.
        let rho = NodeDensity::new(|x| 1.0 + 0.3 * (2.0 * std::f64::consts::PI * x).sin()).unwrap();
        let pot = krawtchouk_potential(0.5).unwrap();
        let w = coulomb_weight(&pot, &rho, |_| 0.0, 128).unwrap();
        let ens = Arc::new(discrete_orthonormal(&w.nodes, &w.values_normalized(), 64).unwrap());
        let kappa = 0.9;
        let (_, lat) = scaled_discrete_kernel(&ens, &rho, 0.5, kappa).unwrap();
        let c0 = 2.0 * rho.upper() / kappa + 1.0;
        for l in [1.0f64, 2.0, 5.0, 10.0] {
            let count = lat.nodes.iter().filter(|&&u| u.abs() <= l).count();
            assert!(
                (count as f64) <= c0 * l,
                "L = {l}: count {count} > {}",
                c0 * l
            );
        }
    }

    #[test]
    fn insufficient_weight_support_is_degenerate() {
        let nodes: Vec<f64> = (0..10).map(|i| i as f64 / 10.0).collect();
        let mut weights = vec![0.0; 10];
        weights[2] = 1.0;
        weights[5] = 0.5;
        weights[7] = 0.25;
        let r = discrete_orthonormal(&nodes, &weights, 5);
        assert!(matches!(r, Err(CoreError::Degeneracy { .. })));
    }

    #[test]
    fn bulk_point_guard() {
        let rho = NodeDensity::uniform();
        let pot = krawtchouk_potential(0.5).unwrap();
        let w = coulomb_weight(&pot, &rho, |_| 0.0, 32).unwrap();
        let ens = Arc::new(discrete_orthonormal(&w.nodes, &w.values_normalized(), 16).unwrap());
        // rho/beta = 2, so kappa = 2.5 is out of the band
        assert!(matches!(
            scaled_discrete_kernel(&ens, &rho, 0.5, 2.5),
            Err(CoreError::NotABulkPoint(_))
        ));
    }

    #[test]
    fn krawtchouk_weight_matches_binomial_exponent() {
        // V - U^rho = x log x + (1-x)log(1-x) - x log p - (1-x) log q
        let p = 0.3;
        let pot = krawtchouk_potential(p).unwrap();
        let rho = NodeDensity::uniform();
        let x: f64 = 0.4;
        let v_n = pot.v(x) - rho.log_potential(x).unwrap();
        let want =
            x * x.ln() + (1.0 - x) * (1.0 - x).ln() - x * p.ln() - (1.0 - x) * (1.0 - p).ln();
        assert_abs_diff_eq!(v_n, want, epsilon = 1e-8);
    }
}
