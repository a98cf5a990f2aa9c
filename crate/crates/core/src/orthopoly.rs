//! Orthogonal polynomial ensembles with varying weight `exp(-n V)`:
//! recurrence coefficients by the discretized Stieltjes procedure, the
//! Christoffel-Darboux kernel, and its bulk / soft-edge rescalings.
//!
//! All evaluation is carried in the weighted functions
//! `psi_k(x) = phi_k(x) exp(-n(V(x) - min V)/2)`, which satisfy the same
//! three-term recurrence as the polynomials and stay bounded where the
//! polynomials alone would overflow.

use crate::error::{CoreError, Result};
use crate::kernels::KernelField;
use crate::measure::{ReferenceMeasure, ScalingMap};
use crate::potential::Potential;
use crate::quad::QuadratureRule;
use std::sync::Arc;

/// Recurrence data and basis values of polynomials orthonormal with
/// respect to a discrete measure `sum_i m_i delta_{x_i}`.
pub(crate) struct GridOrthonormal {
    /// `a_0 .. a_{count-1}` (diagonal recurrence coefficients).
    pub a: Vec<f64>,
    /// `b_0 = 0, b_1 .. b_count` (off-diagonal coefficients).
    pub b: Vec<f64>,
    /// Row `k` holds the values of `phi_k` on the grid, `k = 0..=count`.
    pub basis: Vec<Vec<f64>>,
    /// Normalization of the constant polynomial, `1/sqrt(sum m)`.
    pub c0: f64,
}

/// Stieltjes / Lanczos iteration with full reorthogonalization (applied
/// twice) on the grid measure. Produces `count + 1` orthonormal vectors
/// when the measure's support allows it.
pub(crate) fn orthonormal_on_grid(
    x: &[f64],
    masses: &[f64],
    count: usize,
) -> Result<GridOrthonormal> {
    let m = x.len();
    if m != masses.len() {
        return Err(CoreError::InvalidParameter(
            "grid and masses must have equal length".into(),
        ));
    }
    let positive = masses.iter().filter(|&&w| w > 0.0).count();
    if positive < count + 1 {
        return Err(CoreError::Degeneracy {
            rank: positive,
            requested: count + 1,
        });
    }
    let total: f64 = masses.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(CoreError::InvalidParameter(
            "grid measure must have positive finite mass".into(),
        ));
    }
    let inner = |u: &[f64], v: &[f64]| -> f64 {
        u.iter()
            .zip(v)
            .zip(masses)
            .map(|((&a, &b), &w)| w * a * b)
            .sum()
    };

    let c0 = 1.0 / total.sqrt();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(count + 1);
    basis.push(vec![c0; m]);
    let mut a = Vec::with_capacity(count);
    let mut b = vec![0.0];

    for k in 0..count {
        let xphi: Vec<f64> = x.iter().zip(&basis[k]).map(|(&xi, &p)| xi * p).collect();
        let ak = inner(&xphi, &basis[k]);
        a.push(ak);
        let mut r: Vec<f64> = (0..m)
            .map(|i| xphi[i] - ak * basis[k][i] - if k > 0 { b[k] * basis[k - 1][i] } else { 0.0 })
            .collect();
        // Reorthogonalize twice against everything built so far; the
        // weights span hundreds of orders of magnitude and plain
        // three-term recurrences shed orthogonality.
        for _ in 0..2 {
            for phi in &basis {
                let c = inner(&r, phi);
                for i in 0..m {
                    r[i] -= c * phi[i];
                }
            }
        }
        let norm2 = inner(&r, &r);
        if !(norm2 > 0.0) || norm2.sqrt() < 1e-14 * total.sqrt() {
            return Err(CoreError::Degeneracy {
                rank: k + 1,
                requested: count + 1,
            });
        }
        let bk = norm2.sqrt();
        b.push(bk);
        for v in &mut r {
            *v /= bk;
        }
        basis.push(r);
    }

    Ok(GridOrthonormal { a, b, basis, c0 })
}

/// A continuous orthogonal polynomial ensemble `exp(-n V)` on the line:
/// particle count, recurrence coefficients, and weighted evaluators.
#[derive(Clone)]
pub struct BiorthogonalSystem {
    n: usize,
    potential: Potential,
    quad: QuadratureRule,
    v_min: f64,
    /// `a_0 .. a_{n-1}`.
    a: Vec<f64>,
    /// `b_0 = 0, b_1 .. b_n`.
    b: Vec<f64>,
    c0: f64,
}

impl BiorthogonalSystem {
    /// Build with the default quadrature: Gauss-Legendre at 200 points
    /// per unit length on the truncated support.
    ///
    /// The moment envelope alone can undershoot the equilibrium support
    /// for large `n` (it tracks `x^{2n} w`, not the spread of the
    /// degree-`n` orthonormal polynomials), so after a first build the
    /// interval is widened to the Gershgorin range of the computed
    /// Jacobi matrix plus an edge-fluctuation margin, and the system is
    /// rebuilt until the interval is stable.
    pub fn build(potential: &Potential, n: usize) -> Result<Self> {
        let (mut lo, mut hi) = potential.truncated_support(n)?;
        let mut sys = Self::build_on(potential, n, lo, hi)?;
        const MARGIN: f64 = 1.0;
        for _ in 0..3 {
            let a_min = sys.a.iter().cloned().fold(f64::INFINITY, f64::min);
            let a_max = sys.a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let b_max = sys.b.iter().cloned().fold(0.0, f64::max);
            let g_lo = a_min - 2.0 * b_max - MARGIN;
            let g_hi = a_max + 2.0 * b_max + MARGIN;
            if g_lo >= lo && g_hi <= hi {
                return Ok(sys);
            }
            lo = lo.min(g_lo);
            hi = hi.max(g_hi);
            sys = Self::build_on(potential, n, lo, hi)?;
        }
        Ok(sys)
    }

    fn build_on(potential: &Potential, n: usize, lo: f64, hi: f64) -> Result<Self> {
        let order = ((200.0 * (hi - lo)).ceil() as usize).clamp(200, 4000);
        let quad = QuadratureRule::gauss_legendre(order, lo, hi)?;
        stieltjes_recurrence(potential, n, &quad)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn quadrature(&self) -> &QuadratureRule {
        &self.quad
    }

    /// Diagonal recurrence coefficients `a_0 .. a_{n-1}`.
    pub fn recurrence_a(&self) -> &[f64] {
        &self.a
    }

    /// Off-diagonal recurrence coefficients, `b[k] = b_k`, `b[0] = 0`.
    pub fn recurrence_b(&self) -> &[f64] {
        &self.b
    }

    /// `sqrt(w_n(x))` up to the constant `exp(n v_min / 2)` absorbed in
    /// the orthonormalization.
    fn weight_half(&self, x: f64) -> f64 {
        (-0.5 * self.n as f64 * (self.potential.v(x) - self.v_min)).exp()
    }

    /// Weighted orthonormal functions `psi_0(x) .. psi_{count-1}(x)`,
    /// `psi_k = phi_k sqrt(w_n)`; `count <= n + 1`.
    pub fn weighted_values(&self, x: f64, count: usize) -> Vec<f64> {
        debug_assert!(count <= self.n + 1);
        let mut out = Vec::with_capacity(count);
        let mut prev = 0.0;
        let mut cur = self.c0 * self.weight_half(x);
        for k in 0..count {
            out.push(cur);
            if k + 1 < count {
                let next = ((x - self.a[k]) * cur - self.b[k] * prev) / self.b[k + 1];
                prev = cur;
                cur = next;
            }
        }
        out
    }

    /// Weighted functions and weighted polynomial derivatives
    /// `chi_k = phi_k' sqrt(w_n)` up to order `n` inclusive.
    fn weighted_with_derivatives(&self, x: f64) -> (Vec<f64>, Vec<f64>) {
        let count = self.n + 1;
        let mut psi = Vec::with_capacity(count);
        let mut chi = Vec::with_capacity(count);
        let (mut p_prev, mut c_prev) = (0.0, 0.0);
        let mut p_cur = self.c0 * self.weight_half(x);
        let mut c_cur = 0.0;
        for k in 0..count {
            psi.push(p_cur);
            chi.push(c_cur);
            if k + 1 < count {
                let p_next = ((x - self.a[k]) * p_cur - self.b[k] * p_prev) / self.b[k + 1];
                let c_next = (p_cur + (x - self.a[k]) * c_cur - self.b[k] * c_prev) / self.b[k + 1];
                p_prev = p_cur;
                c_prev = c_cur;
                p_cur = p_next;
                c_cur = c_next;
            }
        }
        (psi, chi)
    }

    /// Max deviation of `int phi_j phi_k w_n dnu` from the identity,
    /// evaluated through the recurrence on the construction quadrature.
    pub fn orthonormality_residual(&self) -> f64 {
        let m = self.quad.len();
        let n = self.n;
        let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(m); n];
        for &x in self.quad.nodes() {
            let vals = self.weighted_values(x, n);
            for (k, v) in vals.into_iter().enumerate() {
                cols[k].push(v);
            }
        }
        let mut worst = 0.0f64;
        for j in 0..n {
            for k in j..n {
                let g: f64 = (0..m)
                    .map(|i| self.quad.weights()[i] * cols[j][i] * cols[k][i])
                    .sum();
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }

    /// `int k_n(x, x) dnu(x)` over the construction quadrature.
    pub fn kernel_trace(&self) -> f64 {
        self.quad.integrate(|x| cd_kernel(self, x, x))
    }
}

impl std::fmt::Debug for BiorthogonalSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BiorthogonalSystem")
            .field("n", &self.n)
            .field("potential", &self.potential.name())
            .field("quad_order", &self.quad.len())
            .finish()
    }
}

/// Orthonormal polynomials for the weight `exp(-n V)` by the discretized
/// Stieltjes procedure on the given rule.
///
/// Fails with [`CoreError::RefinementNeeded`] when the recurrence loses
/// orthogonality beyond `1e-6` on the rule itself.
pub fn stieltjes_recurrence(
    potential: &Potential,
    n: usize,
    quad: &QuadratureRule,
) -> Result<BiorthogonalSystem> {
    if n == 0 {
        return Err(CoreError::InvalidParameter(
            "particle count must be >= 1".into(),
        ));
    }
    let v_min = quad
        .nodes()
        .iter()
        .map(|&x| potential.v(x))
        .fold(f64::INFINITY, f64::min);
    if !v_min.is_finite() {
        return Err(CoreError::InvalidParameter(
            "potential is not finite on the quadrature support".into(),
        ));
    }
    let nf = n as f64;
    let masses: Vec<f64> = quad
        .nodes()
        .iter()
        .zip(quad.weights())
        .map(|(&x, &w)| w * (-nf * (potential.v(x) - v_min)).exp())
        .collect();
    let gram = orthonormal_on_grid(quad.nodes(), &masses, n)?;
    let sys = BiorthogonalSystem {
        n,
        potential: potential.clone(),
        quad: quad.clone(),
        v_min,
        a: gram.a,
        b: gram.b,
        c0: gram.c0,
    };
    let residual = sys.orthonormality_residual();
    if residual > 1e-6 {
        return Err(CoreError::RefinementNeeded {
            residual,
            tolerance: 1e-6,
        });
    }
    Ok(sys)
}

/// Christoffel-Darboux kernel
/// `k_n(x,y) = sqrt(w(x)w(y)) sum_{k<n} phi_k(x) phi_k(y)`, evaluated in
/// the two-term quotient form, switching to the derivative form on the
/// near-diagonal where the quotient cancels.
pub fn cd_kernel(sys: &BiorthogonalSystem, x: f64, y: f64) -> f64 {
    let n = sys.n;
    if (x - y).abs() < 1e-6 * (1.0 + x.abs().max(y.abs())) {
        let m = 0.5 * (x + y);
        let (psi, chi) = sys.weighted_with_derivatives(m);
        sys.b[n] * (chi[n] * psi[n - 1] - chi[n - 1] * psi[n])
    } else {
        let px = sys.weighted_values(x, n + 1);
        let py = sys.weighted_values(y, n + 1);
        sys.b[n] * (px[n] * py[n - 1] - px[n - 1] * py[n]) / (x - y)
    }
}

/// Direct-summation form of the kernel; reference route for the quotient
/// evaluation.
pub fn cd_kernel_sum(sys: &BiorthogonalSystem, x: f64, y: f64) -> f64 {
    let px = sys.weighted_values(x, sys.n);
    let py = sys.weighted_values(y, sys.n);
    px.iter().zip(&py).map(|(&a, &b)| a * b).sum()
}

/// Bulk rescaling `K_n(u,v) = k_n(x* + u/(c n), x* + v/(c n)) / (c n)`
/// with `c = kappa_star`, the equilibrium density at the bulk point.
pub fn rescaled_bulk_kernel(
    sys: &Arc<BiorthogonalSystem>,
    x_star: f64,
    kappa_star: f64,
) -> Result<KernelField> {
    if !(kappa_star > 0.0) {
        return Err(CoreError::NotABulkPoint(format!(
            "kappa_V(x*) = {kappa_star} must be positive"
        )));
    }
    let rate = kappa_star * sys.n() as f64;
    let sys = Arc::clone(sys);
    let n = sys.n();
    let scaling = ScalingMap {
        center: x_star,
        c: kappa_star,
        gamma: 1.0,
        n,
    };
    Ok(KernelField::from_fn(
        format!("bulk-rescaled(n={n})"),
        move |u, v| cd_kernel(&sys, x_star + u / rate, x_star + v / rate) / rate,
        ReferenceMeasure::lebesgue().with_scaling(scaling),
        Some(n),
    ))
}

/// Soft-edge rescaling
/// `K_n(u,v) = k_n(x+ + u/(c n^{2/3}), x+ + v/(c n^{2/3})) / (c n^{2/3})`.
pub fn rescaled_edge_kernel(
    sys: &Arc<BiorthogonalSystem>,
    x_plus: f64,
    c: f64,
) -> Result<KernelField> {
    if !(c > 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "edge scale must be positive, got {c}"
        )));
    }
    let n = sys.n();
    let rate = c * (n as f64).powf(2.0 / 3.0);
    let sys = Arc::clone(sys);
    let scaling = ScalingMap {
        center: x_plus,
        c,
        gamma: 2.0 / 3.0,
        n,
    };
    Ok(KernelField::from_fn(
        format!("edge-rescaled(n={n})"),
        move |u, v| cd_kernel(&sys, x_plus + u / rate, x_plus + v / rate) / rate,
        ReferenceMeasure::lebesgue().with_scaling(scaling),
        Some(n),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn hermite_system(n: usize) -> BiorthogonalSystem {
        BiorthogonalSystem::build(&Potential::quadratic(), n).unwrap()
    }

    #[test]
    fn hermite_recurrence_coefficients() {
        // Weight exp(-n x^2): a_k = 0, b_k^2 = k/(2n).
        let n = 8;
        let sys = hermite_system(n);
        for k in 0..n {
            assert!(sys.recurrence_a()[k].abs() < 1e-12, "a_{k}");
        }
        for k in 1..n {
            let want = k as f64 / (2.0 * n as f64);
            let got = sys.recurrence_b()[k] * sys.recurrence_b()[k];
            assert!(
                (got - want).abs() < 1e-10,
                "b_{k}^2: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn shifted_weight_shifts_a() {
        let c = 0.8;
        let sys = BiorthogonalSystem::build(&Potential::shifted_quadratic(c), 6).unwrap();
        for k in 0..6 {
            assert!(
                (sys.recurrence_a()[k] - c).abs() < 1e-10,
                "a_{k} = {}",
                sys.recurrence_a()[k]
            );
        }
    }

    #[test]
    fn orthonormality_residual_small() {
        for pot in [
            Potential::quadratic(),
            Potential::quartic(),
            Potential::quartic_mix(),
        ] {
            for n in [20usize, 50] {
                let sys = BiorthogonalSystem::build(&pot, n).unwrap();
                let r = sys.orthonormality_residual();
                assert!(r < 1e-8, "{} (n={n}): residual {r:.3e}", pot.name());
            }
        }
    }

    #[test]
    fn trace_equals_particle_count() {
        let sys = hermite_system(12);
        assert_abs_diff_eq!(sys.kernel_trace(), 12.0, epsilon = 1e-8);
    }

    #[test]
    fn n_one_gaussian_kernel() {
        // k_1(x,y) = exp(-(x^2+y^2)/2)/sqrt(pi) for V = x^2, n = 1.
        let sys = hermite_system(1);
        for &(x, y) in &[(0.0f64, 0.0f64), (0.3, -0.7), (1.1, 0.4)] {
            let want = (-(x * x + y * y) / 2.0).exp() / std::f64::consts::PI.sqrt();
            assert_abs_diff_eq!(cd_kernel(&sys, x, y), want, epsilon = 1e-10);
        }
    }

    #[test]
    fn reproducing_property() {
        // int k_n(x,t) k_n(t,y) dt = k_n(x,y), quadrature oracle, at the
        // named pair and at 20 pseudo-random pairs
        let sys = hermite_system(6);
        let check = |x: f64, y: f64| {
            let lhs = sys
                .quadrature()
                .integrate(|t| cd_kernel(&sys, x, t) * cd_kernel(&sys, t, y));
            let rhs = cd_kernel(&sys, x, y);
            assert!(
                (lhs - rhs).abs() < 1e-7,
                "projection identity at ({x},{y}): {lhs} vs {rhs}"
            );
        };
        check(0.1, -0.2);
        let mut state = 0x12345678u64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 * 3.0 - 1.5
        };
        for _ in 0..20 {
            check(next(), next());
        }
    }

    #[test]
    fn quotient_matches_summation() {
        let sys = hermite_system(14);
        let pts = [-1.3, -0.4, 0.05, 0.6, 1.2];
        for &x in &pts {
            for &y in &pts {
                let q = cd_kernel(&sys, x, y);
                let s = cd_kernel_sum(&sys, x, y);
                assert!(
                    (q - s).abs() < 1e-9 * (1.0 + s.abs()),
                    "({x},{y}): quotient {q}, sum {s}"
                );
            }
        }
    }

    #[test]
    fn near_diagonal_is_continuous() {
        let sys = hermite_system(10);
        let k0 = cd_kernel(&sys, 0.3, 0.3);
        let k1 = cd_kernel(&sys, 0.3, 0.3 + 1e-9);
        let k2 = cd_kernel(&sys, 0.3, 0.3 + 1e-5);
        assert!((k0 - k1).abs() < 1e-6 * k0.abs());
        assert!((k0 - k2).abs() < 1e-4 * k0.abs());
    }

    #[test]
    fn bulk_diagonal_approaches_one() {
        let pot = Potential::quadratic();
        let kappa = pot.kappa(0.0).unwrap();
        let errors: Vec<f64> = [10usize, 20, 40, 80]
            .iter()
            .map(|&n| {
                let sys = Arc::new(BiorthogonalSystem::build(&pot, n).unwrap());
                let field = rescaled_bulk_kernel(&sys, 0.0, kappa).unwrap();
                (field.eval(0.0, 0.0) - 1.0).abs()
            })
            .collect();
        assert!(
            errors.windows(2).all(|p| p[1] < p[0]),
            "diagonal errors not decreasing: {errors:?}"
        );
        assert!(errors.last().unwrap() < &0.05);
    }

    #[test]
    fn coarse_quadrature_triggers_refinement_error() {
        // far too few nodes for degree-60 moments of exp(-30 x^2)
        let quad = QuadratureRule::gauss_legendre(24, -3.0, 3.0).unwrap();
        let r = stieltjes_recurrence(&Potential::quadratic(), 30, &quad);
        assert!(
            matches!(
                r,
                Err(CoreError::RefinementNeeded { .. }) | Err(CoreError::Degeneracy { .. })
            ),
            "expected a refinement or degeneracy error"
        );
    }

    #[test]
    fn rescaled_kernels_symmetric() {
        let sys = Arc::new(hermite_system(9));
        let bulk = rescaled_bulk_kernel(&sys, 0.0, 0.45).unwrap();
        let edge = rescaled_edge_kernel(&sys, 2f64.sqrt(), 2f64.sqrt()).unwrap();
        for &(u, v) in &[(0.3, -0.9), (1.4, 0.2)] {
            assert_abs_diff_eq!(bulk.eval(u, v), bulk.eval(v, u), epsilon = 1e-12);
            assert_abs_diff_eq!(edge.eval(u, v), edge.eval(v, u), epsilon = 1e-12);
        }
    }

    #[test]
    fn bulk_rejects_nonpositive_density() {
        let sys = Arc::new(hermite_system(4));
        assert!(matches!(
            rescaled_bulk_kernel(&sys, 0.0, 0.0),
            Err(CoreError::NotABulkPoint(_))
        ));
        assert!(rescaled_edge_kernel(&sys, 1.0, -1.0).is_err());
    }
}
