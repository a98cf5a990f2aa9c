//! Quadrature rules used to discretize reference measures and integral
//! operators.
//!
//! Gauss-Legendre nodes are found by Newton iteration on the Legendre
//! recurrence, seeded with the Chebyshev-angle estimate. A rule of order
//! `m` integrates polynomials up to degree `2m - 1` exactly.

use crate::error::{CoreError, Result};

/// Nodes and positive weights discretizing an integral over `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    interval: (f64, f64),
}

impl QuadratureRule {
    /// Gauss-Legendre rule of the given order on `[a, b]`.
    ///
    /// Endpoints must be finite; unbounded integrals are handled upstream
    /// by truncating the support before requesting a rule.
    pub fn gauss_legendre(order: usize, a: f64, b: f64) -> Result<Self> {
        if order == 0 {
            return Err(CoreError::InvalidParameter(
                "quadrature order must be >= 1".into(),
            ));
        }
        if !a.is_finite() || !b.is_finite() {
            return Err(CoreError::InvalidParameter(
                "quadrature endpoints must be finite".into(),
            ));
        }
        if a >= b {
            return Err(CoreError::InvalidParameter(format!(
                "quadrature interval must satisfy a < b, got [{a}, {b}]"
            )));
        }

        let m = order;
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];

        // Symmetric rule: only the lower half needs a Newton solve.
        for i in 0..m.div_ceil(2) {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut pp = 0.0;
            for _ in 0..100 {
                // Legendre recurrence up to degree m at z.
                let mut p1 = 1.0;
                let mut p2 = 0.0;
                for k in 0..m {
                    let p3 = p2;
                    p2 = p1;
                    p1 = ((2 * k + 1) as f64 * z * p2 - k as f64 * p3) / (k + 1) as f64;
                }
                pp = m as f64 * (z * p1 - p2) / (z * z - 1.0);
                let dz = p1 / pp;
                z -= dz;
                if dz.abs() < 1e-15 {
                    break;
                }
            }
            let w = 2.0 * half / ((1.0 - z * z) * pp * pp);
            nodes[i] = mid - half * z;
            weights[i] = w;
            nodes[m - 1 - i] = mid + half * z;
            weights[m - 1 - i] = w;
        }

        Ok(Self {
            nodes,
            weights,
            interval: (a, b),
        })
    }

    /// Midpoint rule with `m` equal cells on `[a, b]`.
    ///
    /// Used where samples and determinants must live on the same grid.
    pub fn midpoint(m: usize, a: f64, b: f64) -> Result<Self> {
        if m == 0 {
            return Err(CoreError::InvalidParameter(
                "midpoint rule needs at least one cell".into(),
            ));
        }
        if !a.is_finite() || !b.is_finite() || a >= b {
            return Err(CoreError::InvalidParameter(
                "midpoint rule needs a finite interval with a < b".into(),
            ));
        }
        let h = (b - a) / m as f64;
        let nodes = (0..m).map(|i| a + (i as f64 + 0.5) * h).collect();
        Ok(Self {
            nodes,
            weights: vec![h; m],
            interval: (a, b),
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    /// Cell width of a midpoint rule; `None` for non-uniform weights.
    pub fn uniform_cell(&self) -> Option<f64> {
        let w0 = self.weights[0];
        if self.weights.iter().all(|&w| (w - w0).abs() < 1e-15 * w0) {
            Some(w0)
        } else {
            None
        }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn order_one_is_midpoint() {
        let q = QuadratureRule::gauss_legendre(1, -1.0, 1.0).unwrap();
        assert_eq!(q.len(), 1);
        assert_abs_diff_eq!(q.nodes()[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.weights()[0], 2.0, epsilon = 1e-15);
    }

    #[test]
    fn order_two_classical_nodes() {
        let q = QuadratureRule::gauss_legendre(2, -1.0, 1.0).unwrap();
        let r = 1.0 / 3f64.sqrt();
        assert_abs_diff_eq!(q.nodes()[0], -r, epsilon = 1e-15);
        assert_abs_diff_eq!(q.nodes()[1], r, epsilon = 1e-15);
        assert_abs_diff_eq!(q.weights()[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.weights()[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn order_two_integrates_x_squared() {
        let q = QuadratureRule::gauss_legendre(2, -1.0, 1.0).unwrap();
        assert_abs_diff_eq!(q.integrate(|x| x * x), 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn exactness_up_to_degree_2m_minus_1() {
        // Random-ish intervals, all monomials up to the exactness degree.
        for &(a, b) in &[(-1.0, 1.0), (0.3, 2.7), (-5.0, -0.25), (-0.7, 11.0)] {
            for m in 1..=12usize {
                let q = QuadratureRule::gauss_legendre(m, a, b).unwrap();
                for k in 0..=(2 * m - 1) {
                    let exact = (b.powi(k as i32 + 1) - a.powi(k as i32 + 1)) / (k as f64 + 1.0);
                    let got = q.integrate(|x| x.powi(k as i32));
                    let scale = exact.abs().max(1.0);
                    assert!(
                        (got - exact).abs() < 1e-12 * scale,
                        "m={m} k={k} [{a},{b}]: got {got}, want {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn weights_positive_nodes_increasing() {
        let q = QuadratureRule::gauss_legendre(57, -2.0, 3.0).unwrap();
        assert!(q.weights().iter().all(|&w| w > 0.0));
        assert!(q.nodes().windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(QuadratureRule::gauss_legendre(0, 0.0, 1.0).is_err());
        assert!(QuadratureRule::gauss_legendre(4, 1.0, 1.0).is_err());
        assert!(QuadratureRule::gauss_legendre(4, 0.0, f64::INFINITY).is_err());
        assert!(QuadratureRule::gauss_legendre(4, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn midpoint_rule_cells() {
        let q = QuadratureRule::midpoint(4, 0.0, 2.0).unwrap();
        assert_eq!(q.nodes(), &[0.25, 0.75, 1.25, 1.75]);
        assert_eq!(q.uniform_cell(), Some(0.5));
        assert_abs_diff_eq!(q.integrate(|_| 1.0), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn high_order_against_analytic_integral() {
        let q = QuadratureRule::gauss_legendre(60, 0.0, 1.0).unwrap();
        let got = q.integrate(|x| (3.0 * x).exp());
        let exact = (3f64.exp() - 1.0) / 3.0;
        assert_abs_diff_eq!(got, exact, epsilon = 1e-13 * exact);
    }
}
