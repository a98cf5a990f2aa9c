//! External-field potentials `V` for the varying weight `exp(-n V)`,
//! with optional closed-form equilibrium data.

use crate::error::{CoreError, Result};
use crate::expr::Expression;
use std::sync::Arc;

/// Closed-form equilibrium data attached to a potential.
#[derive(Clone)]
pub struct AnalyticEquilibrium {
    /// Support `[x-, x+]` of the equilibrium density.
    pub support: (f64, f64),
    /// The density itself (zero outside the support).
    pub density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// `C` in `density ~ C sqrt(x+ - x)` at the right edge.
    pub edge_coefficient: f64,
}

/// A confining potential on the line (or on `[0,1]` for discrete gases).
#[derive(Clone)]
pub struct Potential {
    name: String,
    v: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    is_convex: bool,
    is_even: bool,
    analytic: Option<AnalyticEquilibrium>,
    growth_checked: bool,
}

impl Potential {
    /// `V(x) = x^2`. Equilibrium density is the semicircle
    /// `(1/pi) sqrt(2 - x^2)` on `[-sqrt2, sqrt2]`.
    pub fn quadratic() -> Self {
        let support = (-std::f64::consts::SQRT_2, std::f64::consts::SQRT_2);
        Self {
            name: "quadratic".into(),
            v: Arc::new(|x| x * x),
            is_convex: true,
            is_even: true,
            analytic: Some(AnalyticEquilibrium {
                support,
                density: Arc::new(|x| {
                    let t = 2.0 - x * x;
                    if t > 0.0 {
                        t.sqrt() / std::f64::consts::PI
                    } else {
                        0.0
                    }
                }),
                // (1/pi) sqrt(2 sqrt2) = 2^{3/4}/pi
                edge_coefficient: 2f64.powf(0.75) / std::f64::consts::PI,
            }),
            growth_checked: true,
        }
    }

    /// `V(x) = x^4 / 4`.
    pub fn quartic() -> Self {
        Self {
            name: "quartic".into(),
            v: Arc::new(|x| 0.25 * x * x * x * x),
            is_convex: true,
            is_even: true,
            analytic: None,
            growth_checked: true,
        }
    }

    /// `V(x) = x^2 + x^4/20`.
    pub fn quartic_mix() -> Self {
        Self {
            name: "quartic-mix".into(),
            v: Arc::new(|x| x * x + x * x * x * x / 20.0),
            is_convex: true,
            is_even: true,
            analytic: None,
            growth_checked: true,
        }
    }

    /// `V(x) = (x - c)^2`.
    pub fn shifted_quadratic(c: f64) -> Self {
        Self {
            name: format!("shifted-quadratic({c})"),
            v: Arc::new(move |x| (x - c) * (x - c)),
            is_convex: true,
            is_even: c == 0.0,
            analytic: None,
            growth_checked: true,
        }
    }

    /// Parse `expression` as `V(x)`; the growth condition is verified at
    /// construction.
    pub fn custom(expression: &str, is_convex: bool, is_even: bool) -> Result<Self> {
        let e = Expression::parse(expression)?;
        let p = Self {
            name: format!("custom:{expression}"),
            v: Arc::new(move |x| e.eval(x)),
            is_convex,
            is_even,
            analytic: None,
            growth_checked: false,
        };
        p.growth_check()?;
        Ok(p)
    }

    /// Wrap a closure; growth is verified at construction.
    pub fn from_fn(
        name: impl Into<String>,
        v: impl Fn(f64) -> f64 + Send + Sync + 'static,
        is_convex: bool,
        is_even: bool,
    ) -> Result<Self> {
        let p = Self {
            name: name.into(),
            v: Arc::new(v),
            is_convex,
            is_even,
            analytic: None,
            growth_checked: false,
        };
        p.growth_check()?;
        Ok(p)
    }

    /// Potential used only on a bounded domain (discrete Coulomb gases on
    /// `[0,1]`); no growth condition applies.
    pub fn bounded_domain(
        name: impl Into<String>,
        v: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            v: Arc::new(v),
            is_convex: false,
            is_even: false,
            analytic: None,
            growth_checked: true,
        }
    }

    pub fn v(&self, x: f64) -> f64 {
        (self.v)(x)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_convex(&self) -> bool {
        self.is_convex
    }

    pub fn is_even(&self) -> bool {
        self.is_even
    }

    pub fn analytic(&self) -> Option<&AnalyticEquilibrium> {
        self.analytic.as_ref()
    }

    /// Equilibrium density at `x` when closed-form data is attached.
    pub fn kappa(&self, x: f64) -> Option<f64> {
        self.analytic.as_ref().map(|a| (a.density)(x))
    }

    /// Soft-edge scaling constant `c = (pi C)^{2/3}` from the attached
    /// edge coefficient; `sqrt(2)` for the quadratic potential.
    pub fn edge_scale(&self) -> Option<f64> {
        self.analytic
            .as_ref()
            .map(|a| (std::f64::consts::PI * a.edge_coefficient).powf(2.0 / 3.0))
    }

    /// Sampled check of `V(x)/log(1+x^2) -> +infinity`: the ratio must
    /// grow monotonically through `|x| = 1e2, 1e3, 1e4` on both sides.
    pub fn growth_check(&self) -> Result<()> {
        if self.growth_checked {
            return Ok(());
        }
        for sign in [-1.0, 1.0] {
            let r: Vec<f64> = [1e2, 1e3, 1e4]
                .iter()
                .map(|&m| {
                    let x: f64 = sign * m;
                    self.v(x) / (1.0 + x * x).ln()
                })
                .collect();
            if !(r[0].is_finite() && r[1].is_finite() && r[2].is_finite()) {
                return Err(CoreError::InvalidParameter(format!(
                    "potential {} is not finite at the growth checkpoints",
                    self.name
                )));
            }
            if !(r[0] < r[1] && r[1] < r[2] && r[2] > 2.0 * r[0].max(1.0)) {
                return Err(CoreError::InvalidParameter(format!(
                    "potential {} fails the growth condition: ratios {:?} at |x| = 1e2,1e3,1e4",
                    self.name, r
                )));
            }
        }
        Ok(())
    }

    /// Interval outside of which `exp(-n V(x)) (1+|x|)^{2n}` is below
    /// `1e-18` of its maximum, so that all moments of degree `<= 2n` are
    /// resolved by quadrature on the interval.
    pub fn truncated_support(&self, n: usize) -> Result<(f64, f64)> {
        let nf = n as f64;
        let g = |x: f64| -nf * self.v(x) + 2.0 * nf * (1.0 + x.abs()).ln();
        // locate the maximum on a coarse grid, then expand outwards
        let mut gmax = f64::NEG_INFINITY;
        let mut xmax = 0.0;
        let coarse = 4000;
        for i in 0..=coarse {
            let x = -20.0 + 40.0 * i as f64 / coarse as f64;
            let v = g(x);
            if v > gmax {
                gmax = v;
                xmax = x;
            }
        }
        if !gmax.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "potential {} is not finite near its minimum",
                self.name
            )));
        }
        let drop = 45.0; // e^-45 ~ 3e-20
        let step = 0.01;
        let mut hi = xmax;
        while g(hi) > gmax - drop {
            hi += step * (1.0 + hi.abs());
            if hi > 1e6 {
                return Err(CoreError::InvalidParameter(format!(
                    "potential {} grows too slowly to truncate",
                    self.name
                )));
            }
        }
        let mut lo = xmax;
        while g(lo) > gmax - drop {
            lo -= step * (1.0 + lo.abs());
            if lo < -1e6 {
                return Err(CoreError::InvalidParameter(format!(
                    "potential {} grows too slowly to truncate",
                    self.name
                )));
            }
        }
        Ok((lo, hi))
    }
}

impl std::fmt::Debug for Potential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Potential")
            .field("name", &self.name)
            .field("is_convex", &self.is_convex)
            .field("is_even", &self.is_even)
            .field("analytic", &self.analytic.is_some())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_analytic_data() {
        let p = Potential::quadratic();
        let a = p.analytic().unwrap();
        assert!((a.support.1 - 2f64.sqrt()).abs() < 1e-15);
        // mass of the semicircle
        let q = crate::quad::QuadratureRule::gauss_legendre(400, a.support.0, a.support.1).unwrap();
        let mass = q.integrate(|x| (a.density)(x));
        assert!((mass - 1.0).abs() < 1e-7, "mass {mass}");
        // edge scale (pi C)^{2/3} = sqrt(2) for V = x^2
        assert!((p.edge_scale().unwrap() - 2f64.sqrt()).abs() < 1e-12);
        // kappa(0) = sqrt(2)/pi
        assert!((p.kappa(0.0).unwrap() - 2f64.sqrt() / std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn growth_check_rejects_log_potential() {
        // V = 2 log(1+x^2) has a constant ratio and must be rejected.
        assert!(Potential::from_fn("log-pot", |x| 2.0 * (1.0 + x * x).ln(), false, true).is_err());
        assert!(Potential::custom("x^2", true, true).is_ok());
    }

    #[test]
    fn truncation_covers_weighted_moments() {
        let p = Potential::quadratic();
        let n = 10;
        let (lo, hi) = p.truncated_support(n).unwrap();
        assert!(lo < -2f64.sqrt() && hi > 2f64.sqrt());
        // weighted moment integrand is negligible at the cut
        let nf = n as f64;
        let rel = |x: f64| (-nf * p.v(x)).exp() * (1.0 + x.abs()).powf(2.0 * nf);
        let peak = rel(0.618); // near the maximizer of the bound
        assert!(rel(hi) / peak < 1e-15);
        assert!(rel(lo) / peak < 1e-15);
    }

    #[test]
    fn custom_expression_round_trip() {
        let p = Potential::custom("x^2 + x^4/20", true, true).unwrap();
        assert!((p.v(1.5) - (2.25 + 5.0625 / 20.0)).abs() < 1e-14);
    }
}
