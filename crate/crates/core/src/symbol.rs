//! Deformation symbols `sigma: R -> [0,1]` and admissible test functions
//! `h: R -> [0,1)` of bounded support.
//!
//! Every symbol family corresponds to `sigma(u) = 1 - exp(-f(u))` for a
//! nonnegative `f`; the microscopic rescaling replaces `f(u)` by
//! `f(n^t u)`, so a scaled symbol is just an argument dilation.

use crate::error::{CoreError, Result};
use std::sync::Arc;

/// Constructor family for deformation symbols.
#[derive(Clone)]
pub enum DeformationSymbol {
    /// No deformation.
    Zero,
    /// Hard exclusion of the interval: `sigma = 1` inside.
    Indicator { interval: (f64, f64) },
    /// Thinning with probability `gamma` inside the interval.
    ThinnedIndicator { gamma: f64, interval: (f64, f64) },
    /// `sigma(u) = 1 / (1 + exp(-(slope u + shift)))`, `slope > 0`.
    Fermi { slope: f64, shift: f64 },
    /// `sigma(u) = 1 - exp(-f(u))` for a user-supplied nonnegative `f`
    /// supported in `support`.
    OneMinusExpF {
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        support: (f64, f64),
    },
}

impl DeformationSymbol {
    pub fn indicator(interval: (f64, f64)) -> Result<Self> {
        check_interval(interval)?;
        Ok(Self::Indicator { interval })
    }

    pub fn thinned_indicator(gamma: f64, interval: (f64, f64)) -> Result<Self> {
        check_interval(interval)?;
        if !(0.0..=1.0).contains(&gamma) {
            return Err(CoreError::InvalidParameter(format!(
                "thinning probability must lie in [0,1], got {gamma}"
            )));
        }
        Ok(Self::ThinnedIndicator { gamma, interval })
    }

    pub fn fermi(slope: f64, shift: f64) -> Result<Self> {
        if slope <= 0.0 || !slope.is_finite() || !shift.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "fermi symbol needs finite shift and slope > 0, got slope {slope}"
            )));
        }
        Ok(Self::Fermi { slope, shift })
    }

    /// `f(u) = amplitude * (1 - ((u-center)/radius)^2)^3` inside the bump,
    /// zero outside; a C^2 compactly supported exponent.
    pub fn one_minus_exp_bump(amplitude: f64, center: f64, radius: f64) -> Result<Self> {
        if amplitude < 0.0 || radius <= 0.0 {
            return Err(CoreError::InvalidParameter(
                "bump exponent needs amplitude >= 0 and radius > 0".into(),
            ));
        }
        let f = move |u: f64| {
            let s = (u - center) / radius;
            let t = 1.0 - s * s;
            if t > 0.0 {
                amplitude * t * t * t
            } else {
                0.0
            }
        };
        Ok(Self::OneMinusExpF {
            f: Arc::new(f),
            support: (center - radius, center + radius),
        })
    }

    pub fn one_minus_exp(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        support: (f64, f64),
    ) -> Result<Self> {
        check_interval(support)?;
        Ok(Self::OneMinusExpF {
            f: Arc::new(f),
            support,
        })
    }

    /// Evaluate the symbol.
    pub fn sigma(&self, u: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Indicator { interval } => {
                if interval.0 < u && u < interval.1 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::ThinnedIndicator { gamma, interval } => {
                if interval.0 < u && u < interval.1 {
                    *gamma
                } else {
                    0.0
                }
            }
            Self::Fermi { slope, shift } => 1.0 / (1.0 + (-(slope * u + shift)).exp()),
            Self::OneMinusExpF { f, .. } => {
                let fu = f(u);
                debug_assert!(fu >= 0.0, "exponent must be nonnegative");
                -(-fu).exp_m1()
            }
        }
    }

    /// Discontinuity locations, used to keep quadrature nodes off jumps.
    pub fn jumps(&self) -> Vec<f64> {
        match self {
            Self::Indicator { interval } | Self::ThinnedIndicator { interval, .. } => {
                vec![interval.0, interval.1]
            }
            _ => Vec::new(),
        }
    }

    /// Interval outside of which `sigma <= threshold`, clipped to `cap`.
    /// `None` when the symbol vanishes identically.
    pub fn effective_support(&self, threshold: f64, cap: (f64, f64)) -> Option<(f64, f64)> {
        match self {
            Self::Zero => None,
            Self::Indicator { interval } | Self::ThinnedIndicator { interval, .. } => Some((
                interval.0.max(cap.0).min(cap.1),
                interval.1.min(cap.1).max(cap.0),
            )),
            Self::Fermi { slope, shift } => {
                // sigma(u) <= threshold left of u_thr.
                let u_thr = (-(shift) + (threshold / (1.0 - threshold)).ln()) / slope;
                Some((u_thr.max(cap.0).min(cap.1), cap.1))
            }
            Self::OneMinusExpF { support, .. } => Some((
                support.0.max(cap.0).min(cap.1),
                support.1.min(cap.1).max(cap.0),
            )),
        }
    }

    /// Scale the deformation to `sigma_n(u) = 1 - exp(-f(n^t u))`.
    pub fn scaled(&self, n: usize, t: f64) -> Result<ScaledSymbol> {
        make_sigma_n(self, n, t)
    }
}

impl std::fmt::Debug for DeformationSymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Zero => write!(f, "Zero"),
            Self::Indicator { interval } => write!(f, "Indicator({interval:?})"),
            Self::ThinnedIndicator { gamma, interval } => {
                write!(f, "ThinnedIndicator({gamma}, {interval:?})")
            }
            Self::Fermi { slope, shift } => write!(f, "Fermi({slope}, {shift})"),
            Self::OneMinusExpF { support, .. } => write!(f, "OneMinusExpF(supp {support:?})"),
        }
    }
}

fn check_interval(interval: (f64, f64)) -> Result<()> {
    if interval.0 >= interval.1 {
        return Err(CoreError::InvalidParameter(format!(
            "interval must satisfy a < b, got {interval:?}"
        )));
    }
    Ok(())
}

/// A symbol composed with the sub-microscopic dilation `u -> n^t u`.
#[derive(Debug, Clone)]
pub struct ScaledSymbol {
    base: DeformationSymbol,
    rate: f64,
}

/// Build `sigma_n` from a symbol: `sigma_n(u) = 1 - exp(-f(n^t u))`,
/// which is the base symbol evaluated at `n^t u`.
///
/// `t = 0` leaves the symbol unchanged; `t > 0` pushes the deformation to
/// sub-microscopic scales.
pub fn make_sigma_n(symbol: &DeformationSymbol, n: usize, t: f64) -> Result<ScaledSymbol> {
    if n == 0 {
        return Err(CoreError::InvalidParameter("n must be >= 1".into()));
    }
    if !(t >= 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "sub-microscopic exponent must satisfy t >= 0, got {t}"
        )));
    }
    Ok(ScaledSymbol {
        base: symbol.clone(),
        rate: (n as f64).powf(t),
    })
}

impl ScaledSymbol {
    pub fn sigma(&self, u: f64) -> f64 {
        self.base.sigma(self.rate * u)
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn jumps(&self) -> Vec<f64> {
        self.base.jumps().iter().map(|j| j / self.rate).collect()
    }

    pub fn effective_support(&self, threshold: f64, cap: (f64, f64)) -> Option<(f64, f64)> {
        self.base
            .effective_support(threshold, (cap.0 * self.rate, cap.1 * self.rate))
            .map(|(a, b)| (a / self.rate, b / self.rate))
    }
}

/// Test-function families admissible in generating functionals:
/// continuous, bounded support, `0 <= h < 1`.
#[derive(Debug, Clone)]
pub struct TestFunction {
    kind: TestFunctionKind,
    amplitude: f64,
    interval: (f64, f64),
}

#[derive(Debug, Clone)]
enum TestFunctionKind {
    /// `a (1 - s^2)^3` on the interval (C^2 at the endpoints).
    Bump,
    /// Indicator softened by linear ramps of the given width.
    SoftIndicator { ramp: f64 },
    /// Plain scaled indicator. Discontinuous, hence outside the
    /// continuity hypotheses of the limit theorems; constructing one
    /// requires acknowledging that.
    Indicator,
}

impl TestFunction {
    pub fn bump(amplitude: f64, interval: (f64, f64)) -> Result<Self> {
        Self::validate(amplitude, interval)?;
        Ok(Self {
            kind: TestFunctionKind::Bump,
            amplitude,
            interval,
        })
    }

    /// Indicator of the interval softened over `ramp` on each side
    /// (typically one grid cell).
    pub fn soft_indicator(amplitude: f64, interval: (f64, f64), ramp: f64) -> Result<Self> {
        Self::validate(amplitude, interval)?;
        if ramp <= 0.0 || 2.0 * ramp > interval.1 - interval.0 {
            return Err(CoreError::InvalidParameter(
                "ramp must be positive and fit inside the interval".into(),
            ));
        }
        Ok(Self {
            kind: TestFunctionKind::SoftIndicator { ramp },
            amplitude,
            interval,
        })
    }

    /// Hard indicator `a 1_interval`. The limit theorems assume a
    /// continuous `h`; the caller must opt in to the discontinuity.
    pub fn indicator(
        amplitude: f64,
        interval: (f64, f64),
        outside_theorem_hypotheses: bool,
    ) -> Result<Self> {
        Self::validate(amplitude, interval)?;
        if !outside_theorem_hypotheses {
            return Err(CoreError::InvalidParameter(
                "hard-indicator h needs outside_theorem_hypotheses = true: \
                 the limit theorems assume a continuous h"
                    .into(),
            ));
        }
        Ok(Self {
            kind: TestFunctionKind::Indicator,
            amplitude,
            interval,
        })
    }

    /// Jump locations (empty for the continuous families).
    pub fn jumps(&self) -> Vec<f64> {
        match &self.kind {
            TestFunctionKind::Indicator => vec![self.interval.0, self.interval.1],
            _ => Vec::new(),
        }
    }

    fn validate(amplitude: f64, interval: (f64, f64)) -> Result<()> {
        check_interval(interval)?;
        if !(0.0..1.0).contains(&amplitude) {
            return Err(CoreError::InvalidParameter(format!(
                "test function must satisfy 0 <= sup h < 1, got amplitude {amplitude}"
            )));
        }
        Ok(())
    }

    pub fn eval(&self, u: f64) -> f64 {
        let (lo, hi) = self.interval;
        if u <= lo || u >= hi {
            return 0.0;
        }
        match &self.kind {
            TestFunctionKind::Bump => {
                let c = 0.5 * (lo + hi);
                let r = 0.5 * (hi - lo);
                let s = (u - c) / r;
                let t = 1.0 - s * s;
                self.amplitude * t * t * t
            }
            TestFunctionKind::SoftIndicator { ramp } => {
                let rise = ((u - lo) / ramp).min(1.0);
                let fall = ((hi - u) / ramp).min(1.0);
                self.amplitude * rise.min(fall)
            }
            TestFunctionKind::Indicator => self.amplitude,
        }
    }

    pub fn support(&self) -> (f64, f64) {
        self.interval
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn thinned_indicator_values() {
        let s = DeformationSymbol::thinned_indicator(0.5, (-1.0, 1.0)).unwrap();
        assert_eq!(s.sigma(0.0), 0.5);
        assert_eq!(s.sigma(2.0), 0.0);
    }

    #[test]
    fn all_families_stay_in_unit_interval() {
        let syms = [
            DeformationSymbol::Zero,
            DeformationSymbol::indicator((-0.5, 0.7)).unwrap(),
            DeformationSymbol::thinned_indicator(0.9, (-2.0, -1.0)).unwrap(),
            DeformationSymbol::fermi(1.5, -0.3).unwrap(),
            DeformationSymbol::one_minus_exp_bump(2.0, 0.0, 1.0).unwrap(),
        ];
        let mut u = -5.0;
        while u <= 5.0 {
            for s in &syms {
                let v = s.sigma(u);
                assert!((0.0..=1.0).contains(&v), "{s:?} at {u}: {v}");
            }
            u += 0.0173;
        }
    }

    #[test]
    fn scaled_symbol_is_argument_dilation() {
        let s = DeformationSymbol::fermi(1.0, 0.0).unwrap();
        let sn = make_sigma_n(&s, 16, 0.5).unwrap();
        assert_abs_diff_eq!(sn.sigma(0.25), s.sigma(4.0 * 0.25), epsilon = 1e-15);
    }

    #[test]
    fn t_zero_leaves_symbol_unchanged() {
        let s = DeformationSymbol::thinned_indicator(0.3, (-1.0, 1.0)).unwrap();
        let sn = make_sigma_n(&s, 100, 0.0).unwrap();
        for &u in &[-1.5, -0.2, 0.0, 0.9, 3.0] {
            assert_eq!(sn.sigma(u), s.sigma(u));
        }
    }

    #[test]
    fn zero_exponent_gives_zero_symbol() {
        let s = DeformationSymbol::one_minus_exp(|_| 0.0, (-1.0, 1.0)).unwrap();
        let sn = make_sigma_n(&s, 8, 1.0).unwrap();
        assert_eq!(sn.sigma(0.3), 0.0);
    }

    #[test]
    fn sub_microscopic_support_shrinkage() {
        // f supported in (-1,1), t = 1: sigma_n supported in (-1/n, 1/n).
        let s = DeformationSymbol::one_minus_exp_bump(1.0, 0.0, 1.0).unwrap();
        let n = 50;
        let sn = make_sigma_n(&s, n, 1.0).unwrap();
        assert!(sn.sigma(0.5 / n as f64) > 0.0);
        assert_eq!(sn.sigma(1.5 / n as f64), 0.0);
        // total mass shrinks like 1/n
        let q = crate::quad::QuadratureRule::gauss_legendre(200, -1.0, 1.0).unwrap();
        let mass_n = q.integrate(|u| sn.sigma(u));
        let mass_1 = q.integrate(|u| s.sigma(u));
        assert!(mass_n < mass_1 / 10.0);
    }

    #[test]
    fn make_sigma_n_validates() {
        let s = DeformationSymbol::Zero;
        assert!(make_sigma_n(&s, 0, 0.0).is_err());
        assert!(make_sigma_n(&s, 4, -0.1).is_err());
        assert!(DeformationSymbol::thinned_indicator(1.2, (0.0, 1.0)).is_err());
        assert!(DeformationSymbol::one_minus_exp_bump(-1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn bump_test_function_shape() {
        let h = TestFunction::bump(0.9, (-1.0, 1.0)).unwrap();
        assert_abs_diff_eq!(h.eval(0.0), 0.9, epsilon = 1e-15);
        assert_eq!(h.eval(1.0), 0.0);
        assert_eq!(h.eval(-3.0), 0.0);
        assert!(h.eval(0.5) > 0.0 && h.eval(0.5) < 0.9);
        assert!(TestFunction::bump(1.0, (-1.0, 1.0)).is_err());
    }

    #[test]
    fn hard_indicator_requires_opt_in() {
        assert!(TestFunction::indicator(0.9, (-1.0, 1.0), false).is_err());
        let h = TestFunction::indicator(0.9, (-1.0, 1.0), true).unwrap();
        assert_eq!(h.eval(0.3), 0.9);
        assert_eq!(h.eval(1.5), 0.0);
        assert_eq!(h.jumps(), vec![-1.0, 1.0]);
    }

    #[test]
    fn soft_indicator_plateau_and_ramp() {
        let h = TestFunction::soft_indicator(0.5, (-0.5, 0.5), 0.1).unwrap();
        assert_abs_diff_eq!(h.eval(0.0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(h.eval(-0.45), 0.25, epsilon = 1e-15);
        assert_eq!(h.eval(0.6), 0.0);
    }
}
