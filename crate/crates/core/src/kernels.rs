//! Limit correlation kernels and the evaluable kernel-with-measure pair.

use crate::airy::airy_ai;
use crate::error::{CoreError, Result};
use crate::measure::ReferenceMeasure;
use std::sync::Arc;

/// `sin(pi(u-v)) / (pi(u-v))`, with the removable singularity filled in.
pub fn sine_kernel(u: f64, v: f64) -> f64 {
    let z = std::f64::consts::PI * (u - v);
    if z.abs() < 1e-4 {
        // Taylor: 1 - z^2/6 + z^4/120.
        let z2 = z * z;
        1.0 - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

/// Airy kernel `(Ai(u)Ai'(v) - Ai(v)Ai'(u)) / (u - v)`; on the diagonal
/// the limit `Ai'(u)^2 - u Ai(u)^2`.
pub fn airy_kernel(u: f64, v: f64) -> Result<f64> {
    if (u - v).abs() < 1e-6 * (1.0 + u.abs().max(v.abs())) {
        let m = 0.5 * (u + v);
        let a = airy_ai(m)?;
        Ok(a.ai_prime * a.ai_prime - m * a.ai * a.ai)
    } else {
        let au = airy_ai(u)?;
        let av = airy_ai(v)?;
        Ok((au.ai * av.ai_prime - av.ai * au.ai_prime) / (u - v))
    }
}

/// Discrete sine kernel `(beta kappa / rho_star) * sinc(pi(u-v))`.
///
/// Continuous on the whole plane even though the associated process lives
/// on a lattice.
pub fn discrete_sine_kernel(u: f64, v: f64, beta: f64, kappa: f64, rho_star: f64) -> Result<f64> {
    discrete_sine_level(beta, kappa, rho_star).map(|level| level * sine_kernel(u, v))
}

fn discrete_sine_level(beta: f64, kappa: f64, rho_star: f64) -> Result<f64> {
    if !(0.0 < beta && beta < 1.0) {
        return Err(CoreError::InvalidParameter(format!(
            "discrete sine kernel needs 0 < beta < 1, got {beta}"
        )));
    }
    if kappa <= 0.0 || rho_star <= 0.0 {
        return Err(CoreError::InvalidParameter(
            "discrete sine kernel needs kappa > 0 and rho_star > 0".into(),
        ));
    }
    Ok(beta * kappa / rho_star)
}

/// An evaluable two-point kernel together with its reference measure.
#[derive(Clone)]
pub struct KernelField {
    eval: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    measure: ReferenceMeasure,
    finite_rank: Option<usize>,
    label: String,
}

impl KernelField {
    pub fn from_fn(
        label: impl Into<String>,
        eval: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        measure: ReferenceMeasure,
        finite_rank: Option<usize>,
    ) -> Self {
        Self {
            eval: Arc::new(eval),
            measure,
            finite_rank,
            label: label.into(),
        }
    }

    /// Sine kernel on the line with Lebesgue reference measure.
    pub fn sine() -> Self {
        Self::from_fn("sine", sine_kernel, ReferenceMeasure::lebesgue(), None)
    }

    /// Airy kernel on the line with Lebesgue reference measure.
    pub fn airy() -> Self {
        Self::from_fn(
            "airy",
            |u, v| airy_kernel(u, v).expect("airy kernel argument within validated range"),
            ReferenceMeasure::lebesgue(),
            None,
        )
    }

    /// Discrete sine kernel with counting reference measure on its own
    /// lattice `(beta kappa / rho_star) Z` truncated to `window`.
    ///
    /// On that spacing the Fourier symbol of the kernel is an indicator,
    /// so the operator is a projection; the scaled Coulomb-gas lattice
    /// (spacing `kappa/rho_star`) maps onto it by the dilation
    /// `u -> beta u`.
    pub fn discrete_sine(beta: f64, kappa: f64, rho_star: f64, window: (f64, f64)) -> Result<Self> {
        let level = discrete_sine_level(beta, kappa, rho_star)?;
        if !(window.0 < window.1) {
            return Err(CoreError::InvalidParameter(
                "discrete sine window must be non-empty".into(),
            ));
        }
        let spacing = beta * kappa / rho_star;
        let j_lo = (window.0 / spacing).ceil() as i64;
        let j_hi = (window.1 / spacing).floor() as i64;
        if j_lo > j_hi {
            return Err(CoreError::DegenerateOperator(
                "window contains no lattice nodes".into(),
            ));
        }
        let nodes: Vec<f64> = (j_lo..=j_hi).map(|j| j as f64 * spacing).collect();
        Ok(Self::from_fn(
            "discrete-sine",
            move |u, v| level * sine_kernel(u, v),
            ReferenceMeasure::counting(nodes)?,
            None,
        ))
    }

    pub fn eval(&self, u: f64, v: f64) -> f64 {
        (self.eval)(u, v)
    }

    pub fn measure(&self) -> &ReferenceMeasure {
        &self.measure
    }

    /// `Some(n)` when the kernel is a rank-`n` projection by construction.
    pub fn finite_rank(&self) -> Option<usize> {
        self.finite_rank
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl std::fmt::Debug for KernelField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KernelField")
            .field("label", &self.label)
            .field("finite_rank", &self.finite_rank)
            .field("measure", &self.measure)
            .finish()
    }
}
