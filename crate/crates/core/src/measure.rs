//! Reference measures underlying the point processes: a continuous density
//! on an interval, or a counting measure on a finite node set, together
//! with the metadata of the microscopic scaling map `x(u) = x* + u/(c n^g)`.

use crate::error::{CoreError, Result};
use std::fmt;
use std::sync::Arc;

/// The scaling map between macroscopic positions and microscopic
/// coordinates, `x(u) = center + u / (c * n^gamma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingMap {
    pub center: f64,
    pub c: f64,
    pub gamma: f64,
    pub n: usize,
}

impl ScalingMap {
    pub fn rate(&self) -> f64 {
        self.c * (self.n as f64).powf(self.gamma)
    }

    /// Macroscopic position of a microscopic coordinate.
    pub fn position(&self, u: f64) -> f64 {
        self.center + u / self.rate()
    }

    /// Microscopic coordinate of a macroscopic position.
    pub fn coordinate(&self, x: f64) -> f64 {
        (x - self.center) * self.rate()
    }
}

#[derive(Clone)]
pub enum MeasureKind {
    /// Absolutely continuous measure `density(u) du` on `support`.
    ContinuousDensity {
        density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        support: (f64, f64),
    },
    /// Counting measure on a finite, strictly increasing node list.
    Counting { nodes: Vec<f64> },
}

#[derive(Clone)]
pub struct ReferenceMeasure {
    kind: MeasureKind,
    scaling: Option<ScalingMap>,
}

impl ReferenceMeasure {
    /// Lebesgue measure on the whole line.
    pub fn lebesgue() -> Self {
        Self {
            kind: MeasureKind::ContinuousDensity {
                density: Arc::new(|_| 1.0),
                support: (f64::NEG_INFINITY, f64::INFINITY),
            },
            scaling: None,
        }
    }

    pub fn continuous(
        density: impl Fn(f64) -> f64 + Send + Sync + 'static,
        support: (f64, f64),
    ) -> Self {
        Self {
            kind: MeasureKind::ContinuousDensity {
                density: Arc::new(density),
                support,
            },
            scaling: None,
        }
    }

    pub fn counting(nodes: Vec<f64>) -> Result<Self> {
        if nodes.windows(2).any(|p| p[0] >= p[1]) {
            return Err(CoreError::InvalidParameter(
                "counting-measure nodes must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            kind: MeasureKind::Counting { nodes },
            scaling: None,
        })
    }

    pub fn with_scaling(mut self, scaling: ScalingMap) -> Self {
        self.scaling = Some(scaling);
        self
    }

    pub fn kind(&self) -> &MeasureKind {
        &self.kind
    }

    pub fn scaling(&self) -> Option<&ScalingMap> {
        self.scaling.as_ref()
    }

    pub fn is_counting(&self) -> bool {
        matches!(self.kind, MeasureKind::Counting { .. })
    }
}

impl fmt::Debug for ReferenceMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            MeasureKind::ContinuousDensity { support, .. } => f
                .debug_struct("ReferenceMeasure::ContinuousDensity")
                .field("support", support)
                .field("scaling", &self.scaling)
                .finish(),
            MeasureKind::Counting { nodes } => f
                .debug_struct("ReferenceMeasure::Counting")
                .field("nodes", &nodes.len())
                .field("scaling", &self.scaling)
                .finish(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_round_trip() {
        let s = ScalingMap {
            center: 0.3,
            c: 2.0,
            gamma: 2.0 / 3.0,
            n: 64,
        };
        assert!((s.rate() - 2.0 * 16.0).abs() < 1e-12);
        let u = 1.7;
        assert!((s.coordinate(s.position(u)) - u).abs() < 1e-12);
    }

    #[test]
    fn counting_requires_increasing_nodes() {
        assert!(ReferenceMeasure::counting(vec![0.0, 1.0, 1.0]).is_err());
        assert!(ReferenceMeasure::counting(vec![0.0, 0.5, 1.0]).is_ok());
    }
}
