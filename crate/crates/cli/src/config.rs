//! Experiment configuration: TOML key-value files mirroring the CLI
//! scenarios, with validation and a content hash for reproducibility.

use anyhow::{bail, Context, Result};
use detform_core::{DeformationSymbol, Potential, TestFunction};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    BulkSine,
    EdgeAiry,
    DiscreteSine,
    McVerify,
    Gap,
    Equilibrium,
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Scenario::BulkSine => "bulk-sine",
            Scenario::EdgeAiry => "edge-airy",
            Scenario::DiscreteSine => "discrete-sine",
            Scenario::McVerify => "mc-verify",
            Scenario::Gap => "gap",
            Scenario::Equilibrium => "equilibrium",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub potential: PotentialSpec,
    #[serde(default)]
    pub symbol: SymbolSpec,
    #[serde(default)]
    pub h: TestFunctionSpec,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default)]
    pub numerics: NumericsSpec,
    #[serde(default)]
    pub discrete: DiscreteSpec,
    #[serde(default)]
    pub mc: McSpec,
    #[serde(default)]
    pub gap: GapSpec,
    #[serde(default)]
    pub equilibrium: EquilibriumSpec,
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PotentialSpec {
    /// "quadratic", "quartic", "quartic-mix", or "custom:<expression>".
    pub name: String,
    /// Convexity declaration for custom potentials.
    #[serde(default)]
    pub convex: bool,
    #[serde(default)]
    pub even: bool,
    /// Bulk reference point.
    #[serde(default)]
    pub x_star: f64,
}

impl Default for PotentialSpec {
    fn default() -> Self {
        Self {
            name: "quadratic".into(),
            convex: true,
            even: true,
            x_star: 0.0,
        }
    }
}

impl PotentialSpec {
    pub fn build(&self) -> Result<Potential> {
        let p = match self.name.as_str() {
            "quadratic" => Potential::quadratic(),
            "quartic" => Potential::quartic(),
            "quartic-mix" => Potential::quartic_mix(),
            other => {
                if let Some(expr) = other.strip_prefix("custom:") {
                    Potential::custom(expr, self.convex, self.even)
                        .with_context(|| format!("invalid custom potential {expr:?}"))?
                } else {
                    bail!("unknown potential {other:?}; use quadratic, quartic, quartic-mix, or custom:<expr>");
                }
            }
        };
        Ok(p)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolSpec {
    /// "zero", "indicator", "thinned-indicator", "fermi", "one-minus-exp".
    pub family: String,
    #[serde(default)]
    pub interval: Option<(f64, f64)>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub slope: Option<f64>,
    #[serde(default)]
    pub shift: Option<f64>,
    #[serde(default)]
    pub amplitude: Option<f64>,
    #[serde(default)]
    pub center: Option<f64>,
    #[serde(default)]
    pub radius: Option<f64>,
    /// Sub-microscopic exponent `t >= 0`.
    #[serde(default)]
    pub t: f64,
}

impl Default for SymbolSpec {
    fn default() -> Self {
        Self {
            family: "zero".into(),
            interval: None,
            gamma: None,
            slope: None,
            shift: None,
            amplitude: None,
            center: None,
            radius: None,
            t: 0.0,
        }
    }
}

impl SymbolSpec {
    pub fn build(&self) -> Result<DeformationSymbol> {
        let sym = match self.family.as_str() {
            "zero" => DeformationSymbol::Zero,
            "indicator" => DeformationSymbol::indicator(
                self.interval.context("indicator symbol needs `interval`")?,
            )?,
            "thinned-indicator" => DeformationSymbol::thinned_indicator(
                self.gamma.context("thinned indicator needs `gamma`")?,
                self.interval
                    .context("thinned indicator needs `interval`")?,
            )?,
            "fermi" => {
                DeformationSymbol::fermi(self.slope.unwrap_or(1.0), self.shift.unwrap_or(0.0))?
            }
            "one-minus-exp" => DeformationSymbol::one_minus_exp_bump(
                self.amplitude.unwrap_or(1.0),
                self.center.unwrap_or(0.0),
                self.radius.context("one-minus-exp needs `radius`")?,
            )?,
            other => bail!("unknown symbol family {other:?}"),
        };
        Ok(sym)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TestFunctionSpec {
    /// "bump", "soft-indicator", or "indicator" (the latter requires
    /// `outside_theorem_hypotheses = true`).
    pub family: String,
    pub amplitude: f64,
    pub interval: (f64, f64),
    /// Ramp width of the softened indicator.
    #[serde(default)]
    pub ramp: Option<f64>,
    /// Acknowledge that a discontinuous h leaves the theorem hypotheses.
    #[serde(default)]
    pub outside_theorem_hypotheses: bool,
}

impl Default for TestFunctionSpec {
    fn default() -> Self {
        Self {
            family: "bump".into(),
            amplitude: 0.9,
            interval: (-1.0, 1.0),
            ramp: None,
            outside_theorem_hypotheses: false,
        }
    }
}

impl TestFunctionSpec {
    pub fn build(&self) -> Result<TestFunction> {
        let h = match self.family.as_str() {
            "bump" => TestFunction::bump(self.amplitude, self.interval)?,
            "soft-indicator" => {
                let default_ramp = 0.05 * (self.interval.1 - self.interval.0);
                TestFunction::soft_indicator(
                    self.amplitude,
                    self.interval,
                    self.ramp.unwrap_or(default_ramp),
                )?
            }
            "indicator" => TestFunction::indicator(
                self.amplitude,
                self.interval,
                self.outside_theorem_hypotheses,
            )?,
            other => bail!("unknown test-function family {other:?}"),
        };
        Ok(h)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    /// Particle counts, strictly increasing.
    pub n: Vec<usize>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            n: vec![10, 20, 40, 80],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsSpec {
    /// Quadrature density of operator windows, points per unit length.
    pub quad_points_per_unit: usize,
    /// Manual window override.
    #[serde(default)]
    pub window: Option<(f64, f64)>,
    /// Cap on auto windows for symbols without compact support (bulk).
    pub bulk_cap: (f64, f64),
    /// Cap for edge scenarios.
    pub edge_cap: (f64, f64),
}

impl Default for NumericsSpec {
    fn default() -> Self {
        Self {
            quad_points_per_unit: 30,
            window: None,
            bulk_cap: (-3.0, 3.0),
            edge_cap: (-3.0, 6.0),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscreteSpec {
    /// Filling fraction `n = beta N`.
    pub beta: f64,
    /// "krawtchouk" or "hahn".
    pub weight: String,
    pub p: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// Node density: "uniform" or "perturbed" (1 + 0.3 sin 2 pi x).
    pub rho: String,
    pub x_star: f64,
    /// Lattice sizes `N` for the sweep.
    pub n_sweep: Vec<usize>,
}

impl Default for DiscreteSpec {
    fn default() -> Self {
        Self {
            beta: 0.5,
            weight: "krawtchouk".into(),
            p: 0.5,
            a: 1.0,
            b: 2.0,
            c: 0.0,
            d: 0.0,
            rho: "uniform".into(),
            x_star: 0.5,
            n_sweep: vec![64, 128, 256],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSpec {
    pub replicas: usize,
    pub cells: usize,
    pub span: (f64, f64),
    /// Particle count of the exact-enumeration ensemble.
    pub n: usize,
    /// Optional CSV dump of the raw marked samples
    /// (columns: replica, particle, position, mark).
    pub dump_samples: Option<String>,
}

impl Default for McSpec {
    fn default() -> Self {
        Self {
            replicas: 100_000,
            cells: 400,
            span: (-4.5, 4.5),
            n: 2,
            dump_samples: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GapSpec {
    /// "sine", "airy", or "discrete-sine".
    pub kernel: String,
    pub s_values: Vec<f64>,
    /// Discrete-sine parameters.
    pub beta: f64,
    pub kappa: f64,
    pub rho_star: f64,
    /// Cross-check with the truncated Fredholm series where affordable.
    pub series_max_s: f64,
}

impl Default for GapSpec {
    fn default() -> Self {
        Self {
            kernel: "sine".into(),
            s_values: vec![0.0, 0.1, 0.25, 0.5, 1.0, 1.5, 2.0],
            beta: 0.5,
            kappa: 1.0,
            rho_star: 1.0,
            series_max_s: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquilibriumSpec {
    pub grid_points: usize,
    pub bracket: (f64, f64),
    /// Solve the box-constrained discrete-gas problem instead.
    pub constrained: bool,
    /// Skip the closed-form shortcut.
    pub force_numeric: bool,
}

impl Default for EquilibriumSpec {
    fn default() -> Self {
        Self {
            grid_points: 2000,
            bracket: (-2.5, 2.5),
            constrained: false,
            force_numeric: true,
        }
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweep.n.is_empty() || self.sweep.n.windows(2).any(|p| p[0] >= p[1]) {
            bail!("sweep.n must be non-empty and strictly increasing");
        }
        if self.discrete.n_sweep.windows(2).any(|p| p[0] >= p[1]) {
            bail!("discrete.n_sweep must be strictly increasing");
        }
        if !(0.0 < self.discrete.beta && self.discrete.beta < 1.0) {
            bail!("discrete.beta must lie in (0,1)");
        }
        if self.scenario == Scenario::McVerify && self.mc.n > 3 {
            bail!("mc.n is capped at 3 (exact enumeration)");
        }
        if self.symbol.t < 0.0 {
            bail!("symbol.t must be >= 0");
        }
        // symbol and test function must construct
        self.symbol.build()?;
        self.h.build()?;
        self.potential.build()?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let canon = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canon.as_bytes());
        let digest = hasher.finalize();
        let mut out = String::with_capacity(16);
        for b in digest.iter().take(8) {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }
}
