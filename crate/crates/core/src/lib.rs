//! Numerical laboratory for determinantal point processes built from
//! biorthogonal ensembles, and for their deformations by marking and
//! conditioning.
//!
//! The crate provides:
//!
//! * quadrature rules, the Airy function, and the sine / Airy / discrete
//!   sine limit kernels ([`quad`], [`airy`], [`kernels`]);
//! * orthogonal polynomial ensembles with varying exponential weights:
//!   recurrence coefficients, Christoffel-Darboux kernels, bulk and edge
//!   rescalings, and logarithmic-energy equilibrium densities
//!   ([`orthopoly`], [`equilibrium`]);
//! * discrete Coulomb gases on quantized node sets with their scaled
//!   lattice kernels ([`discrete`]);
//! * Nystrom discretization, Fredholm determinants and series, the
//!   conditioned kernel `K^sigma`, and generating functionals by two
//!   algebraically equivalent routes ([`operator`], [`symbol`]);
//! * a small-`n` Monte Carlo oracle that realizes the deformation by
//!   Bernoulli marking and rejection ([`mc`]).

// Frozen high-precision reference constants keep all their digits, and
// interval preconditions use `!(a < b)` so NaN endpoints fall into the
// error path.
#![allow(clippy::excessive_precision)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod airy;
pub mod discrete;
pub mod equilibrium;
pub mod error;
pub mod expr;
pub mod kernels;
pub mod mc;
pub mod measure;
pub mod operator;
pub mod orthopoly;
pub mod potential;
pub mod quad;
pub mod symbol;

pub use airy::{airy_ai, AiryValue};
pub use discrete::{
    coulomb_weight, discrete_orthonormal, quantized_nodes, scaled_discrete_kernel,
    DiscreteEnsemble, DiscreteWeights, NodeDensity, ScaledLattice,
};
pub use equilibrium::{
    constrained_equilibrium, equilibrium_density, ConstrainedEquilibrium, EquilibriumDensity,
    RegionKind,
};
pub use error::{CoreError, Result};
pub use kernels::{airy_kernel, discrete_sine_kernel, sine_kernel, KernelField};
pub use mc::{
    build_grid_density, estimate_pgf, mark_and_condition, sample, DensitySource, GridDensity,
    MarkedSample, MarkedSet, McEstimate,
};
pub use measure::{MeasureKind, ReferenceMeasure, ScalingMap};
pub use operator::{
    deformed_kernel, discretize, discretize_on_panels, fredholm_det, fredholm_series, pgf_deformed,
    DeformedOperator, DiscretizedOperator, Exactness, FredholmSeries, GeneratingFunctionalValue,
    PgfRoute,
};
pub use orthopoly::{
    cd_kernel, rescaled_bulk_kernel, rescaled_edge_kernel, stieltjes_recurrence, BiorthogonalSystem,
};
pub use potential::Potential;
pub use quad::QuadratureRule;
pub use symbol::{make_sigma_n, DeformationSymbol, ScaledSymbol, TestFunction};
