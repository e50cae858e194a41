//! Gaussian, exponential and polynomial-phase state preparation.
//!
//! Circuits are built from three parametric rotations on a base `alpha`
//! (see [`gate`]), simulated exactly or with ancilla post-selection folded
//! into diagonal factors ([`simulator`]), and costed in expected T-depth
//! under repeat-until-success execution ([`resources`]).
//!
//! Numerics are generic over [`Real`] (`f32` or `f64`); the `*64` aliases
//! cover the common case.
//!
//! ```
//! use gausskit::{estimate, EstimateOptions, GaussianSpec64, Mode};
//!
//! let spec = GaussianSpec64::new(0.9, 6, 1e-6, Mode::FullGaussian).unwrap();
//! let est = estimate(&spec, &EstimateOptions::default()).unwrap();
//! assert!(est.epsilon() < 1e-4);
//! ```

// `!(x > 0)` style guards reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod builder;
pub mod circuit;
pub mod error;
pub mod gate;
pub mod optimizer;
pub mod resources;
pub mod scalar;
pub mod simulator;
pub mod spec;
pub mod text;

pub use builder::{
    build_exponential, build_full_gaussian, build_gaussian_2d, build_half_gaussian, build_layered_gaussian,
    build_layered_gaussian_n, build_linear_phase, build_poly_phase, monomial_coefficients, MonomialExpansion,
};
pub use circuit::{validate, Circuit, Element, GateTally, Layer, LayeredCircuit, Violation, ViolationKind};
pub use error::{Error, Result};
pub use gate::{gate_matrix, Base, Control, Gate, Polarity, RotationKind};
pub use optimizer::{
    expected_t_depth, order_layers, pack_layers, prunable_control_depth, prune_circuit, prune_layered,
    qubit_threshold, qubit_threshold_base, Allocation, ErrorBudget, OrderingPlan, PruneReport, QubitThreshold,
};
pub use resources::{
    calibrate_delta, estimate, gate_t_cost, layered_t_depth, CostModel, DepthConvention, Estimate,
    EstimateOptions, GateClass, OrderStrategy, Rounding, TCost,
};
pub use scalar::{Real, C};
pub use simulator::{
    ideal_phase_state, ideal_state, l2_error, monte_carlo_rus, run_noisy, simulate_exact, simulate_postselected,
    IdealKind, SimOptions, SimReport, StateVector,
};
pub use spec::{GaussianSpec, Mode, QuadraticForm};

pub type Base64 = Base<f64>;
pub type Gate64 = Gate<f64>;
pub type Circuit64 = Circuit<f64>;
pub type LayeredCircuit64 = LayeredCircuit<f64>;
pub type GaussianSpec64 = GaussianSpec<f64>;
pub type StateVector64 = StateVector<f64>;
pub type SimReport64 = SimReport<f64>;
pub type Estimate64 = Estimate<f64>;

pub type Circuit32 = Circuit<f32>;
pub type GaussianSpec32 = GaussianSpec<f32>;
pub type StateVector32 = StateVector<f32>;
