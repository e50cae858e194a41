//! Statevector simulation.
//!
//! Two backends share one contract. [`simulate_exact`] keeps ancilla in the
//! register and applies every gate as a unitary, projecting at each barrier.
//! [`simulate_postselected`] never allocates ancilla: a `B` gate on a fresh
//! ancilla that is later post-selected on `|0>` acts on the data register as
//! multiplication of its controlled subspace by the gate's top-left entry.
//! Both record one success probability per barrier.

mod exact;
mod ideal;
mod noise;
mod postselect;
mod rus;
mod state;

pub use exact::{simulate_exact, simulate_exact_with};
pub use ideal::{
    gaussian_normalizer, ideal_exponential_state, ideal_gaussian, ideal_gaussian_2d, ideal_gaussian_beta,
    ideal_half_gaussian,
    ideal_phase_state, ideal_state, l2_error, IdealKind,
};
pub use noise::{apply_noisy_rotation, perturbation, run_noisy, NoisyRotations};
pub use postselect::{simulate_postselected, simulate_postselected_circuit, simulate_postselected_with};
pub use rus::{monte_carlo_rus, sample_rus, RusStats};
pub use state::StateVector;

use crate::error::{Error, Result};
use crate::gate::{gate_matrix, Base, Gate, Matrix2};
use crate::scalar::{Real, C};

pub const DEFAULT_MAX_QUBITS: usize = 26;
pub const MEM_LIMIT_ENV: &str = "GAUSSKIT_MEM_LIMIT_MB";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimOptions {
    /// Largest register (data plus live ancilla) the simulator will build.
    pub max_qubits: usize,
    /// Cap on the amplitude buffer in bytes.
    pub memory_limit: Option<usize>,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { max_qubits: DEFAULT_MAX_QUBITS, memory_limit: None }
    }
}

impl SimOptions {
    /// Defaults plus the memory cap from `GAUSSKIT_MEM_LIMIT_MB`, if set.
    pub fn from_env() -> Result<Self> {
        let memory_limit = match std::env::var(MEM_LIMIT_ENV) {
            Ok(v) => {
                let mb: usize = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::domain(format!("{MEM_LIMIT_ENV}={v} is not a whole number of MB")))?;
                Some(mb.saturating_mul(1 << 20))
            }
            Err(_) => None,
        };
        Ok(Self { memory_limit, ..Self::default() })
    }

    /// Largest register the options allow for amplitudes of type `C<T>`.
    pub fn qubit_limit<T: Real>(&self) -> usize {
        let mut limit = self.max_qubits;
        if let Some(bytes) = self.memory_limit {
            let amps = bytes / std::mem::size_of::<C<T>>();
            let fit = if amps == 0 { 0 } else { amps.ilog2() as usize };
            limit = limit.min(fit);
        }
        limit
    }

    pub fn check<T: Real>(&self, qubits: usize) -> Result<()> {
        let limit = self.qubit_limit::<T>();
        if qubits > limit {
            Err(Error::Capacity { needed: qubits, limit })
        } else {
            Ok(())
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimReport<T> {
    /// Distance to the target state, when one was supplied.
    pub l2_error: Option<T>,
    /// `gamma`; `gamma^2` is the product of `layer_probs`.
    pub subnormalization: T,
    /// Success probability of each barrier, in execution order.
    pub layer_probs: Vec<T>,
    pub expected_t_depth: Option<T>,
    pub data_qubit_count: usize,
}

impl<T: Real> SimReport<T> {
    pub(crate) fn from_run(state: &StateVector<T>, layer_probs: Vec<T>) -> Self {
        Self {
            l2_error: None,
            subnormalization: state.subnormalization(),
            layer_probs,
            expected_t_depth: None,
            data_qubit_count: state.n_qubits(),
        }
    }

    pub fn success_probability(&self) -> T {
        self.subnormalization * self.subnormalization
    }
}

/// Source of the 2x2 operation applied for each gate, so the same
/// simulation loop serves exact and perturbed rotations.
pub trait MatrixProvider<T: Real> {
    fn matrix(&mut self, gate: &Gate<T>, base: &Base<T>) -> Result<Matrix2<T>>;
}

/// Exact gate matrices.
#[derive(Clone, Copy, Debug, Default)]
pub struct IdealGates;

impl<T: Real> MatrixProvider<T> for IdealGates {
    fn matrix(&mut self, gate: &Gate<T>, base: &Base<T>) -> Result<Matrix2<T>> {
        gate_matrix(gate.kind, base)
    }
}
