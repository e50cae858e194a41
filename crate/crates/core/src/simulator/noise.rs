use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};

use super::ideal::l2_error;
use super::postselect::simulate_postselected_with;
use super::state::StateVector;
use super::{MatrixProvider, SimOptions, SimReport};
use crate::circuit::LayeredCircuit;
use crate::error::{Error, Result};
use crate::gate::{gate_matrix, matmul2, Base, Gate, Matrix2};
use crate::optimizer::ErrorBudget;
use crate::resources::{expected_from_layered, CostModel};
use crate::scalar::{Real, C};

/// `exp(-i (phi/2) n.sigma)` for a uniformly random axis `n`, with `phi`
/// chosen so the operator-norm distance from identity is `delta`.
pub fn perturbation<T: Real, R: Rng + ?Sized>(delta: T, rng: &mut R) -> Matrix2<T> {
    let [nx, ny, nz]: [f64; 3] = UnitSphere.sample(rng);
    let (nx, ny, nz) = (T::lit(nx), T::lit(ny), T::lit(nz));
    // |e^{i phi/2} - 1| = 2 sin(phi/4) = delta
    let phi = T::lit(4.0) * (delta / T::lit(2.0)).asin();
    let (s, c) = (phi / T::lit(2.0)).sin_cos();
    [
        [C::new(c, -s * nz), C::new(-s * ny, -s * nx)],
        [C::new(s * ny, -s * nx), C::new(c, s * nz)],
    ]
}

/// The gate's exact matrix times a random perturbation of size `delta`.
/// A zero `delta` returns the exact matrix and draws nothing from `rng`.
pub fn apply_noisy_rotation<T: Real, R: Rng + ?Sized>(
    gate: &Gate<T>,
    delta: T,
    base: &Base<T>,
    rng: &mut R,
) -> Result<Matrix2<T>> {
    if !(delta >= T::zero() && delta < T::lit(0.5)) {
        return Err(Error::domain(format!("rotation error must lie in [0, 0.5), got {delta}")));
    }
    let ideal = gate_matrix(gate.kind, base)?;
    if delta == T::zero() {
        return Ok(ideal);
    }
    Ok(matmul2(&perturbation(delta, rng), &ideal))
}

/// Perturbs every non-Clifford gate at its budgeted error.
#[derive(Clone, Debug)]
pub struct NoisyRotations<T> {
    pub budget: ErrorBudget<T>,
    rng: ChaCha8Rng,
}

impl<T: Real> NoisyRotations<T> {
    pub fn new(budget: ErrorBudget<T>, seed: u64) -> Self {
        Self { budget, rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl<T: Real> MatrixProvider<T> for NoisyRotations<T> {
    fn matrix(&mut self, gate: &Gate<T>, base: &Base<T>) -> Result<Matrix2<T>> {
        let delta = if gate.kind.is_clifford() { T::zero() } else { self.budget.for_gate(gate) };
        apply_noisy_rotation(gate, delta, base, &mut self.rng)
    }
}

/// Post-selected simulation with perturbed rotations, compared against
/// `target`. The expected T-depth is filled in when the budget is nonzero.
pub fn run_noisy<T: Real>(
    layered: &LayeredCircuit<T>,
    target: &StateVector<T>,
    budget: &ErrorBudget<T>,
    seed: u64,
    opts: &SimOptions,
) -> Result<(StateVector<T>, SimReport<T>)> {
    let mut provider = NoisyRotations::new(*budget, seed);
    let (state, mut report) = simulate_postselected_with(&layered.to_circuit(), &mut provider, opts)?;
    report.l2_error = Some(l2_error(target, &state)?);
    if budget.delta_single > T::zero() && budget.delta_controlled > T::zero() {
        report.expected_t_depth =
            Some(expected_from_layered(layered, budget, &CostModel::default(), &report.layer_probs)?);
    }
    Ok((state, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::{op_norm2, sub2, RotationKind};
    use crate::scalar::cone;

    fn identity() -> Matrix2<f64> {
        let z = C::new(0.0, 0.0);
        [[cone(), z], [z, cone()]]
    }

    #[test]
    fn perturbation_has_requested_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for delta in [1e-2, 1e-4, 1e-6] {
            for _ in 0..20 {
                let p = perturbation(delta, &mut rng);
                let d = op_norm2(&sub2(&p, &identity()));
                assert!((d - delta).abs() < 1e-10 * delta.max(1e-3), "{d} vs {delta}");
                // unitary: P^H P = I
                let ph = [[p[0][0].conj(), p[1][0].conj()], [p[0][1].conj(), p[1][1].conj()]];
                assert!(op_norm2(&sub2(&matmul2(&ph, &p), &identity())) < 1e-14);
            }
        }
    }

    #[test]
    fn noisy_gate_distance() {
        let base = Base::from_alpha(0.9);
        let g = Gate::a(1.0, 0);
        let ideal = gate_matrix(RotationKind::A(1.0), &base).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let noisy = apply_noisy_rotation(&g, 1e-4, &base, &mut rng).unwrap();
        assert!((op_norm2::<f64>(&sub2(&noisy, &ideal)) - 1e-4).abs() < 1e-10);
    }

    #[test]
    fn zero_delta_is_exact_and_draws_nothing() {
        let base = Base::from_alpha(0.9);
        let g = Gate::b(2.0, 2, &[0, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let before = rng.clone();
        let m = apply_noisy_rotation(&g, 0.0, &base, &mut rng).unwrap();
        assert_eq!(m, gate_matrix(g.kind, &base).unwrap());
        assert_eq!(rng, before);
        assert!(apply_noisy_rotation(&g, 0.6, &base, &mut rng).is_err());
    }

    #[test]
    fn seeded_sequences_repeat() {
        let draw = |seed| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            (0..5).map(|_| perturbation(1e-3f64, &mut r)).collect::<Vec<_>>()
        };
        assert_eq!(draw(42), draw(42));
        assert_ne!(draw(42), draw(43));
    }
}
