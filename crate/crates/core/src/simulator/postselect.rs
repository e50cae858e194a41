use super::state::{apply_single, scale_all, scale_where, norm_sqr, StateVector};
use super::{IdealGates, MatrixProvider, SimOptions, SimReport};
use crate::circuit::{Circuit, Element, LayeredCircuit};
use crate::error::{Error, Result};
use crate::gate::RotationKind;
use crate::scalar::Real;

/// Data-register simulation of a layered circuit with ancilla post-selection
/// folded into diagonal factors.
pub fn simulate_postselected<T: Real>(
    layered: &LayeredCircuit<T>,
    opts: &SimOptions,
) -> Result<(StateVector<T>, SimReport<T>)> {
    simulate_postselected_circuit(&layered.to_circuit(), opts)
}

pub fn simulate_postselected_circuit<T: Real>(
    circuit: &Circuit<T>,
    opts: &SimOptions,
) -> Result<(StateVector<T>, SimReport<T>)> {
    simulate_postselected_with(circuit, &mut IdealGates, opts)
}

/// Ancilla may only be the target of `B` gates, each on a fresh or
/// measured ancilla; controls must be data qubits.
pub fn simulate_postselected_with<T: Real, P: MatrixProvider<T>>(
    circuit: &Circuit<T>,
    provider: &mut P,
    opts: &SimOptions,
) -> Result<(StateVector<T>, SimReport<T>)> {
    let data = circuit.data_qubits();
    let total = circuit.total_qubits();
    opts.check::<T>(data)?;
    let mut amps = StateVector::zero(data).into_amplitudes();
    let mut dirty = vec![false; circuit.ancilla_qubits()];
    let mut probs = Vec::new();
    let mut success = T::one();

    for (idx, el) in circuit.elements().iter().enumerate() {
        match el {
            Element::Gate(g) => {
                if let Some(q) = g.qubits().find(|&q| q >= total) {
                    return Err(Error::InvalidCircuit(format!("element {idx}: qubit {q} out of range")));
                }
                if g.controls.iter().any(|c| c.qubit >= data) {
                    return Err(Error::Unsupported(format!(
                        "element {idx}: ancilla controls need the exact simulator"
                    )));
                }
                let (mask, value) = g.control_mask();
                let u = provider.matrix(g, circuit.base())?;
                if g.target < data {
                    if mask >> g.target & 1 == 1 {
                        return Err(Error::InvalidCircuit(format!("element {idx}: target is also a control")));
                    }
                    apply_single(&mut amps, g.target, mask, value, &u);
                    continue;
                }
                if !matches!(g.kind, RotationKind::B(_)) {
                    return Err(Error::Unsupported(format!(
                        "element {idx}: only B gates may target ancilla here"
                    )));
                }
                let slot = g.target - data;
                if std::mem::replace(&mut dirty[slot], true) {
                    return Err(Error::InvalidCircuit(format!(
                        "element {idx}: ancilla {} reused before measurement",
                        g.target
                    )));
                }
                // <0|U|0> on the ancilla scales the controlled subspace
                scale_where(&mut amps, mask, value, u[0][0]);
            }
            Element::Measure(list) => {
                for &q in list {
                    if q < data || q >= total {
                        return Err(Error::InvalidCircuit(format!("element {idx}: qubit {q} is not an ancilla")));
                    }
                    dirty[q - data] = false;
                }
                let p = norm_sqr(&amps);
                if !(p > T::zero()) {
                    return Err(Error::ImpossibleBranch { element: idx });
                }
                scale_all(&mut amps, p.sqrt().recip());
                success *= p;
                // rounding can push a certain branch just past 1
                probs.push(p.min(T::one()));
            }
        }
    }
    if let Some(slot) = dirty.iter().position(|&d| d) {
        return Err(Error::InvalidCircuit(format!("ancilla {} left unmeasured", data + slot)));
    }
    let state = StateVector::from_amplitudes(amps)?.with_success(success);
    let report = SimReport::from_run(&state, probs);
    Ok((state, report))
}
