use super::state::{apply_single, drop_zero_bit, norm_sqr, scale_all, StateVector};
use super::{IdealGates, MatrixProvider, SimOptions, SimReport};
use crate::circuit::{Circuit, Element};
use crate::error::{Error, Result};
use crate::gate::Polarity;
use crate::scalar::{czero, Real, C};

/// Full-unitary simulation of `circuit` from `|0...0>`.
///
/// Ancilla are allocated lazily as new high bits when first touched and
/// removed again when measured, so only live ancilla occupy memory.
pub fn simulate_exact<T: Real>(
    circuit: &Circuit<T>,
    opts: &SimOptions,
) -> Result<(StateVector<T>, SimReport<T>)> {
    simulate_exact_with(circuit, &mut IdealGates, opts)
}

struct Register<T> {
    amps: Vec<C<T>>,
    bits: usize,
    data: usize,
    /// Bit position of each circuit ancilla while live.
    pos: Vec<Option<usize>>,
}

impl<T: Real> Register<T> {
    fn bit(&mut self, qubit: usize, opts: &SimOptions) -> Result<usize> {
        if qubit < self.data {
            return Ok(qubit);
        }
        let slot = qubit - self.data;
        if let Some(p) = self.pos[slot] {
            return Ok(p);
        }
        opts.check::<T>(self.bits + 1)?;
        let len = self.amps.len();
        self.amps.resize(len * 2, czero());
        self.pos[slot] = Some(self.bits);
        self.bits += 1;
        Ok(self.bits - 1)
    }

    fn release(&mut self, slot: usize) {
        if let Some(p) = self.pos[slot].take() {
            self.amps = drop_zero_bit(&self.amps, p);
            self.bits -= 1;
            for q in self.pos.iter_mut().flatten() {
                if *q > p {
                    *q -= 1;
                }
            }
        }
    }
}

pub fn simulate_exact_with<T: Real, P: MatrixProvider<T>>(
    circuit: &Circuit<T>,
    provider: &mut P,
    opts: &SimOptions,
) -> Result<(StateVector<T>, SimReport<T>)> {
    let data = circuit.data_qubits();
    opts.check::<T>(data)?;
    let mut reg = Register {
        amps: StateVector::zero(data).into_amplitudes(),
        bits: data,
        data,
        pos: vec![None; circuit.ancilla_qubits()],
    };
    let total = circuit.total_qubits();
    let mut probs = Vec::new();
    let mut success = T::one();

    for (idx, el) in circuit.elements().iter().enumerate() {
        match el {
            Element::Gate(g) => {
                if let Some(q) = g.qubits().find(|&q| q >= total) {
                    return Err(Error::InvalidCircuit(format!("element {idx}: qubit {q} out of range")));
                }
                let target = reg.bit(g.target, opts)?;
                let (mut mask, mut value) = (0usize, 0usize);
                for c in &g.controls {
                    let b = 1usize << reg.bit(c.qubit, opts)?;
                    mask |= b;
                    if c.polarity == Polarity::Closed {
                        value |= b;
                    }
                }
                if mask >> target & 1 == 1 {
                    return Err(Error::InvalidCircuit(format!("element {idx}: target is also a control")));
                }
                let u = provider.matrix(g, circuit.base())?;
                apply_single(&mut reg.amps, target, mask, value, &u);
            }
            Element::Measure(list) => {
                let mut slots: Vec<(usize, usize)> = Vec::new();
                for &q in list {
                    if q < data || q >= total {
                        return Err(Error::InvalidCircuit(format!("element {idx}: qubit {q} is not an ancilla")));
                    }
                    if let Some(p) = reg.pos[q - data] {
                        slots.push((p, q - data));
                    }
                }
                // highest bit first so lower positions stay valid
                slots.sort_unstable_by_key(|s| std::cmp::Reverse(s.0));
                slots.dedup();
                for &(_, slot) in &slots {
                    reg.release(slot);
                }
                let p = norm_sqr(&reg.amps);
                if !(p > T::zero()) {
                    return Err(Error::ImpossibleBranch { element: idx });
                }
                scale_all(&mut reg.amps, p.sqrt().recip());
                success *= p;
                // rounding can push a certain branch just past 1
                probs.push(p.min(T::one()));
            }
        }
    }
    if let Some(slot) = reg.pos.iter().position(Option::is_some) {
        return Err(Error::InvalidCircuit(format!("ancilla {} left unmeasured", data + slot)));
    }
    let state = StateVector::from_amplitudes(reg.amps)?.with_success(success);
    let report = SimReport::from_run(&state, probs);
    Ok((state, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::merged_exponent;
    use crate::gate::{Base, Gate};

    #[test]
    fn single_hadamard() {
        let mut c = Circuit::new(1, 0, Base::from_alpha(0.5));
        c.push(Gate::h(0));
        let (s, r) = simulate_exact(&c, &SimOptions::default()).unwrap();
        let h = 0.5f64.sqrt();
        assert!((s.amplitudes()[0].re - h).abs() < 1e-15 && (s.amplitudes()[1].re - h).abs() < 1e-15);
        assert_eq!(r.subnormalization, 1.0);
    }

    #[test]
    fn merge_identity() {
        // A(m) then B(n) controlled on the same qubit equals A(log2(2^m + 2^n))
        let base = Base::from_alpha(0.8);
        let mut top = Circuit::new(1, 1, base);
        top.push(Gate::a(0.0, 0));
        top.push(Gate::b(2.0, 1, &[0]));
        top.measure(vec![1]);
        let mut bottom = Circuit::new(1, 0, base);
        bottom.push(Gate::a(5f64.log2(), 0));
        let (a, _) = simulate_exact(&top, &SimOptions::default()).unwrap();
        let (b, _) = simulate_exact(&bottom, &SimOptions::default()).unwrap();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }
        assert_eq!(merged_exponent::<f64>(1), 6f64.log2());
    }

    #[test]
    fn zero_probability_branch() {
        // B with alpha^(2^m) = 0 on a |1> control kills the branch
        let mut c = Circuit::new(1, 1, Base::from_alpha(1e-300));
        c.push(Gate::x(0));
        c.push(Gate::b(10.0, 1, &[0]));
        c.measure(vec![1]);
        assert_eq!(simulate_exact(&c, &SimOptions::default()), Err(Error::ImpossibleBranch { element: 2 }));
    }

    #[test]
    fn capacity_is_enforced() {
        let c: Circuit<f64> = Circuit::new(5, 0, Base::from_alpha(0.5));
        let o = SimOptions { max_qubits: 4, memory_limit: None };
        assert_eq!(simulate_exact(&c, &o).map(|_| ()), Err(Error::Capacity { needed: 5, limit: 4 }));
    }

    #[test]
    fn unmeasured_ancilla_is_an_error() {
        let mut c = Circuit::new(1, 1, Base::from_alpha(0.5));
        c.push(Gate::b(1.0, 1, &[0]));
        assert!(matches!(simulate_exact(&c, &SimOptions::default()), Err(Error::InvalidCircuit(_))));
    }
}
