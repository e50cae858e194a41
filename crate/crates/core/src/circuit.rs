//! Gate-level circuit IR.
//!
//! Data qubits occupy indices `0..data_qubits`, with qubit `j` carrying binary
//! weight `2^j`. Ancilla follow at `data_qubits..data_qubits + ancilla_qubits`.
//! A [`Element::Measure`] barrier post-selects the listed ancilla on `|0>`;
//! the IR describes only the success branch, after which those ancilla are
//! back in `|0>` and may be reused.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::gate::{Base, Gate, RotationKind};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub enum Element<T> {
    Gate(Gate<T>),
    /// Global qubit indices of the ancilla to post-select.
    Measure(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit<T> {
    data_qubits: usize,
    ancilla_qubits: usize,
    base: Base<T>,
    elements: Vec<Element<T>>,
}

impl<T: Real> Circuit<T> {
    pub fn new(data_qubits: usize, ancilla_qubits: usize, base: Base<T>) -> Self {
        Self { data_qubits, ancilla_qubits, base, elements: Vec::new() }
    }

    pub fn with_elements(
        data_qubits: usize,
        ancilla_qubits: usize,
        base: Base<T>,
        elements: Vec<Element<T>>,
    ) -> Self {
        Self { data_qubits, ancilla_qubits, base, elements }
    }

    pub fn data_qubits(&self) -> usize {
        self.data_qubits
    }

    pub fn ancilla_qubits(&self) -> usize {
        self.ancilla_qubits
    }

    pub fn total_qubits(&self) -> usize {
        self.data_qubits + self.ancilla_qubits
    }

    pub fn base(&self) -> &Base<T> {
        &self.base
    }

    pub fn elements(&self) -> &[Element<T>] {
        &self.elements
    }

    pub fn push(&mut self, gate: Gate<T>) {
        self.elements.push(Element::Gate(gate));
    }

    pub fn measure(&mut self, ancilla: Vec<usize>) {
        self.elements.push(Element::Measure(ancilla));
    }

    pub fn extend(&mut self, other: &Circuit<T>) {
        self.elements.extend(other.elements.iter().cloned());
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate<T>> {
        self.elements.iter().filter_map(|e| match e {
            Element::Gate(g) => Some(g),
            Element::Measure(_) => None,
        })
    }

    pub fn is_ancilla(&self, qubit: usize) -> bool {
        qubit >= self.data_qubits && qubit < self.total_qubits()
    }

    /// Number of gates of each rotation family, for audits.
    pub fn tally(&self) -> GateTally {
        let mut t = GateTally::default();
        for g in self.gates() {
            match (g.kind, g.controls.len()) {
                (RotationKind::A(_), _) => t.a += 1,
                (RotationKind::B(_), 0) => t.b_uncontrolled += 1,
                (RotationKind::B(_), 1) => t.b_single += 1,
                (RotationKind::B(_), _) => t.b_double += 1,
                (RotationKind::Z(_), 0) => t.z_uncontrolled += 1,
                (RotationKind::Z(_), _) => t.z_controlled += 1,
                (RotationKind::Hadamard, _) => t.h += 1,
                (RotationKind::PauliX, _) => t.x += 1,
                (RotationKind::Cnot, _) => t.cnot += 1,
            }
        }
        t.measurements = self.elements.iter().filter(|e| matches!(e, Element::Measure(_))).count();
        t
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GateTally {
    pub a: usize,
    pub b_uncontrolled: usize,
    pub b_single: usize,
    pub b_double: usize,
    pub z_uncontrolled: usize,
    pub z_controlled: usize,
    pub h: usize,
    pub x: usize,
    pub cnot: usize,
    pub measurements: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    QubitOutOfRange(usize),
    TargetIsControl(usize),
    DuplicateControl(usize),
    /// Wrong number of controls for the gate kind.
    Arity { controls: usize },
    /// A B gate targets an ancilla that was used and not measured since.
    AncillaNotReset(usize),
    MeasureNonAncilla(usize),
    /// An ancilla is left entangled at the end of the circuit.
    UnmeasuredAncilla(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub element: usize,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = self.element;
        match &self.kind {
            ViolationKind::QubitOutOfRange(q) => write!(f, "element {e}: qubit {q} out of range"),
            ViolationKind::TargetIsControl(q) => {
                write!(f, "element {e}: qubit {q} is both target and control")
            }
            ViolationKind::DuplicateControl(q) => {
                write!(f, "element {e}: qubit {q} listed twice as control")
            }
            ViolationKind::Arity { controls } => {
                write!(f, "element {e}: {controls} controls not allowed for this gate")
            }
            ViolationKind::AncillaNotReset(q) => {
                write!(f, "element {e}: ancilla not reset (qubit {q} used since last measurement)")
            }
            ViolationKind::MeasureNonAncilla(q) => {
                write!(f, "element {e}: measured qubit {q} is not an ancilla")
            }
            ViolationKind::UnmeasuredAncilla(q) => {
                write!(f, "element {e}: ancilla {q} is never measured after use")
            }
        }
    }
}

/// Checks every structural invariant of `circuit`; an empty result means the
/// circuit is well formed.
pub fn validate<T: Real>(circuit: &Circuit<T>) -> Vec<Violation> {
    let mut out = Vec::new();
    let total = circuit.total_qubits();
    // ancilla -> index of the element that last dirtied it
    let mut dirty: Vec<Option<usize>> = vec![None; circuit.ancilla_qubits()];

    for (idx, el) in circuit.elements().iter().enumerate() {
        let mut push = |kind| out.push(Violation { element: idx, kind });
        match el {
            Element::Gate(g) => {
                let mut seen = HashSet::new();
                for q in g.qubits() {
                    if q >= total {
                        push(ViolationKind::QubitOutOfRange(q));
                    }
                }
                for c in &g.controls {
                    if c.qubit == g.target {
                        push(ViolationKind::TargetIsControl(c.qubit));
                    }
                    if !seen.insert(c.qubit) {
                        push(ViolationKind::DuplicateControl(c.qubit));
                    }
                }
                let n_ctrl = g.controls.len();
                let arity_ok = match g.kind {
                    RotationKind::A(_) | RotationKind::Hadamard | RotationKind::PauliX => n_ctrl == 0,
                    RotationKind::B(_) => n_ctrl <= 2,
                    RotationKind::Cnot => n_ctrl == 1,
                    RotationKind::Z(_) => true,
                };
                if !arity_ok {
                    push(ViolationKind::Arity { controls: n_ctrl });
                }
                if circuit.is_ancilla(g.target) {
                    let slot = &mut dirty[g.target - circuit.data_qubits()];
                    if g.is_b() && slot.is_some() {
                        push(ViolationKind::AncillaNotReset(g.target));
                    }
                    *slot = Some(idx);
                }
                for c in &g.controls {
                    if circuit.is_ancilla(c.qubit) {
                        dirty[c.qubit - circuit.data_qubits()].get_or_insert(idx);
                    }
                }
            }
            Element::Measure(list) => {
                for &q in list {
                    if circuit.is_ancilla(q) {
                        dirty[q - circuit.data_qubits()] = None;
                    } else {
                        push(ViolationKind::MeasureNonAncilla(q));
                    }
                }
            }
        }
    }
    for (i, d) in dirty.iter().enumerate() {
        if let Some(idx) = d {
            out.push(Violation {
                element: *idx,
                kind: ViolationKind::UnmeasuredAncilla(circuit.data_qubits() + i),
            });
        }
    }
    out
}

/// A round of doubly-controlled B gates executed in parallel and closed by a
/// single post-selection barrier.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer<T> {
    pub gates: Vec<Gate<T>>,
    /// T-depth `n_k`, once costed.
    pub t_depth: Option<T>,
    /// Success probability `p_k` of the closing barrier, once simulated.
    pub success_prob: Option<T>,
}

impl<T: Real> Layer<T> {
    pub fn new(gates: Vec<Gate<T>>) -> Self {
        Self { gates, t_depth: None, success_prob: None }
    }

    /// Ancilla targeted in this layer, in gate order.
    pub fn ancilla(&self) -> Vec<usize> {
        self.gates.iter().map(|g| g.target).collect()
    }

    /// Returns the first qubit used as a control by two different gates.
    pub fn control_overlap(&self) -> Option<usize> {
        let mut seen = HashSet::new();
        self.gates
            .iter()
            .flat_map(|g| g.controls.iter().map(|c| c.qubit))
            .find(|q| !seen.insert(*q))
    }
}

/// Circuit split into an uncontrolled prelude, measured layers, and a
/// Clifford postlude.
#[derive(Clone, Debug, PartialEq)]
pub struct LayeredCircuit<T> {
    pub prelude: Circuit<T>,
    pub layers: Vec<Layer<T>>,
    pub postlude: Circuit<T>,
}

impl<T: Real> LayeredCircuit<T> {
    pub fn data_qubits(&self) -> usize {
        self.prelude.data_qubits()
    }

    pub fn ancilla_qubits(&self) -> usize {
        self.prelude.ancilla_qubits()
    }

    pub fn base(&self) -> &Base<T> {
        self.prelude.base()
    }

    /// Flattens into a plain circuit: prelude, each layer followed by its
    /// barrier, postlude.
    pub fn to_circuit(&self) -> Circuit<T> {
        let mut c = Circuit::new(self.data_qubits(), self.ancilla_qubits(), *self.base());
        c.extend(&self.prelude);
        for layer in &self.layers {
            for g in &layer.gates {
                c.push(g.clone());
            }
            c.measure(layer.ancilla());
        }
        c.extend(&self.postlude);
        c
    }

    /// Recovers the layered view of a flat circuit: everything before the
    /// first ancilla-targeted gate is the prelude, each run of gates closed
    /// by a barrier is a layer, and the remainder is the postlude.
    pub fn from_circuit(circuit: &Circuit<T>) -> Result<Self> {
        let (d, a, base) = (circuit.data_qubits(), circuit.ancilla_qubits(), *circuit.base());
        let mut prelude = Circuit::new(d, a, base);
        let mut postlude = Circuit::new(d, a, base);
        let mut layers = Vec::new();
        let mut pending: Vec<Gate<T>> = Vec::new();
        let mut in_layers = false;
        for el in circuit.elements() {
            match el {
                Element::Gate(g) => {
                    if circuit.is_ancilla(g.target) {
                        in_layers = true;
                        if !postlude.elements().is_empty() {
                            return Err(Error::InvalidCircuit(
                                "layer gate after a data-only gate that follows a barrier".into(),
                            ));
                        }
                        pending.push(g.clone());
                    } else if !in_layers {
                        prelude.push(g.clone());
                    } else if pending.is_empty() {
                        postlude.push(g.clone());
                    } else {
                        return Err(Error::InvalidCircuit(
                            "data gate interleaved inside a measured layer".into(),
                        ));
                    }
                }
                Element::Measure(list) => {
                    let gates = std::mem::take(&mut pending);
                    let targets: HashSet<usize> = gates.iter().map(|g| g.target).collect();
                    let measured: HashSet<usize> = list.iter().copied().collect();
                    if targets != measured {
                        return Err(Error::InvalidCircuit(
                            "barrier does not measure exactly the ancilla of its layer".into(),
                        ));
                    }
                    layers.push(Layer::new(gates));
                }
            }
        }
        if !pending.is_empty() {
            return Err(Error::InvalidCircuit("ancilla gates without a closing barrier".into()));
        }
        Ok(Self { prelude, layers, postlude })
    }

    /// Layers permuted so that new position `i` holds old layer `perm[i]`.
    pub fn reordered(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.layers.len()];
        if perm.len() != self.layers.len()
            || perm.iter().any(|&i| i >= seen.len() || std::mem::replace(&mut seen[i], true))
        {
            return Err(Error::domain("layer permutation is not a bijection"));
        }
        Ok(Self {
            prelude: self.prelude.clone(),
            layers: perm.iter().map(|&i| self.layers[i].clone()).collect(),
            postlude: self.postlude.clone(),
        })
    }

    /// Checks that the controls of each layer are pairwise disjoint.
    pub fn check_parallel(&self) -> Result<()> {
        for (k, layer) in self.layers.iter().enumerate() {
            if let Some(q) = layer.control_overlap() {
                return Err(Error::InvalidLayer { layer: k, qubit: q });
            }
        }
        Ok(())
    }

    /// Unordered control pairs of every doubly-controlled gate, in layer order.
    pub fn control_pairs(&self) -> Vec<(usize, usize)> {
        self.layers
            .iter()
            .flat_map(|l| l.gates.iter())
            .filter(|g| g.controls.len() == 2)
            .map(|g| {
                let (a, b) = (g.controls[0].qubit, g.controls[1].qubit);
                (a.min(b), a.max(b))
            })
            .collect()
    }

    pub fn gate_count(&self) -> usize {
        self.prelude.gates().count()
            + self.layers.iter().map(|l| l.gates.len()).sum::<usize>()
            + self.postlude.gates().count()
    }
}
