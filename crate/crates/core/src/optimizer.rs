//! Error allocation, threshold pruning, ancilla-reuse packing and
//! measurement ordering.

use itertools::Itertools;

use crate::circuit::{Circuit, Element, Layer, LayeredCircuit};
use crate::error::{Error, Result};
use crate::gate::{gate_matrix, op_norm2, sub2, xh_matrix, Base, Gate, RotationKind};
use crate::scalar::Real;

/// How the per-gate synthesis budget is split between rotation classes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Allocation {
    /// Every rotation gets `delta`.
    Uniform,
    /// Uncontrolled rotations get `delta`, controlled ones `2 delta`.
    #[default]
    TwoToOne,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorBudget<T> {
    pub delta_gate: T,
    pub delta_single: T,
    pub delta_controlled: T,
}

impl<T: Real> ErrorBudget<T> {
    pub fn new(delta: T, allocation: Allocation) -> Self {
        let controlled = match allocation {
            Allocation::Uniform => delta,
            Allocation::TwoToOne => delta * T::lit(2.0),
        };
        Self { delta_gate: delta, delta_single: delta, delta_controlled: controlled }
    }

    pub fn uniform(delta: T) -> Self {
        Self::new(delta, Allocation::Uniform)
    }

    pub fn two_to_one(delta: T) -> Self {
        Self::new(delta, Allocation::TwoToOne)
    }

    /// All-zero budget, for noiseless runs.
    pub fn exact() -> Self {
        Self::uniform(T::zero())
    }

    /// Budget applied to `gate`: its own override, else by control count.
    pub fn for_gate(&self, gate: &Gate<T>) -> T {
        gate.synthesis_error.unwrap_or(if gate.controls.is_empty() {
            self.delta_single
        } else {
            self.delta_controlled
        })
    }
}

/// Number of data qubits worth keeping for a given base and gate error.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QubitThreshold {
    /// `floor(log2(sqrt(1 + 4 ln(delta)/ln(alpha)) - 1))`.
    pub closed_form: usize,
    /// Largest `n` with `alpha^(2^(n-1) + 4^(n-1)) > delta`, or 0 if none.
    pub direct: usize,
}

impl QubitThreshold {
    pub fn agrees(&self) -> bool {
        self.closed_form == self.direct
    }

    /// Qubits to keep; never fewer than one.
    pub fn qubits(&self) -> usize {
        self.closed_form.max(1)
    }
}

pub fn qubit_threshold<T: Real>(alpha: T, delta: T) -> Result<QubitThreshold> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    qubit_threshold_base(&Base::from_alpha(alpha), delta)
}

pub fn qubit_threshold_base<T: Real>(base: &Base<T>, delta: T) -> Result<QubitThreshold> {
    if !(delta > T::zero() && delta < T::one()) {
        return Err(Error::domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(base.ln() < T::zero()) {
        return Err(Error::Saturated);
    }
    let ratio = delta.ln() / base.ln();
    let root = (T::one() + T::lit(4.0) * ratio).sqrt();
    if !root.is_finite() {
        return Err(Error::Saturated);
    }
    let x = (root - T::one()).log2().floor();
    let closed_form = if x < T::zero() { 0 } else { x.to_usize().ok_or(Error::Saturated)? };

    let ln_delta = delta.ln();
    let mut direct = 0;
    for n in 1..=62usize {
        let e = T::lit(2.0).powi(n as i32 - 1) + T::lit(4.0).powi(n as i32 - 1);
        if e * base.ln() > ln_delta {
            direct = n;
        } else {
            break;
        }
    }
    if direct == 62 {
        return Err(Error::Saturated);
    }
    Ok(QubitThreshold { closed_form, direct })
}

/// Largest `k >= 0` with `1 - alpha^(2^(k+n-1)) < delta`, by direct scan;
/// 0 when even `k = 0` fails.
pub fn prunable_control_depth<T: Real>(base: &Base<T>, delta: T, n: usize) -> usize {
    let mut best = 0;
    for k in 0..1024usize {
        let x = T::lit(2.0).powi((k + n) as i32 - 1);
        if !x.is_finite() || base.one_minus_pow(x) >= delta {
            break;
        }
        best = k;
    }
    best
}

/// `floor(log2(ln(delta)/ln(alpha))) + 1 - n`, kept for comparison with the
/// direct scan. It describes `alpha^(2^(k+n-1)) > delta`, a different
/// condition.
pub fn prunable_control_depth_closed_form<T: Real>(base: &Base<T>, delta: T, n: usize) -> i64 {
    let v = (delta.ln() / base.ln()).log2().floor().to_i64().unwrap_or(i64::MAX);
    v.saturating_add(1).saturating_sub(n as i64)
}

/// `B(m)` acts as identity to within `delta` on the post-selected branch.
pub fn b_is_negligible<T: Real>(base: &Base<T>, m: T, delta: T) -> bool {
    base.one_minus_pow(m.exp2()) < delta
}

/// `A(m)` lies within `delta` of `XH` in operator norm.
pub fn a_is_near_xh<T: Real>(base: &Base<T>, m: T, delta: T) -> Result<bool> {
    let a = gate_matrix(RotationKind::A(m), base)?;
    Ok(op_norm2(&sub2(&a, &xh_matrix())) < delta)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PruneReport {
    pub removed_b: usize,
    pub replaced_a: usize,
    pub dropped_layers: usize,
}

impl PruneReport {
    pub fn touched(&self) -> usize {
        self.removed_b + self.replaced_a
    }
}

fn prune_gates<T: Real>(
    gates: impl Iterator<Item = Gate<T>>,
    base: &Base<T>,
    delta: T,
    report: &mut PruneReport,
    removed_targets: &mut Vec<usize>,
) -> Result<Vec<Gate<T>>> {
    let mut out = Vec::new();
    for g in gates {
        match g.kind {
            RotationKind::B(m) if b_is_negligible(base, m, delta) => {
                report.removed_b += 1;
                removed_targets.push(g.target);
            }
            RotationKind::A(m) if a_is_near_xh(base, m, delta)? => {
                report.replaced_a += 1;
                out.push(Gate::h(g.target));
                out.push(Gate::x(g.target));
            }
            _ => out.push(g),
        }
    }
    Ok(out)
}

fn prune_segment<T: Real>(c: &Circuit<T>, delta: T, report: &mut PruneReport) -> Result<Circuit<T>> {
    let mut out = Circuit::new(c.data_qubits(), c.ancilla_qubits(), *c.base());
    let mut removed = Vec::new();
    for el in c.elements() {
        match el {
            Element::Gate(g) => {
                for g in prune_gates(std::iter::once(g.clone()), c.base(), delta, report, &mut removed)? {
                    out.push(g);
                }
            }
            Element::Measure(list) => {
                let kept: Vec<usize> = list.iter().copied().filter(|q| !removed.contains(q)).collect();
                removed.clear();
                if kept.is_empty() && !list.is_empty() {
                    report.dropped_layers += 1;
                } else {
                    out.measure(kept);
                }
            }
        }
    }
    Ok(out)
}

/// Drops `B` gates within `delta` of identity (with their barriers when
/// nothing else is measured) and replaces `A` gates within `delta` of `XH`
/// by `H` then `X`.
pub fn prune_circuit<T: Real>(circuit: &Circuit<T>, delta: T) -> Result<(Circuit<T>, PruneReport)> {
    let mut report = PruneReport::default();
    let out = prune_segment(circuit, delta, &mut report)?;
    Ok((out, report))
}

/// [`prune_circuit`] for the layered form; emptied layers are removed.
pub fn prune_layered<T: Real>(
    layered: &LayeredCircuit<T>,
    delta: T,
) -> Result<(LayeredCircuit<T>, PruneReport)> {
    let mut report = PruneReport::default();
    let base = *layered.base();
    let prelude = prune_segment(&layered.prelude, delta, &mut report)?;
    let postlude = prune_segment(&layered.postlude, delta, &mut report)?;
    let mut layers = Vec::new();
    for layer in &layered.layers {
        let mut scratch = Vec::new();
        let gates = prune_gates(layer.gates.iter().cloned(), &base, delta, &mut report, &mut scratch)?;
        if gates.is_empty() {
            report.dropped_layers += 1;
        } else {
            layers.push(Layer::new(gates));
        }
    }
    Ok((LayeredCircuit { prelude, layers, postlude }, report))
}

/// Round-robin schedule of all pairs of `core_qubits` vertices into rounds
/// of vertex-disjoint pairs.
///
/// Circle method: vertex `m-1` stays fixed while the rest rotate. An odd
/// count gets a dummy vertex whose partner sits out the round.
pub fn pack_layers(core_qubits: usize) -> Result<Vec<Vec<(usize, usize)>>> {
    if core_qubits < 2 {
        return Err(Error::domain("packing needs at least 2 core qubits"));
    }
    let m = core_qubits + core_qubits % 2;
    let ring = m - 1;
    let mut rounds = Vec::with_capacity(ring);
    for r in 0..ring {
        let mut pairs = vec![(r, ring)];
        for i in 1..m / 2 {
            pairs.push(((r + i) % ring, (r + ring - i) % ring));
        }
        let mut round: Vec<(usize, usize)> = pairs
            .into_iter()
            .filter(|&(a, b)| a < core_qubits && b < core_qubits)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        round.sort_unstable();
        rounds.push(round);
    }
    Ok(rounds)
}

/// `(1/prod p_k) (n0 + sum_k n_k prod_{j<k} p_j)`.
pub fn expected_t_depth<T: Real>(n0: T, layers: &[(T, T)]) -> Result<T> {
    let mut prefix = T::one();
    let mut acc = n0;
    for (k, &(n, p)) in layers.iter().enumerate() {
        if p == T::zero() {
            return Err(Error::DivergentCost { layer: k });
        }
        if !(p > T::zero() && p <= T::one()) || !(n >= T::zero()) {
            return Err(Error::domain(format!("layer {k}: need n >= 0 and p in (0, 1], got ({n}, {p})")));
        }
        acc += n * prefix;
        prefix *= p;
    }
    Ok(acc / prefix)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderingPlan<T> {
    /// New position `i` runs original layer `permutation[i]`.
    pub permutation: Vec<usize>,
    pub predicted_expected_t_depth: T,
    /// `(n_k, p_k)` in execution order.
    pub per_layer: Vec<(T, T)>,
}

/// Exhaustive search is used up to this many layers.
pub const BRUTE_FORCE_LAYERS: usize = 8;

/// Execution order minimizing [`expected_t_depth`].
///
/// Swapping adjacent layers `i, j` changes the cost by a term proportional
/// to `n_i (1 - p_j) - n_j (1 - p_i)`, so sorting by `n_k / (1 - p_k)`
/// (certain layers last) is optimal; with equal `n_k` this is increasing
/// `p_k`. Small instances are additionally solved exhaustively. Ties keep
/// the original index order.
pub fn order_layers<T: Real>(n0: T, layers: &[(T, T)]) -> Result<OrderingPlan<T>> {
    if layers.is_empty() {
        return Err(Error::domain("no layers to order"));
    }
    expected_t_depth(n0, layers)?;
    let equal_n = layers.iter().all(|l| l.0 == layers[0].0);
    let permutation = if equal_n {
        let mut idx: Vec<usize> = (0..layers.len()).collect();
        idx.sort_by(|&a, &b| layers[a].1.partial_cmp(&layers[b].1).expect("finite").then(a.cmp(&b)));
        idx
    } else if layers.len() <= BRUTE_FORCE_LAYERS {
        let mut best: Option<(T, Vec<usize>)> = None;
        for perm in (0..layers.len()).permutations(layers.len()) {
            let seq: Vec<(T, T)> = perm.iter().map(|&i| layers[i]).collect();
            let cost = expected_t_depth(n0, &seq)?;
            if best.as_ref().is_none_or(|(b, _)| cost < *b) {
                best = Some((cost, perm));
            }
        }
        best.expect("nonempty").1
    } else {
        let key = |i: usize| {
            let (n, p) = layers[i];
            if p >= T::one() {
                T::infinity()
            } else {
                n / (T::one() - p)
            }
        };
        let mut idx: Vec<usize> = (0..layers.len()).collect();
        idx.sort_by(|&a, &b| key(a).partial_cmp(&key(b)).expect("finite").then(a.cmp(&b)));
        idx
    };
    let per_layer: Vec<(T, T)> = permutation.iter().map(|&i| layers[i]).collect();
    let predicted_expected_t_depth = expected_t_depth(n0, &per_layer)?;
    Ok(OrderingPlan { permutation, predicted_expected_t_depth, per_layer })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn budget_allocations() {
        let b = ErrorBudget::two_to_one(1e-4);
        assert_eq!((b.delta_single, b.delta_controlled), (1e-4, 2e-4));
        let u = ErrorBudget::uniform(1e-4);
        assert_eq!(u.delta_controlled, 1e-4);
        let g = Gate::b(3.0, 5, &[0, 1]).with_synthesis_error(7e-6);
        assert_eq!(b.for_gate(&g), 7e-6);
        assert_eq!(b.for_gate(&Gate::a(1.0, 0)), 1e-4);
    }

    #[test]
    fn threshold_corners() {
        let t = qubit_threshold(0.99f64, 0.01).unwrap();
        assert_eq!((t.closed_form, t.direct), (5, 5));
        let t = qubit_threshold(1.0 - 1e-10f64, 1e-10).unwrap();
        assert_eq!((t.closed_form, t.direct), (19, 19));
    }

    #[test]
    fn threshold_with_no_qualifying_qubit() {
        // 0.5^(1+1) = 0.25 is already below 0.4
        let t = qubit_threshold(0.5f64, 0.4).unwrap();
        assert_eq!((t.closed_form, t.direct, t.qubits()), (0, 0, 1));
    }

    #[test]
    fn threshold_saturates() {
        assert_eq!(qubit_threshold_base(&Base::from_ln(-1e-300f64), 1e-10), Err(Error::Saturated));
    }

    #[test]
    fn control_depth_examples() {
        assert_eq!(prunable_control_depth(&Base::from_alpha(0.99f64), 0.01, 5), 0);
        assert_eq!(prunable_control_depth(&Base::from_alpha(0.99f64), 1e-300, 5), 0);
        // 2^(k+9) * 1e-12 < 1e-3 up to k + 9 = 29
        assert_eq!(prunable_control_depth(&Base::from_ln(-1e-12f64), 1e-3, 10), 20);
        assert_eq!(prunable_control_depth_closed_form(&Base::from_ln(-1e-12f64), 1e-3, 10), 33);
    }

    #[test]
    fn packing_small_cases() {
        assert_eq!(pack_layers(2).unwrap(), vec![vec![(0, 1)]]);
        assert_eq!(pack_layers(6).unwrap().len(), 5);
        let five = pack_layers(5).unwrap();
        assert_eq!(five.len(), 5);
        assert!(five.iter().all(|r| r.len() == 2));
        assert!(pack_layers(1).is_err());
    }

    #[test]
    fn packing_is_a_one_factorization() {
        for m in 2..=12 {
            let rounds = pack_layers(m).unwrap();
            let mut seen = HashSet::new();
            for round in &rounds {
                assert_eq!(round.len(), m / 2);
                let mut used = HashSet::new();
                for &(a, b) in round {
                    assert!(a < b && b < m);
                    assert!(used.insert(a) && used.insert(b));
                    assert!(seen.insert((a, b)), "pair repeated");
                }
            }
            assert_eq!(seen.len(), m * (m - 1) / 2);
            assert_eq!(rounds.len(), if m % 2 == 0 { m - 1 } else { m });
        }
    }

    #[test]
    fn expected_depth_examples() {
        assert_eq!(expected_t_depth(10.0, &[(4.0, 0.5), (4.0, 0.5)]).unwrap(), 64.0);
        assert_eq!(expected_t_depth(3.0, &[(4.0, 1.0), (5.0, 1.0)]).unwrap(), 12.0);
        assert_eq!(expected_t_depth(3.0, &[(4.0, 0.25)]).unwrap(), 28.0);
        assert_eq!(expected_t_depth(3.0, &[(4.0, 0.5), (1.0, 0.0)]), Err(Error::DivergentCost { layer: 1 }));
    }

    #[test]
    fn equal_depth_orders_by_probability() {
        let plan = order_layers(0.0, &[(1.0, 0.9), (1.0, 0.7), (1.0, 0.95)]).unwrap();
        assert_eq!(plan.permutation, vec![1, 0, 2]);
        let plan = order_layers(0.0, &[(1.0, 0.5), (1.0, 0.5), (1.0, 0.2)]).unwrap();
        assert_eq!(plan.permutation, vec![2, 0, 1]);
    }

    #[test]
    fn low_probability_first_is_cheaper() {
        let lo = expected_t_depth(0.0, &[(5.0, 0.5), (5.0, 0.9)]).unwrap();
        let hi = expected_t_depth(0.0, &[(5.0, 0.9), (5.0, 0.5)]).unwrap();
        assert!(lo < hi);
    }

    #[test]
    fn ratio_sort_beyond_brute_force_limit() {
        let layers: Vec<(f64, f64)> =
            (0..10).map(|i| (1.0 + i as f64, 0.5 + 0.05 * ((i * 7) % 10) as f64)).collect();
        let plan = order_layers(3.0, &layers).unwrap();
        // no adjacent swap improves the result
        for i in 0..layers.len() - 1 {
            let mut p = plan.per_layer.clone();
            p.swap(i, i + 1);
            assert!(expected_t_depth(3.0, &p).unwrap() >= plan.predicted_expected_t_depth - 1e-9);
        }
    }

    #[test]
    fn prune_removes_near_identity_b() {
        let base = Base::from_ln(-1e-9f64);
        let mut c = Circuit::new(3, 2, base);
        c.push(Gate::b(2.0, 3, &[0, 1]));
        c.measure(vec![3]);
        c.push(Gate::b(40.0, 4, &[1, 2]));
        c.measure(vec![4]);
        let (p, r) = prune_circuit(&c, 1e-6).unwrap();
        assert_eq!(r.removed_b, 1);
        assert_eq!(r.dropped_layers, 1);
        assert_eq!(p.gates().count(), 1);
        assert!(crate::circuit::validate(&p).is_empty());
    }

    #[test]
    fn prune_replaces_a_near_xh() {
        let base = Base::from_ln(-1e-9f64);
        let mut c = Circuit::new(2, 0, base);
        c.push(Gate::a(0.0, 0));
        c.push(Gate::a(40.0, 1));
        let (p, r) = prune_circuit(&c, 1e-6).unwrap();
        assert_eq!(r.replaced_a, 1);
        let kinds: Vec<_> = p.gates().map(|g| g.kind).collect();
        assert_eq!(kinds, vec![RotationKind::Hadamard, RotationKind::PauliX, RotationKind::A(40.0)]);
    }
}
