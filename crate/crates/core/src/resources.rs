//! Clifford+T cost model and expected T-depth assembly.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::builder::{build_gaussian_2d, build_half_gaussian, build_layered_gaussian};
use crate::circuit::{Circuit, Element, LayeredCircuit};
use crate::error::{Error, Result};
use crate::gate::Gate;
use crate::optimizer::{expected_t_depth, order_layers, prune_layered, Allocation, ErrorBudget, OrderingPlan, PruneReport};
use crate::scalar::Real;
use crate::simulator::{ideal_state, l2_error, run_noisy, simulate_postselected, IdealKind, SimOptions, SimReport};
use crate::spec::{GaussianSpec, Mode};

/// How the T-depth of a doubly-controlled rotation is derived.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DepthConvention {
    /// Depth equals the full T-count, `2.3 log2(1/eps) + 24.7`; at
    /// `eps = 2 delta` this is `2.3 log2(1/delta) + 22.4`.
    #[default]
    CountAsDepth,
    /// The Toffoli pair overlaps the rotation, leaving the singly
    /// controlled depth `2.3 log2(1/eps) + 20.7`.
    ToffoliOverlap,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Rounding {
    #[default]
    Real,
    /// Round each gate's cost up to a whole number of T gates.
    Ceil,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostModel<T> {
    pub single_slope: T,
    pub single_offset: T,
    pub controlled_slope: T,
    pub controlled_offset: T,
    /// Extra T gates for the Toffoli pair of a doubly-controlled rotation.
    pub toffoli_pair: T,
    pub convention: DepthConvention,
    pub rounding: Rounding,
}

impl<T: Real> Default for CostModel<T> {
    fn default() -> Self {
        Self {
            single_slope: T::lit(1.15),
            single_offset: T::lit(9.2),
            controlled_slope: T::lit(2.3),
            controlled_offset: T::lit(20.7),
            toffoli_pair: T::lit(4.0),
            convention: DepthConvention::default(),
            rounding: Rounding::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateClass {
    Clifford,
    Single,
    Controlled,
    DoublyControlled,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TCost<T> {
    pub t_count: T,
    pub t_depth: T,
}

pub fn gate_class<T: Real>(gate: &Gate<T>) -> Result<GateClass> {
    if gate.kind.is_clifford() {
        return Ok(GateClass::Clifford);
    }
    match gate.controls.len() {
        0 => Ok(GateClass::Single),
        1 => Ok(GateClass::Controlled),
        2 => Ok(GateClass::DoublyControlled),
        k => Err(Error::Unsupported(format!("no cost model for a rotation with {k} controls"))),
    }
}

fn check_eps<T: Real>(eps: T) -> Result<()> {
    if eps > T::zero() && eps < T::one() {
        Ok(())
    } else {
        Err(Error::domain(format!("synthesis accuracy must lie in (0, 1), got {eps}")))
    }
}

impl<T: Real> CostModel<T> {
    pub fn with_convention(self, convention: DepthConvention) -> Self {
        Self { convention, ..self }
    }

    pub fn with_rounding(self, rounding: Rounding) -> Self {
        Self { rounding, ..self }
    }

    fn round(&self, v: T) -> T {
        match self.rounding {
            Rounding::Real => v,
            Rounding::Ceil => v.ceil(),
        }
    }

    pub fn single_rotation(&self, eps: T) -> T {
        self.single_slope * (T::one() / eps).log2() + self.single_offset
    }

    pub fn controlled_rotation(&self, eps: T) -> T {
        self.controlled_slope * (T::one() / eps).log2() + self.controlled_offset
    }

    pub fn doubly_controlled(&self, eps: T) -> T {
        self.controlled_rotation(eps) + self.toffoli_pair
    }

    pub fn gate_t_cost(&self, class: GateClass, eps: T) -> Result<TCost<T>> {
        let (count, depth) = match class {
            GateClass::Clifford => return Ok(TCost { t_count: T::zero(), t_depth: T::zero() }),
            GateClass::Single => {
                check_eps(eps)?;
                let c = self.single_rotation(eps);
                (c, c)
            }
            GateClass::Controlled => {
                check_eps(eps)?;
                let c = self.controlled_rotation(eps);
                (c, c)
            }
            GateClass::DoublyControlled => {
                check_eps(eps)?;
                let c = self.doubly_controlled(eps);
                let d = match self.convention {
                    DepthConvention::CountAsDepth => c,
                    DepthConvention::ToffoliOverlap => self.controlled_rotation(eps),
                };
                (c, d)
            }
        };
        Ok(TCost { t_count: self.round(count), t_depth: self.round(depth) })
    }

    /// Cost of `gate` at its budgeted accuracy.
    pub fn gate_cost(&self, gate: &Gate<T>, budget: &ErrorBudget<T>) -> Result<TCost<T>> {
        self.gate_t_cost(gate_class(gate)?, budget.for_gate(gate))
    }
}

/// [`CostModel::gate_t_cost`] under the default model.
pub fn gate_t_cost<T: Real>(class: GateClass, eps: T) -> Result<TCost<T>> {
    CostModel::default().gate_t_cost(class, eps)
}

/// ASAP T-depth of a gate sequence: each gate starts once all of its
/// qubits are free.
pub fn sequence_t_depth<'a, T: Real>(
    gates: impl IntoIterator<Item = &'a Gate<T>>,
    qubits: usize,
    budget: &ErrorBudget<T>,
    model: &CostModel<T>,
) -> Result<T> {
    let mut ready = vec![T::zero(); qubits];
    let mut depth = T::zero();
    for g in gates {
        let d = model.gate_cost(g, budget)?.t_depth;
        if d == T::zero() {
            continue;
        }
        let mut start = T::zero();
        for q in g.qubits() {
            let r = *ready.get(q).ok_or_else(|| Error::InvalidCircuit(format!("qubit {q} out of range")))?;
            start = start.max(r);
        }
        let end = start + d;
        for q in g.qubits() {
            ready[q] = end;
        }
        depth = depth.max(end);
    }
    Ok(depth)
}

/// T-depths of a layered circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerDepths<T> {
    /// The prelude of uncontrolled rotations.
    pub n0: T,
    /// One entry `n_k` per layer.
    pub layers: Vec<T>,
    /// Normally zero: the symmetrization is Clifford.
    pub postlude: T,
}

impl<T: Real> LayerDepths<T> {
    /// Layer depths with the prelude folded into the first layer.
    pub fn folded(&self) -> Vec<T> {
        let mut v = self.layers.clone();
        match v.first_mut() {
            Some(first) => *first += self.n0,
            None => v.push(self.n0),
        }
        v
    }
}

pub fn layered_t_depth<T: Real>(
    layered: &LayeredCircuit<T>,
    budget: &ErrorBudget<T>,
    model: &CostModel<T>,
) -> Result<LayerDepths<T>> {
    layered.check_parallel()?;
    let q = layered.prelude.total_qubits();
    let n0 = sequence_t_depth(layered.prelude.gates(), q, budget, model)?;
    let layers = layered
        .layers
        .iter()
        .map(|l| sequence_t_depth(&l.gates, q, budget, model))
        .collect::<Result<Vec<_>>>()?;
    let postlude = sequence_t_depth(layered.postlude.gates(), q, budget, model)?;
    Ok(LayerDepths { n0, layers, postlude })
}

/// Expected T-depth of `layered` given the success probability of each
/// layer, in layer order.
pub fn expected_from_layered<T: Real>(
    layered: &LayeredCircuit<T>,
    budget: &ErrorBudget<T>,
    model: &CostModel<T>,
    probs: &[T],
) -> Result<T> {
    let d = layered_t_depth(layered, budget, model)?;
    if probs.len() != d.layers.len() {
        return Err(Error::DimensionMismatch(probs.len(), d.layers.len()));
    }
    let seq: Vec<(T, T)> = d.layers.iter().copied().zip(probs.iter().copied()).collect();
    Ok(expected_t_depth(d.n0, &seq)? + d.postlude)
}

/// ASAP T-depth of each run of gates between barriers; a circuit with `L`
/// barriers has `L + 1` segments.
pub fn segment_t_depths<T: Real>(
    circuit: &Circuit<T>,
    budget: &ErrorBudget<T>,
    model: &CostModel<T>,
) -> Result<Vec<T>> {
    let q = circuit.total_qubits();
    let mut out = Vec::new();
    let mut run: Vec<&Gate<T>> = Vec::new();
    for el in circuit.elements() {
        match el {
            Element::Gate(g) => run.push(g),
            Element::Measure(_) => {
                out.push(sequence_t_depth(run.drain(..), q, budget, model)?);
            }
        }
    }
    out.push(sequence_t_depth(run, q, budget, model)?);
    Ok(out)
}

/// Expected T-depth of a flat circuit: segment `k` is paid once barrier
/// `k - 1` has passed, the final segment once on success.
pub fn expected_from_circuit<T: Real>(
    circuit: &Circuit<T>,
    budget: &ErrorBudget<T>,
    model: &CostModel<T>,
    probs: &[T],
) -> Result<T> {
    let seg = segment_t_depths(circuit, budget, model)?;
    if probs.len() + 1 != seg.len() {
        return Err(Error::DimensionMismatch(probs.len() + 1, seg.len()));
    }
    let seq: Vec<(T, T)> = seg.iter().copied().zip(probs.iter().copied()).collect();
    Ok(expected_t_depth(T::zero(), &seq)? + seg[seg.len() - 1])
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OrderStrategy {
    /// Minimize expected T-depth, re-simulating until the order is stable.
    #[default]
    Optimal,
    /// Keep the construction order.
    Identity,
    /// Uniformly random permutation from the given seed.
    Random(u64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateOptions<T> {
    pub allocation: Allocation,
    pub cost: CostModel<T>,
    pub order: OrderStrategy,
    /// Seed for perturbed rotations; `None` simulates exact gates.
    pub noise_seed: Option<u64>,
    pub ideal: IdealKind,
    pub prune: bool,
    pub sim: SimOptions,
}

impl<T: Real> Default for EstimateOptions<T> {
    fn default() -> Self {
        Self {
            allocation: Allocation::default(),
            cost: CostModel::default(),
            order: OrderStrategy::default(),
            noise_seed: Some(0),
            ideal: IdealKind::default(),
            prune: true,
            sim: SimOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Estimate<T> {
    pub spec: GaussianSpec<T>,
    pub budget: ErrorBudget<T>,
    /// Final circuit in execution order, layers annotated with `n_k`, `p_k`.
    pub layered: LayeredCircuit<T>,
    pub report: SimReport<T>,
    pub depths: LayerDepths<T>,
    pub pruned: PruneReport,
    pub plan: Option<OrderingPlan<T>>,
    /// Expected T-depth in construction order, exact gates.
    pub identity_expected_t_depth: T,
}

impl<T: Real> Estimate<T> {
    pub fn expected_t_depth(&self) -> T {
        self.report.expected_t_depth.expect("estimate always fills the expected T-depth")
    }

    pub fn epsilon(&self) -> T {
        self.report.l2_error.expect("estimate always fills the L2 error")
    }
}

/// Uncompiled layered form of `spec`'s circuit.
pub fn layered_for_spec<T: Real>(spec: &GaussianSpec<T>) -> Result<LayeredCircuit<T>> {
    match spec.mode() {
        Mode::FullGaussian => build_layered_gaussian(spec),
        Mode::HalfGaussian => LayeredCircuit::from_circuit(&build_half_gaussian(spec.n_qubits(), *spec.base())?),
        Mode::TwoDim => {
            let l = spec.layout().expect("2-D spec carries its layout");
            LayeredCircuit::from_circuit(&build_gaussian_2d(l.x_qubits, l.y_qubits, l.form, *spec.base())?)
        }
    }
}

fn exact_probs<T: Real>(layered: &LayeredCircuit<T>, sim: &SimOptions) -> Result<Vec<T>> {
    Ok(simulate_postselected(layered, sim)?.1.layer_probs)
}

fn pair_up<T: Real>(depths: &[T], probs: &[T]) -> Vec<(T, T)> {
    depths.iter().copied().zip(probs.iter().copied()).collect()
}

/// At most this many order-then-resimulate rounds.
const MAX_ORDER_ROUNDS: usize = 10;

/// Build, prune, simulate, order and cost `spec`.
///
/// Layer success probabilities depend on the order in which the layers
/// act, so the optimal order is found by alternating [`order_layers`] with
/// re-simulation until the permutation is stable, keeping the cheapest
/// order seen.
pub fn estimate<T: Real>(spec: &GaussianSpec<T>, opts: &EstimateOptions<T>) -> Result<Estimate<T>> {
    let delta = spec.gate_error();
    let budget = ErrorBudget::new(delta, opts.allocation);
    let built = layered_for_spec(spec)?;
    let (mut layered, pruned) =
        if opts.prune { prune_layered(&built, delta)? } else { (built, PruneReport::default()) };
    let cost_of = |l: &LayeredCircuit<T>, probs: &[T]| expected_from_layered(l, &budget, &opts.cost, probs);

    let probs = exact_probs(&layered, &opts.sim)?;
    let identity_expected_t_depth = cost_of(&layered, &probs)?;
    let mut plan = None;
    if !layered.layers.is_empty() {
        match opts.order {
            OrderStrategy::Identity => {}
            OrderStrategy::Random(seed) => {
                let mut perm: Vec<usize> = (0..layered.layers.len()).collect();
                perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
                layered = layered.reordered(&perm)?;
            }
            OrderStrategy::Optimal => {
                let mut current = layered.clone();
                let mut current_probs = probs;
                let mut best = (identity_expected_t_depth, current.clone(), None);
                for _ in 0..MAX_ORDER_ROUNDS {
                    let d = layered_t_depth(&current, &budget, &opts.cost)?;
                    let p = order_layers(d.n0, &pair_up(&d.layers, &current_probs))?;
                    let stable = p.permutation.iter().enumerate().all(|(i, &j)| i == j);
                    current = current.reordered(&p.permutation)?;
                    current_probs = exact_probs(&current, &opts.sim)?;
                    let c = cost_of(&current, &current_probs)?;
                    if c < best.0 {
                        best = (c, current.clone(), Some(p));
                    }
                    if stable {
                        break;
                    }
                }
                layered = best.1;
                plan = best.2;
            }
        }
    }
    let depths = layered_t_depth(&layered, &budget, &opts.cost)?;

    let target = ideal_state(spec, opts.ideal)?;
    let (state, mut report) = match opts.noise_seed {
        Some(seed) => run_noisy(&layered, &target, &budget, seed, &opts.sim)?,
        None => simulate_postselected(&layered, &opts.sim)?,
    };
    report.l2_error = Some(l2_error(&target, &state)?);
    report.expected_t_depth = Some(cost_of(&layered, &report.layer_probs)?);
    for ((layer, &n), &p) in layered.layers.iter_mut().zip(&depths.layers).zip(&report.layer_probs) {
        layer.t_depth = Some(n);
        layer.success_prob = Some(p);
    }
    Ok(Estimate {
        spec: spec.clone(),
        budget,
        layered,
        report,
        depths,
        pruned,
        plan,
        identity_expected_t_depth,
    })
}

/// Largest gate error, scanning down from `spec.gate_error()`, whose
/// estimate reaches `target_epsilon`.
///
/// The error of a fixed noise draw scales roughly linearly with `delta`,
/// so the first step jumps by that ratio; after that `delta` shrinks by
/// `10^(-1/16)` per step.
pub fn calibrate_delta<T: Real>(
    spec: &GaussianSpec<T>,
    target_epsilon: T,
    opts: &EstimateOptions<T>,
) -> Result<Estimate<T>> {
    if !(target_epsilon > T::zero()) {
        return Err(Error::domain("target epsilon must be positive"));
    }
    let step = T::lit(10f64.powf(-1.0 / 16.0));
    let floor = T::lit(1e-15).max(T::epsilon() * T::lit(10.0));
    let mut delta = spec.gate_error();
    let mut est = estimate(&spec.with_gate_error(delta)?, opts)?;
    if est.epsilon() > target_epsilon {
        let jump = target_epsilon / est.epsilon() * T::lit(0.98);
        if jump < step {
            delta *= jump;
            est = estimate(&spec.with_gate_error(delta)?, opts)?;
        }
    }
    for _ in 0..200 {
        if est.epsilon() <= target_epsilon {
            return Ok(est);
        }
        delta *= step;
        if delta < floor {
            break;
        }
        est = estimate(&spec.with_gate_error(delta)?, opts)?;
    }
    Err(Error::domain(format!(
        "no gate error down to {delta} reaches epsilon {target_epsilon}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::{build_layered_gaussian_n, build_poly_phase};
    use crate::gate::Base;

    #[test]
    fn formula_values() {
        let m = CostModel::<f64>::default();
        assert!((m.single_rotation(1e-3) - (1.15 * 1000f64.log2() + 9.2)).abs() < 1e-12);
        assert!((m.single_rotation(1e-3) - 20.66).abs() < 0.01);
        for eps in [1e-2, 1e-6, 1e-12] {
            assert!((m.doubly_controlled(eps) - m.controlled_rotation(eps) - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn doubly_controlled_at_twice_delta() {
        for delta in [1e-3f64, 1e-6, 1e-10] {
            let c = gate_t_cost(GateClass::DoublyControlled, 2.0 * delta).unwrap();
            assert!((c.t_depth - (2.3 * (1.0 / delta).log2() + 22.4)).abs() < 1e-9);
        }
        let m = CostModel::<f64>::default().with_convention(DepthConvention::ToffoliOverlap);
        let c = m.gate_t_cost(GateClass::DoublyControlled, 1e-4).unwrap();
        assert_eq!(c.t_depth, m.controlled_rotation(1e-4));
        assert_eq!(c.t_count, m.doubly_controlled(1e-4));
    }

    #[test]
    fn cliffords_are_free_and_bad_eps_rejected() {
        assert_eq!(gate_t_cost(GateClass::Clifford, 0.5f64).unwrap(), TCost { t_count: 0.0, t_depth: 0.0 });
        assert!(gate_t_cost(GateClass::Single, 1.0f64).is_err());
        let ceil = CostModel::<f64>::default().with_rounding(Rounding::Ceil);
        assert_eq!(ceil.gate_t_cost(GateClass::Single, 1e-3).unwrap().t_count, 21.0);
    }

    #[test]
    fn seven_qubit_layer_depths() {
        let c = build_layered_gaussian_n(7, Base::from_alpha(0.9)).unwrap();
        let budget = ErrorBudget::two_to_one(1e-4);
        let d = layered_t_depth(&c, &budget, &CostModel::default()).unwrap();
        let nk = 2.3 * 1e4f64.log2() + 22.4;
        assert_eq!(d.layers.len(), 5);
        assert!(d.layers.iter().all(|v| (v - nk).abs() < 1e-9));
        assert!((d.n0 - (1.15 * 1e4f64.log2() + 9.2)).abs() < 1e-9);
        assert_eq!(d.postlude, 0.0);
        assert!((d.folded()[0] - d.n0 - nk).abs() < 1e-9);
    }

    #[test]
    fn phase_circuit_depth_counts_stages() {
        let c = build_poly_phase(3, Base::from_alpha(0.2), 1).unwrap();
        let budget = ErrorBudget::uniform(1e-3);
        let m = CostModel::default();
        // three Z rotations on distinct qubits run in one stage
        let d: f64 = sequence_t_depth(c.gates(), 3, &budget, &m).unwrap();
        assert!((d - m.single_rotation(1e-3)).abs() < 1e-12);
        let seg = segment_t_depths(&c, &budget, &m).unwrap();
        assert_eq!(seg.len(), 1);
    }

    #[test]
    fn multi_controlled_rotation_is_unsupported() {
        let c = build_poly_phase(4, Base::from_alpha(0.2), 4).unwrap();
        let r = segment_t_depths(&c, &ErrorBudget::uniform(1e-3), &CostModel::default());
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }

    #[test]
    fn estimate_end_to_end_small() {
        let spec = GaussianSpec::new(0.9, 6, 1e-5, Mode::FullGaussian).unwrap();
        let e = estimate(&spec, &EstimateOptions::default()).unwrap();
        assert_eq!(e.report.data_qubit_count, 6);
        assert!(e.epsilon() < 1e-3);
        assert!(e.expected_t_depth() <= e.identity_expected_t_depth * 1.0001 + 1.0);
        let again = estimate(&spec, &EstimateOptions::default()).unwrap();
        assert_eq!(e, again);
        let exact = estimate(&spec, &EstimateOptions { noise_seed: None, prune: false, ..Default::default() })
            .unwrap();
        assert!(exact.epsilon() < 1e-12);
    }

    #[test]
    fn calibration_reaches_target() {
        let spec = GaussianSpec::new(0.95, 6, 1e-3, Mode::FullGaussian).unwrap();
        let e = calibrate_delta(&spec, 1e-6, &EstimateOptions::default()).unwrap();
        assert!(e.epsilon() <= 1e-6);
        assert!(e.spec.gate_error() < 1e-3);
    }
}
