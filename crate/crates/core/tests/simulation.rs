use gausskit::resources::{expected_from_layered, sequence_t_depth};
use gausskit::simulator::{ideal_gaussian, ideal_gaussian_beta, sample_rus, simulate_postselected_circuit};
use gausskit::*;

fn opts() -> SimOptions {
    SimOptions::default()
}

#[test]
fn f32_tracks_f64() {
    let c64 = build_full_gaussian(8, Base::from_alpha(0.999f64)).unwrap();
    let c32 = build_full_gaussian(8, Base::from_alpha(0.999f32)).unwrap();
    let (s64, _) = simulate_postselected_circuit(&c64, &opts()).unwrap();
    let (s32, _) = simulate_postselected_circuit(&c32, &opts()).unwrap();
    for (a, b) in s64.amplitudes().iter().zip(s32.amplitudes()) {
        assert!((a.re - b.re as f64).abs() < 1e-5);
    }
}

#[test]
fn beta_spec_matches_its_alpha_form() {
    let spec = GaussianSpec64::with_beta(1e-6, 8, 1e-8).unwrap();
    let by_beta = ideal_gaussian_beta(8, 1e-6, IdealKind::Finite).unwrap();
    let by_alpha = ideal_gaussian(8, spec.base(), IdealKind::Finite).unwrap();
    assert!(l2_error(&by_beta, &by_alpha).unwrap() < 1e-12);
    // edge over centre is beta^(1/4 - u^2), u the centre sample's offset
    let u = 127.0 / 255.0 - 0.5f64;
    let ends = by_beta.amplitudes()[0].re / by_beta.amplitudes()[127].re;
    assert!((ends / 1e-6f64.powf(0.25 - u * u) - 1.0).abs() < 1e-12);
}

#[test]
fn infinite_tail_counts_missing_mass() {
    // a wide window spills outside the register
    let base = Base::from_alpha(0.999f64);
    let finite = ideal_gaussian(4, &base, IdealKind::Finite).unwrap();
    let tail = ideal_gaussian(4, &base, IdealKind::InfiniteTail).unwrap();
    assert!((finite.norm_sqr() - 1.0).abs() < 1e-12);
    assert!(tail.norm_sqr() < 0.5);
    // a sharp one does not
    let sharp = ideal_gaussian(6, &Base::from_alpha(0.5f64), IdealKind::InfiniteTail).unwrap();
    assert!((sharp.norm_sqr() - 1.0).abs() < 1e-12);
}

#[test]
fn noisy_error_scales_with_gate_error() {
    let spec = GaussianSpec64::with_beta(1e-4, 8, 1e-4).unwrap();
    let layered = build_layered_gaussian(&spec).unwrap();
    let target = ideal_state(&spec, IdealKind::Finite).unwrap();
    let eps = |delta: f64| {
        let budget = ErrorBudget::two_to_one(delta);
        run_noisy(&layered, &target, &budget, 3, &opts()).unwrap().1.l2_error.unwrap()
    };
    let (big, small) = (eps(1e-4), eps(1e-6));
    assert!(small < big);
    // perturbations of fixed direction scale linearly to first order
    assert!((big / small).log10() > 1.5 && (big / small).log10() < 2.5, "{big} {small}");
}

#[test]
fn noisy_runs_are_reproducible() {
    let layered = build_layered_gaussian_n(10, Base::from_alpha(0.9999)).unwrap();
    let spec = GaussianSpec64::new(0.9999, 10, 1e-5, Mode::FullGaussian).unwrap();
    let target = ideal_state(&spec, IdealKind::Finite).unwrap();
    let budget = ErrorBudget::two_to_one(1e-5);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_noisy(&layered, &target, &budget, 21, &opts()).unwrap())
    };
    let (a, ra) = run(1);
    let (b, rb) = run(3);
    assert_eq!(a, b);
    assert_eq!(ra, rb);
}

#[test]
fn exact_budget_reproduces_noiseless_state() {
    let layered = build_layered_gaussian_n(7, Base::from_alpha(0.99)).unwrap();
    let spec = GaussianSpec64::new(0.99, 7, 1e-5, Mode::FullGaussian).unwrap();
    let target = ideal_state(&spec, IdealKind::Finite).unwrap();
    let (_, report) = run_noisy(&layered, &target, &ErrorBudget::exact(), 1, &opts()).unwrap();
    assert!(report.l2_error.unwrap() < 1e-12);
    assert_eq!(report.expected_t_depth, None);
}

#[test]
fn reordering_keeps_the_output_state() {
    let layered = build_layered_gaussian_n(9, Base::from_alpha(0.995f64)).unwrap();
    let perm: Vec<usize> = (0..layered.layers.len()).rev().collect();
    let (a, ra) = simulate_postselected(&layered, &opts()).unwrap();
    let (b, rb) = simulate_postselected(&layered.reordered(&perm).unwrap(), &opts()).unwrap();
    assert!(l2_error(&a, &b).unwrap() < 1e-12);
    assert!((ra.success_probability() - rb.success_probability()).abs() < 1e-12);
}

#[test]
fn success_probability_is_the_squared_subnormalization() {
    let c = build_half_gaussian(5, Base::from_alpha(0.9f64)).unwrap();
    let (_, r) = simulate_exact(&c, &opts()).unwrap();
    assert!((r.success_probability() - r.subnormalization.powi(2)).abs() < 1e-14);
    let direct: f64 = (0..32).map(|x: i32| 0.9f64.powi(2 * x * x)).sum::<f64>() / 32.0;
    assert!((r.success_probability() - direct).abs() < 1e-12);
}

#[test]
fn capacity_limit_is_reported() {
    let c = build_exponential(12, Base::from_alpha(0.5)).unwrap();
    let small = SimOptions { max_qubits: 10, memory_limit: None };
    assert_eq!(simulate_exact(&c, &small).map(|_| ()), Err(Error::Capacity { needed: 12, limit: 10 }));
    let tight = SimOptions { max_qubits: 30, memory_limit: Some(1) };
    assert!(matches!(simulate_exact(&build_exponential(20, Base::from_alpha(0.5)).unwrap(), &tight),
        Err(Error::Capacity { .. })));
}

#[test]
fn rus_sampler_matches_closed_form() {
    let layers = [(30.0, 0.4), (12.0, 0.9), (50.0, 0.7)];
    let s = sample_rus(20.0f64, &layers, 200_000, 4).unwrap();
    let formula = expected_t_depth(20.0, &layers).unwrap();
    assert!((s.mean - formula).abs() < 3.0 * s.std_error, "{} vs {formula}", s.mean);
}

#[test]
fn estimate_is_deterministic_and_ordered() {
    let spec = GaussianSpec64::with_beta(1e-6, 10, 1e-7).unwrap();
    let o = EstimateOptions::default();
    let a = estimate(&spec, &o).unwrap();
    let b = estimate(&spec, &o).unwrap();
    assert_eq!(a, b);
    assert!(a.expected_t_depth() <= a.identity_expected_t_depth * 1.001);
    for layer in &a.layered.layers {
        assert!(layer.t_depth.is_some() && layer.success_prob.is_some());
    }
    let recomputed = expected_from_layered(&a.layered, &a.budget, &o.cost, &a.report.layer_probs).unwrap();
    assert!((recomputed - a.expected_t_depth()).abs() < 1e-9);
}

#[test]
fn estimate_covers_half_and_two_dim_targets() {
    let half = GaussianSpec64::new(0.9, 6, 1e-6, Mode::HalfGaussian).unwrap();
    let e = estimate(&half, &EstimateOptions::default()).unwrap();
    assert!(e.epsilon() < 1e-4 && e.expected_t_depth() > 0.0);
    let form = QuadraticForm::new(1, 1, 1).unwrap();
    let two = GaussianSpec64::two_dim(0.95, 3, 3, form, 1e-6).unwrap();
    let e = estimate(&two, &EstimateOptions::default()).unwrap();
    assert!(e.epsilon() < 1e-4 && e.expected_t_depth() > 0.0);
}

#[test]
fn calibration_reaches_the_target() {
    let spec = GaussianSpec64::with_beta(1e-4, 8, 1e-4).unwrap();
    let e = calibrate_delta(&spec, 1e-6, &EstimateOptions::default()).unwrap();
    assert!(e.epsilon() <= 1e-6);
    assert!(e.spec.gate_error() < 1e-4);
}

#[test]
fn clifford_only_sequences_are_free() {
    let mut c = Circuit::new(3, 0, Base::from_alpha(0.5f64));
    c.push(Gate::h(0));
    c.push(Gate::cnot(Control::open(0), 1));
    let d = sequence_t_depth(c.gates(), 3, &ErrorBudget::two_to_one(1e-6), &CostModel::default()).unwrap();
    assert_eq!(d, 0.0);
}
