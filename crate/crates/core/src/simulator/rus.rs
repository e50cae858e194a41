use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::postselect::simulate_postselected;
use super::SimOptions;
use crate::circuit::LayeredCircuit;
use crate::error::{Error, Result};
use crate::optimizer::ErrorBudget;
use crate::resources::{layered_t_depth, CostModel};
use crate::scalar::Real;

/// Trials per independently seeded chunk.
const CHUNK: usize = 1 << 12;

/// Empirical T-depth spent until the first fully successful attempt.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RusStats<T> {
    pub trials: usize,
    pub mean: T,
    pub std_dev: T,
    pub std_error: T,
}

/// Samples repeat-until-success runs. Each attempt pays `n0`, then runs the
/// layers in order, paying `n_k` for each layer reached, and restarts at
/// the first failed measurement.
///
/// Chunk `i` draws from the ChaCha8 stream `i` under `seed`, so the result
/// does not depend on the number of worker threads.
pub fn sample_rus<T: Real>(n0: T, layers: &[(T, T)], trials: usize, seed: u64) -> Result<RusStats<T>> {
    if trials == 0 {
        return Err(Error::domain("need at least one trial"));
    }
    for (k, &(n, p)) in layers.iter().enumerate() {
        if p == T::zero() {
            return Err(Error::DivergentCost { layer: k });
        }
        if !(p > T::zero() && p <= T::one()) || !(n >= T::zero()) {
            return Err(Error::domain(format!("layer {k}: need n >= 0 and p in (0, 1]")));
        }
    }
    let n0 = n0.to_f64_lossy();
    let layers: Vec<(f64, f64)> = layers.iter().map(|&(n, p)| (n.to_f64_lossy(), p.to_f64_lossy())).collect();
    let chunks = trials.div_ceil(CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let count = CHUNK.min(trials - chunk * CHUNK);
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 0..count {
                let cost = one_trial(n0, &layers, &mut rng);
                sum += cost;
                sum_sq += cost * cost;
            }
            (sum, sum_sq)
        })
        .collect();
    let (sum, sum_sq) = partial.iter().fold((0.0, 0.0), |(a, b), &(s, q)| (a + s, b + q));
    let t = trials as f64;
    let mean = sum / t;
    let var = if trials > 1 { ((sum_sq - t * mean * mean) / (t - 1.0)).max(0.0) } else { 0.0 };
    let std_dev = var.sqrt();
    Ok(RusStats {
        trials,
        mean: T::lit(mean),
        std_dev: T::lit(std_dev),
        std_error: T::lit(std_dev / t.sqrt()),
    })
}

fn one_trial(n0: f64, layers: &[(f64, f64)], rng: &mut ChaCha8Rng) -> f64 {
    let mut cost = 0.0;
    'attempt: loop {
        cost += n0;
        for &(n, p) in layers {
            cost += n;
            if p < 1.0 && rng.random::<f64>() >= p {
                continue 'attempt;
            }
        }
        return cost;
    }
}

/// Monte Carlo RUS for a layered circuit: success probabilities from an
/// exact post-selected simulation, layer depths from `cost`.
pub fn monte_carlo_rus<T: Real>(
    layered: &LayeredCircuit<T>,
    budget: &ErrorBudget<T>,
    cost: &CostModel<T>,
    trials: usize,
    seed: u64,
    opts: &SimOptions,
) -> Result<RusStats<T>> {
    let (_, report) = simulate_postselected(layered, opts)?;
    let depths = layered_t_depth(layered, budget, cost)?;
    let seq: Vec<(T, T)> = depths.layers.iter().copied().zip(report.layer_probs.iter().copied()).collect();
    let mut stats = sample_rus(depths.n0, &seq, trials, seed)?;
    // the Clifford postlude is normally free; anything else runs once
    stats.mean += depths.postlude;
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn certain_layers_cost_exactly_their_sum() {
        let s = sample_rus(3.0, &[(4.0, 1.0), (5.0, 1.0)], 1000, 1).unwrap();
        assert_eq!((s.mean, s.std_dev), (12.0, 0.0));
    }

    #[test]
    fn two_layer_example_converges() {
        let s = sample_rus(10.0f64, &[(4.0, 0.5), (4.0, 0.5)], 100_000, 9).unwrap();
        assert!((s.mean - 64.0).abs() < 3.0 * s.std_error, "{s:?}");
    }

    #[test]
    fn thread_count_does_not_matter() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| sample_rus(1.0f64, &[(2.0, 0.7), (3.0, 0.4)], 20_000, 5).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(sample_rus(1.0f64, &[(1.0, 0.5)], 0, 1).is_err());
        assert_eq!(sample_rus(1.0f64, &[(1.0, 0.0)], 10, 1), Err(Error::DivergentCost { layer: 0 }));
    }
}
