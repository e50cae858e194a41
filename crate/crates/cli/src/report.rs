//! The `simulate` command and the CSV row shared with `sweep`.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde::Serialize;

use gausskit::resources::expected_from_circuit;
use gausskit::simulator::{simulate_postselected_circuit, simulate_postselected_with, NoisyRotations};
use gausskit::{
    estimate, ideal_state, l2_error, monte_carlo_rus, simulate_exact, Circuit64, ErrorBudget, Estimate64,
    SimOptions, SimReport64,
};

use crate::target::{Target, TargetArgs};
use crate::{write_output, RunArgs};

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Circuit in the text format. Target flags, when also given, supply
    /// the ideal state for the error.
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    #[command(flatten)]
    pub target: TargetArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Monte Carlo repeat-until-success trials (Gaussian targets).
    #[arg(long, default_value_t = 0)]
    pub trials: usize,
    /// Also write the result as a one-row CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub n_qubits: usize,
    pub alpha_or_beta: f64,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub gamma: f64,
    pub expected_t_depth: Option<f64>,
    pub layer_count: usize,
    pub seed: u64,
}

impl Row {
    pub fn from_estimate(est: &Estimate64, delta: Option<f64>, seed: u64) -> Self {
        Row {
            n_qubits: est.spec.n_qubits(),
            alpha_or_beta: est.spec.alpha_or_beta(),
            delta,
            epsilon: Some(est.epsilon()),
            gamma: est.report.subnormalization,
            expected_t_depth: delta.map(|_| est.expected_t_depth()),
            layer_count: est.layered.layers.len(),
            seed,
        }
    }
}

pub fn write_csv(path: &PathBuf, rows: &[Row]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6e}"))
}

fn render(row: &Row, probs: &[f64], extra: &[(String, String)]) -> String {
    let mut s = String::new();
    let mut line = |k: &str, v: String| {
        let _ = writeln!(s, "{k:<18}{v}");
    };
    line("data qubits", row.n_qubits.to_string());
    line("alpha or beta", format!("{}", row.alpha_or_beta));
    line("delta", row.delta.map_or_else(|| "exact gates".into(), |d| format!("{d:e}")));
    line("epsilon", fmt_opt(row.epsilon));
    line("gamma", format!("{:.6e}", row.gamma));
    line("success prob", format!("{:.6e}", row.gamma * row.gamma));
    line("layers", row.layer_count.to_string());
    line("p_k", probs.iter().map(|p| format!("{p:.6}")).collect::<Vec<_>>().join(" "));
    line("expected T-depth", row.expected_t_depth.map_or_else(|| "n/a".into(), |d| format!("{d:.3}")));
    for (k, v) in extra {
        line(k, v.clone());
    }
    s
}

fn finish(args: &SimulateArgs, row: Row, probs: &[f64], extra: &[(String, String)]) -> Result<()> {
    write_output(None, &render(&row, probs, extra))?;
    if let Some(out) = &args.out {
        write_csv(out, &[row])?;
    }
    Ok(())
}

/// T-depth of a flat circuit, or the reason it has none.
fn circuit_depth(
    circuit: &Circuit64,
    budget: &ErrorBudget<f64>,
    args: &SimulateArgs,
    probs: &[f64],
) -> Result<(Option<f64>, Option<String>)> {
    match expected_from_circuit(circuit, budget, &args.run.cost(), probs) {
        Ok(d) => Ok((Some(d), None)),
        Err(gausskit::Error::Unsupported(why)) => Ok((None, Some(why))),
        Err(e) => Err(e.into()),
    }
}

fn simulate_file(args: &SimulateArgs, path: &PathBuf, sim: SimOptions) -> Result<()> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let circuit: Circuit64 = gausskit::text::import(&text)?;
    let (state, report): (_, SimReport64) = match simulate_postselected_circuit(&circuit, &sim) {
        Err(gausskit::Error::Unsupported(_)) => simulate_exact(&circuit, &sim)?,
        other => other?,
    };
    let epsilon = if args.target.family.is_some() {
        let ideal = match args.target.target()? {
            Target::Unitary { ideal, .. } => ideal,
            Target::Gaussian(spec) => ideal_state(&spec, args.run.estimate_options(None, sim).ideal)?,
        };
        Some(l2_error(&ideal, &state)?)
    } else {
        None
    };
    let mut extra = Vec::new();
    let depth = match args.target.delta {
        Some(delta) => {
            let budget = ErrorBudget::new(delta, args.run.allocation());
            let (d, why) = circuit_depth(&circuit, &budget, args, &report.layer_probs)?;
            if let Some(why) = why {
                extra.push(("note".into(), why));
            }
            d
        }
        None => None,
    };
    let row = Row {
        n_qubits: circuit.data_qubits(),
        alpha_or_beta: circuit.base().alpha(),
        delta: args.target.delta,
        epsilon,
        gamma: report.subnormalization,
        expected_t_depth: depth,
        layer_count: report.layer_probs.len(),
        seed: args.run.seed,
    };
    finish(args, row, &report.layer_probs, &extra)
}

pub fn simulate(args: &SimulateArgs, sim: SimOptions) -> Result<()> {
    if let Some(path) = &args.circuit {
        return simulate_file(args, path, sim);
    }
    let seed = args.run.seed;
    let delta = args.target.delta;
    match args.target.target()? {
        Target::Unitary { circuit, ideal } => {
            let budget = ErrorBudget::new(delta.unwrap_or(0.0), args.run.allocation());
            let (state, report) = match delta {
                Some(_) => simulate_postselected_with(&circuit, &mut NoisyRotations::new(budget, seed), &sim)?,
                None => simulate_postselected_circuit(&circuit, &sim)?,
            };
            let mut extra = Vec::new();
            let depth = match delta {
                Some(_) => {
                    let (d, why) = circuit_depth(&circuit, &budget, args, &report.layer_probs)?;
                    if let Some(why) = why {
                        extra.push(("note".into(), format!("no resource estimate: {why}")));
                    }
                    d
                }
                None => None,
            };
            let row = Row {
                n_qubits: circuit.data_qubits(),
                alpha_or_beta: circuit.base().alpha(),
                delta,
                epsilon: Some(l2_error(&ideal, &state)?),
                gamma: report.subnormalization,
                expected_t_depth: depth,
                layer_count: 0,
                seed,
            };
            finish(args, row, &report.layer_probs, &extra)
        }
        Target::Gaussian(spec) => {
            sim.check::<f64>(spec.n_qubits())?;
            let opts = args.run.estimate_options(delta.map(|_| seed), sim);
            let est = estimate(&spec, &opts)?;
            let mut extra = Vec::new();
            if est.pruned.touched() > 0 {
                extra.push((
                    "pruned".into(),
                    format!(
                        "{} B removed, {} A replaced, {} layers dropped",
                        est.pruned.removed_b, est.pruned.replaced_a, est.pruned.dropped_layers
                    ),
                ));
            }
            if delta.is_some() {
                extra.push(("n_k".into(), est.depths.layers.iter().map(|n| format!("{n:.3}")).collect::<Vec<_>>().join(" ")));
                extra.push(("n_0".into(), format!("{:.3}", est.depths.n0)));
                if args.trials > 0 {
                    let rus = monte_carlo_rus(&est.layered, &est.budget, &opts.cost, args.trials, seed, &sim)?;
                    extra.push((
                        "Monte Carlo".into(),
                        format!("{:.3} +- {:.3} ({} trials)", rus.mean, rus.std_error, rus.trials),
                    ));
                }
            }
            finish(args, Row::from_estimate(&est, delta, seed), &est.report.layer_probs, &extra)
        }
    }
}
