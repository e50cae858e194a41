//! Grid sweeps over up to two parameters.

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{Context, Result};
use clap::Args;
use rayon::prelude::*;

use gausskit::{calibrate_delta, estimate, SimOptions};

use crate::report::{write_csv, Row};
use crate::target::{check_family_supports_estimates, Target, TargetArgs};
use crate::{RunArgs, UsageError};

pub const MAX_AXES: usize = 2;

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// `name:min:max:points[:log]`; name is one of alpha, one-minus-alpha,
    /// beta, delta, epsilon, n. At most two axes.
    #[arg(long = "axis", required = true)]
    pub axes: Vec<Axis>,
    #[command(flatten)]
    pub target: TargetArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Noise draws per grid point, one row each.
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Param {
    Alpha,
    OneMinusAlpha,
    Beta,
    Delta,
    /// Target total error; the gate error is calibrated to reach it.
    Epsilon,
    N,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub param: Param,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub log: bool,
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(4..=5).contains(&parts.len()) {
            return Err(format!("expected name:min:max:points[:log], got {s:?}"));
        }
        let param = match parts[0] {
            "alpha" => Param::Alpha,
            "one-minus-alpha" => Param::OneMinusAlpha,
            "beta" => Param::Beta,
            "delta" => Param::Delta,
            "epsilon" => Param::Epsilon,
            "n" => Param::N,
            other => return Err(format!("unknown sweep parameter {other:?}")),
        };
        let num = |t: &str| t.parse::<f64>().map_err(|_| format!("{t:?} is not a number"));
        let (min, max) = (num(parts[1])?, num(parts[2])?);
        let points: usize = parts[3].parse().map_err(|_| format!("{:?} is not a point count", parts[3]))?;
        let log = match parts.get(4) {
            None => false,
            Some(&"log") => true,
            Some(other) => return Err(format!("expected `log`, got {other:?}")),
        };
        if points == 0 {
            return Err("an axis needs at least one point".into());
        }
        if log && !(min > 0.0 && max > 0.0) {
            return Err("log axes need positive bounds".into());
        }
        Ok(Axis { param, min, max, points, log })
    }
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let t = i as f64 / last;
                let v = if self.log {
                    (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp()
                } else {
                    self.min + t * (self.max - self.min)
                };
                if self.param == Param::N { v.round() } else { v }
            })
            .collect()
    }
}

/// Grid points in row-major order, first axis outermost.
pub fn grid(axes: &[Axis]) -> Vec<Vec<(Param, f64)>> {
    let mut points = vec![Vec::new()];
    for axis in axes {
        let values = axis.values();
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push((axis.param, v));
                    q
                })
            })
            .collect();
    }
    points
}

struct Point {
    target: TargetArgs,
    epsilon: Option<f64>,
}

fn point(base: &TargetArgs, values: &[(Param, f64)]) -> Result<Point> {
    let mut target = base.clone();
    let mut epsilon = None;
    for &(param, v) in values {
        match param {
            Param::Alpha => target.alpha = Some(v),
            Param::OneMinusAlpha => target.alpha = Some(1.0 - v),
            Param::Beta => target.beta = Some(v),
            Param::Delta => target.delta = Some(v),
            Param::Epsilon => epsilon = Some(v),
            Param::N => target.n = Some(format!("{}", v as usize)),
        }
    }
    if let Some(eps) = epsilon {
        target.delta.get_or_insert(eps);
    }
    if target.delta.is_none() {
        return Err(UsageError("sweeps need --delta, a delta axis or an epsilon axis".into()).into());
    }
    Ok(Point { target, epsilon })
}

/// Seed for trial `trial` of grid point `index`.
pub fn row_seed(seed: u64, index: usize, trial: usize) -> u64 {
    seed ^ index as u64 ^ ((trial as u64) << 32)
}

fn run_point(args: &SweepArgs, p: &Point, index: usize, sim: SimOptions) -> Result<Vec<Row>> {
    let Target::Gaussian(spec) = p.target.target()? else {
        unreachable!("family checked before the sweep");
    };
    (0..args.trials)
        .map(|trial| {
            let seed = row_seed(args.run.seed, index, trial);
            let opts = args.run.estimate_options(Some(seed), sim);
            let est = match p.epsilon {
                Some(eps) => calibrate_delta(&spec, eps, &opts),
                None => estimate(&spec, &opts),
            }
            .with_context(|| format!("grid point {index}"))?;
            Ok(Row::from_estimate(&est, Some(est.spec.gate_error()), seed))
        })
        .collect()
}

pub fn sweep(args: &SweepArgs, sim: SimOptions) -> Result<()> {
    if args.axes.len() > MAX_AXES {
        return Err(UsageError(format!("at most {MAX_AXES} sweep axes, got {}", args.axes.len())).into());
    }
    if args.trials == 0 {
        return Err(UsageError("--trials must be at least 1".into()).into());
    }
    check_family_supports_estimates(args.target.family()?)?;
    let points = grid(&args.axes)
        .iter()
        .map(|values| point(&args.target, values))
        .collect::<Result<Vec<_>>>()?;

    // refuse before doing any work if some point cannot be simulated
    let limit = sim.qubit_limit::<f64>();
    let mut widest = (0, 0);
    for (i, p) in points.iter().enumerate() {
        let q = p.target.data_qubits().with_context(|| format!("grid point {i}"))?;
        if q > widest.1 {
            widest = (i, q);
        }
    }
    if widest.1 > limit {
        return Err(anyhow::Error::new(gausskit::Error::Capacity { needed: widest.1, limit }).context(format!(
            "grid point {} needs {} data qubits; narrow the grid to at most {limit} qubits \
             or raise GAUSSKIT_MEM_LIMIT_MB",
            widest.0, widest.1
        )));
    }

    let rows: Vec<Row> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| run_point(args, p, i, sim))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    match &args.out {
        Some(path) => write_csv(path, &rows),
        None => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            for r in &rows {
                w.serialize(r)?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_parsing() {
        let a: Axis = "delta:1e-8:1e-2:4:log".parse().unwrap();
        assert_eq!(a.param, Param::Delta);
        let v = a.values();
        assert_eq!(v.len(), 4);
        assert!((v[0] - 1e-8).abs() < 1e-20 && (v[3] - 1e-2).abs() < 1e-14);
        assert!((v[1] / v[0] - 100.0).abs() < 1e-9);
        assert!("delta:0:1:0".parse::<Axis>().is_err());
        assert!("delta:0:1:3:log".parse::<Axis>().is_err());
        assert!("gamma:0:1:3".parse::<Axis>().is_err());
        assert_eq!("n:4:6:3".parse::<Axis>().unwrap().values(), vec![4.0, 5.0, 6.0]);
    }

    #[test]
    fn grid_is_row_major() {
        let axes = ["alpha:0.5:0.6:2".parse().unwrap(), "n:3:5:3".parse().unwrap()];
        let g = grid(&axes);
        assert_eq!(g.len(), 6);
        assert_eq!(g[1], vec![(Param::Alpha, 0.5), (Param::N, 4.0)]);
        assert_eq!(g[3], vec![(Param::Alpha, 0.6), (Param::N, 3.0)]);
    }

    #[test]
    fn seeds_follow_grid_index() {
        assert_eq!(row_seed(10, 3, 0), 10 ^ 3);
        assert_ne!(row_seed(10, 3, 1), row_seed(10, 3, 0));
    }
}
