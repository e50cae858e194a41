//! Flags describing what to prepare, and how they map onto the library.

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};

use gausskit::spec::alpha_for_bottom_rotation_error;
use gausskit::{
    build_exponential, build_full_gaussian, build_gaussian_2d, build_half_gaussian, build_layered_gaussian,
    build_poly_phase, ideal_phase_state, qubit_threshold_base, Base64, Circuit64, GaussianSpec64, Mode,
    QuadraticForm, StateVector64,
};

use crate::UsageError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Phase,
    Exponential,
    HalfGaussian,
    Gaussian,
    Gaussian2d,
}

#[derive(Args, Clone, Debug, Default)]
pub struct TargetArgs {
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    /// Data qubits; `nx,ny` for gaussian2d. Gaussians default to the
    /// qubit threshold of `--alpha` and `--delta`.
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Fixed-window Gaussian parameter (gaussian family only).
    #[arg(long)]
    pub beta: Option<f64>,
    /// Per-rotation synthesis error. Omitted means exact gates.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Phase polynomial degree.
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[arg(long)]
    pub layered: bool,
    /// Quadratic form `xx,xy,yy` for gaussian2d.
    #[arg(long)]
    pub q: Option<String>,
    /// Derive alpha from `--delta` so that `||A(1) - XH|| = delta`.
    #[arg(long)]
    pub couple_alpha: bool,
}

/// Nominal synthesis error for specs simulated with exact gates; it only
/// feeds the validity checks of the spec.
pub const NOMINAL_DELTA: f64 = 1e-10;

pub enum Target {
    /// No post-selection: phase and exponential states.
    Unitary { circuit: Circuit64, ideal: StateVector64 },
    Gaussian(GaussianSpec64),
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn parse_list<const N: usize>(flag: &str, text: &str) -> Result<[u64; N]> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(usage(format!("--{flag} expects {N} comma-separated integers, got {text:?}")));
    }
    let mut out = [0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| usage(format!("--{flag}: {p:?} is not a non-negative integer")))?;
    }
    Ok(out)
}

impl TargetArgs {
    pub fn family(&self) -> Result<Family> {
        self.family.ok_or_else(|| usage("--family is required"))
    }

    fn base(&self) -> Result<Base64> {
        if self.couple_alpha {
            let delta = self.delta.ok_or_else(|| usage("--couple-alpha needs --delta"))?;
            return Ok(alpha_for_bottom_rotation_error(delta)?);
        }
        let alpha = self.alpha.ok_or_else(|| usage("--alpha is required for this family"))?;
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(usage(format!("--alpha must be positive, got {alpha}")));
        }
        Ok(Base64::from_alpha(alpha))
    }

    fn single_n(&self) -> Result<Option<usize>> {
        self.n.as_deref().map(|t| Ok(parse_list::<1>("n", t)?[0] as usize)).transpose()
    }

    fn required_n(&self) -> Result<usize> {
        self.single_n()?.ok_or_else(|| usage("--n is required for this family"))
    }

    fn gate_error(&self) -> f64 {
        self.delta.unwrap_or(NOMINAL_DELTA)
    }

    fn check_no_beta(&self) -> Result<()> {
        if self.beta.is_some() {
            return Err(usage("--beta applies to the gaussian family only"));
        }
        Ok(())
    }

    fn gaussian_n(&self, base: &Base64) -> Result<usize> {
        match self.single_n()? {
            Some(n) => Ok(n),
            None => {
                let delta = self.delta.ok_or_else(|| usage("--n or --delta is required"))?;
                Ok(qubit_threshold_base(base, delta)?.qubits().max(2))
            }
        }
    }

    pub fn target(&self) -> Result<Target> {
        let family = self.family()?;
        if family != Family::Gaussian {
            self.check_no_beta()?;
        }
        match family {
            Family::Phase => {
                let n = self.required_n()?;
                let base = self.base()?;
                let circuit = build_poly_phase(n, base, self.d)?;
                let ideal = ideal_phase_state(n, base.alpha(), self.d)?;
                Ok(Target::Unitary { circuit, ideal })
            }
            Family::Exponential => {
                let n = self.required_n()?;
                let base = self.base()?;
                let circuit = build_exponential(n, base)?;
                let ideal = gausskit::simulator::ideal_exponential_state(n, &base)?;
                Ok(Target::Unitary { circuit, ideal })
            }
            Family::HalfGaussian => {
                let base = self.base()?;
                let n = self.gaussian_n(&base)?;
                Ok(Target::Gaussian(GaussianSpec64::from_base(base, n, self.gate_error(), Mode::HalfGaussian)?))
            }
            Family::Gaussian => {
                if let Some(beta) = self.beta {
                    if self.alpha.is_some() || self.couple_alpha {
                        return Err(usage("give either --beta or --alpha, not both"));
                    }
                    let n = self.required_n()?;
                    return Ok(Target::Gaussian(GaussianSpec64::with_beta(beta, n, self.gate_error())?));
                }
                let base = self.base()?;
                let n = self.gaussian_n(&base)?;
                Ok(Target::Gaussian(GaussianSpec64::from_base(base, n, self.gate_error(), Mode::FullGaussian)?))
            }
            Family::Gaussian2d => {
                let [nx, ny] = parse_list::<2>("n", self.n.as_deref().ok_or_else(|| usage("--n nx,ny is required"))?)?;
                let [xx, xy, yy] =
                    parse_list::<3>("q", self.q.as_deref().ok_or_else(|| usage("--q xx,xy,yy is required"))?)?;
                let form = QuadraticForm::new(xx, xy, yy)?;
                let base = self.base()?;
                Ok(Target::Gaussian(GaussianSpec64::two_dim(
                    base.alpha(),
                    nx as usize,
                    ny as usize,
                    form,
                    self.gate_error(),
                )?))
            }
        }
    }

    /// The circuit `generate` writes.
    pub fn circuit(&self) -> Result<Circuit64> {
        match self.target()? {
            Target::Unitary { circuit, .. } => Ok(circuit),
            Target::Gaussian(spec) => {
                let n = spec.n_qubits();
                let base = *spec.base();
                Ok(match spec.mode() {
                    Mode::FullGaussian if self.layered => build_layered_gaussian(&spec)?.to_circuit(),
                    Mode::FullGaussian => build_full_gaussian(n, base)?,
                    Mode::HalfGaussian => build_half_gaussian(n, base)?,
                    Mode::TwoDim => {
                        let l = spec.layout().context("2-D spec without layout")?;
                        build_gaussian_2d(l.x_qubits, l.y_qubits, l.form, base)?
                    }
                })
            }
        }
    }

    /// Total data qubits, without building anything large.
    pub fn data_qubits(&self) -> Result<usize> {
        match self.target()? {
            Target::Unitary { circuit, .. } => Ok(circuit.data_qubits()),
            Target::Gaussian(spec) => Ok(spec.n_qubits()),
        }
    }
}

pub fn check_family_supports_estimates(family: Family) -> Result<()> {
    if matches!(family, Family::Phase | Family::Exponential) {
        bail!(UsageError(
            "sweeps estimate post-selected Gaussian families only (half-gaussian, gaussian, gaussian2d)".into()
        ));
    }
    Ok(())
}
