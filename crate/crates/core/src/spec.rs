//! Target-distribution parameters.

use crate::error::{Error, Result};
use crate::gate::Base;
use crate::optimizer::qubit_threshold;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// `sum_x alpha^(x^2) |x>` over `x >= 0`.
    HalfGaussian,
    /// `sum_x alpha^((x - (N-1)/2)^2) |x>`, symmetric about the register midpoint.
    FullGaussian,
    /// `sum_{x,y} alpha^(Q(x,y)) |x>|y>`.
    TwoDim,
}

/// Non-negative integer quadratic form `xx*x^2 + xy*x*y + yy*y^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadraticForm {
    pub xx: u64,
    pub xy: u64,
    pub yy: u64,
}

impl QuadraticForm {
    pub fn new(xx: u64, xy: u64, yy: u64) -> Result<Self> {
        if xx == 0 || yy == 0 {
            return Err(Error::domain("quadratic form needs a positive diagonal"));
        }
        Ok(Self { xx, xy, yy })
    }

    /// From a symmetric matrix `Q`, as the form `x^T Q x`.
    pub fn from_matrix(q: [[i64; 2]; 2]) -> Result<Self> {
        if q[0][1] != q[1][0] {
            return Err(Error::domain("covariance matrix must be symmetric"));
        }
        if q[0][0] <= 0 || q[1][1] <= 0 {
            return Err(Error::domain("quadratic form needs a positive diagonal"));
        }
        if q[0][1] < 0 {
            return Err(Error::Unsupported(
                "negative cross terms give factors above 1, which B rotations cannot encode".into(),
            ));
        }
        Self::new(q[0][0] as u64, 2 * q[0][1] as u64, q[1][1] as u64)
    }

    pub fn eval(&self, x: u64, y: u64) -> u128 {
        let (x, y) = (x as u128, y as u128);
        self.xx as u128 * x * x + self.xy as u128 * x * y + self.yy as u128 * y * y
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TwoDimLayout {
    pub x_qubits: usize,
    pub y_qubits: usize,
    pub form: QuadraticForm,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianSpec<T> {
    base: Base<T>,
    n_qubits: usize,
    gate_error: T,
    mode: Mode,
    beta: Option<T>,
    two_dim: Option<TwoDimLayout>,
}

fn check_delta<T: Real>(delta: T) -> Result<()> {
    if delta > T::zero() && delta < T::one() {
        Ok(())
    } else {
        Err(Error::domain(format!("gate error must lie in (0, 1), got {delta}")))
    }
}

impl<T: Real> GaussianSpec<T> {
    pub fn new(alpha: T, n_qubits: usize, gate_error: T, mode: Mode) -> Result<Self> {
        if !(alpha > T::zero() && alpha < T::one()) {
            return Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        Self::from_base(Base::from_alpha(alpha), n_qubits, gate_error, mode)
    }

    pub fn from_base(base: Base<T>, n_qubits: usize, gate_error: T, mode: Mode) -> Result<Self> {
        if !(base.ln() < T::zero() && base.ln().is_finite()) {
            return Err(Error::domain("alpha must lie in (0, 1)"));
        }
        check_delta(gate_error)?;
        if n_qubits < 2 {
            return Err(Error::domain("need at least 2 data qubits"));
        }
        if mode == Mode::TwoDim {
            return Err(Error::domain("use GaussianSpec::two_dim for 2-D targets"));
        }
        Ok(Self { base, n_qubits, gate_error, mode, beta: None, two_dim: None })
    }

    /// Fixed-window full Gaussian `beta^((x/(N-1) - 1/2)^2)`, which is the
    /// full Gaussian with `alpha = beta^(1/(N-1)^2)`.
    pub fn with_beta(beta: T, n_qubits: usize, gate_error: T) -> Result<Self> {
        if !(beta > T::zero() && beta < T::one()) {
            return Err(Error::domain(format!("beta must lie in (0, 1), got {beta}")));
        }
        if !(2..=62).contains(&n_qubits) {
            return Err(Error::domain("beta windows need 2..=62 qubits"));
        }
        let span = T::from_u64((1u64 << n_qubits) - 1).expect("representable").powi(2);
        let base = Base::from_ln(beta.ln() / span);
        let back = base.pow(span);
        if ((back - beta) / beta).abs() > T::lit(1e-12).max(T::epsilon() * T::lit(64.0)) {
            return Err(Error::domain("beta does not round-trip through alpha"));
        }
        let mut spec = Self::from_base(base, n_qubits, gate_error, Mode::FullGaussian)?;
        spec.beta = Some(beta);
        Ok(spec)
    }

    /// Full Gaussian truncated to the qubits whose uncontrolled rotations
    /// are still more than `gate_error` away from identity.
    pub fn truncated(alpha: T, gate_error: T) -> Result<Self> {
        let n = qubit_threshold(alpha, gate_error)?.direct;
        Self::new(alpha, n, gate_error, Mode::FullGaussian)
    }

    pub fn two_dim(
        alpha: T,
        x_qubits: usize,
        y_qubits: usize,
        form: QuadraticForm,
        gate_error: T,
    ) -> Result<Self> {
        if !(alpha > T::zero() && alpha < T::one()) {
            return Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        check_delta(gate_error)?;
        if x_qubits == 0 || y_qubits == 0 {
            return Err(Error::domain("both registers need at least one qubit"));
        }
        Ok(Self {
            base: Base::from_alpha(alpha),
            n_qubits: x_qubits + y_qubits,
            gate_error,
            mode: Mode::TwoDim,
            beta: None,
            two_dim: Some(TwoDimLayout { x_qubits, y_qubits, form }),
        })
    }

    pub fn alpha(&self) -> T {
        self.base.alpha()
    }

    pub fn base(&self) -> &Base<T> {
        &self.base
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gate_error(&self) -> T {
        self.gate_error
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn beta(&self) -> Option<T> {
        self.beta
    }

    pub fn layout(&self) -> Option<&TwoDimLayout> {
        self.two_dim.as_ref()
    }

    pub fn with_gate_error(&self, gate_error: T) -> Result<Self> {
        check_delta(gate_error)?;
        Ok(Self { gate_error, ..self.clone() })
    }

    /// The value reported in the `alpha_or_beta` CSV column.
    pub fn alpha_or_beta(&self) -> T {
        self.beta.unwrap_or(self.base.alpha())
    }
}

/// `beta` whose window spans `k` standard deviations on each side of the
/// centre of the probability distribution.
pub fn beta_for_std_devs<T: Real>(k: T) -> T {
    (-k * k).exp()
}

/// Inverse of [`beta_for_std_devs`].
pub fn std_devs_for_beta<T: Real>(beta: T) -> T {
    (-beta.ln()).sqrt()
}

/// Base for which `||A(1) - XH|| = delta` in operator norm, so that the
/// bottom rotation sits exactly at the synthesis threshold.
pub fn alpha_for_bottom_rotation_error<T: Real>(delta: T) -> Result<Base<T>> {
    if !(delta > T::zero() && delta < T::lit(2.0).sqrt()) {
        return Err(Error::domain("delta out of range for the A(1) coupling"));
    }
    // A(1) = Ry(2 atan(alpha^2)), XH = Ry(pi/2); the distance is
    // 2 sin((pi/2 - 2 atan(alpha^2)) / 4), so alpha^2 = tan(pi/4 - 2 asin(delta/2)).
    let t = (T::lit(2.0) * (delta / T::lit(2.0)).asin()).tan();
    let ln_a = (-t).ln_1p() - t.ln_1p();
    Ok(Base::from_ln(ln_a / T::lit(2.0)))
}
