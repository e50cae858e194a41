//! Rotation gate vocabulary and exact matrices.
//!
//! Every rotation is parameterized by a real exponent `m` and the circuit's
//! exponential base `alpha`:
//!
//! * `A(m)` prepares `|0> + alpha^(2^m) |1>` (normalized) from `|0>`.
//! * `B(m)` carries `alpha^(2^m)` in its top-left entry; with the target on a
//!   fresh ancilla that is post-selected on `|0>`, it multiplies the
//!   controlled subspace by `alpha^(2^m)`.
//! * `Z(m)` is `diag(1, e^{i alpha 2^m})`.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{cone, creal, czero, Real, C};

pub type Matrix2<T> = [[C<T>; 2]; 2];
pub type Matrix4<T> = [[C<T>; 4]; 4];

/// Exponential base `alpha`, carried together with `ln(alpha)`.
///
/// For the windows used in practice `alpha` is extremely close to 1
/// (`1 - alpha ~ 1e-12` at 22 qubits), where `alpha` itself has lost most of
/// its significant digits. All powers `alpha^(2^m)` are therefore evaluated
/// as `exp(2^m ln(alpha))` from the stored logarithm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Base<T> {
    value: T,
    ln: T,
}

impl<T: Real> Base<T> {
    pub fn from_alpha(alpha: T) -> Self {
        Self { value: alpha, ln: alpha.ln() }
    }

    pub fn from_ln(ln: T) -> Self {
        Self { value: ln.exp(), ln }
    }

    pub fn alpha(&self) -> T {
        self.value
    }

    pub fn ln(&self) -> T {
        self.ln
    }

    /// `alpha^x` for real `x`.
    pub fn pow(&self, x: T) -> T {
        (x * self.ln).exp()
    }

    /// `alpha^(2^m)`.
    pub fn pow2(&self, m: T) -> T {
        self.pow(m.exp2())
    }

    /// `1 - alpha^x`, accurate when the result is tiny.
    pub fn one_minus_pow(&self, x: T) -> T {
        -(x * self.ln).exp_m1()
    }

    /// True when the base is usable for the real rotations `A` and `B`,
    /// i.e. `0 < alpha <= 1`.
    pub fn is_real_window(&self) -> bool {
        self.ln.is_finite() && self.ln <= T::zero()
    }

    /// True when `from_alpha(self.alpha())` reproduces this base exactly, so
    /// the plain decimal form of `alpha` is a lossless serialization.
    pub fn alpha_is_exact(&self) -> bool {
        let re = Self::from_alpha(self.value);
        re.value == self.value && re.ln == self.ln
    }
}

/// Control polarity: closed fires on `|1>`, open fires on `|0>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Polarity {
    Closed,
    Open,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Control {
    pub qubit: usize,
    pub polarity: Polarity,
}

impl Control {
    pub fn closed(qubit: usize) -> Self {
        Self { qubit, polarity: Polarity::Closed }
    }

    pub fn open(qubit: usize) -> Self {
        Self { qubit, polarity: Polarity::Open }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RotationKind<T> {
    A(T),
    B(T),
    Z(T),
    Hadamard,
    PauliX,
    /// Controlled NOT; its target operation is `X`.
    Cnot,
}

impl<T: Real> RotationKind<T> {
    pub fn exponent(&self) -> Option<T> {
        match *self {
            RotationKind::A(m) | RotationKind::B(m) | RotationKind::Z(m) => Some(m),
            _ => None,
        }
    }

    pub fn is_clifford(&self) -> bool {
        matches!(self, RotationKind::Hadamard | RotationKind::PauliX | RotationKind::Cnot)
    }

    /// The 2x2 operation applied to the target qubit (for `Cnot`, the `X`
    /// applied when the control fires).
    pub fn matrix(&self, base: &Base<T>) -> Result<Matrix2<T>> {
        gate_matrix(*self, base)
    }
}

/// One element of the gate vocabulary: a single-target operation with
/// optional controls.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate<T> {
    pub kind: RotationKind<T>,
    pub target: usize,
    pub controls: Vec<Control>,
    /// Per-gate synthesis budget, overriding the circuit-wide allocation.
    pub synthesis_error: Option<T>,
}

impl<T: Real> Gate<T> {
    pub fn new(kind: RotationKind<T>, target: usize) -> Self {
        Self { kind, target, controls: Vec::new(), synthesis_error: None }
    }

    pub fn controlled(kind: RotationKind<T>, target: usize, controls: Vec<Control>) -> Self {
        Self { kind, target, controls, synthesis_error: None }
    }

    pub fn a(m: T, target: usize) -> Self {
        Self::new(RotationKind::A(m), target)
    }

    pub fn z(m: T, target: usize) -> Self {
        Self::new(RotationKind::Z(m), target)
    }

    pub fn h(target: usize) -> Self {
        Self::new(RotationKind::Hadamard, target)
    }

    pub fn x(target: usize) -> Self {
        Self::new(RotationKind::PauliX, target)
    }

    pub fn cnot(control: Control, target: usize) -> Self {
        Self::controlled(RotationKind::Cnot, target, vec![control])
    }

    /// B(m) on `target`, closed-controlled on every qubit in `controls`.
    pub fn b(m: T, target: usize, controls: &[usize]) -> Self {
        Self::controlled(
            RotationKind::B(m),
            target,
            controls.iter().copied().map(Control::closed).collect(),
        )
    }

    pub fn with_synthesis_error(mut self, delta: T) -> Self {
        self.synthesis_error = Some(delta);
        self
    }

    pub fn is_b(&self) -> bool {
        matches!(self.kind, RotationKind::B(_))
    }

    /// Every qubit the gate touches, target first.
    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.target).chain(self.controls.iter().map(|c| c.qubit))
    }

    /// `(mask, value)` such that the controls fire on basis index `i` iff
    /// `i & mask == value`.
    pub fn control_mask(&self) -> (usize, usize) {
        self.controls.iter().fold((0, 0), |(mask, value), c| {
            let bit = 1usize << c.qubit;
            match c.polarity {
                Polarity::Closed => (mask | bit, value | bit),
                Polarity::Open => (mask | bit, value),
            }
        })
    }
}

/// Exact 2x2 target operation for `kind` at base `base`.
pub fn gate_matrix<T: Real>(kind: RotationKind<T>, base: &Base<T>) -> Result<Matrix2<T>> {
    if let Some(m) = kind.exponent() {
        if !m.is_finite() {
            return Err(Error::domain(format!("rotation exponent {m} is not usable")));
        }
    }
    let zero = czero();
    let one = cone();
    Ok(match kind {
        RotationKind::A(m) => {
            if !base.is_real_window() {
                return Err(Error::domain("A rotation requires 0 < alpha <= 1"));
            }
            let a = base.pow2(m);
            let norm = (T::one() + a * a).sqrt().recip();
            [[creal(norm), creal(-a * norm)], [creal(a * norm), creal(norm)]]
        }
        RotationKind::B(m) => {
            if !base.is_real_window() {
                return Err(Error::domain("B rotation requires 0 < alpha <= 1"));
            }
            let b = base.pow2(m);
            // 1 - alpha^(2^(m+1)) without cancellation near alpha = 1
            let s = base.one_minus_pow((m + T::one()).exp2()).max(T::zero()).sqrt();
            [[creal(b), creal(-s)], [creal(s), creal(b)]]
        }
        RotationKind::Z(m) => {
            let phase = base.alpha() * m.exp2();
            if !phase.is_finite() {
                return Err(Error::domain(format!("Z phase alpha*2^{m} is not finite")));
            }
            [[one, zero], [zero, C::from_polar(T::one(), phase)]]
        }
        RotationKind::Hadamard => {
            let h = creal(T::FRAC_1_SQRT_2());
            [[h, h], [h, -h]]
        }
        RotationKind::PauliX | RotationKind::Cnot => [[zero, one], [one, zero]],
    })
}

/// 4x4 singly-controlled form of `kind`, in the basis `|target, control>`
/// with the target as the high bit (so the controlled block lives on
/// indices 1 and 3).
pub fn controlled_matrix<T: Real>(kind: RotationKind<T>, base: &Base<T>) -> Result<Matrix4<T>> {
    let u = gate_matrix(kind, base)?;
    let mut out = [[czero(); 4]; 4];
    out[0][0] = cone();
    out[2][2] = cone();
    out[1][1] = u[0][0];
    out[1][3] = u[0][1];
    out[3][1] = u[1][0];
    out[3][3] = u[1][1];
    Ok(out)
}

pub fn matmul2<T: Real>(a: &Matrix2<T>, b: &Matrix2<T>) -> Matrix2<T> {
    let mut out = [[czero(); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Spectral norm of a 2x2 complex matrix.
pub fn op_norm2<T: Real>(m: &Matrix2<T>) -> T {
    // Largest eigenvalue of the Hermitian m^H m.
    let col = |j: usize| (m[0][j], m[1][j]);
    let (a0, a1) = col(0);
    let (b0, b1) = col(1);
    let p = a0.norm_sqr() + a1.norm_sqr();
    let q = b0.norm_sqr() + b1.norm_sqr();
    let r = a0.conj() * b0 + a1.conj() * b1;
    let half_trace = (p + q) / T::lit(2.0);
    let disc = (((p - q) / T::lit(2.0)).powi(2) + r.norm_sqr()).sqrt();
    (half_trace + disc).max(T::zero()).sqrt()
}

pub fn sub2<T: Real>(a: &Matrix2<T>, b: &Matrix2<T>) -> Matrix2<T> {
    [[a[0][0] - b[0][0], a[0][1] - b[0][1]], [a[1][0] - b[1][0], a[1][1] - b[1][1]]]
}

/// The Clifford `XH` (`H` followed by `X`), the `alpha -> 1` limit of `A(m)`.
pub fn xh_matrix<T: Real>() -> Matrix2<T> {
    let h = creal(T::FRAC_1_SQRT_2());
    [[h, -h], [h, h]]
}

impl<T: Real> fmt::Display for RotationKind<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RotationKind::A(m) => write!(f, "A({m})"),
            RotationKind::B(m) => write!(f, "B({m})"),
            RotationKind::Z(m) => write!(f, "Z({m})"),
            RotationKind::Hadamard => f.write_str("H"),
            RotationKind::PauliX => f.write_str("X"),
            RotationKind::Cnot => f.write_str("CNOT"),
        }
    }
}
