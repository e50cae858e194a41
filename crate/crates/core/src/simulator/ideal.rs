use super::state::StateVector;
use crate::error::{Error, Result};
use crate::gate::Base;
use crate::scalar::{czero, Real, C};
use crate::spec::{GaussianSpec, Mode, QuadraticForm};

/// How the closed-form Gaussian target is normalized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum IdealKind {
    /// Normalized over the `2^n` register points.
    #[default]
    Finite,
    /// Normalized over all integers, then restricted to the register; the
    /// result has norm below 1 and the missing tail counts as error.
    InfiniteTail,
}

const MAX_IDEAL_QUBITS: usize = 32;

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_IDEAL_QUBITS {
        return Err(Error::domain(format!("ideal states need 1..={MAX_IDEAL_QUBITS} qubits, got {n}")));
    }
    Ok(())
}

/// `sum_{x in Z} exp(-a (x - c)^2)`.
///
/// Summed directly for sharp windows; for wide ones (`a < 1`) the Poisson
/// dual `sqrt(pi/a) sum_k exp(-pi^2 k^2 / a) cos(2 pi k c)` converges in a
/// handful of terms.
pub fn gaussian_normalizer<T: Real>(a: T, c: T) -> T {
    let pi = T::PI();
    let tiny = T::lit(1e-40);
    if a < T::one() {
        let mut sum = T::one();
        for k in 1..64 {
            let kf = T::from_usize_lossy(k);
            let w = (-pi * pi * kf * kf / a).exp();
            if w < tiny {
                break;
            }
            sum += T::lit(2.0) * w * (T::lit(2.0) * pi * kf * c).cos();
        }
        (pi / a).sqrt() * sum
    } else {
        let centre = c.round();
        let reach = (T::lit(100.0) / a).sqrt().ceil() + T::one();
        let r = reach.to_i64().unwrap_or(16);
        let mut sum = T::zero();
        for i in -r..=r {
            let d = centre + T::from_i64(i).expect("small") - c;
            sum += (-a * d * d).exp();
        }
        sum
    }
}

fn rescale<T: Real>(s: StateVector<T>, norm: T) -> StateVector<T> {
    let amps: Vec<C<T>> = s.into_amplitudes().into_iter().map(|a| a.scale(norm)).collect();
    StateVector::from_amplitudes(amps).expect("power of two")
}

/// `alpha^((x - (N-1)/2)^2)` over the `n`-qubit register.
pub fn ideal_gaussian<T: Real>(n: usize, base: &Base<T>, kind: IdealKind) -> Result<StateVector<T>> {
    check_n(n)?;
    let c = (T::lit(2.0).powi(n as i32) - T::one()) / T::lit(2.0);
    let ln = base.ln();
    let f = |x: usize| {
        let d = T::from_usize_lossy(x) - c;
        (ln * d * d).exp()
    };
    let s = StateVector::from_real_fn(n, f)?;
    finish_gaussian(s, n, ln, c, kind, f)
}

fn finish_gaussian<T: Real>(
    s: StateVector<T>,
    n: usize,
    ln: T,
    c: T,
    kind: IdealKind,
    f: impl Fn(usize) -> T + Sync,
) -> Result<StateVector<T>> {
    match kind {
        IdealKind::Finite => Ok(s),
        IdealKind::InfiniteTail => {
            let z = gaussian_normalizer(T::lit(-2.0) * ln, c);
            let raw = StateVector::from_amplitudes(
                (0..1usize << n).map(|x| C::new(f(x), T::zero())).collect(),
            )?;
            Ok(rescale(raw, z.sqrt().recip()))
        }
    }
}

/// `beta^((x/(N-1) - 1/2)^2)`, the fixed-window parameterization.
pub fn ideal_gaussian_beta<T: Real>(n: usize, beta: T, kind: IdealKind) -> Result<StateVector<T>> {
    check_n(n)?;
    let span = T::lit(2.0).powi(n as i32) - T::one();
    let ln_beta = beta.ln();
    let f = |x: usize| {
        let u = T::from_usize_lossy(x) / span - T::lit(0.5);
        (ln_beta * u * u).exp()
    };
    let s = StateVector::from_real_fn(n, f)?;
    let ln = ln_beta / (span * span);
    finish_gaussian(s, n, ln, span / T::lit(2.0), kind, f)
}

/// `alpha^(x^2)` for `x >= 0`.
pub fn ideal_half_gaussian<T: Real>(n: usize, base: &Base<T>, kind: IdealKind) -> Result<StateVector<T>> {
    check_n(n)?;
    let ln = base.ln();
    let f = |x: usize| {
        let xf = T::from_usize_lossy(x);
        (ln * xf * xf).exp()
    };
    let s = StateVector::from_real_fn(n, f)?;
    match kind {
        IdealKind::Finite => Ok(s),
        IdealKind::InfiniteTail => {
            // the half-line sum is (sum over Z + 1) / 2 by symmetry about 0
            let z = (gaussian_normalizer(T::lit(-2.0) * ln, T::zero()) + T::one()) / T::lit(2.0);
            let raw =
                StateVector::from_amplitudes((0..1usize << n).map(|x| C::new(f(x), T::zero())).collect())?;
            Ok(rescale(raw, z.sqrt().recip()))
        }
    }
}

/// `alpha^(Q(x, y))` at index `x * 2^n_y + y`.
pub fn ideal_gaussian_2d<T: Real>(
    n_x: usize,
    n_y: usize,
    form: &QuadraticForm,
    base: &Base<T>,
) -> Result<StateVector<T>> {
    check_n(n_x + n_y)?;
    let ymask = (1usize << n_y) - 1;
    StateVector::from_real_fn(n_x + n_y, |i| {
        let q = form.eval((i >> n_y) as u64, (i & ymask) as u64);
        base.pow(T::from_u128(q).expect("representable"))
    })
}

/// `alpha^x`.
pub fn ideal_exponential_state<T: Real>(n: usize, base: &Base<T>) -> Result<StateVector<T>> {
    check_n(n)?;
    StateVector::from_real_fn(n, |x| base.pow(T::from_usize_lossy(x)))
}

/// `(1/sqrt N) e^{i alpha x^d}`.
pub fn ideal_phase_state<T: Real>(n: usize, alpha: T, d: usize) -> Result<StateVector<T>> {
    check_n(n)?;
    if d == 0 {
        return Err(Error::UnsupportedDegree(d));
    }
    let amp = T::lit(2.0).powi(n as i32).sqrt().recip();
    let amps = (0..1usize << n)
        .map(|x| {
            let xd = T::from_u128((x as u128).pow(d as u32)).expect("representable");
            C::from_polar(amp, alpha * xd)
        })
        .collect();
    StateVector::from_amplitudes(amps)
}

/// Closed-form target for `spec`.
pub fn ideal_state<T: Real>(spec: &GaussianSpec<T>, kind: IdealKind) -> Result<StateVector<T>> {
    match spec.mode() {
        Mode::FullGaussian => match spec.beta() {
            Some(beta) => ideal_gaussian_beta(spec.n_qubits(), beta, kind),
            None => ideal_gaussian(spec.n_qubits(), spec.base(), kind),
        },
        Mode::HalfGaussian => ideal_half_gaussian(spec.n_qubits(), spec.base(), kind),
        Mode::TwoDim => {
            let l = spec.layout().expect("2-D spec carries its layout");
            if kind == IdealKind::InfiniteTail {
                return Err(Error::Unsupported("infinite-tail targets are one-dimensional".into()));
            }
            ideal_gaussian_2d(l.x_qubits, l.y_qubits, &l.form, spec.base())
        }
    }
}

/// `min_theta || a - e^{i theta} b ||`.
pub fn l2_error<T: Real>(a: &StateVector<T>, b: &StateVector<T>) -> Result<T> {
    let (a, b) = (a.amplitudes(), b.amplitudes());
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(a.len(), b.len()));
    }
    let overlap: C<T> = a.iter().zip(b).map(|(x, y)| x.conj() * y).fold(czero(), |s, v| s + v);
    let r = overlap.norm();
    let phase = if r > T::zero() { overlap.conj().unscale(r) } else { C::new(T::one(), T::zero()) };
    let sum: T = a.iter().zip(b).map(|(x, y)| (x - y * phase).norm_sqr()).sum();
    Ok(sum.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(v: &[(f64, f64)]) -> StateVector<f64> {
        StateVector::from_amplitudes(v.iter().map(|&(r, i)| C::new(r, i)).collect()).unwrap()
    }

    #[test]
    fn one_qubit_gaussian_is_uniform() {
        let s = ideal_gaussian(1, &Base::from_alpha(0.3f64), IdealKind::Finite).unwrap();
        let h = 0.5f64.sqrt();
        assert!(s.amplitudes().iter().all(|a| (a.re - h).abs() < 1e-15));
    }

    #[test]
    fn three_qubit_gaussian() {
        let s = ideal_gaussian(3, &Base::from_alpha(0.5f64), IdealKind::Finite).unwrap();
        let raw: Vec<f64> =
            [12.25, 6.25, 2.25, 0.25, 0.25, 2.25, 6.25, 12.25].iter().map(|e| 0.5f64.powf(*e)).collect();
        let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (a, r) in s.amplitudes().iter().zip(&raw) {
            assert!((a.re - r / norm).abs() < 1e-15);
        }
    }

    #[test]
    fn beta_form_matches_alpha_form() {
        let spec = GaussianSpec::with_beta(1.3e-14, 8, 1e-6).unwrap();
        let a = ideal_state(&spec, IdealKind::Finite).unwrap();
        let b = ideal_gaussian(8, spec.base(), IdealKind::Finite).unwrap();
        assert!(l2_error(&a, &b).unwrap() < 1e-12);
    }

    #[test]
    fn normalizer_regimes_agree() {
        // brute force over a wide integer range
        for (a, c) in [(0.3f64, 0.5), (0.9, 0.25), (1.1, 3.5), (5.0, 0.1)] {
            let brute: f64 = (-400..=400).map(|x| (-a * (x as f64 - c).powi(2)).exp()).sum();
            assert!(((gaussian_normalizer(a, c) - brute) / brute).abs() < 1e-13, "a={a} c={c}");
        }
    }

    #[test]
    fn infinite_tail_has_missing_mass() {
        let base = Base::from_alpha(0.999f64);
        let s = ideal_gaussian(3, &base, IdealKind::InfiniteTail).unwrap();
        assert!(s.norm_sqr() < 1.0);
        let wide = ideal_gaussian(3, &Base::from_alpha(1e-3f64), IdealKind::InfiniteTail).unwrap();
        assert!((wide.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn l2_examples() {
        let a = state(&[(1.0, 0.0), (0.0, 0.0)]);
        assert_eq!(l2_error(&a, &a).unwrap(), 0.0);
        let b = state(&[(0.0, 0.0), (1.0, 0.0)]);
        assert!((l2_error(&a, &b).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let c = state(&[((1.0f64 - 1e-4).sqrt(), 0.0), (1e-2, 0.0)]);
        let d = l2_error(&a, &c).unwrap();
        let direct = ((1.0 - (1.0f64 - 1e-4).sqrt()).powi(2) + 1e-4).sqrt();
        assert!((d - direct).abs() < 1e-15);
        // global phase is ignored
        let e = state(&[(0.0, 1.0), (0.0, 0.0)]);
        assert!(l2_error(&a, &e).unwrap() < 1e-15);
        assert_eq!(l2_error(&a, &state(&[(1.0, 0.0); 4])), Err(Error::DimensionMismatch(2, 4)));
    }

    #[test]
    fn phase_state() {
        let s = ideal_phase_state(3, std::f64::consts::FRAC_PI_4, 1).unwrap();
        for (x, a) in s.amplitudes().iter().enumerate() {
            let e = C::from_polar(1.0 / 8f64.sqrt(), std::f64::consts::FRAC_PI_4 * x as f64);
            assert!((a - e).norm() < 1e-15);
        }
    }
}
