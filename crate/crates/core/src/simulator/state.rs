use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gate::Matrix2;
use crate::scalar::{czero, Real, C};

/// Below this many amplitudes kernels stay on the calling thread.
const PAR_THRESHOLD: usize = 1 << 14;
/// Fixed reduction grain so sums do not depend on the thread count.
const SUM_CHUNK: usize = 1 << 12;

/// Amplitudes over `n_qubits` qubits, index bit `j` being qubit `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T> {
    n_qubits: usize,
    amplitudes: Vec<C<T>>,
    cumulative_success: T,
}

impl<T: Real> StateVector<T> {
    /// `|0...0>`.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amplitudes = vec![czero(); 1 << n_qubits];
        amplitudes[0] = C::new(T::one(), T::zero());
        Self { n_qubits, amplitudes, cumulative_success: T::one() }
    }

    /// Wraps raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amplitudes: Vec<C<T>>) -> Result<Self> {
        if !amplitudes.len().is_power_of_two() {
            return Err(Error::domain(format!("{} amplitudes is not a power of two", amplitudes.len())));
        }
        let n_qubits = amplitudes.len().trailing_zeros() as usize;
        Ok(Self { n_qubits, amplitudes, cumulative_success: T::one() })
    }

    /// Real amplitudes `f(x)` normalized to unit length.
    pub fn from_real_fn(n_qubits: usize, f: impl Fn(usize) -> T + Sync) -> Result<Self> {
        let amps: Vec<C<T>> = (0..1usize << n_qubits).into_par_iter().map(|x| C::new(f(x), T::zero())).collect();
        let mut s = Self::from_amplitudes(amps)?;
        if s.normalize() == T::zero() {
            return Err(Error::domain("target state has zero norm"));
        }
        Ok(s)
    }

    pub(crate) fn with_success(mut self, cumulative_success: T) -> Self {
        self.cumulative_success = cumulative_success;
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C<T>> {
        self.amplitudes
    }

    /// Product of all post-selection probabilities so far.
    pub fn cumulative_success(&self) -> T {
        self.cumulative_success
    }

    /// `gamma = sqrt(cumulative_success)`.
    pub fn subnormalization(&self) -> T {
        self.cumulative_success.sqrt()
    }

    pub fn norm_sqr(&self) -> T {
        norm_sqr(&self.amplitudes)
    }

    /// Rescales to unit norm and returns the previous squared norm. A
    /// zero vector is left untouched.
    pub fn normalize(&mut self) -> T {
        let n = self.norm_sqr();
        if n > T::zero() {
            scale_all(&mut self.amplitudes, n.sqrt().recip());
        }
        n
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

pub(crate) fn norm_sqr<T: Real>(amps: &[C<T>]) -> T {
    if amps.len() < PAR_THRESHOLD {
        return amps.iter().map(|a| a.norm_sqr()).sum();
    }
    let partial: Vec<T> = amps.par_chunks(SUM_CHUNK).map(|c| c.iter().map(|a| a.norm_sqr()).sum()).collect();
    partial.into_iter().sum()
}

pub(crate) fn scale_all<T: Real>(amps: &mut [C<T>], s: T) {
    if amps.len() < PAR_THRESHOLD {
        amps.iter_mut().for_each(|a| *a = a.scale(s));
    } else {
        amps.par_iter_mut().for_each(|a| *a = a.scale(s));
    }
}

/// Multiplies every amplitude whose index satisfies `i & mask == value`.
pub(crate) fn scale_where<T: Real>(amps: &mut [C<T>], mask: usize, value: usize, factor: C<T>) {
    let kernel = |offset: usize, chunk: &mut [C<T>]| {
        for (o, a) in chunk.iter_mut().enumerate() {
            if (offset + o) & mask == value {
                *a *= factor;
            }
        }
    };
    if amps.len() < PAR_THRESHOLD {
        kernel(0, amps);
    } else {
        amps.par_chunks_mut(SUM_CHUNK).enumerate().for_each(|(c, chunk)| kernel(c * SUM_CHUNK, chunk));
    }
}

/// Applies `u` to qubit `target` on every index pair whose controls fire.
/// `mask` must not include the target bit.
pub(crate) fn apply_single<T: Real>(
    amps: &mut [C<T>],
    target: usize,
    mask: usize,
    value: usize,
    u: &Matrix2<T>,
) {
    debug_assert_eq!(mask >> target & 1, 0);
    let half = 1usize << target;
    let block = half << 1;
    let kernel = |offset: usize, lo: &mut [C<T>], hi: &mut [C<T>]| {
        for (o, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
            if (offset + o) & mask != value {
                continue;
            }
            let (x, y) = (*a, *b);
            *a = u[0][0] * x + u[0][1] * y;
            *b = u[1][0] * x + u[1][1] * y;
        }
    };
    let n = amps.len();
    if n < PAR_THRESHOLD {
        for (c, chunk) in amps.chunks_mut(block).enumerate() {
            let (lo, hi) = chunk.split_at_mut(half);
            kernel(c * block, lo, hi);
        }
    } else if n / block >= 64 {
        amps.par_chunks_mut(block).enumerate().for_each(|(c, chunk)| {
            let (lo, hi) = chunk.split_at_mut(half);
            kernel(c * block, lo, hi);
        });
    } else {
        let grain = SUM_CHUNK.min(half);
        for (c, chunk) in amps.chunks_mut(block).enumerate() {
            let (lo, hi) = chunk.split_at_mut(half);
            lo.par_chunks_mut(grain)
                .zip(hi.par_chunks_mut(grain))
                .enumerate()
                .for_each(|(s, (l, h))| kernel(c * block + s * grain, l, h));
        }
    }
}

/// Keeps the half of `amps` with bit `bit` clear, removing that bit from
/// the index.
pub(crate) fn drop_zero_bit<T: Real>(amps: &[C<T>], bit: usize) -> Vec<C<T>> {
    let low = (1usize << bit) - 1;
    let src = |j: usize| ((j >> bit) << (bit + 1)) | (j & low);
    let len = amps.len() / 2;
    if amps.len() < PAR_THRESHOLD {
        (0..len).map(|j| amps[src(j)]).collect()
    } else {
        (0..len).into_par_iter().map(|j| amps[src(j)]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::{gate_matrix, Base, RotationKind};

    #[test]
    fn zero_state_is_normalized() {
        let s = StateVector::<f64>::zero(3);
        assert_eq!(s.norm_sqr(), 1.0);
        assert_eq!(s.subnormalization(), 1.0);
    }

    #[test]
    fn hadamard_on_each_qubit_gives_uniform() {
        let h = gate_matrix(RotationKind::Hadamard, &Base::from_alpha(0.5)).unwrap();
        for n in [3usize, 15] {
            let mut amps = StateVector::<f64>::zero(n).into_amplitudes();
            for q in 0..n {
                apply_single(&mut amps, q, 0, 0, &h);
            }
            let expect = (1.0 / (1u64 << n) as f64).sqrt();
            assert!(amps.iter().all(|a| (a.re - expect).abs() < 1e-12 && a.im == 0.0));
        }
    }

    #[test]
    fn controls_gate_application() {
        let x = gate_matrix(RotationKind::PauliX, &Base::from_alpha(0.5)).unwrap();
        // |q1 q0> = |01>; flip q1 when q0 = 1
        let mut amps = vec![czero::<f64>(); 4];
        amps[1] = C::new(1.0, 0.0);
        apply_single(&mut amps, 1, 1, 1, &x);
        assert_eq!(amps[3], C::new(1.0, 0.0));
        // open control does not fire on q0 = 1
        apply_single(&mut amps, 1, 1, 0, &x);
        assert_eq!(amps[3], C::new(1.0, 0.0));
    }

    #[test]
    fn dropping_a_bit_keeps_the_zero_half() {
        let amps: Vec<C<f64>> = (0..8).map(|i| C::new(i as f64, 0.0)).collect();
        let kept: Vec<f64> = drop_zero_bit(&amps, 1).iter().map(|a| a.re).collect();
        assert_eq!(kept, vec![0.0, 1.0, 4.0, 5.0]);
    }

    #[test]
    fn rejects_bad_lengths() {
        assert!(StateVector::<f64>::from_amplitudes(vec![czero(); 3]).is_err());
    }
}
