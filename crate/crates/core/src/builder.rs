//! Circuit families for phase, exponential and Gaussian targets.
//!
//! Everything rests on expanding a polynomial in `x = sum_j 2^j x_j` over the
//! binary digits `x_j`. Because `x_j^2 = x_j`, every monomial collapses to a
//! product over a *set* of digits, so `x^d = sum_S c_S prod_{j in S} x_j`
//! with `|S| <= d`. Each term becomes one rotation controlled on the digits
//! of `S`: a `Z` for phases, or a `B` on a post-selected ancilla for real
//! windows.

use std::collections::BTreeMap;

use itertools::Itertools;

use crate::circuit::{Circuit, Layer, LayeredCircuit};
use crate::error::{Error, Result};
use crate::gate::{Base, Control, Gate, RotationKind};
use crate::optimizer::pack_layers;
use crate::scalar::Real;
use crate::spec::{GaussianSpec, Mode, QuadraticForm};

pub const MAX_DEGREE: usize = 4;

/// Coefficients of `x^d` over products of binary digits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialExpansion {
    pub n: usize,
    pub degree: usize,
    /// Digit set (ascending) to coefficient.
    pub terms: BTreeMap<Vec<usize>, u128>,
}

impl MonomialExpansion {
    /// Terms ordered by set size, then lexicographically.
    pub fn ordered_terms(&self) -> Vec<(&[usize], u128)> {
        let mut v: Vec<_> = self.terms.iter().map(|(s, &c)| (s.as_slice(), c)).collect();
        v.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(b.0)));
        v
    }

    /// `sum_S c_S prod_{j in S} x_j` at `x`.
    pub fn evaluate(&self, x: u64) -> u128 {
        self.terms
            .iter()
            .filter(|(s, _)| s.iter().all(|&j| x >> j & 1 == 1))
            .map(|(_, &c)| c)
            .sum()
    }
}

/// Expands `x^d` for an `n`-digit binary `x`.
///
/// The coefficient of digit set `S` collects every ordered `d`-tuple of
/// digits whose support is exactly `S`, which inclusion-exclusion gives as
/// `sum_{T subset S} (-1)^{|S|-|T|} (sum_{j in T} 2^j)^d`.
pub fn monomial_coefficients(n: usize, d: usize) -> Result<MonomialExpansion> {
    if d == 0 || d > MAX_DEGREE {
        return Err(Error::UnsupportedDegree(d));
    }
    if n == 0 {
        return Err(Error::domain("need at least one qubit"));
    }
    if n * d > 124 {
        return Err(Error::domain("x^d would overflow 128-bit coefficients"));
    }
    let mut terms = BTreeMap::new();
    for size in 1..=d.min(n) {
        for set in (0..n).combinations(size) {
            let mut c: i128 = 0;
            for mask in 1u32..(1 << size) {
                let sum: i128 = (0..size).filter(|i| mask >> i & 1 == 1).map(|i| 1i128 << set[i]).sum();
                let term = sum.pow(d as u32);
                if (size - mask.count_ones() as usize).is_multiple_of(2) {
                    c += term;
                } else {
                    c -= term;
                }
            }
            debug_assert!(c > 0);
            terms.insert(set, c as u128);
        }
    }
    Ok(MonomialExpansion { n, degree: d, terms })
}

/// `log2(c)` as a rotation exponent, exact for powers of two.
fn log2_exponent<T: Real>(c: u128) -> T {
    if c.is_power_of_two() {
        T::from_u32(c.trailing_zeros()).expect("small integer")
    } else {
        T::from_u128(c).expect("representable").log2()
    }
}

/// Exponent `log2(2^k + 4^k)` of the merged rotation on core qubit `k`.
pub fn merged_exponent<T: Real>(k: usize) -> T {
    let k = T::from_usize_lossy(k);
    // log2(2^k (1 + 2^k))
    k + (T::one() + k.exp2()).log2()
}

/// `(1/sqrt N) sum_x e^{i alpha x} |x>`: Hadamards, then `Z(j)` on qubit `j`.
pub fn build_linear_phase<T: Real>(n: usize, base: Base<T>) -> Result<Circuit<T>> {
    if n == 0 {
        return Err(Error::domain("need at least one qubit"));
    }
    let mut c = Circuit::new(n, 0, base);
    for j in 0..n {
        c.push(Gate::h(j));
    }
    for j in 0..n {
        c.push(Gate::z(T::from_usize_lossy(j), j));
    }
    Ok(c)
}

/// `(1/sqrt N) sum_x e^{i alpha x^d} |x>`.
///
/// Each term `c_S` of the expansion becomes `Z(log2 c_S)` on the lowest
/// qubit of `S`, closed-controlled on the rest.
pub fn build_poly_phase<T: Real>(n: usize, base: Base<T>, d: usize) -> Result<Circuit<T>> {
    let expansion = monomial_coefficients(n, d)?;
    let mut c = Circuit::new(n, 0, base);
    for j in 0..n {
        c.push(Gate::h(j));
    }
    for (set, coeff) in expansion.ordered_terms() {
        let controls = set[1..].iter().copied().map(Control::closed).collect();
        c.push(Gate::controlled(RotationKind::Z(log2_exponent(coeff)), set[0], controls));
    }
    Ok(c)
}

/// `sum_x alpha^x |x>` from `A(j)` on each qubit `j`.
pub fn build_exponential<T: Real>(n: usize, base: Base<T>) -> Result<Circuit<T>> {
    if n == 0 {
        return Err(Error::domain("need at least one qubit"));
    }
    let mut c = Circuit::new(n, 0, base);
    for j in 0..n {
        c.push(Gate::a(T::from_usize_lossy(j), j));
    }
    Ok(c)
}

/// Unoptimized half-Gaussian `sum_x alpha^(x^2) |x>`: a Hadamard state
/// windowed by one post-selected `B` per term of the squared expansion,
/// each on its own ancilla.
pub fn build_half_gaussian<T: Real>(n: usize, base: Base<T>) -> Result<Circuit<T>> {
    if n < 2 {
        return Err(Error::domain("half-Gaussian needs at least 2 qubits"));
    }
    let ancilla = n + n * (n - 1) / 2;
    let mut c = Circuit::new(n, ancilla, base);
    for j in 0..n {
        c.push(Gate::h(j));
    }
    let mut next = n;
    for j in 0..n {
        c.push(Gate::b(T::from_usize_lossy(2 * j), next, &[j]));
        c.measure(vec![next]);
        next += 1;
    }
    for k in 1..n {
        for j in 0..k {
            c.push(Gate::b(T::from_usize_lossy(j + k + 1), next, &[j, k]));
            c.measure(vec![next]);
            next += 1;
        }
    }
    Ok(c)
}

fn check_full(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::domain("full Gaussian needs at least 2 qubits"));
    }
    if n > 63 {
        return Err(Error::domain("full Gaussian limited to 63 qubits"));
    }
    Ok(())
}

fn gaussian_prelude<T: Real>(n: usize, ancilla: usize, base: Base<T>) -> Circuit<T> {
    let mut c = Circuit::new(n, ancilla, base);
    for k in 0..n - 1 {
        c.push(Gate::a(merged_exponent(k), k));
    }
    c
}

fn symmetrize<T: Real>(n: usize, ancilla: usize, base: Base<T>) -> Circuit<T> {
    let top = n - 1;
    let mut c = Circuit::new(n, ancilla, base);
    c.push(Gate::h(top));
    for k in 0..top {
        c.push(Gate::cnot(Control::open(top), k));
    }
    c
}

/// Symmetric Gaussian `sum_x alpha^((x - (N-1)/2)^2) |x>`.
///
/// The `n-1` core qubits carry the half-shifted window
/// `alpha^((x + 1/2)^2)`: merged `A(log2(2^k + 4^k))` rotations absorb the
/// linear and diagonal quadratic terms, and one doubly-controlled `B` per
/// core pair supplies the cross terms. A Hadamard on the top qubit and
/// open-controlled CNOTs mirror the lower half.
pub fn build_full_gaussian<T: Real>(n: usize, base: Base<T>) -> Result<Circuit<T>> {
    check_full(n)?;
    let core = n - 1;
    let ancilla = core * (core.saturating_sub(1)) / 2;
    let mut c = gaussian_prelude(n, ancilla, base);
    let mut next = n;
    for k in 1..core {
        for j in 0..k {
            c.push(Gate::b(T::from_usize_lossy(j + k + 1), next, &[j, k]));
            c.measure(vec![next]);
            next += 1;
        }
    }
    c.extend(&symmetrize(n, ancilla, base));
    Ok(c)
}

/// [`build_full_gaussian`] with the pair rotations packed into rounds of
/// disjoint controls that share `floor((n-1)/2)` reusable ancilla.
pub fn build_layered_gaussian_n<T: Real>(n: usize, base: Base<T>) -> Result<LayeredCircuit<T>> {
    check_full(n)?;
    let core = n - 1;
    let ancilla = core / 2;
    let layers = if core >= 2 {
        pack_layers(core)?
            .into_iter()
            .map(|round| {
                Layer::new(
                    round
                        .into_iter()
                        .enumerate()
                        .map(|(slot, (j, k))| Gate::b(T::from_usize_lossy(j + k + 1), n + slot, &[j, k]))
                        .collect(),
                )
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(LayeredCircuit {
        prelude: gaussian_prelude(n, ancilla, base),
        layers,
        postlude: symmetrize(n, ancilla, base),
    })
}

pub fn build_layered_gaussian<T: Real>(spec: &GaussianSpec<T>) -> Result<LayeredCircuit<T>> {
    if spec.mode() != Mode::FullGaussian {
        return Err(Error::domain("layered construction applies to the full Gaussian"));
    }
    build_layered_gaussian_n(spec.n_qubits(), *spec.base())
}

/// Two-register window `sum_{x,y} alpha^(Q(x,y)) |x>|y>`.
///
/// The `y` register occupies qubits `0..n_y` and `x` the qubits above it,
/// so the basis index is `x * 2^n_y + y`. Single-digit terms go into the
/// initial `A` rotations; digit pairs within a register and, for a nonzero
/// cross coefficient, pairs spanning the registers become post-selected
/// doubly-controlled `B` gates.
pub fn build_gaussian_2d<T: Real>(
    n_x: usize,
    n_y: usize,
    form: QuadraticForm,
    base: Base<T>,
) -> Result<Circuit<T>> {
    if n_x == 0 || n_y == 0 {
        return Err(Error::domain("both registers need at least one qubit"));
    }
    if n_x + n_y > 62 {
        return Err(Error::domain("2-D registers limited to 62 qubits"));
    }
    let xq = |j: usize| n_y + j;
    let yq = |k: usize| k;
    let exp = |coeff: u64, shift: usize| log2_exponent::<T>(coeff as u128) + T::from_usize_lossy(shift);

    let mut pairs: Vec<(T, usize, usize)> = Vec::new();
    // register offset, width, diagonal coefficient
    for (offset, qubits, coeff) in [(n_y, n_x, form.xx), (0, n_y, form.yy)] {
        for k in 1..qubits {
            for j in 0..k {
                pairs.push((exp(coeff, j + k + 1), offset + j, offset + k));
            }
        }
    }
    if form.xy > 0 {
        for j in 0..n_x {
            for k in 0..n_y {
                pairs.push((exp(form.xy, j + k), xq(j), yq(k)));
            }
        }
    }

    let n = n_x + n_y;
    let mut c = Circuit::new(n, pairs.len(), base);
    for j in 0..n_y {
        c.push(Gate::a(exp(form.yy, 2 * j), yq(j)));
    }
    for j in 0..n_x {
        c.push(Gate::a(exp(form.xx, 2 * j), xq(j)));
    }
    for (i, (m, a, b)) in pairs.into_iter().enumerate() {
        c.push(Gate::b(m, n + i, &[a.min(b), a.max(b)]));
        c.measure(vec![n + i]);
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::validate;

    fn brute_force_ok(n: usize, d: usize) {
        let e = monomial_coefficients(n, d).unwrap();
        for x in 0..(1u64 << n) {
            assert_eq!(e.evaluate(x), (x as u128).pow(d as u32), "n={n} d={d} x={x}");
        }
    }

    #[test]
    fn linear_coefficients_are_place_values() {
        let e = monomial_coefficients(3, 1).unwrap();
        let expect: BTreeMap<_, _> = [(vec![0], 1), (vec![1], 2), (vec![2], 4)].into_iter().collect();
        assert_eq!(e.terms, expect);
    }

    #[test]
    fn squared_coefficients() {
        let e = monomial_coefficients(3, 2).unwrap();
        let expect: BTreeMap<_, _> = [
            (vec![0], 1),
            (vec![1], 4),
            (vec![2], 16),
            (vec![0, 1], 4),
            (vec![0, 2], 8),
            (vec![1, 2], 16),
        ]
        .into_iter()
        .collect();
        assert_eq!(e.terms, expect);
    }

    #[test]
    fn cubic_two_digits() {
        // (x0 + 2 x1)^3 with x_j^2 = x_j
        let e = monomial_coefficients(2, 3).unwrap();
        assert_eq!(e.terms[&vec![0]], 1);
        assert_eq!(e.terms[&vec![1]], 8);
        assert_eq!(e.terms[&vec![0, 1]], 18);
    }

    #[test]
    fn expansion_identity_exhaustive() {
        for d in 1..=4 {
            for n in 1..=12 {
                brute_force_ok(n, d);
            }
        }
    }

    #[test]
    fn degree_bounds() {
        assert_eq!(monomial_coefficients(3, 5), Err(Error::UnsupportedDegree(5)));
        assert_eq!(monomial_coefficients(3, 0), Err(Error::UnsupportedDegree(0)));
        assert!(build_poly_phase(3, Base::from_alpha(0.1), 7).is_err());
    }

    #[test]
    fn quadratic_phase_gate_labels() {
        let c = build_poly_phase(5, Base::from_alpha(0.3), 2).unwrap();
        let t = c.tally();
        assert_eq!((t.h, t.z_uncontrolled, t.z_controlled), (5, 5, 10));
        let mut single: Vec<f64> = Vec::new();
        let mut paired: Vec<(usize, usize, f64)> = Vec::new();
        for g in c.gates() {
            if let RotationKind::Z(m) = g.kind {
                match g.controls.as_slice() {
                    [] => single.push(m),
                    [ctl] => paired.push((g.target, ctl.qubit, m)),
                    _ => panic!("unexpected control count"),
                }
            }
        }
        assert_eq!(single, vec![0.0, 2.0, 4.0, 6.0, 8.0]);
        for (j, k, m) in paired {
            assert_eq!(m, (j + k + 1) as f64);
        }
    }

    #[test]
    fn degree_one_matches_linear_builder() {
        let base = Base::from_alpha(0.37);
        assert_eq!(build_poly_phase(6, base, 1).unwrap(), build_linear_phase(6, base).unwrap());
    }

    #[test]
    fn half_gaussian_two_qubits() {
        let c = build_half_gaussian(2, Base::from_alpha(0.5)).unwrap();
        let bs: Vec<(f64, usize)> = c
            .gates()
            .filter_map(|g| match g.kind {
                RotationKind::B(m) => Some((m, g.controls.len())),
                _ => None,
            })
            .collect();
        assert_eq!(bs, vec![(0.0, 1), (2.0, 1), (2.0, 2)]);
        assert!(validate(&c).is_empty());
    }

    #[test]
    fn half_gaussian_five_qubit_exponents() {
        let c = build_half_gaussian(5, Base::from_alpha(0.5)).unwrap();
        let mut ms: Vec<f64> = c
            .gates()
            .filter_map(|g| match g.kind {
                RotationKind::B(m) => Some(m),
                _ => None,
            })
            .collect();
        ms.sort_by(f64::total_cmp);
        // B_0 B_2 B_4 B_6 B_8 for the digits and B_{j+k+1} for the pairs
        let expect = [0., 2., 2., 3., 4., 4., 4., 5., 5., 6., 6., 6., 7., 8., 8.];
        assert_eq!(ms, expect);
    }

    #[test]
    fn full_gaussian_six_qubits() {
        let c = build_full_gaussian(6, Base::from_alpha(0.9)).unwrap();
        let t = c.tally();
        assert_eq!((t.a, t.h, t.b_double, t.cnot), (5, 1, 10, 5));
        assert_eq!(c.ancilla_qubits(), 10);
        assert!(validate(&c).is_empty());
        let a1 = c.gates().find(|g| g.target == 1).unwrap();
        assert_eq!(a1.kind, RotationKind::A(6f64.log2()));
        for g in c.gates().filter(|g| g.kind == RotationKind::Cnot) {
            assert_eq!(g.controls, vec![Control::open(5)]);
        }
    }

    #[test]
    fn merged_exponents_exact() {
        for k in 0..12usize {
            let expect = ((1u64 << k) as f64 + (1u64 << (2 * k)) as f64).log2();
            assert!((merged_exponent::<f64>(k) - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn layered_shapes() {
        let c = build_layered_gaussian_n(7, Base::from_alpha(0.9)).unwrap();
        assert_eq!(c.layers.len(), 5);
        assert!(c.layers.iter().all(|l| l.gates.len() == 3));
        assert_eq!(c.ancilla_qubits(), 3);
        c.check_parallel().unwrap();
        assert!(validate(&c.to_circuit()).is_empty());

        let c = build_layered_gaussian_n(4, Base::from_alpha(0.9)).unwrap();
        assert_eq!(c.layers.len(), 3);
        assert!(c.layers.iter().all(|l| l.gates.len() == 1));
        assert_eq!(c.ancilla_qubits(), 1);
    }

    #[test]
    fn two_dim_without_covariance_has_no_cross_gates() {
        let c = build_gaussian_2d(3, 3, QuadraticForm::new(1, 0, 1).unwrap(), Base::from_alpha(0.8))
            .unwrap();
        for g in c.gates().filter(|g| g.is_b()) {
            let (a, b) = (g.controls[0].qubit, g.controls[1].qubit);
            assert_eq!(a < 3, b < 3, "gate spans registers");
        }
        assert_eq!(c.gates().filter(|g| g.is_b()).count(), 6);
        assert!(validate(&c).is_empty());
    }

    #[test]
    fn two_dim_cross_terms() {
        let c = build_gaussian_2d(3, 3, QuadraticForm::new(1, 1, 1).unwrap(), Base::from_alpha(0.8))
            .unwrap();
        let cross: Vec<(usize, usize, f64)> = c
            .gates()
            .filter_map(|g| match g.kind {
                RotationKind::B(m) => {
                    let (a, b) = (g.controls[0].qubit, g.controls[1].qubit);
                    let (y, x) = (a.min(b), a.max(b));
                    (y < 3 && x >= 3).then(|| (x - 3, y, m))
                }
                _ => None,
            })
            .collect();
        assert_eq!(cross.len(), 9);
        for (j, k, m) in cross {
            assert_eq!(m, (j + k) as f64);
        }
    }
}
