//! Dense complex statevector with in-place gate kernels and shot sampling.
//!
//! Index `i` of the amplitude array is read as a bitstring with qubit 0 as the
//! least significant bit. Multi-controlled gates are applied natively by index
//! masking; no decomposition happens on the simulation path.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::circuit::{Gate, GateKind};
use crate::error::{Error, Result};

/// Hard cap: 2^26 amplitudes is 1 GiB of f64 pairs. Fail loudly above that.
pub const MAX_QUBITS: usize = 26;

/// Below this many free indices a kernel runs single-threaded.
const PAR_MIN: usize = 1 << 14;

#[derive(Clone, Debug)]
pub struct Statevector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

/// Histogram of measured bitstrings on one register.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct CountTable {
    pub entries: BTreeMap<String, u64>,
    pub total_shots: u64,
}

impl CountTable {
    pub fn count(&self, bits: &str) -> u64 {
        self.entries.get(bits).copied().unwrap_or(0)
    }
}

/// Parse an MSB-first bitstring into an amplitude index (qubit 0 = LSB).
pub fn bits_to_index(bits: &str) -> Result<usize> {
    let mut idx = 0usize;
    for c in bits.chars() {
        idx = (idx << 1)
            | match c {
                '0' => 0,
                '1' => 1,
                other => {
                    return Err(Error::Structural(format!(
                        "invalid bit character {other:?} in {bits:?}"
                    )))
                }
            };
    }
    Ok(idx)
}

/// Render an index as an MSB-first bitstring of the given width.
pub fn index_to_bits(idx: usize, width: usize) -> String {
    (0..width)
        .rev()
        .map(|b| if idx >> b & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Free-index runs between fixed bit positions: `(shift, count)` pairs, the
/// innermost (lowest) run last, so iteration touches memory in long
/// sequential bursts instead of recomputing a bit-insertion per element.
fn free_segments(num_qubits: usize, fixed: &[(usize, bool)]) -> (usize, Vec<(u32, usize)>) {
    let base = fixed
        .iter()
        .fold(0usize, |b, &(p, v)| b | ((v as usize) << p));
    let mut segments = Vec::with_capacity(fixed.len() + 1);
    let mut lo = 0usize;
    for &(p, _) in fixed {
        if p > lo {
            segments.push((lo as u32, 1usize << (p - lo)));
        }
        lo = p + 1;
    }
    if num_qubits > lo {
        segments.push((lo as u32, 1usize << (num_qubits - lo)));
    }
    segments.reverse(); // outermost (highest shift) first, lowest run last
    (base, segments)
}

/// Call `body(idx)` for every index whose fixed bits match, innermost run
/// sequential. Parallelizes over the outermost run when large enough.
fn for_each_subspace(num_qubits: usize, fixed: &[(usize, bool)], body: impl Fn(usize) + Sync) {
    let (base, segments) = free_segments(num_qubits, fixed);
    fn walk(base: usize, segments: &[(u32, usize)], body: &(impl Fn(usize) + Sync)) {
        match segments {
            [] => body(base),
            [(shift, count)] => {
                let step = 1usize << shift;
                let mut idx = base;
                for _ in 0..*count {
                    body(idx);
                    idx += step;
                }
            }
            [(shift, count), rest @ ..] => {
                for i in 0..*count {
                    walk(base | (i << shift), rest, body);
                }
            }
        }
    }
    let total: usize = segments.iter().map(|&(_, c)| c).product();
    if total >= PAR_MIN && segments.len() > 1 {
        let (outer, rest) = segments.split_first().unwrap();
        let (shift, count) = *outer;
        (0..count)
            .into_par_iter()
            .for_each(|i| walk(base | (i << shift), rest, &body));
    } else {
        walk(base, &segments, &body);
    }
}

struct SyncPtr(*mut Complex64);
unsafe impl Send for SyncPtr {}
unsafe impl Sync for SyncPtr {}

impl SyncPtr {
    #[inline]
    fn get(&self) -> *mut Complex64 {
        self.0
    }
}

impl Statevector {
    /// |0...0⟩ on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::Capacity(format!(
                "{num_qubits} qubits outside supported range 1..={MAX_QUBITS}"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << num_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { num_qubits, amps })
    }

    /// Basis state from an MSB-first bitstring.
    pub fn basis(num_qubits: usize, bits: &str) -> Result<Self> {
        if bits.len() != num_qubits {
            return Err(Error::Structural(format!(
                "bitstring length {} does not match {num_qubits} qubits",
                bits.len()
            )));
        }
        let idx = bits_to_index(bits)?;
        Self::basis_index(num_qubits, idx)
    }

    /// Basis state from an amplitude index.
    pub fn basis_index(num_qubits: usize, idx: usize) -> Result<Self> {
        let mut sv = Self::zero(num_qubits)?;
        if idx >= sv.amps.len() {
            return Err(Error::Structural(format!(
                "basis index {idx} out of range for {num_qubits} qubits"
            )));
        }
        sv.amps[0] = Complex64::new(0.0, 0.0);
        sv.amps[idx] = Complex64::new(1.0, 0.0);
        Ok(sv)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, idx: usize) -> Complex64 {
        self.amps[idx]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn apply_circuit_gates<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<()> {
        for g in gates {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.num_qubits)?;
        match gate.kind {
            GateKind::H => {
                let s = FRAC_1_SQRT_2;
                self.pair_kernel(gate.targets[0], &[], move |a, b| ((a + b) * s, (a - b) * s));
            }
            GateKind::X => {
                self.pair_kernel(gate.targets[0], &[], |a, b| (b, a));
            }
            GateKind::Cnot | GateKind::Mcx => {
                self.pair_kernel(gate.targets[0], &gate.controls, |a, b| (b, a));
            }
            GateKind::Swap => {
                self.swap_kernel(gate.targets[0], gate.targets[1]);
            }
            GateKind::CPhase(theta) | GateKind::MCPhase(theta) => {
                self.phase_kernel(gate.targets[0], &gate.controls, theta);
            }
        }
        Ok(())
    }

    /// Update (|..t=0..⟩, |..t=1..⟩) pairs on the subspace where all controls are 1.
    fn pair_kernel<F>(&mut self, target: usize, controls: &[usize], f: F)
    where
        F: Fn(Complex64, Complex64) -> (Complex64, Complex64) + Sync,
    {
        let mut fixed: Vec<(usize, bool)> = controls.iter().map(|&c| (c, true)).collect();
        fixed.push((target, false));
        fixed.sort_unstable_by_key(|p| p.0);
        let tmask = 1usize << target;
        let ptr = SyncPtr(self.amps.as_mut_ptr());
        // Disjoint index pairs: each (i0, i0 | tmask) is visited exactly once.
        for_each_subspace(self.num_qubits, &fixed, |i0| unsafe {
            let p = ptr.get();
            let (a, b) = f(*p.add(i0), *p.add(i0 | tmask));
            *p.add(i0) = a;
            *p.add(i0 | tmask) = b;
        });
    }

    /// Multiply e^{i theta} on the subspace where target and all controls are 1.
    fn phase_kernel(&mut self, target: usize, controls: &[usize], theta: f64) {
        let mut fixed: Vec<(usize, bool)> = controls.iter().map(|&c| (c, true)).collect();
        fixed.push((target, true));
        fixed.sort_unstable_by_key(|p| p.0);
        let phase = Complex64::from_polar(1.0, theta);
        let ptr = SyncPtr(self.amps.as_mut_ptr());
        for_each_subspace(self.num_qubits, &fixed, |i| unsafe {
            *ptr.get().add(i) *= phase;
        });
    }

    fn swap_kernel(&mut self, a: usize, b: usize) {
        let mut fixed = [(a, true), (b, false)];
        fixed.sort_unstable_by_key(|p| p.0);
        let amask = 1usize << a;
        let bmask = 1usize << b;
        let ptr = SyncPtr(self.amps.as_mut_ptr());
        for_each_subspace(self.num_qubits, &fixed, |i| unsafe {
            let p = ptr.get();
            std::ptr::swap(p.add(i), p.add((i & !amask) | bmask));
        });
    }

    fn check_register(&self, register: &[usize]) -> Result<()> {
        let mut seen = vec![false; self.num_qubits];
        for &q in register {
            if q >= self.num_qubits {
                return Err(Error::Structural(format!(
                    "register qubit {q} out of range for {} qubits",
                    self.num_qubits
                )));
            }
            if seen[q] {
                return Err(Error::Structural(format!("duplicate register qubit {q}")));
            }
            seen[q] = true;
        }
        Ok(())
    }

    /// Probability of observing `value` (MSB-first over `register`, with
    /// register[0] as the least significant position) on a measurement of the
    /// given register.
    pub fn probability(&self, register: &[usize], value: &str) -> Result<f64> {
        self.check_register(register)?;
        if value.len() != register.len() {
            return Err(Error::Structural(format!(
                "value width {} does not match register width {}",
                value.len(),
                register.len()
            )));
        }
        let key = bits_to_index(value)?;
        let mut mask = 0usize;
        let mut want = 0usize;
        for (pos, &q) in register.iter().enumerate() {
            mask |= 1 << q;
            if key >> pos & 1 == 1 {
                want |= 1 << q;
            }
        }
        let p = self
            .amps
            .par_iter()
            .enumerate()
            .filter(|(i, _)| i & mask == want)
            .map(|(_, a)| a.norm_sqr())
            .sum::<f64>();
        Ok(p.min(1.0))
    }

    /// Marginal distribution over a register; entry `v` covers the outcome
    /// whose register-local integer value is `v` (register[0] = LSB).
    pub fn marginal(&self, register: &[usize]) -> Result<Vec<f64>> {
        self.check_register(register)?;
        let r = register.len();
        let bins = self
            .amps
            .par_iter()
            .enumerate()
            .fold(
                || vec![0.0f64; 1 << r],
                |mut acc, (i, a)| {
                    let mut key = 0usize;
                    for (pos, &q) in register.iter().enumerate() {
                        key |= (i >> q & 1) << pos;
                    }
                    acc[key] += a.norm_sqr();
                    acc
                },
            )
            .reduce(
                || vec![0.0f64; 1 << r],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            );
        Ok(bins)
    }

    /// Sample `shots` i.i.d. outcomes from the register marginal.
    ///
    /// RNG is ChaCha8 seeded with `seed`; identical inputs give identical
    /// tables across builds and platforms.
    pub fn measure_counts(&self, register: &[usize], shots: u64, seed: u64) -> Result<CountTable> {
        if shots == 0 {
            return Err(Error::Structural("shots must be >= 1".into()));
        }
        let marginal = self.marginal(register)?;
        let mut cdf = Vec::with_capacity(marginal.len());
        let mut acc = 0.0;
        for p in &marginal {
            acc += p;
            cdf.push(acc);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
        for _ in 0..shots {
            let u: f64 = rng.gen_range(0.0..acc.max(1.0));
            let k = cdf.partition_point(|&c| c <= u).min(marginal.len() - 1);
            *counts.entry(k).or_insert(0) += 1;
        }
        let entries = counts
            .into_iter()
            .map(|(k, c)| (index_to_bits(k, register.len()), c))
            .collect();
        Ok(CountTable {
            entries,
            total_shots: shots,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn basis_state_examples() {
        let sv = Statevector::basis(1, "0").unwrap();
        assert_eq!(sv.amplitude(0), Complex64::new(1.0, 0.0));
        assert_eq!(sv.amplitude(1), Complex64::new(0.0, 0.0));

        // "10": qubit1=1, qubit0=0 -> index 2
        let sv = Statevector::basis(2, "10").unwrap();
        assert_eq!(sv.amplitude(2), Complex64::new(1.0, 0.0));

        let sv = Statevector::basis(16, &"0".repeat(16)).unwrap();
        assert_eq!(sv.amplitudes().len(), 1 << 16);
        assert_eq!(sv.amplitude(0), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn capacity_is_enforced() {
        assert!(matches!(Statevector::zero(27), Err(Error::Capacity(_))));
        assert!(matches!(Statevector::zero(0), Err(Error::Capacity(_))));
    }

    #[test]
    fn hadamard_and_cnot() {
        let mut sv = Statevector::basis(1, "0").unwrap();
        sv.apply_gate(&Gate::h(0)).unwrap();
        assert_abs_diff_eq!(sv.amplitude(0).re, FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(sv.amplitude(1).re, FRAC_1_SQRT_2, epsilon = 1e-12);

        // CNOT(control=0, target=1) on |01⟩ (qubit0 = 1) -> |11⟩
        let mut sv = Statevector::basis(2, "01").unwrap();
        sv.apply_gate(&Gate::cnot(0, 1)).unwrap();
        assert_abs_diff_eq!(sv.amplitude(3).re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn controlled_phase_pi_flips_11() {
        let mut sv = Statevector::basis(2, "11").unwrap();
        sv.apply_gate(&Gate::cphase(PI, 0, 1)).unwrap();
        assert_abs_diff_eq!(sv.amplitude(3).re, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn gate_then_inverse_is_identity() {
        let gates = vec![
            Gate::h(1),
            Gate::x(0),
            Gate::cnot(0, 2),
            Gate::swap(1, 2),
            Gate::cphase(0.7, 0, 1),
            Gate::mcphase(1.3, vec![0, 2], 1),
            Gate::mcx(vec![1, 2], 0),
        ];
        for g in gates {
            let mut sv = Statevector::basis(3, "000").unwrap();
            sv.apply_gate(&Gate::h(0)).unwrap();
            sv.apply_gate(&Gate::h(1)).unwrap();
            sv.apply_gate(&Gate::cphase(0.3, 0, 2)).unwrap();
            let before = sv.clone();
            sv.apply_gate(&g).unwrap();
            sv.apply_gate(&g.inverse()).unwrap();
            for (a, b) in sv.amplitudes().iter().zip(before.amplitudes()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn random_circuit_preserves_norm() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 10;
        let mut sv = Statevector::zero(n).unwrap();
        for _ in 0..100 {
            let g = match rng.gen_range(0..5) {
                0 => Gate::h(rng.gen_range(0..n)),
                1 => Gate::x(rng.gen_range(0..n)),
                2 => {
                    let c = rng.gen_range(0..n);
                    let mut t = rng.gen_range(0..n);
                    while t == c {
                        t = rng.gen_range(0..n);
                    }
                    Gate::cnot(c, t)
                }
                3 => {
                    let c = rng.gen_range(0..n);
                    let mut t = rng.gen_range(0..n);
                    while t == c {
                        t = rng.gen_range(0..n);
                    }
                    Gate::cphase(rng.gen_range(-PI..PI), c, t)
                }
                _ => Gate::h(rng.gen_range(0..n)),
            };
            sv.apply_gate(&g).unwrap();
        }
        assert!((sv.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn probability_examples() {
        let mut sv = Statevector::zero(2).unwrap();
        sv.apply_gate(&Gate::h(0)).unwrap();
        sv.apply_gate(&Gate::h(1)).unwrap();
        assert_abs_diff_eq!(sv.probability(&[0], "1").unwrap(), 0.5, epsilon = 1e-12);

        let sv = Statevector::basis(2, "10").unwrap();
        assert_abs_diff_eq!(sv.probability(&[1], "1").unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn probability_matches_amplitudes_exhaustively() {
        // Full-register probabilities equal squared amplitudes on <= 4 qubits.
        for n in 1..=4usize {
            let mut sv = Statevector::zero(n).unwrap();
            for q in 0..n {
                sv.apply_gate(&Gate::h(q)).unwrap();
                sv.apply_gate(&Gate::cphase(0.4 * (q as f64 + 1.0), q, (q + 1) % n))
                    .ok();
            }
            let reg: Vec<usize> = (0..n).collect();
            for idx in 0..1usize << n {
                let bits = index_to_bits(idx, n);
                let p = sv.probability(&reg, &bits).unwrap();
                assert_abs_diff_eq!(p, sv.amplitude(idx).norm_sqr(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn deterministic_state_counts() {
        let sv = Statevector::zero(3).unwrap();
        let t = sv.measure_counts(&[0, 1, 2], 100, 5).unwrap();
        assert_eq!(t.entries.len(), 1);
        assert_eq!(t.count("000"), 100);
    }

    #[test]
    fn uniform_counts_within_3_sigma() {
        let mut sv = Statevector::zero(1).unwrap();
        sv.apply_gate(&Gate::h(0)).unwrap();
        let t = sv.measure_counts(&[0], 1_000_000, 11).unwrap();
        let c0 = t.count("0") as f64;
        assert!((c0 - 500_000.0).abs() < 3.0 * 500.0, "c0 = {c0}");
    }

    #[test]
    fn counts_are_deterministic() {
        let mut sv = Statevector::zero(4).unwrap();
        for q in 0..4 {
            sv.apply_gate(&Gate::h(q)).unwrap();
        }
        let a = sv.measure_counts(&[0, 2], 1000, 42).unwrap();
        let b = sv.measure_counts(&[0, 2], 1000, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.entries.values().sum::<u64>(), a.total_shots);
    }
}
