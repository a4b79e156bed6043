//! QFT-based arithmetic circuit constructors: QFT, adder, multiplier,
//! two's-complement conversion, and sign logic.
//!
//! Registers are passed as qubit-index slices with index 0 holding the least
//! significant bit. The public `qft` includes the final swaps so the output
//! bit order matches the input; the arithmetic constructors use the swap-free
//! variant internally and undo it with its inverse.

use std::f64::consts::PI;

use crate::circuit::{Circuit, Gate, RegisterLayout};
use crate::error::{Error, Result};

/// Sign-magnitude fixed point: one sign qubit (1 = negative) above `t`
/// magnitude qubits. Both +0 and -0 are legal codes and decode to 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct FixedPointSpec {
    pub magnitude_bits: usize,
}

impl FixedPointSpec {
    pub fn new(magnitude_bits: usize) -> Result<Self> {
        if magnitude_bits == 0 {
            return Err(Error::Encoding("magnitude_bits must be >= 1".into()));
        }
        Ok(Self { magnitude_bits })
    }

    /// Qubits per encoded component: t magnitude bits plus the sign.
    pub fn code_bits(&self) -> usize {
        self.magnitude_bits + 1
    }

    pub fn max_magnitude(&self) -> i64 {
        (1i64 << self.magnitude_bits) - 1
    }

    pub fn encode(&self, value: i64) -> Result<u64> {
        let mag = value.unsigned_abs();
        if mag > self.max_magnitude() as u64 {
            return Err(Error::Encoding(format!(
                "value {value} exceeds magnitude range +/-{}",
                self.max_magnitude()
            )));
        }
        let sign = u64::from(value < 0);
        Ok(mag | (sign << self.magnitude_bits))
    }

    pub fn decode(&self, code: u64) -> i64 {
        let mag = (code & ((1u64 << self.magnitude_bits) - 1)) as i64;
        if code >> self.magnitude_bits & 1 == 1 {
            -mag
        } else {
            mag
        }
    }

    /// Pack a vector component-wise; component 0 occupies the low code bits.
    pub fn encode_vector(&self, values: &[i64]) -> Result<u64> {
        let w = self.code_bits();
        let mut code = 0u64;
        for (j, &v) in values.iter().enumerate() {
            code |= self.encode(v)? << (j * w);
        }
        Ok(code)
    }

    pub fn decode_vector(&self, code: u64, dimension: usize) -> Vec<i64> {
        let w = self.code_bits();
        (0..dimension)
            .map(|j| self.decode(code >> (j * w) & ((1u64 << w) - 1)))
            .collect()
    }
}

fn check_disjoint(a: &[usize], b: &[usize], what: &str) -> Result<()> {
    for &q in a {
        if b.contains(&q) {
            return Err(Error::Structural(format!("{what}: registers overlap at qubit {q}")));
        }
    }
    Ok(())
}

/// Swap-free QFT: after these gates, qubit `reg[k]` carries the relative phase
/// e^{2 pi i x / 2^(k+1)} (bit-reversed output order).
fn push_qft_no_swap(c: &mut Circuit, reg: &[usize]) -> Result<()> {
    for k in (0..reg.len()).rev() {
        c.push(Gate::h(reg[k]))?;
        for j in 0..k {
            c.push(Gate::cphase(
                2.0 * PI / f64::from(1u32 << (k - j + 1)),
                reg[j],
                reg[k],
            ))?;
        }
    }
    Ok(())
}

/// Standard QFT on the register: |x⟩ → 2^{-t/2} Σ_y e^{2πi xy/2^t} |y⟩ with
/// the output in the same bit order as the input (final swaps included).
pub fn qft(layout: &RegisterLayout, register: &[usize]) -> Result<Circuit> {
    if register.is_empty() {
        return Err(Error::Structural("qft register must have >= 1 qubit".into()));
    }
    let mut c = Circuit::new(layout.clone());
    push_qft_no_swap(&mut c, register)?;
    let m = register.len();
    for i in 0..m / 2 {
        c.push(Gate::swap(register[i], register[m - 1 - i]))?;
    }
    Ok(c)
}

/// Phase rotations adding `src` (or a classical constant) into a register
/// already in swap-free Fourier form, optionally controlled.
fn push_fourier_add_register(c: &mut Circuit, src: &[usize], acc: &[usize]) -> Result<()> {
    for (j, &s) in src.iter().enumerate() {
        for (k, &a) in acc.iter().enumerate().skip(j) {
            c.push(Gate::cphase(2.0 * PI / f64::from(1u32 << (k + 1 - j)), s, a))?;
        }
    }
    Ok(())
}

/// acc ← (acc + src) mod 2^|acc| on basis states; src unchanged. A narrower
/// src is treated as zero-extended.
pub fn adder_circuit(layout: &RegisterLayout, src: &[usize], acc: &[usize]) -> Result<Circuit> {
    if src.is_empty() || acc.is_empty() || src.len() > acc.len() {
        return Err(Error::Structural(
            "adder needs non-empty registers with |src| <= |acc|".into(),
        ));
    }
    check_disjoint(src, acc, "adder")?;
    let mut c = Circuit::new(layout.clone());
    push_qft_no_swap(&mut c, acc)?;
    push_fourier_add_register(&mut c, src, acc)?;
    let mut un = Circuit::new(layout.clone());
    push_qft_no_swap(&mut un, acc)?;
    c.extend(&un.inverse())?;
    Ok(c)
}

/// acc ← (acc + constant) mod 2^|acc|: pure phase rotations between a QFT
/// pair, no source register needed.
pub fn constant_add_circuit(
    layout: &RegisterLayout,
    acc: &[usize],
    constant: u64,
) -> Result<Circuit> {
    if acc.is_empty() {
        return Err(Error::Structural("constant adder needs a non-empty register".into()));
    }
    let mut c = Circuit::new(layout.clone());
    push_qft_no_swap(&mut c, acc)?;
    for (k, &q) in acc.iter().enumerate() {
        let denom = 1u64 << (k + 1);
        let angle = 2.0 * PI * (constant % denom) as f64 / denom as f64;
        if angle != 0.0 {
            c.push(Gate::phase(angle, q))?;
        }
    }
    let mut un = Circuit::new(layout.clone());
    push_qft_no_swap(&mut un, acc)?;
    c.extend(&un.inverse())?;
    Ok(c)
}

/// product ← a * b on basis states (product register must be exactly 2t wide
/// for t-bit factors and arrive zeroed); a and b unchanged. Partial products
/// are written as doubly-controlled rotations in the Fourier basis.
pub fn multiplier_circuit(
    layout: &RegisterLayout,
    a: &[usize],
    b: &[usize],
    product: &[usize],
) -> Result<Circuit> {
    let t = a.len();
    if t == 0 || b.len() != t {
        return Err(Error::Structural("multiplier factors must share a width >= 1".into()));
    }
    if product.len() != 2 * t {
        return Err(Error::Structural(format!(
            "product register must be exactly {} qubits for {t}-bit factors, got {}",
            2 * t,
            product.len()
        )));
    }
    check_disjoint(a, b, "multiplier")?;
    check_disjoint(a, product, "multiplier")?;
    check_disjoint(b, product, "multiplier")?;
    let mut c = Circuit::new(layout.clone());
    push_qft_no_swap(&mut c, product)?;
    for (j, &aj) in a.iter().enumerate() {
        for (i, &bi) in b.iter().enumerate() {
            for (k, &pk) in product.iter().enumerate().skip(i + j) {
                c.push(Gate::mcphase(
                    2.0 * PI / f64::from(1u32 << (k + 1 - i - j)),
                    vec![aj, bi],
                    pk,
                ))?;
            }
        }
    }
    let mut un = Circuit::new(layout.clone());
    push_qft_no_swap(&mut un, product)?;
    let mut out = c;
    out.extend(&un.inverse())?;
    Ok(out)
}

/// s_out ← s_a ⊕ s_b; s_out must arrive as |0⟩.
pub fn sign_xor_circuit(
    layout: &RegisterLayout,
    s_a: usize,
    s_b: usize,
    s_out: usize,
) -> Result<Circuit> {
    if s_a == s_b || s_a == s_out || s_b == s_out {
        return Err(Error::Structural("sign qubits must be distinct".into()));
    }
    let mut c = Circuit::new(layout.clone());
    c.push(Gate::cnot(s_a, s_out))?;
    c.push(Gate::cnot(s_b, s_out))?;
    Ok(c)
}

/// Conditioned on the sign qubit, replace the register value v by its two's
/// complement (2^m - v) mod 2^m: controlled bit-flips followed by a
/// sign-controlled +1 in the Fourier basis. Sign 0 leaves the register alone.
pub fn to_complement_circuit(
    layout: &RegisterLayout,
    sign: usize,
    register: &[usize],
) -> Result<Circuit> {
    if register.is_empty() || register.contains(&sign) {
        return Err(Error::Structural(
            "complement register must be non-empty and exclude the sign qubit".into(),
        ));
    }
    let mut c = Circuit::new(layout.clone());
    for &q in register {
        c.push(Gate::cnot(sign, q))?;
    }
    push_qft_no_swap(&mut c, register)?;
    for (k, &q) in register.iter().enumerate() {
        c.push(Gate::cphase(2.0 * PI / f64::from(1u32 << (k + 1)), sign, q))?;
    }
    let mut un = Circuit::new(layout.clone());
    push_qft_no_swap(&mut un, register)?;
    c.extend(&un.inverse())?;
    Ok(c)
}

/// Inverse direction: extract the sign from the code's top bit (the sign qubit
/// must arrive as |0⟩), then undo the complement so the register holds the
/// magnitude.
pub fn from_complement_circuit(
    layout: &RegisterLayout,
    sign: usize,
    register: &[usize],
) -> Result<Circuit> {
    let mut c = Circuit::new(layout.clone());
    c.push(Gate::cnot(*register.last().ok_or_else(|| {
        Error::Structural("complement register must be non-empty".into())
    })?, sign))?;
    c.extend(&to_complement_circuit(layout, sign, register)?.inverse())?;
    Ok(c)
}
