//! Grover oracle construction: a circuit that flips the phase of exactly the
//! weight-register basis states whose decoded vector classifies every training
//! sample correctly.
//!
//! Each sample gets a classifier stage: load the label-merged data vector with
//! X gates, multiply it into the weight components (QFT multiplier plus sign
//! XOR), convert each signed partial product to two's complement, accumulate
//! with QFT adders, and copy the negated accumulator sign bit out as the
//! classification qubit. All arithmetic scratch is uncomputed by the inverse
//! circuit; the K classification qubits drive one phase-kickback ancilla and
//! are then uncomputed as well.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateStats, RegisterLayout};
use crate::error::{Error, Result};
use crate::qft_arith::{
    adder_circuit, constant_add_circuit, multiplier_circuit, sign_xor_circuit,
    to_complement_circuit, FixedPointSpec,
};
use crate::statevector::Statevector;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub x: Vec<i64>,
    pub y: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub features: usize,
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn validate(&self) -> Result<()> {
        if self.features == 0 {
            return Err(Error::Structural("dataset needs >= 1 feature".into()));
        }
        for (k, s) in self.samples.iter().enumerate() {
            if s.x.len() != self.features {
                return Err(Error::Structural(format!(
                    "sample {k} has {} entries, expected {}",
                    s.x.len(),
                    self.features
                )));
            }
            if s.y != 1 && s.y != -1 {
                return Err(Error::Structural(format!(
                    "sample {k} label {} is not +1/-1",
                    s.y
                )));
            }
        }
        Ok(())
    }

    pub fn num_samples(&self) -> usize {
        self.samples.len()
    }

    /// The bundled 4-sample, 2-feature dataset with a unique separating
    /// weight vector (-1, 1) among the 16 two-bit sign-magnitude codes.
    pub fn example() -> Self {
        Dataset {
            features: 2,
            samples: vec![
                Sample { x: vec![1, 0], y: -1 },
                Sample { x: vec![0, 1], y: 1 },
                Sample { x: vec![0, -1], y: -1 },
                Sample { x: vec![-1, 1], y: 1 },
            ],
        }
    }
}

/// Label-merged integer vectors x̃_k = y_k * x_k, the labels themselves, and
/// the encoding they must fit in. Labels are kept because a boundary tie
/// w.x̃ = 0 counts as correct only for y = +1 (ties activate to +1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedDataset {
    pub merged: Vec<Vec<i64>>,
    pub labels: Vec<i64>,
    pub spec: FixedPointSpec,
    pub features: usize,
}

pub fn encode_dataset(dataset: &Dataset, spec: FixedPointSpec) -> Result<EncodedDataset> {
    dataset.validate()?;
    let mut merged = Vec::with_capacity(dataset.samples.len());
    for (k, s) in dataset.samples.iter().enumerate() {
        let row: Vec<i64> = s.x.iter().map(|&v| v * s.y).collect();
        for (j, &v) in row.iter().enumerate() {
            spec.encode(v).map_err(|_| {
                Error::Encoding(format!(
                    "sample {k} component {j} value {v} exceeds magnitude range +/-{}",
                    spec.max_magnitude()
                ))
            })?;
        }
        merged.push(row);
    }
    Ok(EncodedDataset {
        merged,
        labels: dataset.samples.iter().map(|s| s.y).collect(),
        spec,
        features: dataset.features,
    })
}

/// Scratch allocation policy for the K classifier stages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegisterMode {
    /// One shared data/product/accumulator block, reused stage by stage.
    Reuse,
    /// Dedicated scratch per sample; wider, matches the per-sample resource
    /// model used for qubit-count scaling.
    PerSample,
}

/// Register map for one oracle instance.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleLayout {
    pub layout: RegisterLayout,
    pub spec: FixedPointSpec,
    pub features: usize,
    pub num_samples: usize,
    pub mode: RegisterMode,
    /// Accumulator (and product) width: 2t magnitude bits plus log2(n) carry
    /// headroom plus the sign bit, so no in-range input can overflow.
    pub acc_bits: usize,
}

fn ceil_log2(n: usize) -> usize {
    n.next_power_of_two().trailing_zeros() as usize
}

impl OracleLayout {
    pub fn build(
        features: usize,
        num_samples: usize,
        spec: FixedPointSpec,
        mode: RegisterMode,
    ) -> Result<Self> {
        if features == 0 || num_samples == 0 {
            return Err(Error::Structural("oracle needs >= 1 feature and >= 1 sample".into()));
        }
        let t = spec.magnitude_bits;
        let m = 2 * t + ceil_log2(features) + 1;
        let mut regs: Vec<(&str, usize)> = vec![("w", features * spec.code_bits())];
        let scratch_names: Vec<[String; 4]> = match mode {
            RegisterMode::Reuse => vec![[
                "data".into(),
                "prod".into(),
                "psign".into(),
                "acc".into(),
            ]],
            RegisterMode::PerSample => (0..num_samples)
                .map(|k| {
                    [
                        format!("data{k}"),
                        format!("prod{k}"),
                        format!("psign{k}"),
                        format!("acc{k}"),
                    ]
                })
                .collect(),
        };
        for names in &scratch_names {
            regs.push((&names[0], spec.code_bits()));
            regs.push((&names[1], m));
            regs.push((&names[2], 1));
            regs.push((&names[3], m));
        }
        regs.push(("cls", num_samples));
        regs.push(("anc", 1));
        let layout = RegisterLayout::contiguous(&regs)?;
        Ok(OracleLayout {
            layout,
            spec,
            features,
            num_samples,
            mode,
            acc_bits: m,
        })
    }

    pub fn weight_qubits(&self) -> &[usize] {
        self.layout.qubits("w").expect("w register")
    }

    fn weight_component(&self, j: usize) -> &[usize] {
        let w = self.weight_qubits();
        let cb = self.spec.code_bits();
        &w[j * cb..(j + 1) * cb]
    }

    fn scratch_name(&self, base: &str, stage: usize) -> String {
        match self.mode {
            RegisterMode::Reuse => base.to_string(),
            RegisterMode::PerSample => format!("{base}{stage}"),
        }
    }

    fn scratch(&self, base: &str, stage: usize) -> &[usize] {
        self.layout
            .qubits(&self.scratch_name(base, stage))
            .expect("scratch register")
    }

    fn cls_qubit(&self, stage: usize) -> usize {
        self.layout.qubits("cls").expect("cls register")[stage]
    }

    fn anc_qubit(&self) -> usize {
        self.layout.qubits("anc").expect("anc register")[0]
    }
}

/// One sample's classifier: computes c_k = [activation(w, x_k) = y_k] into
/// the stage's classification qubit and returns every scratch register to
/// |0⟩. In merged form that is c_k = [w . x̃_k >= 0] for a positive label and
/// c_k = [w . x̃_k >= 1] for a negative one (a tie activates to +1, which is
/// wrong exactly when y_k = -1); the strict case subtracts 1 from the
/// accumulator before the sign readout.
pub fn classifier_stage_circuit(
    ol: &OracleLayout,
    merged_sample: &[i64],
    label: i64,
    stage: usize,
) -> Result<Circuit> {
    if merged_sample.len() != ol.features {
        return Err(Error::Structural(format!(
            "sample has {} components, layout expects {}",
            merged_sample.len(),
            ol.features
        )));
    }
    let t = ol.spec.magnitude_bits;
    let data = ol.scratch("data", stage);
    let prod = ol.scratch("prod", stage);
    let psign = ol.scratch("psign", stage)[0];
    let acc = ol.scratch("acc", stage);

    let mut accumulate = Circuit::new(ol.layout.clone());
    for (j, &value) in merged_sample.iter().enumerate() {
        let mag = ol.spec.encode(value)? & ((1u64 << t) - 1);

        let mut load = Circuit::new(ol.layout.clone());
        for bit in 0..t {
            if mag >> bit & 1 == 1 {
                load.push(Gate::x(data[bit]))?;
            }
        }
        if value < 0 {
            load.push(Gate::x(data[t]))?;
        }

        let w_j = ol.weight_component(j);
        let mul = multiplier_circuit(&ol.layout, &w_j[..t], &data[..t], &prod[..2 * t])?;
        let sx = sign_xor_circuit(&ol.layout, w_j[t], data[t], psign)?;
        let comp = to_complement_circuit(&ol.layout, psign, prod)?;
        let add = adder_circuit(&ol.layout, prod, acc)?;

        accumulate.extend(&load)?;
        accumulate.extend(&mul)?;
        accumulate.extend(&sx)?;
        accumulate.extend(&comp)?;
        accumulate.extend(&add)?;
        accumulate.extend(&comp.inverse())?;
        accumulate.extend(&sx.inverse())?;
        accumulate.extend(&mul.inverse())?;
        accumulate.extend(&load.inverse())?;
    }
    if label < 0 {
        // acc ← acc - 1, so the sign readout below tests w.x̃ >= 1
        let minus_one = (1u64 << acc.len()) - 1;
        accumulate.extend(&constant_add_circuit(&ol.layout, acc, minus_one)?)?;
    }

    let mut stage_circuit = accumulate.clone();
    // c_k = NOT(sign bit of the accumulated sum): ties land on the >= 0 side
    let c_k = ol.cls_qubit(stage);
    stage_circuit.push(Gate::cnot(*acc.last().unwrap(), c_k))?;
    stage_circuit.push(Gate::x(c_k))?;
    stage_circuit.extend(&accumulate.inverse())?;
    Ok(stage_circuit)
}

#[derive(Clone, Debug)]
pub struct OracleBundle {
    pub circuit: Circuit,
    pub oracle_layout: OracleLayout,
    pub qubit_count: usize,
    pub gate_stats: GateStats,
}

/// Build the full phase oracle: K classifier stages, one kickback onto the
/// |−⟩ ancilla conditioned on every classification qubit, then stage
/// uncomputation in reverse.
pub fn oracle_circuit(
    encoded: &EncodedDataset,
    mode: RegisterMode,
) -> Result<OracleBundle> {
    if encoded.merged.is_empty() {
        return Err(Error::Structural("oracle needs a nonempty dataset".into()));
    }
    let ol = OracleLayout::build(encoded.features, encoded.merged.len(), encoded.spec, mode)?;
    let mut circuit = Circuit::new(ol.layout.clone());
    let stages: Vec<Circuit> = encoded
        .merged
        .iter()
        .zip(&encoded.labels)
        .enumerate()
        .map(|(k, (row, &y))| classifier_stage_circuit(&ol, row, y, k))
        .collect::<Result<_>>()?;
    for s in &stages {
        circuit.extend(s)?;
    }
    let anc = ol.anc_qubit();
    let cls: Vec<usize> = (0..ol.num_samples).map(|k| ol.cls_qubit(k)).collect();
    circuit.push(Gate::x(anc))?;
    circuit.push(Gate::h(anc))?;
    circuit.push(Gate::mcx(cls, anc))?;
    circuit.push(Gate::h(anc))?;
    circuit.push(Gate::x(anc))?;
    for s in stages.iter().rev() {
        circuit.extend(&s.inverse())?;
    }
    let gate_stats = circuit.stats();
    let qubit_count = ol.layout.total_qubits();
    Ok(OracleBundle {
        circuit,
        oracle_layout: ol,
        qubit_count,
        gate_stats,
    })
}

/// Amplitude tolerance for basis-state probes of the oracle.
const PHASE_EPS: f64 = 1e-9;

/// Simulate the oracle on every weight basis state and return the codes whose
/// phase flipped. Also asserts scratch cleanliness and phase purity: each
/// probe must come back as exactly ±1 on its input index.
///
/// The weight register is control-only in the oracle, so each probe runs the
/// circuit specialized to the classical weight code, on the scratch subsystem
/// alone — exponentially cheaper than full-width simulation per probe.
pub fn marked_codes(bundle: &OracleBundle) -> Result<BTreeSet<u64>> {
    let total = bundle.oracle_layout.layout.total_qubits();
    if total > 24 {
        return Err(Error::Capacity(format!(
            "{total} qubits exceed the 24-qubit probe cap"
        )));
    }
    let wq = bundle.oracle_layout.weight_qubits();
    let mut marked = BTreeSet::new();
    for code in 0..1u64 << wq.len() {
        let fixed: Vec<(usize, bool)> = wq
            .iter()
            .enumerate()
            .map(|(pos, &q)| (q, code >> pos & 1 == 1))
            .collect();
        let state = bundle.circuit.specialize(&fixed)?.simulate_index(0)?;
        let amp = state.amplitude(0);
        if amp.im.abs() > PHASE_EPS || (amp.re.abs() - 1.0).abs() > PHASE_EPS {
            return Err(Error::Structural(format!(
                "oracle probe {code} left scratch dirty or impure: amplitude {amp}"
            )));
        }
        if amp.re < 0.0 {
            marked.insert(code);
        }
    }
    Ok(marked)
}

/// Probability that every non-weight qubit reads 0, for scratch-cleanliness
/// checks on arbitrary states.
pub fn scratch_zero_probability(bundle: &OracleBundle, state: &Statevector) -> Result<f64> {
    let wq = bundle.oracle_layout.weight_qubits();
    let total = bundle.oracle_layout.layout.total_qubits();
    let scratch: Vec<usize> = (0..total).filter(|q| !wq.contains(q)).collect();
    state.probability(&scratch, &"0".repeat(scratch.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::version_space::brute_force_separators;

    fn spec1() -> FixedPointSpec {
        FixedPointSpec::new(1).unwrap()
    }

    #[test]
    fn dataset_validation() {
        assert!(Dataset::example().validate().is_ok());
        let bad = Dataset {
            features: 2,
            samples: vec![Sample { x: vec![1], y: 1 }],
        };
        assert!(bad.validate().is_err());
        let bad = Dataset {
            features: 1,
            samples: vec![Sample { x: vec![1], y: 2 }],
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn encode_dataset_merges_labels() {
        let d = Dataset {
            features: 2,
            samples: vec![
                Sample { x: vec![1, 0], y: -1 },
                Sample { x: vec![-1, 1], y: 1 },
            ],
        };
        let enc = encode_dataset(&d, spec1()).unwrap();
        assert_eq!(enc.merged, vec![vec![-1, 0], vec![-1, 1]]);
        assert_eq!(enc.labels, vec![-1, 1]);

        let out_of_range = Dataset {
            features: 1,
            samples: vec![Sample { x: vec![2], y: 1 }],
        };
        match encode_dataset(&out_of_range, spec1()) {
            Err(Error::Encoding(msg)) => assert!(msg.contains("sample 0"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_sample_marked_set() {
        // n=1, x̃ = (1): marked codes are exactly {+0, -0, +1}
        let d = Dataset {
            features: 1,
            samples: vec![Sample { x: vec![1], y: 1 }],
        };
        let enc = encode_dataset(&d, spec1()).unwrap();
        let bundle = oracle_circuit(&enc, RegisterMode::Reuse).unwrap();
        let marked = marked_codes(&bundle).unwrap();
        assert_eq!(marked, [0u64, 1, 2].into_iter().collect());
    }

    #[test]
    fn unsatisfiable_dataset_marks_nothing() {
        // the same point with both labels: merged vectors are x̃ and -x̃
        let d = Dataset {
            features: 1,
            samples: vec![
                Sample { x: vec![1], y: 1 },
                Sample { x: vec![1], y: -1 },
            ],
        };
        let enc = encode_dataset(&d, spec1()).unwrap();
        let bundle = oracle_circuit(&enc, RegisterMode::Reuse).unwrap();
        assert!(marked_codes(&bundle).unwrap().is_empty());
    }

    #[test]
    fn negative_label_excludes_boundary_weights() {
        // x = (1), y = -1 needs w.x < 0, so only w = -1 (code 0b11) is marked;
        // the zero codes tie and a tie activates to +1
        let d = Dataset {
            features: 1,
            samples: vec![Sample { x: vec![1], y: -1 }],
        };
        let enc = encode_dataset(&d, spec1()).unwrap();
        let bundle = oracle_circuit(&enc, RegisterMode::Reuse).unwrap();
        assert_eq!(marked_codes(&bundle).unwrap(), [3u64].into_iter().collect());
    }

    #[test]
    fn trivially_satisfiable_marks_everything() {
        let d = Dataset {
            features: 1,
            samples: vec![Sample { x: vec![0], y: 1 }],
        };
        let enc = encode_dataset(&d, spec1()).unwrap();
        let bundle = oracle_circuit(&enc, RegisterMode::Reuse).unwrap();
        let marked = marked_codes(&bundle).unwrap();
        assert_eq!(marked.len(), 4);
    }

    #[test]
    fn oracle_matches_brute_force_on_small_random_sets() {
        use rand::{Rng, SeedableRng};
        let spec = spec1();
        for seed in 0..5u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let d = Dataset {
                features: 1,
                samples: (0..rng.gen_range(1..=3))
                    .map(|_| Sample {
                        x: vec![rng.gen_range(-1i64..=1)],
                        y: if rng.gen_bool(0.5) { 1 } else { -1 },
                    })
                    .collect(),
            };
            let enc = encode_dataset(&d, spec).unwrap();
            let bundle = oracle_circuit(&enc, RegisterMode::Reuse).unwrap();
            assert_eq!(
                marked_codes(&bundle).unwrap(),
                brute_force_separators(&d, &spec).unwrap(),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn oracle_is_an_involution() {
        let d = Dataset {
            features: 1,
            samples: vec![Sample { x: vec![1], y: -1 }],
        };
        let enc = encode_dataset(&d, spec1()).unwrap();
        let bundle = oracle_circuit(&enc, RegisterMode::Reuse).unwrap();
        let wq: Vec<usize> = bundle.oracle_layout.weight_qubits().to_vec();
        let mut state = Statevector::zero(bundle.qubit_count).unwrap();
        for &q in &wq {
            state.apply_gate(&Gate::h(q)).unwrap();
        }
        let before = state.clone();
        bundle.circuit.apply_to(&mut state).unwrap();
        bundle.circuit.apply_to(&mut state).unwrap();
        for (a, b) in state.amplitudes().iter().zip(before.amplitudes()) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn per_sample_mode_is_wider_but_agrees() {
        let d = Dataset {
            features: 1,
            samples: vec![
                Sample { x: vec![1], y: 1 },
                Sample { x: vec![1], y: 1 },
            ],
        };
        let enc = encode_dataset(&d, spec1()).unwrap();
        let reuse = oracle_circuit(&enc, RegisterMode::Reuse).unwrap();
        let per = oracle_circuit(&enc, RegisterMode::PerSample).unwrap();
        assert!(per.qubit_count > reuse.qubit_count);
        assert_eq!(marked_codes(&per).unwrap(), marked_codes(&reuse).unwrap());
    }
}
