//! Amplitude amplification over superposed weight candidates: superposition
//! preparation, diffusion, iteration scheduling, the analytic success
//! probability, and the end-to-end training driver with classical
//! verification of every measured candidate.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuit::{Circuit, Gate, RegisterLayout};
use crate::error::{Error, Result};
use crate::oracle::{encode_dataset, oracle_circuit, Dataset, OracleBundle, RegisterMode};
use crate::qft_arith::FixedPointSpec;
use crate::statevector::{index_to_bits, CountTable, Statevector};
use crate::version_space::{brute_force_separators, separates};

/// Search geometry for a known or unknown marked count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GroverPlan {
    pub candidates: u64,
    pub marked: Option<u64>,
    pub iterations: u64,
    /// arcsin(sqrt(k/N)) when the marked count is known.
    pub theta: Option<f64>,
}

impl GroverPlan {
    pub fn for_known(candidates: u64, marked: u64) -> Result<Self> {
        let iterations = optimal_iterations(candidates, marked)?;
        Ok(GroverPlan {
            candidates,
            marked: Some(marked),
            iterations,
            theta: Some((marked as f64 / candidates as f64).sqrt().asin()),
        })
    }
}

/// floor((pi/4) sqrt(N/k)), clamped to at least one iteration.
pub fn optimal_iterations(candidates: u64, marked: u64) -> Result<u64> {
    if marked == 0 {
        return Err(Error::NoSolution(
            "no marked states; use the unknown-count schedule".into(),
        ));
    }
    if marked > candidates {
        return Err(Error::Structural("marked count exceeds candidate count".into()));
    }
    let j = (std::f64::consts::FRAC_PI_4 * (candidates as f64 / marked as f64).sqrt()).floor();
    Ok((j as u64).max(1))
}

/// sin^2((2j+1) arcsin(sqrt(k/N))): marked-subspace probability after j
/// oracle/diffusion rounds from the uniform start.
pub fn analytic_success(candidates: u64, marked: u64, iterations: u64) -> f64 {
    let theta = (marked as f64 / candidates as f64).sqrt().asin();
    ((2 * iterations + 1) as f64 * theta).sin().powi(2)
}

/// H on every weight qubit.
pub fn uniform_superposition_circuit(
    layout: &RegisterLayout,
    weight_register: &[usize],
) -> Result<Circuit> {
    let mut c = Circuit::new(layout.clone());
    for &q in weight_register {
        c.push(Gate::h(q))?;
    }
    Ok(c)
}

/// Reflection about the uniform superposition on the weight register only
/// (up to a global phase of -1); identity on every other qubit.
pub fn diffusion_circuit(layout: &RegisterLayout, weight_register: &[usize]) -> Result<Circuit> {
    let mut c = Circuit::new(layout.clone());
    for &q in weight_register {
        c.push(Gate::h(q))?;
    }
    for &q in weight_register {
        c.push(Gate::x(q))?;
    }
    let (&target, controls) = weight_register.split_last().unwrap();
    c.push(Gate::mcphase(std::f64::consts::PI, controls.to_vec(), target))?;
    for &q in weight_register {
        c.push(Gate::x(q))?;
    }
    for &q in weight_register {
        c.push(Gate::h(q))?;
    }
    Ok(c)
}

/// Full search circuit: uniform superposition then `iterations` repetitions
/// of oracle followed by diffusion.
pub fn grover_circuit(bundle: &OracleBundle, iterations: u64) -> Result<Circuit> {
    let layout = &bundle.oracle_layout.layout;
    let wq = bundle.oracle_layout.weight_qubits();
    let mut c = uniform_superposition_circuit(layout, wq)?;
    let diffusion = diffusion_circuit(layout, wq)?;
    for _ in 0..iterations {
        c.extend(&bundle.circuit)?;
        c.extend(&diffusion)?;
    }
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IterationMode {
    Fixed(u64),
    /// Exponential schedule for an unknown marked count: the iteration bound
    /// doubles (capped at sqrt(N)) and j is drawn uniformly below it; every
    /// measured candidate is verified classically.
    Auto,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TrainConfig {
    pub iterations: IterationMode,
    pub shots: u64,
    pub seed: u64,
    pub max_restarts: u32,
    pub mode: RegisterMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            iterations: IterationMode::Auto,
            shots: 300,
            seed: 0,
            max_restarts: 12,
            mode: RegisterMode::Reuse,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrainResult {
    pub weight: Vec<i64>,
    pub weight_code: String,
    pub oracle_calls: u64,
    pub shots_used: u64,
    pub verified: bool,
    /// Probability of the separating set, recorded before the first iteration
    /// and after each one, for the run that produced the answer.
    pub probability_trace: Vec<f64>,
    pub iterations_used: u64,
    pub qubit_count: usize,
    /// Weight-register measurement histogram of the answering run.
    pub counts: CountTable,
}

struct Runner<'a> {
    bundle: &'a OracleBundle,
    diffusion: Circuit,
    weight_qubits: Vec<usize>,
    separator_codes: std::collections::BTreeSet<u64>,
}

impl<'a> Runner<'a> {
    fn marked_probability(&self, state: &Statevector) -> Result<f64> {
        let marginal = state.marginal(&self.weight_qubits)?;
        Ok(self
            .separator_codes
            .iter()
            .map(|&c| marginal[c as usize])
            .sum())
    }

    /// Simulate `iterations` rounds, recording the marked probability before
    /// the first round and after each one.
    fn run(&self, iterations: u64) -> Result<(Statevector, Vec<f64>)> {
        let layout = &self.bundle.oracle_layout.layout;
        let mut state = Statevector::zero(layout.total_qubits())?;
        for &q in &self.weight_qubits {
            state.apply_gate(&Gate::h(q))?;
        }
        let mut trace = vec![self.marked_probability(&state)?];
        for _ in 0..iterations {
            self.bundle.circuit.apply_to(&mut state)?;
            self.diffusion.apply_to(&mut state)?;
            trace.push(self.marked_probability(&state)?);
        }
        Ok((state, trace))
    }
}

/// End-to-end training: Grover search over all weight codes with classical
/// verification of the measured candidate, restarting on failure.
pub fn train(dataset: &Dataset, spec: FixedPointSpec, config: &TrainConfig) -> Result<TrainResult> {
    let encoded = encode_dataset(dataset, spec)?;
    let bundle = oracle_circuit(&encoded, config.mode)?;
    let wq: Vec<usize> = bundle.oracle_layout.weight_qubits().to_vec();
    let candidates = 1u64 << wq.len();
    let separator_codes = brute_force_separators(dataset, &spec)?;
    let runner = Runner {
        bundle: &bundle,
        diffusion: diffusion_circuit(&bundle.oracle_layout.layout, &wq)?,
        weight_qubits: wq.clone(),
        separator_codes,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut oracle_calls = 0u64;
    let mut shots_used = 0u64;
    let mut bound = 1.0f64;
    let bound_cap = (candidates as f64).sqrt().ceil();
    let mut last: Option<TrainResult> = None;

    let rounds = match config.iterations {
        IterationMode::Fixed(_) => 1,
        IterationMode::Auto => config.max_restarts.max(1),
    };
    for _ in 0..rounds {
        let j = match config.iterations {
            IterationMode::Fixed(j) => j,
            IterationMode::Auto => rng.gen_range(0..bound.ceil() as u64),
        };
        let (state, trace) = runner.run(j)?;
        oracle_calls += j;
        let counts = state.measure_counts(&wq, config.shots.max(1), rng.next_u64())?;
        shots_used += counts.total_shots;
        let top = counts
            .entries
            .iter()
            .max_by_key(|(_, &c)| c)
            .map(|(bits, _)| bits.clone())
            .expect("at least one outcome");
        let code = u64::from_str_radix(&top, 2).expect("binary outcome");
        let weight = spec.decode_vector(code, dataset.features);
        let verified = separates(&weight, dataset);
        let result = TrainResult {
            weight,
            weight_code: index_to_bits(code as usize, wq.len()),
            oracle_calls,
            shots_used,
            verified,
            probability_trace: trace,
            iterations_used: j,
            qubit_count: bundle.qubit_count,
            counts,
        };
        if verified {
            return Ok(result);
        }
        last = Some(result);
        bound = (bound * 2.0).min(bound_cap);
    }
    Ok(last.expect("at least one round"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Sample;
    use approx::assert_abs_diff_eq;

    fn spec1() -> FixedPointSpec {
        FixedPointSpec::new(1).unwrap()
    }

    #[test]
    fn optimal_iteration_examples() {
        assert_eq!(optimal_iterations(16, 1).unwrap(), 3);
        assert_eq!(optimal_iterations(16, 16).unwrap(), 1);
        assert_eq!(optimal_iterations(1024, 1).unwrap(), 25);
        assert!(matches!(optimal_iterations(16, 0), Err(Error::NoSolution(_))));
    }

    #[test]
    fn analytic_success_examples() {
        assert_abs_diff_eq!(analytic_success(16, 1, 0), 1.0 / 16.0, epsilon = 1e-12);
        // sin(arcsin(1/4)) is exact, so these probabilities are dyadic
        assert_abs_diff_eq!(analytic_success(16, 1, 2), 0.908447265625, epsilon = 1e-12);
        assert_abs_diff_eq!(analytic_success(16, 1, 3), 0.9613189697265625, epsilon = 1e-12);
    }

    #[test]
    fn superposition_amplitudes() {
        let layout = RegisterLayout::contiguous(&[("w", 4)]).unwrap();
        let c = uniform_superposition_circuit(&layout, layout.qubits("w").unwrap()).unwrap();
        let sv = c.simulate("0000").unwrap();
        for i in 0..16 {
            assert_abs_diff_eq!(sv.amplitude(i).re, 0.25, epsilon = 1e-12);
        }
        let reg: Vec<usize> = (0..4).collect();
        assert_abs_diff_eq!(sv.probability(&reg, "0110").unwrap(), 1.0 / 16.0, epsilon = 1e-12);
    }

    #[test]
    fn diffusion_fixes_uniform_state() {
        let layout = RegisterLayout::contiguous(&[("w", 3)]).unwrap();
        let wq = layout.qubits("w").unwrap().to_vec();
        let sup = uniform_superposition_circuit(&layout, &wq).unwrap();
        let diff = diffusion_circuit(&layout, &wq).unwrap();
        let sv = sup.compose(&diff).unwrap().simulate("000").unwrap();
        let phase = sv.amplitude(0) / sv.amplitude(0).norm();
        for i in 0..8 {
            assert!((sv.amplitude(i) - phase * 8f64.sqrt().recip()).norm() < 1e-9);
        }
    }

    #[test]
    fn one_qubit_diffusion_matrix() {
        // reflection about |+> up to global phase: -(I - 2|+><+|)
        let layout = RegisterLayout::contiguous(&[("w", 1)]).unwrap();
        let diff = diffusion_circuit(&layout, layout.qubits("w").unwrap()).unwrap();
        let col0 = diff.simulate("0").unwrap();
        let col1 = diff.simulate("1").unwrap();
        // 2|+><+| - I = [[0, 1], [1, 0]] so allow either global sign
        let sign = col0.amplitude(1).re.signum();
        assert!((col0.amplitude(0).norm()) < 1e-9);
        assert!((col0.amplitude(1).re - sign).abs() < 1e-9);
        assert!((col1.amplitude(0).re - sign).abs() < 1e-9);
        assert!((col1.amplitude(1).norm()) < 1e-9);
    }

    #[test]
    fn diffusion_is_identity_off_register() {
        let layout = RegisterLayout::contiguous(&[("w", 2), ("s", 2)]).unwrap();
        let diff = diffusion_circuit(&layout, layout.qubits("w").unwrap()).unwrap();
        for scratch in 0..4usize {
            let init = scratch << 2;
            let sv = diff.simulate_index(init).unwrap();
            let sq = layout.qubits("s").unwrap();
            let pattern = index_to_bits(scratch, 2);
            assert_abs_diff_eq!(sv.probability(sq, &pattern).unwrap(), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn small_grover_matches_analytic() {
        // n=1, t=1: dataset with marked set {+0, -0, +1} -> k=3, N=4
        let d = Dataset {
            features: 1,
            samples: vec![Sample { x: vec![1], y: 1 }],
        };
        let enc = encode_dataset(&d, spec1()).unwrap();
        let bundle = oracle_circuit(&enc, RegisterMode::Reuse).unwrap();
        let wq = bundle.oracle_layout.weight_qubits().to_vec();
        for j in 0..3u64 {
            let c = grover_circuit(&bundle, j).unwrap();
            let sv = c.simulate(&"0".repeat(bundle.qubit_count)).unwrap();
            let marginal = sv.marginal(&wq).unwrap();
            let p = marginal[0] + marginal[1] + marginal[2];
            assert_abs_diff_eq!(p, analytic_success(4, 3, j), epsilon = 1e-9);
        }
    }

    #[test]
    fn train_unsatisfiable_reports_unverified() {
        // same point, both labels: no weight can satisfy both
        let d = Dataset {
            features: 1,
            samples: vec![
                Sample { x: vec![1], y: 1 },
                Sample { x: vec![1], y: -1 },
            ],
        };
        let config = TrainConfig {
            max_restarts: 3,
            shots: 50,
            ..Default::default()
        };
        let r = train(&d, spec1(), &config).unwrap();
        assert!(!r.verified);
    }

    #[test]
    fn train_trivial_dataset_succeeds_immediately() {
        let d = Dataset {
            features: 1,
            samples: vec![Sample { x: vec![0], y: 1 }],
        };
        let r = train(&d, spec1(), &TrainConfig::default()).unwrap();
        assert!(r.verified);
        assert_eq!(r.oracle_calls, 0); // first auto round draws j = 0
    }

    #[test]
    fn train_fixed_mode_on_small_dataset() {
        let d = Dataset {
            features: 1,
            samples: vec![Sample { x: vec![1], y: -1 }],
        };
        let config = TrainConfig {
            iterations: IterationMode::Fixed(1),
            shots: 200,
            seed: 3,
            ..Default::default()
        };
        let r = train(&d, spec1(), &config).unwrap();
        assert!(r.verified);
        assert!(separates(&r.weight, &d));
        assert_eq!(r.probability_trace.len(), 2);
    }
}
