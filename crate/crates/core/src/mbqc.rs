//! Dense statevector executor for adaptive measurement patterns.
//!
//! # Conventions
//!
//! A step measures its qubit in the basis
//! `|±_α⟩ = (|0⟩ ± e^{iα}|1⟩)/√2`; outcome bit `0` is `+`, `1` is `−`.
//! Before measuring, the angle is adapted from earlier outcomes:
//!
//! ```text
//! α' = (−1)^{s_X} · α + s_Z · π
//! ```
//!
//! where `s_X` (`s_Z`) is the XOR of the outcomes of the steps listed in the
//! step's X (Z) domain. Each output qubit carries its own X and Z domains;
//! the recorded byproduct is `X^{s_X} Z^{s_Z}`, i.e. the residual state is
//! `X^{s_X} Z^{s_Z} |ψ_ideal⟩`.
//!
//! With these conventions one measurement on a two-qubit chain maps the
//! input `ψ` to `X^s J(α) ψ`, `J(α) = H · diag(1, e^{−iα})`. The five-qubit
//! chain built by [`linear_chain_pattern`] therefore realizes
//!
//! ```text
//! U(α₁..α₄) = J(α₄) J(α₃) J(α₂) J(α₁)
//!           ∝ H · Rz(−α₄) · Rx(−α₃) · Rz(−α₂) · Rx(−α₁) · H
//! ```
//!
//! on the input qubit, for every outcome branch, after the byproduct is
//! undone.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::edges::EdgeSet;
use crate::error::{Error, Result};
use crate::graphstate::PauliBasis;

pub const MAX_QUBITS: usize = 20;

pub type Mat2 = [[Complex64; 2]; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementStep {
    pub qubit: usize,
    pub angle: f64,
    #[serde(default)]
    pub x_domain: Vec<usize>,
    #[serde(default)]
    pub z_domain: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputQubit {
    pub qubit: usize,
    #[serde(default)]
    pub x_domain: Vec<usize>,
    #[serde(default)]
    pub z_domain: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementPattern {
    pub num_qubits: usize,
    pub steps: Vec<MeasurementStep>,
    pub outputs: Vec<OutputQubit>,
}

/// Amplitudes for a set of input qubits; bit `k` of the index addresses
/// `qubits[k]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputState {
    pub qubits: Vec<usize>,
    pub amplitudes: Vec<Complex64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Byproduct {
    pub qubit: usize,
    pub x: bool,
    pub z: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatternResult {
    /// Outcome bit per step (0 ↔ `+`).
    pub outcomes: Vec<u8>,
    /// Conditional probability of each outcome given the earlier ones.
    pub step_probabilities: Vec<f64>,
    /// Angle actually used at each step.
    pub adapted_angles: Vec<f64>,
    /// State on the output qubits, bit `k` ↔ `outputs[k]`.
    pub residual_state: Vec<Complex64>,
    pub byproduct: Vec<Byproduct>,
}

impl PatternResult {
    pub fn probability(&self) -> f64 {
        self.step_probabilities.iter().product()
    }

    /// Residual with the recorded byproduct undone.
    pub fn corrected_state(&self) -> Vec<Complex64> {
        let mut state = self.residual_state.clone();
        for (k, b) in self.byproduct.iter().enumerate() {
            if b.x {
                apply_x(&mut state, k);
            }
            if b.z {
                apply_z(&mut state, k);
            }
        }
        state
    }
}

fn apply_x(state: &mut [Complex64], bit: usize) {
    let m = 1 << bit;
    for i in 0..state.len() {
        if i & m == 0 {
            state.swap(i, i | m);
        }
    }
}

fn apply_z(state: &mut [Complex64], bit: usize) {
    let m = 1 << bit;
    for (i, a) in state.iter_mut().enumerate() {
        if i & m != 0 {
            *a = -*a;
        }
    }
}

impl MeasurementPattern {
    pub fn validate(&self) -> Result<()> {
        if self.num_qubits > MAX_QUBITS {
            return Err(Error::Capacity(format!(
                "pattern uses {} qubits, the dense executor holds at most {MAX_QUBITS}",
                self.num_qubits
            )));
        }
        let mut measured = BTreeSet::new();
        for (k, step) in self.steps.iter().enumerate() {
            if step.qubit >= self.num_qubits {
                return Err(Error::Validation(format!("step {k} measures qubit {} outside the register", step.qubit)));
            }
            if !measured.insert(step.qubit) {
                return Err(Error::Validation(format!("qubit {} measured twice", step.qubit)));
            }
            if !step.angle.is_finite() {
                return Err(Error::Validation(format!("step {k} has a non-finite angle")));
            }
            if let Some(bad) = step.x_domain.iter().chain(&step.z_domain).find(|&&d| d >= k) {
                return Err(Error::Validation(format!("step {k} depends on step {bad}, which is not earlier")));
            }
        }
        let mut outputs = BTreeSet::new();
        for out in &self.outputs {
            if out.qubit >= self.num_qubits {
                return Err(Error::Validation(format!("output qubit {} outside the register", out.qubit)));
            }
            if measured.contains(&out.qubit) {
                return Err(Error::Validation(format!("output qubit {} is also measured", out.qubit)));
            }
            if !outputs.insert(out.qubit) {
                return Err(Error::Validation(format!("output qubit {} listed twice", out.qubit)));
            }
            if let Some(bad) = out.x_domain.iter().chain(&out.z_domain).find(|&&d| d >= self.steps.len()) {
                return Err(Error::Validation(format!("output {} depends on unknown step {bad}", out.qubit)));
            }
        }
        if measured.len() + outputs.len() != self.num_qubits {
            return Err(Error::Validation(
                "every qubit must be either measured or listed as an output".into(),
            ));
        }
        Ok(())
    }

    /// Pattern with no measurements whose outputs are all qubits in order.
    pub fn identity(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            steps: Vec::new(),
            outputs: (0..num_qubits).map(|qubit| OutputQubit { qubit, x_domain: vec![], z_domain: vec![] }).collect(),
        }
    }
}

fn parity(domain: &[usize], outcomes: &[u8]) -> u8 {
    domain.iter().fold(0, |acc, &k| acc ^ outcomes[k])
}

/// `(−1)^{s_X} α + s_Z π`.
pub fn adapt_angle(step: &MeasurementStep, outcomes: &[u8]) -> f64 {
    let sx = parity(&step.x_domain, outcomes);
    let sz = parity(&step.z_domain, outcomes);
    let signed = if sx == 1 { -step.angle } else { step.angle };
    signed + if sz == 1 { PI } else { 0.0 }
}

/// For angles on the `π/2` grid, the Pauli observable whose eigenvalue is
/// `sign · (−1)^s` for outcome bit `s`.
pub fn clifford_basis(angle: f64) -> Option<(PauliBasis, i8)> {
    let quarter = angle / (PI / 2.0);
    let k = quarter.round();
    if (quarter - k).abs() > 1e-9 {
        return None;
    }
    Some(match (k as i64).rem_euclid(4) {
        0 => (PauliBasis::X, 1),
        1 => (PauliBasis::Y, 1),
        2 => (PauliBasis::X, -1),
        _ => (PauliBasis::Y, -1),
    })
}

/// Statevector over the qubits still alive; bit `p` ↔ `live[p]`.
struct Register {
    amps: Vec<Complex64>,
    live: Vec<usize>,
}

impl Register {
    fn prepare(n: usize, edges: &EdgeSet, input: Option<&InputState>) -> Result<Self> {
        edges.check_bound(n).map_err(|e| Error::Validation(e.to_string()))?;
        let (in_qubits, in_amps): (Vec<usize>, Vec<Complex64>) = match input {
            Some(s) => (s.qubits.clone(), s.amplitudes.clone()),
            None => (Vec::new(), vec![Complex64::new(1.0, 0.0)]),
        };
        if in_amps.len() != 1 << in_qubits.len() {
            return Err(Error::Validation(format!(
                "{} input qubits need {} amplitudes, got {}",
                in_qubits.len(),
                1usize << in_qubits.len(),
                in_amps.len()
            )));
        }
        let distinct: BTreeSet<usize> = in_qubits.iter().copied().collect();
        if distinct.len() != in_qubits.len() || in_qubits.iter().any(|&q| q >= n) {
            return Err(Error::Validation("input qubits must be distinct register qubits".into()));
        }
        let norm: f64 = in_amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!("input state has norm² {norm}, expected 1")));
        }
        let plus = (0.5f64).powf((n - in_qubits.len()) as f64 / 2.0);
        let masks: Vec<usize> = edges.iter().map(|(a, b)| (1 << a) | (1 << b)).collect();
        let amps = (0..1usize << n)
            .map(|idx| {
                let local = in_qubits
                    .iter()
                    .enumerate()
                    .fold(0usize, |acc, (k, &q)| acc | (((idx >> q) & 1) << k));
                let flips = masks.iter().filter(|&&m| idx & m == m).count();
                let a = in_amps[local] * plus;
                if flips % 2 == 0 {
                    a
                } else {
                    -a
                }
            })
            .collect();
        Ok(Self { amps, live: (0..n).collect() })
    }

    /// Unnormalized branch of measuring `qubit` at `angle` with outcome bit
    /// `s`, with the qubit traced out.
    fn project(&self, qubit: usize, angle: f64, s: u8) -> (Vec<Complex64>, f64) {
        let p = self.live.iter().position(|&q| q == qubit).expect("qubit alive");
        let low = (1usize << p) - 1;
        let phase = Complex64::from_polar(if s == 0 { 1.0 } else { -1.0 }, -angle);
        let half = self.amps.len() / 2;
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut out = Vec::with_capacity(half);
        let mut weight = 0.0;
        for k in 0..half {
            let i0 = ((k & !low) << 1) | (k & low);
            let v = (self.amps[i0] + phase * self.amps[i0 | (1 << p)]) * r;
            weight += v.norm_sqr();
            out.push(v);
        }
        (out, weight)
    }

    fn commit(&mut self, qubit: usize, mut amps: Vec<Complex64>, weight: f64) {
        let scale = 1.0 / weight.sqrt();
        amps.iter_mut().for_each(|a| *a *= scale);
        self.amps = amps;
        self.live.retain(|&q| q != qubit);
    }

    /// Reorders the remaining state so that bit `k` ↔ `order[k]`.
    fn into_ordered(self, order: &[usize]) -> Vec<Complex64> {
        let pos: Vec<usize> = order
            .iter()
            .map(|q| self.live.iter().position(|l| l == q).expect("output alive"))
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (idx, a) in self.amps.iter().enumerate() {
            let target = pos.iter().enumerate().fold(0usize, |acc, (k, &p)| acc | (((idx >> p) & 1) << k));
            out[target] = *a;
        }
        out
    }
}

/// Probability below which a forced branch counts as impossible.
const IMPOSSIBLE: f64 = 1e-24;

fn execute<F>(
    edges: &EdgeSet,
    input: Option<&InputState>,
    pattern: &MeasurementPattern,
    mut choose: F,
) -> Result<Option<PatternResult>>
where
    F: FnMut(usize, f64) -> u8,
{
    pattern.validate()?;
    let mut reg = Register::prepare(pattern.num_qubits, edges, input)?;
    let mut outcomes = Vec::with_capacity(pattern.steps.len());
    let mut probs = Vec::with_capacity(pattern.steps.len());
    let mut angles = Vec::with_capacity(pattern.steps.len());
    for (k, step) in pattern.steps.iter().enumerate() {
        let angle = adapt_angle(step, &outcomes);
        let (plus, w_plus) = reg.project(step.qubit, angle, 0);
        let total: f64 = reg.amps.iter().map(|a| a.norm_sqr()).sum();
        let p_plus = (w_plus / total).clamp(0.0, 1.0);
        let s = choose(k, p_plus);
        let (branch, weight, p) = if s == 0 {
            (plus, w_plus, p_plus)
        } else {
            let (minus, w_minus) = reg.project(step.qubit, angle, 1);
            (minus, w_minus, (w_minus / total).clamp(0.0, 1.0))
        };
        if p < IMPOSSIBLE {
            return Ok(None);
        }
        reg.commit(step.qubit, branch, weight);
        outcomes.push(s);
        probs.push(p);
        angles.push(angle);
    }
    let order: Vec<usize> = pattern.outputs.iter().map(|o| o.qubit).collect();
    let byproduct = pattern
        .outputs
        .iter()
        .map(|o| Byproduct {
            qubit: o.qubit,
            x: parity(&o.x_domain, &outcomes) == 1,
            z: parity(&o.z_domain, &outcomes) == 1,
        })
        .collect();
    let mut residual = reg.into_ordered(&order);
    let norm = residual.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    residual.iter_mut().for_each(|a| *a /= norm);
    Ok(Some(PatternResult {
        outcomes,
        step_probabilities: probs,
        adapted_angles: angles,
        residual_state: residual,
        byproduct,
    }))
}

/// Runs the pattern, sampling each outcome from its Born probability.
pub fn run_pattern<R: Rng + ?Sized>(
    edges: &EdgeSet,
    input: Option<&InputState>,
    pattern: &MeasurementPattern,
    rng: &mut R,
) -> Result<PatternResult> {
    let result = execute(edges, input, pattern, |_, p_plus| u8::from(rng.random::<f64>() >= p_plus))?;
    Ok(result.expect("sampled branches have nonzero probability"))
}

/// Runs the pattern along a prescribed outcome string. Returns `None` when
/// that branch has zero probability.
pub fn run_branch(
    edges: &EdgeSet,
    input: Option<&InputState>,
    pattern: &MeasurementPattern,
    outcomes: &[u8],
) -> Result<Option<PatternResult>> {
    if outcomes.len() != pattern.steps.len() {
        return Err(Error::Validation(format!(
            "branch has {} outcomes for {} steps",
            outcomes.len(),
            pattern.steps.len()
        )));
    }
    execute(edges, input, pattern, |k, _| outcomes[k] & 1)
}

/// Probability of every outcome string, in binary counting order with step
/// 0 as the least significant bit.
pub fn branch_probabilities(
    edges: &EdgeSet,
    input: Option<&InputState>,
    pattern: &MeasurementPattern,
) -> Result<Vec<(Vec<u8>, f64)>> {
    let k = pattern.steps.len();
    if k > MAX_QUBITS {
        return Err(Error::Capacity(format!("{k} steps give too many branches to enumerate")));
    }
    (0..1usize << k)
        .map(|code| {
            let outcomes: Vec<u8> = (0..k).map(|b| ((code >> b) & 1) as u8).collect();
            let p = run_branch(edges, input, pattern, &outcomes)?.map_or(0.0, |r| r.probability());
            Ok((outcomes, p))
        })
        .collect()
}

/// Chain `0 − 1 − 2 − 3 − 4`, qubit 0 the input, qubit 4 the output.
pub fn linear_chain_edges() -> EdgeSet {
    EdgeSet::from_pairs([(0, 1), (1, 2), (2, 3), (3, 4)]).expect("valid chain")
}

pub fn linear_chain_pattern(angles: [f64; 4]) -> MeasurementPattern {
    let step = |qubit: usize, x_domain: Vec<usize>| MeasurementStep {
        qubit,
        angle: angles[qubit],
        x_domain,
        z_domain: vec![],
    };
    MeasurementPattern {
        num_qubits: 5,
        steps: vec![step(0, vec![]), step(1, vec![0]), step(2, vec![1]), step(3, vec![0, 2])],
        outputs: vec![OutputQubit { qubit: 4, x_domain: vec![1, 3], z_domain: vec![0, 2] }],
    }
}

fn matmul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, c) in row.iter_mut().enumerate() {
            *c = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// `J(α) = H · diag(1, e^{−iα})`.
pub fn j_gate(angle: f64) -> Mat2 {
    let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let e = Complex64::from_polar(1.0, -angle);
    [[r, r * e], [r, -r * e]]
}

/// `J(α₄) J(α₃) J(α₂) J(α₁)`.
pub fn euler_unitary(angles: [f64; 4]) -> Mat2 {
    angles.iter().fold(
        [[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]],
        |acc, &a| matmul(&j_gate(a), &acc),
    )
}

pub fn apply_mat2(m: &Mat2, v: [Complex64; 2]) -> [Complex64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

/// `|⟨a|b⟩|²` for normalized vectors.
pub fn fidelity(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm_sqr()
}

/// Runs the five-qubit chain on a single-qubit input and returns the result
/// together with the unitary it implements.
pub fn linear_cluster_gate<R: Rng + ?Sized>(
    angles: [f64; 4],
    input: [Complex64; 2],
    rng: &mut R,
) -> Result<(PatternResult, Mat2)> {
    let state = InputState { qubits: vec![0], amplitudes: input.to_vec() };
    let result = run_pattern(&linear_chain_edges(), Some(&state), &linear_chain_pattern(angles), rng)?;
    Ok((result, euler_unitary(angles)))
}

pub const PATTERN_SCHEMA_VERSION: u32 = 1;

/// Pattern file accepted by the CLI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternDocument {
    #[serde(default)]
    pub schema_version: Option<u32>,
    pub edges: EdgeSet,
    #[serde(default)]
    pub input: Option<InputDocument>,
    pub pattern: MeasurementPattern,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDocument {
    pub qubits: Vec<usize>,
    /// `[re, im]` pairs.
    pub amplitudes: Vec<[f64; 2]>,
}

impl InputDocument {
    pub fn to_state(&self) -> InputState {
        InputState {
            qubits: self.qubits.clone(),
            amplitudes: self.amplitudes.iter().map(|[re, im]| Complex64::new(*re, *im)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternReport {
    pub schema_version: u32,
    pub outcomes: Vec<u8>,
    pub step_probabilities: Vec<f64>,
    pub branch_probability: f64,
    pub adapted_angles: Vec<f64>,
    pub output_qubits: Vec<usize>,
    pub residual: Vec<[f64; 2]>,
    pub byproduct: Vec<Byproduct>,
}

impl PatternReport {
    pub fn new(result: &PatternResult) -> Self {
        Self {
            schema_version: PATTERN_SCHEMA_VERSION,
            outcomes: result.outcomes.clone(),
            step_probabilities: result.step_probabilities.clone(),
            branch_probability: result.probability(),
            adapted_angles: result.adapted_angles.clone(),
            output_qubits: result.byproduct.iter().map(|b| b.qubit).collect(),
            residual: result.residual_state.iter().map(|a| [a.re, a.im]).collect(),
            byproduct: result.byproduct.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn two_qubit_chain_hand_computation() {
        // input |0⟩ on qubit 0, CZ, measure qubit 0 at α = 0:
        //   (⟨0| ± ⟨1|)/√2 · (|0⟩|+⟩) = |+⟩/√2 for either sign,
        // so qubit 1 is H|0⟩ = |+⟩ up to X^s, with probability ½ per branch.
        let edges = EdgeSet::from_pairs([(0, 1)]).unwrap();
        let input = InputState { qubits: vec![0], amplitudes: vec![c(1.0, 0.0), c(0.0, 0.0)] };
        let pattern = MeasurementPattern {
            num_qubits: 2,
            steps: vec![MeasurementStep { qubit: 0, angle: 0.0, x_domain: vec![], z_domain: vec![] }],
            outputs: vec![OutputQubit { qubit: 1, x_domain: vec![0], z_domain: vec![] }],
        };
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for s in [0u8, 1] {
            let res = run_branch(&edges, Some(&input), &pattern, &[s]).unwrap().unwrap();
            assert!((res.probability() - 0.5).abs() < 1e-12);
            assert_eq!(res.byproduct[0].x, s == 1);
            let out = res.corrected_state();
            assert!((out[0] - c(r, 0.0)).norm() < 1e-12 && (out[1] - c(r, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn empty_pattern_returns_cluster_state() {
        let edges = EdgeSet::from_pairs([(0, 1), (1, 2)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let res = run_pattern(&edges, None, &MeasurementPattern::identity(3), &mut rng).unwrap();
        let oracle = crate::graphstate::statevector_oracle(&edges, 3).unwrap();
        for (a, b) in res.residual_state.iter().zip(&oracle) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(res.outcomes.is_empty());
    }

    #[test]
    fn trivial_angles_give_identity() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let input = [c(r, 0.0), c(r, 0.0)];
        for code in 0..16u8 {
            let outcomes: Vec<u8> = (0..4).map(|b| (code >> b) & 1).collect();
            let st = InputState { qubits: vec![0], amplitudes: input.to_vec() };
            let res = run_branch(&linear_chain_edges(), Some(&st), &linear_chain_pattern([0.0; 4]), &outcomes)
                .unwrap()
                .unwrap();
            assert!((fidelity(&res.corrected_state(), &input) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn seeded_runs_replay() {
        let angles = [0.3, -1.1, 2.0, 0.7];
        let input = [c(0.6, 0.0), c(0.0, 0.8)];
        let a = linear_cluster_gate(angles, input, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = linear_cluster_gate(angles, input, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a.0.outcomes, b.0.outcomes);
        assert_eq!(a.0.residual_state, b.0.residual_state);
    }

    #[test]
    fn euler_form_matches_rotations() {
        // H·Rz(−α₄)·Rx(−α₃)·Rz(−α₂)·Rx(−α₁)·H up to global phase
        let angles = [0.4, 1.3, -0.8, 2.2];
        let h = j_gate(0.0);
        let rz = |t: f64| [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), Complex64::from_polar(1.0, t)]];
        let rx = |t: f64| matmul(&h, &matmul(&rz(t), &h));
        let mut m = h;
        for (k, &a) in angles.iter().enumerate() {
            let g = if k % 2 == 0 { rx(-a) } else { rz(-a) };
            m = matmul(&g, &m);
        }
        m = matmul(&h, &m);
        let u = euler_unitary(angles);
        let overlap: Complex64 = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| m[i][j].conj() * u[i][j]).sum();
        assert!((overlap.norm() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn validation_errors() {
        let mut p = linear_chain_pattern([0.0; 4]);
        p.steps[1].x_domain = vec![1];
        assert!(matches!(p.validate(), Err(Error::Validation(_))));
        let mut p = linear_chain_pattern([0.0; 4]);
        p.steps[2].qubit = 0;
        assert!(matches!(p.validate(), Err(Error::Validation(_))));
        let mut p = MeasurementPattern::identity(21);
        p.outputs.truncate(3);
        assert!(matches!(p.validate(), Err(Error::Capacity(_))));
        let mut p = linear_chain_pattern([0.0; 4]);
        p.outputs.clear();
        assert!(matches!(p.validate(), Err(Error::Validation(_))));
    }

    #[test]
    fn clifford_angle_mapping() {
        assert_eq!(clifford_basis(0.0), Some((PauliBasis::X, 1)));
        assert_eq!(clifford_basis(PI / 2.0), Some((PauliBasis::Y, 1)));
        assert_eq!(clifford_basis(-PI), Some((PauliBasis::X, -1)));
        assert_eq!(clifford_basis(-PI / 2.0), Some((PauliBasis::Y, -1)));
        assert_eq!(clifford_basis(0.3), None);
    }

    #[test]
    fn branch_probabilities_sum_to_one() {
        let edges = EdgeSet::from_pairs([(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6)]).unwrap();
        let pattern = MeasurementPattern {
            num_qubits: 7,
            steps: (0..6)
                .map(|q| MeasurementStep { qubit: q, angle: 0.37 * q as f64, x_domain: vec![], z_domain: vec![] })
                .collect(),
            outputs: vec![OutputQubit { qubit: 6, x_domain: vec![], z_domain: vec![] }],
        };
        let total: f64 = branch_probabilities(&edges, None, &pattern).unwrap().iter().map(|b| b.1).sum();
        assert!((total - 1.0).abs() < 1e-10);
    }
}
