//! The three search procedures compared by the experiments: original Grover,
//! the exact phase-matching variant, and the Distributed Exact Grover
//! Algorithm (DEGA).
//!
//! DEGA splits an n-qubit unique-target search into floor(n/2) independent
//! local searches of width 2 (3 for the last segment when n is odd). Each
//! 2-wide segment runs one exact 2-qubit Grover step G = -H U0 H Ug; the
//! 3-wide segment runs the phase-matching step L = -H R0 H Rg twice with the
//! angle from [`compute_phi`]. The local answers concatenate to the global
//! target, so the noiseless measurement yields it with probability 1.
//!
//! Gate accounting policy: multi-controlled phase/diagonal gates count as one
//! gate of their width; the original Grover baseline is decomposed textbook
//! style (X-sandwich around one multi-controlled Z, explicit H/X singles),
//! which is what gives it the depth the noise comparison punishes.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::str::FromStr;

use crate::qsim::{run_circuit, GateOp, NoiseModel};
use crate::{Error, Result};

/// An n-qubit search with a unique marked bitstring tau.
#[derive(Debug, Clone)]
pub struct TargetSpec {
    n: usize,
    tau: String,
}

impl TargetSpec {
    pub fn new(tau: &str) -> Result<Self> {
        let n = tau.len();
        if n < 2 {
            return Err(Error::Config(format!(
                "target {tau:?} needs at least 2 bits"
            )));
        }
        if !tau.chars().all(|c| c == '0' || c == '1') {
            return Err(Error::Config(format!("target {tau:?} is not a bitstring")));
        }
        Ok(TargetSpec {
            n,
            tau: tau.to_string(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tau(&self) -> &str {
        &self.tau
    }

    /// Basis index of |tau> (qubit 0 = most significant bit).
    pub fn index(&self) -> usize {
        usize::from_str_radix(&self.tau, 2).expect("validated bitstring")
    }
}

/// One local search segment: `width` qubits starting at `start`, marked
/// locally by `tau_local`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub start: usize,
    pub width: usize,
    pub tau_local: String,
}

/// The floor(n/2)-segment plan DEGA runs.
#[derive(Debug, Clone)]
pub struct SubfunctionPlan {
    pub segments: Vec<Segment>,
}

/// Split tau into contiguous segments: all width 2 except the last, which is
/// 2 when n is even and 3 when n is odd.
pub fn partition(spec: &TargetSpec) -> SubfunctionPlan {
    let n = spec.n();
    let count = n / 2;
    let mut segments = Vec::with_capacity(count);
    for i in 0..count {
        let start = 2 * i;
        let width = if i + 1 == count { n - 2 * i } else { 2 };
        segments.push(Segment {
            start,
            width,
            tau_local: spec.tau()[start..start + width].to_string(),
        });
    }
    SubfunctionPlan { segments }
}

fn bit_index(bits: &str) -> usize {
    usize::from_str_radix(bits, 2).expect("validated bitstring")
}

/// Diagonal oracle |x> -> (-1)^{g(x)} |x> with the single marked item tau_i.
pub fn phase_flip_oracle(width: usize, tau_local: &str) -> Result<GateOp> {
    if tau_local.len() != width {
        return Err(Error::Config(format!(
            "oracle width {width} does not match target {tau_local:?}"
        )));
    }
    let mut phases = vec![Complex64::new(1.0, 0.0); 1 << width];
    phases[bit_index(tau_local)] = Complex64::new(-1.0, 0.0);
    GateOp::diagonal(phases, (0..width).collect())
}

/// Diagonal phase oracle |x> -> e^{i phi g(x)} |x> for the 3-qubit stage.
pub fn phase_rotation_oracle(tau_local: &str, phi: f64) -> Result<GateOp> {
    let width = tau_local.len();
    let mut phases = vec![Complex64::new(1.0, 0.0); 1 << width];
    phases[bit_index(tau_local)] = Complex64::from_polar(1.0, phi);
    GateOp::diagonal(phases, (0..width).collect())
}

/// U0 = I - 2|0..0><0..0|, optionally negated so a leading minus sign of a
/// composite operator can ride along on one gate.
fn zero_reflection(width: usize, negate: bool) -> GateOp {
    let sign = if negate { -1.0 } else { 1.0 };
    let mut phases = vec![Complex64::new(sign, 0.0); 1 << width];
    phases[0] = Complex64::new(-sign, 0.0);
    GateOp::diagonal(phases, (0..width).collect()).expect("diagonal phases are unitary")
}

/// R0 = I + (e^{i phi} - 1)|0..0><0..0|, optionally negated.
fn zero_phase_rotation(width: usize, phi: f64, negate: bool) -> GateOp {
    let sign = Complex64::new(if negate { -1.0 } else { 1.0 }, 0.0);
    let mut phases = vec![sign; 1 << width];
    phases[0] = sign * Complex64::from_polar(1.0, phi);
    GateOp::diagonal(phases, (0..width).collect()).expect("diagonal phases are unitary")
}

/// theta for a uniform search over 2^bits items.
fn theta_for(bits: usize) -> f64 {
    (1.0 / ((1u64 << bits) as f64)).sqrt().asin()
}

/// Phase angle of DEGA's 3-qubit stage:
/// theta = arcsin(sqrt(1/8)), J = floor((pi/2 - theta) / (2 theta)),
/// phi = 2 arcsin(sin(pi / (4J + 6)) / sin(theta)).
pub fn compute_phi() -> f64 {
    let theta = theta_for(3);
    let j = ((PI / 2.0 - theta) / (2.0 * theta)).floor();
    2.0 * ((PI / (4.0 * j + 6.0)).sin() / theta.sin()).asin()
}

/// Iteration count of the phase-matching variant on n qubits.
pub fn modified_iterations(n: usize) -> usize {
    let theta = theta_for(n);
    ((PI / 2.0 - theta) / (2.0 * theta)).floor() as usize + 1
}

/// Matching angle for [`modified_iterations`] iterations.
pub fn modified_phi(n: usize) -> f64 {
    let theta = theta_for(n);
    let j = modified_iterations(n) as f64;
    2.0 * ((PI / (4.0 * j + 2.0)).sin() / theta.sin()).asin()
}

/// Standard optimal iteration count round(pi/(4 theta_n) - 1/2) for the
/// original algorithm.
pub fn optimal_original_iterations(n: usize) -> usize {
    let theta = theta_for(n);
    (PI / (4.0 * theta) - 0.5).round().max(1.0) as usize
}

/// Closed-form success probability sin^2((2k+1) theta_n) of the original
/// algorithm after k iterations. This is the independent oracle the
/// simulation path is checked against.
pub fn original_closed_form(n: usize, iterations: usize) -> f64 {
    let theta = theta_for(n);
    ((2.0 * iterations as f64 + 1.0) * theta).sin().powi(2)
}

fn hadamards(targets: std::ops::Range<usize>) -> Vec<GateOp> {
    targets.map(GateOp::hadamard).collect()
}

/// Build the DEGA circuit: global H then one exact local search per segment.
pub fn dega_circuit(spec: &TargetSpec) -> Result<Vec<GateOp>> {
    let n = spec.n();
    let mut gates = hadamards(0..n);
    for seg in partition(spec).segments {
        let targets: Vec<usize> = (seg.start..seg.start + seg.width).collect();
        if seg.width == 2 {
            // G = -H U0 H Ug, minus sign folded into U0
            gates.push(phase_flip_oracle(2, &seg.tau_local)?.with_targets(targets.clone())?);
            gates.extend(targets.iter().map(|&q| GateOp::hadamard(q)));
            gates.push(zero_reflection(2, true).with_targets(targets.clone())?);
            gates.extend(targets.iter().map(|&q| GateOp::hadamard(q)));
        } else {
            // L = -H R0 H Rg applied twice
            let phi = compute_phi();
            for _ in 0..2 {
                gates.push(
                    phase_rotation_oracle(&seg.tau_local, phi)?.with_targets(targets.clone())?,
                );
                gates.extend(targets.iter().map(|&q| GateOp::hadamard(q)));
                gates.push(zero_phase_rotation(3, phi, true).with_targets(targets.clone())?);
                gates.extend(targets.iter().map(|&q| GateOp::hadamard(q)));
            }
        }
    }
    Ok(gates)
}

/// Textbook Grover: phase-flip oracle as X-sandwich + multi-controlled Z,
/// diffusion as H X MCZ X H.
pub fn grover_original_circuit(spec: &TargetSpec, iterations: Option<usize>) -> Result<Vec<GateOp>> {
    let n = spec.n();
    let iters = iterations.unwrap_or_else(|| optimal_original_iterations(n));
    let all: Vec<usize> = (0..n).collect();
    let mcz = {
        let mut phases = vec![Complex64::new(1.0, 0.0); 1 << n];
        phases[(1 << n) - 1] = Complex64::new(-1.0, 0.0);
        GateOp::diagonal(phases, all.clone())?
    };
    let zero_bits: Vec<usize> = spec
        .tau()
        .chars()
        .enumerate()
        .filter(|(_, c)| *c == '0')
        .map(|(q, _)| q)
        .collect();

    let mut gates = hadamards(0..n);
    for _ in 0..iters {
        // oracle: map |tau> onto |1..1>, flip its phase, map back
        gates.extend(zero_bits.iter().map(|&q| GateOp::pauli_x(q)));
        gates.push(mcz.clone());
        gates.extend(zero_bits.iter().map(|&q| GateOp::pauli_x(q)));
        // diffusion
        gates.extend(all.iter().map(|&q| GateOp::hadamard(q)));
        gates.extend(all.iter().map(|&q| GateOp::pauli_x(q)));
        gates.push(mcz.clone());
        gates.extend(all.iter().map(|&q| GateOp::pauli_x(q)));
        gates.extend(all.iter().map(|&q| GateOp::hadamard(q)));
    }
    Ok(gates)
}

/// Exact phase-matching search over all n qubits (the "modified" baseline):
/// J_n iterations of -H R0 H Rtau with matched angle phi_n.
pub fn grover_modified_circuit(spec: &TargetSpec) -> Result<Vec<GateOp>> {
    let n = spec.n();
    let all: Vec<usize> = (0..n).collect();
    let phi = modified_phi(n);
    let oracle = phase_rotation_oracle(spec.tau(), phi)?.with_targets(all.clone())?;
    let reflect = zero_phase_rotation(n, phi, true).with_targets(all.clone())?;

    let mut gates = hadamards(0..n);
    for _ in 0..modified_iterations(n) {
        gates.push(oracle.clone());
        gates.extend(all.iter().map(|&q| GateOp::hadamard(q)));
        gates.push(reflect.clone());
        gates.extend(all.iter().map(|&q| GateOp::hadamard(q)));
    }
    Ok(gates)
}

/// The three procedures the experiments compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Original,
    Modified,
    Dega,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Original, Variant::Modified, Variant::Dega];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Original => "original",
            Variant::Modified => "modified",
            Variant::Dega => "dega",
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "original" => Ok(Variant::Original),
            "modified" => Ok(Variant::Modified),
            "dega" => Ok(Variant::Dega),
            other => Err(Error::Config(format!("unknown variant {other:?}"))),
        }
    }
}

pub fn circuit_for(variant: Variant, spec: &TargetSpec) -> Result<Vec<GateOp>> {
    match variant {
        Variant::Original => grover_original_circuit(spec, None),
        Variant::Modified => grover_modified_circuit(spec),
        Variant::Dega => dega_circuit(spec),
    }
}

/// P(tau) for one variant, exact (no sampling); noisy runs use the density
/// path.
pub fn success_probability(
    variant: Variant,
    spec: &TargetSpec,
    noise: Option<NoiseModel>,
) -> Result<f64> {
    let gates = circuit_for(variant, spec)?;
    let probs = run_circuit(&gates, spec.n(), noise)?;
    Ok(probs[spec.index()])
}

/// Bucket membership probe used by the rainbow lookup.
///
/// Runs DEGA over the k-slot space with the lookup offset as the marked item,
/// then classically confirms the measured slot is actually occupied. Returns
/// whether the offset is present.
pub fn search_bucket(membership: &[bool], lookup_offset: u64) -> Result<bool> {
    let k = membership.len();
    if k < 4 || !k.is_power_of_two() {
        return Err(Error::Engine(format!(
            "bucket size {k} is not a power of two >= 4"
        )));
    }
    if lookup_offset >= k as u64 {
        return Err(Error::Engine(format!(
            "lookup offset {lookup_offset} outside bucket of size {k}"
        )));
    }
    let n = k.trailing_zeros() as usize;
    let tau: String = (0..n)
        .map(|b| {
            if (lookup_offset >> (n - 1 - b)) & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect();
    let spec = TargetSpec::new(&tau)?;
    let probs = run_circuit(&dega_circuit(&spec)?, n, None)?;
    let outcome = probs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty distribution");
    Ok(membership[outcome])
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-9;

    #[test]
    fn partition_examples() {
        let plan = partition(&TargetSpec::new("0011").unwrap());
        assert_eq!(
            plan.segments,
            vec![
                Segment { start: 0, width: 2, tau_local: "00".into() },
                Segment { start: 2, width: 2, tau_local: "11".into() },
            ]
        );

        let plan = partition(&TargetSpec::new("11").unwrap());
        assert_eq!(
            plan.segments,
            vec![Segment { start: 0, width: 2, tau_local: "11".into() }]
        );

        let plan = partition(&TargetSpec::new("01011").unwrap());
        assert_eq!(
            plan.segments,
            vec![
                Segment { start: 0, width: 2, tau_local: "01".into() },
                Segment { start: 2, width: 3, tau_local: "011".into() },
            ]
        );
    }

    /// Brute-force g_i as OR over the fixed-bit subfunctions f_{i,j} and
    /// check the unique satisfying input equals the plan's segment.
    fn brute_force_segment_solutions(tau: &str) -> Vec<(usize, Vec<usize>)> {
        let n = tau.len();
        let target = usize::from_str_radix(tau, 2).unwrap();
        let f = |x: usize| (x == target) as u8;
        let plan = partition(&TargetSpec::new(tau).unwrap());
        let mut out = Vec::new();
        for (i, seg) in plan.segments.iter().enumerate() {
            let rest_bits = n - seg.width;
            let mut solutions = Vec::new();
            for m in 0..1usize << seg.width {
                // OR over every configuration of the fixed bits
                let mut any = 0;
                for y in 0..1usize << rest_bits {
                    let suffix_bits = n - seg.start - seg.width;
                    let prefix = y >> suffix_bits;
                    let suffix = y & ((1 << suffix_bits) - 1);
                    let x = (prefix << (seg.width + suffix_bits)) | (m << suffix_bits) | suffix;
                    any |= f(x);
                }
                if any == 1 {
                    solutions.push(m);
                }
            }
            out.push((i, solutions));
        }
        out
    }

    #[test]
    fn partition_matches_subfunction_or_definition() {
        for tau in ["11", "001", "0011", "01011", "110101"] {
            let plan = partition(&TargetSpec::new(tau).unwrap());
            for (i, sols) in brute_force_segment_solutions(tau) {
                assert_eq!(sols.len(), 1, "tau={tau} segment {i} not unique");
                assert_eq!(
                    sols[0],
                    usize::from_str_radix(&plan.segments[i].tau_local, 2).unwrap(),
                    "tau={tau} segment {i}"
                );
            }
        }
    }

    #[test]
    fn phase_flip_oracle_diagonals() {
        let g = phase_flip_oracle(2, "00").unwrap();
        let d: Vec<f64> = (0..4).map(|i| g.unitary()[i * 4 + i].re).collect();
        assert_eq!(d, vec![-1.0, 1.0, 1.0, 1.0]);

        let g = phase_flip_oracle(2, "11").unwrap();
        let d: Vec<f64> = (0..4).map(|i| g.unitary()[i * 4 + i].re).collect();
        assert_eq!(d, vec![1.0, 1.0, 1.0, -1.0]);
    }

    #[test]
    fn phase_flip_oracle_is_involution() {
        let g = phase_flip_oracle(3, "101").unwrap();
        let dim = 8;
        for r in 0..dim {
            for c in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..dim {
                    acc += g.unitary()[r * dim + k] * g.unitary()[k * dim + c];
                }
                let expect = if r == c { 1.0 } else { 0.0 };
                assert!((acc - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn phase_rotation_special_angles() {
        // phi = pi reduces to the phase flip
        let rot = phase_rotation_oracle("011", PI).unwrap();
        let flip = phase_flip_oracle(3, "011").unwrap();
        for (a, b) in rot.unitary().iter().zip(flip.unitary()) {
            assert!((a - b).norm() < 1e-12);
        }
        // phi = 0 is the identity
        let id = phase_rotation_oracle("011", 0.0).unwrap();
        for (i, a) in id.unitary().iter().enumerate() {
            let expect = if i % 9 == 0 { 1.0 } else { 0.0 };
            assert!((a - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn phi_constant() {
        let theta = theta_for(3);
        assert!((theta - 0.3613671239067078).abs() < 1e-12);
        let j = ((PI / 2.0 - theta) / (2.0 * theta)).floor();
        assert_eq!(j as i64, 1);
        // frozen from an independent 40-digit evaluation of the phi equation
        assert!((compute_phi() - 2.1268800471555041).abs() < EPS);
    }

    #[test]
    fn dega_exact_on_paper_targets() {
        for tau in ["0011", "11", "01011"] {
            let spec = TargetSpec::new(tau).unwrap();
            let p = success_probability(Variant::Dega, &spec, None).unwrap();
            assert!((p - 1.0).abs() < EPS, "tau={tau}: P={p}");
        }
    }

    #[test]
    fn modified_exact_on_paper_targets() {
        for tau in ["11", "001", "1100", "01011"] {
            let spec = TargetSpec::new(tau).unwrap();
            let p = success_probability(Variant::Modified, &spec, None).unwrap();
            assert!((p - 1.0).abs() < EPS, "tau={tau}: P={p}");
        }
    }

    #[test]
    fn original_matches_closed_form() {
        // n=2 is the known exact case
        let spec = TargetSpec::new("11").unwrap();
        let p = success_probability(Variant::Original, &spec, None).unwrap();
        assert!((p - 1.0).abs() < EPS);

        for (tau, expect) in [("001", 0.9453125), ("0110", 0.9613189697265625)] {
            let spec = TargetSpec::new(tau).unwrap();
            let p = success_probability(Variant::Original, &spec, None).unwrap();
            assert!((p - expect).abs() < EPS, "tau={tau}: P={p}");
            let n = tau.len();
            let cf = original_closed_form(n, optimal_original_iterations(n));
            assert!((p - cf).abs() < EPS);
        }
    }

    #[test]
    fn depth_ordering_at_n4() {
        let spec = TargetSpec::new("0011").unwrap();
        let dega = dega_circuit(&spec).unwrap().len();
        let modified = grover_modified_circuit(&spec).unwrap().len();
        let original = grover_original_circuit(&spec, None).unwrap().len();
        assert!(dega < modified && modified < original, "{dega} {modified} {original}");
    }

    #[test]
    fn depth_ordering_general() {
        // at n <= 3 the partition is a single segment, so dega and modified
        // coincide; the distribution only wins depth from n = 4 up
        for tau in ["11", "001", "1111", "00000", "101010"] {
            let spec = TargetSpec::new(tau).unwrap();
            let dega = dega_circuit(&spec).unwrap().len();
            let modified = grover_modified_circuit(&spec).unwrap().len();
            let original = grover_original_circuit(&spec, None).unwrap().len();
            if spec.n() >= 4 {
                assert!(dega < modified, "tau={tau}: {dega} vs {modified}");
            } else {
                assert!(dega <= modified, "tau={tau}: {dega} vs {modified}");
            }
            assert!(modified < original, "tau={tau}: {modified} vs {original}");
        }
    }

    #[test]
    fn noisy_success_bounds() {
        use crate::qsim::NoiseModel;
        let spec = TargetSpec::new("0011").unwrap();
        // mild noise: strictly between the mixed floor and the exact value
        for variant in Variant::ALL {
            let p = success_probability(variant, &spec, Some(NoiseModel::new(0.05).unwrap()))
                .unwrap();
            let clean = success_probability(variant, &spec, None).unwrap();
            assert!(p > 1.0 / 16.0 && p < clean, "{}: {p}", variant.name());
        }
        // full depolarization after every gate lands at the mixed floor
        for variant in Variant::ALL {
            let p = success_probability(variant, &spec, Some(NoiseModel::new(1.0).unwrap()))
                .unwrap();
            assert!((p - 1.0 / 16.0).abs() < 0.02, "{}: {p}", variant.name());
        }
    }

    #[test]
    fn search_bucket_examples() {
        let mut membership = vec![false; 16];
        membership[11] = true;
        assert!(search_bucket(&membership, 11).unwrap());
        assert!(!search_bucket(&membership, 3).unwrap());
        assert!(!search_bucket(&[false; 16], 5).unwrap());

        let mut two = vec![false; 16];
        two[3] = true;
        two[11] = true;
        assert!(search_bucket(&two, 3).unwrap());
        assert!(search_bucket(&two, 11).unwrap());
        assert!(!search_bucket(&two, 4).unwrap());
    }

    #[test]
    fn search_bucket_rejects_bad_spaces() {
        assert!(search_bucket(&[false; 12], 0).is_err());
        assert!(search_bucket(&[false; 2], 0).is_err());
        assert!(search_bucket(&[false; 16], 16).is_err());
    }

    #[test]
    fn variant_parsing() {
        assert_eq!(Variant::from_str("dega").unwrap(), Variant::Dega);
        assert_eq!(Variant::from_str("Original").unwrap(), Variant::Original);
        assert!(Variant::from_str("fancy").is_err());
    }
}
