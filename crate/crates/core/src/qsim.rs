//! Minimal dense quantum simulator.
//!
//! Pure states carry 2^n amplitudes, density matrices 2^n x 2^n entries;
//! both are capped at desk scale (n <= 12 pure, n <= 8 density). Qubit 0 is
//! the most significant bit of a basis index, so the bitstring of an index
//! reads left to right across the register.
//!
//! Depolarizing noise uses the (1-p) rho + (p/3)(XrX + YrY + ZrZ)
//! convention, which reaches the maximally mixed state at p = 3/4.

use num_complex::Complex64;

use crate::{Error, Result};

pub const MAX_PURE_QUBITS: usize = 12;
pub const MAX_DENSITY_QUBITS: usize = 8;

const UNITARITY_TOL: f64 = 1e-10;

/// A gate: a 2^w x 2^w unitary bound to an ordered list of target qubits.
/// `targets[0]` is the most significant bit of the gate's local index space.
#[derive(Debug, Clone)]
pub struct GateOp {
    unitary: Vec<Complex64>,
    width: usize,
    targets: Vec<usize>,
}

impl GateOp {
    /// Build a gate from a row-major matrix, checking unitarity and that the
    /// targets are distinct.
    pub fn new(unitary: Vec<Complex64>, targets: Vec<usize>) -> Result<Self> {
        let width = targets.len();
        let dim = 1usize << width;
        if width == 0 {
            return Err(Error::Shape("gate needs at least one target".into()));
        }
        if unitary.len() != dim * dim {
            return Err(Error::Shape(format!(
                "gate on {width} qubits needs a {dim}x{dim} matrix, got {} entries",
                unitary.len()
            )));
        }
        for (i, &a) in targets.iter().enumerate() {
            if targets[i + 1..].contains(&a) {
                return Err(Error::Shape("gate targets must be distinct".into()));
            }
        }
        // U^dagger U = I
        for r in 0..dim {
            for c in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..dim {
                    acc += unitary[k * dim + r].conj() * unitary[k * dim + c];
                }
                let expect = if r == c { 1.0 } else { 0.0 };
                if (acc - expect).norm() > UNITARITY_TOL {
                    return Err(Error::Shape("matrix is not unitary".into()));
                }
            }
        }
        Ok(GateOp {
            unitary,
            width,
            targets,
        })
    }

    /// Diagonal gate from its phase vector.
    pub fn diagonal(phases: Vec<Complex64>, targets: Vec<usize>) -> Result<Self> {
        let dim = phases.len();
        if dim != 1 << targets.len() {
            return Err(Error::Shape(format!(
                "diagonal on {} qubits needs {} phases, got {dim}",
                targets.len(),
                1 << targets.len()
            )));
        }
        let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (i, p) in phases.into_iter().enumerate() {
            m[i * dim + i] = p;
        }
        GateOp::new(m, targets)
    }

    pub fn hadamard(target: usize) -> GateOp {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        GateOp {
            unitary: vec![s, s, s, -s],
            width: 1,
            targets: vec![target],
        }
    }

    pub fn pauli_x(target: usize) -> GateOp {
        let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        GateOp {
            unitary: vec![z, o, o, z],
            width: 1,
            targets: vec![target],
        }
    }

    pub fn pauli_y(target: usize) -> GateOp {
        let z = Complex64::new(0.0, 0.0);
        GateOp {
            unitary: vec![z, Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), z],
            width: 1,
            targets: vec![target],
        }
    }

    pub fn pauli_z(target: usize) -> GateOp {
        let z = Complex64::new(0.0, 0.0);
        GateOp {
            unitary: vec![Complex64::new(1.0, 0.0), z, z, Complex64::new(-1.0, 0.0)],
            width: 1,
            targets: vec![target],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn unitary(&self) -> &[Complex64] {
        &self.unitary
    }

    /// Same matrix on different qubits.
    pub fn with_targets(&self, targets: Vec<usize>) -> Result<GateOp> {
        if targets.len() != self.width {
            return Err(Error::Shape("retarget must keep the gate width".into()));
        }
        GateOp::new(self.unitary.clone(), targets)
    }

    fn validate_for(&self, n: usize) -> Result<()> {
        for &t in &self.targets {
            if t >= n {
                return Err(Error::Shape(format!(
                    "gate targets qubit {t} but the register has {n}"
                )));
            }
        }
        Ok(())
    }

    /// Precomputed embedding of this gate into an n-qubit register.
    fn index_map(&self, n: usize) -> LocalMap {
        let w = self.width;
        let bit_masks: Vec<usize> = self.targets.iter().map(|&q| 1 << (n - 1 - q)).collect();
        let tmask: usize = bit_masks.iter().sum();
        let mut offsets = vec![0usize; 1 << w];
        for (l, off) in offsets.iter_mut().enumerate() {
            for (j, &m) in bit_masks.iter().enumerate() {
                if (l >> (w - 1 - j)) & 1 == 1 {
                    *off |= m;
                }
            }
        }
        LocalMap {
            offsets,
            tmask,
            dim: 1 << n,
        }
    }
}

/// Global index offsets selected by each local gate index, plus the combined
/// target mask. Shared by state and density application.
struct LocalMap {
    offsets: Vec<usize>,
    tmask: usize,
    dim: usize,
}

impl LocalMap {
    /// Apply `unitary` (row-major over the local space) in place to the slots
    /// of `data` addressed by `lane_base + (base | offset) * stride`,
    /// optionally conjugating the matrix entries.
    fn apply(
        &self,
        data: &mut [Complex64],
        unitary: &[Complex64],
        stride: usize,
        lane_base: usize,
        conjugate: bool,
    ) {
        let gdim = self.offsets.len();
        let mut gathered = vec![Complex64::new(0.0, 0.0); gdim];
        for base in 0..self.dim {
            if base & self.tmask != 0 {
                continue;
            }
            for (l, &off) in self.offsets.iter().enumerate() {
                gathered[l] = data[lane_base + (base | off) * stride];
            }
            for (r, &off) in self.offsets.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (c, &g) in gathered.iter().enumerate() {
                    let u = unitary[r * gdim + c];
                    acc += if conjugate { u.conj() } else { u } * g;
                }
                data[lane_base + (base | off) * stride] = acc;
            }
        }
    }
}

/// Pure state of n qubits.
#[derive(Debug, Clone)]
pub struct QuantumState {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    /// |0...0> on n qubits.
    pub fn zero(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_PURE_QUBITS {
            return Err(Error::Shape(format!(
                "pure states support 1..={MAX_PURE_QUBITS} qubits, got {n}"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(QuantumState { n, amplitudes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn apply(&mut self, gate: &GateOp) -> Result<()> {
        gate.validate_for(self.n)?;
        let map = gate.index_map(self.n);
        map.apply(&mut self.amplitudes, gate.unitary(), 1, 0, false);
        Ok(())
    }

    /// Measurement distribution over the 2^n basis strings.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Density matrix of n qubits, row-major 2^n x 2^n.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    n: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    /// |0...0><0...0| on n qubits.
    pub fn zero_state(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_DENSITY_QUBITS {
            return Err(Error::Shape(format!(
                "density matrices support 1..={MAX_DENSITY_QUBITS} qubits, got {n}"
            )));
        }
        let dim = 1 << n;
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        entries[0] = Complex64::new(1.0, 0.0);
        Ok(DensityMatrix { n, entries })
    }

    pub fn from_pure(state: &QuantumState) -> Result<Self> {
        if state.n() > MAX_DENSITY_QUBITS {
            return Err(Error::Shape(format!(
                "density matrices support up to {MAX_DENSITY_QUBITS} qubits"
            )));
        }
        let dim = 1 << state.n();
        let a = state.amplitudes();
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                entries[r * dim + c] = a[r] * a[c].conj();
            }
        }
        Ok(DensityMatrix {
            n: state.n(),
            entries,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        self.entries[r * self.dim() + c]
    }

    pub fn trace(&self) -> Complex64 {
        let dim = self.dim();
        (0..dim).map(|i| self.entries[i * dim + i]).sum()
    }

    /// rho -> U rho U^dagger.
    pub fn apply(&mut self, gate: &GateOp) -> Result<()> {
        gate.validate_for(self.n)?;
        let map = gate.index_map(self.n);
        let dim = self.dim();
        // left multiply: transform each column as a vector
        for col in 0..dim {
            map.apply(&mut self.entries, gate.unitary(), dim, col, false);
        }
        // right multiply by U^dagger: conjugated matrix over each row
        for row in 0..dim {
            map.apply(&mut self.entries, gate.unitary(), 1, row * dim, true);
        }
        Ok(())
    }

    /// Single-qubit depolarizing channel on `qubit`:
    /// rho -> (1-p) rho + (p/3)(X rho X + Y rho Y + Z rho Z).
    pub fn depolarize(&mut self, qubit: usize, p: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Config(format!("depolarizing p={p} outside [0,1]")));
        }
        if qubit >= self.n {
            return Err(Error::Shape(format!(
                "depolarize targets qubit {qubit} but the register has {}",
                self.n
            )));
        }
        if p == 0.0 {
            return Ok(());
        }
        let paulis = [
            GateOp::pauli_x(qubit),
            GateOp::pauli_y(qubit),
            GateOp::pauli_z(qubit),
        ];
        let keep = 1.0 - p;
        let mix = p / 3.0;
        let mut acc: Vec<Complex64> = self.entries.iter().map(|&e| e * keep).collect();
        for pauli in &paulis {
            let mut conj = self.clone();
            conj.apply(pauli)?;
            for (a, e) in acc.iter_mut().zip(&conj.entries) {
                *a += *e * mix;
            }
        }
        self.entries = acc;
        Ok(())
    }

    /// Diagonal of rho: the computational-basis measurement distribution.
    pub fn probabilities(&self) -> Vec<f64> {
        let dim = self.dim();
        (0..dim).map(|i| self.entries[i * dim + i].re).collect()
    }
}

/// Per-qubit per-gate depolarizing probability.
#[derive(Debug, Clone, Copy)]
pub struct NoiseModel {
    pub p: f64,
}

impl NoiseModel {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Config(format!("noise p={p} outside [0,1]")));
        }
        Ok(NoiseModel { p })
    }
}

/// Run a circuit from |0...0> and return the measurement distribution.
///
/// Without noise the pure-state path is used. With noise the state evolves as
/// a density matrix and every qubit touched by a gate is depolarized right
/// after that gate.
pub fn run_circuit(gates: &[GateOp], n: usize, noise: Option<NoiseModel>) -> Result<Vec<f64>> {
    match noise {
        None => {
            let mut state = QuantumState::zero(n)?;
            for g in gates {
                state.apply(g)?;
            }
            Ok(state.probabilities())
        }
        Some(model) => {
            let mut rho = DensityMatrix::zero_state(n)?;
            for g in gates {
                rho.apply(g)?;
                for &q in g.targets() {
                    rho.depolarize(q, model.p)?;
                }
            }
            Ok(rho.probabilities())
        }
    }
}
