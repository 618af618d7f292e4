//! Dense statevector simulation.
//!
//! Qubit 0 is the least-significant bit of the amplitude index. Rotation
//! conventions: `RX/RY/RZ(θ) = exp(−iθσ/2)`, while `PauliRot(P, θ) =
//! exp(−iθP)` carries no factor of one half.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::encodings::BitString;
use crate::pauli::{PauliString, PauliSum, Phase};

/// Largest register the simulator will allocate.
pub const MAX_QUBITS: usize = 30;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("qubit {qubit} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("two-qubit gate needs distinct qubits, got {0} twice")]
    RepeatedQubit(usize),
    #[error("{0} qubits exceeds the simulator limit of {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("bit string has {got} entries for a {expected}-qubit register")]
    LengthMismatch { expected: usize, got: usize },
    #[error("gate refers to parameter slot {0} but no parameters were bound")]
    UnboundSlot(usize),
    #[error("circuit has {expected} parameter slots, got {got} values")]
    ParamLength { expected: usize, got: usize },
    #[error("expectation requires a Hermitian operator")]
    NonHermitian,
    #[error("expectation value has imaginary residue {0:e}")]
    ImaginaryResidue(f64),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A gate angle: fixed, or `scale · params[index]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    Value(f64),
    Slot { index: usize, scale: f64 },
}

impl Angle {
    pub fn slot(index: usize) -> Self {
        Angle::Slot { index, scale: 1.0 }
    }

    pub fn resolve(&self, params: Option<&[f64]>) -> Result<f64, SimError> {
        match *self {
            Angle::Value(v) => Ok(v),
            Angle::Slot { index, scale } => params
                .and_then(|p| p.get(index))
                .map(|v| v * scale)
                .ok_or(SimError::UnboundSlot(index)),
        }
    }

    pub fn slot_index(&self) -> Option<usize> {
        match self {
            Angle::Slot { index, .. } => Some(*index),
            Angle::Value(_) => None,
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Angle::Value(v) => write!(f, "value={v}"),
            Angle::Slot { index, scale } => write!(f, "slot={index} scale={scale}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    X(usize),
    H(usize),
    Rx(usize, Angle),
    Ry(usize, Angle),
    Rz(usize, Angle),
    Cnot { control: usize, target: usize },
    Cz(usize, usize),
    /// Two-qubit block fixing `|00⟩`, `|11⟩` and mixing `|01⟩`, `|10⟩`.
    SpBlock {
        q1: usize,
        q2: usize,
        theta: Angle,
        phi: Angle,
    },
    /// `exp(−iθP)`.
    PauliRot { string: PauliString, theta: Angle },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::X(q) | Gate::H(q) | Gate::Rx(q, _) | Gate::Ry(q, _) | Gate::Rz(q, _) => vec![*q],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::Cz(a, b) => vec![*a, *b],
            Gate::SpBlock { q1, q2, .. } => vec![*q1, *q2],
            Gate::PauliRot { string, .. } => string.iter().map(|(q, _)| q).collect(),
        }
    }

    pub fn angles(&self) -> Vec<&Angle> {
        match self {
            Gate::Rx(_, a) | Gate::Ry(_, a) | Gate::Rz(_, a) => vec![a],
            Gate::SpBlock { theta, phi, .. } => vec![theta, phi],
            Gate::PauliRot { theta, .. } => vec![theta],
            _ => Vec::new(),
        }
    }

    /// Copy with every slot replaced by its value.
    pub fn bind(&self, params: &[f64]) -> Result<Gate, SimError> {
        let b = |a: &Angle| a.resolve(Some(params)).map(Angle::Value);
        Ok(match self {
            Gate::Rx(q, a) => Gate::Rx(*q, b(a)?),
            Gate::Ry(q, a) => Gate::Ry(*q, b(a)?),
            Gate::Rz(q, a) => Gate::Rz(*q, b(a)?),
            Gate::SpBlock { q1, q2, theta, phi } => Gate::SpBlock {
                q1: *q1,
                q2: *q2,
                theta: b(theta)?,
                phi: b(phi)?,
            },
            Gate::PauliRot { string, theta } => Gate::PauliRot {
                string: string.clone(),
                theta: b(theta)?,
            },
            other => other.clone(),
        })
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::X(q) => write!(f, "X {q}"),
            Gate::H(q) => write!(f, "H {q}"),
            Gate::Rx(q, a) => write!(f, "RX {q} {a}"),
            Gate::Ry(q, a) => write!(f, "RY {q} {a}"),
            Gate::Rz(q, a) => write!(f, "RZ {q} {a}"),
            Gate::Cnot { control, target } => write!(f, "CNOT {control},{target}"),
            Gate::Cz(a, b) => write!(f, "CZ {a},{b}"),
            Gate::SpBlock { q1, q2, theta, phi } => write!(f, "SPBLOCK {q1},{q2} {theta} {phi}"),
            Gate::PauliRot { string, theta } => {
                let factors: Vec<String> = string.to_string().split(' ').map(String::from).collect();
                write!(f, "PAULIROT {} {theta}", factors.join(","))
            }
        }
    }
}

/// Ordered gate list over `n_qubits` with labelled parameter slots.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    slot_labels: Vec<String>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
            slot_labels: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_slots(&self) -> usize {
        self.slot_labels.len()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn slot_labels(&self) -> &[String] {
        &self.slot_labels
    }

    /// Registers a new parameter slot and returns its index.
    pub fn add_slot(&mut self, label: impl Into<String>) -> usize {
        self.slot_labels.push(label.into());
        self.slot_labels.len() - 1
    }

    pub fn push(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    /// Checks qubit ranges and slot references.
    pub fn validate(&self) -> Result<(), SimError> {
        for g in &self.gates {
            for q in g.qubits() {
                if q >= self.n_qubits {
                    return Err(SimError::QubitOutOfRange {
                        qubit: q,
                        n_qubits: self.n_qubits,
                    });
                }
            }
            for a in g.angles() {
                if let Some(i) = a.slot_index().filter(|&i| i >= self.n_slots()) {
                    return Err(SimError::UnboundSlot(i));
                }
            }
        }
        Ok(())
    }

    /// Indices of gates that read `slot`.
    pub fn gates_using_slot(&self, slot: usize) -> Vec<usize> {
        self.gates
            .iter()
            .enumerate()
            .filter(|(_, g)| g.angles().iter().any(|a| a.slot_index() == Some(slot)))
            .map(|(i, _)| i)
            .collect()
    }

    /// One gate per line, as `GATE q[,q2] [slot=k scale=c | value=v]`.
    pub fn to_text(&self) -> String {
        self.gates.iter().map(|g| format!("{g}\n")).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Result<Self, SimError> {
        if n_qubits > MAX_QUBITS {
            return Err(SimError::TooManyQubits(n_qubits));
        }
        let mut amps = vec![c(0.0, 0.0); 1 << n_qubits];
        amps[0] = c(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    pub fn init_basis(n_qubits: usize, bits: &BitString) -> Result<Self, SimError> {
        if bits.len() != n_qubits {
            return Err(SimError::LengthMismatch {
                expected: n_qubits,
                got: bits.len(),
            });
        }
        let mut s = Self::zero(n_qubits)?;
        s.amps[0] = c(0.0, 0.0);
        s.amps[bits.index()] = c(1.0, 0.0);
        Ok(s)
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Self {
        assert!(amps.len().is_power_of_two(), "amplitude count must be 2^n");
        Self {
            n_qubits: amps.len().trailing_zeros() as usize,
            amps,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    fn check_qubit(&self, q: usize) -> Result<(), SimError> {
        if q >= self.n_qubits {
            return Err(SimError::QubitOutOfRange {
                qubit: q,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<(), SimError> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(SimError::RepeatedQubit(a));
        }
        Ok(())
    }

    fn apply_1q(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    /// Applies a gate whose angles are all bound values.
    pub fn apply_gate(&mut self, gate: &Gate) -> Result<(), SimError> {
        self.apply_gate_with(gate, None, 0.0)
    }

    /// Applies `gate` with slots resolved from `params`; `offset` is added to
    /// the first angle (used for shifted-gate gradient evaluations).
    pub fn apply_gate_with(
        &mut self,
        gate: &Gate,
        params: Option<&[f64]>,
        offset: f64,
    ) -> Result<(), SimError> {
        let angle = |a: &Angle| a.resolve(params).map(|v| v + offset);
        match gate {
            Gate::X(q) => {
                self.check_qubit(*q)?;
                self.apply_1q(*q, [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]);
            }
            Gate::H(q) => {
                self.check_qubit(*q)?;
                let h = std::f64::consts::FRAC_1_SQRT_2;
                self.apply_1q(*q, [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]]);
            }
            Gate::Rx(q, a) => {
                self.check_qubit(*q)?;
                let t = angle(a)? / 2.0;
                let (s, co) = t.sin_cos();
                self.apply_1q(*q, [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]);
            }
            Gate::Ry(q, a) => {
                self.check_qubit(*q)?;
                let t = angle(a)? / 2.0;
                let (s, co) = t.sin_cos();
                self.apply_1q(*q, [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]);
            }
            Gate::Rz(q, a) => {
                self.check_qubit(*q)?;
                let t = angle(a)? / 2.0;
                let (s, co) = t.sin_cos();
                self.apply_1q(*q, [[c(co, -s), c(0.0, 0.0)], [c(0.0, 0.0), c(co, s)]]);
            }
            Gate::Cnot { control, target } => {
                self.check_pair(*control, *target)?;
                let (cb, tb) = (1usize << control, 1usize << target);
                for i in 0..self.amps.len() {
                    if i & cb != 0 && i & tb == 0 {
                        self.amps.swap(i, i | tb);
                    }
                }
            }
            Gate::Cz(a, b) => {
                self.check_pair(*a, *b)?;
                let mask = (1usize << a) | (1usize << b);
                for (i, amp) in self.amps.iter_mut().enumerate() {
                    if i & mask == mask {
                        *amp = -*amp;
                    }
                }
            }
            Gate::SpBlock { q1, q2, theta, phi } => {
                self.check_pair(*q1, *q2)?;
                let t = angle(theta)?;
                let p = phi.resolve(params)?;
                let (s, co) = t.sin_cos();
                let e_plus = Complex64::from_polar(s, p);
                let e_minus = Complex64::from_polar(s, -p);
                let (b1, b2) = (1usize << q1, 1usize << q2);
                for i in 0..self.amps.len() {
                    // i has q1 = 0, q2 = 1; partner has q1 = 1, q2 = 0
                    if i & b1 == 0 && i & b2 != 0 {
                        let j = (i | b1) & !b2;
                        let (a01, a10) = (self.amps[i], self.amps[j]);
                        self.amps[i] = a01 * co + e_plus * a10;
                        self.amps[j] = e_minus * a01 - a10 * co;
                    }
                }
            }
            Gate::PauliRot { string, theta } => {
                let t = angle(theta)?;
                self.apply_pauli_rotation(string, t)?;
            }
        }
        Ok(())
    }

    /// `|ψ⟩ ← cos θ |ψ⟩ − i sin θ P|ψ⟩`, i.e. `exp(−iθP)|ψ⟩`.
    pub fn apply_pauli_rotation(&mut self, p: &PauliString, theta: f64) -> Result<(), SimError> {
        if let Some(q) = p.max_qubit() {
            self.check_qubit(q)?;
        }
        let (x, z, ny) = p.masks();
        let (s, co) = theta.sin_cos();
        // −i · i^ny
        let k = Phase::from_power(ny + 3).to_complex() * s;
        let sign = |b: usize| if (b & z).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
        if x == 0 {
            for (b, amp) in self.amps.iter_mut().enumerate() {
                *amp = *amp * co + k * sign(b) * *amp;
            }
            return Ok(());
        }
        for b in 0..self.amps.len() {
            let partner = b ^ x;
            if b < partner {
                let (ab, ap) = (self.amps[b], self.amps[partner]);
                // (Pψ)[b] = i^ny (−1)^{partner·z} ψ[partner]
                self.amps[b] = ab * co + k * sign(partner) * ap;
                self.amps[partner] = ap * co + k * sign(b) * ab;
            }
        }
        Ok(())
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit, params: &[f64]) -> Result<(), SimError> {
        self.apply_circuit_with_offset(circuit, params, None)
    }

    /// Like [`apply_circuit`](Self::apply_circuit) with `offset = (gate, δ)`
    /// adding `δ` to that one gate's angle.
    pub fn apply_circuit_with_offset(
        &mut self,
        circuit: &Circuit,
        params: &[f64],
        offset: Option<(usize, f64)>,
    ) -> Result<(), SimError> {
        if params.len() != circuit.n_slots() {
            return Err(SimError::ParamLength {
                expected: circuit.n_slots(),
                got: params.len(),
            });
        }
        for (i, g) in circuit.gates().iter().enumerate() {
            let delta = match offset {
                Some((gi, d)) if gi == i => d,
                _ => 0.0,
            };
            self.apply_gate_with(g, Some(params), delta)?;
        }
        Ok(())
    }

    /// `⟨ψ|P|ψ⟩` for a single string (complex in general).
    pub fn string_expectation(&self, p: &PauliString) -> Complex64 {
        let (x, z, ny) = p.masks();
        let mut acc = c(0.0, 0.0);
        for (b, amp) in self.amps.iter().enumerate() {
            let v = self.amps[b ^ x].conj() * amp;
            if (b & z).count_ones() % 2 == 0 {
                acc += v;
            } else {
                acc -= v;
            }
        }
        acc * Phase::from_power(ny).to_complex()
    }

    /// `⟨ψ|H|ψ⟩` for Hermitian `h`, summed term by term in a fixed order.
    pub fn expectation(&self, h: &PauliSum) -> Result<f64, SimError> {
        if !h.is_hermitian() {
            return Err(SimError::NonHermitian);
        }
        if let Some(q) = h.min_qubits().checked_sub(1) {
            self.check_qubit(q)?;
        }
        let mut total = c(0.0, 0.0);
        for (s, coeff) in h.iter() {
            total += coeff * self.string_expectation(s);
        }
        let scale = h.max_abs_coefficient().max(1.0) * h.len().max(1) as f64;
        if total.im.abs() > 1e-10 * scale {
            return Err(SimError::ImaginaryResidue(total.im));
        }
        Ok(total.re)
    }

    /// Writes little-endian `(re, im)` f64 pairs to `path` and a JSON sidecar
    /// at `path.json`. Returns the sidecar path.
    pub fn dump_amplitudes(&self, path: &Path) -> Result<PathBuf, SimError> {
        let mut bytes = Vec::with_capacity(self.amps.len() * 16);
        for a in &self.amps {
            bytes.extend_from_slice(&a.re.to_le_bytes());
            bytes.extend_from_slice(&a.im.to_le_bytes());
        }
        fs::write(path, &bytes)?;
        let meta = AmplitudeDump {
            n_qubits: self.n_qubits,
            norm: self.norm_sqr().sqrt(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        };
        let mut sidecar = path.as_os_str().to_owned();
        sidecar.push(".json");
        let sidecar = PathBuf::from(sidecar);
        fs::write(&sidecar, serde_json::to_vec_pretty(&meta).map_err(io::Error::other)?)?;
        Ok(sidecar)
    }

    pub fn load_amplitudes(path: &Path) -> Result<StateVector, SimError> {
        let bytes = fs::read(path)?;
        if bytes.len() % 16 != 0 || !(bytes.len() / 16).is_power_of_two() {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "not a 2^n complex array").into());
        }
        let amps = bytes
            .chunks_exact(16)
            .map(|ch| {
                let re = f64::from_le_bytes(ch[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(ch[8..].try_into().expect("8 bytes"));
                c(re, im)
            })
            .collect();
        Ok(StateVector::from_amplitudes(amps))
    }
}

/// Sidecar metadata for an amplitude dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeDump {
    pub n_qubits: usize,
    pub norm: f64,
    pub sha256: String,
}
