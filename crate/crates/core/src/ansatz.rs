//! Parameterized circuits: UCCSD, symmetry-preserving and hardware-efficient.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encodings::{BitString, EncodingError, FermionQubitMapping, MappingScheme};
use crate::fermion::{anti_hermitian_generator, FermionSum, LadderOp};
use crate::hamio::hf_reference;
use crate::pauli::PauliString;
use crate::simulator::{Angle, Circuit, Gate};

pub const DEFAULT_LAYERS: usize = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnsatzError {
    #[error("need more modes than electrons (modes {modes}, electrons {nelec})")]
    NoVirtuals { modes: usize, nelec: usize },
    #[error("the symmetry-preserving ansatz is only defined under the jw mapping, got {0}")]
    SpRequiresJordanWigner(MappingScheme),
    #[error("symmetry-preserving ansatz needs 0 < particles < qubits, got {m} of {n}")]
    NoMixingFreedom { n: usize, m: usize },
    #[error("hardware-efficient ansatz needs at least one layer")]
    ZeroLayers,
    #[error("entangling gates need at least two qubits, got {0}")]
    TooFewQubits(usize),
    #[error("excitation {0} maps to a generator that is not i·(real Pauli sum)")]
    NotAntiHermitian(String),
    #[error("excitation {0} maps to non-commuting Pauli terms")]
    NonCommutingTerms(String),
    #[error(transparent)]
    Mapping(#[from] EncodingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum AnsatzKind {
    Uccsd,
    SymmetryPreserved,
    HardwareEfficient,
}

impl AnsatzKind {
    pub fn name(self) -> &'static str {
        match self {
            AnsatzKind::Uccsd => "uccsd",
            AnsatzKind::SymmetryPreserved => "sp",
            AnsatzKind::HardwareEfficient => "hea",
        }
    }
}

impl fmt::Display for AnsatzKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AnsatzKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "uccsd" => Ok(AnsatzKind::Uccsd),
            "sp" | "symmetry-preserved" => Ok(AnsatzKind::SymmetryPreserved),
            "hea" | "hardware-efficient" => Ok(AnsatzKind::HardwareEfficient),
            _ => Err(format!("unknown ansatz {s:?} (expected uccsd, sp or hea)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Entangler {
    Cnot,
    Cz,
}

impl fmt::Display for Entangler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Entangler::Cnot => "cnot",
            Entangler::Cz => "cz",
        })
    }
}

impl FromStr for Entangler {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cnot" | "cx" => Ok(Entangler::Cnot),
            "cz" => Ok(Entangler::Cz),
            _ => Err(format!("unknown entangler {s:?} (expected cnot or cz)")),
        }
    }
}

/// Spin-conserving single and double excitations out of the lowest `nelec`
/// spin orbitals. Spin of mode `j` is `j % 2`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExcitationList {
    pub singles: Vec<(usize, usize)>,
    pub doubles: Vec<(usize, usize, usize, usize)>,
}

impl ExcitationList {
    pub fn len(&self) -> usize {
        self.singles.len() + self.doubles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn enumerate_excitations(modes: usize, nelec: usize) -> Result<ExcitationList, AnsatzError> {
    if nelec >= modes {
        return Err(AnsatzError::NoVirtuals { modes, nelec });
    }
    let spin = |j: usize| j % 2;
    let mut list = ExcitationList::default();
    for i in 0..nelec {
        for a in nelec..modes {
            if spin(i) == spin(a) {
                list.singles.push((i, a));
            }
        }
    }
    for i in 0..nelec {
        for j in i + 1..nelec {
            for a in nelec..modes {
                for b in a + 1..modes {
                    let mut occ = [spin(i), spin(j)];
                    let mut virt = [spin(a), spin(b)];
                    occ.sort_unstable();
                    virt.sort_unstable();
                    if occ == virt {
                        list.doubles.push((i, j, a, b));
                    }
                }
            }
        }
    }
    Ok(list)
}

/// Appends `exp(t − t†)` for one excitation as consecutive Pauli rotations
/// sharing `slot`.
fn push_excitation(
    circuit: &mut Circuit,
    mapping: &FermionQubitMapping,
    ops: Vec<LadderOp>,
    slot: usize,
    label: &str,
) -> Result<(), AnsatzError> {
    let t = FermionSum::single(ops, Complex64::new(1.0, 0.0));
    let image = mapping.map_sum(&anti_hermitian_generator(&t))?;
    let terms: Vec<(PauliString, f64)> = image
        .iter()
        .map(|(s, c)| {
            if c.re.abs() > 1e-12 {
                Err(AnsatzError::NotAntiHermitian(label.to_string()))
            } else {
                Ok((s.clone(), c.im))
            }
        })
        .collect::<Result<_, _>>()?;
    for (i, (p, _)) in terms.iter().enumerate() {
        if terms[..i].iter().any(|(q, _)| !p.commutes_with(q)) {
            return Err(AnsatzError::NonCommutingTerms(label.to_string()));
        }
    }
    // exp(θ Σ i c_j P_j) = Π exp(−i (−c_j θ) P_j)
    for (string, c) in terms {
        circuit.push(Gate::PauliRot {
            string,
            theta: Angle::Slot {
                index: slot,
                scale: -c,
            },
        });
    }
    Ok(())
}

/// Single-step Trotterized UCCSD, one slot per excitation, singles first.
/// Reference-state preparation is left to the caller.
pub fn build_uccsd(mapping: &FermionQubitMapping, nelec: usize) -> Result<Circuit, AnsatzError> {
    let modes = mapping.modes();
    let excitations = enumerate_excitations(modes, nelec)?;
    let mut circuit = Circuit::new(modes);
    for &(i, a) in &excitations.singles {
        let label = format!("t1({i}->{a})");
        let slot = circuit.add_slot(&label);
        let ops = vec![LadderOp::create(a), LadderOp::annihilate(i)];
        push_excitation(&mut circuit, mapping, ops, slot, &label)?;
    }
    for &(i, j, a, b) in &excitations.doubles {
        let label = format!("t2({i},{j}->{a},{b})");
        let slot = circuit.add_slot(&label);
        let ops = vec![
            LadderOp::create(a),
            LadderOp::create(b),
            LadderOp::annihilate(j),
            LadderOp::annihilate(i),
        ];
        push_excitation(&mut circuit, mapping, ops, slot, &label)?;
    }
    Ok(circuit)
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Parameter count needed to span the Hamming-weight-`m` sector of `n`
/// qubits: `2·C(n, m) − 2`.
pub fn sp_freedom(n: usize, m: usize) -> usize {
    2 * binomial(n, m) - 2
}

/// Qubits that receive the `m` X gates: even qubits first, then odd ones
/// from the top, so that as many first-layer pairs as possible hold exactly
/// one particle.
pub fn sp_reference_qubits(n: usize, m: usize) -> Vec<usize> {
    let mut qubits: Vec<usize> = (0..n).step_by(2).take(m).collect();
    let odd: Vec<usize> = (1..n).step_by(2).collect();
    qubits.extend(odd.iter().rev().take(m - qubits.len()));
    qubits.sort_unstable();
    qubits
}

/// Symmetry-preserving ansatz on `n` qubits with `m` particles.
///
/// X gates prepare the weight-`m` state of [`sp_reference_qubits`], then brick
/// layers of blocks on pairs `(0,1),(2,3),…` and `(1,2),(3,4),…` are appended
/// two at a time until the slot count reaches [`sp_freedom`].
pub fn build_sp(n: usize, m: usize) -> Result<Circuit, AnsatzError> {
    if m == 0 || m >= n {
        return Err(AnsatzError::NoMixingFreedom { n, m });
    }
    let target = sp_freedom(n, m);
    let mut circuit = Circuit::new(n);
    for q in sp_reference_qubits(n, m) {
        circuit.push(Gate::X(q));
    }
    let mut layer = 0;
    while circuit.n_slots() < target {
        for offset in [0, 1] {
            let mut q = offset;
            while q + 1 < n {
                let theta = circuit.add_slot(format!("L{layer}({q},{})theta", q + 1));
                let phi = circuit.add_slot(format!("L{layer}({q},{})phi", q + 1));
                circuit.push(Gate::SpBlock {
                    q1: q,
                    q2: q + 1,
                    theta: Angle::slot(theta),
                    phi: Angle::slot(phi),
                });
                q += 2;
            }
            layer += 1;
        }
    }
    Ok(circuit)
}

/// Layers of `RZ·RX·RZ` on every qubit followed by a nearest-neighbour
/// entangler chain.
pub fn build_hea(
    n: usize,
    layers: usize,
    entangler: Option<Entangler>,
) -> Result<Circuit, AnsatzError> {
    if layers == 0 {
        return Err(AnsatzError::ZeroLayers);
    }
    if entangler.is_some() && n < 2 {
        return Err(AnsatzError::TooFewQubits(n));
    }
    let mut circuit = Circuit::new(n);
    for l in 0..layers {
        for q in 0..n {
            let a = circuit.add_slot(format!("L{l}q{q}rz0"));
            let b = circuit.add_slot(format!("L{l}q{q}rx"));
            let c = circuit.add_slot(format!("L{l}q{q}rz1"));
            circuit.push(Gate::Rz(q, Angle::slot(a)));
            circuit.push(Gate::Rx(q, Angle::slot(b)));
            circuit.push(Gate::Rz(q, Angle::slot(c)));
        }
        if let Some(e) = entangler {
            for q in 0..n - 1 {
                circuit.push(match e {
                    Entangler::Cnot => Gate::Cnot {
                        control: q,
                        target: q + 1,
                    },
                    Entangler::Cz => Gate::Cz(q, q + 1),
                });
            }
        }
    }
    Ok(circuit)
}

/// Everything needed to pick and build an ansatz for one Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzSpec {
    pub kind: AnsatzKind,
    pub scheme: MappingScheme,
    pub modes: usize,
    pub nelec: usize,
    pub layers: usize,
    pub entangler: Option<Entangler>,
}

/// A built circuit plus the basis state it starts from.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedAnsatz {
    pub circuit: Circuit,
    pub reference: BitString,
}

impl AnsatzSpec {
    /// UCCSD and HEA start from the encoded Hartree–Fock state; the SP circuit
    /// contains its own X gates and starts from `|0…0⟩`.
    pub fn build(&self, mapping: &FermionQubitMapping) -> Result<PreparedAnsatz, AnsatzError> {
        let hf = || -> Result<BitString, AnsatzError> {
            let occ = hf_reference(self.nelec, self.modes).map_err(|_| AnsatzError::NoVirtuals {
                modes: self.modes,
                nelec: self.nelec,
            })?;
            Ok(mapping.encode(&occ)?)
        };
        match self.kind {
            AnsatzKind::Uccsd => Ok(PreparedAnsatz {
                circuit: build_uccsd(mapping, self.nelec)?,
                reference: hf()?,
            }),
            AnsatzKind::SymmetryPreserved => {
                if self.scheme != MappingScheme::JordanWigner {
                    return Err(AnsatzError::SpRequiresJordanWigner(self.scheme));
                }
                Ok(PreparedAnsatz {
                    circuit: build_sp(self.modes, self.nelec)?,
                    reference: BitString::zeros(self.modes),
                })
            }
            AnsatzKind::HardwareEfficient => Ok(PreparedAnsatz {
                circuit: build_hea(self.modes, self.layers, self.entangler)?,
                reference: hf()?,
            }),
        }
    }
}

impl TryFrom<String> for AnsatzKind {
    type Error = <AnsatzKind as FromStr>::Err;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<AnsatzKind> for String {
    fn from(v: AnsatzKind) -> String {
        v.to_string()
    }
}

impl TryFrom<String> for Entangler {
    type Error = <Entangler as FromStr>::Err;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Entangler> for String {
    fn from(v: Entangler) -> String {
        v.to_string()
    }
}
