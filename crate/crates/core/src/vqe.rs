//! Energy evaluation, gradients, classical minimizers and the exact oracle.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ansatz::AnsatzKind;
use crate::encodings::{BitString, EncodingError, FermionQubitMapping};
use crate::pauli::{PauliError, PauliSum};
use crate::simulator::{Angle, Circuit, Gate, SimError, StateVector};

/// Shift for `exp(−iθP)` rotations, whose energy has period π in θ.
pub const SHIFT: f64 = std::f64::consts::FRAC_PI_4;
pub const FD_STEP: f64 = 1e-5;
/// Edge length of the initial Nelder–Mead simplex.
pub const SIMPLEX_STEP: f64 = 0.05;

#[derive(Debug, Error)]
pub enum VqeError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error(transparent)]
    Mapping(#[from] EncodingError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("non-finite energy {energy} at params {params:?}")]
    NonFinite { energy: f64, params: Vec<f64> },
    #[error("parameter shift does not apply to slot {slot} ({label}): gate {gate} is not a Pauli rotation")]
    ShiftUnsupported {
        slot: usize,
        label: String,
        gate: String,
    },
    #[error("no basis state of {n_qubits} qubits holds {nelec} particles")]
    EmptySector { n_qubits: usize, nelec: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Optimizer {
    NelderMead,
    GradientDescent,
}

impl fmt::Display for Optimizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Optimizer::NelderMead => "nelder-mead",
            Optimizer::GradientDescent => "gradient-descent",
        })
    }
}

impl FromStr for Optimizer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "nelder-mead" | "nm" => Ok(Optimizer::NelderMead),
            "gradient-descent" | "gd" => Ok(Optimizer::GradientDescent),
            _ => Err(format!(
                "unknown optimizer {s:?} (expected nelder-mead or gradient-descent)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientMode {
    ParameterShift,
    FiniteDifference,
}

impl fmt::Display for GradientMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GradientMode::ParameterShift => "shift",
            GradientMode::FiniteDifference => "fd",
        })
    }
}

impl FromStr for GradientMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "shift" | "parameter-shift" => Ok(GradientMode::ParameterShift),
            "fd" | "finite-difference" => Ok(GradientMode::FiniteDifference),
            _ => Err(format!("unknown gradient mode {s:?} (expected shift or fd)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialParams {
    Zeros,
    /// Uniform in `[−scale, scale]`, drawn from the config seed.
    Random { scale: f64 },
    Explicit(Vec<f64>),
}

impl InitialParams {
    /// Zeros for UCCSD (θ = 0 is the reference state); a small seeded draw
    /// otherwise.
    pub fn default_for(kind: AnsatzKind) -> Self {
        match kind {
            AnsatzKind::Uccsd => InitialParams::Zeros,
            _ => InitialParams::Random { scale: 0.1 },
        }
    }

    pub fn resolve(&self, n: usize, seed: u64) -> Result<Vec<f64>, VqeError> {
        match self {
            InitialParams::Zeros => Ok(vec![0.0; n]),
            InitialParams::Random { scale } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok((0..n).map(|_| rng.random_range(-1.0..=1.0) * scale).collect())
            }
            InitialParams::Explicit(v) if v.len() == n => Ok(v.clone()),
            InitialParams::Explicit(v) => Err(VqeError::Config(format!(
                "initial vector has {} entries, circuit has {n} slots",
                v.len()
            ))),
        }
    }
}

impl fmt::Display for InitialParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialParams::Zeros => f.write_str("zeros"),
            InitialParams::Random { scale } => write!(f, "random({scale})"),
            InitialParams::Explicit(v) => write!(f, "{v:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VqeConfig {
    pub optimizer: Optimizer,
    pub gradient: GradientMode,
    pub tol: f64,
    pub xtol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub init: InitialParams,
    /// Gradient-descent base step.
    pub step: f64,
}

impl Default for VqeConfig {
    fn default() -> Self {
        Self {
            optimizer: Optimizer::NelderMead,
            gradient: GradientMode::ParameterShift,
            tol: 1e-8,
            xtol: 1e-8,
            max_iter: 2000,
            seed: 0,
            init: InitialParams::Zeros,
            step: 0.5,
        }
    }
}

impl VqeConfig {
    pub fn validate(&self) -> Result<(), VqeError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.tol) {
            return Err(VqeError::Config(format!("tol must be > 0, got {}", self.tol)));
        }
        if !positive(self.xtol) {
            return Err(VqeError::Config(format!("xtol must be > 0, got {}", self.xtol)));
        }
        if !positive(self.step) {
            return Err(VqeError::Config(format!("step must be > 0, got {}", self.step)));
        }
        if self.max_iter == 0 {
            return Err(VqeError::Config("max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub it: usize,
    pub e: f64,
    /// Hash prefix of the parameter vector that produced `e`.
    pub h: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeResult {
    pub energy: f64,
    pub params: Vec<f64>,
    pub iterations: usize,
    pub evals: usize,
    pub converged: bool,
    pub trace: Vec<TraceEntry>,
}

pub fn params_hash(params: &[f64]) -> String {
    let mut hasher = Sha256::new();
    for p in params {
        hasher.update(p.to_le_bytes());
    }
    hex::encode(&hasher.finalize()[..8])
}

/// `⟨init| U(θ)† H U(θ) |init⟩`.
pub fn evaluate_energy(
    hamiltonian: &PauliSum,
    circuit: &Circuit,
    params: &[f64],
    init: &BitString,
) -> Result<f64, VqeError> {
    let mut state = StateVector::init_basis(circuit.n_qubits(), init)?;
    state.apply_circuit(circuit, params)?;
    Ok(state.expectation(hamiltonian)?)
}

fn shifted_energy(
    hamiltonian: &PauliSum,
    circuit: &Circuit,
    params: &[f64],
    init: &BitString,
    gate: usize,
    delta: f64,
) -> Result<f64, VqeError> {
    let mut state = StateVector::init_basis(circuit.n_qubits(), init)?;
    state.apply_circuit_with_offset(circuit, params, Some((gate, delta)))?;
    Ok(state.expectation(hamiltonian)?)
}

/// Gradient with respect to every slot.
///
/// For a slot shared by several Pauli rotations with angle `c_g·θ`, the
/// chain rule gives `Σ_g c_g · [E(α_g + π/4) − E(α_g − π/4)]`.
pub fn gradient(
    hamiltonian: &PauliSum,
    circuit: &Circuit,
    params: &[f64],
    init: &BitString,
    mode: GradientMode,
) -> Result<Vec<f64>, VqeError> {
    if params.len() != circuit.n_slots() {
        return Err(SimError::ParamLength {
            expected: circuit.n_slots(),
            got: params.len(),
        }
        .into());
    }
    match mode {
        GradientMode::FiniteDifference => {
            let mut x = params.to_vec();
            (0..params.len())
                .map(|k| {
                    x[k] = params[k] + FD_STEP;
                    let plus = evaluate_energy(hamiltonian, circuit, &x, init)?;
                    x[k] = params[k] - FD_STEP;
                    let minus = evaluate_energy(hamiltonian, circuit, &x, init)?;
                    x[k] = params[k];
                    Ok((plus - minus) / (2.0 * FD_STEP))
                })
                .collect()
        }
        GradientMode::ParameterShift => {
            check_shift_applicable(circuit)?;
            let mut grad = vec![0.0; params.len()];
            for (gi, gate) in circuit.gates().iter().enumerate() {
                if let Gate::PauliRot {
                    theta: Angle::Slot { index, scale },
                    ..
                } = gate
                {
                    let plus = shifted_energy(hamiltonian, circuit, params, init, gi, SHIFT)?;
                    let minus = shifted_energy(hamiltonian, circuit, params, init, gi, -SHIFT)?;
                    grad[*index] += scale * (plus - minus);
                }
            }
            Ok(grad)
        }
    }
}

/// Whether every parameterized gate is a Pauli rotation.
pub fn supports_parameter_shift(circuit: &Circuit) -> bool {
    check_shift_applicable(circuit).is_ok()
}

fn check_shift_applicable(circuit: &Circuit) -> Result<(), VqeError> {
    for gate in circuit.gates() {
        if matches!(gate, Gate::PauliRot { .. }) {
            continue;
        }
        if let Some(slot) = gate.angles().iter().find_map(|a| a.slot_index()) {
            return Err(VqeError::ShiftUnsupported {
                slot,
                label: circuit.slot_labels()[slot].clone(),
                gate: gate.to_string(),
            });
        }
    }
    Ok(())
}

struct Objective<'a> {
    hamiltonian: &'a PauliSum,
    circuit: &'a Circuit,
    init: &'a BitString,
    evals: usize,
    best: (f64, Vec<f64>),
}

impl Objective<'_> {
    fn eval(&mut self, x: &[f64]) -> Result<f64, VqeError> {
        let e = evaluate_energy(self.hamiltonian, self.circuit, x, self.init)?;
        self.evals += 1;
        if !e.is_finite() {
            return Err(VqeError::NonFinite {
                energy: e,
                params: x.to_vec(),
            });
        }
        if e < self.best.0 {
            self.best = (e, x.to_vec());
        }
        Ok(e)
    }

    fn trace_entry(&self, it: usize) -> TraceEntry {
        TraceEntry {
            it,
            e: self.best.0,
            h: params_hash(&self.best.1),
        }
    }
}

/// Runs the configured optimizer from the configured initial point.
pub fn minimize(
    hamiltonian: &PauliSum,
    circuit: &Circuit,
    init: &BitString,
    config: &VqeConfig,
) -> Result<VqeResult, VqeError> {
    config.validate()?;
    circuit.validate()?;
    let x0 = config.init.resolve(circuit.n_slots(), config.seed)?;
    let mut obj = Objective {
        hamiltonian,
        circuit,
        init,
        evals: 0,
        best: (f64::INFINITY, x0.clone()),
    };
    obj.eval(&x0)?;
    let mut trace = vec![obj.trace_entry(0)];
    let (iterations, converged) = if x0.is_empty() {
        (0, true)
    } else {
        match config.optimizer {
            Optimizer::NelderMead => nelder_mead(&mut obj, &x0, config, &mut trace)?,
            Optimizer::GradientDescent => gradient_descent(&mut obj, &x0, config, &mut trace)?,
        }
    };
    if trace.last().is_some_and(|t| t.e != obj.best.0) {
        trace.push(obj.trace_entry(iterations));
    }
    log::debug!(
        "minimize: E = {} after {iterations} iterations, {} evals",
        obj.best.0,
        obj.evals
    );
    Ok(VqeResult {
        energy: obj.best.0,
        params: obj.best.1,
        iterations,
        evals: obj.evals,
        converged,
        trace,
    })
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

/// Nelder–Mead, restarted from the best vertex until a restart gains less
/// than `tol`.
fn nelder_mead(
    obj: &mut Objective,
    x0: &[f64],
    config: &VqeConfig,
    trace: &mut Vec<TraceEntry>,
) -> Result<(usize, bool), VqeError> {
    let n = x0.len();
    let mut it = 0;
    let mut start = x0.to_vec();
    let mut start_e = obj.best.0;
    loop {
        let mut simplex: Vec<(Vec<f64>, f64)> = vec![(start.clone(), start_e)];
        for k in 0..n {
            let mut x = start.clone();
            x[k] += SIMPLEX_STEP;
            let e = obj.eval(&x)?;
            simplex.push((x, e));
        }
        let settled = loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let spread = simplex[n].1 - simplex[0].1;
            let size = simplex[1..]
                .iter()
                .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if spread < config.tol || size < config.xtol {
                break true;
            }
            if it >= config.max_iter {
                break false;
            }
            it += 1;

            let mut centroid = vec![0.0; n];
            for (x, _) in &simplex[..n] {
                for (c, v) in centroid.iter_mut().zip(x) {
                    *c += v / n as f64;
                }
            }
            let worst = simplex[n].clone();
            let xr = lerp(&centroid, &worst.0, -1.0);
            let fr = obj.eval(&xr)?;
            if fr < simplex[0].1 {
                let xe = lerp(&centroid, &worst.0, -2.0);
                let fe = obj.eval(&xe)?;
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                let (xc, fc) = if fr < worst.1 {
                    let xc = lerp(&centroid, &xr, 0.5);
                    let fc = obj.eval(&xc)?;
                    (xc, fc)
                } else {
                    let xc = lerp(&centroid, &worst.0, 0.5);
                    let fc = obj.eval(&xc)?;
                    (xc, fc)
                };
                if fc < fr.min(worst.1) {
                    simplex[n] = (xc, fc);
                } else {
                    let best = simplex[0].0.clone();
                    for vertex in simplex.iter_mut().skip(1) {
                        let x = lerp(&best, &vertex.0, 0.5);
                        let e = obj.eval(&x)?;
                        *vertex = (x, e);
                    }
                }
            }
            trace.push(obj.trace_entry(it));
        };
        if !settled {
            return Ok((it, false));
        }
        if start_e - obj.best.0 < config.tol {
            return Ok((it, true));
        }
        start = obj.best.1.clone();
        start_e = obj.best.0;
    }
}

const ARMIJO: f64 = 0.5;

/// Steepest descent with a fixed base step, halved until the energy drops
/// sufficiently.
fn gradient_descent(
    obj: &mut Objective,
    x0: &[f64],
    config: &VqeConfig,
    trace: &mut Vec<TraceEntry>,
) -> Result<(usize, bool), VqeError> {
    let mut x = x0.to_vec();
    let mut e = obj.best.0;
    for it in 1..=config.max_iter {
        let g = gradient(obj.hamiltonian, obj.circuit, &x, obj.init, config.gradient)?;
        obj.evals += match config.gradient {
            GradientMode::FiniteDifference => 2 * g.len(),
            GradientMode::ParameterShift => {
                2 * obj
                    .circuit
                    .gates()
                    .iter()
                    .filter(|g| g.angles().iter().any(|a| a.slot_index().is_some()))
                    .count()
            }
        };
        let g2: f64 = g.iter().map(|v| v * v).sum();
        let mut step = config.step;
        let mut accepted = None;
        while step * g.iter().map(|v| v.abs()).fold(0.0, f64::max) >= config.xtol {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(a, d)| a - step * d).collect();
            let et = obj.eval(&trial)?;
            if et < e - ARMIJO * step * g2 {
                accepted = Some((trial, et));
                break;
            }
            step /= 2.0;
        }
        trace.push(obj.trace_entry(it));
        match accepted {
            None => return Ok((it, true)),
            Some((xn, en)) => {
                let change = e - en;
                x = xn;
                e = en;
                if change < config.tol {
                    return Ok((it, true));
                }
            }
        }
    }
    Ok((config.max_iter, false))
}

/// Restricts a diagonalization to basis states that decode to `nelec`
/// particles under `mapping`.
pub struct Sector<'a> {
    pub mapping: &'a FermionQubitMapping,
    pub nelec: usize,
}

/// Lowest eigenvalue of the dense matrix of `hamiltonian`.
pub fn exact_ground_energy(
    hamiltonian: &PauliSum,
    n_qubits: usize,
    sector: Option<Sector>,
) -> Result<f64, VqeError> {
    let full = hamiltonian.to_matrix(n_qubits)?;
    let matrix = match sector {
        None => full,
        Some(Sector { mapping, nelec }) => {
            let mut keep = Vec::new();
            for i in 0..1usize << n_qubits {
                let occ = mapping.decode(&BitString::from_index(i, n_qubits))?;
                if occ.particle_count() == nelec {
                    keep.push(i);
                }
            }
            if keep.is_empty() {
                return Err(VqeError::EmptySector { n_qubits, nelec });
            }
            DMatrix::<Complex64>::from_fn(keep.len(), keep.len(), |r, c| full[(keep[r], keep[c])])
        }
    };
    let eig = SymmetricEigen::new(matrix);
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}
