//! Sparse Pauli-string algebra.
//!
//! A [`PauliString`] stores only its non-identity factors, keyed by qubit
//! index; phases never live in the string. A [`PauliSum`] maps strings to
//! complex coefficients and is kept pruned of coefficients below
//! [`PRUNE_TOL`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

/// Absolute coefficient magnitude below which terms are dropped.
pub const PRUNE_TOL: f64 = 1e-12;

/// Tolerance on imaginary parts used by [`PauliSum::is_hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Default cap on the qubit count for dense-matrix oracles.
pub const DEFAULT_ORACLE_LIMIT: usize = 12;

/// Environment variable overriding [`DEFAULT_ORACLE_LIMIT`].
pub const ORACLE_LIMIT_ENV: &str = "QVQE_ORACLE_LIMIT";

/// Current dense-oracle qubit cap, honouring `QVQE_ORACLE_LIMIT`.
pub fn oracle_limit() -> usize {
    std::env::var(ORACLE_LIMIT_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_ORACLE_LIMIT)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PauliError {
    #[error("{requested} qubits exceeds the dense oracle limit of {limit} (set {ORACLE_LIMIT_ENV} to raise it)")]
    OracleLimit { requested: usize, limit: usize },
    #[error("operator acts on qubit {index} but only {n_qubits} qubits are available")]
    SupportOutOfRange { index: usize, n_qubits: usize },
    #[error("cannot parse Pauli string {0:?}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PauliAxis {
    I,
    X,
    Y,
    Z,
}

impl PauliAxis {
    fn code(self) -> u8 {
        match self {
            PauliAxis::I => 0,
            PauliAxis::X => 1,
            PauliAxis::Y => 2,
            PauliAxis::Z => 3,
        }
    }

    fn from_code(code: u8) -> Self {
        match code {
            0 => PauliAxis::I,
            1 => PauliAxis::X,
            2 => PauliAxis::Y,
            _ => PauliAxis::Z,
        }
    }

    /// Single-qubit product `self · other`.
    pub fn mul(self, other: PauliAxis) -> (Phase, PauliAxis) {
        let (a, b) = (self.code(), other.code());
        if a == 0 {
            return (Phase::ONE, other);
        }
        if b == 0 {
            return (Phase::ONE, self);
        }
        if a == b {
            return (Phase::ONE, PauliAxis::I);
        }
        // cyclic X -> Y -> Z gives +i, anti-cyclic gives -i
        let third = Self::from_code(6 - a - b);
        if (b + 3 - a) % 3 == 1 {
            (Phase::I, third)
        } else {
            (Phase::MINUS_I, third)
        }
    }

    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            PauliAxis::I => [[l, o], [o, l]],
            PauliAxis::X => [[o, l], [l, o]],
            PauliAxis::Y => [[o, -i], [i, o]],
            PauliAxis::Z => [[l, o], [o, -l]],
        }
    }

    fn letter(self) -> char {
        match self {
            PauliAxis::I => 'I',
            PauliAxis::X => 'X',
            PauliAxis::Y => 'Y',
            PauliAxis::Z => 'Z',
        }
    }
}

/// A power of `i`: the value is `i^k` for `k` in `0..4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: u32) -> Self {
        Phase((k % 4) as u8)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl std::ops::Neg for Phase {
    type Output = Phase;
    fn neg(self) -> Phase {
        self * Phase::MINUS_ONE
    }
}

/// Tensor product of single-qubit Pauli operators, identity entries omitted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    support: BTreeMap<usize, PauliAxis>,
}

impl PauliString {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn single(qubit: usize, axis: PauliAxis) -> Self {
        let mut s = Self::default();
        s.set(qubit, axis);
        s
    }

    /// Sets the factor on `qubit`, removing it when `axis` is `I`.
    pub fn set(&mut self, qubit: usize, axis: PauliAxis) {
        if axis == PauliAxis::I {
            self.support.remove(&qubit);
        } else {
            self.support.insert(qubit, axis);
        }
    }

    pub fn get(&self, qubit: usize) -> PauliAxis {
        self.support.get(&qubit).copied().unwrap_or(PauliAxis::I)
    }

    pub fn weight(&self) -> usize {
        self.support.len()
    }

    pub fn is_identity(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, PauliAxis)> + '_ {
        self.support.iter().map(|(&q, &a)| (q, a))
    }

    /// Highest qubit index touched, if any.
    pub fn max_qubit(&self) -> Option<usize> {
        self.support.keys().next_back().copied()
    }

    /// Operator product `self · other` as `(phase, string)`.
    pub fn mul(&self, other: &PauliString) -> (Phase, PauliString) {
        let mut phase = Phase::ONE;
        let mut support = self.support.clone();
        for (&q, &b) in &other.support {
            let a = self.get(q);
            let (p, c) = a.mul(b);
            phase = phase * p;
            if c == PauliAxis::I {
                support.remove(&q);
            } else {
                support.insert(q, c);
            }
        }
        (phase, PauliString { support })
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let clashes = self
            .support
            .iter()
            .filter(|(q, &a)| {
                let b = other.get(**q);
                b != PauliAxis::I && b != a
            })
            .count();
        clashes % 2 == 0
    }

    /// Bit masks `(x, z, y_count)` with `P = i^y_count · X^x Z^z`.
    ///
    /// Qubit indices must be below the word size.
    pub fn masks(&self) -> (usize, usize, u32) {
        let mut x = 0usize;
        let mut z = 0usize;
        let mut ny = 0u32;
        for (&q, &a) in &self.support {
            match a {
                PauliAxis::X => x |= 1 << q,
                PauliAxis::Z => z |= 1 << q,
                PauliAxis::Y => {
                    x |= 1 << q;
                    z |= 1 << q;
                    ny += 1;
                }
                PauliAxis::I => {}
            }
        }
        (x, z, ny)
    }
}

impl FromIterator<(usize, PauliAxis)> for PauliString {
    fn from_iter<T: IntoIterator<Item = (usize, PauliAxis)>>(iter: T) -> Self {
        let mut s = PauliString::identity();
        for (q, a) in iter {
            s.set(q, a);
        }
        s
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.support.is_empty() {
            return write!(f, "I");
        }
        for (n, (q, a)) in self.iter().enumerate() {
            if n > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}{}", a.letter(), q)?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = PauliError;

    /// Parses `"Z0 X1"`, `"Z0X1"` or `"I"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || PauliError::Parse(s.to_string());
        let mut out = PauliString::identity();
        let mut chars = s.chars().filter(|c| !c.is_whitespace()).peekable();
        while let Some(c) = chars.next() {
            let axis = match c {
                'I' => PauliAxis::I,
                'X' => PauliAxis::X,
                'Y' => PauliAxis::Y,
                'Z' => PauliAxis::Z,
                _ => return Err(err()),
            };
            let mut digits = String::new();
            while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                digits.push(*d);
                chars.next();
            }
            if digits.is_empty() {
                if axis == PauliAxis::I {
                    continue;
                }
                return Err(err());
            }
            let q: usize = digits.parse().map_err(|_| err())?;
            if out.get(q) != PauliAxis::I {
                return Err(err());
            }
            out.set(q, axis);
        }
        Ok(out)
    }
}

/// Complex-weighted sum of Pauli strings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PauliSum {
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity(coeff: Complex64) -> Self {
        Self::from_term(PauliString::identity(), coeff)
    }

    pub fn from_term(string: PauliString, coeff: Complex64) -> Self {
        let mut s = Self::zero();
        s.add_term(string, coeff);
        s.prune();
        s
    }

    /// Accumulates a term without pruning.
    pub fn add_term(&mut self, string: PauliString, coeff: Complex64) {
        *self.terms.entry(string).or_insert(Complex64::new(0.0, 0.0)) += coeff;
    }

    /// Drops every coefficient with magnitude below [`PRUNE_TOL`].
    pub fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() >= PRUNE_TOL);
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// True for the zero operator (after pruning).
    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| c.norm() < PRUNE_TOL)
    }

    pub fn coefficient(&self, string: &PauliString) -> Complex64 {
        self.terms
            .get(string)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    /// Largest coefficient magnitude, 0 for the zero operator.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, factor: Complex64) -> PauliSum {
        let mut out = PauliSum {
            terms: self.terms.iter().map(|(s, c)| (s.clone(), c * factor)).collect(),
        };
        out.prune();
        out
    }

    pub fn add(&self, other: &PauliSum) -> PauliSum {
        let mut out = self.clone();
        for (s, c) in &other.terms {
            out.add_term(s.clone(), *c);
        }
        out.prune();
        out
    }

    pub fn sub(&self, other: &PauliSum) -> PauliSum {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &PauliSum) -> PauliSum {
        let mut out = PauliSum::zero();
        for (p, a) in &self.terms {
            for (q, b) in &other.terms {
                let (phase, r) = p.mul(q);
                out.add_term(r, phase.to_complex() * a * b);
            }
        }
        out.prune();
        out
    }

    /// `self·other + other·self`.
    pub fn anticommutator(&self, other: &PauliSum) -> PauliSum {
        self.mul(other).add(&other.mul(self))
    }

    /// `self·other − other·self`.
    pub fn commutator(&self, other: &PauliSum) -> PauliSum {
        self.mul(other).sub(&other.mul(self))
    }

    /// Hermitian adjoint: every string is Hermitian, so only coefficients conjugate.
    pub fn adjoint(&self) -> PauliSum {
        PauliSum {
            terms: self.terms.iter().map(|(s, c)| (s.clone(), c.conj())).collect(),
        }
    }

    pub fn is_hermitian(&self) -> bool {
        self.terms.values().all(|c| c.im.abs() <= HERMITIAN_TOL)
    }

    pub fn max_weight(&self) -> usize {
        self.terms
            .iter()
            .filter(|(_, c)| c.norm() >= PRUNE_TOL)
            .map(|(s, _)| s.weight())
            .max()
            .unwrap_or(0)
    }

    /// Smallest qubit count covering every string's support.
    pub fn min_qubits(&self) -> usize {
        self.terms
            .keys()
            .filter_map(PauliString::max_qubit)
            .max()
            .map_or(0, |q| q + 1)
    }

    /// Dense `2^n × 2^n` matrix with qubit 0 as the least-significant bit.
    pub fn to_matrix(&self, n_qubits: usize) -> Result<DMatrix<Complex64>, PauliError> {
        self.to_matrix_with_limit(n_qubits, oracle_limit())
    }

    pub fn to_matrix_with_limit(
        &self,
        n_qubits: usize,
        limit: usize,
    ) -> Result<DMatrix<Complex64>, PauliError> {
        if n_qubits > limit {
            return Err(PauliError::OracleLimit {
                requested: n_qubits,
                limit,
            });
        }
        self.check_support(n_qubits)?;
        let dim = 1usize << n_qubits;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for (s, c) in &self.terms {
            let (x, z, ny) = s.masks();
            let base = Phase::from_power(ny).to_complex() * c;
            for col in 0..dim {
                let sign = if (col & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                m[(col ^ x, col)] += base * sign;
            }
        }
        Ok(m)
    }

    pub fn check_support(&self, n_qubits: usize) -> Result<(), PauliError> {
        match self.min_qubits() {
            q if q > n_qubits => Err(PauliError::SupportOutOfRange {
                index: q - 1,
                n_qubits,
            }),
            _ => Ok(()),
        }
    }
}

fn clean(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

impl fmt::Display for PauliSum {
    /// One term per line: `(<re>,<im>) <axis><index> …`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (s, c) in &self.terms {
            writeln!(f, "({},{}) {}", clean(c.re), clean(c.im), s)?;
        }
        Ok(())
    }
}

impl FromIterator<(PauliString, Complex64)> for PauliSum {
    fn from_iter<T: IntoIterator<Item = (PauliString, Complex64)>>(iter: T) -> Self {
        let mut s = PauliSum::zero();
        for (p, c) in iter {
            s.add_term(p, c);
        }
        s.prune();
        s
    }
}
