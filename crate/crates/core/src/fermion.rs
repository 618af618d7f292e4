//! Second-quantized ladder-operator algebra over occupation-number states.
//!
//! Modes are indexed from 0. Products are kept in the order written; nothing
//! is normal-ordered at this level.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::pauli::PRUNE_TOL;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FermionError {
    #[error("mode {mode} out of range for {modes} modes")]
    ModeOutOfRange { mode: usize, modes: usize },
    #[error("occupation entries must be 0 or 1, got {0:?}")]
    BadOccupation(String),
}

/// `a_j` (`dagger == false`) or `a_j†` (`dagger == true`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LadderOp {
    pub mode: usize,
    pub dagger: bool,
}

impl LadderOp {
    pub fn create(mode: usize) -> Self {
        Self { mode, dagger: true }
    }

    pub fn annihilate(mode: usize) -> Self {
        Self {
            mode,
            dagger: false,
        }
    }

    pub fn adjoint(self) -> Self {
        Self {
            mode: self.mode,
            dagger: !self.dagger,
        }
    }
}

impl fmt::Display for LadderOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dagger {
            write!(f, "a^ {}", self.mode)
        } else {
            write!(f, "a {}", self.mode)
        }
    }
}

/// Occupation-number basis state `|n_0, …, n_{M−1}⟩`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationVector(Vec<bool>);

impl OccupationVector {
    pub fn new(occupied: Vec<bool>) -> Self {
        Self(occupied)
    }

    pub fn empty(modes: usize) -> Self {
        Self(vec![false; modes])
    }

    /// Basis state for `index`, mode `j` taken from bit `j`.
    pub fn from_index(index: usize, modes: usize) -> Self {
        Self((0..modes).map(|j| index >> j & 1 == 1).collect())
    }

    pub fn index(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &n)| n)
            .fold(0, |acc, (j, _)| acc | 1 << j)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, j: usize) -> bool {
        self.0[j]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn particle_count(&self) -> usize {
        self.0.iter().filter(|&&n| n).count()
    }
}

impl FromStr for OccupationVector {
    type Err = FermionError;

    /// Character `k` of the input is mode `k`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(FermionError::BadOccupation(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self)
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &n in &self.0 {
            write!(f, "{}", if n { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// Applies a single ladder operator to a basis state.
///
/// Returns `None` when the state is annihilated, otherwise the parity sign
/// `(−1)^(Σ_{k<j} n_k)` and the resulting state.
pub fn apply_ladder(
    op: LadderOp,
    basis: &OccupationVector,
) -> Result<Option<(f64, OccupationVector)>, FermionError> {
    let modes = basis.len();
    if op.mode >= modes {
        return Err(FermionError::ModeOutOfRange {
            mode: op.mode,
            modes,
        });
    }
    let occupied = basis.0[op.mode];
    if occupied == op.dagger {
        return Ok(None);
    }
    let below = basis.0[..op.mode].iter().filter(|&&n| n).count();
    let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
    let mut out = basis.clone();
    out.0[op.mode] = op.dagger;
    Ok(Some((sign, out)))
}

/// Coefficient times an ordered product of ladder operators.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionTerm {
    pub ops: Vec<LadderOp>,
    pub coeff: Complex64,
}

impl FermionTerm {
    pub fn new(ops: Vec<LadderOp>, coeff: Complex64) -> Self {
        Self { ops, coeff }
    }

    pub fn scalar(coeff: Complex64) -> Self {
        Self {
            ops: Vec::new(),
            coeff,
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            ops: self.ops.iter().rev().map(|op| op.adjoint()).collect(),
            coeff: self.coeff.conj(),
        }
    }

    pub fn max_mode(&self) -> Option<usize> {
        self.ops.iter().map(|op| op.mode).max()
    }

    /// Acts on a basis state, rightmost operator first.
    pub fn apply(
        &self,
        basis: &OccupationVector,
    ) -> Result<Option<(Complex64, OccupationVector)>, FermionError> {
        let mut state = basis.clone();
        let mut amp = self.coeff;
        for op in self.ops.iter().rev() {
            match apply_ladder(*op, &state)? {
                Some((sign, next)) => {
                    amp *= sign;
                    state = next;
                }
                None => return Ok(None),
            }
        }
        Ok(Some((amp, state)))
    }
}

impl fmt::Display for FermionTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.coeff.re, self.coeff.im)?;
        for op in &self.ops {
            write!(f, " {op}")?;
        }
        Ok(())
    }
}

/// Sum of [`FermionTerm`]s.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FermionSum {
    pub terms: Vec<FermionTerm>,
}

impl FermionSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: Vec<FermionTerm>) -> Self {
        Self { terms }
    }

    pub fn single(ops: Vec<LadderOp>, coeff: Complex64) -> Self {
        Self {
            terms: vec![FermionTerm::new(ops, coeff)],
        }
    }

    pub fn push(&mut self, term: FermionTerm) {
        self.terms.push(term);
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_mode(&self) -> Option<usize> {
        self.terms.iter().filter_map(FermionTerm::max_mode).max()
    }

    pub fn add(&self, other: &FermionSum) -> FermionSum {
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        out.simplify()
    }

    pub fn scale(&self, factor: Complex64) -> FermionSum {
        FermionSum {
            terms: self
                .terms
                .iter()
                .map(|t| FermionTerm::new(t.ops.clone(), t.coeff * factor))
                .collect(),
        }
        .simplify()
    }

    /// Concatenates operator lists pairwise.
    pub fn mul(&self, other: &FermionSum) -> FermionSum {
        let mut terms = Vec::with_capacity(self.len() * other.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut ops = a.ops.clone();
                ops.extend_from_slice(&b.ops);
                terms.push(FermionTerm::new(ops, a.coeff * b.coeff));
            }
        }
        FermionSum { terms }.simplify()
    }

    /// Merges terms with identical operator lists (first-seen order) and
    /// drops coefficients below the pruning threshold.
    pub fn simplify(&self) -> FermionSum {
        let mut merged: Vec<FermionTerm> = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            match merged.iter_mut().find(|m| m.ops == t.ops) {
                Some(m) => m.coeff += t.coeff,
                None => merged.push(t.clone()),
            }
        }
        merged.retain(|t| t.coeff.norm() >= PRUNE_TOL);
        FermionSum { terms: merged }
    }

    /// Expectation value on a basis state, evaluated term by term.
    pub fn basis_expectation(&self, basis: &OccupationVector) -> Result<Complex64, FermionError> {
        let mut total = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            if let Some((amp, out)) = t.apply(basis)? {
                if &out == basis {
                    total += amp;
                }
            }
        }
        Ok(total)
    }

    /// Dense matrix on the `2^modes` Fock space, basis index bit `j` = `n_j`.
    pub fn fock_matrix(&self, modes: usize) -> Result<DMatrix<Complex64>, FermionError> {
        let dim = 1usize << modes;
        let mut m = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let basis = OccupationVector::from_index(col, modes);
            for t in &self.terms {
                if let Some((amp, out)) = t.apply(&basis)? {
                    m[(out.index(), col)] += amp;
                }
            }
        }
        Ok(m)
    }
}

/// Hermitian adjoint: reverses products, flips daggers, conjugates coefficients.
pub fn conjugate(s: &FermionSum) -> FermionSum {
    FermionSum {
        terms: s.terms.iter().map(FermionTerm::adjoint).collect(),
    }
}

/// `t − t†`.
pub fn anti_hermitian_generator(t: &FermionSum) -> FermionSum {
    let mut out = t.clone();
    out.terms.extend(
        conjugate(t)
            .terms
            .into_iter()
            .map(|x| FermionTerm::new(x.ops, -x.coeff)),
    );
    out.simplify()
}

/// `a_j† a_j`.
pub fn number_operator(j: usize, modes: usize) -> Result<FermionSum, FermionError> {
    if j >= modes {
        return Err(FermionError::ModeOutOfRange { mode: j, modes });
    }
    Ok(FermionSum::single(
        vec![LadderOp::create(j), LadderOp::annihilate(j)],
        Complex64::new(1.0, 0.0),
    ))
}

/// `Σ_j a_j† a_j` over all modes.
pub fn total_number_operator(modes: usize) -> FermionSum {
    FermionSum::from_terms(
        (0..modes)
            .map(|j| {
                FermionTerm::new(
                    vec![LadderOp::create(j), LadderOp::annihilate(j)],
                    Complex64::new(1.0, 0.0),
                )
            })
            .collect(),
    )
}

/// Syntax error in a ladder expression, with the byte offset of the fault.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at column {}", .position + 1)]
pub struct LadderParseError {
    pub input: String,
    pub position: usize,
    pub message: String,
}

impl LadderParseError {
    /// Multi-line message with a caret under the offending column.
    pub fn annotated(&self) -> String {
        format!(
            "error: {}\n  {}\n  {}^",
            self.message,
            self.input,
            " ".repeat(self.position)
        )
    }
}

/// Parses a product such as `"a^ 2 a 0"` into a unit-coefficient term.
pub fn parse_ladder_product(input: &str) -> Result<FermionTerm, LadderParseError> {
    let fail = |position: usize, message: &str| LadderParseError {
        input: input.to_string(),
        position,
        message: message.to_string(),
    };
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, ch) in input.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                tokens.push((s, &input[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        tokens.push((s, &input[s..]));
    }
    if tokens.is_empty() {
        return Err(fail(0, "empty ladder expression"));
    }

    let mut ops = Vec::new();
    let mut iter = tokens.into_iter();
    while let Some((pos, tok)) = iter.next() {
        let dagger = match tok {
            "a^" => true,
            "a" => false,
            _ => return Err(fail(pos, "expected `a` or `a^`")),
        };
        let (mpos, mode) = iter
            .next()
            .ok_or_else(|| fail(input.len(), "expected mode index"))?;
        let mode: usize = mode
            .parse()
            .map_err(|_| fail(mpos, "expected non-negative mode index"))?;
        ops.push(LadderOp { mode, dagger });
    }
    Ok(FermionTerm::new(ops, Complex64::new(1.0, 0.0)))
}
