//! Fermion-to-qubit transformations.
//!
//! Four schemes are supported: Jordan–Wigner, Parity, Bravyi–Kitaev (mode
//! count a power of two) and the Fenwick-tree generalisation of
//! Bravyi–Kitaev for arbitrary mode counts. Every ladder operator maps to
//!
//! ```text
//! a_j  -> ½ (Z_P X_j + i Z_R Y_j) X_U
//! a_j† -> ½ (Z_P X_j − i Z_R Y_j) X_U
//! ```
//!
//! with scheme-specific index sets: `P` produces the parity sign, `R = P − F`
//! is what remains once the flip set is folded into the occupation test, and
//! `U` lists the qubits whose stored sums include mode `j`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fermion::{FermionError, FermionSum, FermionTerm, OccupationVector};
use crate::pauli::{PauliAxis, PauliString, PauliSum};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodingError {
    #[error("the bk mapping needs a power-of-two mode count, got {0}; use bktree for arbitrary counts")]
    NotPowerOfTwo(usize),
    #[error("mode count must be positive")]
    ZeroModes,
    #[error("mode {mode} out of range for {modes} modes")]
    ModeOutOfRange { mode: usize, modes: usize },
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("unknown mapping {0:?} (expected jw, parity, bk or bktree)")]
    UnknownScheme(String),
    #[error("bit strings contain only 0 and 1, got {0:?}")]
    BadBitString(String),
}

impl From<FermionError> for EncodingError {
    fn from(e: FermionError) -> Self {
        match e {
            FermionError::ModeOutOfRange { mode, modes } => {
                EncodingError::ModeOutOfRange { mode, modes }
            }
            FermionError::BadOccupation(s) => EncodingError::BadBitString(s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MappingScheme {
    JordanWigner,
    Parity,
    BravyiKitaev,
    BravyiKitaevTree,
}

impl MappingScheme {
    pub const ALL: [MappingScheme; 4] = [
        MappingScheme::JordanWigner,
        MappingScheme::Parity,
        MappingScheme::BravyiKitaev,
        MappingScheme::BravyiKitaevTree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MappingScheme::JordanWigner => "jw",
            MappingScheme::Parity => "parity",
            MappingScheme::BravyiKitaev => "bk",
            MappingScheme::BravyiKitaevTree => "bktree",
        }
    }

    /// Whether the scheme can encode `modes` fermionic modes.
    pub fn supports(self, modes: usize) -> bool {
        modes > 0 && (self != MappingScheme::BravyiKitaev || modes.is_power_of_two())
    }
}

impl fmt::Display for MappingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MappingScheme {
    type Err = EncodingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jw" | "jordan-wigner" => Ok(MappingScheme::JordanWigner),
            "parity" => Ok(MappingScheme::Parity),
            "bk" | "bravyi-kitaev" => Ok(MappingScheme::BravyiKitaev),
            "bktree" | "bk-tree" => Ok(MappingScheme::BravyiKitaevTree),
            _ => Err(EncodingError::UnknownScheme(s.to_string())),
        }
    }
}

/// Computational-basis label; character `k` is qubit `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![false; n])
    }

    pub fn from_index(index: usize, n: usize) -> Self {
        Self((0..n).map(|q| index >> q & 1 == 1).collect())
    }

    /// Basis index with qubit 0 as the least-significant bit.
    pub fn index(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .fold(0, |acc, (q, _)| acc | 1 << q)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, q: usize) -> bool {
        self.0[q]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn xor(&self, other: &BitString) -> BitString {
        BitString(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect())
    }
}

impl FromStr for BitString {
    type Err = EncodingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(EncodingError::BadBitString(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// Parity, flip, update and summation sets for every mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSets {
    pub modes: usize,
    pub parity: Vec<BTreeSet<usize>>,
    pub flip: Vec<BTreeSet<usize>>,
    pub update: Vec<BTreeSet<usize>>,
    pub summation: Vec<BTreeSet<usize>>,
}

impl IndexSets {
    fn empty(modes: usize) -> Self {
        Self {
            modes,
            parity: vec![BTreeSet::new(); modes],
            flip: vec![BTreeSet::new(); modes],
            update: vec![BTreeSet::new(); modes],
            summation: vec![BTreeSet::new(); modes],
        }
    }

    /// `P(j) − F(j)`.
    pub fn remainder(&self, j: usize) -> BTreeSet<usize> {
        self.parity[j].difference(&self.flip[j]).copied().collect()
    }
}

/// Sets from the binary-digit conditions, for `modes = 2^d`.
///
/// Digits are read most-significant first, so "trailing" digits are the low
/// bits of the index.
pub fn build_sets_closed_form(modes: usize) -> Result<IndexSets, EncodingError> {
    if modes == 0 {
        return Err(EncodingError::ZeroModes);
    }
    if !modes.is_power_of_two() {
        return Err(EncodingError::NotPowerOfTwo(modes));
    }
    let d = modes.trailing_zeros() as usize;
    let mut sets = IndexSets::empty(modes);
    for j in 0..modes {
        // t = number of free low digits
        for t in 0..=d {
            let low = (1usize << t) - 1;
            if j & low == low {
                for r in 0..=low {
                    let k = (j & !low) | r;
                    if k != j {
                        sets.summation[j].insert(k);
                    }
                }
            }
            let k = j | low;
            if k != j {
                sets.update[j].insert(k);
            }
        }
        for b in 0..d {
            let bit = 1usize << b;
            let below = bit - 1;
            if j & bit != 0 {
                sets.parity[j].insert((j & !(bit | below)) | below);
                if j & below == below {
                    sets.flip[j].insert(j & !bit);
                }
            }
        }
    }
    Ok(sets)
}

/// Rooted tree on modes `0..M` from recursive midpoint bisection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FenwickTree {
    parent: Vec<Option<usize>>,
    children: Vec<BTreeSet<usize>>,
}

impl FenwickTree {
    pub fn build(modes: usize) -> Result<Self, EncodingError> {
        if modes == 0 {
            return Err(EncodingError::ZeroModes);
        }
        let mut tree = FenwickTree {
            parent: vec![None; modes],
            children: vec![BTreeSet::new(); modes],
        };
        tree.bisect(0, modes - 1);
        Ok(tree)
    }

    fn bisect(&mut self, lo: usize, hi: usize) {
        if lo >= hi {
            return;
        }
        let mid = (lo + hi) / 2;
        self.parent[mid] = Some(hi);
        self.children[hi].insert(mid);
        self.bisect(lo, mid);
        self.bisect(mid + 1, hi);
    }

    pub fn modes(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> usize {
        self.modes() - 1
    }

    pub fn parent(&self, j: usize) -> Option<usize> {
        self.parent[j]
    }

    pub fn children(&self, j: usize) -> &BTreeSet<usize> {
        &self.children[j]
    }

    pub fn ancestors(&self, j: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let mut cur = self.parent[j];
        while let Some(p) = cur {
            out.insert(p);
            cur = self.parent[p];
        }
        out
    }

    pub fn descendants(&self, j: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let mut stack: Vec<usize> = self.children[j].iter().copied().collect();
        while let Some(c) = stack.pop() {
            out.insert(c);
            stack.extend(self.children[c].iter().copied());
        }
        out
    }

    /// Nodes whose stored subtree sums add up to `Σ_{k<j} n_k`.
    ///
    /// Each subtree covers a contiguous index range ending at its root, so the
    /// prefix `[0, j)` is peeled off right to left one subtree at a time.
    pub fn prefix_nodes(&self, j: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let mut end = j;
        while end > 0 {
            let node = end - 1;
            out.insert(node);
            let low = self.descendants(node).into_iter().min().unwrap_or(node);
            debug_assert_eq!(node + 1 - low, self.descendants(node).len() + 1);
            end = low;
        }
        out
    }
}

/// Index sets read off the tree: children, descendants, ancestors and the
/// prefix-query parity set.
pub fn sets_from_tree(tree: &FenwickTree) -> IndexSets {
    let modes = tree.modes();
    let mut sets = IndexSets::empty(modes);
    for j in 0..modes {
        sets.flip[j] = tree.children(j).clone();
        sets.summation[j] = tree.descendants(j);
        sets.update[j] = tree.ancestors(j);
        sets.parity[j] = tree.prefix_nodes(j);
    }
    sets
}

pub fn build_fenwick(modes: usize) -> Result<FenwickTree, EncodingError> {
    FenwickTree::build(modes)
}

/// A scheme bound to a mode count, with index sets and all `2M` ladder images
/// computed once.
#[derive(Debug, Clone)]
pub struct FermionQubitMapping {
    scheme: MappingScheme,
    modes: usize,
    sets: Option<IndexSets>,
    annihilators: Vec<PauliSum>,
    creators: Vec<PauliSum>,
}

fn zs(indices: impl IntoIterator<Item = usize>) -> PauliString {
    indices.into_iter().map(|q| (q, PauliAxis::Z)).collect()
}

fn xs(indices: impl IntoIterator<Item = usize>) -> PauliString {
    indices.into_iter().map(|q| (q, PauliAxis::X)).collect()
}

/// `½ (zp·X_j ± i zr·Y_j) · xu`, `+` for annihilation.
fn ladder_image(
    j: usize,
    dagger: bool,
    zp: PauliString,
    zr: PauliString,
    xu: PauliString,
) -> PauliSum {
    let with = |mut s: PauliString, axis: PauliAxis| {
        s.set(j, axis);
        let (phase, out) = s.mul(&xu);
        debug_assert_eq!(phase, crate::pauli::Phase::ONE);
        out
    };
    let sign = if dagger { -1.0 } else { 1.0 };
    PauliSum::from_iter([
        (with(zp, PauliAxis::X), Complex64::new(0.5, 0.0)),
        (with(zr, PauliAxis::Y), Complex64::new(0.0, 0.5 * sign)),
    ])
}

impl FermionQubitMapping {
    pub fn new(scheme: MappingScheme, modes: usize) -> Result<Self, EncodingError> {
        if modes == 0 {
            return Err(EncodingError::ZeroModes);
        }
        let sets = match scheme {
            MappingScheme::BravyiKitaev => Some(build_sets_closed_form(modes)?),
            MappingScheme::BravyiKitaevTree => Some(sets_from_tree(&FenwickTree::build(modes)?)),
            _ => None,
        };
        let mut mapping = Self {
            scheme,
            modes,
            sets,
            annihilators: Vec::with_capacity(modes),
            creators: Vec::with_capacity(modes),
        };
        for j in 0..modes {
            mapping.annihilators.push(mapping.build_image(j, false));
            mapping.creators.push(mapping.build_image(j, true));
        }
        Ok(mapping)
    }

    fn build_image(&self, j: usize, dagger: bool) -> PauliSum {
        match self.scheme {
            MappingScheme::JordanWigner => {
                let z = zs(0..j);
                ladder_image(j, dagger, z.clone(), z, PauliString::identity())
            }
            MappingScheme::Parity => {
                let zp = zs(j.checked_sub(1));
                ladder_image(j, dagger, zp, PauliString::identity(), xs(j + 1..self.modes))
            }
            MappingScheme::BravyiKitaev | MappingScheme::BravyiKitaevTree => {
                let sets = self.sets.as_ref().expect("tree schemes carry index sets");
                ladder_image(
                    j,
                    dagger,
                    zs(sets.parity[j].iter().copied()),
                    zs(sets.remainder(j)),
                    xs(sets.update[j].iter().copied()),
                )
            }
        }
    }

    pub fn scheme(&self) -> MappingScheme {
        self.scheme
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Index sets for the BK-type schemes.
    pub fn index_sets(&self) -> Option<&IndexSets> {
        self.sets.as_ref()
    }

    pub fn ladder(&self, j: usize, dagger: bool) -> Result<&PauliSum, EncodingError> {
        let images = if dagger { &self.creators } else { &self.annihilators };
        images.get(j).ok_or(EncodingError::ModeOutOfRange {
            mode: j,
            modes: self.modes,
        })
    }

    pub fn map_term(&self, term: &FermionTerm) -> Result<PauliSum, EncodingError> {
        let mut acc = PauliSum::identity(term.coeff);
        for op in &term.ops {
            acc = acc.mul(self.ladder(op.mode, op.dagger)?);
        }
        Ok(acc)
    }

    pub fn map_sum(&self, sum: &FermionSum) -> Result<PauliSum, EncodingError> {
        let mut out = PauliSum::zero();
        for term in &sum.terms {
            for (s, c) in self.map_term(term)?.iter() {
                out.add_term(s.clone(), *c);
            }
        }
        out.prune();
        Ok(out)
    }

    pub fn encode(&self, n: &OccupationVector) -> Result<BitString, EncodingError> {
        self.check_len(n.len())?;
        let bits = match self.scheme {
            MappingScheme::JordanWigner => n.as_slice().to_vec(),
            MappingScheme::Parity => n
                .as_slice()
                .iter()
                .scan(false, |acc, &b| {
                    *acc ^= b;
                    Some(*acc)
                })
                .collect(),
            MappingScheme::BravyiKitaev | MappingScheme::BravyiKitaevTree => {
                let sets = self.sets.as_ref().expect("tree schemes carry index sets");
                (0..self.modes)
                    .map(|j| sets.summation[j].iter().fold(n.get(j), |acc, &k| acc ^ n.get(k)))
                    .collect()
            }
        };
        Ok(BitString::new(bits))
    }

    pub fn decode(&self, x: &BitString) -> Result<OccupationVector, EncodingError> {
        self.check_len(x.len())?;
        let occ = match self.scheme {
            MappingScheme::JordanWigner => x.as_slice().to_vec(),
            MappingScheme::Parity => (0..self.modes)
                .map(|j| x.get(j) ^ (j > 0 && x.get(j - 1)))
                .collect(),
            MappingScheme::BravyiKitaev | MappingScheme::BravyiKitaevTree => {
                let sets = self.sets.as_ref().expect("tree schemes carry index sets");
                (0..self.modes)
                    .map(|j| sets.flip[j].iter().fold(x.get(j), |acc, &k| acc ^ x.get(k)))
                    .collect()
            }
        };
        Ok(OccupationVector::new(occ))
    }

    pub fn weight_profile(&self) -> WeightProfile {
        let per_mode: Vec<usize> = self.annihilators.iter().map(PauliSum::max_weight).collect();
        let max = per_mode.iter().copied().max().unwrap_or(0);
        WeightProfile { per_mode, max }
    }

    fn check_len(&self, got: usize) -> Result<(), EncodingError> {
        if got != self.modes {
            return Err(EncodingError::LengthMismatch {
                expected: self.modes,
                got,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightProfile {
    pub per_mode: Vec<usize>,
    pub max: usize,
}

pub fn encode_occupations(
    scheme: MappingScheme,
    n: &OccupationVector,
) -> Result<BitString, EncodingError> {
    FermionQubitMapping::new(scheme, n.len())?.encode(n)
}

pub fn decode_bitstring(
    scheme: MappingScheme,
    x: &BitString,
) -> Result<OccupationVector, EncodingError> {
    FermionQubitMapping::new(scheme, x.len())?.decode(x)
}

pub fn map_ladder(
    scheme: MappingScheme,
    j: usize,
    dagger: bool,
    modes: usize,
) -> Result<PauliSum, EncodingError> {
    FermionQubitMapping::new(scheme, modes)?
        .ladder(j, dagger)
        .cloned()
}

pub fn map_fermion_sum(
    scheme: MappingScheme,
    s: &FermionSum,
    modes: usize,
) -> Result<PauliSum, EncodingError> {
    FermionQubitMapping::new(scheme, modes)?.map_sum(s)
}

pub fn pauli_weight_profile(
    scheme: MappingScheme,
    modes: usize,
) -> Result<WeightProfile, EncodingError> {
    Ok(FermionQubitMapping::new(scheme, modes)?.weight_profile())
}

impl TryFrom<String> for MappingScheme {
    type Error = <MappingScheme as FromStr>::Err;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<MappingScheme> for String {
    fn from(v: MappingScheme) -> String {
        v.to_string()
    }
}
