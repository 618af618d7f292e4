//! FCIDUMP ingestion and second-quantized molecular Hamiltonians.
//!
//! Spin orbitals are interleaved: spatial orbital `p` with spin `σ` (0 = α,
//! 1 = β) is mode `2p + σ`. Two-electron integrals are in chemists' notation
//! `(pq|rs)`.
//!
//! Orbital energies are not read. The Hartree–Fock reference occupies the
//! lowest-index spin orbitals, which assumes the file lists orbitals in
//! ascending energy order (what common FCIDUMP writers emit).

use std::fmt::Write as _;

use num_complex::Complex64;
use thiserror::Error;

use crate::fermion::{FermionSum, FermionTerm, LadderOp, OccupationVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FcidumpError {
    #[error("no `&FCI` namelist header found")]
    MissingHeader,
    #[error("namelist header starting on line {0} is never terminated by `&END` or `/`")]
    UnterminatedHeader(usize),
    #[error("header is missing required key {0}")]
    MissingKey(&'static str),
    #[error("line {line}: cannot read header value {key}={value:?}")]
    BadHeaderValue {
        line: usize,
        key: String,
        value: String,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: orbital index {index} outside 1..={norb}")]
    IndexOutOfRange { line: usize, index: usize, norb: usize },
    #[error("inconsistent header: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{nelec} electrons do not fit in {modes} spin orbitals")]
pub struct TooManyElectrons {
    pub nelec: usize,
    pub modes: usize,
}

/// One- and two-electron integrals over spatial orbitals, in Hartree.
#[derive(Debug, Clone, PartialEq)]
pub struct MolecularIntegrals {
    pub norb: usize,
    pub nelec: usize,
    pub ms2: i64,
    pub e_core: f64,
    h1: Vec<f64>,
    h2: Vec<f64>,
}

impl MolecularIntegrals {
    /// All-zero integrals.
    pub fn new(norb: usize, nelec: usize, ms2: i64) -> Result<Self, FcidumpError> {
        if nelec > 2 * norb {
            return Err(FcidumpError::Inconsistent(format!(
                "NELEC={nelec} exceeds 2*NORB={}",
                2 * norb
            )));
        }
        if ms2.unsigned_abs() as usize > nelec {
            return Err(FcidumpError::Inconsistent(format!(
                "|MS2|={} exceeds NELEC={nelec}",
                ms2.abs()
            )));
        }
        Ok(Self {
            norb,
            nelec,
            ms2,
            e_core: 0.0,
            h1: vec![0.0; norb * norb],
            h2: vec![0.0; norb.pow(4)],
        })
    }

    /// Spin-orbital (mode) count.
    pub fn modes(&self) -> usize {
        2 * self.norb
    }

    pub fn h1(&self, p: usize, q: usize) -> f64 {
        self.h1[p * self.norb + q]
    }

    pub fn set_h1(&mut self, p: usize, q: usize, value: f64) {
        let n = self.norb;
        self.h1[p * n + q] = value;
        self.h1[q * n + p] = value;
    }

    fn eri_index(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        ((p * self.norb + q) * self.norb + r) * self.norb + s
    }

    /// `(pq|rs)`, 0-based.
    pub fn eri(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.h2[self.eri_index(p, q, r, s)]
    }

    /// Sets `(pq|rs)` and its seven symmetry images.
    pub fn set_eri(&mut self, p: usize, q: usize, r: usize, s: usize, value: f64) {
        for (a, b, c, d) in [
            (p, q, r, s),
            (q, p, r, s),
            (p, q, s, r),
            (q, p, s, r),
            (r, s, p, q),
            (s, r, p, q),
            (r, s, q, p),
            (s, r, q, p),
        ] {
            let idx = self.eri_index(a, b, c, d);
            self.h2[idx] = value;
        }
    }

    /// FCIDUMP text with one record per symmetry-unique nonzero integral.
    pub fn to_fcidump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            " &FCI NORB={},NELEC={},MS2={},\n &END",
            self.norb, self.nelec, self.ms2
        );
        let n = self.norb;
        for p in 0..n {
            for q in 0..=p {
                for r in 0..n {
                    for s in 0..=r {
                        if p * (p + 1) / 2 + q < r * (r + 1) / 2 + s {
                            continue;
                        }
                        let v = self.eri(p, q, r, s);
                        if v != 0.0 {
                            let _ = writeln!(out, "{v:e} {} {} {} {}", p + 1, q + 1, r + 1, s + 1);
                        }
                    }
                }
            }
        }
        for p in 0..n {
            for q in 0..=p {
                let v = self.h1(p, q);
                if v != 0.0 {
                    let _ = writeln!(out, "{v:e} {} {} 0 0", p + 1, q + 1);
                }
            }
        }
        let _ = writeln!(out, "{:e} 0 0 0 0", self.e_core);
        out
    }
}

/// Splits `KEY=value,KEY=value` namelist text into pairs.
fn namelist_pairs(text: &str) -> Vec<(String, String)> {
    let parts: Vec<&str> = text.split('=').collect();
    let trailing_ident = |s: &str| -> (String, String) {
        let trimmed = s.trim_end();
        let start = trimmed
            .rfind(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .map_or(0, |i| i + 1);
        (trimmed[..start].to_string(), trimmed[start..].to_ascii_uppercase())
    };
    let mut pairs = Vec::new();
    let mut key = trailing_ident(parts[0]).1;
    for (i, part) in parts.iter().enumerate().skip(1) {
        let (value, next_key) = if i + 1 < parts.len() {
            trailing_ident(part)
        } else {
            (part.to_string(), String::new())
        };
        pairs.push((key, value.trim().trim_matches(',').trim().to_string()));
        key = next_key;
    }
    pairs
}

fn parse_float(token: &str) -> Option<f64> {
    token.replace(['D', 'd'], "E").parse().ok()
}

pub fn parse_fcidump(text: &str) -> Result<MolecularIntegrals, FcidumpError> {
    let lines: Vec<&str> = text.lines().collect();
    let mut cursor = 0;
    let mut header = String::new();
    let mut header_start = None;
    let mut terminated = false;

    while cursor < lines.len() {
        let line = lines[cursor].trim();
        cursor += 1;
        if line.is_empty() || line.starts_with('!') {
            continue;
        }
        let body = match header_start {
            None => {
                let upper = line.to_ascii_uppercase();
                if !upper.starts_with("&FCI") {
                    return Err(FcidumpError::MissingHeader);
                }
                header_start = Some(cursor);
                &line[4..]
            }
            Some(_) => line,
        };
        let upper = body.to_ascii_uppercase();
        let end = upper.find("&END").or_else(|| upper.find('/'));
        header.push_str(&body[..end.unwrap_or(body.len())]);
        header.push(' ');
        if end.is_some() {
            terminated = true;
            break;
        }
    }
    let header_line = header_start.ok_or(FcidumpError::MissingHeader)?;
    if !terminated {
        return Err(FcidumpError::UnterminatedHeader(header_line));
    }

    let pairs = namelist_pairs(&header);
    let lookup = |key: &'static str| -> Result<i64, FcidumpError> {
        let (_, value) = pairs
            .iter()
            .find(|(k, _)| k == key)
            .ok_or(FcidumpError::MissingKey(key))?;
        value
            .split(',')
            .next()
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| FcidumpError::BadHeaderValue {
                line: header_line,
                key: key.to_string(),
                value: value.clone(),
            })
    };
    let norb = lookup("NORB")?;
    let nelec = lookup("NELEC")?;
    let ms2 = lookup("MS2")?;
    if norb < 0 || nelec < 0 {
        return Err(FcidumpError::Inconsistent("negative NORB or NELEC".into()));
    }
    let norb = norb as usize;
    let mut ints = MolecularIntegrals::new(norb, nelec as usize, ms2)?;

    for (offset, raw) in lines[cursor..].iter().enumerate() {
        let line_no = cursor + offset + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('!') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(FcidumpError::Malformed {
                line: line_no,
                message: format!("expected `value i j k l`, found {} fields", fields.len()),
            });
        }
        let value = parse_float(fields[0]).ok_or_else(|| FcidumpError::Malformed {
            line: line_no,
            message: format!("cannot read {:?} as a number", fields[0]),
        })?;
        let mut idx = [0usize; 4];
        for (slot, field) in idx.iter_mut().zip(&fields[1..]) {
            *slot = field.parse().map_err(|_| FcidumpError::Malformed {
                line: line_no,
                message: format!("cannot read {field:?} as an orbital index"),
            })?;
            if *slot > norb {
                return Err(FcidumpError::IndexOutOfRange {
                    line: line_no,
                    index: *slot,
                    norb,
                });
            }
        }
        match idx {
            [0, 0, 0, 0] => ints.e_core = value,
            [i, j, 0, 0] if i > 0 && j > 0 => ints.set_h1(i - 1, j - 1, value),
            // orbital energies
            [i, 0, 0, 0] if i > 0 => {}
            [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => {
                ints.set_eri(i - 1, j - 1, k - 1, l - 1, value)
            }
            _ => {
                return Err(FcidumpError::Malformed {
                    line: line_no,
                    message: format!("unsupported index pattern {idx:?}"),
                })
            }
        }
    }
    Ok(ints)
}

pub fn spin_orbital(spatial: usize, spin: usize) -> usize {
    2 * spatial + spin
}

/// `H = e_core + Σ h_pq a†_pσ a_qσ + ½ Σ (pq|rs) a†_pσ a†_rτ a_sτ a_qσ`.
pub fn to_fermion_hamiltonian(ints: &MolecularIntegrals) -> FermionSum {
    let n = ints.norb;
    let c = |v: f64| Complex64::new(v, 0.0);
    let mut h = FermionSum::zero();
    if ints.e_core != 0.0 {
        h.push(FermionTerm::scalar(c(ints.e_core)));
    }
    for p in 0..n {
        for q in 0..n {
            let v = ints.h1(p, q);
            if v == 0.0 {
                continue;
            }
            for sigma in 0..2 {
                h.push(FermionTerm::new(
                    vec![
                        LadderOp::create(spin_orbital(p, sigma)),
                        LadderOp::annihilate(spin_orbital(q, sigma)),
                    ],
                    c(v),
                ));
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let v = ints.eri(p, q, r, s);
                    if v == 0.0 {
                        continue;
                    }
                    for sigma in 0..2 {
                        for tau in 0..2 {
                            let (ps, qs) = (spin_orbital(p, sigma), spin_orbital(q, sigma));
                            let (rt, st) = (spin_orbital(r, tau), spin_orbital(s, tau));
                            if ps == rt || qs == st {
                                continue;
                            }
                            h.push(FermionTerm::new(
                                vec![
                                    LadderOp::create(ps),
                                    LadderOp::create(rt),
                                    LadderOp::annihilate(st),
                                    LadderOp::annihilate(qs),
                                ],
                                c(0.5 * v),
                            ));
                        }
                    }
                }
            }
        }
    }
    h
}

/// Occupies spin orbitals `0..nelec`.
pub fn hf_reference(nelec: usize, modes: usize) -> Result<OccupationVector, TooManyElectrons> {
    if nelec > modes {
        return Err(TooManyElectrons { nelec, modes });
    }
    Ok(OccupationVector::new((0..modes).map(|j| j < nelec).collect()))
}
