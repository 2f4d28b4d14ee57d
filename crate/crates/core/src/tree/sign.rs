use std::fmt;

use serde::{Deserialize, Serialize};

/// `(sgn_1, …, sgn_m)` of an element.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SignVector {
    entries: Vec<i8>,
}

impl SignVector {
    pub fn new(entries: Vec<i8>) -> Self {
        assert!(!entries.is_empty(), "sign vectors have length at least 1");
        assert!(entries.iter().all(|&e| e == 1 || e == -1), "signs are ±1");
        SignVector { entries }
    }

    pub fn ones(len: usize) -> Self {
        SignVector::new(vec![1; len])
    }

    pub fn entries(&self) -> &[i8] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Entry for level `n`, counted from 1.
    pub fn at(&self, level: usize) -> i8 {
        self.entries[level - 1]
    }

    pub fn product(&self, other: &SignVector) -> SignVector {
        assert_eq!(self.len(), other.len());
        SignVector {
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a * b).collect(),
        }
    }

    pub fn all_negative(&self) -> bool {
        self.entries.iter().all(|&e| e == -1)
    }

    /// Bit `j` set iff `sgn_{j+1} = -1`.
    pub fn to_mask(&self) -> u64 {
        assert!(self.len() <= 64);
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, &e)| e == -1)
            .fold(0, |m, (j, _)| m | (1 << j))
    }
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SignVector{self}")
    }
}

/// A 2-adic integer truncated to `precision` bits.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct DyadicExponent {
    residue: u64,
    precision: u32,
}

impl DyadicExponent {
    pub fn new(residue: u64, precision: u32) -> Self {
        assert!(precision < 64);
        DyadicExponent {
            residue: residue & ((1u64 << precision) - 1),
            precision,
        }
    }

    /// Reduces a signed integer, so `-1` becomes `2^precision - 1`.
    pub fn from_i64(k: i64, precision: u32) -> Self {
        assert!(precision < 64);
        let modulus = 1i128 << precision;
        let r = (i128::from(k)).rem_euclid(modulus);
        DyadicExponent {
            residue: r as u64,
            precision,
        }
    }

    pub fn residue(&self) -> u64 {
        self.residue
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Units of ℤ₂ are the odd residues.
    pub fn is_unit(&self) -> bool {
        self.precision == 0 || self.residue & 1 == 1
    }
}
