use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{DyadicExponent, Vertex};

/// The action of a tree automorphism on the `2^level` leaves of level `level`.
///
/// `images[i]` is the image of leaf `i`. Products compose left to right, in
/// agreement with the right action on the tree: `p.then(&q)` applies `p`
/// first.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LevelPerm {
    level: u32,
    images: Vec<u32>,
}

impl LevelPerm {
    pub fn identity(level: u32) -> Self {
        LevelPerm {
            level,
            images: (0..1u32 << level).collect(),
        }
    }

    /// Validates that `images` is a permutation of the leaves that preserves
    /// the tree structure.
    pub fn from_images(level: u32, images: Vec<u32>) -> Result<Self> {
        let degree = 1usize << level;
        if images.len() != degree {
            return Err(Error::InvalidPermutation(format!(
                "expected {degree} images at level {level}, got {}",
                images.len()
            )));
        }
        let mut seen = vec![false; degree];
        for &img in &images {
            let img = img as usize;
            if img >= degree || seen[img] {
                return Err(Error::InvalidPermutation(format!(
                    "image {img} repeated or out of range"
                )));
            }
            seen[img] = true;
        }
        for k in 1..=level {
            for (i, &img) in images.iter().enumerate() {
                let block_start = (i >> k) << k;
                if img >> k != images[block_start] >> k {
                    return Err(Error::InvalidPermutation(format!(
                        "leaf map does not preserve level {} vertices",
                        level - k
                    )));
                }
            }
        }
        Ok(LevelPerm { level, images })
    }

    pub(crate) fn from_images_unchecked(level: u32, images: Vec<u32>) -> Self {
        debug_assert_eq!(images.len(), 1usize << level);
        LevelPerm { level, images }
    }

    /// Builds `(left, right)·swap` from two permutations one level down.
    pub fn from_parts(left: &LevelPerm, right: &LevelPerm, swap: bool) -> Result<Self> {
        if left.level != right.level {
            return Err(Error::LevelMismatch(left.level, right.level));
        }
        let half = left.degree() as u32;
        let mut images = Vec::with_capacity(2 * half as usize);
        for (x, part) in [left, right].into_iter().enumerate() {
            let top = (x as u32 ^ u32::from(swap)) * half;
            images.extend(part.images.iter().map(|&v| top + v));
        }
        Ok(LevelPerm {
            level: left.level + 1,
            images,
        })
    }

    /// Splits a level-`n` permutation (`n >= 1`) into its two level-`n-1`
    /// sections and the root swap.
    pub fn decompose(&self) -> (LevelPerm, LevelPerm, bool) {
        assert!(self.level >= 1, "cannot decompose a level-0 permutation");
        let half = self.degree() / 2;
        let mask = half as u32 - 1;
        let swap = self.images[0] as usize >= half;
        let left = self.images[..half].iter().map(|&v| v & mask).collect();
        let right = self.images[half..].iter().map(|&v| v & mask).collect();
        (
            LevelPerm::from_images_unchecked(self.level - 1, left),
            LevelPerm::from_images_unchecked(self.level - 1, right),
            swap,
        )
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }

    pub fn apply(&self, leaf: u32) -> u32 {
        self.images[leaf as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| i as u32 == v)
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &LevelPerm) -> LevelPerm {
        assert_eq!(self.level, other.level, "level mismatch in product");
        let images = self.images.iter().map(|&v| other.images[v as usize]).collect();
        LevelPerm {
            level: self.level,
            images,
        }
    }

    pub(crate) fn then_in_place(&mut self, other: &LevelPerm) {
        debug_assert_eq!(self.level, other.level);
        for v in self.images.iter_mut() {
            *v = other.images[*v as usize];
        }
    }

    pub fn inverse(&self) -> LevelPerm {
        let mut images = vec![0u32; self.images.len()];
        for (i, &v) in self.images.iter().enumerate() {
            images[v as usize] = i as u32;
        }
        LevelPerm {
            level: self.level,
            images,
        }
    }

    pub fn pow(&self, mut exp: u64) -> LevelPerm {
        let mut base = self.clone();
        let mut acc = LevelPerm::identity(self.level);
        while exp > 0 {
            if exp & 1 == 1 {
                acc.then_in_place(&base);
            }
            exp >>= 1;
            if exp > 0 {
                base = base.then(&base);
            }
        }
        acc
    }

    /// Signed integer power.
    pub fn pow_i64(&self, exp: i64) -> LevelPerm {
        if exp >= 0 {
            self.pow(exp as u64)
        } else {
            self.inverse().pow(exp.unsigned_abs())
        }
    }

    /// The 2-adic power: `Ω_n` has exponent `2^n`, so only the residue matters.
    pub fn pow_dyadic(&self, k: &DyadicExponent) -> Result<LevelPerm> {
        if k.precision() != self.level {
            return Err(Error::LevelMismatch(k.precision(), self.level));
        }
        Ok(self.pow(k.residue()))
    }

    /// `q^{-1} p q` as a right action, i.e. `self` conjugated by `by`.
    pub fn conjugate_by(&self, by: &LevelPerm) -> LevelPerm {
        by.inverse().then(self).then(by)
    }

    /// Restriction to a shallower level (the projection `π_{n,m}`).
    pub fn project(&self, level: u32) -> LevelPerm {
        assert!(level <= self.level);
        let shift = self.level - level;
        let images = (0..1u32 << level)
            .map(|i| self.images[(i << shift) as usize] >> shift)
            .collect();
        LevelPerm { level, images }
    }

    /// The section at vertex `v`: the level-`(n - |v|)` permutation induced
    /// on the subtree below `v`.
    pub fn section_at(&self, v: &Vertex) -> LevelPerm {
        assert!(v.level() <= self.level);
        let depth = self.level - v.level();
        let base = (v.index() as u32) << depth;
        let mask = (1u32 << depth) - 1;
        let images = (0..1u32 << depth)
            .map(|u| self.images[(base | u) as usize] & mask)
            .collect();
        LevelPerm { level: depth, images }
    }

    /// Lengths of all cycles, in order of their smallest leaf.
    pub fn cycle_lengths(&self) -> Vec<usize> {
        let mut seen = vec![false; self.images.len()];
        let mut out = Vec::new();
        for start in 0..self.images.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = self.images[x] as usize;
                len += 1;
            }
            out.push(len);
        }
        out
    }

    /// `+1` for even permutations, `-1` for odd ones.
    pub fn parity(&self) -> i8 {
        let transpositions: usize = self.cycle_lengths().iter().map(|l| l - 1).sum();
        if transpositions.is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// Order of the permutation. Cycle lengths of tree automorphisms are
    /// powers of two, so this is the longest cycle.
    pub fn order(&self) -> u64 {
        self.cycle_lengths().into_iter().max().unwrap_or(1) as u64
    }

    pub fn is_full_cycle(&self) -> bool {
        let mut x = 0usize;
        for step in 1..=self.images.len() {
            x = self.images[x] as usize;
            if x == 0 {
                return step == self.images.len();
            }
        }
        false
    }

    /// Orbit length of a single leaf.
    pub fn orbit_len(&self, leaf: u32) -> usize {
        let mut x = self.images[leaf as usize];
        let mut len = 1;
        while x != leaf {
            x = self.images[x as usize];
            len += 1;
        }
        len
    }

    /// Cycle notation over leaf bit strings, e.g. `(00 10)(01 11)`.
    pub fn cycle_notation(&self) -> String {
        let mut seen = vec![false; self.images.len()];
        let mut out = String::new();
        for start in 0..self.images.len() {
            if seen[start] || self.images[start] as usize == start {
                seen[start] = true;
                continue;
            }
            out.push('(');
            let mut x = start;
            let mut first = true;
            while !seen[x] {
                seen[x] = true;
                if !first {
                    out.push(' ');
                }
                first = false;
                out.push_str(&leaf_label(x as u32, self.level));
                x = self.images[x] as usize;
            }
            out.push(')');
        }
        if out.is_empty() {
            out.push_str("id");
        }
        out
    }
}

fn leaf_label(leaf: u32, level: u32) -> String {
    (0..level)
        .map(|i| if (leaf >> (level - 1 - i)) & 1 == 1 { '1' } else { '0' })
        .collect()
}

impl fmt::Debug for LevelPerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LevelPerm[{}]{}", self.level, self.cycle_notation())
    }
}
