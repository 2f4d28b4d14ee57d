use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A vertex of the rooted binary tree: a finite word over {0, 1}.
///
/// The word is packed most-significant-bit first, so the index of a vertex
/// at level `n` is also its leaf index in a level-`n` permutation.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Vertex {
    level: u32,
    index: u64,
}

impl Vertex {
    pub const MAX_LEVEL: u32 = 64;

    pub fn root() -> Self {
        Vertex::default()
    }

    pub fn new(level: u32, index: u64) -> Self {
        assert!(level <= Self::MAX_LEVEL, "vertex level {level} too deep");
        if level < 64 {
            assert!(index >> level == 0, "index {index} out of range for level {level}");
        }
        Vertex { level, index }
    }

    pub fn from_bits<I: IntoIterator<Item = u8>>(bits: I) -> Self {
        let mut v = Vertex::root();
        for b in bits {
            v = v.child(b);
        }
        v
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Leaf index at this vertex's level.
    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn is_root(&self) -> bool {
        self.level == 0
    }

    /// The `i`-th letter, counted from the root.
    pub fn bit(&self, i: u32) -> u8 {
        debug_assert!(i < self.level);
        ((self.index >> (self.level - 1 - i)) & 1) as u8
    }

    pub fn bits(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.level).map(move |i| self.bit(i))
    }

    pub fn child(&self, x: u8) -> Self {
        assert!(self.level < Self::MAX_LEVEL);
        Vertex {
            level: self.level + 1,
            index: (self.index << 1) | u64::from(x & 1),
        }
    }

    pub fn prefix(&self, len: u32) -> Self {
        assert!(len <= self.level);
        Vertex {
            level: len,
            index: self.index >> (self.level - len),
        }
    }

    /// The word with its first `len` letters removed.
    pub fn suffix(&self, len: u32) -> Self {
        assert!(len <= self.level);
        let rest = self.level - len;
        let mask = if rest == 64 { u64::MAX } else { (1u64 << rest) - 1 };
        Vertex {
            level: rest,
            index: self.index & mask,
        }
    }

    pub fn concat(&self, tail: &Vertex) -> Self {
        assert!(self.level + tail.level <= Self::MAX_LEVEL);
        let index = if tail.level == 64 {
            tail.index
        } else {
            (self.index << tail.level) | tail.index
        };
        Vertex {
            level: self.level + tail.level,
            index,
        }
    }

    /// All vertices of a level, in leaf-index order.
    pub fn level_iter(level: u32) -> impl Iterator<Item = Vertex> {
        assert!(level < 64);
        (0..(1u64 << level)).map(move |index| Vertex { level, index })
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.level == 0 {
            return f.write_str("∅");
        }
        for b in self.bits() {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Vertex({self})")
    }
}

impl FromStr for Vertex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "∅" {
            return Ok(Vertex::root());
        }
        if s.len() > Self::MAX_LEVEL as usize {
            return Err(Error::Precondition(format!("vertex `{s}` is deeper than 64 levels")));
        }
        let mut v = Vertex::root();
        for c in s.chars() {
            match c {
                '0' => v = v.child(0),
                '1' => v = v.child(1),
                _ => return Err(Error::Precondition(format!("vertex `{s}` is not a binary word"))),
            }
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn msb_first_encoding() {
        let v: Vertex = "10".parse().unwrap();
        assert_eq!(v.level(), 2);
        assert_eq!(v.index(), 2);
        assert_eq!(v.bit(0), 1);
        assert_eq!(v.bit(1), 0);
        assert_eq!(v.to_string(), "10");
    }

    #[test]
    fn prefix_suffix_concat() {
        let v: Vertex = "01101".parse().unwrap();
        assert_eq!(v.prefix(2).to_string(), "01");
        assert_eq!(v.suffix(2).to_string(), "101");
        assert_eq!(v.prefix(2).concat(&v.suffix(2)), v);
        assert!(v.prefix(0).is_root());
    }

    #[test]
    fn rejects_non_binary() {
        assert!("012".parse::<Vertex>().is_err());
    }
}
