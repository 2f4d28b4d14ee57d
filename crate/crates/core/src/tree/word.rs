use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::tree::{DyadicExponent, Letter, LevelPerm, RecursionTable, SignVector, StateId, Vertex};

/// A group word in the states of a recursion table and their inverses.
///
/// Letters act left to right. The empty word is the identity.
#[derive(Clone)]
pub struct TreeWord {
    table: Arc<RecursionTable>,
    letters: Vec<Letter>,
}

impl TreeWord {
    pub fn identity(table: &Arc<RecursionTable>) -> Self {
        TreeWord {
            table: Arc::clone(table),
            letters: Vec::new(),
        }
    }

    pub fn from_letters(table: &Arc<RecursionTable>, letters: Vec<Letter>) -> Result<Self> {
        if let Some(bad) = letters.iter().find(|l| l.state.index() >= table.len()) {
            return Err(Error::UnknownState(format!("#{}", bad.state.0)));
        }
        Ok(TreeWord {
            table: Arc::clone(table),
            letters: letters
                .into_iter()
                .filter(|l| l.state != RecursionTable::IDENTITY)
                .collect(),
        })
    }

    pub fn state(table: &Arc<RecursionTable>, id: StateId) -> Self {
        Self::from_letters(table, vec![Letter::new(id)]).expect("state id from the table")
    }

    /// Parses the canonical text form: whitespace-separated tokens such as
    /// `a3`, `a3^-1`, `s`, case-insensitive. `a3^k` repeats the letter.
    pub fn parse(table: &Arc<RecursionTable>, text: &str) -> Result<Self> {
        let mut letters = Vec::new();
        for token in text.split_whitespace() {
            let (name, exp) = match token.split_once('^') {
                Some((name, exp)) => {
                    let exp: i64 = exp.parse().map_err(|_| Error::BadToken(token.to_string()))?;
                    (name, exp)
                }
                None => (token, 1),
            };
            if name.is_empty() {
                return Err(Error::BadToken(token.to_string()));
            }
            let id = table
                .lookup(name)
                .ok_or_else(|| Error::UnknownState(name.to_string()))?;
            let letter = Letter {
                state: id,
                inverse: exp < 0,
            };
            for _ in 0..exp.unsigned_abs() {
                letters.push(letter);
            }
        }
        Self::from_letters(table, letters)
    }

    pub fn table(&self) -> &Arc<RecursionTable> {
        &self.table
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    fn same_table(&self, other: &TreeWord) {
        assert!(Arc::ptr_eq(&self.table, &other.table), "words over different tables");
    }

    /// Concatenation: `self` acts first.
    pub fn mul(&self, other: &TreeWord) -> TreeWord {
        self.same_table(other);
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        TreeWord {
            table: Arc::clone(&self.table),
            letters,
        }
    }

    pub fn inverse(&self) -> TreeWord {
        TreeWord {
            table: Arc::clone(&self.table),
            letters: self.letters.iter().rev().map(|l| l.inv()).collect(),
        }
    }

    pub fn pow(&self, k: i64) -> TreeWord {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut letters = Vec::with_capacity(base.letters.len() * k.unsigned_abs() as usize);
        for _ in 0..k.unsigned_abs() {
            letters.extend_from_slice(&base.letters);
        }
        TreeWord {
            table: Arc::clone(&self.table),
            letters,
        }
    }

    /// Image of a vertex; length is preserved.
    pub fn act(&self, v: &Vertex) -> Vertex {
        self.letters.iter().fold(*v, |u, &l| self.table.act_letter(l, &u))
    }

    /// The section at `v`, by the cocycle rule `(γγ')_v = γ_v γ'_{(v)γ}`.
    pub fn section(&self, v: &Vertex) -> TreeWord {
        let mut at = *v;
        let mut letters = Vec::with_capacity(self.letters.len());
        for &l in &self.letters {
            let s = self.table.section_letter(l, &at);
            if s.state != RecursionTable::IDENTITY {
                letters.push(s);
            }
            at = self.table.act_letter(l, &at);
        }
        TreeWord {
            table: Arc::clone(&self.table),
            letters,
        }
    }

    /// The permutation induced on the `2^level` leaves.
    pub fn restrict(&self, level: u32) -> Result<LevelPerm> {
        self.table.check_level(level)?;
        let mut acc = LevelPerm::identity(level);
        for &l in &self.letters {
            let p = self.table.state_perm(l.state, level)?;
            if l.inverse {
                acc.then_in_place(&p.inverse());
            } else {
                acc.then_in_place(&p);
            }
        }
        Ok(acc)
    }

    /// `sgn_n` by the section recursion; a word's sign is the product of its
    /// letters' signs and inverses do not change signs.
    pub fn sign_at(&self, level: u32) -> i8 {
        assert!(level >= 1, "signs are defined from level 1");
        self.letters
            .iter()
            .map(|l| self.table.state_sign(l.state, level))
            .product()
    }

    pub fn sign_vector(&self, len: u32) -> SignVector {
        assert!(len >= 1, "sign vectors have length at least 1");
        SignVector::new((1..=len).map(|n| self.sign_at(n)).collect())
    }

    /// `γ^k` at level `k.precision()`.
    pub fn power_dyadic(&self, k: &DyadicExponent) -> Result<LevelPerm> {
        self.restrict(k.precision())?.pow_dyadic(k)
    }
}

impl PartialEq for TreeWord {
    /// Letter-wise equality over the same table (not group equality).
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.table, &other.table) && self.letters == other.letters
    }
}

impl Eq for TreeWord {}

impl fmt::Display for TreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str(RecursionTable::IDENTITY_NAME);
        }
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(&self.table.state(l.state).name)?;
            if l.inverse {
                f.write_str("^-1")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for TreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TreeWord({self})")
    }
}
