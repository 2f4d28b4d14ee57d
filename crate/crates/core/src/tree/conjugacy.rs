use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::tree::LevelPerm;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum ClassKey {
    // (γ_0, γ_1)σ: determined by the class of γ_0 γ_1
    Swap { level: u32, product: u32 },
    // (γ_0, γ_1): the unordered pair of section classes
    Split { level: u32, lo: u32, hi: u32 },
}

/// Canonical conjugacy-class labels for elements of `Ω_n`.
///
/// Two level-`n` automorphisms are conjugate in `Ω_n` iff they receive the
/// same label. The label is computed recursively: a root swap reduces to the
/// class of the product of the two sections, otherwise to the unordered pair
/// of section classes.
#[derive(Default)]
pub struct ConjugacyClassifier {
    keys: HashMap<ClassKey, u32>,
    memo: HashMap<LevelPerm, u32>,
}

impl ConjugacyClassifier {
    // id 0 is the single class at level 0
    const LEVEL_ZERO: u32 = 0;

    pub fn new() -> Self {
        Self::default()
    }

    pub fn class_id(&mut self, p: &LevelPerm) -> u32 {
        if p.level() == 0 {
            return Self::LEVEL_ZERO;
        }
        if let Some(&id) = self.memo.get(p) {
            return id;
        }
        let (left, right, swap) = p.decompose();
        let key = if swap {
            ClassKey::Swap {
                level: p.level(),
                product: self.class_id(&left.then(&right)),
            }
        } else {
            let a = self.class_id(&left);
            let b = self.class_id(&right);
            ClassKey::Split {
                level: p.level(),
                lo: a.min(b),
                hi: a.max(b),
            }
        };
        let next = self.keys.len() as u32 + 1;
        let id = *self.keys.entry(key).or_insert(next);
        self.memo.insert(p.clone(), id);
        id
    }

    pub fn conjugate(&mut self, p: &LevelPerm, q: &LevelPerm) -> Result<bool> {
        if p.level() != q.level() {
            return Err(Error::LevelMismatch(p.level(), q.level()));
        }
        Ok(self.class_id(p) == self.class_id(q))
    }
}

/// Whether `p` and `q` are conjugate in `Ω_n`.
pub fn conjugate_test(p: &LevelPerm, q: &LevelPerm) -> Result<bool> {
    ConjugacyClassifier::new().conjugate(p, q)
}
