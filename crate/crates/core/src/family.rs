//! The model generators `a_1, …, a_r` attached to a post-critical orbit
//! shape `(r, s)`, their signs, and odometer existence.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::tree::{Letter, LevelPerm, RecursionTable, SignVector, State, StateId, TreeWord};

/// Shape of the post-critical orbit: `p_r → p_1 → … → p_r`, with branch
/// points `p_1` and `p_s`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct PCOrbit {
    r: u32,
    s: u32,
}

impl PCOrbit {
    pub fn new(r: u32, s: u32) -> Result<Self> {
        if r < 3 || s < 2 || s > r {
            return Err(Error::InvalidOrbit { r, s });
        }
        Ok(PCOrbit { r, s })
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    /// Reduces an index into `1..=r`.
    pub fn wrap(&self, i: i64) -> usize {
        (i - 1).rem_euclid(self.r as i64) as usize + 1
    }

    /// `sgn_n(a_i) = -1` iff `n ≡ i` or `n ≡ i + 1 - s (mod r)`.
    pub fn closed_form_sign(&self, i: usize, n: u32) -> i8 {
        let r = self.r as i64;
        let n = n as i64;
        let i = i as i64;
        if (n - i).rem_euclid(r) == 0 || (n - (i + 1 - self.s as i64)).rem_euclid(r) == 0 {
            -1
        } else {
            1
        }
    }
}

impl fmt::Display for PCOrbit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.r, self.s)
    }
}

/// The recursion table of `a_1, …, a_r` (plus `σ`, named `s`).
#[derive(Clone)]
pub struct GeneratorFamily {
    orbit: PCOrbit,
    table: Arc<RecursionTable>,
}

impl GeneratorFamily {
    pub fn generator_name(i: usize) -> String {
        format!("a{i}")
    }

    pub fn orbit(&self) -> PCOrbit {
        self.orbit
    }

    pub fn r(&self) -> u32 {
        self.orbit.r
    }

    pub fn s(&self) -> u32 {
        self.orbit.s
    }

    pub fn table(&self) -> &Arc<RecursionTable> {
        &self.table
    }

    pub fn limits(&self) -> Limits {
        self.table.limits()
    }

    /// State of `a_i`, `1 <= i <= r`.
    pub fn state(&self, i: usize) -> StateId {
        assert!((1..=self.r() as usize).contains(&i), "generator index {i} out of range");
        StateId(i as u32)
    }

    pub fn sigma(&self) -> StateId {
        StateId(self.r() + 1)
    }

    pub fn generator(&self, i: usize) -> TreeWord {
        TreeWord::state(&self.table, self.state(i))
    }

    pub fn generators(&self) -> Vec<TreeWord> {
        (1..=self.r() as usize).map(|i| self.generator(i)).collect()
    }

    /// Product of generators in the listed order.
    pub fn product(&self, indices: &[usize]) -> Result<TreeWord> {
        let letters = indices
            .iter()
            .map(|&i| self.checked_index(i).map(|i| Letter::new(self.state(i))))
            .collect::<Result<Vec<_>>>()?;
        TreeWord::from_letters(&self.table, letters)
    }

    pub fn checked_index(&self, i: usize) -> Result<usize> {
        if (1..=self.r() as usize).contains(&i) {
            Ok(i)
        } else {
            Err(Error::IndexOutOfRange { index: i, r: self.r() })
        }
    }

    pub fn parse_word(&self, text: &str) -> Result<TreeWord> {
        TreeWord::parse(&self.table, text)
    }

    /// A copy with one generator's recursion replaced.
    pub fn with_modified_generator(&self, i: usize, f: impl FnOnce(&State) -> State) -> Result<Self> {
        let id = self.state(i);
        let state = f(self.table.state(id));
        Ok(GeneratorFamily {
            orbit: self.orbit,
            table: Arc::new(self.table.with_state(id, state)?),
        })
    }

    /// `restrict(a_i, n)`.
    pub fn generator_perm(&self, i: usize, level: u32) -> Result<Arc<LevelPerm>> {
        self.table.state_perm(self.state(i), level)
    }

    /// Uniformly random word in `a_i^{±1}` of length `1..=max_len`.
    pub fn random_word<R: Rng + ?Sized>(&self, rng: &mut R, max_len: usize) -> TreeWord {
        let len = rng.random_range(1..=max_len);
        let r = self.r() as usize;
        let letters = (0..len)
            .map(|_| {
                let i = rng.random_range(1..=r);
                Letter {
                    state: self.state(i),
                    inverse: rng.random_bool(0.5),
                }
            })
            .collect();
        TreeWord::from_letters(&self.table, letters).expect("generator states are valid")
    }
}

impl fmt::Debug for GeneratorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GeneratorFamily{} {:?}", self.orbit, self.table)
    }
}

/// Builds `a_1 = (a_r, id)σ`, `a_i = (id, a_{i-1})` for `2 <= i < s`,
/// `a_s = (id, a_{s-1})σ`, `a_i = (a_{i-1}, id)` for `s < i <= r`.
pub fn build_family(orbit: PCOrbit) -> GeneratorFamily {
    build_family_with_limits(orbit, Limits::from_env())
}

pub fn build_family_with_limits(orbit: PCOrbit, limits: Limits) -> GeneratorFamily {
    let r = orbit.r as usize;
    let s = orbit.s as usize;
    let id = RecursionTable::IDENTITY;
    let a = |i: usize| StateId(i as u32);
    let mut states = vec![State {
        name: RecursionTable::IDENTITY_NAME.into(),
        left: id,
        right: id,
        swap: false,
    }];
    for i in 1..=r {
        let (left, right, swap) = if i == 1 {
            (a(r), id, true)
        } else if i < s {
            (id, a(i - 1), false)
        } else if i == s {
            (id, a(s - 1), true)
        } else {
            (a(i - 1), id, false)
        };
        states.push(State {
            name: GeneratorFamily::generator_name(i),
            left,
            right,
            swap,
        });
    }
    states.push(State {
        name: "s".into(),
        left: id,
        right: id,
        swap: true,
    });
    let table = RecursionTable::from_states(states, limits).expect("generator recursion is well formed");
    GeneratorFamily {
        orbit,
        table: Arc::new(table),
    }
}

/// Whether `a_1 ⋯ a_r` acts trivially on level `n`.
pub fn verify_relation(fam: &GeneratorFamily, level: u32) -> Result<bool> {
    let indices: Vec<usize> = (1..=fam.r() as usize).collect();
    Ok(fam.product(&indices)?.restrict(level)?.is_identity())
}

/// The `r × r` table of `sgn_n(a_i)` together with its consistency checks.
#[derive(Clone, Debug, Serialize)]
pub struct SignTable {
    pub orbit: PCOrbit,
    /// `rows[i-1]` is `sgn^r(a_i)`.
    pub rows: Vec<SignVector>,
    /// Every entry equals the closed-form predicate.
    pub matches_closed_form: bool,
    /// Levels `r+1..=3r` repeat levels `1..=r`.
    pub periodic: bool,
}

impl SignTable {
    pub fn row(&self, i: usize) -> &SignVector {
        &self.rows[i - 1]
    }

    pub fn entry(&self, i: usize, n: u32) -> i8 {
        self.rows[i - 1].at(n as usize)
    }
}

pub fn sign_table(fam: &GeneratorFamily) -> SignTable {
    let r = fam.r();
    let orbit = fam.orbit();
    let mut rows = Vec::with_capacity(r as usize);
    let mut matches = true;
    let mut periodic = true;
    for i in 1..=r as usize {
        let a = fam.generator(i);
        let long = a.sign_vector(3 * r);
        for n in 1..=3 * r {
            if long.at(n as usize) != orbit.closed_form_sign(i, n) {
                matches = false;
            }
            if n > r && long.at(n as usize) != long.at((n - r) as usize) {
                periodic = false;
            }
        }
        rows.push(SignVector::new(long.entries()[..r as usize].to_vec()));
    }
    SignTable {
        orbit,
        rows,
        matches_closed_form: matches,
        periodic,
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OdometerMethod {
    Criterion,
    Search,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct OdometerReport {
    pub exists: bool,
    /// Generator indices, in product order.
    pub witness: Option<Vec<usize>>,
    pub method: OdometerMethod,
}

/// Existence of odometers in `G` by the parity criterion, with the
/// constructive witness when one exists.
pub fn odometer_by_criterion(orbit: PCOrbit) -> OdometerReport {
    let r = orbit.r as usize;
    let s = orbit.s as usize;
    let witness = if r.is_multiple_of(2) && s.is_multiple_of(2) {
        Some((1..r).step_by(2).collect::<Vec<_>>())
    } else if s % 2 == 1 && (r / gcd(r, s - 1)).is_multiple_of(2) {
        // every other element of each orbit of i ↦ i + 1 - s
        let mut seen = vec![false; r + 1];
        let mut picked = Vec::with_capacity(r / 2);
        for start in 1..=r {
            if seen[start] {
                continue;
            }
            let mut i = start;
            let mut take = true;
            while !seen[i] {
                seen[i] = true;
                if take {
                    picked.push(i);
                }
                take = !take;
                i = orbit.wrap(i as i64 + 1 - s as i64);
            }
        }
        Some(picked)
    } else {
        None
    };
    OdometerReport {
        exists: witness.is_some(),
        witness,
        method: OdometerMethod::Criterion,
    }
}

pub const MAX_SEARCH_R: u32 = 20;

/// Exhaustive search over exponent-parity classes: level signs of any
/// element of `G` only depend on the parities of its generator exponents,
/// and are `r`-periodic, so an odometer exists iff some subset's sign rows
/// multiply to all `-1` over one period.
pub fn odometer_by_search(fam: &GeneratorFamily) -> Result<OdometerReport> {
    let r = fam.r();
    if r > MAX_SEARCH_R {
        return Err(Error::SearchTooLarge(r));
    }
    let masks: Vec<u64> = (1..=r as usize)
        .map(|i| fam.generator(i).sign_vector(r).to_mask())
        .collect();
    let full = (1u64 << r) - 1;
    let best = (1u64..1 << r)
        .into_par_iter()
        .filter(|&subset| {
            let signs = masks
                .iter()
                .enumerate()
                .filter(|(j, _)| subset >> j & 1 == 1)
                .fold(0, |acc, (_, m)| acc ^ m);
            signs == full
        })
        .map(|subset| {
            (0..r as usize)
                .filter(|j| subset >> j & 1 == 1)
                .map(|j| j + 1)
                .collect::<Vec<_>>()
        })
        .min();
    Ok(OdometerReport {
        exists: best.is_some(),
        witness: best,
        method: OdometerMethod::Search,
    })
}

/// Whether the product of the listed generators is a single `2^n`-cycle.
pub fn certify_odometer(fam: &GeneratorFamily, subset: &[usize], level: u32) -> Result<bool> {
    Ok(fam.product(subset)?.restrict(level)?.is_full_cycle())
}

/// The identity `a_i (c a_i c^{-1}) = (a_{i-1}, a_{i-1})` at level `n`, with
/// `c = a_s` for `1 < i < s` and `c = a_1` for `s < i <= r`.
pub fn diagonal_law_holds(fam: &GeneratorFamily, i: usize, level: u32) -> Result<bool> {
    fam.checked_index(i)?;
    let s = fam.s() as usize;
    if i == 1 || i == s {
        return Err(Error::Precondition(format!(
            "diagonal law needs i ∉ {{1, {s}}}, got {i}"
        )));
    }
    if level == 0 {
        return Ok(true);
    }
    let c = fam.generator(if i < s { s } else { 1 });
    let a = fam.generator(i);
    let lhs = a.mul(&c).mul(&a).mul(&c.inverse()).restrict(level)?;
    let section = fam.generator(i - 1).restrict(level - 1)?;
    let rhs = LevelPerm::from_parts(&section, &section, false)?;
    Ok(lhs == rhs)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
