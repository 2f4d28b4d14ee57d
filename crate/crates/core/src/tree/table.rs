use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::tree::{LevelPerm, Vertex};

/// Index of a state in a [`RecursionTable`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct StateId(pub u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// One wreath recursion `q = (left, right)·σ^swap`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct State {
    pub name: String,
    pub left: StateId,
    pub right: StateId,
    pub swap: bool,
}

impl State {
    pub fn child(&self, x: u8) -> StateId {
        if x == 0 {
            self.left
        } else {
            self.right
        }
    }
}

/// A generator or its inverse.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Letter {
    pub state: StateId,
    pub inverse: bool,
}

impl Letter {
    pub fn new(state: StateId) -> Self {
        Letter { state, inverse: false }
    }

    pub fn inv(self) -> Self {
        Letter {
            state: self.state,
            inverse: !self.inverse,
        }
    }

    /// `+1` or `-1`.
    pub fn exponent(self) -> i8 {
        if self.inverse {
            -1
        } else {
            1
        }
    }
}

#[derive(Default)]
struct Caches {
    // perms[n][q] = q restricted to level n
    perms: Vec<Vec<Arc<LevelPerm>>>,
    // signs[n][q] = sgn_n(q); signs[0] is unused
    signs: Vec<Vec<i8>>,
    sections: HashMap<(Letter, Vertex), Letter>,
}

/// A finite self-similar family of automorphisms given by wreath recursion.
///
/// State 0 is always the identity `id = (id, id)`.
pub struct RecursionTable {
    states: Vec<State>,
    by_name: HashMap<String, StateId>,
    limits: Limits,
    caches: Mutex<Caches>,
}

impl RecursionTable {
    pub const IDENTITY: StateId = StateId(0);
    pub const IDENTITY_NAME: &'static str = "id";

    /// Builds a table from rules `(name, left, right, swap)`; names refer to
    /// each other freely and `id` denotes the identity state.
    pub fn from_rules(rules: &[(&str, &str, &str, bool)]) -> Result<Self> {
        Self::from_rules_with_limits(rules, Limits::from_env())
    }

    pub fn from_rules_with_limits(rules: &[(&str, &str, &str, bool)], limits: Limits) -> Result<Self> {
        let mut by_name = HashMap::new();
        by_name.insert(Self::IDENTITY_NAME.to_string(), Self::IDENTITY);
        for (i, (name, ..)) in rules.iter().enumerate() {
            let key = name.to_ascii_lowercase();
            if by_name.insert(key, StateId(i as u32 + 1)).is_some() {
                return Err(Error::InvalidTable(format!("duplicate state name `{name}`")));
            }
        }
        let lookup = |n: &str| {
            by_name
                .get(&n.to_ascii_lowercase())
                .copied()
                .ok_or_else(|| Error::InvalidTable(format!("reference to undefined state `{n}`")))
        };
        let mut states = vec![State {
            name: Self::IDENTITY_NAME.to_string(),
            left: Self::IDENTITY,
            right: Self::IDENTITY,
            swap: false,
        }];
        for (name, left, right, swap) in rules {
            states.push(State {
                name: name.to_string(),
                left: lookup(left)?,
                right: lookup(right)?,
                swap: *swap,
            });
        }
        Ok(RecursionTable {
            states,
            by_name,
            limits,
            caches: Mutex::new(Caches::default()),
        })
    }

    /// Builds a table directly from states; `states[0]` must be the identity.
    pub fn from_states(states: Vec<State>, limits: Limits) -> Result<Self> {
        let Some(first) = states.first() else {
            return Err(Error::InvalidTable("empty table".into()));
        };
        if first.left != Self::IDENTITY || first.right != Self::IDENTITY || first.swap {
            return Err(Error::InvalidTable("state 0 must be the identity (id, id)".into()));
        }
        let mut by_name = HashMap::new();
        for (i, st) in states.iter().enumerate() {
            if st.left.index() >= states.len() || st.right.index() >= states.len() {
                return Err(Error::InvalidTable(format!("state `{}` refers out of range", st.name)));
            }
            if by_name
                .insert(st.name.to_ascii_lowercase(), StateId(i as u32))
                .is_some()
            {
                return Err(Error::InvalidTable(format!("duplicate state name `{}`", st.name)));
            }
        }
        Ok(RecursionTable {
            states,
            by_name,
            limits,
            caches: Mutex::new(Caches::default()),
        })
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn state(&self, id: StateId) -> &State {
        &self.states[id.index()]
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn limits(&self) -> Limits {
        self.limits
    }

    pub fn max_level(&self) -> u32 {
        self.limits.max_level
    }

    pub fn lookup(&self, name: &str) -> Option<StateId> {
        self.by_name.get(&name.to_ascii_lowercase()).copied()
    }

    pub fn check_level(&self, level: u32) -> Result<()> {
        if level > self.limits.max_level {
            return Err(Error::LevelTooDeep {
                level,
                max: self.limits.max_level,
            });
        }
        Ok(())
    }

    /// Image of `v` under a single letter.
    pub fn act_letter(&self, letter: Letter, v: &Vertex) -> Vertex {
        let mut q = letter.state;
        let mut out = Vertex::root();
        for x in v.bits() {
            let st = &self.states[q.index()];
            let y = x ^ u8::from(st.swap);
            out = out.child(y);
            // the inverse reads its section at the image letter
            q = st.child(if letter.inverse { y } else { x });
        }
        out
    }

    /// Section of a letter at `v`; the table is closed under sections, so
    /// this is again a single letter.
    pub fn section_letter(&self, letter: Letter, v: &Vertex) -> Letter {
        if v.is_root() {
            return letter;
        }
        let key = (letter, *v);
        if let Some(hit) = self.caches.lock().unwrap().sections.get(&key) {
            return *hit;
        }
        let mut q = letter.state;
        for x in v.bits() {
            let st = &self.states[q.index()];
            let y = x ^ u8::from(st.swap);
            q = st.child(if letter.inverse { y } else { x });
        }
        let out = Letter {
            state: q,
            inverse: letter.inverse,
        };
        self.caches.lock().unwrap().sections.insert(key, out);
        out
    }

    /// The level-`n` permutation of a state, built recursively from the
    /// level-`n-1` permutations of its sections.
    pub fn state_perm(&self, id: StateId, level: u32) -> Result<Arc<LevelPerm>> {
        self.check_level(level)?;
        let mut caches = self.caches.lock().unwrap();
        while caches.perms.len() <= level as usize {
            let n = caches.perms.len() as u32;
            let next: Vec<Arc<LevelPerm>> = if n == 0 {
                (0..self.states.len())
                    .map(|_| Arc::new(LevelPerm::identity(0)))
                    .collect()
            } else {
                let prev = &caches.perms[n as usize - 1];
                self.states
                    .iter()
                    .map(|st| {
                        Arc::new(
                            LevelPerm::from_parts(&prev[st.left.index()], &prev[st.right.index()], st.swap)
                                .expect("sections share a level"),
                        )
                    })
                    .collect()
            };
            caches.perms.push(next);
        }
        Ok(Arc::clone(&caches.perms[level as usize][id.index()]))
    }

    /// `sgn_n` of a state via `sgn_1 = swap parity`,
    /// `sgn_n(q) = sgn_{n-1}(q_0) · sgn_{n-1}(q_1)`.
    pub fn state_sign(&self, id: StateId, level: u32) -> i8 {
        assert!(level >= 1, "signs start at level 1");
        let mut caches = self.caches.lock().unwrap();
        if caches.signs.is_empty() {
            caches.signs.push(Vec::new());
            caches
                .signs
                .push(self.states.iter().map(|st| if st.swap { -1 } else { 1 }).collect());
        }
        while caches.signs.len() <= level as usize {
            let prev = caches.signs.last().unwrap();
            let next = self
                .states
                .iter()
                .map(|st| prev[st.left.index()] * prev[st.right.index()])
                .collect();
            caches.signs.push(next);
        }
        caches.signs[level as usize][id.index()]
    }

    /// A copy of this table with one state's recursion replaced; caches are
    /// not shared.
    pub fn with_state(&self, id: StateId, state: State) -> Result<Self> {
        let mut states = self.states.clone();
        states[id.index()] = state;
        Self::from_states(states, self.limits)
    }
}

impl fmt::Debug for RecursionTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.states.iter().map(|s| s.to_string_in(self)))
            .finish()
    }
}

impl fmt::Display for RecursionTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for st in self.states.iter().skip(1) {
            writeln!(f, "{}", st.to_string_in(self))?;
        }
        Ok(())
    }
}

impl State {
    /// Renders `name = (left, right)σ`.
    pub fn to_string_in(&self, table: &RecursionTable) -> String {
        let l = &table.state(self.left).name;
        let r = &table.state(self.right).name;
        format!("{} = ({}, {}){}", self.name, l, r, if self.swap { "σ" } else { "" })
    }
}
