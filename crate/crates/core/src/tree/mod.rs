//! Automorphisms of the rooted binary tree given by wreath recursion.

mod conjugacy;
mod perm;
mod sign;
mod table;
mod vertex;
mod word;

pub use conjugacy::{conjugate_test, ConjugacyClassifier};
pub use perm::LevelPerm;
pub use sign::{DyadicExponent, SignVector};
pub use table::{Letter, RecursionTable, State, StateId};
pub use vertex::Vertex;
pub use word::TreeWord;

#[cfg(test)]
mod tests;
