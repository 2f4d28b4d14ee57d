//! Frobenius factor trees: the preimage tree of a base point under a
//! quadratic rational map over `𝔽_p`, one node per Frobenius orbit.

mod factor;
mod field;
mod map;
mod poly;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits::Limits;

pub use factor::{distinct_degree, equal_degree, factor, squarefree_decomposition};
pub use field::{PrimeField, MAX_PRIME};
pub use map::{PostCriticalSet, ProjPoint, RationalMap};
pub use poly::Poly;

/// Affine preimages of an orbit plus the number of preimages at infinity.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Fiber {
    pub affine: Poly,
    pub at_infinity: usize,
}

/// The orbit a node stands for: the roots of a monic irreducible, or the
/// point at infinity (a virtual root).
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Root {
    Affine(Poly),
    Infinity,
}

impl Root {
    pub fn degree(&self) -> usize {
        match self {
            Root::Affine(g) => g.deg(),
            Root::Infinity => 1,
        }
    }
}

/// Pullback of an affine orbit: the normalized numerator of
/// `v^{deg g} · g(u/v)` plus the count of preimages at infinity.
pub fn lift_fiber(g: &Poly, f: &RationalMap) -> Fiber {
    let h = map::form_eval(g, g.deg(), f.numerator(), f.denominator(), &|a, b| a.mul(b));
    let expected = 2 * g.deg();
    Fiber {
        at_infinity: expected - h.deg(),
        affine: h.monic(),
    }
}

/// The pullback polynomial `h` of `g`, with errors for a degree drop (a
/// root of `g` is `f(∞)`) or a repeated preimage. The ramification level is
/// relative to `g`, so it is always 1 here.
pub fn lift(g: &Poly, f: &RationalMap) -> Result<Poly> {
    let fiber = lift_fiber(g, f);
    if fiber.at_infinity > 0 {
        return Err(Error::DegreeDrop {
            expected: 2 * g.deg(),
            affine: fiber.affine.deg(),
            at_infinity: fiber.at_infinity,
        });
    }
    if !fiber.affine.is_squarefree() {
        return Err(Error::Ramified { level: 1 });
    }
    Ok(fiber.affine)
}

/// Preimages of infinity: roots of `v`, plus infinity itself when
/// `deg u > deg v`.
pub fn lift_infinity(f: &RationalMap) -> Fiber {
    let v = f.denominator();
    Fiber {
        affine: v.monic(),
        at_infinity: 2 - v.deg(),
    }
}

fn fiber_of(root: &Root, f: &RationalMap) -> Fiber {
    match root {
        Root::Affine(g) => lift_fiber(g, f),
        Root::Infinity => lift_infinity(f),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeStatus {
    /// Every chain below doubles degree with a single child down to depth D.
    StableThroughD,
    Split,
    /// A level-D node.
    Boundary,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FactorNode {
    pub root: Root,
    pub level: u32,
    pub parent: Option<usize>,
    /// Indices into the next level.
    pub children: Vec<usize>,
    pub status: NodeStatus,
}

impl FactorNode {
    pub fn degree(&self) -> usize {
        self.root.degree()
    }
}

#[derive(Clone, Debug)]
pub struct FactorTree {
    pub map: RationalMap,
    pub base: u64,
    pub depth: u32,
    pub seed: u64,
    /// `levels[n]` holds the level-`n` nodes.
    pub levels: Vec<Vec<FactorNode>>,
}

impl FactorTree {
    pub fn field(&self) -> PrimeField {
        self.map.field()
    }

    pub fn degree_sum(&self, n: u32) -> usize {
        self.levels[n as usize].iter().map(|node| node.degree()).sum()
    }
}

/// Builds the tree of `f^{-n}(a)` for `n <= depth`.
pub fn build_tree(f: &RationalMap, a: u64, depth: u32, seed: u64) -> Result<FactorTree> {
    build_tree_with_limits(f, a, depth, seed, Limits::from_env())
}

pub fn build_tree_with_limits(f: &RationalMap, a: u64, depth: u32, seed: u64, limits: Limits) -> Result<FactorTree> {
    let p = f.field().p();
    if depth > limits.max_frob_depth {
        return Err(Error::DepthTooLarge {
            depth,
            max: limits.max_frob_depth,
        });
    }
    if a >= p {
        return Err(Error::Precondition(format!(
            "base point {a} is not a residue modulo {p}"
        )));
    }
    if f.post_critical_set().residues.contains(&a) {
        return Err(Error::PostCriticalBase { a, p });
    }
    let mut levels = vec![vec![FactorNode {
        root: Root::Affine(Poly::linear(f.field(), a)),
        level: 0,
        parent: None,
        children: Vec::new(),
        status: NodeStatus::Boundary,
    }]];
    for n in 1..=depth {
        let prev = levels.last_mut().expect("level 0 exists");
        let lifted = prev
            .par_iter()
            .enumerate()
            .map(|(k, node)| {
                let fiber = fiber_of(&node.root, f);
                if fiber.at_infinity >= 2 || !fiber.affine.is_squarefree() {
                    return Err(Error::Ramified { level: n });
                }
                let seed = seed ^ ((u64::from(n) << 32) | k as u64);
                let mut roots: Vec<Root> = factor(&fiber.affine, seed)
                    .into_iter()
                    .map(|(g, _)| Root::Affine(g))
                    .collect();
                if fiber.at_infinity == 1 {
                    roots.push(Root::Infinity);
                }
                Ok(roots)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut next = Vec::new();
        for (k, roots) in lifted.into_iter().enumerate() {
            for root in roots {
                prev[k].children.push(next.len());
                next.push(FactorNode {
                    root,
                    level: n,
                    parent: Some(k),
                    children: Vec::new(),
                    status: NodeStatus::Boundary,
                });
            }
        }
        levels.push(next);
    }
    for n in (0..depth as usize).rev() {
        let (upper, lower) = levels.split_at_mut(n + 1);
        for node in upper[n].iter_mut() {
            let stable = match node.children.as_slice() {
                [only] => {
                    let child = &lower[0][*only];
                    child.degree() == 2 * node.degree() && child.status != NodeStatus::Split
                }
                _ => false,
            };
            node.status = if stable {
                NodeStatus::StableThroughD
            } else {
                NodeStatus::Split
            };
        }
    }
    Ok(FactorTree {
        map: f.clone(),
        base: a,
        depth,
        seed,
        levels,
    })
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct FrobeniusLevel {
    pub n: u32,
    /// Factor degrees, largest first: the cycle type of Frobenius on the
    /// level-`n` preimages.
    pub cycle_type: Vec<usize>,
    /// Degree share of nodes whose chain to depth D is single-child doubling.
    pub stable_proportion: f64,
    pub virtual_roots: usize,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct FrobeniusReport {
    pub p: u64,
    pub a: u64,
    pub map: String,
    pub depth: u32,
    pub seed: u64,
    pub levels: Vec<FrobeniusLevel>,
    pub errors: Vec<String>,
}

pub fn frobenius_report(tree: &FactorTree) -> FrobeniusReport {
    let levels = tree
        .levels
        .iter()
        .enumerate()
        .map(|(n, nodes)| {
            let mut cycle_type: Vec<usize> = nodes.iter().map(|node| node.degree()).collect();
            cycle_type.sort_unstable_by(|a, b| b.cmp(a));
            let stable: usize = nodes
                .iter()
                .filter(|node| node.status != NodeStatus::Split)
                .map(|node| node.degree())
                .sum();
            FrobeniusLevel {
                n: n as u32,
                cycle_type,
                stable_proportion: stable as f64 / (1u64 << n) as f64,
                virtual_roots: nodes.iter().filter(|node| node.root == Root::Infinity).count(),
            }
        })
        .collect();
    FrobeniusReport {
        p: tree.field().p(),
        a: tree.base,
        map: tree.map.to_string(),
        depth: tree.depth,
        seed: tree.seed,
        levels,
        errors: Vec::new(),
    }
}

/// Builds and reports; failures land in the `errors` field.
pub fn frobenius_run(f: &RationalMap, a: u64, depth: u32, seed: u64) -> FrobeniusReport {
    match build_tree(f, a, depth, seed) {
        Ok(tree) => frobenius_report(&tree),
        Err(e) => FrobeniusReport {
            p: f.field().p(),
            a,
            map: f.to_string(),
            depth,
            seed,
            levels: Vec::new(),
            errors: vec![e.to_string()],
        },
    }
}

/// Checks level `n` against `f^n = U_n/V_n`: the affine factors multiply to
/// `monic(U_n - a V_n)` and the virtual roots account for the degree drop.
pub fn reconstruction_holds(tree: &FactorTree, n: u32) -> bool {
    let field = tree.field();
    let (u, v) = tree.map.iterate(n);
    let target = u.sub(&v.scale(tree.base));
    let nodes = &tree.levels[n as usize];
    let product = nodes.iter().fold(Poly::one(field), |acc, node| match &node.root {
        Root::Affine(g) => acc.mul(g),
        Root::Infinity => acc,
    });
    let virtual_roots = nodes.iter().filter(|node| node.root == Root::Infinity).count();
    product == target.monic() && target.deg() + virtual_roots == 1 << n
}

/// Base points in `0..p` outside the post-critical set.
pub fn valid_base_points(f: &RationalMap) -> Vec<u64> {
    let pc = f.post_critical_set();
    (0..f.field().p()).filter(|a| !pc.residues.contains(a)).collect()
}

#[cfg(test)]
mod tests;
