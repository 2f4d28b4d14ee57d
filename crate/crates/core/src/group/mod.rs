//! Exact finite-level group computations: orders of `G_n`, the normal
//! closures `N_{i,n}`, cyclic quotients, semidirect splitting, and the
//! abelianization for `s = 2`.

mod chain;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::GeneratorFamily;
use crate::tree::{LevelPerm, TreeWord};
use chain::{commutator, LayeredChain};

/// A subgroup of `Aut(T_n)` with an exact strong generating set.
#[derive(Clone)]
pub struct PermGroup {
    level: u32,
    generators: Vec<LevelPerm>,
    chain: LayeredChain,
}

impl PermGroup {
    pub fn trivial(level: u32) -> Self {
        PermGroup {
            level,
            generators: Vec::new(),
            chain: LayeredChain::new(level),
        }
    }

    /// The subgroup generated by `gens`.
    pub fn generated(level: u32, gens: Vec<LevelPerm>) -> Result<Self> {
        check_perms(level, &gens)?;
        let mut chain = LayeredChain::new(level);
        chain.absorb(gens.iter().cloned(), &gens);
        Ok(PermGroup {
            level,
            generators: gens,
            chain,
        })
    }

    /// The normal closure of `ys` in `self`. The elements of `ys` must lie in
    /// `self`.
    pub fn normal_closure(&self, ys: Vec<LevelPerm>) -> Result<PermGroup> {
        check_perms(self.level, &ys)?;
        if let Some(y) = ys.iter().find(|y| !self.contains(y)) {
            return Err(Error::Precondition(format!(
                "normal closure of a non-member {}",
                y.cycle_notation()
            )));
        }
        let mut chain = LayeredChain::new(self.level);
        chain.absorb(ys.iter().cloned(), &self.generators);
        Ok(PermGroup {
            level: self.level,
            generators: ys,
            chain,
        })
    }

    /// `⟨self, g⟩` for an element `g` that normalizes `self`.
    pub fn extend_by_normalizing(&self, g: &LevelPerm) -> Result<PermGroup> {
        check_perms(self.level, std::slice::from_ref(g))?;
        let gi = g.inverse();
        if let Some(b) = self.chain.elements().find(|b| !self.contains(&gi.then(b).then(g))) {
            return Err(Error::Precondition(format!(
                "{} does not normalize the subgroup (moves {})",
                g.cycle_notation(),
                b.cycle_notation()
            )));
        }
        // conjugates of the existing chain by g stay inside, and conjugating a
        // new element t ∈ St(l) by h ∈ self gives t·[t, h] with
        // [t, h] ∈ self ∩ St(l), so closing under g alone suffices
        let mut chain = self.chain.clone();
        chain.reset_closers();
        chain.absorb([g.clone()], std::slice::from_ref(g));
        let mut generators = self.generators.clone();
        generators.push(g.clone());
        Ok(PermGroup {
            level: self.level,
            generators,
            chain,
        })
    }

    /// `[self, self]`: the normal closure of the generator commutators.
    pub fn derived_subgroup(&self) -> Result<PermGroup> {
        let mut ys = Vec::new();
        for (k, a) in self.generators.iter().enumerate() {
            for b in &self.generators[k + 1..] {
                let c = commutator(a, b);
                if !c.is_identity() {
                    ys.push(c);
                }
            }
        }
        self.normal_closure(ys)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn degree(&self) -> usize {
        1 << self.level
    }

    pub fn generators(&self) -> &[LevelPerm] {
        &self.generators
    }

    pub fn order(&self) -> BigUint {
        self.chain.order()
    }

    /// Orders are powers of two; this is the exponent.
    pub fn log2_order(&self) -> u32 {
        self.chain.log2_order()
    }

    /// Rank of each `(H ∩ St(l)) / (H ∩ St(l+1))`.
    pub fn layer_ranks(&self) -> Vec<usize> {
        self.chain.layer_ranks()
    }

    pub fn contains(&self, g: &LevelPerm) -> bool {
        self.chain.contains(g)
    }

    pub fn strong_generators(&self) -> Vec<LevelPerm> {
        self.chain.elements().cloned().collect()
    }
}

impl std::fmt::Debug for PermGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PermGroup[level {}, order 2^{}]", self.level, self.log2_order())
    }
}

fn check_perms(level: u32, perms: &[LevelPerm]) -> Result<()> {
    match perms.iter().find(|p| p.level() != level) {
        Some(p) => Err(Error::LevelMismatch(p.level(), level)),
        None => Ok(()),
    }
}

fn check_group_level(fam: &GeneratorFamily, level: u32) -> Result<()> {
    let max = fam.limits().max_group_level;
    if level > max {
        return Err(Error::LevelTooDeep { level, max });
    }
    Ok(())
}

fn generator_perms(fam: &GeneratorFamily, indices: &[usize], level: u32) -> Result<Vec<LevelPerm>> {
    indices
        .iter()
        .map(|&i| fam.generator_perm(i, level).map(|p| (*p).clone()))
        .collect()
}

/// `G_n`.
pub fn level_group(fam: &GeneratorFamily, level: u32) -> Result<PermGroup> {
    check_group_level(fam, level)?;
    let all: Vec<usize> = (1..=fam.r() as usize).collect();
    PermGroup::generated(level, generator_perms(fam, &all, level)?)
}

/// Indices `j` with `j ≢ i` and `j ≢ i - s + 1 (mod r)`.
pub fn ni_generators(fam: &GeneratorFamily, i: usize) -> Result<Vec<usize>> {
    fam.checked_index(i)?;
    let orbit = fam.orbit();
    let partner = orbit.wrap(i as i64 - fam.s() as i64 + 1);
    Ok((1..=fam.r() as usize).filter(|&j| j != i && j != partner).collect())
}

/// `N_{i,n}` inside a precomputed `G_n`.
pub fn normal_closure_in(fam: &GeneratorFamily, g: &PermGroup, i: usize) -> Result<PermGroup> {
    let idx = ni_generators(fam, i)?;
    g.normal_closure(generator_perms(fam, &idx, g.level())?)
}

/// `N_{i,n}`.
pub fn normal_closure_ni(fam: &GeneratorFamily, i: usize, level: u32) -> Result<PermGroup> {
    normal_closure_in(fam, &level_group(fam, level)?, i)
}

/// One level of a [`QuotientReport`].
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct QuotientLevel {
    pub n: u32,
    pub log2_group_order: u32,
    pub log2_normal_order: u32,
    /// `|G_n / N_{i,n}|`.
    pub quotient_order: u64,
    /// `⟨N_{i,n}, a_i⟩ = G_n`.
    pub cyclic: bool,
    /// The image of `a_i` has order `|G_n / N_{i,n}|`.
    pub semidirect: bool,
}

impl QuotientLevel {
    pub fn group_order(&self) -> BigUint {
        BigUint::from(1u8) << self.log2_group_order
    }

    pub fn normal_order(&self) -> BigUint {
        BigUint::from(1u8) << self.log2_normal_order
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct QuotientReport {
    pub i: usize,
    /// Levels `0..=N_max`.
    pub levels: Vec<QuotientLevel>,
    /// Consecutive quotient orders differ by a factor 1 or 2.
    pub step_ok: bool,
    /// `|G_n/N_{i,n}| >= 2 |G_{n-r}/N_{i,n-r}|` for all `n > r`.
    pub growth_ok: bool,
    /// Whether the growth inequality is part of the checks for this `i`
    /// (it is asserted only for `i = s`).
    pub growth_asserted: bool,
}

impl QuotientReport {
    pub fn all_cyclic(&self) -> bool {
        self.levels.iter().all(|l| l.cyclic)
    }

    pub fn checks_passed(&self) -> bool {
        self.step_ok
            && (self.growth_ok || !self.growth_asserted)
            && self.levels.iter().all(|l| l.cyclic && l.semidirect)
    }

    pub fn level(&self, n: u32) -> Option<&QuotientLevel> {
        self.levels.iter().find(|l| l.n == n)
    }
}

/// Order of the image of `g` in `H / N`, with `N` normal in `H`: the
/// smallest `2^k` with `g^{2^k} ∈ N`.
fn image_order_log2(g: &LevelPerm, n: &PermGroup) -> u32 {
    let mut x = g.clone();
    let mut k = 0;
    while !n.contains(&x) {
        x = x.then(&x);
        k += 1;
    }
    k
}

/// All quotient data at one level, from a precomputed `G_n`.
pub fn quotient_level(fam: &GeneratorFamily, g: &PermGroup, i: usize) -> Result<QuotientLevel> {
    let n = g.level();
    let normal = normal_closure_in(fam, g, i)?;
    let ai = (*fam.generator_perm(i, n)?).clone();
    let quotient_log2 = g.log2_order() - normal.log2_order();
    let extended = normal.extend_by_normalizing(&ai)?;
    let semidirect = image_order_log2(&ai, &normal) == quotient_log2;
    Ok(QuotientLevel {
        n,
        log2_group_order: g.log2_order(),
        log2_normal_order: normal.log2_order(),
        quotient_order: 1u64 << quotient_log2,
        cyclic: extended.log2_order() == g.log2_order(),
        semidirect,
    })
}

/// Quotient orders `|G_n / N_{i,n}|` for `n = 0..=max_level`.
pub fn quotient_report(fam: &GeneratorFamily, i: usize, max_level: u32) -> Result<QuotientReport> {
    fam.checked_index(i)?;
    check_group_level(fam, max_level)?;
    let levels = (0..=max_level)
        .into_par_iter()
        .map(|n| quotient_level(fam, &level_group(fam, n)?, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble_report(fam, i, levels))
}

/// Reports for every `i`, sharing one `G_n` per level.
pub fn quotient_reports(fam: &GeneratorFamily, max_level: u32) -> Result<Vec<QuotientReport>> {
    check_group_level(fam, max_level)?;
    let r = fam.r() as usize;
    let groups = (0..=max_level)
        .into_par_iter()
        .map(|n| level_group(fam, n))
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<(usize, u32)> = (1..=r).flat_map(|i| (0..=max_level).map(move |n| (i, n))).collect();
    let computed = cells
        .par_iter()
        .map(|&(i, n)| quotient_level(fam, &groups[n as usize], i))
        .collect::<Result<Vec<_>>>()?;
    let per_i = max_level as usize + 1;
    Ok(computed
        .chunks(per_i)
        .enumerate()
        .map(|(k, levels)| assemble_report(fam, k + 1, levels.to_vec()))
        .collect())
}

fn assemble_report(fam: &GeneratorFamily, i: usize, levels: Vec<QuotientLevel>) -> QuotientReport {
    let step_ok = levels.windows(2).all(|w| {
        let (a, b) = (w[0].quotient_order, w[1].quotient_order);
        b == a || b == 2 * a
    });
    let r = fam.r() as usize;
    let growth_ok = (r + 1..levels.len()).all(|n| levels[n].quotient_order >= 2 * levels[n - r].quotient_order);
    QuotientReport {
        i,
        levels,
        step_ok,
        growth_ok,
        growth_asserted: i == fam.s() as usize,
    }
}

/// Whether `a_i` splits off: its image in `G_n / N_{i,n}` has full order.
pub fn semidirect_check(fam: &GeneratorFamily, i: usize, level: u32) -> Result<bool> {
    fam.checked_index(i)?;
    let g = level_group(fam, level)?;
    let normal = normal_closure_in(fam, &g, i)?;
    let ai = (*fam.generator_perm(i, level)?).clone();
    Ok(image_order_log2(&ai, &normal) == g.log2_order() - normal.log2_order())
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct AbelianizationReport {
    pub n: u32,
    pub log2_abelianization: u32,
    /// `log2 |G_n / N_{i,n}|` for `i = 1..r-1`.
    pub log2_quotients: Vec<u32>,
    pub equal: bool,
}

/// `|G_n^{ab}|` against `∏_{i<r} |G_n / N_{i,n}|`, for `s = 2`.
pub fn abelianization_report(fam: &GeneratorFamily, level: u32) -> Result<AbelianizationReport> {
    if fam.s() != 2 {
        return Err(Error::WrongS(fam.s()));
    }
    let max = fam.limits().max_derived_level.min(fam.limits().max_group_level);
    if level > max {
        return Err(Error::LevelTooDeep { level, max });
    }
    let g = level_group(fam, level)?;
    let derived = g.derived_subgroup()?;
    let log2_quotients = (1..fam.r() as usize)
        .into_par_iter()
        .map(|i| Ok(g.log2_order() - normal_closure_in(fam, &g, i)?.log2_order()))
        .collect::<Result<Vec<u32>>>()?;
    let log2_abelianization = g.log2_order() - derived.log2_order();
    Ok(AbelianizationReport {
        n: level,
        log2_abelianization,
        equal: log2_quotients.iter().sum::<u32>() == log2_abelianization,
        log2_quotients,
    })
}

pub fn abelianization_check(fam: &GeneratorFamily, level: u32) -> Result<bool> {
    Ok(abelianization_report(fam, level)?.equal)
}

/// The level-`n` element acting as `w|T_{n-1}` below both level-1 vertices.
pub fn diagonal_perm(w: &TreeWord, level: u32) -> Result<LevelPerm> {
    if level == 0 {
        return Ok(LevelPerm::identity(0));
    }
    let half = w.restrict(level - 1)?;
    LevelPerm::from_parts(&half, &half, false)
}

/// Whether `(w, w)` restricted to level `n` lies in `G_n`.
pub fn diagonal_membership(fam: &GeneratorFamily, w: &TreeWord, level: u32) -> Result<bool> {
    perm_membership(fam, &diagonal_perm(w, level)?)
}

/// Membership of a raw level permutation in `G_n`.
pub fn perm_membership(fam: &GeneratorFamily, p: &LevelPerm) -> Result<bool> {
    Ok(level_group(fam, p.level())?.contains(p))
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct TorsionEntry {
    pub word: String,
    /// `log2` of the order of `w|T_n` for `n = 0..=max_level`.
    pub log2_orders: Vec<u32>,
    /// First level with a nontrivial restriction.
    pub first_nontrivial: Option<u32>,
    /// Levels `n` past the first nontrivial one where the order did not grow.
    pub stalls: Vec<u32>,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct TorsionDiagnostic {
    pub max_level: u32,
    pub entries: Vec<TorsionEntry>,
    /// Words that stayed trivial through `max_level`.
    pub trivial: Vec<String>,
}

impl TorsionDiagnostic {
    /// Words whose order stalled at least once.
    pub fn stalled(&self) -> impl Iterator<Item = &TorsionEntry> {
        self.entries.iter().filter(|e| !e.stalls.is_empty())
    }

    /// Orders never decrease in `n`, and every nontrivial word has grown
    /// beyond its first nontrivial order by the last level.
    pub fn consistent(&self) -> bool {
        self.entries.iter().all(|e| {
            e.log2_orders.windows(2).all(|w| w[0] <= w[1])
                && match e.first_nontrivial {
                    Some(f) => f == self.max_level || e.log2_orders.last() > e.log2_orders.get(f as usize),
                    None => true,
                }
        })
    }
}

/// Order growth of sampled words level by level. This is a diagnostic: it
/// reports stalls rather than proving anything.
pub fn torsion_diagnostic(words: &[TreeWord], max_level: u32) -> Result<TorsionDiagnostic> {
    let rows = words
        .par_iter()
        .map(|w| {
            let top = w.restrict(max_level)?;
            let log2_orders: Vec<u32> = (0..=max_level)
                .map(|n| top.project(n).order().trailing_zeros())
                .collect();
            let first = log2_orders.iter().position(|&k| k > 0).map(|n| n as u32);
            let stalls = match first {
                Some(f) => (f + 1..=max_level)
                    .filter(|&n| log2_orders[n as usize] == log2_orders[n as usize - 1])
                    .collect(),
                None => Vec::new(),
            };
            Ok(TorsionEntry {
                word: w.to_string(),
                log2_orders,
                first_nontrivial: first,
                stalls,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (entries, trivial): (Vec<_>, Vec<_>) = rows.into_iter().partition(|e| e.first_nontrivial.is_some());
    Ok(TorsionDiagnostic {
        max_level,
        entries,
        trivial: trivial.into_iter().map(|e| e.word).collect(),
    })
}
