//! Cycle structure of elements level by level: stable cycles, settledness
//! estimates, and the odometer law for sections of powers along a stable
//! cycle.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::GeneratorFamily;
use crate::tree::{LevelPerm, TreeWord, Vertex};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Cycle {
    /// Smallest leaf index in the cycle.
    pub representative: u32,
    pub length: usize,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct CycleDecomposition {
    pub level: u32,
    pub cycles: Vec<Cycle>,
}

impl CycleDecomposition {
    pub fn lengths(&self) -> Vec<usize> {
        self.cycles.iter().map(|c| c.length).collect()
    }
}

pub fn cycles(p: &LevelPerm) -> CycleDecomposition {
    let mut seen = vec![false; p.degree()];
    let mut out = Vec::new();
    for start in 0..p.degree() {
        if seen[start] {
            continue;
        }
        let mut length = 0;
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            x = p.apply(x as u32) as usize;
            length += 1;
        }
        out.push(Cycle {
            representative: start as u32,
            length,
        });
    }
    CycleDecomposition {
        level: p.level(),
        cycles: out,
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Stability {
    /// Every lift up to the probe depth is a single cycle of doubled length.
    StableThrough { depth: u32 },
    /// The first level at which the vertices above the cycle fall apart.
    SplitAt { level: u32 },
}

impl Stability {
    pub fn is_stable(&self) -> bool {
        matches!(self, Stability::StableThrough { .. })
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct CycleStability {
    pub representative: u32,
    pub length: usize,
    #[serde(flatten)]
    pub stability: Stability,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct StabilityReport {
    pub level: u32,
    pub probe_depth: u32,
    pub entries: Vec<CycleStability>,
}

impl StabilityReport {
    pub fn stable_cycles(&self) -> impl Iterator<Item = &CycleStability> {
        self.entries.iter().filter(|e| e.stability.is_stable())
    }

    pub fn stable_leaves(&self) -> u64 {
        self.stable_cycles().map(|e| e.length as u64).sum()
    }

    pub fn vertex(&self, entry: &CycleStability) -> Vertex {
        Vertex::new(self.level, u64::from(entry.representative))
    }
}

fn check_depths(w: &TreeWord, level: u32, depth: u32) -> Result<()> {
    if level > depth {
        return Err(Error::Precondition(format!(
            "level {level} is deeper than probe depth {depth}"
        )));
    }
    w.table().check_level(depth)
}

/// Traces every level-`n` cycle of `w` through levels `n+1..=depth`.
pub fn stability(w: &TreeWord, level: u32, depth: u32) -> Result<StabilityReport> {
    check_depths(w, level, depth)?;
    let top = w.restrict(depth)?;
    Ok(stability_of_perm(&top, level))
}

/// Stability of the level-`n` cycles of a level-`D` permutation.
pub fn stability_of_perm(top: &LevelPerm, level: u32) -> StabilityReport {
    let depth = top.level();
    assert!(level <= depth);
    let perms: Vec<LevelPerm> = (level..=depth).map(|m| top.project(m)).collect();
    let entries = cycles(&perms[0])
        .cycles
        .into_iter()
        .map(|c| {
            let mut stability = Stability::StableThrough { depth };
            for m in level + 1..=depth {
                let shift = m - level;
                let above = c.representative << shift;
                let expected = c.length << shift;
                if perms[shift as usize].orbit_len(above) != expected {
                    stability = Stability::SplitAt { level: m };
                    break;
                }
            }
            CycleStability {
                representative: c.representative,
                length: c.length,
                stability,
            }
        })
        .collect();
    StabilityReport {
        level,
        probe_depth: depth,
        entries,
    }
}

/// Cycle lengths at level `m + 1` of the vertices above the level-`m` cycle
/// through `rep`; for a tree automorphism this is `[2k]` or `[k, k]`.
pub fn lift_cycle_lengths(upper: &LevelPerm, rep: u32) -> Vec<usize> {
    let lower = upper.project(upper.level() - 1);
    let mut members = vec![rep];
    let mut x = lower.apply(rep);
    while x != rep {
        members.push(x);
        x = lower.apply(x);
    }
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for &m in &members {
        for child in [m << 1, (m << 1) | 1] {
            if seen.contains(&child) {
                continue;
            }
            let mut y = child;
            let mut len = 0;
            loop {
                seen.insert(y);
                y = upper.apply(y);
                len += 1;
                if y == child {
                    break;
                }
            }
            out.push(len);
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct SettledEstimate {
    pub level: u32,
    pub probe_depth: u32,
    /// Level-`n` leaves lying in cycles stable through the probe depth.
    pub stable_leaves: u64,
    /// `stable_leaves / 2^n`.
    pub proportion: f64,
}

impl SettledEstimate {
    fn from_report(report: &StabilityReport) -> Self {
        let stable = report.stable_leaves();
        SettledEstimate {
            level: report.level,
            probe_depth: report.probe_depth,
            stable_leaves: stable,
            proportion: stable as f64 / (1u64 << report.level) as f64,
        }
    }
}

/// Proportion of level-`n` leaves in cycles stable through `depth`; an upper
/// bound on the true stable proportion at that level.
pub fn settled_estimate(w: &TreeWord, level: u32, depth: u32) -> Result<SettledEstimate> {
    Ok(SettledEstimate::from_report(&stability(w, level, depth)?))
}

/// `(γ^k)_v = γ_{v_0} γ_{v_1} ⋯ γ_{v_{k-1}}` with `v_i = (v)γ^i`.
pub fn section_power(w: &TreeWord, v: &Vertex, k: usize) -> Result<TreeWord> {
    if k == 0 {
        return Err(Error::Precondition("cycle length must be positive".into()));
    }
    let mut at = *v;
    let mut out = TreeWord::identity(w.table());
    for _ in 0..k {
        out = out.mul(&w.section(&at));
        at = w.act(&at);
    }
    if at != *v {
        return Err(Error::Precondition(format!(
            "vertex {v} does not return to itself after {k} steps"
        )));
    }
    Ok(out)
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct SodoOutcome {
    pub representative: u32,
    pub length: usize,
    /// The section of `γ^k` is a single cycle on the remaining `D - n` levels.
    pub odometer: bool,
}

/// Checks every cycle stable through `depth` at level `n`.
pub fn sodo_details(w: &TreeWord, level: u32, depth: u32) -> Result<Vec<SodoOutcome>> {
    let report = stability(w, level, depth)?;
    report
        .stable_cycles()
        .map(|entry| {
            let v = report.vertex(entry);
            let section = section_power(w, &v, entry.length)?;
            let odometer = section.restrict(depth - level)?.is_full_cycle();
            Ok(SodoOutcome {
                representative: entry.representative,
                length: entry.length,
                odometer,
            })
        })
        .collect()
}

/// True iff the section of `γ^k` at every stable cycle is a full cycle down
/// to the probe depth (vacuously true without stable cycles).
pub fn sodo_check(w: &TreeWord, level: u32, depth: u32) -> Result<bool> {
    Ok(sodo_details(w, level, depth)?.iter().all(|o| o.odometer))
}

pub const SAMPLE_MAX_LEN: usize = 32;

/// Reproducible word sample: uniform letters `a_i^{±1}`, lengths
/// `1..=32`.
pub fn sample_words(fam: &GeneratorFamily, seed: u64, count: usize) -> Vec<TreeWord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| fam.random_word(&mut rng, SAMPLE_MAX_LEN)).collect()
}

/// A word with a cycle that stayed stable where the theory forbids it.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct PersistentCycle {
    pub word: String,
    pub level: u32,
    pub representative: u32,
    pub length: usize,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct NoSettledAudit {
    pub words: usize,
    pub probe_depth: u32,
    /// Audited levels are `1..=max_level`.
    pub max_level: u32,
    pub persistent: Vec<PersistentCycle>,
}

impl NoSettledAudit {
    pub fn passed(&self) -> bool {
        self.persistent.is_empty()
    }
}

/// Looks for stable cycles in a family without odometers.
///
/// Sections of powers along a stable cycle lie in `G`, and element signs in
/// `G` are `r`-periodic, so a level-`n` cycle stable through `n + r` already
/// yields an odometer. Levels `1..=depth - r` are therefore audited.
pub fn no_settled_audit(fam: &GeneratorFamily, words: &[TreeWord], depth: u32) -> Result<NoSettledAudit> {
    fam.table().check_level(depth)?;
    let max_level = depth.saturating_sub(fam.r());
    let found: Vec<Vec<PersistentCycle>> = words
        .par_iter()
        .map(|w| {
            let top = w.restrict(depth)?;
            let mut hits = Vec::new();
            for level in 1..=max_level {
                for entry in stability_of_perm(&top, level).stable_cycles() {
                    hits.push(PersistentCycle {
                        word: w.to_string(),
                        level,
                        representative: entry.representative,
                        length: entry.length,
                    });
                }
            }
            Ok(hits)
        })
        .collect::<Result<_>>()?;
    Ok(NoSettledAudit {
        words: words.len(),
        probe_depth: depth,
        max_level,
        persistent: found.into_iter().flatten().collect(),
    })
}

#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct SodoAudit {
    pub words: usize,
    pub stable_cycles: usize,
    pub failures: Vec<PersistentCycle>,
}

impl SodoAudit {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Runs [`sodo_details`] for every word at levels `1..=max_level`.
pub fn sodo_audit(words: &[TreeWord], max_level: u32, depth: u32) -> Result<SodoAudit> {
    let per_word: Vec<(usize, Vec<PersistentCycle>)> = words
        .par_iter()
        .map(|w| {
            let mut stable = 0;
            let mut failures = Vec::new();
            for level in 1..=max_level.min(depth) {
                for o in sodo_details(w, level, depth)? {
                    stable += 1;
                    if !o.odometer {
                        failures.push(PersistentCycle {
                            word: w.to_string(),
                            level,
                            representative: o.representative,
                            length: o.length,
                        });
                    }
                }
            }
            Ok((stable, failures))
        })
        .collect::<Result<_>>()?;
    let mut audit = SodoAudit {
        words: words.len(),
        ..SodoAudit::default()
    };
    for (stable, failures) in per_word {
        audit.stable_cycles += stable;
        audit.failures.extend(failures);
    }
    Ok(audit)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::family::{build_family, PCOrbit};
    use crate::tree::RecursionTable;

    fn odometer() -> TreeWord {
        let t = Arc::new(RecursionTable::from_rules(&[("b", "b", "id", true)]).unwrap());
        TreeWord::parse(&t, "b").unwrap()
    }

    /// `β' = (β', γ)`, `γ = (γ, id)σ`.
    fn cortez_lukina() -> TreeWord {
        let t = Arc::new(RecursionTable::from_rules(&[("c", "c", "g", false), ("g", "g", "id", true)]).unwrap());
        TreeWord::parse(&t, "c").unwrap()
    }

    #[test]
    fn cycle_examples() {
        let b = odometer();
        let sigma = {
            let t = Arc::new(RecursionTable::from_rules(&[("s", "id", "id", true)]).unwrap());
            TreeWord::parse(&t, "s").unwrap()
        };
        assert_eq!(cycles(&sigma.restrict(2).unwrap()).lengths(), vec![2, 2]);
        for n in 1..=10 {
            assert_eq!(cycles(&b.restrict(n).unwrap()).lengths(), vec![1 << n]);
        }
        assert_eq!(cycles(&LevelPerm::identity(3)).lengths(), vec![1; 8]);
        let reps: Vec<u32> = cycles(&sigma.restrict(2).unwrap())
            .cycles
            .iter()
            .map(|c| c.representative)
            .collect();
        assert_eq!(reps, vec![0, 1]);
    }

    #[test]
    fn odometer_cycles_are_stable() {
        let report = stability(&odometer(), 3, 10).unwrap();
        assert_eq!(report.entries.len(), 1);
        assert_eq!(report.entries[0].stability, Stability::StableThrough { depth: 10 });
    }

    #[test]
    fn cortez_lukina_example() {
        let w = cortez_lukina();
        let report = stability(&w, 1, 8).unwrap();
        assert_eq!(report.entries.len(), 2);
        // fixed vertex 0 splits immediately, vertex 1 carries an odometer
        assert_eq!(report.entries[0].representative, 0);
        assert_eq!(report.entries[0].stability, Stability::SplitAt { level: 2 });
        assert_eq!(report.entries[1].representative, 1);
        assert!(report.entries[1].stability.is_stable());
        // only 0^n is unstable at level n
        for n in 1..=6 {
            let est = settled_estimate(&w, n, 12).unwrap();
            assert_eq!(est.stable_leaves, (1 << n) - 1, "level {n}");
        }
        assert_eq!(settled_estimate(&w, 6, 12).unwrap().proportion, 63.0 / 64.0);
    }

    #[test]
    fn a1_for_3_2_splits() {
        let fam = build_family(PCOrbit::new(3, 2).unwrap());
        let report = stability(&fam.parse_word("a1").unwrap(), 1, 7).unwrap();
        assert_eq!(report.entries.len(), 1);
        assert_eq!(report.entries[0].length, 2);
        match report.entries[0].stability {
            Stability::SplitAt { level } => assert!(level <= 7),
            s => panic!("unexpected {s:?}"),
        }
    }

    #[test]
    fn settled_examples() {
        let b = odometer();
        for n in 0..=10 {
            assert_eq!(settled_estimate(&b, n, 12).unwrap().proportion, 1.0);
        }
        let t = Arc::new(RecursionTable::from_rules(&[]).unwrap());
        assert_eq!(settled_estimate(&TreeWord::identity(&t), 3, 6).unwrap().proportion, 0.0);
        assert!(settled_estimate(&b, 5, 4).is_err());
    }

    #[test]
    fn estimate_is_antitone_in_depth() {
        let fam = build_family(PCOrbit::new(4, 2).unwrap());
        for w in sample_words(&fam, 7, 20) {
            for n in 1..=4 {
                let mut prev = 2.0;
                for d in n..=12 {
                    let p = settled_estimate(&w, n, d).unwrap().proportion;
                    assert!(p <= prev, "{w} n={n} d={d}");
                    prev = p;
                }
            }
        }
    }

    #[test]
    fn section_power_examples() {
        let b = odometer();
        assert_eq!(section_power(&b, &Vertex::root(), 1).unwrap(), b);
        // β² = (β, β)
        let v: Vertex = "0".parse().unwrap();
        let sp = section_power(&b, &v, 2).unwrap();
        assert_eq!(sp.restrict(6).unwrap(), b.restrict(6).unwrap());
        assert!(section_power(&b, &v, 1).is_err());
        assert!(section_power(&b, &v, 0).is_err());
    }

    #[test]
    fn section_power_against_power_word() {
        let fam = build_family(PCOrbit::new(3, 2).unwrap());
        let w = fam.parse_word("a1 a2").unwrap();
        let level = 8;
        let top = w.restrict(level).unwrap();
        for v in Vertex::level_iter(1).chain(Vertex::level_iter(3)) {
            let k = top.project(v.level()).orbit_len(v.index() as u32);
            let sp = section_power(&w, &v, k).unwrap();
            let oracle = w.pow(k as i64).section(&v);
            let via_perm = top.pow(k as u64).section_at(&v);
            let depth = level - v.level();
            assert_eq!(sp.restrict(depth).unwrap(), oracle.restrict(depth).unwrap());
            assert_eq!(sp.restrict(depth).unwrap(), via_perm);
        }
    }

    #[test]
    fn sodo_examples() {
        assert!(sodo_check(&odometer(), 2, 10).unwrap());
        let outcomes = sodo_details(&cortez_lukina(), 1, 10).unwrap();
        assert_eq!(outcomes.len(), 1);
        assert_eq!(outcomes[0].representative, 1);
        assert!(outcomes[0].odometer);
        let t = Arc::new(RecursionTable::from_rules(&[]).unwrap());
        let id = TreeWord::identity(&t);
        assert!(sodo_details(&id, 1, 4).unwrap().is_empty());
        assert!(sodo_check(&id, 1, 4).unwrap());
    }

    #[test]
    fn lifts_double_or_duplicate() {
        for (r, s) in [(3, 2), (4, 2), (8, 7)] {
            let fam = build_family(PCOrbit::new(r, s).unwrap());
            for w in sample_words(&fam, 11, 10) {
                let top = w.restrict(9).unwrap();
                for m in 0..9 {
                    let lower = top.project(m);
                    let upper = top.project(m + 1);
                    for c in cycles(&lower).cycles {
                        let lifts = lift_cycle_lengths(&upper, c.representative);
                        let k = c.length;
                        assert!(lifts == vec![2 * k] || lifts == vec![k, k], "{lifts:?} over {k}");
                    }
                }
            }
        }
    }

    #[test]
    fn sampler_is_reproducible() {
        let fam = build_family(PCOrbit::new(4, 2).unwrap());
        let a: Vec<String> = sample_words(&fam, 3, 5).iter().map(|w| w.to_string()).collect();
        let b: Vec<String> = sample_words(&fam, 3, 5).iter().map(|w| w.to_string()).collect();
        assert_eq!(a, b);
        assert!(sample_words(&fam, 3, 50)
            .iter()
            .all(|w| (1..=SAMPLE_MAX_LEN).contains(&w.len())));
    }
}
