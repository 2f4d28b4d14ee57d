use arbor_core::dynamics::{no_settled_audit, sample_words, settled_estimate, sodo_audit, sodo_details, stability};
use arbor_core::family::build_family_with_limits;
use arbor_core::family::{
    certify_odometer, diagonal_law_holds, odometer_by_criterion, odometer_by_search, sign_table, verify_relation,
    OdometerReport,
};
use arbor_core::frob::{
    build_tree, frobenius_report, reconstruction_holds, valid_base_points, PrimeField, RationalMap,
};
use arbor_core::group::{abelianization_report, level_group, quotient_reports, QuotientReport};
use arbor_core::{GeneratorFamily, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Command, RunConfig};
use crate::report::{Check, Outcome, Table};

/// Runs the configured command. Engine errors land in `errors`.
pub fn execute(cfg: &RunConfig) -> Outcome {
    let run = match cfg.command {
        Command::Gens => gens(cfg),
        Command::Signs => signs(cfg),
        Command::Odometer => odometer(cfg),
        Command::Settled => settled(cfg),
        Command::Group => group(cfg),
        Command::Frobenius => Ok(frobenius(cfg)),
        Command::VerifyAll => Ok(verify_all(cfg)),
    };
    run.unwrap_or_else(|e| Outcome {
        errors: vec![e.to_string()],
        ..Outcome::default()
    })
}

fn family(cfg: &RunConfig) -> GeneratorFamily {
    build_family_with_limits(cfg.orbit.expect("orbit resolved"), cfg.limits)
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn b(x: bool) -> String {
    x.to_string()
}

fn gens(cfg: &RunConfig) -> Result<Outcome> {
    let fam = family(cfg);
    let level = cfg.level.unwrap_or(0);
    let table = fam.table();
    let mut rows = Vec::new();
    let mut gens = Vec::new();
    for i in 1..=fam.r() as usize {
        let st = table.state(fam.state(i));
        let left = table.state(st.left).name.clone();
        let right = table.state(st.right).name.clone();
        gens.push(json!({"name": st.name, "left": left, "right": right, "swap": st.swap}));
        rows.push(vec![st.name.clone(), left, right, b(st.swap)]);
    }
    let relation = verify_relation(&fam, level)?;
    Ok(Outcome {
        checks: vec![Check::new("relation", relation).with_detail(format!("a_1 ⋯ a_r trivial on level {level}"))],
        result: json!({"r": fam.r(), "s": fam.s(), "generators": gens, "relation_level": level}),
        table: Table {
            header: vec!["name", "left", "right", "swap"],
            rows,
        },
        ..Outcome::default()
    })
}

fn signs(cfg: &RunConfig) -> Result<Outcome> {
    let fam = family(cfg);
    let orbit = fam.orbit();
    let levels = cfg.level.unwrap_or(0);
    let mut matches = true;
    let mut rows = Vec::new();
    let mut vectors = Vec::new();
    for i in 1..=fam.r() as usize {
        let v = fam.generator(i).sign_vector(levels);
        for n in 1..=levels {
            let expected = orbit.closed_form_sign(i, n);
            matches &= v.at(n as usize) == expected;
            rows.push(vec![
                i.to_string(),
                n.to_string(),
                v.at(n as usize).to_string(),
                expected.to_string(),
            ]);
        }
        vectors.push(v);
    }
    let periodic = sign_table(&fam).periodic;
    Ok(Outcome {
        checks: vec![
            Check::new("closed_form", matches).with_detail(format!("levels 1..={levels}")),
            Check::new("periodic", periodic),
        ],
        result: json!({"r": fam.r(), "s": fam.s(), "levels": levels, "signs": vectors}),
        table: Table {
            header: vec!["i", "n", "sign", "closed_form"],
            rows,
        },
        ..Outcome::default()
    })
}

#[derive(Serialize)]
struct OdometerSummary {
    r: u32,
    s: u32,
    exists: bool,
    witness: Option<Vec<usize>>,
    method: arbor_core::family::OdometerMethod,
    certified_level: u32,
    search_witness: Option<Vec<usize>>,
}

/// Criterion and search, with the criterion's witness preferred.
fn odometer_checks(fam: &GeneratorFamily, level: u32) -> Result<(OdometerSummary, Vec<Check>)> {
    let criterion = odometer_by_criterion(fam.orbit());
    let search = odometer_by_search(fam)?;
    let mut checks = vec![Check::new(
        "criterion_matches_search",
        criterion.exists == search.exists,
    )];
    for (label, rep) in [("criterion", &criterion), ("search", &search)] {
        if let Some(w) = &rep.witness {
            let ok = certify_odometer(fam, w, level)?;
            checks.push(
                Check::new(format!("{label}_witness_certified"), ok).with_detail(format!("{w:?} at level {level}")),
            );
        }
    }
    let chosen: &OdometerReport = if criterion.exists { &criterion } else { &search };
    let summary = OdometerSummary {
        r: fam.r(),
        s: fam.s(),
        exists: chosen.exists,
        witness: chosen.witness.clone(),
        method: chosen.method,
        certified_level: level,
        search_witness: search.witness,
    };
    Ok((summary, checks))
}

fn witness_text(w: &Option<Vec<usize>>) -> String {
    w.as_ref()
        .map(|w| w.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" "))
        .unwrap_or_default()
}

fn odometer(cfg: &RunConfig) -> Result<Outcome> {
    let fam = family(cfg);
    let (summary, checks) = odometer_checks(&fam, cfg.level.unwrap_or(0))?;
    let row = vec![
        summary.r.to_string(),
        summary.s.to_string(),
        b(summary.exists),
        witness_text(&summary.witness),
        to_value(&summary.method).as_str().unwrap_or_default().to_string(),
        summary.certified_level.to_string(),
    ];
    Ok(Outcome {
        checks,
        result: to_value(&summary),
        table: Table {
            header: vec!["r", "s", "exists", "witness", "method", "certified_level"],
            rows: vec![row],
        },
        ..Outcome::default()
    })
}

fn settled(cfg: &RunConfig) -> Result<Outcome> {
    let fam = family(cfg);
    let word = fam.parse_word(cfg.word.as_deref().unwrap_or_default())?;
    let level = cfg.level.unwrap_or(0);
    let depth = cfg.depth.unwrap_or(level);
    let report = stability(&word, level, depth)?;
    let estimate = settled_estimate(&word, level, depth)?;
    let sodo = sodo_details(&word, level, depth)?;
    let rows = report
        .entries
        .iter()
        .map(|e| {
            let status = to_value(&e.stability);
            vec![
                e.representative.to_string(),
                e.length.to_string(),
                status["status"].as_str().unwrap_or_default().to_string(),
                status.get("depth").map(|d| d.to_string()).unwrap_or_default(),
                status.get("level").map(|d| d.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    Ok(Outcome {
        checks: vec![Check::new("section_odometer", sodo.iter().all(|o| o.odometer))
            .with_detail(format!("{} stable cycle(s)", sodo.len()))],
        result: json!({
            "word": word.to_string(),
            "level": level,
            "cycles": report.entries,
            "proportion": estimate.proportion,
            "probe_depth": depth,
        }),
        table: Table {
            header: vec!["representative", "length", "status", "stable_through", "split_at"],
            rows,
        },
        ..Outcome::default()
    })
}

/// Per-level pass flag for a quotient report: cyclic, split, step bound
/// from the previous level, and growth where it is asserted.
fn quotient_row_ok(rep: &QuotientReport, idx: usize, r: u32) -> bool {
    let l = &rep.levels[idx];
    let step = idx == 0 || {
        let prev = rep.levels[idx - 1].quotient_order;
        l.quotient_order == prev || l.quotient_order == 2 * prev
    };
    let growth = !rep.growth_asserted
        || l.n <= r
        || rep
            .level(l.n - r)
            .is_some_and(|back| l.quotient_order >= 2 * back.quotient_order);
    l.cyclic && l.semidirect && step && growth
}

fn group(cfg: &RunConfig) -> Result<Outcome> {
    let fam = family(cfg);
    let max = cfg.max_level.unwrap_or(0);
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    let mut result = serde_json::Map::new();
    if cfg.quotients {
        let reports = quotient_reports(&fam, max)?;
        for rep in &reports {
            checks.push(Check::new(format!("quotients_i{}", rep.i), rep.checks_passed()));
        }
        let levels: Vec<Value> = reports[0]
            .levels
            .iter()
            .map(|l| json!({"n": l.n, "log2_order": l.log2_group_order, "order": l.group_order().to_string()}))
            .collect();
        for n in 0..=max as usize {
            for rep in &reports {
                let l = &rep.levels[n];
                rows.push(vec![
                    l.n.to_string(),
                    l.group_order().to_string(),
                    rep.i.to_string(),
                    l.normal_order().to_string(),
                    l.quotient_order.to_string(),
                    b(l.cyclic),
                    b(quotient_row_ok(rep, n, fam.r())),
                ]);
            }
        }
        result.insert("levels".into(), Value::Array(levels));
        result.insert("quotients".into(), to_value(&reports));
    } else {
        let groups = (0..=max)
            .into_par_iter()
            .map(|n| level_group(&fam, n))
            .collect::<Result<Vec<_>>>()?;
        let levels: Vec<Value> = groups
            .iter()
            .map(|g| json!({"n": g.level(), "log2_order": g.log2_order(), "order": g.order().to_string()}))
            .collect();
        for g in &groups {
            rows.push(vec![
                g.level().to_string(),
                g.order().to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ]);
        }
        result.insert("levels".into(), Value::Array(levels));
    }
    if cfg.abelianization {
        let reports = (0..=max)
            .into_par_iter()
            .map(|n| abelianization_report(&fam, n))
            .collect::<Result<Vec<_>>>()?;
        for rep in &reports {
            rows.push(vec![
                rep.n.to_string(),
                String::new(),
                "ab".into(),
                String::new(),
                pow2(rep.log2_abelianization),
                String::new(),
                b(rep.equal),
            ]);
        }
        checks.push(Check::new("abelianization", reports.iter().all(|r| r.equal)).with_detail(format!("n <= {max}")));
        result.insert("abelianization".into(), to_value(&reports));
    }
    Ok(Outcome {
        checks,
        result: Value::Object(result),
        table: Table {
            header: vec![
                "n",
                "group_order",
                "i",
                "normal_order",
                "quotient_order",
                "cyclic",
                "checks_passed",
            ],
            rows,
        },
        ..Outcome::default()
    })
}

fn pow2(k: u32) -> String {
    if k < 128 {
        (1u128 << k).to_string()
    } else {
        format!("2^{k}")
    }
}

#[derive(Serialize)]
struct FrobLevel {
    n: u32,
    cycle_type: Vec<usize>,
    stable_proportion: f64,
    virtual_roots: usize,
}

#[derive(Serialize)]
struct FrobRun {
    a: u64,
    levels: Vec<FrobLevel>,
    errors: Vec<String>,
}

fn frob_one(map: &RationalMap, a: u64, depth: u32, seed: u64) -> (FrobRun, Vec<Check>) {
    match build_tree(map, a, depth, seed) {
        Err(e) => (
            FrobRun {
                a,
                levels: Vec::new(),
                errors: vec![e.to_string()],
            },
            vec![Check::failed(format!("tree_a{a}"), &e)],
        ),
        Ok(tree) => {
            let report = frobenius_report(&tree);
            let degrees = (0..=depth).all(|n| tree.degree_sum(n) == 1 << n);
            let reconstruction = (0..=depth).all(|n| reconstruction_holds(&tree, n));
            let levels = report
                .levels
                .into_iter()
                .map(|l| FrobLevel {
                    n: l.n,
                    cycle_type: l.cycle_type,
                    stable_proportion: l.stable_proportion,
                    virtual_roots: l.virtual_roots,
                })
                .collect();
            (
                FrobRun {
                    a,
                    levels,
                    errors: Vec::new(),
                },
                vec![
                    Check::new(format!("degree_sums_a{a}"), degrees),
                    Check::new(format!("reconstruction_a{a}"), reconstruction),
                ],
            )
        }
    }
}

fn frobenius(cfg: &RunConfig) -> Outcome {
    let p = cfg.p.expect("p resolved");
    let depth = cfg.depth.unwrap_or(0);
    let field = PrimeField::new(p).expect("validated prime");
    let map = match RationalMap::parse(cfg.map.as_deref().unwrap_or_default(), field) {
        Ok(m) => m,
        Err(e) => {
            return Outcome {
                errors: vec![e.to_string()],
                ..Outcome::default()
            }
        }
    };
    let bases = match cfg.a {
        Some(a) => vec![a],
        None => valid_base_points(&map),
    };
    let runs: Vec<(FrobRun, Vec<Check>)> = bases.par_iter().map(|&a| frob_one(&map, a, depth, cfg.seed)).collect();
    let mut out = Outcome {
        table: Table {
            header: vec!["a", "n", "cycle_type", "stable_proportion", "virtual_roots"],
            rows: Vec::new(),
        },
        ..Outcome::default()
    };
    for (run, checks) in &runs {
        out.checks.extend(checks.iter().cloned());
        out.errors
            .extend(run.errors.iter().map(|e| format!("a = {}: {e}", run.a)));
        for l in &run.levels {
            out.table.rows.push(vec![
                run.a.to_string(),
                l.n.to_string(),
                l.cycle_type.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" "),
                l.stable_proportion.to_string(),
                l.virtual_roots.to_string(),
            ]);
        }
    }
    let map_text = map.to_string();
    let mut runs: Vec<FrobRun> = runs.into_iter().map(|(run, _)| run).collect();
    out.result = match cfg.a {
        Some(a) => json!({"p": p, "map": map_text, "a": a, "levels": runs.pop().map(|r| r.levels).unwrap_or_default()}),
        None => json!({"p": p, "map": map_text, "runs": runs}),
    };
    out
}

fn verify_all(cfg: &RunConfig) -> Outcome {
    let fam = family(cfg);
    let max = cfg.max_level.unwrap_or(0);
    let depth = cfg.depth.unwrap_or(max);
    let mut out = Outcome::default();
    let mut result = serde_json::Map::new();

    match (0..=max).map(|n| verify_relation(&fam, n)).collect::<Result<Vec<_>>>() {
        Ok(v) => out
            .checks
            .push(Check::new("relation", v.iter().all(|&x| x)).with_detail(format!("n <= {max}"))),
        Err(e) => out.checks.push(Check::failed("relation", e)),
    }

    let table = sign_table(&fam);
    out.checks
        .push(Check::new("sign_closed_form", table.matches_closed_form));
    out.checks.push(Check::new("sign_periodic", table.periodic));
    result.insert("signs".into(), to_value(&table.rows));

    let s = fam.s() as usize;
    let diag = (2..=fam.r() as usize)
        .filter(|&i| i != s)
        .map(|i| diagonal_law_holds(&fam, i, max.min(10)))
        .collect::<Result<Vec<_>>>();
    match diag {
        Ok(v) => out.checks.push(Check::new("diagonal_law", v.iter().all(|&x| x))),
        Err(e) => out.checks.push(Check::failed("diagonal_law", e)),
    }

    let exists = match odometer_checks(&fam, max) {
        Ok((summary, checks)) => {
            out.checks.extend(checks.into_iter().map(|mut c| {
                c.name = format!("odometer_{}", c.name);
                c
            }));
            let exists = summary.exists;
            result.insert("odometer".into(), to_value(&summary));
            exists
        }
        Err(e) => {
            out.checks.push(Check::failed("odometer", e));
            false
        }
    };

    let samples = cfg.samples.unwrap_or(0);
    let words = sample_words(&fam, cfg.seed, samples);
    if exists {
        match sodo_audit(&words, depth.saturating_sub(fam.r()).max(1), depth) {
            Ok(a) => {
                out.checks.push(
                    Check::new("section_odometer", a.passed())
                        .with_detail(format!("{} stable cycle(s) over {} word(s)", a.stable_cycles, a.words)),
                );
                result.insert("section_odometer".into(), to_value(&a));
            }
            Err(e) => out.checks.push(Check::failed("section_odometer", e)),
        }
    } else {
        match no_settled_audit(&fam, &words, depth) {
            Ok(a) => {
                out.checks
                    .push(Check::new("no_settled", a.passed()).with_detail(format!(
                        "{} word(s), levels 1..={}, depth {depth}",
                        a.words, a.max_level
                    )));
                result.insert("no_settled".into(), to_value(&a));
            }
            Err(e) => out.checks.push(Check::failed("no_settled", e)),
        }
    }

    let group_max = max.min(cfg.limits.max_group_level);
    match quotient_reports(&fam, group_max) {
        Ok(reports) => {
            for rep in &reports {
                out.checks.push(
                    Check::new(format!("quotients_i{}", rep.i), rep.checks_passed())
                        .with_detail(format!("n <= {group_max}")),
                );
            }
            result.insert("quotients".into(), to_value(&reports));
        }
        Err(e) => out.checks.push(Check::failed("quotients", e)),
    }

    if fam.s() == 2 {
        let ab = cfg.ab_level.unwrap_or(0);
        match (0..=ab)
            .into_par_iter()
            .map(|n| abelianization_report(&fam, n))
            .collect::<Result<Vec<_>>>()
        {
            Ok(reports) => {
                out.checks.push(
                    Check::new("abelianization", reports.iter().all(|r| r.equal)).with_detail(format!("n <= {ab}")),
                );
                result.insert("abelianization".into(), to_value(&reports));
            }
            Err(e) => out.checks.push(Check::failed("abelianization", e)),
        }
    }

    out.table = Table {
        header: vec!["check", "passed", "detail"],
        rows: out
            .checks
            .iter()
            .map(|c| vec![c.name.clone(), b(c.passed), c.detail.clone().unwrap_or_default()])
            .collect(),
    };
    out.result = Value::Object(result);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_args;

    fn exec(args: &[&str]) -> Outcome {
        execute(&parse_args(std::iter::once("arbor").chain(args.iter().copied())).unwrap())
    }

    #[test]
    fn odometer_prefers_criterion_witness() {
        let out = exec(&["odometer", "--r", "8", "--s", "7", "--level", "8"]);
        assert!(out.passed());
        assert_eq!(out.result["witness"], json!([1, 5, 2, 6]));
        assert_eq!(out.result["search_witness"], json!([1, 2, 5, 6]));
        let none = exec(&["odometer", "--r", "3", "--s", "2"]);
        assert!(none.passed());
        assert_eq!(none.result["exists"], false);
        assert_eq!(none.result["method"], "search");
        assert_eq!(none.checks.len(), 1);
    }

    #[test]
    fn engine_errors_are_reported() {
        let out = exec(&["settled", "--r", "3", "--s", "2", "--word", "a9"]);
        assert!(!out.passed());
        assert_eq!(out.errors.len(), 1);
    }

    #[test]
    fn quotient_row_flags() {
        let fam = arbor_core::build_family(arbor_core::PCOrbit::new(3, 2).unwrap());
        let mut rep = quotient_reports(&fam, 5).unwrap().remove(1);
        assert!((0..=5).all(|n| quotient_row_ok(&rep, n, 3)));
        rep.levels[3].quotient_order *= 4;
        assert!(!quotient_row_ok(&rep, 3, 3));
        assert_eq!(pow2(3), "8");
        assert_eq!(pow2(200), "2^200");
    }

    #[test]
    fn frobenius_sweep_shape() {
        let out = exec(&["frobenius", "--p", "7", "--depth", "3"]);
        assert!(out.passed());
        assert_eq!(out.result["runs"].as_array().unwrap().len(), 5);
        assert_eq!(out.table.rows.len(), 5 * 4);
    }
}
