use std::collections::BTreeMap;

use super::*;

fn field(p: u64) -> PrimeField {
    PrimeField::new(p).unwrap()
}

fn target(p: u64) -> RationalMap {
    RationalMap::parse("1/(x-1)^2", field(p)).unwrap()
}

#[test]
fn lift_examples() {
    let f5 = field(5);
    let m = target(5);
    let h = lift(&Poly::linear(f5, 2), &m).unwrap();
    assert_eq!(h, Poly::from_i64(f5, &[1, -4, 2]).monic());
    assert!((0..5).all(|x| h.eval(x) != 0));
    // 0 = f(∞) and ∞ is critical
    assert_eq!(
        lift(&Poly::x(f5), &m),
        Err(Error::DegreeDrop {
            expected: 2,
            affine: 0,
            at_infinity: 2
        })
    );
    // critical value of x^2 + 1 is 1
    let sq = RationalMap::parse("x^2 + 1", f5).unwrap();
    assert_eq!(lift(&Poly::linear(f5, 1), &sq), Err(Error::Ramified { level: 1 }));
}

#[test]
fn tree_examples() {
    let m = target(5);
    let tree = build_tree(&m, 2, 1, 0).unwrap();
    let rep = frobenius_report(&tree);
    assert_eq!(rep.levels[1].cycle_type, vec![2]);
    assert_eq!(
        build_tree(&m, 0, 3, 0).unwrap_err(),
        Error::PostCriticalBase { a: 0, p: 5 }
    );
    assert_eq!(
        build_tree(&m, 1, 3, 0).unwrap_err(),
        Error::PostCriticalBase { a: 1, p: 5 }
    );
    assert!(matches!(
        build_tree(&m, 2, 10, 0),
        Err(Error::DepthTooLarge { depth: 10, max: 9 })
    ));
    assert!(matches!(build_tree(&m, 7, 2, 0), Err(Error::Precondition(_))));

    let empty = frobenius_report(&build_tree(&m, 3, 0, 0).unwrap());
    assert_eq!(empty.levels.len(), 1);
    assert_eq!(empty.levels[0].cycle_type, vec![1]);
    assert_eq!(empty.levels[0].stable_proportion, 1.0);
}

#[test]
fn run_collects_errors() {
    let rep = frobenius_run(&target(5), 0, 3, 0);
    assert!(rep.levels.is_empty());
    assert_eq!(rep.errors, vec![Error::PostCriticalBase { a: 0, p: 5 }.to_string()]);
}

/// Level-`n` preimage counts by brute force over `ℙ¹(𝔽_p)`: the number of
/// rational points in `f^{-n}(a)` equals the number of degree-1 parts.
fn rational_preimages(m: &RationalMap, a: u64, n: u32) -> usize {
    let p = m.field().p();
    let points = (0..p).map(Some).chain(std::iter::once(None));
    points
        .filter(|&x| {
            let mut y = x;
            for _ in 0..n {
                y = m.eval(y);
            }
            y == Some(a)
        })
        .count()
}

#[test]
fn tree_invariants() {
    for p in [5, 7, 11, 13] {
        let m = target(p);
        for a in valid_base_points(&m) {
            let tree = build_tree(&m, a, 6, 1).unwrap();
            for n in 0..=6 {
                assert_eq!(tree.degree_sum(n), 1 << n, "p={p} a={a} n={n}");
                assert!(reconstruction_holds(&tree, n), "p={p} a={a} n={n}");
                let linear = tree.levels[n as usize].iter().filter(|node| node.degree() == 1).count();
                assert_eq!(linear, rational_preimages(&m, a, n));
            }
            // each part d lifts to 2d once or d twice
            for n in 0..6 {
                for node in &tree.levels[n] {
                    let degs: Vec<usize> = node.children.iter().map(|&c| tree.levels[n + 1][c].degree()).collect();
                    let d = node.degree();
                    assert!(degs == vec![2 * d] || degs == vec![d, d], "{degs:?} over {d}");
                }
            }
        }
    }
}

#[test]
fn virtual_roots() {
    // (x^2 + 1)/(x^2 + x + 3): ∞ is not critical and f(∞) = 1
    let p = 7;
    let m = RationalMap::parse("(x^2 + 1)/(x^2 + x + 3)", field(p)).unwrap();
    let pc = m.post_critical_set();
    let mut found = 0;
    let mut y = None;
    for k in 1..=8 {
        y = m.eval(y);
        let Some(a) = y else { continue };
        if pc.residues.contains(&a) {
            continue;
        }
        let tree = build_tree(&m, a, 5, 0).unwrap();
        for n in 0..=5 {
            assert_eq!(tree.degree_sum(n), 1 << n);
            assert!(reconstruction_holds(&tree, n), "a={a} n={n}");
        }
        assert!(
            frobenius_report(&tree).levels[k as usize].virtual_roots >= 1,
            "a={a} k={k}"
        );
        found += 1;
    }
    assert!(found > 0);
}

#[test]
fn statuses() {
    let m = target(7);
    let tree = build_tree(&m, 2, 5, 0).unwrap();
    assert!(tree.levels[5].iter().all(|node| node.status == NodeStatus::Boundary));
    for n in 0..5 {
        for node in &tree.levels[n] {
            let expect = match node.children.as_slice() {
                [c] => {
                    let child = &tree.levels[n + 1][*c];
                    child.degree() == 2 * node.degree() && child.status != NodeStatus::Split
                }
                _ => false,
            };
            assert_eq!(node.status == NodeStatus::StableThroughD, expect);
        }
    }
    let rep = frobenius_report(&tree);
    assert_eq!(rep.levels[5].stable_proportion, 1.0);
    for w in rep.levels.windows(2) {
        // a stable node's descendant is stable
        assert!(w[0].stable_proportion <= w[1].stable_proportion);
    }
}

#[test]
fn deterministic_reports() {
    let m = target(11);
    let a = serde_json::to_string(&frobenius_run(&m, 3, 6, 42)).unwrap();
    let b = serde_json::to_string(&frobenius_run(&m, 3, 6, 42)).unwrap();
    assert_eq!(a, b);
    let c = frobenius_run(&m, 3, 6, 7);
    assert_eq!(c.levels, frobenius_run(&m, 3, 6, 42).levels);
}

#[test]
fn pinned_stable_proportions() {
    // regression values from the computation itself
    let rep = frobenius_run(&target(5), 2, 8, 0);
    assert!(rep.errors.is_empty());
    let props: Vec<f64> = rep.levels.iter().map(|l| l.stable_proportion).collect();
    let types: BTreeMap<u32, Vec<usize>> = rep.levels.iter().map(|l| (l.n, l.cycle_type.clone())).collect();
    assert_eq!(props, pinned_props_5_2());
    assert_eq!(types[&1], vec![2]);
    assert!(props[..8].iter().any(|&x| x < 1.0));
}

fn pinned_props_5_2() -> Vec<f64> {
    vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.125, 0.34375, 1.0]
}
