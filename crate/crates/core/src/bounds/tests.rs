use super::*;
use crate::dataset::Dataset;
use crate::Problem;
use proptest::prelude::*;

fn lam(n: i128, d: i128) -> ExactValue {
    ExactValue::ratio(n, d)
}

#[test]
fn dead_leaf_threshold() {
    assert!(leaf_is_dead(15, lam(1, 100), 1000).unwrap());
    assert!(!leaf_is_dead(20, lam(1, 100), 1000).unwrap());
    assert!(!leaf_is_dead(0, ExactValue::ZERO, 1000).unwrap());
    assert!(leaf_is_dead(1, lam(1, 100), 0).is_err());
}

#[test]
fn child_accuracy_threshold() {
    assert!(!child_accuracy_admissible(9, lam(1, 100), 1000).unwrap());
    assert!(child_accuracy_admissible(10, lam(1, 100), 1000).unwrap());
    assert!(!child_accuracy_admissible(0, lam(1, 100), 1000).unwrap());
}

#[test]
fn lookahead_examples() {
    assert!(lookahead_prunes(lam(30, 100), lam(1, 100), lam(305, 1000)));
    assert!(!lookahead_prunes(lam(30, 100), lam(1, 100), lam(32, 100)));
    assert!(lookahead_prunes(lam(30, 100), lam(1, 100), lam(31, 100)));
}

#[test]
fn leaf_count_bounds() {
    assert_eq!(max_leaves_apriori(lam(1, 200), 10).unwrap(), 100);
    assert_eq!(max_leaves_apriori(lam(3, 10), 4).unwrap(), 1);
    assert_eq!(max_leaves_apriori(lam(1, 2), 4).unwrap(), 1);
    assert!(max_leaves_apriori(ExactValue::ZERO, 4).is_err());

    assert_eq!(max_leaves_current(lam(33, 100), lam(1, 200), 12).unwrap(), 66);
    assert_eq!(max_leaves_current(lam(1, 100), lam(1, 100), 12).unwrap(), 1);
    for (n, d) in [(1, 200), (1, 30), (3, 100)] {
        assert_eq!(
            max_leaves_current(lam(1, 2), lam(n, d), 10).unwrap(),
            max_leaves_apriori(lam(n, d), 10).unwrap()
        );
    }

    let l = lam(1, 100);
    assert_eq!(
        max_leaves_parent_specific(ExactValue::ZERO, 0, lam(33, 100), l, 12).unwrap(),
        max_leaves_current(lam(33, 100), l, 12).unwrap()
    );
    assert_eq!(
        max_leaves_parent_specific(lam(20, 100), 3, lam(21, 100), l, 10).unwrap(),
        4
    );
    assert_eq!(
        max_leaves_parent_specific(lam(20, 100), 4, lam(23, 100), l, 10).unwrap(),
        7
    );
}

#[test]
fn omega_examples() {
    let n = 10;
    let mk = |ones: &[usize]| BitVector::from_bools((0..n).map(|i| ones.contains(&i)));
    assert_eq!(
        similar_support_omega(&mk(&[1, 2, 3]), &mk(&[2, 3, 4]), n).unwrap(),
        lam(2, 10)
    );
    assert_eq!(
        similar_support_omega(&mk(&[1, 2]), &mk(&[1, 2]), n).unwrap(),
        ExactValue::ZERO
    );
    assert_eq!(
        similar_support_omega(&mk(&[0, 1]), &mk(&[5, 6, 7]), n).unwrap(),
        lam(5, 10)
    );
}

fn toy_problem() -> Dataset {
    // Parent: first 10 samples; 9 of them labelled 1.
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..100 {
        rows.push(vec![i < 10, i < 6]);
        // Left child (first 6): five ones. Right child (next 4): all ones.
        labels.push(i < 5 || (6..10).contains(&i));
    }
    Dataset::from_rows(vec!["p".into(), "s".into()], "y", &rows, &labels).unwrap()
}

#[test]
fn split_gain_example() {
    let ds = toy_problem();
    let p = Problem::new(&ds, lam(1, 100)).unwrap();
    let parent = Leaf::from_clauses(&p, &[crate::leaf::Clause::new(0, true)]).unwrap();
    let left = parent.child(&p, 1, true).unwrap();
    let right = parent.child(&p, 1, false).unwrap();
    // Parent 10 captured, 9 correct; children 6/5 and 4/4.
    assert_eq!((parent.n_captured(), parent.n_correct()), (10, 9));
    assert_eq!((left.n_captured(), left.n_correct()), (6, 5));
    assert_eq!((right.n_captured(), right.n_correct()), (4, 4));
    let g = split_gain(&parent, &left, &right, 100, lam(1, 100)).unwrap();
    assert_eq!(g.gain, ExactValue::ZERO);
    assert!(g.must_split_further);
    assert!(split_gain(&parent, &left, &left, 100, lam(1, 100)).is_err());
}

#[test]
fn equivalent_points_floor_examples() {
    let rows = vec![
        vec![false, true],
        vec![false, true],
        vec![false, true],
        vec![false, true],
        vec![true, false],
        vec![true, false],
    ];
    let ds = Dataset::from_rows(
        vec!["a".into(), "b".into()],
        "y",
        &rows,
        &[true, true, true, true, false, true],
    )
    .unwrap();
    let p = Problem::new(&ds, lam(1, 100)).unwrap();
    let root = p.root_tree();
    assert_eq!(equivalent_points_floor(&root, 6).unwrap(), lam(1, 6));
    let terminal = TreeState::terminal(root.leaves().cloned().collect(), p.scale()).unwrap();
    assert_eq!(equivalent_points_floor(&terminal, 6).unwrap(), ExactValue::ZERO);
}

#[test]
fn count_trees_matches_table() {
    let c = |p, d| count_trees(p, d).unwrap().to_string();
    assert_eq!(c(10, 1), "10");
    assert_eq!(c(10, 2), "1000");
    assert_eq!(c(20, 1), "20");
    assert_eq!(c(20, 2), "8000");
    assert_eq!(c(10, 3), "5329000");
    assert!(c(20, 3).starts_with("9411"));
    assert!(c(10, 4).starts_with("9338") && c(10, 4).len() == 21);
    assert!(c(20, 4).starts_with("9204") && c(20, 4).len() == 29);
}

#[test]
fn symmetry_savings_values() {
    assert_eq!(symmetry_savings(10, 5).unwrap().to_string(), "35463");
    assert_eq!(symmetry_savings(7, 1).unwrap().to_string(), "0");
    let v = symmetry_savings(20, 10).unwrap().to_string();
    assert_eq!(v, "736890983335");
    // 7.36891e11 to six significant figures.
    let six = (v.parse::<f64>().unwrap() / 1e6).round();
    assert_eq!(six, 736891.0);
    assert!(symmetry_savings(5, 0).is_err());
}

#[test]
fn total_evaluation_bound() {
    assert_eq!(total_evaluations_bound_exact(lam(1, 2), 1).unwrap().to_string(), "4");
    assert_eq!(total_evaluations_bound_log10(lam(1, 2), 1).unwrap(), 0);
    let mut prev = i64::MIN;
    for m in 1..8 {
        let v = total_evaluations_bound_log10(lam(1, 20), m).unwrap();
        let exact = total_evaluations_bound_exact(lam(1, 20), m).unwrap();
        assert_eq!(Some(v), floor_log10_exact(&exact));
        assert!(v >= prev);
        prev = v;
    }
}

#[test]
fn remaining_bound_examples() {
    let l = lam(1, 100);
    assert_eq!(remaining_evaluations_log10(lam(1, 2), &[], l, 5).unwrap(), None);
    let one = [RemainingEntry {
        lower_bound: lam(495, 1000),
        leaf_count: 3,
    }];
    assert_eq!(remaining_evaluations_log10(lam(1, 2), &one, l, 5).unwrap(), Some(0));
    assert_eq!(
        remaining_evaluations_exact(lam(1, 2), &one, l, 5).unwrap().to_string(),
        "1"
    );
}

proptest! {
    #[test]
    fn remaining_log_matches_exact(
        entries in proptest::collection::vec((0i128..60, 0u64..20), 1..6),
        m in 2usize..5,
    ) {
        let best = lam(1, 2);
        let l = lam(1, 40);
        let q: Vec<RemainingEntry> = entries
            .iter()
            .map(|&(b, leaf_count)| RemainingEntry { lower_bound: lam(b, 100), leaf_count })
            .collect();
        let exact = remaining_evaluations_exact(best, &q, l, m).unwrap();
        let log = remaining_evaluations_log10(best, &q, l, m).unwrap();
        prop_assert_eq!(log, floor_log10_exact(&exact));
    }

    #[test]
    fn thresholds_monotone_in_lambda(k in 0usize..200, a in 1i128..100, b in 1i128..100) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let n = 200;
        if leaf_is_dead(k, lam(lo, 1000), n).unwrap() {
            prop_assert!(leaf_is_dead(k, lam(hi, 1000), n).unwrap());
        }
        if !child_accuracy_admissible(k, lam(lo, 1000), n).unwrap() {
            prop_assert!(!child_accuracy_admissible(k, lam(hi, 1000), n).unwrap());
        }
    }
}
