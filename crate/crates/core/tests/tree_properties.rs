mod common;

use catbart::data::Point;
use catbart::prior::draw_rule;
use catbart::rng;
use catbart::tree::{
    birth, death, depth, parent, Available, FeatureSpace, RegressionTree, SuffStatMap, Var,
};
use proptest::prelude::*;
use rand::Rng;

/// Random grow/prune edit sequence driven by `seed`, checking the leaf map
/// against a rebuilt one after every edit.
fn edit_sequence(seed: u64, steps: usize) -> (RegressionTree, FeatureSpace, Vec<RegressionTree>) {
    let mut rng = rng::stream(seed, 0);
    let (ds, fs) = common::mixed_dataset(60, &mut rng);
    let mut t = RegressionTree::root_only(0.0);
    let mut ssm = SuffStatMap::root(ds.n());
    let mut history = Vec::new();
    for _ in 0..steps {
        if t.n_leaves() == 1 || rng.random::<f64>() < 0.6 {
            let leaves = t.leaf_ids();
            let leaf = leaves[rng.random_range(0..leaves.len())];
            if let Ok(rule) = draw_rule(&t, leaf, &fs, &mut rng) {
                birth(&mut t, &mut ssm, leaf, rule, &ds, &fs).unwrap();
            }
        } else {
            let nogs = t.nog_ids();
            let nog = nogs[rng.random_range(0..nogs.len())];
            death(&mut t, &mut ssm, nog).unwrap();
        }
        assert_eq!(ssm, SuffStatMap::from_tree(&t, &ds).unwrap());
        history.push(t.clone());
    }
    (t, fs, history)
}

fn subset_of(child: &Available, parent: &Available) -> bool {
    match (child, parent) {
        (Available::Interval { lo, hi }, Available::Interval { lo: plo, hi: phi }) => lo >= plo && hi <= phi,
        (Available::Levels(c), Available::Levels(p)) => c.is_subset(p),
        _ => false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn label_arithmetic_after_edits(seed in any::<u64>()) {
        let (_, _, history) = edit_sequence(seed, 40);
        for t in &history {
            t.validate().unwrap();
            for &id in t.nodes().keys() {
                prop_assert_eq!(depth(id), 63 - id.leading_zeros());
                prop_assert_eq!(depth(id), (id as f64).log2().floor() as u32);
                if id > 1 {
                    prop_assert_eq!(parent(id), id / 2);
                    prop_assert!(t.nodes().contains_key(&parent(id)));
                }
            }
        }
    }

    #[test]
    fn availability_shrinks_down_the_tree(seed in any::<u64>()) {
        let (t, fs, _) = edit_sequence(seed, 40);
        let vars: Vec<Var> = (0..fs.p_cont()).map(Var::Cont).chain((0..fs.p_cat()).map(Var::Cat)).collect();
        for &id in t.nodes().keys().filter(|&&id| id > 1) {
            for &v in &vars {
                let child = t.available_set(id, v, &fs);
                let par = t.available_set(parent(id), v, &fs);
                prop_assert!(subset_of(&child, &par), "node {} var {:?}", id, v);
            }
        }
    }

    #[test]
    fn every_point_reaches_exactly_one_leaf(seed in any::<u64>()) {
        let (mut t, _, _) = edit_sequence(seed, 30);
        let leaves = t.leaf_ids();
        for (k, &l) in leaves.iter().enumerate() {
            t.set_jump(l, k as f64);
        }
        let mut rng = rng::stream(seed, 1);
        let mut hits = vec![0usize; leaves.len()];
        for _ in 0..10_000 / 48 + 1 {
            let x = Point {
                cont: vec![rng.random(), rng.random()],
                cat: vec![rng.random_range(0..5), rng.random_range(0..9)],
            };
            let leaf = t.traverse(&x).unwrap();
            let k = leaves.iter().position(|&l| l == leaf).expect("traverse ends at a leaf");
            prop_assert_eq!(t.evaluate(&x).unwrap(), k as f64);
            hits[k] += 1;
        }
        prop_assert_eq!(hits.iter().sum::<usize>(), 10_000 / 48 + 1);
    }

    #[test]
    fn json_round_trip_after_edits(seed in any::<u64>()) {
        let (t, _, _) = edit_sequence(seed, 25);
        let back = RegressionTree::from_json(&t.to_json()).unwrap();
        prop_assert_eq!(back, t);
    }
}

#[test]
fn ten_thousand_points_partition_one_tree() {
    let (t, _, _) = edit_sequence(7, 80);
    assert!(t.n_leaves() > 3);
    let mut rng = rng::stream(7, 2);
    for _ in 0..10_000 {
        let x = Point {
            cont: vec![rng.random(), rng.random()],
            cat: vec![rng.random_range(0..5), rng.random_range(0..9)],
        };
        assert!(t.is_leaf(t.traverse(&x).unwrap()));
    }
}
