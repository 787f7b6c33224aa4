use scha_core::model::Part;
use scha_core::reduction::{all_prolongations, cluster_stack, ClusterOptions};
use scha_testkit::gen::{corpus, GenConfig};
use scha_testkit::{fixtures, oracle};

#[test]
fn fixture_a_composes_to_two_clusters() {
    let stack = cluster_stack(&fixtures::fixture_a(), ClusterOptions::default()).unwrap();
    assert_eq!(stack.shapes(), vec![(5, 4), (4, 3), (3, 2)]);
    let m = stack.compose(0, 3).unwrap();
    assert_eq!(
        m.matrix.to_rows(),
        vec![
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0]
        ]
    );
    assert_eq!(m.col_labels.iter().map(|n| n.to_string()).collect::<Vec<_>>(), ["sop:0", "sop:4"]);
}

#[test]
fn stack_invariants_on_random_analyses() {
    for a in corpus(21, 300, &GenConfig::default()) {
        let stack = cluster_stack(&a, ClusterOptions::default()).unwrap();
        assert_eq!(stack.layers.len() as u32, a.max_depth());
        assert_eq!(stack.layers[0].shape().0, a.note_count());
        for pair in stack.layers.windows(2) {
            assert_eq!(pair[0].shape().1, pair[1].shape().0);
            assert_eq!(pair[0].col_labels, pair[1].row_labels);
        }
        for layer in &stack.layers {
            assert!(layer.matrix.row_sums().iter().all(|&s| s == 1.0));
            assert!(layer.matrix.entries().all(|x| x == 0.0 || x == 0.5 || x == 1.0));
        }
    }
}

#[test]
fn compose_matches_oracle() {
    for a in corpus(5, 200, &GenConfig::small()) {
        let stack = cluster_stack(&a, ClusterOptions::default()).unwrap();
        let composed = stack.compose(0, stack.layers.len()).unwrap();
        let expected = oracle::ancestor_matrix(&a);
        assert_eq!(composed.matrix.to_rows().len(), expected.len());
        for (got, want) in composed.matrix.to_rows().iter().zip(&expected) {
            for (x, y) in got.iter().zip(want) {
                assert!((x - y).abs() < 1e-12, "{got:?} vs {want:?}");
            }
        }
    }
}

#[test]
fn middles_are_covered_once() {
    for a in corpus(8, 200, &GenConfig::default()) {
        let set = all_prolongations(&a);
        for level in 1..=a.max_depth() {
            for part in Part::ALL {
                let notes: Vec<(usize, u32)> = a.voice(part).notes().map(|(i, _, d)| (i, d)).collect();
                let first = notes.iter().position(|n| n.1 >= level);
                let last = notes.iter().rposition(|n| n.1 >= level);
                for (k, &(index, depth)) in notes.iter().enumerate() {
                    if depth >= level {
                        continue;
                    }
                    let covering = set
                        .derived
                        .iter()
                        .filter(|p| p.level == level && p.voice == part)
                        .filter(|p| p.middles.iter().any(|m| m.index == index))
                        .count();
                    let inside = first.is_some_and(|f| f < k) && last.is_some_and(|l| k < l);
                    assert_eq!(covering, usize::from(inside), "{part:?} {index} at level {level}");
                }
            }
        }
    }
}
