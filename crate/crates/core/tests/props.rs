//! Cross-module property suites over randomly generated programs.

use evoguide_core::graph::ProgramGraph;
use evoguide_core::rng::{stream_rng, Stream};
use evoguide_core::symreg::{mutate_graph, random_graph, SymRegTask, TaskName};
use proptest::prelude::*;

fn graph_from_seed(seed: u64, two_inputs: bool) -> ProgramGraph {
    let mut rng = stream_rng(seed, Stream::Evolution, 1);
    random_graph(if two_inputs { 2 } else { 1 }, 15, &mut rng)
}

proptest! {
    /// Every input edge points strictly backward.
    #[test]
    fn edges_point_backward(seed in any::<u64>(), two in any::<bool>()) {
        let g = graph_from_seed(seed, two);
        for (slot, node) in g.nodes().iter().enumerate() {
            for &src in node.inputs() {
                prop_assert!((src as usize) < slot);
            }
        }
    }

    /// Text round trip is the identity on slots, inputs and output.
    #[test]
    fn serialization_round_trips(seed in any::<u64>(), two in any::<bool>()) {
        let g = graph_from_seed(seed, two);
        let back = ProgramGraph::deserialize(&g.serialize()).unwrap();
        prop_assert_eq!(g.nodes(), back.nodes());
        prop_assert_eq!(g.num_inputs(), back.num_inputs());
        prop_assert_eq!(g.output_slot(), back.output_slot());
    }

    /// Mutation always yields a structurally valid graph.
    #[test]
    fn mutation_preserves_validity(seed in any::<u64>(), moves in 1usize..50) {
        let mut rng = stream_rng(seed, Stream::Evolution, 2);
        let mut g = graph_from_seed(seed, seed % 2 == 0);
        for _ in 0..moves {
            g = mutate_graph(&g, &mut rng);
            ProgramGraph::new(
                g.nodes().to_vec(),
                g.num_inputs(),
                g.output_slot(),
                g.max_slots(),
            ).unwrap();
        }
    }

    /// Fitness is always inside [0, 1].
    #[test]
    fn fitness_is_bounded(seed in any::<u64>()) {
        let task = SymRegTask::new(TaskName::Nguyen5, 3);
        let g = graph_from_seed(seed, false);
        let rec = task.fitness(&g);
        prop_assert!((0.0..=1.0).contains(&rec.fitness));
        prop_assert!(rec.rmse >= 0.0 || !rec.rmse.is_finite());
    }

    /// Lower RMSE always means higher fitness.
    #[test]
    fn flip_and_squash_is_order_reversing(r1 in 0.0f64..1e6, r2 in 0.0f64..1e6) {
        use evoguide_core::symreg::flip_and_squash;
        prop_assume!(r1 < r2);
        prop_assert!(flip_and_squash(r1) > flip_and_squash(r2));
    }
}

/// Bulk deterministic round trip across tasks and seeds.
#[test]
fn round_trip_ten_thousand_graphs() {
    let mut rng = stream_rng(99, Stream::Evolution, 3);
    for i in 0..10_000 {
        let g = random_graph(if i % 2 == 0 { 1 } else { 2 }, 15, &mut rng);
        let back = ProgramGraph::deserialize(&g.serialize()).unwrap();
        assert_eq!(g.nodes(), back.nodes());
        assert_eq!(g.num_inputs(), back.num_inputs());
        assert_eq!(g.output_slot(), back.output_slot());
    }
}

/// Bulk mutation validity, as a fast plain loop.
#[test]
fn ten_thousand_mutations_stay_valid() {
    let mut rng = stream_rng(7, Stream::Evolution, 4);
    let mut g = random_graph(2, 15, &mut rng);
    for _ in 0..10_000 {
        g = mutate_graph(&g, &mut rng);
        ProgramGraph::new(g.nodes().to_vec(), g.num_inputs(), g.output_slot(), g.max_slots())
            .expect("mutated graph is valid");
    }
}
