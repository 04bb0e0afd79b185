#![allow(dead_code)]

pub mod oracle;

use dyadnet::graph::DirectedCountNetwork;
use dyadnet::synth::node_ids;
use proptest::prelude::*;

pub fn network(m: &[Vec<u64>]) -> DirectedCountNetwork {
    DirectedCountNetwork::from_matrix(&node_ids(m.len()), m).unwrap()
}

/// Square count matrices with a zero diagonal, up to `max_n` nodes.
pub fn count_matrix(max_n: usize) -> impl Strategy<Value = Vec<Vec<u64>>> {
    (1..=max_n)
        .prop_flat_map(|n| {
            prop::collection::vec(
                prop::collection::vec(prop_oneof![3 => Just(0u64), 2 => 1u64..5], n),
                n,
            )
        })
        .prop_map(|mut m| {
            for (i, row) in m.iter_mut().enumerate() {
                row[i] = 0;
            }
            m
        })
}
