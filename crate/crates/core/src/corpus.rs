//! Builtin verification corpus: a fixed set of small instances spanning one
//! to three colors, self-loops, and multiplicities above one, sized for
//! exhaustive enumeration. The seeded tail is generated with the pinned
//! chain generator, so the corpus is identical on every build.

use rand::Rng;

use crate::graph::{normalize, ColoredMultigraph, Pair};
use crate::samplers::chain_rng;

pub struct CorpusInstance {
    pub name: &'static str,
    pub graph: ColoredMultigraph,
}

fn inst(name: &'static str, colors: &[u32], edges: &[(u32, u32, u32)]) -> CorpusInstance {
    CorpusInstance {
        name,
        graph: ColoredMultigraph::build(colors, edges).expect("corpus instance is valid"),
    }
}

/// Small seeded instance: 4-6 vertices, 4-7 instances, 1-3 colors.
fn seeded(name: &'static str, seed: u64) -> CorpusInstance {
    let mut rng = chain_rng(seed, 0xC0_FF_EE);
    let n: u32 = rng.random_range(4..=6);
    let color_count: u32 = rng.random_range(1..=3);
    let instances: u32 = rng.random_range(4..=7);
    let mut colors: Vec<u32> = (0..n).map(|_| rng.random_range(0..color_count)).collect();
    for c in 0..color_count {
        colors[c as usize] = c;
    }
    let mut placed: Vec<Pair> = Vec::new();
    let mut counts: std::collections::HashMap<Pair, u32> = std::collections::HashMap::new();
    for _ in 0..instances {
        let pair = if !placed.is_empty() && rng.random::<f64>() < 0.2 {
            placed[rng.random_range(0..placed.len())]
        } else if rng.random::<f64>() < 0.12 {
            let u = rng.random_range(0..n);
            (u, u)
        } else {
            let u = rng.random_range(0..n);
            let w = rng.random_range(0..n);
            normalize(u, w)
        };
        placed.push(pair);
        *counts.entry(pair).or_insert(0) += 1;
    }
    let edges: Vec<(u32, u32, u32)> = counts.into_iter().map(|((u, w), m)| (u, w, m)).collect();
    CorpusInstance {
        name,
        graph: ColoredMultigraph::build(&colors, &edges).expect("seeded instance is valid"),
    }
}

/// The builtin corpus used by the verification suite.
pub fn builtin_corpus() -> Vec<CorpusInstance> {
    let mut corpus = vec![
        inst("triangle_two_color", &[0, 0, 1], &[(0, 1, 1), (0, 2, 1), (1, 2, 1)]),
        inst("double_edge_bichrome", &[0, 1], &[(0, 1, 2)]),
        inst("path_three_mono", &[0, 0, 0], &[(0, 1, 1), (1, 2, 1)]),
        inst("loop_pair_mono", &[0, 0], &[(0, 0, 1), (1, 1, 1)]),
        inst(
            "four_cycle_alternating",
            &[0, 1, 0, 1],
            &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 1)],
        ),
        inst(
            "star_three_mono",
            &[0, 0, 0, 0],
            &[(0, 1, 1), (0, 2, 1), (0, 3, 1)],
        ),
        inst("forced_loop_multi", &[0, 1], &[(0, 0, 1), (0, 1, 2)]),
        inst(
            "bichrome_copies_pair",
            &[0, 1, 0, 1],
            &[(0, 1, 2), (2, 3, 1)],
        ),
        inst(
            "three_color_loops",
            &[0, 1, 2],
            &[(0, 0, 1), (1, 1, 1), (2, 2, 1)],
        ),
        inst("triple_edge_mono", &[0, 0], &[(0, 1, 3)]),
        inst(
            "two_color_block_cycle",
            &[0, 0, 1, 1],
            &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 1)],
        ),
        inst(
            "three_color_star_mix",
            &[0, 1, 0, 2, 1, 2],
            &[(0, 1, 1), (2, 3, 1), (1, 4, 1), (3, 5, 1)],
        ),
        inst(
            "concentrated_loop_block",
            &[0, 0, 1, 1],
            &[(0, 0, 1), (0, 1, 1), (2, 3, 2)],
        ),
        inst("double_self_loop", &[0], &[(0, 0, 2)]),
        inst("wedge_three_colors", &[0, 1, 2], &[(0, 1, 1), (1, 2, 1)]),
        inst(
            "mono_matching_plus_wedge",
            &[0, 0, 0, 0, 0],
            &[(0, 1, 1), (2, 3, 1), (3, 4, 1)],
        ),
    ];
    let seeds: [(&'static str, u64); 9] = [
        ("seeded_a", 102),
        ("seeded_b", 103),
        ("seeded_c", 104),
        ("seeded_d", 113),
        ("seeded_e", 116),
        ("seeded_f", 118),
        ("seeded_g", 122),
        ("seeded_h", 123),
        ("seeded_i", 136),
    ];
    for (name, seed) in seeds {
        corpus.push(seeded(name, seed));
    }
    corpus
}
