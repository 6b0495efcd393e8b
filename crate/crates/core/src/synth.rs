//! Seeded synthetic graph generators for tests, benchmarks, and protocol
//! runs at configurable scale.

use rand::Rng;

use crate::graph::{normalize, ColoredMultigraph, Pair};
use crate::samplers::chain_rng;

/// Random colored multigraph with `n` vertices, exactly `instances` edge
/// instances, and colors drawn uniformly from `0..color_count`. A slice of
/// draws duplicates already placed pairs so multiplicities above 1 occur,
/// and a small fraction are self-loops. Deterministic in the seed.
pub fn random_multigraph(
    n: u32,
    instances: u64,
    color_count: u32,
    seed: u64,
) -> ColoredMultigraph {
    assert!(n >= 2 && n >= color_count && color_count >= 1);
    let mut rng = chain_rng(seed, u64::from(u32::MAX));
    let mut colors: Vec<u32> = (0..n).map(|_| rng.random_range(0..color_count)).collect();
    // Pin one vertex per color so color ids stay dense.
    for c in 0..color_count {
        colors[c as usize] = c;
    }
    let mut placed: Vec<Pair> = Vec::with_capacity(instances as usize);
    let mut counts: std::collections::HashMap<Pair, u32> = std::collections::HashMap::new();
    for _ in 0..instances {
        let pair = if !placed.is_empty() && rng.random::<f64>() < 0.12 {
            placed[rng.random_range(0..placed.len())]
        } else if rng.random::<f64>() < 0.05 {
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
    ColoredMultigraph::build(&colors, &edges).expect("generated edges are valid")
}

/// Two-color graph with strong color assortativity: vertices split evenly,
/// a `frac_inter` fraction of instances bridge the colors, the rest stay
/// inside a color group. No self-loops. Deterministic in the seed.
pub fn assortative_two_color(
    n: u32,
    instances: u64,
    frac_inter: f64,
    seed: u64,
) -> ColoredMultigraph {
    assert!(n >= 4 && n.is_multiple_of(2));
    let half = n / 2;
    let mut rng = chain_rng(seed, u64::from(u32::MAX) - 1);
    let colors: Vec<u32> = (0..n).map(|v| u32::from(v >= half)).collect();
    let mut counts: std::collections::HashMap<Pair, u32> = std::collections::HashMap::new();
    let mut placed = 0u64;
    while placed < instances {
        let pair = if rng.random::<f64>() < frac_inter {
            let u = rng.random_range(0..half);
            let w = rng.random_range(half..n);
            (u, w)
        } else {
            let base = if rng.random::<bool>() { 0 } else { half };
            let u = base + rng.random_range(0..half);
            let w = base + rng.random_range(0..half);
            if u == w {
                continue;
            }
            normalize(u, w)
        };
        *counts.entry(pair).or_insert(0) += 1;
        placed += 1;
    }
    let edges: Vec<(u32, u32, u32)> = counts.into_iter().map(|((u, w), m)| (u, w, m)).collect();
    ColoredMultigraph::build(&colors, &edges).expect("generated edges are valid")
}

/// The same edge multiset under a fresh uniform coloring with
/// `color_count` colors. Deterministic in the seed.
pub fn recolor(g: &ColoredMultigraph, color_count: u32, seed: u64) -> ColoredMultigraph {
    assert!(g.vertex_count() >= color_count);
    let mut rng = chain_rng(seed, u64::from(u32::MAX) - 2);
    let mut colors: Vec<u32> = (0..g.vertex_count())
        .map(|_| rng.random_range(0..color_count))
        .collect();
    for c in 0..color_count {
        colors[c as usize] = c;
    }
    ColoredMultigraph::from_canonical(&colors, &g.canonical_key()).expect("key is valid")
}
