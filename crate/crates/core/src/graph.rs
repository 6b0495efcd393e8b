//! Colored multigraph with integer edge multiplicities, self-loops, and
//! per-color edge-instance classes supporting O(1) uniform draws and O(1)
//! in-place swap updates.
//!
//! Conventions baked into this module:
//! * a self-loop `(u,u)` contributes 2 to `degree(u)` and 2 to the colored
//!   degree of `u` in its own color;
//! * a bichrome multiedge lives in the instance class of *both* endpoint
//!   colors, a monochrome multiedge (self-loops included) only in one;
//! * multiplicities are strictly positive; absent pairs have multiplicity 0.

use std::collections::HashMap;

use rand::Rng;
use thiserror::Error;

/// Unordered vertex pair, always stored as `(min, max)`.
pub type Pair = (u32, u32);

/// Canonical identity of a graph: sorted `(u, w, multiplicity)` triples.
/// Two graphs over the same vertices and coloring are equal members of an
/// ensemble iff their canonical keys are equal.
pub type CanonicalKey = Vec<(u32, u32, u32)>;

#[inline]
pub fn normalize(u: u32, w: u32) -> Pair {
    if u <= w {
        (u, w)
    } else {
        (w, u)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge record {index}: vertex {vertex} out of range (vertex count {vertex_count})")]
    VertexOutOfRange {
        index: usize,
        vertex: u32,
        vertex_count: u32,
    },
    #[error("edge record {index}: duplicate pair ({u}, {w})")]
    DuplicatePair { index: usize, u: u32, w: u32 },
    #[error("edge record {index}: zero multiplicity for pair ({u}, {w})")]
    ZeroMultiplicity { index: usize, u: u32, w: u32 },
}

/// Population an instance is drawn from: the whole edge multiset or the
/// class of instances incident to at least one vertex of a given color.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassKind {
    All,
    Color(u32),
}

/// One unit of a multiedge's multiplicity, as drawn from a class.
/// `slot` locates the instance inside the class it was drawn from, which is
/// what exclusion in a second draw needs. A bichrome instance also lives in
/// the other endpoint color's class under some other slot; removal goes
/// through the reverse index, so that slot is never materialized here.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeInstance {
    pub pair: Pair,
    pub class: ClassKind,
    pub slot: u32,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SampleError {
    #[error("degenerate class {0:?}: not enough instances to draw from")]
    DegenerateClass(ClassKind),
}

#[derive(Debug, Clone, Copy)]
struct ClassItem {
    pair: Pair,
    /// Position of this slot inside `rev[pair]`.
    rev_pos: u32,
}

/// Flat array of edge instances with a reverse index, giving O(1) uniform
/// sampling, O(1) insertion, and O(1) swap-remove of an instance of a given
/// multiedge.
#[derive(Debug, Clone, Default)]
struct InstanceClass {
    items: Vec<ClassItem>,
    rev: HashMap<Pair, Vec<u32>>,
}

impl InstanceClass {
    #[inline]
    fn len(&self) -> usize {
        self.items.len()
    }

    fn insert(&mut self, pair: Pair) {
        let slot = self.items.len() as u32;
        let slots = self.rev.entry(pair).or_default();
        let rev_pos = slots.len() as u32;
        slots.push(slot);
        self.items.push(ClassItem { pair, rev_pos });
    }

    /// Removes one (arbitrary) instance of `pair`.
    fn remove_one(&mut self, pair: Pair) {
        let slots = self
            .rev
            .get_mut(&pair)
            .expect("removing instance of absent multiedge");
        let slot = slots.pop().expect("empty reverse slot list") as usize;
        if slots.is_empty() {
            self.rev.remove(&pair);
        }
        let last = self.items.len() - 1;
        if slot != last {
            let moved = self.items[last];
            self.items[slot] = moved;
            self.rev.get_mut(&moved.pair).expect("stale reverse index")[moved.rev_pos as usize] =
                slot as u32;
        }
        self.items.pop();
    }

    /// Multiset of pairs currently held, for consistency checks.
    fn contents(&self) -> Vec<Pair> {
        let mut v: Vec<Pair> = self.items.iter().map(|it| it.pair).collect();
        v.sort_unstable();
        v
    }
}

/// A vertex-colored undirected multigraph.
///
/// Vertices are dense ids `0..vertex_count`, colors dense ids
/// `0..color_count`. All caches (degrees, colored degrees, instance classes)
/// are maintained incrementally by [`ColoredMultigraph::apply_swap`].
#[derive(Debug, Clone)]
pub struct ColoredMultigraph {
    colors: Vec<u32>,
    color_count: u32,
    mult: HashMap<Pair, u32>,
    instance_total: u64,
    degree: Vec<u32>,
    /// Row-major `vertex_count x color_count` colored-degree table.
    colored_degree: Vec<u32>,
    /// One class per color, plus the all-instances class at index
    /// `color_count`.
    classes: Vec<InstanceClass>,
}

impl ColoredMultigraph {
    /// Builds a graph from per-vertex colors and `(u, w, multiplicity)`
    /// records. Runs in time linear in vertices plus instances (up to the
    /// sort that canonicalizes instance-slot order).
    ///
    /// Instances are laid out in sorted pair order regardless of the input
    /// order, so two builds of the same multiset sample identically under
    /// the same seed.
    pub fn build(vertex_colors: &[u32], edges: &[(u32, u32, u32)]) -> Result<Self, GraphError> {
        let n = vertex_colors.len() as u32;
        let color_count = vertex_colors.iter().copied().max().map_or(0, |c| c + 1);
        let mut g = ColoredMultigraph {
            colors: vertex_colors.to_vec(),
            color_count,
            mult: HashMap::new(),
            instance_total: 0,
            degree: vec![0; n as usize],
            colored_degree: vec![0; n as usize * color_count as usize],
            classes: vec![InstanceClass::default(); color_count as usize + 1],
        };
        let mut normalized = Vec::with_capacity(edges.len());
        for (index, &(u, w, m)) in edges.iter().enumerate() {
            for v in [u, w] {
                if v >= n {
                    return Err(GraphError::VertexOutOfRange {
                        index,
                        vertex: v,
                        vertex_count: n,
                    });
                }
            }
            let pair = normalize(u, w);
            if m == 0 {
                return Err(GraphError::ZeroMultiplicity {
                    index,
                    u: pair.0,
                    w: pair.1,
                });
            }
            if g.mult.contains_key(&pair) {
                return Err(GraphError::DuplicatePair {
                    index,
                    u: pair.0,
                    w: pair.1,
                });
            }
            g.mult.insert(pair, m);
            normalized.push((pair, m));
        }
        normalized.sort_unstable();
        for (pair, m) in normalized {
            for _ in 0..m {
                g.add_instance_caches(pair);
            }
        }
        Ok(g)
    }

    #[inline]
    pub fn vertex_count(&self) -> u32 {
        self.colors.len() as u32
    }

    #[inline]
    pub fn color_count(&self) -> u32 {
        self.color_count
    }

    #[inline]
    pub fn color_of(&self, v: u32) -> u32 {
        self.colors[v as usize]
    }

    #[inline]
    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    /// Total number of edge instances `|E|`.
    #[inline]
    pub fn instance_total(&self) -> u64 {
        self.instance_total
    }

    #[inline]
    pub fn multiplicity(&self, u: u32, w: u32) -> u32 {
        self.mult.get(&normalize(u, w)).copied().unwrap_or(0)
    }

    #[inline]
    pub fn degree(&self, v: u32) -> u32 {
        self.degree[v as usize]
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degree
    }

    /// Number of neighbors of `v` with color `c`, counting multiplicity; a
    /// self-loop counts its vertex twice.
    #[inline]
    pub fn colored_degree(&self, v: u32, c: u32) -> u32 {
        self.colored_degree[v as usize * self.color_count as usize + c as usize]
    }

    /// Number of instances in a class.
    #[inline]
    pub fn class_len(&self, class: ClassKind) -> usize {
        self.classes[self.class_index(class)].len()
    }

    #[inline]
    fn class_index(&self, class: ClassKind) -> usize {
        match class {
            ClassKind::All => self.color_count as usize,
            ClassKind::Color(c) => c as usize,
        }
    }

    /// Iterates distinct multiedges as `(pair, multiplicity)`, in no
    /// particular order. Order-sensitive consumers (float accumulation,
    /// output) must sort.
    pub fn multiedges(&self) -> impl Iterator<Item = (Pair, u32)> + '_ {
        self.mult.iter().map(|(&p, &m)| (p, m))
    }

    /// Distinct multiedges in sorted pair order.
    pub fn multiedges_sorted(&self) -> Vec<(Pair, u32)> {
        let mut v: Vec<(Pair, u32)> = self.multiedges().collect();
        v.sort_unstable();
        v
    }

    /// Distinct multiedges of a class with multiplicities, sorted. Linear in
    /// the class size; for tests and the oracle, not the step path.
    pub fn class_multiedges(&self, class: ClassKind) -> Vec<(Pair, u32)> {
        let mut seen: HashMap<Pair, u32> = HashMap::new();
        for it in &self.classes[self.class_index(class)].items {
            *seen.entry(it.pair).or_insert(0) += 1;
        }
        let mut v: Vec<(Pair, u32)> = seen.into_iter().collect();
        v.sort_unstable();
        v
    }

    /// Sorted multiset of pairs held by a class, for cache-coherence checks.
    pub fn class_contents(&self, class: ClassKind) -> Vec<Pair> {
        self.classes[self.class_index(class)].contents()
    }

    /// The colors an instance of `pair` is classed under (one or two).
    #[inline]
    fn pair_colors(&self, pair: Pair) -> (u32, Option<u32>) {
        let a = self.colors[pair.0 as usize];
        let b = self.colors[pair.1 as usize];
        if a == b {
            (a, None)
        } else {
            (a, Some(b))
        }
    }

    fn add_instance_caches(&mut self, pair: Pair) {
        let (u, w) = pair;
        let (ca, cb) = self.pair_colors(pair);
        self.classes[ca as usize].insert(pair);
        if let Some(cb) = cb {
            self.classes[cb as usize].insert(pair);
        }
        let all = self.color_count as usize;
        self.classes[all].insert(pair);
        self.instance_total += 1;
        let k = self.color_count as usize;
        if u == w {
            self.degree[u as usize] += 2;
            self.colored_degree[u as usize * k + self.colors[u as usize] as usize] += 2;
        } else {
            self.degree[u as usize] += 1;
            self.degree[w as usize] += 1;
            self.colored_degree[u as usize * k + self.colors[w as usize] as usize] += 1;
            self.colored_degree[w as usize * k + self.colors[u as usize] as usize] += 1;
        }
    }

    fn remove_instance_caches(&mut self, pair: Pair) {
        let (u, w) = pair;
        let (ca, cb) = self.pair_colors(pair);
        self.classes[ca as usize].remove_one(pair);
        if let Some(cb) = cb {
            self.classes[cb as usize].remove_one(pair);
        }
        let all = self.color_count as usize;
        self.classes[all].remove_one(pair);
        self.instance_total -= 1;
        let k = self.color_count as usize;
        if u == w {
            self.degree[u as usize] -= 2;
            self.colored_degree[u as usize * k + self.colors[u as usize] as usize] -= 2;
        } else {
            self.degree[u as usize] -= 1;
            self.degree[w as usize] -= 1;
            self.colored_degree[u as usize * k + self.colors[w as usize] as usize] -= 1;
            self.colored_degree[w as usize * k + self.colors[u as usize] as usize] -= 1;
        }
    }

    /// Draws an edge instance uniformly from a class, optionally excluding
    /// one previously drawn instance of the same class.
    pub fn sample_instance<R: Rng>(
        &self,
        class: ClassKind,
        rng: &mut R,
        excluded: Option<&EdgeInstance>,
    ) -> Result<EdgeInstance, SampleError> {
        let idx = self.class_index(class);
        let items = &self.classes[idx].items;
        let len = items.len();
        match excluded {
            None => {
                if len == 0 {
                    return Err(SampleError::DegenerateClass(class));
                }
                let slot = rng.random_range(0..len);
                Ok(EdgeInstance {
                    pair: items[slot].pair,
                    class,
                    slot: slot as u32,
                })
            }
            Some(ex) => {
                debug_assert_eq!(ex.class, class, "exclusion must come from the same class");
                if len <= 1 {
                    return Err(SampleError::DegenerateClass(class));
                }
                // Draw from 0..len-1 and remap a hit on the excluded slot to
                // the last slot: uniform over the remaining len-1 instances.
                let mut slot = rng.random_range(0..len - 1);
                if slot == ex.slot as usize {
                    slot = len - 1;
                }
                Ok(EdgeInstance {
                    pair: items[slot].pair,
                    class,
                    slot: slot as u32,
                })
            }
        }
    }

    /// Applies a double edge swap in place: decrements the two removed
    /// pairs, increments the two inserted pairs, and keeps every cache
    /// consistent. Amortized constant time.
    ///
    /// Panics if a removed pair lacks the required multiplicity; that is an
    /// internal-consistency fault of the caller, never an expected error.
    pub fn apply_swap(&mut self, removed: &[Pair; 2], inserted: &[Pair; 2]) {
        if removed[0] == removed[1] {
            assert!(
                self.multiplicity(removed[0].0, removed[0].1) >= 2,
                "swap removes two copies of {:?} but multiplicity < 2",
                removed[0]
            );
        } else {
            for r in removed {
                assert!(
                    self.multiplicity(r.0, r.1) >= 1,
                    "swap removes absent multiedge {r:?}"
                );
            }
        }
        for &r in removed {
            let r = normalize(r.0, r.1);
            let m = self.mult.get_mut(&r).expect("checked above");
            *m -= 1;
            if *m == 0 {
                self.mult.remove(&r);
            }
            self.remove_instance_caches(r);
        }
        for &i in inserted {
            let i = normalize(i.0, i.1);
            *self.mult.entry(i).or_insert(0) += 1;
            self.add_instance_caches(i);
        }
    }

    /// Sorted `(u, w, multiplicity)` triples identifying this graph inside
    /// its ensemble.
    pub fn canonical_key(&self) -> CanonicalKey {
        let mut key: CanonicalKey = self.mult.iter().map(|(&(u, w), &m)| (u, w, m)).collect();
        key.sort_unstable();
        key
    }

    /// Rebuilds a graph from a canonical key and a coloring.
    pub fn from_canonical(colors: &[u32], key: &CanonicalKey) -> Result<Self, GraphError> {
        Self::build(colors, key)
    }
}

/// Symmetric color-pair edge-count matrix. Entry `(l, r)` counts the edge
/// instances with endpoint colors `{l, r}`; each instance, self-loops
/// included, is counted exactly once in the cell of its color pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointColorMatrix {
    color_count: u32,
    counts: Vec<u64>,
}

impl JointColorMatrix {
    #[inline]
    pub fn color_count(&self) -> u32 {
        self.color_count
    }

    #[inline]
    pub fn get(&self, l: u32, r: u32) -> u64 {
        self.counts[l as usize * self.color_count as usize + r as usize]
    }

    /// Sum over unordered color pairs; equals the instance total.
    pub fn total(&self) -> u64 {
        let k = self.color_count;
        let mut t = 0;
        for l in 0..k {
            for r in l..k {
                t += self.get(l, r);
            }
        }
        t
    }
}

/// Computes the joint color matrix of a graph from its multiplicity map.
pub fn jcm(g: &ColoredMultigraph) -> JointColorMatrix {
    let k = g.color_count() as usize;
    let mut counts = vec![0u64; k * k];
    for ((u, w), m) in g.multiedges() {
        let a = g.color_of(u) as usize;
        let b = g.color_of(w) as usize;
        counts[a * k + b] += m as u64;
        if a != b {
            counts[b * k + a] += m as u64;
        }
    }
    JointColorMatrix {
        color_count: k as u32,
        counts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn build_triangle() {
        let g = ColoredMultigraph::build(&[0, 0, 1], &[(0, 1, 1), (0, 2, 1), (1, 2, 1)]).unwrap();
        assert_eq!(g.degrees(), &[2, 2, 2]);
        assert_eq!(g.instance_total(), 3);
        assert_eq!(g.class_len(ClassKind::Color(0)), 3);
        assert_eq!(g.class_len(ClassKind::Color(1)), 2);
        assert_eq!(g.class_len(ClassKind::All), 3);
    }

    #[test]
    fn build_self_loop_counts_twice() {
        let g = ColoredMultigraph::build(&[0], &[(0, 0, 2)]).unwrap();
        assert_eq!(g.degree(0), 4);
        assert_eq!(g.instance_total(), 2);
        assert_eq!(g.class_len(ClassKind::Color(0)), 2);
        assert_eq!(g.colored_degree(0, 0), 4);
    }

    #[test]
    fn build_bichrome_dual_membership() {
        let g = ColoredMultigraph::build(&[0, 1], &[(0, 1, 3)]).unwrap();
        assert_eq!(g.colored_degree(0, 1), 3);
        assert_eq!(g.colored_degree(1, 0), 3);
        assert_eq!(g.class_len(ClassKind::Color(0)), 3);
        assert_eq!(g.class_len(ClassKind::Color(1)), 3);
        assert_eq!(g.class_len(ClassKind::All), 3);
    }

    #[test]
    fn build_rejects_bad_input() {
        assert_eq!(
            ColoredMultigraph::build(&[0, 0], &[(0, 2, 1)]).unwrap_err(),
            GraphError::VertexOutOfRange {
                index: 0,
                vertex: 2,
                vertex_count: 2
            }
        );
        assert_eq!(
            ColoredMultigraph::build(&[0, 0], &[(0, 1, 1), (1, 0, 2)]).unwrap_err(),
            GraphError::DuplicatePair {
                index: 1,
                u: 0,
                w: 1
            }
        );
        assert_eq!(
            ColoredMultigraph::build(&[0, 0], &[(0, 1, 0)]).unwrap_err(),
            GraphError::ZeroMultiplicity {
                index: 0,
                u: 0,
                w: 1
            }
        );
    }

    #[test]
    fn colored_degrees_sum_to_degree() {
        let g = ColoredMultigraph::build(
            &[0, 1, 2, 0],
            &[(0, 0, 1), (0, 1, 2), (1, 2, 1), (2, 3, 1), (0, 3, 1)],
        )
        .unwrap();
        for v in 0..g.vertex_count() {
            let sum: u32 = (0..g.color_count()).map(|c| g.colored_degree(v, c)).sum();
            assert_eq!(sum, g.degree(v), "vertex {v}");
        }
    }

    #[test]
    fn jcm_triangle() {
        let g = ColoredMultigraph::build(&[0, 0, 1], &[(0, 1, 1), (0, 2, 1), (1, 2, 1)]).unwrap();
        let j = jcm(&g);
        assert_eq!(j.get(0, 0), 1);
        assert_eq!(j.get(0, 1), 2);
        assert_eq!(j.get(1, 0), 2);
        assert_eq!(j.get(1, 1), 0);
        assert_eq!(j.total(), 3);
    }

    #[test]
    fn jcm_self_loop() {
        let g = ColoredMultigraph::build(&[0], &[(0, 0, 2)]).unwrap();
        assert_eq!(jcm(&g).get(0, 0), 2);
    }

    #[test]
    fn sample_is_multiplicity_proportional() {
        // E = {(a,b) x2, (c,d) x1}: P[(a,b)] = 2/3; with one (a,b) instance
        // excluded both multiedges are equally likely.
        let g = ColoredMultigraph::build(&[0, 0, 0, 0], &[(0, 1, 2), (2, 3, 1)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 200_000;
        let mut ab = 0u32;
        for _ in 0..n {
            let i = g.sample_instance(ClassKind::All, &mut rng, None).unwrap();
            if i.pair == (0, 1) {
                ab += 1;
            }
        }
        let frac = f64::from(ab) / f64::from(n);
        assert!((frac - 2.0 / 3.0).abs() < 0.005, "frac={frac}");

        let mut ab = 0u32;
        for _ in 0..n {
            let first = loop {
                let i = g.sample_instance(ClassKind::All, &mut rng, None).unwrap();
                if i.pair == (0, 1) {
                    break i;
                }
            };
            let second = g
                .sample_instance(ClassKind::All, &mut rng, Some(&first))
                .unwrap();
            if second.pair == (0, 1) {
                ab += 1;
            }
        }
        let frac = f64::from(ab) / f64::from(n);
        assert!((frac - 0.5).abs() < 0.005, "frac={frac}");
    }

    #[test]
    fn sample_chi_square_goodness_of_fit() {
        // Five multiedges with multiplicities 1..=5 in one class; 10^6 draws
        // against the exact instance-proportional probabilities. Critical
        // value for chi-square with 4 dof at alpha = 0.01 is 13.277.
        let edges: Vec<(u32, u32, u32)> = (0..5).map(|i| (2 * i, 2 * i + 1, i + 1)).collect();
        let g = ColoredMultigraph::build(&[0; 10], &edges).unwrap();
        let total: u32 = (1..=5).sum();
        let mut rng = ChaCha8Rng::seed_from_u64(20_240_101);
        let n = 1_000_000usize;
        let mut counts = [0u64; 5];
        for _ in 0..n {
            let i = g.sample_instance(ClassKind::All, &mut rng, None).unwrap();
            counts[(i.pair.0 / 2) as usize] += 1;
        }
        let mut chi2 = 0.0;
        for (k, &c) in counts.iter().enumerate() {
            let expect = n as f64 * (k as f64 + 1.0) / f64::from(total);
            chi2 += (c as f64 - expect).powi(2) / expect;
        }
        assert!(chi2 < 13.277, "chi2={chi2}");
    }

    #[test]
    fn empty_class_is_degenerate() {
        let g = ColoredMultigraph::build(&[0, 1], &[(0, 0, 1)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(
            g.sample_instance(ClassKind::Color(1), &mut rng, None)
                .unwrap_err(),
            SampleError::DegenerateClass(ClassKind::Color(1))
        );
    }

    #[test]
    fn apply_swap_four_vertices() {
        let mut g = ColoredMultigraph::build(&[0, 0, 0, 0], &[(0, 1, 1), (2, 3, 1)]).unwrap();
        let before_degrees = g.degrees().to_vec();
        g.apply_swap(&[(0, 1), (2, 3)], &[(0, 3), (1, 2)]);
        assert_eq!(g.multiplicity(0, 1), 0);
        assert_eq!(g.multiplicity(2, 3), 0);
        assert_eq!(g.multiplicity(0, 3), 1);
        assert_eq!(g.multiplicity(1, 2), 1);
        assert_eq!(g.degrees(), before_degrees.as_slice());
        assert_eq!(g.instance_total(), 2);
    }

    #[test]
    fn apply_swap_two_self_loops_into_double_edge() {
        let mut g = ColoredMultigraph::build(&[0, 0], &[(0, 0, 1), (1, 1, 1)]).unwrap();
        g.apply_swap(&[(0, 0), (1, 1)], &[(0, 1), (0, 1)]);
        assert_eq!(g.multiplicity(0, 1), 2);
        assert_eq!(g.multiplicity(0, 0), 0);
        assert_eq!(g.degree(0), 2);
        assert_eq!(g.degree(1), 2);
    }

    #[test]
    fn swap_then_reverse_restores_canonical_key() {
        let mut g =
            ColoredMultigraph::build(&[0, 1, 0, 1], &[(0, 1, 2), (2, 3, 1), (0, 0, 1)]).unwrap();
        let key = g.canonical_key();
        g.apply_swap(&[(0, 1), (2, 3)], &[(0, 3), (1, 2)]);
        assert_ne!(g.canonical_key(), key);
        g.apply_swap(&[(0, 3), (1, 2)], &[(0, 1), (2, 3)]);
        assert_eq!(g.canonical_key(), key);
    }

    #[test]
    #[should_panic(expected = "swap removes")]
    fn apply_swap_missing_edge_panics() {
        let mut g = ColoredMultigraph::build(&[0, 0, 0], &[(0, 1, 1)]).unwrap();
        g.apply_swap(&[(0, 1), (1, 2)], &[(0, 2), (1, 1)]);
    }

    #[test]
    fn canonical_round_trip() {
        let colors = [0, 1, 2, 1];
        let g = ColoredMultigraph::build(&colors, &[(0, 1, 2), (1, 2, 1), (2, 3, 3), (0, 0, 1)])
            .unwrap();
        let h = ColoredMultigraph::from_canonical(&colors, &g.canonical_key()).unwrap();
        assert_eq!(g.canonical_key(), h.canonical_key());
        assert_eq!(g.degrees(), h.degrees());
    }
}
