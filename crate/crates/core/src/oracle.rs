//! Exact small-instance ground truth: exhaustive ensemble enumeration,
//! exact sampler transition matrices, stationarity and connectivity
//! verification, and empirical end-state distribution tests.
//!
//! The matrix builder enumerates every color draw, ordered instance-pair
//! draw, and coin flip a sampler can make, transcribing the per-case
//! dispatch and proposal-ratio formulas on its own rather than calling into
//! the step engines. Agreement between the two paths is then a real check:
//! single-step engine frequencies are compared against matrix rows, and the
//! matrices themselves are checked for row-stochasticity and for fixing the
//! target distribution.

use std::collections::{BTreeMap, HashMap, VecDeque};

use thiserror::Error;

use crate::classify::enumerate_swaps_pair;
use crate::graph::{normalize, CanonicalKey, ColoredMultigraph, Pair};
use crate::samplers::{run_chain, ChainConfig, SamplerMode, TargetDistribution};

#[derive(Debug, Clone, Copy)]
pub struct EnsembleCaps {
    pub max_vertices: u32,
    pub max_instances: u64,
    pub max_members: usize,
}

impl Default for EnsembleCaps {
    fn default() -> Self {
        EnsembleCaps {
            max_vertices: 7,
            max_instances: 8,
            max_members: 100_000,
        }
    }
}

/// Which properties of the observed graph the enumerated ensemble holds
/// fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    /// Degree sequence and joint color matrix: the null set of the
    /// color-preserving samplers.
    DegreeAndJcm,
    /// Degree sequence only: the configuration-model state space.
    DegreeOnly,
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(
        "instance too large to enumerate: {vertices} vertices / {instances} instances \
         (caps: {max_vertices} / {max_instances})"
    )]
    CapsExceeded {
        vertices: u32,
        instances: u64,
        max_vertices: u32,
        max_instances: u64,
    },
    #[error("ensemble exceeds the member cap {cap}")]
    TooManyMembers { cap: usize },
    #[error("destination graph missing from catalog; enumeration or sampler is broken")]
    UnknownDestination,
    #[error("distribution length {dist} does not match member count {members}")]
    DimensionMismatch { dist: usize, members: usize },
    #[error("matrix for mode {0:?} requires a catalog with the matching constraint")]
    ConstraintMismatch(SamplerMode),
}

/// Exhaustive list of an ensemble's members with the swap-neighbor
/// relation between them.
#[derive(Debug, Clone)]
pub struct EnsembleCatalog {
    colors: Vec<u32>,
    pub members: Vec<CanonicalKey>,
    index: HashMap<CanonicalKey, usize>,
    /// Sorted, deduplicated moving-swap neighbors per member (preserving
    /// swaps for `DegreeAndJcm`, all swaps for `DegreeOnly`).
    pub adjacency: Vec<Vec<usize>>,
    pub observed_index: usize,
    pub constraint: ConstraintKind,
}

impl EnsembleCatalog {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn index_of(&self, key: &CanonicalKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn member_graph(&self, i: usize) -> ColoredMultigraph {
        ColoredMultigraph::from_canonical(&self.colors, &self.members[i])
            .expect("catalog keys are valid")
    }

    pub fn observed_graph(&self) -> ColoredMultigraph {
        self.member_graph(self.observed_index)
    }
}

struct Enumerator<'a> {
    pairs: Vec<Pair>,
    colors: &'a [u32],
    resid_degree: Vec<i64>,
    /// Remaining edge budget per normalized color pair; `None` when only
    /// degrees are constrained.
    budget: Option<HashMap<Pair, i64>>,
    resid_instances: i64,
    current: Vec<(Pair, u32)>,
    members: Vec<CanonicalKey>,
    cap: usize,
    overflow: bool,
}

impl Enumerator<'_> {
    fn color_pair(&self, p: Pair) -> Pair {
        normalize(self.colors[p.0 as usize], self.colors[p.1 as usize])
    }

    fn recurse(&mut self, idx: usize) {
        if self.overflow {
            return;
        }
        if idx == self.pairs.len() {
            if self.resid_instances == 0
                && self.resid_degree.iter().all(|&d| d == 0)
                && self
                    .budget
                    .as_ref()
                    .is_none_or(|b| b.values().all(|&v| v == 0))
            {
                if self.members.len() >= self.cap {
                    self.overflow = true;
                    return;
                }
                let mut key: CanonicalKey = self
                    .current
                    .iter()
                    .filter(|&&(_, m)| m > 0)
                    .map(|&((u, w), m)| (u, w, m))
                    .collect();
                key.sort_unstable();
                self.members.push(key);
            }
            return;
        }
        let (u, w) = self.pairs[idx];
        let is_loop = u == w;
        let degree_cap = if is_loop {
            self.resid_degree[u as usize] / 2
        } else {
            self.resid_degree[u as usize].min(self.resid_degree[w as usize])
        };
        let cp = self.color_pair((u, w));
        let budget_cap = self
            .budget
            .as_ref()
            .map_or(i64::MAX, |b| b.get(&cp).copied().unwrap_or(0));
        let max_mult = degree_cap.min(budget_cap).min(self.resid_instances).max(0);
        let n = self.resid_degree.len() as u32;
        for mult in 0..=max_mult {
            if is_loop {
                self.resid_degree[u as usize] -= 2 * mult;
            } else {
                self.resid_degree[u as usize] -= mult;
                self.resid_degree[w as usize] -= mult;
            }
            if let Some(b) = self.budget.as_mut() {
                *b.get_mut(&cp).expect("budget covers color pair") -= mult;
            }
            self.resid_instances -= mult;
            self.current.push(((u, w), mult as u32));

            // Row-closure pruning: once the last pair touching u has been
            // decided, u's residual degree must already be zero; before
            // that, it cannot exceed what the remaining partners can absorb.
            let feasible = if w == n - 1 {
                self.resid_degree[u as usize] == 0
            } else {
                let remaining: i64 = (w + 1..n)
                    .map(|y| self.resid_degree[y as usize])
                    .sum::<i64>()
                    + if is_loop { self.resid_degree[u as usize] } else { 0 };
                self.resid_degree[u as usize] <= remaining
            };
            if feasible {
                self.recurse(idx + 1);
            }

            self.current.pop();
            self.resid_instances += mult;
            if let Some(b) = self.budget.as_mut() {
                *b.get_mut(&cp).expect("budget covers color pair") += mult;
            }
            if is_loop {
                self.resid_degree[u as usize] += 2 * mult;
            } else {
                self.resid_degree[u as usize] += mult;
                self.resid_degree[w as usize] += mult;
            }
        }
    }
}

/// Enumerates every edge multiset over the observed vertices that satisfies
/// the constraint, by backtracking over vertex pairs with degree-feasibility
/// pruning. Complete and duplicate free.
pub fn enumerate_ensemble(
    observed: &ColoredMultigraph,
    caps: EnsembleCaps,
    constraint: ConstraintKind,
) -> Result<EnsembleCatalog, OracleError> {
    let n = observed.vertex_count();
    let m = observed.instance_total();
    if n > caps.max_vertices || m > caps.max_instances {
        return Err(OracleError::CapsExceeded {
            vertices: n,
            instances: m,
            max_vertices: caps.max_vertices,
            max_instances: caps.max_instances,
        });
    }
    let mut pairs = Vec::new();
    for u in 0..n {
        for w in u..n {
            pairs.push((u, w));
        }
    }
    let budget = match constraint {
        ConstraintKind::DegreeOnly => None,
        ConstraintKind::DegreeAndJcm => {
            let j = crate::graph::jcm(observed);
            let mut b = HashMap::new();
            for l in 0..observed.color_count() {
                for r in l..observed.color_count() {
                    b.insert((l, r), j.get(l, r) as i64);
                }
            }
            Some(b)
        }
    };
    let mut en = Enumerator {
        pairs,
        colors: observed.colors(),
        resid_degree: observed.degrees().iter().map(|&d| i64::from(d)).collect(),
        budget,
        resid_instances: m as i64,
        current: Vec::new(),
        members: Vec::new(),
        cap: caps.max_members,
        overflow: false,
    };
    en.recurse(0);
    if en.overflow {
        return Err(OracleError::TooManyMembers {
            cap: caps.max_members,
        });
    }
    let mut members = en.members;
    members.sort_unstable();
    let index: HashMap<CanonicalKey, usize> = members
        .iter()
        .enumerate()
        .map(|(i, k)| (k.clone(), i))
        .collect();
    let observed_index = *index
        .get(&observed.canonical_key())
        .expect("observed graph satisfies its own constraints");
    let mut catalog = EnsembleCatalog {
        colors: observed.colors().to_vec(),
        members,
        index,
        adjacency: Vec::new(),
        observed_index,
        constraint,
    };
    catalog.adjacency = build_adjacency(&catalog)?;
    Ok(catalog)
}

/// Moving-swap neighbor relation over catalog members, built through the
/// classification module (a separate path from the matrix dispatch below).
fn build_adjacency(catalog: &EnsembleCatalog) -> Result<Vec<Vec<usize>>, OracleError> {
    let preserving_only = catalog.constraint == ConstraintKind::DegreeAndJcm;
    let mut adjacency = Vec::with_capacity(catalog.len());
    for i in 0..catalog.len() {
        let g = catalog.member_graph(i);
        let edges: Vec<(Pair, u32)> = g.class_multiedges(crate::graph::ClassKind::All);
        let mut nbrs = Vec::new();
        for (a, &(e1, m1)) in edges.iter().enumerate() {
            for &(e2, _) in &edges[a..] {
                if e1 == e2 && m1 < 2 {
                    continue;
                }
                for p in enumerate_swaps_pair(&g, e1, e2) {
                    if p.is_noop || (preserving_only && !p.is_jdes) {
                        continue;
                    }
                    let key = destination_key(&g, &p.removed, &p.inserted);
                    let j = catalog
                        .index_of(&key)
                        .ok_or(OracleError::UnknownDestination)?;
                    nbrs.push(j);
                }
            }
        }
        nbrs.sort_unstable();
        nbrs.dedup();
        adjacency.push(nbrs);
    }
    Ok(adjacency)
}

/// Canonical key of the graph obtained by one swap, without mutating `g`.
fn destination_key(g: &ColoredMultigraph, removed: &[Pair; 2], inserted: &[Pair; 2]) -> CanonicalKey {
    let mut counts: BTreeMap<Pair, i64> = g
        .multiedges()
        .map(|(p, m)| (p, i64::from(m)))
        .collect();
    for &r in removed {
        *counts.get_mut(&r).expect("removed pair present") -= 1;
    }
    for &i in inserted {
        *counts.entry(i).or_insert(0) += 1;
    }
    counts
        .into_iter()
        .filter(|&(_, m)| m > 0)
        .map(|((u, w), m)| (u, w, m as u32))
        .collect()
}

/// Slow reference enumerator: walks every multiset of `|E|` pairs and keeps
/// the ones matching the observed constraints. For cross-checking the
/// pruned enumerator on instances with few instances.
pub fn naive_enumerate(observed: &ColoredMultigraph, constraint: ConstraintKind) -> Vec<CanonicalKey> {
    let n = observed.vertex_count();
    let mut pairs = Vec::new();
    for u in 0..n {
        for w in u..n {
            pairs.push((u, w));
        }
    }
    let m = observed.instance_total() as usize;
    let want_degrees: Vec<i64> = observed.degrees().iter().map(|&d| i64::from(d)).collect();
    let want_jcm = crate::graph::jcm(observed);
    let mut chosen: Vec<usize> = Vec::with_capacity(m);
    let mut found = Vec::new();
    fn rec(
        pairs: &[Pair],
        start: usize,
        left: usize,
        chosen: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if left == 0 {
            out.push(chosen.clone());
            return;
        }
        for i in start..pairs.len() {
            chosen.push(i);
            rec(pairs, i, left - 1, chosen, out);
            chosen.pop();
        }
    }
    let mut all = Vec::new();
    rec(&pairs, 0, m, &mut chosen, &mut all);
    'outer: for multiset in all {
        let mut degrees = vec![0i64; n as usize];
        for &i in &multiset {
            let (u, w) = pairs[i];
            if u == w {
                degrees[u as usize] += 2;
            } else {
                degrees[u as usize] += 1;
                degrees[w as usize] += 1;
            }
        }
        if degrees != want_degrees {
            continue;
        }
        if constraint == ConstraintKind::DegreeAndJcm {
            let k = observed.color_count() as usize;
            let mut counts = vec![0u64; k * k];
            for &i in &multiset {
                let (u, w) = pairs[i];
                let (a, b) = (
                    observed.color_of(u) as usize,
                    observed.color_of(w) as usize,
                );
                counts[a.min(b) * k + a.max(b)] += 1;
            }
            for l in 0..k as u32 {
                for r in l..k as u32 {
                    if counts[l as usize * k + r as usize] != want_jcm.get(l, r) {
                        continue 'outer;
                    }
                }
            }
        }
        let mut key: BTreeMap<Pair, u32> = BTreeMap::new();
        for &i in &multiset {
            *key.entry(pairs[i]).or_insert(0) += 1;
        }
        found.push(
            key.into_iter()
                .map(|((u, w), mult)| (u, w, mult))
                .collect::<CanonicalKey>(),
        );
    }
    found.sort_unstable();
    found.dedup();
    found
}

// ---------------------------------------------------------------------------
// Exact transition matrices.
//
// Everything below re-derives the samplers' behavior from the published
// dispatch rules, independent of the engine code paths.
// ---------------------------------------------------------------------------

#[inline]
fn mult_of(g: &ColoredMultigraph, p: Pair) -> f64 {
    f64::from(g.multiplicity(p.0, p.1))
}

#[inline]
fn distinct_vertices(a: Pair, b: Pair) -> u8 {
    let mut vs = [a.0, a.1, b.0, b.1];
    vs.sort_unstable();
    let mut k = 1;
    for i in 1..4 {
        if vs[i] != vs[i - 1] {
            k += 1;
        }
    }
    k
}

#[inline]
fn distinct_colors_of(g: &ColoredMultigraph, a: Pair, b: Pair) -> u8 {
    let mut cs = [
        g.color_of(a.0),
        g.color_of(a.1),
        g.color_of(b.0),
        g.color_of(b.1),
    ];
    cs.sort_unstable();
    let mut k = 1;
    for i in 1..4 {
        if cs[i] != cs[i - 1] {
            k += 1;
        }
    }
    k
}

/// Sorted color pairs of a two-pair multiset; two multisets with equal
/// values leave the joint color matrix unchanged when swapped.
#[inline]
fn color_signature(g: &ColoredMultigraph, pairs: [Pair; 2]) -> [(u32, u32); 2] {
    let mut sig = [(0, 0); 2];
    for (i, p) in pairs.iter().enumerate() {
        sig[i] = normalize(g.color_of(p.0), g.color_of(p.1));
    }
    sig.sort_unstable();
    sig
}

/// One possible move of the color-aware dispatch for a drawn pair.
enum ColorAwareMove {
    Stay,
    Unique([Pair; 2], f64),
    Coin([([Pair; 2], f64); 2]),
}

#[inline]
fn pair_multiset(a: Pair, b: Pair) -> [Pair; 2] {
    if a <= b {
        [a, b]
    } else {
        [b, a]
    }
}

/// Class size of a color, computed from the raw multiset.
fn class_size(g: &ColoredMultigraph, color: u32) -> u64 {
    let mut s = 0u64;
    for ((u, w), m) in g.multiedges() {
        if g.color_of(u) == color || g.color_of(w) == color {
            s += u64::from(m);
        }
    }
    s
}

/// Transcription of the color-aware per-case dispatch: which moving swap
/// (if any) the sampler selects for a drawn pair, and its proposal ratio.
fn color_aware_move(g: &ColoredMultigraph, e: Pair, f: Pair) -> ColorAwareMove {
    let k = distinct_vertices(e, f);
    let e_loop = e.0 == e.1;
    let f_loop = f.0 == f.1;
    match k {
        1 => ColorAwareMove::Stay,
        2 => {
            if e_loop && f_loop {
                let ins = normalize(e.0, f.0);
                let m_ins = mult_of(g, ins);
                let rho = (m_ins + 2.0) * (m_ins + 1.0) / (2.0 * mult_of(g, e) * mult_of(g, f));
                ColorAwareMove::Unique([ins, ins], rho)
            } else if !e_loop && !f_loop {
                debug_assert_eq!(e, f);
                if g.color_of(e.0) == g.color_of(e.1) {
                    let (lu, lw) = ((e.0, e.0), (e.1, e.1));
                    let m = mult_of(g, e);
                    let rho =
                        2.0 * (mult_of(g, lu) + 1.0) * (mult_of(g, lw) + 1.0) / (m * (m - 1.0));
                    ColorAwareMove::Unique(pair_multiset(lu, lw), rho)
                } else {
                    ColorAwareMove::Stay
                }
            } else {
                ColorAwareMove::Stay
            }
        }
        3 => {
            if e_loop || f_loop {
                let (s, other) = if e_loop { (e.0, f) } else { (f.0, e) };
                let i0 = normalize(s, other.0);
                let i1 = normalize(s, other.1);
                let loop_pair = if e_loop { e } else { f };
                let edge_pair = if e_loop { f } else { e };
                let rho = (mult_of(g, i0) + 1.0) * (mult_of(g, i1) + 1.0)
                    / (mult_of(g, loop_pair) * mult_of(g, edge_pair));
                ColorAwareMove::Unique(pair_multiset(i0, i1), rho)
            } else {
                let (center, x, y) = if e.0 == f.0 {
                    (e.0, e.1, f.1)
                } else if e.0 == f.1 {
                    (e.0, e.1, f.0)
                } else if e.1 == f.0 {
                    (e.1, e.0, f.1)
                } else {
                    (e.1, e.0, f.0)
                };
                let nl = distinct_colors_of(g, e, f);
                let e_mono = g.color_of(e.0) == g.color_of(e.1);
                let f_mono = g.color_of(f.0) == g.color_of(f.1);
                if nl == 1 || (nl == 2 && (e_mono || f_mono)) {
                    let i0 = (center, center);
                    let i1 = normalize(x, y);
                    let rho = (mult_of(g, i0) + 1.0) * (mult_of(g, i1) + 1.0)
                        / (mult_of(g, e) * mult_of(g, f));
                    ColorAwareMove::Unique(pair_multiset(i0, i1), rho)
                } else {
                    ColorAwareMove::Stay
                }
            }
        }
        _ => {
            let e_bichrome = g.color_of(e.0) != g.color_of(e.1);
            let f_bichrome = g.color_of(f.0) != g.color_of(f.1);
            let nl = distinct_colors_of(g, e, f);
            if e_bichrome && f_bichrome {
                // Join each endpoint of a shared color with the other
                // edge's endpoint of the other color.
                let mut shared = u32::MAX;
                for c in [g.color_of(e.0), g.color_of(e.1)] {
                    if (c == g.color_of(f.0) || c == g.color_of(f.1)) && c < shared {
                        shared = c;
                    }
                }
                let (a, ao) = if g.color_of(e.0) == shared {
                    (e.0, e.1)
                } else {
                    (e.1, e.0)
                };
                let (b, bo) = if g.color_of(f.0) == shared {
                    (f.0, f.1)
                } else {
                    (f.1, f.0)
                };
                let i0 = normalize(a, bo);
                let i1 = normalize(b, ao);
                let base_num = (mult_of(g, i0) + 1.0) * (mult_of(g, i1) + 1.0);
                let base_den = mult_of(g, e) * mult_of(g, f);
                let rho = if nl == 3 {
                    base_num / base_den
                } else {
                    // Both pairs bichrome over the same two colors: the
                    // quotient of two-term sums over the class sizes.
                    let sa = class_size(g, g.color_of(e.0)) as f64;
                    let sb = class_size(g, g.color_of(e.1)) as f64;
                    let inv_a = 1.0 / (sa * (sa - 1.0));
                    let inv_b = 1.0 / (sb * (sb - 1.0));
                    (base_num * inv_a + base_num * inv_b) / (base_den * inv_a + base_den * inv_b)
                };
                ColorAwareMove::Unique(pair_multiset(i0, i1), rho)
            } else {
                let removed = pair_multiset(e, f);
                let (p, q) = (removed[0], removed[1]);
                let d1 = pair_multiset(normalize(p.0, q.1), normalize(p.1, q.0));
                let d2 = pair_multiset(normalize(p.0, q.0), normalize(p.1, q.1));
                let rho1 = (mult_of(g, d1[0]) + 1.0) * (mult_of(g, d1[1]) + 1.0)
                    / (mult_of(g, e) * mult_of(g, f));
                let rho2 = (mult_of(g, d2[0]) + 1.0) * (mult_of(g, d2[1]) + 1.0)
                    / (mult_of(g, e) * mult_of(g, f));
                ColorAwareMove::Coin([(d1, rho1), (d2, rho2)])
            }
        }
    }
}

/// Proposal ratio of the color-agnostic engines for a moving swap,
/// transcribed from the published dispatch (four-vertex, three-vertex with
/// and without a self-loop, loop pair, copy pair).
fn color_agnostic_rho(g: &ColoredMultigraph, removed: [Pair; 2], inserted: [Pair; 2]) -> f64 {
    let [r0, r1] = removed;
    let [i0, i1] = inserted;
    let (m_r0, m_r1) = (mult_of(g, r0), mult_of(g, r1));
    let (m_i0, m_i1) = (mult_of(g, i0), mult_of(g, i1));
    match distinct_vertices(r0, r1) {
        4 => (m_i0 + 1.0) * (m_i1 + 1.0) / (m_r0 * m_r1),
        3 => {
            if r0.0 == r0.1 || r1.0 == r1.1 {
                (m_i0 + 1.0) * (m_i1 + 1.0) / (2.0 * m_r0 * m_r1)
            } else {
                2.0 * (m_i0 + 1.0) * (m_i1 + 1.0) / (m_r0 * m_r1)
            }
        }
        2 => {
            if r0.0 == r0.1 && r1.0 == r1.1 {
                (m_i0 + 2.0) * (m_i0 + 1.0) / (4.0 * m_r0 * m_r1)
            } else {
                4.0 * (m_i0 + 1.0) * (m_i1 + 1.0) / (m_r0 * (m_r0 - 1.0))
            }
        }
        _ => unreachable!("moving swap on a copies-of-self-loop pair"),
    }
}

/// Builds the exact one-step transition matrix of a sampler over the
/// catalog, for a target distribution given as a probability vector over
/// members. Rows sum to one.
pub fn transition_matrix(
    catalog: &EnsembleCatalog,
    mode: SamplerMode,
    target: &[f64],
) -> Result<Vec<Vec<f64>>, OracleError> {
    if target.len() != catalog.len() {
        return Err(OracleError::DimensionMismatch {
            dist: target.len(),
            members: catalog.len(),
        });
    }
    match (mode, catalog.constraint) {
        (SamplerMode::PolarisB | SamplerMode::PolarisC, ConstraintKind::DegreeAndJcm) => {}
        (SamplerMode::Cm, ConstraintKind::DegreeOnly) => {}
        _ => return Err(OracleError::ConstraintMismatch(mode)),
    }
    let z = catalog.len();
    let mut matrix = vec![vec![0.0f64; z]; z];
    for (i, row) in matrix.iter_mut().enumerate() {
        let g = catalog.member_graph(i);
        match mode {
            SamplerMode::PolarisC => {
                color_aware_row(catalog, &g, i, target, row)?;
            }
            SamplerMode::PolarisB => {
                color_agnostic_row(catalog, &g, i, target, true, row)?;
            }
            SamplerMode::Cm => {
                color_agnostic_row(catalog, &g, i, target, false, row)?;
            }
        }
    }
    Ok(matrix)
}

fn accept_probability(rho: f64, target: &[f64], i: usize, j: usize) -> f64 {
    (rho * target[j] / target[i]).min(1.0)
}

fn color_aware_row(
    catalog: &EnsembleCatalog,
    g: &ColoredMultigraph,
    i: usize,
    target: &[f64],
    row: &mut [f64],
) -> Result<(), OracleError> {
    let color_count = g.color_count();
    let p_color = 1.0 / f64::from(color_count);
    for color in 0..color_count {
        // Multiedges with at least one endpoint of this color, off the raw
        // multiset.
        let class: Vec<(Pair, u32)> = g
            .multiedges_sorted()
            .into_iter()
            .filter(|&((u, w), _)| g.color_of(u) == color || g.color_of(w) == color)
            .collect();
        let size: u64 = class.iter().map(|&(_, m)| u64::from(m)).sum();
        if size < 2 {
            row[i] += p_color;
            continue;
        }
        let denom = (size * (size - 1)) as f64;
        for (a, &(e, me)) in class.iter().enumerate() {
            for &(f, mf) in &class[a..] {
                let p_pair = if e == f {
                    if me < 2 {
                        continue;
                    }
                    p_color * (u64::from(me) * u64::from(me - 1)) as f64 / denom
                } else {
                    p_color * 2.0 * (u64::from(me) * u64::from(mf)) as f64 / denom
                };
                match color_aware_move(g, e, f) {
                    ColorAwareMove::Stay => row[i] += p_pair,
                    ColorAwareMove::Unique(inserted, rho) => {
                        let removed = pair_multiset(e, f);
                        debug_assert_eq!(
                            color_signature(g, removed),
                            color_signature(g, inserted)
                        );
                        let key = destination_key(g, &removed, &inserted);
                        let j = catalog
                            .index_of(&key)
                            .ok_or(OracleError::UnknownDestination)?;
                        let acc = accept_probability(rho, target, i, j);
                        row[j] += p_pair * acc;
                        row[i] += p_pair * (1.0 - acc);
                    }
                    ColorAwareMove::Coin(arms) => {
                        let removed = pair_multiset(e, f);
                        for (inserted, rho) in arms {
                            let key = destination_key(g, &removed, &inserted);
                            let j = catalog
                                .index_of(&key)
                                .ok_or(OracleError::UnknownDestination)?;
                            let acc = accept_probability(rho, target, i, j);
                            row[j] += 0.5 * p_pair * acc;
                            row[i] += 0.5 * p_pair * (1.0 - acc);
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn color_agnostic_row(
    catalog: &EnsembleCatalog,
    g: &ColoredMultigraph,
    i: usize,
    target: &[f64],
    check_preservation: bool,
    row: &mut [f64],
) -> Result<(), OracleError> {
    let edges: Vec<(Pair, u32)> = g.multiedges_sorted();
    let size = g.instance_total();
    debug_assert!(size >= 2);
    let denom = (size * (size - 1)) as f64;
    for (a, &(e, me)) in edges.iter().enumerate() {
        for &(f, mf) in &edges[a..] {
            let p_pair = if e == f {
                if me < 2 {
                    continue;
                }
                (u64::from(me) * u64::from(me - 1)) as f64 / denom
            } else {
                2.0 * (u64::from(me) * u64::from(mf)) as f64 / denom
            };
            let removed = pair_multiset(e, f);
            let (p, q) = (removed[0], removed[1]);
            let dests = [
                pair_multiset(normalize(p.0, q.1), normalize(p.1, q.0)),
                pair_multiset(normalize(p.0, q.0), normalize(p.1, q.1)),
            ];
            for inserted in dests {
                let p_branch = 0.5 * p_pair;
                let preserving = color_signature(g, removed) == color_signature(g, inserted);
                if check_preservation && !preserving {
                    row[i] += p_branch; // out of space: reject and stay
                    continue;
                }
                if inserted == removed {
                    row[i] += p_branch; // no-op
                    continue;
                }
                let rho = color_agnostic_rho(g, removed, inserted);
                let key = destination_key(g, &removed, &inserted);
                let j = catalog
                    .index_of(&key)
                    .ok_or(OracleError::UnknownDestination)?;
                let acc = accept_probability(rho, target, i, j);
                row[j] += p_branch * acc;
                row[i] += p_branch * (1.0 - acc);
            }
        }
    }
    Ok(())
}

/// Max-norm of `dist * matrix - dist`.
pub fn stationarity_residual(matrix: &[Vec<f64>], dist: &[f64]) -> Result<f64, OracleError> {
    let z = matrix.len();
    if dist.len() != z {
        return Err(OracleError::DimensionMismatch {
            dist: dist.len(),
            members: z,
        });
    }
    let mut residual = 0.0f64;
    for j in 0..z {
        let mut next = 0.0;
        for i in 0..z {
            next += dist[i] * matrix[i][j];
        }
        residual = residual.max((next - dist[j]).abs());
    }
    Ok(residual)
}

/// Largest deviation of any row sum from one.
pub fn row_sum_error(matrix: &[Vec<f64>]) -> f64 {
    matrix
        .iter()
        .map(|row| (row.iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConnectivityReport {
    pub strongly_connected: bool,
    /// Largest swap distance from the observed member to any reached
    /// member.
    pub diameter: u32,
}

/// Breadth-first search over the swap adjacency from the observed member.
/// Swaps are reversible, so reachability decides strong connectivity.
pub fn connectivity_report(catalog: &EnsembleCatalog) -> ConnectivityReport {
    let z = catalog.len();
    let mut dist = vec![u32::MAX; z];
    let mut queue = VecDeque::new();
    dist[catalog.observed_index] = 0;
    queue.push_back(catalog.observed_index);
    let mut reached = 1usize;
    let mut diameter = 0u32;
    while let Some(v) = queue.pop_front() {
        for &w in &catalog.adjacency[v] {
            if dist[w] == u32::MAX {
                dist[w] = dist[v] + 1;
                diameter = diameter.max(dist[w]);
                reached += 1;
                queue.push_back(w);
            }
        }
    }
    ConnectivityReport {
        strongly_connected: reached == z,
        diameter,
    }
}

/// Aperiodicity of an irreducible chain given its transition matrix: a
/// positive diagonal entry suffices; otherwise the gcd of cycle lengths in
/// the support graph must be one.
pub fn matrix_is_aperiodic(matrix: &[Vec<f64>]) -> bool {
    let z = matrix.len();
    if (0..z).any(|i| matrix[i][i] > 1e-15) {
        return true;
    }
    if z == 0 {
        return true;
    }
    // BFS levels; the period divides every (level[u] + 1 - level[v]) over
    // support edges u -> v.
    let mut level = vec![i64::MIN; z];
    let mut queue = VecDeque::new();
    level[0] = 0;
    queue.push_back(0usize);
    let mut order = vec![0usize];
    while let Some(u) = queue.pop_front() {
        for v in 0..z {
            if matrix[u][v] > 1e-15 && level[v] == i64::MIN {
                level[v] = level[u] + 1;
                queue.push_back(v);
                order.push(v);
            }
        }
    }
    let mut g: i64 = 0;
    for u in 0..z {
        if level[u] == i64::MIN {
            continue;
        }
        for v in 0..z {
            if matrix[u][v] > 1e-15 && level[v] != i64::MIN {
                g = gcd(g, (level[u] + 1 - level[v]).abs());
            }
        }
    }
    g == 1
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Runs independent chains from the observed member and returns the total
/// variation distance between the empirical end-state distribution and the
/// target vector. Replicates run in parallel; results are deterministic in
/// the seed because each replicate owns stream `seed, replicate`.
pub fn empirical_tv(
    catalog: &EnsembleCatalog,
    mode: SamplerMode,
    target: &(dyn TargetDistribution + Sync),
    target_dist: &[f64],
    steps: u64,
    replicates: u64,
    seed: u64,
) -> Result<f64, OracleError> {
    if target_dist.len() != catalog.len() {
        return Err(OracleError::DimensionMismatch {
            dist: target_dist.len(),
            members: catalog.len(),
        });
    }
    let observed = catalog.observed_graph();
    let threads = std::thread::available_parallelism()
        .map(|p| p.get() as u64)
        .unwrap_or(4)
        .min(replicates.max(1));
    let mut counts = vec![0u64; catalog.len()];
    let chunk = replicates.div_ceil(threads);
    let results: Vec<Result<Vec<u64>, OracleError>> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for t in 0..threads {
            let lo = t * chunk;
            let hi = ((t + 1) * chunk).min(replicates);
            let observed = &observed;
            let catalog_ref = &*catalog;
            handles.push(scope.spawn(move || {
                let mut local = vec![0u64; catalog_ref.len()];
                for r in lo..hi {
                    let mut g = observed.clone();
                    let config = ChainConfig {
                        stream: r,
                        record_every: u64::MAX,
                        ..ChainConfig::new(mode, steps, seed)
                    };
                    run_chain(&mut g, &config, target, None).expect("chain preconditions hold");
                    let j = catalog_ref
                        .index_of(&g.canonical_key())
                        .ok_or(OracleError::UnknownDestination)?;
                    local[j] += 1;
                }
                Ok(local)
            }));
        }
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    for res in results {
        let local = res?;
        for (c, l) in counts.iter_mut().zip(local) {
            *c += l;
        }
    }
    let total = replicates as f64;
    let tv = 0.5
        * counts
            .iter()
            .zip(target_dist)
            .map(|(&c, &p)| (c as f64 / total - p).abs())
            .sum::<f64>();
    Ok(tv)
}

/// Single-step destination frequencies of an engine from a fixed state,
/// mapped onto catalog indices. Used to compare the engines against the
/// matrix row of that state.
pub fn single_step_frequencies(
    catalog: &EnsembleCatalog,
    mode: SamplerMode,
    target: &dyn TargetDistribution,
    state: usize,
    steps: u64,
    seed: u64,
) -> Result<Vec<f64>, OracleError> {
    use crate::samplers::{cm_step, polaris_b_step, polaris_c_step};
    let base = catalog.member_graph(state);
    let mut rng = crate::samplers::chain_rng(seed, 0);
    let mut counts = vec![0u64; catalog.len()];
    for _ in 0..steps {
        let mut g = base.clone();
        match mode {
            SamplerMode::PolarisB => {
                polaris_b_step(&mut g, target, &mut rng, false);
            }
            SamplerMode::PolarisC => {
                polaris_c_step(&mut g, target, &mut rng);
            }
            SamplerMode::Cm => {
                cm_step(&mut g, target, &mut rng);
            }
        }
        let j = catalog
            .index_of(&g.canonical_key())
            .ok_or(OracleError::UnknownDestination)?;
        counts[j] += 1;
    }
    Ok(counts.iter().map(|&c| c as f64 / steps as f64).collect())
}

/// Uniform probability vector over the catalog.
pub fn uniform_dist(catalog: &EnsembleCatalog) -> Vec<f64> {
    vec![1.0 / catalog.len() as f64; catalog.len()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ClassKind;
    use crate::samplers::UniformTarget;

    fn g(colors: &[u32], edges: &[(u32, u32, u32)]) -> ColoredMultigraph {
        ColoredMultigraph::build(colors, edges).unwrap()
    }

    fn jcm_catalog(observed: &ColoredMultigraph) -> EnsembleCatalog {
        enumerate_ensemble(observed, EnsembleCaps::default(), ConstraintKind::DegreeAndJcm)
            .unwrap()
    }

    #[test]
    fn single_double_edge_has_singleton_ensemble() {
        let cat = jcm_catalog(&g(&[0, 1], &[(0, 1, 2)]));
        assert_eq!(cat.len(), 1);
        let m = transition_matrix(&cat, SamplerMode::PolarisB, &uniform_dist(&cat)).unwrap();
        assert_eq!(m, vec![vec![1.0]]);
    }

    #[test]
    fn path_ensemble_has_loop_variant() {
        // Path a-b-c, one color: the only other member replaces the path by
        // a self-loop on the middle vertex plus the extreme edge.
        let observed = g(&[0, 0, 0], &[(0, 1, 1), (1, 2, 1)]);
        let cat = jcm_catalog(&observed);
        assert_eq!(cat.len(), 2);
        let variant = g(&[0, 0, 0], &[(1, 1, 1), (0, 2, 1)]);
        assert!(cat.index_of(&variant.canonical_key()).is_some());
    }

    #[test]
    fn triangle_two_colors_has_three_members() {
        let cat = jcm_catalog(&g(&[0, 0, 1], &[(0, 1, 1), (0, 2, 1), (1, 2, 1)]));
        assert_eq!(cat.len(), 3);
        let rep = connectivity_report(&cat);
        assert!(rep.strongly_connected);
        assert!(rep.diameter >= 1);
    }

    #[test]
    fn loop_pair_ensemble_balances_exactly() {
        // Two same-color unit loops vs one double edge: the corrected
        // coincident-pair ratios must make uniform exactly stationary for
        // the color-aware sampler.
        let cat = jcm_catalog(&g(&[0, 0], &[(0, 0, 1), (1, 1, 1)]));
        assert_eq!(cat.len(), 2);
        let pi = uniform_dist(&cat);
        for mode in [SamplerMode::PolarisB, SamplerMode::PolarisC] {
            let m = transition_matrix(&cat, mode, &pi).unwrap();
            assert!(row_sum_error(&m) < 1e-12, "{mode:?}: {m:?}");
            let res = stationarity_residual(&m, &pi).unwrap();
            assert!(res < 1e-12, "{mode:?}: residual {res}, {m:?}");
        }
    }

    #[test]
    fn naive_and_pruned_enumerators_agree() {
        let instances = [
            g(&[0, 0, 1], &[(0, 1, 1), (0, 2, 1), (1, 2, 1)]),
            g(&[0, 0, 0], &[(0, 1, 1), (1, 2, 1)]),
            g(&[0, 1, 0, 1], &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 1)]),
            g(&[0, 0, 0, 0], &[(0, 1, 1), (0, 2, 2), (0, 3, 1), (2, 3, 1)]),
            g(&[0, 0], &[(0, 1, 3)]),
        ];
        for observed in &instances {
            for constraint in [ConstraintKind::DegreeAndJcm, ConstraintKind::DegreeOnly] {
                let fast = enumerate_ensemble(observed, EnsembleCaps::default(), constraint)
                    .unwrap()
                    .members;
                let slow = naive_enumerate(observed, constraint);
                assert_eq!(fast, slow, "constraint {constraint:?}");
            }
        }
    }

    #[test]
    fn adjacency_is_symmetric_and_carries_matrix_support() {
        let observed = g(&[0, 0, 1, 1], &[(0, 1, 1), (2, 3, 1), (0, 2, 1), (1, 3, 1)]);
        let cat = jcm_catalog(&observed);
        for (i, nbrs) in cat.adjacency.iter().enumerate() {
            for &j in nbrs {
                assert!(cat.adjacency[j].contains(&i), "asymmetric {i}<->{j}");
            }
        }
        let pi = uniform_dist(&cat);
        for mode in [SamplerMode::PolarisB, SamplerMode::PolarisC] {
            let m = transition_matrix(&cat, mode, &pi).unwrap();
            for (i, row) in m.iter().enumerate() {
                for (j, &p) in row.iter().enumerate() {
                    if i != j && p > 0.0 {
                        assert!(cat.adjacency[i].contains(&j), "{mode:?} {i}->{j}");
                    }
                }
            }
        }
    }

    #[test]
    fn caps_are_enforced() {
        let observed = g(&[0; 10], &[(0, 1, 1), (2, 3, 1)]);
        let err = enumerate_ensemble(
            &observed,
            EnsembleCaps::default(),
            ConstraintKind::DegreeAndJcm,
        )
        .unwrap_err();
        assert!(matches!(err, OracleError::CapsExceeded { vertices: 10, .. }));
    }

    #[test]
    fn cm_matrix_needs_degree_only_catalog() {
        let observed = g(&[0, 0, 1], &[(0, 1, 1), (0, 2, 1), (1, 2, 1)]);
        let cat = jcm_catalog(&observed);
        assert!(matches!(
            transition_matrix(&cat, SamplerMode::Cm, &uniform_dist(&cat)),
            Err(OracleError::ConstraintMismatch(SamplerMode::Cm))
        ));
        let deg = enumerate_ensemble(&observed, EnsembleCaps::default(), ConstraintKind::DegreeOnly)
            .unwrap();
        let pi = uniform_dist(&deg);
        let m = transition_matrix(&deg, SamplerMode::Cm, &pi).unwrap();
        assert!(row_sum_error(&m) < 1e-12);
        assert!(stationarity_residual(&m, &pi).unwrap() < 1e-12);
    }

    #[test]
    fn stationarity_residual_trivial_cases() {
        let identity = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(
            stationarity_residual(&identity, &[0.3, 0.7]).unwrap(),
            0.0
        );
        let doubly = vec![vec![0.25, 0.75], vec![0.75, 0.25]];
        assert!(stationarity_residual(&doubly, &[0.5, 0.5]).unwrap() < 1e-15);
        assert!(stationarity_residual(&doubly, &[0.5]).is_err());
    }

    #[test]
    fn empirical_tv_singleton_is_zero() {
        let cat = jcm_catalog(&g(&[0, 1], &[(0, 1, 2)]));
        let tv = empirical_tv(
            &cat,
            SamplerMode::PolarisC,
            &UniformTarget,
            &uniform_dist(&cat),
            50,
            20,
            9,
        )
        .unwrap();
        assert_eq!(tv, 0.0);
    }

    #[test]
    fn matrix_matches_engine_row_on_small_instance() {
        let observed = g(&[0, 0, 1], &[(0, 1, 1), (0, 2, 1), (1, 2, 1)]);
        let cat = jcm_catalog(&observed);
        let pi = uniform_dist(&cat);
        for mode in [SamplerMode::PolarisB, SamplerMode::PolarisC] {
            let matrix = transition_matrix(&cat, mode, &pi).unwrap();
            let freq =
                single_step_frequencies(&cat, mode, &UniformTarget, cat.observed_index, 200_000, 3)
                    .unwrap();
            for j in 0..cat.len() {
                let p = matrix[cat.observed_index][j];
                let se = (p * (1.0 - p) / 200_000.0).sqrt();
                assert!(
                    (freq[j] - p).abs() <= 3.0 * se + 1e-9,
                    "{mode:?} entry {j}: emp {} vs exact {p}",
                    freq[j]
                );
            }
        }
    }

    #[test]
    fn class_size_helper_matches_cache() {
        let gr = g(&[0, 1, 0, 2], &[(0, 1, 2), (2, 3, 1), (0, 0, 1), (1, 2, 1)]);
        for c in 0..gr.color_count() {
            assert_eq!(
                class_size(&gr, c),
                gr.class_len(ClassKind::Color(c)) as u64
            );
        }
    }
}
