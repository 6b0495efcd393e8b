//! Step engines for the three chains and the chain runner.
//!
//! * `polaris_b_step`: color-agnostic pair draw over all edge instances,
//!   fair coin over the two swap expressions, swap rejected outright when it
//!   does not preserve the joint color matrix.
//! * `polaris_c_step`: color-aware draw from one color class; every sampled
//!   pair admits a preserving swap, no-op-capable cases always resolve to
//!   the moving swap, equivalent expressions are chosen deterministically.
//! * `cm_step`: the plain configuration-model walk; identical to
//!   `polaris_b_step` without the color-matrix check.
//!
//! Every engine accepts a proposed destination `H` with probability
//! `min(1, rho * target.ratio(G, H))`, where `rho` is the proposal
//! probability ratio for the move. All multiplicities entering `rho` are
//! read from the pre-swap graph; an inserted pair absent from the graph
//! reads as 0.
//!
//! The generator is pinned: ChaCha8, seeded with a 64-bit value, one stream
//! per chain, so runs are reproducible across builds and platforms.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::classify::{classify_pair, preserves_jcm, swap_destinations, CaseLabel};
use crate::graph::{ClassKind, ColoredMultigraph, Pair};
use crate::metrics::degree_assortativity;

/// The pinned chain generator.
pub type ChainRng = ChaCha8Rng;

/// Derives the independent generator stream for one chain.
pub fn chain_rng(seed: u64, stream: u64) -> ChainRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Ratio oracle for the target distribution over the ensemble: returns
/// `pi(H) / pi(G)` where `H` is `g` with `removed` replaced by `inserted`.
/// A no-op proposal must have ratio 1, and reciprocal moves must have
/// reciprocal ratios.
pub trait TargetDistribution {
    fn ratio(&self, g: &ColoredMultigraph, removed: &[Pair; 2], inserted: &[Pair; 2]) -> f64;
}

/// The uniform distribution over the ensemble; the default target.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformTarget;

impl TargetDistribution for UniformTarget {
    #[inline]
    fn ratio(&self, _: &ColoredMultigraph, _: &[Pair; 2], _: &[Pair; 2]) -> f64 {
        1.0
    }
}

/// Product-form target `pi(G) proportional to prod_pairs w(p)^mult(p)`,
/// given a strictly positive per-pair weight function. The ratio telescopes
/// to the weights of the swapped pairs, so it is independent of the rest of
/// the graph.
#[derive(Debug, Clone, Copy)]
pub struct PairWeightTarget<F: Fn(Pair) -> f64> {
    weight: F,
}

impl<F: Fn(Pair) -> f64> PairWeightTarget<F> {
    pub fn new(weight: F) -> Self {
        Self { weight }
    }

    /// Unnormalized weight of a whole graph, for building exact target
    /// vectors over enumerated ensembles.
    pub fn graph_weight(&self, g: &ColoredMultigraph) -> f64 {
        let mut w = 1.0;
        for (p, m) in g.multiedges_sorted() {
            w *= (self.weight)(p).powi(m as i32);
        }
        w
    }
}

impl<F: Fn(Pair) -> f64> TargetDistribution for PairWeightTarget<F> {
    #[inline]
    fn ratio(&self, _: &ColoredMultigraph, removed: &[Pair; 2], inserted: &[Pair; 2]) -> f64 {
        ((self.weight)(inserted[0]) * (self.weight)(inserted[1]))
            / ((self.weight)(removed[0]) * (self.weight)(removed[1]))
    }
}

/// Per-iteration outcome taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepOutcome {
    /// The sampled swap does not preserve the color matrix (never produced
    /// by the color-aware engine).
    OutOfSpace,
    /// The swap is a no-op; the chain stays put.
    Unchanged,
    Accepted,
    Rejected,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResult {
    pub outcome: StepOutcome,
    /// Case of the sampled pair; `None` when no pair was drawn (degenerate
    /// color class).
    pub case: Option<CaseLabel>,
    /// Pair draws consumed by this iteration (> 1 only in retry mode).
    pub proposals: u32,
    /// True when a degenerate color class was drawn instead of a pair.
    pub degenerate_class: bool,
}

impl StepResult {
    fn new(outcome: StepOutcome, case: CaseLabel, proposals: u32) -> Self {
        StepResult {
            outcome,
            case: Some(case),
            proposals,
            degenerate_class: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerMode {
    PolarisB,
    PolarisC,
    Cm,
}

#[derive(Debug, Clone)]
pub struct ChainConfig {
    pub mode: SamplerMode,
    pub iterations: u64,
    pub seed: u64,
    /// Chain index; independent chains use the same seed with distinct
    /// streams.
    pub stream: u64,
    /// Literal resample-until-preserving loop for the color-agnostic
    /// engine. Off by default: resampling renormalizes the proposal
    /// distribution by a state-dependent constant, which the fixed rho
    /// values do not account for, so the default counts a non-preserving
    /// draw as one consumed iteration with the state unchanged.
    pub retry_out_of_space: bool,
    pub record_every: u64,
}

impl ChainConfig {
    pub fn new(mode: SamplerMode, iterations: u64, seed: u64) -> Self {
        ChainConfig {
            mode,
            iterations,
            seed,
            stream: 0,
            retry_out_of_space: false,
            record_every: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OutcomeCounts {
    pub out_of_space: u64,
    pub unchanged: u64,
    pub accepted: u64,
    pub rejected: u64,
}

impl OutcomeCounts {
    pub fn total(&self) -> u64 {
        self.out_of_space + self.unchanged + self.accepted + self.rejected
    }

    pub fn tally(&mut self, outcome: StepOutcome) {
        match outcome {
            StepOutcome::OutOfSpace => self.out_of_space += 1,
            StepOutcome::Unchanged => self.unchanged += 1,
            StepOutcome::Accepted => self.accepted += 1,
            StepOutcome::Rejected => self.rejected += 1,
        }
    }

    /// Fractions in taxonomy order; zeros when nothing ran.
    pub fn fractions(&self) -> [f64; 4] {
        let t = self.total();
        if t == 0 {
            return [0.0; 4];
        }
        let t = t as f64;
        [
            self.out_of_space as f64 / t,
            self.unchanged as f64 / t,
            self.accepted as f64 / t,
            self.rejected as f64 / t,
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iteration: u64,
    /// Cumulative outcome tallies at this iteration.
    pub counts: OutcomeCounts,
    pub degree_assortativity: Option<f64>,
    pub statistic: Option<f64>,
}

/// Outcome tallies plus periodically sampled statistics for one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrace {
    pub iterations: u64,
    pub counts: OutcomeCounts,
    pub records: Vec<TraceRecord>,
    /// Draws that hit a color class with fewer than two instances.
    pub degenerate_class_draws: u64,
    /// Total pair draws, counting retry-mode resampling.
    pub proposals: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChainError {
    #[error("chain needs at least 2 edge instances, graph has {0}")]
    TooFewInstances(u64),
    #[error("record_every must be at least 1")]
    ZeroRecordEvery,
    #[error("retry_out_of_space applies only to the color-agnostic engine")]
    RetryNotApplicable,
    #[error("graph has no colors")]
    NoColors,
}

/// Proposal-probability ratio for a moving swap under the color-agnostic
/// proposal scheme (uniform instance pair from all of `E`, fair coin over
/// the two expressions). Dispatch keys on the vertex structure of the
/// removed pair only, so it also serves the configuration-model walk.
pub fn rho_b(g: &ColoredMultigraph, removed: &[Pair; 2], inserted: &[Pair; 2]) -> f64 {
    let [r0, r1] = *removed;
    let [i0, i1] = *inserted;
    let m_r0 = f64::from(g.multiplicity(r0.0, r0.1));
    let m_r1 = f64::from(g.multiplicity(r1.0, r1.1));
    let m_i0 = f64::from(g.multiplicity(i0.0, i0.1));
    let m_i1 = f64::from(g.multiplicity(i1.0, i1.1));
    let k = distinct_vertex_count(r0, r1);
    let r0_loop = r0.0 == r0.1;
    let r1_loop = r1.0 == r1.1;
    match k {
        4 => (m_i0 + 1.0) * (m_i1 + 1.0) / (m_r0 * m_r1),
        3 => {
            if r0_loop || r1_loop {
                (m_i0 + 1.0) * (m_i1 + 1.0) / (2.0 * m_r0 * m_r1)
            } else {
                2.0 * (m_i0 + 1.0) * (m_i1 + 1.0) / (m_r0 * m_r1)
            }
        }
        2 => {
            if r0_loop && r1_loop {
                // Inserted pairs are two copies of one multiedge.
                debug_assert_eq!(i0, i1);
                (m_i0 + 2.0) * (m_i0 + 1.0) / (4.0 * m_r0 * m_r1)
            } else {
                // Copies of one non-loop multiedge swapped into two loops.
                debug_assert_eq!(r0, r1);
                4.0 * (m_i0 + 1.0) * (m_i1 + 1.0) / (m_r0 * (m_r0 - 1.0))
            }
        }
        _ => panic!("no moving swap exists for pair {removed:?}"),
    }
}

/// Proposal-probability ratio for the moving swap selected by the
/// color-aware engine. `drawn_color` is the class the pair was sampled
/// from; the ratio itself depends only on the move (for the four-vertex
/// same-two-colors case it sums over both endpoint-color classes, whose
/// sizes are ensemble invariants).
///
/// Every value is the ratio of ordered draw counts: an ordered draw of two
/// distinct multiedges realizes an unordered pair `2 m1 m2` ways, while an
/// ordered draw of two copies of one multiedge has `m (m - 1)` realizations.
/// The loop-pair and copy-pair cases mix the two counting shapes, which is
/// where their factors of 2 come from; anything else breaks detailed
/// balance on loop/copy transitions (the exact-stationarity suite pins
/// this).
pub fn rho_c(
    g: &ColoredMultigraph,
    case: CaseLabel,
    removed: &[Pair; 2],
    inserted: &[Pair; 2],
    _drawn_color: u32,
) -> f64 {
    let [r0, r1] = *removed;
    let [i0, i1] = *inserted;
    let m_r0 = f64::from(g.multiplicity(r0.0, r0.1));
    let m_r1 = f64::from(g.multiplicity(r1.0, r1.1));
    let m_i0 = f64::from(g.multiplicity(i0.0, i0.1));
    let m_i1 = f64::from(g.multiplicity(i1.0, i1.1));
    match case {
        CaseLabel::C2A => (m_i0 + 2.0) * (m_i0 + 1.0) / (2.0 * m_r0 * m_r1),
        CaseLabel::C2B => 2.0 * (m_i0 + 1.0) * (m_i1 + 1.0) / (m_r0 * (m_r0 - 1.0)),
        CaseLabel::C3A | CaseLabel::C3B | CaseLabel::C3C | CaseLabel::C4A | CaseLabel::C4C => {
            (m_i0 + 1.0) * (m_i1 + 1.0) / (m_r0 * m_r1)
        }
        CaseLabel::C4B => {
            // Both pairs bichrome over the same two colors; drawn through
            // either class. Kept as the literal quotient of two two-term
            // sums over the class sizes.
            let ca = g.color_of(r0.0);
            let cb = g.color_of(r0.1);
            let sa = g.class_len(ClassKind::Color(ca)) as f64;
            let sb = g.class_len(ClassKind::Color(cb)) as f64;
            let inv_a = 1.0 / (sa * (sa - 1.0));
            let inv_b = 1.0 / (sb * (sb - 1.0));
            let num = (m_i0 + 1.0) * (m_i1 + 1.0);
            let den = m_r0 * m_r1;
            (num * inv_a + num * inv_b) / (den * inv_a + den * inv_b)
        }
        _ => panic!("case {case:?} has no moving color-preserving swap"),
    }
}

#[inline]
fn distinct_vertex_count(a: Pair, b: Pair) -> u8 {
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
fn sorted_pair_multiset(a: Pair, b: Pair) -> [Pair; 2] {
    if a <= b {
        [a, b]
    } else {
        [b, a]
    }
}

/// Accept/reject helper shared by the engines. On acceptance the swap is
/// applied in place.
#[inline]
fn metropolis_accept(
    g: &mut ColoredMultigraph,
    removed: &[Pair; 2],
    inserted: &[Pair; 2],
    rho: f64,
    target: &dyn TargetDistribution,
    rng: &mut ChainRng,
) -> StepOutcome {
    let ratio = target.ratio(g, removed, inserted);
    if rng.random::<f64>() < rho * ratio {
        g.apply_swap(removed, inserted);
        StepOutcome::Accepted
    } else {
        StepOutcome::Rejected
    }
}

fn des_step(
    g: &mut ColoredMultigraph,
    target: &dyn TargetDistribution,
    rng: &mut ChainRng,
    check_jcm: bool,
    retry_out_of_space: bool,
) -> StepResult {
    debug_assert!(g.instance_total() >= 2);
    let mut proposals = 0u32;
    loop {
        proposals += 1;
        let first = g
            .sample_instance(ClassKind::All, rng, None)
            .expect("instance total checked at chain start");
        let second = g
            .sample_instance(ClassKind::All, rng, Some(&first))
            .expect("instance total checked at chain start");
        let case = classify_pair(g, first.pair, second.pair);
        let removed = sorted_pair_multiset(first.pair, second.pair);
        let dests = swap_destinations(removed[0], removed[1]);
        let inserted = dests[rng.random_range(0..2usize)];
        if check_jcm && !preserves_jcm(g, removed, inserted) {
            if retry_out_of_space {
                continue;
            }
            return StepResult::new(StepOutcome::OutOfSpace, case, proposals);
        }
        if inserted == removed {
            return StepResult::new(StepOutcome::Unchanged, case, proposals);
        }
        let rho = rho_b(g, &removed, &inserted);
        let outcome = metropolis_accept(g, &removed, &inserted, rho, target, rng);
        return StepResult::new(outcome, case, proposals);
    }
}

/// One iteration of the color-agnostic preserving walk.
pub fn polaris_b_step(
    g: &mut ColoredMultigraph,
    target: &dyn TargetDistribution,
    rng: &mut ChainRng,
    retry_out_of_space: bool,
) -> StepResult {
    des_step(g, target, rng, true, retry_out_of_space)
}

/// One iteration of the plain configuration-model walk: every degree
/// preserving swap is admissible, so the color matrix may drift.
pub fn cm_step(
    g: &mut ColoredMultigraph,
    target: &dyn TargetDistribution,
    rng: &mut ChainRng,
) -> StepResult {
    des_step(g, target, rng, false, false)
}

/// Splits a wedge into its shared vertex and the two extremes.
#[inline]
fn wedge_parts(a: Pair, b: Pair) -> (u32, u32, u32) {
    if a.0 == b.0 {
        (a.0, a.1, b.1)
    } else if a.0 == b.1 {
        (a.0, a.1, b.0)
    } else if a.1 == b.0 {
        (a.1, a.0, b.1)
    } else {
        debug_assert_eq!(a.1, b.1);
        (a.1, a.0, b.0)
    }
}

/// For two bichrome pairs sharing one or both colors: joins each endpoint
/// of the shared color with the other edge's differently colored endpoint.
/// When both colors are shared either choice yields the same destination;
/// the smaller color id is used.
#[inline]
fn color_matched_exchange(g: &ColoredMultigraph, a: Pair, b: Pair) -> [Pair; 2] {
    let (ca0, ca1) = (g.color_of(a.0), g.color_of(a.1));
    let (cb0, cb1) = (g.color_of(b.0), g.color_of(b.1));
    let mut shared = u32::MAX;
    for c in [ca0, ca1] {
        if (c == cb0 || c == cb1) && c < shared {
            shared = c;
        }
    }
    debug_assert_ne!(shared, u32::MAX, "pairs share no color");
    let (x, x_other) = if ca0 == shared { (a.0, a.1) } else { (a.1, a.0) };
    let (y, y_other) = if cb0 == shared { (b.0, b.1) } else { (b.1, b.0) };
    sorted_pair_multiset(
        crate::graph::normalize(x, y_other),
        crate::graph::normalize(y, x_other),
    )
}

/// One iteration of the color-aware walk. Never yields
/// [`StepOutcome::OutOfSpace`]: any pair drawn from one color class admits
/// a preserving swap.
pub fn polaris_c_step(
    g: &mut ColoredMultigraph,
    target: &dyn TargetDistribution,
    rng: &mut ChainRng,
) -> StepResult {
    let color = rng.random_range(0..g.color_count());
    let class = ClassKind::Color(color);
    if g.class_len(class) < 2 {
        return StepResult {
            outcome: StepOutcome::Unchanged,
            case: None,
            proposals: 1,
            degenerate_class: true,
        };
    }
    let first = g
        .sample_instance(class, rng, None)
        .expect("class length checked");
    let second = g
        .sample_instance(class, rng, Some(&first))
        .expect("class length checked");
    let case = classify_pair(g, first.pair, second.pair);
    let removed = sorted_pair_multiset(first.pair, second.pair);
    let inserted = match case {
        CaseLabel::C1 | CaseLabel::C2C | CaseLabel::C2D | CaseLabel::C3D | CaseLabel::C3E => {
            return StepResult::new(StepOutcome::Unchanged, case, 1);
        }
        CaseLabel::C2A => {
            let p = crate::graph::normalize(removed[0].0, removed[1].0);
            [p, p]
        }
        CaseLabel::C2B => {
            let (u, w) = removed[0];
            sorted_pair_multiset((u, u), (w, w))
        }
        CaseLabel::C3A => {
            let (s, other) = if removed[0].0 == removed[0].1 {
                (removed[0].0, removed[1])
            } else {
                (removed[1].0, removed[0])
            };
            sorted_pair_multiset(
                crate::graph::normalize(s, other.0),
                crate::graph::normalize(s, other.1),
            )
        }
        CaseLabel::C3B | CaseLabel::C3C => {
            let (center, p, q) = wedge_parts(removed[0], removed[1]);
            sorted_pair_multiset((center, center), crate::graph::normalize(p, q))
        }
        CaseLabel::C4A | CaseLabel::C4B => color_matched_exchange(g, removed[0], removed[1]),
        CaseLabel::C4C => {
            let dests = swap_destinations(removed[0], removed[1]);
            dests[rng.random_range(0..2usize)]
        }
        CaseLabel::C0 => unreachable!("pairs drawn from one color class always share a color"),
    };
    debug_assert!(preserves_jcm(g, removed, inserted));
    debug_assert_ne!(removed, inserted);
    let rho = rho_c(g, case, &removed, &inserted, color);
    let outcome = metropolis_accept(g, &removed, &inserted, rho, target, rng);
    StepResult::new(outcome, case, 1)
}

/// Runs one chain in place, tallying outcomes and recording the degree
/// assortativity (and an optional custom statistic) after every
/// `record_every`-th iteration. Deterministic given the graph and
/// `(seed, stream)`.
pub fn run_chain(
    g: &mut ColoredMultigraph,
    config: &ChainConfig,
    target: &dyn TargetDistribution,
    statistic: Option<&dyn Fn(&ColoredMultigraph) -> f64>,
) -> Result<ChainTrace, ChainError> {
    if config.record_every == 0 {
        return Err(ChainError::ZeroRecordEvery);
    }
    if config.retry_out_of_space && config.mode != SamplerMode::PolarisB {
        return Err(ChainError::RetryNotApplicable);
    }
    match config.mode {
        SamplerMode::PolarisB | SamplerMode::Cm => {
            if g.instance_total() < 2 {
                return Err(ChainError::TooFewInstances(g.instance_total()));
            }
        }
        SamplerMode::PolarisC => {
            if g.color_count() == 0 {
                return Err(ChainError::NoColors);
            }
        }
    }
    let mut rng = chain_rng(config.seed, config.stream);
    let mut trace = ChainTrace {
        iterations: config.iterations,
        counts: OutcomeCounts::default(),
        records: Vec::new(),
        degenerate_class_draws: 0,
        proposals: 0,
    };
    for iteration in 1..=config.iterations {
        let res = match config.mode {
            SamplerMode::PolarisB => polaris_b_step(g, target, &mut rng, config.retry_out_of_space),
            SamplerMode::PolarisC => polaris_c_step(g, target, &mut rng),
            SamplerMode::Cm => cm_step(g, target, &mut rng),
        };
        trace.counts.tally(res.outcome);
        trace.proposals += u64::from(res.proposals);
        if res.degenerate_class {
            trace.degenerate_class_draws += 1;
        }
        if iteration % config.record_every == 0 {
            trace.records.push(TraceRecord {
                iteration,
                counts: trace.counts,
                degree_assortativity: degree_assortativity(g).ok(),
                statistic: statistic.map(|f| f(g)),
            });
        }
    }
    Ok(trace)
}

/// Sufficient aperiodicity conditions checked on the observed graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AperiodicityReport {
    /// Some pair of edges falls in a case set that guarantees a lazy or
    /// short-cycle move for the given engine.
    pub case_condition: bool,
    /// There is a color with two same-colored vertices carrying enough
    /// disjoint bichrome edges to build cycles of lengths 2 and 3.
    pub bichrome_condition: bool,
}

impl AperiodicityReport {
    pub fn any(&self) -> bool {
        self.case_condition || self.bichrome_condition
    }
}

/// Scans the graph for the sufficient aperiodicity conditions. The
/// qualifying case set is narrower for the color-aware engine because it
/// skips no-op swaps wherever a moving alternative exists.
pub fn aperiodicity_conditions(g: &ColoredMultigraph, mode: SamplerMode) -> AperiodicityReport {
    let cases: &[CaseLabel] = match mode {
        SamplerMode::PolarisB | SamplerMode::Cm => &[
            CaseLabel::C1,
            CaseLabel::C2A,
            CaseLabel::C2B,
            CaseLabel::C2C,
            CaseLabel::C2D,
            CaseLabel::C3A,
            CaseLabel::C3B,
            CaseLabel::C3C,
            CaseLabel::C3D,
            CaseLabel::C3E,
            CaseLabel::C4C,
        ],
        SamplerMode::PolarisC => &[
            CaseLabel::C1,
            CaseLabel::C2C,
            CaseLabel::C2D,
            CaseLabel::C3D,
            CaseLabel::C4C,
        ],
    };
    let edges: Vec<(Pair, u32)> = {
        let mut v: Vec<(Pair, u32)> = g.multiedges().collect();
        v.sort_unstable();
        v
    };
    let mut case_condition = false;
    'scan: for (i, &(e1, m1)) in edges.iter().enumerate() {
        if m1 >= 2 && cases.contains(&classify_pair(g, e1, e1)) {
            case_condition = true;
            break 'scan;
        }
        for &(e2, _) in &edges[i + 1..] {
            if cases.contains(&classify_pair(g, e1, e2)) {
                case_condition = true;
                break 'scan;
            }
        }
    }
    AperiodicityReport {
        case_condition,
        bichrome_condition: bichrome_wedge_condition(g),
    }
}

/// Second sufficient condition: a color with vertices `u`, `w` (same
/// color), bichrome edges `(u,v)`, `(u,z)`, `(w,x)` on five distinct
/// vertices.
fn bichrome_wedge_condition(g: &ColoredMultigraph) -> bool {
    let n = g.vertex_count() as usize;
    let mut bichrome_nbrs: Vec<Vec<u32>> = vec![Vec::new(); n];
    for ((u, w), _) in g.multiedges() {
        if u != w && g.color_of(u) != g.color_of(w) {
            bichrome_nbrs[u as usize].push(w);
            bichrome_nbrs[w as usize].push(u);
        }
    }
    for nbrs in &mut bichrome_nbrs {
        nbrs.sort_unstable();
        nbrs.dedup();
    }
    for (u, a) in bichrome_nbrs.iter().enumerate() {
        if a.len() < 2 {
            continue;
        }
        for (w, b) in bichrome_nbrs.iter().enumerate() {
            if w == u || g.color_of(w as u32) != g.color_of(u as u32) {
                continue;
            }
            if b.is_empty() {
                continue;
            }
            // Need distinct v, z among u's bichrome neighbors and x among
            // w's with x not in {v, z}. Same-colored w is never a bichrome
            // neighbor of u, and x differs from u by color.
            if a.len() >= 3 || b.iter().any(|x| !a.contains(x)) {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::jcm;
    use crate::metrics::same_ensemble;

    fn g(colors: &[u32], edges: &[(u32, u32, u32)]) -> ColoredMultigraph {
        ColoredMultigraph::build(colors, edges).unwrap()
    }

    #[test]
    fn pair_weight_target_ratio_contract() {
        let target = PairWeightTarget::new(|p: Pair| 1.0 + f64::from(p.0 + 2 * p.1) / 10.0);
        let gr = g(&[0, 0, 0, 0], &[(0, 1, 1), (2, 3, 1)]);
        // No-op proposals have ratio one; reciprocal moves have reciprocal
        // ratios.
        assert_eq!(
            target.ratio(&gr, &[(0, 1), (2, 3)], &[(0, 1), (2, 3)]),
            1.0
        );
        let fwd = target.ratio(&gr, &[(0, 1), (2, 3)], &[(0, 3), (1, 2)]);
        let rev = target.ratio(&gr, &[(0, 3), (1, 2)], &[(0, 1), (2, 3)]);
        assert!((fwd * rev - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rho_b_plugged_values() {
        // Four distinct vertices, unit multiplicities, absent inserts.
        let four = g(&[0, 0, 0, 0], &[(0, 1, 1), (2, 3, 1)]);
        assert_eq!(rho_b(&four, &[(0, 1), (2, 3)], &[(0, 3), (1, 2)]), 1.0);

        // Two unit self-loops into an absent double edge.
        let loops = g(&[0, 0], &[(0, 0, 1), (1, 1, 1)]);
        assert_eq!(rho_b(&loops, &[(0, 0), (1, 1)], &[(0, 1), (0, 1)]), 0.5);

        // Copies of a double edge into two absent loops.
        let copies = g(&[0, 0], &[(0, 1, 2)]);
        assert_eq!(rho_b(&copies, &[(0, 1), (0, 1)], &[(0, 0), (1, 1)]), 2.0);
    }

    #[test]
    fn rho_c_plugged_values() {
        // Loop pair with absent double edge: the exact proposal ratio is 1
        // (ordered draws realize the loop pair twice but the copy pair
        // mult*(mult-1) = 2*1 times, and the class sizes cancel).
        let loops = g(&[0, 0], &[(0, 0, 1), (1, 1, 1)]);
        assert_eq!(
            rho_c(&loops, CaseLabel::C2A, &[(0, 0), (1, 1)], &[(0, 1), (0, 1)], 0),
            1.0
        );
        let copies = g(&[0, 0], &[(0, 1, 2)]);
        assert_eq!(
            rho_c(&copies, CaseLabel::C2B, &[(0, 1), (0, 1)], &[(0, 0), (1, 1)], 0),
            1.0
        );

        // Four same-colored vertices, all involved multiplicities 1.
        let four = g(&[0, 0, 0, 0], &[(0, 1, 1), (2, 3, 1)]);
        assert_eq!(
            rho_c(&four, CaseLabel::C4C, &[(0, 1), (2, 3)], &[(0, 3), (1, 2)], 0),
            1.0
        );

        // Loop plus disjoint edge sharing its color.
        let tri = g(&[0, 0, 0], &[(0, 0, 1), (1, 2, 1)]);
        assert_eq!(
            rho_c(&tri, CaseLabel::C3A, &[(0, 0), (1, 2)], &[(0, 1), (0, 2)], 0),
            1.0
        );
    }

    #[test]
    fn rho_c_case4b_equal_classes_reduces() {
        // Alternating 4-cycle: both classes have 4 instances, so the
        // two-term quotient reduces to the plain multiplicity ratio.
        let cyc = g(
            &[0, 1, 0, 1],
            &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 1)],
        );
        let rho = rho_c(&cyc, CaseLabel::C4B, &[(0, 1), (2, 3)], &[(0, 3), (1, 2)], 0);
        let plain = (1.0 + 1.0) * (1.0 + 1.0) / (1.0 * 1.0);
        assert!((rho - plain).abs() < 1e-12);
    }

    #[test]
    fn polaris_b_out_of_space_leaves_state() {
        // Two monochrome edges of different colors: the only pair is
        // color-disjoint, so every draw is out of space.
        let mut gr = g(&[0, 0, 1, 1], &[(0, 1, 1), (2, 3, 1)]);
        let key = gr.canonical_key();
        let mut rng = chain_rng(11, 0);
        for _ in 0..200 {
            let res = polaris_b_step(&mut gr, &UniformTarget, &mut rng, false);
            assert_eq!(res.outcome, StepOutcome::OutOfSpace);
            assert_eq!(res.case, Some(CaseLabel::C0));
        }
        assert_eq!(gr.canonical_key(), key);
    }

    #[test]
    fn polaris_c_never_out_of_space_and_stays_in_ensemble() {
        let observed = g(
            &[0, 0, 1, 1, 2],
            &[(0, 1, 2), (2, 3, 1), (0, 2, 1), (1, 3, 1), (4, 4, 1), (0, 0, 1)],
        );
        let mut gr = observed.clone();
        let mut rng = chain_rng(5, 0);
        for _ in 0..20_000 {
            let res = polaris_c_step(&mut gr, &UniformTarget, &mut rng);
            assert_ne!(res.outcome, StepOutcome::OutOfSpace);
        }
        assert!(same_ensemble(&observed, &gr).unwrap());
    }

    #[test]
    fn polaris_c_degenerate_class_counts() {
        // Color 1 owns a single instance; drawing it must leave the state
        // unchanged and flag the draw.
        let mut gr = g(&[0, 0, 1], &[(0, 1, 2), (2, 2, 1)]);
        let config = ChainConfig {
            record_every: 10,
            ..ChainConfig::new(SamplerMode::PolarisC, 2000, 3)
        };
        let trace = run_chain(&mut gr, &config, &UniformTarget, None).unwrap();
        assert!(trace.degenerate_class_draws > 0);
        assert_eq!(trace.counts.out_of_space, 0);
        assert_eq!(trace.counts.total(), 2000);
    }

    #[test]
    fn case4c_coin_is_fair() {
        // Single-color perfect matching: every color-aware step draws the
        // same four-vertex pair and flips between its two destinations.
        let base = g(&[0, 0, 0, 0], &[(0, 1, 1), (2, 3, 1)]);
        let d1 = g(&[0, 0, 0, 0], &[(0, 3, 1), (1, 2, 1)]).canonical_key();
        let d2 = g(&[0, 0, 0, 0], &[(0, 2, 1), (1, 3, 1)]).canonical_key();
        let mut rng = chain_rng(99, 0);
        let reps = 100_000;
        let mut hits = [0u32; 2];
        for _ in 0..reps {
            let mut gr = base.clone();
            let res = polaris_c_step(&mut gr, &UniformTarget, &mut rng);
            assert_eq!(res.outcome, StepOutcome::Accepted);
            let key = gr.canonical_key();
            if key == d1 {
                hits[0] += 1;
            } else {
                assert_eq!(key, d2);
                hits[1] += 1;
            }
        }
        for h in hits {
            let frac = f64::from(h) / f64::from(reps as u32);
            assert!((frac - 0.5).abs() < 0.01, "frac={frac}");
        }
    }

    #[test]
    fn run_chain_zero_iterations() {
        let mut gr = g(&[0, 0, 1], &[(0, 1, 1), (0, 2, 1), (1, 2, 1)]);
        let key = gr.canonical_key();
        let config = ChainConfig::new(SamplerMode::PolarisC, 0, 1);
        let trace = run_chain(&mut gr, &config, &UniformTarget, None).unwrap();
        assert_eq!(trace.counts.total(), 0);
        assert!(trace.records.is_empty());
        assert_eq!(gr.canonical_key(), key);
    }

    #[test]
    fn run_chain_is_deterministic() {
        let observed = g(
            &[0, 1, 0, 1],
            &[(0, 1, 2), (2, 3, 1), (0, 3, 1), (1, 2, 1)],
        );
        for mode in [SamplerMode::PolarisB, SamplerMode::PolarisC, SamplerMode::Cm] {
            let config = ChainConfig {
                record_every: 100,
                ..ChainConfig::new(mode, 5000, 42)
            };
            let mut a = observed.clone();
            let mut b = observed.clone();
            let ta = run_chain(&mut a, &config, &UniformTarget, None).unwrap();
            let tb = run_chain(&mut b, &config, &UniformTarget, None).unwrap();
            assert_eq!(ta, tb);
            assert_eq!(a.canonical_key(), b.canonical_key());
        }
    }

    #[test]
    fn run_chain_rejects_bad_config() {
        let mut gr = g(&[0, 0], &[(0, 1, 1)]);
        let config = ChainConfig::new(SamplerMode::PolarisB, 10, 1);
        assert_eq!(
            run_chain(&mut gr, &config, &UniformTarget, None).unwrap_err(),
            ChainError::TooFewInstances(1)
        );
        let mut gr = g(&[0, 0], &[(0, 1, 2)]);
        let config = ChainConfig {
            retry_out_of_space: true,
            ..ChainConfig::new(SamplerMode::PolarisC, 10, 1)
        };
        assert_eq!(
            run_chain(&mut gr, &config, &UniformTarget, None).unwrap_err(),
            ChainError::RetryNotApplicable
        );
        let config = ChainConfig {
            record_every: 0,
            ..ChainConfig::new(SamplerMode::Cm, 10, 1)
        };
        assert_eq!(
            run_chain(&mut gr, &config, &UniformTarget, None).unwrap_err(),
            ChainError::ZeroRecordEvery
        );
    }

    #[test]
    fn cm_step_ignores_colors_and_preserves_degrees() {
        let observed = g(&[0, 0, 1, 1], &[(0, 1, 1), (2, 3, 1), (0, 2, 1), (1, 3, 1)]);
        let mut gr = observed.clone();
        let mut rng = chain_rng(17, 0);
        let mut jcm_changed = false;
        for _ in 0..20_000 {
            let res = cm_step(&mut gr, &UniformTarget, &mut rng);
            assert_ne!(res.outcome, StepOutcome::OutOfSpace);
            if jcm(&gr) != jcm(&observed) {
                jcm_changed = true;
            }
        }
        assert_eq!(gr.degrees(), observed.degrees());
        assert!(jcm_changed, "configuration model should leave the ensemble");
    }

    #[test]
    fn retry_mode_consumes_extra_proposals() {
        let mut gr = g(
            &[0, 0, 1, 1],
            &[(0, 1, 1), (2, 3, 1), (0, 2, 1), (1, 3, 1)],
        );
        let config = ChainConfig {
            retry_out_of_space: true,
            ..ChainConfig::new(SamplerMode::PolarisB, 3000, 8)
        };
        let trace = run_chain(&mut gr, &config, &UniformTarget, None).unwrap();
        assert_eq!(trace.counts.out_of_space, 0);
        assert!(trace.proposals > trace.counts.total());
    }

    #[test]
    fn aperiodicity_conditions_scan() {
        // Monochrome wedge qualifies for both engines through the case set.
        let wedge = g(&[0, 0, 0], &[(0, 1, 1), (1, 2, 1)]);
        assert!(aperiodicity_conditions(&wedge, SamplerMode::PolarisB).case_condition);
        assert!(!aperiodicity_conditions(&wedge, SamplerMode::PolarisC).case_condition);

        // Single-color matching: case 4C only, both engines qualify.
        let matching = g(&[0, 0, 0, 0], &[(0, 1, 1), (2, 3, 1)]);
        assert!(aperiodicity_conditions(&matching, SamplerMode::PolarisC).case_condition);

        // Two-member loop/double-edge ensemble: no qualifying pair, no
        // bichrome structure; the scan must report neither condition.
        let loops = g(&[0, 0], &[(0, 0, 1), (1, 1, 1)]);
        let rep = aperiodicity_conditions(&loops, SamplerMode::PolarisC);
        assert!(!rep.any());

        // Bichrome condition: u,w share a color, u has two bichrome edges,
        // w one, all five vertices distinct.
        let bi = g(
            &[0, 0, 1, 1, 1],
            &[(0, 2, 1), (0, 3, 1), (1, 4, 1)],
        );
        let rep = aperiodicity_conditions(&bi, SamplerMode::PolarisC);
        assert!(rep.bichrome_condition);
    }
}
