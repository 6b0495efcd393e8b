//! Classification of an unordered pair of distinct edge instances into the
//! swap-case taxonomy, and enumeration of the double edge swaps the pair
//! admits, flagged by whether each preserves the joint color matrix.
//!
//! The label is a pure function of the four endpoint ids and their colors;
//! multiplicities never enter.

use crate::graph::{normalize, ColoredMultigraph, EdgeInstance, Pair};

/// Case taxonomy for a pair of distinct edge instances. Exactly one label
/// applies to any pair; disjoint endpoint colors (C0) take precedence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseLabel {
    /// Disjoint endpoint colors; neither swap preserves the color matrix.
    C0,
    /// Copies of one self-loop multiedge.
    C1,
    /// Two different self-loops on same-colored vertices.
    C2A,
    /// Copies of one monochrome non-loop multiedge.
    C2B,
    /// Copies of one bichrome multiedge.
    C2C,
    /// A self-loop and a non-loop edge incident to the loop vertex.
    C2D,
    /// A self-loop and a disjoint edge sharing a color with it.
    C3A,
    /// A wedge whose three vertices all have one color.
    C3B,
    /// A wedge on two colors with exactly one monochrome edge.
    C3C,
    /// A wedge on two colors with both edges bichrome.
    C3D,
    /// A wedge whose three vertices have three different colors.
    C3E,
    /// Four vertices, both edges bichrome, three colors total.
    C4A,
    /// Four vertices, both edges bichrome with the same two colors.
    C4B,
    /// Four vertices, at least three sharing one color.
    C4C,
}

impl CaseLabel {
    pub const ALL: [CaseLabel; 14] = [
        CaseLabel::C0,
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
        CaseLabel::C4A,
        CaseLabel::C4B,
        CaseLabel::C4C,
    ];
}

/// A candidate double edge swap: the two removed multiedges, the two
/// replacement pairs, and its classification flags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwapProposal {
    pub removed: [Pair; 2],
    pub inserted: [Pair; 2],
    pub case: CaseLabel,
    /// True iff applying the swap preserves the joint color matrix.
    pub is_jdes: bool,
    /// True iff the destination equals the origin.
    pub is_noop: bool,
    /// True iff the two formal swap expressions for the pair collapse to
    /// this single proposal.
    pub equivalent: bool,
    /// Number of distinct colors among the four endpoint slots.
    pub distinct_color_count: u8,
}

#[inline]
fn sorted_pair_multiset(a: Pair, b: Pair) -> [Pair; 2] {
    if a <= b {
        [a, b]
    } else {
        [b, a]
    }
}

#[inline]
fn color_pairs(g: &ColoredMultigraph, e: [Pair; 2]) -> [(u32, u32); 2] {
    let mut cp = [(0, 0); 2];
    for (i, p) in e.iter().enumerate() {
        let a = g.color_of(p.0);
        let b = g.color_of(p.1);
        cp[i] = if a <= b { (a, b) } else { (b, a) };
    }
    if cp[0] > cp[1] {
        cp.swap(0, 1);
    }
    cp
}

/// True iff replacing `removed` with `inserted` leaves the joint color
/// matrix unchanged, decided by endpoint-color bookkeeping alone.
#[inline]
pub fn preserves_jcm(g: &ColoredMultigraph, removed: [Pair; 2], inserted: [Pair; 2]) -> bool {
    color_pairs(g, removed) == color_pairs(g, inserted)
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
fn distinct_colors(g: &ColoredMultigraph, a: Pair, b: Pair) -> u8 {
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

/// Classifies an unordered pair of distinct edge instances, given as vertex
/// pairs. The two instances may be copies of one multiedge; the caller
/// guarantees they are distinct instances.
pub fn classify_pair(g: &ColoredMultigraph, e1: Pair, e2: Pair) -> CaseLabel {
    let a = normalize(e1.0, e1.1);
    let b = normalize(e2.0, e2.1);
    let (ca0, ca1) = (g.color_of(a.0), g.color_of(a.1));
    let (cb0, cb1) = (g.color_of(b.0), g.color_of(b.1));
    if ca0 != cb0 && ca0 != cb1 && ca1 != cb0 && ca1 != cb1 {
        return CaseLabel::C0;
    }
    let a_loop = a.0 == a.1;
    let b_loop = b.0 == b.1;
    match distinct_vertices(a, b) {
        1 => CaseLabel::C1,
        2 => {
            if a_loop && b_loop {
                CaseLabel::C2A
            } else if !a_loop && !b_loop {
                // Copies of one non-loop multiedge.
                if ca0 == ca1 {
                    CaseLabel::C2B
                } else {
                    CaseLabel::C2C
                }
            } else {
                CaseLabel::C2D
            }
        }
        3 => {
            if a_loop || b_loop {
                CaseLabel::C3A
            } else {
                match distinct_colors(g, a, b) {
                    1 => CaseLabel::C3B,
                    3 => CaseLabel::C3E,
                    _ => {
                        if ca0 == ca1 || cb0 == cb1 {
                            CaseLabel::C3C
                        } else {
                            CaseLabel::C3D
                        }
                    }
                }
            }
        }
        _ => {
            if ca0 != ca1 && cb0 != cb1 {
                if distinct_colors(g, a, b) == 3 {
                    CaseLabel::C4A
                } else {
                    CaseLabel::C4B
                }
            } else {
                CaseLabel::C4C
            }
        }
    }
}

/// Classifies two drawn instances; passing the same instance twice is a
/// contract violation.
pub fn classify(g: &ColoredMultigraph, e1: &EdgeInstance, e2: &EdgeInstance) -> CaseLabel {
    assert!(
        !(e1.class == e2.class && e1.slot == e2.slot),
        "classify requires two distinct instances"
    );
    classify_pair(g, e1.pair, e2.pair)
}

/// The two destinations the formal swap expressions produce for an ordered
/// pair written `(u,w), (v,z)`: `{(u,z),(w,v)}` and `{(u,v),(w,z)}`.
/// Orientation of the written pairs decides which is which, so callers that
/// need a fixed labelling should pass normalized, sorted pairs.
#[inline]
pub fn swap_destinations(e1: Pair, e2: Pair) -> [[Pair; 2]; 2] {
    let (u, w) = e1;
    let (v, z) = e2;
    [
        sorted_pair_multiset(normalize(u, z), normalize(w, v)),
        sorted_pair_multiset(normalize(u, v), normalize(w, z)),
    ]
}

fn make_proposal(
    g: &ColoredMultigraph,
    removed: [Pair; 2],
    inserted: [Pair; 2],
    case: CaseLabel,
    equivalent: bool,
    nl: u8,
) -> SwapProposal {
    SwapProposal {
        removed,
        inserted,
        case,
        is_jdes: preserves_jcm(g, removed, inserted),
        is_noop: removed == inserted,
        equivalent,
        distinct_color_count: nl,
    }
}

/// Enumerates the distinct double edge swaps involving two distinct
/// instances of `e1` and `e2`. There are exactly two formal expressions;
/// when they produce the same destination they are merged into a single
/// proposal flagged `equivalent`.
pub fn enumerate_swaps_pair(g: &ColoredMultigraph, e1: Pair, e2: Pair) -> Vec<SwapProposal> {
    let a = normalize(e1.0, e1.1);
    let b = normalize(e2.0, e2.1);
    let removed = sorted_pair_multiset(a, b);
    let case = classify_pair(g, a, b);
    let nl = distinct_colors(g, a, b);
    let [d1, d2] = swap_destinations(removed[0], removed[1]);
    if d1 == d2 {
        vec![make_proposal(g, removed, d1, case, true, nl)]
    } else {
        vec![
            make_proposal(g, removed, d1, case, false, nl),
            make_proposal(g, removed, d2, case, false, nl),
        ]
    }
}

/// Instance-level wrapper around [`enumerate_swaps_pair`].
pub fn enumerate_swaps(
    g: &ColoredMultigraph,
    e1: &EdgeInstance,
    e2: &EdgeInstance,
) -> Vec<SwapProposal> {
    assert!(
        !(e1.class == e2.class && e1.slot == e2.slot),
        "enumerate_swaps requires two distinct instances"
    );
    enumerate_swaps_pair(g, e1.pair, e2.pair)
}
