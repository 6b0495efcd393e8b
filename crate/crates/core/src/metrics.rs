//! Graph statistics for evaluating sampler output: color assortativity,
//! degree assortativity, relative error, and ensemble-equality predicates.
//!
//! Self-loop conventions (they affect trace values, so they are spelled out
//! here): a self-loop contributes two same-color endpoint slots to the
//! mixing matrix, and two `(d(u), d(u))` samples to the degree correlation.

use thiserror::Error;

use crate::graph::{jcm, ColoredMultigraph};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("color assortativity undefined: all edge endpoints share one color")]
    UndefinedColorAssortativity,
    #[error("degree assortativity undefined: zero degree variance over endpoints")]
    UndefinedDegreeAssortativity,
    #[error("relative error undefined: observed value is zero")]
    UndefinedRelativeError,
    #[error("graph pair mismatch: {0}")]
    GraphMismatch(&'static str),
    #[error("metric needs at least {needed} edge instances, graph has {got}")]
    TooFewInstances { needed: u64, got: u64 },
}

/// Endpoint-pair mixing matrix: `e[l][r]` is the fraction of endpoint slots
/// pairing colors `l` and `r`; `a` is its per-color marginal.
#[derive(Debug, Clone)]
pub struct MixingMatrix {
    color_count: u32,
    pub e: Vec<f64>,
    pub a: Vec<f64>,
}

impl MixingMatrix {
    #[inline]
    pub fn e_at(&self, l: u32, r: u32) -> f64 {
        self.e[l as usize * self.color_count as usize + r as usize]
    }

    pub fn color_count(&self) -> u32 {
        self.color_count
    }
}

/// Builds the mixing matrix from the joint color matrix: each edge instance
/// contributes `1/(2|E|)` to `e[l][r]` and `e[r][l]`; a self-loop puts
/// `2/(2|E|)` on its diagonal cell. Depends on the graph only through its
/// color matrix and instance total.
pub fn mixing_matrix(g: &ColoredMultigraph) -> Result<MixingMatrix, MetricsError> {
    let total = g.instance_total();
    if total == 0 {
        return Err(MetricsError::TooFewInstances { needed: 1, got: 0 });
    }
    let k = g.color_count() as usize;
    let j = jcm(g);
    let denom = 2.0 * total as f64;
    let mut e = vec![0.0; k * k];
    for l in 0..k as u32 {
        for r in 0..k as u32 {
            let mass = if l == r {
                2.0 * j.get(l, l) as f64
            } else {
                j.get(l, r) as f64
            };
            e[l as usize * k + r as usize] = mass / denom;
        }
    }
    let mut a = vec![0.0; k];
    for l in 0..k {
        a[l] = e[l * k..(l + 1) * k].iter().sum();
    }
    Ok(MixingMatrix {
        color_count: k as u32,
        e,
        a,
    })
}

/// Discrete-attribute assortativity of vertex colors over edge endpoints:
/// `(sum_l e[l][l] - sum_l a[l]^2) / (1 - sum_l a[l]^2)`.
pub fn color_assortativity(g: &ColoredMultigraph) -> Result<f64, MetricsError> {
    let m = mixing_matrix(g)?;
    let k = m.color_count;
    let trace: f64 = (0..k).map(|l| m.e_at(l, l)).sum();
    let a2: f64 = m.a.iter().map(|x| x * x).sum();
    let denom = 1.0 - a2;
    if denom <= 0.0 {
        return Err(MetricsError::UndefinedColorAssortativity);
    }
    Ok((trace - a2) / denom)
}

/// Pearson correlation of endpoint degrees over edge instances. Every
/// non-loop instance contributes both orientations; every self-loop
/// instance contributes `(d(u), d(u))` twice.
pub fn degree_assortativity(g: &ColoredMultigraph) -> Result<f64, MetricsError> {
    if g.instance_total() < 2 {
        return Err(MetricsError::TooFewInstances {
            needed: 2,
            got: g.instance_total(),
        });
    }
    let mut n = 0.0f64;
    let mut sx = 0.0f64;
    let mut sxx = 0.0f64;
    let mut sxy = 0.0f64;
    // Sorted order keeps the float accumulation, and so the reported
    // value, a pure function of the graph value.
    for ((u, w), mult) in g.multiedges_sorted() {
        let m = f64::from(mult);
        let du = f64::from(g.degree(u));
        let dw = f64::from(g.degree(w));
        n += 2.0 * m;
        sx += m * (du + dw);
        sxx += m * (du * du + dw * dw);
        sxy += 2.0 * m * du * dw;
    }
    let mean = sx / n;
    let var = sxx / n - mean * mean;
    if var <= 0.0 {
        return Err(MetricsError::UndefinedDegreeAssortativity);
    }
    Ok((sxy / n - mean * mean) / var)
}

/// `|sampled - observed| / |observed|`.
pub fn relative_error(observed: f64, sampled: f64) -> Result<f64, MetricsError> {
    if observed == 0.0 {
        return Err(MetricsError::UndefinedRelativeError);
    }
    Ok((sampled - observed).abs() / observed.abs())
}

/// True iff the two graphs are members of the same null set: same vertices
/// and coloring, identical degree sequence, identical joint color matrix.
pub fn same_ensemble(g: &ColoredMultigraph, h: &ColoredMultigraph) -> Result<bool, MetricsError> {
    if g.vertex_count() != h.vertex_count() {
        return Err(MetricsError::GraphMismatch("different vertex counts"));
    }
    if g.colors() != h.colors() {
        return Err(MetricsError::GraphMismatch("different colorings"));
    }
    Ok(g.degrees() == h.degrees() && jcm(g) == jcm(h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::enumerate_swaps_pair;

    fn g(colors: &[u32], edges: &[(u32, u32, u32)]) -> ColoredMultigraph {
        ColoredMultigraph::build(colors, edges).unwrap()
    }

    /// Literal reference: expand every instance into its two orientation
    /// samples and run a two-pass Pearson correlation.
    fn degree_assortativity_naive(gr: &ColoredMultigraph) -> f64 {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for ((u, w), m) in gr.multiedges() {
            for _ in 0..m {
                xs.push(f64::from(gr.degree(u)));
                ys.push(f64::from(gr.degree(w)));
                xs.push(f64::from(gr.degree(w)));
                ys.push(f64::from(gr.degree(u)));
            }
        }
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let mut cov = 0.0;
        let mut vx = 0.0;
        let mut vy = 0.0;
        for i in 0..xs.len() {
            cov += (xs[i] - mx) * (ys[i] - my);
            vx += (xs[i] - mx) * (xs[i] - mx);
            vy += (ys[i] - my) * (ys[i] - my);
        }
        cov / (vx.sqrt() * vy.sqrt())
    }

    #[test]
    fn perfectly_assortative_two_colors() {
        let gr = g(&[0, 0, 1, 1], &[(0, 1, 2), (2, 3, 1)]);
        assert!((color_assortativity(&gr).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fully_bichrome_equal_marginals() {
        let gr = g(&[0, 1, 0, 1], &[(0, 1, 1), (2, 3, 1), (0, 3, 1), (1, 2, 1)]);
        assert!((color_assortativity(&gr).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_color_assortativity_undefined() {
        let gr = g(&[0, 0], &[(0, 1, 2)]);
        assert_eq!(
            color_assortativity(&gr).unwrap_err(),
            MetricsError::UndefinedColorAssortativity
        );
    }

    #[test]
    fn mixing_matrix_sums_to_one() {
        let gr = g(&[0, 1, 2, 1], &[(0, 0, 1), (0, 1, 2), (1, 2, 1), (2, 3, 3)]);
        let m = mixing_matrix(&gr).unwrap();
        let total: f64 = m.e.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        for l in 0..m.color_count() {
            for r in 0..m.color_count() {
                assert_eq!(m.e_at(l, r), m.e_at(r, l));
            }
            let marg: f64 = (0..m.color_count()).map(|r| m.e_at(l, r)).sum();
            assert!((marg - m.a[l as usize]).abs() < 1e-15);
        }
    }

    #[test]
    fn star_degree_assortativity() {
        let gr = g(&[0, 0, 0, 0], &[(0, 1, 1), (0, 2, 1), (0, 3, 1)]);
        assert!((degree_assortativity(&gr).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn regular_graph_degree_assortativity_undefined() {
        let gr = g(&[0, 0, 0], &[(0, 1, 1), (1, 2, 1), (0, 2, 1)]);
        assert_eq!(
            degree_assortativity(&gr).unwrap_err(),
            MetricsError::UndefinedDegreeAssortativity
        );
    }

    #[test]
    fn degree_assortativity_matches_naive_reference() {
        let graphs = [
            g(&[0, 1, 0, 1, 2], &[(0, 1, 2), (1, 2, 1), (2, 3, 1), (3, 4, 2), (0, 0, 1)]),
            g(&[0, 0, 0, 0], &[(0, 1, 1), (0, 2, 2), (0, 3, 1), (2, 3, 1)]),
            g(&[0, 1], &[(0, 0, 2), (0, 1, 3)]),
        ];
        for gr in &graphs {
            let fast = degree_assortativity(gr).unwrap();
            let naive = degree_assortativity_naive(gr);
            assert!((fast - naive).abs() < 1e-12, "fast={fast} naive={naive}");
        }
    }

    #[test]
    fn relative_error_examples() {
        assert_eq!(relative_error(0.5, 0.5).unwrap(), 0.0);
        assert_eq!(relative_error(1.0, 0.0).unwrap(), 1.0);
        assert!((relative_error(0.95, 0.05).unwrap() - 0.9473684210526315).abs() < 1e-12);
        assert_eq!(
            relative_error(0.0, 1.0).unwrap_err(),
            MetricsError::UndefinedRelativeError
        );
    }

    #[test]
    fn same_ensemble_identity_and_swaps() {
        let gr = g(&[0, 0, 1, 1], &[(0, 1, 1), (2, 3, 1), (0, 2, 1), (1, 3, 1)]);
        assert!(same_ensemble(&gr, &gr).unwrap());

        // A color-preserving swap keeps ensemble membership, a breaking one
        // does not.
        for p in enumerate_swaps_pair(&gr, (0, 2), (1, 3)) {
            if p.is_noop {
                continue;
            }
            let mut h = gr.clone();
            h.apply_swap(&p.removed, &p.inserted);
            assert_eq!(same_ensemble(&gr, &h).unwrap(), p.is_jdes);
        }
    }

    #[test]
    fn same_ensemble_rejects_mismatched_vertices() {
        let a = g(&[0, 0], &[(0, 1, 1)]);
        let b = g(&[0, 0, 0], &[(0, 1, 1)]);
        assert!(same_ensemble(&a, &b).is_err());
        let c = g(&[0, 1], &[(0, 1, 1)]);
        assert!(same_ensemble(&a, &c).is_err());
    }

    #[test]
    fn equal_jcm_implies_equal_color_assortativity() {
        // Two ensemble mates must agree bit for bit, because the statistic
        // is a function of the color matrix and instance count alone.
        let a = g(&[0, 0, 1], &[(0, 1, 1), (0, 2, 1), (1, 2, 1)]);
        let b = g(&[0, 0, 1], &[(0, 0, 1), (1, 2, 2)]);
        assert!(same_ensemble(&a, &b).unwrap());
        assert_eq!(
            color_assortativity(&a).unwrap(),
            color_assortativity(&b).unwrap()
        );
    }
}
