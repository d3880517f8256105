//! Constructors of generic finite metric spaces.
//!
//! A space is generic when `s`, `t` and `e` are all positive. Two sources are
//! provided: random perturbations of the one-distance space, and the metric of
//! a subdivided tournament graph with adjacent vertices at distance `1 + ε`
//! and all other pairs at distance 1. Genericity is always measured on the
//! output, never assumed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cone::pair_count;
use crate::error::{GhError, Result};
use crate::metricspace::{
    characteristics, characteristics_with_budget, scale, FiniteMetricSpace, GenericityReport,
    E_SEARCH_BUDGET,
};

/// Consecutive rejections after which [`perturbed_generic`] gives up.
pub const MAX_ATTEMPTS: usize = 1000;

/// Perturbations closer than this count as equal.
pub const DISTINCT_RESOLUTION: f64 = 1e-12;

/// Perturbation amplitude of the anchors built by [`scaled_generic_for`].
///
/// With amplitude `a` every triangle excess is at least `1 - 3a` and every
/// distance at most `1 + a`, so after scaling the anchor to `min(s, e) = 9d`
/// its triangle excess exceeds `9d (1 - 3a) / (1 + a)`. At `a = 1/6` that is
/// about `3.9d`, more than the `2d` an embedded translate can eat.
pub const ANCHOR_AMPLITUDE: f64 = 1.0 / 6.0;

/// A seeded random stream; distinct `stream` values give independent streams
/// from the same seed.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratedSpace {
    pub space: FiniteMetricSpace,
    pub report: GenericityReport,
    pub seed: u64,
    pub amplitude: f64,
    pub attempts: usize,
}

/// The one-distance space on `n` points with every distance moved by a
/// distinct uniform draw from `(-amplitude, amplitude)`.
pub fn perturbed_generic(n: usize, seed: u64, amplitude: f64) -> Result<GeneratedSpace> {
    if n < 3 {
        return Err(GhError::Domain(format!(
            "generic spaces need n >= 3, got {n}"
        )));
    }
    if n > E_SEARCH_BUDGET {
        return Err(GhError::Domain(format!(
            "genericity can only be verified for n <= {E_SEARCH_BUDGET}, got {n}"
        )));
    }
    if !(amplitude > 0.0 && amplitude <= 1.0 / 3.0) {
        return Err(GhError::Domain(format!(
            "amplitude must lie in (0, 1/3], got {amplitude}"
        )));
    }
    let mut rng = seeded_rng(seed, 0);
    for attempt in 1..=MAX_ATTEMPTS {
        let shifts: Vec<f64> = (0..pair_count(n))
            .map(|_| rng.gen_range(-amplitude..amplitude))
            .collect();
        let mut sorted = shifts.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted
            .windows(2)
            .any(|w| w[1] - w[0] <= DISTINCT_RESOLUTION)
        {
            continue;
        }
        let shift = |i: usize, j: usize| {
            let (i, j) = (i.min(j), i.max(j));
            shifts[crate::cone::pair_index(n, i, j)]
        };
        let Ok(space) = FiniteMetricSpace::from_fn(n, |i, j| 1.0 + shift(i, j)) else {
            continue;
        };
        let report = characteristics(&space)?;
        let accepted =
            report.s >= 1.0 - amplitude && report.t > 0.0 && report.e.is_some_and(|e| e > 0.0);
        if accepted {
            return Ok(GeneratedSpace {
                space,
                report,
                seed,
                amplitude,
                attempts: attempt,
            });
        }
    }
    Err(GhError::Generation(format!(
        "{MAX_ATTEMPTS} consecutive draws were rejected (n = {n}, seed = {seed})"
    )))
}

/// The subdivided tournament graph on an ordered base `{0..m-1}`: each base
/// pair `x < y` gets vertices `u, v, w` and edges `x-u, u-v, v-y, v-w`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShramovGraph {
    pub base_size: usize,
    pub vertex_count: usize,
    pub edges: Vec<(usize, usize)>,
    pub labels: Vec<String>,
}

impl ShramovGraph {
    /// Base vertices are `0..m`; the gadget of the `k`-th base pair (in
    /// lexicographic order) is `m + 3k` (`u`), `m + 3k + 1` (`v`), `m + 3k + 2` (`w`).
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(GhError::Domain(format!(
                "the base needs m >= 2 points, got {m}"
            )));
        }
        let mut labels: Vec<String> = (0..m).map(|x| format!("x{x}")).collect();
        let mut edges = Vec::new();
        for (x, y) in crate::cone::pairs(m) {
            let u = labels.len();
            let (v, w) = (u + 1, u + 2);
            for name in ["u", "v", "w"] {
                labels.push(format!("{name}({x},{y})"));
            }
            edges.extend([(x, u), (u, v), (v, y), (v, w)]);
        }
        Ok(Self {
            base_size: m,
            vertex_count: labels.len(),
            edges,
            labels,
        })
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertex_count];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.edges
            .iter()
            .any(|&(x, y)| (x, y) == (a, b) || (y, x) == (a, b))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShramovSpace {
    pub graph: ShramovGraph,
    pub space: FiniteMetricSpace,
    pub epsilon: f64,
    pub report: GenericityReport,
    /// Whether the graph has no non-trivial automorphism, when `e` was computed.
    /// Self-maps of this space have distortion 0 or `ε`, so this is `e > 0`.
    pub rigid: Option<bool>,
}

pub fn shramov_space(m: usize, epsilon: f64) -> Result<ShramovSpace> {
    shramov_space_with_budget(m, epsilon, E_SEARCH_BUDGET)
}

pub fn shramov_space_with_budget(m: usize, epsilon: f64, e_budget: usize) -> Result<ShramovSpace> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(GhError::Domain(format!(
            "ε must lie in (0, 1), got {epsilon}"
        )));
    }
    let graph = ShramovGraph::new(m)?;
    let n = graph.vertex_count;
    let mut adjacency = vec![false; n * n];
    for &(a, b) in &graph.edges {
        adjacency[a * n + b] = true;
        adjacency[b * n + a] = true;
    }
    let space = FiniteMetricSpace::from_fn(n, |i, j| {
        if adjacency[i * n + j] {
            1.0 + epsilon
        } else {
            1.0
        }
    })?
    .with_labels(graph.labels.clone())?;
    let report = characteristics_with_budget(&space, e_budget)?;
    Ok(ShramovSpace {
        rigid: report.e.map(|e| e > 0.0),
        graph,
        space,
        epsilon,
        report,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaledGeneric {
    pub space: FiniteMetricSpace,
    pub report: GenericityReport,
    pub raw_report: GenericityReport,
    pub lambda: f64,
    pub target_diam: f64,
    pub seed: u64,
    pub amplitude: f64,
}

/// A generic `n`-point space with `s > 8d` and `e > 8d`.
///
/// A perturbed one-distance space is scaled so that `min(s, e) = 9d`.
pub fn scaled_generic_for(target_diam: f64, n: usize, seed: u64) -> Result<ScaledGeneric> {
    if !(target_diam > 0.0 && target_diam.is_finite()) {
        return Err(GhError::Domain(format!(
            "target diameter must be positive and finite, got {target_diam}"
        )));
    }
    let raw = perturbed_generic(n, seed, ANCHOR_AMPLITUDE)?;
    let raw_e = raw.report.e.expect("perturbed_generic computes e");
    let lambda = 9.0 * target_diam / raw.report.s.min(raw_e);
    let space = scale(&raw.space, lambda)?;
    let report = characteristics(&space)?;
    let bound = 8.0 * target_diam;
    if !(report.s > bound && report.e.is_some_and(|e| e > bound)) {
        return Err(GhError::Internal(format!(
            "scaled anchor misses s, e > {bound}: s = {}, e = {:?}",
            report.s, report.e
        )));
    }
    Ok(ScaledGeneric {
        space,
        report,
        raw_report: raw.report,
        lambda,
        target_diam,
        seed,
        amplitude: ANCHOR_AMPLITUDE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metricspace::validate;

    #[test]
    fn perturbed_spaces_are_generic() {
        for seed in 0..20 {
            let g = perturbed_generic(5, seed, 1.0 / 3.0).unwrap();
            assert!(g.report.is_generic);
            assert!(g.report.s > 2.0 / 3.0);
            assert!(validate(&g.space).is_valid());
        }
    }

    #[test]
    fn perturbed_generic_is_deterministic() {
        let a = perturbed_generic(4, 11, 0.2).unwrap();
        let b = perturbed_generic(4, 11, 0.2).unwrap();
        assert_eq!(a.space, b.space);
        assert_ne!(a.space, perturbed_generic(4, 12, 0.2).unwrap().space);
    }

    #[test]
    fn perturbed_generic_preconditions() {
        assert!(matches!(
            perturbed_generic(2, 0, 0.1),
            Err(GhError::Domain(_))
        ));
        assert!(matches!(
            perturbed_generic(9, 0, 0.1),
            Err(GhError::Domain(_))
        ));
        assert!(perturbed_generic(4, 0, 0.5).is_err());
        assert!(perturbed_generic(4, 0, 0.0).is_err());
    }

    #[test]
    fn tiny_amplitude_still_gives_positive_e() {
        let g = perturbed_generic(3, 5, 1e-6).unwrap();
        let e = g.report.e.unwrap();
        assert!(e > 0.0 && e < 4e-6);
    }

    #[test]
    fn shramov_graph_shape() {
        for m in 2..=5 {
            let g = ShramovGraph::new(m).unwrap();
            let pairs = m * (m - 1) / 2;
            assert_eq!(g.vertex_count, m + 3 * pairs);
            assert_eq!(g.edges.len(), 4 * pairs);
            let deg = g.degrees();
            for k in 0..pairs {
                let u = m + 3 * k;
                assert_eq!((deg[u], deg[u + 1], deg[u + 2]), (2, 3, 1));
            }
        }
        assert!(ShramovGraph::new(1).is_err());
    }

    #[test]
    fn shramov_distances() {
        let s = shramov_space(2, 0.5).unwrap();
        assert_eq!(s.graph.vertex_count, 5);
        // x0 = 0, u = 2, v = 3
        assert_eq!(s.space.dist(0, 2), 1.5);
        assert_eq!(s.space.dist(0, 3), 1.0);
        assert_eq!(s.report.s, 1.0);
        assert_eq!(s.report.t, 0.5);
        assert_eq!(s.report.diam, 1.5);
        assert!(shramov_space(2, 1.0).is_err());
    }

    #[test]
    fn two_point_base_has_a_leaf_swap() {
        // v has the two leaves x1 and w; swapping them is an automorphism
        let s = shramov_space(2, 0.5).unwrap();
        assert_eq!(s.report.e, Some(0.0));
        assert_eq!(s.report.e_witness, Some(vec![0, 4, 2, 3, 1]));
        assert_eq!(s.rigid, Some(false));
        assert!(!s.report.is_generic);
    }

    #[test]
    fn three_point_base_is_rigid_with_a_larger_budget() {
        let s = shramov_space(3, 0.25).unwrap();
        assert_eq!(s.report.e, None);
        let s = shramov_space_with_budget(3, 0.25, 12).unwrap();
        assert_eq!(s.report.e, Some(0.25));
        assert_eq!(s.rigid, Some(true));
        assert!(s.report.is_generic);
    }

    #[test]
    fn scaled_anchor_bounds() {
        for seed in 0..5 {
            let g = scaled_generic_for(0.7, 4, seed).unwrap();
            assert!(g.report.s > 8.0 * 0.7);
            assert!(g.report.e.unwrap() > 8.0 * 0.7);
            assert!((g.report.s - g.lambda * g.raw_report.s).abs() < 1e-9);
            assert!((g.report.e.unwrap() - g.lambda * g.raw_report.e.unwrap()).abs() < 1e-9);
        }
        assert!(matches!(
            scaled_generic_for(0.0, 4, 0),
            Err(GhError::Domain(_))
        ));
    }
}
