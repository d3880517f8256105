//! Exact Gromov-Hausdorff distance between finite metric spaces.
//!
//! For finite spaces the distance is half the smallest distortion of a
//! correspondence. Two exact solvers are provided:
//!
//! * [`gh_oracle`] scans every correspondence (only for `|X| * |Y| <= 30`);
//! * [`gh_exact`] is a branch-and-bound search over star correspondences
//!   (inclusion-minimal ones), seeded with the diameter bounds
//!   `|diam X - diam Y| <= 2 d_GH <= max(diam X, diam Y)`.
//!
//! Both return the same minimized distortion bit for bit, since distortion is
//! a maximum over the same set of absolute differences.

use serde::Serialize;

use crate::correspondence::{
    distortion, distortion_unchecked, enumerate_correspondences, BitIter, Correspondence, Relation,
    MAX_FULL_ENUMERATION_BITS, MAX_STAR_SIDE,
};
use crate::error::{GhError, Result};
use crate::metricspace::{FiniteMetricSpace, TAU_EQ};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Oracle,
    StarSearch,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GhResult {
    pub distance: f64,
    pub optimal: Correspondence,
    pub nodes_explored: u64,
    pub method: Method,
}

/// Exhaustive minimum over all correspondences.
///
/// The witness is the first minimizer in increasing word order.
pub fn gh_oracle(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> Result<GhResult> {
    let (p, q) = (x.n(), y.n());
    if p * q > MAX_FULL_ENUMERATION_BITS {
        return Err(GhError::Resource(format!(
            "oracle needs |X|*|Y| <= {MAX_FULL_ENUMERATION_BITS}, got {p}*{q}"
        )));
    }
    let mut best: Option<(f64, Correspondence)> = None;
    let mut nodes = 0u64;
    for c in enumerate_correspondences(p, q)? {
        nodes += 1;
        let dis = distortion_unchecked(x, y, &c);
        if best.as_ref().is_none_or(|(b, _)| dis < *b) {
            best = Some((dis, c));
        }
    }
    let (dis, optimal) =
        best.ok_or_else(|| GhError::Internal("no correspondence enumerated".into()))?;
    Ok(GhResult {
        distance: dis / 2.0,
        optimal,
        nodes_explored: nodes,
        method: Method::Oracle,
    })
}

/// Exact distance with the default size limit of 8 points per side.
pub fn gh_exact(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> Result<GhResult> {
    gh_exact_with_limit(x, y, MAX_STAR_SIDE)
}

/// Shorthand for `gh_exact(x, y)?.distance`.
pub fn gh_distance(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> Result<f64> {
    Ok(gh_exact(x, y)?.distance)
}

pub fn gh_exact_with_limit(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    max_side: usize,
) -> Result<GhResult> {
    let limit = max_side.min(MAX_STAR_SIDE);
    if x.n() > limit || y.n() > limit {
        return Err(GhError::Resource(format!(
            "exact search is limited to {limit} points per side, got {} and {}",
            x.n(),
            y.n()
        )));
    }
    StarSearch::new(x, y).run()
}

struct StarSearch<'a> {
    x: &'a FiniteMetricSpace,
    y: &'a FiniteMetricSpace,
    /// Rows in branching order: decreasing eccentricity, then index.
    order: Vec<usize>,
    full: u64,
    lower: f64,
    /// Bound used until a witness exists; pruning is strict against it.
    initial_bound: f64,
    best: Option<(f64, u64)>,
    pairs: Vec<(usize, usize)>,
    nodes: u64,
    finished: bool,
}

impl<'a> StarSearch<'a> {
    fn new(x: &'a FiniteMetricSpace, y: &'a FiniteMetricSpace) -> Self {
        let mut order: Vec<usize> = (0..x.n()).collect();
        order.sort_by(|&a, &b| {
            x.eccentricity(b)
                .total_cmp(&x.eccentricity(a))
                .then(a.cmp(&b))
        });
        let (dx, dy) = (x.diameter(), y.diameter());
        let heuristic = eccentricity_matching(x, y);
        let initial_bound = dx
            .max(dy)
            .min(distortion_unchecked(x, y, heuristic.relation()));
        Self {
            x,
            y,
            order,
            full: u64::MAX >> (64 - y.n()),
            lower: (dx - dy).abs(),
            initial_bound,
            best: None,
            pairs: Vec::with_capacity(x.n() + y.n()),
            nodes: 0,
            finished: false,
        }
    }

    fn pruned(&self, value: f64) -> bool {
        match self.best {
            Some((b, _)) => value >= b,
            None => value > self.initial_bound,
        }
    }

    fn run(mut self) -> Result<GhResult> {
        self.descend(0, 0.0, 0, 0, 0);
        let (dis, word) = self
            .best
            .ok_or_else(|| GhError::Internal("star search found no correspondence".into()))?;
        let optimal = Correspondence::from_bits_unchecked(self.x.n(), self.y.n(), word);
        Ok(GhResult {
            distance: dis / 2.0,
            optimal,
            nodes_explored: self.nodes,
            method: Method::StarSearch,
        })
    }

    /// Largest distortion the pairs `(row, j), j in mask` add to the placed pairs.
    fn increment(&self, row: usize, mask: u64, bound: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for j in BitIter(mask) {
            for &(a, b) in &self.pairs {
                worst = worst.max((self.x.dist(a, row) - self.y.dist(b, j)).abs());
            }
            for j2 in BitIter(mask & !(u64::MAX >> (63 - j))) {
                worst = worst.max(self.y.dist(j, j2));
            }
            if worst > bound {
                break;
            }
        }
        worst
    }

    fn descend(&mut self, depth: usize, partial: f64, word: u64, used: u64, exclusive: u64) {
        self.nodes += 1;
        let p = self.x.n();
        if depth == p {
            // reached only with full column cover
            self.best = Some((partial, word));
            if partial <= self.lower {
                self.finished = true;
            }
            return;
        }
        let row = self.order[depth];
        let rows_after = p - 1 - depth;
        let bound = match self.best {
            Some((b, _)) => b,
            None => self.initial_bound,
        };

        let mut candidates: Vec<(f64, u64)> = Vec::new();
        for mask in 1..=self.full {
            let multi = mask.count_ones() >= 2;
            let allowed = if multi {
                mask & used == 0
            } else {
                mask & exclusive == 0
            };
            if !allowed {
                continue;
            }
            let new_exclusive = if multi { exclusive | mask } else { exclusive };
            let feasible = if rows_after == 0 {
                used | mask == self.full
            } else {
                new_exclusive != self.full
            };
            if !feasible {
                continue;
            }
            let value = partial.max(self.increment(row, mask, bound));
            if !self.pruned(value) {
                candidates.push((value, mask));
            }
        }
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        for (value, mask) in candidates {
            if self.finished {
                return;
            }
            if self.pruned(value) {
                continue;
            }
            let base = self.pairs.len();
            self.pairs.extend(BitIter(mask).map(|j| (row, j)));
            let multi = mask.count_ones() >= 2;
            self.descend(
                depth + 1,
                value,
                word | mask << (row * self.y.n()),
                used | mask,
                if multi { exclusive | mask } else { exclusive },
            );
            self.pairs.truncate(base);
        }
    }
}

/// Cheap correspondence used only to tighten the initial bound: match points
/// by eccentricity rank (a bijection when sizes agree), otherwise send every
/// point to the closest eccentricity on the other side.
fn eccentricity_matching(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> Correspondence {
    let (p, q) = (x.n(), y.n());
    let ex: Vec<f64> = (0..p).map(|i| x.eccentricity(i)).collect();
    let ey: Vec<f64> = (0..q).map(|j| y.eccentricity(j)).collect();
    let mut pairs = Vec::new();
    if p == q {
        let rank = |e: &[f64]| {
            let mut idx: Vec<usize> = (0..e.len()).collect();
            idx.sort_by(|&a, &b| e[a].total_cmp(&e[b]).then(a.cmp(&b)));
            idx
        };
        pairs.extend(rank(&ex).into_iter().zip(rank(&ey)));
    } else {
        let closest = |v: f64, e: &[f64]| {
            (0..e.len())
                .min_by(|&a, &b| (e[a] - v).abs().total_cmp(&(e[b] - v).abs()))
                .expect("non-empty space")
        };
        pairs.extend((0..p).map(|i| (i, closest(ex[i], &ey))));
        pairs.extend((0..q).map(|j| (closest(ey[j], &ex), j)));
    }
    Correspondence::from_pairs(p, q, &pairs).expect("eccentricity matching covers both sides")
}

/// The point `R_t` of the straight-line geodesic from `X` to `Y` through an
/// optimal correspondence `R`.
///
/// Points are the pairs of `R` in lexicographic order with distance
/// `(1 - t)|xx'| + t|yy'|`. Pairs at distance zero (only possible at the
/// endpoints) are merged, keeping the first pair of each class.
pub fn geodesic_point(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    r: &Correspondence,
    t: f64,
) -> Result<FiniteMetricSpace> {
    if !(0.0..=1.0).contains(&t) {
        return Err(GhError::Domain(format!("t must lie in [0, 1], got {t}")));
    }
    let dis = distortion(x, y, r.relation())?;
    let optimum = 2.0 * gh_exact(x, y)?.distance;
    if (dis - optimum).abs() > TAU_EQ {
        return Err(GhError::Domain(format!(
            "correspondence has distortion {dis} but the optimum is {optimum}"
        )));
    }
    Ok(blend(x, y, r.relation(), t))
}

const COLLAPSE_THRESHOLD: f64 = 1e-12;

fn blend(x: &FiniteMetricSpace, y: &FiniteMetricSpace, r: &Relation, t: f64) -> FiniteMetricSpace {
    let pairs: Vec<(usize, usize)> = r.pairs().collect();
    let dist =
        |a: (usize, usize), b: (usize, usize)| (1.0 - t) * x.dist(a.0, b.0) + t * y.dist(a.1, b.1);
    let mut reps: Vec<(usize, usize)> = Vec::new();
    for &pair in &pairs {
        if !reps
            .iter()
            .any(|&rep| dist(rep, pair) <= COLLAPSE_THRESHOLD)
        {
            reps.push(pair);
        }
    }
    let m = reps.len();
    let mut d = vec![0.0; m * m];
    for (i, &a) in reps.iter().enumerate() {
        for (j, &b) in reps.iter().enumerate() {
            if i != j {
                d[i * m + j] = dist(a, b);
            }
        }
    }
    let labels = reps.iter().map(|(a, b)| format!("({a},{b})")).collect();
    FiniteMetricSpace::from_flat_unchecked(m, d)
        .with_labels(labels)
        .expect("one label per point")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metricspace::{scale, validate};

    fn two(a: f64) -> FiniteMetricSpace {
        FiniteMetricSpace::new(vec![vec![0.0, a], vec![a, 0.0]]).unwrap()
    }

    #[test]
    fn identical_spaces_are_at_distance_zero() {
        let x = FiniteMetricSpace::from_line(&[0.0, 1.0, 3.0, 7.0]).unwrap();
        assert_eq!(gh_oracle(&x, &x).unwrap().distance, 0.0);
        assert_eq!(gh_exact(&x, &x).unwrap().distance, 0.0);
    }

    #[test]
    fn distance_to_a_point_is_half_the_diameter() {
        let x = FiniteMetricSpace::from_line(&[0.0, 1.0, 3.0, 7.0]).unwrap();
        let pt = FiniteMetricSpace::point();
        assert_eq!(gh_oracle(&x, &pt).unwrap().distance, 3.5);
        assert_eq!(gh_exact(&x, &pt).unwrap().distance, 3.5);
        assert_eq!(gh_exact(&pt, &x).unwrap().distance, 3.5);
    }

    #[test]
    fn two_point_spaces() {
        // the 7 correspondences: bijections have dis 2, the rest dis 3
        let r = gh_oracle(&two(1.0), &two(3.0)).unwrap();
        assert_eq!(r.distance, 1.0);
        assert!(r.optimal.is_bijection());
        assert_eq!(r.nodes_explored, 7);
        assert_eq!(gh_exact(&two(1.0), &two(3.0)).unwrap().distance, 1.0);
    }

    #[test]
    fn witness_realizes_the_distance() {
        let x = FiniteMetricSpace::from_line(&[0.0, 2.0, 3.0]).unwrap();
        let y = FiniteMetricSpace::from_line(&[0.0, 1.0, 5.0, 6.0]).unwrap();
        for r in [gh_oracle(&x, &y).unwrap(), gh_exact(&x, &y).unwrap()] {
            let dis = distortion(&x, &y, r.optimal.relation()).unwrap();
            assert_eq!(2.0 * r.distance, dis);
        }
    }

    #[test]
    fn scaled_copy() {
        let x = FiniteMetricSpace::from_line(&[0.0, 2.0, 3.0]).unwrap();
        let r = gh_exact(&x, &scale(&x, 2.0).unwrap()).unwrap();
        assert!((r.distance - 1.5).abs() <= TAU_EQ);
    }

    #[test]
    fn limits() {
        let big = FiniteMetricSpace::one_distance(9).unwrap();
        assert!(matches!(gh_exact(&big, &big), Err(GhError::Resource(_))));
        let six = FiniteMetricSpace::one_distance(6).unwrap();
        assert!(matches!(gh_oracle(&six, &six), Err(GhError::Resource(_))));
        assert!(matches!(
            gh_exact_with_limit(&six, &six, 5),
            Err(GhError::Resource(_))
        ));
    }

    #[test]
    fn eight_point_spaces_are_tractable() {
        let x = FiniteMetricSpace::from_line(&[0.0, 1.0, 3.0, 4.5, 7.0, 8.0, 11.0, 13.0]).unwrap();
        let y = FiniteMetricSpace::one_distance(8).unwrap();
        let r = gh_exact(&x, &y).unwrap();
        let dis = distortion(&x, &y, r.optimal.relation()).unwrap();
        assert_eq!(2.0 * r.distance, dis);
        assert!(r.distance <= 13.0 / 2.0);
    }

    #[test]
    fn geodesic_midpoint() {
        let (x, y) = (two(1.0), two(3.0));
        let r = gh_exact(&x, &y).unwrap().optimal;
        let mid = geodesic_point(&x, &y, &r, 0.5).unwrap();
        assert_eq!(mid.to_rows(), vec![vec![0.0, 2.0], vec![2.0, 0.0]]);
        assert!(validate(&mid).is_valid());
    }

    #[test]
    fn geodesic_endpoints_collapse_to_the_ends() {
        let x = FiniteMetricSpace::from_line(&[0.0, 2.0, 3.0]).unwrap();
        let y = FiniteMetricSpace::from_line(&[0.0, 1.0, 5.0, 6.0]).unwrap();
        let r = gh_exact(&x, &y).unwrap().optimal;
        let start = geodesic_point(&x, &y, &r, 0.0).unwrap();
        let end = geodesic_point(&x, &y, &r, 1.0).unwrap();
        assert_eq!(gh_exact(&start, &x).unwrap().distance, 0.0);
        assert_eq!(start.n(), 3);
        assert_eq!(gh_exact(&end, &y).unwrap().distance, 0.0);
        assert_eq!(end.n(), 4);
    }

    #[test]
    fn geodesic_rejects_non_optimal_correspondences() {
        let (x, y) = (two(1.0), two(3.0));
        let full = Correspondence::from_pairs(2, 2, &[(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap();
        assert!(matches!(
            geodesic_point(&x, &y, &full, 0.5),
            Err(GhError::Domain(_))
        ));
        let r = gh_exact(&x, &y).unwrap().optimal;
        assert!(geodesic_point(&x, &y, &r, 1.5).is_err());
    }
}
