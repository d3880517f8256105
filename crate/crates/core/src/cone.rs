//! Distance vectors and the metric cone.
//!
//! An `n`-point space under an enumeration of its points is a vector in
//! `R^N`, `N = n(n-1)/2`, indexed by unordered pairs `ij` in lexicographic
//! order `(0,1), (0,2), ..., (0,n-1), (1,2), ...`. The metric cone `C_n` is the
//! set of vectors with positive coordinates satisfying every triangle
//! inequality.
//!
//! Two distances on vectors live here and must not be confused:
//! [`half_sup_dist`] (half the largest coordinate gap) is the metric on
//! `R^N` under which the canonical projection is a local isometry, while
//! [`sup_dist`] (the full gap) is the metric of the Kuratowski embedding.

use serde::{Deserialize, Serialize};

use crate::error::{GhError, Result};
use crate::metricspace::{check_permutation, FiniteMetricSpace, TAU_METRIC};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawVector")]
pub struct DistanceVector {
    n: usize,
    v: Vec<f64>,
}

#[derive(Deserialize)]
struct RawVector {
    n: usize,
    v: Vec<f64>,
}

impl TryFrom<RawVector> for DistanceVector {
    type Error = GhError;

    fn try_from(raw: RawVector) -> Result<Self> {
        DistanceVector::new(raw.n, raw.v)
    }
}

/// Number of unordered pairs of `n` points.
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Position of the pair `{i, j}` in the canonical order.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    debug_assert!(i != j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// All pairs `i < j` in canonical order.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
}

impl DistanceVector {
    pub fn new(n: usize, v: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(GhError::Domain("distance vectors need n >= 1".into()));
        }
        if v.len() != pair_count(n) {
            return Err(GhError::Structural(format!(
                "a vector for {n} points has {} coordinates, got {}",
                pair_count(n),
                v.len()
            )));
        }
        if let Some(k) = v.iter().position(|x| !x.is_finite()) {
            return Err(GhError::Structural(format!("coordinate {k} is not finite")));
        }
        Ok(Self { n, v })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            v: vec![0.0; pair_count(n)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> &[f64] {
        &self.v
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.v
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.v[pair_index(self.n, i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let k = pair_index(self.n, i, j);
        self.v[k] = value;
    }

    /// `self + other`, coordinatewise.
    pub fn translate(&self, other: &DistanceVector) -> Result<DistanceVector> {
        same_n(self, other)?;
        Ok(Self {
            n: self.n,
            v: self.v.iter().zip(&other.v).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scaled(&self, lambda: f64) -> DistanceVector {
        Self {
            n: self.n,
            v: self.v.iter().map(|a| a * lambda).collect(),
        }
    }

    /// Smallest `v_ij + v_jk - v_ik` over pairwise distinct `i, j, k`; `None` for `n < 3`.
    pub fn min_triangle_excess(&self) -> Option<f64> {
        let n = self.n;
        let mut best: Option<f64> = None;
        for i in 0..n {
            for j in 0..n {
                for k in (i + 1)..n {
                    if j == i || j == k {
                        continue;
                    }
                    let excess = self.get(i, j) + self.get(j, k) - self.get(i, k);
                    best = Some(best.map_or(excess, |b: f64| b.min(excess)));
                }
            }
        }
        best
    }

    pub fn min_coordinate(&self) -> Option<f64> {
        self.v.iter().copied().reduce(f64::min)
    }
}

fn same_n(v: &DistanceVector, w: &DistanceVector) -> Result<()> {
    if v.n != w.n {
        return Err(GhError::Domain(format!(
            "vectors for {} and {} points are not comparable",
            v.n, w.n
        )));
    }
    Ok(())
}

/// `|vw| = ½ max_ij |v_ij - w_ij|`.
pub fn half_sup_dist(v: &DistanceVector, w: &DistanceVector) -> Result<f64> {
    same_n(v, w)?;
    Ok(0.5
        * v.v
            .iter()
            .zip(&w.v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
}

/// Plain sup-metric `max_i |a_i - b_i|` on `R^n`.
pub fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Membership in `C_n`: positive coordinates and triangle inequalities up to [`TAU_METRIC`].
pub fn in_cone(v: &DistanceVector) -> bool {
    v.v.iter().all(|&x| x > 0.0) && v.min_triangle_excess().is_none_or(|t| t >= -TAU_METRIC)
}

/// Interior of `C_n`: coordinates and triangle excesses all exceed [`TAU_METRIC`].
pub fn in_cone_interior(v: &DistanceVector) -> bool {
    v.v.iter().all(|&x| x > TAU_METRIC) && v.min_triangle_excess().is_none_or(|t| t > TAU_METRIC)
}

/// A bijection from `{0..n-1}` onto the points of a space: `order[k]` is the
/// point numbered `k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Enumeration(Vec<usize>);

impl Enumeration {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        check_permutation(&order, order.len())?;
        Ok(Self(order))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

/// `ρ(ij) = |η(i) η(j)|`.
pub fn distance_vector(x: &FiniteMetricSpace, eta: &Enumeration) -> Result<DistanceVector> {
    if eta.0.len() != x.n() {
        return Err(GhError::Structural(format!(
            "enumeration of {} points used on a {}-point space",
            eta.0.len(),
            x.n()
        )));
    }
    let v = pairs(x.n())
        .map(|(i, j)| x.dist(eta.0[i], eta.0[j]))
        .collect();
    Ok(DistanceVector { n: x.n(), v })
}

/// The canonical projection: the `n`-point space with `|ij| = v_ij`.
pub fn project(v: &DistanceVector) -> Result<FiniteMetricSpace> {
    if !in_cone(v) {
        return Err(GhError::Domain("vector is not in the metric cone".into()));
    }
    let n = v.n;
    let mut d = vec![0.0; n * n];
    for (k, (i, j)) in pairs(n).enumerate() {
        d[i * n + j] = v.v[k];
        d[j * n + i] = v.v[k];
    }
    Ok(FiniteMetricSpace::from_flat_unchecked(n, d))
}

/// Kuratowski images `f(x_i)_j = |x_i x_j|`, one row per point. Under
/// [`sup_dist`] the rows are at exactly the original distances.
pub fn kuratowski(x: &FiniteMetricSpace) -> Vec<Vec<f64>> {
    x.to_rows()
}
