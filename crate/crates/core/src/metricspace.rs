//! Finite metric spaces stored as dense distance matrices.
//!
//! A [`FiniteMetricSpace`] can only be built from a matrix that passes
//! [`validate_matrix`], so every value of the type satisfies the metric axioms
//! (up to [`TAU_METRIC`] on the triangle inequality). Distances between distinct
//! points are strictly positive; semi-metrics are rejected.

use serde::Serialize;

use crate::error::{GhError, Result};

/// Slack allowed on the triangle inequality when validating a matrix.
pub const TAU_METRIC: f64 = 1e-9;

/// Tolerance for equality assertions between computed distances.
pub const TAU_EQ: f64 = 1e-9;

/// Largest space for which the self-bijection search computing `e(X)` is run.
pub const E_SEARCH_BUDGET: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMetricSpace {
    n: usize,
    d: Vec<f64>,
    labels: Option<Vec<String>>,
}

/// A single failed metric axiom, with the offending indices.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NonZeroDiagonal {
        i: usize,
        value: f64,
    },
    Asymmetric {
        i: usize,
        j: usize,
    },
    NonPositive {
        i: usize,
        j: usize,
        value: f64,
    },
    /// `d[i][j] + d[j][k] < d[i][k]` beyond tolerance.
    Triangle {
        i: usize,
        j: usize,
        k: usize,
        deficit: f64,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::NonZeroDiagonal { i, value } => write!(f, "d[{i}][{i}] = {value} is not zero"),
            Violation::Asymmetric { i, j } => write!(f, "d[{i}][{j}] != d[{j}][{i}]"),
            Violation::NonPositive { i, j, value } => {
                write!(f, "d[{i}][{j}] = {value} is not positive")
            }
            Violation::Triangle { i, j, k, deficit } => write!(
                f,
                "triangle inequality fails at ({i},{j},{k}): d[{i}][{j}] + d[{j}][{k}] falls short of d[{i}][{k}] by {deficit}"
            ),
        }
    }
}

/// Result of checking a matrix against the metric axioms. Empty means valid.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationVerdict {
    pub violations: Vec<Violation>,
}

impl ValidationVerdict {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that `rows` is a non-empty square matrix of finite numbers.
fn check_structure(rows: &[Vec<f64>]) -> Result<()> {
    let n = rows.len();
    if n == 0 {
        return Err(GhError::structural("matrix has no rows"));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(GhError::structural(format!(
                "row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        if let Some(j) = row.iter().position(|x| !x.is_finite()) {
            return Err(GhError::structural(format!(
                "entry ({i},{j}) is not a finite number"
            )));
        }
    }
    Ok(())
}

fn axiom_violations(n: usize, at: impl Fn(usize, usize) -> f64, tol: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    for i in 0..n {
        let value = at(i, i);
        if value != 0.0 {
            out.push(Violation::NonZeroDiagonal { i, value });
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (at(i, j) - at(j, i)).abs() > tol {
                out.push(Violation::Asymmetric { i, j });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let value = at(i, j);
            if i != j && value <= 0.0 {
                out.push(Violation::NonPositive { i, j, value });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in (i + 1)..n {
                if j == i || j == k {
                    continue;
                }
                let deficit = at(i, k) - at(i, j) - at(j, k);
                if deficit > tol {
                    out.push(Violation::Triangle { i, j, k, deficit });
                }
            }
        }
    }
    out
}

/// Validates a raw matrix with the default tolerance.
///
/// Structural problems (ragged rows, NaN or infinite entries, no rows) are
/// returned as `Err`; axiom violations are listed in the verdict.
pub fn validate_matrix(rows: &[Vec<f64>]) -> Result<ValidationVerdict> {
    validate_matrix_with_tolerance(rows, TAU_METRIC)
}

pub fn validate_matrix_with_tolerance(rows: &[Vec<f64>], tol: f64) -> Result<ValidationVerdict> {
    check_structure(rows)?;
    Ok(ValidationVerdict {
        violations: axiom_violations(rows.len(), |i, j| rows[i][j], tol),
    })
}

/// Re-checks an existing space. Always valid for spaces built through the
/// public constructors; useful after deserialization into other tools.
pub fn validate(space: &FiniteMetricSpace) -> ValidationVerdict {
    ValidationVerdict {
        violations: axiom_violations(space.n, |i, j| space.dist(i, j), TAU_METRIC),
    }
}

impl FiniteMetricSpace {
    /// Builds a space from a row-major matrix, rejecting anything that is not a metric.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_tolerance(rows, TAU_METRIC)
    }

    pub fn with_tolerance(rows: Vec<Vec<f64>>, tol: f64) -> Result<Self> {
        let verdict = validate_matrix_with_tolerance(&rows, tol)?;
        if !verdict.is_valid() {
            let listed: Vec<String> = verdict.violations.iter().map(|v| v.to_string()).collect();
            return Err(GhError::Domain(format!(
                "matrix is not a metric: {}",
                listed.join("; ")
            )));
        }
        let n = rows.len();
        Ok(Self {
            n,
            d: rows.into_iter().flatten().collect(),
            labels: None,
        })
    }

    /// Builds an `n`-point space whose distance between `i != j` is `f(i, j)`.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { f(i, j) }).collect())
            .collect();
        Self::new(rows)
    }

    /// Points on the real line with the absolute-difference metric.
    pub fn from_line(points: &[f64]) -> Result<Self> {
        Self::from_fn(points.len(), |i, j| (points[i] - points[j]).abs())
    }

    /// The one-distance space: `n` points, all pairwise distances 1.
    pub fn one_distance(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(GhError::domain("a metric space needs at least one point"));
        }
        Self::from_fn(n, |_, _| 1.0)
    }

    /// The one-point space.
    pub fn point() -> Self {
        Self {
            n: 1,
            d: vec![0.0],
            labels: None,
        }
    }

    /// Wraps a flat matrix that the caller has already validated.
    pub(crate) fn from_flat_unchecked(n: usize, d: Vec<f64>) -> Self {
        debug_assert_eq!(d.len(), n * n);
        Self { n, d, labels: None }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(GhError::structural(format!(
                "{} labels given for {} points",
                labels.len(),
                self.n
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.d[i * self.n..(i + 1) * self.n]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// Largest distance; 0 for the one-point space.
    pub fn diameter(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }

    /// Largest distance from point `i`.
    pub fn eccentricity(&self, i: usize) -> f64 {
        self.row(i).iter().copied().fold(0.0, f64::max)
    }

    /// Smallest distance between distinct points, or `None` for one point.
    pub fn min_distance(&self) -> Option<(f64, (usize, usize))> {
        let mut best: Option<(f64, (usize, usize))> = None;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let v = self.dist(i, j);
                if best.is_none_or(|(b, _)| v < b) {
                    best = Some((v, (i, j)));
                }
            }
        }
        best
    }

    /// The same point set relabelled: point `k` of the result is point `order[k]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        check_permutation(order, self.n)?;
        let n = self.n;
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                d[i * n + j] = self.dist(order[i], order[j]);
            }
        }
        let labels = self
            .labels
            .as_ref()
            .map(|l| order.iter().map(|&k| l[k].clone()).collect());
        Ok(Self { n, d, labels })
    }

    /// The subspace on the given points, in the given order.
    pub fn subspace(&self, points: &[usize]) -> Result<Self> {
        if points.is_empty() {
            return Err(GhError::domain("subspace needs at least one point"));
        }
        check_indices(points, self.n)?;
        let mut seen = vec![false; self.n];
        for &p in points {
            if std::mem::replace(&mut seen[p], true) {
                return Err(GhError::domain(format!("point {p} listed twice")));
            }
        }
        let m = points.len();
        let d = points
            .iter()
            .flat_map(|&i| points.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.dist(i, j))
            .collect();
        Ok(Self::from_flat_unchecked(m, d))
    }
}

pub(crate) fn check_indices(points: &[usize], n: usize) -> Result<()> {
    match points.iter().find(|&&p| p >= n) {
        Some(p) => Err(GhError::structural(format!(
            "point index {p} out of range for a {n}-point space"
        ))),
        None => Ok(()),
    }
}

pub(crate) fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    if order.len() != n {
        return Err(GhError::structural(format!(
            "permutation has length {}, expected {n}",
            order.len()
        )));
    }
    let mut seen = vec![false; n];
    for &k in order {
        if k >= n || std::mem::replace(&mut seen[k], true) {
            return Err(GhError::structural(format!(
                "{order:?} is not a permutation"
            )));
        }
    }
    Ok(())
}

/// Hausdorff distance between two non-empty subsets of the same space.
pub fn hausdorff(space: &FiniteMetricSpace, a: &[usize], b: &[usize]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(GhError::domain(
            "Hausdorff distance needs non-empty subsets",
        ));
    }
    check_indices(a, space.n())?;
    check_indices(b, space.n())?;
    let directed = |from: &[usize], to: &[usize]| {
        from.iter()
            .map(|&x| {
                to.iter()
                    .map(|&y| space.dist(x, y))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    Ok(directed(a, b).max(directed(b, a)))
}

pub fn diameter(space: &FiniteMetricSpace) -> f64 {
    space.diameter()
}

/// Multiplies every distance by `lambda`. Scaling by zero gives the one-point space.
pub fn scale(space: &FiniteMetricSpace, lambda: f64) -> Result<FiniteMetricSpace> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(GhError::domain(format!(
            "scale factor must be a finite nonnegative number, got {lambda}"
        )));
    }
    if lambda == 0.0 {
        return Ok(FiniteMetricSpace::point());
    }
    Ok(FiniteMetricSpace {
        n: space.n,
        d: space.d.iter().map(|x| x * lambda).collect(),
        labels: space.labels.clone(),
    })
}

/// Entrywise `alpha * d1 + beta * d2` on a common point set.
pub fn combine(
    alpha: f64,
    d1: &FiniteMetricSpace,
    beta: f64,
    d2: &FiniteMetricSpace,
) -> Result<FiniteMetricSpace> {
    if d1.n != d2.n {
        return Err(GhError::domain(format!(
            "cannot combine metrics on {} and {} points",
            d1.n, d2.n
        )));
    }
    if !(alpha >= 0.0 && beta >= 0.0) || !(alpha + beta > 0.0) || !(alpha + beta).is_finite() {
        return Err(GhError::domain(format!(
            "coefficients must be nonnegative and not both zero, got {alpha} and {beta}"
        )));
    }
    let d =
        d1.d.iter()
            .zip(&d2.d)
            .map(|(x, y)| alpha * x + beta * y)
            .collect();
    Ok(FiniteMetricSpace {
        n: d1.n,
        d,
        labels: d1.labels.clone(),
    })
}

/// `dis f` for a self-map given as `f[i]`: the largest change of a distance.
pub fn self_map_distortion(space: &FiniteMetricSpace, f: &[usize]) -> Result<f64> {
    check_permutation(f, space.n)?;
    let mut worst: f64 = 0.0;
    for i in 0..space.n {
        for j in (i + 1)..space.n {
            worst = worst.max((space.dist(i, j) - space.dist(f[i], f[j])).abs());
        }
    }
    Ok(worst)
}

/// The characteristics `s`, `t`, `e` of a space with their witnesses.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenericityReport {
    pub n: usize,
    /// Smallest distance between distinct points.
    pub s: f64,
    pub s_witness: (usize, usize),
    /// Smallest triangle excess `|xy| + |yz| - |xz|` over pairwise distinct points.
    pub t: f64,
    pub t_witness: (usize, usize, usize),
    /// Smallest distortion of a non-identity self-bijection; `None` when the
    /// space is larger than the search budget.
    pub e: Option<f64>,
    pub e_witness: Option<Vec<usize>>,
    pub diam: f64,
    /// True only when `s`, `t` and a computed `e` are all positive.
    pub is_generic: bool,
}

/// Computes `s`, `t` and `e` with the default search budget.
pub fn characteristics(space: &FiniteMetricSpace) -> Result<GenericityReport> {
    characteristics_with_budget(space, E_SEARCH_BUDGET)
}

pub fn characteristics_with_budget(
    space: &FiniteMetricSpace,
    e_budget: usize,
) -> Result<GenericityReport> {
    let n = space.n;
    if n < 3 {
        return Err(GhError::domain(format!(
            "s, t and e are defined for at least 3 points, got {n}"
        )));
    }
    let (s, s_witness) = space.min_distance().expect("n >= 3");

    let mut t = f64::INFINITY;
    let mut t_witness = (0, 0, 0);
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                if x == y || y == z || x == z {
                    continue;
                }
                let excess = space.dist(x, y) + space.dist(y, z) - space.dist(x, z);
                if excess < t {
                    t = excess;
                    t_witness = (x, y, z);
                }
            }
        }
    }

    let (e, e_witness) = if n <= e_budget {
        let (e, w) = asymmetry(space);
        (Some(e), Some(w))
    } else {
        (None, None)
    };

    Ok(GenericityReport {
        n,
        s,
        s_witness,
        t,
        t_witness,
        e,
        e_witness,
        diam: space.diameter(),
        is_generic: s > 0.0 && t > 0.0 && e.is_some_and(|e| e > 0.0),
    })
}

/// Minimum distortion over non-identity permutations, with the
/// lexicographically first minimizer.
///
/// Depth-first over permutations in lexicographic order; a prefix is dropped
/// as soon as its partial distortion reaches the incumbent.
fn asymmetry(space: &FiniteMetricSpace) -> (f64, Vec<usize>) {
    struct Search<'a> {
        space: &'a FiniteMetricSpace,
        perm: Vec<usize>,
        used: Vec<bool>,
        best: f64,
        best_perm: Vec<usize>,
    }

    impl Search<'_> {
        fn descend(&mut self, pos: usize, partial: f64, identity_so_far: bool) {
            let n = self.space.n;
            if pos == n {
                if !identity_so_far {
                    self.best = partial;
                    self.best_perm.clone_from(&self.perm);
                }
                return;
            }
            for v in 0..n {
                if self.used[v] {
                    continue;
                }
                let mut worst = partial;
                for p in 0..pos {
                    let gap = (self.space.dist(p, pos) - self.space.dist(self.perm[p], v)).abs();
                    worst = worst.max(gap);
                    if worst >= self.best {
                        break;
                    }
                }
                if worst >= self.best {
                    continue;
                }
                self.used[v] = true;
                self.perm[pos] = v;
                self.descend(pos + 1, worst, identity_so_far && v == pos);
                self.used[v] = false;
            }
        }
    }

    let n = space.n;
    let mut search = Search {
        space,
        perm: vec![0; n],
        used: vec![false; n],
        best: f64::INFINITY,
        best_perm: Vec::new(),
    };
    search.descend(0, 0.0, true);
    (search.best, search.best_perm)
}
