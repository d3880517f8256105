//! Neighbourhoods of totally discrete spaces.
//!
//! Near an anchor `M` with `s(M) > 0`, every low-distortion correspondence
//! `M -> X` cuts `X` into the same blocks (the canonical partition), and
//! low-distortion correspondences between two such neighbours respect the
//! blocks. When `M` is also totally asymmetric, the canonical projection is
//! an isometry on a small ball around `M`'s distance vector. The harnesses
//! here check those statements on concrete inputs; a failed check is reported
//! as data rather than a panic.

use rand::Rng;
use serde::Serialize;

use crate::cone::{
    distance_vector, half_sup_dist, in_cone, in_cone_interior, project, DistanceVector, Enumeration,
};
use crate::correspondence::{distortion, low_distortion_correspondences, Correspondence};
use crate::error::{GhError, Result};
use crate::generic::seeded_rng;
use crate::ghdist::gh_exact;
use crate::metricspace::{characteristics, FiniteMetricSpace, GenericityReport, TAU_EQ};

/// Keeps automatically chosen radii strictly below `e(M)/8`.
pub const EPSILON_MARGIN: f64 = 1e-6;

/// Sampling box half-width is `2ε(1 - SAMPLING_SHRINK)`, which keeps every
/// sample strictly inside the open ball of radius `ε`.
pub const SAMPLING_SHRINK: f64 = 1e-6;

/// Rejection-sampling attempts allowed per requested sample.
pub const MAX_REJECTIONS_PER_SAMPLE: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CanonicalPartition {
    pub epsilon: f64,
    /// `blocks[i]` is `R(i)`, sorted.
    pub blocks: Vec<Vec<usize>>,
    pub witness: Correspondence,
    pub witness_distortion: f64,
    /// Set when `ε <= s(M)/4`: number of correspondences with distortion below
    /// `2ε`, all of which were checked to induce the same family of blocks
    /// (possibly labelled differently).
    pub low_distortion_count: Option<usize>,
    /// Set when additionally `ε < e(M)/4`: that correspondence is unique and optimal.
    pub correspondence_unique: Option<bool>,
}

impl CanonicalPartition {
    /// `block_of[x]` is the anchor point whose block contains `x`.
    pub fn block_of(&self) -> Vec<usize> {
        let n: usize = self.blocks.iter().map(Vec::len).sum();
        let mut out = vec![usize::MAX; n];
        for (i, block) in self.blocks.iter().enumerate() {
            for &x in block {
                out[x] = i;
            }
        }
        out
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(GhError::Domain(format!(
            "ε must be positive, got {epsilon}"
        )));
    }
    Ok(())
}

fn anchor_s(m: &FiniteMetricSpace) -> Result<f64> {
    if m.n() < 3 {
        return Err(GhError::Domain(format!(
            "the anchor needs at least 3 points, got {}",
            m.n()
        )));
    }
    Ok(m.min_distance().expect("n >= 3").0)
}

fn blocks_of(r: &Correspondence, anchor_size: usize) -> Vec<Vec<usize>> {
    (0..anchor_size).map(|i| r.image(&[i])).collect()
}

/// Finds the canonical partition of `x` with respect to `m` and checks its
/// defining properties.
///
/// Requires `ε <= s(M)/2` and `d_GH(M, X) < ε`. When `ε <= s(M)/4` every
/// correspondence with distortion below `2ε` is enumerated to confirm they
/// all induce the same family of blocks, and when also `ε < e(M)/4` that there is exactly
/// one of them.
pub fn canonical_partition(
    m: &FiniteMetricSpace,
    x: &FiniteMetricSpace,
    epsilon: f64,
) -> Result<CanonicalPartition> {
    check_epsilon(epsilon)?;
    let s = anchor_s(m)?;
    if epsilon > s / 2.0 {
        return Err(GhError::Domain(format!(
            "ε = {epsilon} exceeds s(M)/2 = {}",
            s / 2.0
        )));
    }
    let gh = gh_exact(m, x)?;
    if gh.distance >= epsilon {
        return Err(GhError::Domain(format!(
            "d_GH(M, X) = {} is not below ε = {epsilon}",
            gh.distance
        )));
    }
    let witness = gh.optimal;
    let witness_distortion = distortion(m, x, witness.relation())?;
    if witness_distortion >= 2.0 * epsilon {
        return Err(GhError::Internal(format!(
            "optimal correspondence has distortion {witness_distortion} >= 2ε"
        )));
    }
    let blocks = blocks_of(&witness, m.n());

    // disjoint and covering
    let mut owner = vec![None; x.n()];
    for (i, block) in blocks.iter().enumerate() {
        for &p in block {
            if let Some(j) = owner[p].replace(i) {
                return Err(GhError::TheoremViolation(format!(
                    "point {p} of X lies in the blocks of {j} and {i}"
                )));
            }
        }
    }
    if let Some(p) = owner.iter().position(Option::is_none) {
        return Err(GhError::TheoremViolation(format!(
            "point {p} of X is in no block"
        )));
    }
    for (i, block) in blocks.iter().enumerate() {
        for &a in block {
            for &b in block {
                if x.dist(a, b) >= 2.0 * epsilon {
                    return Err(GhError::TheoremViolation(format!(
                        "block {i} has diameter {} >= 2ε",
                        x.dist(a, b)
                    )));
                }
            }
            for (j, other) in blocks.iter().enumerate().filter(|&(j, _)| j != i) {
                for &b in other {
                    if (x.dist(a, b) - m.dist(i, j)).abs() >= 2.0 * epsilon {
                        return Err(GhError::TheoremViolation(format!(
                            "|x{a} x{b}| = {} is not within 2ε of |{i}{j}| = {}",
                            x.dist(a, b),
                            m.dist(i, j)
                        )));
                    }
                }
            }
        }
    }

    let mut low_distortion_count = None;
    let mut correspondence_unique = None;
    if epsilon <= s / 4.0 {
        let all = low_distortion_correspondences(m, x, 2.0 * epsilon)?;
        let unordered = |b: &[Vec<usize>]| {
            let mut b = b.to_vec();
            b.sort();
            b
        };
        let expected = unordered(&blocks);
        for r in &all {
            if unordered(&blocks_of(r, m.n())) != expected {
                return Err(GhError::TheoremViolation(format!(
                    "correspondence {:?} induces a different partition",
                    r.pairs().collect::<Vec<_>>()
                )));
            }
        }
        low_distortion_count = Some(all.len());
        let e = characteristics(m)?.e;
        if e.is_some_and(|e| epsilon < e / 4.0) {
            let unique = all.len() == 1 && all[0] == witness;
            if !unique {
                return Err(GhError::TheoremViolation(format!(
                    "{} correspondences have distortion below 2ε, expected exactly the optimal one",
                    all.len()
                )));
            }
            correspondence_unique = Some(true);
        }
    }

    Ok(CanonicalPartition {
        epsilon,
        blocks,
        witness,
        witness_distortion,
        low_distortion_count,
        correspondence_unique,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockDecomposition {
    /// Block `X_i` is matched with block `Y_{sigma[i]}`.
    pub sigma: Vec<usize>,
    /// Pairs of `R` whose left point lies in `X_i`.
    pub blocks: Vec<Vec<(usize, usize)>>,
    /// True when `e(M) > 8ε` was known, so `sigma` was required to be the identity.
    pub identity_required: bool,
}

/// Splits a correspondence `R` between two neighbours of `m` into
/// correspondences between matched blocks of their canonical partitions.
///
/// Requires `ε <= s(M)/8`, `d_GH(M, X) < ε`, `d_GH(M, Y) < ε` and `dis R < 4ε`.
pub fn block_decomposition(
    m: &FiniteMetricSpace,
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    epsilon: f64,
    r: &Correspondence,
) -> Result<BlockDecomposition> {
    check_epsilon(epsilon)?;
    let s = anchor_s(m)?;
    if epsilon > s / 8.0 {
        return Err(GhError::Domain(format!(
            "ε = {epsilon} exceeds s(M)/8 = {}",
            s / 8.0
        )));
    }
    let dis = distortion(x, y, r.relation())?;
    if dis >= 4.0 * epsilon {
        return Err(GhError::Domain(format!("dis R = {dis} is not below 4ε")));
    }
    let px = canonical_partition(m, x, epsilon)?;
    let py = canonical_partition(m, y, epsilon)?;
    let (bx, by) = (px.block_of(), py.block_of());

    let k = m.n();
    let mut sigma = vec![usize::MAX; k];
    for (a, b) in r.pairs() {
        let (i, j) = (bx[a], by[b]);
        if sigma[i] == usize::MAX {
            sigma[i] = j;
        } else if sigma[i] != j {
            return Err(GhError::TheoremViolation(format!(
                "block X_{i} is matched with both Y_{} and Y_{j}",
                sigma[i]
            )));
        }
    }
    let mut hit = vec![false; k];
    for &j in &sigma {
        if std::mem::replace(&mut hit[j], true) {
            return Err(GhError::TheoremViolation(format!(
                "block matching {sigma:?} is not a bijection"
            )));
        }
    }
    let mut blocks = vec![Vec::new(); k];
    for (a, b) in r.pairs() {
        blocks[bx[a]].push((a, b));
    }
    for (i, block) in blocks.iter().enumerate() {
        let covered: Vec<usize> = {
            let mut c: Vec<usize> = block.iter().map(|&(_, b)| b).collect();
            c.sort_unstable();
            c.dedup();
            c
        };
        if covered != py.blocks[sigma[i]] {
            return Err(GhError::TheoremViolation(format!(
                "R restricted to X_{i} does not cover Y_{}",
                sigma[i]
            )));
        }
    }
    let e = characteristics(m)?.e;
    let identity_required = e.is_some_and(|e| e > 0.0 && epsilon < e / 8.0);
    if identity_required && sigma.iter().enumerate().any(|(i, &j)| i != j) {
        return Err(GhError::TheoremViolation(format!(
            "block matching {sigma:?} is not the identity although e(M) > 8ε"
        )));
    }
    Ok(BlockDecomposition {
        sigma,
        blocks,
        identity_required,
    })
}

/// Replaces point `i` of `m` by `multiplicities[i]` points at mutual distance
/// `delta`, moving each distance between different clusters by an independent
/// uniform draw from `(-jitter, jitter)`. Points are listed cluster by cluster.
pub fn blow_up(
    m: &FiniteMetricSpace,
    multiplicities: &[usize],
    delta: f64,
    jitter: f64,
    seed: u64,
) -> Result<FiniteMetricSpace> {
    if multiplicities.len() != m.n() || multiplicities.contains(&0) {
        return Err(GhError::Domain(
            "need a positive multiplicity for every anchor point".into(),
        ));
    }
    let owner: Vec<usize> = multiplicities
        .iter()
        .enumerate()
        .flat_map(|(i, &k)| std::iter::repeat_n(i, k))
        .collect();
    let n = owner.len();
    let mut rng = seeded_rng(seed, 1);
    let mut rows = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in (a + 1)..n {
            let value = if owner[a] == owner[b] {
                delta
            } else if jitter > 0.0 {
                m.dist(owner[a], owner[b]) + rng.gen_range(-jitter..jitter)
            } else {
                m.dist(owner[a], owner[b])
            };
            rows[a][b] = value;
            rows[b][a] = value;
        }
    }
    FiniteMetricSpace::new(rows)
}

/// One failed check, with the vectors involved.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Counterexample {
    pub a: DistanceVector,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<DistanceVector>,
    pub deviation: f64,
    pub detail: String,
}

/// Parameters shared by the sampling harnesses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyOptions {
    pub samples: usize,
    pub seed: u64,
    /// Ball radius; chosen from the anchor's characteristics when `None`.
    pub epsilon: Option<f64>,
    /// Largest deviation still counted as equality.
    pub tau_eq: f64,
}

impl VerifyOptions {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            epsilon: None,
            tau_eq: TAU_EQ,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = Some(epsilon);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub check: String,
    pub pass: bool,
    /// Largest observed departure from the checked statement (0 when it holds exactly).
    pub max_deviation: f64,
    pub samples: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub anchor: GenericityReport,
    pub counterexamples: Vec<Counterexample>,
}

fn generic_anchor(m: &FiniteMetricSpace) -> Result<(GenericityReport, f64)> {
    let report = characteristics(m)?;
    let Some(e) = report.e else {
        return Err(GhError::Domain(format!(
            "e(M) was not computed for a {}-point anchor",
            m.n()
        )));
    };
    if !report.is_generic {
        return Err(GhError::Domain(format!(
            "anchor is not generic: s = {}, t = {}, e = {e}",
            report.s, report.t
        )));
    }
    Ok((report, e))
}

/// Draws a vector uniformly from a box around `w` that lies inside the open
/// half-sup ball of radius `epsilon`, keeping only vectors in the cone.
fn sample_near(w: &DistanceVector, epsilon: f64, rng: &mut impl Rng) -> Result<DistanceVector> {
    let half_width = 2.0 * epsilon * (1.0 - SAMPLING_SHRINK);
    for _ in 0..MAX_REJECTIONS_PER_SAMPLE {
        let mut v = w.clone();
        for c in v.coords_mut() {
            *c += rng.gen_range(-half_width..=half_width);
        }
        if half_sup_dist(&v, w)? < epsilon && in_cone(&v) {
            return Ok(v);
        }
    }
    Err(GhError::Generation(format!(
        "no cone vector within {epsilon} of the anchor after {MAX_REJECTIONS_PER_SAMPLE} draws"
    )))
}

/// Radius used by the local-isometry check: `min(s/8, e/8 (1 - margin))`.
pub fn local_isometry_radius(report: &GenericityReport) -> Option<f64> {
    let e = report.e?;
    Some((report.s / 8.0).min(e / 8.0 * (1.0 - EPSILON_MARGIN)))
}

/// Compares `d_GH(π(a), π(b))` with `|ab|` for one pair of vectors.
pub fn local_isometry_deviation(a: &DistanceVector, b: &DistanceVector) -> Result<(f64, f64)> {
    let gh = gh_exact(&project(a)?, &project(b)?)?.distance;
    let half_sup = half_sup_dist(a, b)?;
    Ok((gh, half_sup))
}

/// Samples pairs from the `ε`-ball around the anchor's distance vector
/// (inside the cone) and checks that the canonical projection preserves their
/// distance to within `options.tau_eq`.
pub fn verify_local_isometry(
    m: &FiniteMetricSpace,
    options: &VerifyOptions,
) -> Result<VerificationReport> {
    let VerifyOptions {
        samples,
        seed,
        epsilon,
        tau_eq,
    } = *options;
    let (anchor, e) = generic_anchor(m)?;
    let epsilon = match epsilon {
        Some(eps) => {
            check_epsilon(eps)?;
            if eps > anchor.s / 8.0 || eps >= e / 8.0 {
                return Err(GhError::Domain(format!(
                    "ε = {eps} must satisfy ε <= s/8 = {} and ε < e/8 = {}",
                    anchor.s / 8.0,
                    e / 8.0
                )));
            }
            eps
        }
        None => local_isometry_radius(&anchor).expect("e computed"),
    };
    let w = distance_vector(m, &Enumeration::identity(m.n()))?;
    let mut rng = seeded_rng(seed, 2);
    let mut max_deviation: f64 = 0.0;
    let mut counterexamples = Vec::new();
    for _ in 0..samples {
        let a = sample_near(&w, epsilon, &mut rng)?;
        let b = sample_near(&w, epsilon, &mut rng)?;
        let (gh, half_sup) = local_isometry_deviation(&a, &b)?;
        let deviation = (gh - half_sup).abs();
        max_deviation = max_deviation.max(deviation);
        if deviation > tau_eq {
            counterexamples.push(Counterexample {
                a,
                b: Some(b),
                deviation,
                detail: format!("d_GH = {gh}, half-sup distance = {half_sup}"),
            });
        }
    }
    Ok(VerificationReport {
        check: "local-isometry".into(),
        pass: counterexamples.is_empty(),
        max_deviation,
        samples,
        epsilon,
        seed,
        anchor,
        counterexamples,
    })
}

/// Radius used by the interiority check: `min(s/8, t/6, e/8 (1 - margin))`.
pub fn interiority_radius(report: &GenericityReport) -> Option<f64> {
    Some(local_isometry_radius(report)?.min(report.t / 6.0))
}

/// Checks one vector `v` with `|vw| < ε` against the interiority bounds:
/// it must be interior to the cone, every coordinate must exceed `s - 2ε` and
/// every triangle excess must exceed `t - 6ε`. Returns the shortfall, 0 when
/// all hold.
pub fn interior_shortfall(anchor: &GenericityReport, epsilon: f64, v: &DistanceVector) -> f64 {
    let coord_slack = v.min_coordinate().unwrap_or(f64::INFINITY) - (anchor.s - 2.0 * epsilon);
    let triangle_slack =
        v.min_triangle_excess().unwrap_or(f64::INFINITY) - (anchor.t - 6.0 * epsilon);
    let mut shortfall: f64 = 0.0;
    if coord_slack <= 0.0 {
        shortfall = shortfall.max(-coord_slack);
    }
    if triangle_slack <= 0.0 {
        shortfall = shortfall.max(-triangle_slack);
    }
    if !in_cone_interior(v) {
        let depth = v
            .min_coordinate()
            .into_iter()
            .chain(v.min_triangle_excess())
            .fold(f64::INFINITY, f64::min);
        shortfall = shortfall.max((-depth).max(f64::MIN_POSITIVE));
    }
    shortfall
}

/// Samples vectors in the `ε`-ball around the anchor's distance vector and
/// checks that each lies in the interior of the cone.
pub fn verify_interiority(
    m: &FiniteMetricSpace,
    options: &VerifyOptions,
) -> Result<VerificationReport> {
    let VerifyOptions {
        samples,
        seed,
        epsilon,
        ..
    } = *options;
    let (anchor, e) = generic_anchor(m)?;
    let epsilon = match epsilon {
        Some(eps) => {
            check_epsilon(eps)?;
            if eps > anchor.s / 8.0 || eps > anchor.t / 6.0 || eps >= e / 8.0 {
                return Err(GhError::Domain(format!(
                    "ε = {eps} must satisfy ε <= s/8 = {}, ε <= t/6 = {} and ε < e/8 = {}",
                    anchor.s / 8.0,
                    anchor.t / 6.0,
                    e / 8.0
                )));
            }
            eps
        }
        None => interiority_radius(&anchor).expect("e computed"),
    };
    let w = distance_vector(m, &Enumeration::identity(m.n()))?;
    let half_width = 2.0 * epsilon * (1.0 - SAMPLING_SHRINK);
    let mut rng = seeded_rng(seed, 3);
    let mut max_deviation: f64 = 0.0;
    let mut counterexamples = Vec::new();
    for _ in 0..samples {
        let mut v = w.clone();
        for c in v.coords_mut() {
            *c += rng.gen_range(-half_width..=half_width);
        }
        let shortfall = interior_shortfall(&anchor, epsilon, &v);
        max_deviation = max_deviation.max(shortfall);
        if shortfall > 0.0 {
            counterexamples.push(Counterexample {
                a: v,
                b: None,
                deviation: shortfall,
                detail: "vector near the anchor is not interior to the cone".into(),
            });
        }
    }
    Ok(VerificationReport {
        check: "interior".into(),
        pass: counterexamples.is_empty(),
        max_deviation,
        samples,
        epsilon,
        seed,
        anchor,
        counterexamples,
    })
}
