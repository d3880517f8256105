//! Isometric embedding of a finite metric space into the Gromov-Hausdorff
//! class of `n`-point spaces.
//!
//! For `X = {x_1..x_n}` with diameter `d`, a generic anchor `M` with
//! `s(M), e(M) > 8d` is generated. Point `x_i` goes to the vector `a_i` obtained
//! from `M`'s distance vector by adding `2|x_i x_j|` to coordinate
//! `(j, j+1 mod n)` for every `j`. The half-sup distance between `a_i` and `a_k`
//! equals the Kuratowski distance `|x_i x_k|`, every `a_i` stays in the ball on
//! which projection is isometric, and so `d_GH(π(a_i), π(a_k)) = |x_i x_k|`.

use std::fmt;

use serde::Serialize;

use crate::cone::{
    distance_vector, half_sup_dist, in_cone, pair_index, project, DistanceVector, Enumeration,
};
use crate::error::{GhError, Result};
use crate::generic::{scaled_generic_for, ScaledGeneric};
use crate::ghdist::gh_exact;
use crate::metricspace::{FiniteMetricSpace, E_SEARCH_BUDGET, TAU_EQ};

/// Margin by which `|a_i w|` must stay below the ball radius.
pub const BALL_MARGIN: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairCheck {
    pub i: usize,
    pub j: usize,
    pub target: f64,
    pub gh: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbeddingResult {
    pub n: usize,
    pub seed: u64,
    pub diameter: f64,
    /// Radius of the ball around the anchor vector containing every image vector.
    pub epsilon: f64,
    pub anchor: ScaledGeneric,
    pub anchor_vector: DistanceVector,
    pub vectors: Vec<DistanceVector>,
    /// `images[i]` is the `n`-point space representing `x_i`.
    pub images: Vec<FiniteMetricSpace>,
    /// One entry per pair `i < j`, in lexicographic order.
    pub checks: Vec<PairCheck>,
    pub max_deviation: f64,
}

impl EmbeddingResult {
    pub fn is_isometric(&self) -> bool {
        self.checks.iter().all(|c| c.deviation <= TAU_EQ)
    }

    pub fn violations(&self) -> Vec<PairCheck> {
        self.checks
            .iter()
            .filter(|c| c.deviation > TAU_EQ)
            .cloned()
            .collect()
    }
}

fn construct(x: &FiniteMetricSpace, seed: u64) -> Result<EmbeddingResult> {
    let n = x.n();
    if !(3..=E_SEARCH_BUDGET).contains(&n) {
        return Err(GhError::Domain(format!(
            "embedding needs 3 to {E_SEARCH_BUDGET} points, got {n}"
        )));
    }
    let diameter = x.diameter();
    let anchor = scaled_generic_for(diameter, n, seed)?;
    let e = anchor.report.e.expect("anchor computes e");
    let upper = anchor.report.s.min(e) / 8.0;
    let epsilon = 0.5 * (diameter + upper);
    let w = distance_vector(&anchor.space, &Enumeration::identity(n))?;

    let mut vectors = Vec::with_capacity(n);
    for i in 0..n {
        let mut a = w.clone();
        for j in 0..n {
            let k = pair_index(n, j.min((j + 1) % n), j.max((j + 1) % n));
            a.coords_mut()[k] += 2.0 * x.dist(i, j);
        }
        let radius = half_sup_dist(&a, &w)?;
        if radius >= epsilon - BALL_MARGIN {
            return Err(GhError::TheoremViolation(format!(
                "image of point {i} is at {radius} from the anchor, outside the ball of radius {epsilon}"
            )));
        }
        if !in_cone(&a) {
            return Err(GhError::TheoremViolation(format!(
                "image of point {i} left the metric cone"
            )));
        }
        vectors.push(a);
    }
    let images = vectors.iter().map(project).collect::<Result<Vec<_>>>()?;

    let mut checks = Vec::new();
    let mut max_deviation: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let gh = gh_exact(&images[i], &images[j])?.distance;
            let target = x.dist(i, j);
            let deviation = (gh - target).abs();
            max_deviation = max_deviation.max(deviation);
            checks.push(PairCheck {
                i,
                j,
                target,
                gh,
                deviation,
            });
        }
    }
    Ok(EmbeddingResult {
        n,
        seed,
        diameter,
        epsilon,
        anchor,
        anchor_vector: w,
        vectors,
        images,
        checks,
        max_deviation,
    })
}

/// Embeds `x` and verifies every pairwise distance of the images.
///
/// A pair whose distance is off by more than [`TAU_EQ`] is a
/// [`GhError::TheoremViolation`]; use [`embed_report`] to keep the data.
pub fn embed(x: &FiniteMetricSpace, seed: u64) -> Result<EmbeddingResult> {
    let result = construct(x, seed)?;
    if let Some(bad) = result.violations().first() {
        return Err(GhError::TheoremViolation(format!(
            "d_GH(Z_{}, Z_{}) = {} but |x_{} x_{}| = {}",
            bad.i, bad.j, bad.gh, bad.i, bad.j, bad.target
        )));
    }
    Ok(result)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbedStatus {
    Isometric,
    Violated,
    Error,
}

/// Outcome of an embedding run in a form that always serializes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbedReport {
    pub status: EmbedStatus,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<EmbeddingResult>,
    pub violations: Vec<PairCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<GhError>,
}

/// Runs the embedding and classifies the outcome instead of failing.
pub fn embed_report(x: &FiniteMetricSpace, seed: u64) -> EmbedReport {
    match construct(x, seed) {
        Ok(result) => {
            let violations = result.violations();
            EmbedReport {
                status: if violations.is_empty() {
                    EmbedStatus::Isometric
                } else {
                    EmbedStatus::Violated
                },
                seed,
                result: Some(result),
                violations,
                error: None,
            }
        }
        Err(error) => EmbedReport {
            status: if matches!(error, GhError::TheoremViolation(_)) {
                EmbedStatus::Violated
            } else {
                EmbedStatus::Error
            },
            seed,
            result: None,
            violations: Vec::new(),
            error: Some(error),
        },
    }
}

impl fmt::Display for EmbedReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match self.status {
            EmbedStatus::Isometric => "isometric",
            EmbedStatus::Violated => "violated",
            EmbedStatus::Error => "error",
        };
        writeln!(f, "status: {status}")?;
        writeln!(f, "seed: {}", self.seed)?;
        if let Some(error) = &self.error {
            writeln!(f, "error: {error}")?;
        }
        if let Some(r) = &self.result {
            writeln!(f, "points: {}", r.n)?;
            writeln!(f, "diameter: {}", r.diameter)?;
            writeln!(
                f,
                "anchor: s = {}, t = {}, e = {}, scale = {}",
                r.anchor.report.s,
                r.anchor.report.t,
                r.anchor.report.e.unwrap_or(f64::NAN),
                r.anchor.lambda
            )?;
            writeln!(f, "ball radius: {}", r.epsilon)?;
            writeln!(f, "max deviation: {:e}", r.max_deviation)?;
            for c in &r.checks {
                let mark = if c.deviation <= TAU_EQ {
                    "ok"
                } else {
                    "VIOLATED"
                };
                writeln!(
                    f,
                    "  ({}, {}): target {} gh {} [{mark}]",
                    c.i, c.j, c.target, c.gh
                )?;
            }
        }
        Ok(())
    }
}
