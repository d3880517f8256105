//! Relations and correspondences between two finite point sets.
//!
//! A relation between a `p`-point set and a `q`-point set is stored as a
//! `p * q`-bit word: pair `(i, j)` lives at bit `i * q + j`. Ordering pairs by
//! bit index is the same as ordering them lexicographically, and every stream
//! in this module yields words in increasing numeric order.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{GhError, Result};
use crate::metricspace::FiniteMetricSpace;

/// Hard cap on `p * q` for [`enumerate_correspondences`].
pub const MAX_FULL_ENUMERATION_BITS: usize = 30;

/// Hard cap on each side for [`enumerate_star_correspondences`].
pub const MAX_STAR_SIDE: usize = 8;

/// Cap on the number of results [`low_distortion_correspondences`] may collect.
pub const MAX_COLLECTED: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Relation {
    p: usize,
    q: usize,
    bits: u64,
}

fn low_mask(width: usize) -> u64 {
    if width == 0 {
        0
    } else {
        u64::MAX >> (64 - width)
    }
}

fn check_sides(p: usize, q: usize) -> Result<()> {
    if p == 0 || q == 0 {
        return Err(GhError::domain(
            "both sides of a relation need at least one point",
        ));
    }
    if p.checked_mul(q).is_none_or(|pq| pq > 64) {
        return Err(GhError::resource(format!(
            "a {p}x{q} relation does not fit in a 64-bit word"
        )));
    }
    Ok(())
}

impl Relation {
    pub fn from_bits(p: usize, q: usize, bits: u64) -> Result<Self> {
        check_sides(p, q)?;
        if bits & !low_mask(p * q) != 0 {
            return Err(GhError::structural(
                "relation word has bits outside the p x q grid",
            ));
        }
        if bits == 0 {
            return Err(GhError::domain("a relation must contain at least one pair"));
        }
        Ok(Self { p, q, bits })
    }

    pub fn from_pairs(p: usize, q: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        check_sides(p, q)?;
        let mut bits = 0u64;
        for &(i, j) in pairs {
            if i >= p || j >= q {
                return Err(GhError::structural(format!(
                    "pair ({i},{j}) out of range for a {p}x{q} relation"
                )));
            }
            bits |= 1 << (i * q + j);
        }
        Self::from_bits(p, q, bits)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i < self.p && j < self.q && self.bits >> (i * self.q + j) & 1 == 1
    }

    /// Pairs in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let q = self.q;
        BitIter(self.bits).map(move |b| (b / q, b % q))
    }

    fn row_bits(&self, i: usize) -> u64 {
        (self.bits >> (i * self.q)) & low_mask(self.q)
    }

    fn column_cover(&self) -> u64 {
        (0..self.p).fold(0, |acc, i| acc | self.row_bits(i))
    }

    /// Every row and every column holds at least one pair.
    pub fn is_correspondence(&self) -> bool {
        (0..self.p).all(|i| self.row_bits(i) != 0) && self.column_cover() == low_mask(self.q)
    }

    /// `R(A)`: all right-hand points related to some point of `a`, sorted.
    pub fn image(&self, a: &[usize]) -> Vec<usize> {
        let cover = a
            .iter()
            .filter(|&&i| i < self.p)
            .fold(0u64, |acc, &i| acc | self.row_bits(i));
        BitIter(cover).collect()
    }

    /// `R^{-1}(B)`: all left-hand points related to some point of `b`, sorted.
    pub fn preimage(&self, b: &[usize]) -> Vec<usize> {
        (0..self.p)
            .filter(|&i| b.iter().any(|&j| self.contains(i, j)))
            .collect()
    }

    /// The same pairs with the sides swapped.
    pub fn transpose(&self) -> Relation {
        let bits = self
            .pairs()
            .fold(0u64, |acc, (i, j)| acc | 1 << (j * self.p + i));
        Relation {
            p: self.q,
            q: self.p,
            bits,
        }
    }
}

/// Iterates over the set bit positions of a word, lowest first.
#[derive(Clone, Copy)]
pub(crate) struct BitIter(pub(crate) u64);

impl Iterator for BitIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let b = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(b)
    }
}

/// A relation whose rows and columns are all non-empty.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Correspondence(Relation);

impl Correspondence {
    pub fn new(relation: Relation) -> Result<Self> {
        if !relation.is_correspondence() {
            return Err(GhError::domain(
                "relation is not a correspondence: some point is left unmatched",
            ));
        }
        Ok(Self(relation))
    }

    pub fn from_pairs(p: usize, q: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        Self::new(Relation::from_pairs(p, q, pairs)?)
    }

    /// The bijection `i -> mapping[i]`.
    pub fn from_bijection(mapping: &[usize]) -> Result<Self> {
        let pairs: Vec<_> = mapping.iter().copied().enumerate().collect();
        Self::from_pairs(mapping.len(), mapping.len(), &pairs)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_bijection(&(0..n).collect::<Vec<_>>())
    }

    pub(crate) fn from_bits_unchecked(p: usize, q: usize, bits: u64) -> Self {
        let r = Relation { p, q, bits };
        debug_assert!(r.is_correspondence());
        Self(r)
    }

    pub fn relation(&self) -> &Relation {
        &self.0
    }

    pub fn transpose(&self) -> Correspondence {
        Correspondence(self.0.transpose())
    }

    /// True when every point on both sides occurs in exactly one pair.
    pub fn is_bijection(&self) -> bool {
        self.p == self.q && self.len() == self.p
    }
}

impl Deref for Correspondence {
    type Target = Relation;

    fn deref(&self) -> &Relation {
        &self.0
    }
}

/// JSON shape of a correspondence: `{"p", "q", "pairs"}` with pairs sorted.
#[derive(Serialize, Deserialize)]
struct CorrespondenceJson {
    p: usize,
    q: usize,
    pairs: Vec<[usize; 2]>,
}

impl Serialize for Correspondence {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CorrespondenceJson {
            p: self.p,
            q: self.q,
            pairs: self.pairs().map(|(i, j)| [i, j]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Correspondence {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = CorrespondenceJson::deserialize(d)?;
        let pairs: Vec<_> = raw.pairs.iter().map(|&[i, j]| (i, j)).collect();
        Correspondence::from_pairs(raw.p, raw.q, &pairs).map_err(serde::de::Error::custom)
    }
}

fn check_relation_fits(x: &FiniteMetricSpace, y: &FiniteMetricSpace, r: &Relation) -> Result<()> {
    if r.p != x.n() || r.q != y.n() {
        return Err(GhError::structural(format!(
            "a {}x{} relation does not match spaces of sizes {} and {}",
            r.p,
            r.q,
            x.n(),
            y.n()
        )));
    }
    Ok(())
}

/// `dis σ`: the largest `||x x'| - |y y'||` over pairs `(x, y), (x', y')` in σ.
pub fn distortion(x: &FiniteMetricSpace, y: &FiniteMetricSpace, sigma: &Relation) -> Result<f64> {
    check_relation_fits(x, y, sigma)?;
    if sigma.is_empty() {
        return Err(GhError::domain("distortion of an empty relation"));
    }
    Ok(distortion_unchecked(x, y, sigma))
}

pub(crate) fn distortion_unchecked(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    r: &Relation,
) -> f64 {
    let pairs: Vec<_> = r.pairs().collect();
    let mut worst: f64 = 0.0;
    for (k, &(a, b)) in pairs.iter().enumerate() {
        for &(c, d) in &pairs[k + 1..] {
            worst = worst.max((x.dist(a, c) - y.dist(b, d)).abs());
        }
    }
    worst
}

/// Every correspondence between a `p`-set and a `q`-set, in increasing word order.
pub fn enumerate_correspondences(p: usize, q: usize) -> Result<Correspondences> {
    check_sides(p, q)?;
    if p * q > MAX_FULL_ENUMERATION_BITS {
        return Err(GhError::resource(format!(
            "full enumeration of {p}x{q} correspondences exceeds the {MAX_FULL_ENUMERATION_BITS}-bit cap"
        )));
    }
    Ok(Correspondences {
        p,
        q,
        rows: vec![1; p],
        done: false,
    })
}

/// Odometer over words whose rows are all non-zero; row 0 is the fastest digit,
/// which keeps the words increasing. Column coverage is filtered afterwards.
pub struct Correspondences {
    p: usize,
    q: usize,
    rows: Vec<u64>,
    done: bool,
}

impl Correspondences {
    fn word(&self) -> u64 {
        self.rows
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &m)| acc | m << (i * self.q))
    }

    fn advance(&mut self) {
        let full = low_mask(self.q);
        for r in self.rows.iter_mut() {
            if *r < full {
                *r += 1;
                return;
            }
            *r = 1;
        }
        self.done = true;
    }
}

impl Iterator for Correspondences {
    type Item = Correspondence;

    fn next(&mut self) -> Option<Correspondence> {
        let full = low_mask(self.q);
        while !self.done {
            let cover = self.rows.iter().fold(0, |acc, &m| acc | m);
            let word = self.word();
            self.advance();
            if cover == full {
                return Some(Correspondence::from_bits_unchecked(self.p, self.q, word));
            }
        }
        None
    }
}

/// Every correspondence whose bipartite graph is a disjoint union of stars, in
/// increasing word order.
///
/// Equivalently: no pair `(i, j)` has both another pair in row `i` and another
/// pair in column `j`. These are exactly the inclusion-minimal correspondences.
pub fn enumerate_star_correspondences(p: usize, q: usize) -> Result<StarCorrespondences> {
    check_sides(p, q)?;
    if p > MAX_STAR_SIDE || q > MAX_STAR_SIDE {
        return Err(GhError::resource(format!(
            "star enumeration is capped at {MAX_STAR_SIDE} points per side, got {p}x{q}"
        )));
    }
    Ok(StarCorrespondences {
        p,
        q,
        chosen: vec![0; p],
        level: 0,
        done: false,
    })
}

/// Depth-first over rows from the most significant (`p - 1`) down to row 0,
/// trying row masks in increasing order.
pub struct StarCorrespondences {
    p: usize,
    q: usize,
    /// `chosen[level]` is the mask of row `p - 1 - level`.
    chosen: Vec<u64>,
    level: usize,
    done: bool,
}

impl StarCorrespondences {
    /// Columns used so far, and columns owned by a multi-column row.
    fn usage(&self) -> (u64, u64) {
        self.chosen[..self.level]
            .iter()
            .fold((0, 0), |(used, exclusive), &m| {
                let ex = if m.count_ones() >= 2 { m } else { 0 };
                (used | m, exclusive | ex)
            })
    }

    fn word(&self) -> u64 {
        self.chosen.iter().enumerate().fold(0, |acc, (level, &m)| {
            acc | m << ((self.p - 1 - level) * self.q)
        })
    }
}

impl Iterator for StarCorrespondences {
    type Item = Correspondence;

    fn next(&mut self) -> Option<Correspondence> {
        let full = low_mask(self.q);
        while !self.done {
            let (used, exclusive) = self.usage();
            let rows_after = self.p - 1 - self.level;
            let feasible = |m: u64| {
                let ok = if m.count_ones() >= 2 {
                    m & used == 0
                } else {
                    m & exclusive == 0
                };
                if !ok {
                    return false;
                }
                let ex = if m.count_ones() >= 2 {
                    exclusive | m
                } else {
                    exclusive
                };
                if rows_after == 0 {
                    (used | m) == full
                } else {
                    // later rows need a column that is not exclusively owned
                    ex != full
                }
            };
            let next_mask = (self.chosen[self.level] + 1..=full).find(|&m| feasible(m));
            match next_mask {
                Some(m) => {
                    self.chosen[self.level] = m;
                    if rows_after == 0 {
                        return Some(Correspondence::from_bits_unchecked(
                            self.p,
                            self.q,
                            self.word(),
                        ));
                    }
                    self.level += 1;
                    self.chosen[self.level] = 0;
                }
                None => {
                    self.chosen[self.level] = 0;
                    if self.level == 0 {
                        self.done = true;
                    } else {
                        self.level -= 1;
                    }
                }
            }
        }
        None
    }
}

/// True when the bipartite graph of `r` is a disjoint union of stars.
pub fn is_star(r: &Relation) -> bool {
    let row_deg: Vec<u32> = (0..r.p).map(|i| r.row_bits(i).count_ones()).collect();
    let mut col_deg = vec![0u32; r.q];
    for (_, j) in r.pairs() {
        col_deg[j] += 1;
    }
    r.pairs().all(|(i, j)| row_deg[i] == 1 || col_deg[j] == 1)
}

/// Minimum distortion over bijections together with a minimizing map.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BestBijection {
    pub distortion: f64,
    /// `mapping[i]` is the image of point `i` of the first space.
    pub mapping: Vec<usize>,
}

/// Smallest distortion of a bijection `X -> Y`, or `None` when the sizes differ.
///
/// Branch and bound over permutations in lexicographic order; the returned map
/// is the lexicographically first minimizer.
pub fn min_bijection_distortion(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
) -> Option<BestBijection> {
    if x.n() != y.n() {
        return None;
    }
    let n = x.n();
    let mut perm = vec![0; n];
    let mut used = vec![false; n];
    let mut best = BestBijection {
        distortion: f64::INFINITY,
        mapping: Vec::new(),
    };
    bijection_search(x, y, 0, 0.0, &mut perm, &mut used, &mut best);
    Some(best)
}

fn bijection_search(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    pos: usize,
    partial: f64,
    perm: &mut [usize],
    used: &mut [bool],
    best: &mut BestBijection,
) {
    let n = x.n();
    if pos == n {
        best.distortion = partial;
        best.mapping = perm.to_vec();
        return;
    }
    for v in 0..n {
        if used[v] {
            continue;
        }
        let mut worst = partial;
        for p in 0..pos {
            worst = worst.max((x.dist(p, pos) - y.dist(perm[p], v)).abs());
        }
        if worst >= best.distortion {
            continue;
        }
        used[v] = true;
        perm[pos] = v;
        bijection_search(x, y, pos + 1, worst, perm, used, best);
        used[v] = false;
    }
}

/// All correspondences with distortion strictly below `threshold`, in
/// increasing word order.
///
/// Adding a pair never lowers the distortion, so rows are filled from the
/// most significant down and a partial relation is abandoned as soon as its
/// distortion reaches the threshold. The search is complete.
pub fn low_distortion_correspondences(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    threshold: f64,
) -> Result<Vec<Correspondence>> {
    let (p, q) = (x.n(), y.n());
    check_sides(p, q)?;
    let mut out = Vec::new();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    low_distortion_rows(x, y, threshold, p, 0, 0, &mut pairs, &mut out)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn low_distortion_rows(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    threshold: f64,
    rows_left: usize,
    word: u64,
    cover: u64,
    pairs: &mut Vec<(usize, usize)>,
    out: &mut Vec<Correspondence>,
) -> Result<()> {
    let (p, q) = (x.n(), y.n());
    if rows_left == 0 {
        if cover == low_mask(q) {
            if out.len() >= MAX_COLLECTED {
                return Err(GhError::resource(format!(
                    "more than {MAX_COLLECTED} correspondences below the threshold"
                )));
            }
            out.push(Correspondence::from_bits_unchecked(p, q, word));
        }
        return Ok(());
    }
    let row = rows_left - 1;
    let base = pairs.len();
    'masks: for mask in 1..=low_mask(q) {
        pairs.truncate(base);
        for j in BitIter(mask) {
            for &(a, b) in pairs.iter() {
                if (x.dist(a, row) - y.dist(b, j)).abs() >= threshold {
                    continue 'masks;
                }
            }
            pairs.push((row, j));
        }
        low_distortion_rows(
            x,
            y,
            threshold,
            row,
            word | mask << (row * q),
            cover | mask,
            pairs,
            out,
        )?;
    }
    pairs.truncate(base);
    Ok(())
}
