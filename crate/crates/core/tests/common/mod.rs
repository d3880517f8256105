//! Generators and brute-force reference computations shared by the
//! integration tests. Nothing here calls into the solver being tested.

#![allow(dead_code)]

use gh_core::metricspace::FiniteMetricSpace;
use proptest::prelude::*;
use rand::Rng;

/// Shortest-path closure of symmetric positive weights. Rounded weights give
/// many ties and symmetric spaces, which stress tie-breaking.
pub fn closure(n: usize, weights: &[f64], integral: bool) -> FiniteMetricSpace {
    let w = |i: usize, j: usize| {
        let v = weights[i * n + j].min(weights[j * n + i]);
        if integral {
            v.ceil()
        } else {
            v
        }
    };
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                d[i][j] = w(i, j);
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    FiniteMetricSpace::new(d).expect("shortest-path closure is a metric")
}

pub fn space_with(min_n: usize, max_n: usize) -> impl Strategy<Value = FiniteMetricSpace> {
    (min_n..=max_n).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec(0.1f64..5.0, n * n),
            any::<bool>(),
        )
            .prop_map(|(n, w, integral)| closure(n, &w, integral))
    })
}

pub fn space(max_n: usize) -> impl Strategy<Value = FiniteMetricSpace> {
    space_with(1, max_n)
}

pub fn random_space(rng: &mut impl Rng, n: usize) -> FiniteMetricSpace {
    let weights: Vec<f64> = (0..n * n).map(|_| rng.gen_range(0.1..5.0)).collect();
    let integral = rng.gen_bool(0.3);
    closure(n, &weights, integral)
}

pub fn random_space_between(rng: &mut impl Rng, min_n: usize, max_n: usize) -> FiniteMetricSpace {
    let n = rng.gen_range(min_n..=max_n);
    random_space(rng, n)
}

/// Every correspondence as a list of pairs, by subset enumeration.
pub fn naive_correspondences(p: usize, q: usize) -> Vec<Vec<(usize, usize)>> {
    let all: Vec<(usize, usize)> = (0..p).flat_map(|i| (0..q).map(move |j| (i, j))).collect();
    assert!(all.len() <= 18, "naive enumeration is limited to 18 pairs");
    let mut out = Vec::new();
    for mask in 1u32..(1 << all.len()) {
        let chosen: Vec<(usize, usize)> = all
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, &pair)| pair)
            .collect();
        let rows = (0..p).all(|i| chosen.iter().any(|&(a, _)| a == i));
        let cols = (0..q).all(|j| chosen.iter().any(|&(_, b)| b == j));
        if rows && cols {
            out.push(chosen);
        }
    }
    out
}

pub fn naive_distortion(x: &FiniteMetricSpace, y: &FiniteMetricSpace, r: &[(usize, usize)]) -> f64 {
    let mut worst: f64 = 0.0;
    for &(a, b) in r {
        for &(c, d) in r {
            worst = worst.max((x.dist(a, c) - y.dist(b, d)).abs());
        }
    }
    worst
}

/// Gromov-Hausdorff distance as half the least distortion over all correspondences.
pub fn naive_gh(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> f64 {
    naive_correspondences(x.n(), y.n())
        .iter()
        .map(|r| naive_distortion(x, y, r))
        .fold(f64::INFINITY, f64::min)
        / 2.0
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                go(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

pub fn permutation_distortion(x: &FiniteMetricSpace, sigma: &[usize]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..x.n() {
        for j in 0..x.n() {
            worst = worst.max((x.dist(i, j) - x.dist(sigma[i], sigma[j])).abs());
        }
    }
    worst
}

/// Least distortion of a non-identity permutation.
pub fn naive_e(x: &FiniteMetricSpace) -> f64 {
    permutations(x.n())
        .iter()
        .filter(|s| s.iter().enumerate().any(|(i, &v)| i != v))
        .map(|s| permutation_distortion(x, s))
        .fold(f64::INFINITY, f64::min)
}

pub fn binomial(n: usize, k: usize) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

/// Number of correspondences between sets of sizes `p` and `q`.
pub fn correspondence_count(p: usize, q: usize) -> i64 {
    let mut total = 0i64;
    for i in 0..=p {
        for j in 0..=q {
            let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
            total += sign * binomial(p, i) * binomial(q, j) * (1i64 << ((p - i) * (q - j)));
        }
    }
    total
}
