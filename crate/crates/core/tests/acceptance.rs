//! Acceptance criteria, one line of output each. Runs without the libtest
//! harness so the lines are always visible; exits non-zero if any fail.

mod common;

use std::time::{Duration, Instant};

use common::{random_space, random_space_between};
use gh_core::cone::{distance_vector, half_sup_dist, kuratowski, project, sup_dist, Enumeration};
use gh_core::correspondence::{
    distortion, enumerate_correspondences, low_distortion_correspondences,
    min_bijection_distortion, Correspondence,
};
use gh_core::embed::embed;
use gh_core::generic::{perturbed_generic, seeded_rng, shramov_space_with_budget};
use gh_core::ghdist::{geodesic_point, gh_exact, gh_oracle};
use gh_core::metricspace::{scale, FiniteMetricSpace};
use gh_core::stability::{
    blow_up, interiority_radius, verify_interiority, verify_local_isometry, VerifyOptions,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

type Outcome = Result<String, String>;

fn rng(criterion: u64) -> ChaCha8Rng {
    seeded_rng(0xACCE_97A0 + criterion, 0)
}

fn within(limit: Duration, started: Instant, detail: String) -> Outcome {
    let took = started.elapsed();
    if took > limit {
        Err(format!("{detail}; took {took:.1?}, limit {limit:.0?}"))
    } else {
        Ok(format!("{detail}; {took:.1?}"))
    }
}

fn oracle_equivalence() -> Outcome {
    let started = Instant::now();
    let mut rng = rng(1);
    for k in 0..500 {
        let x = random_space_between(&mut rng, 1, 4);
        let y = random_space_between(&mut rng, 1, 4);
        let exact = gh_exact(&x, &y).map_err(|e| e.to_string())?;
        let oracle = gh_oracle(&x, &y).map_err(|e| e.to_string())?;
        if exact.distance != oracle.distance {
            return Err(format!(
                "pair {k}: solver {} vs oracle {}",
                exact.distance, oracle.distance
            ));
        }
    }
    within(
        Duration::from_secs(60),
        started,
        "500 pairs identical".into(),
    )
}

fn diameter_bounds() -> Outcome {
    let mut rng = rng(2);
    let point = FiniteMetricSpace::point();
    let mut worst: f64 = 0.0;
    for k in 0..200 {
        let x = random_space_between(&mut rng, 1, 6);
        let y = random_space_between(&mut rng, 1, 6);
        let to_point = gh_exact(&point, &x).unwrap().distance;
        worst = worst.max((2.0 * to_point - x.diameter()).abs());
        let gh = gh_exact(&x, &y).unwrap().distance;
        let (dx, dy) = (x.diameter(), y.diameter());
        let low = 0.5 * (dx - dy).abs() - gh;
        let high = gh - 0.5 * dx.max(dy);
        worst = worst.max(low).max(high);
        if worst > TOL {
            return Err(format!("pair {k}: violation {worst:e}"));
        }
    }
    Ok(format!("200 pairs, worst violation {worst:e}"))
}

fn scaling_laws() -> Outcome {
    let mut rng = rng(3);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let x = random_space_between(&mut rng, 1, 5);
        let y = random_space_between(&mut rng, 1, 5);
        let gh = gh_exact(&x, &y).unwrap().distance;
        for lambda in [0.0, 0.5, 2.0] {
            let scaled = gh_exact(&scale(&x, lambda).unwrap(), &scale(&y, lambda).unwrap())
                .unwrap()
                .distance;
            worst = worst.max((scaled - lambda * gh).abs());
        }
        let (l1, l2) = (rng.gen_range(0.0..3.0), rng.gen_range(0.0..3.0));
        let apart = gh_exact(&scale(&x, l1).unwrap(), &scale(&x, l2).unwrap())
            .unwrap()
            .distance;
        worst = worst.max((2.0 * apart - (l1 - l2).abs() * x.diameter()).abs());
        if worst > TOL {
            return Err(format!("instance {k}: deviation {worst:e}"));
        }
    }
    Ok(format!("100 instances, worst deviation {worst:e}"))
}

fn kuratowski_isometry() -> Outcome {
    let mut rng = rng(4);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x = random_space_between(&mut rng, 1, 8);
        let rows = kuratowski(&x);
        for i in 0..x.n() {
            for j in 0..x.n() {
                worst = worst.max((sup_dist(&rows[i], &rows[j]) - x.dist(i, j)).abs());
            }
        }
    }
    if worst > 1e-12 {
        return Err(format!("deviation {worst:e}"));
    }
    Ok(format!("100 spaces, worst deviation {worst:e}"))
}

fn projection_lipschitz() -> Outcome {
    let mut rng = rng(5);
    let mut worst = f64::NEG_INFINITY;
    for k in 0..500 {
        let n = rng.gen_range(2..=4);
        let identity = Enumeration::identity(n);
        let v = distance_vector(&random_space(&mut rng, n), &identity).unwrap();
        let w = distance_vector(&random_space(&mut rng, n), &identity).unwrap();
        let gh = gh_exact(&project(&v).unwrap(), &project(&w).unwrap())
            .unwrap()
            .distance;
        let excess = gh - half_sup_dist(&v, &w).unwrap();
        worst = worst.max(excess);
        if excess > TOL {
            return Err(format!("pair {k}: d_GH exceeds |vw| by {excess:e}"));
        }
    }
    Ok(format!("500 cone pairs, max d_GH - |vw| = {worst:e}"))
}

fn unique_low_distortion_correspondence() -> Outcome {
    let mut rng = rng(6);
    let mut total_checked = 0u64;
    for k in 0..20u64 {
        let n = if k % 2 == 0 { 3 } else { 4 };
        let m = perturbed_generic(n, 600 + k, 0.3).map_err(|e| e.to_string())?;
        let r = &m.report;
        let eps = (r.s / 4.0).min(r.e.unwrap() / 4.0) * (1.0 - 1e-6);
        // Keep |M| * |X| within reach of full enumeration.
        let max_points = if n == 3 { 6 } else { 5 };
        let mut mult = vec![1; n];
        let mut size = n;
        for slot in mult.iter_mut() {
            if size < max_points && rng.gen_bool(0.6) {
                *slot = 2;
                size += 1;
            }
        }
        let delta = rng.gen_range(0.1..0.9) * 2.0 * eps;
        let jitter = rng.gen_range(0.0..0.9) * (delta / 2.0).min(r.t / 4.0);
        let x = blow_up(&m.space, &mult, delta, jitter, k).map_err(|e| e.to_string())?;

        let below: Vec<Correspondence> = enumerate_correspondences(n, x.n())
            .map_err(|e| e.to_string())?
            .filter(|c| distortion(&m.space, &x, c.relation()).unwrap() < 2.0 * eps)
            .collect();
        total_checked += 1;
        let gh = gh_exact(&m.space, &x).unwrap();
        if below.len() != 1 {
            return Err(format!(
                "anchor {k}: {} correspondences below 2ε",
                below.len()
            ));
        }
        if below[0] != gh.optimal
            || distortion(&m.space, &x, below[0].relation()).unwrap() != 2.0 * gh.distance
        {
            return Err(format!(
                "anchor {k}: the unique correspondence is not optimal"
            ));
        }
        let pruned = low_distortion_correspondences(&m.space, &x, 2.0 * eps).unwrap();
        if pruned != below {
            return Err(format!(
                "anchor {k}: pruned search disagrees with enumeration"
            ));
        }
    }
    Ok(format!(
        "{total_checked} anchors, one correspondence each, all optimal"
    ))
}

fn local_isometry() -> Outcome {
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    for k in 0..10u64 {
        let n = if k % 2 == 0 { 3 } else { 4 };
        let m = perturbed_generic(n, 700 + k, 0.3).map_err(|e| e.to_string())?;
        let options = VerifyOptions {
            tau_eq: TOL,
            ..VerifyOptions::new(100, 7000 + k)
        };
        let report = verify_local_isometry(&m.space, &options).map_err(|e| e.to_string())?;
        worst = worst.max(report.max_deviation);
        if !report.pass {
            return Err(format!(
                "anchor {k}: {} counterexamples, max deviation {:e}",
                report.counterexamples.len(),
                report.max_deviation
            ));
        }
    }
    within(
        Duration::from_secs(300),
        started,
        format!("10 anchors x 100 pairs, max deviation {worst:e}"),
    )
}

fn interiority() -> Outcome {
    let m = perturbed_generic(4, 800, 0.3).map_err(|e| e.to_string())?;
    let eps = interiority_radius(&m.report).unwrap();
    if eps > m.report.s / 8.0 || eps > m.report.t / 6.0 {
        return Err(format!("radius {eps} exceeds min(s/8, t/6)"));
    }
    let report =
        verify_interiority(&m.space, &VerifyOptions::new(1000, 8000)).map_err(|e| e.to_string())?;
    if !report.pass {
        return Err(format!(
            "{} of 1000 vectors not interior",
            report.counterexamples.len()
        ));
    }
    Ok(format!("1000 vectors interior at ε = {eps:.3e}"))
}

fn embedding() -> Outcome {
    let started = Instant::now();
    let mut rng = rng(9);
    let mut worst: f64 = 0.0;
    for k in 0..20u64 {
        let n = 3 + (k as usize % 3);
        let x = random_space(&mut rng, n);
        let result = embed(&x, 900 + k).map_err(|e| format!("space {k}: {e}"))?;
        worst = worst.max(result.max_deviation);
    }
    if worst > TOL {
        return Err(format!("max deviation {worst:e}"));
    }
    within(
        Duration::from_secs(600),
        started,
        format!("20 spaces (n = 3, 4, 5), max deviation {worst:e}"),
    )
}

fn geodesics() -> Outcome {
    let mut rng = rng(10);
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let x = random_space_between(&mut rng, 1, 4);
        let y = random_space_between(&mut rng, 1, 4);
        let gh = gh_exact(&x, &y).unwrap();
        for t in [0.25, 0.5, 0.75] {
            let rt = geodesic_point(&x, &y, &gh.optimal, t).map_err(|e| e.to_string())?;
            let from_x = gh_exact(&x, &rt).unwrap().distance;
            let to_y = gh_exact(&rt, &y).unwrap().distance;
            worst = worst
                .max((from_x - t * gh.distance).abs())
                .max((to_y - (1.0 - t) * gh.distance).abs());
        }
        if worst > TOL {
            return Err(format!("pair {k}: deviation {worst:e}"));
        }
    }
    Ok(format!(
        "50 pairs x 3 parameters, worst deviation {worst:e}"
    ))
}

fn shramov() -> Outcome {
    let mut notes = Vec::new();
    let mut failures = Vec::new();
    for m in [2, 3] {
        for eps in [0.25, 0.5] {
            // Compute e exactly where the vertex count allows it.
            let s = shramov_space_with_budget(m, eps, 8).map_err(|e| e.to_string())?;
            let vertices = s.graph.vertex_count;
            if s.report.s != 1.0 || s.report.t != 1.0 - eps {
                failures.push(format!(
                    "m={m} ε={eps}: s = {}, t = {}",
                    s.report.s, s.report.t
                ));
            }
            if vertices <= 8 {
                match s.report.e {
                    Some(e) if e == eps => notes.push(format!("m={m} ε={eps}: e = ε")),
                    other => failures.push(format!(
                        "m={m} ε={eps} ({vertices} vertices): e = {other:?}, expected {eps} (witness {:?})",
                        s.report.e_witness
                    )),
                }
            } else {
                notes.push(format!("m={m} ε={eps}: s, t exact ({vertices} vertices)"));
            }
        }
    }
    if failures.is_empty() {
        Ok(notes.join("; "))
    } else {
        Err(failures.join("; "))
    }
}

fn doubling_example() -> Outcome {
    let x = FiniteMetricSpace::from_line(&[2.0, 4.0, 8.0, 16.0]).unwrap();
    let y = FiniteMetricSpace::from_line(&[2.0, 3.0, 4.0, 5.0, 8.0, 9.0, 16.0, 17.0]).unwrap();
    let pairs: Vec<(usize, usize)> = (0..4).flat_map(|i| [(i, 2 * i), (i, 2 * i + 1)]).collect();
    let r = Correspondence::from_pairs(4, 8, &pairs).map_err(|e| e.to_string())?;
    let dis = distortion(&x, &y, r.relation()).unwrap();
    if dis != 1.0 {
        return Err(format!("correspondence has distortion {dis}"));
    }
    // Equal-size variant: eight powers of two against the eight points of Y.
    let x8 = FiniteMetricSpace::from_line(&(1..=8).map(|k| f64::powi(2.0, k)).collect::<Vec<_>>())
        .unwrap();
    let best = min_bijection_distortion(&x8, &y).unwrap();
    if best.distortion > dis {
        Ok(format!(
            "dis R = {dis}, best bijection distortion {}",
            best.distortion
        ))
    } else {
        Err(format!(
            "best bijection distortion {} does not exceed {dis}",
            best.distortion
        ))
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("oracle equivalence", oracle_equivalence),
        ("diameter bounds", diameter_bounds),
        ("scaling laws", scaling_laws),
        ("Kuratowski isometry", kuratowski_isometry),
        ("1-Lipschitz projection", projection_lipschitz),
        (
            "unique low-distortion correspondence",
            unique_low_distortion_correspondence,
        ),
        ("local isometry", local_isometry),
        ("cone interiority", interiority),
        ("isometric embedding", embedding),
        ("geodesic interpolation", geodesics),
        ("rigid graph construction", shramov),
        ("doubling example", doubling_example),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS  {:>2} {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {:>2} {name}: {detail}", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
