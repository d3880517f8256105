mod common;

use common::{correspondence_count, naive_correspondences, naive_gh, space, space_with};
use gh_core::cone::{half_sup_dist, in_cone, project, DistanceVector};
use gh_core::correspondence::{
    distortion, enumerate_correspondences, enumerate_star_correspondences,
    min_bijection_distortion, Correspondence, Relation,
};
use gh_core::ghdist::{geodesic_point, gh_exact, gh_oracle};
use gh_core::metricspace::TAU_EQ;
use proptest::prelude::*;

fn min_over(
    x: &gh_core::metricspace::FiniteMetricSpace,
    y: &gh_core::metricspace::FiniteMetricSpace,
    relations: impl Iterator<Item = Correspondence>,
) -> f64 {
    relations
        .map(|r| distortion(x, y, r.relation()).unwrap())
        .fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn stars_reach_the_same_minimum(x in space(4), y in space(4)) {
        let full = min_over(&x, &y, enumerate_correspondences(x.n(), y.n()).unwrap());
        let stars = min_over(&x, &y, enumerate_star_correspondences(x.n(), y.n()).unwrap());
        prop_assert_eq!(full, stars);
    }

    #[test]
    fn solver_agrees_with_brute_force(x in space(4), y in space(4)) {
        let exact = gh_exact(&x, &y).unwrap();
        prop_assert_eq!(exact.distance, gh_oracle(&x, &y).unwrap().distance);
        prop_assert_eq!(exact.distance, naive_gh(&x, &y));
        prop_assert_eq!(2.0 * exact.distance, distortion(&x, &y, exact.optimal.relation()).unwrap());
    }

    #[test]
    fn removing_a_pair_never_increases_distortion(x in space(4), y in space(4), pick in any::<prop::sample::Index>()) {
        let all = naive_correspondences(x.n(), y.n());
        let r = pick.get(&all);
        let base = distortion(&x, &y, &Relation::from_pairs(x.n(), y.n(), r).unwrap()).unwrap();
        for k in 0..r.len() {
            let mut smaller = r.clone();
            smaller.remove(k);
            if smaller.is_empty() {
                continue;
            }
            let rel = Relation::from_pairs(x.n(), y.n(), &smaller).unwrap();
            if rel.is_correspondence() {
                prop_assert!(distortion(&x, &y, &rel).unwrap() <= base);
            }
        }
    }

    #[test]
    fn bijections_do_no_better_than_correspondences((x, y) in (1usize..=5).prop_flat_map(|n| (space_with(n, n), space_with(n, n)))) {
        let best = min_bijection_distortion(&x, &y).unwrap();
        prop_assert!(best.distortion >= 2.0 * gh_exact(&x, &y).unwrap().distance);
    }

    #[test]
    fn distance_is_symmetric_and_sandwiched(x in space(6), y in space(6)) {
        let xy = gh_exact(&x, &y).unwrap().distance;
        prop_assert!((xy - gh_exact(&y, &x).unwrap().distance).abs() <= TAU_EQ);
        let (dx, dy) = (x.diameter(), y.diameter());
        prop_assert!(0.5 * (dx - dy).abs() <= xy + TAU_EQ);
        prop_assert!(xy <= 0.5 * dx.max(dy) + TAU_EQ);
    }

    #[test]
    fn triangle_inequality(x in space(4), y in space(4), z in space(4)) {
        let xz = gh_exact(&x, &z).unwrap().distance;
        let via = gh_exact(&x, &y).unwrap().distance + gh_exact(&y, &z).unwrap().distance;
        prop_assert!(xz <= via + TAU_EQ);
    }

    #[test]
    fn geodesic_points_are_spaced_linearly(x in space(3), y in space(3), s in 0.0f64..=1.0, t in 0.0f64..=1.0) {
        let gh = gh_exact(&x, &y).unwrap();
        prop_assume!(gh.optimal.len() <= 6);
        let rs = geodesic_point(&x, &y, &gh.optimal, s).unwrap();
        let rt = geodesic_point(&x, &y, &gh.optimal, t).unwrap();
        let between = gh_exact(&rs, &rt).unwrap().distance;
        prop_assert!((between - (s - t).abs() * gh.distance).abs() <= TAU_EQ);
        for u in [0.0, 0.5, 1.0] {
            let ru = geodesic_point(&x, &y, &gh.optimal, u).unwrap();
            prop_assert!((gh_exact(&x, &ru).unwrap().distance - u * gh.distance).abs() <= TAU_EQ);
            prop_assert!((gh_exact(&ru, &y).unwrap().distance - (1.0 - u) * gh.distance).abs() <= TAU_EQ);
        }
    }

    #[test]
    fn projection_is_one_lipschitz(
        (v, w) in (2usize..=4).prop_flat_map(|n| {
            let len = n * (n - 1) / 2;
            (
                prop::collection::vec(1.0f64..2.0, len),
                prop::collection::vec(1.0f64..2.0, len),
            )
                .prop_map(move |(a, b)| (DistanceVector::new(n, a).unwrap(), DistanceVector::new(n, b).unwrap()))
        })
    ) {
        // Coordinates in [a, 2a] always satisfy the triangle inequality.
        prop_assert!(in_cone(&v) && in_cone(&w));
        let gh = gh_exact(&project(&v).unwrap(), &project(&w).unwrap()).unwrap().distance;
        prop_assert!(gh <= half_sup_dist(&v, &w).unwrap() + TAU_EQ);
    }
}

#[test]
fn correspondence_counts_match_inclusion_exclusion() {
    for p in 1..=4 {
        for q in 1..=4 {
            let counted = enumerate_correspondences(p, q).unwrap().count() as i64;
            assert_eq!(counted, correspondence_count(p, q), "p = {p}, q = {q}");
            assert_eq!(naive_correspondences(p, q).len() as i64, counted);
        }
    }
}
