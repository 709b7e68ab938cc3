use brakkenet::analysis::classify_junction;
use brakkenet::fixtures;
use brakkenet::geometry::segment_set_hausdorff;
use brakkenet::network::{deformation_sweep, region_area_changes, remesh};
use brakkenet::{validate, AdmissibilityGuard, JunctionKind, Network, Point};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn perturbed(mut net: Network, seed: u64, amp: f64) -> Network {
    let mut rng = StdRng::seed_from_u64(seed);
    for v in 0..net.vertices.len() {
        if !net.is_frozen(v) {
            net.vertices[v].x += rng.gen_range(-amp..=amp);
            net.vertices[v].y += rng.gen_range(-amp..=amp);
        }
    }
    net
}

fn perturbed_cross(pieces: usize, seed: u64, rel: f64) -> Network {
    perturbed(fixtures::cross(Point::zero(), 1.0, pieces), seed, rel / pieces as f64)
}

fn perturbed_line(pieces: usize, seed: u64, rel: f64) -> Network {
    perturbed(fixtures::straight_line(2.0, pieces), seed, rel * 2.0 / pieces as f64)
}

fn frozen_points(net: &Network) -> Vec<Point> {
    net.frozen.iter().map(|&v| net.vertices[v]).collect()
}

fn segs(net: &Network) -> Vec<(Point, Point)> {
    (0..net.edges.len()).map(|e| net.edge_points(e)).collect()
}

fn sweep_to_fixed_point(net: &Network, guard: &AdmissibilityGuard) -> Network {
    let mut cur = net.clone();
    for _ in 0..400 {
        let (next, rep) = deformation_sweep(&cur, guard, 0.15).unwrap();
        cur = next;
        if rep.deficit == 0.0 {
            return cur;
        }
    }
    panic!("sweeps did not settle");
}

fn fermat(pts: [Point; 3], mut x: Point) -> Point {
    for _ in 0..500 {
        let (mut num, mut den) = (Point::zero(), 0.0);
        for p in pts {
            let d = x.dist(p).max(1e-15);
            num += p * (1.0 / d);
            den += 1.0 / d;
        }
        x = num * (1.0 / den);
    }
    x
}

/// Steiner trees of four points for both pairings, by alternating Fermat
/// points of each Steiner vertex given the other.
fn steiner_trees(e: [Point; 4]) -> Vec<Vec<(Point, Point)>> {
    [(0, 1, 2, 3), (1, 2, 3, 0)]
        .into_iter()
        .map(|(a, b, c, d)| {
            let mut p = (e[a] + e[b]) * 0.25;
            let mut q = (e[c] + e[d]) * 0.25;
            for _ in 0..200 {
                p = fermat([e[a], e[b], q], p);
                q = fermat([e[c], e[d], p], q);
            }
            vec![(p, q), (p, e[a]), (p, e[b]), (q, e[c]), (q, e[d])]
        })
        .collect()
}

fn jittered_cross(seed: u64) -> Network {
    let mut rng = StdRng::seed_from_u64(seed);
    let center = Point::new(rng.gen_range(-0.05..0.05), rng.gen_range(-0.05..0.05));
    let angles: Vec<f64> = (0..4).map(|k| (90.0 * k as f64 + rng.gen_range(-8.0..8.0)).to_radians()).collect();
    fixtures::star(center, &angles, 0.5, 4)
}

/// Line between jittered frozen ends with tangentially jittered interior
/// vertices, plus a small loop of a third region above it.
fn line_with_loop(seed: u64) -> Network {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut net = Network::new(3);
    let a = Point::new(-1.0, rng.gen_range(-0.1..0.1));
    let b = Point::new(1.0, rng.gen_range(-0.1..0.1));
    let ia = net.add_frozen_vertex(a);
    let mut prev = ia;
    for k in 1..8 {
        let t = (k as f64 + rng.gen_range(-0.3..0.3)) / 8.0;
        let v = net.add_vertex(a.lerp(b, t));
        net.add_edge(prev, v, 1, 2);
        prev = v;
    }
    let ib = net.add_frozen_vertex(b);
    net.add_edge(prev, ib, 1, 2);
    let c = Point::new(rng.gen_range(-0.5..0.5), 0.3);
    fixtures::add_circle(&mut net, c, rng.gen_range(0.01..0.05), 12, 3, 1);
    net
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sweep_respects_deficit_displacement_area_and_frozen_bounds(
        pieces in 2usize..6,
        seed in any::<u64>(),
        rel in 0.0f64..0.25,
        line in any::<bool>(),
    ) {
        let net = if line { perturbed_line(pieces * 2, seed, rel) } else { perturbed_cross(pieces, seed, rel) };
        prop_assume!(validate(&net).is_ok());
        let guard = AdmissibilityGuard::new(2);
        let (out, rep) = deformation_sweep(&net, &guard, 0.15).unwrap();
        prop_assert!(validate(&out).is_ok());
        prop_assert!(rep.deficit <= 0.0);
        let sum: f64 = rep.moves.iter().map(|m| m.length_change).sum();
        prop_assert!((sum - rep.deficit).abs() <= 1e-12);
        prop_assert!(out.total_length() <= net.total_length() + 1e-12);
        for m in &rep.moves {
            prop_assert!(m.length_change <= 0.0);
            prop_assert!(m.displacement <= guard.max_displacement * (1.0 + 1e-12));
            prop_assert!(m.areas_swapped.values().all(|a| a.abs() <= guard.max_area_swap));
        }
        let areas = region_area_changes(&net, &out).unwrap();
        prop_assert!(areas.values().all(|a| a.abs() <= guard.max_area_swap));
        let before = frozen_points(&net);
        let after = frozen_points(&out);
        prop_assert_eq!(before.len(), after.len());
        prop_assert!(before.iter().all(|p| after.contains(p)));
    }

    #[test]
    fn swept_junctions_are_wide_or_unresolved(pieces in 2usize..5, seed in any::<u64>(), rel in 0.0f64..0.25) {
        let net = perturbed_cross(pieces, seed, rel);
        prop_assume!(validate(&net).is_ok());
        let (out, rep) = deformation_sweep(&net, &AdmissibilityGuard::new(2), 0.15).unwrap();
        let adj = out.adjacency();
        for v in 0..out.vertices.len() {
            if adj[v].len() < 3 || out.is_frozen(v) || rep.unresolved.contains(&v) {
                continue;
            }
            let mut angles: Vec<f64> = adj[v]
                .iter()
                .filter_map(|&e| out.outgoing_direction(v, e))
                .map(|d| d.angle().to_degrees().rem_euclid(360.0))
                .collect();
            angles.sort_by(f64::total_cmp);
            let k = angles.len();
            for i in 0..k {
                let gap = if i + 1 < k { angles[i + 1] - angles[i] } else { angles[0] + 360.0 - angles[i] };
                prop_assert!(gap >= 60.0 - 5.0, "vertex {} gap {}", v, gap);
            }
        }
    }

    #[test]
    fn remesh_keeps_valid_networks_valid(
        pieces in 1usize..12,
        seed in any::<u64>(),
        rel in 0.0f64..0.2,
        l_min in 0.02f64..0.2,
        factor in 3.0f64..5.0,
    ) {
        let net = perturbed_cross(pieces, seed, rel);
        prop_assume!(validate(&net).is_ok());
        let out = remesh(&net, l_min, l_min * factor).unwrap();
        prop_assert!(validate(&out).is_ok());
        prop_assert_eq!(out.junction_census(), net.junction_census());
        prop_assert_eq!(frozen_points(&out), frozen_points(&net));
    }
}

#[test]
fn second_sweep_on_minimizers_is_idle() {
    let guard = AdmissibilityGuard::new(2);
    for net in [
        fixtures::triple_junction(Point::zero(), 1.0, 6),
        fixtures::straight_line(2.0, 10),
        fixtures::hexagon6(0.5, 1.5, 4),
    ] {
        let settled = sweep_to_fixed_point(&net, &guard);
        let (again, rep) = deformation_sweep(&settled, &guard, 0.15).unwrap();
        assert_eq!(rep.deficit, 0.0);
        assert_eq!(again, settled);
    }
}

#[test]
fn perturbed_lines_and_crosses_settle_to_lines_and_steiner_trees() {
    let guard = AdmissibilityGuard::new(2);
    for seed in 0..5 {
        let net = line_with_loop(seed);
        assert!(validate(&net).is_ok());
        let ends: Vec<Point> = frozen_points(&net);
        let settled = sweep_to_fixed_point(&net, &guard);
        let d = segment_set_hausdorff(&segs(&settled), &[(ends[0], ends[1])], 16);
        assert!(d <= 1e-9, "line seed {seed}: {d}");
    }
    for seed in 0..5 {
        let net = jittered_cross(seed);
        assert!(validate(&net).is_ok());
        let ends = frozen_points(&net);
        let settled = sweep_to_fixed_point(&net, &guard);
        let d = steiner_trees([ends[0], ends[1], ends[2], ends[3]])
            .iter()
            .map(|t| segment_set_hausdorff(&segs(&settled), t, 16))
            .fold(f64::INFINITY, f64::min);
        assert!(d <= 1e-3, "cross seed {seed}: {d}");
        let adj = settled.adjacency();
        let junctions: Vec<usize> = (0..settled.vertices.len()).filter(|&v| adj[v].len() >= 3).collect();
        assert_eq!(junctions.len(), 2);
        for v in junctions {
            assert_eq!(classify_junction(&settled, v, 5.0).unwrap().kind, JunctionKind::Triple120);
        }
    }
}
