//! Builders for the reference configurations used by the bundled
//! scenarios, the tests and the acceptance suite.

use crate::geometry::Point;
use crate::network::{Label, Network};

fn chain(net: &mut Network<f64>, from: usize, to: usize, pieces: usize, left: Label, right: Label) {
    let a = net.vertices[from];
    let b = net.vertices[to];
    let n = pieces.max(1);
    let mut prev = from;
    for k in 1..n {
        let p = a.lerp(b, k as f64 / n as f64);
        let v = net.add_vertex(p);
        net.add_edge(prev, v, left, right);
        prev = v;
    }
    net.add_edge(prev, to, left, right);
}

/// Horizontal segment of length `len` centered at the origin, split into
/// `pieces` edges, frozen at both ends. Region 1 above, region 2 below.
pub fn straight_line(len: f64, pieces: usize) -> Network<f64> {
    let mut net = Network::new(2);
    let half = len * 0.5;
    let a = net.add_frozen_vertex(Point::new(-half, 0.0));
    let n = pieces.max(1);
    let mut prev = a;
    for k in 1..n {
        let x = -half + len * (k as f64 / n as f64);
        let v = net.add_vertex(Point::new(x, 0.0));
        net.add_edge(prev, v, 1, 2);
        prev = v;
    }
    let b = net.add_frozen_vertex(Point::new(half, 0.0));
    net.add_edge(prev, b, 1, 2);
    net
}

/// Regular `n`-gon inscribed in the circle, counter-clockwise, with
/// `inside` on the left of every edge.
pub fn circle(
    center: Point<f64>,
    radius: f64,
    n: usize,
    inside: Label,
    outside: Label,
) -> Network<f64> {
    let mut net = Network::new(inside.max(outside) as usize);
    add_circle(&mut net, center, radius, n, inside, outside);
    net
}

pub fn add_circle(
    net: &mut Network<f64>,
    center: Point<f64>,
    radius: f64,
    n: usize,
    inside: Label,
    outside: Label,
) {
    let first = net.vertices.len();
    for k in 0..n {
        let th = (2.0) * std::f64::consts::PI * (k as f64 / n as f64);
        net.add_vertex(center + Point::from_angle(th) * radius);
    }
    for k in 0..n {
        net.add_edge(first + k, first + (k + 1) % n, inside, outside);
    }
}

/// Star of straight arms leaving `center` at the given angles (radians,
/// increasing counter-clockwise), each split into `pieces` edges and
/// frozen at its far end. The sector after arm `k` is region `k + 1`.
pub fn star(center: Point<f64>, angles: &[f64], arm: f64, pieces: usize) -> Network<f64> {
    let m = angles.len();
    let mut net = Network::new(m);
    let c = net.add_vertex(center);
    for (k, &th) in angles.iter().enumerate() {
        let end = net.add_frozen_vertex(center + Point::from_angle(th) * arm);
        let left = (k + 1) as Label;
        let right = ((k + m - 1) % m + 1) as Label;
        chain(&mut net, c, end, pieces, left, right);
    }
    net
}

/// Balanced triple junction with arms at 90°, 210° and 330°.
pub fn triple_junction(center: Point<f64>, arm: f64, pieces: usize) -> Network<f64> {
    let d = |deg: f64| deg.to_radians();
    star(center, &[d(90.0), d(210.0), d(330.0)], arm, pieces)
}

/// Two perpendicular lines crossing at `center`.
pub fn cross(center: Point<f64>, arm: f64, pieces: usize) -> Network<f64> {
    let d = |deg: f64| deg.to_radians();
    star(center, &[d(0.0), d(90.0), d(180.0), d(270.0)], arm, pieces)
}

/// Theta network: two vertices at `(±half_width, 0)` joined by a parabolic
/// upper arc of height `height`, a straight middle arc and the mirrored
/// lower arc. Region 1 outside, 2 upper lens, 3 lower lens.
pub fn theta(half_width: f64, height: f64, per_arc: usize) -> Network<f64> {
    let mut net = Network::new(3);
    let l = net.add_vertex(Point::new(-half_width, 0.0));
    let r = net.add_vertex(Point::new(half_width, 0.0));
    let n = per_arc.max(2);
    for (sign, left, right) in [(1.0, 1, 2), (-1.0, 3, 1)] {
        let mut prev = l;
        for k in 1..n {
            let s = -1.0 + 2.0 * k as f64 / n as f64;
            let p = Point::new(half_width * s, sign * height * (1.0 - s * s));
            let v = net.add_vertex(p);
            net.add_edge(prev, v, left, right);
            prev = v;
        }
        net.add_edge(prev, r, left, right);
    }
    chain(&mut net, l, r, n, 2, 3);
    net
}

/// Regular hexagon (region 1) with a straight spoke leaving each corner
/// radially to a frozen far-field point; regions 2..=7 are the sectors.
pub fn hexagon6(side: f64, reach: f64, per_edge: usize) -> Network<f64> {
    let mut net = Network::new(7);
    let corners: Vec<usize> = (0..6)
        .map(|k| net.add_vertex(Point::from_angle((60.0 * k as f64).to_radians()) * side))
        .collect();
    for k in 0..6 {
        let next = corners[(k + 1) % 6];
        chain(&mut net, corners[k], next, per_edge, 1, (k + 2) as Label);
    }
    for k in 0..6 {
        let far = net.add_frozen_vertex(Point::from_angle((60.0 * k as f64).to_radians()) * reach);
        let left = (k + 2) as Label;
        let right = ((k + 5) % 6 + 2) as Label;
        chain(&mut net, corners[k], far, per_edge, left, right);
    }
    net
}

/// Two disjoint circles of radius `radius` centered at `(±offset, 0)`.
pub fn two_circles(offset: f64, radius: f64, n: usize) -> Network<f64> {
    let mut net = Network::new(3);
    add_circle(&mut net, Point::new(-offset, 0.0), radius, n, 2, 1);
    add_circle(&mut net, Point::new(offset, 0.0), radius, n, 3, 1);
    net
}

/// Polyline graph of `f` over `[x0, x1]` with `pieces` edges, frozen at the
/// ends. Region 1 above, region 2 below.
pub fn graph_of(f: impl Fn(f64) -> f64, x0: f64, x1: f64, pieces: usize) -> Network<f64> {
    let mut net = Network::new(2);
    let n = pieces.max(1);
    let mut prev = net.add_frozen_vertex(Point::new(x0, f(x0)));
    for k in 1..=n {
        let x = x0 + (x1 - x0) * (k as f64 / n as f64);
        let p = Point::new(x, f(x));
        let v = if k == n {
            net.add_frozen_vertex(p)
        } else {
            net.add_vertex(p)
        };
        net.add_edge(prev, v, 1, 2);
        prev = v;
    }
    net
}

/// Parallel horizontal lines at heights `±d` over `[-half_len, half_len]`.
/// Regions 1 (above), 2 (between), 3 (below).
pub fn two_sheets(d: f64, half_len: f64, pieces: usize) -> Network<f64> {
    let mut net = Network::new(3);
    for (y, left, right) in [(d, 1, 2), (-d, 2, 3)] {
        let a = net.add_frozen_vertex(Point::new(-half_len, y));
        let b = net.add_frozen_vertex(Point::new(half_len, y));
        chain(&mut net, a, b, pieces, left, right);
    }
    net
}
