//! Labeled planar networks: the discrete boundary of an open partition of
//! the plane into `regions` labeled cells.
//!
//! Every edge records the label of the region on its left and on its right
//! (relative to the direction `a -> b`). A valid network has no crossings,
//! no edge with equal labels on both sides, and labels that agree around
//! every vertex. Vertices in `frozen` are pinned far-field anchors; they may
//! have degree one.

mod remesh;
mod sweep;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::NetworkError;
use crate::geometry::{segment_contact, Contact, Point, Rect, Segment};
use crate::scalar::{lit, Scalar};

pub use remesh::remesh;
pub(crate) use remesh::remesh_known;
pub(crate) use sweep::sweep_valid;
pub use sweep::{
    deformation_sweep, max_well_decay, AdmissibilityGuard, DeficitReport, MoveKind, MoveRecord,
    Well,
};

/// Region label, `1..=regions`.
pub type Label = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub left: Label,
    pub right: Label,
}

impl Edge {
    pub fn new(a: usize, b: usize, left: Label, right: Label) -> Self {
        Edge { a, b, left, right }
    }

    /// The same edge traversed `b -> a`.
    pub fn reversed(self) -> Self {
        Edge {
            a: self.b,
            b: self.a,
            left: self.right,
            right: self.left,
        }
    }

    pub fn other(&self, v: usize) -> usize {
        if self.a == v {
            self.b
        } else {
            self.a
        }
    }

    /// (left, right) labels seen when leaving `v` along this edge.
    pub fn labels_from(&self, v: usize) -> (Label, Label) {
        if self.a == v {
            (self.left, self.right)
        } else {
            (self.right, self.left)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network<T> {
    pub vertices: Vec<Point<T>>,
    pub edges: Vec<Edge>,
    pub regions: usize,
    pub frozen: BTreeSet<usize>,
}

impl<T: Scalar> Network<T> {
    pub fn new(regions: usize) -> Self {
        Network {
            vertices: Vec::new(),
            edges: Vec::new(),
            regions,
            frozen: BTreeSet::new(),
        }
    }

    pub fn add_vertex(&mut self, p: Point<T>) -> usize {
        self.vertices.push(p);
        self.vertices.len() - 1
    }

    pub fn add_frozen_vertex(&mut self, p: Point<T>) -> usize {
        let v = self.add_vertex(p);
        self.frozen.insert(v);
        v
    }

    pub fn add_edge(&mut self, a: usize, b: usize, left: Label, right: Label) -> usize {
        self.edges.push(Edge::new(a, b, left, right));
        self.edges.len() - 1
    }

    pub fn is_frozen(&self, v: usize) -> bool {
        self.frozen.contains(&v)
    }

    /// Edge ids incident to each vertex, in edge-id order.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for (i, e) in self.edges.iter().enumerate() {
            if e.a < adj.len() {
                adj[e.a].push(i);
            }
            if e.b < adj.len() && e.b != e.a {
                adj[e.b].push(i);
            }
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency().iter().map(Vec::len).collect()
    }

    pub fn edge_points(&self, e: usize) -> (Point<T>, Point<T>) {
        let ed = &self.edges[e];
        (self.vertices[ed.a], self.vertices[ed.b])
    }

    pub fn edge_length(&self, e: usize) -> T {
        let (a, b) = self.edge_points(e);
        a.dist(b)
    }

    pub fn total_length(&self) -> T {
        (0..self.edges.len()).fold(T::zero(), |acc, e| acc + self.edge_length(e))
    }

    /// Unit-multiplicity segments of all non-degenerate edges.
    pub fn segments(&self) -> Vec<Segment<T>> {
        self.edges
            .iter()
            .filter_map(|e| Segment::new(self.vertices[e.a], self.vertices[e.b]).ok())
            .collect()
    }

    pub fn bbox(&self) -> Option<Rect<T>> {
        Rect::bounding(self.vertices.iter().copied())
    }

    /// Number of vertices of each degree `>= 3`, ignoring frozen vertices.
    pub fn junction_census(&self) -> BTreeMap<usize, usize> {
        let mut census = BTreeMap::new();
        for (v, d) in self.degrees().into_iter().enumerate() {
            if d >= 3 && !self.is_frozen(v) {
                *census.entry(d).or_insert(0) += 1;
            }
        }
        census
    }

    /// Outgoing unit direction along edge `e` from its endpoint `v`.
    pub fn outgoing_direction(&self, v: usize, e: usize) -> Option<Point<T>> {
        let w = self.edges[e].other(v);
        (self.vertices[w] - self.vertices[v]).normalized()
    }

    /// Incident edges of `v` sorted counter-clockwise by outgoing angle.
    pub fn ccw_incident(&self, v: usize, incident: &[usize]) -> Vec<usize> {
        let mut list: Vec<(T, usize)> = incident
            .iter()
            .map(|&e| {
                let w = self.edges[e].other(v);
                ((self.vertices[w] - self.vertices[v]).angle(), e)
            })
            .collect();
        list.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.1.cmp(&b.1))
        });
        list.into_iter().map(|(_, e)| e).collect()
    }

    /// Drops vertices of degree zero and renumbers; frozen ids follow.
    pub fn compact(&mut self) {
        let deg = self.degrees();
        let mut map = vec![usize::MAX; self.vertices.len()];
        let mut verts = Vec::new();
        for (v, &d) in deg.iter().enumerate() {
            if d > 0 {
                map[v] = verts.len();
                verts.push(self.vertices[v]);
            }
        }
        for e in &mut self.edges {
            e.a = map[e.a];
            e.b = map[e.b];
        }
        self.frozen = self
            .frozen
            .iter()
            .filter(|&&v| v < map.len() && map[v] != usize::MAX)
            .map(|&v| map[v])
            .collect();
        self.vertices = verts;
    }

    /// Walks from `v` along edge `e` through unfrozen, degree-two, collinear
    /// vertices. Used to treat a subdivided straight arm as one edge.
    pub(crate) fn straight_arm(&self, adj: &[Vec<usize>], v: usize, e: usize) -> Arm<T> {
        let (left, right) = self.edges[e].labels_from(v);
        let origin = self.vertices[v];
        let mut edges = vec![e];
        let mut interior = Vec::new();
        let mut prev = v;
        let mut cur = self.edges[e].other(v);
        let dir = (self.vertices[cur] - origin)
            .normalized()
            .unwrap_or_else(Point::zero);
        loop {
            if cur == v || self.is_frozen(cur) || adj[cur].len() != 2 {
                break;
            }
            let next_e = if adj[cur][0] == *edges.last().unwrap() {
                adj[cur][1]
            } else {
                adj[cur][0]
            };
            let next = self.edges[next_e].other(cur);
            if next == v || interior.contains(&next) {
                break;
            }
            let seg = self.vertices[next] - self.vertices[cur];
            let len = seg.norm();
            let along = (self.vertices[next] - origin).norm();
            if len <= T::zero()
                || dir.cross(seg).abs() > lit::<T>(1e-9) * len.max(along)
                || dir.dot(seg) <= T::zero()
            {
                break;
            }
            if self.edges[next_e].labels_from(cur) != (left, right) {
                break;
            }
            interior.push(cur);
            edges.push(next_e);
            prev = cur;
            cur = next;
        }
        let _ = prev;
        Arm {
            edges,
            anchor: cur,
            left,
            right,
            _t: std::marker::PhantomData,
        }
    }
}

/// A maximal straight run of edges leaving a vertex.
#[derive(Debug, Clone)]
pub(crate) struct Arm<T> {
    pub edges: Vec<usize>,
    /// Degree-two vertices strictly inside the run.
    pub anchor: usize,
    /// Labels on the left/right of the outgoing direction.
    pub left: Label,
    pub right: Label,
    _t: std::marker::PhantomData<T>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NonFinite { vertex: usize },
    BadVertexIndex { edge: usize },
    SelfLoop { edge: usize },
    ZeroLength { edge: usize },
    PhantomEdge { edge: usize },
    LabelOutOfRange { edge: usize },
    Crossing { first: usize, second: usize },
    Overlap { first: usize, second: usize },
    DuplicateEdge { first: usize, second: usize },
    LabelInconsistency { vertex: usize },
    DanglingEndpoint { vertex: usize },
    IsolatedVertex { vertex: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFinite { vertex } => write!(f, "non-finite vertex {vertex}"),
            Violation::BadVertexIndex { edge } => {
                write!(f, "edge {edge} references a missing vertex")
            }
            Violation::SelfLoop { edge } => write!(f, "self loop at edge {edge}"),
            Violation::ZeroLength { edge } => write!(f, "zero-length edge {edge}"),
            Violation::PhantomEdge { edge } => write!(f, "phantom edge {edge}"),
            Violation::LabelOutOfRange { edge } => write!(f, "label out of range on edge {edge}"),
            Violation::Crossing { first, second } => {
                write!(f, "crossing edges {first} and {second}")
            }
            Violation::Overlap { first, second } => {
                write!(f, "overlapping edges {first} and {second}")
            }
            Violation::DuplicateEdge { first, second } => {
                write!(f, "duplicate edges {first} and {second}")
            }
            Violation::LabelInconsistency { vertex } => {
                write!(f, "label inconsistency at vertex {vertex}")
            }
            Violation::DanglingEndpoint { vertex } => {
                write!(f, "dangling endpoint at vertex {vertex}")
            }
            Violation::IsolatedVertex { vertex } => write!(f, "isolated vertex {vertex}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every structural invariant and lists what is broken.
pub fn validate<T: Scalar>(net: &Network<T>) -> ValidationReport {
    let mut out = Vec::new();
    let nv = net.vertices.len();
    for (v, p) in net.vertices.iter().enumerate() {
        if !p.is_finite() {
            out.push(Violation::NonFinite { vertex: v });
        }
    }
    let mut usable = vec![true; net.edges.len()];
    for (i, e) in net.edges.iter().enumerate() {
        if e.a >= nv || e.b >= nv {
            out.push(Violation::BadVertexIndex { edge: i });
            usable[i] = false;
            continue;
        }
        if e.a == e.b {
            out.push(Violation::SelfLoop { edge: i });
            usable[i] = false;
            continue;
        }
        if net.edge_length(i) <= T::zero() {
            out.push(Violation::ZeroLength { edge: i });
            usable[i] = false;
        }
        if e.left == e.right {
            out.push(Violation::PhantomEdge { edge: i });
        }
        let n = net.regions as Label;
        if e.left == 0 || e.right == 0 || e.left > n || e.right > n {
            out.push(Violation::LabelOutOfRange { edge: i });
        }
    }
    if !out.is_empty()
        && out.iter().any(|v| {
            matches!(
                v,
                Violation::BadVertexIndex { .. } | Violation::NonFinite { .. }
            )
        })
    {
        return ValidationReport { violations: out };
    }

    out.extend(crossing_violations(net, &usable));

    let adj = net.adjacency();
    for v in 0..nv {
        match adj[v].len() {
            0 => out.push(Violation::IsolatedVertex { vertex: v }),
            1 => {
                if !net.is_frozen(v) {
                    out.push(Violation::DanglingEndpoint { vertex: v });
                }
            }
            _ => {
                let inc: Vec<usize> = adj[v].iter().copied().filter(|&e| usable[e]).collect();
                if inc.len() < 2 {
                    continue;
                }
                let order = net.ccw_incident(v, &inc);
                let k = order.len();
                for i in 0..k {
                    let (left_i, _) = net.edges[order[i]].labels_from(v);
                    let (_, right_next) = net.edges[order[(i + 1) % k]].labels_from(v);
                    if left_i != right_next {
                        out.push(Violation::LabelInconsistency { vertex: v });
                        break;
                    }
                }
            }
        }
    }
    ValidationReport { violations: out }
}

fn crossing_violations<T: Scalar>(net: &Network<T>, usable: &[bool]) -> Vec<Violation> {
    let mut out = Vec::new();
    let ids: Vec<usize> = (0..net.edges.len()).filter(|&i| usable[i]).collect();
    if ids.len() < 2 {
        return out;
    }
    let bbox = match net.bbox() {
        Some(b) => b,
        None => return out,
    };
    let mean_len = ids.iter().map(|&i| net.edge_length(i)).sum::<T>() / lit::<T>(ids.len() as f64);
    let span = bbox.width().max(bbox.height()).max(T::tiny());
    let max_cells = lit::<T>(1024.0);
    let cell = (mean_len * lit(2.0)).max(span / max_cells).max(T::tiny());
    let key = |p: Point<T>| -> (i64, i64) {
        (
            ((p.x - bbox.min.x) / cell).floor().to_i64().unwrap_or(0),
            ((p.y - bbox.min.y) / cell).floor().to_i64().unwrap_or(0),
        )
    };
    let mut ranges = vec![((0i64, 0i64), (0i64, 0i64)); net.edges.len()];
    let mut cells: Vec<((i64, i64), usize)> = Vec::new();
    for &i in &ids {
        let (a, b) = net.edge_points(i);
        let (ka, kb) = (key(a), key(b));
        let lo = (ka.0.min(kb.0), ka.1.min(kb.1));
        let hi = (ka.0.max(kb.0), ka.1.max(kb.1));
        ranges[i] = (lo, hi);
        for gx in lo.0..=hi.0 {
            for gy in lo.1..=hi.1 {
                cells.push(((gx, gy), i));
            }
        }
    }
    cells.sort_unstable();
    let mut start = 0;
    while start < cells.len() {
        let k = cells[start].0;
        let mut end = start + 1;
        while end < cells.len() && cells[end].0 == k {
            end += 1;
        }
        let bucket = &cells[start..end];
        start = end;
        for x in 0..bucket.len() {
            for y in (x + 1)..bucket.len() {
                let (i, j) = (bucket[x].1, bucket[y].1);
                let (ri, rj) = (ranges[i].0, ranges[j].0);
                if (ri.0.max(rj.0), ri.1.max(rj.1)) != k {
                    continue;
                }
                let (ei, ej) = (net.edges[i], net.edges[j]);
                let shared_count = [ei.a == ej.a, ei.a == ej.b, ei.b == ej.a, ei.b == ej.b]
                    .iter()
                    .filter(|&&s| s)
                    .count();
                if shared_count >= 2 {
                    out.push(Violation::DuplicateEdge {
                        first: i,
                        second: j,
                    });
                    continue;
                }
                let (p0, p1) = net.edge_points(i);
                let (q0, q1) = net.edge_points(j);
                match segment_contact(p0, p1, q0, q1, shared_count == 1) {
                    Contact::Disjoint => {}
                    Contact::Touch => out.push(Violation::Crossing {
                        first: i,
                        second: j,
                    }),
                    Contact::Overlap => out.push(Violation::Overlap {
                        first: i,
                        second: j,
                    }),
                }
            }
        }
    }
    out.sort_by_key(|v| match v {
        Violation::Crossing { first, second }
        | Violation::Overlap { first, second }
        | Violation::DuplicateEdge { first, second } => (*first, *second),
        _ => (usize::MAX, usize::MAX),
    });
    out
}

/// Green's-theorem contributions `∮ x dy`-style of a set of labeled
/// segments to the area of each label, relative to `origin`.
pub(crate) fn label_area_sums<T: Scalar>(
    segs: impl IntoIterator<Item = (Point<T>, Point<T>, Label, Label)>,
    origin: Point<T>,
) -> BTreeMap<Label, T> {
    let half = lit::<T>(0.5);
    let mut m = BTreeMap::new();
    for (a, b, left, right) in segs {
        let c = (a - origin).cross(b - origin) * half;
        *m.entry(left).or_insert_with(T::zero) += c;
        *m.entry(right).or_insert_with(T::zero) -= c;
    }
    m
}

fn labeled_segments<T: Scalar>(
    net: &Network<T>,
) -> impl Iterator<Item = (Point<T>, Point<T>, Label, Label)> + '_ {
    net.edges
        .iter()
        .map(move |e| (net.vertices[e.a], net.vertices[e.b], e.left, e.right))
}

/// Signed area change of every region between two networks sharing the
/// same frozen far-field frame. Bounded regions are exact; unbounded ones
/// are exact as long as the far-field boundary is unchanged.
pub fn region_area_changes<T: Scalar>(
    before: &Network<T>,
    after: &Network<T>,
) -> Result<BTreeMap<Label, T>, NetworkError> {
    if before.regions != after.regions {
        return Err(NetworkError::RegionCountMismatch(
            before.regions,
            after.regions,
        ));
    }
    let origin = before
        .bbox()
        .map(|b| b.min.midpoint(b.max))
        .unwrap_or_else(Point::zero);
    let sb = label_area_sums(labeled_segments(before), origin);
    let sa = label_area_sums(labeled_segments(after), origin);
    let mut out = BTreeMap::new();
    for l in 1..=before.regions as Label {
        let d = sa.get(&l).copied().unwrap_or_else(T::zero)
            - sb.get(&l).copied().unwrap_or_else(T::zero);
        out.insert(l, d);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn theta_network_is_valid() {
        let net = fixtures::theta(0.5, 0.4, 16);
        assert!(validate(&net).is_ok(), "{}", validate(&net));
    }

    #[test]
    fn crossing_detected() {
        let mut net = Network::<f64>::new(2);
        let a = net.add_frozen_vertex(Point::new(-1.0, 0.0));
        let b = net.add_frozen_vertex(Point::new(1.0, 0.0));
        let c = net.add_frozen_vertex(Point::new(0.0, -1.0));
        let d = net.add_frozen_vertex(Point::new(0.0, 1.0));
        net.add_edge(a, b, 1, 2);
        net.add_edge(c, d, 1, 2);
        let rep = validate(&net);
        assert!(rep
            .violations
            .iter()
            .any(|v| matches!(v, Violation::Crossing { .. })));
        assert!(rep.to_string().contains("crossing"));
    }

    #[test]
    fn phantom_edge_detected() {
        let mut net = fixtures::straight_line(2.0, 4);
        net.edges[1].right = net.edges[1].left;
        let rep = validate(&net);
        assert!(rep.to_string().contains("phantom edge"));
    }

    #[test]
    fn dangling_and_inconsistent_labels() {
        let mut net = fixtures::straight_line(2.0, 1);
        net.frozen.clear();
        let rep = validate(&net);
        assert!(rep
            .violations
            .iter()
            .any(|v| matches!(v, Violation::DanglingEndpoint { .. })));

        let mut net = fixtures::straight_line(2.0, 3);
        net.edges[1] = Edge::new(net.edges[1].a, net.edges[1].b, 2, 1);
        let rep = validate(&net);
        assert!(rep
            .violations
            .iter()
            .any(|v| matches!(v, Violation::LabelInconsistency { .. })));
    }

    #[test]
    fn identity_area_change_is_zero() {
        let net = fixtures::circle(Point::zero(), 1.0, 64, 2, 1);
        let d = region_area_changes(&net, &net).unwrap();
        assert!(d.values().all(|v| *v == 0.0));
    }

    #[test]
    fn collapsed_disc_area_change() {
        let rho = 0.3;
        let mut before = fixtures::straight_line(4.0, 2);
        before.regions = 2;
        let circle = fixtures::circle(Point::new(0.0, 1.0), rho, 400, 2, 1);
        let after = before.clone();
        let mut with_circle = before.clone();
        let off = with_circle.vertices.len();
        with_circle.vertices.extend(circle.vertices.iter().copied());
        for e in &circle.edges {
            with_circle.add_edge(e.a + off, e.b + off, e.left, e.right);
        }
        let d = region_area_changes(&with_circle, &after).unwrap();
        // polygon area of a regular 400-gon
        let n = 400.0;
        let poly = 0.5 * n * rho * rho * (2.0 * std::f64::consts::PI / n).sin();
        assert!((d[&2] + poly).abs() < 1e-12);
        assert!((d[&1] - poly).abs() < 1e-12);
    }

    #[test]
    fn moving_vertex_on_chain_swaps_area_between_sides() {
        let before = fixtures::straight_line(2.0, 2);
        let mut after = before.clone();
        let mid = 1;
        after.vertices[mid].y += 0.1;
        let d = region_area_changes(&before, &after).unwrap();
        // triangle of base 2 and height 0.1; region 1 lies above the line
        assert!((d[&1] + 0.1).abs() < 1e-12, "{d:?}");
        assert!((d[&2] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn mismatched_region_count() {
        let a = fixtures::straight_line(2.0, 2);
        let mut b = a.clone();
        b.regions = 3;
        assert!(region_area_changes(&a, &b).is_err());
    }

    #[test]
    fn straight_arm_walks_collinear_chain() {
        let net = fixtures::triple_junction(Point::zero(), 1.0, 10);
        let adj = net.adjacency();
        let center = 0;
        for &e in &adj[center] {
            let arm = net.straight_arm(&adj, center, e);
            assert_eq!(arm.edges.len(), 10);
            assert!(net.is_frozen(arm.anchor));
        }
    }
}
