//! Length-reducing deformation sweep built from a small catalog of local
//! moves, each screened by an [`AdmissibilityGuard`].

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{label_area_sums, validate, Edge, Label, Network};
use crate::error::NetworkError;
use crate::geometry::{gauss_legendre_unit, segment_set_hausdorff, Point};
use crate::scalar::{lit, Scalar};

/// `φ(z) = A·exp(−λ·sqrt(1 + |z − a|²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Well<T> {
    pub center: Point<T>,
    pub decay: T,
    pub amplitude: T,
}

impl<T: Scalar> Well<T> {
    pub fn new(center: Point<T>, decay: T, amplitude: T) -> Self {
        Well {
            center,
            decay,
            amplitude,
        }
    }

    pub fn value(&self, z: Point<T>) -> T {
        let s = (T::one() + (z - self.center).norm_sq()).sqrt();
        self.amplitude * (-self.decay * s).exp()
    }

    pub fn gradient(&self, z: Point<T>) -> Point<T> {
        let d = z - self.center;
        let s = (T::one() + d.norm_sq()).sqrt();
        d * (-self.decay * self.value(z) / s)
    }

    /// Hessian as `(xx, xy, yy)`.
    pub fn hessian(&self, z: Point<T>) -> (T, T, T) {
        let d = z - self.center;
        let s2 = T::one() + d.norm_sq();
        let s = s2.sqrt();
        let phi = self.value(z);
        let l = self.decay;
        // ∂i∂j φ = φ·[λ² di dj / s² − λ (δij / s − di dj / s³)]
        let term = |di: T, dj: T, delta: T| {
            phi * (l * l * di * dj / s2 - l * (delta / s - di * dj / (s2 * s)))
        };
        (
            term(d.x, d.x, T::one()),
            term(d.x, d.y, T::zero()),
            term(d.y, d.y, T::one()),
        )
    }

    /// Membership in the class with `|∇φ| ≤ jφ`, `‖∇²φ‖ ≤ jφ`, `φ ≤ 1`.
    pub fn in_class(&self, j: u32) -> bool {
        let j = lit::<T>(j as f64);
        self.amplitude <= T::one()
            && self.amplitude > T::zero()
            && self.decay >= T::zero()
            && self.decay + self.decay * self.decay <= j
    }
}

/// Largest well decay admitted for scheme index `j`: the root of `λ + λ² = j`.
pub fn max_well_decay<T: Scalar>(j: u32) -> T {
    let j = lit::<T>(j as f64);
    ((T::one() + lit::<T>(4.0) * j).sqrt() - T::one()) * lit(0.5)
}

/// Per-move screening. Wells are stored relative to the move center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityGuard<T> {
    pub j: u32,
    pub max_displacement: T,
    pub max_area_swap: T,
    pub angle_tol_deg: T,
    pub wells: Vec<Well<T>>,
}

impl<T: Scalar> AdmissibilityGuard<T> {
    pub fn new(j: u32) -> Self {
        let jj = lit::<T>(j.max(1) as f64);
        AdmissibilityGuard {
            j: j.max(1),
            max_displacement: T::one() / (jj * jj),
            max_area_swap: T::one() / jj,
            angle_tol_deg: lit(5.0),
            wells: default_wells(j.max(1)),
        }
    }

    pub fn with_angle_tol(mut self, deg: T) -> Self {
        self.angle_tol_deg = deg;
        self
    }

    pub fn mass_decay_floor(&self, diam: T) -> T {
        (-lit::<T>(self.j as f64) * diam).exp()
    }

    fn check(&self, c: &Candidate<T>, before_in_c: T) -> Result<(), Veto> {
        if c.displacement > self.max_displacement {
            return Err(Veto::Displacement);
        }
        if c.areas.values().any(|a| a.abs() > self.max_area_swap) {
            return Err(Veto::AreaSwap);
        }
        let after_in_c = (before_in_c + c.length_change).max(T::zero());
        let floor = self.mass_decay_floor(c.radius * lit(2.0));
        if after_in_c <= floor * before_in_c {
            return Ok(());
        }
        let slack = lit::<T>(1e-12) * (T::one() + before_in_c);
        for w in &self.wells {
            let well = Well::new(c.location + w.center, w.decay, w.amplitude);
            let removed = well_integral(&well, &c.removed_geometry);
            let added = well_integral(&well, &c.added_geometry);
            if added > removed + slack {
                return Err(Veto::MassDecay);
            }
        }
        Ok(())
    }
}

fn default_wells<T: Scalar>(j: u32) -> Vec<Well<T>> {
    let lmax = max_well_decay::<T>(j);
    let mut offsets = vec![Point::zero()];
    for &r in &[0.25, 1.0, 4.0] {
        for k in 0..8 {
            let th = lit::<T>((45.0 * k as f64).to_radians());
            offsets.push(Point::from_angle(th) * lit(r));
        }
    }
    let mut out = Vec::with_capacity(offsets.len() * 3);
    for &frac in &[1.0, 0.5, 0.25] {
        for &o in &offsets {
            out.push(Well::new(o, lmax * lit(frac), T::one()));
        }
    }
    out
}

fn well_integral<T: Scalar>(w: &Well<T>, segs: &[(Point<T>, Point<T>)]) -> T {
    let gl = gauss_legendre_unit(4);
    let piece = lit::<T>(0.05);
    let mut total = T::zero();
    for &(a, b) in segs {
        let len = a.dist(b);
        let n = (len / piece).ceil().to_usize().unwrap_or(1).max(1);
        let h = T::one() / lit::<T>(n as f64);
        for k in 0..n {
            let t0 = lit::<T>(k as f64) * h;
            for &(x, wt) in &gl {
                let p = a.lerp(b, t0 + h * lit(x));
                total += w.value(p) * lit::<T>(wt) * h * len;
            }
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    Collapse,
    PhantomDelete,
    Retract,
    Split,
    Relocate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveRecord<T> {
    pub kind: MoveKind,
    pub location: Point<T>,
    pub length_change: T,
    pub areas_swapped: BTreeMap<Label, T>,
    pub displacement: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeficitReport<T> {
    /// Sum of the accepted length changes; never positive.
    pub deficit: T,
    pub moves: Vec<MoveRecord<T>>,
    /// Junctions left with a consecutive angle below `60° − angle_tol`.
    pub unresolved: Vec<usize>,
    /// Candidates rejected by the guard or by post-move validation.
    pub vetoed: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Veto {
    Displacement,
    AreaSwap,
    MassDecay,
}

#[derive(Debug, Clone, Copy)]
enum VRef {
    Old(usize),
    New(usize),
}

#[derive(Debug, Clone)]
struct Candidate<T> {
    kind: MoveKind,
    vertex: usize,
    location: Point<T>,
    radius: T,
    removed: Vec<usize>,
    new_vertices: Vec<Point<T>>,
    added: Vec<(VRef, VRef, Label, Label)>,
    removed_geometry: Vec<(Point<T>, Point<T>)>,
    added_geometry: Vec<(Point<T>, Point<T>)>,
    length_change: T,
    displacement: T,
    areas: BTreeMap<Label, T>,
}

impl<T: Scalar> Candidate<T> {
    /// Fills geometry, length change, area swaps and the enclosing ball.
    fn build(
        net: &Network<T>,
        kind: MoveKind,
        vertex: usize,
        location: Point<T>,
        removed: Vec<usize>,
        new_vertices: Vec<Point<T>>,
        added: Vec<(VRef, VRef, Label, Label)>,
    ) -> Self {
        let pos = |r: VRef| match r {
            VRef::Old(v) => net.vertices[v],
            VRef::New(k) => new_vertices[k],
        };
        let removed_geometry: Vec<_> = removed.iter().map(|&e| net.edge_points(e)).collect();
        let added_geometry: Vec<_> = added.iter().map(|&(a, b, _, _)| (pos(a), pos(b))).collect();
        let lr: T = removed_geometry.iter().map(|(a, b)| a.dist(*b)).sum();
        let la: T = added_geometry.iter().map(|(a, b)| a.dist(*b)).sum();
        let sr = label_area_sums(
            removed.iter().map(|&e| {
                let ed = net.edges[e];
                (net.vertices[ed.a], net.vertices[ed.b], ed.left, ed.right)
            }),
            location,
        );
        let sa = label_area_sums(
            added.iter().map(|&(a, b, l, r)| (pos(a), pos(b), l, r)),
            location,
        );
        let mut areas = BTreeMap::new();
        for l in sr.keys().chain(sa.keys()) {
            let d = sa.get(l).copied().unwrap_or_else(T::zero)
                - sr.get(l).copied().unwrap_or_else(T::zero);
            areas.insert(*l, d);
        }
        let mut radius = T::zero();
        for (a, b) in removed_geometry.iter().chain(added_geometry.iter()) {
            radius = radius.max(location.dist(*a)).max(location.dist(*b));
        }
        let displacement = match kind {
            MoveKind::PhantomDelete => T::zero(),
            MoveKind::Retract => radius,
            _ => segment_set_hausdorff(&removed_geometry, &added_geometry, 32),
        };
        Candidate {
            kind,
            vertex,
            location,
            radius: radius * (T::one() + lit(1e-9)),
            removed,
            new_vertices,
            added,
            removed_geometry,
            added_geometry,
            length_change: la - lr,
            displacement,
            areas,
        }
    }

    fn overlaps(&self, other: &(Point<T>, T)) -> bool {
        self.location.dist(other.0) < self.radius + other.1
    }
}

struct Work<T> {
    vertices: Vec<Point<T>>,
    edges: Vec<Edge>,
    alive: Vec<bool>,
    frozen: BTreeSet<usize>,
    regions: usize,
}

impl<T: Scalar> Work<T> {
    fn from(net: &Network<T>) -> Self {
        Work {
            vertices: net.vertices.clone(),
            edges: net.edges.clone(),
            alive: vec![true; net.edges.len()],
            frozen: net.frozen.clone(),
            regions: net.regions,
        }
    }

    fn snapshot(&self) -> Network<T> {
        let mut net = Network {
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .zip(&self.alive)
                .filter(|(_, &a)| a)
                .map(|(e, _)| *e)
                .collect(),
            regions: self.regions,
            frozen: self.frozen.clone(),
        };
        net.compact();
        net
    }

    fn mass_in_ball(&self, c: Point<T>, r: T) -> T {
        let mut m = T::zero();
        for (e, &alive) in self.edges.iter().zip(&self.alive) {
            if !alive {
                continue;
            }
            let (a, b) = (self.vertices[e.a], self.vertices[e.b]);
            if let Some((t0, t1)) = crate::geometry::clip_to_disc(a, b, c, r) {
                m += (t1 - t0) * a.dist(b);
            }
        }
        m
    }

    /// Applies the candidate; returns what is needed to undo it.
    fn apply(&mut self, c: &Candidate<T>) -> (usize, usize) {
        let (nv, ne) = (self.vertices.len(), self.edges.len());
        for &e in &c.removed {
            self.alive[e] = false;
        }
        self.vertices.extend(c.new_vertices.iter().copied());
        for &(a, b, l, r) in &c.added {
            let id = |x: VRef| match x {
                VRef::Old(v) => v,
                VRef::New(k) => nv + k,
            };
            self.edges.push(Edge::new(id(a), id(b), l, r));
            self.alive.push(true);
        }
        (nv, ne)
    }

    fn undo(&mut self, c: &Candidate<T>, mark: (usize, usize)) {
        self.vertices.truncate(mark.0);
        self.edges.truncate(mark.1);
        self.alive.truncate(mark.1);
        for &e in &c.removed {
            self.alive[e] = true;
        }
    }
}

/// One greedy pass of the move catalog. Candidates are generated from the
/// input network, ordered by descending saving (ties: lowest vertex id, then
/// move kind) and applied when their ball does not meet a ball already used
/// in this pass, the guard admits them and the result validates.
pub fn deformation_sweep<T: Scalar>(
    net: &Network<T>,
    guard: &AdmissibilityGuard<T>,
    r_def: T,
) -> Result<(Network<T>, DeficitReport<T>), NetworkError> {
    let report = validate(net);
    if !report.is_ok() {
        return Err(NetworkError::Invalid(report));
    }
    sweep_valid(net, guard, r_def)
}

/// [`deformation_sweep`] for a network already known to be valid.
pub(crate) fn sweep_valid<T: Scalar>(
    net: &Network<T>,
    guard: &AdmissibilityGuard<T>,
    r_def: T,
) -> Result<(Network<T>, DeficitReport<T>), NetworkError> {
    if !(r_def > T::zero()) || r_def > guard.max_displacement * (T::one() + lit(1e-12)) {
        return Err(NetworkError::DeformationRadius);
    }
    let scale = net.total_length().max(T::one());
    let min_saving = lit::<T>(1e-12) * scale;

    let adj = net.adjacency();
    let mut cands = Vec::new();
    cands.extend(collapse_candidates(net, &adj, r_def / lit(100.0)));
    cands.extend(phantom_candidates(net, &adj));
    cands.extend(retract_candidates(net, &adj, r_def));
    cands.extend(split_candidates(net, &adj, min_saving));
    cands.extend(relocate_candidates(net, &adj, min_saving));
    cands.retain(|c| c.length_change <= T::zero());
    cands.sort_by(|a, b| {
        a.length_change
            .partial_cmp(&b.length_change)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.vertex.cmp(&b.vertex))
            .then(a.kind.cmp(&b.kind))
    });

    let mut work = Work::from(net);
    let mut used: Vec<(Point<T>, T)> = Vec::new();
    let mut moves = Vec::new();
    let mut vetoed = 0;
    let mut deficit = T::zero();
    for c in &cands {
        if used.iter().any(|u| c.overlaps(u)) {
            continue;
        }
        let before = work.mass_in_ball(c.location, c.radius);
        if guard.check(c, before).is_err() {
            vetoed += 1;
            continue;
        }
        let mark = work.apply(c);
        if !validate(&work.snapshot()).is_ok() {
            work.undo(c, mark);
            vetoed += 1;
            continue;
        }
        used.push((c.location, c.radius));
        deficit += c.length_change;
        moves.push(MoveRecord {
            kind: c.kind,
            location: c.location,
            length_change: c.length_change,
            areas_swapped: c.areas.clone(),
            displacement: c.displacement,
        });
    }
    let out = work.snapshot();
    let unresolved = unresolved_junctions(&out, guard.angle_tol_deg);
    Ok((
        out,
        DeficitReport {
            deficit,
            moves,
            unresolved,
            vetoed,
        },
    ))
}

/// Unfrozen junctions with a consecutive angle below `60° − tol`.
pub(crate) fn unresolved_junctions<T: Scalar>(net: &Network<T>, tol_deg: T) -> Vec<usize> {
    let adj = net.adjacency();
    let limit = (lit::<T>(60.0) - tol_deg).to_radians();
    let mut out = Vec::new();
    for v in 0..net.vertices.len() {
        if adj[v].len() < 3 || net.is_frozen(v) {
            continue;
        }
        let order = net.ccw_incident(v, &adj[v]);
        let ang: Vec<T> = order
            .iter()
            .map(|&e| (net.vertices[net.edges[e].other(v)] - net.vertices[v]).angle())
            .collect();
        let k = ang.len();
        let two_pi = lit::<T>(std::f64::consts::TAU);
        let min_gap = (0..k)
            .map(|i| {
                let mut g = ang[(i + 1) % k] - ang[i];
                if g <= T::zero() {
                    g += two_pi;
                }
                g
            })
            .fold(two_pi, |a, b| a.min(b));
        if min_gap < limit {
            out.push(v);
        }
    }
    out
}

fn collapse_candidates<T: Scalar>(
    net: &Network<T>,
    adj: &[Vec<usize>],
    delta_min: T,
) -> Vec<Candidate<T>> {
    let mut out = Vec::new();
    'edges: for (e, ed) in net.edges.iter().enumerate() {
        if net.edge_length(e) >= delta_min {
            continue;
        }
        let (fa, fb) = (net.is_frozen(ed.a), net.is_frozen(ed.b));
        if fa && fb {
            continue;
        }
        let (target, new_vertices) = if fa {
            (VRef::Old(ed.a), vec![])
        } else if fb {
            (VRef::Old(ed.b), vec![])
        } else {
            (
                VRef::New(0),
                vec![net.vertices[ed.a].midpoint(net.vertices[ed.b])],
            )
        };
        let location = net.vertices[ed.a].midpoint(net.vertices[ed.b]);
        let mut removed = Vec::new();
        let mut added = Vec::new();
        for &x in &[ed.a, ed.b] {
            for &f in &adj[x] {
                if f == e || removed.contains(&f) {
                    continue;
                }
                let w = net.edges[f].other(x);
                if w == ed.a || w == ed.b {
                    continue 'edges;
                }
                removed.push(f);
                let (l, r) = net.edges[f].labels_from(x);
                added.push((target, VRef::Old(w), l, r));
            }
        }
        removed.push(e);
        out.push(Candidate::build(
            net,
            MoveKind::Collapse,
            ed.a.min(ed.b),
            location,
            removed,
            new_vertices,
            added,
        ));
    }
    out
}

fn phantom_candidates<T: Scalar>(net: &Network<T>, adj: &[Vec<usize>]) -> Vec<Candidate<T>> {
    let mut seen = vec![false; net.edges.len()];
    let mut out = Vec::new();
    for start in 0..net.edges.len() {
        if seen[start] || net.edges[start].left != net.edges[start].right {
            continue;
        }
        let mut cluster = Vec::new();
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(e) = stack.pop() {
            cluster.push(e);
            for &v in &[net.edges[e].a, net.edges[e].b] {
                for &f in &adj[v] {
                    if !seen[f] && net.edges[f].left == net.edges[f].right {
                        seen[f] = true;
                        stack.push(f);
                    }
                }
            }
        }
        cluster.sort_unstable();
        let pts: Vec<Point<T>> = cluster
            .iter()
            .flat_map(|&e| {
                let (a, b) = net.edge_points(e);
                [a, b]
            })
            .collect();
        let location = centroid(&pts);
        let vertex = cluster
            .iter()
            .map(|&e| net.edges[e].a.min(net.edges[e].b))
            .min()
            .unwrap_or(0);
        out.push(Candidate::build(
            net,
            MoveKind::PhantomDelete,
            vertex,
            location,
            cluster,
            vec![],
            vec![],
        ));
    }
    out
}

fn centroid<T: Scalar>(pts: &[Point<T>]) -> Point<T> {
    if pts.is_empty() {
        return Point::zero();
    }
    let mut s = Point::zero();
    for &p in pts {
        s += p;
    }
    s * (T::one() / lit::<T>(pts.len() as f64))
}

fn retract_candidates<T: Scalar>(
    net: &Network<T>,
    adj: &[Vec<usize>],
    r_def: T,
) -> Vec<Candidate<T>> {
    let nv = net.vertices.len();
    let mut comp = vec![usize::MAX; nv];
    let mut out = Vec::new();
    for s in 0..nv {
        if comp[s] != usize::MAX || adj[s].is_empty() {
            continue;
        }
        let mut verts = vec![s];
        comp[s] = s;
        let mut i = 0;
        while i < verts.len() {
            let v = verts[i];
            i += 1;
            for &e in &adj[v] {
                let w = net.edges[e].other(v);
                if comp[w] == usize::MAX {
                    comp[w] = s;
                    verts.push(w);
                }
            }
        }
        if verts.iter().any(|&v| net.is_frozen(v)) {
            continue;
        }
        let pts: Vec<Point<T>> = verts.iter().map(|&v| net.vertices[v]).collect();
        let bb = match crate::geometry::Rect::bounding(pts.iter().copied()) {
            Some(b) => b,
            None => continue,
        };
        if (bb.width() * bb.width() + bb.height() * bb.height()).sqrt() >= r_def {
            continue;
        }
        let edges: BTreeSet<usize> = verts.iter().flat_map(|&v| adj[v].iter().copied()).collect();
        let pair = |e: &Edge| (e.left.min(e.right), e.left.max(e.right));
        let first = pair(&net.edges[*edges.iter().next().unwrap()]);
        if edges.iter().any(|&e| pair(&net.edges[e]) != first) {
            continue;
        }
        let location = centroid(&pts);
        let vertex = *verts.iter().min().unwrap();
        out.push(Candidate::build(
            net,
            MoveKind::Retract,
            vertex,
            location,
            edges.into_iter().collect(),
            vec![],
            vec![],
        ));
    }
    out
}

/// Weiszfeld iteration for the point minimizing the sum of distances.
fn weiszfeld_step<T: Scalar>(x: Point<T>, pts: &[Point<T>]) -> Point<T> {
    let mut num = Point::zero();
    let mut den = T::zero();
    for &p in pts {
        let d = x.dist(p);
        if d < T::tiny() * lit(1e-3) {
            return p;
        }
        num += p * (T::one() / d);
        den += T::one() / d;
    }
    num * (T::one() / den)
}

fn geometric_median<T: Scalar>(pts: &[Point<T>], init: Point<T>) -> Point<T> {
    let mut x = init;
    let scale = pts
        .iter()
        .map(|p| p.dist(init))
        .fold(T::zero(), |a, b| a.max(b))
        .max(T::tiny());
    for _ in 0..4000 {
        let y = weiszfeld_step(x, pts);
        let moved = y.dist(x);
        x = y;
        if moved <= lit::<T>(1e-15) * scale {
            break;
        }
    }
    x
}

struct Branch<T> {
    edges: Vec<usize>,
    anchor: usize,
    dir: Point<T>,
    left: Label,
    right: Label,
}

fn branches<T: Scalar>(net: &Network<T>, adj: &[Vec<usize>], v: usize) -> Option<Vec<Branch<T>>> {
    let order = net.ccw_incident(v, &adj[v]);
    let mut out = Vec::with_capacity(order.len());
    for e in order {
        let arm = net.straight_arm(adj, v, e);
        let dir = net.outgoing_direction(v, e)?;
        out.push(Branch {
            edges: arm.edges,
            anchor: arm.anchor,
            dir,
            left: arm.left,
            right: arm.right,
        });
    }
    let anchors: BTreeSet<usize> = out.iter().map(|b| b.anchor).collect();
    if anchors.len() != out.len() || anchors.contains(&v) {
        return None;
    }
    Some(out)
}

fn split_candidates<T: Scalar>(
    net: &Network<T>,
    adj: &[Vec<usize>],
    min_saving: T,
) -> Vec<Candidate<T>> {
    let mut out = Vec::new();
    for v in 0..net.vertices.len() {
        let d = adj[v].len();
        if d < 4 || net.is_frozen(v) {
            continue;
        }
        let br = match branches(net, adj, v) {
            Some(b) => b,
            None => continue,
        };
        let pairings = if d == 4 { 2 } else { d };
        let mut best: Option<Candidate<T>> = None;
        for i in 0..pairings {
            if let Some(c) = split_pairing(net, v, &br, i) {
                if c.length_change < -min_saving
                    && best
                        .as_ref()
                        .map_or(true, |b| c.length_change < b.length_change)
                {
                    best = Some(c);
                }
            }
        }
        out.extend(best);
    }
    out
}

/// Splits branches `i, i+1` (ccw) off `v` onto a new vertex `p`, the rest
/// onto `q`, and places both by alternating Weiszfeld updates.
fn split_pairing<T: Scalar>(
    net: &Network<T>,
    v: usize,
    br: &[Branch<T>],
    i: usize,
) -> Option<Candidate<T>> {
    let d = br.len();
    let ia = [i, (i + 1) % d];
    let ib: Vec<usize> = (2..d).map(|k| (i + k) % d).collect();
    let (ba0, ba1) = (&br[ia[0]], &br[ia[1]]);
    let pq_left = ba0.right;
    let pq_right = ba1.left;
    if pq_left == pq_right {
        return None;
    }
    let c = net.vertices[v];
    let anchors_a: Vec<Point<T>> = ia.iter().map(|&k| net.vertices[br[k].anchor]).collect();
    let anchors_b: Vec<Point<T>> = ib.iter().map(|&k| net.vertices[br[k].anchor]).collect();
    let reach = br
        .iter()
        .map(|b| c.dist(net.vertices[b.anchor]))
        .fold(T::infinity(), |a, b| a.min(b));
    let bis = (ba0.dir + ba1.dir).normalized()?;
    let mut p = c + bis * (reach * lit(0.1));
    let mut q = c - bis * (reach * lit(0.1));
    let mut buf_a = anchors_a.clone();
    buf_a.push(q);
    let mut buf_b = anchors_b.clone();
    buf_b.push(p);
    for _ in 0..4000 {
        *buf_a.last_mut().unwrap() = q;
        let np = weiszfeld_step(p, &buf_a);
        *buf_b.last_mut().unwrap() = np;
        let nq = weiszfeld_step(q, &buf_b);
        let moved = np.dist(p).max(nq.dist(q));
        p = np;
        q = nq;
        if moved <= lit::<T>(1e-15) * reach {
            break;
        }
    }
    let tiny = lit::<T>(1e-9) * reach;
    if p.dist(q) <= tiny
        || anchors_a
            .iter()
            .chain(anchors_b.iter())
            .any(|a| a.dist(p) <= tiny || a.dist(q) <= tiny)
    {
        return None;
    }
    let mut removed: Vec<usize> = br.iter().flat_map(|b| b.edges.iter().copied()).collect();
    removed.sort_unstable();
    let mut added = vec![(VRef::New(0), VRef::New(1), pq_left, pq_right)];
    for &k in &ia {
        added.push((
            VRef::New(0),
            VRef::Old(br[k].anchor),
            br[k].left,
            br[k].right,
        ));
    }
    for &k in &ib {
        added.push((
            VRef::New(1),
            VRef::Old(br[k].anchor),
            br[k].left,
            br[k].right,
        ));
    }
    Some(Candidate::build(
        net,
        MoveKind::Split,
        v,
        c,
        removed,
        vec![p, q],
        added,
    ))
}

fn relocate_candidates<T: Scalar>(
    net: &Network<T>,
    adj: &[Vec<usize>],
    min_saving: T,
) -> Vec<Candidate<T>> {
    let mut out = Vec::new();
    for v in 0..net.vertices.len() {
        if adj[v].len() != 3 || net.is_frozen(v) {
            continue;
        }
        let br = match branches(net, adj, v) {
            Some(b) => b,
            None => continue,
        };
        let anchors: Vec<Point<T>> = br.iter().map(|b| net.vertices[b.anchor]).collect();
        let c = net.vertices[v];
        let f = geometric_median(&anchors, c);
        let reach = anchors
            .iter()
            .map(|a| a.dist(c))
            .fold(T::infinity(), |a, b| a.min(b));
        if anchors.iter().any(|a| a.dist(f) <= lit::<T>(1e-9) * reach) {
            continue;
        }
        let old: T = br
            .iter()
            .flat_map(|b| b.edges.iter())
            .map(|&e| net.edge_length(e))
            .sum();
        let new: T = anchors.iter().map(|a| a.dist(f)).sum();
        if new - old >= -min_saving {
            continue;
        }
        let mut removed: Vec<usize> = br.iter().flat_map(|b| b.edges.iter().copied()).collect();
        removed.sort_unstable();
        let added = br
            .iter()
            .map(|b| (VRef::New(0), VRef::Old(b.anchor), b.left, b.right))
            .collect();
        out.push(Candidate::build(
            net,
            MoveKind::Relocate,
            v,
            c,
            removed,
            vec![f],
            added,
        ));
    }
    out
}
