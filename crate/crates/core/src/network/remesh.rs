use super::{validate, Edge, Network};
use crate::error::NetworkError;
use crate::scalar::{lit, Scalar};

/// Merges short, nearly straight degree-two runs and splits long edges.
///
/// A degree-two vertex is removed when one of its edges is shorter than
/// `l_min`, the turn there is below 1°, the joined edge is at most `l_max`
/// and the length lost is at most 1e-9. Edges longer than `l_max` are then
/// cut into equal pieces.
pub fn remesh<T: Scalar>(net: &Network<T>, l_min: T, l_max: T) -> Result<Network<T>, NetworkError> {
    remesh_known(net, l_min, l_max, validate(net).is_ok())
}

/// [`remesh`] when the caller already knows whether `net` is valid.
pub(crate) fn remesh_known<T: Scalar>(
    net: &Network<T>,
    l_min: T,
    l_max: T,
    was_valid: bool,
) -> Result<Network<T>, NetworkError> {
    if !(l_min > T::zero()
        && l_min < l_max
        && l_max * lit::<T>(1.0 + 1e-12) >= lit::<T>(3.0) * l_min)
    {
        return Err(NetworkError::RemeshBounds);
    }
    let merged = merge_short(net, l_min, l_max);
    let out = split_long(&merged, l_max);
    if out.edges.len() == net.edges.len() && merged.edges.len() == net.edges.len() {
        return Ok(out);
    }
    if was_valid && !validate(&out).is_ok() {
        return Ok(split_long(net, l_max));
    }
    Ok(out)
}

fn merge_short<T: Scalar>(net: &Network<T>, l_min: T, l_max: T) -> Network<T> {
    let max_turn = lit::<T>(1.0f64.to_radians());
    let max_loss = lit::<T>(1e-9);
    let mut edges: Vec<Option<Edge>> = net.edges.iter().copied().map(Some).collect();
    let mut adj = net.adjacency();
    let len = |e: &Edge| net.vertices[e.a].dist(net.vertices[e.b]);
    loop {
        let mut changed = false;
        for v in 0..net.vertices.len() {
            if adj[v].len() != 2 || net.is_frozen(v) {
                continue;
            }
            let (i1, i2) = (adj[v][0], adj[v][1]);
            let (e1, e2) = match (edges[i1], edges[i2]) {
                (Some(a), Some(b)) => (a, b),
                _ => continue,
            };
            let u = e1.other(v);
            let w = e2.other(v);
            if u == w || u == v || w == v {
                continue;
            }
            let (l1, l2) = (len(&e1), len(&e2));
            if l1.min(l2) >= l_min {
                continue;
            }
            let (pu, pv, pw) = (net.vertices[u], net.vertices[v], net.vertices[w]);
            let joined = pu.dist(pw);
            if joined > l_max || l1 + l2 - joined > max_loss {
                continue;
            }
            let (d1, d2) = match ((pv - pu).normalized(), (pw - pv).normalized()) {
                (Some(a), Some(b)) => (a, b),
                _ => continue,
            };
            if d1.cross(d2).atan2(d1.dot(d2)).abs() >= max_turn {
                continue;
            }
            // labels seen walking u -> v must match v -> w
            let (la, ra) = e1.reversed_if_from(v);
            let (lb, rb) = e2.labels_from(v);
            if (la, ra) != (lb, rb) {
                continue;
            }
            if adj[u]
                .iter()
                .any(|&f| edges[f].map_or(false, |e| e.other(u) == w))
            {
                continue;
            }
            edges[i1] = Some(Edge::new(u, w, lb, rb));
            edges[i2] = None;
            adj[v].clear();
            adj[w].retain(|&f| f != i2);
            adj[w].push(i1);
            adj[w].sort_unstable();
            changed = true;
        }
        if !changed {
            break;
        }
    }
    let mut out = Network {
        vertices: net.vertices.clone(),
        edges: edges.into_iter().flatten().collect(),
        regions: net.regions,
        frozen: net.frozen.clone(),
    };
    out.compact();
    out
}

impl Edge {
    /// Labels seen when arriving at `v` along this edge.
    fn reversed_if_from(&self, v: usize) -> (super::Label, super::Label) {
        if self.b == v {
            (self.left, self.right)
        } else {
            (self.right, self.left)
        }
    }
}

fn split_long<T: Scalar>(net: &Network<T>, l_max: T) -> Network<T> {
    let mut out = Network {
        vertices: net.vertices.clone(),
        edges: Vec::new(),
        regions: net.regions,
        frozen: net.frozen.clone(),
    };
    for e in &net.edges {
        let (a, b) = (net.vertices[e.a], net.vertices[e.b]);
        let pieces = (a.dist(b) / l_max - lit(1e-9))
            .ceil()
            .to_usize()
            .unwrap_or(1)
            .max(1);
        let mut prev = e.a;
        for k in 1..pieces {
            let v = out.add_vertex(a.lerp(b, lit::<T>(k as f64 / pieces as f64)));
            out.add_edge(prev, v, e.left, e.right);
            prev = v;
        }
        out.add_edge(prev, e.b, e.left, e.right);
    }
    out
}
