//! Regularity checks on network states: junction angles, static tangent
//! cones, multi-graph decomposition over a flat window and slope bounds.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{AnalysisError, NetworkError};
use crate::geometry::{clip_to_disc, Point, Rect};
use crate::mollify::{Kernel, Mollifier};
use crate::network::Network;
use crate::scalar::{lit, to_f64, Scalar};
use crate::varifold::{mass_in_ball, Varifold1};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzerConfig {
    pub c6: f64,
    pub c7: f64,
    pub c8: f64,
    /// Mollification length used for the curvature-energy hypothesis.
    pub epsilon: f64,
    pub angle_tol: f64,
    /// Direction of the graph axis, degrees counter-clockwise from x.
    pub axis_deg: f64,
}

impl Default for AnalyzerConfig {
    fn default() -> Self {
        AnalyzerConfig {
            c6: 0.1,
            c7: 0.15,
            c8: 1.0,
            epsilon: 0.02,
            angle_tol: 5.0,
            axis_deg: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JunctionKind {
    RegularPoint,
    Triple120,
    TangentialContact,
    SixtyCrossing,
    DegenerateJunction,
    Unstable,
}

impl JunctionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            JunctionKind::RegularPoint => "regular_point",
            JunctionKind::Triple120 => "triple_120",
            JunctionKind::TangentialContact => "tangential_contact",
            JunctionKind::SixtyCrossing => "sixty_crossing",
            JunctionKind::DegenerateJunction => "degenerate_junction",
            JunctionKind::Unstable => "unstable",
        }
    }
}

impl fmt::Display for JunctionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JunctionClassification<T> {
    pub kind: JunctionKind,
    /// Counter-clockwise gaps between consecutive branches, degrees,
    /// starting from the branch on the lowest edge id.
    pub angles: Vec<T>,
    /// Fitted branch directions, degrees in `[0, 360)`, same order.
    pub directions: Vec<T>,
    pub tangent_sum: Point<T>,
    /// Fitted reference axis, degrees in `[0, 180)`.
    pub axis: T,
    pub k_r: usize,
    pub k_l: usize,
    /// Number of lines for a sixty crossing.
    pub lines: Option<usize>,
}

/// Points along the chain leaving `v` through `e`, at most `depth` edges.
fn branch_points<T: Scalar>(
    net: &Network<T>,
    adj: &[Vec<usize>],
    v: usize,
    e: usize,
    depth: usize,
) -> Vec<Point<T>> {
    let mut pts = Vec::with_capacity(depth);
    let mut prev_e = e;
    let mut cur = net.edges[e].other(v);
    pts.push(net.vertices[cur]);
    for _ in 1..depth {
        if cur == v || adj[cur].len() != 2 {
            break;
        }
        let next_e = if adj[cur][0] == prev_e {
            adj[cur][1]
        } else {
            adj[cur][0]
        };
        cur = net.edges[next_e].other(cur);
        prev_e = next_e;
        pts.push(net.vertices[cur]);
    }
    pts
}

/// Least-squares direction of a ray from `o` through `pts`.
fn fit_direction<T: Scalar>(o: Point<T>, pts: &[Point<T>]) -> Option<Point<T>> {
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for &p in pts {
        let d = p - o;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    let th = lit::<T>(0.5) * (lit::<T>(2.0) * sxy).atan2(sxx - syy);
    let dir = Point::from_angle(th);
    let first = *pts.first()? - o;
    Some(if dir.dot(first) < T::zero() {
        -dir
    } else {
        dir
    })
}

fn wrap_deg<T: Scalar>(a: T) -> T {
    let full = lit::<T>(360.0);
    let r = a % full;
    if r < T::zero() {
        r + full
    } else {
        r
    }
}

/// Distance of `a` to the nearest multiple of `period`, degrees.
fn off_grid<T: Scalar>(a: T, period: T) -> T {
    let r = a % period;
    let r = if r < T::zero() { r + period } else { r };
    r.min(period - r)
}

pub fn classify_junction<T: Scalar>(
    net: &Network<T>,
    v: usize,
    angle_tol: f64,
) -> Result<JunctionClassification<T>, AnalysisError> {
    if v >= net.vertices.len() {
        return Err(NetworkError::NoSuchVertex(v).into());
    }
    let adj = net.adjacency();
    if adj[v].len() < 2 {
        return Err(AnalysisError::Endpoint(v));
    }
    let tol = lit::<T>(angle_tol);
    let o = net.vertices[v];
    let mut dirs: Vec<T> = Vec::with_capacity(adj[v].len());
    let mut tangent_sum = Point::zero();
    for &e in &adj[v] {
        let pts = branch_points(net, &adj, v, e, 3);
        let d = fit_direction(o, &pts).ok_or(AnalysisError::Endpoint(v))?;
        tangent_sum += d;
        dirs.push(wrap_deg(d.angle().to_degrees()));
    }
    // ccw order starting at the branch of the lowest edge id (adjacency order)
    let start = dirs[0];
    let mut order: Vec<usize> = (0..dirs.len()).collect();
    order.sort_by(|&a, &b| {
        wrap_deg(dirs[a] - start)
            .partial_cmp(&wrap_deg(dirs[b] - start))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let directions: Vec<T> = order.iter().map(|&i| dirs[i]).collect();
    let k = directions.len();
    let angles: Vec<T> = (0..k)
        .map(|i| wrap_deg(directions[(i + 1) % k] - directions[i]))
        .collect();

    // axis: the branch direction (mod 180) aligning the most branches at 0 or ±60
    let sixty = lit::<T>(60.0);
    let mut best = (0usize, T::zero());
    for &cand in &directions {
        let ax = cand % lit(180.0);
        let n = directions
            .iter()
            .filter(|&&d| off_grid(d - ax, sixty) <= tol)
            .count();
        if n > best.0 {
            best = (n, ax);
        }
    }
    let axis = best.1;
    let ax = Point::from_angle(axis.to_radians());
    let (mut k_r, mut k_l) = (0, 0);
    for &d in &directions {
        let c = Point::from_angle(d.to_radians()).dot(ax);
        if c > T::zero() {
            k_r += 1;
        } else if c < T::zero() {
            k_l += 1;
        }
    }

    let near = |a: T, target: f64| (a - lit::<T>(target)).abs() <= tol;
    let sum_ok = tangent_sum.norm() <= tol.to_radians() * lit::<T>(k as f64);
    let (kind, lines) = if k == 2 && angles.iter().all(|&a| near(a, 180.0)) {
        (JunctionKind::RegularPoint, None)
    } else if k == 3 && angles.iter().all(|&a| near(a, 120.0)) {
        (JunctionKind::Triple120, None)
    } else if sum_ok
        && angles.iter().all(|&a| {
            near(a, 0.0) || near(a, 60.0) || near(a, 120.0) || near(a, 180.0) || near(a, 360.0)
        })
    {
        if angles.iter().any(|&a| near(a, 0.0) || near(a, 360.0)) {
            (JunctionKind::TangentialContact, None)
        } else if (k == 4 || k == 6) && angles.iter().all(|&a| near(a, 60.0) || near(a, 120.0)) {
            (JunctionKind::SixtyCrossing, Some(k / 2))
        } else {
            (JunctionKind::DegenerateJunction, None)
        }
    } else {
        (JunctionKind::Unstable, None)
    };
    Ok(JunctionClassification {
        kind,
        angles,
        directions,
        tangent_sum,
        axis,
        k_r,
        k_l,
        lines,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeLabel {
    Line,
    TripleJunction,
    TwoLines60,
    ThreeLines60,
    Other,
}

impl ConeLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ConeLabel::Line => "line",
            ConeLabel::TripleJunction => "triple_junction",
            ConeLabel::TwoLines60 => "two_lines_60",
            ConeLabel::ThreeLines60 => "three_lines_60",
            ConeLabel::Other => "other",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeFit<T> {
    /// `(direction in degrees, multiplicity)`, counter-clockwise from the smallest angle.
    pub half_lines: Vec<(T, u32)>,
    /// Largest, over radii, of the angular spread (as a fraction of the
    /// radius) plus the relative mass mismatch.
    pub residual: T,
    pub label: ConeLabel,
    pub stable: bool,
}

impl<T: Scalar> ConeFit<T> {
    /// `Σ θ_k / 2`, the density implied by the fit.
    pub fn density(&self) -> T {
        lit::<T>(self.half_lines.iter().map(|h| h.1 as f64).sum::<f64>()) * lit(0.5)
    }
}

const MERGE_DEG: f64 = 10.0;
const CONE_TOL_DEG: f64 = 5.0;

fn fit_annulus<T: Scalar>(support: &[(Point<T>, T)], z: Point<T>, r: T) -> (Vec<(T, u32)>, T) {
    let half = r * lit(0.5);
    let mut pts: Vec<(T, T)> = support
        .iter()
        .filter_map(|&(p, m)| {
            let d = p - z;
            let n = d.norm();
            (n >= half && n <= r).then(|| (wrap_deg(d.angle().to_degrees()), m))
        })
        .collect();
    if pts.is_empty() {
        return (Vec::new(), T::zero());
    }
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let merge = lit::<T>(MERGE_DEG);
    // start clusters after the widest circular gap
    let n = pts.len();
    let mut start = 0;
    let mut widest = T::zero();
    for i in 0..n {
        let g = if i + 1 < n {
            pts[i + 1].0 - pts[i].0
        } else {
            pts[0].0 + lit(360.0) - pts[i].0
        };
        if g > widest {
            widest = g;
            start = (i + 1) % n;
        }
    }
    let mut clusters: Vec<Vec<(T, T)>> = Vec::new();
    for k in 0..n {
        let (a, m) = pts[(start + k) % n];
        let a = if (start + k) >= n { a + lit(360.0) } else { a };
        match clusters.last_mut() {
            Some(c) if a - c.last().unwrap().0 <= merge => c.push((a, m)),
            _ => clusters.push(vec![(a, m)]),
        }
    }
    let mut lines = Vec::new();
    let mut spread = T::zero();
    let mut mass_total = T::zero();
    let mut fitted_total = T::zero();
    for c in &clusters {
        let mass: T = c.iter().map(|x| x.1).sum();
        let (mut sx, mut sy) = (T::zero(), T::zero());
        for &(a, m) in c {
            let u = Point::from_angle(a.to_radians());
            sx += u.x * m;
            sy += u.y * m;
        }
        let dir = wrap_deg(sy.atan2(sx).to_degrees());
        for &(a, _) in c {
            let dev = off_grid(a - dir, lit(360.0)).to_radians();
            spread = spread.max(dev.sin().abs());
        }
        // nearest integer, ties toward the lower multiplicity
        let ratio = mass / half;
        let mult = (ratio - lit(0.5))
            .ceil()
            .max(T::zero())
            .to_u32()
            .unwrap_or(0);
        mass_total += mass;
        fitted_total += lit::<T>(mult as f64) * half;
        if mult > 0 {
            lines.push((dir, mult));
        }
    }
    lines.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let mismatch = (mass_total - fitted_total).abs() / half;
    (lines, spread + mismatch)
}

fn fits_agree<T: Scalar>(a: &[(T, u32)], b: &[(T, u32)]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| x.1 == y.1 && off_grid(x.0 - y.0, lit(360.0)) <= lit(MERGE_DEG))
}

fn label_cone<T: Scalar>(lines: &[(T, u32)]) -> ConeLabel {
    let tol = lit::<T>(CONE_TOL_DEG);
    let k = lines.len();
    if k == 0 || lines.iter().any(|l| l.1 != 1) {
        return ConeLabel::Other;
    }
    let gaps: Vec<T> = (0..k)
        .map(|i| wrap_deg(lines[(i + 1) % k].0 - lines[i].0))
        .collect();
    let near = |a: T, t: f64| (a - lit::<T>(t)).abs() <= tol;
    match k {
        2 if gaps.iter().all(|&g| near(g, 180.0)) => ConeLabel::Line,
        3 if gaps.iter().all(|&g| near(g, 120.0)) => ConeLabel::TripleJunction,
        4 if (near(gaps[0], 60.0)
            && near(gaps[1], 120.0)
            && near(gaps[2], 60.0)
            && near(gaps[3], 120.0))
            || (near(gaps[0], 120.0)
                && near(gaps[1], 60.0)
                && near(gaps[2], 120.0)
                && near(gaps[3], 60.0)) =>
        {
            ConeLabel::TwoLines60
        }
        6 if gaps.iter().all(|&g| near(g, 60.0)) => ConeLabel::ThreeLines60,
        _ => ConeLabel::Other,
    }
}

/// Fits a static cone at `z` from weighted point samples of the support.
pub fn tangent_cone<T: Scalar>(
    support: &[(Point<T>, T)],
    z: Point<T>,
    radii: &[T],
) -> Result<ConeFit<T>, AnalysisError> {
    if radii.len() < 3
        || radii.iter().any(|&r| !(r > T::zero()))
        || radii.windows(2).any(|w| !(w[1] < w[0]))
    {
        return Err(AnalysisError::BadRadii);
    }
    let mut fits = Vec::with_capacity(radii.len());
    let mut residual = T::zero();
    for &r in radii {
        let (lines, res) = fit_annulus(support, z, r);
        residual = residual.max(res);
        fits.push(lines);
    }
    let stable = fits.windows(2).all(|w| fits_agree(&w[0], &w[1]));
    let half_lines = fits.pop().unwrap_or_default();
    let label = if stable {
        label_cone(&half_lines)
    } else {
        ConeLabel::Other
    };
    Ok(ConeFit {
        half_lines,
        residual,
        label,
        stable,
    })
}

/// Uniformly sampled function over an interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sheet<T> {
    pub xs: Vec<T>,
    pub ys: Vec<T>,
}

impl<T: Scalar> Sheet<T> {
    pub fn from_fn(x0: T, x1: T, n: usize, f: impl Fn(T) -> T) -> Self {
        let xs: Vec<T> = (0..=n)
            .map(|k| x0 + (x1 - x0) * lit::<T>(k as f64 / n as f64))
            .collect();
        let ys = xs.iter().map(|&x| f(x)).collect();
        Sheet { xs, ys }
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    fn dx(&self) -> T {
        (self.xs[self.xs.len() - 1] - self.xs[0]) / lit::<T>((self.xs.len() - 1) as f64)
    }

    /// Slopes on the grid intervals.
    pub fn slopes(&self) -> Vec<T> {
        let dx = self.dx();
        self.ys.windows(2).map(|w| (w[1] - w[0]) / dx).collect()
    }

    /// `Σ (Δ²f/Δx²)² Δx` over interior nodes, the two outermost carrying the
    /// half cells up to the window ends.
    pub fn w22_energy(&self) -> T {
        let n = self.len();
        if n < 3 {
            return T::zero();
        }
        let dx = self.dx();
        let mut e = T::zero();
        for k in 1..n - 1 {
            let d2 = (self.ys[k + 1] - lit::<T>(2.0) * self.ys[k] + self.ys[k - 1]) / (dx * dx);
            let w = if k == 1 || k == n - 2 {
                dx * lit(1.5)
            } else {
                dx
            };
            e += d2 * d2 * w;
        }
        e
    }

    /// Polyline length inside the disc of radius `r` about `(0, 0)` in sheet coordinates.
    fn length_in_disc(&self, r: T) -> T {
        let mut l = T::zero();
        for k in 0..self.len() - 1 {
            let a = Point::new(self.xs[k], self.ys[k]);
            let b = Point::new(self.xs[k + 1], self.ys[k + 1]);
            if let Some((t0, t1)) = clip_to_disc(a, b, Point::zero(), r) {
                l += (t1 - t0) * a.dist(b);
            }
        }
        l
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphPatch<T> {
    pub axis: Point<T>,
    pub center: Point<T>,
    pub half_width: T,
    pub height: T,
    pub nu: usize,
    pub sheets: Vec<Sheet<T>>,
    pub w22_estimates: Vec<T>,
    /// Energy term `r·∫|Φ∗δV|²/(Φ∗‖V‖+ε)` over the doubled window.
    pub scaled_energy: T,
    /// Total sheet length inside `B_r(center)`.
    pub sheet_mass: T,
    pub mass_in_ball: T,
}

/// Decomposes the network inside `B_r(a)` into ordered graphs over the
/// configured axis, after checking the flatness hypotheses.
pub fn graph_decomposition<T: Scalar>(
    net: &Network<T>,
    a: Point<T>,
    r: T,
    nu_hint: Option<usize>,
    cfg: &AnalyzerConfig,
) -> Result<GraphPatch<T>, AnalysisError> {
    if !(r > T::zero()) {
        return Err(AnalysisError::Hypothesis(
            "window radius must be positive".into(),
        ));
    }
    let u = Point::from_angle(lit::<T>(cfg.axis_deg.to_radians()));
    let n = u.perp();
    let local = |p: Point<T>| Point::new((p - a).dot(u), (p - a).dot(n));
    let two_r = r * lit(2.0);

    let kernel = Kernel::with_default_quadrature(lit::<T>(cfg.epsilon))
        .map_err(AnalysisError::Hypothesis)?;
    let field = Varifold1::from_network_with_far_field(net, kernel.effective_radius);
    let moll = Mollifier::new(&kernel, &field);
    let window = Rect::new(a - Point::new(two_r, two_r), a + Point::new(two_r, two_r));
    let scaled_energy = r * moll.curvature_energy(&window);
    if scaled_energy > lit(cfg.c6) {
        return Err(AnalysisError::Hypothesis(format!(
            "curvature energy: r * E = {} exceeds c6 = {}",
            to_f64(scaled_energy),
            cfg.c6
        )));
    }

    let height = r * lit(cfg.c7);
    for e in &net.edges {
        let (p, q) = (net.vertices[e.a], net.vertices[e.b]);
        if let Some((t0, t1)) = clip_to_disc(p, q, a, two_r) {
            for t in [t0, t1] {
                let y = local(p.lerp(q, t)).y;
                if y.abs() > height {
                    return Err(AnalysisError::Hypothesis(format!(
                        "height bound: |y| = {} exceeds c7 * r = {}",
                        to_f64(y.abs()),
                        to_f64(height)
                    )));
                }
            }
        }
    }

    let deg = net.degrees();
    let inner = r * lit(9.0 / 8.0);
    for (v, p) in net.vertices.iter().enumerate() {
        if deg[v] >= 3 && p.dist(a) < inner {
            return Err(AnalysisError::NotFlat {
                degree: deg[v],
                x: to_f64(p.x),
                y: to_f64(p.y),
            });
        }
    }

    let mass = mass_in_ball(&Varifold1::from_network(net), a, r);
    let nu = (mass / two_r + lit(0.5)).floor().to_usize().unwrap_or(0);
    if nu == 0 {
        return Err(AnalysisError::Hypothesis(format!(
            "mass bound: no sheet (mass {} in B_r)",
            to_f64(mass)
        )));
    }
    if mass > (lit::<T>(nu as f64) + lit(0.5)) * two_r {
        return Err(AnalysisError::Hypothesis(format!(
            "mass bound: {} above (nu + 1/2) 2r",
            to_f64(mass)
        )));
    }
    if let Some(h) = nu_hint {
        if h != nu {
            return Err(AnalysisError::Hypothesis(format!(
                "sheet count {nu} disagrees with hint {h}"
            )));
        }
    }

    // edges in local coordinates that meet the strip |x| <= r
    let mut segs: Vec<(Point<T>, Point<T>)> = Vec::new();
    let mut max_len = T::zero();
    for e in &net.edges {
        let (p, q) = (local(net.vertices[e.a]), local(net.vertices[e.b]));
        let (lo, hi) = (p.x.min(q.x), p.x.max(q.x));
        if hi < -r || lo > r || p.y.abs().min(q.y.abs()) > two_r {
            continue;
        }
        max_len = max_len.max(p.dist(q));
        segs.push(if p.x <= q.x { (p, q) } else { (q, p) });
    }
    let spacing_floor = max_len * lit(4.0);
    let cells = if spacing_floor > T::zero() {
        (two_r / spacing_floor).floor().to_usize().unwrap_or(2)
    } else {
        64
    };
    let cells = cells.clamp(2, 4096);
    let xs: Vec<T> = (0..=cells)
        .map(|k| -r + two_r * lit::<T>(k as f64 / cells as f64))
        .collect();
    let mut columns: Vec<Vec<T>> = Vec::with_capacity(xs.len());
    for (k, &x) in xs.iter().enumerate() {
        let last = k == cells;
        let mut ys: Vec<T> = segs
            .iter()
            .filter(|(p, q)| {
                if last {
                    p.x < x && x <= q.x
                } else {
                    p.x <= x && x < q.x
                }
            })
            .map(|(p, q)| p.y + (q.y - p.y) * (x - p.x) / (q.x - p.x))
            .filter(|y| y.abs() <= height)
            .collect();
        ys.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        if ys.len() != nu {
            return Err(AnalysisError::NotGraph(format!(
                "{} crossings at x = {} (expected {nu})",
                ys.len(),
                to_f64(x)
            )));
        }
        columns.push(ys);
    }
    let sheets: Vec<Sheet<T>> = (0..nu)
        .map(|i| Sheet {
            xs: xs.clone(),
            ys: columns.iter().map(|c| c[i]).collect(),
        })
        .collect();
    let w22_estimates = sheets.iter().map(Sheet::w22_energy).collect();
    let sheet_mass = sheets.iter().map(|s| s.length_in_disc(r)).sum();
    Ok(GraphPatch {
        axis: u,
        center: a,
        half_width: r,
        height,
        nu,
        sheets,
        w22_estimates,
        scaled_energy,
        sheet_mass,
        mass_in_ball: mass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeCheck<T> {
    pub pass: bool,
    /// Interval indices of the pair with the smallest margin.
    pub worst_pair: (usize, usize),
    /// Smallest `bound − |f'_i − f'_k|` over all pairs.
    pub margin: T,
}

/// Checks `|f'(x) − f'(x̃)| ≤ c8 (ε + E^{1/2} (|x − x̃| + ε)^{1/2})` for every
/// pair of grid-interval slopes.
pub fn slope_variation_check<T: Scalar>(
    sheet: &Sheet<T>,
    energy: T,
    c8: T,
    eps_slack: T,
) -> Result<SlopeCheck<T>, AnalysisError> {
    if sheet.len() < 3 {
        return Err(AnalysisError::ShortSheet);
    }
    let s = sheet.slopes();
    let dx = sheet.dx();
    let root_e = energy.max(T::zero()).sqrt();
    let mut margin = T::infinity();
    let mut worst = (0, 0);
    for i in 0..s.len() {
        for k in (i + 1)..s.len() {
            let gap = dx * lit::<T>((k - i) as f64);
            let bound = c8 * (eps_slack + root_e * (gap + eps_slack).sqrt());
            let m = bound - (s[i] - s[k]).abs();
            if m < margin {
                margin = m;
                worst = (i, k);
            }
        }
    }
    Ok(SlopeCheck {
        pass: margin >= T::zero(),
        worst_pair: worst,
        margin,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct W22Check<T> {
    pub pass: bool,
    /// Largest `lhs − rhs` over the bank.
    pub worst_excess: T,
    /// Bank indices that failed.
    pub failures: Vec<usize>,
}

/// The fixed bank of 20 C² bumps `(1 − ((x − c)/w)²)³` over `[x0, x1]`.
pub fn w22_test_bank<T: Scalar>(x0: T, x1: T) -> Vec<(T, T)> {
    let span = x1 - x0;
    let mut out = Vec::with_capacity(20);
    for &frac in &[0.25, 0.125] {
        let w = span * lit(frac);
        for k in 0..10 {
            let c = x0 + w + (span - w - w) * lit::<T>(k as f64 / 9.0);
            out.push((c, w));
        }
    }
    out
}

fn bump<T: Scalar>(x: T, c: T, w: T) -> T {
    let s = (x - c) / w;
    if s.abs() >= T::one() {
        return T::zero();
    }
    let u = T::one() - s * s;
    u * u * u
}

/// Discrete weak form of the curvature bound: for each bank function
/// `|Σ Δφ · f'/√(1+f'²)| ≤ (E/r · Σ φ² √(1+f'²) Δx)^{1/2}` by summation by parts.
pub fn w22_weak_derivative_check<T: Scalar>(
    sheet: &Sheet<T>,
    energy_bound: T,
    r: T,
) -> Result<W22Check<T>, AnalysisError> {
    if sheet.len() < 3 {
        return Err(AnalysisError::ShortSheet);
    }
    let s = sheet.slopes();
    let dx = sheet.dx();
    let (x0, x1) = (sheet.xs[0], sheet.xs[sheet.len() - 1]);
    let mut worst = T::neg_infinity();
    let mut failures = Vec::new();
    for (id, (c, w)) in w22_test_bank(x0, x1).into_iter().enumerate() {
        let mut lhs = T::zero();
        let mut mass = T::zero();
        for (i, &si) in s.iter().enumerate() {
            let g = (T::one() + si * si).sqrt();
            let (pa, pb) = (bump(sheet.xs[i], c, w), bump(sheet.xs[i + 1], c, w));
            lhs += (pb - pa) * si / g;
            let mid = bump((sheet.xs[i] + sheet.xs[i + 1]) * lit(0.5), c, w);
            mass += mid * mid * g * dx;
        }
        let rhs = (energy_bound.max(T::zero()) / r * mass).sqrt();
        let excess = lhs.abs() - rhs;
        worst = worst.max(excess);
        if excess > lit::<T>(1e-12) {
            failures.push(id);
        }
    }
    Ok(W22Check {
        pass: failures.is_empty(),
        worst_excess: worst,
        failures,
    })
}
