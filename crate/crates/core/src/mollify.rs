//! Mollified calculus on polygonal varifolds: the truncated Gaussian
//! kernel Φ_ε, the smoothed weight Φ_ε∗‖V‖, the smoothed first variation
//! Φ_ε∗δV, the smoothed mean curvature h_ε and the curvature-energy proxy
//! ∫ |Φ_ε∗δV|² / (Φ_ε∗‖V‖ + ε).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{clip_to_disc, gauss_legendre_unit, Point, Rect};
use crate::scalar::{lit, pi, to_f64, Scalar};
use crate::varifold::Varifold1;

/// Sharpness of the smooth step used for the cutoff ψ. With this value
/// `|ψ'| <= 2.99` on the transition annulus `1/2 < |z| < 1`.
const CUTOFF_SHARPNESS: f64 = 0.6;

/// Radial cutoff ψ(r) and its derivative: 1 on `r <= 1/2`, 0 on `r >= 1`,
/// C^∞ in between.
pub fn cutoff_profile<T: Scalar>(r: T) -> (T, T) {
    let half = lit::<T>(0.5);
    if r <= half {
        return (T::one(), T::zero());
    }
    if r >= T::one() {
        return (T::zero(), T::zero());
    }
    let a = lit::<T>(CUTOFF_SHARPNESS);
    let t = (T::one() - r) / half;
    let s = T::one() - t;
    let e = -a / t + a / s;
    // logistic(e), saturating
    let big = lit::<T>(40.0);
    if e > big {
        return (T::one(), T::zero());
    }
    if e < -big {
        return (T::zero(), T::zero());
    }
    let psi = T::one() / (T::one() + (-e).exp());
    let de_dt = a / (t * t) + a / (s * s);
    let dpsi_dt = psi * (T::one() - psi) * de_dt;
    (psi, -dpsi_dt / half)
}

/// Quadrature settings for the smoothed quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quadrature {
    /// Gauss–Legendre nodes per ε-length of segment.
    pub line_order: usize,
    /// Area-grid spacing as a fraction of ε.
    pub area_spacing: f64,
    /// Kernel treated as zero beyond `truncation · ε`.
    pub truncation: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            line_order: 8,
            area_spacing: 0.25,
            truncation: 5.0,
        }
    }
}

impl Quadrature {
    pub fn check(&self) -> Result<(), String> {
        if self.line_order < 4 {
            return Err(format!("line_order must be >= 4, got {}", self.line_order));
        }
        if !(self.truncation >= 5.0) {
            return Err(format!("truncation must be >= 5, got {}", self.truncation));
        }
        if !(self.area_spacing > 0.0 && self.area_spacing <= 1.0) {
            return Err(format!(
                "area_spacing must lie in (0, 1], got {}",
                self.area_spacing
            ));
        }
        Ok(())
    }
}

/// Which form of h_ε to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum HMode {
    /// `-Φ∗(Φ∗δV / (Φ∗‖V‖ + ε))`, outer convolution by area quadrature.
    Full,
    /// `-(Φ∗δV)(z) / ((Φ∗‖V‖)(z) + ε)`.
    #[default]
    Pointwise,
}

/// Φ_ε(z) = c(ε) ψ(z) (2πε²)⁻¹ exp(-|z|²/2ε²).
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel<T> {
    pub epsilon: T,
    pub c_eps: T,
    pub effective_radius: T,
    pub quadrature: Quadrature,
    nodes: Vec<(T, T)>,
    erf: ErfTable<T>,
    /// `1/(√2 ε)`, `-1/(2ε²)` and `c(ε)/(2√(2π) ε)` for the closed-form line integral.
    line: (T, T, T),
}

impl<T: Scalar> Kernel<T> {
    pub fn new(epsilon: T, quadrature: Quadrature) -> Result<Self, String> {
        if !(epsilon > T::zero() && epsilon.is_finite()) {
            return Err("epsilon must be positive".into());
        }
        quadrature.check()?;
        let c_eps = lit::<T>(1.0 / radial_integral(to_f64(epsilon)));
        let effective_radius = (epsilon * lit(quadrature.truncation)).min(T::one());
        let nodes = gauss_legendre_unit(quadrature.line_order)
            .into_iter()
            .map(|(x, w)| (lit(x), lit(w)))
            .collect();
        let sq2e = lit::<T>(std::f64::consts::SQRT_2) * epsilon;
        let line = (
            T::one() / sq2e,
            -T::one() / (sq2e * sq2e),
            c_eps / (lit::<T>(2.0 * (2.0 * std::f64::consts::PI).sqrt()) * epsilon),
        );
        Ok(Kernel {
            epsilon,
            c_eps,
            effective_radius,
            quadrature,
            nodes,
            erf: ErfTable::new(),
            line,
        })
    }

    pub fn with_default_quadrature(epsilon: T) -> Result<Self, String> {
        Self::new(epsilon, Quadrature::default())
    }

    #[inline]
    fn gauss(&self, r2: T) -> T {
        let e2 = self.epsilon * self.epsilon;
        (-(r2 / (e2 + e2))).exp() / (lit::<T>(2.0) * pi::<T>() * e2)
    }

    /// Φ_ε(z).
    #[inline]
    pub fn eval(&self, z: Point<T>) -> T {
        let r2 = z.norm_sq();
        if r2 >= T::one() {
            return T::zero();
        }
        let (psi, _) = cutoff_profile(r2.sqrt());
        self.c_eps * psi * self.gauss(r2)
    }

    /// ∇Φ_ε(z).
    pub fn gradient(&self, z: Point<T>) -> Point<T> {
        let r2 = z.norm_sq();
        if r2 >= T::one() {
            return Point::zero();
        }
        let r = r2.sqrt();
        let (psi, dpsi) = cutoff_profile(r);
        let g = self.gauss(r2);
        let e2 = self.epsilon * self.epsilon;
        let radial = if r > T::zero() {
            z * (dpsi / r)
        } else {
            Point::zero()
        };
        (radial * g + z * (-psi * g / e2)) * self.c_eps
    }
}

const ERF_STEP: f64 = 1.0 / 128.0;
const ERF_END: f64 = 6.0;
const ERF_ORDER: usize = 6;

/// erf by degree-5 Taylor expansion about the nearest node of a grid on
/// `[0, 6]`. Absolute error is below 1e-16; beyond 6 erf rounds to ±1.
#[derive(Debug, Clone, PartialEq)]
struct ErfTable<T> {
    coef: Vec<[T; ERF_ORDER]>,
}

impl<T: Scalar> ErfTable<T> {
    fn new() -> Self {
        let n = (ERF_END / ERF_STEP).round() as usize;
        let coef = (0..=n)
            .map(|i| {
                let x = i as f64 * ERF_STEP;
                let g = 2.0 / std::f64::consts::PI.sqrt() * (-x * x).exp();
                // f^(k+1) = (-1)^k H_k(x) g with physicists' Hermite polynomials.
                let mut c = [T::zero(); ERF_ORDER];
                c[0] = lit(libm::erf(x));
                let (mut h_prev, mut h) = (0.0, 1.0);
                let mut fact = 1.0;
                for k in 0..ERF_ORDER - 1 {
                    fact *= (k + 1) as f64;
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    c[k + 1] = lit(sign * h * g / fact);
                    let next = 2.0 * x * h - 2.0 * k as f64 * h_prev;
                    h_prev = h;
                    h = next;
                }
                c
            })
            .collect();
        ErfTable { coef }
    }

    #[inline]
    fn eval(&self, x: T) -> T {
        let a = x.abs();
        if !(a < lit(ERF_END)) {
            return if a.is_nan() { x } else { T::one().copysign(x) };
        }
        let scaled = a / lit(ERF_STEP);
        let i = (scaled + lit(0.5)).to_usize().unwrap_or(0);
        let d = a - lit::<T>(i as f64 * ERF_STEP);
        let c = &self.coef[i];
        let mut acc = c[ERF_ORDER - 1];
        for k in (0..ERF_ORDER - 1).rev() {
            acc = acc * d + c[k];
        }
        acc.copysign(x)
    }
}

fn radial_integral(eps: f64) -> f64 {
    // ψ ≡ 1 on [0, 1/2]: closed form.
    let inner = 1.0 - (-0.125 / (eps * eps)).exp();
    let nodes = gauss_legendre_unit(16);
    let panels = 256;
    let h = 0.5 / panels as f64;
    let mut outer = 0.0;
    for p in 0..panels {
        let r0 = 0.5 + p as f64 * h;
        for &(x, w) in &nodes {
            let r = r0 + x * h;
            let (psi, _) = cutoff_profile(r);
            let g = (-(r * r) / (2.0 * eps * eps)).exp() / (2.0 * std::f64::consts::PI * eps * eps);
            outer += w * h * psi * g * 2.0 * std::f64::consts::PI * r;
        }
    }
    inner + outer
}

/// Dense bucket grid over points for radius queries, stored as one
/// contiguous id list per cell.
#[derive(Debug, Clone)]
struct Buckets<T> {
    origin: Point<T>,
    cell: T,
    nx: i64,
    ny: i64,
    starts: Vec<u32>,
    ids: Vec<u32>,
}

impl<T: Scalar> Buckets<T> {
    fn new(points: &[Point<T>], cell: T) -> Self {
        let origin = Point::new(
            points.iter().map(|p| p.x).fold(T::infinity(), T::min),
            points.iter().map(|p| p.y).fold(T::infinity(), T::min),
        );
        let origin = if points.is_empty() {
            Point::zero()
        } else {
            origin
        };
        let mut b = Buckets {
            origin,
            cell,
            nx: 1,
            ny: 1,
            starts: Vec::new(),
            ids: Vec::new(),
        };
        let keys: Vec<(i64, i64)> = points.iter().map(|&p| b.raw_key(p)).collect();
        b.nx = keys.iter().map(|k| k.0).max().unwrap_or(0) + 1;
        b.ny = keys.iter().map(|k| k.1).max().unwrap_or(0) + 1;
        let cells = (b.nx * b.ny) as usize;
        let mut counts = vec![0u32; cells + 1];
        for k in &keys {
            counts[(k.1 * b.nx + k.0) as usize + 1] += 1;
        }
        for i in 0..cells {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut ids = vec![0u32; points.len()];
        for (i, k) in keys.iter().enumerate() {
            let c = (k.1 * b.nx + k.0) as usize;
            ids[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        b.starts = counts;
        b.ids = ids;
        b
    }

    /// Point ids in slot order.
    fn order(&self) -> &[u32] {
        &self.ids
    }

    #[inline]
    fn raw_key(&self, p: Point<T>) -> (i64, i64) {
        let f = |v: T| v.floor().to_i64().unwrap_or(0).max(0);
        (
            f((p.x - self.origin.x) / self.cell),
            f((p.y - self.origin.y) / self.cell),
        )
    }

    /// Calls `f` with the slot of every point that may lie within `r` of
    /// `z`. Slots index `order()`.
    #[inline]
    fn for_each_near(&self, z: Point<T>, r: T, mut f: impl FnMut(usize)) {
        let lo = (z.x - r - self.origin.x) / self.cell;
        let hi = (z.x + r - self.origin.x) / self.cell;
        let i0 = lo.floor().to_i64().unwrap_or(i64::MIN).max(0);
        let i1 = hi.floor().to_i64().unwrap_or(i64::MAX).min(self.nx - 1);
        let lo = (z.y - r - self.origin.y) / self.cell;
        let hi = (z.y + r - self.origin.y) / self.cell;
        let j0 = lo.floor().to_i64().unwrap_or(i64::MIN).max(0);
        let j1 = hi.floor().to_i64().unwrap_or(i64::MAX).min(self.ny - 1);
        for j in j0..=j1 {
            let row = j * self.nx;
            for i in i0..=i1 {
                let c = (row + i) as usize;
                for slot in self.starts[c] as usize..self.starts[c + 1] as usize {
                    f(slot);
                }
            }
        }
    }
}

/// A varifold prepared for repeated smoothed evaluations with one kernel.
pub struct Mollifier<'a, T> {
    kernel: &'a Kernel<T>,
    varifold: &'a Varifold1<T>,
    segs: Buckets<T>,
    /// Segments in bucket slot order.
    seg_slots: Vec<SegData<T>>,
    /// Half of the longest segment; segments are bucketed by midpoint.
    seg_pad: T,
    /// Point charges whose kernel-weighted sum is Φ∗δV, `+mτ` at `b` and
    /// `-mτ` at `a`, in bucket slot order.
    charges: Vec<(Point<T>, Point<T>)>,
    charge_buckets: Buckets<T>,
}

#[derive(Debug, Clone, Copy)]
struct SegData<T> {
    a: Point<T>,
    b: Point<T>,
    tau: Point<T>,
    len: T,
    weight: T,
}

fn bits<T: Scalar>(p: Point<T>) -> (u64, u64) {
    (to_f64(p.x).to_bits(), to_f64(p.y).to_bits())
}

impl<'a, T: Scalar> Mollifier<'a, T> {
    pub fn new(kernel: &'a Kernel<T>, varifold: &'a Varifold1<T>) -> Self {
        let cell = kernel.effective_radius;
        let cell = cell * lit(0.5);
        let mids: Vec<Point<T>> = varifold
            .segments
            .iter()
            .map(|s| s.a.midpoint(s.b))
            .collect();
        let segs = Buckets::new(&mids, cell);
        let seg_slots: Vec<SegData<T>> = segs
            .order()
            .iter()
            .map(|&i| {
                let s = &varifold.segments[i as usize];
                SegData {
                    a: s.a,
                    b: s.b,
                    tau: s.tangent(),
                    len: s.length(),
                    weight: s.weight(),
                }
            })
            .collect();
        let seg_pad = seg_slots.iter().map(|d| d.len).fold(T::zero(), T::max) * lit(0.5);
        let mut raw: Vec<((u64, u64), Point<T>, Point<T>)> =
            Vec::with_capacity(2 * varifold.segments.len());
        for s in &varifold.segments {
            let q = s.tangent() * s.weight();
            raw.push((bits(s.b), s.b, q));
            raw.push((bits(s.a), s.a, -q));
        }
        raw.sort_by_key(|c| c.0);
        let mut charges: Vec<(Point<T>, Point<T>)> = Vec::with_capacity(raw.len());
        let mut last = None;
        for (key, p, q) in raw {
            if last == Some(key) {
                charges.last_mut().expect("merged charge").1 += q;
            } else {
                charges.push((p, q));
                last = Some(key);
            }
        }
        let points: Vec<Point<T>> = charges.iter().map(|c| c.0).collect();
        let charge_buckets = Buckets::new(&points, cell);
        let charges = charge_buckets
            .order()
            .iter()
            .map(|&i| charges[i as usize])
            .collect();
        Mollifier {
            kernel,
            varifold,
            segs,
            seg_slots,
            seg_pad,
            charges,
            charge_buckets,
        }
    }

    pub fn kernel(&self) -> &Kernel<T> {
        self.kernel
    }

    pub fn varifold(&self) -> &Varifold1<T> {
        self.varifold
    }

    /// (Φ_ε∗‖V‖)(z).
    pub fn mass(&self, z: Point<T>) -> T {
        let mut acc = T::zero();
        self.segs
            .for_each_near(z, self.kernel.effective_radius + self.seg_pad, |i| {
                acc += self.segment_mass(&self.seg_slots[i], z)
            });
        acc
    }

    #[inline]
    fn segment_mass(&self, s: &SegData<T>, z: Point<T>) -> T {
        let k = self.kernel;
        let (tau, len, w) = (s.tau, s.len, s.weight);
        let reach = k.effective_radius;
        let rel = s.a - z;
        let t0 = rel.dot(tau);
        let t1 = t0 + len;
        let d = rel.cross(tau);
        let dist2 = if t0 > T::zero() {
            rel.norm_sq()
        } else if t1 < T::zero() {
            (s.b - z).norm_sq()
        } else {
            d * d
        };
        if dist2 > reach * reach {
            return T::zero();
        }
        let quarter = lit::<T>(0.25);
        let rb = s.b - z;
        if rel.norm_sq() <= quarter && rb.norm_sq() <= quarter {
            // ψ ≡ 1 along the whole segment: Gaussian line integral in closed form.
            let (inv_sq2e, neg_inv_2e2, scale) = k.line;
            let along = k.erf.eval(t1 * inv_sq2e) - k.erf.eval(t0 * inv_sq2e);
            return (d * d * neg_inv_2e2).exp() * along * scale * w;
        }
        let r = reach.min(T::one());
        let (t0, t1) = match clip_to_disc(s.a, s.b, z, r) {
            Some(t) => t,
            None => return T::zero(),
        };
        let len = len * (t1 - t0);
        let pieces = (len / k.epsilon).ceil().to_usize().unwrap_or(1).max(1);
        let dt = (t1 - t0) / lit::<T>(pieces as f64);
        let mut acc = T::zero();
        for p in 0..pieces {
            let base = t0 + dt * lit::<T>(p as f64);
            for &(x, wt) in &k.nodes {
                let q = s.a.lerp(s.b, base + dt * x);
                acc += wt * k.eval(q - z);
            }
        }
        acc * len / lit::<T>(pieces as f64) * w
    }

    /// (Φ_ε∗δV)(z) = ∫ S(∇Φ_ε(ẑ - z)) dV(ẑ). On a straight segment the
    /// tangential projection integrates exactly to `τ [Φ(b - z) - Φ(a - z)]`.
    /// Charges beyond the effective radius are dropped.
    pub fn first_variation(&self, z: Point<T>) -> Point<T> {
        let reach = self.kernel.effective_radius;
        let reach2 = reach * reach;
        let mut acc = Point::zero();
        self.charge_buckets.for_each_near(z, reach, |i| {
            let (p, q) = self.charges[i];
            let d = p - z;
            if d.norm_sq() <= reach2 {
                acc += q * self.kernel.eval(d);
            }
        });
        acc
    }

    /// (Φ∗δV)(z) / ((Φ∗‖V‖)(z) + ε).
    pub fn ratio(&self, z: Point<T>) -> Point<T> {
        let fv = self.first_variation(z);
        if fv == Point::zero() {
            return fv;
        }
        fv * (T::one() / (self.mass(z) + self.kernel.epsilon))
    }

    pub fn h_pointwise(&self, z: Point<T>) -> Point<T> {
        -self.ratio(z)
    }

    /// Full-mode h_ε at `z`, with the outer convolution on a lattice
    /// centered at `z`.
    pub fn h_full(&self, z: Point<T>) -> Point<T> {
        let k = self.kernel;
        let h = k.epsilon * lit(k.quadrature.area_spacing);
        let reach = k.effective_radius;
        let n = (reach / h).floor().to_i64().unwrap_or(0);
        let mut acc = Point::zero();
        for i in -n..=n {
            for j in -n..=n {
                let off = Point::new(h * lit::<T>(i as f64), h * lit::<T>(j as f64));
                if off.norm() > reach {
                    continue;
                }
                let phi = k.eval(off);
                if phi == T::zero() {
                    continue;
                }
                acc += self.ratio(z + off) * phi;
            }
        }
        -(acc * (h * h))
    }

    pub fn h(&self, z: Point<T>, mode: HMode) -> Point<T> {
        match mode {
            HMode::Pointwise => self.h_pointwise(z),
            HMode::Full => self.h_full(z),
        }
    }

    /// Pointwise h_ε at many points, evaluated in parallel, returned in input order.
    pub fn h_pointwise_many(&self, pts: &[Point<T>]) -> Vec<Point<T>> {
        pts.iter().map(|&p| self.h_pointwise(p)).collect()
    }

    /// Full-mode h_ε at many points. The ratio field is sampled once on a
    /// lattice anchored at the origin and shared by all stencils.
    pub fn h_full_many(&self, pts: &[Point<T>]) -> Vec<Point<T>> {
        let window =
            Rect::bounding(pts.iter().copied()).unwrap_or(Rect::new(Point::zero(), Point::zero()));
        let field = self.lattice_field(&window.expanded(self.kernel.effective_radius));
        self.stencils(&field, pts)
    }

    /// Curvature energy over `window` together with full-mode h_ε at `pts`,
    /// sharing one lattice evaluation.
    pub fn energy_and_h_full(&self, window: &Rect<T>, pts: &[Point<T>]) -> (T, Vec<Point<T>>) {
        let reach = self.kernel.effective_radius;
        let cover = Rect::bounding(pts.iter().copied())
            .map(|r| r.expanded(reach))
            .map_or(*window, |r| {
                Rect::new(
                    Point::new(r.min.x.min(window.min.x), r.min.y.min(window.min.y)),
                    Point::new(r.max.x.max(window.max.x), r.max.y.max(window.max.y)),
                )
            });
        let field = self.lattice_field(&cover);
        (field.energy(window), self.stencils(&field, pts))
    }

    /// ∫_window |Φ∗δV|² / (Φ∗‖V‖ + ε) dz by the midpoint rule on the
    /// origin-anchored lattice, with cells clipped to the window.
    pub fn curvature_energy(&self, window: &Rect<T>) -> T {
        self.lattice_field(window).energy(window)
    }

    fn lattice_field(&self, window: &Rect<T>) -> LatticeField<T> {
        let k = self.kernel;
        let h = k.epsilon * lit(k.quadrature.area_spacing);
        let half = lit::<T>(0.5);
        let idx = |v: T| v.to_i64().unwrap_or(0);
        let i0 = idx((window.min.x / h + half).floor());
        let i1 = idx((window.max.x / h - half).ceil()).max(i0);
        let j0 = idx((window.min.y / h + half).floor());
        let j1 = idx((window.max.y / h - half).ceil()).max(j0);
        let nx = (i1 - i0 + 1) as usize;
        let js: Vec<i64> = (j0..=j1).collect();
        let rows: Vec<Vec<(Point<T>, T)>> = map_all(&js, |&j| {
            (i0..=i1)
                .map(|i| {
                    let z = Point::new(h * lit::<T>(i as f64), h * lit::<T>(j as f64));
                    let fv = self.first_variation(z);
                    if fv == Point::zero() {
                        return (fv, T::zero());
                    }
                    let m = self.mass(z) + k.epsilon;
                    (fv * (T::one() / m), fv.norm_sq() / m)
                })
                .collect()
        });
        LatticeField {
            h,
            i0,
            j0,
            nx,
            ny: rows.len(),
            values: rows.into_iter().flatten().collect(),
        }
    }

    fn stencils(&self, field: &LatticeField<T>, pts: &[Point<T>]) -> Vec<Point<T>> {
        let k = self.kernel;
        let h = field.h;
        let reach = k.effective_radius;
        let n = (reach / h).ceil().to_i64().unwrap_or(0);
        map_all(pts, |&p| {
            let ci = (p.x / h).round().to_i64().unwrap_or(0);
            let cj = (p.y / h).round().to_i64().unwrap_or(0);
            let mut acc = Point::zero();
            for j in (cj - n)..=(cj + n) {
                for i in (ci - n)..=(ci + n) {
                    let q = Point::new(h * lit::<T>(i as f64), h * lit::<T>(j as f64));
                    let off = q - p;
                    if off.norm() > reach {
                        continue;
                    }
                    let r = field.ratio(i, j).unwrap_or_else(|| self.ratio(q));
                    if r != Point::zero() {
                        acc += r * k.eval(off);
                    }
                }
            }
            -(acc * (h * h))
        })
    }
}

/// Maps in parallel when the rayon pool has more than one thread. On a
/// single thread the hand-off to the worker costs more than the work.
fn map_all<I: Sync, R: Send>(items: &[I], f: impl Fn(&I) -> R + Sync + Send) -> Vec<R> {
    if rayon::current_num_threads() > 1 {
        items.par_iter().map(f).collect()
    } else {
        items.iter().map(f).collect()
    }
}

/// Ratio field and energy density sampled on lattice nodes `(i h, j h)`.
struct LatticeField<T> {
    h: T,
    i0: i64,
    j0: i64,
    nx: usize,
    ny: usize,
    values: Vec<(Point<T>, T)>,
}

impl<T: Scalar> LatticeField<T> {
    fn ratio(&self, i: i64, j: i64) -> Option<Point<T>> {
        let (a, b) = (i - self.i0, j - self.j0);
        if a < 0 || b < 0 || a as usize >= self.nx || b as usize >= self.ny {
            return None;
        }
        Some(self.values[b as usize * self.nx + a as usize].0)
    }

    fn energy(&self, window: &Rect<T>) -> T {
        let h = self.h;
        let half = h * lit(0.5);
        let overlap = |c: T, lo: T, hi: T| ((c + half).min(hi) - (c - half).max(lo)).max(T::zero());
        let mut total = T::zero();
        for b in 0..self.ny {
            let y = h * lit::<T>((self.j0 + b as i64) as f64);
            let wy = overlap(y, window.min.y, window.max.y);
            if wy == T::zero() {
                continue;
            }
            let mut row = T::zero();
            for a in 0..self.nx {
                let e = self.values[b * self.nx + a].1;
                if e != T::zero() {
                    let x = h * lit::<T>((self.i0 + a as i64) as f64);
                    row += e * overlap(x, window.min.x, window.max.x);
                }
            }
            total += row * wy;
        }
        total
    }
}

/// Φ_ε(z).
pub fn kernel_eval<T: Scalar>(k: &Kernel<T>, z: Point<T>) -> T {
    k.eval(z)
}

/// (Φ_ε∗‖V‖)(z).
pub fn smoothed_mass<T: Scalar>(v: &Varifold1<T>, k: &Kernel<T>, z: Point<T>) -> T {
    Mollifier::new(k, v).mass(z)
}

/// (Φ_ε∗δV)(z).
pub fn smoothed_first_variation<T: Scalar>(
    v: &Varifold1<T>,
    k: &Kernel<T>,
    z: Point<T>,
) -> Point<T> {
    Mollifier::new(k, v).first_variation(z)
}

/// h_ε(z, V) in the requested mode.
pub fn smoothed_mean_curvature<T: Scalar>(
    v: &Varifold1<T>,
    k: &Kernel<T>,
    z: Point<T>,
    mode: HMode,
) -> Point<T> {
    Mollifier::new(k, v).h(z, mode)
}

/// Curvature-energy proxy over an axis-aligned window.
pub fn curvature_energy<T: Scalar>(v: &Varifold1<T>, k: &Kernel<T>, window: &Rect<T>) -> T {
    Mollifier::new(k, v).curvature_energy(window)
}
