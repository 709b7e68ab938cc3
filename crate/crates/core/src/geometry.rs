//! Planar points, segments and the handful of predicates the rest of the
//! crate is built on.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;
use crate::scalar::{lit, Scalar};

/// A point (or displacement vector) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Point { x, y }
    }

    #[inline]
    pub fn zero() -> Self {
        Point::new(T::zero(), T::zero())
    }

    /// Unit vector at `angle` radians from the x-axis.
    #[inline]
    pub fn from_angle(angle: T) -> Self {
        Point::new(angle.cos(), angle.sin())
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> T {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn dist(self, o: Self) -> T {
        (self - o).norm()
    }

    /// Counter-clockwise rotation by 90 degrees.
    #[inline]
    pub fn perp(self) -> Self {
        Point::new(-self.y, self.x)
    }

    #[inline]
    pub fn angle(self) -> T {
        self.y.atan2(self.x)
    }

    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n > T::zero() && n.is_finite() {
            Some(self * (T::one() / n))
        } else {
            None
        }
    }

    pub fn rotate(self, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    #[inline]
    pub fn lerp(self, o: Self, t: T) -> Self {
        self + (o - self) * t
    }

    #[inline]
    pub fn midpoint(self, o: Self) -> Self {
        self.lerp(o, lit(0.5))
    }
}

impl<T: Scalar> Add for Point<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Scalar> AddAssign for Point<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl<T: Scalar> Sub for Point<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Scalar> SubAssign for Point<T> {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        self.x -= o.x;
        self.y -= o.y;
    }
}

impl<T: Scalar> Mul<T> for Point<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Point::new(self.x * s, self.y * s)
    }
}

impl<T: Scalar> Neg for Point<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Point::new(-self.x, -self.y)
    }
}

/// A straight segment carrying an integer multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment<T> {
    pub a: Point<T>,
    pub b: Point<T>,
    pub multiplicity: u32,
}

impl<T: Scalar> Segment<T> {
    pub fn new(a: Point<T>, b: Point<T>) -> Result<Self, GeometryError> {
        Self::with_multiplicity(a, b, 1)
    }

    pub fn with_multiplicity(
        a: Point<T>,
        b: Point<T>,
        multiplicity: u32,
    ) -> Result<Self, GeometryError> {
        if !a.is_finite() || !b.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if multiplicity == 0 {
            return Err(GeometryError::ZeroMultiplicity);
        }
        if (b - a).norm() <= T::zero() {
            return Err(GeometryError::ZeroLength);
        }
        Ok(Segment { a, b, multiplicity })
    }

    #[inline]
    pub fn length(&self) -> T {
        (self.b - self.a).norm()
    }

    /// Multiplicity-weighted length.
    #[inline]
    pub fn mass(&self) -> T {
        self.length() * self.weight()
    }

    #[inline]
    pub fn weight(&self) -> T {
        T::from_u32(self.multiplicity).unwrap_or_else(T::one)
    }

    #[inline]
    pub fn tangent(&self) -> Point<T> {
        let d = self.b - self.a;
        d * (T::one() / d.norm())
    }

    /// Length of the part of the segment inside the closed disc `|p - c| <= r`.
    pub fn length_in_disc(&self, c: Point<T>, r: T) -> T {
        match clip_to_disc(self.a, self.b, c, r) {
            Some((t0, t1)) => (t1 - t0) * self.length(),
            None => T::zero(),
        }
    }

    pub fn distance_to(&self, p: Point<T>) -> T {
        point_segment_distance(p, self.a, self.b)
    }
}

/// Parameter interval `[t0, t1] ⊂ [0, 1]` of `a + t (b - a)` lying in the
/// closed disc, or `None` if the intersection has no length.
pub fn clip_to_disc<T: Scalar>(a: Point<T>, b: Point<T>, c: Point<T>, r: T) -> Option<(T, T)> {
    let d = b - a;
    let f = a - c;
    let qa = d.norm_sq();
    if qa <= T::zero() {
        return None;
    }
    let qb = f.dot(d);
    let qc = f.norm_sq() - r * r;
    let disc = qb * qb - qa * qc;
    if disc <= T::zero() {
        return None;
    }
    let sq = disc.sqrt();
    let t0 = ((-qb - sq) / qa).max(T::zero());
    let t1 = ((-qb + sq) / qa).min(T::one());
    if t1 > t0 {
        Some((t0, t1))
    } else {
        None
    }
}

/// Parameter interval of `a + t (b - a)` inside the axis-aligned rectangle
/// `[lo.x, hi.x] × [lo.y, hi.y]` (Liang–Barsky).
pub fn clip_to_rect<T: Scalar>(
    a: Point<T>,
    b: Point<T>,
    lo: Point<T>,
    hi: Point<T>,
) -> Option<(T, T)> {
    let d = b - a;
    let mut t0 = T::zero();
    let mut t1 = T::one();
    let checks = [
        (-d.x, a.x - lo.x),
        (d.x, hi.x - a.x),
        (-d.y, a.y - lo.y),
        (d.y, hi.y - a.y),
    ];
    for (p, q) in checks {
        if p == T::zero() {
            if q < T::zero() {
                return None;
            }
        } else {
            let t = q / p;
            if p < T::zero() {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
        }
    }
    if t1 > t0 {
        Some((t0, t1))
    } else {
        None
    }
}

pub fn point_segment_distance<T: Scalar>(p: Point<T>, a: Point<T>, b: Point<T>) -> T {
    let d = b - a;
    let l2 = d.norm_sq();
    if l2 <= T::zero() {
        return p.dist(a);
    }
    let t = ((p - a).dot(d) / l2).max(T::zero()).min(T::one());
    p.dist(a + d * t)
}

/// Sign of the turn a → b → c: positive for counter-clockwise.
#[inline]
pub fn orient<T: Scalar>(a: Point<T>, b: Point<T>, c: Point<T>) -> T {
    (b - a).cross(c - a)
}

/// How two segments meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Contact {
    Disjoint,
    /// Interiors cross transversally, or an endpoint touches the other's interior.
    Touch,
    /// Collinear with overlap of positive length.
    Overlap,
}

/// Classifies the contact between segments `p0p1` and `q0q1`. Shared
/// endpoints alone are reported as `Disjoint` when `shared` is set.
pub fn segment_contact<T: Scalar>(
    p0: Point<T>,
    p1: Point<T>,
    q0: Point<T>,
    q1: Point<T>,
    shared: bool,
) -> Contact {
    let scale = (p1 - p0).norm().max((q1 - q0).norm());
    let tol = scale * scale * T::tiny();
    let o1 = orient(p0, p1, q0);
    let o2 = orient(p0, p1, q1);
    let o3 = orient(q0, q1, p0);
    let o4 = orient(q0, q1, p1);
    let sgn = |v: T| -> i8 {
        if v > tol {
            1
        } else if v < -tol {
            -1
        } else {
            0
        }
    };
    let (s1, s2, s3, s4) = (sgn(o1), sgn(o2), sgn(o3), sgn(o4));
    if s1 == 0 && s2 == 0 {
        // collinear: project onto p's direction
        let d = p1 - p0;
        let l2 = d.norm_sq();
        let ta = (q0 - p0).dot(d) / l2;
        let tb = (q1 - p0).dot(d) / l2;
        let lo = ta.min(tb).max(T::zero());
        let hi = ta.max(tb).min(T::one());
        let eps = T::tiny().sqrt();
        if hi - lo > eps {
            return Contact::Overlap;
        }
        if shared {
            return Contact::Disjoint;
        }
        if hi - lo >= -eps {
            return Contact::Touch;
        }
        return Contact::Disjoint;
    }
    if shared {
        return Contact::Disjoint;
    }
    if s1 * s2 <= 0 && s3 * s4 <= 0 {
        return Contact::Touch;
    }
    Contact::Disjoint
}

/// Sup over the densely sampled `from` set of the distance to the segment
/// set `to`. `samples` points per segment.
pub fn directed_segment_hausdorff<T: Scalar>(
    from: &[(Point<T>, Point<T>)],
    to: &[(Point<T>, Point<T>)],
    samples: usize,
) -> T {
    let mut worst = T::zero();
    let n = samples.max(2);
    for &(a, b) in from {
        for k in 0..n {
            let t = lit::<T>(k as f64 / (n - 1) as f64);
            let p = a.lerp(b, t);
            let d = to
                .iter()
                .map(|&(c, e)| point_segment_distance(p, c, e))
                .fold(T::infinity(), T::min);
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Symmetric Hausdorff distance between two segment sets, by sampling.
pub fn segment_set_hausdorff<T: Scalar>(
    a: &[(Point<T>, Point<T>)],
    b: &[(Point<T>, Point<T>)],
    samples: usize,
) -> T {
    if a.is_empty() && b.is_empty() {
        return T::zero();
    }
    if a.is_empty() || b.is_empty() {
        return T::infinity();
    }
    directed_segment_hausdorff(a, b, samples).max(directed_segment_hausdorff(b, a, samples))
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect<T> {
    pub min: Point<T>,
    pub max: Point<T>,
}

impl<T: Scalar> Rect<T> {
    pub fn new(min: Point<T>, max: Point<T>) -> Self {
        Rect { min, max }
    }

    pub fn width(&self) -> T {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> T {
        self.max.y - self.min.y
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.width() > T::zero() && self.height() > T::zero())
    }

    pub fn contains(&self, p: Point<T>) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn expanded(&self, m: T) -> Self {
        Rect::new(self.min - Point::new(m, m), self.max + Point::new(m, m))
    }

    /// Smallest rectangle containing all points; `None` for an empty input.
    pub fn bounding<I: IntoIterator<Item = Point<T>>>(pts: I) -> Option<Self> {
        let mut it = pts.into_iter();
        let first = it.next()?;
        let mut r = Rect::new(first, first);
        for p in it {
            r.min.x = r.min.x.min(p.x);
            r.min.y = r.min.y.min(p.y);
            r.max.x = r.max.x.max(p.x);
            r.max.y = r.max.y.max(p.y);
        }
        Some(r)
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit(order: usize) -> Vec<(f64, f64)> {
    let n = order.max(1);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Newton on P_n starting from the Chebyshev-like guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disc_clipping_of_diameter() {
        let a = Point::new(-2.0f64, 0.0);
        let b = Point::new(2.0, 0.0);
        let s = Segment::new(a, b).unwrap();
        assert!((s.length_in_disc(Point::zero(), 1.0) - 2.0).abs() < 1e-15);
        assert_eq!(s.length_in_disc(Point::new(0.0, 3.0), 1.0), 0.0);
    }

    #[test]
    fn rect_clipping() {
        let (t0, t1) = clip_to_rect(
            Point::new(-2.0f64, 0.5),
            Point::new(2.0, 0.5),
            Point::new(-1.0, -1.0),
            Point::new(1.0, 1.0),
        )
        .unwrap();
        assert!((t0 - 0.25).abs() < 1e-15 && (t1 - 0.75).abs() < 1e-15);
    }

    #[test]
    fn zero_length_segment_rejected() {
        let p = Point::new(1.0, 1.0);
        assert!(matches!(Segment::new(p, p), Err(GeometryError::ZeroLength)));
    }

    #[test]
    fn contacts() {
        let o = Point::new(0.0, 0.0);
        let c = segment_contact(
            Point::new(-1.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, -1.0),
            Point::new(0.0, 1.0),
            false,
        );
        assert_eq!(c, Contact::Touch);
        let c = segment_contact(o, Point::new(1.0, 0.0), o, Point::new(0.0, 1.0), true);
        assert_eq!(c, Contact::Disjoint);
        let c = segment_contact(o, Point::new(1.0, 0.0), o, Point::new(0.5, 0.0), true);
        assert_eq!(c, Contact::Overlap);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let q = gauss_legendre_unit(5);
        let s: f64 = q.iter().map(|(x, w)| w * x.powi(9)).sum();
        assert!((s - 0.1).abs() < 1e-14);
        let w: f64 = q.iter().map(|(_, w)| w).sum();
        assert!((w - 1.0).abs() < 1e-14);
    }
}
