//! Exact measure-theoretic primitives on polygonal one-dimensional
//! varifolds: mass in balls, first variation, junction defects, density
//! ratios and Hausdorff distances.

use crate::error::{GeometryError, NetworkError};
use crate::geometry::{Point, Segment};
use crate::network::Network;
use crate::scalar::{lit, Scalar};

/// A finite sum of weighted straight segments.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Varifold1<T> {
    pub segments: Vec<Segment<T>>,
}

impl<T: Scalar> Varifold1<T> {
    pub fn new(segments: Vec<Segment<T>>) -> Self {
        Varifold1 { segments }
    }

    pub fn from_network(net: &Network<T>) -> Self {
        Varifold1 {
            segments: net.segments(),
        }
    }

    /// Unit-density varifold of `net` plus a straight ghost continuation of
    /// length `ghost` past every frozen endpoint of degree one. The ghosts
    /// stand in for the arm continuing to infinity, so smoothed quantities
    /// near the far field see no artificial boundary.
    pub fn from_network_with_far_field(net: &Network<T>, ghost: T) -> Self {
        let mut segments = net.segments();
        if ghost > T::zero() {
            let adj = net.adjacency();
            for &v in &net.frozen {
                if v < adj.len() && adj[v].len() == 1 {
                    let e = adj[v][0];
                    let w = net.edges[e].other(v);
                    if let Some(dir) = (net.vertices[v] - net.vertices[w]).normalized() {
                        let p = net.vertices[v];
                        if let Ok(s) = Segment::new(p, p + dir * ghost) {
                            segments.push(s);
                        }
                    }
                }
            }
        }
        Varifold1 { segments }
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn mass(&self) -> T {
        self.segments
            .iter()
            .fold(T::zero(), |acc, s| acc + s.mass())
    }

    pub fn translated(&self, d: Point<T>) -> Self {
        Varifold1 {
            segments: self
                .segments
                .iter()
                .map(|s| Segment {
                    a: s.a + d,
                    b: s.b + d,
                    multiplicity: s.multiplicity,
                })
                .collect(),
        }
    }

    /// Dilation by `lambda` about `center`.
    pub fn dilated(&self, center: Point<T>, lambda: T) -> Self {
        Varifold1 {
            segments: self
                .segments
                .iter()
                .map(|s| Segment {
                    a: center + (s.a - center) * lambda,
                    b: center + (s.b - center) * lambda,
                    multiplicity: s.multiplicity,
                })
                .collect(),
        }
    }

    /// Evenly spaced samples (spacing at most `h`) with their carried mass.
    pub fn sample(&self, h: T) -> Vec<(Point<T>, T)> {
        let mut out = Vec::new();
        for s in &self.segments {
            let len = s.length();
            let n = (len / h).ceil().to_usize().unwrap_or(1).max(1);
            let w = s.mass() / lit::<T>(n as f64);
            for k in 0..n {
                let t = (lit::<T>(k as f64) + lit(0.5)) / lit::<T>(n as f64);
                out.push((s.a.lerp(s.b, t), w));
            }
        }
        out
    }
}

/// A compactly supported C¹ vector field used to probe first variations.
pub trait VectorField<T: Scalar> {
    fn value(&self, p: Point<T>) -> Point<T>;

    /// Jacobian `[[∂gx/∂x, ∂gx/∂y], [∂gy/∂x, ∂gy/∂y]]`.
    fn jacobian(&self, p: Point<T>) -> [[T; 2]; 2];

    fn center(&self) -> Point<T>;

    fn support_radius(&self) -> T;
}

/// `amplitude · b(|p - center| / radius)` with the C^∞ bump
/// `b(s) = exp(1 - 1/(1 - s²))`, normalized so that `b(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpField<T> {
    pub center: Point<T>,
    pub radius: T,
    pub amplitude: Point<T>,
}

impl<T: Scalar> BumpField<T> {
    pub fn new(center: Point<T>, radius: T, amplitude: Point<T>) -> Self {
        BumpField {
            center,
            radius,
            amplitude,
        }
    }

    fn profile(&self, p: Point<T>) -> (T, Point<T>) {
        let d = p - self.center;
        let s2 = d.norm_sq() / (self.radius * self.radius);
        if s2 >= T::one() {
            return (T::zero(), Point::zero());
        }
        let q = T::one() - s2;
        let b = (T::one() - T::one() / q).exp();
        // db/d(s2) = -b / q², ∇(s2) = 2d / R²
        let g = d * (-(lit::<T>(2.0)) * b / (q * q * self.radius * self.radius));
        (b, g)
    }
}

impl<T: Scalar> VectorField<T> for BumpField<T> {
    fn value(&self, p: Point<T>) -> Point<T> {
        self.amplitude * self.profile(p).0
    }

    fn jacobian(&self, p: Point<T>) -> [[T; 2]; 2] {
        let (_, g) = self.profile(p);
        [
            [self.amplitude.x * g.x, self.amplitude.x * g.y],
            [self.amplitude.y * g.x, self.amplitude.y * g.y],
        ]
    }

    fn center(&self) -> Point<T> {
        self.center
    }

    fn support_radius(&self) -> T {
        self.radius
    }
}

/// The identity field `g(p) = p - center` cut off smoothly outside a large
/// ball; on the inner ball of radius `radius / 2` it is exactly the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffIdentity<T> {
    pub center: Point<T>,
    pub radius: T,
}

impl<T: Scalar> CutoffIdentity<T> {
    fn weight(&self, p: Point<T>) -> (T, Point<T>) {
        let d = p - self.center;
        let r = d.norm() / self.radius;
        let (w, dw) = crate::mollify::cutoff_profile(r);
        let grad = if r > T::zero() {
            d * (dw / (r * self.radius * self.radius))
        } else {
            Point::zero()
        };
        (w, grad)
    }
}

impl<T: Scalar> VectorField<T> for CutoffIdentity<T> {
    fn value(&self, p: Point<T>) -> Point<T> {
        (p - self.center) * self.weight(p).0
    }

    fn jacobian(&self, p: Point<T>) -> [[T; 2]; 2] {
        let d = p - self.center;
        let (w, g) = self.weight(p);
        [[w + d.x * g.x, d.x * g.y], [d.y * g.x, w + d.y * g.y]]
    }

    fn center(&self) -> Point<T> {
        self.center
    }

    fn support_radius(&self) -> T {
        self.radius
    }
}

/// ‖V‖(B_r(center)) by exact segment–disc clipping.
pub fn mass_in_ball<T: Scalar>(v: &Varifold1<T>, center: Point<T>, r: T) -> T {
    v.segments
        .iter()
        .map(|s| s.length_in_disc(center, r) * s.weight())
        .sum()
}

/// δV(g) = ∫ div_S g d‖V‖. Exact on straight segments: the tangential
/// divergence integrates to `(g(b) - g(a))·τ`.
pub fn first_variation_exact<T: Scalar, F: VectorField<T> + ?Sized>(v: &Varifold1<T>, g: &F) -> T {
    v.segments
        .iter()
        .map(|s| (g.value(s.b) - g.value(s.a)).dot(s.tangent()) * s.weight())
        .sum()
}

/// Sum of outgoing unit edge directions at `v`; zero exactly when the
/// vertex is balanced.
pub fn junction_defect<T: Scalar>(net: &Network<T>, v: usize) -> Result<Point<T>, NetworkError> {
    if v >= net.vertices.len() {
        return Err(NetworkError::NoSuchVertex(v));
    }
    let mut sum = Point::zero();
    let mut deg = 0;
    for (i, e) in net.edges.iter().enumerate() {
        if e.a == v || e.b == v {
            deg += 1;
            if let Some(d) = net.outgoing_direction(v, i) {
                sum += d;
            }
        }
    }
    if deg == 0 {
        return Err(NetworkError::DegreeZero(v));
    }
    Ok(sum)
}

/// ‖V‖(B_r(z)) / 2r.
pub fn density_ratio<T: Scalar>(v: &Varifold1<T>, z: Point<T>, r: T) -> T {
    mass_in_ball(v, z, r) / (r + r)
}

/// Symmetric Hausdorff distance between two finite point samples.
pub fn hausdorff_distance<T: Scalar>(a: &[Point<T>], b: &[Point<T>]) -> Result<T, GeometryError> {
    if a.is_empty() || b.is_empty() {
        return Err(GeometryError::EmptyInput);
    }
    Ok(directed(a, b).max(directed(b, a)))
}

// Early-break directed Hausdorff: most points find a close partner fast.
fn directed<T: Scalar>(from: &[Point<T>], to: &[Point<T>]) -> T {
    let mut cmax = T::zero();
    let mut hint = 0usize;
    for &p in from {
        let mut cmin = T::infinity();
        let n = to.len();
        for k in 0..n {
            let q = to[(hint + k) % n];
            let d = p.dist(q);
            if d < cmin {
                cmin = d;
                if d <= cmax {
                    hint = (hint + k) % n;
                    break;
                }
            }
        }
        if cmin > cmax && cmin.is_finite() {
            cmax = cmin;
        }
    }
    cmax
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn seg(ax: f64, ay: f64, bx: f64, by: f64) -> Segment<f64> {
        Segment::new(Point::new(ax, ay), Point::new(bx, by)).unwrap()
    }

    fn triple(len: f64) -> Varifold1<f64> {
        let mut segs = Vec::new();
        for k in 0..3 {
            let d = Point::from_angle(
                std::f64::consts::FRAC_PI_2 + k as f64 * 2.0 * std::f64::consts::PI / 3.0,
            );
            segs.push(Segment::new(Point::zero(), d * len).unwrap());
        }
        Varifold1::new(segs)
    }

    #[test]
    fn mass_in_ball_examples() {
        let line = Varifold1::new(vec![seg(-2.0, 0.0, 2.0, 0.0)]);
        assert!((mass_in_ball(&line, Point::zero(), 1.0) - 2.0).abs() < 1e-15);
        assert!((mass_in_ball(&triple(1.0), Point::zero(), 0.5) - 1.5).abs() < 1e-15);
        let far = Varifold1::new(vec![seg(3.0, 0.0, 4.0, 0.0)]);
        assert_eq!(mass_in_ball(&far, Point::zero(), 1.0), 0.0);
        assert_eq!(
            mass_in_ball(&Varifold1::<f64>::default(), Point::zero(), 1.0),
            0.0
        );
    }

    #[test]
    fn density_ratio_examples() {
        let line = Varifold1::new(vec![seg(-2.0, 0.0, 2.0, 0.0)]);
        assert!((density_ratio(&line, Point::new(0.3, 0.0), 0.5) - 1.0).abs() < 1e-15);
        assert!((density_ratio(&triple(1.0), Point::zero(), 0.2) - 1.5).abs() < 1e-15);
        assert_eq!(density_ratio(&line, Point::new(0.0, 1.0), 0.5), 0.0);
    }

    #[test]
    fn multiplicity_weights_mass() {
        let s =
            Segment::with_multiplicity(Point::new(-1.0f64, 0.0), Point::new(1.0, 0.0), 3).unwrap();
        let v = Varifold1::new(vec![s]);
        assert!((density_ratio(&v, Point::zero(), 0.5) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn first_variation_vanishing_field() {
        let v = Varifold1::new(vec![seg(-0.5, 0.0, 0.5, 0.0)]);
        let g = BumpField::new(Point::new(0.0, 0.0), 0.4, Point::new(1.0, 0.5));
        assert!(first_variation_exact(&v, &g).abs() < 1e-15);
    }

    #[test]
    fn first_variation_of_identity_is_perimeter() {
        let net = fixtures::circle(Point::new(0.2, -0.1), 0.7, 12, 2, 1);
        let v = Varifold1::from_network(&net);
        let g = CutoffIdentity {
            center: Point::zero(),
            radius: 4.0,
        };
        let fv = first_variation_exact(&v, &g);
        assert!((fv - v.mass()).abs() < 1e-12, "{fv} vs {}", v.mass());
    }

    #[test]
    fn balanced_triple_has_zero_first_variation_near_junction() {
        let g = BumpField::new(Point::new(0.01, -0.02), 0.3, Point::new(0.7, -1.1));
        assert!(first_variation_exact(&triple(1.0), &g).abs() < 1e-14);
    }

    #[test]
    fn junction_defects() {
        let line = fixtures::straight_line(2.0, 2);
        assert!(junction_defect(&line, 1).unwrap().norm() < 1e-15);
        let tri = fixtures::triple_junction(Point::zero(), 1.0, 1);
        assert!(junction_defect(&tri, 0).unwrap().norm() < 1e-15);
        let cross = fixtures::cross(Point::zero(), 1.0, 1);
        assert!(junction_defect(&cross, 0).unwrap().norm() < 1e-15);
        let mut iso = line.clone();
        iso.add_vertex(Point::new(5.0, 5.0));
        let last = iso.vertices.len() - 1;
        assert!(matches!(
            junction_defect(&iso, last),
            Err(NetworkError::DegreeZero(_))
        ));
    }

    #[test]
    fn hausdorff_examples() {
        let a = vec![Point::new(0.0, 0.0)];
        let b = vec![Point::new(0.0, 1.0)];
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(hausdorff_distance(&a, &b).unwrap(), 1.0);
        assert!(hausdorff_distance::<f64>(&[], &b).is_err());
    }

    #[test]
    fn hausdorff_matches_brute_force_on_shifted_segment() {
        let a: Vec<Point<f64>> = (0..=200)
            .map(|k| Point::new(k as f64 / 200.0, 0.0))
            .collect();
        let b: Vec<Point<f64>> = a.iter().map(|p| *p + Point::new(0.0, 0.1)).collect();
        let brute = a
            .iter()
            .map(|p| b.iter().map(|q| p.dist(*q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
            .max(
                b.iter()
                    .map(|p| a.iter().map(|q| p.dist(*q)).fold(f64::INFINITY, f64::min))
                    .fold(0.0, f64::max),
            );
        let h = hausdorff_distance(&a, &b).unwrap();
        assert!((h - brute).abs() < 1e-15);
        assert!((h - 0.1).abs() < 1e-12);
    }
}
