//! Planar geometry: poses, convex polygons, regions and collision predicates.
//!
//! Collision and containment use closed-set semantics throughout: polygons that
//! merely touch are reported as intersecting, and a point on a region boundary
//! is inside the region.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used when checking that a polygon is expressed about its centroid.
pub const CENTROID_TOLERANCE: f64 = 1e-9;

/// Default orientation weight of [`se2_distance`], in meters per radian.
pub const DEFAULT_W_THETA: f64 = 0.1;

/// Wraps an angle into `(-π, π]`.
///
/// Angles already inside the interval are returned bit-for-bit unchanged.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut a = theta % TAU;
    if a > PI {
        a -= TAU;
    } else if a <= -PI {
        a += TAU;
    }
    a
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// Scalar (z-component) cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    /// Counter-clockwise rotation by `theta` radians.
    pub fn rotate(self, theta: f64) -> Vec2 {
        let (s, c) = theta.sin_cos();
        self.rotate_sc(s, c)
    }

    fn rotate_sc(self, s: f64, c: f64) -> Vec2 {
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Left-hand perpendicular, `(-y, x)`.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(v: [f64; 2]) -> Self {
        Vec2::new(v[0], v[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

/// A planar rigid-body pose. `theta` is kept in `(-π, π]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2 {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    /// Maps a point from the body frame into the world frame.
    pub fn apply(&self, local: Vec2) -> Vec2 {
        local.rotate(self.theta) + self.position()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }
}

impl fmt::Display for Pose2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.4}, {:.4}, {:.4})", self.x, self.y, self.theta)
    }
}

/// Weighted SE(2) distance: Euclidean position distance plus
/// `w_theta * |wrap(Δθ)|`.
pub fn se2_distance(a: &Pose2, b: &Pose2, w_theta: f64) -> f64 {
    let d = a.position() - b.position();
    d.norm() + w_theta * wrap_angle(b.theta - a.theta).abs()
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PolygonError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("vertex {0} is not finite")]
    NonFinite(usize),
    #[error("vertex {0} repeats an earlier vertex")]
    RepeatedVertex(usize),
    #[error("polygon is not strictly convex and counter-clockwise at vertex {0}")]
    NotConvex(usize),
    #[error("polygon centroid is not at the local origin")]
    NotCentered,
}

/// A strictly convex, counter-clockwise polygon in a local frame whose origin
/// is its uniform-density centroid.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Vec2>,
}

impl ConvexPolygon {
    /// Validates and wraps a vertex list that is already centered on its centroid.
    pub fn new(vertices: Vec<Vec2>) -> Result<Self, PolygonError> {
        check_convex(&vertices)?;
        let c = area_centroid(&vertices).1;
        if c.x.abs() > CENTROID_TOLERANCE || c.y.abs() > CENTROID_TOLERANCE {
            return Err(PolygonError::NotCentered);
        }
        Ok(Self { vertices })
    }

    /// Like [`ConvexPolygon::new`] but shifts the vertices so the centroid
    /// becomes the origin. Returns the polygon and the removed offset.
    pub fn centered(vertices: Vec<Vec2>) -> Result<(Self, Vec2), PolygonError> {
        check_convex(&vertices)?;
        let c = area_centroid(&vertices).1;
        let shifted = vertices.into_iter().map(|v| v - c).collect();
        Ok((Self { vertices: shifted }, c))
    }

    /// Axis-aligned `width x height` rectangle. Vertex 0 is the
    /// `(+w/2, -h/2)` corner, followed counter-clockwise.
    pub fn rectangle(width: f64, height: f64) -> Result<Self, PolygonError> {
        let (hw, hh) = (width / 2.0, height / 2.0);
        Self::new(vec![
            Vec2::new(hw, -hh),
            Vec2::new(hw, hh),
            Vec2::new(-hw, hh),
            Vec2::new(-hw, -hh),
        ])
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Edge `i` runs from vertex `i` to vertex `i + 1` (cyclic).
    pub fn edge(&self, i: usize) -> (Vec2, Vec2) {
        let n = self.vertices.len();
        (self.vertices[i % n], self.vertices[(i + 1) % n])
    }

    pub fn area(&self) -> f64 {
        area_centroid(&self.vertices).0
    }

    pub fn perimeter(&self) -> f64 {
        (0..self.len())
            .map(|i| {
                let (a, b) = self.edge(i);
                (b - a).norm()
            })
            .sum()
    }

    /// Polar second moment of area about the local origin (the centroid).
    pub fn polar_second_moment(&self) -> f64 {
        let sum: f64 = (0..self.len())
            .map(|i| {
                let (a, b) = self.edge(i);
                a.cross(b) * (a.dot(a) + a.dot(b) + b.dot(b))
            })
            .sum();
        sum / 12.0
    }

    /// Largest distance from the centroid to a vertex.
    pub fn circumradius(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Minimum caliper width: the smallest extent of the polygon measured
    /// along any of its edge normals.
    pub fn min_width(&self) -> f64 {
        (0..self.len())
            .map(|i| {
                let (a, b) = self.edge(i);
                let n = (b - a).perp();
                let n = n * (1.0 / n.norm());
                let (lo, hi) = project(&self.vertices, n);
                hi - lo
            })
            .fold(f64::INFINITY, f64::min)
    }
}

fn check_convex(vertices: &[Vec2]) -> Result<(), PolygonError> {
    let n = vertices.len();
    if n < 3 {
        return Err(PolygonError::TooFewVertices(n));
    }
    for (i, v) in vertices.iter().enumerate() {
        if !v.is_finite() {
            return Err(PolygonError::NonFinite(i));
        }
        if vertices[..i].contains(v) {
            return Err(PolygonError::RepeatedVertex(i));
        }
    }
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let c = vertices[(i + 2) % n];
        if (b - a).cross(c - b) <= 0.0 {
            return Err(PolygonError::NotConvex((i + 1) % n));
        }
    }
    // Consecutive left turns still admit self-overlapping "star" windings;
    // a simple convex polygon winds exactly once.
    let turning: f64 = (0..n)
        .map(|i| {
            let e0 = vertices[(i + 1) % n] - vertices[i];
            let e1 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
            e0.cross(e1).atan2(e0.dot(e1))
        })
        .sum();
    if (turning - TAU).abs() > 1e-6 {
        return Err(PolygonError::NotConvex(0));
    }
    Ok(())
}

fn area_centroid(vertices: &[Vec2]) -> (f64, Vec2) {
    let n = vertices.len();
    let mut a2 = 0.0;
    let mut c = Vec2::ZERO;
    for i in 0..n {
        let p = vertices[i];
        let q = vertices[(i + 1) % n];
        let w = p.cross(q);
        a2 += w;
        c = c + (p + q) * w;
    }
    (a2 / 2.0, c * (1.0 / (3.0 * a2)))
}

/// Returns the world-frame vertices of `poly` placed at `pose`, in the same order.
pub fn transform_polygon(poly: &ConvexPolygon, pose: &Pose2) -> Vec<Vec2> {
    let (s, c) = pose.theta.sin_cos();
    let t = pose.position();
    poly.vertices
        .iter()
        .map(|v| v.rotate_sc(s, c) + t)
        .collect()
}

fn project(points: &[Vec2], axis: Vec2) -> (f64, f64) {
    points
        .iter()
        .map(|p| p.dot(axis))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| {
            (lo.min(d), hi.max(d))
        })
}

fn has_separating_axis(edges_of: &[Vec2], other: &[Vec2]) -> bool {
    let n = edges_of.len();
    (0..n).any(|i| {
        let axis = (edges_of[(i + 1) % n] - edges_of[i]).perp();
        let (a_lo, a_hi) = project(edges_of, axis);
        let (b_lo, b_hi) = project(other, axis);
        a_hi < b_lo || b_hi < a_lo
    })
}

/// Separating-axis test over both polygons' edge normals. Both inputs are
/// world-frame vertex lists of convex polygons. Touching counts as intersecting.
pub fn polygons_intersect(a: &[Vec2], b: &[Vec2]) -> bool {
    !(has_separating_axis(a, b) || has_separating_axis(b, a))
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RegionError {
    #[error("region parameters are not finite")]
    NonFinite,
    #[error("disc radius must be positive")]
    NonPositiveRadius,
    #[error("annulus requires 0 <= r_min < r_max")]
    BadAnnulus,
    #[error("rectangle min corner must be below max corner in both axes")]
    BadRectangle,
}

/// A closed planar region.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    Disc { center: Vec2, radius: f64 },
    Annulus { center: Vec2, r_min: f64, r_max: f64 },
    Rectangle { min: Vec2, max: Vec2 },
}

impl Region {
    pub fn disc(center: Vec2, radius: f64) -> Result<Self, RegionError> {
        Region::Disc { center, radius }.validated()
    }

    pub fn annulus(center: Vec2, r_min: f64, r_max: f64) -> Result<Self, RegionError> {
        Region::Annulus {
            center,
            r_min,
            r_max,
        }
        .validated()
    }

    pub fn rectangle(min: Vec2, max: Vec2) -> Result<Self, RegionError> {
        Region::Rectangle { min, max }.validated()
    }

    pub fn validated(self) -> Result<Self, RegionError> {
        match self {
            Region::Disc { center, radius } => {
                if !center.is_finite() || !radius.is_finite() {
                    return Err(RegionError::NonFinite);
                }
                if radius <= 0.0 {
                    return Err(RegionError::NonPositiveRadius);
                }
            }
            Region::Annulus {
                center,
                r_min,
                r_max,
            } => {
                if !center.is_finite() || !r_min.is_finite() || !r_max.is_finite() {
                    return Err(RegionError::NonFinite);
                }
                if !(0.0 <= r_min && r_min < r_max) {
                    return Err(RegionError::BadAnnulus);
                }
            }
            Region::Rectangle { min, max } => {
                if !min.is_finite() || !max.is_finite() {
                    return Err(RegionError::NonFinite);
                }
                if !(min.x < max.x && min.y < max.y) {
                    return Err(RegionError::BadRectangle);
                }
            }
        }
        Ok(self)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        point_in_region(p, self)
    }

    /// Whether every vertex of a convex world polygon lies in the region.
    /// Exact for rectangles and discs, which are convex.
    pub fn contains_polygon(&self, world: &[Vec2]) -> bool {
        world.iter().all(|&p| self.contains(p))
    }

    /// A representative point: the center for discs and annuli, the middle
    /// of a rectangle.
    pub fn center(&self) -> Vec2 {
        match *self {
            Region::Disc { center, .. } | Region::Annulus { center, .. } => center,
            Region::Rectangle { min, max } => (min + max) * 0.5,
        }
    }

    /// Smallest distance from `p` to any point of the region (0 inside).
    pub fn distance_to(&self, p: Vec2) -> f64 {
        match *self {
            Region::Disc { center, radius } => ((p - center).norm() - radius).max(0.0),
            Region::Annulus {
                center,
                r_min,
                r_max,
            } => {
                let r = (p - center).norm();
                if r < r_min {
                    r_min - r
                } else {
                    (r - r_max).max(0.0)
                }
            }
            Region::Rectangle { min, max } => {
                let dx = (min.x - p.x).max(0.0).max(p.x - max.x);
                let dy = (min.y - p.y).max(0.0).max(p.y - max.y);
                dx.hypot(dy)
            }
        }
    }
}

/// Closed-set containment test.
pub fn point_in_region(p: Vec2, r: &Region) -> bool {
    match *r {
        Region::Disc { center, radius } => (p - center).norm_squared() <= radius * radius,
        Region::Annulus {
            center,
            r_min,
            r_max,
        } => {
            let d2 = (p - center).norm_squared();
            r_min * r_min <= d2 && d2 <= r_max * r_max
        }
        Region::Rectangle { min, max } => {
            min.x <= p.x && p.x <= max.x && min.y <= p.y && p.y <= max.y
        }
    }
}
