//! Geometric primitives shared by every stage: points, planes, segments,
//! distances and weighted plane fitting.

use nalgebra::{Matrix3, SymmetricEigen, Unit, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Point3 = nalgebra::Point3<f64>;
pub type Vec3 = Vector3<f64>;
/// Unit-norm direction.
pub type Direction3 = Unit<Vec3>;

/// Minimum segment length accepted by [`Segment3::new`], in meters.
pub const MIN_SEGMENT_LENGTH: f64 = 1e-12;
/// Below this sine, two lines are treated as parallel.
pub const PARALLEL_SINE: f64 = 1e-6;
/// Minimum dihedral angle (degrees) for a two-plane intersection to be usable.
pub const MIN_DIHEDRAL_DEG: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("weighted point set is degenerate (collinear or too small) for a plane fit")]
    DegenerateFit,
    #[error("planes meet at {angle_deg:.4} deg, intersection line is ill-conditioned")]
    IllConditionedIntersection { angle_deg: f64 },
    #[error("segment is shorter than {MIN_SEGMENT_LENGTH} m")]
    DegenerateSegment,
    #[error("plane normal has zero length")]
    ZeroNormal,
}

/// Oriented plane `{ x : normal . x - offset = 0 }` with a canonical normal
/// (first nonzero component positive).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PlaneRepr", into = "PlaneRepr")]
pub struct Plane {
    normal: Direction3,
    offset: f64,
}

#[derive(Serialize, Deserialize)]
struct PlaneRepr {
    normal: [f64; 3],
    offset: f64,
}

impl TryFrom<PlaneRepr> for Plane {
    type Error = GeomError;
    fn try_from(r: PlaneRepr) -> Result<Self, GeomError> {
        Plane::try_from_parts(r.normal, r.offset)
    }
}

impl From<Plane> for PlaneRepr {
    fn from(p: Plane) -> Self {
        PlaneRepr { normal: p.normal.into_inner().into(), offset: p.offset }
    }
}

fn canonical_lead(n: &Vec3) -> f64 {
    n.iter().copied().find(|c| c.abs() > 1e-12).unwrap_or(0.0)
}

impl Plane {
    /// Builds a plane from any nonzero normal; the normal is normalized
    /// and canonicalized, the offset rescaled accordingly.
    pub fn new(normal: Vec3, offset: f64) -> Result<Self, GeomError> {
        let norm = normal.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(GeomError::ZeroNormal);
        }
        let mut n = normal / norm;
        let mut d = offset / norm;
        if canonical_lead(&n) < 0.0 {
            n = -n;
            d = -d;
        }
        Ok(Plane { normal: Unit::new_unchecked(n), offset: d })
    }

    /// Like [`Plane::new`], but a normal that is already unit length and
    /// canonical is kept bit for bit, so stored planes reload exactly.
    pub fn try_from_parts(normal: [f64; 3], offset: f64) -> Result<Self, GeomError> {
        let n = Vec3::from(normal);
        if (n.norm() - 1.0).abs() <= 1e-12 && canonical_lead(&n) > 0.0 {
            return Ok(Plane { normal: Unit::new_unchecked(n), offset });
        }
        Plane::new(n, offset)
    }

    pub fn from_point_normal(point: &Point3, normal: Vec3) -> Result<Self, GeomError> {
        let offset = normal.dot(&point.coords);
        Plane::new(normal, offset)
    }

    /// Axis-aligned plane `x[axis] = value`.
    pub fn axis(axis: usize, value: f64) -> Self {
        let mut n = Vec3::zeros();
        n[axis] = 1.0;
        Plane { normal: Unit::new_unchecked(n), offset: value }
    }

    pub fn normal(&self) -> &Vec3 {
        self.normal.as_ref()
    }

    pub fn unit_normal(&self) -> Direction3 {
        self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn signed_distance(&self, p: &Point3) -> f64 {
        self.normal.dot(&p.coords) - self.offset
    }

    pub fn project(&self, p: &Point3) -> Point3 {
        p - self.normal.as_ref() * self.signed_distance(p)
    }

    /// Dihedral angle between the two planes in degrees, in `[0, 90]`.
    pub fn angle_to(&self, other: &Plane) -> f64 {
        unoriented_angle_deg(self.normal(), other.normal())
    }

    /// Intersection line of two planes. Fails when the dihedral angle is
    /// below [`MIN_DIHEDRAL_DEG`].
    pub fn intersection(&self, other: &Plane) -> Result<Line3, GeomError> {
        self.intersection_with_min_angle(other, MIN_DIHEDRAL_DEG)
    }

    pub fn intersection_with_min_angle(
        &self,
        other: &Plane,
        min_angle_deg: f64,
    ) -> Result<Line3, GeomError> {
        let angle_deg = self.angle_to(other);
        if angle_deg < min_angle_deg || angle_deg == 0.0 {
            return Err(GeomError::IllConditionedIntersection { angle_deg });
        }
        let n1 = self.normal();
        let n2 = other.normal();
        let c = n1.dot(n2);
        let den = 1.0 - c * c;
        let (h1, h2) = (self.offset, other.offset);
        let point = Point3::from((n1 * (h1 - h2 * c) + n2 * (h2 - h1 * c)) / den);
        Ok(Line3 { point, direction: Unit::new_normalize(n1.cross(n2)) })
    }
}

/// Infinite line through `point` along `direction`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line3 {
    pub point: Point3,
    pub direction: Direction3,
}

impl Line3 {
    pub fn distance(&self, p: &Point3) -> f64 {
        (p - self.point).cross(self.direction.as_ref()).norm()
    }

    pub fn project(&self, p: &Point3) -> Point3 {
        let d = self.direction.as_ref();
        self.point + d * (p - self.point).dot(d)
    }
}

/// Non-degenerate 3D line segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment3 {
    pub p0: Point3,
    pub p1: Point3,
}

impl Segment3 {
    pub fn new(p0: Point3, p1: Point3) -> Result<Self, GeomError> {
        if (p1 - p0).norm() <= MIN_SEGMENT_LENGTH {
            return Err(GeomError::DegenerateSegment);
        }
        Ok(Segment3 { p0, p1 })
    }

    pub fn length(&self) -> f64 {
        (self.p1 - self.p0).norm()
    }

    pub fn vector(&self) -> Vec3 {
        self.p1 - self.p0
    }

    pub fn direction(&self) -> Direction3 {
        Unit::new_normalize(self.vector())
    }

    pub fn midpoint(&self) -> Point3 {
        nalgebra::center(&self.p0, &self.p1)
    }

    pub fn point_at(&self, t: f64) -> Point3 {
        self.p0 + self.vector() * t
    }

    pub fn supporting_line(&self) -> Line3 {
        Line3 { point: self.p0, direction: self.direction() }
    }

    /// Sub-segment over the parameter range `[t0, t1]`.
    pub fn sub(&self, t0: f64, t1: f64) -> Segment3 {
        Segment3 { p0: self.point_at(t0), p1: self.point_at(t1) }
    }

    pub fn reversed(&self) -> Segment3 {
        Segment3 { p0: self.p1, p1: self.p0 }
    }
}

/// How endpoint distances are aggregated into a segment-to-plane distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentDistance {
    #[default]
    Max,
    Mean,
}

pub fn signed_distance(point: &Point3, plane: &Plane) -> f64 {
    plane.signed_distance(point)
}

/// Largest absolute endpoint distance to the plane.
pub fn segment_plane_distance(seg: &Segment3, plane: &Plane) -> f64 {
    segment_plane_distance_with(seg, plane, SegmentDistance::Max)
}

pub fn segment_plane_distance_with(seg: &Segment3, plane: &Plane, kind: SegmentDistance) -> f64 {
    let d0 = plane.signed_distance(&seg.p0).abs();
    let d1 = plane.signed_distance(&seg.p1).abs();
    match kind {
        SegmentDistance::Max => d0.max(d1),
        SegmentDistance::Mean => 0.5 * (d0 + d1),
    }
}

/// Largest endpoint distance to an infinite line.
pub fn segment_line_distance(seg: &Segment3, line: &Line3) -> f64 {
    line.distance(&seg.p0).max(line.distance(&seg.p1))
}

fn unoriented_angle_deg(a: &Vec3, b: &Vec3) -> f64 {
    let c = (a.dot(b) / (a.norm() * b.norm())).abs().min(1.0);
    // atan2 keeps precision near 0 where acos does not
    let s = a.cross(b).norm() / (a.norm() * b.norm());
    s.atan2(c).to_degrees()
}

/// Angle between the unoriented supporting directions, degrees in `[0, 90]`.
pub fn segment_angle(a: &Segment3, b: &Segment3) -> f64 {
    unoriented_angle_deg(&a.vector(), &b.vector())
}

/// Distance between the two infinite supporting lines.
pub fn line_line_distance(a: &Segment3, b: &Segment3) -> f64 {
    let da = a.direction();
    let db = b.direction();
    let cross = da.cross(db.as_ref());
    let sine = cross.norm();
    if sine < PARALLEL_SINE {
        return a.supporting_line().distance(&b.midpoint());
    }
    ((b.p0 - a.p0).dot(&cross) / sine).abs()
}

/// Weighted total-least-squares plane. Minimizes the weighted sum of squared
/// signed distances; the normal is the eigenvector of the smallest
/// eigenvalue of the weighted covariance.
pub fn fit_plane(points: &[(Point3, f64)]) -> Result<Plane, GeomError> {
    if points.len() < 3 {
        return Err(GeomError::DegenerateFit);
    }
    let total: f64 = points.iter().map(|(_, w)| *w).sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(GeomError::DegenerateFit);
    }
    let centroid = points.iter().fold(Vec3::zeros(), |acc, (p, w)| acc + p.coords * *w) / total;
    let mut cov = Matrix3::zeros();
    for (p, w) in points {
        let d = p.coords - centroid;
        cov += d * d.transpose() * (*w / total);
    }
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let (l0, l1, l2) =
        (eig.eigenvalues[order[0]], eig.eigenvalues[order[1]], eig.eigenvalues[order[2]]);
    if !(l2 > 0.0) || (l1 - l0) <= 1e-10 * l2 {
        return Err(GeomError::DegenerateFit);
    }
    let normal: Vec3 = eig.eigenvectors.column(order[0]).into_owned();
    Plane::new(normal, normal.dot(&centroid))
}

/// Carrier for [`project_segment`]: one plane or the line where two meet.
#[derive(Debug, Clone, Copy)]
pub enum Carrier<'a> {
    Plane(&'a Plane),
    Crease(&'a Plane, &'a Plane),
}

/// Orthogonal projection of both endpoints onto the carrier.
pub fn project_segment(seg: &Segment3, carrier: Carrier<'_>) -> Result<Segment3, GeomError> {
    match carrier {
        Carrier::Plane(p) => Ok(Segment3 { p0: p.project(&seg.p0), p1: p.project(&seg.p1) }),
        Carrier::Crease(a, b) => {
            let line = a.intersection(b)?;
            Ok(Segment3 { p0: line.project(&seg.p0), p1: line.project(&seg.p1) })
        }
    }
}

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    pub fn new(min: Point3, max: Point3) -> Self {
        Aabb { min, max }
    }

    pub fn empty() -> Self {
        Aabb {
            min: Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
            max: Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Point3>) -> Self {
        let mut b = Aabb::empty();
        for p in points {
            b.grow(p);
        }
        b
    }

    pub fn grow(&mut self, p: &Point3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn is_empty(&self) -> bool {
        (0..3).any(|i| self.min[i] > self.max[i])
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn volume(&self) -> f64 {
        let e = self.extent();
        e.x * e.y * e.z
    }

    /// Inflates every side by `fraction` of the largest extent.
    pub fn inflated(&self, fraction: f64) -> Self {
        let e = self.extent();
        let margin = fraction * e.x.max(e.y).max(e.z).max(1e-3);
        let m = Vec3::repeat(margin);
        Aabb { min: self.min - m, max: self.max + m }
    }

    pub fn contains(&self, p: &Point3, tol: f64) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] - tol && p[i] <= self.max[i] + tol)
    }

    pub fn overlaps(&self, other: &Aabb, tol: f64) -> bool {
        (0..3).all(|i| self.min[i] <= other.max[i] + tol && other.min[i] <= self.max[i] + tol)
    }
}
