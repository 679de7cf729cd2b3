//! Planar geometry primitives shared by the collision and occlusion code.

use std::ops::{Add, Mul, Sub};

use crate::Real;

/// A point (or displacement) in the table plane, in meters.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point<R> {
    pub x: R,
    pub y: R,
}

impl<R: Real> Point<R> {
    pub fn new(x: R, y: R) -> Self {
        Point { x, y }
    }

    pub fn dot(self, other: Self) -> R {
        self.x * other.x + self.y * other.y
    }

    pub fn norm2(self) -> R {
        self.dot(self)
    }

    pub fn norm(self) -> R {
        self.norm2().sqrt()
    }

    pub fn dist(self, other: Self) -> R {
        (self - other).norm()
    }

    pub fn dist2(self, other: Self) -> R {
        (self - other).norm2()
    }

    /// Linear interpolation `self + t * (other - self)`.
    pub fn lerp(self, other: Self, t: R) -> Self {
        self + (other - self) * t
    }
}

impl<R: Real> Add for Point<R> {
    type Output = Point<R>;
    fn add(self, rhs: Self) -> Self {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<R: Real> Sub for Point<R> {
    type Output = Point<R>;
    fn sub(self, rhs: Self) -> Self {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<R: Real> Mul<R> for Point<R> {
    type Output = Point<R>;
    fn mul(self, s: R) -> Self {
        Point::new(self.x * s, self.y * s)
    }
}

/// A disc footprint: center plus radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Disc<R> {
    pub center: Point<R>,
    pub radius: R,
}

impl<R: Real> Disc<R> {
    pub fn new(center: Point<R>, radius: R) -> Self {
        Disc { center, radius }
    }

    pub fn contains(&self, p: Point<R>) -> bool {
        p.dist2(self.center) <= self.radius * self.radius
    }
}

/// Axis-aligned rectangle, `min` inclusive to `max` inclusive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect<R> {
    pub min: Point<R>,
    pub max: Point<R>,
}

impl<R: Real> Rect<R> {
    pub fn new(min: Point<R>, max: Point<R>) -> Self {
        Rect { min, max }
    }

    /// Rectangle anchored at the origin with the given extents.
    pub fn from_size(width: R, depth: R) -> Self {
        Rect::new(Point::new(R::zero(), R::zero()), Point::new(width, depth))
    }

    pub fn width(&self) -> R {
        self.max.x - self.min.x
    }

    pub fn depth(&self) -> R {
        self.max.y - self.min.y
    }

    pub fn contains(&self, p: Point<R>) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// True when the whole disc lies inside, with `tol` slack at the border.
    pub fn contains_disc(&self, d: &Disc<R>, tol: R) -> bool {
        d.center.x - d.radius >= self.min.x - tol
            && d.center.x + d.radius <= self.max.x + tol
            && d.center.y - d.radius >= self.min.y - tol
            && d.center.y + d.radius <= self.max.y + tol
    }
}

/// Euclidean distance from `p` to the segment `ab`; collapses to point
/// distance when `a == b`.
pub fn dist_point_segment<R: Real>(p: Point<R>, a: Point<R>, b: Point<R>) -> R {
    let ab = b - a;
    let len2 = ab.norm2();
    if len2 == R::zero() {
        return p.dist(a);
    }
    let t = (p - a).dot(ab) / len2;
    let t = t.max(R::zero()).min(R::one());
    p.dist(a + ab * t)
}

/// Bearing of `to` as seen from `from`, in degrees in `[0, 360)`.
pub fn bearing_deg<R: Real>(from: Point<R>, to: Point<R>) -> f64 {
    let d = to - from;
    let deg = d.y.as_f64().atan2(d.x.as_f64()).to_degrees();
    if deg < 0.0 {
        deg + 360.0
    } else {
        deg
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn point_to_segment_foot_inside() {
        let d = dist_point_segment(
            Point::new(5.0, 5.0),
            Point::new(0.0, 0.0),
            Point::new(10.0, 0.0),
        );
        assert_relative_eq!(d, 5.0);
    }

    #[test]
    fn point_to_segment_beyond_endpoint() {
        let d = dist_point_segment(
            Point::new(12.0, 0.0),
            Point::new(0.0, 0.0),
            Point::new(10.0, 0.0),
        );
        assert_relative_eq!(d, 2.0);
    }

    #[test]
    fn point_to_segment_degenerate() {
        let a = Point::new(0.0, 0.0);
        let d = dist_point_segment(Point::new(3.0, 4.0), a, a);
        assert_relative_eq!(d, 5.0);
    }

    #[test]
    fn bearing_quadrants() {
        let o = Point::new(0.0f64, 0.0);
        assert_relative_eq!(bearing_deg(o, Point::new(1.0, 0.0)), 0.0);
        assert_relative_eq!(bearing_deg(o, Point::new(0.0, 2.0)), 90.0);
        assert_relative_eq!(bearing_deg(o, Point::new(-3.0, 0.0)), 180.0);
        assert_relative_eq!(bearing_deg(o, Point::new(0.0, -0.5)), 270.0);
    }

    #[test]
    fn generic_scalar_agrees_across_widths() {
        let d32 = dist_point_segment(
            Point::new(5.0f32, 5.0),
            Point::new(0.0, 0.0),
            Point::new(10.0, 0.0),
        );
        assert!((d32 - 5.0).abs() < 1e-6);
    }
}
