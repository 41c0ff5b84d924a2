//! 2D geometry primitives for the robot simulator.

use std::ops::{Add, Mul, Sub};

/// A point or vector in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    #[inline]
    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// 2D cross product (z component of the 3D cross product).
    #[inline]
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn length(self) -> f64 {
        self.dot(self).sqrt()
    }

    #[inline]
    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).length()
    }

    /// Unit vector for a heading angle (radians, counterclockwise from +x).
    #[inline]
    pub fn from_heading(heading: f64) -> Vec2 {
        Vec2::new(heading.cos(), heading.sin())
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

/// A wall segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Vec2,
    pub b: Vec2,
}

impl Segment {
    pub const fn new(a: Vec2, b: Vec2) -> Self {
        Segment { a, b }
    }
}

/// Distance along a ray (origin, unit direction) to the first intersection
/// with `seg`, if any. Returns `None` when the ray misses or runs parallel.
pub fn ray_segment_distance(origin: Vec2, dir: Vec2, seg: Segment) -> Option<f64> {
    let v1 = origin - seg.a;
    let v2 = seg.b - seg.a;
    let denom = v2.cross(dir);
    if denom == 0.0 {
        return None; // parallel (collinear overlap treated as a miss)
    }
    let t = v2.cross(v1) / denom; // distance along the ray
    let u = dir.cross(v1) / denom; // parameter along the segment
    if t >= 0.0 && (0.0..=1.0).contains(&u) {
        Some(t)
    } else {
        None
    }
}

/// Distance along a ray to the nearest of `walls`, capped at `max_range`.
pub fn raycast(origin: Vec2, dir: Vec2, walls: &[Segment], max_range: f64) -> f64 {
    let mut best = max_range;
    for &w in walls {
        if let Some(t) = ray_segment_distance(origin, dir, w) {
            if t < best {
                best = t;
            }
        }
    }
    best
}

/// First hit along the motion segment from `origin` toward `dir` (unit) of
/// length `len` against any wall. Exact segment-vs-segment test, so corner
/// crossings cannot be slipped through.
pub fn first_wall_hit(origin: Vec2, dir: Vec2, len: f64, walls: &[Segment]) -> Option<f64> {
    let mut best: Option<f64> = None;
    for &w in walls {
        if let Some(t) = ray_segment_distance(origin, dir, w) {
            if t <= len && best.is_none_or(|b| t < b) {
                best = Some(t);
            }
        }
    }
    best
}

/// Even-odd point-in-polygon test. Vertices in order, implicit closing edge.
pub fn point_in_polygon(p: Vec2, vertices: &[Vec2]) -> bool {
    let mut inside = false;
    let n = vertices.len();
    let mut j = n - 1;
    for i in 0..n {
        let (vi, vj) = (vertices[i], vertices[j]);
        if (vi.y > p.y) != (vj.y > p.y) {
            let x_cross = vj.x + (p.y - vj.y) / (vi.y - vj.y) * (vi.x - vj.x);
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ray_hits_perpendicular_wall() {
        let wall = Segment::new(Vec2::new(5.0, -10.0), Vec2::new(5.0, 10.0));
        let d = ray_segment_distance(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), wall);
        assert_relative_eq!(d.unwrap(), 5.0);
    }

    #[test]
    fn ray_misses_behind() {
        let wall = Segment::new(Vec2::new(-5.0, -10.0), Vec2::new(-5.0, 10.0));
        assert!(ray_segment_distance(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), wall).is_none());
    }

    #[test]
    fn ray_parallel_is_a_miss() {
        let wall = Segment::new(Vec2::new(-5.0, 1.0), Vec2::new(5.0, 1.0));
        assert!(ray_segment_distance(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), wall).is_none());
    }

    #[test]
    fn raycast_takes_nearest() {
        let walls = [
            Segment::new(Vec2::new(8.0, -1.0), Vec2::new(8.0, 1.0)),
            Segment::new(Vec2::new(3.0, -1.0), Vec2::new(3.0, 1.0)),
        ];
        assert_relative_eq!(
            raycast(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), &walls, 100.0),
            3.0
        );
    }

    #[test]
    fn polygon_containment() {
        let square = [
            Vec2::new(0.0, 0.0),
            Vec2::new(10.0, 0.0),
            Vec2::new(10.0, 10.0),
            Vec2::new(0.0, 10.0),
        ];
        assert!(point_in_polygon(Vec2::new(5.0, 5.0), &square));
        assert!(!point_in_polygon(Vec2::new(15.0, 5.0), &square));
        assert!(!point_in_polygon(Vec2::new(-1.0, -1.0), &square));
    }
}
