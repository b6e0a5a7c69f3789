//! Closed planar object boundaries.
//!
//! A [`Profile`] stores a counterclockwise closed polyline (held open, closure
//! implied) together with a monotone parameter `theta` in `[0, 2pi)` per
//! vertex. Generated shapes keep their generator parameter; ingested polylines
//! get an arc-length-proportional parameter. All queries are pure, so profiles
//! can be shared freely across worker threads.

use crate::geom::{self, BBox, Vec2};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

mod ingest;
mod shapes;

pub use ingest::{load_profile, LoadedProfile, ProfileFormat};
pub use shapes::{generate, ShapeKind, ShapeSpec};

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("profile needs at least {min} distinct vertices, got {got}")]
    TooFewVertices { min: usize, got: usize },
    #[error("profile has zero perimeter")]
    ZeroPerimeter,
    #[error("profile polyline is self-intersecting")]
    SelfIntersecting,
    #[error("profile polyline is degenerate (zero enclosed area)")]
    DegenerateArea,
    #[error("curve is not closed (endpoint gap {gap})")]
    OpenCurve { gap: f64 },
    #[error("degenerate tangent at theta = {theta}")]
    DegenerateTangent { theta: f64 },
    #[error("invalid shape parameter: {0}")]
    InvalidShape(String),
    #[error("malformed {format} input: {detail}")]
    Malformed { format: &'static str, detail: String },
    #[error("i/o error reading profile: {0}")]
    Io(#[from] std::io::Error),
}

/// Closed counterclockwise boundary polyline with parametric queries.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Profile {
    vertices: Vec<Vec2>,
    /// Parameter per vertex, strictly increasing, `params[0] == 0`.
    params: Vec<f64>,
    /// Cumulative arc length, one entry per vertex plus the implied closure;
    /// `cumlen[n]` is the perimeter.
    cumlen: Vec<f64>,
    bbox: BBox,
    centroid: Vec2,
}

const MIN_VERTICES: usize = 8;

impl Profile {
    /// Builds a profile from raw boundary points. Consecutive duplicates are
    /// dropped, a duplicated closing point is stripped, orientation is
    /// normalized to counterclockwise and coarse inputs are subdivided up to
    /// the 8-vertex minimum (splitting segments preserves the geometry).
    /// The parameter becomes arc-length proportional.
    pub fn from_points(points: &[Vec2]) -> Result<Profile, ProfileError> {
        let mut verts = dedup_points(points);
        if verts.len() < 3 {
            return Err(ProfileError::TooFewVertices { min: 3, got: verts.len() });
        }
        if !geom::is_simple_closed(&verts) {
            return Err(ProfileError::SelfIntersecting);
        }
        let area = geom::signed_area(&verts);
        if area == 0.0 {
            return Err(ProfileError::DegenerateArea);
        }
        if area < 0.0 {
            verts.reverse();
        }
        while verts.len() < MIN_VERTICES {
            split_longest_segment(&mut verts);
        }
        let cumlen = cumulative_lengths(&verts);
        let perimeter = *cumlen.last().unwrap();
        if perimeter <= 0.0 {
            return Err(ProfileError::ZeroPerimeter);
        }
        let params = cumlen[..verts.len()].iter().map(|s| TAU * s / perimeter).collect();
        Self::assemble(verts, params, cumlen)
    }

    /// Builds a profile whose parameter is supplied by a generator.
    /// `params` must be strictly increasing in `[0, 2pi)` starting at 0.
    pub(crate) fn from_parametrized(
        vertices: Vec<Vec2>,
        params: Vec<f64>,
    ) -> Result<Profile, ProfileError> {
        assert_eq!(vertices.len(), params.len());
        if vertices.len() < MIN_VERTICES {
            return Err(ProfileError::TooFewVertices { min: MIN_VERTICES, got: vertices.len() });
        }
        for w in vertices.windows(2) {
            if w[0].dist(w[1]) == 0.0 {
                return Err(ProfileError::InvalidShape("coincident consecutive samples".into()));
            }
        }
        if geom::signed_area(&vertices) <= 0.0 {
            return Err(ProfileError::DegenerateArea);
        }
        if !geom::is_simple_closed(&vertices) {
            return Err(ProfileError::SelfIntersecting);
        }
        let cumlen = cumulative_lengths(&vertices);
        Self::assemble(vertices, params, cumlen)
    }

    fn assemble(
        vertices: Vec<Vec2>,
        params: Vec<f64>,
        cumlen: Vec<f64>,
    ) -> Result<Profile, ProfileError> {
        let bbox = BBox::from_points(&vertices).expect("nonempty");
        let centroid = geom::centroid(&vertices);
        Ok(Profile { vertices, params, cumlen, bbox, centroid })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    /// Cumulative arc length per vertex plus the closure entry.
    pub fn cumulative_arclength(&self) -> &[f64] {
        &self.cumlen
    }

    pub fn perimeter(&self) -> f64 {
        *self.cumlen.last().unwrap()
    }

    pub fn bbox(&self) -> BBox {
        self.bbox
    }

    pub fn centroid(&self) -> Vec2 {
        self.centroid
    }

    pub fn signed_area(&self) -> f64 {
        geom::signed_area(&self.vertices)
    }

    /// Largest pairwise vertex distance (the object length).
    pub fn max_extent(&self) -> f64 {
        let n = self.vertices.len();
        let mut best = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                best = best.max(self.vertices[i].dist(self.vertices[j]));
            }
        }
        best
    }

    /// Largest centroid-to-vertex distance; used as the torque scale.
    pub fn max_centroid_distance(&self) -> f64 {
        self.vertices
            .iter()
            .map(|v| v.dist(self.centroid))
            .fold(0.0, f64::max)
    }

    /// Segment index and local fraction for a wrapped parameter value.
    fn locate(&self, theta: f64) -> (usize, f64) {
        let t = wrap_angle(theta);
        // params is sorted; find the last index with params[i] <= t
        let i = match self.params.binary_search_by(|p| p.partial_cmp(&t).unwrap()) {
            Ok(i) => i,
            Err(ins) => ins.saturating_sub(1),
        };
        let lo = self.params[i];
        let hi = if i + 1 < self.params.len() { self.params[i + 1] } else { TAU };
        let span = hi - lo;
        let frac = if span > 0.0 { (t - lo) / span } else { 0.0 };
        (i, frac)
    }

    /// Boundary point at parameter `theta` (any real value, wrapped mod 2pi).
    pub fn point_at(&self, theta: f64) -> Vec2 {
        let (i, frac) = self.locate(theta);
        let a = self.vertices[i];
        let b = self.vertices[(i + 1) % self.vertices.len()];
        a.lerp(b, frac)
    }

    fn vertex_tangent(&self, i: usize) -> Result<Vec2, ProfileError> {
        let n = self.vertices.len();
        let prev = self.vertices[(i + n - 1) % n];
        let next = self.vertices[(i + 1) % n];
        (next - prev)
            .normalized()
            .ok_or(ProfileError::DegenerateTangent { theta: self.params[i] })
    }

    /// Unit tangent at parameter `theta`, estimated by central differences
    /// over adjacent vertices and interpolated along the segment.
    pub fn tangent_at(&self, theta: f64) -> Result<Vec2, ProfileError> {
        let (i, frac) = self.locate(theta);
        let ta = self.vertex_tangent(i)?;
        let tb = self.vertex_tangent((i + 1) % self.vertices.len())?;
        ta.lerp(tb, frac)
            .normalized()
            .ok_or(ProfileError::DegenerateTangent { theta })
    }

    /// Unit normal pointing into the enclosed region. With counterclockwise
    /// orientation this is the tangent turned a quarter turn toward the
    /// interior.
    pub fn inward_normal_at(&self, theta: f64) -> Result<Vec2, ProfileError> {
        Ok(self.tangent_at(theta)?.perp())
    }

    /// Arc length from the parameter origin to `point_at(theta)`.
    pub fn arclength_at(&self, theta: f64) -> f64 {
        let (i, frac) = self.locate(theta);
        let seg = self.cumlen[i + 1] - self.cumlen[i];
        self.cumlen[i] + frac * seg
    }

    /// Parameter of the boundary point at arc length `s` (wrapped mod the
    /// perimeter). Inverse of [`Profile::arclength_at`] up to discretization.
    pub fn theta_at_arclength(&self, s: f64) -> f64 {
        let total = self.perimeter();
        let mut s = s % total;
        if s < 0.0 {
            s += total;
        }
        let i = match self.cumlen.binary_search_by(|c| c.partial_cmp(&s).unwrap()) {
            Ok(i) => i.min(self.vertices.len() - 1),
            Err(ins) => ins.saturating_sub(1).min(self.vertices.len() - 1),
        };
        let seg = self.cumlen[i + 1] - self.cumlen[i];
        let frac = if seg > 0.0 { (s - self.cumlen[i]) / seg } else { 0.0 };
        let lo = self.params[i];
        let hi = if i + 1 < self.params.len() { self.params[i + 1] } else { TAU };
        lo + frac * (hi - lo)
    }
}

/// Wraps any real angle into `[0, 2pi)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta % TAU;
    if t < 0.0 {
        t += TAU;
    }
    // guard against -1e-17 % TAU landing exactly on TAU
    if t >= TAU {
        t -= TAU;
    }
    t
}

fn dedup_points(points: &[Vec2]) -> Vec<Vec2> {
    let bb = match BBox::from_points(points) {
        Some(b) => b,
        None => return vec![],
    };
    let tol = 1e-12 * bb.diagonal().max(1e-300);
    let mut out: Vec<Vec2> = Vec::with_capacity(points.len());
    for &p in points {
        if out.last().map_or(true, |q| q.dist(p) > tol) {
            out.push(p);
        }
    }
    // stored open: strip a duplicated closing vertex
    while out.len() > 1 && out[0].dist(*out.last().unwrap()) <= tol {
        out.pop();
    }
    out
}

fn split_longest_segment(verts: &mut Vec<Vec2>) {
    let n = verts.len();
    let mut best = 0;
    let mut best_len = -1.0;
    for i in 0..n {
        let len = verts[i].dist(verts[(i + 1) % n]);
        if len > best_len {
            best_len = len;
            best = i;
        }
    }
    let mid = verts[best].lerp(verts[(best + 1) % n], 0.5);
    verts.insert(best + 1, mid);
}

fn cumulative_lengths(verts: &[Vec2]) -> Vec<f64> {
    let n = verts.len();
    let mut cum = Vec::with_capacity(n + 1);
    cum.push(0.0);
    for i in 0..n {
        let seg = verts[i].dist(verts[(i + 1) % n]);
        cum.push(cum[i] + seg);
    }
    cum
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn square(side: f64) -> Vec<Vec2> {
        let s = side / 2.0;
        vec![
            Vec2::new(s, -s),
            Vec2::new(s, s),
            Vec2::new(-s, s),
            Vec2::new(-s, -s),
        ]
    }

    #[test]
    fn square_from_corners_has_exact_perimeter() {
        let p = Profile::from_points(&square(4.0)).unwrap();
        assert_eq!(p.perimeter(), 16.0);
        assert!(p.vertex_count() >= 8);
        // perimeter equals the sum of segment lengths exactly
        let total: f64 = {
            let v = p.vertices();
            (0..v.len()).map(|i| v[i].dist(v[(i + 1) % v.len()])).sum()
        };
        assert_eq!(p.perimeter(), total);
    }

    #[test]
    fn clockwise_input_is_normalized() {
        let mut cw = square(2.0);
        cw.reverse();
        let p = Profile::from_points(&cw).unwrap();
        assert!(p.signed_area() > 0.0);
    }

    #[test]
    fn figure_eight_rejected() {
        let pts = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        ];
        assert!(matches!(
            Profile::from_points(&pts),
            Err(ProfileError::SelfIntersecting)
        ));
    }

    #[test]
    fn square_inward_normal_on_right_edge() {
        let p = Profile::from_points(&square(2.0)).unwrap();
        // locate the vertex at (1, 0): the midpoint of the right edge
        let theta = p
            .vertices()
            .iter()
            .zip(&p.params)
            .find(|(v, _)| v.dist(Vec2::new(1.0, 0.0)) < 1e-12)
            .map(|(_, t)| *t)
            .expect("midpoint vertex inserted by subdivision");
        let n = p.inward_normal_at(theta).unwrap();
        assert_relative_eq!(n.x, -1.0, epsilon = 1e-12);
        assert_relative_eq!(n.y, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn arclength_roundtrip() {
        let p = Profile::from_points(&square(2.0)).unwrap();
        for k in 0..32 {
            let theta = TAU * k as f64 / 32.0;
            let s = p.arclength_at(theta);
            let back = p.theta_at_arclength(s);
            assert_relative_eq!(back, theta, epsilon = 1e-9);
        }
        assert_relative_eq!(p.arclength_at(0.0), 0.0);
    }

    #[test]
    fn wrap_angle_stays_in_range() {
        for t in [-13.0, -TAU, -1e-17, 0.0, 1.0, TAU, 100.0] {
            let w = wrap_angle(t);
            assert!((0.0..TAU).contains(&w), "wrap({t}) = {w}");
        }
    }
}
