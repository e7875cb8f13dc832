//! Convex regions, piecewise-linear trajectories and the segment-level
//! inside/outside predicates.

use serde::{Deserialize, Serialize};

use crate::Scalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("region {0:?} is degenerate (hull has zero area)")]
    DegenerateRegion(String),
    #[error("region {name:?} is invalid: {reason}")]
    InvalidRegion { name: String, reason: String },
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
    #[error("time {t} is outside the trajectory horizon [{start}, {end}]")]
    OutOfHorizon { t: f64, start: f64, end: f64 },
}

/// Convex polytope `{p : A p <= h}`.
///
/// Rows of `A` are stored as given (not normalized); signed distances divide
/// by the row norm at evaluation time.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexRegion<T> {
    pub name: String,
    pub a: Vec<Vec<T>>,
    pub h: Vec<T>,
}

fn dot<T: Scalar>(u: &[T], v: &[T]) -> T {
    u.iter()
        .zip(v)
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

fn cross2<T: Scalar>(o: &[T], a: &[T], b: &[T]) -> T {
    (a[0].clone() - o[0].clone()) * (b[1].clone() - o[1].clone())
        - (a[1].clone() - o[1].clone()) * (b[0].clone() - o[0].clone())
}

/// `value >= eps * norm` where `norm_sq = norm^2`, evaluated without a square
/// root so exact scalars stay exact. Requires `eps >= 0`.
fn at_least_scaled<T: Scalar>(value: &T, eps: &T, norm_sq: &T) -> bool {
    if *value < T::zero() {
        return false;
    }
    value.clone() * value.clone() >= eps.clone() * eps.clone() * norm_sq.clone()
}

impl<T: Scalar> ConvexRegion<T> {
    /// Build from an explicit half-space description, checking that the
    /// polytope is a bounded planar polygon with nonempty interior.
    pub fn from_halfspaces(
        name: impl Into<String>,
        a: Vec<Vec<T>>,
        h: Vec<T>,
    ) -> Result<Self, GeometryError> {
        let name = name.into();
        let invalid = |name: &str, reason: &str| GeometryError::InvalidRegion {
            name: name.to_string(),
            reason: reason.to_string(),
        };
        if a.len() != h.len() {
            return Err(invalid(&name, "A and h have different row counts"));
        }
        if a.iter().any(|row| row.len() != 2) {
            return Err(invalid(&name, "only planar (d = 2) regions are supported"));
        }
        if a.len() < 3 {
            return Err(invalid(&name, "need at least 3 half-spaces"));
        }
        if a.iter().any(|row| row.iter().all(|x| x.is_zero())) {
            return Err(invalid(&name, "zero row in A"));
        }
        let region = Self { name, a, h };
        if !region.is_bounded() {
            return Err(invalid(&region.name, "polytope is unbounded"));
        }
        if region.vertices().len() < 3 {
            return Err(GeometryError::DegenerateRegion(region.name));
        }
        Ok(region)
    }

    /// Convex hull of `vertices` in half-space form, rows ordered along the
    /// counter-clockwise boundary starting from the lowest-leftmost vertex.
    pub fn from_vertices(name: impl Into<String>, vertices: &[Vec<T>]) -> Result<Self, GeometryError> {
        let name = name.into();
        if vertices.iter().any(|v| v.len() != 2) {
            return Err(GeometryError::InvalidRegion {
                name,
                reason: "only planar (d = 2) vertices are supported".into(),
            });
        }
        let hull = convex_hull(vertices);
        if hull.len() < 3 {
            return Err(GeometryError::DegenerateRegion(name));
        }
        let mut a = Vec::with_capacity(hull.len());
        let mut h = Vec::with_capacity(hull.len());
        for k in 0..hull.len() {
            let p = &hull[k];
            let q = &hull[(k + 1) % hull.len()];
            let dx = q[0].clone() - p[0].clone();
            let dy = q[1].clone() - p[1].clone();
            let normal = vec![dy, -dx];
            h.push(dot(&normal, p));
            a.push(normal);
        }
        Ok(Self { name, a, h })
    }

    pub fn num_edges(&self) -> usize {
        self.a.len()
    }

    pub fn dim(&self) -> usize {
        self.a.first().map_or(0, |r| r.len())
    }

    /// `A p <= h`.
    pub fn contains(&self, p: &[T]) -> bool {
        self.a.iter().zip(&self.h).all(|(row, h)| dot(row, p) <= *h)
    }

    fn row_norm_sq(&self, j: usize) -> T {
        dot(&self.a[j], &self.a[j])
    }

    /// `(h^j - A^j p) / ||A^j|| >= eps`.
    pub fn inside_edge(&self, j: usize, p: &[T], eps: &T) -> bool {
        let slack = self.h[j].clone() - dot(&self.a[j], p);
        at_least_scaled(&slack, eps, &self.row_norm_sq(j))
    }

    /// `(A^j p - h^j) / ||A^j|| >= eps`.
    pub fn outside_edge(&self, j: usize, p: &[T], eps: &T) -> bool {
        let excess = dot(&self.a[j], p) - self.h[j].clone();
        at_least_scaled(&excess, eps, &self.row_norm_sq(j))
    }

    fn is_bounded(&self) -> bool {
        // Unbounded iff some nonzero u has A u <= 0; in the plane such a
        // cone always contains a direction perpendicular to one of the rows.
        for row in &self.a {
            for sign in [T::one(), -T::one()] {
                let u = vec![-row[1].clone() * sign.clone(), row[0].clone() * sign.clone()];
                if self.a.iter().all(|r| dot(r, &u) <= T::zero()) {
                    return false;
                }
            }
        }
        true
    }

    /// Vertices of the polygon (pairwise row intersections that satisfy all
    /// constraints), as a counter-clockwise hull.
    pub fn vertices(&self) -> Vec<Vec<T>> {
        let mut pts = Vec::new();
        for i in 0..self.a.len() {
            for j in (i + 1)..self.a.len() {
                let (a1, b1, c1) = (&self.a[i][0], &self.a[i][1], &self.h[i]);
                let (a2, b2, c2) = (&self.a[j][0], &self.a[j][1], &self.h[j]);
                let det = a1.clone() * b2.clone() - a2.clone() * b1.clone();
                if det.is_zero() {
                    continue;
                }
                let x = (c1.clone() * b2.clone() - c2.clone() * b1.clone()) / det.clone();
                let y = (a1.clone() * c2.clone() - a2.clone() * c1.clone()) / det;
                let p = vec![x, y];
                if self.contains_approx(&p) {
                    pts.push(p);
                }
            }
        }
        convex_hull(&pts)
    }

    fn contains_approx(&self, p: &[T]) -> bool {
        // Exact for rationals; a relative slack absorbs float round-off.
        let tol = T::from_f64_lossy(1e-9);
        self.a.iter().zip(&self.h).all(|(row, h)| {
            let scale = T::one() + h.abs();
            dot(row, p) <= h.clone() + tol.clone() * scale
        })
    }

    pub fn convert<U: Scalar>(&self) -> ConvexRegion<U> {
        ConvexRegion {
            name: self.name.clone(),
            a: self
                .a
                .iter()
                .map(|r| r.iter().map(|x| U::from_f64_lossy(x.to_f64_lossy())).collect())
                .collect(),
            h: self.h.iter().map(|x| U::from_f64_lossy(x.to_f64_lossy())).collect(),
        }
    }
}

/// Andrew's monotone chain; returns a strictly convex CCW hull.
fn convex_hull<T: Scalar>(points: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut pts: Vec<Vec<T>> = points.to_vec();
    pts.sort_by(|p, q| {
        p[0].partial_cmp(&q[0])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(p[1].partial_cmp(&q[1]).unwrap_or(std::cmp::Ordering::Equal))
    });
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Vec<T>> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross2(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= T::zero() {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Vec<T>> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross2(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= T::zero() {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Tri-state classification of a segment against a region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SegmentLabel {
    Inside,
    Outside,
    Neither,
}

/// Both endpoints lie at least `eps` inside every edge.
pub fn segment_inside<T: Scalar>(region: &ConvexRegion<T>, p0: &[T], p1: &[T], eps: &T) -> bool {
    (0..region.num_edges()).all(|j| region.inside_edge(j, p0, eps) && region.inside_edge(j, p1, eps))
}

/// Some single edge has both endpoints at least `eps` beyond it.
pub fn segment_outside<T: Scalar>(region: &ConvexRegion<T>, p0: &[T], p1: &[T], eps: &T) -> bool {
    (0..region.num_edges()).any(|j| region.outside_edge(j, p0, eps) && region.outside_edge(j, p1, eps))
}

pub fn segment_label<T: Scalar>(region: &ConvexRegion<T>, p0: &[T], p1: &[T], eps: &T) -> SegmentLabel {
    if segment_inside(region, p0, p1, eps) {
        SegmentLabel::Inside
    } else if segment_outside(region, p0, p1, eps) {
        SegmentLabel::Outside
    } else {
        SegmentLabel::Neither
    }
}

/// Timestamped point `<t, p>`.
#[derive(Debug, Clone, PartialEq)]
pub struct Waypoint<T> {
    pub t: T,
    pub p: Vec<T>,
}

impl<T: Scalar> Waypoint<T> {
    pub fn new(t: T, p: Vec<T>) -> Self {
        Self { t, p }
    }
}

/// Ordered waypoints joined by straight segments; segment `i` runs from
/// waypoint `i` to waypoint `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PwlTrajectory<T> {
    waypoints: Vec<Waypoint<T>>,
}

impl<T: Scalar> PwlTrajectory<T> {
    pub fn new(waypoints: Vec<Waypoint<T>>) -> Result<Self, GeometryError> {
        if waypoints.len() < 2 {
            return Err(GeometryError::InvalidTrajectory(format!(
                "need at least 2 waypoints, got {}",
                waypoints.len()
            )));
        }
        let d = waypoints[0].p.len();
        if d == 0 || waypoints.iter().any(|w| w.p.len() != d) {
            return Err(GeometryError::InvalidTrajectory(
                "waypoints must share a nonzero dimension".into(),
            ));
        }
        if waypoints[0].t < T::zero() {
            return Err(GeometryError::InvalidTrajectory("negative timestamp".into()));
        }
        if let Some(k) = (1..waypoints.len()).find(|&k| waypoints[k].t < waypoints[k - 1].t) {
            return Err(GeometryError::InvalidTrajectory(format!(
                "timestamps decrease at waypoint {k}"
            )));
        }
        Ok(Self { waypoints })
    }

    /// Convenience constructor from `(t, p)` pairs.
    pub fn from_pairs(pairs: &[(T, Vec<T>)]) -> Result<Self, GeometryError> {
        Self::new(pairs.iter().map(|(t, p)| Waypoint::new(t.clone(), p.clone())).collect())
    }

    pub fn waypoints(&self) -> &[Waypoint<T>] {
        &self.waypoints
    }

    /// Number of waypoints `K`.
    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn num_segments(&self) -> usize {
        self.waypoints.len() - 1
    }

    pub fn t(&self, i: usize) -> &T {
        &self.waypoints[i].t
    }

    pub fn p(&self, i: usize) -> &[T] {
        &self.waypoints[i].p
    }

    /// Duration of segment `i`.
    pub fn duration(&self, i: usize) -> T {
        self.waypoints[i + 1].t.clone() - self.waypoints[i].t.clone()
    }

    pub fn start_time(&self) -> &T {
        &self.waypoints[0].t
    }

    pub fn end_time(&self) -> &T {
        &self.waypoints[self.waypoints.len() - 1].t
    }

    /// The same motion started `tau` earlier: the part after
    /// `start_time + tau`, re-timed to begin at zero. `None` when fewer than
    /// two waypoints would remain.
    pub fn advanced(&self, tau: &T) -> Option<Self> {
        let cut = self.start_time().clone() + tau.clone();
        if tau.is_negative() || cut >= *self.end_time() {
            return None;
        }
        let first = self.eval_at(&cut).ok()?;
        let mut wps = vec![Waypoint::new(T::zero(), first)];
        wps.extend(
            self.waypoints
                .iter()
                .filter(|w| w.t > cut)
                .map(|w| Waypoint::new(w.t.clone() - cut.clone(), w.p.clone())),
        );
        Self::new(wps).ok()
    }

    /// Linear interpolation at time `t`.
    pub fn eval_at(&self, t: &T) -> Result<Vec<T>, GeometryError> {
        if t < self.start_time() || t > self.end_time() {
            return Err(GeometryError::OutOfHorizon {
                t: t.to_f64_lossy(),
                start: self.start_time().to_f64_lossy(),
                end: self.end_time().to_f64_lossy(),
            });
        }
        // First segment whose end reaches t; shared timestamps resolve to the
        // earlier segment's end point, which equals the waypoint value.
        let i = (0..self.num_segments())
            .find(|&i| *t <= self.waypoints[i + 1].t)
            .unwrap_or(self.num_segments() - 1);
        let (w0, w1) = (&self.waypoints[i], &self.waypoints[i + 1]);
        let dt = w1.t.clone() - w0.t.clone();
        if dt.is_zero() {
            return Ok(w0.p.clone());
        }
        if *t == w1.t {
            return Ok(w1.p.clone());
        }
        let s = (t.clone() - w0.t.clone()) / dt;
        Ok(w0
            .p
            .iter()
            .zip(&w1.p)
            .map(|(a, b)| a.clone() + (b.clone() - a.clone()) * s.clone())
            .collect())
    }

    /// Label of every segment against `region`.
    pub fn labels(&self, region: &ConvexRegion<T>, eps: &T) -> Vec<SegmentLabel> {
        (0..self.num_segments())
            .map(|i| segment_label(region, self.p(i), self.p(i + 1), eps))
            .collect()
    }

    /// Total Euclidean length, computed in `f64`.
    pub fn path_length(&self) -> f64 {
        self.waypoints
            .windows(2)
            .map(|w| {
                w[0].p
                    .iter()
                    .zip(&w[1].p)
                    .map(|(a, b)| (b.to_f64_lossy() - a.to_f64_lossy()).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .sum()
    }

    pub fn convert<U: Scalar>(&self) -> PwlTrajectory<U> {
        PwlTrajectory {
            waypoints: self
                .waypoints
                .iter()
                .map(|w| Waypoint {
                    t: U::from_f64_lossy(w.t.to_f64_lossy()),
                    p: w.p.iter().map(|x| U::from_f64_lossy(x.to_f64_lossy())).collect(),
                })
                .collect(),
        }
    }
}

/// Axis-aligned workspace box, planning horizon and spatial margin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Workspace {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub horizon: f64,
    pub epsilon: f64,
}

impl Workspace {
    pub const DEFAULT_EPSILON: f64 = 0.1;

    pub fn new(lower: Vec<f64>, upper: Vec<f64>, horizon: f64, epsilon: f64) -> Result<Self, GeometryError> {
        let bad = |m: &str| GeometryError::InvalidRegion {
            name: "workspace".into(),
            reason: m.into(),
        };
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(bad("bound dimensions differ"));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u) || !l.is_finite() || !u.is_finite()) {
            return Err(bad("need finite lower < upper on every axis"));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(bad("horizon must be positive"));
        }
        if !(epsilon >= 0.0) {
            return Err(bad("epsilon must be nonnegative"));
        }
        Ok(Self {
            lower,
            upper,
            horizon,
            epsilon,
        })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Euclidean length of the box diagonal.
    pub fn diagonal(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| (u - l).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn unit_square() -> ConvexRegion<f64> {
        ConvexRegion::from_vertices(
            "sq",
            &[vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]],
        )
        .unwrap()
    }

    #[test]
    fn eval_at_examples() {
        let tr = PwlTrajectory::from_pairs(&[(0.0, vec![0.0, 0.0]), (2.0, vec![2.0, 0.0])]).unwrap();
        assert_eq!(tr.eval_at(&1.0).unwrap(), vec![1.0, 0.0]);
        assert_eq!(tr.eval_at(&0.0).unwrap(), vec![0.0, 0.0]);
        let tr = PwlTrajectory::from_pairs(&[(0.0, vec![0.0, 0.0]), (4.0, vec![2.0, 6.0])]).unwrap();
        assert_eq!(tr.eval_at(&3.0).unwrap(), vec![1.5, 4.5]);
        assert!(matches!(tr.eval_at(&4.5), Err(GeometryError::OutOfHorizon { .. })));
    }

    #[test]
    fn advanced_trajectory_drops_the_prefix() {
        let tr = PwlTrajectory::from_pairs(&[(0.0, vec![0.0, 0.0]), (2.0, vec![2.0, 0.0]), (4.0, vec![2.0, 2.0])])
            .unwrap();
        let want = PwlTrajectory::from_pairs(&[(0.0, vec![1.0, 0.0]), (1.0, vec![2.0, 0.0]), (3.0, vec![2.0, 2.0])])
            .unwrap();
        assert_eq!(tr.advanced(&1.0).unwrap(), want);
        assert_eq!(tr.advanced(&2.0).unwrap().len(), 2);
        assert!(tr.advanced(&4.0).is_none());
        assert!(tr.advanced(&-1.0).is_none());
    }

    #[test]
    fn eval_at_zero_duration_segment() {
        let tr = PwlTrajectory::from_pairs(&[
            (0.0, vec![0.0, 0.0]),
            (1.0, vec![1.0, 0.0]),
            (1.0, vec![5.0, 5.0]),
            (2.0, vec![5.0, 6.0]),
        ])
        .unwrap();
        assert_eq!(tr.eval_at(&1.0).unwrap(), vec![1.0, 0.0]);
        assert_eq!(tr.eval_at(&1.5).unwrap(), vec![5.0, 5.5]);
    }

    #[test]
    fn trajectory_validation() {
        assert!(PwlTrajectory::from_pairs(&[(0.0, vec![0.0])]).is_err());
        assert!(PwlTrajectory::from_pairs(&[(1.0, vec![0.0]), (0.5, vec![0.0])]).is_err());
        assert!(PwlTrajectory::from_pairs(&[(0.0, vec![0.0]), (1.0, vec![0.0, 1.0])]).is_err());
    }

    #[test]
    fn inside_examples() {
        let sq = unit_square();
        assert!(segment_inside(&sq, &[0.3, 0.3], &[0.7, 0.7], &0.1));
        assert!(!segment_inside(&sq, &[0.05, 0.5], &[0.5, 0.5], &0.1));
        assert!(!segment_inside(&sq, &[0.2, 0.5], &[1.4, 0.5], &0.1));
    }

    #[test]
    fn outside_examples() {
        let sq = unit_square();
        assert!(segment_outside(&sq, &[2.0, 0.0], &[2.0, 1.0], &0.1));
        assert!(!segment_outside(&sq, &[-1.0, 0.5], &[2.0, 0.5], &0.1));
        // Left edge is x >= 0: (-1,-1) is 1 beyond, (-0.2, 2) is 0.2 beyond.
        // Bottom edge: (-0.2, 2) is inside. Top edge: (-1,-1) is inside.
        assert!(segment_outside(&sq, &[-1.0, -1.0], &[-0.2, 2.0], &0.1));
        assert!(!segment_outside(&sq, &[-1.0, -1.0], &[-0.05, 2.0], &0.1));
    }

    #[test]
    fn labels_are_tri_state() {
        let sq = unit_square();
        assert_eq!(segment_label(&sq, &[0.3, 0.3], &[0.7, 0.7], &0.1), SegmentLabel::Inside);
        assert_eq!(segment_label(&sq, &[-1.0, 0.5], &[2.0, 0.5], &0.1), SegmentLabel::Neither);
        assert_eq!(segment_label(&sq, &[2.0, 0.0], &[2.0, 1.0], &0.1), SegmentLabel::Outside);
    }

    #[test]
    fn region_from_vertices_examples() {
        let sq = unit_square();
        assert_eq!(sq.num_edges(), 4);
        let tri = ConvexRegion::from_vertices("t", &[vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 2.0]]).unwrap();
        assert_eq!(tri.num_edges(), 3);
        assert!(tri.contains(&[0.5, 0.5]));
        assert!(!tri.contains(&[2.0, 2.0]));
        assert_eq!(
            ConvexRegion::from_vertices("c", &[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]),
            Err(GeometryError::DegenerateRegion("c".into()))
        );
    }

    #[test]
    fn hull_drops_interior_and_collinear_points() {
        let r = ConvexRegion::from_vertices(
            "r",
            &[vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0], vec![2.0, 2.0], vec![1.0, 1.0], vec![0.0, 2.0]],
        )
        .unwrap();
        assert_eq!(r.num_edges(), 4);
    }

    #[test]
    fn halfspace_validation() {
        let a = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]];
        let h = vec![1.0, 0.0, 1.0, 0.0];
        let r = ConvexRegion::from_halfspaces("sq", a.clone(), h).unwrap();
        assert_eq!(r.vertices().len(), 4);
        // Missing the bottom edge: unbounded strip.
        assert!(ConvexRegion::from_halfspaces("s", a[..3].to_vec(), vec![1.0, 0.0, 1.0]).is_err());
        // Empty interior.
        assert!(ConvexRegion::from_halfspaces("e", a.clone(), vec![1.0, -1.0, 1.0, 0.0]).is_err());
        assert!(ConvexRegion::from_halfspaces("z", vec![vec![0.0, 0.0]; 3], vec![1.0; 3]).is_err());
    }

    #[test]
    fn exact_scalars_agree_with_floats() {
        let sq: ConvexRegion<Rational> = unit_square().convert();
        let q = |x: f64| Rational::from_f64_lossy(x);
        let eps = q(0.1);
        assert!(segment_inside(&sq, &[q(0.1), q(0.5)], &[q(0.5), q(0.5)], &eps));
        assert!(!segment_inside(&sq, &[q(0.05), q(0.5)], &[q(0.5), q(0.5)], &eps));
    }

    #[test]
    fn workspace_checks() {
        assert!(Workspace::new(vec![0.0, 0.0], vec![1.0, 1.0], 10.0, 0.1).is_ok());
        assert!(Workspace::new(vec![0.0, 0.0], vec![0.0, 1.0], 10.0, 0.1).is_err());
        assert!(Workspace::new(vec![0.0, 0.0], vec![1.0, 1.0], 0.0, 0.1).is_err());
        let w = Workspace::new(vec![0.0, 0.0], vec![3.0, 4.0], 1.0, 0.0).unwrap();
        assert_eq!(w.diagonal(), 5.0);
    }
}
