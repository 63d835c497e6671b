//! Target sets and constraint sets, with the geometric oracles the time
//! functions and the solver need.

use crate::error::{check_dim, GeomError, Result};
use crate::linalg::{self, Point};
use crate::polytope;

/// One of the sets a ball has to enclose or meet.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetSet {
    /// A finite set of points.
    PointCloud { points: Vec<Point> },
    /// Closed Euclidean ball `B(center; radius)`.
    Ball { center: Point, radius: f64 },
    /// Convex hull of the listed vertices.
    VPolytope { vertices: Vec<Point> },
    /// `{x : <normal, x> <= offset}`.
    Halfspace { normal: Point, offset: f64 },
}

/// Value of a support function, which is infinite along most directions
/// for unbounded sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    Finite(f64),
    Infinite,
}

impl Support {
    pub fn finite(self) -> Option<f64> {
        match self {
            Support::Finite(v) => Some(v),
            Support::Infinite => None,
        }
    }
}

fn check_points(points: &[Point], what: &str) -> Result<usize> {
    let d = points
        .first()
        .ok_or_else(|| GeomError::InvalidSet(format!("{what} must be non-empty")))?
        .len();
    if d == 0 {
        return Err(GeomError::InvalidSet(format!("{what} has zero-dimensional points")));
    }
    for p in points {
        check_dim(d, p.len())?;
        if p.iter().any(|v| !v.is_finite()) {
            return Err(GeomError::InvalidSet(format!("{what} has non-finite coordinates")));
        }
    }
    Ok(d)
}

fn check_radius(radius: f64) -> Result<()> {
    if radius >= 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(GeomError::InvalidSet(format!("radius must be finite and non-negative, got {radius}")))
    }
}

impl TargetSet {
    pub fn points(points: Vec<Point>) -> Result<Self> {
        check_points(&points, "point cloud")?;
        Ok(TargetSet::PointCloud { points })
    }

    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        check_points(std::slice::from_ref(&center), "ball center")?;
        check_radius(radius)?;
        Ok(TargetSet::Ball { center, radius })
    }

    pub fn vpolytope(vertices: Vec<Point>) -> Result<Self> {
        check_points(&vertices, "polytope vertex list")?;
        Ok(TargetSet::VPolytope { vertices })
    }

    pub fn halfspace(normal: Point, offset: f64) -> Result<Self> {
        check_points(std::slice::from_ref(&normal), "halfspace normal")?;
        if linalg::is_zero(&normal) {
            return Err(GeomError::InvalidSet("halfspace normal must be non-zero".into()));
        }
        if !offset.is_finite() {
            return Err(GeomError::InvalidSet("halfspace offset must be finite".into()));
        }
        Ok(TargetSet::Halfspace { normal, offset })
    }

    /// Re-checks the invariants of a value built directly from the enum.
    pub fn validate(&self) -> Result<usize> {
        match self {
            TargetSet::PointCloud { points } => check_points(points, "point cloud"),
            TargetSet::VPolytope { vertices } => check_points(vertices, "polytope vertex list"),
            TargetSet::Ball { center, radius } => {
                check_radius(*radius)?;
                check_points(std::slice::from_ref(center), "ball center")
            }
            TargetSet::Halfspace { normal, offset } => {
                Self::halfspace(normal.clone(), *offset)?;
                Ok(normal.len())
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            TargetSet::PointCloud { points } => points[0].len(),
            TargetSet::VPolytope { vertices } => vertices[0].len(),
            TargetSet::Ball { center, .. } => center.len(),
            TargetSet::Halfspace { normal, .. } => normal.len(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            TargetSet::PointCloud { .. } => "points",
            TargetSet::Ball { .. } => "ball",
            TargetSet::VPolytope { .. } => "vpolytope",
            TargetSet::Halfspace { .. } => "halfspace",
        }
    }

    pub fn bounded(&self) -> bool {
        !matches!(self, TargetSet::Halfspace { .. })
    }

    pub fn convex(&self) -> bool {
        match self {
            TargetSet::PointCloud { points } => points.len() == 1,
            _ => true,
        }
    }

    /// `sup { <a, w> : w in Q }`.
    pub fn support_value(&self, a: &[f64]) -> Result<Support> {
        check_dim(self.dim(), a.len())?;
        if linalg::is_zero(a) {
            return Err(GeomError::ZeroDirection);
        }
        Ok(match self {
            TargetSet::PointCloud { points: pts } | TargetSet::VPolytope { vertices: pts } => {
                Support::Finite(pts.iter().map(|p| linalg::dot(a, p)).fold(f64::NEG_INFINITY, f64::max))
            }
            TargetSet::Ball { center, radius } => {
                Support::Finite(linalg::dot(a, center) + radius * linalg::norm(a))
            }
            TargetSet::Halfspace { normal, offset } => {
                let na2 = linalg::dot(normal, normal);
                let lam = linalg::dot(a, normal) / na2;
                let residual = linalg::norm(&linalg::axpy(a, -lam, normal));
                if lam > 0.0 && residual <= 1e-12 * linalg::norm(a) {
                    Support::Finite(lam * offset)
                } else {
                    Support::Infinite
                }
            }
        })
    }

    /// Euclidean nearest point of the set to `x`.
    ///
    /// For a point cloud this is a nearest listed point (lowest index on
    /// ties), which is not a convex projection once there are two points.
    pub fn euclid_project(&self, x: &[f64]) -> Result<Point> {
        check_dim(self.dim(), x.len())?;
        Ok(self.project_unchecked(x))
    }

    pub(crate) fn project_unchecked(&self, x: &[f64]) -> Point {
        match self {
            TargetSet::PointCloud { points } => {
                let mut best = f64::INFINITY;
                let mut arg = 0;
                for (i, p) in points.iter().enumerate() {
                    let dd = linalg::dist(p, x);
                    if dd < best {
                        best = dd;
                        arg = i;
                    }
                }
                points[arg].clone()
            }
            TargetSet::Ball { center, radius } => project_ball(center, *radius, x),
            TargetSet::Halfspace { normal, offset } => polytope::project_halfspace(normal, *offset, x),
            TargetSet::VPolytope { vertices } => nearest_in_hull(vertices, x),
        }
    }

    /// The defining points of a point cloud or V-polytope.
    pub fn vertices(&self) -> Result<&[Point]> {
        match self {
            TargetSet::PointCloud { points } => Ok(points),
            TargetSet::VPolytope { vertices } => Ok(vertices),
            _ => Err(GeomError::UnsupportedKind("vertices of a ball or halfspace")),
        }
    }

    /// Points used to place the scene: the defining points, the ball center
    /// and extreme points, or the boundary point of a halfspace nearest the
    /// origin.
    pub fn anchor_points(&self) -> Vec<Point> {
        match self {
            TargetSet::PointCloud { points } => points.clone(),
            TargetSet::VPolytope { vertices } => vertices.clone(),
            TargetSet::Ball { center, radius } => {
                let mut out = vec![center.clone()];
                for i in 0..center.len() {
                    let e = linalg::unit(center.len(), i);
                    out.push(linalg::axpy(center, *radius, &e));
                    out.push(linalg::axpy(center, -*radius, &e));
                }
                out
            }
            TargetSet::Halfspace { normal, offset } => {
                vec![linalg::scale(normal, offset / linalg::dot(normal, normal))]
            }
        }
    }

    /// A single representative point (used for start placement).
    pub fn representative(&self) -> Point {
        match self {
            TargetSet::PointCloud { points } | TargetSet::VPolytope { vertices: points } => {
                linalg::centroid(points, self.dim())
            }
            TargetSet::Ball { center, .. } => center.clone(),
            TargetSet::Halfspace { .. } => self.anchor_points().remove(0),
        }
    }

    /// Euclidean distance from `x` to the set (to its nearest listed point
    /// for a point cloud).
    pub fn distance(&self, x: &[f64]) -> f64 {
        linalg::dist(&self.project_unchecked(x), x)
    }

    /// Applies `x -> factor * x + shift` to the set.
    pub fn transformed(&self, factor: f64, shift: &[f64]) -> TargetSet {
        let map = |p: &Point| linalg::axpy(shift, factor, p);
        match self {
            TargetSet::PointCloud { points } => TargetSet::PointCloud {
                points: points.iter().map(map).collect(),
            },
            TargetSet::VPolytope { vertices } => TargetSet::VPolytope {
                vertices: vertices.iter().map(map).collect(),
            },
            TargetSet::Ball { center, radius } => TargetSet::Ball {
                center: map(center),
                radius: radius * factor,
            },
            TargetSet::Halfspace { normal, offset } => TargetSet::Halfspace {
                normal: normal.clone(),
                offset: factor * offset + linalg::dot(normal, shift),
            },
        }
    }
}

pub(crate) fn project_ball(center: &[f64], radius: f64, x: &[f64]) -> Point {
    let v = linalg::sub(x, center);
    let n = linalg::norm(&v);
    if n <= radius {
        x.to_vec()
    } else {
        linalg::axpy(center, radius / n, &v)
    }
}

/// Nearest point of `conv(vertices)` to `x` by Wolfe's minimum-norm-point
/// method on the translated vertices. Exact up to rounding in every
/// dimension; the active set stays affinely independent.
pub fn nearest_in_hull(vertices: &[Point], x: &[f64]) -> Point {
    let (weights, support) = hull_min_norm(vertices, x);
    let mut out = linalg::zeros(x.len());
    for (w, &i) in weights.iter().zip(&support) {
        for (o, v) in out.iter_mut().zip(&vertices[i]) {
            *o += w * v;
        }
    }
    out
}

/// Returns convex weights and the vertex indices they apply to.
pub(crate) fn hull_min_norm(vertices: &[Point], x: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let p: Vec<Point> = vertices.iter().map(|v| linalg::sub(v, x)).collect();
    let scale2 = p.iter().map(|q| linalg::dot(q, q)).fold(0.0f64, f64::max);
    if scale2 == 0.0 {
        return (vec![1.0], vec![0]);
    }
    let combine = |w: &[f64], s: &[usize]| -> Point {
        let mut y = linalg::zeros(x.len());
        for (wi, &i) in w.iter().zip(s) {
            for (yk, pk) in y.iter_mut().zip(&p[i]) {
                *yk += wi * pk;
            }
        }
        y
    };

    let start = (0..p.len())
        .min_by(|&a, &b| linalg::dot(&p[a], &p[a]).total_cmp(&linalg::dot(&p[b], &p[b])))
        .unwrap();
    let mut support = vec![start];
    let mut weights = vec![1.0];
    let mut y = p[start].clone();

    for _major in 0..10_000 {
        let (j, best) = (0..p.len())
            .map(|i| (i, linalg::dot(&y, &p[i])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let yy = linalg::dot(&y, &y);
        if yy - best <= 1e-15 * scale2 || support.contains(&j) || yy == 0.0 {
            break;
        }
        support.push(j);
        weights.push(0.0);

        loop {
            let alpha = match affine_min_norm(&p, &support) {
                Some(a) => a,
                None => {
                    // Numerically dependent set; drop the newest point.
                    support.pop();
                    weights.pop();
                    return (weights, support);
                }
            };
            if alpha.iter().all(|&a| a > 1e-14) {
                weights = alpha;
                y = combine(&weights, &support);
                break;
            }
            let mut theta: f64 = 1.0;
            for (&l, &a) in weights.iter().zip(&alpha) {
                if a <= 1e-14 {
                    let denom = l - a;
                    if denom > 0.0 {
                        theta = theta.min(l / denom);
                    }
                }
            }
            let mixed: Vec<f64> = weights
                .iter()
                .zip(&alpha)
                .map(|(&l, &a)| theta * a + (1.0 - theta) * l)
                .collect();
            let mut keep_w = Vec::new();
            let mut keep_s = Vec::new();
            for (w, &i) in mixed.iter().zip(&support) {
                if *w > 1e-14 {
                    keep_w.push(*w);
                    keep_s.push(i);
                }
            }
            if keep_s.is_empty() {
                keep_w.push(1.0);
                keep_s.push(support[0]);
            }
            let total: f64 = keep_w.iter().sum();
            weights = keep_w.iter().map(|w| w / total).collect();
            support = keep_s;
        }
    }
    (weights, support)
}

/// Weights of the minimum-norm point of the affine hull of `p[support]`.
fn affine_min_norm(p: &[Point], support: &[usize]) -> Option<Vec<f64>> {
    let k = support.len();
    let mut m = vec![vec![0.0; k + 1]; k + 1];
    for (a, &i) in support.iter().enumerate() {
        for (b, &j) in support.iter().enumerate() {
            m[a][b] = linalg::dot(&p[i], &p[j]);
        }
        m[a][k] = 1.0;
        m[k][a] = 1.0;
    }
    let mut rhs = vec![0.0; k + 1];
    rhs[k] = 1.0;
    let sol = linalg::solve_dense(&m, &rhs)?;
    Some(sol[..k].to_vec())
}

/// The feasible region `Omega` for the center.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintSet {
    WholeSpace,
    Ball { center: Point, radius: f64 },
    Box { lo: Point, hi: Point },
    HPolytope { rows: Vec<Point>, offsets: Vec<f64> },
    /// The sphere `{x : |x - center| = radius}`; not convex.
    Sphere { center: Point, radius: f64 },
}

impl ConstraintSet {
    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        check_points(std::slice::from_ref(&center), "ball center")?;
        check_radius(radius)?;
        Ok(ConstraintSet::Ball { center, radius })
    }

    pub fn sphere(center: Point, radius: f64) -> Result<Self> {
        check_points(std::slice::from_ref(&center), "sphere center")?;
        check_radius(radius)?;
        Ok(ConstraintSet::Sphere { center, radius })
    }

    pub fn axis_box(lo: Point, hi: Point) -> Result<Self> {
        check_points(&[lo.clone(), hi.clone()], "box corner")?;
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Err(GeomError::InvalidSet("box requires lo <= hi componentwise".into()));
        }
        Ok(ConstraintSet::Box { lo, hi })
    }

    /// `{x : <rows_j, x> <= offsets_j}`; must be non-empty.
    pub fn hpolytope(rows: Vec<Point>, offsets: Vec<f64>) -> Result<Self> {
        let d = check_points(&rows, "polyhedron row list")?;
        if rows.len() != offsets.len() {
            return Err(GeomError::InvalidSet("polyhedron needs one offset per row".into()));
        }
        if offsets.iter().any(|b| !b.is_finite()) {
            return Err(GeomError::InvalidSet("polyhedron offsets must be finite".into()));
        }
        if let Some(j) = rows.iter().position(|r| linalg::is_zero(r)) {
            return Err(GeomError::InvalidSet(format!("polyhedron row {j} is zero")));
        }
        // Feasibility: maximize 0 subject to the rows.
        match polytope::lp_support(&rows, &offsets, &vec![0.0; d]) {
            Ok(_) => Ok(ConstraintSet::HPolytope { rows, offsets }),
            Err(GeomError::LinearProgram(_)) => Err(GeomError::InvalidSet("polyhedron is empty".into())),
            Err(e) => Err(e),
        }
    }

    pub fn validate(&self) -> Result<Option<usize>> {
        match self {
            ConstraintSet::WholeSpace => Ok(None),
            ConstraintSet::Ball { center, radius } => {
                Self::ball(center.clone(), *radius).map(|_| Some(center.len()))
            }
            ConstraintSet::Sphere { center, radius } => {
                Self::sphere(center.clone(), *radius).map(|_| Some(center.len()))
            }
            ConstraintSet::Box { lo, hi } => Self::axis_box(lo.clone(), hi.clone()).map(|_| Some(lo.len())),
            ConstraintSet::HPolytope { rows, offsets } => {
                Self::hpolytope(rows.clone(), offsets.clone()).map(|_| Some(rows[0].len()))
            }
        }
    }

    /// Dimension fixed by the set's data; `None` for the whole space.
    pub fn dim(&self) -> Option<usize> {
        match self {
            ConstraintSet::WholeSpace => None,
            ConstraintSet::Ball { center, .. } | ConstraintSet::Sphere { center, .. } => Some(center.len()),
            ConstraintSet::Box { lo, .. } => Some(lo.len()),
            ConstraintSet::HPolytope { rows, .. } => Some(rows[0].len()),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ConstraintSet::WholeSpace => "whole_space",
            ConstraintSet::Ball { .. } => "ball",
            ConstraintSet::Box { .. } => "box",
            ConstraintSet::HPolytope { .. } => "hpolytope",
            ConstraintSet::Sphere { .. } => "sphere",
        }
    }

    pub fn convex(&self) -> bool {
        !matches!(self, ConstraintSet::Sphere { .. })
    }

    pub fn is_whole_space(&self) -> bool {
        matches!(self, ConstraintSet::WholeSpace)
    }

    /// Axis-aligned bounding box, `None` when the set is unbounded.
    pub fn bounding_box(&self) -> Option<(Point, Point)> {
        match self {
            ConstraintSet::WholeSpace => None,
            ConstraintSet::Ball { center, radius } | ConstraintSet::Sphere { center, radius } => Some((
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            )),
            ConstraintSet::Box { lo, hi } => Some((lo.clone(), hi.clone())),
            ConstraintSet::HPolytope { rows, offsets } => {
                let d = rows[0].len();
                let mut lo = vec![0.0; d];
                let mut hi = vec![0.0; d];
                for i in 0..d {
                    let e = linalg::unit(d, i);
                    hi[i] = polytope::lp_support(rows, offsets, &e).ok()?.0;
                    lo[i] = -polytope::lp_support(rows, offsets, &linalg::scale(&e, -1.0)).ok()?.0;
                }
                Some((lo, hi))
            }
        }
    }

    pub fn bounded(&self) -> bool {
        self.bounding_box().is_some()
    }

    /// A point of the set nearest to `x` (the Euclidean projection for
    /// convex kinds).
    pub fn project(&self, x: &[f64]) -> Result<Point> {
        if let Some(d) = self.dim() {
            check_dim(d, x.len())?;
        }
        match self {
            ConstraintSet::WholeSpace => Ok(x.to_vec()),
            ConstraintSet::Ball { center, radius } => Ok(project_ball(center, *radius, x)),
            ConstraintSet::Box { lo, hi } => Ok(x
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(v, (l, h))| v.clamp(*l, *h))
                .collect()),
            ConstraintSet::HPolytope { rows, offsets } => polytope::project_polyhedron(rows, offsets, x),
            ConstraintSet::Sphere { center, radius } => {
                let v = linalg::sub(x, center);
                let n = linalg::norm(&v);
                if n == 0.0 {
                    Ok(linalg::axpy(center, *radius, &linalg::unit(x.len(), 0)))
                } else {
                    Ok(linalg::axpy(center, radius / n, &v))
                }
            }
        }
    }

    /// Euclidean distance from `x` to the set.
    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        Ok(linalg::dist(&self.project(x)?, x))
    }

    pub fn transformed(&self, factor: f64, shift: &[f64]) -> ConstraintSet {
        let map = |p: &Point| linalg::axpy(shift, factor, p);
        match self {
            ConstraintSet::WholeSpace => ConstraintSet::WholeSpace,
            ConstraintSet::Ball { center, radius } => ConstraintSet::Ball {
                center: map(center),
                radius: radius * factor,
            },
            ConstraintSet::Sphere { center, radius } => ConstraintSet::Sphere {
                center: map(center),
                radius: radius * factor,
            },
            ConstraintSet::Box { lo, hi } => ConstraintSet::Box { lo: map(lo), hi: map(hi) },
            ConstraintSet::HPolytope { rows, offsets } => ConstraintSet::HPolytope {
                rows: rows.clone(),
                offsets: rows
                    .iter()
                    .zip(offsets)
                    .map(|(a, b)| factor * b + linalg::dot(a, shift))
                    .collect(),
            },
        }
    }
}
