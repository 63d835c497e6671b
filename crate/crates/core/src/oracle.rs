//! Brute-force ground truth for scenes of dimension at most three.
//!
//! [`feasibility_radius`] bisects on the defining predicates "every target
//! lies in `x + tF`" and "every target meets `x + tF`", the latter decided by
//! a GJK distance computation between convex bodies given through their
//! support maps. [`grid_minimize`] evaluates the objective on refined grids.

use rayon::prelude::*;

use crate::error::{GeomError, Result};
use crate::gauge::GaugeBody;
use crate::linalg::{self, Point};
use crate::scene_io::{Problem, Scene};
use crate::sets::TargetSet;
use crate::timefn;

const MAX_DIM: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub lo: Point,
    pub hi: Point,
    /// Grid points per axis.
    pub resolution: usize,
    /// Extra passes, each on a box ten times smaller around the incumbent.
    pub refinement_rounds: usize,
}

impl Grid {
    pub fn new(lo: Point, hi: Point, resolution: usize, refinement_rounds: usize) -> Result<Self> {
        if resolution < 3 {
            return Err(GeomError::InvalidGrid(format!("resolution must be at least 3, got {resolution}")));
        }
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(GeomError::InvalidGrid("box corners must share a positive dimension".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(GeomError::InvalidGrid("box needs lo < hi on every axis".into()));
        }
        Ok(Grid {
            lo,
            hi,
            resolution,
            refinement_rounds,
        })
    }

    /// The scene's sampling box at 201 points per axis with 3 refinements.
    pub fn for_scene(scene: &Scene) -> Result<Self> {
        let (lo, hi) = scene.sampling_box();
        Self::new(lo, hi, 201, 3)
    }
}

fn check_oracle_dim(scene: &Scene) -> Result<()> {
    if scene.dimension > MAX_DIM {
        return Err(GeomError::UnsupportedDimension(scene.dimension));
    }
    Ok(())
}

/// Best objective value over the grid points projected onto the constraint
/// set, refined around the incumbent.
pub fn grid_minimize(scene: &Scene, grid: &Grid) -> Result<(Point, f64)> {
    check_oracle_dim(scene)?;
    crate::error::check_dim(scene.dimension, grid.lo.len())?;
    let d = scene.dimension;
    let n = grid.resolution;
    let total = n.pow(d as u32);
    let mut lo = grid.lo.clone();
    let mut hi = grid.hi.clone();
    let mut best: Option<(Point, f64)> = None;
    for _ in 0..=grid.refinement_rounds {
        let round = (0..total)
            .into_par_iter()
            .map(|idx| {
                let mut rest = idx;
                let p: Point = (0..d)
                    .map(|k| {
                        let i = rest % n;
                        rest /= n;
                        lo[k] + (hi[k] - lo[k]) * i as f64 / (n - 1) as f64
                    })
                    .collect();
                let q = scene.constraint.project(&p)?;
                let v = timefn::objective(scene, &q)?.value;
                Ok((idx, q, v))
            })
            .collect::<Result<Vec<_>>>()?;
        let (_, q, v) = round
            .into_iter()
            .min_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)))
            .ok_or_else(|| GeomError::InvalidGrid("empty grid".into()))?;
        for k in 0..d {
            let half = 0.05 * (hi[k] - lo[k]);
            lo[k] = q[k] - half;
            hi[k] = q[k] + half;
        }
        if best.as_ref().map_or(true, |(_, bv)| v < *bv) {
            best = Some((q, v));
        }
    }
    Ok(best.expect("at least one pass"))
}

/// Radius of the smallest ball `x + tF` enclosing (SEB) or meeting (SIB)
/// every target, by bisection on the defining predicate.
pub fn feasibility_radius(scene: &Scene, x: &[f64]) -> Result<f64> {
    check_oracle_dim(scene)?;
    crate::error::check_dim(scene.dimension, x.len())?;
    let scale = 1.0 + linalg::max_abs(x) + scene.diameter();
    let feasible = |t: f64| -> Result<bool> {
        for q in &scene.targets {
            let ok = match scene.problem {
                Problem::Seb => encloses(&scene.gauge, q, x, t)?,
                Problem::Sib => meets(&scene.gauge, q, x, t, 1e-12 * scale)?,
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    };
    if feasible(0.0)? {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    let mut grown = 0;
    while !feasible(hi)? {
        hi *= 2.0;
        grown += 1;
        if grown > 1100 {
            return Err(GeomError::NoConvergence {
                what: "feasibility bracket",
                iters: grown,
            });
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-12 * (1.0 + hi) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if feasible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn encloses(gauge: &GaugeBody, q: &TargetSet, x: &[f64], t: f64) -> Result<bool> {
    match q {
        TargetSet::PointCloud { points: pts } | TargetSet::VPolytope { vertices: pts } => {
            for p in pts {
                if !gauge.membership_with_tol(&linalg::sub(p, x), t, 0.0)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        TargetSet::Ball { center, radius } => Ok(sphere_sup(gauge, center, *radius, x) <= t),
        TargetSet::Halfspace { .. } => Err(GeomError::Unbounded),
    }
}

/// `max rho_F(c + s u - x)` over unit vectors `u`, by a dense scan followed
/// by local refinement of the best samples.
fn sphere_sup(gauge: &GaugeBody, c: &[f64], s: f64, x: &[f64]) -> f64 {
    let d = c.len();
    let f = |u: &[f64]| gauge.eval(&linalg::sub(&linalg::axpy(c, s, u), x));
    if s == 0.0 {
        return f(&linalg::zeros(d));
    }
    match d {
        1 => f(&[1.0]).max(f(&[-1.0])),
        2 => {
            let at = |a: f64| f(&[a.cos(), a.sin()]);
            let n = 3600;
            let h = std::f64::consts::TAU / n as f64;
            let mut samples: Vec<(f64, f64)> = (0..n).map(|k| (at(k as f64 * h), k as f64 * h)).collect();
            samples.sort_by(|a, b| b.0.total_cmp(&a.0));
            samples
                .iter()
                .take(8)
                .map(|&(v, a)| v.max(golden_max(at, a - h, a + h)))
                .fold(f64::NEG_INFINITY, f64::max)
        }
        _ => {
            let mut samples: Vec<(f64, Point)> = fibonacci_sphere(4000)
                .into_iter()
                .map(|u| (f(&u), u))
                .collect();
            samples.sort_by(|a, b| b.0.total_cmp(&a.0));
            samples
                .iter()
                .take(8)
                .map(|(_, u)| pattern_max_on_sphere(&f, u.clone(), 0.05))
                .fold(f64::NEG_INFINITY, f64::max)
        }
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut e = a + r * (b - a);
    let (mut fc, mut fe) = (f(c), f(e));
    for _ in 0..120 {
        if fc >= fe {
            b = e;
            e = c;
            fe = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + r * (b - a);
            fe = f(e);
        }
    }
    fc.max(fe)
}

fn fibonacci_sphere(n: usize) -> Vec<Point> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let a = golden * i as f64;
            vec![r * a.cos(), r * a.sin(), z]
        })
        .collect()
}

fn pattern_max_on_sphere(f: &impl Fn(&[f64]) -> f64, mut u: Point, mut h: f64) -> f64 {
    let mut best = f(&u);
    while h > 1e-12 {
        let mut moved = false;
        for k in 0..u.len() {
            for sign in [1.0, -1.0] {
                let mut v = u.clone();
                v[k] += sign * h;
                let v = linalg::scale(&v, 1.0 / linalg::norm(&v));
                let fv = f(&v);
                if fv > best {
                    best = fv;
                    u = v;
                    moved = true;
                }
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    best
}

fn meets(gauge: &GaugeBody, q: &TargetSet, x: &[f64], t: f64, tol: f64) -> Result<bool> {
    match q {
        TargetSet::PointCloud { points } => {
            for p in points {
                if gauge.membership_with_tol(&linalg::sub(p, x), t, 0.0)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        TargetSet::Halfspace { normal, offset } => {
            let lowest = linalg::dot(normal, x) - t * gauge.support_point(&linalg::scale(normal, -1.0)).0;
            Ok(lowest <= *offset)
        }
        TargetSet::Ball { .. } | TargetSet::VPolytope { .. } => {
            let body = |u: &[f64]| -> Point {
                if t == 0.0 || linalg::is_zero(u) {
                    x.to_vec()
                } else {
                    linalg::axpy(x, t, &gauge.support_point(u).1)
                }
            };
            let target = |u: &[f64]| -> Point { target_support(q, u) };
            Ok(gjk_within(&body, &target, linalg::sub(x, &target_support(q, &linalg::unit(x.len(), 0))), tol))
        }
    }
}

/// A point of a bounded convex target maximizing `<u, .>`.
fn target_support(q: &TargetSet, u: &[f64]) -> Point {
    match q {
        TargetSet::Ball { center, radius } => {
            let n = linalg::norm(u);
            if n == 0.0 {
                center.clone()
            } else {
                linalg::axpy(center, radius / n, u)
            }
        }
        TargetSet::VPolytope { vertices } | TargetSet::PointCloud { points: vertices } => {
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            for (i, v) in vertices.iter().enumerate() {
                let s = linalg::dot(u, v);
                if s > best {
                    best = s;
                    arg = i;
                }
            }
            vertices[arg].clone()
        }
        TargetSet::Halfspace { .. } => unreachable!("halfspaces are handled without support points"),
    }
}

/// Whether the Euclidean distance between convex bodies `A` and `B` is at
/// most `tol`, by GJK on `A - B`. Every iterate brackets the distance between
/// the lower bound `<v, w> / |v|` (less a rounding allowance, which matters
/// when `|v|` is tiny next to the support points) and the upper bound `|v|`;
/// the answer is
/// returned as soon as either bound settles the comparison. Once `|v|` stops
/// improving it is taken as the distance.
fn gjk_within(
    support_a: &impl Fn(&[f64]) -> Point,
    support_b: &impl Fn(&[f64]) -> Point,
    start: Point,
    tol: f64,
) -> bool {
    let diff_support = |dir: &[f64]| linalg::sub(&support_a(dir), &support_b(&linalg::scale(dir, -1.0)));
    let mut simplex = vec![start.clone()];
    let mut v = start;
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    let mut stalled = 0;
    for _ in 0..GJK_MAX_ITERS {
        let vn = linalg::norm(&v);
        if vn <= tol {
            return true;
        }
        if vn < upper * (1.0 - 1e-9) {
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= GJK_STALL {
                break;
            }
        }
        upper = upper.min(vn);
        let w = diff_support(&linalg::scale(&v, -1.0));
        let magnitude = simplex.iter().chain([&w]).map(|p| linalg::norm(p)).fold(0.0, f64::max);
        let rounding = 1e-13 * magnitude * linalg::norm(&w) / vn;
        lower = lower.max(linalg::dot(&v, &w) / vn - rounding);
        if lower > tol {
            return false;
        }
        if vn * vn - linalg::dot(&v, &w) <= 1e-15 * vn * vn {
            return vn <= tol;
        }
        simplex.push(w);
        let (nv, kept) = nearest_in_simplex(&simplex);
        simplex = kept;
        v = nv;
    }
    upper <= tol
}

const GJK_MAX_ITERS: usize = 1000;
const GJK_STALL: usize = 30;

/// Whether `d + 1` points in `R^d` span a simplex containing the origin.
fn contains_origin(points: &[Point]) -> bool {
    let d = points[0].len();
    let mut sys = vec![vec![1.0; d + 1]; d + 1];
    for (j, p) in points.iter().enumerate() {
        for i in 0..d {
            sys[i][j] = p[i];
        }
    }
    let mut rhs = vec![0.0; d + 1];
    rhs[d] = 1.0;
    linalg::solve_dense(&sys, &rhs).is_some_and(|l| l.iter().all(|&v| v >= 0.0))
}

/// Nearest point to the origin of the hull of at most `d + 1` points, by
/// trying every subset: the answer is the affine nearest point of the subset
/// whose barycentric weights are all positive and whose norm is smallest.
fn nearest_in_simplex(points: &[Point]) -> (Point, Vec<Point>) {
    let m = points.len();
    let d = points[0].len();
    if m == d + 1 && contains_origin(points) {
        return (linalg::zeros(d), points.to_vec());
    }
    let mut best: Option<(f64, Point, Vec<Point>)> = None;
    for mask in 1u32..(1 << m) {
        let idx: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        let k = idx.len();
        let mut sys = vec![vec![0.0; k + 1]; k + 1];
        let mut rhs = vec![0.0; k + 1];
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                sys[r][c] = linalg::dot(&points[i], &points[j]);
            }
            sys[r][k] = 1.0;
            sys[k][r] = 1.0;
        }
        rhs[k] = 1.0;
        let Some(sol) = linalg::solve_dense(&sys, &rhs) else {
            continue;
        };
        if sol[..k].iter().any(|&l| l < 0.0) {
            continue;
        }
        let mut p = linalg::zeros(points[0].len());
        for (l, &i) in sol[..k].iter().zip(&idx) {
            p = linalg::axpy(&p, *l, &points[i]);
        }
        let n = linalg::norm(&p);
        if best.as_ref().map_or(true, |(bn, _, _)| n < *bn) {
            best = Some((n, p, idx.iter().map(|&i| points[i].clone()).collect()));
        }
    }
    let (_, p, kept) = best.expect("singletons are always admissible");
    (p, kept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::ConstraintSet;

    fn square() -> GaugeBody {
        GaugeBody::hpolytope(vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]]).unwrap()
    }

    fn ex27() -> Scene {
        Scene::new(
            Problem::Seb,
            square(),
            ConstraintSet::WholeSpace,
            vec![
                TargetSet::points(vec![vec![0.0, 1.0]]).unwrap(),
                TargetSet::points(vec![vec![0.0, -1.0]]).unwrap(),
            ],
        )
        .unwrap()
    }

    fn ex35() -> Scene {
        Scene::new(
            Problem::Sib,
            square(),
            ConstraintSet::WholeSpace,
            vec![
                TargetSet::ball(vec![0.0, 2.0], 1.0).unwrap(),
                TargetSet::ball(vec![0.0, -2.0], 1.0).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn feasibility_examples() {
        assert!((feasibility_radius(&ex27(), &[0.0, 0.0]).unwrap() - 1.0).abs() < 1e-9);
        let single = Scene::new(
            Problem::Seb,
            GaugeBody::euclidean(2).unwrap(),
            ConstraintSet::WholeSpace,
            vec![TargetSet::points(vec![vec![0.5, 0.5]]).unwrap()],
        )
        .unwrap();
        assert_eq!(feasibility_radius(&single, &[0.5, 0.5]).unwrap(), 0.0);
        assert!((feasibility_radius(&ex35(), &[1.0, 0.0]).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn grid_examples() {
        let pair = Scene::new(
            Problem::Seb,
            GaugeBody::euclidean(2).unwrap(),
            ConstraintSet::WholeSpace,
            vec![
                TargetSet::points(vec![vec![-1.0, 0.0]]).unwrap(),
                TargetSet::points(vec![vec![1.0, 0.0]]).unwrap(),
            ],
        )
        .unwrap();
        let (x, v) = grid_minimize(&pair, &Grid::for_scene(&pair).unwrap()).unwrap();
        assert!((v - 1.0).abs() < 1e-3 && linalg::norm(&x) < 1e-2);

        let halfplanes = Scene::new(
            Problem::Sib,
            GaugeBody::euclidean(2).unwrap(),
            ConstraintSet::WholeSpace,
            vec![
                TargetSet::halfspace(vec![0.0, -1.0], -1.0).unwrap(),
                TargetSet::halfspace(vec![0.0, 1.0], -1.0).unwrap(),
            ],
        )
        .unwrap();
        let (_, v) = grid_minimize(&halfplanes, &Grid::for_scene(&halfplanes).unwrap()).unwrap();
        assert!((v - 1.0).abs() < 1e-3);

        let circle = Scene::new(
            Problem::Seb,
            GaugeBody::euclidean(2).unwrap(),
            ConstraintSet::sphere(vec![0.0, 0.0], 1.0).unwrap(),
            vec![TargetSet::points(vec![vec![0.0, 0.0]]).unwrap()],
        )
        .unwrap();
        let (x, v) = grid_minimize(&circle, &Grid::for_scene(&circle).unwrap()).unwrap();
        assert!((v - 1.0).abs() < 1e-3 && (linalg::norm(&x) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn grid_spec_validation() {
        assert!(Grid::new(vec![0.0], vec![1.0], 2, 0).is_err());
        assert!(Grid::new(vec![0.0], vec![0.0], 5, 0).is_err());
        assert!(Grid::new(vec![0.0, 0.0], vec![1.0], 5, 0).is_err());
    }

    #[test]
    fn rejects_high_dimension() {
        let s = Scene::new(
            Problem::Seb,
            GaugeBody::euclidean(4).unwrap(),
            ConstraintSet::WholeSpace,
            vec![TargetSet::points(vec![vec![0.0; 4]]).unwrap()],
        )
        .unwrap();
        assert_eq!(feasibility_radius(&s, &[0.0; 4]), Err(GeomError::UnsupportedDimension(4)));
    }

    #[test]
    fn gjk_matches_closed_form_disk_distance() {
        // Unit disk at the origin against the disk B((3, 4); 1): distance 3.
        let a = |u: &[f64]| {
            let n = linalg::norm(u);
            linalg::scale(u, 1.0 / n)
        };
        let b = |u: &[f64]| linalg::axpy(&[3.0, 4.0], 1.0 / linalg::norm(u), u);
        let start = linalg::sub(&a(&[1.0, 0.0]), &b(&[-1.0, 0.0]));
        assert!(gjk_within(&a, &b, start.clone(), 3.0 + 1e-9));
        assert!(!gjk_within(&a, &b, start, 3.0 - 1e-9));
    }

    #[test]
    fn three_dimensional_balls() {
        let ellipsoid = GaugeBody::ellipsoid(vec![
            vec![2.0, 0.3, 0.0],
            vec![0.3, 1.0, 0.1],
            vec![0.0, 0.1, 0.5],
        ])
        .unwrap();
        let q = TargetSet::ball(vec![1.0, -0.5, 2.0], 0.7).unwrap();
        let x = [0.2, 0.1, -0.3];
        for problem in [Problem::Seb, Problem::Sib] {
            let s = Scene::new(problem, ellipsoid.clone(), ConstraintSet::WholeSpace, vec![q.clone()]).unwrap();
            let oracle = feasibility_radius(&s, &x).unwrap();
            let direct = timefn::objective(&s, &x).unwrap().value;
            assert!((oracle - direct).abs() < 1e-7, "{problem:?} {oracle} {direct}");
        }
    }
}
