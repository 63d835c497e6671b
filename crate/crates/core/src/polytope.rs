//! Polyhedral helpers shared by the gauge and constraint sets: vertex
//! enumeration, linear programs, and Euclidean projection onto `{z : Az <= b}`.

use minilp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem};

use crate::error::{GeomError, Result};
use crate::linalg::{self, Point};

/// Above this many candidate active sets the exact projection gives way to Dykstra.
const MAX_ACTIVE_SETS: u128 = 20_000;

/// Largest number of `d`-row subsets visited during vertex enumeration.
const MAX_VERTEX_SUBSETS: u128 = 2_000_000;

/// Maximizes `<u, z>` over `{z : <rows_j, z> <= offsets_j}`.
pub fn lp_support(rows: &[Point], offsets: &[f64], u: &[f64]) -> Result<(f64, Point)> {
    let d = u.len();
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    // Free variables are split as z = z+ - z-; minilp mishandles unbounded
    // variable ranges.
    let vars: Vec<_> = u
        .iter()
        .map(|&c| {
            (
                problem.add_var(c, (0.0, f64::INFINITY)),
                problem.add_var(-c, (0.0, f64::INFINITY)),
            )
        })
        .collect();
    for (row, &b) in rows.iter().zip(offsets) {
        let mut expr = LinearExpr::empty();
        for ((vp, vm), &a) in vars.iter().zip(row) {
            if a != 0.0 {
                expr.add(*vp, a);
                expr.add(*vm, -a);
            }
        }
        problem.add_constraint(expr, ComparisonOp::Le, b);
    }
    match problem.solve() {
        Ok(sol) => {
            let z: Point = vars
                .iter()
                .map(|(vp, vm)| sol.var_value(*vp) - sol.var_value(*vm))
                .collect();
            debug_assert_eq!(z.len(), d);
            // minilp reports some unbounded programs as infinite optima.
            if !sol.objective().is_finite() || z.iter().any(|v| !v.is_finite()) {
                return Err(GeomError::Unbounded);
            }
            Ok((linalg::dot(u, &z), z))
        }
        Err(minilp::Error::Unbounded) => Err(GeomError::Unbounded),
        Err(e) => Err(GeomError::LinearProgram(e.to_string())),
    }
}

/// Vertices of the bounded polyhedron `{z : Az <= b}`, deduplicated.
///
/// Returns `None` when the number of row subsets is too large to enumerate.
pub fn enumerate_vertices(rows: &[Point], offsets: &[f64], d: usize) -> Option<Vec<Point>> {
    if linalg::binomial(rows.len(), d) > MAX_VERTEX_SUBSETS {
        return None;
    }
    let scale = 1.0 + offsets.iter().fold(0.0f64, |m, b| m.max(b.abs()));
    let mut out: Vec<Point> = Vec::new();
    linalg::for_each_subset(rows.len(), d, |subset| {
        let m: Vec<Point> = subset.iter().map(|&j| rows[j].clone()).collect();
        let rhs: Vec<f64> = subset.iter().map(|&j| offsets[j]).collect();
        if let Some(z) = linalg::solve_dense(&m, &rhs) {
            let feasible = rows
                .iter()
                .zip(offsets)
                .all(|(a, b)| linalg::dot(a, &z) <= b + 1e-10 * scale);
            let fresh = out
                .iter()
                .all(|v| linalg::dist(v, &z) > 1e-9 * (1.0 + linalg::norm(&z)));
            if feasible && fresh {
                out.push(z);
            }
        }
        true
    });
    Some(out)
}

/// Orders the vertices of a planar convex polygon counter-clockwise.
pub fn order_polygon(vertices: &[Point]) -> Vec<Point> {
    let c = linalg::centroid(vertices, 2);
    let mut v = vertices.to_vec();
    v.sort_by(|a, b| {
        let ta = (a[1] - c[1]).atan2(a[0] - c[0]);
        let tb = (b[1] - c[1]).atan2(b[0] - c[0]);
        ta.total_cmp(&tb)
    });
    v
}

/// Euclidean projection of `p` onto the halfspace `{z : <a, z> <= b}`.
pub fn project_halfspace(a: &[f64], b: f64, p: &[f64]) -> Point {
    let excess = linalg::dot(a, p) - b;
    if excess <= 0.0 {
        return p.to_vec();
    }
    linalg::axpy(p, -excess / linalg::dot(a, a), a)
}

/// Dykstra's alternating projections onto an intersection of halfspaces.
///
/// Stops once a full sweep moves the iterate less than `tol * (1 + |x|)`.
pub fn dykstra(rows: &[Point], offsets: &[f64], p: &[f64], tol: f64, max_sweeps: usize) -> Result<Point> {
    let mut x = p.to_vec();
    let mut increments = vec![linalg::zeros(p.len()); rows.len()];
    for _ in 0..max_sweeps {
        let start = x.clone();
        for ((a, &b), y) in rows.iter().zip(offsets).zip(increments.iter_mut()) {
            let z = linalg::add(&x, y);
            let next = project_halfspace(a, b, &z);
            *y = linalg::sub(&z, &next);
            x = next;
        }
        if linalg::dist(&x, &start) < tol * (1.0 + linalg::norm(&x)) {
            return Ok(x);
        }
    }
    Err(GeomError::NoConvergence {
        what: "Dykstra projection",
        iters: max_sweeps,
    })
}

/// Exact Euclidean projection onto `{z : Az <= b}` by enumerating the
/// candidate active sets (at most `d` linearly independent rows each) and
/// keeping the nearest feasible candidate. Falls back to Dykstra when there
/// are too many candidate sets.
pub fn project_polyhedron(rows: &[Point], offsets: &[f64], p: &[f64]) -> Result<Point> {
    let d = p.len();
    let m = rows.len();
    let kmax = d.min(m);
    let budget: u128 = (0..=kmax).map(|k| linalg::binomial(m, k)).sum();
    if budget > MAX_ACTIVE_SETS {
        return dykstra(rows, offsets, p, 1e-13, 200_000);
    }
    let scale = 1.0
        + linalg::max_abs(p)
        + offsets.iter().fold(0.0f64, |s, b| s.max(b.abs()));
    let feas_tol = 1e-11 * scale;
    if rows
        .iter()
        .zip(offsets)
        .all(|(a, b)| linalg::dot(a, p) <= *b)
    {
        return Ok(p.to_vec());
    }
    let mut best: Option<(f64, Point)> = None;
    for k in 1..=kmax {
        linalg::for_each_subset(m, k, |subset| {
            // Gram system for the multipliers of the active rows.
            let gram: Vec<Point> = subset
                .iter()
                .map(|&i| subset.iter().map(|&j| linalg::dot(&rows[i], &rows[j])).collect())
                .collect();
            let rhs: Vec<f64> = subset
                .iter()
                .map(|&i| linalg::dot(&rows[i], p) - offsets[i])
                .collect();
            let Some(mu) = linalg::solve_dense(&gram, &rhs) else {
                return true;
            };
            if mu.iter().any(|&v| v < 0.0) {
                return true;
            }
            let mut z = p.to_vec();
            for (&i, &w) in subset.iter().zip(&mu) {
                for (zi, ai) in z.iter_mut().zip(&rows[i]) {
                    *zi -= w * ai;
                }
            }
            let feasible = rows
                .iter()
                .zip(offsets)
                .all(|(a, b)| linalg::dot(a, &z) <= b + feas_tol);
            if feasible {
                let dz = linalg::dist(&z, p);
                if best.as_ref().map_or(true, |(bd, _)| dz < *bd) {
                    best = Some((dz, z));
                }
            }
            true
        });
    }
    match best {
        Some((_, z)) => Ok(z),
        None => dykstra(rows, offsets, p, 1e-13, 200_000),
    }
}
