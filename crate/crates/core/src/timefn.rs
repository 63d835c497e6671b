//! Maximal and minimal time functions of a target set with respect to a
//! gauge, and the two minimax objectives built from them.
//!
//! `C_F(x; Q) = sup { rho_F(w - x) : w in Q }` is the smallest `t` with
//! `Q ⊂ x + tF`; `T_F(x; Q) = inf { rho_F(q - x) : q in Q }` is the smallest
//! `t` with `(x + tF) ∩ Q` non-empty. Every evaluation also returns a point
//! of `Q` realizing the value and a subgradient of `y -> time(y)` at `x`.

use minilp::{ComparisonOp, LinearExpr, OptimizationDirection};

use crate::error::{check_dim, GeomError, Result};
use crate::gauge::{GaugeBody, GaugeKind, Spectral};
use crate::linalg::{self, Point};
use crate::polytope;
use crate::quadratic;
use crate::scene_io::{Problem, Scene};
use crate::sets::{self, TargetSet};

/// Relative tolerance deciding which targets are active.
pub const ACTIVE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct TimeValue {
    pub value: f64,
    /// A point of the target realizing `value`.
    pub witness: Point,
    pub attained: bool,
    /// A subgradient of the time function (as a function of the center).
    pub subgradient: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveValue {
    pub value: f64,
    /// Targets within `ACTIVE_TOL * (1 + value)` of the maximum, ascending.
    pub active_indices: Vec<usize>,
    pub per_target: Vec<TimeValue>,
}

impl ObjectiveValue {
    fn from_parts(per_target: Vec<TimeValue>) -> Self {
        let value = per_target.iter().map(|t| t.value).fold(0.0, f64::max);
        let cut = value - ACTIVE_TOL * (1.0 + value);
        let active_indices = per_target
            .iter()
            .enumerate()
            .filter(|(_, t)| t.value >= cut)
            .map(|(i, _)| i)
            .collect();
        ObjectiveValue {
            value,
            active_indices,
            per_target,
        }
    }

    /// Subgradient of the objective: that of the lowest active target.
    pub fn subgradient(&self) -> Point {
        self.per_target[self.active_indices[0]].subgradient.clone()
    }

    /// Subgradient of the lowest target attaining the maximum exactly. Unlike
    /// [`ObjectiveValue::subgradient`] it satisfies the subgradient
    /// inequality with no slack.
    pub fn exact_subgradient(&self) -> Point {
        let top = self
            .per_target
            .iter()
            .position(|t| t.value == self.value)
            .unwrap_or(self.active_indices[0]);
        self.per_target[top].subgradient.clone()
    }
}

fn check_inputs(gauge: &GaugeBody, q: &TargetSet, x: &[f64]) -> Result<()> {
    check_dim(gauge.dim(), x.len())?;
    check_dim(gauge.dim(), q.dim())
}

fn to_eigen(sp: &Spectral, p: &[f64]) -> Point {
    sp.eigenvectors.iter().map(|v| linalg::dot(v, p)).collect()
}

fn from_eigen(sp: &Spectral, w: &[f64]) -> Point {
    let mut out = linalg::zeros(w.len());
    for (wk, v) in w.iter().zip(&sp.eigenvectors) {
        for (o, vi) in out.iter_mut().zip(v) {
            *o += wk * vi;
        }
    }
    out
}

/// `s^2 lambda` and `s lambda p~`: the quadratic `rho^2(p + s u)` in the
/// eigenbasis, up to its constant term.
fn ball_quadratic(sp: &Spectral, p: &[f64], s: f64) -> (Point, Point) {
    let pt = to_eigen(sp, p);
    let lam2 = sp.eigenvalues.iter().map(|l| s * s * l).collect();
    let lin = sp.eigenvalues.iter().zip(&pt).map(|(l, pk)| s * l * pk).collect();
    (lam2, lin)
}

fn neg(v: &[f64]) -> Point {
    v.iter().map(|a| -a).collect()
}

/// Maximal time function `C_F(x; Q)`.
pub fn max_time(gauge: &GaugeBody, q: &TargetSet, x: &[f64]) -> Result<TimeValue> {
    check_inputs(gauge, q, x)?;
    let d = x.len();
    let from_witness = |witness: Point| {
        let z = linalg::sub(&witness, x);
        TimeValue {
            value: gauge.eval(&z),
            subgradient: neg(&gauge.subgrad(&z)),
            witness,
            attained: true,
        }
    };
    match q {
        TargetSet::PointCloud { points: pts } | TargetSet::VPolytope { vertices: pts } => {
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            for (i, p) in pts.iter().enumerate() {
                let v = gauge.eval(&linalg::sub(p, x));
                if v > best {
                    best = v;
                    arg = i;
                }
            }
            Ok(from_witness(pts[arg].clone()))
        }
        TargetSet::Ball { center, radius } => {
            let s = *radius;
            let p = linalg::sub(center, x);
            match gauge.kind() {
                GaugeKind::EuclideanBall => {
                    let n = linalg::norm(&p);
                    let dir = if n == 0.0 {
                        linalg::unit(d, 0)
                    } else {
                        linalg::scale(&p, 1.0 / n)
                    };
                    let subgradient = if n == 0.0 { linalg::zeros(d) } else { neg(&dir) };
                    Ok(TimeValue {
                        value: n + s,
                        witness: linalg::axpy(center, s, &dir),
                        attained: true,
                        subgradient,
                    })
                }
                GaugeKind::HPolytope { rows } => {
                    let mut best = 0.0;
                    let mut arg = None;
                    for (j, a) in rows.iter().enumerate() {
                        let v = linalg::dot(a, &p) + s * linalg::norm(a);
                        if v > best {
                            best = v;
                            arg = Some(j);
                        }
                    }
                    Ok(match arg {
                        Some(j) => {
                            let a = &rows[j];
                            TimeValue {
                                value: best,
                                witness: linalg::axpy(center, s / linalg::norm(a), a),
                                attained: true,
                                subgradient: neg(a),
                            }
                        }
                        None => from_witness(center.clone()),
                    })
                }
                GaugeKind::Ellipsoid { .. } => {
                    if s == 0.0 {
                        return Ok(from_witness(center.clone()));
                    }
                    let sp = gauge.spectral().expect("ellipsoid spectral data");
                    let (lam2, lin) = ball_quadratic(sp, &p, s);
                    let w = quadratic::maximize_on_ball(&lam2, &lin);
                    Ok(from_witness(linalg::axpy(center, s, &from_eigen(sp, &w))))
                }
            }
        }
        TargetSet::Halfspace { .. } => Err(GeomError::Unbounded),
    }
}

/// `-v / h_F(v)` for an inner normal `v` of `Q` at the touching point.
fn separating_subgradient(gauge: &GaugeBody, v: &[f64]) -> Point {
    if linalg::is_zero(v) {
        return linalg::zeros(v.len());
    }
    let (h, _) = gauge.support_point(v);
    linalg::scale(v, -1.0 / h)
}

fn inside(x: &[f64]) -> TimeValue {
    TimeValue {
        value: 0.0,
        witness: x.to_vec(),
        attained: true,
        subgradient: linalg::zeros(x.len()),
    }
}

/// Minimal time function `T_F(x; Q)`.
pub fn min_time(gauge: &GaugeBody, q: &TargetSet, x: &[f64]) -> Result<TimeValue> {
    check_inputs(gauge, q, x)?;
    let smooth_at = |witness: Point| {
        let z = linalg::sub(&witness, x);
        let value = gauge.eval(&z);
        let subgradient = if value > 0.0 {
            neg(&gauge.subgrad(&z))
        } else {
            linalg::zeros(x.len())
        };
        TimeValue {
            value,
            witness,
            attained: true,
            subgradient,
        }
    };
    match q {
        TargetSet::PointCloud { points } => {
            let mut best = f64::INFINITY;
            let mut arg = 0;
            for (i, p) in points.iter().enumerate() {
                let v = gauge.eval(&linalg::sub(p, x));
                if v < best {
                    best = v;
                    arg = i;
                }
            }
            Ok(smooth_at(points[arg].clone()))
        }
        TargetSet::Halfspace { normal, offset } => {
            let excess = linalg::dot(normal, x) - offset;
            if excess <= 0.0 {
                return Ok(inside(x));
            }
            let (h, z) = gauge.support_point(&neg(normal));
            let t = excess / h;
            Ok(TimeValue {
                value: t,
                witness: linalg::axpy(x, t, &z),
                attained: true,
                subgradient: linalg::scale(normal, 1.0 / h),
            })
        }
        TargetSet::Ball { center, radius } => {
            let s = *radius;
            let p = linalg::sub(center, x);
            let n = linalg::norm(&p);
            if n <= s {
                return Ok(inside(x));
            }
            match gauge.kind() {
                GaugeKind::EuclideanBall => Ok(TimeValue {
                    value: n - s,
                    witness: sets::project_ball(center, s, x),
                    attained: true,
                    subgradient: linalg::scale(&p, -1.0 / n),
                }),
                GaugeKind::Ellipsoid { .. } => {
                    if s == 0.0 {
                        return Ok(smooth_at(center.clone()));
                    }
                    let sp = gauge.spectral().expect("ellipsoid spectral data");
                    let (lam2, lin) = ball_quadratic(sp, &p, s);
                    let w = quadratic::minimize_on_ball(&lam2, &lin, false);
                    let witness = linalg::axpy(center, s, &from_eigen(sp, &w));
                    let value = gauge.eval(&linalg::sub(&witness, x));
                    let subgradient = separating_subgradient(gauge, &linalg::sub(center, &witness));
                    Ok(TimeValue {
                        value,
                        witness,
                        attained: true,
                        subgradient,
                    })
                }
                GaugeKind::HPolytope { rows } => ball_polytope_gauge(gauge, rows, center, s, x),
            }
        }
        TargetSet::VPolytope { vertices } => match gauge.kind() {
            GaugeKind::EuclideanBall => Ok(smooth_at(sets::nearest_in_hull(vertices, x))),
            GaugeKind::Ellipsoid { .. } => {
                let sp = gauge.spectral().expect("ellipsoid spectral data");
                // rho(z) = |M z| with M = diag(sqrt(lambda)) Q^T.
                let map = |z: &[f64]| -> Point {
                    to_eigen(sp, z)
                        .iter()
                        .zip(&sp.eigenvalues)
                        .map(|(c, l)| c * l.sqrt())
                        .collect()
                };
                let mapped: Vec<Point> = vertices.iter().map(|v| map(v)).collect();
                let (weights, support) = sets::hull_min_norm(&mapped, &map(x));
                let mut witness = linalg::zeros(x.len());
                for (w, &i) in weights.iter().zip(&support) {
                    witness = linalg::axpy(&witness, *w, &vertices[i]);
                }
                Ok(smooth_at(witness))
            }
            GaugeKind::HPolytope { rows } => hull_polytope_gauge(rows, vertices, x),
        },
    }
}

/// Ball target under a polyhedral gauge: `min over |u| <= 1 of
/// rho_F(c + s u - x)`.
fn ball_polytope_gauge(
    gauge: &GaugeBody,
    rows: &[Point],
    center: &[f64],
    s: f64,
    x: &[f64],
) -> Result<TimeValue> {
    let p = linalg::sub(center, x);
    if s == 0.0 {
        return Ok(TimeValue {
            value: gauge.eval(&p),
            witness: center.to_vec(),
            attained: true,
            subgradient: neg(&gauge.subgrad(&p)),
        });
    }
    let witness = match sphere_active_sets(rows, &p, s) {
        Some(u) => linalg::axpy(center, s, &u),
        None => ball_bisection(gauge, rows, center, s, x)?,
    };
    let value = gauge.eval(&linalg::sub(&witness, x));
    let subgradient = separating_subgradient(gauge, &linalg::sub(center, &witness));
    Ok(TimeValue {
        value,
        witness,
        attained: true,
        subgradient,
    })
}

/// Above this many row subsets the ball case falls back to bisection.
const MAX_ACTIVE_SUBSETS: u128 = 20_000;

/// Exact minimizer `u` of `max_j <a_j, p + s u>` over the unit ball when the
/// ball does not contain `-p / s`. The minimizer lies on the sphere and is
/// fixed by at most `d` active rows `S`: it minimizes `<a_i0, u>` over the
/// sphere within the affine set where the rows of `S` tie. Every subset is
/// tried and the best candidate kept.
fn sphere_active_sets(rows: &[Point], p: &[f64], s: f64) -> Option<Point> {
    let d = p.len();
    let m = rows.len();
    let kmax = d.min(m);
    let budget: u128 = (1..=kmax).map(|k| linalg::binomial(m, k)).sum();
    if budget > MAX_ACTIVE_SUBSETS {
        return None;
    }
    let score = |u: &[f64]| {
        let z = linalg::axpy(p, s, u);
        rows.iter().map(|a| linalg::dot(a, &z)).fold(f64::NEG_INFINITY, f64::max)
    };
    let mut best: Option<(f64, Point)> = None;
    for k in 1..=kmax {
        linalg::for_each_subset(m, k, |subset| {
            let a0 = &rows[subset[0]];
            let diffs: Vec<Point> = subset[1..].iter().map(|&i| linalg::sub(&rows[i], a0)).collect();
            let (u_l, dir) = if diffs.is_empty() {
                (linalg::zeros(d), a0.clone())
            } else {
                let gram: Vec<Point> = diffs
                    .iter()
                    .map(|r| diffs.iter().map(|c| linalg::dot(r, c)).collect())
                    .collect();
                let rhs: Vec<f64> = diffs.iter().map(|r| -linalg::dot(r, p) / s).collect();
                let proj: Vec<f64> = diffs.iter().map(|r| linalg::dot(r, a0)).collect();
                let (Some(y), Some(z)) = (linalg::solve_dense(&gram, &rhs), linalg::solve_dense(&gram, &proj)) else {
                    return true;
                };
                let mut u_l = linalg::zeros(d);
                let mut dir = a0.clone();
                for ((r, yi), zi) in diffs.iter().zip(&y).zip(&z) {
                    u_l = linalg::axpy(&u_l, *yi, r);
                    dir = linalg::axpy(&dir, -zi, r);
                }
                (u_l, dir)
            };
            let n2 = linalg::dot(&u_l, &u_l);
            if n2 > 1.0 + 1e-12 {
                return true;
            }
            let dn = linalg::norm(&dir);
            let u = if dn > 1e-14 * linalg::norm(a0) {
                linalg::axpy(&u_l, -(1.0 - n2).max(0.0).sqrt() / dn, &dir)
            } else {
                u_l
            };
            let v = score(&u);
            if best.as_ref().map_or(true, |(bv, _)| v < *bv) {
                best = Some((v, u));
            }
            true
        });
    }
    best.map(|(_, u)| u)
}

/// Bisection on `t` with the exact predicate `dist(c - x, tF) <= s`.
fn ball_bisection(gauge: &GaugeBody, rows: &[Point], center: &[f64], s: f64, x: &[f64]) -> Result<Point> {
    let p = linalg::sub(center, x);
    let reach = |t: f64| polytope::project_polyhedron(rows, &vec![t; rows.len()], &p);
    let mut lo = 0.0;
    let mut hi = gauge.eval(&p);
    let mut z = p.clone();
    for _ in 0..200 {
        if hi - lo <= 1e-15 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let cand = reach(mid)?;
        if linalg::dist(&cand, &p) <= s {
            hi = mid;
            z = cand;
        } else {
            lo = mid;
        }
    }
    Ok(sets::project_ball(center, s, &linalg::add(x, &z)))
}

fn lp_error(e: minilp::Error) -> GeomError {
    GeomError::LinearProgram(e.to_string())
}

/// V-polytope target under a polyhedral gauge. The primal program
/// `min t : A(sum l_i v_i - x) <= t, l in simplex, t >= 0` gives the witness;
/// its dual multipliers `mu` give the subgradient `-A^T mu`.
fn hull_polytope_gauge(rows: &[Point], vertices: &[Point], x: &[f64]) -> Result<TimeValue> {
    let d = x.len();
    let gap: Vec<Vec<f64>> = vertices
        .iter()
        .map(|v| {
            let r = linalg::sub(v, x);
            rows.iter().map(|a| linalg::dot(a, &r)).collect()
        })
        .collect();

    let mut primal = minilp::Problem::new(OptimizationDirection::Minimize);
    let lam: Vec<_> = vertices.iter().map(|_| primal.add_var(0.0, (0.0, f64::INFINITY))).collect();
    let t = primal.add_var(1.0, (0.0, f64::INFINITY));
    for j in 0..rows.len() {
        let mut e = LinearExpr::empty();
        for (i, &l) in lam.iter().enumerate() {
            e.add(l, gap[i][j]);
        }
        e.add(t, -1.0);
        primal.add_constraint(e, ComparisonOp::Le, 0.0);
    }
    let mut simplex = LinearExpr::empty();
    for &l in &lam {
        simplex.add(l, 1.0);
    }
    primal.add_constraint(simplex, ComparisonOp::Eq, 1.0);
    let sol = primal.solve().map_err(lp_error)?;
    let weights: Vec<f64> = lam.iter().map(|&l| sol.var_value(l).max(0.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut witness = linalg::zeros(d);
    for (w, v) in weights.iter().zip(vertices) {
        witness = linalg::axpy(&witness, w / total, v);
    }
    let z = linalg::sub(&witness, x);
    let value = rows.iter().map(|a| linalg::dot(a, &z)).fold(0.0, f64::max);
    if value <= 0.0 {
        return Ok(TimeValue {
            value: 0.0,
            witness,
            attained: true,
            subgradient: linalg::zeros(d),
        });
    }

    let mut dual = minilp::Problem::new(OptimizationDirection::Maximize);
    let nu_p = dual.add_var(1.0, (0.0, f64::INFINITY));
    let nu_m = dual.add_var(-1.0, (0.0, f64::INFINITY));
    let mu: Vec<_> = rows.iter().map(|_| dual.add_var(0.0, (0.0, f64::INFINITY))).collect();
    for g in &gap {
        let mut e = LinearExpr::empty();
        e.add(nu_p, 1.0);
        e.add(nu_m, -1.0);
        for (&m, &gij) in mu.iter().zip(g) {
            e.add(m, -gij);
        }
        dual.add_constraint(e, ComparisonOp::Le, 0.0);
    }
    let mut mass = LinearExpr::empty();
    for &m in &mu {
        mass.add(m, 1.0);
    }
    dual.add_constraint(mass, ComparisonOp::Le, 1.0);
    let dsol = dual.solve().map_err(lp_error)?;
    let mut subgradient = linalg::zeros(d);
    for (&m, a) in mu.iter().zip(rows) {
        subgradient = linalg::axpy(&subgradient, -dsol.var_value(m).max(0.0), a);
    }
    Ok(TimeValue {
        value,
        witness,
        attained: true,
        subgradient,
    })
}

/// Points of `Q` at which the maximal time is realized, within `tol`.
///
/// Point clouds and V-polytopes list every qualifying vertex; for a ball the
/// set is generally infinite and only the constructed witness is returned.
pub fn farthest_projection(gauge: &GaugeBody, q: &TargetSet, x: &[f64], tol: f64) -> Result<Vec<Point>> {
    let top = max_time(gauge, q, x)?;
    match q {
        TargetSet::PointCloud { points: pts } | TargetSet::VPolytope { vertices: pts } => Ok(pts
            .iter()
            .filter(|p| gauge.eval(&linalg::sub(p, x)) >= top.value - tol)
            .cloned()
            .collect()),
        _ => Ok(vec![top.witness]),
    }
}

pub fn seb_objective(scene: &Scene, x: &[f64]) -> Result<ObjectiveValue> {
    let per_target = scene
        .targets
        .iter()
        .map(|q| max_time(&scene.gauge, q, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(ObjectiveValue::from_parts(per_target))
}

pub fn sib_objective(scene: &Scene, x: &[f64]) -> Result<ObjectiveValue> {
    let per_target = scene
        .targets
        .iter()
        .map(|q| min_time(&scene.gauge, q, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(ObjectiveValue::from_parts(per_target))
}

/// The objective matching the scene's problem.
pub fn objective(scene: &Scene, x: &[f64]) -> Result<ObjectiveValue> {
    match scene.problem {
        Problem::Seb => seb_objective(scene, x),
        Problem::Sib => sib_objective(scene, x),
    }
}

pub fn seb_subgradient(scene: &Scene, x: &[f64]) -> Result<Point> {
    Ok(seb_objective(scene, x)?.subgradient())
}

/// Zero wherever the objective vanishes.
pub fn sib_subgradient(scene: &Scene, x: &[f64]) -> Result<Point> {
    Ok(sib_objective(scene, x)?.subgradient())
}
