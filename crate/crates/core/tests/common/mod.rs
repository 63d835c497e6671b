//! Seeded random scenes shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use minball::gauge::GaugeBody;
use minball::linalg::Point;
use minball::scene_io::{Problem, Scene};
use minball::sets::{ConstraintSet, TargetSet};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn point(rng: &mut Rng8, d: usize, half: f64) -> Point {
    (0..d).map(|_| rng.gen_range(-half..half)).collect()
}

pub fn unit(rng: &mut Rng8, d: usize) -> Point {
    loop {
        let p = point(rng, d, 1.0);
        let n = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 0.1 && n <= 1.0 {
            return p.iter().map(|v| v / n).collect();
        }
    }
}

/// Symmetric positive definite `B^T B + 0.2 I`.
pub fn ellipsoid(rng: &mut Rng8, d: usize) -> GaugeBody {
    let b: Vec<Point> = (0..d).map(|_| point(rng, d, 1.0)).collect();
    let a: Vec<Point> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| (0..d).map(|k| b[k][i] * b[k][j]).sum::<f64>() + if i == j { 0.2 } else { 0.0 })
                .collect()
        })
        .collect();
    GaugeBody::ellipsoid(a).unwrap()
}

/// Bounded polygonal (2D) or polyhedral (3D) gauge body around the origin.
pub fn polytope(rng: &mut Rng8, d: usize) -> GaugeBody {
    let rows: Vec<Point> = if d == 2 {
        let k = rng.gen_range(3..=8);
        let spread = rng.gen_range(0.0..0.45) * PI / k as f64;
        (0..k)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / k as f64 + rng.gen_range(-spread..=spread);
                let h = rng.gen_range(0.5..2.0);
                vec![t.cos() / h, t.sin() / h]
            })
            .collect()
    } else {
        let mut rows: Vec<Point> = Vec::new();
        for i in 0..d {
            for sign in [1.0, -1.0] {
                let mut e = vec![0.0; d];
                e[i] = sign / rng.gen_range(0.5..2.0);
                rows.push(e);
            }
        }
        for _ in 0..rng.gen_range(0..5) {
            let u = unit(rng, d);
            let h = rng.gen_range(0.5..2.0);
            rows.push(u.iter().map(|v| v / h).collect());
        }
        rows
    };
    GaugeBody::hpolytope(rows).unwrap()
}

pub fn any_gauge(rng: &mut Rng8, d: usize) -> GaugeBody {
    match rng.gen_range(0..3) {
        0 => GaugeBody::euclidean(d).unwrap(),
        1 => ellipsoid(rng, d),
        _ => polytope(rng, d),
    }
}

pub fn bounded_target(rng: &mut Rng8, d: usize, half: f64) -> TargetSet {
    match rng.gen_range(0..3) {
        0 => {
            let n = rng.gen_range(1..=4);
            TargetSet::points((0..n).map(|_| point(rng, d, half)).collect()).unwrap()
        }
        1 => TargetSet::ball(point(rng, d, half), rng.gen_range(0.0..1.5)).unwrap(),
        _ => {
            let c = point(rng, d, half);
            let n = rng.gen_range(1..=5);
            let verts = (0..n)
                .map(|_| {
                    let off = point(rng, d, 1.5);
                    c.iter().zip(&off).map(|(a, b)| a + b).collect()
                })
                .collect();
            TargetSet::vpolytope(verts).unwrap()
        }
    }
}

/// A convex target: a ball, a polytope, a single point or a halfspace.
pub fn convex_target(rng: &mut Rng8, d: usize, half: f64) -> TargetSet {
    match rng.gen_range(0..4) {
        0 => TargetSet::points(vec![point(rng, d, half)]).unwrap(),
        1 => TargetSet::halfspace(unit(rng, d), rng.gen_range(-half..half)).unwrap(),
        _ => loop {
            let t = bounded_target(rng, d, half);
            if !matches!(t, TargetSet::PointCloud { .. }) {
                break t;
            }
        },
    }
}

pub fn convex_constraint(rng: &mut Rng8, d: usize, half: f64) -> ConstraintSet {
    match rng.gen_range(0..3) {
        0 => ConstraintSet::WholeSpace,
        1 => {
            let c = point(rng, d, half / 2.0);
            let w: Vec<f64> = (0..d).map(|_| rng.gen_range(0.5..half)).collect();
            ConstraintSet::axis_box(
                c.iter().zip(&w).map(|(a, b)| a - b).collect(),
                c.iter().zip(&w).map(|(a, b)| a + b).collect(),
            )
            .unwrap()
        }
        _ => ConstraintSet::ball(point(rng, d, half / 2.0), rng.gen_range(0.5..half)).unwrap(),
    }
}

/// Enclosing scene with a Euclidean gauge and 3 to 6 point-cloud or ball targets.
pub fn euclidean_seb(rng: &mut Rng8) -> Scene {
    let d = rng.gen_range(2..=3);
    let n = rng.gen_range(3..=6);
    let targets = (0..n)
        .map(|_| {
            if rng.gen_bool(0.5) {
                let k = rng.gen_range(1..=4);
                TargetSet::points((0..k).map(|_| point(rng, d, 5.0)).collect()).unwrap()
            } else {
                TargetSet::ball(point(rng, d, 5.0), rng.gen_range(0.1..1.5)).unwrap()
            }
        })
        .collect();
    let constraint = convex_constraint(rng, d, 5.0);
    Scene::new(Problem::Seb, GaugeBody::euclidean(d).unwrap(), constraint, targets).unwrap()
}

/// Intersecting scene of 2 to 5 Euclidean balls that are pairwise at least
/// two units apart, with a Euclidean gauge.
pub fn far_balls_sib(rng: &mut Rng8) -> Scene {
    let d = rng.gen_range(2..=3);
    let n = rng.gen_range(2..=5);
    let mut balls: Vec<(Point, f64)> = Vec::new();
    while balls.len() < n {
        let c = point(rng, d, 6.0);
        let s = rng.gen_range(0.2..1.0);
        let far = balls.iter().all(|(c2, s2)| {
            let dist = c.iter().zip(c2).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            dist >= s + s2 + 2.0
        });
        if far {
            balls.push((c, s));
        }
    }
    let targets = balls.into_iter().map(|(c, s)| TargetSet::ball(c, s).unwrap()).collect();
    let constraint = convex_constraint(rng, d, 6.0);
    Scene::new(Problem::Sib, GaugeBody::euclidean(d).unwrap(), constraint, targets).unwrap()
}

/// Planar scene mixing gauges, targets and constraints, with at most one
/// halfspace target.
pub fn mixed_planar(rng: &mut Rng8) -> Scene {
    let gauge = any_gauge(rng, 2);
    let n = rng.gen_range(2..=4);
    let constraint = convex_constraint(rng, 2, 4.0);
    if rng.gen_bool(0.5) {
        let targets = (0..n).map(|_| bounded_target(rng, 2, 4.0)).collect();
        Scene::new(Problem::Seb, gauge, constraint, targets).unwrap()
    } else {
        let mut halfspaces = 0;
        let targets = (0..n)
            .map(|_| loop {
                let t = convex_target(rng, 2, 4.0);
                if !t.bounded() {
                    if halfspaces == 1 {
                        continue;
                    }
                    halfspaces += 1;
                }
                break t;
            })
            .collect();
        Scene::new(Problem::Sib, gauge, constraint, targets).unwrap()
    }
}
