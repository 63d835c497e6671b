//! Central-cut ellipsoid method on the exact penalty
//! `phi(x) = f(x) + 2 l dist(x, Omega)`, started around a descent endpoint.
//!
//! `l` is the Lipschitz constant of the objective, so minimizers of `phi`
//! over the whole space are minimizers of `f` over `Omega`. Each step also
//! yields the lower bound `phi(c) - sqrt(g^T P g)` on the optimum.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::linalg::{self, Point};
use crate::scene_io::Scene;
use crate::timefn;

#[derive(Debug, Clone, PartialEq)]
pub struct Polished {
    pub point: Point,
    pub value: f64,
    pub lower_bound: f64,
    pub iterations: usize,
}

impl Polished {
    pub fn gap(&self) -> f64 {
        self.value - self.lower_bound
    }
}

/// Relative optimality gap at which the polish stops.
const GAP_TOL: f64 = 1e-13;

struct Penalized {
    phi: f64,
    grad: Point,
    feasible: Point,
    feasible_value: f64,
}

fn penalized(scene: &Scene, weight: f64, x: &[f64]) -> Result<Penalized> {
    let o = timefn::objective(scene, x)?;
    let p = scene.constraint.project(x)?;
    let dist = linalg::dist(x, &p);
    let mut grad = o.exact_subgradient();
    if dist > 0.0 {
        grad = linalg::axpy(&grad, weight / dist, &linalg::sub(x, &p));
        let feasible_value = timefn::objective(scene, &p)?.value;
        Ok(Penalized {
            phi: o.value + weight * dist,
            grad,
            feasible: p,
            feasible_value,
        })
    } else {
        Ok(Penalized {
            phi: o.value,
            grad,
            feasible: p,
            feasible_value: o.value,
        })
    }
}

/// Largest Euclidean norm of a point of the gauge body (an upper bound).
fn body_radius(scene: &Scene) -> f64 {
    let d = scene.dimension;
    let mut m: f64 = 0.0;
    for i in 0..d {
        let e = linalg::unit(d, i);
        m = m.max(scene.gauge.support_point(&e).0);
        m = m.max(scene.gauge.support_point(&linalg::scale(&e, -1.0)).0);
    }
    m * (d as f64).sqrt()
}

pub(crate) fn polish(scene: &Scene, x0: &[f64], f0: f64) -> Result<Polished> {
    let d = scene.dimension;
    let weight = 2.0 * scene.gauge.lipschitz();
    let radius = 2.0 * body_radius(scene) * f0 + scene.diameter();
    let mut best = Polished {
        point: x0.to_vec(),
        value: f0,
        lower_bound: f64::NEG_INFINITY,
        iterations: 0,
    };
    if f0 == 0.0 {
        best.lower_bound = 0.0;
        return Ok(best);
    }
    let record = |best: &mut Polished, ev: &Penalized| {
        if ev.feasible_value < best.value {
            best.value = ev.feasible_value;
            best.point = ev.feasible.clone();
        }
    };
    let done = |best: &Polished| best.gap() <= GAP_TOL * (1.0 + best.value.abs());

    if d == 1 {
        let (mut lo, mut hi) = (x0[0] - radius, x0[0] + radius);
        for it in 0..400 {
            best.iterations = it + 1;
            let c = 0.5 * (lo + hi);
            let ev = penalized(scene, weight, &[c])?;
            record(&mut best, &ev);
            let g = ev.grad[0];
            let half = 0.5 * (hi - lo);
            best.lower_bound = best.lower_bound.max(ev.phi - g.abs() * half);
            if g == 0.0 {
                best.lower_bound = best.lower_bound.max(ev.phi);
                break;
            }
            if done(&best) || half <= 1e-16 * (1.0 + c.abs()) {
                break;
            }
            if g > 0.0 {
                hi = c;
            } else {
                lo = c;
            }
        }
        best.lower_bound = best.lower_bound.min(best.value);
        return Ok(best);
    }

    let n = d as f64;
    let mut c = DVector::from_column_slice(x0);
    let mut p = DMatrix::<f64>::identity(d, d) * (radius * radius);
    let cap = 80 * d * (d + 1) + 200;
    let expand = n * n / (n * n - 1.0);
    for it in 0..cap {
        best.iterations = it + 1;
        let ev = penalized(scene, weight, c.as_slice())?;
        record(&mut best, &ev);
        let g = DVector::from_column_slice(&ev.grad);
        let pg = &p * &g;
        let gpg = g.dot(&pg);
        if gpg == 0.0 && g.iter().all(|v| *v == 0.0) {
            best.lower_bound = best.lower_bound.max(ev.phi);
            break;
        }
        if !(gpg.is_finite() && gpg > 0.0) {
            break;
        }
        let root = gpg.sqrt();
        best.lower_bound = best.lower_bound.max(ev.phi - root);
        if done(&best) {
            break;
        }
        let b = pg / root;
        c -= &b / (n + 1.0);
        p = (&p - (&b * b.transpose()) * (2.0 / (n + 1.0))) * expand;
        p = (&p + p.transpose()) * 0.5;
    }
    best.lower_bound = best.lower_bound.min(best.value);
    Ok(best)
}

