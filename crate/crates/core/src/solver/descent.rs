//! Projected subgradient descent from a single start.

use crate::error::Result;
use crate::linalg::{self, Point};
use crate::scene_io::Scene;
use crate::timefn;

use super::{SolverConfig, StepRule};

/// Outcome of one descent run.
#[derive(Debug, Clone, PartialEq)]
pub struct DescentRun {
    pub point: Point,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Best objective after each iteration (non-increasing).
    pub best_trace: Vec<f64>,
}

/// Iterations without a new best after which the Polyak target gap halves.
const PATIENCE: usize = 25;
/// Window of the convergence test on the running best.
const WINDOW: usize = 100;

pub(crate) fn descend(scene: &Scene, cfg: &SolverConfig, start: &[f64], step_constant: f64) -> Result<DescentRun> {
    let mut x = scene.constraint.project(start)?;
    let first = timefn::objective(scene, &x)?;
    let mut fx = first.value;
    let mut g = first.subgradient();
    let mut best_x = x.clone();
    let mut best_f = fx;
    let mut best_trace = Vec::with_capacity(cfg.max_iters.min(1 << 16));
    let mut delta = 0.5 * fx.max(1e-3 * step_constant);
    let mut since_best = 0;
    let mut converged = false;
    let mut iterations = 0;

    for k in 0..cfg.max_iters {
        iterations = k + 1;
        let gn2 = linalg::dot(&g, &g);
        if gn2 == 0.0 {
            converged = true;
            best_trace.push(best_f);
            break;
        }
        let diminishing = step_constant / ((k + 1) as f64).sqrt() / gn2.sqrt();
        let alpha = match cfg.step_rule {
            StepRule::PolyakWithEstimate => {
                let a = (fx - best_f + delta) / gn2;
                if a.is_finite() && a > 0.0 && since_best < 4 * PATIENCE {
                    a
                } else {
                    diminishing
                }
            }
            StepRule::Diminishing => diminishing,
        };
        let next = scene.constraint.project(&linalg::axpy(&x, -alpha, &g))?;
        let moved = linalg::dist(&next, &x);
        x = next;
        let o = timefn::objective(scene, &x)?;
        fx = o.value;
        g = o.subgradient();
        if fx < best_f {
            best_f = fx;
            best_x = x.clone();
            since_best = 0;
        } else {
            since_best += 1;
            if since_best % PATIENCE == 0 {
                delta *= 0.5;
            }
        }
        best_trace.push(best_f);

        if moved <= cfg.tol_x * (1.0 + linalg::norm(&x)) && since_best == 0 {
            converged = true;
            break;
        }
        if moved == 0.0 {
            converged = true;
            break;
        }
        if best_trace.len() > WINDOW {
            let earlier = best_trace[best_trace.len() - 1 - WINDOW];
            if earlier - best_f < cfg.tol_obj * (1.0 + best_f) {
                converged = true;
                break;
            }
        }
    }
    Ok(DescentRun {
        point: best_x,
        value: best_f,
        iterations,
        converged,
        best_trace,
    })
}
