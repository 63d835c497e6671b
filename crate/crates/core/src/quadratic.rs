//! Extremes of a quadratic over the unit ball, in an eigenbasis.
//!
//! Minimizes `sum_i lambda_i w_i^2 + 2 sum_i g_i w_i` over `|w| <= 1` (or over
//! the unit sphere). The Lagrange multiplier is located by bisection on the
//! secular equation; the degenerate ("hard") case is completed along the
//! lowest eigenvector.

use crate::linalg::{self, Point};

pub fn minimize_on_ball(lambda: &[f64], g: &[f64], sphere_only: bool) -> Point {
    let n = lambda.len();
    let lmin = lambda.iter().cloned().fold(f64::INFINITY, f64::min);
    let lmax = lambda.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let gnorm = linalg::norm(g);
    let spread = lmax.abs().max(lmin.abs()).max(gnorm).max(f64::MIN_POSITIVE);

    if !sphere_only && lmin > 0.0 {
        let w: Point = g.iter().zip(lambda).map(|(gi, li)| -gi / li).collect();
        if linalg::norm(&w) <= 1.0 {
            return w;
        }
    }

    let shifted = |mu: f64| -> Point {
        g.iter()
            .zip(lambda)
            .map(|(gi, li)| -gi / (li + mu))
            .collect()
    };

    // Hard case: the gradient has no weight on the lowest eigenspace and the
    // remaining components already fit inside the ball.
    let near_min = |li: f64| li - lmin <= 1e-12 * spread;
    let g_on_min: f64 = g
        .iter()
        .zip(lambda)
        .filter(|(_, li)| near_min(**li))
        .map(|(gi, _)| gi * gi)
        .sum::<f64>()
        .sqrt();
    let mu_floor = if sphere_only { -lmin } else { (-lmin).max(0.0) };
    if g_on_min <= 1e-14 * spread && mu_floor == -lmin {
        let mut w = vec![0.0; n];
        let mut norm2 = 0.0;
        for i in 0..n {
            if !near_min(lambda[i]) {
                w[i] = -g[i] / (lambda[i] - lmin);
                norm2 += w[i] * w[i];
            }
        }
        if norm2 <= 1.0 {
            let k = (0..n).find(|&i| near_min(lambda[i])).unwrap_or(0);
            w[k] += (1.0 - norm2).max(0.0).sqrt();
            return w;
        }
    }

    if gnorm == 0.0 {
        // g = 0 and not the hard case: only reachable with mu_floor > -lmin,
        // where the unconstrained minimizer is the origin.
        return vec![0.0; n];
    }

    let mut lo = mu_floor;
    let mut hi = mu_floor.max(-lmin) + gnorm;
    if lo > -lmin && linalg::norm(&shifted(lo)) <= 1.0 {
        return shifted(lo);
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if linalg::norm(&shifted(mid)) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let w = shifted(hi);
    let nw = linalg::norm(&w);
    if nw > 0.0 && sphere_only {
        linalg::scale(&w, 1.0 / nw)
    } else {
        w
    }
}

/// Maximizes `sum_i lambda_i w_i^2 + 2 sum_i g_i w_i` over `|w| <= 1` for
/// `lambda >= 0`; the maximum of a convex quadratic sits on the sphere.
pub fn maximize_on_ball(lambda: &[f64], g: &[f64]) -> Point {
    let neg_l: Point = lambda.iter().map(|l| -l).collect();
    let neg_g: Point = g.iter().map(|v| -v).collect();
    minimize_on_ball(&neg_l, &neg_g, true)
}
