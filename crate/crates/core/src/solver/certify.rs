//! Geometric certificate of a candidate ball `center + radius F`.

use crate::scene_io::{Problem, Scene};
use crate::timefn;

#[derive(Debug, Clone, PartialEq)]
pub struct TargetCheck {
    pub index: usize,
    /// Maximal (enclosing) or minimal (intersecting) time at the center.
    pub time: f64,
    /// `max(0, time - radius)`.
    pub violation: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub passed: bool,
    pub tolerance: f64,
    pub radius: f64,
    pub worst_violation: f64,
    /// Euclidean distance from the center to the constraint set.
    pub center_violation: f64,
    pub targets: Vec<TargetCheck>,
}

/// Checks that `center + radius F` encloses (or meets) every target and that
/// the center lies in the constraint set, each within `tol * max(1, radius)`.
pub fn certify_ball(scene: &Scene, center: &[f64], radius: f64, tol: f64) -> CertificateReport {
    let slack = tol * radius.max(1.0);
    let targets: Vec<TargetCheck> = scene
        .targets
        .iter()
        .enumerate()
        .map(|(index, q)| {
            let time = match scene.problem {
                Problem::Seb => timefn::max_time(&scene.gauge, q, center),
                Problem::Sib => timefn::min_time(&scene.gauge, q, center),
            }
            .map(|t| t.value)
            .unwrap_or(f64::INFINITY);
            let violation = (time - radius).max(0.0);
            TargetCheck {
                index,
                time,
                violation,
                passed: violation <= slack,
            }
        })
        .collect();
    let center_violation = scene.constraint.distance(center).unwrap_or(f64::INFINITY);
    let worst_violation = targets.iter().map(|t| t.violation).fold(0.0, f64::max);
    let radius_ok = radius >= 0.0 && radius.is_finite();
    CertificateReport {
        passed: radius_ok && targets.iter().all(|t| t.passed) && center_violation <= slack,
        tolerance: tol,
        radius,
        worst_violation,
        center_violation,
        targets,
    }
}
