//! Multi-start minimization of the enclosing and intersecting objectives
//! over the constraint set, with certification and a uniqueness probe.
//!
//! Each start runs projected subgradient descent and then, on convex
//! constraint sets, a central-cut ellipsoid polish whose lower bound
//! certifies the optimality gap of the endpoint.

mod certify;
mod descent;
mod polish;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::GeomError;
use crate::linalg::{self, Point};
use crate::oracle::{self, Grid};
use crate::scene_io::{Problem, Scene, SceneError};
use crate::timefn;

pub use certify::{certify_ball, CertificateReport, TargetCheck};
pub use descent::DescentRun;
pub use polish::Polished;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepRule {
    /// Polyak steps towards the running best minus an adaptive gap,
    /// falling back to diminishing steps when stalled.
    PolyakWithEstimate,
    /// Normalized steps `c / sqrt(k)`.
    Diminishing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub starts: usize,
    pub step_rule: StepRule,
    /// `c` of the diminishing rule; `None` means one scene diameter.
    pub step_constant: Option<f64>,
    /// Relative objective tolerance.
    pub tol_obj: f64,
    pub tol_x: f64,
    pub seed: u64,
    /// `None` means `1e-4` scene diameters.
    pub uniqueness_cluster_tol: Option<f64>,
    /// Ellipsoid polish of each descent endpoint (convex constraint sets).
    pub polish: bool,
    /// Tolerance of the certificate attached to every solution.
    pub certificate_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 5000,
            starts: 16,
            step_rule: StepRule::PolyakWithEstimate,
            step_constant: None,
            tol_obj: 1e-8,
            tol_x: 1e-9,
            seed: 0,
            uniqueness_cluster_tol: None,
            polish: true,
            certificate_tol: 1e-6,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if self.starts == 0 {
            return Err(SolveError::Config("starts must be at least 1".into()));
        }
        if self.max_iters == 0 {
            return Err(SolveError::Config("max_iters must be at least 1".into()));
        }
        for (name, v) in [
            ("tol_obj", Some(self.tol_obj)),
            ("tol_x", Some(self.tol_x)),
            ("certificate_tol", Some(self.certificate_tol)),
            ("step_constant", self.step_constant),
            ("uniqueness_cluster_tol", self.uniqueness_cluster_tol),
        ] {
            if let Some(v) = v {
                if !positive(v) {
                    return Err(SolveError::Config(format!("{name} must be positive, got {v}")));
                }
            }
        }
        Ok(())
    }

    fn cluster_tol(&self, scene: &Scene) -> f64 {
        self.uniqueness_cluster_tol.unwrap_or(1e-4 * scene.diameter())
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("invalid solver configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StartResult {
    pub start: Point,
    pub point: Point,
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Certified optimality gap from the polish, when it ran.
    pub gap: Option<f64>,
    /// Running best of the descent phase.
    pub best_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub problem: Problem,
    pub center: Point,
    pub radius: f64,
    pub active_indices: Vec<usize>,
    pub per_start_results: Vec<StartResult>,
    pub converged: bool,
    pub certificate: CertificateReport,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Unique,
    NonUnique,
    Inconclusive,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Unique => "unique",
            Classification::NonUnique => "non_unique",
            Classification::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessReport {
    pub minimizer_samples: Vec<Point>,
    /// Largest pairwise distance of the samples.
    pub diameter: f64,
    pub cluster_tol: f64,
    pub classification: Classification,
}

/// Start points: the projection of the centroid of target representatives,
/// then uniform samples of the scene's sampling box (seeded).
pub fn start_points(scene: &Scene, cfg: &SolverConfig) -> Result<Vec<Point>, SolveError> {
    let reps: Vec<Point> = scene.targets.iter().map(|t| t.representative()).collect();
    let mut out = vec![scene.constraint.project(&linalg::centroid(&reps, scene.dimension))?];
    let (lo, hi) = scene.sampling_box();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    while out.len() < cfg.starts {
        let p: Point = lo.iter().zip(&hi).map(|(a, b)| rng.gen_range(*a..=*b)).collect();
        out.push(scene.constraint.project(&p)?);
    }
    Ok(out)
}

fn run_start(scene: &Scene, cfg: &SolverConfig, start: Point, step_constant: f64) -> Result<StartResult, SolveError> {
    let run = descent::descend(scene, cfg, &start, step_constant)?;
    let mut result = StartResult {
        start,
        point: run.point,
        value: run.value,
        converged: run.converged,
        iterations: run.iterations,
        gap: None,
        best_trace: run.best_trace,
    };
    if cfg.polish && scene.constraint.convex() {
        let p = polish::polish(scene, &result.point, result.value)?;
        result.iterations += p.iterations;
        result.gap = Some(p.gap());
        result.converged |= p.gap() <= cfg.tol_obj * (1.0 + p.value);
        result.point = p.point;
        result.value = p.value;
    }
    Ok(result)
}

pub fn solve(scene: &Scene, cfg: &SolverConfig) -> Result<Solution, SolveError> {
    scene.validate()?;
    cfg.validate()?;
    let step_constant = cfg.step_constant.unwrap_or_else(|| scene.diameter());
    let starts = start_points(scene, cfg)?;
    let per_start_results = starts
        .into_par_iter()
        .map(|s| run_start(scene, cfg, s, step_constant))
        .collect::<Result<Vec<_>, _>>()?;
    let best = per_start_results
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.value.total_cmp(&b.value).then(i.cmp(j)))
        .map(|(i, _)| i)
        .expect("at least one start");
    let center = scene.constraint.project(&per_start_results[best].point)?;
    let objective = timefn::objective(scene, &center)?;
    let certificate = certify_ball(scene, &center, objective.value, cfg.certificate_tol);
    Ok(Solution {
        problem: scene.problem,
        center,
        radius: objective.value,
        active_indices: objective.active_indices,
        converged: per_start_results[best].converged,
        per_start_results,
        certificate,
        warnings: scene.warnings(),
    })
}

pub fn certify(scene: &Scene, sol: &Solution, tol: f64) -> CertificateReport {
    certify_ball(scene, &sol.center, sol.radius, tol)
}

/// Classifies the near-optimal endpoints of an existing multi-start run.
pub fn classify_starts(scene: &Scene, sol: &Solution, cfg: &SolverConfig) -> UniquenessReport {
    let best = sol.per_start_results.iter().map(|r| r.value).fold(f64::INFINITY, f64::min);
    let cut = best + 10.0 * cfg.tol_obj * (1.0 + best.abs());
    let samples: Vec<Point> = sol
        .per_start_results
        .iter()
        .filter(|r| r.value <= cut)
        .map(|r| r.point.clone())
        .collect();
    let mut diameter: f64 = 0.0;
    for (i, a) in samples.iter().enumerate() {
        for b in &samples[i + 1..] {
            diameter = diameter.max(linalg::dist(a, b));
        }
    }
    let cluster_tol = cfg.cluster_tol(scene);
    let classification = if diameter <= cluster_tol {
        Classification::Unique
    } else if diameter >= 100.0 * cluster_tol {
        Classification::NonUnique
    } else {
        Classification::Inconclusive
    };
    UniquenessReport {
        minimizer_samples: samples,
        diameter,
        cluster_tol,
        classification,
    }
}

/// Solves with at least 32 starts and classifies the minimizer set.
pub fn solve_with_probe(scene: &Scene, cfg: &SolverConfig) -> Result<(Solution, UniquenessReport), SolveError> {
    let mut wide = cfg.clone();
    wide.starts = cfg.starts.max(32);
    let sol = solve(scene, &wide)?;
    let report = classify_starts(scene, &sol, &wide);
    Ok((sol, report))
}

pub fn uniqueness_probe(scene: &Scene, cfg: &SolverConfig) -> Result<UniquenessReport, SolveError> {
    Ok(solve_with_probe(scene, cfg)?.1)
}

/// Whether some point of the constraint set meets every target, i.e. the
/// smallest intersecting radius is zero. Enclosing scenes are never
/// degenerate in this sense.
pub fn check_degeneracy(scene: &Scene) -> Result<bool, SolveError> {
    if scene.problem == Problem::Seb {
        return Ok(false);
    }
    if scene.dimension > 3 {
        return Err(GeomError::UnsupportedDimension(scene.dimension).into());
    }
    let (lo, hi) = scene.sampling_box();
    let resolution = if scene.dimension == 3 { 41 } else { 101 };
    let grid = Grid::new(lo, hi, resolution, 3)?;
    let (x, value) = oracle::grid_minimize(scene, &grid)?;
    if value <= 1e-9 {
        return Ok(true);
    }
    if scene.constraint.convex() {
        let p = polish::polish(scene, &x, value)?;
        return Ok(p.value <= 1e-9);
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::GaugeBody;
    use crate::sets::{ConstraintSet, TargetSet};

    fn square() -> GaugeBody {
        GaugeBody::hpolytope(vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]]).unwrap()
    }

    fn scene(problem: Problem, gauge: GaugeBody, constraint: ConstraintSet, targets: Vec<TargetSet>) -> Scene {
        Scene::new(problem, gauge, constraint, targets).unwrap()
    }

    fn ex27() -> Scene {
        scene(
            Problem::Seb,
            square(),
            ConstraintSet::WholeSpace,
            vec![
                TargetSet::points(vec![vec![0.0, 1.0]]).unwrap(),
                TargetSet::points(vec![vec![0.0, -1.0]]).unwrap(),
            ],
        )
    }

    fn ex34() -> Scene {
        scene(
            Problem::Sib,
            GaugeBody::euclidean(2).unwrap(),
            ConstraintSet::WholeSpace,
            vec![
                TargetSet::halfspace(vec![0.0, -1.0], -1.0).unwrap(),
                TargetSet::halfspace(vec![0.0, 1.0], -1.0).unwrap(),
            ],
        )
    }

    fn ex35() -> Scene {
        scene(
            Problem::Sib,
            square(),
            ConstraintSet::WholeSpace,
            vec![
                TargetSet::ball(vec![0.0, 2.0], 1.0).unwrap(),
                TargetSet::ball(vec![0.0, -2.0], 1.0).unwrap(),
            ],
        )
    }

    #[test]
    fn halfplanes_example() {
        let sol = solve(&ex34(), &SolverConfig::default()).unwrap();
        assert!((sol.radius - 1.0).abs() < 1e-6);
        assert!(sol.center[1].abs() < 1e-4);
        assert!(sol.certificate.passed);
    }

    #[test]
    fn circle_constraint_example() {
        let s = scene(
            Problem::Seb,
            GaugeBody::euclidean(2).unwrap(),
            ConstraintSet::sphere(vec![0.0, 0.0], 1.0).unwrap(),
            vec![TargetSet::points(vec![vec![0.0, 0.0]]).unwrap()],
        );
        let sol = solve(&s, &SolverConfig::default()).unwrap();
        assert!((sol.radius - 1.0).abs() < 1e-6);
        assert!((linalg::norm(&sol.center) - 1.0).abs() < 1e-6);
        assert_eq!(sol.warnings.len(), 1);
    }

    #[test]
    fn two_points_midpoint() {
        let s = scene(
            Problem::Seb,
            GaugeBody::euclidean(2).unwrap(),
            ConstraintSet::WholeSpace,
            vec![
                TargetSet::points(vec![vec![-1.0, 0.0]]).unwrap(),
                TargetSet::points(vec![vec![1.0, 0.0]]).unwrap(),
            ],
        );
        let sol = solve(&s, &SolverConfig::default()).unwrap();
        assert!((sol.radius - 1.0).abs() < 1e-9);
        assert!(linalg::norm(&sol.center) < 1e-6);
        let grid = Grid::for_scene(&s).unwrap();
        let (_, v) = oracle::grid_minimize(&s, &grid).unwrap();
        assert!((v - sol.radius).abs() < 1e-6);
    }

    #[test]
    fn certify_examples() {
        let s = ex27();
        let ok = certify_ball(&s, &[0.0, 0.0], 1.0, 1e-6);
        assert!(ok.passed);
        let bad = certify_ball(&s, &[0.0, 0.0], 0.9, 1e-6);
        assert!(!bad.passed);
        assert!(bad.targets.iter().all(|t| !t.passed));
        assert!((bad.worst_violation - 0.1).abs() < 1e-12);

        let mut empty = s.clone();
        empty.targets.clear();
        let r = certify_ball(&empty, &[0.0, 0.0], 0.0, 1e-6);
        assert!(r.passed);
        assert_eq!(r.worst_violation, 0.0);
    }

    #[test]
    fn uniqueness_examples() {
        let r = uniqueness_probe(&ex27(), &SolverConfig::default()).unwrap();
        assert_eq!(r.classification, Classification::NonUnique);
        assert!(r.diameter >= 1.0);
        let r = uniqueness_probe(&ex35(), &SolverConfig::default()).unwrap();
        assert_eq!(r.classification, Classification::NonUnique);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cloud = (0..10).map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
        let s = scene(
            Problem::Seb,
            GaugeBody::euclidean(2).unwrap(),
            ConstraintSet::WholeSpace,
            vec![TargetSet::points(cloud).unwrap()],
        );
        let r = uniqueness_probe(&s, &SolverConfig::default()).unwrap();
        assert_eq!(r.classification, Classification::Unique, "{}", r.diameter);
        assert!(r.diameter <= 1e-4 * s.diameter());
    }

    #[test]
    fn degeneracy_examples() {
        let overlapping = scene(
            Problem::Sib,
            GaugeBody::euclidean(2).unwrap(),
            ConstraintSet::WholeSpace,
            vec![
                TargetSet::ball(vec![0.0, 0.0], 1.0).unwrap(),
                TargetSet::ball(vec![1.5, 0.0], 1.0).unwrap(),
            ],
        );
        assert!(check_degeneracy(&overlapping).unwrap());
        assert!(!check_degeneracy(&ex34()).unwrap());
        assert!(!check_degeneracy(&ex35()).unwrap());
    }

    #[test]
    fn config_validation() {
        let bad = SolverConfig {
            starts: 0,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            tol_obj: -1.0,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let a = solve(&ex35(), &SolverConfig::default()).unwrap();
        let b = solve(&ex35(), &SolverConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn descent_best_is_monotone_and_feasible() {
        let s = scene(
            Problem::Seb,
            GaugeBody::euclidean(2).unwrap(),
            ConstraintSet::axis_box(vec![2.0, 2.0], vec![3.0, 3.0]).unwrap(),
            vec![
                TargetSet::points(vec![vec![0.0, 0.0], vec![1.0, 0.5]]).unwrap(),
                TargetSet::ball(vec![-1.0, 1.0], 0.5).unwrap(),
            ],
        );
        let cfg = SolverConfig {
            polish: false,
            ..SolverConfig::default()
        };
        let sol = solve(&s, &cfg).unwrap();
        for r in &sol.per_start_results {
            assert!(r.best_trace.windows(2).all(|w| w[1] <= w[0]));
            assert!(s.constraint.distance(&r.point).unwrap() <= 1e-8);
        }
        assert!((sol.center[0] - 2.0).abs() < 1e-8 && (sol.center[1] - 2.0).abs() < 1e-8);
    }
}
