use crate::gauge::GaugeBody;
use crate::sets::{ConstraintSet, TargetSet};

use super::{Problem, Scene};

fn square() -> GaugeBody {
    GaugeBody::hpolytope(vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]])
        .expect("unit square gauge")
}

fn build(name: &str, problem: Problem, gauge: GaugeBody, constraint: ConstraintSet, targets: Vec<TargetSet>) -> Scene {
    Scene::new(problem, gauge, constraint, targets)
        .expect("built-in scene is valid")
        .with_name(name)
}

/// Enclosing a single point from the unit circle: every feasible center is optimal.
pub fn circle_constraint() -> Scene {
    build(
        "ex26",
        Problem::Seb,
        GaugeBody::euclidean(2).unwrap(),
        ConstraintSet::sphere(vec![0.0, 0.0], 1.0).unwrap(),
        vec![TargetSet::points(vec![vec![0.0, 0.0]]).unwrap()],
    )
}

/// Two points `(0, ±1)` enclosed by a square; optimal centers fill `[-1, 1] x {0}`.
pub fn square_two_points() -> Scene {
    build(
        "ex27",
        Problem::Seb,
        square(),
        ConstraintSet::WholeSpace,
        vec![
            TargetSet::points(vec![vec![0.0, 1.0]]).unwrap(),
            TargetSet::points(vec![vec![0.0, -1.0]]).unwrap(),
        ],
    )
}

/// Intersecting the halfplanes `x2 >= 1` and `x2 <= -1`; the whole axis `x2 = 0` is optimal.
pub fn parallel_halfplanes() -> Scene {
    build(
        "ex34",
        Problem::Sib,
        GaugeBody::euclidean(2).unwrap(),
        ConstraintSet::WholeSpace,
        vec![
            TargetSet::halfspace(vec![0.0, -1.0], -1.0).unwrap(),
            TargetSet::halfspace(vec![0.0, 1.0], -1.0).unwrap(),
        ],
    )
}

/// Square balls meeting the disks `B((0, ±2), 1)`.
pub fn square_two_disks() -> Scene {
    build(
        "ex35",
        Problem::Sib,
        square(),
        ConstraintSet::WholeSpace,
        vec![
            TargetSet::ball(vec![0.0, 2.0], 1.0).unwrap(),
            TargetSet::ball(vec![0.0, -2.0], 1.0).unwrap(),
        ],
    )
}

/// All built-in scenes, each carrying its file stem as name.
pub fn builtin_scenes() -> Vec<Scene> {
    vec![circle_constraint(), square_two_points(), parallel_halfplanes(), square_two_disks()]
}
