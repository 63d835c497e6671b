use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::GeomError;
use crate::gauge::GaugeBody;
use crate::linalg::{self, Point};
use crate::sets::{ConstraintSet, TargetSet};

/// Which minimax problem a scene poses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    /// Smallest ball `x + rF` containing every target.
    Seb,
    /// Smallest ball `x + rF` meeting every target.
    Sib,
}

impl Problem {
    pub fn as_str(self) -> &'static str {
        match self {
            Problem::Seb => "seb",
            Problem::Sib => "sib",
        }
    }
}

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("parse error at line {line}, column {column} (field `{path}`): {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid scene: {0}")]
    Invalid(String),

    #[error("{context}: {source}")]
    Geom {
        context: String,
        #[source]
        source: GeomError,
    },
}

/// A full problem instance: gauge, constraint set and targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub name: Option<String>,
    pub dimension: usize,
    pub problem: Problem,
    pub gauge: GaugeBody,
    pub constraint: ConstraintSet,
    pub targets: Vec<TargetSet>,
}

impl Scene {
    pub fn new(
        problem: Problem,
        gauge: GaugeBody,
        constraint: ConstraintSet,
        targets: Vec<TargetSet>,
    ) -> Result<Self, SceneError> {
        let scene = Scene {
            name: None,
            dimension: gauge.dim(),
            problem,
            gauge,
            constraint,
            targets,
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    /// Checks the standing assumptions: shared dimension, non-empty target
    /// list, and bounded targets for the enclosing problem.
    pub fn validate(&self) -> Result<(), SceneError> {
        let d = self.dimension;
        if d == 0 {
            return Err(SceneError::Invalid("dimension must be at least 1".into()));
        }
        if self.gauge.dim() != d {
            return Err(SceneError::Invalid(format!(
                "gauge has dimension {}, scene has {d}",
                self.gauge.dim()
            )));
        }
        let cdim = self.constraint.validate().map_err(|source| SceneError::Geom {
            context: "constraint".into(),
            source,
        })?;
        if let Some(cd) = cdim {
            if cd != d {
                return Err(SceneError::Invalid(format!("constraint has dimension {cd}, scene has {d}")));
            }
        }
        if self.targets.is_empty() {
            return Err(SceneError::Invalid("at least one target is required".into()));
        }
        for (i, t) in self.targets.iter().enumerate() {
            let td = t.validate().map_err(|source| SceneError::Geom {
                context: format!("target {i}"),
                source,
            })?;
            if td != d {
                return Err(SceneError::Invalid(format!("target {i} has dimension {td}, scene has {d}")));
            }
            if self.problem == Problem::Seb && !t.bounded() {
                return Err(SceneError::Invalid(format!(
                    "SEB target {i} unbounded: enclosing-ball targets must be bounded"
                )));
            }
        }
        Ok(())
    }

    /// Hypotheses that do not block solving but weaken the guarantees.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.problem == Problem::Sib
            && !self.constraint.bounded()
            && self.targets.iter().all(|t| !t.bounded())
        {
            out.push(
                "neither the constraint set nor any target is bounded; a smallest intersecting ball may not exist"
                    .to_string(),
            );
        }
        if !self.constraint.convex() {
            out.push("constraint set is not convex; the solver result is a multi-start local optimum".to_string());
        }
        out
    }

    /// Bounding box of the target anchor points together with the
    /// constraint set when it is bounded.
    pub fn anchor_box(&self) -> (Point, Point) {
        let d = self.dimension;
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        let mut grow = |p: &[f64]| {
            for k in 0..d {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        };
        for t in &self.targets {
            for p in t.anchor_points() {
                grow(&p);
            }
        }
        if let Some((clo, chi)) = self.constraint.bounding_box() {
            grow(&clo);
            grow(&chi);
        }
        if lo[0].is_infinite() {
            return (vec![-1.0; d], vec![1.0; d]);
        }
        (lo, hi)
    }

    /// Length scale of the scene: the diagonal of the anchor box (1 when
    /// the box is a single point).
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.anchor_box();
        let diag = linalg::dist(&lo, &hi);
        if diag > 0.0 {
            diag
        } else {
            1.0
        }
    }

    /// Box used for start points and grids: the anchor box widened so every
    /// side is at least one scene diameter long.
    pub fn sampling_box(&self) -> (Point, Point) {
        let (lo, hi) = self.anchor_box();
        let half = 0.5 * self.diameter();
        let mut a = lo.clone();
        let mut b = hi.clone();
        for k in 0..self.dimension {
            let mid = 0.5 * (lo[k] + hi[k]);
            let h = (0.5 * (hi[k] - lo[k])).max(half);
            a[k] = mid - h;
            b[k] = mid + h;
        }
        (a, b)
    }

    /// The scene under `x -> factor * x` (factor > 0).
    pub fn scaled(&self, factor: f64) -> Scene {
        let zero = linalg::zeros(self.dimension);
        Scene {
            name: self.name.clone(),
            dimension: self.dimension,
            problem: self.problem,
            gauge: self.gauge.clone(),
            constraint: self.constraint.transformed(factor, &zero),
            targets: self.targets.iter().map(|t| t.transformed(factor, &zero)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seb_rejects_halfspace() {
        let err = Scene::new(
            Problem::Seb,
            GaugeBody::euclidean(2).unwrap(),
            ConstraintSet::WholeSpace,
            vec![
                TargetSet::points(vec![vec![0.0, 0.0]]).unwrap(),
                TargetSet::halfspace(vec![0.0, 1.0], 1.0).unwrap(),
            ],
        )
        .unwrap_err();
        assert!(err.to_string().contains("SEB target 1 unbounded"), "{err}");
    }

    #[test]
    fn dimension_checks() {
        let err = Scene::new(
            Problem::Sib,
            GaugeBody::euclidean(2).unwrap(),
            ConstraintSet::axis_box(vec![0.0], vec![1.0]).unwrap(),
            vec![TargetSet::points(vec![vec![0.0, 0.0]]).unwrap()],
        )
        .unwrap_err();
        assert!(matches!(err, SceneError::Invalid(_)));
        let err = Scene::new(
            Problem::Sib,
            GaugeBody::euclidean(2).unwrap(),
            ConstraintSet::WholeSpace,
            vec![],
        )
        .unwrap_err();
        assert!(err.to_string().contains("at least one target"));
    }

    #[test]
    fn sampling_box_widens_flat_scenes() {
        let s = Scene::new(
            Problem::Seb,
            GaugeBody::euclidean(2).unwrap(),
            ConstraintSet::WholeSpace,
            vec![
                TargetSet::points(vec![vec![0.0, 1.0]]).unwrap(),
                TargetSet::points(vec![vec![0.0, -1.0]]).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(s.diameter(), 2.0);
        let (lo, hi) = s.sampling_box();
        assert_eq!(lo, vec![-1.0, -1.0]);
        assert_eq!(hi, vec![1.0, 1.0]);
    }

    #[test]
    fn unbounded_sib_warns() {
        let s = Scene::new(
            Problem::Sib,
            GaugeBody::euclidean(2).unwrap(),
            ConstraintSet::WholeSpace,
            vec![TargetSet::halfspace(vec![0.0, 1.0], 1.0).unwrap()],
        )
        .unwrap();
        assert_eq!(s.warnings().len(), 1);
    }
}
