use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::gauge::{GaugeBody, GaugeKind};
use crate::linalg::Point;
use crate::sets::{ConstraintSet, TargetSet};
use crate::solver::{Classification, Solution, UniquenessReport};

use super::{Problem, Scene, SceneError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum GaugeDoc {
    Euclidean {},
    Ellipsoid { matrix: Vec<Point> },
    Hpolytope { rows: Vec<Point> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ConstraintDoc {
    WholeSpace {},
    Ball { center: Point, radius: f64 },
    Box { lo: Point, hi: Point },
    Hpolytope { rows: Vec<Point>, offsets: Vec<f64> },
    Sphere { center: Point, radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum TargetDoc {
    Points { points: Vec<Point> },
    Ball { center: Point, radius: f64 },
    Vpolytope { vertices: Vec<Point> },
    Halfspace { normal: Point, offset: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    dimension: usize,
    problem: Problem,
    gauge: GaugeDoc,
    constraint: ConstraintDoc,
    targets: Vec<TargetDoc>,
}

/// Per-target line of a serialized certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetCheckDoc {
    pub index: usize,
    /// `None` when the time could not be evaluated.
    pub time: Option<f64>,
    pub violation: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateDoc {
    pub passed: bool,
    pub tolerance: f64,
    pub worst_violation: Option<f64>,
    pub center_violation: Option<f64>,
    pub targets: Vec<TargetCheckDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartDoc {
    pub start: Point,
    pub point: Point,
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniquenessDoc {
    pub classification: Classification,
    pub diameter: f64,
    pub cluster_tol: f64,
    pub samples: Vec<Point>,
}

/// The serialized form of a solve result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionDoc {
    pub problem: Problem,
    pub center: Point,
    pub radius: f64,
    pub active_indices: Vec<usize>,
    pub converged: bool,
    pub certificate: CertificateDoc,
    pub starts: Vec<StartDoc>,
    pub uniqueness: Option<UniquenessDoc>,
    pub warnings: Vec<String>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl SolutionDoc {
    pub fn new(sol: &Solution, report: Option<&UniquenessReport>) -> Self {
        let c = &sol.certificate;
        SolutionDoc {
            problem: sol.problem,
            center: sol.center.clone(),
            radius: sol.radius,
            active_indices: sol.active_indices.clone(),
            converged: sol.converged,
            certificate: CertificateDoc {
                passed: c.passed,
                tolerance: c.tolerance,
                worst_violation: finite(c.worst_violation),
                center_violation: finite(c.center_violation),
                targets: c
                    .targets
                    .iter()
                    .map(|t| TargetCheckDoc {
                        index: t.index,
                        time: finite(t.time),
                        violation: finite(t.violation),
                        passed: t.passed,
                    })
                    .collect(),
            },
            starts: sol
                .per_start_results
                .iter()
                .map(|r| StartDoc {
                    start: r.start.clone(),
                    point: r.point.clone(),
                    value: r.value,
                    converged: r.converged,
                    iterations: r.iterations,
                })
                .collect(),
            uniqueness: report.map(|r| UniquenessDoc {
                classification: r.classification,
                diameter: r.diameter,
                cluster_tol: r.cluster_tol,
                samples: r.minimizer_samples.clone(),
            }),
            warnings: sol.warnings.clone(),
        }
    }
}

/// Pretty printing with every float written as `d.dddddddddddddddde±x`
/// (17 significant digits, enough to round-trip any `f64`).
struct Canonical<'a>(PrettyFormatter<'a>);

impl Formatter for Canonical<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        if v.is_finite() {
            write!(w, "{v:.16e}")
        } else {
            w.write_all(b"null")
        }
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

fn to_canonical<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Canonical(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("serializing to memory cannot fail");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

fn from_json<'de, T: Deserialize<'de>>(text: &'de [u8]) -> Result<T, SceneError> {
    let text = std::str::from_utf8(text).map_err(|e| SceneError::Parse {
        path: ".".into(),
        line: 0,
        column: 0,
        message: format!("input is not UTF-8: {e}"),
    })?;
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        SceneError::Parse {
            path,
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    })?;
    de.end().map_err(|e| SceneError::Parse {
        path: ".".into(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Ok(value)
}

fn geom<T>(context: impl Into<String>, r: crate::error::Result<T>) -> Result<T, SceneError> {
    r.map_err(|source| SceneError::Geom {
        context: context.into(),
        source,
    })
}

/// Parses and validates a scene.
pub fn parse_scene(text: &[u8]) -> Result<Scene, SceneError> {
    let doc: SceneDoc = from_json(text)?;
    let gauge = geom(
        "gauge",
        match doc.gauge {
            GaugeDoc::Euclidean {} => GaugeBody::euclidean(doc.dimension),
            GaugeDoc::Ellipsoid { matrix } => GaugeBody::ellipsoid(matrix),
            GaugeDoc::Hpolytope { rows } => GaugeBody::hpolytope(rows),
        },
    )?;
    let constraint = geom(
        "constraint",
        match doc.constraint {
            ConstraintDoc::WholeSpace {} => Ok(ConstraintSet::WholeSpace),
            ConstraintDoc::Ball { center, radius } => ConstraintSet::ball(center, radius),
            ConstraintDoc::Box { lo, hi } => ConstraintSet::axis_box(lo, hi),
            ConstraintDoc::Hpolytope { rows, offsets } => ConstraintSet::hpolytope(rows, offsets),
            ConstraintDoc::Sphere { center, radius } => ConstraintSet::sphere(center, radius),
        },
    )?;
    let targets = doc
        .targets
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            geom(
                format!("target {i}"),
                match t {
                    TargetDoc::Points { points } => TargetSet::points(points),
                    TargetDoc::Ball { center, radius } => TargetSet::ball(center, radius),
                    TargetDoc::Vpolytope { vertices } => TargetSet::vpolytope(vertices),
                    TargetDoc::Halfspace { normal, offset } => TargetSet::halfspace(normal, offset),
                },
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let scene = Scene {
        name: doc.name,
        dimension: doc.dimension,
        problem: doc.problem,
        gauge,
        constraint,
        targets,
    };
    scene.validate()?;
    Ok(scene)
}

/// Serializes a scene in the format read by [`parse_scene`].
pub fn emit_scene(scene: &Scene) -> String {
    let gauge = match scene.gauge.kind() {
        GaugeKind::EuclideanBall => GaugeDoc::Euclidean {},
        GaugeKind::Ellipsoid { matrix } => GaugeDoc::Ellipsoid { matrix: matrix.clone() },
        GaugeKind::HPolytope { rows } => GaugeDoc::Hpolytope { rows: rows.clone() },
    };
    let constraint = match scene.constraint.clone() {
        ConstraintSet::WholeSpace => ConstraintDoc::WholeSpace {},
        ConstraintSet::Ball { center, radius } => ConstraintDoc::Ball { center, radius },
        ConstraintSet::Box { lo, hi } => ConstraintDoc::Box { lo, hi },
        ConstraintSet::HPolytope { rows, offsets } => ConstraintDoc::Hpolytope { rows, offsets },
        ConstraintSet::Sphere { center, radius } => ConstraintDoc::Sphere { center, radius },
    };
    let targets = scene
        .targets
        .iter()
        .cloned()
        .map(|t| match t {
            TargetSet::PointCloud { points } => TargetDoc::Points { points },
            TargetSet::Ball { center, radius } => TargetDoc::Ball { center, radius },
            TargetSet::VPolytope { vertices } => TargetDoc::Vpolytope { vertices },
            TargetSet::Halfspace { normal, offset } => TargetDoc::Halfspace { normal, offset },
        })
        .collect();
    to_canonical(&SceneDoc {
        name: scene.name.clone(),
        dimension: scene.dimension,
        problem: scene.problem,
        gauge,
        constraint,
        targets,
    })
}

/// Canonical JSON of a solution with an optional uniqueness block.
pub fn emit_solution(sol: &Solution, report: Option<&UniquenessReport>) -> String {
    to_canonical(&SolutionDoc::new(sol, report))
}

pub fn parse_solution(text: &[u8]) -> Result<SolutionDoc, SceneError> {
    from_json(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene_io::builtin;
    use crate::solver::{self, SolverConfig};

    const EX27: &str = r#"{
  "name": "ex27",
  "dimension": 2,
  "problem": "seb",
  "gauge": {"kind": "hpolytope", "rows": [[1, 0], [-1, 0], [0, 1], [0, -1]]},
  "constraint": {"kind": "whole_space"},
  "targets": [
    {"kind": "points", "points": [[0, 1]]},
    {"kind": "points", "points": [[0, -1]]}
  ]
}"#;

    #[test]
    fn parses_square_two_points() {
        let scene = parse_scene(EX27.as_bytes()).unwrap();
        assert_eq!(scene.targets.len(), 2);
        assert_eq!(scene.problem, Problem::Seb);
        assert_eq!(scene, builtin::square_two_points());
    }

    #[test]
    fn round_trip_is_structural_identity() {
        for scene in builtin::builtin_scenes() {
            let text = emit_scene(&scene);
            let back = parse_scene(text.as_bytes()).unwrap();
            assert_eq!(back, scene);
            assert_eq!(emit_scene(&back), text);
        }
        let first = parse_scene(EX27.as_bytes()).unwrap();
        let again = parse_scene(emit_scene(&first).as_bytes()).unwrap();
        assert_eq!(first, again);
    }

    #[test]
    fn unknown_field_names_its_path() {
        let text = EX27.replace(r#""kind": "whole_space""#, r#""kind": "whole_space", "radius": 2"#);
        match parse_scene(text.as_bytes()).unwrap_err() {
            SceneError::Parse { path, line, message, .. } => {
                assert_eq!(path, "constraint");
                assert_eq!(line, 6);
                assert!(message.contains("radius"), "{message}");
            }
            other => panic!("unexpected {other}"),
        }
        let text = EX27.replace(r#""dimension": 2"#, r#""dimension": 2, "dim": 2"#);
        assert!(matches!(parse_scene(text.as_bytes()), Err(SceneError::Parse { .. })));
    }

    #[test]
    fn unknown_kind_is_rejected() {
        let text = EX27.replace(r#""kind": "points", "points": [[0, 1]]"#, r#""kind": "cloud", "points": [[0, 1]]"#);
        match parse_scene(text.as_bytes()).unwrap_err() {
            SceneError::Parse { path, .. } => assert!(path.starts_with("targets[0]"), "{path}"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn seb_with_halfspace_is_invalid() {
        let text = EX27.replace(
            r#"{"kind": "points", "points": [[0, -1]]}"#,
            r#"{"kind": "halfspace", "normal": [0, 1], "offset": -1}"#,
        );
        let err = parse_scene(text.as_bytes()).unwrap_err();
        assert!(matches!(err, SceneError::Invalid(_)));
        assert!(err.to_string().contains("SEB target 1 unbounded"), "{err}");
    }

    #[test]
    fn geometry_errors_name_the_component() {
        let text = EX27.replace(r#"[[0, -1]]"#, r#"[[0, -1, 4]]"#);
        let err = parse_scene(text.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("target 1"), "{err}");
    }

    #[test]
    fn minimal_one_dimensional_scene() {
        let text = r#"{"dimension": 1, "problem": "seb", "gauge": {"kind": "euclidean"},
            "constraint": {"kind": "whole_space"}, "targets": [{"kind": "points", "points": [[0]]}]}"#;
        let scene = parse_scene(text.as_bytes()).unwrap();
        assert_eq!(scene.dimension, 1);
        assert!(scene.name.is_none());
    }

    #[test]
    fn trailing_garbage_is_an_error() {
        let text = format!("{EX27} x");
        assert!(matches!(parse_scene(text.as_bytes()), Err(SceneError::Parse { .. })));
    }

    #[test]
    fn solution_json_carries_radius_and_classification() {
        let cfg = SolverConfig::default();
        let scene = builtin::parallel_halfplanes();
        let sol = solver::solve(&scene, &cfg).unwrap();
        let text = emit_solution(&sol, None);
        let doc = parse_solution(text.as_bytes()).unwrap();
        assert!((doc.radius - 1.0).abs() < 1e-6);
        assert!(text.contains(r#""radius": 1.0000000"#) || text.contains(r#""radius": 9.9999999"#), "{text}");
        assert_eq!(doc.starts.len(), cfg.starts);

        let scene = builtin::square_two_points();
        let (sol, report) = solver::solve_with_probe(&scene, &cfg).unwrap();
        let text = emit_solution(&sol, Some(&report));
        assert!(text.contains(r#""classification": "non_unique""#), "{text}");
        let doc = parse_solution(text.as_bytes()).unwrap();
        assert_eq!(doc.uniqueness.unwrap().classification, Classification::NonUnique);
    }

    #[test]
    fn degenerate_solution_has_zero_radius() {
        let scene = Scene::new(
            Problem::Seb,
            GaugeBody::euclidean(2).unwrap(),
            ConstraintSet::WholeSpace,
            vec![TargetSet::points(vec![vec![0.5, -2.0]]).unwrap()],
        )
        .unwrap();
        let sol = solver::solve(&scene, &SolverConfig::default()).unwrap();
        let doc = parse_solution(emit_solution(&sol, None).as_bytes()).unwrap();
        assert!(doc.radius.abs() < 1e-9, "{}", doc.radius);
        assert!(doc.certificate.passed);
    }

    #[test]
    fn floats_use_seventeen_significant_digits() {
        let text = to_canonical(&vec![0.1f64, -3.0, f64::NAN]);
        assert!(text.contains("1.0000000000000001e-1"), "{text}");
        assert!(text.contains("-3.0000000000000000e0"), "{text}");
        assert!(text.contains("null"));
        let back: Vec<Option<f64>> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, vec![Some(0.1), Some(-3.0), None]);
    }
}
