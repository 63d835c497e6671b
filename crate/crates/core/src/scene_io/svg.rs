use std::fmt::Write;

use crate::gauge::GaugeKind;
use crate::linalg::{self, Point};
use crate::polytope;
use crate::sets::{ConstraintSet, TargetSet};

use super::{Scene, SceneError};

const WIDTH: f64 = 640.0;

fn num(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

fn points_attr(poly: &[Point]) -> String {
    poly.iter()
        .map(|p| format!("{},{}", num(p[0]), num(p[1])))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Convex hull of planar points, counter-clockwise (monotone chain).
fn hull(points: &[Point]) -> Vec<Point> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: &Point, a: &Point, b: &Point| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut lower: Vec<Point> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Point> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Sutherland-Hodgman clip of a convex polygon to `{z : <a, z> <= b}`.
fn clip(poly: &[Point], a: &[f64], b: f64) -> Vec<Point> {
    let mut out = Vec::new();
    for i in 0..poly.len() {
        let p = &poly[i];
        let q = &poly[(i + 1) % poly.len()];
        let fp = linalg::dot(a, p) - b;
        let fq = linalg::dot(a, q) - b;
        if fp <= 0.0 {
            out.push(p.clone());
        }
        if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
            let t = fp / (fp - fq);
            out.push(linalg::axpy(p, t, &linalg::sub(q, p)));
        }
    }
    out
}

struct View {
    lo: Point,
    hi: Point,
}

impl View {
    fn rect(&self) -> Vec<Point> {
        vec![
            vec![self.lo[0], self.lo[1]],
            vec![self.hi[0], self.lo[1]],
            vec![self.hi[0], self.hi[1]],
            vec![self.lo[0], self.hi[1]],
        ]
    }

    fn diag(&self) -> f64 {
        linalg::dist(&self.lo, &self.hi)
    }
}

/// A drawing of a planar scene with the ball `center + radius F`.
///
/// The output depends only on its inputs.
pub fn render_svg(scene: &Scene, center: &[f64], radius: f64) -> Result<String, SceneError> {
    if scene.dimension != 2 || center.len() != 2 {
        return Err(SceneError::Invalid(format!(
            "rendering needs a planar scene, got dimension {}",
            scene.dimension
        )));
    }
    let ball = ball_outline(scene, center, radius);
    let (mut lo, mut hi) = scene.sampling_box();
    let reach = ball.extent();
    for k in 0..2 {
        lo[k] = lo[k].min(center[k] - reach[k]);
        hi[k] = hi[k].max(center[k] + reach[k]);
        let pad = 0.05 * (hi[k] - lo[k]).max(1e-9);
        lo[k] -= pad;
        hi[k] += pad;
    }
    let view = View { lo, hi };
    let (w, h) = (view.hi[0] - view.lo[0], view.hi[1] - view.lo[1]);
    let height = WIDTH * h / w;
    let dot = 0.006 * view.diag();

    let mut s = String::new();
    writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="{} {} {} {}">"#,
        num(WIDTH),
        num(height),
        num(view.lo[0]),
        num(view.lo[1]),
        num(w),
        num(h)
    )
    .unwrap();
    if let Some(name) = &scene.name {
        writeln!(s, "<title>{}</title>", escape(name)).unwrap();
    }
    writeln!(
        s,
        r#"<g transform="matrix(1 0 0 -1 0 {})" fill="none" stroke-width="1.5">"#,
        num(view.lo[1] + view.hi[1])
    )
    .unwrap();

    if let Some(el) = constraint_element(&scene.constraint, &view) {
        writeln!(s, "{el}").unwrap();
    }
    for (i, t) in scene.targets.iter().enumerate() {
        for el in target_elements(t, &view, dot) {
            writeln!(s, r#"<g class="target" data-index="{i}">{el}</g>"#).unwrap();
        }
    }
    writeln!(s, "{}", ball.element()).unwrap();
    writeln!(
        s,
        r##"<circle class="center" cx="{}" cy="{}" r="{}" fill="#c0392b" stroke="none"/>"##,
        num(center[0]),
        num(center[1]),
        num(dot)
    )
    .unwrap();
    writeln!(s, "</g>\n</svg>").unwrap();
    Ok(s)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

const STROKE: &str = r#"vector-effect="non-scaling-stroke""#;

fn constraint_element(c: &ConstraintSet, view: &View) -> Option<String> {
    let style = format!(r##"class="constraint" stroke="#7f8c8d" stroke-dasharray="6 4" {STROKE}"##);
    match c {
        ConstraintSet::WholeSpace => None,
        ConstraintSet::Ball { center, radius } | ConstraintSet::Sphere { center, radius } => Some(format!(
            r#"<circle {style} cx="{}" cy="{}" r="{}"/>"#,
            num(center[0]),
            num(center[1]),
            num(*radius)
        )),
        ConstraintSet::Box { lo, hi } => Some(format!(
            r#"<rect {style} x="{}" y="{}" width="{}" height="{}"/>"#,
            num(lo[0]),
            num(lo[1]),
            num(hi[0] - lo[0]),
            num(hi[1] - lo[1])
        )),
        ConstraintSet::HPolytope { rows, offsets } => {
            let mut poly = view.rect();
            for (a, b) in rows.iter().zip(offsets) {
                poly = clip(&poly, a, *b);
            }
            Some(format!(r#"<polygon {style} points="{}"/>"#, points_attr(&poly)))
        }
    }
}

fn target_elements(t: &TargetSet, view: &View, dot: f64) -> Vec<String> {
    let style = format!(r##"stroke="#2c3e50" fill="#aed6f1" fill-opacity="0.5" {STROKE}"##);
    match t {
        TargetSet::PointCloud { points } => points
            .iter()
            .map(|p| {
                format!(
                    r##"<circle cx="{}" cy="{}" r="{}" fill="#2c3e50" stroke="none"/>"##,
                    num(p[0]),
                    num(p[1]),
                    num(dot)
                )
            })
            .collect(),
        TargetSet::Ball { center, radius } => vec![format!(
            r#"<circle {style} cx="{}" cy="{}" r="{}"/>"#,
            num(center[0]),
            num(center[1]),
            num(*radius)
        )],
        TargetSet::VPolytope { vertices } => {
            let poly = hull(vertices);
            if poly.len() < 3 {
                vec![format!(r#"<polyline {style} points="{}"/>"#, points_attr(&poly))]
            } else {
                vec![format!(r#"<polygon {style} points="{}"/>"#, points_attr(&poly))]
            }
        }
        TargetSet::Halfspace { normal, offset } => {
            let poly = clip(&view.rect(), normal, *offset);
            vec![format!(r#"<polygon {style} points="{}"/>"#, points_attr(&poly))]
        }
    }
}

enum BallOutline {
    Circle { c: Point, r: f64 },
    Polygon(Vec<Point>),
    Ellipse { c: Point, rx: f64, ry: f64, degrees: f64 },
}

fn ball_outline(scene: &Scene, center: &[f64], radius: f64) -> BallOutline {
    match scene.gauge.kind() {
        GaugeKind::EuclideanBall => BallOutline::Circle {
            c: center.to_vec(),
            r: radius,
        },
        GaugeKind::HPolytope { rows } => {
            let vertices = match scene.gauge.vertices() {
                Some(v) => v.to_vec(),
                None => polytope::enumerate_vertices(rows, &vec![1.0; rows.len()], 2).unwrap_or_default(),
            };
            let ordered = polytope::order_polygon(&vertices);
            BallOutline::Polygon(ordered.iter().map(|v| linalg::axpy(center, radius, v)).collect())
        }
        GaugeKind::Ellipsoid { .. } => {
            let sp = scene.gauge.spectral().expect("ellipsoid spectral data");
            let v0 = &sp.eigenvectors[0];
            BallOutline::Ellipse {
                c: center.to_vec(),
                rx: radius / sp.eigenvalues[0].sqrt(),
                ry: radius / sp.eigenvalues[1].sqrt(),
                degrees: v0[1].atan2(v0[0]).to_degrees(),
            }
        }
    }
}

impl BallOutline {
    /// Half-widths of an axis-aligned box around the outline's center.
    fn extent(&self) -> [f64; 2] {
        match self {
            BallOutline::Circle { r, .. } => [*r, *r],
            BallOutline::Polygon(poly) => {
                let c = linalg::centroid(poly, 2);
                let mut e = [0.0f64; 2];
                for p in poly {
                    e[0] = e[0].max((p[0] - c[0]).abs() * 2.0);
                    e[1] = e[1].max((p[1] - c[1]).abs() * 2.0);
                }
                e
            }
            BallOutline::Ellipse { rx, ry, .. } => [rx.max(*ry), rx.max(*ry)],
        }
    }

    fn element(&self) -> String {
        let style = format!(r##"class="ball" stroke="#c0392b" {STROKE}"##);
        match self {
            BallOutline::Circle { c, r } => format!(
                r#"<circle {style} cx="{}" cy="{}" r="{}"/>"#,
                num(c[0]),
                num(c[1]),
                num(*r)
            ),
            BallOutline::Polygon(poly) => format!(r#"<polygon {style} points="{}"/>"#, points_attr(poly)),
            BallOutline::Ellipse { c, rx, ry, degrees } => format!(
                r#"<ellipse {style} cx="{}" cy="{}" rx="{}" ry="{}" transform="rotate({} {} {})"/>"#,
                num(c[0]),
                num(c[1]),
                num(*rx),
                num(*ry),
                num(*degrees),
                num(c[0]),
                num(c[1])
            ),
        }
    }
}
