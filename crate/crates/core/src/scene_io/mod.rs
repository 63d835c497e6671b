//! Scene and solution files, built-in example scenes and SVG figures.

pub mod builtin;
mod json;
mod scene;
mod svg;

pub use json::{
    emit_scene, emit_solution, parse_scene, parse_solution, CertificateDoc, SolutionDoc, StartDoc, TargetCheckDoc,
    UniquenessDoc,
};
pub use scene::{Problem, Scene, SceneError};
pub use svg::render_svg;
