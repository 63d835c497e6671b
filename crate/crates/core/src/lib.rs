pub mod cli;
pub mod error;
pub mod gauge;
pub mod linalg;
pub mod oracle;
pub mod polytope;
pub mod quadratic;
pub mod scene_io;
pub mod sets;
pub mod solver;
pub mod timefn;
