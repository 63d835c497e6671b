//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage, I/O or validation error, 2 failed
//! certificate or oracle disagreement.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::oracle::{self, Grid};
use crate::scene_io::{self, builtin, Problem, Scene, SolutionDoc};
use crate::solver::{self, certify_ball, CertificateReport, SolverConfig};

/// Relative disagreement between solver and grid oracle treated as a failure.
pub const ORACLE_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Parser)]
#[command(name = "minball", version, about = "Smallest enclosing and intersecting balls under gauge bodies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a scene and write the solution as JSON.
    Solve {
        scene: PathBuf,
        /// Solution output path (standard output when omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also draw the scene and the optimal ball (planar scenes only).
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Classify the minimizer set as unique or not.
        #[arg(long)]
        probe_uniqueness: bool,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Re-certify a solution file against its scene.
    Verify {
        scene: PathBuf,
        solution: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Compare a solution radius with a brute-force grid minimum.
    Oracle {
        scene: PathBuf,
        /// Solution to compare; solved afresh with default settings when omitted.
        #[arg(long)]
        solution: Option<PathBuf>,
    },
    /// Draw a solved scene as SVG.
    Render {
        scene: PathBuf,
        solution: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Write the built-in example scenes into a directory.
    Examples { dir: PathBuf },
}

#[derive(Debug, Args)]
struct SolverFlags {
    #[arg(long)]
    starts: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Relative objective tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

impl SolverFlags {
    fn config(&self) -> SolverConfig {
        let mut cfg = SolverConfig::default();
        if let Some(v) = self.starts {
            cfg.starts = v;
        }
        if let Some(v) = self.max_iters {
            cfg.max_iters = v;
        }
        if let Some(v) = self.tol {
            cfg.tol_obj = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        cfg
    }
}

/// A failure that maps to exit code 1.
#[derive(Debug)]
struct Failure(String);

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn fail(msg: impl Into<String>) -> Failure {
    Failure(msg.into())
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| fail(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| fail(format!("cannot write {}: {e}", path.display())))
}

fn load_scene(path: &Path) -> Result<Scene, Failure> {
    scene_io::parse_scene(&read(path)?).map_err(|e| fail(format!("{}: {e}", path.display())))
}

fn load_solution(path: &Path, scene: &Scene) -> Result<SolutionDoc, Failure> {
    let doc = scene_io::parse_solution(&read(path)?).map_err(|e| fail(format!("{}: {e}", path.display())))?;
    if doc.center.len() != scene.dimension {
        return Err(fail(format!(
            "{}: center has {} coordinates, scene dimension is {}",
            path.display(),
            doc.center.len(),
            scene.dimension
        )));
    }
    if doc.problem != scene.problem {
        return Err(fail(format!(
            "{}: solution is for a {} problem, scene is {}",
            path.display(),
            doc.problem.as_str(),
            scene.problem.as_str()
        )));
    }
    Ok(doc)
}

fn report_certificate(report: &CertificateReport) {
    for t in &report.targets {
        if !t.passed {
            eprintln!("target {}: time {:.12} exceeds radius by {:.3e}", t.index, t.time, t.violation);
        }
    }
    if report.center_violation > 0.0 {
        eprintln!("center lies {:.3e} from the constraint set", report.center_violation);
    }
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(command: Command) -> Result<i32, Failure> {
    match command {
        Command::Solve {
            scene,
            output,
            svg,
            probe_uniqueness,
            solver,
        } => solve(&scene, output.as_deref(), svg.as_deref(), probe_uniqueness, &solver.config()),
        Command::Verify { scene, solution, tol } => verify(&scene, &solution, tol),
        Command::Oracle { scene, solution } => oracle_check(&scene, solution.as_deref()),
        Command::Render { scene, solution, output } => {
            let scene = load_scene(&scene)?;
            let doc = load_solution(&solution, &scene)?;
            write(&output, &scene_io::render_svg(&scene, &doc.center, doc.radius)?)?;
            Ok(0)
        }
        Command::Examples { dir } => {
            fs::create_dir_all(&dir).map_err(|e| fail(format!("cannot create {}: {e}", dir.display())))?;
            for scene in builtin::builtin_scenes() {
                let name = scene.name.clone().expect("built-in scenes are named");
                let path = dir.join(format!("{name}.json"));
                write(&path, &scene_io::emit_scene(&scene))?;
                eprintln!("wrote {}", path.display());
            }
            Ok(0)
        }
    }
}

fn solve(
    scene_path: &Path,
    output: Option<&Path>,
    svg: Option<&Path>,
    probe: bool,
    cfg: &SolverConfig,
) -> Result<i32, Failure> {
    let scene = load_scene(scene_path)?;
    let (mut sol, report) = if probe {
        let (sol, report) = solver::solve_with_probe(&scene, cfg)?;
        (sol, Some(report))
    } else {
        (solver::solve(&scene, cfg)?, None)
    };
    if scene.problem == Problem::Sib && scene.dimension <= 3 && solver::check_degeneracy(&scene)? {
        sol.warnings
            .push("some feasible point meets every target; the optimal radius is zero".into());
    }
    for w in &sol.warnings {
        eprintln!("warning: {w}");
    }
    let text = scene_io::emit_solution(&sol, report.as_ref());
    match output {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    if let Some(path) = svg {
        write(path, &scene_io::render_svg(&scene, &sol.center, sol.radius)?)?;
    }
    eprintln!("radius {:.12}", sol.radius);
    if let Some(r) = &report {
        eprintln!("minimizer set {} (sample diameter {:.3e})", r.classification.as_str(), r.diameter);
    }
    if !sol.converged {
        eprintln!("warning: the best start did not meet the convergence criterion");
    }
    if sol.certificate.passed {
        Ok(0)
    } else {
        report_certificate(&sol.certificate);
        eprintln!("certification failed");
        Ok(2)
    }
}

fn verify(scene_path: &Path, solution_path: &Path, tol: f64) -> Result<i32, Failure> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(fail(format!("tolerance must be positive, got {tol}")));
    }
    let scene = load_scene(scene_path)?;
    let doc = load_solution(solution_path, &scene)?;
    let report = certify_ball(&scene, &doc.center, doc.radius, tol);
    if report.passed {
        eprintln!("certified: radius {:.12}, worst violation {:.3e}", doc.radius, report.worst_violation);
        Ok(0)
    } else {
        report_certificate(&report);
        eprintln!("certification failed");
        Ok(2)
    }
}

fn oracle_check(scene_path: &Path, solution: Option<&Path>) -> Result<i32, Failure> {
    let scene = load_scene(scene_path)?;
    let (center, radius) = match solution {
        Some(path) => {
            let doc = load_solution(path, &scene)?;
            (doc.center, doc.radius)
        }
        None => {
            let sol = solver::solve(&scene, &SolverConfig::default())?;
            (sol.center, sol.radius)
        }
    };
    let grid = Grid::for_scene(&scene)?;
    let (best, value) = oracle::grid_minimize(&scene, &grid)?;
    let at_center = oracle::feasibility_radius(&scene, &center)?;
    let discrepancy = (radius - value).abs();
    println!("oracle value {value:.12}");
    println!("oracle point {}", format_point(&best));
    println!("solution radius {radius:.12}");
    println!("definitional radius at solution center {at_center:.12}");
    println!("discrepancy {discrepancy:.3e}");
    let limit = ORACLE_TOLERANCE * (1.0 + radius);
    if discrepancy <= limit && (at_center - radius).abs() <= limit {
        Ok(0)
    } else {
        eprintln!("solver and oracle disagree beyond {limit:.3e}");
        Ok(2)
    }
}

fn format_point(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|v| format!("{v:.9}")).collect();
    format!("({})", parts.join(", "))
}
