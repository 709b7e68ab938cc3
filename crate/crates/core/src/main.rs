use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{error::ErrorKind, Args, Parser, Subcommand};

use brakkenet::flow::{run, TrajectorySummary};
use brakkenet::io::{self, DirSink, Frame, IoError, Scenario};
use brakkenet::{validate, FlowError, Point};

const EXIT_RUNTIME: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "brakkenet",
    version,
    about = "Curvature flow of labeled planar networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the flow and write frames, metrics.csv and summary.json
    Run {
        /// Scenario file or bundled scenario name
        scenario: String,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Analyze frame CSV files and print reports as CSV
    Analyze(AnalyzeOpts),
    /// Parse and validate a scenario
    Validate { scenario: String },
    /// Run a bundled scenario
    Demo {
        /// cross90, circle, triple, theta, hexagon6 or two-circles
        name: String,
        #[command(flatten)]
        opts: RunOpts,
    },
}

#[derive(Args)]
struct RunOpts {
    /// Final time
    #[arg(long = "T", value_name = "T", default_value_t = 0.02)]
    t_end: f64,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    j: Option<u32>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct AnalyzeOpts {
    /// Run output directory or a directory of frame_*.csv files
    frames: PathBuf,
    /// Junction angle classification
    #[arg(long)]
    angles: bool,
    /// Tangent-cone fits at junctions
    #[arg(long)]
    cones: bool,
    /// Graph decomposition inside a window
    #[arg(long)]
    graphs: bool,
    #[arg(long, default_value_t = 5.0)]
    angle_tol: f64,
    /// Decreasing radii for cone fits, comma separated
    #[arg(long, value_delimiter = ',', default_values_t = [0.2, 0.1, 0.05])]
    radii: Vec<f64>,
    /// Window center for --graphs as X,Y
    #[arg(long, value_delimiter = ',', num_args = 2, allow_negative_numbers = true, default_values_t = [0.0, 0.0])]
    center: Vec<f64>,
    /// Window radius for --graphs
    #[arg(long, default_value_t = 0.25)]
    radius: f64,
    /// Write angles.csv, cones.csv and graphs.csv here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn runtime(e: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_RUNTIME,
            message: e.to_string(),
        }
    }
    fn invalid(e: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_INVALID,
            message: e.to_string(),
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        if e.is_validation() {
            Failure::invalid(e)
        } else {
            Failure::runtime(e)
        }
    }
}

impl From<FlowError> for Failure {
    fn from(e: FlowError) -> Self {
        match e {
            FlowError::Config(_) | FlowError::NonPositiveDuration => Failure::invalid(e),
            _ => Failure::runtime(e),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse_from(std::env::args_os()) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    let result = match cli.command {
        Command::Run { scenario, opts } => io::load_scenario(&scenario)
            .map_err(Failure::from)
            .and_then(|s| run_scenario(s, &opts)),
        Command::Demo { name, opts } => io::bundled(&name)
            .map_err(Failure::from)
            .and_then(|s| run_scenario(s, &opts)),
        Command::Validate { scenario } => validate_scenario(&scenario),
        Command::Analyze(opts) => analyze(&opts),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("BRAKKENET_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| format!("BRAKKENET_THREADS must be a positive integer, got '{v}'"))?;
    if n == 0 {
        return Err("BRAKKENET_THREADS must be a positive integer, got '0'".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn validate_scenario(arg: &str) -> Result<(), Failure> {
    let s = io::load_scenario(arg)?;
    let census = s.network.junction_census();
    println!(
        "ok: {} ({} regions, {} vertices, {} edges, junctions {:?})",
        s.name,
        s.network.regions,
        s.network.vertices.len(),
        s.network.edges.len(),
        census
    );
    Ok(())
}

fn run_scenario(mut s: Scenario, opts: &RunOpts) -> Result<(), Failure> {
    if let Some(dt) = opts.dt {
        s.flow.dt = dt;
    }
    if let Some(eps) = opts.epsilon {
        s.flow.epsilon = eps;
    }
    if let Some(j) = opts.j {
        s.flow.j = j;
    }
    s.flow.validate()?;
    let report = validate(&s.network);
    if !report.is_ok() {
        return Err(Failure::invalid(report));
    }
    let mut sink = DirSink::create(&opts.out, s.bbox, s.flow.angle_tol)?;
    let result = run(&s.network, &s.flow, opts.t_end, &mut sink);
    sink.finish()?;
    let summary = result?;
    write_summary(&opts.out, &s.name, &summary)?;
    println!("scenario: {}", s.name);
    println!("steps: {}", summary.steps);
    println!("final time: {}", summary.final_time);
    match summary.extinction_time {
        Some(t) => println!("extinction time: {t}"),
        None => println!("extinction time: none"),
    }
    println!("mass: {} -> {}", summary.initial_mass, summary.final_mass);
    println!(
        "flagged frames: {} of {}",
        summary.flagged_frames, summary.frames
    );
    println!("output: {}", opts.out.display());
    Ok(())
}

fn write_summary(dir: &Path, name: &str, s: &TrajectorySummary<f64>) -> Result<(), Failure> {
    let value = serde_json::json!({
        "scenario": name,
        "steps": s.steps,
        "final_time": s.final_time,
        "extinction_time": s.extinction_time,
        "initial_mass": s.initial_mass,
        "final_mass": s.final_mass,
        "max_mass_excess": s.max_mass_excess,
        "max_residual": s.max_residual,
        "energy_deficit_budget": s.energy_deficit_budget,
        "frames": s.frames,
        "flagged_frames": s.flagged_frames,
        "capped": s.capped,
        "halvings": s.halvings,
        "final_junction_census": s.final_network.junction_census(),
    });
    let mut text = serde_json::to_string_pretty(&value).map_err(Failure::runtime)?;
    text.push('\n');
    let path = dir.join("summary.json");
    fs::write(&path, text).map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))
}

fn analyze(opts: &AnalyzeOpts) -> Result<(), Failure> {
    let files = io::frame_files(&opts.frames)?;
    if files.is_empty() {
        return Err(Failure::invalid(format!(
            "no frame_*.csv files under {}",
            opts.frames.display()
        )));
    }
    let frames: Vec<Frame> = files
        .iter()
        .map(|p| io::read_frame(p))
        .collect::<Result<_, _>>()?;
    let any = opts.angles || opts.cones || opts.graphs;
    let mut reports = Vec::new();
    if opts.angles || !any {
        reports.push(("angles.csv", io::angles_csv(&frames, opts.angle_tol)));
    }
    if opts.cones {
        reports.push(("cones.csv", io::cones_csv(&frames, &opts.radii, 0.002)));
    }
    if opts.graphs {
        let cfg = brakkenet::AnalyzerConfig {
            angle_tol: opts.angle_tol,
            ..Default::default()
        };
        let center = Point::new(opts.center[0], opts.center[1]);
        reports.push((
            "graphs.csv",
            io::graphs_csv(&frames, center, opts.radius, &cfg),
        ));
    }
    match &opts.out {
        Some(dir) => {
            fs::create_dir_all(dir)
                .map_err(|e| Failure::runtime(format!("{}: {e}", dir.display())))?;
            for (name, text) in &reports {
                let path = dir.join(name);
                fs::write(&path, text)
                    .map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))?;
            }
        }
        None => {
            let texts: Vec<&str> = reports.iter().map(|r| r.1.as_str()).collect();
            print!("{}", texts.join("\n"));
        }
    }
    Ok(())
}
