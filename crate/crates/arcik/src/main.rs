//! `arcik` — scenario solves, path tracking, scaling benchmarks, grid
//! precomputation, and random world generation from the command line.
//!
//! Exit codes: 0 success, 1 malformed input, 2 unreachable target,
//! 3 solve finished without satisfying the constraints.

use arcik::field::{build_grid, signed_distance, Obstacle};
use arcik::geometry::{Aabb, Vec3};
use arcik::optimize::{SolveOutcome, SolverConfig};
use arcik::scenario::{spline_samples_csv, ResultRecord, ScenarioFile};
use arcik::solver::{scaling_experiment, solve_with, track_mode, Scenario};
use arcik::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "arcik", version, about = "Continuum-manipulator IK over arc splines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario file and emit a result record.
    Solve(SolveArgs),
    /// Track the scenario's waypoint list sequentially with warm starts.
    Track(TrackArgs),
    /// Segment-count scaling benchmark.
    Bench(BenchArgs),
    /// Precompute the potential grid of a scenario and write it to disk.
    Grid(GridArgs),
    /// Generate a seeded random sphere-world scenario file.
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct SolveArgs {
    scenario: PathBuf,
    /// Record format.
    #[arg(long, value_enum, default_value = "json")]
    out: OutFormat,
    /// Write the record here instead of stdout.
    #[arg(long)]
    record: Option<PathBuf>,
    /// Write a u-sweep polyline CSV of the solved spline.
    #[arg(long)]
    emit_spline: Option<PathBuf>,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Zero wall-clock fields so outputs are byte-reproducible.
    #[arg(long)]
    stable_output: bool,
}

#[derive(Args)]
struct TrackArgs {
    scenario: PathBuf,
    /// Output directory for waypoints.csv and spline_samples.csv.
    #[arg(long)]
    out: PathBuf,
    /// Re-solve every waypoint from scratch instead of warm-starting.
    #[arg(long)]
    cold: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Zero wall-clock fields so outputs are byte-reproducible.
    #[arg(long)]
    stable_output: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Segment-count range, e.g. 5..10 (inclusive).
    #[arg(long, default_value = "5..10")]
    segments: String,
    #[arg(long, default_value_t = 20)]
    repeats: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Scenario to benchmark; defaults to the bundled obstacle world.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Write the CSV table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    scenario: PathBuf,
    /// Node spacing in mm; defaults to a quarter of the influence distance.
    #[arg(long)]
    spacing: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    /// Number of spherical obstacles.
    #[arg(long, default_value_t = 10)]
    spheres: usize,
    /// Obstacle radius range, e.g. 10..30.
    #[arg(long, default_value = "10..30")]
    radius_range: String,
    /// Workspace box as x0,y0,z0,x1,y1,z1.
    #[arg(long, default_value = "-400,-400,-400,400,400,100")]
    bounds: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also generate this many end-effector waypoints on a lateral sweep.
    #[arg(long)]
    waypoints: Option<usize>,
}

const BUNDLED_BENCH: &str = include_str!("../fixtures/bench.json");

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Ok(threads) = std::env::var("ARCIK_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        } else {
            eprintln!("ignoring unparseable ARCIK_THREADS={threads}");
        }
    }
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Track(args) => cmd_track(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Grid(args) => cmd_grid(args),
        Command::Gen(args) => cmd_gen(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::UnreachableTarget { .. } => 2,
        _ => 1,
    }
}

fn load(path: &Path, seed: Option<u64>) -> arcik::Result<(ScenarioFile, Scenario, SolverConfig)> {
    let file = ScenarioFile::from_path(path)?;
    let mut scenario = file.scenario();
    if let Some(s) = seed {
        scenario.seed = s;
    }
    let config = file.solver_config();
    Ok((file, scenario, config))
}

fn write_or_print(path: &Option<PathBuf>, content: &str) -> arcik::Result<()> {
    match path {
        Some(p) => std::fs::write(p, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> arcik::Result<ExitCode> {
    let (file, scenario, config) = load(&args.scenario, args.seed)?;
    let (spline, status) = solve_with(&scenario, &config)?;
    let mut record = ResultRecord::new(
        &file.display_name(),
        &scenario,
        &spline,
        &status,
        config.samples_per_segment,
    );
    if args.stable_output {
        record = record.stabilized();
    }
    let content = match args.out {
        OutFormat::Json => record.to_json(),
        OutFormat::Csv => format!("{}{}", ResultRecord::csv_header(), record.to_csv_row()),
    };
    write_or_print(&args.record, &content)?;
    if let Some(path) = &args.emit_spline {
        std::fs::write(path, spline_samples_csv(&spline, 16))?;
    }
    eprintln!(
        "{}: {} after {} iterations ({} us)",
        file.display_name(),
        status.outcome.as_str(),
        status.iterations,
        status.wall_time.as_micros()
    );
    if status.outcome != SolveOutcome::ConstraintsSatisfied {
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_track(args: TrackArgs) -> arcik::Result<ExitCode> {
    let (file, scenario, config) = load(&args.scenario, args.seed)?;
    let waypoints = file
        .waypoints
        .clone()
        .filter(|w| !w.is_empty())
        .ok_or_else(|| Error::InvalidScenario("scenario has no waypoints".into()))?;
    let run = track_mode(&scenario, &waypoints, &config, !args.cold)?;

    std::fs::create_dir_all(&args.out)?;
    let mut per_waypoint = String::from("index,wall_time_us,iterations,outcome\n");
    for (i, st) in run.per_waypoint.iter().enumerate() {
        let us = if args.stable_output { 0 } else { st.wall_time.as_micros() };
        per_waypoint.push_str(&format!(
            "{i},{us},{},{}\n",
            st.iterations,
            st.outcome.as_str()
        ));
    }
    std::fs::write(args.out.join("waypoints.csv"), per_waypoint)?;

    let mut samples = String::from("waypoint,index,x,y,z\n");
    for (wi, spline) in run.configurations.iter().enumerate() {
        for (i, p) in spline.sample_body(16).iter().enumerate() {
            samples.push_str(&format!("{wi},{i},{:.9},{:.9},{:.9}\n", p.x, p.y, p.z));
        }
    }
    std::fs::write(args.out.join("spline_samples.csv"), samples)?;

    let satisfied = run
        .per_waypoint
        .iter()
        .filter(|s| s.outcome == SolveOutcome::ConstraintsSatisfied)
        .count();
    eprintln!("tracked {}/{} waypoints", satisfied, run.per_waypoint.len());
    if satisfied != run.per_waypoint.len() {
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_range(text: &str) -> arcik::Result<(usize, usize)> {
    let (lo, hi) = text
        .split_once("..")
        .ok_or_else(|| Error::InvalidScenario(format!("bad range {text:?}, expected a..b")))?;
    let lo: usize = lo
        .trim()
        .parse()
        .map_err(|_| Error::InvalidScenario(format!("bad range start {lo:?}")))?;
    let hi: usize = hi
        .trim()
        .parse()
        .map_err(|_| Error::InvalidScenario(format!("bad range end {hi:?}")))?;
    if lo == 0 || hi < lo {
        return Err(Error::InvalidScenario(format!("bad range {text:?}")));
    }
    Ok((lo, hi))
}

fn cmd_bench(args: BenchArgs) -> arcik::Result<ExitCode> {
    let (lo, hi) = parse_range(&args.segments)?;
    if args.repeats == 0 {
        return Err(Error::InvalidScenario("repeats must be at least 1".into()));
    }
    let file = match &args.scenario {
        Some(path) => ScenarioFile::from_path(path)?,
        None => ScenarioFile::from_json(BUNDLED_BENCH)?,
    };
    let mut scenario = file.scenario();
    if let Some(s) = args.seed {
        scenario.seed = s;
    }
    let config = file.solver_config();
    let n_values: Vec<usize> = (lo..=hi).collect();
    let rows = scaling_experiment(&scenario, &n_values, args.repeats, &config)?;
    let mut csv = String::from("n,mean_time_per_iteration_us,mean_iterations,mean_total_time_us\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{:.3},{:.2},{:.1}\n",
            r.n_segments, r.mean_time_per_iteration_us, r.mean_iterations, r.mean_total_time_us
        ));
    }
    write_or_print(&args.out, &csv)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_grid(args: GridArgs) -> arcik::Result<ExitCode> {
    let (file, scenario, _) = load(&args.scenario, None)?;
    let spacing = args.spacing.unwrap_or(scenario.field_params.epsilon / 4.0);
    if spacing <= 0.0 {
        return Err(Error::InvalidScenario("spacing must be positive".into()));
    }
    let t0 = Instant::now();
    let grid = build_grid(
        &scenario.obstacles,
        &scenario.workspace_bounds,
        spacing,
        &scenario.field_params,
    )?;
    let build_ms = t0.elapsed().as_secs_f64() * 1e3;
    grid.save(&args.out)?;
    println!(
        "{}: {} nodes ({}x{}x{}), built in {:.1} ms",
        file.display_name(),
        grid.node_count(),
        grid.dims()[0],
        grid.dims()[1],
        grid.dims()[2],
        build_ms
    );
    Ok(ExitCode::SUCCESS)
}

const GEN_CLEARANCE_ATTEMPTS: usize = 10_000;

fn cmd_gen(args: GenArgs) -> arcik::Result<ExitCode> {
    let nums: Vec<f64> = args
        .bounds
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::InvalidScenario(format!("bad bounds {:?}", args.bounds)))?;
    if nums.len() != 6 {
        return Err(Error::InvalidScenario("bounds needs six numbers".into()));
    }
    let bounds = Aabb::new(Vec3::new(nums[0], nums[1], nums[2]), Vec3::new(nums[3], nums[4], nums[5]));
    if !bounds.is_valid() {
        return Err(Error::InvalidScenario("bounds box is degenerate".into()));
    }
    let (r_lo, r_hi) = {
        let (lo, hi) = args
            .radius_range
            .split_once("..")
            .ok_or_else(|| Error::InvalidScenario("radius range needs the form a..b".into()))?;
        let lo: f64 = lo.trim().parse().map_err(|_| Error::InvalidScenario("bad radius".into()))?;
        let hi: f64 = hi.trim().parse().map_err(|_| Error::InvalidScenario("bad radius".into()))?;
        if lo <= 0.0 || hi < lo {
            return Err(Error::InvalidScenario("radius range must be positive and ordered".into()));
        }
        (lo, hi)
    };

    let mut scenario = default_world(bounds, args.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);

    let waypoints = args.waypoints.map(|count| lateral_sweep(count, &mut rng));
    let epsilon = scenario.field_params.epsilon;

    // Points every obstacle must clear: start, target, and the waypoint
    // sweep when present.
    let mut protected = vec![scenario.start, scenario.target];
    if let Some(w) = &waypoints {
        protected.extend_from_slice(w);
        scenario.target = w[0];
    }

    for _ in 0..args.spheres {
        let mut placed = false;
        for _ in 0..GEN_CLEARANCE_ATTEMPTS {
            let center = Vec3::new(
                rng.gen_range(bounds.min.x..bounds.max.x),
                rng.gen_range(bounds.min.y..bounds.max.y),
                rng.gen_range(bounds.min.z..bounds.max.z),
            );
            let radius = rng.gen_range(r_lo..=r_hi);
            let candidate = Obstacle::Sphere { center, radius };
            if protected.iter().all(|p| candidate.signed_distance(*p) >= epsilon) {
                scenario.obstacles.push(candidate);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::InvalidScenario(format!(
                "could not place obstacle with clearance after {GEN_CLEARANCE_ATTEMPTS} attempts"
            )));
        }
    }

    // Post-generation scan: the invariant the file promises.
    for o in &scenario.obstacles {
        debug_assert!(protected.iter().all(|p| o.signed_distance(*p) >= epsilon));
    }
    debug_assert!(signed_distance(&scenario.obstacles, scenario.start) >= epsilon);

    let file = ScenarioFile::from_scenario(
        &scenario,
        Some(format!("gen-seed{}", args.seed)),
        waypoints,
    );
    std::fs::write(&args.out, file.to_json())?;
    println!("wrote {} ({} obstacles)", args.out.display(), scenario.obstacles.len());
    Ok(ExitCode::SUCCESS)
}

/// Desk-scale default world shared by `gen`: a five-segment manipulator
/// hanging from the origin.
fn default_world(bounds: Aabb, seed: u64) -> Scenario {
    Scenario {
        start: Vec3::ZERO,
        base_orientation: Vec3::new(0.0, 0.0, -1.0),
        target: Vec3::new(-60.0, 150.0, -230.0),
        target_orientation: None,
        n_segments: 5,
        length_spec: arcik::cost::LengthSpec::new(45.0, 70.0),
        obstacles: vec![],
        field_params: arcik::field::FieldParams::new(20.0, 1.0),
        workspace_bounds: bounds,
        weights: arcik::cost::CostWeights::default(),
        seed,
        max_iterations: 150,
    }
}

/// Waypoints sweeping the far side of the workspace: a lateral arc at
/// roughly constant reach, with a gentle depth modulation.
fn lateral_sweep(count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec3> {
    let reach = 250.0 + rng.gen_range(-10.0..10.0);
    let phase: f64 = rng.gen_range(-0.2..0.2);
    (0..count)
        .map(|i| {
            let s = i as f64 / (count.max(2) - 1) as f64;
            let angle = (-0.9 + 1.8 * s) + phase;
            let depth = -0.72 + 0.12 * (std::f64::consts::PI * s).sin();
            let lateral = (1.0 - depth * depth).sqrt();
            Vec3::new(
                reach * lateral * angle.sin(),
                reach * lateral * angle.cos() * 0.8,
                reach * depth,
            )
        })
        .collect()
}
