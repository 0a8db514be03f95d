//! Command-line front end for the tangent-intersection planners.
//!
//! Subcommands: `gen` (seeded scenario generation), `plan` (static planning
//! with the tangent planner or the grid A* baseline), `simulate` (dynamic
//! runs in partially-known or unknown mode), `bench` (seeded multi-map
//! benchmark emitting CSV rows) and `render` (SVG drawings of scenarios,
//! paths and traces).
//!
//! Exit codes: 0 on success or target reached, 2 when a planner reports
//! failure, 1 on usage or I/O errors.

mod paths;
mod svg;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use paths::PathDoc;
use tig_core::baseline::{grid_astar, GridSpec};
use tig_core::dtig::{plan_dynamic, ExecutionTrace};
use tig_core::metrics::MetricsRecord;
use tig_core::rng::SplitMix64;
use tig_core::smoothing::smooth_path;
use tig_core::stig::plan_static;
use tig_core::world::{
    generate_map, load_scenario, save_scenario, validate, MapFamily, MapSpec, Scenario,
};

#[derive(Parser)]
#[command(
    name = "tig",
    about = "Tangent-intersection path planning over elliptic obstacles",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random scenario file and print its measured coverage.
    Gen(GenArgs),
    /// Plan a static path and write path/SVG/CSV outputs.
    Plan(PlanArgs),
    /// Run a dynamic planner and write trace/SVG/CSV outputs.
    Simulate(SimulateArgs),
    /// Generate seeded maps and benchmark the planners into a CSV table.
    Bench(BenchArgs),
    /// Draw a scenario with an optional path or trace as SVG.
    Render(RenderArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Map family: short | large | sparse | dense.
    #[arg(long)]
    family: MapFamily,
    /// Side length override, meters.
    #[arg(long)]
    size: Option<f64>,
    /// Coverage override, fraction of area.
    #[arg(long)]
    coverage: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Scenario file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone, Copy)]
struct ParamOverrides {
    /// Sensor range override, meters.
    #[arg(long)]
    range: Option<f64>,
    /// Heuristic obstacle-count weight override.
    #[arg(long)]
    alpha: Option<f64>,
    /// Virtual-ellipse inflation override, meters.
    #[arg(long)]
    dvir: Option<f64>,
    /// Safety inflation override, meters.
    #[arg(long)]
    rsafe: Option<f64>,
    /// Turning-angle bound override, radians.
    #[arg(long = "theta-max")]
    theta_max: Option<f64>,
}

impl ParamOverrides {
    fn apply(&self, s: &mut Scenario) {
        if let Some(v) = self.range {
            s.params.sensor_range = v;
        }
        if let Some(v) = self.alpha {
            s.params.alpha_weight = v;
        }
        if let Some(v) = self.dvir {
            s.params.d_vir = v;
        }
        if let Some(v) = self.theta_max {
            s.params.theta_max = v;
        }
        if let Some(v) = self.rsafe {
            s.params.r_safe = v;
            for e in s.obstacles.iter_mut().chain(s.hidden_obstacles.iter_mut()) {
                e.r_safe = v;
            }
        }
    }
}

#[derive(Args)]
struct PlanArgs {
    /// Scenario file to plan on.
    #[arg(long)]
    scenario: PathBuf,
    /// Planner: stig | astar.
    #[arg(long, default_value = "stig")]
    algo: String,
    /// Path file to write.
    #[arg(long)]
    out: Option<PathBuf>,
    /// SVG drawing to write.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// CSV file to append the metrics row to.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Seed recorded in the CSV row.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    overrides: ParamOverrides,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Dynamic mode: partial | unknown.
    #[arg(long, default_value = "partial")]
    mode: String,
    /// Trace file (JSON lines) to write.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    overrides: ParamOverrides,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated families or "all".
    #[arg(long, default_value = "all")]
    families: String,
    /// Scenarios per family.
    #[arg(long, default_value_t = 5)]
    count: usize,
    /// Base seed; per-case seeds derive from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV file to append to; stdout when absent.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Also run both dynamic modes on every case.
    #[arg(long)]
    dynamic: bool,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Path file (from `plan`) to draw.
    #[arg(long)]
    path: Option<PathBuf>,
    /// Trace file (from `simulate`) to draw.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// SVG file to write.
    #[arg(long)]
    out: PathBuf,
    /// Also draw the waypoint-hosting virtual ellipses.
    #[arg(long = "virtual")]
    show_virtual: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Plan(args) => cmd_plan(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Render(args) => cmd_render(args),
    }
}

fn cmd_gen(args: GenArgs) -> Result<u8> {
    let mut spec = MapSpec::new(args.family, args.seed);
    if let Some(size) = args.size {
        spec.size = size;
    }
    if let Some(coverage) = args.coverage {
        spec.coverage = coverage;
    }
    let scenario = generate_map(&spec)?;
    save_scenario(&scenario, &args.out)?;
    let coverage = tig_core::world::estimate_coverage(&scenario, 100_000, 0xC0FFEE);
    println!("coverage {coverage:.6}");
    Ok(0)
}

fn load_validated(path: &Path) -> Result<Scenario> {
    let scenario = load_scenario(path)?;
    let violations = validate(&scenario);
    if !violations.is_empty() {
        bail!(
            "invalid scenario {}: {}",
            path.display(),
            violations.join("; ")
        );
    }
    Ok(scenario)
}

fn case_id_for(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "case".to_string())
}

fn cmd_plan(args: PlanArgs) -> Result<u8> {
    let mut scenario = load_validated(&args.scenario)?;
    args.overrides.apply(&mut scenario);

    let started = Instant::now();
    let path = match args.algo.as_str() {
        "stig" => plan_static(&scenario),
        "astar" => grid_astar(&scenario, &GridSpec::default()),
        other => bail!("unknown algorithm '{other}' (expected stig|astar)"),
    };
    let plan_time = started.elapsed().as_secs_f64();

    let smoothed = (path.is_success() && args.algo == "stig" && path.waypoints.len() > 2)
        .then(|| smooth_path(&path, &scenario.obstacles, &scenario.params));
    let doc = PathDoc::new(&args.algo, &path, smoothed.as_ref());
    if let Some(out) = &args.out {
        doc.save(out)?;
    }
    if let Some(svg_path) = &args.svg {
        let drawing = svg::render(&svg::RenderInputs {
            scenario: &scenario,
            path: Some(&doc),
            trace: None,
            show_virtual: false,
        });
        std::fs::write(svg_path, drawing)
            .with_context(|| format!("writing {}", svg_path.display()))?;
    }
    let record = MetricsRecord::from_planned(&path, plan_time);
    if let Some(csv) = &args.csv {
        append_csv(
            csv,
            &[record.csv_row(
                &case_id_for(&args.scenario),
                &args.algo,
                "custom",
                args.seed,
            )],
        )?;
    }
    println!(
        "{} {}: {}",
        args.algo,
        case_id_for(&args.scenario),
        record.status
    );
    Ok(if path.is_success() { 0 } else { 2 })
}

fn cmd_simulate(args: SimulateArgs) -> Result<u8> {
    let mut scenario = load_validated(&args.scenario)?;
    args.overrides.apply(&mut scenario);

    let trace: ExecutionTrace = match args.mode.as_str() {
        "partial" => plan_dynamic(&scenario, false),
        "unknown" => plan_dynamic(&scenario, true),
        "static" => bail!("static runs are served by `plan`; use --mode partial|unknown"),
        other => bail!("unknown mode '{other}' (expected partial|unknown)"),
    };

    if let Some(out) = &args.out {
        std::fs::write(out, trace.to_jsonl())
            .with_context(|| format!("writing {}", out.display()))?;
    }
    if let Some(svg_path) = &args.svg {
        let drawing = svg::render(&svg::RenderInputs {
            scenario: &scenario,
            path: None,
            trace: Some(&trace.steps),
            show_virtual: false,
        });
        std::fs::write(svg_path, drawing)
            .with_context(|| format!("writing {}", svg_path.display()))?;
    }
    let record = MetricsRecord::from_trace(&trace);
    if let Some(csv) = &args.csv {
        let algo = format!("dtig-{}", args.mode);
        append_csv(
            csv,
            &[record.csv_row(&case_id_for(&args.scenario), &algo, "custom", args.seed)],
        )?;
    }
    println!(
        "dtig-{} {}: {}",
        args.mode,
        case_id_for(&args.scenario),
        record.status
    );
    Ok(if trace.reached() { 0 } else { 2 })
}

fn parse_families(spec: &str) -> Result<Vec<MapFamily>> {
    if spec == "all" {
        return Ok(MapFamily::ALL.to_vec());
    }
    spec.split(',')
        .map(|item| item.trim().parse().map_err(anyhow::Error::msg))
        .collect()
}

fn cmd_bench(args: BenchArgs) -> Result<u8> {
    let families = parse_families(&args.families)?;
    let mut rows = Vec::new();
    let mut seed_stream = SplitMix64::new(args.seed);
    for family in families {
        for index in 0..args.count {
            let case_seed = seed_stream.next_u64();
            let spec = MapSpec::new(family, case_seed);
            let scenario =
                generate_map(&spec).with_context(|| format!("generating {family} case {index}"))?;
            let case_id = format!("{family}-{index:03}");

            let started = Instant::now();
            let stig_path = plan_static(&scenario);
            let stig_time = started.elapsed().as_secs_f64();
            rows.push(MetricsRecord::from_planned(&stig_path, stig_time).csv_row(
                &case_id,
                "stig",
                family.name(),
                case_seed,
            ));

            let started = Instant::now();
            let astar_path = grid_astar(&scenario, &GridSpec::default());
            let astar_time = started.elapsed().as_secs_f64();
            rows.push(
                MetricsRecord::from_planned(&astar_path, astar_time).csv_row(
                    &case_id,
                    "astar",
                    family.name(),
                    case_seed,
                ),
            );

            if args.dynamic {
                let partial = plan_dynamic(&scenario, false);
                rows.push(MetricsRecord::from_trace(&partial).csv_row(
                    &case_id,
                    "dtig-partial",
                    family.name(),
                    case_seed,
                ));
                let unknown = plan_dynamic(&scenario, true);
                rows.push(MetricsRecord::from_trace(&unknown).csv_row(
                    &case_id,
                    "dtig-unknown",
                    family.name(),
                    case_seed,
                ));
            }
        }
    }
    match &args.csv {
        Some(path) => append_csv(path, &rows)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{}", MetricsRecord::csv_header())?;
            for row in &rows {
                writeln!(stdout, "{row}")?;
            }
        }
    }
    Ok(0)
}

fn cmd_render(args: RenderArgs) -> Result<u8> {
    let scenario = load_validated(&args.scenario)?;
    let path_doc = args.path.as_deref().map(PathDoc::load).transpose()?;
    let trace_events = match &args.trace {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading trace {}", p.display()))?;
            Some(ExecutionTrace::events_from_jsonl(&text).map_err(anyhow::Error::msg)?)
        }
        None => None,
    };
    let drawing = svg::render(&svg::RenderInputs {
        scenario: &scenario,
        path: path_doc.as_ref(),
        trace: trace_events.as_deref(),
        show_virtual: args.show_virtual,
    });
    std::fs::write(&args.out, drawing)
        .with_context(|| format!("writing {}", args.out.display()))?;
    Ok(0)
}

/// Appends rows to a CSV file, writing the header only when the file is new
/// or empty.
fn append_csv(path: &Path, rows: &[String]) -> Result<()> {
    let need_header = std::fs::metadata(path)
        .map(|m| m.len() == 0)
        .unwrap_or(true);
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    if need_header {
        writeln!(file, "{}", MetricsRecord::csv_header())?;
    }
    for row in rows {
        writeln!(file, "{row}")?;
    }
    Ok(())
}
