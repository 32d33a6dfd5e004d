use clap::{Parser, Subcommand};
use sakf_cli::config::{parse_config, ConfigDoc};
use sakf_cli::svg::render_svg;
use sakf_cli::trace::{read_csv, write_csv, write_summary};
use sakf_cli::{CliError, Result};
use sakf_core::sim::BuiltinScenario;
use sakf_core::{run_scenario, runner::RunnerError, summarize};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "sakf",
    about = "Self-assessing Kalman filter simulations: runs experiments, writes CSV traces and summaries, and renders SVG charts",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a JSON config and write trace.csv + summary.json.
    Run {
        /// Path to the run-configuration JSON document.
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the full config document of a built-in scenario.
    Scenario {
        /// One of: jumps, drift, velocity_change.
        #[arg(long)]
        name: String,
        /// Where to write the config JSON.
        #[arg(long)]
        emit: PathBuf,
    },
    /// Render selected columns of a trace CSV as an SVG chart.
    Plot {
        /// Input trace.csv.
        #[arg(long = "in")]
        input: PathBuf,
        /// Comma-separated column names (ci_lo,ci_hi together draw a band).
        #[arg(long, value_delimiter = ',')]
        columns: Vec<String>,
        /// Output SVG path.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = dispatch(cli.command) {
        eprintln!("sakf: {err}");
        std::process::exit(err.exit_code());
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run { config, seed, out } => run(&config, seed, &out),
        Command::Scenario { name, emit } => scenario(&name, &emit),
        Command::Plot {
            input,
            columns,
            out,
        } => plot(&input, &columns, &out),
    }
}

fn run(config_path: &Path, seed: Option<u64>, out_dir: &Path) -> Result<()> {
    let text = std::fs::read_to_string(config_path).map_err(|e| CliError::io(config_path, e))?;
    let mut scenario = parse_config(&text)?;
    if let Some(seed) = seed {
        scenario.seed = seed;
    }

    let output = run_scenario(&scenario).map_err(|e| match e {
        RunnerError::Scenario(e) => CliError::Config(e.to_string()),
        numeric => CliError::Runtime(numeric.to_string()),
    })?;

    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    write_csv(&output, &out_dir.join("trace.csv"))?;
    write_summary(&output, &out_dir.join("summary.json"))?;

    let summary = summarize(&output);
    for sensor in &summary.sensors {
        println!(
            "sensor {}: mean delta {:.4}, final u {:.4}, {} discounts, {} resets, {:.1}% of avg NIS in band",
            sensor.sensor,
            sensor.mean_delta,
            sensor.final_u_delta,
            sensor.td_events,
            sensor.reset_events,
            100.0 * sensor.frac_avg_nis_in_band,
        );
    }
    println!(
        "wrote {} and {}",
        out_dir.join("trace.csv").display(),
        out_dir.join("summary.json").display()
    );
    Ok(())
}

fn scenario(name: &str, emit: &Path) -> Result<()> {
    let which: BuiltinScenario = name.parse().map_err(|e| CliError::Config(format!("{e}")))?;
    let doc = ConfigDoc::for_builtin(which);
    let text = serde_json::to_string_pretty(&doc)
        .map_err(|e| CliError::Runtime(format!("config serialization: {e}")))?;
    std::fs::write(emit, text + "\n").map_err(|e| CliError::io(emit, e))?;
    println!("wrote {}", emit.display());
    Ok(())
}

fn plot(input: &Path, columns: &[String], out: &Path) -> Result<()> {
    let trace = read_csv(input)?;
    render_svg(&trace, columns, out)?;
    println!("wrote {}", out.display());
    Ok(())
}
