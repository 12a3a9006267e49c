use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use nwslab::codomain::invert_solution_with;
use nwslab::kernels::{heat_kernel, spectral_kernel};
use nwslab::refsolver::solve;
use nwslab::{export_sweep, run_claim_suite, to_ndjson, ExperimentConfig, SweepQuantity};

/// Numerical claim checks for the Newell–Whitehead–Segel equation.
#[derive(Parser)]
#[command(name = "nwslab", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat key = value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one configuration key (repeatable), e.g. --param epsilon=0.5
    #[arg(long = "param", value_name = "KEY=VALUE", global = true)]
    params: Vec<String>,
    /// Directory for CSV output (overrides out.csv_dir)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the claim suite and print one JSON report per line
    Claims,
    /// Export a sweep as CSV: F_of_s, u_of_x or trajectory
    Sweep { quantity: SweepQuantity },
    /// Integrate the equation with the reference solver
    Simulate,
    /// Evaluate the heat kernel and its transform
    Kernel {
        /// Time (defaults to time.t_end)
        #[arg(long)]
        t: Option<f64>,
        /// Spatial point; prints point values instead of a grid table
        #[arg(long)]
        x: Option<f64>,
        /// Frequency point
        #[arg(long)]
        s: Option<f64>,
    },
    /// Inverse-transform the n = 2 solution and report on the null claim
    Invert {
        /// Time (defaults to time.t_end)
        #[arg(long)]
        t: Option<f64>,
    },
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let mut config = match &common.config {
        Some(path) => {
            ExperimentConfig::from_file(path).with_context(|| format!("reading config {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    for assignment in &common.params {
        config.apply_override(assignment)?;
    }
    if let Some(dir) = &common.out {
        config.outputs.csv_dir = dir.clone();
    }
    config.validate()?;
    Ok(config)
}

fn csv_path(config: &ExperimentConfig, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(&config.outputs.csv_dir)
        .with_context(|| format!("creating {}", config.outputs.csv_dir.display()))?;
    Ok(config.outputs.csv_dir.join(name))
}

fn claims(config: &ExperimentConfig) -> Result<()> {
    let text = to_ndjson(&run_claim_suite(config)?);
    match &config.outputs.report_path {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn simulate(config: &ExperimentConfig) -> Result<()> {
    let grid = config.grid()?;
    let init = config.init.field(grid)?;
    let traj = solve(&init, config.time.t_end, config.time.dt, &config.params)?;
    let path = csv_path(config, "trajectory.csv")?;
    traj.write_csv(BufWriter::new(File::create(&path)?))?;
    let last = traj.final_state();
    let summary = json!({
        "t_final": last.time_stamp(),
        "sup_norm": last.sup_norm(),
        "blow_up": traj.blow_up,
        "records": traj.times.len(),
        "csv": path.display().to_string(),
    });
    println!("{summary}");
    Ok(())
}

fn kernel(config: &ExperimentConfig, t: Option<f64>, x: Option<f64>, s: Option<f64>) -> Result<()> {
    let t = t.unwrap_or(config.time.t_end);
    let p = &config.params;
    let damping = (-p.alpha * t).exp();
    if x.is_some() || s.is_some() {
        let mut out = serde_json::Map::new();
        out.insert("t".into(), json!(t));
        if let Some(x) = x {
            let g = heat_kernel(x, t, p)?;
            out.insert("x".into(), json!(x));
            out.insert("heat_kernel".into(), json!(g));
            out.insert("propagator".into(), json!(g * damping));
        }
        if let Some(s) = s {
            out.insert("s".into(), json!(s));
            out.insert("spectral_kernel".into(), json!(spectral_kernel(s, t, p)?));
        }
        println!("{}", serde_json::Value::Object(out));
        return Ok(());
    }
    let grid = config.grid()?;
    let mut w = BufWriter::new(io::stdout().lock());
    writeln!(w, "x,s,heat_kernel,propagator,spectral_kernel")?;
    for (x, s) in grid.points().zip(grid.dual().frequencies()) {
        let g = heat_kernel(x, t, p)?;
        writeln!(w, "{x:e},{s:e},{g:e},{:e},{:e}", g * damping, spectral_kernel(s, t, p)?)?;
    }
    w.flush()?;
    Ok(())
}

fn invert(config: &ExperimentConfig, t: Option<f64>) -> Result<()> {
    let t = t.unwrap_or(config.time.t_end);
    let (u, _, report) = invert_solution_with(&config.params, t, config.grid()?, &config.quad_options())?;
    let report = report.rejudge(&config.policy());
    let path = csv_path(config, "u_of_x.csv")?;
    u.write_csv(BufWriter::new(File::create(&path)?))?;
    println!("{}", report.to_json_line());
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let config = load_config(&cli.common)?;
    match cli.command {
        Command::Claims => claims(&config),
        Command::Sweep { quantity } => {
            let path = export_sweep(&config, quantity)?;
            println!("{}", path.display());
            Ok(())
        }
        Command::Simulate => simulate(&config),
        Command::Kernel { t, x, s } => kernel(&config, t, x, s),
        Command::Invert { t } => invert(&config, t),
    }
}
