use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use ccabc_core::clustering::select_seed_positions;
use ccabc_core::config::derive_seed;
use ccabc_core::network::deploy;
use ccabc_core::output::{read_metrics, write_events, write_metrics, write_nodes};
use ccabc_core::{
    render_plots, Config, Event, Grid, Labeled, MetricsSeries, Protocol, RunManifest, SeedSpec,
    Simulation,
};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

#[derive(Parser)]
#[command(
    name = "ccabc",
    version,
    about = "Cellular-automaton clustering simulator for sensor networks"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Override `simulation.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for all outputs.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Print nothing on success.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write metrics, events, plots and a manifest.
    Run {
        config: PathBuf,
        /// Also write the node table after cluster formation.
        #[arg(long)]
        nodes: bool,
    },
    /// Run the same configuration under several protocols and overlay them.
    Compare {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "ccabc,leach")]
        protocols: Vec<Protocol>,
    },
    /// Vary one key; runs are independent and use seeds derived per value.
    Sweep {
        config: PathBuf,
        /// Key as `section.name`, e.g. `clustering.r_max`.
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        values: Vec<String>,
    },
    /// Render the six charts from metrics CSV files.
    Plot {
        #[arg(required = true)]
        csv: Vec<PathBuf>,
    },
    /// Text dump of the automaton from the formation seeds.
    DumpGrid {
        config: PathBuf,
        #[arg(long, default_value_t = 10)]
        steps: usize,
    },
}

/// Failures split by exit code.
enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn config_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Config(e.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, nodes } => cmd_run(&cli.global, config, *nodes),
        Command::Compare { config, protocols } => cmd_compare(&cli.global, config, protocols),
        Command::Sweep {
            config,
            param,
            values,
        } => cmd_sweep(&cli.global, config, param, values),
        Command::Plot { csv } => cmd_plot(&cli.global, csv),
        Command::DumpGrid { config, steps } => cmd_dump_grid(&cli.global, config, *steps),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load(global: &Global, path: &Path) -> Outcome<Config> {
    let mut config = Config::load(path).map_err(config_err)?;
    if let Some(seed) = global.seed {
        config.simulation.seed = seed;
    }
    Ok(config)
}

fn create_dir(dir: &Path) -> Outcome {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(Failure::Runtime)
}

struct Finished {
    series: MetricsSeries,
    events: Vec<Event>,
    seconds: f64,
}

fn simulate(config: &Config, nodes_csv: Option<&Path>) -> Outcome<Finished> {
    let start = Instant::now();
    let sim = Simulation::new(config).map_err(config_err)?;
    if let Some(path) = nodes_csv {
        write_nodes(sim.network(), path).map_err(anyhow::Error::from)?;
    }
    let (series, events) = sim.run();
    Ok(Finished {
        series,
        events,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Metrics, events and manifest for one run in `dir`.
fn write_run(
    dir: &Path,
    config: &Config,
    run: &Finished,
    extra: Vec<PathBuf>,
) -> Outcome<Vec<PathBuf>> {
    create_dir(dir)?;
    let metrics = dir.join("metrics.csv");
    let events = dir.join("events.jsonl");
    write_metrics(&run.series, &metrics).map_err(anyhow::Error::from)?;
    write_events(&run.events, &events).map_err(anyhow::Error::from)?;
    let mut outputs = vec![metrics, events];
    outputs.extend(extra);
    RunManifest::new(config, outputs.clone(), run.seconds)
        .write(&dir.join("manifest.json"))
        .map_err(anyhow::Error::from)?;
    Ok(outputs)
}

fn summary(label: &str, run: &Finished) -> String {
    let last = run.series.rows.last();
    format!(
        "{label}: {} rounds, first death {}, final alive {}, {:.2}s",
        run.series.last_round(),
        run.series
            .first_death_round
            .map_or("none".to_string(), |r| r.to_string()),
        last.map_or(0, |r| r.active + r.standby),
        run.seconds
    )
}

fn cmd_run(global: &Global, path: &Path, nodes: bool) -> Outcome {
    let config = load(global, path)?;
    create_dir(&global.out_dir)?;
    let nodes_path = nodes.then(|| global.out_dir.join("nodes.csv"));
    let run = simulate(&config, nodes_path.as_deref())?;
    let label = config.simulation.protocol.as_str();
    let plots = render_plots(
        &[Labeled {
            label,
            series: &run.series,
        }],
        &global.out_dir,
    )
    .map_err(anyhow::Error::from)?;
    let mut extra = plots;
    extra.extend(nodes_path);
    write_run(&global.out_dir, &config, &run, extra)?;
    if !global.quiet {
        println!("{}", summary(label, &run));
        println!("wrote {}", global.out_dir.display());
    }
    Ok(())
}

fn cmd_compare(global: &Global, path: &Path, protocols: &[Protocol]) -> Outcome {
    let base = load(global, path)?;
    let configs: Vec<Config> = protocols
        .iter()
        .map(|&p| {
            let mut c = base.clone();
            c.simulation.protocol = p;
            c
        })
        .collect();
    let runs: Vec<Outcome<Finished>> = configs.par_iter().map(|c| simulate(c, None)).collect();
    let runs: Vec<Finished> = runs.into_iter().collect::<Outcome<_>>()?;
    create_dir(&global.out_dir)?;
    for (config, run) in configs.iter().zip(&runs) {
        let label = config.simulation.protocol.as_str();
        write_run(&global.out_dir.join(label), config, run, Vec::new())?;
        if !global.quiet {
            println!("{}", summary(label, run));
        }
    }
    let labeled: Vec<Labeled> = configs
        .iter()
        .zip(&runs)
        .map(|(c, r)| Labeled {
            label: c.simulation.protocol.as_str(),
            series: &r.series,
        })
        .collect();
    render_plots(&labeled, &global.out_dir).map_err(anyhow::Error::from)?;
    Ok(())
}

fn cmd_sweep(global: &Global, path: &Path, param: &str, values: &[String]) -> Outcome {
    let base = load(global, path)?;
    let mut configs = Vec::with_capacity(values.len());
    for v in values {
        let label = format!("{param}={v}");
        let mut c = base.clone();
        c.set(param, v).map_err(config_err)?;
        if param != "simulation.seed" {
            c.simulation.seed = derive_seed(base.simulation.seed, &label);
        }
        configs.push((label, c));
    }
    let runs: Vec<Outcome<Finished>> = configs.par_iter().map(|(_, c)| simulate(c, None)).collect();
    let runs: Vec<Finished> = runs.into_iter().collect::<Outcome<_>>()?;
    create_dir(&global.out_dir)?;
    for ((label, config), run) in configs.iter().zip(&runs) {
        write_run(&global.out_dir.join(label), config, run, Vec::new())?;
        if !global.quiet {
            println!("{}", summary(label, run));
        }
    }
    let labeled: Vec<Labeled> = configs
        .iter()
        .zip(&runs)
        .map(|((label, _), r)| Labeled {
            label,
            series: &r.series,
        })
        .collect();
    render_plots(&labeled, &global.out_dir).map_err(anyhow::Error::from)?;
    Ok(())
}

/// Legend label for a metrics file: the parent directory when the file has
/// the default name, else the file stem.
fn csv_label(path: &Path) -> String {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("series");
    if stem == "metrics" {
        if let Some(dir) = path
            .parent()
            .and_then(|p| p.file_name())
            .and_then(|s| s.to_str())
        {
            return dir.to_string();
        }
    }
    stem.to_string()
}

fn cmd_plot(global: &Global, paths: &[PathBuf]) -> Outcome {
    let mut series = Vec::with_capacity(paths.len());
    for p in paths {
        series.push((csv_label(p), read_metrics(p).map_err(anyhow::Error::from)?));
    }
    let labeled: Vec<Labeled> = series
        .iter()
        .map(|(label, s)| Labeled { label, series: s })
        .collect();
    create_dir(&global.out_dir)?;
    let written = render_plots(&labeled, &global.out_dir).map_err(anyhow::Error::from)?;
    if !global.quiet {
        for p in written {
            println!("{}", p.display());
        }
    }
    Ok(())
}

/// Writes `grid.txt`: the seeded automaton for generations 0..=steps, one
/// base-36 digit per cell.
fn cmd_dump_grid(global: &Global, path: &Path, steps: usize) -> Outcome {
    let config = load(global, path)?;
    let network = deploy(
        (config.field.width, config.field.height),
        config.bs_pos(),
        config.energy.initial,
        config.simulation.sensing_radius,
    );
    let seeds = select_seed_positions(&network, config.seed_count(), config.simulation.seed)
        .map_err(config_err)?;
    let rules = config.rules();
    let mut grid = Grid::new(
        config.field.width,
        config.field.height,
        config.ca.k,
        &SeedSpec::SeededNuclei { positions: seeds },
    )
    .map_err(config_err)?;
    let mut text = String::new();
    for g in 0..=steps {
        if g > 0 {
            grid = grid.step(&rules);
        }
        let _ = writeln!(text, "generation {g}");
        text.push_str(&grid.dump_text());
    }
    create_dir(&global.out_dir)?;
    let out = global.out_dir.join("grid.txt");
    fs::write(&out, text)
        .with_context(|| format!("writing {}", out.display()))
        .map_err(Failure::Runtime)?;
    if !global.quiet {
        println!("{}", out.display());
    }
    Ok(())
}
