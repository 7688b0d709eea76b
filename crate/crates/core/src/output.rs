//! Metrics CSV, event log, node table and run manifest files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::events::{write_events_jsonl, Event};
use crate::network::Network;
use crate::sim::{MetricsSeries, RoundMetrics};

pub const METRICS_HEADER: &str =
    "round,active,standby,dead,coverage,energy_total,energy_spent,ch_count";

pub const NODES_HEADER: &str = "id,x,y,energy,mode,role,cluster_id,orbit_index";

const SIG_DIGITS: i32 = 9;

/// Fixed-point decimal with nine significant digits.
///
/// The exponent comes from scientific formatting so a value that rounds up
/// across a power of ten (9.9999999996 -> 10.0000000) keeps nine digits and
/// re-formats to the same text after a parse.
pub fn format_sig(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 {
            format!("{:.*}", (SIG_DIGITS - 1) as usize, 0.0)
        } else {
            v.to_string()
        };
    }
    let sci = format!("{:.*e}", (SIG_DIGITS - 1) as usize, v);
    let exp: i32 = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .expect("scientific notation has an exponent");
    let decimals = (SIG_DIGITS - 1 - exp).max(0) as usize;
    format!("{v:.decimals$}")
}

fn metrics_line(r: &RoundMetrics) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        r.round,
        r.active,
        r.standby,
        r.dead,
        format_sig(r.coverage),
        format_sig(r.energy_total),
        format_sig(r.energy_spent),
        r.ch_count
    )
}

pub fn write_metrics_to<W: Write>(series: &MetricsSeries, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{METRICS_HEADER}")?;
    for r in &series.rows {
        writeln!(out, "{}", metrics_line(r))?;
    }
    out.flush()
}

pub fn write_metrics(series: &MetricsSeries, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_metrics_to(series, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

/// Parses a metrics file back into a series. The protocol is not stored in
/// the CSV and comes back as `None`.
pub fn read_metrics(path: &Path) -> Result<MetricsSeries> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        message: format!("line {line}: {message}"),
    };
    let mut series = MetricsSeries::default();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if i == 0 {
            if line != METRICS_HEADER {
                return Err(parse_err(1, format!("expected header `{METRICS_HEADER}`")));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(parse_err(
                i + 1,
                format!("{} fields, expected 8", fields.len()),
            ));
        }
        let int = |j: usize| -> Result<u64> {
            fields[j]
                .parse()
                .map_err(|e| parse_err(i + 1, format!("column {}: {e}", j + 1)))
        };
        let float = |j: usize| -> Result<f64> {
            fields[j]
                .parse()
                .map_err(|e| parse_err(i + 1, format!("column {}: {e}", j + 1)))
        };
        series.push(RoundMetrics {
            round: int(0)?,
            active: int(1)? as usize,
            standby: int(2)? as usize,
            dead: int(3)? as usize,
            coverage: float(4)?,
            energy_total: float(5)?,
            energy_spent: float(6)?,
            ch_count: int(7)? as usize,
        });
    }
    Ok(series)
}

pub fn write_events(events: &[Event], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_events_jsonl(events, &mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn read_events(path: &Path) -> Result<Vec<Event>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut events = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        events.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: format!("line {}: {e}", i + 1),
        })?);
    }
    Ok(events)
}

/// Per-node snapshot: position, energy, mode and structural role.
pub fn write_nodes_to<W: Write>(network: &Network, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{NODES_HEADER}")?;
    let opt = |v: Option<usize>| v.map_or(String::new(), |v| v.to_string());
    for n in network.nodes() {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            n.id,
            n.pos.x,
            n.pos.y,
            format_sig(n.energy),
            n.mode.as_str(),
            n.role.as_str(),
            opt(n.cluster_id),
            opt(n.orbit_index)
        )?;
    }
    out.flush()
}

pub fn write_nodes(network: &Network, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_nodes_to(network, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

/// Record of one completed run, written once after the outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub outputs: Vec<PathBuf>,
    pub wall_clock_seconds: f64,
    /// The default-filled configuration the run used.
    pub config: Config,
}

impl RunManifest {
    pub fn new(config: &Config, outputs: Vec<PathBuf>, wall_clock_seconds: f64) -> Self {
        Self {
            config_hash: config.hash(),
            seed: config.simulation.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            outputs,
            wall_clock_seconds,
            config: config.clone(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serialises");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}
