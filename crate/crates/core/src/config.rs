//! Run configuration: a sectioned TOML file where every key is optional
//! and falls back to a documented default.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::aggregation::{AggregationModel, AggregationParams};
use crate::ca::{Neighbourhood, RuleParams, MAX_STATES};
use crate::clustering::FormationParams;
use crate::energy::{orbital_distance, tx_energy, EnergyParams};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::network::Network;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    #[default]
    Ccabc,
    Leach,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Ccabc => "ccabc",
            Protocol::Leach => "leach",
        }
    }
}

impl std::str::FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ccabc" => Ok(Protocol::Ccabc),
            "leach" => Ok(Protocol::Leach),
            other => Err(Error::config(
                "simulation.protocol",
                format!("one of ccabc, leach (got {other:?})"),
            )),
        }
    }
}

/// How cluster heads reach the base station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoutingMode {
    /// Greedy geographic relaying over other heads.
    #[default]
    Greedy,
    Direct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldConfig {
    pub width: usize,
    pub height: usize,
    pub bs_x: f64,
    pub bs_y: f64,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self {
            width: 150,
            height: 150,
            bs_x: 50.0,
            bs_y: 175.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CaConfig {
    pub k: u8,
    pub theta: u32,
    pub neighbourhood: Neighbourhood,
    /// Propagation cap; `None` means `4·k`.
    pub max_steps: Option<usize>,
}

impl Default for CaConfig {
    fn default() -> Self {
        Self {
            k: 15,
            theta: 1,
            neighbourhood: Neighbourhood::Moore9,
            max_steps: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyConfig {
    pub epsilon: f64,
    pub gamma: f64,
    pub omega: f64,
    pub path_loss_exponent: f64,
    pub standby_per_round: f64,
    pub initial: f64,
    /// `None`: one `b0`-bit packet over the orbital distance at the field
    /// centre.
    pub dead_threshold: Option<f64>,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        let p = EnergyParams::default();
        Self {
            epsilon: p.epsilon,
            gamma: p.gamma,
            omega: p.omega,
            path_loss_exponent: p.path_loss_exponent,
            standby_per_round: p.standby_per_round,
            initial: p.initial,
            dead_threshold: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AggregationConfig {
    pub model: AggregationModel,
    pub b0: f64,
    pub c: f64,
    /// `None`: size of the smallest seed Voronoi cell.
    pub sigma: Option<f64>,
}

impl Default for AggregationConfig {
    fn default() -> Self {
        let p = AggregationParams::default();
        Self {
            model: p.model,
            b0: p.b0,
            c: p.c,
            sigma: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusteringConfig {
    /// `None`: one seed per 1000 nodes, rounded up, at least two.
    pub seed_count: Option<usize>,
    pub r_max: f64,
    pub rotation_period: u32,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        Self {
            seed_count: None,
            r_max: 5.0,
            rotation_period: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub protocol: Protocol,
    pub rounds_max: u64,
    pub transmissions_per_round: u32,
    pub sensing_radius: f64,
    pub seed: u64,
    pub routing: RoutingMode,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            protocol: Protocol::Ccabc,
            rounds_max: 2000,
            transmissions_per_round: 5,
            sensing_radius: 2.0,
            seed: 1,
            routing: RoutingMode::Greedy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LeachConfig {
    pub p: f64,
}

impl Default for LeachConfig {
    fn default() -> Self {
        Self { p: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub field: FieldConfig,
    pub ca: CaConfig,
    pub energy: EnergyConfig,
    pub aggregation: AggregationConfig,
    pub clustering: ClusteringConfig,
    pub simulation: SimulationConfig,
    pub leach: LeachConfig,
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Config = toml::from_str(text).map_err(|e| Error::Parse {
            path: "<string>".into(),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: Config = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        let f = &self.field;
        if f.width == 0 || f.height == 0 {
            return Err(Error::config("field", "width ≥ 1 and height ≥ 1"));
        }
        if !(f.bs_x.is_finite() && f.bs_y.is_finite()) {
            return Err(Error::config("field.bs_x/bs_y", "finite coordinates"));
        }
        if !(2..=MAX_STATES).contains(&self.ca.k) {
            return Err(Error::config("ca.k", format!("2 ≤ k ≤ {MAX_STATES}")));
        }
        self.rules().validate()?;
        if self.ca.max_steps == Some(0) {
            return Err(Error::config("ca.max_steps", "max_steps ≥ 1"));
        }
        let mut energy = self.energy_params_with_threshold(0.0);
        energy.dead_threshold = self.energy.dead_threshold.unwrap_or(0.0);
        energy.validate()?;
        self.aggregation_params(self.aggregation.sigma.unwrap_or(1.0))
            .validate()?;
        if self.clustering.seed_count == Some(0) {
            return Err(Error::config("clustering.seed_count", "seed_count ≥ 1"));
        }
        if let Some(s) = self.clustering.seed_count {
            if s > f.width * f.height {
                return Err(Error::config(
                    "clustering.seed_count",
                    "seed_count ≤ node count",
                ));
            }
        }
        if !(self.clustering.r_max > 0.0 && self.clustering.r_max.is_finite()) {
            return Err(Error::config("clustering.r_max", "r_max > 0"));
        }
        if self.clustering.rotation_period == 0 {
            return Err(Error::config(
                "clustering.rotation_period",
                "rotation_period ≥ 1",
            ));
        }
        let s = &self.simulation;
        if s.transmissions_per_round == 0 {
            return Err(Error::config(
                "simulation.transmissions_per_round",
                "transmissions_per_round ≥ 1",
            ));
        }
        if !(s.sensing_radius > 0.0 && s.sensing_radius.is_finite()) {
            return Err(Error::config(
                "simulation.sensing_radius",
                "sensing_radius > 0",
            ));
        }
        if !(self.leach.p > 0.0 && self.leach.p <= 1.0) {
            return Err(Error::config("leach.p", "0 < p ≤ 1"));
        }
        Ok(())
    }

    /// Sha-256 of the canonical TOML rendering, as lowercase hex.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn node_count(&self) -> usize {
        self.field.width * self.field.height
    }

    pub fn bs_pos(&self) -> Point {
        Point::new(self.field.bs_x, self.field.bs_y)
    }

    pub fn rules(&self) -> RuleParams {
        RuleParams {
            theta: self.ca.theta,
            neighbourhood: self.ca.neighbourhood,
        }
    }

    pub fn max_steps(&self) -> usize {
        self.ca.max_steps.unwrap_or(4 * self.ca.k as usize)
    }

    /// Configured seed count, or one per 1000 nodes but at least two. A lone
    /// front never extends past `k - 2` cells from its seed, so one seed can
    /// leave a small field mostly unreached and the costs never cross.
    pub fn seed_count(&self) -> usize {
        self.clustering.seed_count.unwrap_or_else(|| {
            self.node_count()
                .div_ceil(1000)
                .max(2)
                .min(self.node_count())
        })
    }

    fn energy_params_with_threshold(&self, dead_threshold: f64) -> EnergyParams {
        let e = &self.energy;
        EnergyParams {
            epsilon: e.epsilon,
            gamma: e.gamma,
            omega: e.omega,
            path_loss_exponent: e.path_loss_exponent,
            standby_per_round: e.standby_per_round,
            initial: e.initial,
            dead_threshold,
        }
    }

    /// Energy constants with the death threshold resolved against the
    /// deployed network.
    pub fn energy_params(&self, network: &Network) -> EnergyParams {
        let threshold = self.energy.dead_threshold.unwrap_or_else(|| {
            let (w, h) = network.field_size();
            let centre = Point::new(((w - 1) / 2) as f64, ((h - 1) / 2) as f64);
            let d = orbital_distance(self.clustering.r_max, network, centre);
            let probe = self.energy_params_with_threshold(0.0);
            tx_energy(self.aggregation.b0.ceil() as u64, d, &probe)
        });
        self.energy_params_with_threshold(threshold)
    }

    pub fn aggregation_params(&self, sigma: f64) -> AggregationParams {
        AggregationParams {
            b0: self.aggregation.b0,
            c: self.aggregation.c,
            sigma,
            model: self.aggregation.model,
        }
    }

    pub fn formation_params(&self, energy: EnergyParams, sigma: f64) -> FormationParams {
        FormationParams {
            k: self.ca.k,
            rules: self.rules(),
            r_max: self.clustering.r_max,
            max_steps: self.max_steps(),
            energy,
            aggregation: self.aggregation_params(sigma),
        }
    }

    /// Sets a key given as `section.name` from its TOML literal form,
    /// e.g. `("clustering.seed_count", "40")`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let (section, name) = key
            .split_once('.')
            .ok_or_else(|| Error::config(key, "key of the form section.name"))?;
        let mut table: toml::Table = toml::from_str(&self.to_toml_string()).expect("round-trips");
        let sec = table
            .get_mut(section)
            .and_then(|v| v.as_table_mut())
            .ok_or_else(|| Error::config(key, "unknown section"))?;
        let parsed: toml::Value = match toml::from_str::<toml::Table>(&format!("v = {value}")) {
            Ok(mut t) => t.remove("v").expect("just inserted"),
            Err(_) => toml::Value::String(value.to_string()),
        };
        sec.insert(name.to_string(), parsed);
        let text = toml::to_string(&table).expect("table serialises");
        let updated: Config =
            toml::from_str(&text).map_err(|e| Error::config(key, e.message().to_string()))?;
        updated.validate()?;
        *self = updated;
        Ok(())
    }
}

/// Seed for one run of a batch, derived from the batch seed and a label
/// such as `clustering.r_max=4`. Independent of the other labels.
pub fn derive_seed(base: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(base.to_le_bytes());
    h.update(label.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("eight bytes"))
}
