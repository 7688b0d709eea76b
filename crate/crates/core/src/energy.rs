//! First-order radio energy model and the two clustering cost functions.
//!
//! Sending `b` bits over `d` metres costs `b·ε + b·γ·dⁿ`; receiving costs
//! `b·ε`. The inter-cluster cost sums, over cluster heads, the uplink of
//! one aggregate to the next hop; the intra-cluster cost sums every
//! member-side transmission inside the nucleus/orbit tree.

use serde::{Deserialize, Serialize};

use crate::aggregation::AggregationParams;
use crate::error::{Error, Result};
use crate::flow::{build_flow_tree, flow_volumes, Participation};
use crate::geometry::Point;
use crate::network::{Cluster, Network};
use crate::routing::{Hop, Route};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    /// Transmitter/receiver circuit energy, J/bit.
    pub epsilon: f64,
    /// Amplifier energy, J/bit/mⁿ.
    pub gamma: f64,
    /// Aggregation energy, J/bit.
    pub omega: f64,
    /// Path-loss exponent.
    pub path_loss_exponent: f64,
    /// Drain of a stand-by node per round, J.
    pub standby_per_round: f64,
    /// Initial battery, J.
    pub initial: f64,
    /// Nodes below this residual energy are dead, J.
    pub dead_threshold: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        let mut p = Self {
            epsilon: 50e-9,
            gamma: 10e-12,
            omega: 5e-9,
            path_loss_exponent: 2.0,
            standby_per_round: 0.000_06,
            initial: 0.5,
            dead_threshold: 0.0,
        };
        p.dead_threshold = tx_energy(800, DEFAULT_THRESHOLD_DISTANCE, &p);
        p
    }
}

/// Orbital distance on the unit lattice with `r_max = 5`, used for the
/// default death threshold.
const DEFAULT_THRESHOLD_DISTANCE: f64 = 2.236_067_977_499_79;

impl EnergyParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("energy.epsilon", self.epsilon),
            ("energy.gamma", self.gamma),
            ("energy.omega", self.omega),
            ("energy.standby_per_round", self.standby_per_round),
            ("energy.initial", self.initial),
            ("energy.dead_threshold", self.dead_threshold),
        ];
        for (key, v) in fields {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(key, format!("{key} ≥ 0 and finite")));
            }
        }
        if !(self.path_loss_exponent >= 2.0) {
            return Err(Error::config("energy.path_loss_exponent", "n ≥ 2"));
        }
        Ok(())
    }

    #[inline]
    fn amplified(&self, distance: f64) -> f64 {
        if self.path_loss_exponent == 2.0 {
            distance * distance
        } else {
            distance.powf(self.path_loss_exponent)
        }
    }
}

/// Energy to transmit `bits` over `distance` metres.
#[inline]
pub fn tx_energy(bits: u64, distance: f64, p: &EnergyParams) -> f64 {
    tx_energy_f(bits as f64, distance, p)
}

#[inline]
pub(crate) fn tx_energy_f(bits: f64, distance: f64, p: &EnergyParams) -> f64 {
    bits * p.epsilon + bits * p.gamma * p.amplified(distance)
}

/// Energy to receive `bits`.
#[inline]
pub fn rx_energy(bits: u64, p: &EnergyParams) -> f64 {
    bits as f64 * p.epsilon
}

/// Inter-cluster cost: for each cluster head,
/// `bits_per_ch · ((ε + ω) + γ·dⁿ)` with `d` its first-hop distance.
///
/// `routes[i]` is the uplink of `clusters[i]` and must start at its head.
pub fn inter_cluster_cost(
    network: &Network,
    clusters: &[Cluster],
    routes: &[Route],
    bits_per_ch: f64,
    p: &EnergyParams,
) -> Result<f64> {
    if routes.len() != clusters.len() {
        return Err(Error::Structure(format!(
            "{} routes for {} clusters",
            routes.len(),
            clusters.len()
        )));
    }
    let mut total = 0.0;
    for (c, route) in clusters.iter().zip(routes) {
        let head = c
            .head
            .ok_or_else(|| Error::Structure(format!("cluster {} has no head", c.id)))?;
        if route.first() != Some(&Hop::Node(head)) {
            return Err(Error::Structure(format!(
                "route of cluster {} does not start at its head",
                c.id
            )));
        }
        let next = route
            .get(1)
            .ok_or_else(|| Error::Structure(format!("route of cluster {} is empty", c.id)))?;
        let d = network
            .node(head)
            .pos
            .distance(hop_position(network, *next));
        total += uplink_cost(bits_per_ch, d, p);
    }
    Ok(total)
}

/// One head's share of the inter-cluster cost.
#[inline]
pub fn uplink_cost(bits: f64, distance: f64, p: &EnergyParams) -> f64 {
    bits * ((p.epsilon + p.omega) + p.gamma * p.amplified(distance))
}

pub(crate) fn hop_position(network: &Network, hop: Hop) -> Point {
    match hop {
        Hop::Node(id) => network.node(id).pos,
        Hop::BaseStation => network.bs_pos(),
    }
}

/// Intra-cluster cost: `Σ αᵢ·(ε + γ·dᵢⁿ)` over the edges of the cluster's
/// flow tree, with `αᵢ` the bits on edge `i` after aggregation below it.
///
/// Every non-dead member takes part, each producing `bits_per_member`.
pub fn intra_cluster_cost(
    cluster: &Cluster,
    network: &Network,
    bits_per_member: f64,
    p: &EnergyParams,
    agg: &AggregationParams,
) -> f64 {
    let Some(tree) = build_flow_tree(cluster, network, Participation::Alive) else {
        return 0.0;
    };
    let agg = AggregationParams {
        b0: bits_per_member,
        ..*agg
    };
    let volumes = flow_volumes(&tree, &agg, p, 1);
    tree.edges
        .iter()
        .zip(&volumes.edge_bits)
        .map(|(e, &bits)| tx_energy_f(bits, e.distance, p))
        .sum()
}

/// Orbital spacing for a measured node density (nodes per m²):
/// `r_min = 1/√D`, `r_od = √(r_max · r_min)` clamped to `[r_min, r_max]`.
pub fn orbital_distance_for_density(r_max: f64, density: f64) -> f64 {
    if !(density > 0.0) {
        return r_max;
    }
    let r_min = 1.0 / density.sqrt();
    if r_min >= r_max {
        return r_max;
    }
    (r_max * r_min).sqrt().clamp(r_min, r_max)
}

/// Orbital spacing around `center`: counts the nodes within `r_max`
/// (excluding one sitting on `center`), turns that into a density over the
/// disc, and applies [`orbital_distance_for_density`].
pub fn orbital_distance(r_max: f64, network: &Network, center: Point) -> f64 {
    let neighbours = network
        .nodes_within(center, r_max)
        .into_iter()
        .filter(|&id| network.node(id).pos.distance_sq(center) > 0.0)
        .count();
    if neighbours == 0 {
        return r_max;
    }
    let density = neighbours as f64 / (std::f64::consts::PI * r_max * r_max);
    orbital_distance_for_density(r_max, density)
}
