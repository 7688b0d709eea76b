//! Round loop: data collection up the cluster trees, head uplinks,
//! stand-by drain, verification, metrics.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use std::collections::HashMap;

use crate::aggregation::{aggregate_batches, AggregationParams, Batch};
use crate::clustering::{
    generate_clusters, seed_sigma, select_seed_positions, verify_and_replace, ClusterSet,
};
use crate::config::{Config, Protocol, RoutingMode};
use crate::energy::{rx_energy, tx_energy, EnergyParams};
use crate::error::Result;
use crate::events::{Event, EventKind};
use crate::flow::{build_flow_tree, flow_volumes, Participation};
use crate::leach::{leach_setup, LeachParams, LeachState};
use crate::network::{coverage, deploy, Mode, Network, NodeId};
use crate::routing::{greedy_next_hop, Hop};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundMetrics {
    pub round: u64,
    pub active: usize,
    pub standby: usize,
    pub dead: usize,
    pub coverage: f64,
    pub energy_total: f64,
    pub energy_spent: f64,
    pub ch_count: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsSeries {
    pub protocol: Option<Protocol>,
    pub rows: Vec<RoundMetrics>,
    pub first_death_round: Option<u64>,
}

impl MetricsSeries {
    pub fn push(&mut self, row: RoundMetrics) {
        if self.first_death_round.is_none() && row.dead > 0 {
            self.first_death_round = Some(row.round);
        }
        self.rows.push(row);
    }

    /// Last round in the series; the run stops when everything is dead or
    /// at the round cap, so this is the observed lifetime.
    pub fn last_round(&self) -> u64 {
        self.rows.last().map_or(0, |r| r.round)
    }
}

#[derive(Clone)]
pub struct Simulation {
    config: Config,
    network: Network,
    clusters: ClusterSet,
    energy: EnergyParams,
    aggregation: AggregationParams,
    leach: Option<(LeachState, ChaCha8Rng)>,
    round: u64,
    events: Vec<Event>,
    metrics: MetricsSeries,
}

impl Simulation {
    /// Deploys the field and forms clusters. Round 0 of the series is the
    /// state right after formation.
    pub fn new(config: &Config) -> Result<Self> {
        config.validate()?;
        let mut network = deploy(
            (config.field.width, config.field.height),
            config.bs_pos(),
            config.energy.initial,
            config.simulation.sensing_radius,
        );
        let energy = config.energy_params(&network);
        let seed = config.simulation.seed;
        let mut events = Vec::new();
        let (clusters, aggregation, leach) = match config.simulation.protocol {
            Protocol::Ccabc => {
                let seeds = select_seed_positions(&network, config.seed_count(), seed)?;
                let sigma = config
                    .aggregation
                    .sigma
                    .unwrap_or_else(|| seed_sigma(&network, &seeds));
                let formation = config.formation_params(energy, sigma);
                let mut set = generate_clusters(&network, &formation, &seeds)?;
                if !set.crossed {
                    events.push(Event::new(0, EventKind::NoCrossover, Vec::new()));
                }
                set.install(&mut network, config.clustering.rotation_period);
                (set, formation.aggregation, None)
            }
            Protocol::Leach => {
                let params = LeachParams::new(config.leach.p)?;
                let state = LeachState::new(params, network.len());
                let rng = ChaCha8Rng::seed_from_u64(seed);
                for n in network.nodes_mut() {
                    n.mode = Mode::Active;
                }
                let sigma = config.aggregation.sigma.unwrap_or(1.0);
                let set = ClusterSet::from_clusters(Vec::new(), &network);
                (set, config.aggregation_params(sigma), Some((state, rng)))
            }
        };
        let mut sim = Self {
            config: config.clone(),
            network,
            clusters,
            energy,
            aggregation,
            leach,
            round: 0,
            events,
            metrics: MetricsSeries {
                protocol: Some(config.simulation.protocol),
                ..MetricsSeries::default()
            },
        };
        let snapshot = sim.snapshot(0.0);
        sim.metrics.push(snapshot);
        Ok(sim)
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn clusters(&self) -> &ClusterSet {
        &self.clusters
    }

    pub fn energy_params(&self) -> &EnergyParams {
        &self.energy
    }

    pub fn aggregation_params(&self) -> &AggregationParams {
        &self.aggregation
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn metrics(&self) -> &MetricsSeries {
        &self.metrics
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn all_dead(&self) -> bool {
        self.network.nodes().iter().all(|n| !n.is_alive())
    }

    pub fn finished(&self) -> bool {
        self.round >= self.config.simulation.rounds_max || self.all_dead()
    }

    /// Runs one round and returns its metrics row.
    pub fn step(&mut self) -> RoundMetrics {
        self.round += 1;
        let round = self.round;
        let mut spent = 0.0;

        if let Some((state, rng)) = &mut self.leach {
            let clusters = leach_setup(&mut self.network, state, round - 1, rng);
            self.clusters = ClusterSet::from_clusters(clusters, &self.network);
        }

        spent += self.collect_and_uplink();

        let standby: Vec<NodeId> = self
            .network
            .nodes()
            .iter()
            .filter(|n| n.mode == Mode::Standby)
            .map(|n| n.id)
            .collect();
        for id in standby {
            spent += self.network.charge(id, self.energy.standby_per_round);
        }

        let events = match self.config.simulation.protocol {
            Protocol::Ccabc => verify_and_replace(
                &mut self.network,
                &mut self.clusters,
                &self.energy,
                self.config.clustering.rotation_period,
                round,
            ),
            Protocol::Leach => mark_deaths(&mut self.network, &self.energy, round),
        };
        self.events.extend(events);

        let row = self.snapshot(spent);
        self.metrics.push(row);
        row
    }

    /// Steps until the round cap or until every node is dead.
    pub fn run_to_end(&mut self) {
        while !self.finished() {
            self.step();
        }
    }

    /// Consumes the simulation after running it to the end.
    pub fn run(mut self) -> (MetricsSeries, Vec<Event>) {
        self.run_to_end();
        (self.metrics, self.events)
    }

    fn snapshot(&self, spent: f64) -> RoundMetrics {
        let ch_count = self
            .clusters
            .clusters
            .iter()
            .filter(|c| c.head.is_some_and(|h| self.network.node(h).is_active()))
            .count();
        RoundMetrics {
            round: self.round,
            active: self.network.count(Mode::Active),
            standby: self.network.count(Mode::Standby),
            dead: self.network.count(Mode::Dead),
            coverage: coverage(&self.network),
            energy_total: self.network.total_energy(),
            energy_spent: spent,
            ch_count,
        }
    }

    /// Member traffic up every cluster tree, then the head uplinks. Returns
    /// the energy actually removed.
    fn collect_and_uplink(&mut self) -> f64 {
        let readings = self.config.simulation.transmissions_per_round;
        let p = self.energy;
        let mut spent = 0.0;
        let mut uplinks: Vec<(NodeId, f64)> = Vec::new();
        for c in &self.clusters.clusters {
            let Some(tree) = build_flow_tree(c, &self.network, Participation::Active) else {
                continue;
            };
            let volumes = flow_volumes(&tree, &self.aggregation, &p, readings);
            for (e, &bits) in tree.edges.iter().zip(&volumes.edge_bits) {
                let b = radio_bits(bits);
                spent += self.network.charge(e.from, tx_energy(b, e.distance, &p));
                spent += self
                    .network
                    .charge(e.to, rx_energy(b, &p) + p.omega * b as f64);
            }
            uplinks.push((tree.head, volumes.head_bits));
        }
        spent + self.uplink(&uplinks)
    }

    /// Sends every head's aggregate toward the base station. With greedy
    /// routing a head relaying for others merges what it receives with its
    /// own aggregate, so heads are served farthest-from-the-BS first.
    fn uplink(&mut self, uplinks: &[(NodeId, f64)]) -> f64 {
        let p = self.energy;
        let bs = self.network.bs_pos();
        let direct = self.leach.is_some() || self.config.simulation.routing == RoutingMode::Direct;
        let mut is_head = vec![false; self.network.len()];
        for &(h, _) in uplinks {
            is_head[h] = true;
        }
        let mut order: Vec<(NodeId, f64)> = uplinks.to_vec();
        order.sort_by(|a, b| {
            let da = self.network.node(a.0).pos.distance_sq(bs);
            let db = self.network.node(b.0).pos.distance_sq(bs);
            db.total_cmp(&da).then(a.0.cmp(&b.0))
        });
        let mut inbox: HashMap<NodeId, Vec<Batch>> = HashMap::new();
        let mut spent = 0.0;
        for (head, own) in order {
            let bits = match inbox.remove(&head) {
                Some(incoming) => {
                    let (out, j) = aggregate_batches(&incoming, own, 1, &self.aggregation, &p);
                    spent += self.network.charge(head, j);
                    out
                }
                None => own,
            };
            let b = radio_bits(bits);
            let here = self.network.node(head).pos;
            let next = if direct {
                Hop::BaseStation
            } else {
                greedy_next_hop(head, |h| is_head[h], &self.network)
            };
            match next {
                Hop::BaseStation => {
                    spent += self
                        .network
                        .charge(head, tx_energy(b, here.distance(bs), &p));
                }
                Hop::Node(n) => {
                    let d = here.distance(self.network.node(n).pos);
                    spent += self.network.charge(head, tx_energy(b, d, &p));
                    spent += self.network.charge(n, rx_energy(b, &p));
                    inbox.entry(n).or_default().push(Batch {
                        bits: b as f64,
                        distance: d,
                        messages: 1,
                    });
                }
            }
        }
        spent
    }
}

/// Real-valued payload rounded up to whole bits for the radio.
#[inline]
pub fn radio_bits(bits: f64) -> u64 {
    bits.ceil() as u64
}

fn mark_deaths(network: &mut Network, p: &EnergyParams, round: u64) -> Vec<Event> {
    let mut events = Vec::new();
    for n in network.nodes_mut() {
        if n.is_alive() && n.energy < p.dead_threshold {
            n.mode = Mode::Dead;
            n.partner = None;
            events.push(Event::new(round, EventKind::Death, vec![n.id]));
        }
    }
    events
}

/// Builds and runs a simulation to the end.
pub fn run(config: &Config) -> Result<(MetricsSeries, Vec<Event>)> {
    Ok(Simulation::new(config)?.run())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::FieldConfig;

    fn small(protocol: Protocol, w: usize) -> Config {
        let mut c = Config {
            field: FieldConfig {
                width: w,
                height: w,
                bs_x: w as f64 / 2.0,
                bs_y: w as f64 + 20.0,
            },
            ..Config::default()
        };
        c.simulation.protocol = protocol;
        c.simulation.rounds_max = 30;
        c
    }

    #[test]
    fn zero_rounds_gives_snapshot_only() {
        let mut c = small(Protocol::Ccabc, 10);
        c.simulation.rounds_max = 0;
        let (m, _) = run(&c).unwrap();
        assert_eq!(m.rows.len(), 1);
        assert_eq!(m.rows[0].round, 0);
        assert_eq!(m.rows[0].energy_spent, 0.0);
        assert_eq!(m.rows[0].energy_total, 50.0);
    }

    #[test]
    fn counts_add_up_and_energy_falls() {
        for protocol in [Protocol::Ccabc, Protocol::Leach] {
            let (m, _) = run(&small(protocol, 12)).unwrap();
            assert_eq!(m.rows.len(), 31);
            for w in m.rows.windows(2) {
                assert!(w[1].energy_total < w[0].energy_total);
                let rel = (w[0].energy_total - w[1].energy_total - w[1].energy_spent).abs()
                    / w[1].energy_spent;
                assert!(rel < 1e-9, "{rel}");
            }
            for r in &m.rows {
                assert_eq!(r.active + r.standby + r.dead, 144);
                assert!((0.0..=1.0).contains(&r.coverage));
            }
        }
    }

    #[test]
    fn head_only_cluster_spends_one_uplink() {
        let mut c = small(Protocol::Ccabc, 1);
        c.field.bs_x = 0.0;
        c.field.bs_y = 30.0;
        c.simulation.rounds_max = 1;
        c.energy.dead_threshold = Some(0.0);
        let mut sim = Simulation::new(&c).unwrap();
        // a lone node always ends up as an active head
        assert!(sim.network().node(0).is_active());
        let row = sim.step();
        let want = tx_energy(4000, 30.0, sim.energy_params());
        assert!((row.energy_spent - want).abs() <= 1e-15 * want);
    }

    #[test]
    fn all_dead_network_spends_nothing() {
        let mut c = small(Protocol::Ccabc, 6);
        c.energy.initial = 1e-9;
        c.energy.dead_threshold = Some(1e-3);
        let mut sim = Simulation::new(&c).unwrap();
        sim.step();
        assert!(sim.all_dead());
        let row = sim.step();
        assert_eq!(row.energy_spent, 0.0);
        assert_eq!(row.dead, 36);
        assert_eq!(row.coverage, 0.0);
    }

    #[test]
    fn leach_rounds_recluster() {
        let mut sim = Simulation::new(&small(Protocol::Leach, 12)).unwrap();
        sim.step();
        assert!(!sim.clusters().clusters.is_empty());
        assert_eq!(sim.metrics().rows[1].standby, 0);
    }
}
