//! Cluster formation by spiral propagation, cluster-head placement, and
//! the per-round verification/repair pass.
//!
//! Formation seeds the automaton at well-spread nodes and lets the fronts
//! expand. After every generation each node that some front has reached
//! joins the nearest such seed; everything else is still its own
//! one-node cluster. The inter-cluster cost (every head's uplink) falls as
//! fronts absorb singletons while the intra-cluster cost rises, and
//! propagation stops at the first generation where the intra cost catches
//! up with the inter cost.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::aggregation::AggregationParams;
use crate::ca::{Grid, RuleParams, SeedSpec};
use crate::energy::{intra_cluster_cost, orbital_distance, uplink_cost, EnergyParams};
use crate::error::{Error, Result};
use crate::events::{Event, EventKind};
use crate::geometry::{geometric_median, Point};
use crate::network::{assign_atomic_structure, Cluster, Mode, Network, NodeId, Role};
use crate::routing::{greedy_next_hop, Hop};

/// Weiszfeld iteration budget for head placement.
pub const MEDIAN_MAX_ITER: usize = 100;
/// Weiszfeld convergence tolerance, metres.
pub const MEDIAN_TOL: f64 = 1e-6;

/// Everything cluster formation needs besides the network and the seeds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormationParams {
    pub k: u8,
    pub rules: RuleParams,
    /// Maximum transmission range used for the orbital distance, metres.
    pub r_max: f64,
    /// Generation cap for spiral propagation.
    pub max_steps: usize,
    pub energy: EnergyParams,
    pub aggregation: AggregationParams,
}

/// Costs of the provisional clustering at one generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostSample {
    pub generation: u64,
    /// f(∅): uplink cost of every head, singletons included.
    pub inter: f64,
    /// f(I): member-side cost inside the seeded clusters.
    pub intra: f64,
    /// Nodes absorbed by some front.
    pub reached: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSet {
    pub clusters: Vec<Cluster>,
    pub seed_positions: Vec<(usize, usize)>,
    /// Generation at which propagation stopped.
    pub formation_generation: u64,
    /// Whether the stop was a genuine cost crossover.
    pub crossed: bool,
    pub cost_log: Vec<CostSample>,
    /// Generation whose automaton states decide the initial active set.
    pub phase_generation: u64,
    /// Automaton state per node at `phase_generation`.
    phase: Vec<u8>,
    /// Cached geometric median of each cluster's members.
    medians: Vec<Point>,
}

impl ClusterSet {
    /// A cluster set with no automaton phase information (every member
    /// starts active). Used by protocols that build clusters directly.
    pub fn from_clusters(clusters: Vec<Cluster>, network: &Network) -> Self {
        let medians = clusters.iter().map(|c| member_median(c, network)).collect();
        Self {
            clusters,
            seed_positions: Vec::new(),
            formation_generation: 0,
            crossed: true,
            cost_log: Vec::new(),
            phase_generation: 0,
            phase: vec![1; network.len()],
            medians,
        }
    }

    pub fn phase_state(&self, id: NodeId) -> u8 {
        self.phase[id]
    }

    pub fn median(&self, cluster: usize) -> Point {
        self.medians[cluster]
    }

    /// Applies the clustering to the network: membership, modes from the
    /// automaton phase band (odd states are active), head selection,
    /// active/stand-by partners and rotation timers.
    pub fn install(&mut self, network: &mut Network, rotation_period: u32) {
        network.apply_clusters(&self.clusters);
        for c in &self.clusters {
            for &id in &c.members {
                let n = network.node_mut(id);
                if n.is_alive() {
                    n.mode = if self.phase[id] % 2 == 1 {
                        Mode::Active
                    } else {
                        Mode::Standby
                    };
                }
            }
        }
        for ci in 0..self.clusters.len() {
            let median = self.medians[ci];
            let cluster = &mut self.clusters[ci];
            cluster.head = None;
            ensure_head(cluster, network, median);
        }
        for c in &self.clusters {
            for group in c.groups() {
                pair_group(network, group);
            }
        }
        for n in network.nodes_mut() {
            n.timer = rotation_period;
        }
    }
}

/// Farthest-point sampling: a uniformly random first node, then repeatedly
/// the node farthest from every seed chosen so far (ties to lowest id).
pub fn select_seed_positions(
    network: &Network,
    target_count: usize,
    rng_seed: u64,
) -> Result<Vec<(usize, usize)>> {
    if target_count == 0 {
        return Err(Error::config("clustering.seed_count", "seed_count ≥ 1"));
    }
    if !network.is_lattice() {
        return Err(Error::Structure(
            "seed selection needs a lattice deployment".into(),
        ));
    }
    let candidates: Vec<NodeId> = network
        .nodes()
        .iter()
        .filter(|n| n.is_alive())
        .map(|n| n.id)
        .collect();
    if target_count > candidates.len() {
        return Err(Error::config(
            "clustering.seed_count",
            format!("seed_count ≤ {} live nodes", candidates.len()),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let first = candidates[rng.random_range(0..candidates.len())];
    let mut chosen = vec![first];
    let mut nearest: Vec<f64> = candidates
        .iter()
        .map(|&id| network.node(id).pos.distance_sq(network.node(first).pos))
        .collect();
    while chosen.len() < target_count {
        let (best, _) = nearest
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, &d)| if d > acc.1 { (i, d) } else { acc },
            );
        let pick = candidates[best];
        chosen.push(pick);
        let p = network.node(pick).pos;
        for (i, &id) in candidates.iter().enumerate() {
            nearest[i] = nearest[i].min(network.node(id).pos.distance_sq(p));
        }
    }
    Ok(chosen
        .into_iter()
        .map(|id| network.cell_of(id).expect("lattice"))
        .collect())
}

/// Smallest Voronoi cell (in live nodes) among the seeds; the default
/// minimum cluster size for the aggregation model.
pub fn seed_sigma(network: &Network, seeds: &[(usize, usize)]) -> f64 {
    let seed_pos: Vec<Point> = seeds
        .iter()
        .map(|&(x, y)| Point::new(x as f64, y as f64))
        .collect();
    let mut counts = vec![0usize; seeds.len()];
    for n in network.nodes().iter().filter(|n| n.is_alive()) {
        if let Some(s) = nearest_index(n.pos, &seed_pos, |_| true) {
            counts[s] += 1;
        }
    }
    counts.into_iter().min().unwrap_or(1).max(1) as f64
}

fn nearest_index(p: Point, seeds: &[Point], allowed: impl Fn(usize) -> bool) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in seeds.iter().enumerate() {
        if !allowed(i) {
            continue;
        }
        let d = p.distance_sq(*s);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i)
}

/// Spiral propagation state shared by [`generate_clusters`] and
/// [`cost_sweep`].
struct Propagation<'a> {
    network: &'a Network,
    params: &'a FormationParams,
    seed_ids: Vec<NodeId>,
    seed_pos: Vec<Point>,
    seed_r_od: Vec<f64>,
    grid: Grid,
    scratch: Grid,
    /// Largest front extent seen so far per seed, in Chebyshev cells.
    reach: Vec<usize>,
    /// Cells that have been non-zero at some generation.
    ever: Vec<bool>,
}

impl<'a> Propagation<'a> {
    fn new(
        network: &'a Network,
        params: &'a FormationParams,
        seeds: &[(usize, usize)],
    ) -> Result<Self> {
        if seeds.is_empty() {
            return Err(Error::config("clustering.seeds", "at least one seed"));
        }
        if !network.is_lattice() {
            return Err(Error::Structure(
                "cluster formation needs a lattice deployment".into(),
            ));
        }
        params.rules.validate()?;
        let (w, h) = network.field_size();
        let grid = Grid::new(
            w,
            h,
            params.k,
            &SeedSpec::SeededNuclei {
                positions: seeds.to_vec(),
            },
        )?;
        let seed_ids: Vec<NodeId> = seeds
            .iter()
            .map(|&(x, y)| network.node_at(x, y).expect("checked by grid"))
            .collect();
        let seed_pos: Vec<Point> = seed_ids.iter().map(|&id| network.node(id).pos).collect();
        let seed_r_od = seed_pos
            .iter()
            .map(|&p| orbital_distance(params.r_max, network, p))
            .collect();
        let scratch = grid.clone();
        Ok(Self {
            network,
            params,
            seed_ids,
            seed_pos,
            seed_r_od,
            ever: vec![false; w * h],
            reach: vec![0; seeds.len()],
            grid,
            scratch,
        })
    }

    fn observe(&mut self) -> Result<()> {
        for (e, &s) in self.ever.iter_mut().zip(self.grid.cells()) {
            *e |= s != 0;
        }
        for (i, &id) in self.seed_ids.iter().enumerate() {
            let cell = self.network.cell_of(id).expect("lattice");
            self.reach[i] = self.reach[i].max(self.grid.front_distance(cell)?);
        }
        Ok(())
    }

    fn advance(&mut self) {
        self.grid.step_into(&self.params.rules, &mut self.scratch);
        std::mem::swap(&mut self.grid, &mut self.scratch);
    }

    fn reached_by(&self, id: NodeId, seed: usize) -> bool {
        let (x, y) = self.network.cell_of(id).expect("lattice");
        let (sx, sy) = self.network.cell_of(self.seed_ids[seed]).expect("lattice");
        x.abs_diff(sx).max(y.abs_diff(sy)) <= self.reach[seed]
    }

    /// Nearest reached seed per live node, `None` when no front got there.
    fn assignment(&self) -> Vec<Option<usize>> {
        self.network
            .nodes()
            .iter()
            .map(|n| {
                if !n.is_alive() {
                    return None;
                }
                nearest_index(n.pos, &self.seed_pos, |s| self.reached_by(n.id, s))
            })
            .collect()
    }

    fn sample(&self) -> Result<CostSample> {
        let assignment = self.assignment();
        let p = &self.params.energy;
        let bits = self.params.aggregation.b0;

        let mut members: Vec<Vec<NodeId>> = vec![Vec::new(); self.seed_ids.len()];
        for (id, a) in assignment.iter().enumerate() {
            if let Some(s) = a {
                members[*s].push(id);
            }
        }
        let mut intra = 0.0;
        for (s, m) in members.iter().enumerate() {
            if m.len() <= 1 {
                continue;
            }
            let mut cluster =
                assign_atomic_structure(self.network, m, self.seed_pos[s], self.seed_r_od[s])?;
            cluster.head = Some(self.seed_ids[s]);
            intra += intra_cluster_cost(&cluster, self.network, bits, p, &self.params.aggregation);
        }

        let mut is_head = vec![false; self.network.len()];
        for &id in &self.seed_ids {
            is_head[id] = true;
        }
        let mut reached = 0;
        for (id, a) in assignment.iter().enumerate() {
            if a.is_some() {
                reached += 1;
            } else if self.network.node(id).is_alive() {
                is_head[id] = true;
            }
        }
        let mut inter = 0.0;
        for (id, _) in is_head.iter().enumerate().filter(|(_, h)| **h) {
            let next = greedy_next_hop(id, |h| is_head[h], self.network);
            let here = self.network.node(id).pos;
            let d = match next {
                Hop::Node(n) => here.distance(self.network.node(n).pos),
                Hop::BaseStation => here.distance(self.network.bs_pos()),
            };
            inter += uplink_cost(bits, d, p);
        }
        Ok(CostSample {
            generation: self.grid.generation(),
            inter,
            intra,
            reached,
        })
    }
}

/// Provisional f(∅)/f(I) for generations `0..=steps`, never stopping early.
pub fn cost_sweep(
    network: &Network,
    params: &FormationParams,
    seeds: &[(usize, usize)],
    steps: usize,
) -> Result<Vec<CostSample>> {
    let mut prop = Propagation::new(network, params, seeds)?;
    let mut log = Vec::with_capacity(steps + 1);
    for t in 0..=steps {
        prop.observe()?;
        log.push(prop.sample()?);
        if t < steps {
            prop.advance();
        }
    }
    Ok(log)
}

/// Grows clusters from `seeds` and stops at the first generation where
/// f(I) ≥ f(∅), or at `max_steps`.
///
/// Reached nodes join their nearest reached seed, unreached ones the
/// nearest seed. Each cluster is centred on the geometric median of its
/// members, laid out at the local orbital distance, and gets a provisional
/// head; [`ClusterSet::install`] finalises modes and heads.
pub fn generate_clusters(
    network: &Network,
    params: &FormationParams,
    seeds: &[(usize, usize)],
) -> Result<ClusterSet> {
    let mut prop = Propagation::new(network, params, seeds)?;
    let mut log = Vec::new();
    let mut crossed = false;
    loop {
        prop.observe()?;
        let sample = prop.sample()?;
        log.push(sample);
        if sample.intra >= sample.inter {
            crossed = true;
            break;
        }
        if sample.generation as usize >= params.max_steps {
            break;
        }
        prop.advance();
    }
    let formation_generation = prop.grid.generation();
    let reached = prop.assignment();

    let mut members: Vec<Vec<NodeId>> = vec![Vec::new(); seeds.len()];
    for n in network.nodes().iter().filter(|n| n.is_alive()) {
        let s = match reached[n.id] {
            Some(s) => s,
            None => nearest_index(n.pos, &prop.seed_pos, |_| true).expect("seeds non-empty"),
        };
        members[s].push(n.id);
    }

    // Let the waves finish sweeping the field so that every cell has a
    // meaningful phase; the phase band then picks the active set.
    let (w, h) = network.field_size();
    let extra_cap = w.max(h) + params.k as usize;
    let mut extra = 0;
    while prop.ever.iter().any(|e| !e) && extra < extra_cap {
        prop.advance();
        for (e, &s) in prop.ever.iter_mut().zip(prop.grid.cells()) {
            *e |= s != 0;
        }
        extra += 1;
    }
    let phase_generation = prop.grid.generation();
    let phase = prop.grid.cells().to_vec();

    let mut clusters = Vec::new();
    let mut medians = Vec::new();
    for m in members.into_iter().filter(|m| !m.is_empty()) {
        let pts: Vec<Point> = m.iter().map(|&id| network.node(id).pos).collect();
        let median = geometric_median(&pts, MEDIAN_MAX_ITER, MEDIAN_TOL).expect("non-empty");
        let r_od = orbital_distance(params.r_max, network, median);
        let mut cluster = match assign_atomic_structure(network, &m, median, r_od) {
            Ok(c) => c,
            Err(Error::Structure(_)) => {
                // nobody near the median: centre on the closest member
                let anchor = nearest_member(network, &m, median);
                assign_atomic_structure(network, &m, network.node(anchor).pos, r_od)?
            }
            Err(e) => return Err(e),
        };
        cluster.id = clusters.len();
        clusters.push(cluster);
        medians.push(median);
    }

    Ok(ClusterSet {
        clusters,
        seed_positions: seeds.to_vec(),
        formation_generation,
        crossed,
        cost_log: log,
        phase_generation,
        phase,
        medians,
    })
}

fn nearest_member(network: &Network, members: &[NodeId], p: Point) -> NodeId {
    *members
        .iter()
        .min_by(|&&a, &&b| {
            network
                .node(a)
                .pos
                .distance_sq(p)
                .total_cmp(&network.node(b).pos.distance_sq(p))
                .then(a.cmp(&b))
        })
        .expect("non-empty")
}

fn member_median(cluster: &Cluster, network: &Network) -> Point {
    let alive: Vec<Point> = cluster
        .members
        .iter()
        .filter(|&&id| network.node(id).is_alive())
        .map(|&id| network.node(id).pos)
        .collect();
    let pts = if alive.is_empty() {
        cluster
            .members
            .iter()
            .map(|&id| network.node(id).pos)
            .collect()
    } else {
        alive
    };
    geometric_median(&pts, MEDIAN_MAX_ITER, MEDIAN_TOL).unwrap_or(cluster.center)
}

/// Cluster head by median placement: the active nucleon closest to the
/// geometric median of the members, among nucleons holding at least the
/// mean residual energy of the active nucleus (ties to lowest id).
///
/// With no active nucleon, the highest-energy active member is promoted
/// (ties broken by distance to the median). `None` when nothing in the
/// cluster is active.
pub fn select_cluster_head(cluster: &Cluster, network: &Network) -> Option<NodeId> {
    head_near(cluster, network, member_median(cluster, network))
}

fn head_near(cluster: &Cluster, network: &Network, median: Point) -> Option<NodeId> {
    let dist = |id: NodeId| network.node(id).pos.distance_sq(median);
    let active: Vec<NodeId> = cluster
        .nucleus
        .iter()
        .copied()
        .filter(|&id| network.node(id).is_active())
        .collect();
    if !active.is_empty() {
        let mean = active
            .iter()
            .map(|&id| network.node(id).energy)
            .sum::<f64>()
            / active.len() as f64;
        let floor = mean - mean.abs() * 1e-12;
        let eligible: Vec<NodeId> = active
            .iter()
            .copied()
            .filter(|&id| network.node(id).energy >= floor)
            .collect();
        let pool = if eligible.is_empty() {
            &active
        } else {
            &eligible
        };
        return pool
            .iter()
            .copied()
            .min_by(|&a, &b| dist(a).total_cmp(&dist(b)).then(a.cmp(&b)));
    }
    cluster
        .members
        .iter()
        .copied()
        .filter(|&id| network.node(id).is_active())
        .max_by(|&a, &b| {
            network
                .node(a)
                .energy
                .total_cmp(&network.node(b).energy)
                .then(dist(b).total_cmp(&dist(a)))
                .then(b.cmp(&a))
        })
}

/// True when the current head has to be replaced: it is missing, no
/// longer active, or below the mean energy of the active nucleus.
fn head_needs_change(cluster: &Cluster, network: &Network) -> bool {
    let Some(h) = cluster.head else {
        return true;
    };
    let head = network.node(h);
    if !head.is_active() || !cluster.nucleus.contains(&h) {
        return true;
    }
    let (sum, n) = cluster
        .nucleus
        .iter()
        .map(|&id| network.node(id))
        .filter(|n| n.is_active())
        .fold((0.0, 0usize), |(s, c), n| (s + n.energy, c + 1));
    let mean = sum / n as f64;
    head.energy < mean - mean.abs() * 1e-12
}

/// Makes sure `cluster` has a legal head, picking a new one when needed.
/// A promoted non-nucleon moves into the nucleus; a cluster with nothing
/// active wakes its best stand-by node. Returns the new head if it changed.
fn ensure_head(cluster: &mut Cluster, network: &mut Network, median: Point) -> Option<NodeId> {
    if !head_needs_change(cluster, network) {
        return None;
    }
    let old = cluster.head;
    let mut pick = head_near(cluster, network, median);
    if pick.is_none() {
        // wake the best stand-by node, nucleus first
        let dist = |id: NodeId| network.node(id).pos.distance_sq(median);
        let best = |ids: &mut dyn Iterator<Item = NodeId>| {
            ids.filter(|&id| network.node(id).mode == Mode::Standby)
                .max_by(|&a, &b| {
                    network
                        .node(a)
                        .energy
                        .total_cmp(&network.node(b).energy)
                        .then(dist(b).total_cmp(&dist(a)))
                        .then(b.cmp(&a))
                })
        };
        pick = best(&mut cluster.nucleus.iter().copied())
            .or_else(|| best(&mut cluster.members.iter().copied()));
        if let Some(id) = pick {
            network.node_mut(id).mode = Mode::Active;
        }
    }
    if let Some(id) = pick {
        if !cluster.nucleus.contains(&id) {
            for orbit in &mut cluster.orbits {
                for sub in orbit.iter_mut() {
                    sub.retain(|&m| m != id);
                }
                orbit.retain(|s| !s.is_empty());
            }
            cluster.nucleus.push(id);
            cluster.nucleus.sort_unstable();
            network.node_mut(id).orbit_index = Some(0);
        }
    }
    if let Some(o) = old {
        if network.node(o).is_alive() {
            network.node_mut(o).role = Role::Nucleon;
        }
    }
    if let Some(id) = pick {
        network.node_mut(id).role = Role::ClusterHead;
    }
    cluster.head = pick;
    if pick != old {
        pick
    } else {
        None
    }
}

/// Pairs every active node of a group with its nearest unpaired stand-by
/// node of the same group.
fn pair_group(network: &mut Network, group: &[NodeId]) {
    let mut standby: Vec<NodeId> = group
        .iter()
        .copied()
        .filter(|&id| network.node(id).mode == Mode::Standby)
        .collect();
    let active: Vec<NodeId> = group
        .iter()
        .copied()
        .filter(|&id| network.node(id).is_active())
        .collect();
    for a in active {
        let pa = network.node(a).pos;
        let pick = standby
            .iter()
            .enumerate()
            .min_by(|(_, &x), (_, &y)| {
                network
                    .node(x)
                    .pos
                    .distance_sq(pa)
                    .total_cmp(&network.node(y).pos.distance_sq(pa))
                    .then(x.cmp(&y))
            })
            .map(|(i, &s)| (i, s));
        if let Some((i, s)) = pick {
            standby.swap_remove(i);
            network.node_mut(a).partner = Some(s);
            network.node_mut(s).partner = Some(a);
        } else {
            network.node_mut(a).partner = None;
        }
    }
}

/// Nearest stand-by node in the group of `id`, re-paired with it. Any
/// previous partner of that node loses its pairing.
fn repartner(network: &mut Network, clusters: &ClusterSet, id: NodeId) -> Option<NodeId> {
    let cluster = &clusters.clusters[network.node(id).cluster_id?];
    let here = network.node(id).pos;
    let pick = cluster
        .group_of(id)?
        .iter()
        .copied()
        .filter(|&c| network.node(c).mode == Mode::Standby)
        .min_by(|&a, &b| {
            network
                .node(a)
                .pos
                .distance_sq(here)
                .total_cmp(&network.node(b).pos.distance_sq(here))
                .then(a.cmp(&b))
        })?;
    if let Some(q) = network.node(pick).partner {
        network.node_mut(q).partner = None;
    }
    network.node_mut(pick).partner = Some(id);
    network.node_mut(id).partner = Some(pick);
    Some(pick)
}

/// One verification pass at the end of a round.
///
/// 1. Nodes below the death threshold die. A dead active node is replaced
///    by the highest-energy stand-by node of its cluster within sensing
///    range, which also inherits its stand-by partner.
/// 2. Active nodes count down their rotation timer; on expiry they swap
///    with their stand-by partner (lacking one, the nearest stand-by node
///    of their group) and both timers reset.
/// 3. Heads that died, rotated out, or fell below the nucleus mean energy
///    are re-selected.
pub fn verify_and_replace(
    network: &mut Network,
    clusters: &mut ClusterSet,
    params: &EnergyParams,
    rotation_period: u32,
    round: u64,
) -> Vec<Event> {
    let mut events = Vec::new();

    let dying: Vec<NodeId> = network
        .nodes()
        .iter()
        .filter(|n| n.is_alive() && n.energy < params.dead_threshold)
        .map(|n| n.id)
        .collect();
    let mut was_active = Vec::with_capacity(dying.len());
    for &id in &dying {
        let n = network.node_mut(id);
        was_active.push(n.is_active());
        n.mode = Mode::Dead;
        events.push(Event::new(round, EventKind::Death, vec![id]));
    }
    for (&id, &active) in dying.iter().zip(&was_active) {
        let partner = network.node_mut(id).partner.take();
        if let Some(p) = partner {
            if network.node(p).partner == Some(id) {
                network.node_mut(p).partner = None;
            }
        }
        network.node_mut(id).partner = None;
        if !active {
            continue;
        }
        let radius = network.sensing_radius();
        let here = network.node(id).pos;
        let cluster = network.node(id).cluster_id;
        let replacement = network
            .nodes_within(here, radius)
            .into_iter()
            .filter(|&c| {
                let n = network.node(c);
                n.mode == Mode::Standby && n.cluster_id == cluster
            })
            .max_by(|&a, &b| {
                network
                    .node(a)
                    .energy
                    .total_cmp(&network.node(b).energy)
                    .then(b.cmp(&a))
            });
        match replacement {
            Some(r) => {
                if let Some(q) = network.node(r).partner {
                    network.node_mut(q).partner = None;
                }
                let inherit = partner.filter(|&p| p != r && network.node(p).mode == Mode::Standby);
                {
                    let n = network.node_mut(r);
                    n.mode = Mode::Active;
                    n.timer = rotation_period;
                    n.partner = inherit;
                }
                if let Some(p) = inherit {
                    network.node_mut(p).partner = Some(r);
                }
                events.push(Event::new(round, EventKind::Replacement, vec![id, r]));
            }
            None => events.push(Event::new(round, EventKind::Unreplaced, vec![id])),
        }
    }

    let active: Vec<NodeId> = network
        .nodes()
        .iter()
        .filter(|n| n.is_active())
        .map(|n| n.id)
        .collect();
    for id in active {
        let n = network.node_mut(id);
        n.timer = n.timer.saturating_sub(1);
        if n.timer > 0 {
            continue;
        }
        n.timer = rotation_period;
        let current = n.partner.filter(|&p| network.node(p).mode == Mode::Standby);
        let Some(p) = current.or_else(|| repartner(network, clusters, id)) else {
            continue;
        };
        network.node_mut(id).mode = Mode::Standby;
        let incoming = network.node_mut(p);
        incoming.mode = Mode::Active;
        incoming.timer = rotation_period;
        events.push(Event::new(round, EventKind::Rotation, vec![id, p]));
    }

    for ci in 0..clusters.clusters.len() {
        let median = clusters.medians[ci];
        let cluster = &mut clusters.clusters[ci];
        if let Some(h) = ensure_head(cluster, network, median) {
            events.push(Event::new(round, EventKind::NewHead, vec![h]).in_cluster(cluster.id));
        }
    }
    events
}
