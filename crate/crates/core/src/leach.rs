//! LEACH baseline: randomised, rotating cluster-head self-election with
//! single-hop members and direct head uplinks.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::network::{Cluster, Mode, Network, NodeId};

/// Head probabilities at or above 1 are clamped here so the threshold
/// denominator stays positive.
pub const P_CLAMP: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeachParams {
    /// Desired fraction of heads per round.
    pub p: f64,
}

impl LeachParams {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::config("leach.p", "0 < p ≤ 1"));
        }
        Ok(Self { p: p.min(P_CLAMP) })
    }

    /// Rounds per epoch, `1/p` rounded to the nearest whole round.
    pub fn rounds_per_epoch(&self) -> u64 {
        ((1.0 / self.p).round() as u64).max(1)
    }

    /// Election threshold for an eligible node in `round`.
    pub fn threshold(&self, round: u64) -> f64 {
        let r = (round % self.rounds_per_epoch()) as f64;
        let t = self.p / (1.0 - self.p * r);
        if t > 0.0 {
            t.min(1.0)
        } else {
            1.0
        }
    }
}

/// Per-node election memory across rounds.
#[derive(Debug, Clone)]
pub struct LeachState {
    pub params: LeachParams,
    /// Epoch in which each node last served as head.
    served_in: Vec<Option<u64>>,
}

impl LeachState {
    pub fn new(params: LeachParams, nodes: usize) -> Self {
        Self {
            params,
            served_in: vec![None; nodes],
        }
    }

    pub fn eligible(&self, id: NodeId, round: u64) -> bool {
        let epoch = round / self.params.rounds_per_epoch();
        self.served_in[id] != Some(epoch)
    }
}

/// Elects this round's heads and groups every live node with its nearest
/// head. All live nodes become active. Cluster ids are positions in the
/// returned list, heads in ascending id order.
pub fn leach_setup(
    network: &mut Network,
    state: &mut LeachState,
    round: u64,
    rng: &mut ChaCha8Rng,
) -> Vec<Cluster> {
    let threshold = state.params.threshold(round);
    let epoch = round / state.params.rounds_per_epoch();
    let mut heads = Vec::new();
    for n in network.nodes() {
        if !n.is_alive() {
            continue;
        }
        // draw for every live node so the stream does not depend on eligibility
        let draw: f64 = rng.random();
        if state.eligible(n.id, round) && draw < threshold {
            heads.push(n.id);
        }
    }
    if heads.is_empty() {
        let best = network
            .nodes()
            .iter()
            .filter(|n| n.is_alive())
            .max_by(|a, b| a.energy.total_cmp(&b.energy).then(b.id.cmp(&a.id)));
        match best {
            Some(n) => heads.push(n.id),
            None => return Vec::new(),
        }
    }
    for &h in &heads {
        state.served_in[h] = Some(epoch);
    }

    let mut members: Vec<Vec<NodeId>> = heads.iter().map(|&h| vec![h]).collect();
    let head_pos: Vec<_> = heads.iter().map(|&h| network.node(h).pos).collect();
    for n in network.nodes() {
        if !n.is_alive() || heads.binary_search(&n.id).is_ok() {
            continue;
        }
        let nearest = head_pos
            .iter()
            .enumerate()
            .min_by(|(i, a), (j, b)| {
                a.distance_sq(n.pos)
                    .total_cmp(&b.distance_sq(n.pos))
                    .then(heads[*i].cmp(&heads[*j]))
            })
            .map(|(i, _)| i)
            .expect("at least one head");
        members[nearest].push(n.id);
    }

    for n in network.nodes_mut() {
        if n.is_alive() {
            n.mode = Mode::Active;
        }
    }
    let clusters: Vec<Cluster> = heads
        .iter()
        .zip(members)
        .enumerate()
        .map(|(i, (&h, mut m))| {
            m.sort_unstable();
            Cluster {
                id: i,
                nucleus: m.clone(),
                members: m,
                orbits: Vec::new(),
                head: Some(h),
                r_od: 0.0,
                center: network.node(h).pos,
            }
        })
        .collect();
    network.apply_clusters(&clusters);
    clusters
}
