//! Intra-cluster data-flow tree.
//!
//! Inside a cluster, data moves member → sub-orbit collector → orbit
//! collector → next inner orbit collector → … → cluster head. Nucleus
//! members send straight to the head. The tree is rebuilt whenever the
//! active set or energies change, so collector duty follows residual
//! energy.

use std::collections::HashMap;

use crate::aggregation::{aggregate_batches, AggregationParams, Batch};
use crate::energy::EnergyParams;
use crate::geometry::Point;
use crate::network::{Cluster, Network, NodeId};

/// Which nodes take part in the data flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Participation {
    /// Every non-dead member; used while clusters are still forming.
    Alive,
    /// Only active members; used during data rounds.
    Active,
}

impl Participation {
    fn admits(self, network: &Network, id: NodeId) -> bool {
        let n = network.node(id);
        match self {
            Participation::Alive => n.is_alive(),
            Participation::Active => n.is_active(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowEdge {
    pub from: NodeId,
    pub to: NodeId,
    pub distance: f64,
}

/// Edges in topological order: every edge into a node precedes the edge
/// leaving it.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowTree {
    pub head: NodeId,
    pub edges: Vec<FlowEdge>,
    /// Sub-orbit and orbit collectors, in the order they were chosen.
    pub relays: Vec<NodeId>,
}

fn pick_collector(network: &Network, group: &[NodeId], center: Point) -> NodeId {
    *group
        .iter()
        .max_by(|&&a, &&b| {
            let (na, nb) = (network.node(a), network.node(b));
            na.energy
                .total_cmp(&nb.energy)
                .then(
                    nb.pos
                        .distance_sq(center)
                        .total_cmp(&na.pos.distance_sq(center)),
                )
                .then(b.cmp(&a))
        })
        .expect("non-empty group")
}

/// Among sub-orbit collectors holding at least their mean residual
/// energy, the one nearest `target` (ties to lowest id).
fn pick_orbit_collector(network: &Network, candidates: &[NodeId], target: Point) -> NodeId {
    let energy = |id: NodeId| network.node(id).energy;
    let mean = candidates.iter().map(|&id| energy(id)).sum::<f64>() / candidates.len() as f64;
    let floor = mean - mean.abs() * 1e-12;
    candidates
        .iter()
        .copied()
        .filter(|&id| energy(id) >= floor)
        .min_by(|&a, &b| {
            let da = network.node(a).pos.distance_sq(target);
            let db = network.node(b).pos.distance_sq(target);
            da.total_cmp(&db).then(a.cmp(&b))
        })
        .unwrap_or(candidates[0])
}

/// Builds the flow tree of `cluster`, or `None` if its head cannot take
/// part.
pub fn build_flow_tree(
    cluster: &Cluster,
    network: &Network,
    who: Participation,
) -> Option<FlowTree> {
    let head = cluster.head?;
    if !who.admits(network, head) {
        return None;
    }
    let pos = |id: NodeId| network.node(id).pos;
    let edge = |from: NodeId, to: NodeId| FlowEdge {
        from,
        to,
        distance: pos(from).distance(pos(to)),
    };

    // Orbit sections are chosen inner to outer (each orbit's collector
    // targets the previous one) but emitted outer to inner.
    let mut sections: Vec<Vec<FlowEdge>> = Vec::with_capacity(cluster.orbits.len());
    let mut relays = Vec::new();
    let mut target = head;
    for orbit in &cluster.orbits {
        let mut section = Vec::new();
        let mut sub_collectors = Vec::new();
        for sub in orbit {
            let live: Vec<NodeId> = sub
                .iter()
                .copied()
                .filter(|&id| who.admits(network, id))
                .collect();
            if live.is_empty() {
                continue;
            }
            let sc = pick_collector(network, &live, cluster.center);
            section.extend(live.iter().filter(|&&id| id != sc).map(|&id| edge(id, sc)));
            sub_collectors.push(sc);
        }
        if sub_collectors.is_empty() {
            sections.push(section);
            continue;
        }
        let oc = pick_orbit_collector(network, &sub_collectors, pos(target));
        section.extend(
            sub_collectors
                .iter()
                .filter(|&&sc| sc != oc)
                .map(|&sc| edge(sc, oc)),
        );
        section.push(edge(oc, target));
        relays.extend(sub_collectors.iter().copied());
        sections.push(section);
        target = oc;
    }

    let mut edges: Vec<FlowEdge> = sections.into_iter().rev().flatten().collect();
    edges.extend(
        cluster
            .nucleus
            .iter()
            .copied()
            .filter(|&id| id != head && who.admits(network, id))
            .map(|id| edge(id, head)),
    );
    Some(FlowTree {
        head,
        edges,
        relays,
    })
}

/// Bit volumes of one round through a flow tree.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowVolumes {
    /// Bits carried by each edge, aligned with `FlowTree::edges`.
    pub edge_bits: Vec<f64>,
    /// Aggregate the head holds for the base-station uplink.
    pub head_bits: f64,
    /// Aggregation energy spent at each collector (including the head).
    pub aggregation: Vec<(NodeId, f64)>,
}

/// Pushes one round through the tree. Every participant senses `readings`
/// messages of `b0` bits. A node without inbound traffic sends its
/// readings unmerged; the first collector on the way merges them, and
/// from there on each node forwards a single aggregated payload.
pub fn flow_volumes(
    tree: &FlowTree,
    agg: &AggregationParams,
    energy: &EnergyParams,
    readings: u32,
) -> FlowVolumes {
    let own_bits = agg.b0 * readings as f64;
    let mut inbox: HashMap<NodeId, Vec<Batch>> = HashMap::new();
    let mut aggregation = Vec::new();
    let mut edge_bits = Vec::with_capacity(tree.edges.len());
    let mut emit = |id: NodeId, inbox: &mut HashMap<NodeId, Vec<Batch>>| -> (f64, u32) {
        match inbox.remove(&id) {
            Some(incoming) => {
                let (out, j) = aggregate_batches(&incoming, own_bits, readings, agg, energy);
                aggregation.push((id, j));
                (out, 1)
            }
            None => (own_bits, readings),
        }
    };
    for e in &tree.edges {
        let (bits, messages) = emit(e.from, &mut inbox);
        edge_bits.push(bits);
        inbox.entry(e.to).or_default().push(Batch {
            bits,
            distance: e.distance,
            messages,
        });
    }
    let (head_bits, _) = emit(tree.head, &mut inbox);
    FlowVolumes {
        edge_bits,
        head_bits,
        aggregation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{assign_atomic_structure, deploy};

    #[test]
    fn tree_reaches_every_participant_once() {
        let net = deploy((15, 15), Point::new(7.0, 40.0), 0.5, 2.0);
        let members: Vec<_> = (0..net.len()).collect();
        let c = assign_atomic_structure(&net, &members, Point::new(7.0, 7.0), 2.2).unwrap();
        let tree = build_flow_tree(&c, &net, Participation::Alive).unwrap();
        assert_eq!(tree.edges.len(), net.len() - 1);
        let mut senders: Vec<_> = tree.edges.iter().map(|e| e.from).collect();
        senders.sort_unstable();
        senders.dedup();
        assert_eq!(senders.len(), net.len() - 1);
        assert!(!senders.contains(&tree.head));
        // topological: nothing is received after a node has sent
        let mut sent = vec![false; net.len()];
        for e in &tree.edges {
            assert!(!sent[e.to], "node {} receives after sending", e.to);
            sent[e.from] = true;
        }
    }

    #[test]
    fn standby_nodes_are_skipped_in_active_mode() {
        let mut net = deploy((5, 5), Point::new(2.0, 20.0), 0.5, 2.0);
        let members: Vec<_> = (0..net.len()).collect();
        let c = assign_atomic_structure(&net, &members, Point::new(2.0, 2.0), 1.5).unwrap();
        assert!(build_flow_tree(&c, &net, Participation::Active).is_none());
        for id in [12, 0, 1, 24] {
            net.node_mut(id).mode = crate::network::Mode::Active;
        }
        let tree = build_flow_tree(&c, &net, Participation::Active).unwrap();
        assert_eq!(tree.head, 12);
        assert_eq!(tree.edges.len(), 3);
    }

    #[test]
    fn raw_leaf_carries_b0() {
        let net = deploy((3, 1), Point::new(0.0, 10.0), 0.5, 2.0);
        let c = assign_atomic_structure(&net, &[0, 1], Point::new(0.0, 0.0), 2.0).unwrap();
        let tree = build_flow_tree(&c, &net, Participation::Alive).unwrap();
        let v = flow_volumes(
            &tree,
            &AggregationParams::default(),
            &EnergyParams::default(),
            1,
        );
        assert_eq!(v.edge_bits, vec![800.0]);
        assert!(v.head_bits > 800.0 && v.head_bits <= 1600.0);
        assert_eq!(v.aggregation.len(), 1);
    }

    #[test]
    fn readings_merge_at_first_collector() {
        let net = deploy((3, 1), Point::new(0.0, 10.0), 0.5, 2.0);
        // 0 is head, 1 and 2 in orbit 1: 2 → 1 → 0
        let c = assign_atomic_structure(&net, &[0, 1, 2], Point::new(0.0, 0.0), 1.0).unwrap();
        let tree = build_flow_tree(&c, &net, Participation::Alive).unwrap();
        let agg = AggregationParams::default();
        let e = EnergyParams::default();
        let v = flow_volumes(&tree, &agg, &e, 5);
        let first = tree.edges.iter().position(|x| x.to != 0).unwrap();
        assert_eq!(v.edge_bits[first], 4000.0);
        let relay = tree.edges.iter().position(|x| x.to == 0).unwrap();
        let merged = crate::aggregation::compressed_bits(10, 1.0, &agg);
        assert!((v.edge_bits[relay] - merged).abs() < 1e-9);
        assert!(v.head_bits < v.edge_bits[relay] + 4000.0);
    }
}
