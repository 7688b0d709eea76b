//! Cluster-head uplink routing toward the base station.

use serde::{Deserialize, Serialize};

use crate::network::{Network, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hop {
    Node(NodeId),
    BaseStation,
}

/// Ordered hops from a cluster head to the base station.
pub type Route = Vec<Hop>;

/// Greedy geographic forwarding over cluster heads.
///
/// From the current head, the next hop is the head strictly closer to the
/// base station that is nearest to the current one. When no such head
/// exists, or the base station is at least as near as the best candidate,
/// the packet goes straight to the base station. The base-station distance
/// strictly decreases along the path, so it is loop-free.
pub fn route_ch_to_bs(head: NodeId, heads: &[NodeId], network: &Network) -> Route {
    let mut is_head = vec![false; network.len()];
    for &h in heads {
        is_head[h] = true;
    }
    let mut path = vec![Hop::Node(head)];
    let mut current = head;
    loop {
        match greedy_next_hop(current, |h| is_head[h], network) {
            Hop::Node(h) => {
                path.push(Hop::Node(h));
                current = h;
            }
            Hop::BaseStation => {
                path.push(Hop::BaseStation);
                return path;
            }
        }
    }
}

/// First hop of [`route_ch_to_bs`] from `current`, with head membership
/// given as a predicate. Searches outward in doubling radii so that dense
/// head sets stay cheap.
pub fn greedy_next_hop(
    current: NodeId,
    is_head: impl Fn(NodeId) -> bool,
    network: &Network,
) -> Hop {
    let bs = network.bs_pos();
    let here = network.node(current).pos;
    let here_to_bs_sq = here.distance_sq(bs);
    let here_to_bs = here_to_bs_sq.sqrt();
    let mut radius = 1.0f64;
    loop {
        let r = radius.min(here_to_bs);
        let next = network
            .nodes_within(here, r)
            .into_iter()
            .filter(|&h| {
                h != current
                    && is_head(h)
                    && network.node(h).pos.distance_sq(bs) < here_to_bs_sq
                    && network.node(h).pos.distance_sq(here) < here_to_bs_sq
            })
            .min_by(|&a, &b| {
                let da = network.node(a).pos.distance_sq(here);
                let db = network.node(b).pos.distance_sq(here);
                da.total_cmp(&db).then(a.cmp(&b))
            });
        if let Some(h) = next {
            return Hop::Node(h);
        }
        if r >= here_to_bs {
            return Hop::BaseStation;
        }
        radius *= 2.0;
    }
}

/// Single-hop uplink.
pub fn route_direct(head: NodeId) -> Route {
    vec![Hop::Node(head), Hop::BaseStation]
}
