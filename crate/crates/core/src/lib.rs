//! Simulator for cyclic-cellular-automaton based clustering in wireless
//! sensor networks, with a LEACH baseline.

pub mod aggregation;
pub mod ca;
pub mod clustering;
pub mod config;
pub mod energy;
pub mod error;
pub mod events;
pub mod flow;
pub mod geometry;
pub mod leach;
pub mod network;
pub mod output;
pub mod plot;
pub mod routing;
pub mod sim;

pub use ca::{CellState, Grid, Neighbourhood, RuleParams, SeedSpec};
pub use clustering::{generate_clusters, ClusterSet, FormationParams};
pub use config::{Config, Protocol, RoutingMode};
pub use energy::EnergyParams;
pub use error::{Error, Result};
pub use events::{Event, EventKind};
pub use geometry::Point;
pub use network::{Cluster, Mode, Network, Node, NodeId, Role};
pub use output::RunManifest;
pub use plot::{render_plots, Labeled};
pub use sim::{run, MetricsSeries, RoundMetrics, Simulation};
