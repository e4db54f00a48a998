//! Latency modeling and routing optimization for free-space optical
//! satellite networks (FSOSNs).

pub mod constants;
pub mod linkbudget;
pub mod netgraph;
pub mod optimizer;
pub mod orbital;
pub mod studio;

pub use linkbudget::{AtmosphereParams, LinkKind, OpticalParams};
pub use netgraph::{Edge, LinkModel, NodeRef, Snapshot, SnapshotStats, SnapshotUniverse};
pub use optimizer::{
    Commodity, PathSolution, RoutingProblem, SolveStatus, TotalSolution, Violation,
};
pub use orbital::{ConstellationSpec, EcefPosition, GroundSite, SatelliteId};
