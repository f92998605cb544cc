//! Mesh topology, routing and message delivery.

mod mac;
mod topology;

pub use mac::{transmit, DeliveryResult, InFlightTracker, MacParams};
pub use topology::{build_topology, Topology, TopologyError};
