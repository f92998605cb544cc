//! CSMA/CA delivery model: per-hop binary-exponential backoff, a simple
//! load-dependent collision probability, and per-transmitter byte
//! accounting including retries.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Topology;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MacParams {
    pub cw_min: u32,
    pub cw_max: u32,
    pub slot_s: f64,
    pub max_retries: u32,
    pub phy_bitrate_bps: f64,
    pub payload_bytes: u32,
    pub header_bytes: u32,
    /// Cap on the per-hop collision probability.
    pub collision_cap: f64,
}

impl Default for MacParams {
    fn default() -> Self {
        Self {
            cw_min: 8,
            cw_max: 64,
            slot_s: 320e-6,
            max_retries: 4,
            phy_bitrate_bps: 250_000.0,
            payload_bytes: 24,
            header_bytes: 8,
            collision_cap: 0.3,
        }
    }
}

impl MacParams {
    pub fn message_bytes(&self) -> u32 {
        self.payload_bytes + self.header_bytes
    }

    /// Airtime of one transmission attempt.
    pub fn tx_time_s(&self) -> f64 {
        f64::from(self.message_bytes()) * 8.0 / self.phy_bitrate_bps
    }

    /// Contention-window sequence: doubles per retry, capped.
    pub fn cw_for_attempt(&self, attempt: u32) -> u32 {
        (self.cw_min << attempt.min(31)).min(self.cw_max)
    }
}

/// Outcome of routing one trigger message to the sink.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeliveryResult {
    pub delivered: bool,
    /// Emission to sink arrival; meaningful only when delivered.
    pub latency_s: f64,
    /// Bytes transmitted per vertex (origin and every relay, retries
    /// included, accounted even for dropped messages).
    pub bytes_tx: Vec<(usize, u64)>,
}

/// Send one message from `origin` to the sink.
///
/// `p_collision` is the per-attempt collision probability for this message,
/// sampled by the caller from the in-flight load at emission time.
pub fn transmit(
    origin: usize,
    topology: &Topology,
    mac: &MacParams,
    p_collision: f64,
    rng: &mut ChaCha8Rng,
) -> DeliveryResult {
    let path = topology.path_to_sink(origin);
    let tx_time = mac.tx_time_s();
    let msg_bytes = u64::from(mac.message_bytes());
    let mut latency = 0.0;
    let mut bytes_tx: Vec<(usize, u64)> = Vec::with_capacity(path.len() - 1);
    let mut delivered = true;

    'hops: for hop in path.windows(2) {
        let tx_node = hop[0];
        let mut hop_bytes = 0u64;
        let mut success = false;
        for attempt in 0..=mac.max_retries {
            let cw = mac.cw_for_attempt(attempt);
            let backoff_slots = rng.gen_range(0..cw);
            latency += f64::from(backoff_slots) * mac.slot_s + tx_time;
            hop_bytes += msg_bytes;
            let collided = p_collision > 0.0 && rng.gen_bool(p_collision.min(1.0));
            if !collided {
                success = true;
                break;
            }
        }
        bytes_tx.push((tx_node, hop_bytes));
        if !success {
            delivered = false;
            break 'hops;
        }
    }

    DeliveryResult {
        delivered,
        latency_s: latency,
        bytes_tx,
    }
}

/// Tracks which nodes have a message in flight, for the load-dependent
/// collision probability: `p = min(cap, rho)` where `rho` is the occupied
/// fraction of the origin's two-hop neighbourhood at emission time.
#[derive(Debug, Default)]
pub struct InFlightTracker {
    /// (busy_until_s, vertex) pairs, pruned lazily.
    active: Vec<(f64, usize)>,
}

impl InFlightTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn collision_probability(&mut self, origin: usize, now_s: f64, topology: &Topology, mac: &MacParams) -> f64 {
        self.active.retain(|&(until, _)| until > now_s);
        let hood = &topology.two_hop[origin];
        if hood.is_empty() {
            return 0.0;
        }
        let busy = hood
            .iter()
            .filter(|&&n| self.active.iter().any(|&(_, v)| v == n))
            .count();
        (busy as f64 / hood.len() as f64).min(mac.collision_cap)
    }

    /// Record a delivery: every transmitter on the path is busy until the
    /// message clears.
    pub fn record(&mut self, origin: usize, now_s: f64, result: &DeliveryResult) {
        let until = now_s + result.latency_s.max(1e-6);
        self.active.push((until, origin));
        for &(node, _) in &result.bytes_tx {
            if node != origin {
                self.active.push((until, node));
            }
        }
    }
}
