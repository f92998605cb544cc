//! Random geometric mesh with shortest-path routing to a central sink.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("no connected placement found in {attempts} attempts (n={n_nodes}, side={side_m} m, range={range_m} m)")]
    Disconnected {
        attempts: u32,
        n_nodes: usize,
        side_m: f64,
        range_m: f64,
    },
}

/// Mesh topology: `n_nodes` sensors placed uniformly in a square plus a sink
/// at the square's centre. Vertex `n_nodes` is the sink.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Topology {
    pub side_m: f64,
    pub range_m: f64,
    /// Sensor positions followed by the sink position.
    pub positions: Vec<(f64, f64)>,
    pub sink: usize,
    /// Adjacency lists over all vertices (symmetric, sorted).
    pub adjacency: Vec<Vec<usize>>,
    /// Hop count to the sink per vertex (sink = 0).
    pub hops: Vec<u32>,
    /// Next vertex on the shortest path to the sink (ties broken by lowest
    /// vertex id; `None` for the sink itself).
    pub next_hop: Vec<Option<usize>>,
    /// Two-hop neighbourhoods (sensors only), used by the contention model.
    pub two_hop: Vec<Vec<usize>>,
}

impl Topology {
    pub fn n_sensors(&self) -> usize {
        self.positions.len() - 1
    }

    /// Relay path from a sensor to the sink, starting with the sensor.
    pub fn path_to_sink(&self, origin: usize) -> Vec<usize> {
        let mut path = vec![origin];
        let mut cur = origin;
        while let Some(next) = self.next_hop[cur] {
            path.push(next);
            cur = next;
        }
        path
    }

    pub fn mean_sensor_hops(&self) -> f64 {
        let n = self.n_sensors();
        self.hops[..n].iter().map(|&h| h as f64).sum::<f64>() / n as f64
    }

    /// Build adjacency/routes for explicit positions (last entry = sink).
    pub fn from_positions(positions: Vec<(f64, f64)>, side_m: f64, range_m: f64) -> Option<Self> {
        let n = positions.len();
        assert!(n >= 2);
        let sink = n - 1;
        let mut adjacency = vec![Vec::new(); n];
        for i in 0..n {
            for j in (i + 1)..n {
                let (xi, yi) = positions[i];
                let (xj, yj) = positions[j];
                let d2 = (xi - xj).powi(2) + (yi - yj).powi(2);
                if d2 <= range_m * range_m {
                    adjacency[i].push(j);
                    adjacency[j].push(i);
                }
            }
        }
        for a in adjacency.iter_mut() {
            a.sort_unstable();
        }

        // BFS from the sink; visiting neighbours in ascending id order makes
        // the lowest-id parent win ties deterministically.
        let mut hops = vec![u32::MAX; n];
        let mut next_hop = vec![None; n];
        let mut queue = std::collections::VecDeque::new();
        hops[sink] = 0;
        queue.push_back(sink);
        while let Some(u) = queue.pop_front() {
            for &v in &adjacency[u] {
                if hops[v] == u32::MAX {
                    hops[v] = hops[u] + 1;
                    next_hop[v] = Some(u);
                    queue.push_back(v);
                }
            }
        }
        if hops.iter().any(|&h| h == u32::MAX) {
            return None;
        }

        let mut two_hop = vec![Vec::new(); n];
        for i in 0..n {
            let mut set = std::collections::BTreeSet::new();
            for &j in &adjacency[i] {
                if j != sink {
                    set.insert(j);
                }
                for &k in &adjacency[j] {
                    if k != i && k != sink {
                        set.insert(k);
                    }
                }
            }
            two_hop[i] = set.into_iter().collect();
        }

        Some(Self {
            side_m,
            range_m,
            positions,
            sink,
            adjacency,
            hops,
            next_hop,
            two_hop,
        })
    }
}

/// Place `n_nodes` sensors uniformly at random until the mesh is connected
/// (every sensor reaches the central sink), with a bounded retry budget.
pub fn build_topology(
    n_nodes: usize,
    side_m: f64,
    range_m: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Topology, TopologyError> {
    const MAX_ATTEMPTS: u32 = 1000;
    assert!(n_nodes >= 2, "need at least two nodes");
    for _ in 0..MAX_ATTEMPTS {
        let mut positions: Vec<(f64, f64)> = (0..n_nodes)
            .map(|_| (rng.gen_range(0.0..side_m), rng.gen_range(0.0..side_m)))
            .collect();
        positions.push((side_m / 2.0, side_m / 2.0));
        if let Some(t) = Topology::from_positions(positions, side_m, range_m) {
            return Ok(t);
        }
    }
    Err(TopologyError::Disconnected {
        attempts: MAX_ATTEMPTS,
        n_nodes,
        side_m,
        range_m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::streams::{domain, stream_rng};

    #[test]
    fn range_threshold_controls_adjacency() {
        // Two nodes 150 m apart are adjacent at 200 m range; 250 m apart not.
        let t = Topology::from_positions(vec![(0.0, 0.0), (150.0, 0.0)], 350.0, 200.0).unwrap();
        assert!(t.adjacency[0].contains(&1));
        let t2 = Topology::from_positions(vec![(0.0, 0.0), (250.0, 0.0), (125.0, 0.0)], 350.0, 200.0)
            .unwrap();
        assert!(!t2.adjacency[0].contains(&1));
    }

    #[test]
    fn chain_hop_counts() {
        // sink - a - b - c chain: hops 0, 1, 2, 3.
        let positions = vec![
            (600.0, 0.0), // c
            (400.0, 0.0), // b
            (200.0, 0.0), // a
            (0.0, 0.0),   // sink
        ];
        let t = Topology::from_positions(positions, 700.0, 200.0).unwrap();
        assert_eq!(t.hops, vec![3, 2, 1, 0]);
        assert_eq!(t.path_to_sink(0), vec![0, 1, 2, 3]);
    }

    #[test]
    fn ten_node_default_geometry_connects_with_finite_hops() {
        let mut rng = stream_rng(1, &[domain::TOPOLOGY, 0]);
        let t = build_topology(10, 350.0, 200.0, &mut rng).unwrap();
        assert_eq!(t.n_sensors(), 10);
        assert!(t.hops[..10].iter().all(|&h| h != u32::MAX && h >= 1));
        // Sink at the centre.
        assert_eq!(t.positions[t.sink], (175.0, 175.0));
    }

    #[test]
    fn adjacency_is_symmetric() {
        let mut rng = stream_rng(2, &[domain::TOPOLOGY, 1]);
        let t = build_topology(50, 750.0, 200.0, &mut rng).unwrap();
        for (i, neigh) in t.adjacency.iter().enumerate() {
            for &j in neigh {
                assert!(t.adjacency[j].contains(&i));
            }
        }
    }

    #[test]
    fn fifty_node_mesh_has_more_hops_than_ten_node() {
        // Mean hop count over 100 seeded topologies strictly increases from
        // the 10-node/350 m to the 50-node/750 m geometry.
        let mut mean10 = 0.0;
        let mut mean50 = 0.0;
        for s in 0..100u64 {
            let mut r10 = stream_rng(s, &[domain::TOPOLOGY, 10]);
            let mut r50 = stream_rng(s, &[domain::TOPOLOGY, 50]);
            mean10 += build_topology(10, 350.0, 200.0, &mut r10).unwrap().mean_sensor_hops();
            mean50 += build_topology(50, 750.0, 200.0, &mut r50).unwrap().mean_sensor_hops();
        }
        assert!(
            mean50 / 100.0 > mean10 / 100.0,
            "mean hops 10n {} vs 50n {}",
            mean10 / 100.0,
            mean50 / 100.0
        );
    }

    #[test]
    fn determinism_same_seed_same_topology() {
        let mut a = stream_rng(9, &[domain::TOPOLOGY, 3]);
        let mut b = stream_rng(9, &[domain::TOPOLOGY, 3]);
        let ta = build_topology(10, 350.0, 200.0, &mut a).unwrap();
        let tb = build_topology(10, 350.0, 200.0, &mut b).unwrap();
        assert_eq!(ta.positions, tb.positions);
        assert_eq!(ta.hops, tb.hops);
    }
}
