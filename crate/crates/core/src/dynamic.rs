//! Grouped sequential approximation of the max-link-load LP.
//!
//! The multicast messages are shuffled and split into `G` nearly equal
//! groups. Group `i` is routed by the max-link LP with initial relay loads
//! equal to the sum of the optimal loads of groups `1..i`, so each solve sees
//! at most `g = ceil(C(K, t+1) / G)` messages.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::placement::{MulticastGroup, PlacementConfig};
use crate::routing::{build_maxlink_lp, compute_loads, LoadReport, RoutingAllocation};
use crate::topology::Topology;

#[derive(Debug, Clone, PartialEq)]
pub struct GroupPartition {
    pub parts: Vec<Vec<MulticastGroup>>,
    /// Largest part size, `ceil(messages / G)`.
    pub max_group_size: usize,
}

impl GroupPartition {
    pub fn num_groups(&self) -> usize {
        self.parts.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.parts.iter().map(Vec::len).collect()
    }
}

/// `g = ceil(messages / G)`.
pub fn max_group_size(messages: usize, num_groups: usize) -> usize {
    messages.div_ceil(num_groups)
}

/// Smallest `G` whose maximum group size does not exceed `g`.
pub fn groups_for_size(messages: usize, g: usize) -> usize {
    messages.div_ceil(g.max(1)).max(1)
}

/// Seeded shuffle, then split: the first `messages mod G` parts get
/// `ceil(messages/G)` messages and the rest one fewer.
pub fn partition_groups(all_groups: &[MulticastGroup], num_groups: usize, seed: u64) -> Result<GroupPartition> {
    let n = all_groups.len();
    if num_groups == 0 || num_groups > n {
        return Err(Error::InvalidGroupCount {
            groups: num_groups,
            messages: n,
        });
    }
    let mut shuffled = all_groups.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let base = n / num_groups;
    let larger = n - num_groups * base;
    let mut parts = Vec::with_capacity(num_groups);
    let mut rest = shuffled.into_iter();
    for i in 0..num_groups {
        let size = if i < larger { base + 1 } else { base };
        parts.push(rest.by_ref().take(size).collect());
    }
    Ok(GroupPartition {
        parts,
        max_group_size: max_group_size(n, num_groups),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicStep {
    /// Accumulated relay loads entering this step.
    pub initial_loads: Vec<f64>,
    /// Optimal per-relay load of this step's messages.
    pub step_loads: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

#[derive(Debug, Clone)]
pub struct DynamicSolution {
    /// Shares for every message, in the order of the input group list.
    pub allocation: RoutingAllocation,
    /// `max_h sum_i R*_{h,i}` in message units.
    pub objective: f64,
    pub relay_loads: Vec<f64>,
    pub steps: Vec<DynamicStep>,
    pub max_group_size: usize,
}

impl DynamicSolution {
    pub fn load_report(&self, topology: &Topology, placement: &PlacementConfig) -> LoadReport {
        compute_loads(topology, &self.allocation, placement)
    }
}

pub fn solve_dynamic(
    topology: &Topology,
    all_groups: &[MulticastGroup],
    num_groups: usize,
    seed: u64,
) -> Result<DynamicSolution> {
    let partition = partition_groups(all_groups, num_groups, seed)?;
    let h_count = topology.num_relays();
    let mut accumulated = vec![0.0; h_count];
    let mut steps = Vec::with_capacity(partition.num_groups());
    let mut pieces = Vec::with_capacity(partition.num_groups());
    for (i, part) in partition.parts.iter().enumerate() {
        let wrap = |e: Error| Error::DynamicStep {
            step: i + 1,
            source: Box::new(e),
        };
        let lp = build_maxlink_lp(topology, part, &accumulated).map_err(wrap)?;
        let (solution, allocation) = lp.solve().map_err(wrap)?;
        let step_loads = allocation.relay_loads();
        let initial_loads = accumulated.clone();
        for (acc, r) in accumulated.iter_mut().zip(&step_loads) {
            *acc += r;
        }
        steps.push(DynamicStep {
            initial_loads,
            step_loads,
            objective: solution.objective,
            pivots: solution.pivots,
        });
        pieces.push(allocation);
    }
    let merged = RoutingAllocation::merge(pieces, h_count).reordered(all_groups)?;
    let objective = accumulated.iter().copied().fold(0.0, f64::max);
    Ok(DynamicSolution {
        allocation: merged,
        objective,
        relay_loads: accumulated,
        steps,
        max_group_size: partition.max_group_size,
    })
}
