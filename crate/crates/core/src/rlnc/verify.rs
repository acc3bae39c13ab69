use std::collections::HashMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{decode_user, encode_shares, CodedShare};
use crate::error::{Error, Result};
use crate::placement::{message_composition, subfile_index_sets, PlacementConfig, SubfileLabel};
use crate::routing::{check_feasible, RoutingAllocation};
use crate::seed;
use crate::topology::Topology;

/// Coefficient redraws per message before a decode failure is reported.
pub const MAX_RESAMPLES: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserOutcome {
    pub user: usize,
    pub demand: usize,
    /// Every message addressed to the user decoded.
    pub decoded: bool,
    /// The reconstructed file equals the demanded file byte for byte.
    pub bytes_match: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndToEndReport {
    pub users: Vec<UserOutcome>,
    /// Number of coefficient redraws triggered by rank-deficient decodes.
    pub resample_events: usize,
    pub packets_sent: usize,
    /// `sum y_S^h * P`, the fractional packet budget before rounding up.
    pub fractional_packets: f64,
    pub subfile_bytes: usize,
}

impl EndToEndReport {
    pub fn all_decoded(&self) -> bool {
        self.users.iter().all(|u| u.decoded && u.bytes_match)
    }

    /// Extra packets caused by rounding shares up to whole packets.
    pub fn rounding_overhead(&self) -> f64 {
        self.packets_sent as f64 - self.fractional_packets
    }
}

struct GroupDelivery {
    /// Decoded message per member, `None` when decoding failed.
    decoded: Vec<(usize, Option<Vec<u8>>)>,
    resamples: usize,
    packets_sent: usize,
}

/// Builds random files and user caches, XORs every multicast message, pushes
/// it through the allocation as coded packets, decodes at each user and
/// reassembles each demanded file.
pub fn verify_end_to_end(
    topology: &Topology,
    placement: &PlacementConfig,
    demands: &[usize],
    allocation: &RoutingAllocation,
    packets_per_message: usize,
    file_bytes: usize,
    seed: u64,
) -> Result<EndToEndReport> {
    let k_count = placement.num_users();
    if topology.num_users() != k_count || demands.len() != k_count {
        return Err(Error::InvalidInput(format!(
            "topology has {} users, placement {k_count}, demands {}",
            topology.num_users(),
            demands.len()
        )));
    }
    if file_bytes == 0 || packets_per_message == 0 {
        return Err(Error::InvalidInput("file size and P must be positive".into()));
    }
    if let Some((k, &d)) = demands.iter().enumerate().find(|(_, &d)| d >= placement.num_files()) {
        return Err(Error::InvalidDemand {
            user: k + 1,
            demand: d + 1,
            num_files: placement.num_files(),
        });
    }
    let feasibility = check_feasible(topology, allocation);
    if !feasibility.is_feasible() {
        return Err(Error::InfeasibleAllocation(feasibility.violations.len()));
    }
    let expected = placement.multicast_groups();
    let allocation = allocation.reordered(&expected)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(seed, 0));
    let files: Vec<Vec<u8>> = (0..placement.num_files())
        .map(|_| {
            let mut f = vec![0u8; file_bytes];
            rng.fill_bytes(&mut f);
            f
        })
        .collect();

    let labels = subfile_index_sets(k_count, placement.replication());
    let label_index: HashMap<&SubfileLabel, usize> = labels.iter().enumerate().map(|(i, l)| (l, i)).collect();
    let subfile_bytes = file_bytes.div_ceil(labels.len());
    let subfile = |file: usize, label: usize| -> Vec<u8> {
        let start = (label * subfile_bytes).min(file_bytes);
        let end = ((label + 1) * subfile_bytes).min(file_bytes);
        let mut s = files[file][start..end].to_vec();
        s.resize(subfile_bytes, 0);
        s
    };

    // Z_k: every subfile whose label contains k, for every file.
    let caches: Vec<HashMap<(usize, usize), Vec<u8>>> = (0..k_count)
        .map(|k| {
            let mut z = HashMap::new();
            for (li, label) in labels.iter().enumerate() {
                if label.contains(&k) {
                    for i in 0..placement.num_files() {
                        z.insert((i, li), subfile(i, li));
                    }
                }
            }
            z
        })
        .collect();

    let deliveries: Vec<GroupDelivery> = expected
        .par_iter()
        .enumerate()
        .map(|(g, group)| -> Result<GroupDelivery> {
            let composition = message_composition(group, demands, placement.num_files())?;
            let mut message = vec![0u8; subfile_bytes];
            for term in &composition.terms {
                let part = subfile(term.file, label_index[&term.label]);
                for (m, b) in message.iter_mut().zip(part) {
                    *m ^= b;
                }
            }
            let shares = allocation.group_shares(g);
            let mut resamples = 0;
            let mut packets_sent = 0;
            loop {
                let coded = encode_shares(
                    g,
                    &message,
                    shares,
                    packets_per_message,
                    seed::derive_path(seed, &[1, g as u64, resamples as u64]),
                )?;
                packets_sent += coded.iter().map(|s| s.packets.len()).sum::<usize>();
                let decoded: Vec<(usize, Option<Vec<u8>>)> = group
                    .users()
                    .iter()
                    .map(|&k| {
                        let mine = coded
                            .iter()
                            .filter(|s: &&CodedShare| topology.relays_of(k).contains(&s.relay));
                        (k, decode_user(mine, packets_per_message, subfile_bytes).ok())
                    })
                    .collect();
                let failed = decoded.iter().any(|(_, d)| d.is_none());
                if !failed || resamples == MAX_RESAMPLES {
                    return Ok(GroupDelivery {
                        decoded,
                        resamples,
                        packets_sent,
                    });
                }
                resamples += 1;
            }
        })
        .collect::<Result<_>>()?;

    // W_{d_k, S \ {k}} = V_S xor (terms of the other members, all cached by k)
    let mut recovered: Vec<HashMap<usize, Option<Vec<u8>>>> = vec![HashMap::new(); k_count];
    for (group, delivery) in expected.iter().zip(&deliveries) {
        for (k, v) in &delivery.decoded {
            let value = v.as_ref().map(|v| {
                let mut w = v.clone();
                for &j in group.users().iter().filter(|&&j| j != *k) {
                    let cached = &caches[*k][&(demands[j], label_index[&group.without(j)])];
                    for (a, b) in w.iter_mut().zip(cached) {
                        *a ^= b;
                    }
                }
                w
            });
            recovered[*k].insert(label_index[&group.without(*k)], value);
        }
    }

    let users = (0..k_count)
        .map(|k| {
            let demand = demands[k];
            let mut file = Vec::with_capacity(labels.len() * subfile_bytes);
            let mut decoded = true;
            for (li, label) in labels.iter().enumerate() {
                let piece = if label.contains(&k) {
                    caches[k].get(&(demand, li)).cloned()
                } else {
                    recovered[k].get(&li).cloned().flatten()
                };
                match piece {
                    Some(p) => file.extend_from_slice(&p),
                    None => {
                        decoded = false;
                        file.extend(std::iter::repeat_n(0, subfile_bytes));
                    }
                }
            }
            file.truncate(file_bytes);
            UserOutcome {
                user: k,
                demand,
                decoded,
                bytes_match: decoded && file == files[demand],
            }
        })
        .collect();

    let fractional_packets = (0..expected.len())
        .flat_map(|g| allocation.group_shares(g).iter())
        .map(|y| y * packets_per_message as f64)
        .sum();

    Ok(EndToEndReport {
        users,
        resample_events: deliveries.iter().map(|d| d.resamples).sum(),
        packets_sent: deliveries.iter().map(|d| d.packets_sent).sum(),
        fractional_packets,
        subfile_bytes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::mgl_allocation;
    use crate::routing::solve_maxlink;

    fn lp_case(seed: u64) -> (Topology, PlacementConfig, RoutingAllocation) {
        let topo = Topology::random_uniform(3, 4, 2, seed).unwrap();
        let placement = PlacementConfig::with_replication(4, 4, 1, 960 * 8).unwrap();
        let (_, alloc) = solve_maxlink(&topo, &placement.multicast_groups()).unwrap();
        (topo, placement, alloc)
    }

    #[test]
    fn lp_allocation_delivers() {
        let (topo, placement, alloc) = lp_case(1);
        let report = verify_end_to_end(&topo, &placement, &placement.worst_case_demands(), &alloc, 32, 960, 1).unwrap();
        assert!(report.all_decoded(), "{report:?}");
        assert_eq!(report.users.len(), 4);
        assert!(report.rounding_overhead() >= 0.0);
    }

    #[test]
    fn everything_cached_is_vacuous() {
        let topo = Topology::random_uniform(3, 4, 2, 0).unwrap();
        let placement = PlacementConfig::with_replication(4, 4, 4, 8).unwrap();
        let alloc = RoutingAllocation::zeros(3, Vec::new());
        let report = verify_end_to_end(&topo, &placement, &placement.worst_case_demands(), &alloc, 32, 100, 0).unwrap();
        assert!(report.all_decoded());
        assert_eq!(report.packets_sent, 0);
    }

    #[test]
    fn no_cache_sends_whole_files() {
        let topo = Topology::random_uniform(4, 3, 2, 5).unwrap();
        let placement = PlacementConfig::with_replication(3, 3, 0, 8).unwrap();
        let alloc = mgl_allocation(&topo, &placement.multicast_groups(), 2).unwrap();
        let report = verify_end_to_end(&topo, &placement, &placement.worst_case_demands(), &alloc, 8, 123, 4).unwrap();
        assert!(report.all_decoded());
        assert_eq!(report.subfile_bytes, 123);
    }

    #[test]
    fn mgl_on_combination_network_delivers() {
        let topo = Topology::combination(4, 2).unwrap();
        let placement = PlacementConfig::with_replication(6, 6, 2, 8).unwrap();
        let alloc = mgl_allocation(&topo, &placement.multicast_groups(), 2).unwrap();
        let report = verify_end_to_end(&topo, &placement, &placement.worst_case_demands(), &alloc, 16, 600, 9).unwrap();
        assert!(report.all_decoded());
    }

    #[test]
    fn infeasible_allocation_rejected() {
        let topo = Topology::random_uniform(3, 4, 2, 0).unwrap();
        let placement = PlacementConfig::with_replication(4, 4, 1, 8).unwrap();
        let alloc = RoutingAllocation::zeros(3, placement.multicast_groups());
        assert!(matches!(
            verify_end_to_end(&topo, &placement, &placement.worst_case_demands(), &alloc, 8, 64, 0),
            Err(Error::InfeasibleAllocation(_))
        ));
    }

    #[test]
    fn repeated_demands_when_files_scarce() {
        let (topo, _, _) = lp_case(2);
        let placement = PlacementConfig::with_replication(2, 4, 1, 8).unwrap();
        let (_, alloc) = solve_maxlink(&topo, &placement.multicast_groups()).unwrap();
        let report = verify_end_to_end(&topo, &placement, &placement.worst_case_demands(), &alloc, 16, 200, 2).unwrap();
        assert!(report.all_decoded());
    }
}
