//! Reference schemes expressed as fractional allocations.
//!
//! Both split every multicast message into `L` pieces and encode them with an
//! `(H, L)` MDS code, so any `L` relays suffice to decode; every coded symbol
//! has length `1/L` of the message. MDS sends a symbol to every relay; MGL
//! skips relays that serve no user of the group.

use crate::error::{Error, Result};
use crate::placement::MulticastGroup;
use crate::routing::RoutingAllocation;
use crate::topology::Topology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Baseline {
    Mds,
    Mgl,
}

fn check_uniform(topology: &Topology, degree: usize) -> Result<()> {
    match topology.uniform_degree() {
        Some(d) if d == degree => Ok(()),
        Some(d) => Err(Error::UnsupportedTopology(format!(
            "users have degree {d}, scheme configured for L={degree}"
        ))),
        None => Err(Error::UnsupportedTopology(
            "users have different numbers of relays".to_string(),
        )),
    }
}

/// `y_S^h = 1/L` on every relay. Shares on relays outside `H_S` are
/// intentional, so the structural-zero check is disabled.
pub fn mds_allocation(topology: &Topology, groups: &[MulticastGroup], degree: usize) -> Result<RoutingAllocation> {
    check_uniform(topology, degree)?;
    let share = 1.0 / degree as f64;
    let rows = vec![vec![share; topology.num_relays()]; groups.len()];
    Ok(RoutingAllocation::from_shares(groups.to_vec(), rows, topology.num_relays())?.without_structural_zeros())
}

/// `y_S^h = 1/L` on relays in `H_S`, zero elsewhere.
pub fn mgl_allocation(topology: &Topology, groups: &[MulticastGroup], degree: usize) -> Result<RoutingAllocation> {
    check_uniform(topology, degree)?;
    let share = 1.0 / degree as f64;
    let mut allocation = RoutingAllocation::zeros(topology.num_relays(), groups.to_vec());
    for (g, group) in groups.iter().enumerate() {
        for h in topology.relays_of_group(group.users())? {
            allocation.set_share(g, h, share);
        }
    }
    Ok(allocation)
}

pub fn allocation(
    scheme: Baseline,
    topology: &Topology,
    groups: &[MulticastGroup],
    degree: usize,
) -> Result<RoutingAllocation> {
    match scheme {
        Baseline::Mds => mds_allocation(topology, groups, degree),
        Baseline::Mgl => mgl_allocation(topology, groups, degree),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::placement::{multicast_groups, PlacementConfig};
    use crate::routing::{check_feasible, compute_loads, solve_maxlink};

    #[test]
    fn mds_loads() {
        let topo = Topology::random_uniform(10, 5, 2, 4).unwrap();
        let placement = PlacementConfig::with_replication(5, 5, 2, 1).unwrap();
        let groups = placement.multicast_groups();
        let alloc = mds_allocation(&topo, &groups, 2).unwrap();
        assert!(check_feasible(&topo, &alloc).is_feasible());
        let report = compute_loads(&topo, &alloc, &placement);
        assert!(report.relay_loads.iter().all(|&r| (r - 5.0).abs() < 1e-12));
        // each user is in C(4, 2) = 6 groups
        assert!(report.edge_loads.iter().all(|e| (e.load - 3.0).abs() < 1e-12));
    }

    #[test]
    fn non_uniform_degree_rejected() {
        let topo = Topology::new(3, vec![vec![0], vec![0, 1]]).unwrap();
        let groups = multicast_groups(2, 0);
        assert!(matches!(
            mds_allocation(&topo, &groups, 1),
            Err(Error::UnsupportedTopology(_))
        ));
        assert!(matches!(
            mgl_allocation(&topo, &groups, 2),
            Err(Error::UnsupportedTopology(_))
        ));
        let uniform = Topology::combination(4, 2).unwrap();
        assert!(mgl_allocation(&uniform, &multicast_groups(6, 1), 3).is_err());
    }

    #[test]
    fn isolated_relay_difference() {
        let topo = Topology::new(3, vec![vec![0, 1], vec![0, 1], vec![0, 1]]).unwrap();
        let groups = multicast_groups(3, 1);
        let mgl = mgl_allocation(&topo, &groups, 2).unwrap();
        let mds = mds_allocation(&topo, &groups, 2).unwrap();
        assert_eq!(mgl.relay_loads()[2], 0.0);
        assert_eq!(mds.relay_loads()[2], groups.len() as f64 / 2.0);
    }

    #[test]
    fn mgl_on_combination_network_counts_intersecting_groups() {
        let topo = Topology::combination(4, 2).unwrap();
        let groups = multicast_groups(6, 1);
        let mgl = mgl_allocation(&topo, &groups, 2).unwrap();
        let mds = mds_allocation(&topo, &groups, 2).unwrap();
        assert!(check_feasible(&topo, &mgl).is_feasible());
        let mgl_loads = mgl.relay_loads();
        let mds_loads = mds.relay_loads();
        for h in 0..4 {
            // brute force: groups with at least one member attached to h
            let intersecting = groups
                .iter()
                .filter(|g| g.users().iter().any(|&k| topo.relays_of(k).contains(&h)))
                .count();
            assert!((mgl_loads[h] - intersecting as f64 / 2.0).abs() < 1e-12);
            if intersecting == groups.len() {
                assert_eq!(mgl_loads[h], mds_loads[h]);
            }
        }
    }

    #[test]
    fn dominance_chain() {
        for seed in 0..20 {
            let topo = Topology::random_uniform(8, 5, 2, seed).unwrap();
            let groups = multicast_groups(5, 2);
            let mgl = mgl_allocation(&topo, &groups, 2).unwrap();
            let mds = mds_allocation(&topo, &groups, 2).unwrap();
            for g in 0..groups.len() {
                for h in 0..8 {
                    assert!(mgl.share(g, h) <= mds.share(g, h));
                }
            }
            let (lp, _) = solve_maxlink(&topo, &groups).unwrap();
            assert!(lp <= mgl.max_relay_load() + 1e-9);
            assert!(mgl.max_relay_load() <= mds.max_relay_load() + 1e-9);
        }
    }
}
