//! Routing of multicast messages through relays.
//!
//! Message `V_S` is split into random linear combinations, one per relay; the
//! share `y_S^h` is the length sent through relay `h` as a fraction of
//! `|V_S|`. User `k` decodes once the shares of its relays sum to at least
//! one. Loads are counted in message units (multiples of `|V_S|`).

use crate::error::{Error, Result};
use crate::placement::{MulticastGroup, PlacementConfig};
use crate::simplex::{self, LpProblem, LpSolution, LpStatus, Relation};
use crate::topology::{check_capacity, Topology};

/// Absolute tolerance on coverage and box constraints.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

/// Shares `y_S^h` for a list of multicast groups, dense over relays.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingAllocation {
    num_relays: usize,
    groups: Vec<MulticastGroup>,
    shares: Vec<Vec<f64>>,
    structural_zeros: bool,
}

impl RoutingAllocation {
    pub fn zeros(num_relays: usize, groups: Vec<MulticastGroup>) -> Self {
        let shares = vec![vec![0.0; num_relays]; groups.len()];
        Self {
            num_relays,
            groups,
            shares,
            structural_zeros: true,
        }
    }

    /// Allocation from explicit per-group share rows.
    pub fn from_shares(groups: Vec<MulticastGroup>, shares: Vec<Vec<f64>>, num_relays: usize) -> Result<Self> {
        if shares.len() != groups.len() || shares.iter().any(|r| r.len() != num_relays) {
            return Err(Error::InvalidInput(format!(
                "share matrix must be {} x {num_relays}",
                groups.len()
            )));
        }
        Ok(Self {
            num_relays,
            groups,
            shares,
            structural_zeros: true,
        })
    }

    /// Marks the allocation as allowed to place shares on relays that serve
    /// no member of the group (the MDS baseline does this).
    pub fn without_structural_zeros(mut self) -> Self {
        self.structural_zeros = false;
        self
    }

    pub fn enforces_structural_zeros(&self) -> bool {
        self.structural_zeros
    }

    pub fn num_relays(&self) -> usize {
        self.num_relays
    }

    pub fn groups(&self) -> &[MulticastGroup] {
        &self.groups
    }

    pub fn share(&self, group: usize, relay: usize) -> f64 {
        self.shares[group][relay]
    }

    pub fn set_share(&mut self, group: usize, relay: usize, value: f64) {
        self.shares[group][relay] = value;
    }

    /// Shares of one group over all relays.
    pub fn group_shares(&self, group: usize) -> &[f64] {
        &self.shares[group]
    }

    /// `R_h = sum_S y_S^h`.
    pub fn relay_loads(&self) -> Vec<f64> {
        let mut loads = vec![0.0; self.num_relays];
        for row in &self.shares {
            for (l, y) in loads.iter_mut().zip(row) {
                *l += y;
            }
        }
        loads
    }

    pub fn max_relay_load(&self) -> f64 {
        self.relay_loads().into_iter().fold(0.0, f64::max)
    }

    /// Concatenates allocations over disjoint group lists.
    pub fn merge(parts: impl IntoIterator<Item = RoutingAllocation>, num_relays: usize) -> Self {
        let mut merged = Self::zeros(num_relays, Vec::new());
        for part in parts {
            assert_eq!(part.num_relays, num_relays);
            merged.structural_zeros &= part.structural_zeros;
            merged.groups.extend(part.groups);
            merged.shares.extend(part.shares);
        }
        merged
    }

    /// Reorders groups to follow `order`, which must be a permutation of the
    /// current group list.
    pub fn reordered(&self, order: &[MulticastGroup]) -> Result<Self> {
        let mut out = Self::zeros(self.num_relays, order.to_vec());
        out.structural_zeros = self.structural_zeros;
        let index: std::collections::HashMap<&MulticastGroup, usize> =
            self.groups.iter().enumerate().map(|(i, g)| (g, i)).collect();
        if order.len() != self.groups.len() {
            return Err(Error::InvalidInput("group lists differ in length".into()));
        }
        for (i, g) in order.iter().enumerate() {
            let &src = index
                .get(g)
                .ok_or_else(|| Error::InvalidInput(format!("group {:?} missing", g.users())))?;
            out.shares[i] = self.shares[src].clone();
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoutingObjective {
    /// `max_h R_h` plus optional initial loads, in message units.
    MaxLinkLoad,
    /// `max(T_F, T_E)` in channel uses.
    DeliveryTime,
}

/// An LP over routing shares together with the map from solver variables
/// back to `(group, relay)` pairs. The last variable is the epigraph `z`.
#[derive(Debug, Clone)]
pub struct RoutingLp {
    pub problem: LpProblem,
    pub objective: RoutingObjective,
    variables: Vec<(usize, usize)>,
    groups: Vec<MulticastGroup>,
    num_relays: usize,
}

impl RoutingLp {
    pub fn epigraph_variable(&self) -> usize {
        self.variables.len()
    }

    /// `(group index, relay)` of each share variable.
    pub fn share_variables(&self) -> &[(usize, usize)] {
        &self.variables
    }

    pub fn groups(&self) -> &[MulticastGroup] {
        &self.groups
    }

    pub fn solve(&self) -> Result<(LpSolution, RoutingAllocation)> {
        let solution = simplex::solve(&self.problem)?;
        let allocation = allocation_from_solution(self, &solution)?;
        Ok((solution, allocation))
    }
}

/// `(group, relay)` per variable, and per group the variable of each relay.
type Skeleton = (Vec<(usize, usize)>, Vec<Vec<Option<usize>>>);

/// Share variables exist only for relays that reach at least one member of
/// the group; coverage rows `sum_{h in H_k} y_S^h >= 1` for every member.
fn share_skeleton(topology: &Topology, groups: &[MulticastGroup]) -> Result<Skeleton> {
    let mut variables = Vec::new();
    let mut index = Vec::with_capacity(groups.len());
    for (g, group) in groups.iter().enumerate() {
        for &k in group.users() {
            if k >= topology.num_users() {
                return Err(Error::InvalidUser {
                    user: k,
                    num_users: topology.num_users(),
                });
            }
            if topology.relays_of(k).is_empty() {
                return Err(Error::Unreachable {
                    user: k,
                    group: group.users().to_vec(),
                });
            }
        }
        let mut row = vec![None; topology.num_relays()];
        for h in topology.relays_of_group(group.users())? {
            row[h] = Some(variables.len());
            variables.push((g, h));
        }
        index.push(row);
    }
    Ok((variables, index))
}

fn add_coverage_rows(
    problem: &mut LpProblem,
    topology: &Topology,
    groups: &[MulticastGroup],
    index: &[Vec<Option<usize>>],
) {
    for (g, group) in groups.iter().enumerate() {
        for &k in group.users() {
            let terms = topology
                .relays_of(k)
                .iter()
                .map(|&h| (index[g][h].expect("H_k within H_S"), 1.0));
            problem.add_sparse_constraint(terms, Relation::Ge, 1.0);
        }
    }
}

fn share_problem(num_shares: usize) -> LpProblem {
    let mut problem = LpProblem::new(num_shares + 1);
    for j in 0..num_shares {
        problem.set_bounds(j, 0.0, Some(1.0));
    }
    problem.set_cost(num_shares, 1.0);
    problem
}

/// Max-link-load LP: minimize `z` with `z >= sum_S y_S^h + initial[h]` for
/// every relay. With zero initial loads this is the identical-capacity
/// problem; with accumulated loads it is one step of the grouped algorithm.
pub fn build_maxlink_lp(topology: &Topology, groups: &[MulticastGroup], initial_loads: &[f64]) -> Result<RoutingLp> {
    let h_count = topology.num_relays();
    if initial_loads.len() != h_count {
        return Err(Error::InvalidInput(format!(
            "initial loads have {} entries for {h_count} relays",
            initial_loads.len()
        )));
    }
    if let Some(h) = initial_loads.iter().position(|&l| !(l >= 0.0 && l.is_finite())) {
        return Err(Error::InvalidInput(format!(
            "initial load of relay {} is {}",
            h + 1,
            initial_loads[h]
        )));
    }
    let (variables, index) = share_skeleton(topology, groups)?;
    let z = variables.len();
    let mut problem = share_problem(z);
    for (h, &initial) in initial_loads.iter().enumerate() {
        let terms = index
            .iter()
            .filter_map(|row| row[h])
            .map(|j| (j, 1.0))
            .chain(std::iter::once((z, -1.0)));
        problem.add_sparse_constraint(terms, Relation::Le, -initial);
    }
    add_coverage_rows(&mut problem, topology, groups, &index);
    Ok(RoutingLp {
        problem,
        objective: RoutingObjective::MaxLinkLoad,
        variables,
        groups: groups.to_vec(),
        num_relays: h_count,
    })
}

/// Delivery-time LP: minimize `z` (channel uses) with `z >= |V_S| R_h / C_F`
/// per relay and `z >= |V_S| R_{h->k} / C_E` per relay-user edge.
pub fn build_delivery_time_lp(
    topology: &Topology,
    groups: &[MulticastGroup],
    placement: &PlacementConfig,
) -> Result<RoutingLp> {
    check_capacity("fronthaul_capacity", topology.fronthaul_capacity())?;
    check_capacity("edge_capacity", topology.edge_capacity())?;
    let (variables, index) = share_skeleton(topology, groups)?;
    let z = variables.len();
    let mut problem = share_problem(z);
    let message_bits = placement.message_bits();
    let fronthaul = message_bits / topology.fronthaul_capacity();
    let edge = message_bits / topology.edge_capacity();
    for h in 0..topology.num_relays() {
        let terms = index
            .iter()
            .filter_map(|row| row[h])
            .map(|j| (j, fronthaul))
            .chain(std::iter::once((z, -1.0)));
        problem.add_sparse_constraint(terms, Relation::Le, 0.0);
    }
    for h in 0..topology.num_relays() {
        for &k in topology.users_of(h) {
            let shares: Vec<usize> = groups
                .iter()
                .zip(&index)
                .filter(|(g, _)| g.contains(k))
                .filter_map(|(_, row)| row[h])
                .collect();
            if shares.is_empty() {
                continue;
            }
            let terms = shares.into_iter().map(|j| (j, edge)).chain(std::iter::once((z, -1.0)));
            problem.add_sparse_constraint(terms, Relation::Le, 0.0);
        }
    }
    add_coverage_rows(&mut problem, topology, groups, &index);
    Ok(RoutingLp {
        problem,
        objective: RoutingObjective::DeliveryTime,
        variables,
        groups: groups.to_vec(),
        num_relays: topology.num_relays(),
    })
}

/// Maps an optimal solution back to shares, clamping into `[0, 1]`.
pub fn allocation_from_solution(lp: &RoutingLp, solution: &LpSolution) -> Result<RoutingAllocation> {
    if solution.status != LpStatus::Optimal {
        return Err(Error::NoAllocation(solution.status));
    }
    let mut allocation = RoutingAllocation::zeros(lp.num_relays, lp.groups.clone());
    for (&(g, h), &value) in lp.variables.iter().zip(&solution.primal) {
        allocation.set_share(g, h, value.clamp(0.0, 1.0));
    }
    Ok(allocation)
}

/// Optimal allocation and objective of the max-link-load LP with zero
/// initial loads.
pub fn solve_maxlink(topology: &Topology, groups: &[MulticastGroup]) -> Result<(f64, RoutingAllocation)> {
    let lp = build_maxlink_lp(topology, groups, &vec![0.0; topology.num_relays()])?;
    let (solution, allocation) = lp.solve()?;
    Ok((solution.objective, allocation))
}

/// Optimal allocation and delivery time (channel uses).
pub fn solve_delivery_time(
    topology: &Topology,
    groups: &[MulticastGroup],
    placement: &PlacementConfig,
) -> Result<(f64, RoutingAllocation)> {
    let lp = build_delivery_time_lp(topology, groups, placement)?;
    let (solution, allocation) = lp.solve()?;
    Ok((solution.objective, allocation))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeLoad {
    pub relay: usize,
    pub user: usize,
    pub load: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadReport {
    /// `R_h` in message units.
    pub relay_loads: Vec<f64>,
    /// `R_{h->k}` in message units, for every `k` in `U_h`, ordered by `(h, k)`.
    pub edge_loads: Vec<EdgeLoad>,
    pub fronthaul_time: f64,
    pub edge_time: f64,
    pub total_time: f64,
    /// `C(K, t)`: message units per file.
    pub messages_per_file: usize,
}

impl LoadReport {
    pub fn max_relay_load(&self) -> f64 {
        self.relay_loads.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_relay_load_file_units(&self) -> f64 {
        self.max_relay_load() / self.messages_per_file as f64
    }

    pub fn max_edge_load(&self) -> f64 {
        self.edge_loads.iter().map(|e| e.load).fold(0.0, f64::max)
    }
}

/// Relay, edge and time metrics of an allocation.
pub fn compute_loads(topology: &Topology, allocation: &RoutingAllocation, placement: &PlacementConfig) -> LoadReport {
    let relay_loads = allocation.relay_loads();
    let mut edge_loads = Vec::new();
    for h in 0..topology.num_relays() {
        for &k in topology.users_of(h) {
            let load = allocation
                .groups()
                .iter()
                .enumerate()
                .filter(|(_, g)| g.contains(k))
                .map(|(i, _)| allocation.share(i, h))
                .sum();
            edge_loads.push(EdgeLoad {
                relay: h,
                user: k,
                load,
            });
        }
    }
    let message_bits = placement.message_bits();
    let max_relay = relay_loads.iter().copied().fold(0.0, f64::max);
    let max_edge = edge_loads.iter().map(|e| e.load).fold(0.0, f64::max);
    let fronthaul_time = max_relay * message_bits / topology.fronthaul_capacity();
    let edge_time = max_edge * message_bits / topology.edge_capacity();
    LoadReport {
        relay_loads,
        edge_loads,
        fronthaul_time,
        edge_time,
        total_time: fronthaul_time.max(edge_time),
        messages_per_file: placement.num_subfiles(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Shares of the member's relays sum below one.
    Coverage { group: usize, user: usize, total: f64 },
    /// Share outside `[0, 1]`.
    OutOfBox { group: usize, relay: usize, value: f64 },
    /// Nonzero share on a relay serving no member of the group.
    StructuralZero { group: usize, relay: usize, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn check_feasible(topology: &Topology, allocation: &RoutingAllocation) -> FeasibilityReport {
    let mut violations = Vec::new();
    for (g, group) in allocation.groups().iter().enumerate() {
        let reach = topology.relays_of_group(group.users()).unwrap_or_default();
        for h in 0..allocation.num_relays() {
            let value = allocation.share(g, h);
            if !(-FEASIBILITY_TOLERANCE..=1.0 + FEASIBILITY_TOLERANCE).contains(&value) {
                violations.push(Violation::OutOfBox {
                    group: g,
                    relay: h,
                    value,
                });
            }
            if allocation.enforces_structural_zeros()
                && value.abs() > FEASIBILITY_TOLERANCE
                && reach.binary_search(&h).is_err()
            {
                violations.push(Violation::StructuralZero {
                    group: g,
                    relay: h,
                    value,
                });
            }
        }
        for &k in group.users() {
            let total: f64 = if k < topology.num_users() {
                topology
                    .relays_of(k)
                    .iter()
                    .filter(|&&h| h < allocation.num_relays())
                    .map(|&h| allocation.share(g, h))
                    .sum()
            } else {
                0.0
            };
            if total < 1.0 - FEASIBILITY_TOLERANCE {
                violations.push(Violation::Coverage {
                    group: g,
                    user: k,
                    total,
                });
            }
        }
    }
    FeasibilityReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::placement::multicast_groups;
    use proptest::prelude::*;

    #[test]
    fn fully_connected_maxlink_is_groups_over_relays() {
        let topo = Topology::fully_connected(5, 5).unwrap();
        let groups = multicast_groups(5, 2);
        let (z, alloc) = solve_maxlink(&topo, &groups).unwrap();
        assert!((z - 2.0).abs() < 1e-9, "{z}");
        assert!(check_feasible(&topo, &alloc).is_feasible());
    }

    #[test]
    fn single_relay_carries_everything() {
        let topo = Topology::fully_connected(1, 4).unwrap();
        let groups = multicast_groups(4, 1);
        let (z, alloc) = solve_maxlink(&topo, &groups).unwrap();
        assert!((z - 6.0).abs() < 1e-9);
        for g in 0..groups.len() {
            assert!((alloc.share(g, 0) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn combination_network_matches_exact_solver() {
        let topo = Topology::combination(4, 2).unwrap();
        let groups = multicast_groups(6, 1);
        assert_eq!(groups.len(), 15);
        let lp = build_maxlink_lp(&topo, &groups, &[0.0; 4]).unwrap();
        let approx = simplex::solve(&lp.problem).unwrap();
        let exact = simplex::solve_exact(&lp.problem).unwrap();
        assert!((approx.objective - exact.objective).abs() <= 1e-6 * exact.objective.abs());
    }

    #[test]
    fn delivery_time_fully_connected() {
        let topo = Topology::fully_connected(5, 5).unwrap();
        let placement = PlacementConfig::with_replication(5, 5, 2, 1).unwrap();
        let groups = placement.multicast_groups();
        let (t, alloc) = solve_delivery_time(&topo, &groups, &placement).unwrap();
        assert!((t - 0.2).abs() < 1e-9, "{t}");
        let report = compute_loads(&topo, &alloc, &placement);
        assert!(report.edge_time <= report.fronthaul_time + 1e-12);
        assert!((report.total_time - 0.2).abs() < 1e-9);
    }

    #[test]
    fn delivery_time_capacity_limits() {
        let placement = PlacementConfig::with_replication(5, 5, 2, 1).unwrap();
        let groups = placement.multicast_groups();
        let base = Topology::random_uniform(6, 5, 2, 3).unwrap();
        let (maxlink, _) = solve_maxlink(&base, &groups).unwrap();
        let edge_unlimited = base.clone().with_capacities(1.0, 1e6).unwrap();
        let (t, _) = solve_delivery_time(&edge_unlimited, &groups, &placement).unwrap();
        assert!((t - maxlink * placement.message_bits()).abs() < 1e-9);

        let fronthaul_unlimited = base.clone().with_capacities(1e6, 1.0).unwrap();
        let (t, alloc) = solve_delivery_time(&fronthaul_unlimited, &groups, &placement).unwrap();
        let report = compute_loads(&fronthaul_unlimited, &alloc, &placement);
        assert!(
            (t - report.max_edge_load() * placement.message_bits()).abs() < 1e-6,
            "{t} {} {}",
            report.max_edge_load(),
            report.total_time
        );
    }

    #[test]
    fn clamping_and_status_propagation() {
        let topo = Topology::fully_connected(1, 2).unwrap();
        let groups = multicast_groups(2, 1);
        let lp = build_maxlink_lp(&topo, &groups, &[0.0]).unwrap();
        let mut sol = simplex::solve(&lp.problem).unwrap();
        sol.primal[0] = 1.0 + 3e-10;
        let alloc = allocation_from_solution(&lp, &sol).unwrap();
        assert_eq!(alloc.share(0, 0), 1.0);
        sol.status = LpStatus::Infeasible;
        assert!(matches!(
            allocation_from_solution(&lp, &sol),
            Err(Error::NoAllocation(LpStatus::Infeasible))
        ));
    }

    #[test]
    fn extraction_preserves_objective() {
        let topo = Topology::random_uniform(6, 6, 2, 17).unwrap();
        let groups = multicast_groups(6, 2);
        let (z, alloc) = solve_maxlink(&topo, &groups).unwrap();
        assert!((alloc.max_relay_load() - z).abs() < 1e-9);
    }

    #[test]
    fn zero_allocation() {
        let topo = Topology::random_uniform(4, 5, 2, 1).unwrap();
        let placement = PlacementConfig::with_replication(5, 5, 2, 1).unwrap();
        let groups = placement.multicast_groups();
        let alloc = RoutingAllocation::zeros(4, groups.clone());
        let report = compute_loads(&topo, &alloc, &placement);
        assert!(report.relay_loads.iter().all(|&l| l == 0.0));
        assert!(report.edge_loads.iter().all(|e| e.load == 0.0));
        assert_eq!(report.total_time, 0.0);
        let feas = check_feasible(&topo, &alloc);
        assert_eq!(feas.violations.len(), groups.len() * 3);
        assert!(feas.violations.iter().all(|v| matches!(v, Violation::Coverage { .. })));
    }

    #[test]
    fn structural_zero_violation_detected() {
        let topo = Topology::combination(4, 2).unwrap();
        let groups = vec![MulticastGroup::new(vec![0])];
        let mut alloc = RoutingAllocation::zeros(4, groups);
        alloc.set_share(0, 0, 1.0);
        alloc.set_share(0, 3, 0.5);
        let feas = check_feasible(&topo, &alloc);
        assert_eq!(
            feas.violations,
            vec![Violation::StructuralZero {
                group: 0,
                relay: 3,
                value: 0.5
            }]
        );
        assert!(check_feasible(&topo, &alloc.without_structural_zeros()).is_feasible());
    }

    #[test]
    fn initial_load_validation() {
        let topo = Topology::fully_connected(2, 2).unwrap();
        let groups = multicast_groups(2, 0);
        assert!(build_maxlink_lp(&topo, &groups, &[0.0]).is_err());
        assert!(build_maxlink_lp(&topo, &groups, &[0.0, -1.0]).is_err());
        let lp = build_maxlink_lp(&topo, &groups, &[3.0, 0.0]).unwrap();
        let (sol, alloc) = lp.solve().unwrap();
        // both singleton messages go through relay 2 up to balancing: z = max(3, 2)
        assert!((sol.objective - 3.0).abs() < 1e-9);
        assert!(check_feasible(&topo, &alloc).is_feasible());
    }

    #[test]
    fn invalid_capacity_rejected() {
        let topo = Topology::fully_connected(2, 2).unwrap();
        assert!(matches!(
            topo.with_capacities(0.0, 1.0),
            Err(Error::InvalidCapacity {
                name: "fronthaul_capacity",
                ..
            })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn edge_load_bounded_by_relay_load(seed in any::<u64>(), shares in proptest::collection::vec(0.0f64..1.0, 10 * 6)) {
            let topo = Topology::random_uniform(6, 5, 3, seed).unwrap();
            let placement = PlacementConfig::with_replication(5, 5, 2, 1).unwrap();
            let groups = placement.multicast_groups();
            let rows = shares.chunks(6).map(|c| c.to_vec()).collect();
            let alloc = RoutingAllocation::from_shares(groups, rows, 6).unwrap();
            let report = compute_loads(&topo, &alloc, &placement);
            for e in &report.edge_loads {
                prop_assert!(e.load <= report.relay_loads[e.relay] + 1e-12);
                prop_assert!(e.load >= 0.0);
            }
        }
    }
}
