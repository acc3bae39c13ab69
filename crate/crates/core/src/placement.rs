//! Uncoded combinatorial cache placement and multicast delivery combinatorics.
//!
//! With replication parameter `t = K M / N`, every file is split into
//! `C(K, t)` subfiles labelled by the `t`-subsets of users, user `k` caches the
//! subfiles whose label contains `k`, and the server serves one XOR message per
//! `(t+1)`-subset of users.

use itertools::Itertools;
use num_rational::Ratio;

use crate::binomial;
use crate::error::{Error, Result};

/// A `t`-subset of users naming one subfile of every file (0-based, sorted).
pub type SubfileLabel = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlacementConfig {
    num_files: usize,
    num_users: usize,
    cache_size: Ratio<u64>,
    replication: usize,
    file_size_bits: u64,
}

impl PlacementConfig {
    /// Placement for a cache of `cache_size` files per user. `K M / N` must be
    /// an integer.
    pub fn new(num_files: usize, num_users: usize, cache_size: Ratio<u64>, file_size_bits: u64) -> Result<Self> {
        if num_files == 0 || num_users == 0 {
            return Err(Error::InvalidPlacement("N and K must be positive".to_string()));
        }
        if file_size_bits == 0 {
            return Err(Error::InvalidPlacement("F must be positive".to_string()));
        }
        let replication = replication_param(num_files, num_users, cache_size)?;
        Ok(Self {
            num_files,
            num_users,
            cache_size,
            replication,
            file_size_bits,
        })
    }

    /// Placement with the replication parameter given directly; `M = t N / K`.
    pub fn with_replication(
        num_files: usize,
        num_users: usize,
        replication: usize,
        file_size_bits: u64,
    ) -> Result<Self> {
        if num_users == 0 || replication > num_users {
            return Err(Error::InvalidPlacement(format!(
                "t={replication} outside [0, K={num_users}]"
            )));
        }
        let cache_size = Ratio::new((replication * num_files) as u64, num_users as u64);
        Self::new(num_files, num_users, cache_size, file_size_bits)
    }

    pub fn num_files(&self) -> usize {
        self.num_files
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn cache_size(&self) -> Ratio<u64> {
        self.cache_size
    }

    pub fn replication(&self) -> usize {
        self.replication
    }

    pub fn file_size_bits(&self) -> u64 {
        self.file_size_bits
    }

    pub fn num_subfiles(&self) -> usize {
        binomial(self.num_users, self.replication)
    }

    /// Length of one subfile (and one multicast message) as a fraction of `F`.
    pub fn subfile_fraction(&self) -> Ratio<u64> {
        Ratio::new(1, self.num_subfiles() as u64)
    }

    /// Bits in one multicast message, `F / C(K, t)`.
    pub fn message_bits(&self) -> f64 {
        self.file_size_bits as f64 / self.num_subfiles() as f64
    }

    pub fn multicast_groups(&self) -> Vec<MulticastGroup> {
        multicast_groups(self.num_users, self.replication)
    }

    /// Worst-case demand vector: distinct files when `N >= K`, otherwise the
    /// file indices cycle through `[N]`. 0-based.
    pub fn worst_case_demands(&self) -> Vec<usize> {
        (0..self.num_users).map(|k| k % self.num_files).collect()
    }
}

/// `t = K M / N`, rejecting non-integer values.
pub fn replication_param(num_files: usize, num_users: usize, cache_size: Ratio<u64>) -> Result<usize> {
    if cache_size > Ratio::from_integer(num_files as u64) {
        return Err(Error::InvalidPlacement(format!("M={cache_size} exceeds N={num_files}")));
    }
    let t = cache_size * Ratio::from_integer(num_users as u64) / Ratio::from_integer(num_files as u64);
    if !t.is_integer() {
        return Err(Error::UnsupportedMemory {
            numerator: *t.numer(),
            denominator: *t.denom(),
        });
    }
    Ok(t.to_integer() as usize)
}

/// All `t`-subsets of `[K]`, lexicographic.
pub fn subfile_index_sets(num_users: usize, replication: usize) -> Vec<SubfileLabel> {
    (0..num_users).combinations(replication).collect()
}

/// Subfile labels cached by `user`: the `t`-subsets containing it.
pub fn cache_index_sets(num_users: usize, replication: usize, user: usize) -> Result<Vec<SubfileLabel>> {
    if user >= num_users {
        return Err(Error::InvalidUser { user, num_users });
    }
    Ok(subfile_index_sets(num_users, replication)
        .into_iter()
        .filter(|label| label.contains(&user))
        .collect())
}

/// A set of `t + 1` users served by one coded multicast message.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MulticastGroup {
    users: Vec<usize>,
}

impl MulticastGroup {
    pub fn new(mut users: Vec<usize>) -> Self {
        users.sort_unstable();
        users.dedup();
        Self { users }
    }

    pub fn users(&self) -> &[usize] {
        &self.users
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn contains(&self, user: usize) -> bool {
        self.users.binary_search(&user).is_ok()
    }

    /// The group with `user` removed: the subfile label that `user` decodes.
    pub fn without(&self, user: usize) -> SubfileLabel {
        self.users.iter().copied().filter(|&k| k != user).collect()
    }
}

/// All `(t+1)`-subsets of `[K]`, lexicographic; empty when `t = K`.
pub fn multicast_groups(num_users: usize, replication: usize) -> Vec<MulticastGroup> {
    if replication >= num_users {
        return Vec::new();
    }
    (0..num_users)
        .combinations(replication + 1)
        .map(|users| MulticastGroup { users })
        .collect()
}

/// One XOR term of a multicast message: subfile `label` of file `file`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageTerm {
    pub user: usize,
    pub file: usize,
    pub label: SubfileLabel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageComposition {
    pub terms: Vec<MessageTerm>,
}

/// Composition of `V_S`: for each `k` in `S`, the subfile `W_{d_k, S \ {k}}`.
pub fn message_composition(group: &MulticastGroup, demands: &[usize], num_files: usize) -> Result<MessageComposition> {
    let terms = group
        .users()
        .iter()
        .map(|&k| {
            let file = *demands.get(k).ok_or(Error::InvalidUser {
                user: k,
                num_users: demands.len(),
            })?;
            if file >= num_files {
                return Err(Error::InvalidDemand {
                    user: k + 1,
                    demand: file + 1,
                    num_files,
                });
            }
            Ok(MessageTerm {
                user: k,
                file,
                label: group.without(k),
            })
        })
        .collect::<Result<_>>()?;
    Ok(MessageComposition { terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn replication_examples() {
        assert_eq!(replication_param(10, 5, Ratio::from_integer(4)).unwrap(), 2);
        assert_eq!(replication_param(6, 6, Ratio::from_integer(1)).unwrap(), 1);
        assert!(matches!(
            replication_param(10, 5, Ratio::from_integer(3)),
            Err(Error::UnsupportedMemory {
                numerator: 3,
                denominator: 2
            })
        ));
        assert!(replication_param(2, 5, Ratio::from_integer(3)).is_err());
    }

    #[test]
    fn subfile_sets() {
        assert_eq!(subfile_index_sets(3, 1), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(subfile_index_sets(5, 2).len(), 10);
        assert_eq!(subfile_index_sets(4, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn cache_sets() {
        assert_eq!(cache_index_sets(3, 1, 1).unwrap(), vec![vec![1]]);
        assert_eq!(
            cache_index_sets(5, 2, 0).unwrap(),
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![0, 4]]
        );
        assert!(cache_index_sets(3, 1, 3).is_err());
    }

    #[test]
    fn cached_bits_equal_memory() {
        // N * C(K-1, t-1) / C(K, t) * F = M F
        let p = PlacementConfig::new(10, 5, Ratio::from_integer(4), 1000).unwrap();
        let per_user = cache_index_sets(5, p.replication(), 0).unwrap().len();
        let cached = Ratio::from_integer((p.num_files() * per_user) as u64) * p.subfile_fraction();
        assert_eq!(cached, p.cache_size());
    }

    #[test]
    fn group_examples() {
        assert_eq!(multicast_groups(5, 2).len(), 10);
        assert!(multicast_groups(4, 4).is_empty());
        let singles = multicast_groups(3, 0);
        assert_eq!(
            singles.iter().map(|g| g.users().to_vec()).collect::<Vec<_>>(),
            vec![vec![0], vec![1], vec![2]]
        );
    }

    #[test]
    fn composition_examples() {
        let g = MulticastGroup::new(vec![0, 1]);
        let c = message_composition(&g, &[1, 0, 2], 3).unwrap();
        assert_eq!(
            c.terms.iter().map(|t| (t.file, t.label.clone())).collect::<Vec<_>>(),
            vec![(1, vec![1]), (0, vec![0])]
        );
        let g = MulticastGroup::new(vec![2]);
        let c = message_composition(&g, &[0, 0, 4], 5).unwrap();
        assert_eq!(c.terms[0].file, 4);
        assert!(c.terms[0].label.is_empty());
        assert!(matches!(
            message_composition(&g, &[0, 0, 5], 5),
            Err(Error::InvalidDemand { .. })
        ));
    }

    #[test]
    fn worst_case_demands_cycle() {
        let p = PlacementConfig::with_replication(3, 5, 1, 8).unwrap();
        assert_eq!(p.worst_case_demands(), vec![0, 1, 2, 0, 1]);
        let p = PlacementConfig::with_replication(6, 4, 2, 8).unwrap();
        assert_eq!(p.worst_case_demands(), vec![0, 1, 2, 3]);
    }

    proptest! {
        #[test]
        fn side_information_is_cached(k in 1usize..8, t_frac in 0.0f64..1.0) {
            let t = ((k as f64) * t_frac) as usize;
            let demands: Vec<usize> = (0..k).collect();
            for group in multicast_groups(k, t) {
                prop_assert_eq!(group.len(), t + 1);
                let comp = message_composition(&group, &demands, k).unwrap();
                prop_assert_eq!(comp.terms.len(), t + 1);
                for a in &comp.terms {
                    prop_assert_eq!(a.label.len(), t);
                    prop_assert!(!a.label.contains(&a.user));
                    for b in &comp.terms {
                        if a.user != b.user {
                            // user a caches b's term
                            prop_assert!(b.label.contains(&a.user));
                            let cached = cache_index_sets(k, t, a.user).unwrap();
                            prop_assert!(cached.contains(&b.label));
                        }
                    }
                }
            }
        }

        #[test]
        fn user_group_membership_count(k in 1usize..9, t_frac in 0.0f64..1.0) {
            let t = ((k as f64) * t_frac) as usize;
            let groups = multicast_groups(k, t);
            prop_assert_eq!(groups.len(), binomial(k, t + 1));
            for user in 0..k {
                let n = groups.iter().filter(|g| g.contains(user)).count();
                prop_assert_eq!(n, binomial(k - 1, t));
            }
            let labels = subfile_index_sets(k, t);
            let mut dedup = labels.clone();
            dedup.dedup();
            prop_assert_eq!(dedup.len(), binomial(k, t));
        }
    }
}
