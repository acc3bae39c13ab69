//! Two-hop network topology: a server feeding `H` relays over fronthaul links
//! of capacity `C_F`, and `K` users each attached to a subset of relays over
//! edge links of capacity `C_E`.
//!
//! Indices are 0-based in memory and 1-based in files and CLI output.

use std::fs;
use std::path::Path;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_CAPACITY: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    num_relays: usize,
    user_relays: Vec<Vec<usize>>,
    relay_users: Vec<Vec<usize>>,
    fronthaul_capacity: f64,
    edge_capacity: f64,
}

impl Topology {
    /// Builds a topology from 0-based relay sets, one per user.
    ///
    /// Relay sets are sorted; duplicates, out-of-range relays and empty sets
    /// are rejected.
    pub fn new(num_relays: usize, user_relays: Vec<Vec<usize>>) -> Result<Self> {
        if num_relays == 0 {
            return Err(validation("num_relays", "must be positive"));
        }
        if user_relays.is_empty() {
            return Err(validation("users", "at least one user is required"));
        }
        let mut normalized = Vec::with_capacity(user_relays.len());
        for (k, mut relays) in user_relays.into_iter().enumerate() {
            if relays.is_empty() {
                return Err(validation(format!("users[{}]", k + 1), "relay list is empty"));
            }
            if let Some(&bad) = relays.iter().find(|&&h| h >= num_relays) {
                return Err(validation(
                    format!("users[{}]", k + 1),
                    format!("relay index {} exceeds H={}", bad + 1, num_relays),
                ));
            }
            relays.sort_unstable();
            if relays.windows(2).any(|w| w[0] == w[1]) {
                return Err(validation(format!("users[{}]", k + 1), "duplicate relay index"));
            }
            normalized.push(relays);
        }
        let mut relay_users = vec![Vec::new(); num_relays];
        for (k, relays) in normalized.iter().enumerate() {
            for &h in relays {
                relay_users[h].push(k);
            }
        }
        Ok(Self {
            num_relays,
            user_relays: normalized,
            relay_users,
            fronthaul_capacity: DEFAULT_CAPACITY,
            edge_capacity: DEFAULT_CAPACITY,
        })
    }

    pub fn with_capacities(mut self, fronthaul: f64, edge: f64) -> Result<Self> {
        check_capacity("fronthaul_capacity", fronthaul)?;
        check_capacity("edge_capacity", edge)?;
        self.fronthaul_capacity = fronthaul;
        self.edge_capacity = edge;
        Ok(self)
    }

    /// Each user independently picks a uniformly random `degree`-subset of
    /// relays (partial Fisher–Yates on a seeded ChaCha stream).
    pub fn random_uniform(num_relays: usize, num_users: usize, degree: usize, seed: u64) -> Result<Self> {
        check_degree(num_relays, degree)?;
        if num_users == 0 {
            return Err(validation("users", "at least one user is required"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pool: Vec<usize> = (0..num_relays).collect();
        let user_relays = (0..num_users)
            .map(|_| {
                let (chosen, _) = pool.partial_shuffle(&mut rng, degree);
                let mut relays = chosen.to_vec();
                relays.sort_unstable();
                relays
            })
            .collect();
        Self::new(num_relays, user_relays)
    }

    /// Combination network: one user per `degree`-subset of relays, in
    /// lexicographic order.
    pub fn combination(num_relays: usize, degree: usize) -> Result<Self> {
        check_degree(num_relays, degree)?;
        let user_relays = (0..num_relays).combinations(degree).collect();
        Self::new(num_relays, user_relays)
    }

    /// Every user connected to every relay.
    pub fn fully_connected(num_relays: usize, num_users: usize) -> Result<Self> {
        Self::new(num_relays, vec![(0..num_relays).collect(); num_users])
    }

    pub fn num_relays(&self) -> usize {
        self.num_relays
    }

    pub fn num_users(&self) -> usize {
        self.user_relays.len()
    }

    pub fn fronthaul_capacity(&self) -> f64 {
        self.fronthaul_capacity
    }

    pub fn edge_capacity(&self) -> f64 {
        self.edge_capacity
    }

    /// Relays serving user `k` (sorted).
    pub fn relays_of(&self, user: usize) -> &[usize] {
        &self.user_relays[user]
    }

    /// Users attached to relay `h` (sorted).
    pub fn users_of(&self, relay: usize) -> &[usize] {
        &self.relay_users[relay]
    }

    pub fn user_relays(&self) -> &[Vec<usize>] {
        &self.user_relays
    }

    /// The common degree `|H_k|` if every user has the same number of relays.
    pub fn uniform_degree(&self) -> Option<usize> {
        let first = self.user_relays[0].len();
        self.user_relays.iter().all(|r| r.len() == first).then_some(first)
    }

    /// Union of the relays serving `users`, sorted.
    pub fn relays_of_group(&self, users: &[usize]) -> Result<Vec<usize>> {
        let mut mask = vec![false; self.num_relays];
        for &k in users {
            if k >= self.num_users() {
                return Err(Error::InvalidUser {
                    user: k,
                    num_users: self.num_users(),
                });
            }
            for &h in &self.user_relays[k] {
                mask[h] = true;
            }
        }
        Ok(mask.iter().enumerate().filter_map(|(h, &on)| on.then_some(h)).collect())
    }

    /// Same topology with one extra relay serving nobody.
    pub fn with_isolated_relay(&self) -> Self {
        let mut relay_users = self.relay_users.clone();
        relay_users.push(Vec::new());
        Self {
            num_relays: self.num_relays + 1,
            user_relays: self.user_relays.clone(),
            relay_users,
            fronthaul_capacity: self.fronthaul_capacity,
            edge_capacity: self.edge_capacity,
        }
    }

    pub fn to_json(&self) -> String {
        let file = TopologyFile {
            num_relays: self.num_relays,
            fronthaul_capacity: self.fronthaul_capacity,
            edge_capacity: self.edge_capacity,
            users: self
                .user_relays
                .iter()
                .map(|r| r.iter().map(|h| h + 1).collect())
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("topology serializes")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, TopologyDecodeError> {
        let file: TopologyFile = serde_json::from_str(text).map_err(TopologyDecodeError::Json)?;
        file.into_topology().map_err(TopologyDecodeError::Invalid)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json() + "\n").map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text).map_err(|e| match e {
            TopologyDecodeError::Json(source) => Error::Parse {
                path: path.to_path_buf(),
                source,
            },
            TopologyDecodeError::Invalid(err) => err,
        })
    }
}

#[derive(Debug)]
pub enum TopologyDecodeError {
    Json(serde_json::Error),
    Invalid(Error),
}

impl std::fmt::Display for TopologyDecodeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Json(e) => write!(f, "{e}"),
            Self::Invalid(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for TopologyDecodeError {}

/// On-disk schema. Relay indices are 1-based.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TopologyFile {
    num_relays: usize,
    fronthaul_capacity: f64,
    edge_capacity: f64,
    users: Vec<Vec<usize>>,
}

impl TopologyFile {
    fn into_topology(self) -> Result<Topology> {
        let mut user_relays = Vec::with_capacity(self.users.len());
        for (k, relays) in self.users.into_iter().enumerate() {
            let mut zero_based = Vec::with_capacity(relays.len());
            for h in relays {
                if h == 0 || h > self.num_relays {
                    return Err(validation(
                        format!("users[{}]", k + 1),
                        format!("relay index {h} outside [1, {}]", self.num_relays),
                    ));
                }
                zero_based.push(h - 1);
            }
            user_relays.push(zero_based);
        }
        Topology::new(self.num_relays, user_relays)?.with_capacities(self.fronthaul_capacity, self.edge_capacity)
    }
}

fn check_degree(num_relays: usize, degree: usize) -> Result<()> {
    if degree == 0 || degree > num_relays {
        return Err(Error::InvalidDegree { degree, num_relays });
    }
    Ok(())
}

pub(crate) fn check_capacity(name: &'static str, value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::InvalidCapacity { name, value });
    }
    Ok(())
}

fn validation(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Validation {
        field: field.into(),
        message: message.into(),
    }
}
