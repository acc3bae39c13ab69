//! Routing-based coded-caching delivery for two-hop server/relay/user
//! networks with arbitrary topology.
//!
//! The server holds a library of files, users cache every subfile whose
//! label contains them, and every coded multicast message is split
//! into random linear combinations whose lengths are chosen per relay by a
//! linear program. The crate provides:
//!
//! - [`topology`]: relay/user connectivity, random and combination generators, JSON persistence
//! - [`placement`]: subfile labels, caches, multicast groups and their XOR composition
//! - [`routing`]: the max-link-load and delivery-time LPs and load metrics
//! - [`simplex`]: a dense two-phase simplex over `f64` and exact rationals
//! - [`dynamic`]: the grouped sequential approximation of the full LP
//! - [`baselines`]: MDS and MGL reference allocations
//! - [`rlnc`]: byte-level GF(2^8) encoding and decoding of an allocation
//! - [`harness`]: seeded Monte Carlo experiments and CSV output

pub mod baselines;
pub mod dynamic;
pub mod error;
pub mod harness;
pub mod placement;
pub mod rlnc;
pub mod routing;
pub mod seed;
pub mod simplex;
pub mod topology;

pub use error::{Error, Result};
pub use placement::{MulticastGroup, PlacementConfig};
pub use routing::{LoadReport, RoutingAllocation};
pub use topology::Topology;

/// Binomial coefficient `C(n, k)`, zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        0
    } else {
        num_integer::binomial(n, k)
    }
}
