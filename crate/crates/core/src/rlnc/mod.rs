//! Random linear network coding over GF(2^8).
//!
//! A multicast message is cut into `P` equal packets. Relay `h` receives
//! `ceil(y_S^h * P)` random linear combinations of them; a user decodes by
//! Gaussian elimination once the combinations from its relays reach rank `P`.

pub mod gf256;
mod verify;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use verify::{verify_end_to_end, EndToEndReport, UserOutcome, MAX_RESAMPLES};

pub const DEFAULT_PACKETS_PER_MESSAGE: usize = 32;

/// Slack when rounding `y * P` up, so that `0.3 * 10` gives 3 packets.
const ROUNDING_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedPacket {
    pub coefficients: Vec<u8>,
    pub payload: Vec<u8>,
}

/// The coded packets of one message carried by one relay.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedShare {
    pub group: usize,
    pub relay: usize,
    pub packets: Vec<CodedPacket>,
}

/// `ceil(share * P)`, never negative.
pub fn packet_count(share: f64, packets_per_message: usize) -> usize {
    let scaled = share * packets_per_message as f64 - ROUNDING_SLACK;
    if scaled <= 0.0 {
        0
    } else {
        scaled.ceil() as usize
    }
}

/// Splits `message` into `P` zero-padded packets of equal length.
pub fn split_packets(message: &[u8], packets_per_message: usize) -> Vec<Vec<u8>> {
    let len = message.len().div_ceil(packets_per_message);
    (0..packets_per_message)
        .map(|i| {
            let start = (i * len).min(message.len());
            let end = ((i + 1) * len).min(message.len());
            let mut p = message[start..end].to_vec();
            p.resize(len, 0);
            p
        })
        .collect()
}

/// Encodes `message` for every relay with a positive share; coefficients are
/// uniform over GF(256) from a ChaCha stream seeded with `seed`.
pub fn encode_shares(
    group: usize,
    message: &[u8],
    shares: &[f64],
    packets_per_message: usize,
    seed: u64,
) -> Result<Vec<CodedShare>> {
    if message.is_empty() {
        return Err(Error::InvalidInput("empty message".to_string()));
    }
    if packets_per_message == 0 {
        return Err(Error::InvalidInput("P must be at least 1".to_string()));
    }
    let source = split_packets(message, packets_per_message);
    let packet_len = source[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (relay, &share) in shares.iter().enumerate() {
        let count = packet_count(share, packets_per_message);
        if count == 0 {
            continue;
        }
        let packets = (0..count)
            .map(|_| {
                let coefficients: Vec<u8> = (0..packets_per_message).map(|_| rng.gen()).collect();
                let mut payload = vec![0u8; packet_len];
                for (c, p) in coefficients.iter().zip(&source) {
                    gf256::mul_add_assign(&mut payload, p, *c);
                }
                CodedPacket { coefficients, payload }
            })
            .collect();
        out.push(CodedShare { group, relay, packets });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodeFailure {
    pub rank: usize,
    pub needed: usize,
}

impl std::fmt::Display for DecodeFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "coefficient rank {} < {}", self.rank, self.needed)
    }
}

impl std::error::Error for DecodeFailure {}

/// Recovers a `message_len`-byte message from the packets of `shares`.
pub fn decode_user<'a>(
    shares: impl IntoIterator<Item = &'a CodedShare>,
    packets_per_message: usize,
    message_len: usize,
) -> std::result::Result<Vec<u8>, DecodeFailure> {
    let p = packets_per_message;
    let mut rows: Vec<Vec<u8>> = shares
        .into_iter()
        .flat_map(|s| &s.packets)
        .map(|pkt| {
            let mut row = pkt.coefficients.clone();
            row.extend_from_slice(&pkt.payload);
            row
        })
        .collect();
    if rows.len() < p {
        return Err(DecodeFailure {
            rank: rank_upper_bound(&rows, p),
            needed: p,
        });
    }
    let mut rank = 0;
    for col in 0..p {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = gf256::inv(rows[rank][col]);
        gf256::scale_assign(&mut rows[rank], inv);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[col] != 0 {
                let factor = row[col];
                gf256::mul_add_assign(row, &pivot_row, factor);
            }
        }
        rank += 1;
    }
    if rank < p {
        return Err(DecodeFailure { rank, needed: p });
    }
    let mut message: Vec<u8> = rows[..p].iter().flat_map(|r| r[p..].iter().copied()).collect();
    message.truncate(message_len);
    Ok(message)
}

fn rank_upper_bound(rows: &[Vec<u8>], p: usize) -> usize {
    rows.len().min(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn message(len: usize) -> Vec<u8> {
        (0..len).map(|i| (i * 37 + 11) as u8).collect()
    }

    #[test]
    fn packet_counts() {
        assert_eq!(packet_count(1.0, 8), 8);
        assert_eq!(packet_count(0.0, 8), 0);
        assert_eq!(packet_count(0.3, 10), 3);
        assert_eq!(packet_count(0.31, 10), 4);
        assert_eq!(packet_count(1e-12, 10), 0);
    }

    #[test]
    fn encode_counts_per_relay() {
        let m = message(100);
        let shares = encode_shares(0, &m, &[1.0, 0.0, 0.3], 10, 1).unwrap();
        assert_eq!(shares.len(), 2);
        assert_eq!(shares[0].relay, 0);
        assert_eq!(shares[0].packets.len(), 10);
        assert_eq!(shares[1].relay, 2);
        assert_eq!(shares[1].packets.len(), 3);
        assert!(shares
            .iter()
            .flat_map(|s| &s.packets)
            .all(|p| p.coefficients.len() == 10 && p.payload.len() == 10));
        assert!(encode_shares(0, &[], &[1.0], 4, 0).is_err());
    }

    #[test]
    fn full_share_decodes_exactly() {
        let m = message(257);
        let mut successes = 0;
        for seed in 0..50 {
            let shares = encode_shares(0, &m, &[1.0], 8, seed).unwrap();
            if let Ok(decoded) = decode_user(&shares, 8, m.len()) {
                assert_eq!(decoded, m);
                successes += 1;
            }
        }
        // an 8x8 uniform GF(256) matrix is singular with probability ~0.4%
        assert!(successes >= 47, "{successes}");
    }

    #[test]
    fn too_few_packets_fail() {
        let m = message(64);
        let shares = encode_shares(0, &m, &[0.5, 0.4], 16, 3).unwrap();
        let total: usize = shares.iter().map(|s| s.packets.len()).sum();
        assert_eq!(total, 15);
        let err = decode_user(&shares, 16, m.len()).unwrap_err();
        assert!(err.rank < 16);
    }

    #[test]
    fn split_shares_decode_with_high_probability() {
        // two relays with half each, P = 16: rank-deficiency is rare
        let m = message(1000);
        let trials = 400;
        let mut ok = 0;
        for seed in 0..trials {
            let shares = encode_shares(0, &m, &[0.5, 0.5], 16, seed).unwrap();
            if let Ok(d) = decode_user(&shares, 16, m.len()) {
                assert_eq!(d, m);
                ok += 1;
            }
        }
        assert!(ok as f64 / trials as f64 >= 0.99, "{ok}/{trials}");
    }
}
