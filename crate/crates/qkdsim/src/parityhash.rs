//! Privacy amplification by block parities: the reconciled key is split
//! into exactly `d` blocks and each block's even parity becomes one bit of
//! the secret key.

use thiserror::Error;

/// Final stage output.
#[derive(Debug, Clone, PartialEq)]
pub struct SecretKeyResult {
    pub alice_secret: Vec<u8>,
    pub bob_secret: Vec<u8>,
    /// Secret bits per second of simulated source time.
    pub secret_key_rate: f64,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PrivacyAmplificationError {
    #[error("reconciled key of {key_length} bits is too short for a {desired} bit secret key")]
    KeyTooShort { key_length: usize, desired: usize },
    #[error("desired key length must be >= 1")]
    ZeroLength,
    #[error("elapsed time must be > 0, got {0}")]
    NonPositiveElapsed(f64),
}

/// Uniform block size floor(n/d); the final block absorbs the remainder.
pub fn pa_block_size(n: usize, d: usize) -> Result<usize, PrivacyAmplificationError> {
    if d < 1 {
        return Err(PrivacyAmplificationError::ZeroLength);
    }
    if n < d {
        return Err(PrivacyAmplificationError::KeyTooShort { key_length: n, desired: d });
    }
    Ok(n / d)
}

/// Compress `key` to `d` bits: the first d-1 blocks have the uniform size,
/// the last block holds all remaining bits, and each output bit is the XOR
/// of its block.
pub fn parity_hash(key: &[u8], d: usize) -> Result<Vec<u8>, PrivacyAmplificationError> {
    let bs = pa_block_size(key.len(), d)?;
    let mut out = Vec::with_capacity(d);
    for i in 0..d {
        let start = i * bs;
        let end = if i + 1 == d { key.len() } else { start + bs };
        out.push(key[start..end].iter().fold(0, |acc, b| acc ^ b));
    }
    Ok(out)
}

/// Hash both reconciled keys down to `d` bits and compute the secret key
/// rate from the raw-key generation time.
pub fn run_privacy_amplification(
    alice_key: &[u8],
    bob_key: &[u8],
    d: usize,
    elapsed_time: f64,
) -> Result<SecretKeyResult, PrivacyAmplificationError> {
    assert_eq!(alice_key.len(), bob_key.len());
    if !(elapsed_time > 0.0) {
        return Err(PrivacyAmplificationError::NonPositiveElapsed(elapsed_time));
    }
    Ok(SecretKeyResult {
        alice_secret: parity_hash(alice_key, d)?,
        bob_secret: parity_hash(bob_key, d)?,
        secret_key_rate: d as f64 / elapsed_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<u8> {
        s.bytes().map(|b| b - b'0').collect()
    }

    #[test]
    fn block_size_examples() {
        assert_eq!(pa_block_size(1000, 300).unwrap(), 3);
        assert_eq!(pa_block_size(600, 600).unwrap(), 1);
        assert_eq!(
            pa_block_size(599, 600),
            Err(PrivacyAmplificationError::KeyTooShort { key_length: 599, desired: 600 })
        );
    }

    #[test]
    fn hand_xor_example() {
        assert_eq!(parity_hash(&bits("110100"), 3).unwrap(), bits("010"));
    }

    #[test]
    fn all_zero_key_hashes_to_zero() {
        assert_eq!(parity_hash(&vec![0; 20], 7).unwrap(), vec![0; 7]);
    }

    #[test]
    fn remainder_goes_to_last_block() {
        // length 7, d = 3: blocks of sizes 2, 2, 3
        let key = bits("1101001");
        let out = parity_hash(&key, 3).unwrap();
        assert_eq!(out, vec![1 ^ 1, 0 ^ 1, 0 ^ 0 ^ 1]);
    }

    #[test]
    fn identical_inputs_identical_secrets() {
        let mut stream = crate::stream::RandomStream::new(8);
        let key: Vec<u8> = (0..600).map(|_| stream.bit()).collect();
        let r = run_privacy_amplification(&key, &key, 300, 75.0).unwrap();
        assert_eq!(r.alice_secret, r.bob_secret);
        assert_eq!(r.alice_secret.len(), 300);
        assert!((r.secret_key_rate - 4.0).abs() < 1e-12);
    }

    #[test]
    fn single_input_flip_moves_exactly_one_output_bit() {
        let mut stream = crate::stream::RandomStream::new(8);
        let key: Vec<u8> = (0..100).map(|_| stream.bit()).collect();
        let base = parity_hash(&key, 30).unwrap();
        for pos in 0..key.len() {
            let mut flipped = key.clone();
            flipped[pos] ^= 1;
            let out = parity_hash(&flipped, 30).unwrap();
            let diffs = base.iter().zip(&out).filter(|(a, b)| a != b).count();
            assert_eq!(diffs, 1, "pos {pos}");
        }
    }

    #[test]
    fn elapsed_time_must_be_positive() {
        let key = bits("1010");
        assert!(matches!(
            run_privacy_amplification(&key, &key, 2, 0.0),
            Err(PrivacyAmplificationError::NonPositiveElapsed(_))
        ));
    }
}
