//! Cascade information reconciliation: iterative even-parity block checks
//! with recursive bisection, identical shuffles between iterations, and
//! cross-iteration trace-back of corrections.
//!
//! Every bit flip happens at a one-bit base case where Alice's and Bob's
//! bits provably differ, so reconciliation can only remove errors.

use crate::stream::RandomStream;

/// Outcome of a full reconciliation run. Residual errors are counted by
/// direct key comparison; only a simulator holding both keys can do that.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeResult {
    pub alice_key: Vec<u8>,
    pub bob_key: Vec<u8>,
    /// Key bits considered compromised: two per correction.
    pub leaked_bits: u64,
    /// Parity bits actually exchanged, the conventional leakage measure.
    pub leaked_parities: u64,
    pub corrected_errors: u64,
    pub residual_errors: u64,
    pub iterations_run: usize,
}

/// First-iteration block size, 0.73/QBER rounded to the nearest integer,
/// floored at 2 and capped at the key length. A zero QBER degenerates to a
/// single block spanning the whole key.
pub fn initial_block_size(qber: f64, key_length: usize) -> usize {
    if qber <= 0.0 {
        return key_length.max(1);
    }
    let raw = (0.73 / qber).round() as usize;
    raw.max(2).min(key_length.max(1))
}

/// Doubled block size for iterations after the first, capped at the key
/// length.
pub fn next_block_size(previous: usize, key_length: usize) -> usize {
    (2 * previous).min(key_length)
}

fn parity(bits: &[u8]) -> u8 {
    bits.iter().fold(0, |acc, b| acc ^ b)
}

/// Compare block parities and, on mismatch, bisect down to the erroneous
/// bit and flip it in Bob's copy. Left halves take the extra bit on odd
/// splits. Returns the corrected block, parity bits revealed, and the
/// number of corrections (0 or 1).
pub fn binary_parity_correct(alice_block: &[u8], bob_block: &[u8]) -> (Vec<u8>, u64, u64) {
    assert_eq!(alice_block.len(), bob_block.len());
    let mut bob = bob_block.to_vec();
    let mut leaked = 1u64;
    if parity(alice_block) == parity(&bob) {
        return (bob, leaked, 0);
    }
    let mut lo = 0usize;
    let mut hi = bob.len();
    while hi - lo > 1 {
        let mid = lo + (hi - lo + 1) / 2;
        leaked += 1;
        if parity(&alice_block[lo..mid]) != parity(&bob[lo..mid]) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    bob[lo] ^= 1;
    (bob, leaked, 1)
}

/// One pass over consecutive blocks of `block_size`; the last block may be
/// short. Returns Bob's corrected key, corrections made, and parity bits
/// revealed.
pub fn cascade_iteration(
    alice_key: &[u8],
    bob_key: &[u8],
    block_size: usize,
) -> (Vec<u8>, u64, u64) {
    assert!(block_size >= 1);
    let mut bob = Vec::with_capacity(bob_key.len());
    let mut corrections = 0u64;
    let mut leaked = 0u64;
    for (ab, bb) in alice_key.chunks(block_size).zip(bob_key.chunks(block_size)) {
        let (fixed, l, c) = binary_parity_correct(ab, bb);
        bob.extend_from_slice(&fixed);
        corrections += c;
        leaked += l;
    }
    (bob, corrections, leaked)
}

/// Apply one uniformly random permutation to both keys identically.
pub fn shuffle_in_unison(
    stream: &mut RandomStream,
    alice_key: &[u8],
    bob_key: &[u8],
) -> (Vec<u8>, Vec<u8>) {
    assert_eq!(alice_key.len(), bob_key.len());
    let perm = stream.permutation(alice_key.len());
    let a = perm.iter().map(|&i| alice_key[i]).collect();
    let b = perm.iter().map(|&i| bob_key[i]).collect();
    (a, b)
}

// Block structure of one completed iteration, recorded by bit label so
// corrections in later iterations can re-examine earlier blocks after the
// keys have been reshuffled.
struct IterationBlocks {
    block_of: Vec<usize>,
    blocks: Vec<Vec<usize>>,
}

struct Reconciler {
    alice: Vec<u8>,
    bob: Vec<u8>,
    /// Current position of each bit label.
    pos_of: Vec<usize>,
    history: Vec<IterationBlocks>,
    corrections: u64,
    leaked_parities: u64,
}

impl Reconciler {
    fn bit_pair(&self, label: usize) -> (u8, u8) {
        let p = self.pos_of[label];
        (self.alice[p], self.bob[p])
    }

    fn block_parities(&self, labels: &[usize]) -> (u8, u8) {
        labels.iter().fold((0, 0), |(a, b), &l| {
            let (x, y) = self.bit_pair(l);
            (a ^ x, b ^ y)
        })
    }

    // Check one block; on parity mismatch bisect to a differing bit, flip
    // it in Bob's key, and return its label.
    fn check_block(&mut self, labels: &[usize]) -> Option<usize> {
        self.leaked_parities += 1;
        let (pa, pb) = self.block_parities(labels);
        if pa == pb {
            return None;
        }
        let mut lo = 0usize;
        let mut hi = labels.len();
        while hi - lo > 1 {
            let mid = lo + (hi - lo + 1) / 2;
            self.leaked_parities += 1;
            let (pa, pb) = self.block_parities(&labels[lo..mid]);
            if pa != pb {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let label = labels[lo];
        let pos = self.pos_of[label];
        debug_assert_ne!(self.alice[pos], self.bob[pos]);
        self.bob[pos] ^= 1;
        self.corrections += 1;
        Some(label)
    }

    // Re-examine every recorded block containing `label`, cascading any
    // further corrections until all touched blocks balance.
    fn trace_back(&mut self, label: usize) {
        let mut queue = vec![label];
        while let Some(lab) = queue.pop() {
            for it in 0..self.history.len() {
                let block = self.history[it].blocks[self.history[it].block_of[lab]].clone();
                let (pa, pb) = self.block_parities(&block);
                if pa != pb {
                    if let Some(flipped) = self.check_block(&block) {
                        queue.push(flipped);
                    }
                }
            }
        }
    }
}

/// Run the full protocol: the first iteration sizes blocks from the
/// initial QBER, each later iteration shuffles both keys identically and
/// doubles the block size.
pub fn run_cascade(
    alice_key: &[u8],
    bob_key: &[u8],
    iterations: usize,
    initial_qber: f64,
    stream: &mut RandomStream,
) -> CascadeResult {
    assert_eq!(alice_key.len(), bob_key.len());
    assert!(iterations >= 1);
    let n = alice_key.len();
    let initial_errors =
        alice_key.iter().zip(bob_key).filter(|(a, b)| a != b).count() as u64;

    let mut rec = Reconciler {
        alice: alice_key.to_vec(),
        bob: bob_key.to_vec(),
        pos_of: (0..n).collect(),
        history: Vec::with_capacity(iterations),
        corrections: 0,
        leaked_parities: 0,
    };
    // labels[i] = label of the bit currently at position i
    let mut labels: Vec<usize> = (0..n).collect();
    let mut block_size = initial_block_size(initial_qber, n);

    for k in 0..iterations {
        if k > 0 {
            let perm = stream.permutation(n);
            rec.alice = perm.iter().map(|&i| rec.alice[i]).collect();
            rec.bob = perm.iter().map(|&i| rec.bob[i]).collect();
            labels = perm.iter().map(|&i| labels[i]).collect();
            for (pos, &lab) in labels.iter().enumerate() {
                rec.pos_of[lab] = pos;
            }
            block_size = next_block_size(block_size, n);
        }

        let mut blocks = Vec::new();
        let mut block_of = vec![0usize; n];
        for (bi, chunk) in labels.chunks(block_size).enumerate() {
            for &lab in chunk {
                block_of[lab] = bi;
            }
            blocks.push(chunk.to_vec());
        }
        rec.history.push(IterationBlocks { block_of, blocks });

        for bi in 0..rec.history[k].blocks.len() {
            let block = rec.history[k].blocks[bi].clone();
            if let Some(flipped) = rec.check_block(&block) {
                rec.trace_back(flipped);
            }
        }
    }

    let residual_errors =
        rec.alice.iter().zip(&rec.bob).filter(|(a, b)| a != b).count() as u64;
    debug_assert_eq!(rec.corrections + residual_errors, initial_errors);

    CascadeResult {
        leaked_bits: 2 * rec.corrections,
        leaked_parities: rec.leaked_parities,
        corrected_errors: rec.corrections,
        residual_errors,
        iterations_run: iterations,
        alice_key: rec.alice,
        bob_key: rec.bob,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<u8> {
        s.bytes().map(|b| b - b'0').collect()
    }

    #[test]
    fn initial_block_size_examples() {
        assert_eq!(initial_block_size(0.05, 600), 15);
        assert_eq!(initial_block_size(0.73, 600), 2);
        assert_eq!(initial_block_size(0.01, 600), 73);
        assert_eq!(initial_block_size(0.0, 600), 600);
        assert_eq!(initial_block_size(0.001, 600), 600, "capped at key length");
    }

    #[test]
    fn next_block_size_examples() {
        assert_eq!(next_block_size(15, 600), 30);
        assert_eq!(next_block_size(400, 600), 600);
        assert_eq!(next_block_size(2, 600), 4);
    }

    #[test]
    fn equal_blocks_untouched() {
        let a = bits("1010");
        let (fixed, leaked, corrections) = binary_parity_correct(&a, &a);
        assert_eq!(fixed, a);
        assert_eq!(corrections, 0);
        assert_eq!(leaked, 1);
    }

    #[test]
    fn single_error_found_and_fixed() {
        let a = bits("1010");
        let b = bits("1000");
        let (fixed, _, corrections) = binary_parity_correct(&a, &b);
        assert_eq!(fixed, a);
        assert_eq!(corrections, 1);
    }

    #[test]
    fn even_error_count_is_invisible() {
        let a = bits("1010");
        let b = bits("0000");
        let (fixed, _, corrections) = binary_parity_correct(&a, &b);
        assert_eq!(fixed, b);
        assert_eq!(corrections, 0);
    }

    #[test]
    fn single_error_completeness_exhaustive() {
        // any single flipped bit is always found by bisection
        for size in 2..=64usize {
            let alice: Vec<u8> = (0..size).map(|i| ((i * 7 + 3) % 2) as u8).collect();
            for pos in 0..size {
                let mut bob = alice.clone();
                bob[pos] ^= 1;
                let (fixed, _, corrections) = binary_parity_correct(&alice, &bob);
                assert_eq!(fixed, alice, "size {size} pos {pos}");
                assert_eq!(corrections, 1);
            }
        }
    }

    #[test]
    fn iteration_counts_parities_and_corrections() {
        let a = bits("101010101010");
        let (fixed, corrections, leaked) = cascade_iteration(&a, &a, 4);
        assert_eq!(fixed, a);
        assert_eq!(corrections, 0);
        assert_eq!(leaked, 3, "one parity per block");

        let mut b = a.clone();
        b[5] ^= 1;
        let (fixed, corrections, _) = cascade_iteration(&a, &b, 4);
        assert_eq!(fixed, a);
        assert_eq!(corrections, 1);

        let mut b = a.clone();
        b[1] ^= 1;
        b[2] ^= 1;
        let (fixed, corrections, _) = cascade_iteration(&a, &b, 4);
        assert_eq!(fixed, b, "two errors in one block cancel in parity");
        assert_eq!(corrections, 0);
    }

    #[test]
    fn shuffle_preserves_error_pattern_and_replays() {
        let a = bits("1100101001");
        let mut b = a.clone();
        b[3] ^= 1;
        b[7] ^= 1;
        let (a1, b1) = shuffle_in_unison(&mut RandomStream::new(9), &a, &b);
        let errors = a1.iter().zip(&b1).filter(|(x, y)| x != y).count();
        assert_eq!(errors, 2);
        let (a2, b2) = shuffle_in_unison(&mut RandomStream::new(9), &a, &b);
        assert_eq!((a1, b1), (a2, b2));
    }

    #[test]
    fn identical_keys_come_back_identical() {
        let a = bits("110010100111001010");
        let r = run_cascade(&a, &a, 4, 0.05, &mut RandomStream::new(3));
        assert_eq!(r.corrected_errors, 0);
        assert_eq!(r.residual_errors, 0);
        assert_eq!(r.alice_key, r.bob_key);
        assert_eq!(r.leaked_bits, 0);
        assert!(r.leaked_parities > 0);
    }

    #[test]
    fn accounting_identity_and_monotonicity() {
        let mut stream = RandomStream::new(77);
        for trial in 0..50u64 {
            let n = 200;
            let mut key_stream = RandomStream::new(500 + trial);
            let alice: Vec<u8> = (0..n).map(|_| key_stream.bit()).collect();
            let bob: Vec<u8> = alice
                .iter()
                .map(|&b| if key_stream.bernoulli(0.05) { 1 - b } else { b })
                .collect();
            let initial = alice.iter().zip(&bob).filter(|(a, b)| a != b).count() as u64;
            let r = run_cascade(&alice, &bob, 4, 0.05, &mut stream);
            assert_eq!(r.corrected_errors + r.residual_errors, initial);
            assert!(r.residual_errors <= initial);
            assert_eq!(r.alice_key.len(), n);
            assert_eq!(r.bob_key.len(), n);
            // Alice's bits are only reordered, never modified
            let mut before: Vec<u8> = alice.clone();
            let mut after: Vec<u8> = r.alice_key.clone();
            before.sort_unstable();
            after.sort_unstable();
            assert_eq!(before, after);
        }
    }

    #[test]
    fn converges_at_three_percent_qber() {
        let mut zero = 0;
        for trial in 0..100u64 {
            let mut key_stream = RandomStream::new(9000 + trial);
            let alice: Vec<u8> = (0..600).map(|_| key_stream.bit()).collect();
            let bob: Vec<u8> = alice
                .iter()
                .map(|&b| if key_stream.bernoulli(0.03) { 1 - b } else { b })
                .collect();
            let r = run_cascade(&alice, &bob, 4, 0.03, &mut RandomStream::new(100 + trial));
            if r.residual_errors == 0 {
                zero += 1;
            }
        }
        assert!(zero >= 95, "zero-residual trials: {zero}/100");
    }

    #[test]
    fn determinism() {
        let mut key_stream = RandomStream::new(1234);
        let alice: Vec<u8> = (0..300).map(|_| key_stream.bit()).collect();
        let bob: Vec<u8> = alice
            .iter()
            .map(|&b| if key_stream.bernoulli(0.04) { 1 - b } else { b })
            .collect();
        let r1 = run_cascade(&alice, &bob, 4, 0.04, &mut RandomStream::new(42));
        let r2 = run_cascade(&alice, &bob, 4, 0.04, &mut RandomStream::new(42));
        assert_eq!(r1, r2);
    }
}
