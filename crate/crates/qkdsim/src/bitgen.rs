//! E91 bit generation: pair emission, state collapse (optionally through an
//! eavesdropper), detection with loss and noise, sifting, and the CHSH
//! S-value estimate.

use crate::basis::{dot, sample_uniform_basis, BasisLabel, BasisSet, MeasurementBasis, Side};
use crate::params::{DetectorParams, RunConfig};
use crate::povm;
use crate::stream::RandomStream;
use thiserror::Error;

/// Tsirelson's bound, the largest |S| quantum correlations permit.
pub const TSIRELSON_BOUND: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Expected coincident measurements consumed per sifted key bit: only 2 of
/// the 9 equally likely basis pairings coincide, so 9/2 measurements are
/// needed on average for each bit of raw key.
pub const EXPECTED_MEASUREMENTS_PER_SIFTED_BIT: f64 = 4.5;

/// How a pump slot resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventClass {
    /// The pump produced no entangled pair.
    NoPair,
    /// A pair existed but at least one side registered nothing.
    Lost,
    /// Both sides registered and the bases coincide: key material.
    SameBasisCoincidence,
    /// Both sides registered with differing bases: CHSH material.
    DiffBasisCoincidence,
}

/// Everything recorded about one pump slot.
#[derive(Debug, Clone)]
pub struct PumpEventRecord {
    pub alice_basis: MeasurementBasis,
    pub bob_basis: MeasurementBasis,
    pub alice_bit: Option<u8>,
    pub bob_bit: Option<u8>,
    pub eve_intercepted: bool,
    pub photon_count_alice: u32,
    pub photon_count_bob: u32,
    pub classification: EventClass,
}

/// Output of one bit-generation run.
#[derive(Debug, Clone)]
pub struct BitGenResult {
    pub alice_raw_key: Vec<u8>,
    /// Bob's same-basis measurements, already inverted so that a noiseless
    /// channel yields a key identical to Alice's.
    pub bob_raw_key: Vec<u8>,
    pub diff_basis_records: Vec<PumpEventRecord>,
    /// Same-basis coincidences per second of simulated source time.
    pub raw_key_rate: f64,
    pub raw_qber: f64,
    pub s_value: f64,
    pub elapsed_time: f64,
    pub pump_count: u64,
    /// Total coincidences, same-basis plus different-basis.
    pub coincidence_count: u64,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum BitGenError {
    #[error("no coincidences recorded for basis pair ({0:?}, {1:?}); insufficient statistics for the CHSH estimate")]
    EmptyCorrelationCell(BasisLabel, BasisLabel),
    #[error("bit generation did not reach {target} sifted bits within {pumps} pump events (got {sifted}); check pair and detection probabilities")]
    NonTermination { pumps: u64, sifted: usize, target: usize },
}

/// Probability that two measurements along `a` and `b` yield the same bit:
/// (1 - a·b) / 2. Identical angles give 0, i.e. perfect anti-correlation.
pub fn same_bit_probability(a: &MeasurementBasis, b: &MeasurementBasis) -> f64 {
    (1.0 - dot(a, b)) / 2.0
}

/// Collapse a state carrying `incoming_bit` in `incoming_basis` onto
/// `measuring_basis`, returning the measured bit.
pub fn collapse_measure(
    stream: &mut RandomStream,
    incoming_bit: u8,
    incoming_basis: &MeasurementBasis,
    measuring_basis: &MeasurementBasis,
) -> u8 {
    if stream.bernoulli(same_bit_probability(incoming_basis, measuring_basis)) {
        incoming_bit
    } else {
        1 - incoming_bit
    }
}

/// Intercept-resend collapse: Eve measures the transmitted state in a
/// uniformly chosen Bob basis. Her measured bit and basis become the state
/// Bob receives.
pub fn eve_collapse(
    stream: &mut RandomStream,
    incoming_bit: u8,
    incoming_basis: &MeasurementBasis,
    set: &BasisSet,
) -> (u8, MeasurementBasis) {
    let eve_basis = sample_uniform_basis(stream, Side::Bob, set);
    let bit = collapse_measure(stream, incoming_bit, incoming_basis, &eve_basis);
    (bit, eve_basis)
}

/// Does the detector register anything for `n` incident photons? False with
/// probability P(0|n).
pub fn detector_registers(stream: &mut RandomStream, n: u32, d: &DetectorParams) -> bool {
    !stream.bernoulli(povm::p_zero(n, d))
}

/// Flip `bit` with the noise count probability.
pub fn apply_noise_flip(stream: &mut RandomStream, bit: u8, d: &DetectorParams) -> u8 {
    if stream.bernoulli(d.v_d) {
        1 - bit
    } else {
        bit
    }
}

/// One receiver's detection of `n` incident photons whose first (entangled)
/// photon carries `signal_bit`. Returns the registered bit, or None on loss.
///
/// A registration is attributed to one of three causes, in proportion to the
/// model's probabilities: a dark count with every photon missed (the bit is
/// uniformly random), the entangled photon, or - when a second pair is
/// present - the second photon detected after the first was missed (the
/// second pair carries an independent random bit).
fn detect_side(
    stream: &mut RandomStream,
    n: u32,
    d: &DetectorParams,
    signal_bit: u8,
) -> Option<u8> {
    if !detector_registers(stream, n, d) {
        return None;
    }
    let p_fire = 1.0 - povm::p_zero(n, d);
    let p_dark_only = d.v_d * (1.0 - d.eta_d).powi(n as i32);
    let bit = if p_fire > 0.0 && stream.bernoulli(p_dark_only / p_fire) {
        stream.bit()
    } else if n >= 2 {
        // Detection-order split: the k-th photon is the one detected with
        // weight eta*(1-eta)^k, so the first photon was missed with
        // probability ((1-eta) - (1-eta)^n) / (1 - (1-eta)^n).
        let miss = 1.0 - d.eta_d;
        let denom = 1.0 - miss.powi(n as i32);
        let p_not_first = if denom > 0.0 { (miss - miss.powi(n as i32)) / denom } else { 0.0 };
        if stream.bernoulli(p_not_first) {
            stream.bit()
        } else {
            signal_bit
        }
    } else {
        signal_bit
    };
    Some(apply_noise_flip(stream, bit, d))
}

/// Simulate the slot of a pump that did produce an entangled pair.
fn simulate_pair_event(
    stream: &mut RandomStream,
    cfg: &RunConfig,
    set: &BasisSet,
) -> PumpEventRecord {
    let alice_basis = sample_uniform_basis(stream, Side::Alice, set);
    let bob_basis = sample_uniform_basis(stream, Side::Bob, set);
    let alice_true = stream.bit();
    let n = if stream.bernoulli(cfg.source.second_pair_prob) { 2 } else { 1 };
    let eve = stream.bernoulli(cfg.source.eve_prob);

    let bob_pre = if eve {
        let (eve_bit, eve_basis) = eve_collapse(stream, alice_true, &alice_basis, set);
        collapse_measure(stream, eve_bit, &eve_basis, &bob_basis)
    } else {
        collapse_measure(stream, alice_true, &alice_basis, &bob_basis)
    };

    let alice_bit = detect_side(stream, n, &cfg.detector, alice_true);
    let bob_bit = detect_side(stream, n, &cfg.detector, bob_pre);

    let classification = match (alice_bit, bob_bit) {
        (Some(_), Some(_)) => {
            if BasisSet::is_same_basis_pair(alice_basis.label, bob_basis.label) {
                EventClass::SameBasisCoincidence
            } else {
                EventClass::DiffBasisCoincidence
            }
        }
        _ => EventClass::Lost,
    };

    PumpEventRecord {
        alice_basis,
        bob_basis,
        alice_bit,
        bob_bit,
        eve_intercepted: eve,
        photon_count_alice: n,
        photon_count_bob: n,
        classification,
    }
}

/// Simulate one pump slot end to end.
pub fn simulate_pump_event(
    stream: &mut RandomStream,
    cfg: &RunConfig,
    set: &BasisSet,
) -> PumpEventRecord {
    if !stream.bernoulli(cfg.source.first_pair_prob) {
        // The receivers still pick bases every slot; there is just nothing
        // to measure.
        let alice_basis = sample_uniform_basis(stream, Side::Alice, set);
        let bob_basis = sample_uniform_basis(stream, Side::Bob, set);
        return PumpEventRecord {
            alice_basis,
            bob_basis,
            alice_bit: None,
            bob_bit: None,
            eve_intercepted: false,
            photon_count_alice: 0,
            photon_count_bob: 0,
            classification: EventClass::NoPair,
        };
    }
    simulate_pair_event(stream, cfg, set)
}

/// Empirical correlation coefficient E(a, b) = P11 + P00 - P10 - P01 over
/// the different-basis coincidences with bases (a, b).
pub fn estimate_correlation(
    records: &[PumpEventRecord],
    a: BasisLabel,
    b: BasisLabel,
) -> Result<f64, BitGenError> {
    let mut counts = [0u64; 4]; // indexed by alice_bit * 2 + bob_bit
    for r in records {
        if r.alice_basis.label != a || r.bob_basis.label != b {
            continue;
        }
        if let (Some(x), Some(y)) = (r.alice_bit, r.bob_bit) {
            counts[(x * 2 + y) as usize] += 1;
        }
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(BitGenError::EmptyCorrelationCell(a, b));
    }
    let p = |k: usize| counts[k] as f64 / total as f64;
    // same-bit cells (0,0) and (1,1) minus cross cells (0,1) and (1,0)
    Ok(p(0) + p(3) - p(1) - p(2))
}

/// CHSH test statistic S = E(a1,b1) - E(a1,b3) + E(a3,b1) + E(a3,b3),
/// clamped to Tsirelson's bound when a small sample overshoots it.
pub fn estimate_s(records: &[PumpEventRecord]) -> Result<f64, BitGenError> {
    use BasisLabel::*;
    let s = estimate_correlation(records, A1, B1)? - estimate_correlation(records, A1, B3)?
        + estimate_correlation(records, A3, B1)?
        + estimate_correlation(records, A3, B3)?;
    Ok(s.clamp(-TSIRELSON_BOUND, TSIRELSON_BOUND))
}

/// Sifted bits the run must accumulate before stopping.
pub fn required_pump_target(desired_key_length: usize, excess_bit_factor: f64) -> usize {
    (desired_key_length as f64 * excess_bit_factor).ceil() as usize
}

// A pair-event stall guard: if this many pairs produce zero sifted bits the
// run cannot plausibly finish and aborts with a diagnostic instead of
// spinning until the pump ceiling.
const STALL_PAIR_EVENTS: u64 = 1_000_000;

/// Run the full bit-generation stage until the sifted-bit target is met.
///
/// Pump slots that produce no pair are skipped in bulk by sampling the
/// geometric gap to the next pair, which keeps the loop proportional to
/// pair events rather than pump events.
pub fn run_bit_generation(
    cfg: &RunConfig,
    stream: &mut RandomStream,
) -> Result<BitGenResult, BitGenError> {
    let set = BasisSet::standard();
    let target = required_pump_target(cfg.desired_key_length, cfg.excess_bit_factor);
    let p_pair = cfg.source.first_pair_prob;

    let mut alice_key: Vec<u8> = Vec::with_capacity(target);
    let mut bob_key: Vec<u8> = Vec::with_capacity(target);
    let mut diff_records: Vec<PumpEventRecord> = Vec::new();
    let mut pump_count: u64 = 0;
    let mut pair_events: u64 = 0;

    loop {
        if p_pair <= 0.0 {
            return Err(BitGenError::NonTermination {
                pumps: cfg.pump_ceiling,
                sifted: alice_key.len(),
                target,
            });
        }
        let gap = if p_pair >= 1.0 {
            1
        } else {
            // failures before the next pair, inverse-CDF geometric
            let u = stream.uniform();
            ((1.0 - u).ln() / (1.0 - p_pair).ln()).floor() as u64 + 1
        };
        pump_count = pump_count.saturating_add(gap);
        if pump_count > cfg.pump_ceiling {
            return Err(BitGenError::NonTermination {
                pumps: pump_count,
                sifted: alice_key.len(),
                target,
            });
        }
        pair_events += 1;

        let rec = simulate_pair_event(stream, cfg, &set);
        match rec.classification {
            EventClass::SameBasisCoincidence => {
                alice_key.push(rec.alice_bit.unwrap());
                bob_key.push(1 - rec.bob_bit.unwrap());
            }
            EventClass::DiffBasisCoincidence => diff_records.push(rec),
            EventClass::Lost | EventClass::NoPair => {}
        }

        if alice_key.len() >= target {
            break;
        }
        if pair_events >= STALL_PAIR_EVENTS && alice_key.is_empty() {
            return Err(BitGenError::NonTermination { pumps: pump_count, sifted: 0, target });
        }
    }

    let elapsed_time = pump_count as f64 / cfg.source.pump_rate;
    let key_len = alice_key.len();
    let errors = alice_key.iter().zip(&bob_key).filter(|(a, b)| a != b).count();
    let s_value = estimate_s(&diff_records)?;
    let coincidence_count = key_len as u64 + diff_records.len() as u64;

    Ok(BitGenResult {
        raw_key_rate: key_len as f64 / elapsed_time,
        raw_qber: errors as f64 / key_len as f64,
        s_value,
        elapsed_time,
        pump_count,
        coincidence_count,
        alice_raw_key: alice_key,
        bob_raw_key: bob_key,
        diff_basis_records: diff_records,
    })
}
