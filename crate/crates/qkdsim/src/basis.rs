//! Polarization measurement bases for the E91 exchange.
//!
//! Alice measures along azimuthal angles {0, π/4, π/2} and Bob along
//! {π/4, π/2, 3π/4}, so exactly two of the nine basis pairings coincide:
//! (A2, B1) and (A3, B2). Same-basis coincidences become key material,
//! everything else feeds the CHSH estimator.

use crate::stream::RandomStream;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

/// Tag identifying one of the six configured bases. Basis identity is
/// carried by this tag, never by floating-point comparison of angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisLabel {
    A1,
    A2,
    A3,
    B1,
    B2,
    B3,
}

/// A measurement basis: a label plus its azimuthal angle from horizontal
/// polarization, in radians, within [0, π).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementBasis {
    pub label: BasisLabel,
    pub angle: f64,
}

impl MeasurementBasis {
    /// 2D unit vector (cos θ, sin θ) of the basis.
    pub fn unit_vector(&self) -> [f64; 2] {
        [self.angle.cos(), self.angle.sin()]
    }
}

/// Scalar product of two basis unit vectors.
pub fn dot(a: &MeasurementBasis, b: &MeasurementBasis) -> f64 {
    let u = a.unit_vector();
    let v = b.unit_vector();
    u[0] * v[0] + u[1] * v[1]
}

/// Which receiver is drawing a basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Alice,
    Bob,
}

/// The two receivers' basis triples.
#[derive(Debug, Clone)]
pub struct BasisSet {
    pub alice: [MeasurementBasis; 3],
    pub bob: [MeasurementBasis; 3],
}

impl BasisSet {
    /// The standard Ekert configuration: A1=0, A2=π/4, A3=π/2 and
    /// B1=π/4, B2=π/2, B3=3π/4.
    pub fn standard() -> Self {
        BasisSet {
            alice: [
                MeasurementBasis { label: BasisLabel::A1, angle: 0.0 },
                MeasurementBasis { label: BasisLabel::A2, angle: FRAC_PI_4 },
                MeasurementBasis { label: BasisLabel::A3, angle: FRAC_PI_2 },
            ],
            bob: [
                MeasurementBasis { label: BasisLabel::B1, angle: FRAC_PI_4 },
                MeasurementBasis { label: BasisLabel::B2, angle: FRAC_PI_2 },
                MeasurementBasis { label: BasisLabel::B3, angle: 3.0 * FRAC_PI_4 },
            ],
        }
    }

    /// True for the two coinciding pairings (A2, B1) and (A3, B2).
    pub fn is_same_basis_pair(alice: BasisLabel, bob: BasisLabel) -> bool {
        matches!(
            (alice, bob),
            (BasisLabel::A2, BasisLabel::B1) | (BasisLabel::A3, BasisLabel::B2)
        )
    }
}

/// Draw one of the three bases of `side` uniformly, advancing the stream.
pub fn sample_uniform_basis(
    stream: &mut RandomStream,
    side: Side,
    set: &BasisSet,
) -> MeasurementBasis {
    let triple = match side {
        Side::Alice => &set.alice,
        Side::Bob => &set.bob,
    };
    triple[stream.pick(3)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn unit_vectors_match_configured_angles() {
        let set = BasisSet::standard();
        let a1 = set.alice[0].unit_vector();
        assert!((a1[0] - 1.0).abs() < 1e-12 && a1[1].abs() < 1e-12);
        let a3 = set.alice[2].unit_vector();
        assert!(a3[0].abs() < 1e-12 && (a3[1] - 1.0).abs() < 1e-12);
        let b3 = set.bob[2].unit_vector();
        assert!((b3[0] + FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((b3[1] - FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn all_six_unit_vectors_are_normalized() {
        let set = BasisSet::standard();
        for b in set.alice.iter().chain(set.bob.iter()) {
            let u = b.unit_vector();
            let norm = (u[0] * u[0] + u[1] * u[1]).sqrt();
            assert!((norm - 1.0).abs() < 1e-12, "basis {:?}", b.label);
            assert!(b.angle >= 0.0 && b.angle < std::f64::consts::PI);
        }
    }

    #[test]
    fn same_basis_pairs_are_exactly_two() {
        use BasisLabel::*;
        let mut same = vec![];
        for a in [A1, A2, A3] {
            for b in [B1, B2, B3] {
                if BasisSet::is_same_basis_pair(a, b) {
                    same.push((a, b));
                }
            }
        }
        assert_eq!(same, vec![(A2, B1), (A3, B2)]);
    }

    #[test]
    fn uniform_basis_counts_within_three_sigma() {
        let set = BasisSet::standard();
        let mut stream = RandomStream::new(7);
        let n = 90_000usize;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            let b = sample_uniform_basis(&mut stream, Side::Alice, &set);
            let i = match b.label {
                BasisLabel::A1 => 0,
                BasisLabel::A2 => 1,
                BasisLabel::A3 => 2,
                other => panic!("alice draw returned {:?}", other),
            };
            counts[i] += 1;
        }
        let expected = n as f64 / 3.0;
        let sigma = (n as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for c in counts {
            assert!((c as f64 - expected).abs() <= 3.0 * sigma, "counts {:?}", counts);
        }
    }

    #[test]
    fn uniform_basis_chi_square_at_one_percent() {
        let set = BasisSet::standard();
        let mut stream = RandomStream::new(11);
        let n = 100_000usize;
        let mut counts = [0f64; 3];
        for _ in 0..n {
            let b = sample_uniform_basis(&mut stream, Side::Bob, &set);
            let i = match b.label {
                BasisLabel::B1 => 0,
                BasisLabel::B2 => 1,
                BasisLabel::B3 => 2,
                other => panic!("bob draw returned {:?}", other),
            };
            counts[i] += 1.0;
        }
        let expected = n as f64 / 3.0;
        let chi2: f64 = counts.iter().map(|c| (c - expected).powi(2) / expected).sum();
        // dof 2, critical value at significance 0.01
        assert!(chi2 < 9.210, "chi2 = {chi2}");
    }

    #[test]
    fn basis_sequence_replays_under_same_seed() {
        let set = BasisSet::standard();
        let mut s1 = RandomStream::new(99);
        let mut s2 = RandomStream::new(99);
        for _ in 0..1000 {
            let a = sample_uniform_basis(&mut s1, Side::Alice, &set);
            let b = sample_uniform_basis(&mut s2, Side::Alice, &set);
            assert_eq!(a.label, b.label);
        }
    }
}
