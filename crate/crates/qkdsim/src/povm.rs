//! Detector response model: probability of registering k photons given n
//! incident photons, for a detector with efficiency `eta_d`, noise count
//! probability `v_d`, and photon-number resolution `rho_d`.

use crate::params::DetectorParams;

/// P(0 | n): no registration from n incident photons.
pub fn p_zero(n: u32, d: &DetectorParams) -> f64 {
    (1.0 - d.v_d) * (1.0 - d.eta_d).powi(n as i32)
}

/// P(1 | n): exactly one registered photon from n incident photons.
///
/// Two disjoint routes: a noise count with no resolved signal photon, or
/// no noise count and exactly one resolved signal photon (the k-th
/// incident photon detected after k misses, the rest unresolved).
pub fn p_one(n: u32, d: &DetectorParams) -> f64 {
    let noise = d.v_d * (1.0 - d.rho_d * d.eta_d).powi(n as i32);
    let mut signal = 0.0;
    for k in 0..n {
        signal += d.eta_d
            * (1.0 - d.eta_d).powi(k as i32)
            * (1.0 - d.rho_d * d.eta_d).powi((n - 1 - k) as i32);
    }
    noise + (1.0 - d.v_d) * signal
}
