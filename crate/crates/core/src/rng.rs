//! Counter-based random numbers.
//!
//! Every draw is a pure function of `(seed, domain, counter)`, so network
//! initialization, Brownian increments and expansion coefficients can be
//! reproduced in any order and from any thread. The block function is
//! Philox4x32 with 10 rounds (Salmon et al., SC'11).

use std::f64::consts::PI;

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

#[inline]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = u64::from(a) * u64::from(b);
    ((p >> 32) as u32, p as u32)
}

/// Philox4x32-10 block function.
pub fn philox4x32(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut ctr = counter;
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(PHILOX_W0);
            k[1] = k[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, ctr[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, ctr[2]);
        ctr = [hi1 ^ ctr[1] ^ k[0], lo1, hi0 ^ ctr[3] ^ k[1], lo0];
    }
    ctr
}

/// SplitMix64 finalizer; used to derive independent seeds from a parent seed.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed for a named role (drift network, diffusion network, ...).
pub fn derive_seed(seed: u64, role: u64) -> u64 {
    splitmix64(seed ^ splitmix64(role))
}

/// Separates the uses of one seed so that e.g. initialization and noise never
/// share counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u32)]
pub enum Domain {
    Init = 1,
    Brownian = 2,
    KarhunenLoeve = 3,
    Sampling = 4,
}

/// Keyed counter generator. Cheap to copy; holds no mutable state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyedRng {
    key: [u32; 2],
}

impl KeyedRng {
    pub fn new(seed: u64, domain: Domain) -> Self {
        let mixed = splitmix64(seed ^ (u64::from(domain as u32) << 56));
        Self {
            key: [mixed as u32, (mixed >> 32) as u32],
        }
    }

    #[inline]
    pub fn block(&self, a: u64, b: u32, c: u32) -> [u32; 4] {
        philox4x32([a as u32, (a >> 32) as u32, b, c], self.key)
    }

    /// Two uniforms in (0, 1] with 53 bits each.
    #[inline]
    pub fn uniform_pair(&self, a: u64, b: u32, c: u32) -> (f64, f64) {
        let x = self.block(a, b, c);
        (to_unit(x[0], x[1]), to_unit(x[2], x[3]))
    }

    #[inline]
    pub fn uniform(&self, a: u64, b: u32, c: u32) -> f64 {
        self.uniform_pair(a, b, c).0
    }

    /// Standard normal via Box-Muller on the counter's block.
    #[inline]
    pub fn normal(&self, a: u64, b: u32, c: u32) -> f64 {
        let (u1, u2) = self.uniform_pair(a, b, c);
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    }
}

#[inline]
fn to_unit(lo: u32, hi: u32) -> f64 {
    let bits = ((u64::from(hi) << 32) | u64::from(lo)) >> 11;
    // (bits + 1) / 2^53 lies in (0, 1], which keeps ln() finite.
    (bits as f64 + 1.0) * (1.0 / 9_007_199_254_740_992.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Known-answer vectors published with Random123.
    #[test]
    fn philox_known_answers() {
        assert_eq!(
            philox4x32([0, 0, 0, 0], [0, 0]),
            [0x6627_e8d5, 0xe169_c58d, 0xbc57_ac4c, 0x9b00_dbd8]
        );
        assert_eq!(
            philox4x32([u32::MAX; 4], [u32::MAX; 2]),
            [0x408f_276d, 0x41c8_3b0e, 0xa20b_c7c6, 0x6d54_51fd]
        );
        assert_eq!(
            philox4x32(
                [0x243f_6a88, 0x85a3_08d3, 0x1319_8a2e, 0x0370_7344],
                [0xa409_3822, 0x299f_31d0]
            ),
            [0xd16c_fe09, 0x94fd_cceb, 0x5001_e420, 0x2412_6ea1]
        );
    }

    #[test]
    fn domains_do_not_collide() {
        let a = KeyedRng::new(7, Domain::Init);
        let b = KeyedRng::new(7, Domain::Brownian);
        assert_ne!(a.block(0, 0, 0), b.block(0, 0, 0));
    }

    #[test]
    fn normal_moments() {
        let rng = KeyedRng::new(3, Domain::Sampling);
        let n = 200_000u64;
        let (mut s1, mut s2) = (0.0, 0.0);
        for i in 0..n {
            let x = rng.normal(i, 0, 0);
            s1 += x;
            s2 += x * x;
        }
        let mean = s1 / n as f64;
        let var = s2 / n as f64 - mean * mean;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt());
        assert!((var - 1.0).abs() < 0.01);
    }

    #[test]
    fn uniform_is_in_open_closed_unit_interval() {
        let rng = KeyedRng::new(0, Domain::Sampling);
        for i in 0..10_000 {
            let u = rng.uniform(i, 1, 2);
            assert!(u > 0.0 && u <= 1.0);
        }
    }
}
