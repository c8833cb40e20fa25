//! Deterministic, platform-independent randomness.
//!
//! A single 64-bit seed expands into independent per-module streams. The
//! derivation is fixed: the seed and a stream label are mixed with FNV-1a,
//! then four rounds of splitmix64 fill a 32-byte ChaCha12 key. ChaCha is
//! counter-based, so draws are reproducible across platforms and thread
//! counts.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::rational::{Int, Rat};

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Stream keyed by `(seed, label)`.
pub fn stream(seed: u64, label: &str) -> ChaCha12Rng {
    let mut state = seed ^ fnv1a(label.as_bytes());
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

/// Uniform big integer in `[0, bound)` by rejection on fixed-width draws.
pub fn uniform_below(rng: &mut impl RngCore, bound: &Int) -> Int {
    let b = bound.to_biguint().expect("bound must be positive");
    assert!(!b.is_zero());
    let bits = b.bits();
    loop {
        let mut bytes = vec![0u8; bits.div_ceil(8) as usize];
        rng.fill_bytes(&mut bytes);
        let mut x = BigUint::from_bytes_le(&bytes);
        let excess = 8 * bytes.len() as u64 - bits;
        x >>= excess as usize;
        if x < b {
            return Int::from(x);
        }
    }
}

/// Bernoulli(theta) with theta = t^(1/m) for rational `t` in [0, 1], exact.
///
/// Draws a uniform U in [0,1) lazily as a binary expansion and reports
/// whether U^m < t: the dyadic interval [x, x+1) / 2^bits around U is
/// refined until the comparison is decided. P(U < t^(1/m)) = t^(1/m).
pub fn bernoulli_root(rng: &mut impl RngCore, t: &Rat, m: u32) -> bool {
    assert!(m >= 1);
    assert!(*t >= Rat::zero() && *t <= Rat::one());
    if t.is_zero() {
        return false;
    }
    if t.is_one() {
        return true;
    }
    let mut x = Int::zero();
    let mut bits: u32 = 0;
    loop {
        // Extend the expansion by 64 bits.
        let w = rng.next_u64();
        x = (x << 64) | Int::from(w);
        bits += 64;
        let den = Int::one() << bits;
        let den_m = den.pow(m);
        // hi = (x+1)^m / 2^(bits m), lo = x^m / 2^(bits m)
        let hi = (&x + 1u32).pow(m);
        let lo = x.pow(m);
        let t_scaled_num = t.numer() * &den_m;
        // accept if hi <= t, reject if lo >= t
        if &hi * t.denom() <= t_scaled_num {
            return true;
        }
        if &lo * t.denom() >= t_scaled_num {
            return false;
        }
        if bits >= 512 {
            // Interval of width 2^-512 straddles the threshold; the bias of
            // either answer is below any physical significance. Accept the
            // lower bound decision.
            return false;
        }
    }
}

/// Uniform element of `0..n` as usize.
pub fn uniform_usize(rng: &mut impl RngCore, n: usize) -> usize {
    rng.gen_range(0..n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, ratio};

    #[test]
    fn streams_are_reproducible_and_labelled() {
        let mut a = stream(42, "alpha");
        let mut b = stream(42, "alpha");
        let mut c = stream(42, "beta");
        let xs: Vec<u64> = (0..4).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..4).map(|_| b.next_u64()).collect();
        let zs: Vec<u64> = (0..4).map(|_| c.next_u64()).collect();
        assert_eq!(xs, ys);
        assert_ne!(xs, zs);
    }

    #[test]
    fn uniform_below_is_in_range() {
        let mut rng = stream(7, "uniform");
        let bound = Int::from(1000u32);
        for _ in 0..200 {
            let x = uniform_below(&mut rng, &bound);
            assert!(x >= Int::from(0) && x < bound);
        }
    }

    #[test]
    fn bernoulli_root_frequency_tracks_theta() {
        // theta = (1/4)^(1/2) = 1/2
        let mut rng = stream(11, "bern");
        let t = ratio(1, 4);
        let hits = (0..4000).filter(|_| bernoulli_root(&mut rng, &t, 2)).count();
        let freq = hits as f64 / 4000.0;
        assert!((freq - 0.5).abs() < 0.05, "freq {freq}");
    }

    #[test]
    fn bernoulli_root_degenerate_cases() {
        let mut rng = stream(1, "deg");
        assert!(!bernoulli_root(&mut rng, &rat(0), 3));
        assert!(bernoulli_root(&mut rng, &rat(1), 3));
    }
}
