//! Seeded random streams with counter-derived substreams.
//!
//! A [`RandomStream`] is identified by `(root_seed, stream_path)`. Substreams
//! are derived from that identity alone — never from how many draws the parent
//! has produced — so work items can be handed their own stream by index and
//! the results do not depend on scheduling or worker count.

use rand_chacha::ChaCha12Rng;
use rand_core::{Rng, SeedableRng};

const ROOT_TAG: u64 = 0x41444c_4b49545f; // "ADLKIT_" domain tag
const PATH_TAG: u64 = 0x737472_65616d5f;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mix(x: u64) -> u64 {
    let mut s = x;
    splitmix64(&mut s)
}

/// Deterministic random stream (ChaCha12 core) addressed by seed and path.
#[derive(Debug, Clone)]
pub struct RandomStream {
    root_seed: u64,
    path: Vec<u64>,
    rng: ChaCha12Rng,
}

impl RandomStream {
    /// Root stream for a run.
    pub fn from_seed(root_seed: u64) -> Self {
        Self::derive(root_seed, Vec::new())
    }

    /// Child stream at `index`. Depends only on `(root_seed, path, index)`,
    /// not on the parent's draw position.
    pub fn substream(&self, index: u64) -> Self {
        let mut path = self.path.clone();
        path.push(index);
        Self::derive(self.root_seed, path)
    }

    fn derive(root_seed: u64, path: Vec<u64>) -> Self {
        let mut acc = mix(root_seed ^ ROOT_TAG);
        for &elem in &path {
            acc = mix(acc ^ mix(elem ^ PATH_TAG));
        }
        let mut expand = acc;
        let mut seed = [0u8; 32];
        for chunk in seed.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut expand).to_le_bytes());
        }
        RandomStream {
            root_seed,
            path,
            rng: ChaCha12Rng::from_seed(seed),
        }
    }

    pub fn root_seed(&self) -> u64 {
        self.root_seed
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform draw from `[0, 1)` with 53 random bits.
    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw from `(0, 1]` (safe as a logarithm argument).
    pub fn open_unit_f64(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw (Box-Muller; two uniforms per call).
    pub fn gaussian(&mut self) -> f64 {
        let u = self.open_unit_f64();
        let v = self.unit_f64();
        (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
    }

    /// Uniform draw from `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index range must be non-empty");
        // Desk-scale n: the modulo bias at n << 2^64 is far below any
        // tolerance used in this crate.
        (self.next_u64() % n as u64) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_identity_same_sequence() {
        let mut a = RandomStream::from_seed(7).substream(3).substream(1);
        let mut b = RandomStream::from_seed(7).substream(3).substream(1);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn substream_ignores_parent_draw_position() {
        let parent_fresh = RandomStream::from_seed(11);
        let mut parent_used = RandomStream::from_seed(11);
        for _ in 0..17 {
            parent_used.next_u64();
        }
        let mut a = parent_fresh.substream(5);
        let mut b = parent_used.substream(5);
        for _ in 0..32 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn distinct_indices_give_distinct_streams() {
        let root = RandomStream::from_seed(0);
        let mut a = root.substream(0);
        let mut b = root.substream(1);
        let same = (0..16).filter(|_| a.next_u64() == b.next_u64()).count();
        assert!(same < 16);
    }

    #[test]
    fn unit_range() {
        let mut r = RandomStream::from_seed(42);
        for _ in 0..10_000 {
            let u = r.unit_f64();
            assert!((0.0..1.0).contains(&u));
            let o = r.open_unit_f64();
            assert!(o > 0.0 && o <= 1.0);
        }
    }

    #[test]
    fn gaussian_moments_sane() {
        let mut r = RandomStream::from_seed(1234);
        let n = 200_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let g = r.gaussian();
            s += g;
            s2 += g * g;
        }
        let mean = s / n as f64;
        let var = s2 / n as f64 - mean * mean;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }
}
