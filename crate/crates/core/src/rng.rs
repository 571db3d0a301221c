//! Counter-based random substreams.
//!
//! Every random draw in the samplers and the simulator is taken from a
//! ChaCha8 stream addressed by `(key, stream, site)`. The key is derived from
//! the user seed plus a domain path (chain index, replicate index, ...), the
//! stream is the sweep iteration and the site selects a disjoint 2^32-word
//! window inside that stream. Draws therefore never depend on which worker
//! thread performs an update or in which order updates are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Domain tags keep keys for unrelated purposes apart.
pub mod domain {
    pub const CHAIN: u64 = 0x4348_4149_4e00_0001;
    pub const REPLICATE: u64 = 0x5245_504c_0000_0002;
    pub const SIMULATION: u64 = 0x5349_4d55_0000_0003;
    pub const FIT: u64 = 0x4649_5400_0000_0004;
    pub const MISC: u64 = 0x4d49_5343_0000_0005;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey {
    key: [u8; 32],
}

impl StreamKey {
    pub fn new(seed: u64, path: &[u64]) -> Self {
        let mut h = splitmix64(seed);
        for &p in path {
            h = splitmix64(h ^ splitmix64(p));
        }
        let mut key = [0u8; 32];
        let mut state = h;
        for chunk in key.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        StreamKey { key }
    }

    /// Derive a 64-bit seed for a child computation.
    pub fn child_seed(&self, path: &[u64]) -> u64 {
        let mut h = u64::from_le_bytes(self.key[..8].try_into().unwrap());
        h ^= u64::from_le_bytes(self.key[8..16].try_into().unwrap()).rotate_left(17);
        for &p in path {
            h = splitmix64(h ^ splitmix64(p));
        }
        h
    }

    pub fn rng(&self, stream: u64, site: Site) -> Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(stream);
        rng.set_word_pos(u128::from(site.offset()) << 32);
        rng
    }

    /// Sequential stream for code that is not split into sites.
    pub fn sequential(&self, stream: u64) -> Rng {
        self.rng(stream, Site::Globals)
    }
}

/// Location of an update inside one sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Site {
    Globals,
    Gamma(usize),
    EtaAlpha(usize),
    Unit(usize),
}

impl Site {
    fn offset(self) -> u64 {
        match self {
            Site::Globals => 0,
            Site::Gamma(k) => 1 + 3 * k as u64,
            Site::EtaAlpha(k) => 2 + 3 * k as u64,
            Site::Unit(k) => 3 + 3 * k as u64,
        }
    }
}
