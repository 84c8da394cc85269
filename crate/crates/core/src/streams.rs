//! Counter-based random substreams.
//!
//! Every random draw in the crate is addressed by a [`StreamKey`]: a 64-bit
//! key obtained by hashing a master seed together with a path of indices
//! (replicate, copy, role, ...). Two keys built from the same path are equal,
//! so a replicate produces the same numbers whichever worker runs it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a substream is used for. Distinct roles never share numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Walk = 1,
    Scenery = 2,
    Fbm = 3,
    Noise = 4,
    Replicate = 5,
    Copy = 6,
    Oracle = 7,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey(u64);

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl StreamKey {
    pub fn new(seed: u64) -> Self {
        StreamKey(splitmix64(seed))
    }

    pub fn raw(self) -> u64 {
        self.0
    }

    /// Derive the key for child `index` of this key.
    pub fn child(self, index: u64) -> Self {
        StreamKey(splitmix64(self.0 ^ splitmix64(index.wrapping_mul(GOLDEN).wrapping_add(1))))
    }

    pub fn role(self, role: Role) -> Self {
        self.child(role as u64 | (0xA5 << 56))
    }

    /// Replicate `r` under this key.
    pub fn replicate(self, r: u64) -> Self {
        self.role(Role::Replicate).child(r)
    }

    /// Independent copy `i` (for sums of copies) under this key.
    pub fn copy(self, i: u64) -> Self {
        self.role(Role::Copy).child(i)
    }

    fn seed_bytes(self) -> [u8; 32] {
        let mut out = [0u8; 32];
        let mut z = self.0;
        for chunk in out.chunks_exact_mut(8) {
            z = splitmix64(z);
            chunk.copy_from_slice(&z.to_le_bytes());
        }
        out
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::from_seed(self.seed_bytes())
    }

    /// Substream addressed by a lattice site; re-creating it replays the same values.
    pub fn site_rng(self, site: i64) -> ChaCha8Rng {
        let mut rng = self.rng();
        rng.set_stream(site as u64);
        rng
    }
}
