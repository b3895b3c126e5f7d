use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Reproducible random stream keyed by `(seed, stream_id)`.
///
/// Backed by ChaCha20, whose keystream position is a counter: the key comes
/// from `seed`, the stream selector from `stream_id`. Streams with different
/// ids never overlap, so work split across threads draws exactly what a serial
/// run would.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha20Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Independent child stream for sub-task `label`; depends only on
    /// `(seed, stream_id, label)`, not on how much of `self` was consumed.
    pub fn derive(&self, label: u64) -> RngStream {
        RngStream::new(
            self.seed,
            mix(self.stream_id ^ mix(label.wrapping_add(0x9e37_79b9_7f4a_7c15))),
        )
    }
}

/// splitmix64 finalizer.
pub(crate) fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}
