//! Counter-based random streams.
//!
//! Values come from the Philox4x32-10 block function keyed by the seed, with
//! the 128-bit counter split into a 64-bit block index and a 64-bit stream
//! id. Any `(seed, stream_id)` pair is therefore an independent, replayable
//! sequence, and child streams for parallel work are obtained by hashing a
//! worker or chunk index into a fresh stream id.

use std::f64::consts::TAU;

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

#[inline]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = u64::from(a) * u64::from(b);
    ((p >> 32) as u32, p as u32)
}

/// Philox4x32 with 10 rounds.
pub fn philox4x32_10(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut ctr = counter;
    let mut key = key;
    for round in 0..10 {
        if round > 0 {
            key[0] = key[0].wrapping_add(PHILOX_W0);
            key[1] = key[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, ctr[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, ctr[2]);
        ctr = [hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0];
    }
    ctr
}

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A replayable random stream identified by `(seed, stream_id)`.
///
/// Not meant to be shared across threads; derive one child per unit of
/// parallel work with [`RngStream::split`].
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    block: u64,
    buf: [u64; 2],
    buf_pos: usize,
    spare_normal: Option<f64>,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self {
            seed,
            stream_id,
            block: 0,
            buf: [0; 2],
            buf_pos: 2,
            spare_normal: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Child stream for work item `index`. Depends only on this stream's
    /// identity, not on how many values it has produced.
    pub fn split(&self, index: u64) -> RngStream {
        let child = mix64(
            self.stream_id.wrapping_mul(0x9E37_79B9_7F4A_7C15)
                ^ mix64(index.wrapping_add(0xD1B5_4A32_D192_ED03)),
        );
        RngStream::new(self.seed, child)
    }

    fn refill(&mut self) {
        let ctr = [
            self.block as u32,
            (self.block >> 32) as u32,
            self.stream_id as u32,
            (self.stream_id >> 32) as u32,
        ];
        let key = [self.seed as u32, (self.seed >> 32) as u32];
        let out = philox4x32_10(ctr, key);
        self.buf = [
            u64::from(out[0]) | (u64::from(out[1]) << 32),
            u64::from(out[2]) | (u64::from(out[3]) << 32),
        ];
        self.buf_pos = 0;
        self.block = self.block.wrapping_add(1);
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        if self.buf_pos >= 2 {
            self.refill();
        }
        let v = self.buf[self.buf_pos];
        self.buf_pos += 1;
        v
    }

    /// Uniform on the open interval (0, 1).
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        ((self.next_u64() >> 11) as f64 + 0.5) * SCALE
    }

    /// Uniform integer in `0..bound` (Lemire's multiply-shift with rejection).
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let m = u128::from(self.next_u64()) * u128::from(bound);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    /// Standard normal variate by the Box–Muller transform.
    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.next_f64();
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (TAU * u2).sin_cos();
        self.spare_normal = Some(r * s);
        r * c
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        for x in out {
            *x = self.standard_normal();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Known-answer vectors from the Random123 distribution.
    #[test]
    fn philox_known_answers() {
        assert_eq!(
            philox4x32_10([0; 4], [0; 2]),
            [0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8]
        );
        assert_eq!(
            philox4x32_10([u32::MAX; 4], [u32::MAX; 2]),
            [0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd]
        );
        assert_eq!(
            philox4x32_10(
                [0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344],
                [0xa4093822, 0x299f31d0]
            ),
            [0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1]
        );
    }

    #[test]
    fn replayable() {
        let mut a = RngStream::new(42, 7);
        let mut b = RngStream::new(42, 7);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        assert_eq!(a.standard_normal().to_bits(), b.standard_normal().to_bits());
    }

    #[test]
    fn streams_differ() {
        let mut a = RngStream::new(42, 7);
        let mut b = RngStream::new(42, 8);
        let mut c = RngStream::new(43, 7);
        let x = a.next_u64();
        assert_ne!(x, b.next_u64());
        assert_ne!(x, c.next_u64());
    }

    #[test]
    fn split_ignores_consumed_state() {
        let a = RngStream::new(1, 2);
        let mut b = a.clone();
        b.next_u64();
        assert_eq!(a.split(5).stream_id(), b.split(5).stream_id());
        assert_ne!(a.split(5).stream_id(), a.split(6).stream_id());
        assert_ne!(a.split(5).stream_id(), a.stream_id());
    }

    #[test]
    fn uniform_in_open_interval() {
        let mut r = RngStream::new(0, 0);
        for _ in 0..10_000 {
            let u = r.next_f64();
            assert!(u > 0.0 && u < 1.0);
        }
        for _ in 0..1000 {
            assert!(r.next_below(3) < 3);
        }
    }
}
