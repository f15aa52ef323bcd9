//! Counter-based random streams.
//!
//! A stream is keyed by `(seed, stream_id)` and backed by ChaCha8, whose
//! output is a pure function of key and block counter. Two streams with the
//! same key yield the same variates no matter which thread drives them or in
//! what order they are created.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::mat::Mat;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes a path of indices (replicate, round, draw, ...) into a stream id.
pub fn stream_id(parts: &[u64]) -> u64 {
    parts.iter().fold(0x243F_6A88_85A3_08D3, |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        RngStream { seed, stream_id, inner }
    }

    /// Stream addressed by a path of indices under `seed`.
    pub fn at(seed: u64, path: &[u64]) -> Self {
        RngStream::new(seed, stream_id(path))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of 32-bit words consumed so far.
    pub fn counter(&self) -> u64 {
        self.inner.get_word_pos() as u64
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub fn standard_normals(&mut self, k: usize) -> Vec<f64> {
        (0..k).map(|_| self.standard_normal()).collect()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// `mean + chol_cov · z` with `z` standard normal.
pub fn normal_draw(rng: &mut RngStream, mean: &[f64], chol_cov: &Mat) -> Vec<f64> {
    let k = mean.len();
    debug_assert_eq!(chol_cov.rows(), k);
    let z = rng.standard_normals(chol_cov.cols());
    let mut out = mean.to_vec();
    for i in 0..k {
        let row = chol_cov.row(i);
        out[i] += row.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_key_same_sequence() {
        let mut a = RngStream::new(7, 11);
        let mut b = RngStream::new(7, 11);
        for _ in 0..100 {
            assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
        }
        assert_eq!(a.counter(), b.counter());
    }

    #[test]
    fn streams_differ() {
        let mut a = RngStream::new(7, 11);
        let mut b = RngStream::new(7, 12);
        let mut c = RngStream::new(8, 11);
        let x = a.next_u64();
        assert_ne!(x, b.next_u64());
        assert_ne!(x, c.next_u64());
    }

    #[test]
    fn stream_ids_are_path_sensitive() {
        assert_ne!(stream_id(&[1, 2]), stream_id(&[2, 1]));
        assert_ne!(stream_id(&[0]), stream_id(&[0, 0]));
        assert_eq!(stream_id(&[3, 4, 5]), stream_id(&[3, 4, 5]));
    }

    #[test]
    fn counter_advances() {
        let mut a = RngStream::new(1, 1);
        assert_eq!(a.counter(), 0);
        a.next_u64();
        assert_eq!(a.counter(), 2);
    }

    #[test]
    fn degenerate_covariance_returns_mean() {
        let mut rng = RngStream::new(3, 3);
        let mean = [1.5, -2.0];
        assert_eq!(normal_draw(&mut rng, &mean, &Mat::zeros(2, 2)), mean.to_vec());
    }

    #[test]
    fn normal_draw_deterministic() {
        let l = Mat::from_rows(&[vec![1.0, 0.0], vec![0.5, 2.0]]);
        let a = normal_draw(&mut RngStream::new(9, 1), &[0.0, 0.0], &l);
        let b = normal_draw(&mut RngStream::new(9, 1), &[0.0, 0.0], &l);
        assert_eq!(a, b);
    }

    #[test]
    fn sample_mean_within_clt_bound() {
        let n = 100_000;
        let mut rng = RngStream::new(2024, 0);
        let l = Mat::identity(2);
        let mut sum = [0.0; 2];
        for _ in 0..n {
            let x = normal_draw(&mut rng, &[0.0, 0.0], &l);
            sum[0] += x[0];
            sum[1] += x[1];
        }
        let bound = 4.0 / (n as f64).sqrt();
        for s in sum {
            assert!((s / n as f64).abs() < bound);
        }
    }
}
