//! Seeded random streams and sphere sampling.
//!
//! Everything downstream of a seed must be reproducible across platforms, so
//! the generator is pinned to ChaCha12 rather than whatever `StdRng` happens
//! to be. Independent substreams (one per repetition role: adversary,
//! learner, ...) come from ChaCha's 64-bit stream parameter, so parallel
//! repetitions never share generator state.

use alloc::vec::Vec;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg;

/// Redraw threshold for degenerate projections in sphere sampling.
const DEGENERATE_NORM: f64 = 1e-9;

/// A seeded, splittable generator with a platform-independent stream.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha12Rng,
}

impl SeededRng {
    /// Generator for `seed` on stream 0.
    pub fn new(seed: u64) -> Self {
        SeededRng {
            seed,
            inner: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    /// A fresh, independent generator for the same seed on the given stream.
    ///
    /// Substreams are independent of each other and of how much the parent
    /// has been consumed.
    pub fn substream(&self, stream: u64) -> Self {
        let mut inner = ChaCha12Rng::seed_from_u64(self.seed);
        inner.set_stream(stream);
        SeededRng {
            seed: self.seed,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// One standard normal draw.
    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// A vector of independent standard normal draws.
    pub fn standard_normal_vec(&mut self, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.standard_normal()).collect()
    }

    /// Uniform draw from `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random()
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
}

/// Uniform sample from the unit sphere in `R^dim`.
pub fn sample_unit_sphere(dim: usize, rng: &mut SeededRng) -> Result<Vec<f64>> {
    if dim == 0 {
        return Err(Error::invalid("sphere dimension must be at least 1"));
    }
    for _ in 0..1000 {
        let g = rng.standard_normal_vec(dim);
        let n = linalg::norm(&g);
        if n >= DEGENERATE_NORM {
            return Ok(linalg::scaled(&g, 1.0 / n));
        }
    }
    Err(Error::invalid("sphere sampling kept drawing degenerate vectors"))
}

/// Uniform sample from the unit sphere of the subspace orthogonal to `v`.
///
/// Construction: draw a standard Gaussian vector, remove its component along
/// `v`, and normalize. The Gaussian law is rotation invariant, so the result
/// is exactly uniform on the sphere of `v^⊥`; the redraw only fires on the
/// measure-zero event that the projection is numerically degenerate.
pub fn sample_sphere_orthogonal(v: &[f64], rng: &mut SeededRng) -> Result<Vec<f64>> {
    let dim = v.len();
    if dim < 2 {
        return Err(Error::invalid(
            "orthogonal-sphere sampling needs an ambient dimension of at least 2",
        ));
    }
    let v_norm_sq = linalg::norm_sq(v);
    if v_norm_sq == 0.0 {
        return Err(Error::invalid("cannot sample orthogonally to the zero vector"));
    }
    for _ in 0..1000 {
        let g = rng.standard_normal_vec(dim);
        let mut w = g.clone();
        let coeff = linalg::dot(&g, v) / v_norm_sq;
        linalg::axpy(-coeff, v, &mut w);
        let n = linalg::norm(&w);
        if n >= DEGENERATE_NORM {
            return Ok(linalg::scaled(&w, 1.0 / n));
        }
    }
    Err(Error::invalid("orthogonal sampling kept drawing degenerate vectors"))
}
