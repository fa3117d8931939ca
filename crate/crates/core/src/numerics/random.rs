//! Counter-based random streams and Poisson disk sampling.
//!
//! A [`RandomStream`] is a SplitMix64 sequence whose starting point is
//! derived by hashing `(master_seed, stream_index)`. Streams can be split
//! into keyed substreams, so any draw is a pure function of its key path and
//! position, never of the order in which replications or threads run.

use rand::RngCore;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomStream {
    master_seed: u64,
    stream_index: u64,
    key: u64,
    counter: u64,
}

impl RandomStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let key = mix64(mix64(master_seed ^ 0x6A09_E667_F3BC_C908).wrapping_add(mix64(
            stream_index.wrapping_add(GOLDEN_GAMMA),
        )));
        Self {
            master_seed,
            stream_index,
            key,
            counter: 0,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Independent child stream keyed by `index`. Does not advance `self`.
    pub fn substream(&self, index: u64) -> Self {
        Self {
            master_seed: self.master_seed,
            stream_index: self.stream_index,
            key: mix64(self.key ^ mix64(index.wrapping_mul(GOLDEN_GAMMA).wrapping_add(1))),
            counter: 0,
        }
    }

    /// Uniform draw on the open interval `(0, 1)`.
    #[inline]
    pub fn open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Poisson count with the given mean (zero mean yields zero).
    pub fn poisson(&mut self, mean: f64) -> Result<u64> {
        if !(mean >= 0.0) || !mean.is_finite() {
            return Err(Error::domain(format!("invalid Poisson mean {mean}")));
        }
        if mean == 0.0 {
            return Ok(0);
        }
        let dist = Poisson::new(mean).map_err(|e| Error::domain(e.to_string()))?;
        Ok(dist.sample(self) as u64)
    }
}

impl RngCore for RandomStream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN_GAMMA)))
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Homogeneous Poisson sample on the disk of `radius` centred at the origin.
pub fn sample_poisson_disk(
    intensity: f64,
    radius: f64,
    stream: &mut RandomStream,
) -> Result<Vec<Point>> {
    if !(intensity >= 0.0) || !intensity.is_finite() {
        return Err(Error::domain(format!("invalid intensity {intensity}")));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::domain(format!("invalid radius {radius}")));
    }
    let count = stream.poisson(intensity * std::f64::consts::PI * radius * radius)?;
    Ok((0..count)
        .map(|_| {
            let r = radius * stream.open01().sqrt();
            let theta = std::f64::consts::TAU * stream.open01();
            Point::new(r * theta.cos(), r * theta.sin())
        })
        .collect())
}
