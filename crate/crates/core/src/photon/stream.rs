use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    Coherent,
    Thermal,
    Detected,
}

impl SourceKind {
    pub fn name(self) -> &'static str {
        match self {
            SourceKind::Coherent => "coherent",
            SourceKind::Thermal => "thermal",
            SourceKind::Detected => "detected",
        }
    }
}

/// Strictly increasing arrival times in `[0, duration]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonStream {
    times: Vec<f64>,
    duration: f64,
    pub source: SourceKind,
    pub seed: u64,
    /// Non-paralyzable dead time the stream has passed through, s.
    pub dead_time: f64,
}

impl PhotonStream {
    pub fn new(times: Vec<f64>, duration: f64, source: SourceKind, seed: u64) -> Result<Self> {
        if !(duration >= 0.0 && duration.is_finite()) {
            return Err(Error::config("stream duration must be >= 0"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::config("arrival times must be strictly increasing"));
        }
        if times.iter().any(|t| !(*t >= 0.0 && *t <= duration)) {
            return Err(Error::config("arrival times must lie in [0, duration]"));
        }
        Ok(PhotonStream {
            times,
            duration,
            source,
            seed,
            dead_time: 0.0,
        })
    }

    pub(crate) fn from_sorted(times: Vec<f64>, duration: f64, source: SourceKind, seed: u64, dead_time: f64) -> Self {
        debug_assert!(times.windows(2).all(|w| w[1] > w[0]));
        PhotonStream {
            times,
            duration,
            source,
            seed,
            dead_time,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Mean count rate, counts/s (0 for a zero-length stream).
    pub fn rate(&self) -> f64 {
        if self.duration > 0.0 {
            self.times.len() as f64 / self.duration
        } else {
            0.0
        }
    }
}
