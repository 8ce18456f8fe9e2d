use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::PhotonStream;
use crate::{Error, Result};

/// Minimum number of occupied bins for a single-detector estimate.
pub const MIN_OCCUPIED_BINS: usize = 100;

/// Pair histogram over `τ = t_b − t_a`, bins centred on `k · bin_width`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceHistogram {
    pub bin_width: f64,
    /// `2K + 2` edges for bins `k = −K..=K`.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub g2: Vec<f64>,
    pub n_a: usize,
    pub n_b: usize,
    pub duration: f64,
}

impl CoincidenceHistogram {
    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1]))
    }

    /// Bin index of delay `tau`, if inside the histogram.
    pub fn bin_of(&self, tau: f64) -> Option<usize> {
        let k = self.counts.len() / 2;
        let idx = (tau / self.bin_width).round() + k as f64;
        (idx >= 0.0 && (idx as usize) < self.counts.len()).then_some(idx as usize)
    }

    pub fn g2_at(&self, tau: f64) -> Option<f64> {
        self.bin_of(tau).map(|i| self.g2[i])
    }
}

/// Full (start–stop free) cross-correlation of two streams over
/// `|τ| ≤ tau_max`, normalized by `n_A n_B / T² · Δ · (T − |τ|)`.
pub fn g2_cross(a: &PhotonStream, b: &PhotonStream, bin_width: f64, tau_max: f64) -> Result<CoincidenceHistogram> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::config("bin width must be > 0"));
    }
    if !(tau_max >= bin_width && tau_max.is_finite()) {
        return Err(Error::config("tau_max must be >= bin width"));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyStream);
    }
    let duration = a.duration().min(b.duration());
    if !(duration > 0.0) {
        return Err(Error::EmptyStream);
    }
    let half = (tau_max / bin_width).floor() as usize;
    let nbins = 2 * half + 1;
    let reach = (half as f64 + 0.5) * bin_width;
    let ta: Vec<f64> = a.times().iter().copied().filter(|&t| t <= duration).collect();
    let tb: Vec<f64> = b.times().iter().copied().filter(|&t| t <= duration).collect();
    if ta.is_empty() || tb.is_empty() {
        return Err(Error::EmptyStream);
    }
    let mut counts = vec![0u64; nbins];
    let mut lo = 0usize;
    for &t in &ta {
        while lo < tb.len() && tb[lo] < t - reach {
            lo += 1;
        }
        let mut j = lo;
        while j < tb.len() && tb[j] < t + reach {
            let idx = ((tb[j] - t) / bin_width).round() + half as f64;
            if idx >= 0.0 && (idx as usize) < nbins {
                counts[idx as usize] += 1;
            }
            j += 1;
        }
    }
    let (na, nb) = (ta.len(), tb.len());
    let edges: Vec<f64> = (0..=nbins)
        .map(|e| (e as f64 - half as f64 - 0.5) * bin_width)
        .collect();
    let norm = na as f64 * nb as f64 / (duration * duration) * bin_width;
    let g2 = counts
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let tau = (k as f64 - half as f64) * bin_width;
            let expected = norm * (duration - tau.abs()).max(0.0);
            if expected > 0.0 {
                c as f64 / expected
            } else {
                0.0
            }
        })
        .collect();
    Ok(CoincidenceHistogram {
        bin_width,
        edges,
        counts,
        g2,
        n_a: na,
        n_b: nb,
        duration,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AutocorrEstimate {
    /// `⟨n(n−1)⟩ / ⟨n⟩²` over bins of the given resolution.
    pub raw: f64,
    /// `raw` divided by the value a Poisson stream of the same detected rate
    /// would show through the stream's dead time; `None` when that value is
    /// zero (resolution not longer than the dead time).
    pub corrected: Option<f64>,
    pub bins: usize,
    pub occupied: usize,
}

/// Single-detector `g²(0)` from binned counts.
pub fn g2_single_autocorr(stream: &PhotonStream, resolution: f64) -> Result<AutocorrEstimate> {
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::config("resolution must be > 0"));
    }
    let bins = (stream.duration() / resolution).floor();
    if !(bins >= 1.0) {
        return Err(Error::InsufficientData {
            occupied: 0,
            required: MIN_OCCUPIED_BINS,
        });
    }
    let nb = bins as usize;
    let span = nb as f64 * resolution;
    let mut occupied = 0usize;
    let mut total = 0u64;
    let mut pairs = 0u64;
    let mut current = usize::MAX;
    let mut n = 0u64;
    let flush = |n: u64, occupied: &mut usize, total: &mut u64, pairs: &mut u64| {
        if n > 0 {
            *occupied += 1;
            *total += n;
            *pairs += n * (n - 1);
        }
    };
    for &t in stream.times() {
        if t >= span {
            break;
        }
        let k = ((t / resolution) as usize).min(nb - 1);
        if k != current {
            flush(n, &mut occupied, &mut total, &mut pairs);
            current = k;
            n = 0;
        }
        n += 1;
    }
    flush(n, &mut occupied, &mut total, &mut pairs);
    if occupied < MIN_OCCUPIED_BINS {
        return Err(Error::InsufficientData {
            occupied,
            required: MIN_OCCUPIED_BINS,
        });
    }
    let mean = total as f64 / bins;
    let raw = (pairs as f64 / bins) / (mean * mean);
    let corrected = if stream.dead_time > 0.0 {
        let rate = total as f64 / span;
        let kappa = dead_time_g2_factor(rate, stream.dead_time, resolution);
        (kappa > 0.0).then(|| raw / kappa)
    } else {
        Some(raw)
    };
    Ok(AutocorrEstimate {
        raw,
        corrected,
        bins: nb,
        occupied,
    })
}

/// Expected `⟨n(n−1)⟩/⟨n⟩²` in bins of width `window` for a stationary
/// Poisson stream seen through a non-paralyzable dead time, given the
/// detected rate `rate`.
///
/// Detected events form a renewal process with intervals `τ_d + Exp(λ)`,
/// `λ = r / (1 − r τ_d)`, so `E[n(n−1)] = 2r ∫₀^Δ (Δ − t) h(t) dt` with the
/// renewal density `h` a sum of shifted Erlang densities.
pub fn dead_time_g2_factor(rate: f64, dead_time: f64, window: f64) -> f64 {
    if !(rate > 0.0) || !(window > 0.0) {
        return 0.0;
    }
    if dead_time <= 0.0 {
        return 1.0;
    }
    let busy = rate * dead_time;
    if busy >= 1.0 {
        return 0.0;
    }
    let lambda = rate / (1.0 - busy);
    let mut sum = 0.0;
    let mut k = 1usize;
    loop {
        let d = window - k as f64 * dead_time;
        if d <= 0.0 {
            break;
        }
        // E[(d − S)⁺] for S ~ Erlang(k, λ)
        let x = lambda * d;
        let term = d * gamma_p(k as f64, x) - (k as f64 / lambda) * gamma_p(k as f64 + 1.0, x);
        sum += term.max(0.0);
        if term < 1e-18 * sum {
            break;
        }
        k += 1;
    }
    2.0 * sum / (rate * window * window)
}

/// Regularized lower incomplete gamma `P(a, x)`.
fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let ln_pre = a * x.ln() - x - libm::lgamma(a);
    if x < a + 1.0 {
        // series
        let mut ap = a;
        let mut del = 1.0 / a;
        let mut sum = del;
        for _ in 0..100_000 {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * 1e-16 {
                break;
            }
        }
        (sum.ln() + ln_pre).exp().min(1.0)
    } else {
        // continued fraction for Q, modified Lentz
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..100_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (1.0 - (ln_pre + h.ln()).exp()).max(0.0)
    }
}
