use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use super::{rng_for, PhotonStream, SourceKind};
use crate::{Error, Result};

const OP_COHERENT: u64 = 1;
const OP_THERMAL: u64 = 2;

/// Field-update grid of the thermal source, per coherence time.
pub const THERMAL_STEPS_PER_COHERENCE_TIME: f64 = 200.0;

fn check(rate: f64, duration: f64) -> Result<()> {
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(Error::config("photon rate must be >= 0"));
    }
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(Error::config("stream duration must be >= 0"));
    }
    Ok(())
}

/// Homogeneous Poisson arrivals at `rate` over `[0, duration]`.
pub fn gen_coherent(rate: f64, duration: f64, seed: u64) -> Result<PhotonStream> {
    check(rate, duration)?;
    let mut times = Vec::new();
    if rate > 0.0 {
        times.reserve((rate * duration * 1.01) as usize + 16);
        let mut rng = rng_for(seed, OP_COHERENT);
        let mut t = 0.0;
        loop {
            let e: f64 = rng.sample(Exp1);
            t += e / rate;
            if t > duration {
                break;
            }
            if times.last().is_none_or(|&l| t > l) {
                times.push(t);
            }
        }
    }
    Ok(PhotonStream::from_sorted(
        times,
        duration,
        SourceKind::Coherent,
        seed,
        0.0,
    ))
}

/// Cox process driven by `rate · |E(t)|²`, `E` a unit-power complex
/// Ornstein–Uhlenbeck field with `⟨E(t) E*(t+τ)⟩ = e^{−|τ|/τ_c}`.
///
/// The field is updated exactly on a grid of `τ_c / 200` and held constant
/// within each cell. `τ_c = ∞` freezes a single field draw.
pub fn gen_thermal(rate: f64, tau_c: f64, duration: f64, seed: u64) -> Result<PhotonStream> {
    check(rate, duration)?;
    if !(tau_c > 0.0) {
        return Err(Error::config("coherence time must be > 0"));
    }
    let mut times = Vec::new();
    if rate == 0.0 || duration == 0.0 {
        return Ok(PhotonStream::from_sorted(
            times,
            duration,
            SourceKind::Thermal,
            seed,
            0.0,
        ));
    }
    times.reserve((rate * duration * 1.05) as usize + 16);
    let mut rng = rng_for(seed, OP_THERMAL);
    let normal = |rng: &mut rand_chacha::ChaCha12Rng| -> f64 { rng.sample(StandardNormal) };
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let (mut er, mut ei) = (s * normal(&mut rng), s * normal(&mut rng));
    let (dt, a) = if tau_c.is_finite() {
        let dt = tau_c / THERMAL_STEPS_PER_COHERENCE_TIME;
        (dt, (-dt / tau_c).exp())
    } else {
        (duration, 1.0)
    };
    let kick = s * (1.0 - a * a).sqrt();
    let mut threshold: f64 = rng.sample(Exp1);
    let mut t0 = 0.0;
    while t0 < duration {
        let t1 = (t0 + dt).min(duration);
        let lambda = rate * (er * er + ei * ei);
        if lambda > 0.0 {
            let mut remaining = lambda * (t1 - t0);
            let mut s_pos = t0;
            while threshold <= remaining {
                s_pos += threshold / lambda;
                remaining -= threshold;
                if s_pos <= duration && times.last().is_none_or(|&l| s_pos > l) {
                    times.push(s_pos);
                }
                threshold = rng.sample(Exp1);
            }
            threshold -= remaining;
        }
        if a < 1.0 {
            er = a * er + kick * normal(&mut rng);
            ei = a * ei + kick * normal(&mut rng);
        }
        t0 = t1;
    }
    Ok(PhotonStream::from_sorted(
        times,
        duration,
        SourceKind::Thermal,
        seed,
        0.0,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photon::g2_single_autocorr;

    /// Kolmogorov distribution tail `Q(λ) = 2 Σ (−1)^{k−1} e^{−2k²λ²}`.
    fn ks_pvalue(d: f64, n: usize) -> f64 {
        let sn = (n as f64).sqrt();
        let lam = (sn + 0.12 + 0.11 / sn) * d;
        let mut q = 0.0;
        for k in 1..200 {
            let kf = k as f64;
            let term = 2.0 * (-2.0 * kf * kf * lam * lam).exp();
            q += if k % 2 == 1 { term } else { -term };
            if term < 1e-16 {
                break;
            }
        }
        q.clamp(0.0, 1.0)
    }

    #[test]
    fn zero_rate_gives_an_empty_stream() {
        assert!(gen_coherent(0.0, 1.0, 1).unwrap().is_empty());
        assert!(gen_thermal(0.0, 1e-6, 1.0, 1).unwrap().is_empty());
        assert!(gen_coherent(-1.0, 1.0, 1).is_err());
    }

    #[test]
    fn coherent_count_is_poisson() {
        let s = gen_coherent(1e7, 0.1, 11).unwrap();
        let n = s.len() as f64;
        assert!((n - 1e6).abs() < 5.0 * 1e3, "{n}");
        assert!(s.times().windows(2).all(|w| w[1] > w[0]));
        assert!(*s.times().last().unwrap() <= 0.1);
    }

    #[test]
    fn coherent_gaps_pass_a_ks_test() {
        let rate = 2e5;
        let s = gen_coherent(rate, 0.25, 5).unwrap();
        let mut gaps: Vec<f64> = s.times().windows(2).map(|w| w[1] - w[0]).collect();
        gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = gaps.len();
        let mut d: f64 = 0.0;
        for (i, g) in gaps.iter().enumerate() {
            let cdf = 1.0 - (-rate * g).exp();
            d = d
                .max((cdf - i as f64 / n as f64).abs())
                .max(((i + 1) as f64 / n as f64 - cdf).abs());
        }
        let p = ks_pvalue(d, n);
        assert!(p > 0.01, "KS p = {p} (D = {d}, n = {n})");
    }

    #[test]
    fn streams_are_reproducible() {
        assert_eq!(gen_coherent(1e5, 0.01, 3).unwrap(), gen_coherent(1e5, 0.01, 3).unwrap());
        assert_ne!(gen_coherent(1e5, 0.01, 3).unwrap(), gen_coherent(1e5, 0.01, 4).unwrap());
        assert_eq!(
            gen_thermal(1e5, 1e-6, 0.01, 3).unwrap(),
            gen_thermal(1e5, 1e-6, 0.01, 3).unwrap()
        );
    }

    #[test]
    fn frozen_thermal_field_is_conditionally_poisson() {
        // one intensity draw per stream: counts scatter far beyond Poisson
        // across seeds, but within a stream the gaps are exponential
        let counts: Vec<f64> = (0..40)
            .map(|s| gen_thermal(1e4, f64::INFINITY, 1.0, s).unwrap().len() as f64)
            .collect();
        let mean = counts.iter().sum::<f64>() / counts.len() as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (counts.len() - 1) as f64;
        assert!(var > 20.0 * mean, "var {var} mean {mean}");
        let s = gen_thermal(1e5, f64::INFINITY, 1.0, 9).unwrap();
        let g = g2_single_autocorr(&s, 1e-6).unwrap();
        assert!((g.raw - 1.0).abs() < 0.05, "{}", g.raw);
    }

    #[test]
    fn thermal_mean_rate() {
        // 1e5 coherence times; relative scatter of the count ~ 1/sqrt(1e5)
        let s = gen_thermal(1e6, 1e-6, 0.1, 21).unwrap();
        let n = s.len() as f64;
        assert!((n / 1e5 - 1.0).abs() < 0.02, "{n}");
    }
}
