//! Detector figures of merit: count rates, efficiency, NEP, SNR and dynamic
//! range.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::consts::PLANCK;
use crate::mixing::SpectrumTrace;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorSpec {
    pub eta_qe: f64,
    pub eta_loss: f64,
    /// Dark count rate, counts/s.
    pub dark_rate: f64,
    /// Dead time, s.
    pub dead_time: f64,
    /// Effective conversion area, m².
    pub effective_area: f64,
    /// THz frequency, Hz.
    pub thz_frequency: f64,
}

impl DetectorSpec {
    pub fn new(
        eta_qe: f64,
        eta_loss: f64,
        dark_rate: f64,
        dead_time: f64,
        effective_area: f64,
        thz_frequency: f64,
    ) -> Result<Self> {
        let s = DetectorSpec {
            eta_qe,
            eta_loss,
            dark_rate,
            dead_time,
            effective_area,
            thz_frequency,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !unit(self.eta_qe) {
            return Err(Error::config("eta_qe must lie in [0, 1]"));
        }
        if !unit(self.eta_loss) {
            return Err(Error::config("eta_loss must lie in [0, 1]"));
        }
        if !(self.dark_rate >= 0.0 && self.dark_rate.is_finite()) {
            return Err(Error::config("dark rate must be >= 0"));
        }
        if !(self.dead_time >= 0.0 && self.dead_time.is_finite()) {
            return Err(Error::config("dead time must be >= 0"));
        }
        if !(self.effective_area > 0.0 && self.effective_area.is_finite()) {
            return Err(Error::config("effective area must be > 0"));
        }
        if !(self.thz_frequency > 0.0 && self.thz_frequency.is_finite()) {
            return Err(Error::config("THz frequency must be > 0"));
        }
        Ok(())
    }

    pub fn photon_energy(&self) -> f64 {
        PLANCK * self.thz_frequency
    }
}

/// `R_T = I_T S_eff / (h ν_T)`.
pub fn thz_count_rate(intensity: f64, spec: &DetectorSpec) -> f64 {
    intensity * spec.effective_area / spec.photon_energy()
}

/// Inverse of [`thz_count_rate`].
pub fn thz_intensity_for_rate(rate: f64, spec: &DetectorSpec) -> f64 {
    rate * spec.photon_energy() / spec.effective_area
}

/// `η = η_QE η_loss`.
pub fn total_efficiency(eta_qe: f64, eta_loss: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta_qe) || !(0.0..=1.0).contains(&eta_loss) {
        return Err(Error::config("efficiencies must lie in [0, 1]"));
    }
    Ok(eta_qe * eta_loss)
}

/// `NEP = h ν_T sqrt(2D) / η`, W/√Hz.
pub fn nep(spec: &DetectorSpec, eta: f64) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::UndefinedNep);
    }
    Ok(spec.photon_energy() * (2.0 * spec.dark_rate).sqrt() / eta)
}

/// `R τ / sqrt((R + 2D) τ)`; zero when there are no counts at all.
pub fn snr(rate: f64, dark_rate: f64, tau: f64) -> f64 {
    let var = (rate + 2.0 * dark_rate) * tau;
    if var <= 0.0 {
        return 0.0;
    }
    rate * tau / var.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicRange {
    pub db: f64,
    /// Intensity at which SNR = 1.
    pub i_min: f64,
    /// Intensity at which the efficiency is half its plateau.
    pub i_max: f64,
    pub plateau: f64,
}

/// Dynamic range of a `R_S` versus `I_T` curve.
///
/// The noise floor uses detected counts `η_loss R_S` against the dark rate;
/// the compression point is where `R_S / R_T` falls to half the median
/// efficiency over the lowest decade of intensities. Both crossings are
/// interpolated linearly in `log I`.
pub fn dynamic_range(curve: &SpectrumTrace, spec: &DetectorSpec, tau: f64) -> Result<DynamicRange> {
    spec.validate()?;
    if !(tau > 0.0) {
        return Err(Error::config("integration time must be > 0"));
    }
    let pts: Vec<(f64, f64)> = curve.points().iter().copied().filter(|p| p.0 > 0.0).collect();
    if pts.len() < 2 {
        return Err(Error::InvalidTrace(
            "dynamic range needs at least two positive intensities".into(),
        ));
    }
    let s = |r: f64| snr(spec.eta_loss * r, spec.dark_rate, tau);
    let lo = match pts.iter().position(|p| s(p.1) >= 1.0) {
        None => return Err(Error::BelowNoise),
        Some(0) => return Err(Error::AboveNoiseFloor),
        Some(k) => log_crossing(pts[k - 1], pts[k], |p| s(p.1) - 1.0),
    };
    let eff = |p: (f64, f64)| p.1 / thz_count_rate(p.0, spec);
    // slack keeps a sample at exactly one decade inside after rescaling
    let decade_end = pts[0].0 * 10.0 * (1.0 + 1e-9);
    let mut plateau_set: Vec<f64> = pts.iter().filter(|p| p.0 <= decade_end).map(|&p| eff(p)).collect();
    plateau_set.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    let n = plateau_set.len();
    let plateau = if n % 2 == 1 {
        plateau_set[n / 2]
    } else {
        0.5 * (plateau_set[n / 2 - 1] + plateau_set[n / 2])
    };
    let target = 0.5 * plateau;
    let start = pts.iter().position(|p| p.0 >= lo).unwrap_or(0).max(1);
    let db_of = |i_max: f64| 10.0 * (i_max / lo).log10();
    let Some(k) = (start..pts.len()).find(|&k| eff(pts[k]) <= target) else {
        return Err(Error::UnsaturatedCurve {
            partial_db: db_of(pts[pts.len() - 1].0),
        });
    };
    let i_max = log_crossing(pts[k - 1], pts[k], |p| eff(p) - target);
    Ok(DynamicRange {
        db: db_of(i_max),
        i_min: lo,
        i_max,
        plateau,
    })
}

/// Root of `g` between two samples, linear in `log x`.
fn log_crossing(a: (f64, f64), b: (f64, f64), g: impl Fn((f64, f64)) -> f64) -> f64 {
    let (ga, gb) = (g(a), g(b));
    let t = if ga == gb { 1.0 } else { ga / (ga - gb) };
    (a.0.ln() + t.clamp(0.0, 1.0) * (b.0.ln() - a.0.ln())).exp()
}
