//! Sampled curves: conversion spectra, probe transmission and the
//! non-perturbative THz response.

use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::consts::{EPSILON_0, HBAR, PLANCK, SPEED_OF_LIGHT};
use crate::doppler::{doppler_average_with, ResonanceHints, VaporSpec, VelocityQuadrature};
use crate::levels::{fast_steady_state, resonance_velocities, resonance_width, FieldLabel, FieldSet, LevelScheme};
use crate::mixing::analytic::{coupling_constants, MixingConfig};
use crate::mixing::propagate::coupled_mode_propagate;
use crate::mixing::response::{linear_response_with, probe_coherence};
use crate::ode::{dopri5, OdeOptions};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Abscissa {
    /// Detuning of the named field, rad/s.
    Detuning(FieldLabel),
    /// THz intensity, W/m².
    ThzIntensity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ordinate {
    Efficiency,
    Transmission,
    /// Signal photon rate, counts/s.
    SignalRate,
}

/// Strictly increasing samples `(x, y)` with finite, non-negative `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace {
    pub abscissa: Abscissa,
    pub ordinate: Ordinate,
    points: Vec<(f64, f64)>,
    /// Named scalar parameters the trace was computed with.
    pub snapshot: Vec<(String, f64)>,
}

impl SpectrumTrace {
    pub fn new(abscissa: Abscissa, ordinate: Ordinate, points: Vec<(f64, f64)>) -> Result<Self> {
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidTrace("abscissa must be strictly increasing".into()));
        }
        if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(Error::InvalidTrace("trace contains non-finite samples".into()));
        }
        if points.iter().any(|p| p.1 < 0.0) {
            return Err(Error::InvalidTrace("trace ordinate must be non-negative".into()));
        }
        Ok(SpectrumTrace {
            abscissa,
            ordinate,
            points,
            snapshot: Vec::new(),
        })
    }

    pub fn with_snapshot(mut self, snapshot: Vec<(String, f64)>) -> Self {
        self.snapshot = snapshot;
        self
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Same trace with every ordinate multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let pts = self.points.iter().map(|&(x, y)| (x, y * factor)).collect();
        Ok(SpectrumTrace::new(self.abscissa, self.ordinate, pts)?.with_snapshot(self.snapshot.clone()))
    }
}

/// Geometry and numerics of the converter medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medium {
    /// Cell length, m.
    pub length: f64,
    /// Effective beam area, m².
    pub effective_area: f64,
    /// Extra amplitude loss per metre for (S, T).
    pub extra_loss: [f64; 2],
    pub quadrature: VelocityQuadrature,
    /// Tolerances of the z integration in the non-perturbative model.
    pub ode: OdeOptions,
}

impl Default for Medium {
    fn default() -> Self {
        Medium {
            length: 5e-3,
            effective_area: 1e-6,
            extra_loss: [0.0; 2],
            quadrature: VelocityQuadrature::default(),
            ode: OdeOptions {
                rtol: 1e-6,
                atol: 1e-9,
                initial_step: 0.0,
                max_steps: 10_000,
            },
        }
    }
}

impl Medium {
    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::config("medium length must be > 0"));
        }
        if !(self.effective_area > 0.0 && self.effective_area.is_finite()) {
            return Err(Error::config("effective area must be > 0"));
        }
        if self.extra_loss.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
            return Err(Error::config("extra loss must be >= 0"));
        }
        Ok(())
    }
}

/// Linearized conversion efficiency at one parameter point.
pub fn conversion_efficiency(
    scheme: &LevelScheme,
    fields: &FieldSet,
    vapor: &VaporSpec,
    medium: &Medium,
) -> Result<f64> {
    medium.validate()?;
    let beta = linear_response_with(scheme, fields, vapor, &medium.quadrature)?.beta;
    let cfg = MixingConfig::from_model(scheme, fields, vapor, medium.length, medium.extra_loss)?;
    Ok(coupled_mode_propagate(&beta, &cfg, 1.0)?.eta_qe)
}

/// Linearized η_QE versus the detuning of `sweep` (any input field).
pub fn signal_spectrum(
    scheme: &LevelScheme,
    fields: &FieldSet,
    vapor: &VaporSpec,
    medium: &Medium,
    sweep: FieldLabel,
    grid: &[f64],
) -> Result<SpectrumTrace> {
    if sweep == FieldLabel::S {
        return Err(Error::config(
            "the signal detuning follows from the inputs and cannot be swept",
        ));
    }
    let mut pts = Vec::with_capacity(grid.len());
    for &d in grid {
        let f = fields.with_detuning(scheme, sweep, d);
        pts.push((d, conversion_efficiency(scheme, &f, vapor, medium)?));
    }
    SpectrumTrace::new(Abscissa::Detuning(sweep), Ordinate::Efficiency, pts)
}

/// Doppler-averaged A1 transmission `exp(−α L)` at the given fields.
pub fn probe_transmission(scheme: &LevelScheme, fields: &FieldSet, vapor: &VaporSpec, medium: &Medium) -> Result<f64> {
    medium.validate()?;
    let om1 = fields.get(FieldLabel::A1).rabi;
    if om1.norm() == 0.0 {
        return Err(Error::config("transmission needs a non-zero A1 Rabi frequency"));
    }
    if vapor.density() == 0.0 {
        return Ok(1.0);
    }
    let hints = ResonanceHints {
        centers: resonance_velocities(scheme, fields),
        width: resonance_width(scheme, fields),
    };
    let rho21: Complex64 = doppler_average_with(
        |v| {
            let rho = fast_steady_state(scheme, fields, v)?;
            Ok(probe_coherence(scheme, FieldLabel::A1, rho.matrix()))
        },
        vapor,
        &medium.quadrature,
        &hints,
    )?;
    let t = scheme.transition(FieldLabel::A1);
    let g2 = t.angular_frequency * t.dipole * t.dipole * vapor.density() / (2.0 * EPSILON_0 * HBAR);
    let alpha = -(4.0 * g2 / SPEED_OF_LIGHT) * (rho21 / om1).im;
    Ok((-alpha * medium.length).exp())
}

pub fn transmission_spectrum(
    scheme: &LevelScheme,
    fields: &FieldSet,
    vapor: &VaporSpec,
    medium: &Medium,
    grid: &[f64],
) -> Result<SpectrumTrace> {
    let mut pts = Vec::with_capacity(grid.len());
    for &d in grid {
        let f = fields.with_detuning(scheme, FieldLabel::A1, d);
        pts.push((d, probe_transmission(scheme, &f, vapor, medium)?));
    }
    SpectrumTrace::new(Abscissa::Detuning(FieldLabel::A1), Ordinate::Transmission, pts)
}

/// Input/output of the non-perturbative converter at one THz amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponsePoint {
    pub omega_t: f64,
    /// THz intensity, W/m².
    pub intensity: f64,
    /// Input THz photon rate, counts/s.
    pub rate_t: f64,
    /// Output signal photon rate, counts/s.
    pub rate_s: f64,
    pub eta_qe: f64,
}

/// THz intensity carried by a Rabi frequency `|Ω_T|` on the T transition.
pub fn thz_intensity(scheme: &LevelScheme, omega_t: f64) -> f64 {
    let d = scheme.transition(FieldLabel::T).dipole;
    let e = HBAR * omega_t / d;
    0.5 * EPSILON_0 * SPEED_OF_LIGHT * e * e
}

/// Integrates `(Ω_S, Ω_T)` through the cell with the full steady state of
/// every velocity class at each z. The injected THz field is the T field of
/// `fields` rescaled to `|Ω_T| = omega_t`; any configured Ω_S is ignored.
pub fn nonlinear_response_point(
    scheme: &LevelScheme,
    fields: &FieldSet,
    vapor: &VaporSpec,
    medium: &Medium,
    omega_t: f64,
) -> Result<ResponsePoint> {
    medium.validate()?;
    if !(omega_t >= 0.0 && omega_t.is_finite()) {
        return Err(Error::config("THz Rabi frequency must be >= 0"));
    }
    let intensity = thz_intensity(scheme, omega_t);
    let nu_t = fields.get(FieldLabel::T).frequency;
    let rate_t = intensity * medium.effective_area / (PLANCK * nu_t);
    if omega_t == 0.0 || vapor.density() == 0.0 {
        return Ok(ResponsePoint {
            omega_t,
            intensity,
            rate_t,
            rate_s: 0.0,
            eta_qe: 0.0,
        });
    }
    let phase = {
        let r = fields.get(FieldLabel::T).rabi;
        if r.norm() > 0.0 {
            r / r.norm()
        } else {
            Complex64::new(1.0, 0.0)
        }
    };
    let base = fields.with_rabi(FieldLabel::S, Complex64::new(0.0, 0.0));
    let (g_s, g_t) = coupling_constants(scheme, vapor);
    let dk = crate::mixing::matching::phase_mismatch(&base).1;
    let hints = ResonanceHints {
        centers: resonance_velocities(scheme, &base),
        width: resonance_width(scheme, &base),
    };
    let i = Complex64::new(0.0, 1.0);
    let k = [2.0 * g_s * g_s / SPEED_OF_LIGHT, 2.0 * g_t * g_t / SPEED_OF_LIGHT];
    let loss = medium.extra_loss;
    // state in units of omega_t
    let out = dopri5(
        |z, y, dy| {
            let om_s = Complex64::new(y[0], y[1]) * omega_t;
            let om_t = Complex64::new(y[2], y[3]) * omega_t;
            let rot = Complex64::from_polar(1.0, dk * z);
            let local = base
                .with_rabi(FieldLabel::S, om_s * rot.conj())
                .with_rabi(FieldLabel::T, om_t);
            let rho: [Complex64; 2] = doppler_average_with(
                |v| {
                    let r = fast_steady_state(scheme, &local, v)?;
                    Ok([
                        probe_coherence(scheme, FieldLabel::S, r.matrix()),
                        probe_coherence(scheme, FieldLabel::T, r.matrix()),
                    ])
                },
                vapor,
                &medium.quadrature,
                &hints,
            )?;
            let ds = (-i * k[0] * rho[0] * rot - om_s * loss[0]) / omega_t;
            let dt = (-i * k[1] * rho[1] - om_t * loss[1]) / omega_t;
            dy[0] = ds.re;
            dy[1] = ds.im;
            dy[2] = dt.re;
            dy[3] = dt.im;
            Ok(())
        },
        &[0.0, 0.0, phase.re, phase.im],
        &[0.0, medium.length],
        &medium.ode,
    )?;
    let y = &out[1];
    let om_s = Complex64::new(y[0], y[1]) * omega_t;
    // photon flux ∝ |Ω/g|²
    let eta = (om_s.norm_sqr() / (g_s * g_s)) / (omega_t * omega_t / (g_t * g_t));
    Ok(ResponsePoint {
        omega_t,
        intensity,
        rate_t,
        rate_s: eta * rate_t,
        eta_qe: eta,
    })
}

/// Signal rate versus THz intensity over an increasing `|Ω_T|` grid.
pub fn nonlinear_response_curve(
    scheme: &LevelScheme,
    fields: &FieldSet,
    vapor: &VaporSpec,
    medium: &Medium,
    omega_t_grid: &[f64],
) -> Result<SpectrumTrace> {
    if omega_t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::config("Ω_T grid must be strictly increasing"));
    }
    let mut pts = Vec::with_capacity(omega_t_grid.len());
    for &om in omega_t_grid {
        let p = nonlinear_response_point(scheme, fields, vapor, medium, om)?;
        pts.push((p.intensity, p.rate_s));
    }
    SpectrumTrace::new(Abscissa::ThzIntensity, Ordinate::SignalRate, pts)
}
