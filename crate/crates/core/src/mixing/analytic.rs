//! Closed-form conversion efficiency and the coupling constants it uses.

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::consts::{EPSILON_0, HBAR, SPEED_OF_LIGHT};
use crate::doppler::{effective_linewidth, VaporSpec};
use crate::levels::{FieldLabel, FieldSet, LevelScheme};
use crate::mixing::matching::phase_mismatch;
use crate::mixing::propagate::Mat2;
use crate::{Error, Result};

/// Field–polarization couplings `(g_S, g_T)` with `g² = ω d² N / (2 ε₀ ħ)`.
///
/// With this normalization a resonant two-level medium attenuates the Rabi
/// frequency at `2g²/(cΓ)` per metre.
pub fn coupling_constants(scheme: &LevelScheme, vapor: &VaporSpec) -> (f64, f64) {
    let g = |label: FieldLabel| {
        let t = scheme.transition(label);
        (t.angular_frequency * t.dipole * t.dipole * vapor.density() / (2.0 * EPSILON_0 * HBAR)).sqrt()
    };
    (g(FieldLabel::S), g(FieldLabel::T))
}

/// Build-up rate `ᾱ = 2 g_S² (G_S² + G_T²) / (c Γ_th G_S²)`, rad/m.
pub fn alpha_bar(g_s: f64, big_g_s: f64, big_g_t: f64, gamma_th: f64) -> Result<f64> {
    if big_g_s == 0.0 {
        return Err(Error::Division("alpha_bar is undefined for G_S = 0".into()));
    }
    if !(gamma_th > 0.0) {
        return Err(Error::Division("alpha_bar needs Γ_th > 0".into()));
    }
    let r = big_g_t / big_g_s;
    Ok(2.0 * g_s * g_s * (1.0 + r * r) / (SPEED_OF_LIGHT * gamma_th))
}

/// Parameters of the two-mode converter.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingConfig {
    pub g_s: f64,
    pub g_t: f64,
    /// `G_S = g_S |Ω_2 Ω_3|`, `G_T = g_T |Ω_1 Ω_4|`.
    pub big_g_s: f64,
    pub big_g_t: f64,
    /// Medium length, m.
    pub length: f64,
    pub gamma_th: f64,
    /// Scalar phase mismatch along the propagation axis, rad/m.
    pub delta_k: f64,
    /// Extra amplitude loss per metre for (S, T).
    pub extra_loss: [f64; 2],
    pub fields: Option<FieldSet>,
    pub vapor: Option<VaporSpec>,
}

impl MixingConfig {
    /// Couplings, Γ_th (of the A1 field) and |Δk| derived from the model.
    pub fn from_model(
        scheme: &LevelScheme,
        fields: &FieldSet,
        vapor: &VaporSpec,
        length: f64,
        extra_loss: [f64; 2],
    ) -> Result<Self> {
        let (g_s, g_t) = coupling_constants(scheme, vapor);
        let (big_g_s, big_g_t) = effective_couplings(g_s, g_t, fields);
        let cfg = MixingConfig {
            g_s,
            g_t,
            big_g_s,
            big_g_t,
            length,
            gamma_th: effective_linewidth(vapor, fields.get(FieldLabel::A1)),
            delta_k: phase_mismatch(fields).1,
            extra_loss,
            fields: Some(fields.clone()),
            vapor: Some(*vapor),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Free-standing couplings, for studies of the closed form itself.
    pub fn synthetic(g_s: f64, g_t: f64, big_g_s: f64, big_g_t: f64, length: f64, gamma_th: f64) -> Result<Self> {
        let cfg = MixingConfig {
            g_s,
            g_t,
            big_g_s,
            big_g_t,
            length,
            gamma_th,
            delta_k: 0.0,
            extra_loss: [0.0; 2],
            fields: None,
            vapor: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        // L = 0 is accepted as the empty-medium limit
        if !(self.length >= 0.0 && self.length.is_finite()) {
            return Err(Error::config("medium length must be >= 0"));
        }
        // Γ_th = 0 (frozen vapor) only matters to the closed form
        if !(self.gamma_th >= 0.0 && self.gamma_th.is_finite()) {
            return Err(Error::config("Γ_th must be >= 0"));
        }
        if !(self.big_g_s >= 0.0 && self.big_g_t >= 0.0) {
            return Err(Error::config("effective couplings must be >= 0"));
        }
        if !(self.g_s >= 0.0 && self.g_t >= 0.0) {
            return Err(Error::config("coupling constants must be >= 0"));
        }
        if self.extra_loss.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
            return Err(Error::config("extra loss must be >= 0"));
        }
        if !self.delta_k.is_finite() {
            return Err(Error::config("phase mismatch must be finite"));
        }
        if let Some(f) = &self.fields {
            let (gs, gt) = effective_couplings(self.g_s, self.g_t, f);
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
            if !close(gs, self.big_g_s) || !close(gt, self.big_g_t) {
                return Err(Error::config("effective couplings disagree with the field set"));
            }
        }
        Ok(())
    }

    pub fn alpha_bar(&self) -> Result<f64> {
        alpha_bar(self.g_s, self.big_g_s, self.big_g_t, self.gamma_th)
    }
}

fn effective_couplings(g_s: f64, g_t: f64, fields: &FieldSet) -> (f64, f64) {
    let om = |l: FieldLabel| fields.get(l).rabi.norm();
    (
        g_s * om(FieldLabel::A2) * om(FieldLabel::A3),
        g_t * om(FieldLabel::A1) * om(FieldLabel::A4),
    )
}

/// `η_QE = G_S² G_T² (1 − e^{−ᾱL})² / (G_S² + G_T²)²`.
pub fn eta_qe_analytic(cfg: &MixingConfig) -> Result<f64> {
    cfg.validate()?;
    if cfg.big_g_s == 0.0 || cfg.big_g_t == 0.0 {
        return Ok(0.0);
    }
    let a = cfg.alpha_bar()?;
    // ratio form avoids overflow of G⁴ for realistic magnitudes
    let r = cfg.big_g_t / cfg.big_g_s;
    let mix = r / (1.0 + r * r);
    let build = -(-a * cfg.length).exp_m1();
    Ok(mix * mix * build * build)
}

/// Linear-response matrix whose propagation reproduces the closed form:
/// `β_XY = −i c K_XY / (2 g_X g_Y)` with `K = ᾱ u uᵀ`,
/// `u ∝ (G_S, G_T)`. Needs `g_S, g_T, G_S > 0`.
pub fn equivalent_coefficients(cfg: &MixingConfig) -> Result<Mat2> {
    cfg.validate()?;
    if !(cfg.g_s > 0.0 && cfg.g_t > 0.0) {
        return Err(Error::Division("equivalent coefficients need g_S, g_T > 0".into()));
    }
    let a = cfg.alpha_bar()?;
    let r = cfg.big_g_t / cfg.big_g_s;
    let n2 = 1.0 + r * r;
    let u = [1.0 / n2.sqrt(), r / n2.sqrt()];
    let g = [cfg.g_s, cfg.g_t];
    let mut beta = [[Complex64::new(0.0, 0.0); 2]; 2];
    for x in 0..2 {
        for y in 0..2 {
            let k = a * u[x] * u[y];
            beta[x][y] = Complex64::new(0.0, -SPEED_OF_LIGHT * k / (2.0 * g[x] * g[y]));
        }
    }
    Ok(beta)
}
