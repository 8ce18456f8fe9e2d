//! Experiment configuration: TOML schema, defaults, validation and the
//! canonical serialization written to every manifest.
//!
//! Angular frequencies are written in Hz with an `_over_2pi` suffix, i.e.
//! the value is `ω / 2π`.

use rydthz_core::consts::{ATOMIC_MASS_UNIT, TWO_PI};
use rydthz_core::detector::DetectorSpec;
use rydthz_core::doppler::{VaporSpec, VelocityQuadrature};
use rydthz_core::levels::{FieldLabel, FieldSet, LevelScheme, LoopFrequencies, RateSet, DEFAULT_DIPOLES};
use rydthz_core::mixing::Medium;
use rydthz_core::ode::OdeOptions;
use rydthz_core::quad::AdaptiveTolerance;
use rydthz_core::Complex64;
use serde::{Deserialize, Serialize};

/// Invalid configuration, with the dotted key path of the offending value.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{key}: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            key: key.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Monte Carlo seed; `--seed` overrides it.
    pub seed: u64,
    pub scheme: SchemeConfig,
    pub vapor: VaporConfig,
    pub fields: FieldConfig,
    pub medium: MediumConfig,
    pub detector: DetectorConfig,
    pub sweep: SweepConfig,
    pub response: ResponseConfig,
    pub bandwidth_sweep: BandwidthSweepConfig,
    pub photon: PhotonConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemeConfig {
    pub a1_hz: f64,
    pub a2_hz: f64,
    pub a3_hz: f64,
    pub t_hz: f64,
    pub a4_hz: f64,
    /// Loop order A1, A2, A3, T, A4, S; C·m.
    pub dipoles_cm: [f64; 6],
    pub intermediate_decay_over_2pi_hz: f64,
    pub rydberg_decay_over_2pi_hz: f64,
    pub rydberg_dephasing_over_2pi_hz: f64,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        let f = LoopFrequencies::rubidium();
        let r = RateSet::default();
        SchemeConfig {
            a1_hz: f.a1,
            a2_hz: f.a2,
            a3_hz: f.a3,
            t_hz: f.t,
            a4_hz: f.a4,
            dipoles_cm: DEFAULT_DIPOLES,
            intermediate_decay_over_2pi_hz: r.intermediate_decay / TWO_PI,
            rydberg_decay_over_2pi_hz: r.rydberg_decay / TWO_PI,
            rydberg_dephasing_over_2pi_hz: r.rydberg_dephasing / TWO_PI,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VaporConfig {
    pub temperature_k: f64,
    pub density_m3: f64,
    pub mass_amu: f64,
}

impl Default for VaporConfig {
    fn default() -> Self {
        VaporConfig {
            temperature_k: 393.0,
            density_m3: 5e17,
            mass_amu: 86.909_180_527,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldConfig {
    /// `|Ω| / 2π` per field, loop order A1, A2, A3, T, A4, S.
    pub rabi_over_2pi_hz: [f64; 6],
    pub phase_rad: [f64; 6],
    /// `Δ / 2π` for A1, A2, A3, T, A4; the signal detuning closes the loop.
    pub detuning_over_2pi_hz: [f64; 5],
    /// Unit propagation directions, loop order.
    pub directions: [[f64; 3]; 6],
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig {
            rabi_over_2pi_hz: [8e6, 6e6, 12e6, 0.0, 10e6, 0.0],
            phase_rad: [0.0; 6],
            detuning_over_2pi_hz: [-5.2e6, 2e6, 0.0, 0.0, 1e6],
            directions: [[0.0, 0.0, 1.0]; 6],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureKind {
    Adaptive,
    GaussHermite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MediumConfig {
    pub length_m: f64,
    pub effective_area_m2: f64,
    /// Extra amplitude loss per metre for (S, T).
    pub extra_loss_per_m: [f64; 2],
    pub quadrature: QuadratureKind,
    /// Gauss–Hermite node count.
    pub nodes: usize,
    /// Adaptive rule: relative tolerance, cutoff in units of the most
    /// probable speed, initial panel count.
    pub rel_tol: f64,
    pub cutoff: f64,
    pub panels: usize,
    pub max_evaluations: usize,
    pub ode_rtol: f64,
    pub ode_atol: f64,
}

impl Default for MediumConfig {
    fn default() -> Self {
        let m = Medium::default();
        let VelocityQuadrature::Adaptive {
            tolerance,
            cutoff,
            panels,
        } = m.quadrature
        else {
            unreachable!("default velocity rule is adaptive")
        };
        MediumConfig {
            length_m: m.length,
            effective_area_m2: m.effective_area,
            extra_loss_per_m: m.extra_loss,
            quadrature: QuadratureKind::Adaptive,
            nodes: rydthz_core::doppler::DEFAULT_NODES,
            rel_tol: tolerance.rel,
            cutoff,
            panels,
            max_evaluations: tolerance.max_evaluations,
            ode_rtol: m.ode.rtol,
            ode_atol: m.ode.atol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorConfig {
    /// Converter efficiency used for the metrics; the model's linearized
    /// value at the configured point when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_qe: Option<f64>,
    pub eta_loss: f64,
    pub dark_rate_hz: f64,
    pub dead_time_s: f64,
    pub integration_time_s: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            eta_qe: None,
            eta_loss: 0.11,
            dark_rate_hz: 2000.0,
            dead_time_s: 32e-9,
            integration_time_s: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// Field whose detuning `spectrum` sweeps; `transmission` always sweeps A1.
    pub variable: String,
    pub start_over_2pi_hz: f64,
    pub stop_over_2pi_hz: f64,
    pub points: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            variable: "T".into(),
            start_over_2pi_hz: -40e6,
            stop_over_2pi_hz: 40e6,
            points: 81,
        }
    }
}

/// Logarithmic grid of injected `|Ω_T|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResponseConfig {
    pub start_rabi_over_2pi_hz: f64,
    pub stop_rabi_over_2pi_hz: f64,
    pub points: usize,
}

impl Default for ResponseConfig {
    fn default() -> Self {
        ResponseConfig {
            start_rabi_over_2pi_hz: 1e3,
            stop_rabi_over_2pi_hz: 1e9,
            points: 13,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BandwidthSweepConfig {
    /// A1 Rabi frequencies; each one gives a `spectrum` over the sweep grid.
    pub rabi_a1_over_2pi_hz: Vec<f64>,
}

impl Default for BandwidthSweepConfig {
    fn default() -> Self {
        BandwidthSweepConfig {
            rabi_a1_over_2pi_hz: [1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0]
                .map(|x| x * 1e6)
                .to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceConfig {
    Coherent,
    Thermal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhotonConfig {
    pub source: SourceConfig,
    pub rate_hz: f64,
    pub coherence_time_s: f64,
    pub duration_s: f64,
    /// Detection efficiency of each counter; dark rate and dead time come
    /// from `[detector]`.
    pub detection_efficiency: f64,
    pub bin_width_s: f64,
    pub tau_max_s: f64,
    /// Resolutions of the single-detector g²(0) estimate.
    pub resolutions_s: Vec<f64>,
}

impl Default for PhotonConfig {
    fn default() -> Self {
        PhotonConfig {
            source: SourceConfig::Coherent,
            rate_hz: 1e6,
            coherence_time_s: 1e-6,
            duration_s: 1.0,
            detection_efficiency: 1.0,
            bin_width_s: 20e-9,
            tau_max_s: 2e-6,
            resolutions_s: vec![16e-9, 32e-9, 64e-9, 128e-9, 256e-9],
        }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 1,
            scheme: SchemeConfig::default(),
            vapor: VaporConfig::default(),
            fields: FieldConfig::default(),
            medium: MediumConfig::default(),
            detector: DetectorConfig::default(),
            sweep: SweepConfig::default(),
            response: ResponseConfig::default(),
            bandwidth_sweep: BandwidthSweepConfig::default(),
            photon: PhotonConfig::default(),
        }
    }
}

/// Parses and validates a TOML document; missing keys take their defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let de = toml::Deserializer::parse(text).map_err(|e| ConfigError::new("<document>", e.to_string()))?;
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::new(path, e.into_inner().message().trim().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl ExperimentConfig {
    /// Complete TOML with every default written out.
    pub fn to_canonical_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable in TOML")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let s = &self.scheme;
        for (k, v) in [
            ("scheme.a1_hz", s.a1_hz),
            ("scheme.a2_hz", s.a2_hz),
            ("scheme.a3_hz", s.a3_hz),
            ("scheme.t_hz", s.t_hz),
            ("scheme.a4_hz", s.a4_hz),
        ] {
            positive(k, v)?;
        }
        for (i, d) in s.dipoles_cm.iter().enumerate() {
            positive(&format!("scheme.dipoles_cm[{i}]"), *d)?;
        }
        non_negative(
            "scheme.intermediate_decay_over_2pi_hz",
            s.intermediate_decay_over_2pi_hz,
        )?;
        non_negative("scheme.rydberg_decay_over_2pi_hz", s.rydberg_decay_over_2pi_hz)?;
        non_negative("scheme.rydberg_dephasing_over_2pi_hz", s.rydberg_dephasing_over_2pi_hz)?;
        self.level_scheme()
            .map_err(|e| ConfigError::new("scheme", e.to_string()))?;

        non_negative("vapor.temperature_k", self.vapor.temperature_k)?;
        non_negative("vapor.density_m3", self.vapor.density_m3)?;
        positive("vapor.mass_amu", self.vapor.mass_amu)?;

        let f = &self.fields;
        for (i, r) in f.rabi_over_2pi_hz.iter().enumerate() {
            non_negative(&format!("fields.rabi_over_2pi_hz[{i}]"), *r)?;
        }
        for (i, p) in f.phase_rad.iter().enumerate() {
            finite(&format!("fields.phase_rad[{i}]"), *p)?;
        }
        for (i, d) in f.detuning_over_2pi_hz.iter().enumerate() {
            finite(&format!("fields.detuning_over_2pi_hz[{i}]"), *d)?;
        }
        for (i, dir) in f.directions.iter().enumerate() {
            let n2: f64 = dir.iter().map(|x| x * x).sum();
            if !((n2 - 1.0).abs() <= 1e-9) {
                return Err(ConfigError::new(
                    format!("fields.directions[{i}]"),
                    "must be a unit vector",
                ));
            }
        }

        let m = &self.medium;
        non_negative("medium.length_m", m.length_m)?;
        positive("medium.effective_area_m2", m.effective_area_m2)?;
        for (i, l) in m.extra_loss_per_m.iter().enumerate() {
            non_negative(&format!("medium.extra_loss_per_m[{i}]"), *l)?;
        }
        if m.nodes == 0 {
            return Err(ConfigError::new("medium.nodes", "must be >= 1"));
        }
        positive("medium.rel_tol", m.rel_tol)?;
        positive("medium.cutoff", m.cutoff)?;
        if m.panels == 0 {
            return Err(ConfigError::new("medium.panels", "must be >= 1"));
        }
        if m.max_evaluations == 0 {
            return Err(ConfigError::new("medium.max_evaluations", "must be >= 1"));
        }
        positive("medium.ode_rtol", m.ode_rtol)?;
        positive("medium.ode_atol", m.ode_atol)?;

        let d = &self.detector;
        if let Some(e) = d.eta_qe {
            unit("detector.eta_qe", e)?;
        }
        unit("detector.eta_loss", d.eta_loss)?;
        non_negative("detector.dark_rate_hz", d.dark_rate_hz)?;
        non_negative("detector.dead_time_s", d.dead_time_s)?;
        positive("detector.integration_time_s", d.integration_time_s)?;

        let label = parse_label(&self.sweep.variable).ok_or_else(|| {
            ConfigError::new(
                "sweep.variable",
                format!("unknown field `{}`, expected A1, A2, A3, T or A4", self.sweep.variable),
            )
        })?;
        if label == FieldLabel::S {
            return Err(ConfigError::new(
                "sweep.variable",
                "the signal detuning cannot be swept",
            ));
        }
        finite("sweep.start_over_2pi_hz", self.sweep.start_over_2pi_hz)?;
        finite("sweep.stop_over_2pi_hz", self.sweep.stop_over_2pi_hz)?;
        if !(self.sweep.stop_over_2pi_hz > self.sweep.start_over_2pi_hz) {
            return Err(ConfigError::new(
                "sweep.stop_over_2pi_hz",
                "must exceed sweep.start_over_2pi_hz",
            ));
        }
        if self.sweep.points < 2 {
            return Err(ConfigError::new("sweep.points", "must be >= 2"));
        }

        let r = &self.response;
        positive("response.start_rabi_over_2pi_hz", r.start_rabi_over_2pi_hz)?;
        positive("response.stop_rabi_over_2pi_hz", r.stop_rabi_over_2pi_hz)?;
        if !(r.stop_rabi_over_2pi_hz > r.start_rabi_over_2pi_hz) {
            return Err(ConfigError::new(
                "response.stop_rabi_over_2pi_hz",
                "must exceed response.start_rabi_over_2pi_hz",
            ));
        }
        if r.points < 2 {
            return Err(ConfigError::new("response.points", "must be >= 2"));
        }

        let b = &self.bandwidth_sweep.rabi_a1_over_2pi_hz;
        if b.is_empty() {
            return Err(ConfigError::new(
                "bandwidth_sweep.rabi_a1_over_2pi_hz",
                "must not be empty",
            ));
        }
        for (i, x) in b.iter().enumerate() {
            positive(&format!("bandwidth_sweep.rabi_a1_over_2pi_hz[{i}]"), *x)?;
        }

        let p = &self.photon;
        non_negative("photon.rate_hz", p.rate_hz)?;
        positive("photon.coherence_time_s", p.coherence_time_s)?;
        non_negative("photon.duration_s", p.duration_s)?;
        unit("photon.detection_efficiency", p.detection_efficiency)?;
        positive("photon.bin_width_s", p.bin_width_s)?;
        if !(p.tau_max_s >= p.bin_width_s && p.tau_max_s.is_finite()) {
            return Err(ConfigError::new(
                "photon.tau_max_s",
                "must be finite and >= photon.bin_width_s",
            ));
        }
        for (i, x) in p.resolutions_s.iter().enumerate() {
            positive(&format!("photon.resolutions_s[{i}]"), *x)?;
        }
        Ok(())
    }

    pub fn level_scheme(&self) -> rydthz_core::Result<LevelScheme> {
        let s = &self.scheme;
        LevelScheme::six_wave_mixing(
            LoopFrequencies {
                a1: s.a1_hz,
                a2: s.a2_hz,
                a3: s.a3_hz,
                t: s.t_hz,
                a4: s.a4_hz,
            },
            s.dipoles_cm,
            RateSet {
                intermediate_decay: TWO_PI * s.intermediate_decay_over_2pi_hz,
                rydberg_decay: TWO_PI * s.rydberg_decay_over_2pi_hz,
                rydberg_dephasing: TWO_PI * s.rydberg_dephasing_over_2pi_hz,
            },
        )
    }

    pub fn vapor_spec(&self) -> rydthz_core::Result<VaporSpec> {
        VaporSpec::new(
            self.vapor.temperature_k,
            self.vapor.mass_amu * ATOMIC_MASS_UNIT,
            self.vapor.density_m3,
        )
    }

    pub fn field_set(&self, scheme: &LevelScheme) -> FieldSet {
        let f = &self.fields;
        let rabi: [Complex64; 6] =
            core::array::from_fn(|k| Complex64::from_polar(TWO_PI * f.rabi_over_2pi_hz[k], f.phase_rad[k]));
        let det = f.detuning_over_2pi_hz.map(|d| TWO_PI * d);
        let mut set = FieldSet::collinear(scheme, rabi, det);
        for (k, label) in FieldLabel::ALL.iter().enumerate() {
            set = set.with_direction(*label, f.directions[k]);
        }
        set
    }

    pub fn medium(&self) -> Medium {
        let m = &self.medium;
        let quadrature = match m.quadrature {
            QuadratureKind::GaussHermite => VelocityQuadrature::GaussHermite { nodes: m.nodes },
            QuadratureKind::Adaptive => VelocityQuadrature::Adaptive {
                tolerance: AdaptiveTolerance {
                    rel: m.rel_tol,
                    abs: 0.0,
                    max_evaluations: m.max_evaluations,
                },
                cutoff: m.cutoff,
                panels: m.panels,
            },
        };
        let defaults = Medium::default().ode;
        Medium {
            length: m.length_m,
            effective_area: m.effective_area_m2,
            extra_loss: m.extra_loss_per_m,
            quadrature,
            ode: OdeOptions {
                rtol: m.ode_rtol,
                atol: m.ode_atol,
                ..defaults
            },
        }
    }

    pub fn detector_spec(&self, eta_qe: f64) -> rydthz_core::Result<DetectorSpec> {
        let d = &self.detector;
        DetectorSpec::new(
            eta_qe,
            d.eta_loss,
            d.dark_rate_hz,
            d.dead_time_s,
            self.medium.effective_area_m2,
            self.scheme.t_hz,
        )
    }

    pub fn sweep_label(&self) -> FieldLabel {
        parse_label(&self.sweep.variable).expect("validated")
    }

    /// Uniform detuning grid, rad/s.
    pub fn sweep_grid(&self) -> Vec<f64> {
        let s = &self.sweep;
        let step = (s.stop_over_2pi_hz - s.start_over_2pi_hz) / (s.points - 1) as f64;
        (0..s.points)
            .map(|i| TWO_PI * (s.start_over_2pi_hz + i as f64 * step))
            .collect()
    }

    /// Logarithmic `|Ω_T|` grid, rad/s.
    pub fn response_grid(&self) -> Vec<f64> {
        let r = &self.response;
        let (a, b) = (r.start_rabi_over_2pi_hz.ln(), r.stop_rabi_over_2pi_hz.ln());
        let n = r.points - 1;
        (0..=n)
            .map(|i| TWO_PI * (a + (b - a) * i as f64 / n as f64).exp())
            .collect()
    }
}

pub fn parse_label(name: &str) -> Option<FieldLabel> {
    FieldLabel::ALL
        .into_iter()
        .find(|l| l.name().eq_ignore_ascii_case(name))
}

fn finite(key: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(key, "must be finite"))
    }
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(key, format!("must be > 0, got {v}")))
    }
}

fn non_negative(key: &str, v: f64) -> Result<(), ConfigError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(key, format!("must be >= 0, got {v}")))
    }
}

fn unit(key: &str, v: f64) -> Result<(), ConfigError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(ConfigError::new(key, format!("must lie in [0, 1], got {v}")))
    }
}
