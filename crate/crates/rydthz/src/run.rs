//! The experiment commands. Each one maps a validated config to output
//! tables and a JSON summary; sweep points run on the rayon pool and are
//! collected in grid order, so results do not depend on the thread count.

use rayon::prelude::*;
use rydthz_core::consts::TWO_PI;
use rydthz_core::detector::{dynamic_range, nep, total_efficiency};
use rydthz_core::levels::FieldLabel;
use rydthz_core::mixing::{
    conversion_efficiency, eta_qe_analytic, extract_bandwidth, nonlinear_response_point, probe_transmission, Abscissa,
    Bandwidth, MixingConfig, Ordinate, SpectrumTrace,
};
use rydthz_core::photon::{detect, g2_cross, g2_single_autocorr, gen_coherent, gen_thermal, hbt_split, PhotonStream};
use rydthz_core::Complex64;
use serde_json::{json, Value};

use crate::config::{ConfigError, ExperimentConfig, SourceConfig};
use crate::output::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Spectrum,
    Transmission,
    Efficiency,
    Response,
    Metrics,
    G2,
    BandwidthSweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Transmission => "transmission",
            Command::Efficiency => "efficiency",
            Command::Response => "response",
            Command::Metrics => "metrics",
            Command::G2 => "g2",
            Command::BandwidthSweep => "bandwidth-sweep",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),

    #[error("{command}{}: {source}", point.as_ref().map(|p| format!(" at {p}")).unwrap_or_default())]
    Model {
        command: &'static str,
        point: Option<String>,
        source: rydthz_core::Error,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    /// 0 success, 1 i/o, 2 configuration, 3 physics or solver, 4 insufficient data.
    pub fn exit_code(&self) -> i32 {
        use rydthz_core::Error as E;
        match self {
            RunError::Io(_) => 1,
            RunError::Config(_) => 2,
            RunError::Model { source, .. } => match source {
                E::Config(_) | E::LoopConfiguration(_) => 2,
                E::EmptyStream | E::InsufficientData { .. } | E::BelowNoise => 4,
                _ => 3,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub tables: Vec<Table>,
    pub summary: Value,
}

struct Ctx<'a> {
    command: &'static str,
    cfg: &'a ExperimentConfig,
}

impl Ctx<'_> {
    fn err(&self, point: Option<String>) -> impl FnOnce(rydthz_core::Error) -> RunError + '_ {
        move |source| RunError::Model {
            command: self.command,
            point,
            source,
        }
    }
}

/// First error in grid order, so the report is independent of scheduling.
fn collect_ordered<T>(items: Vec<Result<T, RunError>>) -> Result<Vec<T>, RunError> {
    items.into_iter().collect()
}

pub fn run_experiment(cfg: &ExperimentConfig, command: Command) -> Result<RunOutput, RunError> {
    cfg.validate()?;
    let ctx = Ctx {
        command: command.name(),
        cfg,
    };
    match command {
        Command::Spectrum => spectrum(&ctx),
        Command::Transmission => transmission(&ctx),
        Command::Efficiency => efficiency(&ctx),
        Command::Response => response(&ctx),
        Command::Metrics => metrics(&ctx),
        Command::G2 => g2(&ctx),
        Command::BandwidthSweep => bandwidth_sweep(&ctx),
    }
}

fn hz(omega: f64) -> f64 {
    omega / TWO_PI
}

fn bandwidth_json(b: &Result<Bandwidth, rydthz_core::Error>) -> Value {
    match b {
        Ok(b) => json!({
            "fwhm_over_2pi_hz": hz(b.fwhm),
            "shape": b.shape.name(),
            "peak_separation_over_2pi_hz": b.peak_separation.map(hz),
            "maximum": b.maximum,
        }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn efficiency_trace(ctx: &Ctx, label: FieldLabel, omega_1: Option<f64>) -> Result<SpectrumTrace, RunError> {
    let cfg = ctx.cfg;
    let scheme = cfg.level_scheme().map_err(ctx.err(None))?;
    let vapor = cfg.vapor_spec().map_err(ctx.err(None))?;
    let medium = cfg.medium();
    let mut base = cfg.field_set(&scheme);
    if let Some(om) = omega_1 {
        let phase = Complex64::from_polar(1.0, cfg.fields.phase_rad[0]);
        base = base.with_rabi(FieldLabel::A1, phase * om);
    }
    let grid = cfg.sweep_grid();
    let points = grid
        .par_iter()
        .map(|&d| {
            let f = base.with_detuning(&scheme, label, d);
            let point = || {
                let mut p = format!("{} detuning {} Hz (over 2pi)", label.name(), hz(d));
                if let Some(om) = omega_1 {
                    p = format!("A1 Rabi {} Hz (over 2pi), {p}", hz(om));
                }
                p
            };
            conversion_efficiency(&scheme, &f, &vapor, &medium)
                .map(|eta| (d, eta))
                .map_err(|e| ctx.err(Some(point()))(e))
        })
        .collect();
    let pts = collect_ordered(points)?;
    SpectrumTrace::new(Abscissa::Detuning(label), Ordinate::Efficiency, pts).map_err(ctx.err(None))
}

fn spectrum(ctx: &Ctx) -> Result<RunOutput, RunError> {
    let label = ctx.cfg.sweep_label();
    let trace = efficiency_trace(ctx, label, None)?;
    let col = format!("detuning_{}_over_2pi_hz", label.name());
    let mut t = Table::new(
        "spectrum.csv",
        "linearized conversion efficiency versus detuning",
        &[(col.as_str(), "Hz"), ("eta_qe", "dimensionless")],
    );
    for &(d, eta) in trace.points() {
        t.push(vec![hz(d).into(), eta.into()]);
    }
    let (d_max, eta_max) = trace
        .points()
        .iter()
        .copied()
        .fold((f64::NAN, f64::NEG_INFINITY), |b, p| if p.1 > b.1 { p } else { b });
    let summary = json!({
        "command": ctx.command,
        "sweep_variable": label.name(),
        "eta_qe": eta_max,
        "detuning_at_max_over_2pi_hz": hz(d_max),
        "bandwidth": bandwidth_json(&extract_bandwidth(&trace)),
    });
    Ok(RunOutput {
        tables: vec![t],
        summary,
    })
}

fn transmission(ctx: &Ctx) -> Result<RunOutput, RunError> {
    let cfg = ctx.cfg;
    let scheme = cfg.level_scheme().map_err(ctx.err(None))?;
    let vapor = cfg.vapor_spec().map_err(ctx.err(None))?;
    let medium = cfg.medium();
    let base = cfg.field_set(&scheme);
    let grid = cfg.sweep_grid();
    let points = grid
        .par_iter()
        .map(|&d| {
            let f = base.with_detuning(&scheme, FieldLabel::A1, d);
            probe_transmission(&scheme, &f, &vapor, &medium)
                .map(|t| (d, t))
                .map_err(|e| ctx.err(Some(format!("A1 detuning {} Hz (over 2pi)", hz(d))))(e))
        })
        .collect();
    let pts = collect_ordered(points)?;
    let mut t = Table::new(
        "transmission.csv",
        "Doppler-averaged A1 transmission versus A1 detuning",
        &[("detuning_A1_over_2pi_hz", "Hz"), ("transmission", "dimensionless")],
    );
    for &(d, tr) in &pts {
        t.push(vec![hz(d).into(), tr.into()]);
    }
    let min = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let max = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let summary = json!({
        "command": ctx.command,
        "transmission_min": min,
        "transmission_max": max,
    });
    Ok(RunOutput {
        tables: vec![t],
        summary,
    })
}

fn model_efficiency(ctx: &Ctx) -> Result<(f64, MixingConfig), RunError> {
    let cfg = ctx.cfg;
    let scheme = cfg.level_scheme().map_err(ctx.err(None))?;
    let vapor = cfg.vapor_spec().map_err(ctx.err(None))?;
    let medium = cfg.medium();
    let fields = cfg.field_set(&scheme);
    let eta = conversion_efficiency(&scheme, &fields, &vapor, &medium).map_err(ctx.err(None))?;
    let mix =
        MixingConfig::from_model(&scheme, &fields, &vapor, medium.length, medium.extra_loss).map_err(ctx.err(None))?;
    Ok((eta, mix))
}

fn efficiency(ctx: &Ctx) -> Result<RunOutput, RunError> {
    let (eta, mix) = model_efficiency(ctx)?;
    let closed = eta_qe_analytic(&mix).map_err(ctx.err(None))?;
    let alpha_l = mix.alpha_bar().map_err(ctx.err(None))? * mix.length;
    let total = total_efficiency(eta.min(1.0), ctx.cfg.detector.eta_loss).map_err(ctx.err(None))?;
    let mut t = Table::new(
        "efficiency.csv",
        "conversion efficiency at the configured point",
        &[
            ("eta_qe", "dimensionless"),
            ("eta_qe_closed_form", "dimensionless"),
            ("alpha_bar_l", "dimensionless"),
            ("gamma_th_over_2pi_hz", "Hz"),
            ("delta_k", "rad/m"),
            ("eta_total", "dimensionless"),
        ],
    );
    t.push(vec![
        eta.into(),
        closed.into(),
        alpha_l.into(),
        hz(mix.gamma_th).into(),
        mix.delta_k.into(),
        total.into(),
    ]);
    let summary = json!({
        "command": ctx.command,
        "eta_qe": eta,
        "eta_qe_closed_form": closed,
        "alpha_bar_l": alpha_l,
        "eta_total": total,
    });
    Ok(RunOutput {
        tables: vec![t],
        summary,
    })
}

fn response(ctx: &Ctx) -> Result<RunOutput, RunError> {
    let cfg = ctx.cfg;
    let scheme = cfg.level_scheme().map_err(ctx.err(None))?;
    let vapor = cfg.vapor_spec().map_err(ctx.err(None))?;
    let medium = cfg.medium();
    let fields = cfg.field_set(&scheme);
    let grid = cfg.response_grid();
    let points = grid
        .par_iter()
        .map(|&om| {
            nonlinear_response_point(&scheme, &fields, &vapor, &medium, om)
                .map_err(|e| ctx.err(Some(format!("T Rabi {} Hz (over 2pi)", hz(om))))(e))
        })
        .collect();
    let pts = collect_ordered(points)?;
    let mut t = Table::new(
        "response.csv",
        "non-perturbative signal rate versus THz input",
        &[
            ("rabi_T_over_2pi_hz", "Hz"),
            ("intensity_t", "W/m^2"),
            ("rate_t", "photons/s"),
            ("rate_s", "photons/s"),
            ("eta_qe", "dimensionless"),
        ],
    );
    for p in &pts {
        t.push(vec![
            hz(p.omega_t).into(),
            p.intensity.into(),
            p.rate_t.into(),
            p.rate_s.into(),
            p.eta_qe.into(),
        ]);
    }
    let curve = SpectrumTrace::new(
        Abscissa::ThzIntensity,
        Ordinate::SignalRate,
        pts.iter().map(|p| (p.intensity, p.rate_s)).collect(),
    )
    .map_err(ctx.err(None))?;
    let spec = cfg
        .detector_spec(pts[0].eta_qe.clamp(0.0, 1.0))
        .map_err(ctx.err(None))?;
    let dr = match dynamic_range(&curve, &spec, cfg.detector.integration_time_s) {
        Ok(d) => json!({
            "db": d.db,
            "intensity_min": d.i_min,
            "intensity_max": d.i_max,
            "plateau_eta_qe": d.plateau,
        }),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let summary = json!({
        "command": ctx.command,
        "eta_qe": pts[0].eta_qe,
        "dynamic_range": dr,
    });
    Ok(RunOutput {
        tables: vec![t],
        summary,
    })
}

fn metrics(ctx: &Ctx) -> Result<RunOutput, RunError> {
    let cfg = ctx.cfg;
    let (eta_qe, source) = match cfg.detector.eta_qe {
        Some(e) => (e, "configured"),
        None => (model_efficiency(ctx)?.0.min(1.0), "model"),
    };
    let spec = cfg.detector_spec(eta_qe).map_err(ctx.err(None))?;
    let eta = total_efficiency(eta_qe, spec.eta_loss).map_err(ctx.err(None))?;
    let nep = nep(&spec, eta).map_err(ctx.err(None))?;
    let mut t = Table::new(
        "metrics.csv",
        "detector figures of merit",
        &[
            ("eta_qe", "dimensionless"),
            ("eta_loss", "dimensionless"),
            ("eta_total", "dimensionless"),
            ("dark_rate", "counts/s"),
            ("thz_frequency", "Hz"),
            ("nep", "W/Hz^0.5"),
        ],
    );
    t.push(vec![
        eta_qe.into(),
        spec.eta_loss.into(),
        eta.into(),
        spec.dark_rate.into(),
        spec.thz_frequency.into(),
        nep.into(),
    ]);
    let summary = json!({
        "command": ctx.command,
        "eta_qe": eta_qe,
        "eta_qe_source": source,
        "eta_total": eta,
        "nep": nep,
    });
    Ok(RunOutput {
        tables: vec![t],
        summary,
    })
}

/// Distinct per-operation seeds derived from the run seed.
fn derive_seed(seed: u64, op: u64) -> u64 {
    seed.wrapping_add(op.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn g2(ctx: &Ctx) -> Result<RunOutput, RunError> {
    let cfg = ctx.cfg;
    let p = &cfg.photon;
    let d = &cfg.detector;
    let seed = cfg.seed;
    let source: PhotonStream = match p.source {
        SourceConfig::Coherent => gen_coherent(p.rate_hz, p.duration_s, derive_seed(seed, 0)),
        SourceConfig::Thermal => gen_thermal(p.rate_hz, p.coherence_time_s, p.duration_s, derive_seed(seed, 0)),
    }
    .map_err(ctx.err(Some("source".into())))?;
    let (a, b) = hbt_split(&source, derive_seed(seed, 1));
    let chain = |s: &PhotonStream, op: u64| {
        detect(
            s,
            p.detection_efficiency,
            d.dark_rate_hz,
            d.dead_time_s,
            derive_seed(seed, op),
        )
    };
    let a = chain(&a, 2).map_err(ctx.err(Some("HBT arm A".into())))?;
    let b = chain(&b, 3).map_err(ctx.err(Some("HBT arm B".into())))?;
    let hist = g2_cross(&a, &b, p.bin_width_s, p.tau_max_s).map_err(ctx.err(Some("HBT histogram".into())))?;

    let single = chain(&source, 4).map_err(ctx.err(Some("single detector".into())))?;
    let estimates = p
        .resolutions_s
        .par_iter()
        .map(|&r| {
            g2_single_autocorr(&single, r)
                .map(|e| (r, e))
                .map_err(|e| ctx.err(Some(format!("resolution {r} s")))(e))
        })
        .collect();
    let estimates = collect_ordered(estimates)?;

    let mut th = Table::new(
        "g2.csv",
        "HBT cross-correlation histogram",
        &[("tau", "s"), ("pair_counts", "counts"), ("g2", "dimensionless")],
    );
    for ((tau, &n), &g) in hist.centers().zip(&hist.counts).zip(&hist.g2) {
        th.push(vec![tau.into(), n.into(), g.into()]);
    }
    let mut ts = Table::new(
        "g2_single.csv",
        "single-detector g2(0) versus resolution time",
        &[
            ("resolution", "s"),
            ("g2_raw", "dimensionless"),
            ("g2_dead_time_corrected", "dimensionless (nan when undefined)"),
            ("occupied_bins", "count"),
        ],
    );
    for (r, e) in &estimates {
        ts.push(vec![
            (*r).into(),
            e.raw.into(),
            Cell::from(e.corrected),
            e.occupied.into(),
        ]);
    }
    let summary = json!({
        "command": ctx.command,
        "source": match p.source { SourceConfig::Coherent => "coherent", SourceConfig::Thermal => "thermal" },
        "g2_zero": hist.g2_at(0.0),
        "counts_a": hist.n_a,
        "counts_b": hist.n_b,
        "single_detector": estimates.iter().map(|(r, e)| json!({
            "resolution_s": r,
            "g2_raw": e.raw,
            "g2_corrected": e.corrected,
        })).collect::<Vec<_>>(),
    });
    Ok(RunOutput {
        tables: vec![th, ts],
        summary,
    })
}

fn bandwidth_sweep(ctx: &Ctx) -> Result<RunOutput, RunError> {
    let cfg = ctx.cfg;
    let label = cfg.sweep_label();
    let rabis: Vec<f64> = cfg
        .bandwidth_sweep
        .rabi_a1_over_2pi_hz
        .iter()
        .map(|r| TWO_PI * r)
        .collect();
    let traces = rabis
        .iter()
        .map(|&om| efficiency_trace(ctx, label, Some(om)))
        .collect::<Result<Vec<_>, _>>()?;
    let col = format!("detuning_{}_over_2pi_hz", label.name());
    let mut spectra = Table::new(
        "bandwidth_spectra.csv",
        "linearized conversion efficiency for each A1 Rabi frequency",
        &[
            ("rabi_A1_over_2pi_hz", "Hz"),
            (col.as_str(), "Hz"),
            ("eta_qe", "dimensionless"),
        ],
    );
    let mut widths = Table::new(
        "bandwidth_sweep.csv",
        "bandwidth and peak shape versus A1 Rabi frequency",
        &[
            ("rabi_A1_over_2pi_hz", "Hz"),
            ("fwhm_over_2pi_hz", "Hz"),
            ("peak_separation_over_2pi_hz", "Hz (nan for a single peak)"),
            ("eta_qe_max", "dimensionless"),
            ("shape", "single | split | split-beyond-half"),
        ],
    );
    let mut rows = Vec::new();
    for (&om, trace) in rabis.iter().zip(&traces) {
        for &(d, eta) in trace.points() {
            spectra.push(vec![hz(om).into(), hz(d).into(), eta.into()]);
        }
        let b = extract_bandwidth(trace).map_err(|e| ctx.err(Some(format!("A1 Rabi {} Hz (over 2pi)", hz(om))))(e))?;
        widths.push(vec![
            hz(om).into(),
            hz(b.fwhm).into(),
            b.peak_separation.map(hz).into(),
            b.maximum.into(),
            b.shape.name().into(),
        ]);
        rows.push((om, b));
    }
    let monotone = rows.windows(2).all(|w| w[1].1.fwhm >= w[0].1.fwhm);
    let mut progression: Vec<&str> = Vec::new();
    for (_, b) in &rows {
        if progression.last() != Some(&b.shape.name()) {
            progression.push(b.shape.name());
        }
    }
    let summary = json!({
        "command": ctx.command,
        "fwhm_over_2pi_hz": rows.iter().map(|r| hz(r.1.fwhm)).collect::<Vec<_>>(),
        "shapes": rows.iter().map(|r| r.1.shape.name()).collect::<Vec<_>>(),
        "shape_progression": progression,
        "fwhm_nondecreasing": monotone,
    });
    Ok(RunOutput {
        tables: vec![widths, spectra],
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn exit_codes_follow_the_error_class() {
        let m = |source| RunError::Model {
            command: "g2",
            point: None,
            source,
        };
        assert_eq!(m(rydthz_core::Error::EmptyStream).exit_code(), 4);
        assert_eq!(
            m(rydthz_core::Error::InsufficientData {
                occupied: 3,
                required: 100
            })
            .exit_code(),
            4
        );
        assert_eq!(m(rydthz_core::Error::Solver("x".into())).exit_code(), 3);
        assert_eq!(m(rydthz_core::Error::Config("x".into())).exit_code(), 2);
        let e = parse_config("[vapor]\ntemperature_k = -3.0").unwrap_err();
        assert_eq!(RunError::from(e).exit_code(), 2);
    }

    #[test]
    fn errors_name_the_command_and_point() {
        let e = RunError::Model {
            command: "spectrum",
            point: Some("T detuning 1 Hz (over 2pi)".into()),
            source: rydthz_core::Error::Solver("stalled".into()),
        };
        let s = e.to_string();
        assert!(s.starts_with("spectrum at T detuning 1 Hz"), "{s}");
    }

    #[test]
    fn metrics_with_a_fixed_efficiency() {
        let cfg = parse_config("[detector]\neta_qe = 0.043\n").unwrap();
        let out = run_experiment(&cfg, Command::Metrics).unwrap();
        let nep = out.summary["nep"].as_f64().unwrap();
        assert!((nep / 9.5e-19 - 1.0).abs() < 0.02, "{nep:e}");
    }

    #[test]
    fn g2_zero_duration_is_an_empty_stream() {
        let cfg = parse_config("[photon]\nduration_s = 0.0\n").unwrap();
        let e = run_experiment(&cfg, Command::G2).unwrap_err();
        assert!(matches!(
            e,
            RunError::Model {
                source: rydthz_core::Error::EmptyStream,
                ..
            }
        ));
        assert_ne!(e.exit_code(), 0);
    }

    #[test]
    fn derived_seeds_differ() {
        let s: Vec<u64> = (0..5).map(|k| derive_seed(42, k)).collect();
        for i in 0..5 {
            for j in 0..i {
                assert_ne!(s[i], s[j]);
            }
        }
    }
}
