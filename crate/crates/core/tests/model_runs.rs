//! End-to-end runs of the converter model on documented parameter sets.

use num_complex::Complex64;
use rydthz_core::consts::TWO_PI;
use rydthz_core::doppler::{doppler_average, doppler_average_with, ResonanceHints, VaporSpec, VelocityQuadrature};
use rydthz_core::levels::{
    fast_steady_state, resonance_velocities, resonance_width, FieldLabel, FieldSet, LevelScheme,
};
use rydthz_core::mixing::{
    conversion_efficiency, extract_bandwidth, nonlinear_response_curve, nonlinear_response_point, probe_transmission,
    signal_spectrum, transmission_spectrum, Medium, SpectrumShape,
};
use rydthz_core::quad::AdaptiveTolerance;

const MHZ: f64 = TWO_PI * 1e6;

fn c(x: f64) -> Complex64 {
    Complex64::new(x * MHZ, 0.0)
}

/// Resonant loop with a strong A2 and weak microwave and A4 drives.
fn bandwidth_fields(scheme: &LevelScheme, omega_1: f64) -> FieldSet {
    FieldSet::collinear(scheme, [c(omega_1), c(20.0), c(2.0), c(0.0), c(2.0), c(0.0)], [0.0; 5])
}

fn high_efficiency_fields(scheme: &LevelScheme) -> FieldSet {
    FieldSet::collinear(
        scheme,
        [c(30.0), c(100.0), c(100.0), c(0.0), c(100.0), c(0.0)],
        [-5.2 * MHZ, 2.0 * MHZ, 0.0, 0.0, 1.0 * MHZ],
    )
}

fn reference_fields(scheme: &LevelScheme) -> FieldSet {
    FieldSet::collinear(
        scheme,
        [c(8.0), c(6.0), c(12.0), c(0.0), c(10.0), c(0.0)],
        [-5.2 * MHZ, 2.0 * MHZ, 0.0, 0.0, 1.0 * MHZ],
    )
}

fn thz_grid() -> Vec<f64> {
    (0..81).map(|i| (-40.0 + i as f64) * MHZ).collect()
}

#[test]
fn weak_a1_gives_a_single_peak_and_strong_a1_splits_it() {
    let scheme = LevelScheme::rubidium_default();
    let vapor = VaporSpec::rubidium(393.0, 1e17).unwrap();
    let medium = Medium::default();
    let weak = signal_spectrum(
        &scheme,
        &bandwidth_fields(&scheme, 1.0),
        &vapor,
        &medium,
        FieldLabel::T,
        &thz_grid(),
    )
    .unwrap();
    assert_eq!(extract_bandwidth(&weak).unwrap().shape, SpectrumShape::Single);
    let strong = signal_spectrum(
        &scheme,
        &bandwidth_fields(&scheme, 6.0),
        &vapor,
        &medium,
        FieldLabel::T,
        &thz_grid(),
    )
    .unwrap();
    let b = extract_bandwidth(&strong).unwrap();
    assert_eq!(b.shape, SpectrumShape::SplitBeyondHalf);
    assert!(b.peak_separation.unwrap() > 0.5 * 6.0 * MHZ);
}

#[test]
fn splitting_grows_with_a1_power() {
    let scheme = LevelScheme::rubidium_default();
    let vapor = VaporSpec::rubidium(393.0, 1e17).unwrap();
    let medium = Medium::default();
    let mut last_fwhm = 0.0;
    let mut last_sep = 0.0;
    let mut shapes = Vec::new();
    for om in [1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0] {
        let t = signal_spectrum(
            &scheme,
            &bandwidth_fields(&scheme, om),
            &vapor,
            &medium,
            FieldLabel::T,
            &thz_grid(),
        )
        .unwrap();
        let b = extract_bandwidth(&t).unwrap();
        assert!(b.fwhm >= last_fwhm, "FWHM dropped at Ω1 = {om}");
        last_fwhm = b.fwhm;
        if let Some(sep) = b.peak_separation {
            assert!(sep >= last_sep, "separation dropped at Ω1 = {om}");
            last_sep = sep;
        }
        if shapes.last() != Some(&b.shape) {
            shapes.push(b.shape);
        }
    }
    assert_eq!(
        shapes,
        [
            SpectrumShape::Single,
            SpectrumShape::Split,
            SpectrumShape::SplitBeyondHalf
        ]
    );
}

#[test]
fn no_auxiliary_fields_no_signal() {
    let scheme = LevelScheme::rubidium_default();
    let vapor = VaporSpec::rubidium(393.0, 5e17).unwrap();
    let f = FieldSet::collinear(&scheme, [c(0.0); 6], [0.0; 5]);
    let grid: Vec<f64> = (0..11).map(|i| (i as f64 - 5.0) * MHZ).collect();
    let t = signal_spectrum(&scheme, &f, &vapor, &Medium::default(), FieldLabel::T, &grid).unwrap();
    assert!(t.points().iter().all(|p| p.1 == 0.0));
}

#[test]
fn documented_config_reaches_four_percent() {
    let scheme = LevelScheme::rubidium_default();
    let vapor = VaporSpec::rubidium(393.0, 5e17).unwrap();
    let eta = conversion_efficiency(&scheme, &high_efficiency_fields(&scheme), &vapor, &Medium::default()).unwrap();
    assert!(eta >= 0.04, "{eta}");
    assert!(eta <= 0.25);
}

#[test]
fn transmission_limits_and_eit() {
    let scheme = LevelScheme::rubidium_default();
    let medium = Medium::default();
    let probe_only = FieldSet::collinear(&scheme, [c(1.0), c(0.0), c(0.0), c(0.0), c(0.0), c(0.0)], [0.0; 5]);
    let empty = VaporSpec::rubidium(393.0, 0.0).unwrap();
    let grid: Vec<f64> = (0..5).map(|i| (i as f64 - 2.0) * 50.0 * MHZ).collect();
    let t = transmission_spectrum(&scheme, &probe_only, &empty, &medium, &grid).unwrap();
    assert!(t.points().iter().all(|p| p.1 == 1.0));

    let vapor = VaporSpec::rubidium(393.0, 1e16).unwrap();
    let dressed = probe_only.with_rabi(FieldLabel::A2, c(30.0));
    let off = probe_transmission(&scheme, &probe_only, &vapor, &medium).unwrap();
    let on = probe_transmission(&scheme, &dressed, &vapor, &medium).unwrap();
    assert!(off > 0.0 && off < 1.0);
    assert!(on > off, "A2 on {on} vs off {off}");

    let far = probe_only.with_detuning(&scheme, FieldLabel::A1, 2e4 * MHZ);
    let t_far = probe_transmission(&scheme, &far, &vapor, &medium).unwrap();
    assert!((1.0 - t_far) < 1e-3, "{t_far}");
}

#[test]
fn nonlinear_curve_is_linear_then_saturates() {
    let scheme = LevelScheme::rubidium_default();
    let vapor = VaporSpec::rubidium(393.0, 5e17).unwrap();
    let fields = high_efficiency_fields(&scheme);
    let medium = Medium::default();
    let grid: Vec<f64> = (0..7).map(|k| 1e4 * 8f64.powi(k)).collect();
    let curve = nonlinear_response_curve(&scheme, &fields, &vapor, &medium, &grid).unwrap();
    let p = curve.points();
    let ratio = (p[1].1 / p[0].1) / (p[1].0 / p[0].0);
    assert!((ratio - 1.0).abs() < 0.01, "{ratio}");
    let slopes: Vec<f64> = p
        .windows(2)
        .map(|w| (w[1].1 / w[0].1).ln() / (w[1].0 / w[0].0).ln())
        .collect();
    for w in slopes.windows(2) {
        assert!(w[1] <= w[0] + 1e-3, "{slopes:?}");
    }
    assert!(*slopes.last().unwrap() < 0.5, "{slopes:?}");

    let linear = conversion_efficiency(&scheme, &fields, &vapor, &medium).unwrap();
    let first = nonlinear_response_point(&scheme, &fields, &vapor, &medium, grid[0]).unwrap();
    assert!(
        (first.eta_qe / linear - 1.0).abs() < 0.02,
        "{} vs {linear}",
        first.eta_qe
    );
    let zero = nonlinear_response_point(&scheme, &fields, &vapor, &medium, 0.0).unwrap();
    assert_eq!(zero.rate_s, 0.0);
}

#[test]
fn frozen_vapor_reduces_to_the_resting_atom() {
    let scheme = LevelScheme::rubidium_default();
    let fields = reference_fields(&scheme);
    let f = |v: f64| -> rydthz_core::Result<Complex64> { Ok(fast_steady_state(&scheme, &fields, v)?.matrix()[1][0]) };
    let rest = f(0.0).unwrap();
    let hints = ResonanceHints {
        centers: resonance_velocities(&scheme, &fields),
        width: resonance_width(&scheme, &fields),
    };
    let deviation = |t: f64| {
        let vapor = VaporSpec::rubidium(t, 5e17).unwrap();
        let gh: Complex64 = doppler_average(f, &vapor, 64).unwrap();
        let ad: Complex64 = doppler_average_with(f, &vapor, &VelocityQuadrature::default(), &hints).unwrap();
        ((gh - rest).norm() / rest.norm(), (ad - rest).norm() / rest.norm())
    };
    for t in [0.0, 1e-15, 1e-12] {
        let (gh, ad) = deviation(t);
        assert!(gh <= 1e-10 && ad <= 1e-10, "T = {t}: {gh:e} {ad:e}");
    }
    // the residual is the u² curvature term, linear in T
    let (a, _) = deviation(1e-12);
    let (b, _) = deviation(1e-9);
    assert!((b / a / 1e3 - 1.0).abs() < 0.01, "{a:e} {b:e}");
}

#[test]
fn default_quadrature_is_converged() {
    let scheme = LevelScheme::rubidium_default();
    let fields = reference_fields(&scheme);
    let vapor = VaporSpec::rubidium(393.0, 5e17).unwrap();
    let hints = ResonanceHints {
        centers: resonance_velocities(&scheme, &fields),
        width: resonance_width(&scheme, &fields),
    };
    let f = |v: f64| -> rydthz_core::Result<Complex64> { Ok(fast_steady_state(&scheme, &fields, v)?.matrix()[1][0]) };
    let default: Complex64 = doppler_average_with(f, &vapor, &VelocityQuadrature::default(), &hints).unwrap();
    let VelocityQuadrature::Adaptive { cutoff, panels, .. } = VelocityQuadrature::default() else {
        panic!("default rule is adaptive");
    };
    let tight = VelocityQuadrature::Adaptive {
        tolerance: AdaptiveTolerance {
            rel: 1e-11,
            abs: 0.0,
            max_evaluations: 1_000_000,
        },
        cutoff,
        panels,
    };
    let refined: Complex64 = doppler_average_with(f, &vapor, &tight, &hints).unwrap();
    assert!((default - refined).norm() < 1e-6 * refined.norm());
}
