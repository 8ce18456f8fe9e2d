use num_complex::Complex64;
use proptest::prelude::*;
use rydthz_core::consts::TWO_PI;
use rydthz_core::detector::{dynamic_range, nep, thz_count_rate, thz_intensity_for_rate, DetectorSpec};
use rydthz_core::doppler::VaporSpec;
use rydthz_core::levels::{solve_at_velocity, FieldLabel, FieldSet, LevelScheme};
use rydthz_core::mixing::{
    coupled_mode_propagate, eta_qe_analytic, extract_bandwidth, linear_response_coefficients, Abscissa, MixingConfig,
    Ordinate, SpectrumTrace,
};
use rydthz_core::photon::{detect, g2_single_autocorr, gen_coherent, gen_thermal};

const MHZ: f64 = TWO_PI * 1e6;

fn rabi() -> impl Strategy<Value = Complex64> {
    (0.0..25.0f64, 0.0..TWO_PI).prop_map(|(m, p)| Complex64::from_polar(m * MHZ, p))
}

fn field_set() -> impl Strategy<Value = (FieldSet, f64)> {
    (
        proptest::array::uniform6(rabi()),
        proptest::array::uniform5(-30.0..30.0f64),
        -500.0..500.0f64,
    )
        .prop_map(|(r, d, v)| {
            let scheme = LevelScheme::rubidium_default();
            (FieldSet::collinear(&scheme, r, d.map(|x| x * MHZ)), v)
        })
}

fn max_dev(a: &[[Complex64; 6]; 6], b: &[[Complex64; 6]; 6]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn steady_states_are_density_matrices((fields, v) in field_set()) {
        let scheme = LevelScheme::rubidium_default();
        let rho = solve_at_velocity(&scheme, &fields, v).unwrap();
        prop_assert!(rho.hermiticity_error() <= 1e-10);
        prop_assert!((rho.trace() - Complex64::new(1.0, 0.0)).norm() <= 1e-10);
        prop_assert!(rho.eigenvalues().unwrap()[0] >= -1e-8);
        for k in 0..6 {
            prop_assert!((-1e-10..=1.0 + 1e-10).contains(&rho.population(k)));
        }
    }

    /// Rephasing the fields by level phases θ (loop phase unchanged) maps the
    /// steady state to `U ρ U†`, `U = diag(e^{iθ})`.
    #[test]
    fn level_rephasing_is_a_gauge((fields, v) in field_set(), theta in proptest::array::uniform6(0.0..TWO_PI)) {
        let scheme = LevelScheme::rubidium_default();
        let mut moved = fields.clone();
        for label in FieldLabel::ALL {
            let t = scheme.transition(label);
            let r = fields.get(label).rabi * Complex64::from_polar(1.0, theta[t.upper] - theta[t.lower]);
            moved = moved.with_rabi(label, r);
        }
        let wrap = |x: f64| x.rem_euclid(TWO_PI);
        let dl = wrap(moved.loop_phase() - fields.loop_phase());
        prop_assert!(dl.min(TWO_PI - dl) < 1e-9);
        let a = solve_at_velocity(&scheme, &fields, v).unwrap();
        let b = solve_at_velocity(&scheme, &moved, v).unwrap();
        let mut expect = *a.matrix();
        for i in 0..6 {
            for j in 0..6 {
                expect[i][j] *= Complex64::from_polar(1.0, theta[i] - theta[j]);
            }
        }
        prop_assert!(max_dev(&expect, b.matrix()) < 1e-9);
    }

    /// With the signal field off the loop is open and any phase of A1 is a
    /// gauge: populations do not move.
    #[test]
    fn open_loop_populations_ignore_the_loop_phase((fields, v) in field_set(), phi in 0.0..TWO_PI) {
        let scheme = LevelScheme::rubidium_default();
        let open = fields.with_rabi(FieldLabel::S, Complex64::new(0.0, 0.0));
        let a1 = open.get(FieldLabel::A1).rabi;
        let shifted = open.with_rabi(FieldLabel::A1, a1 * Complex64::from_polar(1.0, phi));
        let a = solve_at_velocity(&scheme, &open, v).unwrap();
        let b = solve_at_velocity(&scheme, &shifted, v).unwrap();
        for k in 0..6 {
            prop_assert!((a.population(k) - b.population(k)).abs() < 1e-9);
        }
    }

    #[test]
    fn no_thz_no_signal_coherence((fields, v) in field_set()) {
        let scheme = LevelScheme::rubidium_default();
        let f = fields
            .with_rabi(FieldLabel::T, Complex64::new(0.0, 0.0))
            .with_rabi(FieldLabel::S, Complex64::new(0.0, 0.0));
        let rho = solve_at_velocity(&scheme, &f, v).unwrap();
        prop_assert!(rho.matrix()[5][0].norm() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn closed_form_never_exceeds_a_quarter(log_ratio in -3.0..3.0f64, alpha_l in 1e-3..200.0f64) {
        let r = 10f64.powf(log_ratio);
        let length = 5e-3;
        let gamma = 2.2e9;
        let g_s = (alpha_l / length * 299_792_458.0 * gamma / (2.0 * (1.0 + r * r))).sqrt();
        let cfg = MixingConfig::synthetic(g_s, g_s, 1.0, r, length, gamma).unwrap();
        let eta = eta_qe_analytic(&cfg).unwrap();
        prop_assert!((0.0..=0.25).contains(&eta));
        // same ᾱ with G_S = G_T is never worse
        let matched = MixingConfig::synthetic(g_s * ((1.0 + r * r) / 2.0).sqrt(), g_s, 1.0, 1.0, length, gamma).unwrap();
        prop_assert!((matched.alpha_bar().unwrap() / cfg.alpha_bar().unwrap() - 1.0).abs() < 1e-12);
        prop_assert!(eta_qe_analytic(&matched).unwrap() >= eta);
        let longer = MixingConfig { length: 2.0 * length, ..cfg.clone() };
        prop_assert!(eta_qe_analytic(&longer).unwrap() >= eta);
    }

    #[test]
    fn nep_is_monotone(eta in 1e-4..0.5f64, d in 1.0..1e5f64, f in 1.01..3.0f64) {
        let spec = |d| DetectorSpec::new(0.05, 0.1, d, 0.0, 1e-6, 0.107e12).unwrap();
        prop_assert!(nep(&spec(d), eta * f).unwrap() < nep(&spec(d), eta).unwrap());
        prop_assert!(nep(&spec(d * f), eta).unwrap() > nep(&spec(d), eta).unwrap());
    }

    #[test]
    fn count_rate_round_trip(i in 1e-15..1e3f64, area in 1e-8..1e-3f64, nu in 1e11..1e13f64) {
        let spec = DetectorSpec::new(0.05, 0.1, 0.0, 0.0, area, nu).unwrap();
        let r = thz_count_rate(i, &spec);
        prop_assert!((thz_intensity_for_rate(r, &spec) / i - 1.0).abs() < 1e-14);
    }

    #[test]
    fn bandwidth_ignores_ordinate_scale(c1 in -5.0..0.0f64, c2 in 0.5..5.0f64, w in 0.3..2.0f64, k in 1e-6..1e6f64) {
        let pts: Vec<(f64, f64)> = (0..401)
            .map(|i| {
                let x = -20.0 + 0.1 * i as f64;
                let l = |c: f64| w * w / ((x - c) * (x - c) + w * w);
                (x, l(c1) + 0.7 * l(c2))
            })
            .collect();
        let t = SpectrumTrace::new(Abscissa::Detuning(FieldLabel::T), Ordinate::Efficiency, pts).unwrap();
        let a = extract_bandwidth(&t).unwrap();
        let b = extract_bandwidth(&t.scaled(k).unwrap()).unwrap();
        prop_assert_eq!(a.shape, b.shape);
        prop_assert!((a.fwhm - b.fwhm).abs() <= 1e-12 * a.fwhm);
    }

    #[test]
    fn dynamic_range_ignores_intensity_units(k in 1e-3..1e3f64) {
        let spec = DetectorSpec::new(0.05, 0.11, 2000.0, 32e-9, 1e-6, 0.107e12).unwrap();
        let curve = |scale: f64| {
            let pts: Vec<(f64, f64)> = (0..121)
                .map(|n| {
                    let i = 1e-16 * 10f64.powf(n as f64 / 10.0);
                    let r_t = thz_count_rate(i, &spec);
                    (i * scale, 0.05 * r_t / (1.0 + r_t / 1e8))
                })
                .collect();
            SpectrumTrace::new(Abscissa::ThzIntensity, Ordinate::SignalRate, pts).unwrap()
        };
        let relabeled = DetectorSpec { effective_area: spec.effective_area / k, ..spec };
        let a = dynamic_range(&curve(1.0), &spec, 1.0).unwrap();
        let b = dynamic_range(&curve(k), &relabeled, 1.0).unwrap();
        prop_assert!((a.db - b.db).abs() < 1e-9, "{} vs {}", a.db, b.db);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn linearized_propagation_is_passive(
        r in proptest::array::uniform6(rabi()),
        d in proptest::array::uniform5(-30.0..30.0f64),
        density in 1e15..1e18f64,
        length in 1e-4..2e-2f64,
    ) {
        let scheme = LevelScheme::rubidium_default();
        let fields = FieldSet::collinear(&scheme, r, d.map(|x| x * MHZ));
        let vapor = VaporSpec::rubidium(393.0, density).unwrap();
        let beta = linear_response_coefficients(&scheme, &fields, &vapor).unwrap();
        let cfg = MixingConfig::from_model(&scheme, &fields, &vapor, length, [0.0, 0.0]).unwrap();
        let out = coupled_mode_propagate(&beta, &cfg, 1.0).unwrap();
        let flux = out.a_s.norm_sqr() + out.a_t.norm_sqr();
        prop_assert!(flux <= 1.0 + 1e-9, "flux {}", flux);
        prop_assert!((0.0..=1.0).contains(&out.eta_qe));
    }

    #[test]
    fn dead_time_spacing_is_enforced(
        rate in 1e5..5e7f64,
        eta in 0.05..1.0f64,
        dark in 0.0..1e5f64,
        tau in 1e-9..1e-7f64,
        seed in any::<u64>(),
    ) {
        let s = gen_coherent(rate, 2e-3, seed).unwrap();
        let d = detect(&s, eta, dark, tau, seed ^ 1).unwrap();
        prop_assert!(d.times().windows(2).all(|w| w[1] - w[0] >= tau));
        prop_assert!(d.times().iter().all(|&t| (0.0..=d.duration()).contains(&t)));
    }

    #[test]
    fn streams_are_bit_reproducible(rate in 1e3..1e6f64, tau_c in 1e-7..1e-5f64, seed in any::<u64>()) {
        prop_assert_eq!(gen_coherent(rate, 1e-2, seed).unwrap(), gen_coherent(rate, 1e-2, seed).unwrap());
        prop_assert_eq!(gen_thermal(rate, tau_c, 1e-2, seed).unwrap(), gen_thermal(rate, tau_c, 1e-2, seed).unwrap());
        let s = gen_coherent(rate, 1e-2, seed).unwrap();
        prop_assert_eq!(detect(&s, 0.5, 100.0, 1e-8, 3).unwrap(), detect(&s, 0.5, 100.0, 1e-8, 3).unwrap());
    }

    /// Classical light is never antibunched beyond statistical error.
    #[test]
    fn classical_streams_are_not_antibunched(seed in any::<u64>(), thermal in any::<bool>()) {
        let (rate, res) = (1e6, 100e-9);
        let s = if thermal {
            gen_thermal(rate, 1e-6, 0.2, seed).unwrap()
        } else {
            gen_coherent(rate, 0.2, seed).unwrap()
        };
        let g = g2_single_autocorr(&s, res).unwrap();
        // Poisson standard error of ⟨n(n−1)⟩/⟨n⟩² over B bins
        let mean = rate * res;
        let se = (2.0 / (g.bins as f64 * mean * mean)).sqrt();
        prop_assert!(g.raw >= 1.0 - 3.0 * se, "g2 {} se {}", g.raw, se);
    }
}

#[test]
fn closed_loop_populations_depend_on_the_loop_phase() {
    let scheme = LevelScheme::rubidium_default();
    let c = |x: f64| Complex64::new(x * MHZ, 0.0);
    let f = FieldSet::collinear(
        &scheme,
        [c(8.0), c(6.0), c(12.0), c(2.0), c(10.0), c(3.0)],
        [-5.2 * MHZ, 2.0 * MHZ, 0.0, 0.0, 1.0 * MHZ],
    );
    let g = f.with_rabi(FieldLabel::A1, Complex64::from_polar(8.0 * MHZ, 1.0));
    let a = solve_at_velocity(&scheme, &f, 0.0).unwrap();
    let b = solve_at_velocity(&scheme, &g, 0.0).unwrap();
    let d = (0..6)
        .map(|k| (a.population(k) - b.population(k)).abs())
        .fold(0.0, f64::max);
    assert!(d > 1e-3, "{d}");
}
