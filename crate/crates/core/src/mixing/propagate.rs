//! Linear two-mode propagation of the signal and THz photon-flux amplitudes.
//!
//! With `a_X = Ω_X / g_X` (times a common constant, so `|a_X|²` is photon
//! flux) the linearized field equations read `da/dz = i M a`, where
//! `M_XY = −(2/c) g_X g_Y β_XY` and `β` is the Doppler-averaged linear
//! response of the medium.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::consts::SPEED_OF_LIGHT;
use crate::mixing::analytic::MixingConfig;
use crate::ode::{dopri5, OdeOptions};
use crate::{Error, Result};

pub type Mat2 = [[Complex64; 2]; 2];

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Tolerated relative excess of output over input flux.
pub const PASSIVE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Constant coefficients in the co-moving frame `b_S = a_S e^{−iΔk z}`,
    /// solved with the closed-form 2×2 matrix exponential.
    Exponential,
    /// Adaptive Runge–Kutta on the lab-frame equations with explicit
    /// `e^{±iΔk z}` phase factors.
    RungeKutta,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagateOptions {
    pub method: Method,
    /// Number of equally spaced z samples to return (0 = none).
    pub profile_points: usize,
    pub ode: OdeOptions,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        PropagateOptions {
            method: Method::Exponential,
            profile_points: 0,
            ode: OdeOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub z: f64,
    pub a_s: Complex64,
    pub a_t: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConversionResult {
    pub eta_qe: f64,
    pub a_s: Complex64,
    pub a_t: Complex64,
    pub a_t_in: f64,
    pub profile: Option<Vec<ProfilePoint>>,
}

/// Propagation matrix `M` including the configured extra losses.
pub fn mode_matrix(beta: &Mat2, cfg: &MixingConfig) -> Mat2 {
    let g = [cfg.g_s, cfg.g_t];
    let mut m = [[ZERO; 2]; 2];
    for x in 0..2 {
        for y in 0..2 {
            m[x][y] = beta[x][y] * (-(2.0 / SPEED_OF_LIGHT) * g[x] * g[y]);
        }
        m[x][x] += I * cfg.extra_loss[x];
    }
    m
}

/// `e^A` for a 2×2 complex matrix via
/// `e^{tr/2} [cosh s · 1 + sinh s / s · (A − tr/2 · 1)]` with
/// `s² = ((a₀₀ − a₁₁)/2)² + a₀₁ a₁₀`.
pub fn expm2(a: &Mat2) -> Mat2 {
    let half = (a[0][0] + a[1][1]) * 0.5;
    let d = (a[0][0] - a[1][1]) * 0.5;
    let s2 = d * d + a[0][1] * a[1][0];
    let s = s2.sqrt();
    // c = e^h cosh(s), sc = e^h sinh(s)/s
    let (c, sc) = if s.re.abs() > 1.0 {
        // eigenvalue form, so that e^h never multiplies an overflowed cosh
        let (p, m) = ((half + s).exp(), (half - s).exp());
        ((p + m) * 0.5, (p - m) / (s * 2.0))
    } else {
        let sinhc = if s.norm() < 1e-4 {
            Complex64::new(1.0, 0.0) + s2 / 6.0 + s2 * s2 / 120.0
        } else {
            s.sinh() / s
        };
        let e = half.exp();
        (e * s.cosh(), e * sinhc)
    };
    [[c + sc * d, sc * a[0][1]], [sc * a[1][0], c - sc * d]]
}

pub fn coupled_mode_propagate(beta: &Mat2, cfg: &MixingConfig, a_t_in: f64) -> Result<ConversionResult> {
    coupled_mode_propagate_with(beta, cfg, a_t_in, &PropagateOptions::default())
}

/// Propagates `(a_S, a_T)` from `(0, a_T_in)` over the medium length.
pub fn coupled_mode_propagate_with(
    beta: &Mat2,
    cfg: &MixingConfig,
    a_t_in: f64,
    opts: &PropagateOptions,
) -> Result<ConversionResult> {
    cfg.validate()?;
    if !(a_t_in > 0.0 && a_t_in.is_finite()) {
        return Err(Error::config("input THz amplitude must be > 0"));
    }
    if beta.iter().flatten().any(|b| !b.re.is_finite() || !b.im.is_finite()) {
        return Err(Error::Solver("non-finite response coefficients".into()));
    }
    let m = mode_matrix(beta, cfg);
    let length = cfg.length;
    let mut samples: Vec<f64> = if opts.profile_points >= 2 {
        let n = opts.profile_points;
        (0..n).map(|i| length * i as f64 / (n - 1) as f64).collect()
    } else {
        alloc::vec![0.0, length]
    };
    if let Some(last) = samples.last_mut() {
        *last = length;
    }
    // unit input; scaled by a_t_in at the end
    let states: Vec<(Complex64, Complex64)> = match opts.method {
        Method::Exponential => {
            let g = [[I * (m[0][0] - cfg.delta_k), I * m[0][1]], [I * m[1][0], I * m[1][1]]];
            samples
                .iter()
                .map(|&z| {
                    let e = expm2(&[[g[0][0] * z, g[0][1] * z], [g[1][0] * z, g[1][1] * z]]);
                    let phase = Complex64::from_polar(1.0, cfg.delta_k * z);
                    (e[0][1] * phase, e[1][1])
                })
                .collect()
        }
        Method::RungeKutta => {
            let dk = cfg.delta_k;
            let out = dopri5(
                |z, y, dy| {
                    let a_s = Complex64::new(y[0], y[1]);
                    let a_t = Complex64::new(y[2], y[3]);
                    let ph = Complex64::from_polar(1.0, dk * z);
                    let ds = I * (m[0][0] * a_s + m[0][1] * ph * a_t);
                    let dt = I * (m[1][0] * ph.conj() * a_s + m[1][1] * a_t);
                    dy[0] = ds.re;
                    dy[1] = ds.im;
                    dy[2] = dt.re;
                    dy[3] = dt.im;
                    Ok(())
                },
                &[0.0, 0.0, 1.0, 0.0],
                &samples,
                &opts.ode,
            )?;
            out.iter()
                .map(|y| (Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3])))
                .collect()
        }
    };
    let (s_l, t_l) = *states.last().expect("at least one sample");
    let flux = s_l.norm_sqr() + t_l.norm_sqr();
    if !flux.is_finite() {
        return Err(Error::Solver("non-finite propagated amplitudes".into()));
    }
    if flux > 1.0 + PASSIVE_TOLERANCE {
        return Err(Error::NonPassiveMedium { excess: flux - 1.0 });
    }
    let profile = (opts.profile_points >= 2).then(|| {
        samples
            .iter()
            .zip(&states)
            .map(|(&z, &(s, t))| ProfilePoint {
                z,
                a_s: s * a_t_in,
                a_t: t * a_t_in,
            })
            .collect()
    });
    Ok(ConversionResult {
        eta_qe: s_l.norm_sqr().min(1.0),
        a_s: s_l * a_t_in,
        a_t: t_l * a_t_in,
        a_t_in,
        profile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixing::analytic::{equivalent_coefficients, eta_qe_analytic};

    fn cfg(ratio: f64, alpha_l: f64) -> MixingConfig {
        // G_S/G_T = ratio, ᾱL = alpha_l
        let length = 5e-3;
        let gamma = 2.2e9;
        let r = 1.0 / ratio;
        let g_s = (alpha_l / length * SPEED_OF_LIGHT * gamma / (2.0 * (1.0 + r * r))).sqrt();
        MixingConfig::synthetic(g_s, 0.7 * g_s, 1.0, r, length, gamma).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn expm2_matches_a_taylor_series() {
        let a: Mat2 = [
            [Complex64::new(0.3, -0.2), Complex64::new(1.1, 0.4)],
            [Complex64::new(-0.5, 0.9), Complex64::new(-0.7, 0.1)],
        ];
        let mut term: Mat2 = [[Complex64::new(1.0, 0.0), ZERO], [ZERO, Complex64::new(1.0, 0.0)]];
        let mut sum = term;
        for k in 1..60 {
            let mut next = [[ZERO; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    next[i][j] = (term[i][0] * a[0][j] + term[i][1] * a[1][j]) / k as f64;
                }
            }
            term = next;
            for i in 0..2 {
                for j in 0..2 {
                    sum[i][j] += term[i][j];
                }
            }
        }
        let e = expm2(&a);
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(e[i][j], sum[i][j], 1e-13), "{i}{j}");
            }
        }
        // degenerate (defective) case s = 0
        let n: Mat2 = [[ZERO, Complex64::new(2.0, 0.0)], [ZERO, ZERO]];
        let e = expm2(&n);
        assert!(close(e[0][1], Complex64::new(2.0, 0.0), 1e-15));
        assert!(close(e[0][0], Complex64::new(1.0, 0.0), 1e-15));
        // strongly damped: cosh alone would overflow
        let big: Mat2 = [
            [Complex64::new(-2000.0, 0.0), Complex64::new(1000.0, 0.0)],
            [Complex64::new(1000.0, 0.0), Complex64::new(-2000.0, 0.0)],
        ];
        let e = expm2(&big);
        let expect = ((-1000.0f64).exp() + (-3000.0f64).exp()) / 2.0;
        assert!(e.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite()));
        assert!((e[0][0].re - expect).abs() <= 1e-300 && e[0][0].re >= 0.0);
    }

    #[test]
    fn no_cross_coupling_gives_no_signal() {
        let c = cfg(1.0, 2.0);
        let mut b = equivalent_coefficients(&c).unwrap();
        b[0][1] = ZERO;
        b[1][0] = ZERO;
        let r = coupled_mode_propagate(&b, &c, 1.0).unwrap();
        assert_eq!(r.eta_qe, 0.0);
        assert_eq!(r.a_s, ZERO);
    }

    #[test]
    fn equivalent_coefficients_reproduce_the_closed_form() {
        for ratio in [0.25, 0.5, 1.0, 2.0, 4.0] {
            for al in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
                let c = cfg(ratio, al);
                let b = equivalent_coefficients(&c).unwrap();
                let exact = eta_qe_analytic(&c).unwrap();
                for method in [Method::Exponential, Method::RungeKutta] {
                    let opts = PropagateOptions {
                        method,
                        ..Default::default()
                    };
                    let r = coupled_mode_propagate_with(&b, &c, 3.0, &opts).unwrap();
                    assert!(
                        (r.eta_qe / exact - 1.0).abs() < 1e-6,
                        "{ratio} {al} {method:?}: {} vs {exact}",
                        r.eta_qe
                    );
                    assert!((r.a_s.norm_sqr() / 9.0 - r.eta_qe).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn large_mismatch_suppresses_conversion() {
        let mut c = cfg(1.0, 1.0);
        let b = equivalent_coefficients(&c).unwrap();
        let matched = coupled_mode_propagate(&b, &c, 1.0).unwrap().eta_qe;
        c.delta_k = 1e3 / c.length;
        let exp = coupled_mode_propagate(&b, &c, 1.0).unwrap().eta_qe;
        let rk = coupled_mode_propagate_with(
            &b,
            &c,
            1.0,
            &PropagateOptions {
                method: Method::RungeKutta,
                ..Default::default()
            },
        )
        .unwrap()
        .eta_qe;
        assert!(exp < 1e-3 * matched, "{exp} vs {matched}");
        assert!((rk / exp - 1.0).abs() < 1e-4, "{rk} vs {exp}");
        // weak coupling: first-order amplitude M_ST ∫ e^{iΔk z} dz gives the
        // sinc² law
        let mut w = cfg(1.0, 1e-4);
        let bw = equivalent_coefficients(&w).unwrap();
        let m = mode_matrix(&bw, &w);
        let x = 7.3;
        w.delta_k = 2.0 * x / w.length;
        let eta = coupled_mode_propagate(&bw, &w, 1.0).unwrap().eta_qe;
        let sinc = x.sin() / x;
        let first_order = (m[0][1].norm() * w.length * sinc).powi(2);
        assert!((eta / first_order - 1.0).abs() < 1e-3, "{eta} vs {first_order}");
    }

    #[test]
    fn profile_ends_at_the_output() {
        let c = cfg(2.0, 3.0);
        let b = equivalent_coefficients(&c).unwrap();
        let opts = PropagateOptions {
            profile_points: 11,
            ..Default::default()
        };
        let r = coupled_mode_propagate_with(&b, &c, 2.0, &opts).unwrap();
        let p = r.profile.unwrap();
        assert_eq!(p.len(), 11);
        assert_eq!(p[0].a_s, ZERO);
        assert_eq!(p[10].z, c.length);
        assert_eq!(p[10].a_s, r.a_s);
        for w in p.windows(2) {
            let f0 = w[0].a_s.norm_sqr() + w[0].a_t.norm_sqr();
            let f1 = w[1].a_s.norm_sqr() + w[1].a_t.norm_sqr();
            assert!(f1 <= f0 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn gain_is_rejected() {
        let c = cfg(1.0, 1.0);
        let mut b = equivalent_coefficients(&c).unwrap();
        for row in b.iter_mut() {
            for x in row.iter_mut() {
                *x = -*x;
            }
        }
        assert!(matches!(
            coupled_mode_propagate(&b, &c, 1.0),
            Err(Error::NonPassiveMedium { .. })
        ));
    }

    #[test]
    fn extra_loss_attenuates_the_thz_mode() {
        let mut c = cfg(1.0, 1.0);
        let b = [[ZERO; 2]; 2];
        c.extra_loss = [0.0, 100.0];
        let r = coupled_mode_propagate(&b, &c, 1.0).unwrap();
        assert!((r.a_t.norm() - (-100.0 * c.length).exp()).abs() < 1e-14);
    }
}
