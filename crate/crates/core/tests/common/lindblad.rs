//! Independent Lindblad generator and long-time evolution, shared by the
//! steady-state oracle and the acceptance run.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rydthz_core::consts::TWO_PI;
use rydthz_core::levels::{
    build_hamiltonian, solve_at_velocity, FieldSet, LevelScheme, LoopFrequencies, Mat6, RateSet, DEFAULT_DIPOLES,
};

pub const N: usize = 6;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `L(ρ)` written directly from the master equation.
pub fn lindblad(h: &DMatrix<Complex64>, scheme: &LevelScheme, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let mut out = (h * rho - rho * h) * c(0.0, -1.0);
    for d in scheme.decays() {
        let mut jump = DMatrix::zeros(N, N);
        jump[(d.to, d.from)] = c(d.rate.sqrt(), 0.0);
        let jd = jump.adjoint();
        let jdj = &jd * &jump;
        out += &jump * rho * &jd - (&jdj * rho + rho * &jdj) * c(0.5, 0.0);
    }
    let deph = scheme.dephasing();
    for i in 0..N {
        for j in 0..N {
            if i != j {
                out[(i, j)] -= rho[(i, j)] * deph[i][j];
            }
        }
    }
    out
}

/// Row-major vectorization, same as the library's.
pub fn superoperator(h: &Mat6, scheme: &LevelScheme) -> DMatrix<Complex64> {
    let hm = DMatrix::from_fn(N, N, |i, j| h[i][j]);
    let mut s = DMatrix::zeros(N * N, N * N);
    for a in 0..N {
        for b in 0..N {
            let mut e = DMatrix::zeros(N, N);
            e[(a, b)] = c(1.0, 0.0);
            let l = lindblad(&hm, scheme, &e);
            for i in 0..N {
                for j in 0..N {
                    s[(i * N + j, a * N + b)] = l[(i, j)];
                }
            }
        }
    }
    s
}

/// Evolves the ground state with `e^{Lτ}` until it stops changing.
pub fn evolve_to_steady_state(s: &DMatrix<Complex64>, tau: f64) -> DVector<Complex64> {
    let p = (s * c(tau, 0.0)).exp();
    let mut x = DVector::zeros(N * N);
    x[0] = c(1.0, 0.0);
    let mut last_change = f64::INFINITY;
    for _ in 0..200_000 {
        let next = &p * &x;
        let change = (&next - &x).norm();
        x = next;
        // geometric tail bound
        let q = (change / last_change).min(0.999_999);
        if change * q / (1.0 - q) < 1e-14 && change < 1e-13 {
            break;
        }
        last_change = change;
    }
    let tr: Complex64 = (0..N).map(|k| x[k * N + k]).sum();
    x / tr
}

pub fn random_case(rng: &mut ChaCha8Rng) -> (LevelScheme, FieldSet, f64) {
    let mhz = TWO_PI * 1e6;
    let rates = RateSet {
        intermediate_decay: rng.random_range(3.0..10.0) * mhz,
        rydberg_decay: rng.random_range(0.05..0.5) * mhz,
        rydberg_dephasing: rng.random_range(0.1..2.0) * mhz,
    };
    let scheme = LevelScheme::six_wave_mixing(LoopFrequencies::rubidium(), DEFAULT_DIPOLES, rates).unwrap();
    let rabi: [Complex64; 6] = core::array::from_fn(|_| {
        Complex64::from_polar(rng.random_range(0.5..20.0) * mhz, rng.random_range(0.0..TWO_PI))
    });
    let det: [f64; 5] = core::array::from_fn(|_| rng.random_range(-10.0..10.0) * mhz);
    let fields = FieldSet::collinear(&scheme, rabi, det);
    let v = rng.random_range(-300.0..300.0);
    (scheme, fields, v)
}

/// Largest elementwise gap between the library steady state and the
/// evolved one for a random case.
pub fn oracle_gap(rng: &mut ChaCha8Rng) -> f64 {
    let (scheme, fields, v) = random_case(rng);
    let rho = solve_at_velocity(&scheme, &fields, v).unwrap();
    rho.check_invariants().unwrap();
    let h = build_hamiltonian(&scheme, &fields, v);
    let s = superoperator(&h, &scheme);
    let slowest = scheme.decays().iter().map(|d| d.rate).fold(f64::INFINITY, f64::min);
    let x = evolve_to_steady_state(&s, 5.0 / slowest);
    let mut worst: f64 = 0.0;
    for i in 0..N {
        for j in 0..N {
            worst = worst.max((rho.matrix()[i][j] - x[i * N + j]).norm());
        }
    }
    worst
}
