//! First-order response of the signal and THz coherences to weak probe
//! fields, Doppler-averaged.

use num_complex::Complex64;

use crate::doppler::{doppler_average_with, ResonanceHints, VaporSpec, VelocityQuadrature};
use crate::levels::{
    build_hamiltonian, build_liouvillian, commutator_term, resonance_velocities, resonance_width, zero_mat6,
    FieldLabel, FieldSet, KernelSolver, LevelScheme, Mat6,
};
use crate::mixing::propagate::Mat2;
use crate::Result;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Doppler-averaged response `(ρ_61, ρ_54) ≈ β (Ω_S, Ω_T) + β' (Ω_S*, Ω_T*)`.
///
/// Index 0 is the signal (S, coherence `ρ_61`), index 1 the THz field (T,
/// coherence `ρ_54`). `anti` is the antiholomorphic part, which vanishes
/// for a closed loop to the order solved here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearResponse {
    pub beta: Mat2,
    pub anti: Mat2,
}

/// Probe labels in response-matrix order.
pub const PROBES: [FieldLabel; 2] = [FieldLabel::S, FieldLabel::T];

pub fn linear_response_coefficients(scheme: &LevelScheme, fields: &FieldSet, vapor: &VaporSpec) -> Result<Mat2> {
    Ok(linear_response_with(scheme, fields, vapor, &VelocityQuadrature::default())?.beta)
}

/// Linearizes the Liouvillian about the probe-free steady state at each
/// velocity and solves for the first-order density matrices directly.
pub fn linear_response_with(
    scheme: &LevelScheme,
    fields: &FieldSet,
    vapor: &VaporSpec,
    quadrature: &VelocityQuadrature,
) -> Result<LinearResponse> {
    let base = fields.with_rabi(FieldLabel::S, ZERO).with_rabi(FieldLabel::T, ZERO);
    let hints = ResonanceHints {
        centers: resonance_velocities(scheme, &base),
        width: resonance_width(scheme, &base),
    };
    let avg: [Complex64; 8] =
        doppler_average_with(|v| response_at_velocity(scheme, &base, v), vapor, quadrature, &hints)?;
    Ok(LinearResponse {
        beta: [[avg[0], avg[1]], [avg[2], avg[3]]],
        anti: [[avg[4], avg[5]], [avg[6], avg[7]]],
    })
}

/// Coherence `ρ[upper][lower]` driven by the field on `label`.
pub(crate) fn probe_coherence(scheme: &LevelScheme, label: FieldLabel, rho: &Mat6) -> Complex64 {
    let t = scheme.transition(label);
    rho[t.upper][t.lower]
}

/// Perturbation Hamiltonian of a unit-amplitude probe `Ω = u`.
fn probe_hamiltonian(scheme: &LevelScheme, label: FieldLabel, u: Complex64) -> Mat6 {
    let t = scheme.transition(label);
    let mut h = zero_mat6();
    h[t.upper][t.lower] = u * 0.5;
    h[t.lower][t.upper] = u.conj() * 0.5;
    h
}

/// `[β_SS, β_ST, β_TS, β_TT, β'_SS, β'_ST, β'_TS, β'_TT]` at velocity `v`.
fn response_at_velocity(scheme: &LevelScheme, base: &FieldSet, v: f64) -> Result<[Complex64; 8]> {
    let h = build_hamiltonian(scheme, base, v);
    let l = build_liouvillian(&h, scheme)?;
    let solver = KernelSolver::new(&l)?;
    let rho0 = solver.steady_state(v);
    let mut out = [ZERO; 8];
    let i = Complex64::new(0.0, 1.0);
    for (y, &probe) in PROBES.iter().enumerate() {
        // L δρ = −(−i[δH, ρ₀]) for the two real directions u = 1, i
        let mut resp = [[ZERO; 2]; 2];
        for (k, u) in [Complex64::new(1.0, 0.0), i].into_iter().enumerate() {
            let mut src = commutator_term(&probe_hamiltonian(scheme, probe, u), rho0.matrix());
            src.iter_mut().flatten().for_each(|z| *z = -*z);
            let d = solver.solve_traceless(&src);
            for (x, &obs) in PROBES.iter().enumerate() {
                resp[x][k] = probe_coherence(scheme, obs, &d);
            }
        }
        for x in 0..2 {
            out[2 * x + y] = (resp[x][0] - i * resp[x][1]) * 0.5;
            out[4 + 2 * x + y] = (resp[x][0] + i * resp[x][1]) * 0.5;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consts::TWO_PI;
    use crate::levels::{solve_at_velocity, LevelScheme};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn reference_fields(scheme: &LevelScheme) -> FieldSet {
        let mhz = TWO_PI * 1e6;
        FieldSet::collinear(
            scheme,
            [
                c(8.0 * mhz, 0.0),
                c(6.0 * mhz, 0.0),
                c(12.0 * mhz, 0.0),
                ZERO,
                c(10.0 * mhz, 0.0),
                ZERO,
            ],
            [-5.2 * mhz, 2.0 * mhz, 0.0, 0.0, 1.0 * mhz],
        )
    }

    fn frozen() -> VaporSpec {
        VaporSpec::rubidium(0.0, 1e17).unwrap()
    }

    #[test]
    fn decoupled_loop_reduces_to_two_level_susceptibility() {
        let scheme = LevelScheme::rubidium_default();
        let mhz = TWO_PI * 1e6;
        let fields = FieldSet::collinear(&scheme, [ZERO; 6], [0.0, 0.0, 0.0, 0.0, 0.0]).with_detuning(
            &scheme,
            FieldLabel::A1,
            3.0 * mhz,
        );
        let r = linear_response_with(&scheme, &fields, &frozen(), &VelocityQuadrature::default()).unwrap();
        // ρ_eg = (Ω/2) / (Δ_S + iΓ/2) for the ground-state S transition
        let gamma = TWO_PI * 6e6;
        let ds = fields.get(FieldLabel::S).detuning;
        let expected = c(0.5, 0.0) / c(ds, gamma / 2.0);
        assert!((r.beta[0][0] - expected).norm() < 1e-12 * expected.norm());
        // the THz transition connects two empty Rydberg levels
        assert!(r.beta[1][1].norm() < 1e-20);
        for m in [r.beta[0][1], r.beta[1][0]] {
            assert!(m.norm() < 1e-12 * expected.norm());
        }
    }

    #[test]
    fn matches_finite_differences_of_the_full_steady_state() {
        let scheme = LevelScheme::rubidium_default();
        let fields = reference_fields(&scheme);
        let v = 37.0;
        let r = response_at_velocity(&scheme, &fields, v).unwrap();
        let h = 1e-4 * TWO_PI * 6e6;
        for (y, &probe) in PROBES.iter().enumerate() {
            for (k, u) in [c(1.0, 0.0), c(0.0, 1.0)].into_iter().enumerate() {
                let plus = solve_at_velocity(&scheme, &fields.with_rabi(probe, u * h), v).unwrap();
                let minus = solve_at_velocity(&scheme, &fields.with_rabi(probe, -u * h), v).unwrap();
                for (x, &obs) in PROBES.iter().enumerate() {
                    let fd = (probe_coherence(&scheme, obs, plus.matrix())
                        - probe_coherence(&scheme, obs, minus.matrix()))
                        / (2.0 * h);
                    // directional derivative along u is β u + β' u*
                    let lin = r[2 * x + y] * u + r[4 + 2 * x + y] * u.conj();
                    let scale = r[2 * x + y].norm().max(r[4 + 2 * x + y].norm());
                    assert!((fd - lin).norm() <= 1e-6 * scale, "x={x} y={y} k={k}: {fd} vs {lin}");
                }
            }
        }
        // closed loop: no antiholomorphic response
        for k in 4..8 {
            assert!(r[k].norm() < 1e-9 * r[0].norm(), "{k}: {}", r[k]);
        }
    }

    #[test]
    fn cross_terms_carry_the_loop_phase() {
        let scheme = LevelScheme::rubidium_default();
        let fields = reference_fields(&scheme);
        let phi = 0.7;
        let rot = fields.with_rabi(
            FieldLabel::A1,
            fields.get(FieldLabel::A1).rabi * Complex64::from_polar(1.0, phi),
        );
        let q = VelocityQuadrature::GaussHermite { nodes: 8 };
        let a = linear_response_with(&scheme, &fields, &frozen(), &q).unwrap().beta;
        let b = linear_response_with(&scheme, &rot, &frozen(), &q).unwrap().beta;
        let tol = 1e-9 * a[0][0].norm();
        assert!((a[0][0] - b[0][0]).norm() < tol);
        assert!((a[1][1] - b[1][1]).norm() < tol);
        // ρ_61 from Ω_T needs Ω_1 (absorbed): factor e^{iφ}; the reverse path e^{−iφ}
        let ph = Complex64::from_polar(1.0, phi);
        assert!((b[0][1] - a[0][1] * ph).norm() < 1e-9 * a[0][1].norm());
        assert!((b[1][0] - a[1][0] * ph.conj()).norm() < 1e-9 * a[1][0].norm());
    }
}
