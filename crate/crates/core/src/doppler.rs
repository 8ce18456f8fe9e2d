//! Thermal-velocity averaging over the axial Maxwell–Boltzmann distribution
//! and the effective Doppler linewidth.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::consts::{BOLTZMANN, RB87_MASS};
use crate::levels::DriveField;
use crate::quad::{gauss_hermite, integrate_adaptive, AdaptiveTolerance, Quantity};
use crate::{Error, Result};

pub const DEFAULT_NODES: usize = 64;

/// Atomic vapor: temperature (K), atomic mass (kg), number density (m⁻³).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VaporSpec {
    temperature: f64,
    mass: f64,
    density: f64,
}

impl VaporSpec {
    pub fn new(temperature: f64, mass: f64, density: f64) -> Result<Self> {
        // T = 0 is the frozen-vapor limit (u = 0).
        if !(temperature >= 0.0 && temperature.is_finite()) {
            return Err(Error::config("vapor temperature must be >= 0"));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::config("atomic mass must be > 0"));
        }
        // N = 0 is allowed as the no-atoms limit of the spectra.
        if !(density >= 0.0 && density.is_finite()) {
            return Err(Error::config("number density must be >= 0"));
        }
        Ok(VaporSpec {
            temperature,
            mass,
            density,
        })
    }

    /// Rb-87 cell at `temperature` with density `density`.
    pub fn rubidium(temperature: f64, density: f64) -> Result<Self> {
        Self::new(temperature, RB87_MASS, density)
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn with_density(&self, density: f64) -> Result<Self> {
        Self::new(self.temperature, self.mass, density)
    }

    pub fn with_temperature(&self, temperature: f64) -> Result<Self> {
        Self::new(temperature, self.mass, self.density)
    }

    /// Most probable speed `u = sqrt(2 k_B T / m)`; the axial distribution is
    /// `exp(-v²/u²) / (u sqrt(π))`.
    pub fn most_probable_speed(&self) -> f64 {
        (2.0 * BOLTZMANN * self.temperature / self.mass).sqrt()
    }
}

/// Gauss–Hermite velocity nodes `(v, weight)` for the axial distribution;
/// weights sum to one and nodes are symmetric about zero.
pub fn velocity_grid(spec: &VaporSpec, n_nodes: usize) -> Result<Vec<(f64, f64)>> {
    if n_nodes == 0 {
        return Err(Error::config("velocity grid needs at least one node"));
    }
    let u = spec.most_probable_speed();
    let norm = PI.sqrt();
    Ok(gauss_hermite(n_nodes)
        .into_iter()
        .map(|(x, w)| (u * x, w / norm))
        .collect())
}

/// Weighted sum of `f` over [`velocity_grid`].
pub fn doppler_average<Q, F>(mut f: F, spec: &VaporSpec, n_nodes: usize) -> Result<Q>
where
    Q: Quantity,
    F: FnMut(f64) -> Result<Q>,
{
    let grid = velocity_grid(spec, n_nodes)?;
    let mut acc: Option<Q> = None;
    for (node, (v, w)) in grid.into_iter().enumerate() {
        let y = f(v)?;
        if !y.all_finite() {
            return Err(Error::NonFiniteIntegrand { node, velocity: v });
        }
        match acc.as_mut() {
            Some(a) => a.add_scaled(&y, w),
            None => {
                let mut a = y.zero_like();
                a.add_scaled(&y, w);
                acc = Some(a);
            }
        }
    }
    Ok(acc.expect("at least one node"))
}

/// How the velocity integral is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VelocityQuadrature {
    /// Fixed Gauss–Hermite rule in `v/u`.
    GaussHermite { nodes: usize },
    /// Adaptive Gauss–Kronrod in `x = v/u` on `[-cutoff, cutoff]`, with
    /// extra breakpoints around supplied resonance velocities.
    Adaptive {
        tolerance: AdaptiveTolerance,
        cutoff: f64,
        panels: usize,
    },
}

impl Default for VelocityQuadrature {
    fn default() -> Self {
        VelocityQuadrature::Adaptive {
            tolerance: AdaptiveTolerance {
                rel: 1e-8,
                abs: 0.0,
                max_evaluations: 100_000,
            },
            cutoff: 6.0,
            panels: 8,
        }
    }
}

/// Known sharp structure of the integrand in velocity space: centers (m/s)
/// and a common width (m/s).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResonanceHints {
    pub centers: Vec<f64>,
    pub width: f64,
}

/// Maxwell–Boltzmann average of `f` with the chosen rule.
pub fn doppler_average_with<Q, F>(
    mut f: F,
    spec: &VaporSpec,
    quadrature: &VelocityQuadrature,
    hints: &ResonanceHints,
) -> Result<Q>
where
    Q: Quantity,
    F: FnMut(f64) -> Result<Q>,
{
    match *quadrature {
        VelocityQuadrature::GaussHermite { nodes } => doppler_average(f, spec, nodes),
        VelocityQuadrature::Adaptive {
            tolerance,
            cutoff,
            panels,
        } => {
            let u = spec.most_probable_speed();
            if u == 0.0 {
                let y = f(0.0)?;
                if !y.all_finite() {
                    return Err(Error::NonFiniteIntegrand { node: 0, velocity: 0.0 });
                }
                return Ok(y);
            }
            let norm = 1.0 / PI.sqrt();
            let breaks = breakpoints(u, cutoff, panels.max(1), hints);
            let (value, _err) = integrate_adaptive(
                |x| {
                    let y = f(u * x)?;
                    let mut out = y.zero_like();
                    out.add_scaled(&y, norm * (-x * x).exp());
                    Ok(out)
                },
                &breaks,
                tolerance,
            )?;
            Ok(value)
        }
    }
}

fn breakpoints(u: f64, cutoff: f64, panels: usize, hints: &ResonanceHints) -> Vec<f64> {
    let mut b: Vec<f64> = (0..=panels)
        .map(|i| -cutoff + 2.0 * cutoff * (i as f64) / (panels as f64))
        .collect();
    if u > 0.0 && hints.width.is_finite() && hints.width > 0.0 {
        let w = hints.width / u;
        for &c in &hints.centers {
            let x = c / u;
            for k in [-4.0, -1.0, 0.0, 1.0, 4.0] {
                let p = x + k * w;
                if p > -cutoff && p < cutoff {
                    b.push(p);
                }
            }
        }
    }
    b.sort_by(|a, c| a.partial_cmp(c).unwrap_or(core::cmp::Ordering::Equal));
    b.dedup_by(|a, c| (*a - *c).abs() <= 1e-12 * cutoff);
    b
}

/// Effective Doppler linewidth `Γ_th = |k| u` of `field`, rad/s.
pub fn effective_linewidth(spec: &VaporSpec, field: &DriveField) -> f64 {
    field.wavenumber() * spec.most_probable_speed()
}
