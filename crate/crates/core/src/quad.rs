//! Quadrature rules: Gauss–Hermite nodes and adaptive Gauss–Kronrod (7/15)
//! integration of vector-valued integrands.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::{Error, Result};

/// A value that can be accumulated as a weighted sum.
pub trait Quantity: Clone {
    fn zero_like(&self) -> Self;
    fn add_scaled(&mut self, other: &Self, w: f64);
    /// Max-abs size, used for error control.
    fn magnitude(&self) -> f64;
    fn all_finite(&self) -> bool;
}

impl Quantity for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn add_scaled(&mut self, other: &Self, w: f64) {
        *self += w * other;
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

impl Quantity for Complex64 {
    fn zero_like(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add_scaled(&mut self, other: &Self, w: f64) {
        *self += other * w;
    }
    fn magnitude(&self) -> f64 {
        self.re.abs().max(self.im.abs())
    }
    fn all_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl<Q: Quantity, const N: usize> Quantity for [Q; N] {
    fn zero_like(&self) -> Self {
        core::array::from_fn(|i| self[i].zero_like())
    }
    fn add_scaled(&mut self, other: &Self, w: f64) {
        for (a, b) in self.iter_mut().zip(other) {
            a.add_scaled(b, w);
        }
    }
    fn magnitude(&self) -> f64 {
        self.iter().map(Quantity::magnitude).fold(0.0, f64::max)
    }
    fn all_finite(&self) -> bool {
        self.iter().all(Quantity::all_finite)
    }
}

impl<Q: Quantity> Quantity for Vec<Q> {
    fn zero_like(&self) -> Self {
        self.iter().map(Quantity::zero_like).collect()
    }
    fn add_scaled(&mut self, other: &Self, w: f64) {
        for (a, b) in self.iter_mut().zip(other) {
            a.add_scaled(b, w);
        }
    }
    fn magnitude(&self) -> f64 {
        self.iter().map(Quantity::magnitude).fold(0.0, f64::max)
    }
    fn all_finite(&self) -> bool {
        self.iter().all(Quantity::all_finite)
    }
}

/// Nodes and weights of the `n`-point Gauss–Hermite rule for
/// `∫ e^{-x²} f(x) dx`, nodes ascending.
pub fn gauss_hermite(n: usize) -> Vec<(f64, f64)> {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let pim4 = PI.powf(-0.25);
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0;
    for i in 0..m {
        // asymptotic starting guesses for the largest roots first
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-0.166_67),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    let mut out: Vec<(f64, f64)> = x.into_iter().zip(w).collect();
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal));
    out
}

// 15-point Kronrod abscissae/weights and the embedded 7-point Gauss weights,
// as tabulated.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Error tolerances for [`integrate_adaptive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveTolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_evaluations: usize,
}

impl Default for AdaptiveTolerance {
    fn default() -> Self {
        AdaptiveTolerance {
            rel: 1e-9,
            abs: 0.0,
            max_evaluations: 200_000,
        }
    }
}

struct Panel<Q> {
    a: f64,
    b: f64,
    value: Q,
    error: f64,
}

/// Globally adaptive Gauss–Kronrod integration of `f` over the partition
/// given by `breakpoints` (sorted, at least two points).
///
/// Returns the integral and the summed error estimate. A non-finite
/// integrand value aborts with [`Error::NonFiniteIntegrand`], naming the
/// evaluation index and abscissa.
pub fn integrate_adaptive<Q, F>(mut f: F, breakpoints: &[f64], tol: AdaptiveTolerance) -> Result<(Q, f64)>
where
    Q: Quantity,
    F: FnMut(f64) -> Result<Q>,
{
    if breakpoints.len() < 2 {
        return Err(Error::Solver("adaptive quadrature needs at least one interval".into()));
    }
    let mut evaluations = 0usize;
    let mut panels: Vec<Panel<Q>> = Vec::with_capacity(breakpoints.len() * 4);
    for w in breakpoints.windows(2) {
        if w[1] > w[0] {
            panels.push(kronrod_panel(&mut f, w[0], w[1], &mut evaluations)?);
        }
    }
    if panels.is_empty() {
        return Err(Error::Solver("adaptive quadrature over an empty range".into()));
    }
    loop {
        let (total, err) = sum_panels(&panels);
        let target = tol.abs.max(tol.rel * total.magnitude());
        if err <= target || evaluations + 30 > tol.max_evaluations {
            if err > target && err > 1e3 * target {
                return Err(Error::Solver(alloc::format!(
                    "adaptive quadrature stalled at error {err:.3e} (target {target:.3e})"
                )));
            }
            return Ok((total, err));
        }
        let (worst, _) = panels.iter().enumerate().fold(
            (0, -1.0),
            |best, (i, p)| if p.error > best.1 { (i, p.error) } else { best },
        );
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            // interval no longer splittable in floating point
            panels.push(Panel { error: 0.0, ..p });
            continue;
        }
        panels.push(kronrod_panel(&mut f, p.a, mid, &mut evaluations)?);
        panels.push(kronrod_panel(&mut f, mid, p.b, &mut evaluations)?);
    }
}

fn sum_panels<Q: Quantity>(panels: &[Panel<Q>]) -> (Q, f64) {
    // fixed order: sort by left endpoint for a deterministic reduction
    let mut order: Vec<usize> = (0..panels.len()).collect();
    order.sort_by(|&i, &j| {
        panels[i]
            .a
            .partial_cmp(&panels[j].a)
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let mut total = panels[0].value.zero_like();
    let mut err = 0.0;
    for i in order {
        total.add_scaled(&panels[i].value, 1.0);
        err += panels[i].error;
    }
    (total, err)
}

fn kronrod_panel<Q, F>(f: &mut F, a: f64, b: f64, evaluations: &mut usize) -> Result<Panel<Q>>
where
    Q: Quantity,
    F: FnMut(f64) -> Result<Q>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut eval = |x: f64| -> Result<Q> {
        let y = f(x)?;
        let idx = *evaluations;
        *evaluations += 1;
        if !y.all_finite() {
            return Err(Error::NonFiniteIntegrand { node: idx, velocity: x });
        }
        Ok(y)
    };
    let fc = eval(c)?;
    let mut kron = fc.zero_like();
    let mut gauss = fc.zero_like();
    kron.add_scaled(&fc, WGK[7]);
    gauss.add_scaled(&fc, WG[3]);
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = eval(c - dx)?;
        let f2 = eval(c + dx)?;
        kron.add_scaled(&f1, WGK[j]);
        kron.add_scaled(&f2, WGK[j]);
        if j % 2 == 1 {
            gauss.add_scaled(&f1, WG[j / 2]);
            gauss.add_scaled(&f2, WG[j / 2]);
        }
    }
    let mut diff = kron.clone();
    diff.add_scaled(&gauss, -1.0);
    let mut value = kron.zero_like();
    value.add_scaled(&kron, h);
    let error = diff.magnitude() * h.abs();
    Ok(Panel { a, b, value, error })
}
