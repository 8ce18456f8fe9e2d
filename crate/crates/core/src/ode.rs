//! Adaptive Dormand–Prince 5(4) integration of real first-order systems.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; 0 picks one from the interval length.
    pub initial_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-9,
            atol: 1e-12,
            initial_step: 0.0,
            max_steps: 100_000,
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// fifth-order weights are the last row of A; these are 5th minus 4th order
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `dy/dz = f(z, y)` from `outputs[0]` and returns the state at
/// every point of `outputs` (ascending). Steps are clipped so each output
/// point is hit exactly.
pub fn dopri5<F>(mut f: F, y0: &[f64], outputs: &[f64], opts: &OdeOptions) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y0.len();
    if outputs.is_empty() {
        return Ok(Vec::new());
    }
    if outputs.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::Solver("ODE output points must be ascending".into()));
    }
    let z_end = *outputs.last().expect("non-empty");
    let mut z = outputs[0];
    let span = z_end - z;
    let mut y = y0.to_vec();
    let mut out = Vec::with_capacity(outputs.len());
    out.push(y.clone());
    let mut h = if opts.initial_step > 0.0 {
        opts.initial_step
    } else {
        (span * 1e-3).max(f64::MIN_POSITIVE)
    };
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut next = 1;
    let mut steps = 0usize;
    let mut fsal_valid = false;
    while next < outputs.len() {
        let target = outputs[next];
        if target - z <= 0.0 {
            out.push(y.clone());
            next += 1;
            continue;
        }
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::Solver(alloc::format!("ODE step limit reached at z = {z:.6e}")));
        }
        let clipped = h >= target - z;
        let step = if clipped { target - z } else { h };
        if !fsal_valid {
            f(z, &y, &mut k[0])?;
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += step * A[s][j] * kj[i];
                }
                tmp[i] = acc;
            }
            f(z + C[s] * step, &tmp, &mut k[s])?;
        }
        // stage 7 was evaluated at the fifth-order solution
        y_new.copy_from_slice(&tmp);
        let mut err = 0.0;
        for i in 0..n {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            let r = step * e / sc;
            err += r * r;
        }
        let err = if n > 0 { (err / n as f64).sqrt() } else { 0.0 };
        if !err.is_finite() {
            return Err(Error::Solver(alloc::format!(
                "non-finite ODE error estimate at z = {z:.6e}"
            )));
        }
        if err <= 1.0 {
            z = if clipped { target } else { z + step };
            y.copy_from_slice(&y_new);
            let (first, rest) = k.split_at_mut(1);
            first[0].copy_from_slice(&rest[5]);
            fsal_valid = true;
            if clipped {
                out.push(y.clone());
                next += 1;
            }
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        let proposed = step * factor;
        if proposed < 1e-14 * span.abs().max(1e-300) {
            return Err(Error::Solver(alloc::format!("ODE step size underflow at z = {z:.6e}")));
        }
        // keep the unclipped step size when an accepted step was shortened
        h = if clipped && err <= 1.0 {
            h.max(proposed)
        } else {
            proposed
        };
    }
    Ok(out)
}
