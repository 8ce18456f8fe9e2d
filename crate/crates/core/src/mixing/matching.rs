//! Energy conservation and wavevector closure around the loop.

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::consts::{SPEED_OF_LIGHT, TWO_PI};
use crate::levels::FieldSet;
use crate::{Error, Result};

/// Neumaier-compensated sum; exact for the few large, nearly cancelling
/// terms that appear in loop closures.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for x in terms {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Signal frequency `ν_T + ν_1 + ν_2 + ν_3 − ν_4` (Hz).
pub fn signal_frequency(nu_t: f64, nu_1: f64, nu_2: f64, nu_3: f64, nu_4: f64) -> Result<f64> {
    let inputs = [nu_t, nu_1, nu_2, nu_3, nu_4];
    if inputs.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::LoopConfiguration(
            "field frequencies must be finite and non-negative".into(),
        ));
    }
    let nu_s = compensated_sum([nu_t, nu_1, nu_2, nu_3, -nu_4]);
    if !(nu_s > 0.0) {
        return Err(Error::LoopConfiguration(alloc::format!(
            "signal frequency {nu_s:.6e} Hz is not positive"
        )));
    }
    Ok(nu_s)
}

/// Wavevector mismatch `Δk = k_T + k_1 + k_2 + k_3 − k_4 − k_S` (rad/m)
/// and its magnitude.
pub fn phase_mismatch(fields: &FieldSet) -> ([f64; 3], f64) {
    let mut dk = [0.0; 3];
    for (axis, d) in dk.iter_mut().enumerate() {
        let s = compensated_sum(
            fields
                .fields()
                .iter()
                .map(|f| f.sign.value() * f.frequency * f.direction[axis]),
        );
        *d = TWO_PI / SPEED_OF_LIGHT * s;
    }
    let norm = (dk[0] * dk[0] + dk[1] * dk[1] + dk[2] * dk[2]).sqrt();
    (dk, norm)
}
