use alloc::vec::Vec;

use rand::Rng;
use rand_distr::Exp1;

use super::{rng_for, PhotonStream, SourceKind};
use crate::{Error, Result};

const OP_THIN: u64 = 11;
const OP_DARK: u64 = 12;
const OP_SPLIT: u64 = 13;

/// Detector model: keep each photon with probability `eta`, add Poisson dark
/// counts at `dark_rate`, then apply a non-paralyzable dead time (events
/// within `dead_time` of the last accepted event are lost).
pub fn detect(stream: &PhotonStream, eta: f64, dark_rate: f64, dead_time: f64, seed: u64) -> Result<PhotonStream> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::config("detection efficiency must lie in [0, 1]"));
    }
    if !(dark_rate >= 0.0 && dark_rate.is_finite()) {
        return Err(Error::config("dark rate must be >= 0"));
    }
    if !(dead_time >= 0.0 && dead_time.is_finite()) {
        return Err(Error::config("dead time must be >= 0"));
    }
    let duration = stream.duration();
    let mut thin = rng_for(seed, OP_THIN);
    let kept: Vec<f64> = if eta == 1.0 {
        stream.times().to_vec()
    } else {
        stream
            .times()
            .iter()
            .copied()
            .filter(|_| thin.random::<f64>() < eta)
            .collect()
    };
    let mut dark = Vec::new();
    if dark_rate > 0.0 {
        let mut rng = rng_for(seed, OP_DARK);
        let mut t = 0.0;
        loop {
            let e: f64 = rng.sample(Exp1);
            t += e / dark_rate;
            if t > duration {
                break;
            }
            dark.push(t);
        }
    }
    // merge, dropping exact coincidences, then dead time
    let mut out = Vec::with_capacity(kept.len() + dark.len());
    let (mut i, mut j) = (0, 0);
    let mut last_accepted = f64::NEG_INFINITY;
    while i < kept.len() || j < dark.len() {
        let t = if j >= dark.len() || (i < kept.len() && kept[i] <= dark[j]) {
            i += 1;
            kept[i - 1]
        } else {
            j += 1;
            dark[j - 1]
        };
        if t > last_accepted && t - last_accepted >= dead_time {
            out.push(t);
            last_accepted = t;
        }
    }
    if dead_time > 0.0 {
        assert!(out.windows(2).all(|w| w[1] - w[0] >= dead_time));
    }
    Ok(PhotonStream::from_sorted(
        out,
        duration,
        SourceKind::Detected,
        seed,
        stream.dead_time.max(dead_time),
    ))
}

/// 50/50 beam splitter: every photon goes to either output with
/// probability one half.
pub fn hbt_split(stream: &PhotonStream, seed: u64) -> (PhotonStream, PhotonStream) {
    let mut rng = rng_for(seed, OP_SPLIT);
    let mut a = Vec::with_capacity(stream.len() / 2 + 16);
    let mut b = Vec::with_capacity(stream.len() / 2 + 16);
    for &t in stream.times() {
        if rng.random::<bool>() {
            a.push(t);
        } else {
            b.push(t);
        }
    }
    let mk = |v| PhotonStream::from_sorted(v, stream.duration(), stream.source, seed, stream.dead_time);
    (mk(a), mk(b))
}
