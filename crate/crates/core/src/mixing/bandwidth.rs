//! Full width at half maximum and peak-shape classification of a spectrum.

use alloc::vec::Vec;

use crate::mixing::spectra::SpectrumTrace;
use crate::{Error, Result};

/// Local maxima below this fraction of the global maximum (in prominence)
/// are treated as noise.
pub const MIN_PROMINENCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumShape {
    Single,
    /// Two peaks with the central dip at or above half maximum.
    Split,
    /// Two peaks with the central dip below half maximum; the width is that
    /// of the outer envelope.
    SplitBeyondHalf,
}

impl SpectrumShape {
    pub fn name(self) -> &'static str {
        match self {
            SpectrumShape::Single => "single",
            SpectrumShape::Split => "split",
            SpectrumShape::SplitBeyondHalf => "split-beyond-half",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bandwidth {
    /// Distance between the outermost half-maximum crossings, abscissa units.
    pub fwhm: f64,
    pub shape: SpectrumShape,
    /// Distance between the two main peaks (parabolic refinement), if split.
    pub peak_separation: Option<f64>,
    pub maximum: f64,
}

pub fn extract_bandwidth(trace: &SpectrumTrace) -> Result<Bandwidth> {
    let pts = trace.points();
    if pts.len() < 5 {
        return Err(Error::InvalidTrace("bandwidth needs at least 5 samples".into()));
    }
    let (imax, ymax) = pts
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, p)| if p.1 > b.1 { (i, p.1) } else { b });
    if !(ymax > 0.0) {
        return Err(Error::NoPeak);
    }
    if imax == 0 || imax == pts.len() - 1 {
        return Err(Error::BoundaryPeak { index: imax });
    }
    let half = 0.5 * ymax;
    let first = pts.iter().position(|p| p.1 >= half).expect("maximum exceeds half");
    let last = pts.iter().rposition(|p| p.1 >= half).expect("maximum exceeds half");
    if first == 0 || last == pts.len() - 1 {
        return Err(Error::InvalidTrace(
            "half maximum is not reached inside the trace".into(),
        ));
    }
    let cross = |a: (f64, f64), b: (f64, f64)| a.0 + (half - a.1) * (b.0 - a.0) / (b.1 - a.1);
    let left = cross(pts[first - 1], pts[first]);
    let right = cross(pts[last], pts[last + 1]);

    let peaks = significant_peaks(pts, ymax);
    let (shape, peak_separation) = if peaks.len() < 2 {
        (SpectrumShape::Single, None)
    } else {
        // the two tallest peaks, in abscissa order
        let mut top: Vec<usize> = peaks.clone();
        top.sort_by(|&a, &b| pts[b].1.partial_cmp(&pts[a].1).unwrap_or(core::cmp::Ordering::Equal));
        let (mut p, mut q) = (top[0], top[1]);
        if p > q {
            core::mem::swap(&mut p, &mut q);
        }
        let dip = pts[p..=q].iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        let shape = if dip >= half {
            SpectrumShape::Split
        } else {
            SpectrumShape::SplitBeyondHalf
        };
        (shape, Some(refine(pts, q) - refine(pts, p)))
    };
    Ok(Bandwidth {
        fwhm: right - left,
        shape,
        peak_separation,
        maximum: ymax,
    })
}

/// Indices of local maxima whose prominence exceeds `MIN_PROMINENCE · ymax`.
fn significant_peaks(pts: &[(f64, f64)], ymax: f64) -> Vec<usize> {
    let n = pts.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        // plateau-aware: walk over equal values
        let mut j = i;
        while j + 1 < n && pts[j + 1].1 == pts[i].1 {
            j += 1;
        }
        if j + 1 < n && pts[i].1 > pts[i - 1].1 && pts[i].1 > pts[j + 1].1 {
            let mid = (i + j) / 2;
            if prominence(pts, mid) >= MIN_PROMINENCE * ymax {
                out.push(mid);
            }
        }
        i = j + 1;
    }
    out
}

/// Height above the higher of the two minima separating the peak from
/// taller samples (or the trace ends).
fn prominence(pts: &[(f64, f64)], k: usize) -> f64 {
    let h = pts[k].1;
    let mut left_min = h;
    for p in pts[..k].iter().rev() {
        if p.1 > h {
            break;
        }
        left_min = left_min.min(p.1);
    }
    let mut right_min = h;
    for p in &pts[k + 1..] {
        if p.1 > h {
            break;
        }
        right_min = right_min.min(p.1);
    }
    h - left_min.max(right_min)
}

/// Vertex of the parabola through the peak sample and its neighbours.
fn refine(pts: &[(f64, f64)], k: usize) -> f64 {
    let (x0, y0) = pts[k - 1];
    let (x1, y1) = pts[k];
    let (x2, y2) = pts[k + 1];
    let num = (x1 - x0) * (x1 - x0) * (y1 - y2) - (x1 - x2) * (x1 - x2) * (y1 - y0);
    let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if den == 0.0 {
        return x1;
    }
    (x1 - 0.5 * num / den).clamp(x0, x2)
}
