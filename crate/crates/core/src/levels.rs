//! Six-level loop: rotating-frame Hamiltonian, Lindblad generator and
//! steady state of the driven-dissipative atom at a fixed axial velocity.
//!
//! Levels are indexed `0..6` in loop order. Index 0 is the ground state
//! `|1⟩`, 1 and 5 are the intermediate states `|2⟩` and `|6⟩`, 2–4 are the
//! Rydberg states `|3⟩`, `|4⟩`, `|5⟩`. The loop is traversed
//! `|1⟩ →A1→ |2⟩ →A2→ |3⟩ →A3→ |4⟩ →T→ |5⟩ →A4→ |6⟩ →S→ |1⟩`, where A4 and
//! S are emitted (the traversal goes down in energy).
//!
//! Density matrices are vectorized row-major: `vec(ρ)[6 i + j] = ρ_ij`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::consts::{self, SPEED_OF_LIGHT, TWO_PI};
use crate::linalg::{hermitian_eigenvalues, singular_values, CMatrix, Lu};
use crate::mixing::matching::signal_frequency;
use crate::{Error, Result};

pub const N_LEVELS: usize = 6;
pub const N_SUPER: usize = N_LEVELS * N_LEVELS;

pub type Mat6 = [[Complex64; N_LEVELS]; N_LEVELS];

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Loop closure tolerance on the signed frequency sum, rad/s.
const CLOSURE_TOL: f64 = TWO_PI * 1.0;

/// Degeneracy threshold on σ₂/σ₁ of the Liouvillian.
const KERNEL_GAP: f64 = 1e6;

/// Pivot-ratio threshold used by [`KernelSolver`].
const PIVOT_FLOOR: f64 = 1e-14;

pub fn zero_mat6() -> Mat6 {
    [[ZERO; N_LEVELS]; N_LEVELS]
}

#[inline]
pub fn vec_index(i: usize, j: usize) -> usize {
    i * N_LEVELS + j
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelRole {
    Ground,
    Intermediate,
    Rydberg,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub label: String,
    pub role: LevelRole,
}

/// The six fields of the mixing loop, in loop order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldLabel {
    A1,
    A2,
    A3,
    T,
    A4,
    S,
}

impl FieldLabel {
    pub const ALL: [FieldLabel; 6] = [
        FieldLabel::A1,
        FieldLabel::A2,
        FieldLabel::A3,
        FieldLabel::T,
        FieldLabel::A4,
        FieldLabel::S,
    ];

    pub fn loop_index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            FieldLabel::A1 => "A1",
            FieldLabel::A2 => "A2",
            FieldLabel::A3 => "A3",
            FieldLabel::T => "T",
            FieldLabel::A4 => "A4",
            FieldLabel::S => "S",
        }
    }
}

/// Whether the loop traversal absorbs (+1) or emits (−1) the field photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopSign {
    Absorbed,
    Emitted,
}

impl LoopSign {
    pub fn value(self) -> f64 {
        match self {
            LoopSign::Absorbed => 1.0,
            LoopSign::Emitted => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub label: FieldLabel,
    pub lower: usize,
    pub upper: usize,
    pub sign: LoopSign,
    /// rad/s
    pub angular_frequency: f64,
    /// Reduced dipole moment, C·m.
    pub dipole: f64,
}

impl Transition {
    /// Level the loop traversal leaves from.
    pub fn from(&self) -> usize {
        match self.sign {
            LoopSign::Absorbed => self.lower,
            LoopSign::Emitted => self.upper,
        }
    }

    /// Level the loop traversal arrives at.
    pub fn to(&self) -> usize {
        match self.sign {
            LoopSign::Absorbed => self.upper,
            LoopSign::Emitted => self.lower,
        }
    }

    pub fn frequency_hz(&self) -> f64 {
        self.angular_frequency / TWO_PI
    }
}

/// Population decay `from → to` at `rate` (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayChannel {
    pub from: usize,
    pub to: usize,
    pub rate: f64,
}

/// Transition frequencies of the five input fields, Hz. The signal frequency
/// follows from energy conservation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopFrequencies {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub t: f64,
    pub a4: f64,
}

impl LoopFrequencies {
    /// Rb-87 ladder closing on the D2 line: D1 probe, 476 nm Rydberg
    /// excitation, 62.3 GHz microwave, 0.107 THz signal, A4 fixed by closure.
    pub fn rubidium() -> Self {
        let a1 = consts::RB87_D1_HZ;
        let a2 = SPEED_OF_LIGHT / 476e-9;
        let a3 = 62.3e9;
        let t = 0.107e12;
        let a4 = a1 + a2 + a3 + t - consts::RB87_D2_HZ;
        LoopFrequencies { a1, a2, a3, t, a4 }
    }
}

/// Decay and dephasing defaults, rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSet {
    pub intermediate_decay: f64,
    pub rydberg_decay: f64,
    pub rydberg_dephasing: f64,
}

impl Default for RateSet {
    fn default() -> Self {
        RateSet {
            intermediate_decay: TWO_PI * 6e6,
            rydberg_decay: TWO_PI * 10e3,
            rydberg_dephasing: TWO_PI * 1e6,
        }
    }
}

/// Reduced dipole moments in loop order (A1, A2, A3, T, A4, S), C·m.
pub const DEFAULT_DIPOLES: [f64; 6] = [2.5e-29, 1.0e-31, 8.0e-27, 6.0e-27, 1.0e-31, 2.5e-29];

#[derive(Debug, Clone, PartialEq)]
pub struct LevelScheme {
    levels: Vec<Level>,
    transitions: [Transition; 6],
    decays: Vec<DecayChannel>,
    dephasing: [[f64; N_LEVELS]; N_LEVELS],
}

impl LevelScheme {
    pub fn new(
        levels: Vec<Level>,
        transitions: [Transition; 6],
        decays: Vec<DecayChannel>,
        dephasing: [[f64; N_LEVELS]; N_LEVELS],
    ) -> Result<Self> {
        if levels.len() != N_LEVELS {
            return Err(Error::config("level scheme needs exactly 6 levels"));
        }
        if levels[0].role != LevelRole::Ground {
            return Err(Error::config("level 0 must be the ground state"));
        }
        let mut visited = [false; N_LEVELS];
        let mut at = 0;
        for (k, t) in transitions.iter().enumerate() {
            if t.label.loop_index() != k {
                return Err(Error::config("transitions must be listed in loop order"));
            }
            if t.lower >= N_LEVELS || t.upper >= N_LEVELS || t.lower == t.upper {
                return Err(Error::config("transition level index out of range"));
            }
            if t.from() != at {
                return Err(Error::LoopConfiguration(alloc::format!(
                    "transition {} does not start where the previous one ends",
                    t.label.name()
                )));
            }
            if visited[at] {
                return Err(Error::LoopConfiguration("loop revisits a level".into()));
            }
            visited[at] = true;
            at = t.to();
            if !(t.dipole > 0.0) || !t.dipole.is_finite() {
                return Err(Error::config(alloc::format!(
                    "dipole of {} must be > 0",
                    t.label.name()
                )));
            }
            if !(t.angular_frequency > 0.0) || !t.angular_frequency.is_finite() {
                return Err(Error::config(alloc::format!(
                    "frequency of {} must be > 0",
                    t.label.name()
                )));
            }
        }
        if at != 0 || visited.iter().any(|v| !v) {
            return Err(Error::LoopConfiguration(
                "transitions do not close a single loop".into(),
            ));
        }
        let closure: f64 = transitions.iter().map(|t| t.sign.value() * t.angular_frequency).sum();
        if closure.abs() > CLOSURE_TOL {
            return Err(Error::LoopConfiguration(alloc::format!(
                "signed frequency sum around the loop is {:.3} Hz",
                closure / TWO_PI
            )));
        }
        for d in &decays {
            if d.from >= N_LEVELS || d.to >= N_LEVELS || d.from == d.to {
                return Err(Error::config("decay channel level index out of range"));
            }
            if !(d.rate >= 0.0) || !d.rate.is_finite() {
                return Err(Error::config("decay rates must be finite and >= 0"));
            }
        }
        for i in 0..N_LEVELS {
            for j in 0..N_LEVELS {
                let g = dephasing[i][j];
                if !(g >= 0.0) || !g.is_finite() {
                    return Err(Error::config("dephasing rates must be finite and >= 0"));
                }
                if g != dephasing[j][i] {
                    return Err(Error::config("dephasing matrix must be symmetric"));
                }
            }
            if dephasing[i][i] != 0.0 {
                return Err(Error::config("dephasing matrix must have a zero diagonal"));
            }
        }
        Ok(LevelScheme {
            levels,
            transitions,
            decays,
            dephasing,
        })
    }

    /// The six-wave-mixing loop with default level roles and decay
    /// channels: `|2⟩, |6⟩ → |1⟩`, `|3⟩, |4⟩ → |2⟩`, `|5⟩ → |6⟩`, and
    /// collisional dephasing on every coherence that involves a Rydberg
    /// level.
    pub fn six_wave_mixing(freqs: LoopFrequencies, dipoles: [f64; 6], rates: RateSet) -> Result<Self> {
        let nu_s = signal_frequency(freqs.t, freqs.a1, freqs.a2, freqs.a3, freqs.a4)?;
        let roles = [
            ("5S1/2", LevelRole::Ground),
            ("5P1/2", LevelRole::Intermediate),
            ("nD", LevelRole::Rydberg),
            ("n'P", LevelRole::Rydberg),
            ("n''S", LevelRole::Rydberg),
            ("5P3/2", LevelRole::Intermediate),
        ];
        let levels = roles
            .iter()
            .map(|(l, r)| Level {
                label: String::from(*l),
                role: *r,
            })
            .collect();
        let nus = [freqs.a1, freqs.a2, freqs.a3, freqs.t, freqs.a4, nu_s];
        let ends = [(0, 1), (1, 2), (2, 3), (3, 4), (5, 4), (0, 5)];
        let signs = [
            LoopSign::Absorbed,
            LoopSign::Absorbed,
            LoopSign::Absorbed,
            LoopSign::Absorbed,
            LoopSign::Emitted,
            LoopSign::Emitted,
        ];
        let transitions = core::array::from_fn(|k| Transition {
            label: FieldLabel::ALL[k],
            lower: ends[k].0,
            upper: ends[k].1,
            sign: signs[k],
            angular_frequency: TWO_PI * nus[k],
            dipole: dipoles[k],
        });
        let decays = vec![
            DecayChannel {
                from: 1,
                to: 0,
                rate: rates.intermediate_decay,
            },
            DecayChannel {
                from: 5,
                to: 0,
                rate: rates.intermediate_decay,
            },
            DecayChannel {
                from: 2,
                to: 1,
                rate: rates.rydberg_decay,
            },
            DecayChannel {
                from: 3,
                to: 1,
                rate: rates.rydberg_decay,
            },
            DecayChannel {
                from: 4,
                to: 5,
                rate: rates.rydberg_decay,
            },
        ];
        let mut dephasing = [[0.0; N_LEVELS]; N_LEVELS];
        for i in 0..N_LEVELS {
            for j in 0..N_LEVELS {
                let rydberg = |k: usize| roles[k].1 == LevelRole::Rydberg;
                if i != j && (rydberg(i) || rydberg(j)) {
                    dephasing[i][j] = rates.rydberg_dephasing;
                }
            }
        }
        Self::new(levels, transitions, decays, dephasing)
    }

    pub fn rubidium_default() -> Self {
        Self::six_wave_mixing(LoopFrequencies::rubidium(), DEFAULT_DIPOLES, RateSet::default())
            .expect("default rubidium scheme is valid")
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn transitions(&self) -> &[Transition; 6] {
        &self.transitions
    }

    pub fn transition(&self, label: FieldLabel) -> &Transition {
        &self.transitions[label.loop_index()]
    }

    pub fn decays(&self) -> &[DecayChannel] {
        &self.decays
    }

    pub fn dephasing(&self) -> &[[f64; N_LEVELS]; N_LEVELS] {
        &self.dephasing
    }

    /// Total population decay rate out of each level.
    pub fn total_decay(&self) -> [f64; N_LEVELS] {
        let mut out = [0.0; N_LEVELS];
        for d in &self.decays {
            out[d.from] += d.rate;
        }
        out
    }

    /// Largest decay or dephasing rate, a natural scale for linewidths.
    pub fn max_rate(&self) -> f64 {
        let dec = self.total_decay().iter().copied().fold(0.0, f64::max);
        let deph = self.dephasing.iter().flatten().copied().fold(0.0, f64::max);
        dec.max(deph)
    }
}

/// One optical, microwave or THz field acting on its loop transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveField {
    pub label: FieldLabel,
    /// Complex Rabi frequency, rad/s.
    pub rabi: Complex64,
    /// Detuning from the assigned transition, rad/s (`ω_field − ω_atom`).
    pub detuning: f64,
    /// Unit propagation direction.
    pub direction: [f64; 3],
    /// Field frequency, Hz.
    pub frequency: f64,
    pub sign: LoopSign,
}

impl DriveField {
    /// Vacuum wavenumber `2πν/c`, rad/m.
    pub fn wavenumber(&self) -> f64 {
        TWO_PI * self.frequency / SPEED_OF_LIGHT
    }

    pub fn wavevector(&self) -> [f64; 3] {
        let k = self.wavenumber();
        [k * self.direction[0], k * self.direction[1], k * self.direction[2]]
    }

    /// Projection of the wavevector on the common axis ẑ.
    pub fn axial_wavenumber(&self) -> f64 {
        self.wavenumber() * self.direction[2]
    }

    /// Detuning seen by an atom moving at axial velocity `v`.
    pub fn doppler_detuning(&self, v: f64) -> f64 {
        self.detuning - self.axial_wavenumber() * v
    }
}

/// A validated assignment of one field to each loop transition.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSet {
    fields: [DriveField; 6],
}

impl FieldSet {
    /// Validates coverage, uniqueness, sign agreement with `scheme`, finite
    /// Rabi frequencies, unit directions, and energy closure of the signal
    /// detuning.
    pub fn new(scheme: &LevelScheme, fields: &[DriveField]) -> Result<Self> {
        let mut slots: [Option<DriveField>; 6] = [None; 6];
        for f in fields {
            let k = f.label.loop_index();
            if slots[k].is_some() {
                return Err(Error::config(alloc::format!("field {} assigned twice", f.label.name())));
            }
            if f.sign != scheme.transitions[k].sign {
                return Err(Error::config(alloc::format!(
                    "loop sign of {} disagrees with the level scheme",
                    f.label.name()
                )));
            }
            if !f.rabi.re.is_finite() || !f.rabi.im.is_finite() || !f.detuning.is_finite() {
                return Err(Error::config(alloc::format!("field {} is not finite", f.label.name())));
            }
            let n2: f64 = f.direction.iter().map(|x| x * x).sum();
            if (n2 - 1.0).abs() > 1e-9 {
                return Err(Error::config(alloc::format!(
                    "direction of {} is not a unit vector",
                    f.label.name()
                )));
            }
            if !(f.frequency > 0.0) {
                return Err(Error::config(alloc::format!(
                    "frequency of {} must be > 0",
                    f.label.name()
                )));
            }
            slots[k] = Some(*f);
        }
        let mut out = [None; 6];
        for (k, s) in slots.iter().enumerate() {
            match s {
                Some(f) => out[k] = Some(*f),
                None => {
                    return Err(Error::config(alloc::format!(
                        "transition {} has no assigned field",
                        FieldLabel::ALL[k].name()
                    )))
                }
            }
        }
        let set = FieldSet {
            fields: out.map(|f| f.expect("checked above")),
        };
        let residual = set.closure_residual();
        let scale = set.fields.iter().map(|f| f.detuning.abs()).fold(1.0, f64::max);
        if residual.abs() > CLOSURE_TOL.max(1e-12 * scale) {
            return Err(Error::LoopConfiguration(alloc::format!(
                "signal detuning violates energy conservation by {:.3e} rad/s",
                residual
            )));
        }
        Ok(set)
    }

    /// All fields co-propagating along ẑ; `detunings` are for A1, A2, A3, T,
    /// A4 and the signal detuning is set by energy conservation.
    pub fn collinear(scheme: &LevelScheme, rabi: [Complex64; 6], detunings: [f64; 5]) -> Self {
        let mut fields: [DriveField; 6] = core::array::from_fn(|k| {
            let t = &scheme.transitions[k];
            DriveField {
                label: t.label,
                rabi: rabi[k],
                detuning: 0.0,
                direction: [0.0, 0.0, 1.0],
                frequency: t.frequency_hz(),
                sign: t.sign,
            }
        });
        for (k, d) in detunings.iter().enumerate() {
            fields[k].detuning = *d;
            fields[k].frequency = scheme.transitions[k].frequency_hz() + d / TWO_PI;
        }
        let mut set = FieldSet { fields };
        set.close_signal(scheme);
        set
    }

    fn closure_residual(&self) -> f64 {
        self.fields.iter().map(|f| f.sign.value() * f.detuning).sum()
    }

    /// Sets the signal detuning and frequency from energy conservation.
    fn close_signal(&mut self, scheme: &LevelScheme) {
        let s = FieldLabel::S.loop_index();
        let partial: f64 = self.fields[..s].iter().map(|f| f.sign.value() * f.detuning).sum();
        let sign = self.fields[s].sign.value();
        let det = -partial / sign;
        self.fields[s].detuning = det;
        self.fields[s].frequency = scheme.transitions[s].frequency_hz() + det / TWO_PI;
    }

    pub fn get(&self, label: FieldLabel) -> &DriveField {
        &self.fields[label.loop_index()]
    }

    pub fn fields(&self) -> &[DriveField; 6] {
        &self.fields
    }

    pub fn with_rabi(&self, label: FieldLabel, rabi: Complex64) -> Self {
        let mut out = self.clone();
        out.fields[label.loop_index()].rabi = rabi;
        out
    }

    /// Changes one input detuning; the signal detuning follows.
    pub fn with_detuning(&self, scheme: &LevelScheme, label: FieldLabel, detuning: f64) -> Self {
        let mut out = self.clone();
        let k = label.loop_index();
        out.fields[k].detuning = detuning;
        out.fields[k].frequency = scheme.transitions[k].frequency_hz() + detuning / TWO_PI;
        if label != FieldLabel::S {
            out.close_signal(scheme);
        }
        out
    }

    pub fn with_direction(&self, label: FieldLabel, direction: [f64; 3]) -> Self {
        let mut out = self.clone();
        out.fields[label.loop_index()].direction = direction;
        out
    }

    /// Gauge-invariant loop phase `Σ s_i arg Ω_i`.
    pub fn loop_phase(&self) -> f64 {
        self.fields.iter().map(|f| f.sign.value() * f.rabi.arg()).sum()
    }

    pub fn max_rabi(&self) -> f64 {
        self.fields.iter().map(|f| f.rabi.norm()).fold(0.0, f64::max)
    }
}

/// Diagonal of the rotating-frame Hamiltonian as `offset + slope · v`.
///
/// Entry `k` is the cumulative signed (Doppler-shifted) detuning along the
/// loop path from the ground state to level `k`.
pub fn cumulative_detunings(scheme: &LevelScheme, fields: &FieldSet) -> ([f64; N_LEVELS], [f64; N_LEVELS]) {
    let mut offset = [0.0; N_LEVELS];
    let mut slope = [0.0; N_LEVELS];
    for t in &scheme.transitions[..N_LEVELS - 1] {
        let f = fields.get(t.label);
        let s = t.sign.value();
        offset[t.to()] = offset[t.from()] - s * f.detuning;
        slope[t.to()] = slope[t.from()] + s * f.axial_wavenumber();
    }
    (offset, slope)
}

/// Rotating-frame Hamiltonian (rad/s, ħ = 1) at axial velocity `v` (m/s).
///
/// Off-diagonal entries are `H[upper][lower] = Ω/2` on every loop
/// transition; the diagonal is the cumulative signed detuning from the
/// ground state, each field's detuning shifted by `−(k·ẑ) v`.
pub fn build_hamiltonian(scheme: &LevelScheme, fields: &FieldSet, v: f64) -> Mat6 {
    let mut h = zero_mat6();
    let (offset, slope) = cumulative_detunings(scheme, fields);
    for k in 0..N_LEVELS {
        h[k][k] = Complex64::new(offset[k] + slope[k] * v, 0.0);
    }
    for t in &scheme.transitions {
        let half = fields.get(t.label).rabi * 0.5;
        h[t.upper][t.lower] = half;
        h[t.lower][t.upper] = half.conj();
    }
    h
}

/// Vectorized Lindblad generator, `d vec(ρ)/dt = L vec(ρ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    matrix: CMatrix,
}

impl Liouvillian {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply(&self, rho: &Mat6) -> Mat6 {
        let out = self.matrix.mul_vec(&mat6_to_vec(rho));
        vec_to_mat6(&out)
    }
}

pub fn build_liouvillian(h: &Mat6, scheme: &LevelScheme) -> Result<Liouvillian> {
    let scale = h.iter().flatten().map(|z| z.norm()).fold(1.0, f64::max);
    for i in 0..N_LEVELS {
        for j in 0..N_LEVELS {
            if (h[i][j] - h[j][i].conj()).norm() > 1e-12 * scale {
                return Err(Error::config("Hamiltonian is not Hermitian"));
            }
        }
    }
    for d in &scheme.decays {
        if !(d.rate >= 0.0) {
            return Err(Error::config("negative decay rate"));
        }
    }
    if scheme.dephasing.iter().flatten().any(|g| !(*g >= 0.0)) {
        return Err(Error::config("negative dephasing rate"));
    }

    let mut m = CMatrix::zeros(N_SUPER, N_SUPER);
    let mi = Complex64::new(0.0, -1.0);
    // -i [H, ρ]
    for i in 0..N_LEVELS {
        for j in 0..N_LEVELS {
            let row = vec_index(i, j);
            for k in 0..N_LEVELS {
                if h[i][k] != ZERO {
                    m[(row, vec_index(k, j))] += mi * h[i][k];
                }
                if h[k][j] != ZERO {
                    m[(row, vec_index(i, k))] -= mi * h[k][j];
                }
            }
        }
    }
    // spontaneous decay, collapse operator sqrt(Γ)|to⟩⟨from|
    for d in &scheme.decays {
        if d.rate == 0.0 {
            continue;
        }
        let g = Complex64::new(d.rate, 0.0);
        m[(vec_index(d.to, d.to), vec_index(d.from, d.from))] += g;
        for j in 0..N_LEVELS {
            m[(vec_index(d.from, j), vec_index(d.from, j))] -= g * 0.5;
            m[(vec_index(j, d.from), vec_index(j, d.from))] -= g * 0.5;
        }
    }
    // pure dephasing of coherences
    for i in 0..N_LEVELS {
        for j in 0..N_LEVELS {
            let g = scheme.dephasing[i][j];
            if i != j && g != 0.0 {
                m[(vec_index(i, j), vec_index(i, j))] -= Complex64::new(g, 0.0);
            }
        }
    }
    Ok(Liouvillian { matrix: m })
}

pub fn mat6_to_vec(rho: &Mat6) -> Vec<Complex64> {
    rho.iter().flatten().copied().collect()
}

pub fn vec_to_mat6(v: &[Complex64]) -> Mat6 {
    assert_eq!(v.len(), N_SUPER);
    core::array::from_fn(|i| core::array::from_fn(|j| v[vec_index(i, j)]))
}

/// Steady state of the six-level atom.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    rho: Mat6,
    /// Axial velocity the state was solved at, m/s.
    pub velocity: f64,
}

impl DensityMatrix {
    pub fn new(rho: Mat6, velocity: f64) -> Self {
        DensityMatrix { rho, velocity }
    }

    pub fn ground(velocity: f64) -> Self {
        let mut rho = zero_mat6();
        rho[0][0] = Complex64::new(1.0, 0.0);
        DensityMatrix { rho, velocity }
    }

    pub fn matrix(&self) -> &Mat6 {
        &self.rho
    }

    pub fn population(&self, k: usize) -> f64 {
        self.rho[k][k].re
    }

    pub fn trace(&self) -> Complex64 {
        (0..N_LEVELS).map(|k| self.rho[k][k]).sum()
    }

    /// `max |ρ_ij − ρ_ji*|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut e: f64 = 0.0;
        for i in 0..N_LEVELS {
            for j in 0..N_LEVELS {
                e = e.max((self.rho[i][j] - self.rho[j][i].conj()).norm());
            }
        }
        e
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let m = CMatrix::from_row_major(N_LEVELS, N_LEVELS, mat6_to_vec(&self.rho));
        hermitian_eigenvalues(&m)
    }

    /// Hermitian within 1e-10, unit trace within 1e-10, eigenvalues ≥ −1e-8.
    pub fn check_invariants(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > 1e-10 {
            return Err(Error::Solver(alloc::format!(
                "density matrix not Hermitian ({herm:.3e})"
            )));
        }
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(Error::Solver(alloc::format!("density matrix trace {tr}")));
        }
        let lo = self.eigenvalues()?.first().copied().unwrap_or(0.0);
        if lo < -1e-8 {
            return Err(Error::Solver(alloc::format!("density matrix eigenvalue {lo:.3e} < 0")));
        }
        Ok(())
    }
}

/// Matrix element `ρ_ij`.
pub fn coherence(rho: &DensityMatrix, i: usize, j: usize) -> Result<Complex64> {
    if i >= N_LEVELS || j >= N_LEVELS {
        return Err(Error::IndexOutOfRange { i, j, dim: N_LEVELS });
    }
    Ok(rho.rho[i][j])
}

/// Steady state of `L`: checks that the kernel is one-dimensional from the
/// singular values, solves the trace-bordered system and verifies the
/// density-matrix invariants and the residual.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    let sv = singular_values(&l.matrix)?;
    let ratio = if sv[0] == 0.0 { f64::INFINITY } else { sv[1] / sv[0] };
    if ratio < KERNEL_GAP {
        return Err(Error::DegenerateSteadyState { ratio });
    }
    let rho = KernelSolver::new(l)?.steady_state(0.0);
    let residual: f64 = l
        .matrix
        .mul_vec(&mat6_to_vec(rho.matrix()))
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    if residual > 1e-10 * l.matrix.frobenius_norm() {
        return Err(Error::Solver(alloc::format!("steady-state residual {residual:.3e}")));
    }
    rho.check_invariants()?;
    Ok(rho)
}

/// LU factorization of the trace-bordered Liouvillian (row `ρ_11` replaced
/// by the trace functional), reused for the steady state and for linear
/// response solves at the same velocity.
///
/// Degeneracy is detected from the LU pivot ratio only; use
/// [`steady_state`] for the singular-value check.
#[derive(Debug, Clone)]
pub struct KernelSolver {
    lu: Lu,
}

impl KernelSolver {
    pub fn new(l: &Liouvillian) -> Result<Self> {
        let mut a = l.matrix.clone();
        let row = a.row_mut(0);
        row.iter_mut().for_each(|z| *z = ZERO);
        for k in 0..N_LEVELS {
            row[vec_index(k, k)] = Complex64::new(1.0, 0.0);
        }
        let lu = Lu::factor(a).map_err(|_| Error::DegenerateSteadyState { ratio: 0.0 })?;
        let ratio = lu.pivot_ratio();
        if ratio < PIVOT_FLOOR {
            return Err(Error::DegenerateSteadyState { ratio });
        }
        Ok(KernelSolver { lu })
    }

    /// Trace-one kernel element, Hermitian-projected.
    pub fn steady_state(&self, velocity: f64) -> DensityMatrix {
        let mut rhs = vec![ZERO; N_SUPER];
        rhs[0] = Complex64::new(1.0, 0.0);
        let x = self.lu.solve(&rhs);
        let mut rho = vec_to_mat6(&x);
        hermitize(&mut rho);
        let tr: Complex64 = (0..N_LEVELS).map(|k| rho[k][k]).sum();
        for z in rho.iter_mut().flatten() {
            *z /= tr.re;
        }
        DensityMatrix { rho, velocity }
    }

    /// Solves `L x = source` on the traceless subspace (`tr x = 0`).
    ///
    /// `source` must itself be traceless, which holds for any commutator.
    pub fn solve_traceless(&self, source: &Mat6) -> Mat6 {
        let mut rhs = mat6_to_vec(source);
        rhs[0] = ZERO;
        vec_to_mat6(&self.lu.solve(&rhs))
    }
}

fn hermitize(rho: &mut Mat6) {
    for i in 0..N_LEVELS {
        for j in i..N_LEVELS {
            let avg = 0.5 * (rho[i][j] + rho[j][i].conj());
            rho[i][j] = avg;
            rho[j][i] = avg.conj();
        }
    }
}

/// `-i [H, ρ]` as a matrix.
pub fn commutator_term(h: &Mat6, rho: &Mat6) -> Mat6 {
    let mut out = zero_mat6();
    let mi = Complex64::new(0.0, -1.0);
    for i in 0..N_LEVELS {
        for j in 0..N_LEVELS {
            let mut acc = ZERO;
            for k in 0..N_LEVELS {
                acc += h[i][k] * rho[k][j] - rho[i][k] * h[k][j];
            }
            out[i][j] = mi * acc;
        }
    }
    out
}

/// Convenience: Hamiltonian, Liouvillian and checked steady state in one go.
pub fn solve_at_velocity(scheme: &LevelScheme, fields: &FieldSet, v: f64) -> Result<DensityMatrix> {
    let h = build_hamiltonian(scheme, fields, v);
    let l = build_liouvillian(&h, scheme)?;
    let mut rho = steady_state(&l)?;
    rho.velocity = v;
    Ok(rho)
}

/// Fast steady state for hot loops (pivot-ratio degeneracy check only).
pub fn fast_steady_state(scheme: &LevelScheme, fields: &FieldSet, v: f64) -> Result<DensityMatrix> {
    let h = build_hamiltonian(scheme, fields, v);
    let l = build_liouvillian(&h, scheme)?;
    Ok(KernelSolver::new(&l)?.steady_state(v))
}

/// Axial velocities at which a pair of levels becomes Doppler-resonant,
/// `H_ii(v) = H_jj(v)`, sorted and deduplicated. Used as breakpoints for
/// velocity quadrature.
pub fn resonance_velocities(scheme: &LevelScheme, fields: &FieldSet) -> Vec<f64> {
    let (offset, slope) = cumulative_detunings(scheme, fields);
    let mut out = Vec::new();
    for i in 0..N_LEVELS {
        for j in (i + 1)..N_LEVELS {
            let ds = slope[i] - slope[j];
            if ds.abs() > 1e-6 {
                let v = -(offset[i] - offset[j]) / ds;
                if v.is_finite() {
                    out.push(v);
                }
            }
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    out
}

/// Linewidth-scale velocity width for resonance panels, m/s.
pub fn resonance_width(scheme: &LevelScheme, fields: &FieldSet) -> f64 {
    let (_, slope) = cumulative_detunings(scheme, fields);
    let kmax = slope.iter().map(|s| s.abs()).fold(0.0, f64::max);
    if kmax == 0.0 {
        return f64::INFINITY;
    }
    let rate = scheme.max_rate() + fields.max_rabi();
    rate / kmax
}
