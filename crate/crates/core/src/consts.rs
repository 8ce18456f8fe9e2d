//! SI constants (CODATA 2018) and rubidium-87 reference data.

use core::f64::consts::PI;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const PLANCK: f64 = 6.626_070_15e-34;
pub const HBAR: f64 = PLANCK / (2.0 * PI);
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// ea₀ in C·m.
pub const ATOMIC_DIPOLE_UNIT: f64 = ELEMENTARY_CHARGE * BOHR_RADIUS;

pub const RB87_MASS: f64 = 86.909_180_527 * ATOMIC_MASS_UNIT;

/// 5S₁/₂ → 5P₁/₂ (D1, 795 nm).
pub const RB87_D1_HZ: f64 = 377.107_463_380e12;
/// 5S₁/₂ → 5P₃/₂ (D2, 780 nm).
pub const RB87_D2_HZ: f64 = 384.230_484_468_5e12;

pub const TWO_PI: f64 = 2.0 * PI;
