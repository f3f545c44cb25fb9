//! Physical constants (CODATA 2018) and cesium defaults.

pub const HBAR: f64 = 1.054_571_817e-34;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
/// Atomic unit of electric polarizability in C²m²/J.
pub const POLARIZABILITY_AU: f64 = 1.648_777_274_36e-41;

/// Converts a rate in 2π×MHz to rad/s.
pub const TWO_PI_MHZ: f64 = 2.0 * std::f64::consts::PI * 1e6;

/// Half the natural linewidth of the Cs D2 line, 2π×MHz.
pub const CS_GAMMA: f64 = 2.6;
/// Cs ground-state hyperfine splitting, 2π×MHz.
pub const CS_QUBIT_SPLITTING: f64 = 9_192.631_770;
/// Excited-state offset reducing the effective |0⟩ detuning, 2π×MHz.
pub const CS_EXCITED_OFFSET: f64 = 251.1;
/// |µ₀/µ₁|² for the residual |0⟩ coupling.
pub const CS_DIPOLE_RATIO_SQ: f64 = 3.0 / 7.0;
/// Reduced D2 dipole element in atomic units.
pub const CS_D2_DIPOLE_AU: f64 = 4.4837;
/// Angular factor of the cycling-free π transition, |f|².
pub const CS_ANGULAR_FACTOR_SQ: f64 = 5.0 / 18.0;

/// Proportionality constant of the splitting-limited infidelity floor.
pub const SPLITTING_FLOOR_CONSTANT: f64 = 0.7528;

/// Differential polarizability at 1480 nm, atomic units.
pub const CS_POLARIZABILITY_1480_AU: f64 = 26709.98;
