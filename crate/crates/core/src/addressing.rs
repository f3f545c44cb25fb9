//! Atom addressing: local AC Stark shifts, the laser power they need, and
//! many-body scenarios built from target and spectator atoms.

use serde::{Deserialize, Serialize};

use crate::constants::{
    CS_POLARIZABILITY_1480_AU, EPSILON_0, HBAR, POLARIZABILITY_AU, SPEED_OF_LIGHT, TWO_PI_MHZ,
};
use crate::error::{precondition, Result};
use crate::scenario::Scenario;

/// Light shift Δ_AC = Ω²/(4δ).
///
/// `delta` is measured as ω_a − ω_L, so a red-detuned beam has δ > 0 and a
/// positive shift lowers the transition to ω_a − Δ_AC.
pub fn stark_shift(rabi: f64, delta: f64) -> Result<f64> {
    if delta == 0.0 {
        return precondition("Stark shift needs a nonzero laser detuning");
    }
    Ok(rabi * rabi / (4.0 * delta))
}

/// Transition frequency after a light shift.
pub fn shifted_transition(omega_0: f64, shift: f64) -> f64 {
    omega_0 - shift
}

/// α = α_S(excited) − (2/3) α_T(excited) − α_S(ground).
pub fn effective_polarizability(scalar_ground: f64, scalar_excited: f64, tensor_excited: f64) -> f64 {
    scalar_excited - 2.0 / 3.0 * tensor_excited - scalar_ground
}

/// Gaussian addressing beam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AddressingBeam {
    pub wavelength_nm: f64,
    pub waist_um: f64,
    /// Differential polarizability in atomic units.
    pub polarizability_au: f64,
}

impl Default for AddressingBeam {
    fn default() -> Self {
        AddressingBeam {
            wavelength_nm: 1480.0,
            waist_um: 2.0,
            polarizability_au: CS_POLARIZABILITY_1480_AU,
        }
    }
}

impl AddressingBeam {
    fn check(&self) -> Result<()> {
        if !(self.polarizability_au > 0.0) {
            return precondition(format!(
                "polarizability must be positive (got {} a.u.)",
                self.polarizability_au
            ));
        }
        if !(self.waist_um > 0.0) {
            return precondition("beam waist must be positive");
        }
        Ok(())
    }

    /// Watts per (rad/s) of shift.
    fn watts_per_rad_s(&self) -> f64 {
        let w0 = self.waist_um * 1e-6;
        2.0 * std::f64::consts::PI * HBAR * SPEED_OF_LIGHT * EPSILON_0 * w0 * w0
            / (self.polarizability_au * POLARIZABILITY_AU)
    }
}

/// Average power in mW for a shift Δ_AC given in 2π×MHz:
/// P = 2πħcε₀w₀²Δ_AC/α.
pub fn power_for_shift(beam: &AddressingBeam, shift: f64) -> Result<f64> {
    beam.check()?;
    if shift < 0.0 {
        return precondition("requested Stark shift must be non-negative");
    }
    Ok(beam.watts_per_rad_s() * shift * TWO_PI_MHZ * 1e3)
}

/// Inverse of [`power_for_shift`]: shift in 2π×MHz for a power in mW.
pub fn shift_for_power(beam: &AddressingBeam, power_mw: f64) -> Result<f64> {
    beam.check()?;
    if power_mw < 0.0 {
        return precondition("laser power must be non-negative");
    }
    Ok(power_mw * 1e-3 / beam.watts_per_rad_s() / TWO_PI_MHZ)
}

/// Places every spectator atom (neither control nor target) at fiber
/// distance `r_nm` with detuning `delta`. Targets keep their base settings.
pub fn build_scenario(base: &Scenario, r_nm: f64, delta: f64) -> Result<Scenario> {
    if r_nm <= base.fiber.radius_nm {
        return precondition(format!(
            "spectator distance {r_nm} nm lies inside the fiber (radius {} nm)",
            base.fiber.radius_nm
        ));
    }
    let mut s = base.expanded();
    let (control, target) = s.pair()?;
    for (q, atom) in s.atoms.iter_mut().enumerate() {
        if q != control && q != target {
            atom.g_2pi_mhz = None;
            atom.r_nm = Some(r_nm);
            atom.delta_2pi_mhz = delta;
        }
    }
    Ok(s)
}
