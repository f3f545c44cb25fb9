//! Single-photon reflection, transmission and loss amplitudes of a one-sided
//! cavity containing (possibly detuned) atoms.
//!
//! Frequencies are measured relative to a reference probe frequency. A cavity
//! with `omega_c = 0` is resonant with the reference probe, and an atom's
//! `delta_a` is its detuning ω_p − ω_a at the reference probe.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::constants::{CS_DIPOLE_RATIO_SQ, CS_EXCITED_OFFSET, CS_GAMMA, CS_QUBIT_SPLITTING};
use crate::error::{precondition, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavitySpec {
    /// Input-mirror decay rate.
    pub kappa_r: f64,
    /// Transmission through the back mirror.
    pub kappa_t: f64,
    /// Mirror scattering and absorption.
    pub kappa_m: f64,
    /// Cavity resonance relative to the reference probe.
    pub omega_c: f64,
}

impl CavitySpec {
    pub fn new(kappa_r: f64, kappa_t: f64, kappa_m: f64) -> Result<Self> {
        let c = CavitySpec { kappa_r, kappa_t, kappa_m, omega_c: 0.0 };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.kappa_r, self.kappa_t, self.kappa_m, self.omega_c]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return precondition("cavity rates must be finite");
        }
        if self.kappa_r <= 0.0 || self.kappa_t < 0.0 || self.kappa_m < 0.0 {
            return precondition(format!(
                "cavity rates must satisfy kappa_r > 0, kappa_t >= 0, kappa_m >= 0 \
                 (got {}, {}, {})",
                self.kappa_r, self.kappa_t, self.kappa_m
            ));
        }
        Ok(())
    }

    /// Total field decay rate κ.
    pub fn kappa(&self) -> f64 {
        self.kappa_r + self.kappa_t + self.kappa_m
    }

    /// κ_r/κ.
    pub fn loss_ratio(&self) -> f64 {
        self.kappa_r / self.kappa()
    }
}

/// Coupling of the nominally dark |0⟩ state through a neighbouring excited
/// level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualCoupling {
    /// Ratio of the |0⟩ to |1⟩ coupling strengths.
    pub factor: f64,
    /// Effective detuning of the |0⟩ transition from the |1⟩ transition.
    pub splitting: f64,
}

impl ResidualCoupling {
    /// Cs: |µ₀/µ₁|² = 3/7 and ω_q' = ω_q − 2π×251.1 MHz.
    pub fn cesium() -> Self {
        ResidualCoupling {
            factor: CS_DIPOLE_RATIO_SQ.sqrt(),
            splitting: CS_QUBIT_SPLITTING - CS_EXCITED_OFFSET,
        }
    }

    /// Both qubit states couple through the same excited state.
    pub fn same_excited_state(splitting: f64) -> Self {
        ResidualCoupling { factor: 1.0, splitting }
    }

    /// Relative strength ε = factor² · 2γ/ω_q' of the residual term.
    pub fn strength(&self, gamma: f64) -> f64 {
        self.factor * self.factor * 2.0 * gamma / self.splitting
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    pub g: f64,
    /// ω_p − ω_a at the reference probe.
    pub delta_a: f64,
    /// Half the spontaneous emission rate.
    pub gamma: f64,
    pub residual: Option<ResidualCoupling>,
}

impl AtomSpec {
    /// Resonant Cs atom with coupling `g`.
    pub fn resonant(g: f64) -> Self {
        AtomSpec { g, delta_a: 0.0, gamma: CS_GAMMA, residual: None }
    }

    pub fn with_detuning(mut self, delta_a: f64) -> Self {
        self.delta_a = delta_a;
        self
    }

    pub fn with_residual(mut self, residual: Option<ResidualCoupling>) -> Self {
        self.residual = residual;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g >= 0.0 && self.g.is_finite()) {
            return precondition(format!("atom coupling must be finite and >= 0 (got {})", self.g));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return precondition(format!("atom gamma must be > 0 (got {})", self.gamma));
        }
        if !self.delta_a.is_finite() {
            return precondition("atom detuning must be finite");
        }
        if let Some(res) = self.residual {
            if !(res.splitting > 0.0 && res.factor >= 0.0) {
                return precondition("residual coupling needs splitting > 0 and factor >= 0");
            }
        }
        Ok(())
    }

    /// The term through which this atom couples while in |0⟩, if any.
    pub fn dark_state_term(&self) -> Option<AtomSpec> {
        self.residual.map(|res| AtomSpec {
            g: self.g * res.factor,
            delta_a: self.delta_a - res.splitting,
            gamma: self.gamma,
            residual: None,
        })
    }
}

/// Output amplitudes of a single photon: reflected, transmitted, scattered at
/// the mirrors and scattered by the atoms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeSet {
    pub r: C64,
    pub t: C64,
    pub m: C64,
    pub a: C64,
}

impl AmplitudeSet {
    pub fn norm_sqr(&self) -> f64 {
        self.r.norm_sqr() + self.t.norm_sqr() + self.m.norm_sqr() + self.a.norm_sqr()
    }

    pub fn as_array(&self) -> [C64; 4] {
        [self.r, self.t, self.m, self.a]
    }
}

/// g(N, ω) = Σ g_n² / (i(ω − ω_a,n) − γ_n) for a probe at offset `omega`.
pub fn collective_coupling(atoms: &[AtomSpec], omega: f64) -> C64 {
    atoms
        .iter()
        .map(|at| at.g * at.g / C64::new(-at.gamma, omega + at.delta_a))
        .sum()
}

/// κ_a = −Re g(N, ω).
pub fn atomic_scatter_rate(atoms: &[AtomSpec], omega: f64) -> f64 {
    atoms
        .iter()
        .map(|at| {
            let d = omega + at.delta_a;
            at.gamma * at.g * at.g / (d * d + at.gamma * at.gamma)
        })
        .sum()
}

/// Amplitudes for a probe at `omega_p` with `atoms` as the coupled set.
pub fn amplitudes(cavity: &CavitySpec, atoms: &[AtomSpec], omega_p: f64) -> Result<AmplitudeSet> {
    cavity.validate()?;
    let g_n = collective_coupling(atoms, omega_p);
    let kappa_a = atomic_scatter_rate(atoms, omega_p);
    let d = C64::new(-cavity.kappa(), omega_p - cavity.omega_c) + g_n;
    if d == C64::new(0.0, 0.0) {
        return precondition("amplitude denominator vanishes");
    }
    let kr = cavity.kappa_r;
    Ok(AmplitudeSet {
        r: 1.0 + 2.0 * kr / d,
        t: 2.0 * (kr * cavity.kappa_t).sqrt() / d,
        m: 2.0 * (kr * cavity.kappa_m).sqrt() / d,
        a: 2.0 * (kr * kappa_a).sqrt() / d,
    })
}

/// r(N) = 1 − 2κ_r/(κ + N g²/γ) for N resonant atoms of equal coupling.
pub fn simplified_reflection(n: usize, g: f64, gamma: f64, cavity: &CavitySpec) -> C64 {
    C64::new(1.0 - 2.0 * cavity.kappa_r / (cavity.kappa() + n as f64 * g * g / gamma), 0.0)
}

/// Additive correction to the empty-cavity reflection r(0) from the residual
/// |0⟩ coupling, evaluated at the fidelity-optimal cooperativity.
pub fn residual_reflection_shift(
    cavity: &CavitySpec,
    gamma: f64,
    residual: &ResidualCoupling,
) -> Result<C64> {
    let rho = cavity.loss_ratio();
    if rho <= 0.5 {
        return precondition(format!(
            "loss ratio kappa_r/kappa = {rho} must exceed 1/2 for an optimum to exist"
        ));
    }
    Ok(reflection_shift_at(rho, residual.strength(gamma)))
}

pub(crate) fn reflection_shift_at(rho: f64, eps: f64) -> C64 {
    let c_opt = rho / (1.0 - rho) - 1.0;
    2.0 * rho * (1.0 - 1.0 / C64::new(1.0, eps * c_opt))
}
