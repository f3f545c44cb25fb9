//! HE₁₁ guided mode of a step-index nanofiber and the resulting atom-cavity
//! coupling strength as a function of atom position.
//!
//! Lengths are in µm internally; radial coordinates are often expressed in
//! units of the core radius (R = r/a).

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::constants::{
    BOHR_RADIUS, CS_ANGULAR_FACTOR_SQ, CS_D2_DIPOLE_AU, ELEMENTARY_CHARGE, EPSILON_0, HBAR,
    SPEED_OF_LIGHT, TWO_PI_MHZ,
};
use crate::error::{precondition, Error, Result};
use crate::numeric::{bracketed_root, golden_section_max, integrate};

/// First zero of J₁.
pub const J1_FIRST_ZERO: f64 = 3.831_705_970_207_512;

/// Bessel J₁ and its derivative.
pub fn bessel_j1(x: f64) -> (f64, f64) {
    if x.abs() < 1e-6 {
        // J₁(x) = x/2 − x³/16 + …
        return (0.5 * x - x * x * x / 16.0, 0.5 - 3.0 * x * x / 16.0);
    }
    let (j, _, jp, _) = puruspe::besseljy(1.0, x);
    (j, jp)
}

/// Modified Bessel K₁ and its derivative, x > 0.
pub fn bessel_k1(x: f64) -> (f64, f64) {
    let (_, k, _, kp) = puruspe::besselik(1.0, x);
    (k, kp)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberSpec {
    pub radius_nm: f64,
    pub n_core: f64,
    pub n_clad: f64,
    /// Vacuum wavenumber k in µm⁻¹.
    pub wavenumber_per_um: f64,
    pub cavity_length_m: f64,
}

impl Default for FiberSpec {
    /// 200 nm silica nanofiber at the Cs D2 line in a 12 cm cavity.
    fn default() -> Self {
        FiberSpec {
            radius_nm: 200.0,
            n_core: 1.45,
            n_clad: 1.0,
            wavenumber_per_um: 7.372,
            cavity_length_m: 0.12,
        }
    }
}

impl FiberSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.n_core > self.n_clad && self.n_clad >= 1.0) {
            return precondition(format!(
                "fiber needs n_core > n_clad >= 1 (got {}, {})",
                self.n_core, self.n_clad
            ));
        }
        if !(self.radius_nm > 0.0 && self.wavenumber_per_um > 0.0 && self.cavity_length_m > 0.0) {
            return precondition("fiber radius, wavenumber and cavity length must be positive");
        }
        Ok(())
    }

    pub fn radius_um(&self) -> f64 {
        self.radius_nm * 1e-3
    }

    /// v = a k √(n1² − n0²).
    pub fn fiber_volume(&self) -> f64 {
        self.radius_um() * self.wavenumber_per_um * (self.n_core.powi(2) - self.n_clad.powi(2)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Polarization {
    Circular,
    /// Equal superposition of both circular modes, polarized along `phi0`.
    QuasiLinear { phi0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomPosition {
    pub r_nm: f64,
    pub phi: f64,
    pub polarization: Polarization,
}

/// Fundamental-mode solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeSolution {
    pub u: f64,
    pub w: f64,
    /// Propagation constant in µm⁻¹.
    pub beta: f64,
    pub s: f64,
    pub v: f64,
    /// Residual of the characteristic equation at the root.
    pub residual: f64,
    /// a β, used as the transverse-field prefactor scale.
    a_beta: f64,
    /// J₁(u)/K₁(w), matching the fields at the core boundary.
    matching: f64,
}

fn bessel_ratios(u: f64, w: f64) -> (f64, f64) {
    let (j, jp) = bessel_j1(u);
    let (k, kp) = bessel_k1(w);
    (jp / (u * j), kp / (w * k))
}

/// Characteristic function of the l = 1 hybrid modes; zero at a guided mode.
pub fn characteristic_residual(fiber: &FiberSpec, u: f64) -> f64 {
    let v = fiber.fiber_volume();
    let w = (v * v - u * u).sqrt();
    let (jr, kr) = bessel_ratios(u, w);
    let (n1, n0) = (fiber.n_core.powi(2), fiber.n_clad.powi(2));
    (n1 * jr + n0 * kr) * (jr + kr) - (n1 / (u * u) + n0 / (w * w)) * (1.0 / (u * u) + 1.0 / (w * w))
}

/// Finds the HE₁₁ root u ∈ (0, min(v, j₁,₁)).
pub fn solve_mode(fiber: &FiberSpec) -> Result<ModeSolution> {
    fiber.validate()?;
    let v = fiber.fiber_volume();
    let upper = v.min(J1_FIRST_ZERO);
    let f = |u: f64| characteristic_residual(fiber, u);
    const SCAN: usize = 400;
    let grid: Vec<f64> = (1..SCAN).map(|i| upper * i as f64 / SCAN as f64).collect();
    let mut trace = Vec::new();
    let mut bracket = None;
    for pair in grid.windows(2) {
        let (fa, fb) = (f(pair[0]), f(pair[1]));
        trace.push((pair[0], fa));
        if fa.is_finite() && fb.is_finite() && fa.signum() != fb.signum() {
            bracket = Some((pair[0], pair[1]));
            break;
        }
    }
    let (lo, hi) = bracket.ok_or_else(|| {
        let shown: Vec<String> =
            trace.iter().step_by(50).map(|(u, r)| format!("f({u:.4})={r:.3e}")).collect();
        Error::Solver(format!("no HE11 root for v = {v}; residual trace: {}", shown.join(", ")))
    })?;
    let u = bracketed_root(f, lo, hi, 1e-15)?;
    let residual = f(u);
    if residual.abs() > 1e-10 {
        return Err(Error::Solver(format!("HE11 root residual {residual:e} exceeds 1e-10")));
    }
    let w = (v * v - u * u).sqrt();
    let a = fiber.radius_um();
    let k = fiber.wavenumber_per_um;
    let beta = ((fiber.n_core * k).powi(2) - (u / a).powi(2)).sqrt();
    let (jr, kr) = bessel_ratios(u, w);
    let s = (1.0 / (u * u) + 1.0 / (w * w)) / (jr + kr);
    Ok(ModeSolution {
        u,
        w,
        beta,
        s,
        v,
        residual,
        a_beta: a * beta,
        matching: bessel_j1(u).0 / bessel_k1(w).0,
    })
}

impl ModeSolution {
    /// Cylindrical components (e_r, e_φ, e_z) of the co-rotating circular
    /// mode at R = r/a, without the e^{i(φ − βz)} factor.
    pub fn components(&self, rr: f64) -> [C64; 3] {
        let (u, w, s, ab) = (self.u, self.w, self.s, self.a_beta);
        if rr < 1.0 {
            let x = u * rr;
            let (j, jp) = bessel_j1(x);
            let j_over_x = if x < 1e-6 { 0.5 - x * x / 16.0 } else { j / x };
            [
                C64::new(0.0, -ab / u * (jp - s * j_over_x)),
                C64::new(ab / u * (j_over_x - s * jp), 0.0),
                C64::new(j, 0.0),
            ]
        } else {
            let x = w * rr;
            let (k, kp) = bessel_k1(x);
            let f = self.matching;
            [
                C64::new(0.0, ab / w * (kp - s * k / x) * f),
                C64::new(-ab / w * (k / x - s * kp) * f, 0.0),
                C64::new(k * f, 0.0),
            ]
        }
    }

    /// |E|² at (R, φ) for the given polarization.
    pub fn intensity(&self, rr: f64, phi: f64, pol: Polarization) -> f64 {
        let [er, ep, ez] = self.components(rr);
        match pol {
            Polarization::Circular => er.norm_sqr() + ep.norm_sqr() + ez.norm_sqr(),
            Polarization::QuasiLinear { phi0 } => {
                let (sn, cs) = (phi - phi0).sin_cos();
                2.0 * ((er.norm_sqr() + ez.norm_sqr()) * cs * cs + ep.norm_sqr() * sn * sn)
            }
        }
    }
}

fn permittivity(fiber: &FiberSpec, rr: f64) -> f64 {
    if rr < 1.0 {
        fiber.n_core.powi(2)
    } else {
        fiber.n_clad.powi(2)
    }
}

/// Cartesian field (E_x, E_y, E_z) at the atom position and axial coordinate
/// `z_um`.
pub fn field_at(mode: &ModeSolution, fiber: &FiberSpec, pos: &AtomPosition, z_um: f64) -> [C64; 3] {
    let rr = pos.r_nm / fiber.radius_nm;
    let [er, ep, ez] = mode.components(rr);
    let phi = pos.phi;
    let axial = C64::from_polar(1.0, -mode.beta * z_um);
    let (e_r, e_p, e_z) = match pos.polarization {
        Polarization::Circular => {
            let ph = C64::from_polar(1.0, phi);
            (er * ph, ep * ph, ez * ph)
        }
        Polarization::QuasiLinear { phi0 } => {
            let plus = C64::from_polar(1.0, phi - phi0);
            let minus = plus.conj();
            let s = std::f64::consts::FRAC_1_SQRT_2;
            ((er * plus + er * minus) * s, (ep * plus - ep * minus) * s, (ez * plus + ez * minus) * s)
        }
    };
    let (sn, cs) = phi.sin_cos();
    [(e_r * cs - e_p * sn) * axial, (e_r * sn + e_p * cs) * axial, e_z * axial]
}

/// Normalized mode volume and the energy-density maximum it refers to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeVolume {
    pub volume_um3: f64,
    /// max ε|E|² over the transverse plane.
    pub max_energy_density: f64,
    /// Radius (in units of a) where the maximum occurs.
    pub max_radius: f64,
    /// ∫ ε|E|² dA in µm².
    pub transverse_integral_um2: f64,
}

/// Radius (units of a) beyond which the evanescent envelope K₁(wR)/K₁(w)
/// drops below 1e-12.
fn truncation_radius(mode: &ModeSolution) -> Result<f64> {
    let k_surface = bessel_k1(mode.w).0;
    let f = |rr: f64| (bessel_k1(mode.w * rr).0 / k_surface).ln() + 12.0 * std::f64::consts::LN_10;
    let mut hi = 2.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e5 {
            return Err(Error::Solver("evanescent field does not decay".into()));
        }
    }
    bracketed_root(f, 1.0, hi, 1e-10)
}

fn max_energy_density(mode: &ModeSolution, fiber: &FiberSpec, pol: Polarization) -> (f64, f64) {
    // For the quasi-linear mode the azimuthal extremes lie on and orthogonal
    // to the polarization axis.
    let phis: Vec<f64> = match pol {
        Polarization::Circular => vec![0.0],
        Polarization::QuasiLinear { phi0 } => vec![phi0, phi0 + std::f64::consts::FRAC_PI_2],
    };
    let density = |rr: f64, phi: f64| permittivity(fiber, rr) * mode.intensity(rr, phi, pol);
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for &phi in &phis {
        for (lo, hi) in [(0.0, 1.0 - 1e-12), (1.0, 4.0)] {
            const N: usize = 400;
            let mut local = (f64::NEG_INFINITY, lo);
            for i in 0..=N {
                let rr = lo + (hi - lo) * i as f64 / N as f64;
                let val = density(rr, phi);
                if val > local.0 {
                    local = (val, rr);
                }
            }
            let step = (hi - lo) / N as f64;
            let a = (local.1 - step).max(lo);
            let b = (local.1 + step).min(hi);
            let refined = golden_section_max(|rr| density(rr, phi), a, b, 1e-12);
            let cand = if refined.value > local.0 { (refined.value, refined.x) } else { local };
            if cand.0 > best.0 {
                best = (cand.0, cand.1, phi);
            }
        }
    }
    (best.0, best.1)
}

/// V_mode = L ∫ ε|E|² dA / max(ε|E|²).
pub fn mode_volume(mode: &ModeSolution, fiber: &FiberSpec, pol: Polarization) -> Result<ModeVolume> {
    const TOL: f64 = 1e-9;
    let r_max = truncation_radius(mode)?;
    let a = fiber.radius_um();
    let two_pi = 2.0 * std::f64::consts::PI;
    // Radial weight of the azimuthal integral of ε|E|².
    let ring = |rr: f64| -> Result<f64> {
        match pol {
            Polarization::Circular => {
                Ok(two_pi * permittivity(fiber, rr) * mode.intensity(rr, 0.0, pol) * rr)
            }
            Polarization::QuasiLinear { .. } => {
                let inner = integrate(|phi| mode.intensity(rr, phi, pol), 0.0, two_pi, TOL)?;
                Ok(permittivity(fiber, rr) * inner.value * rr)
            }
        }
    };
    let radial = |lo: f64, hi: f64| -> Result<f64> {
        let failure = std::cell::RefCell::new(None);
        let res = integrate(
            |rr| {
                ring(rr).unwrap_or_else(|e| {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                })
            },
            lo,
            hi,
            TOL,
        )?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(res.value)
    };
    let integral = (radial(0.0, 1.0)? + radial(1.0, r_max)?) * a * a;
    let (max_density, max_radius) = max_energy_density(mode, fiber, pol);
    let length_um = fiber.cavity_length_m * 1e6;
    Ok(ModeVolume {
        volume_um3: length_um * integral / max_density,
        max_energy_density: max_density,
        max_radius,
        transverse_integral_um2: integral,
    })
}

/// Dipole moment of the cavity transition, µ = d · f · e a₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipoleTransition {
    /// Reduced dipole matrix element in atomic units.
    pub dipole_au: f64,
    /// Angular factor |f|² of the driven transition.
    pub angular_factor_sq: f64,
}

impl Default for DipoleTransition {
    fn default() -> Self {
        DipoleTransition { dipole_au: CS_D2_DIPOLE_AU, angular_factor_sq: CS_ANGULAR_FACTOR_SQ }
    }
}

impl DipoleTransition {
    pub fn dipole_si(&self) -> f64 {
        self.dipole_au * self.angular_factor_sq.sqrt() * ELEMENTARY_CHARGE * BOHR_RADIUS
    }
}

/// Coupling strength g(r, φ) for one polarization, with the mode volume
/// computed once.
#[derive(Debug, Clone, Copy)]
pub struct CouplingProfile {
    pub fiber: FiberSpec,
    pub mode: ModeSolution,
    pub polarization: Polarization,
    pub volume: ModeVolume,
    /// √(µ²ω / 2ħε₀V) in 2π×MHz.
    pub peak_coupling: f64,
}

impl CouplingProfile {
    pub fn new(
        fiber: &FiberSpec,
        mode: &ModeSolution,
        polarization: Polarization,
        transition: &DipoleTransition,
    ) -> Result<Self> {
        let volume = mode_volume(mode, fiber, polarization)?;
        let omega = SPEED_OF_LIGHT * fiber.wavenumber_per_um * 1e6;
        let mu = transition.dipole_si();
        let v_si = volume.volume_um3 * 1e-18;
        let peak = (mu * mu * omega / (2.0 * HBAR * EPSILON_0 * v_si)).sqrt() / TWO_PI_MHZ;
        Ok(CouplingProfile { fiber: *fiber, mode: *mode, polarization, volume, peak_coupling: peak })
    }

    /// g at radius `r_nm` and azimuth `phi`, in 2π×MHz.
    pub fn g(&self, r_nm: f64, phi: f64) -> f64 {
        let rr = r_nm / self.fiber.radius_nm;
        let norm = self.mode.intensity(rr, phi, self.polarization) / self.volume.max_energy_density;
        self.peak_coupling * norm.sqrt()
    }
}

/// g for a single atom position; see [`CouplingProfile`] for repeated use.
pub fn coupling_strength(
    mode: &ModeSolution,
    fiber: &FiberSpec,
    pos: &AtomPosition,
    transition: &DipoleTransition,
) -> Result<f64> {
    Ok(CouplingProfile::new(fiber, mode, pos.polarization, transition)?.g(pos.r_nm, pos.phi))
}
