use std::fmt::Write as _;

use cqed_gates::fiber::{solve_mode, CouplingProfile, ModeSolution, Polarization};
use cqed_gates::scenario::FiberSection;
use cqed_gates::scenario::Scenario;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{CliError, Result};
use crate::output::{cell, comment_block, render_csv, Output};

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FiberFile {
    #[serde(default)]
    fiber: FiberSection,
}

/// Fiber parameters from a file holding either only a `[fiber]` table or a
/// complete scenario.
pub fn section_from_toml(text: &str) -> Result<FiberSection> {
    if let Ok(f) = toml::from_str::<FiberFile>(text) {
        return Ok(f.fiber);
    }
    Ok(Scenario::from_toml_str(text)?.fiber)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileGrid {
    pub r_max_nm: f64,
    pub points: usize,
}

impl Default for ProfileGrid {
    fn default() -> Self {
        ProfileGrid { r_max_nm: 1500.0, points: 130 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PolarizationReport {
    pub name: &'static str,
    pub volume_um3: f64,
    pub peak_coupling_2pi_mhz: f64,
    /// Where ε|E|² peaks, in units of the fiber radius.
    pub max_radius: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileRow {
    pub r_nm: f64,
    pub g_circular_2pi_mhz: f64,
    pub g_linear_parallel_2pi_mhz: f64,
    pub g_linear_orthogonal_2pi_mhz: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FiberReport {
    pub fiber: FiberSection,
    pub mode: ModeSolution,
    pub effective_index: f64,
    pub polarizations: Vec<PolarizationReport>,
    pub profile: Vec<ProfileRow>,
}

pub fn compute(section: &FiberSection, grid: ProfileGrid) -> Result<FiberReport> {
    let spec = section.spec();
    let a = spec.radius_nm;
    if !(grid.r_max_nm > a) || grid.points == 0 {
        return Err(CliError::Usage(format!(
            "profile grid needs r_max_nm > {a} nm and at least one point"
        )));
    }
    let mode = solve_mode(&spec)?;
    let t = section.transition();
    let phi0 = section.polarization_angle_rad;
    let circ = CouplingProfile::new(&spec, &mode, Polarization::Circular, &t)?;
    let lin = CouplingProfile::new(&spec, &mode, Polarization::QuasiLinear { phi0 }, &t)?;
    let report = |name, p: &CouplingProfile| PolarizationReport {
        name,
        volume_um3: p.volume.volume_um3,
        peak_coupling_2pi_mhz: p.peak_coupling,
        max_radius: p.volume.max_radius,
    };
    let profile = (1..=grid.points)
        .map(|i| {
            let r = a + (grid.r_max_nm - a) * i as f64 / grid.points as f64;
            ProfileRow {
                r_nm: r,
                g_circular_2pi_mhz: circ.g(r, phi0),
                g_linear_parallel_2pi_mhz: lin.g(r, phi0),
                g_linear_orthogonal_2pi_mhz: lin.g(r, phi0 + std::f64::consts::FRAC_PI_2),
            }
        })
        .collect();
    Ok(FiberReport {
        fiber: *section,
        effective_index: mode.beta / spec.wavenumber_per_um,
        mode,
        polarizations: vec![report("circular", &circ), report("quasi_linear", &lin)],
        profile,
    })
}

fn text_report(r: &FiberReport) -> String {
    let m = &r.mode;
    let mut t = String::new();
    let _ = writeln!(t, "v = {:.6}  u = {:.6}  w = {:.6}  s = {:.6}", m.v, m.u, m.w, m.s);
    let _ = writeln!(t, "beta = {:.6} um^-1  n_eff = {:.6}  residual = {:.1e}", m.beta, r.effective_index, m.residual);
    for p in &r.polarizations {
        let _ = writeln!(
            t,
            "{:<12}  V_mode = {:.6e} um^3  g_peak = {:.4} (2pi MHz)",
            p.name, p.volume_um3, p.peak_coupling_2pi_mhz
        );
    }
    let _ = writeln!(t, "r_nm  g_circular  g_linear_parallel  g_linear_orthogonal");
    for row in &r.profile {
        let _ = writeln!(
            t,
            "{:.1}  {:.4}  {:.4}  {:.4}",
            row.r_nm, row.g_circular_2pi_mhz, row.g_linear_parallel_2pi_mhz, row.g_linear_orthogonal_2pi_mhz
        );
    }
    t
}

pub fn run(section: &FiberSection, grid: ProfileGrid) -> Result<Output> {
    let r = compute(section, grid)?;
    let echo = toml::to_string(&FiberFile { fiber: *section }).unwrap_or_default();
    let header: Vec<String> = ["r_nm", "g_circular_2pi_mhz", "g_linear_parallel_2pi_mhz", "g_linear_orthogonal_2pi_mhz"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows: Vec<Vec<String>> = r
        .profile
        .iter()
        .map(|p| {
            vec![
                cell(p.r_nm),
                cell(p.g_circular_2pi_mhz),
                cell(p.g_linear_parallel_2pi_mhz),
                cell(p.g_linear_orthogonal_2pi_mhz),
            ]
        })
        .collect();
    let csv = render_csv(&comment_block("fiber", &echo), &header, &rows)?;
    Ok(Output { stem: "fiber", csv, json: json!(r), text: Some(text_report(&r)) })
}
