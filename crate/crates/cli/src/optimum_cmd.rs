use std::fmt::Write as _;

use cqed_gates::constants::{CS_DIPOLE_RATIO_SQ, CS_EXCITED_OFFSET, CS_GAMMA, CS_QUBIT_SPLITTING};
use cqed_gates::fidelity::{
    entanglement_fidelity, locate_splitting_ceiling, optimum_cooperativity, optimum_performance,
    qubit_splitting_floor, required_loss_ratio, splitting_matched_optimum,
};
use cqed_gates::gate::{ideal_unitary, success_probability};
use cqed_gates::numeric::golden_section_max;
use cqed_gates::{AtomSpec, CavitySpec, Flavor, LocalGateChannel, NodeLayout, ResidualCoupling};
use serde::Serialize;
use serde_json::json;

use crate::error::Result;
use crate::output::{cell, comment_block, render_csv, Output};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimumInput {
    pub kappa_r: f64,
    pub kappa_t: f64,
    pub kappa_m: f64,
    pub gamma: f64,
    /// Qubit splitting minus the excited-state offset seen by |0⟩.
    pub effective_splitting: f64,
    pub dipole_ratio_sq: f64,
    pub target_fidelity: Option<f64>,
}

impl OptimumInput {
    /// Cs defaults for everything but the cavity rates.
    pub fn cesium(kappa_r: f64, kappa_t: f64, kappa_m: f64) -> Self {
        OptimumInput {
            kappa_r,
            kappa_t,
            kappa_m,
            gamma: CS_GAMMA,
            effective_splitting: CS_QUBIT_SPLITTING - CS_EXCITED_OFFSET,
            dipole_ratio_sq: CS_DIPOLE_RATIO_SQ,
            target_fidelity: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticOptimum {
    pub cooperativity: f64,
    pub g_2pi_mhz: f64,
    pub f_max: f64,
    pub p_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NumericOptimum {
    pub g_2pi_mhz: f64,
    pub f_e: f64,
    pub p_s: f64,
    /// (g_numeric − g*)/g*.
    pub g_delta_rel: Option<f64>,
    /// F_numeric − F_max.
    pub f_delta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplittingReport {
    pub effective_splitting_2pi_mhz: f64,
    /// 2γ/ω_q', the same-excited-state estimate.
    pub leading_order_infidelity: f64,
    /// Fitted-constant estimate 0.7528 |µ₀/µ₁|² 2γ/ω_q'.
    pub floor_infidelity: f64,
    pub ceiling_loss_ratio: f64,
    pub ceiling_infidelity: f64,
    /// Loss ratio whose loss-limited F_max equals the ceiling.
    pub matched_loss_ratio: f64,
    pub matched_cooperativity: f64,
    pub matched_f_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TargetReport {
    pub fidelity: f64,
    pub loss_ratio: f64,
    pub cooperativity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimumReport {
    pub input: OptimumInput,
    pub kappa: f64,
    pub loss_ratio: f64,
    pub analytic: Option<AnalyticOptimum>,
    pub analytic_error: Option<String>,
    pub numeric: NumericOptimum,
    pub splitting: SplittingReport,
    pub target: Option<TargetReport>,
}

fn two_atom_fidelity(cavity: &CavitySpec, g: f64, gamma: f64) -> Result<(f64, f64)> {
    let atom = AtomSpec { gamma, ..AtomSpec::resonant(g) };
    let layout = NodeLayout::local(*cavity, vec![atom; 2])?;
    let chan = LocalGateChannel::new(&layout, 0.0, Flavor::PostSelected)?;
    Ok((entanglement_fidelity(&chan, &ideal_unitary(&layout))?, success_probability(&layout, 0.0)?))
}

pub fn compute(input: &OptimumInput) -> Result<OptimumReport> {
    let cavity = CavitySpec::new(input.kappa_r, input.kappa_t, input.kappa_m)?;
    let kappa = cavity.kappa();
    let gamma = input.gamma;
    let (analytic, analytic_error) = match optimum_cooperativity(input.kappa_r, kappa, gamma) {
        Ok(o) => {
            let p = optimum_performance(cavity.loss_ratio())?;
            let a = AnalyticOptimum {
                cooperativity: o.cooperativity,
                g_2pi_mhz: o.g,
                f_max: p.fidelity,
                p_s: p.success_probability,
            };
            (Some(a), None)
        }
        Err(e) => (None, Some(e.to_string())),
    };

    // Golden-section search in ln g; the analytic g* brackets it when known.
    let (lo, hi) = match analytic {
        Some(a) => (a.g_2pi_mhz / 4.0, 4.0 * a.g_2pi_mhz),
        None => (0.1, 1000.0),
    };
    let f = |x: f64| two_atom_fidelity(&cavity, x.exp(), gamma).map(|v| v.0).unwrap_or(f64::NEG_INFINITY);
    let best = golden_section_max(f, lo.ln(), hi.ln(), 1e-7);
    let g_num = best.x.exp();
    let (f_e, p_s) = two_atom_fidelity(&cavity, g_num, gamma)?;
    let numeric = NumericOptimum {
        g_2pi_mhz: g_num,
        f_e,
        p_s,
        g_delta_rel: analytic.map(|a| (g_num - a.g_2pi_mhz) / a.g_2pi_mhz),
        f_delta: analytic.map(|a| f_e - a.f_max),
    };

    let residual = ResidualCoupling { factor: input.dipole_ratio_sq.sqrt(), splitting: input.effective_splitting };
    let ceiling = locate_splitting_ceiling(gamma, &residual);
    let matched = splitting_matched_optimum(gamma, &residual)?;
    let splitting = SplittingReport {
        effective_splitting_2pi_mhz: input.effective_splitting,
        leading_order_infidelity: 2.0 * gamma / input.effective_splitting,
        floor_infidelity: qubit_splitting_floor(gamma, input.effective_splitting, input.dipole_ratio_sq),
        ceiling_loss_ratio: ceiling.loss_ratio,
        ceiling_infidelity: ceiling.infidelity,
        matched_loss_ratio: matched.loss_ratio,
        matched_cooperativity: matched.cooperativity,
        matched_f_max: matched.fidelity,
    };

    let target = input
        .target_fidelity
        .map(|fid| -> Result<TargetReport> {
            let ratio = required_loss_ratio(fid)?;
            Ok(TargetReport { fidelity: fid, loss_ratio: ratio, cooperativity: ratio / (1.0 - ratio) - 1.0 })
        })
        .transpose()?;

    Ok(OptimumReport {
        input: *input,
        kappa,
        loss_ratio: cavity.loss_ratio(),
        analytic,
        analytic_error,
        numeric,
        splitting,
        target,
    })
}

fn rows(r: &OptimumReport) -> Vec<(&'static str, Option<f64>)> {
    let a = r.analytic;
    let s = &r.splitting;
    let t = r.target;
    vec![
        ("kappa_r_2pi_mhz", Some(r.input.kappa_r)),
        ("kappa_t_2pi_mhz", Some(r.input.kappa_t)),
        ("kappa_m_2pi_mhz", Some(r.input.kappa_m)),
        ("kappa_2pi_mhz", Some(r.kappa)),
        ("gamma_2pi_mhz", Some(r.input.gamma)),
        ("loss_ratio", Some(r.loss_ratio)),
        ("c_star", a.map(|a| a.cooperativity)),
        ("g_star_2pi_mhz", a.map(|a| a.g_2pi_mhz)),
        ("f_max", a.map(|a| a.f_max)),
        ("p_s_star", a.map(|a| a.p_s)),
        ("g_numeric_2pi_mhz", Some(r.numeric.g_2pi_mhz)),
        ("f_e_numeric", Some(r.numeric.f_e)),
        ("p_s_numeric", Some(r.numeric.p_s)),
        ("g_delta_rel", r.numeric.g_delta_rel),
        ("f_delta", r.numeric.f_delta),
        ("effective_splitting_2pi_mhz", Some(s.effective_splitting_2pi_mhz)),
        ("leading_order_infidelity", Some(s.leading_order_infidelity)),
        ("floor_infidelity", Some(s.floor_infidelity)),
        ("ceiling_loss_ratio", Some(s.ceiling_loss_ratio)),
        ("ceiling_infidelity", Some(s.ceiling_infidelity)),
        ("matched_loss_ratio", Some(s.matched_loss_ratio)),
        ("matched_c_star", Some(s.matched_cooperativity)),
        ("matched_f_max", Some(s.matched_f_max)),
        ("target_fidelity", t.map(|t| t.fidelity)),
        ("target_loss_ratio", t.map(|t| t.loss_ratio)),
        ("target_c_star", t.map(|t| t.cooperativity)),
    ]
}

fn text_report(r: &OptimumReport) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "kappa = {:.6}, kappa_r/kappa = {:.6}, gamma = {}", r.kappa, r.loss_ratio, r.input.gamma);
    match (&r.analytic, &r.analytic_error) {
        (Some(a), _) => {
            let _ = writeln!(t, "analytic   C* = {:.4}  g* = {:.4}  F_max = {:.6}  p_s* = {:.6}", a.cooperativity, a.g_2pi_mhz, a.f_max, a.p_s);
        }
        (None, Some(e)) => {
            let _ = writeln!(t, "analytic   unavailable: {e}");
        }
        _ => {}
    }
    let n = &r.numeric;
    let _ = write!(t, "numeric    g = {:.4}  F_e = {:.6}  p_S = {:.6}", n.g_2pi_mhz, n.f_e, n.p_s);
    if let (Some(dg), Some(df)) = (n.g_delta_rel, n.f_delta) {
        let _ = write!(t, "  (dg/g* = {dg:+.3e}, dF = {df:+.3e})");
    }
    t.push('\n');
    let s = &r.splitting;
    let _ = writeln!(t, "splitting  omega_q' = {}  floor 1-F = {:.4e}  (leading order {:.4e})", s.effective_splitting_2pi_mhz, s.floor_infidelity, s.leading_order_infidelity);
    let _ = writeln!(t, "ceiling    1-F = {:.4e} at kappa_r/kappa = {:.6}", s.ceiling_infidelity, s.ceiling_loss_ratio);
    let _ = writeln!(t, "matched    F_max = {:.6}  kappa_r/kappa = {:.6}  C* = {:.4}", s.matched_f_max, s.matched_loss_ratio, s.matched_cooperativity);
    if let Some(tg) = r.target {
        let _ = writeln!(t, "target     F = {}  needs kappa_r/kappa = {:.6}  C* = {:.4}", tg.fidelity, tg.loss_ratio, tg.cooperativity);
    }
    t
}

pub fn run(input: &OptimumInput) -> Result<Output> {
    let r = compute(input)?;
    let echo = serde_json::to_string(input)?;
    let table: Vec<Vec<String>> = rows(&r)
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| vec![k.to_string(), cell(v)]))
        .collect();
    let csv = render_csv(&comment_block("optimum", &echo), &["quantity".into(), "value".into()], &table)?;
    Ok(Output { stem: "optimum", csv, json: json!(r), text: Some(text_report(&r)) })
}
