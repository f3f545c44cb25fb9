use std::fmt::Write as _;

use cqed_gates::gate::ideal_unitary;
use cqed_gates::scenario::Scenario;
use cqed_gates::{CMatrix, C64};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::{json, Map, Value};

use crate::error::Result;
use crate::metrics::{build_channel, evaluate, profile_for, GateMetrics};
use crate::output::{cell, comment_block, num, opt_cell, opt_num, render_csv, Output};

/// Full N-qubit rates are listed in JSON up to this register size.
const FULL_RATES_MAX_QUBITS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarlo {
    pub samples: usize,
    pub seed: u64,
    pub mean: f64,
    pub std_error: f64,
}

/// Haar average of the state fidelity over random pure inputs. Post-selected
/// outputs are renormalized per input.
pub fn haar_average(s: &Scenario, samples: usize, seed: u64) -> Result<MonteCarlo> {
    let profile = profile_for(s)?;
    let layout = s.layout(profile.as_ref())?;
    let chan = build_channel(&layout, s.gate.probe_detuning_2pi_mhz, s.gate.flavor)?;
    let u = ideal_unitary(&layout);
    let d = layout.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let psi = DVector::from_fn(d, |_, _| {
            C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
        })
        .normalize();
        let out: CMatrix = chan.apply(&(&psi * psi.adjoint()));
        let ideal = &u * &psi;
        let f = (ideal.adjoint() * &out * ideal)[(0, 0)].re / out.trace().re;
        sum += f;
        sum_sq += f * f;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    Ok(MonteCarlo { samples, seed, mean, std_error: (var / (n - 1.0).max(1.0)).sqrt() })
}

pub fn metric_header() -> Vec<String> {
    let mut h: Vec<String> = [
        "num_qubits",
        "g_control_2pi_mhz",
        "g_target_2pi_mhz",
        "f_avg",
        "f_e",
        "f_superposition",
        "f_analytic",
        "p_s",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    h.extend((1..16).map(|i| format!("p_{}", cqed_gates::pauli::marginal_label(i))));
    h.push("p_non_dephasing".into());
    h.push("bias".into());
    h
}

pub fn metric_cells(m: &GateMetrics) -> Vec<String> {
    let mut row = vec![
        m.num_qubits.to_string(),
        cell(m.g_control_2pi_mhz),
        cell(m.g_target_2pi_mhz),
        cell(m.f_avg),
        cell(m.f_e),
        cell(m.f_superposition),
        opt_cell(m.f_analytic),
        cell(m.p_s),
    ];
    row.extend(m.marginal_rates().iter().map(|(_, p)| cell(*p)));
    row.push(cell(m.non_dephasing()));
    row.push(cell(m.bias()));
    row
}

pub fn metrics_json(m: &GateMetrics) -> Value {
    let rates: Map<String, Value> = m.marginal_rates().into_iter().map(|(l, p)| (l, num(p))).collect();
    json!({
        "num_qubits": m.num_qubits,
        "kind": m.kind,
        "flavor": m.flavor,
        "control": m.control,
        "target": m.target,
        "g_control_2pi_mhz": num(m.g_control_2pi_mhz),
        "g_target_2pi_mhz": num(m.g_target_2pi_mhz),
        "f_avg": num(m.f_avg),
        "f_e": num(m.f_e),
        "f_superposition": num(m.f_superposition),
        "f_analytic": opt_num(m.f_analytic),
        "p_s": num(m.p_s),
        "marginal_rates": rates,
        "p_non_dephasing": num(m.non_dephasing()),
        "bias": num(m.bias()),
    })
}

fn shown(p: f64) -> String {
    if p.abs() < 1e-12 {
        "0".into()
    } else {
        format!("{p:.6e}")
    }
}

fn text_report(name: &str, m: &GateMetrics, mc: Option<&MonteCarlo>) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "scenario          {name}");
    let _ = writeln!(
        t,
        "gate              {:?}, {} qubits, control {}, target {}, {:?}",
        m.kind, m.num_qubits, m.control, m.target, m.flavor
    );
    let _ = writeln!(t, "g control/target  {:.6} / {:.6} (2pi MHz)", m.g_control_2pi_mhz, m.g_target_2pi_mhz);
    let _ = writeln!(t, "F_avg             {:.6}", m.f_avg);
    let _ = writeln!(t, "F_e               {:.6}", m.f_e);
    let _ = writeln!(t, "F_superposition   {:.6}", m.f_superposition);
    if let Some(f) = m.f_analytic {
        let _ = writeln!(t, "F_analytic        {f:.6}");
    }
    if let Some(mc) = mc {
        let _ = writeln!(
            t,
            "F_haar (MC)       {:.6} +- {:.1e} ({} samples, seed {})",
            mc.mean, mc.std_error, mc.samples, mc.seed
        );
    }
    let _ = writeln!(t, "p_S               {:.6}", m.p_s);
    let _ = writeln!(t, "Pauli rates on the pair:");
    for (label, p) in m.marginal_rates() {
        let _ = writeln!(t, "  {label}  {}", shown(p));
    }
    let _ = writeln!(t, "non-dephasing     {}", shown(m.non_dephasing()));
    let _ = writeln!(t, "bias              {}", if m.bias().is_infinite() { "inf".into() } else { format!("{:.6e}", m.bias()) });
    t
}

pub fn run(name: &str, s: &Scenario, monte_carlo: Option<(usize, u64)>) -> Result<Output> {
    let profile = profile_for(s)?;
    let m = evaluate(s, profile.as_ref())?;
    let mc = monte_carlo.map(|(n, seed)| haar_average(s, n, seed)).transpose()?;
    let echo = s.to_toml_string();
    let mut header = metric_header();
    let mut row = metric_cells(&m);
    if let Some(mc) = &mc {
        header.extend(["f_haar_monte_carlo".to_string(), "f_haar_std_error".to_string()]);
        row.extend([cell(mc.mean), cell(mc.std_error)]);
    }
    let csv = render_csv(&comment_block(&format!("gate {name}"), &echo), &header, &[row])?;
    let mut json = metrics_json(&m);
    let obj = json.as_object_mut().expect("metrics serialize to an object");
    if m.num_qubits <= FULL_RATES_MAX_QUBITS {
        let full: Map<String, Value> = m.full_rates().into_iter().map(|(l, p)| (l, num(p))).collect();
        obj.insert("full_rates".into(), Value::Object(full));
    }
    if let Some(mc) = &mc {
        obj.insert(
            "monte_carlo".into(),
            json!({ "samples": mc.samples, "seed": mc.seed, "mean": num(mc.mean), "std_error": num(mc.std_error) }),
        );
    }
    obj.insert("scenario".into(), json!(echo));
    Ok(Output { stem: "gate", csv, json, text: Some(text_report(name, &m, mc.as_ref())) })
}
