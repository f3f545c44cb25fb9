//! Per-scenario gate figures shared by `gate` and `sweep`.

use cqed_gates::fiber::CouplingProfile;
use cqed_gates::fidelity::{
    analytic_local_fidelity_full, analytic_remote_fidelity, average_fidelity, entanglement_fidelity,
    superposition_fidelity,
};
use cqed_gates::gate::{configuration_amplitudes, ideal_unitary, success_probability};
use cqed_gates::pauli::{marginal_label, pauli_channel, pauli_label};
use cqed_gates::scenario::Scenario;
use cqed_gates::{
    Channel, Flavor, GateKind, LocalGateChannel, NodeLayout, PauliChannel, RemoteGateChannel,
};
use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Clone, Serialize)]
pub struct GateMetrics {
    pub num_qubits: usize,
    pub kind: GateKind,
    pub flavor: Flavor,
    /// 1-based, as in scenario files.
    pub control: usize,
    pub target: usize,
    pub g_control_2pi_mhz: f64,
    pub g_target_2pi_mhz: f64,
    pub f_avg: f64,
    pub f_e: f64,
    pub f_superposition: f64,
    pub p_s: f64,
    pub f_analytic: Option<f64>,
    #[serde(skip)]
    pub pauli: PauliChannel,
}

impl GateMetrics {
    /// Marginal rates over the pair, labels upper qubit first, identity
    /// excluded.
    pub fn marginal_rates(&self) -> Vec<(String, f64)> {
        (1..16).map(|i| (marginal_label(i), self.pauli.marginal[i])).collect()
    }

    pub fn non_dephasing(&self) -> f64 {
        self.pauli.non_dephasing()
    }

    pub fn bias(&self) -> f64 {
        self.pauli.bias
    }

    /// All N-qubit rates with their labels.
    pub fn full_rates(&self) -> Vec<(String, f64)> {
        let n = self.pauli.n_qubits;
        self.pauli.rates.iter().enumerate().map(|(i, &p)| (pauli_label(i, n), p)).collect()
    }
}

/// Resolves the fiber coupling profile when the scenario needs one.
pub fn profile_for(s: &Scenario) -> Result<Option<CouplingProfile>> {
    Ok(s.coupling_profile()?)
}

pub fn build_channel(layout: &NodeLayout, omega_p: f64, flavor: Flavor) -> Result<Box<dyn Channel>> {
    Ok(match layout.kind() {
        GateKind::Local => Box::new(LocalGateChannel::new(layout, omega_p, flavor)?),
        GateKind::Remote => Box::new(RemoteGateChannel::new(layout, omega_p)?),
    })
}

/// Closed-form fidelity where one exists: any local gate, or the
/// two-qubit remote gate between identical nodes.
fn analytic(layout: &NodeLayout, omega_p: f64, flavor: Flavor) -> Result<Option<f64>> {
    match layout.kind() {
        GateKind::Local => {
            let chan = LocalGateChannel::new(layout, omega_p, flavor)?;
            Ok(Some(analytic_local_fidelity_full(chan.g_matrix(), layout.control(), layout.target())?))
        }
        GateKind::Remote => {
            let atoms = layout.atoms();
            let symmetric = layout.num_qubits() == 2
                && layout.cavities()[0] == layout.cavities()[1]
                && atoms[0].spec == atoms[1].spec;
            if !symmetric {
                return Ok(None);
            }
            let r = configuration_amplitudes(layout, layout.cavity_of(layout.control()), omega_p)?;
            let (r0, r1) = (r[0].r, r[1 << layout.control()].r);
            Ok(Some(analytic_remote_fidelity(r0, r1)?))
        }
    }
}

pub fn evaluate(s: &Scenario, profile: Option<&CouplingProfile>) -> Result<GateMetrics> {
    let layout = s.layout(profile)?;
    let omega_p = s.gate.probe_detuning_2pi_mhz;
    let flavor = match layout.kind() {
        GateKind::Local => s.gate.flavor,
        GateKind::Remote => Flavor::PostSelected,
    };
    let chan = build_channel(&layout, omega_p, flavor)?;
    let u = ideal_unitary(&layout);
    let (c, t) = (layout.control(), layout.target());
    let f_e = entanglement_fidelity(chan.as_ref(), &u)?;
    let p_s = match flavor {
        Flavor::PostSelected => success_probability(&layout, omega_p)?,
        Flavor::Total => 1.0,
    };
    Ok(GateMetrics {
        num_qubits: layout.num_qubits(),
        kind: layout.kind(),
        flavor,
        control: c + 1,
        target: t + 1,
        g_control_2pi_mhz: layout.atoms()[c].spec.g,
        g_target_2pi_mhz: layout.atoms()[t].spec.g,
        f_avg: average_fidelity(f_e, layout.dim()),
        f_e,
        f_superposition: superposition_fidelity(chan.as_ref(), &u)?,
        p_s,
        f_analytic: analytic(&layout, omega_p, flavor)?,
        pauli: pauli_channel(chan.as_ref(), &u, c, t)?,
    })
}
