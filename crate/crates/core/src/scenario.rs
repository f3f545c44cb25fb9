//! Scenario files: TOML with sections [fiber], [cavity], [[atoms]], [gate],
//! [beam] and [sweep]. Keys carry their units; unknown keys are rejected.
//!
//! Qubit and cavity numbers in files are 1-based (qubit 1 is the rightmost
//! register position).

use serde::{Deserialize, Serialize};

use crate::addressing::AddressingBeam;
use crate::constants::{CS_DIPOLE_RATIO_SQ, CS_EXCITED_OFFSET, CS_GAMMA, CS_QUBIT_SPLITTING};
use crate::error::{Error, Result};
use crate::fiber::{solve_mode, CouplingProfile, DipoleTransition, FiberSpec, Polarization};
use crate::gate::{Flavor, GateKind, NodeLayout, PlacedAtom};
use crate::physics::{AtomSpec, CavitySpec, ResidualCoupling};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolarizationKind {
    Circular,
    QuasiLinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FiberSection {
    pub radius_nm: f64,
    pub n_core: f64,
    pub n_clad: f64,
    pub wavenumber_per_um: f64,
    pub cavity_length_m: f64,
    pub polarization: PolarizationKind,
    pub polarization_angle_rad: f64,
    pub dipole_au: f64,
    pub angular_factor_sq: f64,
}

impl Default for FiberSection {
    fn default() -> Self {
        let f = FiberSpec::default();
        let t = DipoleTransition::default();
        FiberSection {
            radius_nm: f.radius_nm,
            n_core: f.n_core,
            n_clad: f.n_clad,
            wavenumber_per_um: f.wavenumber_per_um,
            cavity_length_m: f.cavity_length_m,
            polarization: PolarizationKind::QuasiLinear,
            polarization_angle_rad: 0.0,
            dipole_au: t.dipole_au,
            angular_factor_sq: t.angular_factor_sq,
        }
    }
}

impl FiberSection {
    pub fn spec(&self) -> FiberSpec {
        FiberSpec {
            radius_nm: self.radius_nm,
            n_core: self.n_core,
            n_clad: self.n_clad,
            wavenumber_per_um: self.wavenumber_per_um,
            cavity_length_m: self.cavity_length_m,
        }
    }

    pub fn polarization(&self) -> Polarization {
        match self.polarization {
            PolarizationKind::Circular => Polarization::Circular,
            PolarizationKind::QuasiLinear => Polarization::QuasiLinear { phi0: self.polarization_angle_rad },
        }
    }

    pub fn transition(&self) -> DipoleTransition {
        DipoleTransition { dipole_au: self.dipole_au, angular_factor_sq: self.angular_factor_sq }
    }

    /// Solves the mode and integrates the mode volume.
    pub fn coupling_profile(&self) -> Result<CouplingProfile> {
        let spec = self.spec();
        let mode = solve_mode(&spec)?;
        CouplingProfile::new(&spec, &mode, self.polarization(), &self.transition())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySection {
    pub kappa_r_2pi_mhz: f64,
    #[serde(default)]
    pub kappa_t_2pi_mhz: f64,
    #[serde(default)]
    pub kappa_m_2pi_mhz: f64,
    #[serde(default)]
    pub omega_c_2pi_mhz: f64,
}

impl CavitySection {
    pub fn spec(&self) -> Result<CavitySpec> {
        let c = CavitySpec {
            kappa_r: self.kappa_r_2pi_mhz,
            kappa_t: self.kappa_t_2pi_mhz,
            kappa_m: self.kappa_m_2pi_mhz,
            omega_c: self.omega_c_2pi_mhz,
        };
        c.validate()?;
        Ok(c)
    }
}

/// One atom, or `count` identical atoms. The coupling is either given
/// directly or resolved from the distance to the fiber axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_2pi_mhz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_nm: Option<f64>,
    #[serde(default)]
    pub phi_rad: f64,
    #[serde(default)]
    pub delta_2pi_mhz: f64,
    /// 1-based cavity number; defaults to 1 for local gates and alternates
    /// starting with cavity 1 for remote gates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cavity: Option<usize>,
    #[serde(default = "one")]
    pub count: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GateSection {
    pub kind: GateKind,
    /// 1-based qubit numbers.
    pub control: usize,
    pub target: usize,
    pub flavor: Flavor,
    pub gamma_2pi_mhz: f64,
    pub probe_detuning_2pi_mhz: f64,
    pub residual_coupling: bool,
    pub residual_dipole_ratio_sq: f64,
    pub residual_splitting_2pi_mhz: f64,
}

impl Default for GateSection {
    fn default() -> Self {
        GateSection {
            kind: GateKind::Local,
            control: 1,
            target: 2,
            flavor: Flavor::PostSelected,
            gamma_2pi_mhz: CS_GAMMA,
            probe_detuning_2pi_mhz: 0.0,
            residual_coupling: false,
            residual_dipole_ratio_sq: CS_DIPOLE_RATIO_SQ,
            residual_splitting_2pi_mhz: CS_QUBIT_SPLITTING - CS_EXCITED_OFFSET,
        }
    }
}

impl GateSection {
    pub fn residual(&self) -> Option<ResidualCoupling> {
        self.residual_coupling.then(|| ResidualCoupling {
            factor: self.residual_dipole_ratio_sq.sqrt(),
            splitting: self.residual_splitting_2pi_mhz,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisScale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    /// Dotted path of a numeric field, e.g. `cavity.kappa_r_2pi_mhz`,
    /// `atoms.*.g_2pi_mhz`, `atoms.2.r_nm` (1-based entry) or
    /// `spectators.r_nm` (all atoms other than control and target).
    pub field: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default = "linear")]
    pub scale: AxisScale,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

fn linear() -> AxisScale {
    AxisScale::Linear
}

impl SweepAxis {
    pub fn grid(&self) -> Result<Vec<f64>> {
        if let Some(v) = &self.values {
            if self.start.is_some() || self.stop.is_some() || self.points.is_some() {
                return Err(Error::Parse(format!(
                    "sweep axis '{}': give either values or start/stop/points",
                    self.field
                )));
            }
            if v.is_empty() {
                return Err(Error::Parse(format!("sweep axis '{}' has no values", self.field)));
            }
            return Ok(v.clone());
        }
        let (Some(a), Some(b), Some(n)) = (self.start, self.stop, self.points) else {
            return Err(Error::Parse(format!(
                "sweep axis '{}' needs start, stop and points",
                self.field
            )));
        };
        if n == 0 {
            return Err(Error::Parse(format!("sweep axis '{}' needs points >= 1", self.field)));
        }
        if n == 1 {
            return Ok(vec![a]);
        }
        let t = |i: usize| i as f64 / (n - 1) as f64;
        match self.scale {
            AxisScale::Linear => Ok((0..n).map(|i| a + (b - a) * t(i)).collect()),
            AxisScale::Log => {
                if a <= 0.0 || b <= 0.0 {
                    return Err(Error::Parse(format!(
                        "log sweep axis '{}' needs positive bounds",
                        self.field
                    )));
                }
                Ok((0..n).map(|i| (a.ln() + (b.ln() - a.ln()) * t(i)).exp()).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axes: Vec<SweepAxis>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub fiber: FiberSection,
    pub cavity: CavitySection,
    pub atoms: Vec<AtomEntry>,
    #[serde(default)]
    pub gate: GateSection,
    #[serde(default)]
    pub beam: AddressingBeam,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    /// Copy with every `count` expanded into individual entries.
    pub fn expanded(&self) -> Scenario {
        let mut s = self.clone();
        s.atoms = self
            .atoms
            .iter()
            .flat_map(|a| std::iter::repeat_n(AtomEntry { count: 1, ..*a }, a.count))
            .collect();
        s
    }

    pub fn num_qubits(&self) -> usize {
        self.atoms.iter().map(|a| a.count).sum()
    }

    /// Control and target as 0-based qubit indices.
    pub fn pair(&self) -> Result<(usize, usize)> {
        let n = self.num_qubits();
        let (c, t) = (self.gate.control, self.gate.target);
        if c == 0 || t == 0 || c > n || t > n {
            return Err(Error::Layout(format!(
                "control {c} / target {t} must be qubit numbers between 1 and {n}"
            )));
        }
        Ok((c - 1, t - 1))
    }

    /// Whether any atom needs the fiber solver for its coupling.
    pub fn needs_fiber(&self) -> bool {
        self.atoms.iter().any(|a| a.g_2pi_mhz.is_none())
    }

    /// Builds the gate layout; `profile` resolves couplings given by
    /// distance and is required when [`Scenario::needs_fiber`] holds.
    pub fn layout(&self, profile: Option<&CouplingProfile>) -> Result<NodeLayout> {
        let s = self.expanded();
        let (control, target) = s.pair()?;
        let cavity = s.cavity.spec()?;
        let residual = s.gate.residual();
        let gamma = s.gate.gamma_2pi_mhz;
        let n_cavities = match s.gate.kind {
            GateKind::Local => 1,
            GateKind::Remote => 2,
        };
        let mut placed = Vec::with_capacity(s.atoms.len());
        for (q, a) in s.atoms.iter().enumerate() {
            let g = match (a.g_2pi_mhz, a.r_nm) {
                (Some(g), None) => g,
                (None, Some(r)) => {
                    if r <= s.fiber.radius_nm {
                        return Err(Error::Precondition(format!(
                            "atom {} at r = {r} nm lies inside the fiber (radius {} nm)",
                            q + 1,
                            s.fiber.radius_nm
                        )));
                    }
                    let p = profile.ok_or_else(|| {
                        Error::Precondition("fiber coupling profile required".into())
                    })?;
                    p.g(r, a.phi_rad)
                }
                _ => {
                    return Err(Error::Parse(format!(
                        "atom {} needs exactly one of g_2pi_mhz and r_nm",
                        q + 1
                    )))
                }
            };
            let cav = match a.cavity {
                Some(0) => return Err(Error::Layout(format!("atom {}: cavity numbers start at 1", q + 1))),
                Some(c) => c - 1,
                None => match s.gate.kind {
                    GateKind::Local => 0,
                    GateKind::Remote => q % 2,
                },
            };
            let spec = AtomSpec { g, delta_a: a.delta_2pi_mhz, gamma, residual };
            placed.push(PlacedAtom { spec, cavity: cav });
        }
        let layout = NodeLayout::new(vec![cavity; n_cavities], placed, control, target)?;
        if layout.kind() != s.gate.kind {
            return Err(Error::Layout(format!(
                "gate kind {:?} does not match the cavity assignment of control and target",
                s.gate.kind
            )));
        }
        Ok(layout)
    }

    /// Resolves the coupling profile if any atom needs it.
    pub fn coupling_profile(&self) -> Result<Option<CouplingProfile>> {
        if self.needs_fiber() {
            Ok(Some(self.fiber.coupling_profile()?))
        } else {
            Ok(None)
        }
    }

    /// Copy with the numeric field at `path` set to `value`.
    pub fn with_field(&self, path: &str, value: f64) -> Result<Scenario> {
        let parts: Vec<&str> = path.split('.').collect();
        if parts.first() == Some(&"spectators") {
            return self.with_spectator_field(&parts[1..], path, value);
        }
        let mut doc = toml::Value::try_from(self)
            .map_err(|e| Error::Parse(format!("cannot serialize scenario: {e}")))?;
        set_numeric(&mut doc, &parts, path, value)?;
        doc.try_into::<Scenario>().map_err(|e| Error::Parse(format!("field '{path}': {e}")))
    }

    fn with_spectator_field(&self, rest: &[&str], path: &str, value: f64) -> Result<Scenario> {
        let mut s = self.expanded();
        let (control, target) = s.pair()?;
        let key = match rest {
            [k] => *k,
            _ => return Err(Error::Parse(format!("unknown sweep field '{path}'"))),
        };
        for (q, a) in s.atoms.iter_mut().enumerate() {
            if q == control || q == target {
                continue;
            }
            match key {
                "r_nm" => {
                    a.r_nm = Some(value);
                    a.g_2pi_mhz = None;
                }
                "g_2pi_mhz" => {
                    a.g_2pi_mhz = Some(value);
                    a.r_nm = None;
                }
                "delta_2pi_mhz" => a.delta_2pi_mhz = value,
                "phi_rad" => a.phi_rad = value,
                _ => return Err(Error::Parse(format!("sweep field '{path}' is not a numeric atom field"))),
            }
        }
        Ok(s)
    }
}

fn set_numeric(node: &mut toml::Value, parts: &[&str], path: &str, value: f64) -> Result<()> {
    let unknown = || Error::Parse(format!("unknown sweep field '{path}'"));
    let (head, rest) = parts.split_first().ok_or_else(unknown)?;
    match node {
        toml::Value::Table(t) => {
            let child = t.get_mut(*head).ok_or_else(unknown)?;
            if rest.is_empty() {
                return assign(child, path, value);
            }
            set_numeric(child, rest, path, value)
        }
        toml::Value::Array(items) => {
            let targets: Vec<usize> = if *head == "*" {
                (0..items.len()).collect()
            } else {
                let i: usize = head.parse().map_err(|_| unknown())?;
                if i == 0 || i > items.len() {
                    return Err(unknown());
                }
                vec![i - 1]
            };
            for i in targets {
                if rest.is_empty() {
                    assign(&mut items[i], path, value)?;
                } else {
                    set_numeric(&mut items[i], rest, path, value)?;
                }
            }
            Ok(())
        }
        _ => Err(unknown()),
    }
}

fn assign(slot: &mut toml::Value, path: &str, value: f64) -> Result<()> {
    match slot {
        toml::Value::Float(_) => *slot = toml::Value::Float(value),
        toml::Value::Integer(_) => {
            if value.fract() != 0.0 {
                return Err(Error::Parse(format!("field '{path}' takes integer values, got {value}")));
            }
            *slot = toml::Value::Integer(value as i64);
        }
        _ => return Err(Error::Parse(format!("sweep field '{path}' is not numeric"))),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[cavity]
kappa_r_2pi_mhz = 2.5
kappa_t_2pi_mhz = 0.1
kappa_m_2pi_mhz = 0.1

[[atoms]]
g_2pi_mhz = 7.8
count = 2
"#;

    #[test]
    fn parses_with_defaults() {
        let s = Scenario::from_toml_str(BASE).unwrap();
        assert_eq!(s.num_qubits(), 2);
        assert_eq!(s.gate.kind, GateKind::Local);
        let l = s.layout(None).unwrap();
        assert_eq!(l.num_qubits(), 2);
        assert_eq!(l.atoms()[1].spec.g, 7.8);
    }

    #[test]
    fn unknown_keys_are_errors_with_position() {
        let text = BASE.replace("kappa_m_2pi_mhz", "kappa_x_2pi_mhz");
        let err = Scenario::from_toml_str(&text).unwrap_err().to_string();
        assert!(err.contains("kappa_x_2pi_mhz"), "{err}");
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn field_paths() {
        let s = Scenario::from_toml_str(BASE).unwrap();
        let t = s.with_field("cavity.kappa_r_2pi_mhz", 4.0).unwrap();
        assert_eq!(t.cavity.kappa_r_2pi_mhz, 4.0);
        let t = s.with_field("atoms.*.g_2pi_mhz", 10.0).unwrap();
        assert_eq!(t.atoms[0].g_2pi_mhz, Some(10.0));
        let t = s.with_field("gate.control", 2.0).unwrap();
        assert_eq!(t.gate.control, 2);
        assert!(s.with_field("gate.kind", 1.0).is_err());
        assert!(s.with_field("cavity.nope", 1.0).is_err());
        assert!(s.with_field("atoms.3.g_2pi_mhz", 1.0).is_err());
    }

    #[test]
    fn spectator_paths() {
        let text = BASE.replace("count = 2", "count = 4");
        let s = Scenario::from_toml_str(&text).unwrap();
        let t = s.with_field("spectators.delta_2pi_mhz", 50.0).unwrap();
        let d: Vec<f64> = t.atoms.iter().map(|a| a.delta_2pi_mhz).collect();
        assert_eq!(d, vec![0.0, 0.0, 50.0, 50.0]);
    }

    #[test]
    fn remote_alternates_cavities() {
        let text = format!("{}\n[gate]\nkind = \"remote\"\n", BASE.replace("count = 2", "count = 3"));
        let s = Scenario::from_toml_str(&text).unwrap();
        let l = s.layout(None).unwrap();
        let cav: Vec<usize> = l.atoms().iter().map(|a| a.cavity).collect();
        assert_eq!(cav, vec![0, 1, 0]);
    }

    #[test]
    fn axis_grids() {
        let ax = SweepAxis {
            field: "x".into(),
            start: Some(1.0),
            stop: Some(100.0),
            points: Some(3),
            scale: AxisScale::Log,
            values: None,
        };
        let g = ax.grid().unwrap();
        assert!((g[1] - 10.0).abs() < 1e-12);
    }
}
