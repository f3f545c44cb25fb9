//! Gate channels acting on atomic density matrices.
//!
//! Basis index `k` of an N-qubit register holds qubit `n` in bit `n`, so
//! qubit 0 is the rightmost entry of |q_{N-1} … q_1 q_0⟩.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::{amplitudes, AmplitudeSet, AtomSpec, CavitySpec};

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Largest register the dense engine accepts.
pub const MAX_QUBITS: usize = 10;

const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    Local,
    Remote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    /// Photon loss is traced out; the channel is trace preserving.
    Total,
    /// Conditioned on detecting the reflected photon.
    PostSelected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacedAtom {
    pub spec: AtomSpec,
    pub cavity: usize,
}

/// Atoms distributed over cavities. The position of an atom in `atoms` is its
/// qubit index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeLayout {
    cavities: Vec<CavitySpec>,
    atoms: Vec<PlacedAtom>,
    control: usize,
    target: usize,
}

impl NodeLayout {
    pub fn new(
        cavities: Vec<CavitySpec>,
        atoms: Vec<PlacedAtom>,
        control: usize,
        target: usize,
    ) -> Result<Self> {
        let n = atoms.len();
        if n < 2 {
            return Err(Error::Layout(format!("a CZ gate needs at least 2 qubits, got {n}")));
        }
        if n > MAX_QUBITS {
            return Err(Error::Layout(format!(
                "{n} qubits exceed the supported maximum of {MAX_QUBITS}"
            )));
        }
        if control >= n || target >= n {
            return Err(Error::Layout(format!(
                "control {control} / target {target} out of range for {n} qubits"
            )));
        }
        if control == target {
            return Err(Error::Layout("control and target must differ".into()));
        }
        for c in &cavities {
            c.validate()?;
        }
        for (q, at) in atoms.iter().enumerate() {
            if at.cavity >= cavities.len() {
                return Err(Error::Layout(format!(
                    "qubit {q} assigned to cavity {} but only {} cavities exist",
                    at.cavity,
                    cavities.len()
                )));
            }
            at.spec.validate()?;
        }
        Ok(NodeLayout { cavities, atoms, control, target })
    }

    /// All atoms in one cavity; qubits 0 and 1 are control and target.
    pub fn local(cavity: CavitySpec, atoms: Vec<AtomSpec>) -> Result<Self> {
        let placed = atoms.into_iter().map(|spec| PlacedAtom { spec, cavity: 0 }).collect();
        Self::new(vec![cavity], placed, 0, 1)
    }

    /// Two cavities filled alternately starting with the first; qubit 0
    /// (control) sits in the first cavity and qubit 1 (target) in the second.
    pub fn remote(first: CavitySpec, second: CavitySpec, atoms: Vec<AtomSpec>) -> Result<Self> {
        let placed = atoms
            .into_iter()
            .enumerate()
            .map(|(q, spec)| PlacedAtom { spec, cavity: q % 2 })
            .collect();
        Self::new(vec![first, second], placed, 0, 1)
    }

    pub fn num_qubits(&self) -> usize {
        self.atoms.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.atoms.len()
    }

    pub fn cavities(&self) -> &[CavitySpec] {
        &self.cavities
    }

    pub fn atoms(&self) -> &[PlacedAtom] {
        &self.atoms
    }

    pub fn control(&self) -> usize {
        self.control
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn cavity_of(&self, qubit: usize) -> usize {
        self.atoms[qubit].cavity
    }

    pub fn kind(&self) -> GateKind {
        if self.cavity_of(self.control) == self.cavity_of(self.target) {
            GateKind::Local
        } else {
            GateKind::Remote
        }
    }

    fn check_cavity(&self, cavity: usize) -> Result<()> {
        if cavity >= self.cavities.len() {
            return Err(Error::Layout(format!("no cavity with index {cavity}")));
        }
        Ok(())
    }
}

/// Amplitudes of the photon reflected from `cavity` for every basis state.
///
/// An atom joins the coupled set when it sits in `cavity` and its qubit is
/// |1⟩. Atoms in |0⟩ contribute through their residual coupling, if set.
pub fn configuration_amplitudes(
    layout: &NodeLayout,
    cavity: usize,
    omega_p: f64,
) -> Result<Vec<AmplitudeSet>> {
    layout.check_cavity(cavity)?;
    let spec = &layout.cavities[cavity];
    let members: Vec<(usize, &AtomSpec)> = layout
        .atoms
        .iter()
        .enumerate()
        .filter(|(_, a)| a.cavity == cavity)
        .map(|(q, a)| (q, &a.spec))
        .collect();
    let mut coupled = Vec::with_capacity(members.len());
    (0..layout.dim())
        .map(|k| {
            coupled.clear();
            for &(q, at) in &members {
                if k >> q & 1 == 1 {
                    coupled.push(*at);
                } else if let Some(dark) = at.dark_state_term() {
                    coupled.push(dark);
                }
            }
            amplitudes(spec, &coupled, omega_p)
        })
        .collect()
}

/// Overlap matrix of the photonic output states, defining ρ ↦ ρ∘G.
#[derive(Debug, Clone, PartialEq)]
pub struct GMatrix {
    pub matrix: CMatrix,
    pub flavor: Flavor,
}

impl GMatrix {
    pub fn from_amplitudes(amps: &[AmplitudeSet], flavor: Flavor) -> Self {
        let d = amps.len();
        let matrix = CMatrix::from_fn(d, d, |i, j| {
            let (ai, aj) = (&amps[i], &amps[j]);
            match flavor {
                Flavor::PostSelected => ai.r * aj.r.conj(),
                Flavor::Total => {
                    ai.r * aj.r.conj() + ai.t * aj.t.conj() + ai.m * aj.m.conj() + ai.a * aj.a.conj()
                }
            }
        });
        GMatrix { matrix, flavor }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

pub fn build_g_matrix(
    layout: &NodeLayout,
    cavity: usize,
    omega_p: f64,
    flavor: Flavor,
) -> Result<GMatrix> {
    let amps = configuration_amplitudes(layout, cavity, omega_p)?;
    Ok(GMatrix::from_amplitudes(&amps, flavor))
}

/// A validated density matrix: Hermitian, positive semidefinite, trace ≤ 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let d = matrix.nrows();
        if matrix.ncols() != d || d == 0 || !d.is_power_of_two() {
            return Err(Error::Precondition(format!(
                "density matrix must be square with power-of-two dimension, got {}x{}",
                d,
                matrix.ncols()
            )));
        }
        let scale = matrix.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let asym = (&matrix - matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if asym > HERMITIAN_TOL * scale {
            return Err(Error::Precondition(format!(
                "density matrix is not Hermitian (max asymmetry {asym:e})"
            )));
        }
        let herm = (&matrix + matrix.adjoint()) * C64::new(0.5, 0.0);
        let min_eig = herm.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -HERMITIAN_TOL * scale {
            return Err(Error::Precondition(format!(
                "density matrix is not positive semidefinite (eigenvalue {min_eig:e})"
            )));
        }
        let tr = matrix.trace().re;
        if tr > 1.0 + 1e-10 {
            return Err(Error::Precondition(format!("density matrix trace {tr} exceeds 1")));
        }
        Ok(DensityMatrix { matrix })
    }

    pub(crate) fn new_unchecked(matrix: CMatrix) -> Self {
        DensityMatrix { matrix }
    }

    pub fn pure(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::Precondition("zero state vector".into()));
        }
        let v = psi / C64::new(norm, 0.0);
        Self::new(&v * v.adjoint())
    }

    /// |a⁺⟩⟨a⁺| with |a⁺⟩ the equal superposition of all basis states.
    pub fn uniform_superposition(n_qubits: usize) -> Self {
        let d = 1 << n_qubits;
        DensityMatrix { matrix: CMatrix::from_element(d, d, C64::new(1.0 / d as f64, 0.0)) }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }
}

/// Result of applying a gate: the output state and, for post-selected
/// operation, the probability of the heralding event.
#[derive(Debug, Clone, PartialEq)]
pub struct GateOutput {
    pub rho: DensityMatrix,
    pub success_probability: Option<f64>,
}

fn check_dim(rho: &DensityMatrix, expected: usize) -> Result<()> {
    if rho.dim() != expected {
        return Err(Error::DimensionMismatch { expected, got: rho.dim() });
    }
    Ok(())
}

fn normalized(m: CMatrix) -> Result<(DensityMatrix, f64)> {
    let p = m.trace().re;
    if p <= 0.0 {
        return Err(Error::Precondition("heralding probability is zero".into()));
    }
    Ok((DensityMatrix::new_unchecked(m / C64::new(p, 0.0)), p))
}

/// Local CZ via reflection from the cavity that holds control and target.
pub fn apply_local_gate(
    rho: &DensityMatrix,
    layout: &NodeLayout,
    omega_p: f64,
    flavor: Flavor,
) -> Result<GateOutput> {
    let chan = LocalGateChannel::new(layout, omega_p, flavor)?;
    check_dim(rho, layout.dim())?;
    let out = chan.apply(rho.matrix());
    match flavor {
        Flavor::Total => Ok(GateOutput {
            rho: DensityMatrix::new_unchecked(out),
            success_probability: None,
        }),
        Flavor::PostSelected => {
            let (rho, p) = normalized(out)?;
            Ok(GateOutput { rho, success_probability: Some(p) })
        }
    }
}

/// Reflects a photon from the cavity holding the control qubit. The state
/// carries the photon polarization as its most significant factor, with |H⟩
/// the first block. Only the reflected H component is kept, so the output
/// trace drops by the loss probability.
pub fn apply_atom_photon_gate(
    rho: &DensityMatrix,
    layout: &NodeLayout,
    omega_p: f64,
) -> Result<DensityMatrix> {
    let d = layout.dim();
    if rho.dim() != 2 * d {
        return Err(Error::DimensionMismatch { expected: 2 * d, got: rho.dim() });
    }
    let amps = configuration_amplitudes(layout, layout.cavity_of(layout.control), omega_p)?;
    let diag: Vec<C64> = amps
        .iter()
        .map(|a| a.r)
        .chain(std::iter::repeat_n(C64::new(1.0, 0.0), d))
        .collect();
    let m = rho.matrix();
    let out = CMatrix::from_fn(2 * d, 2 * d, |i, j| diag[i] * m[(i, j)] * diag[j].conj());
    Ok(DensityMatrix::new_unchecked(out))
}

/// Remote CZ between qubits in two cavities, heralded by the photon.
pub fn apply_remote_gate(rho: &DensityMatrix, layout: &NodeLayout, omega_p: f64) -> Result<GateOutput> {
    let chan = RemoteGateChannel::new(layout, omega_p)?;
    check_dim(rho, layout.dim())?;
    let (rho, p) = normalized(chan.apply(rho.matrix()))?;
    Ok(GateOutput { rho, success_probability: Some(p) })
}

/// Channel-averaged heralding probability.
///
/// Local: Tr(G_ps)/2^N. Remote: Tr[(Ĥ G¹ Ĥ†)∘G²]/2^{N+1}, where Gᶜ is the
/// outer product of the photon-polarization-extended reflection vector of
/// cavity c and Ĥ the photonic Hadamard.
pub fn success_probability(layout: &NodeLayout, omega_p: f64) -> Result<f64> {
    let d = layout.dim();
    let first = layout.cavity_of(layout.control);
    match layout.kind() {
        GateKind::Local => {
            let amps = configuration_amplitudes(layout, first, omega_p)?;
            Ok(amps.iter().map(|a| a.r.norm_sqr()).sum::<f64>() / d as f64)
        }
        GateKind::Remote => {
            let second = layout.cavity_of(layout.target);
            let r1 = configuration_amplitudes(layout, first, omega_p)?;
            let r2 = configuration_amplitudes(layout, second, omega_p)?;
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let one = C64::new(1.0, 0.0);
            // Only the diagonal of the Schur product enters the trace.
            let mut total = 0.0;
            for k in 0..d {
                let h_first = (r1[k].r + one) * s;
                let v_first = (r1[k].r - one) * s;
                total += h_first.norm_sqr() * r2[k].r.norm_sqr() + v_first.norm_sqr();
            }
            Ok(total / (2 * d) as f64)
        }
    }
}

/// Diagonal of the ideal CZ: −1 on states where control and target are both
/// |0⟩ (local) or both |1⟩ (remote).
pub fn ideal_cz_diagonal(n_qubits: usize, control: usize, target: usize, kind: GateKind) -> Vec<C64> {
    let want = match kind {
        GateKind::Local => 0,
        GateKind::Remote => 1,
    };
    (0..1usize << n_qubits)
        .map(|k| {
            if (k >> control & 1) == want && (k >> target & 1) == want {
                C64::new(-1.0, 0.0)
            } else {
                C64::new(1.0, 0.0)
            }
        })
        .collect()
}

pub fn ideal_cz(n_qubits: usize, control: usize, target: usize, kind: GateKind) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_vec(ideal_cz_diagonal(n_qubits, control, target, kind)))
}

/// Ideal CZ for the layout's qubit pair and gate kind.
pub fn ideal_unitary(layout: &NodeLayout) -> CMatrix {
    ideal_cz(layout.num_qubits(), layout.control, layout.target, layout.kind())
}

/// A completely positive map on N-qubit operators.
pub trait Channel: Sync {
    fn num_qubits(&self) -> usize;

    /// Unnormalized action; the output trace may be below the input trace.
    fn apply(&self, rho: &CMatrix) -> CMatrix;

    /// Whether outputs are renormalized by their trace when computing
    /// fidelities.
    fn is_post_selected(&self) -> bool;

    /// Matrix K with ε(ρ) = ρ∘K, if the channel has this form.
    fn schur_kernel(&self) -> Option<&CMatrix> {
        None
    }

    fn dim(&self) -> usize {
        1 << self.num_qubits()
    }
}

fn schur(rho: &CMatrix, k: &CMatrix) -> CMatrix {
    rho.component_mul(k)
}

pub struct LocalGateChannel {
    g: GMatrix,
    n_qubits: usize,
}

impl LocalGateChannel {
    pub fn new(layout: &NodeLayout, omega_p: f64, flavor: Flavor) -> Result<Self> {
        if layout.kind() != GateKind::Local {
            return Err(Error::Layout("local gate needs control and target in one cavity".into()));
        }
        let g = build_g_matrix(layout, layout.cavity_of(layout.control), omega_p, flavor)?;
        Ok(LocalGateChannel { g, n_qubits: layout.num_qubits() })
    }

    pub fn from_g_matrix(g: GMatrix) -> Result<Self> {
        let d = g.dim();
        if !d.is_power_of_two() || d < 2 {
            return Err(Error::DimensionMismatch { expected: d.next_power_of_two(), got: d });
        }
        Ok(LocalGateChannel { n_qubits: d.trailing_zeros() as usize, g })
    }

    pub fn g_matrix(&self) -> &GMatrix {
        &self.g
    }
}

impl Channel for LocalGateChannel {
    fn num_qubits(&self) -> usize {
        self.n_qubits
    }
    fn apply(&self, rho: &CMatrix) -> CMatrix {
        schur(rho, &self.g.matrix)
    }
    fn is_post_selected(&self) -> bool {
        self.g.flavor == Flavor::PostSelected
    }
    fn schur_kernel(&self) -> Option<&CMatrix> {
        Some(&self.g.matrix)
    }
}

/// Photonic operator on polarization ⊗ atoms whose four polarization blocks
/// are diagonal in the atomic basis.
#[derive(Debug, Clone)]
struct PhotonOperator {
    // blocks[out][in], index 0 = H, 1 = V
    blocks: [[Vec<C64>; 2]; 2],
}

impl PhotonOperator {
    fn hadamard(d: usize) -> Self {
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        PhotonOperator {
            blocks: [[vec![s; d], vec![s; d]], [vec![s; d], vec![-s; d]]],
        }
    }

    /// Reflection acting on the H component only.
    fn reflection(r: &[C64]) -> Self {
        let d = r.len();
        let zero = vec![C64::new(0.0, 0.0); d];
        PhotonOperator {
            blocks: [[r.to_vec(), zero.clone()], [zero, vec![C64::new(1.0, 0.0); d]]],
        }
    }

    /// `other` followed by `self`.
    fn after(&self, other: &PhotonOperator) -> Self {
        let d = self.blocks[0][0].len();
        let mut blocks: [[Vec<C64>; 2]; 2] = Default::default();
        for (o, row) in blocks.iter_mut().enumerate() {
            for (i, cell) in row.iter_mut().enumerate() {
                *cell = (0..d)
                    .map(|k| {
                        self.blocks[o][0][k] * other.blocks[0][i][k]
                            + self.blocks[o][1][k] * other.blocks[1][i][k]
                    })
                    .collect();
            }
        }
        PhotonOperator { blocks }
    }
}

/// Photon amplitudes (H, V) after the remote sequence for reflection
/// coefficients `r1`, `r2` of the two cavities, photon prepared in |H⟩.
pub fn remote_photon_amplitudes(r1: C64, r2: C64) -> (C64, C64) {
    let one = C64::new(1.0, 0.0);
    let n = 2.0 * std::f64::consts::SQRT_2;
    ((r2 * r1 + r2 + r1 - one) / n, (r2 * r1 + r2 - r1 + one) / n)
}

/// Remote CZ: Hadamard, reflection from the control's cavity, Hadamard,
/// reflection from the target's cavity, Hadamard, then a polarization
/// measurement with a Z correction on the control for a V click.
pub struct RemoteGateChannel {
    n_qubits: usize,
    branch_h: Vec<C64>,
    branch_v: Vec<C64>,
    kernel: CMatrix,
}

impl RemoteGateChannel {
    pub fn new(layout: &NodeLayout, omega_p: f64) -> Result<Self> {
        if layout.kind() != GateKind::Remote {
            return Err(Error::Layout("remote gate needs control and target in distinct cavities".into()));
        }
        let d = layout.dim();
        let r1: Vec<C64> = configuration_amplitudes(layout, layout.cavity_of(layout.control), omega_p)?
            .iter()
            .map(|a| a.r)
            .collect();
        let r2: Vec<C64> = configuration_amplitudes(layout, layout.cavity_of(layout.target), omega_p)?
            .iter()
            .map(|a| a.r)
            .collect();
        let had = PhotonOperator::hadamard(d);
        let seq = had
            .after(&PhotonOperator::reflection(&r2))
            .after(&had)
            .after(&PhotonOperator::reflection(&r1))
            .after(&had);
        let control = layout.control;
        let branch_h = seq.blocks[0][0].clone();
        let branch_v: Vec<C64> = seq.blocks[1][0]
            .iter()
            .enumerate()
            .map(|(k, &v)| if k >> control & 1 == 1 { -v } else { v })
            .collect();
        let kernel = CMatrix::from_fn(d, d, |i, j| {
            branch_h[i] * branch_h[j].conj() + branch_v[i] * branch_v[j].conj()
        });
        Ok(RemoteGateChannel { n_qubits: layout.num_qubits(), branch_h, branch_v, kernel })
    }

    /// Diagonal Kraus operators for the H and V detection events.
    pub fn kraus_diagonals(&self) -> (&[C64], &[C64]) {
        (&self.branch_h, &self.branch_v)
    }
}

impl Channel for RemoteGateChannel {
    fn num_qubits(&self) -> usize {
        self.n_qubits
    }
    fn apply(&self, rho: &CMatrix) -> CMatrix {
        let d = rho.nrows();
        CMatrix::from_fn(d, d, |i, j| {
            let kh = self.branch_h[i] * self.branch_h[j].conj();
            let kv = self.branch_v[i] * self.branch_v[j].conj();
            rho[(i, j)] * (kh + kv)
        })
    }
    fn is_post_selected(&self) -> bool {
        true
    }
    fn schur_kernel(&self) -> Option<&CMatrix> {
        Some(&self.kernel)
    }
}

/// ε(ρ) = Σ_k K_k ρ K_k†.
pub struct KrausChannel {
    ops: Vec<CMatrix>,
    n_qubits: usize,
    post_selected: bool,
}

impl KrausChannel {
    pub fn new(ops: Vec<CMatrix>, post_selected: bool) -> Result<Self> {
        let d = ops.first().map(|k| k.nrows()).unwrap_or(0);
        if d < 2 || !d.is_power_of_two() {
            return Err(Error::Precondition("Kraus operators must act on qubits".into()));
        }
        for k in &ops {
            if k.nrows() != d || k.ncols() != d {
                return Err(Error::DimensionMismatch { expected: d, got: k.nrows().max(k.ncols()) });
            }
        }
        Ok(KrausChannel { n_qubits: d.trailing_zeros() as usize, ops, post_selected })
    }

    pub fn unitary(u: CMatrix) -> Result<Self> {
        Self::new(vec![u], false)
    }
}

impl Channel for KrausChannel {
    fn num_qubits(&self) -> usize {
        self.n_qubits
    }
    fn apply(&self, rho: &CMatrix) -> CMatrix {
        let d = rho.nrows();
        self.ops
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, k| acc + k * rho * k.adjoint())
    }
    fn is_post_selected(&self) -> bool {
        self.post_selected
    }
}
