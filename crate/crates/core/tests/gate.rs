mod common;

use common::*;
use cqed_gates::fidelity::entanglement_fidelity;
use cqed_gates::gate::{
    apply_atom_photon_gate, apply_local_gate, apply_remote_gate, build_g_matrix,
    configuration_amplitudes, ideal_unitary, remote_photon_amplitudes, success_probability,
};
use cqed_gates::{
    AtomSpec, CMatrix, CavitySpec, Channel, DensityMatrix, Flavor, LocalGateChannel, NodeLayout,
    PlacedAtom, RemoteGateChannel, C64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_local_layout(rng: &mut ChaCha8Rng) -> NodeLayout {
    let n = rng.gen_range(2..5);
    let atoms = (0..n).map(|_| random_atom(rng)).collect();
    NodeLayout::local(random_cavity(rng), atoms).unwrap()
}

#[test]
fn total_flavor_preserves_trace_and_positivity() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let layout = random_local_layout(&mut rng);
        let rho = DensityMatrix::new(random_state(&mut rng, layout.dim())).unwrap();
        let out = apply_local_gate(&rho, &layout, rng.gen_range(-5.0..5.0), Flavor::Total).unwrap();
        assert!((out.rho.trace() - 1.0).abs() < 1e-12);
        assert!(min_eigenvalue(out.rho.matrix()) > -1e-12);
    }
}

#[test]
fn post_selected_outputs_are_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let layout = random_local_layout(&mut rng);
        let rho = DensityMatrix::new(random_state(&mut rng, layout.dim())).unwrap();
        let out = apply_local_gate(&rho, &layout, 0.0, Flavor::PostSelected).unwrap();
        let p = out.success_probability.unwrap();
        assert!(p > 0.0 && p <= 1.0 + 1e-12);
        assert!((out.rho.trace() - 1.0).abs() < 1e-12);
        assert!(min_eigenvalue(out.rho.matrix()) > -1e-12);
    }
}

#[test]
fn g_matrix_structure() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let layout = random_local_layout(&mut rng);
        let total = build_g_matrix(&layout, 0, 0.3, Flavor::Total).unwrap().matrix;
        let ps = build_g_matrix(&layout, 0, 0.3, Flavor::PostSelected).unwrap().matrix;
        for g in [&total, &ps] {
            assert!((g - g.adjoint()).norm() < 1e-14);
            assert!(min_eigenvalue(g) > -1e-12);
        }
        for i in 0..layout.dim() {
            assert!((total[(i, i)].re - 1.0).abs() < 1e-12);
            assert!(ps[(i, i)].re <= 1.0 + 1e-12);
        }
        let eig = ps.clone().symmetric_eigen().eigenvalues;
        let mut sorted: Vec<f64> = eig.iter().cloned().collect();
        sorted.sort_by(f64::total_cmp);
        assert!(sorted[..sorted.len() - 1].iter().all(|x| x.abs() < 1e-12));
        assert!((sorted.last().unwrap() - ps.trace().re).abs() < 1e-12);
    }
}

#[test]
fn schur_channel_maps_positive_to_positive() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..40 {
        let n = rng.gen_range(2..4);
        let atoms = (0..n).map(|_| random_atom(&mut rng)).collect();
        let layout = NodeLayout::local(random_cavity(&mut rng), atoms).unwrap();
        for flavor in [Flavor::Total, Flavor::PostSelected] {
            let chan = LocalGateChannel::new(&layout, 0.0, flavor).unwrap();
            // Acts on one half of a random positive operator of the doubled system.
            let d = layout.dim();
            let big = random_state(&mut rng, d * d);
            let mut out = CMatrix::zeros(d * d, d * d);
            for i in 0..d {
                for j in 0..d {
                    let block = big.view((i * d, j * d), (d, d)).clone_owned();
                    out.view_mut((i * d, j * d), (d, d)).copy_from(&chan.apply(&block));
                }
            }
            assert!(min_eigenvalue(&out) > -1e-12);
        }
    }
}

fn relabel(layout: &NodeLayout, perm: &[usize]) -> NodeLayout {
    // Qubit q of the new layout is qubit perm[q] of the old one.
    let atoms: Vec<PlacedAtom> = perm.iter().map(|&p| layout.atoms()[p]).collect();
    let pos = |old: usize| perm.iter().position(|&p| p == old).unwrap();
    NodeLayout::new(
        layout.cavities().to_vec(),
        atoms,
        pos(layout.control()),
        pos(layout.target()),
    )
    .unwrap()
}

#[test]
fn qubit_relabeling_leaves_fidelity_and_success_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let perms: [&[usize]; 3] = [&[1, 0, 2, 3], &[3, 2, 1, 0], &[2, 0, 3, 1]];
    for _ in 0..20 {
        let cavity = random_cavity(&mut rng);
        let spectator = random_atom(&mut rng);
        let pair = random_atom(&mut rng);
        let layout = NodeLayout::local(cavity, vec![pair, pair, spectator, spectator]).unwrap();
        let f = |l: &NodeLayout| {
            let chan = LocalGateChannel::new(l, 0.0, Flavor::PostSelected).unwrap();
            (
                entanglement_fidelity(&chan, &ideal_unitary(l)).unwrap(),
                success_probability(l, 0.0).unwrap(),
            )
        };
        let (f0, p0) = f(&layout);
        for perm in perms {
            let (f1, p1) = f(&relabel(&layout, perm));
            assert!((f0 - f1).abs() < 1e-12 && (p0 - p1).abs() < 1e-12);
        }
    }
}

#[test]
fn remote_branches_match_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..100 {
        let n = rng.gen_range(2..5);
        let atoms = (0..n).map(|_| random_atom(&mut rng)).collect();
        let layout =
            NodeLayout::remote(random_cavity(&mut rng), random_cavity(&mut rng), atoms).unwrap();
        let chan = RemoteGateChannel::new(&layout, 0.2).unwrap();
        let r1 = configuration_amplitudes(&layout, 0, 0.2).unwrap();
        let r2 = configuration_amplitudes(&layout, 1, 0.2).unwrap();
        let (h, v) = chan.kraus_diagonals();
        for k in 0..layout.dim() {
            let (eh, ev) = remote_photon_amplitudes(r1[k].r, r2[k].r);
            let ev = if k & 1 == 1 { -ev } else { ev };
            assert!((h[k] - eh).norm() < 1e-14 && (v[k] - ev).norm() < 1e-14);
        }
    }
}

#[test]
fn closed_form_photon_state_for_arbitrary_reflections() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let one = C64::new(1.0, 0.0);
    for _ in 0..100 {
        let (r1, r2) = (gaussian(&mut rng), gaussian(&mut rng));
        // H, R1, H, R2, H applied to |H⟩ with explicit 2×2 matrices.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let had = nalgebra::Matrix2::new(one * s, one * s, one * s, -one * s);
        let refl = |r: C64| nalgebra::Matrix2::new(r, C64::new(0.0, 0.0), C64::new(0.0, 0.0), one);
        let psi = had * refl(r2) * had * refl(r1) * had * nalgebra::Vector2::new(one, C64::new(0.0, 0.0));
        let (h, v) = remote_photon_amplitudes(r1, r2);
        assert!((psi[0] - h).norm() < 1e-14 && (psi[1] - v).norm() < 1e-14);
    }
}

#[test]
fn remote_fidelity_depends_on_which_cavity_holds_the_extra_atom() {
    let cavity = baseline_cavity();
    let atom = AtomSpec::resonant(7.8);
    let fidelity = |assign: [usize; 3]| {
        let placed = assign.iter().map(|&c| PlacedAtom { spec: atom, cavity: c }).collect();
        let layout = NodeLayout::new(vec![cavity; 2], placed, 0, 1).unwrap();
        let chan = RemoteGateChannel::new(&layout, 0.0).unwrap();
        entanglement_fidelity(&chan, &ideal_unitary(&layout)).unwrap()
    };
    let (a, b) = (fidelity([0, 1, 0]), fidelity([0, 1, 1]));
    assert!((a - b).abs() > 1e-6, "{a} vs {b}");
}

fn ideal_cavity() -> CavitySpec {
    CavitySpec::new(2.5, 0.0, 0.0).unwrap()
}

#[test]
fn ideal_amplitudes_give_exact_cz() {
    let strong = AtomSpec::resonant(1e5);
    let local = NodeLayout::local(ideal_cavity(), vec![strong; 2]).unwrap();
    let chan = LocalGateChannel::new(&local, 0.0, Flavor::PostSelected).unwrap();
    let f = entanglement_fidelity(&chan, &ideal_unitary(&local)).unwrap();
    assert!(1.0 - f < 1e-8);
    assert!(1.0 - success_probability(&local, 0.0).unwrap() < 1e-8);

    let remote = NodeLayout::remote(ideal_cavity(), ideal_cavity(), vec![strong; 2]).unwrap();
    let chan = RemoteGateChannel::new(&remote, 0.0).unwrap();
    let f = entanglement_fidelity(&chan, &ideal_unitary(&remote)).unwrap();
    assert!(1.0 - f < 1e-8);
    assert!(1.0 - success_probability(&remote, 0.0).unwrap() < 1e-8);

    let rho = DensityMatrix::uniform_superposition(2);
    let out = apply_remote_gate(&rho, &remote, 0.0).unwrap();
    assert!((out.success_probability.unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn atom_photon_gate_in_the_ideal_limit() {
    // Qubit 1 is uncoupled, so only the control atom acts on the photon.
    let layout = NodeLayout::local(ideal_cavity(), vec![AtomSpec::resonant(1e5), AtomSpec::resonant(0.0)])
        .unwrap();
    let (alpha, beta) = (C64::new(0.6, 0.0), C64::new(0.0, 0.8));
    let z = C64::new(0.0, 0.0);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // Index = photon·4 + qubit1·2 + qubit0, photon H = 0.
    let psi_in = nalgebra::DVector::from_vec(vec![alpha * s, beta * s, z, z, alpha * s, beta * s, z, z]);
    let rho = DensityMatrix::pure(&psi_in).unwrap();
    let out = apply_atom_photon_gate(&rho, &layout, 0.0).unwrap();
    let want = nalgebra::DVector::from_vec(vec![-alpha * s, beta * s, z, z, alpha * s, beta * s, z, z]);
    let expected = &want * want.adjoint();
    assert!((out.matrix() - expected).norm() < 1e-8);
}

#[test]
fn atom_photon_gate_scales_the_h_component() {
    let layout = NodeLayout::local(baseline_cavity(), vec![AtomSpec::resonant(7.8), AtomSpec::resonant(0.0)])
        .unwrap();
    let mut rho = CMatrix::zeros(8, 8);
    for i in [0, 1, 4, 5] {
        for j in [0, 1, 4, 5] {
            rho[(i, j)] = C64::new(0.25, 0.0);
        }
    }
    let out = apply_atom_photon_gate(&DensityMatrix::new(rho).unwrap(), &layout, 0.0).unwrap();
    let m = out.matrix();
    // ⟨H0|ρ|V0⟩ and ⟨H1|ρ|V1⟩ carry r(0) and r(1) once.
    assert!((m[(0, 4)].re / 0.25 + 0.85185).abs() < 5e-6);
    assert!((m[(1, 5)].re / 0.25 - 0.80843).abs() < 5e-6);
}

#[test]
fn rejects_non_physical_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let h = random_hermitian(&mut rng, 4);
    assert!(DensityMatrix::new(h.clone() * C64::new(0.0, 1.0)).is_err());
    let mut neg = CMatrix::identity(4, 4) * C64::new(0.25, 0.0);
    neg[(0, 0)] = C64::new(-0.1, 0.0);
    assert!(DensityMatrix::new(neg).is_err());
    let layout = NodeLayout::local(baseline_cavity(), vec![AtomSpec::resonant(7.8); 2]).unwrap();
    let rho = DensityMatrix::uniform_superposition(3);
    assert!(apply_local_gate(&rho, &layout, 0.0, Flavor::Total).is_err());
    assert!(RemoteGateChannel::new(&layout, 0.0).is_err());
}
