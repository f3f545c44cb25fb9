use criterion::{black_box, criterion_group, criterion_main, Criterion};
use cqed_cli::metrics::evaluate;
use cqed_gates::addressing::build_scenario;
use cqed_gates::fiber::{solve_mode, FiberSpec};
use cqed_gates::gate::ideal_unitary;
use cqed_gates::pauli::pauli_channel;
use cqed_gates::physics::amplitudes;
use cqed_gates::scenario::Scenario;
use cqed_gates::{AtomSpec, CavitySpec, Flavor, LocalGateChannel, NodeLayout};

fn bench_amplitudes(c: &mut Criterion) {
    let cavity = CavitySpec::new(2.5, 0.1, 0.1).unwrap();
    let atoms = vec![AtomSpec::resonant(7.8); 3];
    c.bench_function("amplitudes/3 atoms", |b| {
        b.iter(|| amplitudes(black_box(&cavity), black_box(&atoms), 0.0).unwrap())
    });
}

fn bench_pauli(c: &mut Criterion) {
    let cavity = CavitySpec::new(2.5, 0.1, 0.1).unwrap();
    let layout = NodeLayout::local(cavity, vec![AtomSpec::resonant(7.8); 4]).unwrap();
    let chan = LocalGateChannel::new(&layout, 0.0, Flavor::PostSelected).unwrap();
    let u = ideal_unitary(&layout);
    c.bench_function("pauli_channel/N=4 local", |b| b.iter(|| pauli_channel(&chan, &u, 0, 1).unwrap()));
}

fn bench_fiber(c: &mut Criterion) {
    let fiber = FiberSpec::default();
    c.bench_function("solve_mode/default fiber", |b| b.iter(|| solve_mode(black_box(&fiber)).unwrap()));
}

fn bench_sweep_point(c: &mut Criterion) {
    let base = Scenario::from_toml_str(
        "[cavity]\nkappa_r_2pi_mhz = 2.5\nkappa_t_2pi_mhz = 0.1\nkappa_m_2pi_mhz = 0.1\n\
         [[atoms]]\nr_nm = 300.0\ncount = 4\n",
    )
    .unwrap();
    let profile = base.coupling_profile().unwrap().unwrap();
    let s = build_scenario(&base, 800.0, 300.0).unwrap();
    c.bench_function("sweep point/N=4 addressing", |b| b.iter(|| evaluate(&s, Some(&profile)).unwrap()));
}

criterion_group!(benches, bench_amplitudes, bench_pauli, bench_fiber, bench_sweep_point);
criterion_main!(benches);
