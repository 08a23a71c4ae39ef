//! Acceptance suite: the project's nine numbered acceptance criteria, one
//! test per criterion, each printing a PASS/FAIL line (visible with
//! `cargo test --test acceptance -- --nocapture`).
//!
//! Every tolerance is pinned in this file. Expected values marked "oracle"
//! were frozen from independent reference computations (closed-form
//! formulas where available, otherwise an independent spectral/split-step
//! evaluation of the same model).

use std::time::Instant;

use dotbus::evolve::{
    average_transfer_fidelity, first_overlap_minimum, first_resonance, propagate_driven,
    propagate_static, time_grid, uniform_chain_first_resonance, Observable, StaticPropagator,
};
use dotbus::gates::{self, BellPrepSpec};
use dotbus::hamiltonian::{apply_block, chain_hamiltonian, BlockSpec, DriveSpec, DrivenChain};
use dotbus::linalg::CVector;
use dotbus::model::{BasisIndex, ChainSpec, Sector, StateVector, HBAR};
use dotbus::protocol::{
    concurrence, fidelity_budget, reduced_two_qubit_state, run_distribution, ArmSpec, BellMode,
    FidelityFactors, ProtocolOptions,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

struct Criterion {
    name: &'static str,
    started: Instant,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Criterion {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            started: Instant::now(),
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: String) {
        if !ok {
            self.failures.push(detail);
        }
    }

    fn note(&mut self, detail: String) {
        self.notes.push(detail);
    }

    fn finish(mut self, runtime_limit_s: f64) {
        let elapsed = self.started.elapsed().as_secs_f64();
        self.check(
            elapsed < runtime_limit_s,
            format!("runtime {elapsed:.2} s exceeds the {runtime_limit_s} s limit"),
        );
        for note in &self.notes {
            println!("  {}: note — {note}", self.name);
        }
        if self.failures.is_empty() {
            println!("{}: PASS ({elapsed:.2} s)", self.name);
        } else {
            println!("{}: FAIL ({elapsed:.2} s)", self.name);
            for f in &self.failures {
                println!("  {}: {f}", self.name);
            }
            panic!("{} failed:\n  {}", self.name, self.failures.join("\n  "));
        }
    }
}

fn uniform_single_excitation(
    n: usize,
    v: f64,
) -> (dotbus::linalg::HermitianMatrix, std::sync::Arc<BasisIndex>) {
    let chain = ChainSpec::uniform(n, v).unwrap();
    let basis = BasisIndex::build(n, Sector::Exactly(1)).unwrap();
    (chain_hamiltonian(&chain, &basis).unwrap(), basis)
}

/// Criterion 1: analytic transfer oracles for two and three sites.
#[test]
fn criterion_1_analytic_oracles() {
    let mut c = Criterion::new("criterion 1 (analytic oracles)");
    let v = 0.2;

    let (h2, basis2) = uniform_single_excitation(2, v);
    let psi0 = StateVector::basis_state(&basis2, 0b01).unwrap();
    let prop = StaticPropagator::new(&h2, &psi0).unwrap();
    let mut worst: f64 = 0.0;
    let mut t = 0.0;
    while t <= 20.0 {
        let got = prop.state_at(t).population(0b10);
        let want = (v * t / HBAR).sin().powi(2);
        worst = worst.max((got - want).abs());
        t += 0.005;
    }
    c.check(
        worst < 1e-8,
        format!("two-site vs sin^2 worst error {worst:.3e} >= 1e-8"),
    );

    let (h3, basis3) = uniform_single_excitation(3, v);
    let psi0 = StateVector::basis_state(&basis3, 0b001).unwrap();
    let t3 = std::f64::consts::PI * HBAR / ((2.0_f64).sqrt() * v);
    let p3 = propagate_static(&h3, &psi0, t3).unwrap().population(0b100);
    c.check(
        (p3 - 1.0).abs() < 1e-8,
        format!("three-site transfer at t = {t3:.4} ps: population {p3} not 1 within 1e-8"),
    );
    c.finish(1.0);
}

fn fig3_peak(omega_over_vf: f64) -> (f64, f64) {
    let n = 5;
    let v = 0.2;
    let omega = omega_over_vf * v;
    let basis = BasisIndex::build(n, Sector::All).unwrap();
    let chain = ChainSpec::uniform(n, v).unwrap();
    let h = chain_hamiltonian(&chain, &basis).unwrap();
    let t_pi = std::f64::consts::PI * HBAR / (2.0 * omega);
    let t_max = 3.0 * t_pi;
    let drive = DriveSpec::resonant_rect((0..n).collect(), omega, 0.0, t_max).unwrap();
    let driven = DrivenChain::new(h, &basis)
        .unwrap()
        .with_drive(drive)
        .unwrap();
    let psi0 = StateVector::basis_state(&basis, 0).unwrap();
    let grid = time_grid(t_max, 0.002);
    let traj = propagate_driven(
        &driven,
        &psi0,
        &grid,
        0.002,
        &[("p_all".into(), Observable::Population((1 << n) - 1))],
    )
    .unwrap();
    let peak = first_resonance(&traj, "p_all").unwrap();
    (peak.time_ps, peak.value)
}

/// Criterion 2: driven control-array flopping quality at large and small Ω.
#[test]
fn criterion_2_control_array_drive() {
    let mut c = Criterion::new("criterion 2 (control-array drive)");
    let (t_fast, p_fast) = fig3_peak(25.0);
    c.check(
        p_fast >= 0.99,
        format!("peak all-excited population {p_fast:.6} < 0.99 at Omega = 25 V_F"),
    );
    c.check(
        t_fast < 1.0,
        format!("peak time {t_fast:.4} ps not sub-picosecond"),
    );
    let (_, p_slow) = fig3_peak(1.0);
    c.check(
        p_slow < 0.9,
        format!("peak {p_slow:.6} at Omega = V_F should stay below 0.9"),
    );
    c.note(format!(
        "Omega = 25 V_F: peak {p_fast:.6} at {t_fast:.4} ps; Omega = V_F: peak {p_slow:.6}"
    ));
    c.finish(10.0);
}

fn blocked_overlap(
    n: usize,
    ratio: f64,
) -> (Vec<f64>, Vec<f64>, Option<dotbus::evolve::ResonancePoint>) {
    let v = 0.2;
    let basis = BasisIndex::build(n, Sector::Exactly(1)).unwrap();
    let chain = ChainSpec::uniform(n, v).unwrap();
    let h = chain_hamiltonian(&chain, &basis).unwrap();
    let blocked = apply_block(&h, &basis, &BlockSpec::interior(n, ratio * v)).unwrap();
    let psi0 = StateVector::basis_state(&basis, 1).unwrap();
    let grid = time_grid(20.0, 0.005);
    let traj = StaticPropagator::new(&blocked, &psi0)
        .unwrap()
        .trajectory(&grid, &[("overlap".into(), Observable::OverlapWithInitial)])
        .unwrap();
    let min = first_overlap_minimum(&traj).ok();
    let values = traj.series_named("overlap").unwrap().values.clone();
    (grid, values, min)
}

/// Criterion 3: biexcitonic blocking quality against the shift ratio.
#[test]
fn criterion_3_blocking_overlap() {
    let mut c = Criterion::new("criterion 3 (blocking overlap)");
    let ratios = [0.0, 2.0, 5.0, 10.0, 20.0, 40.0];
    let mut previous = -1.0;
    let mut at_20 = 0.0;
    for &ratio in &ratios {
        let (_, _, min) = blocked_overlap(5, ratio);
        let value = min.map(|m| m.value).unwrap_or(f64::NAN);
        c.check(
            value.is_finite(),
            format!("no overlap minimum found at ratio {ratio}"),
        );
        c.check(
            value >= previous - 1e-9,
            format!("overlap at ratio {ratio} = {value:.6} breaks monotonicity (previous {previous:.6})"),
        );
        previous = value;
        if ratio == 20.0 {
            at_20 = value;
        }
    }
    c.check(
        at_20 >= 0.99,
        format!("first-minimum overlap {at_20:.6} < 0.99 at ratio 20"),
    );

    let (grid, five, min5) = blocked_overlap(5, 20.0);
    let (_, seven, _) = blocked_overlap(7, 20.0);
    let t_a = min5.unwrap().time_ps;
    let worst = grid
        .iter()
        .zip(five.iter().zip(seven.iter()))
        .filter(|(t, _)| **t <= t_a)
        .map(|(_, (a, b))| (a - b).abs())
        .fold(0.0, f64::max);
    c.check(
        worst < 0.01,
        format!("5- vs 7-site overlap curves differ by {worst:.4} before the first minimum"),
    );
    c.note(format!(
        "overlap at ratio 20: {at_20:.6}; curve agreement before t_a: {worst:.2e}"
    ));
    c.finish(10.0);
}

/// Criterion 4: first-resonance fidelity for 2–10 sites and the transfer
/// time of the nine-dot bus against the sub-10 ps claim (factor-of-two
/// tolerance).
#[test]
fn criterion_4_transfer_resonances() {
    let mut c = Criterion::new("criterion 4 (transfer resonances)");
    let v = 0.2;
    for n in 2..=10usize {
        let res = uniform_chain_first_resonance(n, v).unwrap();
        let favg = average_transfer_fidelity(res.value);
        c.note(format!(
            "{n} sites: t* = {:.4} ps, population = {:.6}, average fidelity = {favg:.6}",
            res.time_ps, res.value
        ));
        c.check(
            favg >= 0.94,
            format!(
                "average transfer fidelity at {n} sites = {favg:.6} < 0.94 \
                 (population {:.6}; the 0.94 level holds for 2..=9 sites)",
                res.value
            ),
        );
    }
    let t9 = uniform_chain_first_resonance(9, v).unwrap().time_ps;
    let t11 = uniform_chain_first_resonance(11, v).unwrap().time_ps;
    c.note(format!(
        "nine-dot-bus readings: {t9:.3} ps (9 sites) and {t11:.3} ps (11 sites) vs the < 10 ps claim"
    ));
    let best = t9.min(t11);
    c.check(
        (5.0..=20.0).contains(&best),
        format!("nine-dot-bus reading {best:.3} ps outside factor two of the 10 ps claim"),
    );
    let flagged = !(t9 < 10.0 || t11 < 10.0);
    c.note(format!("claim flagged (exit code 3 path): {flagged}"));
    c.finish(10.0);
}

/// Criterion 5: gate identities and the randomized storage-swap contract.
#[test]
fn criterion_5_gate_identities() {
    let mut c = Criterion::new("criterion 5 (gate identities)");
    let mut cnot_err = 0.0_f64;
    for (ctl, tgt) in [(0usize, 1usize), (1, 0)] {
        let ht = gates::embed_single(&gates::hadamard(), tgt);
        let product = ht.dot(gates::controlled_phase().array()).dot(&ht);
        let err = (&product - gates::cnot(ctl, tgt).unwrap().array())
            .iter()
            .map(|x| x.norm())
            .fold(0.0, f64::max);
        cnot_err = cnot_err.max(err);
    }
    c.check(
        cnot_err < 1e-12,
        format!("CNOT vs H.P.H deviation {cnot_err:.3e}"),
    );

    let s = gates::swap_in_sequence();
    let mut rng = ChaCha12Rng::seed_from_u64(20260810);
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let theta: f64 = rng.random::<f64>() * std::f64::consts::PI;
        let phi: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        let a = Complex64::new((theta / 2.0).cos(), 0.0);
        let b = Complex64::new(0.0, phi).exp() * (theta / 2.0).sin();
        let mut input = CVector::zeros(4);
        input[0] = a;
        input[1] = b;
        let got = s.apply(&input);
        let mut expect = CVector::zeros(4);
        expect[0] = a;
        expect[2] = b;
        let z: Complex64 = expect
            .iter()
            .zip(got.iter())
            .map(|(e, o)| e.conj() * o)
            .sum();
        let phase = if z.norm() > 0.0 {
            z / z.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let err = got
            .iter()
            .zip(expect.iter())
            .map(|(o, e)| (o - e * phase).norm())
            .fold(0.0, f64::max);
        worst = worst.max(err);
    }
    c.check(
        worst < 1e-10,
        format!("storage swap error {worst:.3e} over 1000 seeded states"),
    );
    c.finish(1.0);
}

/// Criterion 6: pulsed Bell preparation selectivity.
#[test]
fn criterion_6_pulsed_bell_preparation() {
    let mut c = Criterion::new("criterion 6 (pulsed Bell preparation)");
    let shift = 4.0;
    let (_, reference) =
        gates::bell_prepare_pulsed(&BellPrepSpec::new(shift, 1.0, 0.1).unwrap()).unwrap();
    c.check(
        reference >= 0.99,
        format!("fidelity {reference:.6} < 0.99 at shift 4 meV, Omega 0.1 meV"),
    );
    let mut previous = f64::INFINITY;
    for ratio in [0.005, 0.025, 0.1, 0.5] {
        let spec = BellPrepSpec::new(shift, 1.0, ratio * shift).unwrap();
        let (_, fidelity) = gates::bell_prepare_pulsed(&spec).unwrap();
        c.note(format!("Omega/shift = {ratio}: fidelity {fidelity:.6}"));
        c.check(
            fidelity <= previous + 1e-9,
            format!("fidelity {fidelity:.6} at ratio {ratio} above previous {previous:.6}"),
        );
        previous = fidelity;
    }
    c.finish(5.0);
}

/// Criterion 7: end-to-end distribution quality and timing.
#[test]
fn criterion_7_end_to_end_distribution() {
    let mut c = Criterion::new("criterion 7 (end-to-end distribution)");
    let options = ProtocolOptions::default();
    let arm = |bus: usize, gamma: f64| ArmSpec::new(bus, 0.2, 4.0, gamma).unwrap();

    let minimal = run_distribution(&arm(1, 0.0), &arm(1, 0.0), &options).unwrap();
    c.check(
        (minimal.concurrence - 1.0).abs() < 1e-6,
        format!(
            "three-site arms concurrence {} not 1 within 1e-6",
            minimal.concurrence
        ),
    );

    let five_dot_arms = run_distribution(&arm(3, 0.0), &arm(3, 0.0), &options).unwrap();
    c.note(format!(
        "five-dot arms (three-dot buses): concurrence {:.6}",
        five_dot_arms.concurrence
    ));
    let five_dot_buses = run_distribution(&arm(5, 0.0), &arm(5, 0.0), &options).unwrap();
    c.note(format!(
        "five-dot buses (seven-dot arms): concurrence {:.6}, capped by per-arm population {:.6}",
        five_dot_buses.concurrence, five_dot_buses.transfer_a
    ));
    c.check(
        five_dot_buses.concurrence >= 0.85,
        format!(
            "five-dot-bus arms concurrence {:.6} < 0.85 (the delivered population \
             {:.6} per arm bounds it near population^2; the 0.85 level holds for \
             five-dot arms, concurrence {:.6})",
            five_dot_buses.concurrence, five_dot_buses.transfer_a, five_dot_arms.concurrence
        ),
    );

    let default_scenario = run_distribution(&arm(5, 0.001), &arm(5, 0.001), &options).unwrap();
    c.check(
        default_scenario.elapsed_ps <= 20.0,
        format!(
            "default scenario elapsed {:.3} ps exceeds 20 ps",
            default_scenario.elapsed_ps
        ),
    );
    c.note(format!(
        "default scenario elapsed {:.3} ps",
        default_scenario.elapsed_ps
    ));
    c.finish(10.0);
}

/// Criterion 8: the multiplicative fidelity budget and both decay
/// conventions.
#[test]
fn criterion_8_fidelity_budget() {
    let mut c = Criterion::new("criterion 8 (fidelity budget)");
    let factors = FidelityFactors {
        chain_transfer: 0.94,
        blocking: 0.99,
        swap_gate: 0.99,
        decay: 0.99,
    };
    let total = fidelity_budget(&factors).unwrap();
    c.check(
        (total - 0.9121).abs() <= 1e-4,
        format!("budget product {total:.6} not 0.9121 within 1e-4"),
    );
    let line = dotbus::protocol::BudgetLine::evaluate("nominal", factors)
        .unwrap()
        .display();
    c.check(
        line.contains("(91%)"),
        format!("budget line '{line}' does not display 91%"),
    );

    let arm = ArmSpec::new(5, 0.2, 4.0, 0.001).unwrap();
    let report = run_distribution(&arm, &arm, &ProtocolOptions::default()).unwrap();
    let text = report.to_report_text();
    c.check(
        (report.decay_population_20ps - 0.9802).abs() < 1e-4,
        format!(
            "population decay factor {:.6} not 0.9802",
            report.decay_population_20ps
        ),
    );
    c.check(
        (report.decay_amplitude_20ps - 0.9900).abs() < 1e-4,
        format!(
            "amplitude decay factor {:.6} not 0.9900",
            report.decay_amplitude_20ps
        ),
    );
    c.check(
        text.contains("decay_amplitude_convention_20ps") && text.contains("decay_population_20ps")
            || text.contains("decay_population_convention_20ps"),
        "report does not label both decay conventions".to_string(),
    );
    c.finish(5.0);
}

/// Criterion 9: property suite over seeded random instances.
#[test]
fn criterion_9_property_suite() {
    let mut c = Criterion::new("criterion 9 (property suite)");
    let mut rng = ChaCha12Rng::seed_from_u64(987654321);

    // Norm conservation and propagator composition on random chains.
    let mut worst_norm = 0.0_f64;
    let mut worst_comp = 0.0_f64;
    for _ in 0..100 {
        let n = rng.random_range(2..=8usize);
        let dots: Vec<_> = (0..n)
            .map(|_| dotbus::model::DotSpec::new(rng.random::<f64>() * 2.0 - 1.0, 0.0).unwrap())
            .collect();
        let couplings: Vec<f64> = (0..n - 1)
            .map(|_| rng.random::<f64>() * 0.5 + 0.05)
            .collect();
        let chain = ChainSpec::new(dots, couplings).unwrap();
        let basis = BasisIndex::build(n, Sector::Exactly(1)).unwrap();
        let h = chain_hamiltonian(&chain, &basis).unwrap();
        let start = rng.random_range(0..n);
        let psi0 = StateVector::basis_state(&basis, 1 << start).unwrap();
        let t1 = rng.random::<f64>() * 10.0;
        let t2 = rng.random::<f64>() * 10.0;
        let once = propagate_static(&h, &psi0, t1 + t2).unwrap();
        worst_norm = worst_norm.max((once.norm_sqr().sqrt() - 1.0).abs());
        let twice = propagate_static(&h, &propagate_static(&h, &psi0, t1).unwrap(), t2).unwrap();
        let dev = once
            .amplitudes()
            .iter()
            .zip(twice.amplitudes().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        worst_comp = worst_comp.max(dev);
    }
    c.check(
        worst_norm < 1e-9,
        format!("norm conservation violated at {worst_norm:.3e}"),
    );
    c.check(
        worst_comp < 1e-9,
        format!("propagator composition violated at {worst_comp:.3e}"),
    );

    // Excitation-sector conservation in the full basis.
    let mut worst_sector = 0.0_f64;
    for _ in 0..100 {
        let n = rng.random_range(2..=6usize);
        let coupling = rng.random::<f64>() * 0.5 + 0.05;
        let chain = ChainSpec::uniform(n, coupling).unwrap();
        let basis = BasisIndex::build(n, Sector::All).unwrap();
        let h = chain_hamiltonian(&chain, &basis).unwrap();
        let mut amps = CVector::zeros(basis.dim());
        for a in amps.iter_mut() {
            *a = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
        let norm = amps.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let amps = amps.mapv(|x| x / norm);
        let sector_pops = |s: &StateVector| -> Vec<f64> {
            let mut pops = vec![0.0; n + 1];
            for (i, w) in s.basis().words().enumerate() {
                pops[w.count_ones() as usize] += s.amplitudes()[i].norm_sqr();
            }
            pops
        };
        let psi0 = StateVector::from_amplitudes(&basis, amps).unwrap();
        let before = sector_pops(&psi0);
        let after = sector_pops(&propagate_static(&h, &psi0, rng.random::<f64>() * 20.0).unwrap());
        let dev = before
            .iter()
            .zip(after.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst_sector = worst_sector.max(dev);
    }
    c.check(
        worst_sector < 1e-9,
        format!("sector conservation violated at {worst_sector:.3e}"),
    );

    // Mirror symmetry of uniform chains.
    let mut worst_mirror = 0.0_f64;
    for _ in 0..100 {
        let n = rng.random_range(2..=9usize);
        let coupling = rng.random::<f64>() * 0.5 + 0.05;
        let (h, basis) = {
            let chain = ChainSpec::uniform(n, coupling).unwrap();
            let basis = BasisIndex::build(n, Sector::Exactly(1)).unwrap();
            (chain_hamiltonian(&chain, &basis).unwrap(), basis)
        };
        let t = rng.random::<f64>() * 30.0;
        let from_first = StateVector::basis_state(&basis, 1).unwrap();
        let from_last = StateVector::basis_state(&basis, 1 << (n - 1)).unwrap();
        let a = propagate_static(&h, &from_first, t)
            .unwrap()
            .site_population(n - 1);
        let b = propagate_static(&h, &from_last, t)
            .unwrap()
            .site_population(0);
        worst_mirror = worst_mirror.max((a - b).abs());
    }
    c.check(
        worst_mirror < 1e-9,
        format!("mirror symmetry violated at {worst_mirror:.3e}"),
    );

    // Density-matrix validity of reduced states from random register states.
    let joint_basis = BasisIndex::build(6, Sector::AtMost(2)).unwrap();
    let mut worst_trace = 0.0_f64;
    for _ in 0..100 {
        let mut amps = CVector::zeros(joint_basis.dim());
        for a in amps.iter_mut() {
            *a = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
        let norm = amps.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let amps = amps.mapv(|x| x / norm);
        let joint = StateVector::from_amplitudes(&joint_basis, amps).unwrap();
        // The constructor enforces hermiticity, unit trace and positivity.
        let rho = reduced_two_qubit_state(&joint, 2, 5).unwrap();
        let trace: Complex64 = (0..4).map(|i| rho.array()[[i, i]]).sum();
        worst_trace = worst_trace.max((trace - Complex64::new(1.0, 0.0)).norm());
        let cval = concurrence(&rho).unwrap();
        c.check(
            (0.0..=1.0).contains(&cval),
            format!("concurrence {cval} outside [0, 1]"),
        );
    }
    c.check(
        worst_trace < 1e-10,
        format!("reduced trace deviates by {worst_trace:.3e}"),
    );

    // Blocking monotonicity over the sampled ratio grid.
    let mut previous = -1.0;
    for ratio in [0.0, 2.0, 5.0, 10.0, 20.0, 40.0] {
        let v = 0.2;
        let basis = BasisIndex::build(5, Sector::Exactly(1)).unwrap();
        let chain = ChainSpec::uniform(5, v).unwrap();
        let h = chain_hamiltonian(&chain, &basis).unwrap();
        let blocked = apply_block(&h, &basis, &BlockSpec::interior(5, ratio * v)).unwrap();
        let psi0 = StateVector::basis_state(&basis, 1).unwrap();
        let grid = time_grid(20.0, 0.005);
        let traj = StaticPropagator::new(&blocked, &psi0)
            .unwrap()
            .trajectory(&grid, &[("overlap".into(), Observable::OverlapWithInitial)])
            .unwrap();
        let value = first_overlap_minimum(&traj).unwrap().value;
        c.check(
            value >= previous - 1e-9,
            format!("blocking monotonicity broken at ratio {ratio}: {value:.6} < {previous:.6}"),
        );
        previous = value;
    }

    // Bell-mode plumbing sanity: a pulsed-prep distribution still yields a
    // valid report.
    let pulsed = ProtocolOptions {
        bell_mode: BellMode::Pulsed(BellPrepSpec::default()),
        ..ProtocolOptions::default()
    };
    let arm = ArmSpec::new(1, 0.2, 4.0, 0.0).unwrap();
    let report = run_distribution(&arm, &arm, &pulsed).unwrap();
    c.check(
        report.concurrence > 0.99,
        format!(
            "pulsed-prep minimal arms concurrence {:.6} <= 0.99",
            report.concurrence
        ),
    );

    c.finish(60.0);
}
