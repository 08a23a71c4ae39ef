//! The five front-end commands: figure reproduction, transfer scan,
//! distribution runs and gate checks.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolve::{
    average_transfer_fidelity, first_overlap_minimum, propagate_driven, time_grid,
    uniform_chain_first_resonance, Observable, StaticPropagator,
};
use crate::gates;
use crate::hamiltonian::{apply_block, chain_hamiltonian, BlockSpec, DriveSpec, DrivenChain};
use crate::linalg::{CMatrix, CVector};
use crate::model::{BasisIndex, ChainSpec, Sector, StateVector, HBAR};
use crate::protocol::{run_distribution, ArmSpec, BellMode, DistributionReport, ProtocolOptions};

use super::config::ScenarioConfig;
use super::svg::{LineChart, Series};
use super::{write_atomic, OutputFormat};

/// The fixed ratio used for the Fig. 4 inset comparison of chain lengths.
const INSET_RATIO: f64 = 20.0;

/// Paper claim the transfer scan is compared against.
const TRANSFER_CLAIM_PS: f64 = 10.0;

fn ratio_tag(r: f64) -> String {
    if (r - r.round()).abs() < 1e-9 {
        format!("{}", r.round() as i64)
    } else {
        format!("{r}").replace('.', "p")
    }
}

/// Population of the ground and fully excited states of a driven chain, per
/// sweep value of Ω.
pub fn cmd_fig3(cfg: &ScenarioConfig, out_dir: &Path) -> Result<()> {
    let n = cfg.chain.n_sites;
    let v = cfg.chain.v_f_mev;
    let dt = cfg.drive.dt_ps;
    let basis = BasisIndex::build(n, Sector::All)?;
    let chain = ChainSpec::uniform(n, v)?;
    let h_chain = chain_hamiltonian(&chain, &basis)?;
    let all_excited = (1u64 << n) - 1;
    let psi0 = StateVector::basis_state(&basis, 0)?;

    struct SweepRun {
        tag: String,
        title_omega: String,
        grid: Vec<f64>,
        ground: Vec<f64>,
        excited: Vec<f64>,
    }

    // Sweep either in units of the coupling or in absolute meV.
    let sweep: Vec<(f64, String, String)> = match &cfg.drive.omega_mev {
        Some(omegas) => omegas
            .iter()
            .map(|&w| (w, format!("{}mev", ratio_tag(w)), format!("{w} meV")))
            .collect(),
        None => cfg
            .drive
            .omega_over_vf
            .iter()
            .map(|&r| (r * v, format!("{}vf", ratio_tag(r)), format!("{r} V_F")))
            .collect(),
    };

    let runs: Vec<SweepRun> = sweep
        .par_iter()
        .map(|(omega, tag, title_omega)| -> Result<_> {
            let t_pi = std::f64::consts::PI * HBAR / (2.0 * omega);
            let t_max = cfg.drive.t_max_ps.unwrap_or(3.0 * t_pi);
            let drive = DriveSpec::resonant_rect((0..n).collect(), *omega, 0.0, t_max)?;
            let driven = DrivenChain::new(h_chain.clone(), &basis)?.with_drive(drive)?;
            let grid = time_grid(t_max, dt);
            let traj = propagate_driven(
                &driven,
                &psi0,
                &grid,
                dt,
                &[
                    ("P_ground".into(), Observable::Population(0)),
                    ("P_all_excited".into(), Observable::Population(all_excited)),
                ],
            )?;
            let ground = traj.series_named("P_ground").unwrap().values.clone();
            let excited = traj.series_named("P_all_excited").unwrap().values.clone();
            Ok(SweepRun {
                tag: tag.clone(),
                title_omega: title_omega.clone(),
                grid,
                ground,
                excited,
            })
        })
        .collect::<Result<_>>()?;

    for SweepRun {
        tag,
        title_omega,
        grid,
        ground,
        excited,
    } in &runs
    {
        let mut csv = String::from("t_ps,P_ground,P_all_excited\n");
        for ((t, g), e) in grid.iter().zip(ground).zip(excited) {
            let _ = writeln!(csv, "{t:.6},{g:.9},{e:.9}");
        }
        write_atomic(
            &out_dir.join(format!("fig3_omega_{tag}.csv")),
            csv.as_bytes(),
        )?;

        if cfg.output.plots {
            let ground_pts: Vec<(f64, f64)> =
                grid.iter().copied().zip(ground.iter().copied()).collect();
            let excited_pts: Vec<(f64, f64)> =
                grid.iter().copied().zip(excited.iter().copied()).collect();
            let title = format!("{n}-dot control chain, Omega = {title_omega}");
            let chart = LineChart {
                title: &title,
                x_label: "t_ps",
                y_label: "population",
                series: vec![
                    Series {
                        label: "P_ground",
                        points: &ground_pts,
                    },
                    Series {
                        label: "P_all_excited",
                        points: &excited_pts,
                    },
                ],
            };
            write_atomic(
                &out_dir.join(format!("fig3_omega_{tag}.svg")),
                chart.render().as_bytes(),
            )?;
        }
    }
    println!(
        "fig3: wrote {} sweep file(s) to {}",
        runs.len(),
        out_dir.display()
    );
    Ok(())
}

fn overlap_series(
    n_sites: usize,
    v: f64,
    shift: f64,
    t_max: f64,
    dt: f64,
) -> Result<(Vec<f64>, Vec<f64>, Option<crate::evolve::ResonancePoint>)> {
    let basis = BasisIndex::build(n_sites, Sector::Exactly(1))?;
    let chain = ChainSpec::uniform(n_sites, v)?;
    let h = chain_hamiltonian(&chain, &basis)?;
    let blocked = apply_block(&h, &basis, &BlockSpec::interior(n_sites, shift))?;
    let psi0 = StateVector::basis_state(&basis, 1)?;
    let grid = time_grid(t_max, dt);
    let traj = StaticPropagator::new(&blocked, &psi0)?
        .trajectory(&grid, &[("overlap".into(), Observable::OverlapWithInitial)])?;
    let values = traj.series_named("overlap").unwrap().values.clone();
    let minimum = match first_overlap_minimum(&traj) {
        Ok(point) => Some(point),
        Err(Error::NoMinimumFound(_)) => None,
        Err(e) => return Err(e),
    };
    Ok((grid, values, minimum))
}

/// Overlap of a blocked chain with its initial state: first-minimum value
/// against the shift ratio, plus the time evolution for two chain lengths.
pub fn cmd_fig4(cfg: &ScenarioConfig, out_dir: &Path) -> Result<()> {
    let v = cfg.chain.v_f_mev;
    let dt = cfg.blocking.dt_ps;
    let t_max = cfg.blocking.t_max_ps;
    let main_length = cfg.blocking.lengths[0];

    // Main panel: refined first-minimum overlap per ratio.
    let rows: Vec<(f64, Option<crate::evolve::ResonancePoint>)> = cfg
        .blocking
        .ratio_list
        .par_iter()
        .map(|&ratio| -> Result<_> {
            let (_, _, minimum) = overlap_series(main_length, v, ratio * v, t_max, dt)?;
            Ok((ratio, minimum))
        })
        .collect::<Result<_>>()?;

    let mut csv = String::from("ratio,overlap_at_ta\n");
    for (ratio, min) in &rows {
        match min {
            Some(point) => {
                let _ = writeln!(csv, "{ratio:.6},{:.9}", point.value);
            }
            None => {
                let _ = writeln!(csv, "{ratio:.6},no_minimum");
            }
        }
    }
    write_atomic(&out_dir.join("fig4_main.csv"), csv.as_bytes())?;

    // Inset: the overlap evolution at the reference ratio for each length.
    let inset: Vec<(usize, Vec<f64>, Vec<f64>)> = cfg
        .blocking
        .lengths
        .par_iter()
        .map(|&len| -> Result<_> {
            let (grid, values, _) = overlap_series(len, v, INSET_RATIO * v, t_max, dt)?;
            Ok((len, grid, values))
        })
        .collect::<Result<_>>()?;
    let grid = &inset[0].1;
    let mut inset_csv = String::from("t_ps");
    for (len, _, _) in &inset {
        let _ = write!(inset_csv, ",overlap_{len}_sites");
    }
    inset_csv.push('\n');
    for (k, t) in grid.iter().enumerate() {
        let _ = write!(inset_csv, "{t:.6}");
        for (_, _, values) in &inset {
            let _ = write!(inset_csv, ",{:.9}", values[k]);
        }
        inset_csv.push('\n');
    }
    write_atomic(&out_dir.join("fig4_inset.csv"), inset_csv.as_bytes())?;

    if cfg.output.plots {
        let main_pts: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|(r, m)| m.map(|point| (*r, point.value)))
            .collect();
        let chart = LineChart {
            title: "Blocked-bus overlap at the first minimum",
            x_label: "shift / coupling ratio",
            y_label: "overlap at t_a",
            series: vec![Series {
                label: "overlap_at_ta",
                points: &main_pts,
            }],
        };
        write_atomic(&out_dir.join("fig4_main.svg"), chart.render().as_bytes())?;

        let labels: Vec<String> = inset
            .iter()
            .map(|(len, _, _)| format!("{len} sites"))
            .collect();
        let pts: Vec<Vec<(f64, f64)>> = inset
            .iter()
            .map(|(_, grid, values)| grid.iter().copied().zip(values.iter().copied()).collect())
            .collect();
        let series = labels
            .iter()
            .zip(&pts)
            .map(|(label, points)| Series { label, points })
            .collect();
        let chart = LineChart {
            title: "Blocked-bus overlap evolution, ratio 20",
            x_label: "t_ps",
            y_label: "overlap",
            series,
        };
        write_atomic(&out_dir.join("fig4_inset.svg"), chart.render().as_bytes())?;
    }
    println!("fig4: wrote main panel and inset to {}", out_dir.display());
    Ok(())
}

/// First-resonance time and fidelity per chain length, with the 9-dot-bus
/// timing readings compared against the 10 ps claim. Returns `true` when
/// the claim is met by at least one reading.
pub fn cmd_transfer_scan(cfg: &ScenarioConfig, out_dir: &Path) -> Result<bool> {
    let v = cfg.chain.v_f_mev;
    let lengths: Vec<usize> = (cfg.chain.n_sites_min..=cfg.chain.n_sites_max).collect();
    let rows: Vec<(usize, f64, f64)> = lengths
        .par_iter()
        .map(|&n| -> Result<_> {
            let res = uniform_chain_first_resonance(n, v)?;
            Ok((n, res.time_ps, res.value))
        })
        .collect::<Result<_>>()?;

    let mut csv = String::from("n_sites,first_resonance_time_ps,fidelity\n");
    for (n, t, pop) in &rows {
        let _ = writeln!(csv, "{n},{t:.6},{:.9}", average_transfer_fidelity(*pop));
    }

    // Footnote: both readings of "a bus with 9 dots" (9 sites total, or
    // 9 bus dots plus the two end dots).
    let reading = |n: usize| rows.iter().find(|r| r.0 == n).map(|r| r.1);
    let t9 = reading(9).map_or_else(
        || uniform_chain_first_resonance(9, v).map(|r| r.time_ps),
        Ok,
    )?;
    let t11 = reading(11).map_or_else(
        || uniform_chain_first_resonance(11, v).map(|r| r.time_ps),
        Ok,
    )?;
    let within_claim = t9 < TRANSFER_CLAIM_PS || t11 < TRANSFER_CLAIM_PS;
    let _ = writeln!(csv, "# delivered population and amplitude per n_sites:");
    for (n, _, pop) in &rows {
        let _ = writeln!(
            csv,
            "#   n_sites = {n}: population = {pop:.6}, amplitude = {:.6}",
            pop.sqrt()
        );
    }
    let _ = writeln!(csv, "# nine_dot_bus_reading_9_sites_t_ps = {t9:.4}");
    let _ = writeln!(csv, "# nine_dot_bus_reading_11_sites_t_ps = {t11:.4}");
    let _ = writeln!(csv, "# claimed_transfer_time_ps < {TRANSFER_CLAIM_PS}");
    let _ = writeln!(
        csv,
        "# claim_met = {within_claim}{}",
        if within_claim {
            ""
        } else {
            " (flagged: neither reading beats the claim)"
        }
    );
    write_atomic(&out_dir.join("transfer_scan.csv"), csv.as_bytes())?;

    println!(
        "transfer-scan: 9-dot-bus readings {t9:.3} ps (9 sites) / {t11:.3} ps (11 sites) vs < {TRANSFER_CLAIM_PS} ps claim"
    );
    if !within_claim {
        println!("transfer-scan: claim not met at V_F = {v} meV; flagging with exit code 3");
    }
    Ok(within_claim)
}

fn options_from(cfg: &ScenarioConfig) -> Result<ProtocolOptions> {
    let p = &cfg.protocol;
    let bell_mode = match p.bell_mode.as_str() {
        "ideal" => BellMode::Ideal {
            duration_ps: p.bell_duration_ps,
        },
        "pulsed" => BellMode::Pulsed(gates::BellPrepSpec::new(
            p.bell_shift_mev,
            p.bell_pi2_rabi_mev,
            p.bell_cond_rabi_mev,
        )?),
        other => return Err(Error::Config(format!("unknown bell_mode '{other}'"))),
    };
    Ok(ProtocolOptions {
        ideal_controls: p.ideal_controls,
        explicit_blocking: p.explicit_blocking,
        bell_mode,
        control_rabi_mev: p.control_rabi_mev,
        swap_window_ps: p.swap_window_ps,
        strict_timing: p.strict_timing,
    })
}

/// Run the six-step distribution and emit the report.
pub fn cmd_distribute(cfg: &ScenarioConfig, out_dir: &Path, format: OutputFormat) -> Result<()> {
    let p = &cfg.protocol;
    let shift = p.shift_ratio * p.v_f_mev;
    let arm_a = ArmSpec::new(p.bus_length_a, p.v_f_mev, shift, p.gamma_per_ps)?;
    let arm_b = ArmSpec::new(p.bus_length_b, p.v_f_mev, shift, p.gamma_per_ps)?;
    let options = options_from(cfg)?;
    let report = run_distribution(&arm_a, &arm_b, &options)?;

    let text = report.to_report_text();
    let csv = format!(
        "{}\n{}\n",
        DistributionReport::csv_header(),
        report.csv_row()
    );
    write_atomic(&out_dir.join("distribute_report.txt"), text.as_bytes())?;
    write_atomic(&out_dir.join("distribute_report.csv"), csv.as_bytes())?;

    if cfg.output.trajectories {
        for (label, arm) in [('a', &arm_a), ('b', &arm_b)] {
            let transfer = crate::protocol::arm_transfer(arm)?;
            let mut buf = Vec::new();
            transfer.trajectory.write_csv(&mut buf)?;
            write_atomic(
                &out_dir.join(format!("distribute_arm_{label}_transfer.csv")),
                &buf,
            )?;
        }
    }

    match format {
        OutputFormat::Report => print!("{text}"),
        OutputFormat::Csv => print!("{csv}"),
    }
    Ok(())
}

fn check_line(out: &mut String, name: &str, err: f64, tol: f64) -> bool {
    let pass = err <= tol;
    let _ = writeln!(
        out,
        "{} {name}: max_error = {err:.3e} (tolerance {tol:.1e})",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

/// Gate-algebra identity checks with seeded random states. Returns `true`
/// when everything passes.
pub fn cmd_gates_check(seed: u64, corrupt_tolerance: bool) -> Result<bool> {
    // The corrupted tolerance is a testing hook: it forces every check to
    // fail so the nonzero exit path can be exercised.
    let scale = if corrupt_tolerance { 0.0 } else { 1.0 };
    let mut out = String::new();
    let _ = writeln!(out, "gate identity checks (seed = {seed})");
    let mut all_pass = true;

    let max_dev =
        |a: &CMatrix, b: &CMatrix| -> f64 { (a - b).iter().map(|x| x.norm()).fold(0.0, f64::max) };

    let h = gates::hadamard();
    all_pass &= check_line(
        &mut out,
        "hadamard_involution",
        max_dev(&h.dot(&h), &CMatrix::eye(2)),
        1e-12 * scale,
    );

    let p = gates::controlled_phase();
    all_pass &= check_line(
        &mut out,
        "controlled_phase_involution",
        max_dev(&p.array().dot(p.array()), &CMatrix::eye(4)),
        1e-12 * scale,
    );

    let mut cnot_err = 0.0_f64;
    for (c, t) in [(0usize, 1usize), (1, 0)] {
        let ht = gates::embed_single(&gates::hadamard(), t);
        let product = ht.dot(gates::controlled_phase().array()).dot(&ht);
        cnot_err = cnot_err.max(max_dev(&product, gates::cnot(c, t)?.array()));
    }
    all_pass &= check_line(&mut out, "cnot_equals_h_p_h", cnot_err, 1e-12 * scale);

    let bell = gates::bell_prepare_ideal();
    let ideal: CVector = ndarray::array![
        num_complex::Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        num_complex::Complex64::new(0.0, 0.0),
        num_complex::Complex64::new(0.0, 0.0),
        num_complex::Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
    ];
    let bell_err: f64 = bell
        .amplitudes()
        .iter()
        .zip(ideal.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    all_pass &= check_line(
        &mut out,
        "bell_preparation_amplitudes",
        bell_err,
        1e-12 * scale,
    );

    // Randomized storage-swap contract: S(|psi> ⊗ |0>) = |0> ⊗ |psi> up to a
    // global phase, over 1000 seeded states.
    let s = gates::swap_in_sequence();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut swap_err = 0.0_f64;
    for _ in 0..1000 {
        let theta: f64 = rng.random::<f64>() * std::f64::consts::PI;
        let phi: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        let a = num_complex::Complex64::new((theta / 2.0).cos(), 0.0);
        let b = num_complex::Complex64::new(0.0, phi).exp() * (theta / 2.0).sin();
        let mut input = CVector::zeros(4);
        input[0] = a;
        input[1] = b;
        let got = s.apply(&input);
        let mut expect = CVector::zeros(4);
        expect[0] = a;
        expect[2] = b;
        let z: num_complex::Complex64 = expect
            .iter()
            .zip(got.iter())
            .map(|(e, o)| e.conj() * o)
            .sum();
        let phase = if z.norm() > 0.0 {
            z / z.norm()
        } else {
            num_complex::Complex64::new(1.0, 0.0)
        };
        let err = got
            .iter()
            .zip(expect.iter())
            .map(|(o, e)| (o - e * phase).norm())
            .fold(0.0, f64::max);
        swap_err = swap_err.max(err);
    }
    all_pass &= check_line(
        &mut out,
        "swap_in_thousand_random_states",
        swap_err,
        1e-10 * scale,
    );

    let gram = |u: &CMatrix| max_dev(&u.t().mapv(|x| x.conj()).dot(u), &CMatrix::eye(u.nrows()));
    let unitarity = gram(p.array()).max(gram(s.array())).max(gram(&h));
    all_pass &= check_line(&mut out, "gate_unitarity", unitarity, 1e-12 * scale);

    let _ = writeln!(
        out,
        "result: {}",
        if all_pass {
            "all checks passed"
        } else {
            "FAILURES present"
        }
    );
    print!("{out}");
    Ok(all_pass)
}
