//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vha_core::ansatz::{compile, CompiledAnsatz, VhaAnsatz};
use vha_core::descent::{run_descent, DescentConfig};
use vha_core::experiment::{build_hubbard_scenario, build_simple_scenario, run_suite, Problem, ScenarioConfig};
use vha_core::gradient::{
    finite_difference_gradient, parameter_shift_gradient, trig_form_probe, EnergyEvaluator, EvaluatorConfig,
    GradientMethod,
};
use vha_core::hubbard::{build_hubbard, noninteracting_ground_state, HubbardSpec};
use vha_core::pauli::PauliString;
use vha_core::sim::{
    run_noisy, run_pure, sample_expectation, schedule, DensityMatrix, DepolarizingChannel, Gate, NoiseModel,
    StateVector,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn exact(p: &Problem) -> EnergyEvaluator {
    p.evaluator(EvaluatorConfig::exact()).expect("exact evaluator")
}

fn simple_exactness() -> Outcome {
    let start = Instant::now();
    let mut ev = exact(&build_simple_scenario());
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let theta = rng.gen_range(-2.0 * PI..2.0 * PI);
        worst = worst.max((ev.evaluate_energy(&[theta]).unwrap() - theta.cos()).abs());
    }
    let at_pi = ev.evaluate_energy(&[PI]).unwrap();
    let grid_min = (0..=1000)
        .map(|k| ev.evaluate_energy(&[2.0 * PI * k as f64 / 1000.0]).unwrap())
        .fold(f64::INFINITY, f64::min);
    let elapsed = start.elapsed();
    check(
        worst < 1e-12 && (at_pi + 1.0).abs() < 1e-12 && grid_min >= -1.0 - 1e-12 && elapsed < Duration::from_secs(1),
        format!("max |E - cos| = {worst:.1e}, E(pi) = {at_pi}, grid min = {grid_min}, {elapsed:.2?}"),
    )
}

fn hubbard_exact(m: usize, reps: usize) -> EnergyEvaluator {
    let spec = HubbardSpec::half_filled_ring(m, 1.0, 1.0);
    let d = build_hubbard(&spec).unwrap();
    let c = compile(&VhaAnsatz::new(d.clone(), reps).unwrap()).unwrap();
    EnergyEvaluator::new(
        Arc::new(c),
        d.full(),
        noninteracting_ground_state(&spec).unwrap(),
        EvaluatorConfig::exact(),
    )
    .unwrap()
}

fn parameter_shift_exactness() -> Outcome {
    let start = Instant::now();
    let mut ev = exact(&build_simple_scenario());
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut simple_err: f64 = 0.0;
    for _ in 0..100 {
        let theta = rng.gen_range(-2.0 * PI..2.0 * PI);
        let g = parameter_shift_gradient(&mut ev, &[theta], false).unwrap().gradient[0];
        simple_err = simple_err.max((g + theta.sin()).abs());
    }
    let mut hubbard_err = Vec::new();
    for (m, reps) in [(2, 1), (6, 2)] {
        let mut ev = hubbard_exact(m, reps);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let theta: Vec<f64> = (0..ev.n_params()).map(|_| rng.gen_range(-PI..PI)).collect();
            let ps = parameter_shift_gradient(&mut ev, &theta, false).unwrap().gradient;
            for (i, g) in ps.iter().enumerate() {
                let h = 1e-6;
                let mut p = theta.clone();
                let mut q = theta.clone();
                p[i] += h;
                q[i] -= h;
                let cd = (ev.evaluate_energy(&p).unwrap() - ev.evaluate_energy(&q).unwrap()) / (2.0 * h);
                worst = worst.max((g - cd).abs());
            }
        }
        hubbard_err.push(worst);
    }
    let elapsed = start.elapsed();
    check(
        simple_err < 1e-12 && hubbard_err.iter().all(|&e| e < 1e-5) && elapsed < Duration::from_secs(60),
        format!(
            "simple max err {simple_err:.1e}; vs central differences: 2-site {:.1e}, 6-site {:.1e}; {elapsed:.2?}",
            hubbard_err[0], hubbard_err[1]
        ),
    )
}

fn finite_difference_bias() -> Outcome {
    let mut ev = exact(&build_simple_scenario());
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut violations = 0;
    let mut mean = [0.0; 3];
    for _ in 0..50 {
        let theta = rng.gen_range(-PI..PI);
        let errs: Vec<f64> = [0.2, 0.05, 0.02]
            .iter()
            .map(|&eps| (finite_difference_gradient(&mut ev, &[theta], eps).unwrap().gradient[0] + theta.sin()).abs())
            .collect();
        if !(errs[0] > errs[1] && errs[1] > errs[2]) {
            violations += 1;
        }
        mean.iter_mut().zip(&errs).for_each(|(m, e)| *m += e / 50.0);
    }
    check(
        violations == 0,
        format!(
            "mean |error| at eps 0.2/0.05/0.02: {:.2e}/{:.2e}/{:.2e}, {violations} non-monotone points of 50",
            mean[0], mean[1], mean[2]
        ),
    )
}

fn two_site_convergence() -> Outcome {
    let start = Instant::now();
    let p = build_hubbard_scenario(2, 1, None).unwrap();
    let e_exact = p.exact_ground.unwrap();
    let mut ev = exact(&p);
    let config = DescentConfig {
        eta: 0.1,
        iterations: 200,
        method: GradientMethod::ParameterShift,
        theta0: vec![0.1, 0.1],
    };
    let rec = run_descent(&mut ev, &config, e_exact).unwrap();
    let dev = (rec.final_row().unwrap().energy - e_exact).abs();
    let elapsed = start.elapsed();
    check(
        dev <= 1e-6 && elapsed < Duration::from_secs(10),
        format!("E_exact = {e_exact:.12}, |E_200 - E_exact| = {dev:.2e}, {elapsed:.2?}"),
    )
}

fn six_site_convergence() -> Outcome {
    let start = Instant::now();
    let p = build_hubbard_scenario(6, 2, None).unwrap();
    let reference_time = start.elapsed();
    let mut ev = exact(&p);
    let config = DescentConfig {
        eta: 0.03,
        iterations: 50,
        method: GradientMethod::ParameterShift,
        theta0: vec![0.1; 6],
    };
    let rec = run_descent(&mut ev, &config, p.e_ref).unwrap();
    let last = rec.final_row().unwrap();
    let rel = last.rel_dev.unwrap();
    let monotone = rec.rows.windows(2).all(|w| w[1].energy <= w[0].energy + 1e-12);
    let floor = p.exact_ground.unwrap();
    let above_floor = rec.rows.iter().all(|r| r.energy >= floor - 1e-9);
    let elapsed = start.elapsed();
    check(
        rel <= 5e-3 && monotone && above_floor && elapsed < Duration::from_secs(600),
        format!(
            "ansatz optimum {:.6} (exact {floor:.6}), E_50 = {:.6}, relative deviation {rel:.2e}, monotone {monotone}; \
             reference search {reference_time:.1?}, total {elapsed:.1?}",
            p.e_ref, last.energy
        ),
    )
}

fn random_circuit_gates(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<Gate> {
    (0..count)
        .map(|_| {
            let q = rng.gen_range(0..n);
            let angle = rng.gen_range(-PI..PI);
            match rng.gen_range(0..7) {
                0 => Gate::Rx { qubit: q, angle },
                1 => Gate::Ry { qubit: q, angle },
                2 => Gate::Rz { qubit: q, angle },
                3 => Gate::H(q),
                4 => Gate::X(q),
                k => {
                    let mut t = rng.gen_range(0..n - 1);
                    if t >= q {
                        t += 1;
                    }
                    if k == 5 {
                        Gate::Cnot { control: q, target: t }
                    } else {
                        Gate::Cz(q, t)
                    }
                }
            }
        })
        .collect()
}

fn noise_channel_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut completeness: f64 = 0.0;
    for k in 0..100 {
        let gamma = if k == 0 {
            0.0
        } else {
            10f64.powf(rng.gen_range(-6.0..1.5))
        };
        let m = NoiseModel::new(gamma).unwrap().channel().completeness();
        for (i, row) in m.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let id = if i == j { 1.0 } else { 0.0 };
                completeness = completeness.max((v - Complex64::new(id, 0.0)).norm());
            }
        }
    }
    let mut pure_vs_noisy: f64 = 0.0;
    for _ in 0..50 {
        let gates = random_circuit_gates(&mut rng, 4, 30);
        let circuit = schedule(4, &gates).unwrap();
        let init = StateVector::zero(4);
        let psi = run_pure(&circuit, &init).unwrap();
        let rho = run_noisy(
            &circuit,
            &DensityMatrix::from_pure(&init),
            &NoiseModel::new(0.0).unwrap(),
        )
        .unwrap();
        let dim = psi.dim();
        let amps = psi.amplitudes();
        for r in 0..dim {
            for c in 0..dim {
                pure_vs_noisy = pure_vs_noisy.max((rho.get(r, c) - amps[r] * amps[c].conj()).norm());
            }
        }
    }
    let mut full: f64 = 0.0;
    let channel = DepolarizingChannel::new(1.0).unwrap();
    for gates in [
        vec![],
        vec![Gate::H(0)],
        vec![Gate::Ry { qubit: 0, angle: 0.7 }, Gate::Rz { qubit: 0, angle: 1.9 }],
    ] {
        let mut rho = DensityMatrix::from_pure(&StateVector::zero(1));
        for g in &gates {
            rho.apply_gate(g).unwrap();
        }
        channel.apply(&mut rho, 0);
        for r in 0..2 {
            for c in 0..2 {
                let target = if r == c { 0.5 } else { 0.0 };
                full = full.max((rho.get(r, c) - Complex64::new(target, 0.0)).norm());
            }
        }
    }
    check(
        completeness < 1e-12 && pure_vs_noisy < 1e-10 && full < 1e-12,
        format!("completeness err {completeness:.1e}; gamma=0 vs pure {pure_vs_noisy:.1e}; Gamma=1 vs I/2 {full:.1e}"),
    )
}

fn shot_noise_statistics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let gates = random_circuit_gates(&mut rng, 3, 20);
    let psi = run_pure(&schedule(3, &gates).unwrap(), &StateVector::zero(3)).unwrap();
    let term = PauliString::parse(1.0, "X0 Y1 Z2").unwrap();
    let exact = term.expectation_pure(&psi);
    let sigma = (1.0 - exact * exact).sqrt();
    let estimates = |shots: usize, seed: u64| -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..200)
            .map(|_| sample_expectation(&psi, &term, shots, &mut rng).unwrap())
            .collect()
    };
    let stats = |v: &[f64]| {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
        (mean, var)
    };
    let (mean_n, var_n) = stats(&estimates(1000, 1));
    let (_, var_4n) = stats(&estimates(4000, 2));
    let bias = (mean_n - exact).abs();
    let bound = 4.0 * sigma / 200f64.sqrt();
    let tight = 4.0 * sigma / (200.0 * 1000f64).sqrt();
    let ratio = var_n / var_4n;
    check(
        bias < bound && (3.0..=5.0).contains(&ratio),
        format!(
            "<P> = {exact:.4}, |mean - <P>| = {bias:.2e} (bound {bound:.2e}, per-shot bound {tight:.2e}), \
             var(N)/var(4N) = {ratio:.2}"
        ),
    )
}

fn count_accounting() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for m in [2, 4, 6] {
        for reps in [1, 2] {
            let spec = HubbardSpec {
                orbitals: (m == 4).then(|| vec![0, 1]),
                ..HubbardSpec::half_filled_ring(m, 1.0, 1.0)
            };
            let d = build_hubbard(&spec).unwrap();
            let c: CompiledAnsatz = compile(&VhaAnsatz::new(d.clone(), reps).unwrap()).unwrap();
            let counts = c.count_report();
            let mut ev = EnergyEvaluator::new(
                Arc::new(c),
                d.full(),
                noninteracting_ground_state(&spec).unwrap(),
                EvaluatorConfig::exact(),
            )
            .unwrap();
            let theta = vec![0.1; ev.n_params()];
            let fd = finite_difference_gradient(&mut ev, &theta, 0.05)
                .unwrap()
                .circuit_evaluations;
            let ps = parameter_shift_gradient(&mut ev, &theta, true)
                .unwrap()
                .circuit_evaluations;
            let p = counts.params_per_rep;
            let g = counts.param_gates;
            ok &= fd == reps * p + 1 && ps == 2 * g + 1 && counts.n_fd() == fd && counts.n_ps() == ps;
            if reps == 1 {
                ok &= p == if m == 2 { 2 } else { 3 };
            }
            if m == 2 {
                ok &= fd == if reps == 1 { 3 } else { 5 };
            }
            lines.push(format!("M{m}R{reps}: P={p} G={g} N_fd={fd} N_ps={ps}"));
        }
    }
    check(ok, lines.join(", "))
}

fn trig_form() -> Outcome {
    let mut ev = hubbard_exact(2, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let n_gates = ev.ansatz().n_param_gates();
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let theta: Vec<f64> = (0..ev.n_params()).map(|_| rng.gen_range(-PI..PI)).collect();
        let g = rng.gen_range(0..n_gates);
        worst = worst.max(trig_form_probe(&mut ev, &theta, g, 8).unwrap().residual);
    }
    check(
        worst < 1e-10,
        format!("max fit residual {worst:.1e} over 10 gates of {n_gates}"),
    )
}

fn noise_amplification() -> Outcome {
    let scenario = serde_json::json!({
        "scenario": "simple",
        "method": ["fd:0.02", "ps"],
        "shots": 50000,
        "runs": 5,
        "eta": 0.5,
        "iterations": 50,
        "seed": 20210601u64,
    });
    let scenario: ScenarioConfig = serde_json::from_value(scenario).unwrap();
    let scenario = scenario.resolve().unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let report = run_suite(&scenario, tmp.path(), 8, &mut |_| {}).unwrap();
    let width = |i: usize| report.cells[i].envelope.as_ref().and_then(|e| e.mean_width(30, 50));
    match (width(0), width(1)) {
        (Some(fd), Some(ps)) => check(
            fd > ps,
            format!("mean envelope width over iterations 30-50: fd(0.02) {fd:.2e}, ps {ps:.2e}"),
        ),
        _ => Err(format!(
            "suite incomplete: {:?}",
            report.cells.iter().map(|c| &c.errors).collect::<Vec<_>>()
        )),
    }
}

fn run_cli(out: &Path, args: &[&str]) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_vha-lab"))
        .args(args)
        .arg("--quiet")
        .arg("--out")
        .arg(out)
        .env_remove("VHA_LAB_DENSITY_CAP")
        .output()
        .map_err(|e| e.to_string())?;
    if status.status.code() != Some(0) {
        return Err(format!(
            "{args:?} exited with {:?}: {}",
            status.status.code(),
            String::from_utf8_lossy(&status.stderr)
        ));
    }
    Ok(())
}

fn count_csv_rows(path: &Path) -> Result<usize, String> {
    let mut r = csv::Reader::from_path(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(r.records().count())
}

fn full_pipelines() -> Outcome {
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path();
    let runs = [
        ("simple", vec!["--scenario", "simple"], 4usize, 1usize),
        ("hubbard-m2-r1", vec!["--scenario", "hubbard", "--sites", "2"], 4, 1),
        (
            "simple",
            vec!["--scenario", "simple", "--gamma", "1e-4", "--gamma", "1e-3"],
            4,
            2,
        ),
        (
            "hubbard-m2-r1",
            vec![
                "--scenario",
                "hubbard",
                "--sites",
                "2",
                "--gamma",
                "1e-4",
                "--gamma",
                "1e-3",
            ],
            4,
            2,
        ),
    ];
    let mut cells = 0;
    for (name, args, methods, gammas) in &runs {
        run_cli(out, args)?;
        let dir = out.join(name);
        let manifest = std::fs::read_to_string(dir.join("manifest.json")).map_err(|e| e.to_string())?;
        let manifest: serde_json::Value = serde_json::from_str(&manifest).map_err(|e| e.to_string())?;
        let listed = manifest["cells"].as_array().map_or(0, |c| c.len());
        if listed != methods * gammas {
            return Err(format!("{name}: manifest lists {listed} cells"));
        }
        for cell in manifest["cells"].as_array().unwrap() {
            let cell_dir = dir.join(cell["dir"].as_str().unwrap());
            let rows = count_csv_rows(&cell_dir.join("runs.csv"))?;
            let env = count_csv_rows(&cell_dir.join("envelope.csv"))?;
            if cell["status"] != "ok" || rows != 6 * 51 || env != 51 {
                return Err(format!(
                    "{}: status {}, {rows} run rows, {env} envelope rows",
                    cell_dir.display(),
                    cell["status"]
                ));
            }
            cells += 1;
        }
    }
    let rejected = Command::new(env!("CARGO_BIN_EXE_vha-lab"))
        .args([
            "--scenario",
            "hubbard",
            "--sites",
            "6",
            "--gamma",
            "1e-3",
            "--quiet",
            "--out",
        ])
        .arg(out)
        .env_remove("VHA_LAB_DENSITY_CAP")
        .output()
        .map_err(|e| e.to_string())?
        .status;
    let elapsed = start.elapsed();
    check(
        rejected.code() == Some(1) && elapsed < Duration::from_secs(900),
        format!(
            "{cells} cells written (noiseless + 5 seeded runs each), noisy 6-site request exit {:?}, {elapsed:.1?}",
            rejected.code()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("simple-circuit exactness", simple_exactness),
        ("parameter-shift exactness", parameter_shift_exactness),
        ("finite-difference bias ordering", finite_difference_bias),
        ("2-site convergence", two_site_convergence),
        ("6-site convergence scale", six_site_convergence),
        ("noise-channel algebra", noise_channel_algebra),
        ("shot-noise statistics", shot_noise_statistics),
        ("count accounting", count_accounting),
        ("trig-form property", trig_form),
        ("noise amplification (fd vs ps envelopes)", noise_amplification),
        ("full CLI pipelines", full_pipelines),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
