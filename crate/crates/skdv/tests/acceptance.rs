//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::path::Path;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use skdv::{run, Experiment, ExperimentConfig, RunOptions, RunOutcome};
use skdv_core::duhamel::inflation_experiment;
use skdv_core::estimates::{counterexample_family, EstimateCase, EstimateKind, Resolution};
use skdv_core::invariants::{EnergyVariant, FunctionalReport};
use skdv_core::propagators::{evolve, SolverConfig, SystemParams, SystemState};
use skdv_core::spectral::{multiplier_equivalence_check, ComplexField, Grid, MultiplierSpec, RealField, SpectralField};

struct Verdict {
    pass: bool,
    detail: String,
}

fn harness(experiment: Experiment, text: &str, out: &Path) -> RunOutcome {
    let cfg = ExperimentConfig::parse(text, Some(experiment)).expect("acceptance config is valid");
    let opts = RunOptions {
        out_dir: Some(out.to_path_buf()),
        ..Default::default()
    };
    run(&cfg, &opts).expect("run completes")
}

fn check(outcome: &RunOutcome, name: &str) -> f64 {
    outcome
        .checks
        .iter()
        .find(|c| c.name == name)
        .unwrap_or_else(|| panic!("missing check {name}"))
        .value
}

fn gaussian_state(grid: Grid, amp: f64) -> SystemState {
    let u = ComplexField::from_fn(grid, |x| Complex64::new(amp * (-0.5 * x * x).exp(), 0.0));
    let v = RealField::from_fn(grid, |x| 0.5 * amp * (-0.5 * (x - 1.0).powi(2)).exp());
    SystemState::new(u, v, 0.0).unwrap()
}

fn crit1(dir: &Path) -> Verdict {
    let cfg = "grid.nx = 512\ngrid.L = 32pi\ntime.dt = 1e-3\ntime.T = 5\ntime.record_every = 100\n\
               params.alpha = 1\nparams.beta = 1\nparams.gamma = 1\ndata.profile = gaussian\n";
    let o = harness(Experiment::Simulate, cfg, dir);
    let drift = check(&o, "mass_relative_drift");
    Verdict {
        pass: drift < 1e-8,
        detail: format!("relative mass drift {drift:.3e} (< 1e-8)"),
    }
}

fn crit2() -> Verdict {
    let grid = Grid::new(128, 8.0 * std::f64::consts::PI).unwrap();
    let p = SystemParams::couplings(1.0, 1.0, 1.0).unwrap();
    let data = gaussian_state(grid, 1.0);
    let horizon = 1.0;
    let dt = 0.02;
    let terminal = |h: f64| {
        let cfg = SolverConfig::new(h, true, usize::MAX).unwrap();
        evolve(&data, horizon, &cfg, &p, &[]).unwrap().last().clone()
    };
    let reference = terminal(dt / 8.0);
    let error = |s: &SystemState| {
        let du = s
            .u
            .values()
            .iter()
            .zip(reference.u.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let dv = s
            .v
            .values()
            .iter()
            .zip(reference.v.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        du.max(dv)
    };
    let e1 = error(&terminal(dt));
    let e2 = error(&terminal(dt / 2.0));
    let ratio = e1 / e2;
    Verdict {
        pass: (12.0..=20.0).contains(&ratio),
        detail: format!("err(dt) = {e1:.3e}, err(dt/2) = {e2:.3e}, ratio {ratio:.2} (in [12, 20])"),
    }
}

fn crit3() -> Verdict {
    let grid = Grid::new(512, 16.0 * std::f64::consts::PI).unwrap();
    let p = SystemParams::couplings(1.0, 1.0, 1.0).unwrap();
    let data = gaussian_state(grid, 1.0);
    let cfg = SolverConfig::new(1e-4, true, 100).unwrap();
    let traj = evolve(&data, 1.0, &cfg, &p, &[]).unwrap();
    let m = MultiplierSpec::identity_on(&grid, 0.5).unwrap();
    let drift = |v| FunctionalReport::from_trajectory(&traj, &p, &m, v).unwrap();
    let u4 = drift(EnergyVariant::U4);
    let v4 = drift(EnergyVariant::V4);
    let dl = u4.max_drift_l();
    let (de_u4, de_v4) = (u4.max_drift_e(), v4.max_drift_e());
    let conserved: Vec<EnergyVariant> = [(EnergyVariant::U4, de_u4), (EnergyVariant::V4, de_v4)]
        .into_iter()
        .filter(|(_, d)| *d < 1e-6)
        .map(|(v, _)| v)
        .collect();
    let pass = dl < 1e-8 && conserved == [EnergyVariant::default()];
    Verdict {
        pass,
        detail: format!(
            "drift L {dl:.2e}; drift E: U4 {de_u4:.2e}, V4 {de_v4:.2e}; conserved {conserved:?}, default {:?}",
            EnergyVariant::default()
        ),
    }
}

fn crit4() -> Verdict {
    let grid = Grid::new(1024, 4.0 * std::f64::consts::PI).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut lo_min, mut hi_max) = (f64::INFINITY, 0.0f64);
    for _ in 0..200 {
        let band = rng.random_range(8.0..120.0);
        let decay = rng.random_range(0.0..2.0);
        let spec: Vec<Complex64> = (0..grid.nx())
            .map(|j| {
                let xi = grid.xi(j).abs();
                if xi > band || !grid.keeps_mode(j) {
                    return Complex64::new(0.0, 0.0);
                }
                let g = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                g * (1.0 + xi).powf(-decay)
            })
            .collect();
        let f = ComplexField::from_spectrum(grid, spec);
        for n in [16.0, 64.0] {
            let m = MultiplierSpec::new(n, 0.6).unwrap();
            let (lo, hi) = multiplier_equivalence_check(&f, &m).unwrap();
            lo_min = lo_min.min(lo);
            hi_max = hi_max.max(hi);
        }
    }
    Verdict {
        pass: lo_min >= 1.0 && hi_max <= 2.0,
        detail: format!("min lower ratio {lo_min:.4} (>= 1), max upper ratio {hi_max:.4} (<= 2)"),
    }
}

fn crit5(dir: &Path) -> Verdict {
    let o = harness(Experiment::Inflate, "params.s = 0\nparams.l = 1\n", dir);
    let (slope, kdv, phase) = (check(&o, "slope"), check(&o, "kdv_slope"), check(&o, "min_phase_real_part"));
    Verdict {
        pass: (0.7..=1.3).contains(&slope) && kdv <= -2.5 && phase > 0.5,
        detail: format!("slope {slope:.4} (in [0.7, 1.3]), KdV slope {kdv:.3} (<= -2.5), min Re phase {phase:.5} (> 0.5)"),
    }
}

fn crit6() -> Verdict {
    let p = SystemParams::couplings(1.0, 1.0, 1.0).unwrap();
    let n_list = [32.0, 64.0, 128.0, 256.0, 512.0];
    let r = inflation_experiment(-0.125, 0.0, &n_list, 1e-2, 6, Default::default(), &p).unwrap();
    let slope = r.fit.slope;
    Verdict {
        pass: (0.2..=0.8).contains(&slope),
        detail: format!("slope {slope:.4} +- {:.1e} (in [0.2, 0.8])", r.fit.stderr),
    }
}

fn crit7(dir: &Path) -> Verdict {
    let cfg = "grid.nx = 128\ngrid.L = 8pi\ntime.delta = 0.25\ndata.scale = 1e-2\n\
               picard.iterations = 8\npicard.nt = 256\npicard.substeps = 4\n";
    let o = harness(Experiment::Picard, cfg, dir);
    let d = check(&o, "picard_solver_diff");
    Verdict {
        pass: d < 1e-6,
        detail: format!("sup |Picard_8 - solver| on [0, delta] = {d:.3e} (< 1e-6)"),
    }
}

fn crit8(dir: &Path) -> Verdict {
    let cfg = "params.s = 0\nparams.l = -0.5\ngrid.L = 4pi\nseed = 7\nestimates.nx = 128,256,512\n\
               estimates.members = 50\nestimates.nt = 128\nestimates.horizon = 2\nestimates.xi_max = 3\n";
    let o = harness(Experiment::Estimates, cfg, dir);
    let spreads: Vec<f64> = ["kdv-output", "schrodinger-product"]
        .iter()
        .map(|k| check(&o, &format!("{k}_resolution_spread")))
        .collect();
    let res = Resolution {
        nx: 128,
        nt: 128,
        half_length: 4.0 * std::f64::consts::PI,
        horizon: 2.0,
    };
    let case = EstimateCase::new(EstimateKind::KdvOutput, 0.0, 1.0, res);
    let ratios: Vec<f64> = [32.0, 64.0, 128.0, 256.0, 512.0]
        .iter()
        .map(|&n| counterexample_family(n, &case, 64).unwrap().ratio)
        .collect();
    let growth = ratios.windows(2).map(|w| w[1] / w[0]).fold(f64::INFINITY, f64::min);
    Verdict {
        pass: spreads.iter().all(|&s| s < 2.0) && growth >= 1.5,
        detail: format!(
            "ensemble max-ratio spread across nx: kdv-output {:.4}, schrodinger-product {:.4} (< 2); \
             counterexample min growth per doubling {growth:.3} (>= 1.5)",
            spreads[0], spreads[1]
        ),
    }
}

fn crit9(dir: &Path) -> Verdict {
    let cfg = "grid.nx = 1024\ngrid.L = 4pi\ntime.dt = 2e-6\ntime.delta = 0.1\ntime.record_every = 500\n\
               params.alpha = 1\nparams.beta = 0\nparams.gamma = 1\nparams.s = 0.6\n\
               data.profile = kink\ndata.u_re = 1\ndata.u_im = 0.3\ndata.v_amp = 0.5\ndata.v_shift = 1\n\
               data.project = true\nmultiplier.N = 8,16,32,64\n";
    let o = harness(Experiment::Invariants, cfg, dir);
    let worst = check(&o, "drift_e_growth_between_cutoffs");
    let drifts: Vec<String> = o.summary["result"]["cutoffs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| format!("{:.2e}", c["max_drift_E"].as_f64().unwrap()))
        .collect();
    Verdict {
        pass: worst <= 1.5,
        detail: format!("drift_E at N = 8..64: [{}], worst growth {worst:.3} (<= 1.5)", drifts.join(", ")),
    }
}

fn csv_bodies(o: &RunOutcome) -> Vec<(String, Vec<u8>)> {
    o.outputs
        .files
        .iter()
        .filter(|(n, _)| n.ends_with(".csv"))
        .cloned()
        .collect()
}

fn crit10(dir: &Path) -> Verdict {
    let cases = [
        (
            Experiment::Estimates,
            "seed = 3\ngrid.L = 4pi\ngrid.nx = 128\nestimates.members = 8\nestimates.nt = 64\n\
             estimates.counterexample_N = 32,64,128\n",
        ),
        (Experiment::Simulate, "grid.nx = 128\ntime.T = 0.2\n"),
        (Experiment::Picard, "grid.nx = 64\npicard.nt = 64\ndata.scale = 0.1\n"),
        (Experiment::Inflate, "params.l = 1\ninflation.N = 32,64,128\ninflation.quad_xi = 32\ninflation.quad_xi2 = 32\n"),
        (Experiment::Invariants, "grid.nx = 128\ntime.delta = 0.05\nmultiplier.N = 2,4\nparams.s = 0.5\n"),
    ];
    let mut mismatches = Vec::new();
    for (i, (e, text)) in cases.iter().enumerate() {
        let cfg = ExperimentConfig::parse(text, Some(*e)).unwrap();
        let runs: Vec<Vec<(String, Vec<u8>)>> = [None, Some(1), Some(4)]
            .iter()
            .enumerate()
            .map(|(j, &threads)| {
                let opts = RunOptions {
                    out_dir: Some(dir.join(format!("{i}-{j}"))),
                    threads,
                    assert: false,
                };
                csv_bodies(&run(&cfg, &opts).unwrap())
            })
            .collect();
        if runs.iter().any(|r| *r != runs[0]) || runs[0].is_empty() {
            mismatches.push(e.name());
        }
    }
    Verdict {
        pass: mismatches.is_empty(),
        detail: format!("CSV bodies byte-identical over 3 runs (default, 1 and 4 threads) of 5 experiments; mismatches {mismatches:?}"),
    }
}

fn main() {
    // Accept and ignore the libtest arguments cargo passes.
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let tmp = tempfile::tempdir().expect("temporary directory");
    let d = |name: &str| tmp.path().join(name);
    type Criterion<'a> = (u32, &'a str, u64, Box<dyn Fn() -> Verdict + 'a>);
    let criteria: Vec<Criterion> = vec![
        (1, "mass conservation", 30, Box::new(|| crit1(&d("c1")))),
        (2, "solver order", 60, Box::new(crit2)),
        (3, "exact invariants at m = 1", 120, Box::new(crit3)),
        (4, "multiplier equivalence", 10, Box::new(crit4)),
        (5, "norm-inflation exponent (0, 1)", 300, Box::new(|| crit5(&d("c5")))),
        (6, "norm-inflation exponent (-1/8, 0)", 300, Box::new(crit6)),
        (7, "Picard-solver agreement", 120, Box::new(|| crit7(&d("c7")))),
        (8, "bilinear estimate evidence", 300, Box::new(|| crit8(&d("c8")))),
        (9, "almost-conservation trend", 180, Box::new(|| crit9(&d("c9")))),
        (10, "determinism", 300, Box::new(|| crit10(&d("c10")))),
    ];
    let mut failed = 0;
    for (id, name, budget, f) in &criteria {
        if !filter.is_empty() && !filter.iter().any(|s| *s == id.to_string()) {
            continue;
        }
        let start = Instant::now();
        let v = f();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*budget);
        let pass = v.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {id} ({name}): {}; {:.1} s (budget {budget} s)",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
