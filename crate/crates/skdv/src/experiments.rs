//! One function per experiment; each fills its report tables and checks.

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use skdv_core::duhamel::{inflation_experiment, picard_contraction_probe, picard_map, PicardIterate};
use skdv_core::estimates::{counterexample_family, random_ensemble, EstimateCase, EstimateKind, Resolution};
use skdv_core::fit::fit_loglog;
use skdv_core::invariants::{almost_conservation_run, mass, FunctionalReport};
use skdv_core::propagators::{evolve, write_state_csv, SolverConfig, SystemState, Trajectory};
use skdv_core::spectral::{Grid, MultiplierSpec};

use crate::config::ExperimentConfig;
use crate::data::{initial_fields, initial_state};
use crate::error::{HarnessError, Result};
use crate::report::{Outputs, COUNTEREXAMPLE, ESTIMATES, FUNCTIONALS, INFLATION, PICARD, PROBE, STATE};

/// One acceptance band evaluated after a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub band: String,
    pub pass: bool,
}

impl Check {
    fn below(name: &str, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            band: format!("< {bound:e}"),
            pass: value < bound,
        }
    }
}

/// Tables, summary and checks of one experiment.
pub struct ExperimentOutput {
    pub outputs: Outputs,
    pub summary: Value,
    pub checks: Vec<Check>,
}

fn grid_of(cfg: &ExperimentConfig) -> Result<Grid> {
    Grid::new(cfg.nx, cfg.half_length).map_err(|e| HarnessError::from_core("grid", e))
}

fn solver_of(cfg: &ExperimentConfig) -> Result<SolverConfig> {
    SolverConfig::new(cfg.dt, cfg.dealias, cfg.record_every).map_err(|e| HarnessError::from_core("time", e))
}

fn evolve_or_blow_up(
    data: &SystemState,
    horizon: f64,
    solver: &SolverConfig,
    cfg: &ExperimentConfig,
) -> Result<Trajectory> {
    evolve(data, horizon, solver, &cfg.params, &[]).map_err(|e| HarnessError::from_core("time", e.error))
}

#[derive(Serialize)]
struct FunctionalRow {
    t: f64,
    #[serde(rename = "M")]
    m: f64,
    #[serde(rename = "L")]
    l: f64,
    #[serde(rename = "E")]
    e: f64,
    #[serde(rename = "driftL")]
    drift_l: f64,
    #[serde(rename = "driftE")]
    drift_e: f64,
    #[serde(rename = "N")]
    n: f64,
}

fn functional_rows(reports: &[FunctionalReport]) -> Vec<FunctionalRow> {
    reports
        .iter()
        .flat_map(|r| {
            (0..r.t.len()).map(move |i| FunctionalRow {
                t: r.t[i],
                m: r.m[i],
                l: r.l[i],
                e: r.e[i],
                drift_l: r.drift_l[i],
                drift_e: r.drift_e[i],
                n: r.cutoff,
            })
        })
        .collect()
}

fn cutoff_summary(reports: &[FunctionalReport]) -> Value {
    reports
        .iter()
        .map(|r| {
            json!({
                "N": r.cutoff,
                "max_drift_L": r.max_drift_l(),
                "max_drift_E": r.max_drift_e(),
                "relative_drift_L": r.relative_drift_l(),
                "relative_drift_E": r.relative_drift_e(),
            })
        })
        .collect()
}

/// Evolves the data to `time.T` and tracks mass and the functionals.
pub fn simulate(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let grid = grid_of(cfg)?;
    let solver = solver_of(cfg)?;
    let data = initial_state(grid, &cfg.data);
    let traj = evolve_or_blow_up(&data, cfg.horizon, &solver, cfg)?;

    let multipliers = if cfg.multipliers.is_empty() {
        let s = if cfg.params.s < 1.0 { cfg.params.s } else { 0.0 };
        vec![MultiplierSpec::identity_on(&grid, s).map_err(|e| HarnessError::from_core("multiplier", e))?]
    } else {
        cfg.multipliers.clone()
    };
    let reports = multipliers
        .iter()
        .map(|m| FunctionalReport::from_trajectory(&traj, &cfg.params, m, cfg.energy))
        .collect::<skdv_core::Result<Vec<_>>>()?;

    let m0 = mass(&traj.states[0].u);
    let mass_drift = traj
        .states
        .iter()
        .map(|s| (mass(&s.u) - m0).abs())
        .fold(0.0, f64::max)
        / m0.max(f64::MIN_POSITIVE);

    let mut outputs = Outputs::default();
    outputs.add_csv(&FUNCTIONALS, &functional_rows(&reports))?;
    let mut state_csv = Vec::new();
    write_state_csv(&mut state_csv, traj.last(), &cfg.params)?;
    outputs.add(STATE.file, state_csv);

    let summary = json!({
        "final_time": traj.last().t,
        "records": traj.times.len(),
        "mass_relative_drift": mass_drift,
        "max_imag_residue": traj.max_imag_residue,
        "cutoffs": cutoff_summary(&reports),
    });
    let checks = vec![Check::below("mass_relative_drift", mass_drift, cfg.bands.mass_drift)];
    Ok(ExperimentOutput { outputs, summary, checks })
}

/// Drifts of `E_I` and `L_I` over `[0, time.delta]` for each cutoff.
pub fn invariants(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    if cfg.multipliers.is_empty() {
        return Err(HarnessError::validation("multiplier.N", "invariants needs at least one cutoff"));
    }
    let grid = grid_of(cfg)?;
    let solver = solver_of(cfg)?;
    let data = initial_state(grid, &cfg.data);
    let (_, mut reports) =
        almost_conservation_run(&data, &cfg.params, &cfg.multipliers, cfg.delta, &solver, cfg.energy)
            .map_err(|e| HarnessError::from_core("params", e))?;
    reports.sort_by(|a, b| a.cutoff.total_cmp(&b.cutoff));

    let mut outputs = Outputs::default();
    outputs.add_csv(&FUNCTIONALS, &functional_rows(&reports))?;

    let drifts: Vec<f64> = reports.iter().map(FunctionalReport::max_drift_e).collect();
    let worst = drifts
        .windows(2)
        .map(|w| w[1] / w[0].max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    let mut checks = Vec::new();
    if drifts.len() >= 2 {
        checks.push(Check {
            name: "drift_e_growth_between_cutoffs".into(),
            value: worst,
            band: format!("<= {}", cfg.bands.drift_noise),
            pass: worst <= cfg.bands.drift_noise,
        });
    }
    let summary = json!({
        "variant": format!("{:?}", cfg.energy),
        "delta": cfg.delta,
        "cutoffs": cutoff_summary(&reports),
    });
    Ok(ExperimentOutput { outputs, summary, checks })
}

#[derive(Serialize)]
struct PicardRow {
    iteration: usize,
    step_diff: f64,
    solver_diff: f64,
}

#[derive(Serialize)]
struct ProbeCsvRow {
    scale: f64,
    amplitude: f64,
    contracts: String,
    delta_star: Option<f64>,
}

fn solver_difference(it: &PicardIterate, traj: &Trajectory) -> f64 {
    let n0 = it.zero_index();
    let mut d: f64 = 0.0;
    for n in it.forward_indices() {
        let st = &traj.states[n - n0];
        for (a, b) in it.u.slice(n).iter().zip(st.u.values()) {
            d = d.max((a - b).norm());
        }
        for (a, b) in it.v.slice(n).iter().zip(st.v.values()) {
            d = d.max((a - Complex64::new(*b, 0.0)).norm());
        }
    }
    d
}

/// Picard iterates on `[0, time.delta]` against the time-stepped solution.
pub fn picard(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let grid = grid_of(cfg)?;
    let pc = &cfg.picard;
    let (u0, v0) = initial_fields(grid, &cfg.data);
    let mut it = PicardIterate::free(&u0, &v0, cfg.delta, pc.nt).map_err(|e| HarnessError::from_core("picard", e))?;
    let step = it.u.dt() / pc.substeps as f64;
    let solver = SolverConfig::new(step, cfg.dealias, pc.substeps).map_err(|e| HarnessError::from_core("picard", e))?;
    let data = SystemState::new(u0.clone(), v0.clone(), 0.0)?;
    let traj = evolve_or_blow_up(&data, cfg.delta, &solver, cfg)?;
    if traj.states.len() != it.forward_indices().count() {
        return Err(HarnessError::Numerical(skdv_core::Error::Resolution(
            "reference solution does not land on the lattice".into(),
        )));
    }

    let mut rows = vec![PicardRow {
        iteration: 0,
        step_diff: 0.0,
        solver_diff: solver_difference(&it, &traj),
    }];
    for k in 1..=pc.iterations {
        let next = picard_map(&it, &u0, &v0, &cfg.params, cfg.delta)?;
        rows.push(PicardRow {
            iteration: k,
            step_diff: next.sup_difference(&it),
            solver_diff: solver_difference(&next, &traj),
        });
        it = next;
    }
    let final_diff = rows.last().map_or(f64::NAN, |r| r.solver_diff);

    let mut outputs = Outputs::default();
    outputs.add_csv(&PICARD, &rows)?;
    let mut summary = json!({
        "delta": cfg.delta,
        "iterations": pc.iterations,
        "final_solver_diff": final_diff,
        "final_step_diff": rows.last().map_or(f64::NAN, |r| r.step_diff),
    });

    if !pc.probe_scales.is_empty() {
        let family = |scale: f64| {
            let mut d = cfg.data.clone();
            d.scale *= scale;
            initial_fields(grid, &d)
        };
        let probe = picard_contraction_probe(
            family,
            &pc.probe_scales,
            &cfg.params,
            &pc.probe_deltas,
            pc.iterations.max(3),
            pc.nt,
        )
        .map_err(|e| HarnessError::from_core("picard", e))?;
        let rows: Vec<ProbeCsvRow> = probe
            .rows
            .iter()
            .map(|r| ProbeCsvRow {
                scale: r.scale,
                amplitude: r.amplitude,
                contracts: r.contracts.iter().map(|&c| if c { '1' } else { '0' }).collect(),
                delta_star: r.delta_star,
            })
            .collect();
        outputs.add_csv(&PROBE, &rows)?;
        summary["probe"] = json!({
            "deltas": probe.deltas,
            "slope": probe.fit.as_ref().map(|f| f.slope),
            "stderr": probe.fit.as_ref().map(|f| f.stderr),
            "monotone": probe.monotone,
        });
    }
    let checks = vec![Check::below("picard_solver_diff", final_diff, cfg.bands.picard_tol)];
    Ok(ExperimentOutput { outputs, summary, checks })
}

#[derive(Serialize)]
struct InflationCsvRow {
    #[serde(rename = "N")]
    n: f64,
    k: f64,
    #[serde(rename = "G_total")]
    g_total: f64,
    #[serde(rename = "G_nls_term")]
    g_nls: f64,
    #[serde(rename = "G_kdv_term")]
    g_kdv: f64,
    slope_so_far: Option<f64>,
}

/// Second-iterate growth over the configured `N` list.
pub fn inflate(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let set = cfg
        .inflation
        .as_ref()
        .ok_or_else(|| HarnessError::validation("inflation", "section is required"))?;
    let (s, l) = (cfg.params.s, cfg.params.l);
    let report = inflation_experiment(s, l, &set.n_list, set.eps0, set.n, set.quad, &cfg.params)
        .map_err(|e| HarnessError::from_core("inflation", e))?;
    let rows: Vec<InflationCsvRow> = report
        .rows
        .iter()
        .map(|r| InflationCsvRow {
            n: r.big_n,
            k: r.k as f64,
            g_total: r.g_total,
            g_nls: r.g_nls,
            g_kdv: r.g_kdv,
            slope_so_far: r.slope_so_far,
        })
        .collect();
    let mut outputs = Outputs::default();
    outputs.add_csv(&INFLATION, &rows)?;

    let target = l - 4.0 * s;
    let phase = report.min_phase_real_part();
    let summary = json!({
        "slope": report.fit.slope,
        "stderr": report.fit.stderr,
        "intercept": report.fit.intercept,
        "expected_slope": target,
        "nls_slope": report.nls_fit.slope,
        "kdv_slope": report.kdv_fit.slope,
        "min_phase_real_part": phase,
        "config": {
            "s": s,
            "l": l,
            "eps0": set.eps0,
            "n": set.n,
            "N": set.n_list,
            "quad_xi": set.quad.xi,
            "quad_xi2": set.quad.xi2,
        },
    });
    let b = &cfg.bands;
    let checks = vec![
        Check {
            name: "slope".into(),
            value: report.fit.slope,
            band: format!("{target} +- {}", b.slope_band),
            pass: (report.fit.slope - target).abs() <= b.slope_band,
        },
        Check {
            name: "kdv_slope".into(),
            value: report.kdv_fit.slope,
            band: format!("<= {}", b.kdv_slope),
            pass: report.kdv_fit.slope <= b.kdv_slope,
        },
        Check {
            name: "min_phase_real_part".into(),
            value: phase,
            band: format!("> {}", b.phase),
            pass: phase > b.phase,
        },
    ];
    Ok(ExperimentOutput { outputs, summary, checks })
}

#[derive(Serialize)]
struct EstimateRow {
    case_id: String,
    sample_id: usize,
    #[serde(rename = "LHS")]
    lhs: f64,
    #[serde(rename = "RHS")]
    rhs: f64,
    ratio: f64,
}

#[derive(Serialize)]
struct CounterexampleRow {
    #[serde(rename = "N")]
    n: f64,
    #[serde(rename = "LHS")]
    lhs: f64,
    norm_u1: f64,
    norm_u2: f64,
    ratio: f64,
    max_abs_q1: f64,
    support_inside: bool,
}

/// Random-ensemble ratios per kind and resolution, then the sharpness family.
pub fn estimates(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let e = &cfg.estimates;
    let (s, l) = (cfg.params.s, cfg.params.l);
    let mut rows = Vec::new();
    let mut per_case = Vec::new();
    let mut maxima: Vec<(EstimateKind, Vec<f64>)> = e.kinds.iter().map(|&k| (k, Vec::new())).collect();
    for &nx in &e.nx_list {
        let resolution = Resolution {
            nx,
            nt: e.nt,
            half_length: cfg.half_length,
            horizon: e.horizon,
        };
        for (kind, maxes) in maxima.iter_mut() {
            let case = EstimateCase::new(*kind, s, l, resolution);
            let stats = random_ensemble(&case, e.members, cfg.seed, e.xi_max)
                .map_err(|err| HarnessError::from_core("estimates", err))?;
            let id = format!("{}@nx={nx}", kind.name());
            for (i, smp) in stats.samples.iter().enumerate() {
                rows.push(EstimateRow {
                    case_id: id.clone(),
                    sample_id: i,
                    lhs: smp.lhs,
                    rhs: smp.rhs,
                    ratio: smp.ratio,
                });
            }
            per_case.push(json!({
                "case_id": id,
                "kind": kind.name(),
                "nx": nx,
                "max": stats.max,
                "median": stats.median,
            }));
            maxes.push(stats.max);
        }
    }
    let mut outputs = Outputs::default();
    outputs.add_csv(&ESTIMATES, &rows)?;

    let mut checks = Vec::new();
    if e.nx_list.len() >= 2 {
        for (kind, maxes) in &maxima {
            let hi = maxes.iter().copied().fold(f64::MIN, f64::max);
            let lo = maxes.iter().copied().fold(f64::MAX, f64::min);
            let spread = hi / lo;
            checks.push(Check {
                name: format!("{}_resolution_spread", kind.name()),
                value: spread,
                band: format!("< {}", cfg.bands.ensemble_spread),
                pass: spread < cfg.bands.ensemble_spread,
            });
        }
    }

    let mut summary = json!({ "cases": per_case, "seed": cfg.seed, "members": e.members });
    if !e.counterexample_n.is_empty() {
        let resolution = Resolution {
            nx: cfg.nx,
            nt: e.nt,
            half_length: cfg.half_length,
            horizon: e.horizon,
        };
        let case = EstimateCase::new(EstimateKind::KdvOutput, s, l, resolution);
        let family = e
            .counterexample_n
            .iter()
            .map(|&n| counterexample_family(n, &case, e.points))
            .collect::<skdv_core::Result<Vec<_>>>()
            .map_err(|err| HarnessError::from_core("estimates", err))?;
        let crow: Vec<CounterexampleRow> = family
            .iter()
            .map(|c| CounterexampleRow {
                n: c.big_n,
                lhs: c.lhs,
                norm_u1: c.norm_u1,
                norm_u2: c.norm_u2,
                ratio: c.ratio,
                max_abs_q1: c.max_abs_q1,
                support_inside: c.support_inside,
            })
            .collect();
        outputs.add_csv(&COUNTEREXAMPLE, &crow)?;
        // growth per doubling of N
        let growth: Vec<f64> = family
            .windows(2)
            .map(|w| (w[1].ratio / w[0].ratio).powf(1.0 / (w[1].big_n / w[0].big_n).log2()))
            .collect();
        if l > 4.0 * s && !growth.is_empty() {
            let worst = growth.iter().copied().fold(f64::INFINITY, f64::min);
            checks.push(Check {
                name: "counterexample_growth_per_doubling".into(),
                value: worst,
                band: format!(">= {}", cfg.bands.growth),
                pass: worst >= cfg.bands.growth,
            });
        }
        summary["counterexample"] = json!({
            "N": e.counterexample_n,
            "ratios": family.iter().map(|c| c.ratio).collect::<Vec<_>>(),
            "growth_per_doubling": growth,
            "fitted_exponent": fit_loglog(&family.iter().map(|c| (c.big_n, c.ratio)).collect::<Vec<_>>())
                .ok()
                .map(|f| f.slope),
            "max_abs_q1": family.iter().map(|c| c.max_abs_q1).fold(0.0, f64::max),
        });
    }
    Ok(ExperimentOutput { outputs, summary, checks })
}
