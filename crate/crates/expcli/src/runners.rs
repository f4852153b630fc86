//! One runner per experiment.
//!
//! Work items (one per family and control value) run on a bounded rayon pool;
//! results are collected in input order so the table never depends on the
//! thread count.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use gcl_core::model::static_hamiltonian;
use gcl_core::observables::{
    cycle_summary, effective_temperature, occupation, populations, CycleSummary, PopulationFit, TemperatureFitOptions,
};
use gcl_core::propagator::DensityMatrix;
use gcl_core::semiclassics::{
    hysteresis_sweep, linear_response, nonlinear_threshold, resonance_minimum_angle, response_continuation,
    response_maxima, ringdown, ContinuationOptions, RingdownOptions, RingdownResult, SweepDirection, SweepOptions,
    SweepPoint,
};
use gcl_core::semiclassics::ContinuationResult;
use gcl_core::{ModelParams, Propagator, PropagatorConfig, SteadyStateConfig, SteadyStateReport};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{DriveKind, Experiment, ExperimentConfig, FamilyName, NumericsSection};
use crate::error::CliError;
use crate::output::{Cell, Event, Failure, RunOutput, Table};

/// Positivity events kept in the metadata; the total is always recorded.
const MAX_RECORDED_EVENTS: usize = 1000;

/// Run `cfg` on a pool of `threads` workers.
pub fn run_experiment(cfg: &ExperimentConfig, threads: usize) -> Result<RunOutput, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| CliError::Numerical(format!("worker pool: {e}")))?;
    let mut out = RunOutput { conventions: conventions(cfg), ..RunOutput::default() };
    pool.install(|| match cfg.experiment {
        Experiment::Ringdown => run_ringdown(cfg, &mut out),
        Experiment::Populations => run_populations(cfg, &mut out),
        Experiment::TeffScan => run_teff_scan(cfg, &mut out),
        Experiment::LinearResponse => run_linear_response(cfg, &mut out),
        Experiment::ResponseMaxima => run_response_maxima(cfg, &mut out),
        Experiment::Bistability => run_bistability(cfg, &mut out),
        Experiment::Fluctuations | Experiment::Parametric => run_driven_quantum(cfg, &mut out),
    });
    out.event_count = out.events.len();
    out.events.truncate(MAX_RECORDED_EVENTS);
    Ok(out)
}

fn conventions(cfg: &ExperimentConfig) -> BTreeMap<String, String> {
    let mut c = BTreeMap::new();
    let mut put = |k: &str, v: &str| {
        c.insert(k.to_string(), v.to_string());
    };
    put("units", "hbar = m = 1");
    put("operators", "x = (a + a^dag)/sqrt(2 omega0), p = i sqrt(omega0/2) (a^dag - a)");
    put("hamiltonian", "p^2/2 + omega0^2 x^2/2 + U-dependent Kerr potential + drive");
    put("theta", "model.theta_over_pi = theta/pi");
    put("families", "CL: Caldeira-Leggett; gCL: generalized Caldeira-Leggett; lindblad: thermal Lindblad (theta = pi/4)");
    if cfg.experiment.is_quantum() {
        put("occupation", "n = <omega0 x^2/2 + p^2/(2 omega0)> - 1/2");
        put("nu_geo", "sqrt(nu_min nu_max) of the symmetrized (x, p) covariance");
        put("R", "nu_max/nu_min of the symmetrized (x, p) covariance");
        put("micromotion", "mean, 10th and 90th percentiles over numerics.snapshots states of one drive period");
    }
    match cfg.drive.as_ref().map(|d| d.kind) {
        Some(DriveKind::Linear) => {
            put("drive", "H_drive = F cos(omega t) x with F = 2 sqrt(2 omega0) fq");
            put("detuning", "delta = omega - omega0; delta_over_u = (omega - omega0)/U");
        }
        Some(DriveKind::TwoPhoton) => {
            put("drive", "H_drive = F2 cos(2 omega t) x^2 with F2 = 2 omega0 G (drive.g = G, drive.f2 = F2)");
            put("detuning", "delta = omega - omega0 with omega half the pump frequency; delta_over_u = delta/U");
        }
        None => {}
    }
    if cfg.experiment == Experiment::Ringdown {
        put("envelope", "one-period moving average of sqrt(x^2 + (v/omega0)^2)");
        put("rate", "energy dissipated per cycle over the cycle's integral of v^2");
    }
    if cfg.experiment == Experiment::Bistability {
        put("amplitude", "first-harmonic amplitude A with x = A cos(omega t + phase)");
        put("series", "branch: averaged-flow continuation; forward/backward: time-domain sweeps");
    }
    c
}

fn fail(out: &mut RunOutput, family: FamilyName, control: Option<f64>, message: impl Into<String>) {
    let message = message.into();
    log::error!("{} {:?}: {message}", family.label(), control);
    out.failures.push(Failure { family: family.label().to_string(), control, message });
}

fn prop_config(n: &NumericsSection) -> PropagatorConfig {
    PropagatorConfig {
        steps_per_period: (n.steps_per_period as f64 / n.dt_factor).ceil() as usize,
        max_doublings: n.max_doublings,
        trace_tol: n.trace_tol,
        positivity_eps: n.positivity_eps,
        stability_bound: (n.stability_bound > 0.0).then_some(n.stability_bound),
    }
}

fn steady_config(n: &NumericsSection) -> SteadyStateConfig {
    SteadyStateConfig {
        residual_tol: n.residual_tol,
        stroboscopic_tol: n.stroboscopic_tol,
        max_periods: n.max_periods,
        snapshots: n.snapshots,
        extrapolation: (n.extrapolation > 0).then_some(n.extrapolation),
    }
}

/// Steady state of `params`, started from the thermal state.
fn undriven_steady(params: &ModelParams, n: &NumericsSection) -> gcl_core::Result<(SteadyStateReport, Propagator)> {
    let start = DensityMatrix::thermal(params.dim, params.n_th)?;
    let prop = Propagator::new(params, prop_config(n))?;
    let report = prop.steady_state(&start, &steady_config(n))?;
    Ok((report, prop))
}

fn record_report(out: &mut RunOutput, family: FamilyName, control: Option<f64>, r: &SteadyStateReport) {
    out.events.extend(r.events.iter().map(|e| Event {
        family: family.label().to_string(),
        control,
        t: e.t,
        min_eig: e.min_eig,
    }));
    let entry = out.diagnostics.entry("steady_states".into()).or_insert_with(|| Value::Array(Vec::new()));
    if let Value::Array(a) = entry {
        a.push(json!({
            "family": family.label(),
            "control": control,
            "converged": r.converged,
            "residual": r.residual,
            "min_eig": r.min_eig,
            "periods_used": r.periods_used,
            "steps_per_period": r.steps_per_period,
        }));
    }
    if !r.converged {
        fail(out, family, control, format!("steady state not converged (residual {:.3e})", r.residual));
    }
}

fn family_diag(out: &mut RunOutput, family: FamilyName, value: Value) {
    let entry = out.diagnostics.entry("families".into()).or_insert_with(|| json!({}));
    entry[family.label()] = value;
}

fn run_ringdown(cfg: &ExperimentConfig, out: &mut RunOutput) {
    let r = cfg.ringdown.as_ref().expect("validated");
    let opts = RingdownOptions { steps_per_period: r.steps_per_period, periods: r.periods, fit_fraction: r.fit_fraction };
    let base = cfg.base_params(cfg.families[0]);
    let threshold = nonlinear_threshold(&base);
    let x0 = r.x0.unwrap_or(if threshold.is_finite() { r.threshold_factor * threshold } else { 1.0 });
    out.diagnostics.insert("threshold".into(), json!(threshold.is_finite().then_some(threshold)));
    out.diagnostics.insert("x0".into(), json!(x0));
    let results: Vec<gcl_core::Result<RingdownResult>> =
        cfg.families.par_iter().map(|f| ringdown(&cfg.base_params(*f), x0, f.family(), &opts)).collect();
    let mut table = Table::new(&["family", "series", "t", "amplitude", "rate"]);
    for (f, res) in cfg.families.iter().zip(results) {
        out.points += 1;
        match res {
            Ok(rd) => {
                for (t, a) in &rd.envelope {
                    table.push(vec![f.label().into(), "envelope".into(), (*t).into(), (*a).into(), Cell::Missing]);
                }
                for s in &rd.rates {
                    table.push(vec![f.label().into(), "cycle".into(), s.t.into(), s.amplitude.into(), s.rate.into()]);
                }
                family_diag(
                    out,
                    *f,
                    json!({"gamma_eff": rd.gamma_eff, "linear_rate": rd.linear_rate, "monotone": rd.monotone}),
                );
            }
            Err(e) => fail(out, *f, None, e.to_string()),
        }
    }
    out.table = Some(table);
}

fn fit_options(cfg: &ExperimentConfig) -> TemperatureFitOptions {
    let t = cfg.teff.as_ref().expect("validated");
    TemperatureFitOptions { p_floor: t.p_floor, weighting: t.weighting.into(), min_levels: t.min_levels }
}

struct PopulationPoint {
    report: SteadyStateReport,
    levels: Vec<(f64, f64)>,
    fit: gcl_core::Result<PopulationFit>,
    occupation: f64,
}

fn population_point(params: &ModelParams, cfg: &ExperimentConfig) -> gcl_core::Result<PopulationPoint> {
    let (report, prop) = undriven_steady(params, &cfg.numerics)?;
    let h = static_hamiltonian(params)?;
    let levels = populations(report.state.as_operator(), &h)?;
    let fit = effective_temperature(&levels, &fit_options(cfg));
    let ops = prop.operators();
    let occupation = occupation(report.state.as_operator(), &ops.x, &ops.p, params.omega0)?;
    Ok(PopulationPoint { report, levels, fit, occupation })
}

fn fit_json(fit: &gcl_core::Result<PopulationFit>) -> Value {
    match fit {
        Ok(f) => json!({"t_eff": f.t_eff, "fit_residual": f.fit_residual, "levels_used": f.levels_used}),
        Err(e) => json!({"error": e.to_string()}),
    }
}

fn run_populations(cfg: &ExperimentConfig, out: &mut RunOutput) {
    let results: Vec<_> = cfg.families.par_iter().map(|f| population_point(&cfg.base_params(*f), cfg)).collect();
    let mut table = Table::new(&["family", "level", "energy", "population"]);
    for (f, res) in cfg.families.iter().zip(results) {
        out.points += 1;
        match res {
            Ok(p) => {
                record_report(out, *f, None, &p.report);
                for (k, (e, pop)) in p.levels.iter().enumerate() {
                    table.push(vec![f.label().into(), k.into(), (*e).into(), (*pop).into()]);
                }
                let mut d = fit_json(&p.fit);
                d["occupation"] = json!(p.occupation);
                family_diag(out, *f, d);
                if let Err(e) = &p.fit {
                    fail(out, *f, None, e.to_string());
                }
            }
            Err(e) => fail(out, *f, None, e.to_string()),
        }
    }
    out.table = Some(table);
}

fn tasks(cfg: &ExperimentConfig) -> Vec<(FamilyName, f64)> {
    let values = cfg.sweep.as_ref().expect("validated").values();
    cfg.families.iter().flat_map(|f| values.iter().map(move |v| (*f, *v))).collect()
}

fn control_name(cfg: &ExperimentConfig) -> &'static str {
    cfg.sweep.as_ref().expect("validated").variable.name()
}

fn run_teff_scan(cfg: &ExperimentConfig, out: &mut RunOutput) {
    let work = tasks(cfg);
    let results: Vec<_> = work
        .par_iter()
        .map(|(f, v)| population_point(&ModelParams { theta: v * PI, ..cfg.base_params(*f) }, cfg))
        .collect();
    let mut table = Table::new(&[
        "family",
        "theta_over_pi",
        "t_eff",
        "fit_residual",
        "levels_used",
        "occupation",
        "min_eig",
        "converged",
    ]);
    for ((f, v), res) in work.iter().zip(results) {
        out.points += 1;
        let row = match res {
            Ok(p) => {
                record_report(out, *f, Some(*v), &p.report);
                let (t, r, used) = match &p.fit {
                    Ok(fit) => (fit.t_eff, fit.fit_residual, fit.levels_used.into()),
                    Err(e) => {
                        fail(out, *f, Some(*v), e.to_string());
                        (f64::NAN, f64::NAN, Cell::Missing)
                    }
                };
                vec![
                    t.into(),
                    r.into(),
                    used,
                    p.occupation.into(),
                    p.report.min_eig.into(),
                    p.report.converged.into(),
                ]
            }
            Err(e) => {
                fail(out, *f, Some(*v), e.to_string());
                nan_cells(5).into_iter().chain([false.into()]).collect()
            }
        };
        table.push([vec![f.label().into(), (*v).into()], row].concat());
    }
    out.table = Some(table);
}

fn nan_cells(n: usize) -> Vec<Cell> {
    vec![Cell::Num(f64::NAN); n]
}

fn driven_params(cfg: &ExperimentConfig, family: FamilyName, omega: f64) -> ModelParams {
    let drive = cfg.drive.as_ref().expect("validated");
    ModelParams { drives: vec![drive.tone(omega)], ..cfg.base_params(family) }
}

fn run_linear_response(cfg: &ExperimentConfig, out: &mut RunOutput) {
    let var = cfg.sweep.as_ref().expect("validated").variable;
    let work = tasks(cfg);
    let results: Vec<_> = work
        .iter()
        .map(|(f, v)| linear_response(&driven_params(cfg, *f, cfg.omega_for(var, *v)), f.family()))
        .collect();
    let mut table = Table::new(&["family", control_name(cfg), "omega", "amplitude", "phase"]);
    for ((f, v), res) in work.iter().zip(results) {
        out.points += 1;
        let omega = cfg.omega_for(var, *v);
        let cells = match res {
            Ok(p) => vec![p.amplitude.into(), p.phase.into()],
            Err(e) => {
                fail(out, *f, Some(*v), e.to_string());
                nan_cells(2)
            }
        };
        table.push([vec![f.label().into(), (*v).into(), omega.into()], cells].concat());
    }
    out.table = Some(table);
}

fn run_response_maxima(cfg: &ExperimentConfig, out: &mut RunOutput) {
    let values = cfg.sweep.as_ref().expect("validated").values();
    let thetas: Vec<f64> = values.iter().map(|v| v * PI).collect();
    let omega = cfg.omega_for(crate::config::SweepVariable::ThetaOverPi, 0.0);
    let results: Vec<_> = cfg
        .families
        .par_iter()
        .map(|f| {
            let p = driven_params(cfg, *f, omega);
            let maxima = response_maxima(&p, &thetas, f.family())?;
            let best = resonance_minimum_angle(&p, f.family())?;
            Ok::<_, gcl_core::Error>((maxima, best))
        })
        .collect();
    let mut table = Table::new(&["family", "theta_over_pi", "a_max", "delta_max"]);
    for (f, res) in cfg.families.iter().zip(results) {
        out.points += values.len();
        match res {
            Ok((maxima, best)) => {
                for (v, (_, a, d)) in values.iter().zip(maxima) {
                    table.push(vec![f.label().into(), (*v).into(), a.into(), d.into()]);
                }
                family_diag(out, *f, json!({"min_resonance_theta_over_pi": best / PI}));
            }
            Err(e) => {
                for v in &values {
                    fail(out, *f, Some(*v), e.to_string());
                    table.push([vec![f.label().into(), (*v).into()], nan_cells(2)].concat());
                }
            }
        }
    }
    out.table = Some(table);
}

enum BistabilityPart {
    Branches(ContinuationResult),
    Sweep(Vec<SweepPoint>),
}

fn run_bistability(cfg: &ExperimentConfig, out: &mut RunOutput) {
    let var = cfg.sweep.as_ref().expect("validated").variable;
    let values = cfg.sweep.as_ref().expect("validated").values();
    let omegas: Vec<f64> = values.iter().map(|v| cfg.omega_for(var, *v)).collect();
    let range = (omegas[0], omegas[omegas.len() - 1]);
    let h = cfg.hysteresis.as_ref().expect("validated");
    let sweep_opts = SweepOptions {
        dwell_periods: h.dwell_periods,
        average_periods: h.average_periods,
        drift_periods: h.drift_periods,
        drift_tol: h.drift_tol,
        steps_per_period: h.steps_per_period,
    };
    let parts = ["branch", "forward", "backward"];
    let work: Vec<(FamilyName, &str)> =
        cfg.families.iter().flat_map(|f| parts.iter().map(move |p| (*f, *p))).collect();
    let results: Vec<gcl_core::Result<BistabilityPart>> = work
        .par_iter()
        .map(|(f, part)| {
            let p = driven_params(cfg, *f, cfg.model.omega0);
            match *part {
                "branch" => response_continuation(&p, f.family(), &ContinuationOptions::new(range))
                    .map(BistabilityPart::Branches),
                "forward" => hysteresis_sweep(&p, &omegas, f.family(), SweepDirection::Forward, &sweep_opts)
                    .map(BistabilityPart::Sweep),
                _ => hysteresis_sweep(&p, &omegas, f.family(), SweepDirection::Backward, &sweep_opts)
                    .map(BistabilityPart::Sweep),
            }
        })
        .collect();
    let mut table = Table::new(&["family", "series", "branch", "omega", "amplitude", "phase", "stable", "drift"]);
    for ((f, part), res) in work.iter().zip(results) {
        out.points += 1;
        match res {
            Ok(BistabilityPart::Branches(c)) => {
                for (k, branch) in c.branches.iter().enumerate() {
                    for b in branch {
                        table.push(vec![
                            f.label().into(),
                            "branch".into(),
                            k.into(),
                            b.omega.into(),
                            b.amplitude().into(),
                            b.phase().into(),
                            b.stable.into(),
                            Cell::Missing,
                        ]);
                    }
                }
                let folds: Vec<Value> =
                    c.folds.iter().map(|q| json!({"omega": q.omega, "amplitude": q.amplitude()})).collect();
                let windows: Vec<[f64; 2]> = c.multistable_windows().iter().map(|w| [w.0, w.1]).collect();
                let entry = out.diagnostics.entry("families".into()).or_insert_with(|| json!({}));
                entry[f.label()]["folds"] = json!(folds);
                entry[f.label()]["multistable_windows"] = json!(windows);
            }
            Ok(BistabilityPart::Sweep(points)) => {
                let mut unsettled = 0;
                for s in &points {
                    unsettled += usize::from(s.unsettled);
                    table.push(vec![
                        f.label().into(),
                        (*part).into(),
                        Cell::Missing,
                        s.omega.into(),
                        s.amplitude.into(),
                        s.phase.into(),
                        Cell::Missing,
                        s.drift.into(),
                    ]);
                }
                let entry = out.diagnostics.entry("families".into()).or_insert_with(|| json!({}));
                entry[f.label()][format!("{part}_unsettled")] = json!(unsettled);
            }
            Err(e) => fail(out, *f, None, format!("{part}: {e}")),
        }
    }
    out.table = Some(table);
}

struct DrivenPoint {
    report: SteadyStateReport,
    summary: CycleSummary,
}

fn run_driven_quantum(cfg: &ExperimentConfig, out: &mut RunOutput) {
    let var = cfg.sweep.as_ref().expect("validated").variable;
    if let Some(d) = &cfg.drive {
        if d.kind == DriveKind::TwoPhoton {
            out.diagnostics.insert(
                "parametric_drive".into(),
                json!({"g": d.g, "f2": d.f2, "relation": "F2 = 2 omega0 G", "pump_frequency": "2 omega"}),
            );
        }
    }
    // the undriven steady state seeds every driven point of a family
    let starts: Vec<Result<DensityMatrix, String>> = cfg
        .families
        .par_iter()
        .map(|f| undriven_steady(&cfg.base_params(*f), &cfg.numerics).map(|(r, _)| r.state).map_err(|e| e.to_string()))
        .collect();
    let work = tasks(cfg);
    let ss = steady_config(&cfg.numerics);
    let results: Vec<Result<DrivenPoint, String>> = work
        .par_iter()
        .map(|(f, v)| {
            let k = cfg.families.iter().position(|g| g == f).expect("family in list");
            let start = starts[k].as_ref().map_err(|e| format!("undriven state: {e}"))?;
            let params = driven_params(cfg, *f, cfg.omega_for(var, *v));
            let run = || -> gcl_core::Result<DrivenPoint> {
                let prop = Propagator::new(&params, prop_config(&cfg.numerics))?;
                let report = prop.steady_state(start, &ss)?;
                let ops = prop.operators();
                let summary = cycle_summary(&report, &ops.x, &ops.p, params.omega0)?;
                Ok(DrivenPoint { report, summary })
            };
            run().map_err(|e| e.to_string())
        })
        .collect();
    let mut table = Table::new(&[
        "family",
        control_name(cfg),
        "n_mean",
        "n_p10",
        "n_p90",
        "R_mean",
        "R_p10",
        "R_p90",
        "nu_geo_mean",
        "nu_geo_p10",
        "nu_geo_p90",
        "min_eig",
        "converged",
        "unphysical",
    ]);
    for ((f, v), res) in work.iter().zip(results) {
        out.points += 1;
        let cells = match res {
            Ok(p) => {
                record_report(out, *f, Some(*v), &p.report);
                let s = &p.summary;
                vec![
                    s.occupation.mean.into(),
                    s.occupation.p10.into(),
                    s.occupation.p90.into(),
                    s.anisotropy.mean.into(),
                    s.anisotropy.p10.into(),
                    s.anisotropy.p90.into(),
                    s.nu_geo.mean.into(),
                    s.nu_geo.p10.into(),
                    s.nu_geo.p90.into(),
                    p.report.min_eig.into(),
                    p.report.converged.into(),
                    s.unphysical.into(),
                ]
            }
            Err(e) => {
                fail(out, *f, Some(*v), e);
                nan_cells(10).into_iter().chain([false.into(), Cell::Missing]).collect()
            }
        };
        table.push([vec![f.label().into(), (*v).into()], cells].concat());
    }
    out.table = Some(table);
}
