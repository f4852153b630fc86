//! Default values for every experiment, layered below the user's config.
//!
//! Each experiment carries a reference parameter set; the values are
//! transcribed into `data/reference_parameters.toml` and a test keeps the two
//! in step.

use crate::config::Experiment;

/// Defaults shared by all experiments.
pub const BASE: &str = r#"
families = ["CL", "gCL"]

[model]
omega0 = 1.0
gamma = 0.2
theta_over_pi = 0.25
n_th = 0.0
kerr = 0.0

[numerics]
dim = 30
steps_per_period = 200
dt_factor = 1.0
stability_bound = 2.2
max_doublings = 3
trace_tol = 1e-8
positivity_eps = 1e-6
residual_tol = 1e-9
stroboscopic_tol = 1e-8
max_periods = 20000
snapshots = 200
extrapolation = 12

[output]
dir = "."
"#;

/// Reference parameters plus experiment-specific numerics and sweep ranges.
pub fn preset(experiment: Experiment) -> &'static str {
    match experiment {
        Experiment::Ringdown => {
            r#"
            [model]
            gamma = 0.2
            n_th = 0.3
            kerr = 0.2
            theta_over_pi = 0.4

            [ringdown]
            steps_per_period = 400
            fit_fraction = 0.3
            threshold_factor = 1.5
            "#
        }
        Experiment::Populations => {
            r#"
            [model]
            gamma = 0.2
            n_th = 0.3
            kerr = 0.2
            theta_over_pi = 0.25

            [numerics]
            dim = 40

            [teff]
            p_floor = 1e-8
            weighting = "uniform"
            min_levels = 3
            "#
        }
        Experiment::TeffScan => {
            r#"
            [model]
            gamma = 0.2
            n_th = 0.3
            kerr = 0.2

            [numerics]
            dim = 40

            [teff]
            p_floor = 1e-8
            weighting = "uniform"
            min_levels = 3

            [sweep]
            variable = "theta_over_pi"
            start = 0.05
            stop = 0.45
            points = 9
            "#
        }
        Experiment::LinearResponse => {
            r#"
            [model]
            gamma = 0.5

            [drive]
            kind = "linear"
            fq = 0.4

            [sweep]
            variable = "delta"
            start = -0.9
            stop = 2.0
            points = 291
            "#
        }
        Experiment::ResponseMaxima => {
            r#"
            [model]
            gamma = 0.5

            [drive]
            kind = "linear"
            fq = 0.4

            [sweep]
            variable = "theta_over_pi"
            start = 0.0
            stop = 0.5
            points = 51
            "#
        }
        Experiment::Bistability => {
            r#"
            [model]
            gamma = 0.2
            kerr = 0.375
            theta_over_pi = 0.4

            [drive]
            kind = "linear"
            fq = 0.4

            [sweep]
            variable = "omega"
            start = 0.5
            stop = 3.0
            points = 101

            [hysteresis]
            dwell_periods = 300
            average_periods = 50
            drift_periods = 20
            drift_tol = 1e-4
            steps_per_period = 200
            "#
        }
        Experiment::Fluctuations => {
            r#"
            [model]
            gamma = 0.3
            kerr = 0.2
            theta_over_pi = 0.25
            n_th = 0.3

            [drive]
            kind = "linear"
            fq = 0.3

            [numerics]
            dim = 40

            [sweep]
            variable = "delta_over_u"
            start = -1.0
            stop = 4.0
            points = 21
            "#
        }
        Experiment::Parametric => {
            r#"
            [model]
            gamma = 0.03
            kerr = 0.2
            theta_over_pi = 0.25
            n_th = 0.3

            [drive]
            kind = "two-photon"
            g = 0.1

            [numerics]
            dim = 30

            [sweep]
            variable = "delta_over_u"
            start = 0.5
            stop = 3.5
            points = 31
            "#
        }
    }
}
