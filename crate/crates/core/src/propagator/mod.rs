//! Fixed-step RK4 integration of `d rho/dt = L(t) rho`, undriven and Floquet
//! steady states, and positivity monitoring.
//!
//! The step count per period is the larger of the configured resolution and
//! an RK4 stability bound derived from a power-iteration estimate of the
//! generator's spectral radius; it is always a multiple of the configured
//! resolution so stroboscopic and snapshot times fall exactly on steps.

pub mod state;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::dissipator::{DissipatorSpec, LiouvillianKernel};
use crate::error::{Error, Result};
use crate::linalg::null_vector;
use crate::model::{ModelParams, SystemOperators};
use crate::operator::OperatorMatrix;

pub use state::DensityMatrix;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
/// Entries of a state can never exceed this; larger values mean blow-up.
const BLOWUP: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorConfig {
    /// Minimum RK4 steps per period of the fastest scale.
    pub steps_per_period: usize,
    /// Automatic step-count doublings after a trace-drift or blow-up failure.
    pub max_doublings: u32,
    pub trace_tol: f64,
    /// Eigenvalues below `-positivity_eps` are recorded as events.
    pub positivity_eps: f64,
    /// Largest `|lambda| dt` allowed; `None` disables the stability bound.
    pub stability_bound: Option<f64>,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        Self { steps_per_period: 200, max_doublings: 3, trace_tol: 1e-8, positivity_eps: 1e-6, stability_bound: Some(2.2) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateConfig {
    /// `max |L rho|` threshold for undriven runs.
    pub residual_tol: f64,
    /// `max |rho(t + T) - rho(t)|` threshold for driven runs.
    pub stroboscopic_tol: f64,
    pub max_periods: usize,
    /// Snapshots recorded over the converged period.
    pub snapshots: usize,
    /// Window of the reduced-rank extrapolation applied to the period-by-period
    /// sequence; `None` iterates the plain period map.
    pub extrapolation: Option<usize>,
}

impl Default for SteadyStateConfig {
    fn default() -> Self {
        Self { residual_tol: 1e-9, stroboscopic_tol: 1e-8, max_periods: 20_000, snapshots: 200, extrapolation: Some(12) }
    }
}

/// A negative eigenvalue of the state beyond the configured tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityEvent {
    pub t: f64,
    pub min_eig: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub dt: f64,
    pub events: Vec<PositivityEvent>,
}

#[derive(Debug, Clone)]
pub struct SteadyStateReport {
    /// Stroboscopic state (start of the recorded period).
    pub state: DensityMatrix,
    /// Snapshots over one drive period; a single entry when undriven.
    pub cycle: Vec<(f64, DensityMatrix)>,
    pub converged: bool,
    pub residual: f64,
    pub min_eig: f64,
    pub periods_used: usize,
    pub steps_per_period: usize,
    pub events: Vec<PositivityEvent>,
}

#[derive(Debug, Clone, Copy)]
enum StepFailure {
    Drift { t: f64, drift: f64 },
    NonFinite { t: f64 },
}

impl StepFailure {
    fn into_error(self) -> Error {
        match self {
            StepFailure::Drift { t, drift } => Error::StepSize { t, drift },
            StepFailure::NonFinite { t } => Error::Instability(t),
        }
    }
}

/// RK4 work buffers.
struct Stepper<'a> {
    kernel: &'a LiouvillianKernel,
    k: Vec<C64>,
    acc: Vec<C64>,
    y: Vec<C64>,
    scratch: Vec<C64>,
}

impl<'a> Stepper<'a> {
    fn new(kernel: &'a LiouvillianKernel) -> Self {
        let n2 = kernel.dim() * kernel.dim();
        Self { kernel, k: vec![ZERO; n2], acc: vec![ZERO; n2], y: vec![ZERO; n2], scratch: vec![ZERO; n2] }
    }

    fn step(&mut self, rho: &mut [C64], t: f64, dt: f64) {
        let h = dt / 2.0;
        self.kernel.apply_into(rho, t, &mut self.k, &mut self.scratch);
        for ((a, y), (k, r)) in self.acc.iter_mut().zip(self.y.iter_mut()).zip(self.k.iter().zip(rho.iter())) {
            *a = *k;
            *y = r + k * h;
        }
        self.kernel.apply_into(&self.y, t + h, &mut self.k, &mut self.scratch);
        for ((a, y), (k, r)) in self.acc.iter_mut().zip(self.y.iter_mut()).zip(self.k.iter().zip(rho.iter())) {
            *a += k * 2.0;
            *y = r + k * h;
        }
        self.kernel.apply_into(&self.y, t + h, &mut self.k, &mut self.scratch);
        for ((a, y), (k, r)) in self.acc.iter_mut().zip(self.y.iter_mut()).zip(self.k.iter().zip(rho.iter())) {
            *a += k * 2.0;
            *y = r + k * dt;
        }
        self.kernel.apply_into(&self.y, t + dt, &mut self.k, &mut self.scratch);
        let c = dt / 6.0;
        for ((r, a), k) in rho.iter_mut().zip(self.acc.iter()).zip(self.k.iter()) {
            *r += (a + k) * c;
        }
    }

    /// `steps` steps from `t0`; returns the final time.
    fn advance(&mut self, rho: &mut [C64], t0: f64, dt: f64, steps: usize, step0: usize) -> f64 {
        for s in 0..steps {
            self.step(rho, t0 + (step0 + s) as f64 * dt, dt);
        }
        t0 + (step0 + steps) as f64 * dt
    }
}

fn flatten(op: &OperatorMatrix) -> Vec<C64> {
    op.as_array().iter().copied().collect()
}

fn unflatten(n: usize, v: &[C64]) -> OperatorMatrix {
    OperatorMatrix::new(Array2::from_shape_vec((n, n), v.to_vec()).expect("n*n entries")).expect("square")
}

fn trace_of(n: usize, v: &[C64]) -> C64 {
    (0..n).map(|i| v[i * n + i]).sum()
}

fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

/// Integrator for one model and dissipator family.
#[derive(Debug, Clone)]
pub struct Propagator {
    ops: SystemOperators,
    kernel: LiouvillianKernel,
    config: PropagatorConfig,
    period: f64,
    fastest: f64,
    driven: bool,
    spectral_radius: f64,
}

impl Propagator {
    pub fn new(params: &ModelParams, config: PropagatorConfig) -> Result<Self> {
        let spec = DissipatorSpec::from_params(params)?;
        Self::with_spec(params, spec, config)
    }

    pub fn with_spec(params: &ModelParams, spec: DissipatorSpec, config: PropagatorConfig) -> Result<Self> {
        let ops = SystemOperators::build(params)?;
        let kernel = LiouvillianKernel::new(&ops, &spec)?;
        let spectral_radius = estimate_spectral_radius(&kernel);
        log::debug!("generator spectral radius estimate {spectral_radius:.4}");
        Ok(Self {
            ops,
            kernel,
            config,
            period: params.drive_period(),
            fastest: params.fastest_period(),
            driven: !params.drives.is_empty(),
            spectral_radius,
        })
    }

    pub fn operators(&self) -> &SystemOperators {
        &self.ops
    }

    pub fn kernel(&self) -> &LiouvillianKernel {
        &self.kernel
    }

    pub fn config(&self) -> &PropagatorConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    /// Drive period, or `2 pi / omega0` when undriven.
    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn is_driven(&self) -> bool {
        self.driven
    }

    pub fn spectral_radius(&self) -> f64 {
        self.spectral_radius
    }

    /// RK4 steps per period, a multiple of `multiple_of`.
    pub fn steps_per_period(&self, multiple_of: usize) -> usize {
        let unit = multiple_of.max(1);
        let res = self.config.steps_per_period as f64 * (self.period / self.fastest - 1e-9).ceil().max(1.0);
        let stab = self.config.stability_bound.map_or(0.0, |b| (self.period * self.spectral_radius / b).ceil());
        let m = res.max(stab) as usize;
        m.div_ceil(unit) * unit
    }

    /// Largest step that satisfies the resolution and stability rules.
    pub fn max_dt(&self) -> f64 {
        self.period / self.steps_per_period(1) as f64
    }

    /// `L(t) rho`.
    pub fn generator(&self, rho: &OperatorMatrix, t: f64) -> Result<OperatorMatrix> {
        self.kernel.apply(rho, t)
    }

    fn check_state(&self, v: &[C64], t: f64) -> std::result::Result<(), StepFailure> {
        let n = self.dim();
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite() || z.norm() > BLOWUP) {
            return Err(StepFailure::NonFinite { t });
        }
        let drift = (trace_of(n, v) - C64::new(1.0, 0.0)).norm();
        if drift > self.config.trace_tol {
            return Err(StepFailure::Drift { t, drift });
        }
        Ok(())
    }

    fn positivity(&self, rho: &DensityMatrix, t: f64, events: &mut Vec<PositivityEvent>) -> f64 {
        let m = rho.min_eigenvalue();
        if m < -self.config.positivity_eps {
            log::warn!("positivity violation at t = {t:.6}: min eigenvalue {m:.3e}");
            events.push(PositivityEvent { t, min_eig: m });
        }
        m
    }

    fn retry<T>(&self, steps: usize, mut attempt: impl FnMut(usize) -> std::result::Result<T, StepFailure>) -> Result<T> {
        let mut s = steps;
        for k in 0..=self.config.max_doublings {
            match attempt(s) {
                Ok(v) => return Ok(v),
                Err(f) if k < self.config.max_doublings => {
                    log::warn!("step failure {f:?} at {s} steps, doubling");
                    s *= 2;
                }
                Err(f) => return Err(f.into_error()),
            }
        }
        unreachable!("loop returns on the last attempt")
    }

    /// Integrate over `[t0, t0 + steps dt]` sampling every `sample_every` steps
    /// (including both ends). Failures halve `dt` up to `max_doublings` times.
    pub fn evolve(
        &self,
        rho0: &DensityMatrix,
        t0: f64,
        dt: f64,
        steps: usize,
        sample_every: usize,
    ) -> Result<Trajectory> {
        rho0.ensure_dim(self.dim())?;
        if !(dt > 0.0) || sample_every == 0 {
            return Err(Error::InvalidParameter { name: "dt", reason: "step and sampling must be positive".into() });
        }
        let n = self.dim();
        let mut refine = 1usize;
        self.retry(steps, |s| {
            let sub = s / steps;
            refine = sub;
            let h = dt / sub as f64;
            let mut rho = flatten(rho0);
            let mut stepper = Stepper::new(&self.kernel);
            let mut out = Trajectory { times: vec![t0], states: vec![rho0.clone()], dt: h, events: Vec::new() };
            let mut done = 0;
            while done < steps {
                let chunk = sample_every.min(steps - done);
                stepper.advance(&mut rho, t0, h, chunk * sub, done * sub);
                done += chunk;
                let t = t0 + done as f64 * dt;
                self.check_state(&rho, t)?;
                let state = DensityMatrix::from_raw(unflatten(n, &rho));
                self.positivity(&state, t, &mut out.events);
                out.times.push(t);
                out.states.push(state);
            }
            Ok(out)
        })
        .inspect(|_| {
            if refine > 1 {
                log::info!("evolution used {refine}x refined steps");
            }
        })
    }

    /// Long-time state: `max |L rho| < residual_tol` when undriven, or
    /// stroboscopic convergence followed by one recorded period when driven.
    pub fn steady_state(&self, rho0: &DensityMatrix, cfg: &SteadyStateConfig) -> Result<SteadyStateReport> {
        rho0.ensure_dim(self.dim())?;
        let m0 = self.steps_per_period(cfg.snapshots.max(1));
        self.retry(m0, |m| if self.driven { self.driven_steady(rho0, cfg, m) } else { self.undriven_steady(rho0, cfg, m) })
    }

    fn undriven_steady(
        &self,
        rho0: &DensityMatrix,
        cfg: &SteadyStateConfig,
        m: usize,
    ) -> std::result::Result<SteadyStateReport, StepFailure> {
        let n = self.dim();
        let dt = self.period / m as f64;
        let mut rho = flatten(rho0);
        let mut stepper = Stepper::new(&self.kernel);
        let mut lr = vec![ZERO; n * n];
        let mut scratch = vec![ZERO; n * n];
        let mut residual = f64::INFINITY;
        let mut periods = 0;
        let mut t = 0.0;
        let mut extrap = cfg.extrapolation.map(Extrapolator::new);
        while periods < cfg.max_periods {
            self.kernel.apply_into(&rho, t, &mut lr, &mut scratch);
            residual = lr.iter().fold(0.0, |a, z| a.max(z.norm()));
            if residual < cfg.residual_tol {
                break;
            }
            t = stepper.advance(&mut rho, 0.0, dt, m, periods * m);
            periods += 1;
            self.check_state(&rho, t)?;
            if let Some(e) = extrap.as_mut() {
                e.push(&mut rho);
            }
        }
        let converged = residual < cfg.residual_tol;
        if !converged {
            log::warn!("undriven steady state not converged after {periods} periods, residual {residual:.3e}");
        }
        let state = DensityMatrix::from_raw(unflatten(n, &rho));
        let mut events = Vec::new();
        let min_eig = self.positivity(&state, t, &mut events);
        Ok(SteadyStateReport {
            cycle: vec![(t, state.clone())],
            state,
            converged,
            residual,
            min_eig,
            periods_used: periods,
            steps_per_period: m,
            events,
        })
    }

    fn driven_steady(
        &self,
        rho0: &DensityMatrix,
        cfg: &SteadyStateConfig,
        m: usize,
    ) -> std::result::Result<SteadyStateReport, StepFailure> {
        let n = self.dim();
        let dt = self.period / m as f64;
        let k = cfg.snapshots.max(1);
        let per_snapshot = m / k;
        let mut rho = flatten(rho0);
        let mut prev = rho.clone();
        let mut stepper = Stepper::new(&self.kernel);
        let mut residual = f64::INFINITY;
        let mut periods = 0;
        let mut extrap = cfg.extrapolation.map(Extrapolator::new);
        while periods < cfg.max_periods {
            // the phase of a periodic generator only depends on the step index mod m
            let t = stepper.advance(&mut rho, 0.0, dt, m, 0) + periods as f64 * self.period;
            periods += 1;
            self.check_state(&rho, t)?;
            residual = max_abs_diff(&rho, &prev);
            if residual < cfg.stroboscopic_tol {
                break;
            }
            if let Some(e) = extrap.as_mut() {
                e.push(&mut rho);
            }
            prev.copy_from_slice(&rho);
        }
        let converged = residual < cfg.stroboscopic_tol;
        if !converged {
            log::warn!("driven steady state not converged after {periods} periods, residual {residual:.3e}");
        }
        let t_start = periods as f64 * self.period;
        let mut cycle = Vec::with_capacity(k);
        let mut events = Vec::new();
        let mut min_eig = f64::INFINITY;
        let stride = (k / 20).max(1);
        for j in 0..k {
            let t = t_start + j as f64 * per_snapshot as f64 * dt;
            let state = DensityMatrix::from_raw(unflatten(n, &rho));
            if j % stride == 0 {
                min_eig = min_eig.min(self.positivity(&state, t, &mut events));
            }
            cycle.push((t, state));
            stepper.advance(&mut rho, 0.0, dt, per_snapshot, j * per_snapshot);
        }
        self.check_state(&rho, t_start + self.period)?;
        Ok(SteadyStateReport {
            state: cycle[0].1.clone(),
            cycle,
            converged,
            residual,
            min_eig,
            periods_used: periods,
            steps_per_period: m,
            events,
        })
    }

    /// Matrix of the one-period map on row-major vectorized operators.
    pub fn period_map(&self, steps: usize) -> DMatrix<C64> {
        let n = self.dim();
        let dt = self.period / steps as f64;
        let mut stepper = Stepper::new(&self.kernel);
        let mut phi = DMatrix::zeros(n * n, n * n);
        let mut v = vec![ZERO; n * n];
        for col in 0..n * n {
            v.fill(ZERO);
            v[col] = C64::new(1.0, 0.0);
            stepper.advance(&mut v, 0.0, dt, steps, 0);
            for (row, z) in v.iter().enumerate() {
                phi[(row, col)] = *z;
            }
        }
        phi
    }

    /// Fixed point of the one-period map from the null space of `Phi - 1`.
    pub fn floquet_fixed_point(&self) -> Result<SteadyStateReport> {
        let n = self.dim();
        let m = self.steps_per_period(1);
        let mut a = self.period_map(m);
        for i in 0..n * n {
            a[(i, i)] -= C64::new(1.0, 0.0);
        }
        let (v, s_min, s_next) = null_vector(&a);
        log::debug!("period map: smallest singular values {s_min:.3e}, {s_next:.3e}");
        if s_next < AMBIGUITY_TOL {
            return Err(Error::AmbiguousFixedPoint(s_next));
        }
        let tr = trace_of(n, &v);
        let scaled: Vec<C64> = v.iter().map(|z| z / tr).collect();
        let state = DensityMatrix::from_raw(unflatten(n, &scaled).hermitian_part());

        let mut image = flatten(&state);
        Stepper::new(&self.kernel).advance(&mut image, 0.0, self.period / m as f64, m, 0);
        let residual = max_abs_diff(&image, &flatten(&state));
        let mut events = Vec::new();
        let min_eig = self.positivity(&state, 0.0, &mut events);
        Ok(SteadyStateReport {
            cycle: vec![(0.0, state.clone())],
            state,
            converged: residual < 1e-9,
            residual,
            min_eig,
            periods_used: 1,
            steps_per_period: m,
            events,
        })
    }
}

const AMBIGUITY_TOL: f64 = 1e-7;

/// Reduced-rank extrapolation of a linear fixed-point sequence
/// `x_{k+1} = Phi x_k`. With differences `u_i = x_{i+1} - x_i`, the weights
/// minimize `|sum g_i u_i|` subject to `sum g_i = 1` and the new iterate is
/// `sum g_i x_i`. Hermitian unit-trace iterates stay Hermitian with unit trace
/// because the weights are real and sum to one.
struct Extrapolator {
    window: usize,
    history: Vec<Vec<C64>>,
}

impl Extrapolator {
    fn new(window: usize) -> Self {
        Self { window: window.max(2), history: Vec::new() }
    }

    /// Record the newest iterate; every `window + 1` iterates it is replaced
    /// by the extrapolated one.
    fn push(&mut self, x: &mut [C64]) {
        self.history.push(x.to_vec());
        if self.history.len() <= self.window {
            return;
        }
        if let Some(s) = rre(&self.history) {
            x.copy_from_slice(&s);
        }
        self.history.clear();
        self.history.push(x.to_vec());
    }
}

fn rre(xs: &[Vec<C64>]) -> Option<Vec<C64>> {
    let k = xs.len() - 1;
    let u: Vec<Vec<C64>> = (0..k).map(|i| xs[i + 1].iter().zip(&xs[i]).map(|(a, b)| a - b).collect()).collect();
    let mut gram = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let g: f64 = u[i].iter().zip(&u[j]).map(|(a, b)| (a.conj() * b).re).sum();
            gram[(i, j)] = g;
            gram[(j, i)] = g;
        }
    }
    let ridge = 1e-13 * gram.trace().max(f64::MIN_POSITIVE);
    for i in 0..k {
        gram[(i, i)] += ridge;
    }
    let y = gram.cholesky()?.solve(&nalgebra::DVector::from_element(k, 1.0));
    let total: f64 = y.iter().sum();
    if !total.is_finite() || total == 0.0 {
        return None;
    }
    let mut s = vec![ZERO; xs[0].len()];
    for (g, x) in y.iter().zip(xs) {
        let w = g / total;
        for (o, v) in s.iter_mut().zip(x) {
            *o += v * w;
        }
    }
    s.iter().all(|z| z.re.is_finite() && z.im.is_finite()).then_some(s)
}

/// `max |lambda|` of the generator, from power iteration at `t = 0`.
fn estimate_spectral_radius(kernel: &LiouvillianKernel) -> f64 {
    let n = kernel.dim();
    let mut v: Vec<C64> = (0..n * n)
        .map(|k| {
            let (i, j) = ((k / n) as f64, (k % n) as f64);
            C64::new((1.3 * i + 0.7 * j + 0.1).sin(), (0.9 * i - 1.1 * j + 0.3).cos())
        })
        .collect();
    let mut w = vec![ZERO; n * n];
    let mut scratch = vec![ZERO; n * n];
    let norm = |x: &[C64]| x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut est: f64 = 0.0;
    for it in 0..80 {
        let nv = norm(&v);
        if nv == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|z| *z /= nv);
        kernel.apply_into(&v, 0.0, &mut w, &mut scratch);
        let r = norm(&w);
        if it >= 60 {
            est = est.max(r);
        }
        std::mem::swap(&mut v, &mut w);
    }
    // power iteration approaches the radius from below
    est * 1.05
}

/// Thermal state when undriven, otherwise the steady state of the undriven model.
pub fn initial_state(params: &ModelParams) -> Result<DensityMatrix> {
    let thermal = DensityMatrix::thermal(params.dim, params.n_th)?;
    if params.drives.is_empty() {
        return Ok(thermal);
    }
    let undriven = ModelParams { drives: Vec::new(), ..params.clone() };
    let prop = Propagator::new(&undriven, PropagatorConfig::default())?;
    Ok(prop.steady_state(&thermal, &SteadyStateConfig::default())?.state)
}

/// Integrate `rho0` over `t_span` with step `dt`, sampling every `sample_every` steps.
pub fn evolve(
    rho0: &DensityMatrix,
    params: &ModelParams,
    t_span: (f64, f64),
    dt: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    let prop = Propagator::new(params, PropagatorConfig::default())?;
    let limit = prop.max_dt();
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: format!("{dt} exceeds the resolution/stability limit {limit}"),
        });
    }
    let steps = ((t_span.1 - t_span.0) / dt).round() as usize;
    prop.evolve(rho0, t_span.0, dt, steps, sample_every)
}

/// Steady state from `rho0`, or from [`initial_state`] when `None`.
pub fn steady_state(params: &ModelParams, rho0: Option<&DensityMatrix>) -> Result<SteadyStateReport> {
    let prop = Propagator::new(params, PropagatorConfig::default())?;
    let start = match rho0 {
        Some(r) => r.clone(),
        None => initial_state(params)?,
    };
    prop.steady_state(&start, &SteadyStateConfig::default())
}

pub fn floquet_map_fixed_point(params: &ModelParams) -> Result<SteadyStateReport> {
    Propagator::new(params, PropagatorConfig::default())?.floquet_fixed_point()
}

/// Period of the bare oscillator.
pub fn bare_period(omega0: f64) -> f64 {
    2.0 * PI / omega0
}
