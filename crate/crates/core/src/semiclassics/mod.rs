//! Semiclassical equations of motion for the oscillator position, ringdown
//! envelopes, closed-form linear response, and the rotating-wave slow flow.
//!
//! With `s = sin 2θ`, `c = cos 2θ` the gCL equation of motion is
//!
//! ```text
//! ẍ = -(omega0² + shift) x - (a + d) x³ - Gamma ẋ - b x² ẋ - F_c cos(omega t) + F_s sin(omega t)
//! ```
//!
//! with `a = 4 omega0² U/3`, `Gamma = (1 + s) gamma`, `b = 2 (1 - c) gamma U`,
//! `shift = (cos θ + sin θ)² s gamma²/2`, `d = sin²θ (1 + c + s) 2 gamma² U/3`,
//! `F_c = F (1 + sin²θ (1 + c + s) gamma²/(2 omega0²))` and
//! `F_s = (1 - c) gamma F omega/(2 omega0²)`. The CL equation keeps only the
//! linear damping and the frequency shift.

pub mod slow_flow;
pub mod sweep;

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{Family, ModelParams};

pub use slow_flow::{
    response_continuation, slow_flow_rhs, BranchPoint, ContinuationOptions, ContinuationResult,
};
pub use sweep::{hysteresis_sweep, SweepDirection, SweepOptions, SweepPoint};

/// Position, velocity and time of the classical oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiclassicalState {
    pub x: f64,
    pub v: f64,
    pub t: f64,
}

impl SemiclassicalState {
    pub fn new(x: f64, v: f64, t: f64) -> Self {
        Self { x, v, t }
    }

    /// Classical velocity matching quantum means `<x>`, `<p>` at time `t`.
    /// The friction term shifts `d<x>/dt` away from `<p>` by `-(a-) gamma x / 2`,
    /// and in gCL a linear drive adds `-(1 - cos 2θ) gamma F cos(omega t)/(2 omega0²)`.
    pub fn from_phase_space(x: f64, p: f64, t: f64, params: &ModelParams, family: Family) -> Result<Self> {
        let c = EomCoefficients::new(params, family)?;
        let a_minus = 1.0 - (2.0 * params.theta).cos() + (2.0 * params.theta).sin();
        let mut v = p - a_minus * params.gamma * x / 2.0;
        if family == Family::Gcl {
            if let Some(d) = c.drive {
                let b = 1.0 - (2.0 * params.theta).cos();
                v -= b * params.gamma * d.amplitude * (d.frequency * t).cos() / (2.0 * params.omega0.powi(2));
            }
        }
        Ok(Self { x, v, t })
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.v.is_finite()
    }
}

/// Linear drive entering the equation of motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EomDrive {
    pub amplitude: f64,
    pub frequency: f64,
    /// Coefficient of `-cos(omega t)`.
    pub cos_part: f64,
    /// Coefficient of `+sin(omega t)`.
    pub sin_part: f64,
}

/// Coefficients of the equation of motion for one family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EomCoefficients {
    pub family: Family,
    pub omega0: f64,
    /// `omega0² + shift`
    pub stiffness: f64,
    /// `a + d`
    pub cubic: f64,
    pub linear_damping: f64,
    pub nonlinear_damping: f64,
    pub drive: Option<EomDrive>,
}

impl EomCoefficients {
    pub fn new(params: &ModelParams, family: Family) -> Result<Self> {
        params.validate()?;
        if family == Family::Lindblad {
            return Err(Error::InvalidParameter {
                name: "family",
                reason: "the semiclassical equations are defined for CL and gCL".into(),
            });
        }
        if params.drives.len() > 1 {
            return Err(Error::InvalidParameter { name: "drives", reason: "at most one drive tone".into() });
        }
        let th = params.theta;
        let (s, c) = (2.0 * th).sin_cos();
        let (g, w0, u) = (params.gamma, params.omega0, params.kerr);
        let w2 = w0 * w0;
        let gcl = family == Family::Gcl;
        let dressing = th.sin().powi(2) * (1.0 + c + s);
        let shift = (th.cos() + th.sin()).powi(2) * s * g * g / 2.0;
        let a = 4.0 * w2 * u / 3.0;
        let d = if gcl { dressing * 2.0 * g * g * u / 3.0 } else { 0.0 };
        let drive = match params.drives.first() {
            None => None,
            Some(tone) if tone.order == 1 => {
                let f = tone.amplitude;
                let (cos_part, sin_part) = if gcl {
                    (f * (1.0 + dressing * g * g / (2.0 * w2)), (1.0 - c) * g * f * tone.frequency / (2.0 * w2))
                } else {
                    (f, 0.0)
                };
                Some(EomDrive { amplitude: f, frequency: tone.frequency, cos_part, sin_part })
            }
            Some(tone) => return Err(Error::UnsupportedDrive(tone.order)),
        };
        Ok(Self {
            family,
            omega0: w0,
            stiffness: w2 + shift,
            cubic: a + d,
            linear_damping: (1.0 + s) * g,
            nonlinear_damping: if gcl { 2.0 * (1.0 - c) * g * u } else { 0.0 },
            drive,
        })
    }

    /// Energy of the conservative part, `v²/2 + stiffness x²/2 + cubic x⁴/4`.
    pub fn conservative_energy(&self, x: f64, v: f64) -> f64 {
        v * v / 2.0 + self.stiffness * x * x / 2.0 + self.cubic * x.powi(4) / 4.0
    }

    /// The same coefficients with the drive moved to `omega`.
    pub fn at_drive_frequency(mut self, omega: f64) -> Self {
        if let Some(d) = self.drive.as_mut() {
            if self.family == Family::Gcl {
                d.sin_part *= omega / d.frequency;
            }
            d.frequency = omega;
        }
        self
    }
}

/// `(dx/dt, dv/dt)` at `state`.
pub fn eom_rhs(state: &SemiclassicalState, coeffs: &EomCoefficients) -> (f64, f64) {
    let SemiclassicalState { x, v, t } = *state;
    let mut acc = -coeffs.stiffness * x - coeffs.cubic * x * x * x - coeffs.linear_damping * v
        - coeffs.nonlinear_damping * x * x * v;
    if let Some(d) = coeffs.drive {
        let (s, c) = (d.frequency * t).sin_cos();
        acc += -d.cos_part * c + d.sin_part * s;
    }
    (v, acc)
}

/// One classical RK4 step.
pub fn rk4_step(state: &SemiclassicalState, coeffs: &EomCoefficients, dt: f64) -> SemiclassicalState {
    let at = |x: f64, v: f64, t: f64| eom_rhs(&SemiclassicalState { x, v, t }, coeffs);
    let SemiclassicalState { x, v, t } = *state;
    let h = dt / 2.0;
    let k1 = at(x, v, t);
    let k2 = at(x + h * k1.0, v + h * k1.1, t + h);
    let k3 = at(x + h * k2.0, v + h * k2.1, t + h);
    let k4 = at(x + dt * k3.0, v + dt * k3.1, t + dt);
    SemiclassicalState {
        x: x + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        v: v + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        t: t + dt,
    }
}

/// Integrate `steps` RK4 steps, calling `observe` on every state including the first.
pub fn integrate(
    start: SemiclassicalState,
    coeffs: &EomCoefficients,
    dt: f64,
    steps: usize,
    mut observe: impl FnMut(&SemiclassicalState),
) -> Result<SemiclassicalState> {
    let mut s = start;
    observe(&s);
    for k in 0..steps {
        s = rk4_step(&s, coeffs, dt);
        // accumulate time from the step index to avoid drift
        s.t = start.t + (k + 1) as f64 * dt;
        if !s.is_finite() {
            return Err(Error::Instability(s.t));
        }
        observe(&s);
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RingdownOptions {
    pub steps_per_period: usize,
    /// Run length in bare periods; `None` picks the time in which a linear
    /// envelope decays by `e^-12`.
    pub periods: Option<usize>,
    /// Fraction of the run, counted from the end, used for the rate fit.
    pub fit_fraction: f64,
}

impl Default for RingdownOptions {
    fn default() -> Self {
        Self { steps_per_period: 400, periods: None, fit_fraction: 0.3 }
    }
}

/// Dissipated energy per cycle over `∫v² dt`, at the cycle's mean envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSample {
    pub t: f64,
    pub amplitude: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RingdownResult {
    pub x0: f64,
    /// `(t, A)` with `A` the one-period moving average of `sqrt(x² + (v/omega0)²)`.
    pub envelope: Vec<(f64, f64)>,
    /// `-2 d ln A/dt` from a straight-line fit to the late part of the envelope.
    pub gamma_eff: f64,
    pub rates: Vec<RateSample>,
    /// False when the smoothed envelope grows anywhere beyond rounding.
    pub monotone: bool,
    pub linear_rate: f64,
}

/// Smallest initial amplitude at which the nonlinear damping exceeds the
/// linear one, `x0² = (1 + sin 2θ)/(2 U (1 - cos 2θ))`. Infinite when the
/// nonlinear damping vanishes.
pub fn nonlinear_threshold(params: &ModelParams) -> f64 {
    let th = params.theta;
    let denom = 2.0 * params.kerr * (1.0 - (2.0 * th).cos());
    if denom <= 0.0 {
        return f64::INFINITY;
    }
    ((1.0 + (2.0 * th).sin()) / denom).sqrt()
}

/// Free decay from `(x0, 0)`.
pub fn ringdown(params: &ModelParams, x0: f64, family: Family, opts: &RingdownOptions) -> Result<RingdownResult> {
    if !params.drives.is_empty() {
        return Err(Error::InvalidParameter { name: "drives", reason: "ringdown runs undriven".into() });
    }
    if !(x0 > 0.0) {
        return Err(Error::InvalidParameter { name: "x0", reason: format!("must be positive, got {x0}") });
    }
    let c = EomCoefficients::new(params, family)?;
    if !(c.linear_damping > 0.0) {
        return Err(Error::InvalidParameter { name: "gamma", reason: "ringdown needs damping".into() });
    }
    let w0 = params.omega0;
    let period = 2.0 * PI / w0;
    let m = opts.steps_per_period.max(8).next_multiple_of(2);
    let dt = period / m as f64;
    let periods = opts.periods.unwrap_or_else(|| (24.0 / c.linear_damping / period).ceil() as usize).max(4);
    let mut t = Vec::with_capacity(periods * m + 1);
    let mut quad = Vec::with_capacity(periods * m + 1);
    let mut energy = Vec::with_capacity(periods * m + 1);
    let mut v2 = Vec::with_capacity(periods * m + 1);
    integrate(SemiclassicalState::new(x0, 0.0, 0.0), &c, dt, periods * m, |s| {
        t.push(s.t);
        quad.push((s.x * s.x + (s.v / w0).powi(2)).sqrt());
        energy.push(c.conservative_energy(s.x, s.v));
        v2.push(s.v * s.v);
    })?;

    // centred moving average over one period (m + 1 points, trapezoid weights)
    let mut envelope = Vec::with_capacity(t.len() - m);
    let mut window: f64 = quad[..=m].iter().sum::<f64>() - 0.5 * (quad[0] + quad[m]);
    for k in 0..t.len() - m {
        if k > 0 {
            window += 0.5 * (quad[k + m] + quad[k + m - 1]) - 0.5 * (quad[k] + quad[k - 1]);
        }
        envelope.push((t[k] + period / 2.0, window / m as f64));
    }
    let monotone = envelope.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-9));
    if !monotone {
        log::warn!("ringdown envelope is not monotone");
    }

    let start = ((1.0 - opts.fit_fraction) * envelope.len() as f64) as usize;
    let (ts, ls): (Vec<f64>, Vec<f64>) = envelope[start..].iter().map(|&(t, a)| (t, a.ln())).unzip();
    let gamma_eff = -2.0 * line_slope(&ts, &ls);

    let rates = (0..periods)
        .map(|k| {
            let (i0, i1) = (k * m, (k + 1) * m);
            let integral = simpson(&v2[i0..=i1], dt);
            let amp = quad[i0..=i1].iter().sum::<f64>() / (m + 1) as f64;
            RateSample { t: (t[i0] + t[i1]) / 2.0, amplitude: amp, rate: (energy[i0] - energy[i1]) / integral }
        })
        .collect();
    Ok(RingdownResult { x0, envelope, gamma_eff, rates, monotone, linear_rate: c.linear_damping })
}

/// Composite Simpson rule over equally spaced samples; `y.len()` must be odd.
fn simpson(y: &[f64], h: f64) -> f64 {
    let n = y.len() - 1;
    debug_assert!(n % 2 == 0);
    let inner: f64 = y[1..n].iter().enumerate().map(|(k, v)| if k % 2 == 0 { 4.0 * v } else { 2.0 * v }).sum();
    h / 3.0 * (y[0] + inner + y[n])
}

/// Least-squares slope of `y` against `x`.
pub(crate) fn line_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Steady response `x(t) = A cos(omega t + delta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponsePoint {
    pub detuning: f64,
    pub amplitude: f64,
    pub phase: f64,
    /// Only set by the continuation.
    pub stable: Option<bool>,
}

/// Complex amplitude `X` with `x = Re(X e^{i omega t})` for the linear equation of motion.
fn linear_amplitude(c: &EomCoefficients, omega: f64) -> C64 {
    let d = c.at_drive_frequency(omega).drive.expect("linear response needs a drive");
    C64::new(-d.cos_part, -d.sin_part) / C64::new(c.stiffness - omega * omega, c.linear_damping * omega)
}

pub(crate) fn require_linear_drive(params: &ModelParams) -> Result<()> {
    match params.drives.as_slice() {
        [tone] if tone.order == 1 => Ok(()),
        [tone] => Err(Error::UnsupportedDrive(tone.order)),
        _ => Err(Error::InvalidParameter { name: "drives", reason: "exactly one linear drive tone".into() }),
    }
}

/// Closed-form steady response of the linear (`U = 0`) equation of motion at
/// the drive frequency of `params`.
pub fn linear_response(params: &ModelParams, family: Family) -> Result<ResponsePoint> {
    require_linear_drive(params)?;
    if params.kerr != 0.0 {
        return Err(Error::InvalidParameter { name: "kerr", reason: "linear response needs U = 0".into() });
    }
    let c = EomCoefficients::new(params, family)?;
    let omega = params.drives[0].frequency;
    let x = linear_amplitude(&c, omega);
    Ok(ResponsePoint { detuning: omega - params.omega0, amplitude: x.norm(), phase: x.arg(), stable: None })
}

/// Maximum of `|A|` over the drive frequency, `(A_max, Delta_max)`.
pub fn response_maximum(params: &ModelParams, family: Family) -> Result<(f64, f64)> {
    require_linear_drive(params)?;
    let c = EomCoefficients::new(&ModelParams { kerr: 0.0, ..params.clone() }, family)?;
    let amp = |w: f64| linear_amplitude(&c, w).norm();
    let w0 = params.omega0;
    let (lo, hi) = (1e-3 * w0, 4.0 * w0 + 4.0 * c.linear_damping);
    let grid = 4000;
    let step = (hi - lo) / grid as f64;
    let best = (0..=grid).map(|k| lo + k as f64 * step).max_by(|a, b| amp(*a).total_cmp(&amp(*b))).unwrap();
    let w = golden_max(amp, (best - step).max(lo), (best + step).min(hi), 1e-13);
    Ok((amp(w), w - w0))
}

/// Golden-section search for a maximum of a unimodal `f` on `[a, b]`.
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

/// `(theta, A_max, Delta_max)` for each angle.
pub fn response_maxima(params: &ModelParams, thetas: &[f64], family: Family) -> Result<Vec<(f64, f64, f64)>> {
    thetas
        .iter()
        .map(|&th| {
            let (a, d) = response_maximum(&ModelParams { theta: th, ..params.clone() }, family)?;
            Ok((th, a, d))
        })
        .collect()
}

/// Angle in `[0, pi/2]` at which the resonance maximum is smallest.
pub fn resonance_minimum_angle(params: &ModelParams, family: Family) -> Result<f64> {
    let amax = |th: f64| {
        response_maximum(&ModelParams { theta: th, ..params.clone() }, family).map(|r| r.0).unwrap_or(f64::INFINITY)
    };
    let grid = 200;
    let half_pi = PI / 2.0;
    let step = half_pi / grid as f64;
    let best = (0..=grid).map(|k| k as f64 * step).min_by(|a, b| amax(*a).total_cmp(&amax(*b))).unwrap();
    Ok(golden_max(|th| -amax(th), (best - step).max(0.0), (best + step).min(half_pi), 1e-10))
}
