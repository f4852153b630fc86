//! Time-domain frequency sweeps of the equation of motion.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::{integrate, require_linear_drive, EomCoefficients, SemiclassicalState};
use crate::error::Result;
use crate::model::{Family, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepDirection {
    /// Increasing drive frequency.
    Forward,
    /// Decreasing drive frequency.
    Backward,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub dwell_periods: usize,
    /// Trailing periods used for the first-harmonic amplitude.
    pub average_periods: usize,
    /// Trailing periods checked for residual drift.
    pub drift_periods: usize,
    pub drift_tol: f64,
    pub steps_per_period: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { dwell_periods: 300, average_periods: 50, drift_periods: 20, drift_tol: 1e-4, steps_per_period: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub omega: f64,
    pub amplitude: f64,
    /// `x ≈ A cos(omega t + phase)` over the averaging window.
    pub phase: f64,
    /// Relative spread of per-period amplitudes over the drift window.
    pub drift: f64,
    /// Set when `drift` exceeds the tolerance.
    pub unsettled: bool,
}

/// Dwell at each frequency in sweep order, starting from rest and carrying
/// the state from one frequency to the next. Points come back in sweep order.
pub fn hysteresis_sweep(
    params: &ModelParams,
    omegas: &[f64],
    family: Family,
    direction: SweepDirection,
    opts: &SweepOptions,
) -> Result<Vec<SweepPoint>> {
    require_linear_drive(params)?;
    let base = EomCoefficients::new(params, family)?;
    let mut order: Vec<f64> = omegas.to_vec();
    order.sort_by(f64::total_cmp);
    if direction == SweepDirection::Backward {
        order.reverse();
    }
    let m = opts.steps_per_period.max(8);
    let tail = opts.average_periods.max(opts.drift_periods).min(opts.dwell_periods);
    let mut state = SemiclassicalState::new(0.0, 0.0, 0.0);
    let mut out = Vec::with_capacity(order.len());
    for omega in order {
        let c = base.at_drive_frequency(omega);
        let dt = 2.0 * PI / omega / m as f64;
        // per-period first-harmonic sums over the trailing window
        let mut sums = vec![C64::new(0.0, 0.0); tail];
        let first_tail = (opts.dwell_periods - tail) * m;
        let mut k = 0usize;
        let end = integrate(SemiclassicalState { t: 0.0, ..state }, &c, dt, opts.dwell_periods * m, |s| {
            if k >= first_tail && k < opts.dwell_periods * m {
                let j = k % m;
                let phase = 2.0 * PI * j as f64 / m as f64;
                sums[(k - first_tail) / m] += s.x * C64::from_polar(1.0, -phase);
            }
            k += 1;
        })?;
        state = end;
        let amp_of = |z: C64, periods: usize| 2.0 * z / (periods * m) as f64;
        let avg = opts.average_periods.min(tail);
        let total: C64 = sums[tail - avg..].iter().sum();
        let z = amp_of(total, avg);
        let per: Vec<f64> = sums[tail - opts.drift_periods.min(tail)..].iter().map(|s| amp_of(*s, 1).norm()).collect();
        let (mn, mx) = per.iter().fold((f64::INFINITY, 0f64), |(a, b), &v| (a.min(v), b.max(v)));
        let drift = if z.norm() > 0.0 { (mx - mn) / z.norm() } else { 0.0 };
        let unsettled = drift > opts.drift_tol;
        if unsettled {
            log::warn!("sweep point omega = {omega} still drifting ({drift:.2e})");
        }
        out.push(SweepPoint { omega, amplitude: z.norm(), phase: z.arg(), drift, unsettled });
    }
    Ok(out)
}
