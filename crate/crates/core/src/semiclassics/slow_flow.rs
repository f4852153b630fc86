//! Rotating-wave slow flow for `x = u cos(omega t) + v sin(omega t)`.
//!
//! Averaging the equation of motion over one drive period gives
//! `du/dt = -G_s/omega`, `dv/dt = G_c/omega` with
//!
//! ```text
//! G_s = kappa v/2 - 3C v A²/8 + Gamma omega u/2 + b omega u A²/8 + F_s/2
//! G_c = kappa u/2 - 3C u A²/8 - Gamma omega v/2 - b omega v A²/8 - F_c/2
//! ```
//!
//! where `kappa = omega² - stiffness`, `A² = u² + v²` and `C` is the cubic
//! coefficient. Fixed points are traced in `(u, v, omega)` by
//! pseudo-arclength continuation.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix3, Vector3};
use num_complex::Complex64 as C64;

use super::{require_linear_drive, EomCoefficients, ResponsePoint};
use crate::error::{Error, Result};
use crate::model::{Family, ModelParams};

/// `(G_s, G_c)` and their derivatives in `u`, `v` and `omega`.
#[derive(Debug, Clone, Copy)]
pub(super) struct Averaged {
    pub(super) g: [f64; 2],
    /// Rows `G_s`, `G_c`; columns `u`, `v`, `omega`.
    pub(super) jac: [[f64; 3]; 3],
}

pub(super) fn averaged(c: &EomCoefficients, u: f64, v: f64, omega: f64) -> Averaged {
    let d = c.at_drive_frequency(omega).drive.expect("slow flow needs a drive");
    let kappa = omega * omega - c.stiffness;
    let a2 = u * u + v * v;
    let (cc, gam, b) = (c.cubic, c.linear_damping, c.nonlinear_damping);
    let q = 3.0 * cc / 8.0;
    let gs = kappa * v / 2.0 - q * v * a2 + gam * omega * u / 2.0 + b * omega * u * a2 / 8.0 + d.sin_part / 2.0;
    let gc = kappa * u / 2.0 - q * u * a2 - gam * omega * v / 2.0 - b * omega * v * a2 / 8.0 - d.cos_part / 2.0;
    let jac = [
        [
            -2.0 * q * u * v + gam * omega / 2.0 + b * omega * (a2 + 2.0 * u * u) / 8.0,
            kappa / 2.0 - q * (a2 + 2.0 * v * v) + b * omega * u * v / 4.0,
            omega * v + gam * u / 2.0 + b * u * a2 / 8.0 + d.sin_part / (2.0 * omega),
        ],
        [
            kappa / 2.0 - q * (a2 + 2.0 * u * u) - b * omega * u * v / 4.0,
            -2.0 * q * u * v - gam * omega / 2.0 - b * omega * (a2 + 2.0 * v * v) / 8.0,
            omega * u - gam * v / 2.0 - b * v * a2 / 8.0,
        ],
        [0.0; 3],
    ];
    Averaged { g: [gs, gc], jac }
}

/// `(du/dt, dv/dt)` of the averaged flow.
pub fn slow_flow_rhs(coeffs: &EomCoefficients, u: f64, v: f64, omega: f64) -> (f64, f64) {
    let a = averaged(coeffs, u, v, omega);
    (-a.g[0] / omega, a.g[1] / omega)
}

/// Jacobian of [`slow_flow_rhs`] in `(u, v)` at a fixed point.
fn flow_jacobian(c: &EomCoefficients, u: f64, v: f64, omega: f64) -> Matrix2<f64> {
    let j = averaged(c, u, v, omega).jac;
    Matrix2::new(-j[0][0], -j[0][1], j[1][0], j[1][1]) / omega
}

/// A fixed point of the slow flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchPoint {
    pub omega: f64,
    pub u: f64,
    pub v: f64,
    pub stable: bool,
    pub eigenvalues: [C64; 2],
}

impl BranchPoint {
    fn new(c: &EomCoefficients, u: f64, v: f64, omega: f64) -> Self {
        let j = flow_jacobian(c, u, v, omega);
        let (tr, det) = (j.trace(), j.determinant());
        let disc = C64::new(tr * tr / 4.0 - det, 0.0).sqrt();
        let eigenvalues = [tr / 2.0 + disc, tr / 2.0 - disc];
        Self { omega, u, v, stable: eigenvalues.iter().all(|e| e.re < 0.0), eigenvalues }
    }

    pub fn amplitude(&self) -> f64 {
        self.u.hypot(self.v)
    }

    /// `x = A cos(omega t + phase)`.
    pub fn phase(&self) -> f64 {
        (-self.v).atan2(self.u)
    }

    pub fn response(&self, omega0: f64) -> ResponsePoint {
        ResponsePoint {
            detuning: self.omega - omega0,
            amplitude: self.amplitude(),
            phase: self.phase(),
            stable: Some(self.stable),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationOptions {
    pub omega_range: (f64, f64),
    /// Drive frequencies at which seeded Newton searches look for
    /// solutions missed by the continuation.
    pub seed_frequencies: usize,
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub max_points: usize,
    /// Absolute tolerance on `(G_s, G_c)`.
    pub tolerance: f64,
}

impl ContinuationOptions {
    pub fn new(omega_range: (f64, f64)) -> Self {
        Self {
            omega_range,
            seed_frequencies: 40,
            initial_step: 1e-2,
            max_step: 5e-2,
            min_step: 1e-7,
            max_points: 20_000,
            tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationResult {
    pub omega0: f64,
    /// Connected solution curves ordered along arclength.
    pub branches: Vec<Vec<BranchPoint>>,
    /// Saddle-node points where the branch turns back in `omega`.
    pub folds: Vec<BranchPoint>,
    coeffs: EomCoefficients,
    tolerance: f64,
}

impl ContinuationResult {
    /// All fixed points at `omega`, polished by Newton.
    pub fn solutions_at(&self, omega: f64) -> Vec<BranchPoint> {
        let mut out: Vec<BranchPoint> = Vec::new();
        for branch in &self.branches {
            for w in branch.windows(2) {
                let (a, b) = (&w[0], &w[1]);
                if (a.omega - omega) * (b.omega - omega) > 0.0 || a.omega == b.omega {
                    continue;
                }
                let s = (omega - a.omega) / (b.omega - a.omega);
                let guess = (a.u + s * (b.u - a.u), a.v + s * (b.v - a.v));
                if let Some(p) = newton_fixed_omega(&self.coeffs, guess, omega, self.tolerance) {
                    push_distinct(&mut out, p);
                }
            }
        }
        out.sort_by(|a, b| a.amplitude().total_cmp(&b.amplitude()));
        out
    }

    /// Frequency intervals with three or more coexisting fixed points.
    pub fn multistable_windows(&self) -> Vec<(f64, f64)> {
        let (lo, hi) = self.range();
        let mut edges: Vec<f64> = self.folds.iter().map(|f| f.omega).collect();
        edges.extend([lo, hi]);
        edges.sort_by(f64::total_cmp);
        edges.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let mut windows: Vec<(f64, f64)> = Vec::new();
        for w in edges.windows(2) {
            if self.solutions_at((w[0] + w[1]) / 2.0).len() >= 3 {
                match windows.last_mut() {
                    Some(last) if last.1 == w[0] => last.1 = w[1],
                    _ => windows.push((w[0], w[1])),
                }
            }
        }
        windows
    }

    fn range(&self) -> (f64, f64) {
        let all = self.branches.iter().flatten().map(|p| p.omega);
        all.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), w| (l.min(w), h.max(w)))
    }
}

fn push_distinct(out: &mut Vec<BranchPoint>, p: BranchPoint) {
    let scale = 1.0 + p.amplitude();
    if out.iter().all(|q| (q.u - p.u).hypot(q.v - p.v) > 1e-7 * scale) {
        out.push(p);
    }
}

fn newton_fixed_omega(c: &EomCoefficients, guess: (f64, f64), omega: f64, tol: f64) -> Option<BranchPoint> {
    let (mut u, mut v) = guess;
    for _ in 0..60 {
        let a = averaged(c, u, v, omega);
        let r = a.g[0].hypot(a.g[1]);
        if r < tol {
            return Some(BranchPoint::new(c, u, v, omega));
        }
        let j = Matrix2::new(a.jac[0][0], a.jac[0][1], a.jac[1][0], a.jac[1][1]);
        let step = j.lu().solve(&nalgebra::Vector2::new(-a.g[0], -a.g[1]))?;
        // damp steps that would more than double the amplitude
        let scale = 1.0 + u.hypot(v);
        let damp = (scale / step.norm()).min(1.0);
        u += damp * step[0];
        v += damp * step[1];
        if !(u.is_finite() && v.is_finite()) {
            return None;
        }
    }
    None
}

/// Newton from eight seeds on rings spanning `[0.1, 10] F/(gamma omega0)`.
fn seeded_solutions(c: &EomCoefficients, params: &ModelParams, omega: f64, tol: f64) -> Vec<BranchPoint> {
    let f = c.drive.map_or(0.0, |d| d.amplitude).abs();
    let base = f / (params.gamma * params.omega0);
    let mut out = Vec::new();
    for k in 0..8 {
        let r = base * 0.1 * 100f64.powf(k as f64 / 7.0);
        let phi = PI * (2.0 * k as f64 + 0.5) / 8.0;
        match newton_fixed_omega(c, (r * phi.cos(), r * phi.sin()), omega, tol) {
            Some(p) => push_distinct(&mut out, p),
            None => log::debug!("seed {k} at omega = {omega} did not converge"),
        }
    }
    out
}

fn tangent(jac: &[[f64; 3]; 3]) -> Vector3<f64> {
    let r0 = Vector3::from(jac[0]);
    let r1 = Vector3::from(jac[1]);
    r0.cross(&r1).normalize()
}

/// Pseudo-arclength corrector; returns the point and the iteration count.
fn correct(c: &EomCoefficients, pred: Vector3<f64>, t: &Vector3<f64>, tol: f64) -> Option<(Vector3<f64>, usize)> {
    let mut y = pred;
    for it in 0..10 {
        let a = averaged(c, y[0], y[1], y[2]);
        let arc = t.dot(&(y - pred));
        if a.g[0].hypot(a.g[1]) < tol && arc.abs() < 1e-12 {
            return Some((y, it));
        }
        let mut m = Matrix3::from_fn(|i, j| a.jac[i][j]);
        m.set_row(2, &t.transpose());
        let dy = m.lu().solve(&Vector3::new(-a.g[0], -a.g[1], -arc))?;
        y += dy;
        if !y.iter().all(|z| z.is_finite()) || y[2] <= 0.0 {
            return None;
        }
    }
    None
}

/// Trace one direction from `start` until the branch leaves the range.
fn trace(c: &EomCoefficients, start: Vector3<f64>, dir: f64, opts: &ContinuationOptions) -> Vec<Vector3<f64>> {
    let (lo, hi) = opts.omega_range;
    let mut pts = vec![start];
    let mut y = start;
    let mut t = tangent(&averaged(c, y[0], y[1], y[2]).jac);
    if t[2] * dir < 0.0 {
        t = -t;
    }
    let mut h = opts.initial_step;
    while pts.len() < opts.max_points {
        let pred = y + h * t;
        let accepted = correct(c, pred, &t, opts.tolerance).and_then(|(next, iters)| {
            let mut tn = tangent(&averaged(c, next[0], next[1], next[2]).jac);
            if tn.dot(&t) < 0.0 {
                tn = -tn;
            }
            (tn.dot(&t) > 0.95).then_some((next, tn, iters))
        });
        match accepted {
            Some((next, tn, iters)) => {
                y = next;
                t = tn;
                pts.push(y);
                if iters <= 3 {
                    h = (1.5 * h).min(opts.max_step);
                }
                if y[2] < lo || y[2] > hi {
                    break;
                }
                if pts.len() > 20 && (y - start).norm() < h && (y - start).dot(&t) < 0.0 {
                    // closed curve
                    break;
                }
            }
            None => {
                h /= 2.0;
                if h < opts.min_step {
                    log::warn!("continuation stalled at omega = {}", y[2]);
                    break;
                }
            }
        }
    }
    pts
}

/// Refine a turning point in `omega` by Newton on `G = 0`, `det dG/d(u,v) = 0`.
fn refine_fold(c: &EomCoefficients, guess: Vector3<f64>) -> Option<Vector3<f64>> {
    let h = |y: &Vector3<f64>| {
        let a = averaged(c, y[0], y[1], y[2]);
        let det = a.jac[0][0] * a.jac[1][1] - a.jac[0][1] * a.jac[1][0];
        Vector3::new(a.g[0], a.g[1], det)
    };
    let mut y = guess;
    for _ in 0..40 {
        let r = h(&y);
        if r[0].hypot(r[1]) < 1e-13 && r[2].abs() < 1e-11 {
            return Some(y);
        }
        let mut m = Matrix3::zeros();
        for j in 0..3 {
            let e = 1e-7 * (1.0 + y[j].abs());
            let mut yp = y;
            let mut ym = y;
            yp[j] += e;
            ym[j] -= e;
            m.set_column(j, &((h(&yp) - h(&ym)) / (2.0 * e)));
        }
        y += m.lu().solve(&-r)?;
    }
    let r = h(&y);
    (r[0].hypot(r[1]) < 1e-10).then_some(y)
}

fn on_branches(result: &ContinuationResult, p: &BranchPoint) -> bool {
    let scale = 1.0 + p.amplitude();
    result.solutions_at(p.omega).iter().any(|q| (q.u - p.u).hypot(q.v - p.v) < 1e-6 * scale)
}

/// Steady response branches of the averaged flow over `opts.omega_range`.
pub fn response_continuation(
    params: &ModelParams,
    family: Family,
    opts: &ContinuationOptions,
) -> Result<ContinuationResult> {
    require_linear_drive(params)?;
    let (lo, hi) = opts.omega_range;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidParameter { name: "omega_range", reason: format!("need 0 < lo < hi, got {lo}..{hi}") });
    }
    let c = EomCoefficients::new(params, family)?;
    let mut result =
        ContinuationResult { omega0: params.omega0, branches: Vec::new(), folds: Vec::new(), coeffs: c, tolerance: opts.tolerance };
    let n = opts.seed_frequencies.max(2);
    for k in 0..n {
        let omega = lo + (hi - lo) * k as f64 / (n - 1) as f64;
        for seed in seeded_solutions(&c, params, omega, opts.tolerance) {
            if on_branches(&result, &seed) {
                continue;
            }
            let start = Vector3::new(seed.u, seed.v, seed.omega);
            let mut back = trace(&c, start, -1.0, opts);
            let fwd = trace(&c, start, 1.0, opts);
            back.reverse();
            back.pop();
            back.extend(fwd);
            let branch: Vec<BranchPoint> = back
                .iter()
                .filter(|y| y[2] >= lo && y[2] <= hi)
                .map(|y| BranchPoint::new(&c, y[0], y[1], y[2]))
                .collect();
            for w in back.windows(3) {
                let (d0, d1) = (w[1][2] - w[0][2], w[2][2] - w[1][2]);
                if d0 * d1 < 0.0 {
                    if let Some(f) = refine_fold(&c, w[1]) {
                        let dup = result.folds.iter().any(|q| (Vector3::new(q.u, q.v, q.omega) - f).norm() < 1e-8);
                        if f[2] >= lo && f[2] <= hi && !dup {
                            result.folds.push(BranchPoint::new(&c, f[0], f[1], f[2]));
                        }
                    }
                }
            }
            result.branches.push(branch);
        }
    }
    if result.branches.iter().all(Vec::is_empty) {
        return Err(Error::EmptyBranch);
    }
    result.folds.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    Ok(result)
}
