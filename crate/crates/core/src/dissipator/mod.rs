//! The time-local Liouvillian of the generalized Caldeira-Leggett master
//! equation and its CL and Lindblad limits.
//!
//! With `hbar = m = 1` the generator splits into five term groups:
//!
//! * (a) `-i[H_S(t), rho]`
//! * (b) decoherence: `-a+ (gamma omega0 cT/4)[x,[x,rho]] - a- (gamma cT/(4 omega0))[p,[p,rho]]`
//! * (c) friction: `-i a+ (gamma/4)[x,{p,rho}] + i a- (gamma/4)[p,{x,rho}]`
//! * (d) nonlinear dressing: `(gamma/4)(b/omega0² [p,{W,rho}] + i s cT/omega0 [x,[W,rho]])`, `W = [V1,p] = i V1'(x)`
//! * (e) drive dressing: `sum_n i gamma k_n F_n cos(omega_n t)/4 (b/omega0² [p,{x^{k_n-1},rho}] + i s cT/omega0 [x,[x^{k_n-1},rho]])`
//!
//! with `a± = 1 ± cos 2θ + sin 2θ`, `b = 1 - cos 2θ` and `s = sin 2θ`.
//!
//! The functions here evaluate the nested commutators literally on dense
//! matrices. [`kernel::LiouvillianKernel`] compiles the same generator into
//! banded left/right products for time stepping.

pub mod banded;
pub mod kernel;

use std::f64::consts::FRAC_PI_4;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{DriveTone, Family, ModelParams, SystemOperators};
use crate::operator::{anticommutator, commutator, OperatorMatrix};

pub use kernel::LiouvillianKernel;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Weight of each dissipative channel at the Lindblad point, `a±(pi/4) = 2`.
pub const LINDBLAD_WEIGHT: f64 = 2.0;

/// Selection of the term groups of the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TermGroups {
    pub unitary: bool,
    pub decoherence: bool,
    pub friction: bool,
    pub nonlinear: bool,
    pub drive: bool,
}

impl TermGroups {
    pub const ALL: TermGroups =
        TermGroups { unitary: true, decoherence: true, friction: true, nonlinear: true, drive: true };
    pub const NONE: TermGroups =
        TermGroups { unitary: false, decoherence: false, friction: false, nonlinear: false, drive: false };

    pub fn only(group: TermGroup) -> Self {
        let mut t = Self::NONE;
        t.set(group, true);
        t
    }

    pub fn contains(&self, group: TermGroup) -> bool {
        match group {
            TermGroup::Unitary => self.unitary,
            TermGroup::Decoherence => self.decoherence,
            TermGroup::Friction => self.friction,
            TermGroup::Nonlinear => self.nonlinear,
            TermGroup::Drive => self.drive,
        }
    }

    pub fn set(&mut self, group: TermGroup, on: bool) {
        match group {
            TermGroup::Unitary => self.unitary = on,
            TermGroup::Decoherence => self.decoherence = on,
            TermGroup::Friction => self.friction = on,
            TermGroup::Nonlinear => self.nonlinear = on,
            TermGroup::Drive => self.drive = on,
        }
    }

    fn intersect(self, other: Self) -> Self {
        Self {
            unitary: self.unitary && other.unitary,
            decoherence: self.decoherence && other.decoherence,
            friction: self.friction && other.friction,
            nonlinear: self.nonlinear && other.nonlinear,
            drive: self.drive && other.drive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermGroup {
    Unitary,
    Decoherence,
    Friction,
    Nonlinear,
    Drive,
}

impl TermGroup {
    pub const ALL: [TermGroup; 5] = [
        TermGroup::Unitary,
        TermGroup::Decoherence,
        TermGroup::Friction,
        TermGroup::Nonlinear,
        TermGroup::Drive,
    ];
}

/// Trigonometric prefactors of the generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleCoefficients {
    pub a_plus: f64,
    pub a_minus: f64,
    pub b: f64,
    pub s: f64,
}

impl AngleCoefficients {
    pub fn new(theta: f64) -> Self {
        let (s2, c2) = (2.0 * theta).sin_cos();
        Self { a_plus: 1.0 + c2 + s2, a_minus: 1.0 - c2 + s2, b: 1.0 - c2, s: s2 }
    }
}

/// Which master-equation family is applied and with which channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipatorSpec {
    pub family: Family,
    pub theta: f64,
    pub gamma: f64,
    pub c_t: f64,
    terms: TermGroups,
}

impl DissipatorSpec {
    pub fn new(family: Family, theta: f64, gamma: f64, c_t: f64) -> Result<Self> {
        if family == Family::Lindblad && (theta - FRAC_PI_4).abs() > 1e-12 {
            return Err(Error::LindbladAngle(theta));
        }
        if !(c_t >= 1.0) {
            return Err(Error::InvalidParameter {
                name: "c_t",
                reason: format!("thermal factor must be >= 1, got {c_t}"),
            });
        }
        Ok(Self { family, theta, gamma, c_t, terms: Self::family_terms(family) })
    }

    pub fn from_params(params: &ModelParams) -> Result<Self> {
        Self::new(params.family, params.theta, params.gamma, params.c_t())
    }

    fn family_terms(family: Family) -> TermGroups {
        match family {
            Family::Gcl => TermGroups::ALL,
            Family::Cl | Family::Lindblad => TermGroups { nonlinear: false, drive: false, ..TermGroups::ALL },
        }
    }

    /// Restrict to a subset of the family's channels. Channels the family does
    /// not carry cannot be switched on.
    pub fn restricted(mut self, groups: TermGroups) -> Self {
        self.terms = Self::family_terms(self.family).intersect(groups);
        self
    }

    pub fn terms(&self) -> TermGroups {
        self.terms
    }

    pub fn angles(&self) -> AngleCoefficients {
        if self.family == Family::Lindblad {
            AngleCoefficients { a_plus: LINDBLAD_WEIGHT, a_minus: LINDBLAD_WEIGHT, b: 1.0, s: 1.0 }
        } else {
            AngleCoefficients::new(self.theta)
        }
    }
}

/// Precomputed operators entering the generator.
#[derive(Debug, Clone)]
pub struct LiouvillianContext {
    pub omega0: f64,
    pub x: OperatorMatrix,
    pub p: OperatorMatrix,
    pub v1_prime: OperatorMatrix,
    pub drives: Vec<(DriveTone, OperatorMatrix)>,
    pub angles: AngleCoefficients,
}

impl LiouvillianContext {
    pub fn new(ops: &SystemOperators, spec: &DissipatorSpec) -> Self {
        Self {
            omega0: ops.space.omega0(),
            x: ops.x.clone(),
            p: ops.p.clone(),
            v1_prime: ops.v1_prime.clone(),
            drives: ops.drives.iter().map(|d| (d.tone, d.x_pow_minus_one.clone())).collect(),
            angles: spec.angles(),
        }
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    /// `[V1, p]`, evaluated as `i V1'(x)`.
    pub fn v1_commutator(&self) -> OperatorMatrix {
        self.v1_prime.scale(I)
    }
}

fn check_dims(ctx: &LiouvillianContext, h: &OperatorMatrix, rho: &OperatorMatrix) -> Result<()> {
    let n = ctx.dim();
    h.ensure_dim(n)?;
    rho.ensure_dim(n)
}

fn unitary(h: &OperatorMatrix, rho: &OperatorMatrix) -> OperatorMatrix {
    commutator(h, rho).scale(-I)
}

fn decoherence(x: &OperatorMatrix, p: &OperatorMatrix, cx: f64, cp: f64, rho: &OperatorMatrix) -> OperatorMatrix {
    let xx = commutator(x, &commutator(x, rho)).scale_real(-cx);
    let pp = commutator(p, &commutator(p, rho)).scale_real(-cp);
    &xx + &pp
}

fn friction(x: &OperatorMatrix, p: &OperatorMatrix, cx: f64, cp: f64, rho: &OperatorMatrix) -> OperatorMatrix {
    let a = commutator(x, &anticommutator(p, rho)).scale(-I * cx);
    let b = commutator(p, &anticommutator(x, rho)).scale(I * cp);
    &a + &b
}

/// `b/omega0² [p,{O,rho}] + i s cT/omega0 [x,[O,rho]]`
fn dressed(ctx: &LiouvillianContext, c_t: f64, o: &OperatorMatrix, rho: &OperatorMatrix) -> OperatorMatrix {
    let w0 = ctx.omega0;
    let AngleCoefficients { b, s, .. } = ctx.angles;
    let drift = commutator(&ctx.p, &anticommutator(o, rho)).scale_real(b / (w0 * w0));
    let diffusion = commutator(&ctx.x, &commutator(o, rho)).scale(I * (s * c_t / w0));
    &drift + &diffusion
}

/// A single term group of the generator, evaluated literally.
pub fn apply_term(
    group: TermGroup,
    ctx: &LiouvillianContext,
    spec: &DissipatorSpec,
    h: &OperatorMatrix,
    rho: &OperatorMatrix,
    t: f64,
) -> Result<OperatorMatrix> {
    check_dims(ctx, h, rho)?;
    let n = ctx.dim();
    let (g, w0, c_t) = (spec.gamma, ctx.omega0, spec.c_t);
    let AngleCoefficients { a_plus, a_minus, .. } = ctx.angles;
    let out = match group {
        TermGroup::Unitary => unitary(h, rho),
        TermGroup::Decoherence => decoherence(
            &ctx.x,
            &ctx.p,
            a_plus * g * w0 * c_t / 4.0,
            a_minus * g * c_t / (4.0 * w0),
            rho,
        ),
        TermGroup::Friction => friction(&ctx.x, &ctx.p, a_plus * g / 4.0, a_minus * g / 4.0, rho),
        TermGroup::Nonlinear => dressed(ctx, c_t, &ctx.v1_commutator(), rho).scale_real(g / 4.0),
        TermGroup::Drive => {
            let mut acc = OperatorMatrix::zeros(n);
            for (tone, xk) in &ctx.drives {
                tone.ensure_supported()?;
                let f = g * tone.order as f64 * tone.amplitude * (tone.frequency * t).cos() / 4.0;
                if f != 0.0 {
                    acc = &acc + &dressed(ctx, c_t, xk, rho).scale(I * f);
                }
            }
            acc
        }
    };
    Ok(out)
}

/// `d rho/dt` from the enabled term groups of `spec`.
pub fn apply_liouvillian(
    ctx: &LiouvillianContext,
    spec: &DissipatorSpec,
    h: &OperatorMatrix,
    rho: &OperatorMatrix,
    t: f64,
) -> Result<OperatorMatrix> {
    check_dims(ctx, h, rho)?;
    if spec.family == Family::Lindblad {
        if (spec.theta - FRAC_PI_4).abs() > 1e-12 {
            return Err(Error::LindbladAngle(spec.theta));
        }
        let terms = spec.terms();
        let h_eff = if terms.unitary { h.clone() } else { OperatorMatrix::zeros(ctx.dim()) };
        let mut out = unitary(&h_eff, rho);
        let (g, w0, c_t) = (spec.gamma, ctx.omega0, spec.c_t);
        if terms.decoherence {
            let d = decoherence(
                &ctx.x,
                &ctx.p,
                LINDBLAD_WEIGHT * g * w0 * c_t / 4.0,
                LINDBLAD_WEIGHT * g * c_t / (4.0 * w0),
                rho,
            );
            out = &out + &d;
        }
        if terms.friction {
            let c = LINDBLAD_WEIGHT * g / 4.0;
            out = &out + &friction(&ctx.x, &ctx.p, c, c, rho);
        }
        return Ok(out);
    }
    let mut out = OperatorMatrix::zeros(ctx.dim());
    for group in TermGroup::ALL {
        if spec.terms().contains(group) {
            out = &out + &apply_term(group, ctx, spec, h, rho, t)?;
        }
    }
    Ok(out)
}

/// Thermal Lindblad generator with position and momentum loss channels at the
/// `theta = pi/4` interpolation point.
pub fn lindblad_rhs(
    h: &OperatorMatrix,
    rho: &OperatorMatrix,
    x: &OperatorMatrix,
    p: &OperatorMatrix,
    gamma: f64,
    omega0: f64,
    c_t: f64,
) -> Result<OperatorMatrix> {
    let n = h.dim();
    rho.ensure_dim(n)?;
    x.ensure_dim(n)?;
    p.ensure_dim(n)?;
    let w = LINDBLAD_WEIGHT;
    let out = &unitary(h, rho)
        + &decoherence(x, p, w * gamma * omega0 * c_t / 4.0, w * gamma * c_t / (4.0 * omega0), rho);
    Ok(&out + &friction(x, p, w * gamma / 4.0, w * gamma / 4.0, rho))
}

/// Split of the friction group into `-i[Lambda, rho]` with
/// `Lambda = (gamma cos 2θ / 4){x, p}` and a purely dissipative remainder.
#[derive(Debug, Clone)]
pub struct SqueezeDecomposition {
    pub lambda: OperatorMatrix,
    pub hamiltonian_part: OperatorMatrix,
    pub dissipative_part: OperatorMatrix,
}

pub fn squeeze_decomposition(
    ctx: &LiouvillianContext,
    spec: &DissipatorSpec,
    rho: &OperatorMatrix,
) -> Result<SqueezeDecomposition> {
    if spec.family == Family::Lindblad {
        return Err(Error::InvalidParameter {
            name: "family",
            reason: "squeezing decomposition is defined for CL and gCL".into(),
        });
    }
    rho.ensure_dim(ctx.dim())?;
    let lambda = anticommutator(&ctx.x, &ctx.p).scale_real(spec.gamma * (2.0 * spec.theta).cos() / 4.0);
    let hamiltonian_part = commutator(&lambda, rho).scale(-I);
    let h0 = OperatorMatrix::zeros(ctx.dim());
    let total = apply_term(TermGroup::Friction, ctx, spec, &h0, rho, 0.0)?;
    let dissipative_part = &total - &hamiltonian_part;
    Ok(SqueezeDecomposition { lambda, hamiltonian_part, dissipative_part })
}

/// Materialized `N² x N²` superoperator at time `t`, acting on row-major
/// vectorized density matrices.
pub fn superoperator_matrix(
    ctx: &LiouvillianContext,
    spec: &DissipatorSpec,
    h: &OperatorMatrix,
    t: f64,
) -> Result<Array2<C64>> {
    let n = ctx.dim();
    let mut out = Array2::zeros((n * n, n * n));
    for col in 0..n * n {
        let mut unit = OperatorMatrix::zeros(n);
        unit.as_array_mut()[[col / n, col % n]] = C64::new(1.0, 0.0);
        let image = apply_liouvillian(ctx, spec, h, &unit, t)?;
        for (row, z) in image.as_array().iter().enumerate() {
            out[[row, col]] = *z;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
