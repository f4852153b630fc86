//! Physical parameters and the driven Kerr system Hamiltonian
//! `H_S(t) = p²/2 + omega0² x²/2 + V1(x) + sum_n F_n cos(omega_n t) x^{k_n}`.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::FockSpace;
use crate::operator::OperatorMatrix;

const ANGLE_TOL: f64 = 1e-12;

/// Master-equation family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Fixed dissipator interpolating between x-x and p-p coupling.
    Cl,
    /// Dissipator dressed by the nonlinear potential and the drives.
    Gcl,
    /// Thermal Lindblad form, only defined at theta = pi/4.
    Lindblad,
}

impl Family {
    pub fn label(&self) -> &'static str {
        match self {
            Family::Cl => "CL",
            Family::Gcl => "gCL",
            Family::Lindblad => "lindblad",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cl" => Ok(Family::Cl),
            "gcl" => Ok(Family::Gcl),
            "lindblad" => Ok(Family::Lindblad),
            other => Err(format!("unknown family `{other}` (expected CL, gCL or lindblad)")),
        }
    }
}

/// One periodic polynomial drive `F cos(omega t) x^k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveTone {
    pub amplitude: f64,
    pub frequency: f64,
    pub order: u32,
}

impl DriveTone {
    pub fn linear(amplitude: f64, frequency: f64) -> Self {
        Self { amplitude, frequency, order: 1 }
    }

    pub fn two_photon(amplitude: f64, frequency: f64) -> Self {
        Self { amplitude, frequency, order: 2 }
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.frequency
    }

    pub fn ensure_supported(&self) -> Result<()> {
        match self.order {
            1 | 2 => Ok(()),
            k => Err(Error::UnsupportedDrive(k)),
        }
    }
}

/// All physical parameters plus the Fock truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub omega0: f64,
    pub gamma: f64,
    pub theta: f64,
    pub n_th: f64,
    /// Kerr coefficient `U`; the quartic potential is `omega0² U x⁴ / 3`.
    pub kerr: f64,
    pub drives: Vec<DriveTone>,
    pub dim: usize,
    pub family: Family,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            omega0: 1.0,
            gamma: 0.2,
            theta: FRAC_PI_4,
            n_th: 0.0,
            kerr: 0.0,
            drives: Vec::new(),
            dim: 30,
            family: Family::Gcl,
        }
    }
}

impl ModelParams {
    /// Thermal factor `c(T) = 2 n_th + 1`.
    pub fn c_t(&self) -> f64 {
        2.0 * self.n_th + 1.0
    }

    pub fn space(&self) -> Result<FockSpace> {
        FockSpace::new(self.dim, self.omega0)
    }

    /// Period of the slowest drive tone, or of the bare oscillator when undriven.
    pub fn drive_period(&self) -> f64 {
        self.drives
            .iter()
            .map(|d| d.period())
            .fold(None, |acc: Option<f64>, p| Some(acc.map_or(p, |a| a.max(p))))
            .unwrap_or(2.0 * std::f64::consts::PI / self.omega0)
    }

    /// Shortest time scale among the drives and the bare oscillator.
    pub fn fastest_period(&self) -> f64 {
        self.drives
            .iter()
            .map(|d| d.period())
            .fold(2.0 * std::f64::consts::PI / self.omega0, f64::min)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: String| Err(Error::InvalidParameter { name, reason });
        if !(self.omega0 > 0.0) || !self.omega0.is_finite() {
            return bad("omega0", format!("must be positive, got {}", self.omega0));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return bad("gamma", format!("must be non-negative, got {}", self.gamma));
        }
        if !(self.theta >= -ANGLE_TOL && self.theta <= std::f64::consts::FRAC_PI_2 + ANGLE_TOL) {
            return bad("theta", format!("must lie in [0, pi/2], got {}", self.theta));
        }
        if !(self.n_th >= 0.0) || !self.n_th.is_finite() {
            return bad("n_th", format!("must be non-negative, got {}", self.n_th));
        }
        if !self.kerr.is_finite() {
            return bad("kerr", "must be finite".into());
        }
        if self.dim < 2 {
            return Err(Error::InvalidDimension(self.dim));
        }
        for d in &self.drives {
            if !(d.frequency > 0.0) || !d.frequency.is_finite() {
                return bad("drive.frequency", format!("must be positive, got {}", d.frequency));
            }
            if d.order == 0 {
                return bad("drive.order", "must be at least 1".into());
            }
            if !d.amplitude.is_finite() {
                return bad("drive.amplitude", "must be finite".into());
            }
        }
        if self.family == Family::Lindblad && (self.theta - FRAC_PI_4).abs() > ANGLE_TOL {
            return Err(Error::LindbladAngle(self.theta));
        }
        Ok(())
    }

    /// Polynomial coefficients of `V1(x) = omega0² U x⁴ / 3`.
    pub fn kerr_coeffs(&self) -> [f64; 5] {
        [0.0, 0.0, 0.0, 0.0, self.omega0 * self.omega0 * self.kerr / 3.0]
    }

    /// Polynomial coefficients of `V1'(x) = 4 omega0² U x³ / 3`.
    pub fn kerr_derivative_coeffs(&self) -> [f64; 4] {
        [0.0, 0.0, 0.0, 4.0 * self.omega0 * self.omega0 * self.kerr / 3.0]
    }
}

/// `V1(x) = (omega0² U / 3) x⁴`.
pub fn kerr_potential(params: &ModelParams) -> Result<OperatorMatrix> {
    Ok(params.space()?.poly_of_x(&params.kerr_coeffs()))
}

/// Undriven Hamiltonian `p²/2 + omega0² x²/2 + V1(x)`, assembled on a padded basis.
pub fn static_hamiltonian(params: &ModelParams) -> Result<OperatorMatrix> {
    let space = params.space()?;
    let pad = 4;
    let big = space.padded(pad);
    let p = big.p();
    let kinetic = p.dot(&p).scale_real(0.5);
    let w2 = params.omega0 * params.omega0;
    let mut coeffs = params.kerr_coeffs();
    coeffs[2] += 0.5 * w2;
    let potential = big.poly_of_x_padded(&coeffs, 0);
    Ok((&kinetic + &potential).truncate(space.dim()))
}

/// `x^k` for a drive tone, assembled with padding.
pub fn drive_operator(space: &FockSpace, tone: &DriveTone) -> Result<OperatorMatrix> {
    tone.ensure_supported()?;
    let mut coeffs = vec![0.0; tone.order as usize + 1];
    coeffs[tone.order as usize] = 1.0;
    Ok(space.poly_of_x(&coeffs))
}

/// `H_S(t)` of the driven Kerr oscillator.
pub fn hamiltonian_at(params: &ModelParams, t: f64) -> Result<OperatorMatrix> {
    let ops = SystemOperators::build(params)?;
    Ok(ops.hamiltonian_at(t))
}

/// Operators shared by the Hamiltonian and the dissipator, built once per model.
#[derive(Debug, Clone)]
pub struct SystemOperators {
    pub space: FockSpace,
    pub x: OperatorMatrix,
    pub p: OperatorMatrix,
    pub h_static: OperatorMatrix,
    /// `V1'(x)`; the commutator `[V1, p]` equals `i V1'(x)`.
    pub v1_prime: OperatorMatrix,
    pub drives: Vec<DriveOperators>,
}

#[derive(Debug, Clone)]
pub struct DriveOperators {
    pub tone: DriveTone,
    /// `x^k`, entering the Hamiltonian.
    pub x_pow: OperatorMatrix,
    /// `x^{k-1}`, entering the drive-dressed dissipator.
    pub x_pow_minus_one: OperatorMatrix,
}

impl SystemOperators {
    pub fn build(params: &ModelParams) -> Result<Self> {
        params.validate()?;
        let space = params.space()?;
        let drives = params
            .drives
            .iter()
            .map(|tone| {
                let x_pow = drive_operator(&space, tone)?;
                let mut c = vec![0.0; tone.order as usize];
                c[tone.order as usize - 1] = 1.0;
                Ok(DriveOperators { tone: *tone, x_pow, x_pow_minus_one: space.poly_of_x(&c) })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            space,
            x: space.x(),
            p: space.p(),
            h_static: static_hamiltonian(params)?,
            v1_prime: space.poly_of_x(&params.kerr_derivative_coeffs()),
            drives,
        })
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn hamiltonian_at(&self, t: f64) -> OperatorMatrix {
        let mut h = self.h_static.clone();
        for d in &self.drives {
            let c = d.tone.amplitude * (d.tone.frequency * t).cos();
            if c != 0.0 {
                h = &h + &d.x_pow.scale(C64::new(c, 0.0));
            }
        }
        h
    }
}

/// Raw linear drive amplitude from the rescaled strength
/// `F_q = F / (2 sqrt(2 omega0))` (natural units).
pub fn fq_to_f(fq: f64, omega0: f64) -> f64 {
    2.0 * (2.0 * omega0).sqrt() * fq
}

pub fn f_to_fq(f: f64, omega0: f64) -> f64 {
    f / (2.0 * (2.0 * omega0).sqrt())
}

/// Two-photon amplitude from the rescaled `G = F2 / (2 omega0)`.
pub fn g_to_f2(g: f64, omega0: f64) -> f64 {
    2.0 * omega0 * g
}

pub fn f2_to_g(f2: f64, omega0: f64) -> f64 {
    f2 / (2.0 * omega0)
}
