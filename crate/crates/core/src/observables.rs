//! Observables of a state: energy-eigenstate populations and their effective
//! temperature, mean occupation, phase-space covariance, and percentile
//! statistics over one drive period.

use crate::error::{Error, Result};
use crate::linalg::hermitian_eigen;
use crate::operator::{anticommutator, OperatorMatrix};
use crate::propagator::{DensityMatrix, SteadyStateReport};

/// Levels closest to the truncation edge that are never reported.
pub const TRUNCATION_GUARD: usize = 5;

/// `(E_n, P_n)` with `P_n = <psi_n|rho|psi_n>` for the eigenstates of
/// `h_static`, ascending in energy, for `n < N - 5`.
pub fn populations(rho: &OperatorMatrix, h_static: &OperatorMatrix) -> Result<Vec<(f64, f64)>> {
    let n = h_static.dim();
    rho.ensure_dim(n)?;
    let (energies, vectors) = hermitian_eigen(h_static);
    let r = rho.as_array();
    let keep = n.saturating_sub(TRUNCATION_GUARD);
    Ok((0..keep)
        .map(|k| {
            let v = vectors.column(k);
            let rv = r.dot(&v);
            let p: f64 = v.iter().zip(rv.iter()).map(|(a, b)| (a.conj() * b).re).sum();
            (energies[k], p)
        })
        .collect())
}

/// How the levels enter the log-linear Boltzmann fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FitWeighting {
    /// Every qualifying level counts equally.
    #[default]
    Uniform,
    /// Each level is weighted by its population.
    Population,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperatureFitOptions {
    /// Levels with `P_n <= p_floor` are excluded.
    pub p_floor: f64,
    pub weighting: FitWeighting,
    pub min_levels: usize,
}

impl Default for TemperatureFitOptions {
    fn default() -> Self {
        Self { p_floor: 1e-8, weighting: FitWeighting::Uniform, min_levels: 3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationFit {
    pub levels: Vec<(f64, f64)>,
    pub t_eff: f64,
    /// Weighted RMS deviation of `ln P_n` from the fitted line.
    pub fit_residual: f64,
    pub levels_used: usize,
}

/// Boltzmann fit `ln P_n = c - E_n / T_eff` over the levels above the floor.
pub fn effective_temperature(pops: &[(f64, f64)], opts: &TemperatureFitOptions) -> Result<PopulationFit> {
    let used: Vec<(f64, f64, f64)> = pops
        .iter()
        .filter(|(_, p)| *p > opts.p_floor)
        .map(|&(e, p)| {
            let w = match opts.weighting {
                FitWeighting::Uniform => 1.0,
                FitWeighting::Population => p,
            };
            (e, p.ln(), w)
        })
        .collect();
    let needed = opts.min_levels.max(2);
    if used.len() < needed {
        return Err(Error::TooFewLevels { found: used.len(), needed });
    }
    let sw: f64 = used.iter().map(|u| u.2).sum();
    let me = used.iter().map(|u| u.2 * u.0).sum::<f64>() / sw;
    let ml = used.iter().map(|u| u.2 * u.1).sum::<f64>() / sw;
    let sxx: f64 = used.iter().map(|u| u.2 * (u.0 - me).powi(2)).sum();
    let sxy: f64 = used.iter().map(|u| u.2 * (u.0 - me) * (u.1 - ml)).sum();
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return Err(Error::NoTemperature(slope));
    }
    let intercept = ml - slope * me;
    let rss: f64 = used.iter().map(|u| u.2 * (u.1 - intercept - slope * u.0).powi(2)).sum();
    Ok(PopulationFit {
        levels: pops.to_vec(),
        t_eff: -1.0 / slope,
        fit_residual: (rss / sw).sqrt(),
        levels_used: used.len(),
    })
}

/// `<n> = Tr[rho (omega0 x²/2 + p²/(2 omega0) - 1/2)]`.
pub fn occupation(rho: &OperatorMatrix, x: &OperatorMatrix, p: &OperatorMatrix, omega0: f64) -> Result<f64> {
    let n = rho.dim();
    x.ensure_dim(n)?;
    p.ensure_dim(n)?;
    let rho = DensityMatrix::from_raw(rho.clone());
    let x2 = rho.expect(&x.dot(x)).re;
    let p2 = rho.expect(&p.dot(p)).re;
    Ok(omega0 * x2 / 2.0 + p2 / (2.0 * omega0) - 0.5)
}

/// Symmetrized covariance of `(x, p)` and its eigenvalue summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceSummary {
    pub sigma: [[f64; 2]; 2],
    pub nu_min: f64,
    pub nu_max: f64,
    /// `sqrt(nu_min nu_max)`; NaN when the covariance is not positive definite.
    pub nu_geo: f64,
    /// `nu_max / nu_min`; NaN when the covariance is not positive definite.
    pub anisotropy: f64,
    pub means: (f64, f64),
    /// False when an eigenvalue of the covariance is not positive.
    pub physical: bool,
}

impl CovarianceSummary {
    /// Amount by which `nu_geo` falls below the vacuum bound 1/2, if it does.
    pub fn uncertainty_violation(&self, tol: f64) -> Option<f64> {
        let deficit = 0.5 - self.nu_geo;
        (!self.physical || deficit > tol).then_some(deficit)
    }
}

pub fn covariance(rho: &OperatorMatrix, x: &OperatorMatrix, p: &OperatorMatrix) -> Result<CovarianceSummary> {
    let n = rho.dim();
    x.ensure_dim(n)?;
    p.ensure_dim(n)?;
    let rho = DensityMatrix::from_raw(rho.clone());
    let mx = rho.expect(x).re;
    let mp = rho.expect(p).re;
    let sxx = rho.expect(&x.dot(x)).re - mx * mx;
    let spp = rho.expect(&p.dot(p)).re - mp * mp;
    let sxp = rho.expect(&anticommutator(x, p)).re / 2.0 - mx * mp;
    let half_tr = (sxx + spp) / 2.0;
    let disc = (((sxx - spp) / 2.0).powi(2) + sxp * sxp).sqrt();
    let (nu_min, nu_max) = (half_tr - disc, half_tr + disc);
    let physical = nu_min > 0.0;
    if !physical {
        log::warn!("covariance not positive definite: eigenvalues {nu_min:.3e}, {nu_max:.3e}");
    }
    let (nu_geo, anisotropy) =
        if physical { ((nu_min * nu_max).sqrt(), nu_max / nu_min) } else { (f64::NAN, f64::NAN) };
    Ok(CovarianceSummary {
        sigma: [[sxx, sxp], [sxp, spp]],
        nu_min,
        nu_max,
        nu_geo,
        anisotropy,
        means: (mx, mp),
        physical,
    })
}

/// Mean and 10th/90th percentiles of a sampled cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicromotionStats {
    pub mean: f64,
    pub p10: f64,
    pub p90: f64,
}

pub const MIN_SNAPSHOTS: usize = 20;

pub fn micromotion_stats(values: &[f64]) -> Result<MicromotionStats> {
    if values.len() < MIN_SNAPSHOTS {
        return Err(Error::InvalidParameter {
            name: "snapshots",
            reason: format!("need at least {MIN_SNAPSHOTS} samples, got {}", values.len()),
        });
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(MicromotionStats { mean, p10: percentile(&sorted, 0.1), p90: percentile(&sorted, 0.9) })
}

/// Linear interpolation between order statistics at rank `q (K - 1)`.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Occupation and covariance statistics over the recorded steady-state cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleSummary {
    pub occupation: MicromotionStats,
    pub nu_geo: MicromotionStats,
    pub anisotropy: MicromotionStats,
    /// Snapshots with a non-positive covariance.
    pub unphysical: usize,
}

pub fn cycle_summary(report: &SteadyStateReport, x: &OperatorMatrix, p: &OperatorMatrix, omega0: f64) -> Result<CycleSummary> {
    let mut occ = Vec::with_capacity(report.cycle.len());
    let mut geo = Vec::with_capacity(report.cycle.len());
    let mut ani = Vec::with_capacity(report.cycle.len());
    let mut unphysical = 0;
    for (_, rho) in &report.cycle {
        occ.push(occupation(rho, x, p, omega0)?);
        let c = covariance(rho, x, p)?;
        if !c.physical {
            unphysical += 1;
        }
        geo.push(c.nu_geo);
        ani.push(c.anisotropy);
    }
    Ok(CycleSummary {
        occupation: micromotion_stats(&occ)?,
        nu_geo: micromotion_stats(&geo)?,
        anisotropy: micromotion_stats(&ani)?,
        unphysical,
    })
}
