//! Centers and CLT variances of spiked-eigenvector projection norms.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{psi, psi_prime, BulkSpectrum, SpectralRegime};
use crate::stieltjes::companion_derivatives;

/// `ρ(z) = m̲₁(z) + z m̲₂(z)` and its derivative `2 m̲₂ + 2 z m̲₃`, evaluated
/// at `z = ψ(d²)`, along with `ψ` and `ψ'`.
struct RhoEval {
    psi: f64,
    psi_prime: f64,
    m: [f64; 4],
    rho: f64,
    rho_prime: f64,
}

fn rho_at(d2: f64, c: f64, bulk: &BulkSpectrum) -> Result<RhoEval> {
    let dpsi = psi_prime(d2, c, bulk)?;
    if !(dpsi > 0.0) {
        return Err(Error::SpikeNotDetectable(d2, dpsi));
    }
    let z = psi(d2, c, bulk)?;
    let m = companion_derivatives(z, c, bulk)?;
    Ok(RhoEval { psi: z, psi_prime: dpsi, m, rho: m[0] + z * m[1], rho_prime: 2.0 * m[1] + 2.0 * z * m[2] })
}

/// Consistency coefficient `ν(d²) = 1/(1 + d² ρ(ψ(d²)))`.
pub fn nu(d2: f64, c: f64, bulk: &BulkSpectrum) -> Result<f64> {
    let r = rho_at(d2, c, bulk)?;
    Ok(1.0 / (1.0 + d2 * r.rho))
}

/// `dν/dd² = −ν² (ρ + d² ρ'(ψ) ψ')`.
pub fn nu_prime(d2: f64, c: f64, bulk: &BulkSpectrum) -> Result<f64> {
    let r = rho_at(d2, c, bulk)?;
    let v = 1.0 / (1.0 + d2 * r.rho);
    Ok(-v * v * (r.rho + d2 * r.rho_prime * r.psi_prime))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectionLaw {
    pub spike: f64,
    pub multiplicity: usize,
    pub kappa: f64,
    pub psi: f64,
    pub psi_n: f64,
    pub center_limit: f64,
    pub center_n: f64,
    pub sigma_k: f64,
    pub rho_k: f64,
    pub theta_k: f64,
    /// Variance of `√n (‖ξ‖² − center_n)`.
    pub variance: f64,
}

/// Limit law of the projection norm for a spike `d²` of multiplicity `m_k`.
/// The variance is evaluated in the `limit` regime and `center_n` in the
/// `finite` one.
pub fn projection_law(
    d2: f64,
    m_k: usize,
    kappa: f64,
    limit: &SpectralRegime,
    finite: &SpectralRegime,
) -> Result<ProjectionLaw> {
    if m_k == 0 || !kappa.is_finite() {
        return Err(Error::DimensionError(format!("multiplicity {m_k}, kappa {kappa}")));
    }
    let r = rho_at(d2, limit.ratio, &limit.bulk)?;
    let [_, m2, m3, m4] = r.m;
    let z = r.psi;
    let sigma = m2 + 2.0 * z * m3 + z * z * m4;
    let mk = m_k as f64;
    let theta = d2 * d2 * (2.0 * sigma / mk + kappa * r.rho * r.rho / (mk * mk));
    let denom = 1.0 + d2 * r.rho;
    let rn = rho_at(d2, finite.ratio, &finite.bulk)?;
    Ok(ProjectionLaw {
        spike: d2,
        multiplicity: m_k,
        kappa,
        psi: z,
        psi_n: rn.psi,
        center_limit: 1.0 / denom,
        center_n: 1.0 / (1.0 + d2 * rn.rho),
        sigma_k: sigma,
        rho_k: r.rho,
        theta_k: theta,
        variance: theta / denom.powi(4),
    })
}
