//! Sample covariance, descending symmetric eigendecomposition, spike-to-rank
//! matching and eigenvector projection norms.

use std::ops::Range;

use faer::{ColRef, Mat, MatRef};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{PopulationModel, Side};

const SYMMETRY_TOL: f64 = 1e-10;
const UNIT_TOL: f64 = 1e-8;

/// Eigenpairs of `B` with `l₁ ≥ … ≥ l_p`; column `i` pairs with `l_i`.
#[derive(Clone, Debug)]
pub struct SampleSpectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: Mat<f64>,
}

impl SampleSpectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> MatRef<'_, f64> {
        self.eigenvectors.as_ref()
    }

    pub fn eigenvector(&self, i: usize) -> ColRef<'_, f64> {
        self.eigenvectors.col(i)
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// `B = (1/n) T X Xᵀ Tᵀ`, symmetrized. A diagonal `T` is applied as a row
/// scaling.
pub fn sample_covariance(t: MatRef<'_, f64>, x: MatRef<'_, f64>) -> Result<Mat<f64>> {
    let (p, n) = (x.nrows(), x.ncols());
    if t.nrows() != t.ncols() || t.ncols() != p {
        return Err(Error::DimensionError(format!("T is {}x{} but X has {p} rows", t.nrows(), t.ncols())));
    }
    if n == 0 {
        return Err(Error::DimensionError("X has no columns".into()));
    }
    let diagonal = (0..p).all(|j| (0..p).all(|i| i == j || t[(i, j)] == 0.0));
    let y = if diagonal { Mat::from_fn(p, n, |i, j| t[(i, i)] * x[(i, j)]) } else { t * x };
    let mut b = &y * y.transpose();
    let scale = 1.0 / n as f64;
    for j in 0..p {
        for i in j..p {
            let v = 0.5 * (b[(i, j)] + b[(j, i)]) * scale;
            b[(i, j)] = v;
            b[(j, i)] = v;
        }
    }
    Ok(b)
}

/// Symmetric eigendecomposition with eigenvalues in descending order.
pub fn eig_desc(b: MatRef<'_, f64>) -> Result<SampleSpectrum> {
    let p = b.nrows();
    if b.ncols() != p {
        return Err(Error::DimensionError(format!("matrix is {}x{}", p, b.ncols())));
    }
    let mut asym: f64 = 0.0;
    let mut size: f64 = 0.0;
    for j in 0..p {
        for i in 0..p {
            asym = asym.max((b[(i, j)] - b[(j, i)]).abs());
            size = size.max(b[(i, j)].abs());
        }
    }
    if asym > SYMMETRY_TOL * size.max(1.0) {
        return Err(Error::SymmetryError(asym));
    }
    let evd = b.self_adjoint_eigen(faer::Side::Lower).map_err(|_| Error::EigenFailure)?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let eigenvalues: Vec<f64> = (0..p).rev().map(|i| s[i]).collect();
    let eigenvectors = Mat::from_fn(p, p, |i, j| u[(i, p - 1 - j)]);
    Ok(SampleSpectrum { eigenvalues, eigenvectors })
}

/// Sample rank sets `J_k` (0-based) for each spike group in model order.
/// Upper spikes take the top ranks; lower spikes take the bottom ranks with
/// the smallest spike at the very bottom.
pub fn match_spike_indices(model: &PopulationModel, n: usize) -> Result<Vec<Range<usize>>> {
    let p = model.p();
    let spikes = model.spikes();
    if spikes.iter().any(|s| s.side == Side::Lower) && p >= n {
        return Err(Error::DimensionError(format!("lower spikes need p < n to be matched (p = {p}, n = {n})")));
    }
    let lower_total: usize = spikes.iter().filter(|s| s.side == Side::Lower).map(|s| s.multiplicity).sum();
    let mut top = 0;
    let mut bottom = p - lower_total;
    let mut out = Vec::with_capacity(spikes.len());
    for s in spikes {
        let r = match s.side {
            Side::Upper => {
                let r = top..top + s.multiplicity;
                top = r.end;
                r
            }
            Side::Lower => {
                let r = bottom..bottom + s.multiplicity;
                bottom = r.end;
                r
            }
        };
        out.push(r);
    }
    if top > p - lower_total {
        return Err(Error::InternalError("upper and lower rank sets overlap".into()));
    }
    Ok(out)
}

/// `‖ξ‖² = Σ_j ⟨v_j, f⟩²` over the columns of `v_group`, clamped to [0, 1].
pub fn projection_norm(v_group: MatRef<'_, f64>, f: ColRef<'_, f64>) -> Result<f64> {
    if v_group.nrows() != f.nrows() {
        return Err(Error::DimensionError(format!("basis has {} rows, vector has {}", v_group.nrows(), f.nrows())));
    }
    let norm = f.norm_l2();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::InvalidVector(norm));
    }
    let s: f64 = (0..v_group.ncols())
        .map(|j| {
            let ip = v_group.col(j).transpose() * f;
            ip * ip
        })
        .sum();
    Ok(s.clamp(0.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProjectionStats {
    pub spike_group: usize,
    pub sample_index: usize,
    pub norm_sq: f64,
}

/// Projection of sample eigenvector `i` onto the population eigenspace of
/// group `k` (columns `slots` of `V`).
pub fn group_projection(
    spectrum: &SampleSpectrum,
    v: MatRef<'_, f64>,
    k: usize,
    slots: Range<usize>,
    i: usize,
) -> Result<ProjectionStats> {
    if i >= spectrum.len() || slots.end > v.ncols() {
        return Err(Error::IndexError(format!("sample index {i} or slots {slots:?} out of range")));
    }
    let norm_sq = projection_norm(v.subcols(slots.start, slots.len()), spectrum.eigenvector(i))?;
    Ok(ProjectionStats { spike_group: k, sample_index: i, norm_sq })
}
