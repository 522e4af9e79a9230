//! Entry distributions for the data matrix `X` and fourth-moment quantities.

use std::ops::Range;

use faer::{Mat, MatRef};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::Serialize;

use crate::error::{Error, Result};

/// Standardized (mean 0, variance 1) entry laws.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum EntryDistribution {
    Gaussian,
    Rademacher,
    /// Uniform on `[-√3, √3]`.
    UniformScaled,
    /// Student t rescaled by `√((dof − 2)/dof)`.
    StudentT {
        dof: f64,
    },
}

impl EntryDistribution {
    /// Rejects Student t with `dof < 5`, whose tail `τ⁴ P(|x| > τ)` does
    /// not vanish.
    pub fn validate(&self) -> Result<()> {
        match *self {
            EntryDistribution::StudentT { dof } if !(dof >= 5.0) => Err(Error::TailConditionError(dof)),
            _ => Ok(()),
        }
    }

    pub fn fourth_moment(&self) -> f64 {
        match *self {
            EntryDistribution::Gaussian => 3.0,
            EntryDistribution::Rademacher => 1.0,
            EntryDistribution::UniformScaled => 1.8,
            EntryDistribution::StudentT { dof } => 3.0 * (dof - 2.0) / (dof - 4.0),
        }
    }

    fn sampler(&self) -> Sampler {
        match *self {
            EntryDistribution::Gaussian => Sampler::Gaussian,
            EntryDistribution::Rademacher => Sampler::Rademacher,
            EntryDistribution::UniformScaled => Sampler::Uniform,
            EntryDistribution::StudentT { dof } => {
                Sampler::StudentT(StudentT::new(dof).expect("dof validated"), ((dof - 2.0) / dof).sqrt())
            }
        }
    }
}

enum Sampler {
    Gaussian,
    Rademacher,
    Uniform,
    StudentT(StudentT<f64>, f64),
}

impl Sampler {
    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Gaussian => StandardNormal.sample(rng),
            // Sign of a normal draw: same stream consumption as Gaussian, so
            // equal seeds give coupled Gaussian/Rademacher matrices.
            Sampler::Rademacher => {
                let g: f64 = StandardNormal.sample(rng);
                if g < 0.0 {
                    -1.0
                } else {
                    1.0
                }
            }
            Sampler::Uniform => rng.random_range(-3f64.sqrt()..3f64.sqrt()),
            Sampler::StudentT(t, scale) => t.sample(rng) * scale,
        }
    }
}

/// Exact `E x⁴` of the standardized law.
pub fn fourth_moment(dist: &EntryDistribution) -> f64 {
    dist.fourth_moment()
}

/// RNG for replicate `stream` of root `seed`: ChaCha8 keyed by the seed, one
/// independent stream per replicate index.
pub fn replicate_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Debug)]
pub struct DataMatrix {
    pub entries: Mat<f64>,
    pub seed: u64,
    pub stream: u64,
    pub distribution: EntryDistribution,
}

/// `p × n` matrix of i.i.d. entries from stream 0 of `seed`.
pub fn draw_entries(dist: &EntryDistribution, p: usize, n: usize, seed: u64) -> Result<DataMatrix> {
    draw_entries_stream(dist, p, n, seed, 0)
}

/// As [`draw_entries`] on an explicit replicate stream. Entries are filled
/// column by column.
pub fn draw_entries_stream(dist: &EntryDistribution, p: usize, n: usize, seed: u64, stream: u64) -> Result<DataMatrix> {
    dist.validate()?;
    if p == 0 || n == 0 {
        return Err(Error::DimensionError(format!("data matrix must be nonempty, got {p}x{n}")));
    }
    let sampler = dist.sampler();
    let mut rng = replicate_rng(seed, stream);
    let mut entries = Mat::zeros(p, n);
    for j in 0..n {
        for i in 0..p {
            entries[(i, j)] = sampler.draw(&mut rng);
        }
    }
    Ok(DataMatrix { entries, seed, stream, distribution: *dist })
}

/// `κ_{x,k} = Σ_t (Σ_{i∈J_k} u_{ti}²)² · (E x⁴ − 3)`, where `J_k` is a
/// range of columns of `U1`. This equals the sum of the diagonal
/// `Σ u⁴` terms and the cross terms over distinct column pairs.
pub fn kappa_x(u1: MatRef<'_, f64>, group: Range<usize>, fourth_moment: f64) -> Result<f64> {
    if group.is_empty() || group.end > u1.ncols() {
        return Err(Error::IndexError(format!("group {group:?} out of range for {} columns", u1.ncols())));
    }
    let gram = u1.transpose() * u1;
    let mut dev: f64 = 0.0;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let id = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((gram[(i, j)] - id).abs());
        }
    }
    if dev > 1e-10 {
        return Err(Error::InvalidBasis(dev));
    }
    let localization: f64 = (0..u1.nrows())
        .map(|t| {
            let row: f64 = group.clone().map(|i| u1[(t, i)] * u1[(t, i)]).sum();
            row * row
        })
        .sum();
    Ok(localization * (fourth_moment - 3.0))
}
