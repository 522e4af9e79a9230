//! Population covariance models `Σ = T Tᵀ` with a finite set of spiked
//! eigenvalues over a bulk spectrum `H`, and their factor decompositions
//! `T = V · diag(D1, D2) · Uᵀ`.

use std::ops::Range;

use faer::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};

const WEIGHT_TOL: f64 = 1e-12;

/// Which side of the bulk support a spike sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Upper,
    Lower,
}

/// A population spiked eigenvalue `d_k²` with multiplicity `m_k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpikeSpec {
    pub value: f64,
    pub multiplicity: usize,
    pub side: Side,
}

/// Finite atom mixture `H = Σ w_t δ_t`. Atoms are kept sorted by
/// descending eigenvalue.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BulkSpectrum {
    atoms: Vec<(f64, f64)>,
}

impl BulkSpectrum {
    pub fn new(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidBulk("no atoms".into()));
        }
        for &(t, w) in &atoms {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidBulk(format!("eigenvalue {t} must be positive and finite")));
            }
            if !(w > 0.0 && w <= 1.0) {
                return Err(Error::InvalidBulk(format!("weight {w} must lie in (0, 1]")));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidBulk(format!("weights sum to {total}, expected 1")));
        }
        atoms.sort_by(|a, b| b.0.total_cmp(&a.0));
        if atoms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidBulk("duplicate atom".into()));
        }
        Ok(Self { atoms })
    }

    pub fn point_mass(value: f64) -> Result<Self> {
        Self::new(vec![(value, 1.0)])
    }

    /// Empirical spectral distribution of a list of eigenvalues.
    pub fn from_eigenvalues(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidBulk("no eigenvalues".into()));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let n = sorted.len() as f64;
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        for v in sorted {
            match atoms.last_mut() {
                Some(last) if last.0 == v => last.1 += 1.0,
                _ => atoms.push((v, 1.0)),
            }
        }
        for a in &mut atoms {
            a.1 /= n;
        }
        Self::new(atoms)
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn max(&self) -> f64 {
        self.atoms[0].0
    }

    pub fn min(&self) -> f64 {
        self.atoms[self.atoms.len() - 1].0
    }

    /// Integer slot counts for `slots` bulk eigenvalues, allocated by largest
    /// remainder. Ties go to the smaller eigenvalue, so an odd remainder of a
    /// two-atom half/half bulk lands in the lower block.
    pub fn allocate(&self, slots: usize) -> Vec<usize> {
        let exact: Vec<f64> = self.atoms.iter().map(|a| a.1 * slots as f64).collect();
        let mut counts: Vec<usize> = exact.iter().map(|x| (x + 1e-9).floor() as usize).collect();
        let mut left = slots.saturating_sub(counts.iter().sum());
        let mut order: Vec<usize> = (0..counts.len()).collect();
        order.sort_by(|&a, &b| {
            let fa = exact[a] - counts[a] as f64;
            let fb = exact[b] - counts[b] as f64;
            fb.total_cmp(&fa).then(b.cmp(&a))
        });
        for &i in order.iter().cycle() {
            if left == 0 {
                break;
            }
            counts[i] += 1;
            left -= 1;
        }
        counts
    }
}

/// How the population eigenvectors are laid out.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Rotation {
    /// `U = V = I`; Σ is diagonal.
    Identity,
    /// `U = V = Q`, the orthonormal eigenbasis of the tridiagonal Toeplitz
    /// matrix with 1 on the diagonal and `tau` on both off-diagonals.
    Bidiagonal { tau: f64 },
    /// `U = V = Q` from the QR factorization of a seeded standard normal matrix.
    RandomOrthogonal { seed: u64 },
}

/// A validated spiked population model.
#[derive(Clone, Debug, Serialize)]
pub struct PopulationModel {
    spikes: Vec<SpikeSpec>,
    bulk: BulkSpectrum,
    rotation: Rotation,
    p: usize,
}

/// Validates and assembles a model. `spikes` are `(value, multiplicity)`
/// pairs in any order; they are returned sorted by descending value.
pub fn build_model(
    spikes: &[(f64, usize)],
    bulk: BulkSpectrum,
    rotation: Rotation,
    p: usize,
) -> Result<PopulationModel> {
    let mut sorted = spikes.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    for w in sorted.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::DegenerateSpikes(w[0].0));
        }
    }
    let total: usize = sorted.iter().map(|s| s.1).sum();
    if total + 1 > p {
        return Err(Error::DimensionError(format!(
            "total spike multiplicity {total} needs p >= {}, got p = {p}",
            total + 1
        )));
    }
    let (lo, hi) = (bulk.min(), bulk.max());
    let mut specs = Vec::with_capacity(sorted.len());
    for &(value, multiplicity) in &sorted {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::DimensionError(format!("spike {value} must be positive")));
        }
        if multiplicity == 0 {
            return Err(Error::DimensionError(format!("spike {value} has zero multiplicity")));
        }
        let side = if value > hi {
            Side::Upper
        } else if value < lo {
            Side::Lower
        } else {
            return Err(Error::SpikeInsideBulk(value, lo, hi));
        };
        specs.push(SpikeSpec { value, multiplicity, side });
    }
    if let Rotation::Bidiagonal { tau } = rotation {
        if !tau.is_finite() {
            return Err(Error::DimensionError("tau must be finite".into()));
        }
    }
    Ok(PopulationModel { spikes: specs, bulk, rotation, p })
}

impl PopulationModel {
    pub fn spikes(&self) -> &[SpikeSpec] {
        &self.spikes
    }

    pub fn bulk(&self) -> &BulkSpectrum {
        &self.bulk
    }

    pub fn rotation(&self) -> &Rotation {
        &self.rotation
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// `M = Σ m_k`.
    pub fn total_multiplicity(&self) -> usize {
        self.spikes.iter().map(|s| s.multiplicity).sum()
    }

    /// Population slots occupied by spike group `k` (0-based, in the
    /// descending spike order).
    pub fn group_slots(&self, k: usize) -> Range<usize> {
        let start: usize = self.spikes[..k].iter().map(|s| s.multiplicity).sum();
        start..start + self.spikes[k].multiplicity
    }

    /// Eigenvalues of Σ in slot order: spikes (descending, repeated by
    /// multiplicity) followed by the allocated bulk (descending).
    pub fn population_eigenvalues(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.p);
        for s in &self.spikes {
            out.extend(std::iter::repeat_n(s.value, s.multiplicity));
        }
        let counts = self.bulk.allocate(self.p - self.total_multiplicity());
        for (&(t, _), &cnt) in self.bulk.atoms().iter().zip(&counts) {
            out.extend(std::iter::repeat_n(t, cnt));
        }
        out
    }
}

/// The pair `(c, H)` that fixes a limiting (or finite-n deterministic) law.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralRegime {
    pub ratio: f64,
    pub bulk: BulkSpectrum,
}

impl SpectralRegime {
    pub fn new(ratio: f64, bulk: BulkSpectrum) -> Self {
        Self { ratio, bulk }
    }

    /// Limit regime: `c = p/n` and the declared bulk `H`.
    pub fn limit(model: &PopulationModel, n: usize) -> Self {
        Self::new(model.p() as f64 / n as f64, model.bulk().clone())
    }

    /// Finite-n regime used for centering spike group `k`: `H_n` is the
    /// spectrum of Σ with group `k` removed (the other spikes stay in as
    /// atoms) and `c_n = (p - m_k)/n`.
    pub fn finite_for_group(model: &PopulationModel, k: usize, n: usize) -> Result<Self> {
        let slots = model.group_slots(k);
        let rest: Vec<f64> = model
            .population_eigenvalues()
            .into_iter()
            .enumerate()
            .filter(|(i, _)| !slots.contains(i))
            .map(|(_, v)| v)
            .collect();
        let bulk = BulkSpectrum::from_eigenvalues(&rest)?;
        Ok(Self::new(rest.len() as f64 / n as f64, bulk))
    }
}

/// `T = V · diag(d) · Uᵀ` with `d = (D1, D2)` the square roots of the
/// population eigenvalues in slot order.
#[derive(Clone, Debug)]
pub struct FactorDecomposition {
    t: Mat<f64>,
    v: Mat<f64>,
    u: Mat<f64>,
    d: Vec<f64>,
    m: usize,
    diagonal: bool,
}

impl FactorDecomposition {
    pub fn t(&self) -> faer::MatRef<'_, f64> {
        self.t.as_ref()
    }

    pub fn v(&self) -> faer::MatRef<'_, f64> {
        self.v.as_ref()
    }

    pub fn u(&self) -> faer::MatRef<'_, f64> {
        self.u.as_ref()
    }

    /// Singular values of `T` (spiked block first).
    pub fn singular_values(&self) -> &[f64] {
        &self.d
    }

    pub fn d1(&self) -> &[f64] {
        &self.d[..self.m]
    }

    pub fn d2(&self) -> &[f64] {
        &self.d[self.m..]
    }

    /// First `M` columns of `U`.
    pub fn u1(&self) -> faer::MatRef<'_, f64> {
        self.u.as_ref().subcols(0, self.m)
    }

    /// First `M` columns of `V` (population spiked eigenvectors).
    pub fn v1(&self) -> faer::MatRef<'_, f64> {
        self.v.as_ref().subcols(0, self.m)
    }

    /// Whether `T` is diagonal, which lets `T·X` be formed by row scaling.
    pub fn is_diagonal(&self) -> bool {
        self.diagonal
    }

    /// Applies the coordinate transposition `a <-> b` to the population
    /// frame: `T' = P T Pᵀ`, `V' = P V`, `U' = P U`. Used to move a spike
    /// direction, e.g. from `e1` to `e4` under an alternative.
    pub fn with_swapped_coordinates(&self, a: usize, b: usize) -> Self {
        let p = self.t.nrows();
        let perm = |i: usize| {
            if i == a {
                b
            } else if i == b {
                a
            } else {
                i
            }
        };
        let t = Mat::from_fn(p, p, |i, j| self.t[(perm(i), perm(j))]);
        let v = Mat::from_fn(p, p, |i, j| self.v[(perm(i), j)]);
        let u = Mat::from_fn(p, p, |i, j| self.u[(perm(i), j)]);
        Self { t, v, u, d: self.d.clone(), m: self.m, diagonal: self.diagonal }
    }
}

/// Builds `T` and its singular pieces for a validated model.
pub fn factorize(model: &PopulationModel) -> FactorDecomposition {
    let p = model.p();
    let d: Vec<f64> = model.population_eigenvalues().iter().map(|x| x.sqrt()).collect();
    let q = match model.rotation() {
        Rotation::Identity => None,
        Rotation::Bidiagonal { tau } => Some(tridiagonal_eigenbasis(p, *tau)),
        Rotation::RandomOrthogonal { seed } => Some(haar_orthogonal(p, *seed)),
    };
    let m = model.total_multiplicity();
    match q {
        None => FactorDecomposition {
            t: Mat::from_fn(p, p, |i, j| if i == j { d[i] } else { 0.0 }),
            v: Mat::identity(p, p),
            u: Mat::identity(p, p),
            d,
            m,
            diagonal: true,
        },
        Some(q) => {
            let scaled = Mat::from_fn(p, p, |i, j| q[(i, j)] * d[j]);
            let t = &scaled * q.transpose();
            FactorDecomposition { t, v: q.clone(), u: q, d, m, diagonal: false }
        }
    }
}

/// Eigenvectors of the `p × p` tridiagonal Toeplitz matrix
/// `tridiag(tau, 1, tau)`, columns ordered by descending eigenvalue
/// `1 + 2 tau cos(kπ/(p+1))`.
pub fn tridiagonal_eigenbasis(p: usize, tau: f64) -> Mat<f64> {
    if tau == 0.0 {
        return Mat::identity(p, p);
    }
    let h = std::f64::consts::PI / (p as f64 + 1.0);
    let scale = (2.0 / (p as f64 + 1.0)).sqrt();
    Mat::from_fn(p, p, |i, j| {
        // k runs 1..=p; a negative tau reverses the eigenvalue order.
        let k = if tau > 0.0 { j + 1 } else { p - j };
        scale * (((i + 1) * k) as f64 * h).sin()
    })
}

/// Haar-distributed orthogonal matrix: QR of a seeded Gaussian matrix with
/// the signs of `diag(R)` absorbed into `Q`.
pub fn haar_orthogonal(p: usize, seed: u64) -> Mat<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: Mat<f64> = Mat::from_fn(p, p, |_, _| StandardNormal.sample(&mut rng));
    let qr = g.qr();
    let mut q = qr.compute_Q();
    let r = qr.R();
    for j in 0..p {
        if r[(j, j)] < 0.0 {
            for i in 0..p {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

fn check_pole(d2: f64, bulk: &BulkSpectrum) -> Result<()> {
    if bulk.atoms().iter().any(|&(t, _)| (d2 - t).abs() <= 1e-12 * t.max(1.0)) {
        return Err(Error::SingularityError(d2));
    }
    Ok(())
}

/// `ψ(d²) = d² (1 + c Σ w_t t/(d² − t))`, the almost-sure limit of the sample
/// eigenvalue generated by a spike `d²`. With `(c_n, H_n)` this is `ψ_n`.
pub fn psi(d2: f64, c: f64, bulk: &BulkSpectrum) -> Result<f64> {
    check_pole(d2, bulk)?;
    let s: f64 = bulk.atoms().iter().map(|&(t, w)| w * t / (d2 - t)).sum();
    Ok(d2 * (1.0 + c * s))
}

/// `ψ'(d²) = 1 + c Σ w t/(d² − t) − c d² Σ w t/(d² − t)²`.
pub fn psi_prime(d2: f64, c: f64, bulk: &BulkSpectrum) -> Result<f64> {
    check_pole(d2, bulk)?;
    let (s1, s2) = bulk.atoms().iter().fold((0.0, 0.0), |(a, b), &(t, w)| {
        let g = d2 - t;
        (a + w * t / g, b + w * t / (g * g))
    });
    Ok(1.0 + c * s1 - c * d2 * s2)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpikeReport {
    pub value: f64,
    pub multiplicity: usize,
    pub side: Side,
    pub psi: f64,
    pub psi_prime: f64,
    pub detectable: bool,
    /// `min_{j≠k} |d_k²/d_j² − 1|`; `None` for a single spike group.
    pub separation: Option<f64>,
}

/// Per-spike detectability (`ψ'(d²) > 0`) and pairwise separation.
pub fn validate_spikes(model: &PopulationModel, c: f64) -> Vec<SpikeReport> {
    let spikes = model.spikes();
    spikes
        .iter()
        .enumerate()
        .map(|(k, s)| {
            // Spike values never coincide with atoms after build_model.
            let psi_v = psi(s.value, c, model.bulk()).unwrap_or(f64::NAN);
            let dpsi = psi_prime(s.value, c, model.bulk()).unwrap_or(f64::NAN);
            let separation = spikes
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != k)
                .map(|(_, o)| (s.value / o.value - 1.0).abs())
                .min_by(f64::total_cmp);
            SpikeReport {
                value: s.value,
                multiplicity: s.multiplicity,
                side: s.side,
                psi: psi_v,
                psi_prime: dpsi,
                detectable: dpsi > 0.0,
                separation,
            }
        })
        .collect()
}

/// Fails with `SpikeNotDetectable` on the first spike with `ψ' ≤ 0`.
pub fn require_detectable(model: &PopulationModel, c: f64) -> Result<Vec<SpikeReport>> {
    let reports = validate_spikes(model, c);
    if let Some(bad) = reports.iter().find(|r| !r.detectable) {
        return Err(Error::SpikeNotDetectable(bad.value, bad.psi_prime));
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn delta1() -> BulkSpectrum {
        BulkSpectrum::point_mass(1.0).unwrap()
    }

    fn case_one(p: usize) -> PopulationModel {
        build_model(&[(4.0, 1), (3.0, 2), (0.2, 2), (0.1, 1)], delta1(), Rotation::Identity, p).unwrap()
    }

    fn eigenvalues_of_sigma(f: &FactorDecomposition) -> Vec<f64> {
        let sigma = f.t() * f.t().transpose();
        let mut ev = sigma.self_adjoint_eigenvalues(faer::Side::Lower).unwrap();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    #[test]
    fn case_one_model_sorted_and_tagged() {
        let m = case_one(100);
        let values: Vec<f64> = m.spikes().iter().map(|s| s.value).collect();
        assert_eq!(values, vec![4.0, 3.0, 0.2, 0.1]);
        assert_eq!(m.spikes()[1].side, Side::Upper);
        assert_eq!(m.spikes()[2].side, Side::Lower);
        assert_eq!(m.total_multiplicity(), 6);
        assert_eq!(m.group_slots(1), 1..3);
    }

    #[test]
    fn null_model_is_valid() {
        let m = build_model(&[], delta1(), Rotation::Identity, 50).unwrap();
        assert!(m.spikes().is_empty());
        let f = factorize(&m);
        assert!(f.singular_values().iter().all(|&d| d == 1.0));
    }

    #[test]
    fn duplicate_spikes_rejected() {
        let err = build_model(&[(4.0, 1), (4.0, 1)], delta1(), Rotation::Identity, 10).unwrap_err();
        assert!(matches!(err, Error::DegenerateSpikes(v) if v == 4.0));
    }

    #[test]
    fn too_many_spikes_rejected() {
        let err = build_model(&[(4.0, 3)], delta1(), Rotation::Identity, 3).unwrap_err();
        assert!(matches!(err, Error::DimensionError(_)));
    }

    #[test]
    fn spike_inside_bulk_rejected() {
        let bulk = BulkSpectrum::new(vec![(2.0, 0.5), (1.0, 0.5)]).unwrap();
        let err = build_model(&[(1.5, 1)], bulk, Rotation::Identity, 10).unwrap_err();
        assert!(matches!(err, Error::SpikeInsideBulk(..)));
    }

    #[test]
    fn bad_bulk_weights_rejected() {
        assert!(BulkSpectrum::new(vec![(1.0, 0.5), (2.0, 0.4)]).is_err());
        assert!(BulkSpectrum::new(vec![(-1.0, 1.0)]).is_err());
    }

    #[test]
    fn case_one_factor_is_square_root_diagonal() {
        let f = factorize(&case_one(100));
        let expected = [2.0, 3f64.sqrt(), 3f64.sqrt(), 0.2f64.sqrt(), 0.2f64.sqrt(), 0.1f64.sqrt()];
        for (i, e) in expected.iter().enumerate() {
            assert_relative_eq!(f.t()[(i, i)], *e, epsilon = 1e-15);
        }
        assert!(f.is_diagonal());
        assert_eq!(f.t()[(6, 6)], 1.0);
        assert_eq!(f.t()[(0, 1)], 0.0);
        for j in 0..6 {
            assert_eq!(f.u1()[(j, j)], 1.0);
        }
        let ev = eigenvalues_of_sigma(&f);
        let mut want = case_one(100).population_eigenvalues();
        want.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in ev.iter().zip(&want) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    fn check_decomposition(f: &FactorDecomposition) {
        let p = f.t().nrows();
        let d = Mat::from_fn(p, p, |i, j| if i == j { f.singular_values()[i] } else { 0.0 });
        let rebuilt = f.v() * &d * f.u().transpose();
        let vtv = f.v().transpose() * f.v();
        let utu = f.u().transpose() * f.u();
        for i in 0..p {
            for j in 0..p {
                assert!((rebuilt[(i, j)] - f.t()[(i, j)]).abs() < 1e-10);
                let id = if i == j { 1.0 } else { 0.0 };
                assert!((vtv[(i, j)] - id).abs() < 1e-10);
                assert!((utu[(i, j)] - id).abs() < 1e-10);
            }
        }
        for (a, b) in f.d1().iter().zip(f.singular_values()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn case_two_bidiagonal_rotation() {
        let m = build_model(&[(4.0, 1), (3.0, 1), (0.2, 1), (0.1, 1)], delta1(), Rotation::Bidiagonal { tau: 0.5 }, 60)
            .unwrap();
        let f = factorize(&m);
        check_decomposition(&f);
        // Columns of V are eigenvectors of tridiag(0.5, 1, 0.5).
        let p = 60;
        let gamma = Mat::from_fn(p, p, |i, j| {
            if i == j {
                1.0
            } else if i.abs_diff(j) == 1 {
                0.5
            } else {
                0.0
            }
        });
        let gv = &gamma * f.v();
        let lam0 = 1.0 + (std::f64::consts::PI / 61.0).cos();
        for i in 0..p {
            assert!((gv[(i, 0)] - lam0 * f.v()[(i, 0)]).abs() < 1e-12);
        }
        let ev = eigenvalues_of_sigma(&f);
        for (got, want) in ev[..2].iter().zip([4.0, 3.0]) {
            assert!((got - want).abs() < 1e-8);
        }
        assert!((ev[p - 2] - 0.2).abs() < 1e-8 && (ev[p - 1] - 0.1).abs() < 1e-8);
        assert!(ev[2..p - 2].iter().all(|x| (x - 1.0).abs() < 1e-8));
        assert!(f.t()[(0, 1)].abs() > 1e-6);
    }

    #[test]
    fn random_orthogonal_is_orthogonal_and_deterministic() {
        let m = build_model(&[(4.0, 1)], delta1(), Rotation::RandomOrthogonal { seed: 11 }, 40).unwrap();
        let f = factorize(&m);
        check_decomposition(&f);
        let g = factorize(&m);
        assert_eq!(f.t()[(3, 7)], g.t()[(3, 7)]);
    }

    #[test]
    fn haar_columns_delocalize() {
        let max_fourth = |p: usize| {
            let q = haar_orthogonal(p, 5);
            (0..p).map(|j| (0..p).map(|i| q[(i, j)].powi(4)).sum::<f64>()).fold(0.0, f64::max)
        };
        let (a, b) = (max_fourth(50), max_fourth(200));
        assert!(b < a, "{b} !< {a}");
        assert!(b < 0.05);
    }

    #[test]
    fn table_one_bulk_allocation() {
        let bulk = BulkSpectrum::new(vec![(2.0, 0.5), (1.0, 0.5)]).unwrap();
        assert_eq!(bulk.allocate(19), vec![9, 10]);
        assert_eq!(bulk.allocate(20), vec![10, 10]);
        let m = build_model(&[(10.0, 1)], bulk, Rotation::Identity, 20).unwrap();
        let ev = m.population_eigenvalues();
        assert_eq!(ev[0], 10.0);
        assert_eq!(ev[1..10], [2.0; 9]);
        assert_eq!(ev[10..], [1.0; 10]);
    }

    #[test]
    fn psi_values() {
        let h = delta1();
        assert_relative_eq!(psi(4.0, 0.1, &h).unwrap(), 4.133333333333333, epsilon = 1e-12);
        assert_eq!(psi(2.5, 0.0, &h).unwrap(), 2.5);
        assert!(matches!(psi(1.0, 0.1, &h), Err(Error::SingularityError(_))));
    }

    #[test]
    fn psi_prime_values() {
        let h = delta1();
        assert_relative_eq!(psi_prime(4.0, 0.1, &h).unwrap(), 0.988888888888889, epsilon = 1e-12);
        assert_relative_eq!(psi_prime(1.2, 0.1, &h).unwrap(), -1.5, epsilon = 1e-12);
        assert_eq!(psi_prime(7.0, 0.0, &h).unwrap(), 1.0);
    }

    #[test]
    fn psi_prime_matches_central_differences() {
        let h = BulkSpectrum::new(vec![(2.0, 0.5), (1.0, 0.5)]).unwrap();
        for k in 0..20 {
            let d2 = 3.0 + 2.5 * k as f64;
            let step = 1e-5 * d2;
            let fd = (psi(d2 + step, 0.7, &h).unwrap() - psi(d2 - step, 0.7, &h).unwrap()) / (2.0 * step);
            let exact = psi_prime(d2, 0.7, &h).unwrap();
            assert!(((fd - exact) / exact).abs() < 1e-6, "d2={d2}: {fd} vs {exact}");
        }
    }

    #[test]
    fn psi_increasing_above_threshold() {
        let h = delta1();
        let c: f64 = 0.3;
        let start = 1.0 + c.sqrt() + 1e-3;
        let grid: Vec<f64> = (0..200).map(|k| start + 0.05 * k as f64).collect();
        let vals: Vec<f64> = grid.iter().map(|&x| psi(x, c, &h).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn case_one_spikes_all_detectable() {
        let reports = validate_spikes(&case_one(100), 0.1);
        assert!(reports.iter().all(|r| r.detectable));
        assert_relative_eq!(reports[0].separation.unwrap(), 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn spike_in_transition_window_not_detectable() {
        let m = build_model(&[(1.2, 1)], delta1(), Rotation::Identity, 20).unwrap();
        let r = validate_spikes(&m, 0.1);
        assert!(!r[0].detectable);
        assert_relative_eq!(r[0].psi_prime, -1.5, epsilon = 1e-12);
        assert!(r[0].separation.is_none());
        assert!(matches!(require_detectable(&m, 0.1), Err(Error::SpikeNotDetectable(..))));
    }

    #[test]
    fn finite_regime_drops_own_group() {
        let m = case_one(100);
        let r = SpectralRegime::finite_for_group(&m, 0, 1000).unwrap();
        assert_relative_eq!(r.ratio, 0.099, epsilon = 1e-15);
        assert!(r.bulk.atoms().iter().all(|a| a.0 != 4.0));
        let w3 = r.bulk.atoms().iter().find(|a| a.0 == 3.0).unwrap().1;
        assert_relative_eq!(w3, 2.0 / 99.0, epsilon = 1e-15);
    }

    #[test]
    fn swapped_coordinates_move_spike_direction() {
        let bulk = BulkSpectrum::new(vec![(2.0, 0.5), (1.0, 0.5)]).unwrap();
        let m = build_model(&[(10.0, 1)], bulk, Rotation::Identity, 20).unwrap();
        let f = factorize(&m).with_swapped_coordinates(0, 3);
        assert_eq!(f.t()[(3, 3)], 10f64.sqrt());
        assert_eq!(f.t()[(0, 0)], 2f64.sqrt());
        assert_eq!(f.v()[(3, 0)], 1.0);
        check_decomposition(&f);
    }
}
