//! Companion Stieltjes transform `m̲(z)` of the limiting law, its
//! derivatives, bulk moments of `F`, and the empirical plug-in estimators
//! computed from sample eigenvalues.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::BulkSpectrum;

/// Relative residual accepted for the fixed point `z = z(m̲)`.
pub const FIXED_POINT_TOL: f64 = 1e-12;
/// Relative gap below which two sample eigenvalues count as a multiple root.
pub const MULTIROOT_RATIO: f64 = 0.2;

const GRID_BOUNDED: usize = 256;
const GRID_UNBOUNDED: usize = 400;

/// All Stieltjes quantities at one evaluation point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TransformPoint {
    pub z: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
    pub bulk_m1: f64,
    pub bulk_m2: f64,
    pub bulk_m3: f64,
    pub resolvent_sq: f64,
}

impl TransformPoint {
    pub fn evaluate(z: f64, c: f64, bulk: &BulkSpectrum) -> Result<Self> {
        let [m1, m2, m3, m4] = companion_derivatives(z, c, bulk)?;
        let b = bulk_moments(z, c, bulk)?;
        Ok(Self { z, m1, m2, m3, m4, bulk_m1: b.m1, bulk_m2: b.m2, bulk_m3: b.m3, resolvent_sq: b.resolvent_sq })
    }
}

/// `z(m) = −1/m + c Σ w t/(1 + t m)` and its first three derivatives.
fn inverse_map(m: f64, c: f64, bulk: &BulkSpectrum) -> [f64; 4] {
    let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    for &(t, w) in bulk.atoms() {
        let r = t / (1.0 + t * m);
        s0 += w * r;
        s1 += w * r * r;
        s2 += w * r * r * r;
        s3 += w * r * r * r * r;
    }
    let inv = 1.0 / m;
    [-inv + c * s0, inv * inv - c * s1, -2.0 * inv.powi(3) + 2.0 * c * s2, 6.0 * inv.powi(4) - 6.0 * c * s3]
}

/// Sign of `m² z'(m) = 1 − c Σ w (t m/(1 + t m))²`, which has no pole at 0.
fn slope_sign(m: f64, c: f64, bulk: &BulkSpectrum) -> f64 {
    let s: f64 = bulk
        .atoms()
        .iter()
        .map(|&(t, w)| {
            let r = t * m / (1.0 + t * m);
            w * r * r
        })
        .sum();
    1.0 - c * s
}

/// Open intervals of the real `m` line between consecutive poles, each with
/// a sampling grid. Unbounded ends use a geometric grid.
fn branch_grids(bulk: &BulkSpectrum) -> Vec<Vec<f64>> {
    let mut poles: Vec<f64> = bulk.atoms().iter().map(|&(t, _)| -1.0 / t).collect();
    poles.push(0.0);
    poles.sort_by(f64::total_cmp);
    // Offsets 10^-15 .. 10^10 relative to the scale, used next to poles and
    // towards infinity.
    let geometric = |count: usize, lo: f64, hi: f64| -> Vec<f64> {
        (0..count).map(|k| 10f64.powf(lo + (hi - lo) * k as f64 / (count - 1) as f64)).collect::<Vec<_>>()
    };
    let mut grids = Vec::with_capacity(poles.len() + 1);
    let left = poles[0];
    let scale = left.abs().max(1.0);
    let mut g: Vec<f64> = geometric(GRID_UNBOUNDED, -15.0, 10.0).into_iter().map(|e| left - scale * e).collect();
    g.reverse();
    grids.push(g);
    for w in poles.windows(2) {
        let (a, b) = (w[0], w[1]);
        let width = b - a;
        let mut g: Vec<f64> = (1..GRID_BOUNDED)
            .map(|k| {
                let u = std::f64::consts::PI * k as f64 / GRID_BOUNDED as f64;
                a + width * (1.0 - u.cos()) / 2.0
            })
            .collect();
        for e in geometric(24, -15.0, -5.0) {
            g.push(a + width * e);
            g.push(b - width * e);
        }
        g.sort_by(f64::total_cmp);
        g.dedup();
        g.retain(|&m| m > a && m < b);
        grids.push(g);
    }
    let scale = 1.0 / bulk.max();
    grids.push(geometric(GRID_UNBOUNDED, -15.0, 10.0).into_iter().map(|e| scale * e).collect());
    grids
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    // f(lo) < 0 < f(hi) or the reverse; iterate to adjacent floats.
    let flo = f(lo);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if (f(mid) < 0.0) == (flo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Companion Stieltjes transform `m̲(z)` for real `z` outside the support of
/// `F̲`: the unique root of `z(m) = z` on a piece where `z'(m) > 0`.
pub fn companion_m(z: f64, c: f64, bulk: &BulkSpectrum) -> Result<f64> {
    if !z.is_finite() || !(c >= 0.0) {
        return Err(Error::BranchError(z));
    }
    if c == 0.0 {
        if z == 0.0 {
            return Err(Error::InsideSupportError(z));
        }
        return Ok(-1.0 / z);
    }
    let zf = |m: f64| inverse_map(m, c, bulk)[0] - z;
    let mut roots: Vec<f64> = Vec::new();
    for grid in branch_grids(bulk) {
        // Split the interval into maximal pieces of positive slope.
        let mut start: Option<f64> = None;
        let mut prev = grid[0];
        let mut prev_sign = slope_sign(prev, c, bulk);
        if prev_sign > 0.0 {
            start = Some(prev);
        }
        let mut pieces = Vec::new();
        for &m in &grid[1..] {
            let s = slope_sign(m, c, bulk);
            if (s > 0.0) != (prev_sign > 0.0) {
                let crit = bisect(|x| slope_sign(x, c, bulk), prev, m);
                if s > 0.0 {
                    start = Some(crit);
                } else if let Some(a) = start.take() {
                    pieces.push((a, crit));
                }
            }
            prev = m;
            prev_sign = s;
        }
        if let Some(a) = start {
            pieces.push((a, prev));
        }
        for (a, b) in pieces {
            let (fa, fb) = (zf(a), zf(b));
            if fa <= 0.0 && fb >= 0.0 {
                let m = if fa == 0.0 {
                    a
                } else if fb == 0.0 {
                    b
                } else {
                    bisect(zf, a, b)
                };
                roots.push(m);
            }
        }
    }
    let m = match roots.as_slice() {
        [] => return Err(Error::InsideSupportError(z)),
        [m] => *m,
        // Adjacent pieces can both claim a target sitting on their shared
        // critical value; keep the root with positive slope.
        many => *many
            .iter()
            .filter(|&&m| inverse_map(m, c, bulk)[1] > 0.0)
            .min_by(|a, b| zf(**a).abs().total_cmp(&zf(**b).abs()))
            .ok_or(Error::BranchError(z))?,
    };
    let [zm, dz, ..] = inverse_map(m, c, bulk);
    if !(dz > 0.0) || (zm - z).abs() > FIXED_POINT_TOL * z.abs().max(1.0) {
        return Err(Error::BranchError(z));
    }
    Ok(m)
}

/// `(m̲₁, m̲₂, m̲₃, m̲₄)` with `m̲_{j+1} = m̲^{(j)}/j!`, from implicit
/// differentiation of `z(m̲(z)) = z`.
pub fn companion_derivatives(z: f64, c: f64, bulk: &BulkSpectrum) -> Result<[f64; 4]> {
    let m = companion_m(z, c, bulk)?;
    let [_, z1, z2, z3] = if c == 0.0 {
        let inv = 1.0 / m;
        [0.0, inv * inv, -2.0 * inv.powi(3), 6.0 * inv.powi(4)]
    } else {
        inverse_map(m, c, bulk)
    };
    let d1 = 1.0 / z1;
    let d2 = -z2 / z1.powi(3);
    let d3 = -z3 / z1.powi(4) + 3.0 * z2 * z2 / z1.powi(5);
    Ok([m, d1, d2 / 2.0, d3 / 6.0])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BulkMoments {
    /// `∫ x/(z − x) dF`
    pub m1: f64,
    /// `∫ x²/(z − x)² dF`
    pub m2: f64,
    /// `∫ x/(z − x)² dF`
    pub m3: f64,
    /// `∫ dF/(x − z)²`
    pub resolvent_sq: f64,
}

/// Moments of `F`, the limit law of the bulk sample covariance, through its
/// Stieltjes transform `s_F = (m̲ + (1 − c)/z)/c`.
pub fn bulk_moments(z: f64, c: f64, bulk: &BulkSpectrum) -> Result<BulkMoments> {
    let (s, ds) = if c == 0.0 {
        if bulk.atoms().iter().any(|&(t, _)| t == z) {
            return Err(Error::InsideSupportError(z));
        }
        bulk.atoms().iter().fold((0.0, 0.0), |(a, b), &(t, w)| {
            let g = 1.0 / (t - z);
            (a + w * g, b + w * g * g)
        })
    } else {
        if z == 0.0 {
            return Err(Error::InsideSupportError(z));
        }
        let [m, dm, ..] = companion_derivatives(z, c, bulk)?;
        ((m + (1.0 - c) / z) / c, (dm - (1.0 - c) / (z * z)) / c)
    };
    Ok(BulkMoments { m1: -1.0 - z * s, m2: z * z * ds + 2.0 * z * s + 1.0, m3: z * ds + s, resolvent_sq: ds })
}

/// Indices `j` with `|l_i − l_j|/max(l_i, l_j) ≤ 0.2` for target `i`
/// (0-based), always including `i` itself.
pub fn multiroot_filter(eigenvalues: &[f64], target: usize) -> Vec<usize> {
    let li = eigenvalues[target];
    eigenvalues
        .iter()
        .enumerate()
        .filter(|&(j, &lj)| {
            if j == target {
                return true;
            }
            let scale = li.abs().max(lj.abs());
            let r = if scale == 0.0 { 0.0 } else { (li - lj).abs() / scale };
            r <= MULTIROOT_RATIO
        })
        .map(|(j, _)| j)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalTransform {
    pub target: f64,
    pub target_index: usize,
    pub excluded: Vec<usize>,
    pub c_tilde: f64,
    pub m_hat: f64,
    pub m_underline_hat: f64,
}

/// Plug-in estimates `m̂(l_i)` and `m̲̂(l_i) = −(1 − c̃)/l_i + c̃ m̂(l_i)`.
pub fn empirical_m(eigenvalues: &[f64], target: usize, n: usize) -> Result<EmpiricalTransform> {
    let p = eigenvalues.len();
    if target >= p {
        return Err(Error::IndexError(format!("target {target} out of range for {p} eigenvalues")));
    }
    if n == 0 {
        return Err(Error::DimensionError("sample size must be positive".into()));
    }
    let l = eigenvalues[target];
    if !(l > 0.0) {
        return Err(Error::DimensionError(format!("target eigenvalue {l} must be positive")));
    }
    let excluded = multiroot_filter(eigenvalues, target);
    let kept = p - excluded.len();
    if kept == 0 {
        return Err(Error::NoBulkError);
    }
    let mut skip = excluded.iter().peekable();
    let mut sum = 0.0;
    for (j, &lj) in eigenvalues.iter().enumerate() {
        if skip.peek() == Some(&&j) {
            skip.next();
            continue;
        }
        sum += 1.0 / (lj - l);
    }
    let m_hat = sum / kept as f64;
    let c_tilde = kept as f64 / n as f64;
    Ok(EmpiricalTransform {
        target: l,
        target_index: target,
        excluded,
        c_tilde,
        m_hat,
        m_underline_hat: -(1.0 - c_tilde) / l + c_tilde * m_hat,
    })
}

/// Spike estimate `d̂² = −1/m̲̂(l_i)`.
pub fn estimate_spike(eigenvalues: &[f64], target: usize, n: usize) -> Result<f64> {
    let e = empirical_m(eigenvalues, target, n)?;
    let d2 = -1.0 / e.m_underline_hat;
    if e.m_underline_hat == 0.0 || !d2.is_finite() {
        return Err(Error::DivergentEstimate);
    }
    Ok(d2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::psi;
    use approx::assert_relative_eq;

    fn delta1() -> BulkSpectrum {
        BulkSpectrum::point_mass(1.0).unwrap()
    }

    fn two_atom() -> BulkSpectrum {
        BulkSpectrum::new(vec![(2.0, 0.5), (1.0, 0.5)]).unwrap()
    }

    #[test]
    fn inversion_at_reference_spike() {
        let h = delta1();
        let m = companion_m(psi(4.0, 0.1, &h).unwrap(), 0.1, &h).unwrap();
        assert_relative_eq!(m, -0.25, epsilon = 1e-13);
        let m = companion_m(psi(0.1, 0.1, &h).unwrap(), 0.1, &h).unwrap();
        assert_relative_eq!(m, -10.0, epsilon = 1e-10);
    }

    #[test]
    fn decays_like_minus_inverse_z() {
        let h = delta1();
        for z in [1e3, 1e5, 1e7] {
            let m = companion_m(z, 0.5, &h).unwrap();
            assert!(m < 0.0);
            assert!((m * z + 1.0).abs() < 2.0 / z);
        }
    }

    #[test]
    fn classical_limit() {
        let h = delta1();
        assert_eq!(companion_m(4.0, 0.0, &h).unwrap(), -0.25);
        let d = companion_derivatives(4.0, 0.0, &h).unwrap();
        assert_relative_eq!(d[1], 1.0 / 16.0, epsilon = 1e-15);
    }

    #[test]
    fn inside_support_rejected() {
        let h = delta1();
        assert!(matches!(companion_m(1.0, 0.1, &h), Err(Error::InsideSupportError(_))));
        assert!(matches!(companion_m(1.5, 0.3, &h), Err(Error::InsideSupportError(_))));
    }

    #[test]
    fn inversion_on_two_atom_bulk() {
        let h = two_atom();
        for &c in &[0.1, 0.5, 1.0, 2.0] {
            for &d2 in &[5.0, 10.0, 50.0, 100.0] {
                let m = companion_m(psi(d2, c, &h).unwrap(), c, &h).unwrap();
                assert!((m + 1.0 / d2).abs() < 1e-10, "c={c} d2={d2} m={m}");
            }
        }
    }

    #[test]
    fn negative_z_uses_positive_branch() {
        let h = delta1();
        let m = companion_m(-2.0, 0.5, &h).unwrap();
        assert!(m > 0.0);
        let [zm, dz, ..] = inverse_map(m, 0.5, &h);
        assert!((zm + 2.0).abs() < 1e-12 && dz > 0.0);
    }

    #[test]
    fn reference_derivatives() {
        let h = delta1();
        let z = psi(4.0, 0.1, &h).unwrap();
        let [m1, m2, m3, m4] = companion_derivatives(z, 0.1, &h).unwrap();
        assert_relative_eq!(m1, -0.25, epsilon = 1e-13);
        assert_relative_eq!(m2, 1.0 / 15.822222222222222, max_relative = 1e-12);
        assert_relative_eq!(m3, -0.0162175, max_relative = 1e-5);
        assert!(m4 > 0.0 && m2 > 0.0);
    }

    fn central4<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
        (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let bulks = [delta1(), two_atom()];
        for (bi, h) in bulks.iter().enumerate() {
            for k in 0..10 {
                let c = [0.1, 0.7][k % 2];
                let d2 = 3.0 + 4.0 * k as f64;
                let z = psi(d2, c, h).unwrap();
                let step = 1e-3 * z;
                let der = |x: f64, j: usize| companion_derivatives(x, c, h).unwrap()[j];
                let [_, m2, m3, m4] = companion_derivatives(z, c, h).unwrap();
                let fd2 = central4(|x| der(x, 0), z, step);
                let fd3 = central4(|x| der(x, 1), z, step) / 2.0;
                let fd4 = central4(|x| der(x, 2), z, step) / 3.0;
                for (name, a, b) in [("m2", m2, fd2), ("m3", m3, fd3), ("m4", m4, fd4)] {
                    assert!(((a - b) / a).abs() < 1e-6, "bulk {bi} d2={d2} {name}: {a} vs {b}");
                }
            }
        }
    }

    /// Marchenko–Pastur law with ratio `c` and unit population: integral of
    /// `g` against `F` (absolutely continuous part only).
    fn mp_integral<G: Fn(f64) -> f64>(c: f64, g: G) -> f64 {
        let (a, b) = ((1.0 - c.sqrt()).powi(2), (1.0 + c.sqrt()).powi(2));
        let nodes = 4000;
        let h = std::f64::consts::PI / nodes as f64;
        let mut acc = 0.0;
        for k in 1..nodes {
            let th = k as f64 * h;
            let x = 0.5 * (a + b) - 0.5 * (b - a) * th.cos();
            let jac = 0.5 * (b - a) * th.sin();
            let dens = ((b - x) * (x - a)).max(0.0).sqrt() / (2.0 * std::f64::consts::PI * c * x);
            acc += g(x) * dens * jac;
        }
        acc * h
    }

    #[test]
    fn bulk_moments_match_mp_quadrature() {
        let h = delta1();
        for &(c, d2) in &[(0.1, 4.0), (0.1, 10.0), (0.5, 6.0), (0.9, 20.0)] {
            let z = psi(d2, c, &h).unwrap();
            let bm = bulk_moments(z, c, &h).unwrap();
            let q1 = mp_integral(c, |x| x / (z - x));
            let q2 = mp_integral(c, |x| x * x / (z - x).powi(2));
            let q3 = mp_integral(c, |x| x / (z - x).powi(2));
            let q4 = mp_integral(c, |x| 1.0 / (x - z).powi(2));
            for (a, b) in [(bm.m1, q1), (bm.m2, q2), (bm.m3, q3), (bm.resolvent_sq, q4)] {
                assert!((a - b).abs() < 1e-8, "c={c} d2={d2}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn bulk_moments_limits() {
        let h = delta1();
        let far = bulk_moments(1e8, 0.3, &h).unwrap();
        assert!(far.m1.abs() < 1e-7 && far.resolvent_sq.abs() < 1e-15);
        let classical = bulk_moments(3.0, 0.0, &h).unwrap();
        assert_relative_eq!(classical.m1, 0.5, epsilon = 1e-15);
        let near = bulk_moments(3.0, 1e-9, &h).unwrap();
        assert!((near.m1 - 0.5).abs() < 1e-6);
    }

    #[test]
    fn multiroot_examples() {
        assert_eq!(multiroot_filter(&[10.0, 9.5, 3.0, 1.0, 0.5], 0), vec![0, 1]);
        assert_eq!(multiroot_filter(&[2.0; 4], 2), vec![0, 1, 2, 3]);
        assert_eq!(multiroot_filter(&[10.0, 5.0, 1.0], 0), vec![0]);
        assert_eq!(multiroot_filter(&[1.0, 0.0, 0.0], 1), vec![1, 2]);
    }

    #[test]
    fn toy_empirical_transform() {
        let l = [10.0, 9.5, 3.0, 1.0, 0.5];
        let e = empirical_m(&l, 0, 10).unwrap();
        assert_relative_eq!(e.m_hat, -0.1197438, epsilon = 1e-7);
        assert_relative_eq!(e.c_tilde, 0.3, epsilon = 1e-15);
        assert_relative_eq!(e.m_underline_hat, -0.1059231, epsilon = 1e-7);
        assert_relative_eq!(estimate_spike(&l, 0, 10).unwrap(), 9.440808, epsilon = 1e-6);
    }

    #[test]
    fn no_bulk_left() {
        assert!(matches!(empirical_m(&[3.0, 3.0, 2.9], 0, 10), Err(Error::NoBulkError)));
    }

    #[test]
    fn divergent_estimate() {
        // Target l = 1 with the single other eigenvalue 2 and n = 2:
        // c̃ = 1/2, m̂ = 1, so m̲̂ = −1/2 + 1/2 = 0.
        let l = [2.0, 1.0];
        assert!(matches!(estimate_spike(&l, 1, 2), Err(Error::DivergentEstimate)));
    }
}
