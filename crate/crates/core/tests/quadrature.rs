//! Transform values on a two-atom bulk against direct quadrature of the
//! limiting density, recovered from the complex root of the cubic
//! `z(m) = x` just above the real axis.

use num_complex::Complex64;
use spiked_core::{bulk_moments, companion_m, psi, BulkSpectrum};

const T: [f64; 2] = [2.0, 1.0];
const W: [f64; 2] = [0.5, 0.5];

fn bulk() -> BulkSpectrum {
    BulkSpectrum::new(vec![(T[0], W[0]), (T[1], W[1])]).unwrap()
}

/// Roots of `a3 m³ + a2 m² + a1 m + a0` by Durand–Kerner.
fn cubic_roots(a: [f64; 4]) -> [Complex64; 3] {
    let [a3, a2, a1, a0] = a;
    let p = |m: Complex64| ((m * a3 + a2) * m + a1) * m + a0;
    let seed = Complex64::new(0.4, 0.9);
    let mut r = [seed, seed * seed, seed * seed * seed];
    for _ in 0..500 {
        let old = r;
        for i in 0..3 {
            let mut den = Complex64::new(a3, 0.0);
            for j in 0..3 {
                if i != j {
                    den *= r[i] - r[j];
                }
            }
            r[i] -= p(r[i]) / den;
        }
        if (0..3).all(|i| (r[i] - old[i]).norm() < 1e-15 * (1.0 + r[i].norm())) {
            break;
        }
    }
    r
}

/// Density of the companion law at `x > 0`: `Im m(x + i0)/π`.
fn companion_density(x: f64, c: f64) -> f64 {
    let (t1, t2) = (T[0], T[1]);
    let coeffs = [x * t1 * t2, x * (t1 + t2) + t1 * t2 - c * t1 * t2, x + t1 + t2 - c * (W[0] * t1 + W[1] * t2), 1.0];
    let im = cubic_roots(coeffs).iter().map(|m| m.im).fold(0.0, f64::max);
    if im > 1e-9 {
        im / std::f64::consts::PI
    } else {
        0.0
    }
}

fn support(c: f64) -> (f64, f64) {
    let top = (T[0].sqrt() * (1.0 + c.sqrt())).powi(2) * 1.5;
    let steps = 20000;
    let xs: Vec<f64> = (1..=steps).map(|k| top * k as f64 / steps as f64).collect();
    let inside: Vec<usize> = (0..steps).filter(|&k| companion_density(xs[k], c) > 0.0).collect();
    let (first, last) = (inside[0], *inside.last().unwrap());
    assert_eq!(last - first + 1, inside.len(), "support should be one interval");
    let refine = |mut out: f64, mut inn: f64| {
        for _ in 0..80 {
            let mid = 0.5 * (out + inn);
            if companion_density(mid, c) > 0.0 {
                inn = mid;
            } else {
                out = mid;
            }
        }
        inn
    };
    let lo_out = if first == 0 { 0.0 } else { xs[first - 1] };
    (refine(lo_out, xs[first]), refine(xs[last + 1], xs[last]))
}

/// `∫ g dF_cont` over the continuous part of `F`, whose density is the
/// companion density over `c`.
fn integrate(c: f64, g: impl Fn(f64) -> f64) -> f64 {
    let (a, b) = support(c);
    let nodes = 4000;
    let h = std::f64::consts::PI / nodes as f64;
    (0..nodes)
        .map(|k| {
            let th = (k as f64 + 0.5) * h;
            let x = a + 0.5 * (b - a) * (1.0 - th.cos());
            g(x) * companion_density(x, c) / c * 0.5 * (b - a) * th.sin() * h
        })
        .sum()
}

fn check(z: f64, c: f64) {
    let h = bulk();
    // F puts mass 1 − 1/c at zero when c > 1; the companion law puts 1 − c there when c < 1.
    let atom_f = (1.0 - 1.0 / c).max(0.0);
    let atom_companion = (1.0 - c).max(0.0);
    let mass = integrate(c, |_| 1.0) + atom_f;
    assert!((mass - 1.0).abs() < 1e-8, "mass {mass}");

    let m1 = integrate(c, |x| x / (z - x));
    let m2 = integrate(c, |x| x * x / (z - x).powi(2));
    let m3 = integrate(c, |x| x / (z - x).powi(2));
    let rs = integrate(c, |x| 1.0 / (x - z).powi(2)) + atom_f / (z * z);
    let m_companion = c * integrate(c, |x| 1.0 / (x - z)) - atom_companion / z;

    let got = bulk_moments(z, c, &h).unwrap();
    let pairs = [
        ("m1", got.m1, m1),
        ("m2", got.m2, m2),
        ("m3", got.m3, m3),
        ("resolvent_sq", got.resolvent_sq, rs),
        ("companion", companion_m(z, c, &h).unwrap(), m_companion),
    ];
    for (name, a, b) in pairs {
        assert!(((a - b) / b).abs() < 1e-7, "{name} at z = {z}, c = {c}: {a} vs quadrature {b}");
    }
}

#[test]
fn two_atom_moments_right_of_support() {
    check(psi(10.0, 0.5, &bulk()).unwrap(), 0.5);
    check(psi(50.0, 2.0, &bulk()).unwrap(), 2.0);
}

#[test]
fn two_atom_moments_at_negative_z() {
    check(-2.0, 0.5);
    check(-1.0, 2.0);
}
