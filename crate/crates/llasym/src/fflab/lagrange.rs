use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// A function of `s` complex variables.
pub type MultiFn<'a> = &'a (dyn Fn(&[Complex64]) -> Complex64 + Sync);

pub const CAUCHY_POINTS: usize = 64;
const MAX_ITER: usize = 1000;

fn check_dims(phis: &[MultiFn], radii: &[f64]) -> Result<usize> {
    let s = phis.len();
    if !(1..=2).contains(&s) {
        return Err(Error::InvalidParam(format!("lagrange series needs 1 or 2 maps, got {s}")));
    }
    if radii.len() != s || radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::InvalidParam(format!("need {s} positive radii, got {radii:?}")));
    }
    Ok(s)
}

/// Points of the `s`-torus with the given radii, `m` per circle.
fn torus(radii: &[f64], m: usize) -> Vec<Vec<Complex64>> {
    let circle = |r: f64| -> Vec<Complex64> {
        (0..m).map(|k| Complex64::from_polar(r, 2.0 * PI * (k as f64 + 0.5) / m as f64)).collect()
    };
    let mut pts: Vec<Vec<Complex64>> = vec![vec![]];
    for &r in radii {
        let c = circle(r);
        pts = pts.into_iter().flat_map(|p| c.iter().map(move |z| [p.clone(), vec![*z]].concat())).collect();
    }
    pts
}

/// Checks `|phi_j| < r_j` on the torus `|z_k| = r_k`.
pub fn check_contraction(phis: &[MultiFn], radii: &[f64]) -> Result<()> {
    check_dims(phis, radii)?;
    for p in torus(radii, CAUCHY_POINTS) {
        for (j, phi) in phis.iter().enumerate() {
            let v = phi(&p).norm();
            if !(v < radii[j]) {
                return Err(Error::Contraction(format!("|phi_{}| = {v:.4e} >= r = {} at {p:?}", j + 1, radii[j])));
            }
        }
    }
    Ok(())
}

/// Partial sums `sum_{|n| <= k} prod_r (1/n_r!) d^{n_r} [phi^n f] at 0` for `k = 0..=max_order`.
/// Taylor coefficients come from Cauchy integrals on circles of radius `r_j / 2`.
pub fn lagrange_series(phis: &[MultiFn], f: MultiFn, radii: &[f64], max_order: usize) -> Result<Vec<Complex64>> {
    check_contraction(phis, radii)?;
    let half: Vec<f64> = radii.iter().map(|r| 0.5 * r).collect();
    let pts = torus(&half, CAUCHY_POINTS);
    // phi_j / z_j and f on the grid
    let ratios: Vec<Vec<Complex64>> = pts.iter().map(|p| phis.iter().zip(p).map(|(phi, z)| phi(p) / z).collect()).collect();
    let fv: Vec<Complex64> = pts.iter().map(|p| f(p)).collect();
    let np = pts.len() as f64;

    let coeff = |n: &[usize]| -> Complex64 {
        ratios
            .iter()
            .zip(&fv)
            .map(|(rt, fz)| rt.iter().zip(n).fold(*fz, |acc, (r, &k)| acc * r.powu(k as u32)))
            .sum::<Complex64>()
            / np
    };

    let mut sums = Vec::with_capacity(max_order + 1);
    let mut acc = Complex64::new(0.0, 0.0);
    for order in 0..=max_order {
        let term: Complex64 = match phis.len() {
            1 => coeff(&[order]),
            _ => (0..=order).map(|a| coeff(&[a, order - a])).sum(),
        };
        acc += term;
        sums.push(acc);
    }
    Ok(sums)
}

/// Fixed point `z = phi(z)` reached by iteration from the origin.
pub fn lagrange_fixed_point(phis: &[MultiFn]) -> Result<Vec<Complex64>> {
    let mut z = vec![Complex64::new(0.0, 0.0); phis.len()];
    for _ in 0..MAX_ITER {
        let next: Vec<Complex64> = phis.iter().map(|phi| phi(&z)).collect();
        let step = next.iter().zip(&z).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let scale = next.iter().map(|a| a.norm()).fold(1.0, f64::max);
        z = next;
        if step <= 1e-15 * scale {
            return Ok(z);
        }
    }
    Err(Error::NoConvergence(format!("lagrange fixed point after {MAX_ITER} iterations")))
}

/// `f(z) / det[delta_jk - d phi_j / d z_k](z)` at the fixed point.
pub fn lagrange_closed_form(phis: &[MultiFn], f: MultiFn) -> Result<Complex64> {
    let s = phis.len();
    if !(1..=2).contains(&s) {
        return Err(Error::InvalidParam(format!("lagrange series needs 1 or 2 maps, got {s}")));
    }
    let z = lagrange_fixed_point(phis)?;
    // Cauchy derivative on a small circle: exact up to O(h^m)
    let (h, m) = (1e-2, 16);
    let jac = DMatrix::from_fn(s, s, |j, k| {
        let d: Complex64 = (0..m)
            .map(|i| {
                let e = Complex64::from_polar(1.0, 2.0 * PI * i as f64 / m as f64);
                let mut w = z.clone();
                w[k] += h * e;
                phis[j](&w) / e
            })
            .sum::<Complex64>()
            / (m as f64 * h);
        if j == k {
            Complex64::new(1.0, 0.0) - d
        } else {
            -d
        }
    });
    let det = jac.determinant();
    if det.norm() < 1e-14 {
        return Err(Error::Singular("det(I - D phi) vanishes at the fixed point".into()));
    }
    Ok(f(&z) / det)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn constant_map_gives_taylor_series() {
        let phi = |_: &[Complex64]| c(0.5);
        let f = |z: &[Complex64]| z[0].exp();
        let sums = lagrange_series(&[&phi], &f, &[1.0], 12).unwrap();
        let closed = lagrange_closed_form(&[&phi], &f).unwrap();
        assert!((closed - c(0.5f64.exp())).norm() < 1e-14);
        // partial sums are the Taylor polynomials of exp at 0.5
        let mut taylor = 0.0;
        let mut term = 1.0;
        for (k, s) in sums.iter().enumerate() {
            taylor += term;
            term *= 0.5 / (k + 1) as f64;
            assert!((s - c(taylor)).norm() < 1e-13, "k={k}");
        }
    }

    #[test]
    fn linear_map_is_geometric() {
        let phi = |z: &[Complex64]| 0.3 * z[0];
        let f = |z: &[Complex64]| z[0].exp();
        let sums = lagrange_series(&[&phi], &f, &[1.0], 30).unwrap();
        for (k, s) in sums.iter().enumerate() {
            let exact = (1.0 - 0.3f64.powi(k as i32 + 1)) / 0.7;
            assert!((s - c(exact)).norm() < 1e-13, "k={k}");
        }
        let closed = lagrange_closed_form(&[&phi], &f).unwrap();
        assert!((closed - c(1.0 / 0.7)).norm() < 1e-13);
        assert!((sums[30] - closed).norm() < 1e-13);
    }

    #[test]
    fn two_variable_map() {
        let p1 = |z: &[Complex64]| 0.1 + 0.05 * z[1];
        let p2 = |z: &[Complex64]| 0.2 + 0.05 * z[0];
        // hand solution of the linear fixed point
        let det = 1.0 - 0.0025;
        let z1: f64 = (0.1 + 0.05 * 0.2) / det;
        let z2 = 0.2 + 0.05 * z1;

        let one = |_: &[Complex64]| c(1.0);
        let sums = lagrange_series(&[&p1, &p2], &one, &[1.0, 1.0], 8).unwrap();
        let closed = lagrange_closed_form(&[&p1, &p2], &one).unwrap();
        assert!((closed - c(1.0 / det)).norm() < 1e-13);
        assert!((sums[8] - closed).norm() < 1e-8);

        let f = |z: &[Complex64]| (z[0] + z[1]).exp();
        let sums = lagrange_series(&[&p1, &p2], &f, &[1.0, 1.0], 14).unwrap();
        let closed = lagrange_closed_form(&[&p1, &p2], &f).unwrap();
        assert!((closed - c((z1 + z2).exp() / det)).norm() < 1e-13);
        // truncation at order 8 is ~4e-8 for this f
        assert!((sums[8] - closed).norm() < 1e-7);
        assert!((sums[14] - closed).norm() < 1e-12);
        for k in 3..14 {
            assert!((sums[k + 1] - sums[k]).norm() < (sums[k] - sums[k - 1]).norm());
        }
    }

    #[test]
    fn two_variable_coefficients() {
        // constant maps: partial sums are Taylor polynomials of exp at 0.3
        let p1 = |_: &[Complex64]| c(0.1);
        let p2 = |_: &[Complex64]| c(0.2);
        let f = |z: &[Complex64]| (z[0] + z[1]).exp();
        let sums = lagrange_series(&[&p1, &p2], &f, &[1.0, 1.0], 10).unwrap();
        let (mut taylor, mut term) = (0.0, 1.0);
        for (k, s) in sums.iter().enumerate() {
            taylor += term;
            term *= 0.3 / (k + 1) as f64;
            assert!((s - c(taylor)).norm() < 1e-13, "k={k}");
        }
    }

    #[test]
    fn errors() {
        let big = |z: &[Complex64]| 2.0 * z[0] + 0.1;
        let f = |_: &[Complex64]| c(1.0);
        assert!(matches!(lagrange_series(&[&big], &f, &[1.0], 4), Err(Error::Contraction(_))));
        assert!(matches!(lagrange_closed_form(&[&big], &f), Err(Error::NoConvergence(_))));
        let phi = |_: &[Complex64]| c(0.0);
        assert!(matches!(lagrange_series(&[&phi], &f, &[1.0, 1.0], 4), Err(Error::InvalidParam(_))));
    }
}
