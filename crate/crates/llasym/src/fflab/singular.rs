use std::f64::consts::PI;

use num_complex::Complex64;

use super::FFLabInstance;
use crate::error::{Error, Result};
use crate::quad::segment;

const QUAD_TOL: f64 = 1e-13;
const PLACEMENT_GUARD: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct SingularSumResult {
    pub r: u32,
    pub lambda: f64,
    pub discrete: Complex64,
    /// Integral along the bulk curve.
    pub main: Complex64,
    pub local: Complex64,
    /// `discrete - main - local`.
    pub remainder: Complex64,
    /// The same remainder from its own contour integrals.
    pub remainder_quadrature: Complex64,
}

impl SingularSumResult {
    pub fn identity_residual(&self) -> f64 {
        (self.discrete - self.main - self.local - self.remainder_quadrature).norm()
    }
}

fn dist_to_segment(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let t = (((p - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

/// Exact decomposition of `S_r(lambda) = sum_a E^{-2}(mu_a) / (2 pi L xi'(mu_a) (mu_a - lambda)^r)`.
///
/// The rectangle has vertical sides at `xi = +-(w + 1/2)/L` and height
/// `alpha`. The bulk curve runs from the upper-left corner along `Im = alpha`
/// to `-A`, then straight through the stationary point of `u` on the real
/// axis to the lower-right corner; it passes above the Fermi zone.
pub fn singular_sum(instance: &FFLabInstance, r: u32, lambda: f64) -> Result<SingularSumResult> {
    if r > 2 {
        return Err(Error::InvalidParam(format!("r={r} not in 0..=2")));
    }
    let inst = instance;
    let ph = inst.phase;
    let ll = inst.l;
    let alpha = inst.alpha;
    let i = Complex64::i();
    let lam = Complex64::new(lambda, 0.0);
    let xl = inst.xi.inverse(-(inst.w as f64 + 0.5) / ll);
    let xr = inst.xi.inverse((inst.w as f64 + 0.5) / ll);
    let (zl, zr) = inst.fermi_zone();
    let a_left = zl - 0.5 * (zr - zl).abs().max(alpha);
    let ls = ph.saddle();
    if !(ph.tau > 0.0 && ls > zr && ls < xr && a_left > xl) {
        return Err(Error::Contour(format!("stationary point {ls} not between the Fermi zone and the window edge {xr}")));
    }

    let bulk = [Complex64::new(xl, alpha), Complex64::new(a_left, alpha), Complex64::new(ls, 0.0), Complex64::new(xr, -alpha)];
    let up = [Complex64::new(xl, 0.0), Complex64::new(xl, alpha), Complex64::new(xr, alpha), Complex64::new(xr, 0.0)];
    let down = [Complex64::new(xl, 0.0), Complex64::new(xl, -alpha), Complex64::new(xr, -alpha), Complex64::new(xr, 0.0)];
    let edges = [[up[0], up[1]], [down[2], down[3]]];
    let mut dmin = f64::INFINITY;
    for poly in [&bulk[..], &up[..], &down[..]] {
        for s in poly.windows(2) {
            dmin = dmin.min(dist_to_segment(lam, s[0], s[1]));
        }
    }
    let phase_l = inst.xi.eval(lambda) * ll;
    if dmin < PLACEMENT_GUARD || (phase_l - phase_l.round()).abs() < PLACEMENT_GUARD {
        return Err(Error::Contour(format!("lambda={lambda} within {PLACEMENT_GUARD} of a contour or quantization point")));
    }

    let f = |z: Complex64| ph.e_minus_sq_inv(z) / (z - lam).powi(r as i32);
    let e2 = |z: Complex64| (2.0 * PI * i * ll * inst.xi.eval_c(z)).exp();
    let g_up = |z: Complex64| f(z) / (1.0 - 1.0 / e2(z));
    let g_down = |z: Complex64| f(z) / (e2(z) - 1.0);
    let path = |h: &dyn Fn(Complex64) -> Complex64, pts: &[Complex64]| -> Complex64 {
        pts.windows(2).map(|s| segment(&h, s[0], s[1], QUAD_TOL)).sum::<Complex64>() / (2.0 * PI)
    };

    let discrete: Complex64 = inst
        .window()
        .map(|a| {
            let m = Complex64::new(inst.mu(a), 0.0);
            f(m) / (2.0 * PI * ll * inst.xi.deriv())
        })
        .sum();
    let main = path(&f, &bulk);
    let e_l = e2(lam);
    let fl = ph.e_minus_sq_inv(lam);
    let local = match r {
        0 => Complex64::new(0.0, 0.0),
        1 => -i * fl / (e_l - 1.0),
        _ => {
            let s = (PI * phase_l).sin();
            -i * ph.e_minus_sq_inv_deriv(lam) / (e_l - 1.0) + PI * fl * ll * inst.xi.deriv() / (2.0 * s * s)
        }
    };
    let remainder_quadrature = -path(&g_up, &up) + path(&g_down, &down) + path(&f, &edges[0]) + path(&f, &edges[1]);
    Ok(SingularSumResult { r, lambda, discrete, main, local, remainder: discrete - main - local, remainder_quadrature })
}
