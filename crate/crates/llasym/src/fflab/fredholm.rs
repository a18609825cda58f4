use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{FFLabInstance, QuadraticPhase, TestNu};
use crate::error::{Error, Result};
use crate::quad::gauss_legendre;

/// Data of the thermodynamic Fredholm minor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FredholmInput {
    pub zone: (f64, f64),
    pub nu: TestNu,
    pub phase: QuadraticPhase,
    /// Truncation `|Re z| <= w` of the steepest-descent contour.
    pub truncation: f64,
    pub n_nodes: usize,
}

impl FredholmInput {
    pub fn from_instance(instance: &FFLabInstance, truncation: f64, n_nodes: usize) -> Self {
        Self { zone: instance.fermi_zone(), nu: instance.nu, phase: instance.phase, truncation, n_nodes }
    }
}

/// `S = int E^{-2} dl / 2pi` along the full steepest-descent line through `1/(2 tau)`.
pub fn steepest_descent_s(phase: &QuadraticPhase) -> Complex64 {
    let ls = phase.saddle();
    let u0 = ls - phase.tau * ls * ls;
    Complex64::new(0.0, phase.x * u0 - 0.25 * PI).exp() * (PI / (phase.x * phase.tau)).sqrt() / (2.0 * PI)
}

struct LineRule {
    z: Vec<Complex64>,
    w: Vec<Complex64>,
}

fn line_rule(input: &FredholmInput) -> Result<LineRule> {
    let ph = &input.phase;
    if !(ph.tau > 0.0 && ph.x > 0.0) {
        return Err(Error::InvalidParam("quadratic phase needs x > 0 and tau > 0".into()));
    }
    let ls = ph.saddle();
    let (a, b) = input.zone;
    if ls <= b.max(a) {
        return Err(Error::Contour(format!("stationary point {ls} does not lie right of the Fermi zone")));
    }
    let dir = Complex64::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2);
    let cut = (90.0 / (ph.x * ph.tau)).sqrt();
    let w = input.truncation;
    let lo = (-(w + ls) / FRAC_1_SQRT_2).max(-cut);
    let hi = ((w - ls) / FRAC_1_SQRT_2).min(cut);
    if hi <= lo {
        return Err(Error::Contour(format!("truncation {w} leaves no contour")));
    }
    let width = 0.25 / (ph.x * ph.tau).sqrt();
    let panels = (((hi - lo) / width).ceil() as usize).max(8);
    let h = (hi - lo) / panels as f64;
    let mut z = Vec::new();
    let mut wt = Vec::new();
    for p in 0..panels {
        let (s, ws) = gauss_legendre(16, lo + p as f64 * h, lo + (p + 1) as f64 * h);
        for (si, wi) in s.into_iter().zip(ws) {
            z.push(ls + dir * si);
            wt.push(dir * wi);
        }
    }
    Ok(LineRule { z, w: wt })
}

/// `X = (S + (2/pi) int y f) det(I + V)` on the Fermi zone, where
/// `f = E sin(pi nu) O`, `(I + V) y = f` and the contour is truncated at `|Re z| <= w`.
pub fn fredholm_minor_limit(input: &FredholmInput) -> Result<Complex64> {
    let ph = input.phase;
    let nu = input.nu;
    let rule = line_rule(input)?;
    let s_total: Complex64 = rule.z.iter().zip(&rule.w).map(|(&z, &w)| ph.e_minus_sq_inv(z) * w).sum::<Complex64>() / (2.0 * PI);
    let (a, b) = input.zone;
    let (nodes, weights) = gauss_legendre(input.n_nodes, a, b);
    let i = Complex64::i();
    let n = nodes.len();

    // sin(pi nu) O and its derivative, with the resonant 0/0 resolved analytically
    let mut ot = Vec::with_capacity(n);
    let mut otp = Vec::with_capacity(n);
    let mut sv = Vec::with_capacity(n);
    let mut spv = Vec::with_capacity(n);
    let mut ev = Vec::with_capacity(n);
    for &l in &nodes {
        let lc = Complex64::new(l, 0.0);
        let (mut c0, mut c1) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for (&z, &w) in rule.z.iter().zip(&rule.w) {
            let g = ph.e_minus_sq_inv(z) * w / (z - lc);
            c0 += g;
            c1 += g / (z - lc);
        }
        let (o_int, o_int_p) = (i * c0 / (2.0 * PI), i * c1 / (2.0 * PI));
        let nv = nu.eval(l);
        let s = (PI * nv).sin();
        let sp = PI * (PI * nv).cos() * nu.deriv(l);
        let em = ph.e_minus_sq_inv(lc);
        let tail = em * i * Complex64::new(0.0, PI * nv).exp() / 2.0;
        let tail_p = (i * ph.x * (1.0 - 2.0 * ph.tau * l) + i * PI * nu.deriv(l)) * tail;
        ot.push(s * o_int + tail);
        otp.push(sp * o_int + s * o_int_p + tail_p);
        sv.push(s);
        spv.push(sp);
        ev.push(ph.e_minus(lc));
    }
    let pre = 4.0 / (2.0 * PI * i);
    let m = DMatrix::<Complex64>::from_fn(n, n, |j, k| {
        let v = if j == k {
            pre * ev[j] * ev[j] * (sv[j] * otp[j] - spv[j] * ot[j])
        } else {
            pre * ev[j] * ev[k] * (sv[k] * ot[j] - sv[j] * ot[k]) / (nodes[j] - nodes[k])
        };
        let d = if j == k { 1.0 } else { 0.0 };
        d + v * weights[k]
    });
    let f = DVector::<Complex64>::from_fn(n, |j, _| ev[j] * ot[j]);
    let lu = m.lu();
    let det = lu.determinant();
    let y = lu.solve(&f).ok_or_else(|| Error::Singular("I + V".into()))?;
    let proj: Complex64 = (0..n).map(|j| weights[j] * y[j] * f[j]).sum();
    Ok((s_total + 2.0 / PI * proj) * det)
}
