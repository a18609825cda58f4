//! Amplitude functionals and the thermodynamic form-factor amplitudes of the
//! three explicit terms.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dressing::DressedSet;
use crate::error::{Error, Result, SaddleError};
use crate::excitations::{special_shift, Excitation, ShiftFn, ShiftKind};
use crate::model::{kernel_c, ModelParams};
use crate::specfun::{barnes_g_log, c0_double_integral, cauchy_transform, ln_gamma_real, ln_kappa, Analytic};

const RESONANCE_TOL: f64 = 1e-8;
const CONTOUR_RESONANCE_TOL: f64 = 1e-6;

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Axis-aligned ellipse centred at the origin, discretised by the trapezoid rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSpec {
    pub semi_major: f64,
    pub semi_minor: f64,
    pub n_contour_nodes: usize,
}

pub const DEFAULT_CONTOUR_NODES: usize = 256;

impl ContourSpec {
    pub fn default_for(dressed: &DressedSet, n_contour_nodes: usize) -> Self {
        let b = (0.2 * dressed.params.c).min(0.5 * dressed.q);
        Self { semi_major: dressed.q + b, semi_minor: b, n_contour_nodes }
    }

    pub fn with_semi_minor(dressed: &DressedSet, b: f64, n_contour_nodes: usize) -> Self {
        Self { semi_major: dressed.q + b, semi_minor: b, n_contour_nodes }
    }

    /// Nodes and `d omega` weights, counterclockwise.
    pub fn nodes(&self) -> Vec<(Complex64, Complex64)> {
        let m = self.n_contour_nodes;
        let h = 2.0 * PI / m as f64;
        (0..m)
            .map(|j| {
                let t = h * j as f64;
                let (s, c) = t.sin_cos();
                (cx(self.semi_major * c, self.semi_minor * s), cx(-self.semi_major * s, self.semi_minor * c) * h)
            })
            .collect()
    }

    fn validate(&self, q: f64, c: f64, holes: &[f64]) -> Result<()> {
        if self.n_contour_nodes < 4 || self.n_contour_nodes % 2 != 0 {
            return Err(Error::Contour(format!("node count {} must be even and >= 4", self.n_contour_nodes)));
        }
        if !(self.semi_minor > 0.0 && self.semi_minor < 0.25 * c) {
            return Err(Error::Contour(format!("semi-minor {} must lie in (0, c/4)", self.semi_minor)));
        }
        if self.semi_major <= q * (1.0 + 1e-3) {
            return Err(Error::Contour(format!("semi-major {} does not enclose [-q, q]", self.semi_major)));
        }
        if let Some(h) = holes.iter().find(|h| h.abs() >= self.semi_major) {
            return Err(Error::Contour(format!("hole {h} outside the contour")));
        }
        Ok(())
    }
}

/// Complex logarithms of the factors of an amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeParts {
    pub ln_b: Complex64,
    pub ln_a: Complex64,
    pub ln_g: Complex64,
    pub ln_prefactor: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeResult {
    pub value: f64,
    pub phase_residual: f64,
    pub parts: AmplitudeParts,
}

fn nu_boundary(nu: &dyn Analytic, q: f64) -> (f64, f64) {
    (nu.eval_real(q), nu.eval_real(-q))
}

/// `ln B[nu, p]`.
pub fn functional_b(nu: &dyn Analytic, dressed: &DressedSet) -> Result<Complex64> {
    let q = dressed.q;
    let (nq, nmq) = nu_boundary(nu, q);
    let lk_q = ln_kappa(nu, cx(q, 0.0), dressed)?;
    let lk_mq = ln_kappa(nu, cx(-q, 0.0), dressed)?;
    let g1 = barnes_g_log(cx(1.0 + nq, 0.0))?;
    let g2 = barnes_g_log(cx(1.0 - nmq, 0.0))?;
    let l_pq = (2.0 * q * dressed.p1(q)).ln();
    let l_pmq = (2.0 * q * dressed.p1(-q)).ln();
    let g = &dressed.grid;
    let n = g.n_nodes;
    let v: Vec<f64> = g.nodes.iter().map(|&x| nu.eval_real(x)).collect();
    let d: Vec<f64> = g.nodes.iter().map(|&x| nu.deriv_real(x)).collect();
    let mut dbl = 0.0;
    for j in 0..n {
        for k in 0..n {
            let val = if j == k {
                nu.deriv2_real(g.nodes[j]) * v[j] - d[j] * d[j]
            } else {
                (d[j] * v[k] - d[k] * v[j]) / (g.nodes[j] - g.nodes[k])
            };
            dbl += g.weights[j] * g.weights[k] * val;
        }
    }
    Ok(nmq * lk_mq - nq * lk_q + 2.0 * g1 + 2.0 * g2 + cx(0.0, 0.5 * PI * (nq * nq - nmq * nmq))
        - nq * nq * l_pq
        - nmq * nmq * l_pmq
        - (nq - nmq) * (2.0 * PI).ln()
        + 0.5 * dbl)
}

fn ln_resonant(nu_val: f64, sign: f64, at: &str) -> Result<Complex64> {
    let e = cx(0.0, -2.0 * PI * sign * nu_val).exp() - 1.0;
    if e.norm() < RESONANCE_TOL {
        return Err(Error::Resonance(e.norm(), at.into()));
    }
    Ok(e.ln())
}

/// `ln A_+[nu]`.
pub fn functional_aplus(nu: &dyn Analytic, dressed: &DressedSet) -> Result<Complex64> {
    let q = dressed.q;
    let nq = nu.eval_real(q);
    let lr = ln_resonant(nq, 1.0, "q")?;
    let lk = ln_kappa(nu, cx(q, 0.0), dressed)?;
    let lp = (2.0 * q * dressed.p1(q)).ln();
    Ok((2.0 * q).ln() + cx(0.0, PI) - 2.0 * lk - (2.0 * nq + 1.0) * lp + ln_gamma_real(1.0 + nq) - ln_gamma_real(-nq) - lr)
}

/// `ln A_-[nu]`.
pub fn functional_aminus(nu: &dyn Analytic, dressed: &DressedSet) -> Result<Complex64> {
    let q = dressed.q;
    let nmq = nu.eval_real(-q);
    let lr = ln_resonant(nmq, 1.0, "-q")?;
    let lk = ln_kappa(nu, cx(-q, 0.0), dressed)?;
    let lp = (2.0 * q * dressed.p1(-q)).ln();
    Ok((2.0 * q).ln() + cx(0.0, PI) - 2.0 * lk + ln_gamma_real(1.0 - nmq) - ln_gamma_real(nmq) + (2.0 * nmq - 1.0) * lp - lr)
}

/// `ln A_0[nu]`; in the time-like regime `lambda0 - q` carries the phase `+i pi`.
pub fn functional_a0(nu: &dyn Analytic, lambda0: f64, dressed: &DressedSet) -> Result<Complex64> {
    let q = dressed.q;
    if (lambda0 - q).abs() < 1e-6 || (lambda0 + q).abs() < 1e-6 {
        return Err(SaddleError::DegenerateSaddle(lambda0).into());
    }
    let lk = ln_kappa(nu, cx(lambda0, 0.0), dressed)?;
    let l_minus = if lambda0 > q { cx((lambda0 - q).ln(), 0.0) } else { cx((q - lambda0).ln(), PI) };
    let l_plus = cx((lambda0 + q).abs().ln(), if lambda0 + q < 0.0 { PI } else { 0.0 });
    Ok(cx(0.0, -0.25 * PI) - 2.0 * lk + 2.0 * nu.eval_real(lambda0) * (l_minus - l_plus))
}

/// Fredholm determinant of the contour operator with kernel `pref(w) K(w - w')`.
fn contour_det(pref: &[Complex64], nodes: &[(Complex64, Complex64)], c: f64) -> Complex64 {
    let m = nodes.len();
    let a = DMatrix::from_fn(m, m, |j, k| {
        let d = if j == k { cx(1.0, 0.0) } else { cx(0.0, 0.0) };
        d + pref[j] * kernel_c(nodes[j].0 - nodes[k].0, c) * nodes[k].1
    });
    a.lu().determinant()
}

/// `ln G^(0)_{n;1}` for `n` in {0, 1}.
pub fn smooth_part_g_log(
    n: usize,
    excitation: &Excitation,
    nu: &ShiftFn,
    contour: &ContourSpec,
    dressed: &DressedSet,
    params: &ModelParams,
) -> Result<Complex64> {
    let (np, nh) = (excitation.particles.len(), excitation.holes.len());
    if n > 1 || np != n || nh != n {
        return Err(Error::Configuration(format!("smooth part with n={n} needs n particles and n holes, got {np}/{nh}")));
    }
    let q = dressed.q;
    let c = params.c;
    contour.validate(q, c, &excitation.holes)?;
    let ic = cx(0.0, c);
    let tip = cx(0.0, 2.0 * PI);
    let cauchy = |z: Complex64| cauchy_transform(nu, z, dressed);

    let mut acc = -tip * (cauchy(q + ic)? + cauchy(q - ic)?);
    for (&mp, &mh) in excitation.particles.iter().zip(&excitation.holes) {
        for eps in [1.0, -1.0] {
            let s = eps * ic;
            acc += (mh - q + s).ln() - (mp - q + s).ln() + tip * cauchy(mh + s)? - tip * cauchy(mp + s)?;
        }
    }
    acc += c0_double_integral(nu, dressed, params);
    for &pa in &excitation.particles {
        for &hb in &excitation.holes {
            acc += (pa - hb - ic).ln();
        }
    }
    for &ha in &excitation.holes {
        for &pb in &excitation.particles {
            acc += (ha - pb - ic).ln();
        }
    }
    for &pa in &excitation.particles {
        for &pb in &excitation.particles {
            acc -= (pa - pb - ic).ln();
        }
    }
    for &ha in &excitation.holes {
        for &hb in &excitation.holes {
            acc -= (ha - hb - ic).ln();
        }
    }

    let nodes = contour.nodes();
    let mut pv = Vec::with_capacity(nodes.len());
    let mut pvb = Vec::with_capacity(nodes.len());
    for &(w, _) in &nodes {
        let nw = nu.eval_c(w)?;
        let em = (-tip * nw).exp() - 1.0;
        let ep = (tip * nw).exp() - 1.0;
        if em.norm() < CONTOUR_RESONANCE_TOL || ep.norm() < CONTOUR_RESONANCE_TOL {
            return Err(Error::Resonance(em.norm().min(ep.norm()), format!("contour point {w}")));
        }
        let cw = cauchy(w)?;
        let mut rv = (w - q) / (w - q + ic);
        let mut rvb = (w - q) / (w - q - ic);
        for (&mp, &mh) in excitation.particles.iter().zip(&excitation.holes) {
            rv *= (w - mp) * (w - mh + ic) / ((w - mh) * (w - mp + ic));
            rvb *= (w - mp) * (w - mh - ic) / ((w - mh) * (w - mp - ic));
        }
        pv.push(-rv / (2.0 * PI) * (tip * (cw - cauchy(w + ic)?)).exp() / em);
        pvb.push(rvb / (2.0 * PI) * (tip * (cw - cauchy(w - ic)?)).exp() / ep);
    }
    let dv = contour_det(&pv, &nodes, c);
    let dvb = contour_det(&pvb, &nodes, c);
    acc += dv.ln() + dvb.ln() - 2.0 * dressed.det_ik.ln();
    Ok(acc)
}

pub fn smooth_part_g(
    n: usize,
    excitation: &Excitation,
    nu: &ShiftFn,
    contour: &ContourSpec,
    dressed: &DressedSet,
    params: &ModelParams,
) -> Result<Complex64> {
    Ok(smooth_part_g_log(n, excitation, nu, contour, dressed, params)?.exp())
}

/// Amplitude `|F|^2` of one of the three explicit terms.
pub fn amplitude(kind: ShiftKind, dressed: &DressedSet, lambda0: f64, contour: &ContourSpec, params: &ModelParams) -> Result<AmplitudeResult> {
    let q = dressed.q;
    let nu = special_shift(kind, dressed, lambda0)?;
    let (nq, nmq) = (nu.at_q, nu.at_minus_q);
    let ln_b = functional_b(&nu, dressed)?;
    let (ln_a, ln_g, phase, ln_prefactor) = match kind {
        ShiftKind::Empty => (
            functional_aplus(&nu, dressed)?,
            smooth_part_g_log(0, &Excitation::empty(), &nu, contour, dressed, params)?,
            nmq * nmq - (nq + 1.0).powi(2),
            cx(0.0, 0.0),
        ),
        ShiftKind::MinusQ => (
            functional_aminus(&nu, dressed)?,
            smooth_part_g_log(1, &Excitation { particles: vec![-q], holes: vec![q] }, &nu, contour, dressed, params)?,
            (nmq - 1.0).powi(2) - nq * nq,
            cx(0.0, 0.0),
        ),
        ShiftKind::Saddle => (
            functional_a0(&nu, lambda0, dressed)?,
            smooth_part_g_log(1, &Excitation { particles: vec![lambda0], holes: vec![q] }, &nu, contour, dressed, params)?,
            nmq * nmq - nq * nq,
            cx(0.0, 0.25 * PI) - (2.0 * PI * dressed.p1(lambda0)).ln(),
        ),
    };
    let total = (ln_b + ln_a + ln_g + ln_prefactor + cx(0.0, 0.5 * PI * phase)).exp();
    Ok(AmplitudeResult {
        value: total.re,
        phase_residual: total.im.abs(),
        parts: AmplitudeParts { ln_b, ln_a, ln_g, ln_prefactor },
    })
}

/// Closed forms of the three amplitudes in the hard-core limit `c -> infinity`.
pub fn hard_core_amplitude(kind: ShiftKind, q: f64, lambda0: f64) -> Result<f64> {
    let b = PI * (4.0 * barnes_g_log(cx(0.5, 0.0))?.re).exp() / (2.0 * q).sqrt();
    Ok(match kind {
        ShiftKind::Empty => q * b,
        ShiftKind::MinusQ => b / (16.0 * q),
        ShiftKind::Saddle => (lambda0 + q) / (2.0 * PI * (lambda0 - q)) * b,
    })
}
