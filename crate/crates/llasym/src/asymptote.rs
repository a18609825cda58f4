//! Leading asymptotic expansion of the one-particle density matrix and its
//! evaluation at given `(x, t)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::amplitudes::{amplitude, ContourSpec, DEFAULT_CONTOUR_NODES};
use crate::dressing::{dress_all, DressedSet, DEFAULT_NODES};
use crate::error::{Error, Result};
use crate::excitations::{
    critical_exponent_pair, default_scan_range, find_saddle, harmonic_table, special_shift, u_combination, BoundaryData, HarmonicEntry,
    Regime, Saddle, ShiftKind,
};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Numerics {
    pub n_nodes: usize,
    pub contour_nodes: usize,
    pub tol: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        Self { n_nodes: DEFAULT_NODES, contour_nodes: DEFAULT_CONTOUR_NODES, tol: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermLabel {
    Saddle,
    TwoPF,
    ZeroFreq,
    Harmonic(i64, i64),
}

impl TermLabel {
    pub fn name(&self) -> String {
        match self {
            TermLabel::Saddle => "saddle".into(),
            TermLabel::TwoPF => "two_pF".into(),
            TermLabel::ZeroFreq => "zero_freq".into(),
            TermLabel::Harmonic(p, m) => format!("harmonic({p},{m})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amplitude {
    Known(Complex64),
    Unknown,
}

/// One term `A e^{i x f} / ([i(x+vF t)]^a+ [-i(x-vF t)]^a- x^extra)`.
///
/// For harmonics the exponents split `Delta` as `(Delta_- - l-)^2` on `x+vF t`,
/// `(1 + l+ + Delta_+)^2` on `x-vF t` and `|l+ + l-|/2` in `extra_power`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticTerm {
    pub label: TermLabel,
    pub frequency: f64,
    pub exponent_plus: f64,
    pub exponent_minus: f64,
    pub extra_power: f64,
    pub amplitude: Amplitude,
    pub active: bool,
}

impl AsymptoticTerm {
    pub fn total_exponent(&self) -> f64 {
        self.exponent_plus + self.exponent_minus + self.extra_power
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedSummary {
    pub c: f64,
    pub h: f64,
    pub q: f64,
    pub density: f64,
    pub p_f: f64,
    pub v_f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleData {
    pub lambda0: f64,
    pub regime: Regime,
    pub p2: f64,
    pub e2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionReport {
    pub summary: DressedSummary,
    pub ratio_t_over_x: f64,
    pub saddle: Option<SaddleData>,
    pub terms: Vec<AsymptoticTerm>,
    pub evaluations: Vec<RhoEvaluation>,
}

impl ExpansionReport {
    pub fn term(&self, label: TermLabel) -> Option<&AsymptoticTerm> {
        self.terms.iter().find(|t| t.label == label)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TermContribution {
    pub label: TermLabel,
    pub value: Option<Complex64>,
    pub modulus: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RhoEvaluation {
    pub x: f64,
    pub t: f64,
    pub value: Complex64,
    pub breakdown: Vec<TermContribution>,
}

fn static_boundary(dressed: &DressedSet) -> Result<BoundaryData> {
    let q = dressed.q;
    let fm = dressed.phi_field(-q)?;
    let fp = dressed.phi_field(q)?;
    Ok(BoundaryData {
        z: [dressed.charge(q), dressed.charge(-q)],
        phi_mq: [fm.eval(q), fm.eval(-q)],
        phi_q: [fp.eval(q), fp.eval(-q)],
        phi_l0: [0.0, 0.0],
        u_q: u_combination(q, 0.0, dressed),
        u_mq: u_combination(-q, 0.0, dressed),
        u_l0: 0.0,
    })
}

fn harmonic_term(b: &BoundaryData, e: &HarmonicEntry) -> AsymptoticTerm {
    let (p, m) = (e.ell_plus as f64, e.ell_minus as f64);
    let delta = |i: usize| -0.5 * b.z[i] - m * b.phi_mq[i] - (p + 1.0) * b.phi_q[i] + (p + m) * b.phi_l0[i];
    AsymptoticTerm {
        label: TermLabel::Harmonic(e.ell_plus, e.ell_minus),
        frequency: e.frequency,
        exponent_plus: (delta(1) - m).powi(2),
        exponent_minus: (1.0 + p + delta(0)).powi(2),
        extra_power: 0.5 * (p + m).abs(),
        amplitude: Amplitude::Unknown,
        active: true,
    }
}

/// Builds the expansion from an existing dressed set.
pub fn expansion_from_dressed(dressed: &DressedSet, ratio_t_over_x: f64, max_abs_ell: i64, contour_nodes: usize) -> Result<ExpansionReport> {
    build(dressed, ratio_t_over_x, max_abs_ell, Some(contour_nodes))
}

/// Frequencies and exponents only; every amplitude is left `Unknown`.
pub fn exponent_table(dressed: &DressedSet, ratio_t_over_x: f64, max_abs_ell: i64) -> Result<ExpansionReport> {
    build(dressed, ratio_t_over_x, max_abs_ell, None)
}

fn build(dressed: &DressedSet, ratio_t_over_x: f64, max_abs_ell: i64, contour_nodes: Option<usize>) -> Result<ExpansionReport> {
    let r = ratio_t_over_x;
    if !(r.is_finite() && r >= 0.0) {
        return Err(crate::SaddleError::InvalidRatio(r).into());
    }
    let params = dressed.params;
    let q = dressed.q;
    let saddle: Option<Saddle> = if r == 0.0 { None } else { Some(find_saddle(r, dressed, default_scan_range(r, q))?) };
    let contour = ContourSpec::default_for(dressed, contour_nodes.unwrap_or(DEFAULT_CONTOUR_NODES));
    let lambda0 = saddle.map(|s| s.lambda0).unwrap_or(f64::INFINITY);

    let kinds = [ShiftKind::Empty, ShiftKind::MinusQ, ShiftKind::Saddle];
    let amps: Vec<Option<Result<f64>>> = kinds
        .par_iter()
        .map(|&k| match (k, saddle) {
            _ if contour_nodes.is_none() => None,
            (ShiftKind::Saddle, None) => None,
            (ShiftKind::Saddle, Some(s)) if s.regime == Regime::TimeLike => {
                amplitude(k, dressed, lambda0, &contour, &params).ok().map(|a| Ok(a.value))
            }
            _ => Some(amplitude(k, dressed, lambda0, &contour, &params).map(|a| a.value)),
        })
        .collect();
    let amp = |i: usize| -> Result<Amplitude> {
        match &amps[i] {
            Some(Ok(v)) => Ok(Amplitude::Known(Complex64::new(*v, 0.0))),
            Some(Err(e)) => Err(e.clone()),
            None => Ok(Amplitude::Unknown),
        }
    };

    let mut terms = Vec::new();
    if let Some(s) = saddle {
        let nu = special_shift(ShiftKind::Saddle, dressed, lambda0)?;
        let (em, ep) = critical_exponent_pair(&nu, 0.0, 0.0);
        let a = match amp(2)? {
            Amplitude::Known(v) => Amplitude::Known(v * dressed.p1(lambda0)),
            Amplitude::Unknown => Amplitude::Unknown,
        };
        terms.push(AsymptoticTerm {
            label: TermLabel::Saddle,
            frequency: u_combination(lambda0, r, dressed) - u_combination(q, r, dressed),
            exponent_plus: ep,
            exponent_minus: em,
            extra_power: 0.5,
            amplitude: a,
            active: s.regime == Regime::SpaceLike,
        });
    }
    let nu = special_shift(ShiftKind::MinusQ, dressed, lambda0.min(1e300))?;
    let (em, ep) = critical_exponent_pair(&nu, 0.0, -1.0);
    terms.push(AsymptoticTerm {
        label: TermLabel::TwoPF,
        frequency: -2.0 * dressed.p_f,
        exponent_plus: ep,
        exponent_minus: em,
        extra_power: 0.0,
        amplitude: amp(1)?,
        active: true,
    });
    let nu = special_shift(ShiftKind::Empty, dressed, 0.0)?;
    let (em, ep) = critical_exponent_pair(&nu, 1.0, 0.0);
    terms.push(AsymptoticTerm {
        label: TermLabel::ZeroFreq,
        frequency: 0.0,
        exponent_plus: ep,
        exponent_minus: em,
        extra_power: 0.0,
        amplitude: amp(0)?,
        active: true,
    });

    match saddle {
        Some(s) => {
            let b = BoundaryData::new(dressed, lambda0)?;
            for e in harmonic_table(max_abs_ell, dressed, lambda0, s.regime)? {
                terms.push(harmonic_term(&b, &e));
            }
        }
        None => {
            let b = static_boundary(dressed)?;
            for lp in -max_abs_ell..=max_abs_ell {
                let lm = -lp;
                let frequency = b.frequency(lp, lm);
                if lp == 0 || (frequency + 2.0 * dressed.p_f).abs() <= 1e-10 * dressed.p_f.max(1.0) {
                    continue;
                }
                let e = HarmonicEntry { ell_plus: lp, ell_minus: lm, frequency, exponent: b.exponent(lp, lm), amplitude_known: false };
                terms.push(harmonic_term(&b, &e));
            }
        }
    }

    Ok(ExpansionReport {
        summary: DressedSummary { c: params.c, h: params.h, q, density: dressed.density, p_f: dressed.p_f, v_f: dressed.v_f },
        ratio_t_over_x: r,
        saddle: saddle.map(|s| SaddleData { lambda0: s.lambda0, regime: s.regime, p2: dressed.p2(s.lambda0), e2: dressed.e2(s.lambda0) }),
        terms,
        evaluations: Vec::new(),
    })
}

/// Dressing, saddle, shift functions, exponents, amplitudes and harmonics.
pub fn assemble_expansion(params: &ModelParams, ratio_t_over_x: f64, max_abs_ell: i64, numerics: &Numerics) -> Result<ExpansionReport> {
    let dressed = dress_all(params, numerics.n_nodes, numerics.tol)?;
    expansion_from_dressed(&dressed, ratio_t_over_x, max_abs_ell, numerics.contour_nodes)
}

/// Sums the active explicit terms at `(x, t)`; harmonics only contribute
/// envelopes `x^-Delta` to the breakdown.
pub fn evaluate_rho(report: &ExpansionReport, x: f64, t: f64) -> Result<RhoEvaluation> {
    if !(x > 0.0) {
        return Err(Error::Domain("x must be positive".into(), x));
    }
    let ratio = t / x;
    if (ratio - report.ratio_t_over_x).abs() > 1e-12 * report.ratio_t_over_x.abs().max(1.0) {
        return Err(Error::RatioMismatch(ratio, report.ratio_t_over_x));
    }
    let v = report.summary.v_f;
    if (x - v * t).abs() < 1e-9 * x {
        return Err(Error::LightCone(x - v * t));
    }
    let i = Complex64::i();
    let lp = (i * (x + v * t)).ln();
    let lm = (-i * (x - v * t)).ln();
    let mut value = Complex64::new(0.0, 0.0);
    let mut breakdown = Vec::with_capacity(report.terms.len());
    for term in &report.terms {
        if let TermLabel::Harmonic(..) = term.label {
            breakdown.push(TermContribution { label: term.label, value: None, modulus: x.powf(-term.total_exponent()) });
            continue;
        }
        let a = match (term.active, term.amplitude) {
            (true, Amplitude::Known(a)) => a,
            _ => {
                breakdown.push(TermContribution { label: term.label, value: None, modulus: 0.0 });
                continue;
            }
        };
        let mut z = a * (i * x * term.frequency - term.exponent_plus * lp - term.exponent_minus * lm).exp();
        if term.label == TermLabel::Saddle {
            let s = report.saddle.expect("saddle term without saddle data");
            z *= (Complex64::new(0.0, -2.0 * PI) / (t * s.e2 - x * s.p2)).sqrt();
        }
        value += z;
        breakdown.push(TermContribution { label: term.label, value: Some(z), modulus: z.norm() });
    }
    Ok(RhoEvaluation { x, t, value, breakdown })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(c: f64, h: f64, r: f64) -> ExpansionReport {
        assemble_expansion(&ModelParams::new(c, h).unwrap(), r, 2, &Numerics::default()).unwrap()
    }

    #[test]
    fn free_fermion_exponent_sums() {
        let rep = report(1e6, 1.0, 0.1);
        let s = rep.saddle.unwrap();
        assert!((s.lambda0 - 5.0).abs() < 1e-4);
        assert_eq!(s.regime, Regime::SpaceLike);
        let z = rep.term(TermLabel::ZeroFreq).unwrap();
        let two = rep.term(TermLabel::TwoPF).unwrap();
        assert!((z.total_exponent() - 0.5).abs() < 1e-5);
        assert!((two.total_exponent() - 2.5).abs() < 1e-4);
        assert!((two.exponent_minus - 0.25).abs() < 1e-4 && (two.exponent_plus - 2.25).abs() < 1e-4);
        assert!(rep.term(TermLabel::Saddle).unwrap().active);
        assert!((two.frequency + 2.0 * rep.summary.p_f).abs() == 0.0);
        for t in &rep.terms {
            assert!(t.exponent_plus >= 0.0 && t.exponent_minus >= 0.0);
            if let TermLabel::Harmonic(..) = t.label {
                assert_eq!(t.amplitude, Amplitude::Unknown);
            }
        }
    }

    #[test]
    fn time_like_saddle_inactive() {
        let rep = report(1e6, 1.0, 1.0);
        let s = rep.saddle.unwrap();
        assert!((s.lambda0 - 0.5).abs() < 1e-4);
        assert_eq!(s.regime, Regime::TimeLike);
        assert!(!rep.term(TermLabel::Saddle).unwrap().active);
    }

    #[test]
    fn exponents_stable_under_node_doubling() {
        let params = ModelParams::new(1.0, 1.0).unwrap();
        let a = assemble_expansion(&params, 0.3, 1, &Numerics { n_nodes: 64, ..Default::default() }).unwrap();
        let b = assemble_expansion(&params, 0.3, 1, &Numerics { n_nodes: 128, ..Default::default() }).unwrap();
        for (ta, tb) in a.terms.iter().zip(&b.terms) {
            assert_eq!(ta.label, tb.label);
            assert!((ta.exponent_plus - tb.exponent_plus).abs() < 1e-7);
            assert!((ta.exponent_minus - tb.exponent_minus).abs() < 1e-7);
        }
    }

    #[test]
    fn single_term_phase_factors_cancel() {
        let rep = ExpansionReport {
            summary: DressedSummary { c: 1.0, h: 1.0, q: 1.0, density: 1.0, p_f: 1.0, v_f: 2.0 },
            ratio_t_over_x: 0.0,
            saddle: None,
            terms: vec![AsymptoticTerm {
                label: TermLabel::ZeroFreq,
                frequency: 0.0,
                exponent_plus: 0.25,
                exponent_minus: 0.25,
                extra_power: 0.0,
                amplitude: Amplitude::Known(Complex64::new(0.7, 0.0)),
                active: true,
            }],
            evaluations: vec![],
        };
        let v = evaluate_rho(&rep, 100.0, 0.0).unwrap().value;
        assert!((v - 0.07).norm() < 1e-15);
    }

    #[test]
    fn static_decay_and_ordering() {
        let rep = report(1e6, 1.0, 0.0);
        assert!(rep.saddle.is_none());
        let a = evaluate_rho(&rep, 100.0, 0.0).unwrap();
        let b = evaluate_rho(&rep, 200.0, 0.0).unwrap();
        assert!((b.value.norm() / a.value.norm() / 2f64.powf(-0.5) - 1.0).abs() < 0.01);
        let m = |e: &RhoEvaluation, l| e.breakdown.iter().find(|c| c.label == l).unwrap().modulus;
        assert!(m(&a, TermLabel::TwoPF) < m(&a, TermLabel::ZeroFreq));
    }

    #[test]
    fn scale_covariance() {
        let rep = report(1.0, 1.0, 0.3);
        let (x, s) = (40.0, 3.0);
        let a = evaluate_rho(&rep, x, 0.3 * x).unwrap();
        let b = evaluate_rho(&rep, s * x, 0.3 * s * x).unwrap();
        for (ca, cb) in a.breakdown.iter().zip(&b.breakdown) {
            let t = rep.term(ca.label).unwrap();
            let mut p = t.exponent_plus + t.exponent_minus + t.extra_power;
            if let TermLabel::Harmonic(..) = t.label {
                p = t.total_exponent();
            }
            if ca.modulus > 0.0 {
                assert!((cb.modulus / ca.modulus - s.powf(-p)).abs() < 1e-10 * s.powf(-p), "{:?}", ca.label);
            }
        }
    }

    #[test]
    fn evaluation_errors() {
        let rep = report(1e6, 1.0, 0.25);
        assert!(matches!(evaluate_rho(&rep, 10.0, 1.0), Err(Error::RatioMismatch(..))));
        assert!(matches!(evaluate_rho(&rep, -1.0, -0.25), Err(Error::Domain(..))));
        let v = rep.summary.v_f;
        let rep2 = ExpansionReport { ratio_t_over_x: 1.0 / v, ..rep.clone() };
        assert!(matches!(evaluate_rho(&rep2, 10.0, 10.0 / v), Err(Error::LightCone(_))));
    }
}
