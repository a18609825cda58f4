//! Shift functions, the saddle point of `u = p - (t/x) eps`, critical
//! exponents and the table of subleading harmonics.

use num_complex::Complex64;

use crate::dressing::{DressedSet, Driving, Field};
use crate::error::{Error, Result, SaddleError};
use crate::model::bare_u0;

/// Particle and hole rapidities.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Excitation {
    pub particles: Vec<f64>,
    pub holes: Vec<f64>,
}

impl Excitation {
    pub fn new(particles: Vec<f64>, holes: Vec<f64>, q: f64) -> Result<Self> {
        if let Some(h) = holes.iter().find(|h| h.abs() > q * (1.0 + 1e-12)) {
            return Err(Error::Configuration(format!("hole {h} outside [-{q}, {q}]")));
        }
        if particles.iter().chain(&holes).any(|x| !x.is_finite()) {
            return Err(Error::Configuration("non-finite rapidity".into()));
        }
        Ok(Self { particles, holes })
    }

    pub fn empty() -> Self {
        Self::default()
    }
}

/// `nu(l) = -Z(l)/2 - sum phi(l, z+) + sum phi(l, z-)`.
#[derive(Debug, Clone)]
pub struct ShiftFn {
    pub excitation: Excitation,
    field: Field,
    q: f64,
    pub at_q: f64,
    pub at_minus_q: f64,
}

impl ShiftFn {
    pub fn eval(&self, l: f64) -> f64 {
        self.field.eval(l)
    }

    pub fn deriv(&self, l: f64) -> f64 {
        self.field.deriv(l)
    }

    pub fn deriv2(&self, l: f64) -> f64 {
        self.field.deriv2(l)
    }

    pub fn eval_c(&self, z: Complex64) -> Result<Complex64> {
        self.field.eval_c(z)
    }

    pub fn deriv_c(&self, z: Complex64) -> Result<Complex64> {
        self.field.deriv_c(z)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

pub fn shift_function(excitation: &Excitation, dressed: &DressedSet) -> Result<ShiftFn> {
    let mut g = Driving::constant(-0.5);
    for &zp in &excitation.particles {
        g = g.add(&Driving::phase(-1.0, zp));
    }
    for &zm in &excitation.holes {
        g = g.add(&Driving::phase(1.0, zm));
    }
    let field = dressed.nystrom.solve(&g)?;
    let q = dressed.q;
    Ok(ShiftFn {
        excitation: excitation.clone(),
        at_q: field.eval(q),
        at_minus_q: field.eval(-q),
        field,
        q,
    })
}

/// The three shift functions of the explicit terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShiftKind {
    /// `-Z/2 - phi(., q)`
    Empty,
    /// `-Z/2 - phi(., -q)`
    MinusQ,
    /// `-Z/2 - phi(., lambda0)`
    Saddle,
}

impl ShiftKind {
    pub fn name(&self) -> &'static str {
        match self {
            ShiftKind::Empty => "empty",
            ShiftKind::MinusQ => "minus_q",
            ShiftKind::Saddle => "saddle",
        }
    }
}

pub fn special_shift(kind: ShiftKind, dressed: &DressedSet, lambda0: f64) -> Result<ShiftFn> {
    let z = match kind {
        ShiftKind::Empty => dressed.q,
        ShiftKind::MinusQ => -dressed.q,
        ShiftKind::Saddle => lambda0,
    };
    shift_function(&Excitation { particles: vec![z], holes: vec![] }, dressed)
}

/// `u(l) = p(l) - (t/x) eps(l)`.
pub fn u_combination(l: f64, ratio_t_over_x: f64, dressed: &DressedSet) -> f64 {
    dressed.p(l) - ratio_t_over_x * dressed.e(l)
}

/// `u(l) = u0(l) - int u0'(mu) phi(mu, l) dmu`.
pub fn u_integral_rep(l: f64, ratio_t_over_x: f64, dressed: &DressedSet) -> Result<f64> {
    let phi = dressed.phi_field(l)?;
    let g = &dressed.grid;
    let s: f64 = (0..g.n_nodes)
        .map(|k| g.weights[k] * (1.0 - 2.0 * ratio_t_over_x * g.nodes[k]) * phi.values()[k])
        .sum();
    Ok(bare_u0(l, ratio_t_over_x, &dressed.params) - s)
}

pub fn u_prime(l: f64, r: f64, dressed: &DressedSet) -> f64 {
    dressed.p1(l) - r * dressed.e1(l)
}

pub fn u_second(l: f64, r: f64, dressed: &DressedSet) -> f64 {
    dressed.p2(l) - r * dressed.e2(l)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    SpaceLike,
    TimeLike,
}

impl Regime {
    pub fn eta(&self) -> i64 {
        match self {
            Regime::SpaceLike => 1,
            Regime::TimeLike => -1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Regime::SpaceLike => "space-like",
            Regime::TimeLike => "time-like",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Saddle {
    pub lambda0: f64,
    pub regime: Regime,
    pub u_prime: f64,
    pub u_second: f64,
}

pub fn default_scan_range(ratio_t_over_x: f64, q: f64) -> f64 {
    (5.0 * q).max(1.0 / ratio_t_over_x)
}

const SCAN_POINTS: usize = 4000;

pub fn find_saddle(ratio_t_over_x: f64, dressed: &DressedSet, scan_range: f64) -> Result<Saddle> {
    let r = ratio_t_over_x;
    if !(r.is_finite() && r > 0.0) {
        return Err(SaddleError::InvalidRatio(r).into());
    }
    let up = |l: f64| u_prime(l, r, dressed);
    let h = 2.0 * scan_range / SCAN_POINTS as f64;
    let mut brackets = Vec::new();
    let mut prev = up(-scan_range);
    for i in 1..=SCAN_POINTS {
        let l = -scan_range + i as f64 * h;
        let cur = up(l);
        if prev == 0.0 || prev * cur < 0.0 {
            brackets.push((l - h, l));
        }
        prev = cur;
    }
    let (mut a, mut b) = match brackets.len() {
        0 => return Err(SaddleError::NoSaddle(scan_range).into()),
        1 => brackets[0],
        n => return Err(SaddleError::MultipleSaddles(n).into()),
    };
    // safeguarded Newton
    let fa = up(a);
    let mut x = 0.5 * (a + b);
    for _ in 0..100 {
        let fx = up(x);
        if fx == 0.0 {
            break;
        }
        if fx * fa > 0.0 {
            a = x;
        } else {
            b = x;
        }
        let step = fx / u_second(x, r, dressed);
        let mut nx = x - step;
        if !(nx > a && nx < b) {
            nx = 0.5 * (a + b);
        }
        let done = (nx - x).abs() <= 1e-15 * x.abs().max(1.0);
        x = nx;
        if done {
            break;
        }
    }
    let q = dressed.q;
    if (x - q).abs() < 1e-6 || (x + q).abs() < 1e-6 {
        return Err(SaddleError::DegenerateSaddle(x).into());
    }
    let regime = if x > q {
        Regime::SpaceLike
    } else if x.abs() < q {
        Regime::TimeLike
    } else {
        return Err(SaddleError::OutsideRegime(x).into());
    };
    let s = Saddle { lambda0: x, regime, u_prime: up(x), u_second: u_second(x, r, dressed) };
    if s.u_second >= 0.0 {
        return Err(SaddleError::DegenerateSaddle(x).into());
    }
    Ok(s)
}

/// `([nu(q) + plus_offset]^2, [nu(-q) + minus_offset]^2)`: the exponents
/// carried by `x - vF t` and `x + vF t` respectively.
pub fn critical_exponent_pair(nu: &ShiftFn, plus_offset: f64, minus_offset: f64) -> (f64, f64) {
    ((nu.at_q + plus_offset).powi(2), (nu.at_minus_q + minus_offset).powi(2))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicEntry {
    pub ell_plus: i64,
    pub ell_minus: i64,
    pub frequency: f64,
    pub exponent: f64,
    pub amplitude_known: bool,
}

/// Values of `Z` and `phi` at the Fermi points needed by the harmonic exponents.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryData {
    pub z: [f64; 2],
    pub phi_mq: [f64; 2],
    pub phi_q: [f64; 2],
    pub phi_l0: [f64; 2],
    pub u_q: f64,
    pub u_mq: f64,
    pub u_l0: f64,
}

impl BoundaryData {
    pub fn new(dressed: &DressedSet, lambda0: f64) -> Result<Self> {
        let q = dressed.q;
        let fm = dressed.phi_field(-q)?;
        let fp = dressed.phi_field(q)?;
        let f0 = dressed.phi_field(lambda0)?;
        // ratio recovered from the saddle condition u'(lambda0) = 0
        let r = dressed.p1(lambda0) / dressed.e1(lambda0);
        Ok(Self {
            z: [dressed.charge(q), dressed.charge(-q)],
            phi_mq: [fm.eval(q), fm.eval(-q)],
            phi_q: [fp.eval(q), fp.eval(-q)],
            phi_l0: [f0.eval(q), f0.eval(-q)],
            u_q: u_combination(q, r, dressed),
            u_mq: u_combination(-q, r, dressed),
            u_l0: u_combination(lambda0, r, dressed),
        })
    }

    pub fn frequency(&self, lp: i64, lm: i64) -> f64 {
        lp as f64 * self.u_q + lm as f64 * self.u_mq - (lp + lm) as f64 * self.u_l0
    }

    pub fn exponent(&self, lp: i64, lm: i64) -> f64 {
        let (p, m) = (lp as f64, lm as f64);
        let delta = |i: usize| -0.5 * self.z[i] - m * self.phi_mq[i] - (p + 1.0) * self.phi_q[i] + (p + m) * self.phi_l0[i];
        (1.0 + p + delta(0)).powi(2) + (delta(1) - m).powi(2) + 0.5 * (p + m).abs()
    }
}

pub fn harmonic_table(max_abs_ell: i64, dressed: &DressedSet, lambda0: f64, regime: Regime) -> Result<Vec<HarmonicEntry>> {
    let b = BoundaryData::new(dressed, lambda0)?;
    let explicit = [b.u_l0 - b.u_q, b.u_mq - b.u_q, 0.0];
    let eta = regime.eta();
    let mut out = Vec::new();
    for lp in -max_abs_ell..=max_abs_ell {
        for lm in -max_abs_ell..=max_abs_ell {
            if eta * (lp + lm) < 0 {
                continue;
            }
            let frequency = b.frequency(lp, lm);
            if explicit.iter().any(|f| (f - frequency).abs() <= 1e-10 * f.abs().max(1.0)) {
                continue;
            }
            out.push(HarmonicEntry { ell_plus: lp, ell_minus: lm, frequency, exponent: b.exponent(lp, lm), amplitude_known: false });
        }
    }
    Ok(out)
}
