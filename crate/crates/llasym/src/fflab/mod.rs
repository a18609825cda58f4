//! Finite-size free-fermion laboratory: brute-force form-factor sums against
//! their determinant representations, singular sums, the Fredholm-minor
//! limit and multidimensional Lagrange series.

mod fredholm;
mod lagrange;
mod singular;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};



pub use fredholm::{fredholm_minor_limit, steepest_descent_s, FredholmInput};
pub use lagrange::{check_contraction, lagrange_closed_form, lagrange_fixed_point, lagrange_series, MultiFn};
pub use singular::{singular_sum, SingularSumResult};

pub const ENUMERATION_LIMIT: u128 = 1_000_000;

/// Affine counting function `xi(l) = slope * l + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Counting {
    pub slope: f64,
    pub offset: f64,
}

impl Counting {
    /// `xi(l) = l / 2pi + D / 2`, so that `[-pi D, pi D]` maps onto `[0, D]`.
    pub fn standard(density: f64) -> Self {
        Self { slope: 1.0 / (2.0 * PI), offset: 0.5 * density }
    }

    pub fn eval(&self, l: f64) -> f64 {
        self.slope * l + self.offset
    }

    pub fn eval_c(&self, z: Complex64) -> Complex64 {
        self.slope * z + self.offset
    }

    pub fn deriv(&self) -> f64 {
        self.slope
    }

    pub fn inverse(&self, s: f64) -> f64 {
        (s - self.offset) / self.slope
    }
}

/// Real-analytic test shift functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestNu {
    Zero,
    Constant(f64),
    Gaussian(f64),
    Rational(f64),
}

impl TestNu {
    pub fn eval(&self, l: f64) -> f64 {
        match *self {
            TestNu::Zero => 0.0,
            TestNu::Constant(a) => a,
            TestNu::Gaussian(a) => a * (-l * l).exp(),
            TestNu::Rational(a) => a / (1.0 + l * l),
        }
    }

    pub fn deriv(&self, l: f64) -> f64 {
        match *self {
            TestNu::Zero | TestNu::Constant(_) => 0.0,
            TestNu::Gaussian(a) => -2.0 * a * l * (-l * l).exp(),
            TestNu::Rational(a) => -2.0 * a * l / (1.0 + l * l).powi(2),
        }
    }

    /// Upper bound of `|nu'|` on the real line.
    pub fn max_slope(&self) -> f64 {
        match *self {
            TestNu::Zero | TestNu::Constant(_) => 0.0,
            TestNu::Gaussian(a) => a.abs() * (2.0f64).sqrt() * (-0.5f64).exp(),
            TestNu::Rational(a) => a.abs() * 3.0 * 3f64.sqrt() / 8.0,
        }
    }

    pub fn name(&self) -> String {
        match *self {
            TestNu::Zero => "zero".into(),
            TestNu::Constant(a) => format!("constant({a})"),
            TestNu::Gaussian(a) => format!("gaussian({a})"),
            TestNu::Rational(a) => format!("rational({a})"),
        }
    }
}

/// `E_-^{-2}(l) = exp(i x (l - tau l^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticPhase {
    pub x: f64,
    pub tau: f64,
}

impl QuadraticPhase {
    pub fn u(&self, z: Complex64) -> Complex64 {
        z - self.tau * z * z
    }

    pub fn e_minus_sq_inv(&self, z: Complex64) -> Complex64 {
        (Complex64::i() * self.x * self.u(z)).exp()
    }

    pub fn e_minus_sq_inv_deriv(&self, z: Complex64) -> Complex64 {
        Complex64::i() * self.x * (1.0 - 2.0 * self.tau * z) * self.e_minus_sq_inv(z)
    }

    /// `E_-(l) = exp(-i x u(l) / 2)`.
    pub fn e_minus(&self, z: Complex64) -> Complex64 {
        (-0.5 * Complex64::i() * self.x * self.u(z)).exp()
    }

    /// Stationary point of `u`.
    pub fn saddle(&self) -> f64 {
        0.5 / self.tau
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FFLabInstance {
    pub n: usize,
    pub l: f64,
    pub w: i64,
    pub xi: Counting,
    pub nu: TestNu,
    pub phase: QuadraticPhase,
    /// Height of the rectangle used by the singular-sum decomposition.
    pub alpha: f64,
}

impl FFLabInstance {
    pub fn new(n: usize, l: f64, w: i64, xi: Counting, nu: TestNu, phase: QuadraticPhase) -> Result<Self> {
        if n == 0 || !(l > 0.0) || w < 0 {
            return Err(Error::InvalidParam(format!("N={n}, L={l}, w={w}")));
        }
        if w < n as i64 + 1 {
            return Err(Error::InvalidParam(format!("window w={w} must contain 1..=N+1 (N={n})")));
        }
        if !(xi.slope > 0.0) || xi.slope - nu.max_slope() / l <= 0.0 {
            return Err(Error::InvalidParam("xi_nu is not strictly increasing".into()));
        }
        Ok(Self { n, l, w, xi, nu, phase, alpha: 1.0 })
    }

    /// Standard instance with `xi(l) = l/2pi + D/2`, `D = N/L`.
    pub fn standard(n: usize, l: f64, w: i64, nu: TestNu, phase: QuadraticPhase) -> Result<Self> {
        Self::new(n, l, w, Counting::standard(n as f64 / l), nu, phase)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn density(&self) -> f64 {
        self.n as f64 / self.l
    }

    /// Endpoints `xi^{-1}(0)` and `xi^{-1}(D)` of the Fermi zone.
    pub fn fermi_zone(&self) -> (f64, f64) {
        (self.xi.inverse(0.0), self.xi.inverse(self.density()))
    }

    pub fn window(&self) -> std::ops::RangeInclusive<i64> {
        -self.w..=self.w
    }

    pub fn mu(&self, a: i64) -> f64 {
        self.xi.inverse(a as f64 / self.l)
    }

    /// Root of `xi(l) + nu(l)/L = a/L`.
    pub fn lambda(&self, a: i64) -> Result<f64> {
        let target = a as f64 / self.l;
        let f = |x: f64| self.xi.eval(x) + self.nu.eval(x) / self.l - target;
        let mut x = self.mu(a);
        for _ in 0..100 {
            let step = f(x) / self.xi_nu_prime(x);
            x -= step;
            if step.abs() <= 1e-15 * x.abs().max(1.0) {
                return Ok(x);
            }
        }
        if f(x).abs() < 1e-13 {
            Ok(x)
        } else {
            Err(Error::NoConvergence(format!("lambda_{a}")))
        }
    }

    pub fn lambdas(&self) -> Result<Vec<f64>> {
        (1..=self.n as i64).map(|a| self.lambda(a)).collect()
    }

    pub fn xi_nu_prime(&self, l: f64) -> f64 {
        self.xi.deriv() + self.nu.deriv(l) / self.l
    }

    /// `E_-^{-2}(mu) / (2 pi L xi'(mu))`.
    fn weight(&self, mu: f64) -> Complex64 {
        self.phase.e_minus_sq_inv(Complex64::new(mu, 0.0)) / (2.0 * PI * self.l * self.xi.deriv())
    }

    /// `2 sin(pi nu(lambda)) / (mu - lambda)`, with its limit when both vanish.
    fn t_entry(&self, mu: f64, lambda: f64) -> Result<f64> {
        let s = 2.0 * (PI * self.nu.eval(lambda)).sin();
        let d = mu - lambda;
        if d.abs() <= 1e-14 * mu.abs().max(1.0) {
            if s.abs() <= 1e-300 {
                return Ok(2.0 * PI * self.l * self.xi_nu_prime(lambda));
            }
            return Err(Error::Singular(format!("mu = lambda = {mu} with nonzero shift")));
        }
        Ok(s / d)
    }

    fn count_configurations(&self) -> u128 {
        binomial((2 * self.w + 1) as u128, self.n as u128 + 1)
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}

/// Integers `l_1 < ... < l_{N+1}` of a particle/hole configuration.
pub fn ell_sequence(instance: &FFLabInstance, particles: &[i64], holes: &[i64]) -> Result<Vec<i64>> {
    let n1 = instance.n as i64 + 1;
    if particles.len() != holes.len() {
        return Err(Error::Configuration("particle and hole counts differ".into()));
    }
    let mut ell: Vec<i64> = (1..=n1).filter(|j| !holes.contains(j)).collect();
    for &h in holes {
        if !(1..=n1).contains(&h) {
            return Err(Error::Configuration(format!("hole {h} outside 1..={n1}")));
        }
    }
    for &p in particles {
        if (1..=n1).contains(&p) || !instance.window().contains(&p) {
            return Err(Error::Configuration(format!("particle {p} outside the exterior window")));
        }
    }
    ell.extend_from_slice(particles);
    ell.sort_unstable();
    if ell.windows(2).any(|w| w[0] == w[1]) || ell.len() != n1 as usize {
        return Err(Error::Configuration("repeated particle or hole".into()));
    }
    Ok(ell)
}

/// `det` of the bordered Cauchy matrix with columns `t_b(mu_s)` and a column of ones.
fn bordered_det(instance: &FFLabInstance, ell: &[i64], lambdas: &[f64]) -> Result<f64> {
    let n = lambdas.len();
    let mut m = DMatrix::<f64>::zeros(n + 1, n + 1);
    for (i, &a) in ell.iter().enumerate() {
        let mu = instance.mu(a);
        for (j, &lb) in lambdas.iter().enumerate() {
            m[(i, j)] = instance.t_entry(mu, lb)?;
        }
        m[(i, n)] = 1.0;
    }
    Ok(m.determinant())
}

fn dhat_from_ell(instance: &FFLabInstance, ell: &[i64], lambdas: &[f64]) -> Result<f64> {
    let d = bordered_det(instance, ell, lambdas)?;
    let two_pi_l = 2.0 * PI * instance.l;
    let mut den = 1.0;
    for &a in ell {
        den *= two_pi_l * instance.xi.deriv();
        let _ = a;
    }
    for &lb in lambdas {
        den *= two_pi_l * instance.xi_nu_prime(lb);
    }
    Ok(d * d / den)
}

/// Universal part `D_N` of a form factor for the given particle and hole integers.
pub fn dhat_n(instance: &FFLabInstance, particles: &[i64], holes: &[i64]) -> Result<f64> {
    let ell = ell_sequence(instance, particles, holes)?;
    dhat_from_ell(instance, &ell, &instance.lambdas()?)
}

fn e_ratio(instance: &FFLabInstance, ell: &[i64], lambdas: &[f64]) -> Complex64 {
    let ph = &instance.phase;
    let mut v = Complex64::new(1.0, 0.0);
    for &lb in lambdas {
        v /= ph.e_minus_sq_inv(Complex64::new(lb, 0.0));
    }
    for &a in ell {
        v *= ph.e_minus_sq_inv(Complex64::new(instance.mu(a), 0.0));
    }
    v
}

fn combinations(pool: &[i64], k: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > pool.len() {
        return out;
    }
    loop {
        out.push(idx.iter().map(|&i| pool[i]).collect());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + pool.len() - k {
                break;
            }
            if i == 0 && idx[0] == pool.len() - k {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Number of terms enumerated by [`xn_bruteforce`].
pub fn bruteforce_term_count(instance: &FFLabInstance) -> u128 {
    instance.count_configurations()
}

/// `X_N` as the explicit sum over all particle/hole configurations.
pub fn xn_bruteforce(instance: &FFLabInstance) -> Result<Complex64> {
    let count = instance.count_configurations();
    if count > ENUMERATION_LIMIT {
        return Err(Error::SizeGuard(count));
    }
    let lambdas = instance.lambdas()?;
    let n1 = instance.n as i64 + 1;
    let interior: Vec<i64> = (1..=n1).collect();
    let exterior: Vec<i64> = instance.window().filter(|a| !(1..=n1).contains(a)).collect();
    let mut configs = Vec::new();
    for k in 0..=(n1 as usize).min(exterior.len()) {
        for p in combinations(&exterior, k) {
            for h in combinations(&interior, k) {
                configs.push((p.clone(), h));
            }
        }
    }
    configs
        .par_iter()
        .map(|(p, h)| {
            let ell = ell_sequence(instance, p, h)?;
            Ok(e_ratio(instance, &ell, &lambdas) * dhat_from_ell(instance, &ell, &lambdas)?)
        })
        .try_reduce(|| Complex64::new(0.0, 0.0), |a, b| Ok(a + b))
}

/// Pieces of the finite-size determinant representation.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterminantParts {
    pub prefactor: Complex64,
    pub det_m: Complex64,
    pub s0: Complex64,
    pub rank_one: Complex64,
}

impl DeterminantParts {
    pub fn value(&self) -> Complex64 {
        self.prefactor * self.det_m * (self.s0 + self.rank_one)
    }
}

/// Determinant representation `det M (S_0 + tr M^{-1} P)` built from the
/// discrete singular sums over the window.
pub fn xn_determinant_parts(instance: &FFLabInstance) -> Result<DeterminantParts> {
    let lambdas = instance.lambdas()?;
    let n = lambdas.len();
    let mus: Vec<f64> = instance.window().map(|a| instance.mu(a)).collect();
    let w: Vec<Complex64> = mus.iter().map(|&m| instance.weight(m)).collect();
    let mut t = DMatrix::<f64>::zeros(n, mus.len());
    for (a, &la) in lambdas.iter().enumerate() {
        for (k, &m) in mus.iter().enumerate() {
            t[(a, k)] = instance.t_entry(m, la)?;
        }
    }
    let m = DMatrix::<Complex64>::from_fn(n, n, |a, b| (0..mus.len()).map(|k| w[k] * t[(a, k)] * t[(b, k)]).sum());
    let s = DVector::<Complex64>::from_fn(n, |a, _| (0..mus.len()).map(|k| w[k] * t[(a, k)]).sum());
    let s0: Complex64 = w.iter().sum();
    let lu = m.clone().lu();
    let det_m = lu.determinant();
    if det_m.norm() == 0.0 || !det_m.is_finite() {
        return Err(Error::Singular("determinant matrix".into()));
    }
    let y = lu.solve(&s).ok_or_else(|| Error::Singular("determinant matrix".into()))?;
    let rank_one = -s.iter().zip(y.iter()).map(|(a, b)| a * b).sum::<Complex64>();
    let mut prefactor = Complex64::new(1.0, 0.0);
    for &lb in &lambdas {
        prefactor /= instance.phase.e_minus_sq_inv(Complex64::new(lb, 0.0)) * (2.0 * PI * instance.l * instance.xi_nu_prime(lb));
    }
    Ok(DeterminantParts { prefactor, det_m, s0, rank_one })
}

pub fn xn_determinant(instance: &FFLabInstance) -> Result<Complex64> {
    Ok(xn_determinant_parts(instance)?.value())
}

/// The three shift functions of the standard verification matrix.
pub fn standard_nus() -> [TestNu; 3] {
    [TestNu::Constant(0.1), TestNu::Gaussian(0.1), TestNu::Rational(0.1)]
}

/// The 12 instances `{N=2,3} x {w=5,6} x standard_nus()` with `L=10`, `x=5`, `tau=0.25`.
pub fn standard_matrix() -> Vec<FFLabInstance> {
    let phase = QuadraticPhase { x: 5.0, tau: 0.25 };
    let mut out = Vec::new();
    for n in [2, 3] {
        for w in [5, 6] {
            for nu in standard_nus() {
                out.push(FFLabInstance::standard(n, 10.0, w, nu, phase).expect("standard instance"));
            }
        }
    }
    out
}
