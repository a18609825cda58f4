//! Barnes G, complex log-gamma and the interval functionals kappa, C and C0.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::dressing::DressedSet;
use crate::error::{Error, Result};
use crate::excitations::ShiftFn;
use crate::model::ModelParams;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const ZETA_TERMS: usize = 60;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Gamma(z)`; continuous branch for `Re z >= 1/2`, reflection otherwise.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let s = (Complex64::from(PI) * z).sin();
        return Complex64::from(PI.ln()) - s.ln() - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut x = Complex64::from(LANCZOS[0]);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

pub fn ln_gamma_real(x: f64) -> Complex64 {
    ln_gamma(Complex64::from(x))
}

fn zeta_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| (0..=ZETA_TERMS + 1).map(|k| if k < 2 { f64::NAN } else { zeta(k as f64) }).collect())
}

/// Riemann zeta for real `s > 1` via Euler-Maclaurin.
pub fn zeta(s: f64) -> f64 {
    const N: usize = 20;
    // B_2j / (2j)!
    const B: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30_240.0,
        -1.0 / 1_209_600.0,
        1.0 / 47_900_160.0,
        -691.0 / 1_307_674_368_000.0,
    ];
    let n = N as f64;
    let mut sum: f64 = (1..N).rev().map(|k| (k as f64).powf(-s)).sum();
    sum += n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    let mut rising = s;
    let mut pw = n.powf(-s - 1.0);
    for (j, b) in B.iter().enumerate() {
        sum += b * rising * pw;
        let m = 2.0 * j as f64;
        rising *= (s + m + 1.0) * (s + m + 2.0);
        pw /= n * n;
    }
    sum
}

fn ln_g_series(w: Complex64) -> Complex64 {
    let z = zeta_table();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut pw = w * w;
    for (k, zk) in z.iter().enumerate().take(ZETA_TERMS + 1).skip(2) {
        pw *= w;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * zk * pw / (k as f64 + 1.0);
    }
    0.5 * w * (2.0 * PI).ln() - 0.5 * (w + (1.0 + EULER_GAMMA) * w * w) + acc
}

/// `ln G(z)` for the Barnes double Gamma function.
pub fn barnes_g_log(z: Complex64) -> Result<Complex64> {
    let nearest = z.re.round();
    if nearest <= 0.0 && (z - nearest).norm() < 1e-12 {
        return Err(Error::BarnesPole(format!("{z}")));
    }
    let mut w = z - 1.0;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut steps = 0;
    while w.re > 0.5 {
        // G(1+w) = Gamma(w) G(w)
        acc += ln_gamma(w);
        w -= 1.0;
        steps += 1;
        if steps > 100 {
            return Err(Error::BarnesPole(format!("{z} (shift limit)")));
        }
    }
    while w.re < -0.5 {
        // G(1+w) = G(2+w) / Gamma(1+w)
        acc -= ln_gamma(w + 1.0);
        w += 1.0;
        steps += 1;
        if steps > 100 {
            return Err(Error::BarnesPole(format!("{z} (shift limit)")));
        }
    }
    Ok(acc + ln_g_series(w))
}

/// A function analytic near `[-q, q]`, real on the real axis.
pub trait Analytic: Sync {
    fn eval_real(&self, x: f64) -> f64;
    fn deriv_real(&self, x: f64) -> f64;
    fn eval_complex(&self, z: Complex64) -> Result<Complex64>;
    fn deriv2_real(&self, x: f64) -> f64 {
        let h = 1e-4;
        (self.deriv_real(x + h) - self.deriv_real(x - h)) / (2.0 * h)
    }
}

impl Analytic for ShiftFn {
    fn eval_real(&self, x: f64) -> f64 {
        self.eval(x)
    }
    fn deriv_real(&self, x: f64) -> f64 {
        self.deriv(x)
    }
    fn eval_complex(&self, z: Complex64) -> Result<Complex64> {
        self.eval_c(z)
    }
    fn deriv2_real(&self, x: f64) -> f64 {
        self.deriv2(x)
    }
}

/// Wraps an entire function given by a closure.
pub struct Entire<F>(pub F);

impl<F: Fn(Complex64) -> Complex64 + Sync> Analytic for Entire<F> {
    fn eval_real(&self, x: f64) -> f64 {
        (self.0)(Complex64::from(x)).re
    }
    fn deriv_real(&self, x: f64) -> f64 {
        let h = 1e-5;
        ((self.0)(Complex64::from(x + h)).re - (self.0)(Complex64::from(x - h)).re) / (2.0 * h)
    }
    fn eval_complex(&self, z: Complex64) -> Result<Complex64> {
        Ok((self.0)(z))
    }
}

/// `ln kappa[nu](l) = -int (nu(l) - nu(mu)) / (l - mu) dmu`.
pub fn ln_kappa(nu: &dyn Analytic, l: Complex64, dressed: &DressedSet) -> Result<Complex64> {
    let g = &dressed.grid;
    let nl = if l.im == 0.0 { Complex64::from(nu.eval_real(l.re)) } else { nu.eval_complex(l)? };
    let mut s = Complex64::new(0.0, 0.0);
    for k in 0..g.n_nodes {
        let mu = g.nodes[k];
        let d = l - mu;
        let v = if d.norm() < 1e-9 { Complex64::from(nu.deriv_real(mu)) } else { (nl - nu.eval_real(mu)) / d };
        s += g.weights[k] * v;
    }
    Ok(-s)
}

pub fn kappa(nu: &dyn Analytic, l: Complex64, dressed: &DressedSet) -> Result<Complex64> {
    Ok(ln_kappa(nu, l, dressed)?.exp())
}

fn dist_to_interval(l: Complex64, q: f64) -> f64 {
    let x = l.re.clamp(-q, q);
    (l - x).norm()
}

/// `C[nu](l) = int nu(mu) / (mu - l) dmu / (2 i pi)`.
pub fn cauchy_transform(nu: &dyn Analytic, l: Complex64, dressed: &DressedSet) -> Result<Complex64> {
    let q = dressed.q;
    if dist_to_interval(l, q) < 1e-3 * q {
        return Err(Error::NearCut(format!("{l}")));
    }
    let g = &dressed.grid;
    let two_i_pi = Complex64::new(0.0, 2.0 * PI);
    if l.im.abs() <= 0.25 * dressed.params.c {
        // subtract the value at l so the quadrature sees a smooth integrand
        let nl = if l.im == 0.0 { Complex64::from(nu.eval_real(l.re)) } else { nu.eval_complex(l)? };
        let mut s = Complex64::new(0.0, 0.0);
        for k in 0..g.n_nodes {
            let mu = g.nodes[k];
            s += g.weights[k] * (nu.eval_real(mu) - nl) / (mu - l);
        }
        let lg = ((q - l) / (-q - l)).ln();
        Ok((s + nl * lg) / two_i_pi)
    } else {
        let mut s = Complex64::new(0.0, 0.0);
        for k in 0..g.n_nodes {
            let mu = g.nodes[k];
            s += g.weights[k] * nu.eval_real(mu) / (mu - l);
        }
        Ok(s / two_i_pi)
    }
}

/// `C0[nu] = -int int nu(l) nu(m) / (l - m - ic)^2`.
pub fn c0_double_integral(nu: &dyn Analytic, dressed: &DressedSet, params: &ModelParams) -> Complex64 {
    let g = &dressed.grid;
    let vals: Vec<f64> = g.nodes.iter().map(|&x| nu.eval_real(x)).collect();
    let ic = Complex64::new(0.0, params.c);
    let mut s = Complex64::new(0.0, 0.0);
    for j in 0..g.n_nodes {
        for k in 0..g.n_nodes {
            let d = g.nodes[j] - g.nodes[k] - ic;
            s += g.weights[j] * g.weights[k] * vals[j] * vals[k] / (d * d);
        }
    }
    -s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dressing::{dress_all, DEFAULT_TOL};
    use crate::excitations::{special_shift, ShiftKind};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dressed(cc: f64) -> DressedSet {
        dress_all(&ModelParams::new(cc, 1.0).unwrap(), 96, DEFAULT_TOL).unwrap()
    }

    #[test]
    fn gamma_values() {
        assert!(ln_gamma(c(1.0, 0.0)).norm() < 1e-14);
        assert!((ln_gamma(c(0.5, 0.0)).re - 0.5 * PI.ln()).abs() < 1e-14);
        assert!((ln_gamma(c(10.0, 0.0)).re - 362_880f64.ln()).abs() < 1e-12);
        // Gamma(-1/2) = -2 sqrt(pi)
        let g = ln_gamma(c(-0.5, 0.0)).exp();
        assert!((g.re + 2.0 * PI.sqrt()).abs() < 1e-13 && g.im.abs() < 1e-13);
        let z = c(0.3, 1.7);
        let r = ln_gamma(z + 1.0) - ln_gamma(z) - z.ln();
        assert!(r.norm() < 1e-13);
    }

    #[test]
    fn zeta_values() {
        assert!((zeta(2.0) - PI * PI / 6.0).abs() < 1e-15);
        assert!((zeta(4.0) - PI.powi(4) / 90.0).abs() < 1e-15);
        assert!((zeta(3.0) - 1.202_056_903_159_594_2).abs() < 1e-15);
    }

    #[test]
    fn barnes_integers_and_recurrence() {
        for z in [1.0, 2.0, 3.0] {
            assert!(barnes_g_log(c(z, 0.0)).unwrap().norm() < 1e-13);
        }
        // G(4) = 1! 2! = 2, G(5) = 12
        assert!((barnes_g_log(c(4.0, 0.0)).unwrap().re - 2f64.ln()).abs() < 1e-13);
        assert!((barnes_g_log(c(5.0, 0.0)).unwrap().re - 12f64.ln()).abs() < 1e-12);
        let z = c(2.7, 0.3);
        let r = barnes_g_log(z + 1.0).unwrap() - ln_gamma(z) - barnes_g_log(z).unwrap();
        assert!(r.norm() < 1e-10);
        assert!(barnes_g_log(c(0.0, 0.0)).is_err());
        assert!(barnes_g_log(c(-2.0, 0.0)).is_err());
    }

    fn glaisher_log() -> f64 {
        // ln A from the hyperfactorial asymptotics
        let n = 200.0_f64;
        let s: f64 = (1..=200).map(|k| (k as f64) * (k as f64).ln()).sum();
        s - (n * n / 2.0 + n / 2.0 + 1.0 / 12.0) * n.ln() + n * n / 4.0 - 1.0 / (720.0 * n * n) + 1.0 / (5040.0 * n.powi(4))
    }

    #[test]
    fn barnes_half() {
        let ln_a = glaisher_log();
        assert!((ln_a - 0.248_754_477_033_784_26).abs() < 1e-11);
        let zeta_prime_m1 = 1.0 / 12.0 - ln_a;
        let ln_a = 1.0 / 12.0 - zeta_prime_m1;
        let expect = 2f64.ln() / 24.0 + 0.125 - 0.25 * PI.ln() - 1.5 * ln_a;
        assert!((barnes_g_log(c(0.5, 0.0)).unwrap().re - expect).abs() < 1e-9);
        assert!((barnes_g_log(c(1.5, 0.0)).unwrap().re - expect - 0.5 * PI.ln()).abs() < 1e-9);
    }

    #[test]
    fn barnes_large_argument_asymptotics() {
        let ln_a = glaisher_log();
        let z = c(7.5, 0.4);
        let lz = z.ln();
        let asym = z * z / 2.0 * lz - 0.75 * z * z + z / 2.0 * (2.0 * PI).ln() - lz / 12.0 + (1.0 / 12.0 - ln_a)
            - 1.0 / (240.0 * z * z)
            + 1.0 / (1008.0 * z.powi(4));
        assert!((barnes_g_log(z + 1.0).unwrap() - asym).norm() < 1e-8);
    }

    #[test]
    fn kappa_values() {
        let d = dressed(1.0);
        let one = Entire(|_z: Complex64| Complex64::from(3.0));
        assert!((kappa(&one, c(0.4, 0.0), &d).unwrap() - 1.0).norm() < 1e-14);
        let q = d.q;
        let lin = Entire(|z: Complex64| z);
        assert!((kappa(&lin, c(0.0, 0.0), &d).unwrap() - (-2.0 * q).exp()).norm() < 1e-13);
        let f = special_shift(ShiftKind::Empty, &d, 0.0).unwrap();
        let d2 = dress_all(&d.params, 192, DEFAULT_TOL).unwrap();
        let f2 = special_shift(ShiftKind::Empty, &d2, 0.0).unwrap();
        for l in [d.q, 0.3, 2.0] {
            let a = kappa(&f, c(l, 0.0), &d).unwrap();
            let b = kappa(&f2, c(l, 0.0), &d2).unwrap();
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn cauchy_transform_values() {
        let mut d = dressed(1.0);
        // pin the interval to q = 1 for the closed form
        d.q = 1.0;
        d.grid = std::sync::Arc::new(crate::dressing::QuadGrid::new(96, 1.0));
        let one = Entire(|_z: Complex64| Complex64::from(1.0));
        let v = cauchy_transform(&one, c(0.0, 1.0), &d).unwrap();
        assert!((v - 0.25).norm() < 1e-13);
        let far = cauchy_transform(&one, c(0.0, 100.0), &d).unwrap();
        assert!(far.norm() < 2.0 / (2.0 * PI * 100.0 - 1.0));
        let f = Entire(|z: Complex64| (-z * z).exp());
        let a = cauchy_transform(&f, c(0.2, 0.5), &d).unwrap();
        let b = cauchy_transform(&f, c(0.2, -0.5), &d).unwrap();
        // reflection: the 1/(2 i pi) prefactor flips sign under conjugation
        assert!((a + b.conj()).norm() < 1e-13);
        // the two evaluation paths agree where both apply
        let z = c(0.3, 0.24);
        let g = &d.grid;
        let plain: Complex64 = (0..96).map(|k| g.weights[k] * f.eval_real(g.nodes[k]) / (g.nodes[k] - z)).sum::<Complex64>()
            / Complex64::new(0.0, 2.0 * PI);
        assert!((plain - cauchy_transform(&f, z, &d).unwrap()).norm() < 1e-10);
        assert!(cauchy_transform(&one, c(0.5, 1e-5), &d).is_err());
        let a2 = cauchy_transform(&Entire(|z: Complex64| 2.5 * (-z * z).exp()), c(0.2, 0.5), &d).unwrap();
        assert!((a2 - 2.5 * a).norm() < 1e-14);
    }

    #[test]
    fn c0_values() {
        let mut d = dressed(1.0);
        let zero = Entire(|_z: Complex64| Complex64::from(0.0));
        assert_eq!(c0_double_integral(&zero, &d, &d.params), Complex64::from(0.0));
        d.q = 1.0;
        d.grid = std::sync::Arc::new(crate::dressing::QuadGrid::new(96, 1.0));
        let one = Entire(|_z: Complex64| Complex64::from(1.0));
        let v = c0_double_integral(&one, &d, &d.params);
        let expect = -(2.0 * c(0.0, -1.0).ln() - c(2.0, -1.0).ln() - c(-2.0, -1.0).ln());
        assert!((v - expect).norm() < 1e-8);
        let two = Entire(|_z: Complex64| Complex64::from(2.0));
        assert!((c0_double_integral(&two, &d, &d.params) - 4.0 * v).norm() < 1e-13);
        let ff = dress_all(&ModelParams::new(1e6, 1.0).unwrap(), 96, DEFAULT_TOL).unwrap();
        let f = special_shift(ShiftKind::Empty, &ff, 0.0).unwrap();
        assert!(c0_double_integral(&f, &ff, &ff.params).norm() < 1e-9);
    }
}
