//! Nyström solver for the linear integral equations on `[-q, q]` and the
//! dressed quantities built from it.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{kernel, kernel_c, kernel_d, kernel_d_c, theta, theta_c, ModelParams};
use crate::quad::gauss_legendre;

pub const DEFAULT_NODES: usize = 96;
pub const DEFAULT_TOL: f64 = 1e-10;

const TWO_PI: f64 = 2.0 * PI;

/// Gauss-Legendre grid on `[-q, q]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadGrid {
    pub n_nodes: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub q: f64,
}

impl QuadGrid {
    pub fn new(n_nodes: usize, q: f64) -> Self {
        let (nodes, weights) = gauss_legendre(n_nodes, -q, q);
        Self { n_nodes, nodes, weights, q }
    }
}

/// Driving term `a0 + a1 l + a2 l^2 + sum b theta(l - mu)/2pi + sum d K(l - mu)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Driving {
    pub poly: [f64; 3],
    pub phases: Vec<(f64, f64)>,
    pub kernels: Vec<(f64, f64)>,
}

impl Driving {
    pub fn constant(a: f64) -> Self {
        Self { poly: [a, 0.0, 0.0], ..Default::default() }
    }

    pub fn poly(a0: f64, a1: f64, a2: f64) -> Self {
        Self { poly: [a0, a1, a2], ..Default::default() }
    }

    /// `coef * theta(l - mu) / 2pi`.
    pub fn phase(coef: f64, mu: f64) -> Self {
        Self { phases: vec![(coef, mu)], ..Default::default() }
    }

    pub fn kernel(coef: f64, mu: f64) -> Self {
        Self { kernels: vec![(coef, mu)], ..Default::default() }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            poly: [s * self.poly[0], s * self.poly[1], s * self.poly[2]],
            phases: self.phases.iter().map(|&(b, m)| (s * b, m)).collect(),
            kernels: self.kernels.iter().map(|&(b, m)| (s * b, m)).collect(),
        }
    }

    pub fn add(&self, other: &Driving) -> Self {
        let mut out = self.clone();
        for i in 0..3 {
            out.poly[i] += other.poly[i];
        }
        out.phases.extend_from_slice(&other.phases);
        out.kernels.extend_from_slice(&other.kernels);
        out
    }

    pub fn eval(&self, l: f64, c: f64) -> f64 {
        let [a0, a1, a2] = self.poly;
        let mut v = a0 + l * (a1 + l * a2);
        for &(b, m) in &self.phases {
            v += b * theta(l - m, c) / TWO_PI;
        }
        for &(d, m) in &self.kernels {
            v += d * kernel(l - m, c);
        }
        v
    }

    pub fn deriv(&self, l: f64, c: f64) -> f64 {
        let mut v = self.poly[1] + 2.0 * self.poly[2] * l;
        for &(b, m) in &self.phases {
            v += b * kernel(l - m, c) / TWO_PI;
        }
        for &(d, m) in &self.kernels {
            v += d * kernel_d(l - m, c);
        }
        v
    }

    pub fn deriv2(&self, l: f64, c: f64) -> f64 {
        let mut v = 2.0 * self.poly[2];
        for &(b, m) in &self.phases {
            v += b * kernel_d(l - m, c) / TWO_PI;
        }
        for &(d, m) in &self.kernels {
            v += d * kernel_d2(l - m, c);
        }
        v
    }

    pub fn eval_c(&self, z: Complex64, c: f64) -> Complex64 {
        let [a0, a1, a2] = self.poly;
        let mut v = a0 + z * (a1 + z * a2);
        for &(b, m) in &self.phases {
            v += b * theta_c(z - m, c) / TWO_PI;
        }
        for &(d, m) in &self.kernels {
            v += d * kernel_c(z - m, c);
        }
        v
    }

    pub fn deriv_c(&self, z: Complex64, c: f64) -> Complex64 {
        let mut v = self.poly[1] + 2.0 * self.poly[2] * z;
        for &(b, m) in &self.phases {
            v += b * kernel_c(z - m, c) / TWO_PI;
        }
        for &(d, m) in &self.kernels {
            v += d * kernel_d_c(z - m, c);
        }
        Complex64::from(v)
    }
}

fn kernel_d2(x: f64, c: f64) -> f64 {
    let d = x * x + c * c;
    -4.0 * c / (d * d) + 16.0 * c * x * x / (d * d * d)
}

/// LU factorisation of the Nyström matrix `delta_jk - w_k K(l_j - l_k)/2pi`.
#[derive(Debug, Clone)]
pub struct Nystrom {
    pub grid: Arc<QuadGrid>,
    pub params: ModelParams,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    det: f64,
}

impl Nystrom {
    pub fn new(grid: Arc<QuadGrid>, params: ModelParams) -> Result<Self> {
        let a = nystrom_matrix(&grid, &params);
        let lu = a.lu();
        let det = lu.determinant();
        if !det.is_finite() || det.abs() < 1e-300 {
            return Err(Error::Singular(format!("Nystrom determinant {det:e}")));
        }
        Ok(Self { grid, params, lu, det })
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn solve(&self, driving: &Driving) -> Result<Field> {
        let c = self.params.c;
        let rhs = DVector::from_iterator(
            self.grid.n_nodes,
            self.grid.nodes.iter().map(|&l| driving.eval(l, c)),
        );
        let sol = self
            .lu
            .solve(&rhs)
            .ok_or_else(|| Error::Singular("Nystrom solve".into()))?;
        Ok(Field {
            grid: self.grid.clone(),
            c,
            driving: driving.clone(),
            values: sol.iter().copied().collect(),
        })
    }

    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        self.lu
            .try_inverse()
            .ok_or_else(|| Error::Singular("Nystrom inverse".into()))
    }
}

pub fn nystrom_matrix(grid: &QuadGrid, params: &ModelParams) -> DMatrix<f64> {
    let n = grid.n_nodes;
    let c = params.c;
    DMatrix::from_fn(n, n, |j, k| {
        let d = if j == k { 1.0 } else { 0.0 };
        d - grid.weights[k] * kernel(grid.nodes[j] - grid.nodes[k], c) / TWO_PI
    })
}

/// Solution of `f - K f / 2pi = g` on the grid, with its Nyström extension.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<QuadGrid>,
    c: f64,
    driving: Driving,
    values: Vec<f64>,
}

impl Field {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn driving(&self) -> &Driving {
        &self.driving
    }

    pub fn grid(&self) -> &QuadGrid {
        &self.grid
    }

    pub fn eval(&self, l: f64) -> f64 {
        let g = &self.grid;
        let mut s = 0.0;
        for k in 0..g.n_nodes {
            s += g.weights[k] * kernel(l - g.nodes[k], self.c) * self.values[k];
        }
        self.driving.eval(l, self.c) + s / TWO_PI
    }

    pub fn deriv(&self, l: f64) -> f64 {
        let g = &self.grid;
        let mut s = 0.0;
        for k in 0..g.n_nodes {
            s += g.weights[k] * kernel_d(l - g.nodes[k], self.c) * self.values[k];
        }
        self.driving.deriv(l, self.c) + s / TWO_PI
    }

    pub fn deriv2(&self, l: f64) -> f64 {
        let g = &self.grid;
        let mut s = 0.0;
        for k in 0..g.n_nodes {
            s += g.weights[k] * kernel_d2(l - g.nodes[k], self.c) * self.values[k];
        }
        self.driving.deriv2(l, self.c) + s / TWO_PI
    }

    fn check_strip(&self, z: Complex64) -> Result<()> {
        if z.im.abs() > 0.25 * self.c {
            return Err(Error::Domain(format!("{z}"), 0.25 * self.c));
        }
        Ok(())
    }

    /// Extension to complex arguments with `|Im z| <= c/4`.
    pub fn eval_c(&self, z: Complex64) -> Result<Complex64> {
        self.check_strip(z)?;
        let g = &self.grid;
        let mut s = Complex64::new(0.0, 0.0);
        for k in 0..g.n_nodes {
            s += g.weights[k] * kernel_c(z - g.nodes[k], self.c) * self.values[k];
        }
        Ok(self.driving.eval_c(z, self.c) + s / TWO_PI)
    }

    pub fn deriv_c(&self, z: Complex64) -> Result<Complex64> {
        self.check_strip(z)?;
        let g = &self.grid;
        let mut s = Complex64::new(0.0, 0.0);
        for k in 0..g.n_nodes {
            s += g.weights[k] * kernel_d_c(z - g.nodes[k], self.c) * self.values[k];
        }
        Ok(self.driving.deriv_c(z, self.c) + s / TWO_PI)
    }

    /// Linear combination `sum a_i f_i` of fields on the same grid.
    pub fn combine(terms: &[(f64, &Field)]) -> Field {
        let first = terms[0].1;
        let mut values = vec![0.0; first.values.len()];
        let mut driving = Driving::default();
        for &(a, f) in terms {
            for (v, x) in values.iter_mut().zip(&f.values) {
                *v += a * x;
            }
            driving = driving.add(&f.driving.scaled(a));
        }
        Field { grid: first.grid.clone(), c: first.c, driving, values }
    }
}

/// Solves `f - K f / 2pi = g` with a fresh factorisation.
pub fn solve_second_kind(driving: &Driving, grid: &QuadGrid, params: &ModelParams) -> Result<Field> {
    Nystrom::new(Arc::new(grid.clone()), *params)?.solve(driving)
}

fn eps_at_boundary(params: &ModelParams, n_nodes: usize, q: f64) -> Result<f64> {
    let ny = Nystrom::new(Arc::new(QuadGrid::new(n_nodes, q)), *params)?;
    let eps = ny.solve(&Driving::poly(-params.h, 0.0, 1.0))?;
    Ok(eps.eval(q))
}

/// Fermi boundary with the default grid size.
pub fn find_fermi_boundary(params: &ModelParams, tol: f64) -> Result<f64> {
    find_fermi_boundary_n(params, DEFAULT_NODES, tol)
}

pub fn find_fermi_boundary_n(params: &ModelParams, n_nodes: usize, tol: f64) -> Result<f64> {
    let mut a = 1e-6;
    let mut b = 10.0 * params.h.sqrt();
    let mut fa = eps_at_boundary(params, n_nodes, a)?;
    let mut fb = eps_at_boundary(params, n_nodes, b)?;
    if fa * fb > 0.0 {
        return Err(Error::BracketFailure(fa, fb));
    }
    while b - a > 1e-6 * b {
        let m = 0.5 * (a + b);
        let fm = eps_at_boundary(params, n_nodes, m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if fa * fm < 0.0 {
            b = m;
            fb = fm;
        } else {
            a = m;
            fa = fm;
        }
    }
    // secant polish from the bracket ends
    let (mut x0, mut f0, mut x1, mut f1) = (a, fa, b, fb);
    for _ in 0..50 {
        if f1 == f0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        let f2 = eps_at_boundary(params, n_nodes, x2)?;
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
        if f1.abs() <= 1e-3 * tol || (x1 - x0).abs() <= 4.0 * f64::EPSILON * x1 {
            break;
        }
    }
    if f1.abs() > tol {
        return Err(Error::NoConvergence(format!("eps(q)={f1:e} at q={x1}")));
    }
    Ok(x1)
}

/// Dressed quantities on `[-q, q]`.
#[derive(Debug, Clone)]
pub struct DressedSet {
    pub params: ModelParams,
    pub q: f64,
    pub grid: Arc<QuadGrid>,
    pub nystrom: Arc<Nystrom>,
    pub p_prime: Field,
    pub eps: Field,
    pub eps_prime: Field,
    pub z: Field,
    pub p_nodes: Vec<f64>,
    pub det_ik: f64,
    pub density: f64,
    pub p_f: f64,
    pub v_f: f64,
}

pub fn dress_all(params: &ModelParams, n_nodes: usize, tol: f64) -> Result<DressedSet> {
    let q = find_fermi_boundary_n(params, n_nodes, tol)?;
    let grid = Arc::new(QuadGrid::new(n_nodes, q));
    let ny = Arc::new(Nystrom::new(grid.clone(), *params)?);
    let p_prime = ny.solve(&Driving::constant(1.0))?;
    let eps = ny.solve(&Driving::poly(-params.h, 0.0, 1.0))?;
    let eps_prime = ny.solve(&Driving::poly(0.0, 2.0, 0.0))?;
    let z = ny.solve(&Driving::constant(1.0))?;
    let mut d = DressedSet {
        params: *params,
        q,
        grid: grid.clone(),
        nystrom: ny.clone(),
        p_prime,
        eps,
        eps_prime,
        z,
        p_nodes: Vec::new(),
        det_ik: ny.det(),
        density: 0.0,
        p_f: 0.0,
        v_f: 0.0,
    };
    d.p_nodes = grid.nodes.iter().map(|&l| d.p(l)).collect();
    d.p_f = d.p(q);
    d.density = d.p_f / PI;
    d.v_f = d.eps_prime.eval(q) / d.p_prime.eval(q);
    Ok(d)
}

impl DressedSet {
    pub fn new(params: &ModelParams) -> Result<Self> {
        dress_all(params, DEFAULT_NODES, DEFAULT_TOL)
    }

    pub fn n_nodes(&self) -> usize {
        self.grid.n_nodes
    }

    /// Dressed momentum, the antiderivative of `p'` vanishing at 0.
    pub fn p(&self, l: f64) -> f64 {
        let g = &self.grid;
        let c = self.params.c;
        let pp = self.p_prime.values();
        let mut s = 0.0;
        for k in 0..g.n_nodes {
            s += g.weights[k] * theta(l - g.nodes[k], c) * pp[k];
        }
        l + s / TWO_PI
    }

    pub fn p_c(&self, z: Complex64) -> Result<Complex64> {
        if z.im.abs() > 0.25 * self.params.c {
            return Err(Error::Domain(format!("{z}"), 0.25 * self.params.c));
        }
        let g = &self.grid;
        let c = self.params.c;
        let pp = self.p_prime.values();
        let mut s = Complex64::new(0.0, 0.0);
        for k in 0..g.n_nodes {
            s += g.weights[k] * theta_c(z - g.nodes[k], c) * pp[k];
        }
        Ok(z + s / TWO_PI)
    }

    pub fn p1(&self, l: f64) -> f64 {
        self.p_prime.eval(l)
    }

    pub fn p2(&self, l: f64) -> f64 {
        self.p_prime.deriv(l)
    }

    pub fn e(&self, l: f64) -> f64 {
        self.eps.eval(l)
    }

    pub fn e1(&self, l: f64) -> f64 {
        self.eps_prime.eval(l)
    }

    pub fn e2(&self, l: f64) -> f64 {
        self.eps_prime.deriv(l)
    }

    pub fn charge(&self, l: f64) -> f64 {
        self.z.eval(l)
    }

    /// `phi(., mu)` as a field in its first argument.
    pub fn phi_field(&self, mu: f64) -> Result<Field> {
        self.nystrom.solve(&Driving::phase(1.0, mu))
    }

    pub fn phi(&self, l: f64, mu: f64) -> Result<f64> {
        Ok(self.phi_field(mu)?.eval(l))
    }

    pub fn phi_c(&self, z: Complex64, mu: f64) -> Result<Complex64> {
        self.phi_field(mu)?.eval_c(z)
    }

    /// Largest residual of `Z - 1 - phi(., -q) + phi(., q)` over the nodes.
    pub fn z_identity_residual(&self) -> Result<f64> {
        let pm = self.phi_field(-self.q)?;
        let pp = self.phi_field(self.q)?;
        let zv = self.z.values();
        Ok((0..self.n_nodes())
            .map(|k| (zv[k] - 1.0 - pm.values()[k] + pp.values()[k]).abs())
            .fold(0.0, f64::max))
    }

    /// Residual of `1/Z(q) - 1 - phi(-q, q) + phi(q, q)`.
    pub fn z_inverse_identity_residual(&self) -> Result<f64> {
        let f = self.phi_field(self.q)?;
        let q = self.q;
        Ok((1.0 / self.charge(q) - 1.0 - f.eval(-q) + f.eval(q)).abs())
    }
}

/// Resolvent of the Lieb kernel, `(I - K/2pi)(I + R/2pi) = I`.
#[derive(Debug, Clone)]
pub struct Resolvent {
    /// `R(l_j, l_k)` on the nodes.
    pub matrix: DMatrix<f64>,
    nystrom: Arc<Nystrom>,
}

impl Resolvent {
    pub fn eval(&self, l: f64, mu: f64) -> Result<f64> {
        Ok(self.nystrom.solve(&Driving::kernel(1.0, mu))?.eval(l))
    }
}

pub fn resolvent(dressed: &DressedSet) -> Result<Resolvent> {
    let inv = dressed.nystrom.inverse()?;
    let w = &dressed.grid.weights;
    let n = dressed.n_nodes();
    let matrix = DMatrix::from_fn(n, n, |j, k| {
        let d = if j == k { 1.0 } else { 0.0 };
        TWO_PI * (inv[(j, k)] - d) / w[k]
    });
    Ok(Resolvent { matrix, nystrom: dressed.nystrom.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dressed(c: f64, h: f64, n: usize) -> DressedSet {
        dress_all(&ModelParams::new(c, h).unwrap(), n, DEFAULT_TOL).unwrap()
    }

    #[test]
    fn grid_invariants() {
        let g = QuadGrid::new(96, 1.3);
        assert!((g.weights.iter().sum::<f64>() - 2.6).abs() < 1e-12);
        for i in 0..96 {
            assert_eq!(g.nodes[i], -g.nodes[95 - i]);
            if i > 0 {
                assert!(g.nodes[i] > g.nodes[i - 1]);
            }
        }
    }

    #[test]
    fn free_fermion_limit() {
        let d = dressed(1e6, 1.0, 96);
        assert!((d.q - 1.0).abs() < 1e-5);
        assert!(d.z.values().iter().all(|z| (z - 1.0).abs() < 1e-5));
        assert!((d.p(0.7) - 0.7).abs() < 1e-5);
        assert!((d.v_f - 2.0).abs() < 1e-5);
        let d4 = dressed(1e6, 4.0, 96);
        assert!((d4.q - 2.0).abs() < 1e-5);
    }

    #[test]
    fn solve_matches_fixed_point_iteration() {
        let params = ModelParams::new(4.0, 1.0).unwrap();
        let grid = QuadGrid::new(64, 1.0);
        let g = Driving::poly(-1.0, 0.0, 1.0);
        let f = solve_second_kind(&g, &grid, &params).unwrap();
        let n = grid.n_nodes;
        let gv: Vec<f64> = grid.nodes.iter().map(|&l| l * l - 1.0).collect();
        let mut it = gv.clone();
        for _ in 0..200 {
            it = (0..n)
                .map(|j| {
                    gv[j]
                        + (0..n)
                            .map(|k| grid.weights[k] * kernel(grid.nodes[j] - grid.nodes[k], 4.0) * it[k])
                            .sum::<f64>()
                            / TWO_PI
                })
                .collect();
        }
        for j in 0..n {
            assert!((it[j] - f.values()[j]).abs() < 1e-8);
        }
        // extension reproduces node values
        for j in [0, 10, 31] {
            assert!((f.eval(grid.nodes[j]) - f.values()[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn quadrature_convergence_at_fixed_q() {
        let params = ModelParams::new(1.0, 1.0).unwrap();
        let g = Driving::poly(-1.0, 0.0, 1.0);
        let a = solve_second_kind(&g, &QuadGrid::new(64, 1.2), &params).unwrap();
        let b = solve_second_kind(&g, &QuadGrid::new(128, 1.2), &params).unwrap();
        assert!((a.eval(0.0) - b.eval(0.0)).abs() < 1e-9);
    }

    #[test]
    fn dressed_invariants_c1() {
        let d = dressed(1.0, 1.0, 96);
        assert!(d.e(d.q).abs() < 1e-10 && d.e(-d.q).abs() < 1e-10);
        let n = d.n_nodes();
        for k in 0..n {
            assert!((d.p_nodes[k] + d.p_nodes[n - 1 - k]).abs() < 1e-8);
            assert!((d.eps.values()[k] - d.eps.values()[n - 1 - k]).abs() < 1e-8);
            assert!((d.z.values()[k] - d.z.values()[n - 1 - k]).abs() < 1e-8);
            assert!(d.p_prime.values()[k] > 0.0);
        }
        assert!((d.p_f - PI * d.density).abs() < 1e-14);
        assert!(d.z_identity_residual().unwrap() < 1e-7);
        assert!(d.z_inverse_identity_residual().unwrap() < 1e-7);
        // the differentiated equation agrees with the derivative of the extension
        assert!((d.e1(0.4) - d.eps.deriv(0.4)).abs() < 1e-8);
    }

    #[test]
    fn det_and_q_converge() {
        let a = dressed(1.0, 1.0, 64);
        let b = dressed(1.0, 1.0, 128);
        assert!((a.det_ik - b.det_ik).abs() < 1e-8);
        assert!((a.q - b.q).abs() < 1e-9);
    }

    #[test]
    fn fermi_boundary_matches_dense_fixed_point() {
        // independent oracle: dense grid, Neumann iteration, bisection on eps(q)
        let params = ModelParams::new(1.0, 1.0).unwrap();
        let eps_q = |q: f64| {
            let (x, w) = gauss_legendre(512, -q, q);
            let n = x.len();
            let g: Vec<f64> = x.iter().map(|l| l * l - 1.0).collect();
            let mut f = g.clone();
            for _ in 0..400 {
                f = (0..n)
                    .map(|j| g[j] + (0..n).map(|k| w[k] * kernel(x[j] - x[k], 1.0) * f[k]).sum::<f64>() / TWO_PI)
                    .collect();
            }
            q * q - 1.0 + (0..n).map(|k| w[k] * kernel(q - x[k], 1.0) * f[k]).sum::<f64>() / TWO_PI
        };
        let (mut a, mut b) = (0.5, 3.0);
        for _ in 0..45 {
            let m = 0.5 * (a + b);
            if eps_q(m) < 0.0 {
                a = m
            } else {
                b = m
            }
        }
        let q = find_fermi_boundary(&params, 1e-12).unwrap();
        assert!((q - 0.5 * (a + b)).abs() < 1e-6);
    }

    #[test]
    fn resolvent_identities() {
        let d = dressed(1.0, 1.0, 48);
        let r = resolvent(&d).unwrap();
        let a = nystrom_matrix(&d.grid, &d.params);
        let n = d.n_nodes();
        let rw = DMatrix::from_fn(n, n, |j, k| {
            (if j == k { 1.0 } else { 0.0 }) + r.matrix[(j, k)] * d.grid.weights[k] / TWO_PI
        });
        let prod = a * rw;
        let err = (prod - DMatrix::<f64>::identity(n, n)).abs().max();
        assert!(err < 1e-10);
        let d2 = dressed(2.0, 1.0, 48);
        let r2 = resolvent(&d2).unwrap();
        for j in 0..n {
            for k in 0..n {
                assert!((r2.matrix[(j, k)] - r2.matrix[(k, j)]).abs() < 1e-8);
            }
        }
        let x = d2.grid.nodes[7];
        let y = d2.grid.nodes[20];
        assert!((r2.eval(x, y).unwrap() - r2.matrix[(7, 20)]).abs() < 1e-10);
        let big = resolvent(&dressed(1e6, 1.0, 48)).unwrap();
        assert!(big.matrix.abs().max() < 1e-5);
    }
}
