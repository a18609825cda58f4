//! Quadrature helpers shared by the solvers.

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

/// Gauss-Legendre nodes and weights on `[a, b]`, nodes increasing.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let rule = GaussLegendre::new(n.max(2)).expect("degree >= 2");
    let mut pairs: Vec<(f64, f64)> = rule.into_node_weight_pairs();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    // enforce exact reflection symmetry of the reference rule
    let m = pairs.len();
    for i in 0..m / 2 {
        let x = 0.5 * (pairs[m - 1 - i].0 - pairs[i].0);
        let w = 0.5 * (pairs[m - 1 - i].1 + pairs[i].1);
        pairs[i] = (-x, w);
        pairs[m - 1 - i] = (x, w);
    }
    if m % 2 == 1 {
        pairs[m / 2].0 = 0.0;
    }
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let nodes = pairs.iter().map(|p| mid + half * p.0).collect();
    let weights = pairs.iter().map(|p| half * p.1).collect();
    (nodes, weights)
}

// 7-point Gauss and 15-point Kronrod abscissae/weights on [-1, 1].
const XK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WK[7];
    let mut rg = fc * WG[3];
    for j in 0..7 {
        let x = h * XK[j];
        let s = f(c - x) + f(c + x);
        rk += s * WK[j];
        if j % 2 == 1 {
            rg += s * WG[j / 2];
        }
    }
    (rk * h, ((rk - rg) * h).norm())
}

/// Adaptive Gauss-Kronrod integral of a complex-valued function of a real variable.
pub fn adaptive<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, abs_tol: f64) -> Complex64 {
    fn rec<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Complex64 {
        let (v, err) = gk15(f, a, b);
        if err <= tol || depth == 0 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth - 1) + rec(f, m, b, 0.5 * tol, depth - 1)
    }
    rec(f, a, b, abs_tol, 40)
}

/// Integral of `f(z) dz` along the straight segment from `z0` to `z1`.
pub fn segment<F: Fn(Complex64) -> Complex64>(f: &F, z0: Complex64, z1: Complex64, abs_tol: f64) -> Complex64 {
    let d = z1 - z0;
    adaptive(&|s: f64| f(z0 + d * s) * d, 0.0, 1.0, abs_tol)
}
