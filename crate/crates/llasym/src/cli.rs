//! Command-line front end: flat `key=value` configs, pipelines and CSV tables
//! with a `#` metadata header.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::amplitudes::{amplitude, hard_core_amplitude, ContourSpec, DEFAULT_CONTOUR_NODES};
use crate::asymptote::{evaluate_rho, expansion_from_dressed, exponent_table, Amplitude, ExpansionReport, TermLabel};
use crate::dressing::{dress_all, DressedSet, DEFAULT_NODES};
use crate::error::Error;
use crate::excitations::{default_scan_range, find_saddle, ShiftKind};
use crate::fflab::{
    lagrange_closed_form, lagrange_series, singular_sum, standard_matrix, xn_bruteforce, xn_determinant, FFLabInstance, QuadraticPhase, TestNu,
};
use crate::model::ModelParams;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SADDLE: i32 = 3;

const DRESS_TOL: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "llasym", version, about = "Asymptotics of the one-body density matrix of the 1D Bose gas")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Flat key=value config file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (default: standard output)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Gauss-Legendre nodes on [-q, q]
    #[arg(long, global = true)]
    pub nodes: Option<usize>,
    /// Nodes on the amplitude contour
    #[arg(long = "contour-nodes", global = true)]
    pub contour_nodes: Option<usize>,
    /// Largest |l+|, |l-| in harmonic tables
    #[arg(long = "max-ell", global = true)]
    pub max_ell: Option<i64>,
    /// Shift added to Z in the verification suite
    #[arg(long, global = true)]
    pub perturb: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Dressed quantities on the quadrature nodes
    Dress,
    /// Saddle point of u at the configured t/x
    Saddle,
    /// Frequencies and exponents of the explicit terms
    Exponents,
    /// The three explicit amplitudes
    Amplitudes,
    /// Term table and evaluations of rho(x, t)
    Asymptotics,
    /// Harmonic frequencies and exponents
    Harmonics,
    /// Identity and reduction checks
    Verify,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Dress => "dress",
            Command::Saddle => "saddle",
            Command::Exponents => "exponents",
            Command::Amplitudes => "amplitudes",
            Command::Asymptotics => "asymptotics",
            Command::Harmonics => "harmonics",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: message.into() }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Saddle(_) | Error::LightCone(_) => EXIT_SADDLE,
            _ => EXIT_CONFIG,
        };
        let kind = match &e {
            Error::Saddle(s) => format!("{s}"),
            other => format!("{other}"),
        };
        Self { code, message: kind }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub c: f64,
    pub h: f64,
    pub ratio_t_over_x: f64,
    pub n_nodes: usize,
    pub contour_nodes: usize,
    pub max_abs_ell: i64,
    pub eval_points: Vec<(f64, f64)>,
    pub output_path: Option<PathBuf>,
    pub perturb: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            h: 1.0,
            ratio_t_over_x: 0.1,
            n_nodes: DEFAULT_NODES,
            contour_nodes: DEFAULT_CONTOUR_NODES,
            max_abs_ell: 2,
            eval_points: Vec::new(),
            output_path: None,
            perturb: 0.0,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| CliError::config(format!("bad value for {key}: '{v}'")))
}

impl RunConfig {
    /// Parses `key = value` lines; `#` starts a comment, `eval = x, t` may repeat.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| CliError::config(format!("line {}: expected key=value", i + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "c" => cfg.c = parse_num(k, v)?,
                "h" => cfg.h = parse_num(k, v)?,
                "ratio_t_over_x" | "ratio" => cfg.ratio_t_over_x = parse_num(k, v)?,
                "n_nodes" | "nodes" => cfg.n_nodes = parse_num(k, v)?,
                "contour_nodes" => cfg.contour_nodes = parse_num(k, v)?,
                "max_abs_ell" | "max_ell" => cfg.max_abs_ell = parse_num(k, v)?,
                "perturb" => cfg.perturb = parse_num(k, v)?,
                "output" | "out" => cfg.output_path = Some(PathBuf::from(v)),
                "eval" => {
                    let (x, t) = v.split_once(',').ok_or_else(|| CliError::config(format!("eval expects 'x, t', got '{v}'")))?;
                    cfg.eval_points.push((parse_num(k, x.trim())?, parse_num(k, t.trim())?));
                }
                _ => return Err(CliError::config(format!("line {}: unknown key '{k}'", i + 1))),
            }
        }
        Ok(cfg)
    }

    pub fn apply_overrides(&mut self, cli: &Cli) {
        if let Some(n) = cli.nodes {
            self.n_nodes = n;
        }
        if let Some(n) = cli.contour_nodes {
            self.contour_nodes = n;
        }
        if let Some(k) = cli.max_ell {
            self.max_abs_ell = k;
        }
        if let Some(p) = cli.perturb {
            self.perturb = p;
        }
        if let Some(o) = &cli.out {
            self.output_path = Some(o.clone());
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        ModelParams::new(self.c, self.h)?;
        if !(self.ratio_t_over_x.is_finite() && self.ratio_t_over_x >= 0.0) {
            return Err(CliError::config(format!("ratio_t_over_x must be >= 0, got {}", self.ratio_t_over_x)));
        }
        if self.n_nodes < 4 {
            return Err(CliError::config(format!("n_nodes must be >= 4, got {}", self.n_nodes)));
        }
        if self.contour_nodes < 4 || self.contour_nodes % 2 == 1 {
            return Err(CliError::config(format!("contour_nodes must be even and >= 4, got {}", self.contour_nodes)));
        }
        if self.max_abs_ell < 0 {
            return Err(CliError::config(format!("max_abs_ell must be >= 0, got {}", self.max_abs_ell)));
        }
        if !self.perturb.is_finite() {
            return Err(CliError::config("perturb must be finite"));
        }
        for &(x, t) in &self.eval_points {
            if !(x > 0.0 && t.is_finite()) {
                return Err(CliError::config(format!("eval point ({x}, {t}) needs x > 0")));
            }
            let r = t / x;
            if (r - self.ratio_t_over_x).abs() > 1e-12 * self.ratio_t_over_x.max(1.0) {
                return Err(CliError::config(format!("eval point ({x}, {t}) has t/x = {r}, config says {}", self.ratio_t_over_x)));
            }
        }
        Ok(())
    }

    fn params(&self) -> Result<ModelParams, CliError> {
        Ok(ModelParams::new(self.c, self.h)?)
    }

    fn dressed(&self) -> Result<DressedSet, CliError> {
        Ok(dress_all(&self.params()?, self.n_nodes, DRESS_TOL)?)
    }
}

/// Caps the global rayon pool at `LLASYM_THREADS` when set.
pub fn init_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("LLASYM_THREADS") {
        let n: usize = parse_num("LLASYM_THREADS", v.trim())?;
        if n == 0 {
            return Err(CliError::config("LLASYM_THREADS must be >= 1"));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// 17 significant digits.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn field(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn header(cmd: Command, cfg: &RunConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# command={}", cmd.name());
    let _ = writeln!(s, "# c={}", fmt(cfg.c));
    let _ = writeln!(s, "# h={}", fmt(cfg.h));
    let _ = writeln!(s, "# ratio_t_over_x={}", fmt(cfg.ratio_t_over_x));
    let _ = writeln!(s, "# n_nodes={}", cfg.n_nodes);
    let _ = writeln!(s, "# contour_nodes={}", cfg.contour_nodes);
    let _ = writeln!(s, "# max_abs_ell={}", cfg.max_abs_ell);
    s
}

fn dressed_header(s: &mut String, d: &DressedSet) {
    let _ = writeln!(s, "# q={}", fmt(d.q));
    let _ = writeln!(s, "# D={}", fmt(d.density));
    let _ = writeln!(s, "# pF={}", fmt(d.p_f));
    let _ = writeln!(s, "# vF={}", fmt(d.v_f));
    let _ = writeln!(s, "# det_IK={}", fmt(d.det_ik));
}

pub fn cmd_dress(cfg: &RunConfig) -> Result<String, CliError> {
    let d = cfg.dressed()?;
    let mut s = header(Command::Dress, cfg);
    dressed_header(&mut s, &d);
    s.push_str("lambda,p,p_prime,eps,Z\n");
    for (k, &l) in d.grid.nodes.iter().enumerate() {
        let _ = writeln!(s, "{},{},{},{},{}", fmt(l), fmt(d.p_nodes[k]), fmt(d.p_prime.values()[k]), fmt(d.eps.values()[k]), fmt(d.z.values()[k]));
    }
    Ok(s)
}

pub fn cmd_saddle(cfg: &RunConfig) -> Result<String, CliError> {
    let d = cfg.dressed()?;
    let r = cfg.ratio_t_over_x;
    let sd = find_saddle(r, &d, default_scan_range(r, d.q))?;
    let mut s = header(Command::Saddle, cfg);
    dressed_header(&mut s, &d);
    s.push_str("ratio_t_over_x,lambda0,regime,u_prime,u_second\n");
    let _ = writeln!(s, "{},{},{},{},{}", fmt(r), fmt(sd.lambda0), sd.regime.name(), fmt(sd.u_prime), fmt(sd.u_second));
    Ok(s)
}

fn amplitude_cell(a: &Amplitude) -> String {
    match a {
        Amplitude::Known(v) => fmt(v.re),
        Amplitude::Unknown => "UNKNOWN".into(),
    }
}

fn report_header(s: &mut String, rep: &ExpansionReport) {
    let m = &rep.summary;
    let _ = writeln!(s, "# q={}", fmt(m.q));
    let _ = writeln!(s, "# D={}", fmt(m.density));
    let _ = writeln!(s, "# pF={}", fmt(m.p_f));
    let _ = writeln!(s, "# vF={}", fmt(m.v_f));
    match rep.saddle {
        Some(sd) => {
            let _ = writeln!(s, "# lambda0={}", fmt(sd.lambda0));
            let _ = writeln!(s, "# regime={}", sd.regime.name());
        }
        None => {
            let _ = writeln!(s, "# regime=static");
        }
    }
}

fn term_table(s: &mut String, rep: &ExpansionReport, explicit_only: bool) {
    s.push_str("label,frequency,exponent_plus,exponent_minus,extra_power,amplitude,active\n");
    for t in &rep.terms {
        if explicit_only && matches!(t.label, TermLabel::Harmonic(..)) {
            continue;
        }
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            field(&t.label.name()),
            fmt(t.frequency),
            fmt(t.exponent_plus),
            fmt(t.exponent_minus),
            fmt(t.extra_power),
            amplitude_cell(&t.amplitude),
            t.active
        );
    }
}

pub fn cmd_exponents(cfg: &RunConfig) -> Result<String, CliError> {
    let d = cfg.dressed()?;
    let rep = exponent_table(&d, cfg.ratio_t_over_x, 0)?;
    let mut s = header(Command::Exponents, cfg);
    report_header(&mut s, &rep);
    term_table(&mut s, &rep, true);
    Ok(s)
}

pub fn cmd_harmonics(cfg: &RunConfig) -> Result<String, CliError> {
    let d = cfg.dressed()?;
    let rep = exponent_table(&d, cfg.ratio_t_over_x, cfg.max_abs_ell)?;
    let mut s = header(Command::Harmonics, cfg);
    report_header(&mut s, &rep);
    s.push_str("ell_plus,ell_minus,frequency,exponent,amplitude\n");
    for t in &rep.terms {
        if let TermLabel::Harmonic(p, m) = t.label {
            let _ = writeln!(s, "{p},{m},{},{},UNKNOWN", fmt(t.frequency), fmt(t.total_exponent()));
        }
    }
    Ok(s)
}

pub fn cmd_amplitudes(cfg: &RunConfig) -> Result<String, CliError> {
    let params = cfg.params()?;
    let d = cfg.dressed()?;
    let r = cfg.ratio_t_over_x;
    let saddle = if r > 0.0 { Some(find_saddle(r, &d, default_scan_range(r, d.q))?) } else { None };
    let contour = ContourSpec::default_for(&d, cfg.contour_nodes);
    let mut kinds = vec![ShiftKind::Empty, ShiftKind::MinusQ];
    if saddle.is_some() {
        kinds.push(ShiftKind::Saddle);
    }
    let lambda0 = saddle.map(|s| s.lambda0).unwrap_or(f64::INFINITY);
    let rows: Vec<_> = kinds.par_iter().map(|&k| (k, amplitude(k, &d, lambda0, &contour, &params))).collect();
    let mut s = header(Command::Amplitudes, cfg);
    dressed_header(&mut s, &d);
    if let Some(sd) = saddle {
        let _ = writeln!(s, "# lambda0={}", fmt(sd.lambda0));
        let _ = writeln!(s, "# regime={}", sd.regime.name());
    }
    s.push_str("kind,value,phase_residual,re_ln_b,re_ln_a,re_ln_g,re_ln_prefactor\n");
    for (k, a) in rows {
        let a = a?;
        let p = a.parts;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            k.name(),
            fmt(a.value),
            fmt(a.phase_residual),
            fmt(p.ln_b.re),
            fmt(p.ln_a.re),
            fmt(p.ln_g.re),
            fmt(p.ln_prefactor.re)
        );
    }
    Ok(s)
}

pub fn cmd_asymptotics(cfg: &RunConfig) -> Result<String, CliError> {
    let d = cfg.dressed()?;
    let rep = expansion_from_dressed(&d, cfg.ratio_t_over_x, cfg.max_abs_ell, cfg.contour_nodes)?;
    let evals: Vec<_> = cfg.eval_points.par_iter().map(|&(x, t)| evaluate_rho(&rep, x, t)).collect::<Result<_, _>>()?;
    let mut s = header(Command::Asymptotics, cfg);
    report_header(&mut s, &rep);
    s.push_str("# table=terms\n");
    term_table(&mut s, &rep, false);
    s.push_str("# table=evaluations\n");
    s.push_str("x,t,re_rho,im_rho");
    for t in &rep.terms {
        let _ = write!(s, ",{}", field(&format!("mod_{}", t.label.name())));
    }
    s.push('\n');
    for e in &evals {
        let _ = write!(s, "{},{},{},{}", fmt(e.x), fmt(e.t), fmt(e.value.re), fmt(e.value.im));
        for b in &e.breakdown {
            let _ = write!(s, ",{}", fmt(b.modulus));
        }
        s.push('\n');
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.value < self.tolerance
    }
}

fn check(name: impl Into<String>, value: f64, tolerance: f64) -> CheckResult {
    // NaN fails
    CheckResult { name: name.into(), value: if value.is_nan() { f64::INFINITY } else { value }, tolerance }
}

fn identity_checks(c: f64, h: f64, n_nodes: usize, perturb: f64) -> Result<Vec<CheckResult>, CliError> {
    let d = dress_all(&ModelParams::new(c, h)?, n_nodes, DRESS_TOL)?;
    let q = d.q;
    let pm = d.phi_field(-q)?;
    let pp = d.phi_field(q)?;
    let zv = d.z.values();
    let res = (0..d.n_nodes()).map(|k| (zv[k] + perturb - 1.0 - pm.values()[k] + pp.values()[k]).abs()).fold(0.0, f64::max);
    let inv = (1.0 / (d.charge(q) + perturb) - 1.0 - pp.eval(-q) + pp.eval(q)).abs();
    Ok(vec![
        check(format!("z_identity c={c} h={h}"), res, 1e-7),
        check(format!("z_inverse_identity c={c} h={h}"), inv, 1e-7),
    ])
}

fn hard_core_checks(n_nodes: usize, contour_nodes: usize) -> Result<Vec<CheckResult>, CliError> {
    let d = dress_all(&ModelParams::new(1e6, 1.0)?, n_nodes, DRESS_TOL)?;
    let rep = expansion_from_dressed(&d, 0.1, 0, contour_nodes)?;
    let zf = rep.term(TermLabel::ZeroFreq).expect("zero_freq term");
    let tp = rep.term(TermLabel::TwoPF).expect("two_pF term");
    let lam0 = rep.saddle.map(|s| s.lambda0).unwrap_or(f64::INFINITY);
    let amp = match zf.amplitude {
        Amplitude::Known(a) => a,
        Amplitude::Unknown => Complex64::new(f64::NAN, 0.0),
    };
    let closed = hard_core_amplitude(ShiftKind::Empty, d.q, lam0)?;
    Ok(vec![
        check("hard_core q", (d.q - 1.0).abs(), 1e-5),
        check("hard_core Z(q)", (d.charge(d.q) - 1.0).abs(), 1e-5),
        check("hard_core vF", (d.v_f - 2.0).abs(), 1e-4),
        check("hard_core zero_freq exponents", (zf.exponent_minus - 0.25).abs().max((zf.exponent_plus - 0.25).abs()), 1e-5),
        check("hard_core two_pF exponents", (tp.exponent_minus - 0.25).abs().max((tp.exponent_plus - 2.25).abs()), 1e-4),
        check("hard_core empty amplitude", ((amp.re - closed) / closed).abs(), 1e-4),
    ])
}

fn fflab_checks() -> Result<Vec<CheckResult>, CliError> {
    let worst = standard_matrix()
        .par_iter()
        .map(|it| -> crate::Result<f64> { Ok((xn_bruteforce(it)? - xn_determinant(it)?).norm()) })
        .collect::<crate::Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let mut out = vec![check("xn_bruteforce == xn_determinant (12 instances)", worst, 1e-10)];
    let it = FFLabInstance::standard(6, 20.0, 40, TestNu::Zero, QuadraticPhase { x: 1.0, tau: 0.25 })?.with_alpha(1.5);
    for r in 0..=2 {
        let mut worst: f64 = 0.0;
        for lam in [-0.71, -0.2, 0.13, 0.52, 0.87] {
            worst = worst.max(singular_sum(&it, r, lam)?.identity_residual());
        }
        out.push(check(format!("singular_sum identity r={r}"), worst, 1e-8));
    }
    Ok(out)
}

fn lagrange_checks() -> Result<Vec<CheckResult>, CliError> {
    let c = |x: f64| Complex64::new(x, 0.0);
    let exp0 = |z: &[Complex64]| z[0].exp();
    let mut out = Vec::new();

    let konst = |_: &[Complex64]| c(0.5);
    let sums = lagrange_series(&[&konst], &exp0, &[1.0], 20)?;
    let closed = lagrange_closed_form(&[&konst], &exp0)?;
    out.push(check("lagrange constant map", (sums[20] - closed).norm(), 1e-12));

    let lin = |z: &[Complex64]| 0.3 * z[0];
    let sums = lagrange_series(&[&lin], &exp0, &[1.0], 30)?;
    let closed = lagrange_closed_form(&[&lin], &exp0)?;
    let geo = (sums[8] - c((1.0 - 0.3f64.powi(9)) / 0.7)).norm();
    out.push(check("lagrange linear map order 30", (sums[30] - closed).norm(), 1e-12));
    out.push(check("lagrange linear map geometric partial sum", geo, 1e-12));

    let p1 = |z: &[Complex64]| 0.1 + 0.05 * z[1];
    let p2 = |z: &[Complex64]| 0.2 + 0.05 * z[0];
    let one = |_: &[Complex64]| c(1.0);
    let sums = lagrange_series(&[&p1, &p2], &one, &[1.0, 1.0], 8)?;
    let closed = lagrange_closed_form(&[&p1, &p2], &one)?;
    out.push(check("lagrange two-variable map order 8", (sums[8] - closed).norm(), 1e-8));
    Ok(out)
}

pub fn run_checks(cfg: &RunConfig) -> Result<Vec<CheckResult>, CliError> {
    let mut out = Vec::new();
    for (c, h) in [(1.0, 1.0), (4.0, 1.0), (16.0, 2.0)] {
        out.extend(identity_checks(c, h, cfg.n_nodes, cfg.perturb)?);
    }
    out.extend(hard_core_checks(cfg.n_nodes, cfg.contour_nodes)?);
    out.extend(fflab_checks()?);
    out.extend(lagrange_checks()?);
    Ok(out)
}

/// Returns the report and the exit code (0 iff every check passes).
pub fn cmd_verify(cfg: &RunConfig) -> Result<(String, i32), CliError> {
    let checks = run_checks(cfg)?;
    let mut s = String::new();
    let _ = writeln!(s, "# command=verify");
    let _ = writeln!(s, "# n_nodes={}", cfg.n_nodes);
    let _ = writeln!(s, "# contour_nodes={}", cfg.contour_nodes);
    let _ = writeln!(s, "# perturb={}", fmt(cfg.perturb));
    for c in &checks {
        let _ = writeln!(s, "{} {}: {:.3e} (tol {:.0e})", if c.passed() { "PASS" } else { "FAIL" }, c.name, c.value, c.tolerance);
    }
    let passed = checks.iter().filter(|c| c.passed()).count();
    let _ = writeln!(s, "# checks={} passed={} failed={}", checks.len(), passed, checks.len() - passed);
    Ok((s, if passed == checks.len() { EXIT_OK } else { EXIT_VERIFY }))
}

/// Output text and exit code of one command.
pub fn execute(cmd: Command, cfg: &RunConfig) -> Result<(String, i32), CliError> {
    cfg.validate()?;
    let text = match cmd {
        Command::Dress => cmd_dress(cfg)?,
        Command::Saddle => cmd_saddle(cfg)?,
        Command::Exponents => cmd_exponents(cfg)?,
        Command::Amplitudes => cmd_amplitudes(cfg)?,
        Command::Asymptotics => cmd_asymptotics(cfg)?,
        Command::Harmonics => cmd_harmonics(cfg)?,
        Command::Verify => return cmd_verify(cfg),
    };
    Ok((text, EXIT_OK))
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    let run = || -> Result<i32, CliError> {
        init_threads()?;
        let mut cfg = match &cli.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::config(format!("cannot read {}: {e}", p.display())))?;
                RunConfig::parse(&text)?
            }
            None => RunConfig::default(),
        };
        cfg.apply_overrides(&cli);
        let (text, code) = execute(cli.command, &cfg)?;
        match &cfg.output_path {
            Some(p) => {
                std::fs::write(p, &text).map_err(|e| CliError::config(format!("cannot write {}: {e}", p.display())))?;
                if cli.command == Command::Verify {
                    print!("{text}");
                }
            }
            None => print!("{text}"),
        }
        Ok(code)
    };
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_validate() {
        let cfg = RunConfig::parse("# demo\nc = 2\nh=1.5\nratio=0.5\neval = 10, 5\neval=4,2\nmax_ell = 1\n").unwrap();
        assert_eq!((cfg.c, cfg.h, cfg.ratio_t_over_x, cfg.max_abs_ell), (2.0, 1.5, 0.5, 1));
        assert_eq!(cfg.eval_points, vec![(10.0, 5.0), (4.0, 2.0)]);
        cfg.validate().unwrap();

        let bad = RunConfig::parse("c=-1\n").unwrap();
        assert_eq!(bad.validate().unwrap_err().code, EXIT_CONFIG);
        assert_eq!(RunConfig::parse("nope=1\n").unwrap_err().code, EXIT_CONFIG);
        assert_eq!(RunConfig::parse("c=abc\n").unwrap_err().code, EXIT_CONFIG);
        let off = RunConfig::parse("ratio=0.5\neval=10,6\n").unwrap();
        assert_eq!(off.validate().unwrap_err().code, EXIT_CONFIG);
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt(-2.0), "-2.0000000000000000e0");
        assert_eq!(field("harmonic(1,-1)"), "\"harmonic(1,-1)\"");
    }

    #[test]
    fn saddle_errors_map_to_exit_three() {
        let e: CliError = Error::Saddle(crate::SaddleError::NoSaddle(1.0)).into();
        assert_eq!(e.code, EXIT_SADDLE);
        assert!(e.message.contains("NoSaddle"));
        let cfg = RunConfig { ratio_t_over_x: 0.0, ..RunConfig::default() };
        assert_eq!(execute(Command::Saddle, &cfg).unwrap_err().code, EXIT_SADDLE);
    }
}
