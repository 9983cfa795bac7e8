//! Recursive integral representations of `W̃`: the exponential-kernel
//! formula (`2n−1` dimensions) and the K-Bessel formula (`n−1` dimensions).
//!
//! Every half-line variable is integrated in its logarithm, where the
//! kernels decay double-exponentially, by a tensor trapezoid rule whose
//! step is halved level by level. Inner rank-`(n−1)` values depend on the
//! node only through integer combinations of the lattice coordinates and
//! are memoized on those keys, so refinement reuses them.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::RwLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::EvalReport;
use crate::rootdata::{RadialPoint, SpectralParameter};
use crate::series::{Precision, SeriesConfig, SeriesEngine};
use crate::specfun::{bessel_k, log_gamma};

/// Nodes whose log-magnitude bound falls this far below the grid maximum are skipped.
const PRUNE_LOG: f64 = 45.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerRoute {
    /// Rank-`(n−1)` series for every inner value.
    Series,
    /// Quadrature all the way down (rank-1 inner values are `2K`).
    Recurse,
    /// Closed form at rank 1; at rank 2 the series in double-double where
    /// it converges, the K-Bessel quadrature where it cancels too much.
    Auto,
}

#[derive(Debug, Clone)]
pub struct QuadratureConfig {
    /// Maximum number of step halvings after the initial grid.
    pub levels: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Half-width of the window in every log variable.
    pub u_cutoff: f64,
    /// Initial step in the log variables.
    pub h0: f64,
    pub inner_route: InnerRoute,
    /// Enables the 5-dimensional exponential-kernel route at `n = 3`.
    pub allow_high_dim: bool,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            levels: 6,
            abs_tol: 1e-300,
            rel_tol: 1e-8,
            u_cutoff: 12.0,
            h0: 0.5,
            inner_route: InnerRoute::Auto,
            allow_high_dim: false,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels < 2 {
            return Err(Error::InvalidInput("levels must be >= 2".into()));
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        if !(self.u_cutoff > 0.0 && self.h0 > 0.0) {
            return Err(Error::InvalidInput("u_cutoff and h0 must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOutcome {
    pub value: Complex64,
    /// `|I_L − I_{L−1}|` at the accepted level.
    pub discretization_est: f64,
    /// Contribution of the nodes on the window boundary.
    pub truncation_est: f64,
    /// Propagated relative error of the inner values times `∫|f|`.
    pub inner_est: f64,
    /// Trapezoid sum of `|f|`.
    pub abs_integral: f64,
    pub nodes_used: usize,
    pub levels: usize,
}

impl QuadOutcome {
    pub fn error_estimate(&self) -> f64 {
        self.discretization_est + self.truncation_est + self.inner_est
    }
}

/// Tensor trapezoid rule on `window`, refined by step halving.
///
/// `bound(v)` is a cheap upper estimate of `ln|f(v)|` used for pruning;
/// `f(key)` receives the node as integer multiples of the finest step
/// `h0 / 2^levels`.
pub(crate) fn integrate_levels(
    windows: &[(f64, f64)],
    cfg: &QuadratureConfig,
    bound: &(dyn Fn(&[f64]) -> f64 + Sync),
    f: &(dyn Fn(&[i64]) -> Result<Complex64> + Sync),
) -> Result<QuadOutcome> {
    let dim = windows.len();
    let hf = cfg.h0 / (1u64 << cfg.levels) as f64;
    let mut prev: Option<Complex64> = None;
    let mut total_nodes = 0;
    for level in 0..=cfg.levels {
        let stride = 1i64 << (cfg.levels - level);
        let h = hf * stride as f64;
        let ranges: Vec<(i64, i64)> = windows
            .iter()
            .map(|&(lo, hi)| ((lo / h).ceil() as i64 * stride, (hi / h).floor() as i64 * stride))
            .collect();
        let mut nodes: Vec<(Vec<i64>, f64)> = Vec::new();
        let mut key: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        if ranges.iter().any(|r| r.0 > r.1) {
            return Err(Error::InvalidInput("empty integration window".into()));
        }
        let mut bmax = f64::NEG_INFINITY;
        'grid: loop {
            let v: Vec<f64> = key.iter().map(|&k| k as f64 * hf).collect();
            let b = bound(&v);
            if b.is_finite() {
                bmax = bmax.max(b);
                nodes.push((key.clone(), b));
            }
            let mut d = dim;
            loop {
                if d == 0 {
                    break 'grid;
                }
                d -= 1;
                if key[d] + stride <= ranges[d].1 {
                    key[d] += stride;
                    break;
                }
                key[d] = ranges[d].0;
            }
        }
        nodes.retain(|(_, b)| *b >= bmax - PRUNE_LOG);
        let values: Vec<Complex64> = nodes.par_iter().map(|(k, _)| f(k)).collect::<Result<_>>()?;
        let vol = h.powi(dim as i32);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut edge = 0.0;
        let mut abs = 0.0;
        for ((k, _), v) in nodes.iter().zip(&values) {
            sum += v;
            abs += v.norm();
            if k.iter().zip(&ranges).any(|(k, r)| *k == r.0 || *k == r.1) {
                edge += v.norm();
            }
        }
        let value = sum * vol;
        total_nodes += nodes.len();
        if let Some(p) = prev {
            let diff = (value - p).norm();
            if level >= 2 && diff <= cfg.abs_tol.max(cfg.rel_tol * value.norm()) {
                return Ok(QuadOutcome {
                    value,
                    discretization_est: diff,
                    truncation_est: edge * vol,
                    inner_est: 0.0,
                    abs_integral: abs * vol,
                    nodes_used: total_nodes,
                    levels: level,
                });
            }
            if level == cfg.levels {
                return Err(Error::NonConvergence(format!(
                    "trapezoid refinement stalled: last change {diff:.3e} vs |I| = {:.3e} after {level} levels",
                    value.norm()
                )));
            }
        }
        prev = Some(value);
    }
    unreachable!("loop returns at the last level")
}

/// Upper estimate of `ln|K_s(z)|` for real `z > 0`, `a = |Re s|`.
fn ln_k_bound(z: f64, a: f64) -> f64 {
    -z + (a + 0.5) * (1.0 + 1.0 / z).ln()
}

/// Inner rank-`(n−1)` values with lattice-key memoization.
struct Inner<'a> {
    nu: Vec<Complex64>,
    cfg: &'a QuadratureConfig,
    engine: SeriesEngine,
    memo: RwLock<HashMap<Vec<i64>, Complex64>>,
    /// Relative accuracy promised by every inner value.
    rel_acc: f64,
}

impl<'a> Inner<'a> {
    fn new(nu: &[Complex64], cfg: &'a QuadratureConfig) -> Self {
        let precision = match cfg.inner_route {
            InnerRoute::Auto => Precision::DoubleDouble,
            _ => Precision::Auto,
        };
        let tol = (cfg.rel_tol * 0.1).max(1e-12);
        let scfg = SeriesConfig { tol, precision, ..SeriesConfig::default() };
        let closed_form = nu.len() == 1 && cfg.inner_route != InnerRoute::Series;
        let rel_acc = if closed_form { 1e-13 } else { tol.max(1e-13) };
        Inner { nu: nu.to_vec(), cfg, engine: SeriesEngine::uncached(scfg), memo: RwLock::new(HashMap::new()), rel_acc }
    }

    fn get(&self, key: Vec<i64>, x: &[f64]) -> Result<Complex64> {
        if let Some(v) = self.memo.read().unwrap().get(&key) {
            return Ok(*v);
        }
        let v = self.eval(x).map_err(|e| Error::InnerEval(Box::new(e)))?;
        self.memo.write().unwrap().insert(key, v);
        Ok(v)
    }

    fn eval(&self, x: &[f64]) -> Result<Complex64> {
        let m = self.nu.len();
        let series = || self.engine.w_tilde(&self.nu, x).map(|r| r.value);
        match (m, self.cfg.inner_route) {
            (1, InnerRoute::Series) => series(),
            (1, _) => Ok(2.0 * bessel_k(2.0 * self.nu[0], Complex64::new(2.0 * PI * x[0], 0.0))?),
            (_, InnerRoute::Series) => series(),
            (_, InnerRoute::Recurse) => self.bessel(x),
            (_, InnerRoute::Auto) => match series() {
                Ok(v) => Ok(v),
                Err(Error::CatastrophicCancellation { .. } | Error::TailNotConverged { .. }) => self.bessel(x),
                Err(e) => Err(e),
            },
        }
    }

    fn bessel(&self, x: &[f64]) -> Result<Complex64> {
        let cfg = QuadratureConfig {
            rel_tol: self.rel_acc,
            inner_route: InnerRoute::Recurse,
            ..self.cfg.clone()
        };
        Ok(bessel_route(&self.nu, x, &cfg)?.value)
    }
}

fn check(nu: &SpectralParameter, y: &RadialPoint, cfg: &QuadratureConfig) -> Result<usize> {
    cfg.validate()?;
    if nu.n() != y.n() {
        return Err(Error::InvalidInput(format!("rank mismatch: ν has {} entries, y has {}", nu.n(), y.n())));
    }
    Ok(nu.n())
}

fn base_case(nu: &[Complex64], y: &[f64]) -> Result<QuadOutcome> {
    Ok(QuadOutcome {
        value: 2.0 * bessel_k(2.0 * nu[0], Complex64::new(2.0 * PI * y[0], 0.0))?,
        discretization_est: 0.0,
        truncation_est: 0.0,
        inner_est: 0.0,
        abs_integral: 0.0,
        nodes_used: 0,
        levels: 0,
    })
}

fn report(route: &str, nu: &[Complex64], y: &[f64], q: &QuadOutcome) -> EvalReport {
    EvalReport {
        route: route.into(),
        n: nu.len(),
        nu: nu.iter().map(|&z| z.into()).collect(),
        y: Some(y.to_vec()),
        value: q.value.into(),
        error_estimate: Some(q.error_estimate()),
        nodes_used: Some(q.nodes_used),
        levels: Some(q.levels),
        truncation_est: Some(q.truncation_est),
        discretization_est: Some(q.discretization_est),
        ..EvalReport::default()
    }
}

/// `W̃ⁿ(y) = 2ⁿ ∫ Π_i K_{2ν_n}(2πy_i √((1+u_{i−1})(1+1/u_i))) · W̃^{n−1}_{ν̃}(y_2√(u_1/u_2), …, y_n√u_{n−1}) du/u`,
/// with `u_0 = 1/u_n = 0`.
pub fn w_tilde_integral_bessel(nu: &SpectralParameter, y: &RadialPoint, cfg: &QuadratureConfig) -> Result<EvalReport> {
    let n = check(nu, y, cfg)?;
    if n > 3 {
        return Err(Error::Unsupported("quadrature routes cover n <= 3; use the series route".into()));
    }
    let q = bessel_route(&nu.nu, &y.y, cfg)?;
    Ok(report("quad-bessel", &nu.nu, &y.y, &q))
}

pub(crate) fn bessel_route(nu: &[Complex64], y: &[f64], cfg: &QuadratureConfig) -> Result<QuadOutcome> {
    let n = nu.len();
    if n == 1 {
        return base_case(nu, y);
    }
    let d = n - 1;
    let order = 2.0 * nu[n - 1];
    let a = order.re.abs();
    let a_in = (2.0 * nu[0].re).abs();
    let hf = cfg.h0 / (1u64 << cfg.levels) as f64;
    let inner = Inner::new(&nu[..d], cfg);
    // Bessel argument factor for y_i: (1+u_{i−1})(1+1/u_i)
    let arg = |i: usize, v: &[f64]| -> f64 {
        let lo = if i == 0 { 1.0 } else { 1.0 + v[i - 1].exp() };
        let hi = if i == d { 1.0 } else { 1.0 + (-v[i]).exp() };
        2.0 * PI * y[i] * (lo * hi).sqrt()
    };
    let bound = |v: &[f64]| -> f64 {
        let mut b: f64 = (0..n).map(|i| ln_k_bound(arg(i, v), a)).sum();
        if d == 1 {
            b += ln_k_bound(2.0 * PI * y[1] * (0.5 * v[0]).exp(), a_in);
        }
        b
    };
    let f = |k: &[i64]| -> Result<Complex64> {
        let v: Vec<f64> = k.iter().map(|&k| k as f64 * hf).collect();
        let mut prod = Complex64::new((1u64 << n) as f64, 0.0);
        for i in 0..n {
            prod *= bessel_k(order, Complex64::new(arg(i, &v), 0.0))?;
        }
        // inner arguments y_{j+1}√(u_j/u_{j+1}) and y_n√u_{n−1}; keys are
        // the corresponding lattice differences
        let mut key = Vec::with_capacity(d);
        let mut x = Vec::with_capacity(d);
        for j in 0..d {
            let kk = if j + 1 < d { k[j] - k[j + 1] } else { k[j] };
            key.push(kk);
            x.push(y[j + 1] * (0.5 * kk as f64 * hf).exp());
        }
        Ok(prod * inner.get(key, &x)?)
    };
    // badly separated y_i push the mass out to |ln u| ~ 2|ln πy_i|
    let spread = y.iter().map(|&v| (PI * v).ln().abs()).fold(0.0, f64::max);
    let w = cfg.u_cutoff + 2.0 * spread;
    let windows = vec![(-w, w); d];
    let mut q = integrate_levels(&windows, cfg, &bound, &f)?;
    q.inner_est = inner.rel_acc * q.abs_integral;
    Ok(q)
}

/// The exponential-kernel representation with `2n − 1` log variables
/// `(t_1..t_n, u_1..u_{n−1})`.
pub fn w_tilde_integral_exp(nu: &SpectralParameter, y: &RadialPoint, cfg: &QuadratureConfig) -> Result<EvalReport> {
    let n = check(nu, y, cfg)?;
    if n == 1 {
        return Ok(report("quad-exp", &nu.nu, &y.y, &base_case(&nu.nu, &y.y)?));
    }
    if n > 3 || (n == 3 && !cfg.allow_high_dim) {
        return Err(Error::Unsupported(format!(
            "exp-route at n = {n} needs {} dimensions; enable allow_high_dim (n = 3 only)",
            2 * n - 1
        )));
    }
    let q = exp_route(&nu.nu, &y.y, cfg)?;
    Ok(report("quad-exp", &nu.nu, &y.y, &q))
}

fn exp_route(nu: &[Complex64], y: &[f64], cfg: &QuadratureConfig) -> Result<QuadOutcome> {
    let n = nu.len();
    let d = n - 1;
    let vn = nu[n - 1];
    let hf = cfg.h0 / (1u64 << cfg.levels) as f64;
    let inner = Inner::new(&nu[..d], cfg);
    let ay: Vec<f64> = y.iter().map(|&v| (PI * v).powi(2)).collect();
    let ln_py: f64 = y.iter().map(|&v| (PI * v).ln()).sum();
    let a_in = (2.0 * nu[0].re).abs();

    // v = (t_1..t_n, u_1..u_{n−1}) in log variables; returns the real
    // exponent and the complex power exponent
    let exponent = |v: &[f64]| -> (f64, Complex64) {
        let (t, u) = v.split_at(n);
        let mut e = 0.0;
        for i in 0..n {
            e -= ay[i] * t[i].exp() + (-t[i]).exp();
        }
        for i in 0..d {
            e -= ay[i] * (t[i] - t[i + 1] + u[i]).exp() + (-u[i]).exp();
        }
        let mut p = 2.0 * vn * (ln_py + t[0]);
        for i in 0..d {
            p += vn * (t[i + 1] + u[i]);
        }
        (e, p)
    };
    // inner arguments: y_j√(t_j u_j/(t_{j+1} u_{j−1})) for 2 ≤ j < n, y_n√(t_n/u_{n−1})
    let inner_log = |k: &[i64]| -> Vec<i64> {
        let (t, u) = k.split_at(n);
        (1..n)
            .map(|j| {
                if j + 1 < n {
                    t[j] + u[j] - t[j + 1] - u[j - 1]
                } else {
                    t[j] - u[j - 1]
                }
            })
            .collect()
    };
    let bound = |v: &[f64]| -> f64 {
        let (e, p) = exponent(v);
        let mut b = e + p.re;
        if d == 1 {
            b += ln_k_bound(2.0 * PI * y[1] * (0.5 * (v[1] - v[2])).exp(), a_in);
        }
        b
    };
    let f = |k: &[i64]| -> Result<Complex64> {
        let v: Vec<f64> = k.iter().map(|&k| k as f64 * hf).collect();
        let (e, p) = exponent(&v);
        let key = inner_log(k);
        let x: Vec<f64> = key.iter().enumerate().map(|(j, &kk)| y[j + 1] * (0.5 * kk as f64 * hf).exp()).collect();
        Ok((Complex64::new(e, 0.0) + p).exp() * inner.get(key, &x)?)
    };

    // per-axis windows from the separable factors
    let mut windows = Vec::with_capacity(2 * n - 1);
    for i in 0..n {
        let g = |s: f64| -ay[i] * s.exp() - (-s).exp() + 2.0 * vn.re.abs() * s.abs();
        windows.push(axis_window(&g, cfg.u_cutoff));
    }
    for _ in 0..d {
        let g = |s: f64| -(-s).exp() + vn.re.abs() * s.abs();
        let (lo, _) = axis_window(&g, cfg.u_cutoff);
        windows.push((lo, cfg.u_cutoff));
    }
    let mut q = integrate_levels(&windows, cfg, &bound, &f)?;
    q.inner_est = inner.rel_acc * q.abs_integral;
    Ok(q)
}

/// Sub-interval of `[−cutoff, cutoff]` where `g` is within `PRUNE_LOG` of its maximum.
fn axis_window(g: &dyn Fn(f64) -> f64, cutoff: f64) -> (f64, f64) {
    let steps = (2.0 * cutoff / 0.05).ceil() as usize;
    let pts: Vec<(f64, f64)> = (0..=steps).map(|k| {
        let s = -cutoff + k as f64 * 0.05;
        (s, g(s))
    }).collect();
    let gmax = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let keep: Vec<f64> = pts.iter().filter(|p| p.1 >= gmax - PRUNE_LOG).map(|p| p.0).collect();
    let lo = (keep[0] - 0.5).max(-cutoff);
    let hi = (keep[keep.len() - 1] + 0.5).min(cutoff);
    (lo, hi)
}

/// `|∫₀^∞ (1+u)^{−(x+y)} u^y du/u − Γ(x)Γ(y)/Γ(x+y)| / |Γ(x)Γ(y)/Γ(x+y)|`.
///
/// The integrand decays only exponentially in `ln u`, so a further
/// `ln u = sinh s` map is applied before the level-refined trapezoid.
pub fn beta_integral_check(x: Complex64, y: Complex64, cfg: &QuadratureConfig) -> Result<f64> {
    cfg.validate()?;
    if !(x.re > 0.0 && y.re > 0.0) {
        return Err(Error::InvalidInput("beta integral needs Re x > 0 and Re y > 0".into()));
    }
    let exact = (log_gamma(x)?.ln() + log_gamma(y)?.ln() - log_gamma(x + y)?.ln()).exp();
    // truncation at |ln u| = sinh(S) costs about exp(−min(Re x, Re y)·sinh S)
    let reach = 60.0 / x.re.min(y.re);
    let s_max = reach.asinh();
    let hf = cfg.h0 / (1u64 << cfg.levels) as f64;
    let lnf = |s: f64| -> Complex64 {
        let w = s.sinh();
        // ln(1 + e^w) without overflow
        let l1p = if w > 0.0 { w + (-w).exp().ln_1p() } else { w.exp().ln_1p() };
        y * w - (x + y) * l1p + s.cosh().ln()
    };
    let bound = |v: &[f64]| lnf(v[0]).re;
    let f = |k: &[i64]| Ok(lnf(k[0] as f64 * hf).exp());
    let q = integrate_levels(&[(-s_max, s_max)], cfg, &bound, &f)?;
    Ok((q.value - exact).norm() / exact.norm())
}
