//! Mellin transforms `T^n_ν(s) = ∫ W̃_ν(y) Π (πy_i)^{2s_i} dy_i/y_i`:
//! the rank-one closed form, the Mellin–Barnes recursion over vertical
//! contours, and direct quadrature of `W̃` as an oracle for both.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::RwLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_levels, InnerRoute, QuadratureConfig};
use crate::report::EvalReport;
use crate::rootdata::{act_slice, weyl_enumerate, SpectralParameter};
use crate::series::{Precision, SeriesConfig, SeriesEngine};
use crate::specfun::{bessel_k, log_gamma};

/// Margin below the admissibility bound used for default abscissas.
pub const DEFAULT_TAU_MARGIN: f64 = 0.1;
/// Contour integrand at the cutoff must be this small relative to its peak.
pub const DECAY_TARGET: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct MellinPoint {
    pub s: Vec<Complex64>,
}

impl MellinPoint {
    pub fn new(s: Vec<Complex64>) -> Result<Self> {
        if s.is_empty() || s.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidInput("Mellin point needs finite entries".into()));
        }
        Ok(MellinPoint { s })
    }
}

#[derive(Debug, Clone)]
pub struct ContourConfig {
    /// Abscissas `τ_1..τ_{n−1}`; `None` selects the default placement.
    pub tau: Option<Vec<f64>>,
    pub im_cutoff: f64,
    pub step: f64,
    /// Enables the nested double contour at `n = 3`.
    pub allow_nested: bool,
}

impl Default for ContourConfig {
    fn default() -> Self {
        ContourConfig { tau: None, im_cutoff: 40.0, step: 0.05, allow_nested: false }
    }
}

impl ContourConfig {
    /// Settings for the nested `n = 3` contour.
    pub fn nested() -> Self {
        ContourConfig { tau: None, im_cutoff: 30.0, step: 0.1, allow_nested: true }
    }

    fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !(self.im_cutoff >= 10.0 * self.step) {
            return Err(Error::InvalidInput("contour needs step > 0 and im_cutoff >= 10 step".into()));
        }
        Ok(())
    }
}

/// `T¹_ν(s) = ½ Γ(s+ν) Γ(s−ν)`.
pub fn t_base(s1: Complex64, nu1: Complex64) -> Result<Complex64> {
    Ok(0.5 * (log_gamma(s1 + nu1)?.ln() + log_gamma(s1 - nu1)?.ln()).exp())
}

/// Strict upper bounds for `τ_j`: `min_{ε,σ} Re Σ_{i≤j} ε_i ν_{σ(i)}`.
///
/// The minimum over signs and injections is attained by taking the `j`
/// largest `|Re ν_k|` with negative signs.
pub fn tau_bounds(nu: &SpectralParameter) -> Vec<f64> {
    let mut a: Vec<f64> = nu.nu.iter().map(|z| z.re.abs()).collect();
    a.sort_by(|x, y| y.total_cmp(x));
    let mut acc = 0.0;
    (1..nu.n())
        .map(|j| {
            acc += a[j - 1];
            -acc
        })
        .collect()
}

pub fn default_tau(nu: &SpectralParameter) -> Vec<f64> {
    tau_bounds(nu).into_iter().map(|b| b - DEFAULT_TAU_MARGIN).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainReport {
    pub tau: Vec<f64>,
    pub tau_bounds: Vec<f64>,
    /// Thresholds `η_1..η_{n−1}` for `Re s_j`.
    pub eta: Vec<f64>,
    /// Threshold for `Re s_n` keeping `Γ(s_n + t_{n−1} ± ν_n)` and
    /// `Γ(s_n + t_{n−2})` off their poles along the contour.
    pub s_n_min: f64,
}

impl DomainReport {
    pub fn admissible(&self, s: &[Complex64]) -> bool {
        let n = self.eta.len() + 1;
        s.len() == n && self.eta.iter().zip(s).all(|(e, z)| z.re > *e) && s[n - 1].re > self.s_n_min
    }

    /// Whether only the extra `s_n` condition rejects `s`.
    pub fn s_n_binds(&self, s: &[Complex64]) -> bool {
        let n = self.eta.len() + 1;
        self.eta.iter().zip(s).all(|(e, z)| z.re > *e) && s[n - 1].re <= self.s_n_min
    }
}

pub fn contour_domain(nu: &SpectralParameter, tau: &[f64]) -> Result<DomainReport> {
    let n = nu.n();
    if n < 2 || tau.len() != n - 1 {
        return Err(Error::InvalidContour(format!("need n >= 2 and n-1 abscissas, got n = {n}, {} abscissas", tau.len())));
    }
    let bounds = tau_bounds(nu);
    for (j, (&t, &b)) in tau.iter().zip(&bounds).enumerate() {
        if !(t < b) {
            return Err(Error::InvalidContour(format!("tau_{} = {t} violates tau_{} < {b}", j + 1, j + 1)));
        }
    }
    let vn = nu.nu[n - 1].re;
    // τ_{−1} = +∞ drops its term, τ_0 = 0
    let tau_at = |j: isize| -> Option<f64> {
        match j {
            -1 => None,
            0 => Some(0.0),
            _ => Some(tau[j as usize - 1]),
        }
    };
    let eta = (1..n as isize)
        .map(|j| {
            let prev = tau_at(j - 1).unwrap();
            let mut e = (-prev + vn).max(prev - vn).max(-tau_at(j).unwrap());
            if let Some(t2) = tau_at(j - 2) {
                e = e.max(-t2);
            }
            e
        })
        .collect();
    let s_n_min = (vn.abs() - tau[n - 2]).max(-tau_at(n as isize - 2).unwrap());
    Ok(DomainReport { tau: tau.to_vec(), tau_bounds: bounds, eta, s_n_min })
}

fn ln_gamma_on_contour(z: Complex64) -> Result<Complex64> {
    log_gamma(z).map(|g| g.ln()).map_err(|e| match e {
        Error::Pole(m) => Error::PoleOnContour(m),
        e => e,
    })
}

/// Logarithm of the Gamma part of the Mellin–Barnes integrand (everything
/// except `T^{n−1}(−t)`), with `t_0 = 0`.
fn ln_mb_kernel(s: &[Complex64], t: &[Complex64], vn: Complex64) -> Result<Complex64> {
    let n = s.len();
    let tt = |i: usize| if i == 0 { Complex64::new(0.0, 0.0) } else { t[i - 1] };
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 1..=n {
        acc += ln_gamma_on_contour(s[i - 1] + tt(i - 1) + vn)? + ln_gamma_on_contour(s[i - 1] + tt(i - 1) - vn)?;
    }
    for i in 1..n {
        acc += ln_gamma_on_contour(s[i - 1] + tt(i))? + ln_gamma_on_contour(s[i] + tt(i - 1))?
            - ln_gamma_on_contour(s[i - 1] + s[i] + tt(i - 1) + tt(i))?;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy)]
struct ContourOutcome {
    value: Complex64,
    truncation_est: f64,
    discretization_est: f64,
    edge_ratio: f64,
    nodes: usize,
}

/// Trapezoid over the vertical lines, evaluated at `step` and `step/2`.
fn contour_sum(nu: &[Complex64], s: &[Complex64], tau: &[f64], cfg: &ContourConfig) -> Result<ContourOutcome> {
    let n = nu.len();
    if n == 1 {
        let v = t_base(s[0], nu[0]).map_err(|e| match e {
            Error::Pole(m) => Error::PoleOnContour(m),
            e => e,
        })?;
        return Ok(ContourOutcome { value: v, truncation_est: 0.0, discretization_est: 0.0, edge_ratio: 0.0, nodes: 0 });
    }
    let d = n - 1;
    let vn = nu[n - 1];
    let inner_nu = &nu[..d];
    let inner_tau = if d >= 2 {
        let sp = SpectralParameter::new(inner_nu.to_vec())?;
        // a smaller margin than the outer default keeps −τ_1 strictly
        // above the inner thresholds
        tau_bounds(&sp).into_iter().map(|b| b - 0.5 * DEFAULT_TAU_MARGIN).collect()
    } else {
        Vec::new()
    };
    let half = cfg.step * 0.5;
    let m = (cfg.im_cutoff / half).round() as i64;
    // fine grid index k ↦ v = k·step/2; even k form the coarse grid
    let mut keys: Vec<Vec<i64>> = Vec::new();
    let mut key = vec![-m; d];
    'grid: loop {
        keys.push(key.clone());
        let mut j = d;
        loop {
            if j == 0 {
                break 'grid;
            }
            j -= 1;
            if key[j] < m {
                key[j] += 1;
                break;
            }
            key[j] = -m;
        }
    }
    let inner_cfg = ContourConfig { tau: Some(inner_tau.clone()), ..cfg.clone() };
    let eval = |k: &Vec<i64>| -> Result<(Complex64, f64)> {
        let t: Vec<Complex64> = k.iter().zip(tau).map(|(&k, &tj)| Complex64::new(tj, k as f64 * half)).collect();
        let lk = ln_mb_kernel(s, &t, vn)?;
        let neg: Vec<Complex64> = t.iter().map(|z| -z).collect();
        let inner = if d == 1 {
            t_base(neg[0], inner_nu[0]).map_err(|e| match e {
                Error::Pole(m) => Error::PoleOnContour(m),
                e => e,
            })?
        } else {
            contour_sum(inner_nu, &neg, &inner_tau, &inner_cfg)?.value
        };
        let v = lk.exp() * inner;
        Ok((v, v.norm()))
    };
    let vals: Vec<(Complex64, f64)> = keys.par_iter().map(eval).collect::<Result<_>>()?;
    let norm = 0.5 / (2.0 * PI).powi(d as i32);
    let (mut fine, mut coarse) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    let (mut peak, mut edge) = (0.0f64, 0.0f64);
    for (k, (v, a)) in keys.iter().zip(&vals) {
        fine += v;
        if k.iter().all(|x| x % 2 == 0) {
            coarse += v;
        }
        peak = peak.max(*a);
        if k.iter().any(|x| x.abs() == m) {
            edge = edge.max(*a);
        }
    }
    let fine = fine * norm * half.powi(d as i32);
    let coarse = coarse * norm * cfg.step.powi(d as i32);
    // geometric decay past the cutoff: tail ≈ edge value / decay rate (≥ π/2 per unit)
    let edge_count = (2 * d) as f64 * (2.0 * cfg.im_cutoff).powi(d as i32 - 1);
    let truncation_est = norm * edge * edge_count * (2.0 / PI);
    Ok(ContourOutcome {
        value: fine,
        truncation_est,
        discretization_est: (fine - coarse).norm(),
        edge_ratio: if peak > 0.0 { edge / peak } else { 0.0 },
        nodes: keys.len(),
    })
}

/// `T^n_ν(s)` by the Mellin–Barnes recursion.
pub fn t_recursive(nu: &SpectralParameter, s: &MellinPoint, cfg: &ContourConfig) -> Result<EvalReport> {
    cfg.validate()?;
    let n = nu.n();
    if s.s.len() != n {
        return Err(Error::InvalidInput(format!("rank mismatch: ν has {n} entries, s has {}", s.s.len())));
    }
    if n >= 3 && !cfg.allow_nested {
        return Err(Error::Unsupported("nested contours at n >= 3 need allow_nested (ContourConfig::nested)".into()));
    }
    if n > 3 {
        return Err(Error::Unsupported("Mellin-Barnes recursion is implemented for n <= 3".into()));
    }
    let mut warnings = Vec::new();
    let tau = if n == 1 {
        Vec::new()
    } else {
        let tau = cfg.tau.clone().unwrap_or_else(|| default_tau(nu));
        let dom = contour_domain(nu, &tau)?;
        if !dom.admissible(&s.s) {
            let why = if dom.s_n_binds(&s.s) { " (the extra s_n condition binds)" } else { "" };
            return Err(Error::InvalidContour(format!(
                "s outside the admissible domain: eta = {:?}, Re s_n > {}{why}",
                dom.eta, dom.s_n_min
            )));
        }
        tau
    };
    let out = contour_sum(&nu.nu, &s.s, &tau, cfg)?;
    if out.edge_ratio > DECAY_TARGET {
        warnings.push(format!(
            "integrand at the cutoff is {:.2e} of its peak (target {DECAY_TARGET:e}); raise im_cutoff",
            out.edge_ratio
        ));
    }
    Ok(EvalReport {
        route: "mellin-recursive".into(),
        n,
        nu: nu.nu.iter().map(|&z| z.into()).collect(),
        s: Some(s.s.iter().map(|&z| z.into()).collect()),
        tau: Some(tau),
        value: out.value.into(),
        error_estimate: Some(out.truncation_est + out.discretization_est),
        nodes_used: Some(out.nodes),
        truncation_est: Some(out.truncation_est),
        discretization_est: Some(out.discretization_est),
        warnings,
        ..EvalReport::default()
    })
}

/// `max_w |Re(partial sums of wν)|` for each coordinate: the power with
/// which `W̃` may blow up as `y_i → 0`.
fn small_y_exponents(nu: &SpectralParameter) -> Result<Vec<f64>> {
    let n = nu.n();
    let mut out = vec![0.0f64; n];
    for w in weyl_enumerate(n)? {
        let mu = act_slice(&w, &nu.nu);
        let mut acc = 0.0;
        for i in 0..n {
            acc += mu[i].re;
            out[i] = out[i].max(acc.abs());
        }
    }
    Ok(out)
}

/// Direct quadrature of `∫ W̃_ν(y) Π (πy_i)^{2s_i} dy_i/y_i`.
pub fn mellin_direct(nu: &SpectralParameter, s: &MellinPoint, cfg: &QuadratureConfig) -> Result<EvalReport> {
    Ok(mellin_direct_many(nu, std::slice::from_ref(s), cfg)?.remove(0))
}

/// Several Mellin points against one shared grid of `W̃` values.
///
/// With `ln y = sinh σ` every variable decays double-exponentially at both
/// ends, including the power-law end `y → 0`.
pub fn mellin_direct_many(nu: &SpectralParameter, points: &[MellinPoint], cfg: &QuadratureConfig) -> Result<Vec<EvalReport>> {
    cfg.validate()?;
    let n = nu.n();
    if n > 2 {
        return Err(Error::Unsupported("direct Mellin quadrature covers n <= 2".into()));
    }
    let expo = small_y_exponents(nu)?;
    let mut min_gap = f64::INFINITY;
    for p in points {
        if p.s.len() != n {
            return Err(Error::InvalidInput(format!("rank mismatch: ν has {n} entries, s has {}", p.s.len())));
        }
        for i in 0..n {
            let gap = p.s[i].re - expo[i];
            if !(gap > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "Re s_{} = {} must exceed {} for integrability at y -> 0",
                    i + 1,
                    p.s[i].re,
                    expo[i]
                )));
            }
            min_gap = min_gap.min(gap);
        }
    }
    let lo = -(60.0 / (2.0 * min_gap)).asinh();
    // W̃ has decayed like e^{−2πy} far below any tolerance by ln y = 2.5
    let hi = 2.5f64.asinh();
    let windows = vec![(lo, hi); n];
    let hf = cfg.h0 / (1u64 << cfg.levels) as f64;

    let inner_precision = match cfg.inner_route {
        InnerRoute::Auto => Precision::DoubleDouble,
        _ => Precision::Auto,
    };
    let tol = (cfg.rel_tol * 0.1).max(1e-12);
    let engine = SeriesEngine::uncached(SeriesConfig { tol, precision: inner_precision, ..SeriesConfig::default() });
    let memo: RwLock<HashMap<Vec<i64>, Complex64>> = RwLock::new(HashMap::new());
    let w_tilde = |k: &[i64], y: &[f64]| -> Result<Complex64> {
        if let Some(v) = memo.read().unwrap().get(k) {
            return Ok(*v);
        }
        let v = if n == 1 && cfg.inner_route != InnerRoute::Series {
            2.0 * bessel_k(2.0 * nu.nu[0], Complex64::new(2.0 * PI * y[0], 0.0))?
        } else {
            match engine.w_tilde(&nu.nu, y) {
                Ok(r) => r.value,
                Err(Error::CatastrophicCancellation { .. } | Error::TailNotConverged { .. })
                    if cfg.inner_route == InnerRoute::Auto =>
                {
                    let qcfg = QuadratureConfig { rel_tol: tol, inner_route: InnerRoute::Recurse, ..cfg.clone() };
                    crate::quadrature::bessel_route(&nu.nu, y, &qcfg)?.value
                }
                Err(e) => return Err(Error::InnerEval(Box::new(e))),
            }
        };
        memo.write().unwrap().insert(k.to_vec(), v);
        Ok(v)
    };

    let mut out = Vec::with_capacity(points.len());
    for p in points {
        let s = &p.s;
        let bound = |sig: &[f64]| -> f64 {
            let mut b = 0.0;
            for i in 0..n {
                let v = sig[i].sinh();
                b += sig[i].cosh().ln() + 2.0 * s[i].re * v;
                b += if v < 0.0 { -2.0 * expo[i] * v } else { -2.0 * PI * v.exp() };
            }
            b
        };
        let f = |k: &[i64]| -> Result<Complex64> {
            let sig: Vec<f64> = k.iter().map(|&k| k as f64 * hf).collect();
            let y: Vec<f64> = sig.iter().map(|x| x.sinh().exp()).collect();
            let mut l = Complex64::new(0.0, 0.0);
            for i in 0..n {
                l += 2.0 * s[i] * (PI * y[i]).ln() + sig[i].cosh().ln();
            }
            Ok(l.exp() * w_tilde(k, &y)?)
        };
        let q = integrate_levels(&windows, cfg, &bound, &f)?;
        let inner_est = tol * q.abs_integral;
        out.push(EvalReport {
            route: "mellin-direct".into(),
            n,
            nu: nu.nu.iter().map(|&z| z.into()).collect(),
            s: Some(s.iter().map(|&z| z.into()).collect()),
            value: q.value.into(),
            error_estimate: Some(q.error_estimate() + inner_est),
            nodes_used: Some(q.nodes_used),
            levels: Some(q.levels),
            truncation_est: Some(q.truncation_est),
            discretization_est: Some(q.discretization_est),
            ..EvalReport::default()
        });
    }
    Ok(out)
}
