//! Fundamental series `M̃`, the prefactor `Γ_n`, the Weyl-symmetrized
//! `W̃ = Σ_w Γ_n(wν) M̃_{wν}`, and the Gamma-product factors around them
//! (Harish-Chandra `c`, Jacquet `γ`, the W-from-J normalization).
//!
//! The Weyl sum cancels catastrophically away from small `y` (40 digits
//! at `n = 3`, `y = (1,1,1)`), so each `M̃_{wν}` is accumulated in
//! double-double, escalating to 256-bit arithmetic when the rounding
//! estimate says double-double cannot deliver the requested tolerance.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, RwLock};

use num_complex::{Complex, Complex64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::Q_GUARD;
use crate::error::{Error, Result};
use crate::report::EvalReport;
use crate::rootdata::{act_slice, rho_exponent, weyl_enumerate, RadialPoint, SpectralParameter, WeylElement};
use crate::specfun::log_gamma;
use crate::wide::{c_abs, c_exp, c_from, c_gamma, c_scale, c_to_f64, Dd, Mp, WideReal};

/// Cancellation ratio above which a warning is attached to the result.
pub const CANCELLATION_WARN: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Precision {
    /// Double-double first, 256-bit if the rounding estimate demands it.
    Auto,
    DoubleDouble,
    Wide,
}

#[derive(Debug, Clone)]
pub struct SeriesConfig {
    /// Target relative accuracy of the returned value.
    pub tol: f64,
    /// Largest total degree `|m|` summed before giving up.
    pub max_order: usize,
    pub precision: Precision,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig { tol: 1e-10, max_order: 400, precision: Precision::Auto }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: Complex64,
    pub truncation_order: usize,
    pub tail_bound: f64,
    pub terms_summed: usize,
}

// ---------------------------------------------------------------------------
// Gamma products in log space

/// Product of Gamma factors and elementary powers, kept as `ln|·|` and phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaFactor {
    pub log_modulus: f64,
    pub phase: f64,
}

impl GammaFactor {
    pub const ONE: GammaFactor = GammaFactor { log_modulus: 0.0, phase: 0.0 };

    fn mul_ln(self, l: Complex64) -> Self {
        GammaFactor { log_modulus: self.log_modulus + l.re, phase: self.phase + l.im }
    }

    fn mul_gamma(self, z: Complex64, label: &str) -> Result<Self> {
        let g = log_gamma(z).map_err(|e| pole_named(e, label, z))?;
        Ok(self.mul_ln(g.ln()))
    }

    fn div_gamma(self, z: Complex64, label: &str) -> Result<Self> {
        let g = log_gamma(z).map_err(|e| pole_named(e, label, z))?;
        Ok(self.mul_ln(-g.ln()))
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::from_polar(self.log_modulus.exp(), self.phase)
    }

    pub fn ln(self) -> Complex64 {
        Complex64::new(self.log_modulus, self.phase)
    }

    pub fn ratio(self, other: GammaFactor) -> GammaFactor {
        self.mul_ln(-other.ln())
    }
}

fn pole_named(e: Error, label: &str, z: Complex64) -> Error {
    match e {
        Error::Pole(_) => Error::Pole(format!("factor {label} at argument {z}")),
        other => other,
    }
}

/// The `n²` Gamma arguments of `Γ_n(ν)`, labelled.
fn gamma_n_args(nu: &[Complex64]) -> Vec<(String, Complex64)> {
    let n = nu.len();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in i + 1..n {
            out.push((format!("Γ(-ν{}-ν{})", i + 1, j + 1), -nu[i] - nu[j]));
            out.push((format!("Γ(-ν{}+ν{})", i + 1, j + 1), -nu[i] + nu[j]));
        }
        out.push((format!("Γ(-2ν{})", i + 1), -2.0 * nu[i]));
    }
    out
}

/// `Γ_n(ν) = Π_{i<j} Γ(−ν_i−ν_j)Γ(−ν_i+ν_j) · Π_i Γ(−2ν_i)`.
pub fn gamma_n(nu: &SpectralParameter) -> Result<GammaFactor> {
    gamma_n_of(&nu.nu)
}

pub(crate) fn gamma_n_of(nu: &[Complex64]) -> Result<GammaFactor> {
    gamma_n_args(nu).iter().try_fold(GammaFactor::ONE, |g, (label, z)| g.mul_gamma(*z, label))
}

fn ln_hc_constant(n: usize) -> f64 {
    let nf = n as f64;
    0.5 * nf * 2f64.ln() + nf * (nf + 1.0) / 4.0 * ((4.0 * nf - 2.0) * PI).ln()
}

/// Harish-Chandra c-function, including the constant `2^{n/2}{(4n−2)π}^{n(n+1)/4}`.
pub fn hc_c_function(nu: &SpectralParameter) -> Result<GammaFactor> {
    let (n, nu) = (nu.n(), &nu.nu);
    let mut g = GammaFactor::ONE.mul_ln(Complex64::new(ln_hc_constant(n), 0.0));
    for i in 0..n {
        for j in i + 1..n {
            let (d, s) = (nu[i] - nu[j], nu[i] + nu[j]);
            g = g.mul_gamma(d, "Γ(ν_i-ν_j)")?.mul_gamma(s, "Γ(ν_i+ν_j)")?;
            g = g.div_gamma(d + 0.5, "Γ(ν_i-ν_j+1/2)")?.div_gamma(s + 0.5, "Γ(ν_i+ν_j+1/2)")?;
        }
        g = g.mul_gamma(2.0 * nu[i], "Γ(2ν_i)")?.div_gamma(2.0 * nu[i] + 0.5, "Γ(2ν_i+1/2)")?;
    }
    Ok(g)
}

/// Normalization turning the Jacquet integral into the Weyl-symmetric `W`.
pub fn w_from_j_prefactor(nu: &SpectralParameter) -> Result<GammaFactor> {
    let (n, nu) = (nu.n(), &nu.nu);
    let mut g = GammaFactor::ONE.mul_ln(Complex64::new(-ln_hc_constant(n), 0.0));
    let mut partial = Complex64::new(0.0, 0.0);
    for &v in nu {
        partial += v;
        g = g.mul_ln(-2.0 * partial * PI.ln());
    }
    for i in 0..n {
        for j in i + 1..n {
            g = g.mul_gamma(nu[i] - nu[j] + 0.5, "Γ(ν_i-ν_j+1/2)")?;
            g = g.mul_gamma(nu[i] + nu[j] + 0.5, "Γ(ν_i+ν_j+1/2)")?;
        }
        g = g.mul_gamma(2.0 * nu[i] + 0.5, "Γ(2ν_i+1/2)")?;
    }
    Ok(g)
}

/// Character scales `η_i = 1` (`i < n`), `η_n = 1/√2`.
pub fn default_eta(n: usize) -> Vec<f64> {
    let mut e = vec![1.0; n];
    e[n - 1] = std::f64::consts::FRAC_1_SQRT_2;
    e
}

fn simple_gamma(i: usize, nu: &[Complex64], eta: &[f64]) -> Result<GammaFactor> {
    let n = nu.len();
    if i < n {
        // (πη_i)^{2d} Γ(−d+½)/Γ(d+½) with d = ν_i − ν_{i+1}; this is the
        // ratio of W-from-J prefactors across w_i, as the cocycle requires
        let d = nu[i - 1] - nu[i];
        GammaFactor::ONE
            .mul_ln(2.0 * d * (PI * eta[i - 1]).ln())
            .mul_gamma(-d + 0.5, "Γ(-(ν_i-ν_{i+1})+1/2)")?
            .div_gamma(d + 0.5, "Γ(ν_i-ν_{i+1}+1/2)")
    } else {
        let v = nu[n - 1];
        GammaFactor::ONE
            .mul_ln(4.0 * v * (2f64.sqrt() * PI * eta[n - 1]).ln())
            .mul_gamma(-2.0 * v + 0.5, "Γ(-2ν_n+1/2)")?
            .div_gamma(2.0 * v + 0.5, "Γ(2ν_n+1/2)")
    }
}

/// `γ(w, ν, η)` for `w = w_{i_1} ⋯ w_{i_k}` given as a reduced word.
///
/// Built with `γ(w_i w, ν) = γ(w, ν) γ(w_i, wν)`, i.e. letters are consumed
/// from the right.
pub fn jacquet_gamma(word: &[usize], nu: &SpectralParameter, eta: &[f64]) -> Result<GammaFactor> {
    let n = nu.n();
    if eta.len() != n || eta.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidInput("η must have n positive entries".into()));
    }
    let mut cur = nu.nu.clone();
    let mut g = GammaFactor::ONE;
    for &i in word.iter().rev() {
        let w = WeylElement::generator(n, i)?;
        g = g.mul_ln(simple_gamma(i, &cur, eta)?.ln());
        cur = act_slice(&w, &cur);
    }
    Ok(g)
}

// ---------------------------------------------------------------------------
// Graded shells of d_m = c_m x^m

fn binom(a: usize, b: usize) -> usize {
    if b > a {
        return 0;
    }
    let mut r: u128 = 1;
    for j in 0..b {
        r = r * (a - j) as u128 / (j + 1) as u128;
    }
    r as usize
}

/// Position of `m` among compositions of `k = |m|` in lexicographic order.
fn shell_rank(m: &[usize], k: usize) -> usize {
    let n = m.len();
    let mut r = 0;
    let mut rem = k;
    for (i, &mi) in m.iter().enumerate().take(n - 1) {
        let p = n - 1 - i;
        r += binom(rem + p, p) - binom(rem - mi + p, p);
        rem -= mi;
    }
    r
}

fn compositions(k: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(k: usize, n: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 1 {
            prefix.push(k);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 0..=k {
            prefix.push(first);
            rec(k - first, n - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::with_capacity(binom(k + n - 1, n - 1));
    rec(k, n, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Incremental evaluation of `Σ_{|m| ≤ K} c_m(μ) Π x_i^{m_i}` one shell at a time.
struct Shells<T: WideReal> {
    n: usize,
    xw: Vec<T>,
    lin: Vec<Complex<T>>,
    order: usize,
    shell: Vec<Complex<T>>,
    sum: Complex<T>,
    shell_abs: Vec<f64>,
    abs_total: f64,
    terms: usize,
}

impl<T: WideReal> Shells<T> {
    fn new(mu: &[Complex64], y: &[f64]) -> Self {
        let n = mu.len();
        let xw = (0..n)
            .map(|i| {
                let p = T::pi() * T::from_f64(y[i]);
                let x = p.clone() * p;
                if i == n - 1 {
                    x * T::from_f64(0.5)
                } else {
                    x
                }
            })
            .collect();
        // differences are formed after widening: the Weyl sum amplifies
        // any rounding of the inputs by the cancellation ratio
        let w: Vec<Complex<T>> = mu.iter().map(|&z| c_from(z)).collect();
        let lin = (0..n).map(|i| if i + 1 < n { w[i].clone() - w[i + 1].clone() } else { w[i].clone() }).collect();
        let one = Complex::new(T::one(), T::zero());
        Shells {
            n,
            xw,
            lin,
            order: 0,
            shell: vec![one.clone()],
            sum: one,
            shell_abs: vec![1.0],
            abs_total: 1.0,
            terms: 1,
        }
    }

    fn q(&self, m: &[usize]) -> Complex<T> {
        let n = self.n;
        let mut quad = 0.5 * (m[n - 1] * m[n - 1]) as f64;
        for i in 0..n - 1 {
            quad += (m[i] * m[i]) as f64 - (m[i] * m[i + 1]) as f64;
        }
        let mut re = T::from_f64(quad);
        let mut im = T::zero();
        for i in 0..n {
            if m[i] == 0 {
                continue;
            }
            let mi = T::from_f64(m[i] as f64);
            re = re + self.lin[i].re.clone() * mi.clone();
            im = im + self.lin[i].im.clone() * mi;
        }
        Complex::new(re, im)
    }

    fn extend(&mut self) -> Result<()> {
        let k = self.order + 1;
        let zero = Complex::new(T::zero(), T::zero());
        let mut next = Vec::with_capacity(binom(k + self.n - 1, self.n - 1));
        let mut sabs = 0.0;
        for mut m in compositions(k, self.n) {
            let mut rhs = zero.clone();
            for i in 0..self.n {
                if m[i] == 0 {
                    continue;
                }
                m[i] -= 1;
                let r = shell_rank(&m, k - 1);
                m[i] += 1;
                rhs = rhs + c_scale(&self.shell[r], &self.xw[i]);
            }
            let q = self.q(&m);
            let qa = c_abs(&q);
            if qa < Q_GUARD {
                return Err(Error::SingularCoefficient { m, q_abs: qa });
            }
            let d = rhs / q;
            sabs += c_abs(&d);
            self.sum = self.sum.clone() + d.clone();
            next.push(d);
        }
        self.terms += next.len();
        self.shell = next;
        self.shell_abs.push(sabs);
        self.abs_total += sabs;
        self.order = k;
        Ok(())
    }

    /// Geometric bound on the unsummed shells, from the last two shell ratios.
    ///
    /// Factorial decay of the coefficients makes the shell ratios eventually
    /// decreasing, so the larger of the last two ratios dominates the rest.
    fn tail(&self) -> f64 {
        let k = self.order;
        let s = &self.shell_abs;
        if k < 3 {
            return f64::INFINITY;
        }
        if s[k] == 0.0 {
            return 0.0;
        }
        let q = (s[k] / s[k - 1]).max(s[k - 1] / s[k - 2]);
        if q < 1.0 {
            s[k] * q / (1.0 - q)
        } else {
            f64::INFINITY
        }
    }
}

/// `Π (π y_i)^{2(μ_1+⋯+μ_i)}` with the real logarithm of `π y_i`.
fn prefactor<T: WideReal>(mu: &[Complex64], y: &[f64]) -> Complex<T> {
    let mut partial = Complex::new(T::zero(), T::zero());
    let mut expo = Complex::new(T::zero(), T::zero());
    for (i, &m) in mu.iter().enumerate() {
        partial = partial + c_from::<T>(m);
        let l = (T::pi() * T::from_f64(y[i])).ln() * T::from_f64(2.0);
        expo = expo + c_scale(&partial, &l);
    }
    c_exp(&expo)
}

fn gamma_n_wide<T: WideReal>(mu: &[Complex64]) -> Result<Complex<T>> {
    gamma_n_of(mu)?; // pole screening with named factors
    let w: Vec<Complex<T>> = mu.iter().map(|&z| c_from(z)).collect();
    let two = T::from_f64(2.0);
    let mut g = Complex::new(T::one(), T::zero());
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            g = g * c_gamma(&(-w[i].clone() - w[j].clone())) * c_gamma(&(w[j].clone() - w[i].clone()));
        }
        g = g * c_gamma(&c_scale(&-w[i].clone(), &two));
    }
    Ok(g)
}

fn check_inputs(nu: &[Complex64], y: &[f64]) -> Result<()> {
    if nu.is_empty() || nu.len() != y.len() {
        return Err(Error::InvalidInput(format!("rank mismatch: {} spectral entries, {} coordinates", nu.len(), y.len())));
    }
    if y.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidInput("radial coordinates must be positive".into()));
    }
    Ok(())
}

/// `M̃_ν(y)` in double-double, summed until the tail bound is below `tol·|M̃|`.
pub fn m_tilde(nu: &SpectralParameter, y: &RadialPoint, tol: f64) -> Result<SeriesValue> {
    m_tilde_with(nu, y, &SeriesConfig { tol, ..SeriesConfig::default() })
}

pub fn m_tilde_with(nu: &SpectralParameter, y: &RadialPoint, cfg: &SeriesConfig) -> Result<SeriesValue> {
    let (nu, y) = (&nu.nu[..], &y.y[..]);
    check_inputs(nu, y)?;
    let mut sh = Shells::<Dd>::new(nu, y);
    while !(sh.tail() <= cfg.tol * c_abs(&sh.sum)) {
        if sh.order >= cfg.max_order {
            return Err(Error::TailNotConverged {
                tail: sh.tail(),
                target: cfg.tol * c_abs(&sh.sum),
                order: sh.order,
            });
        }
        sh.extend()?;
    }
    Ok(finish_m_tilde(nu, y, &sh))
}

/// `M̃_ν(y)` summed over `|m| ≤ order` exactly; `tail_bound` is infinite
/// until the shells are past their peak.
pub fn m_tilde_at_order(nu: &SpectralParameter, y: &RadialPoint, order: usize) -> Result<SeriesValue> {
    let (nu, y) = (&nu.nu[..], &y.y[..]);
    check_inputs(nu, y)?;
    let mut sh = Shells::<Dd>::new(nu, y);
    while sh.order < order {
        sh.extend()?;
    }
    Ok(finish_m_tilde(nu, y, &sh))
}

fn finish_m_tilde(nu: &[Complex64], y: &[f64], sh: &Shells<Dd>) -> SeriesValue {
    let p = c_to_f64(&prefactor::<Dd>(nu, y));
    SeriesValue {
        value: p * c_to_f64(&sh.sum),
        truncation_order: sh.order,
        tail_bound: p.norm() * sh.tail(),
        terms_summed: sh.terms,
    }
}

// ---------------------------------------------------------------------------
// Weyl sum

struct Term<T: WideReal> {
    shells: Shells<T>,
    gp: Complex<T>,
    gp_abs: f64,
}

impl<T: WideReal> Term<T> {
    fn new(mu: &[Complex64], y: &[f64]) -> Result<Self> {
        let gp = gamma_n_wide::<T>(mu)? * prefactor::<T>(mu, y);
        let gp_abs = c_abs(&gp);
        let mut shells = Shells::new(mu, y);
        while !sh_tail_finite(&shells) {
            shells.extend()?;
        }
        Ok(Term { shells, gp, gp_abs })
    }

    fn tail_abs(&self) -> f64 {
        self.gp_abs * self.shells.tail()
    }

    fn abs_sum(&self) -> f64 {
        self.gp_abs * self.shells.abs_total
    }

    fn value(&self) -> Complex<T> {
        self.gp.clone() * self.shells.sum.clone()
    }

    /// Extend until the absolute tail is below `target`, or below `floor`
    /// (rounding level, where more terms cannot help).
    fn refine(&mut self, target: f64, floor: f64, max_order: usize) -> Result<()> {
        while self.tail_abs() > target && self.tail_abs() > floor {
            if self.shells.order >= max_order {
                return Err(Error::TailNotConverged { tail: self.tail_abs(), target, order: self.shells.order });
            }
            self.shells.extend()?;
        }
        Ok(())
    }
}

fn sh_tail_finite<T: WideReal>(s: &Shells<T>) -> bool {
    s.tail().is_finite()
}

enum AnyTerm {
    Dd(Term<Dd>),
    Mp(Term<Mp>),
}

trait Tier: WideReal + Sized {
    fn wrap(t: Term<Self>) -> AnyTerm;
    fn unwrap(a: &mut AnyTerm) -> &mut Term<Self>;
    const TAG: u8;
}

impl Tier for Dd {
    fn wrap(t: Term<Dd>) -> AnyTerm {
        AnyTerm::Dd(t)
    }
    fn unwrap(a: &mut AnyTerm) -> &mut Term<Dd> {
        match a {
            AnyTerm::Dd(t) => t,
            AnyTerm::Mp(_) => unreachable!("cache key carries the tier"),
        }
    }
    const TAG: u8 = 1;
}

impl Tier for Mp {
    fn wrap(t: Term<Mp>) -> AnyTerm {
        AnyTerm::Mp(t)
    }
    fn unwrap(a: &mut AnyTerm) -> &mut Term<Mp> {
        match a {
            AnyTerm::Mp(t) => t,
            AnyTerm::Dd(_) => unreachable!("cache key carries the tier"),
        }
    }
    const TAG: u8 = 2;
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct TermKey {
    mu: Vec<(u64, u64)>,
    y: Vec<u64>,
    tier: u8,
}

/// Outcome of a Weyl-sum evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylSeriesValue {
    pub value: Complex64,
    /// Largest total degree summed over all Weyl terms.
    pub truncation_order: usize,
    /// Sum over `w` of `|Γ_n(wν)|·(tail bound of M̃_{wν})`.
    pub tail_bound: f64,
    /// Rounding estimate of the arithmetic tier used.
    pub rounding_estimate: f64,
    pub terms_summed: usize,
    /// `max_w |Γ_n(wν) M̃_{wν}| / |W̃|`.
    pub cancellation_ratio: f64,
    pub precision: &'static str,
    pub warnings: Vec<String>,
}

impl WeylSeriesValue {
    pub fn error_estimate(&self) -> f64 {
        self.tail_bound + self.rounding_estimate
    }

    pub fn to_report(&self, nu: &[Complex64], y: &[f64]) -> EvalReport {
        EvalReport {
            route: "series".into(),
            n: nu.len(),
            nu: nu.iter().map(|&z| z.into()).collect(),
            y: Some(y.to_vec()),
            value: self.value.into(),
            error_estimate: Some(self.error_estimate()),
            tail_bound: Some(self.tail_bound),
            cancellation_ratio: Some(self.cancellation_ratio),
            terms_summed: Some(self.terms_summed),
            truncation_order: Some(self.truncation_order),
            precision: Some(self.precision.into()),
            warnings: self.warnings.clone(),
            ..EvalReport::default()
        }
    }
}

enum TierFailure {
    Precision { ratio: f64, error: f64 },
    Other(Error),
}

impl From<Error> for TierFailure {
    fn from(e: Error) -> Self {
        TierFailure::Other(e)
    }
}

/// Evaluates `W̃` by the Weyl-symmetrized series.
///
/// With caching enabled, per-`wν` partial sums are kept and extended on
/// later calls; `W̃(ν)` and `W̃(uν)` then share all their terms.
pub struct SeriesEngine {
    cfg: SeriesConfig,
    cache: Option<RwLock<HashMap<TermKey, Arc<Mutex<AnyTerm>>>>>,
}

impl SeriesEngine {
    pub fn new(cfg: SeriesConfig) -> Self {
        SeriesEngine { cfg, cache: Some(RwLock::new(HashMap::new())) }
    }

    pub fn uncached(cfg: SeriesConfig) -> Self {
        SeriesEngine { cfg, cache: None }
    }

    pub fn config(&self) -> &SeriesConfig {
        &self.cfg
    }

    fn term<T: Tier>(&self, mu: &[Complex64], y: &[f64]) -> Result<Arc<Mutex<AnyTerm>>> {
        let Some(cache) = &self.cache else {
            return Ok(Arc::new(Mutex::new(T::wrap(Term::<T>::new(mu, y)?))));
        };
        let key = TermKey {
            mu: mu.iter().map(|z| (z.re.to_bits(), z.im.to_bits())).collect(),
            y: y.iter().map(|v| v.to_bits()).collect(),
            tier: T::TAG,
        };
        if let Some(t) = cache.read().unwrap().get(&key) {
            return Ok(t.clone());
        }
        let t = Arc::new(Mutex::new(T::wrap(Term::<T>::new(mu, y)?)));
        Ok(cache.write().unwrap().entry(key).or_insert(t).clone())
    }

    pub fn w_tilde(&self, nu: &[Complex64], y: &[f64]) -> Result<WeylSeriesValue> {
        check_inputs(nu, y)?;
        let run = |r: std::result::Result<WeylSeriesValue, TierFailure>| -> Option<Result<WeylSeriesValue>> {
            match r {
                Ok(v) => Some(Ok(v)),
                Err(TierFailure::Other(e)) => Some(Err(e)),
                Err(TierFailure::Precision { .. }) => None,
            }
        };
        match self.cfg.precision {
            Precision::DoubleDouble => self.weyl_sum::<Dd>(nu, y).map_err(into_error),
            Precision::Wide => self.weyl_sum::<Mp>(nu, y).map_err(into_error),
            Precision::Auto => match run(self.weyl_sum::<Dd>(nu, y)) {
                Some(r) => r,
                None => self.weyl_sum::<Mp>(nu, y).map_err(into_error),
            },
        }
    }

    fn weyl_sum<T: Tier>(&self, nu: &[Complex64], y: &[f64]) -> std::result::Result<WeylSeriesValue, TierFailure> {
        let n = nu.len();
        let weyl = weyl_enumerate(n)?;
        let terms: Vec<Arc<Mutex<AnyTerm>>> =
            weyl.iter().map(|w| self.term::<T>(&act_slice(w, nu), y)).collect::<Result<_>>()?;
        let count = terms.len() as f64;
        let tol = self.cfg.tol;
        for _ in 0..400 {
            let mut value = Complex::new(T::zero(), T::zero());
            let (mut tails, mut abs_sum, mut max_part) = (0.0, 0.0, 0.0f64);
            let mut order = 0;
            let mut summed = 0;
            for t in &terms {
                let mut g = t.lock().unwrap();
                let t = T::unwrap(&mut g);
                let v = t.value();
                max_part = max_part.max(c_abs(&v));
                value = value + v;
                tails += t.tail_abs();
                abs_sum += t.abs_sum();
                order = order.max(t.shells.order);
                summed += t.shells.terms;
            }
            let vabs = c_abs(&value);
            let rounding = T::EPS * (4.0 * order as f64 + 64.0) * abs_sum;
            let ratio = max_part / vabs;
            if rounding > 0.5 * tol * vabs {
                return Err(TierFailure::Precision { ratio, error: (rounding + tails) / vabs });
            }
            if tails <= 0.5 * tol * vabs {
                let mut warnings = Vec::new();
                if ratio > CANCELLATION_WARN {
                    warnings.push(format!(
                        "CatastrophicCancellation: Weyl sum cancels {:.1} digits (ratio {ratio:.3e}); evaluated in {}",
                        ratio.log10(),
                        T::NAME
                    ));
                }
                return Ok(WeylSeriesValue {
                    value: c_to_f64(&value),
                    truncation_order: order,
                    tail_bound: tails,
                    rounding_estimate: rounding,
                    terms_summed: summed,
                    cancellation_ratio: ratio,
                    precision: T::NAME,
                    warnings,
                });
            }
            let target = 0.5 * tol * vabs / count;
            let floor = T::EPS * abs_sum / count;
            let max_order = self.cfg.max_order;
            terms
                .par_iter()
                .map(|t| {
                    let mut g = t.lock().unwrap();
                    T::unwrap(&mut g).refine(target, floor, max_order)
                })
                .collect::<Result<Vec<()>>>()?;
        }
        Err(TierFailure::Other(Error::NonConvergence("Weyl-sum refinement did not settle".into())))
    }
}

fn into_error(f: TierFailure) -> Error {
    match f {
        TierFailure::Other(e) => e,
        TierFailure::Precision { ratio, error } => Error::CatastrophicCancellation { ratio, error },
    }
}

/// `W̃_ν(y) = Σ_w Γ_n(wν) M̃_{wν}(y)`.
pub fn w_tilde_series(nu: &SpectralParameter, y: &RadialPoint, cfg: &SeriesConfig) -> Result<WeylSeriesValue> {
    SeriesEngine::uncached(cfg.clone()).w_tilde(&nu.nu, &y.y)
}

/// `W_ν(y) = y^{ρ_n} W̃_ν(y)`.
pub fn w_full(nu: &SpectralParameter, y: &RadialPoint, cfg: &SeriesConfig) -> Result<Complex64> {
    let w = w_tilde_series(nu, y, cfg)?;
    let n = nu.n();
    let scale: f64 = (1..=n).map(|i| y.y[i - 1].powf(rho_exponent(n, i))).product();
    Ok(w.value * scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shell_rank_matches_enumeration() {
        for n in 1..=4 {
            for k in 0..7 {
                for (r, m) in compositions(k, n).iter().enumerate() {
                    assert_eq!(shell_rank(m, k), r);
                }
            }
        }
    }

    #[test]
    fn shells_reproduce_recurrence_table() {
        use crate::coefficients::coeffs_recurrence;
        use crate::rootdata::SpectralParameter;
        let mu = vec![Complex64::new(0.3, 0.2), Complex64::new(0.1, -0.1)];
        let y = [0.7, 1.3];
        let mut sh = Shells::<Dd>::new(&mu, &y);
        for _ in 0..4 {
            sh.extend().unwrap();
        }
        let t = coeffs_recurrence(&SpectralParameter::new(mu).unwrap(), 4).unwrap();
        let x: Vec<f64> = y.iter().map(|v| (PI * v).powi(2)).collect();
        for (r, m) in compositions(4, 2).iter().enumerate() {
            let expect = t.get(m).unwrap() * x[0].powi(m[0] as i32) * x[1].powi(m[1] as i32);
            let got = c_to_f64(&sh.shell[r]);
            assert!((got - expect).norm() < 1e-13 * expect.norm());
        }
    }
}
