//! The coefficients `c_{n,m}(ν)` of the fundamental series: the quadratic
//! form `q_n`, the defining recurrence, and the closed form through the
//! intermediate b-table.

use num_complex::{Complex, Complex64};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rootdata::SpectralParameter;
use crate::specfun::{pochhammer, POLE_TOL};
use crate::wide::{c_abs, c_from, c_scale, c_to_f64, Dd, WideReal};
use crate::Cx;

/// Recurrence division guard.
pub const Q_GUARD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }
}

/// `Σ_{i<n} m_i² + ½m_n² − Σ m_i m_{i+1} + Σ_{i<n} (ν_i − ν_{i+1}) m_i + ν_n m_n`.
pub fn q_form(m: &MultiIndex, nu: &[Complex64]) -> Complex64 {
    let m = &m.0;
    let n = nu.len();
    assert_eq!(m.len(), n, "multi-index and spectral parameter sizes differ");
    let mf: Vec<f64> = m.iter().map(|&v| v as f64).collect();
    let mut quad = 0.5 * mf[n - 1] * mf[n - 1];
    let mut lin = nu[n - 1] * mf[n - 1];
    for i in 0..n - 1 {
        quad += mf[i] * mf[i] - mf[i] * mf[i + 1];
        lin += (nu[i] - nu[i + 1]) * mf[i];
    }
    lin + quad
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Recurrence,
    ClosedForm,
}

/// Dense table over the box `0 ≤ m_i ≤ box`, last index fastest.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    pub n: usize,
    pub nu: Vec<Complex64>,
    pub box_size: usize,
    pub route: Route,
    values: Vec<Complex64>,
}

fn box_len(n: usize, b: usize) -> usize {
    (b + 1).pow(n as u32)
}

fn box_index(m: &[usize], b: usize) -> usize {
    m.iter().fold(0, |acc, &v| acc * (b + 1) + v)
}

fn box_point(mut idx: usize, n: usize, b: usize) -> Vec<usize> {
    let mut m = vec![0; n];
    for k in (0..n).rev() {
        m[k] = idx % (b + 1);
        idx /= b + 1;
    }
    m
}

impl CoefficientTable {
    pub fn get(&self, m: &[usize]) -> Option<Complex64> {
        if m.len() != self.n || m.iter().any(|&v| v > self.box_size) {
            return None;
        }
        Some(self.values[box_index(m, self.box_size)])
    }

    /// `(m, c_m)` in storage order.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<usize>, Complex64)> + '_ {
        let (n, b) = (self.n, self.box_size);
        self.values.iter().enumerate().map(move |(i, &v)| (box_point(i, n, b), v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_json(&self) -> TableJson {
        TableJson {
            n: self.n,
            nu: self.nu.iter().map(|&z| z.into()).collect(),
            box_size: self.box_size,
            route: self.route,
            entries: self.entries().map(|(m, v)| EntryJson { m, re: v.re, im: v.im }).collect(),
        }
    }

    pub fn from_json(t: &TableJson) -> Result<Self> {
        let mut values = vec![Complex64::new(0.0, 0.0); box_len(t.n, t.box_size)];
        for e in &t.entries {
            if e.m.len() != t.n || e.m.iter().any(|&v| v > t.box_size) {
                return Err(Error::InvalidInput(format!("entry {:?} outside the box", e.m)));
            }
            values[box_index(&e.m, t.box_size)] = Complex64::new(e.re, e.im);
        }
        Ok(CoefficientTable {
            n: t.n,
            nu: t.nu.iter().map(|&z| z.into()).collect(),
            box_size: t.box_size,
            route: t.route,
            values,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableJson {
    pub n: usize,
    pub nu: Vec<Cx>,
    #[serde(rename = "box")]
    pub box_size: usize,
    pub route: Route,
    pub entries: Vec<EntryJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntryJson {
    pub m: Vec<usize>,
    pub re: f64,
    pub im: f64,
}

/// Box indices sorted by total degree, lexicographic within a degree.
fn graded_order(n: usize, b: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..box_len(n, b)).collect();
    idx.sort_by_key(|&i| (box_point(i, n, b).iter().sum::<usize>(), i));
    idx
}

pub fn coeffs_recurrence(nu: &SpectralParameter, box_size: usize) -> Result<CoefficientTable> {
    let n = nu.n();
    let b = box_size;
    let mut values = vec![Complex64::new(0.0, 0.0); box_len(n, b)];
    values[0] = Complex64::new(1.0, 0.0);
    let strides: Vec<usize> = (0..n).map(|k| (b + 1).pow((n - 1 - k) as u32)).collect();
    for idx in graded_order(n, b).into_iter().skip(1) {
        let m = box_point(idx, n, b);
        let mut rhs = Complex64::new(0.0, 0.0);
        for i in 0..n {
            if m[i] == 0 {
                continue;
            }
            let w = if i == n - 1 { 0.5 } else { 1.0 };
            rhs += values[idx - strides[i]] * w;
        }
        let q = q_form(&MultiIndex(m.clone()), &nu.nu);
        if q.norm() < Q_GUARD {
            return Err(Error::SingularCoefficient { m, q_abs: q.norm() });
        }
        values[idx] = rhs / q;
    }
    Ok(CoefficientTable { n, nu: nu.nu.clone(), box_size: b, route: Route::Recurrence, values })
}

/// `1/(a)_d` for `d ∈ [-b, b]`, indexed by `d + b`.
fn recip_poch_table(a: Complex64, b: usize) -> Result<Vec<Complex64>> {
    (-(b as i64)..=b as i64)
        .map(|d| {
            let p = pochhammer(a, d)?;
            if p.norm() < POLE_TOL {
                return Err(Error::Pole(format!("({a})_{d} vanishes in a denominator")));
            }
            Ok(1.0 / p)
        })
        .collect()
}

/// Same table in extended precision, by direct products (`|d| ≤ b` is small).
fn recip_poch_table_wide<T: WideReal>(a: Complex64, b: usize) -> Result<Vec<Complex<T>>> {
    let one = Complex::new(T::one(), T::zero());
    let a_w: Complex<T> = c_from(a);
    let mut up = vec![one.clone()];
    let mut down = vec![one.clone()];
    for j in 0..b {
        let jf = T::from_f64(j as f64);
        // (a)_{j+1} and (1-a)_{j+1}
        let f_up = Complex::new(a_w.re.clone() + jf.clone(), a_w.im.clone());
        let f_down = Complex::new(T::one() - a_w.re.clone() + jf, -a_w.im.clone());
        up.push(up[j].clone() * f_up);
        down.push(down[j].clone() * f_down);
    }
    let mut out = Vec::with_capacity(2 * b + 1);
    for k in (1..=b).rev() {
        // 1/(a)_{-k} = (-1)^k (1-a)_k
        let v = down[k].clone();
        out.push(if k % 2 == 0 { v } else { -v });
    }
    for (d, p) in up.into_iter().enumerate() {
        if c_abs(&p) < POLE_TOL {
            return Err(Error::Pole(format!("({a})_{d} vanishes in a denominator")));
        }
        out.push(one.clone() / p);
    }
    Ok(out)
}

fn inv_factorials(b: usize) -> Vec<f64> {
    let mut f = vec![1.0; b + 1];
    for k in 1..=b {
        f[k] = f[k - 1] / k as f64;
    }
    f
}

fn inv_factorials_wide<T: WideReal>(b: usize) -> Vec<T> {
    let mut f = vec![T::one()];
    for k in 1..=b {
        let v = f[k - 1].clone() / T::from_f64(k as f64);
        f.push(v);
    }
    f
}

/// Intermediate `b_l(ν)`, zero where `l_{n-1} < l_n`.
#[derive(Debug, Clone)]
pub struct BTable {
    pub n: usize,
    pub box_size: usize,
    values: Vec<Complex64>,
}

impl BTable {
    pub fn get(&self, l: &[usize]) -> Option<Complex64> {
        if l.len() != self.n || l.iter().any(|&v| v > self.box_size) {
            return None;
        }
        Some(self.values[box_index(l, self.box_size)])
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Visits every point of the box `0 ≤ k_i ≤ upper_i` in odometer order.
fn for_each_in_box(upper: &[usize], mut f: impl FnMut(&[usize])) {
    let d = upper.len();
    let mut k = vec![0usize; d];
    loop {
        f(&k);
        let mut i = d;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if k[i] < upper[i] {
                k[i] += 1;
                break;
            }
            k[i] = 0;
        }
    }
}

fn b_table_wide<T: WideReal>(nu: &[Complex64], b: usize, lower: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    let n = nu.len();
    let nun = nu[n - 1];
    let rp: Vec<Vec<Complex<T>>> =
        (0..n - 1).map(|i| recip_poch_table_wide(nu[i] - nun + 1.0, b)).collect::<Result<_>>()?;
    let invf = inv_factorials_wide::<T>(b);
    let zero = Complex::new(T::zero(), T::zero());
    let mut values = vec![zero.clone(); box_len(n, b)];
    let mut lower_idx = vec![0usize; n - 1];
    for (idx, slot) in values.iter_mut().enumerate() {
        let l = box_point(idx, n, b);
        let (lp, ln) = (l[n - 2], l[n - 1]);
        if lp < ln {
            continue;
        }
        let mut acc = zero.clone();
        for_each_in_box(&l[..n - 2], |k| {
            lower_idx[..n - 2].copy_from_slice(k);
            lower_idx[n - 2] = ln;
            let mut w = invf[lp - ln].clone();
            for i in 0..n - 2 {
                w = w * invf[l[i] - k[i]].clone();
            }
            let mut t = c_scale(&lower[box_index(&lower_idx, b)], &w);
            for i in 0..n - 1 {
                let prev = if i == 0 { 0 } else { k[i - 1] };
                t = t * rp[i][l[i] + b - prev].clone();
            }
            acc = acc.clone() + t;
        });
        *slot = if ln % 2 == 0 { acc } else { -acc };
    }
    Ok(values)
}

fn closed_form_wide<T: WideReal>(nu: &[Complex64], b: usize) -> Result<Vec<Complex<T>>> {
    let n = nu.len();
    if n == 1 {
        let rp = recip_poch_table_wide::<T>(2.0 * nu[0] + 1.0, b)?;
        let invf = inv_factorials_wide::<T>(b);
        return Ok((0..=b).map(|m| c_scale(&rp[m + b], &invf[m])).collect());
    }
    let lower = closed_form_wide::<T>(&nu[..n - 1], b)?;
    let bt = b_table_wide(nu, b, &lower)?;
    let nun = nu[n - 1];
    let rp: Vec<Vec<Complex<T>>> =
        (0..n).map(|i| recip_poch_table_wide(nu[i] + nun + 1.0, b)).collect::<Result<_>>()?;
    let invf = inv_factorials_wide::<T>(b);
    let zero = Complex::new(T::zero(), T::zero());
    let mut values = vec![zero.clone(); box_len(n, b)];
    for (idx, slot) in values.iter_mut().enumerate() {
        let m = box_point(idx, n, b);
        let mut acc = zero.clone();
        for_each_in_box(&m, |l| {
            if l[n - 2] < l[n - 1] {
                return;
            }
            let mut w = T::one();
            for i in 0..n {
                w = w * invf[m[i] - l[i]].clone();
            }
            let mut t = c_scale(&bt[box_index(l, b)], &w);
            for i in 0..n {
                let prev = if i == 0 { 0 } else { l[i - 1] };
                t = t * rp[i][m[i] + b - prev].clone();
            }
            if l[n - 1] % 2 == 1 {
                t = -t;
            }
            acc = acc.clone() + t;
        });
        *slot = acc;
    }
    Ok(values)
}

/// Builds the b-table of rank `n ≥ 2` from the rank-`(n−1)` coefficient table of `ν̃`.
pub fn build_b_table(nu: &SpectralParameter, box_size: usize, lower: &CoefficientTable) -> Result<BTable> {
    let n = nu.n();
    if n < 2 {
        return Err(Error::InvalidInput("b-table needs n >= 2".into()));
    }
    if lower.n != n - 1 || lower.box_size != box_size {
        return Err(Error::InvalidInput("lower-rank table must have rank n-1 and the same box".into()));
    }
    let lw: Vec<Complex<Dd>> = lower.values.iter().map(|&z| c_from(z)).collect();
    let values = b_table_wide(&nu.nu, box_size, &lw)?.iter().map(c_to_f64).collect();
    Ok(BTable { n, box_size, values })
}

/// Whole table by the closed form, recursing in rank down to `n = 1`.
///
/// The nested sums cancel heavily for small coefficients, so they are
/// accumulated in double-double and rounded once.
pub fn closed_form_table(nu: &SpectralParameter, box_size: usize) -> Result<CoefficientTable> {
    let values = closed_form_wide::<Dd>(&nu.nu, box_size)?.iter().map(c_to_f64).collect();
    Ok(CoefficientTable { n: nu.n(), nu: nu.nu.clone(), box_size, route: Route::ClosedForm, values })
}

/// Single coefficient by the closed form (b-table route).
pub fn coeffs_closed_form(nu: &SpectralParameter, m: &MultiIndex) -> Result<Complex64> {
    if m.0.len() != nu.n() {
        return Err(Error::InvalidInput("multi-index size differs from rank".into()));
    }
    let b = m.0.iter().copied().max().unwrap_or(0);
    Ok(closed_form_table(nu, b)?.get(&m.0).expect("index inside its own box"))
}

/// Rank-one closed form `1/(m!(2ν_1+1)_m)`.
fn rank_one_table(nu1: Complex64, b: usize) -> Result<Vec<Complex64>> {
    let invf = inv_factorials(b);
    (0..=b)
        .map(|m| {
            let p = pochhammer(2.0 * nu1 + 1.0, m as i64)?;
            if p.norm() < POLE_TOL {
                return Err(Error::Pole(format!("(2ν_1+1)_{m} vanishes")));
            }
            Ok(invf[m] / p)
        })
        .collect()
}

/// The flat nested double sum, without the b-table factorization.
///
/// Cost grows like `box^{2n}` per coefficient; intended for cross-checks
/// at small rank and box.
pub fn coeffs_closed_form_flat(nu: &SpectralParameter, m: &MultiIndex) -> Result<Complex64> {
    let n = nu.n();
    let m = &m.0;
    let b = m.iter().copied().max().unwrap_or(0);
    if n == 1 {
        return Ok(rank_one_table(nu.nu[0], b)?[m[0]]);
    }
    let nun = nu.nu[n - 1];
    let rp_plus: Vec<Vec<Complex64>> =
        (0..n).map(|i| recip_poch_table(nu.nu[i] + nun + 1.0, b)).collect::<Result<_>>()?;
    let rp_minus: Vec<Vec<Complex64>> =
        (0..n - 1).map(|i| recip_poch_table(nu.nu[i] - nun + 1.0, b)).collect::<Result<_>>()?;
    let invf = inv_factorials(b);
    let lower_nu = nu.truncated();
    let off = b as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut err = None;
    for_each_in_box(&m[..n - 1], |l| {
        let mut kup: Vec<usize> = l[..n - 2].to_vec();
        kup.push(m[n - 1].min(l[n - 2]));
        for_each_in_box(&kup, |k| {
            if err.is_some() {
                return;
            }
            let c = match coeffs_closed_form_flat(&lower_nu, &MultiIndex(k.to_vec())) {
                Ok(c) => c,
                Err(e) => {
                    err = Some(e);
                    return;
                }
            };
            let mut w = invf[m[n - 1] - k[n - 2]];
            for i in 0..n - 1 {
                w *= invf[m[i] - l[i]] * invf[l[i] - k[i]];
            }
            let mut t = c * w;
            for i in 0..n {
                let prev = if i == 0 { 0 } else { l[i - 1] } as i64;
                t *= rp_plus[i][(m[i] as i64 - prev + off) as usize];
            }
            for i in 0..n - 1 {
                let prev = if i == 0 { 0 } else { k[i - 1] } as i64;
                t *= rp_minus[i][(l[i] as i64 - prev + off) as usize];
            }
            acc += t;
        });
    });
    match err {
        Some(e) => Err(e),
        None => Ok(acc),
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BRecurrenceReport {
    #[serde(rename = "box")]
    pub box_size: usize,
    pub max_residual: f64,
    pub max_abs_b: f64,
}

/// Residual of `q_n(l,ν) b_l = Σ_{i<n} b_{l−e_i} + ½(−l_{n−1}+l_n−1) b_{l−e_n}` over the box.
pub fn b_recurrence_check(nu: &SpectralParameter, box_size: usize) -> Result<BRecurrenceReport> {
    let n = nu.n();
    if n < 2 {
        return Err(Error::InvalidInput("b-recurrence needs n >= 2".into()));
    }
    let lower = closed_form_wide::<Dd>(&nu.nu[..n - 1], box_size)?;
    let values: Vec<Complex64> = b_table_wide(&nu.nu, box_size, &lower)?.iter().map(c_to_f64).collect();
    let bt = BTable { n, box_size, values };
    let b = box_size;
    let strides: Vec<usize> = (0..n).map(|k| (b + 1).pow((n - 1 - k) as u32)).collect();
    let mut max_residual: f64 = 0.0;
    for idx in 1..box_len(n, b) {
        let l = box_point(idx, n, b);
        let mut rhs = Complex64::new(0.0, 0.0);
        for i in 0..n {
            if l[i] == 0 {
                continue;
            }
            let f = if i == n - 1 { 0.5 * (l[n - 1] as f64 - l[n - 2] as f64 - 1.0) } else { 1.0 };
            rhs += bt.values[idx - strides[i]] * f;
        }
        let lhs = q_form(&MultiIndex(l), &nu.nu) * bt.values[idx];
        max_residual = max_residual.max((lhs - rhs).norm());
    }
    Ok(BRecurrenceReport { box_size, max_residual, max_abs_b: bt.max_abs() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_indexing_round_trips() {
        for idx in 0..box_len(3, 4) {
            assert_eq!(box_index(&box_point(idx, 3, 4), 4), idx);
        }
    }

    #[test]
    fn graded_order_respects_dependencies() {
        let ord = graded_order(2, 3);
        assert_eq!(ord[0], 0);
        let degs: Vec<usize> = ord.iter().map(|&i| box_point(i, 2, 3).iter().sum()).collect();
        assert!(degs.windows(2).all(|w| w[0] <= w[1]));
    }
}
