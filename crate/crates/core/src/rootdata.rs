//! The B_n layer: spectral parameters, the signed-permutation Weyl group,
//! ρ-shift exponents and the regularity scan.

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::coefficients::{q_form, MultiIndex};
use crate::error::{Error, Result};
use crate::Cx;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralParameter {
    pub nu: Vec<Complex64>,
}

impl SpectralParameter {
    pub fn new(nu: Vec<Complex64>) -> Result<Self> {
        if nu.is_empty() {
            return Err(Error::InvalidInput("spectral parameter needs n >= 1 entries".into()));
        }
        if nu.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidInput("spectral parameter entries must be finite".into()));
        }
        Ok(SpectralParameter { nu })
    }

    pub fn n(&self) -> usize {
        self.nu.len()
    }

    /// `(ν_1, …, ν_{n-1})`.
    pub fn truncated(&self) -> SpectralParameter {
        SpectralParameter { nu: self.nu[..self.nu.len() - 1].to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialPoint {
    pub y: Vec<f64>,
}

impl RadialPoint {
    pub fn new(y: Vec<f64>) -> Result<Self> {
        if y.is_empty() || y.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidInput(format!("radial coordinates must be positive and finite: {y:?}")));
        }
        Ok(RadialPoint { y })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }
}

/// Signed permutation acting by `(wν)_i = signs[i] · ν[perm[i]]` (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeylElement {
    pub perm: Vec<usize>,
    pub signs: Vec<i8>,
}

impl WeylElement {
    pub fn identity(n: usize) -> Self {
        WeylElement { perm: (0..n).collect(), signs: vec![1; n] }
    }

    /// Simple reflection `w_i`, 1-based: `i < n` swaps entries `i, i+1`,
    /// `i = n` negates the last entry.
    pub fn generator(n: usize, i: usize) -> Result<Self> {
        if i == 0 || i > n {
            return Err(Error::InvalidInput(format!("generator index {i} outside 1..={n}")));
        }
        let mut w = WeylElement::identity(n);
        if i < n {
            w.perm.swap(i - 1, i);
        } else {
            w.signs[n - 1] = -1;
        }
        Ok(w)
    }

    /// Product of generators `w_{i_1} ⋯ w_{i_k}`.
    pub fn from_word(n: usize, word: &[usize]) -> Result<Self> {
        let mut w = WeylElement::identity(n);
        for &i in word {
            w = w.compose(&WeylElement::generator(n, i)?);
        }
        Ok(w)
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    /// `self ∘ other`, i.e. the element acting as `ν ↦ self(other(ν))`.
    pub fn compose(&self, other: &WeylElement) -> WeylElement {
        let n = self.n();
        let mut perm = vec![0; n];
        let mut signs = vec![1; n];
        for i in 0..n {
            let p = self.perm[i];
            perm[i] = other.perm[p];
            signs[i] = self.signs[i] * other.signs[p];
        }
        WeylElement { perm, signs }
    }

    pub fn inverse(&self) -> WeylElement {
        let n = self.n();
        let mut perm = vec![0; n];
        let mut signs = vec![1; n];
        for i in 0..n {
            perm[self.perm[i]] = i;
        }
        for i in 0..n {
            signs[i] = self.signs[perm[i]];
        }
        WeylElement { perm, signs }
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p) && self.signs.iter().all(|&s| s == 1)
    }
}

pub const MAX_WEYL_RANK: usize = 6;

/// All `2ⁿ·n!` elements: permutations in lexicographic order, and for
/// each permutation the sign patterns in binary order (identity first).
pub fn weyl_enumerate(n: usize) -> Result<Vec<WeylElement>> {
    if n == 0 || n > MAX_WEYL_RANK {
        return Err(Error::Size(format!("Weyl group enumeration supports 1 <= n <= {MAX_WEYL_RANK}, got {n}")));
    }
    let mut perms = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        perms.push(p.clone());
        // next lexicographic permutation
        let Some(i) = (0..n - 1).rev().find(|&i| p[i] < p[i + 1]) else { break };
        let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).unwrap();
        p.swap(i, j);
        p[i + 1..].reverse();
    }
    let mut out = Vec::with_capacity(perms.len() << n);
    for perm in perms {
        for mask in 0u32..(1 << n) {
            let signs = (0..n).map(|i| if mask >> (n - 1 - i) & 1 == 1 { -1 } else { 1 }).collect();
            out.push(WeylElement { perm: perm.clone(), signs });
        }
    }
    Ok(out)
}

pub fn weyl_act(w: &WeylElement, nu: &SpectralParameter) -> SpectralParameter {
    SpectralParameter { nu: act_slice(w, &nu.nu) }
}

pub(crate) fn act_slice(w: &WeylElement, nu: &[Complex64]) -> Vec<Complex64> {
    (0..nu.len()).map(|i| nu[w.perm[i]] * w.signs[i] as f64).collect()
}

/// Exponent of `y_i` in `y^{ρ_n}`: `i(n − i/2)`.
pub fn rho_exponent(n: usize, i: usize) -> f64 {
    let r = rho_exponent_exact(n, i);
    *r.numer() as f64 / *r.denom() as f64
}

pub fn rho_exponent_exact(n: usize, i: usize) -> Ratio<i64> {
    assert!(i >= 1 && i <= n, "rho_exponent index {i} outside 1..={n}");
    let (n, i) = (n as i64, i as i64);
    Ratio::new(i * (2 * n - i), 2)
}

pub const DEFAULT_REGULARITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegularityReport {
    pub n: usize,
    pub nu: Vec<Cx>,
    #[serde(rename = "box")]
    pub box_size: usize,
    pub tol: f64,
    /// `min |q_n(m, wν)|` over the Weyl group and `0 < m ≤ box`.
    pub min_q: f64,
    pub min_q_weyl: WeylElement,
    pub min_q_index: Vec<usize>,
    /// Smallest distance of `wν − w'ν` (in root coordinates) from the integer lattice.
    pub min_lattice_distance: f64,
    pub min_lattice_pair: (WeylElement, WeylElement),
    pub regular: bool,
}

/// Coordinates of `x` in the simple-root basis `α_i = e_i − e_{i+1}`, `α_n = e_n`.
fn root_coordinates(x: &[Complex64]) -> Vec<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    x.iter()
        .map(|&v| {
            acc += v;
            acc
        })
        .collect()
}

fn lattice_distance(x: &[Complex64]) -> f64 {
    root_coordinates(x)
        .into_iter()
        .map(|z| Complex64::new(z.re - z.re.round(), z.im).norm())
        .fold(0.0, f64::max)
}

/// Scans both regularity conditions on the finite box `0 ≤ m_i ≤ box`.
///
/// The lattice condition is checked over all ordered pairs `w ≠ w'` for
/// `n ≤ 4`; for larger `n` it uses the equivalent single-element form
/// `ν − uν`, `u ≠ 1` (the root lattice is Weyl-invariant).
pub fn is_regular(nu: &SpectralParameter, box_size: usize, tol: f64) -> Result<RegularityReport> {
    if box_size < 1 {
        return Err(Error::InvalidInput("regularity box must be >= 1".into()));
    }
    let n = nu.n();
    let weyl = weyl_enumerate(n)?;
    let images: Vec<Vec<Complex64>> = weyl.iter().map(|w| act_slice(w, &nu.nu)).collect();

    let mut min_q = f64::INFINITY;
    let mut min_q_w = 0;
    let mut min_q_m = vec![0; n];
    let mut m = vec![0usize; n];
    loop {
        // advance m through the box in odometer order, skipping 0
        let mut k = n;
        loop {
            if k == 0 {
                break;
            }
            k -= 1;
            if m[k] < box_size {
                m[k] += 1;
                break;
            }
            m[k] = 0;
        }
        if m.iter().all(|&v| v == 0) {
            break;
        }
        let mi = MultiIndex(m.clone());
        for (wi, img) in images.iter().enumerate() {
            let q = q_form(&mi, img).norm();
            if q < min_q {
                min_q = q;
                min_q_w = wi;
                min_q_m = m.clone();
            }
        }
    }

    let mut min_lat = f64::INFINITY;
    let mut pair = (0, 0);
    let diff = |a: &[Complex64], b: &[Complex64]| -> Vec<Complex64> { a.iter().zip(b).map(|(x, y)| x - y).collect() };
    if n <= 4 {
        for i in 0..images.len() {
            for j in 0..images.len() {
                if i == j {
                    continue;
                }
                let d = lattice_distance(&diff(&images[i], &images[j]));
                if d < min_lat {
                    min_lat = d;
                    pair = (i, j);
                }
            }
        }
    } else {
        for (j, img) in images.iter().enumerate().skip(1) {
            let d = lattice_distance(&diff(&nu.nu, img));
            if d < min_lat {
                min_lat = d;
                pair = (0, j);
            }
        }
    }

    Ok(RegularityReport {
        n,
        nu: nu.nu.iter().map(|&z| z.into()).collect(),
        box_size,
        tol,
        min_q,
        min_q_weyl: weyl[min_q_w].clone(),
        min_q_index: min_q_m,
        min_lattice_distance: min_lat,
        min_lattice_pair: (weyl[pair.0].clone(), weyl[pair.1].clone()),
        regular: min_q > tol && min_lat > tol,
    })
}
