//! Numerical evaluation of `f_{m,n}`, the Eisenstein series `e*_n` and `g_{a,b}`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::weil::{estar_combination, g_ab_symbolic, WeilCombination};
use super::zeta::zeta;
use crate::error::{Error, Result};
use crate::lattice::{
    gaussian_lattice_sum, linear_combination, Lattice, SeriesValue, SummationConfig,
};

// Leaves room for rounding when a rescaled tail is multiplied back.
const EPS_SLACK: f64 = 1.0 - 1e-9;

/// Series index `n` of `e*_n`; the non-holomorphic correction applies exactly when `n = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EisensteinIndex {
    n: u32,
    starred: bool,
}

impl EisensteinIndex {
    pub fn new(n: u32) -> Result<Self> {
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::InvalidIndex("n must be even ≥ 2".into()));
        }
        Ok(EisensteinIndex { n, starred: n == 2 })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn starred(&self) -> bool {
        self.starred
    }
}

/// Evaluation route for `e*_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EisensteinMethod {
    /// The rapidly decreasing Gaussian combination of `f_{m,n}`.
    Rapid,
    /// Eisenstein-ordered lattice sum with closed-form inner sums over each row.
    Classical,
    /// Divisor-sum q-expansion.
    QSeries,
}

impl EisensteinMethod {
    pub const ALL: [EisensteinMethod; 3] = [
        EisensteinMethod::Rapid,
        EisensteinMethod::Classical,
        EisensteinMethod::QSeries,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EisensteinMethod::Rapid => "rapid",
            EisensteinMethod::Classical => "classical",
            EisensteinMethod::QSeries => "q-series",
        }
    }
}

impl fmt::Display for EisensteinMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EisensteinMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rapid" => Ok(EisensteinMethod::Rapid),
            "classical" => Ok(EisensteinMethod::Classical),
            "q-series" | "q_series" | "qseries" => Ok(EisensteinMethod::QSeries),
            other => Err(Error::InvalidIndex(format!("unknown method {other:?}"))),
        }
    }
}

/// Memoizing evaluator of Gaussian series over one lattice.
///
/// Values depend only on `(m, n)` and the requested tail tolerance, so repeated identity checks
/// reuse each `f_{m,n}`.
pub struct SeriesContext {
    lattice: Lattice,
    cfg: SummationConfig,
    cache: RefCell<HashMap<(i32, i32, i32), SeriesValue>>,
}

impl SeriesContext {
    pub fn new(lattice: Lattice, cfg: SummationConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(SeriesContext {
            lattice,
            cfg,
            cache: RefCell::new(HashMap::new()),
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn config(&self) -> &SummationConfig {
        &self.cfg
    }

    // Tolerances are rounded down to a power of ten so that values are shared between
    // combinations while staying a pure function of (m, n, decade).
    fn f_with_epsilon(&self, m: i32, n: i32, epsilon: f64) -> Result<SeriesValue> {
        let mut decade = epsilon.log10().floor() as i32;
        if 10f64.powi(decade) > epsilon {
            decade -= 1;
        }
        let key = (m, n, decade);
        if let Some(v) = self.cache.borrow().get(&key) {
            return Ok(*v);
        }
        let prefactor = (PI / self.lattice.area()).powi(m);
        let raw_cfg = self
            .cfg
            .with_epsilon(10f64.powi(decade) * EPS_SLACK / prefactor);
        let v = gaussian_lattice_sum(&self.lattice, m, n, &raw_cfg)?.scale_real(prefactor);
        self.cache.borrow_mut().insert(key, v);
        Ok(v)
    }

    /// `f_{m,n} = (pi/a)^m sum conj(omega)^m omega^(-n) exp(-pi |omega|^2 / a)`.
    pub fn f(&self, m: i32, n: i32) -> Result<SeriesValue> {
        self.f_with_epsilon(m, n, self.cfg.target_epsilon)
    }

    /// Numerical value of a symbolic combination; the tolerance is split by coefficient weight.
    pub fn evaluate(&self, comb: &WeilCombination) -> Result<SeriesValue> {
        let terms: Vec<(f64, (i32, i32))> = comb
            .float_terms()
            .into_iter()
            .map(|(k, c)| (c, k))
            .collect();
        self.evaluate_terms(&terms)
    }

    /// `sum c * f_{m,n}` over real coefficients, with the tail tolerance split by `sum |c|`.
    pub fn evaluate_terms(&self, terms: &[(f64, (i32, i32))]) -> Result<SeriesValue> {
        let weight: f64 = terms.iter().map(|(c, _)| c.abs()).sum();
        if weight == 0.0 {
            return Ok(SeriesValue::zero());
        }
        let per_term = self.cfg.target_epsilon / weight;
        let mut out = Vec::with_capacity(terms.len());
        for &(c, (m, n)) in terms {
            if c != 0.0 {
                out.push((Complex64::new(c, 0.0), self.f_with_epsilon(m, n, per_term)?));
            }
        }
        Ok(linear_combination(out))
    }

    /// `e*_n` by the rapid route; zero for odd `n`.
    pub fn estar(&self, n: u32) -> Result<SeriesValue> {
        if n % 2 == 1 {
            return Ok(SeriesValue::zero());
        }
        self.evaluate(&estar_combination(n)?)
    }

    /// `g_{a,b}`; zero when `a + b` is even.
    pub fn g(&self, a: u32, b: u32) -> Result<SeriesValue> {
        self.evaluate(&g_ab_symbolic(a, b))
    }
}

/// `f_{m,n}(L)`.
pub fn f_mn(lattice: &Lattice, m: i32, n: i32, cfg: &SummationConfig) -> Result<SeriesValue> {
    SeriesContext::new(*lattice, *cfg)?.f(m, n)
}

/// `g_{a,b}(L)` from its symbolic `f`-expansion.
pub fn g_ab(lattice: &Lattice, a: u32, b: u32, cfg: &SummationConfig) -> Result<SeriesValue> {
    SeriesContext::new(*lattice, *cfg)?.g(a, b)
}

/// `e*_n(L)` by the chosen route. For `n = 2` this is the corrected, basis-independent series.
pub fn eisenstein_value(
    lattice: &Lattice,
    idx: EisensteinIndex,
    method: EisensteinMethod,
    cfg: &SummationConfig,
) -> Result<SeriesValue> {
    cfg.validate()?;
    match method {
        EisensteinMethod::Rapid => SeriesContext::new(*lattice, *cfg)?.estar(idx.n()),
        EisensteinMethod::Classical => {
            let e = classical_normalized(lattice.tau(), idx.n(), cfg)?;
            Ok(rescale_from_normalized(lattice, idx.n(), e))
        }
        EisensteinMethod::QSeries => {
            let e = q_series_normalized(lattice.tau(), idx.n(), cfg)?;
            Ok(rescale_from_normalized(lattice, idx.n(), e))
        }
    }
}

/// The classical, basis-dependent `e_2(omega1, omega2)` by Eisenstein summation, together with
/// the correction `(pi/a) conj(omega1)/omega1` such that `e*_2 = e_2 - correction`.
pub fn classical_e2(lattice: &Lattice, cfg: &SummationConfig) -> Result<(SeriesValue, Complex64)> {
    cfg.validate()?;
    let tau = lattice.tau();
    let e2 = eisenstein_summation(tau, 2, cfg)?;
    let w1 = lattice.omega1();
    let correction = Complex64::new(PI / lattice.area(), 0.0) * w1.conj() / w1;
    Ok((e2.scale(w1.powi(-2)), correction))
}

fn rescale_from_normalized(lattice: &Lattice, n: u32, v: SeriesValue) -> SeriesValue {
    v.scale(lattice.omega1().powi(-(n as i32)))
}

/// `cot(pi z)` written through `w = exp(2 pi i z)`, stable for large `Im z > 0`.
fn cot_pi(z: Complex64) -> Complex64 {
    let w = (Complex64::new(0.0, 2.0 * PI) * z).exp();
    Complex64::new(0.0, 1.0) * (w + 1.0) / (w - 1.0)
}

/// Integer polynomials `R_j` in `c = cot(pi z)` with `d^j/dz^j [pi cot(pi z)] = pi^(j+1) R_j(c)`.
fn cot_derivative_polynomial(j: u32) -> Vec<f64> {
    let mut p = vec![0.0, 1.0];
    for _ in 0..j {
        // R' (c), then multiply by -(1 + c^2)
        let deriv: Vec<f64> = p
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, a)| k as f64 * a)
            .collect();
        let mut next = vec![0.0; deriv.len() + 2];
        for (k, a) in deriv.iter().enumerate() {
            next[k] -= a;
            next[k + 2] -= a;
        }
        p = next;
    }
    p
}

fn eval_poly(coeffs: &[f64], x: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * x + a)
}

fn factorial_f64(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Bound on `|sum_j (z + j)^(-n)|` for `Im z = y > 0` from the Lipschitz expansion.
fn row_sum_bound(n: u32, y: f64) -> f64 {
    let x = (-2.0 * PI * y).exp();
    let mut total = 0.0;
    let mut r = 1.0f64;
    loop {
        let term = r.powi(n as i32 - 1) * x.powf(r);
        total += term;
        let ratio = ((r + 1.0) / r).powi(n as i32 - 1) * x;
        if ratio < 0.5 && term < 1e-30 * total.max(1e-300) {
            total += term * ratio / (1.0 - ratio);
            break;
        }
        r += 1.0;
        if r > 1e7 {
            return f64::INFINITY;
        }
    }
    (2.0 * PI).powi(n as i32) / factorial_f64(n - 1) * total
}

/// `e_n(1, tau)` summed row by row: `2 zeta(n) + 2 sum_{m >= 1} sum_j (m tau + j)^(-n)`, each row in
/// closed form through derivatives of `pi cot(pi z)`.
fn eisenstein_summation(tau: Complex64, n: u32, cfg: &SummationConfig) -> Result<SeriesValue> {
    let (z, z_bound) = zeta(n as f64)?;
    let poly = cot_derivative_polynomial(n - 1);
    let scale = (-1f64).powi(n as i32 - 1) / factorial_f64(n - 1) * PI.powi(n as i32);
    let decay = (-2.0 * PI * tau.im).exp();
    let mut acc = crate::compensated::ComplexSum::new();
    acc.add(Complex64::new(2.0 * z, 0.0));
    let mut m = 1u64;
    let tail = loop {
        // rows m' > m - 1 are dominated by a geometric series in exp(-2 pi Im tau)
        let rest = 2.0 * row_sum_bound(n, m as f64 * tau.im) / (1.0 - decay);
        if rest <= 0.5 * cfg.target_epsilon {
            break rest;
        }
        if m > 1_000_000 {
            return Err(Error::Budget(format!(
                "classical Eisenstein summation for Im tau = {} needs more than 10^6 rows",
                tau.im
            )));
        }
        let c = cot_pi(tau * m as f64);
        acc.add(eval_poly(&poly, c) * (2.0 * scale));
        m += 1;
    };
    Ok(SeriesValue {
        value: acc.value(),
        tail_bound: tail + 2.0 * z_bound,
        points_used: m as usize - 1,
    })
}

fn classical_normalized(tau: Complex64, n: u32, cfg: &SummationConfig) -> Result<SeriesValue> {
    let mut e = eisenstein_summation(tau, n, cfg)?;
    if n == 2 {
        e.value -= PI / tau.im;
    }
    Ok(e)
}

/// `e_n(1, tau) = 2 zeta(n) + 2 (2 pi i)^n / (n-1)! sum_k sigma_{n-1}(k) q^k`.
fn q_series_normalized(tau: Complex64, n: u32, cfg: &SummationConfig) -> Result<SeriesValue> {
    let q = (Complex64::new(0.0, 2.0 * PI) * tau).exp();
    let abs_q = q.norm();
    if !(abs_q < 1.0) {
        return Err(Error::QSeriesDivergent(abs_q));
    }
    let (z, z_bound) = zeta(n as f64)?;
    let prefactor = Complex64::new(0.0, 2.0 * PI).powu(n) * (2.0 / factorial_f64(n - 1));
    let mut acc = crate::compensated::ComplexSum::new();
    let mut qk = Complex64::new(1.0, 0.0);
    let mut k = 1u64;
    // sigma_{n-1}(k) <= k^n
    let tail = loop {
        let kf = k as f64;
        let ratio = ((kf + 1.0) / kf).powi(n as i32) * abs_q;
        let rest = prefactor.norm() * kf.powi(n as i32) * abs_q.powf(kf) / (1.0 - ratio.min(0.5));
        if ratio < 0.5 && rest <= 0.5 * cfg.target_epsilon {
            break rest;
        }
        if k > 10_000_000 {
            return Err(Error::Budget("q-series needs more than 10^7 terms".into()));
        }
        qk *= q;
        let sigma: f64 = (1..=k)
            .filter(|d| k.is_multiple_of(*d))
            .map(|d| (d as f64).powi(n as i32 - 1))
            .sum();
        acc.add(qk * sigma);
        k += 1;
    };
    let mut value = Complex64::new(2.0 * z, 0.0) + prefactor * acc.value();
    if n == 2 {
        value -= PI / tau.im;
    }
    Ok(SeriesValue {
        value,
        tail_bound: tail + 2.0 * z_bound,
        points_used: k as usize - 1,
    })
}
