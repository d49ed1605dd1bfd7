//! The theta function of `C/(Z + Z tau)`, the operator `D = -(a/pi) d/dz - 2 i a v` on it, and
//! the Fourier expansion of `sqrt(2a) (D^k theta) conj(theta) exp(-2 pi a v^2)`.
//!
//! Points are written `z = u + v tau` with real `u, v`, and `a = Im tau`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::compensated::ComplexSum;

/// A point `z = u + v tau` given by its real coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaPoint {
    pub u: f64,
    pub v: f64,
    pub z: Complex64,
}

impl ThetaPoint {
    pub fn new(u: f64, v: f64, tau: Complex64) -> Self {
        ThetaPoint {
            u,
            v,
            z: Complex64::new(u, 0.0) + tau * v,
        }
    }
}

fn i() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

/// `exp(pi i tau n^2 + 2 pi i n z)`.
fn theta_mode(tau: Complex64, z: Complex64, n: i64) -> Complex64 {
    let nf = n as f64;
    (i() * PI * (tau * nf * nf + z * (2.0 * nf))).exp()
}

/// `theta(z, tau) = sum_{|n| <= trunc} exp(pi i tau n^2 + 2 pi i n z)`.
pub fn theta(z: Complex64, tau: Complex64, trunc: i64) -> Complex64 {
    (-trunc..=trunc)
        .map(|n| theta_mode(tau, z, n))
        .collect::<ComplexSum>()
        .value()
}

/// Coefficients (ascending powers of `x`) of the polynomials with
/// `D^k theta = sum_n P_k(n + v) exp(pi i tau n^2 + 2 pi i n z)`.
///
/// Since `dv/dz = 1/(2 i a)`, `P_{k+1}(x) = -2 i a x P_k(x) + (i / 2 pi) P_k'(x)` with `P_0 = 1`.
pub fn dk_polynomial(k: u32, a: f64) -> Vec<Complex64> {
    let mut p = vec![Complex64::new(1.0, 0.0)];
    for _ in 0..k {
        let mut next = vec![Complex64::new(0.0, 0.0); p.len() + 1];
        for (j, c) in p.iter().enumerate() {
            next[j + 1] += Complex64::new(0.0, -2.0 * a) * c;
            if j > 0 {
                next[j - 1] += i() / (2.0 * PI) * (j as f64) * c;
            }
        }
        p = next;
    }
    p
}

fn eval_poly(coeffs: &[Complex64], x: f64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c)
}

/// `D^k theta` at `point`.
pub fn dk_theta(point: &ThetaPoint, tau: Complex64, k: u32, trunc: i64) -> Complex64 {
    let poly = dk_polynomial(k, tau.im);
    (-trunc..=trunc)
        .map(|n| eval_poly(&poly, n as f64 + point.v) * theta_mode(tau, point.z, n))
        .collect::<ComplexSum>()
        .value()
}

/// The one-term expansion `(-2 i a)^k sum_n (n + v)^k exp(pi i tau n^2 + 2 pi i n z)`; agrees with
/// [`dk_theta`] only for `k <= 1`.
pub fn dk_theta_monomial(point: &ThetaPoint, tau: Complex64, k: u32, trunc: i64) -> Complex64 {
    let lead = Complex64::new(0.0, -2.0 * tau.im).powu(k);
    let s: Complex64 = (-trunc..=trunc)
        .map(|n| (n as f64 + point.v).powi(k as i32) * theta_mode(tau, point.z, n))
        .collect::<ComplexSum>()
        .value();
    lead * s
}

fn product_from(dk: Complex64, point: &ThetaPoint, tau: Complex64, trunc: i64) -> Complex64 {
    let a = tau.im;
    let th = theta(point.z, tau, trunc);
    (2.0 * a).sqrt() * dk * th.conj() * (-2.0 * PI * a * point.v * point.v).exp()
}

/// `sqrt(2a) (D^k theta) conj(theta) exp(-2 pi a v^2)` from the theta series.
pub fn theta_product_lhs(point: &ThetaPoint, tau: Complex64, k: u32, trunc: i64) -> Complex64 {
    product_from(dk_theta(point, tau, k, trunc), point, tau, trunc)
}

/// Same product with `D^k theta` replaced by [`dk_theta_monomial`].
pub fn theta_product_lhs_monomial(
    point: &ThetaPoint,
    tau: Complex64,
    k: u32,
    trunc: i64,
) -> Complex64 {
    product_from(dk_theta_monomial(point, tau, k, trunc), point, tau, trunc)
}

/// One Fourier mode `(-1)^{mn} (m conj(tau) - n)^k exp(-pi/(2a) |m tau - n|^2 + 2 pi i (m u + n v))`.
pub fn theta_product_mode(point: &ThetaPoint, tau: Complex64, k: u32, m: i64, n: i64) -> Complex64 {
    let a = tau.im;
    let (mf, nf) = (m as f64, n as f64);
    let sign = if (m * n).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    };
    let w = tau * mf - nf;
    let phase = i() * (2.0 * PI * (mf * point.u + nf * point.v));
    (tau.conj() * mf - nf).powu(k) * (phase - PI / (2.0 * a) * w.norm_sqr()).exp() * sign
}

/// The double Fourier series for the theta product, `|m|, |n| <= trunc`.
pub fn theta_product_rhs(point: &ThetaPoint, tau: Complex64, k: u32, trunc: i64) -> Complex64 {
    let mut acc = ComplexSum::new();
    for m in -trunc..=trunc {
        for n in -trunc..=trunc {
            acc.add(theta_product_mode(point, tau, k, m, n));
        }
    }
    acc.value()
}

/// Rectangle-rule average of `sqrt(2a) |theta|^2 exp(-2 pi a v^2)` over the unit `(u, v)` square.
///
/// The integrand is smooth and doubly periodic, so the rule converges geometrically. This equals
/// `1/(2 i Im tau) * integral of theta * eta ^ dz` over the curve.
pub fn m2_integral_quadrature(tau: Complex64, nodes: usize, trunc: i64) -> Complex64 {
    let mut acc = ComplexSum::new();
    let h = 1.0 / nodes as f64;
    for iu in 0..nodes {
        for iv in 0..nodes {
            let p = ThetaPoint::new(iu as f64 * h, iv as f64 * h, tau);
            acc.add(theta_product_lhs(&p, tau, 0, trunc));
        }
    }
    acc.value() * (h * h)
}
