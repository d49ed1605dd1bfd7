//! Rank-2 lattices in the complex plane and rigorously truncated Gaussian lattice sums.
//!
//! A lattice point is written `m * omega2 + n * omega1`. Sums run over the nonzero points in
//! ascending order of modulus (ties broken by `(m, n)`), accumulated with compensation, and are
//! truncated at a radius chosen from an explicit bound on the omitted mass.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::compensated::ComplexSum;
use crate::error::{Error, Result};

/// An oriented basis `(omega1, omega2)` of a lattice in C.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    omega1: Complex64,
    omega2: Complex64,
    area: f64,
}

/// A nonzero lattice point together with its coordinates in the lattice basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticePoint {
    pub m: i64,
    pub n: i64,
    pub omega: Complex64,
    pub modulus: f64,
}

/// Truncation controls shared by every lattice series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummationConfig {
    /// Absolute bound demanded of the omitted tail.
    pub target_epsilon: f64,
    /// Factor (>= 1) applied to the smallest admissible truncation radius.
    pub radius_margin: f64,
    /// Hard cap on the number of enumerated lattice points.
    pub max_points: usize,
}

/// A numerical series value with a proven bound on the truncated tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: Complex64,
    pub tail_bound: f64,
    pub points_used: usize,
}

impl Lattice {
    /// Builds the lattice `Z omega1 + Z omega2`; the basis must be oriented.
    pub fn new(omega1: Complex64, omega2: Complex64) -> Result<Self> {
        let area = (omega1.conj() * omega2).im;
        if !(area > 0.0) || !area.is_finite() {
            return Err(Error::NonOrientedBasis { area });
        }
        Ok(Lattice {
            omega1,
            omega2,
            area,
        })
    }

    /// The lattice `Z + Z tau`.
    pub fn from_tau(tau: Complex64) -> Result<Self> {
        Lattice::new(Complex64::new(1.0, 0.0), tau)
    }

    pub fn omega1(&self) -> Complex64 {
        self.omega1
    }

    pub fn omega2(&self) -> Complex64 {
        self.omega2
    }

    /// Area of the fundamental parallelogram, `Im(conj(omega1) * omega2)`.
    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn tau(&self) -> Complex64 {
        self.omega2 / self.omega1
    }

    /// `exp(2 pi i tau)`.
    pub fn q(&self) -> Complex64 {
        (Complex64::new(0.0, 2.0 * PI) * self.tau()).exp()
    }

    /// The same lattice shape rescaled to the basis `(1, tau)`.
    pub fn normalized(&self) -> Lattice {
        let tau = self.tau();
        Lattice {
            omega1: Complex64::new(1.0, 0.0),
            omega2: tau,
            area: tau.im,
        }
    }

    pub fn point(&self, m: i64, n: i64) -> Complex64 {
        self.omega2 * m as f64 + self.omega1 * n as f64
    }

    /// Length of a shortest nonzero lattice vector.
    pub fn shortest_vector_length(&self) -> f64 {
        let (b1, _) = self.reduced_coordinates();
        self.point(b1.0, b1.1).norm()
    }

    /// Lagrange-Gauss reduced basis, returned as `(m, n)` coordinates.
    fn reduced_coordinates(&self) -> ((i64, i64), (i64, i64)) {
        let mut b1 = (0i64, 1i64);
        let mut b2 = (1i64, 0i64);
        for _ in 0..256 {
            if self.point(b1.0, b1.1).norm_sqr() > self.point(b2.0, b2.1).norm_sqr() {
                std::mem::swap(&mut b1, &mut b2);
            }
            let v1 = self.point(b1.0, b1.1);
            let v2 = self.point(b2.0, b2.1);
            let mu = ((v2 * v1.conj()).re / v1.norm_sqr()).round() as i64;
            if mu == 0 {
                break;
            }
            b2 = (b2.0 - mu * b1.0, b2.1 - mu * b1.1);
        }
        (b1, b2)
    }

    /// Basis `(lambda omega1, lambda omega2)`.
    pub fn scale_basis(&self, lambda: Complex64) -> Result<Lattice> {
        if lambda == Complex64::new(0.0, 0.0) {
            return Err(Error::ZeroScale);
        }
        Lattice::new(lambda * self.omega1, lambda * self.omega2)
    }

    /// Integral base change `gamma = [[a, b], [c, d]]` acting on the column `(omega2, omega1)`,
    /// so that `tau` maps to `(a tau + b) / (c tau + d)`.
    pub fn sl2_change_basis(&self, gamma: [[i64; 2]; 2]) -> Result<Lattice> {
        let [[a, b], [c, d]] = gamma;
        let det = a * d - b * c;
        if det != 1 {
            return Err(Error::DeterminantNotOne { det });
        }
        let omega2 = self.point(a, b);
        let omega1 = self.point(c, d);
        Lattice::new(omega1, omega2)
    }
}

fn cmp_points(p: &LatticePoint, q: &LatticePoint) -> Ordering {
    p.modulus
        .total_cmp(&q.modulus)
        .then(p.m.cmp(&q.m))
        .then(p.n.cmp(&q.n))
}

/// All nonzero lattice points with `|omega| <= radius`, ascending by modulus with `(m, n)`
/// lexicographic tie-breaking.
pub fn enumerate_shell_points(
    lattice: &Lattice,
    radius: f64,
    max_points: usize,
) -> Result<Vec<LatticePoint>> {
    if !(radius >= 0.0) {
        return Err(Error::NegativeRadius(radius));
    }
    let (b1, b2) = lattice.reduced_coordinates();
    let v1 = lattice.point(b1.0, b1.1);
    let v2 = lattice.point(b2.0, b2.1);
    let area = lattice.area();
    // |Im(conj(v1) w)| = |r| area for w = p v1 + r v2, hence |r| <= R |v1| / area.
    let p_max = (radius * v2.norm() / area).floor() as i64;
    let r_max = (radius * v1.norm() / area).floor() as i64;
    let box_size = (2 * p_max as u128 + 1) * (2 * r_max as u128 + 1);
    if box_size > 8 * max_points as u128 + 64 {
        return Err(Error::TooManyPoints { max: max_points });
    }
    let mut points = Vec::new();
    for p in -p_max..=p_max {
        for r in -r_max..=r_max {
            if p == 0 && r == 0 {
                continue;
            }
            let m = p * b1.0 + r * b2.0;
            let n = p * b1.1 + r * b2.1;
            let omega = lattice.point(m, n);
            let modulus = omega.norm();
            if modulus <= radius {
                if points.len() == max_points {
                    return Err(Error::TooManyPoints { max: max_points });
                }
                points.push(LatticePoint {
                    m,
                    n,
                    omega,
                    modulus,
                });
            }
        }
    }
    points.sort_by(cmp_points);
    Ok(points)
}

/// Natural log of an upper bound for `int_T^inf t^k exp(-c t^2) dt`, valid when
/// `c T^2 > (k + 1) / 2 - 1`.
fn ln_moment_tail(k: f64, t: f64, c: f64) -> f64 {
    let alpha = 0.5 * (k + 1.0);
    let x = c * t * t;
    // Upper incomplete gamma bounds: x^(a-1) e^-x for a <= 1, x^a e^-x / (x - a + 1) otherwise.
    let ln_gamma_upper = if alpha <= 1.0 {
        (alpha - 1.0) * x.ln() - x
    } else {
        alpha * x.ln() - x - (x - alpha + 1.0).ln()
    };
    (0.5f64).ln() - alpha * c.ln() + ln_gamma_upper
}

/// Bound on `sum_{|omega| > R} |omega|^(m - n) exp(-pi |omega|^2 / a)` without the `(pi/a)^m`
/// prefactor. Each point is dominated by the average of a radially decreasing majorant over
/// the disjoint disc of radius half the shortest vector around it.
fn raw_tail_bound(lattice: &Lattice, radius: f64, m: i32, n: i32) -> f64 {
    let c = PI / lattice.area();
    let s = (m - n) as f64;
    let rho = 0.5 * lattice.shortest_vector_length();
    let t = radius - 2.0 * rho;
    if !(t > 0.0) {
        return f64::INFINITY;
    }
    let r0 = (s.max(0.0) / (2.0 * c)).sqrt();
    let alpha_max = 0.5 * (s + 2.0);
    if t < r0 || c * t * t < alpha_max.max(0.0) + 1.0 {
        return f64::INFINITY;
    }
    let upper = ln_moment_tail(s + 1.0, t, c).exp() + rho * ln_moment_tail(s, t, c).exp();
    2.0 / (rho * rho) * upper
}

/// Upper bound on `sum_{|omega| > radius} |(pi/a)^m conj(omega)^m omega^(-n)| exp(-pi |omega|^2/a)`.
///
/// Returns `+inf` when the radius is too small for the comparison argument; the bound is
/// nonincreasing in `radius`.
pub fn gaussian_tail_bound(lattice: &Lattice, radius: f64, m: i32, n: i32) -> f64 {
    let raw = raw_tail_bound(lattice, radius, m, n);
    if raw.is_infinite() {
        return raw;
    }
    raw * (PI / lattice.area()).powi(m)
}

/// Smallest radius (up to bisection precision) where the raw tail bound drops below `epsilon`.
fn admissible_radius(lattice: &Lattice, m: i32, n: i32, epsilon: f64) -> Result<f64> {
    let mut hi = lattice.shortest_vector_length().max(1e-300);
    let mut steps = 0;
    while !(raw_tail_bound(lattice, hi, m, n) <= epsilon) {
        hi *= 2.0;
        steps += 1;
        if steps > 200 || !hi.is_finite() {
            return Err(Error::UnboundedTail { m, n });
        }
    }
    let mut lo = hi / 2.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if raw_tail_bound(lattice, mid, m, n) <= epsilon {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[inline]
fn gaussian_term(point: &LatticePoint, m: i32, n: i32, c: f64) -> Complex64 {
    let conj_pow = if m >= 0 {
        point.omega.conj().powu(m as u32)
    } else {
        point.omega.conj().powu(m.unsigned_abs()).inv()
    };
    let omega_pow = if n >= 0 {
        point.omega.powu(n as u32).inv()
    } else {
        point.omega.powu(n.unsigned_abs())
    };
    conj_pow * omega_pow * (-c * point.modulus * point.modulus).exp()
}

/// `sum conj(omega)^m omega^(-n) exp(-pi |omega|^2 / a)` over nonzero points with `|omega| <= radius`,
/// in shell order. Returns the value and the number of points used.
pub fn gaussian_partial_sum(
    lattice: &Lattice,
    m: i32,
    n: i32,
    radius: f64,
    max_points: usize,
) -> Result<(Complex64, usize)> {
    let points = enumerate_shell_points(lattice, radius, max_points)?;
    let c = PI / lattice.area();
    let sum: ComplexSum = points.iter().map(|p| gaussian_term(p, m, n, c)).collect();
    Ok((sum.value(), points.len()))
}

/// Truncated `sum_{omega != 0} conj(omega)^m omega^(-n) exp(-pi |omega|^2 / a)` with
/// `tail_bound <= cfg.target_epsilon`.
pub fn gaussian_lattice_sum(
    lattice: &Lattice,
    m: i32,
    n: i32,
    cfg: &SummationConfig,
) -> Result<SeriesValue> {
    cfg.validate()?;
    let radius = admissible_radius(lattice, m, n, cfg.target_epsilon)? * cfg.radius_margin;
    let (value, points_used) = gaussian_partial_sum(lattice, m, n, radius, cfg.max_points)?;
    Ok(SeriesValue {
        value,
        tail_bound: raw_tail_bound(lattice, radius, m, n),
        points_used,
    })
}

impl SummationConfig {
    pub fn new(target_epsilon: f64, radius_margin: f64, max_points: usize) -> Result<Self> {
        let cfg = SummationConfig {
            target_epsilon,
            radius_margin,
            max_points,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_epsilon(self, target_epsilon: f64) -> Self {
        SummationConfig {
            target_epsilon,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.target_epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "target_epsilon must be positive, got {}",
                self.target_epsilon
            )));
        }
        if !(self.radius_margin >= 1.0) || !self.radius_margin.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "radius_margin must be >= 1, got {}",
                self.radius_margin
            )));
        }
        if self.max_points == 0 {
            return Err(Error::InvalidConfig("max_points must be positive".into()));
        }
        Ok(())
    }
}

impl Default for SummationConfig {
    fn default() -> Self {
        SummationConfig {
            target_epsilon: 1e-15,
            radius_margin: 1.2,
            max_points: 4_000_000,
        }
    }
}

impl SeriesValue {
    pub fn exact(value: Complex64) -> Self {
        SeriesValue {
            value,
            tail_bound: 0.0,
            points_used: 0,
        }
    }

    pub fn zero() -> Self {
        Self::exact(Complex64::new(0.0, 0.0))
    }

    /// Multiplies by a constant, scaling the tail bound by its modulus.
    pub fn scale(self, factor: Complex64) -> Self {
        SeriesValue {
            value: self.value * factor,
            tail_bound: self.tail_bound * factor.norm(),
            points_used: self.points_used,
        }
    }

    pub fn scale_real(self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }
}

/// Compensated linear combination `sum c_i v_i` with accumulated tail bounds.
pub fn linear_combination<I>(terms: I) -> SeriesValue
where
    I: IntoIterator<Item = (Complex64, SeriesValue)>,
{
    let mut acc = ComplexSum::new();
    let mut tail = 0.0;
    let mut points = 0;
    for (c, v) in terms {
        acc.add(c * v.value);
        tail += c.norm() * v.tail_bound;
        points += v.points_used;
    }
    SeriesValue {
        value: acc.value(),
        tail_bound: tail,
        points_used: points,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn square() -> Lattice {
        Lattice::new(c(1.0, 0.0), c(0.0, 1.0)).unwrap()
    }

    fn hexagonal() -> Lattice {
        Lattice::from_tau(Complex64::from_polar(1.0, PI / 3.0)).unwrap()
    }

    #[test]
    fn derived_fields() {
        let l = square();
        assert_eq!(l.area(), 1.0);
        assert_eq!(l.tau(), c(0.0, 1.0));
        let l2 = Lattice::new(c(1.0, 0.0), c(0.0, 2.0)).unwrap();
        assert_eq!(l2.area(), 2.0);
        assert!((l2.q().re - (-4.0 * PI).exp()).abs() < 1e-20);
    }

    #[test]
    fn area_is_omega1_squared_times_im_tau() {
        let l = Lattice::new(c(0.3, -1.2), c(2.0, 0.7)).unwrap();
        let expected = l.omega1().norm_sqr() * l.tau().im;
        assert!((l.area() - expected).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_oriented_and_degenerate() {
        assert!(matches!(
            Lattice::new(c(1.0, 0.0), c(0.0, -1.0)),
            Err(Error::NonOrientedBasis { area }) if area == -1.0
        ));
        assert!(Lattice::new(c(1.0, 0.0), c(2.0, 0.0)).is_err());
    }

    #[test]
    fn first_shells() {
        let l = square();
        let p1 = enumerate_shell_points(&l, 1.0, 1000).unwrap();
        assert_eq!(p1.len(), 4);
        let p15 = enumerate_shell_points(&l, 1.5, 1000).unwrap();
        assert_eq!(p15.len(), 8);
        let hex = enumerate_shell_points(&hexagonal(), 1.0 + 1e-12, 1000).unwrap();
        assert_eq!(hex.len(), 6);
        assert!(enumerate_shell_points(&l, 0.5, 1000).unwrap().is_empty());
    }

    #[test]
    fn shell_order_and_ties() {
        let pts = enumerate_shell_points(&square(), 3.0, 1000).unwrap();
        for w in pts.windows(2) {
            assert_ne!(cmp_points(&w[0], &w[1]), Ordering::Greater);
        }
        let first: Vec<_> = pts.iter().take(4).map(|p| (p.m, p.n)).collect();
        assert_eq!(first, vec![(-1, 0), (0, -1), (0, 1), (1, 0)]);
    }

    #[test]
    fn max_points_is_enforced() {
        assert!(matches!(
            enumerate_shell_points(&square(), 10.0, 50),
            Err(Error::TooManyPoints { max: 50 })
        ));
        assert!(enumerate_shell_points(&square(), -1.0, 50).is_err());
    }

    #[test]
    fn tail_bound_basic_shape() {
        let l = square();
        assert!(gaussian_tail_bound(&l, 0.5, 0, 2).is_infinite());
        let b3 = gaussian_tail_bound(&l, 3.0, 0, 2);
        let b6 = gaussian_tail_bound(&l, 6.0, 0, 2);
        assert!(b3.is_finite() && b6 < b3);
        assert!(gaussian_tail_bound(&l, 40.0, 0, 2) < 1e-300);
    }

    #[test]
    fn tail_bound_dominates_true_tail() {
        let l = square();
        let (near, _) = gaussian_partial_sum(&l, 0, 2, 3.0, 100_000).unwrap();
        let (far, _) = gaussian_partial_sum(&l, 0, 2, 12.0, 100_000).unwrap();
        let bound = gaussian_tail_bound(&l, 3.0, 0, 2);
        assert!(
            (far - near).norm() <= bound,
            "{} > {}",
            (far - near).norm(),
            bound
        );
    }

    #[test]
    fn scale_and_base_change() {
        let l = square();
        assert_eq!(l.scale_basis(c(1.0, 0.0)).unwrap(), l);
        assert!((l.scale_basis(c(2.0, 0.0)).unwrap().area() - 4.0).abs() < 1e-15);
        assert!(matches!(l.scale_basis(c(0.0, 0.0)), Err(Error::ZeroScale)));
        assert_eq!(l.sl2_change_basis([[1, 0], [0, 1]]).unwrap(), l);
        assert!(matches!(
            l.sl2_change_basis([[2, 0], [0, 1]]),
            Err(Error::DeterminantNotOne { det: 2 })
        ));
        let shifted = l.sl2_change_basis([[1, 1], [0, 1]]).unwrap();
        assert_eq!(shifted.tau(), c(1.0, 1.0));
    }

    #[test]
    fn rotation_by_i_preserves_point_set() {
        let l = square();
        let rotated = l.scale_basis(c(0.0, 1.0)).unwrap();
        let key = |p: &LatticePoint| {
            (
                (p.omega.re * 1e9).round() as i64,
                (p.omega.im * 1e9).round() as i64,
            )
        };
        let mut a: Vec<_> = enumerate_shell_points(&l, 4.0, 1000)
            .unwrap()
            .iter()
            .map(key)
            .collect();
        let mut b: Vec<_> = enumerate_shell_points(&rotated, 4.0, 1000)
            .unwrap()
            .iter()
            .map(key)
            .collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn config_validation() {
        assert!(SummationConfig::new(0.0, 1.2, 10).is_err());
        assert!(SummationConfig::new(1e-10, 0.9, 10).is_err());
        assert!(SummationConfig::new(1e-10, 1.2, 0).is_err());
        assert!(SummationConfig::new(1e-10, 1.0, 1).is_ok());
    }
}
