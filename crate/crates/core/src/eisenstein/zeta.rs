//! Riemann zeta at real arguments `s > 1` by Euler-Maclaurin summation.

use crate::error::{Error, Result};

// B_2, B_4, ..., B_16
const BERNOULLI_EVEN: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

const HEAD_TERMS: u32 = 16;
const CORRECTIONS: usize = 7;

/// `zeta(s)` for real `s > 1`, with a bound on the truncation remainder.
///
/// `x^(-s)` is completely monotone, so the Euler-Maclaurin remainder is bounded by the first
/// omitted correction.
pub fn zeta(s: f64) -> Result<(f64, f64)> {
    if !(s > 1.0) {
        return Err(Error::InvalidIndex(format!("zeta needs s > 1, got {s}")));
    }
    let n = HEAD_TERMS as f64;
    let mut head = crate::compensated::NeumaierSum::new();
    for k in (1..HEAD_TERMS).rev() {
        head.add((k as f64).powf(-s));
    }
    head.add(n.powf(1.0 - s) / (s - 1.0));
    head.add(0.5 * n.powf(-s));

    // rising = s (s+1) ... (s+2j-2), fact = (2j)!
    let mut rising = s;
    let mut fact = 2.0;
    let mut bound = 0.0;
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = b / fact * rising * n.powf(-s - 2.0 * j as f64 - 1.0);
        if j < CORRECTIONS {
            head.add(term);
        } else {
            bound = term.abs();
        }
        let two_j = 2.0 * (j as f64 + 1.0);
        rising *= (s + two_j - 1.0) * (s + two_j);
        fact *= (two_j + 1.0) * (two_j + 2.0);
    }
    Ok((head.value(), bound))
}
