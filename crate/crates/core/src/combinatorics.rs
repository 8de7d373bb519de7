//! Closed forms for the binary game: lattice-path reach probabilities, the
//! threshold rule's payoff and bounds, the stop-in-the-middle payoff, the
//! binomial identities behind it, and Moser's uniform-draw recurrence.
//!
//! The binary game of length `n = 2m` is a walk on the `(m+1) x (m+1)` grid:
//! a revealed `-1` moves right, a `+1` moves up. Stopping at `(i, j)` pays
//! `i - j`, so a path that touches the line `y = x - t` can collect `t`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::numeric::{binomial, binomial_row, count_ratio, int, isqrt, ratio, BigCount, Rational};

/// Lattice paths in the `m x m` square and the line `y = x - t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReachQuery {
    pub m: u64,
    pub t: u64,
}

impl ReachQuery {
    pub fn new(m: u64, t: u64) -> Self {
        Self { m, t }
    }
}

/// Probability that a uniform path in the square reaches `y = x - t`:
/// `C(2m, m-t) / C(2m, m)`, or 1 for `t = 0` and 0 beyond the square.
pub fn reach_probability(q: ReachQuery) -> Rational {
    let ReachQuery { m, t } = q;
    if t == 0 {
        return Rational::one();
    }
    if t > m {
        return Rational::zero();
    }
    count_ratio(&binomial(2 * m, (m - t) as i64), &binomial(2 * m, m as i64))
}

/// Threshold of the simple rule: `floor(sqrt((m + 1) / 2))`.
///
/// `floor(sqrt(y)) == floor(sqrt(floor(y)))` for real `y >= 0`, so integer
/// division before the integer square root is exact.
pub fn threshold_value(m: u64) -> u64 {
    isqrt(m.div_ceil(2))
}

/// Exact expected payoff of the threshold rule: it collects `t` exactly when
/// the path reaches the line, and 0 otherwise.
pub fn w1_exact(m: u64) -> Rational {
    let t = threshold_value(m);
    int(t as i64) * reach_probability(ReachQuery::new(m, t))
}

/// `t * exp(-2 t^2 / (m + 1))`, a lower bound on [`w1_exact`].
///
/// This is the quantity usually quoted for the threshold rule (about 1.54 for
/// a 52-card deck), not its actual expectation. The result is nudged down by
/// a few ulps so that floating-point error cannot push it above the bound.
pub fn w1_lower_bound(m: u64) -> f64 {
    let t = threshold_value(m) as f64;
    let v = t * (-2.0 * t * t / (m as f64 + 1.0)).exp();
    v * (1.0 - 8.0 * f64::EPSILON)
}

/// Upper bound on any strategy's expected payoff: the sum over `t` of the
/// probabilities that the path reaches `y = x - t`.
pub fn payoff_upper_bound(m: u64) -> Rational {
    let row = binomial_row(2 * m);
    let centre = &row[m as usize];
    let total: BigCount = (1..=m).map(|t| &row[(m - t) as usize]).sum();
    count_ratio(&total, centre)
}

/// Closed form of [`payoff_upper_bound`]: `2^(2m-1) / C(2m, m) - 1/2`.
pub fn payoff_upper_bound_closed_form(m: u64) -> Rational {
    let pow = BigCount::one() << (2 * m - 1) as usize;
    count_ratio(&pow, &binomial(2 * m, m as i64)) - ratio(1, 2)
}

/// Expected payoff of stop-in-the-middle for `n = 4m`:
/// `2m C(2m-1, m-1)^2 / C(4m, 2m)`.
pub fn w3_closed_form(m: u64) -> Rational {
    let c = binomial(2 * m - 1, m as i64 - 1);
    let num = &c * &c * (2 * m);
    count_ratio(&num, &binomial(4 * m, 2 * m as i64))
}

/// Expected payoff of stop-in-the-middle on `n/2` copies each of `+1` and
/// `-1`, for any even `n`.
///
/// With `h = n/2`, the first half holds `k` plus-ones with hypergeometric
/// weight `C(h, k) C(h, h-k) / C(n, h)` and then pays `max(0, 2k - h)`.
pub fn w3_exact(n: u64) -> Result<Rational> {
    if n == 0 || n.is_odd() {
        return Err(Error::domain(format!(
            "stop-in-the-middle payoff needs a positive even length, got {n}"
        )));
    }
    let h = n / 2;
    let row = binomial_row(h);
    let mut total = BigCount::zero();
    for k in 0..=h {
        let gain = 2 * k as i64 - h as i64;
        if gain > 0 {
            total += &row[k as usize] * &row[(h - k) as usize] * gain as u64;
        }
    }
    Ok(count_ratio(&total, &binomial(n, h as i64)))
}

/// Both sides of `sum_{k=1}^{m} 2k C(2m, m-k) C(2m, m+k) = 2m C(2m-1, m-1)^2`.
pub fn lemma2_sides(m: u64) -> (BigCount, BigCount) {
    let row = binomial_row(2 * m);
    let lhs = (1..=m)
        .map(|k| &row[(m - k) as usize] * &row[(m + k) as usize] * (2 * k))
        .sum();
    let c = binomial(2 * m - 1, m as i64 - 1);
    let rhs = &c * &c * (2 * m);
    (lhs, rhs)
}

/// Both sides of Vandermonde's identity `sum_i C(s,i) C(t,r-i) = C(s+t, r)`.
pub fn vandermonde_check(s: u64, t: u64, r: u64) -> (BigCount, BigCount) {
    let lhs = (0..=r)
        .map(|i| binomial(s, i as i64) * binomial(t, r as i64 - i as i64))
        .sum();
    (lhs, binomial(s + t, r as i64))
}

/// Exhaustive oracle for the reach counts: element `t` of the result is the
/// number of monotone paths from `(0,0)` to `(m,m)` that touch `y = x - t`.
///
/// Enumerates all `C(2m, m)` paths as bit masks, so `m` is capped at 12.
pub fn enumerate_reaching_paths(m: u32) -> Result<Vec<u64>> {
    if m > 12 {
        return Err(Error::too_large("path enumeration half-length", m, 12));
    }
    let steps = 2 * m;
    let mut counts = vec![0u64; m as usize + 1];
    for mask in 0u32..(1u32 << steps) {
        if mask.count_ones() != m {
            continue;
        }
        // bit set: step right (a revealed -1)
        let mut depth = 0i64;
        let mut deepest = 0i64;
        for s in 0..steps {
            depth += if mask >> s & 1 == 1 { 1 } else { -1 };
            deepest = deepest.max(depth);
        }
        for c in counts.iter_mut().take(deepest as usize + 1) {
            *c += 1;
        }
    }
    Ok(counts)
}

/// Largest `n` for which [`moser_table`] computes exact values.
///
/// `E_n` has denominator `2^(2^n - 1)`, so exact values grow past a megabit
/// at `n = 20`. Larger `n` goes through [`moser_bounds`].
pub const MOSER_EXACT_MAX: usize = 20;

/// Fractional digits carried by [`moser_bounds`].
pub const MOSER_FIXED_DIGITS: u32 = 40;

/// `E_0 ..= E_n` of `E_{n+1} = (1 + E_n^2) / 2`, `E_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MoserTable {
    pub values: Vec<Rational>,
}

impl MoserTable {
    pub fn get(&self, n: usize) -> Option<&Rational> {
        self.values.get(n)
    }
}

pub fn moser_table(n_max: usize) -> Result<MoserTable> {
    if n_max > MOSER_EXACT_MAX {
        return Err(Error::too_large(
            "exact Moser table size",
            n_max,
            MOSER_EXACT_MAX,
        ));
    }
    let mut values = Vec::with_capacity(n_max + 1);
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    values.push(Rational::zero());
    for _ in 0..n_max {
        // (1 + (p/d)^2) / 2 = (d^2 + p^2) / (2 d^2); d is a power of two and
        // p is odd from E_1 on, so the result is already in lowest terms.
        let d2 = &den * &den;
        num = &d2 + &num * &num;
        den = d2 * 2u32;
        values.push(Rational::new_raw(num.clone(), den.clone()));
    }
    Ok(MoserTable { values })
}

/// Lower and upper bound on one `E_n` from the fixed-point recurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct MoserBounds {
    pub lower: Rational,
    pub upper: Rational,
}

impl MoserBounds {
    /// The first `digits` decimals (truncated), if both bounds agree on them.
    pub fn certified_digits(&self, digits: u32) -> Option<String> {
        let lo = crate::numeric::to_decimal_truncated(&self.lower, digits);
        let hi = crate::numeric::to_decimal_truncated(&self.upper, digits);
        (lo == hi).then_some(lo)
    }
}

/// Moser recurrence in fixed point with [`MOSER_FIXED_DIGITS`] decimals,
/// rounding down for the lower bound and up for the upper bound.
///
/// `x -> (1 + x^2) / 2` is increasing on `[0, 1]`, so the true `E_n` stays
/// inside the bracket at every step.
pub fn moser_bounds(n_max: usize) -> Vec<MoserBounds> {
    let scale = BigInt::from(10u32).pow(MOSER_FIXED_DIGITS);
    let two_scale = &scale * 2u32;
    let scale_sq = &scale * &scale;
    let mut lo = BigInt::zero();
    let mut hi = BigInt::zero();
    let mut out = Vec::with_capacity(n_max + 1);
    let to_rational = |v: &BigInt| Rational::new(v.clone(), scale.clone());
    out.push(MoserBounds {
        lower: Rational::zero(),
        upper: Rational::zero(),
    });
    for _ in 0..n_max {
        lo = (&scale_sq + &lo * &lo).div_floor(&two_scale);
        hi = (&scale_sq + &hi * &hi).div_ceil(&two_scale);
        out.push(MoserBounds {
            lower: to_rational(&lo),
            upper: to_rational(&hi),
        });
    }
    out
}

/// Truncated decimals of `E_n`, exact for `n <= MOSER_EXACT_MAX` and from
/// certified bounds beyond.
pub fn moser_digits(n: usize, digits: u32) -> Result<String> {
    if n <= MOSER_EXACT_MAX {
        let table = moser_table(n)?;
        return Ok(crate::numeric::to_decimal_truncated(
            &table.values[n],
            digits,
        ));
    }
    let bounds = moser_bounds(n);
    bounds[n].certified_digits(digits).ok_or_else(|| {
        Error::domain(format!(
            "E_{n} cannot be certified to {digits} digits with {MOSER_FIXED_DIGITS}-digit arithmetic"
        ))
    })
}
