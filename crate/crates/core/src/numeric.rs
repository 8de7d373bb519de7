//! Exact integers and rationals.
//!
//! Every value that ends up in a table, a probability, or an expectation is an
//! exact [`Rational`]. Floating point only appears when rendering or when a
//! caller explicitly asks for an approximation.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact fraction, always in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// Arbitrary-precision nonnegative integer.
pub type BigCount = BigUint;

/// Shorthand for the rational `p/q`. Panics on `q == 0`.
pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// `C(n, k)`, zero outside `0..=n`.
///
/// Multiplicative form: after step `i` the accumulator holds `C(n, i + 1)`
/// restricted to the first factors, so each division is exact.
pub fn binomial(n: u64, k: i64) -> BigCount {
    if k < 0 || k as u64 > n {
        return BigCount::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = BigCount::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// The full row `C(n, 0), ..., C(n, n)`.
pub fn binomial_row(n: u64) -> Vec<BigCount> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut c = BigCount::one();
    row.push(c.clone());
    for k in 0..n {
        c *= n - k;
        c /= k + 1;
        row.push(c.clone());
    }
    row
}

pub fn count_to_rational(c: &BigCount) -> Rational {
    Rational::from_integer(BigInt::from_biguint(Sign::Plus, c.clone()))
}

/// Quotient of two counts as an exact rational. Panics if `den` is zero.
pub fn count_ratio(num: &BigCount, den: &BigCount) -> Rational {
    Rational::new(
        BigInt::from_biguint(Sign::Plus, num.clone()),
        BigInt::from_biguint(Sign::Plus, den.clone()),
    )
}

/// Parses `p/q` or a finite decimal such as `-2.5` exactly.
///
/// A leading `+`, `-`, or U+2212 (minus sign) is accepted on the numerator or
/// decimal. The denominator of `p/q` must be a positive integer.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let token = text.trim();
    let bad = || Error::Parse {
        token: token.to_string(),
        line: None,
    };
    if token.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = token.split_once('/') {
        let num = parse_signed_integer(p.trim()).ok_or_else(bad)?;
        let q = q.trim();
        if q.is_empty() || !q.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let den: BigInt = q.parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(Error::ZeroDenominator {
                token: token.to_string(),
            });
        }
        return Ok(Rational::new(num, den));
    }

    let (negative, body) = split_sign(token);
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    let digits_ok = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if (int_part.is_empty() && frac_part.is_empty())
        || !digits_ok(int_part)
        || !digits_ok(frac_part)
    {
        return Err(bad());
    }
    let mut digits = String::with_capacity(int_part.len() + frac_part.len());
    digits.push_str(int_part);
    digits.push_str(frac_part);
    let mut num: BigInt = digits.parse().map_err(|_| bad())?;
    if negative {
        num = -num;
    }
    let den = BigInt::from(10u32).pow(frac_part.len() as u32);
    Ok(Rational::new(num, den))
}

fn split_sign(s: &str) -> (bool, &str) {
    if let Some(rest) = s.strip_prefix('-') {
        (true, rest)
    } else if let Some(rest) = s.strip_prefix('\u{2212}') {
        (true, rest)
    } else if let Some(rest) = s.strip_prefix('+') {
        (false, rest)
    } else {
        (false, s)
    }
}

fn parse_signed_integer(s: &str) -> Option<BigInt> {
    let (negative, body) = split_sign(s);
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let v: BigInt = body.parse().ok()?;
    Some(if negative { -v } else { v })
}

/// Canonical `p/q` text; the denominator is omitted when it is 1.
pub fn format_rational(x: &Rational) -> String {
    x.to_string()
}

/// `p/q` with the denominator always written out.
pub fn format_fraction(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Decimal rendering with `digits` places, rounding half to even.
pub fn to_decimal(x: &Rational, digits: u32) -> String {
    let scale = BigInt::from(10u32).pow(digits);
    let (q, r) = (x.numer() * &scale).div_mod_floor(x.denom());
    let twice = &r * 2u32;
    let q = match twice.cmp(x.denom()) {
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Equal if q.is_odd() => q + 1,
        _ => q,
    };
    render_scaled(&q, digits)
}

/// Decimal rendering with `digits` places, truncated toward zero.
pub fn to_decimal_truncated(x: &Rational, digits: u32) -> String {
    let scale = BigInt::from(10u32).pow(digits);
    let q = (x.numer() * &scale) / x.denom();
    render_scaled(&q, digits)
}

fn render_scaled(q: &BigInt, digits: u32) -> String {
    let mut s = q.abs().to_string();
    let width = digits as usize + 1;
    if s.len() < width {
        s = format!("{}{}", "0".repeat(width - s.len()), s);
    }
    if digits > 0 {
        s.insert(s.len() - digits as usize, '.');
    }
    if q.is_negative() {
        s.insert(0, '-');
    }
    s
}

/// Nearest `f64`, for aggregation and display only.
pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        if x.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Integer square root, `floor(sqrt(n))`.
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x.checked_mul(x).is_none_or(|sq| sq > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|sq| sq <= n) {
        x += 1;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pascal_triangle(rows: usize) -> Vec<Vec<BigCount>> {
        let mut tri: Vec<Vec<BigCount>> = vec![vec![BigCount::one()]];
        for n in 1..rows {
            let prev = &tri[n - 1];
            let mut row = vec![BigCount::one(); n + 1];
            for k in 1..n {
                row[k] = &prev[k - 1] + &prev[k];
            }
            tri.push(row);
        }
        tri
    }

    #[test]
    fn binomial_small_and_out_of_range() {
        assert_eq!(binomial(4, 2), BigCount::from(6u32));
        assert_eq!(binomial(4, -1), BigCount::zero());
        assert_eq!(binomial(4, 5), BigCount::zero());
        assert_eq!(binomial(0, 0), BigCount::one());
    }

    #[test]
    fn binomial_matches_additive_pascal() {
        let tri = pascal_triangle(65);
        for n in 0..=64u64 {
            for k in 0..=n {
                assert_eq!(
                    binomial(n, k as i64),
                    tri[n as usize][k as usize],
                    "C({n},{k})"
                );
            }
            assert_eq!(binomial_row(n), tri[n as usize]);
        }
        assert_eq!(binomial(52, 23), tri[52][23]);
        assert_eq!(binomial(52, 23), BigCount::from(352_870_329_957_600u64));
    }

    #[test]
    fn binomial_large_is_exact() {
        // C(2m, m) = 2 C(2m-1, m-1)
        assert_eq!(binomial(8191, 4095) * 2u32, binomial(8192, 4096));
    }

    #[test]
    fn parse_examples() {
        assert_eq!(parse_rational("18/35").unwrap(), ratio(18, 35));
        assert_eq!(parse_rational("-2.5").unwrap(), ratio(-5, 2));
        assert_eq!(parse_rational("\u{2212}2.5").unwrap(), ratio(-5, 2));
        assert_eq!(parse_rational("2/4").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational(" +3 ").unwrap(), int(3));
        assert_eq!(parse_rational(".25").unwrap(), ratio(1, 4));
        assert_eq!(parse_rational("-6/4").unwrap(), ratio(-3, 2));
        assert!(matches!(
            parse_rational("1/0"),
            Err(Error::ZeroDenominator { .. })
        ));
        for bad in ["", "abc", "1/-2", "1.2.3", "--1", ".", "1e3", "1/", "/2"] {
            match parse_rational(bad) {
                Err(Error::Parse { token, .. }) => assert_eq!(token, bad.trim()),
                other => panic!("{bad:?} parsed as {other:?}"),
            }
        }
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(to_decimal(&ratio(89, 128), 3), "0.695");
        assert_eq!(to_decimal(&ratio(1, 2), 3), "0.500");
        assert_eq!(to_decimal(&ratio(18, 35), 2), "0.51");
        assert_eq!(to_decimal(&ratio(1, 8), 2), "0.12");
        assert_eq!(to_decimal(&ratio(3, 8), 2), "0.38");
        assert_eq!(to_decimal(&ratio(-5, 2), 0), "-2");
        assert_eq!(to_decimal(&ratio(-1, 3), 2), "-0.33");
        assert_eq!(to_decimal(&ratio(-1, 1000), 2), "0.00");
        assert_eq!(to_decimal(&int(7), 1), "7.0");
        assert_eq!(to_decimal_truncated(&ratio(9199, 10000), 3), "0.919");
        assert_eq!(to_decimal_truncated(&ratio(-5, 3), 1), "-1.6");
    }

    #[test]
    fn isqrt_boundaries() {
        for n in 0..10_000u64 {
            let r = isqrt(n);
            assert!(r * r <= n && (r + 1) * (r + 1) > n);
        }
        assert_eq!(isqrt(u64::MAX), u32::MAX as u64);
    }

    fn small_rational() -> impl Strategy<Value = Rational> {
        (-1000i64..1000, 1i64..200).prop_map(|(p, q)| ratio(p, q))
    }

    proptest! {
        #[test]
        fn pascal_and_symmetry(n in 1u64..=64, k in 0u64..=64) {
            let k = k.min(n) as i64;
            prop_assert_eq!(binomial(n, k), binomial(n - 1, k - 1) + binomial(n - 1, k));
            prop_assert_eq!(binomial(n, k), binomial(n, n as i64 - k));
        }

        #[test]
        fn fraction_text_round_trips(x in small_rational()) {
            prop_assert_eq!(parse_rational(&format_rational(&x)).unwrap(), x.clone());
            prop_assert_eq!(parse_rational(&format_fraction(&x)).unwrap(), x);
        }

        #[test]
        fn field_laws(a in small_rational(), b in small_rational(), c in small_rational()) {
            prop_assert_eq!((&a + &b) + &c, &a + (&b + &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&a * (&b + &c), &a * &b + &a * &c);
        }
    }
}
