//! Zero-sum multisets and the two payoff conventions.

use std::fmt;
use std::path::Path;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{format_rational, int, parse_rational, Rational};

/// Which part of the sequence the player collects on stopping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PayoffMode {
    /// The unrevealed remainder `a_{i+1} + ... + a_n`.
    Suffix,
    /// The revealed prefix `a_1 + ... + a_i`.
    Prefix,
}

impl PayoffMode {
    /// Payoff on stopping, given the sum of the revealed prefix. The total is
    /// zero, so the suffix equals minus the prefix.
    pub fn gain<T>(self, prefix_sum: T) -> T
    where
        T: std::ops::Neg<Output = T>,
    {
        match self {
            PayoffMode::Suffix => -prefix_sum,
            PayoffMode::Prefix => prefix_sum,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PayoffMode::Suffix => "suffix",
            PayoffMode::Prefix => "prefix",
        }
    }
}

impl fmt::Display for PayoffMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PayoffMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "suffix" => Ok(PayoffMode::Suffix),
            "prefix" => Ok(PayoffMode::Prefix),
            _ => Err(Error::domain(format!(
                "unknown payoff mode `{s}` (expected suffix or prefix)"
            ))),
        }
    }
}

/// A nonempty multiset of rationals summing to exactly zero, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Multiset {
    elements: Vec<Rational>,
    n_plus: usize,
    n_minus: usize,
    mu: Rational,
}

impl Multiset {
    pub fn new(mut elements: Vec<Rational>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::domain("multiset is empty"));
        }
        let sum: Rational = elements.iter().sum();
        if !sum.is_zero() {
            return Err(Error::NonZeroSum {
                residual: format_rational(&sum),
            });
        }
        elements.sort();
        let n_plus = elements.iter().filter(|x| x.is_positive()).count();
        let n_minus = elements.iter().filter(|x| x.is_negative()).count();
        let abs_sum: Rational = elements.iter().map(|x| x.abs()).sum();
        let mu = abs_sum / int(elements.len() as i64);
        Ok(Self {
            elements,
            n_plus,
            n_minus,
            mu,
        })
    }

    pub fn from_integers(values: &[i64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| int(v)).collect())
    }

    /// `m` copies each of `-1` and `+1`.
    pub fn binary(m: usize) -> Self {
        let mut v = vec![int(-1); m];
        v.extend(std::iter::repeat_n(int(1), m));
        Self::new(v).expect("balanced binary multiset is zero-sum")
    }

    pub fn elements(&self) -> &[Rational] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn n_plus(&self) -> usize {
        self.n_plus
    }

    pub fn n_minus(&self) -> usize {
        self.n_minus
    }

    pub fn n_zero(&self) -> usize {
        self.len() - self.n_plus - self.n_minus
    }

    /// Average absolute value.
    pub fn mu(&self) -> &Rational {
        &self.mu
    }

    /// True when every element is exactly `-1` or `+1`.
    pub fn is_binary(&self) -> bool {
        self.elements
            .iter()
            .all(|x| x.is_integer() && x.numer().abs().is_one())
    }

    /// Distinct values in increasing order with their multiplicities.
    pub fn distinct_counts(&self) -> Vec<(Rational, usize)> {
        let mut out: Vec<(Rational, usize)> = Vec::new();
        for x in &self.elements {
            match out.last_mut() {
                Some((v, c)) if v == x => *c += 1,
                _ => out.push((x.clone(), 1)),
            }
        }
        out
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.elements.binary_search(x).is_ok()
    }

    pub fn scale(&self, lambda: &Rational) -> Self {
        Self::new(self.elements.iter().map(|x| x * lambda).collect())
            .expect("scaling preserves zero sum")
    }

    pub fn negate(&self) -> Self {
        Self::new(self.elements.iter().map(|x| -x).collect()).expect("negation preserves zero sum")
    }

    /// Least common denominator of the elements.
    pub fn common_denominator(&self) -> BigInt {
        self.elements
            .iter()
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
    }

    /// Elements scaled by their common denominator, as machine integers.
    pub(crate) fn scaled_integers(&self) -> Result<(Vec<i64>, BigInt)> {
        let den = self.common_denominator();
        let mut total: i128 = 0;
        let mut out = Vec::with_capacity(self.len());
        for x in &self.elements {
            let v = x.numer() * (&den / x.denom());
            let v: i64 = i64::try_from(&v)
                .map_err(|_| Error::too_large("scaled element magnitude", v.abs(), i64::MAX))?;
            total += v.unsigned_abs() as i128;
            out.push(v);
        }
        if total > i64::MAX as i128 {
            return Err(Error::too_large("scaled absolute sum", total, i64::MAX));
        }
        Ok((out, den))
    }
}

impl fmt::Display for Multiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, x) in self.elements.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            f.write_str(&format_rational(x))?;
        }
        f.write_str("}")
    }
}

/// Parses a multiset from text: one rational or decimal token per line
/// (blank lines and `#` comments ignored), or a JSON array of strings and
/// numbers.
pub fn parse_multiset(text: &str) -> Result<Multiset> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') {
        return parse_json_multiset(trimmed);
    }
    let mut elements = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        for token in line.split(|c: char| c.is_whitespace() || c == ',') {
            if token.is_empty() {
                continue;
            }
            elements.push(with_line(parse_rational(token), idx + 1)?);
        }
    }
    Multiset::new(elements)
}

fn with_line<T>(r: Result<T>, line: usize) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse { token, .. } => Error::Parse {
            token,
            line: Some(line),
        },
        other => other,
    })
}

fn parse_json_multiset(text: &str) -> Result<Multiset> {
    let values: Vec<serde_json::Value> = serde_json::from_str(text).map_err(|e| Error::Parse {
        token: e.to_string(),
        line: Some(e.line()),
    })?;
    let mut elements = Vec::with_capacity(values.len());
    for (idx, v) in values.iter().enumerate() {
        let token = match v {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(n) => n.to_string(),
            other => other.to_string(),
        };
        elements.push(with_line(parse_rational(&token), idx + 1)?);
    }
    Multiset::new(elements)
}

pub fn load_multiset(path: &Path) -> Result<Multiset> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_multiset(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::ratio;

    #[test]
    fn pair_loads() {
        let m = parse_multiset("-1\n1").unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.mu(), &int(1));
        assert!(m.is_binary());
    }

    #[test]
    fn worked_example_statistics() {
        let m = parse_multiset("-5\n-3\n-3\n1\n1\n1\n2\n6\n").unwrap();
        assert_eq!(m.len(), 8);
        assert_eq!(m.mu(), &ratio(11, 4));
        assert_eq!((m.n_plus(), m.n_minus(), m.n_zero()), (5, 3, 0));
        assert_eq!(
            m.distinct_counts(),
            vec![
                (int(-5), 1),
                (int(-3), 2),
                (int(1), 3),
                (int(2), 1),
                (int(6), 1)
            ]
        );
    }

    #[test]
    fn nonzero_sum_reports_residual() {
        assert_eq!(
            parse_multiset("1\n2"),
            Err(Error::NonZeroSum {
                residual: "3".into()
            })
        );
        assert_eq!(
            parse_multiset("1/3\n-1/2"),
            Err(Error::NonZeroSum {
                residual: "-1/6".into()
            })
        );
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match parse_multiset("1\n\n-1\nfoo\n") {
            Err(Error::Parse { token, line }) => {
                assert_eq!(token, "foo");
                assert_eq!(line, Some(4));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn json_and_comments() {
        let a = parse_multiset(r#"["-5/2", 2.5, "-1", 1]"#).unwrap();
        let b = parse_multiset("# header\n-2.5 2.5\n-1, 1\n").unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            parse_multiset(r#"["1", "x"]"#),
            Err(Error::Parse { line: Some(2), .. })
        ));
    }

    #[test]
    fn zeros_and_counts() {
        let m = Multiset::from_integers(&[-2, 0, 0, 2]).unwrap();
        assert_eq!(m.n_plus() + m.n_minus() + m.n_zero(), m.len());
        assert_eq!(m.n_zero(), 2);
        assert!(!m.is_binary());
        assert!(Multiset::new(vec![]).is_err());
    }

    #[test]
    fn scaled_integer_view() {
        let m = parse_multiset("-1/2\n-1/3\n5/6").unwrap();
        let (v, den) = m.scaled_integers().unwrap();
        assert_eq!(den, BigInt::from(6));
        assert_eq!(v, vec![-3, -2, 5]);
    }

    #[test]
    fn gain_by_mode() {
        assert_eq!(PayoffMode::Suffix.gain(3i64), -3);
        assert_eq!(PayoffMode::Prefix.gain(3i64), 3);
    }
}
