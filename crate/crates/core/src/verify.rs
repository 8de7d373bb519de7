//! Self-checks that recompute every published number and identity and
//! compare them with independent routes.

use std::sync::Arc;

use serde::Serialize;

use crate::combinatorics::{
    enumerate_reaching_paths, lemma2_sides, moser_digits, payoff_upper_bound,
    payoff_upper_bound_closed_form, vandermonde_check, w1_exact, w1_lower_bound, w3_exact,
};
use crate::engine::rng::SplitMix64;
use crate::multiset::{Multiset, PayoffMode};
use crate::numeric::{
    binomial, format_rational, int, ratio, to_decimal, to_decimal_truncated, Rational,
};
use crate::reduction::{f_value, reduce_to_binary, scaling_check};
use crate::strategies::build_tables;

/// Where a check's expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    /// A value printed in the literature (tables, figures, worked examples).
    Published,
    /// An independent computation such as exhaustive enumeration.
    Oracle,
    /// Both sides of an exact identity.
    Identity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub id: String,
    pub expected: String,
    pub actual: String,
    pub source: Source,
    pub pass: bool,
}

impl Check {
    fn eq(
        id: impl Into<String>,
        expected: impl ToString,
        actual: impl ToString,
        source: Source,
    ) -> Self {
        let expected = expected.to_string();
        let actual = actual.to_string();
        Self {
            id: id.into(),
            pass: expected == actual,
            expected,
            actual,
            source,
        }
    }

    fn holds(
        id: impl Into<String>,
        claim: impl Into<String>,
        ok: bool,
        detail: impl Into<String>,
        source: Source,
    ) -> Self {
        Self {
            id: id.into(),
            expected: claim.into(),
            actual: detail.into(),
            source,
            pass: ok,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SuiteName {
    Figure2,
    Table1,
    Table2,
    Lemma1,
    Lemma2,
    Vandermonde,
    Upperbound,
    Deck52,
    Example9over7,
    Dominance,
    All,
}

impl SuiteName {
    pub const INDIVIDUAL: [SuiteName; 10] = [
        SuiteName::Figure2,
        SuiteName::Table1,
        SuiteName::Table2,
        SuiteName::Lemma1,
        SuiteName::Lemma2,
        SuiteName::Vandermonde,
        SuiteName::Upperbound,
        SuiteName::Deck52,
        SuiteName::Example9over7,
        SuiteName::Dominance,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::Figure2 => "figure2",
            SuiteName::Table1 => "table1",
            SuiteName::Table2 => "table2",
            SuiteName::Lemma1 => "lemma1",
            SuiteName::Lemma2 => "lemma2",
            SuiteName::Vandermonde => "vandermonde",
            SuiteName::Upperbound => "upperbound",
            SuiteName::Deck52 => "deck52",
            SuiteName::Example9over7 => "example9over7",
            SuiteName::Dominance => "dominance",
            SuiteName::All => "all",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(name: SuiteName, checks: Vec<Check>) -> Self {
        Self {
            name: name.as_str(),
            passed: checks.iter().all(|c| c.pass),
            checks,
        }
    }
}

/// Runs one suite, or every suite for [`SuiteName::All`].
pub fn run_verify(name: SuiteName) -> Vec<SuiteReport> {
    match name {
        SuiteName::All => SuiteName::INDIVIDUAL.iter().map(|&s| run_one(s)).collect(),
        s => vec![run_one(s)],
    }
}

fn run_one(name: SuiteName) -> SuiteReport {
    let checks = match name {
        SuiteName::Figure2 => figure2(),
        SuiteName::Table1 => table1(),
        SuiteName::Table2 => table2(),
        SuiteName::Lemma1 => lemma1(),
        SuiteName::Lemma2 => lemma2(),
        SuiteName::Vandermonde => vandermonde(),
        SuiteName::Upperbound => upperbound(),
        SuiteName::Deck52 => deck52(),
        SuiteName::Example9over7 => example9over7(),
        SuiteName::Dominance => dominance(),
        SuiteName::All => unreachable!("expanded by run_verify"),
    };
    SuiteReport::new(name, checks)
}

fn fr(x: &Rational) -> String {
    format_rational(x)
}

fn figure2() -> Vec<Check> {
    use Source::Published;
    let mut checks = Vec::new();
    let t4 = build_tables(4).expect("m = 4 is in range");
    for (i, j, v) in [
        (0, 0, int(1)),
        (1, 0, ratio(47, 35)),
        (2, 0, int(2)),
        (4, 4, int(0)),
    ] {
        checks.push(Check::eq(
            format!("T[{i},{j}] at n=8"),
            fr(&v),
            fr(t4.value(i, j)),
            Published,
        ));
    }
    let t10 = build_tables(10).expect("m = 10 is in range");
    let expected = "(3,0)=3 (4,1)=3 (5,2)=3 (6,3)=3 (7,4)=3 (7,5)=2 (8,6)=2 (9,7)=2 (9,8)=1 (10,9)=1 (10,10)=0";
    let actual = t10
        .reachable_stops()
        .iter()
        .map(|&(i, j)| format!("({i},{j})={}", fr(t10.value(i, j))))
        .collect::<Vec<_>>()
        .join(" ");
    checks.push(Check::eq(
        "reachable stops at n=20",
        expected,
        actual,
        Published,
    ));
    checks.push(Check::eq(
        "T[0,0] at n=20, 2 digits",
        "1.61",
        to_decimal(t10.game_value(), 2),
        Published,
    ));
    checks
}

fn table1() -> Vec<Check> {
    [
        (1, "0.500"),
        (2, "0.625"),
        (3, "0.695"),
        (5, "0.775"),
        (10, "0.861"),
        (20, "0.919"),
        (100, "0.981"),
        (200, "0.990"),
        (300, "0.993"),
    ]
    .into_iter()
    .map(|(n, d)| {
        let actual = moser_digits(n, 3).unwrap_or_else(|e| e.to_string());
        Check::eq(
            format!("E_{n}, first 3 digits"),
            d,
            actual,
            Source::Published,
        )
    })
    .collect()
}

fn table2() -> Vec<Check> {
    let mut checks: Vec<Check> = [
        (2, ratio(1, 2)),
        (4, ratio(1, 3)),
        (6, ratio(3, 5)),
        (8, ratio(18, 35)),
        (10, ratio(5, 7)),
        (12, ratio(50, 77)),
        (14, ratio(350, 429)),
        (16, ratio(980, 1287)),
    ]
    .into_iter()
    .map(|(n, v)| {
        let w = w3_exact(n).expect("even n");
        Check::eq(format!("W3({n})"), fr(&v), fr(&w), Source::Published)
    })
    .collect();
    for (n, d) in [(32, "1.10"), (64, "1.57")] {
        let w = w3_exact(n).expect("even n");
        checks.push(Check::eq(
            format!("W3({n}), first 2 decimals"),
            d,
            to_decimal_truncated(&w, 2),
            Source::Published,
        ));
    }
    checks
}

fn lemma1() -> Vec<Check> {
    let mut checks = Vec::new();
    for m in 1..=7u32 {
        let counts = enumerate_reaching_paths(m).expect("m <= 7");
        for t in 1..=m {
            checks.push(Check::eq(
                format!("paths reaching y=x-{t}, m={m}"),
                binomial(2 * m as u64, (m - t) as i64),
                counts[t as usize],
                Source::Oracle,
            ));
        }
    }
    checks
}

fn lemma2() -> Vec<Check> {
    (1..=200u64)
        .map(|m| {
            let (l, r) = lemma2_sides(m);
            Check::eq(format!("m={m}"), r, l, Source::Identity)
        })
        .collect()
}

fn vandermonde() -> Vec<Check> {
    let mut rng = SplitMix64::new(0x7a6d_6f6e_6465);
    (0..500)
        .map(|k| {
            let s = rng.below(65);
            let t = rng.below(65);
            let r = rng.below(65);
            let (l, rhs) = vandermonde_check(s, t, r);
            Check::eq(
                format!("#{k} (s={s}, t={t}, r={r})"),
                rhs,
                l,
                Source::Identity,
            )
        })
        .collect()
}

fn upperbound() -> Vec<Check> {
    let mut checks = Vec::new();
    let bad: Vec<u64> = (1..=200)
        .filter(|&m| payoff_upper_bound(m) != payoff_upper_bound_closed_form(m))
        .collect();
    checks.push(Check::holds(
        "sum form = 2^(2m-1)/C(2m,m) - 1/2, m=1..200",
        "all equal",
        bad.is_empty(),
        if bad.is_empty() {
            "all equal".to_string()
        } else {
            format!("differs at m={bad:?}")
        },
        Source::Identity,
    ));
    let bad: Vec<usize> = (1..=50)
        .filter(|&m| {
            let t = build_tables(m).expect("m in range");
            *t.game_value() > payoff_upper_bound(m as u64)
        })
        .collect();
    checks.push(Check::holds(
        "T[0,0] <= upper bound, m=1..50",
        "holds",
        bad.is_empty(),
        if bad.is_empty() {
            "holds".to_string()
        } else {
            format!("violated at m={bad:?}")
        },
        Source::Oracle,
    ));
    checks
}

fn deck52() -> Vec<Check> {
    let t = build_tables(26).expect("m = 26 is in range");
    let bound = w1_lower_bound(26);
    vec![
        Check::eq(
            "optimal value, n=52",
            "2.62",
            to_decimal(t.game_value(), 2),
            Source::Published,
        ),
        Check::eq(
            "threshold-rule bound, n=52",
            "1.54",
            format!("{bound:.2}"),
            Source::Published,
        ),
        Check::holds(
            "threshold-rule bound in [1.53, 1.55]",
            "[1.53, 1.55]",
            (1.53..=1.55).contains(&bound),
            format!("{bound:.6}"),
            Source::Published,
        ),
        Check::eq(
            "threshold-rule exact expectation, n=52",
            "1300/609",
            fr(&w1_exact(26)),
            Source::Oracle,
        ),
    ]
}

fn example9over7() -> Vec<Check> {
    let mut checks = Vec::new();
    let m = Multiset::from_integers(&[-5, -3, -3, 1, 1, 1, 2, 6]).expect("zero-sum");
    checks.push(Check::eq("mu", "11/4", fr(m.mu()), Source::Published));
    match reduce_to_binary(&m, &Rational::from_integer(0.into())).and_then(|mut c| {
        c.attach_f()?;
        Ok(c)
    }) {
        Ok(chain) => {
            let target = Multiset::binary(4).scale(&ratio(5, 2));
            checks.push(Check::eq(
                "final multiset",
                target.to_string(),
                chain.last().to_string(),
                Source::Published,
            ));
            checks.push(Check::eq(
                "first step",
                "balance: average -5 with 1",
                chain
                    .steps
                    .first()
                    .map(|s| s.action.to_string())
                    .unwrap_or_default(),
                Source::Published,
            ));
            let fin = chain
                .f_values()
                .and_then(|v| v.last().cloned())
                .unwrap_or_default();
            checks.push(Check::eq("final f", "9/7", fr(&fin), Source::Published));
            checks.push(Check::holds(
                "f nonincreasing along the chain",
                "nonincreasing",
                chain.f_nonincreasing() == Some(true),
                format!("{} steps", chain.steps.len()),
                Source::Oracle,
            ));
        }
        Err(e) => checks.push(Check::holds(
            "reduction",
            "terminates",
            false,
            e.to_string(),
            Source::Published,
        )),
    }
    let (lhs, rhs) = scaling_check(&Multiset::binary(4), &ratio(5, 2)).expect("n = 8");
    checks.push(Check::eq("f(5/2 B_8)", "9/7", fr(&lhs), Source::Published));
    checks.push(Check::eq(
        "5/2 f(B_8)",
        fr(&lhs),
        fr(&rhs),
        Source::Identity,
    ));
    checks.push(Check::eq(
        "f(B_8)",
        "18/35",
        fr(&f_value(&Multiset::binary(4)).expect("n = 8")),
        Source::Published,
    ));
    checks
}

fn dominance() -> Vec<Check> {
    (1..=12usize)
        .map(|m| {
            let t = build_tables(m).expect("m in range");
            let v = t.game_value();
            let w1 = w1_exact(m as u64);
            let w3 = w3_exact(2 * m as u64).expect("even");
            Check::holds(
                format!("m={m}"),
                "T[0,0] >= W1 and T[0,0] >= W3",
                *v >= w1 && *v >= w3,
                format!("T={} W1={} W3={}", fr(v), fr(&w1), fr(&w3)),
                Source::Oracle,
            )
        })
        .collect()
}

/// Shared by the CLI and tests: optimal strategy tables wrapped for play.
pub fn optimal_binary(m: usize) -> crate::engine::Strategy {
    crate::engine::Strategy::Optimal(Arc::new(build_tables(m).expect("m in range")))
}

/// Exact payoff and mode used for the Monte Carlo gate targets.
pub fn monte_carlo_targets() -> Vec<(
    &'static str,
    crate::engine::Strategy,
    Multiset,
    PayoffMode,
    Rational,
)> {
    let t4 = build_tables(4).expect("m = 4");
    let t26 = build_tables(26).expect("m = 26");
    vec![
        (
            "optimal n=8",
            optimal_binary(4),
            Multiset::binary(4),
            PayoffMode::Suffix,
            t4.game_value().clone(),
        ),
        (
            "optimal n=52",
            optimal_binary(26),
            Multiset::binary(26),
            PayoffMode::Suffix,
            t26.game_value().clone(),
        ),
        (
            "middle n=8",
            crate::engine::Strategy::Middle,
            Multiset::binary(4),
            PayoffMode::Prefix,
            ratio(18, 35),
        ),
        (
            "middle n=16",
            crate::engine::Strategy::Middle,
            Multiset::binary(8),
            PayoffMode::Prefix,
            ratio(980, 1287),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_suite_passes() {
        for report in run_verify(SuiteName::All) {
            if let Some(c) = report.checks.iter().find(|c| !c.pass) {
                panic!(
                    "{}: {} expected {} got {}",
                    report.name, c.id, c.expected, c.actual
                );
            }
            assert!(report.passed);
        }
    }

    #[test]
    fn table2_has_ten_checks() {
        assert_eq!(run_verify(SuiteName::Table2)[0].checks.len(), 10);
        assert_eq!(run_verify(SuiteName::All).len(), 10);
    }
}
