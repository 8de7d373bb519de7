//! Reducing a general zero-sum multiset to the balanced two-valued one by
//! replacing pairs with their average, which never increases the expected
//! payoff of stop-in-the-middle.
//!
//! Everything here works in the prefix game, where stop-in-the-middle pays
//! `g(a_1 + ... + a_{n/2})` with `g(x) = max(x, 0)`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::multiset::Multiset;
use crate::numeric::{binomial, format_rational, int, to_f64, Rational};

/// Largest multiset [`f_value`] evaluates.
pub const F_VALUE_MAX: usize = 20;

/// Step budget for [`reduce_to_binary`].
pub const REDUCTION_STEP_CAP: usize = 10_000;

/// Positive part.
pub fn g(x: &Rational) -> Rational {
    if x.is_positive() {
        x.clone()
    } else {
        Rational::zero()
    }
}

/// Expected payoff of stop-in-the-middle (prefix game) on a random ordering.
///
/// Only the first half matters, and every `n/2`-subset of positions is
/// equally likely to form it, so the expectation is a sum over sub-multisets
/// weighted by `prod C(mult, k) / C(n, n/2)`.
pub fn f_value(multiset: &Multiset) -> Result<Rational> {
    let n = multiset.len();
    if n % 2 == 1 {
        return Err(Error::domain(format!(
            "stop-in-the-middle payoff is only defined here for even n, got n = {n}"
        )));
    }
    if n > F_VALUE_MAX {
        return Err(Error::too_large("multiset size for f", n, F_VALUE_MAX));
    }
    let classes = multiset.distinct_counts();
    let (scaled_all, den) = multiset.scaled_integers()?;
    let mut values = Vec::with_capacity(classes.len());
    let mut pos = 0;
    for (_, c) in &classes {
        values.push(scaled_all[pos]);
        pos += c;
    }
    let counts: Vec<usize> = classes.iter().map(|(_, c)| *c).collect();
    let mut total = BigInt::zero();
    let mut taken = vec![0usize; counts.len()];
    accumulate_halves(&values, &counts, 0, n / 2, 0, &mut taken, &mut total);
    let weight = BigInt::from(binomial(n as u64, (n / 2) as i64));
    Ok(Rational::new(total, weight * den))
}

fn accumulate_halves(
    values: &[i64],
    counts: &[usize],
    class: usize,
    left: usize,
    sum: i64,
    taken: &mut Vec<usize>,
    total: &mut BigInt,
) {
    if class == counts.len() {
        if left == 0 && sum > 0 {
            let ways: BigInt = taken
                .iter()
                .zip(counts)
                .map(|(&k, &c)| BigInt::from(binomial(c as u64, k as i64)))
                .product();
            *total += ways * sum;
        }
        return;
    }
    let rest: usize = counts[class + 1..].iter().sum();
    let lo = left.saturating_sub(rest);
    for k in lo..=counts[class].min(left) {
        taken[class] = k;
        accumulate_halves(
            values,
            counts,
            class + 1,
            left - k,
            sum + values[class] * k as i64,
            taken,
            total,
        );
    }
    taken[class] = 0;
}

/// Replaces one copy each of `a` and `b` by two copies of their average.
pub fn average_pair(multiset: &Multiset, a: &Rational, b: &Rational) -> Result<Multiset> {
    if a == b {
        return Err(Error::domain(format!(
            "averaging needs two distinct values, got {} twice",
            format_rational(a)
        )));
    }
    let mut elements = multiset.elements().to_vec();
    for v in [a, b] {
        let pos = elements.iter().position(|x| x == v).ok_or_else(|| {
            Error::domain(format!(
                "{} is not an element of {multiset}",
                format_rational(v)
            ))
        })?;
        elements.remove(pos);
    }
    let avg = (a + b) / int(2);
    elements.push(avg.clone());
    elements.push(avg);
    Multiset::new(elements)
}

/// `(f(rest + {a, b}), f(rest + {avg, avg}))`; the first is never smaller.
pub fn lemma3_check(rest: &[Rational], a: &Rational, b: &Rational) -> Result<(Rational, Rational)> {
    if a >= b {
        return Err(Error::domain(format!(
            "pair must satisfy a < b, got a = {}, b = {}",
            format_rational(a),
            format_rational(b)
        )));
    }
    let mut before = rest.to_vec();
    before.push(a.clone());
    before.push(b.clone());
    let before = Multiset::new(before)?;
    let after = average_pair(&before, a, b)?;
    Ok((f_value(&before)?, f_value(&after)?))
}

/// `(g(x + a)/2 + g(x + b)/2, g(x + (a + b)/2))`: convexity of `g` at the
/// heart of the averaging argument, with `x` the sum of the rest of the
/// first half.
pub fn midpoint_inequality(
    x: &Rational,
    a: &Rational,
    b: &Rational,
) -> Result<(Rational, Rational)> {
    if a >= b {
        return Err(Error::domain("midpoint inequality needs a < b"));
    }
    let half = Rational::new(BigInt::from(1), BigInt::from(2));
    let lhs = (g(&(x + a)) + g(&(x + b))) * &half;
    let rhs = g(&(x + (a + b) * &half));
    Ok((lhs, rhs))
}

/// Which of the four ranges `x` falls in, split at `-b`, `-(a+b)/2`, `-a`.
pub fn midpoint_case(x: &Rational, a: &Rational, b: &Rational) -> u8 {
    let mid = -(a + b) / int(2);
    if *x <= -b {
        1
    } else if *x <= mid {
        2
    } else if *x <= -a {
        3
    } else {
        4
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReductionAction {
    /// Averaged a negative and a positive element to even out the sign counts.
    Balance { a: Rational, b: Rational },
    /// Averaged the extremes of one sign class.
    Uniformize { a: Rational, b: Rational },
}

impl ReductionAction {
    pub fn pair(&self) -> (&Rational, &Rational) {
        match self {
            ReductionAction::Balance { a, b } | ReductionAction::Uniformize { a, b } => (a, b),
        }
    }
}

impl fmt::Display for ReductionAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, (a, b)) = match self {
            ReductionAction::Balance { .. } => ("balance", self.pair()),
            ReductionAction::Uniformize { .. } => ("same-sign", self.pair()),
        };
        write!(
            f,
            "{kind}: average {} with {}",
            format_rational(a),
            format_rational(b)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionStep {
    pub action: ReductionAction,
    /// The multiset after the replacement.
    pub multiset: Multiset,
    pub f: Option<Rational>,
}

/// A starting multiset and the averaging steps applied to it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionChain {
    pub initial: Multiset,
    pub initial_f: Option<Rational>,
    pub steps: Vec<ReductionStep>,
    pub final_mu: Rational,
}

impl ReductionChain {
    fn start(initial: Multiset) -> Self {
        let final_mu = initial.mu().clone();
        Self {
            initial,
            initial_f: None,
            steps: Vec::new(),
            final_mu,
        }
    }

    fn push(&mut self, action: ReductionAction, multiset: Multiset) {
        self.final_mu = multiset.mu().clone();
        self.steps.push(ReductionStep {
            action,
            multiset,
            f: None,
        });
    }

    pub fn last(&self) -> &Multiset {
        self.steps.last().map_or(&self.initial, |s| &s.multiset)
    }

    /// Fills in the exact f-value of every multiset in the chain.
    pub fn attach_f(&mut self) -> Result<()> {
        self.initial_f = Some(f_value(&self.initial)?);
        for step in &mut self.steps {
            step.f = Some(f_value(&step.multiset)?);
        }
        Ok(())
    }

    /// f-values in chain order, if attached.
    pub fn f_values(&self) -> Option<Vec<Rational>> {
        std::iter::once(self.initial_f.clone())
            .chain(self.steps.iter().map(|s| s.f.clone()))
            .collect()
    }

    /// True when attached f-values never increase along the chain.
    pub fn f_nonincreasing(&self) -> Option<bool> {
        self.f_values()
            .map(|fs| fs.windows(2).all(|w| w[0] >= w[1]))
    }
}

impl fmt::Display for ReductionChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<(String, String, Option<&Rational>)> = std::iter::once((
            self.initial.to_string(),
            "start".to_string(),
            self.initial_f.as_ref(),
        ))
        .chain(
            self.steps
                .iter()
                .map(|s| (s.multiset.to_string(), s.action.to_string(), s.f.as_ref())),
        )
        .collect();
        let width = rows.iter().map(|r| r.0.chars().count()).max().unwrap_or(0);
        for (k, (set, action, fv)) in rows.iter().enumerate() {
            write!(f, "{k:>4}  {set:<width$}  {action}")?;
            if let Some(v) = fv {
                write!(
                    f,
                    "  f = {} ({})",
                    format_rational(v),
                    crate::numeric::to_decimal(v, 6)
                )?;
            }
            writeln!(f)?;
        }
        write!(f, "final mu = {}", format_rational(&self.final_mu))
    }
}

fn require_even_without_zeros(multiset: &Multiset) -> Result<()> {
    if multiset.len() % 2 == 1 {
        return Err(Error::domain(format!(
            "reduction needs an even number of elements, got {}",
            multiset.len()
        )));
    }
    if multiset.n_zero() > 0 {
        return Err(Error::domain(format!(
            "multiset contains {} zero element(s); sign balancing needs every element \
             to be positive or negative (perturb the zeros or drop them in pairs)",
            multiset.n_zero()
        )));
    }
    Ok(())
}

/// Averages the most extreme element of the majority-opposite sign with the
/// smallest-magnitude element of the majority sign until both signs occur
/// `n/2` times. Each step moves one element across, so it takes
/// `|n_plus - n_minus| / 2` steps.
pub fn balance_signs(multiset: &Multiset) -> Result<ReductionChain> {
    require_even_without_zeros(multiset)?;
    let mut chain = ReductionChain::start(multiset.clone());
    let mut current = multiset.clone();
    while current.n_plus() != current.n_minus() {
        let els = current.elements();
        let (a, b) = if current.n_plus() > current.n_minus() {
            let least_positive = els
                .iter()
                .find(|x| x.is_positive())
                .expect("positives exist");
            (els[0].clone(), least_positive.clone())
        } else {
            let least_negative = els
                .iter()
                .rev()
                .find(|x| x.is_negative())
                .expect("negatives exist");
            (least_negative.clone(), els[els.len() - 1].clone())
        };
        current = average_pair(&current, &a, &b)?;
        chain.push(ReductionAction::Balance { a, b }, current.clone());
    }
    debug_assert!(chain.final_mu.clone() * int(2) > *multiset.mu());
    Ok(chain)
}

/// Balances signs, then averages the minimum and maximum of each sign class
/// until each class spans at most `epsilon`. Negatives are handled first.
pub fn reduce_to_binary(multiset: &Multiset, epsilon: &Rational) -> Result<ReductionChain> {
    if epsilon.is_negative() {
        return Err(Error::domain("epsilon must be nonnegative"));
    }
    let mut chain = balance_signs(multiset)?;
    let mut current = chain.last().clone();
    for negative in [true, false] {
        loop {
            let class: Vec<&Rational> = current
                .elements()
                .iter()
                .filter(|x| x.is_negative() == negative)
                .collect();
            let (lo, hi) = (class[0].clone(), class[class.len() - 1].clone());
            if &hi - &lo <= *epsilon {
                break;
            }
            if chain.steps.len() >= REDUCTION_STEP_CAP {
                return Err(Error::domain(format!(
                    "no uniform multiset within {REDUCTION_STEP_CAP} steps; residual spread {}",
                    format_rational(&(hi - lo))
                )));
            }
            current = average_pair(&current, &lo, &hi)?;
            chain.push(
                ReductionAction::Uniformize { a: lo, b: hi },
                current.clone(),
            );
        }
    }
    Ok(chain)
}

/// `(f(lambda M), lambda f(M))`.
pub fn scaling_check(multiset: &Multiset, lambda: &Rational) -> Result<(Rational, Rational)> {
    if !lambda.is_positive() {
        return Err(Error::domain("scaling factor must be positive"));
    }
    Ok((
        f_value(&multiset.scale(lambda))?,
        lambda * f_value(multiset)?,
    ))
}

/// `f(M) / (mu sqrt(n))`, the constant the payoff bound is about.
pub fn payoff_scale_ratio(multiset: &Multiset) -> Result<f64> {
    let f = f_value(multiset)?;
    Ok(to_f64(&f) / (to_f64(multiset.mu()) * (multiset.len() as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{exact_expected_payoff, Strategy};
    use crate::multiset::PayoffMode;
    use crate::numeric::ratio;

    fn ms(v: &[i64]) -> Multiset {
        Multiset::from_integers(v).unwrap()
    }

    fn worked() -> Multiset {
        ms(&[-5, -3, -3, 1, 1, 1, 2, 6])
    }

    #[test]
    fn f_examples() {
        assert_eq!(f_value(&Multiset::binary(4)).unwrap(), ratio(18, 35));
        assert_eq!(
            f_value(&Multiset::binary(4).scale(&ratio(5, 2))).unwrap(),
            ratio(9, 7)
        );
        assert_eq!(f_value(&Multiset::binary(1)).unwrap(), ratio(1, 2));
        assert!(f_value(&ms(&[-2, 1, 1])).is_err());
        assert!(matches!(
            f_value(&Multiset::binary(11)),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn f_matches_full_enumeration() {
        for v in [
            vec![-5, -3, -3, 1, 1, 1, 2, 6],
            vec![-4, -1, 1, 4],
            vec![-6, 1, 2, 3],
            vec![-3, -2, 0, 0, 1, 4],
            vec![-7, -1, 1, 1, 3, 3],
        ] {
            let m = ms(&v);
            assert_eq!(
                f_value(&m).unwrap(),
                exact_expected_payoff(&Strategy::Middle, &m, PayoffMode::Prefix).unwrap(),
                "{m}"
            );
        }
    }

    #[test]
    fn averaging() {
        let step = average_pair(&worked(), &int(-5), &int(1)).unwrap();
        assert_eq!(step, ms(&[-3, -3, -2, -2, 1, 1, 2, 6]));
        let step2 = average_pair(&step, &int(2), &int(6)).unwrap();
        assert_eq!(step2, ms(&[-3, -3, -2, -2, 1, 1, 4, 4]));
        assert_eq!(
            average_pair(&Multiset::binary(1), &int(-1), &int(1)).unwrap(),
            ms(&[0, 0])
        );
        assert!(average_pair(&worked(), &int(-5), &int(7)).is_err());
        assert!(average_pair(&worked(), &int(1), &int(1)).is_err());
    }

    #[test]
    fn lemma3_on_first_step() {
        let rest: Vec<Rational> = [-3, -3, 1, 1, 2, 6].iter().map(|&v| int(v)).collect();
        let (before, after) = lemma3_check(&rest, &int(-5), &int(1)).unwrap();
        assert!(before >= after);
        assert!(lemma3_check(&[int(-1), int(-1)], &int(1), &int(1)).is_err());
    }

    #[test]
    fn midpoint_cases() {
        assert_eq!(
            midpoint_inequality(&int(0), &int(-2), &int(2)).unwrap(),
            (int(1), int(0))
        );
        assert_eq!(
            midpoint_inequality(&int(-3), &int(-2), &int(2)).unwrap(),
            (int(0), int(0))
        );
        assert_eq!(
            midpoint_inequality(&int(5), &int(1), &int(3)).unwrap(),
            (int(7), int(7))
        );
        assert_eq!(midpoint_case(&int(-3), &int(-2), &int(2)), 1);
        assert_eq!(midpoint_case(&int(-1), &int(-2), &int(2)), 2);
        assert_eq!(midpoint_case(&int(1), &int(-2), &int(2)), 3);
        assert_eq!(midpoint_case(&int(5), &int(1), &int(3)), 4);
        assert!(midpoint_inequality(&int(0), &int(1), &int(1)).is_err());
    }

    #[test]
    fn balancing() {
        let chain = balance_signs(&worked()).unwrap();
        assert_eq!(chain.steps.len(), 1);
        assert_eq!(
            chain.steps[0].action,
            ReductionAction::Balance {
                a: int(-5),
                b: int(1)
            }
        );

        assert!(balance_signs(&Multiset::binary(3))
            .unwrap()
            .steps
            .is_empty());

        let chain = balance_signs(&ms(&[-6, 1, 2, 3])).unwrap();
        assert_eq!(chain.steps.len(), 1);
        assert_eq!(
            chain.last(),
            &Multiset::new(vec![ratio(-5, 2), ratio(-5, 2), int(2), int(3)]).unwrap()
        );
        assert_eq!(chain.final_mu, ratio(5, 2));
        assert!(chain.final_mu > ratio(3, 2));

        // Mirror case: more negatives than positives.
        let chain = balance_signs(&ms(&[-3, -2, -1, 6])).unwrap();
        assert_eq!(chain.steps.len(), 1);
        assert_eq!(
            chain.steps[0].action,
            ReductionAction::Balance {
                a: int(-1),
                b: int(6)
            }
        );

        assert!(balance_signs(&ms(&[-1, 0, 0, 1])).is_err());
        assert!(balance_signs(&ms(&[-2, 1, 1])).is_err());
    }

    #[test]
    fn worked_example_reduction() {
        let mut chain = reduce_to_binary(&worked(), &Rational::zero()).unwrap();
        chain.attach_f().unwrap();
        assert_eq!(chain.last(), &Multiset::binary(4).scale(&ratio(5, 2)));
        assert_eq!(chain.f_nonincreasing(), Some(true));
        assert_eq!(chain.steps.last().unwrap().f, Some(ratio(9, 7)));
        assert!(chain.to_string().contains("balance: average -5 with 1"));
    }

    #[test]
    fn epsilon_reduction() {
        let m = ms(&[-3, -1, -1, 2, 2, 1]);
        let eps = ratio(1, 100);
        let mut chain = reduce_to_binary(&m, &eps).unwrap();
        chain.attach_f().unwrap();
        let last = chain.last();
        assert_eq!(last.n_plus(), last.n_minus());
        for negative in [true, false] {
            let class: Vec<&Rational> = last
                .elements()
                .iter()
                .filter(|x| x.is_negative() == negative)
                .collect();
            assert!(class[class.len() - 1] - class[0] <= eps);
        }
        assert_eq!(chain.f_nonincreasing(), Some(true));
        assert!(reduce_to_binary(&Multiset::binary(4), &Rational::zero())
            .unwrap()
            .steps
            .is_empty());
    }

    #[test]
    fn exact_reduction_may_not_terminate() {
        let m = ms(&[-3, -3, -3, 1, 1, 7]);
        match reduce_to_binary(&m, &Rational::zero()) {
            Err(Error::Domain(msg)) => assert!(msg.contains("residual spread")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn scaling() {
        let (a, b) = scaling_check(&Multiset::binary(4), &ratio(5, 2)).unwrap();
        assert_eq!((a.clone(), b), (ratio(9, 7), ratio(9, 7)));
        let m = ms(&[-4, -1, 2, 3]);
        let (a, b) = scaling_check(&m, &int(1)).unwrap();
        assert_eq!(a, b);
        let (a, b) = scaling_check(&ms(&[-5, -1, 1, 1, 2, 2]), &int(3)).unwrap();
        assert_eq!(a, b);
        assert!(scaling_check(&m, &int(0)).is_err());
    }
}
