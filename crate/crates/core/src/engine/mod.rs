//! Playing the game: shuffles, single plays, exact expectations by
//! enumerating every distinct ordering, and seeded Monte Carlo.

pub mod rng;

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::threshold_value;
use crate::error::{Error, Result};
use crate::multiset::{Multiset, PayoffMode};
use crate::numeric::{BigCount, Rational};
use crate::strategies::{
    build_tables, middle_decide, optimal_decide, threshold_decide, BinaryState, Decision,
    OptimalPolicy, StrategyTables,
};

pub use rng::{replication_seed, SplitMix64};

/// A stopping rule the engine can play.
#[derive(Debug, Clone)]
pub enum Strategy {
    /// Stop once the available payoff reaches `t`. Binary input only.
    Threshold { t: u64 },
    /// Follow the stop matrix of the backward-induction tables. Binary input only.
    Optimal(Arc<StrategyTables>),
    /// Look once after half the elements and stop iff the payoff is positive.
    Middle,
    /// Optimal play on an arbitrary small multiset.
    GeneralOptimal(Arc<OptimalPolicy>),
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Threshold { .. } => "threshold",
            Strategy::Optimal(_) | Strategy::GeneralOptimal(_) => "optimal",
            Strategy::Middle => "middle",
        }
    }

    /// Threshold rule with the standard threshold for length `n`.
    pub fn threshold_for(n: usize) -> Self {
        Strategy::Threshold {
            t: threshold_value(n as u64 / 2),
        }
    }

    /// Optimal play for `multiset`: the binary tables when the input is
    /// balanced `±1`, otherwise the general policy.
    pub fn optimal_for(multiset: &Multiset, mode: PayoffMode) -> Result<Self> {
        if multiset.is_binary() {
            Ok(Strategy::Optimal(Arc::new(build_tables(
                multiset.len() / 2,
            )?)))
        } else {
            Ok(Strategy::GeneralOptimal(Arc::new(OptimalPolicy::build(
                multiset, mode,
            )?)))
        }
    }
}

/// One play: the order seen, how many elements were revealed before
/// stopping, and the payoff collected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameRun {
    pub permutation: Vec<Rational>,
    pub stop_index: usize,
    pub payoff: Rational,
}

impl GameRun {
    pub fn recompute_payoff(&self, mode: PayoffMode) -> Rational {
        payoff_at(&self.permutation, self.stop_index, mode)
    }
}

/// Payoff for stopping after `stop_index` reveals.
pub fn payoff_at(permutation: &[Rational], stop_index: usize, mode: PayoffMode) -> Rational {
    match mode {
        PayoffMode::Prefix => permutation[..stop_index].iter().sum(),
        PayoffMode::Suffix => permutation[stop_index..].iter().sum(),
    }
}

/// Uniform random ordering of `multiset` determined by `seed`.
pub fn shuffle(multiset: &Multiset, seed: u64) -> Vec<Rational> {
    let mut items = multiset.elements().to_vec();
    SplitMix64::new(seed).shuffle(&mut items);
    items
}

/// A strategy checked against one multiset and mode, playing sequences of
/// class ids (indices into the multiset's sorted distinct values) with
/// payoffs scaled to integers by the common denominator.
struct Game<'a> {
    strategy: &'a Strategy,
    mode: PayoffMode,
    scaled: Vec<i64>,
    initial_counts: Vec<u8>,
    denominator: BigInt,
    n: usize,
}

impl<'a> Game<'a> {
    fn new(strategy: &'a Strategy, multiset: &Multiset, mode: PayoffMode) -> Result<Self> {
        let classes = multiset.distinct_counts();
        let n = multiset.len();
        match strategy {
            Strategy::Threshold { .. } | Strategy::Optimal(_) => {
                if !multiset.is_binary() || multiset.n_plus() != multiset.n_minus() {
                    return Err(Error::domain(format!(
                        "{} strategy needs a balanced multiset of -1 and +1, got {multiset}",
                        strategy.name()
                    )));
                }
                if let Strategy::Optimal(tables) = strategy {
                    if tables.m() != n / 2 {
                        return Err(Error::domain(format!(
                            "tables built for n = {} cannot play n = {n}",
                            2 * tables.m()
                        )));
                    }
                }
            }
            Strategy::Middle => {}
            Strategy::GeneralOptimal(policy) => {
                let matches = policy.mode() == mode
                    && policy.distinct_values().len() == classes.len()
                    && classes
                        .iter()
                        .zip(policy.distinct_values().iter().zip(policy.full_counts()))
                        .all(|((v, c), (pv, pc))| v == pv && *c == *pc as usize);
                if !matches {
                    return Err(Error::domain(
                        "optimal policy was built for a different multiset or payoff mode",
                    ));
                }
            }
        }
        if classes.len() > u8::MAX as usize || classes.iter().any(|(_, c)| *c > u8::MAX as usize) {
            return Err(Error::too_large("multiset size", n, u8::MAX));
        }
        let (values, denominator) = multiset.scaled_integers()?;
        let mut scaled = Vec::with_capacity(classes.len());
        let mut pos = 0;
        for (_, c) in &classes {
            scaled.push(values[pos]);
            pos += c;
        }
        Ok(Self {
            strategy,
            mode,
            scaled,
            initial_counts: classes.iter().map(|(_, c)| *c as u8).collect(),
            denominator,
            n,
        })
    }

    /// Class ids in sorted order, the first sequence in lexicographic order.
    fn sorted_sequence(&self) -> Vec<u8> {
        self.initial_counts
            .iter()
            .enumerate()
            .flat_map(|(k, &c)| std::iter::repeat_n(k as u8, c as usize))
            .collect()
    }

    /// Returns `(stop_index, scaled payoff)`.
    fn run(&self, seq: &[u8], remaining: &mut Vec<u8>) -> (usize, i64) {
        remaining.clear();
        remaining.extend_from_slice(&self.initial_counts);
        let m = self.n / 2;
        let mut prefix: i64 = 0;
        let mut minus = 0usize;
        let mut plus = 0usize;
        for (k, &class) in seq.iter().enumerate() {
            let index = k + 1;
            prefix += self.scaled[class as usize];
            remaining[class as usize] -= 1;
            if self.scaled[class as usize] < 0 {
                minus += 1;
            } else {
                plus += 1;
            }
            let gain = self.mode.gain(prefix);
            let decision = match self.strategy {
                Strategy::Threshold { t } => threshold_decide(self.oriented(minus, plus, m), *t),
                Strategy::Optimal(tables) => optimal_decide(self.oriented(minus, plus, m), tables),
                Strategy::Middle => middle_decide(index, self.n, &gain),
                Strategy::GeneralOptimal(policy) => policy.decide(remaining),
            };
            if decision == Decision::Stop {
                return (index, gain);
            }
        }
        (self.n, 0)
    }

    /// Binary state seen from the player's side: `i` counts the elements
    /// that raise the stop payoff.
    fn oriented(&self, minus: usize, plus: usize, m: usize) -> BinaryState {
        let (i, j) = match self.mode {
            PayoffMode::Suffix => (minus, plus),
            PayoffMode::Prefix => (plus, minus),
        };
        BinaryState { i, j, m }
    }

    fn payoff_rational(&self, scaled: i128) -> Rational {
        Rational::new(BigInt::from(scaled), self.denominator.clone())
    }

    fn payoff_f64(&self, scaled: i64) -> f64 {
        scaled as f64 / self.denominator.to_f64().unwrap_or(f64::INFINITY)
    }
}

/// Plays `strategy` on a given ordering, querying it after every reveal.
pub fn play(strategy: &Strategy, permutation: &[Rational], mode: PayoffMode) -> Result<GameRun> {
    let multiset = Multiset::new(permutation.to_vec())?;
    let game = Game::new(strategy, &multiset, mode)?;
    let classes = multiset.distinct_counts();
    let seq: Vec<u8> = permutation
        .iter()
        .map(|x| {
            classes
                .binary_search_by(|(v, _)| v.cmp(x))
                .expect("element of its own multiset") as u8
        })
        .collect();
    let (stop_index, _) = game.run(&seq, &mut Vec::new());
    Ok(GameRun {
        permutation: permutation.to_vec(),
        stop_index,
        payoff: payoff_at(permutation, stop_index, mode),
    })
}

/// Largest number of distinct orderings [`exact_expected_payoff`] will walk.
pub const ENUMERATION_LIMIT: u64 = 10_000_000;

/// `n! / prod(mult!)`, the number of distinct orderings of `multiset`.
pub fn distinct_permutation_count(multiset: &Multiset) -> BigCount {
    let mut count = BigCount::from(1u32);
    let mut placed = 0u64;
    for (_, c) in multiset.distinct_counts() {
        for k in 1..=c as u64 {
            placed += 1;
            count *= placed;
            count /= k;
        }
    }
    count
}

/// Steps `seq` to the next ordering in lexicographic order; false after the last.
fn next_permutation(seq: &mut [u8]) -> bool {
    let Some(i) = seq.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = seq
        .iter()
        .rposition(|&x| x > seq[i])
        .expect("pivot has a successor");
    seq.swap(i, j);
    seq[i + 1..].reverse();
    true
}

/// Exact expected payoff over a uniformly random ordering, by playing every
/// distinct ordering once. Orderings of a multiset are equally likely, so the
/// average over distinct ones is the expectation.
pub fn exact_expected_payoff(
    strategy: &Strategy,
    multiset: &Multiset,
    mode: PayoffMode,
) -> Result<Rational> {
    let count = distinct_permutation_count(multiset);
    if count > BigCount::from(ENUMERATION_LIMIT) {
        return Err(Error::too_large(
            "number of distinct orderings",
            count,
            ENUMERATION_LIMIT,
        ));
    }
    let game = Game::new(strategy, multiset, mode)?;
    let mut seq = game.sorted_sequence();
    let mut scratch = Vec::with_capacity(seq.len());
    let mut total: i128 = 0;
    let mut seen: u64 = 0;
    loop {
        total += game.run(&seq, &mut scratch).1 as i128;
        seen += 1;
        if !next_permutation(&mut seq) {
            break;
        }
    }
    debug_assert_eq!(BigCount::from(seen), count);
    Ok(game.payoff_rational(total) / Rational::from_integer(BigInt::from(seen)))
}

/// Aggregated Monte Carlo result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub strategy: String,
    pub n: usize,
    pub mode: PayoffMode,
    pub reps: u64,
    pub seed: u64,
    pub mean: f64,
    pub stderr: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
}

/// Replications per aggregation chunk. Fixed, so the summation order (and
/// hence every bit of the report) does not depend on the thread count.
const CHUNK: u64 = 4096;

#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    first: Neumaier,
    second: Neumaier,
}

/// Runs `reps` independent plays. Replication `r` plays the ordering
/// `shuffle(multiset, replication_seed(seed, r))`.
pub fn monte_carlo(
    strategy: &Strategy,
    multiset: &Multiset,
    mode: PayoffMode,
    reps: u64,
    seed: u64,
) -> Result<SimReport> {
    if reps == 0 {
        return Err(Error::domain("at least one replication is required"));
    }
    let game = Game::new(strategy, multiset, mode)?;
    let base = game.sorted_sequence();
    let chunks = reps.div_ceil(CHUNK);
    let partial: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut seq = base.clone();
            let mut scratch = Vec::with_capacity(base.len());
            let mut acc = Moments::default();
            for r in c * CHUNK..((c + 1) * CHUNK).min(reps) {
                seq.copy_from_slice(&base);
                SplitMix64::new(replication_seed(seed, r)).shuffle(&mut seq);
                let x = game.payoff_f64(game.run(&seq, &mut scratch).1);
                acc.first.add(x);
                acc.second.add(x * x);
            }
            acc
        })
        .collect();
    let mut first = Neumaier::default();
    let mut second = Neumaier::default();
    for p in &partial {
        first.add(p.first.sum);
        first.add(p.first.comp);
        second.add(p.second.sum);
        second.add(p.second.comp);
    }
    let nf = reps as f64;
    let mean = first.value() / nf;
    let stderr = if reps > 1 {
        let var = ((second.value() - first.value() * mean) / (nf - 1.0)).max(0.0);
        (var / nf).sqrt()
    } else {
        0.0
    };
    Ok(SimReport {
        strategy: strategy.name().to_string(),
        n: multiset.len(),
        mode,
        reps,
        seed,
        mean,
        stderr,
        exact: None,
    })
}

/// True when [`exact_expected_payoff`] would accept `multiset`.
pub fn enumeration_admits(multiset: &Multiset) -> bool {
    distinct_permutation_count(multiset) <= BigCount::from(ENUMERATION_LIMIT)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::{w1_exact, w3_exact};
    use crate::numeric::{int, ratio};
    use crate::strategies::general_optimal_value;

    fn seq(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn threshold_play_on_worked_sequence() {
        let run = play(
            &Strategy::Threshold { t: 1 },
            &seq(&[-1, 1, 1, 1, -1, 1, -1, -1]),
            PayoffMode::Suffix,
        )
        .unwrap();
        assert_eq!(run.stop_index, 1);
        assert_eq!(run.payoff, int(1));
        assert_eq!(run.recompute_payoff(PayoffMode::Suffix), run.payoff);
    }

    #[test]
    fn middle_play_with_zero_half_sum() {
        let run = play(
            &Strategy::Middle,
            &seq(&[1, -1, 1, -1, 1, 1, -1, -1]),
            PayoffMode::Prefix,
        )
        .unwrap();
        assert_eq!((run.stop_index, run.payoff), (8, int(0)));
        let run = play(
            &Strategy::Middle,
            &seq(&[1, 1, 1, -1, -1, 1, -1, -1]),
            PayoffMode::Prefix,
        )
        .unwrap();
        assert_eq!((run.stop_index, run.payoff), (4, int(2)));
    }

    #[test]
    fn optimal_never_stops_above_diagonal() {
        let tables = Arc::new(build_tables(4).unwrap());
        let run = play(
            &Strategy::Optimal(tables),
            &seq(&[1, 1, 1, 1, -1, -1, -1, -1]),
            PayoffMode::Suffix,
        )
        .unwrap();
        assert_eq!((run.stop_index, run.payoff), (8, int(0)));
    }

    #[test]
    fn binary_strategies_reject_other_input() {
        let m = Multiset::from_integers(&[-2, 1, 1]).unwrap();
        for s in [
            Strategy::Threshold { t: 1 },
            Strategy::optimal_for(&Multiset::binary(2), PayoffMode::Suffix).unwrap(),
        ] {
            assert!(matches!(
                exact_expected_payoff(&s, &m, PayoffMode::Suffix),
                Err(Error::Domain(_))
            ));
        }
        let t2 = Strategy::optimal_for(&Multiset::binary(2), PayoffMode::Suffix).unwrap();
        assert!(exact_expected_payoff(&t2, &Multiset::binary(3), PayoffMode::Suffix).is_err());
        assert!(play(&Strategy::Middle, &seq(&[1, 1]), PayoffMode::Prefix).is_err());
    }

    #[test]
    fn exact_expectations() {
        assert_eq!(
            exact_expected_payoff(&Strategy::Middle, &Multiset::binary(4), PayoffMode::Prefix)
                .unwrap(),
            ratio(18, 35)
        );
        assert_eq!(
            exact_expected_payoff(
                &Strategy::Threshold { t: 1 },
                &Multiset::binary(1),
                PayoffMode::Suffix
            )
            .unwrap(),
            ratio(1, 2)
        );
        let t2 = build_tables(2).unwrap();
        let v = t2.game_value().clone();
        assert_eq!(
            exact_expected_payoff(
                &Strategy::Optimal(Arc::new(t2)),
                &Multiset::binary(2),
                PayoffMode::Suffix
            )
            .unwrap(),
            v
        );
    }

    #[test]
    fn enumeration_matches_closed_forms() {
        for m in 1..=10usize {
            let b = Multiset::binary(m);
            assert_eq!(
                exact_expected_payoff(&Strategy::Middle, &b, PayoffMode::Prefix).unwrap(),
                w3_exact(2 * m as u64).unwrap(),
                "middle n={}",
                2 * m
            );
            assert_eq!(
                exact_expected_payoff(&Strategy::threshold_for(2 * m), &b, PayoffMode::Suffix)
                    .unwrap(),
                w1_exact(m as u64),
                "threshold m={m}"
            );
        }
    }

    #[test]
    fn dual_modes_agree_for_symmetric_rules() {
        for m in 1..=6usize {
            let b = Multiset::binary(m);
            for s in [
                Strategy::Middle,
                Strategy::threshold_for(2 * m),
                Strategy::optimal_for(&b, PayoffMode::Suffix).unwrap(),
            ] {
                assert_eq!(
                    exact_expected_payoff(&s, &b, PayoffMode::Suffix).unwrap(),
                    exact_expected_payoff(&s, &b, PayoffMode::Prefix).unwrap(),
                    "{} m={m}",
                    s.name()
                );
            }
        }
    }

    #[test]
    fn general_policy_matches_oracle() {
        for vals in [
            vec![-3, 1, 2],
            vec![-5, -1, 2, 4],
            vec![-2, -2, 0, 1, 3],
            vec![-4, -1, 1, 1, 1, 2],
        ] {
            let m = Multiset::from_integers(&vals).unwrap();
            for mode in [PayoffMode::Suffix, PayoffMode::Prefix] {
                let s = Strategy::optimal_for(&m, mode).unwrap();
                assert_eq!(
                    exact_expected_payoff(&s, &m, mode).unwrap(),
                    general_optimal_value(&m, mode).unwrap()
                );
            }
        }
        let m = Multiset::from_integers(&[-3, 1, 2]).unwrap();
        let s = Strategy::optimal_for(&m, PayoffMode::Suffix).unwrap();
        assert!(exact_expected_payoff(&s, &m, PayoffMode::Prefix).is_err());
    }

    #[test]
    fn rational_elements_scale_exactly() {
        let m =
            crate::multiset::parse_multiset("-5/2\n-5/2\n-5/2\n-5/2\n5/2\n5/2\n5/2\n5/2").unwrap();
        assert_eq!(
            exact_expected_payoff(&Strategy::Middle, &m, PayoffMode::Prefix).unwrap(),
            ratio(9, 7)
        );
    }

    #[test]
    fn permutation_counts() {
        assert_eq!(
            distinct_permutation_count(&Multiset::binary(6)),
            BigCount::from(924u32)
        );
        let m = Multiset::from_integers(&[-5, -3, -3, 1, 1, 1, 2, 6]).unwrap();
        assert_eq!(distinct_permutation_count(&m), BigCount::from(3360u32));
        assert!(enumeration_admits(&Multiset::binary(12)));
        assert!(!enumeration_admits(&Multiset::binary(13)));
        assert!(matches!(
            exact_expected_payoff(&Strategy::Middle, &Multiset::binary(13), PayoffMode::Prefix),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn next_permutation_walks_all_orders() {
        let mut s = vec![0u8, 0, 1, 2];
        let mut n = 1;
        while next_permutation(&mut s) {
            n += 1;
        }
        assert_eq!(n, 12);
        assert_eq!(s, vec![2, 1, 0, 0]);
    }

    #[test]
    fn shuffle_is_deterministic() {
        let pair = Multiset::binary(1);
        assert_eq!(shuffle(&pair, 42), shuffle(&pair, 42));
        let single = Multiset::from_integers(&[0]).unwrap();
        assert_eq!(shuffle(&single, 9), vec![int(0)]);
    }

    #[test]
    fn replication_reproducible_by_hand() {
        let b = Multiset::binary(5);
        let s = Strategy::threshold_for(10);
        let report = monte_carlo(&s, &b, PayoffMode::Suffix, 1, 77).unwrap();
        let run = play(
            &s,
            &shuffle(&b, replication_seed(77, 0)),
            PayoffMode::Suffix,
        )
        .unwrap();
        assert_eq!(report.mean, crate::numeric::to_f64(&run.payoff));
        assert_eq!(report.stderr, 0.0);
    }

    #[test]
    fn monte_carlo_near_exact() {
        let b = Multiset::binary(4);
        let r = monte_carlo(&Strategy::Middle, &b, PayoffMode::Prefix, 20_000, 3).unwrap();
        let exact = 18.0 / 35.0;
        assert!((r.mean - exact).abs() <= 4.0 * r.stderr, "{r:?}");
        let again = monte_carlo(&Strategy::Middle, &b, PayoffMode::Prefix, 20_000, 3).unwrap();
        assert_eq!(r, again);
        assert!(monte_carlo(&Strategy::Middle, &b, PayoffMode::Prefix, 0, 3).is_err());
    }

    #[test]
    fn thread_count_does_not_change_report() {
        let b = Multiset::binary(8);
        let s = Strategy::optimal_for(&b, PayoffMode::Suffix).unwrap();
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| monte_carlo(&s, &b, PayoffMode::Suffix, 30_000, 11).unwrap());
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| monte_carlo(&s, &b, PayoffMode::Suffix, 30_000, 11).unwrap());
        assert_eq!(one, four);
    }
}
