//! Stopping rules as pure decisions, the exact backward-induction tables for
//! the binary game, and a backward-induction oracle for arbitrary multisets.

use std::collections::HashMap;
use std::io::Write;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::combinatorics::threshold_value;
use crate::error::{Error, Result};
use crate::multiset::{Multiset, PayoffMode};
use crate::numeric::{format_rational, int, ratio, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Stop,
    Continue,
}

/// What the table does when stopping and continuing are worth the same.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieRule {
    #[default]
    Stop,
    Continue,
}

/// `i` minus-ones and `j` plus-ones revealed out of `m` each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BinaryState {
    pub i: usize,
    pub j: usize,
    pub m: usize,
}

impl BinaryState {
    pub fn new(i: usize, j: usize, m: usize) -> Result<Self> {
        if i > m || j > m {
            return Err(Error::domain(format!(
                "state ({i}, {j}) lies outside the {m}x{m} grid"
            )));
        }
        Ok(Self { i, j, m })
    }

    /// Payoff for stopping here in the suffix game.
    pub fn stop_payoff(&self) -> i64 {
        self.i as i64 - self.j as i64
    }

    pub fn is_final(&self) -> bool {
        self.i == self.m && self.j == self.m
    }
}

/// Stop once the walk has reached `y = x - t`, i.e. `i - j >= t`.
pub fn threshold_decide(state: BinaryState, t: u64) -> Decision {
    if state.stop_payoff() >= t as i64 {
        Decision::Stop
    } else {
        Decision::Continue
    }
}

/// Threshold to use when the length is only known to lie in `[N, 2N]`: the
/// usual threshold computed as if the length were exactly `N`.
pub fn approx_threshold(n_estimate: u64) -> Result<u64> {
    if n_estimate < 2 || n_estimate % 2 == 1 {
        return Err(Error::domain(format!(
            "length estimate must be even and at least 2, got {n_estimate}"
        )));
    }
    Ok(threshold_value(n_estimate / 2))
}

/// Stop-in-the-middle: look once, after `n/2` reveals, and stop iff the
/// payoff available then is positive.
pub fn middle_decide<T: Zero + PartialOrd>(index: usize, n: usize, gain: &T) -> Decision {
    if index == n / 2 && *gain > T::zero() {
        Decision::Stop
    } else {
        Decision::Continue
    }
}

pub fn optimal_decide(state: BinaryState, tables: &StrategyTables) -> Decision {
    debug_assert_eq!(state.m, tables.m);
    if tables.stops(state.i, state.j) {
        Decision::Stop
    } else {
        Decision::Continue
    }
}

/// Largest half-length accepted by [`build_tables`]. Tables are dense, so
/// this is also the memory ceiling: `(m + 1)^2` exact rationals.
pub const MAX_TABLE_HALF_LENGTH: usize = 4096;

/// Expected optimal payoff `T[i, j]` from each state of the binary game and
/// the stop/continue choice `S[i, j]` that achieves it.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyTables {
    m: usize,
    values: Vec<Rational>,
    stops: Vec<bool>,
    ties: Vec<(usize, usize)>,
    tie_rule: TieRule,
}

pub fn build_tables(m: usize) -> Result<StrategyTables> {
    build_tables_with(m, TieRule::Stop)
}

/// Fills `T` backwards from the known last row and column:
///
/// `T[i, j] = max(i - j, p0 T[i+1, j] + p1 T[i, j+1])` with
/// `p0 = (m - i) / (2m - i - j)` and `p1 = (m - j) / (2m - i - j)`.
pub fn build_tables_with(m: usize, tie_rule: TieRule) -> Result<StrategyTables> {
    if m == 0 {
        return Err(Error::domain("half-length must be at least 1"));
    }
    if m > MAX_TABLE_HALF_LENGTH {
        return Err(Error::too_large(
            "table half-length",
            m,
            MAX_TABLE_HALF_LENGTH,
        ));
    }
    let w = m + 1;
    let mut values = vec![Rational::zero(); w * w];
    let mut stops = vec![false; w * w];
    let mut ties = Vec::new();
    let idx = |i: usize, j: usize| i * w + j;

    for j in 0..=m {
        values[idx(m, j)] = int((m - j) as i64);
        stops[idx(m, j)] = true;
    }
    // T[i, m] = 0 already; continuing to the end beats a negative stop.
    for i in (0..m).rev() {
        for j in (0..m).rev() {
            let left = (2 * m - i - j) as i64;
            let p0 = ratio((m - i) as i64, left);
            let p1 = ratio((m - j) as i64, left);
            let cont = p0 * &values[idx(i + 1, j)] + p1 * &values[idx(i, j + 1)];
            let stop = int(i as i64 - j as i64);
            let stop_here = match stop.cmp(&cont) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Less => false,
                std::cmp::Ordering::Equal => {
                    ties.push((i, j));
                    tie_rule == TieRule::Stop
                }
            };
            stops[idx(i, j)] = stop_here;
            values[idx(i, j)] = if stop_here { stop } else { cont };
        }
    }
    Ok(StrategyTables {
        m,
        values,
        stops,
        ties,
        tie_rule,
    })
}

impl StrategyTables {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn value(&self, i: usize, j: usize) -> &Rational {
        &self.values[i * (self.m + 1) + j]
    }

    pub fn stops(&self, i: usize, j: usize) -> bool {
        self.stops[i * (self.m + 1) + j]
    }

    /// `T[0, 0]`, the value of the game under optimal play.
    pub fn game_value(&self) -> &Rational {
        self.value(0, 0)
    }

    /// States where stopping and continuing were worth exactly the same.
    pub fn ties(&self) -> &[(usize, usize)] {
        &self.ties
    }

    pub fn tie_rule(&self) -> TieRule {
        self.tie_rule
    }

    /// Stopping states that optimal play can actually arrive at, i.e. those
    /// reachable from `(0, 0)` through continuing states only. Sorted.
    pub fn reachable_stops(&self) -> Vec<(usize, usize)> {
        let m = self.m;
        let mut reached = vec![false; (m + 1) * (m + 1)];
        reached[0] = true;
        let mut out = Vec::new();
        for i in 0..=m {
            for j in 0..=m {
                if !reached[i * (m + 1) + j] {
                    continue;
                }
                if self.stops(i, j) {
                    out.push((i, j));
                    continue;
                }
                if i < m {
                    reached[(i + 1) * (m + 1) + j] = true;
                }
                if j < m {
                    reached[i * (m + 1) + j + 1] = true;
                }
            }
        }
        out
    }

    /// `T` as CSV: header `i\j,0,...,m`, then one row per `i`.
    pub fn write_values_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        self.write_csv(out, |i, j| format_rational(self.value(i, j)))
    }

    /// `S` as CSV with 0/1 entries, same layout as [`Self::write_values_csv`].
    pub fn write_stops_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        self.write_csv(out, |i, j| {
            if self.stops(i, j) { "1" } else { "0" }.to_string()
        })
    }

    fn write_csv<W: Write>(
        &self,
        out: &mut W,
        cell: impl Fn(usize, usize) -> String,
    ) -> std::io::Result<()> {
        write!(out, "i\\j")?;
        for j in 0..=self.m {
            write!(out, ",{j}")?;
        }
        writeln!(out)?;
        for i in 0..=self.m {
            write!(out, "{i}")?;
            for j in 0..=self.m {
                write!(out, ",{}", cell(i, j))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Largest multiset accepted by the general backward-induction oracle.
pub const GENERAL_ORACLE_MAX: usize = 18;

/// Optimal stop/continue choice for every remaining-multiset state of one
/// zero-sum multiset under one payoff mode.
///
/// States are keyed by the remaining multiplicity of each distinct value,
/// in increasing value order.
#[derive(Debug, Clone)]
pub struct OptimalPolicy {
    distinct: Vec<Rational>,
    full: Vec<u8>,
    mode: PayoffMode,
    memo: HashMap<Vec<u8>, (Rational, bool)>,
}

impl OptimalPolicy {
    pub fn build(multiset: &Multiset, mode: PayoffMode) -> Result<Self> {
        if multiset.len() > GENERAL_ORACLE_MAX {
            return Err(Error::too_large(
                "multiset size for the optimal-value oracle",
                multiset.len(),
                GENERAL_ORACLE_MAX,
            ));
        }
        let (distinct, full): (Vec<Rational>, Vec<u8>) = multiset
            .distinct_counts()
            .into_iter()
            .map(|(v, c)| (v, c as u8))
            .unzip();
        let mut policy = Self {
            distinct,
            full: full.clone(),
            mode,
            memo: HashMap::new(),
        };
        policy.solve(full);
        Ok(policy)
    }

    fn solve(&mut self, remaining: Vec<u8>) -> Rational {
        if let Some((v, _)) = self.memo.get(&remaining) {
            return v.clone();
        }
        let left: usize = remaining.iter().map(|&c| c as usize).sum();
        let rest_sum: Rational = remaining
            .iter()
            .zip(&self.distinct)
            .filter(|(c, _)| **c > 0)
            .map(|(&c, v)| v * int(c as i64))
            .sum();
        let stop = match self.mode {
            PayoffMode::Suffix => rest_sum,
            PayoffMode::Prefix => -rest_sum,
        };
        let entry = if left == 0 {
            (stop, true)
        } else {
            let mut cont = Rational::zero();
            for k in 0..remaining.len() {
                if remaining[k] == 0 {
                    continue;
                }
                let weight = remaining[k] as i64;
                let mut next = remaining.clone();
                next[k] -= 1;
                cont += self.solve(next) * int(weight);
            }
            cont /= int(left as i64);
            if stop >= cont {
                (stop, true)
            } else {
                (cont, false)
            }
        };
        let value = entry.0.clone();
        self.memo.insert(remaining, entry);
        value
    }

    /// Value of the game from the start.
    pub fn value(&self) -> &Rational {
        &self.memo[&self.full].0
    }

    pub fn mode(&self) -> PayoffMode {
        self.mode
    }

    /// Distinct values, in the order used by state keys.
    pub fn distinct_values(&self) -> &[Rational] {
        &self.distinct
    }

    pub fn full_counts(&self) -> &[u8] {
        &self.full
    }

    /// Decision in the state where `remaining` is still unrevealed.
    pub fn decide(&self, remaining: &[u8]) -> Decision {
        match self.memo.get(remaining) {
            Some((_, true)) => Decision::Stop,
            _ => Decision::Continue,
        }
    }

    pub fn state_count(&self) -> usize {
        self.memo.len()
    }
}

/// Optimal expected payoff on a random permutation of `multiset`, by
/// backward induction over remaining-multiset states.
pub fn general_optimal_value(multiset: &Multiset, mode: PayoffMode) -> Result<Rational> {
    Ok(OptimalPolicy::build(multiset, mode)?.value().clone())
}

/// True when every stopping state except `(m, m)` lies strictly below the
/// diagonal (`i > j`).
pub fn stops_below_diagonal(tables: &StrategyTables) -> bool {
    let m = tables.m();
    (0..=m).all(|i| (0..=m).all(|j| !tables.stops(i, j) || (i == m && j == m) || i > j))
}

/// `T[i, j] >= max(i - j, 0)` everywhere.
pub fn dominates_stop_payoff(tables: &StrategyTables) -> bool {
    let m = tables.m();
    (0..=m).all(|i| {
        (0..=m).all(|j| {
            let v = tables.value(i, j);
            !v.is_negative() && *v >= int(i as i64 - j as i64)
        })
    })
}
