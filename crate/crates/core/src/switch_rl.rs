//! Learning when to switch from exploration to goal seeking.
//!
//! The learner picks a coverage threshold (20..60 %) every decision period.
//! State is the pair (coverage bucket, distance bucket), 10 × 5 = 50 states;
//! values live in a 50 × 5 table updated by one-step Q-learning with
//! `alpha = 0.1`, `gamma = 0.9` and epsilon-greedy selection at `epsilon = 0.1`.
//!
//! The episode objective is the sum of a step-efficiency term, a coverage
//! term and a switch-timing term ([`terminal_reward`]). Intermediate
//! decisions are credited with the change in the potential
//! `Φ(steps, c) = 50·(1 − steps/limit) + 30·c/100` plus the switch-timing
//! term once, in the interval where the switch happened. Summed over an
//! episode this telescopes to `total − Φ(0, 0)`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;

pub const COVERAGE_BUCKETS: usize = 10;
pub const DISTANCE_BUCKETS: usize = 5;
pub const STATE_COUNT: usize = COVERAGE_BUCKETS * DISTANCE_BUCKETS;
pub const ACTION_COUNT: usize = 5;

pub const ALPHA: f64 = 0.1;
pub const GAMMA: f64 = 0.9;
pub const EPSILON: f64 = 0.1;

const STEP_WEIGHT: f64 = 50.0;
const COVERAGE_WEIGHT: f64 = 30.0;
const SWITCH_BONUS: f64 = 10.0;
const SWITCH_PENALTY: f64 = -5.0;

/// Discretized learner state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RlState {
    pub coverage_bucket: u8,
    pub distance_bucket: u8,
}

impl RlState {
    /// Row of the Q-table: `coverage_bucket * 5 + distance_bucket`.
    pub fn id(self) -> usize {
        self.coverage_bucket as usize * DISTANCE_BUCKETS + self.distance_bucket as usize
    }

    pub fn from_id(id: usize) -> Self {
        assert!(id < STATE_COUNT, "state id {id} out of range");
        RlState { coverage_bucket: (id / DISTANCE_BUCKETS) as u8, distance_bucket: (id % DISTANCE_BUCKETS) as u8 }
    }
}

/// One of the five switching thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u32", try_from = "u32")]
pub struct Threshold(u8);

impl Threshold {
    pub const ALL: [Threshold; ACTION_COUNT] = [Threshold(0), Threshold(1), Threshold(2), Threshold(3), Threshold(4)];

    /// The fixed-variant threshold, also the learner's starting threshold.
    pub const BASELINE: Threshold = Threshold(2);

    pub fn from_index(i: usize) -> Self {
        assert!(i < ACTION_COUNT, "action index {i} out of range");
        Threshold(i as u8)
    }

    pub fn from_percent(p: u32) -> Option<Self> {
        Threshold::ALL.into_iter().find(|t| t.percent() == p)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn percent(self) -> u32 {
        20 + 10 * self.0 as u32
    }
}

impl From<Threshold> for u32 {
    fn from(t: Threshold) -> u32 {
        t.percent()
    }
}

impl TryFrom<u32> for Threshold {
    type Error = String;

    fn try_from(p: u32) -> std::result::Result<Self, String> {
        Threshold::from_percent(p).ok_or_else(|| format!("{p}% is not a switching threshold"))
    }
}

/// Maps coverage `c` (percent) and Manhattan distance `d` on an `n`×`n` maze
/// to a state. Both buckets are clamped to their top value.
///
/// # Panics
///
/// When `c` is outside `[0, 100]` or `d > 2n`.
pub fn discretize(c: f64, d: u32, n: usize) -> RlState {
    assert!((0.0..=100.0).contains(&c), "coverage {c} outside [0, 100]");
    let d_max = 2 * n as u64;
    assert!(d as u64 <= d_max, "distance {d} exceeds 2n = {d_max}");
    let coverage_bucket = ((c / 10.0).floor() as usize).min(COVERAGE_BUCKETS - 1);
    // floor(d / d_max * 5), in integers.
    let distance_bucket = ((d as u64 * DISTANCE_BUCKETS as u64 / d_max) as usize).min(DISTANCE_BUCKETS - 1);
    RlState { coverage_bucket: coverage_bucket as u8, distance_bucket: distance_bucket as u8 }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub r_steps: f64,
    pub r_coverage: f64,
    pub r_switching: f64,
    pub total: f64,
}

/// Switch-timing component: +10 inside [30, 50] %, −5 below 20 % or above
/// 60 %, zero otherwise and when no switch happened.
pub fn switch_timing_reward(c_switch: Option<f64>) -> f64 {
    match c_switch {
        None => 0.0,
        Some(c) if (30.0..=50.0).contains(&c) => SWITCH_BONUS,
        Some(c) if !(20.0..=60.0).contains(&c) => SWITCH_PENALTY,
        Some(_) => 0.0,
    }
}

/// Whole-episode objective.
pub fn terminal_reward(n_steps: u64, n_limit: u64, c_final: f64, c_switch: Option<f64>) -> RewardBreakdown {
    assert!(n_limit > 0, "step limit must be positive");
    let r_steps = STEP_WEIGHT * (1.0 - n_steps as f64 / n_limit as f64);
    let r_coverage = COVERAGE_WEIGHT * c_final / 100.0;
    let r_switching = switch_timing_reward(c_switch);
    RewardBreakdown { r_steps, r_coverage, r_switching, total: r_steps + r_coverage + r_switching }
}

/// Episode progress at a decision boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Progress {
    pub steps: u64,
    pub coverage: f64,
}

impl Progress {
    pub const START: Progress = Progress { steps: 0, coverage: 0.0 };

    /// Step and coverage terms of the objective, as if the episode ended here.
    pub fn potential(self, n_limit: u64) -> f64 {
        STEP_WEIGHT * (1.0 - self.steps as f64 / n_limit as f64) + COVERAGE_WEIGHT * self.coverage / 100.0
    }
}

/// Reward for the interval `prev → cur`: potential difference plus
/// `switch_bonus` (the switch-timing term, or 0 outside the switch interval).
pub fn decision_reward(prev: Progress, cur: Progress, n_limit: u64, switch_bonus: f64) -> f64 {
    debug_assert!(prev.steps <= cur.steps);
    cur.potential(n_limit) - prev.potential(n_limit) + switch_bonus
}

/// 50 × 5 action values with their own exploration stream.
#[derive(Debug, Clone)]
pub struct QTable {
    values: [[f64; ACTION_COUNT]; STATE_COUNT],
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    rng: Stream,
}

impl QTable {
    pub fn new(rng_seed: u64) -> Self {
        QTable {
            values: [[0.0; ACTION_COUNT]; STATE_COUNT],
            alpha: ALPHA,
            gamma: GAMMA,
            epsilon: EPSILON,
            rng: Stream::new(rng_seed),
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn get(&self, s: RlState, a: Threshold) -> f64 {
        self.values[s.id()][a.index()]
    }

    pub fn set(&mut self, s: RlState, a: Threshold, v: f64) {
        assert!(v.is_finite());
        self.values[s.id()][a.index()] = v;
    }

    pub fn row(&self, s: RlState) -> &[f64; ACTION_COUNT] {
        &self.values[s.id()]
    }

    pub fn values(&self) -> &[[f64; ACTION_COUNT]; STATE_COUNT] {
        &self.values
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().flatten().all(|v| v.is_finite())
    }

    /// Highest-valued action; ties go to the lowest threshold.
    pub fn greedy(&self, s: RlState) -> Threshold {
        let row = self.row(s);
        let mut best = 0;
        for (i, v) in row.iter().enumerate().skip(1) {
            if *v > row[best] {
                best = i;
            }
        }
        Threshold::from_index(best)
    }

    pub fn max_value(&self, s: RlState) -> f64 {
        self.row(s).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Epsilon-greedy choice. Always consumes one uniform draw, plus one
    /// index draw when exploring.
    pub fn select_action(&mut self, s: RlState) -> Threshold {
        if self.rng.chance(self.epsilon) {
            Threshold::from_index(self.rng.below(ACTION_COUNT as u64) as usize)
        } else {
            self.greedy(s)
        }
    }

    /// One-step Q-learning update. `next = None` marks the terminal
    /// transition, whose bootstrap term is zero.
    ///
    /// # Panics
    ///
    /// On a non-finite reward.
    pub fn update(&mut self, s: RlState, a: Threshold, reward: f64, next: Option<RlState>) {
        assert!(reward.is_finite(), "non-finite reward {reward}");
        let bootstrap = next.map_or(0.0, |s2| self.max_value(s2));
        let q = &mut self.values[s.id()][a.index()];
        *q += self.alpha * (reward + self.gamma * bootstrap - *q);
    }

    /// 50 lines of 5 space-separated values, row = state id, column = action index.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for row in &self.values {
            let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    /// Parses a [`dump`](Self::dump). The exploration stream is reseeded from `rng_seed`.
    pub fn parse_dump(text: &str, rng_seed: u64) -> Result<Self> {
        let mut table = QTable::new(rng_seed);
        let rows: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        if rows.len() != STATE_COUNT {
            return Err(Error::QTableFormat { line: rows.len(), msg: format!("expected {STATE_COUNT} rows") });
        }
        for (i, row) in rows.iter().enumerate() {
            let cells: Vec<&str> = row.split_whitespace().collect();
            if cells.len() != ACTION_COUNT {
                return Err(Error::QTableFormat { line: i + 1, msg: format!("expected {ACTION_COUNT} values") });
            }
            for (j, c) in cells.iter().enumerate() {
                let v: f64 = c.parse().map_err(|e| Error::QTableFormat { line: i + 1, msg: format!("{c:?}: {e}") })?;
                if !v.is_finite() {
                    return Err(Error::QTableFormat { line: i + 1, msg: format!("non-finite value {c}") });
                }
                table.values[i][j] = v;
            }
        }
        Ok(table)
    }
}
