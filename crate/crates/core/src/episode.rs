//! One agent run from the start corner to the centre.
//!
//! Every step the agent either advances the spiral (coverage phase) or
//! follows its A* plan (convergence phase), then senses its new cell's
//! neighbourhood. The switch between the phases is one-way and happens on
//! the first step where coverage reaches the active threshold:
//!
//! | convergence | threshold                                       |
//! |-------------|-------------------------------------------------|
//! | `none`      | never switches                                  |
//! | `fixed`     | 40 %                                            |
//! | `rl`        | 40 % until the first decision, then the learner |
//!
//! Learner decisions happen every `decision_period` steps while in the
//! coverage phase. Each decision first credits the previous (state, action)
//! pair with the interval's shaped reward, then selects the next threshold.
//! When the episode ends the last pair receives a terminal update.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::convergence::{astar_plan, follow_plan, FollowOutcome, Plan};
use crate::coverage::{spiral_next, MemoryMode, SpiralState};
use crate::error::{Error, Result};
use crate::grid::{coverage_percent, generate_maze, manhattan, KnowledgeMap, MazeGrid, Position};
use crate::switch_rl::{
    decision_reward, discretize, switch_timing_reward, terminal_reward, Progress, QTable, RewardBreakdown, RlState,
    Threshold,
};

pub const DEFAULT_DECISION_PERIOD: u64 = 50;

/// Mixed into the maze seed to derive the learner's exploration stream.
pub const RL_STREAM_SALT: u64 = 0x5157_4954_4348_524c;

/// Default step budget for an `n`×`n` maze: `4n²`.
pub fn default_step_limit(n: usize) -> u64 {
    4 * (n * n) as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseExplorer {
    Spiral,
    Sentinel,
}

impl BaseExplorer {
    pub fn memory_mode(self) -> MemoryMode {
        match self {
            BaseExplorer::Spiral => MemoryMode::FullMemory,
            BaseExplorer::Sentinel => MemoryMode::sentinel(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceMode {
    None,
    Fixed,
    Rl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VariantSpec {
    pub base: BaseExplorer,
    pub convergence: ConvergenceMode,
}

impl VariantSpec {
    pub const fn new(base: BaseExplorer, convergence: ConvergenceMode) -> Self {
        VariantSpec { base, convergence }
    }

    /// The six agents, in reporting order.
    pub const ALL: [VariantSpec; 6] = [
        VariantSpec::new(BaseExplorer::Spiral, ConvergenceMode::None),
        VariantSpec::new(BaseExplorer::Spiral, ConvergenceMode::Fixed),
        VariantSpec::new(BaseExplorer::Spiral, ConvergenceMode::Rl),
        VariantSpec::new(BaseExplorer::Sentinel, ConvergenceMode::None),
        VariantSpec::new(BaseExplorer::Sentinel, ConvergenceMode::Fixed),
        VariantSpec::new(BaseExplorer::Sentinel, ConvergenceMode::Rl),
    ];

    pub fn label(self) -> &'static str {
        match (self.base, self.convergence) {
            (BaseExplorer::Spiral, ConvergenceMode::None) => "spiral",
            (BaseExplorer::Spiral, ConvergenceMode::Fixed) => "spiral-conv",
            (BaseExplorer::Spiral, ConvergenceMode::Rl) => "spiral-rl",
            (BaseExplorer::Sentinel, ConvergenceMode::None) => "sentinel",
            (BaseExplorer::Sentinel, ConvergenceMode::Fixed) => "sentinel-conv",
            (BaseExplorer::Sentinel, ConvergenceMode::Rl) => "sentinel-rl",
        }
    }

    pub fn ordinal(self) -> usize {
        VariantSpec::ALL.iter().position(|v| *v == self).expect("all variants are listed")
    }
}

impl fmt::Display for VariantSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for VariantSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        VariantSpec::ALL
            .into_iter()
            .find(|v| v.label() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown variant {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    pub n: usize,
    pub maze_seed: u64,
    pub variant: VariantSpec,
    pub rl_seed: u64,
    pub step_limit: u64,
    pub decision_period: u64,
}

impl EpisodeConfig {
    /// Defaults: `rl_seed = maze_seed ^ RL_STREAM_SALT`, `step_limit = 4n²`,
    /// decision period 50.
    pub fn new(n: usize, maze_seed: u64, variant: VariantSpec) -> Self {
        EpisodeConfig {
            n,
            maze_seed,
            variant,
            rl_seed: maze_seed ^ RL_STREAM_SALT,
            step_limit: default_step_limit(n),
            decision_period: DEFAULT_DECISION_PERIOD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.step_limit == 0 {
            return Err(Error::Config("step_limit must be positive".into()));
        }
        if self.decision_period == 0 {
            return Err(Error::Config("decision_period must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub step: u64,
    pub state: RlState,
    pub action: Threshold,
    /// Credit assigned at this step to the previous (state, action).
    pub reward: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchEvent {
    pub step: u64,
    pub coverage: f64,
    pub threshold: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    StepLimitExceeded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub config: EpisodeConfig,
    pub outcome: Outcome,
    pub total_steps: u64,
    pub final_coverage: f64,
    pub role_switches: u32,
    pub replans: u32,
    pub switch: Option<SwitchEvent>,
    pub decisions: Vec<Decision>,
    /// Reward of the terminal update (learner variants only).
    pub closing_credit: Option<f64>,
    pub terminal_reward: Option<RewardBreakdown>,
    pub trajectory: Vec<Position>,
}

impl EpisodeLog {
    /// Sum of all per-interval credits, including the terminal one.
    pub fn credited_reward(&self) -> f64 {
        self.decisions.iter().map(|d| d.reward).sum::<f64>() + self.closing_credit.unwrap_or(0.0)
    }

    pub fn to_json_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub steps: u64,
    pub coverage: f64,
    pub switches: u32,
    pub outcome: Outcome,
}

pub fn metrics(log: &EpisodeLog) -> EpisodeMetrics {
    EpisodeMetrics {
        steps: log.total_steps,
        coverage: log.final_coverage,
        switches: log.role_switches,
        outcome: log.outcome,
    }
}

pub fn run_episode(cfg: &EpisodeConfig) -> Result<EpisodeLog> {
    let maze = generate_maze(cfg.n, cfg.maze_seed)?;
    run_on_maze(cfg, &maze).map(|(log, _)| log)
}

/// Like [`run_episode`], also returning the learner's final table.
pub fn run_episode_with_table(cfg: &EpisodeConfig) -> Result<(EpisodeLog, Option<QTable>)> {
    let maze = generate_maze(cfg.n, cfg.maze_seed)?;
    run_on_maze(cfg, &maze)
}

struct Learner {
    table: QTable,
    state: RlState,
    action: Threshold,
    last: Progress,
}

enum Phase {
    Coverage(SpiralState),
    Convergence(Plan),
}

/// Runs `cfg` on an explicit maze (its size must equal `cfg.n`).
pub fn run_on_maze(cfg: &EpisodeConfig, maze: &MazeGrid) -> Result<(EpisodeLog, Option<QTable>)> {
    cfg.validate()?;
    if maze.size() != cfg.n {
        return Err(Error::Config(format!("maze is {0}x{0}, config says {1}", maze.size(), cfg.n)));
    }
    let n = cfg.n;
    let target = maze.target();
    let mode = cfg.variant.base.memory_mode();

    let mut knowledge = KnowledgeMap::new(n);
    let mut pos = maze.start();
    mode.record_visit(&mut knowledge, pos);
    knowledge.sense(maze, pos);
    let mut trajectory = vec![pos];
    let mut steps: u64 = 0;

    let mut threshold = match cfg.variant.convergence {
        ConvergenceMode::None => None,
        ConvergenceMode::Fixed | ConvergenceMode::Rl => Some(Threshold::BASELINE),
    };
    let mut learner = (cfg.variant.convergence == ConvergenceMode::Rl).then(|| Learner {
        table: QTable::new(cfg.rl_seed),
        state: discretize(coverage_percent(&knowledge, n), manhattan(pos, target), n),
        action: Threshold::BASELINE,
        last: Progress::START,
    });
    let mut decisions = Vec::new();
    let mut switch = None;
    let mut replans = 0u32;
    let mut phase = Phase::Coverage(SpiralState::new(mode));

    let outcome = loop {
        if pos == target {
            break Outcome::Success;
        }
        if steps >= cfg.step_limit {
            break Outcome::StepLimitExceeded;
        }

        pos = match &mut phase {
            Phase::Coverage(spiral) => spiral_next(spiral, maze, &mut knowledge)?,
            Phase::Convergence(plan) => loop {
                match follow_plan(plan, maze, &mut knowledge) {
                    FollowOutcome::Advanced(p) | FollowOutcome::Arrived(p) => break p,
                    FollowOutcome::ReplanNeeded => {
                        *plan = astar_plan(pos, target, &knowledge)?;
                        replans += 1;
                    }
                }
            },
        };
        steps += 1;
        mode.record_visit(&mut knowledge, pos);
        knowledge.sense(maze, pos);
        trajectory.push(pos);

        if pos == target || !matches!(phase, Phase::Coverage(_)) {
            continue;
        }

        if let Some(l) = learner.as_mut() {
            if steps.is_multiple_of(cfg.decision_period) {
                let coverage = coverage_percent(&knowledge, n);
                let now = Progress { steps, coverage };
                let next_state = discretize(coverage, manhattan(pos, target), n);
                let reward = decision_reward(l.last, now, cfg.step_limit, 0.0);
                l.table.update(l.state, l.action, reward, Some(next_state));
                let action = l.table.select_action(next_state);
                decisions.push(Decision { step: steps, state: next_state, action, reward });
                l.state = next_state;
                l.action = action;
                l.last = now;
                threshold = Some(action);
            }
        }

        if let Some(t) = threshold {
            if knowledge.coverage_at_least(t.percent()) {
                switch = Some(SwitchEvent {
                    step: steps,
                    coverage: coverage_percent(&knowledge, n),
                    threshold: t.percent(),
                });
                phase = Phase::Convergence(astar_plan(pos, target, &knowledge)?);
            }
        }
    };

    let final_coverage = coverage_percent(&knowledge, n);
    let c_switch = switch.map(|s| s.coverage);
    let mut closing_credit = None;
    let mut terminal = None;
    if let Some(l) = learner.as_mut() {
        let now = Progress { steps, coverage: final_coverage };
        let reward = decision_reward(l.last, now, cfg.step_limit, switch_timing_reward(c_switch));
        l.table.update(l.state, l.action, reward, None);
        closing_credit = Some(reward);
        terminal = Some(terminal_reward(steps, cfg.step_limit, final_coverage, c_switch));
    }

    let log = EpisodeLog {
        config: cfg.clone(),
        outcome,
        total_steps: steps,
        final_coverage,
        role_switches: switch.is_some() as u32,
        replans,
        switch,
        decisions,
        closing_credit,
        terminal_reward: terminal,
        trajectory,
    };
    Ok((log, learner.map(|l| l.table)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, seed: u64, v: &str) -> EpisodeConfig {
        EpisodeConfig::new(n, seed, v.parse().unwrap())
    }

    #[test]
    fn variant_labels_round_trip() {
        for v in VariantSpec::ALL {
            assert_eq!(v.label().parse::<VariantSpec>().unwrap(), v);
        }
        assert!("spiral-fast".parse::<VariantSpec>().is_err());
    }

    #[test]
    fn invalid_config_rejected() {
        let mut c = cfg(16, 1, "spiral");
        c.step_limit = 0;
        assert!(matches!(run_episode(&c), Err(Error::Config(_))));
        let mut c = cfg(16, 1, "spiral");
        c.decision_period = 0;
        assert!(run_episode(&c).is_err());
        assert!(run_episode(&cfg(15, 1, "spiral")).is_err());
    }

    #[test]
    fn pure_spiral_never_switches() {
        let log = run_episode(&cfg(16, 1, "spiral")).unwrap();
        assert_eq!(log.outcome, Outcome::Success);
        assert_eq!(log.role_switches, 0);
        assert!(log.switch.is_none());
        assert!(log.decisions.is_empty() && log.terminal_reward.is_none());
        assert_eq!(log.trajectory.len() as u64, log.total_steps + 1);
    }

    #[test]
    fn fixed_switches_at_forty_percent() {
        // Seed 1 reaches the target at 30% coverage, before any switch; seed 2 does not.
        assert!(run_episode(&cfg(16, 1, "spiral-conv")).unwrap().switch.is_none());
        let log = run_episode(&cfg(16, 2, "spiral-conv")).unwrap();
        let sw = log.switch.expect("switch recorded");
        assert_eq!(log.role_switches, 1);
        assert!(sw.coverage >= 40.0);
        // The step before the switch was still under 40%.
        let before: std::collections::HashSet<_> = log.trajectory[..sw.step as usize].iter().collect();
        assert!((before.len() as f64) * 100.0 / 256.0 < 40.0);
    }

    #[test]
    fn rl_decisions_on_cadence() {
        let log = run_episode(&cfg(32, 4, "spiral-rl")).unwrap();
        assert!(!log.decisions.is_empty());
        for (i, d) in log.decisions.iter().enumerate() {
            assert_eq!(d.step, 50 * (i as u64 + 1));
        }
        if let Some(sw) = log.switch {
            assert!(log.decisions.iter().all(|d| d.step <= sw.step));
        }
    }

    #[test]
    fn step_limit_failure_is_logged() {
        let mut c = cfg(16, 1, "spiral");
        c.step_limit = 10;
        let log = run_episode(&c).unwrap();
        assert_eq!(log.outcome, Outcome::StepLimitExceeded);
        let m = metrics(&log);
        assert_eq!(m.steps, 10);
        assert_eq!(m.outcome, Outcome::StepLimitExceeded);
    }

    #[test]
    fn rl_failure_still_gets_terminal_credit() {
        let mut c = cfg(16, 1, "spiral-rl");
        c.step_limit = 60;
        let log = run_episode(&c).unwrap();
        assert_eq!(log.outcome, Outcome::StepLimitExceeded);
        let t = log.terminal_reward.unwrap();
        assert_eq!(t.r_steps, 0.0);
        assert!((log.credited_reward() + 50.0 - t.total).abs() < 1e-9);
    }

    #[test]
    fn json_round_trip() {
        let log = run_episode(&cfg(16, 2, "sentinel-rl")).unwrap();
        let line = log.to_json_line().unwrap();
        let back: EpisodeLog = serde_json::from_str(&line).unwrap();
        assert_eq!(back, log);
        assert_eq!(back.to_json_line().unwrap(), line);
    }
}
