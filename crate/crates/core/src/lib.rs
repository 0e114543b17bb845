//! Deterministic maze navigation with a learned switch between a spiral
//! coverage policy and an A* convergence policy.
//!
//! The crate is organised bottom-up:
//!
//! - [`grid`]: seeded maze generation, the local wall oracle and the agent's
//!   accumulated knowledge.
//! - [`coverage`]: clockwise spiral exploration from the start corner.
//! - [`convergence`]: A* over partial knowledge with freespace assumption.
//! - [`switch_rl`]: tabular Q-learning over coverage thresholds.
//! - [`episode`]: one agent run, wiring the six variants together.
//! - [`bench`]: the experiment matrix, aggregation and report output.
//!
//! Everything is a pure function of its seeds; the same configuration always
//! produces byte-identical logs.

pub mod bench;
pub mod convergence;
pub mod coverage;
pub mod episode;
pub mod error;
pub mod grid;
pub mod rng;
pub mod switch_rl;

pub use bench::{ablation, run_suite, AblationTable, SuiteConfig, SuiteReport, SuiteRow};
pub use convergence::{astar_plan, follow_plan, FollowOutcome, Plan};
pub use coverage::{spiral_next, MemoryMode, SpiralState};
pub use episode::{
    metrics, run_episode, BaseExplorer, ConvergenceMode, EpisodeConfig, EpisodeLog, EpisodeMetrics, Outcome,
    VariantSpec,
};
pub use error::{Error, Result};
pub use grid::{coverage_percent, generate_maze, manhattan, Direction, KnowledgeMap, MazeGrid, Position, Probe};
pub use switch_rl::{
    decision_reward, discretize, terminal_reward, Progress, QTable, RewardBreakdown, RlState, Threshold,
};
