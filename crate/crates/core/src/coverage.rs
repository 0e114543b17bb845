//! Clockwise spiral coverage from the start corner.
//!
//! On an open grid the explorer walks concentric rings from the perimeter
//! inward: east along the top, south down the right side, west along the
//! bottom, north up the left side, then one ring in. In a maze it behaves as
//! a depth-first sweep that keeps to this order:
//!
//! 1. Sense the four neighbours.
//! 2. Among unvisited passable neighbours pick the one on the outermost ring;
//!    ties go to the clockwise ring direction at the current cell, then to
//!    straight ahead, right, left and back relative to the heading.
//! 3. With no such neighbour, detour: step back along the trail of forward
//!    moves until a cell with unvisited neighbours is reached.
//!
//! Each forward move visits a new cell and each detour step retraces one
//! forward move, so every reachable cell is visited within `2 × reachable`
//! steps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Direction, KnowledgeMap, MazeGrid, Position, Probe};

/// Stride used by the sentinel variant.
pub const SENTINEL_STRIDE: usize = 4;

/// How much of the visit history is kept. Coverage is always counted exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemoryMode {
    FullMemory,
    /// Keep only every `stride`-th newly visited cell.
    Sentinel {
        stride: usize,
    },
}

impl MemoryMode {
    pub fn sentinel() -> Self {
        MemoryMode::Sentinel { stride: SENTINEL_STRIDE }
    }

    /// Marks `pos` occupied and updates the stored history. Returns `true`
    /// when the cell was new.
    pub fn record_visit(self, knowledge: &mut KnowledgeMap, pos: Position) -> bool {
        let Some(ordinal) = knowledge.mark_visited(pos) else {
            return false;
        };
        let keep = match self {
            MemoryMode::FullMemory => true,
            MemoryMode::Sentinel { stride } => ordinal % stride == 0,
        };
        if keep {
            knowledge.push_history(pos);
        }
        true
    }
}

/// Ring index of `p`: 0 for the perimeter, growing toward the centre.
pub fn layer(p: Position, n: usize) -> u32 {
    let far = n as u32 - 1;
    p.x.min(p.y).min(far - p.x).min(far - p.y)
}

/// Direction that continues the clockwise walk around `p`'s ring.
pub fn ring_direction(p: Position, n: usize) -> Direction {
    let l = layer(p, n);
    let far = n as u32 - 1 - l;
    if p.x == l && p.y < far {
        Direction::East
    } else if p.y == far && p.x < far {
        Direction::South
    } else if p.x == far && p.y > l {
        Direction::West
    } else {
        Direction::North
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpiralState {
    pub pos: Position,
    pub heading: Direction,
    /// Ring of the last forward move.
    pub layer: u32,
    /// `true` while stepping back along the trail.
    pub detouring: bool,
    pub mode: MemoryMode,
    trail: Vec<Position>,
}

impl SpiralState {
    /// Fresh explorer at the start corner, heading east.
    pub fn new(mode: MemoryMode) -> Self {
        SpiralState {
            pos: Position::ORIGIN,
            heading: Direction::East,
            layer: 0,
            detouring: false,
            mode,
            trail: Vec::new(),
        }
    }

    pub fn record_visit(&self, knowledge: &mut KnowledgeMap, pos: Position) -> bool {
        self.mode.record_visit(knowledge, pos)
    }

    /// Number of cells the explorer could still step back through.
    pub fn trail_len(&self) -> usize {
        self.trail.len()
    }

    fn preference(&self, dir: Direction, ring: Direction) -> u8 {
        if dir == ring {
            0
        } else if dir == self.heading {
            1
        } else if dir == self.heading.clockwise() {
            2
        } else if dir == self.heading.counter_clockwise() {
            3
        } else {
            4
        }
    }
}

/// Advances the explorer by one cell. Probes only the neighbourhood of the
/// current cell, and records the arrival in `knowledge`.
pub fn spiral_next(state: &mut SpiralState, maze: &MazeGrid, knowledge: &mut KnowledgeMap) -> Result<Position> {
    let n = maze.size();
    let here = state.pos;
    let ring = ring_direction(here, n);

    let mut best: Option<(u32, u8, Direction, Position)> = None;
    for dir in Direction::ALL {
        let Some(next) = here.step(dir, n) else { continue };
        let probe = maze.probe_dir(here, dir);
        knowledge.learn(next, probe);
        if probe != Probe::Passable || knowledge.is_visited(next) {
            continue;
        }
        let key = (layer(next, n), state.preference(dir, ring));
        if best.is_none_or(|(l, p, _, _)| key < (l, p)) {
            best = Some((key.0, key.1, dir, next));
        }
    }

    let next = match best {
        Some((l, _, dir, next)) => {
            state.trail.push(here);
            state.heading = dir;
            state.layer = l;
            state.detouring = false;
            next
        }
        None => {
            let back = state.trail.pop().ok_or(Error::Stuck(here))?;
            state.heading = here.direction_to(back).expect("trail cells are adjacent");
            state.detouring = true;
            back
        }
    };
    state.pos = next;
    state.mode.record_visit(knowledge, next);
    Ok(next)
}

/// Golden trajectory format: one `x,y` per line.
pub fn trajectory_to_text(path: &[Position]) -> String {
    path.iter().map(|p| format!("{p}\n")).collect()
}

pub fn trajectory_from_text(text: &str) -> Result<Vec<Position>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| l.parse().map_err(|msg| Error::TrajectoryFormat { line: i + 1, msg }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::manhattan;

    fn run_open(n: usize) -> Vec<Position> {
        let maze = MazeGrid::open(n).unwrap();
        let mut k = KnowledgeMap::new(n);
        let mut s = SpiralState::new(MemoryMode::FullMemory);
        s.record_visit(&mut k, Position::ORIGIN);
        let mut path = vec![Position::ORIGIN];
        while k.visited_count() < n * n {
            path.push(spiral_next(&mut s, &maze, &mut k).unwrap());
        }
        path
    }

    #[test]
    fn open_four_by_four_matches_golden_trace() {
        let golden = trajectory_from_text(include_str!("../tests/golden/spiral_open_4x4.txt")).unwrap();
        assert_eq!(golden.len(), 16);
        assert_eq!(run_open(4), golden);
    }

    #[test]
    fn open_grid_visits_every_cell_once() {
        for n in [2, 4, 8, 10, 16, 32] {
            let path = run_open(n);
            assert_eq!(path.len(), n * n, "n={n}");
            let mut seen = std::collections::HashSet::new();
            for w in path.windows(2) {
                assert_eq!(manhattan(w[0], w[1]), 1);
            }
            for p in &path {
                assert!(seen.insert(*p), "revisited {p:?}");
            }
        }
    }

    #[test]
    fn first_step_heads_east() {
        let path = run_open(8);
        assert_eq!(path[1], Position::new(0, 1));
    }

    #[test]
    fn open_grid_follows_rings() {
        let n = 8;
        let path = run_open(n);
        let layers: Vec<u32> = path.iter().map(|p| layer(*p, n)).collect();
        assert!(layers.windows(2).all(|w| w[0] <= w[1]));
        // Ring 0 of an 8x8 grid has 28 cells.
        assert_eq!(layers.iter().filter(|l| **l == 0).count(), 28);
    }

    #[test]
    fn record_visit_full_memory() {
        let mut k = KnowledgeMap::new(8);
        for i in 0..10 {
            assert!(MemoryMode::FullMemory.record_visit(&mut k, Position::from_index(i, 8)));
        }
        assert_eq!(k.history().len(), 10);
    }

    #[test]
    fn record_visit_sentinel_stride() {
        let mut k = KnowledgeMap::new(8);
        let mode = MemoryMode::Sentinel { stride: 4 };
        for i in 0..10 {
            mode.record_visit(&mut k, Position::from_index(i, 8));
        }
        assert_eq!(k.visited_count(), 10);
        assert_eq!(k.history(), &[Position::from_index(0, 8), Position::from_index(4, 8), Position::from_index(8, 8)]);
    }

    #[test]
    fn record_visit_revisit_is_noop() {
        let mut k = KnowledgeMap::new(8);
        let p = Position::new(2, 3);
        assert!(MemoryMode::FullMemory.record_visit(&mut k, p));
        assert!(!MemoryMode::FullMemory.record_visit(&mut k, p));
        assert_eq!(k.visited_count(), 1);
        assert_eq!(k.history().len(), 1);
    }

    #[test]
    fn boxed_in_start_reports_stuck() {
        let n = 8;
        let mut walls = vec![false; n * n];
        walls[Position::new(0, 1).index(n)] = true;
        walls[Position::new(1, 0).index(n)] = true;
        let maze = MazeGrid::from_walls(n, 0, walls).unwrap();
        let mut k = KnowledgeMap::new(n);
        let mut s = SpiralState::new(MemoryMode::FullMemory);
        s.record_visit(&mut k, Position::ORIGIN);
        assert!(matches!(spiral_next(&mut s, &maze, &mut k), Err(Error::Stuck(p)) if p == Position::ORIGIN));
    }

    #[test]
    fn trajectory_text_round_trip() {
        let path = run_open(8);
        assert_eq!(trajectory_from_text(&trajectory_to_text(&path)).unwrap(), path);
        assert!(trajectory_from_text("1,2\nnope\n").is_err());
    }

    #[test]
    fn ring_directions_on_corners() {
        assert_eq!(ring_direction(Position::new(0, 0), 8), Direction::East);
        assert_eq!(ring_direction(Position::new(0, 7), 8), Direction::South);
        assert_eq!(ring_direction(Position::new(7, 7), 8), Direction::West);
        assert_eq!(ring_direction(Position::new(7, 0), 8), Direction::North);
        assert_eq!(ring_direction(Position::new(1, 1), 8), Direction::East);
    }
}
