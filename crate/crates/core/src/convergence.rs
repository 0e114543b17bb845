//! A* toward the target over partial knowledge.
//!
//! Planning uses the freespace assumption: cells known to be walls are
//! blocked, every other in-bounds cell (known free or never probed) is
//! traversable. When the agent discovers that the next waypoint is a wall it
//! stops, and the caller replans from scratch. Every replan is triggered by a
//! newly learned wall, so an episode replans at most once per wall cell.
//!
//! Ties on `f = g + h` go to the smaller `h`, then to the node generated
//! first; neighbours are generated east, south, west, north.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{manhattan, Direction, KnowledgeMap, MazeGrid, Position, Probe};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    /// From the planning cell (inclusive) to the target (inclusive).
    pub waypoints: Vec<Position>,
    /// Index of the waypoint the agent currently occupies.
    pub cursor: usize,
    /// `KnowledgeMap::version` the plan was computed against.
    pub planned_over: u64,
}

impl Plan {
    /// Path length in steps.
    pub fn cost(&self) -> usize {
        self.waypoints.len() - 1
    }

    pub fn head(&self) -> Position {
        self.waypoints[self.cursor]
    }

    pub fn target(&self) -> Position {
        *self.waypoints.last().expect("plans are never empty")
    }

    pub fn remaining(&self) -> &[Position] {
        &self.waypoints[self.cursor..]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FollowOutcome {
    Advanced(Position),
    Arrived(Position),
    /// The next waypoint turned out to be a wall; the agent did not move.
    ReplanNeeded,
}

/// Shortest path from `start` to `target` on the optimistic planning graph.
pub fn astar_plan(start: Position, target: Position, knowledge: &KnowledgeMap) -> Result<Plan> {
    let n = knowledge.size();
    assert!(!knowledge.is_known_wall(start), "planning from a known wall at {start:?}");
    let planned_over = knowledge.version();
    if start == target {
        return Ok(Plan { waypoints: vec![start], cursor: 0, planned_over });
    }
    if knowledge.is_known_wall(target) {
        return Err(Error::NoPath { from: start, to: target });
    }

    let mut g = vec![u32::MAX; n * n];
    let mut parent = vec![usize::MAX; n * n];
    let mut closed = vec![false; n * n];
    // Min-heap on (f, h, generation order).
    let mut open = BinaryHeap::new();
    let mut generated: u64 = 0;

    let s = start.index(n);
    g[s] = 0;
    let h0 = manhattan(start, target);
    open.push(Reverse((h0, h0, generated, s)));

    while let Some(Reverse((_, _, _, cur))) = open.pop() {
        if closed[cur] {
            continue;
        }
        closed[cur] = true;
        let here = Position::from_index(cur, n);
        if here == target {
            let mut waypoints = vec![here];
            let mut i = cur;
            while i != s {
                i = parent[i];
                waypoints.push(Position::from_index(i, n));
            }
            waypoints.reverse();
            return Ok(Plan { waypoints, cursor: 0, planned_over });
        }
        for dir in Direction::ALL {
            let Some(next) = here.step(dir, n) else { continue };
            let j = next.index(n);
            if closed[j] || knowledge.is_known_wall(next) {
                continue;
            }
            let tentative = g[cur] + 1;
            if tentative < g[j] {
                g[j] = tentative;
                parent[j] = cur;
                let h = manhattan(next, target);
                generated += 1;
                open.push(Reverse((tentative + h, h, generated, j)));
            }
        }
    }
    Err(Error::NoPath { from: start, to: target })
}

/// Tries to move one waypoint along `plan`, probing the cell first.
pub fn follow_plan(plan: &mut Plan, maze: &MazeGrid, knowledge: &mut KnowledgeMap) -> FollowOutcome {
    let here = plan.head();
    if plan.cursor + 1 >= plan.waypoints.len() {
        return FollowOutcome::Arrived(here);
    }
    let next = plan.waypoints[plan.cursor + 1];
    let dir = here.direction_to(next).expect("plan waypoints are adjacent");
    let probe = maze.probe_dir(here, dir);
    knowledge.learn(next, probe);
    match probe {
        Probe::Passable => {
            plan.cursor += 1;
            if plan.cursor + 1 == plan.waypoints.len() {
                FollowOutcome::Arrived(next)
            } else {
                FollowOutcome::Advanced(next)
            }
        }
        Probe::Blocked | Probe::OutOfBounds => FollowOutcome::ReplanNeeded,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::generate_maze;

    #[test]
    fn open_grid_cost_is_manhattan() {
        let k = KnowledgeMap::new(4);
        let plan = astar_plan(Position::new(0, 0), Position::new(3, 3), &k).unwrap();
        assert_eq!(plan.cost(), 6);
        assert_eq!(plan.target(), Position::new(3, 3));
        assert_eq!(plan.waypoints[0], Position::ORIGIN);
    }

    #[test]
    fn start_equals_target() {
        let k = KnowledgeMap::new(8);
        let p = Position::new(4, 4);
        let plan = astar_plan(p, p, &k).unwrap();
        assert_eq!(plan.cost(), 0);
        assert_eq!(plan.waypoints, vec![p]);
    }

    #[test]
    fn tie_break_prefers_east_first() {
        // From (0,0) to (1,1) on an open grid both L-shapes have equal f and h;
        // the first generated node (east) wins.
        let k = KnowledgeMap::new(4);
        let plan = astar_plan(Position::new(0, 0), Position::new(1, 1), &k).unwrap();
        assert_eq!(plan.waypoints, vec![Position::new(0, 0), Position::new(0, 1), Position::new(1, 1)]);
    }

    #[test]
    fn known_target_wall_has_no_path() {
        let maze = MazeGrid::from_walls(8, 0, vec![false; 64]).unwrap();
        let mut k = KnowledgeMap::new(8);
        let t = Position::new(2, 2);
        let _ = maze;
        k.learn(t, Probe::Blocked);
        assert!(matches!(astar_plan(Position::ORIGIN, t, &k), Err(Error::NoPath { .. })));
    }

    #[test]
    fn plans_avoid_known_walls() {
        let maze = generate_maze(16, 5).unwrap();
        let k = KnowledgeMap::complete(&maze);
        let plan = astar_plan(Position::ORIGIN, maze.target(), &k).unwrap();
        for w in plan.waypoints.windows(2) {
            assert_eq!(manhattan(w[0], w[1]), 1);
        }
        assert!(plan.waypoints.iter().all(|p| !maze.is_wall(*p)));
    }

    #[test]
    fn follow_advances_on_passable() {
        let maze = MazeGrid::open(8).unwrap();
        let mut k = KnowledgeMap::new(8);
        let mut plan = astar_plan(Position::ORIGIN, maze.target(), &k).unwrap();
        let next = plan.waypoints[1];
        assert_eq!(follow_plan(&mut plan, &maze, &mut k), FollowOutcome::Advanced(next));
        assert_eq!(plan.head(), next);
        assert!(k.is_known_free(next));
    }

    #[test]
    fn follow_reports_undiscovered_wall() {
        let n = 8;
        let mut walls = vec![false; n * n];
        walls[Position::new(0, 1).index(n)] = true;
        let maze = MazeGrid::from_walls(n, 0, walls).unwrap();
        let mut k = KnowledgeMap::new(n);
        let mut plan = astar_plan(Position::ORIGIN, Position::new(0, 3), &k).unwrap();
        assert_eq!(plan.waypoints[1], Position::new(0, 1));
        assert_eq!(follow_plan(&mut plan, &maze, &mut k), FollowOutcome::ReplanNeeded);
        assert_eq!(plan.head(), Position::ORIGIN);
        assert!(k.is_known_wall(Position::new(0, 1)));
        let replanned = astar_plan(Position::ORIGIN, Position::new(0, 3), &k).unwrap();
        assert!(!replanned.waypoints.contains(&Position::new(0, 1)));
        assert_eq!(replanned.cost(), 5);
        assert!(replanned.planned_over > plan.planned_over);
    }

    #[test]
    fn follow_to_arrival() {
        let maze = MazeGrid::open(8).unwrap();
        let mut k = KnowledgeMap::new(8);
        let mut plan = astar_plan(Position::new(4, 2), maze.target(), &k).unwrap();
        assert_eq!(follow_plan(&mut plan, &maze, &mut k), FollowOutcome::Advanced(Position::new(4, 3)));
        assert_eq!(follow_plan(&mut plan, &maze, &mut k), FollowOutcome::Arrived(Position::new(4, 4)));
        assert_eq!(follow_plan(&mut plan, &maze, &mut k), FollowOutcome::Arrived(Position::new(4, 4)));
    }
}
