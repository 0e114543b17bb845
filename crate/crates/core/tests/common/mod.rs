//! Oracles shared by the integration tests. These only read the full wall
//! layout and never call into the planner or explorer.
#![allow(dead_code)]

use std::collections::VecDeque;

use mazeswitch::{MazeGrid, Position};

/// Breadth-first distances from `from` over passable cells; `None` = unreachable.
pub fn bfs_distances(maze: &MazeGrid, from: Position) -> Vec<Option<u32>> {
    let n = maze.size();
    let mut dist = vec![None; n * n];
    let mut queue = VecDeque::new();
    dist[from.x as usize * n + from.y as usize] = Some(0);
    queue.push_back(from);
    while let Some(p) = queue.pop_front() {
        let d = dist[p.x as usize * n + p.y as usize].unwrap();
        let (x, y) = (p.x as i64, p.y as i64);
        for (nx, ny) in [(x, y + 1), (x + 1, y), (x, y - 1), (x - 1, y)] {
            if nx < 0 || ny < 0 || nx >= n as i64 || ny >= n as i64 {
                continue;
            }
            let q = Position::new(nx as u32, ny as u32);
            let i = nx as usize * n + ny as usize;
            if maze.is_wall(q) || dist[i].is_some() {
                continue;
            }
            dist[i] = Some(d + 1);
            queue.push_back(q);
        }
    }
    dist
}

pub fn bfs_shortest(maze: &MazeGrid, from: Position, to: Position) -> Option<u32> {
    bfs_distances(maze, from)[to.x as usize * maze.size() + to.y as usize]
}

pub fn reachable_count(maze: &MazeGrid) -> usize {
    bfs_distances(maze, maze.start()).iter().filter(|d| d.is_some()).count()
}

/// Stable 64-bit FNV-1a digest of a maze's text form.
pub fn layout_digest(maze: &MazeGrid) -> u64 {
    maze.to_text().bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}
