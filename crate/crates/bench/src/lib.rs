//! Fixtures shared by the criterion benchmarks.

use mazeswitch::{generate_maze, KnowledgeMap, MazeGrid};

/// A generated maze together with full knowledge of it.
pub fn known_maze(n: usize, seed: u64) -> (MazeGrid, KnowledgeMap) {
    let maze = generate_maze(n, seed).expect("benchmark sizes are valid");
    let knowledge = KnowledgeMap::complete(&maze);
    (maze, knowledge)
}
