//! Maze layout, local wall sensing and the agent's knowledge of the maze.
//!
//! Coordinates are `(x, y)` with `x` the row (growing south) and `y` the
//! column (growing east). The start is always `(0, 0)` and the target is the
//! centre cell `(n/2, n/2)`.
//!
//! # Generation
//!
//! [`generate_maze`] carves a perfect maze with randomized depth-first search
//! on the even-coordinate lattice `{0, 2, .., n-2}²` (so both the start and
//! the centre are lattice cells), then braids it: every dead end, visited in
//! row-major order, has the wall behind it removed with probability
//! [`BRAID_PROBABILITY`] when that opens a passage to another lattice cell.
//! Finally the target and its four neighbours are forced open. The last row
//! and column are never carved. The only randomness is one [`Stream`]
//! seeded with the maze seed.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;

/// Probability that a dead end gets the wall behind it removed.
pub const BRAID_PROBABILITY: f64 = 0.10;

/// Smallest supported side length.
pub const MIN_SIZE: usize = 8;

/// Serialized as a two-element array `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(u32, u32)", into = "(u32, u32)")]
pub struct Position {
    pub x: u32,
    pub y: u32,
}

impl Position {
    pub const ORIGIN: Position = Position { x: 0, y: 0 };

    pub const fn new(x: u32, y: u32) -> Self {
        Position { x, y }
    }

    /// Neighbour one step in `dir`, or `None` when it would leave an `n`×`n` grid.
    pub fn step(self, dir: Direction, n: usize) -> Option<Position> {
        let (dx, dy) = dir.offset();
        let x = self.x as i64 + dx as i64;
        let y = self.y as i64 + dy as i64;
        if x < 0 || y < 0 || x >= n as i64 || y >= n as i64 {
            None
        } else {
            Some(Position::new(x as u32, y as u32))
        }
    }

    /// Direction leading from `self` to an adjacent `other`.
    pub fn direction_to(self, other: Position) -> Option<Direction> {
        Direction::ALL.into_iter().find(|d| {
            let (dx, dy) = d.offset();
            self.x as i64 + dx as i64 == other.x as i64 && self.y as i64 + dy as i64 == other.y as i64
        })
    }

    pub(crate) fn index(self, n: usize) -> usize {
        self.x as usize * n + self.y as usize
    }

    pub(crate) fn from_index(i: usize, n: usize) -> Position {
        Position::new((i / n) as u32, (i % n) as u32)
    }
}

impl From<(u32, u32)> for Position {
    fn from((x, y): (u32, u32)) -> Self {
        Position::new(x, y)
    }
}

impl From<Position> for (u32, u32) {
    fn from(p: Position) -> Self {
        (p.x, p.y)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.x, self.y)
    }
}

impl FromStr for Position {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (x, y) = s.trim().split_once(',').ok_or_else(|| format!("expected \"x,y\", got {s:?}"))?;
        let x = x.trim().parse().map_err(|e| format!("bad x in {s:?}: {e}"))?;
        let y = y.trim().parse().map_err(|e| format!("bad y in {s:?}: {e}"))?;
        Ok(Position::new(x, y))
    }
}

/// Compass heading. East increases `y`, south increases `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    East,
    South,
    West,
    North,
}

impl Direction {
    /// Clockwise order, also the A* expansion order.
    pub const ALL: [Direction; 4] = [Direction::East, Direction::South, Direction::West, Direction::North];

    pub const fn offset(self) -> (i32, i32) {
        match self {
            Direction::East => (0, 1),
            Direction::South => (1, 0),
            Direction::West => (0, -1),
            Direction::North => (-1, 0),
        }
    }

    pub const fn clockwise(self) -> Direction {
        match self {
            Direction::East => Direction::South,
            Direction::South => Direction::West,
            Direction::West => Direction::North,
            Direction::North => Direction::East,
        }
    }

    pub const fn counter_clockwise(self) -> Direction {
        match self {
            Direction::East => Direction::North,
            Direction::South => Direction::East,
            Direction::West => Direction::South,
            Direction::North => Direction::West,
        }
    }

    pub const fn reverse(self) -> Direction {
        match self {
            Direction::East => Direction::West,
            Direction::South => Direction::North,
            Direction::West => Direction::East,
            Direction::North => Direction::South,
        }
    }
}

/// Answer of the local wall oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Probe {
    Passable,
    Blocked,
    OutOfBounds,
}

/// Immutable maze layout.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MazeGrid {
    n: usize,
    seed: u64,
    /// Row-major, `true` = wall.
    walls: Vec<bool>,
}

impl MazeGrid {
    /// Builds a grid from an explicit wall layout. Start and target are forced
    /// open; connectivity is the caller's responsibility.
    pub fn from_walls(n: usize, seed: u64, mut walls: Vec<bool>) -> Result<Self> {
        validate_layout_size(n)?;
        if walls.len() != n * n {
            return Err(Error::Config(format!("wall layout has {} cells, expected {}", walls.len(), n * n)));
        }
        walls[0] = false;
        walls[target_of(n).index(n)] = false;
        Ok(MazeGrid { n, seed, walls })
    }

    /// A grid without interior walls.
    pub fn open(n: usize) -> Result<Self> {
        Self::from_walls(n, 0, vec![false; n * n])
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn start(&self) -> Position {
        Position::ORIGIN
    }

    pub fn target(&self) -> Position {
        target_of(self.n)
    }

    pub fn cell_count(&self) -> usize {
        self.n * self.n
    }

    pub fn in_bounds(&self, p: Position) -> bool {
        (p.x as usize) < self.n && (p.y as usize) < self.n
    }

    /// Whole-layout view, for oracles and rendering. Agents must use [`probe`](Self::probe).
    pub fn is_wall(&self, p: Position) -> bool {
        self.walls[p.index(self.n)]
    }

    pub fn passable_count(&self) -> usize {
        self.walls.iter().filter(|w| !**w).count()
    }

    /// Local wall oracle: senses `from` itself (`offset = (0, 0)`) or one of
    /// its four neighbours.
    ///
    /// # Panics
    ///
    /// On any offset outside the 4-neighbourhood, or when `from` is outside
    /// the grid. Those are sensing-contract violations.
    pub fn probe(&self, from: Position, offset: (i32, i32)) -> Probe {
        assert!(
            offset.0.abs() + offset.1.abs() <= 1,
            "probe offset {offset:?} outside the 4-neighbourhood of {from:?}"
        );
        assert!(self.in_bounds(from), "probe origin {from:?} outside {0}x{0} grid", self.n);
        let x = from.x as i64 + offset.0 as i64;
        let y = from.y as i64 + offset.1 as i64;
        if x < 0 || y < 0 || x >= self.n as i64 || y >= self.n as i64 {
            return Probe::OutOfBounds;
        }
        if self.walls[x as usize * self.n + y as usize] {
            Probe::Blocked
        } else {
            Probe::Passable
        }
    }

    pub fn probe_dir(&self, from: Position, dir: Direction) -> Probe {
        self.probe(from, dir.offset())
    }

    /// Maze text format: `"n seed"` header, then `n` rows of `#`, `.`, `S`, `T`.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.n * (self.n + 1) + 32);
        let _ = writeln!(out, "{} {}", self.n, self.seed);
        for x in 0..self.n {
            for y in 0..self.n {
                let p = Position::new(x as u32, y as u32);
                let c = if p == self.start() {
                    'S'
                } else if p == self.target() {
                    'T'
                } else if self.is_wall(p) {
                    '#'
                } else {
                    '.'
                };
                out.push(c);
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or(Error::MazeFormat { line: 1, msg: "empty input".into() })?;
        let mut parts = header.split_whitespace();
        let bad_header = || Error::MazeFormat { line: 1, msg: format!("expected \"n seed\", got {header:?}") };
        let n: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad_header)?;
        let seed: u64 = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad_header)?;
        if parts.next().is_some() {
            return Err(bad_header());
        }
        validate_layout_size(n).map_err(|e| Error::MazeFormat { line: 1, msg: e.to_string() })?;
        let target = target_of(n);
        let mut walls = Vec::with_capacity(n * n);
        for x in 0..n {
            let line_no = x + 2;
            let row = lines.next().ok_or(Error::MazeFormat { line: line_no, msg: "missing row".into() })?;
            if row.chars().count() != n {
                return Err(Error::MazeFormat {
                    line: line_no,
                    msg: format!("row has {} cells, expected {n}", row.chars().count()),
                });
            }
            for (y, c) in row.chars().enumerate() {
                let p = Position::new(x as u32, y as u32);
                let expected_marker = if p == Position::ORIGIN {
                    Some('S')
                } else if p == target {
                    Some('T')
                } else {
                    None
                };
                match (c, expected_marker) {
                    ('S', Some('S')) | ('T', Some('T')) => walls.push(false),
                    ('#', None) => walls.push(true),
                    ('.', None) => walls.push(false),
                    _ => {
                        return Err(Error::MazeFormat { line: line_no, msg: format!("unexpected {c:?} at column {y}") })
                    }
                }
            }
        }
        if lines.any(|l| !l.is_empty()) {
            return Err(Error::MazeFormat { line: n + 2, msg: "trailing content".into() });
        }
        Ok(MazeGrid { n, seed, walls })
    }
}

fn validate_size(n: usize) -> Result<()> {
    if n < MIN_SIZE || !n.is_multiple_of(2) {
        return Err(Error::Config(format!("maze side must be even and >= {MIN_SIZE}, got {n}")));
    }
    validate_layout_size(n)
}

/// Hand-built layouts may be smaller than generated ones.
fn validate_layout_size(n: usize) -> Result<()> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::Config(format!("maze side must be even and >= 2, got {n}")));
    }
    if n > u16::MAX as usize {
        return Err(Error::Config(format!("maze side {n} too large")));
    }
    Ok(())
}

fn target_of(n: usize) -> Position {
    Position::new((n / 2) as u32, (n / 2) as u32)
}

/// Generates the maze for `(n, seed)`. See the module docs for the algorithm.
pub fn generate_maze(n: usize, seed: u64) -> Result<MazeGrid> {
    validate_size(n)?;
    let mut rng = Stream::new(seed);
    let mut walls = vec![true; n * n];
    let idx = |x: usize, y: usize| x * n + y;
    let lattice = n / 2;

    // Depth-first carving over lattice cells (2i, 2j).
    let mut seen = vec![false; lattice * lattice];
    let mut stack = vec![(0usize, 0usize)];
    seen[0] = true;
    walls[0] = false;
    while let Some(&(i, j)) = stack.last() {
        let mut options = [Direction::East, Direction::South, Direction::West, Direction::North];
        rng.shuffle(&mut options);
        let next = options.into_iter().find_map(|d| {
            let (di, dj) = d.offset();
            let (ni, nj) = (i as i64 + di as i64, j as i64 + dj as i64);
            if ni < 0 || nj < 0 || ni >= lattice as i64 || nj >= lattice as i64 {
                return None;
            }
            let (ni, nj) = (ni as usize, nj as usize);
            (!seen[ni * lattice + nj]).then_some((ni, nj))
        });
        match next {
            Some((ni, nj)) => {
                seen[ni * lattice + nj] = true;
                walls[idx(i + ni, j + nj)] = false; // cell between, at (i+ni, j+nj) in full coords
                walls[idx(2 * ni, 2 * nj)] = false;
                stack.push((ni, nj));
            }
            None => {
                stack.pop();
            }
        }
    }

    // Braid dead ends.
    for i in 0..lattice {
        for j in 0..lattice {
            let (x, y) = (2 * i, 2 * j);
            let open: Vec<Direction> = Direction::ALL
                .into_iter()
                .filter(|d| Position::new(x as u32, y as u32).step(*d, n).is_some_and(|p| !walls[p.index(n)]))
                .collect();
            if open.len() != 1 || !rng.chance(BRAID_PROBABILITY) {
                continue;
            }
            let behind = open[0].reverse();
            let order =
                std::iter::once(behind).chain(Direction::ALL.into_iter().filter(|d| *d != behind && *d != open[0]));
            for d in order {
                let (dx, dy) = d.offset();
                let (fx, fy) = (x as i64 + 2 * dx as i64, y as i64 + 2 * dy as i64);
                if fx < 0 || fy < 0 || fx >= 2 * lattice as i64 || fy >= 2 * lattice as i64 {
                    continue;
                }
                walls[idx((x as i64 + dx as i64) as usize, (y as i64 + dy as i64) as usize)] = false;
                break;
            }
        }
    }

    let target = target_of(n);
    walls[target.index(n)] = false;
    for d in Direction::ALL {
        if let Some(p) = target.step(d, n) {
            walls[p.index(n)] = false;
        }
    }
    Ok(MazeGrid { n, seed, walls })
}

pub fn manhattan(a: Position, b: Position) -> u32 {
    a.x.abs_diff(b.x) + a.y.abs_diff(b.y)
}

/// `visited / n² × 100`.
pub fn coverage_percent(knowledge: &KnowledgeMap, n: usize) -> f64 {
    knowledge.visited_count() as f64 * 100.0 / (n * n) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKnowledge {
    Unknown,
    Free,
    Wall,
}

/// What the agent has learned from local probes, plus its visit record.
///
/// Cells are either unknown, known free or known wall, so the free and wall
/// sets are disjoint by construction. `version` increments whenever a new
/// fact is learned, which lets a plan tell whether it is stale.
#[derive(Debug, Clone)]
pub struct KnowledgeMap {
    n: usize,
    cells: Vec<CellKnowledge>,
    visited: Vec<bool>,
    visited_count: usize,
    history: Vec<Position>,
    version: u64,
}

impl KnowledgeMap {
    pub fn new(n: usize) -> Self {
        KnowledgeMap {
            n,
            cells: vec![CellKnowledge::Unknown; n * n],
            visited: vec![false; n * n],
            visited_count: 0,
            history: Vec::new(),
            version: 0,
        }
    }

    /// Knowledge with every wall of `maze` already revealed.
    pub fn complete(maze: &MazeGrid) -> Self {
        let n = maze.size();
        let mut k = KnowledgeMap::new(n);
        for i in 0..n * n {
            k.cells[i] =
                if maze.is_wall(Position::from_index(i, n)) { CellKnowledge::Wall } else { CellKnowledge::Free };
        }
        k.version = 1;
        k
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn cell(&self, p: Position) -> CellKnowledge {
        self.cells[p.index(self.n)]
    }

    pub fn is_known_wall(&self, p: Position) -> bool {
        self.cell(p) == CellKnowledge::Wall
    }

    pub fn is_known_free(&self, p: Position) -> bool {
        self.cell(p) == CellKnowledge::Free
    }

    pub fn is_visited(&self, p: Position) -> bool {
        self.visited[p.index(self.n)]
    }

    pub fn visited_count(&self) -> usize {
        self.visited_count
    }

    pub fn known_wall_count(&self) -> usize {
        self.cells.iter().filter(|c| **c == CellKnowledge::Wall).count()
    }

    pub fn known_free_count(&self) -> usize {
        self.cells.iter().filter(|c| **c == CellKnowledge::Free).count()
    }

    /// Stored visit history (all of it, or a sample, depending on memory mode).
    pub fn history(&self) -> &[Position] {
        &self.history
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    /// Records a probe result. Returns `true` if it taught us something new.
    pub fn learn(&mut self, p: Position, probe: Probe) -> bool {
        let fact = match probe {
            Probe::Passable => CellKnowledge::Free,
            Probe::Blocked => CellKnowledge::Wall,
            Probe::OutOfBounds => return false,
        };
        let slot = &mut self.cells[p.index(self.n)];
        debug_assert!(*slot == CellKnowledge::Unknown || *slot == fact, "maze changed under {p:?}");
        if *slot == fact {
            return false;
        }
        *slot = fact;
        self.version += 1;
        true
    }

    /// Probes `pos` and its four neighbours.
    pub fn sense(&mut self, maze: &MazeGrid, pos: Position) {
        let r = maze.probe(pos, (0, 0));
        self.learn(pos, r);
        for d in Direction::ALL {
            if let Some(p) = pos.step(d, self.n) {
                let r = maze.probe_dir(pos, d);
                self.learn(p, r);
            }
        }
    }

    /// Marks `pos` occupied. Returns the distinct-visit ordinal when the cell
    /// is new, `None` on a revisit.
    pub fn mark_visited(&mut self, pos: Position) -> Option<usize> {
        let i = pos.index(self.n);
        if self.visited[i] {
            return None;
        }
        self.visited[i] = true;
        let ordinal = self.visited_count;
        self.visited_count += 1;
        if self.cells[i] != CellKnowledge::Free {
            self.cells[i] = CellKnowledge::Free;
            self.version += 1;
        }
        Some(ordinal)
    }

    pub(crate) fn push_history(&mut self, pos: Position) {
        self.history.push(pos);
    }

    /// `visited_count * 100 >= percent * n²`, without rounding.
    pub fn coverage_at_least(&self, percent: u32) -> bool {
        self.visited_count as u64 * 100 >= percent as u64 * (self.n * self.n) as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        for n in [0, 4, 6, 7, 9, 15] {
            assert!(matches!(generate_maze(n, 1), Err(Error::Config(_))), "n={n}");
        }
        assert!(generate_maze(8, 1).is_ok());
    }

    #[test]
    fn start_and_target_passable() {
        for seed in 0..20 {
            let m = generate_maze(16, seed).unwrap();
            assert!(!m.is_wall(Position::ORIGIN));
            assert_eq!(m.target(), Position::new(8, 8));
            assert!(!m.is_wall(m.target()));
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_maze(16, 1).unwrap();
        let b = generate_maze(16, 1).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_maze(16, 2).unwrap());
    }

    #[test]
    fn probe_boundaries() {
        let m = MazeGrid::open(8).unwrap();
        assert_eq!(m.probe(Position::ORIGIN, (-1, 0)), Probe::OutOfBounds);
        assert_eq!(m.probe(Position::ORIGIN, (0, -1)), Probe::OutOfBounds);
        assert_eq!(m.probe(Position::ORIGIN, (0, 1)), Probe::Passable);
        assert_eq!(m.probe(Position::new(7, 7), (1, 0)), Probe::OutOfBounds);
    }

    #[test]
    fn probe_walls_are_stable() {
        let m = generate_maze(16, 1).unwrap();
        let (from, wall) = (0..16u32)
            .flat_map(|x| (0..16u32).map(move |y| Position::new(x, y)))
            .filter(|p| !m.is_wall(*p))
            .find_map(|p| {
                Direction::ALL.into_iter().find_map(|d| p.step(d, 16).filter(|q| m.is_wall(*q)).map(|_| (p, d)))
            })
            .unwrap();
        assert_eq!(m.probe_dir(from, wall), Probe::Blocked);
        assert_eq!(m.probe_dir(from, wall), Probe::Blocked);
    }

    #[test]
    #[should_panic(expected = "outside the 4-neighbourhood")]
    fn probe_rejects_diagonal() {
        MazeGrid::open(8).unwrap().probe(Position::new(2, 2), (1, 1));
    }

    #[test]
    #[should_panic(expected = "outside the 4-neighbourhood")]
    fn probe_rejects_distant() {
        MazeGrid::open(8).unwrap().probe(Position::new(2, 2), (0, 2));
    }

    #[test]
    fn manhattan_examples() {
        assert_eq!(manhattan(Position::new(0, 0), Position::new(0, 0)), 0);
        assert_eq!(manhattan(Position::new(0, 0), Position::new(8, 8)), 16);
        assert_eq!(manhattan(Position::new(3, 10), Position::new(8, 8)), 7);
    }

    #[test]
    fn coverage_examples() {
        let mut k = KnowledgeMap::new(16);
        assert_eq!(coverage_percent(&k, 16), 0.0);
        for i in 0..128 {
            k.mark_visited(Position::from_index(i, 16));
        }
        assert_eq!(coverage_percent(&k, 16), 50.0);
        for i in 0..256 {
            k.mark_visited(Position::from_index(i, 16));
        }
        assert_eq!(coverage_percent(&k, 16), 100.0);
        assert_eq!(k.visited_count(), 256);
    }

    #[test]
    fn revisits_do_not_count() {
        let mut k = KnowledgeMap::new(8);
        assert_eq!(k.mark_visited(Position::new(1, 1)), Some(0));
        assert_eq!(k.mark_visited(Position::new(1, 1)), None);
        assert_eq!(k.mark_visited(Position::new(1, 2)), Some(1));
        assert_eq!(k.visited_count(), 2);
    }

    #[test]
    fn sense_only_touches_neighbourhood() {
        let m = generate_maze(16, 3).unwrap();
        let mut k = KnowledgeMap::new(16);
        let p = Position::new(6, 6);
        k.sense(&m, p);
        for i in 0..256 {
            let q = Position::from_index(i, 16);
            if manhattan(p, q) > 1 {
                assert_eq!(k.cell(q), CellKnowledge::Unknown);
            } else {
                assert_eq!(k.is_known_wall(q), m.is_wall(q));
                assert_eq!(k.is_known_free(q), !m.is_wall(q));
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let m = generate_maze(16, 11).unwrap();
        let text = m.to_text();
        let back = MazeGrid::from_text(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_text(), text);
        assert!(text.starts_with("16 11\nS"));
    }

    #[test]
    fn text_rejects_garbage() {
        assert!(MazeGrid::from_text("").is_err());
        assert!(MazeGrid::from_text("8 1\n").is_err());
        let mut t = MazeGrid::open(8).unwrap().to_text();
        t = t.replacen('.', "x", 1);
        assert!(matches!(MazeGrid::from_text(&t), Err(Error::MazeFormat { line: 2, .. })));
    }
}
