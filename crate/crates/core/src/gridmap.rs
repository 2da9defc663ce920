//! Occupancy grid with keep-out zones and a deterministic shortest-path
//! planner.
//!
//! Map file format: a one-line header `width height`, then `height` rows of
//! `width` characters — `#` occupied, `.` free, `K` keep-out. Lines starting
//! with `#` are *not* comments in this format (a `#` row is a wall row); the
//! header line disambiguates because it is first.

use std::collections::VecDeque;
use std::fmt;

/// State of a single map cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Free,
    Occupied,
    Keepout,
}

impl Cell {
    fn glyph(self) -> char {
        match self {
            Cell::Free => '.',
            Cell::Occupied => '#',
            Cell::Keepout => 'K',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MapError {
    #[error("map header must be `width height`, got `{0}`")]
    BadHeader(String),
    #[error("map declares {expected} rows but has {found}")]
    WrongRowCount { expected: usize, found: usize },
    #[error("row {row} has {found} cells, expected {expected}")]
    WrongRowWidth {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}, column {col}: unknown cell `{ch}`")]
    BadChar { row: usize, col: usize, ch: char },
    #[error("map dimensions must be nonzero")]
    Empty,
}

/// Planner failure: start and goal are not connected over free cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoPath;

impl fmt::Display for NoPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("no path over free cells")
    }
}

impl std::error::Error for NoPath {}

/// Inclusive cell rectangle. `x1 < x0` or `y1 < y0` denotes a zero-area
/// rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Rect {
    pub fn new(x0: usize, y0: usize, x1: usize, y1: usize) -> Rect {
        Rect { x0, y0, x1, y1 }
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }
}

/// Row-major occupancy grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    width: usize,
    height: usize,
    cells: Vec<Cell>,
}

impl GridMap {
    /// A map of the given size with every cell occupied.
    pub fn filled(width: usize, height: usize) -> GridMap {
        GridMap {
            width,
            height,
            cells: vec![Cell::Occupied; width * height],
        }
    }

    pub fn parse(text: &str) -> Result<GridMap, MapError> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        let mut parts = header.split_whitespace();
        let (Some(w), Some(h), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(MapError::BadHeader(header.to_string()));
        };
        let width: usize = w
            .parse()
            .map_err(|_| MapError::BadHeader(header.to_string()))?;
        let height: usize = h
            .parse()
            .map_err(|_| MapError::BadHeader(header.to_string()))?;
        if width == 0 || height == 0 {
            return Err(MapError::Empty);
        }
        let mut cells = Vec::with_capacity(width * height);
        let mut rows = 0usize;
        for (i, line) in lines.enumerate() {
            if line.is_empty() && rows == height {
                continue; // trailing blank line
            }
            rows += 1;
            if line.chars().count() != width {
                return Err(MapError::WrongRowWidth {
                    row: i + 1,
                    expected: width,
                    found: line.chars().count(),
                });
            }
            for (col, ch) in line.chars().enumerate() {
                cells.push(match ch {
                    '.' => Cell::Free,
                    '#' => Cell::Occupied,
                    'K' => Cell::Keepout,
                    other => {
                        return Err(MapError::BadChar {
                            row: i + 1,
                            col: col + 1,
                            ch: other,
                        })
                    }
                });
            }
        }
        if rows != height {
            return Err(MapError::WrongRowCount {
                expected: height,
                found: rows,
            });
        }
        Ok(GridMap {
            width,
            height,
            cells,
        })
    }

    /// Renders back to the file format; `parse(format(m)) == m`.
    pub fn format(&self) -> String {
        let mut out = String::with_capacity(self.cells.len() + self.height + 16);
        out.push_str(&format!("{} {}\n", self.width, self.height));
        for y in 0..self.height {
            for x in 0..self.width {
                out.push(self.cells[y * self.width + x].glyph());
            }
            out.push('\n');
        }
        out
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> Option<Cell> {
        (x < self.width && y < self.height).then(|| self.cells[y * self.width + x])
    }

    pub fn set(&mut self, x: usize, y: usize, cell: Cell) {
        assert!(x < self.width && y < self.height, "cell out of bounds");
        self.cells[y * self.width + x] = cell;
    }

    fn count(&self, cell: Cell) -> usize {
        self.cells.iter().filter(|c| **c == cell).count()
    }

    pub fn free_cells(&self) -> usize {
        self.count(Cell::Free)
    }

    pub fn occupied_cells(&self) -> usize {
        self.count(Cell::Occupied)
    }

    pub fn keepout_cells(&self) -> usize {
        self.count(Cell::Keepout)
    }

    /// Occupied count as reported in metrics: keep-out cells count as
    /// occupied, so arming a zone increases this figure.
    pub fn reported_occupied(&self) -> usize {
        self.occupied_cells() + self.keepout_cells()
    }

    /// Flips the zone's cells free→keep-out (`on`) or keep-out→free (`off`).
    /// Occupied cells never change. Returns how many cells flipped.
    pub fn toggle_keepout(&mut self, zone: Rect, on: bool) -> usize {
        let (from, to) = if on {
            (Cell::Free, Cell::Keepout)
        } else {
            (Cell::Keepout, Cell::Free)
        };
        let mut flipped = 0;
        for y in zone.y0..=zone.y1.min(self.height.saturating_sub(1)) {
            for x in zone.x0..=zone.x1.min(self.width.saturating_sub(1)) {
                let cell = &mut self.cells[y * self.width + x];
                if *cell == from {
                    *cell = to;
                    flipped += 1;
                }
            }
        }
        flipped
    }

    /// Shortest 4-connected path over free cells only, start and goal
    /// included. Keep-out and occupied cells are barred; a non-free start or
    /// goal has no path. Ties break deterministically: neighbors expand in
    /// row-major order (up, left, right, down).
    pub fn plan_path(
        &self,
        start: (usize, usize),
        goal: (usize, usize),
    ) -> Result<Vec<(usize, usize)>, NoPath> {
        if self.get(start.0, start.1) != Some(Cell::Free)
            || self.get(goal.0, goal.1) != Some(Cell::Free)
        {
            return Err(NoPath);
        }
        if start == goal {
            return Ok(vec![start]);
        }
        let idx = |(x, y): (usize, usize)| y * self.width + x;
        let mut parent: Vec<usize> = vec![usize::MAX; self.cells.len()];
        let mut queue = VecDeque::new();
        parent[idx(start)] = idx(start);
        queue.push_back(start);
        while let Some((x, y)) = queue.pop_front() {
            // row-major neighbor order: (y-1,x), (y,x-1), (y,x+1), (y+1,x)
            let neighbors = [
                (y > 0).then(|| (x, y - 1)),
                (x > 0).then(|| (x - 1, y)),
                (x + 1 < self.width).then(|| (x + 1, y)),
                (y + 1 < self.height).then(|| (x, y + 1)),
            ];
            for next in neighbors.into_iter().flatten() {
                if self.cells[idx(next)] != Cell::Free || parent[idx(next)] != usize::MAX {
                    continue;
                }
                parent[idx(next)] = idx((x, y));
                if next == goal {
                    let mut path = vec![next];
                    let mut at = idx(next);
                    while at != idx(start) {
                        at = parent[at];
                        path.push((at % self.width, at / self.width));
                    }
                    path.reverse();
                    return Ok(path);
                }
                queue.push_back(next);
            }
        }
        Err(NoPath)
    }
}
