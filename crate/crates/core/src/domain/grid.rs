use super::DomainError;

/// Label of one grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    /// Blocks both motion and sight (walls, furniture).
    Occlusion,
    /// Traversable; never holds an object.
    Empty,
    /// May hold an object; not traversable, does not block sight.
    Candidate,
}

impl Cell {
    pub fn to_char(self) -> char {
        match self {
            Cell::Occlusion => '#',
            Cell::Empty => '.',
            Cell::Candidate => 'C',
        }
    }

    pub fn from_char(c: char) -> Option<Cell> {
        match c {
            '#' => Some(Cell::Occlusion),
            '.' => Some(Cell::Empty),
            'C' => Some(Cell::Candidate),
            _ => None,
        }
    }
}

/// Row-major occupancy grid; `(x, y)` is (column, row), row 0 on top.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    width: usize,
    height: usize,
    /// Meters per cell. Carried along, never used in computation.
    pub cell_size: f64,
    cells: Vec<Cell>,
}

impl GridMap {
    pub fn new(width: usize, height: usize, cells: Vec<Cell>) -> Result<Self, DomainError> {
        if width == 0 || height == 0 || cells.len() != width * height {
            return Err(DomainError::DimensionMismatch { width, height, cells: cells.len() });
        }
        Ok(Self { width, height, cell_size: 1.0, cells })
    }

    /// Parses rows of `#`, `.` and `C`. Test and demo convenience.
    pub fn from_rows(rows: &[&str]) -> Result<Self, DomainError> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut cells = Vec::with_capacity(width * height);
        for r in rows {
            if r.chars().count() != width {
                return Err(DomainError::DimensionMismatch { width, height, cells: 0 });
            }
            for ch in r.chars() {
                cells.push(Cell::from_char(ch).ok_or(DomainError::DimensionMismatch { width, height, cells: 0 })?);
            }
        }
        Self::new(width, height, cells)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn in_bounds(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    pub fn get(&self, x: usize, y: usize) -> Cell {
        self.cells[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, cell: Cell) {
        self.cells[y * self.width + x] = cell;
    }

    /// Cell at signed coordinates; out of bounds reads as `None`.
    pub fn get_signed(&self, x: i64, y: i64) -> Option<Cell> {
        self.in_bounds(x, y).then(|| self.get(x as usize, y as usize))
    }

    pub fn count(&self, cell: Cell) -> usize {
        self.cells.iter().filter(|&&c| c == cell).count()
    }

    /// Checks the labelling a search scenario needs: some free space and
    /// somewhere for the target to be.
    pub fn validate_for_search(&self) -> Result<(), DomainError> {
        if self.count(Cell::Empty) == 0 {
            return Err(DomainError::NoEmptyCell);
        }
        if self.count(Cell::Candidate) == 0 {
            return Err(DomainError::NoCandidateCell);
        }
        Ok(())
    }

    pub fn rows(&self) -> impl Iterator<Item = String> + '_ {
        self.cells.chunks(self.width).map(|row| row.iter().map(|c| c.to_char()).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CandidateId(pub u32);

impl CandidateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Candidate cells in row-major order; position in the list is the index.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    cells: Vec<(usize, usize)>,
    lookup: Vec<Option<CandidateId>>,
    width: usize,
}

impl CandidateSet {
    pub fn from_map(map: &GridMap) -> Self {
        let mut cells = Vec::new();
        let mut lookup = vec![None; map.width() * map.height()];
        for y in 0..map.height() {
            for x in 0..map.width() {
                if map.get(x, y) == Cell::Candidate {
                    lookup[y * map.width() + x] = Some(CandidateId(cells.len() as u32));
                    cells.push((x, y));
                }
            }
        }
        Self { cells, lookup, width: map.width() }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell(&self, id: CandidateId) -> (usize, usize) {
        self.cells[id.index()]
    }

    pub fn id_of(&self, x: usize, y: usize) -> Option<CandidateId> {
        self.lookup.get(y * self.width + x).copied().flatten()
    }

    pub fn iter(&self) -> impl Iterator<Item = (CandidateId, (usize, usize))> + '_ {
        self.cells.iter().enumerate().map(|(i, &c)| (CandidateId(i as u32), c))
    }
}
