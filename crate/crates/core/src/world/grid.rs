use super::{Graph, GraphBuilder, VertexId, WorldError};
use crate::scalar::Scalar;

/// Occupancy grid in the community benchmark `.map` layout.
///
/// Cells keep their original character so that writing a parsed map back out
/// reproduces the input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    pub map_type: String,
    pub height: usize,
    pub width: usize,
    cells: Vec<u8>,
}

fn is_passable(c: u8) -> bool {
    matches!(c, b'.' | b'G')
}

fn is_known(c: u8) -> bool {
    matches!(c, b'.' | b'G' | b'@' | b'O' | b'T' | b'S' | b'W')
}

fn header_value<'a>(line: Option<&'a str>, key: &str) -> Result<&'a str, WorldError> {
    let line = line.ok_or_else(|| WorldError::Grid(format!("missing `{key}` header line")))?;
    let mut parts = line.split_whitespace();
    match (parts.next(), parts.next(), parts.next()) {
        (Some(k), Some(v), None) if k == key => Ok(v),
        _ => Err(WorldError::Grid(format!(
            "expected `{key} <value>`, found `{line}`"
        ))),
    }
}

impl GridMap {
    pub fn from_rows<R: AsRef<str>>(rows: &[R]) -> Result<Self, WorldError> {
        let height = rows.len();
        let width = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut cells = Vec::with_capacity(height * width);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref().as_bytes();
            if row.len() != width {
                return Err(WorldError::Grid(format!(
                    "row {i} has width {}, expected {width}",
                    row.len()
                )));
            }
            if let Some(&c) = row.iter().find(|&&c| !is_known(c)) {
                return Err(WorldError::Grid(format!(
                    "unknown cell character {:?} in row {i}",
                    c as char
                )));
            }
            cells.extend_from_slice(row);
        }
        let grid = Self {
            map_type: "octile".to_string(),
            height,
            width,
            cells,
        };
        if grid.passable_count() == 0 {
            return Err(WorldError::Grid("map has no passable cells".into()));
        }
        Ok(grid)
    }

    pub fn parse(text: &str) -> Result<Self, WorldError> {
        let mut lines = text.lines();
        let map_type = header_value(lines.next(), "type")?.to_string();
        let height: usize = header_value(lines.next(), "height")?
            .parse()
            .map_err(|_| WorldError::Grid("height is not a number".into()))?;
        let width: usize = header_value(lines.next(), "width")?
            .parse()
            .map_err(|_| WorldError::Grid("width is not a number".into()))?;
        match lines.next() {
            Some(l) if l.trim() == "map" => {}
            other => {
                return Err(WorldError::Grid(format!(
                    "expected `map` line, found {:?}",
                    other.unwrap_or("end of input")
                )))
            }
        }
        let rows: Vec<&str> = lines.by_ref().take(height).collect();
        if rows.len() != height {
            return Err(WorldError::Grid(format!(
                "expected {height} rows, found {}",
                rows.len()
            )));
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(WorldError::Grid(format!("more than {height} rows")));
        }
        let mut grid = Self::from_rows(&rows)?;
        if grid.width != width {
            return Err(WorldError::Grid(format!(
                "rows have width {}, header says {width}",
                grid.width
            )));
        }
        grid.map_type = map_type;
        Ok(grid)
    }

    pub fn serialize(&self) -> String {
        let mut out = format!(
            "type {}\nheight {}\nwidth {}\nmap\n",
            self.map_type, self.height, self.width
        );
        for row in self.cells.chunks(self.width.max(1)) {
            out.push_str(std::str::from_utf8(row).expect("ascii cells"));
            out.push('\n');
        }
        out
    }

    pub fn passable(&self, x: usize, y: usize) -> bool {
        x < self.width && y < self.height && is_passable(self.cells[y * self.width + x])
    }

    pub fn passable_count(&self) -> usize {
        self.cells.iter().filter(|&&c| is_passable(c)).count()
    }

    /// Name of the vertex for cell `(x, y)`, as used in instance documents.
    pub fn cell_name(x: usize, y: usize) -> String {
        format!("{x},{y}")
    }

    /// One vertex per passable cell at its center, unit edges between
    /// 4-neighbors. Vertices are numbered row-major.
    pub fn to_graph<S: Scalar>(&self) -> Result<Graph<S>, WorldError> {
        let mut b = GraphBuilder::new();
        let mut ids: Vec<Option<VertexId>> = vec![None; self.width * self.height];
        for y in 0..self.height {
            for x in 0..self.width {
                if self.passable(x, y) {
                    let id = b.vertex(
                        Self::cell_name(x, y),
                        S::of_usize(x) + S::half(),
                        S::of_usize(y) + S::half(),
                    );
                    ids[y * self.width + x] = Some(id);
                }
            }
        }
        for y in 0..self.height {
            for x in 0..self.width {
                let Some(u) = ids[y * self.width + x] else {
                    continue;
                };
                if x + 1 < self.width {
                    if let Some(v) = ids[y * self.width + x + 1] {
                        b.edge(u, v, S::one());
                    }
                }
                if y + 1 < self.height {
                    if let Some(v) = ids[(y + 1) * self.width + x] {
                        b.edge(u, v, S::one());
                    }
                }
            }
        }
        b.build()
    }
}

pub fn parse_grid_map<S: Scalar>(text: &str) -> Result<Graph<S>, WorldError> {
    GridMap::parse(text)?.to_graph()
}

pub fn serialize_grid_map(grid: &GridMap) -> String {
    grid.serialize()
}
