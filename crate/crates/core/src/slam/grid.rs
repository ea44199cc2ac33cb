use std::collections::HashMap;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

/// One map cell: running-mean bank angle (rad), number of writes, and the travel
/// distance at the most recent write.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub bank: f64,
    pub count: u32,
    pub last_visit: f64,
}

pub type CellIndex = (i32, i32);

/// Sparse square-cell map of road bank angle.
#[derive(Clone, Debug, PartialEq)]
pub struct TerrainGrid {
    cell_size: f64,
    cells: HashMap<CellIndex, Cell>,
}

impl TerrainGrid {
    pub fn new(cell_size: f64) -> Self {
        assert!(cell_size > 0.0, "cell size must be positive");
        Self { cell_size, cells: HashMap::new() }
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn index(&self, p: &Vector2<f64>) -> CellIndex {
        ((p.x / self.cell_size).floor() as i32, (p.y / self.cell_size).floor() as i32)
    }

    pub fn center(&self, idx: CellIndex) -> Vector2<f64> {
        Vector2::new((idx.0 as f64 + 0.5) * self.cell_size, (idx.1 as f64 + 0.5) * self.cell_size)
    }

    pub fn get(&self, idx: CellIndex) -> Option<&Cell> {
        self.cells.get(&idx)
    }

    pub fn at(&self, p: &Vector2<f64>) -> Option<&Cell> {
        self.cells.get(&self.index(p))
    }

    /// Folds a bank observation into the running mean of its cell.
    pub fn observe(&mut self, p: &Vector2<f64>, bank: f64, distance: f64) {
        let idx = self.index(p);
        self.cells
            .entry(idx)
            .and_modify(|c| {
                c.count += 1;
                c.bank += (bank - c.bank) / c.count as f64;
                c.last_visit = distance;
            })
            .or_insert(Cell { bank, count: 1, last_visit: distance });
    }

    /// Stores a cell verbatim; used when loading a saved map.
    pub fn insert(&mut self, idx: CellIndex, cell: Cell) {
        self.cells.insert(idx, cell);
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Cells in ascending index order.
    pub fn sorted_cells(&self) -> Vec<(CellIndex, Cell)> {
        let mut v: Vec<_> = self.cells.iter().map(|(k, c)| (*k, *c)).collect();
        v.sort_by_key(|(k, _)| *k);
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn running_mean() {
        let mut g = TerrainGrid::new(1.5);
        let p = Vector2::new(0.2, 0.3);
        g.observe(&p, 2f64.to_radians(), 0.0);
        let c = *g.at(&p).unwrap();
        assert_relative_eq!(c.bank, 2f64.to_radians());
        assert_eq!(c.count, 1);
        g.observe(&p, 4f64.to_radians(), 0.5);
        let c = *g.at(&p).unwrap();
        assert_relative_eq!(c.bank, 3f64.to_radians(), epsilon = 1e-15);
        assert_eq!(c.count, 2);
        assert_eq!(c.last_visit, 0.5);
    }

    #[test]
    fn floor_division_indexing() {
        let g = TerrainGrid::new(1.5);
        assert_eq!(g.index(&Vector2::new(0.7, 0.0)).0, 0);
        assert_eq!(g.index(&Vector2::new(1.6, 0.0)).0, 1);
        assert_eq!(g.index(&Vector2::new(-0.1, -1.6)), (-1, -2));
        assert_eq!(g.center((0, 0)), Vector2::new(0.75, 0.75));
    }
}
