use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::model::{ContentOp, Scope, StructChild, StructNode, TagKind};
use crate::region::RegionId;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeaderMode {
    #[default]
    None,
    FirstRow,
    FirstCol,
    Both,
}

impl HeaderMode {
    fn header_row(self) -> bool {
        matches!(self, HeaderMode::FirstRow | HeaderMode::Both)
    }

    fn header_col(self) -> bool {
        matches!(self, HeaderMode::FirstCol | HeaderMode::Both)
    }
}

/// Separator lines of a table region. Horizontal lines are y coordinates,
/// vertical lines x coordinates, both strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableGrid {
    pub region: RegionId,
    #[serde(default)]
    pub h_lines: Vec<f64>,
    #[serde(default)]
    pub v_lines: Vec<f64>,
    #[serde(default)]
    pub header_mode: HeaderMode,
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite()) && v.windows(2).all(|w| w[0] < w[1])
}

impl TableGrid {
    pub fn rows(&self) -> usize {
        self.h_lines.len() + 1
    }

    pub fn cols(&self) -> usize {
        self.v_lines.len() + 1
    }

    /// Lines sorted and inside `bbox`.
    pub fn check(&self, bbox: &Rect) -> Result<()> {
        if !strictly_increasing(&self.h_lines) || !strictly_increasing(&self.v_lines) {
            return Err(Error::InvalidGrid(format!("grid lines of {} are not strictly sorted", self.region)));
        }
        let outside_h = self.h_lines.iter().any(|y| *y < bbox.y0 || *y > bbox.y1);
        let outside_v = self.v_lines.iter().any(|x| *x < bbox.x0 || *x > bbox.x1);
        if outside_h || outside_v {
            return Err(Error::InvalidGrid(format!("grid lines of {} leave the region box", self.region)));
        }
        Ok(())
    }

    /// Cell of a point: row 0 is the top band, column 0 the left one.
    pub fn cell_of(&self, x: f64, y: f64) -> (usize, usize) {
        let row = self.h_lines.iter().filter(|h| **h > y).count();
        let col = self.v_lines.iter().filter(|v| **v < x).count();
        (row, col)
    }
}

/// Builds Table > TR > TH/TD. Each operator goes to the cell containing its
/// box center; every cell of the grid is emitted, empty ones included.
pub fn build_table(grid: &TableGrid, bbox: &Rect, ops: &[&ContentOp]) -> Result<StructNode> {
    if ops.is_empty() {
        return Err(Error::EmptyGrid(grid.region));
    }
    grid.check(bbox)?;
    let (rows, cols) = (grid.rows(), grid.cols());
    let mut cells: Vec<Vec<StructNode>> = (0..rows)
        .map(|r| {
            (0..cols)
                .map(|c| {
                    let head_row = grid.header_mode.header_row() && r == 0;
                    let head_col = grid.header_mode.header_col() && c == 0;
                    let mut node = StructNode::new(if head_row || head_col { TagKind::TH } else { TagKind::TD });
                    node.attributes.scope = match (head_row, head_col) {
                        (true, true) => Some(Scope::Both),
                        (true, false) => Some(Scope::Column),
                        (false, true) => Some(Scope::Row),
                        (false, false) => None,
                    };
                    node
                })
                .collect()
        })
        .collect();
    for op in ops {
        let center = op.bbox.center();
        let (r, c) = grid.cell_of(center.x, center.y);
        cells[r][c].children.push(StructChild::Content(op.id));
    }
    let rows = cells
        .into_iter()
        .map(|row| StructNode::with_children(TagKind::TR, row.into_iter().map(StructChild::Node).collect()))
        .map(StructChild::Node)
        .collect();
    Ok(StructNode::with_children(TagKind::Table, rows))
}
