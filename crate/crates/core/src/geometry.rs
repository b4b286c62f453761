//! Axis-aligned rectangle arithmetic shared by generation and scoring.
//!
//! Everything is expressed with real-valued center coordinates. Grid data
//! enters through [`rect_from_grid`], where `(x, y)` names the top-left cell
//! and y grows downward.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An axis-aligned rectangle described by its center and extent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacedRect {
    pub cx: f64,
    pub cy: f64,
    pub width: f64,
    pub height: f64,
}

impl PlacedRect {
    pub fn new(cx: f64, cy: f64, width: f64, height: f64) -> Result<Self> {
        let r = PlacedRect { cx, cy, width, height };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.cx, self.cy, self.width, self.height]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidRecord(format!("non-finite rectangle field in {self:?}")));
        }
        if self.width <= 0.0 || self.height <= 0.0 {
            return Err(Error::InvalidRecord(format!(
                "rectangle extent must be positive, got {}x{}",
                self.width, self.height
            )));
        }
        Ok(())
    }

    pub fn min_x(&self) -> f64 {
        self.cx - self.width / 2.0
    }

    pub fn max_x(&self) -> f64 {
        self.cx + self.width / 2.0
    }

    pub fn min_y(&self) -> f64 {
        self.cy - self.height / 2.0
    }

    pub fn max_y(&self) -> f64 {
        self.cy + self.height / 2.0
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn translated(&self, dx: f64, dy: f64) -> PlacedRect {
        PlacedRect {
            cx: self.cx + dx,
            cy: self.cy + dy,
            ..*self
        }
    }

    /// The four corners, in (min,min), (max,min), (max,max), (min,max) order.
    pub fn corners(&self) -> [(f64, f64); 4] {
        [
            (self.min_x(), self.min_y()),
            (self.max_x(), self.min_y()),
            (self.max_x(), self.max_y()),
            (self.min_x(), self.max_y()),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl BoundingBox {
    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        x >= self.min_x && x <= self.max_x && y >= self.min_y && y <= self.max_y
    }

    pub fn union(&self, other: &BoundingBox) -> BoundingBox {
        BoundingBox {
            min_x: self.min_x.min(other.min_x),
            min_y: self.min_y.min(other.min_y),
            max_x: self.max_x.max(other.max_x),
            max_y: self.max_y.max(other.max_y),
        }
    }
}

/// Converts a grid group of `m` unit squares whose first cell is `(x, y)`.
///
/// Unrotated groups run along the row, rotated ones down the column.
pub fn rect_from_grid(x: i64, y: i64, m: u32, rotated: bool) -> Result<PlacedRect> {
    if m < 1 {
        return Err(Error::InvalidRecord(format!(
            "group at ({x}, {y}) must contain at least one square"
        )));
    }
    let len = f64::from(m);
    let (width, height) = if rotated { (1.0, len) } else { (len, 1.0) };
    Ok(PlacedRect {
        cx: x as f64 + width / 2.0,
        cy: y as f64 + height / 2.0,
        width,
        height,
    })
}

/// Intersection area; zero for disjoint or edge-touching rectangles.
pub fn overlap_area(a: &PlacedRect, b: &PlacedRect) -> f64 {
    let dx = a.max_x().min(b.max_x()) - a.min_x().max(b.min_x());
    let dy = a.max_y().min(b.max_y()) - a.min_y().max(b.min_y());
    if dx <= 0.0 || dy <= 0.0 {
        0.0
    } else {
        dx * dy
    }
}

/// Sum of [`overlap_area`] over all unordered pairs.
pub fn total_overlap(layout: &[PlacedRect]) -> f64 {
    let mut total = 0.0;
    for (i, a) in layout.iter().enumerate() {
        for b in &layout[i + 1..] {
            total += overlap_area(a, b);
        }
    }
    total
}

pub fn bounding_box(layout: &[PlacedRect]) -> Result<BoundingBox> {
    let first = layout.first().ok_or(Error::EmptyLayout)?;
    let init = BoundingBox {
        min_x: first.min_x(),
        min_y: first.min_y(),
        max_x: first.max_x(),
        max_y: first.max_y(),
    };
    Ok(layout[1..].iter().fold(init, |bb, r| BoundingBox {
        min_x: bb.min_x.min(r.min_x()),
        min_y: bb.min_y.min(r.min_y()),
        max_x: bb.max_x.max(r.max_x()),
        max_y: bb.max_y.max(r.max_y()),
    }))
}

/// Reflects a rectangle across the vertical line `x = axis`.
pub fn mirror_x(r: &PlacedRect, axis: f64) -> PlacedRect {
    PlacedRect {
        cx: 2.0 * axis - r.cx,
        ..*r
    }
}

/// Separation between two rectangles (0 when they touch or intersect).
pub fn gap_distance(a: &PlacedRect, b: &PlacedRect) -> f64 {
    let dx = (a.min_x().max(b.min_x()) - a.max_x().min(b.max_x())).max(0.0);
    let dy = (a.min_y().max(b.min_y()) - a.max_y().min(b.max_y())).max(0.0);
    dx.hypot(dy)
}
