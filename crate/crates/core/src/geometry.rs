//! Point sets on a pixel grid and the classic Hausdorff distances.
//!
//! Coordinates are `(row, col)` in pixel units with the origin at the
//! top-left pixel center. Point sets are stored in order but treated as
//! unordered: permuting the storage order never changes a distance result.

use crate::error::{Error, Result};

/// A 2D location in pixel units. Coordinates are real-valued because
/// rescaled ground truth need not land on integer pixel centers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    row: f64,
    col: f64,
}

impl Point {
    /// Creates a point, rejecting NaN and infinite coordinates.
    pub fn new(row: f64, col: f64) -> Result<Self> {
        if !row.is_finite() || !col.is_finite() {
            return Err(Error::NonFinitePoint { row, col });
        }
        Ok(Self { row, col })
    }

    pub fn row(&self) -> f64 {
        self.row
    }

    pub fn col(&self) -> f64 {
        self.col
    }
}

/// An unordered collection of points. Duplicates are permitted and count
/// toward set sizes in averaged distances.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointSet {
    points: Vec<Point>,
}

impl PointSet {
    pub fn new(points: Vec<Point>) -> Self {
        Self { points }
    }

    /// Builds a set from `(row, col)` pairs, validating finiteness.
    pub fn from_coords(coords: &[(f64, f64)]) -> Result<Self> {
        coords
            .iter()
            .map(|&(r, c)| Point::new(r, c))
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.points.iter()
    }

    pub fn push(&mut self, point: Point) {
        self.points.push(point);
    }
}

impl FromIterator<Point> for PointSet {
    fn from_iter<T: IntoIterator<Item = Point>>(iter: T) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

/// Dimensions of the pixel grid Ω = {0..height−1} × {0..width−1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    height: usize,
    width: usize,
}

impl GridSpec {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidParam {
                name: "grid",
                reason: format!("dimensions must be positive, got {height}x{width}"),
            });
        }
        Ok(Self { height, width })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn num_pixels(&self) -> usize {
        self.height * self.width
    }

    /// Row-major index of pixel `(row, col)`.
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    /// Pixel center for a row-major index.
    pub fn pixel(&self, index: usize) -> Point {
        Point {
            row: (index / self.width) as f64,
            col: (index % self.width) as f64,
        }
    }

    /// True when the point lies within `[0, height−1] × [0, width−1]`.
    pub fn contains(&self, p: Point) -> bool {
        p.row >= 0.0
            && p.col >= 0.0
            && p.row <= (self.height - 1) as f64
            && p.col <= (self.width - 1) as f64
    }

    /// Largest distance between any two pixels: the grid diagonal
    /// `√((H−1)² + (W−1)²)`. The maximum runs over pixel coordinates, so a
    /// 1×1 grid has diagonal 0.
    pub fn diagonal(&self) -> f64 {
        let dr = (self.height - 1) as f64;
        let dc = (self.width - 1) as f64;
        (dr * dr + dc * dc).sqrt()
    }
}

/// Euclidean distance `√((Δrow)² + (Δcol)²)`.
pub fn euclidean(a: Point, b: Point) -> f64 {
    let dr = a.row - b.row;
    let dc = a.col - b.col;
    (dr * dr + dc * dc).sqrt()
}

/// Sums values in a canonical (sorted) order so the result does not depend
/// on the caller's storage order.
pub(crate) fn sum_canonical(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum()
}

fn min_distance_to(p: Point, set: &PointSet) -> f64 {
    let mut best = f64::INFINITY;
    for &q in set.iter() {
        let d = euclidean(p, q);
        if d < best {
            best = d;
        }
    }
    best
}

fn require_non_empty(set: &PointSet, context: &'static str) -> Result<()> {
    if set.is_empty() {
        Err(Error::EmptySet { context })
    } else {
        Ok(())
    }
}

/// Directed term of the Hausdorff distance: `max_{x∈X} min_{y∈Y} d(x, y)`.
fn directed_hausdorff(x: &PointSet, y: &PointSet) -> f64 {
    let mut worst = 0.0_f64;
    for &p in x.iter() {
        let d = min_distance_to(p, y);
        if d > worst {
            worst = d;
        }
    }
    worst
}

/// The Hausdorff distance between two non-empty point sets: the larger of
/// the two directed max-min terms.
pub fn hausdorff(x: &PointSet, y: &PointSet) -> Result<f64> {
    require_non_empty(x, "hausdorff")?;
    require_non_empty(y, "hausdorff")?;
    Ok(directed_hausdorff(x, y).max(directed_hausdorff(y, x)))
}

/// The average Hausdorff distance:
/// `(1/|X|)·Σ_x min_y d(x,y) + (1/|Y|)·Σ_y min_x d(x,y)`.
///
/// Symmetric in `(X, Y)`; duplicates contribute to both the sums and the
/// set sizes.
pub fn average_hausdorff(x: &PointSet, y: &PointSet) -> Result<f64> {
    require_non_empty(x, "average_hausdorff")?;
    require_non_empty(y, "average_hausdorff")?;
    let forward: Vec<f64> = x.iter().map(|&p| min_distance_to(p, y)).collect();
    let backward: Vec<f64> = y.iter().map(|&q| min_distance_to(q, x)).collect();
    Ok(sum_canonical(forward) / x.len() as f64 + sum_canonical(backward) / y.len() as f64)
}

/// Per-pixel field of nearest distances to `y`: `field[x] = min_{y∈Y} d(x, y)`
/// for every pixel of the grid, in row-major order.
pub fn min_dist_field(grid: GridSpec, y: &PointSet) -> Result<Vec<f64>> {
    require_non_empty(y, "min_dist_field")?;
    let mut field = vec![f64::INFINITY; grid.num_pixels()];
    for (i, slot) in field.iter_mut().enumerate() {
        *slot = min_distance_to(grid.pixel(i), y);
    }
    Ok(field)
}
