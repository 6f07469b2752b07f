//! Dense node-centered scalar fields on the mapped rectangle grid.

use std::ops::{Index, IndexMut};

/// Grid function on the (nx+1) x (ny+1) nodes of the mapped rectangle.
/// Storage is column-contiguous: all y2-nodes of one x1-column in a row.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    nx: usize,
    ny: usize,
    data: Vec<f64>,
}

impl Field {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        Field {
            nx,
            ny,
            data: vec![0.0; (nx + 1) * (ny + 1)],
        }
    }

    pub fn constant(nx: usize, ny: usize, value: f64) -> Self {
        Field {
            nx,
            ny,
            data: vec![value; (nx + 1) * (ny + 1)],
        }
    }

    pub fn from_fn(nx: usize, ny: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut field = Field::zeros(nx, ny);
        for i in 0..=nx {
            for j in 0..=ny {
                field[(i, j)] = f(i, j);
            }
        }
        field
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.nx
    }

    #[inline]
    pub fn ny(&self) -> usize {
        self.ny
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= self.nx && j <= self.ny);
        i * (self.ny + 1) + j
    }

    /// One x1-column as a contiguous slice over j = 0..=ny.
    pub fn column(&self, i: usize) -> &[f64] {
        let start = self.idx(i, 0);
        &self.data[start..start + self.ny + 1]
    }

    pub fn column_mut(&mut self, i: usize) -> &mut [f64] {
        let start = self.idx(i, 0);
        let end = start + self.ny + 1;
        &mut self.data[start..end]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn sup_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sup_diff(&self, other: &Field) -> f64 {
        debug_assert_eq!(self.data.len(), other.data.len());
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn scale_add(&mut self, a: f64, other: &Field) {
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += a * y;
        }
    }

    pub fn map_in_place(&mut self, mut f: impl FnMut(f64) -> f64) {
        for v in &mut self.data {
            *v = f(*v);
        }
    }
}

impl Index<(usize, usize)> for Field {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * (self.ny + 1) + j]
    }
}

impl IndexMut<(usize, usize)> for Field {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * (self.ny + 1) + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_and_columns() {
        let f = Field::from_fn(3, 2, |i, j| (10 * i + j) as f64);
        assert_eq!(f[(2, 1)], 21.0);
        assert_eq!(f.column(1), &[10.0, 11.0, 12.0]);
        assert_eq!(f.sup_norm(), 32.0);
    }
}
