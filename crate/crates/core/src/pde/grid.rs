use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};

use crate::realization::{Basis, TorusPoint};
use crate::{Error, Result};

/// Uniform `M^d` grid on the flat torus `R^d / UZ^d`.
///
/// Cell `k = (k₁ … k_d)` covers fractional coordinates
/// `[k_i/M, (k_i+1)/M)` and is sampled at its centre `(k_i + ½)/M`.
/// Cells are flattened row-major, first index most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusGrid {
    basis: Basis,
    resolution: usize,
    cells: usize,
}

impl TorusGrid {
    pub fn new(basis: Basis, resolution: usize) -> Result<Self> {
        if resolution < 4 {
            return Err(Error::InvalidArgument(format!("grid resolution must be at least 4, got {resolution}")));
        }
        let d = basis.dimension();
        let cells = resolution
            .checked_pow(d as u32)
            .filter(|&c| c <= 1 << 28)
            .ok_or_else(|| Error::InvalidArgument(format!("grid {resolution}^{d} is too large")))?;
        Ok(Self { basis, resolution, cells })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn dimension(&self) -> usize {
        self.basis.dimension()
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn cell_count(&self) -> usize {
        self.cells
    }

    /// `vol(T^d) = |det U|`.
    pub fn volume(&self) -> f64 {
        self.basis.volume()
    }

    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.cells as f64
    }

    /// Flat index of a cell; indices are taken modulo `M`.
    pub fn cell_index(&self, k: &[i64]) -> usize {
        let m = self.resolution as i64;
        k.iter().fold(0usize, |acc, &c| acc * self.resolution + c.rem_euclid(m) as usize)
    }

    pub fn cell_coords(&self, mut flat: usize) -> Vec<usize> {
        let mut k = vec![0; self.dimension()];
        for c in k.iter_mut().rev() {
            *c = flat % self.resolution;
            flat /= self.resolution;
        }
        k
    }

    /// Cell containing the given fractional coordinates.
    pub fn locate(&self, fractional: &DVector<f64>) -> usize {
        let m = self.resolution as f64;
        let k: Vec<i64> = fractional.iter().map(|s| (s * m).floor() as i64).collect();
        self.cell_index(&k)
    }

    pub fn center_fractional(&self, flat: usize) -> DVector<f64> {
        let m = self.resolution as f64;
        DVector::from_iterator(self.dimension(), self.cell_coords(flat).into_iter().map(|k| (k as f64 + 0.5) / m))
    }

    pub fn center(&self, flat: usize) -> TorusPoint {
        TorusPoint::from_fractional(&self.basis, self.center_fractional(flat))
    }

    /// Samples `f` at every cell centre.
    pub fn sample(&self, f: impl Fn(&TorusPoint) -> f64) -> Result<TorusField> {
        let values = (0..self.cells).map(|i| f(&self.center(i))).collect();
        TorusField::new(self.clone(), values)
    }

    /// Same resolution and the same basis up to `1e-12` per entry.
    pub fn compatible(&self, other: &TorusGrid) -> bool {
        self.resolution == other.resolution
            && self.dimension() == other.dimension()
            && (self.basis.matrix() - other.basis.matrix()).amax() <= 1e-12
    }
}

/// Real values on the cells of a [`TorusGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct TorusField {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl TorusField {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} cells",
                values.len(),
                grid.cell_count()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite value in cell {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Result<Self> {
        let n = grid.cell_count();
        Self::new(grid, vec![c; n])
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `∫ ρ = Σ values · cell volume`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Checks `lo − slack ≤ ρ ≤ hi + slack` without altering values.
    pub fn check_bounds(&self, lo: f64, hi: f64, slack: f64) -> Result<()> {
        for (i, &v) in self.values.iter().enumerate() {
            if v < lo - slack || v > hi + slack {
                return Err(Error::MaximumPrinciple(format!("cell {i} has value {v} outside [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    /// Block average onto the grid of resolution `M / factor`.
    pub fn coarsen(&self, factor: usize) -> Result<TorusField> {
        let m = self.grid.resolution();
        if factor == 0 || !m.is_multiple_of(factor) {
            return Err(Error::GridMismatch(format!("cannot coarsen M = {m} by {factor}")));
        }
        let coarse = TorusGrid::new(self.grid.basis().clone(), m / factor)?;
        let mut out = vec![0.0; coarse.cell_count()];
        for (i, v) in self.values.iter().enumerate() {
            let k: Vec<i64> = self.grid.cell_coords(i).iter().map(|&c| (c / factor) as i64).collect();
            out[coarse.cell_index(&k)] += v;
        }
        let block = factor.pow(self.grid.dimension() as u32) as f64;
        out.iter_mut().for_each(|v| *v /= block);
        TorusField::new(coarse, out)
    }

    /// CSV with header rows `d,…`, `M,…`, `U,…` (row-major), then
    /// `s_1,…,s_d,value` and one row per cell.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let d = self.grid.dimension();
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(writer);
        w.write_record(["d".to_string(), d.to_string()])?;
        w.write_record(["M".to_string(), self.grid.resolution().to_string()])?;
        let u = self.grid.basis().matrix();
        let mut row = vec!["U".to_string()];
        for i in 0..d {
            for j in 0..d {
                row.push(format!("{:?}", u[(i, j)]));
            }
        }
        w.write_record(&row)?;
        let mut header: Vec<String> = (1..=d).map(|i| format!("s_{i}")).collect();
        header.push("value".into());
        w.write_record(&header)?;
        for (i, v) in self.values.iter().enumerate() {
            let mut row: Vec<String> = self.grid.cell_coords(i).iter().map(ToString::to_string).collect();
            row.push(format!("{v:?}"));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<TorusField> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(reader);
        let mut records = rdr.records();
        let mut next = |what: &str| -> Result<csv::StringRecord> {
            records
                .next()
                .ok_or_else(|| Error::InvalidArgument(format!("field CSV ended before {what}")))?
                .map_err(Error::from)
        };
        let bad = |what: &str| Error::InvalidArgument(format!("field CSV: bad {what}"));
        let d_row = next("d")?;
        if d_row.get(0) != Some("d") {
            return Err(bad("d row"));
        }
        let d: usize = d_row.get(1).and_then(|s| s.parse().ok()).filter(|&d| d > 0).ok_or_else(|| bad("d"))?;
        let m_row = next("M")?;
        if m_row.get(0) != Some("M") {
            return Err(bad("M row"));
        }
        let m: usize = m_row.get(1).and_then(|s| s.parse().ok()).ok_or_else(|| bad("M"))?;
        let u_row = next("U")?;
        if u_row.get(0) != Some("U") || u_row.len() != 1 + d * d {
            return Err(bad("U row"));
        }
        let entries = u_row
            .iter()
            .skip(1)
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad("U entry")))
            .collect::<Result<Vec<_>>>()?;
        let grid = TorusGrid::new(Basis::from_matrix(DMatrix::from_row_slice(d, d, &entries))?, m)?;
        next("column header")?;
        let mut values = vec![f64::NAN; grid.cell_count()];
        let mut seen = vec![false; grid.cell_count()];
        for rec in records {
            let rec = rec?;
            if rec.len() != d + 1 {
                return Err(bad("cell row"));
            }
            let k = (0..d)
                .map(|i| rec[i].trim().parse::<i64>().ok().filter(|&k| k >= 0 && (k as usize) < m).ok_or_else(|| bad("cell index")))
                .collect::<Result<Vec<_>>>()?;
            let i = grid.cell_index(&k);
            if seen[i] {
                return Err(bad("duplicate cell"));
            }
            seen[i] = true;
            values[i] = rec[d].trim().parse().map_err(|_| bad("value"))?;
        }
        if seen.iter().any(|s| !s) {
            return Err(bad("cell coverage"));
        }
        TorusField::new(grid, values)
    }
}

/// `Σ |a − b| · cellvol / vol(T^d)`, i.e. the mean absolute difference.
pub fn l1_distance(a: &TorusField, b: &TorusField) -> Result<f64> {
    if !a.grid.compatible(&b.grid) {
        return Err(Error::GridMismatch("fields live on different grids".into()));
    }
    let s: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).sum();
    Ok(s / a.values.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(d: usize, m: usize) -> TorusGrid {
        TorusGrid::new(Basis::identity(d), m).unwrap()
    }

    #[test]
    fn indexing_round_trip() {
        let g = unit(3, 5);
        for i in 0..g.cell_count() {
            let k: Vec<i64> = g.cell_coords(i).iter().map(|&c| c as i64).collect();
            assert_eq!(g.cell_index(&k), i);
        }
        assert_eq!(g.cell_index(&[-1, 0, 5]), 4 * 25);
        assert!(TorusGrid::new(Basis::identity(1), 3).is_err());
    }

    #[test]
    fn locate_matches_center() {
        let g = TorusGrid::new(Basis::from_columns(&[vec![2.0, 0.0], vec![1.0, 1.0]]).unwrap(), 8).unwrap();
        for i in 0..g.cell_count() {
            assert_eq!(g.locate(&g.center_fractional(i)), i);
        }
        assert!((g.volume() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn l1_examples() {
        let g = unit(2, 4);
        let zero = TorusField::constant(g.clone(), 0.0).unwrap();
        let one = TorusField::constant(g.clone(), 1.0).unwrap();
        assert_eq!(l1_distance(&zero, &zero).unwrap(), 0.0);
        assert_eq!(l1_distance(&zero, &one).unwrap(), 1.0);
        let mut v = vec![0.0; 16];
        v[5] = 16.0;
        let spike = TorusField::new(g, v).unwrap();
        assert_eq!(l1_distance(&zero, &spike).unwrap(), 1.0);
        let other = TorusField::constant(unit(2, 8), 0.0).unwrap();
        assert!(matches!(l1_distance(&zero, &other), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn coarsen_preserves_mean() {
        let g = unit(2, 8);
        let f = g.sample(|p| p.fractional()[0] * 3.0 + p.fractional()[1]).unwrap();
        let c = f.coarsen(2).unwrap();
        assert_eq!(c.grid().resolution(), 4);
        assert!((c.mean() - f.mean()).abs() < 1e-14);
        assert!(f.coarsen(3).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let g = TorusGrid::new(Basis::from_columns(&[vec![2.0, 0.0], vec![1.0, 1.0]]).unwrap(), 4).unwrap();
        let f = g.sample(|p| p.coords()[0].sin() + 0.1).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("d,2\nM,4\nU,2.0,1.0,0.0,1.0\ns_1,s_2,value\n"));
        let back = TorusField::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, f);
        assert!(TorusField::read_csv("d,1\nM,4\nU,1\ns_1,value\n0,1\n".as_bytes()).is_err());
    }

    #[test]
    fn bounds_check_does_not_clamp() {
        let f = TorusField::new(unit(1, 4), vec![0.0, 0.5, 1.0 + 1e-12, 1.2]).unwrap();
        assert!(f.check_bounds(0.0, 1.0, 1e-10).is_err());
        assert_eq!(f.values()[3], 1.2);
        assert!(TorusField::new(unit(1, 4), vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
    }
}
