//! Uniform grids on `[-L, L]^n` restricted to the unit ball, and fields on them.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::params::ProblemParams;
use crate::error::{Error, Result};

/// Zero layers added on each side for the wide difference stencil.
pub(crate) const PAD: usize = 4;

/// Largest number of grid nodes accepted.
pub const MAX_NODES: usize = 20_000_000;

const FIELD_MAGIC: &[u8; 8] = b"CKNFIELD";
const FIELD_VERSION: u32 = 1;

/// `points` nodes per axis on `[-half_width, half_width]^n`; nodes with
/// `|x| >= 1` are held at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub n: usize,
    pub points: usize,
    pub half_width: f64,
}

impl Grid {
    pub fn new(n: usize, points: usize, half_width: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("grid dimension must be positive".into()));
        }
        if points < 3 {
            return Err(Error::InvalidArgument(format!("need at least 3 points per axis, got {points}")));
        }
        if !(half_width >= 1.0 && half_width.is_finite()) {
            return Err(Error::InvalidArgument(format!("half width {half_width} does not cover the unit ball")));
        }
        let total = (points as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        let padded = ((points + 2 * PAD) as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if total > MAX_NODES as u128 || padded > 4 * MAX_NODES as u128 {
            return Err(Error::InvalidArgument(format!("{points}^{n} nodes exceed the limit of {MAX_NODES}")));
        }
        Ok(Grid { n, points, half_width })
    }

    /// Unit-ball grid on `[-1, 1]^n`.
    pub fn unit(n: usize, points: usize) -> Result<Self> {
        Grid::new(n, points, 1.0)
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    /// Volume element `h^n`.
    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.n as i32)
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.h()
    }

    /// Row-major strides (last axis fastest).
    pub fn strides(&self) -> Vec<usize> {
        (0..self.n).map(|d| self.points.pow((self.n - 1 - d) as u32)).collect()
    }

    pub fn multi_index(&self, mut flat: usize, out: &mut [usize]) {
        for d in (0..self.n).rev() {
            out[d] = flat % self.points;
            flat /= self.points;
        }
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.points + i)
    }

    pub fn position(&self, flat: usize, out: &mut [f64]) {
        let mut f = flat;
        for d in (0..self.n).rev() {
            out[d] = self.coord(f % self.points);
            f /= self.points;
        }
    }

    /// Whether the node lies strictly inside the unit ball.
    pub fn interior_mask(&self) -> Vec<bool> {
        let mut x = vec![0.0; self.n];
        (0..self.len())
            .map(|i| {
                self.position(i, &mut x);
                x.iter().map(|v| v * v).sum::<f64>() < 1.0 - 1e-12
            })
            .collect()
    }

    pub(crate) fn padded_side(&self) -> usize {
        self.points + 2 * PAD
    }

    pub(crate) fn padded_len(&self) -> usize {
        self.padded_side().pow(self.n as u32)
    }

    /// Copies node values into the zero-padded array.
    pub(crate) fn pad(&self, values: &[f64]) -> Vec<f64> {
        let m = self.padded_side();
        let mut out = vec![0.0; self.padded_len()];
        let row = self.points;
        let rows = self.len() / row;
        let mut idx = vec![0usize; self.n];
        for r in 0..rows {
            self.multi_index(r * row, &mut idx);
            let start = idx.iter().fold(0, |acc, &i| acc * m + i + PAD);
            out[start..start + row].copy_from_slice(&values[r * row..(r + 1) * row]);
        }
        out
    }

    /// Inverse of [`Grid::pad`] on the node region.
    pub(crate) fn unpad(&self, padded: &[f64]) -> Vec<f64> {
        let m = self.padded_side();
        let row = self.points;
        let rows = self.len() / row;
        let mut out = vec![0.0; self.len()];
        let mut idx = vec![0usize; self.n];
        for r in 0..rows {
            self.multi_index(r * row, &mut idx);
            let start = idx.iter().fold(0, |acc, &i| acc * m + i + PAD);
            out[r * row..(r + 1) * row].copy_from_slice(&padded[start..start + row]);
        }
        out
    }
}

/// Node values on a [`Grid`], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

/// Extreme values of a field with their node positions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignCertificate {
    pub min: f64,
    pub max: f64,
    pub argmin: Vec<f64>,
    pub argmax: Vec<f64>,
}

impl SignCertificate {
    pub fn changes_sign(&self) -> bool {
        self.min < 0.0 && self.max > 0.0
    }
}

impl GridField {
    pub fn zeros(grid: &Grid) -> Self {
        GridField { grid: grid.clone(), values: vec![0.0; grid.len()] }
    }

    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), actual: values.len() });
        }
        let f = GridField { grid: grid.clone(), values };
        f.validate()?;
        Ok(f)
    }

    /// Samples `f` at interior nodes; exterior nodes are zero.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(grid: &Grid, f: F) -> Self {
        let mask = grid.interior_mask();
        let mut x = vec![0.0; grid.n];
        let values = (0..grid.len())
            .map(|i| {
                if mask[i] {
                    grid.position(i, &mut x);
                    f(&x)
                } else {
                    0.0
                }
            })
            .collect();
        GridField { grid: grid.clone(), values }
    }

    /// Values finite and zero outside the open ball.
    pub fn validate(&self) -> Result<()> {
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite value at node {i}")));
        }
        let mask = self.grid.interior_mask();
        if let Some(i) = (0..self.values.len()).find(|&i| !mask[i] && self.values[i] != 0.0) {
            return Err(Error::InvalidArgument(format!("nonzero value at exterior node {i}")));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, t: f64) -> GridField {
        GridField { grid: self.grid.clone(), values: self.values.iter().map(|v| t * v).collect() }
    }

    /// `self + t * other`.
    pub fn axpy(&self, t: f64, other: &GridField) -> GridField {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + t * b).collect();
        GridField { grid: self.grid.clone(), values }
    }

    pub fn dot(&self, other: &GridField) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum()
    }

    pub fn sign_certificate(&self) -> SignCertificate {
        let (mut imin, mut imax) = (0, 0);
        for (i, &v) in self.values.iter().enumerate() {
            if v < self.values[imin] {
                imin = i;
            }
            if v > self.values[imax] {
                imax = i;
            }
        }
        let mut argmin = vec![0.0; self.grid.n];
        let mut argmax = vec![0.0; self.grid.n];
        self.grid.position(imin, &mut argmin);
        self.grid.position(imax, &mut argmax);
        SignCertificate { min: self.values[imin], max: self.values[imax], argmin, argmax }
    }

    /// Writes the header `(n, points, L, h, p, a, b, q)` followed by the
    /// row-major values, all little-endian.
    pub fn write_to(&self, path: &Path, params: &ProblemParams) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write(&mut w, params)?;
        w.flush()?;
        Ok(())
    }

    pub fn write<W: Write>(&self, w: &mut W, params: &ProblemParams) -> Result<()> {
        w.write_all(FIELD_MAGIC)?;
        w.write_all(&FIELD_VERSION.to_le_bytes())?;
        w.write_all(&(self.grid.n as u32).to_le_bytes())?;
        w.write_all(&(self.grid.points as u32).to_le_bytes())?;
        for v in [self.grid.half_width, self.grid.h(), params.p, params.a, params.b, params.q] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&(self.values.len() as u64).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(path: &Path) -> Result<(GridField, ProblemParams)> {
        GridField::read(&mut BufReader::new(File::open(path)?))
    }

    pub fn read<R: Read>(r: &mut R) -> Result<(GridField, ProblemParams)> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != FIELD_MAGIC {
            return Err(Error::Parse("not a field file".into()));
        }
        let version = read_u32(r)?;
        if version != FIELD_VERSION {
            return Err(Error::Parse(format!("unsupported field file version {version}")));
        }
        let n = read_u32(r)? as usize;
        let points = read_u32(r)? as usize;
        let half_width = read_f64(r)?;
        let _h = read_f64(r)?;
        let (p, a, b, q) = (read_f64(r)?, read_f64(r)?, read_f64(r)?, read_f64(r)?);
        let grid = Grid::new(n, points, half_width)?;
        let len = read_u64(r)? as usize;
        if len != grid.len() {
            return Err(Error::Parse(format!("field file holds {len} values, grid has {}", grid.len())));
        }
        let mut values = Vec::with_capacity(len);
        for _ in 0..len {
            values.push(read_f64(r)?);
        }
        let params = ProblemParams::new(n, p, a, b)?.with_exponent(q)?;
        Ok((GridField::new(&grid, values)?, params))
    }
}

pub(crate) fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub(crate) fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pad_round_trip() {
        let g = Grid::unit(3, 5).unwrap();
        let v: Vec<f64> = (0..g.len()).map(|i| i as f64).collect();
        let p = g.pad(&v);
        assert_eq!(p.len(), 13usize.pow(3));
        assert_eq!(g.unpad(&p), v);
        assert_eq!(p.iter().sum::<f64>(), v.iter().sum::<f64>());
    }

    #[test]
    fn mask_and_coords() {
        let g = Grid::unit(2, 5).unwrap();
        assert_eq!(g.h(), 0.5);
        let mask = g.interior_mask();
        // the centre and its 4 neighbours at distance 0.5, plus 4 diagonal ones at sqrt(0.5)
        assert_eq!(mask.iter().filter(|&&m| m).count(), 9);
        assert!(!mask[g.flat_index(&[2, 0])]);
    }

    #[test]
    fn field_io_round_trip() {
        let pp = ProblemParams::new(4, 2.0, 0.0, 0.0).unwrap().subcritical(0.5).unwrap();
        let g4 = Grid::unit(4, 5).unwrap();
        let f4 = GridField::from_fn(&g4, |x| x[0] * x[3]);
        let mut buf = Vec::new();
        f4.write(&mut buf, &pp).unwrap();
        let (back, pb) = GridField::read(&mut buf.as_slice()).unwrap();
        assert_eq!(back, f4);
        assert_eq!(pb, pp);
        assert!(GridField::read(&mut &buf[..20]).is_err());
    }

    #[test]
    fn rejects_exterior_values() {
        let g = Grid::unit(2, 5).unwrap();
        let mut v = vec![0.0; g.len()];
        v[0] = 1.0;
        assert!(GridField::new(&g, v).is_err());
        assert!(Grid::unit(4, 2).is_err());
        assert!(Grid::unit(6, 200).is_err());
    }
}
