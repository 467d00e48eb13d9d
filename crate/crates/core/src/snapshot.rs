//! Time-stamped flow state and its `NSSNAP01` binary file format.
//!
//! Layout (all little-endian):
//!
//! | bytes | content                                   |
//! |-------|-------------------------------------------|
//! | 8     | magic `NSSNAP01`                          |
//! | 16    | `u32` nx, ny, reserved = 0, reserved = 0  |
//! | 16    | `f64` lx, ly                              |
//! | 8     | `f64` time                                |
//! | 24·n  | `f64` arrays u, v, p/rho (row-major ny×nx)|

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::field::{FieldError, Grid, ScalarField, VelocityField};

pub const MAGIC: &[u8; 8] = b"NSSNAP01";
const HEADER_LEN: usize = 8 + 16 + 16 + 8;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("format error: {0}")]
    Format(String),
    #[error("corrupt file: {0}")]
    Corrupt(String),
    #[error("validation error: {0}")]
    Validation(#[from] FieldError),
    #[error("csv error: {0}")]
    Csv(String),
}

/// Flow state at one instant. Pressure is stored as `p / rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    time: f64,
    velocity: VelocityField,
    pressure: ScalarField,
}

impl Snapshot {
    pub fn new(time: f64, velocity: VelocityField, pressure: ScalarField) -> Result<Self, FieldError> {
        if velocity.grid() != pressure.grid() {
            return Err(FieldError::GridMismatch);
        }
        if !time.is_finite() {
            return Err(FieldError::NonFinite("time"));
        }
        Ok(Self { time, velocity, pressure })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn grid(&self) -> &Grid {
        self.velocity.grid()
    }

    pub fn velocity(&self) -> &VelocityField {
        &self.velocity
    }

    /// `p / rho` at the nodes.
    pub fn pressure(&self) -> &ScalarField {
        &self.pressure
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let g = self.grid();
        let mut out = Vec::with_capacity(HEADER_LEN + 24 * g.len());
        out.extend_from_slice(MAGIC);
        for word in [g.nx() as u32, g.ny() as u32, 0, 0] {
            out.extend_from_slice(&word.to_le_bytes());
        }
        for x in [g.lx(), g.ly(), self.time] {
            out.extend_from_slice(&x.to_le_bytes());
        }
        for arr in [self.velocity.u(), self.velocity.v(), self.pressure.data()] {
            for x in arr {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SnapshotError> {
        if bytes.len() < MAGIC.len() || &bytes[..8] != MAGIC {
            return Err(SnapshotError::Format("bad magic bytes".into()));
        }
        if bytes.len() < HEADER_LEN {
            return Err(SnapshotError::Corrupt(format!(
                "header truncated at {} bytes",
                bytes.len()
            )));
        }
        let word = |k: usize| {
            let o = 8 + 4 * k;
            u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap())
        };
        let float = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let (nx, ny) = (word(0) as usize, word(1) as usize);
        if word(2) != 0 || word(3) != 0 {
            return Err(SnapshotError::Format("reserved header words must be zero".into()));
        }
        let (lx, ly, time) = (float(24), float(32), float(40));
        let grid = Grid::new(nx, ny, lx, ly).map_err(|e| SnapshotError::Format(e.to_string()))?;

        let n = grid.len();
        let expected = HEADER_LEN + 24 * n;
        if bytes.len() != expected {
            return Err(SnapshotError::Corrupt(format!(
                "header declares {nx}x{ny} ({expected} bytes) but file has {} bytes",
                bytes.len()
            )));
        }
        let array = |k: usize| -> Vec<f64> {
            let start = HEADER_LEN + 8 * n * k;
            bytes[start..start + 8 * n]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect()
        };
        let velocity = VelocityField::new(grid, array(0), array(1))?;
        let pressure = ScalarField::new(grid, array(2))?;
        Ok(Snapshot::new(time, velocity, pressure)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), SnapshotError> {
        let mut f = fs::File::create(path)?;
        f.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, SnapshotError> {
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }

    /// Import nodal data from CSV with header `x_index,y_index,u,v,p_over_rho`.
    ///
    /// Grid extents are inferred from the largest indices; every node must
    /// appear exactly once.
    pub fn from_csv(
        reader: impl Read,
        lx: f64,
        ly: f64,
        time: f64,
    ) -> Result<Self, SnapshotError> {
        #[derive(Deserialize)]
        struct Row {
            x_index: usize,
            y_index: usize,
            u: f64,
            v: f64,
            p_over_rho: f64,
        }

        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| SnapshotError::Csv(e.to_string()))?.clone();
        let want = ["x_index", "y_index", "u", "v", "p_over_rho"];
        if headers.iter().collect::<Vec<_>>() != want {
            return Err(SnapshotError::Csv(format!(
                "expected header {}, found {}",
                want.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let rows: Vec<Row> = rdr
            .deserialize()
            .collect::<Result<_, _>>()
            .map_err(|e| SnapshotError::Csv(e.to_string()))?;
        let nx = rows.iter().map(|r| r.x_index + 1).max().unwrap_or(0);
        let ny = rows.iter().map(|r| r.y_index + 1).max().unwrap_or(0);
        let grid = Grid::new(nx, ny, lx, ly).map_err(|e| SnapshotError::Format(e.to_string()))?;

        let mut seen = vec![false; grid.len()];
        let (mut u, mut v, mut p) = (vec![0.0; grid.len()], vec![0.0; grid.len()], vec![0.0; grid.len()]);
        for r in &rows {
            let k = grid.index(r.x_index, r.y_index);
            if std::mem::replace(&mut seen[k], true) {
                return Err(SnapshotError::Corrupt(format!(
                    "node ({}, {}) listed twice",
                    r.x_index, r.y_index
                )));
            }
            (u[k], v[k], p[k]) = (r.u, r.v, r.p_over_rho);
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(SnapshotError::Corrupt(format!(
                "node ({}, {}) missing",
                k % nx,
                k / nx
            )));
        }
        let velocity = VelocityField::new(grid, u, v)?;
        let pressure = ScalarField::new(grid, p)?;
        Ok(Snapshot::new(time, velocity, pressure)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::taylor_green;

    fn sample() -> Snapshot {
        let g = Grid::new(8, 10, 1.5, 2.5).unwrap();
        let vel = taylor_green(&g, 0.7).unwrap();
        let p = ScalarField::from_fn(g, |x, y| x - y * 0.5).unwrap();
        Snapshot::new(0.125, vel, p).unwrap()
    }

    #[test]
    fn header_layout() {
        let b = sample().to_bytes();
        assert_eq!(&b[..8], b"NSSNAP01");
        assert_eq!(u32::from_le_bytes(b[8..12].try_into().unwrap()), 8);
        assert_eq!(u32::from_le_bytes(b[12..16].try_into().unwrap()), 10);
        assert_eq!(f64::from_le_bytes(b[40..48].try_into().unwrap()), 0.125);
        assert_eq!(b.len(), 48 + 24 * 80);
    }

    #[test]
    fn wrong_magic_is_format_error() {
        let mut b = sample().to_bytes();
        b[7] = b'2';
        assert!(matches!(Snapshot::from_bytes(&b), Err(SnapshotError::Format(_))));
        assert!(matches!(Snapshot::from_bytes(b"NS"), Err(SnapshotError::Format(_))));
    }

    #[test]
    fn truncated_payload_is_corrupt() {
        let b = sample().to_bytes();
        assert!(matches!(
            Snapshot::from_bytes(&b[..b.len() - 8]),
            Err(SnapshotError::Corrupt(_))
        ));
        assert!(matches!(Snapshot::from_bytes(&b[..20]), Err(SnapshotError::Corrupt(_))));
        let mut extra = b.clone();
        extra.extend_from_slice(&[0; 8]);
        assert!(matches!(Snapshot::from_bytes(&extra), Err(SnapshotError::Corrupt(_))));
    }

    #[test]
    fn non_finite_payload_is_validation_error() {
        let mut b = sample().to_bytes();
        b[48..56].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(matches!(Snapshot::from_bytes(&b), Err(SnapshotError::Validation(_))));
    }

    #[test]
    fn file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.bin");
        let s = sample();
        s.write(&path).unwrap();
        assert_eq!(Snapshot::read(&path).unwrap(), s);
    }

    #[test]
    fn csv_import() {
        let s = sample();
        let g = *s.grid();
        let mut text = String::from("x_index,y_index,u,v,p_over_rho\n");
        // reverse order to exercise index placement
        for j in (0..g.ny()).rev() {
            for i in 0..g.nx() {
                let k = g.index(i, j);
                text.push_str(&format!(
                    "{i},{j},{:?},{:?},{:?}\n",
                    s.velocity().u()[k],
                    s.velocity().v()[k],
                    s.pressure().data()[k]
                ));
            }
        }
        let back = Snapshot::from_csv(text.as_bytes(), 1.5, 2.5, 0.125).unwrap();
        assert_eq!(back, s);

        let missing: String = text.lines().take(text.lines().count() - 1).map(|l| format!("{l}\n")).collect();
        assert!(matches!(
            Snapshot::from_csv(missing.as_bytes(), 1.5, 2.5, 0.0),
            Err(SnapshotError::Corrupt(_))
        ));
        assert!(matches!(
            Snapshot::from_csv("a,b\n1,2\n".as_bytes(), 1.0, 1.0, 0.0),
            Err(SnapshotError::Csv(_))
        ));
    }
}
