use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Uniform `n x n` decomposition of the unit square into square cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mesh {
    cells_per_side: usize,
}

impl Mesh {
    pub fn new(cells_per_side: usize) -> Result<Self> {
        if cells_per_side == 0 {
            return Err(Error::InvalidArgument("mesh needs at least one cell per side".into()));
        }
        Ok(Mesh { cells_per_side })
    }

    pub fn cells_per_side(&self) -> usize {
        self.cells_per_side
    }

    pub fn n_cells(&self) -> usize {
        self.cells_per_side * self.cells_per_side
    }

    /// Edge length of a cell.
    pub fn cell_size(&self) -> f64 {
        1.0 / self.cells_per_side as f64
    }

    /// Cell diagonal.
    pub fn h(&self) -> f64 {
        std::f64::consts::SQRT_2 / self.cells_per_side as f64
    }

    /// Lower-left corner of cell `(cx, cy)`.
    pub fn cell_origin(&self, cx: usize, cy: usize) -> (f64, f64) {
        let s = self.cell_size();
        (cx as f64 * s, cy as f64 * s)
    }
}

/// Mesh sequences used by the convergence studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFamily {
    /// `2^(level+1)` cells per side: 2x2 at level 0, halving `h` per level.
    Doubling,
    /// Fixed 4x4 mesh at every level; only the time step is refined.
    Fixed4x4,
}

impl MeshFamily {
    pub fn mesh(self, level: usize) -> Result<Mesh> {
        match self {
            MeshFamily::Doubling => {
                if level > 10 {
                    return Err(Error::InvalidArgument(format!("mesh level {level} too fine")));
                }
                Mesh::new(1 << (level + 1))
            }
            MeshFamily::Fixed4x4 => Mesh::new(4),
        }
    }

    /// Whether the spatial mesh is refined together with the time step.
    pub fn refines_space(self) -> bool {
        matches!(self, MeshFamily::Doubling)
    }

    pub fn name(self) -> &'static str {
        match self {
            MeshFamily::Doubling => "table1",
            MeshFamily::Fixed4x4 => "table2a",
        }
    }
}

impl fmt::Display for MeshFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeshFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table1" | "doubling" => Ok(MeshFamily::Doubling),
            "table2a" | "fixed4x4" => Ok(MeshFamily::Fixed4x4),
            other => Err(Error::InvalidArgument(format!("unknown mesh family '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn family_sizes() {
        let m0 = MeshFamily::Doubling.mesh(0).unwrap();
        assert_eq!(m0.cells_per_side(), 2);
        assert_abs_diff_eq!(m0.h(), 1.0 / 2.0f64.sqrt(), epsilon = 1e-15);
        for l in 0..5 {
            let a = MeshFamily::Doubling.mesh(l).unwrap();
            let b = MeshFamily::Doubling.mesh(l + 1).unwrap();
            assert_eq!(a.h(), 2.0 * b.h());
        }
        let f = MeshFamily::Fixed4x4.mesh(3).unwrap();
        assert_abs_diff_eq!(f.h(), 0.25 * 2.0f64.sqrt(), epsilon = 1e-15);
        assert!(Mesh::new(0).is_err());
        assert_eq!("table2a".parse::<MeshFamily>().unwrap(), MeshFamily::Fixed4x4);
        assert!("table3".parse::<MeshFamily>().is_err());
    }
}
