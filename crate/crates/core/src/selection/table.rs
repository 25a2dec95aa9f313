use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::SelectionFunction;
use crate::error::SelectionError;

/// Alter values at which the selection function is tabulated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AlterGrid {
    /// Equally spaced points spanning the covariate range.
    Uniform(usize),
    Values(Vec<f64>),
}

/// Plot data: the selection function per ego value, and the per-ego maximum curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionTable {
    /// `(v_ego, v_alter, value)`
    pub rows: Vec<(f64, f64, f64)>,
    /// `(v_ego, optimum)`
    pub optimum: Vec<(f64, f64)>,
}

pub const TABLE_HEADER: &str = "v_ego,v_alter,value";
pub const OPTIMUM_HEADER: &str = "v_ego,optimum";

impl SelectionTable {
    pub fn write_rows<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{TABLE_HEADER}")?;
        for (a, b, c) in &self.rows {
            writeln!(w, "{a},{b},{c}")?;
        }
        Ok(())
    }

    pub fn write_optimum<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{OPTIMUM_HEADER}")?;
        for (a, b) in &self.optimum {
            writeln!(w, "{a},{b}")?;
        }
        Ok(())
    }
}

pub fn selection_table<S: SelectionFunction + ?Sized>(
    sel: &S,
    ego_values: &[f64],
    alter_grid: &AlterGrid,
) -> Result<SelectionTable, SelectionError> {
    let scale = *sel.scale();
    if let Some(v) = ego_values.iter().find(|v| !scale.contains(**v)) {
        return Err(SelectionError::Invalid(format!(
            "ego value {v} outside the covariate range [{}, {}]",
            scale.min, scale.max
        )));
    }
    let alters = match alter_grid {
        AlterGrid::Uniform(k) if *k >= 2 => scale.grid(*k),
        AlterGrid::Uniform(k) => {
            return Err(SelectionError::Invalid(format!(
                "alter grid needs at least 2 points, got {k}"
            )))
        }
        AlterGrid::Values(v) if v.len() >= 2 => v.clone(),
        AlterGrid::Values(_) => {
            return Err(SelectionError::Invalid("alter grid needs at least 2 points".into()))
        }
    };
    let mut rows = Vec::with_capacity(ego_values.len() * alters.len());
    for &vi in ego_values {
        for &vj in &alters {
            rows.push((vi, vj, sel.evaluate(vi, vj)));
        }
    }
    let optimum = ego_values
        .iter()
        .map(|&vi| (vi, sel.optimum_value(vi)))
        .collect();
    Ok(SelectionTable { rows, optimum })
}

#[cfg(test)]
mod tests {
    use super::super::{CovariateScale, LegacyFamily, LegacySelection, QuadraticSelection};
    use super::*;

    #[test]
    fn zero_theta_gives_flat_table() {
        let s = CovariateScale::new(-1.0, 2.0, 0.0).unwrap();
        let q = QuadraticSelection::new([0.0; 5], s).unwrap();
        let t = selection_table(&q, &[-1.0, 0.0, 2.0], &AlterGrid::Uniform(5)).unwrap();
        assert_eq!(t.rows.len(), 15);
        assert!(t.rows.iter().all(|r| r.2 == 0.0));
        assert!(t.optimum.iter().all(|r| r.1 == 0.0));
    }

    #[test]
    fn grades_grid_maxima_track_optimum() {
        let s = CovariateScale::new(-6.0, 4.0, 0.0).unwrap();
        let q = QuadraticSelection::new([-0.0288, -0.003, 0.044, -0.095, 0.026], s).unwrap();
        // grades 20, 22, ..., 30 around a mean of 26.1
        let egos: Vec<f64> = (0..6).map(|k| 20.0 + 2.0 * k as f64 - 26.1).collect();
        let egos: Vec<f64> = egos.into_iter().map(|v| s.clamp(v)).collect();
        let t = selection_table(&q, &egos, &AlterGrid::Uniform(2001)).unwrap();
        for (vi, opt) in &t.optimum {
            let grid_max = t
                .rows
                .iter()
                .filter(|r| r.0 == *vi)
                .map(|r| r.2)
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(grid_max <= opt + 1e-12);
            // step 0.005, curvature |θ1 + θ2| ≈ 0.032
            assert!(opt - grid_max <= 0.0318 * 0.005f64.powi(2) + 1e-12);
        }
    }

    #[test]
    fn abs_difference_main_collapses_above_ego() {
        let s = CovariateScale::new(-6.0, 4.0, 0.0).unwrap();
        // β1 = β3: the ego terms cancel for v_j > v_i
        let l = LegacySelection::new(LegacyFamily::AbsDifferenceMain, vec![-0.3, 0.5, -0.3], s)
            .unwrap();
        let egos = [-6.0, -4.0, -2.0, 0.0];
        let t = selection_table(&l, &egos, &AlterGrid::Uniform(51)).unwrap();
        for &(vi, vj, val) in &t.rows {
            if vj > vi {
                assert!((val - (0.5 - 0.3) * vj).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_out_of_range_egos() {
        let s = CovariateScale::new(-1.0, 1.0, 0.0).unwrap();
        let q = QuadraticSelection::new([0.0; 5], s).unwrap();
        assert!(selection_table(&q, &[2.0], &AlterGrid::Uniform(3)).is_err());
        assert!(selection_table(&q, &[0.0], &AlterGrid::Uniform(1)).is_err());
    }

    #[test]
    fn csv_headers() {
        let s = CovariateScale::new(-1.0, 1.0, 0.0).unwrap();
        let q = QuadraticSelection::new([-1.0, 0.0, 0.0, 0.0, 0.0], s).unwrap();
        let t = selection_table(&q, &[0.0], &AlterGrid::Uniform(2)).unwrap();
        let mut a = Vec::new();
        t.write_rows(&mut a).unwrap();
        let a = String::from_utf8(a).unwrap();
        assert!(a.starts_with("v_ego,v_alter,value\n0,-1,-1\n"));
        let mut b = Vec::new();
        t.write_optimum(&mut b).unwrap();
        assert_eq!(String::from_utf8(b).unwrap(), "v_ego,optimum\n0,0\n");
    }
}
