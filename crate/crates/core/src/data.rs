use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{PaviError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gaussian,
    Binomial,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Gaussian => "gaussian",
            Family::Binomial => "binomial",
        })
    }
}

impl FromStr for Family {
    type Err = PaviError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" => Ok(Family::Gaussian),
            "binomial" => Ok(Family::Binomial),
            other => Err(PaviError::UnknownStrategy {
                kind: "family",
                name: other.to_string(),
            }),
        }
    }
}

/// Design matrix (n×p, column-major) with its response.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: DVector<f64>,
    family: Family,
    column_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>, family: Family) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(PaviError::DimensionMismatch(format!(
                "x has {} rows but y has {} entries",
                x.nrows(),
                y.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(PaviError::NonFinite("design matrix".into()));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(PaviError::NonFinite("response".into()));
        }
        if family == Family::Binomial {
            if let Some((row, &value)) = y.iter().enumerate().find(|(_, v)| **v != 0.0 && **v != 1.0) {
                return Err(PaviError::NonBinaryResponse { row, value });
            }
        }
        Ok(Dataset {
            x,
            y,
            family,
            column_names: None,
        })
    }

    pub fn with_column_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.p() {
            return Err(PaviError::DimensionMismatch(format!(
                "{} column names for {} columns",
                names.len(),
                self.p()
            )));
        }
        self.column_names = Some(names);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn column_names(&self) -> Option<&[String]> {
        self.column_names.as_deref()
    }

    /// Contiguous view of column `j` (0-based).
    pub fn column(&self, j: usize) -> &[f64] {
        let n = self.n();
        &self.x.as_slice()[j * n..(j + 1) * n]
    }

    /// Row subset, preserving the order of `rows`.
    pub fn subset_rows(&self, rows: &[usize]) -> Dataset {
        let x = self.x.select_rows(rows);
        let y = DVector::from_iterator(rows.len(), rows.iter().map(|&i| self.y[i]));
        Dataset {
            x,
            y,
            family: self.family,
            column_names: self.column_names.clone(),
        }
    }

    /// Counts of (y = 0, y = 1); meaningful for binomial data.
    pub fn class_counts(&self) -> (usize, usize) {
        let ones = self.y.iter().filter(|&&v| v == 1.0).count();
        (self.n() - ones, ones)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_rejects_other_values() {
        let x = DMatrix::from_element(3, 1, 1.0);
        let y = DVector::from_vec(vec![0.0, 1.0, 2.0]);
        match Dataset::new(x, y, Family::Binomial) {
            Err(PaviError::NonBinaryResponse { row, value }) => {
                assert_eq!(row, 2);
                assert_eq!(value, 2.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_finite_rejected() {
        let x = DMatrix::from_vec(2, 1, vec![1.0, f64::NAN]);
        let y = DVector::from_vec(vec![0.0, 1.0]);
        assert!(Dataset::new(x, y, Family::Gaussian).is_err());
    }

    #[test]
    fn column_and_subset() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let d = Dataset::new(x, DVector::from_vec(vec![1.0, 2.0, 3.0]), Family::Gaussian).unwrap();
        assert_eq!(d.column(1), &[2.0, 4.0, 6.0]);
        let s = d.subset_rows(&[2, 0]);
        assert_eq!(s.column(0), &[5.0, 1.0]);
        assert_eq!(s.y().as_slice(), &[3.0, 1.0]);
    }
}
