//! Matrix JSON interchange format:
//! `{"dims": [..], "labels": [..], "re": [[..]], "im": [[..]]}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::tensor::TensorSpace;
use super::CMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dims: Vec<usize>,
    #[serde(default)]
    pub labels: Vec<String>,
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix, space: &TensorSpace) -> Self {
        let rows = |f: fn(&Complex64) -> f64| {
            (0..m.rows())
                .map(|i| m.row(i).iter().map(f).collect())
                .collect()
        };
        MatrixJson {
            dims: space.dims(),
            labels: space.labels().into_iter().map(String::from).collect(),
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    /// Validates the payload and returns the matrix with its space. Missing
    /// labels default to `F1, F2, …`; an empty `im` means a real matrix.
    pub fn to_matrix(&self) -> Result<(CMatrix, TensorSpace)> {
        let labels: Vec<String> = if self.labels.is_empty() {
            (1..=self.dims.len()).map(|k| format!("F{k}")).collect()
        } else {
            self.labels.clone()
        };
        if labels.len() != self.dims.len() {
            return Err(Error::validation(format!(
                "{} labels for {} dims",
                labels.len(),
                self.dims.len()
            )));
        }
        let space = TensorSpace::new(labels.into_iter().zip(self.dims.iter().copied()))?;
        let n = space.total_dim();
        let check = |rows: &Vec<Vec<f64>>, what: &str| -> Result<()> {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::validation(format!(
                    "`{what}` must be a {n}x{n} array"
                )));
            }
            if rows.iter().flatten().any(|x| !x.is_finite()) {
                return Err(Error::validation(format!("`{what}` has non-finite entries")));
            }
            Ok(())
        };
        check(&self.re, "re")?;
        let zero_im;
        let im = if self.im.is_empty() {
            zero_im = vec![vec![0.0; n]; n];
            &zero_im
        } else {
            check(&self.im, "im")?;
            &self.im
        };
        let m = CMatrix::from_fn(n, n, |i, j| Complex64::new(self.re[i][j], im[i][j]));
        Ok((m, space))
    }

    pub fn parse(text: &str) -> Result<(CMatrix, TensorSpace)> {
        let raw: MatrixJson = serde_json::from_str(text)?;
        raw.to_matrix()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let space = TensorSpace::new([("C", 2)]).unwrap();
        let m = CMatrix::from_fn(2, 2, |i, j| Complex64::new(i as f64, j as f64 - i as f64));
        let text = serde_json::to_string(&MatrixJson::from_matrix(&m, &space)).unwrap();
        let (back, s) = MatrixJson::parse(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(s, space);
    }

    #[test]
    fn rejects_non_square() {
        let text = r#"{"dims":[2],"labels":["C"],"re":[[1,0,0],[0,1,0]],"im":[]}"#;
        assert!(matches!(MatrixJson::parse(text), Err(Error::Validation(_))));
    }
}
