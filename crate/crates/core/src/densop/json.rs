use serde::{Deserialize, Serialize};

use super::{ComplexMatrix, DensityOperator, C64};
use crate::error::{Error, Result};

/// `{"dims":[2,2], "re":[[..]], "im":[[..]]}`, row-major, both parts required.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub dims: Vec<usize>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix, dims: &[usize]) -> Self {
        let rows = |part: fn(&C64) -> f64| {
            (0..m.rows()).map(|i| (0..m.cols()).map(|j| part(&m[(i, j)]) + 0.0).collect()).collect()
        };
        Self { dims: dims.to_vec(), re: rows(|z| z.re), im: rows(|z| z.im) }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let n = self.re.len();
        if self.im.len() != n {
            return Err(Error::Parse("`re` and `im` have different row counts".into()));
        }
        let mut data = Vec::with_capacity(n * n);
        for (r, i) in self.re.iter().zip(&self.im) {
            if r.len() != n || i.len() != n {
                return Err(Error::Parse(format!("matrix rows must have length {n}")));
            }
            data.extend(r.iter().zip(i).map(|(&a, &b)| C64::new(a, b)));
        }
        let expected: usize = self.dims.iter().product();
        if expected != n {
            return Err(Error::Parse(format!("dims {:?} do not match side {n}", self.dims)));
        }
        ComplexMatrix::new(n, n, data)
    }

    pub fn to_density(&self) -> Result<DensityOperator> {
        DensityOperator::new(self.to_matrix()?, self.dims.clone())
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json_string(&self, pretty: bool) -> String {
        if pretty {
            serde_json::to_string_pretty(self).expect("plain data serialises")
        } else {
            serde_json::to_string(self).expect("plain data serialises")
        }
    }
}

impl DensityOperator {
    pub fn to_json(&self) -> MatrixJson {
        MatrixJson::from_matrix(self.matrix(), self.dims())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        MatrixJson::parse(text)?.to_density()
    }
}
