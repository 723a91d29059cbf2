use crate::QuantError;

/// A dense row-major tensor of f64 values.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorF {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl TensorF {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self, QuantError> {
        let expected: usize = dims.iter().product();
        if data.len() != expected {
            return Err(QuantError::DimMismatch {
                data: data.len(),
                expected,
            });
        }
        Ok(TensorF { dims, data })
    }

    /// Internal constructor for callers that already hold the invariant.
    pub(crate) fn from_parts(dims: Vec<usize>, data: Vec<f64>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), data.len());
        TensorF { dims, data }
    }

    pub fn zeros(dims: Vec<usize>) -> Self {
        let len = dims.iter().product();
        TensorF {
            dims,
            data: vec![0.0; len],
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Reinterpret with new dims of the same total length.
    pub fn reshape(&self, dims: Vec<usize>) -> Result<TensorF, QuantError> {
        TensorF::new(dims, self.data.clone())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> TensorF {
        TensorF {
            dims: self.dims.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}
