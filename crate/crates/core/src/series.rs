use crate::error::{Error, Result};

/// An ordered, finite-valued univariate series.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    label: Option<String>,
}

impl TimeSeries {
    /// Builds a series, rejecting empty input and any NaN or infinite sample.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            values,
            label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// Returns an error unless the series holds at least `min` samples.
    pub fn require_len(&self, min: usize) -> Result<()> {
        if self.len() < min {
            return Err(Error::TooShort {
                len: self.len(),
                min,
            });
        }
        Ok(())
    }

    // Derived series keep the provenance label of their source.
    pub(crate) fn derive(&self, values: Vec<f64>) -> Self {
        Self {
            values,
            label: self.label.clone(),
        }
    }
}

impl TryFrom<Vec<f64>> for TimeSeries {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl AsRef<[f64]> for TimeSeries {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}
