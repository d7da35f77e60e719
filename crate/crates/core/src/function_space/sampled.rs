use crate::real::Real;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SampleError {
    #[error("sample step must be positive and finite, got {0}")]
    Step(f64),
    #[error("sampled values must be finite (first offending sample {0})")]
    NonFinite(usize),
    #[error("{len} values do not form whole samples of dimension {dim}")]
    Shape { len: usize, dim: usize },
    #[error("a sampled function needs at least one sample")]
    Empty,
}

/// A function ℝ⁺ → ℝ^d sampled at θ_i = i·step, i = 0..len.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction<T> {
    step: T,
    dim: usize,
    values: Vec<T>,
}

impl<T: Real> SampledFunction<T> {
    /// `values` is row-major, one row of `dim` entries per grid point.
    pub fn new(step: T, dim: usize, values: Vec<T>) -> Result<Self, SampleError> {
        if !(step > T::zero()) || !step.is_finite() {
            return Err(SampleError::Step(step.as_f64()));
        }
        if dim == 0 || !values.len().is_multiple_of(dim) {
            return Err(SampleError::Shape { len: values.len(), dim });
        }
        if values.is_empty() {
            return Err(SampleError::Empty);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(SampleError::NonFinite(i / dim));
        }
        Ok(Self { step, dim, values })
    }

    /// Samples `f` at `n_points` grid points.
    pub fn from_fn(step: T, n_points: usize, dim: usize, f: impl Fn(T) -> Vec<T>) -> Result<Self, SampleError> {
        let mut values = Vec::with_capacity(n_points * dim);
        for i in 0..n_points {
            let v = f(step * T::from_usize_exact(i));
            if v.len() != dim {
                return Err(SampleError::Shape { len: v.len(), dim });
            }
            values.extend(v);
        }
        Self::new(step, dim, values)
    }

    /// The constant function θ ↦ x0 on [0, extent].
    pub fn constant(x0: &[T], step: T, extent: T) -> Result<Self, SampleError> {
        let n = (extent / step).round().to_usize().unwrap_or(0) + 1;
        Self::from_fn(step, n, x0.len(), |_| x0.to_vec())
    }

    pub fn step(&self) -> T {
        self.step
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest sampled θ.
    pub fn extent(&self) -> T {
        self.step * T::from_usize_exact(self.len() - 1)
    }

    pub fn at(&self, i: usize) -> &[T] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn theta(&self, i: usize) -> T {
        self.step * T::from_usize_exact(i)
    }

    /// Linear interpolation; θ beyond the last sample takes the last value.
    pub fn value_at(&self, theta: T) -> Vec<T> {
        let pos = (theta / self.step).max(T::zero());
        let last = self.len() - 1;
        let i = pos.floor().to_usize().unwrap_or(usize::MAX).min(last);
        if i == last {
            return self.at(last).to_vec();
        }
        let w = pos - T::from_usize_exact(i);
        self.at(i)
            .iter()
            .zip(self.at(i + 1))
            .map(|(&a, &b)| a + w * (b - a))
            .collect()
    }

    /// Re-samples onto `step` over [0, extent] by linear interpolation.
    /// Returns the new function and whether constant extension past the
    /// original domain was needed.
    pub fn resample(&self, step: T, extent: T) -> Result<(Self, bool), SampleError> {
        let n = (extent / step).round().to_usize().unwrap_or(0) + 1;
        let extended = step * T::from_usize_exact(n - 1) > self.extent() * (T::one() + T::epsilon() * T::lit(64.0));
        if step == self.step && n <= self.len() {
            let values = self.values[..n * self.dim].to_vec();
            return Ok((Self::new(step, self.dim, values)?, false));
        }
        let f = Self::from_fn(step, n, self.dim, |t| self.value_at(t))?;
        Ok((f, extended))
    }
}
