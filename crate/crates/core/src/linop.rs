//! Linear operators between weighted inner-product spaces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, invalid, Result};

/// Inner product on a finite-dimensional coefficient space.
pub trait Metric: Send + Sync {
    fn dim(&self) -> usize;

    fn inner(&self, a: &[f64], b: &[f64]) -> f64;

    fn norm(&self, a: &[f64]) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }
}

/// Plain Euclidean inner product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Euclidean {
    dim: usize,
}

impl Euclidean {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl Metric for Euclidean {
    fn dim(&self) -> usize {
        self.dim
    }

    fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        dot(a, b)
    }
}

/// Inner product `Σ w_i a_i b_i` with strictly positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalMetric {
    weights: Vec<f64>,
}

impl DiagonalMetric {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(invalid("metric weights must be finite and positive"));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl Metric for DiagonalMetric {
    fn dim(&self) -> usize {
        self.weights.len()
    }

    fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(a.iter().zip(b))
            .map(|(w, (x, y))| w * x * y)
            .sum()
    }
}

/// A bounded linear map `K: Q0 -> Q` together with its Hilbert adjoint.
///
/// The adjoint is taken with respect to the two metrics, so
/// `<K f, v>_Q = <f, K* v>_Q0`.
pub trait LinearOperator: Send + Sync {
    fn source_dim(&self) -> usize;

    fn data_dim(&self) -> usize;

    fn source_metric(&self) -> &dyn Metric;

    fn data_metric(&self) -> &dyn Metric;

    /// Writes `K f` into `out`.
    fn apply_into(&self, f: &[f64], out: &mut [f64]) -> Result<()>;

    /// Writes `K* v` into `out`.
    fn apply_adjoint_into(&self, v: &[f64], out: &mut [f64]) -> Result<()>;

    fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        check_len("source vector", self.source_dim(), f.len())?;
        let mut out = vec![0.0; self.data_dim()];
        self.apply_into(f, &mut out)?;
        Ok(out)
    }

    fn apply_adjoint(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len("data vector", self.data_dim(), v.len())?;
        let mut out = vec![0.0; self.source_dim()];
        self.apply_adjoint_into(v, &mut out)?;
        Ok(out)
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn source_dim(&self) -> usize {
        (**self).source_dim()
    }
    fn data_dim(&self) -> usize {
        (**self).data_dim()
    }
    fn source_metric(&self) -> &dyn Metric {
        (**self).source_metric()
    }
    fn data_metric(&self) -> &dyn Metric {
        (**self).data_metric()
    }
    fn apply_into(&self, f: &[f64], out: &mut [f64]) -> Result<()> {
        (**self).apply_into(f, out)
    }
    fn apply_adjoint_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        (**self).apply_adjoint_into(v, out)
    }
}

fn check_io(op: &dyn LinearOperator, input: usize, output: usize, adjoint: bool) -> Result<()> {
    let (n_in, n_out) = if adjoint {
        (op.data_dim(), op.source_dim())
    } else {
        (op.source_dim(), op.data_dim())
    };
    check_len("operator input", n_in, input)?;
    check_len("operator output", n_out, output)
}

/// `diag(σ)` acting on Euclidean coefficient vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalOperator {
    sigma: Vec<f64>,
    metric: Euclidean,
}

impl DiagonalOperator {
    /// Singular values must be finite, strictly positive and nonincreasing.
    pub fn new(sigma: Vec<f64>) -> Result<Self> {
        if sigma.is_empty() {
            return Err(invalid(
                "diagonal operator needs at least one singular value",
            ));
        }
        if sigma.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(invalid(
                "singular values must be finite and strictly positive",
            ));
        }
        if sigma.windows(2).any(|w| w[1] > w[0]) {
            return Err(invalid("singular values must be nonincreasing"));
        }
        Ok(Self::new_unchecked(sigma))
    }

    /// No ordering or positivity requirement; used for spectral sampling
    /// where zeros and arbitrary order are legitimate.
    pub(crate) fn new_unchecked(sigma: Vec<f64>) -> Self {
        let metric = Euclidean::new(sigma.len());
        Self { sigma, metric }
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.sigma
    }
}

impl LinearOperator for DiagonalOperator {
    fn source_dim(&self) -> usize {
        self.sigma.len()
    }
    fn data_dim(&self) -> usize {
        self.sigma.len()
    }
    fn source_metric(&self) -> &dyn Metric {
        &self.metric
    }
    fn data_metric(&self) -> &dyn Metric {
        &self.metric
    }
    fn apply_into(&self, f: &[f64], out: &mut [f64]) -> Result<()> {
        check_io(self, f.len(), out.len(), false)?;
        for ((o, s), x) in out.iter_mut().zip(&self.sigma).zip(f) {
            *o = s * x;
        }
        Ok(())
    }
    fn apply_adjoint_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        self.apply_into(v, out)
    }
}

/// Row-major dense matrix with optional diagonal weights on either space.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    source_weights: Option<DiagonalMetric>,
    data_weights: Option<DiagonalMetric>,
    source_plain: Euclidean,
    data_plain: Euclidean,
}

impl DenseOperator {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_len("dense matrix entries", rows * cols, data.len())?;
        Ok(Self {
            rows,
            cols,
            data,
            source_weights: None,
            data_weights: None,
            source_plain: Euclidean::new(cols),
            data_plain: Euclidean::new(rows),
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self::new(n, n, data).expect("square identity has consistent size")
    }

    /// Equips the source and data spaces with diagonal weights. The adjoint
    /// becomes `W_s^{-1} Aᵀ W_d`.
    pub fn with_weights(mut self, source: DiagonalMetric, data: DiagonalMetric) -> Result<Self> {
        check_len("source weights", self.cols, source.dim())?;
        check_len("data weights", self.rows, data.dim())?;
        self.source_weights = Some(source);
        self.data_weights = Some(data);
        Ok(self)
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }
}

impl LinearOperator for DenseOperator {
    fn source_dim(&self) -> usize {
        self.cols
    }
    fn data_dim(&self) -> usize {
        self.rows
    }
    fn source_metric(&self) -> &dyn Metric {
        match &self.source_weights {
            Some(w) => w,
            None => &self.source_plain,
        }
    }
    fn data_metric(&self) -> &dyn Metric {
        match &self.data_weights {
            Some(w) => w,
            None => &self.data_plain,
        }
    }
    fn apply_into(&self, f: &[f64], out: &mut [f64]) -> Result<()> {
        check_io(self, f.len(), out.len(), false)?;
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            *o = dot(row, f);
        }
        Ok(())
    }
    fn apply_adjoint_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        check_io(self, v.len(), out.len(), true)?;
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, row) in self.data.chunks_exact(self.cols).enumerate() {
            let vi = match &self.data_weights {
                Some(w) => w.weights()[i] * v[i],
                None => v[i],
            };
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * vi;
            }
        }
        if let Some(w) = &self.source_weights {
            for (o, wj) in out.iter_mut().zip(w.weights()) {
                *o /= wj;
            }
        }
        Ok(())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Power-iteration estimate of `‖K‖ = ‖K*K‖^{1/2}`.
///
/// The Rayleigh quotients of `K*K` along the power sequence are
/// nondecreasing, so the running value never drops as `iters` grows.
pub fn estimate_norm(op: &dyn LinearOperator, iters: usize, seed: u64) -> Result<f64> {
    if iters == 0 {
        return Err(invalid("estimate_norm needs at least one iteration"));
    }
    let src = op.source_metric();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..op.source_dim())
        .map(|_| rng.gen::<f64>() + 0.5)
        .collect();
    let mut kx = vec![0.0; op.data_dim()];
    let mut best = 0.0f64;
    for _ in 0..iters {
        let nx = src.norm(&x);
        if nx == 0.0 || !nx.is_finite() {
            break;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        op.apply_into(&x, &mut kx)?;
        let est = op.data_metric().norm(&kx);
        if est == 0.0 {
            break;
        }
        best = best.max(est);
        op.apply_adjoint_into(&kx, &mut x)?;
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_action() {
        let k = DiagonalOperator::new(vec![2.0, 1.0]).unwrap();
        assert_eq!(k.apply(&[1.0, 1.0]).unwrap(), vec![2.0, 1.0]);
        assert_eq!(k.apply(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(k.apply_adjoint(&[1.0, 1.0]).unwrap(), vec![2.0, 1.0]);
        let single = DiagonalOperator::new(vec![0.3]).unwrap();
        assert_eq!(single.apply_adjoint(&[1.0]).unwrap(), vec![0.3]);
    }

    #[test]
    fn identity_dense() {
        let id = DenseOperator::identity(2);
        assert_eq!(id.apply(&[3.0, 4.0]).unwrap(), vec![3.0, 4.0]);
    }

    #[test]
    fn diagonal_rejects_bad_spectra() {
        assert!(DiagonalOperator::new(vec![1.0, 2.0]).is_err());
        assert!(DiagonalOperator::new(vec![1.0, 0.0]).is_err());
        assert!(DiagonalOperator::new(vec![]).is_err());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let k = DiagonalOperator::new(vec![2.0, 1.0]).unwrap();
        assert!(matches!(
            k.apply(&[1.0]),
            Err(crate::Error::DimensionMismatch { .. })
        ));
        assert!(k.apply_adjoint(&[1.0, 2.0, 3.0]).is_err());
        let mut out = [0.0; 3];
        assert!(k.apply_into(&[1.0, 1.0], &mut out).is_err());
    }

    #[test]
    fn dense_adjoint_identity() {
        let a = DenseOperator::new(3, 2, vec![0.3, -1.2, 2.0, 0.7, -0.4, 1.1]).unwrap();
        let f = [0.9, -0.2];
        let v = [1.0, 0.5, -2.0];
        let lhs = dot(&a.apply(&f).unwrap(), &v);
        let rhs = dot(&f, &a.apply_adjoint(&v).unwrap());
        assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn weighted_dense_adjoint_identity() {
        let a = DenseOperator::new(2, 3, vec![1.0, 2.0, 3.0, -1.0, 0.5, 0.25])
            .unwrap()
            .with_weights(
                DiagonalMetric::new(vec![0.5, 2.0, 1.5]).unwrap(),
                DiagonalMetric::new(vec![3.0, 0.2]).unwrap(),
            )
            .unwrap();
        let f = [0.1, -0.7, 0.4];
        let v = [2.0, -1.0];
        let lhs = a.data_metric().inner(&a.apply(&f).unwrap(), &v);
        let rhs = a.source_metric().inner(&f, &a.apply_adjoint(&v).unwrap());
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn norm_estimates() {
        let k = DiagonalOperator::new(vec![2.0, 1.0]).unwrap();
        assert!((estimate_norm(&k, 200, 1).unwrap() - 2.0).abs() <= 0.02);
        let id = DenseOperator::identity(5);
        assert!((estimate_norm(&id, 10, 1).unwrap() - 1.0).abs() <= 1e-6);
        let one = DiagonalOperator::new(vec![5.0]).unwrap();
        assert!((estimate_norm(&one, 1, 3).unwrap() - 5.0).abs() <= 1e-12);
        let zero = DenseOperator::new(2, 2, vec![0.0; 4]).unwrap();
        assert_eq!(estimate_norm(&zero, 10, 1).unwrap(), 0.0);
        assert!(estimate_norm(&k, 0, 1).is_err());
    }

    #[test]
    fn norm_estimate_is_monotone_in_iterations() {
        let k = DiagonalOperator::new(vec![1.0, 0.95, 0.9, 0.5, 0.1]).unwrap();
        let mut prev = 0.0;
        for iters in 1..60 {
            let est = estimate_norm(&k, iters, 7).unwrap();
            assert!(est + 1e-15 >= prev);
            prev = est;
        }
    }
}
