use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Nonnegative node-by-community membership strengths `F`, row-major, with a
/// cached column sum `S_c = sum_v F_vc` per community.
#[derive(Debug, Clone, PartialEq)]
pub struct AffiliationMatrix<T> {
    num_nodes: usize,
    num_communities: usize,
    values: Vec<T>,
    column_sums: Vec<T>,
}

impl<T: Scalar> AffiliationMatrix<T> {
    pub fn zeros(num_nodes: usize, num_communities: usize) -> Self {
        Self {
            num_nodes,
            num_communities,
            values: vec![T::zero(); num_nodes * num_communities],
            column_sums: vec![T::zero(); num_communities],
        }
    }

    /// Builds from equal-length rows. Entries must be finite and nonnegative.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let c = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * c);
        for (u, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(Error::DimensionMismatch(format!(
                    "row {u} has {} entries, expected {c}",
                    row.len()
                )));
            }
            if let Some(x) = row.iter().find(|x| !(x.is_finite() && **x >= T::zero())) {
                return Err(Error::InvalidArgument(format!("row {u} holds {x}")));
            }
            values.extend_from_slice(row);
        }
        let mut f = Self {
            num_nodes: rows.len(),
            num_communities: c,
            values,
            column_sums: vec![T::zero(); c],
        };
        f.refresh_column_sums();
        Ok(f)
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_communities(&self) -> usize {
        self.num_communities
    }

    #[inline]
    pub fn row(&self, u: usize) -> &[T] {
        let c = self.num_communities;
        &self.values[u * c..(u + 1) * c]
    }

    #[inline]
    pub fn get(&self, u: usize, c: usize) -> T {
        self.values[u * self.num_communities + c]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Cached `sum_v F_vc`; fresh after `refresh_column_sums` or `set_row`.
    #[inline]
    pub fn column_sums(&self) -> &[T] {
        &self.column_sums
    }

    /// Replaces row `u` and shifts the cached column sums by the row delta.
    pub fn set_row(&mut self, u: usize, new: &[T]) {
        let c = self.num_communities;
        let row = &mut self.values[u * c..(u + 1) * c];
        for ((old, &x), s) in row.iter_mut().zip(new).zip(self.column_sums.iter_mut()) {
            *s += x - *old;
            *old = x;
        }
    }

    /// Sets a single entry without touching the cache.
    pub fn set_raw(&mut self, u: usize, c: usize, value: T) {
        self.values[u * self.num_communities + c] = value;
    }

    pub(crate) fn rows_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    /// Recomputes every cached column sum from scratch.
    pub fn refresh_column_sums(&mut self) {
        let c = self.num_communities;
        self.column_sums.iter_mut().for_each(|s| *s = T::zero());
        if c == 0 {
            return;
        }
        for row in self.values.chunks_exact(c) {
            for (s, &x) in self.column_sums.iter_mut().zip(row) {
                *s += x;
            }
        }
    }

    /// Squared Frobenius norm of each row, summed.
    pub(crate) fn sum_row_sq_norms(&self) -> T {
        self.values.iter().map(|&x| x * x).sum()
    }
}

/// Logistic weights `W`, one row per attribute holding `C` community weights
/// followed by the bias (intercept) weight.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeWeights<T> {
    num_attrs: usize,
    num_communities: usize,
    values: Vec<T>,
}

impl<T: Scalar> AttributeWeights<T> {
    pub fn zeros(num_attrs: usize, num_communities: usize) -> Self {
        Self {
            num_attrs,
            num_communities,
            values: vec![T::zero(); num_attrs * (num_communities + 1)],
        }
    }

    /// Rows of length `C + 1`, bias last. Entries must be finite.
    pub fn from_rows(rows: &[Vec<T>], num_communities: usize) -> Result<Self> {
        let mut values = Vec::with_capacity(rows.len() * (num_communities + 1));
        for (k, row) in rows.iter().enumerate() {
            if row.len() != num_communities + 1 {
                return Err(Error::DimensionMismatch(format!(
                    "weight row {k} has {} entries, expected {}",
                    row.len(),
                    num_communities + 1
                )));
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "weight row {k} is not finite"
                )));
            }
            values.extend_from_slice(row);
        }
        Ok(Self {
            num_attrs: rows.len(),
            num_communities,
            values,
        })
    }

    pub fn num_attrs(&self) -> usize {
        self.num_attrs
    }

    pub fn num_communities(&self) -> usize {
        self.num_communities
    }

    /// Full row `W_k` including the trailing bias.
    #[inline]
    pub fn row(&self, k: usize) -> &[T] {
        let w = self.num_communities + 1;
        &self.values[k * w..(k + 1) * w]
    }

    #[inline]
    pub fn bias(&self, k: usize) -> T {
        self.row(k)[self.num_communities]
    }

    pub fn set_row(&mut self, k: usize, new: &[T]) {
        let w = self.num_communities + 1;
        self.values[k * w..(k + 1) * w].copy_from_slice(new);
    }

    pub(crate) fn rows_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    /// `sum |W_kc|` over the community (non-bias) columns.
    pub fn l1_norm_without_bias(&self) -> T {
        let c = self.num_communities;
        if self.values.is_empty() {
            return T::zero();
        }
        self.values
            .chunks_exact(c + 1)
            .flat_map(|r| r[..c].iter())
            .map(|x| x.abs())
            .sum()
    }
}
