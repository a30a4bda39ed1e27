use crate::features::SparseVector;
use crate::scalar::Real;

/// Column-wise postings over a set of sparse rows, for computing one
/// vector's dot products against every row in a single pass.
pub(crate) struct InvertedIndex<T> {
    postings: Vec<Vec<(u32, T)>>,
    n_rows: usize,
}

impl<T: Real> InvertedIndex<T> {
    pub fn build<'a>(rows: impl IntoIterator<Item = &'a SparseVector<T>>, dim: usize) -> Self {
        let mut postings = vec![Vec::new(); dim];
        let mut n_rows = 0;
        for (r, row) in rows.into_iter().enumerate() {
            for (j, v) in row.iter() {
                postings[j].push((r as u32, v));
            }
            n_rows = r + 1;
        }
        InvertedIndex { postings, n_rows }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    /// `out[r] = <row r, x>`; `out` is overwritten.
    pub fn dots(&self, x: &SparseVector<T>, out: &mut [T]) {
        out.iter_mut().for_each(|v| *v = T::zero());
        for (j, v) in x.iter() {
            if let Some(list) = self.postings.get(j) {
                for &(r, w) in list {
                    out[r as usize] = out[r as usize] + v * w;
                }
            }
        }
    }
}
