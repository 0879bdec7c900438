use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Block Hankel matrix of depth `depth` built from a `d x T` signal.
///
/// Block `(i, j)` (rows `i*d..(i+1)*d`, column `j`) holds sample `z_{i+j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelMatrix {
    pub data: Mat,
    pub depth: usize,
    pub block: usize,
    pub source_len: usize,
}

impl HankelMatrix {
    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    /// Rows of block rows `from..from+count`.
    pub fn block_rows(&self, from: usize, count: usize) -> Mat {
        self.data.rows(from * self.block, count * self.block).into_owned()
    }
}

pub fn block_hankel(signal: &Mat, depth: usize) -> Result<HankelMatrix> {
    let (d, len) = signal.shape();
    if depth == 0 || depth > len {
        return Err(Error::Input(format!("Hankel depth {depth} needs 1 <= depth <= signal length {len}")));
    }
    let cols = len - depth + 1;
    let mut data = Mat::zeros(d * depth, cols);
    for i in 0..depth {
        data.view_mut((i * d, 0), (d, cols)).copy_from(&signal.columns(i, cols));
    }
    Ok(HankelMatrix { data, depth, block: d, source_len: len })
}

/// Hankel matrix of the sub-signal `signal[:, start..=end]`.
pub fn block_hankel_range(signal: &Mat, start: usize, end: usize, depth: usize) -> Result<HankelMatrix> {
    if end < start || end >= signal.ncols() {
        return Err(Error::Input(format!("range {start}..={end} outside signal of length {}", signal.ncols())));
    }
    block_hankel(&signal.columns(start, end - start + 1).into_owned(), depth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn scalar_example() {
        let h = block_hankel(&Mat::from_row_slice(1, 4, &[1.0, 2.0, 3.0, 4.0]), 2).unwrap();
        assert_eq!(h.data, Mat::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 3.0, 4.0]));
    }

    #[test]
    fn full_depth_is_single_stacked_column() {
        let s = Mat::from_fn(2, 3, |i, j| (i * 3 + j) as f64);
        let h = block_hankel(&s, 3).unwrap();
        assert_eq!(h.data.shape(), (6, 1));
        assert_eq!(h.data.as_slice(), &[0.0, 3.0, 1.0, 4.0, 2.0, 5.0]);
    }

    #[test]
    fn too_deep_is_an_error() {
        assert!(block_hankel(&Mat::zeros(1, 3), 4).is_err());
    }

    #[test]
    fn random_vector_signal_has_hankel_blocks() {
        let mut rng = crate::rng::stream_rng(3, crate::rng::Stream::Probe);
        let s = crate::rng::gaussian_matrix(&mut rng, 2, 10);
        let h = block_hankel(&s, 3).unwrap();
        assert_eq!(h.data.shape(), (6, 8));
        for i in 0..3 {
            for j in 0..8 {
                assert_eq!(h.data.view((2 * i, j), (2, 1)), s.column(i + j));
            }
        }
    }

    proptest! {
        #[test]
        fn shift_property(vals in proptest::collection::vec(-10.0f64..10.0, 12..30), depth in 2usize..5) {
            let len = vals.len() / 2;
            let s = Mat::from_column_slice(2, len, &vals[..2 * len]);
            prop_assume!(depth < len);
            let h = block_hankel(&s, depth).unwrap();
            let shifted = block_hankel(&s.columns(1, len - 1).into_owned(), depth).unwrap();
            for i in 0..depth - 1 {
                let upper = h.block_rows(i + 1, 1);
                let lower = shifted.block_rows(i, 1);
                prop_assert_eq!(upper.columns(0, shifted.cols()).into_owned(), lower);
            }
        }
    }
}
