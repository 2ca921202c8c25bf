use rand::Rng;
use rand_distr::StandardNormal;

use super::tensor::{Scalar, Tensor};

/// Random `rows x cols` matrix with orthonormal rows or columns (whichever
/// dimension is smaller), scaled by `gain`.
///
/// Gaussian entries are orthogonalized with modified Gram-Schmidt, run twice
/// for stability. Both dimensions are clamped to at least 1.
pub fn orthogonal_init<T: Scalar, R: Rng + ?Sized>(rows: usize, cols: usize, gain: f64, rng: &mut R) -> Tensor<T> {
    let (rows, cols) = (rows.max(1), cols.max(1));
    // Orthonormalize the `m` vectors of length `n`, with n >= m.
    let transpose = rows < cols;
    let (n, m) = if transpose { (cols, rows) } else { (rows, cols) };
    let mut vecs: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    for j in 0..m {
        for _pass in 0..2 {
            for i in 0..j {
                let (done, rest) = vecs.split_at_mut(j);
                let dot: f64 = done[i].iter().zip(&rest[0]).map(|(a, b)| a * b).sum();
                for (v, q) in rest[0].iter_mut().zip(&done[i]) {
                    *v -= dot * q;
                }
            }
        }
        let norm = vecs[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        vecs[j].iter_mut().for_each(|v| *v /= norm);
    }

    let mut out = Tensor::zeros(&[rows, cols]);
    let data = out.data_mut();
    for r in 0..rows {
        for c in 0..cols {
            let v = if transpose { vecs[r][c] } else { vecs[c][r] };
            data[r * cols + c] = T::from_f64(gain * v);
        }
    }
    out
}
