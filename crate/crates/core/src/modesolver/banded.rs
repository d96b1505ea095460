//! Banded Cholesky factorisation for symmetric positive-definite matrices.

/// Lower factor `L` of a symmetric positive-definite band matrix, `M = L Lᵀ`.
///
/// Row `i` stores columns `i − bw ..= i` contiguously, so row `i` of the
/// band lives at `data[i * (bw + 1) ..][.. bw + 1]` and column `j` of that row
/// sits at offset `j + bw − i`.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NotPositiveDefinite {
    pub row: usize,
    pub pivot: f64,
}

impl BandCholesky {
    /// Factors the matrix whose lower band is given by `entry(i, j)` for
    /// `i − bw ≤ j ≤ i`.
    pub fn factor<F>(n: usize, bw: usize, entry: F) -> Result<Self, NotPositiveDefinite>
    where
        F: Fn(usize, usize) -> f64,
    {
        let w = bw + 1;
        let mut data = vec![0.0; n * w];
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                data[i * w + j + bw - i] = entry(i, j);
            }
        }

        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                // Both rows hold columns lo..j contiguously.
                let row_i = &data[i * w + lo + bw - i..i * w + j + bw - i];
                let jlo = j.saturating_sub(bw);
                debug_assert!(jlo <= lo);
                let row_j = &data[j * w + lo + bw - j..j * w + j + bw - j];
                let dot: f64 = row_i.iter().zip(row_j).map(|(a, b)| a * b).sum();
                let s = data[i * w + j + bw - i] - dot;
                if i == j {
                    if !(s > 0.0) {
                        return Err(NotPositiveDefinite { row: i, pivot: s });
                    }
                    data[i * w + bw] = s.sqrt();
                } else {
                    data[i * w + j + bw - i] = s / data[j * w + bw];
                }
            }
        }
        Ok(BandCholesky { n, bw, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    /// Solves `M x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let w = self.bw + 1;
        let bw = self.bw;
        for i in 0..self.n {
            let lo = i.saturating_sub(bw);
            let row = &self.data[i * w + lo + bw - i..i * w + bw];
            let dot: f64 = row.iter().zip(&b[lo..i]).map(|(l, x)| l * x).sum();
            b[i] = (b[i] - dot) / self.data[i * w + bw];
        }
        for i in (0..self.n).rev() {
            b[i] /= self.data[i * w + bw];
            let xi = b[i];
            let lo = i.saturating_sub(bw);
            let row = &self.data[i * w + lo + bw - i..i * w + bw];
            for (x, l) in b[lo..i].iter_mut().zip(row) {
                *x -= l * xi;
            }
        }
    }
}
