//! Dense Hermitian positive-definite factorization.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hardy::C64;

/// Lower-triangular Cholesky factor `A = L L*`, stored row-major.
#[derive(Clone, Debug)]
pub struct Cholesky {
    n: usize,
    l: Vec<C64>,
}

impl Cholesky {
    /// Factor the Hermitian matrix `a` (row-major, `n × n`). Only the lower
    /// triangle is read.
    pub fn factor(a: &[C64], n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n, "matrix storage does not match dimension");
        let mut l = a.to_vec();
        for j in 0..n {
            let (done, rest) = l.split_at_mut((j + 1) * n);
            let row_j = &mut done[j * n..(j + 1) * n];
            let d = row_j[j].re - row_j[..j].iter().map(|x| x.norm_sqr()).sum::<f64>();
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::SolveFailed { pivot: j, value: d });
            }
            let pivot = d.sqrt();
            row_j[j] = C64::new(pivot, 0.0);
            for x in &mut row_j[j + 1..] {
                *x = C64::new(0.0, 0.0);
            }
            let head = &row_j[..j];
            rest.par_chunks_mut(n).with_min_len(64).for_each(|row_i| {
                let s: C64 = row_i[..j]
                    .iter()
                    .zip(head)
                    .map(|(a, b)| a * b.conj())
                    .sum();
                row_i[j] = (row_i[j] - s) / pivot;
            });
        }
        Ok(Cholesky { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        assert_eq!(b.len(), n, "right-hand side has wrong length");
        let mut y = b.to_vec();
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            let s: C64 = row.iter().zip(&y[..i]).map(|(a, b)| a * b).sum();
            y[i] = (y[i] - s) / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l[k * n + i].conj() * y[k];
            }
            y[i] = s / self.l[i * n + i].re;
        }
        y
    }
}
