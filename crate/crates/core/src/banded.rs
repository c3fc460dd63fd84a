//! Banded matrices and Gaussian elimination with partial pivoting.

use nalgebra::DVector;

use crate::error::{GviError, Result};

/// Square matrix with `kl` sub- and `ku` super-diagonals. Storage reserves
/// `kl` extra super-diagonals for fill-in from row exchanges.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self { n, kl, ku, data: vec![0.0; n * (2 * kl + ku + 1)] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    fn width(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let off = j as isize - i as isize + self.kl as isize;
        (i < self.n && j < self.n && off >= 0 && off < self.width() as isize).then(|| i * self.width() + off as usize)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |k| self.data[k])
    }

    /// Adds `v` at `(i, j)`; the position must lie inside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        if j + self.kl < i || j > i + self.ku {
            return Err(GviError::Invalid(format!("entry ({i}, {j}) outside band")));
        }
        let k = self.slot(i, j).ok_or_else(|| GviError::Invalid(format!("entry ({i}, {j}) out of range")))?;
        self.data[k] += v;
        Ok(())
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.n, |i, _| {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku + self.kl + 1).min(self.n);
            (lo..hi).map(|j| self.get(i, j) * x[j]).sum()
        })
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Solves `Ax = b` on a copy of the matrix.
    pub fn solve(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        if b.len() != self.n {
            return Err(GviError::Invalid("right-hand side length mismatch".into()));
        }
        let mut a = self.clone();
        let mut x = b.clone();
        let n = self.n;
        let reach = self.kl + self.ku;
        let scale = a.data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let last_col = (k + reach).min(n - 1);
            let p = (k..=last_row)
                .max_by(|&i, &j| a.get(i, k).abs().total_cmp(&a.get(j, k).abs()))
                .unwrap_or(k);
            if a.get(p, k).abs() <= scale * 1e-14 {
                return Err(GviError::Singular(k));
            }
            if p != k {
                for j in k..=last_col {
                    let (sk, sp) = (a.slot(k, j).unwrap(), a.slot(p, j).unwrap());
                    a.data.swap(sk, sp);
                }
                x.swap_rows(k, p);
            }
            let pivot = a.get(k, k);
            for i in k + 1..=last_row {
                let l = a.get(i, k) / pivot;
                if l == 0.0 {
                    continue;
                }
                for j in k..=last_col {
                    let v = a.get(k, j);
                    let s = a.slot(i, j).unwrap();
                    a.data[s] -= l * v;
                }
                x[i] -= l * x[k];
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + reach).min(n - 1);
            let s: f64 = (k + 1..=last_col).map(|j| a.get(k, j) * x[j]).sum();
            x[k] = (x[k] - s) / a.get(k, k);
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_band(n: usize, kl: usize, ku: usize, vals: &[f64]) -> BandMatrix {
        let mut m = BandMatrix::zeros(n, kl, ku);
        let mut it = vals.iter().cycle();
        for i in 0..n {
            for j in i.saturating_sub(kl)..(i + ku + 1).min(n) {
                m.add(i, j, *it.next().unwrap()).unwrap();
            }
        }
        m
    }

    #[test]
    fn tridiagonal_solve() {
        let mut m = BandMatrix::zeros(3, 1, 1);
        for (i, j, v) in [(0, 0, 4.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 4.0), (1, 2, -1.0), (2, 1, -1.0), (2, 2, 4.0)] {
            m.add(i, j, v).unwrap();
        }
        let x = m.solve(&DVector::from_element(3, 1.0)).unwrap();
        let expected = DVector::from_vec(vec![5.0 / 14.0, 3.0 / 7.0, 5.0 / 14.0]);
        assert!((x - expected).amax() <= 1e-15);
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        let mut m = BandMatrix::zeros(2, 1, 1);
        m.add(0, 1, 1.0).unwrap();
        m.add(1, 0, 1.0).unwrap();
        let x = m.solve(&DVector::from_vec(vec![2.0, 3.0])).unwrap();
        assert_eq!(x, DVector::from_vec(vec![3.0, 2.0]));
    }

    #[test]
    fn singular_is_reported() {
        let mut m = BandMatrix::zeros(2, 1, 1);
        m.add(0, 0, 1.0).unwrap();
        m.add(1, 0, 1.0).unwrap();
        assert!(matches!(m.solve(&DVector::zeros(2)), Err(GviError::Singular(1))));
    }

    #[test]
    fn rejects_entries_outside_band() {
        let mut m = BandMatrix::zeros(4, 2, 1);
        assert!(m.add(0, 2, 1.0).is_err());
        assert!(m.add(3, 0, 1.0).is_err());
        assert!(m.add(3, 1, 1.0).is_ok());
    }

    proptest! {
        #[test]
        fn matches_dense_solver(vals in prop::collection::vec(-1.0f64..1.0, 40), n in 3usize..12) {
            let mut m = random_band(n, 2, 1, &vals);
            for i in 0..n {
                m.add(i, i, 5.0 * vals[i % vals.len()].signum()).unwrap();
            }
            let b = DVector::from_fn(n, |i, _| i as f64 - 1.5);
            let dense = m.to_dense().lu().solve(&b).unwrap();
            let x = m.solve(&b).unwrap();
            prop_assert!((&x - &dense).amax() <= 1e-9 * dense.amax().max(1.0));
            prop_assert!((m.mul_vec(&x) - &b).amax() <= 1e-9);
        }
    }
}
