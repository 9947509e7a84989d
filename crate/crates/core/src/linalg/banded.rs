use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

/// LU factorization of a banded matrix with partial pivoting.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    a: Vec<f64>,
    piv: Vec<usize>,
}

/// Lower and upper bandwidths of a square sparse matrix.
pub fn bandwidths(m: &CsrMatrix) -> (usize, usize) {
    let (mut kl, mut ku) = (0, 0);
    for r in 0..m.nrows {
        for (c, _) in m.row(r) {
            if c < r {
                kl = kl.max(r - c);
            } else {
                ku = ku.max(c - r);
            }
        }
    }
    (kl, ku)
}

impl BandedLu {
    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    pub fn factor(m: &CsrMatrix) -> Result<Self> {
        if m.nrows != m.ncols {
            return Err(Error::SolverFailure("banded solve needs a square matrix".into()));
        }
        let n = m.nrows;
        let (kl, ku) = bandwidths(m);
        let width = 2 * kl + ku + 1;
        let mut lu = BandedLu { n, kl, ku, width, a: vec![0.0; n * width], piv: vec![0; n] };
        for r in 0..n {
            for (c, v) in m.row(r) {
                let idx = lu.at(r, c);
                lu.a[idx] += v;
            }
        }
        let scale = m.data.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(f64::MIN_POSITIVE);
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kl + ku).min(n - 1);
            let mut p = k;
            let mut best = lu.a[lu.at(k, k)].abs();
            for r in k + 1..=last_row {
                let v = lu.a[lu.at(r, k)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best <= 1e-300 * scale || !best.is_finite() {
                return Err(Error::SolverFailure(format!("singular banded matrix at row {k}")));
            }
            lu.piv[k] = p;
            if p != k {
                for c in k..=last_col {
                    let (i1, i2) = (lu.at(k, c), lu.at(p, c));
                    lu.a.swap(i1, i2);
                }
            }
            let pivot = lu.a[lu.at(k, k)];
            for r in k + 1..=last_row {
                let irk = lu.at(r, k);
                let factor = lu.a[irk] / pivot;
                lu.a[irk] = factor;
                if factor == 0.0 {
                    continue;
                }
                for c in k + 1..=last_col {
                    let ikc = lu.at(k, c);
                    let irc = lu.at(r, c);
                    lu.a[irc] -= factor * lu.a[ikc];
                }
            }
        }
        Ok(lu)
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            for r in k + 1..=(k + self.kl).min(n.saturating_sub(1)) {
                x[r] -= self.a[self.at(r, k)] * xk;
            }
        }
        for k in (0..n).rev() {
            let mut acc = x[k];
            for c in k + 1..=(k + self.kl + self.ku).min(n - 1) {
                acc -= self.a[self.at(k, c)] * x[c];
            }
            x[k] = acc / self.a[self.at(k, k)];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sparse::Triplets;

    #[test]
    fn tridiagonal_with_pivoting() {
        let n = 50;
        let mut t = Triplets::new(n, n);
        for i in 0..n {
            t.push(i, i, if i % 7 == 3 { 0.0 } else { 2.0 + i as f64 * 0.01 });
            if i > 0 {
                t.push(i, i - 1, -1.5);
            }
            if i + 1 < n {
                t.push(i, i + 1, 1.0);
            }
        }
        let m = t.to_csr();
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = m.matvec(&x_true);
        let x = BandedLu::factor(&m).unwrap().solve(&b);
        for (a, e) in x.iter().zip(&x_true) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_is_reported() {
        let mut t = Triplets::new(2, 2);
        t.push(0, 0, 1.0);
        t.push(0, 1, 1.0);
        t.push(1, 0, 1.0);
        t.push(1, 1, 1.0);
        assert!(BandedLu::factor(&t.to_csr()).is_err());
    }
}
