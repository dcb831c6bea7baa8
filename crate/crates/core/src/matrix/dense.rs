//! Linear algebra over a single level F_{p^L}, on raw coordinates.

use crate::field::{Coeffs, FiniteField};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Dense {
    pub rows: usize,
    pub cols: usize,
    pub a: Vec<Coeffs>,
}

impl Dense {
    pub fn zeros(k: &FiniteField, rows: usize, cols: usize) -> Self {
        Dense {
            rows,
            cols,
            a: vec![k.zero(); rows * cols],
        }
    }

    pub fn identity(k: &FiniteField, n: usize) -> Self {
        let mut d = Dense::zeros(k, n, n);
        for i in 0..n {
            d.a[i * n + i] = k.one();
        }
        d
    }

    pub fn from_columns(k: &FiniteField, rows: usize, cols: &[Vec<Coeffs>]) -> Self {
        let mut d = Dense::zeros(k, rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for i in 0..rows {
                d.a[i * cols.len() + j] = c[i].clone();
            }
        }
        d
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &Coeffs {
        &self.a[i * self.cols + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Coeffs {
        &mut self.a[i * self.cols + j]
    }

    pub fn mul(&self, k: &FiniteField, other: &Dense) -> Dense {
        assert_eq!(self.cols, other.rows);
        let mut out = Dense::zeros(k, self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let x = self.at(i, l);
                if k.is_zero(x) {
                    continue;
                }
                for j in 0..other.cols {
                    let y = other.at(l, j);
                    if k.is_zero(y) {
                        continue;
                    }
                    let t = k.mul(x, y);
                    let o = out.at_mut(i, j);
                    *o = k.add(o, &t);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, k: &FiniteField, v: &[Coeffs]) -> Vec<Coeffs> {
        (0..self.rows)
            .map(|i| {
                let mut acc = k.zero();
                for (j, vj) in v.iter().enumerate() {
                    acc = k.add(&acc, &k.mul(self.at(i, j), vj));
                }
                acc
            })
            .collect()
    }

    pub fn pow(&self, k: &FiniteField, mut e: u64) -> Dense {
        let mut r = Dense::identity(k, self.rows);
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(k, &b);
            }
            e >>= 1;
            if e > 0 {
                b = b.mul(k, &b);
            }
        }
        r
    }

    /// self - c I.
    pub fn minus_scalar(&self, k: &FiniteField, c: &[u32]) -> Dense {
        let mut d = self.clone();
        for i in 0..self.rows {
            let v = k.sub(d.at(i, i), c);
            *d.at_mut(i, i) = v;
        }
        d
    }

    /// Reduced row echelon form in place; returns pivot columns.
    pub fn rref(&mut self, k: &FiniteField) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| !k.is_zero(self.at(i, c))) else {
                continue;
            };
            if pr != r {
                for j in 0..self.cols {
                    self.a.swap(pr * self.cols + j, r * self.cols + j);
                }
            }
            let inv = k.inv(self.at(r, c)).unwrap();
            for j in c..self.cols {
                let v = k.mul(self.at(r, j), &inv);
                *self.at_mut(r, j) = v;
            }
            for i in 0..self.rows {
                if i == r || k.is_zero(self.at(i, c)) {
                    continue;
                }
                let f = self.at(i, c).clone();
                for j in c..self.cols {
                    let t = k.mul(&f, self.at(r, j));
                    let v = k.sub(self.at(i, j), &t);
                    *self.at_mut(i, j) = v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self, k: &FiniteField) -> usize {
        self.clone().rref(k).len()
    }

    /// Basis of the right null space.
    pub fn kernel(&self, k: &FiniteField) -> Vec<Vec<Coeffs>> {
        let mut m = self.clone();
        let pivots = m.rref(k);
        let mut basis = Vec::new();
        for f in (0..self.cols).filter(|c| !pivots.contains(c)) {
            let mut v = vec![k.zero(); self.cols];
            v[f] = k.one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = k.neg(m.at(r, f));
            }
            basis.push(v);
        }
        basis
    }

    pub fn inverse(&self, k: &FiniteField) -> Option<Dense> {
        let n = self.rows;
        let mut aug = Dense::zeros(k, n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                *aug.at_mut(i, j) = self.at(i, j).clone();
            }
            *aug.at_mut(i, n + i) = k.one();
        }
        let pivots = aug.rref(k);
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Dense::zeros(k, n, n);
        for i in 0..n {
            for j in 0..n {
                *inv.at_mut(i, j) = aug.at(i, n + j).clone();
            }
        }
        Some(inv)
    }

    /// Characteristic polynomial det(zI - self), low-to-high, via reduction
    /// to upper Hessenberg form.
    pub fn charpoly(&self, k: &FiniteField) -> Vec<Coeffs> {
        let n = self.rows;
        let mut h = self.clone();
        for m in 1..n.saturating_sub(1) {
            let Some(i) = (m..n).find(|&i| !k.is_zero(h.at(i, m - 1))) else {
                continue;
            };
            if i != m {
                for j in 0..n {
                    h.a.swap(i * n + j, m * n + j);
                }
                for r in 0..n {
                    h.a.swap(r * n + i, r * n + m);
                }
            }
            let pinv = k.inv(h.at(m, m - 1)).unwrap();
            for j in m + 1..n {
                let u = k.mul(h.at(j, m - 1), &pinv);
                if k.is_zero(&u) {
                    continue;
                }
                for c in 0..n {
                    let t = k.mul(&u, h.at(m, c));
                    let v = k.sub(h.at(j, c), &t);
                    *h.at_mut(j, c) = v;
                }
                for r in 0..n {
                    let t = k.mul(&u, h.at(r, j));
                    let v = k.add(h.at(r, m), &t);
                    *h.at_mut(r, m) = v;
                }
            }
        }
        // p_m(z) = (z - h_mm) p_{m-1} - sum_i h_im (prod of subdiagonal) p_{i-1}
        let mut polys: Vec<Vec<Coeffs>> = vec![vec![k.one()]];
        for m in 1..=n {
            let prev = &polys[m - 1];
            let mut next = vec![k.zero(); m + 1];
            for (i, c) in prev.iter().enumerate() {
                next[i + 1] = k.add(&next[i + 1], c);
                next[i] = k.sub(&next[i], &k.mul(h.at(m - 1, m - 1), c));
            }
            let mut t = k.one();
            for i in (1..m).rev() {
                t = k.mul(&t, h.at(i, i - 1));
                let coef = k.mul(h.at(i - 1, m - 1), &t);
                if k.is_zero(&coef) {
                    continue;
                }
                for (d, c) in polys[i - 1].iter().enumerate() {
                    next[d] = k.sub(&next[d], &k.mul(&coef, c));
                }
            }
            polys.push(next);
        }
        polys.pop().unwrap()
    }
}
