//! Characteristic polynomial, spectrum and Jordan decomposition.

use super::{Dense, ExactMatrix};
use crate::error::{Error, Result};
use crate::field::{ClosureElement, Coeffs, FiniteField};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JordanBlock {
    pub eigenvalue: ClosureElement,
    pub size: usize,
}

/// X = S J S^{-1} with J the direct sum of `blocks` in order.
///
/// Blocks are sorted by eigenvalue, then by decreasing size.
#[derive(Clone, Debug)]
pub struct JordanDecomposition {
    pub s: ExactMatrix,
    pub s_inv: ExactMatrix,
    pub blocks: Vec<JordanBlock>,
}

impl JordanDecomposition {
    pub fn jordan_matrix(&self) -> ExactMatrix {
        let field = self.s.field();
        let n = self.s.n();
        let mut j = ExactMatrix::zeros(field, n);
        let mut at = 0;
        for b in &self.blocks {
            for t in 0..b.size {
                j.set(at + t, at + t, b.eigenvalue.clone());
                if t + 1 < b.size {
                    j.set(at + t, at + t + 1, field.one());
                }
            }
            at += b.size;
        }
        j
    }

    pub fn reassemble(&self) -> Result<ExactMatrix> {
        self.jordan_matrix().conjugate(&self.s, &self.s_inv)
    }
}

fn independent_of(k: &FiniteField, basis: &[Vec<Coeffs>], v: &[Coeffs]) -> bool {
    if v.iter().all(|c| k.is_zero(c)) {
        return false;
    }
    let n = v.len();
    let rows = basis.len() + 1;
    let mut d = Dense::zeros(k, rows, n);
    for (i, b) in basis.iter().chain(std::iter::once(&v.to_vec())).enumerate() {
        for j in 0..n {
            *d.at_mut(i, j) = b[j].clone();
        }
    }
    d.rank(k) == rows
}

impl ExactMatrix {
    /// det(zI - X), low-to-high.
    pub fn charpoly(&self) -> Result<Vec<ClosureElement>> {
        let lvl = self.level()?;
        let cp = self.to_dense(&lvl).charpoly(&lvl.field);
        Ok(cp.iter().map(|c| self.field().lower(&lvl, c)).collect())
    }

    /// Eigenvalues with algebraic multiplicity, sorted.
    pub fn eigenvalues(&self) -> Result<Vec<ClosureElement>> {
        self.field().poly_roots(&self.charpoly()?)
    }

    fn distinct_eigenvalues(&self) -> Result<Vec<(ClosureElement, usize)>> {
        let mut out: Vec<(ClosureElement, usize)> = Vec::new();
        for e in self.eigenvalues()? {
            match out.last_mut() {
                Some((last, mult)) if *last == e => *mult += 1,
                _ => out.push((e, 1)),
            }
        }
        Ok(out)
    }

    /// True iff the geometric multiplicities add up to n.
    pub fn is_diagonalizable(&self) -> Result<bool> {
        let spec = self.distinct_eigenvalues()?;
        let mut total = 0;
        for (lambda, _) in &spec {
            let shifted = self.sub(&ExactMatrix::scalar(self.field(), self.n(), lambda))?;
            total += self.n() - shifted.rank()?;
        }
        Ok(total == self.n())
    }

    pub fn jordan_form(&self) -> Result<JordanDecomposition> {
        let field = self.field();
        let n = self.n();
        let spec = self.distinct_eigenvalues()?;
        let lvl = field.common_level(
            self.entries().iter().map(|c| c.degree()).chain(spec.iter().map(|(e, _)| e.degree())),
        )?;
        let k = &lvl.field;
        let x = self.to_dense(&lvl);
        let mut columns: Vec<Vec<Coeffs>> = Vec::with_capacity(n);
        let mut blocks = Vec::new();

        for (lambda, alg) in &spec {
            let nmat = x.minus_scalar(k, &field.lift(lambda, &lvl));
            // kernels of N, N^2, ... until the generalized eigenspace is reached
            let mut kernels: Vec<Vec<Vec<Coeffs>>> = vec![Vec::new()];
            let mut power = nmat.clone();
            loop {
                let ker = power.kernel(k);
                let done = ker.len() >= *alg;
                kernels.push(ker);
                if done {
                    break;
                }
                power = power.mul(k, &nmat);
            }
            let top = kernels.len() - 1;
            // heads of chains already started, pushed down one level at a time
            let mut carried: Vec<(Vec<Coeffs>, usize)> = Vec::new();
            let mut chains: Vec<(Vec<Coeffs>, usize)> = Vec::new();
            for level in (1..=top).rev() {
                let mut span: Vec<Vec<Coeffs>> = kernels[level - 1].clone();
                span.extend(carried.iter().map(|(v, _)| v.clone()));
                for v in &kernels[level] {
                    if independent_of(k, &span, v) {
                        span.push(v.clone());
                        chains.push((v.clone(), level));
                        carried.push((v.clone(), level));
                    }
                }
                carried = carried.into_iter().map(|(v, l)| (nmat.mul_vec(k, &v), l)).collect();
            }
            chains.sort_by(|a, b| b.1.cmp(&a.1));
            for (v, len) in chains {
                let mut chain = vec![v];
                for _ in 1..len {
                    let next = nmat.mul_vec(k, chain.last().unwrap());
                    chain.push(next);
                }
                columns.extend(chain.into_iter().rev());
                blocks.push(JordanBlock {
                    eigenvalue: lambda.clone(),
                    size: len,
                });
            }
        }
        debug_assert_eq!(columns.len(), n);
        let s_dense = Dense::from_columns(k, n, &columns);
        let s_inv_dense = s_dense
            .inverse(k)
            .expect("Jordan chains form a basis");
        Ok(JordanDecomposition {
            s: ExactMatrix::from_dense(field, &lvl, &s_dense),
            s_inv: ExactMatrix::from_dense(field, &lvl, &s_inv_dense),
            blocks,
        })
    }

    /// A k-th root of a diagonalizable matrix: S diag(min k-th root of each
    /// eigenvalue) S^{-1}.
    pub fn diag_kth_root(&self, k: u64) -> Result<ExactMatrix> {
        let jd = self.jordan_form()?;
        if jd.blocks.iter().any(|b| b.size > 1) {
            return Err(Error::NotDiagonalizable);
        }
        let field = self.field();
        let roots = jd
            .blocks
            .iter()
            .map(|b| field.min_kth_root(&b.eigenvalue, k))
            .collect::<Result<Vec<_>>>()?;
        ExactMatrix::diag(field, &roots).conjugate(&jd.s, &jd.s_inv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Closure;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sizes(jd: &JordanDecomposition) -> Vec<(String, usize)> {
        jd.blocks.iter().map(|b| (b.eigenvalue.to_string(), b.size)).collect()
    }

    #[test]
    fn charpoly_matches_cofactor_expansion() {
        let k = Closure::prime(5).unwrap();
        let x = ExactMatrix::from_ints(&k, &[vec![1, 2, 0], vec![3, 4, 1], vec![0, 2, 2]]).unwrap();
        // trace 7, principal 2-minors -2 + 2 + 6 = 6, det -6
        let cp: Vec<i64> = vec![6, 6, -7, 1];
        let expect: Vec<ClosureElement> = cp.iter().map(|&c| k.int(c)).collect();
        assert_eq!(x.charpoly().unwrap(), expect);
    }

    #[test]
    fn jordan_examples() {
        let k = Closure::prime(3).unwrap();
        let n = ExactMatrix::from_ints(&k, &[vec![0, 1, 0], vec![0, 0, 1], vec![0, 0, 0]]).unwrap();
        assert_eq!(sizes(&n.jordan_form().unwrap()), vec![("0".into(), 3)]);
        let u = ExactMatrix::from_ints(&k, &[vec![1, 1], vec![0, 1]]).unwrap();
        assert_eq!(sizes(&u.jordan_form().unwrap()), vec![("1".into(), 2)]);
        assert!(!u.is_diagonalizable().unwrap());
        let d = ExactMatrix::from_ints(&k, &[vec![2, 0, 0], vec![0, 0, 0], vec![0, 0, 2]]).unwrap();
        assert_eq!(
            sizes(&d.jordan_form().unwrap()),
            vec![("0".into(), 1), ("2".into(), 1), ("2".into(), 1)]
        );
        // rotation-like matrix with eigenvalues outside F_3
        let r = ExactMatrix::from_ints(&k, &[vec![0, 2], vec![1, 0]]).unwrap();
        let jd = r.jordan_form().unwrap();
        assert!(jd.blocks.iter().all(|b| b.eigenvalue.degree() == 2 && b.size == 1));
        assert_eq!(jd.reassemble().unwrap(), r);
    }

    #[test]
    fn kth_root_of_diagonalizable() {
        let k = Closure::prime(5).unwrap();
        let x = ExactMatrix::from_ints(&k, &[vec![2, 0], vec![1, 3]]).unwrap();
        for kk in 1..5 {
            let y = x.diag_kth_root(kk).unwrap();
            assert_eq!(y.pow(kk).unwrap(), x);
        }
        let u = ExactMatrix::from_ints(&k, &[vec![1, 1], vec![0, 1]]).unwrap();
        assert!(matches!(u.diag_kth_root(2), Err(Error::NotDiagonalizable)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn jordan_reassembles(p in prop::sample::select(vec![3u32, 5]), n in 1usize..5, deg in 1u32..3, seed in any::<u64>()) {
            let k = Closure::prime(p).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = ExactMatrix::random(&k, n, deg, &mut rng).unwrap();
            let jd = x.jordan_form().unwrap();
            prop_assert_eq!(jd.reassemble().unwrap(), x.clone());
            prop_assert_eq!(jd.blocks.iter().map(|b| b.size).sum::<usize>(), n);
            let diag = jd.blocks.iter().all(|b| b.size == 1);
            prop_assert_eq!(diag, x.is_diagonalizable().unwrap());
        }

        #[test]
        fn nilpotent_structure_from_conjugated_blocks(p in prop::sample::select(vec![3u32, 5]), parts in prop::collection::vec(1usize..4, 1..4), seed in any::<u64>()) {
            let k = Closure::prime(p).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n: usize = parts.iter().sum();
            let mut j = ExactMatrix::zeros(&k, n);
            let mut at = 0;
            for &s in &parts {
                for t in 0..s.saturating_sub(1) {
                    j.set(at + t, at + t + 1, k.one());
                }
                at += s;
            }
            let s = ExactMatrix::random_invertible(&k, n, 1, &mut rng).unwrap();
            let x = j.conjugate(&s, &s.inverse().unwrap()).unwrap();
            let mut got: Vec<usize> = x.jordan_form().unwrap().blocks.iter().map(|b| b.size).collect();
            let mut want = parts.clone();
            got.sort();
            want.sort();
            prop_assert_eq!(got, want);
        }
    }
}
