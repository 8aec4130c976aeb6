//! Dense symmetric matrices and the spectral predicates used by the
//! certificate machinery: PSD/PD tests, spectral pseudo-inverse, column
//! space membership, Schur complements, and congruent permutation.
//!
//! All predicates take an explicit tolerance; [`SymMatrix::default_tol`]
//! gives the scale-aware default `1e-9 * (1 + ||M||_inf)`.

use nalgebra::DMatrix;

/// Errors from constructing or splitting symmetric matrices.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("rows have unequal lengths")]
    RaggedRows,
    #[error("entry ({i},{j}) = {upper} differs from ({j},{i}) = {lower}")]
    NotSymmetric {
        i: usize,
        j: usize,
        upper: f64,
        lower: f64,
    },
    #[error("not a permutation of 0..{n}")]
    InvalidPermutation { n: usize },
    #[error("split at {m} out of range for order {n}")]
    BadSplit { m: usize, n: usize },
}

/// A real symmetric matrix. Construction enforces exact symmetry, so every
/// value of this type satisfies `M[i][j] == M[j][i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    m: DMatrix<f64>,
}

impl SymMatrix {
    /// Wraps a square, exactly symmetric matrix.
    pub fn new(m: DMatrix<f64>) -> Result<Self, LinalgError> {
        if m.nrows() != m.ncols() {
            return Err(LinalgError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        for i in 0..m.nrows() {
            for j in i + 1..m.ncols() {
                if m[(i, j)] != m[(j, i)] {
                    return Err(LinalgError::NotSymmetric {
                        i,
                        j,
                        upper: m[(i, j)],
                        lower: m[(j, i)],
                    });
                }
            }
        }
        Ok(SymMatrix { m })
    }

    /// Builds from nested rows; rejects ragged or asymmetric input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            if let Some(r) = rows.iter().find(|r| r.len() != rows.len()) {
                if rows.iter().all(|q| q.len() == r.len()) {
                    return Err(LinalgError::NotSquare {
                        rows: n,
                        cols: r.len(),
                    });
                }
            }
            return Err(LinalgError::RaggedRows);
        }
        SymMatrix::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// `(M + M^T) / 2` of an arbitrary square matrix.
    pub fn symmetrized(m: &DMatrix<f64>) -> Result<Self, LinalgError> {
        if m.nrows() != m.ncols() {
            return Err(LinalgError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let s = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| (m[(i, j)] + m[(j, i)]) / 2.0);
        Ok(SymMatrix { m: s })
    }

    /// Symmetric matrix from a function evaluated on `i <= j` and mirrored.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymMatrix { m }
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            m: DMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix {
            m: DMatrix::identity(n, n),
        }
    }

    pub fn order(&self) -> usize {
        self.m.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    /// Sets both mirror entries.
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.m[(i, j)] = v;
        self.m[(j, i)] = v;
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_dmatrix(self) -> DMatrix<f64> {
        self.m
    }

    /// Max absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.m.nrows())
            .map(|i| (0..self.m.ncols()).map(|j| self.m[(i, j)].abs()).sum())
            .fold(0.0, f64::max)
    }

    /// Scale-aware tolerance `1e-9 * (1 + ||M||_inf)`.
    pub fn default_tol(&self) -> f64 {
        1e-9 * (1.0 + self.inf_norm())
    }

    /// Eigenvalues in ascending order (empty for order 0).
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.order() == 0 {
            return Vec::new();
        }
        let mut ev: Vec<f64> = self
            .m
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// Smallest eigenvalue; 0 for the order-0 matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Positive semidefinite within `tol`: smallest eigenvalue `>= -tol`.
    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    /// Positive definite within `tol`: smallest eigenvalue `> tol`.
    pub fn is_pd(&self, tol: f64) -> bool {
        self.order() == 0 || self.min_eigenvalue() > tol
    }

    /// Moore-Penrose pseudo-inverse by spectral truncation: eigenvalues with
    /// `|lambda| <= tol * max|lambda|` are treated as zero.
    pub fn pseudo_inverse(&self, tol: f64) -> SymMatrix {
        let n = self.order();
        if n == 0 {
            return SymMatrix::zeros(0);
        }
        let eig = self.m.clone().symmetric_eigen();
        let lam_max = eig.eigenvalues.iter().fold(0.0f64, |a, &l| a.max(l.abs()));
        if lam_max == 0.0 {
            return SymMatrix::zeros(n);
        }
        let mut out = DMatrix::zeros(n, n);
        for (k, &lam) in eig.eigenvalues.iter().enumerate() {
            if lam.abs() > tol * lam_max {
                let v = eig.eigenvectors.column(k);
                out += v * v.transpose() / lam;
            }
        }
        SymMatrix::symmetrized(&out).expect("square by construction")
    }

    /// Congruent relabeling: `out[i][j] = M[sigma[i]][sigma[j]]`.
    pub fn permute_congruent(&self, sigma: &[usize]) -> Result<SymMatrix, LinalgError> {
        let n = self.order();
        if sigma.len() != n {
            return Err(LinalgError::InvalidPermutation { n });
        }
        let mut seen = vec![false; n];
        for &s in sigma {
            if s >= n || seen[s] {
                return Err(LinalgError::InvalidPermutation { n });
            }
            seen[s] = true;
        }
        Ok(SymMatrix::from_fn(n, |i, j| self.m[(sigma[i], sigma[j])]))
    }

    /// Principal submatrix on the given (distinct) indices, in their order.
    pub fn principal_submatrix(&self, idx: &[usize]) -> SymMatrix {
        SymMatrix::from_fn(idx.len(), |i, j| self.m[(idx[i], idx[j])])
    }

    /// Schur complement of the leading `m x m` block: `C - B^T A^+ B`,
    /// using the spectral pseudo-inverse with tolerance `tol`.
    pub fn schur_complement(&self, m: usize, tol: f64) -> Result<SymMatrix, LinalgError> {
        let n = self.order();
        if m > n {
            return Err(LinalgError::BadSplit { m, n });
        }
        let a = self.principal_submatrix(&(0..m).collect::<Vec<_>>());
        let b = self.m.view((0, m), (m, n - m)).into_owned();
        let c = self.principal_submatrix(&(m..n).collect::<Vec<_>>());
        let correction = b.transpose() * a.pseudo_inverse(tol).as_dmatrix() * &b;
        SymMatrix::symmetrized(&(c.as_dmatrix() - correction))
    }
}

/// Whether the columns of `b` lie in the column space of `a`:
/// `||(I - A A^+) B||_F <= tol * (1 + ||B||_F)`.
pub fn column_space_contains(a: &SymMatrix, b: &DMatrix<f64>, tol: f64) -> bool {
    assert_eq!(a.order(), b.nrows(), "row count must match the matrix order");
    let proj = a.as_dmatrix() * a.pseudo_inverse(tol).as_dmatrix();
    let residual = b - proj * b;
    residual.norm() <= tol * (1.0 + b.norm())
}

/// Block-diagonal assembly of symmetric matrices.
pub fn block_diag(blocks: &[&SymMatrix]) -> SymMatrix {
    let n: usize = blocks.iter().map(|b| b.order()).sum();
    let mut m = DMatrix::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        let k = b.order();
        m.view_mut((off, off), (k, k)).copy_from(b.as_dmatrix());
        off += k;
    }
    SymMatrix { m }
}

/// Validation predicate: every index whose diagonal entry is `<= tol` in
/// absolute value has its entire row within `tol` of zero. Holds for every
/// PSD matrix; returns false when violated.
pub fn zero_diag_implies_zero_line(m: &SymMatrix, tol: f64) -> bool {
    let n = m.order();
    (0..n).all(|i| {
        m.get(i, i).abs() > tol || (0..n).all(|j| m.get(i, j).abs() <= tol)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sym(rows: &[&[f64]]) -> SymMatrix {
        SymMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn constructor_rejects_asymmetry() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert!(matches!(
            SymMatrix::new(m.clone()),
            Err(LinalgError::NotSymmetric { .. })
        ));
        let s = SymMatrix::symmetrized(&m).unwrap();
        assert_eq!(s.get(0, 1), 2.5);
    }

    #[test]
    fn psd_examples() {
        assert!(sym(&[&[2.0, -1.0], &[-1.0, 2.0]]).is_psd(1e-9));
        let m = sym(&[&[1.0, 1.0, 0.0], &[1.0, 1.0, 1.0], &[0.0, 1.0, 1.0]]);
        assert!(!m.is_psd(1e-9));
        assert!(SymMatrix::zeros(3).is_psd(0.0));
        assert!(SymMatrix::zeros(0).is_psd(0.0));
    }

    #[test]
    fn pd_examples() {
        assert!(sym(&[&[2.0, -1.0], &[-1.0, 2.0]]).is_pd(1e-9));
        // singular: rank one
        assert!(!sym(&[&[1.0, 4.0], &[4.0, 16.0]]).is_pd(1e-9));
    }

    #[test]
    fn pseudo_inverse_rank_one() {
        let m = sym(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let p = m.pseudo_inverse(1e-12);
        for i in 0..2 {
            for j in 0..2 {
                assert!((p.get(i, j) - 0.25).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn permute_congruent_swaps() {
        let m = sym(&[&[1.0, 4.0], &[4.0, 16.0]]);
        let p = m.permute_congruent(&[1, 0]).unwrap();
        assert_eq!(p, sym(&[&[16.0, 4.0], &[4.0, 1.0]]));
        assert!(m.permute_congruent(&[0, 0]).is_err());
        assert!(m.permute_congruent(&[0]).is_err());
    }

    #[test]
    fn schur_complement_example() {
        let m = sym(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let s = m.schur_complement(1, 1e-12).unwrap();
        assert_eq!(s.order(), 1);
        assert!((s.get(0, 0) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn column_space_examples() {
        let a = sym(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let inside = DMatrix::from_column_slice(2, 1, &[1.0, 1.0]);
        let outside = DMatrix::from_column_slice(2, 1, &[2.0, -2.0]);
        assert!(column_space_contains(&a, &inside, 1e-9));
        assert!(!column_space_contains(&a, &outside, 1e-9));
    }

    #[test]
    fn block_diag_assembles() {
        let a = sym(&[&[1.0, 2.0], &[2.0, 5.0]]);
        let b = sym(&[&[7.0]]);
        let d = block_diag(&[&a, &b]);
        assert_eq!(d.order(), 3);
        assert_eq!(d.get(0, 1), 2.0);
        assert_eq!(d.get(2, 2), 7.0);
        assert_eq!(d.get(0, 2), 0.0);
    }

    #[test]
    fn zero_diag_flags_nonzero_row() {
        let bad = sym(&[&[0.0, 1.0], &[1.0, 1.0]]);
        assert!(!zero_diag_implies_zero_line(&bad, 1e-12));
        let ok = sym(&[&[0.0, 0.0], &[0.0, 1.0]]);
        assert!(zero_diag_implies_zero_line(&ok, 1e-12));
    }

    fn random_sym(rng: &mut impl Rng, n: usize, scale: f64) -> SymMatrix {
        SymMatrix::from_fn(n, |_, _| rng.gen_range(-scale..scale))
    }

    fn random_psd(rng: &mut impl Rng, n: usize) -> SymMatrix {
        let l = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        SymMatrix::symmetrized(&(&l * l.transpose())).unwrap()
    }

    #[test]
    fn psd_characterization_by_blocks() {
        // M is PSD iff the leading block is PSD, the off-diagonal block lies
        // in its column space, and the Schur complement is PSD.
        let mut rng = ChaCha8Rng::seed_from_u64(214);
        let tol = 1e-8;
        for trial in 0..200 {
            let n = rng.gen_range(2..=8);
            let m = if trial % 2 == 0 {
                random_sym(&mut rng, n, 2.0)
            } else {
                random_psd(&mut rng, n)
            };
            let split = rng.gen_range(1..n);
            let a = m.principal_submatrix(&(0..split).collect::<Vec<_>>());
            let b = m.as_dmatrix().view((0, split), (split, n - split)).into_owned();
            let rhs = a.is_psd(tol)
                && column_space_contains(&a, &b, tol)
                && m.schur_complement(split, tol).unwrap().is_psd(tol);
            assert_eq!(
                m.is_psd(tol),
                rhs,
                "block characterization disagreed (trial {trial})"
            );
        }
    }

    #[test]
    fn pseudo_inverse_penrose_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let n = rng.gen_range(1..=7);
            let m = random_psd(&mut rng, n);
            let p = m.pseudo_inverse(1e-12);
            let mpm = m.as_dmatrix() * p.as_dmatrix() * m.as_dmatrix();
            let pmp = p.as_dmatrix() * m.as_dmatrix() * p.as_dmatrix();
            assert!((mpm - m.as_dmatrix()).norm() < 1e-8 * (1.0 + m.as_dmatrix().norm()));
            assert!((pmp - p.as_dmatrix()).norm() < 1e-8 * (1.0 + p.as_dmatrix().norm()));
        }
    }

    #[test]
    fn permutation_preserves_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let n = rng.gen_range(1..=6);
            let m = random_sym(&mut rng, n, 2.0);
            let mut sigma: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                let j = rng.gen_range(0..=i);
                sigma.swap(i, j);
            }
            let p = m.permute_congruent(&sigma).unwrap();
            let ev_m = m.eigenvalues();
            let ev_p = p.eigenvalues();
            for (a, b) in ev_m.iter().zip(&ev_p) {
                assert!((a - b).abs() < 1e-9 * (1.0 + m.inf_norm()));
            }
        }
    }
}
