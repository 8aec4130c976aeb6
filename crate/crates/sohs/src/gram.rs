//! Gram-like matrix representations of symmetric polynomials.
//!
//! A representation pairs a vector `W` of distinct monomials with a symmetric
//! matrix `G` of matching order; it expands to the polynomial
//! `sum_{i,j} G[i][j] * w_i* w_j`. A Gram-like matrix additionally has a
//! strictly positive diagonal. A polynomial is a sum of Hermitian squares
//! exactly when it admits a representation with `G` positive semidefinite,
//! and the squares can be read off from a spectral decomposition of `G`.

use crate::linalg::{LinalgError, SymMatrix};
use crate::ncpoly::{Polynomial, Word};
use std::collections::BTreeMap;

/// Errors from building representations or fitting matrices to polynomials.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GramError {
    #[error("monomial at position {index} repeats an earlier entry")]
    DuplicateMonomial { index: usize },
    #[error("{monomials} monomials but matrix of order {order}")]
    SizeMismatch { monomials: usize, order: usize },
    #[error("matrix construction failed: {0}")]
    Matrix(#[from] LinalgError),
    #[error("polynomial is not symmetric under the involution")]
    NotSymmetric,
    #[error("invalid monomial text `{0}`: {1}")]
    InvalidMonomial(String, crate::ncpoly::ParseError),
    #[error("word `{0}` is not a product of two monomial entries")]
    UnrepresentableWord(Word),
    #[error("word `{0}` can be distributed over several cells")]
    AmbiguousDistribution(Word),
    #[error("diagonal entry at position {index} is not strictly positive")]
    NonPositiveDiagonal { index: usize },
    #[error("matrix is not positive semidefinite within tolerance")]
    NotPsd,
}

/// An ordered list of pairwise distinct monomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialVector {
    words: Vec<Word>,
}

impl MonomialVector {
    pub fn new(words: Vec<Word>) -> Result<Self, GramError> {
        for (index, w) in words.iter().enumerate() {
            if words[..index].contains(w) {
                return Err(GramError::DuplicateMonomial { index });
            }
        }
        Ok(MonomialVector { words })
    }

    /// Convenience constructor parsing each entry as a monomial.
    pub fn parse(texts: &[&str]) -> Result<Self, GramError> {
        let mut words = Vec::with_capacity(texts.len());
        for t in texts {
            words.push(
                t.parse::<Word>()
                    .map_err(|e| GramError::InvalidMonomial(t.to_string(), e))?,
            );
        }
        MonomialVector::new(words)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn get(&self, i: usize) -> &Word {
        &self.words[i]
    }

    pub fn position(&self, w: &Word) -> Option<usize> {
        self.words.iter().position(|x| x == w)
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.position(w).is_some()
    }

    /// Largest entry degree; 0 when empty.
    pub fn max_degree(&self) -> usize {
        self.words.iter().map(Word::degree).max().unwrap_or(0)
    }
}

/// Every word of degree at most `d` in `n` variables, in deglex order.
/// The result has `1 + n + n^2 + ... + n^d` entries.
pub fn full_monomial_vector(d: usize, n: u32) -> MonomialVector {
    let mut words = vec![Word::one()];
    let mut layer = vec![Word::one()];
    for _ in 0..d {
        let mut next = Vec::with_capacity(layer.len() * n as usize);
        for w in &layer {
            for v in 1..=n {
                next.push(w.concat(&Word::var(v)));
            }
        }
        words.extend(next.iter().cloned());
        layer = next;
    }
    MonomialVector::new(words).expect("generated words are distinct")
}

/// A symmetric matrix indexed by a monomial vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    monomials: MonomialVector,
    matrix: SymMatrix,
}

impl Representation {
    pub fn new(monomials: MonomialVector, matrix: SymMatrix) -> Result<Self, GramError> {
        if monomials.len() != matrix.order() {
            return Err(GramError::SizeMismatch {
                monomials: monomials.len(),
                order: matrix.order(),
            });
        }
        Ok(Representation { monomials, matrix })
    }

    pub fn monomials(&self) -> &MonomialVector {
        &self.monomials
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }

    pub fn order(&self) -> usize {
        self.matrix.order()
    }

    /// The polynomial `sum_{i,j} G[i][j] * w_i* w_j`.
    pub fn expand(&self) -> Polynomial {
        let mut f = Polynomial::zero();
        let k = self.order();
        for i in 0..k {
            let left = self.monomials.get(i).involution();
            for j in 0..k {
                let c = self.matrix.get(i, j);
                if c != 0.0 {
                    f.add_term(c, left.concat(self.monomials.get(j)));
                }
            }
        }
        f
    }
}

/// A representation whose matrix has a strictly positive diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct GramLikeMatrix {
    inner: Representation,
}

impl GramLikeMatrix {
    pub fn new(inner: Representation) -> Result<Self, GramError> {
        for index in 0..inner.order() {
            if inner.matrix().get(index, index) <= 0.0 {
                return Err(GramError::NonPositiveDiagonal { index });
            }
        }
        Ok(GramLikeMatrix { inner })
    }

    pub fn representation(&self) -> &Representation {
        &self.inner
    }

    pub fn monomials(&self) -> &MonomialVector {
        self.inner.monomials()
    }

    pub fn matrix(&self) -> &SymMatrix {
        self.inner.matrix()
    }

    pub fn order(&self) -> usize {
        self.inner.order()
    }

    pub fn expand(&self) -> Polynomial {
        self.inner.expand()
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.inner.matrix().is_psd(tol)
    }
}

/// Whether `R` certifies `f` as a sum of Hermitian squares: the matrix is
/// PSD within `tol` and the expansion matches `f` coefficient-wise.
pub fn is_sohs_certificate(f: &Polynomial, r: &Representation, tol: f64) -> bool {
    r.matrix().is_psd(tol) && r.expand().approx_eq(f, tol)
}

/// Extracts Hermitian squares from a PSD representation: for each retained
/// eigenpair `(lambda, v)` the square root `g = sqrt(lambda) * v^T W`, so
/// that `sum_t g_t* g_t = expand(R)`. Eigenvalues at most `tol * lambda_max`
/// are dropped; a matrix with an eigenvalue below `-tol` is rejected.
pub fn sohs_witness(r: &Representation, tol: f64) -> Result<Vec<Polynomial>, GramError> {
    let k = r.order();
    if k == 0 {
        return Ok(Vec::new());
    }
    let eig = r.matrix().as_dmatrix().clone().symmetric_eigen();
    let lam_max = eig.eigenvalues.iter().fold(0.0f64, |a, &l| a.max(l));
    let mut squares = Vec::new();
    for (t, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam < -tol {
            return Err(GramError::NotPsd);
        }
        if lam <= tol * lam_max.max(1.0) || lam <= 0.0 {
            continue;
        }
        let s = lam.sqrt();
        let g = Polynomial::from_terms(
            (0..k).map(|i| (s * eig.eigenvectors[(i, t)], r.monomials().get(i).clone())),
        );
        squares.push(g);
    }
    Ok(squares)
}

/// How `fit_gram` distributes a coefficient that several cells could carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitPolicy {
    /// Error when a word has more than one candidate cell.
    Strict,
    /// Split the coefficient equally across candidate cells.
    Even,
    /// Put the whole coefficient on the deglex-smallest cell.
    First,
}

/// One matrix cell `(i, j)` with `i <= j`, together with how many times its
/// value feeds each word of the orbit it produces: a diagonal cell or a cell
/// whose off-diagonal word is symmetric feeds it twice per unit only in the
/// latter case.
#[derive(Debug, Clone, Copy)]
struct Cell {
    i: usize,
    j: usize,
    /// Multiplicity of the cell value in the coefficient of each orbit word.
    weight: f64,
}

/// Fits a symmetric matrix over `monomials` whose expansion is `f`.
///
/// Cells are grouped by the word orbit `{w, w*}` they produce; the policy
/// decides how each orbit coefficient is spread over its candidate cells.
/// Unused cells stay zero.
pub fn fit_gram(
    f: &Polynomial,
    monomials: &MonomialVector,
    policy: FitPolicy,
) -> Result<Representation, GramError> {
    if !f.is_symmetric() {
        return Err(GramError::NotSymmetric);
    }
    let k = monomials.len();

    // orbit key -> candidate cells, sorted by the deglex pair of their
    // monomials so `First` is deterministic
    let mut cells: BTreeMap<Word, Vec<Cell>> = BTreeMap::new();
    for i in 0..k {
        for j in i..k {
            let w = monomials.get(i).involution().concat(monomials.get(j));
            let mirror = w.involution();
            let key = if mirror < w { mirror.clone() } else { w.clone() };
            let weight = if i < j && w == mirror { 2.0 } else { 1.0 };
            cells.entry(key).or_default().push(Cell { i, j, weight });
        }
    }
    for list in cells.values_mut() {
        list.sort_by(|a, b| {
            let pa = ordered_pair(monomials, a);
            let pb = ordered_pair(monomials, b);
            pa.cmp(&pb)
        });
    }

    // one representative per orbit {w, w*}; f symmetric makes both
    // coefficients equal, so recording the smaller word once suffices
    let mut orbit_coeffs: BTreeMap<Word, f64> = BTreeMap::new();
    for (w, c) in f.terms() {
        let mirror = w.involution();
        let key = if mirror < *w { mirror } else { w.clone() };
        orbit_coeffs.entry(key).or_insert(c);
    }

    let mut matrix = SymMatrix::zeros(k);
    for (key, c) in &orbit_coeffs {
        let c = *c;
        let candidates = cells
            .get(key)
            .ok_or_else(|| GramError::UnrepresentableWord(key.clone()))?;
        match policy {
            FitPolicy::Strict if candidates.len() > 1 => {
                return Err(GramError::AmbiguousDistribution(key.clone()));
            }
            FitPolicy::Strict | FitPolicy::First => {
                let cell = candidates[0];
                matrix.set_sym(cell.i, cell.j, c / cell.weight);
            }
            FitPolicy::Even => {
                let share = c / candidates.len() as f64;
                for cell in candidates {
                    matrix.set_sym(cell.i, cell.j, share / cell.weight);
                }
            }
        }
    }

    Representation::new(monomials.clone(), matrix)
}

fn ordered_pair<'a>(monomials: &'a MonomialVector, cell: &Cell) -> (&'a Word, &'a Word) {
    let a = monomials.get(cell.i);
    let b = monomials.get(cell.j);
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Monomials that can appear in any PSD representation of `f`: the right
/// chips of each word and the reversals of the right chips of each reversed
/// word, kept up to degree `ceil(deg(f) / 2)`, deduplicated, deglex sorted.
pub fn candidate_monomials(f: &Polynomial) -> MonomialVector {
    let Some(deg) = f.degree() else {
        return MonomialVector::new(Vec::new()).expect("empty is distinct");
    };
    let cap = deg.div_ceil(2);
    let mut set = std::collections::BTreeSet::new();
    for w in f.support() {
        let star = w.involution();
        for i in 0..=w.degree() {
            let right = w.right_chip(i);
            if right.degree() <= cap {
                set.insert(right);
            }
            let left = star.right_chip(i).involution();
            if left.degree() <= cap {
                set.insert(left);
            }
        }
    }
    MonomialVector::new(set.into_iter().collect()).expect("set elements are distinct")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mv(texts: &[&str]) -> MonomialVector {
        MonomialVector::parse(texts).unwrap()
    }

    fn repr(texts: &[&str], rows: &[&[f64]]) -> Representation {
        let m = SymMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap();
        Representation::new(mv(texts), m).unwrap()
    }

    #[test]
    fn monomial_vector_rejects_duplicates() {
        let dup = MonomialVector::parse(&["x1", "x2", "x1"]);
        assert!(matches!(dup, Err(GramError::DuplicateMonomial { index: 2 })));
    }

    #[test]
    fn full_vector_sizes_and_order() {
        let w = full_monomial_vector(2, 2);
        assert_eq!(w.len(), 7);
        let texts: Vec<String> = w.words().iter().map(|x| x.to_string()).collect();
        assert_eq!(texts, ["1", "x1", "x2", "x1^2", "x1 x2", "x2 x1", "x2^2"]);
        assert_eq!(full_monomial_vector(0, 3).len(), 1);
        assert_eq!(full_monomial_vector(3, 1).len(), 4);
    }

    #[test]
    fn expand_five_by_five_fixture() {
        let r = repr(
            &["1", "x1", "x1 x2", "x2", "x2^2"],
            &[
                &[1.0, 1.0, 0.0, 0.0, 0.0],
                &[1.0, 1.0, 0.0, 0.0, 1.0],
                &[0.0, 0.0, 1.0, 0.0, 0.0],
                &[0.0, 0.0, 0.0, 2.0, 0.0],
                &[0.0, 1.0, 0.0, 0.0, 1.0],
            ],
        );
        let expected: Polynomial =
            "1 + 2 x1 + x1^2 + x1 x2^2 + 2 x2^2 + x2^2 x1 + x2 x1^2 x2 + x2^4"
                .parse()
                .unwrap();
        assert_eq!(r.expand(), expected);
    }

    #[test]
    fn expand_is_permutation_invariant() {
        let a = repr(&["x1", "x2"], &[&[1.0, 4.0], &[4.0, 16.0]]);
        let b = repr(&["x2", "x1"], &[&[16.0, 4.0], &[4.0, 1.0]]);
        assert_eq!(a.expand(), b.expand());
    }

    #[test]
    fn sohs_certificate_and_witness() {
        let f: Polynomial = "x1^2 + 4 x1 x2 + 4 x2 x1 + 16 x2^2".parse().unwrap();
        let r = repr(&["x1", "x2"], &[&[1.0, 4.0], &[4.0, 16.0]]);
        assert!(is_sohs_certificate(&f, &r, 1e-9));
        let squares = sohs_witness(&r, 1e-9).unwrap();
        assert_eq!(squares.len(), 1);
        let mut back = Polynomial::zero();
        for g in &squares {
            back = &back + &(&g.involution() * g);
        }
        assert!(back.approx_eq(&f, 1e-9));
    }

    #[test]
    fn witness_rejects_indefinite() {
        let r = repr(&["1", "x1"], &[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!(matches!(sohs_witness(&r, 1e-9), Err(GramError::NotPsd)));
        assert!(!is_sohs_certificate(&r.expand(), &r, 1e-9));
    }

    #[test]
    fn witness_of_zero_is_empty() {
        let r = repr(&["1", "x1"], &[&[0.0, 0.0], &[0.0, 0.0]]);
        assert_eq!(sohs_witness(&r, 1e-9).unwrap().len(), 0);
    }

    #[test]
    fn gram_like_requires_positive_diagonal() {
        let r = repr(&["1", "x1"], &[&[1.0, 0.0], &[0.0, 0.0]]);
        assert!(matches!(
            GramLikeMatrix::new(r),
            Err(GramError::NonPositiveDiagonal { index: 1 })
        ));
        let ok = repr(&["1", "x1"], &[&[1.0, 0.5], &[0.5, 2.0]]);
        assert!(GramLikeMatrix::new(ok).is_ok());
    }

    #[test]
    fn fit_gram_reproduces_textbook_matrix() {
        let f: Polynomial = "x1^2 + 4 x1 x2 + 4 x2 x1 + 16 x2^2".parse().unwrap();
        let r = fit_gram(&f, &mv(&["x1", "x2"]), FitPolicy::Strict).unwrap();
        assert_eq!(r.matrix().get(0, 0), 1.0);
        assert_eq!(r.matrix().get(0, 1), 4.0);
        assert_eq!(r.matrix().get(1, 1), 16.0);
        assert_eq!(r.expand(), f);
    }

    #[test]
    fn fit_gram_halves_symmetric_cross_words() {
        // x1 = 1* x1 produced by the (1, x1) cell from both sides
        let f: Polynomial = "2 x1".parse().unwrap();
        let r = fit_gram(&f, &mv(&["1", "x1"]), FitPolicy::Strict).unwrap();
        assert_eq!(r.matrix().get(0, 1), 1.0);
        assert_eq!(r.expand(), f);
    }

    #[test]
    fn fit_gram_policies_disagree_on_ambiguity() {
        // x1^2 is produced by both the (1, x1^2) and (x1, x1) cells
        let f: Polynomial = "x1^2".parse().unwrap();
        let w = mv(&["1", "x1", "x1^2"]);
        assert!(matches!(
            fit_gram(&f, &w, FitPolicy::Strict),
            Err(GramError::AmbiguousDistribution(_))
        ));
        let even = fit_gram(&f, &w, FitPolicy::Even).unwrap();
        assert_eq!(even.matrix().get(0, 2), 0.25);
        assert_eq!(even.matrix().get(1, 1), 0.5);
        assert!(even.expand().approx_eq(&f, 1e-12));
        let first = fit_gram(&f, &w, FitPolicy::First).unwrap();
        assert_eq!(first.matrix().get(0, 2), 0.5);
        assert_eq!(first.matrix().get(1, 1), 0.0);
        assert!(first.expand().approx_eq(&f, 1e-12));
    }

    #[test]
    fn fit_gram_rejects_unrepresentable_and_asymmetric() {
        let f: Polynomial = "x1 x2 x3".parse().unwrap();
        assert!(matches!(
            fit_gram(&(&f + &f.involution()), &mv(&["x1"]), FitPolicy::Even),
            Err(GramError::UnrepresentableWord(_))
        ));
        assert!(matches!(
            fit_gram(&f, &mv(&["x1"]), FitPolicy::Even),
            Err(GramError::NotSymmetric)
        ));
    }

    #[test]
    fn candidate_monomials_examples() {
        let f: Polynomial = "5".parse().unwrap();
        let c = candidate_monomials(&f);
        assert_eq!(c.len(), 1);
        assert!(c.get(0).is_one());

        let f: Polynomial = "x1^2 + 4 x1 x2 + 4 x2 x1 + 16 x2^2".parse().unwrap();
        let c = candidate_monomials(&f);
        let texts: Vec<String> = c.words().iter().map(|w| w.to_string()).collect();
        assert_eq!(texts, ["1", "x1", "x2"]);

        assert_eq!(candidate_monomials(&Polynomial::zero()).len(), 0);
    }

    #[test]
    fn candidate_monomials_support_refit() {
        let f: Polynomial = "1 + 2 x1 + x1^2 + x1 x2^2 + 2 x2^2 + x2^2 x1 + x2 x1^2 x2 + x2^4"
            .parse()
            .unwrap();
        let w = candidate_monomials(&f);
        let r = fit_gram(&f, &w, FitPolicy::Even).unwrap();
        assert!(r.expand().approx_eq(&f, 1e-12));
    }

    prop_compose! {
        fn arb_monomials()(words in prop::collection::btree_set(
            prop::collection::vec(1u32..=3, 0..=3), 1..=5)) -> MonomialVector {
            MonomialVector::new(
                words.into_iter().map(Word::from_letters).collect()
            ).unwrap()
        }
    }

    proptest! {
        #[test]
        fn prop_fit_after_expand_round_trips(
            w in arb_monomials(),
            seed in prop::collection::vec(-3i32..=3, 25)
        ) {
            let k = w.len();
            let m = SymMatrix::from_fn(k, |i, j| seed[(i * 5 + j) % 25] as f64);
            let f = Representation::new(w.clone(), m).unwrap().expand();
            let refit = fit_gram(&f, &w, FitPolicy::Even).unwrap();
            prop_assert!(refit.expand().approx_eq(&f, 1e-9));
        }

        #[test]
        fn prop_positive_diagonal_degree_law(
            w in arb_monomials(),
            seed in prop::collection::vec(-3i32..=3, 25),
            diag in prop::collection::vec(1u32..=4, 5)
        ) {
            let k = w.len();
            let m = SymMatrix::from_fn(k, |i, j| {
                if i == j { diag[i] as f64 } else { seed[(i * 5 + j) % 25] as f64 }
            });
            let f = Representation::new(w.clone(), m).unwrap().expand();
            prop_assert_eq!(f.degree(), Some(2 * w.max_degree()));
        }

        #[test]
        fn prop_witness_squares_sum_to_expansion(
            w in arb_monomials(),
            seed in prop::collection::vec(-2i32..=2, 25)
        ) {
            let k = w.len();
            let l = nalgebra::DMatrix::from_fn(k, k, |i, j| seed[(i * 5 + j) % 25] as f64);
            let g = SymMatrix::symmetrized(&(&l * l.transpose())).unwrap();
            let r = Representation::new(w, g).unwrap();
            let f = r.expand();
            let squares = sohs_witness(&r, 1e-9).unwrap();
            let mut back = Polynomial::zero();
            for s in &squares {
                back = &back + &(&s.involution() * s);
            }
            prop_assert!(back.approx_eq(&f, 1e-7));
        }
    }
}
