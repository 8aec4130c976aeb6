//! Extending a polynomial past a fixed certificate.
//!
//! Given `f = h + sum d_j delta_j` where `h` carries a PSD Gram-like matrix
//! `G_h` over monomials `z_1..z_k`, an extension seeks a polynomial
//! `f_tilde = f + (new terms)` with a PSD Gram-like matrix that contains
//! `G_h` as a principal submatrix. The pipeline here:
//!
//! 1. [`check_rc_conditions`]: each difference word must split as
//!    `involution(b) * g` with `b`, `g` not both among `z_1..z_k` - a
//!    necessary condition for the given certificate.
//! 2. [`build_partial_extension`]: place each difference coefficient at its
//!    chosen cell, producing a block pattern whose lower diagonal is free.
//! 3. [`PartialBlockMatrix::complete_diagonal`]: fill that diagonal so the
//!    Schur complement is diagonally dominant, hence the whole matrix PSD.
//!
//! [`block_extension`] instead builds an explicit extension with at most
//! `2r + 1` added terms, without needing the rc condition on the
//! differences themselves. A `Fail` verdict from the rc check refutes only
//! the representation that was supplied, not every representation of `h`.

use crate::gram::{GramError, GramLikeMatrix, MonomialVector, Representation};
use crate::linalg::{block_diag, column_space_contains, SymMatrix};
use crate::ncpoly::{Polynomial, Word};
use nalgebra::DMatrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExtensionError {
    #[error("certificate does not expand to the declared polynomial")]
    CertificateMismatch,
    #[error("certificate matrix is not positive semidefinite within tolerance")]
    CertificateNotPsd,
    #[error("not applicable: {reason}")]
    NotApplicable { reason: String },
    #[error("coupling block leaves the column space of the certificate block")]
    ColumnSpaceViolation,
    #[error("hypothesis violated: {clause}")]
    HypothesisViolated { clause: String },
    #[error("completed matrix failed its positive semidefiniteness verification")]
    VerificationFailed,
    #[error(transparent)]
    Gram(#[from] GramError),
}

/// An extension instance: `f`, its certified part `h` with Gram-like matrix
/// `R_h`, and the difference terms `f - h = sum d_j delta_j`.
#[derive(Debug, Clone)]
pub struct ExtensionProblem {
    f: Polynomial,
    h: Polynomial,
    r_h: GramLikeMatrix,
    deltas: Vec<(f64, Word)>,
}

impl ExtensionProblem {
    /// Validates `expand(R_h) = h` within `tol` and that the matrix is PSD,
    /// then records the difference terms in deglex order.
    pub fn new(
        f: Polynomial,
        h: Polynomial,
        r_h: GramLikeMatrix,
        tol: f64,
    ) -> Result<Self, ExtensionError> {
        if !r_h.expand().approx_eq(&h, tol) {
            return Err(ExtensionError::CertificateMismatch);
        }
        if !r_h.is_psd(tol.max(r_h.matrix().default_tol())) {
            return Err(ExtensionError::CertificateNotPsd);
        }
        let deltas = (&f - &h).terms().map(|(w, c)| (c, w.clone())).collect();
        Ok(ExtensionProblem { f, h, r_h, deltas })
    }

    pub fn f(&self) -> &Polynomial {
        &self.f
    }

    pub fn h(&self) -> &Polynomial {
        &self.h
    }

    pub fn certificate(&self) -> &GramLikeMatrix {
        &self.r_h
    }

    /// The raw difference terms `(d_j, delta_j)`, deglex ordered.
    pub fn deltas(&self) -> &[(f64, Word)] {
        &self.deltas
    }

    /// The difference terms with mirror words merged; see [`FusedDelta`].
    pub fn fused_deltas(&self, tol: f64) -> Result<Vec<FusedDelta>, ExtensionError> {
        fuse_difference(&self.f, &self.h, tol)
            .map_err(|clause| ExtensionError::NotApplicable { reason: clause })
    }
}

/// One placement unit of the difference `f - h`.
///
/// A cell holding value `v` at `(b, g)` contributes `v * (b* g + g* b)` to
/// the expansion, so a symmetric word receives twice its cell value and an
/// asymmetric word drags its mirror along. Fusing accounts for both: the
/// stored `value` is the number to write into the cell.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedDelta {
    /// Representative word (for a mirror pair present on both sides, the
    /// deglex-smaller one).
    pub word: Word,
    /// Cell value: the coefficient, halved when the word is symmetric.
    pub value: f64,
    /// Whether `word* == word`.
    pub symmetric: bool,
}

/// Merges the difference terms of `f - h` into placement units, rejecting
/// inputs no cell placement can serve: a word and its mirror carrying
/// different coefficients, or a mirror word that already occurs in `f` and
/// would be disturbed by the forced mirror contribution.
fn fuse_difference(f: &Polynomial, h: &Polynomial, tol: f64) -> Result<Vec<FusedDelta>, String> {
    let diff = f - h;
    let mut fused = Vec::new();
    for (w, c) in diff.terms() {
        if w.is_symmetric() {
            fused.push(FusedDelta {
                word: w.clone(),
                value: c / 2.0,
                symmetric: true,
            });
            continue;
        }
        let mirror = w.involution();
        let cm = diff.coeff(&mirror);
        if cm != 0.0 {
            if mirror < *w {
                // handled when the smaller word was visited
                continue;
            }
            if (c - cm).abs() > tol {
                return Err(format!(
                    "difference word `{w}` and its mirror carry different coefficients ({c} vs {cm})"
                ));
            }
            fused.push(FusedDelta {
                word: w.clone(),
                value: c,
                symmetric: false,
            });
        } else {
            if f.coeff(&mirror) != 0.0 {
                return Err(format!(
                    "mirror of difference word `{w}` already occurs in f and would be disturbed"
                ));
            }
            fused.push(FusedDelta {
                word: w.clone(),
                value: c,
                symmetric: false,
            });
        }
    }
    Ok(fused)
}

/// A chosen splitting `delta = involution(left) * right`.
#[derive(Debug, Clone, PartialEq)]
pub struct RcSplit {
    pub delta: Word,
    pub left: Word,
    pub right: Word,
}

/// Outcome of the rc condition check.
#[derive(Debug, Clone, PartialEq)]
pub enum RcConditions {
    /// Every difference word admits a split avoiding the certificate
    /// monomials; one chosen witness per word.
    Satisfied(Vec<RcSplit>),
    /// The words for which every split has both factors among the
    /// certificate monomials.
    Obstructed(Vec<Word>),
}

impl RcConditions {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, RcConditions::Satisfied(_))
    }
}

/// For each difference word, how many monomials outside `current` the split
/// would introduce.
fn new_monomials(current: &[Word], split: &(Word, Word)) -> usize {
    let (u, v) = split;
    let mut n = usize::from(!current.contains(u));
    if v != u && !current.contains(v) {
        n += 1;
    }
    n
}

/// Greedy split selection shared by the checker and the builder: admissible
/// splits avoid having both factors among the certificate monomials; among
/// them the one adding fewest new monomials wins, ties to the deglex-smaller
/// right factor. Chosen monomials accumulate so later words can reuse them.
fn choose_splits(zeta: &[Word], deltas: &[Word]) -> Result<Vec<RcSplit>, Vec<Word>> {
    let mut current: Vec<Word> = zeta.to_vec();
    let mut chosen = Vec::new();
    let mut obstructed = Vec::new();
    for delta in deltas {
        let splits = delta.rc_decompositions();
        let admissible: Vec<&(Word, Word)> = splits
            .iter()
            .filter(|(u, v)| !(zeta.contains(u) && zeta.contains(v)))
            .collect();
        let Some(best) = admissible.iter().min_by(|a, b| {
            new_monomials(&current, a)
                .cmp(&new_monomials(&current, b))
                .then_with(|| a.1.cmp(&b.1))
        }) else {
            obstructed.push(delta.clone());
            continue;
        };
        for w in [&best.0, &best.1] {
            if !current.contains(w) {
                current.push(w.clone());
            }
        }
        chosen.push(RcSplit {
            delta: delta.clone(),
            left: best.0.clone(),
            right: best.1.clone(),
        });
    }
    if obstructed.is_empty() {
        Ok(chosen)
    } else {
        Err(obstructed)
    }
}

/// Checks the necessary condition for extending past the given certificate:
/// every difference word `delta_j` must admit a decomposition
/// `involution(b) * g` with `b`, `g` not both among the certificate
/// monomials. Runs over all `deg + 1` decompositions of each word.
pub fn check_rc_conditions(p: &ExtensionProblem) -> RcConditions {
    let zeta = p.certificate().monomials().words();
    let deltas: Vec<Word> = p.deltas.iter().map(|(_, w)| w.clone()).collect();
    match choose_splits(zeta, &deltas) {
        Ok(chosen) => RcConditions::Satisfied(chosen),
        Err(obstructed) => RcConditions::Obstructed(obstructed),
    }
}

/// The block pattern of a candidate extension matrix: the certificate block
/// is fixed, the coupling block and the off-diagonal of the tail block are
/// placed, and only the tail diagonal is left open.
#[derive(Debug, Clone)]
pub struct PartialBlockMatrix {
    monomials: MonomialVector,
    gh: SymMatrix,
    /// `k x m` coupling block between certificate and tail monomials.
    cross: DMatrix<f64>,
    /// `m x m` tail block; the diagonal entries are meaningless placeholders.
    tail: DMatrix<f64>,
}

impl PartialBlockMatrix {
    /// Assembles a pattern directly from its blocks. The tail diagonal of
    /// `tail` is ignored.
    pub fn from_blocks(
        monomials: MonomialVector,
        gh: SymMatrix,
        cross: DMatrix<f64>,
        tail: DMatrix<f64>,
    ) -> Result<Self, ExtensionError> {
        let k = gh.order();
        let m = monomials.len().checked_sub(k).ok_or_else(|| {
            ExtensionError::NotApplicable {
                reason: "monomial vector shorter than the certificate block".into(),
            }
        })?;
        if cross.nrows() != k || cross.ncols() != m || tail.nrows() != m || tail.ncols() != m {
            return Err(ExtensionError::NotApplicable {
                reason: "block dimensions do not agree".into(),
            });
        }
        Ok(PartialBlockMatrix {
            monomials,
            gh,
            cross,
            tail,
        })
    }

    pub fn monomials(&self) -> &MonomialVector {
        &self.monomials
    }

    pub fn certificate_block(&self) -> &SymMatrix {
        &self.gh
    }

    pub fn coupling_block(&self) -> &DMatrix<f64> {
        &self.cross
    }

    /// Order of the full pattern.
    pub fn order(&self) -> usize {
        self.gh.order() + self.tail.nrows()
    }

    pub fn base_order(&self) -> usize {
        self.gh.order()
    }

    pub fn tail_order(&self) -> usize {
        self.tail.nrows()
    }

    /// Specified tail entry `(i, j)`, `i != j`.
    pub fn tail_off_diagonal(&self, i: usize, j: usize) -> f64 {
        assert!(i != j, "tail diagonal is unspecified");
        self.tail[(i, j)]
    }

    /// Fills the open tail diagonal so the result is PSD: with
    /// `P = cross^T G_h^+ cross`, each diagonal becomes
    /// `P_ii + sum_{j != i} |tail_ij - P_ij| + margin`, making the Schur
    /// complement of the certificate block diagonally dominant. Requires the
    /// coupling block to lie in the certificate block's column space.
    pub fn complete_diagonal(&self, margin: f64, tol: f64) -> Result<SymMatrix, ExtensionError> {
        assert!(margin >= 0.0, "margin must be non-negative");
        let k = self.gh.order();
        let m = self.tail.nrows();
        if m > 0 && !column_space_contains(&self.gh, &self.cross, tol) {
            return Err(ExtensionError::ColumnSpaceViolation);
        }
        let p = self.cross.transpose() * self.gh.pseudo_inverse(tol).as_dmatrix() * &self.cross;
        let n = k + m;
        let mut full = DMatrix::zeros(n, n);
        full.view_mut((0, 0), (k, k)).copy_from(self.gh.as_dmatrix());
        full.view_mut((0, k), (k, m)).copy_from(&self.cross);
        full.view_mut((k, 0), (m, k)).copy_from(&self.cross.transpose());
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    full[(k + i, k + j)] = self.tail[(i, j)];
                }
            }
            let dominance: f64 = (0..m)
                .filter(|&j| j != i)
                .map(|j| (self.tail[(i, j)] - p[(i, j)]).abs())
                .sum();
            full[(k + i, k + i)] = p[(i, i)] + dominance + margin;
        }
        let out = SymMatrix::symmetrized(&full).expect("assembled square");
        if !out.is_psd(tol.max(out.default_tol())) {
            return Err(ExtensionError::VerificationFailed);
        }
        Ok(out)
    }
}

/// Places the difference coefficients of an rc-checked problem into a block
/// pattern over `W_l = (certificate monomials, new split monomials)`. Every
/// fused difference occupies one off-certificate cell (and its mirror);
/// the tail diagonal stays open for [`PartialBlockMatrix::complete_diagonal`].
pub fn build_partial_extension(
    p: &ExtensionProblem,
    tol: f64,
) -> Result<PartialBlockMatrix, ExtensionError> {
    let fused = p.fused_deltas(tol)?;
    for d in &fused {
        if d
            .word
            .rc_decompositions()
            .iter()
            .any(|(u, v)| u == v)
        {
            return Err(ExtensionError::NotApplicable {
                reason: format!("difference word `{}` is a Hermitian square", d.word),
            });
        }
    }
    let zeta = p.certificate().monomials().words();
    let delta_words: Vec<Word> = fused.iter().map(|d| d.word.clone()).collect();
    let chosen = choose_splits(zeta, &delta_words).map_err(|obs| {
        let words: Vec<String> = obs.iter().map(|w| format!("`{w}`")).collect();
        ExtensionError::NotApplicable {
            reason: format!("rc condition fails for {}", words.join(", ")),
        }
    })?;

    let k = zeta.len();
    let mut extended: Vec<Word> = zeta.to_vec();
    for split in &chosen {
        for w in [&split.left, &split.right] {
            if !extended.contains(w) {
                extended.push(w.clone());
            }
        }
    }
    let m = extended.len() - k;
    let mut cross = DMatrix::zeros(k, m);
    let mut tail = DMatrix::zeros(m, m);
    let pos = |w: &Word| extended.iter().position(|x| x == w).expect("in W_l");
    for (d, split) in fused.iter().zip(&chosen) {
        let (a, b) = (pos(&split.left), pos(&split.right));
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        debug_assert!(hi >= k, "placement cell must leave the certificate block");
        debug_assert!(lo != hi, "Hermitian squares were rejected above");
        if lo < k {
            debug_assert_eq!(cross[(lo, hi - k)], 0.0);
            cross[(lo, hi - k)] = d.value;
        } else {
            debug_assert_eq!(tail[(lo - k, hi - k)], 0.0);
            tail[(lo - k, hi - k)] = d.value;
            tail[(hi - k, lo - k)] = d.value;
        }
    }
    let monomials = MonomialVector::new(extended)?;
    PartialBlockMatrix::from_blocks(
        monomials,
        p.certificate().matrix().clone(),
        cross,
        tail,
    )
}

/// Whether `r_ft` certifies `f_tilde` as an extension of `f` that keeps the
/// certificate `r_h`: (a) `f_tilde - f` is nonzero and touches no word of
/// `f`; (b) `r_ft` expands to `f_tilde` and is PSD; (c) `r_h`'s monomials
/// embed into `r_ft`'s with `r_h`'s matrix as the corresponding principal
/// submatrix (and `r_h` expands to `h`).
pub fn verify_gmpe(
    f_tilde: &Polynomial,
    f: &Polynomial,
    h: &Polynomial,
    r_h: &GramLikeMatrix,
    r_ft: &GramLikeMatrix,
    tol: f64,
) -> bool {
    let diff = f_tilde - f;
    if diff.is_zero() {
        return false;
    }
    if diff.support().any(|w| f.coeff(w) != 0.0) {
        return false;
    }
    if !r_ft.expand().approx_eq(f_tilde, tol) {
        return false;
    }
    if !r_ft.is_psd(tol.max(r_ft.matrix().default_tol())) {
        return false;
    }
    if !r_h.expand().approx_eq(h, tol) {
        return false;
    }
    let positions: Option<Vec<usize>> = r_h
        .monomials()
        .words()
        .iter()
        .map(|w| r_ft.monomials().position(w))
        .collect();
    let Some(positions) = positions else {
        return false;
    };
    for i in 0..positions.len() {
        for j in 0..positions.len() {
            let got = r_ft.matrix().get(positions[i], positions[j]);
            if (got - r_h.matrix().get(i, j)).abs() > tol {
                return false;
            }
        }
    }
    true
}

/// Explicit extension with at most `2r + 1` added terms: for
/// `f = h + sum a_j z_j` append the monomials `(1, z_1..z_r)` and the block
/// `[[sum d_j^2 + 1, d^T], [d, I_r]]` with `d_j = a_j` (or `a_j / 2` when
/// `z_j` is symmetric). The expansion adds each missing mirror, one
/// Hermitian square per difference word, and a constant.
pub fn block_extension(
    f: &Polynomial,
    h: &Polynomial,
    r_h: &GramLikeMatrix,
    tol: f64,
) -> Result<(Polynomial, GramLikeMatrix), ExtensionError> {
    let violated = |clause: &str| ExtensionError::HypothesisViolated {
        clause: clause.to_string(),
    };
    if !r_h.expand().approx_eq(h, tol) {
        return Err(violated("the certificate does not expand to h"));
    }
    if !r_h.is_psd(tol.max(r_h.matrix().default_tol())) {
        return Err(violated("the certificate matrix is not PSD"));
    }
    if f.coeff(&Word::one()) != 0.0 {
        return Err(violated("f has a constant term"));
    }
    let diff = f - h;
    if diff.coeff(&Word::one()) != 0.0 {
        return Err(violated("the difference f - h has a constant term"));
    }
    if r_h.monomials().contains(&Word::one()) {
        return Err(violated("the certificate monomials contain 1"));
    }
    if diff.support().any(|w| r_h.monomials().contains(w)) {
        return Err(violated(
            "a difference word occurs among the certificate monomials",
        ));
    }
    for eta in h.support() {
        for i in 0..=eta.degree() {
            let chip = eta.right_chip(i);
            if diff.coeff(&chip) != 0.0 {
                return Err(violated(
                    "a right chip of a monomial of h equals a difference word",
                ));
            }
        }
    }
    let fused = fuse_difference(f, h, tol)
        .map_err(|clause| ExtensionError::HypothesisViolated { clause })?;
    for d in &fused {
        if f.coeff(&d.word.involution().concat(&d.word)) != 0.0 {
            return Err(violated(
                "the Hermitian square of a difference word already occurs in f",
            ));
        }
    }

    let r = fused.len();
    let mut words = r_h.monomials().words().to_vec();
    words.push(Word::one());
    words.extend(fused.iter().map(|d| d.word.clone()));
    let monomials = MonomialVector::new(words)?;

    let square_sum: f64 = fused.iter().map(|d| d.value * d.value).sum();
    let mut tail = DMatrix::zeros(r + 1, r + 1);
    tail[(0, 0)] = square_sum + 1.0;
    for (j, d) in fused.iter().enumerate() {
        tail[(0, j + 1)] = d.value;
        tail[(j + 1, 0)] = d.value;
        tail[(j + 1, j + 1)] = 1.0;
    }
    let tail = SymMatrix::new(tail).expect("symmetric by construction");
    let full = block_diag(&[r_h.matrix(), &tail]);
    let result = GramLikeMatrix::new(Representation::new(monomials, full)?)?;
    Ok((result.expand(), result))
}

/// Whether two certificates can sit in one block-diagonal certificate: true
/// exactly when their monomial lists are disjoint. The assembled block
/// matrix then certifies `expand(R_h) + expand(R_g)`; it is an extension
/// certificate in the strict sense provided the two expansions also share
/// no words.
pub fn check_block_decomposable(r_h: &GramLikeMatrix, r_g: &GramLikeMatrix) -> bool {
    r_h.monomials()
        .words()
        .iter()
        .all(|w| !r_g.monomials().contains(w))
}

/// Searches for a bipartition of `r_ft`'s monomials into `(S, T)` such that
/// all cross entries vanish within `tol` and the principal block on `S`
/// expands to `h`. Returns the first such `S` (ascending index order), or
/// `None` when no block-diagonal arrangement certifies `h` separately.
pub fn block_diagonal_split(
    r_ft: &Representation,
    h: &Polynomial,
    tol: f64,
) -> Option<Vec<usize>> {
    let n = r_ft.order();
    if n == 0 {
        return None;
    }
    for mask in 1..(1u64 << n) - 1 {
        let s: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let t: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 0).collect();
        let cross_zero = s
            .iter()
            .all(|&i| t.iter().all(|&j| r_ft.matrix().get(i, j).abs() <= tol));
        if !cross_zero {
            continue;
        }
        let sub = Representation::new(
            MonomialVector::new(s.iter().map(|&i| r_ft.monomials().get(i).clone()).collect())
                .expect("subset of distinct words"),
            r_ft.matrix().principal_submatrix(&s),
        )
        .expect("orders agree");
        if sub.expand().approx_eq(h, tol) {
            return Some(s);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gram(texts: &[&str], rows: &[&[f64]]) -> GramLikeMatrix {
        let m = SymMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap();
        GramLikeMatrix::new(
            Representation::new(MonomialVector::parse(texts).unwrap(), m).unwrap(),
        )
        .unwrap()
    }

    fn poly(s: &str) -> Polynomial {
        s.parse().unwrap()
    }

    #[test]
    fn problem_construction_validates_certificate() {
        let r_h = gram(&["1", "x1"], &[&[5.0, 0.0], &[0.0, 1.0]]);
        let f = poly("x1^2 + x1 + 5");
        let h = poly("x1^2 + 5");
        let p = ExtensionProblem::new(f.clone(), h, r_h.clone(), 1e-9).unwrap();
        assert_eq!(p.deltas(), &[(1.0, "x1".parse().unwrap())]);
        let wrong = poly("x1^2");
        assert!(matches!(
            ExtensionProblem::new(f, wrong, r_h, 1e-9),
            Err(ExtensionError::CertificateMismatch)
        ));
    }

    #[test]
    fn rc_check_obstructed_for_single_variable() {
        // every split of x1 is (1, x1) or (x1, 1), both inside {1, x1}
        let r_h = gram(&["1", "x1"], &[&[5.0, 0.0], &[0.0, 1.0]]);
        let p = ExtensionProblem::new(poly("x1^2 + x1 + 5"), poly("x1^2 + 5"), r_h, 1e-9).unwrap();
        match check_rc_conditions(&p) {
            RcConditions::Obstructed(words) => {
                assert_eq!(words, vec!["x1".parse::<Word>().unwrap()]);
            }
            other => panic!("expected obstruction, got {other:?}"),
        }
        let delta: Word = "x1".parse().unwrap();
        for (u, v) in delta.rc_decompositions() {
            assert!(u.is_one() && v == delta || v.is_one() && u == delta);
        }
    }

    #[test]
    fn rc_check_vacuous_without_deltas() {
        let r_h = gram(&["x1"], &[&[1.0]]);
        let p = ExtensionProblem::new(poly("x1^2"), poly("x1^2"), r_h, 1e-9).unwrap();
        match check_rc_conditions(&p) {
            RcConditions::Satisfied(splits) => assert!(splits.is_empty()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rc_check_finds_admissible_split() {
        let r_h = gram(&["1", "x1"], &[&[1.0, 0.0], &[0.0, 1.0]]);
        let p = ExtensionProblem::new(
            poly("x1^2 + 1 + x1 x2"),
            poly("x1^2 + 1"),
            r_h,
            1e-9,
        )
        .unwrap();
        let RcConditions::Satisfied(splits) = check_rc_conditions(&p) else {
            panic!("expected success");
        };
        assert_eq!(splits.len(), 1);
        let s = &splits[0];
        assert_eq!(s.left.involution().concat(&s.right), s.delta);
        let zeta = ["1".parse::<Word>().unwrap(), "x1".parse().unwrap()];
        assert!(!(zeta.contains(&s.left) && zeta.contains(&s.right)));
    }

    #[test]
    fn build_places_minimal_new_monomials() {
        // f - h = 2 x1 x2 x3; the split (x1 | x2 x3) reuses x1 and adds one
        // monomial, beating the alternatives that add two
        let r_h = gram(&["x1"], &[&[1.0]]);
        let p = ExtensionProblem::new(
            poly("x1^2 + 2 x1 x2 x3"),
            poly("x1^2"),
            r_h,
            1e-9,
        )
        .unwrap();
        let pattern = build_partial_extension(&p, 1e-9).unwrap();
        let texts: Vec<String> = pattern
            .monomials()
            .words()
            .iter()
            .map(|w| w.to_string())
            .collect();
        assert_eq!(texts, ["x1", "x2 x3"]);
        assert_eq!(pattern.base_order(), 1);
        assert_eq!(pattern.tail_order(), 1);
        assert_eq!(pattern.coupling_block()[(0, 0)], 2.0);
    }

    #[test]
    fn build_on_empty_difference_is_trivial() {
        let r_h = gram(&["x1"], &[&[1.0]]);
        let p = ExtensionProblem::new(poly("x1^2"), poly("x1^2"), r_h, 1e-9).unwrap();
        let pattern = build_partial_extension(&p, 1e-9).unwrap();
        assert_eq!(pattern.tail_order(), 0);
        let full = pattern.complete_diagonal(1.0, 1e-9).unwrap();
        assert_eq!(full.order(), 1);
        assert_eq!(full.get(0, 0), 1.0);
    }

    #[test]
    fn build_rejects_hermitian_squares() {
        let r_h = gram(&["x1"], &[&[1.0]]);
        let p = ExtensionProblem::new(
            poly("x1^2 + x2 x1 x1 x2"),
            poly("x1^2"),
            r_h,
            1e-9,
        )
        .unwrap();
        assert!(matches!(
            build_partial_extension(&p, 1e-9),
            Err(ExtensionError::NotApplicable { .. })
        ));
    }

    #[test]
    fn symmetric_words_get_half_values() {
        // f - h = 2 x1 - 2 x2 over certificate monomials (x1, x2): the cells
        // against the shared new monomial 1 receive 1 and -1
        let r_h = gram(&["x1", "x2"], &[&[1.0, 1.0], &[1.0, 1.0]]);
        let f = poly("x1^2 + x2^2 + x1 x2 + x2 x1 + 2 x1 - 2 x2");
        let h = poly("x1^2 + x2^2 + x1 x2 + x2 x1");
        let p = ExtensionProblem::new(f, h, r_h, 1e-9).unwrap();
        let pattern = build_partial_extension(&p, 1e-9).unwrap();
        let texts: Vec<String> = pattern
            .monomials()
            .words()
            .iter()
            .map(|w| w.to_string())
            .collect();
        assert_eq!(texts, ["x1", "x2", "1"]);
        assert_eq!(pattern.coupling_block()[(0, 0)], 1.0);
        assert_eq!(pattern.coupling_block()[(1, 0)], -1.0);
        // the coupling column (1, -1) leaves the column space of the all-ones
        // certificate block, so no diagonal fill can rescue this pattern
        assert!(matches!(
            pattern.complete_diagonal(1.0, 1e-9),
            Err(ExtensionError::ColumnSpaceViolation)
        ));
    }

    #[test]
    fn complete_diagonal_formula_examples() {
        // identity certificate block, coupling (1,1): diagonal = 2 + 0 + 1
        let mv = MonomialVector::parse(&["x1", "x2", "1"]).unwrap();
        let pattern = PartialBlockMatrix::from_blocks(
            mv,
            SymMatrix::identity(2),
            DMatrix::from_column_slice(2, 1, &[1.0, 1.0]),
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        let full = pattern.complete_diagonal(1.0, 1e-9).unwrap();
        assert!((full.get(2, 2) - 3.0).abs() < 1e-12);
        assert!(full.is_psd(1e-9));

        // zero coupling: the tail diagonal is exactly the margin
        let mv = MonomialVector::parse(&["x1", "x2 x2", "x2 x3"]).unwrap();
        let pattern = PartialBlockMatrix::from_blocks(
            mv,
            SymMatrix::identity(1),
            DMatrix::zeros(1, 2),
            DMatrix::from_row_slice(2, 2, &[0.0, 0.25, 0.25, 0.0]),
        )
        .unwrap();
        let full = pattern.complete_diagonal(0.5, 1e-9).unwrap();
        assert_eq!(full.get(1, 1), 0.75);
        assert_eq!(full.get(2, 2), 0.75);
        assert!(full.is_psd(1e-9));
    }

    #[test]
    fn end_to_end_extension_certifies() {
        let r_h = gram(&["1", "x1"], &[&[1.0, 0.0], &[0.0, 1.0]]);
        let f = poly("x1^2 + 1 + x1 x2");
        let h = poly("x1^2 + 1");
        let p = ExtensionProblem::new(f.clone(), h.clone(), r_h.clone(), 1e-9).unwrap();
        let pattern = build_partial_extension(&p, 1e-9).unwrap();
        let full = pattern.complete_diagonal(1.0, 1e-9).unwrap();
        let r_ft = GramLikeMatrix::new(
            Representation::new(pattern.monomials().clone(), full).unwrap(),
        )
        .unwrap();
        let f_tilde = r_ft.expand();
        assert!(verify_gmpe(&f_tilde, &f, &h, &r_h, &r_ft, 1e-9));
    }

    #[test]
    fn verify_gmpe_textbook_certificate() {
        let r_h = gram(&["1", "x1"], &[&[1.0, 0.0], &[0.0, 1.0]]);
        let r_ft = gram(
            &["1", "x1", "x2"],
            &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 1.0], &[0.0, 1.0, 1.0]],
        );
        let f = poly("x1^2 + 1 + x1 x2");
        let h = poly("x1^2 + 1");
        let f_tilde = &f + &poly("x2 x1 + x2^2");
        assert!(verify_gmpe(&f_tilde, &f, &h, &r_h, &r_ft, 1e-9));
        // the trivial extension is rejected
        assert!(!verify_gmpe(&f, &f, &h, &r_h, &r_ft, 1e-9));
    }

    #[test]
    fn verify_gmpe_rejects_missing_principal_block() {
        // an extension by x1^4 is a sum of squares but cannot keep the
        // diagonal certificate: the fitted matrix couples 1 and x1
        let r_h = gram(&["1", "x1"], &[&[5.0, 0.0], &[0.0, 1.0]]);
        let f = poly("x1^2 + x1 + 5");
        let h = poly("x1^2 + 5");
        let f_tilde = &f + &poly("x1^4");
        let r_ft = gram(
            &["1", "x1", "x1^2"],
            &[&[5.0, 0.5, 0.0], &[0.5, 1.0, 0.0], &[0.0, 0.0, 1.0]],
        );
        assert!(r_ft.expand().approx_eq(&f_tilde, 1e-12));
        assert!(!verify_gmpe(&f_tilde, &f, &h, &r_h, &r_ft, 1e-9));
    }

    #[test]
    fn block_extension_matches_worked_example() {
        let r_h = gram(&["x1"], &[&[1.0]]);
        let f = poly("x1^2 + x1 x2");
        let h = poly("x1^2");
        let (f_tilde, r_ft) = block_extension(&f, &h, &r_h, 1e-9).unwrap();
        let texts: Vec<String> = r_ft
            .monomials()
            .words()
            .iter()
            .map(|w| w.to_string())
            .collect();
        assert_eq!(texts, ["x1", "1", "x1 x2"]);
        let expected = [
            [1.0, 0.0, 0.0],
            [0.0, 2.0, 1.0],
            [0.0, 1.0, 1.0],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(r_ft.matrix().get(i, j), expected[i][j]);
            }
        }
        assert_eq!(f_tilde, poly("x1^2 + x1 x2 + x2 x1 + x2 x1^2 x2 + 2"));
        assert!(verify_gmpe(&f_tilde, &f, &h, &r_h, &r_ft, 1e-9));
        // at most 2r + 1 = 3 added words
        assert!((&f_tilde - &f).num_terms() <= 3);
    }

    #[test]
    fn block_extension_empty_difference() {
        let r_h = gram(&["x1"], &[&[1.0]]);
        let f = poly("x1^2");
        let (f_tilde, r_ft) = block_extension(&f, &f, &r_h, 1e-9).unwrap();
        assert_eq!(f_tilde, poly("x1^2 + 1"));
        assert_eq!(r_ft.order(), 2);
        assert_eq!(r_ft.matrix().get(1, 1), 1.0);
    }

    #[test]
    fn block_extension_symmetric_difference_word() {
        let r_h = gram(&["x1"], &[&[1.0]]);
        let f = poly("x1^2 + 2 x1 x2 x1");
        let h = poly("x1^2");
        let (f_tilde, r_ft) = block_extension(&f, &h, &r_h, 1e-9).unwrap();
        // d = a/2 = 1; the square term and the constant 2 are appended
        assert_eq!(
            f_tilde,
            poly("x1^2 + 2 x1 x2 x1 + x1 x2 x1^2 x2 x1 + 2")
        );
        assert!(verify_gmpe(&f_tilde, &f, &h, &r_h, &r_ft, 1e-9));
    }

    #[test]
    fn block_extension_reports_violated_clause() {
        let r_h = gram(&["x1"], &[&[1.0]]);
        // chip of h's monomial x1^2 equals the difference word x1
        let err = block_extension(&poly("x1^2 + x1"), &poly("x1^2"), &r_h, 1e-9).unwrap_err();
        assert!(matches!(err, ExtensionError::HypothesisViolated { .. }));
        // constant terms are excluded
        let err =
            block_extension(&poly("x1^2 + 1"), &poly("x1^2"), &r_h, 1e-9).unwrap_err();
        assert!(matches!(err, ExtensionError::HypothesisViolated { .. }));
    }

    #[test]
    fn enlarged_corner_entries_stay_valid() {
        let r_h = gram(&["x1"], &[&[1.0]]);
        let f = poly("x1^2 + x1 x2");
        let h = poly("x1^2");
        let (_, r_ft) = block_extension(&f, &h, &r_h, 1e-9).unwrap();
        for corner in [2.5, 10.0, 1e6] {
            let mut m = r_ft.matrix().as_dmatrix().clone();
            m[(1, 1)] = corner;
            let bigger = GramLikeMatrix::new(
                Representation::new(
                    r_ft.monomials().clone(),
                    SymMatrix::new(m).unwrap(),
                )
                .unwrap(),
            )
            .unwrap();
            let f_tilde = bigger.expand();
            assert!(verify_gmpe(&f_tilde, &f, &h, &r_h, &bigger, 1e-9));
        }
    }

    #[test]
    fn block_decomposability_is_list_disjointness() {
        let r_h = gram(&["1", "x1"], &[&[1.0, 0.0], &[0.0, 1.0]]);
        let r_g = gram(&["x2"], &[&[1.0]]);
        assert!(check_block_decomposable(&r_h, &r_g));
        let shared = gram(&["x1"], &[&[1.0]]);
        assert!(!check_block_decomposable(&r_h, &shared));

        // disjoint lists assemble into a verified extension certificate
        let h = r_h.expand();
        let g = r_g.expand();
        let assembled = GramLikeMatrix::new(
            Representation::new(
                MonomialVector::parse(&["1", "x1", "x2"]).unwrap(),
                block_diag(&[r_h.matrix(), r_g.matrix()]),
            )
            .unwrap(),
        )
        .unwrap();
        let f_tilde = &h + &g;
        assert!(verify_gmpe(&f_tilde, &h, &h, &r_h, &assembled, 1e-9));
    }

    #[test]
    fn no_block_split_when_monomial_shared_across_parts() {
        let r_ft = gram(
            &["1", "x1", "x2"],
            &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 1.0], &[0.0, 1.0, 1.0]],
        );
        let h = poly("x1^2 + 1");
        assert_eq!(block_diagonal_split(r_ft.representation(), &h, 1e-9), None);

        // a genuinely decomposable certificate is found
        let dec = gram(
            &["1", "x1", "x2"],
            &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]],
        );
        let s = block_diagonal_split(dec.representation(), &h, 1e-9).unwrap();
        assert_eq!(s, vec![0, 1]);
    }

    #[test]
    fn diagonal_completion_psd_on_random_consistent_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let k = rng.gen_range(1..=3);
            let m = rng.gen_range(1..=3);
            let l = DMatrix::from_fn(k, k, |_, _| rng.gen_range(-1.0..1.0));
            let gh = SymMatrix::symmetrized(&(&l * l.transpose())).unwrap();
            // coupling inside the column space by construction
            let r = DMatrix::from_fn(k, m, |_, _| rng.gen_range(-1.0..1.0));
            let cross = gh.as_dmatrix() * r;
            let mut tail = DMatrix::zeros(m, m);
            for i in 0..m {
                for j in i + 1..m {
                    let v = rng.gen_range(-1.0..1.0);
                    tail[(i, j)] = v;
                    tail[(j, i)] = v;
                }
            }
            let words: Vec<Word> = (0..k + m).map(|i| Word::var(i as u32 + 1)).collect();
            let pattern = PartialBlockMatrix::from_blocks(
                MonomialVector::new(words).unwrap(),
                gh.clone(),
                cross.clone(),
                tail.clone(),
            )
            .unwrap();
            for margin in [0.25, 1.0, 4.0] {
                let full = pattern.complete_diagonal(margin, 1e-9).unwrap();
                assert!(full.is_psd(1e-8));
                for i in 0..k {
                    for j in 0..k {
                        assert_eq!(full.get(i, j), gh.get(i, j));
                    }
                    for j in 0..m {
                        assert_eq!(full.get(i, k + j), cross[(i, j)]);
                    }
                }
                for i in 0..m {
                    for j in 0..m {
                        if i != j {
                            assert_eq!(full.get(k + i, k + j), tail[(i, j)]);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn random_block_extensions_verify() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut built = 0;
        for _ in 0..200 {
            let k = rng.gen_range(1..=3);
            let words: Vec<Word> = (0..k)
                .map(|_| {
                    let len = rng.gen_range(1..=2);
                    Word::from_letters((0..len).map(|_| rng.gen_range(1..=2u32)))
                })
                .collect();
            let mut distinct = Vec::new();
            for w in words {
                if !distinct.contains(&w) {
                    distinct.push(w);
                }
            }
            let kk = distinct.len();
            let l = DMatrix::from_fn(kk, kk, |_, _| rng.gen_range(-1.0..1.0));
            let mut g = &l * l.transpose();
            for i in 0..kk {
                g[(i, i)] += 0.1;
            }
            let r_h = GramLikeMatrix::new(
                Representation::new(
                    MonomialVector::new(distinct).unwrap(),
                    SymMatrix::symmetrized(&g).unwrap(),
                )
                .unwrap(),
            )
            .unwrap();
            let h = r_h.expand();
            // difference words use a fresh variable, so the hypotheses hold
            let r = rng.gen_range(1..=3);
            let mut diff = Polynomial::zero();
            for _ in 0..r {
                let len = rng.gen_range(1..=3);
                let mut letters: Vec<u32> = (0..len).map(|_| rng.gen_range(1..=3u32)).collect();
                letters.push(9);
                let mut c = rng.gen_range(-4i32..=4) as f64;
                if c == 0.0 {
                    c = 1.0;
                }
                diff.add_term(c, Word::from_letters(letters));
            }
            let f = &h + &diff;
            let raw = diff.num_terms();
            match block_extension(&f, &h, &r_h, 1e-9) {
                Ok((f_tilde, r_ft)) => {
                    built += 1;
                    assert!(verify_gmpe(&f_tilde, &f, &h, &r_h, &r_ft, 1e-7));
                    assert!((&f_tilde - &f).num_terms() <= 2 * raw + 1);
                }
                Err(ExtensionError::HypothesisViolated { .. }) => {}
                Err(e) => panic!("unexpected error {e}"),
            }
        }
        assert!(built >= 150, "only {built} random extensions built");
    }
}
