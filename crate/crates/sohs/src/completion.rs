//! Partial symmetric matrices and their PSD completions.
//!
//! A partial symmetric matrix specifies its diagonal and a symmetric subset
//! of off-diagonal entries. The specified pairs form the *specification
//! graph*; when that graph is chordal, every partial PSD matrix (one whose
//! fully specified principal submatrices are all PSD) admits a PSD
//! completion, built here one entry at a time. Non-chordal patterns are
//! attempted anyway through a max-determinant ascent - they may complete or
//! fail, and a failure verdict applies to the instance, not the pattern.
//!
//! The same machinery lifts to polynomials: a partial Gram-like matrix whose
//! specified blocks are PSD can be completed to a full certificate, turning
//! a family of certified pieces into one sum-of-Hermitian-squares witness.

use crate::gram::{GramError, GramLikeMatrix, MonomialVector, Representation};
use crate::linalg::SymMatrix;
use crate::ncpoly::Polynomial;
use nalgebra::{DMatrix, DVector};

/// Diagonal padding for the max-determinant fallback.
const FALLBACK_EPSILON: f64 = 1e-6;
/// Sweep-to-sweep movement threshold ending the fallback ascent.
const FALLBACK_MOVEMENT: f64 = 1e-10;
/// Tolerance for the final PSD verification after the fallback.
const FALLBACK_TOL: f64 = 1e-6;
const MAX_SWEEPS: usize = 20_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompletionError {
    #[error("matrix rows are ragged or not square")]
    NotSquare,
    #[error("entry ({i}, {j}) is specified but ({j}, {i}) is not")]
    AsymmetricMask { i: usize, j: usize },
    #[error("specified entries at ({i}, {j}) and ({j}, {i}) differ")]
    AsymmetricValues { i: usize, j: usize },
    #[error("diagonal entry {i} is unspecified")]
    UnspecifiedDiagonal { i: usize },
    #[error("diagonal entry {index} is not strictly positive")]
    NonPositiveDiagonal { index: usize },
    #[error("monomial count {monomials} does not match matrix order {order}")]
    OrderMismatch { monomials: usize, order: usize },
    #[error("matrix is not partial PSD: the principal submatrix on {indices:?} fails")]
    NotPartialPsd { indices: Vec<usize> },
    #[error("no PSD completion found: the principal submatrix on {indices:?} stays negative")]
    CompletionFailed { indices: Vec<usize> },
    #[error(transparent)]
    Gram(#[from] GramError),
}

/// A symmetric matrix with some off-diagonal entries unspecified. The
/// specification mask is symmetric and the diagonal is always specified.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialSymMatrix {
    k: usize,
    data: Vec<Option<f64>>,
}

impl PartialSymMatrix {
    pub fn new(rows: Vec<Vec<Option<f64>>>) -> Result<Self, CompletionError> {
        let k = rows.len();
        if rows.iter().any(|r| r.len() != k) {
            return Err(CompletionError::NotSquare);
        }
        for i in 0..k {
            if rows[i][i].is_none() {
                return Err(CompletionError::UnspecifiedDiagonal { i });
            }
            for j in i + 1..k {
                match (rows[i][j], rows[j][i]) {
                    (Some(a), Some(b)) if a != b => {
                        return Err(CompletionError::AsymmetricValues { i, j });
                    }
                    (Some(_), None) => {
                        return Err(CompletionError::AsymmetricMask { i, j });
                    }
                    (None, Some(_)) => {
                        return Err(CompletionError::AsymmetricMask { i: j, j: i });
                    }
                    _ => {}
                }
            }
        }
        let data = rows.into_iter().flatten().collect();
        Ok(PartialSymMatrix { k, data })
    }

    /// Fully specified partial matrix with the entries of `m`.
    pub fn from_sym(m: &SymMatrix) -> Self {
        let k = m.order();
        let data = (0..k)
            .flat_map(|i| (0..k).map(move |j| Some(m.get(i, j))))
            .collect();
        PartialSymMatrix { k, data }
    }

    /// Keeps the diagonal of `m` and exactly the off-diagonal entries whose
    /// index pairs are edges of `pattern`.
    pub fn masked(m: &SymMatrix, pattern: &SpecGraph) -> Self {
        assert_eq!(m.order(), pattern.order(), "pattern order mismatch");
        let k = m.order();
        let data = (0..k)
            .flat_map(|i| {
                (0..k).map(move |j| {
                    (i == j || pattern.has_edge(i, j)).then(|| m.get(i, j))
                })
            })
            .collect();
        PartialSymMatrix { k, data }
    }

    pub fn order(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.data[i * self.k + j]
    }

    pub fn is_specified(&self, i: usize, j: usize) -> bool {
        self.get(i, j).is_some()
    }

    /// Unspecified index pairs `(i, j)` with `i < j`, row-major order.
    pub fn unspecified_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.k {
            for j in i + 1..self.k {
                if !self.is_specified(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// The principal submatrix on `indices` when every entry is specified.
    pub fn fully_specified_submatrix(&self, indices: &[usize]) -> Option<SymMatrix> {
        let n = indices.len();
        let mut m = DMatrix::zeros(n, n);
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate() {
                m[(a, b)] = self.get(i, j)?;
            }
        }
        Some(SymMatrix::new(m).expect("symmetric by construction"))
    }
}

/// Simple loop-free graph on `{0, .., k-1}` recording which off-diagonal
/// entries of a partial matrix are specified.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecGraph {
    adj: Vec<Vec<bool>>,
}

impl SpecGraph {
    pub fn new(order: usize) -> Self {
        SpecGraph {
            adj: vec![vec![false; order]; order],
        }
    }

    pub fn with_edges(order: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = SpecGraph::new(order);
        for &(i, j) in edges {
            g.add_edge(i, j);
        }
        g
    }

    pub fn complete(order: usize) -> Self {
        let mut g = SpecGraph::new(order);
        for i in 0..order {
            for j in i + 1..order {
                g.add_edge(i, j);
            }
        }
        g
    }

    pub fn add_edge(&mut self, i: usize, j: usize) {
        assert!(i != j, "loops are not allowed");
        self.adj[i][j] = true;
        self.adj[j][i] = true;
    }

    pub fn order(&self) -> usize {
        self.adj.len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i][j]
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.order()).filter(|&u| self.adj[v][u]).collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].iter().filter(|&&b| b).count()
    }

    /// Edges as pairs `(i, j)` with `i < j`, row-major order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.order() {
            for j in i + 1..self.order() {
                if self.adj[i][j] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    pub fn complement(&self) -> SpecGraph {
        let n = self.order();
        let mut g = SpecGraph::new(n);
        for i in 0..n {
            for j in i + 1..n {
                if !self.adj[i][j] {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }
}

/// The graph with an edge for every specified off-diagonal pair.
pub fn specification_graph(p: &PartialSymMatrix) -> SpecGraph {
    let mut g = SpecGraph::new(p.order());
    for i in 0..p.order() {
        for j in i + 1..p.order() {
            if p.is_specified(i, j) {
                g.add_edge(i, j);
            }
        }
    }
    g
}

/// Verdict of the chordality test.
#[derive(Debug, Clone, PartialEq)]
pub enum Chordality {
    /// A perfect elimination ordering.
    Chordal(Vec<usize>),
    /// An induced cycle of length at least 4, listed in cyclic order.
    NotChordal(Vec<usize>),
}

impl Chordality {
    pub fn is_chordal(&self) -> bool {
        matches!(self, Chordality::Chordal(_))
    }
}

/// Maximum cardinality search followed by perfect-elimination verification.
/// A failing order yields a concrete chordless cycle as the obstruction.
pub fn is_chordal(g: &SpecGraph) -> Chordality {
    let n = g.order();
    let mut weight = vec![0usize; n];
    let mut numbered = vec![false; n];
    let mut visit = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !numbered[v])
            .max_by_key(|&v| weight[v])
            .expect("unnumbered vertex remains");
        numbered[v] = true;
        visit.push(v);
        for u in g.neighbors(v) {
            if !numbered[u] {
                weight[u] += 1;
            }
        }
    }
    let elim: Vec<usize> = visit.into_iter().rev().collect();
    let mut pos = vec![0usize; n];
    for (idx, &v) in elim.iter().enumerate() {
        pos[v] = idx;
    }
    for &v in &elim {
        let later: Vec<usize> = g
            .neighbors(v)
            .into_iter()
            .filter(|&u| pos[u] > pos[v])
            .collect();
        let Some(&u) = later.iter().min_by_key(|&&u| pos[u]) else {
            continue;
        };
        for &w in &later {
            if w != u && !g.has_edge(u, w) {
                let cycle = find_chordless_cycle(g)
                    .expect("failed elimination order implies an induced cycle");
                return Chordality::NotChordal(cycle);
            }
        }
    }
    Chordality::Chordal(elim)
}

/// Finds an induced cycle of length >= 4 if one exists: for a path `u-v-w`
/// with `u`, `w` non-adjacent, a shortest `u`-`w` path avoiding the rest of
/// `v`'s closed neighborhood closes into a chordless cycle through `v`.
fn find_chordless_cycle(g: &SpecGraph) -> Option<Vec<usize>> {
    let n = g.order();
    for v in 0..n {
        let nb = g.neighbors(v);
        for (a, &u) in nb.iter().enumerate() {
            for &w in &nb[a + 1..] {
                if g.has_edge(u, w) {
                    continue;
                }
                let mut allowed = vec![true; n];
                allowed[v] = false;
                for &x in &nb {
                    if x != u && x != w {
                        allowed[x] = false;
                    }
                }
                if let Some(path) = shortest_path(g, u, w, &allowed) {
                    let mut cycle = vec![v];
                    cycle.extend(path);
                    return Some(cycle);
                }
            }
        }
    }
    None
}

fn shortest_path(g: &SpecGraph, from: usize, to: usize, allowed: &[bool]) -> Option<Vec<usize>> {
    let n = g.order();
    let mut prev = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::new();
    seen[from] = true;
    queue.push_back(from);
    while let Some(x) = queue.pop_front() {
        if x == to {
            let mut path = vec![to];
            let mut cur = to;
            while cur != from {
                cur = prev[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for y in g.neighbors(x) {
            if allowed[y] && !seen[y] {
                seen[y] = true;
                prev[y] = x;
                queue.push_back(y);
            }
        }
    }
    None
}

/// All maximal cliques, each sorted ascending, listed in lexicographic
/// order. Bron-Kerbosch with pivoting.
pub fn maximal_cliques(g: &SpecGraph) -> Vec<Vec<usize>> {
    fn bk(
        g: &SpecGraph,
        r: &mut Vec<usize>,
        mut p: Vec<usize>,
        mut x: Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if p.is_empty() && x.is_empty() {
            if !r.is_empty() {
                let mut clique = r.clone();
                clique.sort_unstable();
                out.push(clique);
            }
            return;
        }
        let pivot = p
            .iter()
            .chain(x.iter())
            .copied()
            .max_by_key(|&u| p.iter().filter(|&&v| g.has_edge(u, v)).count())
            .expect("p or x non-empty");
        let candidates: Vec<usize> = p
            .iter()
            .copied()
            .filter(|&v| !g.has_edge(pivot, v))
            .collect();
        for v in candidates {
            r.push(v);
            let np = p.iter().copied().filter(|&u| g.has_edge(v, u)).collect();
            let nx = x.iter().copied().filter(|&u| g.has_edge(v, u)).collect();
            bk(g, r, np, nx, out);
            r.pop();
            p.retain(|&u| u != v);
            x.push(v);
        }
    }
    let mut out = Vec::new();
    bk(
        g,
        &mut Vec::new(),
        (0..g.order()).collect(),
        Vec::new(),
        &mut out,
    );
    out.sort();
    out
}

/// Whether every fully specified principal submatrix is PSD. It suffices to
/// check the maximal cliques of the specification graph: any fully
/// specified index set spans a clique, and principal submatrices of PSD
/// matrices are PSD.
pub fn is_partial_psd(p: &PartialSymMatrix, tol: f64) -> bool {
    violated_specified_minor(p, tol).is_none()
}

/// A fully specified principal submatrix violating PSD-ness, shrunk to the
/// smallest failing subset of its clique.
fn violated_specified_minor(p: &PartialSymMatrix, tol: f64) -> Option<Vec<usize>> {
    let g = specification_graph(p);
    for clique in maximal_cliques(&g) {
        let m = p
            .fully_specified_submatrix(&clique)
            .expect("cliques are fully specified");
        if !m.is_psd(tol.max(m.default_tol())) {
            return Some(minimal_violation(&m, &clique, tol));
        }
    }
    None
}

/// Smallest subset of `indices` (by size, then bitmask order) whose
/// principal submatrix of `m` fails PSD-ness.
fn minimal_violation(m: &SymMatrix, indices: &[usize], tol: f64) -> Vec<usize> {
    let n = indices.len();
    let mut masks: Vec<u32> = (1..1u32 << n).collect();
    masks.sort_by_key(|mask| (mask.count_ones(), *mask));
    for mask in masks {
        let local: Vec<usize> = (0..n).filter(|a| mask >> a & 1 == 1).collect();
        let sub = m.principal_submatrix(&local);
        if !sub.is_psd(tol.max(sub.default_tol())) {
            return local.into_iter().map(|a| indices[a]).collect();
        }
    }
    indices.to_vec()
}

/// State of an in-progress completion: the working matrix plus the set of
/// pairs already fixed.
struct Working {
    m: DMatrix<f64>,
    specified: SpecGraph,
}

impl Working {
    fn submatrix(&self, indices: &[usize]) -> SymMatrix {
        let n = indices.len();
        let mut s = DMatrix::zeros(n, n);
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate() {
                s[(a, b)] = self.m[(i, j)];
            }
        }
        SymMatrix::new(s).expect("symmetric by construction")
    }
}

/// Completes a partial PSD matrix to a full PSD matrix.
///
/// For a chordal specification graph the completion is built one entry at a
/// time: pick an unspecified pair `{i, j}` whose insertion keeps the graph
/// chordal and whose local submatrix on `{i} + (N(i) & N(j)) + {j}` is fully
/// specified except at `(i, j)`, and fill the determinant-maximizing value
/// `x* = b^T A^+ c`. If no pair qualifies (or the graph is not chordal), an
/// epsilon-regularized max-determinant coordinate ascent runs instead, and
/// its result is verified. Specified entries always carry over exactly.
pub fn psd_complete(p: &PartialSymMatrix, tol: f64) -> Result<SymMatrix, CompletionError> {
    if let Some(indices) = violated_specified_minor(p, tol) {
        return Err(CompletionError::NotPartialPsd { indices });
    }
    let k = p.order();
    let mut w = Working {
        m: DMatrix::from_fn(k, k, |i, j| p.get(i, j).unwrap_or(0.0)),
        specified: specification_graph(p),
    };
    let mut remaining = p.unspecified_pairs();
    if is_chordal(&w.specified).is_chordal() {
        'fill: while !remaining.is_empty() {
            let mut candidate = None;
            for (slot, &(i, j)) in remaining.iter().enumerate() {
                let mut grown = w.specified.clone();
                grown.add_edge(i, j);
                if !is_chordal(&grown).is_chordal() {
                    continue;
                }
                let shared: Vec<usize> = w
                    .specified
                    .neighbors(i)
                    .into_iter()
                    .filter(|&u| w.specified.has_edge(u, j))
                    .collect();
                let local_ok = shared.iter().all(|&a| {
                    shared
                        .iter()
                        .all(|&b| a == b || w.specified.has_edge(a, b))
                });
                if local_ok {
                    candidate = Some((slot, i, j, shared, grown));
                    break;
                }
            }
            let Some((slot, i, j, shared, grown)) = candidate else {
                break;
            };
            let b = DVector::from_fn(shared.len(), |r, _| w.m[(shared[r], i)]);
            let c = DVector::from_fn(shared.len(), |r, _| w.m[(shared[r], j)]);
            let a = w.submatrix(&shared);
            let x = (b.transpose() * a.pseudo_inverse(tol).as_dmatrix() * c)[(0, 0)];
            w.m[(i, j)] = x;
            w.m[(j, i)] = x;
            w.specified = grown;
            let mut local = vec![i];
            local.extend(&shared);
            local.push(j);
            local.sort_unstable();
            let filled = w.submatrix(&local);
            if !filled.is_psd(tol.max(filled.default_tol())) {
                // boundary instances can defeat the step-by-step fill; fall
                // through to the global ascent
                break 'fill;
            }
            remaining.remove(slot);
        }
    }
    if remaining.is_empty() && specified_entries_kept(p, &w.m) {
        let out = SymMatrix::symmetrized(&w.m).expect("square");
        if out.is_psd(tol.max(out.default_tol())) {
            return Ok(out);
        }
    }
    max_det_fallback(p, tol)
}

fn specified_entries_kept(p: &PartialSymMatrix, m: &DMatrix<f64>) -> bool {
    (0..p.order()).all(|i| {
        (0..p.order()).all(|j| p.get(i, j).map_or(true, |v| m[(i, j)] == v))
    })
}

/// Epsilon-regularized max-determinant coordinate ascent over all
/// unspecified entries. Each update maximizes the determinant as a
/// quadratic in one symmetric pair of entries. The padding is removed
/// before the final verification.
fn max_det_fallback(p: &PartialSymMatrix, tol: f64) -> Result<SymMatrix, CompletionError> {
    let k = p.order();
    let pairs = p.unspecified_pairs();
    let mut m = DMatrix::from_fn(k, k, |i, j| p.get(i, j).unwrap_or(0.0));
    // seed each open entry by propagating through a common specified
    // neighbor - the rank-one value that boundary completions force; a zero
    // seed can strand the ascent at a spurious determinant maximum
    for &(i, j) in &pairs {
        let seed = (0..k).find_map(|s| {
            if s == i || s == j {
                return None;
            }
            let a = p.get(i, s)?;
            let b = p.get(s, j)?;
            let d = p.get(s, s).expect("diagonal specified");
            (d > 0.0).then(|| a * b / d)
        });
        if let Some(x) = seed {
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    for i in 0..k {
        m[(i, i)] += FALLBACK_EPSILON;
    }
    for _ in 0..MAX_SWEEPS {
        let mut movement = 0.0f64;
        for &(i, j) in &pairs {
            let old = m[(i, j)];
            let keep: Vec<usize> = (0..k).filter(|&v| v != i && v != j).collect();
            let minor = DMatrix::from_fn(keep.len(), keep.len(), |a, b| {
                m[(keep[a], keep[b])]
            });
            let alpha = -minor.determinant();
            if alpha >= 0.0 {
                continue;
            }
            let gamma = {
                let mut t = m.clone();
                t[(i, j)] = 0.0;
                t[(j, i)] = 0.0;
                t.determinant()
            };
            let beta = {
                let mut t = m.clone();
                t[(i, j)] = 1.0;
                t[(j, i)] = 1.0;
                t.determinant() - alpha - gamma
            };
            let x = -beta / (2.0 * alpha);
            m[(i, j)] = x;
            m[(j, i)] = x;
            movement = movement.max((x - old).abs());
        }
        if movement < FALLBACK_MOVEMENT {
            break;
        }
    }
    for i in 0..k {
        m[(i, i)] = p.get(i, i).expect("diagonal specified");
    }
    let out = SymMatrix::symmetrized(&m).expect("square");
    if out.is_psd(FALLBACK_TOL.max(tol)) {
        Ok(out)
    } else {
        let all: Vec<usize> = (0..k).collect();
        let indices = minimal_violation(&out, &all, FALLBACK_TOL.max(tol));
        Err(CompletionError::CompletionFailed { indices })
    }
}

/// A Gram-like matrix with unspecified off-diagonal entries: the certified
/// blocks are pinned, the rest is open for completion.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialRepresentation {
    monomials: MonomialVector,
    pmatrix: PartialSymMatrix,
}

impl PartialRepresentation {
    pub fn new(
        monomials: MonomialVector,
        pmatrix: PartialSymMatrix,
    ) -> Result<Self, CompletionError> {
        if monomials.len() != pmatrix.order() {
            return Err(CompletionError::OrderMismatch {
                monomials: monomials.len(),
                order: pmatrix.order(),
            });
        }
        for index in 0..pmatrix.order() {
            if pmatrix.get(index, index).expect("diagonal specified") <= 0.0 {
                return Err(CompletionError::NonPositiveDiagonal { index });
            }
        }
        Ok(PartialRepresentation { monomials, pmatrix })
    }

    pub fn monomials(&self) -> &MonomialVector {
        &self.monomials
    }

    pub fn pmatrix(&self) -> &PartialSymMatrix {
        &self.pmatrix
    }
}

/// Whether every specified principal submatrix of the partial Gram-like
/// matrix is PSD, i.e. whether each certified piece is genuinely a
/// certificate.
pub fn is_quasi_sohs(p: &PartialRepresentation, tol: f64) -> bool {
    is_partial_psd(&p.pmatrix, tol)
}

/// Completes a partial certificate and expands it: on success the returned
/// polynomial is certified by the completed matrix, which retains every
/// specified entry - in particular every certified block - exactly.
pub fn sohs_complete(
    p: &PartialRepresentation,
    tol: f64,
) -> Result<(Polynomial, GramLikeMatrix), CompletionError> {
    let completed = psd_complete(&p.pmatrix, tol)?;
    let r = GramLikeMatrix::new(Representation::new(p.monomials.clone(), completed)?)?;
    Ok((r.expand(), r))
}
