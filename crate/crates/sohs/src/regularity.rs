//! Graded Betti numbers and 2-regularity of matrix patterns.
//!
//! The unspecified pairs of a partial symmetric matrix generate a
//! square-free quadratic monomial ideal. Its minimal free resolution is
//! summarized by the Betti table, computed here through the combinatorial
//! route: the Stanley-Reisner complex of the ideal is the independence
//! complex of its generator graph, and each Betti number is a sum of
//! reduced homology ranks over vertex subsets. Homology ranks come from
//! exact integer elimination, so the tables carry no floating-point
//! ambiguity.
//!
//! Castelnuovo-Mumford regularity is read off the table, and 2-regularity
//! of a pattern is equivalent to chordality of its specification graph -
//! the same dividing line that governs PSD completability, checked from
//! both ends here.

use crate::completion::{is_chordal, maximal_cliques, specification_graph, PartialSymMatrix, SpecGraph};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::collections::{BTreeMap, BTreeSet, HashMap};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Hard cap on ambient variables: the subset enumeration is exponential.
pub const MAX_AMBIENT: usize = 16;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RegularityError {
    #[error("ambient variable count {n} exceeds the supported maximum {MAX_AMBIENT}")]
    AmbientTooLarge { n: usize },
    #[error("generator x{p} x{q} is invalid for {n} variables")]
    InvalidGenerator { p: usize, q: usize, n: usize },
}

/// A square-free quadratic monomial ideal: each generator `x_p x_q` is an
/// unordered pair of distinct variable indices.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialIdeal {
    n: usize,
    generators: BTreeSet<(usize, usize)>,
}

impl MonomialIdeal {
    pub fn new(
        n: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, RegularityError> {
        let mut generators = BTreeSet::new();
        for (p, q) in pairs {
            if p == q || p >= n || q >= n {
                return Err(RegularityError::InvalidGenerator { p, q, n });
            }
            generators.insert((p.min(q), p.max(q)));
        }
        Ok(MonomialIdeal { n, generators })
    }

    /// Number of ambient variables.
    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.generators.iter().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// The graph with one edge per generator pair.
    pub fn generator_graph(&self) -> SpecGraph {
        let edges: Vec<(usize, usize)> = self.generators.iter().copied().collect();
        SpecGraph::with_edges(self.n, &edges)
    }
}

/// The ideal generated by `x_i x_j` for every unspecified off-diagonal pair
/// `(i, j)` of the partial matrix.
pub fn subspace_arrangement_ideal(p: &PartialSymMatrix) -> MonomialIdeal {
    MonomialIdeal::new(p.order(), p.unspecified_pairs())
        .expect("pairs from a partial matrix are valid")
}

/// An abstract simplicial complex given by its maximal faces.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialComplex {
    vertex_count: usize,
    maximal: Vec<Vec<usize>>,
}

impl SimplicialComplex {
    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Maximal faces, each sorted ascending, in lexicographic order.
    pub fn maximal_faces(&self) -> &[Vec<usize>] {
        &self.maximal
    }

    /// Whether a vertex set is a face (a subset of some maximal face).
    pub fn contains_face(&self, face: &[usize]) -> bool {
        self.maximal
            .iter()
            .any(|m| face.iter().all(|v| m.contains(v)))
    }

    /// Largest face cardinality minus one; `None` for the empty complex.
    pub fn dimension(&self) -> Option<usize> {
        self.maximal.iter().map(|m| m.len()).max().map(|c| c - 1)
    }
}

/// The complex whose faces are the subsets containing no generator pair -
/// equivalently the independence complex of the generator graph.
pub fn stanley_reisner_complex(ideal: &MonomialIdeal) -> SimplicialComplex {
    let co = ideal.generator_graph().complement();
    SimplicialComplex {
        vertex_count: ideal.ambient(),
        maximal: maximal_cliques(&co),
    }
}

/// Graded Betti numbers `(i, j) -> beta_{i,j}` of a monomial ideal.
#[derive(Debug, Clone, PartialEq)]
pub struct BettiTable {
    entries: BTreeMap<(usize, usize), usize>,
}

impl BettiTable {
    pub fn get(&self, i: usize, j: usize) -> usize {
        self.entries.get(&(i, j)).copied().unwrap_or(0)
    }

    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), usize)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Column totals indexed by homological degree `i`.
    pub fn totals(&self) -> Vec<usize> {
        let Some(imax) = self.entries.keys().map(|&(i, _)| i).max() else {
            return Vec::new();
        };
        let mut out = vec![0; imax + 1];
        for (&(i, _), &b) in &self.entries {
            out[i] += b;
        }
        out
    }

    /// Castelnuovo-Mumford regularity: the largest `j - i` with a nonzero
    /// entry; 0 for the empty table (zero ideal).
    pub fn regularity(&self) -> usize {
        self.entries
            .keys()
            .map(|&(i, j)| j - i)
            .max()
            .unwrap_or(0)
    }
}

impl std::fmt::Display for BettiTable {
    /// Text grid in the usual shape: columns are homological degrees, rows
    /// are slopes `j - i`, absent entries print as dots.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.entries.is_empty() {
            return writeln!(f, "total: 0");
        }
        let imax = self.entries.keys().map(|&(i, _)| i).max().unwrap();
        let dmin = self.entries.keys().map(|&(i, j)| j - i).min().unwrap();
        let dmax = self.entries.keys().map(|&(i, j)| j - i).max().unwrap();
        let totals = self.totals();
        let mut rows: Vec<(String, Vec<String>)> = Vec::new();
        rows.push((
            "total:".to_string(),
            totals.iter().map(|t| t.to_string()).collect(),
        ));
        for d in dmin..=dmax {
            let cells: Vec<String> = (0..=imax)
                .map(|i| {
                    let b = self.get(i, i + d);
                    if b == 0 {
                        ".".to_string()
                    } else {
                        b.to_string()
                    }
                })
                .collect();
            if cells.iter().all(|c| c == ".") {
                continue;
            }
            rows.push((format!("{d}:"), cells));
        }
        let label_w = rows.iter().map(|(l, _)| l.len()).max().unwrap();
        let mut col_w = vec![1; imax + 1];
        for (_, cells) in &rows {
            for (c, cell) in cells.iter().enumerate() {
                col_w[c] = col_w[c].max(cell.len());
            }
        }
        write!(f, "{:>label_w$}", "")?;
        for (c, w) in col_w.iter().enumerate() {
            write!(f, " {c:>w$}")?;
        }
        writeln!(f)?;
        for (label, cells) in &rows {
            write!(f, "{label:>label_w$}")?;
            for (c, cell) in cells.iter().enumerate() {
                write!(f, " {cell:>w$}", w = col_w[c])?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Exact rank by fraction-free (Bareiss) elimination in `i64`; `None` on
/// overflow.
fn bareiss_rank_i64(mut a: Vec<Vec<i64>>) -> Option<usize> {
    let rows = a.len();
    if rows == 0 || a[0].is_empty() {
        return Some(0);
    }
    let cols = a[0].len();
    let mut rank = 0;
    let mut prev = 1i64;
    for col in 0..cols {
        let Some(p) = (rank..rows).find(|&r| a[r][col] != 0) else {
            continue;
        };
        a.swap(rank, p);
        for r in rank + 1..rows {
            for c in col + 1..cols {
                let hi = a[rank][col].checked_mul(a[r][c])?;
                let lo = a[r][col].checked_mul(a[rank][c])?;
                a[r][c] = hi.checked_sub(lo)? / prev;
            }
            a[r][col] = 0;
        }
        prev = a[rank][col];
        rank += 1;
        if rank == rows {
            break;
        }
    }
    Some(rank)
}

/// Exact rank in arbitrary precision; the fallback when `i64` overflows.
fn bareiss_rank_big(a0: &[Vec<i64>]) -> usize {
    let rows = a0.len();
    if rows == 0 || a0[0].is_empty() {
        return 0;
    }
    let cols = a0[0].len();
    let mut a: Vec<Vec<BigInt>> = a0
        .iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect();
    let mut rank = 0;
    let mut prev = BigInt::one();
    for col in 0..cols {
        let Some(p) = (rank..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        for r in rank + 1..rows {
            for c in col + 1..cols {
                a[r][c] = (&a[rank][col] * &a[r][c] - &a[r][col] * &a[rank][c]) / &prev;
            }
            a[r][col] = BigInt::zero();
        }
        prev = a[rank][col].clone();
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

fn exact_rank(a: Vec<Vec<i64>>) -> usize {
    match bareiss_rank_i64(a.clone()) {
        Some(r) => r,
        None => bareiss_rank_big(&a),
    }
}

/// Independent subsets of `w` in the generator graph, grouped by
/// cardinality; index 0 holds the single empty face.
fn independent_faces(g: &SpecGraph, w: &[usize]) -> Vec<Vec<Vec<usize>>> {
    let mut faces: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new()]];
    loop {
        let prev = faces.last().expect("seeded with the empty face");
        let mut next: Vec<Vec<usize>> = Vec::new();
        for f in prev {
            let from = f
                .last()
                .map(|&v| w.iter().position(|&x| x == v).expect("face within w") + 1)
                .unwrap_or(0);
            for &v in &w[from..] {
                if f.iter().all(|&u| !g.has_edge(u, v)) {
                    let mut bigger = f.clone();
                    bigger.push(v);
                    next.push(bigger);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        faces.push(next);
    }
    faces
}

/// Rank of the boundary map from cardinality-`c` faces to their
/// cardinality-`c-1` subfaces, with alternating signs by removal position.
fn boundary_rank(lower: &[Vec<usize>], upper: &[Vec<usize>]) -> usize {
    if lower.is_empty() || upper.is_empty() {
        return 0;
    }
    let row_of: HashMap<&[usize], usize> = lower
        .iter()
        .enumerate()
        .map(|(r, f)| (f.as_slice(), r))
        .collect();
    let mut m = vec![vec![0i64; upper.len()]; lower.len()];
    for (col, face) in upper.iter().enumerate() {
        for t in 0..face.len() {
            let mut sub = face.clone();
            sub.remove(t);
            let row = row_of[sub.as_slice()];
            m[row][col] = if t % 2 == 0 { 1 } else { -1 };
        }
    }
    exact_rank(m)
}

/// Reduced rational homology ranks of the independence complex restricted
/// to `w`, returned by face cardinality: entry `c` is the rank of the
/// reduced homology in dimension `c - 1`.
fn homology_by_cardinality(g: &SpecGraph, w: &[usize]) -> Vec<usize> {
    let faces = independent_faces(g, w);
    let top = faces.len();
    let mut ranks = vec![0usize; top + 1];
    for c in 1..top {
        ranks[c] = boundary_rank(&faces[c - 1], &faces[c]);
    }
    (0..top)
        .map(|c| faces[c].len() - ranks[c] - ranks[c + 1])
        .collect()
}

fn table_for_mask(g: &SpecGraph, n: usize, mask: u32) -> BTreeMap<(usize, usize), usize> {
    let w: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
    let j = w.len();
    let mut out = BTreeMap::new();
    for (c, h) in homology_by_cardinality(g, &w).into_iter().enumerate() {
        if h == 0 || c + 1 > j {
            continue;
        }
        // homology in dimension c-1 feeds beta_{i,j} with i = j - c - 1
        let i = j - c - 1;
        *out.entry((i, j)).or_insert(0) += h;
    }
    out
}

fn merge_tables(
    mut a: BTreeMap<(usize, usize), usize>,
    b: BTreeMap<(usize, usize), usize>,
) -> BTreeMap<(usize, usize), usize> {
    for (k, v) in b {
        *a.entry(k).or_insert(0) += v;
    }
    a
}

fn guard_ambient(ideal: &MonomialIdeal) -> Result<(), RegularityError> {
    if ideal.ambient() > MAX_AMBIENT {
        return Err(RegularityError::AmbientTooLarge { n: ideal.ambient() });
    }
    Ok(())
}

/// Sequential Betti-number computation: every vertex subset `W` contributes
/// the reduced homology ranks of the restricted Stanley-Reisner complex to
/// `beta_{i, |W|}`.
pub fn betti_table_seq(ideal: &MonomialIdeal) -> Result<BettiTable, RegularityError> {
    guard_ambient(ideal)?;
    if ideal.is_empty() {
        return Ok(BettiTable {
            entries: BTreeMap::new(),
        });
    }
    let g = ideal.generator_graph();
    let n = ideal.ambient();
    let entries = (1u32..1 << n)
        .map(|mask| table_for_mask(&g, n, mask))
        .fold(BTreeMap::new(), merge_tables);
    Ok(BettiTable { entries })
}

/// Parallel variant of [`betti_table_seq`]: vertex subsets are independent,
/// so they fan out across threads and the partial tables merge by addition.
#[cfg(feature = "parallel")]
pub fn betti_table_par(ideal: &MonomialIdeal) -> Result<BettiTable, RegularityError> {
    guard_ambient(ideal)?;
    if ideal.is_empty() {
        return Ok(BettiTable {
            entries: BTreeMap::new(),
        });
    }
    let g = ideal.generator_graph();
    let n = ideal.ambient();
    let entries = (1u32..1 << n)
        .into_par_iter()
        .map(|mask| table_for_mask(&g, n, mask))
        .reduce(BTreeMap::new, merge_tables);
    Ok(BettiTable { entries })
}

/// Betti table of the ideal, using the parallel path when compiled in.
pub fn betti_table(ideal: &MonomialIdeal) -> Result<BettiTable, RegularityError> {
    #[cfg(feature = "parallel")]
    {
        betti_table_par(ideal)
    }
    #[cfg(not(feature = "parallel"))]
    {
        betti_table_seq(ideal)
    }
}

/// Castelnuovo-Mumford regularity of the ideal (0 for the zero ideal).
pub fn regularity(ideal: &MonomialIdeal) -> Result<usize, RegularityError> {
    Ok(betti_table(ideal)?.regularity())
}

/// Whether the pattern's ideal is 2-regular, decided through the fast
/// graph-theoretic criterion: the specification graph is chordal.
pub fn is_2_regular(p: &PartialSymMatrix) -> bool {
    is_chordal(&specification_graph(p)).is_chordal()
}

/// The same decision through the Betti table - the cross-check route.
pub fn is_2_regular_via_betti(p: &PartialSymMatrix) -> Result<bool, RegularityError> {
    Ok(regularity(&subspace_arrangement_ideal(p))? <= 2)
}
