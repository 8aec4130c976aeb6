//! JSON interchange for representations and partial matrices.
//!
//! One document shape covers every input: an optional list of monomial
//! strings and a square matrix whose cells are numbers or `null` for
//! unspecified entries. Fully specified documents convert to
//! [`Representation`]s, documents with `null` cells to partial forms, and
//! documents without monomials to bare [`PartialSymMatrix`] patterns.

use crate::completion::{CompletionError, PartialRepresentation, PartialSymMatrix};
use crate::gram::{GramError, MonomialVector, Representation};
use crate::linalg::{LinalgError, SymMatrix};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum SchemaError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("document has no \"monomials\" field but the operation needs one")]
    MissingMonomials,
    #[error("entry ({i}, {j}) is null but the operation needs a fully specified matrix")]
    UnspecifiedEntry { i: usize, j: usize },
    #[error(transparent)]
    Gram(#[from] GramError),
    #[error(transparent)]
    Matrix(#[from] CompletionError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// The on-disk document: `{"monomials": [...], "matrix": [[...]]}` with
/// `null` for unspecified matrix entries; `monomials` may be omitted for
/// bare patterns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepresentationDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monomials: Option<Vec<String>>,
    pub matrix: Vec<Vec<Option<f64>>>,
}

impl RepresentationDoc {
    pub fn parse(text: &str) -> Result<Self, SchemaError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    pub fn from_representation(r: &Representation) -> Self {
        let k = r.order();
        RepresentationDoc {
            monomials: Some(r.monomials().words().iter().map(|w| w.to_string()).collect()),
            matrix: (0..k)
                .map(|i| (0..k).map(|j| Some(r.matrix().get(i, j))).collect())
                .collect(),
        }
    }

    pub fn from_partial_representation(r: &PartialRepresentation) -> Self {
        let mut doc = Self::from_partial_matrix(r.pmatrix());
        doc.monomials = Some(
            r.monomials()
                .words()
                .iter()
                .map(|w| w.to_string())
                .collect(),
        );
        doc
    }

    pub fn from_partial_matrix(p: &PartialSymMatrix) -> Self {
        let k = p.order();
        RepresentationDoc {
            monomials: None,
            matrix: (0..k)
                .map(|i| (0..k).map(|j| p.get(i, j)).collect())
                .collect(),
        }
    }

    fn monomial_vector(&self) -> Result<MonomialVector, SchemaError> {
        let names = self.monomials.as_ref().ok_or(SchemaError::MissingMonomials)?;
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        Ok(MonomialVector::parse(&refs)?)
    }

    fn full_rows(&self) -> Result<Vec<Vec<f64>>, SchemaError> {
        self.matrix
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, cell)| cell.ok_or(SchemaError::UnspecifiedEntry { i, j }))
                    .collect()
            })
            .collect()
    }

    /// Fully specified document with monomials.
    pub fn to_representation(&self) -> Result<Representation, SchemaError> {
        let monomials = self.monomial_vector()?;
        let matrix = SymMatrix::from_rows(&self.full_rows()?)?;
        Ok(Representation::new(monomials, matrix)?)
    }

    /// Document with monomials, `null` cells allowed.
    pub fn to_partial_representation(&self) -> Result<PartialRepresentation, SchemaError> {
        let monomials = self.monomial_vector()?;
        let pmatrix = PartialSymMatrix::new(self.matrix.clone())?;
        Ok(PartialRepresentation::new(monomials, pmatrix)?)
    }

    /// Bare matrix pattern; monomials, if present, are ignored.
    pub fn to_partial_matrix(&self) -> Result<PartialSymMatrix, SchemaError> {
        Ok(PartialSymMatrix::new(self.matrix.clone())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_full_representation() {
        let doc = RepresentationDoc::parse(
            r#"{"monomials": ["1", "x1", "x2 x1"], "matrix": [[5.0, 1.0, 0.0], [1.0, 1.0, 0.5], [0.0, 0.5, 2.0]]}"#,
        )
        .unwrap();
        let r = doc.to_representation().unwrap();
        assert_eq!(r.order(), 3);
        assert_eq!(r.matrix().get(1, 2), 0.5);
        let back = RepresentationDoc::from_representation(&r);
        let again = RepresentationDoc::parse(&back.to_json()).unwrap();
        assert_eq!(
            again.to_representation().unwrap().expand(),
            r.expand()
        );
        assert_eq!(again.monomials.unwrap(), vec!["1", "x1", "x2 x1"]);
    }

    #[test]
    fn nulls_become_unspecified_entries() {
        let doc = RepresentationDoc::parse(
            r#"{"monomials": ["1", "x1"], "matrix": [[1.0, null], [null, 4.0]]}"#,
        )
        .unwrap();
        assert!(matches!(
            doc.to_representation(),
            Err(SchemaError::UnspecifiedEntry { i: 0, j: 1 })
        ));
        let pr = doc.to_partial_representation().unwrap();
        assert_eq!(pr.pmatrix().unspecified_pairs(), vec![(0, 1)]);
        let p = doc.to_partial_matrix().unwrap();
        assert_eq!(p.get(1, 1), Some(4.0));
        assert_eq!(p.get(0, 1), None);
        let echoed = RepresentationDoc::from_partial_matrix(&p);
        assert_eq!(echoed.matrix[0][1], None);
        assert!(echoed.monomials.is_none());
    }

    #[test]
    fn pattern_documents_need_no_monomials() {
        let doc = RepresentationDoc::parse(
            r#"{"matrix": [[5.0, 5.0, null], [5.0, 5.0, 5.0], [null, 5.0, 5.0]]}"#,
        )
        .unwrap();
        assert!(matches!(
            doc.to_partial_representation(),
            Err(SchemaError::MissingMonomials)
        ));
        let p = doc.to_partial_matrix().unwrap();
        assert_eq!(p.unspecified_pairs(), vec![(0, 2)]);
    }

    #[test]
    fn bad_documents_report_schema_errors() {
        assert!(matches!(
            RepresentationDoc::parse("{\"matrix\": [[1.0"),
            Err(SchemaError::Json(_))
        ));
        let dup = RepresentationDoc::parse(
            r#"{"monomials": ["x1", "x1"], "matrix": [[1.0, 0.0], [0.0, 1.0]]}"#,
        )
        .unwrap();
        assert!(matches!(
            dup.to_representation(),
            Err(SchemaError::Gram(_))
        ));
        let ragged = RepresentationDoc::parse(r#"{"matrix": [[1.0, 0.0], [0.0]]}"#).unwrap();
        assert!(matches!(
            ragged.to_partial_matrix(),
            Err(SchemaError::Matrix(CompletionError::NotSquare))
        ));
    }
}
