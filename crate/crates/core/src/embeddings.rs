//! Word embedding tables loaded from external tools, plus the vector math
//! shared by the prototype and clustering features.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::error::{CoreError, Result};
use crate::math;

/// Text layouts accepted by [`parse_embeddings`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingFormat {
    /// First line `<count> <dim>`, then one word per row.
    Word2vecText,
    /// No header; the dimension is inferred from the first row.
    GloveText,
}

/// word -> L-dimensional vector, with free-form provenance metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub dim: usize,
    pub vectors: HashMap<String, Vec<f64>>,
    pub metadata: Vec<(String, String)>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            vectors: HashMap::new(),
            metadata: Vec::new(),
        }
    }

    pub fn insert(&mut self, word: impl Into<String>, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(CoreError::DimensionMismatch(format!(
                "expected {} entries, got {}",
                self.dim,
                vector.len()
            )));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::Numerical("non-finite embedding entry".into()));
        }
        self.vectors.insert(word.into(), vector);
        Ok(())
    }

    pub fn lookup(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(|v| v.as_slice())
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Words in lexicographic order; every seeded algorithm iterates the
    /// table through this so results do not depend on file order.
    pub fn sorted_words(&self) -> Vec<&str> {
        let mut words: Vec<&str> = self.vectors.keys().map(|s| s.as_str()).collect();
        words.sort_unstable();
        words
    }
}

/// Parses embedding text into a table. Duplicate words keep the last
/// occurrence; the duplicates are returned alongside as warnings.
pub fn parse_embeddings(
    text: &str,
    format: EmbeddingFormat,
) -> Result<(EmbeddingTable, Vec<String>)> {
    let mut lines = text.lines().enumerate().peekable();
    let mut declared: Option<(usize, usize)> = None;
    if format == EmbeddingFormat::Word2vecText {
        let (idx, header) = lines
            .next()
            .ok_or_else(|| CoreError::EmptyInput("embedding text".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(CoreError::Parse {
                line: idx + 1,
                message: "expected `<count> <dim>` header".into(),
            });
        }
        let count = fields[0].parse::<usize>().map_err(|_| CoreError::Parse {
            line: idx + 1,
            message: "non-numeric count in header".into(),
        })?;
        let dim = fields[1].parse::<usize>().map_err(|_| CoreError::Parse {
            line: idx + 1,
            message: "non-numeric dim in header".into(),
        })?;
        declared = Some((count, dim));
    }

    let mut dim: Option<usize> = declared.map(|(_, d)| d);
    let mut vectors: HashMap<String, Vec<f64>> = HashMap::new();
    let mut warnings = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let word = fields.next().unwrap().to_string();
        let mut vector = Vec::new();
        for field in fields {
            let v = field.parse::<f64>().map_err(|_| CoreError::Parse {
                line: idx + 1,
                message: format!("non-numeric field `{field}`"),
            })?;
            vector.push(v);
        }
        match dim {
            None => dim = Some(vector.len()),
            Some(d) if d != vector.len() => {
                return Err(CoreError::Parse {
                    line: idx + 1,
                    message: format!("expected {} values, got {}", d, vector.len()),
                });
            }
            _ => {}
        }
        if vector.is_empty() {
            return Err(CoreError::Parse {
                line: idx + 1,
                message: "row has no vector entries".into(),
            });
        }
        if vectors.insert(word.clone(), vector).is_some() {
            warnings.push(format!("duplicate word `{word}` at line {}", idx + 1));
        }
    }
    let dim = dim.filter(|&d| d > 0 && !vectors.is_empty()).ok_or_else(|| {
        CoreError::EmptyInput("embedding text has no vector rows".into())
    })?;
    Ok((
        EmbeddingTable {
            dim,
            vectors,
            metadata: Vec::new(),
        },
        warnings,
    ))
}

/// Writes the table back out; with `Word2vecText` a `<count> <dim>` header
/// is prepended. Rows are in lexicographic word order and values use the
/// shortest representation that reparses exactly.
pub fn serialize_embeddings(table: &EmbeddingTable, format: EmbeddingFormat) -> String {
    let mut out = String::new();
    if format == EmbeddingFormat::Word2vecText {
        out.push_str(&format!("{} {}\n", table.len(), table.dim));
    }
    for word in table.sorted_words() {
        out.push_str(word);
        for v in &table.vectors[word] {
            out.push(' ');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

/// Cosine similarity, clamped to [-1, 1] against rounding.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(CoreError::DimensionMismatch(format!(
            "cosine of lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    let mut dot = 0.0;
    let mut nu = 0.0;
    let mut nv = 0.0;
    for (&a, &b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(CoreError::InvalidArgument("zero-norm vector".into()));
    }
    Ok((dot / (math::sqrt(nu) * math::sqrt(nv))).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    

    #[test]
    fn word2vec_header_parsed() {
        let (t, w) = parse_embeddings(
            "2 3\na 0.1 0.2 0.3\nb 1 2 3\n",
            EmbeddingFormat::Word2vecText,
        )
        .unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.dim, 3);
        assert!(w.is_empty());
        assert_eq!(t.lookup("b"), Some(&[1.0, 2.0, 3.0][..]));
    }

    #[test]
    fn glove_dim_inferred() {
        let (t, _) = parse_embeddings("w 0.1 0.2\n", EmbeddingFormat::GloveText).unwrap();
        assert_eq!(t.dim, 2);
    }

    #[test]
    fn inconsistent_row_length_fails() {
        let err =
            parse_embeddings("2 3\na 1 2 3\nb 1 2\n", EmbeddingFormat::Word2vecText).unwrap_err();
        assert!(matches!(err, CoreError::Parse { line: 3, .. }));
    }

    #[test]
    fn non_numeric_field_fails() {
        let err = parse_embeddings("a 1 x\n", EmbeddingFormat::GloveText).unwrap_err();
        assert!(matches!(err, CoreError::Parse { .. }));
    }

    #[test]
    fn empty_input_fails() {
        assert!(parse_embeddings("", EmbeddingFormat::GloveText).is_err());
        assert!(parse_embeddings("0 3\n", EmbeddingFormat::Word2vecText).is_err());
    }

    #[test]
    fn duplicates_last_wins_with_warning() {
        let (t, w) =
            parse_embeddings("a 1 2\na 3 4\n", EmbeddingFormat::GloveText).unwrap();
        assert_eq!(t.lookup("a"), Some(&[3.0, 4.0][..]));
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn cosine_examples() {
        assert!((cosine(&[1.0, 2.0], &[1.0, 2.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let c = cosine(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((c - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn cosine_zero_norm_is_error() {
        assert!(cosine(&[0.0, 0.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn lookup_misses() {
        let t = EmbeddingTable::new(2);
        assert!(t.lookup("x").is_none());
        assert!(t.lookup("").is_none());
    }

    #[test]
    fn round_trip_word2vec_text() {
        let src = "2 3\nalpha 0.123456789 -1.5 3e-05\nbeta 1 0.25 -0.000244140625\n";
        let (t, _) = parse_embeddings(src, EmbeddingFormat::Word2vecText).unwrap();
        let text = serialize_embeddings(&t, EmbeddingFormat::Word2vecText);
        let (t2, _) = parse_embeddings(&text, EmbeddingFormat::Word2vecText).unwrap();
        assert_eq!(t.vectors, t2.vectors);
        assert_eq!(t.dim, t2.dim);
    }
}
