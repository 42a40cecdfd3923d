//! Word-vector storage and answer vectorization.

use std::collections::HashMap;

use crate::{count, Real};

/// Token-to-vector store backing answer vectorization.
///
/// Every stored vector has exactly `dimension` components; lookups are
/// exact-token only. Misses are values, not errors: out-of-vocabulary policy
/// lives in the grouping layer.
#[derive(Debug, Clone)]
pub struct EmbeddingTable<T> {
    dimension: usize,
    vectors: HashMap<String, Vec<T>>,
}

impl<T: Real> EmbeddingTable<T> {
    pub fn new(dimension: usize) -> Self {
        assert!(dimension > 0, "embedding dimension must be positive");
        EmbeddingTable {
            dimension,
            vectors: HashMap::new(),
        }
    }

    /// Builds a table from `(token, vector)` pairs; panics on a dimension
    /// mismatch, which file loading reports as an error beforehand.
    pub fn from_vectors<I, S>(dimension: usize, pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, Vec<T>)>,
        S: Into<String>,
    {
        let mut table = Self::new(dimension);
        for (token, vector) in pairs {
            table.insert(token.into(), vector);
        }
        table
    }

    pub fn insert(&mut self, token: String, vector: Vec<T>) {
        assert_eq!(vector.len(), self.dimension, "vector dimension mismatch");
        self.vectors.insert(token, vector);
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vocabulary_size(&self) -> usize {
        self.vectors.len()
    }

    pub fn get(&self, token: &str) -> Option<&[T]> {
        self.vectors.get(token).map(Vec::as_slice)
    }
}

/// Averages the embedding vectors of an answer's whitespace tokens.
///
/// Tokens missing from the table are skipped; returns `None` when no token is
/// found. The mean is the componentwise sum divided once by the number of
/// found tokens.
pub fn vectorize_answer<T: Real>(answer: &str, table: &EmbeddingTable<T>) -> Option<Vec<T>> {
    mean_of(answer.split_whitespace().filter_map(|tok| table.get(tok)), table.dimension())
}

/// Componentwise mean over vectors, summed in iteration order.
pub(crate) fn mean_of<'a, T: Real + 'a>(
    vectors: impl IntoIterator<Item = &'a [T]>,
    dimension: usize,
) -> Option<Vec<T>> {
    let mut sum = vec![T::zero(); dimension];
    let mut found = 0usize;
    for vector in vectors {
        debug_assert_eq!(vector.len(), dimension);
        for (acc, &v) in sum.iter_mut().zip(vector) {
            *acc = *acc + v;
        }
        found += 1;
    }
    if found == 0 {
        return None;
    }
    let k = count::<T>(found);
    for acc in &mut sum {
        *acc = *acc / k;
    }
    Some(sum)
}

/// Cosine similarity in `[-1, 1]`; `0` when either vector has zero norm.
/// Identical slices short-circuit to exactly `1`.
pub fn cosine<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    if a == b && norm(a) > T::zero() {
        return T::one();
    }
    let denom = norm(a) * norm(b);
    if denom <= T::zero() {
        return T::zero();
    }
    let dot = a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y);
    dot / denom
}

fn norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
}
