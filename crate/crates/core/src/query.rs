//! Cosine similarity, nearest neighbours and analogies over an embedding table.
//!
//! All arithmetic here runs in `f64` regardless of the table's scalar type.
//! Scans are brute force over the whole vocabulary.

use std::cmp::Ordering;

use crate::embedder::EmbeddingTable;
use crate::{Error, Real, Result};

/// A ranked result word and its similarity score.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub word: String,
    pub score: f64,
}

pub(crate) fn dot<T: Real>(u: &[T], v: &[T]) -> f64 {
    u.iter().zip(v).map(|(&a, &b)| a.as_f64() * b.as_f64()).sum()
}

pub(crate) fn norm<T: Real>(u: &[T]) -> f64 {
    dot(u, u).sqrt()
}

/// `<u, v> / (|u| |v|)`. Undefined, and an error, when either vector is zero.
pub fn cosine<T: Real>(u: &[T], v: &[T]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::invalid(format!(
            "vector lengths differ: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::UndefinedSimilarity);
    }
    Ok(dot(u, v) / (nu * nv))
}

/// Builds the error for a word missing from `table`, with close spellings.
pub fn unknown_word<T: Real>(table: &EmbeddingTable<T>, word: &str) -> Error {
    let limit = (word.chars().count() / 2).max(2);
    let mut close: Vec<(usize, &str)> = table
        .words()
        .map(|w| (strsim::levenshtein(word, w), w))
        .filter(|&(d, _)| d <= limit)
        .collect();
    close.sort_unstable();
    Error::UnknownWord {
        word: word.to_owned(),
        suggestions: close.into_iter().take(3).map(|(_, w)| w.to_owned()).collect(),
    }
}

fn lookup<'t, T: Real>(table: &'t EmbeddingTable<T>, word: &str) -> Result<(usize, &'t [T])> {
    table
        .index_of(word)
        .map(|i| (i, table.row(i)))
        .ok_or_else(|| unknown_word(table, word))
}

fn rank(mut scored: Vec<Neighbor>, topk: usize) -> Vec<Neighbor> {
    let order = |a: &Neighbor, b: &Neighbor| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.word.cmp(&b.word))
    };
    if topk < scored.len() {
        scored.select_nth_unstable_by(topk, order);
        scored.truncate(topk);
    }
    scored.sort_unstable_by(order);
    scored
}

/// Scores every word (except `exclude`) against `target` and keeps the best `topk`.
///
/// Words with zero vectors have no defined cosine and are never returned.
pub fn nearest_to_vector<T: Real>(
    table: &EmbeddingTable<T>,
    target: &[f64],
    topk: usize,
    exclude: &[usize],
) -> Result<Vec<Neighbor>> {
    if target.len() != table.dimension() {
        return Err(Error::invalid("target vector has the wrong dimension"));
    }
    let target_norm = target.iter().map(|v| v * v).sum::<f64>().sqrt();
    if target_norm == 0.0 {
        return Err(Error::UndefinedSimilarity);
    }
    if topk == 0 {
        return Ok(Vec::new());
    }
    let scored = (0..table.len())
        .filter(|i| !exclude.contains(i))
        .filter_map(|i| {
            let row = table.row(i);
            let n = norm(row);
            (n > 0.0).then(|| {
                let d: f64 = row.iter().zip(target).map(|(&a, &b)| a.as_f64() * b).sum();
                Neighbor {
                    word: table.word(i).to_owned(),
                    score: d / (n * target_norm),
                }
            })
        })
        .collect();
    Ok(rank(scored, topk))
}

/// The `topk` words most cosine-similar to `word`, excluding `word` itself.
///
/// Ties are broken lexicographically.
pub fn nearest<T: Real>(table: &EmbeddingTable<T>, word: &str, topk: usize) -> Result<Vec<Neighbor>> {
    let (i, row) = lookup(table, word)?;
    let target: Vec<f64> = row.iter().map(|v| v.as_f64()).collect();
    nearest_to_vector(table, &target, topk, &[i])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AnalogyMode {
    /// Rank by cosine to `x/|x| + y/|y| - z/|z|`.
    #[default]
    Cosine,
    /// Rank by the raw dot product with `x + y - z`; scores are unbounded.
    RawDot,
}

/// Answers "`x` is to `y` like `z` is to ?" by maximizing similarity to
/// `x + y - z`, which amounts to favouring words close to `x` and `y` and far
/// from `z`. The query words themselves are never returned.
pub fn analogy<T: Real>(table: &EmbeddingTable<T>, x: &str, y: &str, z: &str, topk: usize) -> Result<Vec<Neighbor>> {
    analogy_with(table, x, y, z, topk, AnalogyMode::Cosine)
}

pub fn analogy_with<T: Real>(
    table: &EmbeddingTable<T>,
    x: &str,
    y: &str,
    z: &str,
    topk: usize,
    mode: AnalogyMode,
) -> Result<Vec<Neighbor>> {
    let (xi, xv) = lookup(table, x)?;
    let (yi, yv) = lookup(table, y)?;
    let (zi, zv) = lookup(table, z)?;
    let scale = |v: &[T]| -> Result<f64> {
        match mode {
            AnalogyMode::RawDot => Ok(1.0),
            AnalogyMode::Cosine => {
                let n = norm(v);
                if n == 0.0 {
                    Err(Error::UndefinedSimilarity)
                } else {
                    Ok(1.0 / n)
                }
            }
        }
    };
    let (sx, sy, sz) = (scale(xv)?, scale(yv)?, scale(zv)?);
    let target: Vec<f64> = (0..table.dimension())
        .map(|j| xv[j].as_f64() * sx + yv[j].as_f64() * sy - zv[j].as_f64() * sz)
        .collect();
    let exclude = [xi, yi, zi];
    match mode {
        AnalogyMode::Cosine => nearest_to_vector(table, &target, topk, &exclude),
        AnalogyMode::RawDot => {
            let scored = (0..table.len())
                .filter(|i| !exclude.contains(i))
                .map(|i| Neighbor {
                    word: table.word(i).to_owned(),
                    score: table.row(i).iter().zip(&target).map(|(&a, &b)| a.as_f64() * b).sum(),
                })
                .collect();
            Ok(rank(scored, topk))
        }
    }
}
