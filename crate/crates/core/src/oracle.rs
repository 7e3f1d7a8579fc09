//! Exact weighted co-occurrence matrix and inner-product distortion checks.
//!
//! The matrix holds `entry(w, c) = sum of f(d)` over every ordered
//! co-occurrence of `c` in the window of `w`, using the same sentence-bounded
//! window and quantized weights as training. Signs live only in the
//! projection, so [`project`] of this matrix reproduces training exactly.
//! Memory is quadratic in the vocabulary in the worst case; use at desk scale.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::corpus::TokenStream;
use crate::embedder::{EmbeddingTable, TrainParams};
use crate::eval::spearman;
use crate::hashing::{HasherSpec, WeightSpec};
use crate::query;
use crate::{Error, Real, Result};

/// Default vocabulary cap for exact matrices.
pub const DEFAULT_VOCAB_CAP: usize = 50_000;

/// Sparse symmetric matrix of accumulated co-occurrence weights.
#[derive(Debug, Clone)]
pub struct CooccurrenceMatrix<T = f64> {
    window: usize,
    weight: WeightSpec,
    words: Vec<Box<str>>,
    index: FxHashMap<Box<str>, u32>,
    rows: Vec<FxHashMap<u32, T>>,
    token_count: u64,
}

pub fn build_cooccurrence<T: Real>(
    stream: &TokenStream,
    window: usize,
    weight: WeightSpec,
) -> Result<CooccurrenceMatrix<T>> {
    build_cooccurrence_capped(stream, window, weight, DEFAULT_VOCAB_CAP)
}

/// Builds the matrix, failing if the stream has more than `cap` distinct words.
///
/// Rows are partitioned across threads; every thread scans the whole stream
/// and accumulates only the rows it owns.
pub fn build_cooccurrence_capped<T: Real>(
    stream: &TokenStream,
    window: usize,
    weight: WeightSpec,
    cap: usize,
) -> Result<CooccurrenceMatrix<T>> {
    if window < 1 {
        return Err(Error::invalid("context window must be at least 1"));
    }
    let vocab = stream.vocab_size();
    if vocab > cap {
        return Err(Error::Resource { vocab, cap });
    }
    let weights: Vec<T> = weight.table(window);
    let parts = rayon::current_num_threads().clamp(1, 64);
    let owned: Vec<Vec<(u32, FxHashMap<u32, T>)>> = (0..parts)
        .into_par_iter()
        .map(|part| {
            let mine = |id: u32| id as usize % parts == part;
            let mut rows: Vec<FxHashMap<u32, T>> = (0..vocab).map(|_| FxHashMap::default()).collect();
            for sentence in stream.sentences() {
                let ids = sentence.ids();
                for p in 1..ids.len() {
                    let w = ids[p];
                    for (d, &f) in weights.iter().enumerate().take(p) {
                        let c = ids[p - 1 - d];
                        if mine(w) {
                            *rows[w as usize].entry(c).or_insert_with(T::zero) += f;
                        }
                        if mine(c) {
                            *rows[c as usize].entry(w).or_insert_with(T::zero) += f;
                        }
                    }
                }
            }
            rows.into_iter()
                .enumerate()
                .filter(|&(id, _)| mine(id as u32))
                .map(|(id, row)| (id as u32, row))
                .collect()
        })
        .collect();
    let mut rows: Vec<FxHashMap<u32, T>> = (0..vocab).map(|_| FxHashMap::default()).collect();
    for (id, row) in owned.into_iter().flatten() {
        rows[id as usize] = row;
    }
    let words: Vec<Box<str>> = stream.symbols().map(Into::into).collect();
    let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i as u32)).collect();
    Ok(CooccurrenceMatrix {
        window,
        weight,
        words,
        index,
        rows,
        token_count: stream.token_count() as u64,
    })
}

impl<T: Real> CooccurrenceMatrix<T> {
    pub fn window(&self) -> usize {
        self.window
    }

    pub fn weight(&self) -> &WeightSpec {
        &self.weight
    }

    /// Number of words (rows).
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn token_count(&self) -> u64 {
        self.token_count
    }

    pub fn words(&self) -> impl ExactSizeIterator<Item = &str> {
        self.words.iter().map(|w| &**w)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    /// Number of stored non-zero entries.
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    /// Accumulated weight of `context` around `word`; zero when absent.
    pub fn entry(&self, word: &str, context: &str) -> T {
        match (self.index.get(word), self.index.get(context)) {
            (Some(&w), Some(&c)) => self.rows[w as usize].get(&c).copied().unwrap_or_else(T::zero),
            _ => T::zero(),
        }
    }

    /// Non-zero entries of a row as `(context word, weight)`.
    pub fn row(&self, word: &str) -> Option<impl Iterator<Item = (&str, T)>> {
        let &w = self.index.get(word)?;
        Some(
            self.rows[w as usize]
                .iter()
                .map(|(&c, &v)| (&*self.words[c as usize], v)),
        )
    }

    /// A row as a dense vector over [`words`](Self::words) order.
    pub fn dense_row(&self, word: &str) -> Option<Vec<T>> {
        let &w = self.index.get(word)?;
        let mut out = vec![T::zero(); self.len()];
        for (&c, &v) in &self.rows[w as usize] {
            out[c as usize] = v;
        }
        Some(out)
    }

    fn sparse_dot(&self, a: u32, b: u32) -> f64 {
        let (ra, rb) = (&self.rows[a as usize], &self.rows[b as usize]);
        let (small, large) = if ra.len() <= rb.len() { (ra, rb) } else { (rb, ra) };
        small
            .iter()
            .filter_map(|(c, &v)| large.get(c).map(|&u| v.as_f64() * u.as_f64()))
            .sum()
    }

    /// Inner product of two full rows, or `None` if either word is unknown.
    pub fn inner_product(&self, a: &str, b: &str) -> Option<f64> {
        Some(self.sparse_dot(*self.index.get(a)?, *self.index.get(b)?))
    }

    /// Cosine of two full rows. `None` for unknown words, an error for empty rows.
    pub fn cosine(&self, a: &str, b: &str) -> Option<Result<f64>> {
        let (&ia, &ib) = (self.index.get(a)?, self.index.get(b)?);
        let (na, nb) = (self.sparse_dot(ia, ia).sqrt(), self.sparse_dot(ib, ib).sqrt());
        if na == 0.0 || nb == 0.0 {
            return Some(Err(Error::UndefinedSimilarity));
        }
        Some(Ok(self.sparse_dot(ia, ib) / (na * nb)))
    }
}

/// Batch form of training: `vector[w][h(c)] += xi(c) * entry(w, c)`.
pub fn project<T: Real>(matrix: &CooccurrenceMatrix<T>, hasher: &HasherSpec) -> Result<EmbeddingTable<T>> {
    let params = TrainParams::new(matrix.window, *hasher, matrix.weight)?;
    let n = hasher.dimension();
    let buckets: Vec<usize> = matrix.words().map(|w| hasher.index(w)).collect();
    let signs: Vec<T> = matrix
        .words()
        .map(|w| T::from_f64_lossy(f64::from(hasher.sign(w))))
        .collect();
    let rows = matrix.words().zip(&matrix.rows).map(|(word, row)| {
        let mut v = vec![T::zero(); n];
        for (&c, &weight) in row {
            v[buckets[c as usize]] += signs[c as usize] * weight;
        }
        (word, v)
    });
    EmbeddingTable::from_rows(params, rows, matrix.token_count)
}

/// Full versus hashed comparison for one word pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDistortion {
    pub a: String,
    pub b: String,
    pub full_ip: f64,
    pub hashed_ip: f64,
    pub abs_err: f64,
    /// `abs_err / |full_ip|`; zero when both are zero, infinite when only the full product is.
    pub rel_err: f64,
    pub full_cosine: Option<f64>,
    pub hashed_cosine: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistortionReport {
    pub pairs: Vec<PairDistortion>,
    /// Pairs dropped because a word was missing from the matrix or table.
    pub skipped: usize,
    /// Pairs whose full inner product is zero; relative error is undefined for them.
    pub zero_full: usize,
    /// Median and 90th percentile of `rel_err` over pairs with a non-zero full product.
    pub median_rel_err: f64,
    pub p90_rel_err: f64,
    /// Spearman correlation of full versus hashed inner products.
    pub ip_spearman: Option<f64>,
    /// Spearman correlation of full versus hashed cosines, over pairs where both are defined.
    pub cosine_spearman: Option<f64>,
}

/// Nearest-rank quantile of `values` (which must be non-empty), `q` in (0, 1].
pub(crate) fn quantile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// Compares inner products and cosines between the exact matrix and a table
/// trained on the same corpus.
pub fn distortion<T: Real, U: Real, S: AsRef<str> + Sync>(
    matrix: &CooccurrenceMatrix<T>,
    table: &EmbeddingTable<U>,
    pairs: &[(S, S)],
) -> DistortionReport {
    let results: Vec<Option<PairDistortion>> = pairs
        .par_iter()
        .map(|(a, b)| {
            let (a, b) = (a.as_ref(), b.as_ref());
            let full_ip = matrix.inner_product(a, b)?;
            let (va, vb) = (table.get(a)?, table.get(b)?);
            let hashed_ip = query::dot(va, vb);
            let abs_err = (hashed_ip - full_ip).abs();
            let rel_err = if full_ip != 0.0 {
                abs_err / full_ip.abs()
            } else if abs_err == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            Some(PairDistortion {
                a: a.to_owned(),
                b: b.to_owned(),
                full_ip,
                hashed_ip,
                abs_err,
                rel_err,
                full_cosine: matrix.cosine(a, b).and_then(|r| r.ok()),
                hashed_cosine: query::cosine(va, vb).ok(),
            })
        })
        .collect();
    let skipped = results.iter().filter(|r| r.is_none()).count();
    let pairs: Vec<PairDistortion> = results.into_iter().flatten().collect();
    let rel: Vec<f64> = pairs.iter().filter(|p| p.full_ip != 0.0).map(|p| p.rel_err).collect();
    let zero_full = pairs.len() - rel.len();
    let (median_rel_err, p90_rel_err) = if rel.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        (quantile(&rel, 0.5), quantile(&rel, 0.9))
    };
    let (full, hashed): (Vec<f64>, Vec<f64>) = pairs.iter().map(|p| (p.full_ip, p.hashed_ip)).unzip();
    let ip_spearman = spearman(&full, &hashed).ok();
    let (full, hashed): (Vec<f64>, Vec<f64>) = pairs
        .iter()
        .filter_map(|p| Some((p.full_cosine?, p.hashed_cosine?)))
        .unzip();
    let cosine_spearman = spearman(&full, &hashed).ok();
    DistortionReport {
        pairs,
        skipped,
        zero_full,
        median_rel_err,
        p90_rel_err,
        ip_spearman,
        cosine_spearman,
    }
}

impl DistortionReport {
    /// Per-pair CSV followed by a blank line and `key=value` summary lines.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "pair,full_ip,hashed_ip,abs_err,rel_err")?;
        for p in &self.pairs {
            writeln!(
                out,
                "{}|{},{:e},{:e},{:e},{:e}",
                p.a, p.b, p.full_ip, p.hashed_ip, p.abs_err, p.rel_err
            )?;
        }
        writeln!(out)?;
        self.write_summary(out)
    }

    pub fn write_summary<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let opt = |v: Option<f64>| v.map_or_else(|| "undefined".to_owned(), |x| x.to_string());
        writeln!(out, "pairs={}", self.pairs.len())?;
        writeln!(out, "skipped={}", self.skipped)?;
        writeln!(out, "zero_full={}", self.zero_full)?;
        writeln!(out, "median_rel_err={}", self.median_rel_err)?;
        writeln!(out, "p90_rel_err={}", self.p90_rel_err)?;
        writeln!(out, "ip_spearman={}", opt(self.ip_spearman))?;
        writeln!(out, "cosine_spearman={}", opt(self.cosine_spearman))
    }
}

/// Draws `count` distinct unordered pairs of distinct words, deterministically.
pub fn sample_pairs<S: AsRef<str>>(words: &[S], count: usize, seed: u64) -> Vec<(String, String)> {
    let n = words.len();
    if n < 2 {
        return Vec::new();
    }
    let max = n * (n - 1) / 2;
    let count = count.min(max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = rustc_hash::FxHashSet::default();
    let mut out = Vec::with_capacity(count);
    if count * 2 > max {
        let mut all: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        all.shuffle(&mut rng);
        all.truncate(count);
        return all
            .into_iter()
            .map(|(i, j)| (words[i].as_ref().to_owned(), words[j].as_ref().to_owned()))
            .collect();
    }
    while out.len() < count {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i == j || !seen.insert((i.min(j), i.max(j))) {
            continue;
        }
        out.push((words[i].as_ref().to_owned(), words[j].as_ref().to_owned()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedder::train;

    fn stream(s: &[&[&str]]) -> TokenStream {
        TokenStream::from_sentences(s.iter().map(|x| x.iter())).unwrap()
    }

    #[test]
    fn pair_entries() {
        let m: CooccurrenceMatrix = build_cooccurrence(&stream(&[&["a", "b"]]), 1, WeightSpec::Constant).unwrap();
        assert_eq!((m.entry("a", "b"), m.entry("b", "a")), (1.0, 1.0));
        assert_eq!(m.entry("a", "a"), 0.0);
    }

    #[test]
    fn hand_enumerated_entries() {
        // ordered pairs within distance 2 of "a b a": (0,1) (1,0) (1,2) (2,1) (0,2) (2,0)
        let m: CooccurrenceMatrix = build_cooccurrence(&stream(&[&["a", "b", "a"]]), 2, WeightSpec::Constant).unwrap();
        assert_eq!(m.entry("a", "b"), 2.0);
        assert_eq!(m.entry("b", "a"), 2.0);
        assert_eq!(m.entry("a", "a"), 2.0);
        assert_eq!(m.entry("b", "b"), 0.0);
    }

    #[test]
    fn gaussian_entries_sum_weights() {
        let g = WeightSpec::gaussian(1.0).unwrap();
        let m: CooccurrenceMatrix = build_cooccurrence(&stream(&[&["a", "x", "b", "a"]]), 3, g).unwrap();
        let q = |d| g.quantized(d).unwrap();
        assert_eq!(m.entry("a", "b"), q(2) + q(1));
        assert_eq!(m.entry("a", "a"), 2.0 * q(3));
        assert_eq!(m.entry("x", "a"), q(1) + q(2));
    }

    #[test]
    fn windows_stop_at_sentences() {
        let m: CooccurrenceMatrix = build_cooccurrence(&stream(&[&["a"], &["b"]]), 5, WeightSpec::Constant).unwrap();
        assert_eq!(m.entry("a", "b"), 0.0);
        assert_eq!(m.nnz(), 0);
    }

    #[test]
    fn vocab_cap_enforced() {
        let s = stream(&[&["a", "b", "c"]]);
        assert!(matches!(
            build_cooccurrence_capped::<f64>(&s, 1, WeightSpec::Constant, 2),
            Err(Error::Resource { vocab: 3, cap: 2 })
        ));
    }

    #[test]
    fn empty_matrix_projects_to_empty_table() {
        let m: CooccurrenceMatrix = build_cooccurrence(&TokenStream::new(), 2, WeightSpec::Constant).unwrap();
        let t = project(&m, &HasherSpec::new(8, 1, 2).unwrap()).unwrap();
        assert!(t.is_empty());
    }

    #[test]
    fn projection_matches_training() {
        let s = stream(&[
            &["the", "cat", "sat", "on", "the", "mat"],
            &["a", "cat", "ran"],
            &["the", "end"],
        ]);
        let p = TrainParams::with_defaults(5, 3, 77).unwrap();
        let m: CooccurrenceMatrix = build_cooccurrence(&s, 3, *p.weight()).unwrap();
        let trained: EmbeddingTable = train(&s, &p).unwrap();
        assert_eq!(project(&m, p.hasher()).unwrap(), trained);
    }

    #[test]
    fn lossless_projection_has_no_distortion() {
        let s = stream(&[&["a", "b", "c", "a"], &["c", "d"], &["b", "d", "a"]]);
        let words = ["a", "b", "c", "d"];
        let hasher = (0u64..)
            .map(|seed| HasherSpec::new(1024, seed, seed + 1).unwrap().unsigned())
            .find(|h| {
                let mut b: Vec<usize> = words.iter().map(|w| h.index(w)).collect();
                b.sort_unstable();
                b.dedup();
                b.len() == words.len()
            })
            .unwrap();
        let m: CooccurrenceMatrix = build_cooccurrence(&s, 2, WeightSpec::Constant).unwrap();
        let t = project(&m, &hasher).unwrap();
        let mut pairs: Vec<(&str, &str)> = Vec::new();
        for a in words {
            for b in words {
                pairs.push((a, b));
            }
        }
        pairs.push(("a", "unknown"));
        let r = distortion(&m, &t, &pairs);
        assert_eq!(r.skipped, 1);
        assert_eq!(r.pairs.len(), 16);
        assert!(r.pairs.iter().all(|p| p.abs_err == 0.0 && p.rel_err == 0.0));
        // diagonal pairs compare squared norms
        let aa = r.pairs.iter().find(|p| p.a == "a" && p.b == "a").unwrap();
        assert_eq!(aa.full_ip, m.inner_product("a", "a").unwrap());
        assert_eq!(r.median_rel_err, 0.0);
        assert_eq!(r.cosine_spearman, Some(1.0));
    }

    #[test]
    fn quantile_nearest_rank() {
        let v = [5.0, 1.0, 3.0, 2.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 3.0);
        assert_eq!(quantile(&v, 0.9), 5.0);
        assert_eq!(quantile(&v, 0.2), 1.0);
        assert_eq!(quantile(&[1.0, f64::INFINITY], 0.5), 1.0);
    }

    #[test]
    fn summary_lines() {
        let s = stream(&[&["a", "b", "c"]]);
        let m: CooccurrenceMatrix = build_cooccurrence(&s, 1, WeightSpec::Constant).unwrap();
        let t: EmbeddingTable = train(
            &s,
            &TrainParams::new(1, HasherSpec::new(4, 1, 2).unwrap(), WeightSpec::Constant).unwrap(),
        )
        .unwrap();
        let r = distortion(&m, &t, &[("a", "b"), ("a", "c")]);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("pair,full_ip,hashed_ip,abs_err,rel_err\na|b,"));
        assert!(text.contains("\n\npairs=2\nskipped=0\nzero_full=1\nmedian_rel_err="));
    }

    #[test]
    fn pair_sampling() {
        let words: Vec<String> = (0..50).map(|i| format!("w{i}")).collect();
        let p = sample_pairs(&words, 100, 3);
        assert_eq!(p.len(), 100);
        assert_eq!(p, sample_pairs(&words, 100, 3));
        assert!(p.iter().all(|(a, b)| a != b));
        let mut keys: Vec<_> = p.iter().map(|(a, b)| if a < b { (a, b) } else { (b, a) }).collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), 100);
        assert_eq!(sample_pairs(&words[..3], 10, 1).len(), 3);
    }
}
