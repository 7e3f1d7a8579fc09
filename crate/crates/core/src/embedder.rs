//! Streaming construction of hashed word vectors.
//!
//! For every occurrence of a word `w` and every context word `c` within `k`
//! positions in the same sentence, bucket `h(c)` of `w`'s vector receives
//! `xi(c) * f(d)`. The [`Trainer`] realizes this in one forward pass: each new
//! token is paired with the up to `k` tokens before it, and both vectors are
//! updated, so every ordered co-occurrence contributes exactly once.
//!
//! Tables trained on disjoint sentence sets combine by addition ([`merge`]).

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use indexmap::IndexSet;
use rustc_hash::FxBuildHasher;

use crate::corpus::TokenStream;
use crate::hashing::{HasherSpec, SignMode, WeightSpec};
use crate::{Error, Real, Result};

type WordSet = IndexSet<Box<str>, FxBuildHasher>;

/// First token of an embedding file header.
pub const FILE_MAGIC: &str = "hash2vec";

/// Window size, hash functions and weighting for one training run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainParams {
    window: usize,
    hasher: HasherSpec,
    weight: WeightSpec,
}

impl TrainParams {
    pub fn new(window: usize, hasher: HasherSpec, weight: WeightSpec) -> Result<Self> {
        if window < 1 {
            return Err(Error::invalid("context window must be at least 1"));
        }
        Ok(Self { window, hasher, weight })
    }

    /// Gaussian-weighted params with `sigma = window / 2` and a derived sign seed.
    pub fn with_defaults(dimension: usize, window: usize, seed: u64) -> Result<Self> {
        Self::new(
            window,
            HasherSpec::with_seed(dimension, seed)?,
            WeightSpec::default_for_window(window),
        )
    }

    pub fn dimension(&self) -> usize {
        self.hasher.dimension()
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn hasher(&self) -> &HasherSpec {
        &self.hasher
    }

    pub fn weight(&self) -> &WeightSpec {
        &self.weight
    }

    /// Same params with a different embedding width.
    pub fn with_dimension(&self, dimension: usize) -> Result<Self> {
        let h = &self.hasher;
        let mut hasher = HasherSpec::new(dimension, h.seed(), h.sign_seed())?;
        if h.sign_mode() == SignMode::Unsigned {
            hasher = hasher.unsigned();
        }
        Self::new(self.window, hasher, self.weight)
    }

    /// Same params with different hash seeds.
    pub fn with_seeds(&self, seed: u64, sign_seed: u64) -> Result<Self> {
        let mut hasher = HasherSpec::new(self.dimension(), seed, sign_seed)?;
        if self.hasher.sign_mode() == SignMode::Unsigned {
            hasher = hasher.unsigned();
        }
        Self::new(self.window, hasher, self.weight)
    }

    /// First differing field, if any, as `(name, self, other)`.
    fn difference(&self, other: &TrainParams) -> Option<(&'static str, String, String)> {
        let (a, b) = (&self.hasher, &other.hasher);
        let fields = [
            ("dimension", a.dimension().to_string(), b.dimension().to_string()),
            ("window", self.window.to_string(), other.window.to_string()),
            ("weight", self.weight.to_string(), other.weight.to_string()),
            ("seed", a.seed().to_string(), b.seed().to_string()),
            ("sign_seed", a.sign_seed().to_string(), b.sign_seed().to_string()),
            (
                "sign mode",
                format!("{:?}", a.sign_mode()),
                format!("{:?}", b.sign_mode()),
            ),
        ];
        fields.into_iter().find(|(_, l, r)| l != r)
    }
}

/// Words mapped to dense vectors of a fixed width.
#[derive(Clone)]
pub struct EmbeddingTable<T = f64> {
    params: TrainParams,
    words: WordSet,
    data: Vec<T>,
    token_count: u64,
}

impl<T: Real> EmbeddingTable<T> {
    /// Table with no words.
    pub fn empty(params: TrainParams) -> Self {
        Self {
            params,
            words: WordSet::default(),
            data: Vec::new(),
            token_count: 0,
        }
    }

    /// Builds a table from explicit rows; each must have `dimension` finite components.
    pub fn from_rows<W, I>(params: TrainParams, rows: I, token_count: u64) -> Result<Self>
    where
        W: AsRef<str>,
        I: IntoIterator<Item = (W, Vec<T>)>,
    {
        let mut table = Self::empty(params);
        table.token_count = token_count;
        let n = params.dimension();
        for (word, row) in rows {
            let word = word.as_ref();
            if row.len() != n {
                return Err(Error::invalid(format!(
                    "vector of {word:?} has {} components, expected {n}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { word: word.into() });
            }
            if !table.words.insert(word.into()) {
                return Err(Error::invalid(format!("duplicate word {word:?}")));
            }
            table.data.extend(row);
        }
        Ok(table)
    }

    pub fn params(&self) -> &TrainParams {
        &self.params
    }

    pub fn dimension(&self) -> usize {
        self.params.dimension()
    }

    /// Number of words.
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Corpus tokens consumed to build the table.
    pub fn token_count(&self) -> u64 {
        self.token_count
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.words.get_index_of(word)
    }

    pub fn word(&self, index: usize) -> &str {
        &self.words[index]
    }

    pub fn words(&self) -> impl ExactSizeIterator<Item = &str> {
        self.words.iter().map(|w| &**w)
    }

    pub fn row(&self, index: usize) -> &[T] {
        let n = self.dimension();
        &self.data[index * n..(index + 1) * n]
    }

    pub fn get(&self, word: &str) -> Option<&[T]> {
        self.index_of(word).map(|i| self.row(i))
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (&str, &[T])> {
        let n = self.dimension().max(1);
        self.words.iter().map(|w| &**w).zip(self.data.chunks_exact(n))
    }

    /// Applies `f` to every component, producing a table of another scalar type.
    pub fn map<U: Real>(&self, f: impl Fn(T) -> U) -> EmbeddingTable<U> {
        EmbeddingTable {
            params: self.params,
            words: self.words.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
            token_count: self.token_count,
        }
    }

    /// Converts the component type, rounding when narrowing.
    pub fn cast<U: Real>(&self) -> EmbeddingTable<U> {
        self.map(|v| U::from_f64_lossy(v.as_f64()))
    }

    /// Approximate heap footprint of the table in bytes.
    pub fn heap_bytes(&self) -> usize {
        let words: usize = self.words.iter().map(|w| w.len()).sum();
        self.data.capacity() * std::mem::size_of::<T>()
            + words
            + self.words.capacity() * (std::mem::size_of::<Box<str>>() + 2 * std::mem::size_of::<usize>())
    }

    /// Adds `other` into `self`: union of vocabularies, componentwise sums.
    pub fn merge_from(&mut self, other: &EmbeddingTable<T>) -> Result<()> {
        if let Some((field, left, right)) = self.params.difference(&other.params) {
            return Err(Error::ParamMismatch { field, left, right });
        }
        let n = self.dimension();
        for (word, row) in other.iter() {
            let (i, fresh) = self.words.insert_full(word.into());
            if fresh {
                self.data.extend_from_slice(row);
            } else {
                for (acc, &v) in self.data[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *acc += v;
                }
            }
        }
        self.token_count += other.token_count;
        Ok(())
    }
}

impl<T: Real> PartialEq for EmbeddingTable<T> {
    /// Same params, token count, vocabulary and vectors; word order is ignored.
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params
            && self.token_count == other.token_count
            && self.len() == other.len()
            && self.iter().all(|(w, row)| other.get(w).is_some_and(|r| r == row))
    }
}

impl<T: Real> fmt::Debug for EmbeddingTable<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EmbeddingTable")
            .field("params", &self.params)
            .field("words", &self.len())
            .field("token_count", &self.token_count)
            .finish()
    }
}

/// Single-pass streaming trainer.
///
/// Live state is the table itself plus the current sentence; nothing of
/// size vocabulary squared is ever allocated.
pub struct Trainer<T: Real = f64> {
    params: TrainParams,
    weights: Vec<T>,
    words: WordSet,
    data: Vec<T>,
    buckets: Vec<u32>,
    signs: Vec<T>,
    token_count: u64,
    ids: Vec<u32>,
}

impl<T: Real> Trainer<T> {
    pub fn new(params: TrainParams) -> Self {
        Self {
            weights: params.weight.table(params.window),
            params,
            words: WordSet::default(),
            data: Vec::new(),
            buckets: Vec::new(),
            signs: Vec::new(),
            token_count: 0,
            ids: Vec::new(),
        }
    }

    pub fn params(&self) -> &TrainParams {
        &self.params
    }

    fn row_id(&mut self, token: &str) -> u32 {
        if let Some(i) = self.words.get_index_of(token) {
            return i as u32;
        }
        let hasher = &self.params.hasher;
        self.buckets.push(hasher.index(token) as u32);
        self.signs.push(T::from_f64_lossy(f64::from(hasher.sign(token))));
        self.data.extend(std::iter::repeat_n(T::zero(), hasher.dimension()));
        self.words.insert_full(token.into()).0 as u32
    }

    /// Pairs every position with the `window` positions before it and updates
    /// both words' vectors.
    fn accumulate(&mut self) {
        let n = self.params.dimension();
        let ids = &self.ids;
        for p in 1..ids.len() {
            let w = ids[p] as usize;
            for (d, &weight) in self.weights.iter().enumerate().take(p) {
                let c = ids[p - 1 - d] as usize;
                self.data[w * n + self.buckets[c] as usize] += self.signs[c] * weight;
                self.data[c * n + self.buckets[w] as usize] += self.signs[w] * weight;
            }
        }
        self.token_count += ids.len() as u64;
    }

    /// Consumes one sentence. Context never crosses sentence boundaries.
    pub fn feed_sentence<S: AsRef<str>>(&mut self, tokens: &[S]) {
        let mut ids = std::mem::take(&mut self.ids);
        ids.clear();
        for t in tokens {
            ids.push(self.row_id(t.as_ref()));
        }
        self.ids = ids;
        self.accumulate();
    }

    /// Consumes every sentence of an in-memory stream.
    pub fn feed_stream(&mut self, stream: &TokenStream) {
        let mut rows: Vec<u32> = stream.symbols().map(|_| u32::MAX).collect();
        for sentence in stream.sentences() {
            let mut ids = std::mem::take(&mut self.ids);
            ids.clear();
            for &sym in sentence.ids() {
                let slot = &mut rows[sym as usize];
                if *slot == u32::MAX {
                    *slot = self.row_id(stream.symbol(sym));
                }
                ids.push(*slot);
            }
            self.ids = ids;
            self.accumulate();
        }
    }

    pub fn token_count(&self) -> u64 {
        self.token_count
    }

    /// Finishes training; fails if any component overflowed.
    pub fn finish(self) -> Result<EmbeddingTable<T>> {
        let n = self.params.dimension();
        if let Some(pos) = self.data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                word: self.words[pos / n].to_string(),
            });
        }
        Ok(EmbeddingTable {
            params: self.params,
            words: self.words,
            data: self.data,
            token_count: self.token_count,
        })
    }
}

/// Trains a table over `stream` in one pass.
pub fn train<T: Real>(stream: &TokenStream, params: &TrainParams) -> Result<EmbeddingTable<T>> {
    if stream.is_empty() {
        return Err(Error::EmptyStream);
    }
    let mut trainer = Trainer::new(*params);
    trainer.feed_stream(stream);
    trainer.finish()
}

/// Trains `shards` contiguous pieces of `stream` in parallel and merges them.
///
/// The result equals [`train`] on the whole stream.
pub fn train_sharded<T: Real>(stream: &TokenStream, params: &TrainParams, shards: usize) -> Result<EmbeddingTable<T>> {
    use rayon::prelude::*;
    if stream.is_empty() {
        return Err(Error::EmptyStream);
    }
    let parts = stream.split(shards.max(1));
    let tables = parts
        .par_iter()
        .map(|part| {
            let mut trainer = Trainer::new(*params);
            trainer.feed_stream(part);
            trainer.finish()
        })
        .collect::<Result<Vec<_>>>()?;
    merge(&tables)
}

/// Sums tables trained with identical params.
///
/// The vocabulary is the union; words missing from a table count as zero
/// vectors. Token counts add.
pub fn merge<T: Real>(tables: &[EmbeddingTable<T>]) -> Result<EmbeddingTable<T>> {
    let (first, rest) = tables.split_first().ok_or_else(|| Error::invalid("nothing to merge"))?;
    let mut out = first.clone();
    for t in rest {
        out.merge_from(t)?;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Text vector files

/// Writes the table in text form.
///
/// Header: `hash2vec <n> <k> <weight-kind> <sigma> <seed> <sign_seed> <vocab_size> <token_count>`,
/// then one `<word> <c1> ... <cn>` line per word in lexicographic order.
/// Components use Rust's shortest round-trip scientific notation.
pub fn export<T: Real, W: Write>(table: &EmbeddingTable<T>, out: W) -> Result<()> {
    let p = table.params();
    let h = p.hasher();
    if h.sign_mode() == SignMode::Unsigned {
        return Err(Error::invalid(
            "tables built with the unsigned test hasher cannot be exported",
        ));
    }
    let mut out = BufWriter::new(out);
    let sigma = match p.weight().sigma() {
        Some(s) => format!("{s:e}"),
        None => "0".to_owned(),
    };
    writeln!(
        out,
        "{FILE_MAGIC} {} {} {} {sigma} {} {} {} {}",
        p.dimension(),
        p.window(),
        p.weight().kind(),
        h.seed(),
        h.sign_seed(),
        table.len(),
        table.token_count()
    )?;
    let mut order: Vec<usize> = (0..table.len()).collect();
    order.sort_unstable_by(|&a, &b| table.word(a).cmp(table.word(b)));
    for i in order {
        out.write_all(table.word(i).as_bytes())?;
        for v in table.row(i) {
            write!(out, " {v:e}")?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

fn parse_field<F: std::str::FromStr>(field: Option<&str>, line: usize, what: &str) -> Result<F> {
    let raw = field.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    raw.parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} {raw:?}")))
}

fn parse_header(line: &str) -> Result<(TrainParams, usize, u64)> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.first() != Some(&FILE_MAGIC) {
        return Err(Error::parse(1, format!("expected header starting with {FILE_MAGIC:?}")));
    }
    if !(8..=9).contains(&fields.len()) {
        return Err(Error::parse(
            1,
            format!("header has {} fields, expected 8 or 9", fields.len()),
        ));
    }
    let mut it = fields.iter().copied().skip(1);
    let n: usize = parse_field(it.next(), 1, "dimension")?;
    let k: usize = parse_field(it.next(), 1, "window")?;
    let kind = it.next().unwrap_or_default();
    let sigma: f64 = parse_field(it.next(), 1, "sigma")?;
    let seed: u64 = parse_field(it.next(), 1, "seed")?;
    let sign_seed: u64 = parse_field(it.next(), 1, "sign seed")?;
    let vocab: usize = parse_field(it.next(), 1, "vocabulary size")?;
    let tokens: u64 = match it.next() {
        Some(t) => parse_field(Some(t), 1, "token count")?,
        None => 0,
    };
    let weight = match kind {
        "constant" => WeightSpec::Constant,
        "gaussian" => WeightSpec::gaussian(sigma).map_err(|e| Error::parse(1, e.to_string()))?,
        other => return Err(Error::parse(1, format!("unknown weight kind {other:?}"))),
    };
    let params = HasherSpec::new(n, seed, sign_seed)
        .and_then(|h| TrainParams::new(k, h, weight))
        .map_err(|e| Error::parse(1, e.to_string()))?;
    Ok((params, vocab, tokens))
}

/// Reads a table written by [`export`].
pub fn import<T: Real, R: BufRead>(input: R) -> Result<EmbeddingTable<T>> {
    let mut lines = input.lines();
    let header = lines.next().transpose()?.ok_or_else(|| Error::parse(1, "empty file"))?;
    let (params, vocab, tokens) = parse_header(&header)?;
    let n = params.dimension();
    let mut table = EmbeddingTable::<T>::empty(params);
    table.token_count = tokens;
    table.data.reserve(vocab.saturating_mul(n).min(1 << 28));
    let mut last = 1;
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        last = lineno;
        let mut fields = line.split(' ');
        let word = fields.next().unwrap_or_default();
        if word.is_empty() {
            return Err(Error::parse(lineno, "missing word"));
        }
        let start = table.data.len();
        for field in fields {
            let v: T = field
                .parse()
                .map_err(|_| Error::parse(lineno, format!("invalid component {field:?}")))?;
            if !v.is_finite() {
                return Err(Error::parse(lineno, format!("non-finite component {field:?}")));
            }
            table.data.push(v);
        }
        let got = table.data.len() - start;
        if got != n {
            return Err(Error::parse(
                lineno,
                format!("row has {got} components, header says {n}"),
            ));
        }
        if !table.words.insert(word.into()) {
            return Err(Error::parse(lineno, format!("duplicate word {word:?}")));
        }
    }
    if table.len() != vocab {
        return Err(Error::parse(
            last,
            format!("header declares {vocab} words, file has {}", table.len()),
        ));
    }
    Ok(table)
}

pub fn save<T: Real>(table: &EmbeddingTable<T>, path: impl AsRef<Path>) -> Result<()> {
    export(table, File::create(path)?)
}

pub fn load<T: Real>(path: impl AsRef<Path>) -> Result<EmbeddingTable<T>> {
    import(BufReader::new(File::open(path)?))
}
