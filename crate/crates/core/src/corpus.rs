//! Text ingestion and preprocessing.
//!
//! Raw text becomes a [`TokenStream`] of sentences. The remaining stages are
//! pure stream-to-stream transforms: frequency filtering, phrase joining and
//! sentence subsampling. Each stage also has a per-sentence form
//! ([`TokenFilter`], [`PhraseModel`], [`SentenceSampler`]) so that large inputs
//! can be processed without materializing the corpus.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::BufRead;

use indexmap::IndexSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::{FxHashMap, FxHashSet};

use crate::{Error, Result};

/// Separator placed between the parts of a joined phrase.
pub const PHRASE_SEPARATOR: char = '_';

/// Sentence-segmented token sequence with interned tokens.
///
/// Sentences are never empty, tokens are never empty and never contain
/// whitespace. Equality compares the token strings, not the interning.
#[derive(Clone, Default)]
pub struct TokenStream {
    symbols: IndexSet<Box<str>>,
    tokens: Vec<u32>,
    ends: Vec<usize>,
}

/// One sentence borrowed from a [`TokenStream`].
#[derive(Clone, Copy)]
pub struct Sentence<'a> {
    symbols: &'a IndexSet<Box<str>>,
    ids: &'a [u32],
}

impl<'a> Sentence<'a> {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Interned token ids, valid for [`TokenStream::symbol`].
    pub fn ids(&self) -> &'a [u32] {
        self.ids
    }

    pub fn iter(&self) -> impl Iterator<Item = &'a str> + 'a {
        let symbols = self.symbols;
        self.ids.iter().map(move |&id| &*symbols[id as usize])
    }

    pub fn to_vec(&self) -> Vec<String> {
        self.iter().map(str::to_owned).collect()
    }
}

fn check_token(token: &str) -> Result<()> {
    if token.is_empty() {
        return Err(Error::invalid("empty token"));
    }
    if token.chars().any(char::is_whitespace) {
        return Err(Error::invalid(format!("token {token:?} contains whitespace")));
    }
    Ok(())
}

impl TokenStream {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a stream from nested token lists, enforcing the stream invariants.
    pub fn from_sentences<I, S, T>(sentences: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = T>,
        T: AsRef<str>,
    {
        let mut stream = Self::new();
        for sentence in sentences {
            let tokens: Vec<T> = sentence.into_iter().collect();
            if tokens.is_empty() {
                return Err(Error::invalid("empty sentence"));
            }
            for t in &tokens {
                check_token(t.as_ref())?;
            }
            stream.push_unchecked(tokens.iter().map(AsRef::as_ref));
        }
        Ok(stream)
    }

    /// Appends a sentence. Empty sentences are ignored; invalid tokens are rejected.
    pub fn push_sentence<T: AsRef<str>>(&mut self, tokens: &[T]) -> Result<()> {
        for t in tokens {
            check_token(t.as_ref())?;
        }
        self.push_unchecked(tokens.iter().map(AsRef::as_ref));
        Ok(())
    }

    fn push_unchecked<'t>(&mut self, tokens: impl Iterator<Item = &'t str>) {
        let start = self.tokens.len();
        for t in tokens {
            let id = match self.symbols.get_index_of(t) {
                Some(id) => id,
                None => self.symbols.insert_full(t.into()).0,
            };
            self.tokens.push(id as u32);
        }
        if self.tokens.len() > start {
            self.ends.push(self.tokens.len());
        }
    }

    fn push_ids(&mut self, symbols: &IndexSet<Box<str>>, ids: impl Iterator<Item = u32>) {
        self.push_unchecked(ids.map(|id| &*symbols[id as usize]));
    }

    /// Number of sentences.
    pub fn len(&self) -> usize {
        self.ends.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ends.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.tokens.len()
    }

    /// Number of distinct tokens that occur in the stream.
    pub fn vocab_size(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbol(&self, id: u32) -> &str {
        &self.symbols[id as usize]
    }

    pub fn symbols(&self) -> impl ExactSizeIterator<Item = &str> {
        self.symbols.iter().map(|s| &**s)
    }

    pub fn sentence(&self, index: usize) -> Sentence<'_> {
        let start = if index == 0 { 0 } else { self.ends[index - 1] };
        Sentence {
            symbols: &self.symbols,
            ids: &self.tokens[start..self.ends[index]],
        }
    }

    pub fn sentences(&self) -> impl ExactSizeIterator<Item = Sentence<'_>> + '_ {
        (0..self.ends.len()).map(move |i| self.sentence(i))
    }

    pub fn to_vecs(&self) -> Vec<Vec<String>> {
        self.sentences().map(|s| s.to_vec()).collect()
    }

    /// Splits into `parts` contiguous shards at sentence boundaries.
    ///
    /// Shards are as even as possible by sentence count; trailing shards may
    /// be empty when there are fewer sentences than parts.
    pub fn split(&self, parts: usize) -> Vec<TokenStream> {
        let parts = parts.max(1);
        let n = self.len();
        (0..parts)
            .map(|p| {
                let lo = p * n / parts;
                let hi = (p + 1) * n / parts;
                let mut shard = TokenStream::new();
                for i in lo..hi {
                    shard.push_ids(&self.symbols, self.sentence(i).ids.iter().copied());
                }
                shard
            })
            .collect()
    }

    /// Concatenates streams in order.
    pub fn concat<'a>(streams: impl IntoIterator<Item = &'a TokenStream>) -> TokenStream {
        let mut out = TokenStream::new();
        for s in streams {
            for sentence in s.sentences() {
                out.push_ids(&s.symbols, sentence.ids.iter().copied());
            }
        }
        out
    }
}

impl PartialEq for TokenStream {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len()
            && self.token_count() == other.token_count()
            && self
                .sentences()
                .zip(other.sentences())
                .all(|(a, b)| a.len() == b.len() && a.iter().eq(b.iter()))
    }
}

impl Eq for TokenStream {}

impl fmt::Debug for TokenStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.sentences().map(|s| s.to_vec())).finish()
    }
}

impl<'a> FromIterator<Sentence<'a>> for TokenStream {
    fn from_iter<I: IntoIterator<Item = Sentence<'a>>>(iter: I) -> Self {
        let mut out = TokenStream::new();
        for s in iter {
            out.push_ids(s.symbols, s.ids.iter().copied());
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Tokenization

fn is_sentence_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | '\n' | '\r')
}

/// Lowercases a raw whitespace-delimited chunk and strips punctuation, keeping
/// hyphens, apostrophes and the phrase separator only between alphanumerics.
fn clean_token(raw: &str) -> String {
    let lower: Vec<char> = raw.chars().flat_map(char::to_lowercase).collect();
    let mut out = String::with_capacity(lower.len());
    let mut prev_alnum = false;
    for (i, &c) in lower.iter().enumerate() {
        if c.is_alphanumeric() {
            out.push(c);
            prev_alnum = true;
        } else if (c == '-' || c == '\'' || c == PHRASE_SEPARATOR)
            && prev_alnum
            && lower.get(i + 1).is_some_and(|n| n.is_alphanumeric())
        {
            out.push(c);
            prev_alnum = false;
        }
    }
    out
}

/// Appends the sentences found in `text` to `out`.
fn tokenize_into(text: &str, out: &mut Vec<Vec<String>>) {
    for chunk in text.split(is_sentence_terminal) {
        let sentence: Vec<String> = chunk
            .split_whitespace()
            .map(clean_token)
            .filter(|t| !t.is_empty())
            .collect();
        if !sentence.is_empty() {
            out.push(sentence);
        }
    }
}

/// Splits text into sentences of lowercased tokens.
///
/// Sentences end at `.`, `!`, `?` and line breaks. Tokens are whitespace
/// separated; punctuation is removed except hyphens and apostrophes inside
/// a word.
pub fn tokenize(text: &str) -> TokenStream {
    let mut sentences = Vec::new();
    tokenize_into(text, &mut sentences);
    let mut stream = TokenStream::new();
    for s in &sentences {
        stream.push_unchecked(s.iter().map(String::as_str));
    }
    stream
}

/// Like [`tokenize`], but validates the encoding first.
pub fn tokenize_bytes(bytes: &[u8]) -> Result<TokenStream> {
    match std::str::from_utf8(bytes) {
        Ok(text) => Ok(tokenize(text)),
        Err(e) => Err(Error::Ingest {
            offset: e.valid_up_to() as u64,
        }),
    }
}

/// Streaming sentence reader over UTF-8 text.
///
/// Reads one line at a time; because line breaks always end a sentence, no
/// state carries across lines.
pub struct SentenceReader<R> {
    reader: R,
    offset: u64,
    line: Vec<u8>,
    pending: std::collections::VecDeque<Vec<String>>,
    scratch: Vec<Vec<String>>,
    failed: bool,
}

impl<R: BufRead> SentenceReader<R> {
    pub fn new(reader: R) -> Self {
        Self {
            reader,
            offset: 0,
            line: Vec::new(),
            pending: Default::default(),
            scratch: Vec::new(),
            failed: false,
        }
    }

    fn fill(&mut self) -> Result<bool> {
        loop {
            self.line.clear();
            let read = self.reader.read_until(b'\n', &mut self.line)?;
            if read == 0 {
                return Ok(false);
            }
            let text = std::str::from_utf8(&self.line).map_err(|e| Error::Ingest {
                offset: self.offset + e.valid_up_to() as u64,
            })?;
            self.offset += read as u64;
            tokenize_into(text, &mut self.scratch);
            if !self.scratch.is_empty() {
                self.pending.extend(self.scratch.drain(..));
                return Ok(true);
            }
        }
    }
}

impl<R: BufRead> Iterator for SentenceReader<R> {
    type Item = Result<Vec<String>>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        if self.pending.is_empty() {
            match self.fill() {
                Ok(true) => {}
                Ok(false) => return None,
                Err(e) => {
                    self.failed = true;
                    return Some(Err(e));
                }
            }
        }
        self.pending.pop_front().map(Ok)
    }
}

// ---------------------------------------------------------------------------
// Frequencies

/// Exact token counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyTable {
    counts: HashMap<String, u64>,
    total: u64,
}

impl FrequencyTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_sentence<T: AsRef<str>>(&mut self, tokens: &[T]) {
        for t in tokens {
            let t = t.as_ref();
            match self.counts.get_mut(t) {
                Some(c) => *c += 1,
                None => {
                    self.counts.insert(t.to_owned(), 1);
                }
            }
        }
        self.total += tokens.len() as u64;
    }

    /// Adds another table's counts into this one (shard combination).
    pub fn merge(&mut self, other: &FrequencyTable) {
        for (t, &c) in &other.counts {
            *self.counts.entry(t.clone()).or_insert(0) += c;
        }
        self.total += other.total;
    }

    pub fn get(&self, token: &str) -> u64 {
        self.counts.get(token).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of distinct tokens.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(t, &c)| (t.as_str(), c))
    }

    /// Tokens by descending count, ties broken lexicographically.
    pub fn ranked(&self) -> Vec<(&str, u64)> {
        let mut v: Vec<_> = self.iter().collect();
        v.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v
    }
}

pub fn count_frequencies(stream: &TokenStream) -> FrequencyTable {
    let mut per_symbol = vec![0u64; stream.vocab_size()];
    for &id in &stream.tokens {
        per_symbol[id as usize] += 1;
    }
    let counts = stream
        .symbols()
        .zip(per_symbol)
        .filter(|&(_, c)| c > 0)
        .map(|(t, c)| (t.to_owned(), c))
        .collect();
    FrequencyTable {
        counts,
        total: stream.token_count() as u64,
    }
}

// ---------------------------------------------------------------------------
// Filtering

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FilterConfig {
    stoplist: HashSet<String>,
    percentile: Option<f64>,
}

impl FilterConfig {
    pub fn new(stoplist: impl IntoIterator<Item = impl Into<String>>, percentile: Option<f64>) -> Result<Self> {
        if let Some(p) = percentile {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::invalid(format!("percentile {p} outside (0, 1]")));
            }
        }
        Ok(Self {
            stoplist: stoplist.into_iter().map(Into::into).collect(),
            percentile,
        })
    }

    /// Reads a stoplist with one token per line; blank lines and `#` comments are skipped.
    pub fn read_stoplist(reader: impl BufRead) -> Result<Vec<String>> {
        let mut words = Vec::new();
        for line in reader.lines() {
            let line = line?;
            let w = line.trim();
            if !w.is_empty() && !w.starts_with('#') {
                words.push(w.to_lowercase());
            }
        }
        Ok(words)
    }

    pub fn stoplist(&self) -> &HashSet<String> {
        &self.stoplist
    }

    pub fn percentile(&self) -> Option<f64> {
        self.percentile
    }

    /// Resolves the config against corpus frequencies into a per-token filter.
    pub fn resolve(&self, freqs: &FrequencyTable) -> TokenFilter {
        let mut removed: FxHashSet<Box<str>> = self.stoplist.iter().map(|s| s.as_str().into()).collect();
        if let Some(p) = self.percentile {
            let ranked = freqs.ranked();
            let limit = p * freqs.total() as f64;
            // mass of the token itself plus every token ranked below it
            let mut suffix = freqs.total();
            for (token, count) in ranked {
                if suffix as f64 > limit {
                    removed.insert(token.into());
                }
                suffix -= count;
            }
        }
        TokenFilter { removed }
    }
}

/// Set of tokens to drop, resolved from a [`FilterConfig`].
#[derive(Debug, Clone, Default)]
pub struct TokenFilter {
    removed: FxHashSet<Box<str>>,
}

impl TokenFilter {
    pub fn removes(&self, token: &str) -> bool {
        self.removed.contains(token)
    }

    pub fn removed_count(&self) -> usize {
        self.removed.len()
    }

    pub fn apply(&self, sentence: Vec<String>) -> Vec<String> {
        if self.removed.is_empty() {
            return sentence;
        }
        sentence.into_iter().filter(|t| !self.removes(t)).collect()
    }
}

/// Removes stoplisted tokens and, when configured, every token ranked above
/// the percentile point of cumulative frequency mass, so the survivors are
/// the rarest types holding at most `percentile` of all tokens.
///
/// Tokens are ranked by descending count (ties lexicographic); a token is
/// removed when its own mass plus that of all lower-ranked tokens exceeds
/// the percentile.
pub fn filter_tokens(stream: &TokenStream, freqs: &FrequencyTable, cfg: &FilterConfig) -> TokenStream {
    let filter = cfg.resolve(freqs);
    let keep: Vec<bool> = stream.symbols().map(|s| !filter.removes(s)).collect();
    let mut out = TokenStream::new();
    for sentence in stream.sentences() {
        out.push_ids(
            &stream.symbols,
            sentence.ids.iter().copied().filter(|&id| keep[id as usize]),
        );
    }
    out
}

// ---------------------------------------------------------------------------
// Phrases

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhraseConfig {
    discount: f64,
    threshold: f64,
    passes: usize,
}

impl PhraseConfig {
    pub const DEFAULT_DISCOUNT: f64 = 5.0;

    pub fn new(discount: f64, threshold: f64, passes: usize) -> Result<Self> {
        if !(discount >= 0.0 && discount.is_finite()) {
            return Err(Error::invalid(format!(
                "phrase discount {discount} must be non-negative"
            )));
        }
        if !(threshold > 0.0 && threshold.is_finite()) {
            return Err(Error::invalid(format!("phrase threshold {threshold} must be positive")));
        }
        if passes < 1 {
            return Err(Error::invalid("phrase passes must be at least 1"));
        }
        Ok(Self {
            discount,
            threshold,
            passes,
        })
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn passes(&self) -> usize {
        self.passes
    }

    /// `(count(ab) - discount) / (count(a) * count(b))`.
    pub fn score(&self, pair: u64, left: u64, right: u64) -> f64 {
        (pair as f64 - self.discount) / (left as f64 * right as f64)
    }
}

/// Learned phrase-joining passes: for each pass, the adjacent pairs that merge.
#[derive(Debug, Clone, Default)]
pub struct PhraseModel {
    passes: Vec<PairSet>,
}

/// Joinable pairs keyed by left token.
type PairSet = FxHashMap<Box<str>, FxHashSet<Box<str>>>;

fn join_pass(sentence: Vec<String>, pairs: &PairSet) -> Vec<String> {
    if pairs.is_empty() || sentence.len() < 2 {
        return sentence;
    }
    let mut out = Vec::with_capacity(sentence.len());
    let mut iter = sentence.into_iter().peekable();
    while let Some(a) = iter.next() {
        let joins = match (pairs.get(a.as_str()), iter.peek()) {
            (Some(rights), Some(b)) => rights.contains(b.as_str()),
            _ => false,
        };
        if joins {
            let b = iter.next().expect("peeked");
            out.push(format!("{a}{PHRASE_SEPARATOR}{b}"));
        } else {
            out.push(a);
        }
    }
    out
}

impl PhraseModel {
    /// Learns phrase passes from a re-openable sentence source.
    ///
    /// `open` is called once per pass and must yield the same sentences each
    /// time; earlier passes are applied before counting for later ones.
    /// `first_counts`, when given, supplies the unigram counts for the first
    /// pass.
    pub fn learn<F, I>(mut open: F, first_counts: Option<&FrequencyTable>, cfg: &PhraseConfig) -> Result<Self>
    where
        F: FnMut() -> Result<I>,
        I: Iterator<Item = Result<Vec<String>>>,
    {
        let mut model = PhraseModel::default();
        for pass in 0..cfg.passes {
            let mut unigrams = FrequencyTable::new();
            let mut bigrams: FxHashMap<(Box<str>, Box<str>), u64> = FxHashMap::default();
            for sentence in open()? {
                let sentence = model.apply(sentence?);
                unigrams.add_sentence(&sentence);
                for w in sentence.windows(2) {
                    *bigrams.entry((w[0].as_str().into(), w[1].as_str().into())).or_insert(0) += 1;
                }
            }
            let counts = match first_counts {
                Some(f) if pass == 0 => f,
                _ => &unigrams,
            };
            let mut joinable = PairSet::default();
            for ((a, b), n) in bigrams {
                if cfg.score(n, counts.get(&a), counts.get(&b)) > cfg.threshold {
                    joinable.entry(a).or_default().insert(b);
                }
            }
            model.passes.push(joinable);
        }
        Ok(model)
    }

    /// Applies every pass, in order, to one sentence.
    pub fn apply(&self, mut sentence: Vec<String>) -> Vec<String> {
        for pairs in &self.passes {
            sentence = join_pass(sentence, pairs);
        }
        sentence
    }

    /// Total number of pair types that join across all passes.
    pub fn phrase_count(&self) -> usize {
        self.passes.iter().flat_map(|p| p.values()).map(|r| r.len()).sum()
    }
}

/// Joins high-scoring adjacent pairs into `a_b` tokens.
///
/// Each pass scans a sentence left to right and greedily merges a pair whose
/// score exceeds the threshold; a token takes part in at most one merge per
/// pass. Counts are recomputed between passes.
pub fn join_phrases(stream: &TokenStream, freqs: &FrequencyTable, cfg: &PhraseConfig) -> TokenStream {
    let open = || Ok(stream.sentences().map(|s| Ok(s.to_vec())));
    let model = PhraseModel::learn(open, Some(freqs), cfg).expect("in-memory source cannot fail");
    let mut out = TokenStream::new();
    for sentence in stream.sentences() {
        let joined = model.apply(sentence.to_vec());
        out.push_unchecked(joined.iter().map(String::as_str));
    }
    out
}

// ---------------------------------------------------------------------------
// Sampling

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    keep_probability: f64,
    seed: u64,
}

impl SamplerConfig {
    pub fn new(keep_probability: f64, seed: u64) -> Result<Self> {
        if !(keep_probability > 0.0 && keep_probability <= 1.0) {
            return Err(Error::invalid(format!(
                "keep probability {keep_probability} outside (0, 1]"
            )));
        }
        Ok(Self { keep_probability, seed })
    }

    pub fn keep_probability(&self) -> f64 {
        self.keep_probability
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sampler(&self) -> SentenceSampler {
        SentenceSampler {
            rng: ChaCha8Rng::seed_from_u64(self.seed),
            keep_probability: self.keep_probability,
        }
    }
}

/// Per-sentence Bernoulli selector; one draw per sentence, in stream order.
pub struct SentenceSampler {
    rng: ChaCha8Rng,
    keep_probability: f64,
}

impl SentenceSampler {
    pub fn keep(&mut self) -> bool {
        self.rng.gen_bool(self.keep_probability)
    }
}

/// Keeps each sentence independently with the configured probability.
pub fn sample_sentences(stream: &TokenStream, cfg: &SamplerConfig) -> TokenStream {
    let mut sampler = cfg.sampler();
    stream.sentences().filter(|_| sampler.keep()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn stream(s: &[&[&str]]) -> TokenStream {
        TokenStream::from_sentences(s.iter().map(|x| x.iter())).unwrap()
    }

    #[test]
    fn tokenize_splits_sentences() {
        assert_eq!(
            tokenize("The cat sat. The dog ran."),
            stream(&[&["the", "cat", "sat"], &["the", "dog", "ran"]])
        );
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("Don't stop!"), stream(&[&["don't", "stop"]]));
    }

    #[test]
    fn tokenize_punctuation_rules() {
        assert_eq!(
            tokenize("A well-known, 'quoted' word;\nnext line -- ok? yes"),
            stream(&[
                &["a", "well-known", "quoted", "word"],
                &["next", "line", "ok"],
                &["yes"]
            ])
        );
        assert_eq!(
            tokenize("trailing- -leading rock'n'roll"),
            stream(&[&["trailing", "leading", "rock'n'roll"]])
        );
        assert!(tokenize("... !!! ??\n\n").is_empty());
        assert_eq!(tokenize("new_york _x_ a__b"), stream(&[&["new_york", "x", "a_b"]]));
    }

    #[test]
    fn invalid_utf8_reports_offset() {
        let bytes = b"good text\nbad \xff here";
        match tokenize_bytes(bytes) {
            Err(Error::Ingest { offset }) => assert_eq!(offset, 14),
            other => panic!("unexpected {other:?}"),
        }
        let mut reader = SentenceReader::new(&bytes[..]);
        assert_eq!(reader.next().unwrap().unwrap(), vec!["good", "text"]);
        match reader.next() {
            Some(Err(Error::Ingest { offset })) => assert_eq!(offset, 14),
            other => panic!("unexpected {other:?}"),
        }
        assert!(reader.next().is_none());
    }

    #[test]
    fn reader_matches_tokenize() {
        let text = "One. Two three!\n\nFour five six? seven\r\neight";
        let streamed: Vec<Vec<String>> = SentenceReader::new(text.as_bytes()).map(|s| s.unwrap()).collect();
        assert_eq!(streamed, tokenize(text).to_vecs());
    }

    #[test]
    fn from_sentences_rejects_invalid() {
        assert!(TokenStream::from_sentences(vec![Vec::<&str>::new()]).is_err());
        assert!(TokenStream::from_sentences(vec![vec![""]]).is_err());
        assert!(TokenStream::from_sentences(vec![vec!["a b"]]).is_err());
    }

    #[test]
    fn frequency_examples() {
        let f = count_frequencies(&stream(&[&["a", "b", "a"]]));
        assert_eq!((f.get("a"), f.get("b"), f.total(), f.len()), (2, 1, 3, 2));
        let f = count_frequencies(&TokenStream::new());
        assert_eq!((f.total(), f.len()), (0, 0));
        let f = count_frequencies(&stream(&[&["a"], &["a"]]));
        assert_eq!((f.get("a"), f.total()), (2, 2));
    }

    #[test]
    fn stoplist_filter() {
        let s = stream(&[&["the", "cat"], &["the"]]);
        let cfg = FilterConfig::new(["the"], None).unwrap();
        assert_eq!(filter_tokens(&s, &count_frequencies(&s), &cfg), stream(&[&["cat"]]));
    }

    #[test]
    fn percentile_filter() {
        let s = stream(&[&["a", "a", "a", "a", "b"], &["a", "a", "a", "a", "c"]]);
        let f = count_frequencies(&s);
        let cfg = FilterConfig::new(Vec::<String>::new(), Some(0.5)).unwrap();
        assert_eq!(filter_tokens(&s, &f, &cfg), stream(&[&["b"], &["c"]]));
        let all = FilterConfig::new(Vec::<String>::new(), Some(1.0)).unwrap();
        assert_eq!(filter_tokens(&s, &f, &all), s);
        assert!(FilterConfig::new(Vec::<String>::new(), Some(0.0)).is_err());
        assert!(FilterConfig::new(Vec::<String>::new(), Some(1.5)).is_err());
    }

    #[test]
    fn percentile_ties_are_lexicographic() {
        // b and a tie at 2; a ranks first. suffix masses: a 1.0, b 0.6, c 0.2
        let s = stream(&[&["b", "a", "c", "b", "a"]]);
        let f = count_frequencies(&s);
        let cfg = FilterConfig::new(Vec::<String>::new(), Some(0.7)).unwrap();
        assert_eq!(filter_tokens(&s, &f, &cfg), stream(&[&["b", "c", "b"]]));
    }

    #[test]
    fn phrases_join_new_york() {
        let sentences: Vec<Vec<&str>> = (0..10)
            .map(|i| {
                if i % 2 == 0 {
                    vec!["i", "love", "new", "york"]
                } else {
                    vec!["new", "york", "is", "big"]
                }
            })
            .collect();
        let s = TokenStream::from_sentences(sentences).unwrap();
        let f = count_frequencies(&s);
        // score(new, york) = (10 - 0) / (10 * 10) = 0.1; the next best pairs
        // (i love, is big) score 5 / 25 = 0.2 and (love new, york is) 5 / 50.
        let cfg = PhraseConfig::new(0.0, 0.09, 1).unwrap();
        let out = join_phrases(&s, &f, &cfg);
        assert!(out.sentences().all(|s| s.iter().any(|t| t == "new_york")));
        let strict = PhraseConfig::new(0.0, 0.15, 1).unwrap();
        let out = join_phrases(&s, &f, &strict);
        assert!(out.sentences().all(|s| !s.iter().any(|t| t == "new_york")));
    }

    #[test]
    fn phrases_respect_threshold_and_discount() {
        let s = stream(&[&["a", "b", "c"], &["a", "b"]]);
        let f = count_frequencies(&s);
        assert_eq!(join_phrases(&s, &f, &PhraseConfig::new(0.0, 10.0, 3).unwrap()), s);
        assert_eq!(join_phrases(&s, &f, &PhraseConfig::new(2.0, 1e-9, 3).unwrap()), s);
        assert!(PhraseConfig::new(0.0, 0.0, 1).is_err());
        assert!(PhraseConfig::new(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn phrases_greedy_and_multi_pass() {
        let s = stream(&[&["x", "x", "x"]]);
        let f = count_frequencies(&s);
        let out = join_phrases(&s, &f, &PhraseConfig::new(0.0, 1e-9, 1).unwrap());
        assert_eq!(out, stream(&[&["x_x", "x"]]));
        let out = join_phrases(&s, &f, &PhraseConfig::new(0.0, 1e-9, 2).unwrap());
        assert_eq!(out, stream(&[&["x_x_x"]]));
    }

    #[test]
    fn sampling_examples() {
        let sentences: Vec<Vec<String>> = (0..10_000).map(|i| vec![format!("w{i}")]).collect();
        let s = TokenStream::from_sentences(sentences).unwrap();
        assert_eq!(sample_sentences(&s, &SamplerConfig::new(1.0, 7).unwrap()), s);
        for &p in &[0.1, 0.5, 0.9] {
            let cfg = SamplerConfig::new(p, 42).unwrap();
            let kept = sample_sentences(&s, &cfg);
            let expected = 10_000.0 * p;
            let band = 4.0 * (10_000.0 * p * (1.0 - p)).sqrt();
            assert!(
                (kept.len() as f64 - expected).abs() <= band,
                "p={p} kept={}",
                kept.len()
            );
            assert_eq!(kept, sample_sentences(&s, &cfg));
        }
        assert!(SamplerConfig::new(0.0, 1).is_err());
    }

    #[test]
    fn split_and_concat_roundtrip() {
        let s = stream(&[&["a", "b"], &["c"], &["d", "e", "f"]]);
        for parts in 1..6 {
            let shards = s.split(parts);
            assert_eq!(shards.len(), parts);
            assert_eq!(TokenStream::concat(&shards), s);
        }
    }

    fn arb_stream() -> impl Strategy<Value = Vec<Vec<String>>> {
        prop::collection::vec(prop::collection::vec("[a-e]{1,2}", 1..8), 0..12)
    }

    proptest! {
        #[test]
        fn tokenize_is_deterministic(text in "[a-zA-Z .!?'\\-\n]{0,80}") {
            let a = tokenize(&text);
            prop_assert_eq!(&a, &tokenize(&text));
            for s in a.sentences() {
                prop_assert!(!s.is_empty());
                for t in s.iter() {
                    prop_assert!(!t.is_empty() && !t.chars().any(char::is_whitespace));
                }
            }
        }

        #[test]
        fn filter_output_is_subset(raw in arb_stream(), p in 0.05f64..1.0, stop in "[a-e]") {
            let s = TokenStream::from_sentences(&raw).unwrap();
            let f = count_frequencies(&s);
            let cfg = FilterConfig::new([stop.clone()], Some(p)).unwrap();
            let resolved = cfg.resolve(&f);
            let out = filter_tokens(&s, &f, &cfg);
            for sentence in out.sentences() {
                prop_assert!(!sentence.is_empty());
                for t in sentence.iter() {
                    prop_assert!(f.get(t) > 0 && t != stop && !resolved.removes(t));
                }
            }
            let kept: Vec<String> = raw.iter().flatten().filter(|t| !resolved.removes(t)).cloned().collect();
            let got: Vec<String> = out.to_vecs().into_iter().flatten().collect();
            prop_assert_eq!(kept, got);
        }

        #[test]
        fn phrases_preserve_unigrams(raw in arb_stream(), delta in 0.0f64..2.0, th in 0.001f64..0.5, passes in 1usize..4) {
            let s = TokenStream::from_sentences(&raw).unwrap();
            let f = count_frequencies(&s);
            let out = join_phrases(&s, &f, &PhraseConfig::new(delta, th, passes).unwrap());
            let split: Vec<Vec<String>> = out
                .to_vecs()
                .into_iter()
                .map(|s| s.iter().flat_map(|t| t.split(PHRASE_SEPARATOR).map(str::to_owned).collect::<Vec<_>>()).collect())
                .collect();
            prop_assert_eq!(split, raw);
        }

        #[test]
        fn sampling_is_subsequence(raw in arb_stream(), p in 0.01f64..1.0, seed in any::<u64>()) {
            let s = TokenStream::from_sentences(&raw).unwrap();
            let cfg = SamplerConfig::new(p, seed).unwrap();
            let out = sample_sentences(&s, &cfg);
            prop_assert_eq!(&out, &sample_sentences(&s, &cfg));
            let mut it = raw.iter();
            for kept in out.to_vecs() {
                prop_assert!(it.any(|x| *x == kept));
            }
        }
    }
}
