//! Word-similarity benchmarks: dataset loading, Spearman correlation and the
//! dimension sweep against the exact co-occurrence reference.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;
use rustc_hash::FxHashSet;

use crate::corpus::TokenStream;
use crate::embedder::{train, EmbeddingTable, TrainParams};
use crate::oracle::CooccurrenceMatrix;
use crate::query;
use crate::{Error, Real, Result};

/// Word pairs with human similarity judgements.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityDataset {
    pairs: Vec<(String, String, f64)>,
}

impl SimilarityDataset {
    /// Validates: non-empty, finite scores, no duplicate unordered pair.
    pub fn new(pairs: Vec<(String, String, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::invalid("similarity dataset is empty"));
        }
        let mut seen = FxHashSet::default();
        for (a, b, s) in &pairs {
            if a.is_empty() || b.is_empty() {
                return Err(Error::invalid("empty word in similarity dataset"));
            }
            if !s.is_finite() {
                return Err(Error::invalid(format!("score for ({a}, {b}) is not finite")));
            }
            let key = if a <= b { (a, b) } else { (b, a) };
            if !seen.insert(key) {
                return Err(Error::invalid(format!("duplicate pair ({a}, {b})")));
            }
        }
        Ok(Self { pairs })
    }

    /// Parses tab- or comma-separated `word,word,score` rows.
    ///
    /// The delimiter is taken from the first data line. A first row whose
    /// score does not parse is treated as a header; blank lines and lines
    /// starting with `#` are ignored.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut pairs = Vec::new();
        let mut delimiter = None;
        let mut seen_row = false;
        let mut seen: FxHashSet<(String, String)> = FxHashSet::default();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let text = line.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let delim = *delimiter.get_or_insert(if text.contains('\t') { '\t' } else { ',' });
            let fields: Vec<&str> = text.split(delim).map(str::trim).collect();
            let first = !seen_row;
            seen_row = true;
            if fields.len() < 3 {
                return Err(Error::parse(
                    lineno,
                    format!("expected 3 fields, found {}", fields.len()),
                ));
            }
            let score: f64 = match fields[2].parse() {
                Ok(s) => s,
                Err(_) if first => continue,
                Err(_) => return Err(Error::parse(lineno, format!("bad score {:?}", fields[2]))),
            };
            if !score.is_finite() {
                return Err(Error::parse(lineno, "score is not finite"));
            }
            let (a, b) = (fields[0].to_lowercase(), fields[1].to_lowercase());
            if a.is_empty() || b.is_empty() {
                return Err(Error::parse(lineno, "empty word"));
            }
            let key = if a <= b {
                (a.clone(), b.clone())
            } else {
                (b.clone(), a.clone())
            };
            if !seen.insert(key) {
                return Err(Error::parse(lineno, format!("duplicate pair ({a}, {b})")));
            }
            pairs.push((a, b, score));
        }
        if pairs.is_empty() {
            return Err(Error::invalid("similarity dataset has no rows"));
        }
        Self::new(pairs)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(BufReader::new(File::open(path)?))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(String, String, f64)] {
        &self.pairs
    }

    /// Writes tab-separated rows with a header, readable by [`parse`](Self::parse).
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "word1\tword2\tscore")?;
        for (a, b, s) in &self.pairs {
            writeln!(out, "{a}\t{b}\t{s}")?;
        }
        Ok(())
    }
}

/// Average ranks (1-based); tied values share the mean of their positions.
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut out = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            out[i] = rank;
        }
        start = end;
    }
    out
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::invalid(format!("length mismatch: {} vs {}", xs.len(), ys.len())));
    }
    if xs.len() < 2 {
        return Err(Error::UndefinedCorrelation("fewer than two observations"));
    }
    if xs.iter().chain(ys).any(|v| v.is_nan()) {
        return Err(Error::invalid("NaN in correlation input"));
    }
    pearson(&ranks(xs), &ranks(ys)).ok_or(Error::UndefinedCorrelation("constant input"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub spearman_rho: f64,
    pub covered: usize,
    pub skipped: usize,
}

/// Scores each pair with `similarity`; pairs it returns `None` for are skipped.
pub fn evaluate_by<F>(dataset: &SimilarityDataset, similarity: F) -> Result<EvalReport>
where
    F: Fn(&str, &str) -> Option<f64>,
{
    let (mut model, mut human) = (Vec::new(), Vec::new());
    for (a, b, s) in dataset.pairs() {
        if let Some(m) = similarity(a, b) {
            model.push(m);
            human.push(*s);
        }
    }
    let covered = model.len();
    if covered < 2 {
        return Err(Error::Evaluation(format!(
            "only {covered} of {} pairs are in the vocabulary",
            dataset.len()
        )));
    }
    let spearman_rho = spearman(&model, &human).map_err(|e| Error::Evaluation(e.to_string()))?;
    Ok(EvalReport {
        spearman_rho,
        covered,
        skipped: dataset.len() - covered,
    })
}

/// Cosine similarity of table vectors. Pairs with an unknown word or a zero vector are skipped.
pub fn evaluate<T: Real>(table: &EmbeddingTable<T>, dataset: &SimilarityDataset) -> Result<EvalReport> {
    evaluate_by(dataset, |a, b| query::cosine(table.get(a)?, table.get(b)?).ok())
}

/// Same as [`evaluate`] with the exact co-occurrence rows as vectors.
pub fn evaluate_oracle<T: Real>(matrix: &CooccurrenceMatrix<T>, dataset: &SimilarityDataset) -> Result<EvalReport> {
    evaluate_by(dataset, |a, b| matrix.cosine(a, b)?.ok())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub dimension: usize,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub points: Vec<SweepPoint>,
    pub oracle: EvalReport,
}

impl Sweep {
    /// CSV `n,rho,rho_oracle,covered,skipped`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "n,rho,rho_oracle,covered,skipped")?;
        for p in &self.points {
            writeln!(
                out,
                "{},{},{},{},{}",
                p.dimension, p.report.spearman_rho, self.oracle.spearman_rho, p.report.covered, p.report.skipped
            )?;
        }
        Ok(())
    }
}

/// Trains one table per dimension, sharing every other parameter, and
/// evaluates each alongside the exact matrix reference.
pub fn sweep_dimensions(
    stream: &TokenStream,
    base: &TrainParams,
    dims: &[usize],
    dataset: &SimilarityDataset,
    oracle: &CooccurrenceMatrix<f64>,
) -> Result<Sweep> {
    if dims.is_empty() {
        return Err(Error::invalid("no dimensions to sweep"));
    }
    if dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("sweep dimensions must be strictly ascending"));
    }
    if oracle.window() != base.window() || oracle.weight() != base.weight() {
        return Err(Error::invalid(
            "reference matrix was built with different window or weight",
        ));
    }
    let oracle = evaluate_oracle(oracle, dataset)?;
    let points = dims
        .par_iter()
        .map(|&n| {
            let table: EmbeddingTable<f64> = train(stream, &base.with_dimension(n)?)?;
            Ok(SweepPoint {
                dimension: n,
                report: evaluate(&table, dataset)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Sweep { points, oracle })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hashing::{HasherSpec, WeightSpec};
    use crate::oracle::build_cooccurrence;
    use proptest::prelude::*;

    fn ds(text: &str) -> Result<SimilarityDataset> {
        SimilarityDataset::parse(text.as_bytes())
    }

    #[test]
    fn spearman_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((spearman(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        assert!((spearman(&x, &[4.0, 3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
        // d = (0, 1, 1, 0): 1 - 6 * 2 / (4 * 15)
        assert!((spearman(&x, &[1.0, 3.0, 2.0, 4.0]).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn spearman_errors() {
        assert!(matches!(
            spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::UndefinedCorrelation(_))
        ));
        assert!(matches!(spearman(&[1.0], &[1.0]), Err(Error::UndefinedCorrelation(_))));
        assert!(spearman(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn average_ranks() {
        assert_eq!(ranks(&[10.0, 20.0, 10.0, 5.0]), vec![2.5, 4.0, 2.5, 1.0]);
    }

    #[test]
    fn parse_rows() {
        let d = ds("Tiger\tcat\t7.35\n").unwrap();
        assert_eq!(d.pairs(), &[("tiger".to_owned(), "cat".to_owned(), 7.35)]);
        let d = ds("Word 1,Word 2,Score\nlove,sex,6.77\n\n# note\nstock,jaguar,0.92\n").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.pairs()[1].0, "stock");
    }

    #[test]
    fn parse_errors() {
        assert!(ds("").is_err());
        assert!(ds("a,b,score\n").is_err());
        match ds("a\tb\t1\nc\td\tx\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match ds("a\tb\t1\nB\tA\t2\n") {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("(b, a)"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(ds("a\tb\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn tsv_round_trip() {
        let d = ds("x,y,1.5\nx,z,-2\n").unwrap();
        let mut buf = Vec::new();
        d.write_tsv(&mut buf).unwrap();
        assert_eq!(SimilarityDataset::parse(&buf[..]).unwrap(), d);
    }

    fn toy_table() -> EmbeddingTable {
        let p = TrainParams::new(1, HasherSpec::new(2, 1, 2).unwrap(), WeightSpec::Constant).unwrap();
        let rows = [
            ("a", vec![1.0, 0.0]),
            ("b", vec![1.0, 0.1]),
            ("c", vec![1.0, 1.0]),
            ("d", vec![0.0, 1.0]),
            ("z", vec![0.0, 0.0]),
        ];
        EmbeddingTable::from_rows(p, rows, 0).unwrap()
    }

    #[test]
    fn evaluate_perfect_order_and_coverage() {
        let d = ds("a,b,9\na,c,5\na,d,1\na,oov,3\nz,a,2\n").unwrap();
        let r = evaluate(&toy_table(), &d).unwrap();
        assert_eq!(r.spearman_rho, 1.0);
        assert_eq!((r.covered, r.skipped), (3, 2));
    }

    #[test]
    fn evaluate_all_oov_fails() {
        let d = ds("p,q,1\nr,s,2\n").unwrap();
        assert!(matches!(evaluate(&toy_table(), &d), Err(Error::Evaluation(_))));
    }

    #[test]
    fn sweep_single_point_matches_evaluate() {
        let s = crate::corpus::tokenize(
            "the cat sat on the mat. the dog sat on the log. a cat and a dog ran. the mat and the log lay.",
        );
        let d = ds("cat,dog,8\nmat,log,7\ncat,mat,2\ndog,log,3\nsat,ran,5\n").unwrap();
        let base = TrainParams::with_defaults(16, 3, 5).unwrap();
        let m = build_cooccurrence(&s, 3, *base.weight()).unwrap();
        let sweep = sweep_dimensions(&s, &base, &[16], &d, &m).unwrap();
        let table: EmbeddingTable = train(&s, &base).unwrap();
        assert_eq!(sweep.points[0].report, evaluate(&table, &d).unwrap());
        // reference is independent of the swept dimensions
        let again = sweep_dimensions(&s, &base, &[4, 64], &d, &m).unwrap();
        assert_eq!(again.oracle, sweep.oracle);
        assert!(sweep_dimensions(&s, &base, &[64, 4], &d, &m).is_err());
        let mut csv = Vec::new();
        again.write_csv(&mut csv).unwrap();
        assert!(String::from_utf8(csv)
            .unwrap()
            .starts_with("n,rho,rho_oracle,covered,skipped\n4,"));
    }

    proptest! {
        #[test]
        fn spearman_invariant_under_monotone_maps(xs in prop::collection::vec(-100.0f64..100.0, 3..30), seed in any::<u64>()) {
            let ys: Vec<f64> = xs.iter().enumerate().map(|(i, x)| x * 0.5 + ((i as u64 ^ seed) % 7) as f64).collect();
            let base = spearman(&xs, &ys);
            let xt: Vec<f64> = xs.iter().map(|x| x.exp()).collect();
            let yt: Vec<f64> = ys.iter().map(|y| 3.0 * y - 1.0).collect();
            match (base, spearman(&xt, &yt)) {
                (Ok(a), Ok(b)) => prop_assert!((a - b).abs() < 1e-12),
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
            }
        }
    }
}
