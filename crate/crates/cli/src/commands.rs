use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::mpsc::sync_channel;
use std::thread;

use hash2vec::embedder::{self, EmbeddingTable, TrainParams, Trainer};
use hash2vec::eval::{self, SimilarityDataset};
use hash2vec::hashing::{HasherSpec, WeightSpec};
use hash2vec::oracle::{self, build_cooccurrence_capped};
use hash2vec::query::{self, AnalogyMode, Neighbor};
use hash2vec::synth::{self, Lexicon};
use hash2vec::{Cooccurrence, Embeddings, Real};
use serde_json::json;

use crate::args::{Command, ExportFormat, ModelArgs, WeightKind};
use crate::pipeline::Pipeline;
use crate::Failure;

/// Sentences per message to a training worker.
const BATCH: usize = 512;

pub fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Preprocess {
            input,
            output,
            prep,
            seed,
        } => {
            let pipeline = Pipeline::prepare(&input, &prep, seed)?;
            let mut out = create(&output)?;
            let mut sentences = 0u64;
            pipeline.for_each(|s| {
                sentences += 1;
                writeln!(out, "{}", s.join(" "))?;
                Ok(())
            })?;
            out.flush()?;
            log(format!(
                "preprocess: {sentences} sentences, {} phrases joined, sample seed {seed}",
                pipeline.phrase_count()
            ));
            Ok(())
        }
        Command::Train {
            input,
            output,
            n,
            model,
            prep,
            shards,
            f32,
        } => {
            let params = params(n, &model)?;
            let pipeline = Pipeline::prepare(&input, &prep, model.seed)?;
            let shards = shards as usize;
            let (words, tokens) = if f32 {
                let table = train::<f32>(&pipeline, params, shards)?;
                save(&table, &output)?;
                (table.len(), table.token_count())
            } else {
                let table = train::<f64>(&pipeline, params, shards)?;
                save(&table, &output)?;
                (table.len(), table.token_count())
            };
            log(format!(
                "train: {tokens} tokens, {words} words; {} shards={shards}",
                describe(&params)
            ));
            Ok(())
        }
        Command::Merge { inputs, output } => {
            let tables = inputs.iter().map(|p| load(p)).collect::<Result<Vec<_>, _>>()?;
            let merged = embedder::merge(&tables)?;
            save(&merged, &output)
        }
        Command::Export { input, output, format } => {
            let table = load(&input)?;
            let mut out = create(&output)?;
            match format {
                ExportFormat::Word2vec => write_word2vec(&table, &mut out)?,
            }
            out.flush()?;
            Ok(())
        }
        Command::Query { table, words, topk } => {
            let table = load(&table)?;
            let mut out = io::stdout().lock();
            for word in &words {
                let neighbors = query::nearest(&table, word, topk)?;
                print_neighbors(&mut out, &neighbors, |_| json!({ "query": word }))?;
            }
            Ok(())
        }
        Command::Analogy {
            table,
            x,
            y,
            z,
            topk,
            raw_dot,
        } => {
            let table = load(&table)?;
            let mode = if raw_dot {
                AnalogyMode::RawDot
            } else {
                AnalogyMode::Cosine
            };
            let neighbors = query::analogy_with(&table, &x, &y, &z, topk, mode)?;
            print_neighbors(
                &mut io::stdout().lock(),
                &neighbors,
                |_| json!({ "x": x, "y": y, "z": z }),
            )
        }
        Command::Evaluate { table, dataset } => {
            let table = load(&table)?;
            let dataset = load_dataset(&dataset)?;
            let report = eval::evaluate(&table, &dataset)?;
            println!("spearman_rho={}", report.spearman_rho);
            println!("covered={}", report.covered);
            println!("skipped={}", report.skipped);
            Ok(())
        }
        Command::Sweep {
            input,
            dataset,
            dims,
            model,
            prep,
            output,
        } => {
            let base = params(dims[0], &model)?;
            let dims: Vec<usize> = dims.iter().map(|&n| n as usize).collect();
            let dataset = load_dataset(&dataset)?;
            let stream = Pipeline::prepare(&input, &prep, model.seed)?.collect()?;
            let matrix: Cooccurrence =
                build_cooccurrence_capped(&stream, base.window(), *base.weight(), oracle::DEFAULT_VOCAB_CAP)?;
            let sweep = eval::sweep_dimensions(&stream, &base, &dims, &dataset, &matrix)?;
            write_to(output.as_deref(), |out| sweep.write_csv(out))?;
            log(format!(
                "sweep: {} tokens, {} words; {}",
                stream.token_count(),
                stream.vocab_size(),
                describe(&base)
            ));
            Ok(())
        }
        Command::OracleCompare {
            input,
            dims,
            model,
            prep,
            pairs,
            vocab_cap,
            pairs_csv,
            output,
        } => {
            let base = params(dims[0], &model)?;
            let stream = Pipeline::prepare(&input, &prep, model.seed)?.collect()?;
            let matrix: Cooccurrence = build_cooccurrence_capped(&stream, base.window(), *base.weight(), vocab_cap)?;
            let words: Vec<&str> = matrix.words().collect();
            let sample = oracle::sample_pairs(&words, pairs, model.seed);
            let mut rows = Vec::new();
            for (i, &n) in dims.iter().enumerate() {
                let p = base.with_dimension(n as usize)?;
                let table: Embeddings = hash2vec::embedder::train(&stream, &p)?;
                let report = oracle::distortion(&matrix, &table, &sample);
                if let (0, Some(path)) = (i, &pairs_csv) {
                    let mut out = create(path)?;
                    report.write_csv(&mut out)?;
                    out.flush()?;
                }
                let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
                rows.push(format!(
                    "{n},{},{},{},{},{},{},{}",
                    report.pairs.len(),
                    report.skipped,
                    report.zero_full,
                    report.median_rel_err,
                    report.p90_rel_err,
                    opt(report.ip_spearman),
                    opt(report.cosine_spearman)
                ));
            }
            write_to(output.as_deref(), |out| {
                writeln!(
                    out,
                    "n,pairs,skipped,zero_full,median_rel_err,p90_rel_err,ip_spearman,cosine_spearman"
                )?;
                rows.iter().try_for_each(|r| writeln!(out, "{r}"))
            })?;
            log(format!(
                "oracle-compare: {} words, {} stored entries; {}",
                matrix.len(),
                matrix.nnz(),
                describe(&base)
            ));
            Ok(())
        }
        Command::Synth {
            output,
            tokens,
            seed,
            dataset,
            dataset_pairs,
        } => {
            let lexicon = Lexicon::new();
            let mut out = create(&output)?;
            synth::write_text(&lexicon, tokens, seed, &mut out)?;
            out.flush()?;
            if let Some(path) = dataset {
                let d = lexicon.similarity_dataset(dataset_pairs, 0.05, seed)?;
                let mut out = create(&path)?;
                d.write_tsv(&mut out)?;
                out.flush()?;
            }
            Ok(())
        }
    }
}

fn log(message: String) {
    eprintln!("hash2vec {message}");
}

fn describe(p: &TrainParams) -> String {
    let h = p.hasher();
    format!(
        "n={} k={} weight={} seed={} sign_seed={}",
        p.dimension(),
        p.window(),
        p.weight(),
        h.seed(),
        h.sign_seed()
    )
}

fn usage(e: hash2vec::Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn params(n: u64, m: &ModelArgs) -> Result<TrainParams, Failure> {
    let k = m.k as usize;
    let weight = match (m.weight, m.sigma) {
        (WeightKind::Constant, Some(_)) => {
            return Err(Failure::Usage("--sigma only applies to --weight gaussian".into()));
        }
        (WeightKind::Constant, None) => WeightSpec::Constant,
        (WeightKind::Gaussian, Some(s)) => WeightSpec::gaussian(s).map_err(usage)?,
        (WeightKind::Gaussian, None) => WeightSpec::default_for_window(k),
    };
    let hasher = match m.sign_seed {
        Some(s) => HasherSpec::new(n as usize, m.seed, s),
        None => HasherSpec::with_seed(n as usize, m.seed),
    }
    .map_err(usage)?;
    TrainParams::new(k, hasher, weight).map_err(usage)
}

/// Streams the pipeline into `shards` trainers and merges them.
fn train<T: Real>(pipeline: &Pipeline, params: TrainParams, shards: usize) -> Result<EmbeddingTable<T>, Failure> {
    let table = if shards == 1 {
        let mut trainer = Trainer::<T>::new(params);
        pipeline.for_each(|s| {
            trainer.feed_sentence(&s);
            Ok(())
        })?;
        trainer.finish()?
    } else {
        thread::scope(|scope| -> Result<_, Failure> {
            let mut senders = Vec::with_capacity(shards);
            let mut workers = Vec::with_capacity(shards);
            for _ in 0..shards {
                let (tx, rx) = sync_channel::<Vec<Vec<String>>>(4);
                senders.push(tx);
                workers.push(scope.spawn(move || {
                    let mut trainer = Trainer::<T>::new(params);
                    for batch in rx {
                        for sentence in &batch {
                            trainer.feed_sentence(sentence);
                        }
                    }
                    trainer.finish()
                }));
            }
            let mut batch = Vec::with_capacity(BATCH);
            let mut next = 0;
            let stopped = || Failure::Domain("training worker stopped".into());
            let fed = pipeline.for_each(|s| {
                batch.push(s);
                if batch.len() == BATCH {
                    senders[next].send(std::mem::take(&mut batch)).map_err(|_| stopped())?;
                    next = (next + 1) % shards;
                }
                Ok(())
            });
            if fed.is_ok() && !batch.is_empty() {
                senders[next].send(batch).map_err(|_| stopped())?;
            }
            drop(senders);
            let tables = workers
                .into_iter()
                .map(|w| w.join().expect("training worker panicked"))
                .collect::<Result<Vec<_>, _>>();
            fed?;
            Ok(embedder::merge(&tables?)?)
        })?
    };
    if table.token_count() == 0 {
        return Err(hash2vec::Error::EmptyStream.into());
    }
    Ok(table)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Io(format!("cannot create {}: {e}", path.display())))
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::Io(format!("cannot open {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Embeddings, Failure> {
    embedder::import(open(path)?).map_err(|e| match Failure::from(e) {
        Failure::Io(m) => Failure::Io(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn save<T: Real>(table: &EmbeddingTable<T>, path: &Path) -> Result<(), Failure> {
    let mut out = create(path)?;
    embedder::export(table, &mut out)?;
    out.flush()?;
    Ok(())
}

fn load_dataset(path: &Path) -> Result<SimilarityDataset, Failure> {
    SimilarityDataset::parse(open(path)?).map_err(|e| match Failure::from(e) {
        Failure::Io(m) | Failure::Domain(m) => Failure::Io(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn write_to(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), Failure> {
    match path {
        Some(p) => {
            let mut out = create(p)?;
            f(&mut out)?;
            out.flush()?;
        }
        None => {
            let mut out = io::stdout().lock();
            f(&mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn write_word2vec<W: Write>(table: &Embeddings, out: &mut W) -> io::Result<()> {
    writeln!(out, "{} {}", table.len(), table.dimension())?;
    let mut words: Vec<&str> = table.words().collect();
    words.sort_unstable();
    for w in words {
        write!(out, "{w}")?;
        for v in table.get(w).expect("listed word") {
            write!(out, " {v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

fn print_neighbors<W: Write>(
    out: &mut W,
    neighbors: &[Neighbor],
    base: impl Fn(&Neighbor) -> serde_json::Value,
) -> Result<(), Failure> {
    for (rank, n) in neighbors.iter().enumerate() {
        let mut line = base(n);
        line["word"] = json!(n.word);
        line["score"] = json!(n.score);
        line["rank"] = json!(rank + 1);
        writeln!(out, "{line}")?;
    }
    Ok(())
}
