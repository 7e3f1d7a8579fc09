//! Streaming preprocessing: phrase joining, then token filtering, then
//! sentence sampling. Statistics that need a full pass (unigram counts,
//! phrase pairs) are gathered by re-reading the input file.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use hash2vec::corpus::{
    FilterConfig, FrequencyTable, PhraseConfig, PhraseModel, SamplerConfig, SentenceReader, TokenFilter, TokenStream,
};

use crate::args::PrepArgs;
use crate::Failure;

pub fn open_sentences(path: &Path) -> Result<SentenceReader<BufReader<File>>, Failure> {
    let file = File::open(path).map_err(|e| Failure::Io(format!("cannot open {}: {e}", path.display())))?;
    Ok(SentenceReader::new(BufReader::new(file)))
}

pub struct Pipeline {
    input: PathBuf,
    phrases: Option<PhraseModel>,
    filter: Option<TokenFilter>,
    sampler: Option<SamplerConfig>,
}

impl Pipeline {
    pub fn prepare(input: &Path, prep: &PrepArgs, seed: u64) -> Result<Self, Failure> {
        let stoplist = match &prep.stoplist {
            Some(path) => {
                let file = File::open(path).map_err(|e| Failure::Io(format!("cannot open {}: {e}", path.display())))?;
                FilterConfig::read_stoplist(BufReader::new(file))?
            }
            None => Vec::new(),
        };
        let usage = |e: hash2vec::Error| Failure::Usage(e.to_string());
        let filter_cfg = FilterConfig::new(stoplist, prep.percentile).map_err(usage)?;
        let sampler = prep
            .sample_prob
            .map(|p| SamplerConfig::new(p, seed))
            .transpose()
            .map_err(usage)?;
        let mut pipeline = Pipeline {
            input: input.to_owned(),
            phrases: None,
            filter: None,
            sampler,
        };
        // fail early with the path in the message; later re-opens only see the io error
        open_sentences(input)?;
        if prep.phrases {
            let cfg =
                PhraseConfig::new(prep.phrase_discount, prep.phrase_threshold, prep.phrase_passes).map_err(usage)?;
            let reopen = || -> hash2vec::Result<_> { Ok(SentenceReader::new(BufReader::new(File::open(input)?))) };
            let model = PhraseModel::learn(reopen, None, &cfg)?;
            pipeline.phrases = Some(model);
        }
        if prep.percentile.is_some() {
            let mut freqs = FrequencyTable::new();
            pipeline.for_each_unfiltered(|s| freqs.add_sentence(&s))?;
            pipeline.filter = Some(filter_cfg.resolve(&freqs));
        } else if !filter_cfg.stoplist().is_empty() {
            pipeline.filter = Some(filter_cfg.resolve(&FrequencyTable::new()));
        }
        Ok(pipeline)
    }

    pub fn phrase_count(&self) -> usize {
        self.phrases.as_ref().map_or(0, PhraseModel::phrase_count)
    }

    fn for_each_unfiltered(&self, mut f: impl FnMut(Vec<String>)) -> Result<(), Failure> {
        for sentence in open_sentences(&self.input)? {
            let mut sentence = sentence?;
            if let Some(model) = &self.phrases {
                sentence = model.apply(sentence);
            }
            f(sentence);
        }
        Ok(())
    }

    /// Streams every surviving, non-empty sentence of the input to `f`.
    pub fn for_each(&self, mut f: impl FnMut(Vec<String>) -> Result<(), Failure>) -> Result<(), Failure> {
        let mut sampler = self.sampler.map(|s| s.sampler());
        let mut result = Ok(());
        self.for_each_unfiltered(|mut sentence| {
            if result.is_err() {
                return;
            }
            if let Some(filter) = &self.filter {
                sentence = filter.apply(sentence);
            }
            if sentence.is_empty() {
                return;
            }
            if let Some(s) = &mut sampler {
                if !s.keep() {
                    return;
                }
            }
            result = f(sentence);
        })?;
        result
    }

    pub fn collect(&self) -> Result<TokenStream, Failure> {
        let mut stream = TokenStream::new();
        self.for_each(|s| {
            stream.push_sentence(&s)?;
            Ok(())
        })?;
        Ok(stream)
    }
}
