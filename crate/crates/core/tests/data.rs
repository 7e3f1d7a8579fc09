//! The checked-in sample data stays in sync with the generator.

use std::path::Path;

use hash2vec::synth::{self, Lexicon, FUNCTION_WORDS};

fn data(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)).unwrap()
}

#[test]
fn stoplist_lists_function_words() {
    let text = data("stoplist.txt");
    assert_eq!(text.lines().collect::<Vec<_>>(), FUNCTION_WORDS);
}

#[test]
fn tiny_corpus_is_regenerable() {
    let mut out = Vec::new();
    synth::write_text(&Lexicon::new(), 16_000, 2024, &mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap(), data("tiny_corpus.txt"));
}
