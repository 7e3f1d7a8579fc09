//! Training memory is bounded by vocabulary times dimension, independent of
//! how many tokens stream through.

use std::alloc::{GlobalAlloc, Layout, System};
use std::sync::atomic::{AtomicUsize, Ordering};

use hash2vec::{TrainParams, Trainer};

struct Counting;

static LIVE: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);

unsafe impl GlobalAlloc for Counting {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let live = LIVE.fetch_add(layout.size(), Ordering::Relaxed) + layout.size();
        PEAK.fetch_max(live, Ordering::Relaxed);
        System.alloc(layout)
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        LIVE.fetch_sub(layout.size(), Ordering::Relaxed);
        System.dealloc(ptr, layout)
    }
}

#[global_allocator]
static ALLOC: Counting = Counting;

/// Peak heap growth while streaming `tokens` tokens over a `vocab`-word
/// vocabulary through a trainer of the given dimension.
fn peak_bytes(vocab: usize, tokens: usize, dimension: usize) -> usize {
    let words: Vec<String> = (0..vocab).map(|i| format!("w{i}")).collect();
    let params = TrainParams::with_defaults(dimension, 5, 7).unwrap();
    let base = LIVE.load(Ordering::Relaxed);
    PEAK.store(base, Ordering::Relaxed);
    let mut trainer = Trainer::<f64>::new(params);
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut sentence: Vec<&str> = Vec::with_capacity(20);
    for i in 0..tokens {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        // every word shows up in the first pass over the vocabulary
        let id = if i < vocab { i } else { (state % vocab as u64) as usize };
        sentence.push(&words[id]);
        if sentence.len() == 20 {
            trainer.feed_sentence(&sentence);
            sentence.clear();
        }
    }
    trainer.feed_sentence(&sentence);
    let table = trainer.finish().unwrap();
    assert_eq!(table.len(), vocab);
    drop(table);
    PEAK.load(Ordering::Relaxed) - base
}

#[test]
fn training_memory_scales_with_vocab_not_corpus() {
    let short = peak_bytes(2_000, 100_000, 128);
    let long = peak_bytes(2_000, 800_000, 128);
    let wide = peak_bytes(4_000, 100_000, 128);
    let deep = peak_bytes(2_000, 100_000, 256);
    let table = 2_000 * 128 * std::mem::size_of::<f64>();

    assert!(short >= table, "{short} < {table}");
    assert!(short < 4 * table, "{short} bytes for a {table} byte table");
    assert!((long as f64) < 1.05 * short as f64, "8x tokens: {short} -> {long}");
    let ratio = |a: usize| a as f64 / short as f64;
    assert!((1.7..2.3).contains(&ratio(wide)), "2x vocab: {short} -> {wide}");
    assert!((1.7..2.3).contains(&ratio(deep)), "2x dimension: {short} -> {deep}");
}
