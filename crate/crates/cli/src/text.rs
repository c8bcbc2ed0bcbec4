//! Raw-text ingestion: lowercase, strip punctuation, drop stop words, stem.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;
use std::sync::OnceLock;

use bmatch_core::simjoin::Corpus;
use bmatch_core::{Error, Result, Side};
use rust_stemmers::{Algorithm, Stemmer};

fn stop_words() -> &'static BTreeSet<&'static str> {
    static WORDS: OnceLock<BTreeSet<&'static str>> = OnceLock::new();
    WORDS.get_or_init(|| {
        include_str!("stopwords.txt")
            .lines()
            .map(str::trim)
            .collect()
    })
}

/// Stemmed terms of `text` in order of appearance.
pub fn tokenize(text: &str) -> Vec<String> {
    let stemmer = Stemmer::create(Algorithm::English);
    let lower = text.to_lowercase();
    lower
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty() && !stop_words().contains(w))
        .map(|w| stemmer.stem(w).into_owned())
        .collect()
}

/// Term counts of one document.
pub fn term_counts(text: &str) -> BTreeMap<String, f64> {
    let mut counts = BTreeMap::new();
    for t in tokenize(text) {
        *counts.entry(t).or_insert(0.0) += 1.0;
    }
    counts
}

/// Reads `doc_id<TAB>free text` lines of one side into `corpus`.
pub fn ingest_text<R: BufRead>(reader: R, side: Side, corpus: &mut Corpus) -> Result<()> {
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let (id, text) = line.split_once('\t').ok_or_else(|| Error::Parse {
            line: i + 1,
            message: "expected doc_id<TAB>text".into(),
        })?;
        if id.trim().is_empty() {
            return Err(Error::Parse {
                line: i + 1,
                message: "empty document id".into(),
            });
        }
        corpus
            .add_document(id, side, term_counts(text))
            .map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
    }
    Ok(())
}

/// Reads one side of a raw-text corpus.
pub fn ingest_text_corpus<R: BufRead>(reader: R, side: Side) -> Result<Corpus> {
    let mut corpus = Corpus::new();
    ingest_text(reader, side, &mut corpus)?;
    Ok(corpus)
}
