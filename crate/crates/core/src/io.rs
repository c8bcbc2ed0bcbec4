//! Tab-separated text formats.
//!
//! * edge list: `item_id<TAB>consumer_id<TAB>weight`
//! * capacities: `node_id<TAB>side<TAB>capacity`
//! * tokenized corpus: `doc_id<TAB>side<TAB>term:count term:count ...`
//!
//! Ids are arbitrary strings, mapped to dense indices in order of first
//! appearance. Blank lines and lines starting with `#` are skipped.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Matching, Side};
use crate::simjoin::Corpus;

fn records<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader.lines().enumerate().filter_map(|(i, l)| match l {
        Err(e) => Some(Err(Error::Io(e))),
        Ok(l) if l.trim().is_empty() || l.trim_start().starts_with('#') => None,
        Ok(l) => Some(Ok((i + 1, l))),
    })
}

fn fields(line: usize, text: &str, expected: usize) -> Result<Vec<&str>> {
    let f: Vec<&str> = text.trim_end_matches('\r').split('\t').collect();
    if f.len() != expected {
        return Err(Error::Parse {
            line,
            message: format!(
                "expected {expected} tab-separated fields, found {}",
                f.len()
            ),
        });
    }
    Ok(f)
}

fn parse_err(line: usize, message: String) -> Error {
    Error::Parse { line, message }
}

/// Reads an edge list into a graph with all capacities 1.
pub fn read_edge_list<R: BufRead>(reader: R) -> Result<BipartiteGraph> {
    let mut g = BipartiteGraph::new();
    for rec in records(reader) {
        let (line, text) = rec?;
        let f = fields(line, &text, 3)?;
        let w: f64 = f[2]
            .trim()
            .parse()
            .map_err(|_| parse_err(line, format!("bad weight {:?}", f[2])))?;
        let t = g.add_labeled(Side::Item, f[0], 1);
        let c = g.add_labeled(Side::Consumer, f[1], 1);
        g.add_edge(t, c, w)
            .map_err(|e| parse_err(line, e.to_string()))?;
    }
    Ok(g)
}

/// Applies a capacity file to `g`. Unknown ids become isolated nodes.
pub fn read_capacities<R: BufRead>(reader: R, g: &mut BipartiteGraph) -> Result<()> {
    for rec in records(reader) {
        let (line, text) = rec?;
        let f = fields(line, &text, 3)?;
        let side: Side = f[1]
            .parse()
            .map_err(|e: Error| parse_err(line, e.to_string()))?;
        let cap: u32 = f[2]
            .trim()
            .parse()
            .map_err(|_| parse_err(line, format!("bad capacity {:?}", f[2])))?;
        let node = g.add_labeled(side, f[0], cap);
        g.set_capacity(node, cap)?;
    }
    Ok(())
}

/// Reads a tokenized corpus of raw term counts.
pub fn read_tokenized_corpus<R: BufRead>(reader: R) -> Result<Corpus> {
    let mut corpus = Corpus::new();
    for rec in records(reader) {
        let (line, text) = rec?;
        let f = fields(line, &text, 3)?;
        let side: Side = f[1]
            .parse()
            .map_err(|e: Error| parse_err(line, e.to_string()))?;
        let mut counts = Vec::new();
        for tok in f[2].split_whitespace() {
            let (term, count) = tok
                .rsplit_once(':')
                .ok_or_else(|| parse_err(line, format!("expected term:count, got {tok:?}")))?;
            let c: f64 = count
                .parse()
                .ok()
                .filter(|c: &f64| c.is_finite() && *c >= 0.0)
                .ok_or_else(|| parse_err(line, format!("bad count in {tok:?}")))?;
            counts.push((term.to_string(), c));
        }
        corpus
            .add_document(f[0], side, counts)
            .map_err(|e| parse_err(line, e.to_string()))?;
    }
    Ok(corpus)
}

/// Writes matched edges as an edge list, in key order.
pub fn write_matching<W: Write>(mut w: W, m: &Matching, g: &BipartiteGraph) -> Result<()> {
    for k in m.edges() {
        writeln!(
            w,
            "{}\t{}\t{}",
            g.label(k.low),
            g.label(k.high),
            g.weight(k)?
        )?;
    }
    Ok(())
}
