use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{canonical_pair, Graph, Pair};

use super::ScoreTable;

/// Reads an external score file (`node_i,node_j,score` with one header line,
/// original node labels) and aligns it to `expected`.
///
/// Rows for pairs outside `expected` are ignored; unknown labels, repeated
/// pairs, non-finite scores and uncovered expected pairs are errors.
pub fn ingest_external_scores(
    path: &Path,
    graph: &Graph,
    expected: &[Pair],
    predictor: &str,
) -> Result<ScoreTable> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_external_scores(file, graph, expected, predictor)
        .map_err(|e| Error::ExternalScores(format!("{}: {e}", path.display())))
}

pub fn read_external_scores<R: Read>(
    reader: R,
    graph: &Graph,
    expected: &[Pair],
    predictor: &str,
) -> Result<ScoreTable> {
    let index = graph.label_index();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut seen: HashMap<Pair, f64> = HashMap::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let line = row + 2;
        if record.len() != 3 {
            return Err(Error::ExternalScores(format!(
                "line {line}: expected 3 columns, found {}",
                record.len()
            )));
        }
        let lookup = |label: &str| {
            index.get(label).copied().ok_or_else(|| {
                Error::ExternalScores(format!("line {line}: unknown node id `{label}`"))
            })
        };
        let (i, j) = (lookup(&record[0])?, lookup(&record[1])?);
        let score: f64 = record[2]
            .parse()
            .map_err(|_| Error::ExternalScores(format!("line {line}: bad score `{}`", &record[2])))?;
        if !score.is_finite() {
            return Err(Error::ExternalScores(format!("line {line}: non-finite score")));
        }
        if seen.insert(canonical_pair(i, j), score).is_some() {
            return Err(Error::ExternalScores(format!(
                "line {line}: duplicate pair ({}, {})",
                &record[0], &record[1]
            )));
        }
    }
    let mut scores = Vec::with_capacity(expected.len());
    let mut missing = Vec::new();
    for &(i, j) in expected {
        match seen.get(&canonical_pair(i, j)) {
            Some(&s) => scores.push(s),
            None => missing.push(format!("({}, {})", graph.label(i), graph.label(j))),
        }
    }
    if !missing.is_empty() {
        let shown: Vec<&str> = missing.iter().take(10).map(String::as_str).collect();
        return Err(Error::ExternalScores(format!(
            "{} expected pairs missing, first: {}",
            missing.len(),
            shown.join(", ")
        )));
    }
    ScoreTable::new(predictor, "external", expected.to_vec(), scores)
}

/// Writes scores in the external score format.
pub fn write_score_file<W: Write>(mut w: W, graph: &Graph, table: &ScoreTable) -> std::io::Result<()> {
    writeln!(w, "node_i,node_j,score")?;
    for (&(i, j), s) in table.pairs.iter().zip(&table.scores) {
        writeln!(w, "{},{},{}", graph.label(i), graph.label(j), s)?;
    }
    Ok(())
}
