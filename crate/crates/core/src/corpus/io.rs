//! JSON-lines reading and writing of paper records.

use std::io::{BufRead, Write};

use super::{CorpusError, CorpusStore, MergedAway, PaperRecord, Rejection};

/// Reads one record per line. Blank lines are skipped; lines that fail to
/// parse are returned as rejections (1-based line numbers) instead of
/// aborting the stream.
pub fn read_records<R: BufRead>(
    reader: R,
) -> Result<(Vec<PaperRecord>, Vec<Rejection>), CorpusError> {
    let mut records = Vec::new();
    let mut rejected = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<PaperRecord>(&line) {
            Ok(r) => records.push(r),
            Err(e) => {
                let paper_id = serde_json::from_str::<serde_json::Value>(&line)
                    .ok()
                    .and_then(|v| v.get("id").and_then(|x| x.as_str()).map(str::to_owned));
                rejected.push(Rejection {
                    line: Some(i + 1),
                    paper_id,
                    reason: e.to_string(),
                });
            }
        }
    }
    Ok((records, rejected))
}

pub fn write_records<'a, W: Write>(
    mut w: W,
    records: impl IntoIterator<Item = &'a PaperRecord>,
) -> Result<(), CorpusError> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_store<W: Write>(w: W, store: &CorpusStore) -> Result<(), CorpusError> {
    write_records(w, store.records())
}

pub fn read_store<R: BufRead>(reader: R) -> Result<(CorpusStore, Vec<Rejection>), CorpusError> {
    let (records, mut rejected) = read_records(reader)?;
    let out = super::ingest(records, super::MergePolicy::default());
    rejected.extend(out.rejected);
    Ok((out.store, rejected))
}

/// Sidecar report: one `{id, dedup_of}` object per merged-away id.
pub fn write_merged<W: Write>(mut w: W, merged: &[MergedAway]) -> Result<(), CorpusError> {
    for m in merged {
        serde_json::to_writer(&mut w, m)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_rejections<W: Write>(mut w: W, rejected: &[Rejection]) -> Result<(), CorpusError> {
    for r in rejected {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
