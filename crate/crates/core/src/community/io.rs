//! Partition TSV and stats JSON.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use super::Partition;
use super::{CommunityError, PartitionStats};

pub const PARTITION_HEADER: &str = "paper_id\tl1_id\tl2_id";

/// One row per paper of `l1`; `l2` must label the same ids.
pub fn write_partitions<W: Write>(
    mut w: W,
    l1: &Partition,
    l2: &Partition,
) -> Result<(), CommunityError> {
    writeln!(w, "{PARTITION_HEADER}")?;
    for (id, &a) in l1.labels() {
        let b = l2
            .get(id)
            .ok_or_else(|| CommunityError::MissingLabel(id.clone()))?;
        writeln!(w, "{id}\t{a}\t{b}")?;
    }
    Ok(())
}

pub type LabelMap = BTreeMap<String, u32>;

/// Reads `(l1, l2)` label maps.
pub fn read_partitions<R: BufRead>(r: R) -> Result<(LabelMap, LabelMap), CommunityError> {
    let mut l1 = BTreeMap::new();
    let mut l2 = BTreeMap::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        if line_no == 1 && line == PARTITION_HEADER {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split('\t').collect();
        let bad = |msg: String| CommunityError::Parse { line: line_no, msg };
        if parts.len() != 3 {
            return Err(bad(format!("expected 3 fields, got {}", parts.len())));
        }
        let a: u32 = parts[1].parse().map_err(|e| bad(format!("l1_id: {e}")))?;
        let b: u32 = parts[2].parse().map_err(|e| bad(format!("l2_id: {e}")))?;
        if l1.insert(parts[0].to_owned(), a).is_some() {
            return Err(bad(format!("duplicate id {}", parts[0])));
        }
        l2.insert(parts[0].to_owned(), b);
    }
    Ok((l1, l2))
}

pub fn write_stats<W: Write>(w: W, stats: &[PartitionStats]) -> Result<(), CommunityError> {
    serde_json::to_writer_pretty(w, stats)?;
    Ok(())
}
