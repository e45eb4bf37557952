//! Edge CSV and citer-table JSON-lines.

use std::collections::BTreeSet;
use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use super::{AugmentedGraph, CiterTable, GraphError, MergedEdge};
use crate::ids::IdTable;
use crate::numfmt::format_sig;

pub const EDGE_HEADER: [&str; 6] = ["src", "dst", "w_total", "w_direct", "w_bc", "w_cc"];

pub fn write_edges<W: Write>(w: W, g: &AugmentedGraph) -> Result<(), GraphError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(EDGE_HEADER)?;
    for (a, b, e) in g.named_edges() {
        out.write_record([
            a,
            b,
            &format_sig(e.w_total, 9),
            &format_sig(e.w_direct, 9),
            &format_sig(e.w_bc, 9),
            &format_sig(e.w_cc, 9),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Reads an edge file. `w_total` is recomputed from the components so the
/// decomposition holds exactly; a stored total that disagrees beyond the
/// printed precision is an error.
pub fn read_edges<R: Read>(r: R) -> Result<AugmentedGraph, GraphError> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != EDGE_HEADER {
        return Err(GraphError::Parse {
            line: 1,
            msg: format!("expected header {}", EDGE_HEADER.join(",")),
        });
    }
    let mut raw = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let num = |k: usize| -> Result<f64, GraphError> {
            rec[k].parse::<f64>().map_err(|e| GraphError::Parse {
                line,
                msg: format!("{}: {e}", EDGE_HEADER[k]),
            })
        };
        let (d, b, c) = (num(3)?, num(4)?, num(5)?);
        let total = num(2)?;
        let e = MergedEdge::new(0, 0, d, b, c);
        if (e.w_total - total).abs() > 1e-8 * total.abs().max(1.0) {
            return Err(GraphError::Parse {
                line,
                msg: format!("w_total {total} != component sum {}", e.w_total),
            });
        }
        raw.push((rec[0].to_owned(), rec[1].to_owned(), e));
    }
    let table = IdTable::new(raw.iter().flat_map(|(a, b, _)| [a.clone(), b.clone()]));
    let mut edges = Vec::with_capacity(raw.len());
    for (a, b, mut e) in raw {
        if a == b {
            return Err(GraphError::SelfLoop(a));
        }
        let (ia, ib) = (table.index_of(&a).unwrap(), table.index_of(&b).unwrap());
        (e.a, e.b) = if ia < ib { (ia, ib) } else { (ib, ia) };
        edges.push(e);
    }
    AugmentedGraph::new(table, edges)
}

#[derive(Serialize, Deserialize)]
struct CiterLine {
    citer_id: String,
    cited_member_ids: Vec<String>,
}

pub fn read_citer_table<R: BufRead>(r: R) -> Result<CiterTable, GraphError> {
    let mut t = CiterTable::default();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let c: CiterLine = serde_json::from_str(&line).map_err(|e| GraphError::Parse {
            line: i + 1,
            msg: e.to_string(),
        })?;
        t.insert(c.citer_id, c.cited_member_ids);
    }
    Ok(t)
}

pub fn write_citer_table<W: Write>(mut w: W, t: &CiterTable) -> Result<(), GraphError> {
    for (c, cited) in &t.citers {
        serde_json::to_writer(
            &mut w,
            &CiterLine {
                citer_id: c.clone(),
                cited_member_ids: cited.clone(),
            },
        )?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// One id per line.
pub fn write_id_list<'a, W: Write>(
    mut w: W,
    ids: impl IntoIterator<Item = &'a str>,
) -> Result<(), GraphError> {
    for id in ids {
        writeln!(w, "{id}")?;
    }
    Ok(())
}

pub fn read_id_list<R: BufRead>(r: R) -> Result<BTreeSet<String>, GraphError> {
    let mut out = BTreeSet::new();
    for line in r.lines() {
        let line = line?;
        let t = line.trim();
        if !t.is_empty() {
            out.insert(t.to_owned());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_csv_round_trip() {
        let g =
            AugmentedGraph::from_weighted([], [("b", "a", 1.0 / 3.0), ("c", "a", 0.25)]).unwrap();
        let mut buf = Vec::new();
        write_edges(&mut buf, &g).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text
            .starts_with("src,dst,w_total,w_direct,w_bc,w_cc\na,b,0.333333333,0,0.333333333,0\n"));
        let back = read_edges(buf.as_slice()).unwrap();
        assert_eq!(back.nodes(), g.nodes());
        for (x, y) in back.edges().iter().zip(g.edges()) {
            assert!((x.w_total - y.w_total).abs() < 1e-9);
        }
    }

    #[test]
    fn edge_csv_rejects_inconsistent_total() {
        let text = "src,dst,w_total,w_direct,w_bc,w_cc\na,b,2,1,0.5,0\n";
        assert!(read_edges(text.as_bytes()).is_err());
        let bad_header = "a,b,c\n";
        assert!(read_edges(bad_header.as_bytes()).is_err());
    }

    #[test]
    fn citer_table_round_trip() {
        let text = "{\"citer_id\":\"x\",\"cited_member_ids\":[\"b\",\"a\",\"a\"]}\n\n";
        let t = read_citer_table(text.as_bytes()).unwrap();
        assert_eq!(t.citers["x"], vec!["a", "b"]);
        let mut buf = Vec::new();
        write_citer_table(&mut buf, &t).unwrap();
        assert_eq!(read_citer_table(buf.as_slice()).unwrap(), t);
    }
}
