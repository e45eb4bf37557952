use std::io::{BufRead, Write};

use super::{AgendaQuery, BenchmarkRow, RetrievalError, RetrievalRun};

fn read_jsonl<R: BufRead, T: serde::de::DeserializeOwned>(r: R) -> Result<Vec<T>, RetrievalError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|e| RetrievalError::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?,
        );
    }
    Ok(out)
}

fn write_jsonl<W: Write, T: serde::Serialize>(mut w: W, items: &[T]) -> Result<(), RetrievalError> {
    for it in items {
        serde_json::to_writer(&mut w, it)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads agenda queries; queries without representatives are rejected.
pub fn read_queries<R: BufRead>(r: R) -> Result<Vec<AgendaQuery>, RetrievalError> {
    let qs: Vec<AgendaQuery> = read_jsonl(r)?;
    if let Some(q) = qs.iter().find(|q| q.representative_ids.is_empty()) {
        return Err(RetrievalError::NoRepresentatives(q.query_id.clone()));
    }
    Ok(qs)
}

pub fn write_queries<W: Write>(w: W, qs: &[AgendaQuery]) -> Result<(), RetrievalError> {
    write_jsonl(w, qs)
}

pub fn read_runs<R: BufRead>(r: R) -> Result<Vec<RetrievalRun>, RetrievalError> {
    read_jsonl(r)
}

pub fn write_runs<W: Write>(w: W, runs: &[RetrievalRun]) -> Result<(), RetrievalError> {
    write_jsonl(w, runs)
}

pub fn write_benchmark_csv<W: Write>(w: W, rows: &[BenchmarkRow]) -> Result<(), RetrievalError> {
    let mut c = csv::Writer::from_writer(w);
    for r in rows {
        c.serialize(r)?;
    }
    c.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Domain;
    use crate::retrieval::ScoredId;

    #[test]
    fn round_trips() {
        let q = vec![AgendaQuery {
            query_id: "q1".into(),
            domain: Domain::Chemistry,
            description: "catalysis".into(),
            representative_ids: vec!["p1".into()],
        }];
        let mut buf = Vec::new();
        write_queries(&mut buf, &q).unwrap();
        assert_eq!(read_queries(buf.as_slice()).unwrap(), q);
        let runs = vec![RetrievalRun::new(
            "q1",
            "bm25",
            vec![ScoredId {
                id: "p1".into(),
                score: 0.1 + 0.2,
            }],
        )];
        let mut buf = Vec::new();
        write_runs(&mut buf, &runs).unwrap();
        assert!(String::from_utf8(buf.clone())
            .unwrap()
            .starts_with("{\"query_id\":\"q1\",\"retriever\":\"bm25\",\"ranked\":[{\"id\""));
        assert_eq!(read_runs(buf.as_slice()).unwrap(), runs);
        let bad = b"{\"query_id\":\"q\",\"domain\":\"physics\",\"description\":\"\",\"representative_ids\":[]}\n";
        assert!(read_queries(&bad[..]).is_err());
    }

    #[test]
    fn benchmark_header() {
        let mut buf = Vec::new();
        write_benchmark_csv(
            &mut buf,
            &[BenchmarkRow {
                retriever: "bm25".into(),
                domain: "all".into(),
                top1_l2_rate: 0.5,
                n_queries: 2,
                n_empty: 0,
            }],
        )
        .unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "retriever,domain,top1_l2_rate,n_queries,n_empty\nbm25,all,0.5,2,0\n"
        );
    }
}
