use std::cmp::Ordering;
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{dot64, norm64, EmbeddingError, EmbeddingSet};
use crate::ids::IdTable;

/// Exact top-k cosine neighbours of every pool member within the pool.
/// Row `i` belongs to `pool.id(i)`; neighbour indices refer to `pool`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborTable {
    pub k_max: usize,
    pub pool: IdTable,
    pub rows: Vec<Vec<(u32, f64)>>,
}

impl NeighborTable {
    pub fn row(&self, query: &str) -> Option<&[(u32, f64)]> {
        self.pool
            .index_of(query)
            .map(|i| self.rows[i as usize].as_slice())
    }

    /// `(query, [(neighbour, cos)])` in query id order.
    pub fn named_rows(&self) -> impl Iterator<Item = (&str, Vec<(&str, f64)>)> {
        self.rows.iter().enumerate().map(|(i, r)| {
            (
                self.pool.id(i as u32),
                r.iter().map(|&(j, c)| (self.pool.id(j), c)).collect(),
            )
        })
    }
}

#[inline]
fn rank_order(a: &(f64, u32), b: &(f64, u32)) -> Ordering {
    b.0.partial_cmp(&a.0)
        .unwrap_or(Ordering::Equal)
        .then(a.1.cmp(&b.1))
}

/// Keeps the `k` best of `scored` in rank order (cosine descending, index
/// ascending).
fn select_top(mut scored: Vec<(f64, u32)>, k: usize) -> Vec<(f64, u32)> {
    if scored.len() > k {
        if k > 0 {
            scored.select_nth_unstable_by(k - 1, rank_order);
        }
        scored.truncate(k);
    }
    scored.sort_unstable_by(rank_order);
    scored
}

/// Pool vectors, gathered contiguously, with their norms.
struct PoolMatrix {
    dim: usize,
    data: Vec<f32>,
    norms: Vec<f64>,
}

impl PoolMatrix {
    fn gather(set: &EmbeddingSet, pool: &IdTable) -> Result<Self, EmbeddingError> {
        let mut data = Vec::with_capacity(pool.len() * set.dim());
        let mut norms = Vec::with_capacity(pool.len());
        for id in pool.ids() {
            let v = set
                .get(id)
                .ok_or_else(|| EmbeddingError::Unknown(id.clone()))?;
            let n = norm64(v);
            if n == 0.0 {
                return Err(EmbeddingError::ZeroVector(id.clone()));
            }
            data.extend_from_slice(v);
            norms.push(n);
        }
        Ok(Self {
            dim: set.dim(),
            data,
            norms,
        })
    }

    #[inline]
    fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

/// Exact top-`k` neighbours for every member of `pool`, self excluded.
pub fn topk_neighbors(
    set: &EmbeddingSet,
    pool: &IdTable,
    k: usize,
) -> Result<NeighborTable, EmbeddingError> {
    if k >= pool.len() {
        return Err(EmbeddingError::KTooLarge {
            k,
            pool: pool.len(),
        });
    }
    let m = PoolMatrix::gather(set, pool)?;
    let n = pool.len();
    let rows = (0..n)
        .into_par_iter()
        .map(|q| {
            let qv = m.row(q);
            let qn = m.norms[q];
            let scored: Vec<(f64, u32)> = (0..n)
                .filter(|&j| j != q)
                .map(|j| (dot64(qv, m.row(j)) / (qn * m.norms[j]), j as u32))
                .collect();
            select_top(scored, k)
                .into_iter()
                .map(|(c, j)| (j, c))
                .collect()
        })
        .collect();
    Ok(NeighborTable {
        k_max: k,
        pool: pool.clone(),
        rows,
    })
}

/// Exact top-`n` pool members by cosine to `query`.
pub fn cosine_top_n(
    set: &EmbeddingSet,
    query: &[f32],
    pool: &IdTable,
    top_n: usize,
) -> Result<Vec<(String, f64)>, EmbeddingError> {
    if query.len() != set.dim() {
        return Err(EmbeddingError::Dimension {
            id: "<query>".into(),
            got: query.len(),
            expected: set.dim(),
        });
    }
    let qn = norm64(query);
    if qn == 0.0 {
        return Err(EmbeddingError::ZeroVector("<query>".into()));
    }
    let m = PoolMatrix::gather(set, pool)?;
    let scored: Vec<(f64, u32)> = (0..pool.len())
        .into_par_iter()
        .map(|j| (dot64(query, m.row(j)) / (qn * m.norms[j]), j as u32))
        .collect();
    Ok(select_top(scored, top_n)
        .into_iter()
        .map(|(c, j)| (pool.id(j).to_owned(), c))
        .collect())
}

#[derive(Serialize, Deserialize)]
struct NeighborOut {
    id: String,
    cos: f64,
}

#[derive(Serialize, Deserialize)]
struct RowOut {
    query_id: String,
    neighbors: Vec<NeighborOut>,
}

pub fn write_neighbor_table<W: Write>(mut w: W, t: &NeighborTable) -> Result<(), EmbeddingError> {
    for (q, row) in t.named_rows() {
        let out = RowOut {
            query_id: q.to_owned(),
            neighbors: row
                .into_iter()
                .map(|(id, cos)| NeighborOut {
                    id: id.to_owned(),
                    cos,
                })
                .collect(),
        };
        serde_json::to_writer(&mut w, &out)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads a table written by [`write_neighbor_table`]. The pool is the set of
/// query ids; `k_max` is the shortest row length.
pub fn read_neighbor_table<R: BufRead>(r: R) -> Result<NeighborTable, EmbeddingError> {
    let mut raw = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: RowOut = serde_json::from_str(&line).map_err(|e| EmbeddingError::Parse {
            line: i + 1,
            msg: e.to_string(),
        })?;
        raw.push(row);
    }
    let pool = IdTable::new(raw.iter().map(|r| r.query_id.clone()));
    if pool.len() != raw.len() {
        return Err(EmbeddingError::Parse {
            line: 0,
            msg: "duplicate query id".into(),
        });
    }
    let mut rows = vec![Vec::new(); pool.len()];
    let mut k_max = usize::MAX;
    for r in raw {
        let qi = pool.index_of(&r.query_id).unwrap();
        let mut row = Vec::with_capacity(r.neighbors.len());
        for nb in r.neighbors {
            let j = pool
                .index_of(&nb.id)
                .ok_or_else(|| EmbeddingError::Unknown(nb.id.clone()))?;
            row.push((j, nb.cos));
        }
        k_max = k_max.min(row.len());
        rows[qi as usize] = row;
    }
    Ok(NeighborTable {
        k_max: if rows.is_empty() { 0 } else { k_max },
        pool,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::tests::random_set;

    fn dense_oracle(set: &EmbeddingSet, k: usize) -> Vec<Vec<(u32, f64)>> {
        let n = set.len();
        let mut out = Vec::new();
        for q in 0..n {
            let mut all: Vec<(u32, f64)> = Vec::new();
            for j in 0..n {
                if j != q {
                    let a = set.row(q as u32);
                    let b = set.row(j as u32);
                    let mut d = 0.0f64;
                    let (mut na, mut nb) = (0.0f64, 0.0f64);
                    for t in 0..a.len() {
                        d += a[t] as f64 * b[t] as f64;
                        na += a[t] as f64 * a[t] as f64;
                        nb += b[t] as f64 * b[t] as f64;
                    }
                    all.push((j as u32, d / (na.sqrt() * nb.sqrt())));
                }
            }
            all.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap().then(x.0.cmp(&y.0)));
            all.truncate(k);
            out.push(all);
        }
        out
    }

    #[test]
    fn orthonormal_basis_ties_by_id() {
        let rows = (0..4).map(|i| {
            let mut v = vec![0.0f32; 4];
            v[i] = 1.0;
            (format!("e{i}"), v)
        });
        let s = EmbeddingSet::from_rows("m", rows, None).unwrap();
        let t = topk_neighbors(&s, s.ids(), 3).unwrap();
        assert_eq!(t.rows[2], vec![(0, 0.0), (1, 0.0), (3, 0.0)]);
    }

    #[test]
    fn exact_duplicate_is_rank_one() {
        let s = EmbeddingSet::from_rows(
            "m",
            [
                ("a".to_string(), vec![0.6f32, 0.8]),
                ("b".to_string(), vec![1.0, 0.0]),
                ("c".to_string(), vec![0.6, 0.8]),
            ],
            None,
        )
        .unwrap();
        let t = topk_neighbors(&s, s.ids(), 1).unwrap();
        assert_eq!(t.row("a").unwrap()[0].0, 2);
        assert!((t.row("a").unwrap()[0].1 - 1.0).abs() < 1e-12);
        assert!(topk_neighbors(&s, s.ids(), 3).is_err());
    }

    #[test]
    fn matches_dense_oracle() {
        let s = random_set(300, 32, 4).normalize().unwrap();
        let t = topk_neighbors(&s, s.ids(), 20).unwrap();
        let want = dense_oracle(&s, 20);
        for (got, want) in t.rows.iter().zip(&want) {
            let gi: Vec<u32> = got.iter().map(|x| x.0).collect();
            let wi: Vec<u32> = want.iter().map(|x| x.0).collect();
            assert_eq!(gi, wi);
        }
    }

    #[test]
    fn scale_invariant() {
        let s = random_set(80, 8, 2);
        let scaled = EmbeddingSet::from_rows(
            "m",
            s.iter()
                .map(|(id, v)| (id.to_owned(), v.iter().map(|x| x * 8.0).collect())),
            None,
        )
        .unwrap();
        let a = topk_neighbors(&s.normalize().unwrap(), s.ids(), 10).unwrap();
        let b = topk_neighbors(&scaled.normalize().unwrap(), s.ids(), 10).unwrap();
        let ia: Vec<Vec<u32>> = a
            .rows
            .iter()
            .map(|r| r.iter().map(|x| x.0).collect())
            .collect();
        let ib: Vec<Vec<u32>> = b
            .rows
            .iter()
            .map(|r| r.iter().map(|x| x.0).collect())
            .collect();
        assert_eq!(ia, ib);
    }

    #[test]
    fn sub_pool_and_persistence() {
        let s = random_set(40, 8, 6).normalize().unwrap();
        let pool = IdTable::new(s.ids().ids().iter().step_by(2).cloned());
        let t = topk_neighbors(&s, &pool, 5).unwrap();
        for r in &t.rows {
            assert!(r.windows(2).all(|w| w[0].1 >= w[1].1));
        }
        let mut buf = Vec::new();
        write_neighbor_table(&mut buf, &t).unwrap();
        let back = read_neighbor_table(buf.as_slice()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn cosine_search_finds_itself() {
        let s = random_set(100, 16, 1);
        let q = s.get("p00042").unwrap().to_vec();
        let top = cosine_top_n(&s, &q, s.ids(), 5).unwrap();
        assert_eq!(top[0].0, "p00042");
        assert!((top[0].1 - 1.0).abs() < 1e-9);
        assert!(cosine_top_n(&s, &[1.0], s.ids(), 5).is_err());
    }
}
