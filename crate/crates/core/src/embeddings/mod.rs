//! Externally produced paper vectors and exact cosine neighbourhoods.

mod knn;

use std::collections::BTreeMap;
use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::IdTable;

pub use knn::{
    cosine_top_n, read_neighbor_table, topk_neighbors, write_neighbor_table, NeighborTable,
};

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("vector {id} has dimension {got}, expected {expected}")]
    Dimension {
        id: String,
        got: usize,
        expected: usize,
    },
    #[error("duplicate vector id {0}")]
    Duplicate(String),
    #[error("vector {id} has a non-finite component at position {pos}")]
    NonFinite { id: String, pos: usize },
    #[error("vector {0} has zero norm")]
    ZeroVector(String),
    #[error("id {0} has no vector")]
    Unknown(String),
    #[error("k = {k} must be smaller than the pool size {pool}")]
    KTooLarge { k: usize, pool: usize },
    #[error("vector file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("not a vector cache: {0}")]
    BadCache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Paper id to dense vector. Rows are stored in id order as `f32`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    pub model_name: String,
    dim: usize,
    ids: IdTable,
    data: Vec<f32>,
}

impl EmbeddingSet {
    /// Builds a set from `(id, vector)` pairs, validating dimension,
    /// duplicates and finiteness.
    pub fn from_rows(
        model_name: impl Into<String>,
        rows: impl IntoIterator<Item = (String, Vec<f32>)>,
        expected_dim: Option<usize>,
    ) -> Result<Self, EmbeddingError> {
        let mut map: BTreeMap<String, Vec<f32>> = BTreeMap::new();
        let mut dim = expected_dim;
        for (id, v) in rows {
            check_row(&id, &v, &mut dim)?;
            if map.contains_key(&id) {
                return Err(EmbeddingError::Duplicate(id));
            }
            map.insert(id, v);
        }
        let dim = dim.unwrap_or(0);
        let mut data = Vec::with_capacity(map.len() * dim);
        for v in map.values() {
            data.extend_from_slice(v);
        }
        Ok(Self {
            model_name: model_name.into(),
            dim,
            ids: IdTable::new(map.into_keys()),
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &IdTable {
        &self.ids
    }

    pub fn get(&self, id: &str) -> Option<&[f32]> {
        self.ids.index_of(id).map(|i| self.row(i))
    }

    #[inline]
    pub fn row(&self, i: u32) -> &[f32] {
        let s = i as usize * self.dim;
        &self.data[s..s + self.dim]
    }

    /// Scales every vector to unit Euclidean norm.
    pub fn normalize(&self) -> Result<Self, EmbeddingError> {
        let mut data = self.data.clone();
        for (i, chunk) in data.chunks_mut(self.dim.max(1)).enumerate() {
            let norm = norm64(chunk);
            if norm == 0.0 {
                return Err(EmbeddingError::ZeroVector(self.ids.id(i as u32).to_owned()));
            }
            for x in chunk.iter_mut() {
                *x = (*x as f64 / norm) as f32;
            }
        }
        Ok(Self {
            model_name: self.model_name.clone(),
            dim: self.dim,
            ids: self.ids.clone(),
            data,
        })
    }

    /// Iterates `(id, vector)` in id order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f32])> {
        (0..self.len() as u32).map(|i| (self.ids.id(i), self.row(i)))
    }
}

fn check_row(id: &str, v: &[f32], dim: &mut Option<usize>) -> Result<(), EmbeddingError> {
    match *dim {
        Some(d) if d != v.len() => {
            return Err(EmbeddingError::Dimension {
                id: id.to_owned(),
                got: v.len(),
                expected: d,
            })
        }
        None => *dim = Some(v.len()),
        _ => {}
    }
    if let Some(pos) = v.iter().position(|x| !x.is_finite()) {
        return Err(EmbeddingError::NonFinite {
            id: id.to_owned(),
            pos,
        });
    }
    Ok(())
}

#[inline]
pub(crate) fn norm64(v: &[f32]) -> f64 {
    v.iter().map(|&x| x as f64 * x as f64).sum::<f64>().sqrt()
}

#[inline]
pub(crate) fn dot64(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum()
}

/// A vector component as written in JSON: a number, or one of the strings
/// `"NaN"`, `"inf"`, `"-inf"` some exporters emit.
#[derive(Deserialize)]
#[serde(untagged)]
enum Component {
    Num(f64),
    Text(String),
}

impl Component {
    fn value(&self) -> f64 {
        match self {
            Component::Num(x) => *x,
            Component::Text(s) => s.trim().parse::<f64>().unwrap_or(f64::NAN),
        }
    }
}

#[derive(Deserialize)]
struct VectorLine {
    id: String,
    vector: Vec<Component>,
}

#[derive(Serialize)]
struct VectorLineOut<'a> {
    id: &'a str,
    vector: &'a [f32],
}

/// Reads JSON-lines `{id, vector}`.
pub fn load_vectors<R: BufRead>(
    r: R,
    model_name: &str,
    expected_dim: Option<usize>,
) -> Result<EmbeddingSet, EmbeddingError> {
    let mut rows = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: VectorLine = serde_json::from_str(&line).map_err(|e| EmbeddingError::Parse {
            line: i + 1,
            msg: e.to_string(),
        })?;
        let vec: Vec<f32> = v.vector.iter().map(|c| c.value() as f32).collect();
        rows.push((v.id, vec));
    }
    EmbeddingSet::from_rows(model_name, rows, expected_dim)
}

pub fn write_vectors<W: Write>(mut w: W, set: &EmbeddingSet) -> Result<(), EmbeddingError> {
    for (id, v) in set.iter() {
        serde_json::to_writer(&mut w, &VectorLineOut { id, vector: v })?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

const CACHE_MAGIC: &[u8; 8] = b"AGVEC\x00\x00\x01";

/// Packed cache: magic, dim (u32), count (u64), model name, the id table
/// (u32 length-prefixed UTF-8), then row-major little-endian `f32`.
pub fn write_cache<W: Write>(mut w: W, set: &EmbeddingSet) -> Result<(), EmbeddingError> {
    w.write_all(CACHE_MAGIC)?;
    w.write_all(&(set.dim as u32).to_le_bytes())?;
    w.write_all(&(set.len() as u64).to_le_bytes())?;
    write_str(&mut w, &set.model_name)?;
    for id in set.ids.ids() {
        write_str(&mut w, id)?;
    }
    for x in &set.data {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

fn write_str<W: Write>(w: &mut W, s: &str) -> std::io::Result<()> {
    w.write_all(&(s.len() as u32).to_le_bytes())?;
    w.write_all(s.as_bytes())
}

fn read_exact<R: Read, const N: usize>(r: &mut R) -> Result<[u8; N], EmbeddingError> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)
        .map_err(|e| EmbeddingError::BadCache(e.to_string()))?;
    Ok(b)
}

fn read_str<R: Read>(r: &mut R) -> Result<String, EmbeddingError> {
    let n = u32::from_le_bytes(read_exact(r)?) as usize;
    let mut b = vec![0u8; n];
    r.read_exact(&mut b)
        .map_err(|e| EmbeddingError::BadCache(e.to_string()))?;
    String::from_utf8(b).map_err(|e| EmbeddingError::BadCache(e.to_string()))
}

pub fn read_cache<R: Read>(mut r: R) -> Result<EmbeddingSet, EmbeddingError> {
    if &read_exact::<_, 8>(&mut r)? != CACHE_MAGIC {
        return Err(EmbeddingError::BadCache("bad magic".into()));
    }
    let dim = u32::from_le_bytes(read_exact(&mut r)?) as usize;
    let count = u64::from_le_bytes(read_exact(&mut r)?) as usize;
    let model = read_str(&mut r)?;
    let mut ids = Vec::with_capacity(count);
    for _ in 0..count {
        ids.push(read_str(&mut r)?);
    }
    let mut rows = Vec::with_capacity(count);
    for id in ids {
        let mut v = Vec::with_capacity(dim);
        for _ in 0..dim {
            v.push(f32::from_le_bytes(read_exact(&mut r)?));
        }
        rows.push((id, v));
    }
    EmbeddingSet::from_rows(model, rows, Some(dim))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds::rng_for;
    use rand_distr::{Distribution, StandardNormal};

    pub(crate) fn random_set(n: usize, dim: usize, seed: u64) -> EmbeddingSet {
        let mut rng = rng_for(seed, &[]);
        let rows = (0..n).map(|i| {
            let v: Vec<f32> = (0..dim)
                .map(|_| {
                    let x: f64 = StandardNormal.sample(&mut rng);
                    x as f32
                })
                .collect();
            (format!("p{i:05}"), v)
        });
        EmbeddingSet::from_rows("toy", rows, None).unwrap()
    }

    #[test]
    fn loads_three_vectors() {
        let text = "{\"id\":\"a\",\"vector\":[1,0,0,0]}\n{\"id\":\"b\",\"vector\":[0,1,0,0]}\n{\"id\":\"c\",\"vector\":[0,0,1,0.5]}\n";
        let s = load_vectors(text.as_bytes(), "m", None).unwrap();
        assert_eq!((s.dim(), s.len()), (4, 3));
        assert_eq!(s.get("c").unwrap(), &[0.0, 0.0, 1.0, 0.5]);
    }

    #[test]
    fn validation_names_the_offender() {
        let nan = "{\"id\":\"a\",\"vector\":[1,0]}\n{\"id\":\"bad\",\"vector\":[\"NaN\",0]}\n";
        let e = load_vectors(nan.as_bytes(), "m", None).unwrap_err();
        assert!(
            matches!(e, EmbeddingError::NonFinite { ref id, pos: 0 } if id == "bad"),
            "{e}"
        );
        let dup = "{\"id\":\"a\",\"vector\":[1,0]}\n{\"id\":\"a\",\"vector\":[0,1]}\n";
        assert!(matches!(
            load_vectors(dup.as_bytes(), "m", None),
            Err(EmbeddingError::Duplicate(_))
        ));
        let dim = "{\"id\":\"a\",\"vector\":[1,0]}\n{\"id\":\"b\",\"vector\":[0,1,2]}\n";
        assert!(matches!(
            load_vectors(dim.as_bytes(), "m", None),
            Err(EmbeddingError::Dimension { .. })
        ));
        assert!(matches!(
            load_vectors("{\"id\":\"a\",\"vector\":[1,0]}".as_bytes(), "m", Some(3)),
            Err(EmbeddingError::Dimension { .. })
        ));
        let big = "{\"id\":\"huge\",\"vector\":[1e300,0]}\n";
        assert!(matches!(
            load_vectors(big.as_bytes(), "m", None),
            Err(EmbeddingError::NonFinite { .. })
        ));
    }

    #[test]
    fn text_and_cache_round_trip() {
        let s = random_set(50, 16, 3);
        let mut buf = Vec::new();
        write_vectors(&mut buf, &s).unwrap();
        let back = load_vectors(buf.as_slice(), "toy", Some(16)).unwrap();
        for ((_, a), (_, b)) in s.iter().zip(back.iter()) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() <= 1e-7);
            }
        }
        let mut bin = Vec::new();
        write_cache(&mut bin, &s).unwrap();
        assert_eq!(read_cache(bin.as_slice()).unwrap(), s);
        assert!(read_cache(&b"nope"[..]).is_err());
    }

    #[test]
    fn normalize_examples() {
        let s = EmbeddingSet::from_rows("m", [("a".to_string(), vec![3.0, 4.0])], None).unwrap();
        let n = s.normalize().unwrap();
        assert_eq!(n.get("a").unwrap(), &[0.6, 0.8]);
        let again = n.normalize().unwrap();
        for (x, y) in n.get("a").unwrap().iter().zip(again.get("a").unwrap()) {
            assert!((x - y).abs() < 1e-7);
        }
        let z = EmbeddingSet::from_rows("m", [("z".to_string(), vec![0.0, 0.0])], None).unwrap();
        assert!(matches!(z.normalize(), Err(EmbeddingError::ZeroVector(id)) if id == "z"));
    }

    #[test]
    fn normalized_norms() {
        let s = random_set(100, 64, 8).normalize().unwrap();
        for (_, v) in s.iter() {
            assert!((norm64(v) - 1.0).abs() < 1e-6);
        }
    }
}
