use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{CorpusStore, PaperRecord, Rejection};
use crate::text::normalize_key_text;

/// How the surviving record of a duplicate group is chosen.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergePolicy {
    /// Longest abstract, then smallest source tag.
    #[default]
    LongestAbstract,
    /// Longest reference list, then longest abstract, then smallest source tag.
    MostReferences,
}

/// A record id that was merged into another record.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MergedAway {
    pub id: String,
    pub dedup_of: String,
}

#[derive(Debug, Clone, Default)]
pub struct IngestOutcome {
    pub store: CorpusStore,
    pub rejected: Vec<Rejection>,
    pub merged: Vec<MergedAway>,
}

const DOI_PREFIXES: [&str; 5] = [
    "https://doi.org/",
    "http://doi.org/",
    "https://dx.doi.org/",
    "http://dx.doi.org/",
    "doi:",
];

/// Lowercased DOI with resolver prefixes removed; `None` for blank input.
pub fn canonical_doi(raw: &str) -> Option<String> {
    let mut doi = raw.trim().to_lowercase();
    for p in DOI_PREFIXES {
        if let Some(rest) = doi.strip_prefix(p) {
            doi = rest.trim().to_owned();
            break;
        }
    }
    (!doi.is_empty()).then_some(doi)
}

fn title_author_year_hash(record: &PaperRecord) -> String {
    let title = normalize_key_text(&record.title);
    let author = record
        .authors
        .first()
        .map(|a| normalize_key_text(a))
        .unwrap_or_default();
    let year = record.year.map(|y| y.to_string()).unwrap_or_default();
    let mut h = Sha256::new();
    h.update(title.as_bytes());
    h.update([0x1f]);
    h.update(author.as_bytes());
    h.update([0x1f]);
    h.update(year.as_bytes());
    format!("tay:{}", hex::encode(h.finalize()))
}

/// Canonical DOI when present, otherwise a hash of normalized title, first
/// author and year.
pub fn dedup_key(record: &PaperRecord) -> String {
    record
        .doi
        .as_deref()
        .and_then(canonical_doi)
        .unwrap_or_else(|| title_author_year_hash(record))
}

fn validate(mut r: PaperRecord) -> Result<PaperRecord, Rejection> {
    let reject = |r: &PaperRecord, reason: &str| Rejection {
        line: None,
        paper_id: (!r.paper_id.trim().is_empty()).then(|| r.paper_id.clone()),
        reason: reason.to_owned(),
    };
    r.paper_id = r.paper_id.trim().to_owned();
    if r.paper_id.is_empty() {
        return Err(reject(&r, "empty id"));
    }
    if r.title.trim().is_empty() {
        return Err(reject(&r, "empty title"));
    }
    if let Some(y) = r.year {
        if !(1000..=9999).contains(&y) {
            return Err(reject(&r, &format!("year {y} is not a 4-digit year")));
        }
    }
    r.doi = r.doi.as_deref().and_then(canonical_doi);
    let mut seen = HashSet::with_capacity(r.references.len());
    r.references.retain(|x| seen.insert(x.clone()));
    Ok(r)
}

fn source_tags(r: &PaperRecord) -> BTreeSet<String> {
    r.source
        .iter()
        .flat_map(|s| s.split(','))
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect()
}

fn min_tag(r: &PaperRecord) -> Option<String> {
    source_tags(r).into_iter().next()
}

/// Total order used to pick the surviving record of a group (smallest wins).
fn rank(policy: MergePolicy, a: &PaperRecord, b: &PaperRecord) -> Ordering {
    let abs = |r: &PaperRecord| r.abstract_text.chars().count();
    let primary = match policy {
        MergePolicy::LongestAbstract => abs(b).cmp(&abs(a)),
        MergePolicy::MostReferences => b
            .references
            .len()
            .cmp(&a.references.len())
            .then_with(|| abs(b).cmp(&abs(a))),
    };
    // Records without a source tag sort after tagged ones.
    let tag = match (min_tag(a), min_tag(b)) {
        (Some(x), Some(y)) => x.cmp(&y),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    };
    primary
        .then(tag)
        .then_with(|| a.paper_id.cmp(&b.paper_id))
        .then_with(|| {
            let ja = serde_json::to_string(a).unwrap_or_default();
            let jb = serde_json::to_string(b).unwrap_or_default();
            ja.cmp(&jb)
        })
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

fn merge_group(
    policy: MergePolicy,
    mut group: Vec<PaperRecord>,
) -> (PaperRecord, BTreeSet<String>) {
    group.sort_by(|a, b| rank(policy, a, b));
    let mut tags = BTreeSet::new();
    for r in &group {
        tags.extend(source_tags(r));
    }
    let mut it = group.into_iter();
    let mut kept = it.next().expect("non-empty group");
    let mut seen: HashSet<String> = kept.references.iter().cloned().collect();
    for other in it {
        if kept.doi.is_none() {
            kept.doi = other.doi.clone();
        }
        if kept.year.is_none() {
            kept.year = other.year;
        }
        if kept.venue.is_empty() {
            kept.venue = other.venue.clone();
        }
        if kept.authors.is_empty() {
            kept.authors = other.authors.clone();
        }
        if kept.article_type.is_none() {
            kept.article_type = other.article_type.clone();
        }
        for r in other.references {
            if seen.insert(r.clone()) {
                kept.references.push(r);
            }
        }
    }
    kept.source = (!tags.is_empty()).then(|| tags.iter().cloned().collect::<Vec<_>>().join(","));
    (kept, tags)
}

/// Builds a deduplicated store.
///
/// Records sharing an id, a canonical DOI or a title/author/year hash are
/// merged (transitively). The result is independent of input order.
pub fn ingest(
    records: impl IntoIterator<Item = PaperRecord>,
    policy: MergePolicy,
) -> IngestOutcome {
    let mut rejected = Vec::new();
    let mut valid = Vec::new();
    for r in records {
        match validate(r) {
            Ok(r) => valid.push(r),
            Err(rej) => rejected.push(rej),
        }
    }

    let mut uf = UnionFind::new(valid.len());
    let mut first_by_key: HashMap<String, usize> = HashMap::new();
    for (i, r) in valid.iter().enumerate() {
        let mut keys = vec![format!("id:{}", r.paper_id), title_author_year_hash(r)];
        if let Some(doi) = &r.doi {
            keys.push(format!("doi:{doi}"));
        }
        for k in keys {
            match first_by_key.get(&k) {
                Some(&j) => uf.union(i, j),
                None => {
                    first_by_key.insert(k, i);
                }
            }
        }
    }

    let mut groups: BTreeMap<usize, Vec<PaperRecord>> = BTreeMap::new();
    for (i, r) in valid.into_iter().enumerate() {
        let root = uf.find(i);
        groups.entry(root).or_default().push(r);
    }

    let mut store = BTreeMap::new();
    let mut provenance = BTreeMap::new();
    let mut merged = Vec::new();
    let mut redirect: HashMap<String, String> = HashMap::new();
    for (_, group) in groups {
        let ids: BTreeSet<String> = group.iter().map(|r| r.paper_id.clone()).collect();
        let (kept, tags) = merge_group(policy, group);
        for id in ids {
            if id != kept.paper_id {
                redirect.insert(id.clone(), kept.paper_id.clone());
                merged.push(MergedAway {
                    id,
                    dedup_of: kept.paper_id.clone(),
                });
            }
        }
        provenance.insert(kept.paper_id.clone(), tags);
        store.insert(kept.paper_id.clone(), kept);
    }

    if !redirect.is_empty() {
        for r in store.values_mut() {
            let mut seen = HashSet::with_capacity(r.references.len());
            let refs = std::mem::take(&mut r.references);
            for x in refs {
                let x = redirect.get(&x).cloned().unwrap_or(x);
                if seen.insert(x.clone()) {
                    r.references.push(x);
                }
            }
        }
    }

    merged.sort();
    rejected.sort_by(|a, b| (&a.paper_id, &a.reason).cmp(&(&b.paper_id, &b.reason)));
    IngestOutcome {
        store: CorpusStore::from_parts(store, provenance),
        rejected,
        merged,
    }
}
