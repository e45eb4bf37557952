//! Planted two-level corpora with known L1/L2 ground truth.
//!
//! Papers are grouped `n_l1 x l2_per_l1 x papers_per_l2`. Assortativity comes
//! from four sources: references into per-L2, per-L1 and global pools
//! (bibliographic coupling), citations between members (direct edges),
//! external citers (co-citation), and text vocabulary. Embeddings are an L1
//! centroid plus an L2 offset plus Gaussian noise, normalized.
//!
//! Each pool item and each potential citation target is taken independently
//! with the `in_l2` probability inside the paper's own L2, `in_l1` inside the
//! rest of its L1 and `cross` elsewhere, so equal probabilities plant no
//! structure at all.

mod ari;

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::community::{CommunityError, Level, Partition};
use crate::corpus::{ingest, CorpusStore, Domain, MergePolicy, PaperRecord};
use crate::embeddings::{EmbeddingError, EmbeddingSet};
use crate::graph::CiterTable;
use crate::retrieval::AgendaQuery;
use crate::seeds::rng_for;

pub use ari::adjusted_rand_index;

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("labelings differ in key {0}")]
    KeyMismatch(String),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Community(#[from] CommunityError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbeddingSpec {
    pub dim: usize,
    pub l1_scale: f64,
    pub l2_scale: f64,
    /// Per-coordinate noise standard deviation.
    pub noise: f64,
    /// L2 offset scale used for the query vectors.
    pub query_l2_scale: f64,
}

impl Default for EmbeddingSpec {
    fn default() -> Self {
        Self {
            dim: 64,
            l1_scale: 1.0,
            l2_scale: 0.5,
            noise: 0.05,
            query_l2_scale: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TextSpec {
    pub topic_tokens: usize,
    pub agenda_tokens: usize,
    pub filler_vocab: usize,
    pub filler_len: usize,
    pub topic_len: usize,
    /// Agenda slots per abstract; 0 suppresses agenda vocabulary entirely.
    pub agenda_len: usize,
    /// Probability an agenda slot uses the paper's own agenda; otherwise a
    /// uniformly chosen agenda of the same L1 (possibly its own).
    pub agenda_purity: f64,
}

impl Default for TextSpec {
    fn default() -> Self {
        Self {
            topic_tokens: 8,
            agenda_tokens: 4,
            filler_vocab: 400,
            filler_len: 30,
            topic_len: 6,
            agenda_len: 4,
            agenda_purity: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlantedSpec {
    pub n_l1: usize,
    pub l2_per_l1: usize,
    pub papers_per_l2: usize,
    pub p_ref_in_l2: f64,
    pub p_ref_in_l1: f64,
    pub p_ref_cross: f64,
    pub ref_pool_l2: usize,
    pub ref_pool_l1: usize,
    pub ref_pool_global: usize,
    pub p_cite_in_l2: f64,
    pub p_cite_in_l1: f64,
    pub p_cite_cross: f64,
    pub citers_per_l2: usize,
    pub p_citer_in_l2: f64,
    pub p_citer_in_l1: f64,
    pub embedding: EmbeddingSpec,
    pub text: TextSpec,
    pub n_queries: usize,
    pub representatives: usize,
    /// Extra records sharing a DOI with an existing paper.
    pub n_duplicates: usize,
    /// Extra papers with no references, citations or citers.
    pub n_orphans: usize,
    pub seed: u64,
}

impl Default for PlantedSpec {
    fn default() -> Self {
        Self::strong()
    }
}

impl PlantedSpec {
    /// 4 x 3 x 40 with strong assortativity at both levels.
    pub fn strong() -> Self {
        Self {
            n_l1: 4,
            l2_per_l1: 3,
            papers_per_l2: 40,
            p_ref_in_l2: 0.3,
            p_ref_in_l1: 0.01,
            p_ref_cross: 0.001,
            ref_pool_l2: 40,
            ref_pool_l1: 60,
            ref_pool_global: 2000,
            p_cite_in_l2: 0.08,
            p_cite_in_l1: 0.001,
            p_cite_cross: 0.0,
            citers_per_l2: 30,
            p_citer_in_l2: 0.25,
            p_citer_in_l1: 0.0,
            embedding: EmbeddingSpec::default(),
            text: TextSpec::default(),
            n_queries: 12,
            representatives: 3,
            n_duplicates: 0,
            n_orphans: 0,
            seed: 1,
        }
    }

    /// Embeddings carry L1 strongly and L2 weakly.
    pub fn hierarchical_gap() -> Self {
        Self {
            n_l1: 4,
            l2_per_l1: 5,
            papers_per_l2: 40,
            embedding: EmbeddingSpec {
                l1_scale: 1.0,
                l2_scale: 0.25,
                noise: 0.12,
                ..EmbeddingSpec::default()
            },
            ..Self::strong()
        }
    }

    /// Agenda structure lives in references and citations; the text carries
    /// only a faint, leaky agenda signal.
    pub fn dissociated() -> Self {
        Self {
            n_l1: 5,
            l2_per_l1: 10,
            papers_per_l2: 30,
            p_cite_in_l2: 0.4,
            p_cite_in_l1: 0.004,
            p_cite_cross: 0.0002,
            embedding: EmbeddingSpec {
                l2_scale: 0.3,
                noise: 0.08,
                query_l2_scale: 0.05,
                ..EmbeddingSpec::default()
            },
            text: TextSpec {
                agenda_len: 2,
                agenda_purity: 0.15,
                ..TextSpec::default()
            },
            n_queries: 50,
            ..Self::strong()
        }
    }

    /// About `n` papers in blocks of 200 with 10 agendas per sub-field.
    pub fn scale(n: usize) -> Self {
        Self {
            n_l1: (n / 2000).max(1),
            l2_per_l1: 10,
            papers_per_l2: 200,
            p_ref_in_l2: 0.2,
            p_ref_in_l1: 0.005,
            p_ref_cross: 0.0002,
            ref_pool_l2: 40,
            ref_pool_l1: 300,
            ref_pool_global: 20000,
            p_cite_in_l2: 0.01,
            p_cite_in_l1: 0.0002,
            p_cite_cross: 0.0,
            citers_per_l2: 40,
            p_citer_in_l2: 0.05,
            ..Self::strong()
        }
    }

    pub fn n_l2(&self) -> usize {
        self.n_l1 * self.l2_per_l1
    }

    pub fn n_papers(&self) -> usize {
        self.n_l2() * self.papers_per_l2 + self.n_orphans
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidSpec(m.to_owned()));
        let probs = [
            ("p_ref_in_l2", self.p_ref_in_l2),
            ("p_ref_in_l1", self.p_ref_in_l1),
            ("p_ref_cross", self.p_ref_cross),
            ("p_cite_in_l2", self.p_cite_in_l2),
            ("p_cite_in_l1", self.p_cite_in_l1),
            ("p_cite_cross", self.p_cite_cross),
            ("p_citer_in_l2", self.p_citer_in_l2),
            ("p_citer_in_l1", self.p_citer_in_l1),
            ("agenda_purity", self.text.agenda_purity),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return bad(&format!("{name} = {p} is not a probability"));
            }
        }
        if !(self.p_ref_in_l2 >= self.p_ref_in_l1 && self.p_ref_in_l1 >= self.p_ref_cross) {
            return bad("reference probabilities must satisfy in_l2 >= in_l1 >= cross");
        }
        if !(self.p_cite_in_l2 >= self.p_cite_in_l1 && self.p_cite_in_l1 >= self.p_cite_cross) {
            return bad("citation probabilities must satisfy in_l2 >= in_l1 >= cross");
        }
        let counts = [
            ("n_l1", self.n_l1),
            ("l2_per_l1", self.l2_per_l1),
            ("papers_per_l2", self.papers_per_l2),
            ("ref_pool_l2", self.ref_pool_l2),
            ("ref_pool_l1", self.ref_pool_l1),
            ("ref_pool_global", self.ref_pool_global),
            ("embedding.dim", self.embedding.dim),
            ("text.topic_tokens", self.text.topic_tokens),
            ("text.agenda_tokens", self.text.agenda_tokens),
            ("text.filler_vocab", self.text.filler_vocab),
            ("representatives", self.representatives),
        ];
        for (name, c) in counts {
            if c == 0 {
                return bad(&format!("{name} must be at least 1"));
            }
        }
        let e = &self.embedding;
        for (name, x) in [
            ("l1_scale", e.l1_scale),
            ("l2_scale", e.l2_scale),
            ("noise", e.noise),
            ("query_l2_scale", e.query_l2_scale),
        ] {
            if !x.is_finite() || x < 0.0 {
                return bad(&format!("embedding.{name} must be finite and non-negative"));
            }
        }
        if self.representatives > self.papers_per_l2 {
            return bad("representatives exceeds papers_per_l2");
        }
        if self.n_duplicates > self.n_l2() * self.papers_per_l2 {
            return bad("more duplicates than papers");
        }
        Ok(())
    }
}

/// Ground truth of a planted corpus.
#[derive(Debug, Clone)]
pub struct PlantedTruth {
    pub l1: Partition,
    pub l2: Partition,
    /// `(duplicate record id, surviving paper id)`
    pub duplicates: Vec<(String, String)>,
    pub orphans: Vec<String>,
    /// Target L2 of each query.
    pub query_targets: BTreeMap<String, u32>,
}

#[derive(Debug, Clone)]
pub struct Planted {
    /// Raw records including planted duplicates.
    pub records: Vec<PaperRecord>,
    /// `records` after ingestion.
    pub store: CorpusStore,
    pub citers: CiterTable,
    pub embeddings: EmbeddingSet,
    pub queries: Vec<AgendaQuery>,
    /// Toy query embeddings keyed by query id.
    pub query_vectors: EmbeddingSet,
    pub truth: PlantedTruth,
}

const STAGE_CENTROID: u64 = 1;
const STAGE_LAYOUT: u64 = 2;
const STAGE_PAPER: u64 = 3;
const STAGE_CITER: u64 = 4;
const STAGE_DUP: u64 = 5;
const STAGE_QUERY: u64 = 6;

pub const TOY_MODEL: &str = "toy";

fn topic_token(l1: usize, j: usize) -> String {
    format!("topic{l1}x{j}")
}

fn agenda_token(l2: usize, j: usize) -> String {
    format!("agenda{l2}x{j}")
}

fn domain_of(l1: usize) -> Domain {
    Domain::ALL[l1 % Domain::ALL.len()]
}

fn binomial(rng: &mut ChaCha8Rng, n: usize, p: f64) -> usize {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    Binomial::new(n as u64, p.min(1.0)).unwrap().sample(rng) as usize
}

/// `k` distinct values from `0..n` skipping the range `hole`, ascending.
fn sample_outside(
    rng: &mut ChaCha8Rng,
    n: usize,
    hole: std::ops::Range<usize>,
    k: usize,
) -> Vec<usize> {
    let avail = n - hole.len();
    let mut v: Vec<usize> = sample(rng, avail, k.min(avail))
        .into_iter()
        .map(|i| if i >= hole.start { i + hole.len() } else { i })
        .collect();
    v.sort_unstable();
    v
}

fn gaussian_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let n = Normal::new(0.0, 1.0).unwrap();
    loop {
        let v: Vec<f64> = (0..dim).map(|_| n.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn toy_vector(rng: &mut ChaCha8Rng, c1: &[f64], c2: &[f64], l2_scale: f64, noise: f64) -> Vec<f32> {
    let nd = Normal::new(0.0, noise.max(f64::MIN_POSITIVE)).unwrap();
    let v: Vec<f64> = c1
        .iter()
        .zip(c2)
        .map(|(a, b)| a + l2_scale * b + if noise > 0.0 { nd.sample(rng) } else { 0.0 })
        .collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
    v.into_iter().map(|x| (x / norm) as f32).collect()
}

struct Layout {
    /// Non-orphan paper indices ordered by (l1, l2).
    ordered: Vec<usize>,
    /// Position of each paper in `ordered` (orphans: usize::MAX).
    pos: Vec<usize>,
    l1_of: Vec<usize>,
    l2_of: Vec<usize>,
    orphan: Vec<bool>,
    ids: Vec<String>,
}

impl Layout {
    fn l2_range(&self, spec: &PlantedSpec, l2: usize) -> std::ops::Range<usize> {
        l2 * spec.papers_per_l2..(l2 + 1) * spec.papers_per_l2
    }

    fn l1_range(&self, spec: &PlantedSpec, l1: usize) -> std::ops::Range<usize> {
        let per = spec.l2_per_l1 * spec.papers_per_l2;
        l1 * per..(l1 + 1) * per
    }
}

fn layout(spec: &PlantedSpec) -> Layout {
    let n_members = spec.n_l2() * spec.papers_per_l2;
    let n = spec.n_papers();
    let mut rng = rng_for(spec.seed, &[STAGE_LAYOUT]);
    let mut l1_of = Vec::with_capacity(n);
    let mut l2_of = Vec::with_capacity(n);
    for k in 0..n_members {
        let l2 = k / spec.papers_per_l2;
        l2_of.push(l2);
        l1_of.push(l2 / spec.l2_per_l1);
    }
    for _ in 0..spec.n_orphans {
        let l2 = rng.random_range(0..spec.n_l2());
        l2_of.push(l2);
        l1_of.push(l2 / spec.l2_per_l1);
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let width = n.to_string().len().max(5);
    let ids = perm.iter().map(|p| format!("p{p:0width$}")).collect();
    Layout {
        ordered: (0..n_members).collect(),
        pos: (0..n)
            .map(|k| if k < n_members { k } else { usize::MAX })
            .collect(),
        l1_of,
        l2_of,
        orphan: (0..n).map(|k| k >= n_members).collect(),
        ids,
    }
}

struct Centroids {
    l1: Vec<Vec<f64>>,
    l2: Vec<Vec<f64>>,
}

fn centroids(spec: &PlantedSpec) -> Centroids {
    let dim = spec.embedding.dim;
    let l1 = (0..spec.n_l1)
        .map(|a| {
            let mut rng = rng_for(spec.seed, &[STAGE_CENTROID, 0, a as u64]);
            gaussian_unit(&mut rng, dim)
                .into_iter()
                .map(|x| x * spec.embedding.l1_scale)
                .collect()
        })
        .collect();
    let l2 = (0..spec.n_l2())
        .map(|g| {
            let mut rng = rng_for(spec.seed, &[STAGE_CENTROID, 1, g as u64]);
            gaussian_unit(&mut rng, dim)
        })
        .collect();
    Centroids { l1, l2 }
}

fn paper_text(spec: &PlantedSpec, rng: &mut ChaCha8Rng, l1: usize, l2: usize) -> (String, String) {
    let t = &spec.text;
    let first_sibling = (l2 / spec.l2_per_l1) * spec.l2_per_l1;
    let agenda = |rng: &mut ChaCha8Rng| {
        let g = if rng.random_bool(t.agenda_purity) {
            l2
        } else {
            first_sibling + rng.random_range(0..spec.l2_per_l1)
        };
        agenda_token(g, rng.random_range(0..t.agenda_tokens))
    };
    let mut title = vec![
        topic_token(l1, rng.random_range(0..t.topic_tokens)),
        topic_token(l1, rng.random_range(0..t.topic_tokens)),
    ];
    if t.agenda_len > 0 {
        title.push(agenda(rng));
    }
    let mut words: Vec<String> = Vec::new();
    for _ in 0..t.filler_len {
        words.push(format!("word{}", rng.random_range(0..t.filler_vocab)));
    }
    for _ in 0..t.topic_len {
        words.push(topic_token(l1, rng.random_range(0..t.topic_tokens)));
    }
    for _ in 0..t.agenda_len {
        words.push(agenda(rng));
    }
    words.shuffle(rng);
    (title.join(" "), words.join(" "))
}

/// Generates a planted corpus. Every random draw is keyed by stage and
/// item index, so output does not depend on thread count.
pub fn generate(spec: &PlantedSpec) -> Result<Planted, SynthError> {
    spec.validate()?;
    let lay = layout(spec);
    let cents = centroids(spec);
    let n = spec.n_papers();
    let n_members = lay.ordered.len();
    let e = &spec.embedding;

    let generated: Vec<(PaperRecord, Vec<f32>)> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_for(spec.seed, &[STAGE_PAPER, k as u64]);
            let (l1, l2) = (lay.l1_of[k], lay.l2_of[k]);
            let (title, abs) = paper_text(spec, &mut rng, l1, l2);
            let mut rec = PaperRecord::new(lay.ids[k].clone(), title, domain_of(l1));
            rec.abstract_text = abs;
            rec.doi = Some(format!("10.5555/synth.{}", lay.ids[k]));
            rec.year = Some(2000 + rng.random_range(0..24));
            rec.venue = format!("Synthetic Letters {l1}");
            rec.authors = vec![format!("Author {}", rng.random_range(0..10_000))];
            rec.article_type = Some("article".into());
            rec.source = Some("synth".into());
            if !lay.orphan[k] {
                let mut refs = Vec::new();
                // L2 pools: own, siblings in the same L1, everything else
                let per1 = spec.l2_per_l1 * spec.ref_pool_l2;
                let all2 = spec.n_l2() * spec.ref_pool_l2;
                let own2 = l2 * spec.ref_pool_l2..(l2 + 1) * spec.ref_pool_l2;
                let own1 = l1 * per1..(l1 + 1) * per1;
                let mut pool2 = Vec::new();
                let c = binomial(&mut rng, own2.len(), spec.p_ref_in_l2);
                pool2.extend(
                    sample(&mut rng, own2.len(), c)
                        .into_iter()
                        .map(|j| own2.start + j),
                );
                let c = binomial(&mut rng, per1 - own2.len(), spec.p_ref_in_l1);
                pool2.extend(
                    sample_outside(
                        &mut rng,
                        per1,
                        own2.start - own1.start..own2.end - own1.start,
                        c,
                    )
                    .into_iter()
                    .map(|j| own1.start + j),
                );
                let c = binomial(&mut rng, all2 - per1, spec.p_ref_cross);
                pool2.extend(sample_outside(&mut rng, all2, own1, c));
                refs.extend(
                    pool2
                        .into_iter()
                        .map(|i| format!("r2x{}x{}", i / spec.ref_pool_l2, i % spec.ref_pool_l2)),
                );
                // L1 pools: own, everything else
                let all1 = spec.n_l1 * spec.ref_pool_l1;
                let own = l1 * spec.ref_pool_l1..(l1 + 1) * spec.ref_pool_l1;
                let mut pool1 = Vec::new();
                let c = binomial(&mut rng, own.len(), spec.p_ref_in_l1);
                pool1.extend(
                    sample(&mut rng, own.len(), c)
                        .into_iter()
                        .map(|j| own.start + j),
                );
                let c = binomial(&mut rng, all1 - own.len(), spec.p_ref_cross);
                pool1.extend(sample_outside(&mut rng, all1, own, c));
                refs.extend(
                    pool1
                        .into_iter()
                        .map(|i| format!("r1x{}x{}", i / spec.ref_pool_l1, i % spec.ref_pool_l1)),
                );
                let c = binomial(&mut rng, spec.ref_pool_global, spec.p_ref_cross);
                refs.extend(
                    sample(&mut rng, spec.ref_pool_global, c)
                        .into_iter()
                        .map(|j| format!("rgx{j}")),
                );

                let me = lay.pos[k];
                let r2 = lay.l2_range(spec, l2);
                let r1 = lay.l1_range(spec, l1);
                let mut targets = Vec::new();
                let c = binomial(&mut rng, r2.len() - 1, spec.p_cite_in_l2);
                targets.extend(
                    sample_outside(&mut rng, r2.len(), me - r2.start..me - r2.start + 1, c)
                        .into_iter()
                        .map(|i| r2.start + i),
                );
                let c = binomial(&mut rng, r1.len() - r2.len(), spec.p_cite_in_l1);
                targets.extend(
                    sample_outside(
                        &mut rng,
                        r1.len(),
                        r2.start - r1.start..r2.end - r1.start,
                        c,
                    )
                    .into_iter()
                    .map(|i| r1.start + i),
                );
                let c = binomial(&mut rng, n_members - r1.len(), spec.p_cite_cross);
                targets.extend(sample_outside(&mut rng, n_members, r1.clone(), c));
                refs.extend(targets.into_iter().map(|p| lay.ids[lay.ordered[p]].clone()));
                rec.references = refs;
            }
            let v = toy_vector(&mut rng, &cents.l1[l1], &cents.l2[l2], e.l2_scale, e.noise);
            (rec, v)
        })
        .collect();

    let mut citers = CiterTable::default();
    let citer_lists: Vec<(String, Vec<String>)> = (0..spec.n_l2())
        .into_par_iter()
        .flat_map_iter(|g| {
            let l1 = g / spec.l2_per_l1;
            let lay = &lay;
            (0..spec.citers_per_l2).map(move |j| {
                let mut rng = rng_for(spec.seed, &[STAGE_CITER, g as u64, j as u64]);
                let r2 = lay.l2_range(spec, g);
                let r1 = lay.l1_range(spec, l1);
                let mut cited = Vec::new();
                let c = binomial(&mut rng, r2.len(), spec.p_citer_in_l2);
                cited.extend(
                    sample(&mut rng, r2.len(), c)
                        .into_iter()
                        .map(|i| r2.start + i),
                );
                let c = binomial(&mut rng, r1.len() - r2.len(), spec.p_citer_in_l1);
                cited.extend(
                    sample_outside(
                        &mut rng,
                        r1.len(),
                        r2.start - r1.start..r2.end - r1.start,
                        c,
                    )
                    .into_iter()
                    .map(|i| r1.start + i),
                );
                (
                    format!("cx{g}x{j}"),
                    cited
                        .into_iter()
                        .map(|p| lay.ids[lay.ordered[p]].clone())
                        .collect(),
                )
            })
        })
        .collect();
    for (c, cited) in citer_lists {
        if !cited.is_empty() {
            citers.insert(c, cited);
        }
    }

    let mut records: Vec<PaperRecord> = Vec::with_capacity(n + spec.n_duplicates);
    let mut rows = Vec::with_capacity(n);
    for (rec, v) in generated {
        rows.push((rec.paper_id.clone(), v));
        records.push(rec);
    }
    let mut duplicates = Vec::new();
    let mut rng = rng_for(spec.seed, &[STAGE_DUP]);
    for k in sample(&mut rng, n_members, spec.n_duplicates).into_iter() {
        let orig = &records[lay.ordered[k]];
        let mut d = orig.clone();
        d.paper_id = format!("{}dup", orig.paper_id);
        d.abstract_text.clear();
        d.title = orig.title.to_uppercase();
        d.source = Some("mirror".into());
        duplicates.push((d.paper_id.clone(), orig.paper_id.clone()));
        records.push(d);
    }
    duplicates.sort();

    let embeddings = EmbeddingSet::from_rows(TOY_MODEL, rows, Some(e.dim))?;

    let mut l2_order: Vec<usize> = (0..spec.n_l2()).collect();
    l2_order.shuffle(&mut rng_for(spec.seed, &[STAGE_QUERY]));
    let width = spec.n_queries.to_string().len().max(3);
    let mut queries = Vec::with_capacity(spec.n_queries);
    let mut qrows = Vec::with_capacity(spec.n_queries);
    let mut query_targets = BTreeMap::new();
    for q in 0..spec.n_queries {
        let mut rng = rng_for(spec.seed, &[STAGE_QUERY, q as u64 + 1]);
        let g = l2_order[q % l2_order.len()];
        let l1 = g / spec.l2_per_l1;
        let r2 = lay.l2_range(spec, g);
        let mut reps: Vec<String> = sample(&mut rng, r2.len(), spec.representatives)
            .into_iter()
            .map(|i| lay.ids[lay.ordered[r2.start + i]].clone())
            .collect();
        reps.sort();
        let mut words: Vec<String> = (0..2)
            .map(|_| topic_token(l1, rng.random_range(0..spec.text.topic_tokens)))
            .collect();
        words.extend((0..spec.text.agenda_tokens).map(|j| agenda_token(g, j)));
        let query_id = format!("q{q:0width$}");
        qrows.push((
            query_id.clone(),
            toy_vector(
                &mut rng,
                &cents.l1[l1],
                &cents.l2[g],
                e.query_l2_scale,
                e.noise,
            ),
        ));
        query_targets.insert(query_id.clone(), g as u32);
        queries.push(AgendaQuery {
            query_id,
            domain: domain_of(l1),
            description: words.join(" "),
            representative_ids: reps,
        });
    }
    let query_vectors = EmbeddingSet::from_rows(TOY_MODEL, qrows, Some(e.dim))?;

    let mut l1_labels = BTreeMap::new();
    let mut l2_labels = BTreeMap::new();
    for k in 0..n {
        l1_labels.insert(lay.ids[k].clone(), lay.l1_of[k] as u32);
        l2_labels.insert(lay.ids[k].clone(), lay.l2_of[k] as u32);
    }
    let mut orphans: Vec<String> = (0..n)
        .filter(|&k| lay.orphan[k])
        .map(|k| lay.ids[k].clone())
        .collect();
    orphans.sort();
    let store = ingest(records.iter().cloned(), MergePolicy::default()).store;
    Ok(Planted {
        records,
        store,
        citers,
        embeddings,
        queries,
        query_vectors,
        truth: PlantedTruth {
            l1: Partition::new(Level::L1, 0.0, spec.seed, l1_labels)?,
            l2: Partition::new(Level::L2, 0.0, spec.seed, l2_labels)?,
            duplicates,
            orphans,
            query_targets,
        },
    })
}
