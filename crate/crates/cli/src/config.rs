use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use agenda_core::concordance::DEFAULT_KS;
use agenda_core::corpus::MergePolicy;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    /// Rayon worker threads; machine parallelism when unset. Not hashed.
    pub workers: Option<usize>,
    pub paths: Paths,
    pub ingest: IngestConfig,
    pub graph: GraphConfig,
    pub partition: PartitionConfig,
    pub knn: KnnConfig,
    pub concordance: ConcordanceConfig,
    pub retrieval: RetrievalConfig,
    pub synth: SynthConfig,
}

/// Unset inputs default to files of the same name under `out_dir`, which is
/// where `synth` writes them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub out_dir: PathBuf,
    pub corpus: Option<PathBuf>,
    pub citers: Option<PathBuf>,
    pub vectors: Option<PathBuf>,
    pub queries: Option<PathBuf>,
    pub query_vectors: Option<PathBuf>,
    /// Partition TSV used by `bench`; defaults to the `partition` output.
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    pub merge_policy: MergePolicy,
    pub min_abstract_chars: usize,
    pub min_year: Option<i32>,
    pub allowed_types: Option<Vec<String>>,
    pub boilerplate: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphConfig {
    pub min_shared: usize,
    pub hot_ref_cap: usize,
    pub min_cociters: usize,
    pub citer_cap: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartitionConfig {
    pub gamma_l1: f64,
    pub gamma_l2: f64,
    pub split: usize,
    pub max_passes: usize,
    pub sweep_gammas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KnnConfig {
    pub model_name: String,
    pub dim: Option<usize>,
    pub k: usize,
    /// Stratified sample size per domain; whole labelled corpus when unset.
    pub pool_per_domain: Option<usize>,
    pub within_domain: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConcordanceConfig {
    pub ks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetrievalConfig {
    pub k1: f64,
    pub b: f64,
    pub top_n: usize,
    /// BM25 depth handed to the citation rerank.
    pub bm25_candidates: usize,
    pub rrf_k0: u32,
    pub threshold: f64,
    pub judge_sample: usize,
    pub top_cut: usize,
    pub pool_before_cut: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    /// strong, hierarchical_gap, dissociated or scale.
    pub preset: String,
    /// Paper count for the scale preset.
    pub n: usize,
    /// TOML or JSON spec file; overrides the preset.
    pub spec: Option<PathBuf>,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            out_dir: PathBuf::from("out"),
            corpus: None,
            citers: None,
            vectors: None,
            queries: None,
            query_vectors: None,
            labels: None,
        }
    }
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self {
            min_shared: 3,
            hot_ref_cap: 500,
            min_cociters: 3,
            citer_cap: 200,
        }
    }
}

impl Default for PartitionConfig {
    fn default() -> Self {
        Self {
            gamma_l1: 1e-4,
            gamma_l2: 1e-2,
            split: 200,
            max_passes: agenda_core::community::DEFAULT_MAX_PASSES,
            sweep_gammas: vec![1e-5, 1e-4, 1e-3, 1e-2],
        }
    }
}

impl Default for KnnConfig {
    fn default() -> Self {
        Self {
            model_name: "model".into(),
            dim: None,
            k: 100,
            pool_per_domain: None,
            within_domain: true,
        }
    }
}

impl Default for ConcordanceConfig {
    fn default() -> Self {
        Self {
            ks: DEFAULT_KS.to_vec(),
        }
    }
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        Self {
            k1: 1.2,
            b: 0.75,
            top_n: 100,
            bm25_candidates: 100,
            rrf_k0: agenda_core::retrieval::DEFAULT_RRF_K0,
            threshold: 0.8,
            judge_sample: 10,
            top_cut: 1000,
            pool_before_cut: false,
        }
    }
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            preset: "strong".into(),
            n: 100_000,
            spec: None,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> anyhow::Result<toml::Table> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Applies `key.path=value` overrides to a raw table, then decodes.
    /// Values parse as TOML and fall back to plain strings.
    pub fn from_table(mut table: toml::Table, overrides: &[String]) -> anyhow::Result<Self> {
        for o in overrides {
            let (key, raw) = o
                .split_once('=')
                .with_context(|| format!("override {o:?} is not key=value"))?;
            set_path(&mut table, key.trim(), parse_value(raw.trim()))?;
        }
        let cfg: PipelineConfig = toml::Value::Table(table)
            .try_into()
            .context("invalid config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let g = &self.graph;
        for (name, v) in [
            ("graph.min_shared", g.min_shared),
            ("graph.hot_ref_cap", g.hot_ref_cap),
            ("graph.min_cociters", g.min_cociters),
            ("graph.citer_cap", g.citer_cap),
            ("partition.split", self.partition.split),
            ("partition.max_passes", self.partition.max_passes),
            ("knn.k", self.knn.k),
            ("retrieval.top_n", self.retrieval.top_n),
            ("retrieval.bm25_candidates", self.retrieval.bm25_candidates),
            ("retrieval.rrf_k0", self.retrieval.rrf_k0 as usize),
            ("retrieval.top_cut", self.retrieval.top_cut),
        ] {
            if v == 0 {
                bail!("{name} must be positive");
            }
        }
        let p = &self.partition;
        for (name, v) in [
            ("partition.gamma_l1", p.gamma_l1),
            ("partition.gamma_l2", p.gamma_l2),
        ]
        .into_iter()
        .chain(
            p.sweep_gammas
                .iter()
                .map(|&v| ("partition.sweep_gammas", v)),
        ) {
            if !(v > 0.0 && v.is_finite()) {
                bail!("{name} must be positive and finite, got {v}");
            }
        }
        if !p.sweep_gammas.windows(2).all(|w| w[0] < w[1]) {
            bail!("partition.sweep_gammas must be sorted ascending");
        }
        let ks = &self.concordance.ks;
        if ks.is_empty() || !ks.windows(2).all(|w| w[0] < w[1]) {
            bail!("concordance.ks must be non-empty and sorted ascending");
        }
        if ks[0] < 2 {
            bail!("concordance.ks start at 2; rank 1 is the query itself");
        }
        if *ks.last().unwrap() > self.knn.k {
            bail!("knn.k = {} is below the largest concordance k", self.knn.k);
        }
        let r = &self.retrieval;
        if !(r.k1 > 0.0 && r.k1.is_finite()) || !(0.0..=1.0).contains(&r.b) {
            bail!("retrieval.k1 must be positive and retrieval.b within [0, 1]");
        }
        if !(0.0..=1.0).contains(&r.threshold) {
            bail!("retrieval.threshold must be within [0, 1]");
        }
        if self.workers == Some(0) {
            bail!("workers must be positive");
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON form, ignoring `workers`.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.workers = None;
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn out(&self, name: &str) -> PathBuf {
        self.paths.out_dir.join(name)
    }

    pub fn input(&self, configured: &Option<PathBuf>, default_name: &str) -> PathBuf {
        configured.clone().unwrap_or_else(|| self.out(default_name))
    }
}

fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_owned()))
}

fn set_path(table: &mut toml::Table, key: &str, value: toml::Value) -> anyhow::Result<()> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts
        .pop()
        .filter(|s| !s.is_empty())
        .context("empty override key")?;
    let mut cur = table;
    for p in parts {
        let next = cur
            .entry(p.to_owned())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = match next {
            toml::Value::Table(t) => t,
            _ => bail!("override {key}: {p} is not a table"),
        };
    }
    cur.insert(last.to_owned(), value);
    Ok(())
}
