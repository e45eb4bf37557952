use serde::{Deserialize, Serialize};

use super::rerank::{internal_citation_rerank, CitationIndex};
use super::{AgendaQuery, RetrievalError, RetrievalRun};
use crate::boolquery::{evaluate, parse_query, InvertedIndex};
use crate::corpus::CorpusStore;
use crate::ids::IdTable;
use crate::text::content_tokens;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentVerdict {
    pub candidate_query: String,
    pub relevance_score: f64,
    pub summary: String,
}

/// Proposes Boolean candidate queries for an agenda query.
pub trait Strategist: Send + Sync {
    fn propose(&self, query: &AgendaQuery) -> Vec<String>;

    /// False if calls must not overlap.
    fn concurrent(&self) -> bool {
        true
    }
}

/// Scores a candidate query from a sample of its result titles.
pub trait Judge: Send + Sync {
    fn judge(&self, candidate: &str, titles: &[&str]) -> AgentVerdict;

    fn concurrent(&self) -> bool {
        true
    }
}

/// Emits the description verbatim and an AND of its content words.
#[derive(Debug, Clone, Copy, Default)]
pub struct StubStrategist;

impl Strategist for StubStrategist {
    fn propose(&self, query: &AgendaQuery) -> Vec<String> {
        let words = content_tokens(&query.description);
        let mut out = vec![query.description.clone()];
        if !words.is_empty() {
            out.push(words.join(" AND "));
        }
        out
    }
}

/// Returns the same score for every candidate.
#[derive(Debug, Clone, Copy)]
pub struct StubJudge(pub f64);

impl Judge for StubJudge {
    fn judge(&self, candidate: &str, titles: &[&str]) -> AgentVerdict {
        AgentVerdict {
            candidate_query: candidate.to_owned(),
            relevance_score: self.0,
            summary: format!("fixed verdict over {} titles", titles.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphOptions {
    pub threshold: f64,
    pub judge_sample: usize,
    pub top_cut: usize,
    /// Intersect with the pool before taking `top_cut` rather than after.
    pub pool_before_cut: bool,
}

impl Default for GraphOptions {
    fn default() -> Self {
        Self {
            threshold: 0.8,
            judge_sample: 10,
            top_cut: 1000,
            pool_before_cut: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateReport {
    pub candidate: String,
    pub parse_error: Option<String>,
    pub n_results: usize,
    pub verdict: Option<AgentVerdict>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphOutcome {
    Ranked(RetrievalRun),
    NoPassingCandidate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphRetrieval {
    pub outcome: GraphOutcome,
    pub candidates: Vec<CandidateReport>,
}

/// Runs the strategist's candidates through the Boolean engine, reranks each
/// result set by internal citations, has the judge score the top titles, and
/// returns the largest passing result set cut to `top_cut` and restricted to
/// `pool`.
#[allow(clippy::too_many_arguments)]
pub fn graph_retrieve(
    query: &AgendaQuery,
    strategist: &dyn Strategist,
    judge: &dyn Judge,
    index: &InvertedIndex,
    store: &CorpusStore,
    citations: &CitationIndex,
    pool: Option<&IdTable>,
    opts: &GraphOptions,
) -> Result<GraphRetrieval, RetrievalError> {
    let mut reports = Vec::new();
    let mut best: Option<RetrievalRun> = None;
    for cand in strategist.propose(query) {
        let ast = match parse_query(&cand) {
            Ok(a) => a,
            Err(e) => {
                reports.push(CandidateReport {
                    candidate: cand,
                    parse_error: Some(e.to_string()),
                    n_results: 0,
                    verdict: None,
                });
                continue;
            }
        };
        let hits = evaluate(&ast, index, Some(query.domain));
        let ranked = internal_citation_rerank(&query.query_id, &hits, citations);
        let titles: Vec<&str> = ranked
            .ids()
            .take(opts.judge_sample)
            .map(|id| store.get(id).map_or("", |r| r.title.as_str()))
            .collect();
        let verdict = judge.judge(&cand, &titles);
        if !(0.0..=1.0).contains(&verdict.relevance_score) {
            return Err(RetrievalError::BadVerdict(verdict.relevance_score));
        }
        let passes = verdict.relevance_score >= opts.threshold;
        reports.push(CandidateReport {
            candidate: cand,
            parse_error: None,
            n_results: ranked.len(),
            verdict: Some(verdict),
        });
        if passes && best.as_ref().is_none_or(|b| ranked.len() > b.len()) {
            best = Some(ranked);
        }
    }
    let outcome = match best {
        None => GraphOutcome::NoPassingCandidate,
        Some(mut run) => {
            let keep = |id: &str| pool.is_none_or(|p| p.contains(id));
            if opts.pool_before_cut {
                run.ranked.retain(|s| keep(&s.id));
                run.ranked.truncate(opts.top_cut);
            } else {
                run.ranked.truncate(opts.top_cut);
                run.ranked.retain(|s| keep(&s.id));
            }
            run.retriever = "graph".into();
            GraphOutcome::Ranked(run)
        }
    };
    Ok(GraphRetrieval {
        outcome,
        candidates: reports,
    })
}
