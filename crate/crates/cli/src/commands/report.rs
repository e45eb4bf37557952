use std::io::Write;

use anyhow::anyhow;

use agenda_core::community::PartitionStats;
use agenda_core::concordance::{ConcordanceReport, LexicalReport};
use agenda_core::retrieval::BenchmarkRow;
use agenda_core::Level;

use super::summary;
use crate::artifacts::Run;
use crate::config::PipelineConfig;
use crate::error::{Classify, CliError, CliResult};

fn level(l: Level) -> &'static str {
    match l {
        Level::L1 => "L1",
        Level::L2 => "L2",
    }
}

/// Plot-ready CSVs from whichever of the concordance, lexical, benchmark
/// and sweep outputs exist.
pub fn report(cfg: &PipelineConfig) -> CliResult<()> {
    let mut run = Run::new("report", cfg)?;
    let concordance: Option<Vec<ConcordanceReport>> = run
        .open_optional(&cfg.out("concordance.json"))?
        .map(|r| serde_json::from_reader(r).input())
        .transpose()?;
    let lexical: Option<LexicalReport> = run
        .open_optional(&cfg.out("lexical.json"))?
        .map(|r| serde_json::from_reader(r).input())
        .transpose()?;
    let sweep: Option<Vec<PartitionStats>> = run
        .open_optional(&cfg.out("sweep.json"))?
        .map(|r| serde_json::from_reader(r).input())
        .transpose()?;
    let bench: Option<Vec<BenchmarkRow>> = run
        .open_optional(&cfg.out("benchmark.csv"))?
        .map(|r| {
            csv::Reader::from_reader(r)
                .deserialize()
                .collect::<Result<Vec<BenchmarkRow>, _>>()
                .input()
        })
        .transpose()?;
    if concordance.is_none() && lexical.is_none() && sweep.is_none() && bench.is_none() {
        return Err(CliError::Input(anyhow!(
            "nothing to report in {}; run concordance, bench or sweep first",
            cfg.paths.out_dir.display()
        )));
    }
    let mut written = Vec::new();
    if let Some(reports) = &concordance {
        run.write("fig_same_rate.csv", |w| {
            writeln!(w, "model,domain,level,k,cumulative,per_rank,baseline")?;
            for r in reports {
                for (k, c) in &r.cumulative_topk {
                    let p = r.per_rank.get(k).copied().unwrap_or(f64::NAN);
                    writeln!(
                        w,
                        "{},{},{},{k},{c},{p},{}",
                        r.model_name,
                        r.domain,
                        level(r.level),
                        r.baseline
                    )?;
                }
            }
            Ok(())
        })?;
        run.write("fig_enrichment.csv", |w| {
            writeln!(w, "model,domain,level,k,enrichment,enrichment_per_rank")?;
            for r in reports {
                for (k, e) in &r.enrichment {
                    let p = r.enrichment_per_rank.get(k).copied().unwrap_or(f64::NAN);
                    writeln!(
                        w,
                        "{},{},{},{k},{e},{p}",
                        r.model_name,
                        r.domain,
                        level(r.level)
                    )?;
                }
            }
            Ok(())
        })?;
        written.extend(["fig_same_rate.csv", "fig_enrichment.csv"]);
    }
    if let Some(lex) = &lexical {
        run.write("fig_lexical.csv", |w| {
            writeln!(w, "domain,unique_fraction,n_parents")?;
            for (d, f) in &lex.per_domain {
                let n = lex.per_l1.iter().filter(|r| r.domain == *d).count();
                writeln!(w, "{d},{f},{n}")?;
            }
            Ok(())
        })?;
        written.push("fig_lexical.csv");
    }
    if let Some(rows) = &bench {
        run.write("fig_retrieval.csv", |w| {
            writeln!(w, "domain,retriever,top1_l2_rate,n_queries,n_empty")?;
            let mut sorted: Vec<&BenchmarkRow> = rows.iter().collect();
            sorted.sort_by(|a, b| (&a.domain, &a.retriever).cmp(&(&b.domain, &b.retriever)));
            for r in sorted {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    r.domain, r.retriever, r.top1_l2_rate, r.n_queries, r.n_empty
                )?;
            }
            Ok(())
        })?;
        written.push("fig_retrieval.csv");
    }
    if let Some(stats) = &sweep {
        run.write("fig_sweep.csv", |w| {
            writeln!(w, "gamma,n_communities,max_size,max_share,quality")?;
            for s in stats {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    s.gamma, s.n_communities, s.max_size, s.max_share, s.quality
                )?;
            }
            Ok(())
        })?;
        written.push("fig_sweep.csv");
    }
    run.commit(summary([("figures", written.into())]))?;
    Ok(())
}
