use std::collections::BTreeSet;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{CorpusError, CorpusStore, PaperRecord};

/// Eligibility predicates. Build with [`Eligibility::new`] so boilerplate
/// patterns are validated up front.
#[derive(Debug, Clone)]
pub struct Eligibility {
    pub min_abstract_chars: usize,
    pub min_year: i32,
    /// Lowercased article types to keep; `None` disables type filtering.
    /// Records without a type are always kept.
    pub allowed_types: Option<BTreeSet<String>>,
    boilerplate: Vec<Regex>,
}

impl Eligibility {
    pub fn new(
        min_abstract_chars: usize,
        min_year: i32,
        allowed_types: Option<BTreeSet<String>>,
        boilerplate_patterns: &[String],
    ) -> Result<Self, CorpusError> {
        let boilerplate = boilerplate_patterns
            .iter()
            .map(|p| {
                Regex::new(p).map_err(|source| CorpusError::BadPattern {
                    pattern: p.clone(),
                    source,
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(Self {
            min_abstract_chars,
            min_year,
            allowed_types: allowed_types.map(|s| s.into_iter().map(|t| t.to_lowercase()).collect()),
            boilerplate,
        })
    }

    fn verdict(&self, r: &PaperRecord) -> Option<Removal> {
        if r.abstract_text.chars().count() < self.min_abstract_chars {
            return Some(Removal::ShortAbstract);
        }
        match r.year {
            Some(y) if y >= self.min_year => {}
            _ => return Some(Removal::Year),
        }
        if let (Some(allowed), Some(t)) = (&self.allowed_types, &r.article_type) {
            if !allowed.contains(&t.to_lowercase()) {
                return Some(Removal::ArticleType);
            }
        }
        if self
            .boilerplate
            .iter()
            .any(|re| re.is_match(&r.abstract_text))
        {
            return Some(Removal::Boilerplate);
        }
        None
    }
}

enum Removal {
    ShortAbstract,
    Year,
    ArticleType,
    Boilerplate,
}

/// Removal counts; each record is attributed to the first predicate it fails
/// in the order abstract, year, type, boilerplate.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub kept: usize,
    pub short_abstract: usize,
    pub year: usize,
    pub article_type: usize,
    pub boilerplate: usize,
}

impl FilterReport {
    pub fn removed(&self) -> usize {
        self.short_abstract + self.year + self.article_type + self.boilerplate
    }
}

pub fn filter_eligibility(store: &CorpusStore, rules: &Eligibility) -> (CorpusStore, FilterReport) {
    let mut report = FilterReport::default();
    let mut out = store.clone();
    out.retain(|r| match rules.verdict(r) {
        None => true,
        Some(why) => {
            match why {
                Removal::ShortAbstract => report.short_abstract += 1,
                Removal::Year => report.year += 1,
                Removal::ArticleType => report.article_type += 1,
                Removal::Boilerplate => report.boilerplate += 1,
            }
            false
        }
    });
    report.kept = out.len();
    (out, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ingest, Domain, MergePolicy};

    fn rec(id: &str, abs_len: usize, year: i32) -> PaperRecord {
        let mut r = PaperRecord::new(id, format!("title {id}"), Domain::Chemistry);
        r.abstract_text = "x".repeat(abs_len);
        r.year = Some(year);
        r
    }

    fn store(recs: Vec<PaperRecord>) -> CorpusStore {
        ingest(recs, MergePolicy::default()).store
    }

    fn default_rules() -> Eligibility {
        Eligibility::new(150, 2010, None, &[]).unwrap()
    }

    #[test]
    fn abstract_of_149_chars_is_removed() {
        let s = store(vec![rec("a", 149, 2015), rec("b", 150, 2015)]);
        let (out, rep) = filter_eligibility(&s, &default_rules());
        assert_eq!(out.ids().collect::<Vec<_>>(), vec!["b"]);
        assert_eq!(rep.short_abstract, 1);
    }

    #[test]
    fn year_2009_is_removed() {
        let s = store(vec![rec("a", 200, 2009), rec("b", 200, 2010)]);
        let (out, rep) = filter_eligibility(&s, &default_rules());
        assert_eq!(out.ids().collect::<Vec<_>>(), vec!["b"]);
        assert_eq!(rep.year, 1);
    }

    #[test]
    fn all_eligible_is_identity() {
        let s = store(vec![rec("a", 300, 2020), rec("b", 200, 2011)]);
        let (out, rep) = filter_eligibility(&s, &default_rules());
        assert_eq!(out, s);
        assert_eq!(rep.removed(), 0);
    }

    #[test]
    fn type_filter_keeps_untyped_records() {
        let mut review = rec("r", 200, 2020);
        review.article_type = Some("Review".into());
        let mut article = rec("a", 200, 2020);
        article.article_type = Some("article".into());
        let untyped = rec("u", 200, 2020);
        let s = store(vec![review, article, untyped]);
        let allowed = Some(["Article".to_owned()].into_iter().collect());
        let rules = Eligibility::new(150, 2010, allowed, &[]).unwrap();
        let (out, rep) = filter_eligibility(&s, &rules);
        assert_eq!(out.ids().collect::<Vec<_>>(), vec!["a", "u"]);
        assert_eq!(rep.article_type, 1);
    }

    #[test]
    fn boilerplate_patterns() {
        let mut a = rec("a", 0, 2020);
        a.abstract_text = format!("{} Figure 1 caption only", "y".repeat(160));
        let s = store(vec![a, rec("b", 200, 2020)]);
        let rules = Eligibility::new(150, 2010, None, &["(?i)caption only".into()]).unwrap();
        let (out, rep) = filter_eligibility(&s, &rules);
        assert_eq!(out.len(), 1);
        assert_eq!(rep.boilerplate, 1);
        assert!(Eligibility::new(1, 1, None, &["(".into()]).is_err());
    }

    #[test]
    fn idempotent() {
        let s = store(
            (0..40)
                .map(|i| rec(&format!("p{i}"), 140 + i, 2005 + i as i32 / 4))
                .collect(),
        );
        let (once, _) = filter_eligibility(&s, &default_rules());
        let (twice, rep) = filter_eligibility(&once, &default_rules());
        assert_eq!(once, twice);
        assert_eq!(rep.removed(), 0);
    }
}
