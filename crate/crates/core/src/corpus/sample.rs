use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;

use super::{CorpusError, CorpusStore, Domain};
use crate::seeds::rng_for;

/// Largest-remainder apportionment of `n` over strata of the given sizes.
/// Remainder ties go to the earlier stratum.
pub(crate) fn apportion(n: usize, sizes: &[usize]) -> Vec<usize> {
    let total: u128 = sizes.iter().map(|&s| s as u128).sum();
    if total == 0 {
        return vec![0; sizes.len()];
    }
    let mut quotas = Vec::with_capacity(sizes.len());
    let mut rems = Vec::with_capacity(sizes.len());
    for (i, &s) in sizes.iter().enumerate() {
        let num = n as u128 * s as u128;
        quotas.push((num / total) as usize);
        rems.push((num % total, i));
    }
    let assigned: usize = quotas.iter().sum();
    rems.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in rems.iter().take(n - assigned) {
        quotas[i] += 1;
    }
    quotas
}

/// Draws exactly `per_domain_n` ids from every domain present in `store`,
/// with per-year counts proportional to the domain's year distribution.
pub fn stratified_sample(
    store: &CorpusStore,
    per_domain_n: usize,
    seed: u64,
) -> Result<BTreeSet<String>, CorpusError> {
    let mut by_domain: BTreeMap<Domain, BTreeMap<Option<i32>, Vec<&str>>> = BTreeMap::new();
    for r in store.records() {
        by_domain
            .entry(r.domain)
            .or_default()
            .entry(r.year)
            .or_default()
            .push(&r.paper_id);
    }

    let mut chosen = BTreeSet::new();
    for (domain, strata) in by_domain {
        let available: usize = strata.values().map(Vec::len).sum();
        if available < per_domain_n {
            return Err(CorpusError::Undersized {
                domain,
                available,
                requested: per_domain_n,
            });
        }
        // Missing years sort first in the BTreeMap; keep them as their own stratum.
        let sizes: Vec<usize> = strata.values().map(Vec::len).collect();
        let quotas = apportion(per_domain_n, &sizes);
        for ((year, ids), quota) in strata.into_iter().zip(quotas) {
            let year_key = year.map_or(u64::MAX, |y| y as u64);
            let mut rng = rng_for(seed, &[domain.index() as u64, year_key]);
            let mut ids = ids;
            let (picked, _) = ids.partial_shuffle(&mut rng, quota);
            chosen.extend(picked.iter().map(|s| (*s).to_owned()));
        }
    }
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ingest, MergePolicy, PaperRecord};

    fn store_with_years(domain: Domain, years: &[(i32, usize)]) -> CorpusStore {
        let mut recs = Vec::new();
        for &(y, n) in years {
            for i in 0..n {
                let mut r = PaperRecord::new(
                    format!("{domain}-{y}-{i}"),
                    format!("t {domain} {y} {i}"),
                    domain,
                );
                r.year = Some(y);
                recs.push(r);
            }
        }
        ingest(recs, MergePolicy::default()).store
    }

    #[test]
    fn largest_remainder_by_hand() {
        // 10 * 60/100 = 6, 10 * 40/100 = 4
        assert_eq!(apportion(10, &[60, 40]), vec![6, 4]);
        // 7 * [5,3,2]/10 = 3.5, 2.1, 1.4 -> floors 3,2,1 (6), one extra to the .5
        assert_eq!(apportion(7, &[5, 3, 2]), vec![4, 2, 1]);
        // equal remainders: the earlier stratum wins
        assert_eq!(apportion(1, &[1, 1]), vec![1, 0]);
    }

    #[test]
    fn year_proportions() {
        let s = store_with_years(Domain::Physics, &[(2010, 60), (2020, 40)]);
        let ids = stratified_sample(&s, 10, 7).unwrap();
        assert_eq!(ids.len(), 10);
        let y2010 = ids.iter().filter(|id| id.contains("-2010-")).count();
        assert_eq!(y2010, 6);
    }

    #[test]
    fn whole_pool_when_n_equals_size() {
        let s = store_with_years(Domain::Biology, &[(2011, 5), (2012, 3)]);
        let ids = stratified_sample(&s, 8, 1).unwrap();
        assert_eq!(ids.len(), 8);
        assert_eq!(ids, s.ids().map(str::to_owned).collect());
    }

    #[test]
    fn deterministic_under_seed() {
        let s = store_with_years(Domain::Chemistry, &[(2011, 50), (2015, 70), (2019, 30)]);
        let a = stratified_sample(&s, 40, 99).unwrap();
        let b = stratified_sample(&s, 40, 99).unwrap();
        let c = stratified_sample(&s, 40, 100).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn undersized_domain_is_named() {
        let s = store_with_years(Domain::Materials, &[(2011, 3)]);
        let err = stratified_sample(&s, 5, 0).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("materials") && msg.contains("short by 2"),
            "{msg}"
        );
    }
}
