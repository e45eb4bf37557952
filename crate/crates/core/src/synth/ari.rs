use std::collections::{BTreeMap, HashMap};

use super::SynthError;

fn pairs(n: u64) -> f64 {
    (n * n.saturating_sub(1) / 2) as f64
}

/// Adjusted Rand index between two labelings of the same keys.
///
/// Two identical trivial labelings (one block, or all singletons) score 1.
pub fn adjusted_rand_index<K: Ord + std::fmt::Debug>(
    a: &BTreeMap<K, u32>,
    b: &BTreeMap<K, u32>,
) -> Result<f64, SynthError> {
    if a.len() != b.len() || a.keys().zip(b.keys()).any(|(x, y)| x != y) {
        let missing = a
            .keys()
            .find(|k| !b.contains_key(*k))
            .or_else(|| b.keys().find(|k| !a.contains_key(*k)));
        return Err(SynthError::KeyMismatch(format!("{missing:?}")));
    }
    let mut cells: HashMap<(u32, u32), u64> = HashMap::new();
    let mut rows: HashMap<u32, u64> = HashMap::new();
    let mut cols: HashMap<u32, u64> = HashMap::new();
    for (x, y) in a.values().zip(b.values()) {
        *cells.entry((*x, *y)).or_default() += 1;
        *rows.entry(*x).or_default() += 1;
        *cols.entry(*y).or_default() += 1;
    }
    let index: f64 = cells.values().map(|&c| pairs(c)).sum();
    let sa: f64 = rows.values().map(|&c| pairs(c)).sum();
    let sb: f64 = cols.values().map(|&c| pairs(c)).sum();
    let total = pairs(a.len() as u64);
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = sa * sb / total;
    let max = 0.5 * (sa + sb);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lab(v: &[u32]) -> BTreeMap<usize, u32> {
        v.iter().copied().enumerate().collect()
    }

    #[test]
    fn identical_and_relabelled() {
        let a = lab(&[0, 0, 1, 1, 2, 2, 2]);
        assert_eq!(adjusted_rand_index(&a, &a).unwrap(), 1.0);
        let b = lab(&[5, 5, 0, 0, 3, 3, 3]);
        assert_eq!(adjusted_rand_index(&a, &b).unwrap(), 1.0);
        let one = lab(&[0; 5]);
        assert_eq!(adjusted_rand_index(&one, &one).unwrap(), 1.0);
    }

    #[test]
    fn six_element_hand_value() {
        // a = {0,1,2}{3,4,5}, b = {0,1}{2,3}{4,5}
        // contingency [[2,1,0],[0,1,2]]: index = 1 + 1 = 2
        // row pairs 3 + 3 = 6, column pairs 1 + 1 + 1 = 3, total 15
        // expected 6 * 3 / 15 = 1.2, max 4.5 -> (2 - 1.2) / (4.5 - 1.2)
        let a = lab(&[0, 0, 0, 1, 1, 1]);
        let b = lab(&[0, 0, 1, 1, 2, 2]);
        let want = 0.8 / 3.3;
        assert!((adjusted_rand_index(&a, &b).unwrap() - want).abs() < 1e-12);
        assert!((adjusted_rand_index(&b, &a).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn key_mismatch() {
        let a = lab(&[0, 1]);
        let b = lab(&[0, 1, 2]);
        assert!(adjusted_rand_index(&a, &b).is_err());
    }

    #[test]
    fn independent_labelings_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut sum = 0.0;
        for _ in 0..20 {
            let a: Vec<u32> = (0..2000).map(|_| rng.random_range(0..8)).collect();
            let b: Vec<u32> = (0..2000).map(|_| rng.random_range(0..8)).collect();
            sum += adjusted_rand_index(&lab(&a), &lab(&b)).unwrap();
        }
        assert!((sum / 20.0).abs() < 0.005);
    }
}
