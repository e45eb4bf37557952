use std::collections::HashMap;

/// Dense `u32` indexing over a sorted set of paper ids.
///
/// Index order equals lexicographic id order, so "a < b" on indices is the
/// canonical edge orientation everywhere.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdTable {
    ids: Vec<String>,
    lookup: HashMap<String, u32>,
}

impl IdTable {
    pub fn new<I, S>(ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut ids: Vec<String> = ids.into_iter().map(Into::into).collect();
        ids.sort_unstable();
        ids.dedup();
        assert!(
            ids.len() <= u32::MAX as usize,
            "too many ids for u32 indexing"
        );
        let lookup = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i as u32))
            .collect();
        Self { ids, lookup }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    #[inline]
    pub fn index_of(&self, id: &str) -> Option<u32> {
        self.lookup.get(id).copied()
    }

    #[inline]
    pub fn id(&self, index: u32) -> &str {
        &self.ids[index as usize]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn contains(&self, id: &str) -> bool {
        self.lookup.contains_key(id)
    }
}
