use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    build_bc_edges, build_cc_edges, build_direct_edges, merge_layers, AugmentedGraph, CiterTable,
    GraphError, LayerReport,
};
use crate::corpus::CorpusStore;
use crate::ids::IdTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GraphParams {
    pub min_shared: usize,
    pub hot_ref_cap: usize,
    pub min_cociters: usize,
    pub citer_cap: usize,
}

impl Default for GraphParams {
    fn default() -> Self {
        Self {
            min_shared: 3,
            hot_ref_cap: 500,
            min_cociters: 3,
            citer_cap: 200,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    pub members: usize,
    pub direct: LayerReport,
    pub bc: LayerReport,
    pub cc: LayerReport,
    pub direct_edges: usize,
    pub bc_edges: usize,
    pub cc_edges: usize,
}

/// All three layers over the store's papers, merged.
pub fn build_graph(
    store: &CorpusStore,
    citers: &CiterTable,
    params: &GraphParams,
) -> Result<(AugmentedGraph, BuildReport), GraphError> {
    let members = Arc::new(IdTable::new(store.ids().map(str::to_owned)));
    let (direct, (bc, cc)) = rayon::join(
        || build_direct_edges(store, &members),
        || {
            rayon::join(
                || build_bc_edges(store, &members, params.min_shared, params.hot_ref_cap),
                || build_cc_edges(citers, &members, params.min_cociters, params.citer_cap),
            )
        },
    );
    let report = BuildReport {
        members: members.len(),
        direct: direct.report.clone(),
        bc: bc.report.clone(),
        cc: cc.report.clone(),
        direct_edges: direct.len(),
        bc_edges: bc.len(),
        cc_edges: cc.len(),
    };
    Ok((merge_layers(&direct, &bc, &cc)?, report))
}
