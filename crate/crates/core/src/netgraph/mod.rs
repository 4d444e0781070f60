//! Influential network over markets and influential-pair network over ordered pairs.

mod export;
mod influence;
mod pair_corr;
mod pair_id;

pub use export::{export_graph, DocEdge, DocNode, GraphDocument, GraphFormat, WIDTH_PER_WEIGHT};
pub use influence::{influential_network, InfluenceEdge, InfluenceGraph};
pub use pair_corr::{
    influential_pair_network, pair_correlations, LinkKind, PairCorrMatrix, PairEdge, PairFilter,
    PairGraph,
};
pub use pair_id::{pair_id, PairId};
