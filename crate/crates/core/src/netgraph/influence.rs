use crate::market::MarketMeta;
use crate::metrics::ActivityStats;

#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceEdge {
    pub source: usize,
    pub target: usize,
    /// Time-mean TE of the pair.
    pub weight: f64,
}

/// Directed graph of pairs whose mean influence exceeds `threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceGraph {
    pub nodes: Vec<MarketMeta>,
    pub edges: Vec<InfluenceEdge>,
    pub threshold: f64,
}

impl InfluenceGraph {
    pub fn in_degree(&self, node: usize) -> usize {
        self.edges.iter().filter(|e| e.target == node).count()
    }

    pub fn out_degree(&self, node: usize) -> usize {
        self.edges.iter().filter(|e| e.source == node).count()
    }

    pub fn has_edge(&self, source: usize, target: usize) -> bool {
        self.edges
            .iter()
            .any(|e| e.source == source && e.target == target)
    }
}

/// Keeps edge (m, n) iff `a_str[m][n] > threshold` (default: the grand mean).
/// Every market stays as a node, isolated or not.
pub fn influential_network(
    act: &ActivityStats,
    markets: &[MarketMeta],
    threshold: Option<f64>,
) -> InfluenceGraph {
    let threshold = threshold.unwrap_or(act.grand_mean);
    let m = act.n_markets();
    let edges = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .filter_map(|(i, j)| {
            act.strength(i, j)
                .filter(|&w| w > threshold)
                .map(|weight| InfluenceEdge {
                    source: i,
                    target: j,
                    weight,
                })
        })
        .collect();
    InfluenceGraph {
        nodes: markets.to_vec(),
        edges,
        threshold,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::canonical_markets;
    use ndarray::{array, Array2};

    const N: f64 = f64::NAN;

    fn stats(a_str: Array2<f64>) -> ActivityStats {
        let vals: Vec<f64> = a_str.iter().copied().filter(|v| v.is_finite()).collect();
        let (grand_mean, _) = crate::metrics::mean_std(&vals).unwrap();
        ActivityStats {
            a_flu: Array2::zeros(a_str.dim()),
            a_str,
            grand_mean,
        }
    }

    #[test]
    fn equal_strengths_give_no_edges() {
        let act = stats(array![[N, 0.2, 0.2], [0.2, N, 0.2], [0.2, 0.2, N]]);
        let g = influential_network(&act, &canonical_markets()[..3], None);
        assert!(g.edges.is_empty());
        assert_eq!(g.nodes.len(), 3);
    }

    #[test]
    fn single_supra_threshold_entry() {
        let act = stats(array![[N, 0.1, 0.1], [0.1, N, 0.1], [0.5, 0.1, N]]);
        let g = influential_network(&act, &canonical_markets()[..3], None);
        assert_eq!(g.edges, vec![InfluenceEdge { source: 2, target: 0, weight: 0.5 }]);
        assert_eq!(g.in_degree(0), 1);
        assert_eq!(g.out_degree(2), 1);
    }

    #[test]
    fn explicit_threshold() {
        let act = stats(array![[N, 0.1, 0.3], [0.2, N, 0.1], [0.5, 0.1, N]]);
        let g = influential_network(&act, &canonical_markets()[..3], Some(0.25));
        assert_eq!(g.edges.len(), 2);
        assert!(g.has_edge(0, 2) && g.has_edge(2, 0));
    }
}
