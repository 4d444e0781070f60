//! DOT, GraphML and JSON renderings of the two graph kinds.
//!
//! Both graphs are first lowered to a [`GraphDocument`]; the renderers only
//! see that form, and the JSON form can be read back into it.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::influence::InfluenceGraph;
use super::pair_corr::PairGraph;
use crate::error::{Error, Result};
use crate::market::MarketMeta;

/// Drawn line width per unit of edge weight.
pub const WIDTH_PER_WEIGHT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    Dot,
    GraphMl,
    Json,
}

impl GraphFormat {
    pub const ALL: [GraphFormat; 3] = [GraphFormat::Dot, GraphFormat::GraphMl, GraphFormat::Json];

    pub fn extension(self) -> &'static str {
        match self {
            GraphFormat::Dot => "dot",
            GraphFormat::GraphMl => "graphml",
            GraphFormat::Json => "json",
        }
    }
}

impl FromStr for GraphFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dot" => Ok(GraphFormat::Dot),
            "graphml" => Ok(GraphFormat::GraphMl),
            "json" => Ok(GraphFormat::Json),
            other => Err(Error::Config(format!("unknown graph format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocNode {
    pub id: String,
    pub label: String,
    pub zone: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocEdge {
    pub source: String,
    pub target: String,
    pub weight: f64,
    #[serde(default)]
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub directed: bool,
    pub nodes: Vec<DocNode>,
    pub edges: Vec<DocEdge>,
}

impl From<&InfluenceGraph> for GraphDocument {
    fn from(g: &InfluenceGraph) -> Self {
        let mut nodes = g.nodes.clone();
        nodes.sort_by_key(|m| m.order_index);
        let mut edges = g.edges.clone();
        edges.sort_by_key(|e| (g.nodes[e.source].order_index, g.nodes[e.target].order_index));
        GraphDocument {
            directed: true,
            nodes: nodes
                .iter()
                .map(|m| DocNode {
                    id: m.market_id.clone(),
                    label: m.market_id.clone(),
                    zone: Some(m.zone.to_string()),
                })
                .collect(),
            edges: edges
                .iter()
                .map(|e| DocEdge {
                    source: g.nodes[e.source].market_id.clone(),
                    target: g.nodes[e.target].market_id.clone(),
                    weight: e.weight,
                    tags: Vec::new(),
                })
                .collect(),
        }
    }
}

impl GraphDocument {
    /// Pair nodes are labelled `SRC->DST` using `markets` for the ids.
    pub fn from_pair_graph(g: &PairGraph, markets: &[MarketMeta]) -> Self {
        let mut nodes = g.nodes.clone();
        nodes.sort();
        let mut edges = g.edges.clone();
        edges.sort_by_key(|e| (e.a.id.min(e.b.id), e.a.id.max(e.b.id)));
        GraphDocument {
            directed: false,
            nodes: nodes
                .iter()
                .map(|p| DocNode {
                    id: p.id.to_string(),
                    label: format!(
                        "{}->{}",
                        markets[p.source].market_id, markets[p.target].market_id
                    ),
                    zone: None,
                })
                .collect(),
            edges: edges
                .iter()
                .map(|e| DocEdge {
                    source: e.a.id.min(e.b.id).to_string(),
                    target: e.a.id.max(e.b.id).to_string(),
                    weight: e.weight,
                    tags: e.tags(),
                })
                .collect(),
        }
    }

    pub fn render(&self, format: GraphFormat) -> String {
        match format {
            GraphFormat::Dot => self.to_dot(),
            GraphFormat::GraphMl => self.to_graphml(),
            GraphFormat::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("graph serialises");
                s.push('\n');
                s
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn to_dot(&self) -> String {
        let (kind, arrow) = if self.directed { ("digraph", "->") } else { ("graph", "--") };
        let mut out = format!("{kind} G {{\n");
        for n in &self.nodes {
            let _ = write!(out, "  \"{}\" [label=\"{}\"", dot_escape(&n.id), dot_escape(&n.label));
            if let Some(z) = &n.zone {
                let _ = write!(out, ", zone=\"{}\"", dot_escape(z));
            }
            out.push_str("];\n");
        }
        for e in &self.edges {
            let _ = write!(
                out,
                "  \"{}\" {arrow} \"{}\" [weight={}, penwidth={}",
                dot_escape(&e.source),
                dot_escape(&e.target),
                e.weight,
                e.weight * WIDTH_PER_WEIGHT
            );
            if !e.tags.is_empty() {
                let _ = write!(out, ", tags=\"{}\"", dot_escape(&e.tags.join(",")));
            }
            out.push_str("];\n");
        }
        out.push_str("}\n");
        out
    }

    fn to_graphml(&self) -> String {
        let mut out = String::from(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
             <graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\" \
             xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" \
             xsi:schemaLocation=\"http://graphml.graphdrawing.org/xmlns \
             http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd\">\n\
             \x20 <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n\
             \x20 <key id=\"zone\" for=\"node\" attr.name=\"zone\" attr.type=\"string\"/>\n\
             \x20 <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n\
             \x20 <key id=\"width\" for=\"edge\" attr.name=\"width\" attr.type=\"double\"/>\n\
             \x20 <key id=\"tags\" for=\"edge\" attr.name=\"tags\" attr.type=\"string\"/>\n",
        );
        let direction = if self.directed { "directed" } else { "undirected" };
        let _ = writeln!(out, "  <graph id=\"G\" edgedefault=\"{direction}\">");
        for n in &self.nodes {
            let _ = writeln!(out, "    <node id=\"{}\">", xml_escape(&n.id));
            let _ = writeln!(out, "      <data key=\"label\">{}</data>", xml_escape(&n.label));
            if let Some(z) = &n.zone {
                let _ = writeln!(out, "      <data key=\"zone\">{}</data>", xml_escape(z));
            }
            out.push_str("    </node>\n");
        }
        for (k, e) in self.edges.iter().enumerate() {
            let _ = writeln!(
                out,
                "    <edge id=\"e{k}\" source=\"{}\" target=\"{}\">",
                xml_escape(&e.source),
                xml_escape(&e.target)
            );
            let _ = writeln!(out, "      <data key=\"weight\">{}</data>", e.weight);
            let _ = writeln!(out, "      <data key=\"width\">{}</data>", e.weight * WIDTH_PER_WEIGHT);
            if !e.tags.is_empty() {
                let _ = writeln!(out, "      <data key=\"tags\">{}</data>", xml_escape(&e.tags.join(",")));
            }
            out.push_str("    </edge>\n");
        }
        out.push_str("  </graph>\n</graphml>\n");
        out
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn export_graph(doc: &GraphDocument, format: GraphFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, doc.render(format)).map_err(|e| Error::io(path, e))
}
