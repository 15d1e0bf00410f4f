use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{GlobalModel, StateId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateExport {
    pub id: usize,
    pub locals: Vec<String>,
    pub props: Vec<String>,
    pub reduced: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeExport {
    pub src: usize,
    pub dst: usize,
    pub action: String,
    pub reduced: bool,
}

/// JSON form of a model, ordered by state index and edge insertion order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphExport {
    pub agents: Vec<String>,
    pub states: Vec<StateExport>,
    pub edges: Vec<EdgeExport>,
    pub initial: usize,
}

impl GraphExport {
    pub fn from_model(model: &GlobalModel, highlight_reduced: bool) -> Self {
        let amas = model.amas();
        let states = model
            .states()
            .map(|s| StateExport {
                id: s.0,
                locals: local_names(model, s),
                props: true_props(model, s),
                reduced: highlight_reduced && model.is_state_reduced(s),
            })
            .collect();
        let edges = model
            .edges()
            .iter()
            .enumerate()
            .map(|(i, e)| EdgeExport {
                src: e.src.0,
                dst: e.dst.0,
                action: model.label_name(e.label).to_string(),
                reduced: highlight_reduced && model.is_edge_reduced(i),
            })
            .collect();
        GraphExport {
            agents: amas.agents.iter().map(|a| a.name.clone()).collect(),
            states,
            edges,
            initial: model.initial().0,
        }
    }
}

fn local_names(model: &GlobalModel, s: StateId) -> Vec<String> {
    let amas = model.amas();
    amas.agents
        .iter()
        .zip(model.state(s).locals.iter())
        .map(|(a, &l)| a.locals[l as usize].clone())
        .collect()
}

fn true_props(model: &GlobalModel, s: StateId) -> Vec<String> {
    let amas = model.amas();
    amas.propositions
        .iter()
        .enumerate()
        .filter(|(p, _)| model.state(s).store >> p & 1 == 1)
        .map(|(_, name)| name.clone())
        .collect()
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Renders `model` as Graphviz DOT or JSON. With `highlight_reduced`, states
/// and edges flagged by [`GlobalModel::mark_reduced`] are colored blue (DOT)
/// or carry `"reduced": true` (JSON).
pub fn export_graph(model: &GlobalModel, format: ExportFormat, highlight_reduced: bool) -> Vec<u8> {
    match format {
        ExportFormat::Json => {
            let mut out = serde_json::to_vec(&GraphExport::from_model(model, highlight_reduced))
                .expect("graph export serializes");
            out.push(b'\n');
            out
        }
        ExportFormat::Dot => {
            let mut out = String::from("digraph M {\n");
            for s in model.states() {
                let mut label = dot_escape(&local_names(model, s).join(","));
                let props = true_props(model, s);
                if !props.is_empty() {
                    label.push_str("\\n");
                    label.push_str(&dot_escape(&props.join(",")));
                }
                let blue = if highlight_reduced && model.is_state_reduced(s) {
                    ", color=blue"
                } else {
                    ""
                };
                let _ = writeln!(out, "  {} [label=\"{}\"{}];", s.0, label, blue);
            }
            for (i, e) in model.edges().iter().enumerate() {
                let blue = if highlight_reduced && model.is_edge_reduced(i) {
                    ", color=blue"
                } else {
                    ""
                };
                let _ = writeln!(
                    out,
                    "  {} -> {} [label=\"{}\"{}];",
                    e.src.0,
                    e.dst.0,
                    dot_escape(model.label_name(e.label)),
                    blue
                );
            }
            out.push_str("}\n");
            out.into_bytes()
        }
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::amas::Amas;
    use crate::model::build_global_model;

    #[test]
    fn dot_shape() {
        let amas = Arc::new(Amas::parse(include_str!("../../../../fixtures/tgc.stv")).unwrap());
        let m = build_global_model(amas).unwrap();
        let dot = String::from_utf8(export_graph(&m, ExportFormat::Dot, true)).unwrap();
        assert!(dot.starts_with("digraph M {\n  0 [label=\"G,W,W\"];\n  1 [label=\"R,T,W\\nin1\"];\n"));
        assert!(dot.contains("  0 -> 1 [label=\"a1\"];\n"));
        assert!(!dot.contains("blue"));
    }

    #[test]
    fn json_round_trip() {
        let amas = Arc::new(Amas::parse(include_str!("../../../../fixtures/tgc.stv")).unwrap());
        let m = build_global_model(amas).unwrap();
        let bytes = export_graph(&m, ExportFormat::Json, false);
        let back: GraphExport = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(back, GraphExport::from_model(&m, false));
        assert_eq!(back.states.len(), 8);
        assert_eq!(back.edges.len(), 14);
        assert_eq!(back.states[1].props, vec!["in1"]);
    }
}
