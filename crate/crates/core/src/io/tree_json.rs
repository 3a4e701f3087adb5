//! JSON for computation trees and machine run trees.

use serde_json::{json, Value as Json};

use super::model_file::{parse_var, value_from_json, value_to_json};
use super::IoError;
use crate::machines::RunTree;
use crate::tsem::{ComputationTree, Configuration, Signature, TreeNode};

fn config_to_json(c: &Configuration) -> Json {
    Json::Array(
        c.assignments()
            .map(|(k, v)| json!([k.to_string(), value_to_json(v)]))
            .collect(),
    )
}

fn config_from_json(sig: &Signature, j: &Json) -> Result<Configuration, IoError> {
    let bad = || IoError::Format("node config must be an array of [variable, value] pairs".into());
    let pairs = j
        .as_array()
        .ok_or_else(bad)?
        .iter()
        .map(|p| match p.as_array().map(Vec::as_slice) {
            Some([k, v]) => Ok((parse_var(k.as_str().ok_or_else(bad)?)?, value_from_json(v)?)),
            _ => Err(bad()),
        })
        .collect::<Result<Vec<_>, IoError>>()?;
    Ok(Configuration::new(sig, pairs)?)
}

/// Nodes in breadth-first order with their explicit assignments sorted by
/// variable; `label` is the label of the edge into the node.
pub fn tree_to_json(tree: &ComputationTree) -> Json {
    json!({
        "depth": tree.depth,
        "truncated": tree.truncated,
        "level_counts": tree.level_counts(),
        "nodes": tree.nodes.iter().enumerate().map(|(id, n)| json!({
            "id": id,
            "depth": n.depth,
            "parent": n.parent,
            "label": n.label,
            "children": n.children,
            "config": config_to_json(&n.config),
        })).collect::<Vec<_>>(),
    })
}

pub fn tree_from_json(sig: &Signature, j: &Json) -> Result<ComputationTree, IoError> {
    let bad = |what: &str| IoError::Format(format!("tree JSON: {what}"));
    let depth = j["depth"].as_u64().ok_or_else(|| bad("missing depth"))? as usize;
    let truncated = j["truncated"].as_bool().ok_or_else(|| bad("missing truncated"))?;
    let nodes = j["nodes"]
        .as_array()
        .ok_or_else(|| bad("missing nodes"))?
        .iter()
        .enumerate()
        .map(|(i, n)| {
            if n["id"].as_u64() != Some(i as u64) {
                return Err(bad("node ids must be consecutive"));
            }
            let label = match &n["label"] {
                Json::Null => None,
                l => Some(
                    l.as_i64()
                        .and_then(|l| i8::try_from(l).ok())
                        .ok_or_else(|| bad("label must be a small integer"))?,
                ),
            };
            Ok(TreeNode {
                config: config_from_json(sig, &n["config"])?,
                depth: n["depth"].as_u64().ok_or_else(|| bad("node without depth"))? as usize,
                parent: n["parent"].as_u64().map(|p| p as usize),
                label,
                children: n["children"]
                    .as_array()
                    .ok_or_else(|| bad("node without children"))?
                    .iter()
                    .map(|c| {
                        c.as_u64()
                            .map(|c| c as usize)
                            .ok_or_else(|| bad("child ids must be integers"))
                    })
                    .collect::<Result<_, _>>()?,
            })
        })
        .collect::<Result<Vec<_>, IoError>>()?;
    if nodes.is_empty() {
        return Err(bad("a tree has at least a root"));
    }
    Ok(ComputationTree::from_nodes(sig, nodes, depth, truncated))
}

pub fn run_tree_to_json(tree: &RunTree) -> Json {
    json!({
        "depth": tree.depth,
        "truncated": tree.truncated,
        "level_counts": tree.level_counts(),
        "nodes": tree.nodes.iter().enumerate().map(|(id, n)| json!({
            "id": id,
            "depth": n.depth,
            "parent": n.parent,
            "label": n.edge.as_ref().map(|e| e.mv.d),
            "write": n.edge.as_ref().map(|e| e.mv.write.to_string()),
            "read": n.edge.as_ref().map(|e| e.read.to_string()),
            "children": n.children,
            "state": n.config.state.to_string(),
            "config": n.config.to_string(),
        })).collect::<Vec<_>>(),
    })
}
