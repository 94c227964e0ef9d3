//! Line-oriented topology file format.
//!
//! ```text
//! node <id> layer=<0|1> d=<int> u=<int>
//! edge <id> <id>
//! arc  <from> <to>
//! failed <id> [<id> ...]
//! resource const <C>            # or: resource seq <c0> <c1> ...
//! ```
//!
//! `#` starts a comment. Node ids must form the dense range 0..n. Unknown
//! keywords, duplicate node ids, and dangling references are rejected with
//! the offending line number.

use super::{FailureScenario, InterdependentNetwork, Layer, NodeId, ResourceSchedule};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LoadError {
    #[error("line {line}: unknown keyword `{word}`")]
    UnknownKeyword { line: usize, word: String },
    #[error("line {line}: duplicate node id {id}")]
    DuplicateNode { line: usize, id: usize },
    #[error("line {line}: reference to undeclared node {id}")]
    DanglingReference { line: usize, id: usize },
    #[error("line {line}: malformed field `{field}`")]
    MalformedField { line: usize, field: String },
    #[error("line {line}: negative value in field `{field}`")]
    NegativeValue { line: usize, field: String },
    #[error("line {line}: expected {expected}")]
    Expected { line: usize, expected: String },
    #[error("node ids are not dense: missing id {0}")]
    NonDenseIds(usize),
    #[error("missing `resource` line")]
    MissingResource,
    #[error("more than one `resource` line (second at line {0})")]
    DuplicateResource(usize),
}

struct NodeDecl {
    layer: Layer,
    demand: u32,
    utility: u32,
}

fn parse_int(line: usize, field: &str, text: &str) -> Result<u32, LoadError> {
    let v: i64 = text.parse().map_err(|_| LoadError::MalformedField {
        line,
        field: field.to_string(),
    })?;
    if v < 0 {
        return Err(LoadError::NegativeValue {
            line,
            field: field.to_string(),
        });
    }
    u32::try_from(v).map_err(|_| LoadError::MalformedField {
        line,
        field: field.to_string(),
    })
}

fn parse_id(line: usize, text: &str) -> Result<usize, LoadError> {
    text.parse().map_err(|_| LoadError::MalformedField {
        line,
        field: text.to_string(),
    })
}

fn parse_kv<'a>(line: usize, token: &'a str, key: &str) -> Result<&'a str, LoadError> {
    token
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| LoadError::Expected {
            line,
            expected: format!("`{key}=<value>`"),
        })
}

/// Parses a scenario from topology text.
pub fn parse_topology(text: &str) -> Result<FailureScenario, LoadError> {
    let mut decls: BTreeMap<usize, NodeDecl> = BTreeMap::new();
    let mut edges: Vec<(usize, usize, usize)> = Vec::new(); // (a, b, line)
    let mut arcs: Vec<(usize, usize, usize)> = Vec::new();
    let mut failed: Vec<(usize, usize)> = Vec::new();
    let mut resource: Option<(ResourceSchedule, usize)> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let keyword = tokens.next().unwrap();
        let rest: Vec<&str> = tokens.collect();
        match keyword {
            "node" => {
                if rest.len() != 4 {
                    return Err(LoadError::Expected {
                        line,
                        expected: "`node <id> layer=<0|1> d=<int> u=<int>`".to_string(),
                    });
                }
                let id = parse_id(line, rest[0])?;
                let layer_idx = parse_int(line, "layer", parse_kv(line, rest[1], "layer")?)?;
                let layer = Layer::from_index(layer_idx as u8).ok_or(LoadError::MalformedField {
                    line,
                    field: "layer".to_string(),
                })?;
                let demand = parse_int(line, "d", parse_kv(line, rest[2], "d")?)?;
                let utility = parse_int(line, "u", parse_kv(line, rest[3], "u")?)?;
                if decls
                    .insert(
                        id,
                        NodeDecl {
                            layer,
                            demand,
                            utility,
                        },
                    )
                    .is_some()
                {
                    return Err(LoadError::DuplicateNode { line, id });
                }
            }
            "edge" => {
                if rest.len() != 2 {
                    return Err(LoadError::Expected {
                        line,
                        expected: "`edge <id> <id>`".to_string(),
                    });
                }
                edges.push((parse_id(line, rest[0])?, parse_id(line, rest[1])?, line));
            }
            "arc" => {
                if rest.len() != 2 {
                    return Err(LoadError::Expected {
                        line,
                        expected: "`arc <from> <to>`".to_string(),
                    });
                }
                arcs.push((parse_id(line, rest[0])?, parse_id(line, rest[1])?, line));
            }
            "failed" => {
                if rest.is_empty() {
                    return Err(LoadError::Expected {
                        line,
                        expected: "`failed <id> [<id> ...]`".to_string(),
                    });
                }
                for tok in rest {
                    failed.push((parse_id(line, tok)?, line));
                }
            }
            "resource" => {
                if resource.is_some() {
                    return Err(LoadError::DuplicateResource(line));
                }
                let sched = match rest.first().copied() {
                    Some("const") if rest.len() == 2 => {
                        ResourceSchedule::Constant(parse_int(line, "resource", rest[1])?)
                    }
                    Some("seq") if rest.len() >= 2 => {
                        let mut seq = Vec::new();
                        for tok in &rest[1..] {
                            seq.push(parse_int(line, "resource", tok)?);
                        }
                        ResourceSchedule::Sequence(seq)
                    }
                    _ => {
                        return Err(LoadError::Expected {
                            line,
                            expected: "`resource const <C>` or `resource seq <c0> <c1> ...`"
                                .to_string(),
                        })
                    }
                };
                resource = Some((sched, line));
            }
            other => {
                return Err(LoadError::UnknownKeyword {
                    line,
                    word: other.to_string(),
                });
            }
        }
    }

    let n = decls.len();
    for want in 0..n {
        if !decls.contains_key(&want) {
            return Err(LoadError::NonDenseIds(want));
        }
    }
    let check = |id: usize, line: usize| {
        if id < n {
            Ok(NodeId(id))
        } else {
            Err(LoadError::DanglingReference { line, id })
        }
    };
    let mut intra = Vec::with_capacity(edges.len());
    for (a, b, line) in edges {
        intra.push((check(a, line)?, check(b, line)?));
    }
    let mut dep = Vec::with_capacity(arcs.len());
    for (from, to, line) in arcs {
        dep.push((check(from, line)?, check(to, line)?));
    }
    let mut failed_ids = Vec::with_capacity(failed.len());
    for (id, line) in failed {
        failed_ids.push(check(id, line)?);
    }
    let (resources, _) = resource.ok_or(LoadError::MissingResource)?;

    let mut layers = Vec::with_capacity(n);
    let mut demand = Vec::with_capacity(n);
    let mut utility = Vec::with_capacity(n);
    for (_, d) in decls {
        layers.push(d.layer);
        demand.push(d.demand);
        utility.push(d.utility);
    }
    let network = InterdependentNetwork::from_parts(layers, demand, utility, intra, dep)
        .expect("ids already bounds-checked");
    Ok(FailureScenario::new(network, failed_ids, resources))
}

/// Renders a scenario in the topology file format. Output parses back to an
/// equal scenario.
pub fn format_topology(scenario: &FailureScenario) -> String {
    let net = &scenario.network;
    let mut out = String::new();
    for v in net.nodes() {
        out.push_str(&format!(
            "node {} layer={} d={} u={}\n",
            v,
            net.layer(v).index(),
            net.demand(v),
            net.utility(v)
        ));
    }
    for &(a, b) in net.intra_edges() {
        out.push_str(&format!("edge {a} {b}\n"));
    }
    for &(from, to) in net.dep_arcs() {
        out.push_str(&format!("arc {from} {to}\n"));
    }
    if !scenario.failed_init.is_empty() {
        out.push_str("failed");
        for v in &scenario.failed_init {
            out.push_str(&format!(" {v}"));
        }
        out.push('\n');
    }
    match &scenario.resources {
        ResourceSchedule::Constant(c) => out.push_str(&format!("resource const {c}\n")),
        ResourceSchedule::Sequence(seq) => {
            out.push_str("resource seq");
            for c in seq {
                out.push_str(&format!(" {c}"));
            }
            out.push('\n');
        }
    }
    out
}
