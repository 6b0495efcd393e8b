//! Dataset ingestion and emission.
//!
//! Formats are tab-separated text, chosen to match common network
//! repository dumps:
//! * color file: one `vertex<TAB>color` line per vertex;
//! * edge file: `u<TAB>w[<TAB>multiplicity]` lines, multiplicity defaulting
//!   to 1, with repeated pairs accumulating (so one line per interaction
//!   loads directly as a multigraph).
//!
//! Vertex and color ids are assigned in first-appearance order; external
//! names live only here. Writers emit sorted, explicit-multiplicity edge
//! lines, so output bytes are a deterministic function of the graph.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use polaris_core::graph::{ColoredMultigraph, GraphError, Pair};
use polaris_core::samplers::ChainTrace;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed line: {reason}")]
    MalformedLine {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("{path}:{line}: vertex {name:?} does not appear in the color file")]
    UnknownVertex {
        path: PathBuf,
        line: usize,
        name: String,
    },
    #[error("{path}:{line}: vertex {name:?} assigned a color twice")]
    DuplicateVertex {
        path: PathBuf,
        line: usize,
        name: String,
    },
    #[error("{path}: color file is empty")]
    EmptyColorFile { path: PathBuf },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A loaded graph plus the name maps needed to write it back out.
#[derive(Debug, Clone)]
pub struct GraphDocument {
    pub graph: ColoredMultigraph,
    pub vertex_names: Vec<String>,
    pub color_names: Vec<String>,
}

impl GraphDocument {
    /// Same names and colors around a different member of the ensemble.
    pub fn with_graph(&self, graph: ColoredMultigraph) -> GraphDocument {
        GraphDocument {
            graph,
            vertex_names: self.vertex_names.clone(),
            color_names: self.color_names.clone(),
        }
    }
}

fn read_to_string(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn split_fields(line: &str) -> Vec<&str> {
    line.trim_end_matches('\r').split('\t').collect()
}

/// Loads a color file and an edge file into a graph document.
pub fn load_graph(colors_path: &Path, edges_path: &Path) -> Result<GraphDocument, IoError> {
    let colors_text = read_to_string(colors_path)?;
    let mut vertex_ids: HashMap<String, u32> = HashMap::new();
    let mut vertex_names: Vec<String> = Vec::new();
    let mut color_ids: HashMap<String, u32> = HashMap::new();
    let mut color_names: Vec<String> = Vec::new();
    let mut vertex_colors: Vec<u32> = Vec::new();
    for (idx, raw) in colors_text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields = split_fields(raw);
        if fields.len() != 2 || fields[0].is_empty() || fields[1].is_empty() {
            return Err(IoError::MalformedLine {
                path: colors_path.to_path_buf(),
                line,
                reason: "expected `vertex<TAB>color`".to_string(),
            });
        }
        let name = fields[0].to_string();
        if vertex_ids.contains_key(&name) {
            return Err(IoError::DuplicateVertex {
                path: colors_path.to_path_buf(),
                line,
                name,
            });
        }
        let vid = vertex_names.len() as u32;
        vertex_ids.insert(name.clone(), vid);
        vertex_names.push(name);
        let color = fields[1];
        let cid = *color_ids.entry(color.to_string()).or_insert_with(|| {
            color_names.push(color.to_string());
            color_names.len() as u32 - 1
        });
        vertex_colors.push(cid);
    }
    if vertex_names.is_empty() {
        return Err(IoError::EmptyColorFile {
            path: colors_path.to_path_buf(),
        });
    }

    let edges_text = read_to_string(edges_path)?;
    let mut accumulated: HashMap<Pair, u32> = HashMap::new();
    for (idx, raw) in edges_text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields = split_fields(raw);
        if fields.len() != 2 && fields.len() != 3 {
            return Err(IoError::MalformedLine {
                path: edges_path.to_path_buf(),
                line,
                reason: "expected `u<TAB>w[<TAB>multiplicity]`".to_string(),
            });
        }
        let endpoint = |name: &str| -> Result<u32, IoError> {
            vertex_ids
                .get(name)
                .copied()
                .ok_or_else(|| IoError::UnknownVertex {
                    path: edges_path.to_path_buf(),
                    line,
                    name: name.to_string(),
                })
        };
        let u = endpoint(fields[0])?;
        let w = endpoint(fields[1])?;
        let mult: u32 = if fields.len() == 3 {
            fields[2].parse().map_err(|_| IoError::MalformedLine {
                path: edges_path.to_path_buf(),
                line,
                reason: format!("bad multiplicity {:?}", fields[2]),
            })?
        } else {
            1
        };
        if mult == 0 {
            return Err(IoError::MalformedLine {
                path: edges_path.to_path_buf(),
                line,
                reason: "zero multiplicity".to_string(),
            });
        }
        let key = polaris_core::graph::normalize(u, w);
        *accumulated.entry(key).or_insert(0) += mult;
    }
    let edges: Vec<(u32, u32, u32)> = accumulated.into_iter().map(|((u, w), m)| (u, w, m)).collect();
    let graph = ColoredMultigraph::build(&vertex_colors, &edges)?;
    Ok(GraphDocument {
        graph,
        vertex_names,
        color_names,
    })
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), IoError> {
    std::fs::write(path, contents).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes the edge file (sorted pairs, explicit multiplicities) and the
/// color file for a document. Deterministic byte output.
pub fn write_graph(doc: &GraphDocument, edges_path: &Path, colors_path: &Path) -> Result<(), IoError> {
    let mut edges: Vec<(Pair, u32)> = doc.graph.multiedges().collect();
    edges.sort_unstable();
    let mut edge_text = String::new();
    for ((u, w), m) in edges {
        writeln!(
            edge_text,
            "{}\t{}\t{}",
            doc.vertex_names[u as usize], doc.vertex_names[w as usize], m
        )
        .expect("string write");
    }
    write_atomic(edges_path, &edge_text)?;

    let mut color_text = String::new();
    for (v, name) in doc.vertex_names.iter().enumerate() {
        writeln!(
            color_text,
            "{}\t{}",
            name,
            doc.color_names[doc.graph.color_of(v as u32) as usize]
        )
        .expect("string write");
    }
    write_atomic(colors_path, &color_text)
}

/// Writes a chain trace as CSV: one row of cumulative outcome counts per
/// record point, then a summary row with the outcome fractions.
pub fn write_trace(trace: &ChainTrace, path: &Path) -> Result<(), IoError> {
    let mut text =
        String::from("iteration,out_of_space,unchanged,accepted,rejected,degree_assortativity,statistic\n");
    for rec in &trace.records {
        let da = rec
            .degree_assortativity
            .map(|v| v.to_string())
            .unwrap_or_default();
        let st = rec.statistic.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            text,
            "{},{},{},{},{},{},{}",
            rec.iteration,
            rec.counts.out_of_space,
            rec.counts.unchanged,
            rec.counts.accepted,
            rec.counts.rejected,
            da,
            st
        )
        .expect("string write");
    }
    let f = trace.counts.fractions();
    writeln!(text, "summary,{},{},{},{},,", f[0], f[1], f[2], f[3]).expect("string write");
    write_atomic(path, &text)
}
