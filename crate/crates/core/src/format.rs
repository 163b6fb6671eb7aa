//! Input file formats: a line-oriented text form and a JSON equivalent,
//! selected by file extension.
//!
//! Text grammar (one record per line, `#` starts a comment):
//!
//! ```text
//! node <name>
//! link <id> <end-a> <end-b> <length>
//! demand <id> <end-a> <end-b> [units]
//! ```

use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    Demand, DemandError, DemandId, Link, LinkId, NodeId, Topology, TopologyError,
};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid topology: {0}")]
    Topology(#[from] TopologyError),
    #[error("invalid demand: {0}")]
    Demand(#[from] DemandError),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Format {
    Text,
    Json,
}

impl Format {
    /// `.json` selects JSON; anything else is the text form.
    pub fn from_path(path: &FsPath) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            _ => Format::Text,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinkSpec {
    pub id: u32,
    pub a: String,
    pub b: String,
    pub length: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TopologyFile {
    pub nodes: Vec<String>,
    pub links: Vec<LinkSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DemandSpec {
    pub id: u32,
    pub a: String,
    pub b: String,
    #[serde(default = "default_units")]
    pub units: u32,
}

fn default_units() -> u32 {
    1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DemandFile {
    pub demands: Vec<DemandSpec>,
}

impl TopologyFile {
    pub fn build(&self) -> Result<Topology, FormatError> {
        let links: Vec<Link> = self
            .links
            .iter()
            .map(|l| Link {
                id: LinkId(l.id),
                endpoints: (NodeId::new(l.a.clone()), NodeId::new(l.b.clone())),
                length: l.length,
            })
            .collect();
        Ok(Topology::new(self.nodes.iter().map(NodeId::new), links)?)
    }
}

impl DemandFile {
    pub fn build(&self, topo: &Topology) -> Result<Vec<Demand>, FormatError> {
        self.demands
            .iter()
            .map(|d| {
                Ok(Demand::new(
                    DemandId(d.id),
                    NodeId::new(d.a.clone()),
                    NodeId::new(d.b.clone()),
                    d.units,
                    topo,
                )?)
            })
            .collect()
    }
}

fn records(input: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    input.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            None
        } else {
            Some((i + 1, body.split_whitespace().collect()))
        }
    })
}

fn parse_field<T: std::str::FromStr>(
    field: &str,
    what: &str,
    line: usize,
) -> Result<T, FormatError> {
    field.parse().map_err(|_| FormatError::Parse {
        line,
        msg: format!("cannot parse {what} from {field:?}"),
    })
}

/// Parses the text topology form into its file representation.
pub fn parse_topology_text(input: &str) -> Result<TopologyFile, FormatError> {
    let mut file = TopologyFile {
        nodes: Vec::new(),
        links: Vec::new(),
    };
    for (line, fields) in records(input) {
        match fields[0] {
            "node" => {
                if fields.len() != 2 {
                    return Err(FormatError::Parse {
                        line,
                        msg: format!("node record needs 1 field, got {}", fields.len() - 1),
                    });
                }
                file.nodes.push(fields[1].to_owned());
            }
            "link" => {
                if fields.len() != 5 {
                    return Err(FormatError::Parse {
                        line,
                        msg: format!("link record needs 4 fields, got {}", fields.len() - 1),
                    });
                }
                file.links.push(LinkSpec {
                    id: parse_field(fields[1], "link id", line)?,
                    a: fields[2].to_owned(),
                    b: fields[3].to_owned(),
                    length: parse_field(fields[4], "length", line)?,
                });
            }
            other => {
                return Err(FormatError::Parse {
                    line,
                    msg: format!("unknown record {other:?} in topology file"),
                })
            }
        }
    }
    Ok(file)
}

/// Parses the text demand form into its file representation.
pub fn parse_demands_text(input: &str) -> Result<DemandFile, FormatError> {
    let mut file = DemandFile {
        demands: Vec::new(),
    };
    for (line, fields) in records(input) {
        match fields[0] {
            "demand" => {
                if !(4..=5).contains(&fields.len()) {
                    return Err(FormatError::Parse {
                        line,
                        msg: format!("demand record needs 3 or 4 fields, got {}", fields.len() - 1),
                    });
                }
                let units = if fields.len() == 5 {
                    parse_field(fields[4], "units", line)?
                } else {
                    1
                };
                file.demands.push(DemandSpec {
                    id: parse_field(fields[1], "demand id", line)?,
                    a: fields[2].to_owned(),
                    b: fields[3].to_owned(),
                    units,
                });
            }
            other => {
                return Err(FormatError::Parse {
                    line,
                    msg: format!("unknown record {other:?} in demand file"),
                })
            }
        }
    }
    Ok(file)
}

/// Parses topology input in the given format and validates it.
pub fn load_topology(input: &str, format: Format) -> Result<Topology, FormatError> {
    let file = match format {
        Format::Text => parse_topology_text(input)?,
        Format::Json => serde_json::from_str(input)?,
    };
    file.build()
}

/// Parses demand input in the given format and validates it against the
/// topology.
pub fn load_demands(
    input: &str,
    format: Format,
    topo: &Topology,
) -> Result<Vec<Demand>, FormatError> {
    let file = match format {
        Format::Text => parse_demands_text(input)?,
        Format::Json => serde_json::from_str(input)?,
    };
    file.build(topo)
}

/// Canonical text serialization of a topology.
pub fn topology_to_text(topo: &Topology) -> String {
    let mut out = String::new();
    for node in topo.nodes() {
        out.push_str(&format!("node {node}\n"));
    }
    for l in topo.links() {
        out.push_str(&format!(
            "link {} {} {} {}\n",
            l.id, l.endpoints.0, l.endpoints.1, l.length
        ));
    }
    out
}

/// Canonical text serialization of a demand set.
pub fn demands_to_text(demands: &[Demand]) -> String {
    let mut out = String::new();
    for d in demands {
        out.push_str(&format!(
            "demand {} {} {} {}\n",
            d.id, d.endpoints.0, d.endpoints.1, d.units
        ));
    }
    out
}
