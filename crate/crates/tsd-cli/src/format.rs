//! The `.tsd` diagram file format (JSON) and the JSON invariant report.
//!
//! Rationals are serialized as `"num/den"` strings, so round-trips are
//! exact and the output is byte-stable for a fixed diagram and tool
//! version. Loading validates the diagram and fails with the list of
//! violated invariants.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;
use tsd_core::diagram::{ArcVertex, BridgePoint, Family, TangleArc, TorusDiagram};
use tsd_core::kernel::CoverPoint;
use tsd_core::rat;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: parse error: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error("{path}: {field}: {msg}")]
    Field {
        path: String,
        field: String,
        msg: String,
    },
    #[error("{path}: unsupported format version {found} (expected {expected})")]
    Version {
        path: String,
        found: u32,
        expected: u32,
    },
    #[error("{path}: diagram violates invariants:\n{report}")]
    Validation { path: String, report: String },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiagramFile {
    pub format_version: u32,
    pub bridge_points: Vec<BridgePointFile>,
    pub arcs: Vec<ArcFile>,
    pub asserted_bridge_position: bool,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BridgePointFile {
    pub id: String,
    pub x: String,
    pub y: String,
    pub sigma: i8,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ArcFile {
    pub family: String,
    pub vertices: Vec<VertexFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VertexFile {
    pub x: String,
    pub y: String,
    pub r: String,
}

impl DiagramFile {
    pub fn from_diagram(d: &TorusDiagram, metadata: BTreeMap<String, String>) -> DiagramFile {
        DiagramFile {
            format_version: FORMAT_VERSION,
            bridge_points: d
                .bridge_points
                .iter()
                .map(|b| BridgePointFile {
                    id: b.id.clone(),
                    x: rat::to_frac_string(&b.position.x),
                    y: rat::to_frac_string(&b.position.y),
                    sigma: b.sigma,
                })
                .collect(),
            arcs: d
                .arcs
                .iter()
                .map(|a| ArcFile {
                    family: a.family.letter().to_string(),
                    vertices: a
                        .vertices
                        .iter()
                        .map(|v| VertexFile {
                            x: rat::to_frac_string(&v.point.x),
                            y: rat::to_frac_string(&v.point.y),
                            r: rat::to_frac_string(&v.depth),
                        })
                        .collect(),
                })
                .collect(),
            asserted_bridge_position: d.asserted_bridge_position,
            metadata,
        }
    }

    pub fn into_diagram(self, path: &str) -> Result<TorusDiagram, IoError> {
        if self.format_version != FORMAT_VERSION {
            return Err(IoError::Version {
                path: path.to_string(),
                found: self.format_version,
                expected: FORMAT_VERSION,
            });
        }
        let parse = |s: &str, field: String| -> Result<rat::Q, IoError> {
            rat::parse_frac(s).map_err(|msg| IoError::Field {
                path: path.to_string(),
                field,
                msg,
            })
        };
        let mut bridge_points = Vec::with_capacity(self.bridge_points.len());
        for (i, b) in self.bridge_points.iter().enumerate() {
            bridge_points.push(BridgePoint {
                id: b.id.clone(),
                position: CoverPoint::new(
                    parse(&b.x, format!("bridge_points[{i}].x"))?,
                    parse(&b.y, format!("bridge_points[{i}].y"))?,
                ),
                sigma: b.sigma,
            });
        }
        let mut arcs = Vec::with_capacity(self.arcs.len());
        for (i, a) in self.arcs.iter().enumerate() {
            let family = match a.family.as_str() {
                "A" => Family::A,
                "B" => Family::B,
                "C" => Family::C,
                other => {
                    return Err(IoError::Field {
                        path: path.to_string(),
                        field: format!("arcs[{i}].family"),
                        msg: format!("unknown family {other:?}"),
                    })
                }
            };
            let mut vertices = Vec::with_capacity(a.vertices.len());
            for (k, v) in a.vertices.iter().enumerate() {
                vertices.push(ArcVertex::new(
                    CoverPoint::new(
                        parse(&v.x, format!("arcs[{i}].vertices[{k}].x"))?,
                        parse(&v.y, format!("arcs[{i}].vertices[{k}].y"))?,
                    ),
                    parse(&v.r, format!("arcs[{i}].vertices[{k}].r"))?,
                ));
            }
            arcs.push(TangleArc::new(family, vertices));
        }
        Ok(TorusDiagram::new(
            bridge_points,
            arcs,
            self.asserted_bridge_position,
        ))
    }
}

/// Serialize a diagram to the canonical `.tsd` byte string.
pub fn to_string(d: &TorusDiagram, metadata: BTreeMap<String, String>) -> String {
    let file = DiagramFile::from_diagram(d, metadata);
    let mut s = serde_json::to_string_pretty(&file).expect("serializable");
    s.push('\n');
    s
}

pub fn save(d: &TorusDiagram, path: &Path) -> Result<(), IoError> {
    save_with_metadata(d, path, BTreeMap::new())
}

pub fn save_with_metadata(
    d: &TorusDiagram,
    path: &Path,
    metadata: BTreeMap<String, String>,
) -> Result<(), IoError> {
    std::fs::write(path, to_string(d, metadata)).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parse a `.tsd` byte string; the diagram must validate.
pub fn from_str(text: &str, path: &str) -> Result<TorusDiagram, IoError> {
    let file: DiagramFile = serde_json::from_str(text).map_err(|source| IoError::Parse {
        path: path.to_string(),
        source,
    })?;
    let diagram = file.into_diagram(path)?;
    let report = diagram.validate();
    if !report.is_empty() {
        return Err(IoError::Validation {
            path: path.to_string(),
            report: report.to_string(),
        });
    }
    Ok(diagram)
}

pub fn load(path: &Path) -> Result<TorusDiagram, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })?;
    from_str(&text, &path.display().to_string())
}

/// Parse without validating (used to inspect broken fixtures).
pub fn load_unvalidated(path: &Path) -> Result<TorusDiagram, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let p = path.display().to_string();
    let file: DiagramFile = serde_json::from_str(&text).map_err(|source| IoError::Parse {
        path: p.clone(),
        source,
    })?;
    file.into_diagram(&p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tsd_core::builders::complex_line;

    #[test]
    fn round_trip_is_exact() {
        let d = complex_line();
        let text = to_string(&d, BTreeMap::new());
        let back = from_str(&text, "test").unwrap();
        assert_eq!(back, d);
        // Byte-stability.
        assert_eq!(to_string(&back, BTreeMap::new()), text);
    }

    #[test]
    fn zero_denominator_is_a_parse_error() {
        let d = complex_line();
        let text = to_string(&d, BTreeMap::new()).replace("\"2/3\"", "\"1/0\"");
        let err = from_str(&text, "test").unwrap_err();
        assert!(matches!(err, IoError::Field { .. }), "{err}");
    }
}
