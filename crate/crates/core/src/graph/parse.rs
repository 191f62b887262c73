//! Line-oriented graph description format.
//!
//! ```text
//! # comments run to the end of the line
//! vertices: v w
//! edge v v 2      # two loops at v
//! edge w v        # one edge with source w and range v
//! ```
//!
//! `edge SRC DST [MULT]` creates `MULT` (default 1) parallel edges with
//! source `SRC` and range `DST`, each contributing to `A(DST, SRC)`.

use std::collections::HashMap;

use thiserror::Error;

use super::{DirectedGraph, Edge};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("expected `vertices:` before any edge")]
    MissingVertices,
    #[error("the vertex list is empty")]
    EmptyVertexList,
    #[error("vertices are already declared")]
    RepeatedDeclaration,
    #[error("vertex `{0}` is declared twice")]
    DuplicateVertex(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("invalid multiplicity `{0}`; expected a positive integer")]
    InvalidMultiplicity(String),
    #[error("malformed edge line; expected `edge SRC DST [MULT]`")]
    MalformedEdge,
    #[error("unrecognised line `{0}`")]
    UnrecognisedLine(String),
    #[error("no vertex declaration found")]
    NoDeclaration,
}

pub fn parse_graph(text: &str) -> Result<DirectedGraph, ParseError> {
    let mut names: Option<Vec<String>> = None;
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut edges = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |kind| ParseError { line: line_no, kind };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }

        if let Some(rest) = line.strip_prefix("vertices:") {
            if names.is_some() {
                return Err(err(ParseErrorKind::RepeatedDeclaration));
            }
            let declared: Vec<String> = rest.split_whitespace().map(str::to_owned).collect();
            if declared.is_empty() {
                return Err(err(ParseErrorKind::EmptyVertexList));
            }
            for (k, name) in declared.iter().enumerate() {
                if index.insert(name.clone(), k).is_some() {
                    return Err(err(ParseErrorKind::DuplicateVertex(name.clone())));
                }
            }
            names = Some(declared);
            continue;
        }

        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("edge") => {
                if names.is_none() {
                    return Err(err(ParseErrorKind::MissingVertices));
                }
                let fields: Vec<&str> = tokens.collect();
                if !(2..=3).contains(&fields.len()) {
                    return Err(err(ParseErrorKind::MalformedEdge));
                }
                let lookup = |name: &str| {
                    index
                        .get(name)
                        .copied()
                        .ok_or_else(|| err(ParseErrorKind::UnknownVertex(name.to_owned())))
                };
                let source = lookup(fields[0])?;
                let range = lookup(fields[1])?;
                let multiplicity = match fields.get(2) {
                    None => 1,
                    Some(tok) => match tok.parse::<u32>() {
                        Ok(m) if m >= 1 => m,
                        _ => return Err(err(ParseErrorKind::InvalidMultiplicity((*tok).to_owned()))),
                    },
                };
                edges.push(Edge { source, range, multiplicity });
            }
            _ => return Err(err(ParseErrorKind::UnrecognisedLine(line.to_owned()))),
        }
    }

    let last_line = text.lines().count().max(1);
    let names = names.ok_or(ParseError { line: last_line, kind: ParseErrorKind::NoDeclaration })?;
    Ok(DirectedGraph::new(names, edges).expect("names and edges were validated while parsing"))
}
