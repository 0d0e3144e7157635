//! Reader for the ASCII MSH 2.2 subset: `$MeshFormat`, `$Nodes` and
//! `$Elements` with element types 1 (line) and 2 (triangle).

use std::collections::HashMap;
use std::path::Path;

use super::{signed_area, BoundaryEdge, Marker, Mesh};
use crate::error::{Error, Result};

/// Physical tag to marker table applied to line elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkerMap {
    tags: HashMap<i64, Marker>,
}

impl Default for MarkerMap {
    /// Tags 1..=4 map to inflow, outflow, wall, obstacle.
    fn default() -> Self {
        let mut tags = HashMap::new();
        tags.insert(1, Marker::Inflow);
        tags.insert(2, Marker::Outflow);
        tags.insert(3, Marker::Wall);
        tags.insert(4, Marker::Obstacle);
        MarkerMap { tags }
    }
}

impl MarkerMap {
    pub fn empty() -> Self {
        MarkerMap { tags: HashMap::new() }
    }

    pub fn insert(&mut self, tag: i64, marker: Marker) {
        self.tags.retain(|_, m| *m != marker);
        self.tags.insert(tag, marker);
    }

    pub fn get(&self, tag: i64) -> Option<Marker> {
        self.tags.get(&tag).copied()
    }

    pub fn tag_of(&self, marker: Marker) -> Option<i64> {
        self.tags.iter().find(|(_, m)| **m == marker).map(|(t, _)| *t)
    }
}

pub fn read_msh(path: impl AsRef<Path>, markers: &MarkerMap) -> Result<Mesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_msh_str(&text, markers)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self, context: &str) -> Result<(usize, &'a str)> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            let trimmed = line.trim();
            if !trimmed.is_empty() {
                return Ok((i + 1, trimmed));
            }
        }
        Err(Error::Parse {
            line: self.last,
            message: format!("unexpected end of file while reading {context}"),
        })
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?
        .parse()
        .map_err(|_| parse_err(line, format!("invalid {what}")))
}

pub fn read_msh_str(text: &str, markers: &MarkerMap) -> Result<Mesh> {
    let mut lines = Lines { inner: text.lines().enumerate(), last: 0 };
    let mut node_index: HashMap<i64, usize> = HashMap::new();
    let mut nodes = Vec::new();
    let mut triangles: Vec<([i64; 3], usize)> = Vec::new();
    let mut segments: Vec<([i64; 2], i64, usize)> = Vec::new();
    let (mut seen_format, mut seen_nodes, mut seen_elements) = (false, false, false);

    loop {
        let Ok((lno, header)) = lines.next_line("section header") else {
            break;
        };
        match header {
            "$MeshFormat" => {
                let (l, fmt) = lines.next_line("$MeshFormat")?;
                let mut it = fmt.split_whitespace();
                let version: f64 = parse_num(it.next(), l, "format version")?;
                let file_type: i32 = parse_num(it.next(), l, "file type")?;
                if !(2.0..3.0).contains(&version) || file_type != 0 {
                    return Err(parse_err(l, format!(
                        "only ASCII MSH 2.x is supported (version {version}, type {file_type})"
                    )));
                }
                expect_end(&mut lines, "$EndMeshFormat")?;
                seen_format = true;
            }
            "$Nodes" => {
                let (l, count) = lines.next_line("$Nodes")?;
                let n: usize = parse_num(Some(count), l, "node count")?;
                for _ in 0..n {
                    let (l, row) = lines.next_line("$Nodes")?;
                    let mut it = row.split_whitespace();
                    let id: i64 = parse_num(it.next(), l, "node id")?;
                    let x: f64 = parse_num(it.next(), l, "x coordinate")?;
                    let y: f64 = parse_num(it.next(), l, "y coordinate")?;
                    if node_index.insert(id, nodes.len()).is_some() {
                        return Err(parse_err(l, format!("duplicate node id {id}")));
                    }
                    nodes.push([x, y]);
                }
                expect_end(&mut lines, "$EndNodes")?;
                seen_nodes = true;
            }
            "$Elements" => {
                let (l, count) = lines.next_line("$Elements")?;
                let n: usize = parse_num(Some(count), l, "element count")?;
                for _ in 0..n {
                    let (l, row) = lines.next_line("$Elements")?;
                    let fields: Vec<&str> = row.split_whitespace().collect();
                    let mut it = fields.iter().copied();
                    let _id: i64 = parse_num(it.next(), l, "element id")?;
                    let kind: i32 = parse_num(it.next(), l, "element type")?;
                    let ntags: usize = parse_num(it.next(), l, "tag count")?;
                    let tags: Vec<i64> = (0..ntags)
                        .map(|_| parse_num(it.next(), l, "tag"))
                        .collect::<Result<_>>()?;
                    let physical = tags.first().copied().unwrap_or(0);
                    match kind {
                        1 => {
                            let a = parse_num(it.next(), l, "node reference")?;
                            let b = parse_num(it.next(), l, "node reference")?;
                            segments.push(([a, b], physical, l));
                        }
                        2 => {
                            let a = parse_num(it.next(), l, "node reference")?;
                            let b = parse_num(it.next(), l, "node reference")?;
                            let c = parse_num(it.next(), l, "node reference")?;
                            triangles.push(([a, b, c], l));
                        }
                        other => {
                            return Err(parse_err(l, format!("unsupported element type {other}")))
                        }
                    }
                }
                expect_end(&mut lines, "$EndElements")?;
                seen_elements = true;
            }
            other if other.starts_with("$End") => {
                return Err(parse_err(lno, format!("unexpected {other}")));
            }
            other if other.starts_with('$') => {
                // Unknown section: skip to its end marker.
                let end = format!("$End{}", &other[1..]);
                loop {
                    let (_, l) = lines.next_line(other)?;
                    if l == end {
                        break;
                    }
                }
            }
            other => return Err(parse_err(lno, format!("expected section header, found `{other}`"))),
        }
    }

    if !seen_format {
        log::warn!("MSH input has no $MeshFormat section; assuming 2.2 ASCII");
    }
    if !seen_nodes {
        return Err(parse_err(lines.last, "missing $Nodes section"));
    }
    if !seen_elements {
        return Err(parse_err(lines.last, "missing $Elements section"));
    }

    let resolve = |id: i64, line: usize| -> Result<usize> {
        node_index
            .get(&id)
            .copied()
            .ok_or_else(|| parse_err(line, format!("element references unknown node {id}")))
    };
    let mut tris = Vec::with_capacity(triangles.len());
    for (ids, line) in triangles {
        let mut t = [resolve(ids[0], line)?, resolve(ids[1], line)?, resolve(ids[2], line)?];
        if signed_area(nodes[t[0]], nodes[t[1]], nodes[t[2]]) < 0.0 {
            log::warn!("triangle on line {line} is clockwise; reordering");
            t.swap(1, 2);
        }
        tris.push(t);
    }
    let mut boundary = Vec::with_capacity(segments.len());
    for (ids, tag, line) in segments {
        let marker = markers
            .get(tag)
            .ok_or_else(|| parse_err(line, format!("physical tag {tag} has no marker mapping")))?;
        boundary.push(BoundaryEdge {
            nodes: [resolve(ids[0], line)?, resolve(ids[1], line)?],
            marker,
        });
    }
    Mesh::new(nodes, tris, boundary)
}

fn expect_end(lines: &mut Lines<'_>, end: &str) -> Result<()> {
    let (l, tok) = lines.next_line(end)?;
    if tok != end {
        return Err(parse_err(l, format!("expected {end}, found `{tok}`")));
    }
    Ok(())
}
