//! Point-cloud I/O (XYZ, PLY), colored export and a kd-tree for
//! neighborhood queries.

use std::collections::{BTreeMap, BinaryHeap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::Vector3;

use crate::error::{LitsError, Result};

/// Positions are stored in 3D; planar clouds have `dim == 2` and `z == 0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    pub dim: usize,
    pub positions: Vec<Vector3<f64>>,
    pub attributes: BTreeMap<String, Vec<f64>>,
}

impl PointCloud {
    pub fn new(dim: usize, positions: Vec<Vector3<f64>>) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(LitsError::param("dim", "must be 2 or 3"));
        }
        if let Some(i) = positions.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(LitsError::param("positions", format!("point {i} has a non-finite coordinate")));
        }
        if dim == 2 && positions.iter().any(|p| p.z != 0.0) {
            return Err(LitsError::param("positions", "planar cloud with nonzero z"));
        }
        Ok(PointCloud {
            dim,
            positions,
            attributes: BTreeMap::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn set_attribute(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        if values.len() != self.len() {
            return Err(LitsError::param(
                "attribute",
                format!("{name} has {} values for {} points", values.len(), self.len()),
            ));
        }
        self.attributes.insert(name.to_string(), values);
        Ok(())
    }

    pub fn attribute(&self, name: &str) -> Result<&[f64]> {
        self.attributes
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| LitsError::MissingAttribute(name.to_string()))
    }
}

fn parse_error(line: usize, msg: impl std::fmt::Display) -> LitsError {
    LitsError::Parse(format!("line {line}: {msg}"))
}

/// Whitespace-separated coordinates, two or three per line. `#` starts a
/// comment.
pub fn parse_xyz(text: &str) -> Result<PointCloud> {
    let mut dim = None;
    let mut positions = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let coords = content
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| parse_error(line_no, format!("bad number {t:?}"))))
            .collect::<Result<Vec<f64>>>()?;
        if coords.len() != 2 && coords.len() != 3 {
            return Err(parse_error(line_no, format!("expected 2 or 3 values, found {}", coords.len())));
        }
        match dim {
            None => dim = Some(coords.len()),
            Some(d) if d != coords.len() => {
                return Err(parse_error(line_no, format!("mixed dimensionality ({d} then {})", coords.len())));
            }
            _ => {}
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(parse_error(line_no, "non-finite coordinate"));
        }
        positions.push(Vector3::new(coords[0], coords[1], coords.get(2).copied().unwrap_or(0.0)));
    }
    PointCloud::new(dim.unwrap_or(3), positions)
}

pub fn read_xyz(path: impl AsRef<Path>) -> Result<PointCloud> {
    parse_xyz(&fs::read_to_string(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().expect("8 bytes")),
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar { name: String, ty: Scalar },
    List { count: Scalar, item: Scalar },
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

#[derive(Debug, PartialEq)]
enum Format {
    Ascii,
    BinaryLe,
}

struct Header {
    format: Format,
    elements: Vec<Element>,
    body_offset: usize,
    lines: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    let mut offset = 0;
    let mut line_no = 0;
    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let rest = &bytes[offset..];
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| parse_error(line_no + 1, "header ends without end_header"))?;
        line_no += 1;
        let line = std::str::from_utf8(&rest[..end])
            .map_err(|_| parse_error(line_no, "header is not valid text"))?
            .trim_end_matches('\r')
            .trim();
        offset += end + 1;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if line_no == 1 {
            if line != "ply" {
                return Err(parse_error(1, "missing ply magic"));
            }
            continue;
        }
        match tokens.as_slice() {
            [] | ["comment", ..] | ["obj_info", ..] => {}
            ["format", "ascii", _] => format = Some(Format::Ascii),
            ["format", "binary_little_endian", _] => format = Some(Format::BinaryLe),
            ["format", other, ..] => return Err(parse_error(line_no, format!("unsupported format {other}"))),
            ["element", name, count] => {
                let count = count
                    .parse()
                    .map_err(|_| parse_error(line_no, format!("bad element count {count:?}")))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            ["property", "list", count, item, _] => {
                let (Some(count), Some(item)) = (Scalar::parse(count), Scalar::parse(item)) else {
                    return Err(parse_error(line_no, "unknown list property type"));
                };
                elements
                    .last_mut()
                    .ok_or_else(|| parse_error(line_no, "property before element"))?
                    .properties
                    .push(Property::List { count, item });
            }
            ["property", ty, name] => {
                let ty = Scalar::parse(ty).ok_or_else(|| parse_error(line_no, format!("unknown type {ty}")))?;
                elements
                    .last_mut()
                    .ok_or_else(|| parse_error(line_no, "property before element"))?
                    .properties
                    .push(Property::Scalar {
                        name: name.to_string(),
                        ty,
                    });
            }
            ["end_header"] => break,
            _ => return Err(parse_error(line_no, format!("unrecognized header line {line:?}"))),
        }
    }
    let format = format.ok_or_else(|| parse_error(line_no, "missing format line"))?;
    Ok(Header {
        format,
        elements,
        body_offset: offset,
        lines: line_no,
    })
}

// Column indices of x, y, z and the extra scalar properties of the vertex element.
struct VertexLayout {
    xyz: [Option<usize>; 3],
    extras: Vec<(usize, String)>,
}

fn vertex_layout(e: &Element) -> Result<VertexLayout> {
    let mut xyz = [None; 3];
    let mut extras = Vec::new();
    for (i, p) in e.properties.iter().enumerate() {
        if let Property::Scalar { name, .. } = p {
            match name.as_str() {
                "x" => xyz[0] = Some(i),
                "y" => xyz[1] = Some(i),
                "z" => xyz[2] = Some(i),
                _ => extras.push((i, name.clone())),
            }
        }
    }
    if xyz[0].is_none() || xyz[1].is_none() {
        return Err(LitsError::Parse("vertex element lacks x or y".into()));
    }
    Ok(VertexLayout { xyz, extras })
}

fn assemble(rows: Vec<Vec<f64>>, layout: &VertexLayout) -> Result<PointCloud> {
    let dim = if layout.xyz[2].is_some() { 3 } else { 2 };
    let get = |row: &Vec<f64>, k: usize| layout.xyz[k].map_or(0.0, |i| row[i]);
    let positions = rows.iter().map(|r| Vector3::new(get(r, 0), get(r, 1), get(r, 2))).collect();
    let mut cloud = PointCloud::new(dim, positions)?;
    for (i, name) in &layout.extras {
        cloud.set_attribute(name, rows.iter().map(|r| r[*i]).collect())?;
    }
    Ok(cloud)
}

/// Parses an ascii or binary little-endian PLY. Only the vertex element is
/// kept; its scalar properties other than x, y, z become attributes.
pub fn parse_ply(bytes: &[u8]) -> Result<PointCloud> {
    let header = parse_header(bytes)?;
    let body = &bytes[header.body_offset..];
    let mut vertex: Option<(Vec<Vec<f64>>, VertexLayout)> = None;
    match header.format {
        Format::Ascii => {
            let text = std::str::from_utf8(body).map_err(|_| LitsError::Parse("ascii body is not valid text".into()))?;
            let mut lines = text
                .lines()
                .enumerate()
                .map(|(k, l)| (header.lines + k + 1, l.trim()))
                .filter(|(_, l)| !l.is_empty());
            for e in &header.elements {
                let layout = if e.name == "vertex" { Some(vertex_layout(e)?) } else { None };
                let mut rows = Vec::with_capacity(if layout.is_some() { e.count } else { 0 });
                for _ in 0..e.count {
                    let (line_no, line) = lines
                        .next()
                        .ok_or_else(|| LitsError::Parse(format!("unexpected end of data in element {}", e.name)))?;
                    if layout.is_none() {
                        continue;
                    }
                    let mut tokens = line.split_whitespace();
                    let mut next = || -> Result<f64> {
                        let t = tokens.next().ok_or_else(|| parse_error(line_no, "too few values"))?;
                        t.parse::<f64>().map_err(|_| parse_error(line_no, format!("bad number {t:?}")))
                    };
                    let mut row = Vec::with_capacity(e.properties.len());
                    for p in &e.properties {
                        match p {
                            Property::Scalar { .. } => row.push(next()?),
                            Property::List { .. } => {
                                let n = next()? as usize;
                                for _ in 0..n {
                                    next()?;
                                }
                                row.push(f64::NAN);
                            }
                        }
                    }
                    if row.iter().zip(&e.properties).any(|(v, p)| matches!(p, Property::Scalar { .. }) && !v.is_finite())
                    {
                        return Err(parse_error(line_no, "non-finite value"));
                    }
                    rows.push(row);
                }
                if let Some(layout) = layout {
                    vertex = Some((rows, layout));
                }
            }
        }
        Format::BinaryLe => {
            let mut pos = 0usize;
            let mut take = |n: usize, what: &str| -> Result<&[u8]> {
                let chunk = body
                    .get(pos..pos + n)
                    .ok_or_else(|| LitsError::Parse(format!("unexpected end of binary data in {what}")))?;
                pos += n;
                Ok(chunk)
            };
            for e in &header.elements {
                let layout = if e.name == "vertex" { Some(vertex_layout(e)?) } else { None };
                let mut rows = Vec::new();
                for _ in 0..e.count {
                    let mut row = Vec::with_capacity(e.properties.len());
                    for p in &e.properties {
                        match p {
                            Property::Scalar { ty, .. } => row.push(ty.read_le(take(ty.size(), &e.name)?)),
                            Property::List { count, item } => {
                                let n = count.read_le(take(count.size(), &e.name)?) as usize;
                                take(n * item.size(), &e.name)?;
                                row.push(f64::NAN);
                            }
                        }
                    }
                    if layout.is_some() {
                        rows.push(row);
                    }
                }
                if let Some(layout) = layout {
                    vertex = Some((rows, layout));
                }
            }
        }
    }
    let (rows, layout) = vertex.ok_or_else(|| LitsError::Parse("no vertex element".into()))?;
    assemble(rows, &layout)
}

pub fn read_ply(path: impl AsRef<Path>) -> Result<PointCloud> {
    parse_ply(&fs::read(path)?)
}

/// Reads `.ply` files as PLY and anything else as XYZ.
pub fn read_cloud(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    let is_ply = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("ply"));
    if is_ply { read_ply(path) } else { read_xyz(path) }
}

fn coordinate_names(cloud: &PointCloud) -> &'static [&'static str] {
    if cloud.dim == 2 { &["x", "y"] } else { &["x", "y", "z"] }
}

/// Binary little-endian PLY with double coordinates and attributes.
pub fn encode_ply(cloud: &PointCloud) -> Vec<u8> {
    let mut header = String::from("ply\nformat binary_little_endian 1.0\n");
    let _ = writeln!(header, "element vertex {}", cloud.len());
    for c in coordinate_names(cloud) {
        let _ = writeln!(header, "property double {c}");
    }
    for name in cloud.attributes.keys() {
        let _ = writeln!(header, "property double {name}");
    }
    header.push_str("end_header\n");
    let mut out = header.into_bytes();
    for (i, p) in cloud.positions.iter().enumerate() {
        for k in 0..cloud.dim {
            out.extend_from_slice(&p[k].to_le_bytes());
        }
        for values in cloud.attributes.values() {
            out.extend_from_slice(&values[i].to_le_bytes());
        }
    }
    out
}

pub fn write_ply(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, encode_ply(cloud))?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Colormap {
    Coolwarm,
    Jet,
    GreenRed,
}

impl FromStr for Colormap {
    type Err = LitsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coolwarm" => Ok(Colormap::Coolwarm),
            "jet" => Ok(Colormap::Jet),
            "green_red" | "green-red" => Ok(Colormap::GreenRed),
            _ => Err(LitsError::param("colormap", format!("unknown colormap {s:?}"))),
        }
    }
}

type Table = [[u8; 3]; 256];

fn load_table(text: &str) -> Table {
    let mut table = [[0u8; 3]; 256];
    let rows = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let mut n = 0;
    for (slot, line) in table.iter_mut().zip(rows) {
        for (c, t) in slot.iter_mut().zip(line.split_whitespace()) {
            *c = t.parse().expect("colormap table entry");
        }
        n += 1;
    }
    assert_eq!(n, 256, "colormap tables have 256 rows");
    table
}

impl Colormap {
    pub fn table(self) -> &'static Table {
        static COOLWARM: OnceLock<Table> = OnceLock::new();
        static JET: OnceLock<Table> = OnceLock::new();
        static GREEN_RED: OnceLock<Table> = OnceLock::new();
        match self {
            Colormap::Coolwarm => COOLWARM.get_or_init(|| load_table(include_str!("../data/coolwarm.txt"))),
            Colormap::Jet => JET.get_or_init(|| load_table(include_str!("../data/jet.txt"))),
            Colormap::GreenRed => GREEN_RED.get_or_init(|| load_table(include_str!("../data/green_red.txt"))),
        }
    }

    /// Color at `t ∈ [0, 1]`, linearly interpolated between table entries.
    pub fn color_at(self, t: f64) -> [u8; 3] {
        let x = lookup_position(t);
        let i = (x.floor() as usize).min(254);
        let frac = x - i as f64;
        let (a, b) = (self.table()[i], self.table()[i + 1]);
        std::array::from_fn(|k| (a[k] as f64 + frac * (b[k] as f64 - a[k] as f64)).round() as u8)
    }
}

/// Fractional table index of `t`.
pub fn lookup_position(t: f64) -> f64 {
    t.clamp(0.0, 1.0) * 255.0
}

/// Normalized scalars: min maps to 0, max to 1, a constant to 0.5.
pub fn normalize_scalars(values: &[f64]) -> Result<Vec<f64>> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(LitsError::param("scalar", "must be finite to be colored"));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(values
        .iter()
        .map(|v| if hi > lo { (v - lo) / (hi - lo) } else { 0.5 })
        .collect())
}

pub fn colors_for(values: &[f64], colormap: Colormap) -> Result<Vec<[u8; 3]>> {
    Ok(normalize_scalars(values)?.into_iter().map(|t| colormap.color_at(t)).collect())
}

/// Ascii PLY with uchar colors derived from the named attribute, which is
/// also written as a double property.
pub fn encode_ply_colored(cloud: &PointCloud, scalar_name: &str, colormap: Colormap) -> Result<String> {
    let values = cloud.attribute(scalar_name)?;
    let colors = colors_for(values, colormap)?;
    let mut out = String::from("ply\nformat ascii 1.0\n");
    let _ = writeln!(out, "element vertex {}", cloud.len());
    for c in coordinate_names(cloud) {
        let _ = writeln!(out, "property double {c}");
    }
    out.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    let _ = writeln!(out, "property double {scalar_name}");
    out.push_str("end_header\n");
    for ((p, rgb), v) in cloud.positions.iter().zip(&colors).zip(values) {
        for k in 0..cloud.dim {
            let _ = write!(out, "{:.16e} ", p[k]);
        }
        let _ = writeln!(out, "{} {} {} {:.16e}", rgb[0], rgb[1], rgb[2], v);
    }
    Ok(out)
}

pub fn write_ply_colored(cloud: &PointCloud, scalar_name: &str, colormap: Colormap, path: impl AsRef<Path>) -> Result<()> {
    let text = encode_ply_colored(cloud, scalar_name, colormap)?;
    Ok(fs::write(path, text)?)
}

/// Result of a neighborhood query, ordered by distance, then point index.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighbors {
    pub indices: Vec<usize>,
    pub distances: Vec<f64>,
    /// Largest returned distance (0 when nothing was found).
    pub r_q: f64,
}

impl Neighbors {
    fn from_sorted(mut hits: Vec<(f64, usize)>) -> Self {
        hits.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let distances: Vec<f64> = hits.iter().map(|h| h.0.sqrt()).collect();
        Neighbors {
            indices: hits.iter().map(|h| h.1).collect(),
            r_q: distances.last().copied().unwrap_or(0.0),
            distances,
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

/// Immutable kd-tree over the cloud positions.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    points: Vec<Vector3<f64>>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

fn dist2(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    (a - b).norm_squared()
}

impl SpatialIndex {
    pub fn build(cloud: &PointCloud) -> Self {
        let mut index = SpatialIndex {
            points: cloud.positions.clone(),
            order: (0..cloud.len()).collect(),
            nodes: Vec::new(),
        };
        if !index.points.is_empty() {
            index.build_node(0, index.points.len());
        }
        index
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let slice = &self.order[start..end];
        let mut lo = Vector3::repeat(f64::INFINITY);
        let mut hi = Vector3::repeat(f64::NEG_INFINITY);
        for &i in slice {
            lo = lo.inf(&self.points[i]);
            hi = hi.sup(&self.points[i]);
        }
        let axis = (hi - lo).imax();
        if hi[axis] == lo[axis] {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let mid = start + (end - start) / 2;
        let points = &self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| points[a][axis].total_cmp(&points[b][axis]));
        let value = self.points[self.order[mid]][axis];
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> Vector3<f64> {
        self.points[i]
    }

    /// All points with `0 < |x − p| ≤ r`.
    pub fn query_radius(&self, p: &Vector3<f64>, r: f64) -> Result<Neighbors> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(LitsError::param("radius", "must be finite and nonnegative"));
        }
        let r2 = r * r;
        let mut hits = Vec::new();
        if self.nodes.is_empty() {
            return Ok(Neighbors::from_sorted(hits));
        }
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            match self.nodes[id] {
                Node::Leaf { start, end } => {
                    for &i in &self.order[start..end] {
                        let d2 = dist2(&self.points[i], p);
                        if d2 > 0.0 && d2 <= r2 {
                            hits.push((d2, i));
                        }
                    }
                }
                Node::Split {
                    axis,
                    value,
                    left,
                    right,
                } => {
                    let diff = p[axis] - value;
                    // left holds coordinates ≤ value, right ≥ value
                    if diff <= 0.0 || diff * diff <= r2 {
                        stack.push(left);
                    }
                    if diff >= 0.0 || diff * diff <= r2 {
                        stack.push(right);
                    }
                }
            }
        }
        Ok(Neighbors::from_sorted(hits))
    }

    /// The `k` nearest points at positive distance; ties go to the lower index.
    pub fn query_knn(&self, p: &Vector3<f64>, k: usize) -> Result<Neighbors> {
        if k + 1 > self.len() {
            return Err(LitsError::param(
                "k",
                format!("{k} neighbors requested from a cloud of {} points", self.len()),
            ));
        }
        let mut heap: BinaryHeap<(OrderedDist, usize)> = BinaryHeap::with_capacity(k + 1);
        if k > 0 {
            self.knn_visit(0, p, k, &mut heap);
        }
        if heap.len() < k {
            log::warn!("only {} points at positive distance, {k} requested", heap.len());
        }
        Ok(Neighbors::from_sorted(heap.into_iter().map(|(d, i)| (d.0, i)).collect()))
    }

    fn knn_visit(&self, id: usize, p: &Vector3<f64>, k: usize, heap: &mut BinaryHeap<(OrderedDist, usize)>) {
        match self.nodes[id] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let d2 = dist2(&self.points[i], p);
                    if d2 <= 0.0 {
                        continue;
                    }
                    let cand = (OrderedDist(d2), i);
                    if heap.len() < k {
                        heap.push(cand);
                    } else if cand < *heap.peek().expect("heap is full") {
                        heap.pop();
                        heap.push(cand);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = p[axis] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.knn_visit(near, p, k, heap);
                let worst = heap.peek().map(|w| w.0.0);
                if heap.len() < k || worst.is_some_and(|w| diff * diff <= w) {
                    self.knn_visit(far, p, k, heap);
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrderedDist(f64);

impl Eq for OrderedDist {}

impl PartialOrd for OrderedDist {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrderedDist {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Linear-scan reference for [`SpatialIndex::query_radius`].
pub fn linear_radius(points: &[Vector3<f64>], p: &Vector3<f64>, r: f64) -> Neighbors {
    let r2 = r * r;
    let hits = points
        .iter()
        .enumerate()
        .map(|(i, x)| (dist2(x, p), i))
        .filter(|&(d2, _)| d2 > 0.0 && d2 <= r2)
        .collect();
    Neighbors::from_sorted(hits)
}

/// Linear-scan reference for [`SpatialIndex::query_knn`].
pub fn linear_knn(points: &[Vector3<f64>], p: &Vector3<f64>, k: usize) -> Neighbors {
    let mut all = linear_radius(points, p, f64::INFINITY);
    all.indices.truncate(k);
    all.distances.truncate(k);
    all.r_q = all.distances.last().copied().unwrap_or(0.0);
    all
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn xyz_basics() {
        let c = parse_xyz("1 2 3\n4 5 6\n").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.dim, 3);
        let crlf = parse_xyz("# header\r\n1 2 3\r\n4 5 6\r\n\r\n").unwrap();
        assert_eq!(crlf, c);
        let planar = parse_xyz("0 1\n2 3 # tail comment\n").unwrap();
        assert_eq!(planar.dim, 2);
        assert_eq!(planar.positions[1], Vector3::new(2.0, 3.0, 0.0));
    }

    #[test]
    fn xyz_errors_carry_line_numbers() {
        let err = parse_xyz("1 2 3\n1 2\n").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        let err = parse_xyz("1 2 3\n\n1 x 3\n").unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        assert!(parse_xyz("1\n").is_err());
    }

    fn sample_cloud(dim: usize, n: usize, seed: u64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = (0..n)
            .map(|_| {
                let z = if dim == 3 { rng.random_range(-1.0..1.0) } else { 0.0 };
                Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), z)
            })
            .collect();
        PointCloud::new(dim, pts).unwrap()
    }

    #[test]
    fn ply_binary_round_trip_is_bit_exact() {
        let mut c = sample_cloud(3, 100, 1);
        c.set_attribute("score", (0..100).map(|i| i as f64 / 7.0).collect()).unwrap();
        let back = parse_ply(&encode_ply(&c)).unwrap();
        assert_eq!(back, c);
        let p = sample_cloud(2, 10, 2);
        assert_eq!(parse_ply(&encode_ply(&p)).unwrap(), p);
    }

    #[test]
    fn ascii_ply_with_extra_elements() {
        let text = "ply\r\nformat ascii 1.0\r\ncomment made by hand\r\nelement vertex 2\r\nproperty float x\r\nproperty float y\r\nproperty float z\r\nproperty uchar red\r\nelement face 1\r\nproperty list uchar int vertex_indices\r\nend_header\r\n0 0 1 255\r\n1.5 2 3 0\r\n3 0 1 1\r\n";
        let c = parse_ply(text.as_bytes()).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.positions[1], Vector3::new(1.5, 2.0, 3.0));
        assert_eq!(c.attribute("red").unwrap(), &[255.0, 0.0]);
    }

    #[test]
    fn ply_errors() {
        assert!(parse_ply(b"ply\nformat binary_big_endian 1.0\nend_header\n").is_err());
        let short = "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nend_header\n1 2\n";
        assert!(parse_ply(short.as_bytes()).is_err());
        let bad = "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nend_header\n1 q\n";
        let err = parse_ply(bad.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("line 7"), "{err}");
    }

    #[test]
    fn colormap_behavior() {
        for cm in [Colormap::Coolwarm, Colormap::Jet, Colormap::GreenRed] {
            let colors = colors_for(&[3.0, 3.0, 3.0], cm).unwrap();
            assert!(colors.iter().all(|&c| c == cm.color_at(0.5)));
            assert_eq!(cm.color_at(0.0), cm.table()[0]);
            assert_eq!(cm.color_at(1.0), cm.table()[255]);
        }
        let gr = colors_for(&[0.0, 1.0], Colormap::GreenRed).unwrap();
        assert_eq!(gr, vec![[0, 255, 0], [255, 0, 0]]);
        let t = normalize_scalars(&[0.1, 0.5, 0.7, 2.0]).unwrap();
        let idx: Vec<f64> = t.iter().map(|&t| lookup_position(t)).collect();
        assert!(idx.windows(2).all(|w| w[0] <= w[1]));
        let mut cloud = sample_cloud(3, 3, 4);
        assert!(matches!(
            encode_ply_colored(&cloud, "nope", Colormap::Jet),
            Err(LitsError::MissingAttribute(_))
        ));
        cloud.set_attribute("s", vec![0.0, 1.0, 2.0]).unwrap();
        let text = encode_ply_colored(&cloud, "s", Colormap::Jet).unwrap();
        let back = parse_ply(text.as_bytes()).unwrap();
        assert_eq!(back.attribute("s").unwrap(), &[0.0, 1.0, 2.0]);
    }

    #[test]
    fn collinear_radius_query() {
        let c = PointCloud::new(
            3,
            vec![Vector3::zeros(), Vector3::new(1.0, 0.0, 0.0), Vector3::new(2.0, 0.0, 0.0)],
        )
        .unwrap();
        let idx = SpatialIndex::build(&c);
        let n = idx.query_radius(&c.positions[1], 5.0).unwrap();
        assert_eq!(n.indices, vec![0, 2]);
        assert_eq!(n.r_q, 1.0);
        let nn = idx.query_knn(&c.positions[0], 1).unwrap();
        assert_eq!(nn.indices, vec![1]);
        assert!(idx.query_knn(&c.positions[0], 3).is_err());
    }

    #[test]
    fn ties_break_by_index() {
        let pts = vec![
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(-1.0, 0.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
            Vector3::zeros(),
        ];
        let idx = SpatialIndex::build(&PointCloud::new(3, pts).unwrap());
        assert_eq!(idx.query_knn(&Vector3::zeros(), 2).unwrap().indices, vec![0, 1]);
    }

    #[test]
    fn index_matches_linear_scan() {
        let c = sample_cloud(3, 2000, 7);
        let idx = SpatialIndex::build(&c);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for q in 0..500 {
            let p = if q % 2 == 0 {
                c.positions[rng.random_range(0..c.len())]
            } else {
                Vector3::new(rng.random_range(-1.2..1.2), rng.random_range(-1.2..1.2), rng.random_range(-1.2..1.2))
            };
            let r = rng.random_range(0.0..0.4);
            assert_eq!(idx.query_radius(&p, r).unwrap(), linear_radius(&c.positions, &p, r));
            let k = rng.random_range(1..40);
            assert_eq!(idx.query_knn(&p, k).unwrap(), linear_knn(&c.positions, &p, k));
        }
    }
}
