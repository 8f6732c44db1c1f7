//! File formats: ASCII point clouds, polygon-file (PLY) clouds, classified
//! meshes and navigation maps, the flat key=value run configuration, and the
//! pose CSV used for scan replay.
//!
//! Everything is ASCII and deterministic: writing the same data twice yields
//! byte-identical files, and coordinates are printed with 9 significant
//! digits so a round-trip stays within 1e-6.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::geom::{Point3, PointCloud, Pose3, TriangleMesh, UnitQuat, Vec3};
use crate::navmap::NavMap;
use crate::traversability::FaceLabel;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("{path}: empty cloud")]
    EmptyCloud { path: String },
    #[error("{path}: unsupported extension (expected .xyz/.txt/.asc or .ply)")]
    UnsupportedExtension { path: String },
    #[error("mesh has {faces} faces but {labels} labels")]
    LabelCountMismatch { faces: usize, labels: usize },
    #[error("mesh labels reference invalid structure: {0}")]
    Structural(String),
}

fn file_err(path: &Path, source: std::io::Error) -> IoError {
    IoError::File {
        path: path.display().to_string(),
        source,
    }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> IoError {
    IoError::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

fn parse_f64(path: &Path, line: usize, token: &str) -> Result<f64, IoError> {
    let value: f64 = token
        .parse()
        .map_err(|_| parse_err(path, line, format!("not a number: {token:?}")))?;
    if !value.is_finite() {
        return Err(parse_err(path, line, format!("non-finite value: {token}")));
    }
    Ok(value)
}

fn is_ply(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.eq_ignore_ascii_case("ply"))
        .unwrap_or(false)
}

fn is_ascii_cloud(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| {
            let e = e.to_ascii_lowercase();
            e == "xyz" || e == "txt" || e == "asc"
        })
        .unwrap_or(false)
}

// ---------------------------------------------------------------------------
// Point clouds
// ---------------------------------------------------------------------------

pub fn read_cloud(path: &Path) -> Result<PointCloud, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| file_err(path, e))?;
    if is_ply(path) {
        parse_cloud_ply(path, &text)
    } else if is_ascii_cloud(path) {
        parse_cloud_ascii(path, &text)
    } else {
        Err(IoError::UnsupportedExtension {
            path: path.display().to_string(),
        })
    }
}

pub fn write_cloud(path: &Path, cloud: &PointCloud) -> Result<(), IoError> {
    let text = if is_ply(path) {
        cloud_to_ply(cloud)
    } else if is_ascii_cloud(path) {
        cloud_to_ascii(cloud)
    } else {
        return Err(IoError::UnsupportedExtension {
            path: path.display().to_string(),
        });
    };
    std::fs::write(path, text).map_err(|e| file_err(path, e))
}

fn cloud_to_ascii(cloud: &PointCloud) -> String {
    let mut out = String::new();
    match &cloud.intensity {
        Some(ints) => {
            out.push_str("x y z intensity\n");
            for (p, i) in cloud.points.iter().zip(ints.iter()) {
                let _ = writeln!(out, "{:.8e} {:.8e} {:.8e} {:.8e}", p.x, p.y, p.z, i);
            }
        }
        None => {
            out.push_str("x y z\n");
            for p in &cloud.points {
                let _ = writeln!(out, "{:.8e} {:.8e} {:.8e}", p.x, p.y, p.z);
            }
        }
    }
    out
}

fn parse_cloud_ascii(path: &Path, text: &str) -> Result<PointCloud, IoError> {
    let mut columns: Option<usize> = None;
    let mut points = Vec::new();
    let mut intensity: Option<Vec<f64>> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match columns {
            None => {
                // Header line naming the columns.
                match tokens.as_slice() {
                    ["x", "y", "z"] => columns = Some(3),
                    ["x", "y", "z", "intensity"] => {
                        columns = Some(4);
                        intensity = Some(Vec::new());
                    }
                    _ => {
                        return Err(parse_err(
                            path,
                            lineno,
                            format!("expected header `x y z [intensity]`, got {line:?}"),
                        ))
                    }
                }
            }
            Some(n) => {
                if tokens.len() != n {
                    return Err(parse_err(
                        path,
                        lineno,
                        format!("expected {n} columns, got {}", tokens.len()),
                    ));
                }
                let x = parse_f64(path, lineno, tokens[0])?;
                let y = parse_f64(path, lineno, tokens[1])?;
                let z = parse_f64(path, lineno, tokens[2])?;
                points.push(Point3::new(x, y, z));
                if let Some(ref mut ints) = intensity {
                    ints.push(parse_f64(path, lineno, tokens[3])?);
                }
            }
        }
    }
    if points.is_empty() {
        return Err(IoError::EmptyCloud {
            path: path.display().to_string(),
        });
    }
    Ok(PointCloud { points, intensity })
}

fn cloud_to_ply(cloud: &PointCloud) -> String {
    let mut out = String::new();
    out.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(out, "element vertex {}", cloud.len());
    out.push_str("property double x\nproperty double y\nproperty double z\n");
    if cloud.intensity.is_some() {
        out.push_str("property float intensity\n");
    }
    out.push_str("end_header\n");
    match &cloud.intensity {
        Some(ints) => {
            for (p, i) in cloud.points.iter().zip(ints.iter()) {
                let _ = writeln!(out, "{:.8e} {:.8e} {:.8e} {:.8e}", p.x, p.y, p.z, i);
            }
        }
        None => {
            for p in &cloud.points {
                let _ = writeln!(out, "{:.8e} {:.8e} {:.8e}", p.x, p.y, p.z);
            }
        }
    }
    out
}

/// Minimal ASCII PLY header description.
struct PlyHeader {
    /// (element name, count, property names) in declaration order.
    elements: Vec<(String, usize, Vec<String>)>,
    /// 1-based line number of the first data line.
    data_start: usize,
    comments: Vec<String>,
}

fn parse_ply_header(path: &Path, text: &str) -> Result<PlyHeader, IoError> {
    let mut lines = text.lines().enumerate();
    let (_, magic) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty file"))?;
    if magic.trim() != "ply" {
        return Err(parse_err(path, 1, "missing `ply` magic"));
    }
    let mut elements: Vec<(String, usize, Vec<String>)> = Vec::new();
    let mut comments = Vec::new();
    let mut data_start = 0;
    for (idx, raw) in lines {
        let lineno = idx + 1;
        let line = raw.trim();
        if line == "end_header" {
            data_start = lineno + 1;
            break;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            ["format", "ascii", _] => {}
            ["format", other, ..] => {
                return Err(parse_err(path, lineno, format!("unsupported format {other}")))
            }
            ["comment", rest @ ..] => comments.push(rest.join(" ")),
            ["element", name, count] => {
                let count: usize = count
                    .parse()
                    .map_err(|_| parse_err(path, lineno, "bad element count"))?;
                elements.push((name.to_string(), count, Vec::new()));
            }
            ["property", "list", _, _, name] => {
                let elem = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(path, lineno, "property before element"))?;
                elem.2.push(name.to_string());
            }
            ["property", _, name] => {
                let elem = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(path, lineno, "property before element"))?;
                elem.2.push(name.to_string());
            }
            [] => {}
            _ => return Err(parse_err(path, lineno, format!("bad header line {line:?}"))),
        }
    }
    if data_start == 0 {
        return Err(parse_err(path, 1, "missing end_header"));
    }
    Ok(PlyHeader {
        elements,
        data_start,
        comments,
    })
}

fn parse_cloud_ply(path: &Path, text: &str) -> Result<PointCloud, IoError> {
    let header = parse_ply_header(path, text)?;
    let (count, props) = header
        .elements
        .iter()
        .find(|(name, _, _)| name == "vertex")
        .map(|(_, c, p)| (*c, p.clone()))
        .ok_or_else(|| parse_err(path, 1, "no vertex element"))?;
    for required in ["x", "y", "z"] {
        if !props.iter().any(|p| p == required) {
            return Err(parse_err(path, 1, format!("vertex missing property {required}")));
        }
    }
    let col = |name: &str| props.iter().position(|p| p == name);
    let (cx, cy, cz) = (col("x").unwrap(), col("y").unwrap(), col("z").unwrap());
    let ci = col("intensity");
    let mut points = Vec::with_capacity(count);
    let mut intensity = ci.map(|_| Vec::with_capacity(count));
    let data_lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .skip(header.data_start - 1)
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();
    if data_lines.len() < count {
        return Err(parse_err(
            path,
            text.lines().count(),
            format!("expected {count} vertex rows, found {}", data_lines.len()),
        ));
    }
    for &(idx, raw) in data_lines.iter().take(count) {
        let lineno = idx + 1;
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        if tokens.len() != props.len() {
            return Err(parse_err(
                path,
                lineno,
                format!("expected {} columns, got {}", props.len(), tokens.len()),
            ));
        }
        points.push(Point3::new(
            parse_f64(path, lineno, tokens[cx])?,
            parse_f64(path, lineno, tokens[cy])?,
            parse_f64(path, lineno, tokens[cz])?,
        ));
        if let (Some(ref mut ints), Some(c)) = (intensity.as_mut(), ci) {
            ints.push(parse_f64(path, lineno, tokens[c])?);
        }
    }
    if points.is_empty() {
        return Err(IoError::EmptyCloud {
            path: path.display().to_string(),
        });
    }
    Ok(PointCloud { points, intensity })
}

// ---------------------------------------------------------------------------
// Meshes and navigation maps
// ---------------------------------------------------------------------------

/// Writes a classified mesh: vertices carry position, averaged normal, and a
/// traversability flag; faces carry indices and their own flag.
pub fn write_mesh(path: &Path, mesh: &TriangleMesh, labels: &[FaceLabel]) -> Result<(), IoError> {
    if labels.len() != mesh.faces.len() {
        return Err(IoError::LabelCountMismatch {
            faces: mesh.faces.len(),
            labels: labels.len(),
        });
    }
    let (normals, traversable) = crate::traversability::vertex_attributes(mesh, labels)
        .map_err(|e| IoError::Structural(e.to_string()))?;
    let mut out = String::new();
    out.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(out, "element vertex {}", mesh.vertices.len());
    out.push_str(
        "property double x\nproperty double y\nproperty double z\n\
         property double nx\nproperty double ny\nproperty double nz\n\
         property uchar traversable\n",
    );
    let _ = writeln!(out, "element face {}", mesh.faces.len());
    out.push_str("property list uchar int vertex_indices\nproperty uchar traversable\n");
    out.push_str("end_header\n");
    for ((p, n), t) in mesh
        .vertices
        .iter()
        .zip(normals.iter())
        .zip(traversable.iter())
    {
        let _ = writeln!(
            out,
            "{:.8e} {:.8e} {:.8e} {:.8e} {:.8e} {:.8e} {}",
            p.x,
            p.y,
            p.z,
            n.x,
            n.y,
            n.z,
            u8::from(*t)
        );
    }
    for (face, label) in mesh.faces.iter().zip(labels.iter()) {
        let _ = writeln!(
            out,
            "3 {} {} {} {}",
            face[0],
            face[1],
            face[2],
            u8::from(label.traversable)
        );
    }
    std::fs::write(path, out).map_err(|e| file_err(path, e))
}

/// Reads back a mesh written by [`write_mesh`]. Face normals are recomputed
/// from the stored winding; returns per-face traversability flags alongside.
pub fn read_mesh(path: &Path) -> Result<(TriangleMesh, Vec<bool>), IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| file_err(path, e))?;
    let header = parse_ply_header(path, &text)?;
    let vertex = header
        .elements
        .iter()
        .find(|(name, _, _)| name == "vertex")
        .ok_or_else(|| parse_err(path, 1, "no vertex element"))?
        .clone();
    let face = header
        .elements
        .iter()
        .find(|(name, _, _)| name == "face")
        .ok_or_else(|| parse_err(path, 1, "no face element"))?
        .clone();
    let data: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .skip(header.data_start - 1)
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();
    if data.len() < vertex.1 + face.1 {
        return Err(parse_err(path, text.lines().count(), "truncated body"));
    }
    let vprops = &vertex.2;
    let col = |name: &str| -> Result<usize, IoError> {
        vprops
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| parse_err(path, 1, format!("vertex missing property {name}")))
    };
    let (cx, cy, cz) = (col("x")?, col("y")?, col("z")?);
    let mut vertices = Vec::with_capacity(vertex.1);
    for &(idx, raw) in data.iter().take(vertex.1) {
        let lineno = idx + 1;
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        if tokens.len() != vprops.len() {
            return Err(parse_err(path, lineno, "vertex column count mismatch"));
        }
        vertices.push(Point3::new(
            parse_f64(path, lineno, tokens[cx])?,
            parse_f64(path, lineno, tokens[cy])?,
            parse_f64(path, lineno, tokens[cz])?,
        ));
    }
    let mut faces = Vec::with_capacity(face.1);
    let mut face_normals = Vec::with_capacity(face.1);
    let mut face_traversable = Vec::with_capacity(face.1);
    for &(idx, raw) in data.iter().skip(vertex.1).take(face.1) {
        let lineno = idx + 1;
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        if tokens.len() < 4 {
            return Err(parse_err(path, lineno, "short face row"));
        }
        if tokens[0] != "3" {
            return Err(parse_err(path, lineno, "only triangles are supported"));
        }
        let mut ids = [0usize; 3];
        for (k, token) in tokens[1..4].iter().enumerate() {
            let v: usize = token
                .parse()
                .map_err(|_| parse_err(path, lineno, format!("bad index {token:?}")))?;
            if v >= vertices.len() {
                return Err(parse_err(path, lineno, format!("index {v} out of range")));
            }
            ids[k] = v;
        }
        let flag = if tokens.len() > 4 {
            match tokens[4] {
                "0" => false,
                "1" => true,
                other => return Err(parse_err(path, lineno, format!("bad flag {other:?}"))),
            }
        } else {
            true
        };
        let (a, b, c) = (vertices[ids[0]], vertices[ids[1]], vertices[ids[2]]);
        let cross = (b - a).cross(&(c - a));
        let norm = cross.norm();
        face_normals.push(if norm > 0.0 { cross / norm } else { Vec3::z() });
        faces.push(ids);
        face_traversable.push(flag);
    }
    Ok((
        TriangleMesh {
            source_index: (0..vertices.len()).collect(),
            vertices,
            faces,
            face_normals,
        },
        face_traversable,
    ))
}

/// Writes the classified point map: vertex records only, no faces. The
/// viewpoint rides along in a header comment.
pub fn write_navmap(path: &Path, map: &NavMap) -> Result<(), IoError> {
    let mut out = String::new();
    out.push_str("ply\nformat ascii 1.0\n");
    let v = map.viewpoint();
    let _ = writeln!(out, "comment viewpoint {:.8e} {:.8e} {:.8e}", v.x, v.y, v.z);
    let _ = writeln!(out, "element vertex {}", map.len());
    out.push_str(
        "property double x\nproperty double y\nproperty double z\n\
         property double nx\nproperty double ny\nproperty double nz\n\
         property uchar traversable\n",
    );
    out.push_str("element face 0\n");
    out.push_str("property list uchar int vertex_indices\nproperty uchar traversable\n");
    out.push_str("end_header\n");
    for ((p, n), t) in map
        .points()
        .iter()
        .zip(map.normals().iter())
        .zip(map.traversable().iter())
    {
        let _ = writeln!(
            out,
            "{:.8e} {:.8e} {:.8e} {:.8e} {:.8e} {:.8e} {}",
            p.x,
            p.y,
            p.z,
            n.x,
            n.y,
            n.z,
            u8::from(*t)
        );
    }
    std::fs::write(path, out).map_err(|e| file_err(path, e))
}

pub fn read_navmap(path: &Path) -> Result<NavMap, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| file_err(path, e))?;
    let header = parse_ply_header(path, &text)?;
    let mut viewpoint = Point3::origin();
    for comment in &header.comments {
        let tokens: Vec<&str> = comment.split_whitespace().collect();
        if tokens.len() == 4 && tokens[0] == "viewpoint" {
            viewpoint = Point3::new(
                parse_f64(path, 1, tokens[1])?,
                parse_f64(path, 1, tokens[2])?,
                parse_f64(path, 1, tokens[3])?,
            );
        }
    }
    let (count, props) = header
        .elements
        .iter()
        .find(|(name, _, _)| name == "vertex")
        .map(|(_, c, p)| (*c, p.clone()))
        .ok_or_else(|| parse_err(path, 1, "no vertex element"))?;
    let col = |name: &str| -> Result<usize, IoError> {
        props
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| parse_err(path, 1, format!("vertex missing property {name}")))
    };
    let (cx, cy, cz) = (col("x")?, col("y")?, col("z")?);
    let (nx, ny, nz) = (col("nx")?, col("ny")?, col("nz")?);
    let ct = col("traversable")?;
    let mut points = Vec::with_capacity(count);
    let mut normals = Vec::with_capacity(count);
    let mut traversable = Vec::with_capacity(count);
    for (idx, raw) in text
        .lines()
        .enumerate()
        .skip(header.data_start - 1)
        .filter(|(_, l)| !l.trim().is_empty())
        .take(count)
    {
        let lineno = idx + 1;
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        if tokens.len() != props.len() {
            return Err(parse_err(path, lineno, "vertex column count mismatch"));
        }
        points.push(Point3::new(
            parse_f64(path, lineno, tokens[cx])?,
            parse_f64(path, lineno, tokens[cy])?,
            parse_f64(path, lineno, tokens[cz])?,
        ));
        normals.push(Vec3::new(
            parse_f64(path, lineno, tokens[nx])?,
            parse_f64(path, lineno, tokens[ny])?,
            parse_f64(path, lineno, tokens[nz])?,
        ));
        traversable.push(match tokens[ct] {
            "0" => false,
            "1" => true,
            other => return Err(parse_err(path, lineno, format!("bad flag {other:?}"))),
        });
    }
    if points.len() < count {
        return Err(parse_err(path, text.lines().count(), "truncated body"));
    }
    let n = points.len();
    Ok(NavMap::new(
        points,
        normals,
        traversable,
        (0..n).collect(),
        viewpoint,
    ))
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

/// Pipeline parameters as read from a flat `key = value` file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub gamma: f64,
    pub alpha_max_deg: f64,
    pub dh_max: f64,
    pub voxel_size: f64,
    pub min_points_per_voxel: usize,
    pub buffer_capacity: usize,
    pub viewpoint: Point3,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            gamma: -0.03,
            alpha_max_deg: 30.0,
            dh_max: 0.25,
            voxel_size: 0.2,
            min_points_per_voxel: 2,
            buffer_capacity: 25,
            viewpoint: Point3::origin(),
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn to_config_string(&self) -> String {
        format!(
            "gamma = {}\nalpha_max_deg = {}\ndh_max = {}\nvoxel_size = {}\n\
             min_points_per_voxel = {}\nbuffer_capacity = {}\nviewpoint = {},{},{}\nseed = {}\n",
            self.gamma,
            self.alpha_max_deg,
            self.dh_max,
            self.voxel_size,
            self.min_points_per_voxel,
            self.buffer_capacity,
            self.viewpoint.x,
            self.viewpoint.y,
            self.viewpoint.z,
            self.seed
        )
    }
}

pub fn read_config(path: &Path) -> Result<RunConfig, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| file_err(path, e))?;
    parse_config(path, &text)
}

pub fn parse_config(path: &Path, text: &str) -> Result<RunConfig, IoError> {
    let mut cfg = RunConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(path, lineno, format!("expected key = value, got {line:?}")))?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "gamma" => cfg.gamma = parse_f64(path, lineno, value)?,
            "alpha_max_deg" => cfg.alpha_max_deg = parse_f64(path, lineno, value)?,
            "dh_max" => cfg.dh_max = parse_f64(path, lineno, value)?,
            "voxel_size" => cfg.voxel_size = parse_f64(path, lineno, value)?,
            "min_points_per_voxel" => {
                cfg.min_points_per_voxel = value
                    .parse()
                    .map_err(|_| parse_err(path, lineno, format!("bad integer {value:?}")))?
            }
            "buffer_capacity" => {
                cfg.buffer_capacity = value
                    .parse()
                    .map_err(|_| parse_err(path, lineno, format!("bad integer {value:?}")))?
            }
            "viewpoint" => {
                let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                if parts.len() != 3 {
                    return Err(parse_err(path, lineno, "viewpoint needs x,y,z"));
                }
                cfg.viewpoint = Point3::new(
                    parse_f64(path, lineno, parts[0])?,
                    parse_f64(path, lineno, parts[1])?,
                    parse_f64(path, lineno, parts[2])?,
                );
            }
            "seed" => {
                cfg.seed = value
                    .parse()
                    .map_err(|_| parse_err(path, lineno, format!("bad integer {value:?}")))?
            }
            _ => return Err(parse_err(path, lineno, format!("unknown key {key:?}"))),
        }
    }
    Ok(cfg)
}

pub fn write_config(path: &Path, cfg: &RunConfig) -> Result<(), IoError> {
    std::fs::write(path, cfg.to_config_string()).map_err(|e| file_err(path, e))
}

// ---------------------------------------------------------------------------
// Pose CSV
// ---------------------------------------------------------------------------

/// Reads `timestamp,x,y,z,qw,qx,qy,qz` rows; a leading header line is
/// allowed. Quaternions must be unit within 1e-9.
pub fn read_poses_csv(path: &Path) -> Result<Vec<(f64, Pose3)>, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| file_err(path, e))?;
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if lineno == 1 && line.starts_with("timestamp") {
            continue;
        }
        let tokens: Vec<&str> = line.split(',').map(str::trim).collect();
        if tokens.len() != 8 {
            return Err(parse_err(
                path,
                lineno,
                format!("expected 8 comma-separated fields, got {}", tokens.len()),
            ));
        }
        let values: Vec<f64> = tokens
            .iter()
            .map(|t| parse_f64(path, lineno, t))
            .collect::<Result<_, _>>()?;
        let quat = nalgebra::Quaternion::new(values[4], values[5], values[6], values[7]);
        if (quat.norm() - 1.0).abs() > 1e-9 {
            return Err(parse_err(
                path,
                lineno,
                format!("quaternion norm {} not unit within 1e-9", quat.norm()),
            ));
        }
        let pose = Pose3::from_parts(
            nalgebra::Translation3::new(values[1], values[2], values[3]),
            UnitQuat::from_quaternion(quat),
        );
        out.push((values[0], pose));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traversability::face_labels;

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("ovpc-io-tests");
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn cloud_ascii_round_trip() {
        let cloud = PointCloud::new(
            vec![
                Point3::new(1.0, 2.0, 3.0),
                Point3::new(-0.123456789, 4.5e-3, 1.0e4),
                Point3::new(0.0, 0.0, -1.5),
            ],
            Some(vec![0.5, 0.25, 1.0]),
        )
        .unwrap();
        let path = tmp("roundtrip.xyz");
        write_cloud(&path, &cloud).unwrap();
        let back = read_cloud(&path).unwrap();
        assert_eq!(back.len(), cloud.len());
        for (a, b) in cloud.points.iter().zip(back.points.iter()) {
            assert!((a - b).norm() < 1e-6);
        }
        assert!(back.intensity.is_some());
    }

    #[test]
    fn cloud_ply_round_trip() {
        let cloud = PointCloud::from_points(vec![
            Point3::new(0.1, 0.2, 0.3),
            Point3::new(-9.0, 8.0, 7.0),
        ]);
        let path = tmp("roundtrip.ply");
        write_cloud(&path, &cloud).unwrap();
        let back = read_cloud(&path).unwrap();
        for (a, b) in cloud.points.iter().zip(back.points.iter()) {
            assert!((a - b).norm() < 1e-6);
        }
        assert!(back.intensity.is_none());
    }

    #[test]
    fn short_row_names_the_line() {
        let path = tmp("short.xyz");
        std::fs::write(&path, "x y z\n1 2 3\n4 5\n").unwrap();
        match read_cloud(&path) {
            Err(IoError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn non_numeric_token_names_the_line() {
        let path = tmp("nan.xyz");
        std::fs::write(&path, "x y z\n1 2 3\n1 frog 3\n").unwrap();
        match read_cloud(&path) {
            Err(IoError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_is_rejected() {
        let path = tmp("inf.xyz");
        std::fs::write(&path, "x y z\n1 2 inf\n").unwrap();
        assert!(matches!(read_cloud(&path), Err(IoError::Parse { line: 2, .. })));
    }

    #[test]
    fn empty_file_is_empty_cloud() {
        let path = tmp("empty.xyz");
        std::fs::write(&path, "").unwrap();
        assert!(matches!(read_cloud(&path), Err(IoError::EmptyCloud { .. })));
        let path2 = tmp("header_only.xyz");
        std::fs::write(&path2, "x y z\n").unwrap();
        assert!(matches!(read_cloud(&path2), Err(IoError::EmptyCloud { .. })));
    }

    fn tetra_mesh() -> TriangleMesh {
        let vertices = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.4, 0.4, 1.0),
        ];
        let faces = vec![[0, 1, 3], [1, 2, 3], [2, 0, 3], [0, 2, 1]];
        let face_normals: Vec<Vec3> = faces
            .iter()
            .map(|&[a, b, c]| {
                let n = (vertices[b] - vertices[a]).cross(&(vertices[c] - vertices[a]));
                n.normalize()
            })
            .collect();
        TriangleMesh {
            vertices,
            faces,
            face_normals,
            source_index: vec![0, 1, 2, 3],
        }
    }

    #[test]
    fn mesh_round_trip_preserves_topology_and_flags() {
        let mesh = tetra_mesh();
        let labels = face_labels(
            &mesh,
            &crate::traversability::TraversabilityConfig {
                alpha_max: std::f64::consts::FRAC_PI_2,
                dh_max: 10.0,
            },
        )
        .unwrap();
        let path = tmp("mesh.ply");
        write_mesh(&path, &mesh, &labels).unwrap();
        let (back, flags) = read_mesh(&path).unwrap();
        assert_eq!(back.faces, mesh.faces);
        let report = crate::geom::mesh_topology_check(&back).unwrap();
        assert!(report.is_closed);
        assert_eq!(report.euler_characteristic, 2);
        let expect: Vec<bool> = labels.iter().map(|l| l.traversable).collect();
        assert_eq!(flags, expect);
        // Written file is deterministic.
        let text_a = std::fs::read_to_string(&path).unwrap();
        write_mesh(&path, &mesh, &labels).unwrap();
        let text_b = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text_a, text_b);
    }

    #[test]
    fn mesh_label_mismatch_is_structural() {
        let mesh = tetra_mesh();
        assert!(matches!(
            write_mesh(&tmp("bad.ply"), &mesh, &[]),
            Err(IoError::LabelCountMismatch { .. })
        ));
    }

    #[test]
    fn navmap_round_trip() {
        let map = NavMap::new(
            vec![Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.1)],
            vec![Vec3::z(), Vec3::z()],
            vec![true, false],
            vec![0, 1],
            Point3::new(0.0, 0.0, 1.88),
        );
        let path = tmp("map.ply");
        write_navmap(&path, &map).unwrap();
        let back = read_navmap(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back.traversable(), &[true, false]);
        assert!((back.viewpoint() - Point3::new(0.0, 0.0, 1.88)).norm() < 1e-6);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("element face 0"));
    }

    #[test]
    fn config_round_trip_and_unknown_key() {
        let cfg = RunConfig {
            gamma: -0.02,
            viewpoint: Point3::new(1.0, 2.0, 3.0),
            seed: 42,
            ..RunConfig::default()
        };
        let path = tmp("run.cfg");
        write_config(&path, &cfg).unwrap();
        let back = read_config(&path).unwrap();
        assert_eq!(back, cfg);

        let bad = tmp("bad.cfg");
        std::fs::write(&bad, "gamma = -0.03\nwibble = 3\n").unwrap();
        assert!(matches!(read_config(&bad), Err(IoError::Parse { line: 2, .. })));
    }

    #[test]
    fn poses_csv_parses_and_validates() {
        let path = tmp("poses.csv");
        std::fs::write(
            &path,
            "timestamp,x,y,z,qw,qx,qy,qz\n0.0,1.0,2.0,3.0,1.0,0.0,0.0,0.0\n0.1,0,0,0,0.7071067811865476,0.7071067811865476,0,0\n",
        )
        .unwrap();
        let poses = read_poses_csv(&path).unwrap();
        assert_eq!(poses.len(), 2);
        assert!((poses[0].1.translation.vector - Vec3::new(1.0, 2.0, 3.0)).norm() < 1e-12);

        std::fs::write(&path, "0.0,0,0,0,2.0,0,0,0\n").unwrap();
        assert!(matches!(
            read_poses_csv(&path),
            Err(IoError::Parse { line: 1, .. })
        ));
    }
}
