//! Plain-text mesh interchange format.
//!
//! ```text
//! DSCMESH 1
//! VERTICES <n>
//! <x> <y> <z>            (n lines)
//! CELLS <m>
//! <v0> ... <v7>          (m lines, canonical corner order)
//! PATCHES <k>
//! <name> <count>         (k blocks, each followed by)
//! <cell> <face>          (count lines)
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Floats are written
//! in shortest round-trip form so a write/read cycle is lossless.

use std::fmt::Write as _;
use std::path::Path;

use super::cell::Point3;
use super::topology::HexMesh;
use crate::error::{DscError, Result};

pub fn write_mesh_string(mesh: &HexMesh) -> String {
    let mut out = String::new();
    out.push_str("DSCMESH 1\n");
    let _ = writeln!(out, "VERTICES {}", mesh.vertices.len());
    for v in &mesh.vertices {
        let _ = writeln!(out, "{} {} {}", v.x, v.y, v.z);
    }
    let _ = writeln!(out, "CELLS {}", mesh.cells.len());
    for c in &mesh.cells {
        let line: Vec<String> = c.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    let _ = writeln!(out, "PATCHES {}", mesh.patches.len());
    for (p, name) in mesh.patches.iter().enumerate() {
        let faces: Vec<_> = mesh
            .face_tags
            .iter()
            .filter(|(_, &tp)| tp == p)
            .map(|(&cf, _)| cf)
            .collect();
        let _ = writeln!(out, "{} {}", name, faces.len());
        for (c, f) in faces {
            let _ = writeln!(out, "{c} {f}");
        }
    }
    out
}

pub fn write_mesh(mesh: &HexMesh, path: &Path) -> Result<()> {
    std::fs::write(path, write_mesh_string(mesh))?;
    Ok(())
}

pub fn read_mesh(path: &Path) -> Result<HexMesh> {
    let text = std::fs::read_to_string(path)?;
    parse_mesh(&text, path)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    path: &'a Path,
    line: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, msg: impl Into<String>) -> DscError {
        DscError::MeshFormat {
            path: self.path.to_path_buf(),
            line: self.line,
            msg: msg.into(),
        }
    }

    fn next_tokens(&mut self) -> Result<Vec<&'a str>> {
        for (n, l) in self.inner.by_ref() {
            self.line = n + 1;
            let l = l.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            return Ok(l.split_whitespace().collect());
        }
        Err(self.err("unexpected end of file"))
    }

    fn header(&mut self, key: &str) -> Result<usize> {
        let t = self.next_tokens()?;
        match t.as_slice() {
            [k, n] if *k == key => n.parse().map_err(|_| self.err(format!("bad {key} count '{n}'"))),
            _ => Err(self.err(format!("expected '{key} <count>'"))),
        }
    }

    fn numbers<T: std::str::FromStr>(&mut self, count: usize) -> Result<Vec<T>> {
        let t = self.next_tokens()?;
        if t.len() != count {
            return Err(self.err(format!("expected {count} values, found {}", t.len())));
        }
        t.iter()
            .map(|s| s.parse().map_err(|_| self.err(format!("bad number '{s}'"))))
            .collect()
    }
}

pub fn parse_mesh(text: &str, path: &Path) -> Result<HexMesh> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        path,
        line: 0,
    };
    let magic = lines.next_tokens()?;
    if magic != ["DSCMESH", "1"] {
        return Err(lines.err("missing 'DSCMESH 1' header"));
    }
    let nv = lines.header("VERTICES")?;
    let mut mesh = HexMesh::default();
    for _ in 0..nv {
        let xyz: Vec<f64> = lines.numbers(3)?;
        if xyz.iter().any(|x| !x.is_finite()) {
            return Err(lines.err("non-finite coordinate"));
        }
        mesh.vertices.push(Point3::new(xyz[0], xyz[1], xyz[2]));
    }
    let nc = lines.header("CELLS")?;
    for _ in 0..nc {
        let ids: Vec<usize> = lines.numbers(8)?;
        mesh.cells.push(std::array::from_fn(|i| ids[i]));
    }
    let np = lines.header("PATCHES")?;
    for p in 0..np {
        let t = lines.next_tokens()?;
        let [name, count] = t.as_slice() else {
            return Err(lines.err("expected '<patch name> <face count>'"));
        };
        let count: usize = count
            .parse()
            .map_err(|_| lines.err(format!("bad face count '{count}'")))?;
        mesh.patches.push(name.to_string());
        for _ in 0..count {
            let cf: Vec<usize> = lines.numbers(2)?;
            if mesh.face_tags.insert((cf[0], cf[1]), p).is_some() {
                return Err(lines.err(format!("face ({}, {}) tagged twice", cf[0], cf[1])));
            }
        }
    }
    mesh.validate_indices()?;
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hexmesh::generate::gen_annulus;

    #[test]
    fn write_then_parse_is_lossless() {
        let m = gen_annulus([2, 8, 2], 0.05, 0.115, 0.2).unwrap();
        let text = write_mesh_string(&m);
        let back = parse_mesh(&text, Path::new("mem")).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn reports_line_numbers() {
        let text = "DSCMESH 1\nVERTICES 1\n0 0 x\n";
        match parse_mesh(text, Path::new("bad.mesh")) {
            Err(DscError::MeshFormat { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_out_of_range_vertex() {
        let text = "DSCMESH 1\nVERTICES 1\n0 0 0\nCELLS 1\n0 1 2 3 4 5 6 7\nPATCHES 0\n";
        assert!(parse_mesh(text, Path::new("m")).is_err());
    }
}
