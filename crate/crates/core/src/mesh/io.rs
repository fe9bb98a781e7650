//! Line-oriented mesh text format.
//!
//! ```text
//! mesh2d <nv> <nt> <nb> <ns>
//! v <x> <y>          (nv lines)
//! t <i> <j> <k>      (nt lines)
//! b <i> <j> <tag>    (nb lines)
//! s <p> <q>          (ns lines)
//! ```
//!
//! Indices are 0-based; reals carry 17 significant digits so that a
//! write/read cycle is bit-exact.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{holdall_radius_for, BoundaryEdge, Mesh};
use crate::error::{Error, Result};

pub(crate) fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_mesh(mesh: &Mesh, mut w: impl Write) -> Result<()> {
    writeln!(
        w,
        "mesh2d {} {} {} {}",
        mesh.n_vertices(),
        mesh.n_triangles(),
        mesh.boundary_edges().len(),
        mesh.seams().len()
    )?;
    for p in mesh.vertices() {
        writeln!(w, "v {} {}", fmt_real(p[0]), fmt_real(p[1]))?;
    }
    for t in mesh.triangles() {
        writeln!(w, "t {} {} {}", t[0], t[1], t[2])?;
    }
    for e in mesh.boundary_edges() {
        writeln!(w, "b {} {} {}", e.a, e.b, e.tag)?;
    }
    for (p, q) in mesh.seams() {
        writeln!(w, "s {p} {q}")?;
    }
    Ok(())
}

pub fn write_mesh_file(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_mesh(mesh, &mut w)?;
    w.flush()?;
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_record(&mut self, expect: &str) -> Result<Vec<String>> {
        loop {
            self.line += 1;
            let raw = match self.inner.next() {
                Some(l) => l?,
                None => {
                    return Err(Error::Parse {
                        line: self.line,
                        what: format!("unexpected end of file, expected `{expect}` record"),
                    })
                }
            };
            let fields: Vec<String> = raw.split_whitespace().map(str::to_owned).collect();
            if fields.is_empty() {
                continue;
            }
            if fields[0] != expect {
                return Err(Error::Parse {
                    line: self.line,
                    what: format!("expected `{expect}` record, found `{}`", fields[0]),
                });
            }
            return Ok(fields);
        }
    }

    fn parse<T: std::str::FromStr>(&self, s: &str) -> Result<T> {
        s.parse().map_err(|_| Error::Parse {
            line: self.line,
            what: format!("cannot parse `{s}`"),
        })
    }

    fn arity(&self, fields: &[String], n: usize) -> Result<()> {
        if fields.len() != n {
            return Err(Error::Parse {
                line: self.line,
                what: format!("expected {} fields, found {}", n, fields.len()),
            });
        }
        Ok(())
    }
}

pub fn read_mesh(r: impl BufRead) -> Result<Mesh> {
    let mut lines = Lines {
        inner: r.lines(),
        line: 0,
    };
    let head = lines.next_record("mesh2d")?;
    lines.arity(&head, 5)?;
    let nv: usize = lines.parse(&head[1])?;
    let nt: usize = lines.parse(&head[2])?;
    let nb: usize = lines.parse(&head[3])?;
    let ns: usize = lines.parse(&head[4])?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let f = lines.next_record("v")?;
        lines.arity(&f, 3)?;
        vertices.push([lines.parse(&f[1])?, lines.parse(&f[2])?]);
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let f = lines.next_record("t")?;
        lines.arity(&f, 4)?;
        triangles.push([
            lines.parse(&f[1])?,
            lines.parse(&f[2])?,
            lines.parse(&f[3])?,
        ]);
    }
    let mut boundary = Vec::with_capacity(nb);
    for _ in 0..nb {
        let f = lines.next_record("b")?;
        lines.arity(&f, 4)?;
        boundary.push(BoundaryEdge {
            a: lines.parse(&f[1])?,
            b: lines.parse(&f[2])?,
            tag: f[3].parse()?,
        });
    }
    let mut seams = Vec::with_capacity(ns);
    for _ in 0..ns {
        let f = lines.next_record("s")?;
        lines.arity(&f, 3)?;
        seams.push((lines.parse(&f[1])?, lines.parse(&f[2])?));
    }
    let radius = holdall_radius_for(&vertices);
    Mesh::new(vertices, triangles, boundary, seams, radius)
}

pub fn read_mesh_file(path: impl AsRef<Path>) -> Result<Mesh> {
    read_mesh(BufReader::new(File::open(path)?))
}
