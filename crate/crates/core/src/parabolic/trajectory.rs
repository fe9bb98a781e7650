use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::TimeGrid;
use crate::error::{Error, Result};
use crate::fem::{BoundaryCondition, FEField, FunctionSpace, Norms};
use crate::mesh::{read_mesh_file, write_mesh_file};

/// Nodal values of a discrete function of time on a fixed space.
#[derive(Debug, Clone)]
pub struct Trajectory {
    space: FunctionSpace,
    grid: TimeGrid,
    values: Vec<Vec<f64>>,
}

impl PartialEq for Trajectory {
    fn eq(&self, other: &Self) -> bool {
        self.space.same_as(&other.space) && self.grid == other.grid && self.values == other.values
    }
}

impl Trajectory {
    pub fn new(space: FunctionSpace, grid: TimeGrid, values: Vec<Vec<f64>>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.n_nodes() {
            return Err(Error::invalid(format!(
                "trajectory has {} nodes, grid has {}",
                values.len(),
                grid.n_nodes()
            )));
        }
        for (k, v) in values.iter().enumerate() {
            if v.len() != space.n_dofs() {
                return Err(Error::invalid(format!(
                    "node {k} has {} coefficients, space has {} dofs",
                    v.len(),
                    space.n_dofs()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid(format!("node {k} has non-finite values")));
            }
        }
        Ok(Trajectory {
            space,
            grid,
            values,
        })
    }

    pub fn constant(field: &FEField, grid: TimeGrid) -> Self {
        Trajectory {
            space: field.space().clone(),
            grid,
            values: vec![field.values().to_vec(); grid.n_nodes()],
        }
    }

    pub fn zeros(space: FunctionSpace, grid: TimeGrid) -> Self {
        let n = space.n_dofs();
        Trajectory {
            space,
            grid,
            values: vec![vec![0.0; n]; grid.n_nodes()],
        }
    }

    /// Samples `f(t)` at every node.
    pub fn from_fn(space: FunctionSpace, grid: TimeGrid, f: impl Fn(f64) -> FEField) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.n_nodes());
        for t in grid.nodes() {
            let field = f(t);
            if !field.space().same_as(&space) {
                return Err(Error::invalid("field lives on a different space"));
            }
            values.push(field.into_values());
        }
        Trajectory::new(space, grid, values)
    }

    pub fn space(&self) -> &FunctionSpace {
        &self.space
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self, k: usize) -> &[f64] {
        &self.values[k]
    }

    pub fn all_values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn field(&self, k: usize) -> FEField {
        FEField::new(self.space.clone(), self.values[k].clone()).expect("trajectory invariants")
    }

    pub fn last(&self) -> FEField {
        self.field(self.grid.steps)
    }

    /// Piecewise-linear interpolation in time, constant outside the grid.
    pub fn sample_at(&self, t: f64) -> Vec<f64> {
        let g = &self.grid;
        if t <= g.start {
            return self.values[0].clone();
        }
        if t >= g.end() {
            return self.values[g.steps].clone();
        }
        let s = (t - g.start) / g.tau();
        let nearest = s.round();
        if (s - nearest).abs() <= 1e-12 * (1.0 + nearest) {
            return self.values[nearest as usize].clone();
        }
        let k = (s.floor() as usize).min(g.steps - 1);
        let w = s - k as f64;
        self.values[k]
            .iter()
            .zip(&self.values[k + 1])
            .map(|(a, b)| (1.0 - w) * a + w * b)
            .collect()
    }

    /// Piecewise-linear resampling onto another grid.
    pub fn resample(&self, grid: TimeGrid) -> Trajectory {
        let values = grid.nodes().into_iter().map(|t| self.sample_at(t)).collect();
        Trajectory {
            space: self.space.clone(),
            grid,
            values,
        }
    }

    pub fn map(&self, mut f: impl FnMut(usize, &[f64]) -> Vec<f64>) -> Result<Trajectory> {
        let values = self.values.iter().enumerate().map(|(k, v)| f(k, v)).collect();
        Trajectory::new(self.space.clone(), self.grid, values)
    }

    pub fn linear_combination(&self, a: f64, other: &Trajectory, b: f64) -> Result<Trajectory> {
        self.check_compatible(other)?;
        self.map(|k, v| {
            v.iter()
                .zip(&other.values[k])
                .map(|(x, y)| a * x + b * y)
                .collect()
        })
    }

    pub(crate) fn check_compatible(&self, other: &Trajectory) -> Result<()> {
        if !self.space.same_as(&other.space) {
            return Err(Error::invalid("trajectories live on different spaces"));
        }
        if self.grid != other.grid {
            return Err(Error::invalid("trajectories use different time grids"));
        }
        Ok(())
    }

    /// `L²(0,T;V)` norm with the trapezoidal rule.
    pub fn l2_v_norm(&self, norms: &Norms) -> f64 {
        self.grid
            .trapezoid_weights()
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * norms.v_sq(v))
            .sum::<f64>()
            .sqrt()
    }

    /// `ℓ²(V)` norm over the nodes `1..=M` (right rectangle rule).
    pub fn l2_v_norm_rect(&self, norms: &Norms) -> f64 {
        (self.grid.tau() * self.values[1..].iter().map(|v| norms.v_sq(v)).sum::<f64>()).sqrt()
    }

    pub fn sup_h_norm(&self, norms: &Norms) -> f64 {
        self.values
            .iter()
            .map(|v| norms.h_sq(v).sqrt())
            .fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

fn field_file_name(k: usize) -> String {
    format!("u_{k:06}.field")
}

/// Writes `field <nv>` followed by one `f <value>` line per mesh vertex
/// (zero on eliminated Dirichlet vertices).
pub fn write_field(field: &FEField, mut w: impl Write) -> Result<()> {
    let mesh = field.space().mesh();
    writeln!(w, "field {}", mesh.n_vertices())?;
    for v in 0..mesh.n_vertices() {
        writeln!(w, "f {}", crate::mesh::fmt_real(field.vertex_value(v)))?;
    }
    Ok(())
}

pub fn write_field_file(field: &FEField, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_field(field, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read_field(space: &FunctionSpace, r: impl BufRead) -> Result<FEField> {
    let mut lines = r.lines();
    let parse_err = |line: usize, what: &str| Error::Parse {
        line,
        what: what.to_string(),
    };
    let header = lines.next().ok_or_else(|| parse_err(1, "missing header"))??;
    let nv: usize = header
        .strip_prefix("field ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| parse_err(1, "expected `field <nv>`"))?;
    if nv != space.mesh().n_vertices() {
        return Err(parse_err(1, "vertex count does not match the mesh"));
    }
    let mut values = vec![0.0; space.n_dofs()];
    for v in 0..nv {
        let line = lines
            .next()
            .ok_or_else(|| parse_err(v + 2, "unexpected end of file"))??;
        let x: f64 = line
            .strip_prefix("f ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| parse_err(v + 2, "expected `f <value>`"))?;
        if let Some(d) = space.dof(v) {
            values[d] = x;
        }
    }
    FEField::new(space.clone(), values)
}

pub fn read_field_file(space: &FunctionSpace, path: impl AsRef<Path>) -> Result<FEField> {
    read_field(space, BufReader::new(File::open(path)?))
}

/// Writes `mesh.mesh2d`, one field file per node and `traj.txt` whose first
/// line is `traj T M n_dofs`. Returns the written paths.
pub fn write_trajectory(traj: &Trajectory, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mesh_path = dir.join("mesh.mesh2d");
    write_mesh_file(traj.space.mesh(), &mesh_path)?;
    written.push(mesh_path);
    for k in 0..traj.grid.n_nodes() {
        let p = dir.join(field_file_name(k));
        write_field_file(&traj.field(k), &p)?;
        written.push(p);
    }
    let manifest = dir.join("traj.txt");
    let mut w = BufWriter::new(File::create(&manifest)?);
    writeln!(
        w,
        "traj {} {} {}",
        crate::mesh::fmt_real(traj.grid.t_final),
        traj.grid.steps,
        traj.space.n_dofs()
    )?;
    writeln!(w, "start {}", crate::mesh::fmt_real(traj.grid.start))?;
    writeln!(w, "bc {}", bc_name(traj.space.bc()))?;
    w.flush()?;
    written.push(manifest);
    Ok(written)
}

fn bc_name(bc: BoundaryCondition) -> &'static str {
    match bc {
        BoundaryCondition::Dirichlet => "dirichlet",
        BoundaryCondition::Neumann => "neumann",
    }
}

pub fn read_trajectory(dir: impl AsRef<Path>) -> Result<Trajectory> {
    let dir = dir.as_ref();
    let text = fs::read_to_string(dir.join("traj.txt"))?;
    let mut lines = text.lines();
    let err = |line: usize, what: &str| Error::Parse {
        line,
        what: what.to_string(),
    };
    let head: Vec<&str> = lines.next().unwrap_or("").split_whitespace().collect();
    if head.len() != 4 || head[0] != "traj" {
        return Err(err(1, "expected `traj T M n_dofs`"));
    }
    let t_final: f64 = head[1].parse().map_err(|_| err(1, "bad T"))?;
    let steps: usize = head[2].parse().map_err(|_| err(1, "bad M"))?;
    let n_dofs: usize = head[3].parse().map_err(|_| err(1, "bad n_dofs"))?;
    let mut start = 0.0;
    let mut bc = BoundaryCondition::Dirichlet;
    for (i, line) in lines.enumerate() {
        match line.split_once(' ') {
            Some(("start", v)) => start = v.trim().parse().map_err(|_| err(i + 2, "bad start"))?,
            Some(("bc", "dirichlet")) => bc = BoundaryCondition::Dirichlet,
            Some(("bc", "neumann")) => bc = BoundaryCondition::Neumann,
            _ => return Err(err(i + 2, "unknown record")),
        }
    }
    let mesh = read_mesh_file(dir.join("mesh.mesh2d"))?;
    let space = FunctionSpace::new(Arc::new(mesh), bc);
    if space.n_dofs() != n_dofs {
        return Err(err(1, "n_dofs does not match the mesh"));
    }
    let grid = TimeGrid::on_interval(start, t_final, steps)?;
    let mut values = Vec::with_capacity(grid.n_nodes());
    for k in 0..grid.n_nodes() {
        values.push(read_field_file(&space, dir.join(field_file_name(k)))?.into_values());
    }
    Trajectory::new(space, grid, values)
}
