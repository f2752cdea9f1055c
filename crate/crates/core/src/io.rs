//! File formats: legacy ASCII VTK for meshes and surface fields, CSV tables.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::elasticity::SurfaceField;
use crate::error::{Error, Result};
use crate::geometry::{DesignField, DesignGrid, Mesh};
use crate::reliability::CrackHistory;

/// Hexahedral mesh with nodal displacement as point data.
pub fn mesh_vtk(mesh: &Mesh, displacement: Option<&[[f64; 3]]>) -> String {
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\nvoxel mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {} double", mesh.num_nodes());
    for p in &mesh.nodes {
        let _ = writeln!(s, "{} {} {}", p[0], p[1], p[2]);
    }
    let ne = mesh.num_elements();
    let _ = writeln!(s, "CELLS {} {}", ne, 9 * ne);
    for e in &mesh.elements {
        let _ = writeln!(
            s,
            "8 {} {} {} {} {} {} {} {}",
            e[0], e[1], e[2], e[3], e[4], e[5], e[6], e[7]
        );
    }
    let _ = writeln!(s, "CELL_TYPES {ne}");
    for _ in 0..ne {
        s.push_str("12\n");
    }
    if let Some(u) = displacement {
        let _ = writeln!(s, "POINT_DATA {}\nVECTORS displacement double", mesh.num_nodes());
        for v in u {
            let _ = writeln!(s, "{} {} {}", v[0], v[1], v[2]);
        }
    }
    s
}

/// One quad per surface quadrature point with cell data `tag`, `sigma_v`
/// and `inv_n_det` (`1/N_det`, zero where the life is infinite).
pub fn surface_vtk(mesh: &Mesh, field: &SurfaceField) -> String {
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\nboundary surface\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let nq = field.len();
    let _ = writeln!(s, "POINTS {} double", 4 * nq);
    for p in &field.points {
        let conn = &mesh.elements[p.quad.element];
        for l in p.quad.side.local_nodes() {
            let x = mesh.nodes[conn[l]];
            let _ = writeln!(s, "{} {} {}", x[0], x[1], x[2]);
        }
    }
    let _ = writeln!(s, "CELLS {} {}", nq, 5 * nq);
    for q in 0..nq {
        let b = 4 * q;
        let _ = writeln!(s, "4 {} {} {} {}", b, b + 1, b + 2, b + 3);
    }
    let _ = writeln!(s, "CELL_TYPES {nq}");
    for _ in 0..nq {
        s.push_str("9\n");
    }
    let _ = writeln!(s, "CELL_DATA {nq}\nSCALARS tag int 1\nLOOKUP_TABLE default");
    for p in &field.points {
        let _ = writeln!(s, "{}", p.quad.tag.code());
    }
    s.push_str("SCALARS sigma_v double 1\nLOOKUP_TABLE default\n");
    for p in &field.points {
        let _ = writeln!(s, "{}", p.sigma_v);
    }
    s.push_str("SCALARS inv_n_det double 1\nLOOKUP_TABLE default\n");
    for p in &field.points {
        let _ = writeln!(s, "{:e}", p.n_det.reciprocal());
    }
    s
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(csv_error)
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Config(format!("csv: {other:?}")),
    }
}

/// Writes a CSV table with the given header and rows.
pub fn write_csv<R, I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(csv_error)?;
    for r in rows {
        w.write_record(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Formats a float so it reads back bit-identically; infinity as `inf`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:?}")
    }
}

pub fn write_en_curve(path: &Path, table: &[(f64, f64)]) -> Result<()> {
    write_csv(
        path,
        &["N", "eps_a"],
        table.iter().map(|(n, e)| [fmt_f64(*n), fmt_f64(*e)]),
    )
}

/// Crack events, one row each, with a leading history index.
pub fn write_histories(path: &Path, histories: &[CrackHistory]) -> Result<()> {
    let rows = histories.iter().enumerate().flat_map(|(h, hist)| {
        hist.events.iter().map(move |e| {
            [
                h.to_string(),
                fmt_f64(e.t),
                fmt_f64(e.x[0]),
                fmt_f64(e.x[1]),
                fmt_f64(e.x[2]),
                e.face.to_string(),
            ]
        })
    });
    write_csv(path, &["history", "t", "x1", "x2", "x3", "face"], rows)
}

/// Design field as CSV: header `n1,n2,dx,dy`, one line with those values,
/// then `n1` rows of `n2` values (row `i` runs along `x₂` at fixed `x₁`).
/// The grid origin is taken from the basic design on import.
pub fn design_field_csv(field: &DesignField) -> String {
    let g = &field.grid;
    let mut s = format!("n1,n2,dx,dy\n{},{},{},{}\n", g.n1, g.n2, fmt_f64(g.dx), fmt_f64(g.dy));
    for i in 0..g.n1 {
        let row: Vec<String> = (0..g.n2).map(|j| fmt_f64(field.at(i, j))).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn write_design_field(path: &Path, field: &DesignField) -> Result<()> {
    fs::write(path, design_field_csv(field))?;
    Ok(())
}

pub fn read_design_field(path: &Path, origin: [f64; 2]) -> Result<DesignField> {
    let text = fs::read_to_string(path)?;
    parse_design_field(&text, origin).map_err(|reason| Error::Parse {
        path: path.to_path_buf(),
        reason,
    })
}

pub fn parse_design_field(text: &str, origin: [f64; 2]) -> std::result::Result<DesignField, String> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| e.to_string())?.clone();
    if header.iter().map(str::trim).collect::<Vec<_>>() != ["n1", "n2", "dx", "dy"] {
        return Err(format!(
            "expected header n1,n2,dx,dy, found {}",
            header.iter().collect::<Vec<_>>().join(",")
        ));
    }
    let mut records = rdr.into_records();
    let meta = records.next().ok_or("missing grid line")?.map_err(|e| e.to_string())?;
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("{s:?}: {e}"));
    let int = |s: &str| s.trim().parse::<usize>().map_err(|e| format!("{s:?}: {e}"));
    if meta.len() != 4 {
        return Err("grid line needs four fields".into());
    }
    let grid = DesignGrid {
        n1: int(&meta[0])?,
        n2: int(&meta[1])?,
        origin,
        dx: num(&meta[2])?,
        dy: num(&meta[3])?,
    };
    let mut values = Vec::with_capacity(grid.len());
    for (i, rec) in records.enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        if rec.len() != grid.n2 {
            return Err(format!("row {i} has {} values, expected {}", rec.len(), grid.n2));
        }
        for v in rec.iter() {
            values.push(num(v)?);
        }
    }
    if values.len() != grid.len() {
        return Err(format!(
            "expected {} rows, found {}",
            grid.n1,
            values.len() / grid.n2.max(1)
        ));
    }
    Ok(DesignField { grid, values })
}

pub fn write_string(path: &Path, contents: &str) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(contents.as_bytes())?;
    Ok(())
}
