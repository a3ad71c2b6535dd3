//! Plain-text mesh files and CSV output.
//!
//! Mesh files start with a header line `dim nv ne`, followed by `nv`
//! coordinate lines and `ne` lines of 0-based vertex indices.

use std::io::{BufRead, Write};

use distcurv::curvature::AssembledFunctional;
use distcurv::mesh::{Mesh, PAD};

use crate::error::{Error, Result};
use crate::experiments::LevelResult;

pub fn write_mesh<W: Write>(mesh: &Mesh, mut w: W) -> Result<()> {
    let d = mesh.dim;
    writeln!(w, "{} {} {}", d, mesh.vertices.len(), mesh.num_elements())?;
    for v in &mesh.vertices {
        let coords: Vec<String> = v[..d].iter().map(|c| format!("{c:e}")).collect();
        writeln!(w, "{}", coords.join(" "))?;
    }
    for e in 0..mesh.num_elements() {
        let idx: Vec<String> = mesh.element(e).iter().map(|i| i.to_string()).collect();
        writeln!(w, "{}", idx.join(" "))?;
    }
    Ok(())
}

pub fn read_mesh<R: BufRead>(r: R, path: &str) -> Result<Mesh> {
    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_string(),
        line,
        msg,
    };
    let mut lines = r.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(l) if l.trim().is_empty() => None,
        other => Some((i + 1, other)),
    });
    let mut next = |what: &str| -> Result<(usize, Vec<String>)> {
        match lines.next() {
            Some((n, Ok(l))) => Ok((n, l.split_whitespace().map(str::to_string).collect())),
            Some((_, Err(e))) => Err(e.into()),
            None => Err(err(0, format!("unexpected end of file, expected {what}"))),
        }
    };
    let num = |n: usize, s: &str| s.parse::<usize>().map_err(|e| err(n, format!("`{s}`: {e}")));

    let (n, head) = next("header")?;
    if head.len() != 3 {
        return Err(err(n, "header must be `dim nv ne`".into()));
    }
    let (dim, nv, ne) = (num(n, &head[0])?, num(n, &head[1])?, num(n, &head[2])?);
    if !(2..=3).contains(&dim) {
        return Err(err(n, format!("dimension {dim} is not 2 or 3")));
    }
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (n, f) = next("a vertex")?;
        if f.len() != dim {
            return Err(err(n, format!("expected {dim} coordinates")));
        }
        let mut x = [0.0; 3];
        for (c, s) in x.iter_mut().zip(&f) {
            *c = s.parse().map_err(|e| err(n, format!("`{s}`: {e}")))?;
        }
        vertices.push(x);
    }
    let mut elements = Vec::with_capacity(ne);
    for _ in 0..ne {
        let (n, f) = next("an element")?;
        if f.len() != dim + 1 {
            return Err(err(n, format!("expected {} vertex indices", dim + 1)));
        }
        let mut el = [PAD; 4];
        for (c, s) in el.iter_mut().zip(&f) {
            *c = num(n, s)?;
            if *c >= nv {
                return Err(err(n, format!("vertex index {c} out of range")));
            }
        }
        elements.push(el);
    }
    Ok(Mesh::new(dim, vertices, elements)?)
}

/// Coefficient vector as `dof,value` rows.
pub fn write_coefficients<W: Write>(coeffs: &[f64], w: W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["dof", "value"])?;
    for (i, c) in coeffs.iter().enumerate() {
        csv.write_record([i.to_string(), format!("{c:e}")])?;
    }
    csv.flush()?;
    Ok(())
}

pub fn read_coefficients<R: std::io::Read>(r: R, path: &str) -> Result<Vec<f64>> {
    let mut csv = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for (i, rec) in csv.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let bad = |msg: String| Error::Parse {
            path: path.to_string(),
            line,
            msg,
        };
        let dof: usize = rec.get(0).unwrap_or("").parse().map_err(|e| bad(format!("dof: {e}")))?;
        let val: f64 = rec.get(1).unwrap_or("").parse().map_err(|e| bad(format!("value: {e}")))?;
        if dof != out.len() {
            return Err(bad(format!("expected dof {}, found {dof}", out.len())));
        }
        out.push(val);
    }
    Ok(out)
}

/// Assembled functional as `dof,direction,value` rows.
pub fn write_functional<W: Write>(f: &AssembledFunctional, w: W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["dof", "direction", "value"])?;
    let nd = f.ndirections();
    for (r, d) in f.dofs.iter().enumerate() {
        for c in 0..nd {
            csv.write_record([d.to_string(), c.to_string(), format!("{:e}", f.values[r * nd + c])])?;
        }
    }
    csv.flush()?;
    Ok(())
}

/// Convergence or probe rows. Probe columns appear when any row has them.
pub fn write_results<W: Write>(rows: &[LevelResult], config_hash: &str, w: W) -> Result<()> {
    let probes = rows.iter().any(|r| r.probes.is_some());
    let mut csv = csv::Writer::from_writer(w);
    let mut head = vec!["level", "h", "ndof", "error", "order"];
    if probes {
        head.extend(["F1", "F2", "F3", "gp"]);
    }
    head.push("config");
    csv.write_record(&head)?;
    for r in rows {
        let mut rec = vec![
            r.level.to_string(),
            format!("{:e}", r.h),
            r.ndof.to_string(),
            format!("{:e}", r.error),
            r.order.map_or(String::new(), |o| format!("{o:.4}")),
        ];
        if probes {
            let p = r.probes.unwrap_or([f64::NAN; 3]);
            rec.extend(p.iter().map(|v| format!("{v:e}")));
            rec.push(r.gp.map_or(String::new(), |g| g.to_string()));
        }
        rec.push(config_hash.to_string());
        csv.write_record(&rec)?;
    }
    csv.flush()?;
    Ok(())
}
