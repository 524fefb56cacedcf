//! Text exports. Floats are written with `{}`, the shortest representation
//! that parses back to the same value.

use std::io::{self, Write};

use crate::geometry::{HelicoidMesh, ProfileCurve};
use crate::orbit::Orbit;
use crate::phase::{NullclineCurve, PhaseModel};

fn csv_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

fn record<W: Write>(w: &mut csv::Writer<W>, fields: &[String]) -> io::Result<()> {
    w.write_record(fields).map_err(csv_err)
}

/// Columns `component_id, x, y, F_residual, regular_flag`.
pub fn write_nullcline_csv<W: Write>(curve: &NullclineCurve, m: &PhaseModel, out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    record(
        &mut w,
        &["component_id", "x", "y", "F_residual", "regular_flag"].map(String::from),
    )?;
    for (k, c) in curve.components.iter().enumerate() {
        for (i, p) in c.points.iter().enumerate() {
            record(
                &mut w,
                &[
                    k.to_string(),
                    p.x.to_string(),
                    p.y.to_string(),
                    m.f_eps(p.x, p.y).to_string(),
                    u8::from(c.regular[i]).to_string(),
                ],
            )?;
        }
    }
    w.flush()
}

/// Columns `s, x, y, z, phi, nu, kappa, H_residual`, then one `# event` comment row per event.
pub fn write_orbit_csv<W: Write>(orbit: &Orbit, mut out: W) -> io::Result<()> {
    {
        let mut w = csv::Writer::from_writer(&mut out);
        record(
            &mut w,
            &["s", "x", "y", "z", "phi", "nu", "kappa", "H_residual"].map(String::from),
        )?;
        let kappas = orbit.kappas();
        for (st, k) in orbit.samples.iter().zip(kappas) {
            record(
                &mut w,
                &[
                    st.s.to_string(),
                    st.x.to_string(),
                    st.y().to_string(),
                    st.z.to_string(),
                    st.phi.to_string(),
                    orbit.nu_at(st).to_string(),
                    k.to_string(),
                    crate::orbit::residual(&orbit.h, orbit.c0, st).to_string(),
                ],
            )?;
        }
        w.flush()?;
    }
    for e in &orbit.events {
        writeln!(
            out,
            "# event,{:?},{},{},{},{},{}",
            e.kind,
            e.s,
            e.state.x,
            e.state.y(),
            e.state.z,
            e.state.phi
        )?;
    }
    Ok(())
}

/// Columns `s, x, z, phi`.
pub fn write_profile_csv<W: Write>(profile: &ProfileCurve, out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    record(&mut w, &["s", "x", "z", "phi"].map(String::from))?;
    for p in &profile.samples {
        record(
            &mut w,
            &[p.s.to_string(), p.x.to_string(), p.z.to_string(), p.phi.to_string()],
        )?;
    }
    w.flush()
}

/// Wavefront OBJ with `v`, `vn` and triangular `f` records.
pub fn write_obj<W: Write>(mesh: &HelicoidMesh, mut out: W) -> io::Result<()> {
    writeln!(out, "# helicoidal surface, c0 = {}", mesh.c0)?;
    writeln!(out, "# rows {} x angles {}", mesh.rows, mesh.n_theta)?;
    for v in &mesh.vertices {
        writeln!(out, "v {} {} {}", v[0], v[1], v[2])?;
    }
    for n in &mesh.normals {
        writeln!(out, "vn {} {} {}", n[0], n[1], n[2])?;
    }
    for t in &mesh.triangles {
        let (a, b, c) = (t[0] + 1, t[1] + 1, t[2] + 1);
        writeln!(out, "f {a}//{a} {b}//{b} {c}//{c}")?;
    }
    Ok(())
}

/// Per-vertex scalars keyed by zero-based vertex index: `vertex, nu, H, residual`.
pub fn write_mesh_scalars_csv<W: Write>(mesh: &HelicoidMesh, out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    record(&mut w, &["vertex", "nu", "H", "residual"].map(String::from))?;
    for i in 0..mesh.vertices.len() {
        record(
            &mut w,
            &[
                i.to_string(),
                mesh.nu[i].to_string(),
                mesh.mean_curvature[i].to_string(),
                mesh.residual[i].to_string(),
            ],
        )?;
    }
    w.flush()
}
