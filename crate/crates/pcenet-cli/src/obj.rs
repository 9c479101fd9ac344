//! Wavefront OBJ export: one `v` and one `vn` line per element in
//! row-major order and one quad face per grid cell, counter-clockwise in
//! grid orientation, with 1-based `v//vn` indices. Output is
//! deterministic: shortest-round-trip number formatting and LF endings.

use std::io::Write;

use pcenet::net::NetPatch;

pub fn write_obj<W: Write>(patch: &NetPatch, out: &mut W) -> std::io::Result<()> {
    for j in 0..patch.rows() {
        for i in 0..patch.cols() {
            let p = patch.get(i, j).point();
            writeln!(out, "v {} {} {}", p.x, p.y, p.z)?;
        }
    }
    for j in 0..patch.rows() {
        for i in 0..patch.cols() {
            let n = patch.get(i, j).normal();
            writeln!(out, "vn {} {} {}", n.x, n.y, n.z)?;
        }
    }
    let idx = |i: usize, j: usize| 1 + j * patch.cols() + i;
    for j in 0..patch.rows().saturating_sub(1) {
        for i in 0..patch.cols().saturating_sub(1) {
            let a = idx(i, j);
            let b = idx(i + 1, j);
            let c = idx(i + 1, j + 1);
            let d = idx(i, j + 1);
            writeln!(out, "f {a}//{a} {b}//{b} {c}//{c} {d}//{d}")?;
        }
    }
    Ok(())
}

pub fn export_obj(patch: &NetPatch, path: &std::path::Path) -> std::io::Result<()> {
    let mut buf = Vec::new();
    write_obj(patch, &mut buf)?;
    std::fs::write(path, buf)
}
