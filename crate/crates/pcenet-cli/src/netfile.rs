//! JSON net files: a grid header plus one record per contact element.
//!
//! Numbers are written with Rust's shortest-round-trip formatting, so a
//! load/save cycle reproduces every coordinate bit for bit. On load the
//! grid must be fully and uniquely indexed and the normals unit length
//! within 1e-9.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use pcenet::net::{ContactElement, NetPatch};

#[derive(Debug, Error)]
pub enum NetFileError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("element count {found} does not match rows*cols = {expected}")]
    CountMismatch { expected: usize, found: usize },
    #[error("duplicate or out-of-range grid index ({0}, {1})")]
    BadIndex(usize, usize),
    #[error("normal at ({0}, {1}) is not unit length (|n| = {2})")]
    NotUnit(usize, usize, f64),
    #[error("net error: {0}")]
    Net(#[from] pcenet::net::NetError),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NetFileElement {
    pub i: usize,
    pub j: usize,
    pub point: [f64; 3],
    pub normal: [f64; 3],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NetFile {
    pub rows: usize,
    pub cols: usize,
    pub elements: Vec<NetFileElement>,
}

impl NetFile {
    pub fn from_patch(patch: &NetPatch) -> NetFile {
        let mut elements = Vec::with_capacity(patch.rows() * patch.cols());
        for j in 0..patch.rows() {
            for i in 0..patch.cols() {
                let e = patch.get(i, j);
                elements.push(NetFileElement {
                    i,
                    j,
                    point: [e.point().x, e.point().y, e.point().z],
                    normal: [e.normal().x, e.normal().y, e.normal().z],
                });
            }
        }
        NetFile {
            rows: patch.rows(),
            cols: patch.cols(),
            elements,
        }
    }

    pub fn into_patch(&self) -> Result<NetPatch, NetFileError> {
        let expected = self.rows * self.cols;
        if self.elements.len() != expected {
            return Err(NetFileError::CountMismatch {
                expected,
                found: self.elements.len(),
            });
        }
        let mut seen = vec![false; expected];
        let placeholder = ContactElement::new(Vector3::zeros(), Vector3::z())?;
        let mut grid = vec![placeholder; expected];
        for e in &self.elements {
            if e.i >= self.cols || e.j >= self.rows || seen[e.j * self.cols + e.i] {
                return Err(NetFileError::BadIndex(e.i, e.j));
            }
            seen[e.j * self.cols + e.i] = true;
            let n = Vector3::new(e.normal[0], e.normal[1], e.normal[2]);
            if (n.norm() - 1.0).abs() > 1e-9 {
                return Err(NetFileError::NotUnit(e.i, e.j, n.norm()));
            }
            grid[e.j * self.cols + e.i] =
                ContactElement::new(Vector3::new(e.point[0], e.point[1], e.point[2]), n)?;
        }
        Ok(NetPatch::from_elements(self.rows, self.cols, grid)?)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), NetFileError> {
        let mut data = serde_json::to_string_pretty(self)?;
        data.push('\n');
        std::fs::write(path, data)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<NetFile, NetFileError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

pub fn save_patch(patch: &NetPatch, path: &std::path::Path) -> Result<(), NetFileError> {
    NetFile::from_patch(patch).save(path)
}

pub fn load_patch(path: &std::path::Path) -> Result<NetPatch, NetFileError> {
    NetFile::load(path)?.into_patch()
}
