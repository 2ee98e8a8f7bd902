//! CSV emission, the file inventory and the run manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use wtlab_core::wave_model::SpectralGrid;

/// Fixed 17-significant-digit float format shared by every CSV.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Self::F(x)
    }
}

impl From<i32> for Cell {
    fn from(x: i32) -> Self {
        Self::I(x.into())
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Self::I(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Self::I(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Self::S(x.to_string())
    }
}

/// In-memory CSV with a header row.
pub struct Csv {
    columns: usize,
    text: String,
}

impl Csv {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let names: Vec<&str> = header.iter().map(AsRef::as_ref).collect();
        Self { columns: names.len(), text: names.join(",") + "\n" }
    }

    pub fn row(&mut self, cells: impl IntoIterator<Item = Cell>) {
        let mut count = 0;
        for (i, c) in cells.into_iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            match c {
                Cell::F(x) => self.text.push_str(&float(x)),
                Cell::I(x) => write!(self.text, "{x}").expect("write to String"),
                Cell::S(s) => self.text.push_str(&s),
            }
            count += 1;
        }
        assert_eq!(count, self.columns, "CSV row width");
        self.text.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}

/// Lattice-index column names for a grid.
pub fn k_header(grid: &SpectralGrid) -> Vec<&'static str> {
    ["kx", "ky"][..grid.dim()].to_vec()
}

pub fn k_cells(grid: &SpectralGrid, mode: usize) -> Vec<Cell> {
    grid.lattice_index(mode)[..grid.dim()].iter().map(|&i| Cell::from(i)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Output directory that records every file it writes.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<FileEntry>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self { root: root.to_path_buf(), files: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.root.join(name), bytes)?;
        self.files.retain(|f| f.path != name);
        self.files.push(FileEntry { path: name.to_string(), bytes: bytes.len() as u64, sha256: sha256_hex(bytes) });
        Ok(())
    }

    pub fn csv(&mut self, name: &str, csv: Csv) -> Result<()> {
        self.write(name, &csv.into_bytes())
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))
}
