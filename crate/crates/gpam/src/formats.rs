//! On-disk formats: the binary field image, CSV tables, JSON documents,
//! and trajectory directories.
//!
//! A field file is a 16 byte header (magic `GPF1`, grid side as little
//! endian u32, a reserved u32, four padding bytes) followed by the n*n
//! samples as little endian f64 in row-major order.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::fields::{Field, FieldError, Grid2D};
use crate::solver::Trajectory;

pub const FIELD_MAGIC: [u8; 4] = *b"GPF1";
const HEADER_LEN: usize = 16;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a field file: bad magic")]
    BadMagic,
    #[error("field file truncated: expected {expected} data bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

pub fn write_field(path: &Path, field: &Field) -> Result<(), FormatError> {
    let mut out = BufWriter::new(File::create(path)?);
    let mut header = [0u8; HEADER_LEN];
    header[..4].copy_from_slice(&FIELD_MAGIC);
    header[4..8].copy_from_slice(&(field.n() as u32).to_le_bytes());
    out.write_all(&header)?;
    for v in field.as_slice() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<Field, FormatError> {
    let mut input = BufReader::new(File::open(path)?);
    let mut header = [0u8; HEADER_LEN];
    input.read_exact(&mut header).map_err(|e| {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            FormatError::BadMagic
        } else {
            FormatError::Io(e)
        }
    })?;
    if header[..4] != FIELD_MAGIC {
        return Err(FormatError::BadMagic);
    }
    let n = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let grid = Grid2D::new(n)?;
    let mut data = vec![0.0f64; n * n];
    let mut buf = [0u8; 8];
    for (i, slot) in data.iter_mut().enumerate() {
        input.read_exact(&mut buf).map_err(|e| {
            if e.kind() == io::ErrorKind::UnexpectedEof {
                FormatError::Truncated {
                    expected: 8 * n * n,
                    found: 8 * i,
                }
            } else {
                FormatError::Io(e)
            }
        })?;
        *slot = f64::from_le_bytes(buf);
    }
    Ok(Field::from_vec(grid, data))
}

/// CSV export with one `x1,x2,value` row per grid node.
pub fn write_field_csv(path: &Path, field: &Field) -> Result<(), FormatError> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "x1,x2,value")?;
    let grid = field.grid();
    let n = field.n();
    for i in 0..n {
        let x1 = grid.coord(i);
        for j in 0..n {
            writeln!(out, "{x1},{},{}", grid.coord(j), field.get(i, j))?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), FormatError> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Sidecar document describing a saved trajectory directory.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryManifest {
    pub n: usize,
    pub dt: f64,
    pub times: Vec<f64>,
    pub frames: Vec<String>,
    pub blowup: Option<f64>,
    pub params: Vec<(String, String)>,
}

/// Writes every saved frame as `frame_XXXX.gpf` plus `manifest.json`.
pub fn write_trajectory(
    dir: &Path,
    traj: &Trajectory,
    params: Vec<(String, String)>,
) -> Result<TrajectoryManifest, FormatError> {
    fs::create_dir_all(dir)?;
    let mut frames = Vec::with_capacity(traj.frames().len());
    for (k, frame) in traj.frames().iter().enumerate() {
        let name = format!("frame_{k:04}.gpf");
        write_field(&dir.join(&name), frame)?;
        frames.push(name);
    }
    let manifest = TrajectoryManifest {
        n: traj.frames().first().map_or(0, Field::n),
        dt: traj.dt(),
        times: traj.times().to_vec(),
        frames,
        blowup: traj.blowup(),
        params,
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

/// Resolves the output directory: the `GPAM_OUT` environment variable
/// wins over the configured directory, which wins over the working
/// directory.
pub fn output_dir(configured: Option<&Path>) -> PathBuf {
    if let Ok(env) = std::env::var("GPAM_OUT") {
        if !env.is_empty() {
            return PathBuf::from(env);
        }
    }
    configured.map_or_else(|| PathBuf::from("."), Path::to_path_buf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::white_noise;

    #[test]
    fn field_files_round_trip_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid2D::new(32).unwrap();
        let f = white_noise(grid, 99);
        let path = dir.path().join("f.gpf");
        write_field(&path, &f).unwrap();
        let g = read_field(&path).unwrap();
        assert_eq!(f.as_slice(), g.as_slice());
        let bytes = fs::read(&path).unwrap();
        assert_eq!(bytes.len(), 16 + 8 * 32 * 32);
        assert_eq!(&bytes[..4], b"GPF1");
    }

    #[test]
    fn bad_magic_and_truncation_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.gpf");
        fs::write(&path, b"NOPE0000000000000000").unwrap();
        assert!(matches!(read_field(&path), Err(FormatError::BadMagic)));
        let mut ok = Vec::new();
        ok.extend_from_slice(b"GPF1");
        ok.extend_from_slice(&16u32.to_le_bytes());
        ok.extend_from_slice(&[0u8; 8]);
        ok.extend_from_slice(&[0u8; 24]);
        fs::write(&path, &ok).unwrap();
        assert!(matches!(
            read_field(&path),
            Err(FormatError::Truncated { .. })
        ));
    }

    #[test]
    fn csv_export_lists_every_node() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid2D::new(16).unwrap();
        let f = Field::from_fn(grid, |x, y| x + 10.0 * y);
        let path = dir.path().join("f.csv");
        write_field_csv(&path, &f).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 256);
        assert_eq!(lines[0], "x1,x2,value");
        assert!(lines[1].starts_with("0,0,"));
    }

    #[test]
    fn trajectory_directories_carry_a_manifest() {
        use crate::fields::Fft2;
        use crate::solver::{solve_gpam, Nonlinearity, PdeConfig};
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid2D::new(16).unwrap();
        let fft = Fft2::new(grid);
        let xi = Field::constant(grid, 0.5);
        let cfg = PdeConfig::new(Field::zeros(grid), 0.5, 0.0, 1e-2, 0.1).unwrap();
        let traj = solve_gpam(&fft, &cfg, Nonlinearity::One, &xi).unwrap();
        let man = write_trajectory(dir.path(), &traj, vec![("g".into(), "1".into())]).unwrap();
        assert_eq!(man.frames.len(), traj.frames().len());
        assert!(dir.path().join("manifest.json").exists());
        assert!(dir.path().join(&man.frames[0]).exists());
        let back = read_field(&dir.path().join(man.frames.last().unwrap())).unwrap();
        assert_eq!(back.as_slice(), traj.last().as_slice());
    }

    #[test]
    fn environment_variable_wins_for_output_dir() {
        std::env::remove_var("GPAM_OUT");
        assert_eq!(output_dir(None), PathBuf::from("."));
        assert_eq!(
            output_dir(Some(Path::new("/tmp/x"))),
            PathBuf::from("/tmp/x")
        );
        std::env::set_var("GPAM_OUT", "/tmp/override");
        assert_eq!(
            output_dir(Some(Path::new("/tmp/x"))),
            PathBuf::from("/tmp/override")
        );
        std::env::remove_var("GPAM_OUT");
    }
}
