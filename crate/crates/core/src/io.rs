//! CSV readers and writers for IMU streams, trajectories, truth and terrain maps.
//!
//! Values in their native units are written in the shortest form that parses back
//! to the identical `f64`; degree columns are rounded to 15 significant digits.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::DataError;
use crate::eval::{TrajectoryPoint, TruthPoint};
use crate::imu::ImuSample;
use crate::math::Vec3;
use crate::sim::GroundTruth;
use crate::slam::{Cell, TerrainGrid};

pub const IMU_HEADER: [&str; 7] = ["t_s", "gx_rads", "gy_rads", "gz_rads", "ax_ms2", "ay_ms2", "az_ms2"];
pub const TRAJECTORY_HEADER: [&str; 4] = ["t_s", "x_m", "y_m", "heading_deg"];
pub const TRUTH_HEADER: [&str; 6] = ["t_s", "x_m", "y_m", "heading_deg", "bank_deg", "speed_ms"];
pub const MAP_HEADER: [&str; 6] = ["ix", "iy", "center_x", "center_y", "bank_deg", "count"];

/// One row of a truth file.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruthRecord {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    /// rad
    pub heading: f64,
    /// rad
    pub bank: f64,
    pub speed: f64,
}

impl From<&TruthRecord> for TruthPoint {
    fn from(r: &TruthRecord) -> Self {
        TruthPoint { t: r.t, x: r.x, y: r.y, heading: r.heading }
    }
}

/// Shortest decimal that round-trips exactly.
fn exact(v: f64) -> String {
    format!("{v:?}")
}

/// Rounded to 15 significant digits.
fn sig15(v: f64) -> String {
    let rounded: f64 = format!("{v:.14e}").parse().unwrap_or(v);
    format!("{rounded:?}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DataError + '_ {
    move |source| DataError::Io { path: path.to_path_buf(), source }
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), DataError> {
    let name = path.file_name().ok_or_else(|| DataError::Invalid(format!("{} is not a file path", path.display())))?;
    let tmp: PathBuf = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    f.write_all(contents).map_err(io_err(&tmp))?;
    f.sync_all().map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn write_rows(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<(), DataError> {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

/// Parses a headed numeric CSV, calling `row` with the 1-based line number and fields.
fn read_rows<T>(
    path: &Path,
    header: &[&str],
    mut row: impl FnMut(u64, &[f64]) -> Result<T, String>,
) -> Result<Vec<T>, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let found: Vec<String> = reader.headers().map_err(|e| csv_error(path, e))?.iter().map(str::to_owned).collect();
    if found != header {
        return Err(DataError::Malformed {
            path: path.to_path_buf(),
            line: 1,
            message: format!("expected header `{}`, found `{}`", header.join(","), found.join(",")),
        });
    }
    let mut out = Vec::new();
    let mut values = Vec::with_capacity(header.len());
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let malformed = |message: String| DataError::Malformed { path: path.to_path_buf(), line, message };
        values.clear();
        for (i, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| malformed(format!("column `{}`: `{field}` is not a number", header[i])))?;
            if !v.is_finite() {
                return Err(malformed(format!("column `{}` is not finite", header[i])));
            }
            values.push(v);
        }
        out.push(row(line, &values).map_err(malformed)?);
    }
    Ok(out)
}

fn csv_error(path: &Path, e: csv::Error) -> DataError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => DataError::Io { path: path.to_path_buf(), source },
        kind => DataError::Malformed { path: path.to_path_buf(), line, message: format!("{kind:?}") },
    }
}

fn strictly_increasing(prev: &mut Option<f64>, t: f64) -> Result<(), String> {
    if let Some(p) = *prev {
        if t <= p {
            return Err(format!("timestamp {t} does not follow {p}"));
        }
    }
    *prev = Some(t);
    Ok(())
}

pub fn write_imu_csv(path: &Path, samples: &[ImuSample]) -> Result<(), DataError> {
    write_rows(
        path,
        &IMU_HEADER,
        samples.iter().map(|s| {
            let mut r = vec![exact(s.t)];
            r.extend(s.gyro.iter().chain(s.accel.iter()).map(|v| exact(*v)));
            r
        }),
    )
}

pub fn read_imu_csv(path: &Path) -> Result<Vec<ImuSample>, DataError> {
    let mut prev = None;
    read_rows(path, &IMU_HEADER, |_, v| {
        strictly_increasing(&mut prev, v[0])?;
        Ok(ImuSample::new(v[0], Vec3::new(v[1], v[2], v[3]), Vec3::new(v[4], v[5], v[6])))
    })
}

pub fn write_trajectory_csv(path: &Path, points: &[TrajectoryPoint]) -> Result<(), DataError> {
    write_rows(
        path,
        &TRAJECTORY_HEADER,
        points.iter().map(|p| vec![exact(p.t), exact(p.x), exact(p.y), sig15(p.heading.to_degrees())]),
    )
}

pub fn read_trajectory_csv(path: &Path) -> Result<Vec<TrajectoryPoint>, DataError> {
    let mut prev = None;
    read_rows(path, &TRAJECTORY_HEADER, |_, v| {
        strictly_increasing(&mut prev, v[0])?;
        Ok(TrajectoryPoint { t: v[0], x: v[1], y: v[2], heading: v[3].to_radians() })
    })
}

pub fn write_truth_csv(path: &Path, truth: &GroundTruth) -> Result<(), DataError> {
    write_rows(
        path,
        &TRUTH_HEADER,
        truth.epochs.iter().map(|e| {
            vec![
                exact(e.t),
                exact(e.position.x),
                exact(e.position.y),
                sig15(e.heading.to_degrees()),
                sig15(e.bank.to_degrees()),
                exact(e.speed),
            ]
        }),
    )
}

pub fn read_truth_csv(path: &Path) -> Result<Vec<TruthRecord>, DataError> {
    let mut prev = None;
    read_rows(path, &TRUTH_HEADER, |_, v| {
        strictly_increasing(&mut prev, v[0])?;
        Ok(TruthRecord {
            t: v[0],
            x: v[1],
            y: v[2],
            heading: v[3].to_radians(),
            bank: v[4].to_radians(),
            speed: v[5],
        })
    })
}

/// Writes every cell of a non-empty grid, sorted by index.
pub fn export_map(grid: &TerrainGrid, path: &Path) -> Result<(), DataError> {
    if grid.is_empty() {
        return Err(DataError::Invalid("terrain map is empty".into()));
    }
    write_rows(
        path,
        &MAP_HEADER,
        grid.sorted_cells().into_iter().map(|(idx, cell)| {
            let c = grid.center(idx);
            vec![
                idx.0.to_string(),
                idx.1.to_string(),
                exact(c.x),
                exact(c.y),
                sig15(cell.bank.to_degrees()),
                cell.count.to_string(),
            ]
        }),
    )
}

/// Reads a map written by [`export_map`]. Visit distances are not stored and come back as zero.
pub fn import_map(path: &Path, cell_size: f64) -> Result<TerrainGrid, DataError> {
    let mut grid = TerrainGrid::new(cell_size);
    let cells = read_rows(path, &MAP_HEADER, |_, v| {
        let as_int = |x: f64, name: &str| {
            if x.fract() == 0.0 && x.abs() <= i32::MAX as f64 {
                Ok(x)
            } else {
                Err(format!("{name} must be an integer"))
            }
        };
        let (ix, iy) = (as_int(v[0], "ix")? as i32, as_int(v[1], "iy")? as i32);
        let count = as_int(v[5], "count")?;
        if count < 1.0 {
            return Err("count must be positive".into());
        }
        let c = grid.center((ix, iy));
        if (c.x - v[2]).abs() > 1e-9 * cell_size.max(c.x.abs()) || (c.y - v[3]).abs() > 1e-9 * cell_size.max(c.y.abs()) {
            return Err(format!("cell centre does not match a {cell_size} m grid"));
        }
        Ok(((ix, iy), Cell { bank: v[4].to_radians(), count: count as u32, last_visit: 0.0 }))
    })?;
    for (idx, cell) in cells {
        grid.insert(idx, cell);
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shortest_form_is_exact() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 9.80665, f64::MAX] {
            assert_eq!(exact(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(exact(2.0), "2.0");
    }

    #[test]
    fn degrees_round_to_15_digits() {
        assert_eq!(sig15(2f64.to_radians().to_degrees()), "2.0");
        assert_eq!(sig15(2.0 / 3.0), "0.666666666666667");
    }
}
