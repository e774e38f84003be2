//! Result files: commented CSV tables, 16-bit PGM heatmaps with a JSON
//! sidecar, and the run manifest.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use cca_core::dynamics::FieldFrame;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliError;

/// Full round-trip precision for floats in tables.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// A table written as `# key=value` comment lines, a header row and data rows.
#[derive(Debug, Clone, Default)]
pub struct Table {
    meta: Vec<(String, String)>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    /// Adds the resolved configuration as comment lines.
    pub fn config(mut self, config: &RunConfig) -> Self {
        let value = serde_json::to_value(config).expect("config is plain data");
        if let serde_json::Value::Object(map) = value {
            for (k, v) in map {
                let text = match v {
                    serde_json::Value::String(s) => s,
                    serde_json::Value::Array(items) => items
                        .iter()
                        .map(|i| i.to_string())
                        .collect::<Vec<_>>()
                        .join(","),
                    other => other.to_string(),
                };
                if k != "out" {
                    self.meta.push((k, text));
                }
            }
        }
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let file = File::create(path).map_err(CliError::io(path))?;
        let mut out = BufWriter::new(file);
        for (k, v) in &self.meta {
            writeln!(out, "# {k}={v}").map_err(CliError::io(path))?;
        }
        let csv_err = |source| CliError::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row).map_err(csv_err)?;
        }
        w.flush().map_err(CliError::io(path))
    }
}

/// Axes and scale of a heatmap image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapInfo {
    pub image: String,
    pub width: usize,
    pub height: usize,
    /// Site of each column, left to right.
    pub x_min: i64,
    pub x_max: i64,
    /// Time of each row, top to bottom.
    pub times: Vec<f64>,
    /// Probability mapped to full white; zero maps to black.
    pub max_probability: f64,
    pub quantity: String,
}

/// Pixel values of `p_x(t)` with rows = times and columns = sites, scaled
/// linearly so the brightest pixel is 65535. All-zero data stays black.
pub fn heatmap_pixels(frames: &[FieldFrame]) -> (Vec<u16>, f64) {
    let rows: Vec<Vec<f64>> = frames.iter().map(FieldFrame::probabilities).collect();
    let max = rows.iter().flatten().copied().fold(0.0, f64::max);
    let scale = if max > 0.0 {
        f64::from(u16::MAX) / max
    } else {
        0.0
    };
    let pixels = rows
        .iter()
        .flatten()
        .map(|p| (p * scale).round().clamp(0.0, f64::from(u16::MAX)) as u16)
        .collect();
    (pixels, max)
}

/// Writes `<stem>.pgm` (binary 16-bit) and `<stem>.json`; returns both paths.
pub fn write_heatmap(
    dir: &Path,
    stem: &str,
    frames: &[FieldFrame],
) -> Result<(PathBuf, PathBuf), CliError> {
    let first = frames
        .first()
        .ok_or_else(|| CliError::Config("heatmap needs at least one frame".into()))?;
    let width = first.psi.len();
    let height = frames.len();
    let (pixels, max) = heatmap_pixels(frames);

    let image = dir.join(format!("{stem}.pgm"));
    let mut bytes = format!("P5\n{width} {height}\n65535\n").into_bytes();
    bytes.extend(pixels.iter().flat_map(|v| v.to_be_bytes()));
    std::fs::write(&image, bytes).map_err(CliError::io(&image))?;

    let info = HeatmapInfo {
        image: format!("{stem}.pgm"),
        width,
        height,
        x_min: -first.half_width,
        x_max: first.half_width,
        times: frames.iter().map(|f| f.t).collect(),
        max_probability: max,
        quantity: "p_x".into(),
    };
    let sidecar = dir.join(format!("{stem}.json"));
    write_json(&sidecar, &info)?;
    Ok((image, sidecar))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    std::fs::write(path, text).map_err(CliError::io(path))
}

/// Achieved accuracy of the computed amplitudes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Achieved {
    /// Largest error estimate of any directly integrated amplitude.
    pub quadrature_max_error: f64,
    /// Largest truncation plus coefficient error of the Bessel route, if used.
    pub bessel_max_error: Option<f64>,
}

impl Achieved {
    pub fn quadrature(&mut self, error: f64) {
        self.quadrature_max_error = self.quadrature_max_error.max(error);
    }

    pub fn bessel(&mut self, error: f64) {
        self.bessel_max_error = Some(self.bessel_max_error.unwrap_or(0.0).max(error));
    }
}

/// Record of a run, written whether it succeeded or not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    /// `ok`, `failed` (computation finished, check did not pass) or `error`.
    pub status: String,
    pub exit_code: u8,
    pub error: Option<String>,
    pub requested_tolerance: f64,
    pub achieved: Option<Achieved>,
    pub outputs: Vec<String>,
    pub metrics: BTreeMap<String, f64>,
    pub wall_time_seconds: f64,
}

pub const MANIFEST: &str = "manifest.json";
pub const RUN_CONFIG: &str = "run.toml";

#[cfg(test)]
mod tests {
    use super::*;
    use cca_core::Complex64;

    fn frame(t: f64, values: &[f64]) -> FieldFrame {
        let psi: Vec<Complex64> = values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        FieldFrame {
            t,
            half_width: (values.len() as i64 - 1) / 2,
            psi_u: psi.clone(),
            psi_b: vec![Complex64::default(); psi.len()],
            psi_error: vec![0.0; psi.len()],
            psi,
        }
    }

    #[test]
    fn zero_field_is_black() {
        let frames = [frame(0.0, &[0.0; 5]), frame(1.0, &[0.0; 5])];
        let (px, max) = heatmap_pixels(&frames);
        assert_eq!(max, 0.0);
        assert!(px.iter().all(|&v| v == 0));
    }

    #[test]
    fn heatmap_scales_to_brightest_pixel() {
        let frames = [frame(0.0, &[0.0, 0.5, 1.0]), frame(1.0, &[1.0, 0.0, 0.0])];
        let (px, max) = heatmap_pixels(&frames);
        assert_eq!(max, 1.0);
        assert_eq!(px, vec![0, 16384, 65535, 65535, 0, 0]);

        let dir = tempfile::tempdir().unwrap();
        let (img, side) = write_heatmap(dir.path(), "map", &frames).unwrap();
        let bytes = std::fs::read(img).unwrap();
        let header = b"P5\n3 2\n65535\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(
            &bytes[header.len() + 2..header.len() + 4],
            &16384u16.to_be_bytes()
        );
        assert_eq!(bytes.len(), header.len() + 12);
        let info: HeatmapInfo =
            serde_json::from_str(&std::fs::read_to_string(side).unwrap()).unwrap();
        assert_eq!((info.x_min, info.x_max, info.height), (-1, 1, 2));
    }

    #[test]
    fn table_has_comments_header_and_exact_floats() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut t = Table::new(&["a", "b"]).meta("J", 1.0);
        t.push(vec![float(0.1), float(1.0 / 3.0)]);
        t.write(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# J=1");
        assert_eq!(lines[1], "a,b");
        let b: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(b, 1.0 / 3.0);
    }
}
