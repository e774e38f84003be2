//! Run configuration: built-in presets, overlaid by a config file, overlaid
//! by command-line flags.
//!
//! The config file is a flat TOML table whose keys mirror the long flags
//! (`J`, `g`, `eta`, `tmin`, `tmax`, `tsteps`, `window`, `tol`, `out`,
//! `eps-c`, `oracle-N`, ...). A resolved [`RunConfig`] serializes to the
//! same format and parses back unchanged.

use std::path::{Path, PathBuf};

use cca_core::dynamics::QuadratureSpec;
use cca_core::observables::DEFAULT_EPS_C;
use cca_core::ModelParams;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Coupling sets and snapshot times of the published figures.
pub const FIGURE2_ETAS: [f64; 6] = [0.1, 0.4, 0.8, 1.0, 2.0, 10.0];
pub const FIGURE3_ETAS: [f64; 3] = [0.1, 0.8, 2.0];
pub const FIGURE3_SNAPSHOTS: [f64; 3] = [350.0, 95.5, 95.5];
pub const FIGURE5_ETAS: [f64; 2] = [0.8, 2.0];

/// Fully resolved parameters of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    pub command: String,
    #[serde(rename = "J")]
    pub hopping: f64,
    pub g: f64,
    /// Couplings `η` for multi-coupling commands; empty means `[g/J]`.
    pub etas: Vec<f64>,
    pub tmin: f64,
    pub tmax: f64,
    pub tsteps: usize,
    /// Field window half width `X`.
    pub window: i64,
    /// Absolute quadrature tolerance.
    pub tol: f64,
    pub out: PathBuf,
    pub eps_c: f64,
    #[serde(rename = "oracle-N")]
    pub oracle_n: usize,
    /// Pass mark for `validate`.
    pub check_tol: f64,
    /// Log-spaced `η` sweep for the localization table.
    pub eta_min: f64,
    pub eta_max: f64,
    pub points: usize,
    /// Snapshot times, one per entry of `etas`.
    pub snapshots: Vec<f64>,
}

/// Any subset of the [`RunConfig`] keys, plus `eta` as an alternative to
/// `g`. Used for both the config file and the flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Overrides {
    pub command: Option<String>,
    #[serde(rename = "J")]
    pub hopping: Option<f64>,
    pub g: Option<f64>,
    pub eta: Option<f64>,
    pub etas: Option<Vec<f64>>,
    pub tmin: Option<f64>,
    pub tmax: Option<f64>,
    pub tsteps: Option<usize>,
    pub window: Option<i64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub eps_c: Option<f64>,
    #[serde(rename = "oracle-N")]
    pub oracle_n: Option<usize>,
    pub check_tol: Option<f64>,
    pub eta_min: Option<f64>,
    pub eta_max: Option<f64>,
    pub points: Option<usize>,
    pub snapshots: Option<Vec<f64>>,
}

impl Overrides {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
    }
}

impl RunConfig {
    /// Built-in defaults for a command, before any override.
    pub fn preset(command: &str) -> Self {
        let mut c = RunConfig {
            command: command.to_string(),
            hopping: 1.0,
            g: 1.0,
            etas: Vec::new(),
            tmin: 0.0,
            tmax: 100.0,
            tsteps: 401,
            window: 50,
            tol: QuadratureSpec::default().tolerance,
            out: PathBuf::from("."),
            eps_c: DEFAULT_EPS_C,
            oracle_n: 1024,
            check_tol: 1e-3,
            eta_min: 0.01,
            eta_max: 100.0,
            points: 401,
            snapshots: Vec::new(),
        };
        match command {
            "field" => {
                c.tmax = 50.0;
                c.tsteps = 51;
                c.window = 110;
            }
            "validate" => {
                c.tsteps = 201;
            }
            "figure-2" => {
                c.etas = FIGURE2_ETAS.to_vec();
            }
            "figure-3" => {
                c.etas = FIGURE3_ETAS.to_vec();
                c.snapshots = FIGURE3_SNAPSHOTS.to_vec();
                c.tsteps = 101;
                c.window = 100;
            }
            "figure-5" => {
                c.etas = FIGURE5_ETAS.to_vec();
                c.tmin = 50.0;
                c.tsteps = 501;
                c.window = 10;
            }
            _ => {}
        }
        c
    }

    fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        if let Some(v) = o.hopping {
            self.hopping = v;
        }
        match (o.g, o.eta) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config("give either g or eta, not both".into()))
            }
            (Some(g), None) => self.g = g,
            (None, Some(eta)) => self.g = eta * self.hopping,
            (None, None) => {}
        }
        macro_rules! take {
            ($($field:ident),*) => {$(
                if let Some(v) = &o.$field {
                    self.$field = v.clone();
                }
            )*};
        }
        take!(etas, tmin, tmax, tsteps, window, tol, out, eps_c, oracle_n, check_tol);
        take!(eta_min, eta_max, points, snapshots);
        Ok(())
    }

    /// Preset, then file, then flags.
    pub fn resolve(command: &str, file: &Overrides, flags: &Overrides) -> Result<Self, CliError> {
        let mut c = Self::preset(command);
        // A file coupling given as η is relative to the final J.
        let hopping = flags.hopping.or(file.hopping).unwrap_or(c.hopping);
        c.hopping = hopping;
        c.apply(&Overrides {
            hopping: None,
            ..file.clone()
        })?;
        c.apply(&Overrides {
            hopping: None,
            ..flags.clone()
        })?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        ModelParams::new(self.hopping, self.g)?;
        let bad = |what: &str| Err(CliError::Config(what.to_string()));
        if !(self.tmin.is_finite() && self.tmax.is_finite() && self.tmin >= 0.0) {
            return bad("times must be finite and non-negative");
        }
        if self.tmax < self.tmin {
            return bad("tmax must not be smaller than tmin");
        }
        if self.tsteps == 0 {
            return bad("tsteps must be at least 1");
        }
        if self.window < 0 {
            return bad("window must be non-negative");
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return bad("tol must be positive");
        }
        if !(self.check_tol.is_finite() && self.check_tol > 0.0) {
            return bad("check-tol must be positive");
        }
        if self.etas.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return bad("etas must be non-negative");
        }
        if !self.snapshots.is_empty() && self.snapshots.len() != self.eta_list().len() {
            return bad("snapshots needs one time per coupling in etas");
        }
        if !(self.eta_min > 0.0 && self.eta_max > self.eta_min && self.points >= 2) {
            return bad("sweep needs 0 < eta-min < eta-max and at least 2 points");
        }
        Ok(())
    }

    /// Couplings to run, `[g/J]` when `etas` is empty.
    pub fn eta_list(&self) -> Vec<f64> {
        if self.etas.is_empty() {
            vec![self.g / self.hopping]
        } else {
            self.etas.clone()
        }
    }

    pub fn params_for(&self, eta: f64) -> Result<ModelParams, CliError> {
        Ok(ModelParams::with_eta(self.hopping, eta)?)
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        QuadratureSpec::with_tolerance(self.tol)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat table of plain values")
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_through_file_format() {
        let mut c = RunConfig::preset("figure-3");
        c.hopping = 1.3;
        c.g = 0.1 + 0.2;
        c.tol = 3.3e-11;
        c.out = PathBuf::from("runs/a b");
        let text = c.to_toml();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), c);
        // The same text is also a valid override file.
        let o: Overrides = toml::from_str(&text).unwrap();
        let again = RunConfig::resolve("figure-3", &o, &Overrides::default()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn precedence_is_preset_file_flags() {
        let file = Overrides {
            eta: Some(0.5),
            tmax: Some(20.0),
            window: Some(7),
            ..Default::default()
        };
        let flags = Overrides {
            hopping: Some(2.0),
            tmax: Some(30.0),
            ..Default::default()
        };
        let c = RunConfig::resolve("emit", &file, &flags).unwrap();
        assert_eq!(c.tmax, 30.0);
        assert_eq!(c.window, 7);
        assert_eq!(c.hopping, 2.0);
        assert_eq!(c.g, 1.0);
        assert_eq!(c.eta_list(), vec![0.5]);

        let flags = Overrides {
            g: Some(0.3),
            ..Default::default()
        };
        let c = RunConfig::resolve("emit", &file, &flags).unwrap();
        assert_eq!(c.g, 0.3);
    }

    #[test]
    fn rejects_inconsistent_input() {
        let both = Overrides {
            g: Some(1.0),
            eta: Some(1.0),
            ..Default::default()
        };
        assert!(RunConfig::resolve("emit", &both, &Overrides::default()).is_err());
        let backwards = Overrides {
            tmin: Some(5.0),
            tmax: Some(1.0),
            ..Default::default()
        };
        assert!(RunConfig::resolve("emit", &Overrides::default(), &backwards).is_err());
        let snaps = Overrides {
            snapshots: Some(vec![1.0]),
            ..Default::default()
        };
        assert!(RunConfig::resolve("figure-3", &Overrides::default(), &snaps).is_err());
        assert!(toml::from_str::<Overrides>("bogus = 1").is_err());
    }

    #[test]
    fn figure_presets_copy_captions() {
        assert_eq!(RunConfig::preset("figure-2").etas, FIGURE2_ETAS.to_vec());
        let f3 = RunConfig::preset("figure-3");
        assert_eq!(f3.etas, vec![0.1, 0.8, 2.0]);
        assert_eq!(f3.snapshots, vec![350.0, 95.5, 95.5]);
        assert_eq!(RunConfig::preset("figure-5").etas, vec![0.8, 2.0]);
    }
}
