use std::path::PathBuf;

use ait_core::{EndToEndConfig, FamilyKind, FamilyParams, QuadratureSettings, YSelection};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Both,
}

impl Format {
    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }

    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }
}

/// A single number or a list, as accepted for `q` in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

fn parse_q(s: &str) -> Result<OneOrMany, String> {
    let values = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad q value '{p}': {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(match values.as_slice() {
        [one] => OneOrMany::One(*one),
        _ => OneOrMany::Many(values),
    })
}

fn parse_y(s: &str) -> Result<YSelection, String> {
    if s == "auto" {
        return Ok(YSelection::auto());
    }
    s.split(',')
        .map(|p| {
            p.trim().parse::<f64>().map_err(|e| format!("Y must be \"auto\" or a comma-separated list, got '{p}': {e}"))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(YSelection::List)
}

fn parse_family(s: &str) -> Result<FamilyKind, String> {
    s.parse().map_err(|e: ait_core::Error| e.to_string())
}

/// Settings shared by every subcommand. Each field may come from a flag or from the
/// `--config` file; the file wins.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Operator spec JSON.
    #[arg(long = "spec")]
    pub spec_path: Option<PathBuf>,
    /// Generate the operator from a family instead of reading a spec.
    #[arg(long, value_parser = parse_family)]
    pub family: Option<FamilyKind>,
    /// Eigenvalue ordinates for the family, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub gammas: Option<Vec<f64>>,
    /// Jordan size for rh_jordan.
    #[arg(long)]
    pub m: Option<usize>,
    /// Offset from the critical line for non_rh.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Bound on cond(W) for the similarity transform.
    #[arg(long)]
    pub conditioning: Option<f64>,
    /// One value or a comma-separated list.
    #[arg(long, value_parser = parse_q)]
    pub q: Option<OneOrMany>,
    /// "auto" or a comma-separated list of windows.
    #[arg(long = "Y", value_parser = parse_y)]
    #[serde(rename = "Y")]
    pub y: Option<YSelection>,
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Quadrature tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub hodge_samples: Option<usize>,
    #[arg(long)]
    pub pair_samples: Option<usize>,
    #[arg(long)]
    pub trace_n_max: Option<usize>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($field:ident),*) => {
        RunConfig { $($field: $top.$field.or($base.$field)),* }
    };
}

impl RunConfig {
    /// Fields set in `file` replace those from the command line.
    pub fn overlay(self, file: RunConfig) -> RunConfig {
        let base = self;
        overlay!(base, file; spec_path, family, gammas, m, delta, conditioning, q, y, n_max, tol, out_dir, format,
            seed, hodge_samples, pair_samples, trace_n_max)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.n_max == Some(0) {
            return Err(CliError::config("n_max must be at least 1"));
        }
        if let Some(tol) = self.tol {
            if tol.is_nan() || tol <= 0.0 {
                return Err(CliError::config(format!("tol must be positive, got {tol}")));
            }
        }
        for q in self.qs() {
            if q == 1.0 || !q.is_finite() || q <= 0.0 {
                return Err(CliError::config(format!("q must be positive and different from 1, got {q}")));
            }
        }
        Ok(())
    }

    pub fn qs(&self) -> Vec<f64> {
        self.q.as_ref().map(OneOrMany::values).unwrap_or_else(|| vec![2.0])
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("ait-out"))
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(Format::Both)
    }

    pub fn family_params(&self) -> FamilyParams {
        let mut p = FamilyParams::new(self.gammas.clone().unwrap_or_else(|| vec![1.0, 3.0]));
        if let Some(m) = self.m {
            p.m = m;
        }
        if let Some(d) = self.delta {
            p.delta = d;
        }
        if let Some(c) = self.conditioning {
            p.conditioning = c;
        }
        p.seed = self.seed.unwrap_or(0);
        p
    }

    pub fn end_to_end(&self, q: f64) -> EndToEndConfig {
        let defaults = EndToEndConfig::default();
        EndToEndConfig {
            y: self.y.clone().unwrap_or(defaults.y),
            q,
            n_max: self.n_max.unwrap_or(defaults.n_max),
            trace_n_max: self.trace_n_max.unwrap_or(defaults.trace_n_max),
            quadrature: QuadratureSettings { tol: self.tol.unwrap_or(defaults.quadrature.tol), ..defaults.quadrature },
            thresholds: defaults.thresholds,
            hodge_samples: self.hodge_samples.unwrap_or(defaults.hodge_samples),
            pair_samples: self.pair_samples.unwrap_or(defaults.pair_samples),
            seed: self.seed.unwrap_or(defaults.seed),
        }
    }
}

/// One family entry of a sweep: a bare name or full parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilyEntry {
    Name(FamilyKind),
    Full {
        family: FamilyKind,
        #[serde(flatten)]
        params: FamilyParams,
    },
}

impl FamilyEntry {
    pub fn resolve(&self) -> (FamilyKind, FamilyParams) {
        match self {
            FamilyEntry::Name(kind) => (*kind, FamilyParams::new(vec![1.0, 3.0])),
            FamilyEntry::Full { family, params } => (*family, params.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub families: Vec<FamilyEntry>,
    #[serde(default = "default_sweep_q")]
    pub q: OneOrMany,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(rename = "Y", default = "YSelection::auto")]
    pub y: YSelection,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub hodge_samples: Option<usize>,
    #[serde(default)]
    pub pair_samples: Option<usize>,
    #[serde(default)]
    pub trace_n_max: Option<usize>,
}

fn default_sweep_q() -> OneOrMany {
    OneOrMany::Many(vec![2.0, 0.5])
}

fn default_n_max() -> usize {
    512
}

impl SweepConfig {
    /// Settings for one scenario, expressed as a run config.
    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            y: Some(self.y.clone()),
            n_max: Some(self.n_max),
            tol: self.tol,
            seed: self.seed,
            hodge_samples: self.hodge_samples,
            pair_samples: self.pair_samples,
            trace_n_max: self.trace_n_max,
            q: Some(self.q.clone()),
            ..RunConfig::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_override_flags() {
        let flags = RunConfig { n_max: Some(64), seed: Some(1), ..RunConfig::default() };
        let file: RunConfig = serde_json::from_str(r#"{"n_max": 128, "q": [2, 0.5], "Y": "auto"}"#).unwrap();
        let merged = flags.overlay(file);
        assert_eq!(merged.n_max, Some(128));
        assert_eq!(merged.seed, Some(1));
        assert_eq!(merged.qs(), vec![2.0, 0.5]);
        assert_eq!(merged.y, Some(YSelection::auto()));
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"nmax": 3}"#).is_err());
    }

    #[test]
    fn validation() {
        let bad_q = RunConfig { q: Some(OneOrMany::Many(vec![2.0, 1.0])), ..RunConfig::default() };
        assert!(bad_q.validate().is_err());
        let bad_tol = RunConfig { tol: Some(0.0), ..RunConfig::default() };
        assert!(bad_tol.validate().is_err());
        assert!(RunConfig::default().validate().is_ok());
    }

    #[test]
    fn flag_parsers() {
        assert_eq!(parse_q("2").unwrap(), OneOrMany::One(2.0));
        assert_eq!(parse_q("2,0.5").unwrap().values(), vec![2.0, 0.5]);
        assert_eq!(parse_y("auto").unwrap(), YSelection::auto());
        assert_eq!(parse_y("1.5,4").unwrap(), YSelection::List(vec![1.5, 4.0]));
        assert!(parse_y("all").is_err());
    }

    #[test]
    fn sweep_config_accepts_names_and_parameter_objects() {
        let text = r#"{"families": ["rh_semisimple", {"family": "rh_jordan", "gammas": [1, 3], "m": 3}],
                       "q": [2.0, 0.5], "n_max": 512, "Y": "auto"}"#;
        let cfg: SweepConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg.families.len(), 2);
        let (kind, params) = cfg.families[1].resolve();
        assert_eq!(kind, FamilyKind::RhJordan);
        assert_eq!(params.m, 3);
        assert_eq!(cfg.families[0].resolve().1.gammas, vec![1.0, 3.0]);
    }
}
