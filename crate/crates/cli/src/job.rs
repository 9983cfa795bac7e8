//! The resolved job: what the command line (plus config file) asked for.
//! It is echoed verbatim at the top of every JSON document, and a document
//! can be replayed from it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use whittaker_core::mellin::ContourConfig;
use whittaker_core::quadrature::{InnerRoute, QuadratureConfig};
use whittaker_core::rootdata::DEFAULT_REGULARITY_TOL;
use whittaker_core::series::{Precision, SeriesConfig};
use whittaker_core::Cx;

use crate::parse;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Coeffs,
    Eval,
    Mellin,
    Verify,
    Regularity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
    /// Human-readable matrix (verify only).
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobSpec {
    pub command: CommandKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<Vec<Cx>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub route: Option<String>,
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    pub box_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<Vec<Cx>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Config-file and flag overrides, as given.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub settings: BTreeMap<String, String>,
    pub format: Format,
}

pub const SETTING_KEYS: &[&str] = &[
    "series_tol",
    "max_order",
    "precision",
    "levels",
    "abs_tol",
    "rel_tol",
    "u_cutoff",
    "h0",
    "inner_route",
    "allow_high_dim",
    "tau",
    "im_cutoff",
    "step",
    "allow_nested",
    "regularity_tol",
];

pub fn check_key(k: &str) -> Result<(), String> {
    if SETTING_KEYS.contains(&k) {
        Ok(())
    } else {
        Err(format!("unknown setting '{k}' (known: {})", SETTING_KEYS.join(", ")))
    }
}

fn num<T: std::str::FromStr>(k: &str, v: &str) -> Result<T, String> {
    v.parse::<T>().map_err(|_| format!("setting {k} = '{v}' is not a valid value"))
}

impl JobSpec {
    fn get<T: std::str::FromStr>(&self, k: &str) -> Result<Option<T>, String> {
        self.settings.get(k).map(|v| num(k, v)).transpose()
    }

    pub fn series_config(&self) -> Result<SeriesConfig, String> {
        let mut c = SeriesConfig::default();
        if let Some(v) = self.get("series_tol")? {
            c.tol = v;
        }
        if let Some(v) = self.get("max_order")? {
            c.max_order = v;
        }
        if let Some(v) = self.settings.get("precision") {
            c.precision = match v.as_str() {
                "auto" => Precision::Auto,
                "double-double" | "dd" => Precision::DoubleDouble,
                "wide" | "mp256" => Precision::Wide,
                _ => return Err(format!("precision must be auto, double-double or wide, got '{v}'")),
            };
        }
        Ok(c)
    }

    pub fn quadrature_config(&self) -> Result<QuadratureConfig, String> {
        let mut c = QuadratureConfig::default();
        if let Some(v) = self.get("levels")? {
            c.levels = v;
        }
        if let Some(v) = self.get("abs_tol")? {
            c.abs_tol = v;
        }
        if let Some(v) = self.get("rel_tol")? {
            c.rel_tol = v;
        }
        if let Some(v) = self.get("u_cutoff")? {
            c.u_cutoff = v;
        }
        if let Some(v) = self.get("h0")? {
            c.h0 = v;
        }
        if let Some(v) = self.get("allow_high_dim")? {
            c.allow_high_dim = v;
        }
        if let Some(v) = self.settings.get("inner_route") {
            c.inner_route = match v.as_str() {
                "auto" => InnerRoute::Auto,
                "series" => InnerRoute::Series,
                "recurse" => InnerRoute::Recurse,
                _ => return Err(format!("inner_route must be auto, series or recurse, got '{v}'")),
            };
        }
        c.validate().map_err(|e| e.to_string())?;
        Ok(c)
    }

    pub fn contour_config(&self) -> Result<ContourConfig, String> {
        let mut c = if self.get::<bool>("allow_nested")? == Some(true) {
            ContourConfig::nested()
        } else {
            ContourConfig::default()
        };
        if let Some(v) = self.settings.get("tau") {
            c.tau = Some(parse::real_list(v)?);
        }
        if let Some(v) = self.get("im_cutoff")? {
            c.im_cutoff = v;
        }
        if let Some(v) = self.get("step")? {
            c.step = v;
        }
        Ok(c)
    }

    pub fn regularity_tol(&self) -> Result<f64, String> {
        Ok(self.get("regularity_tol")?.unwrap_or(DEFAULT_REGULARITY_TOL))
    }
}
