//! Experiment configuration: one JSON document that pins the field, the
//! radio profiles, every strategy's tuning, the metric settings, and the
//! seed list, so a whole comparison run is reproducible from a single file.
//! Unknown keys are rejected everywhere, and every section falls back to
//! its module's defaults when omitted.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extras::ExtraConfig;
use crate::fahp::{default_model, FahpModel, FuzzyMatrix};
use crate::field::FieldSpec;
use crate::gdl::GdlConfig;
use crate::pso::PsoConfig;
use crate::radio::{default_profiles, RadioTech};

/// Metric settings shared by `score` and `compare`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    /// Sensing radius assumed for long-range nodes (m).
    pub r_sense: f64,
    /// Raster pitch for the grid coverage estimate (m).
    pub resolution: f64,
    /// Sample count for the Monte Carlo coverage estimate.
    pub samples: u64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            r_sense: 40.0,
            resolution: 1.0,
            samples: 100_000,
        }
    }
}

impl MetricsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_sense > 0.0) || !self.r_sense.is_finite() {
            return Err(Error::Config(format!(
                "metrics.r_sense must be positive, got {}",
                self.r_sense
            )));
        }
        if !(self.resolution > 0.0) || !self.resolution.is_finite() {
            return Err(Error::Config(format!(
                "metrics.resolution must be positive, got {}",
                self.resolution
            )));
        }
        if self.samples == 0 {
            return Err(Error::Config("metrics.samples must be at least 1".into()));
        }
        Ok(())
    }
}

/// The fuzzy ranking model in JSON-friendly form: each comparison matrix is
/// written as rows of `[l, m, u]` triples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FahpSection {
    pub criteria_names: Vec<String>,
    pub alternatives: Vec<String>,
    /// Criteria-vs-criteria comparison matrix, row major.
    pub criteria: Vec<Vec<[f64; 3]>>,
    /// One alternatives-vs-alternatives matrix per criterion.
    pub per_criterion: Vec<Vec<Vec<[f64; 3]>>>,
}

fn matrix_rows(m: &FuzzyMatrix) -> Vec<Vec<[f64; 3]>> {
    (0..m.n)
        .map(|i| {
            (0..m.n)
                .map(|j| {
                    let t = m.get(i, j);
                    [t.l, t.m, t.u]
                })
                .collect()
        })
        .collect()
}

impl Default for FahpSection {
    fn default() -> Self {
        let model = default_model();
        FahpSection {
            criteria_names: model.criteria_names.clone(),
            alternatives: model.alternatives.clone(),
            criteria: matrix_rows(&model.criteria),
            per_criterion: model.per_criterion.iter().map(matrix_rows).collect(),
        }
    }
}

impl FahpSection {
    /// Materialize the ranking model, validating matrix shapes and entries.
    pub fn to_model(&self) -> Result<FahpModel> {
        if self.criteria_names.is_empty() || self.alternatives.is_empty() {
            return Err(Error::Config(
                "fahp needs at least one criterion and one alternative".into(),
            ));
        }
        if self.criteria.len() != self.criteria_names.len() {
            return Err(Error::Config(format!(
                "fahp.criteria is {}x{} but there are {} criteria names",
                self.criteria.len(),
                self.criteria.first().map_or(0, Vec::len),
                self.criteria_names.len()
            )));
        }
        if self.per_criterion.len() != self.criteria_names.len() {
            return Err(Error::Config(format!(
                "fahp.per_criterion holds {} matrices but there are {} criteria",
                self.per_criterion.len(),
                self.criteria_names.len()
            )));
        }
        let criteria = FuzzyMatrix::from_rows(&self.criteria)
            .map_err(|e| Error::Config(format!("fahp.criteria: {e}")))?;
        let mut per_criterion = Vec::with_capacity(self.per_criterion.len());
        for (k, rows) in self.per_criterion.iter().enumerate() {
            if rows.len() != self.alternatives.len() {
                return Err(Error::Config(format!(
                    "fahp.per_criterion[{k}] is {}x{} but there are {} alternatives",
                    rows.len(),
                    rows.first().map_or(0, Vec::len),
                    self.alternatives.len()
                )));
            }
            per_criterion.push(
                FuzzyMatrix::from_rows(rows)
                    .map_err(|e| Error::Config(format!("fahp.per_criterion[{k}]: {e}")))?,
            );
        }
        Ok(FahpModel {
            criteria_names: self.criteria_names.clone(),
            alternatives: self.alternatives.clone(),
            criteria,
            per_criterion,
        })
    }
}

/// Everything one experiment needs, loadable from a single JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub field: FieldSpec,
    pub radios: Vec<RadioTech>,
    pub gdl: GdlConfig,
    pub pso: PsoConfig,
    pub extras: ExtraConfig,
    pub fahp: FahpSection,
    pub metrics: MetricsConfig,
    /// Seeds the comparison sweeps over; single-strategy commands use the
    /// first entry unless overridden.
    pub seeds: Vec<u64>,
    pub output_dir: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            field: FieldSpec::default(),
            radios: default_profiles(),
            gdl: GdlConfig::default(),
            pso: PsoConfig::default(),
            extras: ExtraConfig::default(),
            fahp: FahpSection::default(),
            metrics: MetricsConfig::default(),
            seeds: vec![42, 0, 1, 2, 3],
            output_dir: "out".into(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.field.validate()?;
        if self.radios.is_empty() {
            return Err(Error::Config("radios must not be empty".into()));
        }
        let mut names: Vec<&str> = self.radios.iter().map(|r| r.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != self.radios.len() {
            return Err(Error::Config("radio names must be unique".into()));
        }
        for r in &self.radios {
            r.validate()?;
        }
        self.gdl.validate()?;
        self.pso.validate()?;
        self.extras.validate()?;
        self.metrics.validate()?;
        self.fahp.to_model()?;
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds must not be empty".into()));
        }
        if self.output_dir.is_empty() {
            return Err(Error::Config("output_dir must not be empty".into()));
        }
        Ok(())
    }

    /// Parse and validate a config document.
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(s).map_err(|e| Error::Config(format!("config parse: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("config serialize: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_roundtrips_and_validates() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let json = cfg.to_json().unwrap();
        let back = ExperimentConfig::from_json(&json).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn empty_document_uses_defaults() {
        let cfg = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
    }

    #[test]
    fn partial_section_overrides() {
        let cfg =
            ExperimentConfig::from_json(r#"{"gdl": {"seed": 7}, "seeds": [9]}"#).unwrap();
        assert_eq!(cfg.gdl.seed, 7);
        assert_eq!(cfg.gdl.n_stations, 8, "unset keys keep defaults");
        assert_eq!(cfg.seeds, vec![9]);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(
            ExperimentConfig::from_json(r#"{"grdl": {}}"#),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ExperimentConfig::from_json(r#"{"gdl": {"learning": 1.0}}"#),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn semantic_errors_rejected() {
        assert!(matches!(
            ExperimentConfig::from_json(r#"{"seeds": []}"#),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ExperimentConfig::from_json(r#"{"metrics": {"resolution": 0.0}}"#),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ExperimentConfig::from_json(r#"{"pso": {"inertia": 2.0}}"#),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn duplicate_radio_names_rejected() {
        let mut cfg = ExperimentConfig::default();
        let dup = cfg.radios[0].clone();
        cfg.radios.push(dup);
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn default_fahp_section_matches_shipped_model() {
        let model = FahpSection::default().to_model().unwrap();
        let shipped = default_model();
        assert_eq!(model.criteria_names, shipped.criteria_names);
        assert_eq!(model.alternatives, shipped.alternatives);
        let (a, _) = model.rank().unwrap();
        let (b, _) = shipped.rank().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn malformed_fahp_matrix_rejected() {
        let mut section = FahpSection::default();
        section.criteria[0][1] = [3.0, 2.0, 1.0]; // l > m > u
        assert!(section.to_model().is_err());
        let mut section = FahpSection::default();
        section.per_criterion.pop();
        assert!(section.to_model().is_err());
    }
}
