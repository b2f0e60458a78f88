use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use redispatch_core::dataset::features::{base_columns, engineered_columns, features_of};
use redispatch_core::dataset::{Window, DEFAULT_MAX_GAP_HOURS};
use redispatch_core::eval::{GroupGapSplit, SearchSpace};
use redispatch_core::model::Hyperparameters;
use redispatch_core::FeatureSet;
use redispatch_ingest::ClientConfig;
use serde::{Deserialize, Serialize};

use crate::failure::{Failure, Tag};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSettings {
    pub n_trials: usize,
    pub space: SearchSpace,
}

impl Default for SearchSettings {
    fn default() -> Self {
        SearchSettings {
            n_trials: 20,
            space: SearchSpace::default(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfeSettings {
    /// Also report the in-sample score of a model refit on all rows.
    pub retrained: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplainSettings {
    pub interactions: bool,
}

impl Default for ExplainSettings {
    fn default() -> Self {
        ExplainSettings { interactions: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSettings {
    /// Bins along wind and flow.
    pub heatmap_bins: [usize; 2],
    pub density_grid: [usize; 2],
    /// Horizontal axis of the heat maps and partner of the interaction tables.
    pub wind_feature: String,
    pub flow_features: Vec<String>,
}

impl Default for ReportSettings {
    fn default() -> Self {
        ReportSettings {
            heatmap_bins: [30, 30],
            density_grid: [50, 50],
            wind_feature: "wind_north".into(),
            flow_features: vec!["flow_DK".into(), "flow_FR".into()],
        }
    }
}

/// Everything a run depends on besides the bundle contents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Bundle directory; `<out>/bundle` when unset.
    pub bundle: Option<PathBuf>,
    /// Redispatch download to include in the bundle.
    pub redispatch_csv: Option<PathBuf>,
    /// Download cache; `<out>/cache` when unset.
    pub cache_dir: Option<PathBuf>,
    /// Study interval; `build` falls back to the bundle's window.
    pub window: Option<Window>,
    pub feature_set: FeatureSet,
    /// Extra columns added to the feature set.
    pub include: Vec<String>,
    pub exclude: Vec<String>,
    pub max_gap_hours: usize,
    pub hyperparameters: Hyperparameters,
    pub search: Option<SearchSettings>,
    pub cv: GroupGapSplit,
    pub rfe: RfeSettings,
    pub explain: ExplainSettings,
    pub report: ReportSettings,
    pub client: ClientConfig,
    /// Drives fold assignment, subsampling and the search.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            bundle: None,
            redispatch_csv: None,
            cache_dir: None,
            window: None,
            feature_set: FeatureSet::Reduced,
            include: Vec::new(),
            exclude: Vec::new(),
            max_gap_hours: DEFAULT_MAX_GAP_HOURS,
            hyperparameters: Hyperparameters::default(),
            search: None,
            cv: GroupGapSplit::default(),
            rfe: RfeSettings::default(),
            explain: ExplainSettings::default(),
            report: ReportSettings::default(),
            client: ClientConfig::default(),
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))
            .tag(Failure::Config)?;
        serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))
            .tag(Failure::Config)
    }

    /// Copies the master seed into the components that draw random numbers.
    pub fn with_seed(mut self, seed: u64) -> RunConfig {
        self.seed = seed;
        self.cv.seed = seed;
        self.hyperparameters.seed = seed;
        self
    }

    pub fn feature_names(&self) -> Vec<String> {
        let mut names: Vec<String> = features_of(self.feature_set)
            .into_iter()
            .filter(|n| !self.exclude.contains(n))
            .collect();
        for n in &self.include {
            if !names.contains(n) {
                names.push(n.clone());
            }
        }
        names
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.check().tag(Failure::Config)
    }

    fn check(&self) -> anyhow::Result<()> {
        if let Some(w) = &self.window {
            w.validate()?;
        }
        if self.feature_set == FeatureSet::Base {
            return Err(anyhow!("feature_set must be full, engineered or reduced"));
        }
        let mut known: BTreeSet<String> = base_columns().into_iter().collect();
        known.extend(engineered_columns());
        for n in self.include.iter().chain(&self.exclude) {
            if !known.contains(n) {
                return Err(anyhow!("unknown feature {n:?} in include/exclude"));
            }
        }
        if let Some(n) = self.include.iter().find(|n| self.exclude.contains(n)) {
            return Err(anyhow!("feature {n:?} is both included and excluded"));
        }
        if self.feature_names().is_empty() {
            return Err(anyhow!("no features left after exclusions"));
        }
        self.hyperparameters.validate()?;
        if let Some(s) = &self.search {
            s.space.validate()?;
            if s.n_trials == 0 {
                return Err(anyhow!("search.n_trials must be positive"));
            }
        }
        if self.cv.n_folds < 2 {
            return Err(anyhow!("cv.n_folds must be at least 2"));
        }
        let r = &self.report;
        if r.heatmap_bins.contains(&0) || r.density_grid.iter().any(|&n| n < 2) {
            return Err(anyhow!(
                "report grids need at least one bin and two density points per axis"
            ));
        }
        if self.client.burst == 0 || self.client.max_attempts == 0 || self.client.chunk_days <= 0 {
            return Err(anyhow!(
                "client burst, max_attempts and chunk_days must be positive"
            ));
        }
        Ok(())
    }
}

/// File locations under the output directory.
#[derive(Clone, Debug)]
pub struct RunPaths {
    pub out: PathBuf,
    pub bundle: PathBuf,
    pub cache: PathBuf,
}

impl RunPaths {
    pub fn new(out: &Path, cfg: &RunConfig) -> RunPaths {
        RunPaths {
            out: out.to_path_buf(),
            bundle: cfg.bundle.clone().unwrap_or_else(|| out.join("bundle")),
            cache: cfg.cache_dir.clone().unwrap_or_else(|| out.join("cache")),
        }
    }
    pub fn config(&self) -> PathBuf {
        self.out.join("config.json")
    }
    pub fn dataset(&self) -> PathBuf {
        self.out.join("dataset.csv")
    }
    pub fn provenance(&self) -> PathBuf {
        self.out.join("provenance.json")
    }
    pub fn build_summary(&self) -> PathBuf {
        self.out.join("build_summary.json")
    }
    pub fn model(&self) -> PathBuf {
        self.out.join("model.json")
    }
    pub fn train_report(&self) -> PathBuf {
        self.out.join("train.json")
    }
    pub fn search_trials(&self) -> PathBuf {
        self.out.join("search_trials.jsonl")
    }
    pub fn rfe_trace(&self) -> PathBuf {
        self.out.join("rfe_trace.jsonl")
    }
    pub fn rfe_summary(&self) -> PathBuf {
        self.out.join("rfe_summary.csv")
    }
    pub fn shap(&self) -> PathBuf {
        self.out.join("shap.csv")
    }
    pub fn interactions(&self) -> PathBuf {
        self.out.join("interactions.csv")
    }
    pub fn importance(&self) -> PathBuf {
        self.out.join("importance.json")
    }
    pub fn report_dir(&self) -> PathBuf {
        self.out.join("report")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn json_round_trip() {
        let cfg = RunConfig {
            search: Some(SearchSettings::default()),
            ..Default::default()
        }
        .with_seed(4);
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn include_and_exclude() {
        let cfg = RunConfig {
            exclude: vec!["flow_FR".into()],
            include: vec!["price_DE".into()],
            ..Default::default()
        };
        cfg.validate().unwrap();
        let names = cfg.feature_names();
        assert_eq!(names.len(), 6);
        assert!(!names.contains(&"flow_FR".to_string()));
        assert_eq!(names.last().unwrap(), "price_DE");
    }

    #[test]
    fn unknown_feature_is_config_error() {
        let cfg = RunConfig {
            include: vec!["wind_south".into()],
            ..Default::default()
        };
        let err = cfg.validate().unwrap_err();
        assert_eq!(crate::failure::classify(&err), Failure::Config);
    }

    #[test]
    fn unknown_field_is_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"feature_sets":"full"}"#).is_err());
    }
}
