//! Run configuration: grid, vocabularies and thresholds. Stored as TOML.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::GridSpec;
use crate::scalar::Scalar;
use crate::vocab::{VocabKind, Vocabulary};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub rows: usize,
    pub cols: usize,
    pub cell_size_m: f64,
    pub robot_height_m: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            rows: 500,
            cols: 500,
            cell_size_m: 0.05,
            robot_height_m: 1.5,
        }
    }
}

impl GridConfig {
    pub fn spec<T: Scalar>(&self) -> GridSpec<T> {
        GridSpec {
            h_bar: self.rows,
            w_bar: self.cols,
            cell_size: T::from_f64_lossy(self.cell_size_m),
            robot_height: T::from_f64_lossy(self.robot_height_m),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VocabConfig {
    /// Category labels; the first entry is the floor/background label.
    pub categories: Vec<String>,
    pub colors: Vec<String>,
    /// Categories treated as traversable ground.
    pub floor_labels: Vec<String>,
}

impl Default for VocabConfig {
    fn default() -> Self {
        let s = |v: &[&str]| v.iter().map(|s| s.to_string()).collect();
        Self {
            categories: s(&[
                "floor", "wall", "chair", "table", "sofa", "bed", "cabinet", "plant", "toilet",
                "tv", "kitchen",
            ]),
            colors: s(&[
                "gray", "white", "black", "red", "yellow", "blue", "green", "brown",
            ]),
            floor_labels: s(&["floor"]),
        }
    }
}

impl VocabConfig {
    pub fn category_vocab(&self) -> Result<Vocabulary> {
        Vocabulary::new(self.categories.clone(), VocabKind::Category)
    }

    pub fn color_vocab(&self) -> Result<Vocabulary> {
        Vocabulary::new(self.colors.clone(), VocabKind::Color)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Subgoal success radius around the target.
    pub success_m: f64,
    /// Masks whose winning label score is below this are marked unknown.
    pub reject_score: f64,
    pub inflation_m: f64,
    /// Distance kept from an object's box for side and contour targets.
    pub clearance_m: f64,
    pub max_depth_m: f64,
    pub min_mask_area: usize,
    /// Search radius for the nearest traversable cell around a goal.
    pub approach_radius_m: f64,
    pub side_tolerance_deg: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            success_m: 1.0,
            reject_score: 0.3,
            inflation_m: 0.15,
            clearance_m: 0.5,
            max_depth_m: 10.0,
            min_mask_area: 20,
            approach_radius_m: 2.0,
            side_tolerance_deg: 15.0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub grid: GridConfig,
    pub vocabulary: VocabConfig,
    pub thresholds: Thresholds,
}

impl EngineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: EngineConfig = toml::from_str(text)
            .map_err(|e| Error::invalid("configuration", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::format(path, e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.spec::<f64>().validate()?;
        let cats = self.vocabulary.category_vocab()?;
        self.vocabulary.color_vocab()?;
        for f in &self.vocabulary.floor_labels {
            if cats.index_of(f).is_none() {
                return Err(Error::invalid(
                    "configuration",
                    format!("floor label {f:?} is not in the category vocabulary"),
                ));
            }
        }
        let t = &self.thresholds;
        if t.clearance_m <= t.inflation_m {
            return Err(Error::invalid(
                "configuration",
                "clearance must exceed the inflation radius",
            ));
        }
        if !(t.success_m > 0.0 && t.max_depth_m > 0.0 && t.inflation_m >= 0.0) {
            return Err(Error::invalid("configuration", "thresholds must be positive"));
        }
        if !(0.0..=1.0).contains(&t.reject_score) {
            return Err(Error::invalid("configuration", "reject score must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Indices of the floor labels in the category vocabulary.
    pub fn floor_label_ids(&self) -> Vec<u32> {
        let cats = &self.vocabulary.categories;
        self.vocabulary
            .floor_labels
            .iter()
            .filter_map(|f| cats.iter().position(|c| c == f).map(|i| i as u32))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_round_trips() {
        let cfg = EngineConfig::default();
        cfg.validate().unwrap();
        let back = EngineConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(cfg.thresholds.success_m, 1.0);
        assert_eq!(cfg.thresholds.reject_score, 0.3);
        assert_eq!(cfg.thresholds.inflation_m, 0.15);
        assert_eq!(cfg.thresholds.clearance_m, 0.5);
        assert_eq!(cfg.grid.robot_height_m, 1.5);
        assert_eq!(cfg.grid.cell_size_m, 0.05);
    }

    #[test]
    fn partial_toml_fills_defaults() {
        let cfg = EngineConfig::from_toml_str("[grid]\nrows = 40\ncols = 60\n").unwrap();
        assert_eq!(cfg.grid.rows, 40);
        assert_eq!(cfg.grid.cell_size_m, 0.05);
        assert_eq!(cfg.floor_label_ids(), vec![0]);
    }

    #[test]
    fn rejects_unknown_floor_label_and_bad_clearance() {
        let err = EngineConfig::from_toml_str("[vocabulary]\nfloor_labels = [\"lava\"]\n");
        assert!(err.is_err());
        let err = EngineConfig::from_toml_str("[thresholds]\nclearance_m = 0.1\n");
        assert!(err.is_err());
    }
}
