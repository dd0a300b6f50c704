//! Run configuration loaded from JSON. Every section and field is optional;
//! missing values take their defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::grasping::Gripper;
use crate::picking::PickingPolicy;
use crate::planner::PlannerConfig;
use crate::sim::SimParams;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub gripper: Gripper,
    pub sim: SimParams,
    pub planner: PlannerConfig,
    pub picking: PickingPolicy,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let c: Config = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.gripper.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.sim.validate(&self.gripper).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.planner.validate().map_err(|e| ConfigError::Invalid(e.into()))?;
        self.picking.validate().map_err(|e| ConfigError::Invalid(e.into()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_config_keeps_defaults() {
        let c = Config::from_json(r#"{"gripper": {"w_max": 0.1}, "planner": {"strategy": "RandPhys"}}"#).unwrap();
        assert_eq!(c.gripper.w_max, 0.1);
        assert_eq!(c.gripper.jaw_length, Gripper::default().jaw_length);
        assert_eq!(c.planner.strategy, crate::planner::Strategy::RandPhys);
        assert_eq!(c.sim, SimParams::default());
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(Config::from_json(r#"{"sim": {"jaw_step": 0.05}}"#).is_err());
        assert!(Config::from_json(r#"{"planner": {"n_positions": 0}}"#).is_err());
        assert!(Config::from_json(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn round_trip() {
        let c = Config::default();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(Config::from_json(&s).unwrap(), c);
    }
}
