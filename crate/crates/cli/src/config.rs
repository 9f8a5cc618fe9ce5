use std::fs;
use std::path::Path;

use fibgap::{Error, FrequencyGrid, SystemSpec};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::GridArgs;

/// A system configuration file: a `SystemSpec` plus an optional default grid.
pub struct RunConfig {
    pub spec: SystemSpec,
    pub grid: Option<FrequencyGrid>,
    pub sha256: String,
}

#[derive(Deserialize)]
struct Extras {
    grid: Option<FrequencyGrid>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let bytes = fs::read(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let text = std::str::from_utf8(&bytes).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let spec = SystemSpec::from_json_str(text)?;
        let extras: Extras = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(g) = &extras.grid {
            g.validate()?;
        }
        let sha256 = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        Ok(RunConfig {
            spec,
            grid: extras.grid,
            sha256,
        })
    }

    /// Command-line grid flags override the config's grid field by field.
    pub fn grid(&self, args: &GridArgs) -> Result<FrequencyGrid, Error> {
        let base = self.grid;
        let omega_min = args.omega_min.or(base.map(|g| g.omega_min)).unwrap_or(0.0);
        let omega_max = args.omega_max.or(base.map(|g| g.omega_max)).ok_or_else(|| {
            Error::Config("no frequency range: pass --omega-max or add a \"grid\" to the config".into())
        })?;
        let points = args.points.or(base.map(|g| g.points)).unwrap_or(1000);
        FrequencyGrid::new(omega_min, omega_max, points)
    }
}
