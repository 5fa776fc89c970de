//! Plain-text (TOML) scenario files.
//!
//! ```toml
//! [bounds]
//! min_x = 0.0
//! min_y = 0.0
//! max_x = 120.0
//! max_y = 50.0
//!
//! [ue]
//! x = 42.0
//! y = 17.5
//!
//! [[bs]]
//! id = 1
//! position = { x = 50.0, y = 15.0 }
//! cell_id = 2
//! los = true
//!
//! [[scatterer]]
//! x = 12.0
//! y = 30.0
//! ```

use std::fs;
use std::path::Path;

use super::Scenario;
use crate::error::Result;

impl Scenario {
    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Parse and validate a scenario document.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_toml_string()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }
}
