use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical constants threaded through every computation. Defaults are natural
/// units with all constants equal to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    pub hbar: f64,
    pub mass: f64,
    pub charge: f64,
    pub c: f64,
    pub eps0: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
            charge: 1.0,
            c: 1.0,
            eps0: 1.0,
        }
    }
}

impl UnitSystem {
    pub fn new(hbar: f64, mass: f64, charge: f64, c: f64, eps0: f64) -> Result<Self> {
        let units = Self {
            hbar,
            mass,
            charge,
            c,
            eps0,
        };
        units.validate()?;
        Ok(units)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("hbar", self.hbar),
            ("mass", self.mass),
            ("charge", self.charge),
            ("c", self.c),
            ("eps0", self.eps0),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Domain(format!("{name} must be finite and > 0")));
            }
        }
        Ok(())
    }
}
