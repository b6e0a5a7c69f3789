use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Length unit declared once per run and echoed in every output.
/// No conversion is ever applied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Mm,
    M,
    Unitless,
}

impl fmt::Display for Units {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Units::Mm => write!(f, "mm"),
            Units::M => write!(f, "m"),
            Units::Unitless => write!(f, "unitless"),
        }
    }
}

impl FromStr for Units {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mm" => Ok(Units::Mm),
            "m" => Ok(Units::M),
            "unitless" => Ok(Units::Unitless),
            other => Err(format!("unknown units `{other}` (expected mm, m or unitless)")),
        }
    }
}
