//! Bundled figure recipes and parameter presets. The JSON files under
//! `figures/` and `configs/` are compiled in, so the binary is
//! self-contained; editing a file changes the recipe.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::params::ParamConfig;
use crate::plot::PlotKind;
use crate::sweep::SweepSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FigureId {
    Fig2a,
    Fig2b,
    Fig3,
    Fig4a,
    Fig4b,
    Fig5,
}

impl FigureId {
    pub const ALL: [FigureId; 6] = [
        FigureId::Fig2a,
        FigureId::Fig2b,
        FigureId::Fig3,
        FigureId::Fig4a,
        FigureId::Fig4b,
        FigureId::Fig5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig2a => "fig2a",
            FigureId::Fig2b => "fig2b",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4a => "fig4a",
            FigureId::Fig4b => "fig4b",
            FigureId::Fig5 => "fig5",
        }
    }

    fn source(self) -> &'static str {
        match self {
            FigureId::Fig2a => include_str!("../figures/fig2a.json"),
            FigureId::Fig2b => include_str!("../figures/fig2b.json"),
            FigureId::Fig3 => include_str!("../figures/fig3.json"),
            FigureId::Fig4a => include_str!("../figures/fig4a.json"),
            FigureId::Fig4b => include_str!("../figures/fig4b.json"),
            FigureId::Fig5 => include_str!("../figures/fig5.json"),
        }
    }

    pub fn spec(self) -> Result<SweepSpec> {
        let spec: SweepSpec = serde_json::from_str(self.source()).map_err(|source| Error::Json {
            path: format!("figures/{}.json", self.name()),
            source,
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn plot_kind(self) -> PlotKind {
        match self {
            FigureId::Fig3 | FigureId::Fig5 => PlotKind::Contour,
            _ => PlotKind::Lines,
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| {
                let known: Vec<_> = FigureId::ALL.iter().map(|f| f.name()).collect();
                Error::param("figure", format!("unknown figure `{s}` (known: {})", known.join(", ")))
            })
    }
}

/// Names accepted by [`preset`].
pub const PRESETS: [&str; 2] = ["table1", "figure-base"];

/// A bundled parameter file: `table1` (PHYSICAL, laboratory values) or
/// `figure-base` (EFFECTIVE, the shared base point of the figures).
pub fn preset(name: &str) -> Result<ParamConfig> {
    let (file, text) = match name {
        "table1" => ("configs/table1.json", include_str!("../configs/table1.json")),
        "figure-base" => ("configs/figure_base.json", include_str!("../configs/figure_base.json")),
        other => {
            return Err(Error::param(
                "preset",
                format!("unknown preset `{other}` (known: {})", PRESETS.join(", ")),
            ))
        }
    };
    ParamConfig::from_json_str(text).map_err(|source| Error::Json {
        path: file.to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{EffectiveInput, PhysicalParams};

    #[test]
    fn every_bundled_spec_parses_and_validates() {
        for id in FigureId::ALL {
            let spec = id.spec().unwrap();
            let two_d = spec.axis2.is_some();
            assert_eq!(two_d, id.plot_kind() == PlotKind::Contour, "{id}");
        }
    }

    #[test]
    fn presets_match_the_builtin_constructors() {
        assert_eq!(preset("table1").unwrap(), ParamConfig::Physical(PhysicalParams::table1()));
        assert_eq!(
            preset("figure-base").unwrap(),
            ParamConfig::Effective(EffectiveInput::figure_base())
        );
    }

    #[test]
    fn figure_bases_differ_only_in_their_overrides() {
        let base = ParamConfig::Effective(EffectiveInput::figure_base());
        for id in [FigureId::Fig2a, FigureId::Fig3, FigureId::Fig5] {
            assert_eq!(id.spec().unwrap().base, base, "{id}");
        }
        let ParamConfig::Effective(b) = FigureId::Fig4b.spec().unwrap().base else {
            panic!("fig4b should be EFFECTIVE")
        };
        assert_eq!(b.delta_at, -2.0 * b.omega_m);
        let ParamConfig::Effective(b) = FigureId::Fig2b.spec().unwrap().base else {
            panic!("fig2b should be EFFECTIVE")
        };
        assert_eq!(b.temperature, 0.1);
    }

    #[test]
    fn unknown_names_are_rejected() {
        assert!("fig9".parse::<FigureId>().is_err());
        assert!(preset("nope").unwrap_err().to_string().contains("table1"));
        assert_eq!("fig4b".parse::<FigureId>().unwrap(), FigureId::Fig4b);
    }
}
