//! Run configuration loaded from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::calculus::Tolerances;
use crate::error::{Error, Result};
use crate::settings::Settings;
use crate::setmap::ScaleLadder;

/// Environment variable naming a config file when `--config` is absent.
pub const CONFIG_ENV: &str = "HOLDERREG_CONFIG";
pub const MAX_GRID_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderConfig {
    pub t0: f64,
    pub theta: f64,
    pub count: usize,
}

impl LadderConfig {
    pub fn build(&self) -> Result<ScaleLadder> {
        ScaleLadder::new(self.t0, self.theta, self.count).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// Direction count in two and three dimensions.
    pub points: Option<usize>,
    /// Seed for random directions above three dimensions.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub tolerances: Tolerances,
    pub ladder: LadderConfig,
    pub radii: LadderConfig,
    pub grid: GridConfig,
    /// Worker threads; `None` uses every core.
    pub parallel: Option<usize>,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tolerances: Tolerances::default(),
            ladder: LadderConfig {
                t0: 0.1,
                theta: 0.5,
                count: 20,
            },
            radii: LadderConfig {
                t0: 0.5,
                theta: 0.5,
                count: 12,
            },
            grid: GridConfig::default(),
            parallel: None,
            output: OutputConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_owned()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.tolerances;
        for (name, v) in [
            ("eps_pos", t.eps_pos),
            ("eps_inf", t.eps_inf),
            ("converge_rel", t.converge_rel),
            ("slack", t.slack),
            ("chained_slack", t.chained_slack),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("tolerance {name} must be positive, got {v}")));
            }
        }
        if t.eps_pos >= t.eps_inf {
            return Err(Error::Config("eps_pos must be below eps_inf".into()));
        }
        self.ladder.build()?;
        self.radii.build()?;
        if let Some(points) = self.grid.points {
            if points == 0 || points > MAX_GRID_POINTS {
                return Err(Error::Config(format!("grid.points must lie in [1, {MAX_GRID_POINTS}], got {points}")));
            }
        }
        if self.parallel == Some(0) {
            return Err(Error::Config("parallel must be positive".into()));
        }
        Ok(())
    }

    /// Reads `path`, else the file named by `HOLDERREG_CONFIG`, else the
    /// defaults.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let env = std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
        match path.map(Path::to_path_buf).or(env) {
            Some(p) => {
                let text = std::fs::read_to_string(&p)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
                RunConfig::from_toml(&text)
            }
            None => Ok(RunConfig::default()),
        }
    }

    pub fn settings(&self) -> Result<Settings> {
        Ok(Settings {
            ladder: self.ladder.build()?,
            radii: self.radii.build()?,
            grid_points: self.grid.points,
            high_dim_seed: self.grid.seed,
            tol: self.tolerances,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_settings() {
        assert_eq!(RunConfig::default().settings().unwrap(), Settings::default());
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
    }

    #[test]
    fn partial_override() {
        let cfg = RunConfig::from_toml("parallel = 2\n[tolerances]\nslack = 0.1\n[grid]\npoints = 90\n").unwrap();
        assert_eq!(cfg.parallel, Some(2));
        assert_eq!(cfg.tolerances.slack, 0.1);
        assert_eq!(cfg.tolerances.eps_pos, 1e-6);
        assert_eq!(cfg.settings().unwrap().grid(2).unwrap().len(), 90);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(matches!(RunConfig::from_toml("[tolerances]\neps_pos = -1.0\n"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::from_toml("[ladder]\nt0 = 0.1\ntheta = 2.0\ncount = 5\n"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::from_toml("unknown = 1\n"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::from_toml("parallel = ["), Err(Error::Config(_))));
    }

    #[test]
    fn explicit_path_wins() {
        let dir = std::env::temp_dir().join(format!("holder-reg-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("run.toml");
        std::fs::write(&p, "parallel = 3\n").unwrap();
        assert_eq!(RunConfig::load(Some(&p)).unwrap().parallel, Some(3));
        assert!(matches!(RunConfig::load(Some(&dir.join("missing.toml"))), Err(Error::Config(_))));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
