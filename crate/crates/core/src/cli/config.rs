use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::eigensolver::{GridPolicy, DEFAULT_MIN_NODES, DEFAULT_RATIO};
use crate::error::{invalid, Result};
use crate::metric::WarpParams;
use crate::predictor::DEFAULT_TOLERANCE;

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum Num {
    Int(i64),
    Float(f64),
}

impl From<Num> for f64 {
    fn from(n: Num) -> f64 {
        match n {
            Num::Int(i) => i as f64,
            Num::Float(x) => x,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Degrees {
    One(usize),
    Many(Vec<usize>),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    r_min: Option<Num>,
    ratio: Option<Num>,
    min_nodes: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(alias = "N")]
    n: Option<usize>,
    p: Option<Degrees>,
    a: Option<Num>,
    b: Option<Num>,
    epsilon: Option<Num>,
    c: Option<Num>,
    kmax: Option<usize>,
    ladder: Option<Vec<Num>>,
    cutoff: Option<Num>,
    tolerance: Option<Num>,
    out: Option<PathBuf>,
    #[serde(default)]
    grid: GridFile,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub p: Option<usize>,
    pub kmax: Option<usize>,
    pub ladder: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub dim: Option<usize>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub epsilon: Option<f64>,
    pub c: Option<f64>,
    pub cutoff: Option<f64>,
    pub tolerance: Option<f64>,
    pub min_nodes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSettings {
    pub r_min: f64,
    pub ratio: f64,
    pub min_nodes: usize,
}

/// A validated `compute` configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub params: WarpParams,
    pub degrees: Vec<usize>,
    pub kmax: usize,
    pub ladder: Vec<f64>,
    pub cutoff: f64,
    pub tolerance: f64,
    #[serde(skip)]
    pub out: PathBuf,
    pub grid: GridSettings,
}

impl RunConfig {
    pub fn from_toml(text: &str, overrides: &Overrides) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| invalid(format!("config: {}", e.message())))?;
        Self::build(file, overrides)
    }

    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text, overrides)
    }

    fn build(file: ConfigFile, ov: &Overrides) -> Result<Self> {
        let dim = ov.dim.or(file.n).ok_or_else(|| invalid("config: missing n"))?;
        let a = ov.a.or(file.a.map(f64::from)).ok_or_else(|| invalid("config: missing a"))?;
        let b = ov.b.or(file.b.map(f64::from)).ok_or_else(|| invalid("config: missing b"))?;
        let epsilon = ov.epsilon.or(file.epsilon.map(f64::from)).unwrap_or(1.0);
        let c = ov.c.or(file.c.map(f64::from)).unwrap_or(2.0);
        let params = WarpParams::new(dim, a, b, epsilon, c)?;
        let degrees = match (ov.p, file.p) {
            (Some(p), _) => vec![p],
            (None, Some(Degrees::One(p))) => vec![p],
            (None, Some(Degrees::Many(ps))) => ps,
            (None, None) => (0..dim).collect(),
        };
        if degrees.is_empty() {
            return Err(invalid("nothing to compute: empty list of degrees"));
        }
        if let Some(&p) = degrees.iter().find(|&&p| p >= dim) {
            return Err(invalid(format!("degree p = {p} has no coclosed modes for N = {dim}")));
        }
        let ladder: Vec<f64> = match (&ov.ladder, file.ladder) {
            (Some(l), _) => l.clone(),
            (None, Some(l)) => l.into_iter().map(f64::from).collect(),
            (None, None) => vec![40.0, 80.0, 160.0],
        };
        if ladder.len() < 3 || !ladder.windows(2).all(|w| w[1] > w[0]) || !(ladder[0] > 0.0) {
            return Err(invalid("ladder needs at least 3 increasing positive lengths"));
        }
        let grid = GridSettings {
            r_min: file.grid.r_min.map_or(epsilon * 1e-3, f64::from),
            ratio: file.grid.ratio.map_or(DEFAULT_RATIO, f64::from),
            min_nodes: ov.min_nodes.or(file.grid.min_nodes).unwrap_or(DEFAULT_MIN_NODES),
        };
        if grid.r_min > epsilon / 10.0 {
            return Err(invalid(format!("grid.r_min = {} must not exceed epsilon/10", grid.r_min)));
        }
        if grid.min_nodes < 64 {
            return Err(invalid("grid.min_nodes must be at least 64"));
        }
        let config = Self {
            params,
            degrees,
            kmax: ov.kmax.or(file.kmax).unwrap_or(2),
            ladder,
            cutoff: ov.cutoff.or(file.cutoff.map(f64::from)).unwrap_or(50.0),
            tolerance: ov.tolerance.or(file.tolerance.map(f64::from)).unwrap_or(DEFAULT_TOLERANCE),
            out: ov.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("out")),
            grid,
        };
        config.policy()?;
        if !(config.tolerance > 0.0) || !config.cutoff.is_finite() {
            return Err(invalid("tolerance must be positive and cutoff finite"));
        }
        Ok(config)
    }

    pub fn policy(&self) -> Result<GridPolicy> {
        GridPolicy { r_min: self.grid.r_min, ratio: self.grid.ratio, spacing: self.ladder[0] / self.grid.min_nodes as f64 }
            .validated()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gets_defaults() {
        let cfg = RunConfig::from_toml("n = 3\na = -1\nb = -1.0\np = 0\n", &Overrides::default()).unwrap();
        assert_eq!(cfg.degrees, vec![0]);
        assert_eq!(cfg.ladder, vec![40.0, 80.0, 160.0]);
        assert_eq!(cfg.kmax, 2);
        assert_eq!(cfg.grid.min_nodes, 4096);
        assert_eq!(cfg.params.a, -1.0);
    }

    #[test]
    fn flags_win() {
        let ov = Overrides {
            p: Some(1),
            kmax: Some(0),
            ladder: Some(vec![1.0, 2.0, 3.0]),
            out: Some("x".into()),
            b: Some(-0.5),
            ..Overrides::default()
        };
        let cfg = RunConfig::from_toml("n = 4\na = -2\nb = 1\np = [0, 2]\nkmax = 5\nout = \"y\"\n", &ov).unwrap();
        assert_eq!(cfg.degrees, vec![1]);
        assert_eq!(cfg.kmax, 0);
        assert_eq!(cfg.ladder, vec![1.0, 2.0, 3.0]);
        assert_eq!(cfg.out, PathBuf::from("x"));
        assert_eq!((cfg.params.a, cfg.params.b), (-2.0, -0.5));
    }

    #[test]
    fn rejects_bad_files() {
        let ov = Overrides::default();
        assert!(RunConfig::from_toml("n = 3\na = -1\nb = 1\np = []\n", &ov).is_err());
        assert!(RunConfig::from_toml("n = 3\na = -1\nb = 1\np = 3\n", &ov).is_err());
        assert!(RunConfig::from_toml("n = 3\na = 0\nb = 1\n", &ov).is_err());
        assert!(RunConfig::from_toml("n = 3\na = -1\nb = 1\nladder = [10, 20]\n", &ov).is_err());
        assert!(RunConfig::from_toml("n = 3\na = -1\nb = 1\ntypo = 1\n", &ov).is_err());
        assert!(RunConfig::from_toml("n = 3\na = -1\n", &ov).is_err());
    }
}
