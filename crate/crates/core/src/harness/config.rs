//! Flat key/value experiment configuration.
//!
//! Keys may sit at the top of the file or under a single `[experiment]`
//! section. Lists are comma separated. Sample sizes accept plain integers,
//! `2^k`, and ranges `2^a..2^b` (every power) or `2^a..2^b:s` (every `s`-th).

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;

use crate::density_tests::KernelKind;
use crate::error::{Error, Result};
use crate::priors::{DiagGaussianPrior, PriorSpec, ReleasedIbm, UniformSeriesPrior};
use crate::space::{NormIndex, TestProfile};
use crate::wavelet::Basis;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    WhiteNoise,
    Histogram,
    TestPower,
    MomentCheck,
    SmallBall,
    PriorSample,
}

impl Model {
    pub const ALL: [Model; 6] = [
        Self::WhiteNoise,
        Self::Histogram,
        Self::TestPower,
        Self::MomentCheck,
        Self::SmallBall,
        Self::PriorSample,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Self::WhiteNoise => "white-noise",
            Self::Histogram => "histogram",
            Self::TestPower => "test-power",
            Self::MomentCheck => "moment-check",
            Self::SmallBall => "small-ball",
            Self::PriorSample => "prior-sample",
        }
    }

    fn default_grid_level(&self) -> u32 {
        match self {
            Self::WhiteNoise => 14,
            Self::Histogram => 12,
            Self::TestPower | Self::MomentCheck | Self::PriorSample => 10,
            Self::SmallBall => 8,
        }
    }

    fn uses_n_list(&self) -> bool {
        !matches!(self, Self::SmallBall | Self::PriorSample)
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.tag() == s.trim())
            .ok_or_else(|| config(format!("unknown model `{s}`")))
    }
}

/// The null density used by the testing experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NullDensity {
    Uniform,
    /// `to_density` of the configured test function.
    TestFunction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: Model,
    pub alpha: f64,
    pub r: Vec<NormIndex>,
    pub n_list: Vec<u64>,
    pub reps: usize,
    pub seed: u64,
    pub gamma_log_power: f64,
    pub basis: Basis,
    /// Output stem; `.csv` and `.json` are appended.
    pub output_path: PathBuf,
    pub bound: f64,
    pub grid_level: u32,
    pub j0: Option<u32>,
    pub profile: TestProfile,
    pub radius_multiplier: f64,
    pub c_res: f64,
    pub truncation_extra: u32,
    pub eps_list: Vec<f64>,
    pub j_list: Vec<u32>,
    pub kernel: KernelKind,
    pub density: NullDensity,
    pub quantile: f64,
    pub calibration_reps: Option<usize>,
    pub distance_multiplier: f64,
    pub prior: Option<String>,
    pub c: Option<f64>,
    pub jmax: Option<u32>,
    pub released: bool,
    pub workers: Option<usize>,
}

const KEYS: &[&str] = &[
    "model",
    "alpha",
    "r",
    "n_list",
    "reps",
    "seed",
    "gamma_log_power",
    "basis",
    "output_path",
    "bound",
    "grid_level",
    "j0",
    "profile",
    "radius_multiplier",
    "c_res",
    "truncation_extra",
    "eps_list",
    "j_list",
    "kernel",
    "density",
    "quantile",
    "calibration_reps",
    "distance_multiplier",
    "prior",
    "c",
    "jmax",
    "released",
    "workers",
];

fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| config(format!("cannot parse `{key} = {value}`")))
}

fn list<T>(value: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(item)
        .collect()
}

fn power_of_two(token: &str) -> Result<u32> {
    token
        .trim()
        .strip_prefix("2^")
        .and_then(|e| e.trim().parse().ok())
        .filter(|e| *e < 63)
        .ok_or_else(|| config(format!("expected `2^k`, got `{token}`")))
}

/// Parses a sample-size list such as `1024, 2^12, 2^14..2^20:2`.
pub fn parse_n_list(value: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for token in value.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some((lo, hi)) = token.split_once("..") {
            let (hi, step) = match hi.split_once(':') {
                Some((h, s)) => (h, parse::<u32>("n_list step", s)?),
                None => (hi, 1),
            };
            let (a, b) = (power_of_two(lo)?, power_of_two(hi)?);
            if step == 0 || a > b {
                return Err(config(format!("bad range `{token}`")));
            }
            out.extend((a..=b).step_by(step as usize).map(|k| 1u64 << k));
        } else if token.starts_with("2^") {
            out.push(1u64 << power_of_two(token)?);
        } else {
            out.push(parse("n_list", token)?);
        }
    }
    Ok(out)
}

/// Parses a level list such as `2, 3, 4` or `2..8`.
pub fn parse_j_list(value: &str) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for token in value.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match token.split_once("..") {
            Some((a, b)) => {
                let (a, b): (u32, u32) = (parse("j_list", a)?, parse("j_list", b)?);
                out.extend(a..=b);
            }
            None => out.push(parse("j_list", token)?),
        }
    }
    Ok(out)
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_str_ini(&text)
    }

    pub fn from_str_ini(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| config(format!("malformed config: {e}")))?;
        let mut map = BTreeMap::new();
        for (section, props) in ini.iter() {
            if let Some(name) = section {
                if name != "experiment" {
                    return Err(config(format!("unknown section [{name}]")));
                }
            }
            for (k, v) in props.iter() {
                let key = k.trim().to_ascii_lowercase();
                if !KEYS.contains(&key.as_str()) {
                    return Err(config(format!("unknown key `{k}`")));
                }
                if map.insert(key, v.trim().to_string()).is_some() {
                    return Err(config(format!("duplicate key `{k}`")));
                }
            }
        }
        Self::from_map(&map)
    }

    fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        let get = |k: &str| map.get(k).map(String::as_str);
        let model: Model = get("model")
            .ok_or_else(|| config("missing key `model`"))?
            .parse()?;
        let alpha: f64 = parse(
            "alpha",
            get("alpha").ok_or_else(|| config("missing key `alpha`"))?,
        )?;
        let mut r = match get("r") {
            Some(v) => list(v, |t| {
                t.parse::<NormIndex>().map_err(|e| config(e.to_string()))
            })?,
            None if matches!(model, Model::SmallBall | Model::PriorSample) => {
                vec![NormIndex::Infinity]
            }
            None => return Err(config(format!("model {model} needs key `r`"))),
        };
        // outputs are ordered by r
        r.sort_by(|a, b| a.as_f64().total_cmp(&b.as_f64()));
        r.dedup();
        let n_list = match get("n_list") {
            Some(v) => parse_n_list(v)?,
            None => Vec::new(),
        };
        let opt = |k: &str| -> Result<Option<f64>> { get(k).map(|v| parse(k, v)).transpose() };
        let opt_u32 = |k: &str| -> Result<Option<u32>> { get(k).map(|v| parse(k, v)).transpose() };
        let cfg = Self {
            model,
            alpha,
            r,
            n_list,
            reps: get("reps")
                .map(|v| parse("reps", v))
                .transpose()?
                .unwrap_or(100),
            seed: get("seed")
                .map(|v| parse("seed", v))
                .transpose()?
                .unwrap_or(0),
            gamma_log_power: opt("gamma_log_power")?.unwrap_or(0.0),
            basis: get("basis")
                .map(|v| v.parse().map_err(|e: Error| config(e.to_string())))
                .transpose()?
                .unwrap_or(Basis::haar()),
            output_path: PathBuf::from(get("output_path").unwrap_or(&format!("results/{model}"))),
            bound: opt("bound")?.unwrap_or(1.0),
            grid_level: opt_u32("grid_level")?.unwrap_or(model.default_grid_level()),
            j0: opt_u32("j0")?,
            profile: get("profile")
                .map(|v| v.parse().map_err(|e: Error| config(e.to_string())))
                .transpose()?
                .unwrap_or(TestProfile::Dense),
            radius_multiplier: opt("radius_multiplier")?.unwrap_or(1.0),
            c_res: opt("c_res")?.unwrap_or(1.0),
            truncation_extra: opt_u32("truncation_extra")?.unwrap_or(2),
            eps_list: match get("eps_list") {
                Some(v) => list(v, |t| parse("eps_list", t))?,
                None => Vec::new(),
            },
            j_list: match get("j_list") {
                Some(v) => parse_j_list(v)?,
                None => Vec::new(),
            },
            kernel: get("kernel")
                .map(|v| v.parse().map_err(|e: Error| config(e.to_string())))
                .transpose()?
                .unwrap_or(KernelKind::HaarProjection),
            density: match get("density").unwrap_or("uniform") {
                "uniform" => NullDensity::Uniform,
                "test-function" => NullDensity::TestFunction,
                other => {
                    return Err(config(format!(
                        "unknown density `{other}` (uniform or test-function)"
                    )))
                }
            },
            quantile: opt("quantile")?.unwrap_or(0.99),
            calibration_reps: get("calibration_reps")
                .map(|v| parse("calibration_reps", v))
                .transpose()?,
            distance_multiplier: opt("distance_multiplier")?.unwrap_or(10.0),
            prior: get("prior").map(str::to_string),
            c: opt("c")?,
            jmax: opt_u32("jmax")?,
            released: get("released")
                .map(|v| parse("released", v))
                .transpose()?
                .unwrap_or(true),
            workers: get("workers").map(|v| parse("workers", v)).transpose()?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(config(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if self.reps == 0 {
            return Err(config("reps must be >= 1"));
        }
        if self.model.uses_n_list() {
            if self.n_list.is_empty() {
                return Err(config(format!("model {} needs key `n_list`", self.model)));
            }
            if self.n_list.windows(2).any(|w| w[1] <= w[0]) {
                return Err(config("n_list must be strictly increasing"));
            }
            if let Some(n) = self.n_list.iter().find(|n| !n.is_power_of_two() || **n < 4) {
                return Err(config(format!(
                    "n_list entries must be powers of two >= 4, got {n}"
                )));
            }
        }
        if self.gamma_log_power < 0.0 {
            return Err(config("gamma_log_power must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.quantile) {
            return Err(config("quantile must lie in [0,1]"));
        }
        if self.workers == Some(0) {
            return Err(config("workers must be >= 1"));
        }
        match self.model {
            Model::Histogram if self.alpha > 1.0 => {
                return Err(config("the histogram prior needs alpha <= 1"));
            }
            Model::SmallBall if self.eps_list.is_empty() => {
                return Err(config("model small-ball needs key `eps_list`"));
            }
            Model::MomentCheck if self.j_list.is_empty() => {
                return Err(config("model moment-check needs key `j_list`"));
            }
            Model::PriorSample => {
                self.prior_spec()?;
            }
            _ => {}
        }
        Ok(())
    }

    /// Warnings that do not stop a run.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.model == Model::Histogram && self.alpha <= 0.5 {
            if let Some(r) = self.r.iter().find(|r| **r != NormIndex::Finite(1.0)) {
                out.push(format!(
                    "histogram rate for r = {r} is only guaranteed when alpha > 1/2 (alpha = {})",
                    self.alpha
                ));
            }
        }
        out
    }

    pub fn csv_path(&self) -> PathBuf {
        append_extension(&self.output_path, "csv")
    }

    pub fn json_path(&self) -> PathBuf {
        append_extension(&self.output_path, "json")
    }

    /// All settings as JSON, after defaults are applied.
    pub fn echo(&self) -> serde_json::Value {
        serde_json::json!({
            "model": self.model.tag(),
            "alpha": self.alpha,
            "r": self.r.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "n_list": self.n_list,
            "reps": self.reps,
            "seed": self.seed,
            "gamma_log_power": self.gamma_log_power,
            "basis": self.basis.to_string(),
            "output_path": self.output_path.display().to_string(),
            "bound": self.bound,
            "grid_level": self.grid_level,
            "j0": self.coarse_level(),
            "profile": self.profile.to_string(),
            "radius_multiplier": self.radius_multiplier,
            "c_res": self.c_res,
            "truncation_extra": self.truncation_extra,
            "eps_list": self.eps_list,
            "j_list": self.j_list,
            "kernel": self.kernel.to_string(),
            "density": match self.density {
                NullDensity::Uniform => "uniform",
                NullDensity::TestFunction => "test-function",
            },
            "quantile": self.quantile,
            "calibration_reps": self.calibration_reps,
            "distance_multiplier": self.distance_multiplier,
            "prior": self.prior,
            "c": self.c,
            "jmax": self.jmax,
            "released": self.released,
        })
    }

    /// Coarse level for coefficient trees: the `j0` key or the basis default.
    pub fn coarse_level(&self) -> u32 {
        self.j0.unwrap_or_else(|| self.basis.default_coarse_level())
    }

    /// The prior described by the `prior` key and its companions.
    pub fn prior_spec(&self) -> Result<PriorSpec> {
        let name = self
            .prior
            .as_deref()
            .ok_or_else(|| config("model prior-sample needs key `prior`"))?;
        let jmax = self.jmax.unwrap_or(self.grid_level);
        let bad = |e: Error| config(e.to_string());
        Ok(match name {
            "uniform-series" => PriorSpec::UniformSeries(
                UniformSeriesPrior::new(
                    self.basis,
                    self.coarse_level(),
                    self.alpha,
                    self.bound,
                    jmax,
                )
                .map_err(bad)?,
            ),
            "diag-gaussian" => PriorSpec::DiagGaussian(
                DiagGaussianPrior::new(self.basis, self.coarse_level().max(1), self.alpha, jmax)
                    .map_err(bad)?,
            ),
            "dirichlet-histogram" => PriorSpec::DirichletHistogram {
                level: *self
                    .j_list
                    .first()
                    .ok_or_else(|| config("dirichlet-histogram needs `j_list` (one level)"))?,
            },
            "released-ibm" => PriorSpec::ReleasedIbm {
                process: ReleasedIbm::new(self.alpha, self.grid_level, self.released)
                    .map_err(bad)?,
                c: self.c,
            },
            other => return Err(config(format!("unknown prior `{other}`"))),
        })
    }
}

fn append_extension(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Key/value pairs that reproduce `spec` when written into a config.
pub fn prior_config_pairs(spec: &PriorSpec) -> Vec<(&'static str, String)> {
    let mut out = vec![("prior", spec.name().to_string())];
    match spec {
        PriorSpec::UniformSeries(p) => out.extend([
            ("alpha", p.alpha().to_string()),
            ("bound", p.bound().to_string()),
            ("basis", p.basis().to_string()),
            ("j0", p.j0().to_string()),
            ("jmax", p.jmax().to_string()),
        ]),
        PriorSpec::DiagGaussian(p) => out.extend([
            ("alpha", p.alpha().to_string()),
            ("basis", p.basis().to_string()),
            ("j0", p.j0().to_string()),
            ("jmax", p.jmax().to_string()),
        ]),
        PriorSpec::DirichletHistogram { level } => out.push(("j_list", level.to_string())),
        PriorSpec::ReleasedIbm { process, c } => {
            out.extend([
                ("alpha", process.alpha().to_string()),
                ("grid_level", process.grid_level().to_string()),
                ("released", process.released().to_string()),
            ]);
            if let Some(c) = c {
                out.push(("c", c.to_string()));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_list_forms() {
        assert_eq!(parse_n_list("1024, 2^11").unwrap(), vec![1024, 2048]);
        assert_eq!(
            parse_n_list("2^10..2^13").unwrap(),
            vec![1024, 2048, 4096, 8192]
        );
        assert_eq!(
            parse_n_list("2^10..2^14:2").unwrap(),
            vec![1024, 4096, 16384]
        );
        assert!(parse_n_list("2^x").is_err());
        assert!(parse_n_list("2^12..2^10").is_err());
        assert_eq!(parse_j_list("2..4, 7").unwrap(), vec![2, 3, 4, 7]);
    }

    #[test]
    fn minimal_white_noise() {
        let cfg = ExperimentConfig::from_str_ini(
            "model = white-noise\nalpha = 0.75\nr = inf, 1, 2, 1\nn_list = 2^10..2^12\nreps = 5\n",
        )
        .unwrap();
        assert_eq!(
            cfg.r,
            vec![
                NormIndex::Finite(1.0),
                NormIndex::Finite(2.0),
                NormIndex::Infinity
            ]
        );
        assert_eq!(cfg.n_list, vec![1024, 2048, 4096]);
        assert_eq!(cfg.grid_level, 14);
        assert_eq!(cfg.csv_path(), PathBuf::from("results/white-noise.csv"));
    }

    #[test]
    fn section_and_errors() {
        let ok = "[experiment]\nmodel = histogram\nalpha = 0.75\nr = 1\nn_list = 2^10..2^12\n";
        assert!(ExperimentConfig::from_str_ini(ok).is_ok());
        let cases = [
            "model = white-noise\nalpha = 1\nr = 2\nn_list = 2^10\nmystery = 3\n",
            "[other]\nmodel = white-noise\n",
            "model = nope\nalpha = 1\n",
            "model = white-noise\nalpha = 1\nr = 2\nn_list = 2048, 1024\n",
            "model = white-noise\nalpha = 1\nr = 2\nn_list = 1000\n",
            "model = white-noise\nalpha = 1\nr = 2\nn_list = 1024\nreps = 0\n",
            "model = histogram\nalpha = 1.5\nr = 1\nn_list = 1024\n",
            "model = small-ball\nalpha = 0.5\n",
            "model = white-noise\nalpha = 1\nn_list = 1024\n",
        ];
        for text in cases {
            assert!(
                matches!(ExperimentConfig::from_str_ini(text), Err(Error::Config(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn histogram_warning() {
        let cfg = ExperimentConfig::from_str_ini(
            "model = histogram\nalpha = 0.4\nr = 1, 2\nn_list = 2^10..2^12\n",
        )
        .unwrap();
        assert_eq!(cfg.warnings().len(), 1);
    }

    #[test]
    fn prior_spec_round_trip() {
        let texts = [
            "model = prior-sample\nprior = uniform-series\nalpha = 1\nbound = 2\nbasis = db4\njmax = 9\n",
            "model = prior-sample\nprior = diag-gaussian\nalpha = 0.5\nbasis = haar\nj0 = 1\njmax = 8\n",
            "model = prior-sample\nprior = dirichlet-histogram\nalpha = 1\nj_list = 4\n",
            "model = prior-sample\nprior = released-ibm\nalpha = 1.5\nc = 3\ngrid_level = 9\n",
        ];
        for text in texts {
            let spec = ExperimentConfig::from_str_ini(text)
                .unwrap()
                .prior_spec()
                .unwrap();
            let mut rebuilt = String::from("model = prior-sample\n");
            for (k, v) in prior_config_pairs(&spec) {
                rebuilt.push_str(&format!("{k} = {v}\n"));
            }
            if !rebuilt.contains("alpha") {
                rebuilt.push_str("alpha = 1\n");
            }
            let again = ExperimentConfig::from_str_ini(&rebuilt)
                .unwrap()
                .prior_spec()
                .unwrap();
            assert_eq!(spec, again, "{rebuilt}");
        }
    }
}
