//! Sectioned `key = value` experiment configuration.
//!
//! ```text
//! # comment
//! [scenario]
//! num_vehicles = 6
//! data_size = 0.5e6, 2e6
//! [run]
//! solvers = gdmsg, ropsra
//! seeds = 1..20
//! ```
//!
//! Quantities given in dB or dBm (keys ending in `_db` / `_dbm`) are
//! converted to linear units once, at load time.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use irsmec_core::channel::{db_to_linear, dbm_to_watts};
use irsmec_core::diffusion::DecodeGrid;
use irsmec_core::nn::Activation;
use irsmec_core::scenario::Interval;
use irsmec_core::solvers::{SolverConfig, SolverKind};
use irsmec_core::SystemParams;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("[{section}] {key}: {message}")]
    Value {
        section: String,
        key: String,
        message: String,
    },
    #[error("unknown key [{section}] {key}")]
    UnknownKey { section: String, key: String },
    #[error("invalid parameter {0}")]
    Invalid(String),
    #[error("cannot read {path}: {message}")]
    Read { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub solvers: Vec<SolverKind>,
    pub seeds: Vec<u64>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            solvers: vec![
                SolverKind::Gdmsg,
                SolverKind::Dopsra,
                SolverKind::Ergops,
                SolverKind::Rpsgora,
                SolverKind::Ropsra,
            ],
            seeds: (1..=20).collect(),
            out: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentConfig {
    pub params: SystemParams,
    pub solver: SolverConfig,
    pub run: RunConfig,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                    line: idx + 1,
                    message: "unterminated section header".into(),
                })?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: idx + 1,
                message: "expected key = value".into(),
            })?;
            if section.is_empty() {
                return Err(ConfigError::Syntax {
                    line: idx + 1,
                    message: "key outside of a section".into(),
                });
            }
            cfg.set(&section, key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.params.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.solver.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.run.seeds.is_empty() {
            return Err(ConfigError::Invalid("run.seeds: need at least one seed".into()));
        }
        if self.run.solvers.is_empty() {
            return Err(ConfigError::Invalid("run.solvers: need at least one solver".into()));
        }
        Ok(())
    }

    fn set(&mut self, section: &str, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = Value { section, key, raw: value };
        let s = &mut self.params.scenario;
        let ch = &mut self.params.channel;
        let cp = &mut self.params.compute;
        let g = &mut self.params.game;
        let sv = &mut self.solver;
        match (section, key) {
            ("scenario", "num_vehicles") => s.num_vehicles = v.parse()?,
            ("scenario", "num_antennas") => s.num_antennas = v.parse()?,
            ("scenario", "num_elements") => s.num_elements = v.parse()?,
            ("scenario", "num_slots") => s.num_slots = v.parse()?,
            ("scenario", "slot_duration") => s.slot_duration = v.parse()?,
            ("scenario", "area") => s.area = v.array()?,
            ("scenario", "bs_position") => s.bs_position = v.array()?,
            ("scenario", "irs_position") => s.irs_position = v.array()?,
            ("scenario", "task_prob") => s.task_prob = v.parse()?,
            ("scenario", "data_size") => s.data_size = v.interval()?,
            ("scenario", "intensity") => s.intensity = v.interval()?,
            ("scenario", "deadline") => s.deadline = v.interval()?,
            ("scenario", "speed") => s.speed = v.interval()?,
            ("scenario", "accel") => s.accel = v.interval()?,
            ("scenario", "tx_power_dbm") => s.tx_power = dbm_to_watts(v.parse()?),
            ("scenario", "tx_power") => s.tx_power = v.parse()?,
            ("scenario" | "compute", "vehicle_freq") => cp.vehicle_freq = v.parse()?,
            ("scenario" | "compute", "vehicle_kappa") => cp.vehicle_kappa = v.parse()?,
            ("compute", "bs_max_freq") => cp.bs_max_freq = v.parse()?,
            ("compute", "bs_kappa") => cp.bs_kappa = v.parse()?,
            ("channel", "ref_pathloss_db") => ch.ref_pathloss = db_to_linear(v.parse()?),
            ("channel", "exponent_vehicle_bs") => ch.exponent_vehicle_bs = v.parse()?,
            ("channel", "exponent_vehicle_irs") => ch.exponent_vehicle_irs = v.parse()?,
            ("channel", "exponent_irs_bs") => ch.exponent_irs_bs = v.parse()?,
            ("channel", "rician_factor_db") => ch.rician_factor = db_to_linear(v.parse()?),
            ("channel", "bandwidth") => ch.bandwidth = v.parse()?,
            ("channel", "noise_dbm") => ch.noise_power = dbm_to_watts(v.parse()?),
            ("channel", "interference") => ch.interference = v.parse()?,
            ("channel", "direct_link_gain_db") => ch.direct_link_gain = db_to_linear(v.parse()?),
            ("game", "vehicle_weight") => g.vehicle_weight = v.parse()?,
            ("game", "bs_weight") => g.bs_weight = v.parse()?,
            ("game", "revenue_shift") => g.revenue_shift = v.parse()?,
            ("game", "budget") => g.budget = v.parse()?,
            ("game", "price_floor") => g.price_floor = v.parse()?,
            ("game", "unit_price") => g.unit_price = v.parse()?,
            ("gdm", "steps") => sv.gdm.steps = v.parse()?,
            ("gdm", "beta_min") => sv.gdm.beta_min = v.parse()?,
            ("gdm", "beta_max") => sv.gdm.beta_max = v.parse()?,
            ("gdm", "embed_dim") => sv.gdm.denoiser.embed_dim = v.parse()?,
            ("gdm", "hidden") => sv.gdm.denoiser.hidden = v.list()?,
            ("gdm", "activation") => sv.gdm.denoiser.activation = v.activation()?,
            ("gdm", "learning_rate") => sv.gdm.learning_rate = v.parse()?,
            ("gdm", "buffer_size") => sv.gdm.buffer_size = v.parse()?,
            ("gdm", "temperature") => sv.gdm.train.temperature = v.parse()?,
            ("gdm", "batch") => sv.gdm.train.batch = v.optional()?,
            ("gdm", "samples_per_iter") => sv.gdm.samples_per_iter = v.parse()?,
            ("gdm", "train_steps_per_iter") => sv.gdm.train_steps_per_iter = v.parse()?,
            ("solver", "max_iters") => sv.max_iters = v.parse()?,
            ("solver", "min_iters") => sv.min_iters = v.parse()?,
            ("solver", "epsilon") => sv.epsilon = v.parse()?,
            ("solver", "decode_grid") => {
                sv.decode_grid = match v.optional_list()? {
                    None => None,
                    Some(l) if l.len() == 2 => Some(DecodeGrid {
                        phase_points: l[0],
                        resource_points: l[1],
                    }),
                    Some(_) => return Err(v.error("expected `phase_points, resource_points` or `none`")),
                }
            }
            ("solver", "oracle_phase_points") => sv.oracle_grid.phase_points = v.parse()?,
            ("solver", "oracle_resource_points") => sv.oracle_grid.resource_points = v.parse()?,
            ("solver", "ppo_episodes") => sv.ppo.episodes = v.parse()?,
            ("solver", "ppo_hidden") => sv.ppo.hidden = v.list()?,
            ("solver", "ppo_learning_rate") => sv.ppo.learning_rate = v.parse()?,
            ("solver", "ppo_clip") => sv.ppo.clip = v.parse()?,
            ("solver", "ppo_gamma") => sv.ppo.gamma = v.parse()?,
            ("solver", "ppo_lambda") => sv.ppo.lambda = v.parse()?,
            ("solver", "ppo_epochs") => sv.ppo.epochs = v.parse()?,
            ("solver", "ppo_episodes_per_update") => sv.ppo.episodes_per_update = v.parse()?,
            ("solver", "ppo_init_log_std") => sv.ppo.init_log_std = v.parse()?,
            ("solver", "ppo_entropy") => sv.ppo.entropy_coef = v.parse()?,
            ("run", "solvers") => self.run.solvers = parse_solvers(value).map_err(|m| v.error(&m))?,
            ("run", "seeds") => self.run.seeds = parse_seeds(value).map_err(|m| v.error(&m))?,
            ("run", "out") => self.run.out = Some(PathBuf::from(value)),
            _ => {
                return Err(ConfigError::UnknownKey {
                    section: section.into(),
                    key: key.into(),
                })
            }
        }
        Ok(())
    }

    /// Every effective value, dB inputs shown next to their linear form.
    pub fn resolved(&self) -> String {
        let p = &self.params;
        let s = &p.scenario;
        let ch = &p.channel;
        let cp = &p.compute;
        let g = &p.game;
        let sv = &self.solver;
        let db = |x: f64| 10.0 * x.log10();
        let mut o = String::new();
        let iv = |i: &Interval| format!("{}, {}", i.min, i.max);
        let _ = writeln!(o, "[scenario]");
        let _ = writeln!(o, "num_vehicles = {}", s.num_vehicles);
        let _ = writeln!(o, "num_antennas = {}", s.num_antennas);
        let _ = writeln!(o, "num_elements = {}", s.num_elements);
        let _ = writeln!(o, "num_slots = {}", s.num_slots);
        let _ = writeln!(o, "slot_duration = {}", s.slot_duration);
        let _ = writeln!(o, "area = {}, {}", s.area[0], s.area[1]);
        let _ = writeln!(o, "bs_position = {}, {}, {}", s.bs_position[0], s.bs_position[1], s.bs_position[2]);
        let _ = writeln!(o, "irs_position = {}, {}, {}", s.irs_position[0], s.irs_position[1], s.irs_position[2]);
        let _ = writeln!(o, "task_prob = {}", s.task_prob);
        let _ = writeln!(o, "data_size = {}", iv(&s.data_size));
        let _ = writeln!(o, "intensity = {}", iv(&s.intensity));
        let _ = writeln!(o, "deadline = {}", iv(&s.deadline));
        let _ = writeln!(o, "speed = {}", iv(&s.speed));
        let _ = writeln!(o, "accel = {}", iv(&s.accel));
        let _ = writeln!(o, "tx_power_dbm = {}  # {} W", db(s.tx_power * 1e3), s.tx_power);
        let _ = writeln!(o, "vehicle_freq = {}", cp.vehicle_freq);
        let _ = writeln!(o, "vehicle_kappa = {}", cp.vehicle_kappa);
        let _ = writeln!(o, "\n[channel]");
        let _ = writeln!(o, "ref_pathloss_db = {}  # {}", db(ch.ref_pathloss), ch.ref_pathloss);
        let _ = writeln!(o, "exponent_vehicle_bs = {}", ch.exponent_vehicle_bs);
        let _ = writeln!(o, "exponent_vehicle_irs = {}", ch.exponent_vehicle_irs);
        let _ = writeln!(o, "exponent_irs_bs = {}", ch.exponent_irs_bs);
        let _ = writeln!(o, "rician_factor_db = {}  # {}", db(ch.rician_factor), ch.rician_factor);
        let _ = writeln!(o, "bandwidth = {}", ch.bandwidth);
        let _ = writeln!(o, "noise_dbm = {}  # {} W", db(ch.noise_power * 1e3), ch.noise_power);
        let _ = writeln!(o, "interference = {}", ch.interference);
        let _ = writeln!(o, "direct_link_gain_db = {}  # {}", db(ch.direct_link_gain), ch.direct_link_gain);
        let _ = writeln!(o, "\n[compute]");
        let _ = writeln!(o, "bs_max_freq = {}", cp.bs_max_freq);
        let _ = writeln!(o, "bs_kappa = {}", cp.bs_kappa);
        let _ = writeln!(o, "\n[game]");
        let _ = writeln!(o, "vehicle_weight = {}", g.vehicle_weight);
        let _ = writeln!(o, "bs_weight = {}", g.bs_weight);
        let _ = writeln!(o, "revenue_shift = {}", g.revenue_shift);
        let _ = writeln!(o, "budget = {}", g.budget);
        let _ = writeln!(o, "price_floor = {}", g.price_floor);
        let _ = writeln!(o, "unit_price = {}", g.unit_price);
        let _ = writeln!(o, "\n[gdm]");
        let _ = writeln!(o, "steps = {}", sv.gdm.steps);
        let _ = writeln!(o, "beta_min = {}", sv.gdm.beta_min);
        let _ = writeln!(o, "beta_max = {}", sv.gdm.beta_max);
        let _ = writeln!(o, "embed_dim = {}", sv.gdm.denoiser.embed_dim);
        let _ = writeln!(o, "hidden = {}", join(&sv.gdm.denoiser.hidden));
        let act = match sv.gdm.denoiser.activation {
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
        };
        let _ = writeln!(o, "activation = {act}");
        let _ = writeln!(o, "learning_rate = {}", sv.gdm.learning_rate);
        let _ = writeln!(o, "buffer_size = {}", sv.gdm.buffer_size);
        let _ = writeln!(o, "temperature = {}", sv.gdm.train.temperature);
        let _ = writeln!(o, "batch = {}", sv.gdm.train.batch.map_or("none".to_string(), |b| b.to_string()));
        let _ = writeln!(o, "samples_per_iter = {}", sv.gdm.samples_per_iter);
        let _ = writeln!(o, "train_steps_per_iter = {}", sv.gdm.train_steps_per_iter);
        let _ = writeln!(o, "\n[solver]");
        let _ = writeln!(o, "max_iters = {}", sv.max_iters);
        let _ = writeln!(o, "min_iters = {}", sv.min_iters);
        let _ = writeln!(o, "epsilon = {}", sv.epsilon);
        let grid = sv
            .decode_grid
            .map_or("none".to_string(), |g| format!("{}, {}", g.phase_points, g.resource_points));
        let _ = writeln!(o, "decode_grid = {grid}");
        let _ = writeln!(o, "oracle_phase_points = {}", sv.oracle_grid.phase_points);
        let _ = writeln!(o, "oracle_resource_points = {}", sv.oracle_grid.resource_points);
        let _ = writeln!(o, "ppo_episodes = {}", sv.ppo.episodes);
        let _ = writeln!(o, "ppo_hidden = {}", join(&sv.ppo.hidden));
        let _ = writeln!(o, "ppo_learning_rate = {}", sv.ppo.learning_rate);
        let _ = writeln!(o, "ppo_clip = {}", sv.ppo.clip);
        let _ = writeln!(o, "ppo_gamma = {}", sv.ppo.gamma);
        let _ = writeln!(o, "ppo_lambda = {}", sv.ppo.lambda);
        let _ = writeln!(o, "ppo_epochs = {}", sv.ppo.epochs);
        let _ = writeln!(o, "ppo_episodes_per_update = {}", sv.ppo.episodes_per_update);
        let _ = writeln!(o, "ppo_init_log_std = {}", sv.ppo.init_log_std);
        let _ = writeln!(o, "ppo_entropy = {}", sv.ppo.entropy_coef);
        let _ = writeln!(o, "\n[run]");
        let names: Vec<&str> = self.run.solvers.iter().map(|k| k.name()).collect();
        let _ = writeln!(o, "solvers = {}", names.join(", "));
        let _ = writeln!(o, "seeds = {}", join(&self.run.seeds));
        if let Some(out) = &self.run.out {
            let _ = writeln!(o, "out = {}", out.display());
        }
        o
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
}

struct Value<'a> {
    section: &'a str,
    key: &'a str,
    raw: &'a str,
}

impl Value<'_> {
    fn error(&self, message: &str) -> ConfigError {
        ConfigError::Value {
            section: self.section.into(),
            key: self.key.into(),
            message: message.into(),
        }
    }

    fn parse<T: std::str::FromStr>(&self) -> Result<T, ConfigError> {
        self.raw
            .parse()
            .map_err(|_| self.error(&format!("cannot parse `{}`", self.raw)))
    }

    fn list<T: std::str::FromStr>(&self) -> Result<Vec<T>, ConfigError> {
        self.raw
            .split(',')
            .map(|p| p.trim().parse().map_err(|_| self.error(&format!("cannot parse `{}`", p.trim()))))
            .collect()
    }

    fn array<const N: usize>(&self) -> Result<[f64; N], ConfigError> {
        let l: Vec<f64> = self.list()?;
        l.try_into().map_err(|_| self.error(&format!("expected {N} comma-separated numbers")))
    }

    fn interval(&self) -> Result<Interval, ConfigError> {
        let [min, max] = self.array::<2>()?;
        Ok(Interval::new(min, max))
    }

    fn optional<T: std::str::FromStr>(&self) -> Result<Option<T>, ConfigError> {
        if self.raw.eq_ignore_ascii_case("none") {
            Ok(None)
        } else {
            self.parse().map(Some)
        }
    }

    fn optional_list(&self) -> Result<Option<Vec<usize>>, ConfigError> {
        if self.raw.eq_ignore_ascii_case("none") {
            Ok(None)
        } else {
            self.list().map(Some)
        }
    }

    fn activation(&self) -> Result<Activation, ConfigError> {
        match self.raw {
            "tanh" => Ok(Activation::Tanh),
            "relu" => Ok(Activation::Relu),
            _ => Err(self.error("expected tanh or relu")),
        }
    }
}

pub fn parse_solvers(s: &str) -> Result<Vec<SolverKind>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| SolverKind::from_name(p).ok_or_else(|| format!("unknown solver `{p}`")))
        .collect()
}

/// Comma-separated seeds; `a..b` is an inclusive range.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || format!("bad seed `{part}`");
        if let Some((a, b)) = part.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| bad())?;
            let b: u64 = b.trim().parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    Ok(out)
}
