//! Flat `section.key = value` configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Numbers may carry a `pi`
//! suffix (`32pi`, `0.5pi`, `pi`). Lists are comma separated. Every key is
//! validated and unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use skdv_core::duhamel::QuadPoints;
use skdv_core::estimates::EstimateKind;
use skdv_core::invariants::EnergyVariant;
use skdv_core::propagators::SystemParams;
use skdv_core::spectral::MultiplierSpec;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Simulate,
    Invariants,
    Picard,
    Inflate,
    Estimates,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Self::Simulate,
        Self::Invariants,
        Self::Picard,
        Self::Inflate,
        Self::Estimates,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::Invariants => "invariants",
            Self::Picard => "picard",
            Self::Inflate => "inflate",
            Self::Estimates => "estimates",
        }
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown experiment `{s}`"))
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Gaussian,
    Sech,
    /// `exp(-|x|/w - x^2/(4 w^2))`, with a derivative jump at the origin.
    Kink,
    Zero,
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "sech" => Ok(Self::Sech),
            "kink" => Ok(Self::Kink),
            "zero" => Ok(Self::Zero),
            _ => Err(format!("unknown profile `{s}` (gaussian, sech, kink, zero)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataConfig {
    pub profile: Profile,
    /// Complex amplitude of `u`.
    pub u_amp: (f64, f64),
    pub v_amp: f64,
    pub width: f64,
    pub v_shift: f64,
    /// Overall factor applied to both components.
    pub scale: f64,
    /// Project onto the 2/3-rule band.
    pub project: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InflationSettings {
    pub n_list: Vec<f64>,
    pub eps0: f64,
    pub n: u32,
    pub quad: QuadPoints,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardSettings {
    pub iterations: usize,
    pub nt: usize,
    /// Solver steps per lattice step in the reference solution.
    pub substeps: usize,
    pub probe_scales: Vec<f64>,
    pub probe_deltas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateSettings {
    pub kinds: Vec<EstimateKind>,
    pub members: usize,
    pub nt: usize,
    pub horizon: f64,
    pub xi_max: f64,
    pub nx_list: Vec<usize>,
    pub counterexample_n: Vec<f64>,
    pub points: usize,
}

/// Acceptance bands checked after a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Bands {
    pub mass_drift: f64,
    pub slope_band: f64,
    pub kdv_slope: f64,
    pub phase: f64,
    pub picard_tol: f64,
    pub drift_noise: f64,
    pub ensemble_spread: f64,
    pub growth: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub nx: usize,
    pub half_length: f64,
    pub dt: f64,
    pub horizon: f64,
    pub delta: f64,
    pub record_every: usize,
    pub dealias: bool,
    pub params: SystemParams,
    pub data: DataConfig,
    pub multipliers: Vec<MultiplierSpec>,
    pub energy: EnergyVariant,
    pub inflation: Option<InflationSettings>,
    pub picard: PicardSettings,
    pub estimates: EstimateSettings,
    pub bands: Bands,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub gnuplot: bool,
    /// The resolved `key=value` pairs, sorted; hashed into the manifest.
    pub canonical: String,
}

/// Every accepted key with its default; `None` marks keys without one.
const KEYS: &[(&str, Option<&str>)] = &[
    ("experiment", None),
    ("seed", Some("0")),
    ("output_dir", Some("out")),
    ("grid.nx", Some("256")),
    ("grid.L", Some("8pi")),
    ("time.dt", Some("1e-3")),
    ("time.T", Some("1")),
    ("time.delta", Some("0.1")),
    ("time.record_every", Some("10")),
    ("solver.dealias", Some("true")),
    ("params.alpha", Some("1")),
    ("params.beta", Some("1")),
    ("params.gamma", Some("1")),
    ("params.s", Some("0")),
    ("params.l", Some("0")),
    ("data.profile", Some("gaussian")),
    ("data.u_re", Some("1")),
    ("data.u_im", Some("0")),
    ("data.v_amp", Some("0.5")),
    ("data.width", Some("1")),
    ("data.v_shift", Some("0")),
    ("data.scale", Some("1")),
    ("data.project", Some("false")),
    ("multiplier.N", Some("")),
    ("multiplier.s", None),
    ("energy.variant", Some("u4")),
    ("inflation.N", Some("32,64,128,256,512")),
    ("inflation.eps0", Some("1e-2")),
    ("inflation.n", Some("6")),
    ("inflation.quad_xi", Some("64")),
    ("inflation.quad_xi2", Some("128")),
    ("picard.iterations", Some("8")),
    ("picard.nt", Some("256")),
    ("picard.substeps", Some("4")),
    ("picard.probe_scales", Some("")),
    ("picard.probe_deltas", Some("0.05,0.1,0.2,0.4,0.8")),
    ("estimates.kinds", Some("kdv-output,schrodinger-product")),
    ("estimates.members", Some("50")),
    ("estimates.nt", Some("128")),
    ("estimates.horizon", Some("2")),
    ("estimates.xi_max", Some("3")),
    ("estimates.nx", Some("")),
    ("estimates.counterexample_N", Some("")),
    ("estimates.points", Some("64")),
    ("assert.mass_drift", Some("1e-8")),
    ("assert.slope_band", Some("0.3")),
    ("assert.kdv_slope", Some("-2.5")),
    ("assert.phase", Some("0.5")),
    ("assert.picard_tol", Some("1e-6")),
    ("assert.drift_noise", Some("1.5")),
    ("assert.ensemble_spread", Some("2")),
    ("assert.growth", Some("1.5")),
    ("plot.gnuplot", Some("false")),
];

/// Raw `key -> value` pairs before typing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = split_pair(line).ok_or_else(|| {
                HarnessError::validation(format!("line {}", i + 1), "expected `key = value`")
            })?;
            if raw.entries.insert(k.clone(), v).is_some() {
                return Err(HarnessError::validation(k, "duplicate key"));
            }
        }
        Ok(raw)
    }

    /// Applies a `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = split_pair(assignment)
            .ok_or_else(|| HarnessError::validation(assignment, "override must be `key=value`"))?;
        self.entries.insert(k, v);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }
}

fn split_pair(s: &str) -> Option<(String, String)> {
    let (k, v) = s.split_once('=')?;
    let k = k.trim();
    if k.is_empty() {
        return None;
    }
    Some((k.to_string(), v.trim().to_string()))
}

/// Parses a real number, allowing a trailing `pi`.
pub fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let (body, factor) = match s.strip_suffix("pi") {
        Some(b) => (b.trim(), std::f64::consts::PI),
        None => (s, 1.0),
    };
    let x = if body.is_empty() && factor != 1.0 {
        1.0
    } else {
        body.parse::<f64>().map_err(|_| format!("`{s}` is not a number"))?
    };
    let x = x * factor;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

struct Reader {
    values: BTreeMap<&'static str, String>,
}

impl Reader {
    fn raw(&self, key: &'static str) -> Result<&str> {
        self.values
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| HarnessError::validation(key, "required key is missing"))
    }

    fn parse<T: FromStr>(&self, key: &'static str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        self.raw(key)?
            .parse::<T>()
            .map_err(|e| HarnessError::validation(key, e.to_string()))
    }

    fn real(&self, key: &'static str) -> Result<f64> {
        parse_real(self.raw(key)?).map_err(|e| HarnessError::validation(key, e))
    }

    fn positive(&self, key: &'static str) -> Result<f64> {
        let x = self.real(key)?;
        if x > 0.0 {
            Ok(x)
        } else {
            Err(HarnessError::validation(key, format!("must be positive, got {x}")))
        }
    }

    fn count(&self, key: &'static str, min: usize) -> Result<usize> {
        let n: usize = self.parse(key)?;
        if n >= min {
            Ok(n)
        } else {
            Err(HarnessError::validation(key, format!("must be at least {min}, got {n}")))
        }
    }

    fn list<T>(&self, key: &'static str, item: impl Fn(&str) -> std::result::Result<T, String>) -> Result<Vec<T>> {
        let raw = self.raw(key)?;
        if raw.is_empty() {
            return Ok(Vec::new());
        }
        raw.split(',')
            .map(|s| item(s.trim()).map_err(|e| HarnessError::validation(key, e)))
            .collect()
    }

    fn positive_list(&self, key: &'static str) -> Result<Vec<f64>> {
        self.list(key, |s| {
            let x = parse_real(s)?;
            if x > 0.0 {
                Ok(x)
            } else {
                Err(format!("entries must be positive, got {x}"))
            }
        })
    }
}

impl ExperimentConfig {
    /// Validates `raw`; `experiment` overrides the `experiment` key when given.
    pub fn from_raw(raw: &RawConfig, experiment: Option<Experiment>) -> Result<Self> {
        for k in raw.entries.keys() {
            if !KEYS.iter().any(|(name, _)| name == k) {
                return Err(HarnessError::validation(k.clone(), "unknown key"));
            }
        }
        let mut values = BTreeMap::new();
        for &(name, default) in KEYS {
            if let Some(v) = raw.get(name).map(str::to_string).or(default.map(str::to_string)) {
                values.insert(name, v);
            }
        }
        match (experiment, values.get("experiment")) {
            (Some(e), Some(v)) if v.as_str() != e.name() => {
                return Err(HarnessError::validation(
                    "experiment",
                    format!("config names `{v}` but `{e}` was requested"),
                ));
            }
            (Some(e), _) => {
                values.insert("experiment", e.name().to_string());
            }
            _ => {}
        }
        let r = Reader { values };

        let experiment: Experiment = r.parse("experiment")?;
        let nx = r.count("grid.nx", 8)?;
        if !nx.is_multiple_of(2) {
            return Err(HarnessError::validation("grid.nx", "must be even"));
        }
        let half_length = r.positive("grid.L")?;
        let dt = r.positive("time.dt")?;
        let horizon = r.positive("time.T")?;
        let delta = r.positive("time.delta")?;
        let record_every = r.count("time.record_every", 1)?;
        let dealias: bool = r.parse("solver.dealias")?;

        let params = SystemParams::new(
            r.real("params.alpha")?,
            r.real("params.beta")?,
            r.real("params.gamma")?,
            r.real("params.s")?,
            r.real("params.l")?,
        )
        .map_err(|e| HarnessError::from_core("params", e))?;

        let data = DataConfig {
            profile: r.parse("data.profile")?,
            u_amp: (r.real("data.u_re")?, r.real("data.u_im")?),
            v_amp: r.real("data.v_amp")?,
            width: r.positive("data.width")?,
            v_shift: r.real("data.v_shift")?,
            scale: r.real("data.scale")?,
            project: r.parse("data.project")?,
        };

        let m_s = match r.values.get("multiplier.s") {
            Some(_) => r.real("multiplier.s")?,
            None => params.s,
        };
        let multipliers = r
            .positive_list("multiplier.N")?
            .into_iter()
            .map(|n| MultiplierSpec::new(n, m_s).map_err(|e| HarnessError::from_core("multiplier", e)))
            .collect::<Result<Vec<_>>>()?;

        let energy = match r.raw("energy.variant")? {
            "u4" => EnergyVariant::U4,
            "v4" => EnergyVariant::V4,
            other => {
                return Err(HarnessError::validation("energy.variant", format!("`{other}` is not u4 or v4")))
            }
        };

        let inflation = if experiment == Experiment::Inflate {
            let n_list = r.positive_list("inflation.N")?;
            if n_list.len() < 3 {
                return Err(HarnessError::validation("inflation.N", "need at least 3 values"));
            }
            let eps0 = r.positive("inflation.eps0")?;
            let n = r.parse::<u32>("inflation.n")?;
            if n == 0 {
                return Err(HarnessError::validation("inflation.n", "must be at least 1"));
            }
            let quad = QuadPoints {
                xi: r.count("inflation.quad_xi", 8)?,
                xi2: r.count("inflation.quad_xi2", 8)?,
            };
            Some(InflationSettings { n_list, eps0, n, quad })
        } else {
            None
        };

        let picard = PicardSettings {
            iterations: r.count("picard.iterations", 1)?,
            nt: r.count("picard.nt", 64)?,
            substeps: r.count("picard.substeps", 1)?,
            probe_scales: r.positive_list("picard.probe_scales")?,
            probe_deltas: r.positive_list("picard.probe_deltas")?,
        };
        if !picard.nt.is_multiple_of(4) {
            return Err(HarnessError::validation("picard.nt", "must be a multiple of 4"));
        }

        let kinds = r.list("estimates.kinds", |s| s.parse::<EstimateKind>().map_err(|e| e.to_string()))?;
        if kinds.is_empty() {
            return Err(HarnessError::validation("estimates.kinds", "need at least one kind"));
        }
        let nx_list = r.list("estimates.nx", |s| match s.parse::<usize>() {
            Ok(n) if n >= 8 && n % 2 == 0 => Ok(n),
            _ => Err(format!("`{s}` is not an even size >= 8")),
        })?;
        let estimates = EstimateSettings {
            kinds,
            members: r.count("estimates.members", 1)?,
            nt: r.count("estimates.nt", 8)?,
            horizon: r.positive("estimates.horizon")?,
            xi_max: r.positive("estimates.xi_max")?,
            nx_list: if nx_list.is_empty() { vec![nx] } else { nx_list },
            counterexample_n: r.positive_list("estimates.counterexample_N")?,
            points: r.count("estimates.points", 8)?,
        };

        let bands = Bands {
            mass_drift: r.positive("assert.mass_drift")?,
            slope_band: r.positive("assert.slope_band")?,
            kdv_slope: r.real("assert.kdv_slope")?,
            phase: r.real("assert.phase")?,
            picard_tol: r.positive("assert.picard_tol")?,
            drift_noise: r.positive("assert.drift_noise")?,
            ensemble_spread: r.positive("assert.ensemble_spread")?,
            growth: r.positive("assert.growth")?,
        };

        let seed: u64 = r.parse("seed")?;
        let output_dir = PathBuf::from(r.raw("output_dir")?);
        let gnuplot: bool = r.parse("plot.gnuplot")?;

        let canonical = r
            .values
            .iter()
            .filter(|(k, _)| **k != "output_dir")
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect();

        Ok(Self {
            experiment,
            nx,
            half_length,
            dt,
            horizon,
            delta,
            record_every,
            dealias,
            params,
            data,
            multipliers,
            energy,
            inflation,
            picard,
            estimates,
            bands,
            seed,
            output_dir,
            gnuplot,
            canonical,
        })
    }

    pub fn parse(text: &str, experiment: Option<Experiment>) -> Result<Self> {
        Self::from_raw(&RawConfig::parse(text)?, experiment)
    }
}
