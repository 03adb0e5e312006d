//! Scenario configuration: flat dotted keys (`grid.n_points = 1001`) parsed
//! with a TOML reader, validated in one pass that collects every error.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use serde::Serialize;
use stoqlab::Branch;
use toml::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Eigen,
    Evolve,
    Fields,
    Nelson,
    Brownian,
    Sed,
    ZpfCheck,
    Balance,
    Verify,
}

impl Scenario {
    pub const ALL: [Scenario; 9] = [
        Scenario::Eigen,
        Scenario::Evolve,
        Scenario::Fields,
        Scenario::Nelson,
        Scenario::Brownian,
        Scenario::Sed,
        Scenario::ZpfCheck,
        Scenario::Balance,
        Scenario::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Eigen => "eigen",
            Scenario::Evolve => "evolve",
            Scenario::Fields => "fields",
            Scenario::Nelson => "nelson",
            Scenario::Brownian => "brownian",
            Scenario::Sed => "sed",
            Scenario::ZpfCheck => "zpf-check",
            Scenario::Balance => "balance",
            Scenario::Verify => "verify",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialConfig {
    Harmonic { omega: f64 },
    /// Infinite well of width `length` centred on 0; fixes the grid extent.
    Box { length: f64 },
    /// Tabulated `x,V` CSV, linearly interpolated onto the grid.
    Custom { file: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Eigen,
    Superposition,
    Gaussian,
}

impl StateKind {
    fn name(self) -> &'static str {
        match self {
            StateKind::Eigen => "eigen",
            StateKind::Superposition => "superposition",
            StateKind::Gaussian => "gaussian",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    None,
    /// Reverses the osmotic part of the Nelson drift in the sampling check.
    FlipOsmotic,
}

impl Fault {
    fn name(self) -> &'static str {
        match self {
            Fault::None => "none",
            Fault::FlipOsmotic => "flip-osmotic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamsConfig {
    pub hbar: f64,
    pub mass: f64,
    pub light_speed: f64,
    pub branch: Branch,
    pub diffusion: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub steps: usize,
    pub record_stride: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateConfig {
    pub kind: StateKind,
    pub n: usize,
    pub m: usize,
    pub center: f64,
    pub sigma: f64,
    pub k0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConfig {
    pub n_traj: usize,
    pub bins: usize,
    pub bin_lo: f64,
    pub bin_hi: f64,
    /// Records before this time are left out of histograms and moments.
    pub burn_in: f64,
    pub write_paths: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SedSection {
    /// Damping rate Γ = τω₀²; ω₀ is the harmonic potential's frequency.
    pub gamma: f64,
    pub omega_cutoff: f64,
    pub duration: f64,
    pub dt: f64,
    pub realizations: usize,
    pub histogram_bins: usize,
    pub histogram_half_width: f64,
    /// Record realization 0 every this many steps (0 = no trajectory file).
    pub trajectory_stride: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZpfSection {
    pub omega_cutoff: f64,
    pub duration: f64,
    pub dt: f64,
    pub realizations: usize,
    pub lags: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifySection {
    pub fast: bool,
    pub inject: Fault,
    pub n_traj: usize,
    pub sed_realizations: usize,
    pub variant_realizations: usize,
    pub zpf_realizations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub params: ParamsConfig,
    pub grid: GridConfig,
    pub potential: PotentialConfig,
    pub integrator: IntegratorConfig,
    pub state: StateConfig,
    pub ensemble: EnsembleConfig,
    pub friction: f64,
    pub eigen_count: usize,
    pub sed: SedSection,
    pub zpf: ZpfSection,
    pub verify: VerifySection,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
    pub remedy: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ({})", self.key, self.message, self.remedy)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

fn flatten(prefix: &str, table: toml::Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other);
            }
        }
    }
}

struct Reader {
    values: BTreeMap<String, Value>,
    errors: Vec<ConfigError>,
}

impl Reader {
    fn error(&mut self, key: &str, message: impl Into<String>, remedy: impl Into<String>) {
        self.errors.push(ConfigError {
            key: key.to_string(),
            message: message.into(),
            remedy: remedy.into(),
        });
    }

    fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn take(&mut self, key: &str) -> Option<Value> {
        self.values.remove(key)
    }

    fn float_opt(&mut self, key: &str) -> Option<f64> {
        match self.take(key)? {
            Value::Float(x) if x.is_finite() => Some(x),
            Value::Integer(i) => Some(i as f64),
            other => {
                self.error(key, format!("expected a finite number, got {other}"), "write a number such as 1.0");
                None
            }
        }
    }

    fn float(&mut self, key: &str, default: f64, ok: impl Fn(f64) -> bool, range: &str) -> f64 {
        match self.float_opt(key) {
            Some(x) if ok(x) => x,
            Some(x) => {
                self.error(key, format!("value {x} is out of range"), format!("use a value {range}"));
                default
            }
            None => default,
        }
    }

    fn positive(&mut self, key: &str, default: f64) -> f64 {
        self.float(key, default, |x| x > 0.0, "> 0")
    }

    fn int_opt(&mut self, key: &str) -> Option<i64> {
        match self.take(key)? {
            Value::Integer(i) => Some(i),
            other => {
                self.error(key, format!("expected an integer, got {other}"), "write a whole number");
                None
            }
        }
    }

    fn count(&mut self, key: &str, default: usize, min: usize) -> usize {
        match self.int_opt(key) {
            Some(i) if i >= min as i64 => i as usize,
            Some(i) => {
                self.error(key, format!("value {i} is out of range"), format!("use an integer >= {min}"));
                default
            }
            None => default,
        }
    }

    fn boolean(&mut self, key: &str, default: bool) -> bool {
        match self.take(key) {
            None => default,
            Some(Value::Boolean(b)) => b,
            Some(other) => {
                self.error(key, format!("expected true or false, got {other}"), "write true or false");
                default
            }
        }
    }

    fn string(&mut self, key: &str) -> Option<String> {
        match self.take(key)? {
            Value::String(s) => Some(s),
            other => {
                self.error(key, format!("expected a string, got {other}"), "quote the value");
                None
            }
        }
    }

    fn choice<T: Copy>(&mut self, key: &str, default: T, options: &[(&str, T)]) -> T {
        let Some(s) = self.string(key) else { return default };
        match options.iter().find(|(name, _)| *name == s) {
            Some(&(_, v)) => v,
            None => {
                let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                self.error(key, format!("unknown value \"{s}\""), format!("use one of {}", names.join(", ")));
                default
            }
        }
    }
}

/// Parses a config; `scenario` must be present in the text.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigErrors> {
    parse_config_with(text, None)
}

/// Parses a config, taking the scenario from `default_scenario` when the
/// text has no `scenario` key (the two must agree when both are given).
pub fn parse_config_with(text: &str, default_scenario: Option<Scenario>) -> Result<ScenarioConfig, ConfigErrors> {
    let table: toml::Table = toml::from_str(text).map_err(|e| {
        ConfigErrors(vec![ConfigError {
            key: "<syntax>".into(),
            message: e.message().to_string(),
            remedy: "write one `key = value` per line".into(),
        }])
    })?;
    let mut values = BTreeMap::new();
    flatten("", table, &mut values);
    let mut r = Reader {
        values,
        errors: Vec::new(),
    };

    let scenario = match (r.string("scenario"), default_scenario) {
        (Some(s), default) => match Scenario::from_name(&s) {
            Some(sc) if default.is_none_or(|d| d == sc) => sc,
            Some(sc) => {
                let d = default.unwrap();
                r.error("scenario", format!("config is for `{sc}` but `{d}` was requested"), "make them agree");
                d
            }
            None => {
                let names: Vec<&str> = Scenario::ALL.iter().map(|s| s.name()).collect();
                r.error("scenario", format!("unknown scenario \"{s}\""), format!("use one of {}", names.join(", ")));
                default.unwrap_or(Scenario::Verify)
            }
        },
        (None, Some(d)) => d,
        (None, None) => {
            r.error("scenario", "missing key", "add e.g. scenario = \"eigen\"");
            Scenario::Verify
        }
    };

    let seed = match r.int_opt("seed") {
        Some(s) if s >= 0 => s as u64,
        Some(s) => {
            r.error("seed", format!("value {s} is negative"), "use an integer >= 0");
            1
        }
        None => 1,
    };
    let output_dir = PathBuf::from(r.string("output_dir").unwrap_or_else(|| "out".into()));

    let hbar = r.positive("params.hbar", 1.0);
    let mass = r.positive("params.mass", 1.0);
    let light_speed = r.positive("params.light_speed", 1.0);
    let branch = match r.int_opt("params.lambda") {
        None => Branch::Quantum,
        Some(l) => Branch::from_lambda(l).unwrap_or_else(|_| {
            r.error("params.lambda", "lambda_branch must be +1 or -1", "set params.lambda = 1 or -1");
            Branch::Quantum
        }),
    };
    let diffusion = r.float("params.diffusion", hbar / (2.0 * mass), |x| x > 0.0, "> 0");
    let params = ParamsConfig {
        hbar,
        mass,
        light_speed,
        branch,
        diffusion,
    };

    let potential_keys = ["potential.harmonic.omega", "potential.box.L", "potential.custom.file"];
    let given: Vec<&str> = potential_keys.iter().copied().filter(|k| r.has(k)).collect();
    if given.len() > 1 {
        r.error(
            &given.join(" + "),
            "ambiguous potential: more than one kind given",
            "keep exactly one of potential.harmonic.omega, potential.box.L, potential.custom.file",
        );
    }
    let potential = match given.first().copied() {
        Some("potential.box.L") => PotentialConfig::Box {
            length: r.positive("potential.box.L", 1.0),
        },
        Some("potential.custom.file") => PotentialConfig::Custom {
            file: PathBuf::from(r.string("potential.custom.file").unwrap_or_default()),
        },
        _ => PotentialConfig::Harmonic {
            omega: r.positive("potential.harmonic.omega", 1.0),
        },
    };
    for k in potential_keys {
        r.take(k);
    }

    let n_points = r.count("grid.n_points", 1001, stoqlab::grid::MIN_POINTS);
    let grid = match potential {
        PotentialConfig::Box { length } => {
            for k in ["grid.x_min", "grid.x_max"] {
                if r.take(k).is_some() {
                    r.error(k, "potential.box.L fixes the grid extent", "remove grid.x_min and grid.x_max");
                }
            }
            GridConfig {
                x_min: -0.5 * length,
                x_max: 0.5 * length,
                n_points,
            }
        }
        _ => {
            let x_min = r.float("grid.x_min", -10.0, f64::is_finite, "finite");
            let x_max = r.float("grid.x_max", 10.0, f64::is_finite, "finite");
            if x_max <= x_min {
                r.error("grid.x_max", format!("grid.x_max = {x_max} is not above grid.x_min = {x_min}"), "make x_max > x_min");
            }
            GridConfig { x_min, x_max, n_points }
        }
    };

    let integrator = IntegratorConfig {
        dt: r.positive("integrator.dt", 1e-3),
        steps: r.count("integrator.steps", 5000, 1),
        record_stride: r.count("integrator.record_stride", 10, 1),
    };

    let state = StateConfig {
        kind: r.choice(
            "state.kind",
            StateKind::Eigen,
            &[
                ("eigen", StateKind::Eigen),
                ("superposition", StateKind::Superposition),
                ("gaussian", StateKind::Gaussian),
            ],
        ),
        n: r.count("state.n", 0, 0),
        m: r.count("state.m", 1, 0),
        center: r.float("state.center", 0.0, f64::is_finite, "finite"),
        sigma: r.positive("state.sigma", std::f64::consts::FRAC_1_SQRT_2),
        k0: r.float("state.k0", 0.0, f64::is_finite, "finite"),
    };
    if state.kind == StateKind::Superposition && state.n == state.m {
        r.error("state.m", "superposition needs two distinct levels", "set state.m different from state.n");
    }

    let ensemble = EnsembleConfig {
        n_traj: r.count("ensemble.n_traj", 10_000, 1),
        bins: r.count("ensemble.bins", 40, 1),
        bin_lo: r.float("ensemble.bin_lo", -4.0, f64::is_finite, "finite"),
        bin_hi: r.float("ensemble.bin_hi", 4.0, f64::is_finite, "finite"),
        burn_in: r.float("ensemble.burn_in", 0.0, |x| x >= 0.0, ">= 0"),
        write_paths: r.boolean("ensemble.write_paths", false),
    };
    if ensemble.bin_hi <= ensemble.bin_lo {
        r.error("ensemble.bin_hi", "bin range is empty", "make ensemble.bin_hi > ensemble.bin_lo");
    }
    let friction = r.positive("brownian.friction", 1.0);
    let eigen_count = r.count("eigen.count", 4, 1);

    let omega0 = match potential {
        PotentialConfig::Harmonic { omega } => omega,
        _ => 1.0,
    };
    let gamma = r.float("sed.gamma", 1e-3 * omega0, |x| x >= 0.0, ">= 0");
    let sed = SedSection {
        gamma,
        omega_cutoff: r.positive("sed.omega_cutoff", 20.0 * omega0),
        duration: r.positive("sed.duration", if gamma > 0.0 { 40.0 / gamma } else { 100.0 / omega0 }),
        dt: r.positive("sed.dt", 1e-2 / omega0),
        realizations: r.count("sed.realizations", 20, 2),
        histogram_bins: r.count("sed.histogram_bins", 16, 1),
        histogram_half_width: r.positive("sed.histogram_half_width", 4.0),
        trajectory_stride: r.count("sed.trajectory_stride", 0, 0),
    };

    let zpf = ZpfSection {
        omega_cutoff: r.positive("zpf.omega_cutoff", 20.0),
        duration: r.positive("zpf.duration", 50.0),
        dt: r.positive("zpf.dt", 1e-2),
        realizations: r.count("zpf.realizations", 100, 2),
        lags: match r.take("zpf.lags") {
            None => vec![0, 1, 5, 20],
            Some(Value::Array(items)) => {
                let lags: Option<Vec<usize>> = items
                    .iter()
                    .map(|v| v.as_integer().filter(|&i| i >= 0).map(|i| i as usize))
                    .collect();
                lags.filter(|l| !l.is_empty()).unwrap_or_else(|| {
                    r.error("zpf.lags", "expected a non-empty list of integers >= 0", "write e.g. [0, 1, 5, 20]");
                    vec![0]
                })
            }
            Some(other) => {
                r.error("zpf.lags", format!("expected a list, got {other}"), "write e.g. [0, 1, 5, 20]");
                vec![0]
            }
        },
    };

    let verify = VerifySection {
        fast: r.boolean("verify.fast", false),
        inject: r.choice(
            "verify.inject",
            Fault::None,
            &[("none", Fault::None), ("flip-osmotic", Fault::FlipOsmotic)],
        ),
        n_traj: r.count("verify.n_traj", 10_000, 10),
        sed_realizations: r.count("verify.sed_realizations", 240, 20),
        variant_realizations: r.count("verify.variant_realizations", 80, 20),
        zpf_realizations: r.count("verify.zpf_realizations", 100, 20),
    };

    let leftover: Vec<String> = r.values.keys().cloned().collect();
    for key in leftover {
        r.error(&key, "unknown key", "check the spelling against the documented keys");
    }

    if r.errors.is_empty() {
        Ok(ScenarioConfig {
            scenario,
            seed,
            output_dir,
            params,
            grid,
            potential,
            integrator,
            state,
            ensemble,
            friction,
            eigen_count,
            sed,
            zpf,
            verify,
        })
    } else {
        Err(ConfigErrors(r.errors))
    }
}

impl ScenarioConfig {
    /// Every setting with defaults resolved, as ordered (key, value) pairs.
    pub fn entries(&self) -> Vec<(String, Value)> {
        let f = Value::Float;
        let i = |n: usize| Value::Integer(n as i64);
        let s = |t: &str| Value::String(t.to_string());
        let mut out: Vec<(&str, Value)> = vec![
            ("scenario", s(self.scenario.name())),
            ("seed", Value::Integer(self.seed as i64)),
            ("output_dir", s(&self.output_dir.to_string_lossy())),
            ("params.hbar", f(self.params.hbar)),
            ("params.mass", f(self.params.mass)),
            ("params.light_speed", f(self.params.light_speed)),
            ("params.lambda", Value::Integer(self.params.branch.lambda() as i64)),
            ("params.diffusion", f(self.params.diffusion)),
        ];
        match &self.potential {
            PotentialConfig::Harmonic { omega } => out.push(("potential.harmonic.omega", f(*omega))),
            PotentialConfig::Box { length } => out.push(("potential.box.L", f(*length))),
            PotentialConfig::Custom { file } => out.push(("potential.custom.file", s(&file.to_string_lossy()))),
        }
        if !matches!(self.potential, PotentialConfig::Box { .. }) {
            out.push(("grid.x_min", f(self.grid.x_min)));
            out.push(("grid.x_max", f(self.grid.x_max)));
        }
        out.extend([
            ("grid.n_points", i(self.grid.n_points)),
            ("integrator.dt", f(self.integrator.dt)),
            ("integrator.steps", i(self.integrator.steps)),
            ("integrator.record_stride", i(self.integrator.record_stride)),
            ("state.kind", s(self.state.kind.name())),
            ("state.n", i(self.state.n)),
            ("state.m", i(self.state.m)),
            ("state.center", f(self.state.center)),
            ("state.sigma", f(self.state.sigma)),
            ("state.k0", f(self.state.k0)),
            ("ensemble.n_traj", i(self.ensemble.n_traj)),
            ("ensemble.bins", i(self.ensemble.bins)),
            ("ensemble.bin_lo", f(self.ensemble.bin_lo)),
            ("ensemble.bin_hi", f(self.ensemble.bin_hi)),
            ("ensemble.burn_in", f(self.ensemble.burn_in)),
            ("ensemble.write_paths", Value::Boolean(self.ensemble.write_paths)),
            ("brownian.friction", f(self.friction)),
            ("eigen.count", i(self.eigen_count)),
            ("sed.gamma", f(self.sed.gamma)),
            ("sed.omega_cutoff", f(self.sed.omega_cutoff)),
            ("sed.duration", f(self.sed.duration)),
            ("sed.dt", f(self.sed.dt)),
            ("sed.realizations", i(self.sed.realizations)),
            ("sed.histogram_bins", i(self.sed.histogram_bins)),
            ("sed.histogram_half_width", f(self.sed.histogram_half_width)),
            ("sed.trajectory_stride", i(self.sed.trajectory_stride)),
            ("zpf.omega_cutoff", f(self.zpf.omega_cutoff)),
            ("zpf.duration", f(self.zpf.duration)),
            ("zpf.dt", f(self.zpf.dt)),
            ("zpf.realizations", i(self.zpf.realizations)),
            ("zpf.lags", Value::Array(self.zpf.lags.iter().map(|&l| i(l)).collect())),
            ("verify.fast", Value::Boolean(self.verify.fast)),
            ("verify.inject", s(self.verify.inject.name())),
            ("verify.n_traj", i(self.verify.n_traj)),
            ("verify.sed_realizations", i(self.verify.sed_realizations)),
            ("verify.variant_realizations", i(self.verify.variant_realizations)),
            ("verify.zpf_realizations", i(self.verify.zpf_realizations)),
        ]);
        out.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    /// Flat `key = value` text that parses back to the same config.
    pub fn emit(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// The resolved config as a flat JSON object keyed by dotted names.
    pub fn to_json(&self) -> serde_json::Value {
        let map = self
            .entries()
            .into_iter()
            .map(|(k, v)| (k, serde_json::to_value(v).expect("toml values serialize")))
            .collect();
        serde_json::Value::Object(map)
    }

    /// Ensembles 10× smaller (statistical tolerances widen in the checks).
    pub fn apply_fast(&mut self) {
        self.verify.fast = true;
        self.ensemble.n_traj = (self.ensemble.n_traj / 10).max(1);
        self.sed.realizations = (self.sed.realizations / 10).max(2);
        self.zpf.realizations = (self.zpf.realizations / 10).max(2);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse_config("scenario = \"eigen\"\npotential.harmonic.omega = 1\n").unwrap();
        assert_eq!(cfg.scenario, Scenario::Eigen);
        assert_eq!(cfg.grid.n_points, 1001);
        assert_eq!(cfg.params.diffusion, 0.5);
        assert_eq!(cfg.potential, PotentialConfig::Harmonic { omega: 1.0 });
        assert!(cfg.emit().contains("grid.n_points = 1001\n"));
    }

    #[test]
    fn bad_lambda_is_named() {
        let err = parse_config("scenario = \"eigen\"\nparams.lambda = 2\n").unwrap_err();
        assert_eq!(err.0.len(), 1);
        assert!(err.0[0].message.contains("lambda_branch must be +1 or -1"));
    }

    #[test]
    fn two_potentials_are_ambiguous() {
        let err = parse_config("scenario = \"eigen\"\npotential.harmonic.omega = 1\npotential.box.L = 2\n").unwrap_err();
        assert!(err.0.iter().any(|e| e.message.contains("ambiguous")));
    }

    #[test]
    fn all_errors_are_reported() {
        let text = "scenario = \"eigen\"\ngrid.n_points = 3\nparams.mass = -1\nbogus.key = 1\nstate.kind = \"cat\"\n";
        let err = parse_config(text).unwrap_err();
        let keys: Vec<&str> = err.0.iter().map(|e| e.key.as_str()).collect();
        for k in ["grid.n_points", "params.mass", "bogus.key", "state.kind"] {
            assert!(keys.contains(&k), "{k} missing from {keys:?}");
        }
    }

    #[test]
    fn nested_tables_read_as_dotted_keys() {
        let a = parse_config("scenario = \"fields\"\n[grid]\nn_points = 201\n").unwrap();
        let b = parse_config("scenario = \"fields\"\ngrid.n_points = 201\n").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn box_fixes_the_grid() {
        let cfg = parse_config("scenario = \"eigen\"\npotential.box.L = 4\n").unwrap();
        assert_eq!((cfg.grid.x_min, cfg.grid.x_max), (-2.0, 2.0));
        assert!(parse_config("scenario = \"eigen\"\npotential.box.L = 4\ngrid.x_min = -3\n").is_err());
        assert_eq!(parse_config(&cfg.emit()).unwrap(), cfg);
    }

    #[test]
    fn scenario_must_match_the_request() {
        assert!(parse_config_with("scenario = \"sed\"\n", Some(Scenario::Eigen)).is_err());
        assert_eq!(parse_config_with("", Some(Scenario::Sed)).unwrap().scenario, Scenario::Sed);
        assert!(parse_config("").is_err());
    }
}
