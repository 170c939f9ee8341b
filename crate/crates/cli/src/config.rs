//! Sweep configuration: JSON file, command-line overrides, defaults, and
//! validation.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use clap::ValueEnum;
use nhse_core::winding::ResponseElement;
use nhse_core::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MAX_HN_SITES: usize = 64;
pub const MAX_SSH_CELLS: usize = 32;
pub const MAX_GRID_POINTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Hn,
    Ssh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    /// Element between the two neighbours of the impurity.
    Neighbours,
    /// Element between the impurity cell and the last cell.
    Literal,
}

impl From<ElementKind> for ResponseElement {
    fn from(e: ElementKind) -> Self {
        match e {
            ElementKind::Neighbours => ResponseElement::ImpurityNeighbours,
            ElementKind::Literal => ResponseElement::Literal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectrum,
    IprSweep,
    Critical,
    GapScan,
    Winding,
    NuSweep,
    Flow,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::IprSweep => "ipr-sweep",
            Command::Critical => "critical",
            Command::GapScan => "gap-scan",
            Command::Winding => "winding",
            Command::NuSweep => "nu-sweep",
            Command::Flow => "flow",
            Command::Validate => "validate",
        }
    }
}

/// A single value or an inclusive `log:`/`lin:` grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridSpec {
    Single(f64),
    Log { start: f64, stop: f64, count: usize },
    Lin { start: f64, stop: f64, count: usize },
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        match *self {
            GridSpec::Single(v) => vec![v],
            GridSpec::Log { start, stop, count } => {
                nhse_core::winding::log_grid(start, stop, count).expect("grid validated at parse time")
            }
            GridSpec::Lin { start, stop, count } => (0..count)
                .map(|i| {
                    if i + 1 == count {
                        stop
                    } else {
                        start + (stop - start) * i as f64 / (count - 1) as f64
                    }
                })
                .collect(),
        }
    }

    pub fn single(&self) -> Option<f64> {
        match *self {
            GridSpec::Single(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GridSpec::Single(v) => write!(f, "{v:?}"),
            GridSpec::Log { start, stop, count } => write!(f, "log:{start:?}:{stop:?}:{count}"),
            GridSpec::Lin { start, stop, count } => write!(f, "lin:{start:?}:{stop:?}:{count}"),
        }
    }
}

fn parse_f64(s: &str, what: &str) -> Result<f64, CliError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| CliError::Validation(format!("{what}: cannot parse '{s}' as a number")))?;
    if !v.is_finite() {
        return Err(CliError::Validation(format!("{what}: value must be finite")));
    }
    Ok(v)
}

impl FromStr for GridSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [v] => Ok(GridSpec::Single(parse_f64(v, "grid value")?)),
            [kind @ ("log" | "lin"), a, b, n] => {
                let start = parse_f64(a, "grid start")?;
                let stop = parse_f64(b, "grid stop")?;
                let count: usize = n
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Validation(format!("grid count: cannot parse '{n}'")))?;
                if count < 2 {
                    return Err(CliError::Validation(format!("grid count must be >= 2, got {count}")));
                }
                if count > MAX_GRID_POINTS {
                    return Err(CliError::Validation(format!("grid count must be <= {MAX_GRID_POINTS}")));
                }
                if !(start < stop) {
                    return Err(CliError::Validation(format!("grid start must be < stop ({start} >= {stop})")));
                }
                if *kind == "log" {
                    if !(start > 0.0) {
                        return Err(CliError::Validation("log grid needs start > 0".into()));
                    }
                    Ok(GridSpec::Log { start, stop, count })
                } else {
                    Ok(GridSpec::Lin { start, stop, count })
                }
            }
            _ => Err(CliError::Validation(format!(
                "grid spec '{s}' must be a number or kind:start:stop:count with kind log or lin"
            ))),
        }
    }
}

pub fn parse_er(s: &str) -> Result<Complex64, CliError> {
    match s.split(',').collect::<Vec<_>>().as_slice() {
        [re] => Ok(Complex64::new(parse_f64(re, "er")?, 0.0)),
        [re, im] => Ok(Complex64::new(parse_f64(re, "er real part")?, parse_f64(im, "er imaginary part")?)),
        _ => Err(CliError::Validation(format!("er '{s}' must be 're,im'"))),
    }
}

/// A number or a string in a JSON config.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Scalar {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RawEr {
    Pair([f64; 2]),
    Scalar(Scalar),
}

/// Contents of a `--config` JSON document. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    model: Option<ModelKind>,
    n: Option<usize>,
    g: Option<f64>,
    t_prime: Option<Scalar>,
    v0: Option<Scalar>,
    er: Option<RawEr>,
    element: Option<ElementKind>,
    n_k: Option<usize>,
    threads: Option<usize>,
}

impl FileConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

fn scalar_grid(s: &Scalar) -> Result<GridSpec, CliError> {
    match s {
        Scalar::Number(v) => Ok(GridSpec::Single(*v)),
        Scalar::Text(t) => t.parse(),
    }
}

/// Values given on the command line; `None` means "not given".
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub model: Option<ModelKind>,
    pub n: Option<usize>,
    pub g: Option<f64>,
    pub t_prime: Option<String>,
    pub v0: Option<String>,
    pub er: Option<String>,
    pub element: Option<ElementKind>,
    pub n_k: Option<usize>,
    pub threads: Option<usize>,
}

/// Fully resolved and validated configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub command: Command,
    pub model: ModelKind,
    pub n: usize,
    pub g: f64,
    pub t_prime: GridSpec,
    pub v0: GridSpec,
    pub er: Option<Complex64>,
    pub element: ElementKind,
    pub n_k: usize,
    /// Worker threads; `0` lets the pool decide. Not part of the hash.
    pub threads: usize,
    /// Fields filled from defaults rather than the user.
    pub assumed: Vec<String>,
}

impl SweepConfig {
    pub fn resolve(command: Command, file: FileConfig, cli: Overrides) -> Result<Self, CliError> {
        let mut assumed = Vec::new();
        let model = cli.model.or(file.model).unwrap_or(ModelKind::Hn);

        let default_n = if command == Command::GapScan { 20 } else { 14 };
        let n = pick(cli.n, file.n, default_n, "n", &mut assumed);
        let g = pick(cli.g, file.g, 1.0, "g", &mut assumed);

        let t_prime = match (cli.t_prime.as_deref(), &file.t_prime) {
            (Some(s), _) => s.parse()?,
            (None, Some(s)) => scalar_grid(s)?,
            (None, None) => {
                let d = if command == Command::GapScan {
                    GridSpec::Lin { start: -3.0, stop: 3.0, count: 600 }
                } else {
                    GridSpec::Single(2.0)
                };
                if model == ModelKind::Ssh {
                    assumed.push(format!("t_prime={d}"));
                }
                d
            }
        };

        let v0 = match (cli.v0.as_deref(), &file.v0) {
            (Some(s), _) => s.parse()?,
            (None, Some(s)) => scalar_grid(s)?,
            (None, None) => {
                let d = match command {
                    Command::Spectrum => GridSpec::Single(0.0),
                    Command::GapScan => GridSpec::Single(2.0 * 4f64.cosh()),
                    Command::NuSweep => GridSpec::Log { start: 1.0, stop: 1e12, count: 301 },
                    _ => GridSpec::Log { start: 1e-2, stop: 1e8, count: 101 },
                };
                if !matches!(command, Command::Critical | Command::Winding | Command::Validate) {
                    assumed.push(format!("v0={d}"));
                }
                d
            }
        };

        let er = match (cli.er.as_deref(), &file.er) {
            (Some(s), _) => Some(parse_er(s)?),
            (None, Some(RawEr::Pair([re, im]))) => Some(Complex64::new(*re, *im)),
            (None, Some(RawEr::Scalar(Scalar::Number(re)))) => Some(Complex64::new(*re, 0.0)),
            (None, Some(RawEr::Scalar(Scalar::Text(s)))) => Some(parse_er(s)?),
            (None, None) => None,
        };

        let element = cli.element.or(file.element).unwrap_or(ElementKind::Neighbours);
        let n_k = cli.n_k.or(file.n_k).unwrap_or(256);
        let threads = cli.threads.or(file.threads).unwrap_or(0);

        let cfg = SweepConfig {
            command,
            model,
            n,
            g,
            t_prime,
            v0,
            er,
            element,
            n_k,
            threads,
            assumed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Validation(m));
        if self.command == Command::Validate {
            return Ok(());
        }
        match self.model {
            ModelKind::Hn if !(2..=MAX_HN_SITES).contains(&self.n) => {
                return bad(format!("n must be in 2..={MAX_HN_SITES} for the HN model, got {}", self.n))
            }
            ModelKind::Ssh if !(2..=MAX_SSH_CELLS).contains(&self.n) => {
                return bad(format!("n must be in 2..={MAX_SSH_CELLS} cells for the SSH model, got {}", self.n))
            }
            _ => {}
        }
        if !self.g.is_finite() {
            return bad("g must be finite".into());
        }
        if let Some(er) = self.er {
            if !(er.re.is_finite() && er.im.is_finite()) {
                return bad("er must be finite".into());
            }
        }
        if self.n_k < 8 {
            return bad(format!("n_k must be >= 8, got {}", self.n_k));
        }
        let tp_points = self.t_prime.points();
        if self.model == ModelKind::Ssh && tp_points.contains(&0.0) {
            return bad("t_prime must be nonzero".into());
        }
        let needs_grid = matches!(self.command, Command::IprSweep | Command::NuSweep | Command::Flow);
        let needs_single = matches!(self.command, Command::Spectrum | Command::GapScan);
        if needs_grid && self.v0.single().is_some() {
            return bad(format!("{} needs a v0 grid (log:start:stop:count or lin:...)", self.command.name()));
        }
        if needs_single && self.v0.single().is_none() {
            return bad(format!("{} needs a single v0 value", self.command.name()));
        }
        if matches!(self.command, Command::NuSweep | Command::Flow) && self.v0.points().iter().any(|&v| !(v > 0.0)) {
            return bad("v0 grid must be positive".into());
        }
        match self.command {
            Command::GapScan => {
                if self.model != ModelKind::Ssh {
                    return bad("gap-scan needs --model ssh".into());
                }
                if self.t_prime.single().is_some() {
                    return bad("gap-scan needs a t_prime grid".into());
                }
            }
            Command::Winding | Command::NuSweep if self.er.is_none() => {
                return bad(format!("{} needs --er re,im", self.command.name()));
            }
            Command::Critical if self.g == 0.0 => return bad("g must be nonzero".into()),
            _ => {}
        }
        if self.command != Command::GapScan && self.t_prime.single().is_none() {
            return bad(format!("{} needs a single t_prime value", self.command.name()));
        }
        Ok(())
    }

    pub fn t_prime_single(&self) -> f64 {
        self.t_prime.single().unwrap_or(f64::NAN)
    }

    /// Canonical JSON of everything that determines the output; fields a
    /// command does not read are left out.
    pub fn canonical(&self) -> Value {
        use Command::*;
        let c = self.command;
        if c == Validate {
            return json!({ "command": c.name() });
        }
        let mut v = json!({
            "command": c.name(),
            "model": self.model,
            "n": self.n,
            "g": self.g,
        });
        if !matches!(c, Critical | Winding) {
            v["v0"] = json!(self.v0.to_string());
        }
        if self.model == ModelKind::Ssh || c == GapScan {
            v["t_prime"] = json!(self.t_prime.to_string());
        }
        if matches!(c, Winding | NuSweep) {
            if let Some(er) = self.er {
                v["er"] = json!([er.re, er.im]);
            }
            v["n_k"] = json!(self.n_k);
        }
        if c == NuSweep {
            v["element"] = json!(self.element);
        }
        v
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn pick<T: Copy + fmt::Display>(cli: Option<T>, file: Option<T>, default: T, name: &str, assumed: &mut Vec<String>) -> T {
    cli.or(file).unwrap_or_else(|| {
        assumed.push(format!("{name}={default}"));
        default
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_specs_parse_and_print() {
        let g: GridSpec = "log:1:1e12:301".parse().unwrap();
        assert_eq!(g, GridSpec::Log { start: 1.0, stop: 1e12, count: 301 });
        assert_eq!(g.to_string(), "log:1.0:1000000000000.0:301");
        assert_eq!(g.points().len(), 301);
        assert_eq!("2.5".parse::<GridSpec>().unwrap(), GridSpec::Single(2.5));
        let lin: GridSpec = "lin:-1:1:5".parse().unwrap();
        assert_eq!(lin.points(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn bad_grids_are_rejected() {
        for s in ["log:5:1:10", "log:0:1:10", "lin:0:1:1", "log:1:2", "x", "lin:a:1:3", "log:1:1:3"] {
            assert!(matches!(s.parse::<GridSpec>(), Err(CliError::Validation(_))), "{s}");
        }
    }

    #[test]
    fn er_parsing() {
        assert_eq!(parse_er("0.72,0.64").unwrap(), Complex64::new(0.72, 0.64));
        assert_eq!(parse_er("-3").unwrap(), Complex64::new(-3.0, 0.0));
        assert!(parse_er("1,2,3").is_err());
    }

    #[test]
    fn flags_override_file_and_defaults_are_recorded() {
        let file = FileConfig::from_json(r#"{"model": "ssh", "n": 10, "g": 0.5, "er": [1.0, -0.5]}"#).unwrap();
        let cli = Overrides {
            n: Some(12),
            ..Default::default()
        };
        let c = SweepConfig::resolve(Command::Winding, file, cli).unwrap();
        assert_eq!((c.model, c.n, c.g), (ModelKind::Ssh, 12, 0.5));
        assert_eq!(c.er, Some(Complex64::new(1.0, -0.5)));
        assert_eq!(c.assumed, vec!["t_prime=2.0".to_string()]);
    }

    #[test]
    fn unknown_config_fields_name_the_location() {
        let err = FileConfig::from_json("{\n  \"n\": 14,\n  \"bogus\": 1\n}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn limits_are_enforced() {
        let over = |model, n| Overrides {
            model: Some(model),
            n: Some(n),
            ..Default::default()
        };
        assert!(SweepConfig::resolve(Command::Spectrum, FileConfig::default(), over(ModelKind::Hn, 64)).is_ok());
        assert!(SweepConfig::resolve(Command::Spectrum, FileConfig::default(), over(ModelKind::Hn, 65)).is_err());
        assert!(SweepConfig::resolve(Command::Spectrum, FileConfig::default(), over(ModelKind::Ssh, 33)).is_err());
        let g0 = Overrides {
            g: Some(0.0),
            ..Default::default()
        };
        assert!(SweepConfig::resolve(Command::Critical, FileConfig::default(), g0).is_err());
    }

    #[test]
    fn hash_ignores_threads() {
        let a = SweepConfig::resolve(Command::Spectrum, FileConfig::default(), Overrides::default()).unwrap();
        let b = SweepConfig::resolve(
            Command::Spectrum,
            FileConfig::default(),
            Overrides {
                threads: Some(7),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
