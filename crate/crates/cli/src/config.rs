use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use gcwave::diagnostics::{Sampling, FINE_SAMPLES_PER_SLAB};
use gcwave::slabsolver::ProblemKind;
use gcwave::spacefem::MeshFamily;
use gcwave::study::{Conventions, Method, StudyConfig};

use crate::CliError;

/// Inclusive level range written as `a..b`, `a..=b`, `a,b,c` or `a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Levels(pub Vec<usize>);

impl FromStr for Levels {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad level '{}'", t.trim()));
        let levels = if let Some((a, b)) = s.split_once("..") {
            let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
            if b < a {
                return Err(format!("empty level range '{s}'"));
            }
            (a..=b).collect()
        } else {
            s.split(',').map(num).collect::<Result<Vec<_>, _>>()?
        };
        Ok(Levels(levels))
    }
}

/// Values read from a `key = value` file. `#` starts a comment.
#[derive(Debug, Default)]
pub struct ConfigFile {
    path: PathBuf,
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config file {}: {e}", path.display())))?;
        Self::parse(path, &text)
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("{}:{}: expected key = value", path.display(), i + 1))
            })?;
            let key = key.trim().replace('_', "-");
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(CliError::Config(format!("{}:{}: duplicate key '{key}'", path.display(), i + 1)));
            }
        }
        Ok(ConfigFile {
            path: path.to_path_buf(),
            entries,
        })
    }

    /// The flag value if given, else the parsed file value.
    pub fn pick<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        let file = self.entries.remove(key);
        if flag.is_some() {
            return Ok(flag);
        }
        file.map(|v| {
            v.parse::<T>()
                .map_err(|e| CliError::Config(format!("{}: invalid {key} '{v}': {e}", self.path.display())))
        })
        .transpose()
    }

    pub fn pick_flag(&mut self, key: &str, flag: bool) -> Result<bool, CliError> {
        Ok(self.pick(key, flag.then_some(true))?.unwrap_or(false))
    }

    /// Fails on keys no option consumed.
    pub fn finish(self) -> Result<(), CliError> {
        match self.entries.keys().next() {
            Some(k) => Err(CliError::Config(format!("{}: unknown key '{k}'", self.path.display()))),
            None => Ok(()),
        }
    }
}

/// Options shared by the study subcommands, all optional so a config file
/// can fill the gaps.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct StudyArgs {
    /// cgp, cgp-c1, cgp-c2 or cgp-c1-lifted
    #[arg(long)]
    pub scheme: Option<Method>,
    /// Polynomial degree in time
    #[arg(long)]
    pub k: Option<usize>,
    /// Polynomial degree in space
    #[arg(long)]
    pub r: Option<usize>,
    /// table1 (refine space and time) or table2a (fixed 4x4 mesh)
    #[arg(long)]
    pub family: Option<MeshFamily>,
    #[arg(long)]
    pub tau0: Option<f64>,
    /// Final time
    #[arg(long = "T", visible_alias = "end-time")]
    pub end_time: Option<f64>,
    /// exsol1, exsol2, standing-wave or zero
    #[arg(long)]
    pub problem: Option<ProblemKind>,
    /// reference or standard
    #[arg(long)]
    pub conventions: Option<Conventions>,
    /// Largest accepted relative residual of a slab solve
    #[arg(long)]
    pub solver_tol: Option<f64>,
    /// key = value file; flags win on conflict
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub struct StudyDefaults {
    pub scheme: Method,
    pub problem: ProblemKind,
    pub conventions: Conventions,
}

impl StudyArgs {
    /// Merges with `file` and builds the study; sampling is left to the caller.
    pub fn resolve(&self, file: &mut ConfigFile, defaults: StudyDefaults, levels: Vec<usize>) -> Result<StudyConfig, CliError> {
        let method = file.pick("scheme", self.scheme)?.unwrap_or(defaults.scheme);
        let k = file.pick("k", self.k)?.unwrap_or(3);
        let r = file.pick("r", self.r)?.unwrap_or(3);
        let family = file.pick("family", self.family)?.unwrap_or(MeshFamily::Doubling);
        let problem = file.pick("problem", self.problem)?.unwrap_or(defaults.problem);
        let conventions = file.pick("conventions", self.conventions)?.unwrap_or(defaults.conventions);
        let mut cfg = StudyConfig::new(method, k, r, family, levels, problem, conventions);
        if let Some(t) = file.pick("tau0", self.tau0)? {
            cfg.tau0 = t;
        }
        let end = file.pick("T", self.end_time)?;
        if let Some(t) = file.pick("end-time", end)? {
            cfg.end_time = t;
        }
        cfg.solver_tol = file.pick("solver-tol", self.solver_tol)?;
        Ok(cfg)
    }
}

/// Sampling override from `--samples-per-slab` or `--paper-grid`.
pub fn sampling(samples: Option<usize>, paper_grid: bool) -> Result<Option<Sampling>, CliError> {
    match (samples, paper_grid) {
        (Some(_), true) => Err(CliError::Config("samples-per-slab and paper-grid are mutually exclusive".into())),
        (Some(s), false) => Ok(Some(Sampling::Grid(s))),
        (None, true) => Ok(Some(Sampling::Grid(FINE_SAMPLES_PER_SLAB))),
        (None, false) => Ok(None),
    }
}

pub fn validate(cfg: &StudyConfig) -> Result<(), CliError> {
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))
}
