use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use arbor_core::frob::{PrimeField, RationalMap};
use arbor_core::{Limits, PCOrbit};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "arbor",
    version,
    about = "Finite-level verification for iterated monodromy groups of quadratic maps"
)]
pub struct Cli {
    /// File of `key = value` lines; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Embed wall-clock time in the report (makes output non-reproducible).
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Args, Debug, Default, Clone)]
pub struct OrbitArgs {
    #[arg(long)]
    pub r: Option<u32>,
    #[arg(long)]
    pub s: Option<u32>,
}

#[derive(Subcommand, Debug)]
pub enum CommandArgs {
    /// Print the generator recursion and check the product relation.
    Gens {
        #[command(flatten)]
        orbit: OrbitArgs,
        #[arg(long)]
        level: Option<u32>,
    },
    /// Level signs of each generator against the closed form.
    Signs {
        #[command(flatten)]
        orbit: OrbitArgs,
        #[arg(long)]
        level: Option<u32>,
    },
    /// Decide odometer existence by criterion and by search.
    Odometer {
        #[command(flatten)]
        orbit: OrbitArgs,
        #[arg(long)]
        level: Option<u32>,
    },
    /// Cycle stability and settledness of one word.
    Settled {
        #[command(flatten)]
        orbit: OrbitArgs,
        #[arg(long)]
        word: Option<String>,
        #[arg(long)]
        level: Option<u32>,
        #[arg(long)]
        depth: Option<u32>,
    },
    /// Orders of G_n, quotients by N_{i,n}, abelianization.
    Group {
        #[command(flatten)]
        orbit: OrbitArgs,
        #[arg(long)]
        max_level: Option<u32>,
        #[arg(long)]
        quotients: bool,
        #[arg(long)]
        abelianization: bool,
    },
    /// Frobenius factor tree of a base point over F_p.
    Frobenius {
        #[arg(long)]
        p: Option<u64>,
        /// Omit to sweep every valid base point.
        #[arg(long)]
        a: Option<u64>,
        #[arg(long)]
        map: Option<String>,
        #[arg(long)]
        depth: Option<u32>,
    },
    /// Every family-level check in one report.
    VerifyAll {
        #[command(flatten)]
        orbit: OrbitArgs,
        #[arg(long)]
        max_level: Option<u32>,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        ab_level: Option<u32>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Gens,
    Signs,
    Odometer,
    Settled,
    Group,
    Frobenius,
    VerifyAll,
}

/// Fully resolved run: flags over config file over defaults.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orbit: Option<PCOrbit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub word: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_level: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ab_level: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map: Option<String>,
    pub quotients: bool,
    pub abelianization: bool,
    pub seed: u64,
    pub format: Format,
    pub limits: Limits,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub timing: bool,
}

const KEYS: &[&str] = &[
    "r",
    "s",
    "word",
    "level",
    "depth",
    "max-level",
    "samples",
    "ab-level",
    "p",
    "a",
    "map",
    "quotients",
    "abelianization",
    "seed",
    "format",
    "out",
    "timing",
];

/// Parses `key = value` lines; `#` starts a comment, `_` and `-` are
/// interchangeable in keys.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "config line {}: expected `key = value`",
                k + 1
            )));
        };
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!("config line {}: unknown key `{key}`", k + 1)));
        }
        let value = value.trim().trim_matches('"').to_string();
        map.insert(key, value);
    }
    Ok(map)
}

struct Merge {
    file: BTreeMap<String, String>,
}

impl Merge {
    fn get<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("invalid value `{v}` for `{key}`"))),
        }
    }

    fn flag(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        Ok(flag || self.get::<bool>(None, key)?.unwrap_or(false))
    }

    fn orbit(&self, args: &OrbitArgs) -> Result<PCOrbit, CliError> {
        let r = self.get(args.r, "r")?.ok_or_else(|| missing("r"))?;
        let s = self.get(args.s, "s")?.ok_or_else(|| missing("s"))?;
        PCOrbit::new(r, s).map_err(|e| CliError::Usage(e.to_string()))
    }
}

fn missing(key: &str) -> CliError {
    CliError::Usage(format!("missing required `--{key}`"))
}

fn at_most(name: &str, value: u32, max: u32) -> Result<u32, CliError> {
    if value > max {
        return Err(CliError::Usage(format!("{name} {value} exceeds the maximum {max}")));
    }
    Ok(value)
}

fn read_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_file(&text)
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let file = match &cli.config {
            Some(path) => read_config(path)?,
            None => BTreeMap::new(),
        };
        Self::resolve(cli, file, Limits::from_env())
    }

    pub fn resolve(cli: Cli, file: BTreeMap<String, String>, limits: Limits) -> Result<Self, CliError> {
        let m = Merge { file };
        let seed = m.get(cli.seed, "seed")?.unwrap_or(0);
        let out = m.get(cli.out, "out")?;
        let timing = m.flag(cli.timing, "timing")?;
        let format = m.get(cli.format, "format")?;
        let mut cfg = RunConfig {
            command: Command::Gens,
            orbit: None,
            word: None,
            level: None,
            depth: None,
            max_level: None,
            samples: None,
            ab_level: None,
            p: None,
            a: None,
            map: None,
            quotients: false,
            abelianization: false,
            seed,
            format: format.unwrap_or(Format::Json),
            limits,
            out,
            timing,
        };
        let max = limits.max_level;
        match cli.command {
            CommandArgs::Gens { orbit, level } => {
                cfg.command = Command::Gens;
                cfg.orbit = Some(m.orbit(&orbit)?);
                cfg.level = Some(at_most("level", m.get(level, "level")?.unwrap_or(12.min(max)), max)?);
            }
            CommandArgs::Signs { orbit, level } => {
                let o = m.orbit(&orbit)?;
                cfg.command = Command::Signs;
                cfg.orbit = Some(o);
                cfg.level = Some(at_most("level", m.get(level, "level")?.unwrap_or(3 * o.r()), 64)?);
            }
            CommandArgs::Odometer { orbit, level } => {
                cfg.command = Command::Odometer;
                cfg.orbit = Some(m.orbit(&orbit)?);
                cfg.level = Some(at_most("level", m.get(level, "level")?.unwrap_or(12.min(max)), max)?);
            }
            CommandArgs::Settled {
                orbit,
                word,
                level,
                depth,
            } => {
                cfg.command = Command::Settled;
                cfg.orbit = Some(m.orbit(&orbit)?);
                cfg.word = Some(m.get(word, "word")?.ok_or_else(|| missing("word"))?);
                let depth = at_most("depth", m.get(depth, "depth")?.unwrap_or(12.min(max)), max)?;
                let level = at_most("level", m.get(level, "level")?.unwrap_or(4.min(depth)), depth)?;
                cfg.depth = Some(depth);
                cfg.level = Some(level);
            }
            CommandArgs::Group {
                orbit,
                max_level,
                quotients,
                abelianization,
            } => {
                cfg.command = Command::Group;
                cfg.orbit = Some(m.orbit(&orbit)?);
                let cap = limits.max_group_level.min(max);
                cfg.max_level = Some(at_most(
                    "max-level",
                    m.get(max_level, "max-level")?.unwrap_or(8.min(cap)),
                    cap,
                )?);
                cfg.quotients = m.flag(quotients, "quotients")?;
                cfg.abelianization = m.flag(abelianization, "abelianization")?;
                cfg.format = format.unwrap_or(Format::Csv);
            }
            CommandArgs::Frobenius { p, a, map, depth } => {
                cfg.command = Command::Frobenius;
                let p = m.get(p, "p")?.ok_or_else(|| missing("p"))?;
                let field = PrimeField::new(p).map_err(|e| CliError::Usage(e.to_string()))?;
                let map = m.get(map, "map")?.unwrap_or_else(|| "1/(x-1)^2".to_string());
                RationalMap::parse(&map, field).map_err(|e| CliError::Usage(e.to_string()))?;
                let a = m.get(a, "a")?;
                if let Some(a) = a {
                    if a >= p {
                        return Err(CliError::Usage(format!("base point {a} is not a residue modulo {p}")));
                    }
                }
                cfg.p = Some(p);
                cfg.a = a;
                cfg.map = Some(map);
                cfg.depth = Some(at_most(
                    "depth",
                    m.get(depth, "depth")?.unwrap_or(8.min(limits.max_frob_depth)),
                    limits.max_frob_depth,
                )?);
            }
            CommandArgs::VerifyAll {
                orbit,
                max_level,
                depth,
                samples,
                ab_level,
            } => {
                cfg.command = Command::VerifyAll;
                cfg.orbit = Some(m.orbit(&orbit)?);
                let max_level = at_most("max-level", m.get(max_level, "max-level")?.unwrap_or(10.min(max)), max)?;
                cfg.max_level = Some(max_level);
                cfg.depth = Some(at_most("depth", m.get(depth, "depth")?.unwrap_or(12.min(max)), max)?);
                cfg.samples = Some(m.get(samples, "samples")?.unwrap_or(200));
                let ab_cap = limits.max_derived_level.min(limits.max_group_level).min(max_level);
                cfg.ab_level = Some(at_most(
                    "ab-level",
                    m.get(ab_level, "ab-level")?.unwrap_or(7.min(ab_cap)),
                    ab_cap,
                )?);
            }
        }
        Ok(cfg)
    }
}

/// Parses an argument vector (program name first) into a resolved config.
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(CliError::Clap)?;
    RunConfig::from_cli(cli)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(args: &[&str], file: &str, limits: Limits) -> Result<RunConfig, CliError> {
        let cli = Cli::try_parse_from(std::iter::once("arbor").chain(args.iter().copied()))?;
        RunConfig::resolve(cli, parse_config_file(file)?, limits)
    }

    #[test]
    fn defaults_per_command() {
        let l = Limits::default();
        let signs = resolve(&["signs", "--r", "5", "--s", "2"], "", l).unwrap();
        assert_eq!(signs.level, Some(15));
        let group = resolve(&["group", "--r", "3", "--s", "2"], "", l).unwrap();
        assert_eq!(group.format, Format::Csv);
        assert_eq!(group.max_level, Some(8));
        let frob = resolve(&["frobenius", "--p", "7"], "", l).unwrap();
        assert_eq!(frob.map.as_deref(), Some("1/(x-1)^2"));
        assert_eq!((frob.a, frob.depth), (None, Some(8)));
        let all = resolve(&["verify-all", "--r", "3", "--s", "2"], "", l).unwrap();
        assert_eq!(
            (all.max_level, all.depth, all.samples, all.ab_level),
            (Some(10), Some(12), Some(200), Some(7))
        );
    }

    #[test]
    fn file_values_and_precedence() {
        let l = Limits::default();
        let file = "r = 6\ns = 4\nquotients = true\nformat = json\nmax_level = 3";
        let cfg = resolve(&["group", "--max-level", "2"], file, l).unwrap();
        assert_eq!(cfg.orbit, Some(PCOrbit::new(6, 4).unwrap()));
        assert!(cfg.quotients);
        assert_eq!(cfg.format, Format::Json);
        assert_eq!(cfg.max_level, Some(2));
        assert!(matches!(
            resolve(&["group"], "r = six\ns = 2", l),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn limits_bound_levels() {
        let l = Limits::default().with_max_level(5);
        assert!(resolve(&["odometer", "--r", "4", "--s", "2", "--level", "6"], "", l).is_err());
        // defaults shrink to fit the cap
        let cfg = resolve(&["odometer", "--r", "4", "--s", "2"], "", l).unwrap();
        assert_eq!(cfg.level, Some(5));
        assert!(resolve(
            &["settled", "--r", "4", "--s", "2", "--word", "a1", "--level", "5", "--depth", "4"],
            "",
            l
        )
        .is_err());
    }
}
