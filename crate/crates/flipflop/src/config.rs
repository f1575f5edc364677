//! Run settings: command-line flags, an optional JSON file and built-in
//! defaults, merged in that order of precedence.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use flipflop_core::equilibria::mu_h;
use flipflop_core::{Params, Point};
use serde::{Deserialize, Serialize};

use crate::output::Output;
use crate::Failure;

/// Default output directory when neither a flag nor the config file sets one.
pub const OUT_DIR_ENV: &str = "FLIPFLOP_OUT_DIR";

const DEFAULT_LAMBDA: f64 = 0.99;
const HOPF_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    /// Distance above the Hopf threshold; sets mu = mu_h(lambda) + nu.
    #[arg(long, allow_hyphen_values = true)]
    pub nu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y0: Option<f64>,
    #[arg(short = 'n', long = "iters")]
    pub iters: Option<usize>,
    #[arg(long)]
    pub transient: Option<usize>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Seed of the random generator.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Output format; repeat for several.
    #[arg(long = "format", value_enum)]
    pub formats: Vec<Format>,
    /// JSON file with settings; flags take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Every setting any command reads, each optional. This is also the schema
/// of the JSON config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub nu: Option<f64>,
    pub x0: Option<f64>,
    pub y0: Option<f64>,
    pub iters: Option<usize>,
    pub transient: Option<usize>,
    pub grid: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub format: Option<Vec<Format>>,
    pub max_residual: Option<f64>,
    pub mu_from: Option<f64>,
    pub mu_to: Option<f64>,
    pub nu_from: Option<f64>,
    pub nu_to: Option<f64>,
    pub steps: Option<usize>,
    pub resolution: Option<usize>,
    pub stagger: Option<bool>,
}

impl Settings {
    pub fn from_common(c: &CommonArgs) -> Settings {
        Settings {
            lambda: c.lambda,
            mu: c.mu,
            nu: c.nu,
            x0: c.x0,
            y0: c.y0,
            iters: c.iters,
            transient: c.transient,
            grid: c.grid,
            tol: c.tol,
            seed: c.seed,
            out_dir: c.out_dir.clone(),
            format: (!c.formats.is_empty()).then(|| c.formats.clone()),
            ..Settings::default()
        }
    }

    pub fn load(path: &Path) -> Result<Settings, Failure> {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Failure::Config(format!("bad config {}: {e}", path.display())))
    }

    /// Fields set in `self` win over those in `fallback`.
    pub fn or(self, fallback: Settings) -> Settings {
        Settings {
            lambda: self.lambda.or(fallback.lambda),
            mu: self.mu.or(fallback.mu),
            nu: self.nu.or(fallback.nu),
            x0: self.x0.or(fallback.x0),
            y0: self.y0.or(fallback.y0),
            iters: self.iters.or(fallback.iters),
            transient: self.transient.or(fallback.transient),
            grid: self.grid.or(fallback.grid),
            tol: self.tol.or(fallback.tol),
            seed: self.seed.or(fallback.seed),
            out_dir: self.out_dir.or(fallback.out_dir),
            format: self.format.or(fallback.format),
            max_residual: self.max_residual.or(fallback.max_residual),
            mu_from: self.mu_from.or(fallback.mu_from),
            mu_to: self.mu_to.or(fallback.mu_to),
            nu_from: self.nu_from.or(fallback.nu_from),
            nu_to: self.nu_to.or(fallback.nu_to),
            steps: self.steps.or(fallback.steps),
            resolution: self.resolution.or(fallback.resolution),
            stagger: self.stagger.or(fallback.stagger),
        }
    }
}

/// The resolved configuration of one run, echoed into every output file.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub seeds: Vec<Point>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transient: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rng_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_from: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_to: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu_from: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu_to: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stagger: Option<bool>,
    pub formats: Vec<Format>,
    pub out_dir: PathBuf,
}

fn finite(name: &str, v: f64) -> Result<f64, Failure> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Failure::Config(format!("{name} must be finite")))
    }
}

fn positive(name: &str, v: f64) -> Result<f64, Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Failure::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Resolves settings into a [`RunConfig`] one field at a time; each
/// accessor records what it returns.
pub struct Resolver {
    s: Settings,
    cfg: RunConfig,
    bound: bool,
}

impl Resolver {
    pub fn new(command: &str, settings: Settings) -> Resolver {
        Resolver {
            s: settings,
            cfg: RunConfig {
                command: command.to_string(),
                lambda: None,
                mu: None,
                nu: None,
                seeds: Vec::new(),
                iters: None,
                transient: None,
                grid: None,
                tol: None,
                rng_seed: None,
                max_residual: None,
                mu_from: None,
                mu_to: None,
                nu_from: None,
                nu_to: None,
                steps: None,
                resolution: None,
                stagger: None,
                formats: Vec::new(),
                out_dir: PathBuf::new(),
            },
            bound: false,
        }
    }

    /// For figure recipes: parameters and seeds are fixed, so supplying them
    /// is an error rather than silently ignored.
    pub fn bind(mut self) -> Result<Resolver, Failure> {
        let s = &self.s;
        for (name, set) in [
            ("lambda", s.lambda.is_some()),
            ("mu", s.mu.is_some()),
            ("nu", s.nu.is_some()),
            ("x0", s.x0.is_some()),
            ("y0", s.y0.is_some()),
        ] {
            if set {
                return Err(Failure::Config(format!(
                    "{name} is fixed by the figure recipe and cannot be set"
                )));
            }
        }
        self.bound = true;
        Ok(self)
    }

    pub fn bound_params(&mut self, lambda: f64, mu: f64) -> Result<Params, Failure> {
        debug_assert!(self.bound);
        self.cfg.lambda = Some(lambda);
        self.cfg.mu = Some(mu);
        Ok(Params::new(lambda, mu)?)
    }

    pub fn bound_seeds(&mut self, seeds: &[Point]) {
        self.cfg.seeds.extend_from_slice(seeds);
    }

    pub fn lambda(&mut self) -> Result<f64, Failure> {
        let l = positive("lambda", self.s.lambda.unwrap_or(DEFAULT_LAMBDA))?;
        self.cfg.lambda = Some(l);
        Ok(l)
    }

    /// λ and μ, with μ taken from `--mu`, from `--nu` above the threshold,
    /// or from `default_mu`.
    pub fn params(&mut self, default_mu: f64) -> Result<Params, Failure> {
        let lambda = self.lambda()?;
        let mu = match (self.s.mu, self.s.nu) {
            (Some(_), Some(_)) => {
                return Err(Failure::Config("give either mu or nu, not both".into()))
            }
            (Some(mu), None) => positive("mu", mu)?,
            (None, Some(nu)) => {
                let nu = finite("nu", nu)?;
                self.cfg.nu = Some(nu);
                self.threshold(lambda)? + nu
            }
            (None, None) => default_mu,
        };
        self.cfg.mu = Some(mu);
        Ok(Params::new(lambda, mu)?)
    }

    pub fn threshold(&mut self, lambda: f64) -> Result<f64, Failure> {
        mu_h(lambda, HOPF_TOL).map_err(|e| Failure::Config(format!("no Hopf threshold: {e}")))
    }

    /// The seed point from `--x0/--y0`, each falling back to `default`.
    pub fn seed(&mut self, default: Point) -> Result<Point, Failure> {
        let p = Point::new(
            finite("x0", self.s.x0.unwrap_or(default.x))?,
            finite("y0", self.s.y0.unwrap_or(default.y))?,
        );
        self.cfg.seeds.push(p);
        Ok(p)
    }

    pub fn seed_given(&self) -> bool {
        self.s.x0.is_some() || self.s.y0.is_some()
    }

    pub fn iters(&mut self, default: usize) -> usize {
        let n = self.s.iters.unwrap_or(default);
        self.cfg.iters = Some(n);
        n
    }

    pub fn transient(&mut self, default: usize) -> usize {
        let n = self.s.transient.unwrap_or(default);
        self.cfg.transient = Some(n);
        n
    }

    pub fn grid(&mut self, default: usize) -> Result<usize, Failure> {
        let g = self.s.grid.unwrap_or(default);
        if g == 0 {
            return Err(Failure::Config("grid must be positive".into()));
        }
        self.cfg.grid = Some(g);
        Ok(g)
    }

    pub fn tol(&mut self, default: f64) -> Result<f64, Failure> {
        let t = positive("tol", self.s.tol.unwrap_or(default))?;
        self.cfg.tol = Some(t);
        Ok(t)
    }

    pub fn rng_seed(&mut self) -> u64 {
        let s = self.s.seed.unwrap_or(0);
        self.cfg.rng_seed = Some(s);
        s
    }

    pub fn max_residual(&mut self, default: f64) -> Result<f64, Failure> {
        let r = positive("max-residual", self.s.max_residual.unwrap_or(default))?;
        self.cfg.max_residual = Some(r);
        Ok(r)
    }

    pub fn mu_range(&mut self, default: (f64, f64)) -> Result<(f64, f64), Failure> {
        let lo = positive("mu-from", self.s.mu_from.unwrap_or(default.0))?;
        let hi = positive("mu-to", self.s.mu_to.unwrap_or(default.1))?;
        if hi < lo {
            return Err(Failure::Config("mu-to is below mu-from".into()));
        }
        self.cfg.mu_from = Some(lo);
        self.cfg.mu_to = Some(hi);
        Ok((lo, hi))
    }

    pub fn nu_range(&mut self, default: (f64, f64)) -> Result<(f64, f64), Failure> {
        let lo = positive("nu-from", self.s.nu_from.unwrap_or(default.0))?;
        let hi = positive("nu-to", self.s.nu_to.unwrap_or(default.1))?;
        if hi < lo {
            return Err(Failure::Config("nu-to is below nu-from".into()));
        }
        self.cfg.nu_from = Some(lo);
        self.cfg.nu_to = Some(hi);
        Ok((lo, hi))
    }

    pub fn steps(&mut self, default: usize) -> Result<usize, Failure> {
        let n = self.s.steps.unwrap_or(default);
        if n == 0 {
            return Err(Failure::Config("steps must be positive".into()));
        }
        self.cfg.steps = Some(n);
        Ok(n)
    }

    pub fn resolution(&mut self, default: usize) -> usize {
        let r = self.s.resolution.unwrap_or(default);
        self.cfg.resolution = Some(r);
        r
    }

    pub fn stagger(&mut self) -> bool {
        let s = self.s.stagger.unwrap_or(false);
        self.cfg.stagger = Some(s);
        s
    }

    /// Finishes resolution: picks the formats (rejecting any the command
    /// cannot write) and the output directory, which comes from the flag or
    /// config file, then the environment, then the working directory.
    pub fn output(mut self, allowed: &[Format], default: &[Format]) -> Result<Output, Failure> {
        let mut formats = self.s.format.clone().unwrap_or_else(|| default.to_vec());
        formats.sort();
        formats.dedup();
        if let Some(f) = formats.iter().find(|f| !allowed.contains(f)) {
            return Err(Failure::Config(format!(
                "{} cannot write {}",
                self.cfg.command,
                f.extension()
            )));
        }
        self.cfg.formats = formats;
        self.cfg.out_dir = self
            .s
            .out_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        Output::new(self.cfg)
    }
}
