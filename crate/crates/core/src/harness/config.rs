//! Experiment configuration: `key = value` text files plus `--key=value`
//! overrides.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::integrators::Scheme;
use crate::solver::SolverKind;
use crate::twoscale::{Centering, Order};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestCase {
    TestCos,
    TestOsc,
}

impl FromStr for TestCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "testcos" => Ok(TestCase::TestCos),
            "testosc" => Ok(TestCase::TestOsc),
            _ => Err(Error::Parse(format!("unknown test '{s}' (expected testcos or testosc)"))),
        }
    }
}

impl TestCase {
    pub fn name(&self) -> &'static str {
        match self {
            TestCase::TestCos => "testcos",
            TestCase::TestOsc => "testosc",
        }
    }
}

/// Time integrator or averaged model used for the candidate runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Scheme(Scheme),
    TwoScale(Order),
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "twoscale1" => Ok(Method::TwoScale(Order::First)),
            "twoscale2" => Ok(Method::TwoScale(Order::Second)),
            _ => Ok(Method::Scheme(s.parse()?)),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Scheme(s) => f.write_str(s.name()),
            Method::TwoScale(o) => write!(f, "twoscale{}", o.as_u8()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub test: TestCase,
    pub method: Method,
    pub n: Vec<usize>,
    pub eps: Vec<f64>,
    pub dt: Vec<f64>,
    pub t_fin: f64,
    pub diffusion: f64,
    pub amplitude: f64,
    pub delta: f64,
    pub phi: f64,
    /// Explicit adsorption length; overrides `delta`/`phi` when set.
    pub adsorption_length: Option<f64>,
    pub sigma: f64,
    pub y0: f64,
    pub radius: f64,
    pub detector: (f64, f64),
    pub dt_ref: f64,
    pub n_ref: usize,
    pub solver: SolverKind,
    pub ref_solver: SolverKind,
    pub tolerance: f64,
    pub centering: Centering,
    pub dt_sub: Option<f64>,
    pub output: Option<PathBuf>,
    pub cache: Option<PathBuf>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            test: TestCase::TestCos,
            method: Method::Scheme(Scheme::Ua2),
            n: vec![80],
            eps: vec![1e-2],
            dt: vec![1e-2],
            t_fin: 0.1,
            diffusion: 0.02,
            amplitude: 1.0,
            delta: 1e-2,
            phi: 1.0,
            adsorption_length: None,
            sigma: 0.2,
            y0: 0.0,
            radius: 0.2,
            detector: (0.0, -0.5),
            dt_ref: 1e-5,
            n_ref: 80,
            solver: SolverKind::Direct,
            ref_solver: SolverKind::Krylov,
            tolerance: 1e-12,
            centering: Centering::Centered,
            dt_sub: None,
            output: None,
            cache: None,
        }
    }
}

pub const KEYS: &[&str] = &[
    "test", "scheme", "N", "eps", "dt", "t_fin", "D", "A", "delta", "phi", "M", "sigma", "y0", "R_B", "P", "dt_ref",
    "N_ref", "solver", "ref_solver", "tol", "centering", "dt_sub", "output", "cache",
];

fn number(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("{key}: '{v}' is not a number")))?;
    if !x.is_finite() {
        return Err(Error::Parse(format!("{key}: '{v}' is not finite")));
    }
    Ok(x)
}

fn list<T>(key: &str, v: &str, parse: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let items = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse)
        .collect::<Result<Vec<_>>>()?;
    if items.is_empty() {
        return Err(Error::Parse(format!("{key}: empty list")));
    }
    Ok(items)
}

fn count(key: &str, v: &str) -> Result<usize> {
    v.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("{key}: '{v}' is not a non-negative integer")))
}

impl StudyConfig {
    /// Set one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "test" => self.test = v.parse()?,
            "scheme" => self.method = v.parse()?,
            "N" => self.n = list(key, v, |s| count(key, s))?,
            "eps" => self.eps = list(key, v, |s| number(key, s))?,
            "dt" => self.dt = list(key, v, |s| number(key, s))?,
            "t_fin" => self.t_fin = number(key, v)?,
            "D" => self.diffusion = number(key, v)?,
            "A" => self.amplitude = number(key, v)?,
            "delta" => self.delta = number(key, v)?,
            "phi" => self.phi = number(key, v)?,
            "M" => {
                self.adsorption_length = match v {
                    "" | "auto" => None,
                    _ => Some(number(key, v)?),
                }
            }
            "sigma" => self.sigma = number(key, v)?,
            "y0" => self.y0 = number(key, v)?,
            "R_B" => self.radius = number(key, v)?,
            "P" => {
                let p = list(key, v, |s| number(key, s))?;
                if p.len() != 2 {
                    return Err(Error::Parse(format!("P: expected 'x,y', got '{v}'")));
                }
                self.detector = (p[0], p[1]);
            }
            "dt_ref" => self.dt_ref = number(key, v)?,
            "N_ref" => self.n_ref = count(key, v)?,
            "solver" => self.solver = v.parse()?,
            "ref_solver" => self.ref_solver = v.parse()?,
            "tol" => self.tolerance = number(key, v)?,
            "centering" => {
                self.centering = match v {
                    "centered" => Centering::Centered,
                    "uncentered" => Centering::Uncentered,
                    _ => return Err(Error::Parse(format!("centering: '{v}' (expected centered or uncentered)"))),
                }
            }
            "dt_sub" => {
                self.dt_sub = match v {
                    "" | "auto" => None,
                    _ => Some(number(key, v)?),
                }
            }
            "output" => self.output = (!v.is_empty()).then(|| PathBuf::from(v)),
            "cache" => self.cache = (!v.is_empty()).then(|| PathBuf::from(v)),
            _ => {
                return Err(Error::Parse(format!(
                    "unknown key '{key}' (known: {})",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Parse `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected 'key = value', got '{raw}'", lineno + 1)))?;
            cfg.set(k.trim(), v)
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Apply `--key=value` flags.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, flags: &[S]) -> Result<()> {
        for f in flags {
            let f = f.as_ref();
            let body = f
                .strip_prefix("--")
                .ok_or_else(|| Error::Parse(format!("override '{f}' must look like --key=value")))?;
            let (k, v) = body
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("override '{f}' must look like --key=value")))?;
            self.set(k, v)?;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("t_fin", self.t_fin, true),
            ("D", self.diffusion, false),
            ("delta", self.delta, false),
            ("sigma", self.sigma, false),
            ("dt_ref", self.dt_ref, false),
            ("tol", self.tolerance, false),
        ];
        for (name, v, zero_ok) in positive {
            if v < 0.0 || (!zero_ok && v == 0.0) {
                return Err(Error::Config(format!("{name} = {v} must be positive")));
            }
        }
        if self.amplitude < 0.0 || self.phi < 0.0 || self.radius < 0.0 {
            return Err(Error::Config("A, phi and R_B must be non-negative".into()));
        }
        if let Some(m) = self.adsorption_length {
            if m <= 0.0 {
                return Err(Error::Config(format!("M = {m} must be positive")));
            }
        }
        if let Some(s) = self.dt_sub {
            if s <= 0.0 {
                return Err(Error::Config(format!("dt_sub = {s} must be positive")));
            }
        }
        if self.eps.iter().any(|e| *e <= 0.0) || self.dt.iter().any(|d| *d <= 0.0) {
            return Err(Error::Config("eps and dt entries must be positive".into()));
        }
        if self.n.iter().any(|&n| n < 4) || self.n_ref < 4 {
            return Err(Error::Config("grids need at least 4 cells per axis".into()));
        }
        let (px, py) = self.detector;
        if px.abs() >= 1.0 || py.abs() >= 1.0 {
            return Err(Error::Config(format!("detector P = ({px}, {py}) lies outside the domain")));
        }
        if px.hypot(py) <= self.radius {
            return Err(Error::Config(format!("detector P = ({px}, {py}) lies inside the bubble")));
        }
        Ok(())
    }

    /// Canonical description of everything that determines a reference
    /// solution for the given `ε` (used as a cache key).
    pub fn reference_key(&self, eps: f64) -> String {
        let mut s = String::from("uaosc-reference-v1;");
        let _ = write!(
            s,
            "test={};eps={:?};N_ref={};dt_ref={:?};t_fin={:?};D={:?};A={:?};delta={:?};phi={:?};M={:?};sigma={:?};y0={:?};R_B={:?};tol={:?}",
            self.test.name(),
            eps,
            self.n_ref,
            self.dt_ref,
            self.t_fin,
            self.diffusion,
            self.amplitude,
            self.delta,
            self.phi,
            self.adsorption_length,
            self.sigma,
            self.y0,
            self.radius,
            self.tolerance,
        );
        s
    }

    /// Serialize back to the `key = value` format.
    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        let mut s = String::new();
        let _ = writeln!(s, "test = {}", self.test.name());
        let _ = writeln!(s, "scheme = {}", self.method);
        let _ = writeln!(
            s,
            "N = {}",
            self.n.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")
        );
        let _ = writeln!(s, "eps = {}", join(&self.eps));
        let _ = writeln!(s, "dt = {}", join(&self.dt));
        let _ = writeln!(s, "t_fin = {:?}", self.t_fin);
        let _ = writeln!(s, "D = {:?}", self.diffusion);
        let _ = writeln!(s, "A = {:?}", self.amplitude);
        let _ = writeln!(s, "delta = {:?}", self.delta);
        let _ = writeln!(s, "phi = {:?}", self.phi);
        let _ = writeln!(s, "M = {}", self.adsorption_length.map_or("auto".into(), |m| format!("{m:?}")));
        let _ = writeln!(s, "sigma = {:?}", self.sigma);
        let _ = writeln!(s, "y0 = {:?}", self.y0);
        let _ = writeln!(s, "R_B = {:?}", self.radius);
        let _ = writeln!(s, "P = {:?},{:?}", self.detector.0, self.detector.1);
        let _ = writeln!(s, "dt_ref = {:?}", self.dt_ref);
        let _ = writeln!(s, "N_ref = {}", self.n_ref);
        let _ = writeln!(s, "solver = {}", self.solver);
        let _ = writeln!(s, "ref_solver = {}", self.ref_solver);
        let _ = writeln!(s, "tol = {:?}", self.tolerance);
        let _ = writeln!(
            s,
            "centering = {}",
            match self.centering {
                Centering::Centered => "centered",
                Centering::Uncentered => "uncentered",
            }
        );
        let _ = writeln!(s, "dt_sub = {}", self.dt_sub.map_or("auto".into(), |d| format!("{d:?}")));
        if let Some(p) = &self.output {
            let _ = writeln!(s, "output = {}", p.display());
        }
        if let Some(p) = &self.cache {
            let _ = writeln!(s, "cache = {}", p.display());
        }
        s
    }
}
