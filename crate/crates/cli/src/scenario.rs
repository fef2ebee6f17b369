//! Scenario files: flat `key = value` lines, `#` comments, dotted section
//! names. Lengths are in units of the aperture radius β.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cvsat_core::fading::{expand_links, FadingChannel, LinkGeometry};
use cvsat_core::gaussian::Squeezing;
use cvsat_core::numerics::{McSpec, QuadratureSpec};
use cvsat_core::schemes::{SchemeConfig, SchemeKind};

use crate::CliError;

/// Closed grid `min..=max` with `steps` evenly spaced points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Range {
    pub fn single(x: f64) -> Self {
        Range { min: x, max: x, steps: 1 }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let span = self.max - self.min;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.max
                } else {
                    self.min + span * i as f64 / (self.steps - 1) as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsType {
    Classical,
    Quantum,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PostSelectBlock {
    pub kind: PsType,
    pub zeta_th: Option<Range>,
    pub q_th: Option<Range>,
    pub tap_t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: Option<String>,
    pub schemes: Vec<SchemeKind>,
    pub r: Range,
    pub sigma_b: Range,
    /// Downlink deflection spread for the direct pair, overriding `k1·k2·σ_b`.
    pub sigma_b_down: Option<f64>,
    pub beta: f64,
    pub w: f64,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    pub chi: Vec<f64>,
    pub postselect: Option<PostSelectBlock>,
    pub quad_nodes: usize,
    pub quad_subdivisions: usize,
    pub mc: Option<(u64, u64)>,
    pub output: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "name",
    "schemes",
    "r",
    "r.min",
    "r.max",
    "r.steps",
    "sigma_b",
    "sigma_b.min",
    "sigma_b.max",
    "sigma_b.steps",
    "sigma_b_down",
    "beta",
    "w",
    "beta_over_w",
    "k1",
    "k2",
    "chi",
    "postselect.type",
    "postselect.tap_T",
    "postselect.zeta_th",
    "postselect.zeta_th.min",
    "postselect.zeta_th.max",
    "postselect.zeta_th.steps",
    "postselect.q_th",
    "postselect.q_th.min",
    "postselect.q_th.max",
    "postselect.q_th.steps",
    "quad.nodes",
    "quad.subdivisions",
    "mc.samples",
    "mc.seed",
    "output",
];

fn config(field: &str, msg: impl Into<String>) -> CliError {
    CliError::Config {
        field: field.to_string(),
        msg: msg.into(),
    }
}

struct Table(BTreeMap<String, String>);

impl Table {
    fn parse(text: &str) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config(&format!("line {}", n + 1), "expected `key = value`"))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(config(key, "unknown key"));
            }
            if map.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(config(key, "given twice"));
            }
        }
        Ok(Table(map))
    }

    fn str(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn real(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.str(key)
            .map(|s| {
                s.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| config(key, format!("`{s}` is not a finite number")))
            })
            .transpose()
    }

    fn int(&self, key: &str) -> Result<Option<u64>, CliError> {
        self.str(key)
            .map(|s| s.parse::<u64>().map_err(|_| config(key, format!("`{s}` is not a non-negative integer"))))
            .transpose()
    }

    fn reals(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        self.str(key)
            .map(|s| {
                s.split(',')
                    .map(|t| {
                        let t = t.trim();
                        t.parse::<f64>()
                            .ok()
                            .filter(|x| x.is_finite())
                            .ok_or_else(|| config(key, format!("`{t}` is not a finite number")))
                    })
                    .collect()
            })
            .transpose()
    }

    /// Either `key = x` or the `key.min/max/steps` triple.
    fn range(&self, key: &str) -> Result<Option<Range>, CliError> {
        let parts = ["min", "max", "steps"].map(|p| format!("{key}.{p}"));
        let given = parts.iter().filter(|p| self.0.contains_key(p.as_str())).count();
        match (self.real(key)?, given) {
            (Some(_), n) if n > 0 => Err(config(key, "give either a single value or min/max/steps")),
            (Some(x), _) => Ok(Some(Range::single(x))),
            (None, 0) => Ok(None),
            (None, 3) => {
                let min = self.real(&parts[0])?.unwrap();
                let max = self.real(&parts[1])?.unwrap();
                let steps = self.int(&parts[2])?.unwrap() as usize;
                if steps == 0 {
                    return Err(config(&parts[2], "must be at least 1"));
                }
                if min > max {
                    return Err(config(&parts[0], "min exceeds max"));
                }
                Ok(Some(Range { min, max, steps }))
            }
            (None, _) => Err(config(key, "min, max and steps are all required")),
        }
    }
}

impl Scenario {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config("scenario", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let t = Table::parse(text)?;
        let schemes = match t.str("schemes") {
            None => vec![SchemeKind::Direct],
            Some(s) => {
                let mut kinds = Vec::new();
                for name in s.split(',') {
                    let kind: SchemeKind = name
                        .trim()
                        .parse()
                        .map_err(|_| config("schemes", format!("unknown scheme `{}`", name.trim())))?;
                    if !kinds.contains(&kind) {
                        kinds.push(kind);
                    }
                }
                // Rows are ordered by scheme name.
                kinds.sort_by_key(|k| k.name());
                kinds
            }
        };
        let r = t.range("r")?.ok_or_else(|| config("r", "required"))?;
        let sigma_b = t.range("sigma_b")?.ok_or_else(|| config("sigma_b", "required"))?;
        let beta = t.real("beta")?.unwrap_or(1.0);
        let w = match (t.real("w")?, t.real("beta_over_w")?) {
            (Some(_), Some(_)) => return Err(config("w", "give either w or beta_over_w")),
            (Some(w), None) => w,
            (None, Some(ratio)) => {
                if !(ratio > 0.0) {
                    return Err(config("beta_over_w", "must be positive"));
                }
                beta / ratio
            }
            (None, None) => return Err(config("beta_over_w", "required (or w)")),
        };
        if !(beta > 0.0) {
            return Err(config("beta", "must be positive"));
        }
        if !(w > 0.0) {
            return Err(config("w", "must be positive"));
        }
        let postselect = match t.str("postselect.type") {
            None => None,
            Some(kind) => {
                let kind = match kind {
                    "classical" => PsType::Classical,
                    "quantum" => PsType::Quantum,
                    "both" => PsType::Both,
                    other => return Err(config("postselect.type", format!("`{other}` is not classical, quantum or both"))),
                };
                let zeta_th = t.range("postselect.zeta_th")?;
                let q_th = t.range("postselect.q_th")?;
                if kind != PsType::Quantum && zeta_th.is_none() {
                    return Err(config("postselect.zeta_th", "required for classical post-selection"));
                }
                if kind != PsType::Classical && q_th.is_none() {
                    return Err(config("postselect.q_th", "required for quantum post-selection"));
                }
                let tap_t = t.real("postselect.tap_T")?.unwrap_or(1.0);
                if !(tap_t > 0.0 && tap_t <= 1.0) {
                    return Err(config("postselect.tap_T", "must lie in (0, 1]"));
                }
                Some(PostSelectBlock { kind, zeta_th, q_th, tap_t })
            }
        };
        let mc = match (t.int("mc.samples")?, t.int("mc.seed")?) {
            (None, None) => None,
            (Some(n), seed) => Some((n, seed.unwrap_or(0))),
            (None, Some(_)) => return Err(config("mc.samples", "required when mc.seed is given")),
        };
        let s = Scenario {
            name: t.str("name").map(str::to_string),
            schemes,
            r,
            sigma_b,
            sigma_b_down: t.real("sigma_b_down")?,
            beta,
            w,
            k1: t.real("k1")?,
            k2: t.real("k2")?,
            chi: t.reals("chi")?.unwrap_or_else(|| vec![0.0]),
            postselect,
            quad_nodes: t.int("quad.nodes")?.map_or(QuadratureSpec::DEFAULT_NODES, |n| n as usize),
            quad_subdivisions: t
                .int("quad.subdivisions")?
                .map_or(QuadratureSpec::DEFAULT_SUBDIVISIONS, |n| n as usize),
            mc,
            output: t.str("output").map(PathBuf::from),
        };
        s.check()?;
        Ok(s)
    }

    /// Validates every grid point against the library's own constraints.
    fn check(&self) -> Result<(), CliError> {
        if self.r.min < 0.0 {
            return Err(config("r", "squeezing must be non-negative"));
        }
        if self.sigma_b.min < 0.0 {
            return Err(config("sigma_b", "must be non-negative"));
        }
        if self.chi.iter().any(|&c| c < 0.0) {
            return Err(config("chi", "excess noise must be non-negative"));
        }
        if let Some(d) = self.sigma_b_down {
            if d < 0.0 {
                return Err(config("sigma_b_down", "must be non-negative"));
            }
            if self.schemes.iter().any(|&k| k != SchemeKind::Direct) {
                return Err(config("sigma_b_down", "only applies to the direct scheme"));
            }
        } else {
            let k1 = self.k1.ok_or_else(|| config("k1", "required"))?;
            let k2 = self.k2.ok_or_else(|| config("k2", "required"))?;
            LinkGeometry::new(self.sigma_b.max, k1, k2).map_err(|e| core_config(e, "k1"))?;
        }
        self.quad()?;
        if let Some((n, seed)) = self.mc {
            McSpec::new(n, seed).map_err(|e| core_config(e, "mc.samples"))?;
        }
        Ok(())
    }

    pub fn quad(&self) -> Result<QuadratureSpec, CliError> {
        QuadratureSpec::diagnostic(self.quad_nodes, self.quad_subdivisions).map_err(|e| match e {
            cvsat_core::Error::Domain { param: "subdivisions", .. } => config("quad.subdivisions", e.to_string()),
            _ => config("quad.nodes", e.to_string()),
        })
    }

    pub fn with_quad(mut self, nodes: Option<usize>, subdivisions: Option<usize>) -> Result<Self, CliError> {
        if let Some(n) = nodes {
            self.quad_nodes = n;
        }
        if let Some(s) = subdivisions {
            self.quad_subdivisions = s;
        }
        self.quad()?;
        Ok(self)
    }

    pub fn beta_over_w(&self) -> f64 {
        self.beta / self.w
    }

    /// Scheme configuration at one grid point.
    pub fn scheme_config(&self, kind: SchemeKind, sigma_b: f64, r: f64, chi: f64) -> Result<SchemeConfig, CliError> {
        let geom = self.geometry(sigma_b)?;
        let sq = Squeezing::new(r).map_err(|e| core_config(e, "r"))?;
        let mut cfg = SchemeConfig::new(kind, sq, geom, self.beta_over_w(), chi)
            .map_err(|e| core_config(e, "chi"))?
            .with_quad(self.quad()?);
        cfg.beta = self.beta;
        cfg.w = self.w;
        Ok(cfg)
    }

    fn geometry(&self, sigma_b: f64) -> Result<LinkGeometry, CliError> {
        let (k1, k2) = (self.k1.unwrap_or(1.0), self.k2.unwrap_or(1.0));
        LinkGeometry::new(sigma_b, k1, k2).map_err(|e| core_config(e, "k1"))
    }

    /// Uplink from A and downlink to B, as seen by the direct scheme.
    pub fn direct_channels(&self, sigma_b: f64) -> Result<(FadingChannel, FadingChannel), CliError> {
        let up = FadingChannel::derive_params(sigma_b, self.beta, self.w).map_err(|e| core_config(e, "sigma_b"))?;
        let down = match self.sigma_b_down {
            Some(d) => FadingChannel::derive_params(d, self.beta, self.w).map_err(|e| core_config(e, "sigma_b_down"))?,
            None => {
                expand_links(&self.geometry(sigma_b)?, self.beta, self.w)
                    .map_err(|e| core_config(e, "sigma_b"))?
                    .b_down
            }
        };
        Ok((up, down))
    }
}

/// Names the offending field when the library rejects a value; falls back
/// to `default` for parameters the scenario spells differently.
fn core_config(e: cvsat_core::Error, default: &str) -> CliError {
    let field = match &e {
        cvsat_core::Error::Domain { param, .. } => match *param {
            "sigma_b" | "k1" | "k2" | "chi" | "r" | "beta" | "w" => param,
            "samples" => "mc.samples",
            _ => default,
        },
        _ => default,
    };
    config(field, e.to_string())
}
