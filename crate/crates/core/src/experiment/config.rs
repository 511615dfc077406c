use std::f64::consts::PI;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chain::{clean_modes, ChainSpec, CouplingProfile};
use crate::fgr::FgrSpec;
use crate::selfconsistent::{RateFitPolicy, RunConfig, Scheme};
use crate::special::gamma_half_exact;
use crate::toy_model::FitPolicy;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Toy,
    Fgr,
    Rates,
    Spectral,
}

impl ExperimentKind {
    pub fn label(self) -> &'static str {
        match self {
            ExperimentKind::Toy => "toy",
            ExperimentKind::Fgr => "fgr",
            ExperimentKind::Rates => "rates",
            ExperimentKind::Spectral => "spectral",
        }
    }

    /// Sections the experiment reads.
    fn sections(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::Toy => &["toy"],
            ExperimentKind::Fgr => &["fgr"],
            ExperimentKind::Rates => &["chain", "solver"],
            ExperimentKind::Spectral => &["chain", "solver", "spectral"],
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "toy" => Ok(ExperimentKind::Toy),
            "fgr" => Ok(ExperimentKind::Fgr),
            "rates" => Ok(ExperimentKind::Rates),
            "spectral" => Ok(ExperimentKind::Spectral),
            _ => Err(format!("unknown experiment `{s}` (toy, fgr, rates, spectral)")),
        }
    }
}

/// Unit system of every energy in the file.
///
/// `delta`: energies in units of the mode spacing Δ (the chain velocity is
/// then fixed to N/π). `ghz`: energies as ordinary frequencies in GHz, the
/// chain velocity as an angular rate in sites/ns.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Delta,
    Ghz,
}

impl Units {
    /// Internal (angular) value of an energy given in file units.
    pub fn energy(self, x: f64) -> f64 {
        match self {
            Units::Delta => x,
            Units::Ghz => 2.0 * PI * x,
        }
    }

    /// Inverse of [`Units::energy`].
    pub fn to_file(self, x: f64) -> f64 {
        match self {
            Units::Delta => x,
            Units::Ghz => x / (2.0 * PI),
        }
    }
}

/// Whole config file. Every `Option` is filled by [`ExperimentConfig::resolve`]
/// for the sections the active experiment reads.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<Units>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub toy: Option<ToySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fgr: Option<FgrSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral: Option<SpectralSection>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToySection {
    /// Bath spacing Δ (ghz only; it is the unit otherwise).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_min: Option<f64>,
    /// Γ_FGR/η sweep, log-spaced.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// Samples of the revival sum behind each fitted rate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_samples: Option<usize>,
    /// Γ_FGR of each survival curve.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub survival_gamma_fgr: Option<Vec<f64>>,
    /// Length of the survival curves in units of t_H.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub survival_t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub survival_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<ToyFitSection>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToyFitSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_points: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Lattice,
    Exponential,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FgrSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ej: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileKind>,
    /// Lattice profile: plasma frequency (`inf` allowed) and Γ_0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plasma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma0: Option<f64>,
    /// Exponential profile: ω_c.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    /// Also emit the leading-log closed form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_half: Option<f64>,
    /// In units of Δ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comb_step: Option<f64>,
    /// In units of Δ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extrapolation_tol: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sites: Option<usize>,
    /// ghz only; fixed to N/π in delta units.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plasma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ej: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charging_energy: Option<f64>,
    /// Relative amplitude a of the uniform factors in [1 − a, 1 + a].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disorder: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_b: Option<f64>,
    /// Nyquist frequency of the grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schemes: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baths: Option<Vec<usize>>,
    /// Modes with ω_k in [lo, hi] are solved for.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realizations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_bath: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aliasing_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crossover_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<SolverFitSection>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverFitSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralSection {
    /// Mode indices whose spectral functions are written.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<usize>>,
    /// Half-width of the written frequency window around each ω_k.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<f64>,
    /// Write every `stride`-th grid point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schemes: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realizations: Option<Vec<usize>>,
}

/// Absolute-unit inputs of the toy experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ToyPlan {
    pub spacing: f64,
    pub eta: f64,
    pub epsilon_d: f64,
    pub delta_min: f64,
    pub ratios: Vec<f64>,
    pub fit_samples: usize,
    pub survival_gamma_fgr: Vec<f64>,
    pub survival_t_max: f64,
    pub survival_samples: usize,
    pub fit: FitPolicy,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FgrPlan {
    pub spec: FgrSpec,
    pub omegas: Vec<f64>,
    pub closed_form: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatesPlan {
    pub chain: ChainSpec,
    pub run: RunConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralPlan {
    pub chain: ChainSpec,
    /// `record` holds the requested modes.
    pub run: RunConfig,
    pub span: f64,
    pub stride: usize,
    pub realizations: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Plan {
    Toy(ToyPlan),
    Fgr(FgrPlan),
    Rates(RatesPlan),
    Spectral(SpectralPlan),
}

/// Finds the line of a dotted key path in the TOML text.
pub(crate) struct Source<'a> {
    text: &'a str,
}

impl<'a> Source<'a> {
    pub fn new(text: &'a str) -> Self {
        Self { text }
    }

    /// Line of the key, else of its nearest enclosing table header.
    pub fn line_of(&self, path: &str) -> Option<usize> {
        let parts: Vec<&str> = path.split('.').map(|p| p.split('[').next().unwrap_or(p)).collect();
        for split in (0..parts.len()).rev() {
            if let Some(l) = self.find(&parts[..split].join("."), parts[split]) {
                return Some(l);
            }
        }
        (1..=parts.len()).rev().find_map(|split| self.header(&parts[..split].join(".")))
    }

    fn lines(&self) -> impl Iterator<Item = (usize, &'a str)> {
        self.text.lines().enumerate().map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
    }

    fn find(&self, table: &str, key: &str) -> Option<usize> {
        let mut current = String::new();
        for (i, line) in self.lines() {
            if line.starts_with('[') {
                current = line.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            } else if current == table {
                if let Some((k, _)) = line.split_once('=') {
                    if k.trim() == key {
                        return Some(i);
                    }
                }
            }
        }
        None
    }

    fn header(&self, table: &str) -> Option<usize> {
        self.lines()
            .find(|(_, l)| l.starts_with('[') && l.trim_matches(|c| c == '[' || c == ']').trim() == table)
            .map(|(i, _)| i)
    }

    pub fn error(&self, key: &str, reason: impl Into<String>) -> Error {
        Error::Config { key: key.to_string(), line: self.line_of(key), reason: reason.into() }
    }

    /// Re-keys a parameter error from a module validator under `section`.
    pub fn rekey(&self, section: &str, err: Error) -> Error {
        match err {
            Error::InvalidParameter { name, reason } => self.error(&format!("{section}.{name}"), reason),
            other => other,
        }
    }
}

fn positive(src: &Source, key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(src.error(key, "must be finite and > 0"))
    }
}

fn log_space(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    (0..points).map(|i| lo * (hi / lo).powf(i as f64 / (points - 1) as f64)).collect()
}

fn schemes(src: &Source, key: &str, names: &[String]) -> Result<Vec<Scheme>> {
    if names.is_empty() {
        return Err(src.error(key, "need at least one scheme"));
    }
    names
        .iter()
        .map(|s| {
            Scheme::parse(s).ok_or_else(|| src.error(key, format!("unknown scheme `{s}` (bare, partial, dressed)")))
        })
        .collect()
}

/// The unit of energy in delta mode; a value other than 1 is a mistake.
fn unit_spacing(src: &Source, key: &str, units: Units, given: &mut Option<f64>) -> Result<f64> {
    match units {
        Units::Delta => {
            if given.is_some_and(|v| v != 1.0) {
                return Err(src.error(key, "Δ is the energy unit when units = \"delta\"; leave it out or set 1"));
            }
            *given = Some(1.0);
            Ok(1.0)
        }
        Units::Ghz => {
            let v = given.ok_or_else(|| src.error(key, "required when units = \"ghz\""))?;
            positive(src, key, units.energy(v))
        }
    }
}

impl ExperimentConfig {
    /// Parses TOML; errors carry the key path and line.
    pub fn from_toml(text: &str) -> Result<Self> {
        let src = Source::new(text);
        let de = toml::Deserializer::parse(text).map_err(|e| syntax_error(text, &e))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            let line = e.inner().span().map(|s| line_at(text, s.start)).or_else(|| src.line_of(&key));
            Error::Config { key, line, reason: e.inner().message().to_string() }
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Fills every default of the sections the active experiment reads,
    /// drops the others and validates. `text` is the original file, used
    /// to point errors at lines.
    pub fn resolve(&mut self, text: &str) -> Result<Plan> {
        let src = Source::new(text);
        if self.seed.is_none() {
            return Err(src.error("seed", "missing: runs need an explicit master seed"));
        }
        self.threads.get_or_insert(0);
        let units = *self.units.get_or_insert(Units::Delta);
        self.out.get_or_insert_with(|| PathBuf::from("out"));
        let kind = self.experiment;
        let needed = kind.sections();
        for name in ["toy", "fgr", "chain", "solver", "spectral"] {
            if needed.contains(&name) {
                continue;
            }
            let present = match name {
                "toy" => self.toy.take().is_some(),
                "fgr" => self.fgr.take().is_some(),
                "chain" => self.chain.take().is_some(),
                "solver" => self.solver.take().is_some(),
                _ => self.spectral.take().is_some(),
            };
            if present {
                log::info!("section [{name}] ignored by experiment `{}`", kind.label());
            }
        }
        let missing =
            |name: &str| src.error(name, format!("missing section [{name}] for experiment `{}`", kind.label()));
        match kind {
            ExperimentKind::Toy => {
                let sec = self.toy.as_mut().ok_or_else(|| missing("toy"))?;
                Ok(Plan::Toy(resolve_toy(sec, units, &src)?))
            }
            ExperimentKind::Fgr => {
                let sec = self.fgr.as_mut().ok_or_else(|| missing("fgr"))?;
                Ok(Plan::Fgr(resolve_fgr(sec, units, &src)?))
            }
            ExperimentKind::Rates | ExperimentKind::Spectral => {
                let seed = self.seed.unwrap_or(0);
                let chain = resolve_chain(self.chain.as_mut().ok_or_else(|| missing("chain"))?, units, seed, &src)?;
                let solver = self.solver.as_mut().ok_or_else(|| missing("solver"))?;
                let run = resolve_solver(solver, &chain, units, seed, &src)?;
                if kind == ExperimentKind::Rates {
                    run.validate_for(&chain).map_err(|e| src.rekey("solver", e))?;
                    return Ok(Plan::Rates(RatesPlan { chain, run }));
                }
                let sec = self.spectral.as_mut().ok_or_else(|| missing("spectral"))?;
                Ok(Plan::Spectral(resolve_spectral(sec, chain, run, units, &src)?))
            }
        }
    }
}

fn line_at(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn syntax_error(text: &str, e: &toml::de::Error) -> Error {
    Error::Config {
        key: String::new(),
        line: e.span().map(|s| line_at(text, s.start)),
        reason: e.message().to_string(),
    }
}

fn resolve_toy(sec: &mut ToySection, units: Units, src: &Source) -> Result<ToyPlan> {
    let spacing = unit_spacing(src, "toy.spacing", units, &mut sec.spacing)?;
    let e = |x: f64| units.energy(x);
    let eta = *sec.eta.get_or_insert(units.to_file(2.0 * spacing));
    let eta = e(eta);
    if !(eta > 0.0) {
        return Err(src.error("toy.eta", "the bath broadening must be > 0: without it Γ vanishes at fixed Δ"));
    }
    let epsilon_d = e(*sec.epsilon_d.get_or_insert(0.0));
    let delta_min = e(*sec.delta_min.get_or_insert(0.0));
    if delta_min.abs() > 0.5 * spacing {
        return Err(src.error("toy.delta_min", "must lie in [-Δ/2, Δ/2]"));
    }
    let lo = positive(src, "toy.ratio_min", *sec.ratio_min.get_or_insert(1e-2))?;
    let hi = positive(src, "toy.ratio_max", *sec.ratio_max.get_or_insert(1e2))?;
    if hi < lo {
        return Err(src.error("toy.ratio_max", "below ratio_min"));
    }
    let points = *sec.points.get_or_insert(41);
    if points < 1 {
        return Err(src.error("toy.points", "need at least one point"));
    }
    let fit_samples = *sec.fit_samples.get_or_insert(4000);
    let survival: Vec<f64> = sec
        .survival_gamma_fgr
        .get_or_insert_with(|| vec![units.to_file(0.5 * spacing), units.to_file(8.0 * spacing)])
        .iter()
        .map(|&g| e(g))
        .collect();
    if survival.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
        return Err(src.error("toy.survival_gamma_fgr", "rates must be finite and >= 0"));
    }
    let t_max = positive(src, "toy.survival_t_max", *sec.survival_t_max.get_or_insert(3.0))?;
    let survival_samples = *sec.survival_samples.get_or_insert(601);
    let d = FitPolicy::default();
    let f = sec.fit.get_or_insert_with(Default::default);
    let fit = FitPolicy {
        window_fraction: *f.window_fraction.get_or_insert(d.window_fraction),
        floor: *f.floor.get_or_insert(d.floor),
        fit_tol: *f.fit_tol.get_or_insert(d.fit_tol),
        min_points: *f.min_points.get_or_insert(d.min_points),
    };
    if !(fit.window_fraction > 0.0 && fit.window_fraction <= 1.0) {
        return Err(src.error("toy.fit.window_fraction", "must lie in (0, 1]"));
    }
    if fit_samples < 2 * fit.min_points.max(2) || survival_samples < 2 {
        return Err(src.error("toy.fit_samples", "too few samples for the fit window"));
    }
    Ok(ToyPlan {
        spacing,
        eta,
        epsilon_d,
        delta_min,
        ratios: log_space(lo, hi, points),
        fit_samples,
        survival_gamma_fgr: survival,
        survival_t_max: t_max,
        survival_samples,
        fit,
    })
}

fn resolve_fgr(sec: &mut FgrSection, units: Units, src: &Source) -> Result<FgrPlan> {
    let d = unit_spacing(src, "fgr.spacing", units, &mut sec.spacing)?;
    let e = |x: f64| units.energy(x);
    let z = positive(src, "fgr.z", *sec.z.get_or_insert(0.5))?;
    let ej = e(*sec.ej.get_or_insert(units.to_file(20.0 * d)));
    if !(ej >= 0.0 && ej.is_finite()) {
        return Err(src.error("fgr.ej", "must be finite and >= 0"));
    }
    let profile = match *sec.profile.get_or_insert(ProfileKind::Lattice) {
        ProfileKind::Lattice => {
            let plasma = e(*sec.plasma.get_or_insert(f64::INFINITY));
            let gamma0 = e(*sec.gamma0.get_or_insert(units.to_file(1e4 * d)));
            if !(plasma > 0.0) {
                return Err(src.error("fgr.plasma", "must be > 0 (inf allowed)"));
            }
            positive(src, "fgr.gamma0", gamma0)?;
            CouplingProfile::Lattice { z, plasma, gamma0 }
        }
        ProfileKind::Exponential => {
            let cutoff = positive(src, "fgr.cutoff", e(*sec.cutoff.get_or_insert(units.to_file(1e4 * d))))?;
            CouplingProfile::ExponentialCutoff { z, cutoff }
        }
    };
    let lo = positive(src, "fgr.omega_min", e(*sec.omega_min.get_or_insert(units.to_file(10.0 * d))))?;
    let hi = positive(src, "fgr.omega_max", e(*sec.omega_max.get_or_insert(units.to_file(1e3 * d))))?;
    if hi < lo {
        return Err(src.error("fgr.omega_max", "below omega_min"));
    }
    let points = *sec.points.get_or_insert(61);
    if points < 1 {
        return Err(src.error("fgr.points", "need at least one point"));
    }
    let mut spec = FgrSpec::new(ej, d, profile);
    spec.n_max = *sec.n_max.get_or_insert(spec.n_max);
    spec.gamma_half = *sec.gamma_half.get_or_insert(gamma_half_exact());
    spec.comb_step = *sec.comb_step.get_or_insert(spec.comb_step);
    let [e1, e2] = *sec.epsilons.get_or_insert([spec.epsilons.0, spec.epsilons.1]);
    spec.epsilons = (e1, e2);
    spec.extrapolation_tol = *sec.extrapolation_tol.get_or_insert(spec.extrapolation_tol);
    spec.validate().map_err(|err| src.rekey("fgr", err))?;
    let closed_form = *sec.closed_form.get_or_insert(false);
    Ok(FgrPlan { spec, omegas: log_space(lo, hi, points), closed_form })
}

fn resolve_chain(sec: &mut ChainSection, units: Units, seed: u64, src: &Source) -> Result<ChainSpec> {
    let e = |x: f64| units.energy(x);
    let sites = *sec.sites.get_or_insert(512);
    if sites < 2 {
        return Err(src.error("chain.sites", "need at least two sites"));
    }
    let velocity = match units {
        Units::Delta => {
            if sec.velocity.is_some() {
                return Err(src.error("chain.velocity", "fixed to N/π when units = \"delta\"; leave it out"));
            }
            sites as f64 / PI
        }
        Units::Ghz => sec.velocity.ok_or_else(|| src.error("chain.velocity", "required when units = \"ghz\""))?,
    };
    let need = |key: &str| src.error(key, "required when units = \"ghz\"");
    let plasma = match (units, sec.plasma) {
        (_, Some(p)) => e(p),
        (Units::Delta, None) => *sec.plasma.insert(velocity / 10.2),
        (Units::Ghz, None) => return Err(need("chain.plasma")),
    };
    let ej = match (units, sec.ej) {
        (_, Some(v)) => e(v),
        (Units::Delta, None) => *sec.ej.insert(3.6),
        (Units::Ghz, None) => return Err(need("chain.ej")),
    };
    let charging = e(*sec.charging_energy.get_or_insert(units.to_file(plasma)));
    let z = *sec.z.get_or_insert(0.5);
    let disorder = *sec.disorder.get_or_insert(0.1);
    let mut spec = ChainSpec::from_line_parameters(sites, velocity, plasma, z, ej, charging)
        .map_err(|err| src.rekey("chain", err))?;
    spec.disorder_amplitude = disorder;
    spec.seed = seed;
    spec.validate().map_err(|err| src.rekey("chain", err))?;
    Ok(spec)
}

fn resolve_solver(
    sec: &mut SolverSection,
    chain: &ChainSpec,
    units: Units,
    seed: u64,
    src: &Source,
) -> Result<RunConfig> {
    let e = |x: f64| units.energy(x);
    let d = chain.spacing();
    let gamma_b = match (units, sec.gamma_b) {
        (_, Some(g)) => e(g),
        (Units::Delta, None) => *sec.gamma_b.insert(0.01 * d),
        (Units::Ghz, None) => return Err(src.error("solver.gamma_b", "required when units = \"ghz\"")),
    };
    let mut run = RunConfig::for_chain(chain, gamma_b).map_err(|err| src.rekey("solver", err))?;
    run.master_seed = seed;
    run.baths = sec.baths.get_or_insert_with(|| run.baths.clone()).clone();
    let wp = chain.plasma_frequency();
    let default_max = 1.25 * (2 * run.n_max() + 1) as f64 * wp;
    run.omega_max = e(*sec.omega_max.get_or_insert(units.to_file(default_max)));
    let default_points = ((2.0 * run.omega_max / (0.1 * gamma_b)).ceil() as usize).next_power_of_two();
    run.points = *sec.points.get_or_insert(default_points);
    let names = sec.schemes.get_or_insert_with(|| run.schemes.iter().map(|s| s.label().to_string()).collect());
    run.schemes = schemes(src, "solver.schemes", names)?;
    let [lo, hi] = *sec.window.get_or_insert([0.0, units.to_file(0.9 * wp)]);
    run.window = (e(lo), e(hi));
    run.realizations = *sec.realizations.get_or_insert(8);
    run.per_bath = *sec.per_bath.get_or_insert(true);
    run.aliasing_tol = *sec.aliasing_tol.get_or_insert(run.aliasing_tol);
    run.crossover_threshold = *sec.crossover_threshold.get_or_insert(run.crossover_threshold);
    let d_fit = RateFitPolicy::default();
    let f = sec.fit.get_or_insert_with(Default::default);
    run.fit = RateFitPolicy {
        span_fraction: *f.span_fraction.get_or_insert(d_fit.span_fraction),
        window_fraction: *f.window_fraction.get_or_insert(d_fit.window_fraction),
        floor: *f.floor.get_or_insert(d_fit.floor),
        fit_tol: *f.fit_tol.get_or_insert(d_fit.fit_tol),
        min_points: *f.min_points.get_or_insert(d_fit.min_points),
        samples: *f.samples.get_or_insert(d_fit.samples),
    };
    run.validate().map_err(|err| src.rekey("solver", err))?;
    Ok(run)
}

fn resolve_spectral(
    sec: &mut SpectralSection,
    chain: ChainSpec,
    mut run: RunConfig,
    units: Units,
    src: &Source,
) -> Result<SpectralPlan> {
    let d = chain.spacing();
    let modes = match &sec.modes {
        Some(m) => m.clone(),
        None => {
            // the clean mode closest to 0.6 ω_p
            let clean = clean_modes(&chain).map_err(|err| src.rekey("chain", err))?;
            let target = 0.6 * chain.plasma_frequency();
            let k = (0..clean.len())
                .min_by(|&a, &b| (clean.omega[a] - target).abs().total_cmp(&(clean.omega[b] - target).abs()))
                .unwrap_or(0);
            sec.modes.insert(vec![k]).clone()
        }
    };
    if modes.is_empty() || modes.iter().any(|&k| k >= chain.sites) {
        return Err(src.error("spectral.modes", format!("need mode indices below N = {}", chain.sites)));
    }
    let span = positive(src, "spectral.span", units.energy(*sec.span.get_or_insert(units.to_file(2.0 * d))))?;
    let stride = *sec.stride.get_or_insert(1);
    if stride < 1 {
        return Err(src.error("spectral.stride", "must be >= 1"));
    }
    if let Some(names) = &sec.schemes {
        run.schemes = schemes(src, "spectral.schemes", names)?;
    } else {
        sec.schemes = Some(run.schemes.iter().map(|s| s.label().to_string()).collect());
    }
    let realizations = sec.realizations.get_or_insert_with(|| vec![0]).clone();
    if realizations.is_empty() {
        return Err(src.error("spectral.realizations", "need at least one realization index"));
    }
    run.record = modes;
    run.realizations = realizations.iter().max().map_or(1, |r| r + 1);
    run.validate_for(&chain).map_err(|err| src.rekey("solver", err))?;
    Ok(SpectralPlan { chain, run, span, stride, realizations })
}
