use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::{BaselineStream, DEFAULT_CHI_GRID};
use crate::error::{Error, Result};
use crate::ga::GaConfig;
use crate::genome::{AncillaVariant, Bounds, HeadGene};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Thermalize,
    Coherent,
    Squeezed,
    NonGaussian,
    FockPrep,
    BaselineOnly,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Thermalize => "thermalize",
            Self::Coherent => "coherent",
            Self::Squeezed => "squeezed",
            Self::NonGaussian => "non_gaussian",
            Self::FockPrep => "fock_prep",
            Self::BaselineOnly => "baseline_only",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    Fixed,
    Variable,
}

/// Target parameters; only the one matching the family is used.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TargetSpec {
    /// Thermal target inverse temperature.
    pub beta: f64,
    /// Coherent amplitude (re, im).
    pub alpha: [f64; 2],
    /// Squeezing parameter (re, im).
    pub zeta: [f64; 2],
    /// Fock level.
    pub fock: usize,
}

impl Default for TargetSpec {
    fn default() -> Self {
        Self { beta: 1.0, alpha: [1.0, 0.0], zeta: [0.5, 0.0], fock: 1 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    #[default]
    Vacuum,
    Thermal {
        beta: f64,
    },
    Fock {
        k: usize,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimingSpec {
    pub t_c: Option<f64>,
    pub n: Option<usize>,
    pub total_time: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsSpec {
    pub omega_c: f64,
    pub omega_a: f64,
    pub omega_1: f64,
    pub omega_2: f64,
    pub g_l: f64,
    pub g_nl: f64,
    pub g_l1: f64,
    pub g_l2: f64,
    /// Constants placed in the genome head, in order.
    pub optimize: Vec<HeadGene>,
}

impl Default for PhysicsSpec {
    fn default() -> Self {
        Self {
            omega_c: 1.0,
            omega_a: 1.0,
            omega_1: 1.0,
            omega_2: 2.0,
            g_l: 1.0,
            g_nl: 0.0,
            g_l1: 1.0,
            g_l2: 1.0,
            optimize: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsSpec {
    pub beta_a: [f64; 2],
    pub omega_a: [f64; 2],
    pub coupling: [f64; 2],
    pub omega_1: [f64; 2],
    pub delta_omega_12: [f64; 2],
}

impl Default for BoundsSpec {
    fn default() -> Self {
        Self {
            beta_a: [-5.0, 5.0],
            omega_a: [0.0, 5.0],
            coupling: [-1.0, 1.0],
            omega_1: [0.0, 5.0],
            delta_omega_12: [0.0, 5.0],
        }
    }
}

impl BoundsSpec {
    pub fn for_gene(&self, gene: HeadGene) -> Bounds {
        let [lo, hi] = match gene {
            HeadGene::OmegaA => self.omega_a,
            HeadGene::GL | HeadGene::GNl | HeadGene::GL1 | HeadGene::GL2 => self.coupling,
            HeadGene::Omega1 => self.omega_1,
            HeadGene::DeltaOmega12 => self.delta_omega_12,
        };
        Bounds::new(lo, hi)
    }

    pub fn beta(&self) -> Bounds {
        Bounds::new(self.beta_a[0], self.beta_a[1])
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaSpec {
    pub population: Option<usize>,
    pub elites: Option<usize>,
    pub tournament: Option<usize>,
    pub mutation: Option<f64>,
    pub p_bar: Option<f64>,
    pub n_max: Option<usize>,
    pub generations: Option<usize>,
    pub fitness_threshold: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineSpec {
    /// Defaults to a thermal stream at the target temperature.
    pub stream: Option<BaselineStream>,
    /// Defaults to the run's collision count.
    pub collisions: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSpec {
    pub beta: f64,
    pub points: usize,
    pub total_time: f64,
    pub t_c: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self { beta: 5.0, points: DEFAULT_CHI_GRID, total_time: 10.0, t_c: 0.01 }
    }
}

/// A complete experiment description. After [`ExperimentConfig::resolve`]
/// every optional field that has a default is filled in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_family")]
    pub family: Family,
    #[serde(default)]
    pub mode: Option<ModeKind>,
    #[serde(default = "default_ancilla")]
    pub ancilla: AncillaVariant,
    #[serde(default)]
    pub n_levels: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub target: TargetSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub timing: TimingSpec,
    #[serde(default)]
    pub physics: PhysicsSpec,
    #[serde(default)]
    pub bounds: BoundsSpec,
    #[serde(default)]
    pub ga: GaSpec,
    #[serde(default)]
    pub baseline: BaselineSpec,
    #[serde(default)]
    pub sweep: SweepSpec,
}

fn default_family() -> Family {
    Family::Thermalize
}

fn default_ancilla() -> AncillaVariant {
    AncillaVariant::GenericQubit
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config parses")
    }
}

impl ExperimentConfig {
    /// Parses and resolves a TOML document.
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        raw.resolve()
    }

    /// Fills defaults and checks invariants.
    pub fn resolve(mut self) -> Result<Self> {
        let t = &mut self.timing;
        let has_fixed = t.t_c.is_some() || t.n.is_some();
        if has_fixed && t.total_time.is_some() {
            return Err(Error::Config(
                "timing: give either total_time (variable mode) or t_c and n (fixed mode), not both".into(),
            ));
        }
        let mode = match (self.mode, t.total_time.is_some()) {
            (Some(m), _) => m,
            (None, true) => ModeKind::Variable,
            (None, false) => ModeKind::Fixed,
        };
        self.mode = Some(mode);
        match mode {
            ModeKind::Fixed => {
                if t.total_time.is_some() {
                    return Err(Error::Config("timing.total_time: fixed mode takes t_c and n".into()));
                }
                t.t_c.get_or_insert(0.5);
                t.n.get_or_insert(6);
            }
            ModeKind::Variable => {
                if has_fixed {
                    return Err(Error::Config("timing.t_c: variable mode takes total_time only".into()));
                }
                t.total_time.get_or_insert(5.0);
            }
        }
        let default_levels = if self.family == Family::NonGaussian { 30 } else { 20 };
        self.n_levels.get_or_insert(default_levels);

        let g = &mut self.ga;
        g.population.get_or_insert(200);
        g.elites.get_or_insert(if mode == ModeKind::Fixed { 100 } else { 50 });
        g.tournament.get_or_insert(4);
        g.mutation.get_or_insert(1.0);
        g.p_bar.get_or_insert(0.05);
        g.n_max.get_or_insert(100);
        g.generations.get_or_insert(1000);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |field: &str, msg: String| Err(Error::Config(format!("{field}: {msg}")));
        let t = &self.timing;
        if let Some(t_c) = t.t_c {
            if !(t_c > 0.0) || !t_c.is_finite() {
                return fail("timing.t_c", format!("must be positive, got {t_c}"));
            }
        }
        if t.n == Some(0) {
            return fail("timing.n", "must be at least 1".into());
        }
        if let Some(total) = t.total_time {
            if !(total > 0.0) || !total.is_finite() {
                return fail("timing.total_time", format!("must be positive, got {total}"));
            }
        }
        if self.n_levels.is_some_and(|n| n < 2) {
            return fail("n_levels", "must be at least 2".into());
        }
        let b = &self.bounds;
        for (name, [lo, hi]) in [
            ("bounds.beta_a", b.beta_a),
            ("bounds.omega_a", b.omega_a),
            ("bounds.coupling", b.coupling),
            ("bounds.omega_1", b.omega_1),
            ("bounds.delta_omega_12", b.delta_omega_12),
        ] {
            if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
                return fail(name, format!("need finite min <= max, got [{lo}, {hi}]"));
            }
        }
        if self.physics.omega_1 > self.physics.omega_2 {
            return fail("physics.omega_2", "must not be below omega_1".into());
        }
        if self.family == Family::Coherent || self.family == Family::Squeezed {
            let v = if self.family == Family::Coherent { self.target.alpha } else { self.target.zeta };
            if v.iter().any(|x| !x.is_finite()) {
                return fail("target", "non-finite amplitude".into());
            }
        }
        if self.sweep.points == 0 || !(self.sweep.t_c > 0.0) || !(self.sweep.total_time > 0.0) {
            return fail("sweep", "needs points >= 1 and positive t_c, total_time".into());
        }
        if self.mode.is_some() && self.ga.population.is_some() {
            self.ga_config()?.validate().map_err(|e| Error::Config(format!("ga: {e}")))?;
        }
        Ok(())
    }

    pub fn mode(&self) -> ModeKind {
        self.mode.unwrap_or(ModeKind::Fixed)
    }

    pub fn n_levels(&self) -> usize {
        self.n_levels.unwrap_or(20)
    }

    /// Resolved GA settings; call after [`ExperimentConfig::resolve`].
    pub fn ga_config(&self) -> Result<GaConfig> {
        let g = &self.ga;
        let missing = || Error::Config("ga settings are not resolved".into());
        Ok(GaConfig {
            population: g.population.ok_or_else(missing)?,
            elites: g.elites.ok_or_else(missing)?,
            tournament: g.tournament.ok_or_else(missing)?,
            mutation: g.mutation.ok_or_else(missing)?,
            p_bar: g.p_bar.ok_or_else(missing)?,
            n_max: g.n_max.ok_or_else(missing)?,
            generations: g.generations.ok_or_else(missing)?,
            seed: self.seed,
            fitness_threshold: g.fitness_threshold,
        })
    }
}

/// Reads and resolves a config file. Parse errors carry line and column.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    ExperimentConfig::from_toml(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}
