use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use log::info;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Family, InitialSpec, ModeKind};
use crate::baselines::{chi_grid, run_baseline, sweep_chi, BaselineStream, ChiSweep, ChiSweepProblem};
use crate::cavity::{
    coherent_state, fock_state, squeezed_vacuum, thermal_state, AncillaKind, Couplings, FockSpace, Physics,
};
use crate::error::{Error, Result};
use crate::ga::{evolve_with, GaMode, GenerationRecord};
use crate::genome::{AncillaVariant, GenomeLayout, HeadSpec, ScenarioTemplate, Timing};
use crate::objective::{Evaluator, Objective};
use crate::opalg::{pauli, DensityMatrix};

pub const SUMMARY_FILE: &str = "summary.json";
pub const TRACE_FILE: &str = "trace.jsonl";
pub const SWEEP_FILE: &str = "sweep.json";

/// Largest tolerated drift when a stored genome is re-evaluated.
pub const REFIT_TOL: f64 = 1e-12;

/// Constants and timing of a decoded scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub n: usize,
    pub t_c: f64,
    pub total_time: f64,
    pub omega_c: f64,
    pub ancilla: AncillaKind,
    pub couplings: Couplings,
}

/// One row per collision of the best genome: the inverse temperature of a
/// diagonal qubit, the Bloch vector of a generic qubit or the populations of
/// a qutrit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AncillaSeries {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineComparison {
    pub stream: BaselineStream,
    pub n: usize,
    pub t_c: f64,
    /// Objective after every collision, starting with the initial state.
    pub fitness_curve: Vec<f64>,
    pub final_fitness: f64,
}

/// Compact per-generation entry; full genomes are in the trace file.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub best_collisions: usize,
}

impl From<&GenerationRecord> for TracePoint {
    fn from(r: &GenerationRecord) -> Self {
        Self {
            generation: r.generation,
            best_fitness: r.best_fitness,
            mean_fitness: r.mean_fitness,
            best_collisions: r.best_collisions,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub version: String,
    pub config: ExperimentConfig,
    /// Empty for baseline-only runs.
    pub best_genome: Vec<f64>,
    pub scenario: ScenarioSummary,
    pub final_fitness: f64,
    pub threshold_reached: bool,
    /// Objective after every collision of the best scenario.
    pub trajectory: Vec<f64>,
    pub ancillae: Option<AncillaSeries>,
    pub trace: Vec<TracePoint>,
    pub baseline: Option<BaselineComparison>,
    pub wall_clock_s: f64,
}

impl RunResult {
    pub fn write_summary(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let file = BufWriter::new(File::create(dir.join(SUMMARY_FILE))?);
        serde_json::to_writer_pretty(file, self)?;
        Ok(())
    }

    pub fn read_summary(dir: &Path) -> Result<Self> {
        let text = fs::read_to_string(dir.join(SUMMARY_FILE))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Physics, states and objective assembled from a config.
#[derive(Clone, Debug)]
pub struct Setup {
    pub physics: Physics,
    pub initial: DensityMatrix,
    pub objective: Objective,
    pub layout: GenomeLayout,
    pub timing: Timing,
}

impl Setup {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        let space = FockSpace::new(config.n_levels())?;
        let physics = physics(config, space);
        let initial = match config.initial {
            InitialSpec::Vacuum => fock_state(&space, 0)?,
            InitialSpec::Thermal { beta } => thermal_state(&space.system_hamiltonian(physics.omega_c), beta)?,
            InitialSpec::Fock { k } => fock_state(&space, k)?,
        };
        let objective = match target_state(config, &physics)? {
            Some(target) => Objective::TraceDistanceToTarget(target),
            None => Objective::NonGaussianity,
        };
        let head = config
            .physics
            .optimize
            .iter()
            .map(|&gene| HeadSpec { gene, bounds: config.bounds.for_gene(gene) })
            .collect();
        let layout = GenomeLayout::new(head, config.ancilla, config.bounds.beta())
            .map_err(|e| Error::Config(format!("physics.optimize: {e}")))?;
        let t = &config.timing;
        let timing = match config.mode() {
            ModeKind::Fixed => Timing::Fixed { t_c: t.t_c.unwrap_or(0.5), n: t.n.unwrap_or(6) },
            ModeKind::Variable => Timing::Variable { total_time: t.total_time.unwrap_or(5.0) },
        };
        Ok(Self { physics, initial, objective, layout, timing })
    }

    pub fn evaluator(&self) -> Result<Evaluator> {
        let template =
            ScenarioTemplate { physics: self.physics, initial_state: self.initial.clone(), timing: self.timing };
        Evaluator::new(self.layout.clone(), template, self.objective.clone())
    }

    pub fn ga_mode(&self) -> GaMode {
        match self.timing {
            Timing::Fixed { n, .. } => GaMode::Fixed { n },
            Timing::Variable { .. } => GaMode::Variable,
        }
    }
}

fn physics(config: &ExperimentConfig, space: FockSpace) -> Physics {
    let p = &config.physics;
    let ancilla = match config.ancilla {
        AncillaVariant::DiagonalQubit => AncillaKind::DiagonalQubit { omega_a: p.omega_a },
        AncillaVariant::GenericQubit => AncillaKind::GenericQubit { omega_a: p.omega_a },
        AncillaVariant::Qutrit => AncillaKind::Qutrit { omega_1: p.omega_1, omega_2: p.omega_2 },
    };
    let couplings = Couplings { g_l: p.g_l, g_nl: p.g_nl, g_l1: p.g_l1, g_l2: p.g_l2 };
    Physics { space, omega_c: p.omega_c, ancilla, couplings }
}

/// Target state of the family; `None` when the objective is non-Gaussianity.
pub fn target_state(config: &ExperimentConfig, physics: &Physics) -> Result<Option<DensityMatrix>> {
    let space = physics.space;
    let t = &config.target;
    let state = match config.family {
        Family::Thermalize | Family::BaselineOnly => thermal_state(&space.system_hamiltonian(physics.omega_c), t.beta)?,
        Family::Coherent => coherent_state(&space, Complex64::new(t.alpha[0], t.alpha[1]))?,
        Family::Squeezed => squeezed_vacuum(&space, Complex64::new(t.zeta[0], t.zeta[1]))?,
        Family::FockPrep => fock_state(&space, t.fock)?,
        Family::NonGaussian => return Ok(None),
    };
    Ok(Some(state))
}

pub fn ancilla_series(evaluator: &Evaluator, genes: &[f64]) -> Result<AncillaSeries> {
    let scenario = evaluator.scenario(genes)?;
    let layout = evaluator.layout();
    let names = |c: &[&str]| c.iter().map(|s| s.to_string()).collect();
    let series = match layout.variant {
        AncillaVariant::DiagonalQubit => AncillaSeries {
            columns: names(&["beta_a"]),
            rows: genes[layout.lambda0()..].iter().map(|&x| vec![layout.beta_bounds.rescale(x)]).collect(),
        },
        AncillaVariant::GenericQubit => {
            let ops = [pauli::sigma_x(), pauli::sigma_y(), pauli::sigma_z()];
            let rows = scenario
                .ancilla_states
                .iter()
                .map(|rho| ops.iter().map(|op| rho.expectation(op).map(|z| z.re)).collect::<Result<Vec<_>>>())
                .collect::<Result<_>>()?;
            AncillaSeries { columns: names(&["bloch_x", "bloch_y", "bloch_z"]), rows }
        }
        AncillaVariant::Qutrit => AncillaSeries {
            columns: names(&["p_0", "p_1", "p_2"]),
            rows: scenario.ancilla_states.iter().map(DensityMatrix::populations).collect(),
        },
    };
    Ok(series)
}

/// Default stream: thermal ancillae at the target temperature.
fn baseline_stream(config: &ExperimentConfig) -> BaselineStream {
    config.baseline.stream.unwrap_or(BaselineStream::HomogeneousThermal { beta_a: config.target.beta })
}

/// Baseline with the same objective and collision time as the scenario it is
/// compared with.
pub fn run_comparison(config: &ExperimentConfig, setup: &Setup, n: usize, t_c: f64) -> Result<BaselineComparison> {
    let stream = baseline_stream(config);
    let n = config.baseline.collisions.unwrap_or(n);
    let evaluator = setup.evaluator()?;
    let fitness_curve = run_baseline(&stream, &setup.physics, &setup.initial, n, t_c)?
        .iter()
        .map(|rho| evaluator.score(rho))
        .collect::<Result<Vec<_>>>()?;
    let final_fitness = *fitness_curve.last().expect("initial state included");
    Ok(BaselineComparison { stream, n, t_c, fitness_curve, final_fitness })
}

/// Runs the configured experiment. When `config.output` is set, the
/// generation trace is streamed to `trace.jsonl` and the result written to
/// `summary.json` in that directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunResult> {
    let config = config.clone().resolve()?;
    let start = Instant::now();
    let setup = Setup::new(&config)?;
    if config.family == Family::BaselineOnly {
        return finish(baseline_only(&config, &setup)?, &config, start);
    }
    let evaluator = setup.evaluator()?;
    let ga = config.ga_config()?;

    let mut trace_writer = match &config.output {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            Some(BufWriter::new(File::create(dir.join(TRACE_FILE))?))
        }
        None => None,
    };
    info!("{} run: {:?}, {} generations, seed {}", config.family.name(), setup.ga_mode(), ga.generations, ga.seed);
    let run = evolve_with(&evaluator, &setup.layout, setup.ga_mode(), &ga, |record| {
        if let Some(w) = trace_writer.as_mut() {
            serde_json::to_writer(&mut *w, record)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })?;
    if let Some(mut w) = trace_writer {
        w.flush()?;
    }

    let genes = run.best_genome.clone();
    let scenario = evaluator.scenario(&genes)?;
    let trajectory =
        evaluator.trajectory(&genes)?.iter().map(|rho| evaluator.score(rho)).collect::<Result<Vec<_>>>()?;
    let summary = ScenarioSummary {
        n: scenario.n(),
        t_c: scenario.t_c,
        total_time: scenario.total_time(),
        omega_c: scenario.physics.omega_c,
        ancilla: scenario.physics.ancilla,
        couplings: scenario.physics.couplings,
    };
    let baseline = run_comparison(&config, &setup, summary.n, summary.t_c)?;
    let result = RunResult {
        version: env!("CARGO_PKG_VERSION").to_string(),
        best_genome: genes.clone(),
        scenario: summary,
        final_fitness: run.best_fitness,
        threshold_reached: run.threshold_reached,
        trajectory,
        ancillae: Some(ancilla_series(&evaluator, &genes)?),
        trace: run.records.iter().map(TracePoint::from).collect(),
        baseline: Some(baseline),
        wall_clock_s: 0.0,
        config: config.clone(),
    };
    verify_refit(&result)?;
    finish(result, &config, start)
}

/// The baseline stream alone, scored with the family's objective.
pub fn run_baseline_experiment(config: &ExperimentConfig) -> Result<RunResult> {
    let config = config.clone().resolve()?;
    let start = Instant::now();
    let setup = Setup::new(&config)?;
    finish(baseline_only(&config, &setup)?, &config, start)
}

fn finish(mut result: RunResult, config: &ExperimentConfig, start: Instant) -> Result<RunResult> {
    result.wall_clock_s = start.elapsed().as_secs_f64();
    if let Some(dir) = &config.output {
        result.write_summary(dir)?;
    }
    Ok(result)
}

fn baseline_only(config: &ExperimentConfig, setup: &Setup) -> Result<RunResult> {
    let (n, t_c) = match setup.timing {
        Timing::Fixed { t_c, n } => (n, t_c),
        Timing::Variable { total_time } => {
            let n = config.baseline.collisions.unwrap_or(config.ga.n_max.unwrap_or(100));
            (n, total_time / n as f64)
        }
    };
    let baseline = run_comparison(config, setup, n, t_c)?;
    let n = baseline.n;
    Ok(RunResult {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        best_genome: Vec::new(),
        scenario: ScenarioSummary {
            n,
            t_c,
            total_time: n as f64 * t_c,
            omega_c: setup.physics.omega_c,
            ancilla: setup.physics.ancilla,
            couplings: setup.physics.couplings,
        },
        final_fitness: baseline.final_fitness,
        threshold_reached: false,
        trajectory: baseline.fitness_curve.clone(),
        ancillae: None,
        trace: Vec::new(),
        baseline: Some(baseline),
        wall_clock_s: 0.0,
    })
}

/// Re-decodes the stored genome and checks that it reproduces the stored
/// fitness. Returns the recomputed value.
pub fn verify_refit(result: &RunResult) -> Result<f64> {
    if result.best_genome.is_empty() {
        return Ok(result.final_fitness);
    }
    let evaluator = Setup::new(&result.config)?.evaluator()?;
    let refit = evaluator.fitness(&result.best_genome)?;
    if (refit - result.final_fitness).abs() > REFIT_TOL {
        return Err(Error::Other(format!(
            "stored genome re-evaluates to {refit:e}, stored fitness is {:e}",
            result.final_fitness
        )));
    }
    Ok(refit)
}

/// Coherent-thermal chi sweep toward the coherent target of the config.
pub fn run_sweep(config: &ExperimentConfig) -> Result<ChiSweep> {
    let config = config.clone().resolve()?;
    let setup = Setup::new(&config)?;
    let omega_a = match setup.physics.ancilla {
        AncillaKind::DiagonalQubit { omega_a } | AncillaKind::GenericQubit { omega_a } => omega_a,
        kind => return Err(Error::Config(format!("ancilla: chi sweeps need qubits, got {kind:?}"))),
    };
    let s = config.sweep;
    let alpha = Complex64::new(config.target.alpha[0], config.target.alpha[1]);
    let problem = ChiSweepProblem {
        physics: setup.physics,
        beta: s.beta,
        initial: setup.initial.clone(),
        target: coherent_state(&setup.physics.space, alpha)?,
        total_time: s.total_time,
        t_c: s.t_c,
    };
    let sweep = sweep_chi(&problem, &chi_grid(s.beta, omega_a, s.points))?;
    if let Some(dir) = &config.output {
        fs::create_dir_all(dir)?;
        let file = BufWriter::new(File::create(dir.join(SWEEP_FILE))?);
        serde_json::to_writer_pretty(file, &SweepResult { config: config.clone(), sweep: sweep.clone() })?;
    }
    Ok(sweep)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: ExperimentConfig,
    pub sweep: ChiSweep,
}
