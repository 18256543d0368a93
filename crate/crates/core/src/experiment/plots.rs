//! Headered numeric text files, one per figure series.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::{Family, ModeKind};
use super::run::{RunResult, SweepResult, SUMMARY_FILE, SWEEP_FILE};
use crate::error::Result;

/// `-100 (J_ga - J_cm) / J_cm`.
pub fn delta_j_percent(j_ga: f64, j_cm: f64) -> f64 {
    -100.0 * (j_ga - j_cm) / j_cm
}

fn ancilla_name(r: &RunResult) -> &'static str {
    match r.config.ancilla {
        crate::genome::AncillaVariant::DiagonalQubit => "diagonal",
        crate::genome::AncillaVariant::GenericQubit => "generic",
        crate::genome::AncillaVariant::Qutrit => "qutrit",
    }
}

fn target_tag(r: &RunResult) -> String {
    let t = &r.config.target;
    match r.config.family {
        Family::Thermalize | Family::BaselineOnly => format!("beta{}", t.beta),
        Family::Coherent => format!("alpha{}_{}", t.alpha[0], t.alpha[1]),
        Family::Squeezed => format!("zeta{}_{}", t.zeta[0], t.zeta[1]),
        Family::FockPrep => format!("fock{}", t.fock),
        Family::NonGaussian => "ng".into(),
    }
}

/// File stem naming family, ancilla, target, timing and seed.
pub fn run_tag(r: &RunResult) -> String {
    let timing = match r.config.mode() {
        ModeKind::Fixed => format!("tc{}_n{}", r.scenario.t_c, r.scenario.n),
        ModeKind::Variable => format!("T{}", r.config.timing.total_time.unwrap_or(r.scenario.total_time)),
    };
    format!("{}_{}_{}_{}_seed{}", r.config.family.name(), ancilla_name(r), target_tag(r), timing, r.config.seed)
}

fn fitness_label(family: Family) -> &'static str {
    match family {
        Family::NonGaussian => "non_gaussianity [nats]",
        _ => "J [-trace distance]",
    }
}

fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = format!("# {}\n", header.join("\t"));
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", cells.join("\t")).expect("write to string");
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes all plot files for `results` and `sweeps` into `dir` and returns
/// their paths.
pub fn emit_plot_data(results: &[RunResult], sweeps: &[SweepResult], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut emit = |name: String, header: &[&str], rows: Vec<Vec<f64>>| -> Result<()> {
        let path = dir.join(format!("{name}.dat"));
        write_table(&path, header, &rows)?;
        written.push(path);
        Ok(())
    };

    for r in results {
        let tag = run_tag(r);
        let label = fitness_label(r.config.family);
        let t_c = r.scenario.t_c;
        let time = |k: usize| k as f64 * t_c;
        match &r.baseline {
            Some(b) if b.t_c == t_c && b.fitness_curve.len() == r.trajectory.len() && !r.best_genome.is_empty() => {
                let rows = r
                    .trajectory
                    .iter()
                    .zip(&b.fitness_curve)
                    .enumerate()
                    .map(|(k, (&j, &jb))| vec![time(k), j, jb])
                    .collect();
                let header = ["t [1/omega_c]", &format!("optimized {label}"), &format!("baseline {label}")];
                emit(format!("{tag}_trajectory"), &header, rows)?;
            }
            baseline => {
                let rows = r.trajectory.iter().enumerate().map(|(k, &j)| vec![time(k), j]).collect();
                emit(format!("{tag}_trajectory"), &["t [1/omega_c]", label], rows)?;
                if let Some(b) = baseline.as_ref().filter(|_| !r.best_genome.is_empty()) {
                    let rows = b.fitness_curve.iter().enumerate().map(|(k, &j)| vec![k as f64 * b.t_c, j]).collect();
                    emit(format!("{tag}_baseline"), &["t [1/omega_c]", &format!("baseline {label}")], rows)?;
                }
            }
        }
        if let Some(a) = &r.ancillae {
            let mut header = vec!["collision".to_string()];
            header
                .extend(a.columns.iter().map(|c| if c == "beta_a" { "beta_a [1/omega_c]".into() } else { c.clone() }));
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            let rows = a
                .rows
                .iter()
                .enumerate()
                .map(|(k, row)| std::iter::once((k + 1) as f64).chain(row.iter().copied()).collect())
                .collect();
            emit(format!("{tag}_ancillae"), &header, rows)?;
        }
        if !r.trace.is_empty() {
            let rows = r.trace.iter().map(|p| vec![p.generation as f64, p.best_fitness, p.mean_fitness]).collect();
            emit(format!("{tag}_convergence"), &["generation", "best fitness", "mean fitness"], rows)?;
        }
    }

    // best over seeds, per (ancilla, target beta, t_c) and total time
    let thermal: Vec<&RunResult> = results
        .iter()
        .filter(|r| r.config.family == Family::Thermalize && r.config.mode() == ModeKind::Fixed && r.baseline.is_some())
        .collect();
    let mut by_tc: BTreeMap<String, BTreeMap<u64, (f64, f64, f64)>> = BTreeMap::new();
    for r in &thermal {
        let key = format!("thermalize_{}_beta{}_tc{}_vs_T", ancilla_name(r), r.config.target.beta, r.scenario.t_c);
        let cm = r.baseline.as_ref().expect("filtered").final_fitness;
        let entry = by_tc.entry(key).or_default().entry(r.scenario.total_time.to_bits()).or_insert((
            r.scenario.total_time,
            f64::NEG_INFINITY,
            cm,
        ));
        entry.1 = entry.1.max(r.final_fitness);
    }
    for (name, points) in by_tc {
        let mut rows: Vec<Vec<f64>> = points.into_values().map(|(t, ga, cm)| vec![t, ga, cm]).collect();
        rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
        emit(name, &["T [1/omega_c]", "optimized J [-trace distance]", "baseline J [-trace distance]"], rows)?;
    }

    let mut by_beta: BTreeMap<String, BTreeMap<u64, (f64, f64, f64)>> = BTreeMap::new();
    for r in &thermal {
        let key = format!("thermalize_{}_tc{}_n{}_delta_j", ancilla_name(r), r.scenario.t_c, r.scenario.n);
        let beta = r.config.target.beta;
        let cm = r.baseline.as_ref().expect("filtered").final_fitness;
        let entry = by_beta.entry(key).or_default().entry(beta.to_bits()).or_insert((beta, f64::NEG_INFINITY, cm));
        entry.1 = entry.1.max(r.final_fitness);
    }
    for (name, points) in by_beta {
        let mut rows: Vec<Vec<f64>> =
            points.into_values().map(|(beta, ga, cm)| vec![beta, delta_j_percent(ga, cm)]).collect();
        rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
        emit(name, &["target beta [1/omega_c]", "delta J [%]"], rows)?;
    }

    for s in sweeps {
        let c = &s.config;
        let name = format!(
            "chi_sweep_beta{}_alpha{}_{}_T{}_tc{}",
            c.sweep.beta, c.target.alpha[0], c.target.alpha[1], c.sweep.total_time, c.sweep.t_c
        );
        let rows = s.sweep.curve.iter().map(|&(chi, d)| vec![chi, d]).collect();
        emit(name, &["chi", "trace distance"], rows)?;
    }
    Ok(written)
}

/// Every `summary.json` and `sweep.json` below `dir`, in path order.
pub fn load_results(dir: &Path) -> Result<(Vec<RunResult>, Vec<SweepResult>)> {
    let mut files = Vec::new();
    collect_files(dir, &mut files)?;
    files.sort();
    let (mut runs, mut sweeps) = (Vec::new(), Vec::new());
    for path in files {
        match path.file_name().and_then(|n| n.to_str()) {
            Some(SUMMARY_FILE) => runs.push(serde_json::from_str(&fs::read_to_string(&path)?)?),
            Some(SWEEP_FILE) => sweeps.push(serde_json::from_str(&fs::read_to_string(&path)?)?),
            _ => {}
        }
    }
    Ok((runs, sweeps))
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_files(&path, out)?;
        } else {
            out.push(path);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{run_experiment, run_sweep, ExperimentConfig};

    #[test]
    fn delta_j_examples() {
        assert_eq!(delta_j_percent(-0.1, -0.2), 50.0);
        assert_eq!(delta_j_percent(-0.2, -0.2), 0.0);
    }

    fn thermal_run(t_c: f64, n: usize, seed: u64) -> RunResult {
        let text = format!(
            "n_levels = 6\nseed = {seed}\n[timing]\nt_c = {t_c}\nn = {n}\n[ga]\npopulation = 12\nelites = 6\ngenerations = 2\n"
        );
        run_experiment(&ExperimentConfig::from_toml(&text).unwrap()).unwrap()
    }

    #[test]
    fn thermalization_sweep_gives_six_series() {
        let mut runs = Vec::new();
        for t_c in [0.5, 1.0, 0.25] {
            for total in [1.0, 2.0] {
                let n = (total / t_c) as usize;
                runs.push(thermal_run(t_c, n, 1));
                runs.push(thermal_run(t_c, n, 2));
            }
        }
        let dir = tempfile::tempdir().unwrap();
        let files = emit_plot_data(&runs, &[], dir.path()).unwrap();
        let vs_t: Vec<_> = files.iter().filter(|p| p.to_str().unwrap().ends_with("_vs_T.dat")).collect();
        assert_eq!(vs_t.len(), 3);
        let mut series = 0;
        for f in vs_t {
            let text = fs::read_to_string(f).unwrap();
            let mut lines = text.lines();
            assert!(lines.next().unwrap().starts_with("# T [1/omega_c]"));
            let rows: Vec<Vec<f64>> = lines.map(|l| l.split('\t').map(|v| v.parse().unwrap()).collect()).collect();
            assert_eq!(rows.len(), 2);
            assert!(rows.iter().all(|r| r.len() == 3));
            series += rows[0].len() - 1;
            // best over the two seeds
            let best = runs
                .iter()
                .filter(|r| {
                    f.to_str().unwrap().contains(&format!("tc{}_", r.scenario.t_c))
                        && r.scenario.total_time == rows[0][0]
                })
                .map(|r| r.final_fitness)
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(rows[0][1], best);
        }
        assert_eq!(series, 6);
        assert!(files.iter().any(|p| p.to_str().unwrap().ends_with("_delta_j.dat")));
    }

    #[test]
    fn per_run_files_round_trip_full_precision() {
        let r = thermal_run(0.5, 4, 9);
        let dir = tempfile::tempdir().unwrap();
        emit_plot_data(std::slice::from_ref(&r), &[], dir.path()).unwrap();
        let tag = run_tag(&r);
        assert_eq!(tag, "thermalize_generic_beta1_tc0.5_n4_seed9");
        let text = fs::read_to_string(dir.path().join(format!("{tag}_trajectory.dat"))).unwrap();
        let last: Vec<f64> = text.lines().last().unwrap().split('\t').map(|v| v.parse().unwrap()).collect();
        assert_eq!(last, vec![2.0, r.final_fitness, r.baseline.as_ref().unwrap().final_fitness]);
        let ancillae = fs::read_to_string(dir.path().join(format!("{tag}_ancillae.dat"))).unwrap();
        assert!(ancillae.starts_with("# collision\tbloch_x\tbloch_y\tbloch_z\n"));
        assert_eq!(ancillae.lines().count(), 5);
        let conv = fs::read_to_string(dir.path().join(format!("{tag}_convergence.dat"))).unwrap();
        assert_eq!(conv.lines().count(), 1 + r.trace.len());
    }

    #[test]
    fn results_are_found_recursively() {
        let root = tempfile::tempdir().unwrap();
        let mut c =
            ExperimentConfig::from_toml("n_levels = 6\n[ga]\npopulation = 12\nelites = 6\ngenerations = 1\n").unwrap();
        c.output = Some(root.path().join("a/b"));
        run_experiment(&c).unwrap();
        let mut s = ExperimentConfig::from_toml(
            "family = \"coherent\"\nn_levels = 12\n[sweep]\npoints = 5\ntotal_time = 0.2\nt_c = 0.1\n",
        )
        .unwrap();
        s.output = Some(root.path().join("sweep"));
        run_sweep(&s).unwrap();
        let (runs, sweeps) = load_results(root.path()).unwrap();
        assert_eq!((runs.len(), sweeps.len()), (1, 1));
        let files = emit_plot_data(&runs, &sweeps, &root.path().join("plots")).unwrap();
        assert!(files.iter().any(|p| p.file_name().unwrap().to_str().unwrap().starts_with("chi_sweep_beta5_alpha1_0")));
    }
}
