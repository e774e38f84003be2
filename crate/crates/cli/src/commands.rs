//! The computations behind each subcommand. Every command writes its tables
//! into the output directory and returns a [`Summary`].

use std::collections::BTreeMap;

use cca_core::dynamics::{
    alpha_markov, containment_half_width, emission_trace, evolve, field_frame, time_grid,
    EmissionTrace, FieldFrame, Route,
};
use cca_core::observables::{bound_gap, localization_metrics, threshold, Metric};
use cca_core::oracle::validate as validate_on_ring;
use cca_core::spectrum::{bound_energies, bound_state, Branch};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{float, write_heatmap, Achieved, Table};

/// What a finished command reports.
#[derive(Debug, Clone, Default)]
pub struct Summary {
    /// Files written, relative to the output directory.
    pub outputs: Vec<String>,
    pub metrics: BTreeMap<String, f64>,
    /// Accuracy of the amplitudes, when the command computed any.
    pub achieved: Option<Achieved>,
    /// Human-readable result lines for stdout.
    pub lines: Vec<String>,
    /// Set when the computation finished but its check did not pass.
    pub failure: Option<String>,
}

impl Summary {
    fn write(&mut self, config: &RunConfig, name: &str, table: &Table) -> Result<(), CliError> {
        table.write(&config.out.join(name))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn heatmap(
        &mut self,
        config: &RunConfig,
        stem: &str,
        frames: &[FieldFrame],
    ) -> Result<(), CliError> {
        let (image, sidecar) = write_heatmap(&config.out, stem, frames)?;
        for p in [image, sidecar] {
            self.outputs.push(file_name(&p));
        }
        Ok(())
    }

    fn achieved(&mut self) -> &mut Achieved {
        self.achieved.get_or_insert_with(Achieved::default)
    }

    fn record_trace(&mut self, trace: &EmissionTrace) {
        let a = self.achieved();
        for (e, route) in trace.alpha_error.iter().zip(&trace.routes) {
            match route {
                Route::Quadrature => a.quadrature(*e),
                Route::Bessel => a.bessel(*e),
            }
        }
    }

    fn record_frames(&mut self, frames: &[FieldFrame]) {
        let a = self.achieved();
        for f in frames {
            a.quadrature(f.max_error());
        }
    }
}

fn file_name(p: &std::path::Path) -> String {
    p.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Dispatches on `config.command`.
pub fn run(config: &RunConfig) -> Result<Summary, CliError> {
    match config.command.as_str() {
        "spectrum" => spectrum(config),
        "emit" => emit(config),
        "field" => field(config),
        "localization" => localization(config),
        "thresholds" => thresholds(config),
        "validate" => validate(config),
        "figure-2" => figure2(config),
        "figure-3" => figure3(config),
        "figure-4" => figure4(config),
        "figure-5" => figure5(config),
        other => Err(CliError::Config(format!("unknown command `{other}`"))),
    }
}

fn times(config: &RunConfig) -> Result<Vec<f64>, CliError> {
    Ok(time_grid(config.tmin, config.tmax, config.tsteps)?)
}

fn log_grid(config: &RunConfig) -> Vec<f64> {
    let (a, b) = (config.eta_min.ln(), config.eta_max.ln());
    let last = (config.points - 1) as f64;
    (0..config.points)
        .map(|i| match i {
            0 => config.eta_min,
            i if i + 1 == config.points => config.eta_max,
            i => (a + (b - a) * i as f64 / last).exp(),
        })
        .collect()
}

fn tag(eta: f64) -> String {
    format!("eta{eta}")
}

fn spectrum(config: &RunConfig) -> Result<Summary, CliError> {
    let mut s = Summary::default();
    let mut table = Table::new(&[
        "eta",
        "J",
        "g",
        "omega_plus",
        "omega_minus",
        "omega_plus_minus_2J",
        "rho",
        "p_b",
        "norm",
        "lambda",
    ])
    .config(config);
    for eta in config.eta_list() {
        let p = config.params_for(eta)?;
        let bs = bound_state(&p, Branch::Plus)?;
        let (wp, wm) = bound_energies(&p);
        table.push(vec![
            float(eta),
            float(p.hopping()),
            float(p.coupling()),
            float(wp),
            float(wm),
            float(bound_gap(&p)),
            float(bs.rho),
            float(bs.p_b),
            float(bs.norm),
            float(bs.localization_length()),
        ]);
        s.lines.push(format!(
            "η = {eta}: ω± = ±{wp:.10}, ρ = {:.10}, p_b = {:.10}",
            bs.rho, bs.p_b
        ));
    }
    s.write(config, "spectrum.csv", &table)?;
    Ok(s)
}

fn trace_table(config: &RunConfig) -> Table {
    Table::new(&[
        "eta",
        "t",
        "p_e",
        "re_alpha",
        "im_alpha",
        "p_e_markov",
        "alpha_error",
        "route",
    ])
    .config(config)
}

fn push_trace(table: &mut Table, eta: f64, trace: &EmissionTrace, markov: &[f64]) {
    let pe = trace.excited_population();
    for i in 0..trace.times.len() {
        let route = match trace.routes[i] {
            Route::Quadrature => "quadrature",
            Route::Bessel => "bessel",
        };
        table.push(vec![
            float(eta),
            float(trace.times[i]),
            float(pe[i]),
            float(trace.alpha[i].re),
            float(trace.alpha[i].im),
            float(markov[i]),
            float(trace.alpha_error[i]),
            route.to_string(),
        ]);
    }
}

fn emission_into(config: &RunConfig, s: &mut Summary, name: &str) -> Result<(), CliError> {
    let grid = times(config)?;
    let q = config.quadrature();
    let mut table = trace_table(config);
    for eta in config.eta_list() {
        let p = config.params_for(eta)?;
        let trace = emission_trace(&p, &grid, &q)?;
        let markov: Vec<f64> = grid
            .iter()
            .map(|&t| alpha_markov(&p, t).map(|a| a * a))
            .collect::<Result<_, _>>()?;
        s.record_trace(&trace);
        push_trace(&mut table, eta, &trace, &markov);
        let last = *trace.excited_population().last().expect("non-empty grid");
        s.metrics.insert(format!("final_p_e_{}", tag(eta)), last);
        s.lines.push(format!(
            "η = {eta}: p_e({}) = {last:.6e}",
            grid.last().expect("non-empty grid")
        ));
    }
    s.write(config, name, &table)
}

fn emit(config: &RunConfig) -> Result<Summary, CliError> {
    let mut s = Summary::default();
    emission_into(config, &mut s, "emit.csv")?;
    Ok(s)
}

fn field_table(config: &RunConfig) -> Table {
    Table::new(&["eta", "t", "x", "re_psi", "im_psi", "p_x", "psi_error"]).config(config)
}

fn push_frames(table: &mut Table, eta: f64, frames: &[FieldFrame]) {
    for f in frames {
        for (x, (psi, err)) in f.sites().zip(f.psi.iter().zip(&f.psi_error)) {
            table.push(vec![
                float(eta),
                float(f.t),
                x.to_string(),
                float(psi.re),
                float(psi.im),
                float(psi.norm_sqr()),
                float(*err),
            ]);
        }
    }
}

/// Space-time field for every coupling: one long table and one heatmap each.
fn space_time(
    config: &RunConfig,
    s: &mut Summary,
    stem: &str,
) -> Result<Vec<(f64, EmissionTrace, Vec<FieldFrame>)>, CliError> {
    let grid = times(config)?;
    let q = config.quadrature();
    let mut table = field_table(config);
    let mut runs = Vec::new();
    for eta in config.eta_list() {
        let p = config.params_for(eta)?;
        let (trace, frames) = evolve(&p, &grid, config.window, &q)?;
        s.record_trace(&trace);
        s.record_frames(&frames);
        push_frames(&mut table, eta, &frames);
        s.heatmap(config, &format!("{stem}_{}", tag(eta)), &frames)?;
        runs.push((eta, trace, frames));
    }
    s.write(config, &format!("{stem}.csv"), &table)?;
    Ok(runs)
}

fn field(config: &RunConfig) -> Result<Summary, CliError> {
    let mut s = Summary::default();
    for (eta, trace, frames) in space_time(config, &mut s, "field")? {
        let last = frames.last().expect("non-empty grid");
        let pe = trace.excited_population()[trace.times.len() - 1];
        let inside = last.weight_within(config.window);
        s.metrics
            .insert(format!("final_window_weight_{}", tag(eta)), inside);
        s.lines.push(format!(
            "η = {eta}: at t = {}: p_e = {pe:.6e}, Σ_|x|≤{} p_x = {inside:.6e}",
            last.t, config.window
        ));
    }
    Ok(s)
}

fn localization(config: &RunConfig) -> Result<Summary, CliError> {
    let mut s = Summary::default();
    let mut table =
        Table::new(&["eta", "amplitude", "lambda", "eps_floc", "eps_atr"]).config(config);
    for eta in log_grid(config) {
        let m = localization_metrics(&config.params_for(eta)?)?;
        table.push(vec![
            float(eta),
            float(m.amplitude),
            float(m.lambda),
            float(m.eps_floc),
            float(m.eps_atr),
        ]);
    }
    s.lines.push(format!("{} couplings tabulated", table.len()));
    s.write(config, "localization.csv", &table)?;
    Ok(s)
}

fn thresholds(config: &RunConfig) -> Result<Summary, CliError> {
    let mut s = Summary::default();
    let mut table = Table::new(&["metric", "eps_c", "eta"]).config(config);
    for metric in [Metric::Floc, Metric::Atr] {
        let eta = threshold(metric, config.eps_c)?;
        table.push(vec![metric.name().into(), float(config.eps_c), float(eta)]);
        s.metrics.insert(format!("eta_{}", metric.name()), eta);
        s.lines.push(format!(
            "{} threshold at eps_c = {}: η = {eta:.6}",
            metric.name(),
            config.eps_c
        ));
    }
    s.write(config, "thresholds.csv", &table)?;
    Ok(s)
}

fn validate(config: &RunConfig) -> Result<Summary, CliError> {
    let mut s = Summary::default();
    let grid = times(config)?;
    let q = config.quadrature();
    let mut table = Table::new(&[
        "eta",
        "sites",
        "samples",
        "half_width",
        "max_alpha_deviation",
        "worst_alpha_time",
        "max_psi_deviation",
        "worst_psi_time",
        "worst_psi_site",
        "max_norm_defect",
        "tolerance",
        "passed",
    ])
    .config(config);
    let mut failed = Vec::new();
    for eta in config.eta_list() {
        let p = config.params_for(eta)?;
        let r = validate_on_ring(
            &p,
            config.oracle_n,
            &grid,
            config.window,
            &q,
            config.check_tol,
        )?;
        table.push(vec![
            float(eta),
            r.sites.to_string(),
            r.samples.to_string(),
            r.half_width.to_string(),
            float(r.max_alpha_deviation),
            float(r.worst_alpha_time),
            float(r.max_psi_deviation),
            float(r.worst_psi_point.0),
            r.worst_psi_point.1.to_string(),
            float(r.max_norm_defect),
            float(r.tolerance),
            r.passed.to_string(),
        ]);
        let t = tag(eta);
        s.metrics
            .insert(format!("max_alpha_deviation_{t}"), r.max_alpha_deviation);
        s.metrics
            .insert(format!("max_psi_deviation_{t}"), r.max_psi_deviation);
        s.lines.push(format!(
            "{} η = {eta}, N = {}: max |Δα| = {:.3e}, max |Δψ| = {:.3e} (tolerance {:e})",
            if r.passed { "PASS" } else { "FAIL" },
            r.sites,
            r.max_alpha_deviation,
            r.max_psi_deviation,
            r.tolerance
        ));
        if !r.passed {
            failed.push(eta.to_string());
        }
    }
    s.write(config, "validate.csv", &table)?;
    if !failed.is_empty() {
        s.failure = Some(format!(
            "analytic amplitudes deviate from the ring beyond {:e} for η = {}",
            config.check_tol,
            failed.join(", ")
        ));
    }
    Ok(s)
}

fn figure2(config: &RunConfig) -> Result<Summary, CliError> {
    let mut s = Summary::default();
    emission_into(config, &mut s, "figure2.csv")?;
    Ok(s)
}

fn figure3(config: &RunConfig) -> Result<Summary, CliError> {
    let mut s = Summary::default();
    space_time(config, &mut s, "figure3")?;
    if config.snapshots.is_empty() {
        return Ok(s);
    }
    let q = config.quadrature();
    let mut table = Table::new(&["eta", "t", "x", "p_x", "p_x_bound", "psi_error"]).config(config);
    for (eta, &t) in config.eta_list().into_iter().zip(&config.snapshots) {
        let p = config.params_for(eta)?;
        let width = containment_half_width(&p, t);
        let frame = field_frame(&p, t, width, &q)?;
        s.record_frames(std::slice::from_ref(&frame));
        for (x, i) in frame.sites().zip(0..) {
            table.push(vec![
                float(eta),
                float(t),
                x.to_string(),
                float(frame.psi[i].norm_sqr()),
                float(frame.psi_b[i].norm_sqr()),
                float(frame.psi_error[i]),
            ]);
        }
        s.lines.push(format!(
            "η = {eta}: snapshot at Jt = {} over |x| ≤ {width}",
            t * p.hopping()
        ));
    }
    s.write(config, "figure3_snapshots.csv", &table)?;
    Ok(s)
}

fn figure4(config: &RunConfig) -> Result<Summary, CliError> {
    let mut s = Summary::default();
    let mut table =
        Table::new(&["eta", "eps_floc", "eps_atr", "omega_plus_minus_2J"]).config(config);
    for eta in log_grid(config) {
        let p = config.params_for(eta)?;
        let m = localization_metrics(&p)?;
        table.push(vec![
            float(eta),
            float(m.eps_floc),
            float(m.eps_atr),
            float(bound_gap(&p)),
        ]);
    }
    s.write(config, "figure4.csv", &table)?;
    for metric in [Metric::Floc, Metric::Atr] {
        match threshold(metric, config.eps_c) {
            Ok(eta) => {
                s.metrics.insert(format!("eta_{}", metric.name()), eta);
                s.lines
                    .push(format!("{} threshold: η = {eta:.6}", metric.name()));
            }
            Err(e) => s.lines.push(format!("{} threshold: {e}", metric.name())),
        }
    }
    Ok(s)
}

fn figure5(config: &RunConfig) -> Result<Summary, CliError> {
    let mut s = Summary::default();
    let runs = space_time(config, &mut s, "figure5")?;
    let mut table = Table::new(&[
        "eta",
        "max_p_e",
        "min_window_weight",
        "mean_window_weight",
        "relative_std_window_weight",
        "eps_floc",
    ])
    .config(config);
    for (eta, trace, frames) in runs {
        let pe_max = trace.excited_population().into_iter().fold(0.0, f64::max);
        let local: Vec<f64> = frames
            .iter()
            .map(|f| f.weight_within(config.window))
            .collect();
        let n = local.len() as f64;
        let min = local.iter().copied().fold(f64::INFINITY, f64::min);
        let mean = local.iter().sum::<f64>() / n;
        let std = (local.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        let floc = localization_metrics(&config.params_for(eta)?)?.eps_floc;
        table.push(vec![
            float(eta),
            float(pe_max),
            float(min),
            float(mean),
            float(std / mean),
            float(floc),
        ]);
        s.lines.push(format!(
            "η = {eta}: max p_e = {pe_max:.3e}, Σ_|x|≤{} p_x ∈ [{min:.4}, …], mean {mean:.4}, eps_floc {floc:.4}",
            config.window
        ));
    }
    s.write(config, "figure5_summary.csv", &table)?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Overrides;
    use std::path::PathBuf;

    fn config(command: &str, dir: &std::path::Path, flags: Overrides) -> RunConfig {
        let flags = Overrides {
            out: Some(PathBuf::from(dir)),
            ..flags
        };
        RunConfig::resolve(command, &Overrides::default(), &flags).unwrap()
    }

    #[test]
    fn log_grid_hits_both_ends() {
        let c = RunConfig::preset("figure-4");
        let g = log_grid(&c);
        assert_eq!(g.len(), 401);
        assert_eq!((g[0], g[400]), (0.01, 100.0));
        assert!((g[200] - 1.0).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn spectrum_rejects_uncoupled_atom() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(
            "spectrum",
            dir.path(),
            Overrides {
                eta: Some(0.0),
                ..Default::default()
            },
        );
        assert_eq!(
            run(&c).unwrap_err().exit_code(),
            crate::error::exit::INVALID_PARAMETER
        );
    }

    #[test]
    fn emission_records_routes() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(
            "emit",
            dir.path(),
            Overrides {
                eta: Some(1.0),
                tmin: Some(150.0),
                tmax: Some(250.0),
                tsteps: Some(3),
                ..Default::default()
            },
        );
        let s = run(&c).unwrap();
        let a = s.achieved.unwrap();
        assert!(a.quadrature_max_error <= c.tol);
        assert!(a.bessel_max_error.is_some());
        assert_eq!(s.outputs, vec!["emit.csv".to_string()]);
    }

    #[test]
    fn validation_failure_is_reported_not_raised() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(
            "validate",
            dir.path(),
            Overrides {
                eta: Some(1.0),
                oracle_n: Some(128),
                tmax: Some(20.0),
                tsteps: Some(5),
                window: Some(10),
                check_tol: Some(1e-30),
                ..Default::default()
            },
        );
        let s = run(&c).unwrap();
        assert!(s.failure.is_some());
    }
}
