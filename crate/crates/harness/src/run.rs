//! Executes a plan: one reference, then every `(scheme, Δ)` cell.

use std::fs;
use std::path::{Path, PathBuf};

use dnd_sde_core::{make_test_problem, BilinearModel, NoiseSpec, SchemeId, SdeModel, TestProblem, TimeGrid};

use crate::batch::Executor;
use crate::error::HarnessError;
use crate::estimate::{mean_series, strong_error_rel, weak_error_abs, weak_error_rel, SchemeRun};
use crate::plan::{format_dyadic, functional_label, ExperimentPlan, ModelSpec, Mode, ReferenceChoice};
use crate::reference::{
    exact_sampler_reference, quadrature_reference, reference_times, scheme_reference, Reference, ReferenceMethod,
};
use crate::table::{ErrorRow, ErrorTable, SeriesRow, SeriesTable};

/// Seed offset that keeps reference paths independent of the scheme paths.
pub const REFERENCE_PURPOSE: u64 = 1;

/// Command-line overrides. `samples` replaces both the scheme and the
/// reference sample counts.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl RunOptions {
    pub fn apply(&self, plan: &ExperimentPlan) -> Result<ExperimentPlan, HarnessError> {
        let mut plan = plan.clone();
        if let Some(n) = self.samples {
            plan.samples = n;
            plan.reference_samples = n;
        }
        if let Some(seed) = self.seed {
            plan.noise.seed = seed;
        }
        if let Some(out) = &self.out {
            plan.output = out.clone();
        }
        crate::plan::validate(&plan)?;
        Ok(plan)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub errors: ErrorTable,
    /// Filled in `stability_trace` mode.
    pub series: Option<SeriesTable>,
    pub reference: Option<Reference>,
    /// `scheme at Δ` for every cell in which every path failed.
    pub all_failed: Vec<String>,
    pub written: Vec<PathBuf>,
}

enum Built {
    Problem(TestProblem),
    Bilinear(BilinearModel),
}

fn build_model(spec: &ModelSpec) -> Result<Built, HarnessError> {
    Ok(match spec {
        ModelSpec::Problem(id) => Built::Problem(make_test_problem(*id)?),
        ModelSpec::Bilinear { dim, drift, diffusions } => {
            Built::Bilinear(BilinearModel::new(*dim, drift.clone(), diffusions.clone())?)
        }
    })
}

/// Computes the tables without touching the file system.
pub fn run_experiment(plan: &ExperimentPlan, exec: &Executor) -> Result<RunReport, HarnessError> {
    crate::plan::validate(plan)?;
    match build_model(&plan.model)? {
        Built::Problem(p) => run_on(plan, &p, Some(&p), exec),
        Built::Bilinear(m) => run_on(plan, &m, None, exec),
    }
}

fn planar_x0(plan: &ExperimentPlan) -> Result<[f64; 2], HarnessError> {
    plan.x0
        .as_slice()
        .try_into()
        .map_err(|_| HarnessError::Unsupported("the rotation problem needs a 2-dimensional x0".into()))
}

fn need_problem(problem: Option<&TestProblem>) -> Result<&TestProblem, HarnessError> {
    problem.ok_or_else(|| HarnessError::Unsupported("this reference needs the rotation41 problem".into()))
}

fn build_reference<M: SdeModel + Sync + ?Sized>(
    plan: &ExperimentPlan,
    model: &M,
    problem: Option<&TestProblem>,
    exec: &Executor,
) -> Result<Option<Reference>, HarnessError> {
    let noise = NoiseSpec::new(plan.reference_law, plan.noise.seed).derived(REFERENCE_PURPOSE);
    let (t, f, n) = (plan.horizon, plan.functional, plan.reference_samples);
    let r = match plan.reference {
        ReferenceChoice::None => return Ok(None),
        ReferenceChoice::Quadrature => {
            let times = if plan.mode == Mode::WeakRel {
                vec![0.0, t]
            } else {
                reference_times(t)
            };
            quadrature_reference(need_problem(problem)?, planar_x0(plan)?, &times, f)?
        }
        ReferenceChoice::Exact => {
            exact_sampler_reference(exec, need_problem(problem)?, planar_x0(plan)?, t, f, n, noise)?
        }
        ReferenceChoice::BackwardEuler => scheme_reference(
            exec,
            model,
            SchemeId::backward_euler(),
            plan.reference_delta,
            0.0,
            &plan.x0,
            t,
            f,
            n,
            noise,
        )?,
        ReferenceChoice::Dnd => scheme_reference(
            exec,
            model,
            SchemeId::Dnd,
            plan.reference_delta,
            plan.resolved_alpha(),
            &plan.x0,
            t,
            f,
            n,
            noise,
        )?,
    };
    Ok(Some(r))
}

fn run_on<M: SdeModel + Sync + ?Sized>(
    plan: &ExperimentPlan,
    model: &M,
    problem: Option<&TestProblem>,
    exec: &Executor,
) -> Result<RunReport, HarnessError> {
    let reference = build_reference(plan, model, problem, exec)?;
    let alpha = plan.resolved_alpha();
    let mut errors = ErrorTable::default();
    let mut series = (plan.mode == Mode::StabilityTrace).then(SeriesTable::default);
    let mut all_failed = Vec::new();

    if let (Some(table), Some(r)) = (series.as_mut(), &reference) {
        let delta = match r.method {
            ReferenceMethod::Scheme { dt, .. } => Some(dt),
            _ => None,
        };
        for ((&t, &mean), &ci99) in r.times.iter().zip(&r.values).zip(&r.ci) {
            table.rows.push(SeriesRow {
                scheme: format!("reference_{}", r.method.name()),
                delta,
                t,
                mean,
                ci99,
            });
        }
    }

    for &scheme in &plan.schemes {
        for &delta in &plan.deltas {
            let grid = TimeGrid::new(delta, plan.horizon)?;
            let mut row = ErrorRow {
                scheme: scheme.name().to_owned(),
                delta,
                horizon: plan.horizon,
                functional: functional_label(plan.functional),
                estimate: None,
                ci99: None,
                eps_a: None,
                eps_r: None,
                eps_hat: None,
                samples: plan.samples,
                failed_paths: 0,
                seed: plan.noise.seed,
            };
            if plan.mode == Mode::Strong {
                let problem = need_problem(problem)?;
                match strong_error_rel(exec, problem, scheme, alpha, planar_x0(plan)?, grid, plan.samples, plan.noise) {
                    Ok(s) => {
                        row.estimate = Some(s.eps_hat);
                        row.ci99 = Some(s.ci);
                        row.eps_hat = Some(s.eps_hat);
                        row.failed_paths = s.failed_paths;
                    }
                    Err(HarnessError::AllPathsFailed { paths }) => {
                        row.failed_paths = paths;
                        all_failed.push(format!("{} at {}", scheme.name(), format_dyadic(delta)));
                    }
                    Err(e) => return Err(e),
                }
                errors.rows.push(row);
                continue;
            }
            let run = SchemeRun {
                model,
                scheme,
                alpha,
                x0: &plan.x0,
                grid,
                functional: plan.functional,
                noise: plan.noise,
            };
            let s = mean_series(exec, &run, plan.samples)?;
            row.failed_paths = s.failed_paths;
            if s.all_failed() {
                all_failed.push(format!("{} at {}", scheme.name(), format_dyadic(delta)));
                errors.rows.push(row);
                continue;
            }
            let (mean, ci) = (s.terminal().mean(), s.terminal().ci99());
            row.estimate = Some(mean);
            row.ci99 = Some(ci);
            if let Some(r) = &reference {
                if s.times.iter().all(|&t| r.at(t).is_some()) {
                    row.eps_a = Some(weak_error_abs(&s, r)?.eps_a);
                }
                row.eps_r = weak_error_rel((mean, ci), r.terminal()).ok().map(|w| w.eps_r);
            }
            if let Some(table) = series.as_mut() {
                for (&t, st) in s.times.iter().zip(&s.stats) {
                    table.rows.push(SeriesRow {
                        scheme: scheme.name().to_owned(),
                        delta: Some(delta),
                        t,
                        mean: st.mean(),
                        ci99: st.ci99(),
                    });
                }
            }
            errors.rows.push(row);
        }
    }
    Ok(RunReport {
        errors,
        series,
        reference,
        all_failed,
        written: Vec::new(),
    })
}

fn write(path: &Path, text: &str) -> Result<(), HarnessError> {
    fs::write(path, text).map_err(|source| HarnessError::Io {
        what: path.to_owned(),
        source,
    })
}

/// Applies the overrides, runs the plan and writes `errors.csv` (plus
/// `series.csv` in `stability_trace` mode) into the output directory.
pub fn execute_plan(plan: &ExperimentPlan, opts: &RunOptions) -> Result<RunReport, HarnessError> {
    let plan = opts.apply(plan)?;
    let workers = opts
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let exec = Executor::new(workers)?;
    let mut report = run_experiment(&plan, &exec)?;
    fs::create_dir_all(&plan.output).map_err(|source| HarnessError::Io {
        what: plan.output.clone(),
        source,
    })?;
    let path = plan.output.join("errors.csv");
    write(&path, &report.errors.to_csv())?;
    report.written.push(path);
    if let Some(series) = &report.series {
        let path = plan.output.join("series.csv");
        write(&path, &series.to_csv())?;
        report.written.push(path);
    }
    Ok(report)
}
