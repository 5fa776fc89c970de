use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::measurement::{simulate_toa_abstract, tdoa_from_toa, Backend, ToaSet};
use crate::prs::simulate_toa_signal;
use crate::rng::{derive_seed, Stream};
use crate::scenario::{centroid, distance, gen_ioo, gen_umi, BsId, Point2, Scenario, ScenarioKind};
use crate::selection::{
    quarter_bounds_offsets, select_distance_among, select_gdop, select_random_among, SelectionResult, Strategy,
};
use crate::solver::solve_with_restarts;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fix {
    pub reference_id: BsId,
    pub ids: Vec<BsId>,
    pub estimate: Point2,
    pub error_m: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TrialOutcome {
    Fix(Fix),
    /// The strategy could not produce a fix; holds the reason.
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    pub trial: usize,
    pub strategy: Strategy,
    /// Fingerprint of the measurements this strategy consumed.
    pub toa_fingerprint: u64,
    pub outcome: TrialOutcome,
}

impl TrialReport {
    pub fn fix(&self) -> Option<&Fix> {
        match &self.outcome {
            TrialOutcome::Fix(f) => Some(f),
            TrialOutcome::Skipped(_) => None,
        }
    }

    pub fn error_m(&self) -> Option<f64> {
        self.fix().map(|f| f.error_m)
    }
}

/// Everything one trial produced, before flattening into reports.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub trial: usize,
    pub scenario: Scenario,
    pub toas: ToaSet,
    pub selections: Vec<(Strategy, Result<SelectionResult, String>)>,
    pub reports: Vec<TrialReport>,
}

pub fn generate_scenario(cfg: &ExperimentConfig, trial: usize) -> Result<Scenario> {
    let seed = derive_seed(cfg.seed, trial as u64, Stream::Scenario);
    match cfg.scenario {
        ScenarioKind::Umi => gen_umi(seed, &cfg.umi_params()),
        ScenarioKind::Ioo => gen_ioo(seed, &cfg.ioo_params()),
    }
}

pub fn simulate_toas(cfg: &ExperimentConfig, scenario: &Scenario, trial: usize) -> Result<ToaSet> {
    match cfg.backend {
        Backend::Abstract => {
            simulate_toa_abstract(scenario, &cfg.noise, derive_seed(cfg.seed, trial as u64, Stream::Measurement))
        }
        Backend::Signal => {
            simulate_toa_signal(scenario, &cfg.signal, derive_seed(cfg.seed, trial as u64, Stream::ReceiverNoise))
        }
    }
}

fn select(
    cfg: &ExperimentConfig,
    strategy: Strategy,
    scenario: &Scenario,
    toas: &ToaSet,
    trial: usize,
) -> Result<SelectionResult> {
    let detected: Vec<BsId> = toas.iter().map(|(id, _)| id).collect();
    match strategy {
        Strategy::Gdop => select_gdop(scenario, toas, cfg.n_select, &cfg.solver),
        Strategy::Distance => select_distance_among(scenario, &detected, cfg.n_select),
        Strategy::Random => {
            let seed = derive_seed(cfg.seed, trial as u64, Stream::RandomSelection);
            select_random_among(scenario, &detected, cfg.n_select, seed)
        }
    }
}

fn locate(cfg: &ExperimentConfig, scenario: &Scenario, toas: &ToaSet, sel: &SelectionResult) -> Result<Fix> {
    let system = tdoa_from_toa(toas, sel.reference_id, &sel.ordered_ids)?.system(scenario)?;
    let start = centroid(&system.positions()).ok_or(Error::EmptyInput)?;
    let fix = solve_with_restarts(&system, start, &quarter_bounds_offsets(&scenario.bounds), &cfg.solver)?;
    let estimate = fix.estimate.x_hat;
    Ok(Fix {
        reference_id: sel.reference_id,
        ids: sel.ordered_ids.clone(),
        estimate,
        error_m: distance(estimate, scenario.ue),
        converged: fix.estimate.converged,
    })
}

/// One trial: a fresh scenario and one measurement set shared by every strategy.
pub fn run_trial(cfg: &ExperimentConfig, trial: usize) -> Result<TrialRecord> {
    let scenario = generate_scenario(cfg, trial)?;
    let toas = simulate_toas(cfg, &scenario, trial)?;
    let mut selections = Vec::with_capacity(cfg.strategies.len());
    let mut reports = Vec::with_capacity(cfg.strategies.len());
    for &strategy in &cfg.strategies {
        let selection = select(cfg, strategy, &scenario, &toas, trial);
        let fix = match &selection {
            Ok(sel) => locate(cfg, &scenario, &toas, sel).map_err(|e| e.to_string()),
            Err(e) => Err(e.to_string()),
        };
        let outcome = match fix {
            Ok(fix) => TrialOutcome::Fix(fix),
            Err(reason) => {
                log::debug!("trial {trial} {strategy}: skipped ({reason})");
                TrialOutcome::Skipped(reason)
            }
        };
        reports.push(TrialReport { trial, strategy, toa_fingerprint: toas.fingerprint(), outcome });
        selections.push((strategy, selection.map_err(|e| e.to_string())));
    }
    Ok(TrialRecord { trial, scenario, toas, selections, reports })
}

/// Run every trial in parallel and return the records in trial order.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    (0..cfg.trials).into_par_iter().map(|t| run_trial(cfg, t)).collect()
}

/// Reports ordered by trial, then by the configured strategy order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TrialReport>> {
    Ok(run_trials(cfg)?.into_iter().flat_map(|r| r.reports).collect())
}
