use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use super::{csv_bytes, to_json, CliError, Format, Resolved};
use crate::error::{Error, Result};
use crate::multistage::{
    absorption_pgf, absorption_pmf_to_mass, build_chain, expected_absorption, find_kstar, mean_step_map,
    simulate_chain, LadderParams, MeanStep, DEFAULT_K_CAP,
};

/// Mass left out when the pmf table is truncated.
pub const PMF_TOLERANCE: f64 = 1e-10;
const PMF_MAX_STEPS: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
pub enum Table {
    #[default]
    Pmf,
    Levels,
    Expected,
    MeanStep,
}

impl std::str::FromStr for Table {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct MultistageArgs {
    /// Common transmission probability
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Common mutation probability
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    /// Table written in CSV mode
    #[arg(long, value_enum)]
    pub table: Option<Table>,
    /// Monte Carlo runs of the chain added beside the pmf (0 = none)
    #[arg(long)]
    pub runs: Option<usize>,
    /// Highest level of the mean-step map (default k* + 2)
    #[arg(long)]
    pub k_max: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub k: usize,
    pub sigma_plus: f64,
    /// Absent at `k*`, where the chain stops.
    pub rho: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmfRow {
    pub n: usize,
    pub probability: f64,
    pub empirical: Option<f64>,
    pub se: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultistageReport {
    pub ladder: LadderParams,
    pub k_star: usize,
    pub epidemic: bool,
    pub levels: Vec<LevelRow>,
    pub pmf: Vec<PmfRow>,
    /// `E(T | X_0 = j)`, `j = 0..k*`.
    pub expected: Vec<f64>,
    pub pgf_at_one: Option<f64>,
    pub simulated_mean: Option<f64>,
    pub simulated_se: Option<f64>,
    pub mean_step: Vec<MeanStep>,
}

pub fn multistage_report(lp: &LadderParams, runs: usize, seed: u64, k_max: Option<usize>) -> Result<MultistageReport> {
    let k_star = find_kstar(lp, DEFAULT_K_CAP)?;
    let levels = (0..=k_star)
        .map(|k| {
            let rho = if k < k_star { Some(lp.rho(k)?) } else { None };
            Ok(LevelRow {
                k,
                sigma_plus: lp.sigma_plus(k),
                rho,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mean_step = match mean_step_map(lp, k_max.unwrap_or(k_star + 2)) {
        Ok(m) => m,
        Err(Error::ReducibleGenerator) => Vec::new(),
        Err(e) => return Err(e),
    };
    if k_star == 0 {
        return Ok(MultistageReport {
            ladder: *lp,
            k_star,
            epidemic: false,
            levels,
            pmf: Vec::new(),
            expected: Vec::new(),
            pgf_at_one: None,
            simulated_mean: None,
            simulated_se: None,
            mean_step,
        });
    }
    let chain = build_chain(lp)?;
    let f = absorption_pmf_to_mass(&chain, PMF_TOLERANCE, PMF_MAX_STEPS);
    let sample = if runs > 0 {
        Some(simulate_chain(&chain, runs, seed)?)
    } else {
        None
    };
    let pmf = f
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let emp = sample.as_ref().map(|s| s.frequency(i + 1));
            PmfRow {
                n: i + 1,
                probability: p,
                empirical: emp.map(|e| e.0),
                se: emp.map(|e| e.1),
            }
        })
        .collect();
    Ok(MultistageReport {
        ladder: *lp,
        k_star,
        epidemic: true,
        levels,
        pmf,
        expected: expected_absorption(&chain),
        pgf_at_one: Some(absorption_pgf(&chain, 1.0)?),
        simulated_mean: sample.as_ref().map(|s| s.mean),
        simulated_se: sample.as_ref().map(|s| s.se),
        mean_step,
    })
}

fn csv(r: &MultistageReport, table: Table) -> Vec<u8> {
    let s = |x: f64| x.to_string();
    let o = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
    match table {
        Table::Pmf => csv_bytes(
            &["n", "probability", "empirical", "se"],
            r.pmf
                .iter()
                .map(|p| vec![p.n.to_string(), s(p.probability), o(p.empirical), o(p.se)]),
        ),
        Table::Levels => csv_bytes(
            &["k", "sigma_plus", "rho"],
            r.levels
                .iter()
                .map(|l| vec![l.k.to_string(), s(l.sigma_plus), o(l.rho)]),
        ),
        Table::Expected => csv_bytes(
            &["j", "expected_steps"],
            r.expected.iter().enumerate().map(|(j, m)| vec![j.to_string(), s(*m)]),
        ),
        Table::MeanStep => csv_bytes(
            &["k", "sigma_plus", "pi1", "pi2", "pi3", "mean_step"],
            r.mean_step.iter().map(|m| {
                vec![
                    m.k.to_string(),
                    s(m.sigma_plus),
                    s(m.shares[0]),
                    s(m.shares[1]),
                    s(m.shares[2]),
                    s(m.mean_step),
                ]
            }),
        ),
    }
}

pub(super) fn run(res: &Resolved, a: &MultistageArgs) -> Result<(), CliError> {
    let d = LadderParams::example();
    let c = &res.common;
    let lp = LadderParams {
        alpha0: res.get("alpha0", c.alpha0, d.alpha0)?,
        r: res.get("r", c.r, d.r)?,
        beta: res.get("beta", a.beta, d.beta)?,
        mu: res.get("mu", a.mu, d.mu)?,
        lambda: res.get("lambda", c.lambda, d.lambda)?,
    };
    lp.validate()?;
    let runs: usize = res.get("runs", a.runs, 0)?;
    let k_max: Option<usize> = match a.k_max {
        Some(k) => Some(k),
        None => res.file.get("k_max")?,
    };
    let table: Table = res.get("table", a.table, Table::Pmf)?;
    let report = multistage_report(&lp, runs, res.seed()?, k_max)?;
    if !report.epidemic {
        println!("no epidemic (k*=0): level 0 is already subcritical");
    }
    let bytes = match res.format()? {
        Format::Json => to_json(&report),
        Format::Csv if !report.epidemic && table != Table::Levels && table != Table::MeanStep => return Ok(()),
        Format::Csv => csv(&report, table),
    };
    res.emit(&bytes)
}
