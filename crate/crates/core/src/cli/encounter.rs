use clap::Args;

use super::{csv_bytes, opt_str, to_json, CliError, Format, Resolved};
use crate::scaling::{run_scaling, ScalingConfig, ScalingResult};

#[derive(Debug, Clone, Default, Args)]
pub struct ScalingArgs {
    /// World dimension (1, 2 or 3)
    #[arg(long)]
    pub dim: Option<u8>,
    /// Comma-separated contraction factors in (0, 1]
    #[arg(long, value_name = "E1,E2,...")]
    pub eps: Option<String>,
    /// Meeting distance (2D and 3D)
    #[arg(long, allow_negative_numbers = true)]
    pub radius: Option<f64>,
    /// Time step (the step cap in 3D)
    #[arg(long, allow_negative_numbers = true)]
    pub dt: Option<f64>,
    /// Paths per contraction factor
    #[arg(long)]
    pub paths: Option<usize>,
    /// Brownian-bridge crossing correction (1D and 2D)
    #[arg(long)]
    pub bridge: bool,
    /// 1D start of the first host, unit coordinates
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    /// 1D start of the second host, unit coordinates
    #[arg(long, allow_negative_numbers = true)]
    pub y0: Option<f64>,
    /// 2D starting cosine of the angular distance
    #[arg(long, allow_negative_numbers = true)]
    pub z0: Option<f64>,
}

fn default_eps(dim: u8) -> &'static str {
    match dim {
        3 => "1,0.8,0.6",
        _ => "1,0.7,0.5,0.35,0.25",
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| CliError::usage(format!("eps list `{s}`: `{x}` is not a number")))
        })
        .collect()
}

pub fn config_from(res: &Resolved, a: &ScalingArgs) -> Result<ScalingConfig, CliError> {
    let dim: u8 = res.get("dim", a.dim, 1)?;
    let eps_spec = a
        .eps
        .clone()
        .or_else(|| res.file.raw("eps").map(str::to_string))
        .unwrap_or_else(|| default_eps(dim).into());
    let mut c = ScalingConfig::new(dim, parse_list(&eps_spec)?);
    c.radius = res.get("radius", a.radius, c.radius)?;
    c.path.dt = res.get("dt", a.dt, c.path.dt)?;
    c.path.horizon = res.get("horizon", res.common.horizon, c.path.horizon)?;
    c.path.bridge = a.bridge || res.file.get::<bool>("bridge")?.unwrap_or(false);
    c.paths = res.get("paths", a.paths, c.paths)?;
    c.x0 = res.get("x0", a.x0, c.x0)?;
    c.y0 = res.get("y0", a.y0, c.y0)?;
    c.z0 = res.get("z0", a.z0, c.z0)?;
    c.seed = res.seed()?;
    c.validate()?;
    Ok(c)
}

pub const SCALING_HEADER: [&str; 6] = ["epsilon", "mean_time", "se", "n_paths", "excluded", "analytic"];

fn csv(r: &ScalingResult) -> Vec<u8> {
    csv_bytes(
        &SCALING_HEADER,
        r.points.iter().map(|p| {
            vec![
                p.epsilon.to_string(),
                p.mean_time.to_string(),
                p.se.to_string(),
                p.paths.to_string(),
                p.excluded.to_string(),
                opt_str(p.analytic),
            ]
        }),
    )
}

pub(super) fn run(res: &Resolved, a: &ScalingArgs) -> Result<(), CliError> {
    let config = config_from(res, a)?;
    let result = run_scaling(&config)?;
    if let Some(f) = &result.fit {
        let predicted = result
            .predicted_exponent
            .map_or(String::new(), |p| format!(" (power law predicts {p})"));
        eprintln!(
            "fitted exponent {:.4}, {:.0}% CI [{:.4}, {:.4}]{predicted}",
            f.slope,
            100.0 * f.level,
            f.ci_low,
            f.ci_high
        );
    }
    for p in result.points.iter().filter(|p| p.excluded * 100 > p.paths + p.excluded) {
        eprintln!(
            "warning: epsilon {}: {} paths exceeded the horizon, mean is biased low",
            p.epsilon, p.excluded
        );
    }
    let bytes = match res.format()? {
        Format::Json => to_json(&result),
        Format::Csv => csv(&result),
    };
    res.emit(&bytes)
}
