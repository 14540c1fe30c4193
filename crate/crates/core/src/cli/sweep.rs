use serde::{Deserialize, Serialize};

use super::{csv_bytes, opt_str, to_json, CliError, Format, Resolved};
use crate::error::Result;
use crate::model::{build_generator, classify, limiting_ratio, spectrum, Criticality, TwoTypeParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl SweepAxis {
    /// Parses `name:min:max:steps`.
    pub fn parse(spec: &str) -> Result<Self, CliError> {
        let bad = |why: &str| CliError::usage(format!("sweep axis `{spec}`: {why}"));
        let parts: Vec<&str> = spec.split(':').collect();
        let [name, min, max, steps] = parts[..] else {
            return Err(bad("expected name:min:max:steps"));
        };
        if !TwoTypeParams::FIELD_NAMES.contains(&name) {
            return Err(bad(&format!(
                "unknown parameter, expected one of {}",
                TwoTypeParams::FIELD_NAMES.join(", ")
            )));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad("bounds must be finite numbers"))
        };
        let steps: usize = steps.parse().map_err(|_| bad("steps must be an integer"))?;
        if steps < 2 {
            return Err(bad("steps must be >= 2"));
        }
        Ok(Self {
            name: name.to_string(),
            min: num(min)?,
            max: num(max)?,
            steps,
        })
    }

    /// Evenly spaced values, both ends included.
    pub fn values(&self) -> Vec<f64> {
        let n = self.steps - 1;
        (0..self.steps)
            .map(|i| {
                if i == n {
                    self.max
                } else {
                    self.min + (self.max - self.min) * i as f64 / n as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// Axis values, in axis order.
    pub values: Vec<f64>,
    pub sigma_plus: f64,
    /// `None` unless the cell is supercritical with `μ2 β2 λ > 0`.
    pub limiting_ratio: Option<f64>,
    pub supercritical: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub base: TwoTypeParams,
    pub axes: Vec<SweepAxis>,
    pub rows: Vec<SweepRow>,
}

fn cell(p: &TwoTypeParams) -> Result<(f64, Option<f64>, bool)> {
    p.validate()?;
    let s = spectrum(&build_generator(p)?);
    let sup = classify(p)? == Criticality::Supercritical;
    let r = if sup && s.slopes.is_some() {
        Some(limiting_ratio(p)?)
    } else {
        None
    };
    Ok((s.sigma_plus, r, sup))
}

/// Evaluates every grid cell; the first axis varies slowest.
pub fn sweep(base: &TwoTypeParams, axes: &[SweepAxis]) -> Result<SweepReport, CliError> {
    if axes.is_empty() || axes.len() > 2 {
        return Err(CliError::usage("sweep needs one or two axes"));
    }
    if axes.len() == 2 && axes[0].name == axes[1].name {
        return Err(CliError::usage("sweep axes must name different parameters"));
    }
    let grids: Vec<Vec<f64>> = axes.iter().map(SweepAxis::values).collect();
    let mut points: Vec<Vec<f64>> = grids[0].iter().map(|&v| vec![v]).collect();
    if let Some(second) = grids.get(1) {
        points = points
            .into_iter()
            .flat_map(|p| second.iter().map(move |&v| vec![p[0], v]))
            .collect();
    }
    let rows = points
        .into_iter()
        .map(|values| {
            let mut p = *base;
            for (axis, &v) in axes.iter().zip(&values) {
                *p.field_mut(&axis.name).expect("axis names are validated") = v;
            }
            let (sigma_plus, limiting_ratio, supercritical) = cell(&p)?;
            Ok(SweepRow {
                values,
                sigma_plus,
                limiting_ratio,
                supercritical,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport {
        base: *base,
        axes: axes.to_vec(),
        rows,
    })
}

fn csv(r: &SweepReport) -> Vec<u8> {
    let mut header: Vec<&str> = r.axes.iter().map(|a| a.name.as_str()).collect();
    header.extend(["sigma_plus", "R", "supercritical"]);
    let rows = r.rows.iter().map(|row| {
        let mut v: Vec<String> = row.values.iter().map(f64::to_string).collect();
        v.extend([
            row.sigma_plus.to_string(),
            opt_str(row.limiting_ratio),
            row.supercritical.to_string(),
        ]);
        v
    });
    csv_bytes(&header, rows)
}

pub(super) fn run(res: &Resolved) -> Result<(), CliError> {
    let specs = res.sweep_specs();
    if specs.is_empty() {
        return Err(CliError::usage("sweep needs at least one --sweep name:min:max:steps"));
    }
    let axes = specs
        .iter()
        .map(|s| SweepAxis::parse(s))
        .collect::<Result<Vec<_>, _>>()?;
    let report = sweep(&res.params()?, &axes)?;
    let bytes = match res.format()? {
        Format::Json => to_json(&report),
        Format::Csv => csv(&report),
    };
    res.emit(&bytes)
}
