use serde::{Deserialize, Serialize};

use super::{csv_bytes, opt_str, to_json, CliError, Format, Resolved};
use crate::error::{Error, Result};
use crate::model::{
    build_generator, classify, limiting_ratio, sensitivities, spectrum, Criticality, Generator, Sensitivities,
    TwoTypeParams,
};

pub const REGIME_REGULAR: &str = "regular";
/// `μ2 β2 λ = 0`: no flow from strain 2 into strain 1, so the eigenvector
/// slopes and `R` are undefined.
pub const REGIME_DEGENERATE: &str = "degenerate-mutation";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub params: TwoTypeParams,
    pub lethality_convention: bool,
    pub generator: Generator,
    pub sigma_plus: f64,
    pub sigma_minus: f64,
    pub gap: f64,
    pub criticality: Criticality,
    pub regime: String,
    pub u_plus: Option<f64>,
    pub u_minus: Option<f64>,
    pub left_eigenvector: [f64; 2],
    pub limiting_ratio: Option<f64>,
    pub sensitivities: Option<Sensitivities>,
}

pub fn analyze_report(params: &TwoTypeParams) -> Result<AnalyzeReport> {
    let generator = build_generator(params)?;
    let s = spectrum(&generator);
    let degenerate = s.slopes.is_none();
    let sens = match sensitivities(params) {
        Ok(v) => Some(v),
        Err(Error::DegenerateMutation | Error::SingularSensitivity) => None,
        Err(e) => return Err(e),
    };
    Ok(AnalyzeReport {
        params: *params,
        lethality_convention: params.follows_lethality_convention(),
        generator,
        sigma_plus: s.sigma_plus,
        sigma_minus: s.sigma_minus,
        gap: s.gap,
        criticality: classify(params)?,
        regime: if degenerate { REGIME_DEGENERATE } else { REGIME_REGULAR }.to_string(),
        u_plus: s.slopes.map(|e| e.u_plus),
        u_minus: s.slopes.map(|e| e.u_minus),
        left_eigenvector: s.left,
        limiting_ratio: if degenerate {
            None
        } else {
            Some(limiting_ratio(params)?)
        },
        sensitivities: sens,
    })
}

/// `key,value` rows; undefined quantities have an empty value.
fn csv(r: &AnalyzeReport) -> Vec<u8> {
    let p = &r.params;
    let g = &r.generator;
    let num = |x: f64| x.to_string();
    let rows: Vec<(&str, String)> = vec![
        ("alpha1", num(p.alpha1)),
        ("alpha2", num(p.alpha2)),
        ("beta1", num(p.beta1)),
        ("beta2", num(p.beta2)),
        ("mu1", num(p.mu1)),
        ("mu2", num(p.mu2)),
        ("lambda", num(p.lambda)),
        ("lethality_convention", r.lethality_convention.to_string()),
        ("gamma1", num(g.gamma1)),
        ("gamma2", num(g.gamma2)),
        ("delta1", num(g.delta1)),
        ("delta2", num(g.delta2)),
        ("sigma_plus", num(r.sigma_plus)),
        ("sigma_minus", num(r.sigma_minus)),
        ("gap", num(r.gap)),
        ("criticality", format!("{:?}", r.criticality)),
        ("regime", r.regime.clone()),
        ("u_plus", opt_str(r.u_plus)),
        ("u_minus", opt_str(r.u_minus)),
        ("left1", num(r.left_eigenvector[0])),
        ("left2", num(r.left_eigenvector[1])),
        ("limiting_ratio", opt_str(r.limiting_ratio)),
        ("dR_dlambda", opt_str(r.sensitivities.map(|s| s.d_lambda))),
        ("dR_dalpha1", opt_str(r.sensitivities.map(|s| s.d_alpha1))),
        ("dR_dalpha2", opt_str(r.sensitivities.map(|s| s.d_alpha2))),
    ];
    csv_bytes(&["key", "value"], rows.into_iter().map(|(k, v)| vec![k.to_string(), v]))
}

pub(super) fn run(res: &Resolved) -> Result<(), CliError> {
    let report = analyze_report(&res.params()?)?;
    if !report.lethality_convention {
        eprintln!("warning: alpha2 <= alpha1, strain 2 is not the more lethal strain");
    }
    if report.regime == REGIME_DEGENERATE {
        eprintln!("note: degenerate mutation regime (mu2 * beta2 * lambda = 0): R is undefined");
    }
    let bytes = match res.format()? {
        Format::Json => to_json(&report),
        Format::Csv => csv(&report),
    };
    res.emit(&bytes)
}
