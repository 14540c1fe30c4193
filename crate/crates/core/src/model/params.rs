use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pathogen strain carried by an infected host.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strain {
    One,
    Two,
}

impl Strain {
    pub const BOTH: [Strain; 2] = [Strain::One, Strain::Two];

    pub fn index(self) -> usize {
        match self {
            Strain::One => 0,
            Strain::Two => 1,
        }
    }

    pub fn other(self) -> Strain {
        match self {
            Strain::One => Strain::Two,
            Strain::Two => Strain::One,
        }
    }
}

/// The seven rates and probabilities of the two-strain model.
///
/// Rates are per unit (dimensionless) time. By convention strain 2 is the
/// more lethal one (`alpha2 > alpha1`); nothing here requires it, but
/// [`TwoTypeParams::follows_lethality_convention`] reports it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoTypeParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub lambda: f64,
}

impl TwoTypeParams {
    /// Reference parameter set
    /// (`alpha = (0.5, 1.5)`, `beta = (0.3, 0.6)`, `mu = (0.2, 0.2)`).
    pub const fn reference(lambda: f64) -> Self {
        Self {
            alpha1: 0.5,
            alpha2: 1.5,
            beta1: 0.3,
            beta2: 0.6,
            mu1: 0.2,
            mu2: 0.2,
            lambda,
        }
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }

    /// Checks every field against its domain.
    pub fn validate(&self) -> Result<()> {
        positive("alpha1", self.alpha1)?;
        positive("alpha2", self.alpha2)?;
        probability("beta1", self.beta1)?;
        probability("beta2", self.beta2)?;
        probability("mu1", self.mu1)?;
        probability("mu2", self.mu2)?;
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "lambda",
                value: self.lambda,
                constraint: "must be finite and >= 0",
            });
        }
        Ok(())
    }

    pub fn validated(self) -> Result<Self> {
        self.validate().map(|_| self)
    }

    pub fn follows_lethality_convention(&self) -> bool {
        self.alpha2 > self.alpha1
    }

    pub fn alpha(&self, s: Strain) -> f64 {
        match s {
            Strain::One => self.alpha1,
            Strain::Two => self.alpha2,
        }
    }

    pub fn beta(&self, s: Strain) -> f64 {
        match s {
            Strain::One => self.beta1,
            Strain::Two => self.beta2,
        }
    }

    pub fn mu(&self, s: Strain) -> f64 {
        match s {
            Strain::One => self.mu1,
            Strain::Two => self.mu2,
        }
    }

    /// Mutable access by name, used by parameter sweeps.
    pub fn field_mut(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "alpha1" => &mut self.alpha1,
            "alpha2" => &mut self.alpha2,
            "beta1" => &mut self.beta1,
            "beta2" => &mut self.beta2,
            "mu1" => &mut self.mu1,
            "mu2" => &mut self.mu2,
            "lambda" => &mut self.lambda,
            _ => return None,
        })
    }

    pub const FIELD_NAMES: [&'static str; 7] = ["alpha1", "alpha2", "beta1", "beta2", "mu1", "mu2", "lambda"];
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            constraint: "must be finite and > 0",
        })
    }
}

pub(crate) fn probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            constraint: "must lie in [0, 1]",
        })
    }
}

/// Offspring vectors `(j1, j2)` in table order.
pub const OUTCOMES: [(u32, u32); 6] = [(0, 0), (1, 0), (2, 0), (1, 1), (0, 2), (0, 1)];

/// Offspring distribution of the particle picture: a strain-`i` particle
/// lives `Exp(alpha_i + lambda)` and is replaced by one of [`OUTCOMES`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffspringTable {
    /// `rows[i][k]` is the probability that a strain-`i` particle leaves
    /// `OUTCOMES[k]`.
    pub rows: [[f64; 6]; 2],
    pub lifetime_rate: [f64; 2],
}

impl OffspringTable {
    pub fn prob(&self, parent: Strain, outcome: (u32, u32)) -> f64 {
        OUTCOMES
            .iter()
            .position(|&o| o == outcome)
            .map_or(0.0, |k| self.rows[parent.index()][k])
    }

    pub fn row_sum(&self, parent: Strain) -> f64 {
        self.rows[parent.index()].iter().sum()
    }

    /// Mean number of strain-`j` children of a strain-`i` particle.
    pub fn mean_offspring(&self, parent: Strain, child: Strain) -> f64 {
        OUTCOMES
            .iter()
            .zip(self.rows[parent.index()])
            .map(|(&(j1, j2), p)| p * f64::from(if child == Strain::One { j1 } else { j2 }))
            .sum()
    }
}

pub fn build_offspring_table(params: &TwoTypeParams) -> Result<OffspringTable> {
    params.validate()?;
    let row = |s: Strain| -> [f64; 6] {
        let (a, b, m, l) = (params.alpha(s), params.beta(s), params.mu(s), params.lambda);
        let life = a + l;
        let death = a / life;
        let idle = (1.0 - b) * l / life;
        let same = (1.0 - m) * b * l / life;
        let cross = m * b * l / life;
        match s {
            // (0,0) (1,0) (2,0) (1,1) (0,2) (0,1)
            Strain::One => [death, idle, same, cross, 0.0, 0.0],
            Strain::Two => [death, 0.0, 0.0, cross, same, idle],
        }
    };
    Ok(OffspringTable {
        rows: [row(Strain::One), row(Strain::Two)],
        lifetime_rate: [params.alpha1 + params.lambda, params.alpha2 + params.lambda],
    })
}
