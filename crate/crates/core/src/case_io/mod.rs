//! MATPOWER case ingestion.
//!
//! All quantities are stored per unit on `base_mva`: powers are divided by the
//! base, angles are in radians, and cost functions are rescaled so that they
//! take per-unit active power as argument.

mod parse;
mod perturb;
mod write;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use parse::parse_case;
pub use perturb::perturb_loads;
pub use write::write_case;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CaseError {
    #[error("{0} matrix absent")]
    MissingMatrix(&'static str),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("{context} references unknown bus {bus}")]
    UnknownBus { context: String, bus: u32 },
    #[error("invalid case: {0}")]
    Validation(String),
}

/// External bus number as it appears in the case file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BusId(pub u32);

impl fmt::Display for BusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseData {
    pub name: String,
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub generators: Vec<Generator>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: BusId,
    /// MATPOWER bus type (1 PQ, 2 PV, 3 reference, 4 isolated).
    pub kind: u8,
    pub p_load: f64,
    pub q_load: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub shunt_g: f64,
    pub shunt_b: f64,
}

impl Bus {
    pub fn in_service(&self) -> bool {
        self.kind != 4
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub from_bus: BusId,
    pub to_bus: BusId,
    pub r: f64,
    pub x: f64,
    pub b_charge: f64,
    /// Off-nominal turns ratio; 1 when the file holds 0.
    pub tap: f64,
    /// Phase shift in radians.
    pub shift: f64,
    /// Per-unit thermal limit; `None` when the file holds 0.
    pub rate_a: Option<f64>,
    pub in_service: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub bus: BusId,
    pub p_min: f64,
    pub p_max: f64,
    pub q_min: f64,
    pub q_max: f64,
    pub cost: CostFunction,
    pub in_service: bool,
}

/// Convex generation cost as a function of per-unit active power.
#[derive(Debug, Clone, PartialEq)]
pub enum CostFunction {
    /// `c0 + c1 p + c2 p^2`, ascending coefficient order.
    Polynomial([f64; 3]),
    /// Breakpoints `(p, cost)` with strictly increasing `p`.
    PiecewiseLinear(Vec<(f64, f64)>),
}

impl CostFunction {
    pub fn value(&self, p: f64) -> f64 {
        match self {
            CostFunction::Polynomial([c0, c1, c2]) => c0 + p * (c1 + p * c2),
            CostFunction::PiecewiseLinear(points) => {
                // convex: the max over the extended segments
                segments(points)
                    .map(|(slope, icpt)| slope * p + icpt)
                    .fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    pub fn derivative(&self, p: f64) -> f64 {
        match self {
            CostFunction::Polynomial([_, c1, c2]) => c1 + 2.0 * c2 * p,
            CostFunction::PiecewiseLinear(points) => {
                let mut best = (f64::NEG_INFINITY, 0.0);
                for (slope, icpt) in segments(points) {
                    let v = slope * p + icpt;
                    if v > best.0 {
                        best = (v, slope);
                    }
                }
                best.1
            }
        }
    }

    /// Strictly convex costs need dynamically generated tangents.
    pub fn is_curved(&self) -> bool {
        matches!(self, CostFunction::Polynomial([_, _, c2]) if *c2 > 0.0)
    }

    /// `(slope, intercept)` of each linear piece.
    pub fn segments(&self) -> Vec<(f64, f64)> {
        match self {
            CostFunction::Polynomial([c0, c1, _]) => vec![(*c1, *c0)],
            CostFunction::PiecewiseLinear(points) => segments(points).collect(),
        }
    }
}

fn segments(points: &[(f64, f64)]) -> impl Iterator<Item = (f64, f64)> + '_ {
    points.windows(2).map(|w| {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        let slope = (y1 - y0) / (x1 - x0);
        (slope, y0 - slope * x0)
    })
}

impl CaseData {
    pub fn bus(&self, id: BusId) -> Option<&Bus> {
        self.buses.iter().find(|b| b.id == id)
    }

    pub fn active_branches(&self) -> impl Iterator<Item = (usize, &Branch)> {
        self.branches.iter().enumerate().filter(|(_, b)| b.in_service)
    }

    pub fn active_generators(&self) -> impl Iterator<Item = (usize, &Generator)> {
        self.generators.iter().enumerate().filter(|(_, g)| g.in_service)
    }

    /// Checks the structural invariants of a parsed case.
    pub fn validate(&self) -> Result<(), CaseError> {
        if !(self.base_mva > 0.0) {
            return Err(CaseError::Validation(format!("baseMVA must be positive, got {}", self.base_mva)));
        }
        let mut ids: Vec<BusId> = self.buses.iter().map(|b| b.id).collect();
        ids.sort();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(CaseError::Validation(format!("duplicate bus id {}", w[0])));
        }
        let known = |id: BusId| ids.binary_search(&id).is_ok();
        for bus in &self.buses {
            if !(bus.v_min >= 0.0 && bus.v_min <= bus.v_max) {
                return Err(CaseError::Validation(format!(
                    "bus {}: voltage limits [{}, {}] invalid",
                    bus.id, bus.v_min, bus.v_max
                )));
            }
        }
        for (i, br) in self.branches.iter().enumerate() {
            for end in [br.from_bus, br.to_bus] {
                if !known(end) {
                    return Err(CaseError::UnknownBus { context: format!("branch {}", i + 1), bus: end.0 });
                }
            }
            if !(br.tap > 0.0) {
                return Err(CaseError::Validation(format!("branch {}: tap ratio must be positive", i + 1)));
            }
            if br.in_service && br.r * br.r + br.x * br.x <= 0.0 {
                return Err(CaseError::Validation(format!("branch {}: zero impedance", i + 1)));
            }
            if br.in_service && br.from_bus == br.to_bus {
                return Err(CaseError::Validation(format!("branch {}: self loop at bus {}", i + 1, br.from_bus)));
            }
        }
        for (i, g) in self.generators.iter().enumerate() {
            if !known(g.bus) {
                return Err(CaseError::UnknownBus { context: format!("generator {}", i + 1), bus: g.bus.0 });
            }
            if g.p_min > g.p_max || g.q_min > g.q_max {
                return Err(CaseError::Validation(format!("generator {}: inverted limits", i + 1)));
            }
            validate_cost(&g.cost).map_err(|m| CaseError::Validation(format!("generator {}: {m}", i + 1)))?;
        }
        Ok(())
    }
}

fn validate_cost(cost: &CostFunction) -> Result<(), String> {
    match cost {
        CostFunction::Polynomial(c) => {
            if c.iter().any(|v| !v.is_finite()) {
                return Err("non-finite cost coefficient".into());
            }
            if c[2] < 0.0 {
                return Err("quadratic cost coefficient is negative (nonconvex)".into());
            }
        }
        CostFunction::PiecewiseLinear(points) => {
            if points.len() < 2 {
                return Err("piecewise-linear cost needs at least two breakpoints".into());
            }
            if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                return Err("piecewise-linear breakpoints must be strictly increasing".into());
            }
            let slopes: Vec<f64> = segments(points).map(|(s, _)| s).collect();
            if slopes.windows(2).any(|w| w[1] < w[0] - 1e-12 * w[0].abs().max(1.0)) {
                return Err("piecewise-linear cost is nonconvex".into());
            }
        }
    }
    Ok(())
}
