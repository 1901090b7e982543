//! Figures of merit for plain and preamplified multiplication of block
//! encodings. Logarithms are natural.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreampParams {
    /// Subnormalisation of `U_A`.
    pub alpha: f64,
    /// Subnormalisation of `U_P`.
    pub beta: f64,
    /// Amplification applied to `U_A`.
    pub gamma1: f64,
    /// Amplification applied to `U_P`.
    pub gamma2: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub gates_a: f64,
    pub gates_p: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FigureOfMerit {
    pub fom_plain: f64,
    pub fom_preamp: f64,
    pub advantageous: bool,
}

/// Plain product: `alpha beta (g_A + g_P)`. Preamplified product:
/// `alpha beta [ (3/delta) ln(g1/eps) g_A / g2 + (3/delta) ln(g2/eps) g_P / g1 ]`.
/// Preamplification is advantageous iff `g1 > (3/delta) ln(g2/eps)` and
/// `g2 > (3/delta) ln(g1/eps)`.
pub fn preamp_figure_of_merit(p: &PreampParams) -> Result<FigureOfMerit> {
    let bad = |what: &str| Err(Error::InvalidArgument(format!("{what}: {p:?}")));
    if !(1.0 <= p.gamma1 && p.gamma1 < p.alpha) {
        return bad("need 1 <= gamma1 < alpha");
    }
    if !(1.0 <= p.gamma2 && p.gamma2 < p.beta) {
        return bad("need 1 <= gamma2 < beta");
    }
    if !(p.delta > 0.0 && p.delta < 1.0) || !(p.epsilon > 0.0 && p.epsilon < 1.0) {
        return bad("need 0 < delta, epsilon < 1");
    }
    if !(p.gates_a >= 0.0 && p.gates_p >= 0.0) {
        return bad("gate counts must be non-negative");
    }
    let ab = p.alpha * p.beta;
    let c = 3.0 / p.delta;
    let fom_plain = ab * (p.gates_a + p.gates_p);
    let fom_preamp = ab
        * (c * (p.gamma1 / p.epsilon).ln() * p.gates_a / p.gamma2
            + c * (p.gamma2 / p.epsilon).ln() * p.gates_p / p.gamma1);
    let advantageous =
        p.gamma1 > c * (p.gamma2 / p.epsilon).ln() && p.gamma2 > c * (p.gamma1 / p.epsilon).ln();
    Ok(FigureOfMerit {
        fom_plain,
        fom_preamp,
        advantageous,
    })
}
