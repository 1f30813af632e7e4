//! Semantic similarity as a generalized logistic function of the SINR (in dB),
//! and the semantic / equivalent-bit rates derived from it.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Logistic-fit constants for one semantic encoder, plus the word/symbol
/// bookkeeping that converts similarity into rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SemanticParams {
    /// Semantic symbols per word.
    pub k: u32,
    /// Bits per word for the equivalent bit-oriented encoding.
    pub rho: f64,
    /// Lower asymptote of the similarity curve.
    pub a1: f64,
    /// Upper asymptote of the similarity curve.
    pub a2: f64,
    /// Growth rate per dB.
    pub c1: f64,
    /// Midpoint offset.
    pub c2: f64,
    /// Semantic units per sentence. Only affects [`semantic_rate_suts`].
    pub i_suts: f64,
    /// Words per sentence. Only affects [`semantic_rate_suts`].
    pub l_words: f64,
}

impl Default for SemanticParams {
    fn default() -> Self {
        Self {
            k: 5,
            rho: 40.0,
            a1: 0.37,
            a2: 0.98,
            c1: 0.2525,
            c2: -0.7895,
            i_suts: 20.0,
            l_words: 10.0,
        }
    }
}

impl SemanticParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.a1 > 0.0
            && self.a1 < self.a2
            && self.a2 <= 1.0
            && self.c1 > 0.0
            && self.c2.is_finite()
            && self.k >= 1
            && self.rho > 0.0
            && self.rho.is_finite()
            && self.i_suts > 0.0
            && self.l_words > 0.0;
        if ok {
            Ok(())
        } else {
            Err(invalid(format!(
                "semantic parameters violate 0 < a1 < a2 <= 1, c1 > 0, k >= 1, rho > 0, i_suts > 0, l_words > 0: {self:?}"
            )))
        }
    }

    /// Same similarity curve with a different symbols-per-word count.
    pub fn with_k(&self, k: u32) -> Self {
        Self { k, ..self.clone() }
    }

    /// Equivalent bits per unit similarity, `rho / K`.
    #[inline]
    pub fn bits_per_similarity(&self) -> f64 {
        self.rho / self.k as f64
    }

    /// Logistic argument `c1 * 10 lg(gamma) + c2`.
    #[inline]
    pub fn logit(&self, gamma: f64) -> f64 {
        self.c1 * 10.0 * gamma.log10() + self.c2
    }

    /// `epsilon(gamma) - a1`, computed without cancellation.
    ///
    /// Zero at `gamma = 0` (the continuous extension of the logistic curve).
    #[inline]
    pub fn similarity_excess(&self, gamma: f64) -> f64 {
        debug_assert!(gamma >= 0.0);
        if gamma <= 0.0 {
            return 0.0;
        }
        (self.a2 - self.a1) * logistic(self.logit(gamma))
    }

    /// Similarity `epsilon(gamma)` for `gamma >= 0`; see [`semantic_similarity`]
    /// for the checked variant.
    #[inline]
    pub fn similarity(&self, gamma: f64) -> f64 {
        self.a1 + self.similarity_excess(gamma)
    }

    /// Analytic `d epsilon / d gamma` for `gamma > 0`.
    pub fn similarity_derivative(&self, gamma: f64) -> f64 {
        if gamma <= 0.0 {
            return 0.0;
        }
        let s = logistic(self.logit(gamma));
        (self.a2 - self.a1) * s * (1.0 - s) * self.c1 * 10.0 / (gamma * std::f64::consts::LN_10)
    }

    /// The SINR at which the similarity reaches `target`, for `a1 < target < a2`.
    pub fn sinr_for_similarity(&self, target: f64) -> Result<f64> {
        if !(target > self.a1 && target < self.a2) {
            return Err(invalid(format!(
                "target similarity {target} outside ({}, {})",
                self.a1, self.a2
            )));
        }
        let u = (target - self.a1) / (self.a2 - self.a1);
        let z = (u / (1.0 - u)).ln();
        Ok(10f64.powf((z - self.c2) / (10.0 * self.c1)))
    }
}

#[inline]
pub(crate) fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn check_sinr(gamma: f64) -> Result<()> {
    if gamma >= 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("SINR must be non-negative, got {gamma}")))
    }
}

/// Semantic similarity in `[a1, a2)` at linear SINR `gamma`.
pub fn semantic_similarity(gamma: f64, params: &SemanticParams) -> Result<f64> {
    check_sinr(gamma)?;
    Ok(params.similarity(gamma))
}

/// Semantic rate in suts/s/Hz: `I / (K L) * epsilon(gamma)`.
pub fn semantic_rate_suts(gamma: f64, params: &SemanticParams) -> Result<f64> {
    let eps = semantic_similarity(gamma, params)?;
    Ok(params.i_suts / (params.k as f64 * params.l_words) * eps)
}

/// Equivalent bit rate in bit/s/Hz: `rho / K * epsilon(gamma)`.
pub fn equivalent_bit_rate(gamma: f64, params: &SemanticParams) -> Result<f64> {
    let eps = semantic_similarity(gamma, params)?;
    Ok(params.bits_per_similarity() * eps)
}
