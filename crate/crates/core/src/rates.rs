//! SINRs and achievable rates for one fading state.
//!
//! All gains are noise-normalized, so an SINR is a ratio of received powers
//! with unit noise.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::FadingState;
use crate::error::{invalid, Error, Result};
use crate::semantic::SemanticParams;

/// SIC decoding order at the legitimate receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DecodingOrder {
    /// Semantic stream decoded first, then the bit stream interference-free (`mu = 0`).
    SemanticFirst,
    /// Bit stream decoded first, then the semantic stream interference-free (`mu = 1`).
    BitFirst,
}

impl DecodingOrder {
    #[inline]
    pub fn flag(self) -> f64 {
        match self {
            DecodingOrder::SemanticFirst => 0.0,
            DecodingOrder::BitFirst => 1.0,
        }
    }

    pub fn as_u8(self) -> u8 {
        self.flag() as u8
    }

    pub fn from_flag(mu: u8) -> Result<Self> {
        match mu {
            0 => Ok(DecodingOrder::SemanticFirst),
            1 => Ok(DecodingOrder::BitFirst),
            _ => Err(invalid(format!("decoding-order flag must be 0 or 1, got {mu}"))),
        }
    }
}

/// Per-state transmit decision: total power, semantic share, decoding order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub p: f64,
    pub beta: f64,
    pub mu: DecodingOrder,
}

impl Allocation {
    pub const OFF: Allocation = Allocation { p: 0.0, beta: 0.0, mu: DecodingOrder::SemanticFirst };

    pub fn new(p: f64, beta: f64, mu: DecodingOrder) -> Self {
        Self { p, beta, mu }
    }

    pub fn validate(&self, peak: f64) -> Result<()> {
        if !(self.p >= 0.0 && self.p <= peak) {
            return Err(invalid(format!("power {} outside [0, {peak}]", self.p)));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(invalid(format!("power split {} outside [0, 1]", self.beta)));
        }
        Ok(())
    }

    /// Semantic-stream power `beta * p`.
    #[inline]
    pub fn semantic_power(&self) -> f64 {
        self.beta * self.p
    }

    /// Bit-stream power `(1 - beta) * p`.
    #[inline]
    pub fn bit_power(&self) -> f64 {
        (1.0 - self.beta) * self.p
    }
}

#[inline]
pub fn sinr_bit(a: &Allocation, g_l: f64) -> f64 {
    let rx = a.p * g_l;
    (1.0 - a.beta) * rx / (a.mu.flag() * a.beta * rx + 1.0)
}

#[inline]
pub fn sinr_sem(a: &Allocation, g_l: f64) -> f64 {
    let rx = a.p * g_l;
    a.beta * rx / ((1.0 - a.mu.flag()) * (1.0 - a.beta) * rx + 1.0)
}

/// Eavesdropper SINR; the semantic stream is pure interference to it.
#[inline]
pub fn sinr_eve(a: &Allocation, g_e: f64) -> f64 {
    let rx = a.p * g_e;
    (1.0 - a.beta) * rx / (a.beta * rx + 1.0)
}

/// Combined legitimate rate: bit rate plus equivalent bit rate of the semantic stream.
#[inline]
pub fn rate_rx(a: &Allocation, g_l: f64, sp: &SemanticParams) -> f64 {
    sinr_bit(a, g_l).ln_1p() / std::f64::consts::LN_2
        + sp.bits_per_similarity() * sp.similarity(sinr_sem(a, g_l))
}

#[inline]
pub fn rate_eve(a: &Allocation, g_e: f64) -> f64 {
    sinr_eve(a, g_e).ln_1p() / std::f64::consts::LN_2
}

/// `[R_L - R_E]^+` for one fading state.
#[inline]
pub fn secrecy_rate(a: &Allocation, s: &FadingState, sp: &SemanticParams) -> f64 {
    (rate_rx(a, s.g_l, sp) - rate_eve(a, s.g_e)).max(0.0)
}

/// Secrecy rate of plain bit transmission with power `p`.
#[inline]
pub fn bit_only_secrecy_rate(p: f64, s: &FadingState) -> f64 {
    ((p * s.g_l).ln_1p() - (p * s.g_e).ln_1p()).max(0.0) / std::f64::consts::LN_2
}

/// Secrecy rate of bit transmission plus non-information-bearing artificial
/// noise (share `beta` of the power), which the legitimate receiver cancels.
#[inline]
pub fn bit_an_secrecy_rate(p: f64, beta: f64, s: &FadingState) -> f64 {
    let data = (1.0 - beta) * p;
    let eve = data * s.g_e / (beta * p * s.g_e + 1.0);
    ((data * s.g_l).ln_1p() - eve.ln_1p()).max(0.0) / std::f64::consts::LN_2
}

/// Transmission schemes compared in the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    /// Superimposed semantic + bit streams, solved by the dual method.
    ScOptimal,
    /// Superimposed semantic + bit streams, solved by SCA.
    ScSca,
    BitOnly,
    BitAn,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] =
        [SchemeKind::ScOptimal, SchemeKind::ScSca, SchemeKind::BitAn, SchemeKind::BitOnly];

    pub fn tag(self) -> &'static str {
        match self {
            SchemeKind::ScOptimal => "sc_optimal",
            SchemeKind::ScSca => "sc_sca",
            SchemeKind::BitOnly => "bit_only",
            SchemeKind::BitAn => "bit_an",
        }
    }

    /// Whether the scheme carries a semantic stream (and so depends on `K`).
    pub fn is_semantic(self) -> bool {
        matches!(self, SchemeKind::ScOptimal | SchemeKind::ScSca)
    }

    /// Per-state secrecy rate this scheme achieves with allocation `a`.
    pub fn secrecy_rate(self, a: &Allocation, s: &FadingState, sp: &SemanticParams) -> f64 {
        match self {
            SchemeKind::ScOptimal | SchemeKind::ScSca => secrecy_rate(a, s, sp),
            SchemeKind::BitOnly => bit_only_secrecy_rate(a.p, s),
            SchemeKind::BitAn => bit_an_secrecy_rate(a.p, a.beta, s),
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| invalid(format!("unknown scheme `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const S0: DecodingOrder = DecodingOrder::SemanticFirst;
    const S1: DecodingOrder = DecodingOrder::BitFirst;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn sinr_examples() {
        let half0 = Allocation::new(1.0, 0.5, S0);
        let half1 = Allocation::new(1.0, 0.5, S1);
        assert!(close(sinr_bit(&half0, 10.0), 5.0, 1e-15));
        assert!(close(sinr_bit(&half1, 10.0), 5.0 / 6.0, 1e-15));
        assert!(close(sinr_bit(&Allocation::new(1.0, 0.0, S1), 10.0), 10.0, 1e-15));
        assert!(close(sinr_sem(&half0, 10.0), 5.0 / 6.0, 1e-15));
        assert!(close(sinr_sem(&half1, 10.0), 5.0, 1e-15));
        assert!(close(sinr_sem(&Allocation::new(1.0, 1.0, S0), 10.0), 10.0, 1e-15));
        assert!(close(sinr_eve(&half0, 10.0), 5.0 / 6.0, 1e-15));
        assert_eq!(sinr_eve(&Allocation::new(1.0, 1.0, S0), 10.0), 0.0);
        assert!(close(sinr_eve(&Allocation::new(1.0, 0.0, S0), 10.0), 10.0, 1e-15));
    }

    #[test]
    fn rate_examples() {
        let sp = SemanticParams::default();
        assert!(close(rate_rx(&Allocation::OFF, 10.0, &sp), 2.96, 1e-12));
        let bits = Allocation::new(1.0, 0.0, S0);
        assert!(close(rate_rx(&bits, 10.0, &sp), 6.419432, 5e-7));
        let sem = Allocation::new(1.0, 1.0, S0);
        assert!((rate_rx(&sem, 1e9, &sp) - 7.84).abs() < 1e-6);
        assert_eq!(rate_eve(&sem, 10.0), 0.0);
        assert!(close(rate_eve(&bits, 10.0), 3.459432, 5e-7));
        assert!(close(rate_eve(&Allocation::new(1.0, 0.5, S0), 10.0), 0.874469, 5e-7));
    }

    #[test]
    fn secrecy_examples() {
        let sp = SemanticParams::default();
        let s = FadingState { g_l: 10.0, g_e: 10.0 };
        assert!(close(secrecy_rate(&Allocation::OFF, &s, &sp), 2.96, 1e-12));
        // Independent evaluation of the composed formula.
        let a = Allocation::new(1.0, 0.5, S0);
        let g_sem: f64 = 5.0 / 6.0;
        let eps = 0.37 + 0.61 / (1.0 + (-(0.2525 * 10.0 * g_sem.log10() - 0.7895)).exp());
        let expected = (6f64.log2() + 8.0 * eps - (1.0 + 5.0 / 6.0f64).log2()).max(0.0);
        assert!(close(secrecy_rate(&a, &s, &sp), expected, 1e-12));
    }

    #[test]
    fn baseline_examples() {
        let s = FadingState { g_l: 10.0, g_e: 1.0 };
        assert!(close(bit_only_secrecy_rate(1.0, &s), 2.459432, 5e-7));
        assert_eq!(bit_only_secrecy_rate(0.0, &s), 0.0);
        assert_eq!(bit_only_secrecy_rate(3.0, &FadingState { g_l: 1.0, g_e: 2.0 }), 0.0);
        let eq = FadingState { g_l: 10.0, g_e: 10.0 };
        assert!(close(bit_an_secrecy_rate(1.0, 0.5, &eq), 1.710493, 5e-7));
        assert_eq!(bit_an_secrecy_rate(1.0, 1.0, &eq), 0.0);
    }

    #[test]
    fn scheme_tags_roundtrip() {
        for k in SchemeKind::ALL {
            assert_eq!(k.tag().parse::<SchemeKind>().unwrap(), k);
        }
        let err = "bit_magic".parse::<SchemeKind>().unwrap_err();
        assert!(err.to_string().contains("bit_magic"));
    }

    #[test]
    fn decoding_flag() {
        assert_eq!(DecodingOrder::from_flag(1).unwrap(), S1);
        assert_eq!(S0.as_u8(), 0);
        assert!(DecodingOrder::from_flag(2).is_err());
    }

    fn alloc() -> impl Strategy<Value = Allocation> {
        (0.0f64..10.0, 0.0f64..=1.0, any::<bool>()).prop_map(|(p, b, m)| {
            Allocation::new(p, b, if m { S1 } else { S0 })
        })
    }

    proptest! {
        #[test]
        fn eve_ignores_decoding_order(a in alloc(), g in 0.0f64..1e4) {
            let flipped = Allocation { mu: if a.mu == S0 { S1 } else { S0 }, ..a };
            prop_assert_eq!(sinr_eve(&a, g), sinr_eve(&flipped, g));
        }

        #[test]
        fn rates_non_negative(a in alloc(), gl in 0.0f64..1e4, ge in 0.0f64..1e4) {
            let sp = SemanticParams::default();
            let s = FadingState { g_l: gl, g_e: ge };
            prop_assert!(rate_rx(&a, gl, &sp) >= 0.0);
            prop_assert!(rate_eve(&a, ge) >= 0.0);
            prop_assert!(secrecy_rate(&a, &s, &sp) >= 0.0);
        }

        #[test]
        fn single_stream_order_irrelevant(p in 0.0f64..10.0, gl in 0.0f64..1e4, full in any::<bool>()) {
            let sp = SemanticParams::default();
            let beta = if full { 1.0 } else { 0.0 };
            let r0 = rate_rx(&Allocation::new(p, beta, S0), gl, &sp);
            let r1 = rate_rx(&Allocation::new(p, beta, S1), gl, &sp);
            prop_assert!((r0 - r1).abs() <= 1e-12 * r0.max(1.0));
        }

        #[test]
        fn bit_an_without_noise_is_bit_only(p in 0.0f64..10.0, gl in 0.0f64..1e4, ge in 0.0f64..1e4) {
            let s = FadingState { g_l: gl, g_e: ge };
            prop_assert_eq!(bit_an_secrecy_rate(p, 0.0, &s), bit_only_secrecy_rate(p, &s));
        }

        #[test]
        fn eve_rate_non_increasing_in_beta(p in 0.0f64..10.0, b1 in 0.0f64..=1.0, b2 in 0.0f64..=1.0, ge in 0.0f64..1e4) {
            let (lo, hi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
            let r_lo = rate_eve(&Allocation::new(p, lo, S0), ge);
            let r_hi = rate_eve(&Allocation::new(p, hi, S0), ge);
            prop_assert!(r_hi <= r_lo + 1e-12);
        }
    }
}
