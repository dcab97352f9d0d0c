//! Information-theoretic bounds on key-recovery success against masked
//! implementations.
//!
//! The crate works over finite Abelian groups: a secret is split into d+1
//! additive shares, each share leaks through its own noisy channel, and the
//! quantities of interest are min-entropy style measures (Renyi, Arimoto,
//! Sibson at order infinity) together with Mrs. Gerber style bounds that
//! turn per-share leakage into a bound on the success probability of the
//! best possible attack.
//!
//! Entropy values are in nats everywhere inside the crate; conversions to
//! bits happen at presentation boundaries only. Success probabilities are
//! plain probabilities in [0, 1].
//!
//! The `parallel` feature (on by default) runs Monte-Carlo trials and other
//! embarrassingly parallel loops on rayon. Results are bit-identical with
//! the feature disabled: all randomness is counter-keyed and reductions are
//! either exact integer counts or fixed-order compensated sums.

pub mod bounds;
pub mod channels;
pub mod error;
pub mod group;
pub mod info;
pub mod oracle;
pub mod pmf;
pub mod sampling;

mod accum;

pub use error::{Error, Result};

/// Fixed-point decimal with the requested number of significant digits,
/// switching to exponent notation outside [1e-4, 1e15). CSV emitters use 12
/// digits so report files stay stable and diffable.
pub fn format_significant(value: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if value == 0.0 {
        return "0".to_string();
    }
    if !value.is_finite() {
        return if value.is_nan() {
            "nan".to_string()
        } else if value > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let magnitude = value.abs().log10().floor() as i32;
    if !(-4..15).contains(&magnitude) {
        return format!("{:.*e}", digits - 1, value);
    }
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    format!("{value:.decimals$}")
}

#[cfg(test)]
mod format_tests {
    use super::format_significant;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_significant(0.68, 12), "0.680000000000");
        assert_eq!(format_significant(0.500235092492288, 12), "0.500235092492");
        assert_eq!(format_significant(3.250961573533219, 12), "3.25096157353");
        assert_eq!(format_significant(176.75253104278605, 12), "176.752531043");
        assert_eq!(format_significant(0.0, 12), "0");
        assert_eq!(format_significant(1.0, 12), "1.00000000000");
        assert_eq!(format_significant(-0.25, 12), "-0.250000000000");
        assert_eq!(format_significant(3.2e-7, 12), "3.20000000000e-7");
        assert_eq!(format_significant(f64::INFINITY, 12), "inf");
    }
}

