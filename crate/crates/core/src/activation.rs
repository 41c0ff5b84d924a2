//! CPPN activation functions.
//!
//! All four functions map into [-1, 1] so that downstream link-expression
//! thresholds behave uniformly regardless of which function a node carries.

use crate::error::Error;
use std::fmt;
use std::str::FromStr;

/// Activation function tag for hidden and output CPPN nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    /// Steepened bipolar sigmoid: `2 / (1 + e^(-4.9x)) - 1`, range (-1, 1).
    Sigmoid,
    /// Bipolar Gaussian: `2 e^(-x^2) - 1`, range (-1, 1].
    Gaussian,
    /// Clamped bipolar absolute value: `2 min(|x|, 1) - 1`, range [-1, 1].
    Abs,
    /// `sin(x)`, range [-1, 1].
    Sine,
}

impl Activation {
    /// The full function set genomes draw from.
    pub const ALL: [Activation; 4] = [
        Activation::Sigmoid,
        Activation::Gaussian,
        Activation::Abs,
        Activation::Sine,
    ];

    /// Apply the function to a raw summed input.
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Sigmoid => 2.0 / (1.0 + (-4.9 * x).exp()) - 1.0,
            Activation::Gaussian => 2.0 * (-(x * x)).exp() - 1.0,
            Activation::Abs => 2.0 * x.abs().min(1.0) - 1.0,
            Activation::Sine => x.sin(),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Activation::Sigmoid => "sigmoid",
            Activation::Gaussian => "gaussian",
            Activation::Abs => "abs",
            Activation::Sine => "sine",
        };
        f.write_str(s)
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "sigmoid" => Ok(Activation::Sigmoid),
            "gaussian" => Ok(Activation::Gaussian),
            "abs" => Ok(Activation::Abs),
            "sine" => Ok(Activation::Sine),
            other => Err(Error::config(format!("unknown activation `{other}`"))),
        }
    }
}

/// Activation used by substrate (brain) neurons: the same steepened bipolar
/// sigmoid, so brain outputs stay in (-1, 1).
#[inline]
pub fn substrate_sigmoid(x: f64) -> f64 {
    2.0 / (1.0 + (-4.9 * x).exp()) - 1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn values_at_zero() {
        assert_eq!(Activation::Sigmoid.apply(0.0), 0.0);
        assert_eq!(Activation::Gaussian.apply(0.0), 1.0);
        assert_eq!(Activation::Abs.apply(0.0), -1.0);
        assert_eq!(Activation::Sine.apply(0.0), 0.0);
    }

    #[test]
    fn all_outputs_within_unit_band() {
        let mut x = -20.0;
        while x <= 20.0 {
            for act in Activation::ALL {
                let y = act.apply(x);
                assert!((-1.0..=1.0).contains(&y), "{act}({x}) = {y}");
            }
            x += 0.0625;
        }
    }

    #[test]
    fn sigmoid_is_steepened() {
        // At x = 1 the steepened form is already close to saturation.
        assert_relative_eq!(
            Activation::Sigmoid.apply(1.0),
            2.0 / (1.0 + (-4.9f64).exp()) - 1.0
        );
        assert!(Activation::Sigmoid.apply(1.0) > 0.98);
    }

    #[test]
    fn parse_round_trip() {
        for act in Activation::ALL {
            assert_eq!(act.to_string().parse::<Activation>().unwrap(), act);
        }
        assert!("relu".parse::<Activation>().is_err());
    }
}
