//! Leakage channels: additive-Gaussian models with deterministic leak
//! functions, their order-infinity information computed by quadrature, the
//! near-uniform-posterior hypothesis check, and small discrete standards
//! (binary symmetric, complement, identity).
//!
//! Quadrature is a trapezoid rule over [min leak - a*sigma, max leak +
//! a*sigma]; beyond that range the envelope max_x phi(y - f(x)) coincides
//! with the tail of the extreme Gaussian, which is added in closed form.
//! With the default spec (a = 12, 20001 nodes) truncation is below 1e-30
//! of mass and discretization error is ~1e-7 relative.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::accum;
use crate::error::{Error, Result};
use crate::info::DiscreteChannel;
use crate::sampling;

/// Deterministic leak value per input plus additive Gaussian noise:
/// Y = leak[X] + sigma * N(0, 1).
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianLeakageModel {
    leak: Vec<f64>,
    sigma: f64,
}

impl GaussianLeakageModel {
    pub fn new(leak: Vec<f64>, sigma: f64) -> Result<Self> {
        if leak.is_empty() {
            return Err(Error::validation("leak table needs at least one input"));
        }
        if let Some(&bad) = leak.iter().find(|&&v| !v.is_finite()) {
            return Err(Error::validation(format!("leak value {bad} is not finite")));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::domain(format!("noise level {sigma} must be positive")));
        }
        Ok(Self { leak, sigma })
    }

    /// Hamming weight of the input index over `bits` bit positions.
    pub fn hamming_weight(bits: u32, sigma: f64) -> Result<Self> {
        if bits == 0 || bits > 16 {
            return Err(Error::capability(format!(
                "hamming-weight model supports 1..=16 bits, got {bits}"
            )));
        }
        let leak = (0..1usize << bits).map(|x| x.count_ones() as f64).collect();
        Self::new(leak, sigma)
    }

    /// Identity leak: the index itself.
    pub fn identity_leak(alphabet: usize, sigma: f64) -> Result<Self> {
        if alphabet == 0 {
            return Err(Error::validation("leak table needs at least one input"));
        }
        Self::new((0..alphabet).map(|x| x as f64).collect(), sigma)
    }

    pub fn alphabet(&self) -> usize {
        self.leak.len()
    }

    pub fn leak(&self) -> &[f64] {
        &self.leak
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Noise density at observation `y` for input `x`.
    pub fn density(&self, x: usize, y: f64) -> f64 {
        let z = (y - self.leak[x]) / self.sigma;
        (-0.5 * z * z).exp() / (self.sigma * (2.0 * std::f64::consts::PI).sqrt())
    }
}

/// Trapezoid quadrature parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    /// Half-width of the integration window beyond the leak range, in
    /// multiples of sigma.
    pub sigmas_beyond: f64,
    /// Node count, odd so the midpoint is a node.
    pub nodes: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            sigmas_beyond: 12.0,
            nodes: 20001,
        }
    }
}

impl QuadratureSpec {
    fn validate(&self) -> Result<()> {
        if self.nodes < 3 || self.nodes % 2 == 0 {
            return Err(Error::domain(format!(
                "quadrature needs an odd node count of at least 3, got {}",
                self.nodes
            )));
        }
        if !(self.sigmas_beyond > 0.0) || !self.sigmas_beyond.is_finite() {
            return Err(Error::domain(format!(
                "quadrature window {} must be positive",
                self.sigmas_beyond
            )));
        }
        Ok(())
    }
}

/// Integral of the envelope max_x phi_sigma(y - leak[x]) over the real
/// line: trapezoid over the finite window plus the two analytic tails.
fn envelope_integral(model: &GaussianLeakageModel, quad: &QuadratureSpec) -> f64 {
    let mut distinct: Vec<f64> = model.leak.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    distinct.dedup();
    let f_min = distinct[0];
    let f_max = *distinct.last().unwrap();
    let pad = quad.sigmas_beyond * model.sigma;
    let lo = f_min - pad;
    let hi = f_max + pad;
    let h = (hi - lo) / (quad.nodes - 1) as f64;
    let coeff = 1.0 / (model.sigma * (2.0 * std::f64::consts::PI).sqrt());
    let mut acc = accum::NeumaierSum::new();
    // Nodes are increasing, so the nearest leak value advances monotonically.
    let mut nearest = 0usize;
    for i in 0..quad.nodes {
        let y = lo + h * i as f64;
        while nearest + 1 < distinct.len()
            && (distinct[nearest + 1] - y).abs() <= (distinct[nearest] - y).abs()
        {
            nearest += 1;
        }
        let z = (y - distinct[nearest]) / model.sigma;
        let value = coeff * (-0.5 * z * z).exp();
        let weight = if i == 0 || i == quad.nodes - 1 { 0.5 } else { 1.0 };
        acc.add(weight * value);
    }
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let tail = unit.cdf(-quad.sigmas_beyond);
    h * acc.value() + 2.0 * tail
}

/// Max-information of the Gaussian model under the full input support:
/// log of the envelope integral. Bounded by log of the number of distinct
/// leak values.
pub fn gaussian_max_information(
    model: &GaussianLeakageModel,
    quad: &QuadratureSpec,
) -> Result<f64> {
    quad.validate()?;
    Ok(envelope_integral(model, quad).ln().max(0.0))
}

/// Conditional min-entropy of a uniform input given the observation:
/// -log( (1/M) * envelope integral ).
pub fn gaussian_conditional_min_entropy(
    model: &GaussianLeakageModel,
    quad: &QuadratureSpec,
) -> Result<f64> {
    quad.validate()?;
    let m = model.alphabet() as f64;
    Ok(m.ln() - envelope_integral(model, quad).ln().max(0.0))
}

/// Outcome of the near-uniform posterior check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HypothesisReport {
    /// Whether max_x p(x|y) <= 1/(M-1) for every observation.
    pub holds: bool,
    /// Observation attaining the worst posterior; +-infinity when a tail
    /// limit dominates.
    pub worst_y: f64,
    pub worst_posterior: f64,
    pub threshold: f64,
}

/// Checks that the uniform-prior posterior never concentrates beyond
/// 1/(M-1): evaluated on the quadrature grid, plus the two y -> +-infinity
/// limits where the posterior tends to 1/#(extreme leak class).
pub fn hypothesis_check(
    model: &GaussianLeakageModel,
    quad: &QuadratureSpec,
) -> Result<HypothesisReport> {
    quad.validate()?;
    let m = model.alphabet();
    if m < 2 {
        return Err(Error::domain(
            "posterior check needs an alphabet of at least 2".to_string(),
        ));
    }
    let threshold = 1.0 / (m - 1) as f64 + 1e-12;
    let f_min = model.leak.iter().cloned().fold(f64::INFINITY, f64::min);
    let f_max = model.leak.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pad = quad.sigmas_beyond * model.sigma;
    let lo = f_min - pad;
    let hi = f_max + pad;
    let h = (hi - lo) / (quad.nodes - 1) as f64;
    let mut worst_y = lo;
    let mut worst = 0.0f64;
    for i in 0..quad.nodes {
        let y = lo + h * i as f64;
        // Posterior max in the log domain; the uniform prior cancels.
        let e_max = model
            .leak
            .iter()
            .map(|&f| {
                let z = (y - f) / model.sigma;
                -0.5 * z * z
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = model
            .leak
            .iter()
            .map(|&f| {
                let z = (y - f) / model.sigma;
                (-0.5 * z * z - e_max).exp()
            })
            .sum();
        let posterior = 1.0 / total;
        if posterior > worst {
            worst = posterior;
            worst_y = y;
        }
    }
    // Beyond the window the posterior of the extreme class keeps growing;
    // its limit is one over the class size.
    let class_tol = 1e-12 * (1.0 + f_max.abs().max(f_min.abs()));
    let count_hi = model.leak.iter().filter(|&&f| f_max - f <= class_tol).count();
    let count_lo = model.leak.iter().filter(|&&f| f - f_min <= class_tol).count();
    if 1.0 / count_hi as f64 > worst {
        worst = 1.0 / count_hi as f64;
        worst_y = f64::INFINITY;
    }
    if 1.0 / count_lo as f64 > worst {
        worst = 1.0 / count_lo as f64;
        worst_y = f64::NEG_INFINITY;
    }
    Ok(HypothesisReport {
        holds: worst <= threshold,
        worst_y,
        worst_posterior: worst,
        threshold,
    })
}

/// Discrete analog of [`hypothesis_check`]: the worst uniform-prior
/// posterior over the channel's positive-probability outputs, reported
/// against the same 1/(M-1) threshold. `worst_y` is the output index.
pub fn discrete_hypothesis_check(channel: &DiscreteChannel) -> Result<HypothesisReport> {
    let m = channel.inputs();
    if m < 2 {
        return Err(Error::domain(
            "posterior check needs an alphabet of at least 2".to_string(),
        ));
    }
    let threshold = 1.0 / (m - 1) as f64 + 1e-12;
    let mut worst_y = 0usize;
    let mut worst = 0.0f64;
    for y in 0..channel.outputs() {
        let column: f64 = (0..m).map(|x| channel.prob(x, y)).sum();
        if column == 0.0 {
            continue;
        }
        let peak = (0..m).map(|x| channel.prob(x, y)).fold(0.0, f64::max);
        let posterior = peak / column;
        if posterior > worst {
            worst = posterior;
            worst_y = y;
        }
    }
    Ok(HypothesisReport {
        holds: worst <= threshold,
        worst_y: worst_y as f64,
        worst_posterior: worst,
        threshold,
    })
}

/// One observation from the model for input `x`, keyed by (seed, counter).
pub fn sample_trace(
    model: &GaussianLeakageModel,
    x: usize,
    seed: u64,
    counter: u64,
) -> Result<f64> {
    if x >= model.alphabet() {
        return Err(Error::domain(format!(
            "input {x} out of range for alphabet of size {}",
            model.alphabet()
        )));
    }
    Ok(model.leak[x] + model.sigma * sampling::standard_normal(seed, counter))
}

/// Channel that reveals "not x": uniform over the other M-1 symbols.
pub fn toy_complement_channel(m: usize) -> Result<DiscreteChannel> {
    if m < 2 {
        return Err(Error::domain(format!(
            "complement channel needs at least 2 symbols, got {m}"
        )));
    }
    let off = 1.0 / (m - 1) as f64;
    let rows = (0..m)
        .map(|x| {
            (0..m)
                .map(|y| if y == x { 0.0 } else { off })
                .collect::<Vec<_>>()
        })
        .collect();
    DiscreteChannel::new(rows)
}

/// Binary symmetric channel with flip probability `eps`.
pub fn bsc(eps: f64) -> Result<DiscreteChannel> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::domain(format!(
            "flip probability {eps} must lie in [0, 1]"
        )));
    }
    DiscreteChannel::new(vec![vec![1.0 - eps, eps], vec![eps, 1.0 - eps]])
}

/// Noiseless identity channel on `m` symbols.
pub fn identity_channel(m: usize) -> Result<DiscreteChannel> {
    if m == 0 {
        return Err(Error::domain("identity channel needs at least one symbol"));
    }
    let rows = (0..m)
        .map(|x| {
            (0..m)
                .map(|y| if y == x { 1.0 } else { 0.0 })
                .collect::<Vec<_>>()
        })
        .collect();
    DiscreteChannel::new(rows)
}
