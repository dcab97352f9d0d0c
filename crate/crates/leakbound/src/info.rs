//! Information measures on finite channels: Arimoto conditional entropy,
//! Sibson information, their order-infinity limits, the binary divergence
//! machinery that inverts into a success-probability ceiling, and product
//! channel construction.
//!
//! Everything is in nats. Order parameters accept any alpha in (0,1) or
//! (1,inf]; `f64::INFINITY` selects the max-information limits. Large
//! finite orders are evaluated in the log domain, so alpha = 1e4 neither
//! overflows nor collapses to zero.

use crate::accum;
use crate::error::{Error, Result};
use crate::pmf::Pmf;

/// Entry-count ceiling for materialized product channels.
pub const MAX_PRODUCT_ENTRIES: usize = 4_000_000;

/// Row-stochastic transition matrix p(y|x), rows indexed by input.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteChannel {
    rows: Vec<Vec<f64>>,
}

impl DiscreteChannel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::validation("channel needs at least one input and output"));
        }
        let width = rows[0].len();
        for (x, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::validation(format!(
                    "row {x} has {} entries, expected {width}",
                    row.len()
                )));
            }
            if let Some(&bad) = row.iter().find(|&&p| !(p >= 0.0) || !p.is_finite()) {
                return Err(Error::validation(format!(
                    "row {x} contains invalid probability {bad}"
                )));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > crate::pmf::MASS_TOLERANCE {
                return Err(Error::validation(format!(
                    "row {x} sums to {total}, expected 1"
                )));
            }
        }
        Ok(Self { rows })
    }

    pub fn inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn outputs(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.rows[x]
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.rows[x][y]
    }
}

/// A prior together with a channel from the same alphabet.
#[derive(Clone, Debug)]
pub struct JointFinite {
    prior: Pmf,
    channel: DiscreteChannel,
}

impl JointFinite {
    pub fn new(prior: Pmf, channel: DiscreteChannel) -> Result<Self> {
        if prior.len() != channel.inputs() {
            return Err(Error::validation(format!(
                "prior over {} symbols does not match channel with {} inputs",
                prior.len(),
                channel.inputs()
            )));
        }
        Ok(Self { prior, channel })
    }

    pub fn prior(&self) -> &Pmf {
        &self.prior
    }

    pub fn channel(&self) -> &DiscreteChannel {
        &self.channel
    }

    pub fn joint(&self, x: usize, y: usize) -> f64 {
        self.prior.mass(x) * self.channel.prob(x, y)
    }

    pub fn output_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.channel.outputs()];
        for x in 0..self.prior.len() {
            let px = self.prior.mass(x);
            if px == 0.0 {
                continue;
            }
            for (y, slot) in out.iter_mut().enumerate() {
                *slot += px * self.channel.prob(x, y);
            }
        }
        out
    }
}

fn check_order(alpha: f64) -> Result<()> {
    if alpha.is_nan() || alpha <= 0.0 || alpha == 1.0 {
        return Err(Error::domain(format!(
            "order {alpha} must lie in (0,1) or (1,inf]"
        )));
    }
    Ok(())
}

/// Arimoto conditional entropy H_alpha(X|Y) =
/// alpha/(1-alpha) log sum_y (sum_x p(x,y)^alpha)^(1/alpha).
pub fn arimoto_conditional_entropy(j: &JointFinite, alpha: f64) -> Result<f64> {
    check_order(alpha)?;
    if alpha.is_infinite() {
        return Ok(conditional_min_entropy(j));
    }
    let mut outer = accum::NeumaierSum::new();
    for y in 0..j.channel.outputs() {
        // Scale by the per-column maximum so p^alpha stays representable
        // for large alpha.
        let col_max = (0..j.prior.len())
            .map(|x| j.joint(x, y))
            .fold(0.0, f64::max);
        if col_max == 0.0 {
            continue;
        }
        let ln_max = col_max.ln();
        let scaled: f64 = (0..j.prior.len())
            .map(|x| j.joint(x, y))
            .filter(|&p| p > 0.0)
            .map(|p| (alpha * (p.ln() - ln_max)).exp())
            .sum();
        outer.add((ln_max + scaled.ln() / alpha).exp());
    }
    Ok(alpha / (1.0 - alpha) * outer.value().ln())
}

/// H_inf(X|Y) = -log sum_y max_x p(x,y), the negative log of optimal
/// single-observation guessing probability.
pub fn conditional_min_entropy(j: &JointFinite) -> f64 {
    let mut total = accum::NeumaierSum::new();
    for y in 0..j.channel.outputs() {
        let best = (0..j.prior.len())
            .map(|x| j.joint(x, y))
            .fold(0.0, f64::max);
        total.add(best);
    }
    -total.value().ln()
}

/// Sibson information I_alpha(X;Y) =
/// alpha/(alpha-1) log sum_y (sum_x p(x,y)^alpha p_X(x)^(1-alpha))^(1/alpha).
pub fn sibson_information(j: &JointFinite, alpha: f64) -> Result<f64> {
    check_order(alpha)?;
    if alpha.is_infinite() {
        let support: Vec<usize> = j.prior.support();
        return max_information(&j.channel, &support);
    }
    let mut outer = accum::NeumaierSum::new();
    for y in 0..j.channel.outputs() {
        // Exponents e_x = alpha ln p(x,y) + (1-alpha) ln p_X(x), combined as
        // exp(max/alpha) * (sum exp(e_x - max))^(1/alpha).
        let exponents: Vec<f64> = (0..j.prior.len())
            .filter(|&x| j.prior.mass(x) > 0.0 && j.joint(x, y) > 0.0)
            .map(|x| alpha * j.joint(x, y).ln() + (1.0 - alpha) * j.prior.mass(x).ln())
            .collect();
        let Some(max) = exponents.iter().cloned().reduce(f64::max) else {
            continue;
        };
        let scaled: f64 = exponents.iter().map(|&e| (e - max).exp()).sum();
        outer.add((max / alpha + scaled.ln() / alpha).exp());
    }
    Ok(alpha / (alpha - 1.0) * outer.value().ln())
}

/// Shannon mutual information I(X;Y) in nats.
pub fn mutual_information(j: &JointFinite) -> f64 {
    let marginal = j.output_marginal();
    let mut total = accum::NeumaierSum::new();
    for x in 0..j.prior.len() {
        let px = j.prior.mass(x);
        if px == 0.0 {
            continue;
        }
        for (y, &py) in marginal.iter().enumerate() {
            let pxy = j.joint(x, y);
            if pxy > 0.0 {
                total.add(pxy * (pxy / (px * py)).ln());
            }
        }
    }
    total.value().max(0.0)
}

/// Max-information I_inf(X;Y) = log sum_y max_{x in support} p(y|x).
/// Prior-independent apart from its support.
pub fn max_information(channel: &DiscreteChannel, support: &[usize]) -> Result<f64> {
    if support.is_empty() {
        return Err(Error::domain("max-information needs a nonempty support"));
    }
    if let Some(&bad) = support.iter().find(|&&x| x >= channel.inputs()) {
        return Err(Error::domain(format!(
            "support index {bad} out of range for {} inputs",
            channel.inputs()
        )));
    }
    let mut total = accum::NeumaierSum::new();
    for y in 0..channel.outputs() {
        let best = support
            .iter()
            .map(|&x| channel.prob(x, y))
            .fold(0.0, f64::max);
        total.add(best);
    }
    Ok(total.value().ln())
}

fn check_family(z_prior: &Pmf, members: &[JointFinite]) -> Result<()> {
    if members.len() != z_prior.len() {
        return Err(Error::validation(format!(
            "{} conditional members for a conditioning variable of size {}",
            members.len(),
            z_prior.len()
        )));
    }
    let inputs = members[0].channel.inputs();
    let outputs = members[0].channel.outputs();
    for m in members {
        if m.channel.inputs() != inputs || m.channel.outputs() != outputs {
            return Err(Error::validation(
                "conditional members must share input and output alphabets",
            ));
        }
    }
    Ok(())
}

/// Conditional max-information averaged over the conditioning variable:
/// I_inf(X;Y|Z) = log E_Z sum_y max_{x: p(x|z) > 0} p(y|x,z).
pub fn conditional_max_information(z_prior: &Pmf, members: &[JointFinite]) -> Result<f64> {
    check_family(z_prior, members)?;
    let mut total = accum::NeumaierSum::new();
    for (z, member) in members.iter().enumerate() {
        let pz = z_prior.mass(z);
        if pz == 0.0 {
            continue;
        }
        let support = member.prior.support();
        if support.is_empty() {
            return Err(Error::validation(format!(
                "conditional prior at z = {z} has empty support"
            )));
        }
        let inner = max_information(&member.channel, &support)?;
        total.add(pz * inner.exp());
    }
    Ok(total.value().ln())
}

/// Worst-case variant: max over conditioning values with positive
/// probability instead of the average. Always at least the averaged form.
pub fn issa_conditional_leakage(z_prior: &Pmf, members: &[JointFinite]) -> Result<f64> {
    check_family(z_prior, members)?;
    let mut best = f64::NEG_INFINITY;
    for (z, member) in members.iter().enumerate() {
        if z_prior.mass(z) == 0.0 {
            continue;
        }
        let support = member.prior.support();
        if support.is_empty() {
            return Err(Error::validation(format!(
                "conditional prior at z = {z} has empty support"
            )));
        }
        best = best.max(max_information(&member.channel, &support)?);
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::validation("conditioning variable has empty support"))
    }
}

fn check_binary_prob(v: f64, name: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&v) || !v.is_finite() {
        return Err(Error::domain(format!("{name} = {v} must lie in [0, 1]")));
    }
    Ok(())
}

/// Binary alpha-divergence d_alpha(p||q) between Bernoulli(p) and
/// Bernoulli(q); `f64::INFINITY` gives the max-divergence
/// log max(p/q, (1-p)/(1-q)) over the support of q.
pub fn binary_alpha_divergence(p: f64, q: f64, alpha: f64) -> Result<f64> {
    check_binary_prob(p, "p")?;
    check_binary_prob(q, "q")?;
    check_order(alpha)?;
    let components = [(p, q), (1.0 - p, 1.0 - q)];
    if alpha.is_infinite() {
        let mut best = f64::NEG_INFINITY;
        for (pc, qc) in components {
            if qc > 0.0 {
                best = best.max(pc / qc);
            } else if pc > 0.0 {
                return Ok(f64::INFINITY);
            }
        }
        return Ok(best.ln());
    }
    let mut total = 0.0;
    for (pc, qc) in components {
        if pc == 0.0 {
            continue;
        }
        if qc == 0.0 {
            if alpha > 1.0 {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        total += (alpha * pc.ln() + (1.0 - alpha) * qc.ln()).exp();
    }
    if total == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(total.ln() / (alpha - 1.0))
}

/// Largest success probability P in [1/M, 1] with
/// d_alpha(P || 1/M) <= i_alpha, found by bisection (the divergence is
/// nondecreasing in P on that interval). Inverts the generalized Fano
/// relation between leakage and guessing success.
pub fn fano_success_ceiling(i_alpha: f64, alpha: f64, m_alphabet: usize) -> Result<f64> {
    check_order(alpha)?;
    if m_alphabet == 0 {
        return Err(Error::domain("alphabet must be nonempty"));
    }
    if !(i_alpha >= -1e-12) {
        return Err(Error::domain(format!(
            "information value {i_alpha} must be nonnegative"
        )));
    }
    let i = i_alpha.max(0.0);
    let uniform = 1.0 / m_alphabet as f64;
    let div = |p: f64| binary_alpha_divergence(p, uniform, alpha).expect("validated args");
    if div(1.0) <= i {
        return Ok(1.0);
    }
    let mut lo = uniform;
    let mut hi = 1.0;
    for _ in 0..200 {
        if hi - lo <= 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if div(mid) <= i {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// m-fold memoryless extension: inputs and outputs are mixed-radix tuples,
/// transition probabilities multiply coordinatewise.
pub fn product_channel(channel: &DiscreteChannel, m: usize) -> Result<DiscreteChannel> {
    if m == 0 {
        return Err(Error::domain("product channel needs at least one factor"));
    }
    let ins = channel.inputs().checked_pow(m as u32);
    let outs = channel.outputs().checked_pow(m as u32);
    let entries = ins.and_then(|i| outs.and_then(|o| i.checked_mul(o)));
    let entries = entries.ok_or_else(|| {
        Error::capability("product channel dimensions overflow".to_string())
    })?;
    if entries > MAX_PRODUCT_ENTRIES {
        return Err(Error::capability(format!(
            "product channel with {entries} entries exceeds the {MAX_PRODUCT_ENTRIES} limit"
        )));
    }
    let ins = ins.unwrap();
    let outs = outs.unwrap();
    let mut rows = Vec::with_capacity(ins);
    for xt in 0..ins {
        let mut row = Vec::with_capacity(outs);
        for yt in 0..outs {
            let mut p = 1.0;
            let mut xr = xt;
            let mut yr = yt;
            for _ in 0..m {
                p *= channel.prob(xr % channel.inputs(), yr % channel.outputs());
                xr /= channel.inputs();
                yr /= channel.outputs();
            }
            row.push(p);
        }
        rows.push(row);
    }
    DiscreteChannel::new(rows)
}
