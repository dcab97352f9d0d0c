//! Ground-truth evaluation of masked setups: exhaustive MAP enumeration,
//! Monte-Carlo attack simulation, extremal pmf-pair search, and the
//! iterated-convolution series behind the figure tables.
//!
//! The exact routines are guarded by explicit term budgets and fail with a
//! capability error rather than truncate. Monte-Carlo trials draw from a
//! counter-keyed generator with a fixed per-trial stride, so success counts
//! are identical for every partition of the trial range into worker blocks.

use serde::Serialize;

use crate::accum::NeumaierSum;
use crate::bounds::{self, ShareLeakage};
use crate::channels::GaussianLeakageModel;
use crate::error::{Error, Result};
use crate::group::FiniteAbelianGroup;
use crate::info::{self, DiscreteChannel, JointFinite, MAX_PRODUCT_ENTRIES};
use crate::pmf::{self, Pmf, MASS_TOLERANCE};
use crate::sampling;

/// Upper limit on enumerated terms (text vectors x trace vectors x keys)
/// in [`exact_map_success`].
pub const MAX_ENUMERATION_TERMS: u128 = 100_000_000;

/// Per-share observation channels of a masked setup. All shares leak
/// through the same kind of channel; mixing kinds within one setup is not
/// supported.
#[derive(Clone, Debug)]
pub enum ShareChannels {
    Discrete(Vec<DiscreteChannel>),
    Gaussian(Vec<GaussianLeakageModel>),
}

impl ShareChannels {
    fn count(&self) -> usize {
        match self {
            ShareChannels::Discrete(c) => c.len(),
            ShareChannels::Gaussian(c) => c.len(),
        }
    }

    fn input_alphabets(&self) -> Vec<usize> {
        match self {
            ShareChannels::Discrete(c) => c.iter().map(|ch| ch.inputs()).collect(),
            ShareChannels::Gaussian(c) => c.iter().map(|ch| ch.alphabet()).collect(),
        }
    }
}

/// A secret K combined with a public value T into a sensitive variable
/// X = combine(K, T), additively split into d+1 shares that each leak
/// through their own channel. K, T, and the masks are uniform over the
/// group.
#[derive(Clone, Debug)]
pub struct MaskedSetup {
    group: FiniteAbelianGroup,
    channels: ShareChannels,
    // combine[k * M + t] = x; None means the group addition k + t.
    combine: Option<Vec<usize>>,
}

impl MaskedSetup {
    pub fn new(group: FiniteAbelianGroup, channels: ShareChannels) -> Result<Self> {
        if channels.count() == 0 {
            return Err(Error::validation("a setup needs at least one share"));
        }
        let m = group.order();
        if let Some(bad) = channels.input_alphabets().iter().find(|&&a| a != m) {
            return Err(Error::validation(format!(
                "share channel input alphabet {bad} does not match group order {m}"
            )));
        }
        Ok(Self {
            group,
            channels,
            combine: None,
        })
    }

    /// Replaces the default combine map K + T by an explicit table
    /// `table[k][t] = x`. For each t the map k -> x must be a bijection,
    /// otherwise a uniform key would not induce a uniform sensitive value.
    pub fn with_combine(mut self, table: Vec<Vec<usize>>) -> Result<Self> {
        let m = self.group.order();
        if table.len() != m || table.iter().any(|row| row.len() != m) {
            return Err(Error::validation(format!(
                "combine table must be {m} x {m}"
            )));
        }
        let mut flat = vec![0usize; m * m];
        for t in 0..m {
            let mut seen = vec![false; m];
            for (k, row) in table.iter().enumerate() {
                let x = row[t];
                if x >= m {
                    return Err(Error::validation(format!(
                        "combine entry {x} out of range for group order {m}"
                    )));
                }
                if seen[x] {
                    return Err(Error::validation(format!(
                        "combine map is not a bijection in the key for t = {t}"
                    )));
                }
                seen[x] = true;
                flat[k * m + t] = x;
            }
        }
        self.combine = Some(flat);
        Ok(self)
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn channels(&self) -> &ShareChannels {
        &self.channels
    }

    /// Masking order: number of shares minus one.
    pub fn d(&self) -> usize {
        self.channels.count() - 1
    }

    /// Sensitive value index for key k and text t.
    pub fn combine(&self, k: usize, t: usize) -> usize {
        match &self.combine {
            Some(flat) => flat[k * self.group.order() + t],
            None => self.group.add_index(k, t),
        }
    }

    /// Channel from the sensitive value to the full trace (one output per
    /// share), with the d free masks marginalized out. Discrete setups
    /// only.
    pub fn effective_share_channel(&self) -> Result<DiscreteChannel> {
        let chans = match &self.channels {
            ShareChannels::Discrete(c) => c,
            ShareChannels::Gaussian(_) => {
                return Err(Error::capability(
                    "exact marginalization needs discrete share channels".to_string(),
                ))
            }
        };
        let m = self.group.order();
        let outputs: Vec<usize> = chans.iter().map(|c| c.outputs()).collect();
        let y_total = outputs
            .iter()
            .try_fold(1usize, |acc, &o| acc.checked_mul(o))
            .filter(|&t| t.saturating_mul(m) <= MAX_PRODUCT_ENTRIES)
            .ok_or_else(|| {
                Error::capability(format!(
                    "effective channel exceeds {MAX_PRODUCT_ENTRIES} entries"
                ))
            })?;
        let d = self.d();
        let scale = (m as f64).powi(-(d as i32));
        let mut rows = vec![vec![0.0; y_total]; m];
        let mut digits = vec![0usize; chans.len()];
        for y_idx in 0..y_total {
            // Likelihood of this trace as a function of the share sum.
            let mut v: Vec<f64> = (0..m).map(|u| chans[0].prob(u, digits[0])).collect();
            for (i, chan) in chans.iter().enumerate().skip(1) {
                let li: Vec<f64> = (0..m).map(|u| chan.prob(u, digits[i])).collect();
                v = group_convolve_raw(&v, &li, &self.group);
            }
            for x in 0..m {
                rows[x][y_idx] = scale * v[x];
            }
            advance_digits(&mut digits, &outputs);
            let _ = y_idx;
        }
        DiscreteChannel::new(rows)
    }
}

/// c[x] = sum over u + w = x of a[u] b[w]; inputs need not be normalized.
fn group_convolve_raw(a: &[f64], b: &[f64], group: &FiniteAbelianGroup) -> Vec<f64> {
    let n = group.order();
    let mut out = vec![0.0; n];
    for (u, &au) in a.iter().enumerate() {
        if au == 0.0 {
            continue;
        }
        for (w, &bw) in b.iter().enumerate() {
            if bw != 0.0 {
                out[group.add_index(u, w)] += au * bw;
            }
        }
    }
    out
}

/// Increments a mixed-radix digit vector (last digit fastest). Returns
/// false once the vector wraps back to all zeros.
fn advance_digits(digits: &mut [usize], radices: &[usize]) -> bool {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < radices[i] {
            return true;
        }
        digits[i] = 0;
    }
    false
}

/// Exhaustive evaluation of the optimal attack on a discrete setup.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExactAttack {
    pub m: usize,
    /// Success probability of the MAP key guess from m traces and texts.
    pub ps_exact: f64,
    /// Max-information about K carried by the traces given the texts, nats.
    pub i_inf_conditional_nats: f64,
    /// Max-information about the pair (K, texts) in the traces, nats.
    pub i_inf_joint_nats: f64,
    /// Max-information of the single-trace effective share channel, nats.
    pub i_inf_single_trace_nats: f64,
}

/// Enumerates every (text vector, trace vector) pair of a discrete setup,
/// computing the exact MAP success probability and the associated leakage
/// measures. The term count (keys x texts^m x traces^m) is capped by
/// [`MAX_ENUMERATION_TERMS`].
pub fn exact_map_success(setup: &MaskedSetup, m: usize) -> Result<ExactAttack> {
    let eff = setup.effective_share_channel()?;
    let mk = setup.group.order();
    let y1 = eff.outputs();
    let per_trace = (mk as u128) * (y1 as u128);
    let mut terms: u128 = mk as u128;
    for _ in 0..m {
        terms = terms
            .checked_mul(per_trace)
            .filter(|&t| t <= MAX_ENUMERATION_TERMS)
            .ok_or_else(|| {
                Error::capability(format!(
                    "enumeration exceeds {MAX_ENUMERATION_TERMS} terms"
                ))
            })?;
    }
    let t_radix = vec![mk; m];
    let y_radix = vec![y1; m];

    // Success pass: texts outer, traces inner, best key per trace vector.
    let mut n_t = 0u64;
    let mut outer = NeumaierSum::new();
    let mut t_digits = vec![0usize; m];
    loop {
        n_t += 1;
        let key_rows: Vec<Vec<usize>> = (0..mk)
            .map(|k| t_digits.iter().map(|&t| setup.combine(k, t)).collect())
            .collect();
        let mut inner = NeumaierSum::new();
        let mut y_digits = vec![0usize; m];
        loop {
            let mut best = 0.0f64;
            for rows in &key_rows {
                let mut prod = 1.0f64;
                for (j, &y) in y_digits.iter().enumerate() {
                    prod *= eff.prob(rows[j], y);
                    if prod == 0.0 {
                        break;
                    }
                }
                if prod > best {
                    best = prod;
                }
            }
            inner.add(best);
            if !advance_digits(&mut y_digits, &y_radix) {
                break;
            }
        }
        outer.add(inner.value());
        if !advance_digits(&mut t_digits, &t_radix) {
            break;
        }
    }
    let ps_exact = outer.value() / (n_t as f64 * mk as f64);

    // Joint pass: traces outer, best (key, text vector) per trace vector.
    let mut joint = NeumaierSum::new();
    let mut y_digits = vec![0usize; m];
    loop {
        let mut best = 0.0f64;
        let mut t_digits = vec![0usize; m];
        loop {
            for k in 0..mk {
                let mut prod = 1.0f64;
                for (j, (&t, &y)) in t_digits.iter().zip(y_digits.iter()).enumerate() {
                    prod *= eff.prob(setup.combine(k, t), y);
                    if prod == 0.0 {
                        break;
                    }
                    let _ = j;
                }
                if prod > best {
                    best = prod;
                }
            }
            if !advance_digits(&mut t_digits, &t_radix) {
                break;
            }
        }
        joint.add(best);
        if !advance_digits(&mut y_digits, &y_radix) {
            break;
        }
    }
    let i_inf_joint_nats = joint.value().ln();

    // Conditional route through the per-text channel family when it fits
    // in memory; beyond that the enumeration total is reused.
    let family_entries = (n_t as u128) * (mk as u128) * (y1 as u128).pow(m as u32);
    let i_inf_conditional_nats = if family_entries <= MAX_PRODUCT_ENTRIES as u128 {
        let (z_prior, members) = per_text_family(setup, &eff, m)?;
        info::conditional_max_information(&z_prior, &members)?
    } else {
        (outer.value() / n_t as f64).ln()
    };

    let all_inputs: Vec<usize> = (0..mk).collect();
    let i_inf_single_trace_nats = info::max_information(&eff, &all_inputs)?;

    Ok(ExactAttack {
        m,
        ps_exact,
        i_inf_conditional_nats,
        i_inf_joint_nats,
        i_inf_single_trace_nats,
    })
}

/// Uniform prior over text vectors together with the key-to-traces channel
/// conditioned on each text vector. Shares the marginalized single-trace
/// channel so callers can feed the family to the conditional leakage
/// measures directly.
pub fn per_text_family(
    setup: &MaskedSetup,
    eff: &DiscreteChannel,
    m: usize,
) -> Result<(Pmf, Vec<JointFinite>)> {
    let mk = setup.group.order();
    let y1 = eff.outputs();
    let n_t = (mk as u128)
        .checked_pow(m as u32)
        .filter(|&n| n * (mk as u128) * (y1 as u128).pow(m as u32) <= MAX_PRODUCT_ENTRIES as u128)
        .ok_or_else(|| {
            Error::capability(format!(
                "per-text family exceeds {MAX_PRODUCT_ENTRIES} entries"
            ))
        })? as usize;
    let n_y = y1.pow(m as u32);
    let y_radix = vec![y1; m];
    let mut members = Vec::with_capacity(n_t);
    let mut t_digits = vec![0usize; m];
    for _ in 0..n_t {
        let mut rows = Vec::with_capacity(mk);
        for k in 0..mk {
            let x_rows: Vec<usize> = t_digits.iter().map(|&t| setup.combine(k, t)).collect();
            let mut row = Vec::with_capacity(n_y);
            let mut y_digits = vec![0usize; m];
            loop {
                let mut prod = 1.0f64;
                for (j, &y) in y_digits.iter().enumerate() {
                    prod *= eff.prob(x_rows[j], y);
                }
                row.push(prod);
                if !advance_digits(&mut y_digits, &y_radix) {
                    break;
                }
            }
            rows.push(row);
        }
        members.push(JointFinite::new(Pmf::uniform(mk)?, DiscreteChannel::new(rows)?)?);
        advance_digits(&mut t_digits, &vec![mk; m]);
    }
    Ok((Pmf::uniform(n_t)?, members))
}

/// Outcome of a Monte-Carlo MAP attack.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AttackResult {
    pub m: usize,
    pub trials: u64,
    pub successes: u64,
    pub ps_empirical: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Wilson 95% confidence interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    // 97.5th percentile of the unit normal.
    let z = 1.959963984540054_f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Simulates `trials` independent MAP attacks with m traces each. The
/// result depends only on (seed, trials, m, setup): trial i consumes the
/// counter range [i * stride, (i+1) * stride), so any partition into
/// worker blocks produces the same success count.
pub fn monte_carlo_attack(
    setup: &MaskedSetup,
    m: usize,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<AttackResult> {
    if trials == 0 {
        return Err(Error::validation("trial count must be positive"));
    }
    let d = setup.d() as u64;
    // Per trace: one text, d masks, d+1 observations; plus the key draw.
    let stride = 1 + (m as u64) * (2 * d + 2);
    let w = effective_workers(workers);
    let mut blocks = Vec::with_capacity(w);
    let base = trials / w as u64;
    let rem = trials % w as u64;
    let mut start = 0u64;
    for b in 0..w as u64 {
        let len = base + u64::from(b < rem);
        if len > 0 {
            blocks.push((start, len));
        }
        start += len;
    }
    let run_block = |&(start, len): &(u64, u64)| -> u64 {
        (start..start + len)
            .map(|trial| u64::from(run_trial(setup, m, seed, trial * stride)))
            .sum()
    };
    let successes = sum_over_blocks(&blocks, run_block);
    let ps_empirical = successes as f64 / trials as f64;
    let (ci_low, ci_high) = wilson_interval(successes, trials);
    Ok(AttackResult {
        m,
        trials,
        successes,
        ps_empirical,
        ci_low,
        ci_high,
    })
}

fn effective_workers(workers: usize) -> usize {
    if workers > 0 {
        return workers;
    }
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads().max(1)
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

#[cfg(feature = "parallel")]
fn sum_over_blocks<F>(blocks: &[(u64, u64)], run: F) -> u64
where
    F: Fn(&(u64, u64)) -> u64 + Sync + Send,
{
    use rayon::prelude::*;
    blocks.par_iter().map(run).sum()
}

#[cfg(not(feature = "parallel"))]
fn sum_over_blocks<F>(blocks: &[(u64, u64)], run: F) -> u64
where
    F: Fn(&(u64, u64)) -> u64,
{
    blocks.iter().map(run).sum()
}

/// One simulated attack; true on MAP success. Consumes counters starting
/// at `counter_base` in a fixed order, independent of channel kind.
fn run_trial(setup: &MaskedSetup, m: usize, seed: u64, counter_base: u64) -> bool {
    let mk = setup.group.order();
    let d = setup.d();
    let mut c = counter_base;
    let key = sampling::uniform_index(seed, c, mk);
    c += 1;
    let mut scores = vec![0.0f64; mk];
    let mut masks = vec![0usize; d];
    let mut shares = vec![0usize; d + 1];
    for _ in 0..m {
        let t = sampling::uniform_index(seed, c, mk);
        c += 1;
        let mut mask_sum = 0usize;
        for mask in masks.iter_mut() {
            *mask = sampling::uniform_index(seed, c, mk);
            c += 1;
            mask_sum = setup.group.add_index(mask_sum, *mask);
        }
        let x = setup.combine(key, t);
        shares[0] = setup.group.add_index(x, setup.group.neg_index(mask_sum));
        shares[1..].copy_from_slice(&masks);
        // Likelihood of the observed trace as a function of the share sum,
        // rescaled per share to avoid underflow over many traces.
        let mut v: Option<Vec<f64>> = None;
        for i in 0..=d {
            let mut li: Vec<f64> = match &setup.channels {
                ShareChannels::Discrete(chans) => {
                    let y = sample_discrete(chans[i].row(shares[i]), sampling::uniform(seed, c));
                    c += 1;
                    (0..mk).map(|u| chans[i].prob(u, y)).collect()
                }
                ShareChannels::Gaussian(models) => {
                    let model = &models[i];
                    let y = model.leak()[shares[i]]
                        + model.sigma() * sampling::standard_normal(seed, c);
                    c += 1;
                    let inv = 1.0 / model.sigma();
                    (0..mk)
                        .map(|u| {
                            let z = (y - model.leak()[u]) * inv;
                            (-0.5 * z * z).exp()
                        })
                        .collect()
                }
            };
            let peak = li.iter().cloned().fold(0.0f64, f64::max);
            if peak > 0.0 {
                for value in li.iter_mut() {
                    *value /= peak;
                }
            }
            v = Some(match v {
                None => li,
                Some(prev) => group_convolve_raw(&prev, &li, &setup.group),
            });
        }
        let v = v.expect("at least one share");
        for (kappa, score) in scores.iter_mut().enumerate() {
            *score += v[setup.combine(kappa, t)].ln();
        }
    }
    // MAP guess; ties resolve to the lowest key index.
    let mut best_k = 0usize;
    let mut best = f64::NEG_INFINITY;
    for (kappa, &score) in scores.iter().enumerate() {
        if score > best {
            best = score;
            best_k = kappa;
        }
    }
    best_k == key
}

/// Inverse-CDF draw from a probability row given a uniform in (0, 1).
fn sample_discrete(row: &[f64], u: f64) -> usize {
    let mut acc = 0.0f64;
    let mut last_positive = 0usize;
    for (y, &p) in row.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_positive = y;
            if u < acc {
                return y;
            }
        }
    }
    last_positive
}

/// Best convolution peak found over pmf pairs with fixed maximal masses.
#[derive(Clone, Debug)]
pub struct ExtremalSearch {
    pub peak: f64,
    pub left: Pmf,
    pub right: Pmf,
}

/// Searches pmf pairs (a, b) over the group with max(a) = p and max(b) = q
/// for the largest peak of a + b's distribution. Structured candidates
/// place the extreme masses of one pmf on the negated support of the
/// other, which attains the two-share bound whenever the floor levels of p
/// and q agree; subgroup-coset placements are tried first so witnesses
/// carry coset structure when one exists. `grid` counts additional
/// randomized restarts projected onto the max-mass constraint.
pub fn extremal_search_two(
    p: f64,
    q: f64,
    group: &FiniteAbelianGroup,
    grid: usize,
    seed: u64,
) -> Result<ExtremalSearch> {
    if grid < 2 {
        return Err(Error::domain(format!("grid must be at least 2, got {grid}")));
    }
    let mk = group.order();
    let floor = 1.0 / mk as f64 - MASS_TOLERANCE;
    for value in [p, q] {
        if !(floor..=1.0 + MASS_TOLERANCE).contains(&value) {
            return Err(Error::domain(format!(
                "maximal mass {value} must lie in [1/{mk}, 1]"
            )));
        }
    }
    let p = p.clamp(1.0 / mk as f64, 1.0);
    let q = q.clamp(1.0 / mk as f64, 1.0);
    let mass_p = flat_top_masses(p, mk)?;
    let mass_q = flat_top_masses(q, mk)?;
    let kp = bounds::floor_reciprocal(p);
    let kq = bounds::floor_reciprocal(q);

    let mut best: Option<(f64, Pmf, Pmf)> = None;
    let mut consider = |a: Pmf, b: Pmf| -> Result<()> {
        let peak = pmf::convolve(&a, &b, group)?.max_mass();
        if best.as_ref().map_or(true, |(bp, _, _)| peak > *bp) {
            best = Some((peak, a, b));
        }
        Ok(())
    };

    // Coset placements: both supports on a subgroup of order k+1 and its
    // negation, masses in matching order.
    if kp == kq && kp + 1 <= mk && mk % (kp + 1) == 0 {
        for subgroup in group.subgroups_of_order(kp + 1)? {
            let mut a = vec![0.0; mk];
            let mut b = vec![0.0; mk];
            for (j, &h) in subgroup.iter().enumerate() {
                if j < mass_p.len() {
                    a[h.index()] = mass_p[j];
                }
                if j < mass_q.len() {
                    b[group.neg_index(h.index())] = mass_q[j];
                }
            }
            consider(Pmf::new(a)?, Pmf::new(b)?)?;
        }
    }

    // Generated supports: descending masses along the cyclic orbit of each
    // generator, paired with the same orbit, its reversal, and the
    // reflected assignment b[-s] = matching mass.
    let orbit_len = mass_p.len().max(mass_q.len());
    for g in 1..mk {
        let orbit = cyclic_orbit(group, g, orbit_len);
        if orbit.len() < orbit_len {
            continue;
        }
        let mut a = vec![0.0; mk];
        for (j, &mass) in mass_p.iter().enumerate() {
            a[orbit[j]] = mass;
        }
        let a = Pmf::new(a)?;
        let mut same = vec![0.0; mk];
        let mut reversed = vec![0.0; mk];
        for (j, &mass) in mass_q.iter().enumerate() {
            same[orbit[j]] = mass;
            reversed[orbit[mass_q.len() - 1 - j]] = mass;
        }
        consider(a.clone(), Pmf::new(same)?)?;
        consider(a.clone(), Pmf::new(reversed)?)?;
        let b = reflected_candidate(&a, q, group)?;
        consider(a, b)?;
    }

    // Canonical index placement, present even when no generator orbit is
    // long enough for the mass lists.
    let canonical = Pmf::flat_top(p, mk)?;
    consider(canonical.clone(), Pmf::flat_top(q, mk)?)?;
    let b = reflected_candidate(&canonical, q, group)?;
    consider(canonical, b)?;

    // Randomized restarts projected onto the max-mass constraint.
    for round in 0..grid as u64 {
        let base = round * (2 * mk as u64);
        let a = random_projected(p, mk, seed, base)?;
        let b = random_projected(q, mk, seed, base + mk as u64)?;
        consider(a.clone(), b)?;
        let reflected = reflected_candidate(&a, q, group)?;
        consider(a, reflected)?;
    }

    let (peak, left, right) = best.expect("at least one candidate evaluated");
    Ok(ExtremalSearch { peak, left, right })
}

/// Nonzero masses of the flat-top pmf with maximal mass p, descending.
fn flat_top_masses(p: f64, len: usize) -> Result<Vec<f64>> {
    Ok(Pmf::flat_top(p, len)?
        .masses()
        .iter()
        .cloned()
        .filter(|&v| v > 0.0)
        .collect())
}

/// First `len` distinct elements 0, g, 2g, ... of the orbit of g.
fn cyclic_orbit(group: &FiniteAbelianGroup, g: usize, len: usize) -> Vec<usize> {
    let mut orbit = vec![0usize];
    let mut current = 0usize;
    loop {
        current = group.add_index(current, g);
        if current == 0 || orbit.len() == len {
            break;
        }
        orbit.push(current);
    }
    orbit
}

/// Greedy partner for `a`: mass q on the negated support of `a` in order
/// of descending a-mass, remaining budget spread over free indices in
/// chunks of at most q. Attains the two-share bound for matching floors
/// and min(p, q) otherwise.
fn reflected_candidate(a: &Pmf, q: f64, group: &FiniteAbelianGroup) -> Result<Pmf> {
    let mk = group.order();
    let mut order: Vec<usize> = a.support();
    order.sort_by(|&i, &j| a.mass(j).partial_cmp(&a.mass(i)).expect("finite"));
    let mut b = vec![0.0f64; mk];
    let mut remaining = 1.0f64;
    for &s in &order {
        if remaining <= 0.0 {
            break;
        }
        let give = q.min(remaining);
        b[group.neg_index(s)] = give;
        remaining -= give;
    }
    if remaining > 0.0 {
        for slot in b.iter_mut() {
            if *slot == 0.0 {
                let give = q.min(remaining);
                *slot = give;
                remaining -= give;
                if remaining <= 0.0 {
                    break;
                }
            }
        }
    }
    Pmf::new(b)
}

/// Random simplex point conditioned to have maximal mass exactly `target`:
/// index 0 carries the maximum, the rest splits 1 - target proportionally
/// to counter-keyed exponential weights with each entry capped at target.
/// Every waterfill round either finishes or caps one more entry for good,
/// so at most `len` rounds run.
fn random_projected(target: f64, len: usize, seed: u64, counter_base: u64) -> Result<Pmf> {
    let weights: Vec<f64> = (0..len as u64)
        .map(|i| -sampling::uniform(seed, counter_base + i).ln())
        .collect();
    let mut values = vec![0.0f64; len];
    values[0] = target;
    let mut active: Vec<usize> = (1..len).collect();
    let mut budget = 1.0 - target;
    while budget > 0.0 && !active.is_empty() {
        let weight_sum: f64 = active.iter().map(|&i| weights[i]).sum();
        let mut capped = Vec::new();
        for &i in &active {
            if budget * weights[i] / weight_sum >= target {
                capped.push(i);
            }
        }
        if capped.is_empty() {
            for &i in &active {
                values[i] = budget * weights[i] / weight_sum;
            }
            budget = 0.0;
        } else {
            for &i in &capped {
                values[i] = target;
                budget -= target;
            }
            active.retain(|i| !capped.contains(i));
        }
    }
    if budget.abs() > MASS_TOLERANCE {
        // Feasible targets (len * target >= 1) never leave a residue; fall
        // back to the flat-top shape on floating-point edge cases.
        return Pmf::flat_top(target, len);
    }
    Pmf::new(values)
}

/// One row of the iterated-convolution table.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FigureRow {
    pub d: usize,
    pub max_mass: f64,
    pub bound_thm5: f64,
    pub bound_thm7: f64,
}

/// Maximal mass of the (d+1)-fold sum of iid copies of `p0` for
/// d = 0..=d_max, next to both multi-share bounds evaluated on d+1 copies
/// of the single-share maximal mass.
pub fn figure_series(
    group: &FiniteAbelianGroup,
    p0: &Pmf,
    d_max: usize,
) -> Result<Vec<FigureRow>> {
    if p0.len() != group.order() {
        return Err(Error::validation(format!(
            "pmf length {} does not match group order {}",
            p0.len(),
            group.order()
        )));
    }
    let sequence = pmf::iterate_convolution(p0, group, d_max)?;
    let p_share = p0.max_mass();
    let mut rows = Vec::with_capacity(d_max + 1);
    for (d, dist) in sequence.iter().enumerate() {
        let shares = ShareLeakage::new(&vec![p_share; d + 1], group.order())?;
        rows.push(FigureRow {
            d,
            max_mass: dist.max_mass(),
            bound_thm5: bounds::mgl_multi(&shares),
            bound_thm7: bounds::mgl_refined(&shares).value,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels;
    use approx::assert_abs_diff_eq;

    fn bsc_masked(d: usize) -> MaskedSetup {
        let chans = (0..=d).map(|_| channels::bsc(0.1).unwrap()).collect();
        MaskedSetup::new(
            FiniteAbelianGroup::cyclic(2).unwrap(),
            ShareChannels::Discrete(chans),
        )
        .unwrap()
    }

    #[test]
    fn setup_validation() {
        let g = FiniteAbelianGroup::cyclic(4).unwrap();
        assert!(MaskedSetup::new(g.clone(), ShareChannels::Discrete(vec![])).is_err());
        let wrong = channels::bsc(0.1).unwrap();
        assert!(MaskedSetup::new(g.clone(), ShareChannels::Discrete(vec![wrong])).is_err());
        let ok = MaskedSetup::new(
            g.clone(),
            ShareChannels::Discrete(vec![channels::identity_channel(4).unwrap()]),
        )
        .unwrap();
        assert_eq!(ok.d(), 0);
        assert_eq!(ok.combine(1, 2), 3);

        // Constant combine is not a bijection in the key.
        let constant = vec![vec![0usize; 4]; 4];
        assert!(ok.clone().with_combine(constant).is_err());
        // Subtraction is.
        let sub: Vec<Vec<usize>> = (0..4)
            .map(|k| {
                (0..4)
                    .map(|t| {
                        let g = FiniteAbelianGroup::cyclic(4).unwrap();
                        g.add_index(k, g.neg_index(t))
                    })
                    .collect()
            })
            .collect();
        let with = ok.with_combine(sub).unwrap();
        assert_eq!(with.combine(1, 3), 2);
    }

    #[test]
    fn effective_channel_marginalizes_masks() {
        let setup = bsc_masked(1);
        let eff = setup.effective_share_channel().unwrap();
        assert_eq!(eff.inputs(), 2);
        assert_eq!(eff.outputs(), 4);
        // Matching observations favor an even share sum.
        assert_abs_diff_eq!(eff.prob(0, 0), 0.41, epsilon = 1e-12);
        assert_abs_diff_eq!(eff.prob(0, 1), 0.09, epsilon = 1e-12);
        assert_abs_diff_eq!(eff.prob(1, 0), 0.09, epsilon = 1e-12);
        assert_abs_diff_eq!(eff.prob(1, 1), 0.41, epsilon = 1e-12);
    }

    #[test]
    fn noiseless_single_share_reveals_key() {
        let g = FiniteAbelianGroup::cyclic(4).unwrap();
        let setup = MaskedSetup::new(
            g,
            ShareChannels::Discrete(vec![channels::identity_channel(4).unwrap()]),
        )
        .unwrap();
        let exact = exact_map_success(&setup, 1).unwrap();
        assert_abs_diff_eq!(exact.ps_exact, 1.0, epsilon = 1e-12);
        let ln4 = (4.0f64).ln();
        assert_abs_diff_eq!(exact.i_inf_conditional_nats, ln4, epsilon = 1e-12);
        assert_abs_diff_eq!(exact.i_inf_joint_nats, ln4, epsilon = 1e-12);
        assert_abs_diff_eq!(exact.i_inf_single_trace_nats, ln4, epsilon = 1e-12);
    }

    #[test]
    fn zero_traces_is_blind_guessing() {
        let setup = bsc_masked(1);
        let exact = exact_map_success(&setup, 0).unwrap();
        assert_abs_diff_eq!(exact.ps_exact, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(exact.i_inf_conditional_nats, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(exact.i_inf_joint_nats, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn masked_bsc_success_and_leakage_agree() {
        let setup = bsc_masked(1);
        let exact = exact_map_success(&setup, 1).unwrap();
        assert_abs_diff_eq!(exact.ps_exact, 0.82, epsilon = 1e-12);
        let expected = (2.0 * exact.ps_exact).ln();
        assert_abs_diff_eq!(exact.i_inf_conditional_nats, expected, epsilon = 1e-10);
        // One trace: the conditional leakage meets the single-trace cap.
        assert_abs_diff_eq!(
            exact.i_inf_conditional_nats,
            exact.i_inf_single_trace_nats,
            epsilon = 1e-12
        );
        assert!(exact.i_inf_joint_nats >= exact.i_inf_conditional_nats - 1e-12);
    }

    #[test]
    fn multi_trace_equality_and_linear_cap() {
        let setup = bsc_masked(1);
        for m in [2usize, 3] {
            let exact = exact_map_success(&setup, m).unwrap();
            let expected = (2.0 * exact.ps_exact).ln();
            assert_abs_diff_eq!(exact.i_inf_conditional_nats, expected, epsilon = 1e-10);
            assert!(
                exact.i_inf_conditional_nats
                    <= m as f64 * exact.i_inf_single_trace_nats + 1e-10
            );
            assert!(exact.i_inf_joint_nats >= exact.i_inf_conditional_nats - 1e-12);
        }
    }

    #[test]
    fn enumeration_guard_fires() {
        let g = FiniteAbelianGroup::cyclic(16).unwrap();
        let chans = (0..2)
            .map(|_| channels::identity_channel(16).unwrap())
            .collect();
        let setup = MaskedSetup::new(g, ShareChannels::Discrete(chans)).unwrap();
        let err = exact_map_success(&setup, 4).unwrap_err();
        assert!(matches!(err, Error::Capability(_)));
    }

    #[test]
    fn conditional_average_below_worst_text() {
        let setup = bsc_masked(1);
        let eff = setup.effective_share_channel().unwrap();
        let (z_prior, members) = per_text_family(&setup, &eff, 2).unwrap();
        let averaged = info::conditional_max_information(&z_prior, &members).unwrap();
        let worst = info::issa_conditional_leakage(&z_prior, &members).unwrap();
        assert!(averaged <= worst + 1e-12);
    }

    #[test]
    fn simulation_matches_exact_toy() {
        let setup = bsc_masked(1);
        let result = monte_carlo_attack(&setup, 1, 20_000, 42, 0).unwrap();
        assert!((result.ps_empirical - 0.82).abs() < 0.012, "{result:?}");
        assert!(result.ci_low <= 0.82 && 0.82 <= result.ci_high);
    }

    #[test]
    fn simulation_near_noiseless() {
        let g = FiniteAbelianGroup::cyclic(4).unwrap();
        let setup = MaskedSetup::new(
            g,
            ShareChannels::Discrete(vec![channels::identity_channel(4).unwrap()]),
        )
        .unwrap();
        let result = monte_carlo_attack(&setup, 1, 2_000, 3, 0).unwrap();
        assert_eq!(result.successes, result.trials);
    }

    #[test]
    fn simulation_constant_leak_is_blind() {
        let g = FiniteAbelianGroup::cyclic(4).unwrap();
        let model = GaussianLeakageModel::new(vec![1.0; 4], 0.5).unwrap();
        let setup = MaskedSetup::new(g, ShareChannels::Gaussian(vec![model])).unwrap();
        let result = monte_carlo_attack(&setup, 2, 4_000, 9, 0).unwrap();
        assert!((result.ps_empirical - 0.25).abs() < 0.03, "{result:?}");
    }

    #[test]
    fn zero_traces_simulation_guesses_blindly() {
        let setup = bsc_masked(1);
        let result = monte_carlo_attack(&setup, 0, 5_000, 17, 0).unwrap();
        assert!((result.ps_empirical - 0.5).abs() < 0.03, "{result:?}");
    }

    #[test]
    fn simulation_is_partition_invariant() {
        let g = FiniteAbelianGroup::new(&[2, 2, 2, 2]).unwrap();
        let models: Vec<_> = (0..2)
            .map(|_| GaussianLeakageModel::hamming_weight(4, 2.0).unwrap())
            .collect();
        let setup = MaskedSetup::new(g, ShareChannels::Gaussian(models)).unwrap();
        let one = monte_carlo_attack(&setup, 3, 601, 7, 1).unwrap();
        let three = monte_carlo_attack(&setup, 3, 601, 7, 3).unwrap();
        let eight = monte_carlo_attack(&setup, 3, 601, 7, 8).unwrap();
        assert_eq!(one.successes, three.successes);
        assert_eq!(one.successes, eight.successes);
        assert!(one.ci_low <= one.ps_empirical && one.ps_empirical <= one.ci_high);
    }

    #[test]
    fn extremal_search_coset_attains_bound() {
        let g = FiniteAbelianGroup::cyclic(14).unwrap();
        let found = extremal_search_two(0.8, 0.8, &g, 4, 1).unwrap();
        assert_abs_diff_eq!(found.peak, 0.68, epsilon = 1e-12);
        assert_eq!(found.left.support(), vec![0, 7]);
        assert_eq!(found.right.support(), vec![0, 7]);
    }

    #[test]
    fn extremal_search_reflected_attains_bound_without_subgroup() {
        // Free pairs meet the two-share bound in any group: placing the
        // second pmf on the negated support of the first aligns every
        // product term at zero. The iterated self-convolution series is
        // what stays strictly below the bound here.
        let g = FiniteAbelianGroup::cyclic(13).unwrap();
        let found = extremal_search_two(0.8, 0.8, &g, 4, 1).unwrap();
        let bound = bounds::mgl_two(0.8, 0.8, 13).unwrap();
        assert_abs_diff_eq!(found.peak, bound, epsilon = 1e-9);
    }

    #[test]
    fn extremal_search_uniform_and_sound() {
        let g = FiniteAbelianGroup::cyclic(14).unwrap();
        let found = extremal_search_two(1.0 / 14.0, 1.0 / 14.0, &g, 2, 5).unwrap();
        assert_abs_diff_eq!(found.peak, 1.0 / 14.0, epsilon = 1e-12);

        for (orders, p, q) in [
            (vec![12usize], 0.3, 0.27),
            (vec![2, 4], 0.55, 0.7),
            (vec![9], 0.2, 0.35),
            (vec![13], 0.6, 0.4),
        ] {
            let g = FiniteAbelianGroup::new(&orders).unwrap();
            let found = extremal_search_two(p, q, &g, 8, 11).unwrap();
            let bound = bounds::mgl_two(p, q, g.order()).unwrap();
            assert!(
                found.peak <= bound + 1e-9,
                "peak {} above bound {} on {orders:?}",
                found.peak,
                bound
            );
            if bounds::floor_reciprocal(p) == bounds::floor_reciprocal(q) {
                assert!(
                    found.peak >= bound - 1e-6,
                    "peak {} misses bound {} on {orders:?}",
                    found.peak,
                    bound
                );
            }
        }
    }

    #[test]
    fn figure_series_matches_closed_forms() {
        // Start pmf on the order-2 subgroup {0, 7}; the series then meets
        // the bound at every order.
        let g14 = FiniteAbelianGroup::cyclic(14).unwrap();
        let p0 = Pmf::from_sparse(&[(0, 0.8), (7, 0.2)], 14).unwrap();
        let rows = figure_series(&g14, &p0, 4).unwrap();
        for row in &rows {
            let expected = 0.5 + 0.5 * 0.6f64.powi(row.d as i32 + 1);
            assert_abs_diff_eq!(row.max_mass, expected, epsilon = 1e-12);
            assert_abs_diff_eq!(row.bound_thm5, expected, epsilon = 1e-12);
        }

        let g13 = FiniteAbelianGroup::cyclic(13).unwrap();
        let p0 = Pmf::flat_top(0.8, 13).unwrap();
        let rows = figure_series(&g13, &p0, 3).unwrap();
        assert_abs_diff_eq!(rows[0].max_mass, 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(rows[1].max_mass, 0.64, epsilon = 1e-12);
        for row in &rows[1..] {
            assert!(row.max_mass < row.bound_thm5 - 1e-9);
        }
    }

    #[test]
    fn figure_series_rejects_mismatched_pmf() {
        let g = FiniteAbelianGroup::cyclic(14).unwrap();
        let p0 = Pmf::flat_top(0.8, 13).unwrap();
        assert!(figure_series(&g, &p0, 2).is_err());
    }
}
