//! Mrs. Gerber style min-entropy bounds for sums of shares, and the
//! success-probability bounds built on top of them.
//!
//! Conventions: `p` values are maximum masses exp(-H_inf) of individual
//! shares, so they live in [1/M, 1]. Scalar bounds on exp(-H_inf) of the
//! share sum are probabilities. Leakage quantities fed to the success
//! bounds are in bits, matching the asymptotic constants; entropy helpers
//! speak nats like the rest of the crate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LN_2: f64 = std::f64::consts::LN_2;
const P_TOLERANCE: f64 = 1e-9;

/// floor(1/p) with a 1e-12 guard so that p = 1/k lands on k exactly even
/// after rounding noise.
pub fn floor_reciprocal(p: f64) -> usize {
    debug_assert!(p > 0.0);
    (1.0 / p + 1e-12).floor() as usize
}

/// Per-share maximum masses over a common alphabet, sorted ascending, with
/// the derived branch parameters used by every bound here: k = floor(1/p_0)
/// and r = largest index with p_r <= 1/k.
#[derive(Clone, Debug)]
pub struct ShareLeakage {
    p: Vec<f64>,
    m_alphabet: usize,
    k: usize,
    r: usize,
}

impl ShareLeakage {
    pub fn new(p_values: &[f64], m_alphabet: usize) -> Result<Self> {
        if m_alphabet < 2 {
            return Err(Error::domain(format!(
                "alphabet size {m_alphabet} must be at least 2"
            )));
        }
        if p_values.is_empty() {
            return Err(Error::validation("at least one share is required"));
        }
        let lo = 1.0 / m_alphabet as f64;
        let mut p = Vec::with_capacity(p_values.len());
        for &v in p_values {
            if !v.is_finite() || v < lo - P_TOLERANCE || v > 1.0 + P_TOLERANCE {
                return Err(Error::domain(format!(
                    "share maximum mass {v} outside [1/{m_alphabet}, 1]"
                )));
            }
            p.push(v.clamp(lo, 1.0));
        }
        p.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        let k = floor_reciprocal(p[0]);
        let cap = 1.0 / k as f64 + 1e-12;
        let r = p.iter().rposition(|&v| v <= cap).expect("p[0] <= 1/k");
        Ok(Self {
            p,
            m_alphabet,
            k,
            r,
        })
    }

    /// Masses sorted ascending.
    pub fn p_values(&self) -> &[f64] {
        &self.p
    }

    pub fn alphabet(&self) -> usize {
        self.m_alphabet
    }

    /// Number of shares minus one.
    pub fn d(&self) -> usize {
        self.p.len() - 1
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn r(&self) -> usize {
        self.r
    }
}

fn clamp_prob(raw: f64, m_alphabet: usize) -> f64 {
    raw.clamp(1.0 / m_alphabet as f64, 1.0)
}

/// Largest possible maximum mass of X_0 + X_1 given the two shares' maximum
/// masses. Two regimes: matching floors use the bilinear flat-top formula,
/// mismatched floors degrade to min(p, q).
pub fn mgl_two(p: f64, q: f64, m_alphabet: usize) -> Result<f64> {
    let shares = ShareLeakage::new(&[p, q], m_alphabet)?;
    let [p, q] = [shares.p[0], shares.p[1]];
    let k = shares.k as f64;
    let raw = if q <= 1.0 / shares.k as f64 + 1e-12 {
        // Both masses in [1/(k+1), 1/k]; remainders 1-kp are clamped at 0
        // against rounding dust on the branch boundary.
        k * p * q + (1.0 - k * p).max(0.0) * (1.0 - k * q).max(0.0)
    } else {
        p.min(q)
    };
    Ok(clamp_prob(raw, m_alphabet))
}

fn product_form(shares: &ShareLeakage, coefficient: f64) -> f64 {
    let k1 = (shares.k + 1) as f64;
    let mut prod = 1.0;
    for &p in &shares.p[..=shares.r] {
        prod *= (k1 * p - 1.0).max(0.0);
    }
    1.0 / k1 + coefficient * prod / k1
}

/// General multi-share bound on the maximum mass of X_0 + ... + X_d:
/// 1/(k+1) + k^r/(k+1) * prod_{i<=r} ((k+1) p_i - 1).
pub fn mgl_multi(shares: &ShareLeakage) -> f64 {
    let raw = product_form(shares, (shares.k as f64).powi(shares.r as i32));
    clamp_prob(raw, shares.m_alphabet)
}

/// Parity of the r index, which selects the refined coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Clone, Copy, Debug)]
pub struct RefinedBound {
    pub value: f64,
    pub parity: Parity,
}

/// Refined multi-share bound: same product, coefficient 1/(k+1) when r is
/// even and k/(k+1) when r is odd. Unconditionally valid for sums of
/// independent shares; as a bound on conditional min-entropy given leakage
/// it additionally needs the near-uniform posterior hypothesis (see
/// [`crate::channels::hypothesis_check`]).
pub fn mgl_refined(shares: &ShareLeakage) -> RefinedBound {
    let (coefficient, parity) = if shares.r % 2 == 0 {
        (1.0, Parity::Even)
    } else {
        (shares.k as f64, Parity::Odd)
    };
    let raw = product_form(shares, coefficient);
    RefinedBound {
        value: clamp_prob(raw, shares.m_alphabet),
        parity,
    }
}

/// Leading Taylor constant C_d relating the masked leakage bound (bits) to
/// the product of per-share leakages (bits): general form
/// ((M-1) ln 2)^d, refined form (ln 2)^d for even d and (M-1)(ln 2)^d for
/// odd d.
pub fn asymptotic_constant(m_alphabet: usize, d: usize, refined: bool) -> Result<f64> {
    if m_alphabet < 2 {
        return Err(Error::domain(format!(
            "alphabet size {m_alphabet} must be at least 2"
        )));
    }
    let m1 = (m_alphabet - 1) as f64;
    Ok(if refined {
        let base = LN_2.powi(d as i32);
        if d % 2 == 0 {
            base
        } else {
            m1 * base
        }
    } else {
        (m1 * LN_2).powi(d as i32)
    })
}

/// Exact multi-trace success bound: min(1, 2^(m * i_inf_bits) / M).
pub fn success_bound_corollary(m: u64, i_inf_bits: f64, m_alphabet: usize) -> f64 {
    let i = i_inf_bits.max(0.0);
    let exponent = m as f64 * i - (m_alphabet as f64).log2();
    exponent.exp2().min(1.0)
}

/// First-order expansion of the success bound:
/// 1/M + m * C_d / M * prod_i I_inf(X_i; Y_i), leakages in bits.
pub fn success_bound_approx(
    m: u64,
    share_leakages_bits: &[f64],
    m_alphabet: usize,
    refined: bool,
) -> Result<f64> {
    if share_leakages_bits.is_empty() {
        return Err(Error::validation("at least one share leakage is required"));
    }
    if let Some(&bad) = share_leakages_bits.iter().find(|&&v| !(v >= 0.0)) {
        return Err(Error::domain(format!("leakage {bad} must be nonnegative")));
    }
    let d = share_leakages_bits.len() - 1;
    let c = asymptotic_constant(m_alphabet, d, refined)?;
    let prod: f64 = share_leakages_bits.iter().product();
    let m_f = m_alphabet as f64;
    Ok((1.0 / m_f + m as f64 * c * prod / m_f).min(1.0))
}

/// Coefficient A_d = sqrt(M-1) (2 ln 2)^((d+1)/2) / M of the
/// mutual-information based bound.
pub fn prior_art_coefficient(m_alphabet: usize, d: usize) -> Result<f64> {
    if m_alphabet < 2 {
        return Err(Error::domain(format!(
            "alphabet size {m_alphabet} must be at least 2"
        )));
    }
    let m_f = m_alphabet as f64;
    Ok((m_f - 1.0).sqrt() * (2.0 * LN_2).powf((d as f64 + 1.0) / 2.0) / m_f)
}

/// Mutual-information based success bound:
/// 1/M + sqrt(m) * A_d * sqrt(prod_i I(X_i; Y_i)), leakages in bits.
pub fn success_bound_prior_art(m: u64, mi_bits: &[f64], m_alphabet: usize) -> Result<f64> {
    if mi_bits.is_empty() {
        return Err(Error::validation("at least one share leakage is required"));
    }
    if let Some(&bad) = mi_bits.iter().find(|&&v| !(v >= 0.0)) {
        return Err(Error::domain(format!("leakage {bad} must be nonnegative")));
    }
    let d = mi_bits.len() - 1;
    let a = prior_art_coefficient(m_alphabet, d)?;
    let prod: f64 = mi_bits.iter().product();
    let m_f = m_alphabet as f64;
    Ok((1.0 / m_f + (m as f64).sqrt() * a * prod.sqrt()).min(1.0))
}

/// Turns a conditional min-entropy lower bound (nats) into a leakage upper
/// bound: I_inf(X; Y) <= log M - H_inf(X|Y), in nats.
pub fn leakage_from_entropy_bound(h_inf_nats: f64, m_alphabet: usize) -> Result<f64> {
    if m_alphabet < 1 {
        return Err(Error::domain("alphabet must be nonempty"));
    }
    let log_m = (m_alphabet as f64).ln();
    if !h_inf_nats.is_finite() || h_inf_nats < -P_TOLERANCE || h_inf_nats > log_m + P_TOLERANCE {
        return Err(Error::domain(format!(
            "conditional min-entropy {h_inf_nats} outside [0, log {m_alphabet}]"
        )));
    }
    Ok((log_m - h_inf_nats).max(0.0))
}

/// Everything the CLI reports for one bound evaluation. Field names are a
/// stable interface; `bound_thm5`/`bound_thm7` are the general and refined
/// maximum-mass bounds, `i_inf_bound_bits` the leakage bound derived from
/// whichever of the two is valid for the setting, and the `ps_*` fields the
/// success-probability bounds at `m` traces.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundReport {
    #[serde(rename = "M")]
    pub m_alphabet: usize,
    pub d: usize,
    pub m: u64,
    pub p_values: Vec<f64>,
    pub k: usize,
    pub r: usize,
    pub parity: Parity,
    pub bound_thm5: f64,
    pub bound_thm7: f64,
    pub mgl_two: Option<f64>,
    pub h_thm5_bits: f64,
    pub h_thm7_bits: f64,
    pub i_inf_bound_bits: f64,
    pub share_i_inf_bits: Vec<f64>,
    pub mi_bits: Vec<f64>,
    pub ps_cor1: f64,
    pub ps_cor1_approx: f64,
    pub ps_prop1: f64,
    pub refined_conditionally_valid: bool,
    pub subgroup_order_k_plus_1_exists: bool,
}

impl BoundReport {
    pub const CSV_HEADER: &'static str =
        "M,d,m,k,r,bound_thm5,bound_thm7,i_inf_bound_bits,ps_cor1,ps_prop1";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.m_alphabet,
            self.d,
            self.m,
            self.k,
            self.r,
            crate::format_significant(self.bound_thm5, 12),
            crate::format_significant(self.bound_thm7, 12),
            crate::format_significant(self.i_inf_bound_bits, 12),
            crate::format_significant(self.ps_cor1, 12),
            crate::format_significant(self.ps_prop1, 12),
        )
    }
}

/// Builds the full report for a share configuration. `mi_bits` defaults to
/// the per-share maximal leakages log2(M p_i), which upper-bound mutual
/// information and keep the prior-art column a valid (if looser) bound.
/// `refined_conditionally_valid` states that the near-uniform posterior
/// hypothesis was checked for the per-share channels; it selects which
/// maximum-mass bound feeds the leakage and success columns.
pub fn bound_report(
    shares: &ShareLeakage,
    m: u64,
    mi_bits: Option<&[f64]>,
    refined_conditionally_valid: bool,
) -> Result<BoundReport> {
    let m_alphabet = shares.alphabet();
    let log2_m = (m_alphabet as f64).log2();
    let thm5 = mgl_multi(shares);
    let refined = mgl_refined(shares);
    let h5_bits = -thm5.log2();
    let h7_bits = -refined.value.log2();
    let share_i_inf_bits: Vec<f64> = shares
        .p_values()
        .iter()
        .map(|&p| (log2_m + p.log2()).max(0.0))
        .collect();
    let mi_bits: Vec<f64> = match mi_bits {
        Some(v) => {
            if v.len() != shares.p_values().len() {
                return Err(Error::validation(format!(
                    "expected {} mutual-information values, got {}",
                    shares.p_values().len(),
                    v.len()
                )));
            }
            v.to_vec()
        }
        None => share_i_inf_bits.clone(),
    };
    let i_inf_bound_bits = if refined_conditionally_valid {
        log2_m - h7_bits
    } else {
        log2_m - h5_bits
    };
    let ps_cor1 = success_bound_corollary(m, i_inf_bound_bits, m_alphabet);
    let ps_cor1_approx = success_bound_approx(
        m,
        &share_i_inf_bits,
        m_alphabet,
        refined_conditionally_valid,
    )?;
    let ps_prop1 = success_bound_prior_art(m, &mi_bits, m_alphabet)?;
    let mgl_two_value = if shares.d() == 1 {
        Some(mgl_two(
            shares.p_values()[0],
            shares.p_values()[1],
            m_alphabet,
        )?)
    } else {
        None
    };
    Ok(BoundReport {
        m_alphabet,
        d: shares.d(),
        m,
        p_values: shares.p_values().to_vec(),
        k: shares.k(),
        r: shares.r(),
        parity: refined.parity,
        bound_thm5: thm5,
        bound_thm7: refined.value,
        mgl_two: mgl_two_value,
        h_thm5_bits: h5_bits,
        h_thm7_bits: h7_bits,
        i_inf_bound_bits,
        share_i_inf_bits,
        mi_bits,
        ps_cor1,
        ps_cor1_approx,
        ps_prop1,
        refined_conditionally_valid,
        subgroup_order_k_plus_1_exists: m_alphabet % (shares.k() + 1) == 0,
    })
}
