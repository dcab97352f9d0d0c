//! Probability mass functions on a finite alphabet, Renyi entropies,
//! the majorization preorder, and additive convolution over a group.
//!
//! All entropies are returned in nats. Zero masses never enter a sum or a
//! logarithm; `0 * log 0 = 0` throughout.

use crate::error::{Error, Result};
use crate::group::FiniteAbelianGroup;

/// Tolerance for pmf normalization and for majorization comparisons.
pub const MASS_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Pmf {
    masses: Vec<f64>,
}

impl Pmf {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::validation("pmf needs at least one outcome"));
        }
        if let Some(&bad) = masses.iter().find(|&&m| !(m >= 0.0) || !m.is_finite()) {
            return Err(Error::validation(format!("mass {bad} is not in [0, 1]")));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::validation(format!(
                "masses sum to {total}, expected 1 within {MASS_TOLERANCE}"
            )));
        }
        Ok(Self { masses })
    }

    /// Dense pmf from (index, mass) pairs; omitted indices are zero and
    /// repeated indices accumulate.
    pub fn from_sparse(entries: &[(usize, f64)], len: usize) -> Result<Self> {
        let mut masses = vec![0.0; len.max(1)];
        for &(i, m) in entries {
            if i >= masses.len() {
                return Err(Error::validation(format!(
                    "sparse index {i} out of range for alphabet of size {len}"
                )));
            }
            masses[i] += m;
        }
        Self::new(masses)
    }

    pub fn uniform(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::validation("pmf needs at least one outcome"));
        }
        Ok(Self {
            masses: vec![1.0 / len as f64; len],
        })
    }

    pub fn point_mass(len: usize, at: usize) -> Result<Self> {
        if at >= len {
            return Err(Error::validation(format!(
                "point mass index {at} out of range for alphabet of size {len}"
            )));
        }
        let mut masses = vec![0.0; len];
        masses[at] = 1.0;
        Ok(Self { masses })
    }

    /// The extremal pmf with maximum mass `p`: k = floor(1/p) outcomes of
    /// mass p, one remainder outcome of mass 1 - k*p, zeros elsewhere.
    pub fn flat_top(p: f64, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::validation("pmf needs at least one outcome"));
        }
        let lo = 1.0 / len as f64;
        if !(p >= lo - MASS_TOLERANCE && p <= 1.0 + MASS_TOLERANCE) {
            return Err(Error::domain(format!(
                "flat-top mass {p} outside [1/{len}, 1]"
            )));
        }
        let p = p.clamp(lo, 1.0);
        let k = crate::bounds::floor_reciprocal(p);
        debug_assert!(k >= 1 && k <= len);
        let mut masses = vec![0.0; len];
        masses[..k].fill(p);
        let remainder = 1.0 - k as f64 * p;
        if k < len {
            masses[k] = remainder.max(0.0);
        }
        Self::new(masses)
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.masses[i]
    }

    pub fn max_mass(&self) -> f64 {
        self.masses.iter().cloned().fold(0.0, f64::max)
    }

    /// Indices carrying strictly positive mass.
    pub fn support(&self) -> Vec<usize> {
        self.masses
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    /// Min-entropy -log max_x p(x), in nats.
    pub fn min_entropy(&self) -> f64 {
        -self.max_mass().ln()
    }

    /// Renyi entropy of order alpha in nats, alpha in (0,1) or (1,inf].
    /// Computed in the log domain so very large orders stay finite.
    pub fn renyi_entropy(&self, alpha: f64) -> Result<f64> {
        check_order(alpha)?;
        if alpha.is_infinite() {
            return Ok(self.min_entropy());
        }
        let ln_max = self.max_mass().ln();
        let scaled: f64 = self
            .masses
            .iter()
            .filter(|&&m| m > 0.0)
            .map(|&m| (alpha * (m.ln() - ln_max)).exp())
            .sum();
        // sum p^alpha = exp(alpha ln_max) * scaled, with scaled in [1, len].
        Ok((alpha * ln_max + scaled.ln()) / (1.0 - alpha))
    }

    /// Masses sorted in descending order.
    pub fn statistical_ordering(&self) -> Vec<f64> {
        let mut sorted = self.masses.clone();
        sorted.sort_by(|a, b| b.partial_cmp(a).expect("masses are finite"));
        sorted
    }
}

fn check_order(alpha: f64) -> Result<()> {
    if alpha.is_nan() || alpha <= 0.0 || alpha == 1.0 {
        return Err(Error::domain(format!(
            "entropy order {alpha} must lie in (0,1) or (1,inf]"
        )));
    }
    Ok(())
}

/// Outcome of comparing two pmfs in the majorization preorder, up to
/// reordering and zero padding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MajorizationOrder {
    /// Identical ordered prefix sums (within tolerance).
    Equal,
    /// Left precedes right: the right pmf majorizes (is more concentrated).
    LeftPrecedes,
    /// Right precedes left: the left pmf majorizes.
    RightPrecedes,
    /// Neither set of prefix sums dominates the other.
    Incomparable,
}

/// Majorization comparison of ordered prefix sums at [`MASS_TOLERANCE`].
pub fn majorization_order(p: &Pmf, q: &Pmf) -> MajorizationOrder {
    let a = p.statistical_ordering();
    let b = q.statistical_ordering();
    let n = a.len().max(b.len());
    let mut pa = 0.0;
    let mut pb = 0.0;
    let mut left_le = true;
    let mut right_le = true;
    for i in 0..n {
        pa += a.get(i).copied().unwrap_or(0.0);
        pb += b.get(i).copied().unwrap_or(0.0);
        if pa > pb + MASS_TOLERANCE {
            left_le = false;
        }
        if pb > pa + MASS_TOLERANCE {
            right_le = false;
        }
    }
    match (left_le, right_le) {
        (true, true) => MajorizationOrder::Equal,
        (true, false) => MajorizationOrder::LeftPrecedes,
        (false, true) => MajorizationOrder::RightPrecedes,
        (false, false) => MajorizationOrder::Incomparable,
    }
}

/// Distribution of X + Y for independent X ~ a, Y ~ b over the group,
/// by direct O(M^2) summation.
pub fn convolve(a: &Pmf, b: &Pmf, group: &FiniteAbelianGroup) -> Result<Pmf> {
    let m = group.order();
    if a.len() != m || b.len() != m {
        return Err(Error::validation(format!(
            "convolution needs pmfs of length {m}, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let neg = group.neg_table();
    let mut out = vec![0.0; m];
    for (x, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for i in 0..m {
            // P(X + Y = x) = sum_i P(X = x + i) P(Y = -i).
            acc += a.mass(group.add_index(x, i)) * b.mass(neg[i]);
        }
        *slot = acc;
    }
    Pmf::new(out)
}

/// Distributions of the (d+1)-fold sums X_0 + ... + X_d of iid copies of
/// `p`, for d = 0..=d_max. Entry d is the (d+1)-fold convolution.
pub fn iterate_convolution(
    p: &Pmf,
    group: &FiniteAbelianGroup,
    d_max: usize,
) -> Result<Vec<Pmf>> {
    let mut out = Vec::with_capacity(d_max + 1);
    out.push(p.clone());
    for d in 1..=d_max {
        let next = convolve(&out[d - 1], p, group)?;
        out.push(next);
    }
    Ok(out)
}
