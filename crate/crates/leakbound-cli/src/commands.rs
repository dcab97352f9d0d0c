//! One function per subcommand, each a thin adapter: resolve inputs into
//! library calls, then render the library's numbers as CSV or JSON with 12
//! significant digits. No bound or measure is computed in this crate.

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use leakbound::channels::{self, GaussianLeakageModel, QuadratureSpec};
use leakbound::bounds::{self, BoundReport, ShareLeakage};
use leakbound::format_significant;
use leakbound::group::FiniteAbelianGroup;
use leakbound::info::{self, DiscreteChannel, JointFinite};
use leakbound::oracle::{self, MaskedSetup, ShareChannels};
use leakbound::pmf::Pmf;
use leakbound::{Error, Result};

const LN_2: f64 = std::f64::consts::LN_2;
const DIGITS: usize = 12;

/// Trace counts swept by the bound-comparison tables.
const COMPARE_GRID: [u64; 13] = [
    1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000,
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WhichFigure {
    /// Iterated self-convolution over Z_14 (subgroup-supported start)
    Z14,
    /// Same start over Z_13, where no proper subgroup exists
    Z13,
    /// Near-uniform start over Z_5, tracking the refined bound
    Z5,
    /// Success-bound comparison at masking order 1
    CompareD1,
    /// Success-bound comparison at masking order 2
    CompareD2,
}

/// What the entropy subcommand measures.
pub enum EntropySource {
    Pmf(Pmf),
    Channel(DiscreteChannel),
    Model(GaussianLeakageModel),
}

#[derive(Serialize)]
struct MeasureRow {
    measure: &'static str,
    alpha: Option<f64>,
    value_bits: f64,
}

fn measure_csv(rows: &[MeasureRow]) -> String {
    let mut out = String::from("measure,alpha,value_bits\n");
    for row in rows {
        let alpha = row
            .alpha
            .map_or(String::new(), |a| format_significant(a, DIGITS));
        out.push_str(&format!(
            "{},{},{}\n",
            row.measure,
            alpha,
            format_significant(row.value_bits, DIGITS)
        ));
    }
    out
}

fn render<T: Serialize>(rows: &T, format: Format, csv: impl FnOnce() -> String) -> Result<String> {
    match format {
        Format::Csv => Ok(csv()),
        Format::Json => serde_json::to_string_pretty(rows)
            .map(|s| s + "\n")
            .map_err(|e| Error::validation(format!("serialization: {e}"))),
    }
}

/// Entropy and leakage measures in bits. Channels are evaluated under the
/// uniform prior; `alphas` adds Renyi / Arimoto / Sibson rows of those
/// orders next to the order-infinity ones.
pub fn entropy(source: &EntropySource, alphas: &[f64], format: Format) -> Result<String> {
    let mut rows = Vec::new();
    match source {
        EntropySource::Pmf(p) => {
            rows.push(MeasureRow {
                measure: "H_inf",
                alpha: None,
                value_bits: p.min_entropy() / LN_2,
            });
            for &a in alphas {
                rows.push(MeasureRow {
                    measure: "H_alpha",
                    alpha: Some(a),
                    value_bits: p.renyi_entropy(a)? / LN_2,
                });
            }
        }
        EntropySource::Channel(c) => {
            let joint = JointFinite::new(Pmf::uniform(c.inputs())?, c.clone())?;
            rows.push(MeasureRow {
                measure: "H_inf",
                alpha: None,
                value_bits: info::conditional_min_entropy(&joint) / LN_2,
            });
            for &a in alphas {
                rows.push(MeasureRow {
                    measure: "H_alpha",
                    alpha: Some(a),
                    value_bits: info::arimoto_conditional_entropy(&joint, a)? / LN_2,
                });
            }
            for &a in alphas {
                rows.push(MeasureRow {
                    measure: "I_alpha",
                    alpha: Some(a),
                    value_bits: info::sibson_information(&joint, a)? / LN_2,
                });
            }
            let support: Vec<usize> = (0..c.inputs()).collect();
            rows.push(MeasureRow {
                measure: "I_inf",
                alpha: None,
                value_bits: info::max_information(c, &support)? / LN_2,
            });
        }
        EntropySource::Model(m) => {
            if !alphas.is_empty() {
                return Err(Error::validation(
                    "alpha sweeps need a pmf or a discrete channel",
                ));
            }
            let quad = QuadratureSpec::default();
            rows.push(MeasureRow {
                measure: "H_inf",
                alpha: None,
                value_bits: channels::gaussian_conditional_min_entropy(m, &quad)? / LN_2,
            });
            rows.push(MeasureRow {
                measure: "I_inf",
                alpha: None,
                value_bits: channels::gaussian_max_information(m, &quad)? / LN_2,
            });
        }
    }
    render(&rows, format, || measure_csv(&rows))
}

/// Full bound report for per-share maximal masses `p` at `m` traces.
pub fn bound(
    m_alphabet: usize,
    p: &[f64],
    m: u64,
    mi_bits: Option<&[f64]>,
    assume_hypothesis: bool,
    format: Format,
) -> Result<String> {
    let shares = ShareLeakage::new(p, m_alphabet)?;
    let report = bounds::bound_report(&shares, m, mi_bits, assume_hypothesis)?;
    render(&report, format, || {
        format!("{}\n{}\n", BoundReport::CSV_HEADER, report.csv_row())
    })
}

#[derive(Serialize)]
struct CompareRow {
    m: u64,
    ps_cor1: f64,
    ps_cor1_approx: f64,
    ps_prop1: f64,
}

/// Emits one of the reference tables. The z-tables iterate a fixed
/// single-share pmf and print its running maximal mass next to both bounds;
/// `d_max` overrides the default depth. The compare tables sweep trace
/// counts for the 256-ary complement channel at masking order 1 or 2.
pub fn figures(which: WhichFigure, d_max: Option<usize>, format: Format) -> Result<String> {
    match which {
        WhichFigure::Z14 => z_table(14, d_max.unwrap_or(14), format),
        WhichFigure::Z13 => z_table(13, d_max.unwrap_or(14), format),
        WhichFigure::Z5 => z_table(5, d_max.unwrap_or(5), format),
        WhichFigure::CompareD1 | WhichFigure::CompareD2 => {
            if d_max.is_some() {
                return Err(Error::validation(
                    "--d-max applies to the z14/z13/z5 tables only",
                ));
            }
            let d = if which == WhichFigure::CompareD1 { 1 } else { 2 };
            compare_table(d, format)
        }
    }
}

fn z_table(order: usize, d_max: usize, format: Format) -> Result<String> {
    let group = FiniteAbelianGroup::cyclic(order)?;
    // Z_14 and Z_13 share the start pmf 0.8@0, 0.2@7: the support is the
    // order-2 subgroup of Z_14 and generates all of Z_13. Z_5 starts from
    // the flat-top with p = 1/4, one step away from uniform.
    let p0 = match order {
        5 => Pmf::flat_top(0.25, 5)?,
        _ => Pmf::from_sparse(&[(0, 0.8), (7, 0.2)], order)?,
    };
    let rows = oracle::figure_series(&group, &p0, d_max)?;
    render(&rows, format, || {
        let mut out = String::from("d,max_mass,bound_thm5,bound_thm7\n");
        for row in &rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.d,
                format_significant(row.max_mass, DIGITS),
                format_significant(row.bound_thm5, DIGITS),
                format_significant(row.bound_thm7, DIGITS)
            ));
        }
        out
    })
}

fn compare_table(d: usize, format: Format) -> Result<String> {
    let m_alphabet = 256;
    let channel = channels::toy_complement_channel(m_alphabet)?;
    let joint = JointFinite::new(Pmf::uniform(m_alphabet)?, channel.clone())?;
    let p_share = (-info::conditional_min_entropy(&joint)).exp();
    let mi_bits = vec![info::mutual_information(&joint) / LN_2; d + 1];
    // The complement channel's posteriors sit exactly at 1/(M-1), so the
    // refined route is admissible and the report uses it.
    let refined_ok = channels::discrete_hypothesis_check(&channel)?.holds;
    let shares = ShareLeakage::new(&vec![p_share; d + 1], m_alphabet)?;
    let mut rows = Vec::with_capacity(COMPARE_GRID.len());
    for &m in &COMPARE_GRID {
        let report = bounds::bound_report(&shares, m, Some(&mi_bits), refined_ok)?;
        rows.push(CompareRow {
            m,
            ps_cor1: report.ps_cor1,
            ps_cor1_approx: report.ps_cor1_approx,
            ps_prop1: report.ps_prop1,
        });
    }
    render(&rows, format, || {
        let mut out = String::from("m,ps_cor1,ps_cor1_approx,ps_prop1\n");
        for row in &rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.m,
                format_significant(row.ps_cor1, DIGITS),
                format_significant(row.ps_cor1_approx, DIGITS),
                format_significant(row.ps_prop1, DIGITS)
            ));
        }
        out
    })
}

/// Per-share observation model replicated across all d+1 shares.
pub enum ShareModel {
    Discrete(DiscreteChannel),
    Gaussian(GaussianLeakageModel),
}

#[derive(Serialize)]
struct SimulateRow {
    m: usize,
    trials: u64,
    successes: u64,
    ps_empirical: f64,
    ci_low: f64,
    ci_high: f64,
    ps_bound: f64,
}

/// Monte-Carlo MAP attacks over a sweep of trace counts, next to the
/// success bound derived from per-share conditional min-entropies.
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    group: FiniteAbelianGroup,
    d: usize,
    share: ShareModel,
    m_values: &[usize],
    trials: u64,
    seed: u64,
    workers: usize,
    format: Format,
) -> Result<String> {
    if m_values.is_empty() {
        return Err(Error::validation("at least one trace count is required"));
    }
    let m_alphabet = group.order();
    let p_share = match &share {
        ShareModel::Discrete(c) => {
            let joint = JointFinite::new(Pmf::uniform(c.inputs())?, c.clone())?;
            (-info::conditional_min_entropy(&joint)).exp()
        }
        ShareModel::Gaussian(g) => {
            (-channels::gaussian_conditional_min_entropy(g, &QuadratureSpec::default())?).exp()
        }
    };
    let shares = ShareLeakage::new(&vec![p_share; d + 1], m_alphabet)?;
    let h_sum_nats = -bounds::mgl_multi(&shares).ln();
    let i_bound_bits = bounds::leakage_from_entropy_bound(h_sum_nats, m_alphabet)? / LN_2;
    let setup = MaskedSetup::new(
        group,
        match share {
            ShareModel::Discrete(c) => ShareChannels::Discrete(vec![c; d + 1]),
            ShareModel::Gaussian(g) => ShareChannels::Gaussian(vec![g; d + 1]),
        },
    )?;
    let mut rows = Vec::with_capacity(m_values.len());
    for &m in m_values {
        let result = oracle::monte_carlo_attack(&setup, m, trials, seed, workers)?;
        rows.push(SimulateRow {
            m,
            trials: result.trials,
            successes: result.successes,
            ps_empirical: result.ps_empirical,
            ci_low: result.ci_low,
            ci_high: result.ci_high,
            ps_bound: bounds::success_bound_corollary(m as u64, i_bound_bits, m_alphabet),
        });
    }
    render(&rows, format, || {
        let mut out = String::from("m,trials,ps_empirical,ci_low,ci_high,ps_bound\n");
        for row in &rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.m,
                row.trials,
                format_significant(row.ps_empirical, DIGITS),
                format_significant(row.ci_low, DIGITS),
                format_significant(row.ci_high, DIGITS),
                format_significant(row.ps_bound, DIGITS)
            ));
        }
        out
    })
}
