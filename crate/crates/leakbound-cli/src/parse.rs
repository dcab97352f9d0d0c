//! Literal grammars shared by flags and config files: group specs, pmf /
//! channel / model literals, and comma-separated number lists. Parsing
//! stops here; all numeric validation happens in the library constructors.

use std::collections::BTreeMap;

use leakbound::channels::{self, GaussianLeakageModel};
use leakbound::group::FiniteAbelianGroup;
use leakbound::info::DiscreteChannel;
use leakbound::pmf::Pmf;
use leakbound::{Error, Result};

/// Comma-separated cyclic orders, e.g. "14" or "2,2,2,2".
pub fn group_spec(s: &str) -> Result<FiniteAbelianGroup> {
    let orders = usize_list(s)?;
    FiniteAbelianGroup::new(&orders)
}

/// "uniform:N", a JSON mass array, or a sparse {"index": mass} object whose
/// length is `alphabet` (largest index + 1 when absent).
pub fn pmf_literal(s: &str, alphabet: Option<usize>) -> Result<Pmf> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("uniform:") {
        let n: usize = number(rest, "uniform pmf size")?;
        if alphabet.is_some_and(|m| m != n) {
            return Err(Error::validation(format!(
                "pmf literal uniform:{n} conflicts with --M {}",
                alphabet.unwrap()
            )));
        }
        return Pmf::uniform(n);
    }
    if s.starts_with('[') {
        let masses: Vec<f64> = json(s, "pmf array")?;
        if alphabet.is_some_and(|m| m != masses.len()) {
            return Err(Error::validation(format!(
                "pmf literal has {} masses but --M is {}",
                masses.len(),
                alphabet.unwrap()
            )));
        }
        return Pmf::new(masses);
    }
    if s.starts_with('{') {
        let sparse: BTreeMap<String, f64> = json(s, "sparse pmf object")?;
        let mut entries = Vec::with_capacity(sparse.len());
        for (key, mass) in &sparse {
            entries.push((number::<usize>(key, "sparse pmf index")?, *mass));
        }
        let implied = entries.iter().map(|&(i, _)| i + 1).max().unwrap_or(0);
        return Pmf::from_sparse(&entries, alphabet.unwrap_or(implied));
    }
    Err(Error::validation(format!(
        "pmf literal '{s}' is not uniform:N, a JSON array, or a sparse object"
    )))
}

/// "bsc:<eps>", "complement:<M>", "identity:<M>", or a JSON row matrix.
pub fn channel_literal(s: &str) -> Result<DiscreteChannel> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("bsc:") {
        return channels::bsc(number(rest, "bsc crossover")?);
    }
    if let Some(rest) = s.strip_prefix("complement:") {
        return channels::toy_complement_channel(number(rest, "complement alphabet")?);
    }
    if let Some(rest) = s.strip_prefix("identity:") {
        return channels::identity_channel(number(rest, "identity alphabet")?);
    }
    if s.starts_with('[') {
        return DiscreteChannel::new(json(s, "channel matrix")?);
    }
    Err(Error::validation(format!(
        "channel literal '{s}' is not bsc:<eps>, complement:<M>, identity:<M>, or a JSON matrix"
    )))
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelLiteral {
    leak: Vec<f64>,
    sigma: f64,
}

/// "hw:<bits>:<sigma>", "identity:<M>:<sigma>", or a JSON object with
/// "leak" and "sigma" fields.
pub fn model_literal(s: &str) -> Result<GaussianLeakageModel> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("hw:") {
        let (bits, sigma) = pair(rest, "hw model")?;
        return GaussianLeakageModel::hamming_weight(bits, sigma);
    }
    if let Some(rest) = s.strip_prefix("identity:") {
        let (alphabet, sigma) = pair(rest, "identity model")?;
        return GaussianLeakageModel::identity_leak(alphabet, sigma);
    }
    if s.starts_with('{') {
        let raw: ModelLiteral = json(s, "model object")?;
        return GaussianLeakageModel::new(raw.leak, raw.sigma);
    }
    Err(Error::validation(format!(
        "model literal '{s}' is not hw:<bits>:<sigma>, identity:<M>:<sigma>, or a JSON object"
    )))
}

/// Comma-separated floats; empty input gives an empty list.
pub fn f64_list(s: &str) -> Result<Vec<f64>> {
    list(s)
}

/// Comma-separated nonnegative integers; empty input gives an empty list.
pub fn usize_list(s: &str) -> Result<Vec<usize>> {
    list(s)
}

fn list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|t| number(t, "list entry")).collect()
}

fn number<T: std::str::FromStr>(s: &str, what: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.trim()
        .parse()
        .map_err(|e| Error::validation(format!("{what} '{}': {e}", s.trim())))
}

fn json<T: serde::de::DeserializeOwned>(s: &str, what: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::validation(format!("{what}: {e}")))
}

fn pair<T: std::str::FromStr>(rest: &str, what: &str) -> Result<(T, f64)>
where
    T::Err: std::fmt::Display,
{
    let Some((first, second)) = rest.split_once(':') else {
        return Err(Error::validation(format!(
            "{what} needs two ':'-separated parameters, got '{rest}'"
        )));
    };
    Ok((number(first, what)?, number(second, what)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_specs() {
        assert_eq!(group_spec("14").unwrap().order(), 14);
        assert_eq!(group_spec("2, 2, 2, 2").unwrap().order(), 16);
        assert!(group_spec("").is_err());
        assert!(group_spec("2,x").is_err());
        assert!(group_spec("1").is_err());
    }

    #[test]
    fn pmf_literals() {
        assert_eq!(pmf_literal("uniform:8", None).unwrap().len(), 8);
        let dense = pmf_literal("[0.8, 0.2]", None).unwrap();
        assert_eq!(dense.mass(0), 0.8);
        let sparse = pmf_literal(r#"{"0": 0.8, "7": 0.2}"#, Some(14)).unwrap();
        assert_eq!(sparse.len(), 14);
        assert_eq!(sparse.mass(7), 0.2);
        // Without --M the length is implied by the largest index.
        assert_eq!(pmf_literal(r#"{"3": 1.0}"#, None).unwrap().len(), 4);
        assert!(pmf_literal("[0.8, 0.2]", Some(3)).is_err());
        assert!(pmf_literal("uniform:8", Some(4)).is_err());
        assert!(pmf_literal("flat:0.8", None).is_err());
        assert!(pmf_literal("[0.5, 0.2]", None).is_err());
    }

    #[test]
    fn channel_literals() {
        assert_eq!(channel_literal("bsc:0.1").unwrap().inputs(), 2);
        assert_eq!(channel_literal("complement:256").unwrap().outputs(), 256);
        assert_eq!(channel_literal("identity:3").unwrap().prob(1, 1), 1.0);
        let m = channel_literal("[[0.5,0.5],[0.0,1.0]]").unwrap();
        assert_eq!(m.prob(1, 1), 1.0);
        assert!(channel_literal("bec:0.1").is_err());
        assert!(channel_literal("[[0.5,0.4],[0.0,1.0]]").is_err());
    }

    #[test]
    fn model_literals() {
        assert_eq!(model_literal("hw:4:2").unwrap().alphabet(), 16);
        assert_eq!(model_literal("identity:6:1.5").unwrap().alphabet(), 6);
        let j = model_literal(r#"{"leak": [0.0, 1.0, 3.0], "sigma": 0.5}"#).unwrap();
        assert_eq!(j.leak(), [0.0, 1.0, 3.0]);
        assert!(model_literal("hw:4").is_err());
        assert!(model_literal(r#"{"leak": [0.0], "sigma": 1.0, "bias": 2}"#).is_err());
        assert!(model_literal("laplace:1:1").is_err());
    }

    #[test]
    fn number_lists() {
        assert_eq!(f64_list("0.8,0.2").unwrap(), vec![0.8, 0.2]);
        assert_eq!(usize_list(" 1, 10 ,100 ").unwrap(), vec![1, 10, 100]);
        assert!(usize_list("1,,3").is_err());
        assert_eq!(f64_list("").unwrap(), Vec::<f64>::new());
    }
}
