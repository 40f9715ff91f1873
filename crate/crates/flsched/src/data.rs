//! Synthetic problem generation, dataset loading, and partitioning across UEs.

use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opt::loss::LossKind;
use crate::opt::problem::{Matrix, Problem, Regularizer};
use crate::rng::substream;

/// Dataset source description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSource {
    SyntheticGaussian {
        n: usize,
        d: usize,
        /// Distance between the two class means along the first axis, in
        /// units of the (unit) within-class standard deviation.
        separation: f64,
        /// Probability of flipping a label.
        label_noise: f64,
    },
    File {
        path: String,
        format: FileFormat,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FileFormat {
    /// One row per point: label, then d feature values (comma/whitespace).
    Dense,
    /// One row per point: label then `index:value` pairs (1-based indices).
    Sparse,
}

/// How data is spread across the K UEs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum PartitionRule {
    BalancedIid,
    Unbalanced { sizes: Vec<usize> },
    LabelSortedNoniid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub source: DataSource,
    pub partition: PartitionRule,
    pub seed: u64,
}

/// Two Gaussian clusters at ±(separation/2)·e₁ with unit covariance and
/// labels ±1 (flipped with probability `label_noise`). Pure function of its
/// arguments.
pub fn generate_synthetic(
    n: usize,
    d: usize,
    separation: f64,
    label_noise: f64,
    k_users: usize,
    rule: &PartitionRule,
    loss: LossKind,
    reg: Regularizer,
    seed: u64,
) -> Result<Problem> {
    if n < k_users {
        return Err(Error::Dataset(format!("n = {n} < K = {k_users}")));
    }
    if d == 0 {
        return Err(Error::Dataset("need d >= 1".into()));
    }
    let mut rng = substream(seed, 0xda7a);
    let mut cols = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let class: f64 = if i % 2 == 0 { 1.0 } else { -1.0 };
        let mut col: Vec<f64> = (0..d)
            .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
            .collect();
        col[0] += class * separation / 2.0;
        let label = if rng.gen::<f64>() < label_noise { -class } else { class };
        cols.push(col);
        y.push(label);
    }
    let x = Matrix::from_columns(d, &cols)?;
    let partition = partition_data(n, &y, k_users, rule, seed)?;
    let prob = Problem {
        x,
        y,
        loss,
        reg,
        partition,
    };
    prob.validate()?;
    Ok(prob)
}

/// Parse a dense or sparse delimited file into a problem (unpartitioned
/// matrix + labels). Labels are coerced to ±1 for classification losses.
/// Features are standardized to zero mean and unit variance per dimension.
pub fn load_dataset(
    path: &Path,
    format: FileFormat,
    k_users: usize,
    rule: &PartitionRule,
    loss: LossKind,
    reg: Regularizer,
    seed: u64,
) -> Result<Problem> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Dataset(format!("cannot open {}: {e}", path.display())))?;
    let reader = BufReader::new(file);
    let mut rows: Vec<(f64, Vec<(usize, f64)>)> = Vec::new();
    let mut dim = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty());
        let label: f64 = tokens
            .next()
            .ok_or_else(|| Error::Dataset(format!("line {}: empty row", lineno + 1)))?
            .parse()
            .map_err(|_| Error::Dataset(format!("line {}: non-numeric label", lineno + 1)))?;
        let mut feats = Vec::new();
        match format {
            FileFormat::Dense => {
                for (j, tok) in tokens.enumerate() {
                    let v: f64 = tok.parse().map_err(|_| {
                        Error::Dataset(format!("line {}: non-numeric token {tok:?}", lineno + 1))
                    })?;
                    feats.push((j, v));
                }
                if !rows.is_empty() && feats.len() != dim {
                    return Err(Error::Dataset(format!(
                        "line {}: {} features, expected {dim}",
                        lineno + 1,
                        feats.len()
                    )));
                }
                dim = dim.max(feats.len());
            }
            FileFormat::Sparse => {
                for tok in tokens {
                    let (idx, val) = tok.split_once(':').ok_or_else(|| {
                        Error::Dataset(format!("line {}: malformed pair {tok:?}", lineno + 1))
                    })?;
                    let idx: usize = idx.parse().map_err(|_| {
                        Error::Dataset(format!("line {}: non-numeric index {idx:?}", lineno + 1))
                    })?;
                    if idx == 0 {
                        return Err(Error::Dataset(format!(
                            "line {}: sparse indices are 1-based",
                            lineno + 1
                        )));
                    }
                    let val: f64 = val.parse().map_err(|_| {
                        Error::Dataset(format!("line {}: non-numeric value {val:?}", lineno + 1))
                    })?;
                    dim = dim.max(idx);
                    feats.push((idx - 1, val));
                }
            }
        }
        rows.push((label, feats));
    }
    if rows.is_empty() {
        return Err(Error::Dataset("empty file".into()));
    }
    if dim == 0 {
        return Err(Error::Dataset("no features found".into()));
    }
    let n = rows.len();
    let mut cols = vec![vec![0.0; dim]; n];
    let mut y = Vec::with_capacity(n);
    for (i, (label, feats)) in rows.into_iter().enumerate() {
        let label = match loss {
            LossKind::LeastSquares => label,
            _ => {
                if label > 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
        };
        y.push(label);
        for (j, v) in feats {
            cols[i][j] = v;
        }
    }
    standardize(&mut cols, dim);
    let x = Matrix::from_columns(dim, &cols)?;
    let partition = partition_data(n, &y, k_users, rule, seed)?;
    let prob = Problem {
        x,
        y,
        loss,
        reg,
        partition,
    };
    prob.validate()?;
    Ok(prob)
}

/// Zero mean, unit variance per feature (in place; constant features are left
/// centred only).
fn standardize(cols: &mut [Vec<f64>], dim: usize) {
    let n = cols.len() as f64;
    for j in 0..dim {
        let mean = cols.iter().map(|c| c[j]).sum::<f64>() / n;
        let var = cols.iter().map(|c| (c[j] - mean) * (c[j] - mean)).sum::<f64>() / n;
        let sd = var.sqrt();
        for c in cols.iter_mut() {
            c[j] -= mean;
            if sd > 0.0 {
                c[j] /= sd;
            }
        }
    }
}

/// Split point indices {0..n−1} across K UEs under the given rule.
pub fn partition_data(
    n: usize,
    y: &[f64],
    k_users: usize,
    rule: &PartitionRule,
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    if k_users == 0 || n < k_users {
        return Err(Error::Dataset(format!("need 1 <= K <= n, got K={k_users}, n={n}")));
    }
    let assemble = |order: Vec<usize>| -> Vec<Vec<usize>> {
        // Deal contiguous blocks of the given order, sizes as equal as
        // possible (first n mod K cells get one extra point).
        let base = n / k_users;
        let extra = n % k_users;
        let mut out = Vec::with_capacity(k_users);
        let mut cursor = 0;
        for k in 0..k_users {
            let size = base + usize::from(k < extra);
            out.push(order[cursor..cursor + size].to_vec());
            cursor += size;
        }
        out
    };
    match rule {
        PartitionRule::BalancedIid => {
            let mut order: Vec<usize> = (0..n).collect();
            use rand::seq::SliceRandom;
            order.shuffle(&mut substream(seed, 0x9a57));
            Ok(assemble(order))
        }
        PartitionRule::LabelSortedNoniid => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| y[a].partial_cmp(&y[b]).unwrap().then(a.cmp(&b)));
            Ok(assemble(order))
        }
        PartitionRule::Unbalanced { sizes } => {
            if sizes.len() != k_users || sizes.iter().sum::<usize>() != n {
                return Err(Error::Dataset(
                    "unbalanced sizes must have length K and sum to n".into(),
                ));
            }
            if sizes.iter().any(|&s| s == 0) {
                return Err(Error::Dataset("every UE needs at least one point".into()));
            }
            let mut out = Vec::with_capacity(k_users);
            let mut cursor = 0;
            for &s in sizes {
                out.push((cursor..cursor + s).collect());
                cursor += s;
            }
            Ok(out)
        }
    }
}

/// Build a problem from a dataset spec.
pub fn build_problem(
    spec: &DatasetSpec,
    k_users: usize,
    loss: LossKind,
    reg: Regularizer,
) -> Result<Problem> {
    match &spec.source {
        DataSource::SyntheticGaussian {
            n,
            d,
            separation,
            label_noise,
        } => generate_synthetic(
            *n,
            *d,
            *separation,
            *label_noise,
            k_users,
            &spec.partition,
            loss,
            reg,
            spec.seed,
        ),
        DataSource::File { path, format } => load_dataset(
            Path::new(path),
            *format,
            k_users,
            &spec.partition,
            loss,
            reg,
            spec.seed,
        ),
    }
}
