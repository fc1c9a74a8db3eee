//! Dataset loading, standardization, label mapping and synthetic instances.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SketchError};
use crate::linalg::RMat;
use crate::rng::{derive_seed, normal, normal_vec, rng_from_seed, uniform};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    Csv,
    Libsvm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelMapping {
    /// {0,1} kept, two classes sorted to 0/1, more classes one-vs-rest on
    /// the most frequent class.
    Auto,
    /// Only two-class labels are accepted.
    Binary,
}

#[derive(Clone, Debug)]
pub struct LoadOptions {
    pub format: DataFormat,
    /// Field delimiter for csv; the label is the last field.
    pub delimiter: u8,
    pub has_header: bool,
    pub labels: LabelMapping,
    pub standardize: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self { format: DataFormat::Csv, delimiter: b',', has_header: false, labels: LabelMapping::Auto, standardize: true }
    }
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub a: RMat,
    pub labels: Vec<f64>,
}

pub fn load_dataset(path: &Path, opts: &LoadOptions) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    let ds = parse_dataset(&text, opts)?;
    log::info!("loaded {}: {} rows, {} features", path.display(), ds.a.nrows(), ds.a.ncols());
    Ok(ds)
}

pub fn parse_dataset(text: &str, opts: &LoadOptions) -> Result<Dataset> {
    let (rows, raw_labels) = match opts.format {
        DataFormat::Csv => parse_csv(text, opts.delimiter, opts.has_header)?,
        DataFormat::Libsvm => parse_libsvm(text)?,
    };
    if rows.is_empty() {
        return Err(SketchError::Parse { line: 1, msg: "no data rows".into() });
    }
    let d = rows[0].len();
    let mut a = RMat::from_fn(rows.len(), d, |i, j| rows[i][j]);
    if opts.standardize {
        standardize(&mut a);
    }
    let labels = map_labels(&raw_labels, opts.labels)?;
    Ok(Dataset { a, labels })
}

fn parse_err(line: usize, msg: impl Into<String>) -> SketchError {
    SketchError::Parse { line, msg: msg.into() }
}

fn parse_csv(text: &str, delimiter: u8, has_header: bool) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut width = None;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() < 2 {
            return Err(parse_err(line, "need at least one feature and a label"));
        }
        if *width.get_or_insert(record.len()) != record.len() {
            return Err(parse_err(line, format!("expected {} fields, found {}", width.unwrap_or(0), record.len())));
        }
        let mut vals = Vec::with_capacity(record.len());
        for field in record.iter() {
            let v: f64 = field.parse().map_err(|_| parse_err(line, format!("not a number: {field:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(line, "non-finite value"));
            }
            vals.push(v);
        }
        labels.push(vals.pop().expect("at least two fields"));
        rows.push(vals);
    }
    Ok((rows, labels))
}

fn parse_libsvm(text: &str) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let mut sparse = Vec::new();
    let mut labels = Vec::new();
    let mut d = 0;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label: f64 = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err(line, "missing or invalid label"))?;
        let mut entries = Vec::new();
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| parse_err(line, format!("expected index:value, got {tok:?}")))?;
            let idx: usize = idx.parse().map_err(|_| parse_err(line, format!("bad index {idx:?}")))?;
            if idx == 0 {
                return Err(parse_err(line, "feature indices start at 1"));
            }
            let val: f64 = val.parse().map_err(|_| parse_err(line, format!("bad value {val:?}")))?;
            if !val.is_finite() {
                return Err(parse_err(line, "non-finite value"));
            }
            d = d.max(idx);
            entries.push((idx - 1, val));
        }
        sparse.push(entries);
        labels.push(label);
    }
    let rows = sparse
        .into_iter()
        .map(|entries| {
            let mut row = vec![0.0; d];
            for (j, v) in entries {
                row[j] = v;
            }
            row
        })
        .collect();
    Ok((rows, labels))
}

/// Zero mean and unit (population) variance per column; constant columns
/// become zero.
pub fn standardize(a: &mut RMat) {
    let n = a.nrows() as f64;
    for mut col in a.column_iter_mut() {
        let mean = col.sum() / n;
        col.add_scalar_mut(-mean);
        let sd = (col.norm_squared() / n).sqrt();
        if sd > 1e-12 * (1.0 + mean.abs()) {
            col /= sd;
        } else {
            col.fill(0.0);
        }
    }
}

fn map_labels(raw: &[f64], mode: LabelMapping) -> Result<Vec<f64>> {
    let mut counts: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
    for &v in raw {
        counts.entry(v.to_bits()).or_insert((v, 0)).1 += 1;
    }
    let mut classes: Vec<(f64, usize)> = counts.into_values().collect();
    classes.sort_by(|a, b| a.0.total_cmp(&b.0));
    if classes.iter().all(|(v, _)| *v == 0.0 || *v == 1.0) {
        return Ok(raw.to_vec());
    }
    match (classes.len(), mode) {
        (2, _) => {
            let hi = classes[1].0;
            Ok(raw.iter().map(|&v| if v == hi { 1.0 } else { 0.0 }).collect())
        }
        (k, LabelMapping::Auto) if k > 2 => {
            let major = classes.iter().fold(classes[0], |best, c| if c.1 > best.1 { *c } else { best }).0;
            log::info!("{k} classes: one-vs-rest on class {major}");
            Ok(raw.iter().map(|&v| if v == major { 1.0 } else { 0.0 }).collect())
        }
        (k, _) => Err(SketchError::invalid(format!("cannot map {k} label classes to {{0, 1}}"))),
    }
}

/// Ill-leveraged classification data: `n − heavy_rows` Gaussian rows scaled
/// to norm `√d`, and `heavy_rows` rows of norm `heavy_scale·√d` in random
/// directions. Labels follow a planted logistic model with 10% flipped.
pub fn synth_planted(n: usize, d: usize, heavy_rows: usize, heavy_scale: f64, seed: u64) -> Result<Dataset> {
    if heavy_rows >= n {
        return Err(SketchError::invalid("heavy_rows must be smaller than n"));
    }
    if d == 0 || !(heavy_scale > 0.0) {
        return Err(SketchError::invalid("need d >= 1 and a positive heavy_scale"));
    }
    let mut rng = rng_from_seed(derive_seed(seed, 0));
    let mut heavy_idx: Vec<usize> = Vec::with_capacity(heavy_rows);
    while heavy_idx.len() < heavy_rows {
        let i = (uniform(&mut rng) * n as f64) as usize;
        if !heavy_idx.contains(&i) {
            heavy_idx.push(i);
        }
    }
    let root_d = (d as f64).sqrt();
    let mut a = RMat::zeros(n, d);
    for i in 0..n {
        let mut row = normal_vec(&mut rng, d);
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        let scale = if heavy_idx.contains(&i) { heavy_scale } else { 1.0 } * root_d / norm;
        for v in row.iter_mut() {
            *v *= scale;
        }
        a.row_mut(i).copy_from_slice(&row);
    }
    let mut rng = rng_from_seed(derive_seed(seed, 1));
    let planted: Vec<f64> = (0..d).map(|_| normal(&mut rng) / root_d).collect();
    let labels = (0..n)
        .map(|i| {
            let t: f64 = a.row(i).iter().zip(&planted).map(|(x, w)| x * w).sum();
            let prob = 1.0 / (1.0 + (-t).exp());
            let y = (uniform(&mut rng) < prob) as u8 as f64;
            if uniform(&mut rng) < 0.1 { 1.0 - y } else { y }
        })
        .collect();
    Ok(Dataset { a, labels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::leverage_scores_real;

    fn raw() -> LoadOptions {
        LoadOptions { standardize: false, ..LoadOptions::default() }
    }

    #[test]
    fn tiny_csv() {
        let ds = parse_dataset("1,2,0\n3,4,1\n5,6,0\n", &raw()).unwrap();
        assert_eq!(ds.a.shape(), (3, 2));
        assert_eq!(ds.a[(2, 1)], 6.0);
        assert_eq!(ds.labels, vec![0.0, 1.0, 0.0]);
        let semi = LoadOptions { delimiter: b';', has_header: true, ..raw() };
        let ds = parse_dataset("x;y;label\n1;2;-1\n3;4;1\n", &semi).unwrap();
        assert_eq!(ds.labels, vec![0.0, 1.0]);
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        match parse_dataset("1,2,0\n3,x,1\n", &raw()) {
            Err(SketchError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_dataset("1,2,0\n3,1\n", &raw()), Err(SketchError::Parse { .. })));
        assert!(parse_dataset("", &raw()).is_err());
    }

    #[test]
    fn libsvm_sparse_line() {
        let opts = LoadOptions { format: DataFormat::Libsvm, ..raw() };
        let ds = parse_dataset("1 3:0.5\n0 1:2 # comment\n", &opts).unwrap();
        assert_eq!(ds.a.shape(), (2, 3));
        assert_eq!(ds.a.row(0).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0, 0.5]);
        assert_eq!(ds.labels, vec![1.0, 0.0]);
        match parse_dataset("1 1:2\n1 0:3\n", &opts) {
            Err(SketchError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn multiclass_maps_to_majority() {
        let text = "0,1\n0,2\n0,2\n0,3\n";
        let ds = parse_dataset(text, &raw()).unwrap();
        assert_eq!(ds.labels, vec![0.0, 1.0, 1.0, 0.0]);
        let strict = LoadOptions { labels: LabelMapping::Binary, ..raw() };
        assert!(parse_dataset(text, &strict).is_err());
    }

    #[test]
    fn standardized_columns() {
        let ds = parse_dataset("1,5,0\n2,5,1\n4,5,0\n", &LoadOptions::default()).unwrap();
        let c0 = ds.a.column(0);
        assert!(c0.sum().abs() < 1e-12);
        assert!((c0.norm_squared() / 3.0 - 1.0).abs() < 1e-12);
        assert!(ds.a.column(1).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn planted_leverage_shapes() {
        let flat = synth_planted(2000, 10, 10, 1.0, 1).unwrap();
        let s = leverage_scores_real(&flat.a).unwrap();
        let (lo, hi) = s.iter().fold((f64::MAX, 0.0f64), |(l, h), v| (l.min(*v), h.max(*v)));
        assert!(hi / lo <= 5.0, "{}", hi / lo);
        let heavy = synth_planted(2000, 10, 10, 1e3, 1).unwrap();
        let s = leverage_scores_real(&heavy.a).unwrap();
        let mut sorted = s.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        assert!(sorted[..10].iter().sum::<f64>() / s.iter().sum::<f64>() >= 0.9);
        let again = synth_planted(2000, 10, 10, 1e3, 1).unwrap();
        assert_eq!(again.a, heavy.a);
        assert_eq!(again.labels, heavy.labels);
        assert!(synth_planted(5, 2, 5, 1.0, 0).is_err());
    }
}
