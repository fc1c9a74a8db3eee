//! Flat `key = value` experiment configuration (TOML syntax, no tables).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bench::data::{DataFormat, LabelMapping, LoadOptions};
use crate::error::{Result, SketchError};
use crate::optim::{HessianScheme, OptConfig};
use crate::problem::Loss;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaPolicy {
    Manual,
    ConvexAuto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    NewtonCg,
    NewtonMr,
    TrustRegion,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::NewtonCg => "newton_cg",
            Method::NewtonMr => "newton_mr",
            Method::TrustRegion => "trust_region",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VmvInstance {
    Random,
    /// Identical rows with opposite signs in the two halves, so `AᵀB = 0`.
    Cancellation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub seeds: usize,
    pub out: String,

    /// `"synth"` for the planted generator, otherwise a file path.
    pub dataset: String,
    pub format: DataFormat,
    pub delimiter: String,
    pub has_header: bool,
    pub label_mapping: LabelMapping,
    pub standardize: bool,
    pub synth_n: usize,
    pub synth_d: usize,
    /// Defaults to `synth_d` when absent.
    pub synth_heavy_rows: Option<usize>,
    pub synth_heavy_scale: f64,

    pub methods: Vec<Method>,
    pub schemes: Vec<String>,
    pub sample_size: usize,
    /// Overrides `sample_size` with `round(fraction·n)` when set.
    pub sample_fraction: Option<f64>,
    pub loss: String,
    pub lambda_policy: LambdaPolicy,
    pub lambda: f64,
    pub max_outer: usize,
    pub max_oracle_calls: f64,
    pub grad_tol: f64,
    pub inner_cap: usize,
    pub inner_tol: f64,

    pub lp_n: usize,
    pub lp_d: usize,
    pub p: f64,
    pub sizes: Vec<usize>,
    pub all_heavy: bool,
    pub zero_residual: bool,
    pub solver_tol: f64,

    pub vmv_n: usize,
    pub vmv_d: usize,
    pub ks: Vec<usize>,
    pub reps: usize,
    pub instance: VmvInstance,

    pub embed_rows: Option<usize>,
    pub jl_cols: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let opt = OptConfig::default();
        Self {
            seed: 0,
            seeds: 1,
            out: "bench_out".into(),
            dataset: "synth".into(),
            format: DataFormat::Csv,
            delimiter: ",".into(),
            has_header: false,
            label_mapping: LabelMapping::Auto,
            standardize: true,
            synth_n: 1000,
            synth_d: 10,
            synth_heavy_rows: None,
            synth_heavy_scale: 1e3,
            methods: vec![Method::NewtonMr],
            schemes: vec!["Uniform".into(), "LS".into(), "Full".into()],
            sample_size: 100,
            sample_fraction: None,
            loss: "nlls".into(),
            lambda_policy: LambdaPolicy::Manual,
            lambda: 1e-3,
            max_outer: opt.max_outer,
            max_oracle_calls: opt.max_oracle_calls,
            grad_tol: 1e-4,
            inner_cap: opt.inner_cap,
            inner_tol: opt.inner_tol,
            lp_n: 100,
            lp_d: 50,
            p: 1.0,
            sizes: vec![2, 4, 6, 8, 10, 20],
            all_heavy: true,
            zero_residual: false,
            solver_tol: 1e-10,
            vmv_n: 50,
            vmv_d: 5,
            ks: vec![16, 32, 64, 128],
            reps: 1,
            instance: VmvInstance::Random,
            embed_rows: None,
            jl_cols: None,
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| SketchError::Config(one_line(&e.to_string())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SketchError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("config is plain data")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SketchError::Config(m));
        if self.seeds == 0 {
            return bad("seeds must be at least 1".into());
        }
        if self.delimiter.len() != 1 {
            return bad(format!("delimiter must be a single byte, got {:?}", self.delimiter));
        }
        if self.loss_family().is_none() {
            return bad(format!("unknown loss {:?}", self.loss));
        }
        for s in &self.schemes {
            if HessianScheme::parse(s).is_none() {
                return bad(format!("unknown scheme {s:?}"));
            }
        }
        if let Some(f) = self.sample_fraction {
            if !(f > 0.0 && f <= 1.0) {
                return bad("sample_fraction must lie in (0, 1]".into());
            }
        }
        if self.p.is_nan() || self.p < 1.0 {
            return bad(format!("p must be in [1, inf], got {}", self.p));
        }
        if self.reps == 0 || self.ks.contains(&0) || self.sizes.contains(&0) {
            return bad("reps, ks and sizes must be positive".into());
        }
        if !(self.lambda >= 0.0) {
            return bad("lambda must be nonnegative".into());
        }
        Ok(())
    }

    pub fn loss_family(&self) -> Option<Loss> {
        Loss::parse(&self.loss)
    }

    pub fn hessian_schemes(&self) -> Vec<HessianScheme> {
        self.schemes.iter().filter_map(|s| HessianScheme::parse(s)).collect()
    }

    pub fn load_options(&self) -> LoadOptions {
        LoadOptions {
            format: self.format,
            delimiter: self.delimiter.as_bytes()[0],
            has_header: self.has_header,
            labels: self.label_mapping,
            standardize: self.standardize,
        }
    }

    pub fn opt_config(&self, scheme: HessianScheme, n: usize, seed: u64) -> OptConfig {
        let t = match self.sample_fraction {
            Some(f) => ((f * n as f64).round() as usize).max(1),
            None => self.sample_size,
        };
        OptConfig {
            scheme,
            sample_size: t,
            max_outer: self.max_outer,
            max_oracle_calls: self.max_oracle_calls,
            inner_cap: self.inner_cap,
            inner_tol: self.inner_tol,
            grad_tol: self.grad_tol,
            seed,
            ..OptConfig::default()
        }
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}
