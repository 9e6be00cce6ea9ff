//! Experiment orchestration behind the CLI: instance generation, learner
//! runs with JSON manifests, bound-verification sweeps as CSV, and the
//! deterministic master-seed splitting rule.
//!
//! Seeds: a run has one master seed; every component stream is
//! `split_seed(master, label)` with fixed labels (1000+trial for instances,
//! 2000+trial for distributions, 3000+trial for learner randomness,
//! 4000+trial for oracles). Two runs from equal specs produce identical
//! manifests apart from the `wall_time_ms` field.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::approx::{ptf_approx_prod, write_chain, ApproxParams, ChainBackend};
use crate::boolcore::{parse_dnf, random_dnf, DnfFormula, Point, MAX_EXACT_DIM};
use crate::dist::{perturb, ProductDistribution};
use crate::error::{Error, Result};
use crate::learners::{
    derive_params, learn_dnf_mq_prod, learn_dnf_smoothed, learn_mdnf_prod, learn_mdnf_uniform,
    measure_error, split_seed, ErrorMode, Hypothesis, HypothesisKind, LearnerConfig,
};
use crate::oracles::{ExampleOracle, MembershipOracle};
use crate::recovery::Backend;
use crate::spectrum::{
    exact_mu_transform, exact_uniform_transform, write_spectrum, FnTarget, PointFn,
};
use crate::structural::{bound_degree, term_mu_l1, verify_error_bound, BoundFamily};

/// Env var naming the default output directory.
pub const OUT_DIR_ENV: &str = "DNFLEARN_OUT";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct InstanceSpec {
    pub n: u32,
    pub s: u32,
    pub max_len: u32,
    pub monotone: bool,
    /// Number of independent trials.
    pub count: u32,
}

impl Default for InstanceSpec {
    fn default() -> Self {
        InstanceSpec {
            n: 10,
            s: 3,
            max_len: 3,
            monotone: false,
            count: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DistSpec {
    /// `uniform`, `explicit` (means given), or `smoothed` (means drawn
    /// around `mu_bar` with perturbation radius `c`).
    pub mode: String,
    pub mu: Option<Vec<f64>>,
    pub mu_bar: Option<Vec<f64>>,
}

impl Default for DistSpec {
    fn default() -> Self {
        DistSpec {
            mode: "uniform".to_string(),
            mu: None,
            mu_bar: None,
        }
    }
}

impl DistSpec {
    /// The trial's distribution. `c` is the learner's boundedness constant;
    /// smoothed mode uses it as the perturbation radius.
    pub fn resolve(&self, n: u32, c: f64, seed: u64) -> Result<ProductDistribution> {
        match self.mode.as_str() {
            "uniform" => Ok(ProductDistribution::uniform(n)),
            "explicit" => {
                let mu = self
                    .mu
                    .clone()
                    .ok_or_else(|| Error::InvalidParam("explicit mode needs mu".to_string()))?;
                ProductDistribution::new(mu)
            }
            "smoothed" => {
                let center = self.mu_bar.clone().unwrap_or_else(|| vec![0.0; n as usize]);
                let mut rng = ChaCha12Rng::seed_from_u64(seed);
                perturb(&center, c, &mut rng)
            }
            other => Err(Error::InvalidParam(format!(
                "unknown distribution mode {other:?}"
            ))),
        }
    }
}

/// A fully deterministic experiment description; the TOML config format.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSpec {
    /// `dnf-mq-prod`, `dnf-smoothed`, `mdnf-uniform`, or `mdnf-prod`.
    pub learner: String,
    pub instance: InstanceSpec,
    pub dist: DistSpec,
    pub epsilon: f64,
    pub delta: f64,
    pub c: f64,
    /// `exact` or `sampled`.
    pub backend: String,
    pub seed: u64,
    /// Read the target from this DNF file instead of generating one.
    pub function: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            learner: "dnf-mq-prod".to_string(),
            instance: InstanceSpec::default(),
            dist: DistSpec::default(),
            epsilon: 0.2,
            delta: 0.25,
            c: 1.0,
            backend: "exact".to_string(),
            seed: 0,
            function: None,
            out: None,
        }
    }
}

pub fn load_spec(path: &Path) -> Result<ExperimentSpec> {
    let text = fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| Error::Parse(format!("bad experiment spec: {e}")))
}

pub fn backend_from_str(name: &str) -> Result<Backend> {
    match name {
        "exact" => Ok(Backend::ExactOracle),
        "sampled" => Ok(Backend::Sampled),
        other => Err(Error::InvalidParam(format!("unknown backend {other:?}"))),
    }
}

/// Resolution order for the output directory: spec, env var, cwd.
pub fn out_dir(spec_out: Option<&Path>) -> PathBuf {
    if let Some(p) = spec_out {
        return p.to_path_buf();
    }
    if let Ok(v) = std::env::var(OUT_DIR_ENV) {
        if !v.is_empty() {
            return PathBuf::from(v);
        }
    }
    PathBuf::from(".")
}

fn parse_mu_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad mu value {t:?}")))
        })
        .collect()
}

/// `transform` command: exact spectrum of a DNF file, written in the
/// spectrum wire format.
pub fn run_transform(
    input: &Path,
    mu: Option<&str>,
    degree_cap: Option<u32>,
    w: &mut impl Write,
) -> Result<()> {
    let f = parse_dnf(&fs::read_to_string(input)?)?;
    let spec = match mu {
        None => exact_uniform_transform(&f)?.to_sparse(degree_cap),
        Some(list) => {
            let dist = ProductDistribution::new(parse_mu_list(list)?)?;
            exact_mu_transform(&f, &dist, degree_cap)?
        }
    };
    write_spectrum(w, &spec)
}

/// `gen` command: deterministic random instances, one DNF file per trial.
pub fn run_gen(inst: &InstanceSpec, seed: u64, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for k in 0..inst.count {
        let f = random_dnf(
            inst.n,
            inst.s as usize,
            inst.max_len,
            inst.monotone,
            split_seed(seed, 1000 + k as u64),
        )?;
        let path = dir.join(format!("instance_{k:03}.dnf"));
        fs::write(&path, format!("{f}\n"))?;
        paths.push(path);
    }
    Ok(paths)
}

fn learner_config(spec: &ExperimentSpec, trial: u64) -> Result<LearnerConfig> {
    let mut cfg = LearnerConfig::new(spec.instance.s, spec.epsilon, spec.delta, spec.c)?;
    cfg.backend = backend_from_str(&spec.backend)?;
    cfg.seed = split_seed(spec.seed, 3000 + trial);
    Ok(cfg)
}

fn trial_target(spec: &ExperimentSpec, trial: u64) -> Result<DnfFormula> {
    match &spec.function {
        Some(path) => parse_dnf(&fs::read_to_string(path)?),
        None => random_dnf(
            spec.instance.n,
            spec.instance.s as usize,
            spec.instance.max_len,
            spec.instance.monotone,
            split_seed(spec.seed, 1000 + trial),
        ),
    }
}

fn run_one_learner(
    spec: &ExperimentSpec,
    f: &DnfFormula,
    mu: &ProductDistribution,
    trial: u64,
) -> Result<Hypothesis> {
    let cfg = learner_config(spec, trial)?;
    let ex_seed = split_seed(spec.seed, 4000 + trial);
    match spec.learner.as_str() {
        "dnf-mq-prod" => {
            let mut mq = MembershipOracle::new(f);
            learn_dnf_mq_prod(&mut mq, mu, &cfg)
        }
        "dnf-smoothed" => {
            let mut ex = ExampleOracle::new(f, mu.clone(), ex_seed)?;
            learn_dnf_smoothed(&mut ex, &cfg)
        }
        "mdnf-uniform" => {
            let mut ex = ExampleOracle::new(f, mu.clone(), ex_seed)?;
            learn_mdnf_uniform(&mut ex, &cfg)
        }
        "mdnf-prod" => {
            let mut ex = ExampleOracle::new(f, mu.clone(), ex_seed)?;
            learn_mdnf_prod(&mut ex, &cfg)
        }
        other => Err(Error::InvalidParam(format!("unknown learner {other:?}"))),
    }
}

fn write_hypothesis(h: &Hypothesis, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    match &h.kind {
        HypothesisKind::Clipped(chain) => write_chain(&mut buf, chain)?,
        HypothesisKind::Proper(p) => {
            // proper chains serialize through their coefficient polynomial
            let poly = p.gprime_polynomial()?;
            let mut s = crate::spectrum::SparseSpectrum::new(poly.dim(), poly.basis().clone());
            for (&m, &v) in poly.coeffs() {
                s.insert(m, v);
            }
            write_spectrum(&mut buf, &s)?;
        }
    }
    fs::write(path, buf)?;
    Ok(())
}

/// `learn` command: runs every trial, writes one hypothesis file per trial
/// plus a JSON run manifest, and returns the manifest.
pub fn run_learn(spec: &ExperimentSpec) -> Result<serde_json::Value> {
    if !(spec.c > 0.0 && spec.c <= 1.0) {
        return Err(Error::InvalidParam(format!(
            "need c in (0,1]; got {}",
            spec.c
        )));
    }
    let start = Instant::now();
    let dir = out_dir(spec.out.as_deref());
    fs::create_dir_all(&dir)?;
    let n = spec.instance.n;
    let dp = derive_params(spec.instance.s, spec.epsilon, spec.c, n)?;
    let mut trials = Vec::new();
    for k in 0..spec.instance.count as u64 {
        let f = trial_target(spec, k)?;
        let mu = spec.dist.resolve(n, spec.c, split_seed(spec.seed, 2000 + k))?;
        let h = run_one_learner(spec, &f, &mu, k)?;
        let mode = if n <= MAX_EXACT_DIM {
            ErrorMode::Exact
        } else {
            ErrorMode::Sampled {
                samples: 1_000_000,
                seed: split_seed(spec.seed, 5000 + k),
            }
        };
        let e = measure_error(&h, &f, &mu, mode)?;
        let hpath = dir.join(format!("hypothesis_{k:03}.chain"));
        write_hypothesis(&h, &hpath)?;
        trials.push(json!({
            "trial": k,
            "target": f.to_string(),
            "mu": mu.mu(),
            "error": e.value,
            "error_band": e.band,
            "examples": h.access.examples,
            "queries": h.access.queries,
            "steps": h.steps,
            "variable_set": h.variable_set,
            "variable_count": h.variable_set.map(|m| m.count_ones()),
            "mu_estimate": h.mu_estimate,
            "hypothesis_file": hpath.to_string_lossy(),
        }));
    }
    let manifest = json!({
        "spec": spec,
        "derived": {
            "epsilon_prime": dp.epsilon_prime,
            "degree": dp.degree,
            "gamma": dp.gamma,
        },
        "trials": trials,
        "wall_time_ms": start.elapsed().as_millis() as u64,
    });
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;
    Ok(manifest)
}

pub const BOUNDS_CSV_HEADER: &str = "family,n,c,d,epsilon,scale,gap,lhs,rhs,slack,pass";

/// `verify-bounds` command: sweeps random (f, g, mu) tuples through the
/// error-vs-spectrum-gap inequality and writes one CSV row each; also checks
/// every term's exact mu-basis L1 against its growth bound. Returns whether
/// all rows passed.
pub fn run_verify_bounds(
    count: u32,
    n: u32,
    s: u32,
    epsilon: f64,
    c_values: &[f64],
    seed: u64,
    w: &mut impl Write,
) -> Result<bool> {
    writeln!(w, "{BOUNDS_CSV_HEADER}")?;
    let mut all_pass = true;
    for k in 0..count {
        let f = random_dnf(n, s as usize, 3, false, split_seed(seed, 1000 + k as u64))?;
        let c = c_values[k as usize % c_values.len().max(1)];
        let mu = if c >= 1.0 {
            ProductDistribution::uniform(n)
        } else {
            let mut rng = ChaCha12Rng::seed_from_u64(split_seed(seed, 2000 + k as u64));
            let lim = 1.0 - c;
            let means: Vec<f64> = (0..n).map(|_| rng.gen_range(-lim..=lim)).collect();
            ProductDistribution::new(means)?
        };
        // term L1 contract: term_mu_l1 itself errors past (2-c)^{len/2}
        for t in f.terms() {
            term_mu_l1(t, &mu)?;
        }
        let d = bound_degree(s as f64, epsilon, c)?.min(n);
        let g: Box<dyn PointFn> = match k % 3 {
            // a realistic approximator: spectrum-matching chain on B_d
            0 => {
                let target = exact_mu_transform(&f, &mu, Some(d))?;
                let gamma = epsilon / (2.0 * (2.0 - c).powf(d as f64 / 2.0) * s as f64 + 1.0);
                let p = ApproxParams::new(gamma, 0.25, d, ChainBackend::Exact)?;
                let (chain, _) = ptf_approx_prod(&target, &mu, &p)?;
                Box::new(chain)
            }
            // adversarial: g = -f (lhs = 2, bound must still hold)
            1 => {
                let fc = f.clone();
                Box::new(FnTarget::new(n, move |x: Point| -fc.value(x)))
            }
            // g = f: zero error, zero gap
            _ => Box::new(f.clone()),
        };
        let report = verify_error_bound(
            &f,
            g.as_ref(),
            &mu,
            d,
            &BoundFamily::Dnf {
                s: s as usize,
                epsilon,
            },
        )?;
        all_pass &= report.passes();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            report.family,
            n,
            report.c,
            report.d.map_or(-1i64, |v| v as i64),
            report.epsilon.unwrap_or(f64::NAN),
            report.scale,
            report.gap,
            report.lhs,
            report.rhs,
            report.slack,
            report.passes(),
        )?;
    }
    Ok(all_pass)
}

/// `eval` command: value of a DNF file at a point, or its exact disagreement
/// with a hypothesis chain file under a product distribution.
pub fn run_eval(
    function: &Path,
    hypothesis: Option<&Path>,
    mu: Option<&str>,
    point: Option<&str>,
    w: &mut impl Write,
) -> Result<()> {
    let f = parse_dnf(&fs::read_to_string(function)?)?;
    let n = f.dim();
    let dist = match mu {
        None => ProductDistribution::uniform(n),
        Some(list) => ProductDistribution::new(parse_mu_list(list)?)?,
    };
    if let Some(bits_text) = point {
        let bits = u64::from_str_radix(bits_text.trim_start_matches("0x"), 16)
            .map_err(|_| Error::Parse(format!("bad point {bits_text:?}")))?;
        let x = Point::new(n, bits)?;
        write!(w, "f({bits:#x}) = {}", f.value(x))?;
        if let Some(hpath) = hypothesis {
            let chain = crate::approx::read_chain(&mut std::io::BufReader::new(
                fs::File::open(hpath)?,
            ))?;
            write!(w, "  h({bits:#x}) = {}", crate::boolcore::sign_pm(chain.value(x)))?;
        }
        writeln!(w)?;
        return Ok(());
    }
    let hpath = hypothesis.ok_or_else(|| {
        Error::InvalidParam("eval needs --point or --hypothesis".to_string())
    })?;
    let chain =
        crate::approx::read_chain(&mut std::io::BufReader::new(fs::File::open(hpath)?))?;
    if n > MAX_EXACT_DIM {
        return Err(Error::InvalidParam(
            "exact eval needs n <= 24".to_string(),
        ));
    }
    let mut err = 0.0;
    for x in Point::all(n) {
        if crate::boolcore::sign_pm(chain.value(x)) != f.value(x) {
            err += dist.point_probability(x)?;
        }
    }
    writeln!(w, "error = {err}")?;
    Ok(())
}

/// Exit code for an error, per the CLI contract: 2 for contract violations,
/// 3 for budget exhaustion, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::ContractViolation(_) => 2,
        Error::BudgetExhausted(_) => 3,
        _ => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmpdir(tag: &str) -> PathBuf {
        let d = std::env::temp_dir().join(format!("dnflearn-harness-{tag}-{}", std::process::id()));
        fs::create_dir_all(&d).unwrap();
        d
    }

    #[test]
    fn transform_or_known_values() {
        let dir = tmpdir("transform");
        let input = dir.join("or.dnf");
        fs::write(&input, "n=2; 1 | 2\n").unwrap();
        let mut buf = Vec::new();
        run_transform(&input, None, None, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5); // header + 4 coefficients
        assert!(lines.contains(&"0 0.5"));
        assert!(lines.contains(&"3 -0.5"));
    }

    #[test]
    fn gen_is_deterministic_and_parseable() {
        let dir = tmpdir("gen");
        let inst = InstanceSpec {
            n: 8,
            s: 3,
            max_len: 3,
            monotone: true,
            count: 4,
        };
        let paths = run_gen(&inst, 7, &dir).unwrap();
        assert_eq!(paths.len(), 4);
        let first = fs::read_to_string(&paths[0]).unwrap();
        let again = run_gen(&inst, 7, &dir).unwrap();
        assert_eq!(first, fs::read_to_string(&again[0]).unwrap());
        let f = parse_dnf(&first).unwrap();
        assert_eq!(f.dim(), 8);
        assert!(f.is_monotone());
    }

    #[test]
    fn learn_manifest_reproducible() {
        let dir = tmpdir("learn");
        let mut spec = ExperimentSpec::default();
        spec.instance.n = 8;
        spec.instance.s = 2;
        spec.instance.count = 2;
        spec.epsilon = 0.2;
        spec.seed = 3;
        spec.out = Some(dir.clone());
        let m1 = run_learn(&spec).unwrap();
        let m2 = run_learn(&spec).unwrap();
        let strip = |mut v: serde_json::Value| {
            v.as_object_mut().unwrap().remove("wall_time_ms");
            v
        };
        assert_eq!(strip(m1.clone()), strip(m2));
        // recorded errors respect epsilon with the exact backend
        for t in m1["trials"].as_array().unwrap() {
            assert!(t["error"].as_f64().unwrap() <= 0.2);
        }
        // hypothesis files parse back
        let hpath = PathBuf::from(m1["trials"][0]["hypothesis_file"].as_str().unwrap());
        let chain = crate::approx::read_chain(&mut std::io::BufReader::new(
            fs::File::open(hpath).unwrap(),
        ))
        .unwrap();
        assert_eq!(chain.dim(), 8);
    }

    #[test]
    fn learn_rejects_bad_c() {
        let mut spec = ExperimentSpec::default();
        spec.c = 1.5;
        assert!(matches!(run_learn(&spec), Err(Error::InvalidParam(_))));
    }

    #[test]
    fn verify_bounds_sweep_passes() {
        let mut buf = Vec::new();
        let ok = run_verify_bounds(12, 8, 2, 0.1, &[1.0, 0.5, 0.25], 5, &mut buf).unwrap();
        assert!(ok);
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 13);
        assert!(text.lines().skip(1).all(|l| l.ends_with("true")));
    }

    #[test]
    fn verify_bounds_empty_sweep() {
        let mut buf = Vec::new();
        let ok = run_verify_bounds(0, 8, 2, 0.1, &[1.0], 5, &mut buf).unwrap();
        assert!(ok);
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1);
    }

    #[test]
    fn eval_point_and_error() {
        let dir = tmpdir("eval");
        let fpath = dir.join("f.dnf");
        fs::write(&fpath, "n=4; 1 | 2\n").unwrap();
        let mut buf = Vec::new();
        run_eval(&fpath, None, None, Some("0x3"), &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().contains("= 1"));
        // end-to-end: learn then eval the written hypothesis
        let mut spec = ExperimentSpec::default();
        spec.instance.n = 4;
        spec.instance.s = 1;
        spec.function = Some(fpath.clone());
        spec.out = Some(dir.clone());
        spec.epsilon = 0.1;
        let m = run_learn(&spec).unwrap();
        let hpath = PathBuf::from(m["trials"][0]["hypothesis_file"].as_str().unwrap());
        let mut buf = Vec::new();
        run_eval(&fpath, Some(&hpath), None, None, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let err: f64 = text.trim().strip_prefix("error = ").unwrap().parse().unwrap();
        assert!(err <= 0.1);
    }

    #[test]
    fn spec_toml_roundtrip() {
        let spec = ExperimentSpec::default();
        let text = toml::to_string(&spec).unwrap();
        let back: ExperimentSpec = toml::from_str(&text).unwrap();
        assert_eq!(back.learner, spec.learner);
        // partial configs fill in defaults
        let partial: ExperimentSpec =
            toml::from_str("learner = \"mdnf-uniform\"\nepsilon = 0.15\n").unwrap();
        assert_eq!(partial.learner, "mdnf-uniform");
        assert_eq!(partial.instance.n, 10);
    }
}
