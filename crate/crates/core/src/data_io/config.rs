//! `key = value` experiment files.
//!
//! Top-level keys describe the case and sweep; each `[method]` section adds
//! one trainer, starting from the published defaults for that case. Lines
//! starting with `#` are comments.
//!
//! ```text
//! case = 1
//! k_grid = 2..256 geometric
//! replicas = 5
//!
//! [arff]
//! iterations = 1000
//!
//! [fixed_rff]
//! sigma_omega = 1
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::baselines::{FixedRffConfig, SgdConfig};
use crate::error::{Error, Result};
use crate::experiments::{
    format_k_grid, parse_k_grid, CaseId, ExperimentConfig, MethodKind, MethodParams, MethodSpec,
    SigmaSweepConfig,
};
use crate::sampler::{AdaptiveCovConfig, SamplerConfig};

#[derive(Debug)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Debug)]
struct Section {
    kind: MethodKind,
    line: usize,
    entries: BTreeMap<String, Entry>,
}

#[derive(Debug, Default)]
struct RawConfig {
    top: BTreeMap<String, Entry>,
    sections: Vec<Section>,
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<RawConfig> {
    let mut raw = RawConfig::default();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match line.find('#') {
            Some(p) => &line[..p],
            None => line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| parse_error(line_no, "unterminated section header"))?
                .trim();
            let kind = MethodKind::from_str(name).map_err(|e| parse_error(line_no, e))?;
            raw.sections.push(Section {
                kind,
                line: line_no,
                entries: BTreeMap::new(),
            });
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_error(line_no, "expected `key = value`"))?;
        let key = key.trim().to_string();
        let value = value.trim().trim_matches('"').to_string();
        if key.is_empty() {
            return Err(parse_error(line_no, "empty key"));
        }
        let table = match raw.sections.last_mut() {
            Some(s) => &mut s.entries,
            None => &mut raw.top,
        };
        if table.contains_key(&key) {
            return Err(parse_error(line_no, format!("duplicate key `{key}`")));
        }
        table.insert(
            key,
            Entry {
                value,
                line: line_no,
            },
        );
    }
    Ok(raw)
}

struct Reader<'a> {
    entries: &'a mut BTreeMap<String, Entry>,
}

impl Reader<'_> {
    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<T>()
                .map(Some)
                .map_err(|_| parse_error(e.line, format!("bad value `{}` for `{key}`", e.value))),
        }
    }

    fn take_bool(&mut self, key: &str) -> Result<Option<bool>> {
        self.take::<bool>(key)
    }

    fn finish(self) -> Result<()> {
        match self.entries.iter().next() {
            None => Ok(()),
            Some((k, e)) => Err(parse_error(e.line, format!("unknown key `{k}`"))),
        }
    }
}

/// Parses an experiment file. `case_hint` is used when the file has no
/// `case` key; a file value wins.
pub fn parse_config(text: &str, case_hint: Option<CaseId>) -> Result<ExperimentConfig> {
    let mut raw = tokenize(text)?;
    let mut top = Reader {
        entries: &mut raw.top,
    };
    let case = match top.entries.remove("case") {
        Some(e) => CaseId::from_str(&e.value).map_err(|m| parse_error(e.line, m))?,
        None => case_hint.ok_or_else(|| Error::validation("case", "missing (set `case = 1..4`)"))?,
    };
    let mut config = ExperimentConfig::defaults(case);
    if let Some(e) = top.entries.remove("k_grid") {
        config.k_grid = parse_k_grid(&e.value).map_err(|m| parse_error(e.line, m))?;
    }
    if let Some(v) = top.take("n_train")? {
        config.n_train = v;
    }
    if let Some(v) = top.take("n_test")? {
        config.n_test = v;
    }
    if let Some(v) = top.take("replicas")? {
        config.replicas = v;
    }
    if let Some(v) = top.take("seed")? {
        config.seed = v;
    }
    if let Some(v) = top.take_bool("checkpoints")? {
        config.checkpoints = v;
    }
    top.finish()?;

    if !raw.sections.is_empty() {
        config.methods = raw
            .sections
            .iter_mut()
            .map(|s| parse_method(case, s))
            .collect::<Result<_>>()?;
    }
    config.validate()?;
    Ok(config)
}

fn parse_method(case: CaseId, section: &mut Section) -> Result<MethodSpec> {
    let mut spec = MethodSpec::defaults(case, section.kind);
    let mut r = Reader {
        entries: &mut section.entries,
    };
    if let Some(name) = r.take::<String>("name")? {
        spec.name = name;
    }
    spec.params = match spec.params {
        MethodParams::Sampler(c) => MethodParams::Sampler(read_sampler(c, section.kind, section.line, &mut r)?),
        MethodParams::FixedRff(mut c) => {
            if let Some(v) = r.take("sigma_omega")? {
                c.sigma_omega = v;
            }
            if let Some(v) = r.take("lambda")? {
                c.lambda = v;
            }
            MethodParams::FixedRff(c)
        }
        MethodParams::Sgd(mut c) => {
            if let Some(v) = r.take("dt")? {
                c.dt = v;
            }
            if let Some(v) = r.take("iterations")? {
                c.iterations = v;
            }
            if let Some(v) = r.take("batch_size")? {
                c.batch_size = v;
            }
            if let Some(v) = r.take("init_sigma")? {
                c.init_sigma = v;
            }
            if let Some(v) = r.take("loss_every")? {
                c.loss_every = v;
            }
            MethodParams::Sgd(c)
        }
    };
    r.finish()?;
    Ok(spec)
}

fn read_sampler(
    mut c: SamplerConfig,
    kind: MethodKind,
    line: usize,
    r: &mut Reader<'_>,
) -> Result<SamplerConfig> {
    if let Some(delta) = r.take::<f64>("delta")? {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::validation("delta", "must be positive"));
        }
        c = c.with_delta(delta);
    }
    let iterations = r.take::<usize>("iterations")?;
    let sampling_time = r.take::<f64>("sampling_time")?;
    match (iterations, sampling_time) {
        (Some(_), Some(_)) => {
            return Err(parse_error(line, "give either `iterations` or `sampling_time`, not both"))
        }
        (Some(m), None) => c = c.with_iterations(m),
        (None, Some(t)) => c.sampling_time = t,
        (None, None) => {}
    }
    if let Some(v) = r.take("gamma")? {
        c.gamma = v;
    }
    if let Some(v) = r.take("lambda")? {
        c.lambda = v;
    }
    if let Some(v) = r.take("m")? {
        c.refresh_every = v;
    }
    let t0 = r.take::<usize>("t0")?;
    let omega_max = r.take::<f64>("omega_max")?;
    if kind == MethodKind::ArffAdaptiveCov {
        c.adaptive_cov = Some(AdaptiveCovConfig {
            burn_in: t0.unwrap_or(c.iterations() / 10),
            omega_max: omega_max.unwrap_or(f64::INFINITY),
        });
    } else if t0.is_some() || omega_max.is_some() {
        return Err(Error::validation(
            if t0.is_some() { "t0" } else { "omega_max" },
            "only valid in an [arff_adaptive_cov] section",
        ));
    }
    Ok(c)
}

pub fn load_config(path: &Path, case_hint: Option<CaseId>) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, case_hint)
}

/// Writes every field so that `parse_config(dump_config(c))` returns `c`.
pub fn dump_config(config: &ExperimentConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "case = {}", config.case);
    let _ = writeln!(s, "k_grid = {}", format_k_grid(&config.k_grid));
    let _ = writeln!(s, "n_train = {}", config.n_train);
    let _ = writeln!(s, "n_test = {}", config.n_test);
    let _ = writeln!(s, "replicas = {}", config.replicas);
    let _ = writeln!(s, "seed = {}", config.seed);
    let _ = writeln!(s, "checkpoints = {}", config.checkpoints);
    for m in &config.methods {
        let _ = writeln!(s, "\n[{}]", m.kind);
        let _ = writeln!(s, "name = {}", m.name);
        match &m.params {
            MethodParams::Sampler(c) => {
                let _ = writeln!(s, "delta = {:?}", c.delta);
                let _ = writeln!(s, "sampling_time = {:?}", c.sampling_time);
                let _ = writeln!(s, "gamma = {:?}", c.gamma);
                let _ = writeln!(s, "lambda = {:?}", c.lambda);
                let _ = writeln!(s, "m = {}", c.refresh_every);
                if let Some(ac) = &c.adaptive_cov {
                    let _ = writeln!(s, "t0 = {}", ac.burn_in);
                    let _ = writeln!(s, "omega_max = {:?}", ac.omega_max);
                }
            }
            MethodParams::FixedRff(FixedRffConfig {
                sigma_omega,
                lambda,
                ..
            }) => {
                let _ = writeln!(s, "sigma_omega = {sigma_omega:?}");
                let _ = writeln!(s, "lambda = {lambda:?}");
            }
            MethodParams::Sgd(SgdConfig {
                dt,
                iterations,
                batch_size,
                init_sigma,
                loss_every,
                ..
            }) => {
                let _ = writeln!(s, "dt = {dt:?}");
                let _ = writeln!(s, "iterations = {iterations}");
                let _ = writeln!(s, "batch_size = {batch_size}");
                let _ = writeln!(s, "init_sigma = {init_sigma:?}");
                let _ = writeln!(s, "loss_every = {loss_every}");
            }
        }
    }
    s
}

/// Parses a σ_ω sweep file: top-level keys only.
pub fn parse_sigma_config(text: &str) -> Result<SigmaSweepConfig> {
    let mut raw = tokenize(text)?;
    if let Some(s) = raw.sections.first() {
        return Err(parse_error(s.line, "a sigma sweep file takes no sections"));
    }
    let mut r = Reader {
        entries: &mut raw.top,
    };
    let mut c = SigmaSweepConfig::default();
    if let Some(e) = r.entries.remove("sigmas") {
        c.sigmas = e
            .value
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| parse_error(e.line, format!("bad sigma list `{}`", e.value)))?;
    }
    if let Some(v) = r.take("dim")? {
        c.dim = v;
    }
    if let Some(v) = r.take("k")? {
        c.num_features = v;
    }
    if let Some(v) = r.take("n_train")? {
        c.n_train = v;
    }
    if let Some(v) = r.take("n_test")? {
        c.n_test = v;
    }
    if let Some(v) = r.take("lambda")? {
        c.lambda = v;
    }
    if let Some(v) = r.take("noise_std")? {
        c.noise_std = v;
    }
    if let Some(v) = r.take("replicas")? {
        c.replicas = v;
    }
    if let Some(v) = r.take("seed")? {
        c.seed = v;
    }
    r.finish()?;
    c.validate()?;
    Ok(c)
}

pub fn load_sigma_config(path: &Path) -> Result<SigmaSweepConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sigma_config(&text)
}

pub fn dump_sigma_config(c: &SigmaSweepConfig) -> String {
    let sigmas: Vec<String> = c.sigmas.iter().map(|v| format!("{v:?}")).collect();
    format!(
        "sigmas = {}\ndim = {}\nk = {}\nn_train = {}\nn_test = {}\nlambda = {:?}\nnoise_std = {:?}\nreplicas = {}\nseed = {}\n",
        sigmas.join(", "),
        c.dim,
        c.num_features,
        c.n_train,
        c.n_test,
        c.lambda,
        c.noise_std,
        c.replicas,
        c.seed
    )
}
