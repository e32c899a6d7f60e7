use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde_json::{json, Value};

use fdci::adaptive::{adapt_loop, RefinePolicy};
use fdci::bayes::{credible_band, PosteriorBand, PosteriorConfig};
use fdci::models::{
    clustered_grid, linearized_regression, reference_values, solve_bvp, BlackScholesModel, FixationModel,
    InteriorLayerModel, LinearBvpModel, NonlinearBvp, PendulumModel, ProxyMode,
};
use fdci::nonlinear::NewtonReport;
use fdci::RngState;

use crate::args::{
    BlackScholesArgs, Command, CommonArgs, FixationArgs, Format, GridKind, InteriorArgs, LinearArgs, PendulumArgs,
    RefineArgs, RefineModel, Resolver,
};
use crate::output::{Metadata, RunOutput};
use crate::UsageError;

/// Stream reserved for drawing clustered grid points, apart from the
/// per-draw substreams of the sampler.
const GRID_STREAM: u64 = u64::MAX;

/// Settings shared by every subcommand after merging flags and config.
#[derive(Debug, Clone)]
pub struct Settings {
    pub draws: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub single_thread: bool,
    pub timestamp: bool,
}

impl Settings {
    pub fn resolve(common: &CommonArgs, r: &Resolver, env_seed: Option<&str>) -> Result<Self, UsageError> {
        let draws = r.or(common.draws, "draws", 50_500)?;
        let burn_in = r.or(common.burn_in, "burn-in", 500)?;
        if burn_in >= draws {
            return Err(UsageError(format!(
                "--burn-in ({burn_in}) must be smaller than --draws ({draws})"
            )));
        }
        let a = r.value(common.a, "a")?;
        let b = r.value(common.b, "b")?;
        for (name, v) in [("a", a), ("b", b)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(UsageError(format!("--{name} must be positive, got {v}")));
                }
            }
        }
        Ok(Self {
            draws,
            burn_in,
            seed: r.seed(common.seed, env_seed)?,
            a,
            b,
            out: r.value(common.out.clone(), "out")?,
            format: r.choice(common.format, "format", Format::Json)?,
            single_thread: common.single_thread,
            timestamp: !common.no_timestamp,
        })
    }

    /// `a` defaults to `m/2` and `b` to `a + 1`.
    pub fn posterior(&self, m: usize) -> PosteriorConfig {
        let a = self.a.unwrap_or(m as f64 / 2.0);
        let b = self.b.unwrap_or(a + 1.0);
        PosteriorConfig::for_interior_count(m, self.seed)
            .with_draws(self.draws, self.burn_in)
            .with_prior(a, b)
    }

    fn metadata(&self, model: &str, cfg: &PosteriorConfig, parameters: BTreeMap<String, Value>) -> Metadata {
        Metadata {
            model: model.to_string(),
            parameters,
            seed: self.seed,
            draws: cfg.draws,
            burn_in: cfg.burn_in,
            a: cfg.a,
            b: cfg.b,
            timestamp: self.timestamp.then(|| {
                SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0)
            }),
            summary: BTreeMap::new(),
        }
    }
}

fn object(v: Value) -> BTreeMap<String, Value> {
    match v {
        Value::Object(map) => map.into_iter().collect(),
        _ => BTreeMap::new(),
    }
}

fn with_band(metadata: Metadata, x: Vec<f64>, fd: Vec<f64>, band: PosteriorBand<f64>) -> RunOutput {
    RunOutput {
        metadata,
        x,
        fd_solution: fd,
        posterior_mean: band.mean,
        ci_lower: band.lower,
        ci_upper: band.upper,
        width: band.width,
        scaled_width: band.scaled_width,
        exact: None,
        abs_error: None,
        rel_error: None,
        truncation_leading: None,
        reference: None,
        proxy_mean: None,
        proxy_limit_sum: None,
    }
}

fn abs_errors(fd: &[f64], exact: &[f64]) -> Vec<f64> {
    fd.iter().zip(exact).map(|(a, b)| (a - b).abs()).collect()
}

fn rel_errors(abs: &[f64], exact: &[f64]) -> Vec<Option<f64>> {
    abs.iter()
        .zip(exact)
        .map(|(&e, &x)| (x != 0.0).then(|| e / x.abs()))
        .collect()
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

fn newton_summary(rep: &NewtonReport<f64>) -> Value {
    json!({
        "newton_iterations": rep.iterations,
        "newton_converged": rep.converged,
        "newton_initial_residual": rep.initial_residual,
        "newton_final_residual": rep.final_residual(),
    })
}

pub fn execute(cmd: &Command, env_seed: Option<&str>) -> Result<(Settings, RunOutput)> {
    let common = cmd.common();
    let resolver = Resolver::new(common)?;
    let settings = Settings::resolve(common, &resolver, env_seed)?;
    let run = || match cmd {
        Command::LinearBvp(a) => linear_bvp(a, &resolver, &settings),
        Command::Pendulum(a) => pendulum(a, &resolver, &settings),
        Command::InteriorLayer(a) => interior_layer(a, &resolver, &settings),
        Command::BlackScholes(a) => black_scholes(a, &resolver, &settings),
        Command::Fixation(a) => fixation(a, &resolver, &settings),
        Command::Refine(a) => refine(a, &resolver, &settings),
    };
    let output = if settings.single_thread {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .context("starting the sampling thread pool")?;
        pool.install(run)?
    } else {
        run()?
    };
    if let Err((name, len)) = output.check_lengths() {
        anyhow::bail!("internal: array `{name}` has length {len}, expected {}", output.len());
    }
    Ok((settings, output))
}

fn linear_bvp(args: &LinearArgs, r: &Resolver, s: &Settings) -> Result<RunOutput> {
    let m = r.or(args.m, "m", 99)?;
    if m == 0 {
        return Err(UsageError("--m must be at least 1".into()).into());
    }
    let mdl = LinearBvpModel::<f64>::new(m).context("models::uniform_grid")?;
    let h = mdl.h()?;
    let fd = mdl.solve().context("linalg::thomas_solve")?;
    let problem = mdl.regression().context("models::linear_bvp_assemble")?;
    let cfg = s.posterior(m);
    let band = credible_band(&problem, &cfg, &cfg.rng()).context("bayes::credible_band")?;
    let x = mdl.grid().interior().to_vec();
    let exact: Vec<f64> = x.iter().map(|&v| LinearBvpModel::exact(v)).collect();
    let abs = abs_errors(&fd, &exact);
    let mean_gap = max_of(&abs_errors(&band.mean, &fd));
    let mut meta = s.metadata("linear-bvp", &cfg, object(json!({ "m": m, "h": h })));
    meta.summary = object(json!({
        "max_abs_error": max_of(&abs),
        "max_width": band.max_width(),
        "mean_vs_fd_sup": mean_gap,
    }));
    let mut out = with_band(meta, x.clone(), fd, band);
    out.truncation_leading = Some(x.iter().map(|&v| LinearBvpModel::truncation_leading(v, h)).collect());
    out.rel_error = Some(rel_errors(&abs, &exact));
    out.abs_error = Some(abs);
    out.exact = Some(exact);
    Ok(out)
}

fn clustered<M: NonlinearBvp<f64>>(base: M, extra: usize, seed: u64) -> Result<M> {
    if extra == 0 {
        return Err(UsageError("--extra-points must be at least 1 for a clustered grid".into()).into());
    }
    let mut rng = RngState::with_stream(seed, GRID_STREAM);
    let grid = clustered_grid(base.grid(), extra, &mut rng).context("models::clustered_grid")?;
    Ok(base.regridded(grid)?)
}

/// Solve, band and summarize a nonlinear problem.
fn nonlinear_run<M: NonlinearBvp<f64>>(
    mdl: &M,
    s: &Settings,
    mut parameters: BTreeMap<String, Value>,
) -> Result<(RunOutput, Vec<f64>)> {
    let name = mdl.name();
    let rep = solve_bvp(mdl).with_context(|| format!("nonlinear::newton_solve ({name})"))?;
    let problem = linearized_regression(mdl, &rep.solution).context("models::linearized_regression")?;
    let m = mdl.grid().m();
    let cfg = s.posterior(m);
    let band = credible_band(&problem, &cfg, &cfg.rng()).context("bayes::credible_band")?;
    parameters.insert("interior_nodes".into(), json!(m));
    let mut meta = s.metadata(name, &cfg, parameters);
    meta.summary = object(newton_summary(&rep));
    meta.summary.insert("max_width".into(), json!(band.max_width()));
    let reference = reference_values(mdl).unwrap_or_default();
    let out = with_band(meta, mdl.grid().interior().to_vec(), rep.solution, band);
    Ok((out, reference))
}

fn pendulum(args: &PendulumArgs, r: &Resolver, s: &Settings) -> Result<RunOutput> {
    let m = r.or(args.m, "m", 124)?;
    let kind = r.choice(args.grid, "grid", GridKind::Uniform)?;
    let extra = r.or(args.extra_points, "extra-points", 200)?;
    if m == 0 {
        return Err(UsageError("--m must be at least 1".into()).into());
    }
    let mut params = object(json!({ "alpha": 1.2, "beta": 1.2, "grid": format!("{kind:?}").to_lowercase() }));
    let mdl = match kind {
        GridKind::Uniform => PendulumModel::canonical(m)?,
        GridKind::Piecewise => PendulumModel::canonical_piecewise()?,
        GridKind::Clustered => {
            params.insert("extra_points".into(), json!(extra));
            clustered(PendulumModel::canonical(m)?, extra, s.seed)?
        }
    };
    if kind != GridKind::Piecewise {
        params.insert("m".into(), json!(m));
    }
    let (mut out, exact) = nonlinear_run(&mdl, s, params)?;
    let abs = abs_errors(&out.fd_solution, &exact);
    out.metadata.summary.insert("max_abs_error".into(), json!(max_of(&abs)));
    if let Some(c) = mdl.constants() {
        out.metadata.parameters.insert("t0".into(), json!(c.t0));
        out.metadata.parameters.insert("k".into(), json!(c.k));
    }
    out.rel_error = Some(rel_errors(&abs, &exact));
    out.abs_error = Some(abs);
    out.exact = Some(exact);
    Ok(out)
}

fn interior_layer(args: &InteriorArgs, r: &Resolver, s: &Settings) -> Result<RunOutput> {
    let delta = r.or(args.delta, "delta", 0.01)?;
    let m = r.or(args.m, "m", 200)?;
    let kind = r.choice(args.grid, "grid", GridKind::Uniform)?;
    let extra = r.or(args.extra_points, "extra-points", 200)?;
    if !(delta > 0.0) || m == 0 {
        return Err(UsageError("--delta must be positive and --m at least 1".into()).into());
    }
    let base = InteriorLayerModel::canonical(delta, m)?;
    let mut params = object(json!({
        "delta": delta, "m": m, "gamma1": -1.0, "gamma2": 1.5,
        "grid": format!("{kind:?}").to_lowercase(),
    }));
    let mdl = match kind {
        GridKind::Uniform => base,
        GridKind::Clustered => {
            params.insert("extra_points".into(), json!(extra));
            clustered(base, extra, s.seed)?
        }
        GridKind::Piecewise => {
            return Err(UsageError("the interior-layer model takes --grid uniform or clustered".into()).into())
        }
    };
    let (mut out, reference) = nonlinear_run(&mdl, s, params)?;
    out.metadata.summary.insert(
        "sup_distance_to_reference".into(),
        json!(max_of(&abs_errors(&out.fd_solution, &reference))),
    );
    out.metadata.summary.insert("w0".into(), json!(mdl.w0()));
    out.metadata.summary.insert("x_bar".into(), json!(mdl.x_bar()));
    out.reference = Some(reference);
    Ok(out)
}

fn black_scholes(args: &BlackScholesArgs, r: &Resolver, s: &Settings) -> Result<RunOutput> {
    let mdl = BlackScholesModel::<f64>::canonical();
    let step = r.or(args.step, "step", 10)?;
    if step >= mdl.m {
        return Err(UsageError(format!("--step must be below {}", mdl.m)).into());
    }
    let hist = mdl.run(step + 1).context("models::bs_step")?;
    let problem = mdl.regression(&hist[step], step).context("models::bs_assemble")?;
    let cfg = s.posterior(problem.m());
    let band = credible_band(&problem, &cfg, &cfg.rng()).context("bayes::credible_band")?;
    let t = mdl.calendar_time(step + 1);
    let prices = mdl.prices();
    let exact: Vec<f64> = prices.iter().map(|&p| mdl.exact(p, t)).collect();
    let fd = hist[step + 1].clone();
    let abs = abs_errors(&fd, &exact);
    let params = object(json!({
        "expiry": mdl.expiry, "strike": mdl.strike, "rate": mdl.rate, "sigma": mdl.sigma,
        "s_max": mdl.s_max, "n": mdl.n, "m": mdl.m, "step": step,
    }));
    let mut meta = s.metadata("black-scholes", &cfg, params);
    meta.summary = object(json!({
        "calendar_time": t,
        "max_abs_error": max_of(&abs),
        "max_width": band.max_width(),
    }));
    let proxy_mean = BlackScholesModel::relative_error_proxy(&band, ProxyMode::Mean);
    let proxy_sum = BlackScholesModel::relative_error_proxy(&band, ProxyMode::LimitSum);
    let mut out = with_band(meta, prices, fd, band);
    out.rel_error = Some(rel_errors(&abs, &exact));
    out.abs_error = Some(abs);
    out.exact = Some(exact);
    out.proxy_mean = Some(proxy_mean);
    out.proxy_limit_sum = Some(proxy_sum);
    Ok(out)
}

fn fixation(args: &FixationArgs, r: &Resolver, s: &Settings) -> Result<RunOutput> {
    let mdl = FixationModel::<f64>::canonical();
    let generations = r.or(args.generations, "generations", 1000)?;
    let p0 = r.or(args.p0, "p0", 0.1)?;
    if generations == 0 || generations > mdl.m() {
        return Err(UsageError(format!("--generations must be in 1..={}", mdl.m())).into());
    }
    if !(0.0..=1.0).contains(&p0) {
        return Err(UsageError(format!("--p0 must lie in [0, 1], got {p0}")).into());
    }
    let mut hist = mdl.history(generations).context("models::fixation_run")?;
    let u = hist.pop().expect("history is non-empty");
    let prev = hist.pop().expect("at least one generation");
    let cfg = s.posterior(u.len());
    let band = mdl.band(&prev, &cfg, &cfg.rng()).context("models::fixation_band")?;
    let (s_pop, sel) = mdl.derived_parameters();
    let params = object(json!({
        "generations": generations, "p0": p0, "dx": mdl.dx(), "n": mdl.n(),
        "derived_population_size": s_pop, "derived_selection_coefficient": sel,
    }));
    let mut meta = s.metadata("fixation", &cfg, params);
    meta.summary = object(json!({
        "fixation_probability": mdl.value_at(&u, p0)?,
        "max_width": band.max_width(),
    }));
    if let Some(i) = mdl.node_index(p0) {
        meta.summary.insert("ci_lower_at_p0".into(), json!(band.lower[i]));
        meta.summary.insert("ci_upper_at_p0".into(), json!(band.upper[i]));
    }
    Ok(with_band(meta, mdl.frequencies(), u, band))
}

fn refine(args: &RefineArgs, r: &Resolver, s: &Settings) -> Result<RunOutput> {
    let model = r.choice(args.model, "model", RefineModel::InteriorLayer)?;
    let defaults = RefinePolicy::default();
    let policy = RefinePolicy {
        flag_ratio: r.or(args.flag_ratio, "flag-ratio", defaults.flag_ratio)?,
        points_per_flagged_interval: r.or(args.points_per_interval, "points-per-interval", 1)?,
        max_rounds: r.or(args.max_rounds, "max-rounds", defaults.max_rounds)?,
        stop_ratio: r.or(args.stop_ratio, "stop-ratio", defaults.stop_ratio)?,
        prior_tracks_grid: s.a.is_none() && s.b.is_none(),
    };
    policy.validate().map_err(|e| UsageError(e.to_string()))?;
    let mut params = object(json!({
        "flag_ratio": policy.flag_ratio,
        "points_per_interval": policy.points_per_flagged_interval,
        "max_rounds": policy.max_rounds,
        "stop_ratio": policy.stop_ratio,
    }));
    match model {
        RefineModel::InteriorLayer => {
            let delta = r.or(args.delta, "delta", 0.01)?;
            let m = r.or(args.m, "m", 200)?;
            params.insert("delta".into(), json!(delta));
            params.insert("m".into(), json!(m));
            refine_run(&InteriorLayerModel::canonical(delta, m)?, &policy, s, params)
        }
        RefineModel::Pendulum => {
            let m = r.or(args.m, "m", 124)?;
            params.insert("m".into(), json!(m));
            refine_run(&PendulumModel::canonical(m)?, &policy, s, params)
        }
    }
}

fn refine_run<M: NonlinearBvp<f64>>(
    mdl: &M,
    policy: &RefinePolicy,
    s: &Settings,
    mut params: BTreeMap<String, Value>,
) -> Result<RunOutput> {
    if mdl.grid().m() == 0 {
        return Err(UsageError("--m must be at least 1".into()).into());
    }
    params.insert("model".into(), json!(mdl.name()));
    let cfg = s.posterior(mdl.grid().m());
    let history = adapt_loop(mdl, policy, &cfg, &cfg.rng()).context("adaptive::adapt_loop")?;
    let final_cfg = &history.final_band.config;
    let mut meta = s.metadata("refine", final_cfg, params);
    let rounds: Vec<Value> = history
        .rounds
        .iter()
        .map(|r| {
            json!({
                "nodes": r.nodes,
                "max_width": r.max_width,
                "median_width": r.median_width,
                "sup_error": r.sup_error,
                "newton_iterations": r.newton_iterations,
                "newton_converged": r.newton_converged,
                "flagged": r.flagged,
            })
        })
        .collect();
    meta.summary.insert("rounds".into(), Value::Array(rounds));
    let final_model = mdl.regridded(history.final_grid.clone())?;
    let reference = reference_values(&final_model);
    let x = history.final_grid.interior().to_vec();
    let mut out = with_band(meta, x, history.final_solution, history.final_band);
    if let Some(reference) = reference {
        out.abs_error = Some(abs_errors(&out.fd_solution, &reference));
        out.reference = Some(reference);
    }
    Ok(out)
}
