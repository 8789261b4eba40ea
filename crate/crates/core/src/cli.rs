//! Command-line front end.
//!
//! Every subcommand accepts `--config FILE` (a run config, see
//! [`RunConfig`]), `--output PATH`, `--seed N` and `--format csv|json`.
//! Precedence is: command-line flag, then config field, then built-in
//! default. Data goes to `--output` or standard output; diagnostics go to
//! standard error.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numeric failure, 3 I/O error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bounds::{
    kearns_sample_size, mcdiarmid_sample_size, parametric_sample_size, regret_bound, single_policy_epsilon, srm_select,
    uniform_epsilon, uniform_sample_size, BoundInputs, BoundReport, FormulaVariant, Quantity,
};
use crate::error::{Error, Result};
use crate::estimators::{
    crude_variance_exact, is_expectation_exact, is_variance_exact, mixture_is_estimate, EstimatorKind, MixtureComponent,
};
use crate::experiments::{
    bound_comparison, coverage_experiment, estimator_comparison, median, ratio_ceiling, run_pipeline, ComparisonConfig,
    ExperimentConfig, Pipeline,
};
use crate::io::{
    load_class, load_config, load_dataset, load_model, load_policy, write_bytes, BoundGrid, RunConfig, FORMAT_VERSION,
};
use crate::policy::{EntropyProfile, Policy, PolicyClass};
use crate::pomdp::{exact_value, Pomdp, ReturnSpec};
use crate::report::{encode, BoundRow, CoverageRow, EstimateRow, OracleRow, ReportFormat, SrmRow};

#[derive(Debug, Parser)]
#[command(
    name = "pomdp-ope",
    version,
    about = "Off-policy evaluation and PAC bounds for tabular POMDPs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Run config (JSON); relative paths inside are resolved against its
    /// directory.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Report or dataset destination; standard output when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Master seed, overriding the config's `master_seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Report encoding.
    #[arg(long, global = true, value_enum)]
    pub format: Option<ReportFormat>,
}

/// Return specification flags; used when the config has no `spec`.
#[derive(Debug, Clone, Default, Args)]
pub struct SpecArgs {
    /// Horizon T (finite horizon, or truncation point when discounting).
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Discount factor; selects a discounted return.
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check model, policy, class, dataset and config files.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        policy: Vec<PathBuf>,
        #[arg(long)]
        class: Option<PathBuf>,
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Sampling stage: draw N histories under the behavior policy and write
    /// a dataset.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        behavior: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Estimation stage: value of a target policy from stored datasets.
    Estimate {
        #[command(flatten)]
        common: Common,
        /// Dataset file; repeat for the mixture estimator.
        #[arg(long)]
        dataset: Vec<PathBuf>,
        #[arg(long)]
        target: Option<PathBuf>,
        #[arg(long, value_enum)]
        estimator: Option<EstimatorArg>,
        /// Behavior policy of each dataset (mixture only).
        #[arg(long)]
        behavior: Vec<PathBuf>,
        /// Prior of each dataset (mixture only).
        #[arg(long)]
        prior: Vec<f64>,
    },
    /// Deviation radii, sample sizes and regret bounds.
    Bounds {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        v_max: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        horizon: Option<usize>,
        /// Constant metric entropy K (log covering number).
        #[arg(long)]
        log_covering: Option<f64>,
        #[arg(long)]
        vc_dim: Option<u64>,
        #[arg(long)]
        c_floor: Option<f64>,
        /// Sample size: report radii.
        #[arg(long)]
        n: Option<u64>,
        /// Radius: report sample sizes.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Parametric entropy exponent for the parametric sample size.
        #[arg(long)]
        k1: Option<f64>,
    },
    /// Empirical violation rate of the deviation bounds.
    Coverage {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        replications: Option<usize>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Use the exact root of the two-sided tail instead of the
        /// published closed form.
        #[arg(long)]
        exact_form: bool,
    },
    /// Replicated bias and variance of crude, IS, WIS and mixture estimators.
    CompareEstimators {
        #[command(flatten)]
        common: Common,
        /// Sample sizes, comma separated.
        #[arg(long, value_delimiter = ',')]
        n_schedule: Vec<usize>,
        #[arg(long)]
        replications: Option<usize>,
    },
    /// Sample-size formulas side by side on a grid, with slope fits.
    CompareBounds {
        #[command(flatten)]
        common: Common,
        /// Where to write the slope fits; standard error when absent.
        #[arg(long)]
        slopes: Option<PathBuf>,
    },
    /// Structural risk minimization over candidate classes.
    Srm {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Exact quantities by full enumeration.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        target: Option<PathBuf>,
        #[arg(long)]
        behavior: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum EstimatorArg {
    Crude,
    Is,
    Wis,
    Mixture,
}

impl From<EstimatorArg> for EstimatorKind {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Crude => EstimatorKind::Crude,
            EstimatorArg::Is => EstimatorKind::Is,
            EstimatorArg::Wis => EstimatorKind::Wis,
            EstimatorArg::Mixture => EstimatorKind::Mixture,
        }
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Resolved settings: flags over config over defaults.
struct Ctx {
    cfg: RunConfig,
    output: Option<PathBuf>,
    seed: u64,
    format: ReportFormat,
}

impl Ctx {
    fn new(common: &Common) -> Result<Self> {
        let cfg = match &common.config {
            Some(p) => load_config(p)?,
            None => RunConfig {
                format_version: FORMAT_VERSION,
                ..RunConfig::default()
            },
        };
        Ok(Ctx {
            output: common.output.clone().or_else(|| cfg.output.clone()),
            seed: common.seed.or(cfg.master_seed).unwrap_or(0),
            format: common.format.unwrap_or_default(),
            cfg,
        })
    }

    fn emit<T: serde::Serialize>(&self, rows: &[T]) -> Result<()> {
        let bytes = encode(rows, self.format)?;
        match &self.output {
            Some(path) => write_bytes(path, &bytes),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(&bytes)
                    .and_then(|_| out.flush())
                    .map_err(|source| Error::Io {
                        path: PathBuf::from("<stdout>"),
                        source,
                    })
            }
        }
    }

    fn spec(&self, args: &SpecArgs, model: &Pomdp) -> Result<ReturnSpec> {
        let spec = match (args.horizon, &self.cfg.spec) {
            (Some(horizon), _) => match args.gamma {
                Some(gamma) => ReturnSpec::Discounted {
                    horizon,
                    gamma,
                    r_max: model.r_max,
                },
                None => ReturnSpec::FiniteHorizon {
                    horizon,
                    r_max: model.r_max,
                },
            },
            (None, Some(spec)) => *spec,
            (None, None) => ReturnSpec::FiniteHorizon {
                horizon: crate::experiments::DEFAULT_HORIZON,
                r_max: model.r_max,
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn pick(flag: &Option<PathBuf>, cfg: &Option<PathBuf>, field: &str) -> Result<PathBuf> {
    flag.clone()
        .or_else(|| cfg.clone())
        .ok_or_else(|| Error::input(field, "no file given (flag or config)"))
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Validate {
            common,
            model,
            policy,
            class,
            dataset,
        } => cmd_validate(&common, model, policy, class, dataset),
        Command::Simulate {
            common,
            spec,
            model,
            behavior,
            n,
        } => cmd_simulate(&common, &spec, model, behavior, n),
        Command::Estimate {
            common,
            dataset,
            target,
            estimator,
            behavior,
            prior,
        } => cmd_estimate(&common, dataset, target, estimator, behavior, prior),
        Command::Bounds {
            common,
            v_max,
            eta,
            delta,
            horizon,
            log_covering,
            vc_dim,
            c_floor,
            n,
            epsilon,
            k1,
        } => {
            let ctx = Ctx::new(&common)?;
            let mut inputs = ctx.cfg.bounds.clone().unwrap_or(BoundInputs {
                v_max: 1.0,
                eta: 1.0,
                delta: 0.05,
                horizon: 1,
                entropy: EntropyProfile::Constant { log_n: 0.0 },
                vc_dim: None,
                c_floor: 0.0,
            });
            if let Some(v) = v_max {
                inputs.v_max = v;
            }
            if let Some(v) = eta {
                inputs.eta = v;
            }
            if let Some(v) = delta.or(ctx.cfg.delta) {
                inputs.delta = v;
            }
            if let Some(v) = horizon {
                inputs.horizon = v;
            }
            if let Some(v) = log_covering {
                inputs.entropy = EntropyProfile::Constant { log_n: v };
            }
            if vc_dim.is_some() {
                inputs.vc_dim = vc_dim;
            }
            if let Some(v) = c_floor {
                inputs.c_floor = v;
            }
            let n = n.or(ctx.cfg.n.map(|n| n as u64));
            let epsilon = epsilon.or(ctx.cfg.epsilon);
            let reports = bound_reports(&inputs, n, epsilon, k1)?;
            let rows: Vec<BoundRow> = reports.iter().map(BoundRow::from).collect();
            ctx.emit(&rows)
        }
        Command::Coverage {
            common,
            n,
            replications,
            delta,
            epsilon,
            exact_form,
        } => {
            let ctx = Ctx::new(&common)?;
            let mut cfg = experiment_config(&ctx)?;
            if let Some(v) = n {
                cfg.n = v;
            }
            if let Some(v) = replications {
                cfg.m = v;
            }
            if let Some(v) = delta {
                cfg.delta = v;
            }
            if epsilon.is_some() {
                cfg.epsilon = epsilon;
            }
            if exact_form {
                cfg.variant = FormulaVariant::ExactForm;
            }
            let res = coverage_experiment(&cfg)?;
            let variant = if cfg.epsilon.is_some() {
                "override"
            } else {
                cfg.variant.as_str()
            };
            let mut rows = vec![CoverageRow {
                format_version: FORMAT_VERSION,
                scope: "single".into(),
                target_id: cfg.target.id().into(),
                n: cfg.n,
                replications: cfg.m,
                delta: cfg.delta,
                variant: variant.into(),
                v_max: res.v_max,
                eta: res.eta,
                epsilon: res.epsilon,
                violations: res.violation_count,
                empirical_rate: res.empirical_rate,
                bound_rate: res.bound_rate,
                median_deviation: median(&res.deviations),
                max_deviation: res.deviations.iter().copied().fold(0.0, f64::max),
                master_seed: cfg.master_seed,
            }];
            if let Some(c) = &res.class {
                rows.push(CoverageRow {
                    format_version: FORMAT_VERSION,
                    scope: "class_sup".into(),
                    target_id: format!("class[{}]", cfg.class.as_ref().map_or(0, PolicyClass::len)),
                    n: cfg.n,
                    replications: cfg.m,
                    delta: cfg.delta,
                    variant: FormulaVariant::PaperForm.as_str().into(),
                    v_max: res.v_max,
                    eta: c.eta,
                    epsilon: c.epsilon,
                    violations: c.violation_count,
                    empirical_rate: c.empirical_rate,
                    bound_rate: res.bound_rate,
                    median_deviation: median(&c.sup_deviations),
                    max_deviation: c.sup_deviations.iter().copied().fold(0.0, f64::max),
                    master_seed: cfg.master_seed,
                });
            }
            ctx.emit(&rows)
        }
        Command::CompareEstimators {
            common,
            n_schedule,
            replications,
        } => {
            let ctx = Ctx::new(&common)?;
            let base = experiment_config(&ctx)?;
            let second_behavior = match &ctx.cfg.mixture {
                Some(entries) if entries.len() >= 2 => Some(load_policy(&entries[1].behavior)?),
                Some(_) => None,
                None => base.class.as_ref().and_then(|c| c.members().last().cloned()),
            };
            let schedule = if n_schedule.is_empty() {
                ctx.cfg.n_schedule.clone().unwrap_or_else(|| vec![10, 100, 1000])
            } else {
                n_schedule
            };
            let cfg = ComparisonConfig {
                model: base.model,
                behavior: base.behavior,
                second_behavior,
                target: base.target,
                spec: base.spec,
                schedule,
                replications: replications.or(ctx.cfg.replications).unwrap_or(200),
                master_seed: ctx.seed,
            };
            ctx.emit(&estimator_comparison(&cfg)?)
        }
        Command::CompareBounds { common, slopes } => {
            let ctx = Ctx::new(&common)?;
            let grid = ctx.cfg.bound_grid.clone().unwrap_or_else(default_bound_grid);
            let cmp = bound_comparison(&grid)?;
            match slopes {
                Some(path) => write_bytes(&path, &encode(&cmp.slopes, ctx.format)?)?,
                None => {
                    for s in &cmp.slopes {
                        eprintln!(
                            "slope T={} delta={}: uniform convergence {:.4}, kearns {:.4}, mcdiarmid {:.4}, parametric {:.4}",
                            s.horizon, s.delta, s.uniform_slope, s.kearns_slope, s.mcdiarmid_slope, s.parametric_slope
                        );
                    }
                }
            }
            ctx.emit(&cmp.rows)
        }
        Command::Srm { common, n, delta } => {
            let ctx = Ctx::new(&common)?;
            let classes = ctx
                .cfg
                .srm_classes
                .clone()
                .ok_or_else(|| Error::input("srm_classes", "config must list the candidate classes"))?;
            let shared = ctx
                .cfg
                .bounds
                .clone()
                .ok_or_else(|| Error::input("bounds", "config must give v_max, eta and horizon"))?;
            let n = n
                .or(ctx.cfg.n.map(|n| n as u64))
                .ok_or_else(|| Error::input("n", "sample size required"))?;
            let delta = delta.or(ctx.cfg.delta).unwrap_or(shared.delta);
            let sel = srm_select(&classes, n, delta, &shared)?;
            let rows: Vec<SrmRow> = classes
                .iter()
                .enumerate()
                .map(|(i, c)| SrmRow {
                    format_version: FORMAT_VERSION,
                    class_id: c.id.clone(),
                    estimate: c.estimate,
                    n,
                    delta,
                    delta_per_class: sel.delta_per_class,
                    epsilon: sel.epsilons[i],
                    lower_bound: sel.lower_bounds[i],
                    chosen: i == sel.chosen_index,
                })
                .collect();
            ctx.emit(&rows)
        }
        Command::Oracle {
            common,
            spec,
            model,
            target,
            behavior,
            n,
        } => {
            let ctx = Ctx::new(&common)?;
            let model = load_model(&pick(&model, &ctx.cfg.model, "model")?)?;
            let spec = ctx.spec(&spec, &model)?;
            let target = load_policy(&pick(&target, &ctx.cfg.target, "target")?)?;
            let n = n.or(ctx.cfg.n).unwrap_or(1);
            let row = |quantity: &str, behavior: Option<&Policy>, n: Option<usize>, value: f64| OracleRow {
                format_version: FORMAT_VERSION,
                quantity: quantity.into(),
                target_id: target.id().into(),
                behavior_policy_id: behavior.map(|b| b.id().to_string()),
                n,
                value,
            };
            let mut rows = vec![
                row("exact_value", None, None, exact_value(&model, &target, &spec)?),
                row(
                    "crude_variance",
                    None,
                    Some(n),
                    crude_variance_exact(&model, &target, &spec, n)?,
                ),
            ];
            if let Some(path) = behavior.or_else(|| ctx.cfg.behavior.clone()) {
                let b = load_policy(&path)?;
                rows.push(row(
                    "is_expectation",
                    Some(&b),
                    None,
                    is_expectation_exact(&model, &target, &b, &spec)?,
                ));
                rows.push(row(
                    "is_variance",
                    Some(&b),
                    Some(n),
                    is_variance_exact(&model, &target, &b, &spec, n)?,
                ));
                rows.push(row(
                    "ratio_ceiling",
                    Some(&b),
                    None,
                    ratio_ceiling(&[&target], &b, spec.num_steps())?,
                ));
            }
            ctx.emit(&rows)
        }
    }
}

fn cmd_validate(
    common: &Common,
    model: Option<PathBuf>,
    policies: Vec<PathBuf>,
    class: Option<PathBuf>,
    dataset: Option<PathBuf>,
) -> Result<()> {
    let ctx = Ctx::new(common)?;
    let mut checked = Vec::new();
    let say = |kind: &str, path: &Path, detail: String| format!("ok {kind} {}: {detail}\n", path.display());
    if let Some(p) = model.or_else(|| ctx.cfg.model.clone()) {
        let m = load_model(&p)?;
        checked.push(say(
            "model",
            &p,
            format!(
                "{} states, {} observations, {} actions",
                m.num_states, m.num_observations, m.num_actions
            ),
        ));
    }
    let mut policy_paths = policies;
    policy_paths.extend(ctx.cfg.behavior.clone());
    policy_paths.extend(ctx.cfg.target.clone());
    for p in policy_paths {
        let pol = load_policy(&p)?;
        checked.push(say("policy", &p, format!("id {}, floor {}", pol.id(), pol.floor())));
    }
    if let Some(p) = class.or_else(|| ctx.cfg.class.clone()) {
        let c = load_class(&p)?;
        checked.push(say("class", &p, format!("{} members, floor {}", c.len(), c.floor())));
    }
    if let Some(p) = dataset.or_else(|| ctx.cfg.dataset.clone()) {
        let d = load_dataset(&p)?;
        checked.push(say("dataset", &p, format!("{} histories", d.len())));
    }
    if let Some(p) = &common.config {
        checked.push(say("config", p, "parsed".into()));
    }
    if checked.is_empty() {
        return Err(Error::input("validate", "nothing to validate"));
    }
    let mut out = std::io::stdout().lock();
    for line in checked {
        out.write_all(line.as_bytes()).map_err(|source| Error::Io {
            path: PathBuf::from("<stdout>"),
            source,
        })?;
    }
    Ok(())
}

fn cmd_simulate(
    common: &Common,
    spec: &SpecArgs,
    model: Option<PathBuf>,
    behavior: Option<PathBuf>,
    n: Option<usize>,
) -> Result<()> {
    let ctx = Ctx::new(common)?;
    let model = load_model(&pick(&model, &ctx.cfg.model, "model")?)?;
    let behavior = load_policy(&pick(&behavior, &ctx.cfg.behavior, "behavior")?)?;
    let spec = ctx.spec(spec, &model)?;
    let out = ctx
        .output
        .clone()
        .or_else(|| ctx.cfg.dataset.clone())
        .ok_or_else(|| Error::input("output", "simulate needs --output or a config `dataset`"))?;
    let n = n
        .or(ctx.cfg.n)
        .ok_or_else(|| Error::input("n", "sample size required"))?;
    let cfg = ExperimentConfig {
        target: behavior.clone(),
        model,
        behavior,
        class: None,
        spec,
        n,
        m: 1,
        epsilon: None,
        delta: 0.5,
        master_seed: ctx.seed,
        variant: FormulaVariant::PaperForm,
        v_max: None,
        eta: None,
    };
    run_pipeline(&cfg, Some(&out))?;
    Ok(())
}

fn cmd_estimate(
    common: &Common,
    datasets: Vec<PathBuf>,
    target: Option<PathBuf>,
    estimator: Option<EstimatorArg>,
    behaviors: Vec<PathBuf>,
    priors: Vec<f64>,
) -> Result<()> {
    let ctx = Ctx::new(common)?;
    let target = load_policy(&pick(&target, &ctx.cfg.target, "target")?)?;
    let kind = estimator
        .map(EstimatorKind::from)
        .or(ctx.cfg.estimator)
        .unwrap_or(EstimatorKind::Is);
    let datasets = if datasets.is_empty() {
        ctx.cfg.dataset.clone().into_iter().collect()
    } else {
        datasets
    };
    if datasets.is_empty() {
        return Err(Error::input("dataset", "no dataset given (flag or config)"));
    }
    let row = if kind == EstimatorKind::Mixture {
        let (behaviors, priors) = if behaviors.is_empty() {
            let entries = ctx.cfg.mixture.clone().unwrap_or_default();
            (
                entries.iter().map(|e| e.behavior.clone()).collect::<Vec<_>>(),
                entries.iter().map(|e| e.prior).collect::<Vec<_>>(),
            )
        } else {
            (behaviors, priors)
        };
        if behaviors.len() != datasets.len() || priors.len() != datasets.len() {
            return Err(Error::input(
                "mixture",
                "give one --behavior and one --prior per --dataset",
            ));
        }
        let sets = datasets.iter().map(|p| load_dataset(p)).collect::<Result<Vec<_>>>()?;
        let pols = behaviors.iter().map(|p| load_policy(p)).collect::<Result<Vec<_>>>()?;
        let comps: Vec<MixtureComponent<'_>> = sets
            .iter()
            .zip(&pols)
            .zip(&priors)
            .map(|((s, b), &prior)| MixtureComponent {
                samples: s,
                behavior: b,
                prior,
            })
            .collect();
        let est = mixture_is_estimate(&comps, &target)?;
        let ids: Vec<&str> = pols.iter().map(|p| p.id()).collect();
        EstimateRow::new(&est, target.id(), &ids.join("+"), sets[0].master_seed)
    } else {
        if datasets.len() != 1 {
            return Err(Error::input("dataset", "exactly one dataset for this estimator"));
        }
        let pipe = Pipeline::load(&datasets[0])?;
        let est = pipe.estimate(&target, kind)?;
        EstimateRow::new(
            &est,
            target.id(),
            &pipe.samples.behavior_policy_id,
            pipe.samples.master_seed,
        )
    };
    ctx.emit(&[row])
}

/// Every bound computable from `inputs` and whichever of `n` and `epsilon`
/// is given.
pub fn bound_reports(
    inputs: &BoundInputs,
    n: Option<u64>,
    epsilon: Option<f64>,
    k1: Option<f64>,
) -> Result<Vec<BoundReport>> {
    inputs.validate()?;
    if n.is_none() && epsilon.is_none() {
        return Err(Error::input("n", "give a sample size (--n) or a radius (--epsilon)"));
    }
    let mut out = Vec::new();
    let report = |name: &str, quantity, value, variant, n, epsilon| BoundReport {
        name: name.into(),
        quantity,
        value,
        variant,
        inputs: inputs.clone(),
        n,
        epsilon,
    };
    if let Some(n) = n {
        for variant in [FormulaVariant::PaperForm, FormulaVariant::ExactForm] {
            let eps = single_policy_epsilon(inputs, n, variant)?;
            out.push(report(
                "single_policy_epsilon",
                Quantity::Epsilon,
                eps,
                variant,
                Some(n),
                None,
            ));
        }
        if inputs.delta < 1.0 {
            let eps = uniform_epsilon(inputs, n, &|r| inputs.covering(r))?;
            out.push(report(
                "uniform_epsilon",
                Quantity::Epsilon,
                eps,
                FormulaVariant::PaperForm,
                Some(n),
                None,
            ));
        }
    }
    if let Some(eps) = epsilon {
        if inputs.delta < 1.0 {
            let size = uniform_sample_size(inputs, eps, &|r| inputs.covering(r))?;
            out.push(report(
                "uniform_sample_size",
                Quantity::SampleSize,
                size as f64,
                FormulaVariant::PaperForm,
                None,
                Some(eps),
            ));
        }
        let big_o = FormulaVariant::BigOUnitConstant;
        out.push(report(
            "mcdiarmid_sample_size",
            Quantity::SampleSize,
            mcdiarmid_sample_size(inputs, eps)?,
            big_o,
            None,
            Some(eps),
        ));
        if let (Some(vc), true) = (inputs.vc_dim, inputs.horizon >= 2) {
            out.push(report(
                "kearns_sample_size",
                Quantity::SampleSize,
                kearns_sample_size(inputs.v_max / eps, inputs.horizon, vc, inputs.delta)?,
                big_o,
                None,
                Some(eps),
            ));
        }
        if let Some(k1) = k1 {
            let k = inputs.entropy.log_covering(eps, inputs.horizon);
            out.push(report(
                "parametric_sample_size",
                Quantity::SampleSize,
                parametric_sample_size(inputs.v_max, eps, k1, k, inputs.delta, inputs.horizon)?,
                big_o,
                None,
                Some(eps),
            ));
        }
    }
    if !matches!(inputs.entropy, EntropyProfile::Constant { .. }) {
        let regret = regret_bound(&|r| inputs.entropy.log_covering(r, inputs.horizon), 1e-9)?;
        out.push(report(
            "regret_bound",
            Quantity::Regret,
            regret,
            FormulaVariant::PaperForm,
            None,
            None,
        ));
        out.push(report(
            "eta_from_regret",
            Quantity::Eta,
            regret.exp(),
            FormulaVariant::PaperForm,
            None,
            None,
        ));
    }
    Ok(out)
}

/// Asymptotic grid for the slope comparison: T in {4, 10}, delta = 0.01,
/// `v_max / eps` from 1e4 to 1e8.
pub fn default_bound_grid() -> BoundGrid {
    BoundGrid {
        horizons: vec![4, 10],
        ratios: (0..=8).map(|i| 10f64.powf(4.0 + 0.5 * i as f64)).collect(),
        deltas: vec![0.01],
        log_covering: 2.0,
        vc_dim: 2,
        c_floor: 0.1,
        num_actions: 2,
        k1: 2.0,
    }
}

/// Builds the experiment config from the run config. Without a model the
/// default instance is used, with its first class member as target.
fn experiment_config(ctx: &Ctx) -> Result<ExperimentConfig> {
    let cfg = &ctx.cfg;
    let mut exp = ExperimentConfig::default_instance(ctx.seed);
    if let Some(p) = &cfg.model {
        let model = load_model(p)?;
        exp.spec = ctx.spec(&SpecArgs::default(), &model)?;
        exp.model = model;
        exp.behavior = load_policy(&pick(&None, &cfg.behavior, "behavior")?)?;
        exp.class = cfg.class.as_deref().map(load_class).transpose()?;
        exp.target = match (&cfg.target, &exp.class) {
            (Some(t), _) => load_policy(t)?,
            (None, Some(cls)) => cls.members()[0].clone(),
            (None, None) => return Err(Error::input("target", "config needs a target or a class")),
        };
    } else {
        if let Some(spec) = cfg.spec {
            exp.spec = spec;
        }
        if let Some(t) = &cfg.target {
            exp.target = load_policy(t)?;
        }
        if let Some(b) = &cfg.behavior {
            exp.behavior = load_policy(b)?;
        }
        if let Some(c) = &cfg.class {
            exp.class = Some(load_class(c)?);
        }
    }
    if let Some(v) = cfg.n {
        exp.n = v;
    }
    if let Some(v) = cfg.replications {
        exp.m = v;
    }
    if let Some(v) = cfg.delta {
        exp.delta = v;
    }
    exp.epsilon = cfg.epsilon;
    if let Some(v) = cfg.variant {
        exp.variant = v;
    }
    if let Some(b) = &cfg.bounds {
        exp.v_max = Some(b.v_max);
        exp.eta = Some(b.eta);
    }
    Ok(exp)
}
