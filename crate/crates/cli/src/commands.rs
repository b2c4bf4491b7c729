//! Command definitions and wiring: `design` (block + assign), `analyze`
//! (estimates, variances, tests), and `simulate` (Monte Carlo studies).

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use tupleworks_core::assign::{
    assign_bernoulli_factors, assign_factor_specific_mp, assign_matched_tuples,
    assign_rerandomized, assign_replicate_tuples, assign_stratified, AssignmentPlan,
    RerandomizeOptions,
};
use tupleworks_core::blocking::{
    block_by_ordering, block_prestratified, block_recursive_pairing, diagnose, MatchMethod,
    Standardize,
};
use tupleworks_core::estimate::{
    delta_hat, gamma_hat, parse_contrast_spec, Contrast,
};
use tupleworks_core::inference::{confidence_interval, t_test, wald_test};
use tupleworks_core::io::{read_partition_csv, read_units_csv, write_arms_csv, write_partition_csv};
use tupleworks_core::linalg::Mat;
use tupleworks_core::sample::{subsample_covered, BlockPartition, Sample};
use tupleworks_core::simlab::{
    run_mse_study, run_power_curve, run_size_power_study, StudyConfig, StudyReport,
};
use tupleworks_core::variance::{
    quad_relabel, two_control_quad_contrast, v_hat_adjusted, v_hat_bcve, v_hat_sfe,
    v_hat_strat_plugin, VarianceReport,
};
use tupleworks_core::{Error, FactorSpace, Result};

use crate::manifest::RunManifest;

#[derive(Debug, Parser)]
#[command(
    name = "tupleworks",
    version,
    about = "Blocked experimental design, analysis, and Monte Carlo studies over CSV/JSON"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Block units on covariates and assign treatments.
    Design(DesignArgs),
    /// Estimate contrasts and run tests on observed data.
    Analyze(AnalyzeArgs),
    /// Run a Monte Carlo study from a JSON config.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BlockMethod {
    Order,
    Prestrat,
    Recursive,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DesignId {
    Mt,
    Mt2,
    Strat,
    Bern,
    Mpk,
    Re,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MahalanobisKind {
    Diag,
    Full,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MatcherKind {
    Greedy,
    Exact,
}

#[derive(Debug, Args)]
struct DesignArgs {
    /// Unit CSV: id,x1,...,xp
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Blocking method; omit to skip blocking.
    #[arg(long, value_enum)]
    method: Option<BlockMethod>,
    /// Units per block for order/prestrat; a power of two for recursive.
    #[arg(long)]
    tuple_size: Option<usize>,
    /// Scalar covariate column for order/prestrat (default x1).
    #[arg(long, default_value = "x1")]
    covariate: String,
    /// Discrete stratum column (prestrat blocking, strat design).
    #[arg(long)]
    strata_col: Option<String>,
    /// Covariate standardization for recursive pairing.
    #[arg(long, value_enum, default_value_t = MahalanobisKind::Diag)]
    mahalanobis: MahalanobisKind,
    /// Pair matcher for recursive pairing.
    #[arg(long, value_enum, default_value_t = MatcherKind::Greedy)]
    matcher: MatcherKind,
    /// Assignment design; omit to only block.
    #[arg(long, value_enum)]
    design: Option<DesignId>,
    /// Number of factors (factorial designs; arm count 2^k).
    #[arg(long)]
    k: Option<usize>,
    /// Explicit arm count (strat design without factors).
    #[arg(long)]
    arms: Option<usize>,
    /// Paired factor for the factor-specific matched-pairs design.
    #[arg(long)]
    factor: Option<usize>,
    /// Redraw budget for re-randomization.
    #[arg(long, default_value_t = 100_000)]
    max_redraws: usize,
    /// Worker threads (wall time only; outputs are thread-invariant).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VarianceId {
    Adjusted,
    AdjustedRep,
    SfeHc0,
    SfeHc1,
    Bcve,
    Strat,
    Quad2c,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Data CSV: id,x1,...,xp,arm,y
    #[arg(long)]
    data: PathBuf,
    /// Partition CSV: id,block (required by blocked variance methods).
    #[arg(long)]
    partition: Option<PathBuf>,
    /// Contrast specs: main:k, inter:1,2, cond:k|2=+1, pair:d,d0.
    #[arg(long = "contrast")]
    contrasts: Vec<String>,
    #[arg(long, value_enum, default_value_t = VarianceId::Adjusted)]
    variance: VarianceId,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Null value for each contrast row.
    #[arg(long, default_value_t = 0.0)]
    delta0: f64,
    /// Number of factors, enabling factorial contrast specs.
    #[arg(long)]
    k: Option<usize>,
    /// Explicit arm count when no factor space is given.
    #[arg(long)]
    arms: Option<usize>,
    /// Apply the 2^-(K-1) rescaling to main and interaction contrasts.
    #[arg(long, default_value_t = false)]
    rescale: bool,
    /// Stratum column for the stratified plug-in variance.
    #[arg(long)]
    strata_col: Option<String>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Study configuration JSON.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Worker threads (wall time only; outputs are thread-invariant).
    #[arg(long)]
    threads: Option<usize>,
}

pub fn parse() -> Cli {
    Cli::parse()
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Design(args) => cmd_design(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Simulate(args) => cmd_simulate(args),
    }
}

fn strata_codes(values: &[f64]) -> Vec<usize> {
    let mut uniq: Vec<f64> = values.to_vec();
    uniq.sort_by(f64::total_cmp);
    uniq.dedup();
    values
        .iter()
        .map(|v| uniq.binary_search_by(|u| u.total_cmp(v)).expect("value seen"))
        .collect()
}

fn cmd_design(args: DesignArgs) -> Result<()> {
    if let Some(n) = args.threads {
        tupleworks_core::simlab::study::set_threads(n)?;
    }
    fs::create_dir_all(&args.out_dir)?;
    let units = read_units_csv(fs::File::open(&args.input)?)?;

    // arm count: explicit factors, explicit arms, or derived from the design
    let num_arms = match (args.k, args.arms, args.design) {
        (Some(k), _, _) => FactorSpace::new(k)?.arm_count(),
        (None, Some(a), _) => a,
        (None, None, Some(DesignId::Mt)) => args.tuple_size.ok_or_else(|| {
            Error::InvalidArgument("design mt needs --tuple-size or --k".into())
        })?,
        (None, None, Some(DesignId::Mt2)) => {
            let t = args.tuple_size.ok_or_else(|| {
                Error::InvalidArgument("design mt2 needs --tuple-size or --k".into())
            })?;
            if t % 2 != 0 {
                return Err(Error::InvalidArgument(
                    "replicate tuples need an even tuple size".into(),
                ));
            }
            t / 2
        }
        (None, None, Some(DesignId::Strat)) => {
            return Err(Error::InvalidArgument(
                "design strat needs --arms or --k".into(),
            ))
        }
        (None, None, Some(_)) => {
            return Err(Error::InvalidArgument("this design needs --k".into()))
        }
        (None, None, None) => 2, // blocking only; arm count is irrelevant
    };
    let sample = units.clone().into_sample(num_arms.max(2))?;

    // blocking
    let mut dropped_ids: Vec<String> = Vec::new();
    let blocked: Option<(Sample, BlockPartition)> = match args.method {
        None => None,
        Some(method) => {
            let tuple = args.tuple_size.ok_or_else(|| {
                Error::InvalidArgument("blocking needs --tuple-size".into())
            })?;
            let cov_idx = units.covariate_index(&args.covariate)?;
            let partition = match method {
                BlockMethod::Order => block_by_ordering(&sample, tuple, cov_idx)?,
                BlockMethod::Prestrat => {
                    let col = args.strata_col.as_deref().ok_or_else(|| {
                        Error::InvalidArgument("prestrat blocking needs --strata-col".into())
                    })?;
                    let strata_idx = units.covariate_index(col)?;
                    let strata_vals: Vec<f64> = units
                        .covariates
                        .iter()
                        .map(|row| row[strata_idx])
                        .collect();
                    let codes = strata_codes(&strata_vals);
                    let (partition, dropped) =
                        block_prestratified(&sample, &codes, tuple, cov_idx)?;
                    dropped_ids = dropped
                        .iter()
                        .map(|&i| sample.unit(i).id.clone())
                        .collect();
                    partition
                }
                BlockMethod::Recursive => {
                    if !tuple.is_power_of_two() || tuple < 2 {
                        return Err(Error::InvalidArgument(format!(
                            "recursive pairing needs a power-of-two tuple size, got {tuple}"
                        )));
                    }
                    let levels = tuple.trailing_zeros() as usize;
                    let standardize = match args.mahalanobis {
                        MahalanobisKind::Diag => Standardize::Diagonal,
                        MahalanobisKind::Full => Standardize::Full,
                    };
                    let matcher = match args.matcher {
                        MatcherKind::Greedy => MatchMethod::Greedy,
                        MatcherKind::Exact => MatchMethod::Exact,
                    };
                    block_recursive_pairing(&sample, levels, standardize, matcher)?
                }
            };
            let (sub, part) = subsample_covered(&sample, &partition)?;
            Some((sub, part))
        }
    };

    // diagnostics + partition file
    let diagnostics = if let Some((sub, part)) = &blocked {
        let d = diagnose(sub, part)?;
        let f = fs::File::create(args.out_dir.join("partition.csv"))?;
        write_partition_csv(f, sub, part)?;
        json!({
            "within_stat": d.within_stat,
            "adjacent_stat": d.adjacent_stat,
            "dropped_ids": dropped_ids,
        })
    } else {
        json!({ "within_stat": null, "adjacent_stat": null, "dropped_ids": dropped_ids })
    };
    fs::write(
        args.out_dir.join("diagnostics.json"),
        serde_json::to_string_pretty(&diagnostics).expect("json") + "\n",
    )?;

    // assignment
    if let Some(design) = args.design {
        let (target, partition): (&Sample, Option<&BlockPartition>) = match &blocked {
            Some((sub, part)) => (sub, Some(part)),
            None => (&sample, None),
        };
        let need_partition = || {
            partition.ok_or_else(|| {
                Error::InvalidArgument("this design needs a blocking --method".into())
            })
        };
        let plan: AssignmentPlan = match design {
            DesignId::Mt => {
                assign_matched_tuples(need_partition()?, num_arms, target.len(), args.seed)?
            }
            DesignId::Mt2 => {
                assign_replicate_tuples(need_partition()?, num_arms, target.len(), args.seed)?
            }
            DesignId::Strat => {
                let codes = match args.strata_col.as_deref() {
                    Some(col) => {
                        let idx = units.covariate_index(col)?;
                        let vals: Vec<f64> = target
                            .units()
                            .iter()
                            .map(|u| u.covariates[idx])
                            .collect();
                        strata_codes(&vals)
                    }
                    None => vec![0usize; target.len()],
                };
                assign_stratified(&codes, num_arms, args.seed)?
            }
            DesignId::Bern => {
                let k = args.k.ok_or_else(|| {
                    Error::InvalidArgument("design bern needs --k".into())
                })?;
                assign_bernoulli_factors(target.len(), k, args.seed)?
            }
            DesignId::Mpk => {
                let k = args.k.ok_or_else(|| {
                    Error::InvalidArgument("design mpk needs --k".into())
                })?;
                let factor = args.factor.unwrap_or(1);
                assign_factor_specific_mp(need_partition()?, factor, k, target.len(), args.seed)?
            }
            DesignId::Re => {
                let k = args.k.ok_or_else(|| {
                    Error::InvalidArgument("design re needs --k".into())
                })?;
                let rows = target.covariate_rows();
                assign_rerandomized(
                    &rows,
                    k,
                    args.seed,
                    RerandomizeOptions {
                        max_redraws: args.max_redraws,
                    },
                )?
            }
        };
        let ids: Vec<String> = target.units().iter().map(|u| u.id.clone()).collect();
        let f = fs::File::create(args.out_dir.join("arms.csv"))?;
        write_arms_csv(f, &ids, &plan.arms, plan.levels.as_deref())?;
        let plan_meta = json!({
            "design": plan.design.as_str(),
            "num_arms": plan.num_arms,
            "seed": plan.seed,
            "redraws": plan.redraws,
            "units": ids.len(),
        });
        fs::write(
            args.out_dir.join("plan.json"),
            serde_json::to_string_pretty(&plan_meta).expect("json") + "\n",
        )?;
    }

    let mut manifest = RunManifest::new("design", Some(args.seed), design_config_json(&args));
    manifest.digest_input(&args.input)?;
    manifest.write(&args.out_dir)?;
    Ok(())
}

fn design_config_json(args: &DesignArgs) -> serde_json::Value {
    json!({
        "input": args.input.display().to_string(),
        "method": args.method.map(|m| format!("{m:?}").to_lowercase()),
        "tuple_size": args.tuple_size,
        "covariate": args.covariate,
        "strata_col": args.strata_col,
        "mahalanobis": format!("{:?}", args.mahalanobis).to_lowercase(),
        "matcher": format!("{:?}", args.matcher).to_lowercase(),
        "design": args.design.map(|d| format!("{d:?}").to_lowercase()),
        "k": args.k,
        "arms": args.arms,
        "factor": args.factor,
        "max_redraws": args.max_redraws,
    })
}

#[derive(Debug, Serialize)]
struct TestOutput {
    contrast: String,
    estimate: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    variance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    statistic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    df: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reject: Option<bool>,
    alpha: f64,
    method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    ci: Option<(f64, f64)>,
    warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    fs::create_dir_all(&args.out_dir)?;
    let units = read_units_csv(fs::File::open(&args.data)?)?;
    if units.arms.is_none() || units.outcomes.is_none() {
        return Err(Error::InvalidArgument(
            "analysis needs `arm` and `y` columns".into(),
        ));
    }
    let num_arms = match (args.k, args.arms) {
        (Some(k), _) => FactorSpace::new(k)?.arm_count(),
        (None, Some(a)) => a,
        (None, None) => *units.arms.as_ref().expect("checked").iter().max().unwrap_or(&2),
    };
    let strata_idx = args
        .strata_col
        .as_deref()
        .map(|c| units.covariate_index(c))
        .transpose()?;
    let sample = units.clone().into_sample(num_arms)?;
    let partition = args
        .partition
        .as_ref()
        .map(|p| -> Result<BlockPartition> {
            read_partition_csv(fs::File::open(p)?, &sample)
        })
        .transpose()?;
    let fs_opt = args.k.map(FactorSpace::new).transpose()?;

    let contrasts: Vec<Contrast> = if matches!(args.variance, VarianceId::Quad2c) {
        let full = two_control_quad_contrast();
        (0..3)
            .map(|i| {
                Contrast::from_rows(vec![full.rows()[i].clone()], 4, format!("quad2c:{i}"))
            })
            .collect::<Result<_>>()?
    } else {
        if args.contrasts.is_empty() {
            return Err(Error::InvalidArgument(
                "pass at least one --contrast spec".into(),
            ));
        }
        args.contrasts
            .iter()
            .map(|s| parse_contrast_spec(s, fs_opt.as_ref(), num_arms, args.rescale))
            .collect::<Result<_>>()?
    };

    let mut outputs = Vec::new();
    let mut any_error = false;
    for nu in &contrasts {
        let result = analyze_one(&args, &sample, &units, nu, partition.as_ref(), strata_idx);
        match result {
            Ok(out) => outputs.push(out),
            Err(err) => {
                any_error = true;
                let estimate = gamma_hat(&sample)
                    .and_then(|g| delta_hat(&g, nu))
                    .unwrap_or_default();
                outputs.push(TestOutput {
                    contrast: nu.label.clone(),
                    estimate,
                    variance: None,
                    statistic: None,
                    df: None,
                    p_value: None,
                    reject: None,
                    alpha: args.alpha,
                    method: format!("{:?}", args.variance).to_lowercase(),
                    ci: None,
                    warnings: Vec::new(),
                    error: Some(err.to_string()),
                });
            }
        }
    }

    fs::write(
        args.out_dir.join("analysis.json"),
        serde_json::to_string_pretty(&outputs).expect("json") + "\n",
    )?;
    let mut manifest = RunManifest::new("analyze", None, analyze_config_json(&args));
    manifest.digest_input(&args.data)?;
    if let Some(p) = &args.partition {
        manifest.digest_input(p)?;
    }
    manifest.write(&args.out_dir)?;
    if any_error {
        return Err(Error::DegenerateVariance(
            "one or more contrasts failed; see analysis.json".into(),
        ));
    }
    Ok(())
}

fn analyze_one(
    args: &AnalyzeArgs,
    sample: &Sample,
    units: &tupleworks_core::io::UnitsCsv,
    nu: &Contrast,
    partition: Option<&BlockPartition>,
    strata_idx: Option<usize>,
) -> Result<TestOutput> {
    let need_partition = || -> Result<&BlockPartition> {
        partition.ok_or_else(|| {
            Error::InvalidArgument("this variance method needs --partition".into())
        })
    };
    // scalar pairwise methods test arm d against arm 1 directly
    let pair_target = |nu: &Contrast| -> Result<usize> {
        let row = &nu.rows()[0];
        let d = row.iter().position(|&x| x == 1.0).map(|i| i + 1);
        let base = row.iter().position(|&x| x == -1.0).map(|i| i + 1);
        match (d, base) {
            (Some(d), Some(1)) if nu.m() == 1 => Ok(d),
            _ => Err(Error::InvalidContrast(
                "this variance method needs a `pair:d,1` contrast".into(),
            )),
        }
    };

    let (report, estimate): (VarianceReport, Vec<f64>) = match args.variance {
        VarianceId::Adjusted | VarianceId::AdjustedRep => {
            let replicate = matches!(args.variance, VarianceId::AdjustedRep);
            let report = v_hat_adjusted(sample, need_partition()?, nu, replicate)?;
            let est = delta_hat(&gamma_hat(sample)?, nu)?;
            (report, est)
        }
        VarianceId::SfeHc0 | VarianceId::SfeHc1 => {
            let d = pair_target(nu)?;
            let hc1 = matches!(args.variance, VarianceId::SfeHc1);
            let report = v_hat_sfe(sample, need_partition()?, d, hc1)?;
            let est = delta_hat(&gamma_hat(sample)?, nu)?;
            (report, est)
        }
        VarianceId::Bcve => {
            let d = pair_target(nu)?;
            let report = v_hat_bcve(sample, need_partition()?, d)?;
            let est = delta_hat(&gamma_hat(sample)?, nu)?;
            (report, est)
        }
        VarianceId::Strat => {
            let codes = match strata_idx {
                Some(idx) => {
                    let vals: Vec<f64> = units.covariates.iter().map(|r| r[idx]).collect();
                    strata_codes(&vals)
                }
                None => vec![0usize; sample.len()],
            };
            let report = v_hat_strat_plugin(sample, &codes, nu)?;
            let est = delta_hat(&gamma_hat(sample)?, nu)?;
            (report, est)
        }
        VarianceId::Quad2c => {
            let which: usize = nu
                .label
                .rsplit(':')
                .next()
                .and_then(|s| s.parse().ok())
                .expect("label set above");
            let report =
                tupleworks_core::variance::v_hat_two_control_quad(sample, need_partition()?, which)?;
            let pseudo = quad_relabel(sample, need_partition()?)?;
            let est = delta_hat(&gamma_hat(&pseudo)?, nu)?;
            (report, est)
        }
    };

    let mut warnings = report.warnings.clone();
    if estimate.len() == 1 {
        let scalar = report.v_contrast.get(0, 0);
        let test = match args.variance {
            VarianceId::SfeHc0 | VarianceId::SfeHc1 | VarianceId::Bcve => {
                t_test(estimate[0], scalar, report.n, args.delta0, args.alpha)?
            }
            _ => wald_test(
                &estimate,
                &report.v_contrast,
                &Mat::identity(1),
                &[args.delta0],
                report.n,
                args.alpha,
            )?,
        };
        warnings.extend(test.warnings.clone());
        let ci = confidence_interval(estimate[0], scalar, report.n, args.alpha)?;
        Ok(TestOutput {
            contrast: nu.label.clone(),
            estimate,
            variance: Some(scalar),
            statistic: Some(test.statistic),
            df: test.df,
            p_value: Some(test.p_value),
            reject: Some(test.reject),
            alpha: args.alpha,
            method: format!("{}+{}", report.method.as_str(), test.method),
            ci: Some(ci),
            warnings,
            error: None,
        })
    } else {
        let delta0 = vec![args.delta0; estimate.len()];
        let test = wald_test(
            &estimate,
            &report.v_contrast,
            &Mat::identity(estimate.len()),
            &delta0,
            report.n,
            args.alpha,
        )?;
        warnings.extend(test.warnings.clone());
        Ok(TestOutput {
            contrast: nu.label.clone(),
            estimate,
            variance: None,
            statistic: Some(test.statistic),
            df: test.df,
            p_value: Some(test.p_value),
            reject: Some(test.reject),
            alpha: args.alpha,
            method: format!("{}+{}", report.method.as_str(), test.method),
            ci: None,
            warnings,
            error: None,
        })
    }
}

fn analyze_config_json(args: &AnalyzeArgs) -> serde_json::Value {
    json!({
        "data": args.data.display().to_string(),
        "partition": args.partition.as_ref().map(|p| p.display().to_string()),
        "contrasts": args.contrasts,
        "variance": format!("{:?}", args.variance).to_lowercase(),
        "alpha": args.alpha,
        "delta0": args.delta0,
        "k": args.k,
        "arms": args.arms,
        "rescale": args.rescale,
        "strata_col": args.strata_col,
    })
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    if let Some(n) = args.threads {
        tupleworks_core::simlab::study::set_threads(n)?;
    }
    fs::create_dir_all(&args.out_dir)?;
    let raw = fs::read_to_string(&args.config)?;
    let cfg: StudyConfig = serde_json::from_str(&raw)
        .map_err(|e| Error::InvalidArgument(format!("bad study config: {e}")))?;

    match cfg.study.as_str() {
        "mse" => {
            let report = run_mse_study(&cfg)?;
            write_report(&args.out_dir, &report)?;
            write_mse_csv(&args.out_dir, &report)?;
        }
        "size-power" => {
            let report = run_size_power_study(&cfg)?;
            write_report(&args.out_dir, &report)?;
            write_rejection_csv(&args.out_dir, &report)?;
        }
        "power-curve" => {
            let grid = cfg.tau_grid.clone().ok_or_else(|| {
                Error::InvalidArgument("power-curve study needs tau_grid".into())
            })?;
            let points = run_power_curve(&cfg, &grid)?;
            fs::write(
                args.out_dir.join("report.json"),
                serde_json::to_string_pretty(&points).expect("json") + "\n",
            )?;
            let mut csv = String::from("design,parameter,tau,reject_rate\n");
            for p in &points {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    csv_field(&p.design),
                    csv_field(&p.parameter),
                    p.tau,
                    p.reject_rate
                ));
            }
            fs::write(args.out_dir.join("power_curve.csv"), csv)?;
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown study {other:?}; valid: mse, size-power, power-curve"
            )))
        }
    }

    let mut manifest = RunManifest::new(
        "simulate",
        Some(cfg.seed),
        serde_json::from_str(&raw).expect("validated above"),
    );
    manifest.digest_input(&args.config)?;
    manifest.write(&args.out_dir)?;
    Ok(())
}

fn write_report(dir: &Path, report: &StudyReport) -> Result<()> {
    fs::write(
        dir.join("report.json"),
        serde_json::to_string_pretty(report).expect("json") + "\n",
    )?;
    Ok(())
}

fn cell_value(report: &StudyReport, design: &str, parameter: &str) -> Option<usize> {
    report
        .cells
        .iter()
        .position(|c| c.design == design && c.parameter == parameter)
}

// quote a CSV field when it carries separators
fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One row per parameter, one column per design holding the MSE ratio
/// against the matched-tuples design (absolute MSE when it is absent).
fn write_mse_csv(dir: &Path, report: &StudyReport) -> Result<()> {
    let mut out = String::from("parameter");
    for d in &report.designs {
        out.push_str(&format!(",{d}"));
    }
    out.push('\n');
    for p in &report.parameters {
        out.push_str(&csv_field(p));
        for d in &report.designs {
            let idx = cell_value(report, d, p).expect("cell exists");
            let cell = &report.cells[idx];
            let v = cell.mse_ratio_vs_mt.or(cell.mse).unwrap_or(f64::NAN);
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    fs::write(dir.join("mse.csv"), out)?;
    Ok(())
}

/// One row per parameter; per design a null-rate column, then per design an
/// alternative-rate column.
fn write_rejection_csv(dir: &Path, report: &StudyReport) -> Result<()> {
    let mut out = String::from("parameter");
    for d in &report.designs {
        out.push_str(&format!(",{d}_null"));
    }
    for d in &report.designs {
        out.push_str(&format!(",{d}_alt"));
    }
    out.push('\n');
    for p in &report.parameters {
        out.push_str(&csv_field(p));
        for d in &report.designs {
            let idx = cell_value(report, d, p).expect("cell exists");
            out.push_str(&format!(
                ",{}",
                report.cells[idx].reject_null.unwrap_or(f64::NAN)
            ));
        }
        for d in &report.designs {
            let idx = cell_value(report, d, p).expect("cell exists");
            out.push_str(&format!(
                ",{}",
                report.cells[idx].reject_alt.unwrap_or(f64::NAN)
            ));
        }
        out.push('\n');
    }
    fs::write(dir.join("rejection.csv"), out)?;
    Ok(())
}
