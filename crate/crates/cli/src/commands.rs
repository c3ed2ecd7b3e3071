use std::fs::File;
use std::path::Path;

use serde::Serialize;
use slabsel::dataset::{self, format_g17, label_best, read_csv_file, CaseRecord, Criterion, FeatureGrid, TieBreak};
use slabsel::eval::{rank_models, repeated_stratified_kfold, write_fold_csv, CvConfig, EvalReport};
use slabsel::ml::{fit, gini_importance, read_model, write_model, LabeledDataset, ModelKind, ModelParams, TrainedModel, FEATURE_NAMES};
use slabsel::transport::SlabProblem;

use crate::args::{EvaluateArgs, GenerateArgs, RecommendArgs, ReportArgs, TrainArgs};
use crate::error::{CliError, CliResult};
use crate::output::{
    create_dir, distribution_csv, distribution_summary, distribution_svg, feature_space_csv, ranking_table, write_atomic,
};

fn load_dataset(path: &Path) -> CliResult<Vec<CaseRecord>> {
    if !path.exists() {
        return Err(CliError::io(path, std::io::ErrorKind::NotFound.into()));
    }
    Ok(read_csv_file(path)?)
}

fn load_model(path: &Path) -> CliResult<TrainedModel> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_model(file).map_err(|e| match e {
        slabsel::Error::ModelFormat(m) => slabsel::Error::ModelFormat(format!("{}: {m}", path.display())).into(),
        other => other.into(),
    })
}

pub fn generate(args: GenerateArgs) -> CliResult<()> {
    let defaults = FeatureGrid::default();
    let grid = FeatureGrid {
        sn_orders: args.sn_orders.unwrap_or(defaults.sn_orders),
        cell_counts: args.cells.unwrap_or(defaults.cell_counts),
        scattering_ratios: args.ratios.unwrap_or(defaults.scattering_ratios),
    };
    let template = SlabProblem {
        tolerance: args.tolerance,
        max_sweeps: args.max_sweeps,
        ..SlabProblem::default()
    };
    if args.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    template.validate()?;
    for &sn_order in &grid.sn_orders {
        SlabProblem { sn_order, ..template.clone() }.validate()?;
    }
    for &num_cells in &grid.cell_counts {
        SlabProblem { num_cells, ..template.clone() }.validate()?;
    }
    for &scattering_ratio in &grid.scattering_ratios {
        SlabProblem {
            scattering_ratio,
            ..template.clone()
        }
        .validate()?;
    }
    let jobs = if args.time_serial && args.jobs > 1 {
        eprintln!("note: solving serially for runtime labels; pass --time-serial false to use {} jobs", args.jobs);
        1
    } else {
        args.jobs
    };

    let mut records = dataset::generate(&grid, &template, jobs)?;
    let tie_break = TieBreak::default();
    label_best(&mut records, Criterion::Sweeps, &tie_break)?;
    label_best(&mut records, Criterion::Runtime, &tie_break)?;
    write_atomic(&args.output, |out| Ok(dataset::write_csv(&records, out)?))?;
    println!("Wrote {} cases to {}", records.len(), args.output.display());
    print!("{}", distribution_summary(&records));
    Ok(())
}

pub fn train(args: TrainArgs) -> CliResult<()> {
    let spec = args.params.spec(args.model);
    spec.validate()?;
    let criterion: Criterion = args.label.into();
    let records = load_dataset(&args.data)?;
    let data = LabeledDataset::from_records(&records, criterion)?;
    let model = fit(&data, &spec)?;
    write_atomic(&args.output, |out| Ok(write_model(out, &model)?))?;
    println!(
        "Trained {} on {} cases ({} labels) -> {}",
        args.model,
        data.len(),
        criterion,
        args.output.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct EvaluationDocument<'a> {
    label: Criterion,
    cv: CvConfig,
    reports: &'a [EvalReport],
}

pub fn evaluate(args: EvaluateArgs) -> CliResult<()> {
    let kinds: Vec<ModelKind> = match args.model {
        Some(kind) => vec![kind],
        None => ModelKind::ALL.to_vec(),
    };
    let cv = CvConfig {
        folds: args.folds,
        repeats: args.repeats,
        seed: args.params.seed,
    };
    cv.validate()?;
    let specs: Vec<_> = kinds.iter().map(|&k| args.params.spec(k)).collect();
    for spec in &specs {
        spec.validate()?;
    }
    let criterion: Criterion = args.label.into();
    let records = load_dataset(&args.data)?;
    let data = LabeledDataset::from_records(&records, criterion)?;

    let mut reports = Vec::with_capacity(specs.len());
    for spec in &specs {
        let mut report = repeated_stratified_kfold(&data, spec, &cv)?;
        report.label = Some(criterion);
        eprintln!(
            "{}: accuracy {:.3}, kappa {:.3}",
            report.model, report.accuracy_mean, report.kappa_mean
        );
        reports.push(report);
    }
    let reports = rank_models(reports);
    let doc = EvaluationDocument {
        label: criterion,
        cv,
        reports: &reports,
    };
    write_atomic(&args.report, |out| {
        serde_json::to_writer_pretty(&mut *out, &doc).map_err(slabsel::Error::from)?;
        out.write_all(b"\n").map_err(|e| CliError::io(&args.report, e))
    })?;
    write_atomic(&args.folds_csv, |out| Ok(write_fold_csv(out, &reports)?))?;
    println!(
        "{}-fold x {} cross-validation on {} cases ({} labels)",
        cv.folds,
        cv.repeats,
        data.len(),
        criterion
    );
    print!("{}", ranking_table(&reports));
    Ok(())
}

pub fn recommend(args: RecommendArgs) -> CliResult<()> {
    if args.sn_order == 0 || args.cells == 0 {
        return Err(CliError::Usage("--sn-order and --cells must be positive integers".into()));
    }
    if !(0.0..=1.0).contains(&args.ratio) {
        return Err(CliError::Usage(format!(
            "--ratio must lie in [0, 1], got {}",
            args.ratio
        )));
    }
    let model = load_model(&args.model)?;
    let prediction = model.predict(&[args.sn_order as f64, args.cells as f64, args.ratio]);
    println!("{}", prediction.class);
    if let Some(scores) = prediction.scores {
        for (solver, score) in slabsel::transport::Solver::ALL.iter().zip(scores) {
            println!("{solver}\t{score}");
        }
    }
    Ok(())
}

pub fn report(args: ReportArgs) -> CliResult<()> {
    let records = load_dataset(&args.data)?;
    let model = args.model.as_deref().map(load_model).transpose()?;
    let importance = model.as_ref().map(gini_importance).transpose()?;
    create_dir(&args.out_dir)?;
    let dir = &args.out_dir;
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |e: std::io::Error| CliError::io(path, e)
    };

    for criterion in [Criterion::Sweeps, Criterion::Runtime] {
        let path = dir.join(format!("distribution_{}.csv", criterion.name()));
        write_atomic(&path, |out| distribution_csv(&records, criterion, out).map_err(io(&path)))?;
    }
    let path = dir.join("distribution.svg");
    write_atomic(&path, |out| distribution_svg(&records, out).map_err(io(&path)))?;
    let path = dir.join("feature_space.csv");
    write_atomic(&path, |out| feature_space_csv(&records, out).map_err(io(&path)))?;
    println!("Wrote distribution and feature-space files to {}", dir.display());

    if let (Some(model), Some(importance)) = (model, importance) {
        let ModelParams::Rf(forest) = &model.params else {
            unreachable!("importance succeeded only for forests")
        };
        let tree = forest.trees.get(args.tree).ok_or_else(|| {
            CliError::Usage(format!(
                "--tree {} out of range (forest has {} trees)",
                args.tree,
                forest.trees.len()
            ))
        })?;
        let path = dir.join("importance.csv");
        write_atomic(&path, |out| {
            let mut write = || -> std::io::Result<()> {
                writeln!(out, "feature,mean_decrease_gini")?;
                for (name, value) in FEATURE_NAMES.iter().zip(importance) {
                    writeln!(out, "{name},{}", format_g17(value))?;
                }
                Ok(())
            };
            write().map_err(io(&path))
        })?;
        let path = dir.join("tree.txt");
        let text = tree.export_text(args.tree_depth);
        write_atomic(&path, |out| out.write_all(text.as_bytes()).map_err(io(&path)))?;
        for (name, value) in FEATURE_NAMES.iter().zip(importance) {
            println!("{name:<17}{value:>12.2}");
        }
    }
    Ok(())
}
