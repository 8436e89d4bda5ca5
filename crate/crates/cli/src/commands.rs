use std::path::{Path, PathBuf};

use rhc_msvm::data::select;
use rhc_msvm::{
    load_delimited, make_subset, minimize_hinge, solve_ncr, solve_rhc, Dataset,
    DrsConfig, HsdmConfig, ModelDocument, NcrConfig, SolverKind, SolverReport, SubsetSpec,
};

use crate::config::{NcrSection, PaperConfig, RhcSection, RunConfig, SolverChoice};
use crate::error::CliError;
use crate::output;
use crate::Overrides;

fn out_dir(cfg_out: Option<&PathBuf>, overrides: &Overrides) -> PathBuf {
    overrides
        .out
        .clone()
        .or_else(|| cfg_out.cloned())
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn rhc_config(section: &RhcSection, o: &Overrides) -> HsdmConfig {
    let mut cfg = section.to_config();
    if let Some(r) = o.rho1 {
        cfg.rho1 = Some(r);
    }
    if let Some(n) = o.max_iters {
        cfg.max_iterations = n;
    }
    if let Some(t) = o.tol {
        cfg.residual_tol = t;
    }
    cfg
}

fn ncr_config(section: &NcrSection, o: &Overrides) -> NcrConfig {
    let mut cfg = section.to_config();
    if let Some(c) = o.c_value {
        cfg.c = c;
    }
    if let Some(n) = o.max_iters {
        cfg.max_iterations = n;
    }
    if let Some(t) = o.tol {
        cfg.tol = t;
    }
    cfg
}

/// Loads the configured file and applies the subset (with its separability
/// check) when one is configured.
fn load_dataset(cfg: &RunConfig, certify: bool) -> Result<(Dataset, Option<SubsetSpec>), CliError> {
    let schema = cfg.schema();
    let full = load_delimited(&cfg.data.path, &schema)?;
    match &cfg.data.subset {
        None => Ok((full, None)),
        Some(path) => {
            let spec = SubsetSpec::load(path)?.resolve(&schema)?;
            let d = if certify {
                make_subset(&full, &spec)?
            } else {
                select(&full, &spec)?
            };
            Ok((d, Some(spec)))
        }
    }
}

fn load_model(path: &Path) -> Result<ModelDocument, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    ModelDocument::from_toml(&text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn check_model_fits(model: &ModelDocument, d: &Dataset, path: &Path) -> Result<(), CliError> {
    let p = &model.params;
    if p.n_features() != d.n_features() || p.n_classes() != d.n_classes() {
        return Err(CliError::Io(format!(
            "{}: model has N = {}, K = {} but the dataset has N = {}, K = {}",
            path.display(),
            p.n_features(),
            p.n_classes(),
            d.n_features(),
            d.n_classes()
        )));
    }
    Ok(())
}

pub fn prepare_data(config: &Path, o: &Overrides) -> Result<(), CliError> {
    let cfg = RunConfig::load(config)?;
    let (d, spec) = load_dataset(&cfg, true)?;
    let dir = out_dir(cfg.out.as_ref(), o);
    output::ensure_dir(&dir)?;
    output::write(&dir.join("dataset.csv"), &output::dataset_csv(&d))?;
    let least = minimize_hinge(&d, &DrsConfig::default())?;
    let hist = d.label_histogram();
    let mut summary = format!(
        "samples = {}\nfeatures = {}\nclasses = {}\nlabel_histogram = {:?}\nleast_hinge_loss = {:e}\n",
        d.len(),
        d.n_features(),
        d.n_classes(),
        hist,
        least.hinge_loss
    );
    if let Some(sep) = spec.as_ref().and_then(|s| s.separable) {
        summary.push_str(&format!("separable = {sep}\n"));
    }
    output::write(&dir.join("dataset.toml"), &summary)?;
    println!(
        "prepared {} samples, {} features, {} classes (histogram {:?}), least hinge loss {:.3e} -> {}",
        d.len(),
        d.n_features(),
        d.n_classes(),
        hist,
        least.hinge_loss,
        dir.display()
    );
    Ok(())
}

fn write_run(dir: &Path, model: &ModelDocument, report: &SolverReport) -> Result<(), CliError> {
    output::ensure_dir(dir)?;
    output::write(&dir.join("model.toml"), &model.to_toml()?)?;
    output::write(&dir.join("report.toml"), &report.to_toml()?)?;
    let mut history = Vec::new();
    report
        .write_history(&mut history)
        .map_err(|e| CliError::Io(e.to_string()))?;
    output::write(
        &dir.join("history.csv"),
        std::str::from_utf8(&history).expect("history is ASCII"),
    )?;
    Ok(())
}

fn run_solver(
    d: &Dataset,
    solver: SolverChoice,
    rhc: &HsdmConfig,
    ncr: &NcrConfig,
) -> Result<(ModelDocument, SolverReport), CliError> {
    let (p, report) = match solver {
        SolverChoice::Rhc => solve_rhc(d, rhc)?,
        SolverChoice::Ncr => solve_ncr(d, ncr)?,
    };
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let kind = match solver {
        SolverChoice::Rhc => SolverKind::Rhc,
        SolverChoice::Ncr => SolverKind::Ncr,
    };
    Ok((ModelDocument::new(kind, p), report))
}

fn describe(report: &SolverReport) -> String {
    let sm = report.evaluation.smallest_margin();
    format!(
        "{}: {} iterations in {:.1}s, hinge loss {:.6e}, risk count {}, smallest margin {:.4} at ({}, {})",
        report.solver,
        report.iterations,
        report.wall_time_secs,
        report.evaluation.hinge_loss,
        report.evaluation.risk_count,
        sm.margin,
        sm.r,
        sm.s
    )
}

pub fn train(config: &Path, o: &Overrides) -> Result<(), CliError> {
    let cfg = RunConfig::load(config)?;
    let solver = o.solver.or(cfg.solver).ok_or_else(|| {
        CliError::Config("no solver selected: set `solver` in the config or pass --solver".into())
    })?;
    let rhc = rhc_config(&cfg.rhc, o);
    let ncr = ncr_config(&cfg.ncr, o);
    rhc.validate()?;
    let (d, _) = load_dataset(&cfg, false)?;
    let dir = out_dir(cfg.out.as_ref(), o);
    let (model, report) = run_solver(&d, solver, &rhc, &ncr)?;
    write_run(&dir, &model, &report)?;
    println!("{} -> {}", describe(&report), dir.display());
    Ok(())
}

pub fn evaluate(config: &Path, model_path: &Path, o: &Overrides) -> Result<(), CliError> {
    let cfg = RunConfig::load(config)?;
    let (d, _) = load_dataset(&cfg, false)?;
    let model = load_model(model_path)?;
    check_model_fits(&model, &d, model_path)?;
    let rep = rhc_msvm::evaluate(&model.params, &d)?;
    let dir = out_dir(cfg.out.as_ref(), o);
    output::ensure_dir(&dir)?;
    output::write(&dir.join("evaluation.toml"), &rep.to_toml()?)?;
    let sm = rep.smallest_margin();
    println!(
        "hinge loss {:.6e}, risk count {}, smallest margin {:.6} at ({}, {}), worst-pair objective {:.6}",
        rep.hinge_loss, rep.risk_count, sm.margin, sm.r, sm.s, rep.worst_pair_objective
    );
    Ok(())
}

pub fn compare(config: &Path, a: &Path, b: &Path, o: &Overrides) -> Result<(), CliError> {
    let cfg = RunConfig::load(config)?;
    let (d, _) = load_dataset(&cfg, false)?;
    let ma = load_model(a)?;
    let mb = load_model(b)?;
    check_model_fits(&ma, &d, a)?;
    check_model_fits(&mb, &d, b)?;
    let ra = rhc_msvm::evaluate(&ma.params, &d)?;
    let rb = rhc_msvm::evaluate(&mb.params, &d)?;
    let name = |m: &ModelDocument, p: &Path| format!("{}:{}", m.solver, p.display());
    let (na, nb) = (name(&ma, a), name(&mb, b));
    let csv = output::comparison_csv(&[&na, &nb], &[&ra, &rb]);
    let dir = out_dir(cfg.out.as_ref(), o);
    output::ensure_dir(&dir)?;
    output::write(&dir.join("comparison.csv"), &csv)?;
    print!("{}", output::pretty_table(&csv));
    Ok(())
}

fn emit(dir: &Path, tag: &str, model: &ModelDocument, d: &Dataset) -> Result<(), CliError> {
    if d.n_features() != 2 || model.params.n_features() != 2 {
        return Err(CliError::Config(format!(
            "boundary emission needs N = 2, got N = {}",
            model.params.n_features()
        )));
    }
    output::ensure_dir(dir)?;
    output::write(
        &dir.join(format!("boundaries{tag}.csv")),
        &output::boundaries_csv(&model.params),
    )?;
    output::write(&dir.join("samples.csv"), &output::samples_csv(d))?;
    Ok(())
}

pub fn emit_boundaries(config: &Path, model_path: &Path, o: &Overrides) -> Result<(), CliError> {
    let cfg = RunConfig::load(config)?;
    let (d, _) = load_dataset(&cfg, false)?;
    let model = load_model(model_path)?;
    check_model_fits(&model, &d, model_path)?;
    let dir = out_dir(cfg.out.as_ref(), o);
    emit(&dir, "", &model, &d)?;
    println!(
        "wrote {} boundary lines and {} samples -> {}",
        3 * d.n_classes() * (d.n_classes() - 1) / 2,
        d.len(),
        dir.display()
    );
    Ok(())
}

pub fn reproduce_paper(config: &Path, o: &Overrides) -> Result<(), CliError> {
    let cfg = PaperConfig::load(config)?;
    let rhc = rhc_config(&cfg.rhc, o);
    rhc.validate()?;
    let root = out_dir(cfg.out.as_ref(), o);
    let schema = rhc_msvm::Schema::iris();
    let full = load_delimited(&cfg.data, &schema)?;
    let mut summary = String::from(
        "experiment,solver,c,risk_count,hinge_loss,smallest_margin,pair,iterations,converged\n",
    );
    for e in &cfg.experiment {
        let spec = SubsetSpec::load(&e.subset)?.resolve(&schema)?;
        let d = make_subset(&full, &spec)?;
        let dir = root.join(&e.name);
        output::ensure_dir(&dir)?;
        output::write(&dir.join("dataset.csv"), &output::dataset_csv(&d))?;
        eprintln!("[{}] {} samples, histogram {:?}", e.name, d.len(), d.label_histogram());

        let mut row = |solver: &str, c: Option<f64>, r: &SolverReport| {
            let sm = r.evaluation.smallest_margin();
            summary.push_str(&format!(
                "{},{solver},{},{},{:e},{},({} {}),{},{}\n",
                e.name,
                c.map_or(String::new(), |c| c.to_string()),
                r.evaluation.risk_count,
                r.evaluation.hinge_loss,
                sm.margin,
                sm.r,
                sm.s,
                r.iterations,
                r.converged
            ));
        };

        let (rhc_model, rhc_report) = run_solver(&d, SolverChoice::Rhc, &rhc, &NcrConfig::default())?;
        eprintln!("[{}] {}", e.name, describe(&rhc_report));
        write_run(&dir.join("rhc"), &rhc_model, &rhc_report)?;
        row("rhc", None, &rhc_report);

        let mut headline = None;
        for &c in &e.ncr_c {
            let ncr = NcrConfig {
                c,
                ..ncr_config(&cfg.ncr, o)
            };
            let (m, r) = run_solver(&d, SolverChoice::Ncr, &rhc, &ncr)?;
            eprintln!("[{}] C = {c}: {}", e.name, describe(&r));
            write_run(&dir.join(format!("ncr_c{c}")), &m, &r)?;
            row("ncr", Some(c), &r);
            headline = Some((m, r));
        }
        let (ncr_model, ncr_report) = headline.expect("at least one C per experiment");
        let csv = output::comparison_csv(&["rhc", "ncr"], &[&rhc_report.evaluation, &ncr_report.evaluation]);
        output::write(&dir.join("comparison.csv"), &csv)?;
        if d.n_features() == 2 {
            emit(&dir, "_rhc", &rhc_model, &d)?;
            emit(&dir, "_ncr", &ncr_model, &d)?;
        }
    }
    output::ensure_dir(&root)?;
    output::write(&root.join("summary.csv"), &summary)?;
    print!("{}", output::pretty_table(&summary));
    Ok(())
}
