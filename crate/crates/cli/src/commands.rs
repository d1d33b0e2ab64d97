use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use log::{info, warn};
use sumue_core::analysis::{
    correlation_matrix, parse_annotation_file, run_experiment, CorrelationAxis, ExperimentInput, ExperimentKind,
    PrrTable,
};
use sumue_core::nlg::{
    emit_judge_prompts, ingest_metric_scores, parse_judge_responses, Dimension, JudgePromptBatch, JudgeVariant,
    MetricDescriptor, MetricSource, TargetSource,
};
use sumue_core::pipeline::{self, score_methods, score_native_metrics, ScoringInputs};
use sumue_core::record::parse_embedding_file;
use sumue_core::{parse_record_file, validate_record, GenerationRecord, ScoreKind, ScoreVector};

use crate::config::{Overrides, RunConfig};
use crate::output::{upsert, write_atomic, write_json, Manifest, ScoreStore, SkipReport, SKIP_REPORT};
use crate::render;
use crate::{
    AxisArg, Cli, CliError, Command, CorrelateArgs, EmitPromptsArgs, EvaluateArgs, ExperimentArg, HumanEvalArgs,
    IngestArgs, ScoreArgs, Selection, VariantArg,
};

type CmdResult<T = ()> = Result<T, CliError>;

pub fn run(cli: Cli) -> CmdResult {
    let overrides = Overrides {
        seed: cli.seed,
        alpha: cli.alpha,
        out: cli.out.clone(),
    };
    let cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;
    match cli.command {
        Command::Score(args) => cmd_score(&cfg, args),
        Command::Evaluate(args) => cmd_evaluate(&cfg, args),
        Command::Correlate(args) => cmd_correlate(&cfg, args),
        Command::EmitPrompts(args) => cmd_emit_prompts(&cfg, args),
        Command::IngestScores(args) => cmd_ingest(&cfg, args),
        Command::HumanEval(args) => cmd_human_eval(&cfg, args),
    }
}

fn load_corpus(cfg: &RunConfig) -> CmdResult<Vec<GenerationRecord>> {
    let path = cfg.corpus()?;
    let records = parse_record_file(path).with_context(|| format!("corpus {}", path.display()))?;
    if records.is_empty() {
        return Err(CliError::Data(anyhow!("corpus {} is empty", path.display())));
    }
    let dim = records.iter().find_map(|r| r.embedding.as_ref().map(Vec::len));
    let mut problems = Vec::new();
    for r in &records {
        let report = validate_record(r, dim);
        problems.extend(report.messages().into_iter().map(|m| format!("{}: {m}", r.id)));
    }
    if !problems.is_empty() {
        return Err(CliError::Data(anyhow!("invalid records:\n  {}", problems.join("\n  "))));
    }
    Ok(records)
}

fn parse_dimension(s: &str) -> CmdResult<Dimension> {
    s.parse().map_err(|e| CliError::Usage(format!("{e}")))
}

fn variant(v: VariantArg) -> JudgeVariant {
    match v {
        VariantArg::Wo => JudgeVariant::Wo,
        VariantArg::WiGt => JudgeVariant::WiGt,
        VariantArg::WiIn => JudgeVariant::WiIn,
        VariantArg::WiIngt => JudgeVariant::WiIngt,
    }
}

fn cmd_score(cfg: &RunConfig, args: ScoreArgs) -> CmdResult {
    let mut cfg = cfg.clone();
    if let Some(m) = args.methods {
        cfg.methods = m;
    }
    if let Some(m) = args.metrics {
        cfg.metrics = m;
    }
    let methods = cfg.ue_methods()?;
    let metrics = cfg.native_metrics()?;
    let records = load_corpus(&cfg)?;

    let training: Option<Vec<Vec<f64>>> = cfg
        .training_embeddings
        .as_deref()
        .map(|p| -> anyhow::Result<_> {
            Ok(parse_embedding_file(p)
                .with_context(|| format!("training embeddings {}", p.display()))?
                .into_iter()
                .map(|(_, v)| v)
                .collect())
        })
        .transpose()?;
    let reference: Option<HashMap<String, Vec<f64>>> = cfg
        .reference_embeddings
        .as_deref()
        .map(|p| -> anyhow::Result<_> {
            let mut map = HashMap::new();
            for (i, (id, v)) in parse_embedding_file(p)
                .with_context(|| format!("reference embeddings {}", p.display()))?
                .into_iter()
                .enumerate()
            {
                let id = id.ok_or_else(|| anyhow!("{}: line {} has no id", p.display(), i + 1))?;
                map.insert(id, v);
            }
            Ok(map)
        })
        .transpose()?;
    let p_true = cfg
        .p_true_responses
        .as_deref()
        .map(|p| pipeline::parse_p_true_file(p).with_context(|| format!("P(True) responses {}", p.display())))
        .transpose()?;

    let inputs = ScoringInputs {
        records: &records,
        training_embeddings: training.as_deref(),
        p_true: p_true.as_ref(),
        reference_embeddings: reference.as_ref(),
    };
    let ue = score_methods(&methods, &inputs, &cfg.scoring);
    let nlg = score_native_metrics(&metrics, &inputs);

    let store = ScoreStore::new(cfg.scores_dir());
    let mut manifest = Manifest::default();
    for v in ue.scores.iter().chain(&nlg.scores) {
        upsert(&mut manifest, store.write_scores(v, Vec::new())?);
    }

    let ids: Vec<String> = records.iter().map(|r| r.id.clone()).collect();
    for m in &cfg.ingested {
        let desc = MetricDescriptor::new(
            m.name.clone(),
            m.dimension,
            MetricSource::Ingested,
            m.target.unwrap_or(TargetSource::GroundTruth),
        );
        let v = ingest_metric_scores(&m.path, &desc, &ids).with_context(|| format!("metric {}", m.name))?;
        upsert(&mut manifest, store.write_scores(&v, Vec::new())?);
    }
    for j in &cfg.judge {
        let batch = JudgePromptBatch::read(&j.batch).with_context(|| format!("prompt batch {}", j.batch.display()))?;
        if batch.variant != j.variant || batch.dimension != j.dimension {
            return Err(CliError::Usage(format!(
                "{} holds {} prompts, config expects {}",
                j.batch.display(),
                batch.metric_name(),
                j.variant.metric_name(j.dimension)
            )));
        }
        let corpus_ids: HashSet<&str> = ids.iter().map(String::as_str).collect();
        if let Some(stray) = batch.items.iter().find(|i| !corpus_ids.contains(i.id.as_str())) {
            return Err(CliError::Data(anyhow!("{}: id {} is not in the corpus", j.batch.display(), stray.id)));
        }
        let parsed = parse_judge_responses(&j.responses, &batch)
            .with_context(|| format!("judge responses {}", j.responses.display()))?;
        upsert(&mut manifest, store.write_scores(&parsed.scores, parsed.rejected)?);
    }
    store.write_manifest(&manifest)?;

    let report = SkipReport {
        skipped: ue.skipped.into_iter().chain(nlg.skipped).collect(),
    };
    for s in &report.skipped {
        eprintln!("skipped {}: {} ({})", s.name, s.reason, serde_json::to_string(&s.code).unwrap_or_default());
    }
    write_json(&cfg.out.join(SKIP_REPORT), &report)?;
    info!("wrote {} score vectors to {}", manifest.entries.len(), store.dir().display());
    Ok(())
}

fn select(names: &Option<Vec<String>>, entry_name: &str) -> bool {
    names
        .as_ref()
        .is_none_or(|ns| ns.iter().any(|n| n.eq_ignore_ascii_case(entry_name)))
}

fn load_selected(
    store: &ScoreStore,
    manifest: &Manifest,
    kind: ScoreKind,
    names: &Option<Vec<String>>,
) -> CmdResult<Vec<ScoreVector<f64>>> {
    if let Some(ns) = names {
        for n in ns {
            if !manifest.entries.iter().any(|e| e.kind == kind && e.name.eq_ignore_ascii_case(n)) {
                return Err(CliError::Usage(format!("no stored {kind:?} scores named {n:?}")));
            }
        }
    }
    manifest
        .entries
        .iter()
        .filter(|e| e.kind == kind && select(names, &e.name))
        .map(|e| store.read_scores(e).map_err(CliError::Data))
        .collect()
}

fn restrict(v: &ScoreVector<f64>, keep: &[String]) -> CmdResult<ScoreVector<f64>> {
    let pos: HashMap<&str, usize> = v.ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let values = keep.iter().map(|id| v.values[pos[id.as_str()]]).collect();
    Ok(ScoreVector::new(v.name.clone(), v.kind, keep.to_vec(), values)?)
}

/// Brings every vector onto one id list; differing ids are an error unless
/// `intersect` is set.
fn align(vectors: &mut [&mut Vec<ScoreVector<f64>>], intersect: bool, extra: Option<&HashSet<String>>) -> CmdResult {
    let Some(anchor) = vectors.iter().flat_map(|g| g.iter()).next().cloned() else {
        return Ok(());
    };
    let all_same = vectors.iter().flat_map(|g| g.iter()).all(|v| v.ids == anchor.ids)
        && extra.is_none_or(|ids| anchor.ids.iter().all(|id| ids.contains(id)));
    if all_same {
        return Ok(());
    }
    if !intersect {
        let other = vectors
            .iter()
            .flat_map(|g| g.iter())
            .find(|v| v.ids != anchor.ids)
            .map_or("annotations".to_string(), |v| v.name.clone());
        return Err(CliError::Data(anyhow!(
            "score ids of {} and {other} differ (use --intersect to evaluate on shared ids)",
            anchor.name
        )));
    }
    let mut keep: Vec<String> = anchor.ids.clone();
    for v in vectors.iter().flat_map(|g| g.iter()) {
        let ids: HashSet<&str> = v.ids.iter().map(String::as_str).collect();
        keep.retain(|id| ids.contains(id.as_str()));
    }
    if let Some(extra) = extra {
        keep.retain(|id| extra.contains(id));
    }
    warn!("evaluating on {} of {} ids shared by all score vectors", keep.len(), anchor.ids.len());
    if keep.len() < 2 {
        return Err(CliError::Data(anyhow!("fewer than 2 ids shared by all score vectors")));
    }
    for group in vectors.iter_mut() {
        for v in group.iter_mut() {
            *v = restrict(v, &keep)?;
        }
    }
    Ok(())
}

fn experiment_stem(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::UeNlg => "prr_table",
        ExperimentKind::UeHum => "prr_ue_hum",
        ExperimentKind::NlgHum => "prr_nlg_hum",
    }
}

fn write_table(out: &Path, stem: &str, table: &PrrTable<f64>) -> CmdResult {
    write_atomic(&out.join(format!("{stem}.csv")), render::table_csv(table)?.as_bytes())?;
    write_atomic(&out.join(format!("{stem}.md")), render::table_markdown(table).as_bytes())?;
    write_json(&out.join(format!("{stem}.json")), table)?;
    Ok(())
}

fn evaluate(cfg: &RunConfig, kind: ExperimentKind, selection: &Selection, annotations: Option<&Path>) -> CmdResult {
    for list in [&selection.methods, &selection.metrics].into_iter().flatten() {
        if list.iter().all(|n| n.trim().is_empty()) {
            return Err(CliError::Usage("empty selection list".into()));
        }
    }
    let store = ScoreStore::new(cfg.scores_dir());
    let manifest = store.read_manifest()?;
    let mut ue = Vec::new();
    let mut nlg = Vec::new();
    if kind != ExperimentKind::NlgHum {
        ue = load_selected(&store, &manifest, ScoreKind::Uncertainty, &selection.methods)?;
        if ue.is_empty() {
            return Err(CliError::Usage("no uncertainty scores selected".into()));
        }
    }
    if kind != ExperimentKind::UeHum {
        nlg = load_selected(&store, &manifest, ScoreKind::Nlg, &selection.metrics)?;
        if nlg.is_empty() {
            return Err(CliError::Usage("no NLG metric scores selected".into()));
        }
    }
    let annotations = match kind {
        ExperimentKind::UeNlg => None,
        _ => {
            let path = annotations
                .map(Path::to_path_buf)
                .or_else(|| cfg.annotations.clone())
                .ok_or_else(|| CliError::Usage("human experiments need annotations".into()))?;
            Some(parse_annotation_file(&path).with_context(|| format!("annotations {}", path.display()))?)
        }
    };
    let annotated: Option<HashSet<String>> = annotations.as_ref().map(|a| a.iter().map(|x| x.id.clone()).collect());
    align(&mut [&mut ue, &mut nlg], selection.intersect, annotated.as_ref())?;
    let table = run_experiment(
        kind,
        ExperimentInput {
            ue: &ue,
            nlg: &nlg,
            annotations: annotations.as_deref(),
        },
        cfg.baseline(),
    )?;
    write_table(&cfg.out, experiment_stem(kind), &table)
}

fn cmd_evaluate(cfg: &RunConfig, args: EvaluateArgs) -> CmdResult {
    let kind = match args.experiment {
        ExperimentArg::UeNlg => ExperimentKind::UeNlg,
        ExperimentArg::UeHum => ExperimentKind::UeHum,
        ExperimentArg::NlgHum => ExperimentKind::NlgHum,
    };
    evaluate(cfg, kind, &args.selection, args.annotations.as_deref())
}

fn cmd_human_eval(cfg: &RunConfig, args: HumanEvalArgs) -> CmdResult {
    for kind in [ExperimentKind::UeHum, ExperimentKind::NlgHum] {
        evaluate(cfg, kind, &args.selection, args.annotations.as_deref())?;
    }
    Ok(())
}

fn cmd_correlate(cfg: &RunConfig, args: CorrelateArgs) -> CmdResult {
    let path: PathBuf = args.table.unwrap_or_else(|| cfg.out.join("prr_table.json"));
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let table: PrrTable<f64> = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("prr_table").to_string();
    let axes: &[(CorrelationAxis, &str)] = match args.axis {
        AxisArg::Methods => &[(CorrelationAxis::BetweenMethods, "methods")],
        AxisArg::Metrics => &[(CorrelationAxis::BetweenMetrics, "metrics")],
        AxisArg::Both => &[
            (CorrelationAxis::BetweenMethods, "methods"),
            (CorrelationAxis::BetweenMetrics, "metrics"),
        ],
    };
    for &(axis, label) in axes {
        let m = correlation_matrix(&table, axis).with_context(|| format!("{label} correlation of {}", path.display()))?;
        let base = cfg.out.join(format!("{stem}_corr_{label}"));
        write_atomic(&base.with_extension("csv"), render::correlation_csv(&m)?.as_bytes())?;
        write_json(&base.with_extension("json"), &m)?;
        let title = format!("Spearman correlation between {label}");
        write_atomic(&base.with_extension("svg"), render::correlation_svg(&m, &title).as_bytes())?;
    }
    Ok(())
}

fn cmd_emit_prompts(cfg: &RunConfig, args: EmitPromptsArgs) -> CmdResult {
    let dimension = parse_dimension(&args.dimension)?;
    let variant = variant(args.variant);
    let records = load_corpus(cfg)?;
    let batch = emit_judge_prompts(&records, variant, dimension, &cfg.judge_template)?;
    let path = args.output.unwrap_or_else(|| {
        cfg.out
            .join("prompts")
            .join(format!("{}_{}.json", variant.label().replace('-', "_"), dimension.as_str()))
    });
    write_json(&path, &batch)?;
    Ok(())
}

fn cmd_ingest(cfg: &RunConfig, args: IngestArgs) -> CmdResult {
    let dimension = parse_dimension(&args.dimension)?;
    let records = load_corpus(cfg)?;
    let ids: Vec<String> = records.iter().map(|r| r.id.clone()).collect();
    let desc = MetricDescriptor::new(args.name, dimension, MetricSource::Ingested, TargetSource::GroundTruth);
    let v = ingest_metric_scores(&args.input, &desc, &ids)
        .with_context(|| format!("ingesting {}", args.input.display()))?;
    let store = ScoreStore::new(cfg.scores_dir());
    let mut manifest = store.read_manifest_or_default()?;
    if manifest
        .entries
        .iter()
        .any(|e| e.name == v.name && e.kind != ScoreKind::Nlg)
    {
        return Err(CliError::Usage(format!("{} already names a non-NLG score", v.name)));
    }
    upsert(&mut manifest, store.write_scores(&v, Vec::new())?);
    store.write_manifest(&manifest)?;
    Ok(())
}
