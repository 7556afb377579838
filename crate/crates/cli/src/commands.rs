use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use guided_decode::benchmark::{
    build_splits, load_dataset, load_templates, read_jsonl, sample_instances, save_dataset,
    write_jsonl, InstructionInstance, SplitSizes, TemplatePartition,
};
use guided_decode::decoder::{
    oracle_examples, DecodeRequest, Decoder, GuidanceConfig, Strategy, TraceSummary,
};
use guided_decode::guidance::{read_cache, write_cache, CachedExamples, TextualOptions};
use guided_decode::knowledge::{HierarchyKb, KbKind, KnowledgeBase, PropertyKb};
use guided_decode::metrics::{
    comparison_table, evaluate_dataset, EvalOptions, EvalReport, GeneratedText,
};
use guided_decode::model::TokenId;
use guided_decode::{fixtures, Config, DynModel, Error};

use crate::args::{
    BuildDatasetArgs, BuildKbArgs, EvaluateArgs, GenerateArgs, KbKindArg, KbPaths, ReportArgs,
    StrategyArg,
};
use crate::error::CliError;
use crate::models::load_model;

type CliResult<T = ()> = Result<T, CliError>;

fn load_kb(kind: KbKind, paths: &KbPaths) -> CliResult<KnowledgeBase> {
    Ok(match kind {
        KbKind::Hierarchy => KnowledgeBase::Hierarchy(match &paths.hierarchy_kb {
            Some(p) => HierarchyKb::load(p)?,
            None => fixtures::hierarchy(),
        }),
        KbKind::Property => KnowledgeBase::Property(match &paths.property_kb {
            Some(p) => PropertyKb::load(p)?,
            None => fixtures::property(),
        }),
    })
}

/// Knowledge bases for every kind present in `instances`.
fn load_kbs(instances: &[InstructionInstance], paths: &KbPaths) -> CliResult<Vec<KnowledgeBase>> {
    let kinds: BTreeSet<String> = instances
        .iter()
        .map(|i| format!("{:?}", i.kb_kind))
        .collect();
    [KbKind::Hierarchy, KbKind::Property]
        .into_iter()
        .filter(|k| kinds.contains(&format!("{k:?}")))
        .map(|k| load_kb(k, paths))
        .collect()
}

fn kb_kind(arg: KbKindArg) -> KbKind {
    match arg {
        KbKindArg::Hierarchy => KbKind::Hierarchy,
        KbKindArg::Property => KbKind::Property,
    }
}

fn thread_pool(workers: usize) -> CliResult<rayon::ThreadPool> {
    if workers == 0 {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {workers} workers: {e}")))
}

fn write_output(path: Option<&Path>, contents: &[u8]) -> CliResult {
    match path {
        Some(p) => fs::write(p, contents)?,
        None => std::io::stdout().lock().write_all(contents)?,
    }
    Ok(())
}

pub fn build_kb(args: BuildKbArgs) -> CliResult {
    let (text, summary) = match (args.kind, &args.input) {
        (KbKindArg::Hierarchy, input) => {
            let kb = match input {
                Some(p) => HierarchyKb::load(p)?,
                None => fixtures::hierarchy(),
            };
            let leaves = kb.nodes().iter().filter(|n| n.is_leaf()).count();
            let summary = format!(
                "hierarchy: {} nodes, {} leaves, {} roots",
                kb.len(),
                leaves,
                kb.roots().len()
            );
            (kb.to_file_string(), summary)
        }
        (KbKindArg::Property, input) => {
            let kb = match input {
                Some(p) => PropertyKb::load(p)?,
                None => fixtures::property(),
            };
            let summary = format!(
                "property: {} pairs over {} properties, {} people",
                kb.len(),
                kb.properties().len(),
                kb.all_names().len()
            );
            (kb.to_file_string(), summary)
        }
    };
    fs::write(&args.out, text)?;
    println!("{summary} -> {}", args.out.display());
    Ok(())
}

pub fn build_dataset(args: BuildDatasetArgs) -> CliResult {
    let kind = kb_kind(args.kind);
    let kb = load_kb(kind, &args.kbs)?;
    let templates = match &args.templates {
        Some(p) => load_templates(p)?,
        None => fixtures::templates(),
    };
    let (train, test) = match kind {
        KbKind::Hierarchy => (3000, 500),
        KbKind::Property => (1500, 198),
    };
    let sizes = SplitSizes {
        train: args.train.unwrap_or(train),
        dev: args.dev.unwrap_or(500),
        test: args.test.unwrap_or(test),
    };
    let scorer = args
        .scorer
        .map(|k| load_model(k, &args.model))
        .transpose()?;
    let count = sizes.train + sizes.dev + sizes.test;
    let base = sample_instances::<f64>(&kb, count, scorer.as_deref(), args.seed)?;
    let partition = TemplatePartition {
        train: args.train_templates,
        dev: args.dev_templates,
    };
    let splits = build_splits(&base, &templates, sizes, partition, args.fan_out, args.seed)?;
    fs::create_dir_all(&args.out_dir)?;
    for split in &splits {
        let path = args.out_dir.join(format!("{}.jsonl", split.name.as_str()));
        save_dataset(&path, &split.instances)?;
        println!(
            "{}: {} instances, templates {:?} -> {}",
            split.name.as_str(),
            split.instances.len(),
            split.template_ids,
            path.display()
        );
    }
    Ok(())
}

/// One line of `generate` output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputRecord {
    pub id: String,
    pub text: String,
    pub tokens: Vec<TokenId>,
    pub trace: TraceSummary,
    pub config: Config,
}

fn strategy(arg: StrategyArg) -> Strategy {
    match arg {
        StrategyArg::None => Strategy::None,
        StrategyArg::Verifier => Strategy::Verifier,
        StrategyArg::Topk => Strategy::Topk,
        StrategyArg::Textual => Strategy::Textual,
        StrategyArg::Oracle => Strategy::Oracle,
    }
}

pub fn guidance_config(args: &GenerateArgs) -> CliResult<Config> {
    let cfg = GuidanceConfig {
        alpha: args.alpha,
        beta: args.beta,
        strategy: strategy(args.strategy),
        use_trie: !args.no_trie,
        max_tokens: args.max_tokens,
        k_topic: args.k_topic,
        k_constraint: args.k_constraint,
        lookahead: args.lookahead,
        verifier_topic: args.verifier_topic,
        textual: TextualOptions {
            budget: args.trie_budget,
            top_p: args.top_p,
            temperature: args.temperature,
            beams: args.beams,
            seed: args.seed,
        },
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

pub fn generate(args: GenerateArgs) -> CliResult {
    let cfg = guidance_config(&args)?;
    let mut instances = load_dataset(&args.dataset)?;
    if let Some(n) = args.limit {
        instances.truncate(n);
    }
    let model = load_model(args.model, &args.source)?;
    let kbs = if cfg.strategy == Strategy::Oracle {
        load_kbs(&instances, &args.kbs)?
    } else {
        Vec::new()
    };
    let cache: HashMap<String, CachedExamples> = match &args.cache {
        Some(p) if p.exists() => read_cache(p)?
            .into_iter()
            .map(|e| (e.id.clone(), e))
            .collect(),
        _ => HashMap::new(),
    };
    let gen: &DynModel = model.as_ref();
    let decoder = Decoder::new(gen, gen, cfg.clone())?;

    let run_one = |(i, inst): (usize, &InstructionInstance)| -> Result<_, Error> {
        let mut req = DecodeRequest::new(&inst.rendered, &inst.topic.name, &inst.constraint.name);
        req.seed = i as u64;
        match cfg.strategy {
            Strategy::Oracle => {
                let kb = kbs
                    .iter()
                    .find(|kb| kb.kind() == inst.kb_kind)
                    .expect("knowledge bases loaded for every kind");
                let (t, c) = oracle_examples(kb, &inst.topic.entity, &inst.constraint.entity)?;
                req = req.with_examples(t, c);
            }
            Strategy::Textual => {
                if let Some(e) = cache.get(&inst.id) {
                    req = req.with_examples(e.topic.clone(), e.constraint.clone());
                }
            }
            _ => {}
        }
        let g = decoder.generate(&req)?;
        let examples = g.examples.map(|(topic, constraint)| CachedExamples {
            id: inst.id.clone(),
            topic,
            constraint,
        });
        let record = OutputRecord {
            id: inst.id.clone(),
            text: g.text,
            tokens: g.tokens,
            trace: g.trace.summary(),
            config: cfg.clone(),
        };
        Ok((record, examples))
    };
    let results: Vec<_> = thread_pool(args.workers)?.install(|| {
        instances
            .par_iter()
            .enumerate()
            .map(run_one)
            .collect::<Result<Vec<_>, Error>>()
    })?;

    let (records, examples): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    if let Some(p) = &args.cache_out {
        let examples: Vec<CachedExamples> = examples.into_iter().flatten().collect();
        write_cache(p, &examples)?;
    }
    let mut buf = Vec::new();
    write_jsonl(&records, &mut buf)?;
    write_output(args.out.as_deref(), &buf)
}

pub fn evaluate(args: EvaluateArgs) -> CliResult {
    let instances = load_dataset(&args.dataset)?;
    let file = fs::File::open(&args.generations)?;
    let generations: Vec<GeneratedText> = read_jsonl(
        std::io::BufReader::new(file),
        &args.generations.display().to_string(),
    )?;
    let kbs = load_kbs(&instances, &args.kbs)?;
    let scorer = args
        .scorer
        .map(|k| load_model(k, &args.model))
        .transpose()?;
    let opts = EvalOptions {
        first_sentence: args.first_sentence,
    };
    let (results, report) = thread_pool(args.workers)?
        .install(|| evaluate_dataset(&generations, &instances, &kbs, scorer.as_deref(), opts))?;

    print!("{}", report.to_table());
    if let Some(p) = &args.out {
        fs::write(p, report.to_json()? + "\n")?;
    }
    if let Some(p) = &args.results {
        let mut buf = Vec::new();
        write_jsonl(&results, &mut buf)?;
        fs::write(p, buf)?;
    }
    if let Some(p) = &args.csv {
        fs::write(p, report.categories_csv()?)?;
    }
    Ok(())
}

pub fn report(args: ReportArgs) -> CliResult {
    let mut reports = Vec::with_capacity(args.input.len());
    for path in &args.input {
        let src = fs::read_to_string(path)?;
        let report: EvalReport = serde_json::from_str(&src)?;
        let label = path.file_stem().map_or_else(
            || path.display().to_string(),
            |s| s.to_string_lossy().into_owned(),
        );
        reports.push((label, report));
    }
    if let [(_, only)] = &reports[..] {
        print!("{}", only.to_table());
    } else {
        print!("{}", comparison_table(&reports));
    }
    if let Some(p) = &args.csv {
        fs::write(p, reports[0].1.categories_csv()?)?;
    }
    Ok(())
}
