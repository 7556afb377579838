//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runtime limits are part of each criterion.

use std::collections::BTreeSet;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use guided_decode::benchmark::{
    extract_entities, partition_templates, sample_instances, InstructionInstance, DEFAULT_PARTITION,
};
use guided_decode::decoder::{
    guided_step, oracle_examples, DecodeRequest, Decoder, GuidanceConfig, Strategy,
};
use guided_decode::fixtures;
use guided_decode::guidance::{GuidanceStep, GuidanceTrie, Polarity};
use guided_decode::knowledge::{EntityRef, KnowledgeBase};
use guided_decode::metrics::{
    copy_bleu, evaluate_dataset, instruction_conformance, perplexity, rep_n, EvalOptions,
    GeneratedText,
};
use guided_decode::model::{LanguageModel, LogitVector, TableModel, TokenId, Vocabulary};
use guided_decode::{Config, DynModel, Table};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check, Duration);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn guided_step_math() -> Check {
    let base = LogitVector::new(vec![0.0f64; 4]);
    let topic = GuidanceStep::new([2], Polarity::Topic, 4).unwrap();
    let none = GuidanceStep::empty(Polarity::Constraint);
    let out = guided_step(&base, &topic, &none, 5.0, 100.0).map_err(|e| e.to_string())?;
    let p = out.probs[2];
    ensure((p - 0.9802).abs() <= 1e-4, format!("P(topic) = {p}"))?;
    let direct = 5f64.exp() / (5f64.exp() + 3.0);
    ensure(
        (p - direct).abs() < 1e-12,
        format!("P(topic) = {p}, direct {direct}"),
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..200 {
        let n = rng.random_range(2..50);
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(-30.0..30.0)).collect();
        let base = LogitVector::new(values);
        let t = GuidanceStep::new(
            (0..n as TokenId).filter(|_| rng.random_bool(0.3)),
            Polarity::Topic,
            n,
        )
        .unwrap();
        let c = GuidanceStep::new(
            (0..n as TokenId).filter(|_| rng.random_bool(0.3)),
            Polarity::Constraint,
            n,
        )
        .unwrap();
        let out = guided_step(&base, &t, &c, 0.0, 0.0).map_err(|e| e.to_string())?;
        ensure(
            out.probs == base.softmax(),
            "alpha = beta = 0 changed the distribution",
        )?;
    }
    Ok(format!(
        "P(topic) = {p:.6}; identity exact on 200 random vectors"
    ))
}

fn render_all(kb: &KnowledgeBase, n: usize, seed: u64) -> Vec<InstructionInstance> {
    let templates = fixtures::templates();
    sample_instances::<f64>(kb, n, None, seed)
        .unwrap()
        .iter()
        .enumerate()
        .map(|(i, inst)| inst.render_with(&templates[i % templates.len()]))
        .collect()
}

fn run_strategy(
    model: &Table,
    kb: &KnowledgeBase,
    instances: &[InstructionInstance],
    cfg: Config,
) -> Result<(f64, f64), String> {
    let dec =
        Decoder::new(model as &DynModel, model as &DynModel, cfg).map_err(|e| e.to_string())?;
    let gens = instances
        .iter()
        .map(|inst| {
            let (t, c) = oracle_examples(kb, &inst.topic.entity, &inst.constraint.entity)?;
            let req = DecodeRequest::new(&inst.rendered, &inst.topic.name, &inst.constraint.name)
                .with_examples(t, c);
            Ok(GeneratedText {
                id: inst.id.clone(),
                text: dec.generate(&req)?.text,
            })
        })
        .collect::<guided_decode::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    let (_, report) = evaluate_dataset::<f64>(
        &gens,
        instances,
        std::slice::from_ref(kb),
        None,
        EvalOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    Ok((report.overall.ic, report.overall.violation))
}

fn oracle_ablation() -> Check {
    let model: Table = fixtures::generation_model();
    let mut lines = Vec::new();
    let mut total = 0;
    for (kb, n) in [
        (KnowledgeBase::Hierarchy(fixtures::hierarchy()), 120),
        (KnowledgeBase::Property(fixtures::property()), 120),
    ] {
        let instances = render_all(&kb, n, 2024);
        total += instances.len();
        let oracle_cfg = GuidanceConfig::with_strategy(Strategy::Oracle);
        let bag_cfg = GuidanceConfig {
            use_trie: false,
            ..oracle_cfg.clone()
        };
        let (oracle_ic, oracle_vi) = run_strategy(&model, &kb, &instances, oracle_cfg)?;
        let (bag_ic, _) = run_strategy(&model, &kb, &instances, bag_cfg)?;
        let (none_ic, _) = run_strategy(
            &model,
            &kb,
            &instances,
            GuidanceConfig::with_strategy(Strategy::None),
        )?;
        let line = format!(
            "{:?}: oracle IC {oracle_ic:.3} violation {oracle_vi:.3}, no-trie IC {bag_ic:.3}, none IC {none_ic:.3}",
            kb.kind()
        );
        ensure(oracle_vi == 0.0, line.clone())?;
        ensure(oracle_ic > bag_ic && oracle_ic > none_ic, line.clone())?;
        lines.push(line);
    }
    ensure(total >= 200, format!("only {total} instances"))?;
    Ok(format!("{total} instances; {}", lines.join("; ")))
}

fn trie_mechanics() -> Check {
    let words: Vec<String> = (0..40).map(|i| format!("w{i}")).collect();
    let vocab = Vocabulary::from_words(words.iter().map(String::as_str));
    let model = TableModel::<f64>::uniform(vocab);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let phrase = |rng: &mut ChaCha8Rng| -> String {
        let n = rng.random_range(1..5);
        (0..n)
            .map(|_| words[rng.random_range(0..words.len())].as_str())
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut checked = 0;
    for _ in 0..500 {
        let examples: Vec<String> = (0..rng.random_range(0..12))
            .map(|_| phrase(&mut rng))
            .collect();
        let trie = GuidanceTrie::from_examples(&examples, &model).map_err(|e| e.to_string())?;
        let tokenized: Vec<Vec<TokenId>> = examples
            .iter()
            .map(|e| model.tokenize(e).unwrap())
            .collect();
        for seq in &tokenized {
            let mut cursor = trie.cursor();
            let mut last = None;
            for &tok in seq {
                let (allowed, _) = cursor.step(last);
                ensure(
                    allowed.contains(&tok),
                    format!("trie blocked its own example {seq:?}"),
                )?;
                last = Some(tok);
            }
        }
        for _ in 0..100 {
            let q = model.tokenize(&phrase(&mut rng)).unwrap();
            ensure(
                trie.contains(&q) == tokenized.contains(&q),
                format!("membership mismatch for {q:?}"),
            )?;
            checked += 1;
        }
    }
    Ok(format!("500 example sets, {checked} membership queries"))
}

fn scan_mentions(surface: &str, text: &str) -> bool {
    let norm = |s: &str| {
        s.to_lowercase()
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ")
    };
    let (s, t) = (norm(surface), norm(text));
    let chars: Vec<char> = t.chars().collect();
    let pat: Vec<char> = s.chars().collect();
    !pat.is_empty()
        && (0..chars.len()).any(|i| {
            i + pat.len() <= chars.len()
                && chars[i..i + pat.len()] == pat[..]
                && (i == 0 || !chars[i - 1].is_alphanumeric())
                && chars
                    .get(i + pat.len())
                    .is_none_or(|c| !c.is_alphanumeric())
        })
}

fn checker_equivalence() -> Check {
    let h = fixtures::hierarchy();
    let p = fixtures::property();
    let kbs = [
        (
            KnowledgeBase::Hierarchy(h.clone()),
            h.nodes()
                .iter()
                .map(|n| EntityRef::node(&n.id))
                .collect::<Vec<_>>(),
        ),
        (
            KnowledgeBase::Property(p.clone()),
            p.pairs()
                .iter()
                .map(|pp| EntityRef::pair(pp.property, pp.value.clone()))
                .collect(),
        ),
    ];
    let fillers = ["the", "oscar", "cars", "and", "-", ",", "x1", "pre"];
    let glue = ["", " ", "  ", "\n", ".", "s", ", "];
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut cases = 0;
    for (kb, entities) in &kbs {
        let names: Vec<String> = entities
            .iter()
            .flat_map(|e| kb.surface_forms(e).unwrap())
            .collect();
        for _ in 0..1000 {
            let e = &entities[rng.random_range(0..entities.len())];
            let mut text = String::new();
            for _ in 0..rng.random_range(1..10) {
                let w = if rng.random_bool(0.4) {
                    names[rng.random_range(0..names.len())].clone()
                } else {
                    fillers[rng.random_range(0..fillers.len())].to_string()
                };
                text.push_str(&if rng.random_bool(0.3) {
                    w.to_uppercase()
                } else {
                    w
                });
                text.push_str(glue[rng.random_range(0..glue.len())]);
            }
            let want = kb
                .surface_forms(e)
                .unwrap()
                .iter()
                .any(|s| scan_mentions(s, &text));
            let got = (kb.violates(&text, e), kb.on_topic(&text, e));
            ensure(
                matches!(got, (Ok(v), Ok(t)) if v == want && t == want),
                format!("{e} on {text:?}: scan says {want}"),
            )?;
            cases += 1;
        }
    }
    let mut pairs = 0;
    for node in h.nodes() {
        let leafs = h.leafs(&node.id).unwrap();
        let mut up = node.parent;
        while let Some(a) = up {
            ensure(
                leafs.is_subset(&h.leafs(&h.node(a).id).unwrap()),
                format!("leafs({}) not inside leafs({})", node.id, h.node(a).id),
            )?;
            pairs += 1;
            up = h.node(a).parent;
        }
    }
    Ok(format!(
        "{cases} randomized cases; monotone over {pairs} ancestor pairs"
    ))
}

fn metric_oracles() -> Check {
    let r1 = rep_n(&["a", "a", "a", "a"], 1).map_err(|e| e.to_string())?;
    ensure(r1 == 0.75, format!("rep_1 = {r1}"))?;
    let r2 = rep_n(&["a", "b", "a", "b", "a"], 2).map_err(|e| e.to_string())?;
    ensure(r2 == 0.5, format!("rep_2 = {r2}"))?;
    let demo = "A merlot is a kind of wine.";
    let bleu = copy_bleu(demo, &["A poodle is a kind of dog.", demo, "x"]);
    ensure(bleu == 1.0, format!("copy_bleu(identity) = {bleu}"))?;
    let ic = instruction_conformance(&[(true, false), (true, true), (false, false), (true, false)])
        .map_err(|e| e.to_string())?;
    ensure(ic == 0.5, format!("IC = {ic}"))?;
    let uniform = TableModel::<f64>::uniform(Vocabulary::from_words(["a", "b"]));
    ensure(uniform.vocab_size() == 4, "scorer vocabulary is not 4")?;
    let ppl = perplexity(&uniform, "a b b a a").map_err(|e| e.to_string())?;
    ensure((ppl - 4.0).abs() <= 1e-9, format!("perplexity = {ppl}"))?;
    Ok(format!(
        "rep_1 {r1}, rep_2 {r2}, copy-BLEU {bleu}, IC {ic}, PPL {ppl}"
    ))
}

fn dataset_builder() -> Check {
    let h = fixtures::hierarchy();
    let kb = KnowledgeBase::Hierarchy(h.clone());
    let instances = sample_instances::<f64>(&kb, 1000, None, 31).map_err(|e| e.to_string())?;
    ensure(instances.len() == 1000, "wrong instance count")?;
    let templates = fixtures::templates();
    let [train, dev, test] =
        partition_templates(&templates, DEFAULT_PARTITION).map_err(|e| e.to_string())?;
    let train_templates: Vec<_> = templates
        .iter()
        .filter(|t| train.contains(&t.id))
        .cloned()
        .collect();
    for inst in &instances {
        let (EntityRef::Node { id: t }, EntityRef::Node { id: c }) =
            (&inst.topic.entity, &inst.constraint.entity)
        else {
            return Err(format!("{}: entity is not a node", inst.id));
        };
        let (ti, ci) = (h.index(t).unwrap(), h.index(c).unwrap());
        ensure(
            h.is_strict_ancestor(ti, ci),
            format!("{}: {t} is not above {c}", inst.id),
        )?;
        let leafs = h.leafs(t).unwrap();
        let names: BTreeSet<&String> = inst.demonstrations.iter().map(|d| &d.name).collect();
        ensure(
            inst.demonstrations.len() == 3
                && names.len() == 3
                && names.iter().all(|n| leafs.contains(*n)),
            format!("{}: bad demonstrations", inst.id),
        )?;
        for template in &train_templates {
            let rendered = inst.render_with(template).rendered;
            ensure(
                extract_entities(&rendered, &train_templates, 3)
                    == Some((inst.topic.name.clone(), inst.constraint.name.clone())),
                format!("{}: round trip failed on template {}", inst.id, template.id),
            )?;
        }
    }
    let sets: Vec<BTreeSet<u32>> = [&train, &dev, &test]
        .iter()
        .map(|v| v.iter().copied().collect())
        .collect();
    ensure(
        [sets[0].len(), sets[1].len(), sets[2].len()] == [3, 3, 29],
        format!(
            "partition sizes {} / {} / {}",
            sets[0].len(),
            sets[1].len(),
            sets[2].len()
        ),
    )?;
    ensure(
        sets[0].is_disjoint(&sets[1])
            && sets[0].is_disjoint(&sets[2])
            && sets[1].is_disjoint(&sets[2]),
        "template sets overlap",
    )?;
    Ok("1000 instances valid; round trip exact on 3 train templates; partition 3/3/29".into())
}

fn cli(args: &[&str], dir: &Path) -> Result<(), String> {
    let mut argv = vec!["guided-decode".to_string()];
    argv.extend(args.iter().map(|a| {
        if a.ends_with(".jsonl") || a.ends_with(".json") || *a == "ds" {
            dir.join(a).display().to_string()
        } else {
            a.to_string()
        }
    }));
    match guided_decode_cli::run(&argv) {
        0 => Ok(()),
        code => Err(format!("`{}` exited {code}", args.join(" "))),
    }
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    cli(
        &[
            "build-dataset",
            "--train",
            "6",
            "--dev",
            "3",
            "--test",
            "20",
            "--seed",
            "5",
            "--out-dir",
            "ds",
        ],
        d,
    )?;
    let mut compared = 0;
    for strategy in ["textual", "oracle", "verifier"] {
        for run in ["a", "b"] {
            let gen = format!("{strategy}_{run}.jsonl");
            let report = format!("{strategy}_{run}.json");
            let test = "ds/test.jsonl".to_string();
            let test = d.join(&test).display().to_string();
            cli(
                &[
                    "generate",
                    "--dataset",
                    &test,
                    "--strategy",
                    strategy,
                    "--seed",
                    "3",
                    "--out",
                    &gen,
                ],
                d,
            )?;
            cli(
                &[
                    "evaluate",
                    "--dataset",
                    &test,
                    "--generations",
                    &gen,
                    "--scorer",
                    "fixture",
                    "--out",
                    &report,
                ],
                d,
            )?;
        }
        for ext in ["jsonl", "json"] {
            let a =
                std::fs::read(d.join(format!("{strategy}_a.{ext}"))).map_err(|e| e.to_string())?;
            let b =
                std::fs::read(d.join(format!("{strategy}_b.{ext}"))).map_err(|e| e.to_string())?;
            ensure(
                !a.is_empty() && a == b,
                format!("{strategy}.{ext} differs between runs"),
            )?;
            compared += 1;
        }
    }
    Ok(format!("{compared} output pairs byte-identical"))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("guided-step math", guided_step_math, Duration::from_secs(1)),
        (
            "oracle ablation direction",
            oracle_ablation,
            Duration::from_secs(30),
        ),
        ("trie mechanics", trie_mechanics, Duration::from_secs(10)),
        (
            "checker equivalence",
            checker_equivalence,
            Duration::from_secs(10),
        ),
        ("metric oracles", metric_oracles, Duration::from_secs(10)),
        ("dataset builder", dataset_builder, Duration::from_secs(60)),
        ("determinism", determinism, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (name, check, limit) in criteria {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if took > limit => {
                Err(format!("{detail}; took {took:.2?}, limit {limit:?}"))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail} ({took:.2?})"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {name}: {why} ({took:.2?})");
            }
        }
    }
    println!("{} of 7 criteria passed", 7 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
