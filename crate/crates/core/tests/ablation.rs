use guided_decode::benchmark::{sample_instances, InstructionInstance};
use guided_decode::decoder::{oracle_examples, DecodeRequest, Decoder, GuidanceConfig, Strategy};
use guided_decode::fixtures;
use guided_decode::knowledge::KnowledgeBase;
use guided_decode::metrics::{evaluate_dataset, EvalOptions, GeneratedText};
use guided_decode::{Config, DynModel, Table};

fn run(
    model: &Table,
    kb: &KnowledgeBase,
    instances: &[InstructionInstance],
    cfg: Config,
) -> (f64, f64, f64) {
    let dec = Decoder::new(model as &DynModel, model as &DynModel, cfg).unwrap();
    let gens: Vec<GeneratedText> = instances
        .iter()
        .map(|inst| {
            let (t, c) = oracle_examples(kb, &inst.topic.entity, &inst.constraint.entity).unwrap();
            let req = DecodeRequest::new(&inst.rendered, &inst.topic.name, &inst.constraint.name)
                .with_examples(t, c);
            GeneratedText {
                id: inst.id.clone(),
                text: dec.generate(&req).unwrap().text,
            }
        })
        .collect();
    let (_, report) = evaluate_dataset::<f64>(
        &gens,
        instances,
        std::slice::from_ref(kb),
        None,
        EvalOptions::default(),
    )
    .unwrap();
    (
        report.overall.ic,
        report.overall.on_topic,
        report.overall.violation,
    )
}

#[test]
fn oracle_trie_beats_bag_and_unguided() {
    let model: Table = fixtures::generation_model();
    let templates = fixtures::templates();
    for kb in [
        KnowledgeBase::Hierarchy(fixtures::hierarchy()),
        KnowledgeBase::Property(fixtures::property()),
    ] {
        let instances: Vec<_> = sample_instances::<f64>(&kb, 100, None, 11)
            .unwrap()
            .iter()
            .enumerate()
            .map(|(i, inst)| inst.render_with(&templates[i % templates.len()]))
            .collect();
        let oracle = run(
            &model,
            &kb,
            &instances,
            GuidanceConfig::with_strategy(Strategy::Oracle),
        );
        let bag = run(
            &model,
            &kb,
            &instances,
            GuidanceConfig {
                use_trie: false,
                ..GuidanceConfig::with_strategy(Strategy::Oracle)
            },
        );
        let none = run(
            &model,
            &kb,
            &instances,
            GuidanceConfig::with_strategy(Strategy::None),
        );
        eprintln!(
            "{:?} oracle {oracle:?} bag {bag:?} none {none:?}",
            kb.kind()
        );
        assert_eq!(oracle.2, 0.0);
        assert!(oracle.0 > bag.0 && oracle.0 > none.0);
    }
}
