//! Benchmark construction: instance sampling, instruction templates, splits
//! and the dataset file format.

mod instance;
mod sample;
mod split;
mod template;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::knowledge::KnowledgeBase;
use crate::model::LanguageModel;
use crate::scalar::Scalar;

pub use instance::{
    load_dataset, read_jsonl, save_dataset, write_jsonl, ConstraintSource, Demonstration,
    InstructionInstance, NamedEntity, NUM_DEMONSTRATIONS,
};
pub use sample::{sample_hierarchy_instance, sample_property_instance, SCORER_CONTINUATION_TOKENS};
pub use split::{
    build_splits, partition_templates, DatasetSplit, SplitName, SplitSizes, TemplatePartition,
    DEFAULT_PARTITION,
};
pub use template::{
    extract_entities, load_templates, parse_templates, Position, Template, CONSTRAINT_SLOT,
    DEMONSTRATIONS_MARKER, TOPIC_SLOT,
};

/// Samples `count` unrendered instances under `seed`, ids `<kb>-<index>`.
/// Every instance is validated against the knowledge base before it is
/// returned.
pub fn sample_instances<S: Scalar>(
    kb: &KnowledgeBase,
    count: usize,
    scorer: Option<&dyn LanguageModel<S>>,
    seed: u64,
) -> Result<Vec<InstructionInstance>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prefix = match kb {
        KnowledgeBase::Hierarchy(_) => "hier",
        KnowledgeBase::Property(_) => "prop",
    };
    (0..count)
        .map(|i| {
            let mut inst = match kb {
                KnowledgeBase::Hierarchy(h) => sample_hierarchy_instance(h, scorer, &mut rng)?,
                KnowledgeBase::Property(p) => sample_property_instance(p, scorer, &mut rng)?,
            };
            inst.id = format!("{prefix}-{i:05}");
            inst.validate(kb)?;
            Ok(inst)
        })
        .collect()
}
