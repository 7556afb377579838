use std::fmt;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::instance::InstructionInstance;
use super::sample::shuffled;
use super::template::Template;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Train,
    Dev,
    Test,
}

impl SplitName {
    pub const ALL: [SplitName; 3] = [SplitName::Train, SplitName::Dev, SplitName::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            SplitName::Train => "train",
            SplitName::Dev => "dev",
            SplitName::Test => "test",
        }
    }
}

impl fmt::Display for SplitName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct DatasetSplit {
    pub name: SplitName,
    pub template_ids: Vec<u32>,
    pub instances: Vec<InstructionInstance>,
}

/// Requested number of rendered instances per split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSizes {
    pub train: usize,
    pub dev: usize,
    pub test: usize,
}

impl SplitSizes {
    pub fn get(&self, name: SplitName) -> usize {
        match name {
            SplitName::Train => self.train,
            SplitName::Dev => self.dev,
            SplitName::Test => self.test,
        }
    }
}

/// Template counts for train and dev; test takes the remainder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TemplatePartition {
    pub train: usize,
    pub dev: usize,
}

/// Three train and three dev templates; with 35 templates the test split
/// gets the other 29.
pub const DEFAULT_PARTITION: TemplatePartition = TemplatePartition { train: 3, dev: 3 };

/// Template ids per split, in ascending id order: the first `train` ids,
/// then `dev`, then the rest.
pub fn partition_templates(
    templates: &[Template],
    partition: TemplatePartition,
) -> Result<[Vec<u32>; 3]> {
    let mut ids: Vec<u32> = templates.iter().map(|t| t.id).collect();
    ids.sort_unstable();
    if ids.len() < partition.train + partition.dev + 1 || partition.train == 0 || partition.dev == 0
    {
        return Err(Error::InsufficientData(format!(
            "{} templates cannot be split {}/{}/rest with a nonempty test set",
            ids.len(),
            partition.train,
            partition.dev
        )));
    }
    let test = ids.split_off(partition.train + partition.dev);
    let dev = ids.split_off(partition.train);
    Ok([ids, dev, test])
}

/// Splits base instances into train/dev/test with disjoint template sets.
///
/// Base instances are shuffled under `seed` and dealt out in order; each base
/// instance is rendered with `fan_out` distinct templates from its split
/// (capped at the split's template count) until the requested size is
/// reached. Rendered ids are `<base id>-t<template id>`.
pub fn build_splits(
    instances: &[InstructionInstance],
    templates: &[Template],
    sizes: SplitSizes,
    partition: TemplatePartition,
    fan_out: usize,
    seed: u64,
) -> Result<[DatasetSplit; 3]> {
    if fan_out == 0 {
        return Err(Error::InvalidArgument("fan-out must be at least 1".into()));
    }
    let ids = partition_templates(templates, partition)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = shuffled(instances, &mut rng);

    let needed: Vec<usize> = SplitName::ALL
        .iter()
        .zip(&ids)
        .map(|(&name, tids)| sizes.get(name).div_ceil(fan_out.min(tids.len())))
        .collect();
    let total: usize = needed.iter().sum();
    if total > pool.len() {
        return Err(Error::InsufficientData(format!(
            "need {total} base instances for sizes {}/{}/{} at fan-out {fan_out}, have {}",
            sizes.train,
            sizes.dev,
            sizes.test,
            pool.len()
        )));
    }

    let mut cursor = 0;
    let mut out = Vec::with_capacity(3);
    for ((&name, tids), &n_base) in SplitName::ALL.iter().zip(ids).zip(&needed) {
        let want = sizes.get(name);
        let per = fan_out.min(tids.len());
        let mut rendered = Vec::with_capacity(want);
        for base in &pool[cursor..cursor + n_base] {
            for &tid in tids.choose_multiple(&mut rng, per) {
                if rendered.len() == want {
                    break;
                }
                let template = templates
                    .iter()
                    .find(|t| t.id == tid)
                    .expect("partitioned id");
                let mut inst = base.render_with(template);
                inst.id = format!("{}-t{}", base.id, tid);
                rendered.push(inst);
            }
        }
        cursor += n_base;
        out.push(DatasetSplit {
            name,
            template_ids: tids,
            instances: rendered,
        });
    }
    Ok(out.try_into().expect("three splits"))
}
