use guided_decode::model::{BridgeOptions, NGramModel, RemoteModel, TableModel, Vocabulary};
use guided_decode::text::split_words;
use guided_decode::{fixtures, DynModel};

use crate::args::{ModelKind, ModelSource};
use crate::error::CliError;

pub const BRIDGE_URL_ENV: &str = "GUIDED_DECODE_BRIDGE_URL";

fn required<'a>(
    value: &'a Option<std::path::PathBuf>,
    flag: &str,
    kind: &str,
) -> Result<&'a std::path::Path, CliError> {
    value
        .as_deref()
        .ok_or_else(|| CliError::Usage(format!("--{flag} is required for the {kind} model")))
}

pub fn load_model(kind: ModelKind, src: &ModelSource) -> Result<Box<DynModel>, CliError> {
    Ok(match kind {
        ModelKind::Fixture => Box::new(fixtures::generation_model::<f64>()),
        ModelKind::Table => {
            let vocab = Vocabulary::load(required(&src.vocab, "vocab", "table")?)?;
            let rules = required(&src.model_file, "model-file", "table")?;
            Box::new(TableModel::<f64>::load(vocab, rules)?)
        }
        ModelKind::Ngram => {
            let corpus =
                std::fs::read_to_string(required(&src.model_file, "model-file", "ngram")?)?;
            let vocab = match &src.vocab {
                Some(p) => Vocabulary::load(p)?,
                None => Vocabulary::from_words(split_words(&corpus)),
            };
            if src.ngram_order == 0
                || src.ngram_smoothing.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)
            {
                return Err(CliError::Usage(
                    "--ngram-order must be at least 1 and --ngram-smoothing positive".into(),
                ));
            }
            Box::new(
                NGramModel::<f64>::new(vocab, src.ngram_order, src.ngram_smoothing)?
                    .fit_text(&corpus)?,
            )
        }
        ModelKind::Bridge => {
            let url = std::env::var(BRIDGE_URL_ENV).unwrap_or_else(|_| src.bridge_url.clone());
            let opts = BridgeOptions {
                eos_id: src.bridge_eos,
                max_context: src.bridge_max_context,
                top_n: src.bridge_top_n,
                ..BridgeOptions::new(url)
            };
            Box::new(RemoteModel::<f64>::connect(opts)?)
        }
    })
}
