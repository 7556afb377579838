//! Evaluation metrics: instruction conformance, topic and constraint rates,
//! copy-BLEU against demonstrations, n-gram repetition and perplexity.

mod eval;
mod report;
mod scores;

pub use eval::{
    evaluate_dataset, evaluate_instance, evaluate_results, first_sentence, CategoryRow,
    EvalOptions, EvalReport, GeneratedText, InstanceResult, Rates,
};
pub use report::comparison_table;
pub use scores::{
    copy_bleu, instruction_conformance, perplexity, rep_n, sentence_bleu, MAX_BLEU_ORDER,
};
