//! Stratified cross-validation on a synthetic corpus with disjoint per-mode
//! vocabularies, then on the same corpus with shuffled labels.

use actionlens::classify::{cross_validate, ActionMode, EvalConfig};
use actionlens::pipeline::write_eval_table;
use actionlens::synth::{shuffle_labels, DisjointCorpus};

fn main() -> actionlens::Result<()> {
    let corpus = DisjointCorpus::default().generate();
    let cfg = EvalConfig { seed: 5, ..EvalConfig::default() };
    let run = |docs| -> actionlens::Result<Vec<_>> {
        ActionMode::ALL_MODES.iter().map(|&m| cross_validate(docs, m, &cfg)).collect()
    };

    println!("disjoint vocabularies, {} documents:", corpus.len());
    write_eval_table(&run(&corpus)?, std::io::stdout())?;

    println!("\nshuffled labels:");
    write_eval_table(&run(&shuffle_labels(&corpus, 99))?, std::io::stdout())?;
    Ok(())
}
