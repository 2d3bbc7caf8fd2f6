use anyhow::Result;

use crate::config::RunConfig;
use crate::{Command, GlobalArgs};

mod augment;
mod eval;
mod paraphrase;
mod serve;
mod train;

pub fn run(cmd: Command, global: &GlobalArgs) -> Result<()> {
    match cmd {
        Command::TrainLm {
            corpus,
            output,
            lambdas,
            add_k,
        } => train::train_lm(&corpus, &output, lambdas, add_k),
        Command::MockTranslator { tables, host, port } => serve::serve(&tables, &host, port),
        Command::Generate(io) => paraphrase::generate(&io, &RunConfig::resolve(global)?),
        Command::Filter(io) => paraphrase::filter(&io, &RunConfig::resolve(global)?),
        Command::Paraphrase(io) => paraphrase::paraphrase(&io, &RunConfig::resolve(global)?),
        Command::Eval { io, baseline } => eval::eval(&io, baseline, &RunConfig::resolve(global)?),
        Command::Augment {
            io,
            multiplicity,
            paraphrase_augmented,
            stats,
        } => augment::augment(
            &io,
            multiplicity,
            paraphrase_augmented,
            stats.as_deref(),
            &RunConfig::resolve(global)?,
        ),
        Command::Subsample { io, keep_fraction } => {
            augment::subsample(&io, keep_fraction, &RunConfig::resolve(global)?)
        }
    }
}
