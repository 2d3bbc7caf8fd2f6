//! Run configuration: a TOML file overlaid with command-line flags.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{Context, Result};
use parasift_core::constraints::ConstraintConfig;
use parasift_core::pipeline::PipelineConfig;
use parasift_core::scorers::{
    FluencyScorer, HashedCharNgramEmbedder, LocalFluency, LocalSemantic, RemoteScorer, ScorerEndpoint,
    ScorerKind, SemanticScorer,
};
use parasift_core::translator::{parse_pool, HttpTranslator, MockTranslator};
use parasift_core::{ErrorPolicy, GenerationConfig, IdfTable, Lang, NGramLanguageModel, Scorers, Translator};
use serde::Deserialize;

use crate::GlobalArgs;

/// A problem with the configuration itself. Exits with status 1.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationSection {
    pub direct_beam: Option<usize>,
    pub direct_topk: Option<usize>,
    pub roundtrip_beam: Option<usize>,
    pub roundtrip_topk: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScorerSection {
    pub timeout_secs: Option<u64>,
    pub max_batch: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageCaps {
    pub diversity_cap: Option<usize>,
    pub fluency_cap: Option<usize>,
}

/// Layout of the `--config` file. Every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub translator: Option<String>,
    pub fluency: Option<String>,
    pub semantic: Option<String>,
    pub fluency_fallback: Option<String>,
    pub source_lang: Option<String>,
    pub pool: Option<Vec<String>>,
    pub seed: Option<u64>,
    pub on_error: Option<ErrorPolicy>,
    pub strict: Option<bool>,
    pub trace: Option<bool>,
    #[serde(default)]
    pub generation: GenerationSection,
    pub constraints: Option<ConstraintConfig>,
    #[serde(default)]
    pub pipeline: StageCaps,
    #[serde(default)]
    pub scorer: ScorerSection,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))
    }
}

/// Everything a subcommand needs, resolved once.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub translator: Option<String>,
    pub fluency: Option<String>,
    pub semantic: String,
    pub fluency_fallback: Option<String>,
    pub generation: GenerationConfig,
    pub pipeline: PipelineConfig,
    pub seed: u64,
    pub on_error: ErrorPolicy,
    pub strict: bool,
    pub trace: bool,
    pub scorer_timeout: Duration,
    pub max_batch: usize,
}

impl RunConfig {
    pub fn resolve(args: &GlobalArgs) -> Result<Self> {
        let file = match &args.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let source_lang = args
            .lang
            .clone()
            .or(file.source_lang)
            .unwrap_or_else(|| "en".to_string());
        let source_lang = Lang::new(&source_lang).map_err(|e| config_err(format!("source_lang: {e}")))?;
        let mut generation = GenerationConfig::new(source_lang);
        let pool = match (&args.pool, &file.pool) {
            (Some(csv), _) => Some(parse_pool(csv).map_err(|e| config_err(format!("pool: {e}")))?),
            (None, Some(list)) => Some(
                list.iter()
                    .map(|c| Lang::new(c))
                    .collect::<parasift_core::Result<Vec<_>>>()
                    .map_err(|e| config_err(format!("pool: {e}")))?,
            ),
            (None, None) => None,
        };
        if let Some(pool) = pool {
            generation = generation.with_pool(pool);
        }
        let g = &file.generation;
        generation.direct_beam = g.direct_beam.unwrap_or(generation.direct_beam);
        generation.direct_topk = g.direct_topk.unwrap_or(generation.direct_topk);
        generation.roundtrip_beam = g.roundtrip_beam.unwrap_or(generation.roundtrip_beam);
        generation.roundtrip_topk = g.roundtrip_topk.unwrap_or(generation.roundtrip_topk);
        let constraints = file.constraints.unwrap_or_default();
        generation.constraints = constraints;
        generation.validate().map_err(|e| config_err(e.to_string()))?;

        let on_error = args.on_error.or(file.on_error).unwrap_or_default();
        let pipeline = PipelineConfig {
            constraints,
            diversity_cap: file.pipeline.diversity_cap.unwrap_or(5),
            fluency_cap: file.pipeline.fluency_cap.unwrap_or(3),
            on_error,
        };
        if pipeline.diversity_cap == 0 || pipeline.fluency_cap == 0 {
            return Err(config_err("pipeline caps must be positive"));
        }

        Ok(RunConfig {
            translator: args.translator.clone().or(file.translator),
            fluency: args.fluency.clone().or(file.fluency),
            semantic: args.semantic.clone().or(file.semantic).unwrap_or_else(|| "local".into()),
            fluency_fallback: args.fluency_fallback.clone().or(file.fluency_fallback),
            generation,
            pipeline,
            seed: args.seed.or(file.seed).unwrap_or(42),
            on_error,
            strict: args.strict || file.strict.unwrap_or(false),
            trace: args.trace || file.trace.unwrap_or(false),
            scorer_timeout: Duration::from_secs(file.scorer.timeout_secs.unwrap_or(30)),
            max_batch: file.scorer.max_batch.unwrap_or(64),
        })
    }

    pub fn translator(&self) -> Result<Box<dyn Translator>> {
        let spec = self
            .translator
            .as_deref()
            .ok_or_else(|| config_err("missing translator endpoint (set --translator or `translator`)"))?;
        if let Some(path) = spec.strip_prefix("mock:") {
            let text = std::fs::read_to_string(path)
                .map_err(|e| config_err(format!("translator: cannot read mock tables {path}: {e}")))?;
            let mock = MockTranslator::from_json(&text)
                .map_err(|e| config_err(format!("translator: bad mock tables {path}: {e}")))?;
            return Ok(Box::new(mock));
        }
        Ok(Box::new(HttpTranslator::new(url("translator", spec)?)))
    }

    fn endpoint(&self, base: &str, kind: ScorerKind) -> ScorerEndpoint {
        let mut ep = ScorerEndpoint::new(base, kind);
        ep.timeout = self.scorer_timeout;
        ep.max_batch = self.max_batch;
        ep
    }

    fn fluency_from(&self, field: &str, spec: &str) -> Result<Arc<dyn FluencyScorer>> {
        if let Some(path) = spec.strip_prefix("local:") {
            let lm = load_lm(Path::new(path)).map_err(|e| config_err(format!("{field}: {e:#}")))?;
            return Ok(Arc::new(LocalFluency::new(Arc::new(lm))));
        }
        let ep = self.endpoint(&url(field, spec)?, ScorerKind::Fluency);
        Ok(Arc::new(RemoteScorer::http(ep).map_err(|e| config_err(format!("{field}: {e}")))?))
    }

    fn local_semantic(&self, idf_corpus: Option<&str>) -> Result<LocalSemantic> {
        let idf = match idf_corpus {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| config_err(format!("semantic: cannot read idf corpus {path}: {e}")))?;
                let table = IdfTable::build(text.lines().map(parasift_core::normalize))
                    .map_err(|e| config_err(format!("semantic: {e}")))?;
                Some(Arc::new(table))
            }
            None => None,
        };
        Ok(LocalSemantic::new(HashedCharNgramEmbedder::new(self.seed), idf))
    }

    pub fn scorers(&self) -> Result<Scorers> {
        let fluency_spec = self
            .fluency
            .as_deref()
            .ok_or_else(|| config_err("missing fluency endpoint (set --fluency or `fluency`)"))?;
        let fluency = self.fluency_from("fluency", fluency_spec)?;
        let semantic: Arc<dyn SemanticScorer> = match self.semantic.as_str() {
            "local" => Arc::new(self.local_semantic(None)?),
            s if s.starts_with("local:") => Arc::new(self.local_semantic(Some(&s["local:".len()..]))?),
            s => Arc::new(
                RemoteScorer::http(self.endpoint(&url("semantic", s)?, ScorerKind::Semantic))
                    .map_err(|e| config_err(format!("semantic: {e}")))?,
            ),
        };
        let mut scorers = Scorers::new(fluency, semantic);
        if self.on_error == ErrorPolicy::Fallback {
            if !fluency_spec.starts_with("local:") {
                let spec = self.fluency_fallback.as_deref().ok_or_else(|| {
                    config_err("on_error = fallback with a remote fluency scorer needs fluency_fallback")
                })?;
                if !spec.starts_with("local:") {
                    return Err(config_err("fluency_fallback must be local:<model path>"));
                }
                scorers.fluency_fallback = Some(self.fluency_from("fluency_fallback", spec)?);
            }
            scorers.semantic_fallback = Some(Arc::new(self.local_semantic(None)?));
        }
        Ok(scorers)
    }
}

fn url(field: &str, spec: &str) -> Result<String> {
    if spec.starts_with("http://") || spec.starts_with("https://") {
        Ok(spec.to_owned())
    } else {
        Err(config_err(format!("{field}: expected an http(s) URL or a local/mock spec, got {spec:?}")))
    }
}

pub fn load_lm(path: &Path) -> Result<NGramLanguageModel> {
    let file = File::open(path).with_context(|| format!("cannot open model {}", path.display()))?;
    NGramLanguageModel::read_from(BufReader::new(file)).with_context(|| format!("cannot load model {}", path.display()))
}

pub fn output_path(p: &Option<PathBuf>) -> Option<&Path> {
    p.as_deref().filter(|p| p.as_os_str() != "-")
}
