use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono_embed::bias::{bias_series, cumulative_series, default_streams, BiasSeries, StreamConfig};
use chrono_embed::corpus::{self, BinPlan, DocTokens, KeywordSet};
use chrono_embed::drift::{drift_series, neighbor_diff};
use chrono_embed::freq::{frequency_series, BinCounts};
use chrono_embed::report::{self, line_chart_svg, Line};
use chrono_embed::sgns::{train, BinMeta, EmbeddingModel};
use chrono_embed::store::{AnalysisModel, EmbeddingArchive, INDEX_FILE};
use chrono_embed::text::{normalize_word, tokenize, Vocabulary};
use chrono_embed::Error;
use rayon::prelude::*;

use crate::manifest::{Run, RunManifest};
use crate::{BiasArgs, Cli, CliError, Command, DriftArgs, FreqArgs, IngestArgs, RerunArgs, TrainArgs};

pub const PLAN_FILE: &str = "bins.json";
pub const BIN_REPORT_FILE: &str = "bin_report.csv";
pub const CORPUS_DIR: &str = "corpus";

pub fn corpus_file(bin_index: u32) -> String {
    format!("bin_{bin_index:03}.txt")
}

pub(crate) fn execute(cli: &Cli, argv: &[String]) -> Result<(), CliError> {
    if let Command::Rerun(args) = &cli.command {
        return rerun(args);
    }
    let config = serde_json::to_value(&cli.command).expect("arguments serialize");
    let mut run = Run::new(cli.command.name(), argv, config);
    let (out, result) = match &cli.command {
        Command::Ingest(a) => (&a.out, ingest(a, &mut run)),
        Command::Train(a) => (&a.out, train_cmd(a, &mut run)),
        Command::Drift(a) => (&a.out, drift(a, &mut run)),
        Command::Bias(a) => (&a.out, bias(a, &mut run)),
        Command::Freq(a) => (&a.out, freq(a, &mut run)),
        Command::Rerun(_) => unreachable!(),
    };
    run.finish(out, &result)?;
    result
}

fn rerun(args: &RerunArgs) -> Result<(), CliError> {
    let manifest = RunManifest::read(&args.manifest)?;
    let mut full = vec![crate::TOOL.to_owned()];
    full.extend(manifest.argv.iter().cloned());
    let cli = <Cli as clap::Parser>::try_parse_from(&full)
        .map_err(|e| CliError::data(format!("manifest argv does not parse: {}", e.kind())))?;
    if matches!(cli.command, Command::Rerun(_)) {
        return Err(CliError::data("a manifest cannot replay another rerun"));
    }
    for input in &manifest.inputs {
        match crate::sha256_file(Path::new(&input.path)) {
            Ok(h) if h == input.sha256 => {}
            Ok(_) => log::warn!("{} changed since the recorded run", input.path),
            Err(e) => log::warn!("{e}"),
        }
    }
    execute(&cli, &manifest.argv)
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Core(Error::Io {
        path: path.to_owned(),
        source: e,
    })
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn write_with<F>(run: &mut Run, path: &Path, f: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<fs::File>) -> Result<(), CliError>,
{
    let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    w.flush().map_err(|e| io_err(path, e))?;
    run.output(path);
    Ok(())
}

fn write_text(run: &mut Run, path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_err(path, e))?;
    run.output(path);
    Ok(())
}

fn ingest(a: &IngestArgs, run: &mut Run) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&a.min_ocr) {
        return Err(CliError::usage(format!("--min-ocr must be in [0, 1], got {}", a.min_ocr)));
    }
    if a.target_tokens == 0 {
        return Err(CliError::usage("--target-tokens must be positive"));
    }
    create_dir(&a.out)?;
    let keywords = match &a.keywords {
        Some(path) => {
            run.input(path)?;
            let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
            KeywordSet::from_lines(&text)?
        }
        None => KeywordSet::default_set(),
    };
    run.input(&a.input)?;
    let file = fs::File::open(&a.input).map_err(|e| io_err(&a.input, e))?;
    let (docs, report) = corpus::read_documents(BufReader::new(file)).map_err(|e| io_err(&a.input, e))?;
    for w in report.warnings {
        run.warn(w);
    }
    let read = docs.len();
    let kept = corpus::filter_documents(docs, &keywords, a.min_ocr)?;
    if kept.len() < read {
        run.warn(format!(
            "{} of {read} documents dropped by the keyword and OCR filter",
            read - kept.len()
        ));
    }

    let tokens: Vec<Vec<String>> = kept.par_iter().map(|d| tokenize(&d.text)).collect();
    let counted: Vec<DocTokens> = kept
        .iter()
        .zip(&tokens)
        .map(|(d, t)| DocTokens {
            id: d.id.clone(),
            year: d.year,
            tokens: t.len() as u64,
        })
        .collect();
    let plan = BinPlan {
        bins: corpus::plan_bins_counted(&counted, a.target_tokens)?,
    };

    let mut json = serde_json::to_string_pretty(&plan).expect("bin plan serializes");
    json.push('\n');
    write_text(run, &a.out.join(PLAN_FILE), &json)?;
    let rows = corpus::bin_report(&plan.bins);
    write_with(run, &a.out.join(BIN_REPORT_FILE), |w| Ok(report::write_bin_report_csv(w, &rows)?))?;

    let corpus_dir = a.out.join(CORPUS_DIR);
    create_dir(&corpus_dir)?;
    for bin in &plan.bins {
        let path = corpus_dir.join(corpus_file(bin.index));
        write_with(run, &path, |w| {
            for (doc, toks) in kept.iter().zip(&tokens) {
                if doc.year >= bin.start_year && doc.year <= bin.end_year && !toks.is_empty() {
                    writeln!(w, "{}", toks.join(" ")).map_err(|e| io_err(&path, e))?;
                }
            }
            Ok(())
        })?;
    }
    log::info!("planned {} bins from {} documents", plan.bins.len(), kept.len());
    Ok(())
}

fn read_bin_corpus(path: &Path) -> Result<Vec<Vec<String>>, CliError> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut docs = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| io_err(path, e))?;
        let doc: Vec<String> = line.split_whitespace().map(str::to_owned).collect();
        if !doc.is_empty() {
            docs.push(doc);
        }
    }
    Ok(docs)
}

fn train_cmd(a: &TrainArgs, run: &mut Run) -> Result<(), CliError> {
    let workers = if a.deterministic { 1 } else { rayon::current_num_threads() };
    let cfg = a.config(workers);
    cfg.validate()?;

    let plan_path = a.bins.join(PLAN_FILE);
    if !plan_path.is_file() {
        return Err(CliError::data(format!("missing bin plan {}", plan_path.display())));
    }
    run.input(&plan_path)?;
    let text = fs::read_to_string(&plan_path).map_err(|e| io_err(&plan_path, e))?;
    let plan: BinPlan = serde_json::from_str(&text)
        .map_err(|e| CliError::data(format!("{} is not a bin plan: {e}", plan_path.display())))?;
    let mut corpora = Vec::with_capacity(plan.bins.len());
    for bin in &plan.bins {
        let path = a.bins.join(CORPUS_DIR).join(corpus_file(bin.index));
        run.input(&path)?;
        corpora.push(read_bin_corpus(&path)?);
    }
    create_dir(&a.out)?;

    let fit = |(bin, docs): (&corpus::TimeBin, &Vec<Vec<String>>)| -> Result<Option<EmbeddingModel>, CliError> {
        let vocab = match Vocabulary::build(docs.iter().flatten(), cfg.min_count) {
            Ok(v) => v,
            Err(Error::EmptyVocab) => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let bin_cfg = chrono_embed::TrainConfig {
            seed: cfg.seed.wrapping_add(bin.index as u64),
            ..cfg.clone()
        };
        let out = train(docs, &vocab, &bin_cfg)?;
        log::info!(
            "bin {} ({}): {} words, loss per epoch {:?}",
            bin.index,
            bin.label(),
            vocab.len(),
            out.epoch_loss
        );
        Ok(Some(out.model.with_bin(BinMeta::from(bin))))
    };
    let jobs: Vec<_> = plan.bins.iter().zip(&corpora).collect();
    let models: Vec<Option<EmbeddingModel>> = if a.deterministic {
        jobs.into_par_iter().map(fit).collect::<Result<_, _>>()?
    } else {
        jobs.into_iter().map(fit).collect::<Result<_, _>>()?
    };

    let mut archive = EmbeddingArchive::create(&a.out)?;
    for (bin, model) in plan.bins.iter().zip(models) {
        match model {
            Some(m) => {
                let entry = archive.add(&m, bin.token_count, a.keep_context)?;
                let file = a.out.join(&entry.model);
                run.output(&file);
            }
            None => run.warn(format!(
                "bin {} ({}): no word reaches min_count {}; bin skipped",
                bin.index,
                bin.label(),
                cfg.min_count
            )),
        }
    }
    if archive.is_empty() {
        return Err(CliError::data("no bin could be trained"));
    }
    archive.write_index()?;
    run.output(&a.out.join(INDEX_FILE));
    Ok(())
}

fn open_archive(path: &Path, run: &mut Run) -> Result<EmbeddingArchive, CliError> {
    let index = path.join(INDEX_FILE);
    if !index.is_file() {
        return Err(CliError::data(format!("{} is not an archive (no {INDEX_FILE})", path.display())));
    }
    run.input(&index)?;
    Ok(EmbeddingArchive::open(path)?)
}

fn load_models(archive: &EmbeddingArchive) -> Result<Vec<EmbeddingModel>, CliError> {
    let loaded: Vec<_> = archive
        .entries()
        .par_iter()
        .map(|e| archive.load(e.index))
        .collect::<Result<_, _>>()?;
    Ok(loaded)
}

fn analysis_models(archive: &EmbeddingArchive) -> Result<Vec<AnalysisModel>, CliError> {
    Ok(load_models(archive)?.into_par_iter().map(AnalysisModel::from).collect())
}

fn words_arg(words: &[String], flag: &str) -> Result<Vec<String>, CliError> {
    let mut out: Vec<String> = Vec::new();
    for w in words.iter().map(|w| normalize_word(w.trim())) {
        if !w.is_empty() && !out.contains(&w) {
            out.push(w);
        }
    }
    if out.is_empty() {
        return Err(CliError::usage(format!("{flag} needs at least one word")));
    }
    Ok(out)
}

fn drift(a: &DriftArgs, run: &mut Run) -> Result<(), CliError> {
    let words = words_arg(&a.word, "--word")?;
    if a.k == 0 {
        return Err(CliError::usage("--k must be at least 1"));
    }
    let archive = open_archive(&a.archive, run)?;
    let models = analysis_models(&archive)?;
    create_dir(&a.out)?;

    let mut series = Vec::with_capacity(words.len());
    for w in &words {
        let s = drift_series(w, &models, a.k, a.mode)?;
        for warning in &s.warnings {
            run.warn(format!("{w}: {warning}"));
        }
        series.push(s);
    }
    write_with(run, &a.out.join("drift.csv"), |w| Ok(report::write_drift_csv(w, &series)?))?;
    let lines: Vec<Line> = series.iter().map(Line::from).collect();
    let title = format!("Local neighborhood change ({})", a.mode);
    write_text(run, &a.out.join("drift.svg"), &line_chart_svg(&title, "cosine distance", &lines))?;

    if let Some((from, to)) = a.diff {
        let find = |i: u32| {
            models
                .iter()
                .find(|m| m.bin().index == i)
                .ok_or_else(|| CliError::usage(format!("--diff names bin {i}, which is not in the archive")))
        };
        let (ma, mb) = (find(from)?, find(to)?);
        let diffs = words
            .iter()
            .map(|w| neighbor_diff(w, ma, mb, a.k))
            .collect::<Result<Vec<_>, _>>()?;
        write_with(run, &a.out.join("diff.csv"), |w| Ok(report::write_diff_csv(w, &diffs)?))?;
    }
    Ok(())
}

fn bias(a: &BiasArgs, run: &mut Run) -> Result<(), CliError> {
    let words = words_arg(&a.words, "--words")?;
    let config = match &a.streams {
        Some(path) => {
            run.input(path)?;
            StreamConfig::read(path)?
        }
        None => default_streams(),
    };
    let archive = open_archive(&a.archive, run)?;
    let models = analysis_models(&archive)?;
    create_dir(&a.out)?;

    let mut series: Vec<BiasSeries> = Vec::new();
    for w in &words {
        if a.cumulative {
            series.push(cumulative_series(w, &config.streams, &models)?);
            continue;
        }
        for stream in &config.streams {
            match bias_series(w, stream, &models) {
                Ok(s) => series.push(s),
                Err(e @ Error::NoUsableAxis { .. }) => run.warn(format!("{w}: {e}")),
                Err(e) => return Err(e.into()),
            }
        }
    }
    if series.is_empty() {
        return Err(CliError::data("no stream has a usable axis in any bin"));
    }
    let skipped: Vec<String> = series
        .iter()
        .flat_map(|s| s.warnings.iter().map(move |w| format!("{} / {}: {w}", s.word, s.stream)))
        .collect();
    for w in skipped {
        run.warn(w);
    }
    write_with(run, &a.out.join("bias.csv"), |w| Ok(report::write_bias_csv(w, &series)?))?;
    let lines: Vec<Line> = series.iter().map(Line::from).collect();
    let title = if a.cumulative { "Cumulative bias" } else { "Mean bias per stream" };
    write_text(
        run,
        &a.out.join("bias.svg"),
        &line_chart_svg(title, "mean bias (positive = adverse)", &lines),
    )?;
    Ok(())
}

fn freq(a: &FreqArgs, run: &mut Run) -> Result<(), CliError> {
    let words = words_arg(&a.words, "--words")?;
    let archive = open_archive(&a.archive, run)?;
    let models = load_models(&archive)?;
    create_dir(&a.out)?;
    let bins: Vec<BinCounts<'_>> = archive
        .entries()
        .iter()
        .zip(&models)
        .map(|(e, m)| BinCounts {
            bin: e.bin(),
            token_count: e.token_count,
            vocab: &m.vocab,
        })
        .collect();
    let series = words
        .iter()
        .map(|w| frequency_series(w, &bins))
        .collect::<Result<Vec<_>, _>>()?;
    write_with(run, &a.out.join("freq.csv"), |w| Ok(report::write_freq_csv(w, &series)?))?;
    let lines: Vec<Line> = series.iter().map(Line::from).collect();
    write_text(
        run,
        &a.out.join("freq.svg"),
        &line_chart_svg("Word frequency", "relative frequency", &lines),
    )?;
    Ok(())
}
