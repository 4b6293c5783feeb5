//! Acceptance suite: one PASS, FAIL or SKIP line per criterion.
//!
//! The process exits 0 after reporting so the rest of `cargo test` still
//! runs; set `OTHERING_ACCEPTANCE_STRICT=1` to exit 1 on any FAIL.
//! The original-data check runs only when `OTHERING_ORIGINAL_CORPUS` and
//! `OTHERING_ORIGINAL_PARSES` name a corpus and its CoNLL-U parses.

mod support;

use std::fs::File;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use othering::corpus::{
    is_two_sided, load_corpus, two_sided_rate, CorpusFormat, Label, PronounConfig, TokenizerConfig,
    TwoSidedMode,
};
use othering::embedding::{EmbedHyper, EmbedMode};
use othering::eval::{
    cross_validate, f_measure, generate_synthetic, CorpusSource, EvalMode, LexiconSource,
    PipelineConfig, SyntheticSpec,
};
use othering::lexicon::{load_lexicon, LexiconConfig};
use othering::parse::{filter_dependencies, index_parses, read_conllu, DepPair, Relation};
use support::checks::{
    embedding_gradient_error, end_to_end_f1, lexicon_oracle_agrees, logreg_gradient_error,
    mlp_gradient_error, neighbor_fractions, pca_oracle_error, stratification_holds,
};
use support::{binomial_sigma, reconcilable, worked_example_graph, PUBLISHED_RESULTS};

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

struct Criterion {
    name: &'static str,
    budget: Duration,
    check: fn() -> Outcome,
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn gradients() -> Outcome {
    const N: u64 = 20;
    let mut worst = Vec::new();
    let checks: [(&str, &dyn Fn(u64) -> f64); 4] = [
        ("pvdm", &|s| embedding_gradient_error(EmbedMode::Pvdm, s)),
        ("pvdbow", &|s| {
            embedding_gradient_error(EmbedMode::Pvdbow, s)
        }),
        ("mlp", &mlp_gradient_error),
        ("logreg", &logreg_gradient_error),
    ];
    let mut ok = true;
    for (name, f) in checks {
        let max = (0..N).map(f).fold(0.0f64, f64::max);
        ok &= max < 1e-4;
        worst.push(format!("{name} {max:.1e}"));
    }
    verdict(
        ok,
        format!(
            "{N} instances each, max relative error {}",
            worst.join(", ")
        ),
    )
}

fn pca() -> Outcome {
    let (mut comp, mut var) = (0.0f64, 0.0f64);
    for seed in 0..50 {
        let (c, v) = pca_oracle_error(seed);
        comp = comp.max(c);
        var = var.max(v);
    }
    verdict(
        comp < 1e-6 && var < 1e-6,
        format!("50 matrices, max component error {comp:.1e}, variance error {var:.1e}"),
    )
}

fn lexicon() -> Outcome {
    let failures: Vec<String> = (0..25)
        .filter_map(|s| {
            lexicon_oracle_agrees(s)
                .err()
                .map(|e| format!("corpus {s}: {e}"))
        })
        .collect();
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            "25 mini-corpora, sets equal".into()
        } else {
            failures.join("; ")
        },
    )
}

fn worked_example() -> Outcome {
    let got = filter_dependencies(&worked_example_graph());
    let want = [
        DepPair::new(Relation::Dobj, "send", "them"),
        DepPair::new(Relation::Det, "home", "all"),
        DepPair::new(Relation::Nsubj, "want", "we"),
        DepPair::new(Relation::Nmod, "country", "our"),
    ];
    let mut got_sorted: Vec<String> = got.iter().map(|d| d.feature()).collect();
    let mut want_sorted: Vec<String> = want.iter().map(|d| d.feature()).collect();
    got_sorted.sort();
    want_sorted.sort();
    verdict(got_sorted == want_sorted, got_sorted.join(" "))
}

fn metric_identities() -> Outcome {
    let mut off = Vec::new();
    let mut irreconcilable = Vec::new();
    for (_, cells) in PUBLISHED_RESULTS {
        for (p, r, f) in cells {
            if (f_measure(p, r) - f).abs() > 0.005 {
                off.push((p, r, f));
            }
            if !reconcilable(p, r, f, f_measure) {
                irreconcilable.push(format!("({p:.2}, {r:.2}, {f:.2})"));
            }
        }
    }
    let headline = (f_measure(0.98, 0.89) - 0.93).abs() <= 0.005;
    verdict(
        headline && off.is_empty(),
        format!(
            "(0.98, 0.89) -> {:.4}; {} of 20 printed cells differ by more than 0.005, {} of them \
             irreconcilable under any rounding of P and R: {}",
            f_measure(0.98, 0.89),
            off.len(),
            irreconcilable.len(),
            irreconcilable.join(" ")
        ),
    )
}

fn stratification() -> Outcome {
    let failures: Vec<String> = (0..100)
        .filter_map(|s| {
            stratification_holds(s)
                .err()
                .map(|e| format!("dataset {s}: {e}"))
        })
        .collect();
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            "100 datasets partitioned, per-fold deviation below 1".into()
        } else {
            failures.join("; ")
        },
    )
}

fn statistics_recovery() -> Outcome {
    let spec = SyntheticSpec {
        n_docs: 1000,
        p1: 0.8,
        p0: 0.05,
        ..SyntheticSpec::default()
    };
    let corpus = generate_synthetic(&spec).expect("synthetic corpus");
    let pronouns = PronounConfig::default();
    let mode = TwoSidedMode::IngroupOutgroup;
    let mismatched = corpus
        .dataset
        .documents()
        .iter()
        .zip(&corpus.planted)
        .filter(|(d, &p)| is_two_sided(d, &pronouns, mode) != p)
        .count();
    let rates = two_sided_rate(&corpus.dataset, &pronouns, mode).expect("rates");
    let counts = corpus.dataset.class_counts();
    let mut ok = mismatched == 0;
    let mut parts = vec![format!("{mismatched} flag mismatches")];
    for (label, p) in [(Label::Hateful, 0.8), (Label::NonHateful, 0.05)] {
        let n = counts[&label];
        let planted = corpus
            .dataset
            .documents()
            .iter()
            .zip(&corpus.planted)
            .filter(|(d, &f)| d.label == Some(label) && f)
            .count();
        let rate = rates[&label];
        let bound = 3.0 * binomial_sigma(p, n);
        ok &= rate == planted as f64 / n as f64 && (rate - p).abs() <= bound;
        parts.push(format!(
            "rate {label} {rate:.3} (target {p}, 3 sigma {bound:.3})"
        ));
    }
    verdict(ok, parts.join(", "))
}

fn end_to_end() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for seed in 0..3 {
        let (lex, plain) = end_to_end_f1(seed);
        ok &= lex >= 0.85 && lex - plain >= 0.03;
        parts.push(format!("seed {seed}: {lex:.3} vs {plain:.3}"));
    }
    verdict(
        ok,
        format!("F1 lexicon+pvdm+mlp vs pvdm+mlp, {}", parts.join("; ")),
    )
}

fn neighbours() -> Outcome {
    let mut ok = true;
    let mut words = Vec::new();
    let mut derived = Vec::new();
    for seed in 0..3 {
        let f = neighbor_fractions(seed);
        ok &= f.augmented_words > f.plain_words;
        words.push(format!("{:.2}/{:.2}", f.augmented_words, f.plain_words));
        derived.push(format!("{:.2}/{:.2}", f.augmented_derived, f.plain_derived));
    }
    verdict(
        ok,
        format!(
            "motif words among 20 nearest to \"us\", augmented/plain per seed: {}; \
             counting derived motif tokens: {}",
            words.join(" "),
            derived.join(" ")
        ),
    )
}

fn run_evaluate(dir: &Path) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_othering"))
        .current_dir(dir)
        .args([
            "--seed",
            "7",
            "--threads",
            "1",
            "evaluate",
            "--corpus",
            "syn/corpus.jsonl",
            "--parses",
            "syn/parses.conllu",
            "--lexicon-from-eval-corpus",
            "--dim",
            "50",
            "--epochs",
            "20",
            "--lr",
            "0.05",
            "--min-count",
            "1",
        ])
        .output()
        .expect("run othering");
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let synth = Command::new(env!("CARGO_BIN_EXE_othering"))
        .current_dir(dir.path())
        .args(["--seed", "7", "synth", "--n-docs", "400", "--out", "syn"])
        .output()
        .expect("run othering");
    if !synth.status.success() {
        return Outcome::Fail(String::from_utf8_lossy(&synth.stderr).into_owned());
    }
    let a = run_evaluate(dir.path());
    let b = run_evaluate(dir.path());
    verdict(
        a == b,
        format!(
            "two evaluate runs, {} report bytes, identical: {}",
            a.len(),
            a == b
        ),
    )
}

fn original_dataset() -> Outcome {
    let (Ok(corpus), Ok(parses)) = (
        std::env::var("OTHERING_ORIGINAL_CORPUS"),
        std::env::var("OTHERING_ORIGINAL_PARSES"),
    ) else {
        return Outcome::Skip(
            "OTHERING_ORIGINAL_CORPUS and OTHERING_ORIGINAL_PARSES not set".into(),
        );
    };
    let ds = load_corpus(
        File::open(&corpus).expect("corpus file"),
        CorpusFormat::from_path(Path::new(&corpus)),
        "original",
        &TokenizerConfig::default(),
    )
    .expect("corpus");
    let parses =
        index_parses(read_conllu(File::open(&parses).expect("parse file")).expect("parses"));
    let lexicon = match std::env::var("OTHERING_ORIGINAL_LEXICON") {
        Ok(p) => LexiconSource::External(
            load_lexicon(File::open(p).expect("lexicon file")).expect("lexicon"),
        ),
        Err(_) => LexiconSource::FromEval {
            pronouns: PronounConfig::default(),
            config: LexiconConfig::default(),
        },
    };
    let mut cfg = PipelineConfig::new("lexicon+pvdm+mlp".parse().expect("pipeline"));
    cfg.hyper = EmbedHyper {
        dim: 600,
        window: 2,
        ..EmbedHyper::default()
    };
    let report = cross_validate(
        &CorpusSource::new(&ds, Some(&parses)),
        &lexicon,
        &cfg,
        EvalMode::Transductive,
    )
    .expect("cross-validation");
    let f = report.hateful.f_measure;
    verdict(
        (f - 0.93).abs() <= 0.05,
        format!("F1 {f:.3}, target 0.93 +- 0.05"),
    )
}

const CRITERIA: [Criterion; 11] = [
    Criterion {
        name: "gradient correctness",
        budget: Duration::from_secs(10),
        check: gradients,
    },
    Criterion {
        name: "pca oracle equivalence",
        budget: Duration::from_secs(5),
        check: pca,
    },
    Criterion {
        name: "lexicon oracle equivalence",
        budget: Duration::from_secs(5),
        check: lexicon,
    },
    Criterion {
        name: "dependency filtering",
        budget: Duration::from_secs(1),
        check: worked_example,
    },
    Criterion {
        name: "metric identities",
        budget: Duration::from_secs(1),
        check: metric_identities,
    },
    Criterion {
        name: "stratification",
        budget: Duration::from_secs(5),
        check: stratification,
    },
    Criterion {
        name: "statistics recovery",
        budget: Duration::from_secs(5),
        check: statistics_recovery,
    },
    Criterion {
        name: "end-to-end directional",
        budget: Duration::from_secs(120),
        check: end_to_end,
    },
    Criterion {
        name: "neighbour space",
        budget: Duration::from_secs(60),
        check: neighbours,
    },
    Criterion {
        name: "determinism",
        budget: Duration::from_secs(120),
        check: determinism,
    },
    Criterion {
        name: "original corpus reproduction",
        budget: Duration::from_secs(3600),
        check: original_dataset,
    },
];

fn main() {
    if std::env::args().any(|a| a == "--list") {
        for c in &CRITERIA {
            println!("{}: test", c.name);
        }
        return;
    }
    let (mut passed, mut failed, mut skipped) = (0, 0, 0);
    for c in &CRITERIA {
        let start = Instant::now();
        let outcome = (c.check)();
        let took = start.elapsed();
        let over = took > c.budget;
        let (tag, detail) = match outcome {
            Outcome::Pass(d) if over => (
                "FAIL",
                format!("{d}; over the {}s budget", c.budget.as_secs()),
            ),
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => ("FAIL", d),
            Outcome::Skip(d) => ("SKIP", d),
        };
        match tag {
            "PASS" => passed += 1,
            "FAIL" => failed += 1,
            _ => skipped += 1,
        }
        println!("{tag} {} [{:.2}s] {detail}", c.name, took.as_secs_f64());
    }
    println!("acceptance: {passed} passed, {failed} failed, {skipped} skipped");
    let strict = std::env::var("OTHERING_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && failed > 0 {
        std::process::exit(1);
    }
}
