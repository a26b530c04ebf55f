"""Command-line entry points.

Subcommands: ingest, train, tag, iaa, agreement-data, regress, sweep,
llm, serve. Options resolve as flags > config file (--config, JSON
object keyed by option name) > defaults. Exit codes: 0 success, 1 invalid
input or usage, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .corpus import (
    Corpus,
    Sample,
    ingest_text_dir,
    load_corpus,
    sample_poems,
    save_corpus,
)
from .errors import ConfigError, InputError, RuntimeFailure
from .evaluation import (
    SweepConfig,
    consecutive_pairs_dataset,
    iaa_report,
    load_annotation_dir,
    run_sweep,
    save_annotation,
    write_agreement_csv,
    write_iaa_csv,
    write_sweep_csv,
)
from .evaluation import Annotation, read_agreement_csv
from .llm import (
    ResponseArchive,
    RestProvider,
    provider_config_from_file,
    run_benchmark,
    write_benchmark_csv,
)
from .phonetics import make_transcriber
from .regression import (
    LogitModelConfig,
    fit_hierarchical_logit,
    write_summary_csv,
)
from .service import build_server
from .tagger import TaggerConfig, load_model, save_model, tag_poem, train_model


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_tagger_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--window", type=int, default=None,
                        help="line-pair window (default 7)")
    parser.add_argument("--tau", type=float, default=None,
                        help="acceptance threshold (default 0.8)")
    parser.add_argument("--alpha", type=float, default=None,
                        help="Laplace smoothing (default 1.0)")
    parser.add_argument("--t-min", type=float, default=None,
                        help="T-score seed threshold (default 2.0)")
    parser.add_argument("--min-count", type=int, default=None,
                        help="seed pair count threshold (default 2)")
    parser.add_argument("--max-iter", type=int, default=None,
                        help="estimation iteration cap (default 20)")


def _build_parser() -> _Parser:
    parser = _Parser(prog="rhymekit",
                     description="corpus-driven rhyme recognition toolkit")
    parser.add_argument("--config", default=None,
                        help="JSON config file; flags override its values")
    parser.add_argument("--jobs", type=int, default=None,
                        help="worker pool size for request fan-out (default 2)")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("ingest", help="build or normalize a corpus file")
    p.add_argument("--text-dir", default=None, help="directory of *.txt poems")
    p.add_argument("--corpus", default=None, help="existing corpus JSON to validate")
    p.add_argument("--language", default=None, help="ISO 639-1 code")
    p.add_argument("--out", default=None, help="output corpus JSON")

    p = sub.add_parser("train", help="train a rhyme model")
    p.add_argument("--corpus", default=None)
    p.add_argument("--transcriber", default=None,
                   help="tsv:<lexicon.tsv> or espeak[:<executable>]")
    p.add_argument("--lines", type=int, default=None,
                   help="sample this many lines (default: whole corpus)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output model JSON")
    _add_tagger_flags(p)

    p = sub.add_parser("tag", help="tag poems with a trained model")
    p.add_argument("--model", default=None)
    p.add_argument("--corpus", default=None)
    p.add_argument("--transcriber", default=None)
    p.add_argument("--annotator", default=None, help="annotator id to record")
    p.add_argument("--poem-id", action="append", default=None,
                   help="tag only these poems (repeatable)")
    p.add_argument("--out", default=None, help="output annotation directory")

    p = sub.add_parser("iaa", help="inter-annotator agreement report")
    p.add_argument("--ann-dir", action="append", default=None,
                   help="annotation directory; give exactly twice")
    p.add_argument("--language", default=None, help="label for the report rows")
    p.add_argument("--out", default=None, help="output CSV (default: print only)")

    p = sub.add_parser("agreement-data",
                       help="consecutive-pair rows for the regression")
    p.add_argument("--corpus", default=None)
    p.add_argument("--ann-dir", action="append", default=None,
                   help="annotation directory; give exactly twice")
    p.add_argument("--transcriber", default=None)
    p.add_argument("--out", default=None, help="output CSV")

    p = sub.add_parser("regress", help="fit the agreement logistic model")
    p.add_argument("--data", default=None, help="agreement rows CSV")
    p.add_argument("--out", default=None, help="summary CSV")
    p.add_argument("--chains", type=int, default=None)
    p.add_argument("--draws", type=int, default=None)
    p.add_argument("--warmup", type=int, default=None)
    p.add_argument("--hdi-mass", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("sweep", help="training-size sweep")
    p.add_argument("--corpus", default=None)
    p.add_argument("--transcriber", default=None)
    p.add_argument("--ann-dir", action="append", default=None,
                   help="gold annotation directory; give exactly twice")
    p.add_argument("--sizes", default=None, help="comma-separated line counts")
    p.add_argument("--samples", type=int, default=None, help="samples per size")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output CSV")
    _add_tagger_flags(p)

    p = sub.add_parser("llm", help="one-shot LLM benchmark")
    p.add_argument("--provider", default=None, help="provider config JSON")
    p.add_argument("--corpus", default=None)
    p.add_argument("--ann-dir", action="append", default=None,
                   help="gold annotation directory; give once or twice")
    p.add_argument("--archive", default=None, help="raw response directory")
    p.add_argument("--limit", type=int, default=None, help="poem cap")
    p.add_argument("--out", default=None, help="report CSV")

    p = sub.add_parser("serve", help="run the annotation HTTP service")
    p.add_argument("--corpus", default=None)
    p.add_argument("--annotations", default=None, help="writable annotation root")
    p.add_argument("--ui", default=None, help="static UI bundle directory")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)

    return parser


class _Options:
    """Flag > config file > default resolution."""

    def __init__(self, args: argparse.Namespace, config: dict):
        self._args = args
        self._config = config

    def get(self, key: str, default=None, required: bool = False):
        value = getattr(self._args, key, None)
        if value is None:
            value = self._config.get(key, default)
        if required and value is None:
            raise ConfigError(f"missing required option --{key.replace('_', '-')}")
        return value


def _tagger_config(opt: _Options) -> TaggerConfig:
    base = TaggerConfig()
    return TaggerConfig(
        window=int(opt.get("window", base.window)),
        tau=float(opt.get("tau", base.tau)),
        alpha=float(opt.get("alpha", base.alpha)),
        t_min=float(opt.get("t_min", base.t_min)),
        min_count=int(opt.get("min_count", base.min_count)),
        max_iter=int(opt.get("max_iter", base.max_iter)),
    )


def _load_transcriber(opt: _Options, corpus: Corpus):
    spec = opt.get("transcriber", required=True)
    return make_transcriber(spec, corpus.language)


def _two_ann_dirs(opt: _Options) -> tuple[list[Annotation], list[Annotation]]:
    dirs = opt.get("ann_dir", required=True)
    if not isinstance(dirs, list) or len(dirs) != 2:
        raise ConfigError("expected exactly two --ann-dir arguments")
    return load_annotation_dir(dirs[0]), load_annotation_dir(dirs[1])


def _cmd_ingest(opt: _Options) -> int:
    out = opt.get("out", required=True)
    text_dir = opt.get("text_dir")
    corpus_path = opt.get("corpus")
    if text_dir:
        language = opt.get("language", required=True)
        corpus = ingest_text_dir(text_dir, language)
    elif corpus_path:
        corpus = load_corpus(corpus_path)
    else:
        raise ConfigError("ingest needs --text-dir or --corpus")
    save_corpus(corpus, out)
    print(f"wrote {out}: {len(corpus.poems)} poems, {corpus.total_lines} lines")
    return 0


def _cmd_train(opt: _Options) -> int:
    corpus = load_corpus(opt.get("corpus", required=True))
    transcriber = _load_transcriber(opt, corpus)
    seed = int(opt.get("seed", 0))
    lines = opt.get("lines")
    if lines is not None:
        sample = sample_poems(corpus, int(lines), seed)
    else:
        sample = Sample(poems=corpus.poems, seed=seed,
                        target_lines=corpus.total_lines)
    model = train_model(sample, transcriber, _tagger_config(opt))
    out = opt.get("out", required=True)
    save_model(model, out)
    print(f"wrote {out}: {model.training_lines} lines, "
          f"{model.iterations_run} iterations")
    return 0


def _cmd_tag(opt: _Options) -> int:
    model = load_model(opt.get("model", required=True))
    corpus = load_corpus(opt.get("corpus", required=True))
    transcriber = _load_transcriber(opt, corpus)
    annotator = str(opt.get("annotator", "model"))
    out_dir = Path(opt.get("out", required=True))
    out_dir.mkdir(parents=True, exist_ok=True)
    wanted = opt.get("poem_id")
    poems = corpus.poems if not wanted else tuple(
        corpus.poem(pid) for pid in wanted)
    for poem in poems:
        tagged = tag_poem(model, poem, transcriber)
        annotation = Annotation(annotator_id=annotator, poem_id=poem.id,
                                chains=tagged.chains)
        save_annotation(annotation, out_dir / f"{poem.id}.json")
    print(f"tagged {len(poems)} poems into {out_dir}")
    return 0


def _cmd_iaa(opt: _Options) -> int:
    ann1, ann2 = _two_ann_dirs(opt)
    language = str(opt.get("language", "all"))
    report = iaa_report({language: (ann1, ann2)})
    for lang in sorted(report):
        r = report[lang]
        print(f"{lang}: micro F1 {r.micro_f1:.4f}, macro F1 {r.macro_f1:.4f} "
              f"({len(r.per_poem)} poems)")
    out = opt.get("out")
    if out:
        write_iaa_csv(report, out)
        print(f"wrote {out}")
    return 0


def _cmd_agreement_data(opt: _Options) -> int:
    corpus = load_corpus(opt.get("corpus", required=True))
    ann1, ann2 = _two_ann_dirs(opt)
    transcriber = _load_transcriber(opt, corpus)
    dataset = consecutive_pairs_dataset(corpus, ann1, ann2, transcriber)
    out = opt.get("out", required=True)
    write_agreement_csv(dataset.rows, out)
    print(f"wrote {out}: {len(dataset.rows)} rows, {dataset.skipped} skipped")
    return 0


def _cmd_regress(opt: _Options) -> int:
    rows = read_agreement_csv(opt.get("data", required=True))
    base = LogitModelConfig()
    config = LogitModelConfig(
        chains=int(opt.get("chains", base.chains)),
        draws=int(opt.get("draws", base.draws)),
        warmup=int(opt.get("warmup", base.warmup)),
        hdi_mass=float(opt.get("hdi_mass", base.hdi_mass)),
        seed=int(opt.get("seed", 0)),
    )
    summary = fit_hierarchical_logit(rows, config)
    out = opt.get("out", required=True)
    write_summary_csv(summary, out)
    meta = {
        "hdi_mass": summary.hdi_mass,
        "metadata": summary.metadata,
        "acceptance_rates": summary.acceptance_rates,
        "warnings": list(summary.warnings),
    }
    Path(str(out) + ".meta.json").write_text(
        json.dumps(meta, ensure_ascii=False, sort_keys=True, indent=1) + "\n",
        encoding="utf-8")
    for name, p in summary.parameters.items():
        print(f"{name}: mean {p.mean:+.3f} sd {p.sd:.3f} "
              f"hdi [{p.hdi_low:+.3f}, {p.hdi_high:+.3f}] "
              f"rhat {p.rhat:.3f} ess {p.ess:.0f}")
    for warning in summary.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(f"wrote {out}")
    return 0


def _parse_sizes(raw) -> tuple[int, ...]:
    if isinstance(raw, (list, tuple)):
        return tuple(int(v) for v in raw)
    return tuple(int(part) for part in str(raw).split(",") if part.strip())


def _cmd_sweep(opt: _Options) -> int:
    corpus = load_corpus(opt.get("corpus", required=True))
    transcriber = _load_transcriber(opt, corpus)
    gold1, gold2 = _two_ann_dirs(opt)
    config = SweepConfig(
        sizes=_parse_sizes(opt.get("sizes", required=True)),
        samples_per_size=int(opt.get("samples", 1)),
        master_seed=int(opt.get("seed", 0)),
        tagger=_tagger_config(opt),
    )
    rows = run_sweep(corpus, gold1, gold2, transcriber, config)
    out = opt.get("out", required=True)
    write_sweep_csv(rows, out)
    failed = sum(1 for r in rows if r.failed)
    print(f"wrote {out}: {len(rows)} rows ({failed} failed)")
    return 0


def _cmd_llm(opt: _Options) -> int:
    corpus = load_corpus(opt.get("corpus", required=True))
    provider = RestProvider(
        provider_config_from_file(opt.get("provider", required=True)))
    dirs = opt.get("ann_dir", required=True)
    if not isinstance(dirs, list) or not 1 <= len(dirs) <= 2:
        raise ConfigError("expected one or two --ann-dir arguments")
    gold = [load_annotation_dir(d) for d in dirs]
    poem_ids = sorted({a.poem_id for annotations in gold for a in annotations})
    limit = opt.get("limit")
    if limit is not None:
        poem_ids = poem_ids[: int(limit)]
    poems = [corpus.poem(pid) for pid in poem_ids]
    archive_dir = opt.get("archive", required=True)
    report = run_benchmark(
        provider, poems, gold, archive=ResponseArchive(archive_dir),
        language=corpus.language, concurrency=int(opt.get("jobs", 2)))
    out = opt.get("out", required=True)
    write_benchmark_csv(report, out)
    for annotator in sorted(report.pooled):
        f1 = report.pooled[annotator]
        shown = "undefined" if f1 is None else f"{f1:.4f}"
        print(f"vs {annotator}: pooled F1 {shown}")
    print(f"wrote {out}: {len(report.failed_poems)} failed poems")
    return 0


def _cmd_serve(opt: _Options) -> int:
    corpus = load_corpus(opt.get("corpus", required=True))
    server = build_server(
        corpus,
        annotations_dir=opt.get("annotations", required=True),
        ui_dir=opt.get("ui"),
        host=str(opt.get("host", "127.0.0.1")),
        port=int(opt.get("port", 8080)),
    )
    host, port = server.server_address[:2]
    print(f"serving on http://{host}:{port}/ (Ctrl-C to stop)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "train": _cmd_train,
    "tag": _cmd_tag,
    "iaa": _cmd_iaa,
    "agreement-data": _cmd_agreement_data,
    "regress": _cmd_regress,
    "sweep": _cmd_sweep,
    "llm": _cmd_llm,
    "serve": _cmd_serve,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_usage(sys.stderr)
        return 1
    config: dict = {}
    try:
        if args.config:
            try:
                config = json.loads(Path(args.config).read_text(encoding="utf-8"))
            except FileNotFoundError:
                raise ConfigError(f"config file not found: {args.config}")
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file is not valid JSON: {exc}")
            if not isinstance(config, dict):
                raise ConfigError("config file must hold a JSON object")
        return _COMMANDS[args.command](_Options(args, config))
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RuntimeFailure as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
