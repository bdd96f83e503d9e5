"""Command-line entry points: ingest, classify, annotate, evaluate, serve."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from commentscope.config import Config, load_config
from commentscope.corpus import CorpusError, load_corpus
from commentscope.evaluator import (
    EvaluationError,
    compare_strategies,
    confusion_to_csv,
    render_table,
    reports_to_csv,
)
from commentscope.pipeline import (
    Strategy,
    assemble_document,
    classified_to_json,
    document_to_json,
    run_pipeline,
)


def _load_cfg(config_path: str | None) -> Config:
    return load_config(config_path) if config_path else load_config()


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


@click.group()
def main():
    """CommentScope: classify article comments and serve annotated documents."""


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
def ingest(corpus_path):
    """Validate a corpus file and print a summary."""
    try:
        article, comments = load_corpus(corpus_path)
    except CorpusError as exc:
        _fail(str(exc))
    gold = sum(1 for c in comments if c.gold is not None)
    click.echo(
        f"article {article.id!r}: {article.paragraph_count} paragraphs, "
        f"{article.sentence_count} sentences; {len(comments)} comments ({gold} gold-labeled)"
    )


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option(
    "--strategy",
    type=click.Choice([s.value for s in Strategy]),
    default=Strategy.HYBRID.value,
)
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--out", "out_path", required=True, type=click.Path())
def classify(corpus_path, strategy, config_path, out_path):
    """Run the classification pipeline and write the results as JSON."""
    try:
        article, comments = load_corpus(corpus_path)
        cfg = _load_cfg(config_path)
        classified = run_pipeline(article, comments, cfg, Strategy(strategy))
    except (CorpusError, ValueError, FileNotFoundError) as exc:
        _fail(str(exc))
    Path(out_path).write_text(classified_to_json(classified), "utf-8")
    click.echo(f"wrote {len(classified)} classified comments to {out_path}")


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option(
    "--strategy",
    type=click.Choice([s.value for s in Strategy]),
    default=Strategy.HYBRID.value,
)
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--out", "out_path", required=True, type=click.Path())
def annotate(corpus_path, strategy, config_path, out_path):
    """Classify and assemble the annotated document for the reader UI."""
    try:
        article, comments = load_corpus(corpus_path)
        cfg = _load_cfg(config_path)
        classified = run_pipeline(article, comments, cfg, Strategy(strategy))
        doc = assemble_document(article, classified, comments, highlight_k=cfg.highlight_k)
    except (CorpusError, ValueError, FileNotFoundError) as exc:
        _fail(str(exc))
    Path(out_path).write_text(document_to_json(doc), "utf-8")
    click.echo(f"wrote annotated document to {out_path}")


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--out-dir", "out_dir", type=click.Path(), default=".")
def evaluate(corpus_path, config_path, out_dir):
    """Compare rule-only, LLM-only, and hybrid strategies against gold labels."""
    try:
        article, comments = load_corpus(corpus_path)
        cfg = _load_cfg(config_path)
        reports = compare_strategies(article, comments, cfg)
    except (CorpusError, EvaluationError, ValueError, FileNotFoundError) as exc:
        _fail(str(exc))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table = render_table(reports)
    (out / "report.txt").write_text(table, "utf-8")
    (out / "report.csv").write_text(reports_to_csv(reports), "utf-8")
    (out / "confusion.csv").write_text(confusion_to_csv(reports), "utf-8")
    click.echo(table, nl=False)
    click.echo(f"reports written to {out}/report.txt, report.csv, confusion.csv")


@main.command()
@click.option(
    "--docs",
    "doc_paths",
    required=True,
    multiple=True,
    type=click.Path(),
    help="Annotated document JSON file(s); pass multiple times for several.",
)
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
def serve(doc_paths, config_path, host, port):
    """Start the HTTP service over one or more annotated documents."""
    import uvicorn

    from commentscope.service import create_app

    try:
        cfg = _load_cfg(config_path)
        app = create_app(doc_paths)
    except (FileNotFoundError, ValueError) as exc:
        _fail(str(exc))
    uvicorn.run(app, host=host or cfg.listen_host, port=port or cfg.listen_port)


if __name__ == "__main__":
    main()
