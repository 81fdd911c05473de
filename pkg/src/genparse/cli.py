"""Command-line entry points: train, generate, parse, evaluate, hdp-diag.

Every command takes an optional JSON config file; explicit flags win over
config values.  All randomness flows from one seeded generator per command,
so identical inputs and seeds reproduce outputs byte for byte.

Exit codes: 0 success, 1 usage error, 2 input or validation error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import evaluation, grammar as grammar_mod, hdp, ontology, parser, plots, semantics
from .ontology import PriorConfig

_PRIOR_MODES = {"uniform": "uniform", "type": "type_correct",
                "type_correct": "type_correct", "kb": "kb"}


class InputError(ValueError):
    pass


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"config file {path}: {exc}") from exc


def _pick(flag, config: dict, key: str, default):
    if flag is not None:
        return flag
    if key in config:
        return config[key]
    return default


def _require(value, name: str):
    if value is None:
        raise click.UsageError(f"missing required option --{name}")
    return value


def _prior_config(mode, type_bonus, kb_bonus, config) -> PriorConfig:
    mode = _pick(mode, config, "prior", "uniform")
    if mode not in _PRIOR_MODES:
        raise InputError(f"unknown prior mode {mode!r}")
    return PriorConfig(_PRIOR_MODES[mode],
                       float(_pick(type_bonus, config, "type_bonus", 4.0)),
                       float(_pick(kb_bonus, config, "kb_bonus", 8.0)))


def _read(path: str) -> str:
    p = Path(path)
    if not p.exists():
        raise InputError(f"no such file: {path}")
    return p.read_text(encoding="utf-8")


def _load_model(path: str) -> grammar_mod.TrainedGrammar:
    return grammar_mod.model_from_json(_read(path))


def _hdp_flags(config, samples, burn_in, thin, alpha, beta):
    values = {
        "samples": int(_pick(samples, config, "samples", hdp.DEFAULT_SAMPLES)),
        "burn_in": int(_pick(burn_in, config, "burn_in", hdp.DEFAULT_BURN_IN)),
        "thin": int(_pick(thin, config, "thin", hdp.DEFAULT_THIN)),
        "alpha": float(_pick(alpha, config, "alpha", hdp.DEFAULT_ALPHA)),
        "beta": float(_pick(beta, config, "beta", hdp.DEFAULT_BETA)),
    }
    if values["samples"] < 1 or values["thin"] < 1 or values["burn_in"] < 0:
        raise InputError("sampler settings must be positive")
    if values["alpha"] <= 0 or values["beta"] <= 0:
        raise InputError("hyperparameters must be positive")
    return values


@click.group()
def cli():
    """Generative semantic grammar toolkit."""


@cli.command()
@click.option("--grammar", "grammar_path", type=str, default=None)
@click.option("--kb", "kb_path", type=str, default=None)
@click.option("--corpus", "corpus_path", type=str, default=None)
@click.option("--out", "out_path", type=str, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--samples", type=int, default=None)
@click.option("--burn-in", type=int, default=None)
@click.option("--thin", type=int, default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--beta", type=float, default=None)
@click.option("--config", "config_path", type=str, default=None)
def train(grammar_path, kb_path, corpus_path, out_path, seed, samples,
          burn_in, thin, alpha, beta, config_path):
    """Train per-nonterminal selection models and write a model file."""
    config = _load_config(config_path)
    grammar_path = _require(_pick(grammar_path, config, "grammar", None), "grammar")
    kb_path = _require(_pick(kb_path, config, "kb", None), "kb")
    corpus_path = _require(_pick(corpus_path, config, "corpus", None), "corpus")
    out_path = _require(_pick(out_path, config, "out", None), "out")
    seed = int(_pick(seed, config, "seed", 0))
    flags = _hdp_flags(config, samples, burn_in, thin, alpha, beta)
    kb = ontology.load_knowledge_base(kb_path)
    grammar = grammar_mod.parse_grammar_file(_read(grammar_path))
    corpus = grammar_mod.load_corpus(_read(corpus_path), grammar, kb)
    trained = grammar_mod.train(grammar, corpus, kb, seed=seed,
                                n_samples=flags["samples"],
                                burn_in=flags["burn_in"], thin=flags["thin"],
                                alpha=flags["alpha"], beta=flags["beta"])
    Path(out_path).write_text(grammar_mod.model_to_json(trained),
                              encoding="utf-8")
    click.echo(f"trained on {len(corpus)} sentences")
    for name, row in trained.summary["nonterminals"].items():
        line = (f"  {name}: {row['rules']} rules, "
                f"{row['observations']} observations")
        if "sampling_seconds" in row:
            line += f", sampling {row['sampling_seconds']:.3f}s"
        click.echo(line)
    click.echo(f"model written to {out_path}")


@cli.command()
@click.option("--grammar", "grammar_path", type=str, default=None)
@click.option("--model", "model_path", type=str, default=None)
@click.option("--kb", "kb_path", type=str, default=None)
@click.option("--n", "count", type=int, default=None)
@click.option("--out", "out_path", type=str, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--tense-mode", type=str, default=None)
@click.option("--prior", "prior_mode", type=str, default=None)
@click.option("--type-bonus", type=float, default=None)
@click.option("--kb-bonus", type=float, default=None)
@click.option("--punctuate", is_flag=True, default=False)
@click.option("--config", "config_path", type=str, default=None)
def generate(grammar_path, model_path, kb_path, count, out_path, seed,
             tense_mode, prior_mode, type_bonus, kb_bonus, punctuate,
             config_path):
    """Sample statements from the prior and emit a gold-labeled corpus."""
    config = _load_config(config_path)
    kb_path = _require(_pick(kb_path, config, "kb", None), "kb")
    count = int(_require(_pick(count, config, "n", None), "n"))
    out_path = _require(_pick(out_path, config, "out", None), "out")
    seed = int(_pick(seed, config, "seed", 0))
    tense_mode = _pick(tense_mode, config, "tense_mode", "all")
    prior = _prior_config(prior_mode, type_bonus, kb_bonus, config)
    kb = ontology.load_knowledge_base(kb_path)
    model_path = _pick(model_path, config, "model", None)
    if model_path:
        trained = _load_model(model_path)
    else:
        grammar_path = _require(_pick(grammar_path, config, "grammar", None),
                                "grammar")
        trained = grammar_mod.prior_only(
            grammar_mod.parse_grammar_file(_read(grammar_path)), kb)
    records = evaluation.synthesize_corpus(trained, kb, count, seed=seed,
                                           tense_mode=tense_mode, prior=prior)
    if punctuate:
        # Presentation only: punctuated sentences do not round-trip training.
        rng = np.random.default_rng(seed)
        rows = []
        for record in records:
            sentence, _ = grammar_mod.generate(trained, record.statement, rng,
                                               punctuate=True)
            rows.append(f"{sentence}\t"
                        f"{semantics.format_statement(record.statement, kb)}")
        Path(out_path).write_text("\n".join(rows) + "\n", encoding="utf-8")
    else:
        Path(out_path).write_text(grammar_mod.write_corpus(records, kb),
                                  encoding="utf-8")
    click.echo(f"wrote {count} sentences to {out_path}")


_PARSE_FORMATS = ("text", "structured")


def _emit_parse(sentence: str, result: parser.ParseResult, kb, fmt: str):
    if fmt == "structured":
        rows = []
        for rank, output in enumerate(result.outputs, start=1):
            rows.append({"rank": rank, "score": output.score,
                         "posterior": output.posterior,
                         "statements": semantics.format_statement_set(
                             output.semantics, kb),
                         "tree": output.tree.text(spans=True)})
        click.echo(json.dumps({"sentence": sentence,
                               "exhausted": result.exhausted,
                               "parses": rows}, sort_keys=True))
        return
    for rank, output in enumerate(result.outputs, start=1):
        click.echo("\t".join([
            str(rank), f"{output.score:.6f}", f"{output.posterior:.6f}",
            semantics.format_statement_set(output.semantics, kb),
            output.tree.text(spans=True)]))


@cli.command(name="parse")
@click.option("--model", "model_path", type=str, default=None)
@click.option("--kb", "kb_path", type=str, default=None)
@click.option("--sentence", type=str, default=None)
@click.option("--input", "input_path", type=str, default=None)
@click.option("--k", type=int, default=None)
@click.option("--prior", "prior_mode", type=str, default=None)
@click.option("--type-bonus", type=float, default=None)
@click.option("--kb-bonus", type=float, default=None)
@click.option("--format", "fmt", type=click.Choice(_PARSE_FORMATS), default=None)
@click.option("--config", "config_path", type=str, default=None)
def parse_cmd(model_path, kb_path, sentence, input_path, k, prior_mode,
              type_bonus, kb_bonus, fmt, config_path):
    """Parse sentences into ranked statement sets and syntax trees."""
    config = _load_config(config_path)
    model_path = _require(_pick(model_path, config, "model", None), "model")
    kb_path = _require(_pick(kb_path, config, "kb", None), "kb")
    k = int(_pick(k, config, "k", 1))
    if k < 1:
        raise InputError("k must be at least 1")
    fmt = _pick(fmt, config, "format", "text")
    prior = _prior_config(prior_mode, type_bonus, kb_bonus, config)
    kb = ontology.load_knowledge_base(kb_path)
    trained = _load_model(model_path)
    if sentence is None and input_path is None:
        raise click.UsageError("provide --sentence or --input")
    sentences = [sentence] if sentence is not None else [
        line for line in _read(input_path).splitlines() if line.strip()]
    for text in sentences:
        result = parser.parse(text, trained, kb, prior, k=k)
        _emit_parse(text, result, kb, fmt)


@cli.command()
@click.option("--model", "model_path", type=str, default=None)
@click.option("--kb", "kb_path", type=str, default=None)
@click.option("--corpus", "corpus_path", type=str, default=None)
@click.option("--out-dir", type=str, default=None)
@click.option("--k", type=int, default=None)
@click.option("--k-values", type=str, default=None)
@click.option("--prior", "prior_mode", type=str, default=None)
@click.option("--type-bonus", type=float, default=None)
@click.option("--kb-bonus", type=float, default=None)
@click.option("--config", "config_path", type=str, default=None)
def evaluate(model_path, kb_path, corpus_path, out_dir, k, k_values,
             prior_mode, type_bonus, kb_bonus, config_path):
    """Score parses against gold labels; write PR/AUC reports and figures."""
    config = _load_config(config_path)
    model_path = _require(_pick(model_path, config, "model", None), "model")
    kb_path = _require(_pick(kb_path, config, "kb", None), "kb")
    corpus_path = _require(_pick(corpus_path, config, "corpus", None), "corpus")
    out_dir = Path(_require(_pick(out_dir, config, "out_dir", None), "out-dir"))
    k = int(_pick(k, config, "k", 10))
    k_values = _pick(k_values, config, "k_values", None)
    prior = _prior_config(prior_mode, type_bonus, kb_bonus, config)
    kb = ontology.load_knowledge_base(kb_path)
    trained = _load_model(model_path)
    records = grammar_mod.load_corpus(_read(corpus_path), trained.grammar, kb)
    predictions, gold, _, _ = evaluation.predictions_from_parses(
        records, trained, kb, prior, k)
    strict = evaluation.score_predictions(predictions, gold, kb, "strict")
    contains = evaluation.score_predictions(predictions, gold, kb, "contains")
    rows = []
    if k_values:
        ks = sorted(int(v) for v in str(k_values).split(","))
        rows = evaluation.auc_vs_k(records, trained, kb, prior, ks)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "pr_points_strict.csv").write_text(
        evaluation.pr_points_csv(strict), encoding="utf-8")
    (out_dir / "pr_points_contains.csv").write_text(
        evaluation.pr_points_csv(contains), encoding="utf-8")
    plots.save_pr_curves({"strict": strict, "contains": contains},
                         out_dir / "pr_curve.png")
    if rows:
        (out_dir / "auc_vs_k.csv").write_text(evaluation.auc_vs_k_csv(rows),
                                              encoding="utf-8")
        plots.save_auc_vs_k(rows, out_dir / "auc_vs_k.png")
    report = evaluation.report_text(strict, contains, rows)
    (out_dir / "report.txt").write_text(report, encoding="utf-8")
    click.echo(report, nl=False)


@cli.command(name="hdp-diag")
@click.option("--grammar", "grammar_path", type=str, default=None)
@click.option("--kb", "kb_path", type=str, default=None)
@click.option("--corpus", "corpus_path", type=str, default=None)
@click.option("--nonterminal", type=str, default=None)
@click.option("--value", type=int, default=None)
@click.option("--top-m", type=int, default=None)
@click.option("--sweeps", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--samples", type=int, default=None)
@click.option("--burn-in", type=int, default=None)
@click.option("--thin", type=int, default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--beta", type=float, default=None)
@click.option("--config", "config_path", type=str, default=None)
def hdp_diag(grammar_path, kb_path, corpus_path, nonterminal, value, top_m,
             sweeps, seed, samples, burn_in, thin, alpha, beta, config_path):
    """Sampler log-likelihood trace and top path-search yields for one rule."""
    config = _load_config(config_path)
    grammar_path = _require(_pick(grammar_path, config, "grammar", None), "grammar")
    kb_path = _require(_pick(kb_path, config, "kb", None), "kb")
    corpus_path = _require(_pick(corpus_path, config, "corpus", None), "corpus")
    nonterminal = _require(_pick(nonterminal, config, "nonterminal", None),
                           "nonterminal")
    value = int(_require(_pick(value, config, "value", None), "value"))
    top_m = int(_pick(top_m, config, "top_m", 10))
    sweeps = int(_pick(sweeps, config, "sweeps", 20))
    seed = int(_pick(seed, config, "seed", 0))
    flags = _hdp_flags(config, samples, burn_in, thin, alpha, beta)
    kb = ontology.load_knowledge_base(kb_path)
    grammar = grammar_mod.parse_grammar_file(_read(grammar_path))
    if nonterminal not in grammar.nonterminals:
        raise InputError(f"unknown nonterminal {nonterminal!r}")
    info = grammar.info(nonterminal)
    if info.is_affix:
        raise InputError("affix nonterminals have no sampler state")
    if not 0 <= value < len(info.rules):
        raise InputError(f"rule id {value} out of range for {nonterminal}")
    corpus = grammar_mod.load_corpus(_read(corpus_path), grammar, kb)
    observations = []
    for record in corpus:
        rows = grammar_mod.training_observations(grammar, record, kb)
        observations.extend(rows[nonterminal])
    tree = grammar_mod.build_hdp_tree(info, kb, alpha=flags["alpha"],
                                      beta=flags["beta"])
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    state = hdp.init_state(tree, observations, rng)
    click.echo(f"nonterminal {nonterminal}: {len(observations)} observations, "
               f"tree depth {tree.depth}")
    click.echo("sweep\tlog_likelihood\ttables")
    for sweep in range(sweeps):
        hdp.gibbs_sweep(state, rng)
        tables = sum(len(n.tables) for n in state.nodes.values())
        click.echo(f"{sweep}\t{state.log_joint_seating():.6f}\t{tables}")
    samples_list = hdp.sample_posterior(state, rng, n_samples=flags["samples"],
                                        burn_in=0, thin=flags["thin"])
    rule = info.rules[value]
    click.echo(f"top {top_m} cells for rule [{rule}]")
    iterator = hdp.path_iterator(samples_list, tree, value)
    for rank, (cell, score) in enumerate(iterator, start=1):
        if rank > top_m:
            break
        cell_set = semantics.cell_from_level_sets(info.features, cell)
        click.echo(f"{rank}\t{score:.6f}\t"
                   f"{semantics.format_statement_set(cell_set, kb)}")


def main(argv=None) -> int:
    """Entry point with the documented exit-code contract."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:          # --help and friends
        return exc.exit_code
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return 1
    except (InputError, OSError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
