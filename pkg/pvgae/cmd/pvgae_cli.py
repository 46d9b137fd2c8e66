"""
Command-line interface.

This module provides the main CLI application for training and evaluating
privacy-preserving graph autoencoders. It offers commands for generating
synthetic datasets, training models, exporting and evaluating embeddings,
running attribute inference attacks and parameter sweeps.

Key features:
- Synthetic block-model dataset generation with reproducible files
- Training of the privacy-preserving model or the plain baseline
- Embedding export from saved checkpoints
- Link prediction, node classification and attack evaluation
- Sweeps over penalty weight, embedding dimension and observed ratio
- Configuration management
- Progress tracking with rich console output

Every command validates the configuration before touching the filesystem.
Human-facing output goes to the console; every artifact a run produces is
written to files under the run directory.

Commands:
- gen-synth: Generate a synthetic dataset
- train: Train a model and export its embeddings
- embed: Re-export embeddings from a checkpoint
- eval: Evaluate an embedding file
- attack: Run the attribute inference attack only
- sweep: Run a parameter sweep
- config: Configuration management
"""

from pathlib import Path
from typing import Optional

import typer
import yaml
from rich import print
from rich.table import Table
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn

from pvgae.cmd.cli import config_app
from pvgae.evaluation.attack import ATTACKER_KINDS, run_attack
from pvgae.evaluation.report import METRICS, EvalReport, append_report
from pvgae.evaluation.sweep import resolve_axis, run_sweep, write_summary
from pvgae.experiment import evaluate_embeddings, load_or_generate, prepare_data, train_model
from pvgae.graph.io import save_dataset
from pvgae.graph.sbm import generate_sbm
from pvgae.model.checkpoint import load_checkpoint, save_checkpoint
from pvgae.numerics.random import RandomSource
from pvgae.training.export import export_embeddings, load_embeddings, save_embeddings
from pvgae.utils.config import ExperimentConfig, get_config, load_config
from pvgae.utils.errors import ConsistencyError, TrainingAborted
from pvgae.utils.logging import get_logger, setup_logging
from pvgae.utils.misc import config_hash, handle_errors, parse_seeds, parse_values, unique_run_dir

log = get_logger("cli")

# Initialize the main Typer application
# no_args_is_help=True ensures help is shown when no command is given
app = typer.Typer(no_args_is_help=True)


@app.callback()
def main_callback(
    ctx: typer.Context,
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Enable verbose logging"),
    log_file: Optional[Path] = typer.Option(None, "--log-file", help="Write logs to file"),
    config_file: Optional[Path] = typer.Option(None, "--config", "-c", help="Config file path"),
    seed: Optional[int] = typer.Option(None, "--seed", "-s", help="Run seed (overrides train.seed)"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output root directory"),
) -> None:
    """
    Global callback for CLI initialization.

    Loads configuration, applies the global overrides and sets up logging.
    This runs before any command is executed.

    :param verbose: Enable verbose (DEBUG level) logging output.
    :param log_file: Path to write logs to file in addition to stderr.
    :param config_file: Path to custom configuration file.
    :param seed: Run seed for training, splits and evaluation.
    :param out: Root directory for run outputs.
    """
    with handle_errors():
        config = load_config(config_file)

    if seed is not None:
        config.train.seed = seed
    if out is not None:
        config.output_dir = str(out)

    # Verbose flag takes precedence over config file
    level = "DEBUG" if verbose else config.logging.level
    log_path = log_file or (Path(config.logging.file) if config.logging.file else None)
    setup_logging(level=level, log_file=log_path, verbose=verbose or config.logging.verbose)

    ctx.obj = {"seed": seed, "config_explicit": config_file is not None}


# Register sub-applications for different command groups
app.add_typer(config_app, name="config", help="Configuration management")


def _artifact_config(ctx: typer.Context, artifact: Path) -> ExperimentConfig:
    """
    Configuration that produced ``artifact``.

    A ``config.yaml`` next to the artifact (written by ``train``) wins unless
    ``--config`` was given explicitly, so splits are rebuilt exactly as
    they were at training time.
    """
    run_config = Path(artifact).parent / "config.yaml"
    if (ctx.obj or {}).get("config_explicit") or not run_config.is_file():
        return get_config().copy()
    with open(run_config) as f:
        cfg = ExperimentConfig.from_dict(yaml.safe_load(f) or {})
    cfg.output_dir = get_config().output_dir
    log.debug(f"Using run configuration {run_config}")
    return cfg


def _format(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.4f}"


def _report_table(report: EvalReport, title: str) -> Table:
    table = Table(title=title)
    table.add_column("Metric", style="cyan")
    table.add_column("Value", justify="right")
    for name in METRICS:
        table.add_row(name, _format(getattr(report, name)))
    return table


@app.command("gen-synth")
def gen_synth(
    ctx: typer.Context,
    output: Optional[Path] = typer.Option(None, "--output", help="Dataset directory (default: a new directory under --out)"),
) -> None:
    """
    Generate a synthetic block-model dataset.

    Writes the edge list, feature matrix, annotation file and provenance.
    The global --seed is used when given, otherwise ``dataset.seed``; the
    same seed always produces byte-identical files.

    :param output: Target directory.
    """
    config = get_config()
    with handle_errors():
        config.validate()
        sbm = config.dataset.synthetic
        seed = ctx.obj["seed"] if ctx.obj and ctx.obj.get("seed") is not None else config.dataset.seed

        graph, ann = generate_sbm(sbm, RandomSource(seed).derive("dataset"))
        directory = output or unique_run_dir(Path(config.output_dir), "synth", config_hash(sbm.to_dict()), seed)
        save_dataset(graph, ann, directory, provenance={"generator": "sbm", "sbm": sbm.to_dict(), "seed": seed})

    print(f"[green]✓ Dataset written:[/green] {directory}")
    print(f"  nodes: {graph.num_nodes}  edges: {graph.num_edges}  features: {graph.feature_dim}")


@app.command("train")
def train(
    dataset: Optional[Path] = typer.Option(None, "--dataset", "-d", help="Dataset directory (default: synthetic)"),
    model: Optional[str] = typer.Option(None, "--model", "-m", help="Model kind: pvgae or vgae"),
    beta: Optional[float] = typer.Option(None, "--beta", "-b", help="Independence penalty weight"),
    epochs: Optional[int] = typer.Option(None, "--epochs", "-e", help="Training epochs"),
) -> None:
    """
    Train a model and export its embeddings.

    Creates a run directory holding ``config.yaml``, ``checkpoint.npz``,
    ``embeddings.txt`` and ``history.csv``. When training aborts on a
    non-finite value the partial history is still written and the command
    exits with code 1.

    :param dataset: Dataset directory written by gen-synth or prepared by hand.
    :param model: Model kind.
    :param beta: Penalty weight.
    :param epochs: Number of outer epochs.
    """
    config = get_config().copy()
    if dataset is not None:
        config.dataset.path = str(dataset)
    if model is not None:
        config.train.model = model
    if beta is not None:
        config.train.beta = beta
    if epochs is not None:
        config.train.epochs = epochs

    with handle_errors():
        config.validate()
        seed = config.train.seed
        loaded = load_or_generate(config)
        data = prepare_data(config, seed, loaded)

        run_dir = unique_run_dir(Path(config.output_dir), config.train.model, config.config_hash(), seed)
        config.save(run_dir / "config.yaml")
        if not config.dataset.path:
            graph, ann, provenance = loaded
            save_dataset(graph, ann, run_dir / "dataset", provenance)

        print(f"[cyan]Training {config.train.model}[/cyan] (beta={config.train.beta}, seed={seed}) → {run_dir}")
        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            TextColumn("{task.completed}/{task.total}"),
        ) as progress:
            task = progress.add_task("Training...", total=config.train.epochs)
            try:
                trained, history, embedding = train_model(
                    config, data, seed,
                    progress_callback=lambda done, total, losses: progress.update(
                        task, completed=done, description=f"Training... L_G {losses.total_graph:.4f}"
                    ),
                )
            except TrainingAborted as e:
                e.history.save(run_dir / "history.csv")
                raise

        save_checkpoint(trained, run_dir / "checkpoint.npz",
                        train_config=config.train_config().to_dict(),
                        extra={"config_hash": config.config_hash(), "seed": seed})
        save_embeddings(embedding, run_dir / "embeddings.txt")
        history.save(run_dir / "history.csv")

    last = history.last
    print(f"[green]✓ Training complete[/green] ({len(history)} epochs, {history.total_seconds:.1f}s)")
    print(f"  L_G: {last.total_graph:.4f}  penalty: {last.penalty:.4f}  L_s: {last.total_sensitive:.4f}")
    print(f"  Embeddings: {run_dir / 'embeddings.txt'}")


@app.command("embed")
def embed(
    ctx: typer.Context,
    checkpoint: Path = typer.Argument(..., help="Checkpoint written by train"),
    dataset: Optional[Path] = typer.Option(None, "--dataset", "-d", help="Dataset directory"),
    output: Optional[Path] = typer.Option(None, "--output", help="Embedding file (default: next to the checkpoint)"),
) -> None:
    """
    Export embeddings from a saved checkpoint.

    The embedding is the posterior mean on the training graph of the run
    seed stored in the checkpoint.

    :param checkpoint: Checkpoint path.
    :param dataset: Dataset the model was trained on.
    :param output: Target embedding file.
    """
    with handle_errors():
        config = _artifact_config(ctx, checkpoint)
        if dataset is not None:
            config.dataset.path = str(dataset)
        config.validate()

        model, metadata = load_checkpoint(checkpoint)
        seed = int(metadata.get("seed", config.train.seed))
        data = prepare_data(config, seed)
        embedding = export_embeddings(model, data.train_graph, seed=seed,
                                      config_hash=metadata.get("config_hash", config.config_hash()))
        path = save_embeddings(embedding, output or Path(checkpoint).parent / "embeddings.txt")

    print(f"[green]✓ Embeddings written:[/green] {path} ({embedding.num_nodes} x {embedding.dim})")


@app.command("eval")
def eval_cmd(
    ctx: typer.Context,
    embedding_path: Path = typer.Argument(..., help="Embedding file"),
    dataset: Optional[Path] = typer.Option(None, "--dataset", "-d", help="Dataset directory"),
    report_path: Optional[Path] = typer.Option(None, "--report", "-r", help="Report file (default: report.jsonl next to the embeddings)"),
    axis: str = typer.Option("single", "--axis", help="Axis label recorded in the report"),
    value: Optional[float] = typer.Option(None, "--value", help="Axis value recorded in the report"),
) -> None:
    """
    Evaluate an embedding file.

    Rebuilds the splits from the seed in the embedding header, computes
    link AUC, node classification accuracy, both attack accuracies and
    the public/secret group metrics, and appends one report line.

    :param embedding_path: Embedding file.
    :param dataset: Dataset the embedding was produced from.
    :param report_path: JSON-lines report to append to.
    :param axis: Axis label.
    :param value: Axis value.
    """
    with handle_errors():
        config = _artifact_config(ctx, embedding_path)
        if dataset is not None:
            config.dataset.path = str(dataset)
        config.validate()

        embedding = load_embeddings(embedding_path)
        loaded = load_or_generate(config)
        if embedding.num_nodes != loaded[0].num_nodes:
            raise ConsistencyError(
                f"embedding has {embedding.num_nodes} rows but the dataset has {loaded[0].num_nodes} nodes"
            )
        data = prepare_data(config, embedding.seed, loaded)

        with Progress(SpinnerColumn(), TextColumn("[progress.description]{task.description}")) as progress:
            progress.add_task("Evaluating...", total=None)
            report, provenance = evaluate_embeddings(config, data, embedding, axis=axis, value=value)

        path = report_path or Path(embedding_path).parent / "report.jsonl"
        append_report(path, report, {**provenance, "embedding": str(embedding_path)})

    print(_report_table(report, f"Evaluation (seed {report.seed})"))
    print(f"[green]✓ Report appended:[/green] {path}")


@app.command("attack")
def attack(
    ctx: typer.Context,
    embedding_path: Path = typer.Argument(..., help="Embedding file"),
    dataset: Optional[Path] = typer.Option(None, "--dataset", "-d", help="Dataset directory"),
    kind: Optional[str] = typer.Option(None, "--kind", "-k", help="Attacker kind: mlp or margin (default: both)"),
    folds: Optional[int] = typer.Option(None, "--folds", help="Cross-validation folds"),
) -> None:
    """
    Run the attribute inference attack on an embedding file.

    Uses the same random stream as ``eval``, so the accuracies match the
    ones in the evaluation report.

    :param embedding_path: Embedding file.
    :param dataset: Dataset holding the true sensitive attribute.
    :param kind: Attacker kind.
    :param folds: Fold count override.
    """
    with handle_errors():
        config = _artifact_config(ctx, embedding_path)
        if dataset is not None:
            config.dataset.path = str(dataset)
        if folds is not None:
            config.eval.attacker.folds = folds
        if kind is not None:
            config.eval.attacker.kind = kind
        config.validate()

        embedding = load_embeddings(embedding_path)
        graph, ann, _ = load_or_generate(config)
        if embedding.num_nodes != graph.num_nodes:
            raise ConsistencyError(
                f"embedding has {embedding.num_nodes} rows but the dataset has {graph.num_nodes} nodes"
            )

        rng = RandomSource(embedding.seed).derive("eval").derive("attack")
        kinds = [kind] if kind else list(ATTACKER_KINDS)
        results = {k: run_attack(embedding, ann.sensitive, config.eval.attacker.with_kind(k), rng) for k in kinds}

    table = Table(title=f"Attribute inference (seed {embedding.seed}, {config.eval.attacker.folds} folds)")
    table.add_column("Attacker", style="cyan")
    table.add_column("Accuracy", justify="right")
    table.add_column("Folds", justify="right")
    for name, result in results.items():
        table.add_row(name, f"{result.accuracy:.4f}", " ".join(f"{a:.3f}" for a in result.fold_accuracies))
    print(table)
    majority = max(ann.sensitive.tolist().count(c) for c in set(ann.sensitive.tolist())) / ann.num_nodes
    print(f"[dim]majority-class rate: {majority:.4f}[/dim]")


@app.command("sweep")
def sweep(
    axis: str = typer.Option(..., "--axis", "-a", help="Sweep axis: beta, dim or ratio"),
    values: str = typer.Option(..., "--values", help="Comma-separated axis values (e.g. 0,1,10,100)"),
    seeds: str = typer.Option("0,1,2", "--seeds", help="Comma-separated seeds, or a count"),
    workers: Optional[int] = typer.Option(None, "--workers", "-w", help="Worker processes (1 = sequential)"),
    dataset: Optional[Path] = typer.Option(None, "--dataset", "-d", help="Dataset directory (default: synthetic)"),
    model: Optional[str] = typer.Option(None, "--model", "-m", help="Model kind: pvgae or vgae"),
) -> None:
    """
    Run a parameter sweep.

    Trains and evaluates one model per (value, seed) cell and writes
    ``summary.csv`` plus every cell's report to ``reports.jsonl``. Failed
    cells are recorded; the command exits with code 1 if any cell failed.

    :param axis: Sweep axis.
    :param values: Axis values.
    :param seeds: Run seeds.
    :param workers: Parallel workers.
    :param dataset: Dataset directory.
    :param model: Model kind.
    """
    config = get_config().copy()
    if dataset is not None:
        config.dataset.path = str(dataset)
    if model is not None:
        config.train.model = model
    value_list = parse_values(values, float)
    seed_list = parse_seeds(seeds)

    with handle_errors():
        canonical = resolve_axis(axis)
        config.validate()
        run_dir = unique_run_dir(Path(config.output_dir), f"sweep-{canonical}", config.config_hash(), seed_list[0])
        config.save(run_dir / "config.yaml")

        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            TextColumn("{task.completed}/{task.total}"),
        ) as progress:
            task = progress.add_task(f"Sweeping {canonical}...", total=len(value_list) * len(seed_list))
            cells = run_sweep(
                config, canonical, value_list, seed_list, workers=workers,
                progress_callback=lambda done, total, cell: progress.update(task, completed=done),
            )

        for cell in cells:
            if not cell.failed:
                append_report(run_dir / "reports.jsonl", cell.report, cell.provenance)
        write_summary(cells, run_dir / "summary.csv")

    table = Table(title=f"Sweep over {canonical} ({len(seed_list)} seeds)")
    table.add_column("Value", justify="right")
    table.add_column("Seed", justify="right")
    table.add_column("Link AUC", justify="right")
    table.add_column("Attack (mlp)", justify="right")
    table.add_column("Status")
    for cell in cells:
        if cell.failed:
            table.add_row(f"{cell.value:g}", str(cell.seed), "-", "-", f"[red]{cell.error}[/red]")
        else:
            table.add_row(f"{cell.value:g}", str(cell.seed), _format(cell.report.link_auc),
                          _format(cell.report.attack_acc_mlp), "[green]ok[/green]")
    print(table)
    print(f"[green]✓ Summary written:[/green] {run_dir / 'summary.csv'}")

    failed = [c for c in cells if c.failed]
    if failed:
        print(f"[red]Error:[/red] {len(failed)} of {len(cells)} cells failed")
        raise typer.Exit(1)


def main():
    app()


if __name__ == "__main__":
    main()
