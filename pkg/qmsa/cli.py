"""CLI interface for qmsa.

Result files (``solve`` and ``sweep``) are JSON with three top-level keys::

    {"command": "solve",
     "run_config": {...},          # validated RunConfig, enough to replay the run
     "result": {                   # QaoaResult.to_dict()
        "p", "seed", "params", "best_expectation", "starts",
        "global_minimum": {"bitstring", "energy", "probability"},
        "histogram": {"shots", "seed", "outcomes": [...]},
        "top_outcomes": [...]}}

Each outcome is ``{"bitstring", "count", "probability", "energy", "feasible",
"alignment", "violations"}``. CSV files are projections of the JSON; their
first line is ``# run_config=<compact JSON>``.
"""

import csv
import json
import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence

import typer
from rich import box
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table
from tabulate import tabulate

from qmsa.core.config import Config, ConfigLoader, RunConfig, dump_json
from qmsa.core.errors import InvalidInputError, QmsaError
from qmsa.models.alignment import AlignmentMatrix, SequenceSet
from qmsa.models.qaoa import Outcome, QaoaResult
from qmsa.services.combinatorics import (
    CountReport,
    count_report,
    count_report_for_lengths,
    exact_digits,
)
from qmsa.services.encoding import build_index_map, encode_alignment, reference_alignment
from qmsa.services.hamiltonian import build_cost_qubo, qubo_to_ising
from qmsa.services.oracle import OracleService
from qmsa.services.qaoa import QaoaService
from qmsa.services.scoring import ScoringScheme, build_weight_tensor, load_scoring_matrix, sim_sp

app = typer.Typer(
    name="qmsa",
    help="Multiple sequence alignment as QUBO/Ising models, solved with simulated QAOA",
    no_args_is_help=True,
)

console = Console()

HISTOGRAM_HEADERS = ["bitstring", "count", "probability", "feasible", "energy"]
TOP_HEADERS = ["rank", "bitstring", "count", "probability", "energy", "feasible", "alignment"]
SERIES_HEADERS = ["p", "best_expectation", "probability_of_global_min"]

SEQS_OPTION = typer.Option(None, "--seqs", "-s", help="Comma-separated sequences, e.g. AG,G")
FASTA_OPTION = typer.Option(None, "--fasta", help="FASTA file with the sequences")
CONFIG_OPTION = typer.Option(None, "--config", "-c", help="YAML/JSON config or a result file")
SCORING_OPTION = typer.Option(None, "--scoring", help="JSON scoring matrix, e.g. {\"AC\": 1}")
P1_OPTION = typer.Option(None, "--p1", help="Penalty: one column per letter")
P2_OPTION = typer.Option(None, "--p2", help="Penalty: one letter per row and column")
P3_OPTION = typer.Option(None, "--p3", help="Penalty: letter order")
JSON_OPTION = typer.Option(False, "--json", help="Print JSON only")


@contextmanager
def _exit_on_error() -> Iterator[None]:
    """Map library errors onto exit codes with a one-line diagnostic."""
    try:
        yield
    except QmsaError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(e.exit_code)


def _parse_list(text: Optional[str], kind: str) -> Optional[List[int]]:
    if text is None:
        return None
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InvalidInputError(f"{kind} must be comma-separated integers, got {text!r}")


def _overrides(**flags: Any) -> Dict[str, Any]:
    """Nested override dict holding only the flags that were given."""
    sections = {
        "p1": "penalties",
        "p2": "penalties",
        "p3": "penalties",
        "seed": "optimizer",
        "starts": "optimizer",
        "max_evaluations": "optimizer",
        "shots": "simulation",
        "top_k": "simulation",
        "out_dir": "output",
        "formats": "output",
    }
    result: Dict[str, Any] = {}
    for key, value in flags.items():
        if value is None:
            continue
        section = sections.get(key)
        if section:
            result.setdefault(section, {})[key] = value
        else:
            result[key] = value
    return result


def _run_config(
    config: Optional[str], seqs: Optional[str], fasta: Optional[str], **flags: Any
) -> RunConfig:
    overrides = _overrides(**flags)
    if seqs is not None:
        overrides["sequences"] = list(SequenceSet.from_inline(seqs).strings)
        overrides["names"] = []
        overrides["fasta"] = None
    elif fasta is not None:
        loaded = SequenceSet.from_fasta(fasta)
        overrides["sequences"] = list(loaded.strings)
        overrides["names"] = list(loaded.names)
        overrides["fasta"] = fasta
    return ConfigLoader.build_run_config(config, overrides)


def _sequences(run_config: RunConfig) -> SequenceSet:
    if run_config.sequences:
        return SequenceSet(tuple(run_config.sequences), tuple(run_config.names))
    if run_config.fasta:
        return SequenceSet.from_fasta(run_config.fasta)
    raise InvalidInputError("No sequences given: use --seqs, --fasta or a config file")


def _scheme(run_config: RunConfig) -> ScoringScheme:
    if run_config.scoring_file:
        return load_scoring_matrix(run_config.scoring_file)
    return sim_sp


def _settings(run_config: RunConfig) -> Config:
    return Config(
        penalties=run_config.penalties,
        optimizer=run_config.optimizer,
        simulation=run_config.simulation,
        output=run_config.output,
    )


def _csv_value(value: Any) -> Any:
    if isinstance(value, bool):
        return "true" if value else "false"
    return value


def _write_csv(
    path: Path, headers: Sequence[str], rows: Sequence[Sequence[Any]], run_config: RunConfig
) -> None:
    provenance = json.dumps(run_config.to_dict(), sort_keys=True, separators=(",", ":"))
    with path.open("w", newline="", encoding="utf-8") as f:
        f.write(f"# run_config={provenance}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(headers)
        writer.writerows([[_csv_value(v) for v in row] for row in rows])


def _alignment_text(outcome: Outcome) -> str:
    if isinstance(outcome.decoded, AlignmentMatrix):
        return "/".join(outcome.decoded.rows)
    return ""


def _histogram_rows(result: QaoaResult) -> List[List[Any]]:
    return [
        [o.bitstring, o.count, o.probability, o.feasible, o.energy] for o in result.outcomes
    ]


def _top_rows(result: QaoaResult) -> List[List[Any]]:
    return [
        [rank, o.bitstring, o.count, o.probability, o.energy, o.feasible, _alignment_text(o)]
        for rank, o in enumerate(result.top, start=1)
    ]


def _write_result(
    out_dir: Path, stem: str, command: str, result: QaoaResult, run_config: RunConfig
) -> List[Path]:
    """Write the JSON result and its CSV projections; returns the written paths."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    formats = run_config.output.formats
    if "json" in formats:
        path = out_dir / f"{stem}.json"
        payload = {
            "command": command,
            "run_config": run_config.to_dict(),
            "result": result.to_dict(),
        }
        path.write_text(dump_json(payload), encoding="utf-8")
        written.append(path)
    if "csv" in formats and command == "solve":
        path = out_dir / f"{stem}_histogram.csv"
        _write_csv(path, HISTOGRAM_HEADERS, _histogram_rows(result), run_config)
        written.append(path)
        path = out_dir / f"{stem}_top.csv"
        _write_csv(path, TOP_HEADERS, _top_rows(result), run_config)
        written.append(path)
    return written


def _setup_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def _display_result(result: QaoaResult) -> None:
    summary = [
        ["Layers (p)", result.p],
        ["Run seed", result.seed],
        ["Best <H>", f"{result.best_expectation:.6f}"],
        ["Global minimum", f"{result.global_min} ({result.global_min_energy:g})"],
        ["P(global minimum)", f"{result.global_min_probability:.4f}"],
        ["Most sampled", result.most_probable_sample],
        ["Shots", result.histogram.shots],
    ]
    console.print(f"\n[bold]QAOA p={result.p}[/bold]")
    console.print(tabulate(summary, headers=["Property", "Value"], tablefmt="rounded_grid"))

    table = Table(title=f"Top {len(result.top)} outcomes", box=box.ROUNDED)
    table.add_column("#", style="dim")
    table.add_column("Bitstring", style="cyan")
    table.add_column("Count", justify="right")
    table.add_column("Probability", justify="right")
    table.add_column("Energy", justify="right")
    table.add_column("Alignment", style="green")
    for rank, o in enumerate(result.top, start=1):
        if isinstance(o.decoded, AlignmentMatrix):
            alignment = _alignment_text(o)
        else:
            alignment = f"[red]infeasible {list(o.decoded.constraints)}[/red]"
        table.add_row(
            str(rank), o.bitstring, str(o.count), f"{o.probability:.4f}", f"{o.energy:g}", alignment
        )
    console.print(table)


def _display_count(report: CountReport) -> None:
    exact = exact_digits(report.feasible_count)
    magnitude = f"10^{report.log10_feasible_count:.3f}"
    data = [
        ["Strings (N)", report.count],
        ["Columns (L)", report.width],
        ["Qubits", report.qubits],
        ["Feasible alignments", f"{exact} ({magnitude})" if exact else magnitude],
        ["Hilbert space", f"2^{report.qubits}"],
        ["Feasible fraction", f"10^{report.log10_fraction:.3f}"],
        ["Upper bound", f"10^{report.log10_bound:.3f}"],
    ]
    if report.qubits <= 64:
        data[5][1] = f"{report.fraction_text} (10^{report.log10_fraction:.3f})"
    console.print(tabulate(data, headers=["Quantity", "Value"], tablefmt="rounded_grid"))
    if report.quote_discrepancy:
        console.print(f"[yellow]Note:[/yellow] {report.quote_discrepancy}")


@app.command()
def encode(
    seqs: Optional[str] = SEQS_OPTION,
    fasta: Optional[str] = FASTA_OPTION,
    config: Optional[str] = CONFIG_OPTION,
    as_json: bool = JSON_OPTION,
) -> None:
    """Show the one-hot column encoding and the reference placement."""
    with _exit_on_error():
        run_config = _run_config(config, seqs, fasta)
        sequences = _sequences(run_config)
        index_map = build_index_map(sequences)
        alignment = reference_alignment(sequences)
        bitstring = encode_alignment(alignment, index_map)

    payload = {
        "sequences": list(sequences.strings),
        "names": list(sequences.names),
        "qubits": index_map.total_qubits,
        "offsets": list(index_map.offsets),
        "index_map": [
            {"k": k, "string": s, "letter": n, "column": i}
            for k, (s, n, i) in enumerate(index_map.triples())
        ],
        "reference_alignment": alignment.to_list(),
        "reference_bitstring": str(bitstring),
    }
    if as_json:
        typer.echo(dump_json(payload), nl=False)
        return

    console.print(f"[bold]n = {index_map.total_qubits} qubits[/bold]")
    table = Table(title="Qubit index map", box=box.ROUNDED)
    table.add_column("k", justify="right", style="cyan")
    table.add_column("String")
    table.add_column("Letter")
    table.add_column("Column", justify="right")
    for k, (s, n, i) in enumerate(index_map.triples()):
        table.add_row(str(k), sequences.names[s], f"{n} ({sequences.strings[s][n]})", str(i))
    console.print(table)
    console.print("\n[bold]Reference alignment[/bold]")
    console.print(alignment.render())
    console.print(f"Bitstring: [green]{bitstring}[/green]")


@app.command()
def solve(
    seqs: Optional[str] = SEQS_OPTION,
    fasta: Optional[str] = FASTA_OPTION,
    p: Optional[int] = typer.Option(None, "--p", help="Number of QAOA layers"),
    shots: Optional[int] = typer.Option(None, "--shots", help="Measurement shots (default 5000)"),
    p1: Optional[float] = P1_OPTION,
    p2: Optional[float] = P2_OPTION,
    p3: Optional[float] = P3_OPTION,
    seed: Optional[int] = typer.Option(None, "--seed", help="Master seed"),
    starts: Optional[int] = typer.Option(None, "--starts", help="Random optimizer starts"),
    max_evals: Optional[int] = typer.Option(None, "--max-evals", help="Evaluations per start"),
    top_k: Optional[int] = typer.Option(None, "--top-k", help="Rows in the top outcomes table"),
    out: Optional[str] = typer.Option(None, "--out", "-o", help="Output directory"),
    formats: Optional[str] = typer.Option(None, "--format", help="Comma-separated: json,csv"),
    scoring: Optional[str] = SCORING_OPTION,
    config: Optional[str] = CONFIG_OPTION,
) -> None:
    """Optimize one QAOA depth, sample the optimal state and write the results."""
    with _exit_on_error():
        run_config = _run_config(
            config,
            seqs,
            fasta,
            p_values=[p] if p is not None else None,
            shots=shots,
            p1=p1,
            p2=p2,
            p3=p3,
            seed=seed,
            starts=starts,
            max_evaluations=max_evals,
            top_k=top_k,
            out_dir=out,
            formats=formats.split(",") if formats is not None else None,
            scoring_file=scoring,
        )
        sequences = _sequences(run_config)
        depth = run_config.p_values[0]
        service = QaoaService(_settings(run_config), _scheme(run_config))
        with console.status(f"[bold green]Optimizing p={depth}..."):
            result = service.run_qaoa(sequences, depth)
        written = _write_result(
            Path(run_config.output.out_dir), f"solve_p{depth}", "solve", result, run_config
        )

    _display_result(result)
    for path in written:
        console.print(f"[dim]Wrote {path}[/dim]")


@app.command()
def sweep(
    seqs: Optional[str] = SEQS_OPTION,
    fasta: Optional[str] = FASTA_OPTION,
    p_list: Optional[str] = typer.Option(None, "--p-list", help="Comma-separated depths, e.g. 1,2,3"),
    shots: Optional[int] = typer.Option(None, "--shots", help="Measurement shots (default 5000)"),
    p1: Optional[float] = P1_OPTION,
    p2: Optional[float] = P2_OPTION,
    p3: Optional[float] = P3_OPTION,
    seed: Optional[int] = typer.Option(None, "--seed", help="Master seed"),
    starts: Optional[int] = typer.Option(None, "--starts", help="Random optimizer starts"),
    max_evals: Optional[int] = typer.Option(None, "--max-evals", help="Evaluations per start"),
    out: Optional[str] = typer.Option(None, "--out", "-o", help="Output directory"),
    formats: Optional[str] = typer.Option(None, "--format", help="Comma-separated: json,csv"),
    scoring: Optional[str] = SCORING_OPTION,
    config: Optional[str] = CONFIG_OPTION,
) -> None:
    """Run several depths, warm-starting each from the previous one."""
    with _exit_on_error():
        run_config = _run_config(
            config,
            seqs,
            fasta,
            p_values=_parse_list(p_list, "--p-list"),
            shots=shots,
            p1=p1,
            p2=p2,
            p3=p3,
            seed=seed,
            starts=starts,
            max_evaluations=max_evals,
            out_dir=out,
            formats=formats.split(",") if formats is not None else None,
            scoring_file=scoring,
        )
        sequences = _sequences(run_config)
        service = QaoaService(_settings(run_config), _scheme(run_config))
        with console.status(f"[bold green]Sweeping p in {run_config.p_values}..."):
            results = service.p_sweep(sequences, run_config.p_values)

        out_dir = Path(run_config.output.out_dir)
        written: List[Path] = []
        for result in results.results:
            written += _write_result(out_dir, f"sweep_p{result.p}", "sweep", result, run_config)
        if "csv" in run_config.output.formats:
            out_dir.mkdir(parents=True, exist_ok=True)
            path = out_dir / "sweep_series.csv"
            rows = [[row[h] for h in SERIES_HEADERS] for row in results.series()]
            _write_csv(path, SERIES_HEADERS, rows, run_config)
            written.append(path)

    table = Table(title="Depth sweep", box=box.ROUNDED)
    table.add_column("p", justify="right", style="cyan")
    table.add_column("Best <H>", justify="right")
    table.add_column("P(global min)", justify="right")
    table.add_column("Most sampled", style="green")
    for result in results.results:
        table.add_row(
            str(result.p),
            f"{result.best_expectation:.6f}",
            f"{result.global_min_probability:.4f}",
            result.most_probable_sample,
        )
    console.print(table)
    for path in written:
        console.print(f"[dim]Wrote {path}[/dim]")


@app.command()
def count(
    seqs: Optional[str] = SEQS_OPTION,
    fasta: Optional[str] = FASTA_OPTION,
    lengths: Optional[str] = typer.Option(
        None, "--lengths", help="Synthetic string lengths, e.g. 43,43,43"
    ),
    width: Optional[int] = typer.Option(None, "--width", help="Synthetic reference length L"),
    quoted: Optional[float] = typer.Option(
        None, "--quoted-log10", help="Quoted order of magnitude to check the count against"
    ),
    config: Optional[str] = CONFIG_OPTION,
    as_json: bool = JSON_OPTION,
) -> None:
    """Count feasible alignments against the size of the Hilbert space."""
    with _exit_on_error():
        shape = _parse_list(lengths, "--lengths")
        if shape is not None or width is not None:
            if shape is None:
                raise InvalidInputError("--width needs --lengths")
            report = count_report_for_lengths(shape, width, quoted)
        else:
            report = count_report(_sequences(_run_config(config, seqs, fasta)), quoted)

    if not as_json:
        _display_count(report)
    typer.echo(dump_json(report.to_dict()), nl=False)


@app.command()
def oracle(
    seqs: Optional[str] = SEQS_OPTION,
    fasta: Optional[str] = FASTA_OPTION,
    p1: Optional[float] = P1_OPTION,
    p2: Optional[float] = P2_OPTION,
    p3: Optional[float] = P3_OPTION,
    top_k: Optional[int] = typer.Option(None, "--top-k", help="Lowest energies to list"),
    scoring: Optional[str] = SCORING_OPTION,
    config: Optional[str] = CONFIG_OPTION,
    as_json: bool = JSON_OPTION,
) -> None:
    """Exhaustive ground truth: global minimum, best feasible alignment, penalty check."""
    with _exit_on_error():
        run_config = _run_config(
            config, seqs, fasta, p1=p1, p2=p2, p3=p3, top_k=top_k, scoring_file=scoring
        )
        sequences = _sequences(run_config)
        service = OracleService(_settings(run_config), _scheme(run_config))
        report = service.report(sequences)
        check = service.cross_validate(sequences)

    payload = {
        "command": "oracle",
        "run_config": run_config.to_dict(),
        "oracle": report.to_dict(),
        "cross_validation": check.to_dict(),
    }
    if as_json:
        typer.echo(dump_json(payload), nl=False)
        return

    table = Table(title="Lowest energies", box=box.ROUNDED)
    table.add_column("Bitstring", style="cyan")
    table.add_column("Energy", justify="right")
    for bits, energy in report.energy_histogram:
        table.add_row(bits, f"{energy:g}")
    console.print(table)

    data = [
        ["Global minimum", f"{report.global_min_bitstring} ({report.global_min_energy:g})"],
        ["Best feasible", f"{report.feasible_min_bitstring} (SP {report.feasible_min_sp_score:g})"],
        ["Score spread", f"{check.score_spread:g}"],
        ["Penalty margin held", "yes" if check.penalties_sufficient else "no"],
        ["Consistent", "yes" if check.consistent else "no"],
    ]
    console.print(tabulate(data, headers=["Check", "Value"], tablefmt="rounded_grid"))
    for finding in check.findings:
        console.print(f"[yellow]{finding}[/yellow]")


@app.command()
def export(
    seqs: Optional[str] = SEQS_OPTION,
    fasta: Optional[str] = FASTA_OPTION,
    kind: str = typer.Option("qubo", "--kind", help="qubo or ising"),
    p1: Optional[float] = P1_OPTION,
    p2: Optional[float] = P2_OPTION,
    p3: Optional[float] = P3_OPTION,
    scoring: Optional[str] = SCORING_OPTION,
    config: Optional[str] = CONFIG_OPTION,
) -> None:
    """Print the compiled QUBO or Ising model as JSON."""
    with _exit_on_error():
        if kind not in ("qubo", "ising"):
            raise InvalidInputError(f"--kind must be qubo or ising, got {kind!r}")
        run_config = _run_config(config, seqs, fasta, p1=p1, p2=p2, p3=p3, scoring_file=scoring)
        sequences = _sequences(run_config)
        weights = build_weight_tensor(sequences, _scheme(run_config))
        model = build_cost_qubo(sequences, weights, run_config.penalties)
        document = model.to_dict() if kind == "qubo" else qubo_to_ising(model).to_dict()

    typer.echo(dump_json({"run_config": run_config.to_dict(), "model": document}), nl=False)


def _show_version(value: bool) -> None:
    if value:
        from qmsa import __version__
        console.print(f"qmsa v{__version__}")
        raise typer.Exit()


@app.callback()
def callback(
    version: Optional[bool] = typer.Option(
        None, "--version", callback=_show_version, is_eager=True, help="Show version and exit"
    ),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Show debug logging"),
) -> None:
    """Multiple sequence alignment as QUBO/Ising models, solved with simulated QAOA."""
    _setup_logging(verbose)


def main() -> None:
    """Entry point for the CLI."""
    app()


if __name__ == "__main__":
    main()
