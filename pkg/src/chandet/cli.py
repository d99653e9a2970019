"""Command-line front end: channel-spec files in, machine-readable reports out.

Channel specs are JSON with complex entries encoded as [re, im] pairs:

    {"dims": [2], "kind": "named", "name": "depolarizing", "params": {"p": 0.25}}
    {"dims": [2], "kind": "kraus", "kraus": [[[[1,0],[0,0]],[[0,0],[1,0]]]]}

Reports go to stdout (JSON or text), diagnostics to stderr. Exit codes:
0 = pipeline ran (the verdict is data, not an exit code), 2 = input error,
3 = numerical validation failure.
"""

import argparse
import json
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .channels import (
    Channel,
    ValidationError,
    classify,
    compose,
    kraus_from_choi,
    make_named_channel,
    superoperator_to_choi,
    _check_unitary,
)
from .detect import (
    Witness,
    alpha_sru_optimize,
    build_sru_witness,
    classify_violation,
    eb_witness,
    evaluate_witness,
    operator_schmidt,
    robustness_bounds,
    stabilizer_witness,
)
from .measure import estimate_witness, group_settings, pauli_decompose
from .pptdetect import detect_npt, ppt_witness, spa_transpose

EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_NUMERICAL_ERROR = 3

COMMANDS = (
    "choi",
    "schmidt",
    "decompose-witness",
    "detect-eb",
    "detect-sru",
    "detect-sep",
    "detect-npt",
    "simulate",
)

CNOT_STABILIZER_GENERATORS = ("XXXI", "IXIX", "ZIZI", "ZZIZ")


class SpecError(ValueError):
    """Malformed input: file, schema, or command/dims mismatch."""


@dataclass
class Report:
    pipeline: str
    channel_spec: dict
    options: dict
    results: dict
    elapsed_seconds: float = 0.0


# ---------------------------------------------------------------------------
# channel-spec parsing


def _complex_matrix(obj, where: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise SpecError(f"{where} must be a non-empty nested list of [re, im] pairs")
    rows = []
    for i, row in enumerate(obj):
        if not isinstance(row, list) or not row:
            raise SpecError(f"{where}[{i}] must be a non-empty list")
        entries = []
        for j, pair in enumerate(row):
            if (
                not isinstance(pair, list)
                or len(pair) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)
            ):
                raise SpecError(f"{where}[{i}][{j}] must be an [re, im] pair of numbers")
            entries.append(complex(pair[0], pair[1]))
        rows.append(entries)
    if any(len(r) != len(rows[0]) for r in rows):
        raise SpecError(f"{where} rows have unequal lengths")
    return np.array(rows, dtype=complex)


def matrix_to_pairs(m: np.ndarray) -> list:
    return [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(m, dtype=complex)]


_MATRIX_PARAMS = {
    "unitary": ("matrix",),
    "fully_depolarizing": ("sigma",),
}
_MATRIX_LIST_PARAMS = {
    "random_unitary": ("unitaries",),
    "sru": ("a_unitaries", "b_unitaries"),
}


def parse_channel_spec(spec: dict, require_tp: bool = True) -> Channel:
    """Validate a parsed channel-spec dict and construct the channel.

    Schema violations raise :class:`SpecError` naming the offending field;
    failed CP/TP/unitarity checks raise :class:`~chandet.channels.ValidationError`.
    """
    if not isinstance(spec, dict):
        raise SpecError("channel spec must be a JSON object")
    dims = spec.get("dims")
    if (
        not isinstance(dims, list)
        or not dims
        or not all(isinstance(d, int) and not isinstance(d, bool) and d >= 1 for d in dims)
    ):
        raise SpecError("dims must be a non-empty list of positive integers")
    kind = spec.get("kind")
    if kind == "named":
        name = spec.get("name")
        if not isinstance(name, str):
            raise SpecError("name must be a string for kind=named")
        params = spec.get("params", {})
        if not isinstance(params, dict):
            raise SpecError("params must be an object")
        params = dict(params)
        for key in _MATRIX_PARAMS.get(name, ()):
            if key in params:
                params[key] = _complex_matrix(params[key], f"params.{key}")
        for key in _MATRIX_LIST_PARAMS.get(name, ()):
            if key in params:
                if not isinstance(params[key], list):
                    raise SpecError(f"params.{key} must be a list of matrices")
                params[key] = [
                    _complex_matrix(m, f"params.{key}[{i}]") for i, m in enumerate(params[key])
                ]
        try:
            channel = make_named_channel(name, params, dims)
        except ValidationError:
            raise
        except (ValueError, KeyError) as exc:
            raise SpecError(str(exc)) from exc
    elif kind == "kraus":
        ops = spec.get("kraus")
        if not isinstance(ops, list) or not ops:
            raise SpecError("kraus must be a non-empty list of matrices")
        mats = [_complex_matrix(m, f"kraus[{i}]") for i, m in enumerate(ops)]
        try:
            channel = Channel(mats, dims, require_tp=require_tp)
        except ValidationError:
            raise
        except ValueError as exc:
            raise SpecError(str(exc)) from exc
    else:
        raise SpecError("kind must be 'named' or 'kraus'")
    return channel


def load_channel_spec(path: str, require_tp: bool = True) -> Channel:
    return parse_channel_spec(_read_spec_file(path), require_tp=require_tp)


def _read_spec_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise SpecError(f"channel spec file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON in {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# pipelines


@dataclass
class PipelineOptions:
    seed: int = 0
    shots: int | None = None
    starts: int = 50
    witness: str | None = None
    target_spec: dict | None = None
    channel_name: str | None = None

    def echo(self) -> dict:
        return {
            "seed": self.seed,
            "shots": self.shots,
            "starts": self.starts,
            "witness": self.witness,
            "target": self.target_spec,
        }


def _single_operator(ch: Channel, what: str) -> np.ndarray:
    if len(ch.kraus) != 1:
        raise SpecError(f"{what} needs a single-Kraus channel, got {len(ch.kraus)} operators")
    return ch.kraus[0]


def _single_unitary(ch: Channel, what: str) -> np.ndarray:
    return _check_unitary(_single_operator(ch, what), f"{what} operator")


def _require_dims(ch: Channel, allowed, command: str) -> None:
    if ch.dims not in allowed:
        opts = " or ".join(str(list(a)) for a in allowed)
        raise SpecError(f"{command} needs channel dims {opts}, got {list(ch.dims)}")


def _resolve_alpha_sq(u: np.ndarray, dims, name: str | None, opts: PipelineOptions):
    """Squared product-unitary overlap: exact for the named cnot gate, optimizer otherwise."""
    if name == "cnot":
        return 0.5, "exact-cnot"
    val, _, _ = alpha_sru_optimize(u, dims, starts=opts.starts, seed=opts.seed)
    return float(val) ** 2, "optimizer"


def _target_gate(channel: Channel, opts: PipelineOptions, command: str):
    """Reference unitary for witness construction, defaulting to the channel itself."""
    if opts.target_spec is None:
        return _single_unitary(channel, command), channel, opts.channel_name
    target = parse_channel_spec(opts.target_spec, require_tp=False)
    if target.dims != channel.dims:
        raise SpecError(
            f"target dims {list(target.dims)} do not match channel dims {list(channel.dims)}"
        )
    name = opts.target_spec.get("name") if opts.target_spec.get("kind") == "named" else None
    return _single_unitary(target, f"{command} target"), target, name


def _estimate_payload(ch: Channel, w: Witness, opts: PipelineOptions) -> dict | None:
    if not opts.shots:
        return None
    est = estimate_witness(ch, w, opts.shots, opts.seed)
    return {
        "value": est.value,
        "std_error": est.std_error,
        "shots_per_setting": est.shots_per_setting,
        "seed": est.seed,
    }


def _run_choi(channel: Channel, opts: PipelineOptions) -> dict:
    choi = channel.choi
    eigs = np.linalg.eigvalsh(choi.matrix)
    return {
        "source_dims": list(choi.source_dims),
        "choi_dims": list(choi.dims),
        "trace": float(np.trace(choi.matrix).real),
        "eigenvalues": [float(x) for x in eigs],
        "matrix": matrix_to_pairs(choi.matrix),
    }


def _run_schmidt(channel: Channel, opts: PipelineOptions) -> dict:
    if len(channel.dims) != 2:
        raise SpecError(f"schmidt needs a bipartite channel, got dims {list(channel.dims)}")
    op = _single_operator(channel, "schmidt")
    sd = operator_schmidt(op, channel.dims[0], channel.dims[1])
    return {
        "sigmas": [float(s) for s in sd.sigmas],
        "rank": sd.rank,
        "sum_sigma_sq": float(np.sum(sd.sigmas**2)),
        "alpha_s": float(sd.sigmas[0]),
        "a_factors": [matrix_to_pairs(a) for a in sd.a_factors],
        "b_factors": [matrix_to_pairs(b) for b in sd.b_factors],
    }


def _witness_terms_payload(w: Witness) -> dict:
    terms = pauli_decompose(w.operator)
    settings = group_settings(terms)
    return {
        "terms": [{"string": t.string, "coefficient": t.coefficient} for t in terms],
        "settings": [
            {"bases": s.bases, "covered_terms": list(s.covered_terms)} for s in settings
        ],
        "setting_count": len(settings),
    }


def _build_witness(channel: Channel, kind: str, opts: PipelineOptions):
    """Witness of the requested kind plus a payload describing its provenance."""
    if kind == "eb":
        _require_dims(channel, [(2,)], "the eb witness")
        return eb_witness(), {"witness": "eb"}
    if kind == "sru":
        _require_dims(channel, [(2, 2)], "witness decomposition")
        u, _, name = _target_gate(channel, opts, "witness construction")
        alpha_sq, source = _resolve_alpha_sq(u, channel.dims, name, opts)
        w = build_sru_witness(u, channel.dims, alpha_sq)
        return w, {
            "witness": "sru",
            "alpha_sru_sq": w.alpha_sru_sq,
            "alpha_s_sq": w.alpha_s_sq,
            "alpha_source": source,
        }
    if kind == "stabilizer":
        _require_dims(channel, [(2, 2)], "the stabilizer witness")
        if opts.channel_name != "cnot":
            raise SpecError("the stabilizer witness is defined only for the named cnot gate")
        w = stabilizer_witness(CNOT_STABILIZER_GENERATORS)
        return w, {"witness": "stabilizer", "generators": list(CNOT_STABILIZER_GENERATORS)}
    raise SpecError(f"unknown witness kind {kind!r}")


def _run_decompose_witness(channel: Channel, opts: PipelineOptions) -> dict:
    kind = opts.witness or ("eb" if channel.dims == (2,) else "sru")
    w, payload = _build_witness(channel, kind, opts)
    payload.update(_witness_terms_payload(w))
    return payload


def _run_detect_eb(channel: Channel, opts: PipelineOptions) -> dict:
    _require_dims(channel, [(2,)], "detect-eb")
    w = eb_witness()
    value = evaluate_witness(w, channel)
    bounds = robustness_bounds(value, w)
    results = {
        "expectation": value,
        "threshold": 0.0,
        "verdict": "not_entanglement_breaking" if value < 0 else "undetected",
        "bounds": {
            "c": bounds.c,
            "w_max": bounds.w_max,
            "robustness_lb": bounds.robustness_lb,
            "mu_c_lb": bounds.mu_c_lb,
        },
    }
    est = _estimate_payload(channel, w, opts)
    if est is not None:
        results["estimate"] = est
    return results


def _run_detect_sru(channel: Channel, opts: PipelineOptions, with_schmidt: bool = False) -> dict:
    _require_dims(channel, [(2, 2), (3, 3)], "detect-sru")
    u, _, name = _target_gate(channel, opts, "detect-sru")
    alpha_sq, source = _resolve_alpha_sq(u, channel.dims, name, opts)
    w = build_sru_witness(u, channel.dims, alpha_sq)
    value = evaluate_witness(w, channel)
    verdict = classify_violation(value, w)
    results = {
        "alpha_sru": float(np.sqrt(w.alpha_sru_sq)),
        "alpha_sru_sq": w.alpha_sru_sq,
        "alpha_s": float(np.sqrt(w.alpha_s_sq)),
        "alpha_s_sq": w.alpha_s_sq,
        "alpha_source": source,
        "expectation": value,
        "thresholds": {
            "not_sru": 0.0,
            "not_separable": w.alpha_sru_sq - w.alpha_s_sq,
        },
        "verdict": verdict.value,
    }
    if with_schmidt:
        sd = operator_schmidt(u, channel.dims[0], channel.dims[1])
        results["sigmas"] = [float(s) for s in sd.sigmas]
        results["rank"] = sd.rank
    if opts.shots:
        if channel.dims != (2, 2):
            raise SpecError("shot simulation is available only for qubit systems")
        results["estimate"] = _estimate_payload(channel, w, opts)
    return results


def _run_detect_npt(channel: Channel, opts: PipelineOptions) -> dict:
    if len(channel.dims) != 2 or channel.dims[0] != channel.dims[1]:
        raise SpecError(f"detect-npt needs channel dims [d, d], got {list(channel.dims)}")
    report = detect_npt(channel)
    results = {
        "lambda_minus": report.lambda_minus,
        "noise_p": report.noise_p,
        "unital": report.unital,
        "threshold": report.threshold,
        "expectation": report.expectation,
        "term_transpose": report.term_transpose,
        "term_noise_mt": report.term_noise_mt,
        "term_noise_m": report.term_noise_m,
        "degenerate": report.degenerate,
        "verdict": report.verdict,
        "note": report.note,
    }
    if opts.shots:
        if channel.dims != (2, 2):
            raise SpecError("shot simulation is available only for qubit systems")
        w, _ = ppt_witness(channel)
        comp_choi = superoperator_to_choi(
            compose(channel, spa_transpose(channel.dims[0]).superoperator), channel.dims
        )
        composite = kraus_from_choi(comp_choi, require_tp=True)
        results["estimate"] = _estimate_payload(composite, w, opts)
    return results


def _run_simulate(channel: Channel, opts: PipelineOptions) -> dict:
    shots = opts.shots if opts.shots else 100_000
    sim_opts = PipelineOptions(
        seed=opts.seed,
        shots=shots,
        starts=opts.starts,
        witness=opts.witness,
        target_spec=opts.target_spec,
        channel_name=opts.channel_name,
    )
    kind = opts.witness or ("eb" if channel.dims == (2,) else "sru")
    if kind == "ppt":
        _require_dims(channel, [(2, 2)], "simulate --witness ppt")
        w, _ = ppt_witness(channel)
        comp_choi = superoperator_to_choi(
            compose(channel, spa_transpose(channel.dims[0]).superoperator), channel.dims
        )
        measured = kraus_from_choi(comp_choi, require_tp=True)
        payload = {"witness": "ppt"}
    else:
        w, payload = _build_witness(channel, kind, sim_opts)
        measured = channel
        if any(d != 2 for d in channel.dims):
            raise SpecError("shot simulation is available only for qubit systems")
    exact = float(np.real(np.trace(w.operator @ measured.choi.matrix)))
    settings = group_settings(pauli_decompose(w.operator))
    payload.update(
        {
            "exact": exact,
            "estimate": _estimate_payload(measured, w, sim_opts),
            "setting_count": len(settings),
        }
    )
    return payload


_PIPELINES = {
    "choi": _run_choi,
    "schmidt": _run_schmidt,
    "decompose-witness": _run_decompose_witness,
    "detect-eb": _run_detect_eb,
    "detect-sru": _run_detect_sru,
    "detect-sep": lambda ch, opts: _run_detect_sru(ch, opts, with_schmidt=True),
    "detect-npt": _run_detect_npt,
    "simulate": _run_simulate,
}

_REQUIRE_TP = {
    "choi": False,
    "schmidt": False,
    "decompose-witness": False,
    "detect-eb": True,
    "detect-sru": True,
    "detect-sep": False,
    "detect-npt": True,
    "simulate": True,
}


def run_pipeline(command: str, channel: Channel, options: PipelineOptions) -> Report:
    if command not in _PIPELINES:
        raise SpecError(f"unknown command {command!r}")
    start = time.perf_counter()
    results = _PIPELINES[command](channel, options)
    elapsed = time.perf_counter() - start
    return Report(
        pipeline=command,
        channel_spec={},
        options=options.echo(),
        results=results,
        elapsed_seconds=elapsed,
    )


# ---------------------------------------------------------------------------
# rendering


def report_payload(report: Report) -> dict:
    """JSON-stable payload; timing is deliberately excluded so identical
    inputs render byte-identical reports."""
    return {
        "pipeline": report.pipeline,
        "inputs": {"channel": report.channel_spec, "options": report.options},
        "results": report.results,
    }


def render_report(report: Report, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report_payload(report), indent=2) + "\n"
    if fmt != "text":
        raise SpecError(f"unknown format {fmt!r}")

    def show(val):
        return val if isinstance(val, str) else json.dumps(val)

    lines = [f"pipeline: {report.pipeline}"]
    lines.append(f"channel: {json.dumps(report.channel_spec)}")
    for key, val in report.options.items():
        if val is not None:
            lines.append(f"{key}: {show(val)}")
    lines.append("results:")
    for key, val in report.results.items():
        if isinstance(val, dict):
            lines.append(f"  {key}:")
            for k2, v2 in val.items():
                lines.append(f"    {k2}: {show(v2)}")
        else:
            lines.append(f"  {key}: {show(val)}")
    lines.append(f"elapsed_seconds: {report.elapsed_seconds:.6f}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chandet",
        description="Detect properties of quantum channels via Choi-state witnesses.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--channel", required=True, help="path to a channel-spec JSON file")
        p.add_argument("--shots", type=int, default=None, help="shots per measurement setting")
        p.add_argument("--seed", type=int, default=0, help="base RNG seed")
        p.add_argument("--starts", type=int, default=50, help="multistart count for the overlap optimizer")
        p.add_argument("--format", choices=("json", "text"), default="json")
        if name in ("detect-sru", "detect-sep", "decompose-witness", "simulate"):
            p.add_argument("--target", default=None, help="spec file of the reference unitary gate")
        if name in ("decompose-witness", "simulate"):
            p.add_argument(
                "--witness",
                choices=("eb", "sru", "stabilizer", "ppt") if name == "simulate" else ("eb", "sru", "stabilizer"),
                default=None,
            )
    return parser


def _options_from_args(args, spec: dict) -> PipelineOptions:
    if args.shots is not None and args.shots < 0:
        raise SpecError("--shots must be non-negative")
    if args.seed < 0:
        raise SpecError("--seed must be non-negative")
    if args.starts < 1:
        raise SpecError("--starts must be >= 1")
    target_spec = None
    if getattr(args, "target", None):
        target_spec = _read_spec_file(args.target)
    name = spec.get("name") if isinstance(spec, dict) and spec.get("kind") == "named" else None
    return PipelineOptions(
        seed=args.seed,
        shots=args.shots,
        starts=args.starts,
        witness=getattr(args, "witness", None),
        target_spec=target_spec,
        channel_name=name,
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec = _read_spec_file(args.channel)
        channel = parse_channel_spec(spec, require_tp=_REQUIRE_TP[args.command])
        options = _options_from_args(args, spec)
        report = run_pipeline(args.command, channel, options)
        report.channel_spec = spec
    except SpecError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL_ERROR
    sys.stdout.write(render_report(report, args.format))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
