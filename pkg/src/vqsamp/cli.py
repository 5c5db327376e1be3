"""Experiment driver: config-file subcommands with machine-readable reports.

Exit codes: 0 success, 1 runtime failure, 2 configuration error.  Every
randomized subcommand requires a seed, and identical config + seed yields
byte-identical JSON output.
"""

import argparse
import csv
import json
import sys

import numpy as np

from . import protocols
from .blind import (
    blindness_experiment,
    compile_blind,
    otp_qhe,
    run_protocol,
    simulate_pstar,
    transparent_qhe,
)
from .hamiltonian import compile_hamiltonian, ground_spectrum, history_state
from .energy import vgs_accept_prob_analytic, vgs_accept_prob_exact, vgs_accept_rate_mc
from .qpip0 import Abort, Bind, Break, run_qpip0, uniform_bits
from .qpip1 import (
    Honest,
    ProductStates,
    estimate_output_tv,
    prepare_instance,
    qpip1_params,
    run_qpip1,
)
from .qsim import Circuit, Gate, new_basis_state


class ConfigError(ValueError):
    pass


# -- circuit loading ----------------------------------------------------------


def parse_circuit_text(text: str) -> Circuit:
    """One gate per line (`H q`, `T a b c`, `I q`) after `n=`, `m=`, `out=`."""
    n = m = None
    outputs = None
    gates = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line and line.split("=")[0].strip() in ("n", "m", "out"):
            key, value = [p.strip() for p in line.split("=", 1)]
            if key == "n":
                n = int(value)
            elif key == "m":
                m = int(value)
            else:
                outputs = tuple(int(v) for v in value.split(",") if v.strip())
            continue
        parts = line.split()
        kind = parts[0].upper()
        try:
            wires = tuple(int(p) for p in parts[1:])
            gates.append(Gate(kind, wires))
        except ValueError as exc:
            raise ConfigError(f"circuit line {lineno}: {exc}") from exc
    if n is None or m is None or outputs is None:
        raise ConfigError("circuit file needs n=, m=, and out= headers")
    try:
        return Circuit(n, m, tuple(gates), outputs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def circuit_from_config(cfg: dict) -> Circuit:
    if "circuit_file" in cfg:
        with open(cfg["circuit_file"]) as fh:
            return parse_circuit_text(fh.read())
    spec = cfg.get("circuit")
    if not isinstance(spec, dict):
        raise ConfigError("config needs 'circuit' (inline) or 'circuit_file'")
    try:
        gates = tuple(Gate(g[0].upper(), tuple(int(w) for w in g[1:])) for g in spec["gates"])
        return Circuit(
            int(spec["n"]), int(spec["m"]), gates, tuple(int(w) for w in spec["outputs"])
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad inline circuit: {exc}") from exc


# -- config validation ---------------------------------------------------------

_COMMON_KEYS = {"circuit", "circuit_file", "x", "seed", "trials", "trace_csv"}
_ALLOWED = {
    "compile": _COMMON_KEYS | {"epsilon", "padding", "weight_mode"},
    "spectrum": _COMMON_KEYS | {"epsilon", "padding", "weight_mode", "method", "k"},
    "vgs": _COMMON_KEYS | {"epsilon", "padding", "state"},
    "qpip1": _COMMON_KEYS | {"epsilon", "scale_mode", "overrides", "strategy", "lambda_sec"},
    "qpip0": _COMMON_KEYS | {"epsilon", "padding", "copies", "strategies"},
    "blind": {"seed", "trials", "protocol", "scheme", "adversary", "mode", "x"},
}
_RANDOMIZED = {"vgs", "qpip1", "qpip0", "blind"}


def validate_config(cmd: str, cfg: dict) -> None:
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(cfg) - _ALLOWED[cmd]
    if unknown:
        raise ConfigError(f"unknown config keys for {cmd}: {sorted(unknown)}")
    if cmd in _RANDOMIZED and "seed" not in cfg:
        raise ConfigError(f"randomized subcommand {cmd!r} requires a seed")
    if cmd != "blind":
        if "x" not in cfg:
            raise ConfigError("config requires the input bitstring 'x'")


def _instance(cfg: dict, circuit: Circuit):
    return prepare_instance(
        circuit,
        cfg["x"],
        epsilon=cfg.get("epsilon"),
        padding_override=cfg.get("padding"),
        weight_mode=cfg.get("weight_mode", "auto"),
    )


# -- subcommands ----------------------------------------------------------------


def cmd_compile(cfg: dict) -> dict:
    circuit = circuit_from_config(cfg)
    report = compile_hamiltonian(
        circuit,
        cfg["x"],
        epsilon=cfg.get("epsilon"),
        padding_override=cfg.get("padding"),
        weight_mode=cfg.get("weight_mode", "auto"),
    )
    return report.to_json_dict()


def cmd_spectrum(cfg: dict) -> dict:
    circuit = circuit_from_config(cfg)
    report = compile_hamiltonian(
        circuit,
        cfg["x"],
        epsilon=cfg.get("epsilon"),
        padding_override=cfg.get("padding"),
        weight_mode=cfg.get("weight_mode", "auto"),
    )
    psi = history_state(report.padded_circuit, cfg["x"])
    spectrum = ground_spectrum(
        report.hamiltonian,
        k=int(cfg.get("k", 4)),
        method=cfg.get("method", "dense"),
        reference=psi,
        components=report.components,
    )
    out = spectrum.to_json_dict()
    out["compile"] = report.to_json_dict()
    return out


def cmd_vgs(cfg: dict) -> dict:
    circuit = circuit_from_config(cfg)
    instance = _instance(cfg, circuit)
    ham = instance.report.hamiltonian
    state_spec = cfg.get("state", "history")
    if state_spec == "history":
        state = instance.hist
    else:
        state = new_basis_state(instance.s, state_spec)
    trials = int(cfg.get("trials", 10000))
    rng = np.random.default_rng(cfg["seed"])
    rate = vgs_accept_rate_mc(ham, state, trials, rng)
    result = {
        "accept_rate_mc": rate,
        "accept_prob_analytic": vgs_accept_prob_analytic(ham, state),
        "trials": trials,
        "seed": cfg["seed"],
    }
    if instance.s <= 12:
        result["accept_prob_exact"] = vgs_accept_prob_exact(ham, state)
    return result


def _qpip1_strategy(cfg: dict, instance) -> object:
    spec = cfg.get("strategy", {"name": "honest"})
    name = spec.get("name", "honest")
    if name == "honest":
        return Honest()
    if name == "one_bad_copy":
        m_copies = cfg.get("overrides", {}).get("M", 32)
        bad = int(spec.get("bad_index", 0))
        states = [instance.hist] * m_copies
        states[bad] = new_basis_state(instance.s, "0" * instance.s)
        return ProductStates(tuple(states))
    raise ConfigError(f"unknown qpip1 strategy {name!r}")


def cmd_qpip1(cfg: dict) -> dict:
    circuit = circuit_from_config(cfg)
    params = qpip1_params(
        circuit.t_gates,
        int(cfg.get("lambda_sec", 1)),
        float(cfg.get("epsilon", 0.5)),
        cfg.get("scale_mode", "desk"),
        overrides=cfg.get("overrides"),
    )
    instance = prepare_instance(circuit, cfg["x"], padding_override=params.padding)
    strategy = _qpip1_strategy(cfg, instance)
    trials = int(cfg.get("trials", 1000))
    rng = np.random.default_rng(cfg["seed"])
    rows = []
    if cfg.get("trace_csv"):
        for trial in range(trials):
            outcome = run_qpip1(strategy, circuit, cfg["x"], params, rng, instance=instance)
            rows.append((trial, outcome.d, outcome.z if outcome.z is not None else ""))
        accepted = [r for r in rows if r[1] == "Acc"]
        counts: dict[str, int] = {}
        for _, _, z in accepted:
            counts[z] = counts.get(z, 0) + 1
        from .qsim import tv_distance

        empirical = {z: c / len(accepted) for z, c in counts.items()} if accepted else {}
        est_dict = {
            "tv_acc_conditional": tv_distance(empirical, instance.ideal) if accepted else 0.0,
            "accept_rate": len(accepted) / trials,
            "ci": float(np.sqrt(np.log(2 / 0.05) / (2 * max(len(accepted), 1)))),
            "trials": trials,
            "n_accepted": len(accepted),
        }
        _write_csv(cfg["trace_csv"], ("trial", "d", "z"), rows)
    else:
        est = estimate_output_tv(
            strategy, circuit, cfg["x"], params, trials, rng, instance=instance
        )
        est_dict = est.to_json_dict()
    return {
        "strategy": cfg.get("strategy", {"name": "honest"}),
        "params": {
            "M": params.M,
            "m": params.m,
            "kappa": params.kappa,
            "padding": params.padding,
            "scale_mode": params.scale_mode,
        },
        "epsilon_pad": instance.epsilon_pad,
        "seed": cfg["seed"],
        **est_dict,
    }


def _qpip0_strategies(tokens: list, instance) -> list:
    out = []
    for token in tokens:
        if token == "bind":
            out.append(Bind(instance.hist))
        elif isinstance(token, str) and token.startswith("break:"):
            out.append(Break(float(token.split(":", 1)[1]), uniform_bits))
        elif token == "abort":
            out.append(Abort())
        else:
            raise ConfigError(f"unknown copy strategy {token!r}")
    return out


def cmd_qpip0(cfg: dict) -> dict:
    circuit = circuit_from_config(cfg)
    copies = int(cfg.get("copies", 4))
    tokens = cfg.get("strategies", ["bind"] * copies)
    if len(tokens) != copies:
        raise ConfigError(f"{len(tokens)} strategies for {copies} copies")
    instance = _instance(cfg, circuit)
    strategies = _qpip0_strategies(tokens, instance)
    trials = int(cfg.get("trials", 1000))
    rng = np.random.default_rng(cfg["seed"])
    accepted = 0
    counts: dict[str, int] = {}
    rows = []
    for trial in range(trials):
        outcome = run_qpip0(
            strategies, circuit, cfg["x"], copies, rng, instance=instance
        )
        if outcome.d == "Acc":
            accepted += 1
            counts[outcome.z] = counts.get(outcome.z, 0) + 1
        rows.append((trial, outcome.d, outcome.z if outcome.z is not None else ""))
    if cfg.get("trace_csv"):
        _write_csv(cfg["trace_csv"], ("trial", "d", "z"), rows)
    from .qsim import tv_distance

    empirical = {z: c / accepted for z, c in counts.items()} if accepted else {}
    return {
        "strategies": tokens,
        "copies": copies,
        "trials": trials,
        "accept_rate": accepted / trials,
        "tv_acc_conditional": tv_distance(empirical, instance.ideal) if accepted else 0.0,
        "epsilon_pad": instance.epsilon_pad,
        "seed": cfg["seed"],
    }


def _blind_protocol(cfg: dict):
    spec = cfg.get("protocol", {"name": "echo", "bits": 4, "rounds": 2})
    name = spec.get("name", "echo")
    if name == "echo":
        return protocols.echo_protocol(int(spec.get("bits", 4)), int(spec.get("rounds", 2)))
    if name == "qpip0":
        circuit = circuit_from_config(spec)
        return protocols.qpip0_protocol(
            circuit, int(spec.get("copies", 3)), int(spec.get("padding", 2))
        )
    raise ConfigError(f"unknown protocol {name!r}")


def _blind_scheme(name: str):
    if name == "transparent":
        return transparent_qhe()
    if name == "otp":
        return otp_qhe()
    if name == "otp-reused":
        return otp_qhe(reuse_pad=True)
    raise ConfigError(f"unknown scheme {name!r}")


def cmd_blind(cfg: dict) -> dict:
    pi = _blind_protocol(cfg)
    scheme = _blind_scheme(cfg.get("scheme", "transparent"))
    mode = cfg.get("mode", "run")
    x = cfg.get("x", "0" * 4)
    seed = cfg["seed"]
    adversary_name = cfg.get("adversary", "honest")
    compiled = compile_blind(pi, scheme)
    if adversary_name not in protocols.ADVERSARIES:
        raise ConfigError(f"unknown adversary {adversary_name!r}")
    adversary = protocols.ADVERSARIES[adversary_name](compiled)
    if mode == "run":
        transcript, output = run_protocol(compiled, x, adversary, seed=seed)
        return {
            "protocol": compiled.name,
            "scheme": scheme.name,
            "adversary": adversary_name,
            "rounds": compiled.rounds,
            "output_hex": output.hex(),
            "transcript": transcript.dump_jsonl().splitlines(),
            "seed": seed,
        }
    if mode == "simulate_check":
        trials = int(cfg.get("trials", 100))
        mismatches = 0
        for i in range(trials):
            _, o_blind = run_protocol(compiled, x, adversary, seed=seed + i)
            sim = simulate_pstar(adversary, pi, scheme)
            _, o_direct = run_protocol(pi, x, sim, seed=seed + i)
            mismatches += int(o_blind != o_direct)
        return {
            "protocol": pi.name,
            "scheme": scheme.name,
            "adversary": adversary_name,
            "trials": trials,
            "mismatches": mismatches,
            "seed": seed,
        }
    if mode == "blindness":
        trials = int(cfg.get("trials", 1000))
        result = blindness_experiment(
            pi,
            scheme,
            adversary,
            x,
            trials,
            seed=seed,
            allow_pad_reuse=scheme.reuses_pads,
        )
        out = result.to_json_dict()
        out.update(
            {"protocol": pi.name, "scheme": scheme.name, "adversary": adversary_name, "seed": seed}
        )
        return out
    raise ConfigError(f"unknown blind mode {mode!r}")


# -- main -----------------------------------------------------------------------

_COMMANDS = {
    "compile": cmd_compile,
    "spectrum": cmd_spectrum,
    "vgs": cmd_vgs,
    "qpip1": cmd_qpip1,
    "qpip0": cmd_qpip0,
    "blind": cmd_blind,
}


def _write_csv(path: str, header: tuple, rows: list) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vqsamp", description="verifiable quantum sampling experiments"
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="JSON config path")
    parser.add_argument("--seed", type=int, help="override config seed")
    parser.add_argument("--trials", type=int, help="override config trials")
    parser.add_argument("--out", help="write the JSON report here instead of stdout")
    parser.add_argument("--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.trials is not None:
        cfg["trials"] = args.trials
    try:
        validate_config(args.command, cfg)
        result = _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure, reported not raised
        if args.verbose:
            raise
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = json.dumps(result, sort_keys=True, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
