"""Batch command-line front end.

Subcommands: wigner, negativity, hvm-compare, hudson, lemma-check,
channel-compose.  Reports are deterministic JSON (no timestamps; fixed
key order) so reruns with the same configuration are byte-identical.
Exit codes: 0 success (a contextuality witness is a finding, not an
error), 2 parse failure, 3 numerical inadequacy (window/cutoff), 4
precondition violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import hvm as hvm_mod
from . import oracle as oracle_mod
from . import states as states_mod
from . import wigner as wigner_mod
from . import weyl as weyl_mod
from .phase_space import (Context, plane_decomposition_vectors,
                          planewise_decomposition_commutes, symplectic_form)
from .states import (GaussianChannel, LeakageError, StateSpec, StateSpecError,
                     apply_gaussian_channel, compose_channels,
                     identity_channel, loss_channel, make_state)
from .wigner import GridSpec, InadequateWindowError, MixedStateError

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_NUMERICAL = 3
EXIT_PRECONDITION = 4

TV_TOLERANCE = 0.02
EVENT_TOLERANCE = 2e-3
CHAR_TOLERANCE = 2e-3

DEFAULT_OBSERVABLES = ((1.0, 0.0), (0.0, 1.0),
                       (1 / np.sqrt(2), 1 / np.sqrt(2)))


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _load_state_spec(text: str) -> StateSpec:
    raw = text
    if not text.lstrip().startswith("{"):
        path = Path(text)
        if not path.exists():
            raise CliError(f"state spec file not found: {text}", EXIT_PARSE)
        raw = path.read_text()
    try:
        return StateSpec.from_json(raw)
    except StateSpecError as exc:
        raise CliError(str(exc), EXIT_PARSE) from exc


def _grid_specs(args, modes: int):
    grid = GridSpec(modes, args.window, args.points)
    char = None
    if args.char_window is not None or args.char_points is not None:
        char = wigner_mod.default_char_spec(
            modes, args.cutoff, halfwidth=args.char_window,
            points=args.char_points)
    return grid, char


def _build_state(args):
    spec = _load_state_spec(args.state)
    if args.cutoff is not None and spec.cutoff is None:
        spec = StateSpec(spec.kind, spec.params, spec.modes, args.cutoff)
    try:
        return spec, make_state(spec)
    except StateSpecError as exc:
        raise CliError(str(exc), EXIT_PARSE) from exc
    except LeakageError as exc:
        raise CliError(str(exc), EXIT_NUMERICAL) from exc


def _state_wigner(state, grid, char):
    try:
        return wigner_mod.state_wigner(state, grid, char)
    except InadequateWindowError as exc:
        raise CliError(str(exc), EXIT_NUMERICAL) from exc


def _write_report(args, name: str, payload: dict) -> Path:
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return path


def cmd_wigner(args) -> int:
    spec, state = _build_state(args)
    grid, char = _grid_specs(args, spec.modes)
    w = _state_wigner(state, grid, char)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    wigner_mod.wigner_to_csv(w, out_dir / "wigner.csv")
    payload = {"command": "wigner", "state": spec.to_dict(),
               **wigner_mod.sidecar_dict(w)}
    path = _write_report(args, "wigner.json", payload)
    print(f"wigner grid written to {out_dir / 'wigner.csv'} "
          f"(sidecar {path})")
    return EXIT_OK


def cmd_negativity(args) -> int:
    spec, state = _build_state(args)
    grid, char = _grid_specs(args, spec.modes)
    w = _state_wigner(state, grid, char)
    payload = {"command": "negativity", "state": spec.to_dict(),
               **wigner_mod.sidecar_dict(w)}
    path = _write_report(args, "negativity.json", payload)
    mn, _ = wigner_mod.min_value(w)
    print(f"min {mn:.6f}, negativity_volume "
          f"{wigner_mod.negativity_volume(w):.6f} -> {path}")
    return EXIT_OK


def _parse_observables(args, modes: int):
    if args.observable:
        out = []
        for text in args.observable:
            try:
                vec = np.array([float(x) for x in text.split(",")])
            except ValueError as exc:
                raise CliError(f"bad observable '{text}'", EXIT_PARSE) from exc
            if vec.size != 2 * modes:
                raise CliError(
                    f"observable '{text}' needs {2 * modes} coefficients",
                    EXIT_PARSE)
            if not np.any(vec):
                raise CliError("observable must be nonzero", EXIT_PRECONDITION)
            out.append(vec)
        return out
    if modes != 1:
        raise CliError("default observables exist only for one mode",
                       EXIT_PARSE)
    return [np.array(z) for z in DEFAULT_OBSERVABLES]


def cmd_hvm_compare(args) -> int:
    spec, state = _build_state(args)
    grid, char = _grid_specs(args, spec.modes)
    observables = _parse_observables(args, spec.modes)
    if args.samples < 1:
        raise CliError("need at least one sample", EXIT_PARSE)
    w = _state_wigner(state, grid, char)
    base = {"command": "hvm-compare", "state": spec.to_dict(),
            "grid": grid.to_dict(), "seed": args.seed, "n": args.samples}
    try:
        model = hvm_mod.build_hvm(w)
    except hvm_mod.NegativityError as err:
        payload = {**base, "status": "contextual", "witness": err.to_dict()}
        path = _write_report(args, "hvm_compare.json", payload)
        print(f"contextual: Wigner minimum {err.min_value:.6f} at "
              f"{err.location} -> {path}")
        return EXIT_OK

    bins = oracle_mod.BinSpec(-args.window, args.window, args.bins)
    window_sets = [
        ("[0, inf)", [(0.0, np.inf)]),
        ("[-1, 1]", [(-1.0, 1.0)]),
    ]
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for idx, zeta in enumerate(observables):
        hvm_dist = hvm_mod.hvm_homodyne_distribution(
            model, zeta, bins, args.samples, args.seed + idx,
            threads=args.threads)
        oracle_dist = oracle_mod.quantum_homodyne_distribution(
            state, zeta, bins)
        oracle_mod.distribution_to_csv(hvm_dist, out_dir / f"hvm_{idx}.csv")
        oracle_mod.distribution_to_csv(oracle_dist,
                                       out_dir / f"oracle_{idx}.csv")
        tv = oracle_mod.tv_distance(hvm_dist, oracle_dist)
        events = []
        for label, intervals in window_sets:
            hv = hvm_mod.hvm_event_probability(model, zeta, intervals)
            qv = oracle_mod.event_probability(state, zeta, intervals)
            events.append({
                "interval": label, "hvm": hv, "oracle": qv,
                "abs_error": abs(hv - qv), "tolerance": EVENT_TOLERANCE,
                "pass": bool(abs(hv - qv) <= EVENT_TOLERANCE)})
        rows.append({
            "state": spec.kind,
            "observable": list(map(float, zeta)),
            "n": args.samples,
            "seed": args.seed + idx,
            "tv_distance": tv,
            "tolerance": TV_TOLERANCE,
            "pass": bool(tv <= TV_TOLERANCE and
                         all(e["pass"] for e in events)),
            "event_checks": events,
        })
    rng = np.random.default_rng(args.seed)
    pts = rng.uniform(-3, 3, size=(10, 2 * spec.modes))
    char_report = hvm_mod.empirical_characteristic_check(
        model, pts, state, tolerance=CHAR_TOLERANCE)
    status_pass = all(r["pass"] for r in rows) and char_report["pass"]
    payload = {**base,
               "status": "noncontextual-model-built",
               "renormalization": model.renormalization,
               "observables": rows,
               "characteristic_check": char_report,
               "pass": bool(status_pass)}
    path = _write_report(args, "hvm_compare.json", payload)
    print(f"noncontextual-model-built: {len(rows)} observables, "
          f"all pass: {status_pass} -> {path}")
    return EXIT_OK


def cmd_hudson(args) -> int:
    spec, state = _build_state(args)
    grid, char = _grid_specs(args, spec.modes)
    try:
        report = wigner_mod.hudson_classify(state, grid, char)
    except MixedStateError as exc:
        raise CliError(str(exc), EXIT_PRECONDITION) from exc
    except InadequateWindowError as exc:
        raise CliError(str(exc), EXIT_NUMERICAL) from exc
    payload = {"command": "hudson", "state": spec.to_dict(),
               **report.to_dict()}
    path = _write_report(args, "hudson.json", payload)
    print(f"{report.classification} (purity {report.purity:.8f}, "
          f"min {report.min_value:.6f}) -> {path}")
    return EXIT_OK


def _lemma_commutation_suite(rng, trials: int) -> dict:
    worst = 0.0
    for _ in range(trials):
        m = int(rng.integers(2, 5))
        i, j = rng.choice(m, size=2, replace=False)
        alpha, beta = rng.uniform(-10, 10, size=2)
        u, v, u2, v2 = plane_decomposition_vectors(alpha, beta, i, j, m)
        checks = (symplectic_form(u + v + u2 + v2, u + v - u2 - v2),
                  symplectic_form(u + v2, v + u2),
                  symplectic_form(u - v2, v - u2))
        worst = max(worst, max(abs(c) for c in checks))
        if not planewise_decomposition_commutes(u, v, u2, v2):
            worst = max(worst, 1.0)
    return {"trials": trials, "max_commutator": worst,
            "tolerance": 1e-12, "pass": bool(worst <= 1e-12)}


def _assignment_linearity_suite(rng, trials: int) -> dict:
    worst = 0.0
    for _ in range(trials):
        m = int(rng.integers(1, 4))
        phi = rng.uniform(-5, 5, size=2 * m)
        z1 = rng.uniform(-5, 5, size=2 * m)
        z2 = rng.uniform(-5, 5, size=2 * m)
        lhs = float((z1 + z2) @ phi)
        rhs = float(z1 @ phi) + float(z2 @ phi)
        worst = max(worst, abs(lhs - rhs))
    return {"trials": trials, "max_deviation": worst,
            "tolerance": 1e-12, "pass": bool(worst <= 1e-12)}


def _multiplicativity_cases(cutoff: int):
    m = 2
    e = np.eye(2 * m)
    ctx_q1 = Context([e[0]])
    ctx_q1q2 = Context([e[0], e[1]])
    ctx_q1p2 = Context([e[0], e[3]])
    singles = [("x", [(1.0, (1,))]), ("x^2", [(1.0, (2,))])]
    pairs = [("x", [(1.0, (1, 0))]), ("x^2", [(1.0, (2, 0))]),
             ("xy", [(1.0, (1, 1))]),
             ("x^2+y^2", [(1.0, (2, 0)), (1.0, (0, 2))]),
             ("xy^2", [(1.0, (1, 2))])]
    cases = []
    for name, terms in singles:
        cases.append((f"{name} on {{q1}}",
                      weyl_mod.PolynomialObservable(ctx_q1, terms)))
    for ctx, label in ((ctx_q1q2, "{q1,q2}"), (ctx_q1p2, "{q1,p2}")):
        for name, terms in pairs:
            cases.append((f"{name} on {label}",
                          weyl_mod.PolynomialObservable(ctx, terms)))
    return cases


def cmd_lemma_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    commutation = _lemma_commutation_suite(rng, 100)
    linearity = _assignment_linearity_suite(rng, 100)
    metaplectic = weyl_mod.metaplectic_covariance_suite(
        rng, trials=20, cutoff=max(args.cutoff, 50))
    cases = []
    for label, obs in _multiplicativity_cases(args.cutoff):
        cases.append(weyl_mod.check_wigner_multiplicativity(
            obs, args.cutoff, case=label))
    n_failed = sum(1 for c in cases
                   if not c["pass"] and not c["truncation_flagged"])
    n_flagged = sum(1 for c in cases if c["truncation_flagged"])
    hard_ok = (commutation["pass"] and linearity["pass"] and
               metaplectic["pass"] and n_failed == 0)
    payload = {
        "command": "lemma-check",
        "cutoff": args.cutoff,
        "commutation_identities": commutation,
        "assignment_linearity": linearity,
        "metaplectic_covariance": metaplectic,
        "multiplicativity": cases,
        "n_flagged": n_flagged,
        "n_failed": n_failed,
        "pass": bool(hard_ok and n_flagged == 0),
    }
    path = _write_report(args, "lemma_check.json", payload)
    print(f"lemma-check: {len(cases)} transform cases, "
          f"{n_failed} failed, {n_flagged} truncation-flagged -> {path}")
    # flagged-only degradation is reported, not failed
    return EXIT_OK if hard_ok else EXIT_NUMERICAL


def _parse_channel(text: str, modes: int) -> GaussianChannel:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"bad channel JSON: {exc}", EXIT_PARSE) from exc
    kind = raw.get("kind", "raw")
    try:
        if kind == "loss":
            return loss_channel(float(raw["eta"]), modes)
        if kind == "identity":
            return identity_channel(modes)
        if kind == "raw":
            return GaussianChannel(np.array(raw["X"], dtype=float),
                                   np.array(raw["Y"], dtype=float),
                                   np.array(raw["d"], dtype=float))
    except (KeyError, ValueError) as exc:
        raise CliError(f"bad channel spec: {exc}", EXIT_PARSE) from exc
    raise CliError(f"unknown channel kind '{kind}'", EXIT_PARSE)


def cmd_channel_compose(args) -> int:
    if len(args.channel) < 2:
        raise CliError("need at least two --channel arguments", EXIT_PARSE)
    channels = [_parse_channel(t, args.modes) for t in args.channel]
    composed = channels[0]
    for ch in channels[1:]:
        composed = compose_channels(composed, ch)
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(args.trials):
        mean = rng.uniform(-2, 2, size=2 * args.modes)
        base = rng.uniform(-0.5, 0.5, size=(2 * args.modes, 2 * args.modes))
        cov = 0.5 * np.eye(2 * args.modes) + base @ base.T
        state = states_mod.GaussianState(mean, cov)
        seq = state
        for ch in channels:
            seq = apply_gaussian_channel(seq, ch)
        direct = apply_gaussian_channel(state, composed)
        worst = max(worst,
                    float(np.max(np.abs(seq.mean - direct.mean))),
                    float(np.max(np.abs(seq.covariance - direct.covariance))))
    payload = {
        "command": "channel-compose",
        "modes": args.modes,
        "composed": {"X": composed.X.tolist(), "Y": composed.Y.tolist(),
                     "d": composed.d.tolist()},
        "trials": args.trials,
        "max_sequential_deviation": worst,
        "tolerance": 1e-12,
        "pass": bool(worst <= 1e-12),
    }
    path = _write_report(args, "channel_compose.json", payload)
    print(f"channel-compose: max deviation {worst:.3e} -> {path}")
    return EXIT_OK if payload["pass"] else EXIT_NUMERICAL


def _add_common(parser, state_required=True):
    if state_required:
        parser.add_argument("--state", required=True,
                            help="state spec JSON (inline or a file path)")
    parser.add_argument("--window", type=float, default=6.0)
    parser.add_argument("--points", type=int, default=257)
    parser.add_argument("--cutoff", type=int, default=None)
    parser.add_argument("--char-window", type=float, default=None)
    parser.add_argument("--char-points", type=int, default=None)
    parser.add_argument("--seed", type=int, default=12345)
    parser.add_argument("--out", default="out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wignerhvm",
        description="Wigner negativity and hidden-variable comparisons "
                    "for continuous-variable states")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("wigner", help="export a Wigner grid with monotones")
    _add_common(p)
    p.set_defaults(func=cmd_wigner)

    p = sub.add_parser("negativity", help="negativity monotones only")
    _add_common(p)
    p.set_defaults(func=cmd_negativity)

    p = sub.add_parser("hvm-compare",
                       help="build the hidden-variable model and compare "
                            "against the quantum oracle")
    _add_common(p)
    p.add_argument("--observable", action="append", default=None,
                   help="comma-separated quadrature coefficients (repeatable)")
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_hvm_compare)

    p = sub.add_parser("hudson", help="pure-state Gaussianity classification")
    _add_common(p)
    p.set_defaults(func=cmd_hudson)

    p = sub.add_parser("lemma-check",
                       help="transform-multiplicativity, commutation, and "
                            "metaplectic covariance suites")
    p.add_argument("--cutoff", type=int, default=40)
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_lemma_check)

    p = sub.add_parser("channel-compose",
                       help="compose Gaussian channels and verify "
                            "sequential-vs-composed agreement")
    p.add_argument("--channel", action="append", default=[],
                   help="channel JSON (repeatable, applied left to right)")
    p.add_argument("--modes", type=int, default=1)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_channel_compose)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code not in (0,) else 0
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (InadequateWindowError, LeakageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except MixedStateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except StateSpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
