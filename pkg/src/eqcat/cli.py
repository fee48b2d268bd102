"""Command-line front end.

Every command turns its flags into a config dict, runs from that dict
alone and writes JSON (plus figures where asked) into ``--out-dir``
together with a manifest.  ``replay`` reruns a manifest and compares the
bytes.

Exit codes: 0 ok, 2 usage or configuration error, 3 audit violation,
4 verification counterexample or replay mismatch.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import __version__
from .analysis import extract_s, extract_s1, s1_range_member, settled_limits
from .builders import SFunction
from .catalog import ConfigError, build, canonical
from .core import AuditViolation, EqcatError
from .iso import (
    CategoricityCertificate, CertificateRefuted, FinSideInfo, iso_computable, iso_delta2, iso_delta3,
    verify_partial_iso,
)
from .predicates import parse

EXIT_USAGE, EXIT_AUDIT, EXIT_COUNTEREXAMPLE = 2, 3, 4


class Counterexample(Exception):
    def __init__(self, report: dict):
        super().__init__(json.dumps(report))
        self.report = report


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


class Output:
    """Collects the artifacts of one command and writes the manifest last."""

    def __init__(self, out_dir):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.artifacts: dict[str, str] = {}

    def _record(self, name: str) -> Path:
        path = self.dir / name
        self.artifacts[name] = hashlib.sha256(path.read_bytes()).hexdigest()
        return path

    def json(self, name: str, obj) -> Path:
        (self.dir / name).write_text(dumps(obj))
        return self._record(name)

    def lines(self, name: str, rows) -> Path:
        (self.dir / name).write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in rows))
        return self._record(name)

    def figure(self, name: str, render, *args) -> Path:
        render(*args, self.dir / name)
        return self._record(name)

    def manifest(self, command: str, config: dict, name: str = "manifest.json", extra: dict | None = None):
        body = {"tool": "eqcat", "version": __version__, "command": command, "config": config,
                "artifacts": dict(sorted(self.artifacts.items())),
                "determinism": "no randomness; outputs depend only on config and version"}
        body.update(extra or {})
        body["attestation"] = hashlib.sha256(canonical(body).encode()).hexdigest()
        (self.dir / name).write_text(dumps(body))
        return body


def _stages(text) -> list[int]:
    if isinstance(text, list):
        return [int(s) for s in text]
    out = sorted({int(s) for s in str(text).split(",") if s.strip()})
    if not out:
        raise ConfigError("no stages given")
    return out


def load_ref(path) -> dict:
    """Structure config and attestation from a manifest that describes one structure."""
    data = json.loads(Path(path).read_text())
    if "structure" not in data:
        raise ConfigError(f"{path}: manifest does not describe a structure")
    return {"structure": data["structure"], "attestation": data.get("attestation")}


def _read_json_arg(text):
    if text is None:
        return None
    text = str(text)
    if text.lstrip().startswith(("{", "[")):
        return json.loads(text)
    return json.loads(Path(text).read_text())


# ---------------------------------------------------------------------------
# commands: each takes (config, out_dir) and returns an exit code


def cmd_build(config: dict, out_dir) -> int:
    cfg = config["structure"]
    S = build(cfg)
    out = Output(out_dir)
    stages = _stages(config["stages"])
    S.run_to(stages[-1])
    for s in stages:
        out.json(f"snapshot-{s}.json", S.snapshot(s).to_dict())
    out.lines("events.jsonl", [{"stage": st, "kind": kind, **payload}
                               for st, kind, payload in getattr(S, "events", ())])
    out.lines("character.jsonl", [S.character_at_stage(s).to_dict() for s in stages])
    out.manifest("build", config, extra={"structure": cfg})
    return 0


def cmd_character(config: dict, out_dir) -> int:
    S = build(config["a"]["structure"])
    out = Output(out_dir)
    trace = []
    for s in _stages(config["stages"]):
        ch = S.character_at_stage(s)
        row = ch.to_dict()
        row["infinite"] = S.infinite_count(s)
        trace.append(row)
    out.lines("character.jsonl", trace)
    out.manifest("character", config)
    return 0


def cmd_report(config: dict, out_dir) -> int:
    from . import report

    S = build(config["a"]["structure"])
    out = Output(out_dir)
    stages = _stages(config["stages"])
    trace = [S.character_at_stage(s) for s in stages]
    last = stages[-1]
    settle = config.get("settle")
    created_by = last - settle if settle else None
    out.json("report.json", {
        "stages": stages,
        "character": [c.to_dict() for c in trace],
        "infinite": [S.infinite_count(s) for s in stages],
        "finite_sizes": sorted(S.finite_sizes(last, created_by)),
    })
    out.figure("character.png", report.character_figure, trace)
    out.figure("sizes.png", report.size_histogram, S, last)
    out.manifest("report", config)
    return 0


def _iso(config: dict):
    A = build(config["a"]["structure"])
    B = build(config["b"]["structure"])
    level, budget, frontier = config["level"], int(config["budget"]), int(config["frontier"])
    if level == "computable":
        if not config.get("cert_a") or not config.get("cert_b"):
            raise ConfigError("the computable engine needs --cert-a and --cert-b")
        ca = CategoricityCertificate.from_dict(config["cert_a"])
        cb = CategoricityCertificate.from_dict(config["cert_b"])
        return A, B, iso_computable(A, B, ca, cb, budget, frontier)
    if level == "delta2":
        fin = None
        if config.get("fin_a") and config.get("fin_b"):
            fa, fb = parse(config["fin_a"], ("x",)), parse(config["fin_b"], ("x",))
            fin = (FinSideInfo(lambda x: fa(x)), FinSideInfo(lambda x: fb(x)))
        return A, B, iso_delta2(A, B, budget, boundK=config.get("bound"), fin=fin, frontier=frontier,
                                hold=int(config.get("hold", 1)))
    if level == "delta3":
        return A, B, iso_delta3(A, B, budget, frontier=frontier)
    raise ConfigError(f"unknown level {level!r}")


def cmd_iso(config: dict, out_dir) -> int:
    A, B, approx = _iso(config)
    out = Output(out_dir)
    budget = approx.budget
    stable = approx.stabilized()
    h = approx.map_at(budget)
    out.json("iso.json", approx.to_dict())
    out.json("map.json", {"pairs": [[a, h[a]] for a in sorted(stable)], "stabilized": len(stable),
                          "frontier": approx.frontier})
    if config.get("figures"):
        from . import report

        out.figure("stabilization.png", report.stabilization_figure, approx)
    out.manifest("iso", config)
    return 0


def read_map(obj) -> dict:
    pairs = obj["pairs"] if isinstance(obj, dict) else obj
    h = {}
    for p in pairs:
        h[int(p[0])] = int(p[1])
    return h


def cmd_verify(config: dict, out_dir) -> int:
    A = build(config["a"]["structure"])
    B = build(config["b"]["structure"])
    h = read_map(config["map"])
    ok, witness = verify_partial_iso(A, B, h, int(config["frontier"]))
    out = Output(out_dir)
    out.json("verify.json", {"ok": ok, "frontier": int(config["frontier"]), "counterexample": witness})
    out.manifest("verify", config)
    if not ok:
        raise Counterexample(witness)
    return 0


def cmd_diag(config: dict, out_dir) -> int:
    from .catalog import _diag

    cfg = {"kind": "diag", "f": config["f"], "pred": config["pred"], "opponents": config["opponents"]}
    pair = _diag(cfg)
    budget = int(config["budget"])
    pair.run_to(budget)
    statuses = [pair.requirement_status(e, budget) for e in range(len(pair.opponents))]
    out = Output(out_dir)
    out.json("diag.json", {"budget": budget, "requirements": statuses, "log": pair.requirement_log,
                           "characters": {side: getattr(pair, side).character_at_stage(budget).to_dict()
                                          for side in ("B1", "B2")}})
    for side in ("B1", "B2"):
        sub = Output(out.dir)
        sub.manifest("build", {"structure": dict(cfg, side=side), "stages": [budget]},
                     name=f"{side}.manifest.json", extra={"structure": dict(cfg, side=side)})
    if config.get("figures"):
        from . import report

        out.figure("diag.png", report.diag_figure, statuses)
    out.manifest("diag", config)
    return 0


def cmd_extract(config: dict, out_dir) -> int:
    S = build(config["a"]["structure"])
    budget, count = int(config["budget"]), int(config["count"])
    out = Output(out_dir)
    if config["mode"] == "s":
        f, reps = extract_s(S, budget, config.get("excise", ()), config.get("auto_threshold"))
        body = {"mode": "s", "representatives": reps.to_dict(),
                "values": [f(i, budget) for i in range(min(count, len(reps.reps)))]}
    else:
        g = extract_s1(S, budget, config.get("stages"))
        if hasattr(g, "to_dict"):
            body = {"mode": "s1", **g.to_dict()}
        else:
            last = g.states[-1]
            body = {"mode": "s1", "outcome": "ok", "stages": last.stage, "frontier": last.p,
                    "limits": settled_limits(g, count),
                    "representatives": [g.representative(i, last.stage)
                                        for i in range(min(count, len(last.reps)))]}
    out.json("extract.json", body)
    out.manifest("extract", config)
    return 0


def cmd_range(config: dict, out_dir) -> int:
    f = SFunction.from_dsl(config["f"], "s1")
    budget = int(config["budget"])
    rows = [s1_range_member(f, m, budget) for m in config["m"]]
    out = Output(out_dir)
    out.json("range.json", {"f": config["f"], "results": rows})
    out.manifest("range", config)
    return 0


COMMANDS = {
    "build": cmd_build, "character": cmd_character, "report": cmd_report, "iso": cmd_iso,
    "verify": cmd_verify, "diag": cmd_diag, "extract": cmd_extract, "range": cmd_range,
}


def cmd_replay(manifest_path, out_dir) -> int:
    data = json.loads(Path(manifest_path).read_text())
    command = data["command"]
    if command not in COMMANDS:
        raise ConfigError(f"cannot replay command {command!r}")
    COMMANDS[command](data["config"], out_dir)
    fresh = json.loads((Path(out_dir) / "manifest.json").read_text())
    if fresh["artifacts"] != data["artifacts"] or fresh["attestation"] != data["attestation"]:
        diff = sorted(k for k in set(fresh["artifacts"]) | set(data["artifacts"])
                      if fresh["artifacts"].get(k) != data["artifacts"].get(k))
        raise Counterexample({"kind": "replay-mismatch", "artifacts": diff})
    return 0


# ---------------------------------------------------------------------------
# argument handling


def _pred_arg(args, name="pred"):
    text = getattr(args, name, None)
    path = getattr(args, f"{name}_file", None)
    if text is not None and path is not None:
        raise ConfigError(f"give --{name} or --{name}-file, not both")
    if path is not None:
        text = Path(path).read_text().strip()
    if text is None:
        return None
    spec = _read_json_arg(text) if text.lstrip().startswith("{") else {"dsl": text}
    return spec


def _structure_config(args) -> dict:
    if args.config:
        return _read_json_arg(args.config)
    kind = args.kind
    if kind is None:
        raise ConfigError("give --kind or --config")
    pred = _pred_arg(args)
    cfg: dict = {"kind": kind}
    if kind == "sigma2-inf":
        cfg["pred"] = pred
    elif kind == "bounded":
        cfg["repeat"] = sorted(int(k) for k in args.repeat or [])
        fixed = []
        for item in args.fixed or []:
            size, _, count = item.partition(":")
            fixed.append([int(size), int(count or 1)])
        cfg["fixed"] = fixed
        cfg["infinite"] = args.infinite if args.infinite == "omega" else int(args.infinite or 0)
    elif kind == "from-s":
        cfg.update(f=args.f, r=int(args.r or 0))
    elif kind == "from-s1":
        cfg.update(f=args.f, pred=pred)
    elif kind == "test-class":
        cfg.update(g=args.g, T=args.T)
    elif kind == "blocks":
        cfg["size"] = int(args.size)
    elif kind == "pair-t4":
        base = {"bounded": {"repeat": sorted(int(k) for k in args.repeat or []), "fixed": [],
                            "infinite": args.infinite or 0}} if args.f is None else {"f": args.f, "pred": pred}
        cfg.update(base=base, k1=int(args.k1), k2=args.k2, side=args.side or "D",
                   M={"dsl": args.M} if args.M else None)
    missing = [k for k, v in cfg.items() if v is None and k not in ("M",)]
    if missing:
        raise ConfigError(f"{kind}: missing {', '.join(missing)}")
    return cfg


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--budget", type=int, default=1000, help="stage budget (default 1000)")
    common.add_argument("--out-dir", default="eqcat-out", help="directory for JSON, figures and manifest")
    common.add_argument("--format", choices=["json"], default="json")

    p = argparse.ArgumentParser(prog="eqcat", description="Equivalence structures from stagewise constructions.")
    p.add_argument("--version", action="version", version=f"eqcat {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", parents=[common], help="run a builder and snapshot it")
    b.add_argument("--kind", choices=["identity", "blocks", "sigma2-inf", "bounded", "from-s", "from-s1",
                                      "pair-t4", "test-class"])
    b.add_argument("--config", help="structure config as JSON text or file (any kind, including union and diag)")
    b.add_argument("--pred", help="predicate in the DSL, or a JSON predicate spec")
    b.add_argument("--pred-file")
    b.add_argument("--f", help="s-function in the DSL over i, s")
    b.add_argument("--g", help="limit approximation for test-class")
    b.add_argument("--T", help="test predicate over t")
    b.add_argument("--r", type=int)
    b.add_argument("--size", type=int)
    b.add_argument("--repeat", type=int, action="append")
    b.add_argument("--fixed", action="append", help="size:count, repeatable")
    b.add_argument("--infinite", help="number of infinite classes or 'omega'")
    b.add_argument("--k1", type=int)
    b.add_argument("--k2")
    b.add_argument("--M", help="predicate over x: x is enumerated at stage x")
    b.add_argument("--side", choices=["A", "B", "C", "D", "gadget"])
    b.add_argument("--stages", required=True, help="comma separated stages to snapshot")

    for name, helptext in (("character", "character approximations of a built structure"),
                           ("report", "character trace and figures for a built structure")):
        c = sub.add_parser(name, parents=[common], help=helptext)
        c.add_argument("--structure", required=True, help="manifest of a build")
        c.add_argument("--stages", required=True)
        if name == "report":
            c.add_argument("--settle", type=int, help="only count classes created this many stages before the last")

    i = sub.add_parser("iso", parents=[common], help="run an isomorphism engine")
    i.add_argument("--a", required=True, help="manifest of the first structure")
    i.add_argument("--b", required=True, help="manifest of the second structure")
    i.add_argument("--level", choices=["computable", "delta2", "delta3"], required=True)
    i.add_argument("--frontier", type=int, default=100)
    i.add_argument("--cert-a")
    i.add_argument("--cert-b")
    i.add_argument("--bound", type=int, help="bound K on finite class sizes (delta2)")
    i.add_argument("--fin-a", help="decidable Fin of A as a predicate over x (delta2)")
    i.add_argument("--fin-b")
    i.add_argument("--hold", type=int, default=1)
    i.add_argument("--figures", action="store_true")

    v = sub.add_parser("verify", parents=[common], help="check a finite partial map")
    v.add_argument("--a", required=True)
    v.add_argument("--b", required=True)
    v.add_argument("--map", required=True, help="JSON file with pairs [[a, b], ...]")
    v.add_argument("--frontier", type=int, required=True)

    d = sub.add_parser("diag", parents=[common], help="build a diagonalizing pair")
    d.add_argument("--f", required=True, help="s1-function in the DSL")
    d.add_argument("--pred", help="Sigma2 relation R in the DSL")
    d.add_argument("--pred-file")
    d.add_argument("--opponents", required=True, help="JSON list of opponent specs, inline or a file")
    d.add_argument("--figures", action="store_true")

    e = sub.add_parser("extract", parents=[common], help="read an s- or s1-function off a structure")
    e.add_argument("--structure", required=True)
    e.add_argument("--mode", choices=["s", "s1"], required=True)
    e.add_argument("--count", type=int, default=10)
    e.add_argument("--excise", type=int, action="append", default=[])
    e.add_argument("--auto-threshold", type=int)
    e.add_argument("--stages", type=int, help="s1 stages to run (default: as far as the budget allows)")

    r = sub.add_parser("range", parents=[common], help="test membership in the range of an s1-function")
    r.add_argument("--f", required=True)
    r.add_argument("--m", type=int, action="append", required=True)

    rp = sub.add_parser("replay", parents=[common], help="rerun a manifest and compare outputs")
    rp.add_argument("manifest")
    return p


def config_from_args(args) -> dict:
    c = args.command
    if c == "build":
        return {"structure": _structure_config(args), "stages": _stages(args.stages)}
    if c in ("character", "report"):
        cfg = {"a": load_ref(args.structure), "stages": _stages(args.stages)}
        if c == "report" and args.settle:
            cfg["settle"] = args.settle
        return cfg
    if c == "iso":
        return {"a": load_ref(args.a), "b": load_ref(args.b), "level": args.level, "budget": args.budget,
                "frontier": args.frontier, "cert_a": _read_json_arg(args.cert_a), "cert_b": _read_json_arg(args.cert_b),
                "bound": args.bound, "fin_a": args.fin_a, "fin_b": args.fin_b, "hold": args.hold,
                "figures": args.figures}
    if c == "verify":
        return {"a": load_ref(args.a), "b": load_ref(args.b), "map": _read_json_arg(args.map),
                "frontier": args.frontier}
    if c == "diag":
        pred = _pred_arg(args)
        if pred is None:
            raise ConfigError("diag needs --pred or --pred-file")
        return {"f": args.f, "pred": pred, "opponents": _read_json_arg(args.opponents), "budget": args.budget,
                "figures": args.figures}
    if c == "extract":
        return {"a": load_ref(args.structure), "mode": args.mode, "budget": args.budget, "count": args.count,
                "excise": args.excise, "auto_threshold": args.auto_threshold, "stages": args.stages}
    if c == "range":
        return {"f": args.f, "m": args.m, "budget": args.budget}
    raise ConfigError(f"unknown command {c!r}")


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "replay":
            return cmd_replay(args.manifest, args.out_dir)
        return COMMANDS[args.command](config_from_args(args), args.out_dir)
    except Counterexample as e:
        print(f"eqcat: counterexample: {json.dumps(e.report, sort_keys=True)}", file=sys.stderr)
        return EXIT_COUNTEREXAMPLE
    except (AuditViolation, CertificateRefuted) as e:
        print(f"eqcat: audit violation: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_AUDIT
    except (EqcatError, ValueError, KeyError, TypeError, OSError) as e:
        print(f"eqcat: error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
