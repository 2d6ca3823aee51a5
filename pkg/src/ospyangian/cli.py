"""Command line entry point: ``verify`` runs suites, ``dump-tables`` writes the bracket table."""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .superspace import UnsupportedFamily, make_space

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_REP = 0, 1, 2, 3

DEFAULT_ORDER = ("rmatrix", "engine", "center", "h_relations", "gauss", "drinfeld_extended",
                 "main_theorem", "embedding", "hopf_free", "evalrep")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    N: int
    m: int
    K: int = 3
    suites: list = field(default_factory=lambda: ["all"])
    seed: int = 42
    out: str = "report"
    format: str = "json"
    rep_check: bool = True
    mutation_controls: bool = False
    threads: int = 1

    def resolved_suites(self, space) -> list[str]:
        from .relcheck import SUITES, suite_applicable
        if self.suites == ["all"]:
            names = [s for s in DEFAULT_ORDER if suite_applicable(s, space)]
        else:
            names = list(self.suites)
        unknown = [s for s in names if s not in SUITES]
        if unknown:
            raise ConfigError(f"unknown suite(s): {', '.join(unknown)}")
        if not self.rep_check:
            names = [s for s in names if s != "evalrep"]
        return names

    def as_dict(self) -> dict:
        return {"N": self.N, "m": self.m, "K": self.K, "suites": self.suites, "seed": self.seed,
                "rep_check": self.rep_check, "mutation_controls": self.mutation_controls}


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return text == "on"


def _suite_list(text: str) -> list[str]:
    return [s.strip() for s in text.split(",") if s.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ospyangian", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("verify", "dump-tables"):
        q = sub.add_parser(name)
        q.add_argument("--N", type=int, required=True)
        q.add_argument("--m", type=int, required=True)
        q.add_argument("--K", type=int, default=3)
        q.add_argument("--suites", type=_suite_list, default=["all"])
        q.add_argument("--seed", type=int, default=42)
        q.add_argument("--out", default="report")
        q.add_argument("--format", choices=("json", "markdown"), default="json")
        q.add_argument("--rep-check", type=_on_off, default=True)
        q.add_argument("--mutation-controls", type=_on_off, default=False)
        q.add_argument("--threads", type=int, default=int(os.environ.get("OSPYANGIAN_THREADS", "1")))
    return p


def config_from_args(ns) -> RunConfig:
    if ns.K < 1:
        raise ConfigError("K must be at least 1")
    if ns.threads < 1:
        raise ConfigError("threads must be at least 1")
    make_space(ns.N, ns.m)
    return RunConfig(N=ns.N, m=ns.m, K=ns.K, suites=ns.suites, seed=ns.seed, out=ns.out,
                     format=ns.format, rep_check=ns.rep_check, mutation_controls=ns.mutation_controls,
                     threads=ns.threads)


# ---------------------------------------------------------------------------
# running


def _run_one(args) -> tuple:
    """Run one suite in a fresh model; returns (name, report dict, seconds, error)."""
    from .evalrep import RepValidationError
    from .relcheck import SUITES
    name, N, m, K, seed = args
    space = make_space(N, m)
    t0 = time.perf_counter()
    try:
        rep = SUITES[name](space, K, seed)
    except RepValidationError as exc:
        return name, None, time.perf_counter() - t0, str(exc)
    return name, rep.to_dict(), time.perf_counter() - t0, None


def run(cfg: RunConfig) -> tuple[int, dict, dict]:
    """Run the requested suites; returns (exit code, report document, timings)."""
    from .relcheck import mutation_controls, rep_sign_flip_control
    space = make_space(cfg.N, cfg.m)
    names = cfg.resolved_suites(space)
    jobs = [(n, cfg.N, cfg.m, cfg.K, cfg.seed) for n in names]
    if cfg.threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as ex:
            results = list(ex.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    reports, timings, rep_error = [], {}, None
    for name, rep, secs, err in results:
        timings[name] = secs
        if err is not None:
            rep_error = err
            reports.append({"suite": name, "N": cfg.N, "m": cfg.m, "K": cfg.K, "status": "rep-invalid",
                            "instances_checked": 0, "failures": [{"relation": "relation gate",
                                                                  "indices": [], "residual_terms": [err]}],
                            "millis": None, "stats": {}})
        else:
            reports.append(rep)
    doc = {"config": cfg.as_dict(), "suites": reports}
    code = EXIT_OK
    if any(r["status"] == "fail" for r in reports):
        code = EXIT_FAIL
    if cfg.mutation_controls:
        t0 = time.perf_counter()
        controls = mutation_controls(space, cfg.K, cfg.seed)
        if cfg.rep_check:
            controls.append(rep_sign_flip_control(space, cfg.seed))
        timings["mutation_controls"] = time.perf_counter() - t0
        doc["mutation_controls"] = controls
        if not all(c["detected"] for c in controls):
            code = EXIT_FAIL
    if rep_error is not None and cfg.rep_check:
        code = EXIT_REP
    doc["status"] = {EXIT_OK: "pass", EXIT_FAIL: "fail", EXIT_REP: "rep-invalid"}[code]
    return code, doc, timings


# ---------------------------------------------------------------------------
# output


def _atomic_write(path: str, data: bytes) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    with os.fdopen(fd, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def render_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def render_markdown(doc: dict) -> str:
    cfg = doc["config"]
    lines = [f"# Verification report: N={cfg['N']}, m={cfg['m']}, K={cfg['K']}", "",
             f"Overall status: **{doc['status']}** (seed {cfg['seed']})", "",
             "| suite | status | instances | failures |", "|---|---|---|---|"]
    for r in doc["suites"]:
        lines.append(f"| {r['suite']} | {r['status']} | {r['instances_checked']} | {len(r['failures'])} |")
    for r in doc["suites"]:
        if r["failures"]:
            lines += ["", f"## {r['suite']} failures", ""]
            for f in r["failures"]:
                lines.append(f"- `{f['relation']}` at {f['indices']}")
                lines += [f"    - `{t}`" for t in f["residual_terms"]]
        errata = r.get("stats", {}).get("errata")
        if errata:
            lines += ["", f"## {r['suite']} errata", ""]
            for e in errata:
                lines.append(f"- `{e['relation']}` at {e['indices']}: printed weight {e['printed_weight']} "
                             f"fails, weight {e['holding_weight']} holds")
    if "mutation_controls" in doc:
        lines += ["", "## Negative controls", "", "| mutation | detected | failing suites |", "|---|---|---|"]
        for c in doc["mutation_controls"]:
            lines.append(f"| {c['mutation']} | {c['detected']} | {', '.join(c['failing_suites'])} |")
    return "\n".join(lines) + "\n"


def write_timing_figure(path: str, timings: dict, title: str) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    names = list(timings)
    secs = [timings[n] for n in names]
    fig, ax = plt.subplots(figsize=(7, 0.35 * len(names) + 1.2))
    ax.barh(names, secs, color="0.35")
    ax.invert_yaxis()
    ax.set_xlabel("seconds")
    ax.set_title(title, fontsize=10)
    for side in ("top", "right"):
        ax.spines[side].set_visible(False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def emit(cfg: RunConfig, doc: dict, timings: dict) -> list[str]:
    os.makedirs(cfg.out, exist_ok=True)
    stem = f"verify_N{cfg.N}_m{cfg.m}_K{cfg.K}"
    written = []
    if cfg.format == "json":
        path = os.path.join(cfg.out, stem + ".json")
        _atomic_write(path, render_json(doc).encode())
    else:
        path = os.path.join(cfg.out, stem + ".md")
        _atomic_write(path, render_markdown(doc).encode())
    written.append(path)
    # wall-clock data lives outside the byte-compared report
    tpath = os.path.join(cfg.out, stem + ".timings.json")
    _atomic_write(tpath, (json.dumps({k: round(v, 3) for k, v in timings.items()}, indent=2) + "\n").encode())
    fpath = os.path.join(cfg.out, stem + ".timings.png")
    write_timing_figure(fpath, timings, f"suite runtimes, N={cfg.N} m={cfg.m} K={cfg.K}")
    written += [tpath, fpath]
    return written


def dump_tables(cfg: RunConfig) -> list[str]:
    from .ncseries import Engine, generator_matrix
    from .gauss import build_currents, gauss_decompose
    space = make_space(cfg.N, cfg.m)
    eng = Engine(space)
    lines_cur = []
    if cfg.suites:
        eng.populate_table(cfg.K, both_orders=True)
        g = build_currents(gauss_decompose(space, generator_matrix(eng, cfg.K), cfg.K))
        for label, fam in (("h", dict(enumerate(g.h, 1))), ("e", g.ecur), ("f", g.fcur), ("kappa", g.kappa_cur),
                           ("xi+", g.xi_plus), ("xi-", g.xi_minus)):
            for i in sorted(fam):
                for r, x in enumerate(fam[i].coeffs):
                    if r:
                        lines_cur.append(f"{label}[{i}]({r}) = {eng.fmt(x)}")
    os.makedirs(cfg.out, exist_ok=True)
    stem = f"tables_N{cfg.N}_m{cfg.m}_K{cfg.K}"
    tpath = os.path.join(cfg.out, stem + ".commute.txt")
    _atomic_write(tpath, ("\n".join(eng.table_lines()) + "\n").encode())
    cpath = os.path.join(cfg.out, stem + ".currents.txt")
    _atomic_write(cpath, ("\n".join(lines_cur) + "\n").encode())
    return [tpath, cpath]


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = config_from_args(ns)
        if ns.command == "verify":
            make_space(cfg.N, cfg.m)
            cfg.resolved_suites(make_space(cfg.N, cfg.m))
    except UnsupportedFamily as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"error [config]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if ns.command == "dump-tables":
        for p in dump_tables(cfg):
            print(p)
        return EXIT_OK
    code, doc, timings = run(cfg)
    for p in emit(cfg, doc, timings):
        print(p)
    print(f"status: {doc['status']}")
    return code


if __name__ == "__main__":
    sys.exit(main())
