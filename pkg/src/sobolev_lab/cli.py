"""Command-line client for the lab service.

The CLI builds a request from a config file plus flag overrides and sends
it to the FastAPI service: in-process by default, or to a remote instance
via --server.  Exit codes: 0 all requested checks passed, 2 a check failed
its tolerance, 1 configuration or execution error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .config import COMMANDS, ConfigError, build_request, read_config_file

_BODY_DUMP = dict(sort_keys=True, separators=(",", ":"))


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="key = value config file with [sections]")
    sub.add_argument("--out", help="directory for result artifacts")
    sub.add_argument("--server", help="base URL of a running service (default: in-process)")
    sub.add_argument("--domain", dest="domain", help="domain kind: disk|square|star|ball")
    sub.add_argument("--R", "--radius", dest="radius", type=float, help="disk/ball radius")
    sub.add_argument("--side", type=float, help="square side")
    sub.add_argument("--rho", help="star boundary expression in theta, e.g. '1+0.3*cos(theta)'")
    sub.add_argument("--center", help="domain center 'x,y'")
    sub.add_argument("--samples", type=int, help="boundary sample count")
    sub.add_argument("--dim", type=int, help="ball dimension (radial solves)")
    sub.add_argument("--n", type=int, help="space dimension")
    sub.add_argument("--p", type=float, help="norm exponent p")
    sub.add_argument("--r", type=float, help="gradient exponent r")
    sub.add_argument("--h", type=float, help="target mesh edge length")
    sub.add_argument("--m", type=int, help="radial volume-grid size")
    sub.add_argument("--tolerance", type=float, help="check tolerance override")


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sobolev-lab", description=__doc__)
    sp = ap.add_subparsers(dest="command", required=True)

    s = sp.add_parser("solve", help="eigenvalue and extremal field")
    _add_common(s)
    s.add_argument("--method", choices=["auto", "fem", "radial"])

    s = sp.add_parser("rearrange", help="distribution, rearrangement, Talenti slack")
    _add_common(s)
    s.add_argument("--k", type=int, help="level-grid size")

    s = sp.add_parser("verify", help="reverse-Hoelder inequality battery")
    _add_common(s)
    s.add_argument("--suite", choices=["all", "custom"])

    s = sp.add_parser("derivative", help="Hadamard rate vs finite differences")
    _add_common(s)
    s.add_argument("--law", choices=["uniform", "weighted"])
    s.add_argument("--speed", type=float, help="uniform speed value")
    s.add_argument("--w", help="boundary weight expression in theta")
    s.add_argument("--delta", type=float, help="finite-difference step")
    s.add_argument("--batch-p", help="comma list of p values for CSV batch mode")
    s.add_argument("--batch-w", help="semicolon list of w expressions for batch mode")

    s = sp.add_parser("flow", help="evolve the boundary and monitor the bounds")
    _add_common(s)
    s.add_argument("--law", choices=["uniform", "weighted", "hele_shaw"])
    s.add_argument("--speed", type=float, help="uniform speed value")
    s.add_argument("--w", help="boundary weight expression in theta")
    s.add_argument("--pole", help="Hele-Shaw pole 'x,y'")
    s.add_argument("--dt", type=float)
    s.add_argument("--steps", type=int)
    s.add_argument("--monitor", choices=["thm1", "thm2", "none"])

    s = sp.add_parser("conformal", help="Moebius image monotonicity report")
    _add_common(s)
    s.add_argument("--chain", help="e.g. 'translate:3,0,0; invert'")
    s.add_argument("--t-min", dest="t_min", type=float)
    s.add_argument("--t-max", dest="t_max", type=float)
    s.add_argument("--t-count", dest="t_count", type=int)

    s = sp.add_parser("serve", help="run the HTTP service")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8000)
    return ap


_FLAG_KEYS = (
    "domain radius side rho center samples dim n p r h m tolerance method k suite "
    "law speed w pole delta dt steps monitor chain t_min t_max t_count"
).split()


def _post(command: str, request, server: str | None):
    payload = request.model_dump()
    if server:
        import httpx

        resp = httpx.post(f"{server.rstrip('/')}/{command}", json=payload, timeout=600.0)
    else:
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DeprecationWarning)
            from fastapi.testclient import TestClient

        from .service.app import app

        with TestClient(app) as client:
            resp = client.post(f"/{command}", json=payload)
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except Exception:
            detail = resp.text
        raise RuntimeError(f"{command} failed ({resp.status_code}): {detail}")
    return resp.json()


def _write_artifacts(command: str, result: dict, out: str) -> None:
    os.makedirs(out, exist_ok=True)
    body = result["body"]
    with open(os.path.join(out, "result.json"), "w") as f:
        json.dump({"header": result["header"], "body": body}, f, sort_keys=True, indent=1)
    with open(os.path.join(out, "body.json"), "w") as f:
        f.write(json.dumps(body, **_BODY_DUMP))

    if command == "solve":
        if body.get("method") == "radial":
            prof = body["profile"]
            cfg = result["header"]["config"]["exponents"]
            with open(os.path.join(out, "profile.txt"), "w") as f:
                f.write(f"# {cfg['n']} {cfg['p']} {cfg['r']} {body['R']} {body['C']!r}\n")
                for v, ps in zip(prof["v"], prof["psi_star"]):
                    f.write(f"{v!r} {ps!r}\n")
        else:
            with open(os.path.join(out, "mesh.txt"), "w") as f:
                f.write(body["mesh_text"])
            with open(os.path.join(out, "field.txt"), "w") as f:
                f.write("# nodal values, mesh in mesh.txt\n")
                f.writelines(f"{v!r}\n" for v in body["values"])
            with open(os.path.join(out, "summary.json"), "w") as f:
                f.write(json.dumps(body["summary"], **_BODY_DUMP))
    elif command == "rearrange":
        prof = body["profile"]
        with open(os.path.join(out, "distribution.txt"), "w") as f:
            f.write("# t mu\n")
            for t, mu in zip(prof["t"], prof["mu"]):
                f.write(f"{t!r} {mu!r}\n")
        with open(os.path.join(out, "rearrangement.txt"), "w") as f:
            f.write("# v phi_star\n")
            for v, ps in zip(prof["v"], prof["phi_star"]):
                f.write(f"{v!r} {ps!r}\n")
        with open(os.path.join(out, "crossings.json"), "w") as f:
            f.write(json.dumps(body["crossings"], **_BODY_DUMP))
    elif command == "verify":
        with open(os.path.join(out, "reports.jsonl"), "w") as f:
            for rep in body["reports"]:
                f.write(json.dumps(rep, **_BODY_DUMP) + "\n")
        from .inequalities import report_csv_header

        with open(os.path.join(out, "summary.csv"), "w") as f:
            f.write(report_csv_header() + "\n")
            for rep in body["reports"]:
                i = rep["inputs"]
                f.write(
                    ",".join(
                        str(x)
                        for x in (
                            rep["name"], i.get("domain", ""), i.get("n", ""),
                            i.get("p", ""), i.get("r", ""), i.get("q1", ""),
                            i.get("q2", ""), rep["lhs"], rep["rhs"],
                            rep["slack"], rep["equality"],
                        )
                    )
                    + "\n"
                )
    elif command == "derivative":
        with open(os.path.join(out, "variation.json"), "w") as f:
            f.write(json.dumps(body, **_BODY_DUMP))
    elif command == "flow":
        with open(os.path.join(out, "trajectory.csv"), "w") as f:
            f.write("\n".join(body["csv"]) + "\n")
        theta = body.get("theta", [])
        for k, rho in enumerate(body.get("snapshots", [])):
            with open(os.path.join(out, f"boundary_{k:04d}.txt"), "w") as f:
                f.write("# theta rho\n")
                for th, rh in zip(theta, rho):
                    f.write(f"{th!r} {rh!r}\n")
    elif command == "conformal":
        with open(os.path.join(out, "report.csv"), "w") as f:
            f.write("\n".join(body["csv"]) + "\n")


def _run_batch_derivative(args, file_cfg, flags) -> int:
    ps = [float(x) for x in args.batch_p.split(",")] if args.batch_p else [flags.get("p") or 2.0]
    ws = args.batch_w.split(";") if args.batch_w else [flags.get("w") or "0"]
    rows = ["domain,p,w,formula,richardson,mismatch"]
    worst = 0.0
    for p in ps:
        for w in ws:
            f2 = dict(flags, p=p, w=w.strip(), law="weighted")
            request = build_request("derivative", file_cfg, f2)
            result = _post("derivative", request, args.server)
            b = result["body"]
            rows.append(
                f"{request.domain.label()},{p},{w.strip()},"
                f"{b['c_dot_formula']},{b['richardson']},{b['mismatch']}"
            )
            worst = max(worst, b["mismatch"])
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "derivative_batch.csv"), "w") as f:
            f.write("\n".join(rows) + "\n")
    print("\n".join(rows))
    tol = flags.get("tolerance") or 0.03
    return 0 if worst <= float(tol) else 2


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "serve":
        import uvicorn

        from .service.app import app

        uvicorn.run(app, host=args.host, port=args.port)
        return 0

    try:
        file_cfg = read_config_file(args.config) if args.config else {}
        flags = {k: getattr(args, k, None) for k in _FLAG_KEYS}
        if args.command == "derivative" and (args.batch_p or args.batch_w):
            return _run_batch_derivative(args, file_cfg, flags)
        request = build_request(args.command, file_cfg, flags)
        result = _post(args.command, request, args.server)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    body = result["body"]
    passed = bool(body.get("passed", True))
    if args.out:
        _write_artifacts(args.command, result, args.out)
    summary = {
        k: body[k]
        for k in ("C", "passed", "mismatch", "C_strictly_decreasing",
                  "monotone_where_hypothesis")
        if k in body
    }
    print(json.dumps(summary if summary else {"passed": passed}, sort_keys=True))
    return 0 if passed else 2


if __name__ == "__main__":
    sys.exit(main())
