"""Operator command line: keygen, sign, verify, serve, provision, bench, energy.

Exit codes are part of the contract (automation reads them):

    0  success / signature accepted
    1  operational failure / signature rejected
    2  commitment unavailable (a party is down; not a forgery verdict)
    3  usage error (bad flags, malformed configuration inputs)

``verify`` maps its three-way outcome onto 0/1/2 directly.
"""

from __future__ import annotations

import argparse
import logging
import os
import signal
import sys
from typing import List, Optional

from . import bench as bench_mod
from . import energymodel as em
from . import party_protocol as proto
from . import scheme
from .errors import (
    CommitmentUnavailable,
    CounterError,
    DecodeError,
    Error,
    IntegrityError,
    ParameterError,
)
from .snodbpv import ESEM_PARAMS, ESEM2_PARAMS, SnodParams, load_share, save_share

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_UNAVAILABLE = 2
EXIT_USAGE = 3

PRESETS = {"esem": ESEM_PARAMS, "esem2": ESEM2_PARAMS}


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the CLI contract reserves 2 for
    # "commitment unavailable", so remap.
    def error(self, message: str) -> None:  # noqa: D401
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="esem", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("keygen", help="generate a keypair and its party shares")
    p.add_argument("--preset", choices=sorted(PRESETS), default="esem")
    p.add_argument("--params", metavar="V,N,L", help="custom parameters overriding the preset")
    p.add_argument("--key", default="esem.key", help="signing key output path")
    p.add_argument("--pubkey", default="esem.pub", help="public key output path")
    p.add_argument("--share-dir", default="shares", help="directory for the party share files")
    p.add_argument("--force", action="store_true", help="overwrite existing output files")

    p = sub.add_parser("sign", help="sign a message (counter persisted before output)")
    p.add_argument("--key", required=True)
    p.add_argument("--message", default="-", help="message file, or - for stdin")
    p.add_argument("--out", help="signature output path (default: raw bytes to stdout)")

    p = sub.add_parser("verify", help="verify a signature against the party servers")
    p.add_argument("--pubkey", required=True)
    p.add_argument("--sig", required=True)
    p.add_argument("--message", default="-", help="message file, or - for stdin")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--endpoints", help="host:port,host:port,... (one per party)")
    group.add_argument("--local-shares", help="verify against share files in a directory")
    p.add_argument("--timeout", type=float, default=5.0, help="per-request timeout (s)")
    p.add_argument("--retries", type=int, default=1, help="retries per party after a failure")

    p = sub.add_parser("serve", help="run one party server")
    p.add_argument("--listen", default="127.0.0.1:7700", metavar="HOST:PORT")
    p.add_argument(
        "--share-dir",
        default=os.environ.get("ESEM_SHARE_DIR"),
        help="share directory (or set ESEM_SHARE_DIR)",
    )
    p.add_argument("--io-timeout", type=float, default=10.0, help="per-connection io timeout (s)")

    p = sub.add_parser("provision", help="upload share files to their party servers")
    p.add_argument("--shares", required=True, help="comma-separated share files, in party order")
    p.add_argument("--endpoints", required=True, help="host:port,... aligned with --shares")
    p.add_argument("--timeout", type=float, default=5.0)

    p = sub.add_parser("bench", help="latency benchmark with operation profiles")
    p.add_argument("--preset", choices=sorted(PRESETS), default="esem")
    p.add_argument("--iterations", type=int, default=10_000, help="sign iterations per scheme")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("--figure", help="also render a latency figure (PNG) to this path")
    p.add_argument(
        "--emit-scheme-costs",
        metavar="DIR",
        help="write measured sign times as energy-model scheme profiles",
    )

    p = sub.add_parser("energy", help="per-interval energy report for sensing scenarios")
    p.add_argument("--device", help="device profile file (key=value)")
    p.add_argument("--sensor", action="append", default=[], help="sensor profile file (repeatable)")
    p.add_argument("--scheme", action="append", default=[], help="scheme cost file (repeatable)")
    p.add_argument("--format", choices=("text", "csv"), default="csv")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--figure", help="also render the comparison figure (PNG) to this path")

    return parser


def _parse_params(arg: Optional[str], preset: str) -> SnodParams:
    if arg is None:
        return PRESETS[preset]
    try:
        v, n, l = (int(part) for part in arg.split(","))
        return SnodParams(v=v, n=n, l=l)
    except (ValueError, ParameterError) as exc:
        raise _Usage(f"bad --params: {exc}") from exc


class _Usage(Exception):
    pass


def _read_message(spec: str) -> bytes:
    if spec == "-":
        return sys.stdin.buffer.read()
    try:
        with open(spec, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise _Usage(f"cannot read message: {exc}") from exc


def cmd_keygen(args) -> int:
    params = _parse_params(args.params, args.preset)
    os.makedirs(args.share_dir, exist_ok=True)
    sk, pk, shares = scheme.keygen(params)
    if args.preset == "esem2" and args.params is None:
        scheme.esem2_expand(sk)
    kid = scheme.key_id(pk).hex()
    share_paths = [
        os.path.join(args.share_dir, f"{kid}.party{s.party_index}.share") for s in shares
    ]
    outputs = [args.key, args.pubkey, *share_paths]
    if not args.force:
        existing = [path for path in outputs if os.path.exists(path)]
        if existing:
            print(f"refusing to overwrite {existing[0]} (use --force)", file=sys.stderr)
            return EXIT_FAILURE
    scheme.save_signing_key(sk, args.key)
    scheme.save_public_key(pk, args.pubkey)
    for share, path in zip(shares, share_paths):
        save_share(share, path)
    print(f"key_id {kid}")
    print(f"signing key  {args.key}")
    print(f"public key   {args.pubkey}")
    for path in share_paths:
        print(f"party share  {path}")
    return EXIT_OK


def _crash_after_reserve() -> None:
    # Deterministic crash-injection point for the counter-safety harness:
    # the counter is durably reserved, the signature does not yet exist.
    if os.environ.get("ESEM_CRASH_AFTER_RESERVE") == "1":
        os.kill(os.getpid(), signal.SIGKILL)


def cmd_sign(args) -> int:
    message = _read_message(args.message)
    try:
        signer = scheme.PersistentSigner(args.key, after_reserve=_crash_after_reserve)
    except OSError as exc:
        raise _Usage(f"cannot read key: {exc}") from exc
    try:
        sig = signer.sign(message)
    except CounterError as exc:
        print(f"refusing to sign: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    blob = sig.to_bytes()
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(blob)
    else:
        sys.stdout.buffer.write(blob)
        sys.stdout.buffer.flush()
    return EXIT_OK


def _local_source(directory: str) -> scheme.LocalPartySet:
    try:
        names = sorted(os.listdir(directory))
    except OSError as exc:
        raise _Usage(f"cannot read share directory: {exc}") from exc
    source = scheme.LocalPartySet()
    for name in names:
        if name.endswith(".share"):
            source.add_share(load_share(os.path.join(directory, name)))
    return source


def cmd_verify(args) -> int:
    try:
        pk = scheme.load_public_key(args.pubkey)
    except (OSError, DecodeError) as exc:
        raise _Usage(f"cannot load public key: {exc}") from exc
    try:
        with open(args.sig, "rb") as fh:
            sig = scheme.EsemSignature.from_bytes(fh.read())
    except OSError as exc:
        raise _Usage(f"cannot read signature: {exc}") from exc
    except DecodeError:
        return EXIT_FAILURE  # malformed signature: reject
    message = _read_message(args.message)

    if args.endpoints:
        endpoints = proto.PartyEndpointSet.parse(
            args.endpoints, timeout=args.timeout, retries=args.retries
        )
        if endpoints.party_count != pk.params.l:
            raise _Usage(
                f"need {pk.params.l} endpoints for this key, got {endpoints.party_count}"
            )
        source = proto.RemoteParties(endpoints)
    else:
        source = _local_source(args.local_shares)

    outcome = scheme.verify(message, sig, pk, source)
    print(outcome.value, file=sys.stderr)
    return {
        scheme.VerifyOutcome.ACCEPT: EXIT_OK,
        scheme.VerifyOutcome.REJECT: EXIT_FAILURE,
        scheme.VerifyOutcome.UNAVAILABLE: EXIT_UNAVAILABLE,
    }[outcome]


def cmd_serve(args) -> int:
    if not args.share_dir:
        raise _Usage("serve needs --share-dir or ESEM_SHARE_DIR")
    logging.basicConfig(
        level=logging.INFO, format="%(asctime)s %(name)s %(levelname)s %(message)s"
    )
    host, _, port = args.listen.rpartition(":")
    if not host or not port.isdigit():
        raise _Usage(f"bad --listen {args.listen!r}, expected host:port")
    try:
        store = proto.ShareStore(args.share_dir)
    except (Error, OSError) as exc:
        print(f"refusing to serve: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    try:
        proto.serve_party(store, (host, int(port)))
    except OSError as exc:
        print(f"bind failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def cmd_provision(args) -> int:
    paths = [p for p in args.shares.split(",") if p]
    try:
        shares = [load_share(path) for path in paths]
    except (OSError, Error) as exc:
        raise _Usage(f"cannot load share: {exc}") from exc
    endpoints = proto.PartyEndpointSet.parse(args.endpoints, timeout=args.timeout)
    try:
        proto.provision(shares, endpoints)
    except Error as exc:
        print(f"provision failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    print(f"provisioned {len(shares)} shares")
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.iterations < 1:
        raise _Usage("--iterations must be >= 1")
    rows = bench_mod.run_benchmarks(PRESETS[args.preset], iterations=args.iterations)
    out = bench_mod.format_csv(rows) if args.format == "csv" else bench_mod.format_text(rows)
    sys.stdout.write(out)
    if args.emit_scheme_costs:
        os.makedirs(args.emit_scheme_costs, exist_ok=True)
        for row in rows:
            if row.operation != "sign":
                continue
            path = os.path.join(args.emit_scheme_costs, f"{row.scheme}.profile")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(f"name={row.scheme}\nsign_time={row.median_us / 1e6:.9f}\n")
        print(f"scheme cost profiles written to {args.emit_scheme_costs}", file=sys.stderr)
    if args.figure:
        from .figures import render_bench_figure

        render_bench_figure(rows, args.figure)
        print(f"figure written to {args.figure}", file=sys.stderr)
    return EXIT_OK


def _load_profile(path: str, loader):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise _Usage(f"cannot read profile {path!r}: {exc}") from exc
    try:
        return loader(text, os.path.splitext(os.path.basename(path))[0])
    except TypeError:
        return loader(text)


def cmd_energy(args) -> int:
    device = em.ATMEGA2560
    if args.device:
        device = _load_profile(args.device, lambda text, *_: em.device_profile_from_text(text))
    sensors = [
        _load_profile(path, em.sensor_profile_from_text) for path in args.sensor
    ] or list(em.DEFAULT_SENSORS)
    schemes = [
        _load_profile(path, em.scheme_cost_from_text) for path in args.scheme
    ] or list(em.AVR_SCHEME_COSTS)
    try:
        rows = em.build_rows(device, sensors, schemes)
    except ParameterError as exc:
        raise _Usage(str(exc)) from exc

    if args.format == "csv":
        payload = em.emit_report(rows)
    else:
        lines = [f"{'scheme':10s} {'scenario':10s} {'sign_mJ':>10s} {'fraction':>9s}"]
        for row in rows:
            lines.append(
                f"{row.scheme:10s} {row.scenario:10s} {row.sign_j * 1e3:10.4f} "
                f"{row.fraction * 100:8.2f}%"
            )
        payload = ("\n".join(lines) + "\n").encode()
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(payload)
    else:
        sys.stdout.buffer.write(payload)
    if args.figure:
        from .figures import render_energy_figure

        render_energy_figure(rows, args.figure)
        print(f"figure written to {args.figure}", file=sys.stderr)
    return EXIT_OK


_COMMANDS = {
    "keygen": cmd_keygen,
    "sign": cmd_sign,
    "verify": cmd_verify,
    "serve": cmd_serve,
    "provision": cmd_provision,
    "bench": cmd_bench,
    "energy": cmd_energy,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except _Usage as exc:
        print(f"esem {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParameterError, IntegrityError, DecodeError) as exc:
        print(f"esem {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except CommitmentUnavailable as exc:
        print(f"esem {args.command}: unavailable: {exc}", file=sys.stderr)
        return EXIT_UNAVAILABLE


if __name__ == "__main__":
    sys.exit(main())
