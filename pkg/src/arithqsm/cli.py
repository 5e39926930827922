"""Command line front end.

Every subcommand prints a ``PASS``/``FAIL`` line (except ``zeta`` and
``fetch``, which only produce data) followed by a CSV body.  Exit codes:
0 pass, 1 fail, 2 input error, 3 undetermined prime under ``--mask strict``,
4 network error, 5 unknown label.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
import tempfile
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

from . import __version__
from .errors import ArithQSMError, InputError, NetworkError, NotEquivalent, UnknownLabel

ENDPOINT_VAR = "ARITHQSM_DB_ENDPOINT"
DEFAULT_ENDPOINT = "https://www.lmfdb.org/api/nf_fields/?label={label}&_format=json"
LABEL_RE = re.compile(r"^\d+\.\d+\.\d+\.\d+$")

MAX_LIMIT = 10**6
MAX_BETA = 50.0
MAX_DISC = 10**4


@dataclass
class RunConfig:
    command: str
    inputs: list[str] = field(default_factory=list)
    limit: int = 1000
    beta: float = 2.0
    modulus: int | None = None
    twist: int | None = None
    mask: str = "auto"
    exclude: tuple[int, ...] = ()
    output: str | None = None
    pretty: bool = False
    threads: int = 1

    def validate(self) -> "RunConfig":
        if not 1 <= self.limit <= MAX_LIMIT:
            raise InputError(f"--limit must be in [1, {MAX_LIMIT}]")
        if not 1.0 < self.beta <= MAX_BETA:
            raise InputError(f"--beta must be in (1, {MAX_BETA:g}]")
        if self.twist is not None and not 1 <= abs(self.twist) <= MAX_DISC:
            raise InputError(f"|D| must be in [1, {MAX_DISC}]")
        if self.modulus is not None and not 1 <= self.modulus <= MAX_DISC:
            raise InputError(f"--mod must be in [1, {MAX_DISC}]")
        if self.threads < 1:
            raise InputError("--threads must be >= 1")
        return self


# ---------------------------------------------------------------------------
# Input helpers


def _resolve(path: str) -> Path:
    """A path on disk, or the name of a shipped data file."""
    p = Path(path)
    if p.exists():
        return p
    shipped = resources.files("arithqsm") / "data" / p.name
    if shipped.is_file():
        return Path(str(shipped))
    raise InputError(f"{path}: no such file")


def _field(path: str):
    from .number_field import load_field

    return load_field(_resolve(path))


def _strict_check(K, cfg: RunConfig) -> None:
    if cfg.mask == "strict":
        from .errors import UndeterminedPrime
        from .qsm import undetermined_primes

        bad = sorted(undetermined_primes(K, cfg.limit) - set(cfg.exclude))
        if bad:
            raise UndeterminedPrime(bad)


def _mask_str(mask) -> str:
    return ",".join(str(p) for p in sorted(mask)) or "none"


# ---------------------------------------------------------------------------
# Output


class Report:
    def __init__(self) -> None:
        self.status: str | None = None
        self.header: list[str] = []
        self.comments: list[str] = []
        self.rows: list[list] = []

    def verdict(self, ok: bool, text: str) -> None:
        self.status = f"{'PASS' if ok else 'FAIL'} {text}"

    def render(self, pretty: bool) -> str:
        out = io.StringIO()
        if self.status:
            out.write(self.status + "\n")
        for c in self.comments:
            out.write(f"# {c}\n")
        table = [self.header] + [[_cell(v) for v in r] for r in self.rows] if self.header else []
        if pretty and table:
            widths = [max(len(r[i]) for r in table) for i in range(len(self.header))]
            for r in table:
                out.write("  ".join(v.rjust(w) for v, w in zip(r, widths)).rstrip() + "\n")
        elif table:
            csv.writer(out, lineterminator="\n").writerows(table)
        return out.getvalue()


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, complex):
        return repr(v.real) if v.imag == 0 else f"{v.real!r}{v.imag:+.17g}j"
    return str(v)


def _atomic_write(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, cfg: RunConfig) -> None:
    if cfg.output:
        _atomic_write(cfg.output, text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Commands


def cmd_zeta(cfg: RunConfig) -> int:
    from .lseries import series_to_csv, zeta_coeffs

    K = _field(cfg.inputs[0])
    z = zeta_coeffs(K, cfg.limit, exclude=cfg.exclude, policy=cfg.mask, threads=cfg.threads)
    text = series_to_csv(z)
    if cfg.pretty:
        rep = Report()
        lines = text.splitlines()
        rep.comments = [lines[0][2:]]
        rep.header = lines[1].split(",")
        rep.rows = [ln.split(",") for ln in lines[2:]]
        text = rep.render(True)
    _emit(text, cfg)
    return 0


def cmd_equiv(cfg: RunConfig) -> int:
    from .lseries import equiv_check

    K, L = _field(cfg.inputs[0]), _field(cfg.inputs[1])
    for F in (K, L):
        _strict_check(F, cfg)
    r = equiv_check(K, L, cfg.limit, exclude=cfg.exclude, threads=cfg.threads)
    rep = Report()
    rep.verdict(r.equal, f"equiv {K.label} {L.label} N={cfg.limit} mask={_mask_str(r.masked)}")
    rep.header = ["quantity", "value"]
    rep.rows = [
        ["field_k", K.label],
        ["field_l", L.label],
        ["limit", cfg.limit],
        ["mask", _mask_str(r.masked)],
        ["compared", r.compared],
        ["first_mismatch", r.first_mismatch],
        ["a_k", r.left],
        ["a_l", r.right],
    ]
    _emit(rep.render(cfg.pretty), cfg)
    return 0 if r.equal else 1


def cmd_twist(cfg: RunConfig) -> int:
    from .lseries import artin_factorization_check, compare_series, kronecker_char, twist_coeffs, zeta_coeffs

    if cfg.twist is None:
        raise InputError("twist needs -d/--twist D")
    D = cfg.twist
    fields = [_field(p) for p in cfg.inputs]
    for F in fields:
        _strict_check(F, cfg)
    rep = Report()
    rep.header = ["check", "field", "compared", "mask", "first_mismatch", "left", "right"]
    if len(fields) == 1:
        # one field: zeta of K(sqrt D) against zeta_K * L_K(chi_D)
        K = fields[0]
        r = artin_factorization_check(K, D, cfg.limit)
        rep.rows.append(["artin", K.label, r.compared, _mask_str(r.masked), r.first_mismatch, r.left, r.right])
    elif len(fields) == 2:
        # two fields: their chi_D-twisted coefficients
        chi = kronecker_char(D)
        K, L = fields
        tk = twist_coeffs(zeta_coeffs(K, cfg.limit, exclude=cfg.exclude), chi)
        tl = twist_coeffs(zeta_coeffs(L, cfg.limit, exclude=cfg.exclude), chi)
        r = compare_series(tk, tl)
        rep.rows.append(["twisted", f"{K.label}|{L.label}", r.compared, _mask_str(r.masked), r.first_mismatch, r.left, r.right])
    else:
        raise InputError("twist takes one field (Artin factorization) or two (twisted comparison)")
    ok = r.equal
    rep.verdict(ok, f"twist D={D} N={cfg.limit}")
    _emit(rep.render(cfg.pretty), cfg)
    return 0 if ok else 1


def cmd_gassmann(cfg: RunConfig, h1: str, h2: str) -> int:
    from .gassmann import gassmann_equivalent, load_group, permutation_character_equal

    G, subs = load_group(_resolve(cfg.inputs[0]))
    for name in (h1, h2):
        if name not in subs:
            raise InputError(f"no subgroup named {name!r}; available: {sorted(subs)}")
    H1, H2 = subs[h1], subs[h2]
    r = gassmann_equivalent(G, H1, H2)
    pc = permutation_character_equal(G, H1, H2) if H1.index == H2.index else False
    rep = Report()
    rep.verdict(r.equivalent, f"gassmann {h1} {h2}: {'equivalent' if r.equivalent else 'not equivalent'}, "
                f"{'conjugate' if r.conjugate else 'non-conjugate'}")
    rep.header = ["quantity", "value"]
    rep.rows = [
        ["group_order", G.order],
        ["classes", len(G.classes)],
        ["index_h1", H1.index],
        ["index_h2", H2.index],
        ["equivalent", r.equivalent],
        ["permutation_character_equal", pc],
        ["conjugate", r.conjugate],
        ["witness_class", r.witness_class],
    ]
    _emit(rep.render(cfg.pretty), cfg)
    return 0 if r.equivalent else 1


def cmd_classgroup(cfg: RunConfig, characters: bool) -> int:
    import numpy as np

    from .arith_core import Poly
    from .class_group import (
        characters_to_csv,
        class_count_table,
        class_group,
        counts_to_csv,
        quadratic_field_poly,
    )
    from .lseries import zeta_coeffs
    from .number_field import new_field

    if cfg.twist is None:
        raise InputError("classgroup needs -d/--twist D")
    cg = class_group(cfg.twist)
    K = new_field(f"Q(sqrt{cfg.twist})", Poly(quadratic_field_poly(cfg.twist)))
    z = zeta_coeffs(K, cfg.limit)
    counts = class_count_table(cg, cfg.limit)
    ok = cg.is_group() and bool(np.array_equal(counts.sum(axis=0)[1:], z.values[1:]))
    body = characters_to_csv(cg, cfg.limit) if characters else counts_to_csv(cg, cfg.limit)
    structure = "x".join(map(str, cg.structure)) or "1"
    status = f"{'PASS' if ok else 'FAIL'} classgroup D={cg.D} h={cg.h} structure={structure}\n"
    forms = "# forms=" + " ".join(map(str, cg.forms)) + "\n"
    if cfg.pretty:
        lines = body.splitlines()
        rep = Report()
        rep.comments = [lines[0][2:]]
        rep.header = lines[1].split(",")
        rep.rows = [ln.split(",") for ln in lines[2:]]
        body = rep.render(True)
    _emit(status + forms + body, cfg)
    return 0 if ok else 1


def cmd_qsm(cfg: RunConfig, gamma: int) -> int:
    from .lseries import kronecker_char, partial_sum, zeta_coeffs
    from .qsm import enumerate_ideals, gibbs_expectation, kms_defect, kms_state_value, mu, mu_star, partition_function, projection, report_csv

    K = _field(cfg.inputs[0])
    q = enumerate_ideals(K, cfg.limit, exclude=cfg.exclude, policy=cfg.mask)
    beta = cfg.beta
    z = zeta_coeffs(K, cfg.limit, exclude=q.mask)
    rows = [("partition_function", partition_function(q, beta), partial_sum(z, beta), None)]
    primes = q.primes()
    if primes:
        p = primes[0]
        exact = float(p.norm) ** -beta
        rows.append((f"gibbs_e_p[{p.norm}]", gibbs_expectation(q, projection(p), beta), exact, None))
        rows.append((f"kms_defect[{p.norm}]", kms_defect(q, mu(p), mu_star(p), beta), 0.0, exact))
    if cfg.twist is not None:
        v = kms_state_value(q, kronecker_char(cfg.twist), gamma, beta)
        rows.append((f"kms_value[chi_{cfg.twist},gamma={gamma}]", v.route_a, v.route_b, None))
    # routes that are computed exactly must agree bit for bit
    ok = rows[0][1] == rows[0][2] and all(a == b for name, a, b, _ in rows if name.startswith("kms_value"))
    head = f"{'PASS' if ok else 'FAIL'} qsm {K.label} N={cfg.limit} beta={beta!r} mask={_mask_str(q.mask)} basis={q.size}\n"
    body = report_csv(rows)
    if cfg.pretty:
        lines = body.splitlines()
        rep = Report()
        rep.header = lines[0].split(",")
        rep.rows = [ln.split(",") for ln in lines[1:]]
        body = rep.render(True)
    _emit(head + body, cfg)
    return 0 if ok else 1


def cmd_count(cfg: RunConfig) -> int:
    from .reciprocity import count_identity_check

    if cfg.modulus is None:
        raise InputError("count needs -m/--mod M")
    K, L = _field(cfg.inputs[0]), _field(cfg.inputs[1])
    for F in (K, L):
        _strict_check(F, cfg)
    r = count_identity_check(K, L, cfg.modulus, cfg.limit, exclude=cfg.exclude)
    rep = Report()
    rep.verdict(r.passed, f"count {K.label} {L.label} m={cfg.modulus} N={cfg.limit} mask={_mask_str(r.mask)}")
    rep.header = ["quantity", "value"]
    rep.rows = [
        ["checked", r.checked],
        ["concentrated", r.concentrated],
        ["first_failure", r.first_failure],
        ["gamma", r.gamma],
        ["b_k", r.left],
        ["b_l", r.right],
    ]
    _emit(rep.render(cfg.pretty), cfg)
    return 0 if r.passed else 1


def cmd_psi(cfg: RunConfig) -> int:
    from .reciprocity import Obstruction, build_psi, matching_to_csv

    K, L = _field(cfg.inputs[0]), _field(cfg.inputs[1])
    for F in (K, L):
        _strict_check(F, cfg)
    psi = build_psi(K, L, cfg.limit, exclude=cfg.exclude)
    if isinstance(psi, Obstruction):
        _emit(f"FAIL psi {K.label} {L.label} N={cfg.limit}: obstruction at p={psi.p} ({psi.detail})\n", cfg)
        return 1
    ok = psi.is_norm_preserving() and psi.is_injective()
    head = f"{'PASS' if ok else 'FAIL'} psi {K.label} {L.label} N={cfg.limit} ideals={len(psi.ideals)}\n"
    _emit(head + matching_to_csv(psi), cfg)
    return 0 if ok else 1


def fetch_field(label: str, *, endpoint: str | None = None, timeout: float = 20.0) -> tuple[dict, str]:
    """Defining polynomial of a database label; returns (field object, URL)."""
    if not LABEL_RE.match(label):
        raise UnknownLabel(f"malformed label {label!r}")
    template = endpoint or os.environ.get(ENDPOINT_VAR) or DEFAULT_ENDPOINT
    url = template.format(label=urllib.parse.quote(label))
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            payload = json.loads(resp.read().decode("utf-8"))
    except urllib.error.HTTPError as exc:
        if exc.code == 404:
            raise UnknownLabel(f"label {label} not found") from exc
        raise NetworkError(f"HTTP {exc.code} from {url}") from exc
    except (urllib.error.URLError, OSError, TimeoutError) as exc:
        raise NetworkError(f"cannot reach {url}: {exc}") from exc
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise NetworkError(f"malformed response from {url}") from exc
    data = payload.get("data") if isinstance(payload, dict) else None
    if not data:
        raise UnknownLabel(f"label {label} not found")
    coeffs = data[0].get("coeffs")
    if not isinstance(coeffs, list) or not all(isinstance(c, int) for c in coeffs) or len(coeffs) < 2:
        raise NetworkError(f"response from {url} has no usable coefficient list")
    return {"label": label, "poly": coeffs}, url


def cmd_fetch(cfg: RunConfig) -> int:
    from .number_field import parse_field

    label = cfg.inputs[0]
    obj, url = fetch_field(label)
    parse_field(obj)  # validate before anything touches the disk
    text = json.dumps(obj) + "\n"
    target = cfg.output or f"{label}.field"
    _atomic_write(target, text)
    sys.stdout.write(f"fetched {label} from {url}\nwrote {target}\n")
    return 0


# ---------------------------------------------------------------------------
# Parser


def _int_list(s: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in s.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--limit", "-N", type=int, default=1000, help="cutoff N (<= 10^6)")
    common.add_argument("--mask", choices=["auto", "strict"], default="auto",
                        help="auto: undetermined primes join the mask; strict: they are an error")
    common.add_argument("--exclude", type=_int_list, default=(), help="extra primes to mask, e.g. 2,3")
    common.add_argument("--output", "-o", help="write the report here instead of stdout")
    common.add_argument("--pretty", action="store_true", help="aligned text instead of CSV")
    common.add_argument("--threads", type=int, default=1)

    ap = argparse.ArgumentParser(prog="arithqsm", description="Arithmetic equivalence and truncated QSM toolkit")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("zeta", parents=[common], help="Dedekind zeta coefficients")
    p.add_argument("field")

    p = sub.add_parser("equiv", parents=[common], help="compare zeta coefficients of two fields")
    p.add_argument("fields", nargs=2)

    p = sub.add_parser("twist", parents=[common], help="Artin factorization and quadratic twists")
    p.add_argument("fields", nargs="+")
    p.add_argument("-d", "--twist", type=int, required=True, help="fundamental discriminant D")

    p = sub.add_parser("gassmann", parents=[common], help="Gassmann criterion on a group file")
    p.add_argument("group")
    p.add_argument("--h1", required=True)
    p.add_argument("--h2", required=True)

    p = sub.add_parser("classgroup", parents=[common], help="class group of an imaginary quadratic field")
    p.add_argument("-d", "--twist", type=int, required=True, help="negative fundamental discriminant D")
    p.add_argument("--characters", action="store_true", help="emit character L-coefficients")

    p = sub.add_parser("qsm", parents=[common], help="partition function, Gibbs and KMS checks")
    p.add_argument("field")
    p.add_argument("--beta", type=float, default=2.0)
    p.add_argument("-d", "--twist", type=int, help="Kronecker character chi_D for the KMS value")
    p.add_argument("--gamma", type=int, default=1, help="Galois coordinate in (Z/|D|)*")

    p = sub.add_parser("count", parents=[common], help="ideal counts split by Frobenius mod m")
    p.add_argument("fields", nargs=2)
    p.add_argument("-m", "--mod", type=int, required=True)

    p = sub.add_parser("psi", parents=[common], help="norm-preserving ideal matching")
    p.add_argument("fields", nargs=2)

    p = sub.add_parser("fetch", help="download a defining polynomial by database label")
    p.add_argument("label")
    p.add_argument("--output", "-o")
    return ap


def _config(ns: argparse.Namespace) -> RunConfig:
    inputs = []
    for key in ("field", "fields", "group", "label"):
        v = getattr(ns, key, None)
        if v is not None:
            inputs.extend(v if isinstance(v, list) else [v])
    return RunConfig(
        command=ns.command,
        inputs=inputs,
        limit=getattr(ns, "limit", 1000),
        beta=getattr(ns, "beta", 2.0),
        modulus=getattr(ns, "mod", None),
        twist=getattr(ns, "twist", None),
        mask=getattr(ns, "mask", "auto"),
        exclude=getattr(ns, "exclude", ()),
        output=getattr(ns, "output", None),
        pretty=getattr(ns, "pretty", False),
        threads=getattr(ns, "threads", 1),
    ).validate()


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config(ns)
        if cfg.command == "zeta":
            return cmd_zeta(cfg)
        if cfg.command == "equiv":
            return cmd_equiv(cfg)
        if cfg.command == "twist":
            return cmd_twist(cfg)
        if cfg.command == "gassmann":
            return cmd_gassmann(cfg, ns.h1, ns.h2)
        if cfg.command == "classgroup":
            return cmd_classgroup(cfg, ns.characters)
        if cfg.command == "qsm":
            return cmd_qsm(cfg, ns.gamma)
        if cfg.command == "count":
            return cmd_count(cfg)
        if cfg.command == "psi":
            return cmd_psi(cfg)
        if cfg.command == "fetch":
            return cmd_fetch(cfg)
    except NotEquivalent as exc:
        print(f"FAIL {exc}", file=sys.stdout)
        return exc.exit_code
    except ArithQSMError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    raise AssertionError(f"unhandled command {ns.command}")


if __name__ == "__main__":
    sys.exit(main())
