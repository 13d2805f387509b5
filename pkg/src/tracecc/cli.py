"""tracecc: traced communication complexity of cellular automata.

Examples:
  tracecc rule info 90
  tracecc survey --n 4 --z zeros --out survey.csv
  tracecc matrix 182 --n 4 --pgm m.pgm
  tracecc cc 90 --n 3 --z 0000
  tracecc protocol tau:right 204 --n 4 --transcript 0101,1100
  tracecc fooling 18 --n 8 --mode legal:0100+0001
  tracecc expansivity g2:90 --tmax 4
  tracecc entropy 170 --width 1 --nmax 8
  tracecc group 90
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .ca_core import Rule, Word, as_letters, elementary, format_rule_table, group2, letters_to_str, parse_rule_table
from .cc_engine import CcMatrix, build_matrix, cc_bounds, fooling_set, index_word
from .classify import classify_rule, nonempty_subsets, onesidedness, spreading_status
from .errors import NotApplicable, ResourceError
from .protocols import applicable_protocols, parse_protocol, run_protocol, verify_protocol
from .subshift import (
    build_wz_fooling,
    detect_expansivity,
    full_shift,
    oddgap_family,
    parse_subshift,
    seeded_words,
)
from .trace_lang import entropy_estimate

SCHEMA = "tracecc-v1"
SURVEY_FIELDS = [
    SCHEMA, "rule", "n", "z", "quiescent", "onesided0", "star_onesided0", "spreading1", "permutivity",
    "stagnating", "distinct_rows", "distinct_cols", "left_bits", "right_bits", "min_one_round",
    "multiround", "fooling_bits", "rank_gf2", "column_right", "tau_right", "column_left", "tau_left",
    "protocols_ok", "protocols_applicable", "notes",
]  # fmt: skip


# ---------------------------------------------------------------- parsing helpers


def parse_rule(spec: str) -> Rule:
    """``90``, ``g2:<spec>`` (2-grouping) or ``file:<path>`` (rule table)."""
    spec = spec.strip()
    if spec.startswith("g2:"):
        return group2(parse_rule(spec[3:]))
    if spec.startswith("file:"):
        return parse_rule_table(Path(spec[5:]).read_text(encoding="utf-8"))
    try:
        number = int(spec)
    except ValueError:
        raise ValueError(f"bad rule spec {spec!r}") from None
    return elementary(number)


def parse_rule_list(text: str | None) -> list[int]:
    if not text:
        return list(range(256))
    out: set[int] = set()
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            a, b = map(int, part.split("-", 1))
            if a > b:
                raise ValueError(f"empty rule range {part!r}")
            out.update(range(a, b + 1))
        else:
            out.add(int(part))
    if any(not 0 <= r < 256 for r in out):
        raise ValueError("elementary rule numbers are 0..255")
    return sorted(out)


def resolve_z(rule: Rule, n: int | None, z: str | None) -> tuple[int, ...]:
    if z is None:
        if n is None:
            raise ValueError("give --n or --z")
        return (0,) * (n + 1)
    letters = as_letters(z)
    if n is not None and len(letters) != n + 1:
        raise ValueError(f"--z must have length n+1 = {n + 1}")
    if any(a >= rule.q for a in letters):
        raise ValueError("z is not a word over the rule's alphabet")
    return letters


def z_words(q: int, n: int, mode: str) -> list[tuple[int, ...]]:
    total = q ** (n + 1)

    def word(k: int) -> tuple[int, ...]:
        return tuple((k // q ** i) % q for i in range(n + 1))

    if mode == "zeros":
        return [(0,) * (n + 1)]
    if mode == "all":
        return [word(k) for k in range(total)]
    if mode.startswith("sample:"):
        _, count, seed = mode.split(":")
        rng = random.Random(int(seed))
        picks = sorted(rng.sample(range(total), min(int(count), total)))
        return [word(k) for k in picks]
    raise ValueError(f"bad z mode {mode!r}")


# ---------------------------------------------------------------- survey


def _cell(x) -> str:
    return "" if x is None else str(x)


def survey_row(rule_number: int, z: tuple[int, ...], protocols: bool = True) -> list[str]:
    rule = elementary(rule_number)
    n = len(z) - 1
    cls = classify_rule(rule).csv_fields()
    row = {
        SCHEMA: "row",
        "rule": str(rule_number),
        "n": str(n),
        "z": letters_to_str(z),
        **{k: cls[k] for k in ("quiescent", "onesided0", "star_onesided0", "spreading1", "permutivity", "stagnating")},
    }
    notes: list[str] = []
    try:
        rep = cc_bounds(rule, z)
        pb = rep.trace_protocol_bounds
        row.update(
            distinct_rows=str(rep.distinct_rows),
            distinct_cols=str(rep.distinct_cols),
            left_bits=str(rep.left_cc_bits),
            right_bits=str(rep.right_cc_bits),
            min_one_round=str(min(rep.left_cc_bits, rep.right_cc_bits)),
            multiround=_cell(rep.multiround_exact_bits),
            fooling_bits=str(rep.fooling_bound_bits),
            rank_gf2=str(rep.rank_gf2),
            column_right=_cell(pb["column_right"]),
            tau_right=_cell(pb["tau_right"]),
            column_left=_cell(pb["column_left"]),
            tau_left=_cell(pb["tau_left"]),
        )
        notes.extend(rep.notes)
    except ResourceError as err:
        notes.append(str(err))
    if protocols:
        ok = total = 0
        for p in applicable_protocols(rule, z):
            try:
                r = verify_protocol(p, rule, z)
            except ResourceError as err:
                notes.append(f"{p.ident}: {err}")
                continue
            total += 1
            ok += r.ok
            if not r.ok:
                notes.append(f"{p.ident} failed")
        row.update(protocols_ok=str(ok), protocols_applicable=str(total))
    row["notes"] = "; ".join(notes)
    return [row.get(k, "") for k in SURVEY_FIELDS]


def _survey_task(args: tuple[int, tuple[int, ...], bool]) -> list[str]:
    return survey_row(*args)


def survey(n: int, z_mode: str, rules: list[int], workers: int = 1, protocols: bool = True) -> list[list[str]]:
    zs = z_words(2, n, z_mode)
    tasks = [(r, z, protocols) for r in rules for z in zs]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_survey_task, tasks, chunksize=4))
    else:
        rows = [_survey_task(t) for t in tasks]
    return rows


def write_csv(rows: list[list[str]], header: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def read_csv(text: str) -> tuple[list[str], list[list[str]]]:
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], rows[1:]


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------- images


def matrix_pgm(m: CcMatrix) -> bytes:
    """P5 image, row 0 (Alice index 0) at the top.  255 where the trace
    matches; for binary rules 0 where the top cell is 1 and 128 where the
    evolution came back to 0, else 0."""
    hat = np.asarray(m.hat, dtype=np.uint8)
    pix = np.where(hat == 0, 255, 0).astype(np.uint8)
    if m.q == 2:
        gray = (hat == 1) & (np.asarray(m.top) == 0)
        pix[gray] = 128
    h, w = pix.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + pix.tobytes()


def render_matrix(m: CcMatrix, path) -> None:
    Path(path).write_bytes(matrix_pgm(m))


# ---------------------------------------------------------------- commands


def cmd_rule(args) -> int:
    rule = parse_rule(args.rule)
    rep = classify_rule(rule)
    out = [f"rule: {rule.label}", f"alphabet: {rule.q}"]
    if rule.number is not None:
        out.append(f"number: {rule.number}")
    out.append(f"quiescent: {' '.join(map(str, rep.quiescent)) or '-'}")
    out.append(f"permutivity: {rep.permutivity}")
    out.append(f"stagnating: {' '.join(letters_to_str(w) for w in rep.stagnating) or '-'}")
    for B in nonempty_subsets(rule.q):
        label = letters_to_str(B)
        out.append(f"onesided[{label}]: {onesidedness(rule, B)}  star: {onesidedness(rule, B, 'star')}")
        if len(B) < rule.q:
            f = spreading_status(rule, B)
            out.append(
                f"spreading[{label}]: left semi-strong={int(f.left_semi_strong)} weak={int(f.left_weak)}"
                f" right semi-strong={int(f.right_semi_strong)} weak={int(f.right_weak)}"
            )
    out.append(f"legal letters: {' '.join(str(a) for a, ok in rep.legal.items() if ok) or '-'}")
    for name, (sem, pat) in rep.patterns.items():
        out.append(f"family {name}: {int(sem)} (pattern {int(pat)})")
    print("\n".join(out))
    return 0


def cmd_survey(args) -> int:
    rows = survey(args.n, args.z, parse_rule_list(args.rules), args.workers, not args.no_protocols)
    text = write_csv(rows, SURVEY_FIELDS)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return 0


def cmd_matrix(args) -> int:
    rule = parse_rule(args.rule)
    z = resolve_z(rule, args.n, args.z)
    m = build_matrix(rule, z, workers=args.workers)
    if args.pgm:
        render_matrix(m, args.pgm)
    if args.dump:
        Path(args.dump).write_bytes(m.to_bytes())
    if not (args.pgm or args.dump):
        for row in m.hat:
            print("".join(map(str, row)))
    return 0


def cmd_cc(args) -> int:
    rule = parse_rule(args.rule)
    z = resolve_z(rule, args.n, args.z)
    sys.stdout.write(dump_json(cc_bounds(rule, z, workers=args.workers).as_dict()))
    return 0


def cmd_protocol(args) -> int:
    rule = parse_rule(args.rule)
    z = resolve_z(rule, args.n, args.z)
    proto = parse_protocol(args.id)
    n = len(z) - 1
    if args.transcript:
        u_text, v_text = args.transcript.split(",")
        t = run_protocol(proto, rule, z, Word.from_str(u_text, -n), Word.from_str(v_text, 1))
        print("\n".join(t.lines()))
        return 0
    rep = verify_protocol(proto, rule, z)
    print(f"{'protocol':<18}{'rule':<10}{'z':<12}{'correct':<9}{'max_bits':<10}{'bound':<7}errors")
    print(
        f"{rep.protocol:<18}{rep.rule:<10}{rep.z:<12}{str(rep.correct):<9}{rep.max_bits:<10}"
        f"{rep.claimed_bound:<7}{rep.errors}"
    )
    if rep.counterexample:
        print(f"counterexample: u={rep.counterexample[0]} v={rep.counterexample[1]}")
    return 0 if rep.ok else 1


def _sigma(path: str | None, rule: Rule):
    if path is None:
        return full_shift(rule.q)
    return parse_subshift(Path(path).read_text(encoding="utf-8"))


def cmd_fooling(args) -> int:
    rule = parse_rule(args.rule)
    z = resolve_z(rule, args.n, args.z)
    n = len(z) - 1
    mode = args.mode
    if mode in ("greedy", "exact"):
        fs = fooling_set(build_matrix(rule, z), mode)
    elif mode == "wz":
        fs = build_wz_fooling(rule, _sigma(args.sigma, rule), z)
    elif mode.startswith("legal:"):
        blocks = mode[6:].split("+")
        size = len(blocks[0])
        if any(len(b) != size for b in blocks) or n % size:
            raise ValueError("legal blocks must share a length dividing n")
        spec = _sigma(args.sigma, rule) if args.sigma else oddgap_family(2 * n + 1)
        fs = build_wz_fooling(rule, spec, z, seed=seeded_words(blocks, n // size))
    else:
        raise ValueError(f"bad mode {mode!r}")
    pairs = [[str(index_word(i, rule.q, n, "left")), str(index_word(j, rule.q, n, "right"))] for i, j in fs.pairs]
    sys.stdout.write(
        dump_json(
            {
                "rule": rule.label,
                "z": letters_to_str(z),
                "mode": mode,
                "size": len(fs),
                "common_value": fs.common_value,
                "bound_bits": fs.bound_bits,
                "pairs": pairs,
            }
        )
    )
    return 0


def cmd_expansivity(args) -> int:
    rule = parse_rule(args.rule)
    spec = _sigma(args.sigma, rule)
    for side in ("right", "left"):
        print(detect_expansivity(rule, spec, side, args.tmax))
    return 0


def cmd_entropy(args) -> int:
    rule = parse_rule(args.rule)
    est = entropy_estimate(rule, args.width, args.nmax)
    text = write_csv(est.csv_rows(rule.label), ["rule", "k", "n", "count", "slope"])
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    print(f"equicontinuity-like: {int(est.equicontinuity_like)}  ceiling: {est.ceiling:.6f}", file=sys.stderr)
    return 0


def cmd_group(args) -> int:
    sys.stdout.write(format_rule_table(group2(parse_rule(args.rule))))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tracecc", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rule", help="classify a rule")
    p.add_argument("action", choices=["info"])
    p.add_argument("rule")
    p.set_defaults(func=cmd_rule)

    p = sub.add_parser("survey", help="sweep elementary rules into a CSV table")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--z", default="zeros", help="zeros | all | sample:K:SEED")
    p.add_argument("--rules", help="e.g. 0-255 or 90,150,30")
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-protocols", action="store_true", help="skip protocol verification")
    p.set_defaults(func=cmd_survey)

    for name, func, help_ in (
        ("matrix", cmd_matrix, "build the f-hat_z matrix"),
        ("cc", cmd_cc, "all CC bounds as JSON"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("rule")
        p.add_argument("--n", type=int)
        p.add_argument("--z")
        p.add_argument("--workers", type=int, default=1)
        if name == "matrix":
            p.add_argument("--pgm")
            p.add_argument("--dump")
        p.set_defaults(func=func)

    p = sub.add_parser("protocol", help="verify a protocol or print one transcript")
    p.add_argument("id")
    p.add_argument("rule")
    p.add_argument("--n", type=int)
    p.add_argument("--z")
    p.add_argument("--transcript", metavar="U,V")
    p.set_defaults(func=cmd_protocol)

    p = sub.add_parser("fooling", help="build and validate a fooling set")
    p.add_argument("rule")
    p.add_argument("--n", type=int)
    p.add_argument("--z")
    p.add_argument("--mode", default="greedy", help="greedy | exact | wz | legal:V (e.g. legal:0100+0001)")
    p.add_argument("--sigma", help="subshift file")
    p.set_defaults(func=cmd_fooling)

    p = sub.add_parser("expansivity", help="least expansivity times")
    p.add_argument("rule")
    p.add_argument("--sigma", help="subshift file")
    p.add_argument("--tmax", type=int, default=4)
    p.set_defaults(func=cmd_expansivity)

    p = sub.add_parser("entropy", help="finite trace-language entropy estimates")
    p.add_argument("rule")
    p.add_argument("--width", type=int, default=1)
    p.add_argument("--nmax", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("group", help="print the 2-grouped rule table")
    p.add_argument("rule")
    p.set_defaults(func=cmd_group)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, NotApplicable, ResourceError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
