"""Command-line frontend, text file formats and the reproduction harness.

File formats (indices in files and on the command line are 1-based):

``bdp 1`` factor chains::

    bdp 1
    gen example4 --seed 7            (optional provenance line)
    factor 1 lower 90 90
    pair 3 0x1.0000000000000p+0 0x1.8000000000000p-2   # 1 0.375
    factor 2 upper 90 50
    ...

A factor's unlisted positions hold the pair ``(1, 0)``.

``bdr 1`` representations::

    bdr 1 <rows> <cols>
    scale <k>                        (optional: the matrix is 2**k times the grid)
    cell <i> <j> <bar> <off>

Unlisted cells hold ``(1, 0)``.  Values are hexadecimal float literals
(decimal numbers and ``p/q`` rationals are accepted on input and rounded
once); everything after ``#`` is a comment.

Exit codes: 0 success, 2 parse or usage errors, 3 numeric or domain
errors, 4 oracle failures.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from fractions import Fraction
from typing import Sequence

import gmpy2
import numpy as np
from gmpy2 import mpfr

from . import generators as gen_mod
from .assembly import assemble_scaled
from .bsvd import ConvergenceError, svd_product
from .deflation import DeflationError, periodic_deflate
from .extraction import extract_submatrix
from .oracle import (OracleError, OracleResult, cached, dense_product, example_reference,
                     rank_modular, reference_svd)
from .representation import (BDRepr, BidiagonalFactor, BidiagonalProduct, DimensionError,
                             DomainError, repr_to_product)


class ParseError(ValueError):
    """Malformed input file or argument."""


# ----------------------------------------------------------------------
# numbers
# ----------------------------------------------------------------------
def parse_number(tok: str) -> float:
    """Hex float, decimal or ``p/q`` rational, rounded once to a double."""
    t = tok.strip()
    try:
        if t.lower().lstrip("+-").startswith("0x"):
            return float.fromhex(t)
        f = Fraction(t)
        return f.numerator / f.denominator
    except (ValueError, ZeroDivisionError, OverflowError):
        raise ParseError(f"not a number: {tok!r}") from None


def _hex(v) -> str:
    return float(v).hex()


def format_sci(v, digits: int = 16) -> str:
    """Scientific notation with ``digits`` significant digits.

    Accepts floats and ``mpfr`` numbers (the latter may lie outside the
    double range).
    """
    if not isinstance(v, type(mpfr(0))):
        v = float(v)
        if v == 0 or not np.isfinite(v):
            return f"{v:.{digits - 1}e}"
        v = mpfr(v)
    if v == 0:
        return f"{0.0:.{digits - 1}e}"
    mant, exp, _ = v.digits(10, digits)
    sign = ""
    if mant.startswith("-"):
        sign, mant = "-", mant[1:]
    e = exp - 1
    return f"{sign}{mant[0]}.{mant[1:]}e{'-' if e < 0 else '+'}{abs(e):02d}"


# ----------------------------------------------------------------------
# file formats
# ----------------------------------------------------------------------
def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line.split()


def serialize_bdp(product: BidiagonalProduct, gen: str | None = None) -> str:
    """Text of a factor chain in the ``bdp 1`` format."""
    out = ["bdp 1"]
    if gen:
        out.append(f"gen {gen}")
    for k, F in enumerate(product.factors, 1):
        out.append(f"factor {k} {F.orientation} {F.nrows} {F.ncols}")
        for i, b, o in zip(F.index, F.bar_values, F.off_values):
            out.append(f"pair {int(i) + 1} {_hex(b)} {_hex(o)}   # {float(b)!r} {float(o)!r}")
    return "\n".join(out) + "\n"


def parse_bdp(text: str) -> tuple[BidiagonalProduct, str | None]:
    """Inverse of :func:`serialize_bdp`; returns the chain and the ``gen`` line."""
    it = iter(_lines(text))
    try:
        no, head = next(it)
    except StopIteration:
        raise ParseError("empty bdp file") from None
    if head != ["bdp", "1"]:
        raise ParseError(f"line {no}: expected header 'bdp 1'")
    gen = None
    factors = []
    cur = None

    def close():
        if cur is not None:
            try:
                factors.append(BidiagonalFactor(cur[0], cur[1], cur[2], cur[3], cur[4], cur[5]))
            except (DimensionError, DomainError) as exc:
                raise ParseError(f"factor {len(factors) + 1}: {exc}") from None

    for no, tok in it:
        kind = tok[0]
        if kind == "gen":
            gen = " ".join(tok[1:])
        elif kind == "factor":
            if len(tok) != 5 or tok[2] not in ("lower", "upper"):
                raise ParseError(f"line {no}: expected 'factor <k> <lower|upper> <rows> <cols>'")
            close()
            try:
                k, rows, cols = int(tok[1]), int(tok[3]), int(tok[4])
            except ValueError:
                raise ParseError(f"line {no}: bad integer") from None
            if k != len(factors) + 1:
                raise ParseError(f"line {no}: factors must be numbered 1, 2, ... in order")
            cur = (tok[2], rows, cols, [], [], [])
        elif kind == "pair":
            if cur is None or len(tok) != 4:
                raise ParseError(f"line {no}: expected 'pair <i> <bar> <off>' inside a factor")
            try:
                i = int(tok[1])
            except ValueError:
                raise ParseError(f"line {no}: bad index") from None
            if i < 1:
                raise ParseError(f"line {no}: indices are 1-based")
            cur[3].append(i - 1)
            cur[4].append(parse_number(tok[2]))
            cur[5].append(parse_number(tok[3]))
        else:
            raise ParseError(f"line {no}: unknown record {kind!r}")
    close()
    if not factors:
        raise ParseError("a bdp file needs at least one factor")
    try:
        return BidiagonalProduct(factors), gen
    except DimensionError as exc:
        raise ParseError(str(exc)) from None


def serialize_bdr(rep: BDRepr, scale: int = 0) -> str:
    """Text of a representation in the ``bdr 1`` format (non-default cells only)."""
    n, m = rep.shape
    out = [f"bdr 1 {n} {m}"]
    if scale:
        out.append(f"scale {int(scale)}")
    for i in range(n):
        for j in range(m):
            b, o = float(rep.bar[i, j]), float(rep.off[i, j])
            if b != 1.0 or o != 0.0:
                out.append(f"cell {i + 1} {j + 1} {_hex(b)} {_hex(o)}   # {b!r} {o!r}")
    return "\n".join(out) + "\n"


def parse_bdr(text: str) -> tuple[BDRepr, int]:
    """Inverse of :func:`serialize_bdr`; returns the grid and the scale exponent.

    The grid is taken verbatim (no gauge normalization), so a round trip is
    bit-identical.
    """
    it = iter(_lines(text))
    try:
        no, head = next(it)
    except StopIteration:
        raise ParseError("empty bdr file") from None
    if len(head) != 4 or head[:2] != ["bdr", "1"]:
        raise ParseError(f"line {no}: expected header 'bdr 1 <rows> <cols>'")
    try:
        n, m = int(head[2]), int(head[3])
    except ValueError:
        raise ParseError(f"line {no}: bad dimensions") from None
    if n < 1 or m < 1:
        raise ParseError(f"line {no}: dimensions must be positive")
    bar = np.ones((n, m))
    off = np.zeros((n, m))
    scale = 0
    for no, tok in it:
        if tok[0] == "scale" and len(tok) == 2:
            try:
                scale = int(tok[1])
            except ValueError:
                raise ParseError(f"line {no}: bad scale") from None
        elif tok[0] == "cell" and len(tok) == 5:
            try:
                i, j = int(tok[1]) - 1, int(tok[2]) - 1
            except ValueError:
                raise ParseError(f"line {no}: bad index") from None
            if not (0 <= i < n and 0 <= j < m):
                raise ParseError(f"line {no}: cell outside the {n}x{m} grid")
            bar[i, j] = parse_number(tok[3])
            off[i, j] = parse_number(tok[4])
        else:
            raise ParseError(f"line {no}: expected 'cell <i> <j> <bar> <off>' or 'scale <k>'")
    if np.any(bar < 0) or np.any(off < 0) or not (np.all(np.isfinite(bar))
                                                   and np.all(np.isfinite(off))):
        raise ParseError("bdr values must be finite and nonnegative")
    k = min(n, m)
    if np.any(bar[np.arange(k), np.arange(k)] != 1):
        raise ParseError("diagonal bar entries must be 1")
    return BDRepr(bar, off, normalize=False, check=False), scale


def parse_index_list(text: str | None) -> list[int]:
    """``"1,3,5-7"`` to the 0-based list ``[0, 2, 4, 5, 6]``."""
    if not text:
        return []
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if "-" in part:
                a, b = (int(s) for s in part.split("-", 1))
                out.extend(range(a, b + 1))
            else:
                out.append(int(part))
        except ValueError:
            raise ParseError(f"bad index list {text!r}") from None
    if any(i < 1 for i in out):
        raise ParseError("indices are 1-based")
    return sorted(set(i - 1 for i in out))


def _rationals(text: str | None) -> list:
    if not text:
        return []
    try:
        return [Fraction(s.strip()) for s in text.split(",") if s.strip()]
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad rational list {text!r}") from None


def _mults(text: str | None):
    if not text:
        return 1
    try:
        vals = [int(s) for s in text.split(",")]
    except ValueError:
        raise ParseError(f"bad multiplicity list {text!r}") from None
    return vals[0] if len(vals) == 1 else vals


# ----------------------------------------------------------------------
# output helpers
# ----------------------------------------------------------------------
def write_output(path: str | None, text: str) -> None:
    """Write ``text`` atomically to ``path`` (``-`` or ``None`` is stdout)."""
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(str(exc)) from None


def _rel(a, b) -> float:
    with gmpy2.context(gmpy2.get_context(), precision=128, emin=-(1 << 30), emax=1 << 30):
        return float(abs(mpfr(a) - b) / b)


def _fmt_err(v: float) -> str:
    return f"{v:.4e}"


def _mpfr_ring():
    return gen_mod.Ring(lambda v: mpfr(v))


FLOAT_RING = gen_mod.Ring(lambda v: float(v))


def chain_reference(product: BidiagonalProduct, key_text: str, bits: int = 256) -> OracleResult:
    """Oracle values of the matrix a chain encodes (cached by the chain text)."""
    def evaluate(ring):
        return dense_product(product, ring)
    import hashlib
    key = "chain:" + hashlib.sha256(key_text.encode()).hexdigest() + ":v1"
    return cached(key, lambda: reference_svd(evaluate, bits, rank=rank_modular(evaluate)))


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------
def cmd_gen(args) -> int:
    name = args.name
    if name in gen_mod.PRESETS:
        kw = {"seed": args.seed} if name == "example4" else {}
        if name == "example4":
            kw.update(nrows=args.rows or 90, ncols=args.cols or 50)
        p = gen_mod.preset(name, **kw)
        prov = name + (f" --seed {args.seed}" if name == "example4" else "")
        text = serialize_bdp(p.submatrix_product, prov)
    elif name == "random":
        rep = gen_mod.random_bd_grid(args.seed, args.rows or 90, args.cols or 50)
        text = serialize_bdp(repr_to_product(rep), f"random --seed {args.seed}")
    elif name in gen_mod.FAMILIES:
        spec = gen_mod.NodeSpec(name, _rationals(args.x), _rationals(args.y),
                                row_mult=_mults(args.row_mult), col_mult=_mults(args.col_mult),
                                l=args.l, ncols=args.ncols)
        text = serialize_bdp(gen_mod.expand_repeated(spec), name)
    else:
        raise ParseError(f"unknown family or preset {name!r}")
    write_output(args.output, text)
    return 0


def cmd_assemble(args) -> int:
    product, _ = parse_bdp(_read(args.chain))
    rep, k = assemble_scaled(product)
    write_output(args.output, serialize_bdr(rep, k))
    return 0


def cmd_extract(args) -> int:
    rep, k = parse_bdr(_read(args.repr))
    rep = BDRepr(rep.bar, rep.off)  # gauge-normalize hand-written grids
    sub = extract_submatrix(rep, parse_index_list(args.drop_rows), parse_index_list(args.drop_cols))
    write_output(args.output, serialize_bdr(sub, k))
    return 0


def cmd_deflate(args) -> int:
    product, _ = parse_bdp(_read(args.chain))
    defl = periodic_deflate(product, accumulate=args.accumulate, strict=args.strict)
    n0, nk = product.shape
    lines = [{"kind": "summary", "rows": n0, "cols": nk, "rank": defl.rank,
              "zeros": min(n0, nk) - defl.rank, "scale": defl.exp2,
              "zero_pivots": defl.zero_pivots, "chases": defl.chases}]
    for i in range(defl.rank):
        d = float(defl.bbar_diag[i])
        rec = {"kind": "bbar", "i": i + 1, "diag": _hex(d), "diag_dec": repr(d)}
        if i < defl.rank - 1:
            e = float(defl.bbar_super[i])
            rec.update(super=_hex(e), super_dec=repr(e))
        lines.append(rec)
    for mv in defl.moves:
        lines.append({"kind": "move", "axis": mv.kind, "index": mv.index + 1})
    if args.accumulate:
        for side, acc in (("G", defl.g_acc), ("V", defl.v_acc)):
            for mv in acc.log:
                if mv[0] == "rot":
                    lines.append({"kind": "rotation", "side": side, "i": mv[1] + 1,
                                  "j": mv[2] + 1, "c": _hex(mv[3]), "s": _hex(mv[4])})
                else:
                    lines.append({"kind": "cycle", "side": side, "i": mv[1] + 1,
                                  "j": mv[2] + 1})
    write_output(args.output, "".join(json.dumps(r) + "\n" for r in lines))
    return 0


def _matrix_tsv(q: np.ndarray) -> str:
    return "".join("\t".join(format_sci(v) for v in row) + "\n" for row in q)


def cmd_svd(args) -> int:
    text = _read(args.chain)
    product, _ = parse_bdp(text)
    res = svd_product(product, want_vectors=args.vectors, strict=args.strict)
    sig = res.sigma_big()
    out = [f"# rows\t{res.shape[0]}", f"# cols\t{res.shape[1]}", f"# rank\t{res.rank}",
           f"# zeros\t{res.zeros}"]
    if args.oracle:
        ref = chain_reference(product, text)
        out.append(f"# oracle_rank\t{ref.rank}")
        out.append("i\tsigma\tsigma_oracle\trel_error")
        for i, s in enumerate(sig):
            r = ref.sigma[i] if i < len(ref.sigma) else None
            out.append(f"{i + 1}\t{format_sci(s)}\t"
                       + (f"{format_sci(r, args.digits)}\t{_fmt_err(_rel(s, r))}" if r is not None
                          else "nan\tnan"))
        if ref.rank != res.rank:
            write_output(args.output, "\n".join(out) + "\n")
            print(f"rank mismatch: algorithm {res.rank}, oracle {ref.rank}", file=sys.stderr)
            return 3
    else:
        out.append("i\tsigma")
        out += [f"{i + 1}\t{format_sci(s)}" for i, s in enumerate(sig)]
    write_output(args.output, "\n".join(out) + "\n")
    if args.vectors and args.output not in (None, "-"):
        write_output(args.output + ".u.tsv", _matrix_tsv(res.u))
        write_output(args.output + ".v.tsv", _matrix_tsv(res.v))
    return 0


def naive_singular_values(problem) -> np.ndarray:
    """Double-precision SVD of the explicitly formed matrix.

    The matrix is formed in floating point from the structured factors;
    problems with a ``root`` use ``svd(root) ** power``.
    """
    if problem.root is not None:
        a1 = np.asarray(problem.root.evaluate(FLOAT_RING), dtype=float)
        return np.linalg.svd(a1, compute_uv=False) ** problem.power
    a = np.asarray(problem.evaluate(FLOAT_RING), dtype=float)
    return np.linalg.svd(a, compute_uv=False)


def repro_table(problem, strict: bool = False) -> tuple[str, dict]:
    """TSV text of a reproduction run and a summary dictionary."""
    t0 = time.perf_counter()
    res = svd_product(problem.submatrix_product, strict=strict)
    t_alg = time.perf_counter() - t0
    ref = example_reference(problem)
    naive = naive_singular_values(problem)
    sig = res.sigma_big()
    out = [f"# {problem.name}", f"# rows\t{res.shape[0]}", f"# cols\t{res.shape[1]}",
           f"# rank\t{res.rank}", f"# zeros\t{res.zeros}", f"# oracle_rank\t{ref.rank}",
           f"# oracle_bits\t{ref.precision}",
           "i\tsigma\trel_error_alg\trel_error_naive"]
    alg_err, naive_err = [], []
    for i in range(min(res.rank, ref.rank)):
        a = _rel(sig[i], ref.sigma[i])
        b = _rel(float(naive[i]), ref.sigma[i]) if i < len(naive) else float("nan")
        alg_err.append(a)
        naive_err.append(b)
        out.append(f"{i + 1}\t{format_sci(sig[i])}\t{_fmt_err(a)}\t{_fmt_err(b)}")
    summary = {"rank": res.rank, "zeros": res.zeros, "oracle_rank": ref.rank,
               "seconds": t_alg, "alg_err": alg_err, "naive_err": naive_err,
               "sigma": sig, "reference": ref}
    return "\n".join(out) + "\n", summary


def cmd_repro(args) -> int:
    kw = {"seed": args.seed} if args.name == "example4" else {}
    problem = gen_mod.preset(args.name, **kw)
    text, summary = repro_table(problem, args.strict)
    write_output(args.output, text)
    print(f"{problem.name}: rank {summary['rank']}, zeros {summary['zeros']}, "
          f"max rel error {max(summary['alg_err'], default=0.0):.3e}, "
          f"algorithm {summary['seconds']:.2f}s", file=sys.stderr)
    if summary["rank"] != summary["oracle_rank"]:
        print("rank differs from the oracle rank", file=sys.stderr)
        return 3
    return 0


def verify_chain(product: BidiagonalProduct, seed: int = 0, trials: int = 20) -> list:
    """Rational property checks on the matrix a chain encodes.

    Returns ``(name, ok, detail)`` triples: exact assembly, exact deflation
    rank, exact submatrix extraction on random strikes, counted
    subtraction-freeness and agreement with the oracle values.
    """
    from .assembly import assemble
    from .instrument import counting, instrumented_singular_values
    from .oracle import BigRationalMatrix, dense_product_exact, rank_exact, reference_svd
    from .representation import expand_dense

    out = []
    dense = dense_product_exact(product)
    rep = assemble(product, exact=True)
    ok = BigRationalMatrix(expand_dense(rep)) == dense
    out.append(("assemble-exact", ok, f"{dense.nrows}x{dense.ncols}"))

    rank = rank_exact(dense)
    res = svd_product(product)
    out.append(("deflation-rank", res.rank == rank, f"deflation {res.rank}, exact {rank}"))

    rng = np.random.default_rng(seed)
    n, m = rep.shape
    bad = 0
    for _ in range(trials):
        rows = sorted(rng.choice(n, size=int(rng.integers(0, n)), replace=False).tolist())
        cols = sorted(rng.choice(m, size=int(rng.integers(0, m)), replace=False).tolist())
        sub = extract_submatrix(rep, rows, cols)
        keep_r = [i for i in range(n) if i not in rows]
        keep_c = [j for j in range(m) if j not in cols]
        if not BigRationalMatrix(expand_dense(sub)) == BigRationalMatrix(
                dense.entries[np.ix_(keep_r, keep_c)]):
            bad += 1
    out.append(("extract-exact", bad == 0, f"{trials - bad}/{trials} strikes"))

    with counting() as tally:
        sig, _ = instrumented_singular_values(product)
    out.append(("subtraction-free", tally.cancelling == 0 and tally.negatives == 0,
                f"{tally.total} ops, {tally.cancelling} cancelling, {tally.negatives} negative"))

    ref = reference_svd(dense, rank=rank) if rank else None
    if ref is None:
        out.append(("oracle-values", res.rank == 0, "zero matrix"))
    else:
        errs = [_rel(s, r) for s, r in zip(res.sigma_big(), ref.sigma)]
        worst = max(errs, default=0.0)
        out.append(("oracle-values", len(errs) == ref.rank and worst <= 1e-12,
                    f"max rel error {worst:.2e}"))
    return out


def cmd_verify(args) -> int:
    product, _ = parse_bdp(_read(args.chain))
    results = verify_chain(product, seed=args.seed, trials=args.trials)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}\t{name}\t{detail}")
    return 0 if all(ok for _, ok, _ in results) else 3


# ----------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------
class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(2)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tnsvd", description="Accurate SVDs of nonnegative bidiagonal products.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="write a factor chain")
    g.add_argument("name", help="example1..example4, random, or a matrix family")
    g.add_argument("--x", help="row nodes, comma-separated rationals")
    g.add_argument("--y", help="column nodes (Cauchy columns)")
    g.add_argument("--l", type=int, default=0, help="Cauchy columns of a Cauchy-Vandermonde matrix")
    g.add_argument("--ncols", type=int, default=None, help="distinct columns")
    g.add_argument("--row-mult", help="row multiplicities (one value or a list)")
    g.add_argument("--col-mult", help="column multiplicities")
    g.add_argument("--seed", type=int, default=7)
    g.add_argument("--rows", type=int, default=None)
    g.add_argument("--cols", type=int, default=None)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    a = sub.add_parser("assemble", help="chain to representation")
    a.add_argument("chain")
    a.add_argument("-o", "--output")
    a.set_defaults(func=cmd_assemble)

    e = sub.add_parser("extract", help="representation of a submatrix")
    e.add_argument("repr")
    e.add_argument("--drop-rows", help="1-based rows to strike, e.g. 1,4-6")
    e.add_argument("--drop-cols", help="1-based columns to strike")
    e.add_argument("-o", "--output")
    e.set_defaults(func=cmd_extract)

    d = sub.add_parser("deflate", help="exact deflation, JSON lines")
    d.add_argument("chain")
    d.add_argument("--accumulate", action="store_true")
    d.add_argument("--strict", action="store_true")
    d.add_argument("-o", "--output")
    d.set_defaults(func=cmd_deflate)

    s = sub.add_parser("svd", help="singular values of a chain")
    s.add_argument("chain")
    s.add_argument("--vectors", action="store_true")
    s.add_argument("--oracle", action="store_true")
    s.add_argument("--digits", type=int, default=30)
    s.add_argument("--strict", action="store_true")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_svd)

    r = sub.add_parser("repro", help="reproduce an example table")
    r.add_argument("name", choices=sorted(gen_mod.PRESETS))
    r.add_argument("--seed", type=int, default=7)
    r.add_argument("--strict", action="store_true")
    r.add_argument("-o", "--output")
    r.set_defaults(func=cmd_repro)

    v = sub.add_parser("verify", help="rational property checks on a chain")
    v.add_argument("chain")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--trials", type=int, default=20)
    v.set_defaults(func=cmd_verify)
    return p


def run(argv: Sequence[str] | None = None) -> int:
    """Run one command; returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except OracleError as exc:
        print(f"oracle error: {exc}", file=sys.stderr)
        return 4
    except (DomainError, DimensionError, DeflationError, ConvergenceError,
            ZeroDivisionError, ValueError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run())
