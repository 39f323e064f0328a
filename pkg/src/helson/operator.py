"""Truncated multiplicative Hankel matrices M(alpha) = {alpha(nm)}.

The entry at row index n and column index m depends only on the product
nm, which makes every assembled matrix symmetric (not Hermitian unless
alpha is real).  Under a prime budget d the rows and columns run over
the d-smooth integers <= N, in ascending order, with the index map kept
on the matrix.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from . import sieve
from .core import Sequence, DilationParam, _rvalue

# dense assembly refuses above this many rows; past that only the
# matrix-free apply() is meaningful (assembly is O(N^2) memory)
DENSE_CAP = 1024


def symbol_value(symbol, n):
    """Evaluate a symbol source at index n.

    Accepts a Sequence (missing indices read as 0) or any object with a
    pure ``value(n)`` method, e.g. the formula fixtures.
    """
    if isinstance(symbol, Sequence):
        return symbol[n]
    value = getattr(symbol, "value", None)
    if value is None:
        raise DomainError(
            f"symbol must be a Sequence or expose value(n), got {type(symbol).__name__}"
        )
    return complex(value(n))


def symbol_label(symbol):
    """Provenance tag recorded on assembled matrices."""
    spec = getattr(symbol, "spec", None)
    if spec is not None:
        return str(spec)
    if isinstance(symbol, Sequence):
        return f"sequence:{len(symbol)}"
    return type(symbol).__name__


@dataclass(frozen=True)
class HelsonMatrix:
    """Dense truncation of M(alpha) with its index map and provenance."""

    entries: np.ndarray
    indices: tuple
    symbol_id: str
    prime_budget: object = None

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.complex128)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DomainError(f"matrix must be square, got shape {entries.shape}")
        if entries.shape[0] != len(self.indices):
            raise DomainError("index map length does not match matrix size")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "indices", tuple(int(n) for n in self.indices))

    @property
    def size(self):
        return len(self.indices)

    @property
    def n_max(self):
        return self.indices[-1] if self.indices else 0


def truncation_indices(n_max, prime_budget=None):
    """Row/column indices of the truncation window: 1..N, d-smooth under a budget."""
    if n_max < 1:
        raise DomainError(f"truncation size must be >= 1, got {n_max}")
    return sieve.smooth_indices(n_max, prime_budget)


def _check_products(indices):
    limit = sieve.sieve_limit()
    top = indices[-1] * indices[-1]
    if top > limit:
        raise DomainError(
            f"matrix window needs index {top} = {indices[-1]}^2 "
            f"above sieve limit {limit}"
        )


def assemble(symbol, n_max, prime_budget=None, dense_cap=DENSE_CAP):
    """Dense truncated matrix with entry (n, m) = alpha(nm).

    Each distinct product nm is evaluated once; the result is symmetric
    by construction because the entry depends only on the product.
    """
    indices = truncation_indices(n_max, prime_budget)
    _check_products(indices)
    if len(indices) > dense_cap:
        raise DomainError(
            f"dense assembly capped at {dense_cap} rows, window has {len(indices)}; "
            "use apply() for matrix-free products"
        )
    idx = np.asarray(indices, dtype=np.int64)
    products = idx[:, None] * idx[None, :]
    uniq, inverse = np.unique(products, return_inverse=True)
    values = np.fromiter(
        (symbol_value(symbol, int(n)) for n in uniq),
        dtype=np.complex128,
        count=len(uniq),
    )
    entries = values[inverse].reshape(len(idx), len(idx))
    return HelsonMatrix(
        entries=entries,
        indices=indices,
        symbol_id=symbol_label(symbol),
        prime_budget=prime_budget,
    )


def apply(symbol, a, n_max, prime_budget=None):
    """Matrix-free product: result(m) = sum_n alpha(nm) a(n), m in the window.

    Never materializes the matrix, so it works beyond the dense cap.
    """
    indices = truncation_indices(n_max, prime_budget)
    _check_products(indices)
    allowed = set(indices)
    bad = [n for n in a.support if n not in allowed]
    if bad:
        raise DomainError(
            f"apply() needs supp(a) inside the window [1, {n_max}]"
            + (f" ({prime_budget}-smooth)" if prime_budget else "")
            + f"; offending indices {bad[:5]}"
        )
    out = {}
    for m in indices:
        acc = 0j
        for n, v in a.items():
            acc += symbol_value(symbol, n * m) * v
        if acc != 0:
            out[m] = acc
    return Sequence(out)


def form(symbol, a, b):
    """Sesquilinear form <M(alpha) a, b> = sum a(n) conj(b(m)) alpha(nm).

    Equals the bilinear pairing of alpha against a * b; with assertions
    enabled the two routes are computed and compared.
    """
    limit = sieve.sieve_limit()
    total = 0j
    for n, av in a.items():
        for m, bv in b.items():
            p = n * m
            if p > limit:
                raise DomainError(f"form index {n}*{m} exceeds sieve limit {limit}")
            total += av * bv.conjugate() * symbol_value(symbol, p)
    if __debug__ and a and b:
        from .core import dirichlet_convolve, bilinear_pair

        conv = dirichlet_convolve(a, b)
        alpha = Sequence({n: symbol_value(symbol, n) for n in conv.support})
        check = bilinear_pair(alpha, conv)
        assert abs(total - check) <= 1e-9 * (1.0 + abs(total)), (
            f"form/pairing mismatch: {total} vs {check}"
        )
    return complex(total)


class DilatedSymbol:
    """Lazy view of alpha_r(n) = r^omega(n) alpha(n); avoids materializing."""

    def __init__(self, base, r):
        self.base = base
        self.r = _rvalue(r)
        self.spec = f"dilate({self.r:g})|{symbol_label(base)}"

    def value(self, n):
        return (self.r ** sieve.weighted_degree(n)) * symbol_value(self.base, n)


def dilate_symbol(symbol, r, n_max):
    """alpha_r as a concrete Sequence on the window [1, N^2].

    Satisfies assemble(alpha_r, N) = D_r assemble(alpha, N) D_r with D_r
    the diagonal matrix of dilation weights, since the weighted degree is
    additive over products.
    """
    if n_max < 1:
        raise DomainError(f"truncation size must be >= 1, got {n_max}")
    view = DilatedSymbol(symbol, r)
    top = n_max * n_max
    if top > sieve.sieve_limit():
        raise DomainError(
            f"window [1, {top}] exceeds sieve limit {sieve.sieve_limit()}"
        )
    if isinstance(symbol, Sequence):
        space = [n for n in symbol.support if n <= top]
    else:
        space = range(1, top + 1)
    return Sequence({n: view.value(n) for n in space})


def dilation_matrix(r, indices):
    """Diagonal matrix of dilation weights aligned with a truncation index map."""
    r = _rvalue(r)
    return np.diag([r ** sieve.weighted_degree(n) for n in indices])


def matrix_header(matrix):
    """JSON-ready truncation metadata carried next to CSV exports."""
    return {
        "N": matrix.n_max,
        "symbol_id": matrix.symbol_id,
        "prime_budget": matrix.prime_budget,
        "indices": list(matrix.indices),
    }


def matrix_to_csv(matrix):
    """Row-major CSV with "re,im" per cell (flattened to re<j>,im<j> columns)."""
    size = matrix.size
    lines = [",".join(f"re{j},im{j}" for j in range(size))]
    for row in matrix.entries:
        lines.append(",".join(f"{float(v.real)!r},{float(v.imag)!r}" for v in row))
    return "\n".join(lines) + "\n"


def save_matrix(matrix, csv_path, header_path=None):
    """Write the CSV body and its JSON header (default: csv_path + '.json')."""
    if header_path is None:
        header_path = str(csv_path) + ".json"
    with open(csv_path, "w") as fh:
        fh.write(matrix_to_csv(matrix))
    with open(header_path, "w") as fh:
        json.dump(matrix_header(matrix), fh, indent=2)
        fh.write("\n")
