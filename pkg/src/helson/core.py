"""Sequences on the positive integers and their multiplicative calculus.

A Sequence is a finitely supported map n -> complex, n >= 1.  The
multiplicative structure enters through factorize/compose, Dirichlet
convolution with a conjugated second factor,

    (a * b)(n) = sum_{k | n} a(k) conj(b(n/k)),

the bilinear pairing (a, b) = sum a(n) b(n) (no conjugation), and the
dilation semigroup acting by the diagonal weights r^omega(n) where
omega(n) = sum_j j*kappa_j is the weighted degree of the factorization.
"""

import json
import math
from dataclasses import dataclass

from .errors import ConvergenceError, DomainError
from . import sieve


@dataclass(frozen=True)
class MultiIndex:
    """Exponent tuple kappa with n = prod_j p_j^(kappa_j).

    Trailing zeros are trimmed on construction, so equal integers give
    equal MultiIndex values.
    """

    exponents: tuple = ()

    def __post_init__(self):
        exps = tuple(int(e) for e in self.exponents)
        if any(e < 0 for e in exps):
            raise DomainError(f"exponents must be >= 0, got {exps}")
        while exps and exps[-1] == 0:
            exps = exps[:-1]
        object.__setattr__(self, "exponents", exps)

    def __iter__(self):
        return iter(self.exponents)

    def __len__(self):
        return len(self.exponents)

    @property
    def degree(self):
        return sum(self.exponents)

    @property
    def weighted_degree(self):
        """sum_j j*kappa_j with j counted from 1."""
        return sum(j * e for j, e in enumerate(self.exponents, start=1))


def factorize(n):
    """MultiIndex of n; inverse of compose.  1 maps to the empty tuple."""
    pairs = sieve.factor_pairs(n)
    if not pairs:
        return MultiIndex()
    width = sieve.prime_index(pairs[-1][0])
    exps = [0] * width
    for p, e in pairs:
        exps[sieve.prime_index(p) - 1] = e
    return MultiIndex(tuple(exps))


def compose(kappa):
    """Integer prod_j p_j^(kappa_j); rejects results above the sieve limit."""
    if not isinstance(kappa, MultiIndex):
        kappa = MultiIndex(tuple(kappa))
    limit = sieve.sieve_limit()
    n = 1
    for j, e in enumerate(kappa, start=1):
        if e == 0:
            continue
        n *= sieve.nth_prime(j) ** e
        if n > limit:
            raise DomainError(f"compose({kappa.exponents}) exceeds sieve limit {limit}")
    return n


def _as_complex(v):
    v = complex(v)
    if not (math.isfinite(v.real) and math.isfinite(v.imag)):
        raise DomainError(f"sequence values must be finite, got {v}")
    return v


class Sequence:
    """Finitely supported complex sequence over integer indices n >= 1.

    Entries iterate in ascending index order, so every reduction built on
    a Sequence is reproducible.  Exact zeros are not stored.
    """

    __slots__ = ("_data",)

    def __init__(self, entries=None):
        data = {}
        if entries:
            items = entries.items() if isinstance(entries, dict) else entries
            for n, v in items:
                try:
                    m = int(n)
                except (TypeError, ValueError):
                    raise DomainError(f"sequence index must be an integer, got {n!r}")
                if m != n or isinstance(n, (float, complex)):
                    raise DomainError(f"sequence index must be an integer, got {n!r}")
                if m < 1:
                    raise DomainError(f"sequence index must be >= 1, got {m}")
                data[m] = data.get(m, 0j) + _as_complex(v)
        self._data = {n: data[n] for n in sorted(data) if data[n] != 0}

    @classmethod
    def delta(cls, n, value=1.0):
        """The unit mass at index n."""
        return cls({n: value})

    @property
    def support(self):
        return tuple(self._data)

    @property
    def max_index(self):
        return max(self._data) if self._data else 0

    def items(self):
        return self._data.items()

    def __getitem__(self, n):
        return self._data.get(n, 0j)

    def __len__(self):
        return len(self._data)

    def __bool__(self):
        return bool(self._data)

    def __eq__(self, other):
        if not isinstance(other, Sequence):
            return NotImplemented
        return self._data == other._data

    def __hash__(self):
        return hash(tuple(self._data.items()))

    def __add__(self, other):
        if not isinstance(other, Sequence):
            return NotImplemented
        out = dict(self._data)
        for n, v in other.items():
            out[n] = out.get(n, 0j) + v
        return Sequence(out)

    def __sub__(self, other):
        if not isinstance(other, Sequence):
            return NotImplemented
        return self + (-1.0) * other

    def __neg__(self):
        return (-1.0) * self

    def __mul__(self, scalar):
        s = _as_complex(scalar)
        return Sequence({n: s * v for n, v in self._data.items()})

    __rmul__ = __mul__

    def conjugate(self):
        return Sequence({n: v.conjugate() for n, v in self._data.items()})

    def norm(self):
        """l2 norm over the support."""
        return math.sqrt(sum((v * v.conjugate()).real for v in self._data.values()))

    def restrict(self, window):
        """Entries with index <= window."""
        if window < 0:
            raise DomainError(f"window must be >= 0, got {window}")
        return Sequence({n: v for n, v in self._data.items() if n <= window})

    def __repr__(self):
        body = ", ".join(f"{n}: {v}" for n, v in list(self._data.items())[:6])
        tail = ", ..." if len(self._data) > 6 else ""
        return f"Sequence({{{body}{tail}}})"


def filter_smooth(a, prime_budget):
    """Drop entries whose index is not d-smooth."""
    if prime_budget is None:
        return a
    return Sequence(
        {n: v for n, v in a.items() if sieve.is_smooth(n, prime_budget)}
    )


def dirichlet_convolve(a, b, window=None):
    """(a * b)(n) = sum_{k|n} a(k) conj(b(n/k)).

    Linear in a, conjugate-linear in b.  Product indices above the sieve
    limit raise a domain error; passing a window keeps only products
    <= window and then never touches the sieve cap.
    """
    limit = sieve.sieve_limit()
    out = {}
    for i, av in a.items():
        for j, bv in b.items():
            n = i * j
            if window is not None and n > window:
                continue
            if n > limit:
                raise DomainError(
                    f"convolution index {i}*{j} exceeds sieve limit {limit}"
                )
            out[n] = out.get(n, 0j) + av * bv.conjugate()
    return Sequence(out)


def bilinear_pair(a, b):
    """(a, b) = sum_n a(n) b(n); bilinear, no conjugation on either slot."""
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    return complex(sum(v * large[n] for n, v in small.items()))


@dataclass(frozen=True)
class DilationParam:
    """Dilation parameter r, strictly inside (0, 1)."""

    r: float

    def __post_init__(self):
        r = float(self.r)
        if not (0.0 < r < 1.0):
            raise DomainError(f"dilation parameter must satisfy 0 < r < 1, got {r}")
        object.__setattr__(self, "r", r)


def _rvalue(r):
    if isinstance(r, DilationParam):
        return r.r
    return DilationParam(float(r)).r


def dilation_weight(r, n):
    """r^omega(n) where omega is the weighted degree; 1 exactly when n = 1."""
    r = _rvalue(r)
    return r ** sieve.weighted_degree(n)


def dilate(r, a):
    """(D_r a)(n) = r^omega(n) a(n); contractive, and D_r(a*b) = D_ra * D_rb."""
    r = _rvalue(r)
    return Sequence(
        {n: (r ** sieve.weighted_degree(n)) * v for n, v in a.items()}
    )


@dataclass(frozen=True)
class HSSum:
    """Two routes to sum_kappa r^(2 omega(kappa)) = prod_j 1/(1 - r^(2j))."""

    partial_sum: float
    product_form: float
    terms_used: int


_PARTITIONS = [1]


def _partition_counts(upto):
    # Euler's pentagonal-number recurrence, exact integers
    while len(_PARTITIONS) <= upto:
        w = len(_PARTITIONS)
        total = 0
        k = 1
        while True:
            g1 = k * (3 * k - 1) // 2
            g2 = k * (3 * k + 1) // 2
            if g1 > w:
                break
            sign = 1 if k % 2 else -1
            total += sign * _PARTITIONS[w - g1]
            if g2 <= w:
                total += sign * _PARTITIONS[w - g2]
            k += 1
        _PARTITIONS.append(total)
    return _PARTITIONS


def dilation_hs_sum(r, tolerance, max_terms=50000):
    """Hilbert-Schmidt sum of D_r by two independent routes.

    partial_sum accumulates sum_kappa r^(2 omega) grouped by weighted
    degree w (each level contributes p(w) * r^(2w) with p the partition
    count), stopping once the remaining tail is below tolerance relative
    to the running sum.  product_form multiplies 1/(1 - r^(2j)) until the
    change still ahead of the partial product is below tolerance.
    terms_used counts the weighted-degree levels consumed.
    """
    r = _rvalue(r)
    tolerance = float(tolerance)
    if not (0.0 < tolerance < 1.0):
        raise DomainError(f"tolerance must lie in (0, 1), got {tolerance}")
    q = r * r

    # p(w) grows like exp(pi*sqrt(2w/3)), so the level where terms sink
    # below the target solves a*s^2 - b*s - L = 0 in s = sqrt(w); reject
    # hopeless r before doing any work
    margin = 0.5 * (1.0 - math.sqrt(q))
    a = -math.log(q)
    b = math.pi * math.sqrt(2.0 / 3.0)
    log_sum_est = (math.pi * math.pi / 6.0) / (1.0 - q)
    big_l = log_sum_est - math.log(tolerance * margin)
    s = (b + math.sqrt(b * b + 4.0 * a * big_l)) / (2.0 * a)
    if s * s > max_terms:
        raise ConvergenceError(
            f"r={r} needs about {int(s * s)} weighted-degree levels, "
            f"cap is {max_terms}",
            best=None,
        )

    product = 1.0
    j = 1
    while True:
        qj = q**j
        product *= 1.0 / (1.0 - qj)
        # everything still ahead changes log(product) by at most this
        remaining = (q * qj) / ((1.0 - q) * (1.0 - q * qj))
        if remaining < tolerance:
            break
        j += 1

    total = 0.0
    w = 0
    log_q = math.log(q)
    target = tolerance * margin
    while True:
        counts = _partition_counts(w)
        term = math.exp(math.log(counts[w]) + w * log_q) if w else 1.0
        total += term
        w += 1
        if w > 1 and term <= target * total:
            break
        if w > max_terms:
            raise ConvergenceError(
                f"dilation HS sum did not stabilize within {max_terms} levels",
                best=HSSum(total, product, w),
            )
    return HSSum(partial_sum=total, product_form=product, terms_used=w)


def sequence_to_triples(a):
    """JSON-ready list of [index, re, im] triples, ascending indices."""
    return [[n, v.real, v.imag] for n, v in a.items()]


def sequence_from_triples(obj):
    """Parse a JSON array of [index, re, im] triples; indices must increase."""
    if not isinstance(obj, list):
        raise DomainError("sequence file must be a JSON array of [n, re, im] triples")
    entries = {}
    last = 0
    for item in obj:
        if not (isinstance(item, list) and len(item) == 3):
            raise DomainError(f"malformed sequence triple: {item!r}")
        n, re, im = item
        if not isinstance(n, int) or isinstance(n, bool):
            raise DomainError(f"sequence index must be an integer, got {n!r}")
        if n <= last:
            raise DomainError(f"sequence indices must be strictly increasing at {n}")
        last = n
        entries[n] = complex(float(re), float(im))
    return Sequence(entries)


def save_sequence(a, path):
    with open(path, "w") as fh:
        json.dump(sequence_to_triples(a), fh)
        fh.write("\n")


def load_sequence(path):
    with open(path) as fh:
        obj = json.load(fh)
    # CLI outputs wrap the triples under a "sequence" key next to their
    # determinism header; accept both shapes
    if isinstance(obj, dict) and "sequence" in obj:
        obj = obj["sequence"]
    return sequence_from_triples(obj)
