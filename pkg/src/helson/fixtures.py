"""Formula fixtures: named symbol sources parsed from spec strings.

Registry:
    delta:n            unit mass at index n
    power:sigma        alpha(n) = n^(-sigma)
    mhilbert           alpha(1) = 0, alpha(n) = 1/(sqrt(n) log n) for n >= 2
    random-decay:seed,rate
                       Gaussian values damped by n^(-rate), a pure
                       function of (seed, n)
    file:path          finite sequence loaded from a JSON triple file

Every fixture evaluates deterministically, so assembled matrices and
reports are reproducible byte for byte.
"""

import math

import numpy as np

from .errors import DomainError
from .core import Sequence, load_sequence


class DeltaSymbol:
    """Unit mass at a single index."""

    def __init__(self, n):
        n = int(n)
        if n < 1:
            raise DomainError(f"delta index must be >= 1, got {n}")
        self.n = n
        self.spec = f"delta:{n}"

    def value(self, n):
        return 1.0 + 0j if n == self.n else 0j

    def as_sequence(self):
        return Sequence.delta(self.n)


class PowerSymbol:
    """alpha(n) = n^(-sigma); rank-one matrix since alpha(nm) splits."""

    def __init__(self, sigma):
        self.sigma = float(sigma)
        self.spec = f"power:{self.sigma:g}"

    def value(self, n):
        if n < 1:
            raise DomainError(f"index must be >= 1, got {n}")
        return complex(float(n) ** -self.sigma)


class MHilbertSymbol:
    """alpha(1) = 0, alpha(n) = 1/(sqrt(n) log n) for n >= 2.

    The multiplicative analogue of a Hilbert-type symbol: bounded-looking
    with slow decay.  Tests assert only monotone growth across N, never a
    literature value.
    """

    spec = "mhilbert"

    def value(self, n):
        if n < 1:
            raise DomainError(f"index must be >= 1, got {n}")
        if n == 1:
            return 0j
        return complex(1.0 / (math.sqrt(n) * math.log(n)))


class RandomDecaySymbol:
    """Seeded Gaussian values damped by n^(-rate).

    alpha(n) is a pure function of (seed, n): each index draws from its
    own counter-based generator, so evaluation order cannot matter.
    """

    def __init__(self, seed, rate):
        self.seed = int(seed)
        self.rate = float(rate)
        self.spec = f"random-decay:{self.seed},{self.rate:g}"
        self._cache = {}

    def value(self, n):
        if n < 1:
            raise DomainError(f"index must be >= 1, got {n}")
        hit = self._cache.get(n)
        if hit is None:
            rng = np.random.default_rng((self.seed, n))
            re, im = rng.standard_normal(2)
            hit = complex(re, im) * float(n) ** -self.rate
            self._cache[n] = hit
        return hit


class FileSymbol:
    """Finite sequence loaded from a JSON file of [n, re, im] triples."""

    def __init__(self, path):
        self.path = str(path)
        try:
            self.sequence = load_sequence(self.path)
        except OSError as exc:
            raise DomainError(f"cannot read sequence file {self.path}: {exc.strerror or exc}")
        except (ValueError, TypeError) as exc:
            raise DomainError(f"bad sequence file {self.path}: {exc}")
        self.spec = f"file:{self.path}"

    def value(self, n):
        return self.sequence[n]

    def as_sequence(self):
        return self.sequence


def parse_fixture(spec):
    """Build a symbol source from a registry spec string."""
    spec = str(spec).strip()
    name, _, arg = spec.partition(":")
    name = name.strip()
    if name == "delta":
        if not arg:
            raise DomainError("delta fixture needs an index, e.g. delta:4")
        try:
            return DeltaSymbol(int(arg))
        except ValueError:
            raise DomainError(f"delta index must be an integer, got {arg!r}")
    if name == "power":
        if not arg:
            raise DomainError("power fixture needs an exponent, e.g. power:1")
        try:
            return PowerSymbol(float(arg))
        except ValueError:
            raise DomainError(f"power exponent must be a real, got {arg!r}")
    if name == "mhilbert":
        if arg:
            raise DomainError("mhilbert fixture takes no parameters")
        return MHilbertSymbol()
    if name == "random-decay":
        parts = [p.strip() for p in arg.split(",")] if arg else []
        if len(parts) != 2:
            raise DomainError(
                "random-decay fixture needs seed,rate, e.g. random-decay:7,0.5"
            )
        try:
            return RandomDecaySymbol(int(parts[0]), float(parts[1]))
        except ValueError:
            raise DomainError(f"bad random-decay parameters {arg!r}")
    if name == "file":
        if not arg:
            raise DomainError("file fixture needs a path, e.g. file:sym.json")
        return FileSymbol(arg)
    raise DomainError(
        f"unknown fixture {name!r}; registry: delta:n, power:sigma, "
        "mhilbert, random-decay:seed,rate, file:path"
    )


def parse_sequence_arg(spec):
    """Parse a CLI argument that must denote a finite Sequence."""
    fixture = parse_fixture(spec)
    as_seq = getattr(fixture, "as_sequence", None)
    if as_seq is None:
        raise DomainError(
            f"fixture {fixture.spec!r} has infinite support; this argument "
            "needs a finite sequence (delta:n or file:path)"
        )
    return as_seq()
