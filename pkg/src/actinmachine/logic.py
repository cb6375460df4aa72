"""Two-level minimization of the Boolean functions read off the electrodes.

A truth table with arity k is minimized to an irredundant disjunctive
normal form built from prime implicants (Quine-McCluskey).  For k <= 6
the cover is exactly minimum-cardinality, found by branch and bound over
the prime-implicant chart; ties prefer fewer literals in total, then the
lexicographically smallest implicant set.

Implicants are cube strings over {'0', '1', '-'}: position i is variable
x_i ('1' positive, '0' negated, '-' absent), and x_0 is the most
significant bit of the input decimal, matching the electrode encoding.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .errors import DomainError

EXACT_COVER_MAX_ARITY = 6


@dataclass(frozen=True)
class TruthTable:
    arity: int
    bits: tuple

    def __post_init__(self):
        if not 1 <= self.arity <= 16:
            raise ValueError(f"arity {self.arity} outside [1, 16]")
        if len(self.bits) != 1 << self.arity:
            raise ValueError(f"need {1 << self.arity} bits, got {len(self.bits)}")
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("truth table bits must be 0 or 1")

    def __call__(self, v):
        return self.bits[v]

    @property
    def on_set(self):
        return [v for v, b in enumerate(self.bits) if b]


@dataclass(frozen=True)
class Dnf:
    arity: int
    implicants: tuple  # sorted cube strings; () is constant 0, ('---',) constant 1

    def __post_init__(self):
        object.__setattr__(self, "implicants", tuple(sorted(set(self.implicants))))
        for cube in self.implicants:
            if len(cube) != self.arity or any(c not in "01-" for c in cube):
                raise ValueError(f"bad implicant {cube!r} for arity {self.arity}")


def tables_from_g(g, k):
    """Split a state map into k per-electrode truth tables.

    ``table_i(v)`` is bit i (MSB first) of ``g(v)``; electrode i therefore
    gets table i.
    """
    size = 1 << k
    missing = [v for v in range(size) if v not in g]
    if missing:
        raise DomainError(f"state map is missing inputs {missing[:4]}{'...' if len(missing) > 4 else ''}")
    tables = []
    for i in range(k):
        shift = k - 1 - i
        tables.append(TruthTable(k, tuple((g[v] >> shift) & 1 for v in range(size))))
    return tables


def _cube_of(v, k):
    return format(v, f"0{k}b")


def _covers(cube, minterm_bits):
    return all(c == "-" or c == m for c, m in zip(cube, minterm_bits))


def _merge(a, b):
    """Combine two cubes differing in exactly one cared position, else None."""
    diff = 0
    out = []
    for x, y in zip(a, b):
        if x == y:
            out.append(x)
        elif x != "-" and y != "-":
            diff += 1
            if diff > 1:
                return None
            out.append("-")
        else:
            return None
    return "".join(out) if diff == 1 else None


def prime_implicants(table):
    """All prime implicants of the on-set."""
    k = table.arity
    level = {_cube_of(v, k) for v in table.on_set}
    primes = set()
    while level:
        merged = set()
        used = set()
        group = sorted(level)
        for a, b in combinations(group, 2):
            m = _merge(a, b)
            if m is not None:
                merged.add(m)
                used.add(a)
                used.add(b)
        primes.update(c for c in level if c not in used)
        level = merged
    return sorted(primes)


def _literal_count(cube):
    return sum(1 for c in cube if c != "-")


def _exact_cover(primes, minterms, k):
    """Minimum-cardinality prime cover, then fewest literals, then lex smallest."""
    cover_sets = []
    for v in minterms:
        bits = _cube_of(v, k)
        cover_sets.append(frozenset(i for i, p in enumerate(primes) if _covers(p, bits)))

    # Essential primes belong to every cover; commit them first.
    chosen = set()
    remaining = list(cover_sets)
    while True:
        forced = {next(iter(s)) for s in remaining if len(s) == 1} - chosen
        if not forced:
            break
        chosen |= forced
        remaining = [s for s in remaining if not (s & chosen)]
    if not remaining:
        return sorted(chosen)

    # Branch and bound on the residual chart: objective is the tuple
    # (extra primes, total literals, implicant strings).
    order = sorted(range(len(primes)), key=lambda i: (_literal_count(primes[i]), primes[i]))
    rank = {i: r for r, i in enumerate(order)}
    best = {"sol": None, "key": None}

    def solution_key(extra):
        cubes = tuple(sorted(primes[i] for i in chosen | extra))
        literals = sum(_literal_count(c) for c in cubes)
        return (len(extra), literals, cubes)

    def search(uncovered, extra):
        if not uncovered:
            key = solution_key(extra)
            if best["key"] is None or key < best["key"]:
                best["key"] = key
                best["sol"] = set(extra)
            return
        if best["key"] is not None and len(extra) + 1 > best["key"][0]:
            return
        # Branch on the hardest minterm (fewest covering primes).
        target = min(uncovered, key=lambda s: (len(s), sorted(rank[i] for i in s)))
        for i in sorted(target, key=lambda i: rank[i]):
            extra.add(i)
            rest = [s for s in uncovered if i not in s]
            search(rest, extra)
            extra.remove(i)

    search(remaining, set())
    return sorted(chosen | best["sol"])


def _greedy_irredundant_cover(primes, minterms, k):
    """Greedy cover, then drop redundant picks; used above the exact-cover arity."""
    uncovered = set(minterms)
    cover_of = {
        i: {v for v in minterms if _covers(p, _cube_of(v, k))} for i, p in enumerate(primes)
    }
    chosen = []
    while uncovered:
        i = max(
            range(len(primes)),
            key=lambda i: (len(cover_of[i] & uncovered), -_literal_count(primes[i]), primes[i]),
        )
        chosen.append(i)
        uncovered -= cover_of[i]
    pruned = list(chosen)
    for i in sorted(chosen, key=lambda i: -len(cover_of[i])):
        trial = [j for j in pruned if j != i]
        if trial and set().union(*(cover_of[j] for j in trial)) >= set(minterms):
            pruned = trial
    return sorted(pruned)


def minimize(table):
    """Irredundant minimum DNF equivalent to the table on every input."""
    on = table.on_set
    k = table.arity
    if not on:
        return Dnf(k, ())
    if len(on) == 1 << k:
        return Dnf(k, ("-" * k,))
    primes = prime_implicants(table)
    if k <= EXACT_COVER_MAX_ARITY:
        picked = _exact_cover(primes, on, k)
    else:
        picked = _greedy_irredundant_cover(primes, on, k)
    return Dnf(k, tuple(primes[i] for i in picked))


def evaluate(dnf, bits):
    """OR of ANDs over a k-character input bit string."""
    if len(bits) != dnf.arity:
        raise ValueError(f"input length {len(bits)} != arity {dnf.arity}")
    if any(c not in "01" for c in bits):
        raise ValueError(f"input {bits!r} must be binary")
    for cube in dnf.implicants:
        if _covers(cube, bits):
            return 1
    return 0


def dnf_to_table(dnf):
    k = dnf.arity
    return TruthTable(k, tuple(evaluate(dnf, _cube_of(v, k)) for v in range(1 << k)))


def format_implicant(cube):
    parts = []
    for i, c in enumerate(cube):
        if c == "1":
            parts.append(f"x{i}")
        elif c == "0":
            parts.append(f"!x{i}")
    return "·".join(parts) if parts else "1"


def format_dnf(dnf):
    if not dnf.implicants:
        return "0"
    return " + ".join(format_implicant(c) for c in dnf.implicants)


def write_dnf_csv(dnfs, path, comment=None):
    """One minimized function per electrode, as `electrode,dnf`."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        fh.write("electrode,dnf\n")
        for i, d in enumerate(dnfs):
            fh.write(f"{i},{format_dnf(d)}\n")


def format_dnf_lines(dnfs):
    return [f"e{i}: {format_dnf(d)}" for i, d in enumerate(dnfs)]
