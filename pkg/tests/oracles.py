"""Independent reference computations in exact rational arithmetic."""

from fractions import Fraction
from math import comb


def hypergeom_tails_exact(observed, successes, population, draws):
    """``(P(X < a), P(X = a), P(X > a))`` by summing the pmf as fractions."""
    total = comb(population, draws)
    pmf = {
        x: Fraction(comb(successes, x) * comb(population - successes, draws - x), total)
        for x in range(0, min(successes, draws) + 1)
    }
    under = sum((p for x, p in pmf.items() if x < observed), Fraction(0))
    over = sum((p for x, p in pmf.items() if x > observed), Fraction(0))
    return under, pmf.get(observed, Fraction(0)), over


def binomial_upper_exact(n, l, p):
    p = Fraction(p)
    return sum((comb(n, i) * p**i * (1 - p) ** (n - i) for i in range(max(l, 0), n + 1)), Fraction(0))


def multigraphs(n_pairs, m):
    """All ways to place ``m`` indistinguishable events on ``n_pairs`` slots."""
    if n_pairs == 1:
        yield (m,)
        return
    for first in range(m + 1):
        for rest in multigraphs(n_pairs - 1, m - first):
            yield (first,) + rest
