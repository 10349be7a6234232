"""Independent reference computations used by the tests.

These avoid the package's vectorized code paths: energies are evaluated in
exact rational arithmetic with plain loops, and multilinear coefficients are
recovered from energies by Moebius inversion over subsets.
"""
from fractions import Fraction
from itertools import combinations, product


def bit_configs(size):
    """Lexicographic bit tuples, first position most significant."""
    return list(product((0, 1), repeat=size))


def pspin_energy_exact(bits, p):
    n = len(bits)
    m = Fraction(sum(1 - 2 * b for b in bits), n)
    return -n * m**p


def pspin_levels_exact(n, p):
    return sorted(pspin_energy_exact(b, p) for b in bit_configs(n))


def quadratic_energy_exact(genes, bits):
    """Energy of a chromosome-ordered coefficient list at ``bits``."""
    ntot = len(bits)
    e = Fraction(genes[0])
    for i in range(ntot):
        e += Fraction(genes[1 + i]) * bits[i]
    k = 1 + ntot
    for i, j in combinations(range(ntot), 2):
        e += Fraction(genes[k]) * bits[i] * bits[j]
        k += 1
    return e


def moebius_coefficients(energy, size):
    """Coefficients ``a_S`` of ``f(x) = sum_S a_S prod_{i in S} x_i``.

    ``a_S = sum_{T subset S} (-1)^{|S|-|T|} f(1_T)``. Returned as a dict keyed
    by sorted index tuples.
    """
    out = {}
    for r in range(size + 1):
        for S in combinations(range(size), r):
            acc = 0
            for q in range(r + 1):
                for T in combinations(S, q):
                    x = tuple(1 if i in T else 0 for i in range(size))
                    acc += (-1) ** (r - q) * energy(x)
            out[S] = acc
    return out


def chromosome_from_coefficients(coefs, size):
    genes = [coefs[()]] + [coefs[(i,)] for i in range(size)]
    genes += [coefs[pq] for pq in combinations(range(size), 2)]
    return genes


def ising_energy_loop(K, h, J, bits):
    s = [1 - 2 * b for b in bits]
    e = K + sum(hi * si for hi, si in zip(h, s))
    for k, (i, j) in enumerate(combinations(range(len(s)), 2)):
        e += J[k] * s[i] * s[j]
    return e


def penalty_exact(xi, xj, t, delta):
    return delta * (3 * t + xi * xj - 2 * t * xi - 2 * t * xj)
