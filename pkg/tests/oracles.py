"""Brute-force reference implementations used only by the tests."""
import math
from fractions import Fraction


def tail_m(n, p):
    # exact rational arithmetic on the decimal value of p
    return max(1, math.ceil((1 - Fraction(repr(p))) * n))


def var_oracle(values, p):
    s = sorted(values, reverse=True)
    return s[tail_m(len(s), p) - 1]


def cte_oracle(values, p):
    s = sorted(values, reverse=True)
    m = tail_m(len(s), p)
    return math.fsum(s[:m]) / m
