"""Fourier coefficients of a uniform mixture of translates.

Averaging the laws of x, x+a, x+2a, ... x+(N-1)a on the torus gives a
measure whose k-th Fourier coefficient is a finite geometric sum with
ratio alpha = mean_j exp(2 pi i a k_j). The closed form matches Monte
Carlo sampling of the mixture, and its modulus is bounded by
2 / (N |1 - alpha|), which decays like 1/N whenever alpha != 1. That decay
is what drives equidistribution along irrational translations.
"""

import math

import numpy as np

from sandpiles import (translation_mixture_bound, translation_mixture_fourier,
                       translation_mixture_fourier_mc)

rng = np.random.default_rng(31)
a = math.sqrt(2.0) - 1.0
x = [0.25, 0.125]

print(f"translation step a = sqrt(2)-1, start x = {x}")
print()
print("closed form vs Monte Carlo (100000 draws each):")
print("  k        N    exact                     sampled                   |diff|/se")
for k in ([1, 0], [1, -2], [3, 2]):
    for n_terms in (10, 100):
        exact = translation_mixture_fourier(a, k, x, n_terms)
        mc, se = translation_mixture_fourier_mc(a, k, x, n_terms, 100000, rng)
        ratio = abs(exact - mc) / se
        print(f"  {str(k):<8} {n_terms:>3}  "
              f"{exact.real:+.5f}{exact.imag:+.5f}j   "
              f"{mc.real:+.5f}{mc.imag:+.5f}j   {ratio:.2f}")

print()
print("modulus bound 2/(N |1-alpha|) forces decay in N:")
print("      N    |coefficient|   bound")
k = [1, -2]
for n_terms in (10, 100, 1000, 10000):
    coeff = abs(translation_mixture_fourier(a, k, x, n_terms))
    bound = translation_mixture_bound(a, k, n_terms)
    print(f"  {n_terms:>5}    {coeff:.6f}      {bound:.6f}")

print()
print("every nonzero frequency dies at rate 1/N, so the mixture converges")
print("weakly to the uniform law on the torus; for rational steps some")
print("alpha equals 1 and the matching coefficient survives (no bound).")
k_rational = [4, 0]
print(f"example with a = 1/4, k = {k_rational}: "
      f"bound = {translation_mixture_bound(0.25, k_rational, 100)}")
