"""Arbitrary-precision reference values frozen into the Rust tests.

Run with `python3 oracles.py`; requires mpmath.
"""
from mpmath import mp, mpf, mpc, gamma, besselj, sinh, cosh, sin, pi, exp, quad, inf, sqrt

mp.dps = 40


def c_function(m_v, m_z, lam):
    n = m_v + m_z + 1
    q = mpf(m_v) / 2 + m_z
    lam = mpf(lam)
    num = mpf(2) ** (q - 2j * lam) * gamma(2j * lam) * gamma(mpf(n) / 2)
    den = gamma((q + 2j * lam) / 2) * gamma((m_v + 4j * lam + 2) / 4)
    return num / den


print("abs(gamma(i))^2 =", abs(gamma(1j)) ** 2)
print("gamma(0.5+30i) =", gamma(mpc(0.5, 30)))
print("gamma(-3.7+2.2i) =", gamma(mpc(-3.7, 2.2)))
print("gamma(20.25-7.5i) =", gamma(mpc(20.25, -7.5)))
for mu, x in [(1, 20), (0, 12), (0, 12.5), (0.5, 2), (2.5, 37.3), (7, 3), (12.5, 30), (25, 13), (50, 10),
              (50, 60), (50, 120), (3, 1000), (1.5, 9999.5), (40, 10000), (0, 0.001), (3.5, 80)]:
    print(f"J({mu},{x}) =", besselj(mu, x))
print("A(2,1,s=1) =", 2 ** 3 * sinh(mpf("0.5")) ** 3 * cosh(mpf("0.5")))
print("sinh(1)^2 =", sinh(1) ** 2)
for (mv, mz, lam) in [(2, 1, 1), (4, 3, 0.5), (8, 1, 7), (2, 1, 10)]:
    c = c_function(mv, mz, lam)
    print(f"c({mv},{mz},{lam}) =", c, " |c|^-2 =", 1 / abs(c) ** 2)
print("phi_h3(1,1) =", sin(1) / sinh(1))
print("phi_h3(0,2) =", 2 / sinh(2))
# constant-time oscillatory integral, H3 (Q^2/4 = 1), s=1, s'=2, lower cut 1.5
f = lambda l: exp(-1j * l) * (l ** 2 + 1) ** mpf(-0.25)
val = mp.quadosc(f, [mpf("1.5"), inf], omega=1)
print("osc(1,2,L=1.5) =", val)
