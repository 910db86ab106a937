"""Reference values frozen in the unit tests, computed independently with mpmath."""
import mpmath as mp

mp.mp.dps = 30


def g(t, x):
    return mp.exp(-x * x / (2 * t)) / mp.sqrt(2 * mp.pi * t)


def periodic(t, d):
    return mp.nsum(lambda k: g(t, d + k), [-mp.inf, mp.inf])


def periodic_poisson(t, d):
    return 1 + 2 * mp.nsum(lambda k: mp.exp(-2 * mp.pi**2 * k**2 * t) * mp.cos(2 * mp.pi * k * d), [1, mp.inf])


def neumann(t, x, y):
    return mp.nsum(lambda n: g(t, x - y + 2 * n) + g(t, x + y + 2 * n), [-mp.inf, mp.inf])


def periodic_var(t):
    # k = 0 mode contributes t; each k >= 1 contributes a cos and a sin mode
    lam = lambda k: (2 * mp.pi * k) ** 2 / 2
    return t + mp.nsum(lambda k: 2 * (1 - mp.exp(-2 * lam(k) * t)) / (2 * lam(k)), [1, mp.inf])


if __name__ == "__main__":
    print("g_1(0)                 ", mp.nstr(g(1, 0), 17))
    print("p^per_1(0,0) images    ", mp.nstr(periodic(1, 0), 18))
    print("p^per_1(0,0) Poisson   ", mp.nstr(periodic_poisson(1, 0), 18))
    print("p^per_0.05(0.3,0.8)    ", mp.nstr(periodic(mp.mpf('0.05'), mp.mpf('0.5')), 17))
    print("p^neu_0.1(0,0)         ", mp.nstr(neumann(mp.mpf('0.1'), 0, 0), 17))
    print("p^neu_0.2(0.3,0.7)     ", mp.nstr(neumann(mp.mpf('0.2'), mp.mpf('0.3'), mp.mpf('0.7')), 17))
    print("sine factor t=0.1      ", mp.nstr(mp.exp(-(2 * mp.pi) ** 2 * mp.mpf('0.1') / 2), 17))
    print("mollify factor eps=0.01", mp.nstr(mp.exp(-mp.mpf('0.01') * (2 * mp.pi) ** 2 / 2), 17))
    print("1/sqrt(pi)             ", mp.nstr(1 / mp.sqrt(mp.pi), 17))
    print("periodic Var V_1       ", mp.nstr(periodic_var(1), 17))
    print("delta peak n=100       ", mp.nstr(mp.sqrt(100 / (2 * mp.pi)), 17))
