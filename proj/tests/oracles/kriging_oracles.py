"""High-precision reference values frozen into the C++ unit tests.

Run with `python3 tests/oracles/kriging_oracles.py`; it prints each value
with 20 significant digits. Uses mpmath only, never the C++ code.
"""
import mpmath as mp

mp.mp.dps = 50


def matern52(h, theta):
    r = mp.mpf(h) / theta
    return (1 + mp.sqrt(5) * r + mp.mpf(5) / 3 * r**2) * mp.exp(-mp.sqrt(5) * r)


def solve(C, b):
    return mp.lu_solve(mp.matrix(C), mp.matrix(b))


def main():
    print("matern52(1,1)            =", mp.nstr(matern52(1, 1), 20))
    print("2*matern52(1,1)          =", mp.nstr(2 * matern52(1, 1), 20))
    print("matern52(0.3,0.7)        =", mp.nstr(matern52(0.3, 0.7), 20))

    # Two-point likelihood, y = (0,0), x = 0.2, 0.7 (d=1), theta=0.5, sigma2=0.3, tau2=1e-4.
    s2, t2 = mp.mpf("0.3"), mp.mpf("1e-4")
    k = matern52(mp.mpf("0.5"), mp.mpf("0.5"))
    det = (s2 + t2) ** 2 - (s2 * k) ** 2
    nll = (mp.log(det) + 2 * mp.log(2 * mp.pi)) / 2
    print("nll two-point zero y     =", mp.nstr(nll, 20))

    # Same kernel/positions, y = (0.1, 0.9): full GLS profile.
    y = [mp.mpf("0.1"), mp.mpf("0.9")]
    C = [[s2 + t2, s2 * k], [s2 * k, s2 + t2]]
    ci1 = solve(C, [1, 1])
    ciy = solve(C, y)
    mu = (ci1[0] + ci1[1]) ** -1 * (ciy[0] + ciy[1])
    r = [y[0] - mu, y[1] - mu]
    cir = solve(C, r)
    quad = r[0] * cir[0] + r[1] * cir[1]
    nll2 = (mp.log(det) + quad + 2 * mp.log(2 * mp.pi)) / 2
    print("nll two-point y=(.1,.9)  =", mp.nstr(nll2, 20))

    # Hand-built 2-point model: x=(0),(1), y=(0,1), theta=1, sigma2=1, tau2=0.
    # Predict at 0.5 and at 0.25.
    k1 = matern52(1, 1)
    C = [[1, k1], [k1, 1]]
    y = [0, 1]
    ci1 = solve(C, [1, 1])
    ciy = solve(C, y)
    mu = (ci1[0] + ci1[1]) ** -1 * (ciy[0] + ciy[1])
    for x in ("0.5", "0.25"):
        x = mp.mpf(x)
        g = [matern52(x, 1), matern52(1 - x, 1)]
        w = solve(C, [y[0] - mu, y[1] - mu])
        print(f"two-point predict({x})    =", mp.nstr(mu + g[0] * w[0] + g[1] * w[1], 20))

    # Pearson of (1,2,3) vs (1,3,2).
    a, b = [1, 2, 3], [1, 3, 2]
    ma, mb = mp.mpf(sum(a)) / 3, mp.mpf(sum(b)) / 3
    num = sum((ai - ma) * (bi - mb) for ai, bi in zip(a, b))
    den = mp.sqrt(sum((ai - ma) ** 2 for ai in a) * sum((bi - mb) ** 2 for bi in b))
    print("pearson                  =", mp.nstr(num / den, 20))


if __name__ == "__main__":
    main()
