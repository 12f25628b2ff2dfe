#!/usr/bin/env python3
"""Independent oracles for values frozen into the C++ unit tests.

Everything here is computed without the C++ code under test: a from-scratch
mt19937_64 (parameters straight from the C++ standard), splitmix64 from its
published reference, and closed-form math done with Python floats (IEEE-754
double, same arithmetic). Run it and paste the printed constants into the
tests; each one is labeled with the test that consumes it.
"""

import math

MASK = (1 << 64) - 1


def splitmix64(x):
    x = (x + 0x9E3779B97F4A7C15) & MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK
    return (x ^ (x >> 31)) & MASK


def mt19937_64(seed):
    """Generator with the exact constants of std::mt19937_64."""
    n, m, r = 312, 156, 31
    a = 0xB5026F5AA96619E9
    u, d = 29, 0x5555555555555555
    s, b = 17, 0x71D67FFFEDA60000
    t, c = 37, 0xFFF7EEE000000000
    lshift = 43
    f = 6364136223846793005
    mt = [0] * n
    mt[0] = seed & MASK
    for i in range(1, n):
        mt[i] = (f * (mt[i - 1] ^ (mt[i - 1] >> 62)) + i) & MASK
    upper = MASK ^ ((1 << r) - 1)
    lower = (1 << r) - 1
    index = n

    def nxt():
        nonlocal index
        if index >= n:
            for i in range(n):
                x = (mt[i] & upper) | (mt[(i + 1) % n] & lower)
                x_a = x >> 1
                if x & 1:
                    x_a ^= a
                mt[i] = mt[(i + m) % n] ^ x_a
            index = 0
        y = mt[index]
        index += 1
        y ^= (y >> u) & d
        y ^= (y << s) & b
        y ^= (y << t) & c
        y ^= y >> lshift
        return y & MASK

    return nxt


def main():
    print("# test_rng: splitmix64 reference vector (state 1234567, 3 steps)")
    state = 1234567
    for _ in range(3):
        print(f"  {splitmix64(state)}ULL")
        state = (state + 0x9E3779B97F4A7C15) & MASK

    print("# test_rng: mt19937_64 seeded with splitmix64(42), first 3 draws")
    gen = mt19937_64(splitmix64(42))
    draws = [gen() for _ in range(3)]
    for v in draws:
        print(f"  {v}ULL")
    print("# test_rng: uniform01 of draw0 = (draw0 >> 11) * 2^-53")
    print(f"  {(draws[0] >> 11) * (2.0 ** -53)!r}")

    print("# test_nn: softmax(0.5, -0.5)")
    z = [0.5, -0.5]
    mx = max(z)
    e = [math.exp(v - mx) for v in z]
    tot = sum(e)
    print(f"  {e[0] / tot!r}, {e[1] / tot!r}")

    print("# test_nn: -ln(0.9), ln(2), ln(3), ln(4)")
    print(f"  {-math.log(0.9)!r}, {math.log(2.0)!r}, "
          f"{math.log(3.0)!r}, {math.log(4.0)!r}")

    print("# test_fisher: zero-weight model, trace = (C-1)/C * (|x|^2 + 1)")
    for classes, x in ((2, [2.0]), (3, [1.0, 2.0])):
        sq = sum(v * v for v in x)
        print(f"  C={classes}, x={x}: {(classes - 1) / classes * (sq + 1.0)!r}")

    print("# test_fisher: cum_trace [(0.01, 2.0), (0.0097, 1.0)]")
    print(f"  {0.01 * 2.0 + 0.0097 * 1.0!r}")

    print("# test_data: active_count cases (ratio, n) -> ceil within eps")
    for ratio, n in ((0.3, 7), (0.07, 100), (0.3, 100), (1.0, 13), (1e-9, 5)):
        exact = math.ceil(ratio * n - 1e-9)
        print(f"  ({ratio}, {n}) -> {max(1, min(n, exact))}")

    print("# test_data: iid 50000 over 64 clients")
    nn, clients = 50000, 64
    big, extra = nn // clients, nn % clients
    print(f"  {extra} clients of {big + 1}, {clients - extra} of {big}")


if __name__ == "__main__":
    main()
