"""Independent reference implementations used only by the tests."""
import itertools
from math import gcd


def bareiss_det(M) -> int:
    """Fraction-free determinant."""
    A = [list(r) for r in M]
    n = len(A)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k]:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def determinantal_divisors(M) -> list[int]:
    """Elementary divisors as ratios of gcds of k-minors; small matrices only."""
    r, c = len(M), len(M[0])
    dets = [1]
    for k in range(1, min(r, c) + 1):
        g = 0
        for rows in itertools.combinations(range(r), k):
            for cols in itertools.combinations(range(c), k):
                g = gcd(g, bareiss_det([[M[i][j] for j in cols] for i in rows]))
        if g == 0:
            break
        dets.append(g)
    return [dets[k] // dets[k - 1] for k in range(1, len(dets))]


def textbook_snf(M) -> list[int]:
    """Dense integer Smith form by repeated smallest-pivot reduction."""
    A = [list(r) for r in M]
    rows, cols = len(A), len(A[0]) if A else 0
    out = []
    t = 0
    while t < min(rows, cols):
        nz = [(abs(A[i][j]), i, j) for i in range(t, rows) for j in range(t, cols) if A[i][j]]
        if not nz:
            break
        _, i, j = min(nz)
        A[t], A[i] = A[i], A[t]
        for row in A:
            row[t], row[j] = row[j], row[t]
        done = False
        while not done:
            done = True
            p = A[t][t]
            for i in range(t + 1, rows):
                q = A[i][t] // p
                if q:
                    A[i] = [x - q * y for x, y in zip(A[i], A[t])]
                if A[i][t]:
                    done = False
            for j in range(t + 1, cols):
                q = A[t][j] // p
                if q:
                    for row in A:
                        row[j] -= q * row[t]
                if A[t][j]:
                    done = False
            if not done:
                nz = [(abs(A[i][t]), i, t) for i in range(t, rows) if A[i][t]] + \
                     [(abs(A[t][j]), t, j) for j in range(t, cols) if A[t][j]]
                _, i, j = min(nz)
                A[t], A[i] = A[i], A[t]
                for row in A:
                    row[t], row[j] = row[j], row[t]
                continue
            # the pivot must divide the rest of the block
            bad = [(i, j) for i in range(t + 1, rows) for j in range(t + 1, cols) if A[i][j] % p]
            if bad:
                i, _ = bad[0]
                A[t] = [x + y for x, y in zip(A[t], A[i])]
                done = False
        out.append(abs(A[t][t]))
        t += 1
    return out
