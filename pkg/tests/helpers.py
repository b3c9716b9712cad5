"""Shared test fixtures: random reticular coordinate changes."""
from fractions import Fraction

from retfront.jetalg import JetPoly


def random_change(ctx, L, rng):
    """x -> x * unit, y -> linear in (x, y) with invertible y-block."""
    nv = ctx.nvars
    images = []
    xs = list(ctx.role_indices("x"))
    ys = list(ctx.role_indices("y"))
    while True:
        A = [[Fraction(rng.randint(-3, 3)) for _ in ys] for _ in ys]
        if det(A) != 0:
            break
    for i in xs:
        unit = JetPoly.constant(ctx, L, rng.randint(1, 3))
        for j in range(nv):
            unit = unit + JetPoly.variable(ctx, L, j) * Fraction(rng.randint(-2, 2), 2)
        images.append(JetPoly.variable(ctx, L, i) * unit)
    for a in range(len(ys)):
        img = JetPoly.zero(ctx, L)
        for b, yj in enumerate(ys):
            img = img + JetPoly.variable(ctx, L, yj) * A[a][b]
        for i in xs:
            img = img + JetPoly.variable(ctx, L, i) * rng.randint(-2, 2)
        images.append(img)
    unit = JetPoly.constant(ctx, L, rng.choice([-2, -1, 1, 3]))
    for j in range(nv):
        unit = unit + JetPoly.variable(ctx, L, j) * rng.randint(-2, 2)
    return images, unit


def det(A):
    n = len(A)
    if n == 0:
        return 1
    if n == 1:
        return A[0][0]
    return sum((-1) ** c * A[0][c] * det([row[:c] + row[c + 1:] for row in A[1:]])
               for c in range(n))
