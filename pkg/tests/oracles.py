"""Independent reference computations (plain numpy, no package code)."""
import numpy as np

# frozen from kv_sup_bruteforce(400); attained at s(1, 1, -1)
KV_SUP = 5.0
# ||p(T)|| for the KV triple: p(T) e0 = 3 sqrt(3) g
KV_NORM = 3 * np.sqrt(3)
KV_MARGIN = KV_NORM - KV_SUP


def kv_sup_bruteforce(grid: int = 400) -> float:
    """max |e1^2 - 4 e2| over s(T^3), enumerating angle triples i <= j <= k."""
    w = np.exp(2j * np.pi * np.arange(grid) / grid)
    best = 0.0
    for i in range(grid):
        a = w[i]
        b = w[i:, None]
        c = w[None, i:]
        e1 = a + b + c
        e2 = a * b + a * c + b * c
        v = np.abs(e1 ** 2 - 4 * e2)
        v = np.triu(v)  # keep j <= k
        best = max(best, float(v.max()))
    return best


def torus_sup_bruteforce(f, n: int, grid: int) -> float:
    """max |f(z)| over the full grid^n torus lattice, f acting on rows of z."""
    ang = np.stack(np.meshgrid(*[np.arange(grid)] * n, indexing="ij"), -1).reshape(-1, n)
    return float(np.abs(f(np.exp(2j * np.pi * ang / grid))).max())


def esym_rows(Z: np.ndarray) -> np.ndarray:
    """Elementary symmetric functions of each row via np.poly."""
    return np.stack([np.poly(z)[1:] * (-1) ** np.arange(1, Z.shape[1] + 1) for z in Z])
