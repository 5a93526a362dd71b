import numpy as np
import pytest

from psclf.polar_code import PolarCode, polar_transform


@pytest.fixture(scope="session")
def code128():
    return PolarCode.construct(128, 64, 8, 2.0)


@pytest.fixture(scope="session")
def code1024():
    return PolarCode.construct(1024, 512, 32, 2.0)


# --------------------------------------------------------------------------
# reference decoders written straight from the recursive definitions


def ref_f(a, b):
    return np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))


def ref_sc(llr, frozen, flip=-1, offset=0):
    """Recursive min-sum SC. Returns (u_hat, x_hat)."""
    N = llr.size
    if N == 1:
        b = 0 if frozen[0] else int(llr[0] < 0)
        if offset == flip and not frozen[0]:
            b ^= 1
        return np.array([b], dtype=np.uint8), np.array([b], dtype=np.uint8)
    h = N // 2
    a, b = llr[:h], llr[h:]
    u1, x1 = ref_sc(ref_f(a, b), frozen[:h], flip, offset)
    u2, x2 = ref_sc(b + (1 - 2 * x1.astype(float)) * a, frozen[h:], flip, offset + h)
    return np.concatenate([u1, u2]), np.concatenate([x1 ^ x2, x2])


def ref_leaf_llr(llr, prefix, i):
    """LLR of bit i given decisions u_0..u_{i-1} (min-sum)."""
    N = llr.size
    if N == 1:
        return float(llr[0])
    h = N // 2
    a, b = llr[:h], llr[h:]
    if i < h:
        return ref_leaf_llr(ref_f(a, b), prefix[:i], i)
    x1 = polar_transform(np.asarray(prefix[:h], dtype=np.uint8))
    return ref_leaf_llr(b + (1 - 2 * x1.astype(float)) * a, prefix[h:i], i - h)


def ref_scl(llr, frozen, L, flip=-1):
    """Plain-list SCL with full path copies.

    Returns (paths, pms, rec_best, rec_lth) with paths as tuples.
    """
    N = llr.size
    paths = [((), 0.0)]
    best = np.full(N, np.nan)
    lth = np.full(N, np.nan)

    def upd(pm, v, bit):
        return pm + abs(v) if bit != int(v < 0) else pm

    for i in range(N):
        leafs = [ref_leaf_llr(llr, np.array(u, dtype=np.uint8), i) for u, _ in paths]
        if frozen[i]:
            paths = [(u + (0,), upd(pm, v, 0)) for (u, pm), v in zip(paths, leafs)]
            continue
        cands = []
        for (u, pm), v in zip(paths, leafs):
            cands.append((u + (0,), upd(pm, v, 0)))
            cands.append((u + (1,), upd(pm, v, 1)))
        if len(cands) <= L:
            paths = cands
            continue
        order = sorted(range(len(cands)), key=lambda k: cands[k][1])
        best[i] = cands[order[0]][1]
        lth[i] = cands[order[L]][1]
        keep = order[L:2 * L] if i == flip else order[:L]
        paths = [cands[k] for k in keep]
    return paths, best, lth


def pytest_terminal_summary(terminalreporter, config):
    lines = config.__dict__.get("acceptance_lines")
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
