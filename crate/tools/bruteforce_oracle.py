#!/usr/bin/env python3
"""Brute-force gate-count oracle, independent of the Rust search code.

Enumerates every circuit over the default gate set level by level, with no
deduplication, using dense 2^n x 2^n gate matrices built from Kronecker
products. Prints the minimal costs as JSON; the Rust tests freeze them.
"""
import itertools
import json
import sys

import numpy as np

S2 = 1 / np.sqrt(2)
ONE_SITE = {
    "H": np.array([[S2, S2], [S2, -S2]], dtype=complex),
    "T": np.diag([1, np.exp(1j * np.pi / 4)]),
    "Tdg": np.diag([1, np.exp(-1j * np.pi / 4)]),
    "S": np.diag([1, 1j]),
    "Sdg": np.diag([1, -1j]),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.diag([1, -1]).astype(complex),
}


def embed_one(u, site, n):
    # Little-endian: site k is bit k, so it is the k-th factor from the right.
    ops = [np.eye(2)] * n
    ops[n - 1 - site] = u
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


def cnot(control, target, n):
    dim = 2**n
    m = np.zeros((dim, dim), dtype=complex)
    for x in range(dim):
        y = x ^ (1 << target) if (x >> control) & 1 else x
        m[y, x] = 1
    return m


def gate_matrices(n):
    mats = []
    for name, u in ONE_SITE.items():
        for s in range(n):
            mats.append((f"{name}@{s}", embed_one(u, s, n)))
    for a in range(n - 1):
        mats.append((f"CNOT@{a},{a+1}", cnot(a, a + 1, n)))
        mats.append((f"CNOT@{a+1},{a}", cnot(a + 1, a, n)))
    return mats


def basis(n, idx):
    v = np.zeros(2**n, dtype=complex)
    v[idx] = 1
    return v


def min_cost(n, frame, score, threshold, max_cost, slack=1e-12):
    """Least level at which some circuit's frame image meets the threshold."""
    mats = np.stack([m for _, m in gate_matrices(n)])
    level = np.stack(frame)[None, :, :]  # (circuits, frame, dim)
    for cost in range(max_cost + 1):
        if np.any(score(level) >= threshold - slack):
            return cost
        if cost == max_cost:
            break
        # Next level: every move applied to every circuit, no dedup. Evaluate
        # the final level in chunks without materializing it.
        if cost + 1 == max_cost:
            for m in mats:
                nxt = np.einsum("ij,cfj->cfi", m, level)
                if np.any(score(nxt) >= threshold - slack):
                    return cost + 1
            return None
        level = np.einsum("mij,cfj->mcfi", mats, level).reshape(-1, level.shape[1], level.shape[2])
    return None


def distinguish(a, b):
    def score(imgs):
        da = np.einsum("j,cj->c", a.conj(), imgs[:, 0])
        db = np.einsum("j,cj->c", b.conj(), imgs[:, 1])
        return np.abs(da - db) / 2
    return score


def interfere(a, b):
    def score(imgs):
        ab = np.abs(np.einsum("j,cj->c", a.conj(), imgs[:, 1]))
        ba = np.abs(np.einsum("j,cj->c", b.conj(), imgs[:, 0]))
        return (ab + ba) / 2
    return score


def state_map(target):
    def score(imgs):
        return np.abs(np.einsum("j,cj->c", target.conj(), imgs[:, 0]))
    return score


def main():
    eps = 0.1
    out = {"epsilon": eps, "ghz": {}, "misc": {}}
    for n in (2, 3, 4):
        a, b = basis(n, 0), basis(n, 2**n - 1)
        c_d = min_cost(n, [a, b], distinguish(a, b), 1 - eps, 4)
        c_i = min_cost(n, [a, b], interfere(a, b), eps, 4)
        out["ghz"][str(n)] = {"c_d": c_d, "c_i": c_i, "branchiness": c_i - c_d}
        print(f"GHZ_{n}: C_D={c_d} C_I={c_i}", file=sys.stderr)

    n = 2
    ghz2 = (basis(2, 0) + basis(2, 3)) * S2
    out["misc"]["state_map_00_to_ghz2"] = min_cost(2, [basis(2, 0)], state_map(ghz2), 0.99, 4)
    out["misc"]["state_map_00_to_11"] = min_cost(2, [basis(2, 0)], state_map(basis(2, 3)), 0.99, 4)
    out["misc"]["state_map_0000_to_1111"] = min_cost(4, [basis(4, 0)], state_map(basis(4, 15)), 0.99, 4)
    # |+>|+> split on the first qubit.
    plus = np.array([S2, S2], dtype=complex)
    pp0 = np.kron(plus, np.array([1, 0], dtype=complex))  # site 0 = 0, site 1 = |+>
    pp1 = np.kron(plus, np.array([0, 1], dtype=complex))
    out["misc"]["plus_plus_split_c_d"] = min_cost(2, [pp0, pp1], distinguish(pp0, pp1), 1 - eps, 3)
    out["misc"]["plus_plus_split_c_i"] = min_cost(2, [pp0, pp1], interfere(pp0, pp1), eps, 3)
    # Bell partners (|01> +- |10>)/sqrt2.
    bp = (basis(2, 1) + basis(2, 2)) * S2
    bm = (basis(2, 1) - basis(2, 2)) * S2
    out["misc"]["bell_partners_c_d"] = min_cost(2, [bp, bm], distinguish(bp, bm), 1 - eps, 3)
    out["misc"]["bell_partners_c_i"] = min_cost(2, [bp, bm], interfere(bp, bm), eps, 3)
    # |0...0> vs |1...1> at n=6: nothing interferes at cost <= 2.
    a6, b6 = basis(6, 0), basis(6, 63)
    out["misc"]["n6_interfere_at_most_2"] = min_cost(6, [a6, b6], interfere(a6, b6), eps, 2)
    json.dump(out, sys.stdout, indent=2, sort_keys=True)
    print()


if __name__ == "__main__":
    main()
