"""Independent brute-force oracles used to cross-check the implementations.

Everything here is written from definitions, deliberately naive and
independent of the package's own algorithms.
"""

from __future__ import annotations

import itertools
import math

from circuitbench.circuit import ElementKind, GateFunction, Netlist


def naive_evaluate(netlist: Netlist, assignment: tuple[int, ...]) -> dict[str, int]:
    """Recursive memoized evaluation: output id -> level."""
    inputs = {sid: bit for sid, bit in zip(netlist.inputs, assignment)}
    drivers: dict[tuple[str, int], str] = {}
    for wire in netlist.wires:
        drivers[(wire.sink, wire.sink_port)] = wire.source
    by_id = {e.id: e for e in netlist.elements}
    memo: dict[str, int] = {}

    def level(element_id: str) -> int:
        if element_id in memo:
            return memo[element_id]
        element = by_id[element_id]
        if element.kind is ElementKind.BATTERY:
            value = 1
        elif element.kind is ElementKind.SWITCH:
            value = level(drivers[(element_id, 0)]) if inputs[element_id] else 0
        elif element.kind in (ElementKind.CAMOUFLAGED_GATE, ElementKind.COVERT_GATE):
            truth = element.truth
            vals = [level(drivers[(element_id, p)]) for p in truth.effective_inputs]
            if truth.actual_kind is GateFunction.AND:
                value = vals[0] & vals[1]
            elif truth.actual_kind is GateFunction.OR:
                value = vals[0] | vals[1]
            else:
                value = 1 - vals[0]
        elif element.kind is ElementKind.AND_GATE:
            value = level(drivers[(element_id, 0)]) & level(drivers[(element_id, 1)])
        elif element.kind is ElementKind.OR_GATE:
            value = level(drivers[(element_id, 0)]) | level(drivers[(element_id, 1)])
        elif element.kind is ElementKind.NOT_GATE:
            value = 1 - level(drivers[(element_id, 0)])
        else:  # wire joint, lamp, danger sign: pass through port 0
            value = level(drivers[(element_id, 0)])
        memo[element_id] = value
        return value

    return {oid: level(oid) for oid in netlist.outputs}


def affine_distance_nonlinearity(table: list[int]) -> int:
    """Minimum Hamming distance to any affine function, by enumeration."""
    size = len(table)
    n = size.bit_length() - 1
    best = size
    for coeffs in itertools.product((0, 1), repeat=n):
        for constant in (0, 1):
            dist = 0
            for index in range(size):
                bits = [(index >> (n - 1 - i)) & 1 for i in range(n)]
                affine = constant
                for c, b in zip(coeffs, bits):
                    affine ^= c & b
                dist += affine != table[index]
            best = min(best, dist)
    return best


# --- statistics from definitions -------------------------------------------

def mean(x):
    return sum(x) / len(x)


def sample_var(x):
    m = mean(x)
    return sum((v - m) ** 2 for v in x) / (len(x) - 1)


def pearson_oracle(x, y):
    mx, my = mean(x), mean(y)
    num = sum((a - mx) * (b - my) for a, b in zip(x, y))
    den = math.sqrt(sum((a - mx) ** 2 for a in x) * sum((b - my) ** 2 for b in y))
    return num / den


def ranks_oracle(x):
    out = []
    for v in x:
        below = sum(1 for w in x if w < v)
        equal = sum(1 for w in x if w == v)
        out.append(below + (equal + 1) / 2)
    return out


def spearman_oracle(x, y):
    return pearson_oracle(ranks_oracle(x), ranks_oracle(y))


def kendall_oracle(x, y):
    n = len(x)
    concordant = discordant = tx = ty = 0
    for i in range(n):
        for j in range(i + 1, n):
            a, b = x[i] - x[j], y[i] - y[j]
            if a == 0:
                tx += 1
            if b == 0:
                ty += 1
            if a * b > 0:
                concordant += 1
            elif a * b < 0:
                discordant += 1
    pairs = n * (n - 1) / 2
    return (concordant - discordant) / math.sqrt((pairs - tx) * (pairs - ty))


def zscores_oracle(x):
    m, sd = mean(x), math.sqrt(sample_var(x))
    return [(v - m) / sd for v in x]


def cronbach_oracle(rows):
    k = len(rows[0])
    item_vars = [sample_var([r[j] for r in rows]) for j in range(k)]
    total = sample_var([sum(r) for r in rows])
    return k / (k - 1) * (1 - sum(item_vars) / total)


def welch_oracle(groups):
    k = len(groups)
    w = [len(g) / sample_var(g) for g in groups]
    m = [mean(g) for g in groups]
    w_sum = sum(w)
    grand = sum(wi * mi for wi, mi in zip(w, m)) / w_sum
    between = sum(wi * (mi - grand) ** 2 for wi, mi in zip(w, m)) / (k - 1)
    lam = (3 / (k * k - 1)) * sum((1 - wi / w_sum) ** 2 / (len(g) - 1)
                                  for wi, g in zip(w, groups))
    f = between / (1 + 2 * lam * (k - 2) / 3)
    return f, float(k - 1), 1 / lam
